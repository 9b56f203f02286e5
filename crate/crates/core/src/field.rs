//! Exact arithmetic in `Q(ζ)(√p₁, …, √p_k)` with `ζ` a primitive 12th root
//! of unity.
//!
//! The base field `Q(ζ)` has the power basis `1, ζ, ζ², ζ³` modulo
//! `ζ⁴ − ζ² + 1`. It already contains `i = ζ³`, `j = ζ⁴` and
//! `√3 = 2ζ − ζ³`, so only primes other than 3 are ever adjoined. An element
//! is stored sparsely: basis index `4·mask + a` stands for
//! `ζ^a · Π_{i ∈ mask} √p_i`.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Mutex;

use num_integer::Integer;
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::rational::Rational;

/// A field `Q(ζ₁₂)(√p₁, …, √p_k)`. Descriptors are interned, so a [`Field`]
/// is a cheap copyable handle and two handles are equal iff their radical
/// lists are.
#[derive(Debug, PartialEq, Eq)]
pub struct FieldDescriptor {
    radicals: Vec<u64>,
    /// `radicands[mask]` = product of the primes selected by `mask`.
    radicands: Vec<u64>,
}

pub type Field = &'static FieldDescriptor;

static REGISTRY: Mutex<Vec<Field>> = Mutex::new(Vec::new());

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl FieldDescriptor {
    /// `Q(ζ₁₂)` itself.
    pub fn base() -> Field {
        Self::intern(Vec::new())
    }

    /// The field with the given adjoined primes (any order; duplicates and
    /// 3 are rejected).
    pub fn with_radicals(primes: &[u64]) -> Result<Field> {
        let mut radicals = primes.to_vec();
        radicals.sort_unstable();
        for w in radicals.windows(2) {
            if w[0] == w[1] {
                return Err(Error::Domain(format!("radical {} listed twice", w[0])));
            }
        }
        for &p in &radicals {
            if p == 3 {
                return Err(Error::Domain("√3 lies in the base field and is never adjoined".into()));
            }
            if !is_prime(p) {
                return Err(Error::Domain(format!("radical {p} is not a prime")));
            }
        }
        if radicals.len() > 8 {
            return Err(Error::Domain("too many radicals".into()));
        }
        Ok(Self::intern(radicals))
    }

    fn intern(radicals: Vec<u64>) -> Field {
        let mut reg = REGISTRY.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(f) = reg.iter().find(|f| f.radicals == radicals) {
            return f;
        }
        let radicands = (0..1usize << radicals.len())
            .map(|mask| {
                radicals
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, p)| *p)
                    .product()
            })
            .collect();
        let f: Field = Box::leak(Box::new(FieldDescriptor { radicals, radicands }));
        reg.push(f);
        f
    }

    pub fn radicals(&self) -> &[u64] {
        &self.radicals
    }

    /// Degree over `Q`: `4 · 2^k`.
    pub fn degree(&self) -> usize {
        4 << self.radicals.len()
    }

    pub fn is_base(&self) -> bool {
        self.radicals.is_empty()
    }

    /// Smallest descriptor containing both.
    pub fn join(a: Field, b: Field) -> Field {
        if std::ptr::eq(a, b) || b.radicals.iter().all(|p| a.radicals.contains(p)) {
            return a;
        }
        if a.radicals.iter().all(|p| b.radicals.contains(p)) {
            return b;
        }
        let mut r = a.radicals.clone();
        r.extend(b.radicals.iter().filter(|p| !a.radicals.contains(p)));
        r.sort_unstable();
        Self::intern(r)
    }

    pub fn contains(&self, other: &FieldDescriptor) -> bool {
        other.radicals.iter().all(|p| self.radicals.contains(p))
    }

    /// Stable textual id, e.g. `q12` or `q12+2+5`.
    pub fn id(&self) -> String {
        let mut s = String::from("q12");
        for p in &self.radicals {
            s.push('+');
            s.push_str(&p.to_string());
        }
        s
    }

    pub fn parse_id(id: &str) -> Result<Field> {
        let mut parts = id.split('+');
        if parts.next() != Some("q12") {
            return Err(Error::Domain(format!("bad field id {id:?}")));
        }
        let primes = parts
            .map(|p| p.parse::<u64>().map_err(|_| Error::Domain(format!("bad field id {id:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::with_radicals(&primes)
    }

    pub(crate) fn key_bytes(&self, out: &mut Vec<u8>) {
        out.push(self.radicals.len() as u8);
        for p in &self.radicals {
            out.extend_from_slice(&p.to_be_bytes());
        }
    }
}

/// `ζ^n` for `0 ≤ n < 12` in the power basis: list of `(a, ±1)`.
const ZETA_POW: [&[(u8, i8)]; 12] = [
    &[(0, 1)],
    &[(1, 1)],
    &[(2, 1)],
    &[(3, 1)],
    &[(2, 1), (0, -1)],
    &[(3, 1), (1, -1)],
    &[(0, -1)],
    &[(1, -1)],
    &[(2, -1)],
    &[(3, -1)],
    &[(2, -1), (0, 1)],
    &[(3, -1), (1, 1)],
];

type Terms = SmallVec<[(u16, Rational); 2]>;

/// An element of a [`FieldDescriptor`] field.
#[derive(Clone)]
pub struct TowerElement {
    field: Field,
    /// nonzero coordinates, strictly increasing basis index
    terms: Terms,
}

fn acc_add(acc: &mut SmallVec<[(u16, Rational); 8]>, idx: u16, c: Rational) {
    if let Some(slot) = acc.iter_mut().find(|(i, _)| *i == idx) {
        slot.1 += &c;
    } else {
        acc.push((idx, c));
    }
}

impl TowerElement {
    pub fn zero(field: Field) -> Self {
        TowerElement { field, terms: Terms::new() }
    }

    pub fn one(field: Field) -> Self {
        Self::from_rational(field, Rational::ONE)
    }

    pub fn from_int(field: Field, n: i64) -> Self {
        Self::from_rational(field, Rational::from_int(n))
    }

    pub fn from_rational(field: Field, q: Rational) -> Self {
        let mut terms = Terms::new();
        if !q.is_zero() {
            terms.push((0, q));
        }
        TowerElement { field, terms }
    }

    /// `ζ^n` for any integer `n`.
    pub fn zeta_pow(field: Field, n: i64) -> Self {
        let n = n.rem_euclid(12) as usize;
        let mut terms: Terms = ZETA_POW[n]
            .iter()
            .map(|&(a, s)| (a as u16, Rational::from_int(s as i64)))
            .collect();
        terms.sort_by_key(|t| t.0);
        TowerElement { field, terms }
    }

    pub fn zeta(field: Field) -> Self {
        Self::zeta_pow(field, 1)
    }

    /// The primitive cube root of unity `j = ζ⁴ = e^{2πi/3}`.
    pub fn j(field: Field) -> Self {
        Self::zeta_pow(field, 4)
    }

    /// `√3 = 2ζ − ζ³`.
    pub fn sqrt3(field: Field) -> Self {
        Self::from_coords(
            field,
            &[Rational::ZERO, Rational::from_int(2), Rational::ZERO, Rational::from_int(-1)],
        )
    }

    /// The basis element `√p` for an adjoined prime `p`.
    pub fn radical(field: Field, p: u64) -> Result<Self> {
        let pos = field
            .radicals
            .iter()
            .position(|&q| q == p)
            .ok_or_else(|| Error::Domain(format!("√{p} is not adjoined in {}", field.id())))?;
        let mut terms = Terms::new();
        terms.push(((4usize << pos) as u16, Rational::ONE));
        Ok(TowerElement { field, terms })
    }

    /// Build from dense coordinates (missing trailing coordinates are zero).
    pub fn from_coords(field: Field, coords: &[Rational]) -> Self {
        assert!(coords.len() <= field.degree(), "too many coordinates");
        let terms = coords
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (i as u16, c.clone()))
            .collect();
        TowerElement { field, terms }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    /// Dense coordinates, index `4·mask + a`.
    pub fn coords(&self) -> Vec<Rational> {
        let mut v = vec![Rational::ZERO; self.field.degree()];
        for (i, c) in &self.terms {
            v[*i as usize] = c.clone();
        }
        v
    }

    pub fn coord(&self, idx: usize) -> Rational {
        self.terms
            .iter()
            .find(|(i, _)| *i as usize == idx)
            .map(|(_, c)| c.clone())
            .unwrap_or(Rational::ZERO)
    }

    /// Nonzero `(basis index, coefficient)` pairs.
    pub fn terms(&self) -> impl Iterator<Item = (usize, &Rational)> {
        self.terms.iter().map(|(i, c)| (*i as usize, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0 == 0 && self.terms[0].1.is_one()
    }

    /// The rational value if the element lies in `Q`.
    pub fn as_rational(&self) -> Option<Rational> {
        match self.terms.as_slice() {
            [] => Some(Rational::ZERO),
            [(0, q)] => Some(q.clone()),
            _ => None,
        }
    }

    pub fn is_rational(&self) -> bool {
        self.as_rational().is_some()
    }

    /// Re-express in a larger field.
    pub fn promote(&self, to: Field) -> TowerElement {
        if std::ptr::eq(self.field, to) {
            return self.clone();
        }
        assert!(to.contains(self.field), "cannot promote {} into {}", self.field.id(), to.id());
        let map: Vec<usize> = self
            .field
            .radicals
            .iter()
            .map(|p| to.radicals.iter().position(|q| q == p).unwrap())
            .collect();
        let mut terms: Terms = self
            .terms
            .iter()
            .map(|(i, c)| {
                let (mask, a) = ((*i >> 2) as usize, *i & 3);
                let new_mask: usize = map
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| mask >> b & 1 == 1)
                    .map(|(_, &t)| 1 << t)
                    .sum();
                (((new_mask << 2) as u16) | a, c.clone())
            })
            .collect();
        terms.sort_by_key(|t| t.0);
        TowerElement { field: to, terms }
    }

    fn unify<'a>(
        a: &'a TowerElement,
        b: &'a TowerElement,
    ) -> (std::borrow::Cow<'a, TowerElement>, std::borrow::Cow<'a, TowerElement>) {
        use std::borrow::Cow;
        if std::ptr::eq(a.field, b.field) {
            return (Cow::Borrowed(a), Cow::Borrowed(b));
        }
        let f = FieldDescriptor::join(a.field, b.field);
        (Cow::Owned(a.promote(f)), Cow::Owned(b.promote(f)))
    }

    pub fn add(&self, rhs: &TowerElement) -> TowerElement {
        if !std::ptr::eq(self.field, rhs.field) {
            let (a, b) = Self::unify(self, rhs);
            return a.add(&b);
        }
        let (x, y) = (&self.terms, &rhs.terms);
        if y.is_empty() {
            return self.clone();
        }
        if x.is_empty() {
            return rhs.clone();
        }
        let mut out = Terms::with_capacity(x.len() + y.len());
        let (mut i, mut k) = (0, 0);
        while i < x.len() && k < y.len() {
            match x[i].0.cmp(&y[k].0) {
                std::cmp::Ordering::Less => {
                    out.push(x[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(y[k].clone());
                    k += 1;
                }
                std::cmp::Ordering::Equal => {
                    let s = &x[i].1 + &y[k].1;
                    if !s.is_zero() {
                        out.push((x[i].0, s));
                    }
                    i += 1;
                    k += 1;
                }
            }
        }
        out.extend(x[i..].iter().cloned());
        out.extend(y[k..].iter().cloned());
        TowerElement { field: self.field, terms: out }
    }

    pub fn neg(&self) -> TowerElement {
        TowerElement {
            field: self.field,
            terms: self.terms.iter().map(|(i, c)| (*i, -c)).collect(),
        }
    }

    pub fn sub(&self, rhs: &TowerElement) -> TowerElement {
        self.add(&rhs.neg())
    }

    pub fn scale(&self, q: &Rational) -> TowerElement {
        if q.is_zero() {
            return Self::zero(self.field);
        }
        TowerElement {
            field: self.field,
            terms: self.terms.iter().map(|(i, c)| (*i, c * q)).collect(),
        }
    }

    pub fn mul(&self, rhs: &TowerElement) -> TowerElement {
        if !std::ptr::eq(self.field, rhs.field) {
            let (a, b) = Self::unify(self, rhs);
            return a.mul(&b);
        }
        let (x, y) = (&self.terms, &rhs.terms);
        if x.is_empty() || y.is_empty() {
            return Self::zero(self.field);
        }
        if let [(0, q)] = x.as_slice() {
            return rhs.scale(q);
        }
        if let [(0, q)] = y.as_slice() {
            return self.scale(q);
        }
        let radicands = &self.field.radicands;
        let mut acc: SmallVec<[(u16, Rational); 8]> = SmallVec::new();
        for (i1, c1) in x {
            let (m1, a1) = (*i1 >> 2, *i1 & 3);
            for (i2, c2) in y {
                let (m2, a2) = (*i2 >> 2, *i2 & 3);
                let mut c = c1 * c2;
                let common = radicands[(m1 & m2) as usize];
                if common != 1 {
                    c = &c * &Rational::from_int(common as i64);
                }
                let base = (m1 ^ m2) << 2;
                for &(a, s) in ZETA_POW[(a1 + a2) as usize] {
                    let term = if s > 0 { c.clone() } else { -&c };
                    acc_add(&mut acc, base | a as u16, term);
                }
            }
        }
        let mut terms: Terms = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_unstable_by_key(|t| t.0);
        TowerElement { field: self.field, terms }
    }

    /// `Σ a_i·b_i` over one field. Coordinates are accumulated as 128-bit
    /// numerators over the common denominators of the two sides and reduced
    /// once at the end; falls back to term-wise arithmetic on overflow.
    pub fn dot<'a>(field: Field, pairs: &[(&'a TowerElement, &'a TowerElement)]) -> TowerElement {
        Self::dot_fast(field, pairs).unwrap_or_else(|| {
            pairs.iter().fold(Self::zero(field), |acc, (a, b)| acc.add(&a.mul(b)))
        })
    }

    fn dot_fast(field: Field, pairs: &[(&TowerElement, &TowerElement)]) -> Option<TowerElement> {
        let common_denom = |side: &mut dyn Iterator<Item = &TowerElement>| -> Option<i128> {
            let mut l: i128 = 1;
            for x in side {
                if !std::ptr::eq(x.field, field) {
                    return None;
                }
                for (_, c) in &x.terms {
                    let (_, d) = c.as_small()?;
                    l = l.lcm(&(d as i128));
                    if l > 1 << 40 {
                        return None;
                    }
                }
            }
            Some(l)
        };
        let dx = common_denom(&mut pairs.iter().map(|p| p.0))?;
        let dy = common_denom(&mut pairs.iter().map(|p| p.1))?;
        let radicands = &field.radicands;
        let mut acc: SmallVec<[i128; 64]> = SmallVec::from_elem(0, field.degree());
        for (a, b) in pairs {
            for (i1, c1) in &a.terms {
                let (n1, d1) = c1.as_small()?;
                let x = (n1 as i128).checked_mul(dx / d1 as i128)?;
                let (m1, a1) = (*i1 >> 2, *i1 & 3);
                for (i2, c2) in &b.terms {
                    let (n2, d2) = c2.as_small()?;
                    let y = (n2 as i128).checked_mul(dy / d2 as i128)?;
                    let (m2, a2) = (*i2 >> 2, *i2 & 3);
                    let c = x.checked_mul(y)?.checked_mul(radicands[(m1 & m2) as usize] as i128)?;
                    let base = ((m1 ^ m2) << 2) as usize;
                    for &(a, s) in ZETA_POW[(a1 + a2) as usize] {
                        let slot = &mut acc[base | a as usize];
                        *slot = if s > 0 { slot.checked_add(c)? } else { slot.checked_sub(c)? };
                    }
                }
            }
        }
        let d = dx.checked_mul(dy)?;
        let terms: Terms = acc
            .iter()
            .enumerate()
            .filter(|(_, n)| **n != 0)
            .map(|(i, &n)| (i as u16, Rational::from_i128(n, d)))
            .collect();
        Some(TowerElement { field, terms })
    }

    pub fn square(&self) -> TowerElement {
        self.mul(self)
    }

    /// `self^e`; negative exponents invert.
    pub fn pow(&self, e: i64) -> Result<TowerElement> {
        let mut base = if e < 0 { self.inv()? } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = Self::one(self.field);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.square();
            }
        }
        Ok(acc)
    }

    /// Negate every term involving the `r`-th radical (`√p_r ↦ −√p_r`).
    fn flip_radical(&self, r: usize) -> TowerElement {
        TowerElement {
            field: self.field,
            terms: self
                .terms
                .iter()
                .map(|(i, c)| if (*i >> 2) >> r & 1 == 1 { (*i, -c) } else { (*i, c.clone()) })
                .collect(),
        }
    }

    /// The automorphism `ζ ↦ ζ^k` (k odd, coprime to 12) fixing every `√p`.
    pub fn galois_zeta(&self, k: i64) -> TowerElement {
        debug_assert!(k.rem_euclid(2) == 1 && k.rem_euclid(3) != 0);
        let mut acc: SmallVec<[(u16, Rational); 8]> = SmallVec::new();
        for (i, c) in &self.terms {
            let (m, a) = (*i >> 2, (*i & 3) as i64);
            for &(b, s) in ZETA_POW[(k * a).rem_euclid(12) as usize] {
                acc_add(&mut acc, (m << 2) | b as u16, if s > 0 { c.clone() } else { -c });
            }
        }
        let mut terms: Terms = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_unstable_by_key(|t| t.0);
        TowerElement { field: self.field, terms }
    }

    /// Complex conjugation under `ζ ↦ e^{iπ/6}` with every `√p` real
    /// positive: `ζ ↦ ζ⁻¹`, radicals fixed.
    pub fn conjugate(&self) -> TowerElement {
        self.galois_zeta(11)
    }

    pub fn inv(&self) -> Result<TowerElement> {
        if self.is_zero() {
            return Err(Error::Domain("inverse of zero".into()));
        }
        if let Some(q) = self.as_rational() {
            return Ok(Self::from_rational(self.field, q.recip().unwrap()));
        }
        let mut numer = Self::one(self.field);
        let mut b = self.clone();
        for r in (0..self.field.radicals.len()).rev() {
            if b.terms.iter().all(|(i, _)| (*i >> 2) >> r & 1 == 0) {
                continue;
            }
            let c = b.flip_radical(r);
            numer = numer.mul(&c);
            b = b.mul(&c);
            if b.is_zero() {
                return Err(Error::RadicalDependence(format!(
                    "norm down √{} vanished for a nonzero element of {}",
                    self.field.radicals[r],
                    self.field.id()
                )));
            }
        }
        let c = b.galois_zeta(5).mul(&b.galois_zeta(7)).mul(&b.galois_zeta(11));
        let norm = b.mul(&c).as_rational().ok_or_else(|| {
            Error::RadicalDependence(format!("norm of {b} is not rational"))
        })?;
        if norm.is_zero() {
            return Err(Error::RadicalDependence(format!("zero norm for nonzero {self}")));
        }
        Ok(numer.mul(&c).scale(&norm.recip().unwrap()))
    }

    pub fn div(&self, rhs: &TowerElement) -> Result<TowerElement> {
        Ok(self.mul(&rhs.inv()?))
    }

    /// Injective byte encoding for a fixed descriptor: descriptor, then for
    /// each coordinate a sign byte and length-prefixed big-endian numerator
    /// and denominator magnitudes.
    pub fn canonical_key(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.field.key_bytes(&mut out);
        self.key_coords_into(&mut out);
        out
    }

    pub(crate) fn key_coords_into(&self, out: &mut Vec<u8>) {
        let mut it = self.terms.iter().peekable();
        for idx in 0..self.field.degree() {
            match it.peek() {
                Some((i, c)) if *i as usize == idx => {
                    out.push(if c.is_negative() { 2 } else { 1 });
                    for part in [c.numer(), c.denom()] {
                        let (_, mag) = part.to_bytes_be();
                        out.extend_from_slice(&(mag.len() as u32).to_be_bytes());
                        out.extend_from_slice(&mag);
                    }
                    it.next();
                }
                _ => {
                    out.push(0);
                    out.extend_from_slice(&0u32.to_be_bytes());
                    out.extend_from_slice(&1u32.to_be_bytes());
                    out.push(1);
                }
            }
        }
    }

    /// Floating-point value under `ζ ↦ e^{iπ/6}`, `√p ↦ +√p`, as `(re, im)`.
    /// Diagnostics only.
    pub fn approx(&self) -> (f64, f64) {
        let (mut re, mut im) = (0.0, 0.0);
        for (i, c) in &self.terms {
            let (m, a) = ((*i >> 2) as usize, (*i & 3) as f64);
            let r = c.to_f64() * (self.field.radicands[m] as f64).sqrt();
            let ang = a * std::f64::consts::PI / 6.0;
            re += r * ang.cos();
            im += r * ang.sin();
        }
        (re, im)
    }

    /// `id:c0 c1 …` with every coordinate written `num/den`.
    pub fn to_text(&self) -> String {
        let coords: Vec<String> = self
            .coords()
            .iter()
            .map(|c| format!("{}/{}", c.numer(), c.denom()))
            .collect();
        format!("{}:{}", self.field.id(), coords.join(" "))
    }

    pub fn from_text(s: &str) -> Result<TowerElement> {
        let (id, rest) =
            s.split_once(':').ok_or_else(|| Error::Domain(format!("bad element text {s:?}")))?;
        let field = FieldDescriptor::parse_id(id)?;
        let coords = rest
            .split_whitespace()
            .map(|c| c.parse::<Rational>().map_err(|e| Error::Domain(e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        if coords.len() != field.degree() {
            return Err(Error::Domain(format!(
                "expected {} coordinates, found {}",
                field.degree(),
                coords.len()
            )));
        }
        Ok(Self::from_coords(field, &coords))
    }
}

/// `√s` for a positive integer `s`: writes `s = q²·3^e·Πpᵢ`, takes `√3` from
/// the base and adjoins every remaining prime not already present.
pub fn adjoin_sqrt(field: Field, s: u64) -> Result<(Field, TowerElement)> {
    if s == 0 {
        return Err(Error::Domain("adjoin_sqrt of 0".into()));
    }
    let mut rest = s;
    let mut square_root_part: u64 = 1;
    let mut primes = Vec::new();
    let mut three = false;
    let mut p = 2u64;
    while p * p <= rest {
        let mut e = 0;
        while rest % p == 0 {
            rest /= p;
            e += 1;
        }
        square_root_part *= p.pow(e / 2);
        if e % 2 == 1 {
            if p == 3 {
                three = true;
            } else {
                primes.push(p);
            }
        }
        p += 1;
    }
    if rest > 1 {
        if rest == 3 {
            three = true;
        } else {
            primes.push(rest);
        }
    }
    let mut all: Vec<u64> = field.radicals().to_vec();
    for q in &primes {
        if !all.contains(q) {
            all.push(*q);
        }
    }
    let f = FieldDescriptor::with_radicals(&all)?;
    let mut r = TowerElement::from_int(f, square_root_part as i64);
    if three {
        r = r.mul(&TowerElement::sqrt3(f));
    }
    for q in primes {
        r = r.mul(&TowerElement::radical(f, q)?);
    }
    Ok((f, r))
}

/// A square root of a nonzero rational, using `i = ζ³` for the sign.
pub fn sqrt_rational(field: Field, q: &Rational) -> Result<(Field, TowerElement)> {
    if q.is_zero() {
        return Err(Error::Domain("sqrt_rational of 0".into()));
    }
    // √(n/d) = √(n·d)/d
    let n = q.numer();
    let d = q.denom();
    let nd: u64 = (num_traits::Signed::abs(&n) * &d)
        .try_into()
        .map_err(|_| Error::Domain(format!("radicand {q} too large")))?;
    let (f, mut r) = adjoin_sqrt(field, nd)?;
    r = r.scale(&Rational::from_bigints(1.into(), d));
    if q.is_negative() {
        r = r.mul(&TowerElement::zeta_pow(f, 3));
    }
    Ok((f, r))
}

impl PartialEq for TowerElement {
    fn eq(&self, other: &Self) -> bool {
        if std::ptr::eq(self.field, other.field) {
            return self.terms == other.terms;
        }
        let (a, b) = Self::unify(self, other);
        a.terms == b.terms
    }
}

impl Eq for TowerElement {}

impl Hash for TowerElement {
    /// Hashes `(a, radicand, coefficient)` triples so that equal values in
    /// different descriptors hash alike.
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_usize(self.terms.len());
        for (i, c) in &self.terms {
            state.write_u16(*i & 3);
            state.write_u64(self.field.radicands[(*i >> 2) as usize]);
            c.hash(state);
        }
    }
}

impl fmt::Display for TowerElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (i, c)) in self.terms.iter().enumerate() {
            let (m, a) = ((*i >> 2) as usize, *i & 3);
            let mut basis = String::new();
            match a {
                0 => {}
                1 => basis.push('ζ'),
                _ => basis.push_str(&format!("ζ^{a}")),
            }
            if m != 0 {
                basis.push_str(&format!("√{}", self.field.radicands[m]));
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if k > 0 {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            } else if neg {
                write!(f, "-")?;
            }
            match (basis.is_empty(), mag.is_one(), mag.is_integer()) {
                (true, _, _) => write!(f, "{mag}")?,
                (false, true, _) => write!(f, "{basis}")?,
                (false, false, true) => write!(f, "{mag}{basis}")?,
                (false, false, false) => write!(f, "({mag}){basis}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for TowerElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self} [{}]", self.field.id())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn q(n: i64) -> Rational {
        Rational::from_int(n)
    }

    fn base() -> Field {
        FieldDescriptor::base()
    }

    fn big_field() -> Field {
        FieldDescriptor::with_radicals(&[2, 5]).unwrap()
    }

    fn random_element(rng: &mut ChaCha8Rng, field: Field) -> TowerElement {
        let coords: Vec<Rational> = (0..field.degree())
            .map(|_| {
                if rng.gen_bool(0.4) {
                    Rational::ZERO
                } else {
                    Rational::new(rng.gen_range(-9..=9), rng.gen_range(1..=4))
                }
            })
            .collect();
        TowerElement::from_coords(field, &coords)
    }

    #[test]
    fn zeta_fourth_power_reduces_to_j() {
        let f = base();
        let z = TowerElement::zeta(f);
        let z4 = z.pow(4).unwrap();
        // ζ² − 1
        assert_eq!(z4.coords(), vec![q(-1), q(0), q(1), q(0)]);
        assert_eq!(z4, TowerElement::j(f));
        // Φ12(ζ) = ζ⁴ − ζ² + 1 = 0
        let phi = z4.sub(&z.pow(2).unwrap()).add(&TowerElement::one(f));
        assert!(phi.is_zero());
    }

    #[test]
    fn zeta_inverse() {
        let f = base();
        let z = TowerElement::zeta(f);
        // ζ − ζ³
        assert_eq!(z.inv().unwrap().coords(), vec![q(0), q(1), q(0), q(-1)]);
        assert_eq!(z.conjugate(), z.inv().unwrap());
    }

    #[test]
    fn identities() {
        let f = base();
        let j = TowerElement::j(f);
        assert!(j.pow(3).unwrap().is_one());
        assert!(!j.is_one());
        assert!(TowerElement::one(f).add(&TowerElement::from_int(f, -1)).is_zero());
        let s3 = TowerElement::sqrt3(f);
        assert_eq!(s3.square(), TowerElement::from_int(f, 3));
        let i = TowerElement::zeta_pow(f, 3);
        assert_eq!(i.square(), TowerElement::from_int(f, -1));
    }

    #[test]
    fn inverse_of_zero_is_domain_error() {
        assert!(matches!(TowerElement::zero(base()).inv(), Err(Error::Domain(_))));
    }

    #[test]
    fn adjoin_sqrt_examples() {
        let f = base();
        let (f1, r1) = adjoin_sqrt(f, 1).unwrap();
        assert!(std::ptr::eq(f1, f));
        assert!(r1.is_one());

        let (f12, r12) = adjoin_sqrt(f, 12).unwrap();
        assert!(std::ptr::eq(f12, f));
        assert_eq!(r12, TowerElement::sqrt3(f).scale(&q(2)));
        assert_eq!(r12.square(), TowerElement::from_int(f, 12));

        let (f2, r2) = adjoin_sqrt(f, 2).unwrap();
        assert_eq!(f2.radicals(), &[2]);
        assert_eq!(r2.square(), TowerElement::from_int(f2, 2));

        let (f90, r90) = adjoin_sqrt(f2, 90).unwrap();
        assert_eq!(f90.radicals(), &[2, 5]);
        assert_eq!(r90.square(), TowerElement::from_int(f90, 90));
    }

    #[test]
    fn sqrt_of_negative_rational() {
        let (f, r) = sqrt_rational(base(), &Rational::new(-5, 6)).unwrap();
        assert_eq!(f.radicals(), &[2, 5]);
        assert_eq!(r.square(), TowerElement::from_rational(f, Rational::new(-5, 6)));
    }

    #[test]
    fn descriptor_validation() {
        assert!(FieldDescriptor::with_radicals(&[3]).is_err());
        assert!(FieldDescriptor::with_radicals(&[2, 2]).is_err());
        assert!(FieldDescriptor::with_radicals(&[6]).is_err());
        let f = FieldDescriptor::with_radicals(&[5, 2]).unwrap();
        assert_eq!(f.radicals(), &[2, 5]);
        assert_eq!(f.degree(), 16);
        assert!(std::ptr::eq(f, FieldDescriptor::parse_id(&f.id()).unwrap()));
    }

    #[test]
    fn field_axioms_randomized() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for field in [base(), big_field()] {
            for _ in 0..60 {
                let a = random_element(&mut rng, field);
                let b = random_element(&mut rng, field);
                let c = random_element(&mut rng, field);
                assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
                assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
                assert_eq!(a.mul(&b), b.mul(&a));
                assert_eq!(a.conjugate().mul(&b.conjugate()), a.mul(&b).conjugate());
                assert_eq!(a.conjugate().conjugate(), a);
                if !a.is_zero() {
                    assert!(a.mul(&a.inv().unwrap()).is_one());
                }
            }
        }
    }

    #[test]
    fn promotion_preserves_value() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let small = FieldDescriptor::with_radicals(&[5]).unwrap();
        let big = big_field();
        for _ in 0..40 {
            let a = random_element(&mut rng, small);
            let b = random_element(&mut rng, small);
            let pa = a.promote(big);
            assert_eq!(pa, a);
            assert_eq!(pa.mul(&b.promote(big)), a.mul(&b).promote(big));
            let (x, y) = (a.approx(), pa.approx());
            assert!((x.0 - y.0).abs() < 1e-9 && (x.1 - y.1).abs() < 1e-9);
        }
        // mixed-descriptor arithmetic joins
        let r2 = TowerElement::radical(FieldDescriptor::with_radicals(&[2]).unwrap(), 2).unwrap();
        let r5 = TowerElement::radical(small, 5).unwrap();
        let r10 = r2.mul(&r5);
        assert!(std::ptr::eq(r10.field(), big));
        assert_eq!(r10.square(), TowerElement::from_int(big, 10));
    }

    #[test]
    fn canonical_key_respects_equality() {
        let f = base();
        assert_eq!(
            TowerElement::zero(f).canonical_key(),
            TowerElement::from_rational(f, Rational::new(0, 5)).canonical_key()
        );
        let z = TowerElement::zeta(f);
        let via_pow = z.pow(4).unwrap();
        let direct = z.square().sub(&TowerElement::one(f));
        assert_eq!(via_pow.canonical_key(), direct.canonical_key());

        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let field = big_field();
        let elems: Vec<TowerElement> = (0..1000).map(|_| random_element(&mut rng, field)).collect();
        let mut seen = std::collections::HashMap::new();
        for e in &elems {
            if let Some(prev) = seen.insert(e.canonical_key(), e.clone()) {
                assert_eq!(&prev, e);
            }
        }
        for w in elems.windows(2) {
            assert_eq!(w[0] == w[1], w[0].canonical_key() == w[1].canonical_key());
        }
    }

    #[test]
    fn approx_values() {
        let f = base();
        let (re, im) = TowerElement::j(f).approx();
        assert!((re + 0.5).abs() < 1e-12);
        assert!((im - 3f64.sqrt() / 2.0).abs() < 1e-12);
        assert_eq!(TowerElement::one(f).approx(), (1.0, 0.0));

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let field = big_field();
        for _ in 0..100 {
            let a = random_element(&mut rng, field);
            let b = random_element(&mut rng, field);
            let (x, y, z) = (a.approx(), b.approx(), a.mul(&b).approx());
            let prod = (x.0 * y.0 - x.1 * y.1, x.0 * y.1 + x.1 * y.0);
            assert!((prod.0 - z.0).abs() < 1e-9 && (prod.1 - z.1).abs() < 1e-9);
        }
    }

    #[test]
    fn text_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let field = big_field();
        for _ in 0..50 {
            let a = random_element(&mut rng, field);
            assert_eq!(TowerElement::from_text(&a.to_text()).unwrap(), a);
        }
        assert!(TowerElement::from_text("q12:1/1 0/1").is_err());
    }

    #[test]
    fn conjugate_fixes_rationals_and_radicals() {
        let f = big_field();
        let x = TowerElement::from_rational(f, Rational::new(-3, 7));
        assert_eq!(x.conjugate(), x);
        let r = TowerElement::radical(f, 5).unwrap();
        assert_eq!(r.conjugate(), r);
        let i = TowerElement::zeta_pow(f, 3);
        assert_eq!(i.conjugate(), i.neg());
    }

    #[test]
    fn dot_matches_termwise_sum() {
        let f = big_field();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let a: Vec<TowerElement> = (0..4).map(|_| random_element(&mut rng, f)).collect();
            let b: Vec<TowerElement> = (0..4).map(|_| random_element(&mut rng, f)).collect();
            let pairs: Vec<_> = a.iter().zip(&b).collect();
            let slow = pairs.iter().fold(TowerElement::zero(f), |acc, (x, y)| acc.add(&x.mul(y)));
            assert_eq!(TowerElement::dot(f, &pairs), slow);
        }
        // huge numerators take the fallback path
        let big = TowerElement::from_rational(f, Rational::new(i64::MAX - 1, 3)).add(&TowerElement::radical(f, 2).unwrap());
        let pairs = [(&big, &big), (&big, &big)];
        assert_eq!(TowerElement::dot(f, &pairs), big.square().add(&big.square()));
    }
}
