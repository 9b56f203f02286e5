//! Dense matrices over the tower field and over the integers.

use std::fmt;
use std::hash::{Hash, Hasher};

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::field::{Field, TowerElement};
use crate::rational::Rational;

/// Dense row-major matrix over a tower field.
#[derive(Clone)]
pub struct MatrixK {
    rows: usize,
    cols: usize,
    field: Field,
    data: Vec<TowerElement>,
}

impl MatrixK {
    pub fn new(rows: usize, cols: usize, field: Field, data: Vec<TowerElement>) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count does not match shape");
        let field = data.iter().fold(field, |f, x| crate::FieldDescriptor::join(f, x.field()));
        let data = data.into_iter().map(|x| x.promote(field)).collect();
        MatrixK { rows, cols, field, data }
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        field: Field,
        mut f: impl FnMut(usize, usize) -> TowerElement,
    ) -> Self {
        let data = (0..rows * cols).map(|k| f(k / cols, k % cols)).collect();
        Self::new(rows, cols, field, data)
    }

    pub fn zeros(rows: usize, cols: usize, field: Field) -> Self {
        MatrixK { rows, cols, field, data: vec![TowerElement::zero(field); rows * cols] }
    }

    pub fn identity(n: usize, field: Field) -> Self {
        Self::scalar(n, &TowerElement::one(field))
    }

    pub fn scalar(n: usize, x: &TowerElement) -> Self {
        let mut m = Self::zeros(n, n, x.field());
        for i in 0..n {
            m.data[i * n + i] = x.clone();
        }
        m
    }

    pub fn diagonal(entries: &[TowerElement]) -> Self {
        let n = entries.len();
        let field = entries.first().map(|x| x.field()).unwrap_or_else(crate::FieldDescriptor::base);
        Self::from_fn(n, n, field, |i, k| {
            if i == k {
                entries[i].clone()
            } else {
                TowerElement::zero(field)
            }
        })
    }

    pub fn from_ints(field: Field, rows: usize, cols: usize, values: &[i64]) -> Self {
        assert_eq!(values.len(), rows * cols);
        MatrixK {
            rows,
            cols,
            field,
            data: values.iter().map(|&v| TowerElement::from_int(field, v)).collect(),
        }
    }

    pub fn from_rationals(field: Field, rows: usize, cols: usize, values: &[Rational]) -> Self {
        assert_eq!(values.len(), rows * cols);
        MatrixK {
            rows,
            cols,
            field,
            data: values.iter().map(|v| TowerElement::from_rational(field, v.clone())).collect(),
        }
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(field: Field, columns: &[Vec<TowerElement>]) -> Self {
        let cols = columns.len();
        let rows = columns.first().map_or(0, |c| c.len());
        Self::from_fn(rows, cols, field, |i, k| columns[k][i].clone())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn get(&self, i: usize, k: usize) -> &TowerElement {
        &self.data[i * self.cols + k]
    }

    pub fn set(&mut self, i: usize, k: usize, x: TowerElement) {
        self.data[i * self.cols + k] = x.promote(self.field);
    }

    pub fn entries(&self) -> &[TowerElement] {
        &self.data
    }

    pub fn column(&self, k: usize) -> Vec<TowerElement> {
        (0..self.rows).map(|i| self.get(i, k).clone()).collect()
    }

    pub fn promote(&self, field: Field) -> MatrixK {
        if std::ptr::eq(field, self.field) {
            return self.clone();
        }
        MatrixK {
            rows: self.rows,
            cols: self.cols,
            field,
            data: self.data.iter().map(|x| x.promote(field)).collect(),
        }
    }

    pub fn mul(&self, rhs: &MatrixK) -> MatrixK {
        assert_eq!(self.cols, rhs.rows, "shape mismatch in product");
        if !std::ptr::eq(self.field, rhs.field) {
            let f = crate::FieldDescriptor::join(self.field, rhs.field);
            return self.promote(f).mul(&rhs.promote(f));
        }
        let (n, m, p) = (self.rows, self.cols, rhs.cols);
        let mut data = Vec::with_capacity(n * p);
        let mut pairs = Vec::with_capacity(m);
        for i in 0..n {
            for k in 0..p {
                pairs.clear();
                for t in 0..m {
                    let (a, b) = (&self.data[i * m + t], &rhs.data[t * p + k]);
                    if !a.is_zero() && !b.is_zero() {
                        pairs.push((a, b));
                    }
                }
                data.push(TowerElement::dot(self.field, &pairs));
            }
        }
        MatrixK { rows: n, cols: p, field: self.field, data }
    }

    pub fn mul_vec(&self, v: &[TowerElement]) -> Vec<TowerElement> {
        assert_eq!(self.cols, v.len());
        let field = v.iter().fold(self.field, |f, x| crate::FieldDescriptor::join(f, x.field()));
        if !std::ptr::eq(field, self.field) || v.iter().any(|x| !std::ptr::eq(x.field(), field)) {
            let v: Vec<TowerElement> = v.iter().map(|x| x.promote(field)).collect();
            return self.promote(field).mul_vec(&v);
        }
        (0..self.rows)
            .map(|i| {
                let pairs: Vec<_> = (0..self.cols).map(|k| (self.get(i, k), &v[k])).collect();
                TowerElement::dot(field, &pairs)
            })
            .collect()
    }

    fn zip(&self, rhs: &MatrixK, f: impl Fn(&TowerElement, &TowerElement) -> TowerElement) -> MatrixK {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        let data: Vec<_> = self.data.iter().zip(&rhs.data).map(|(a, b)| f(a, b)).collect();
        Self::new(self.rows, self.cols, self.field, data)
    }

    pub fn add(&self, rhs: &MatrixK) -> MatrixK {
        self.zip(rhs, |a, b| a.add(b))
    }

    pub fn sub(&self, rhs: &MatrixK) -> MatrixK {
        self.zip(rhs, |a, b| a.sub(b))
    }

    pub fn neg(&self) -> MatrixK {
        self.map(|x| x.neg())
    }

    pub fn scale(&self, x: &TowerElement) -> MatrixK {
        self.map(|e| e.mul(x))
    }

    pub fn map(&self, f: impl Fn(&TowerElement) -> TowerElement) -> MatrixK {
        let data: Vec<_> = self.data.iter().map(f).collect();
        Self::new(self.rows, self.cols, self.field, data)
    }

    pub fn conjugate(&self) -> MatrixK {
        self.map(|x| x.conjugate())
    }

    pub fn transpose(&self) -> MatrixK {
        Self::from_fn(self.cols, self.rows, self.field, |i, k| self.get(k, i).clone())
    }

    pub fn trace(&self) -> TowerElement {
        assert!(self.is_square());
        (0..self.rows).fold(TowerElement::zero(self.field), |acc, i| acc.add(self.get(i, i)))
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|k| {
                    let x = self.get(i, k);
                    if i == k {
                        x.is_one()
                    } else {
                        x.is_zero()
                    }
                })
            })
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    /// The scalar `c` if the matrix is `c·I`.
    pub fn as_scalar(&self) -> Option<TowerElement> {
        if !self.is_square() || self.rows == 0 {
            return None;
        }
        let c = self.get(0, 0);
        let ok = (0..self.rows).all(|i| {
            (0..self.cols).all(|k| if i == k { self.get(i, k) == c } else { self.get(i, k).is_zero() })
        });
        ok.then(|| c.clone())
    }

    /// `self·rhs == rhs·self`, stopping at the first differing entry.
    pub fn commutes_with(&self, rhs: &MatrixK) -> bool {
        assert!(self.is_square() && rhs.is_square() && self.rows == rhs.rows);
        if !std::ptr::eq(self.field, rhs.field) {
            let f = crate::FieldDescriptor::join(self.field, rhs.field);
            return self.promote(f).commutes_with(&rhs.promote(f));
        }
        let n = self.rows;
        let entry = |a: &MatrixK, b: &MatrixK, i: usize, k: usize| {
            let pairs: Vec<_> = (0..n).map(|t| (a.get(i, t), b.get(t, k))).filter(|(x, y)| !x.is_zero() && !y.is_zero()).collect();
            TowerElement::dot(self.field, &pairs)
        };
        (0..n).all(|i| (0..n).all(|k| entry(self, rhs, i, k) == entry(rhs, self, i, k)))
    }

    pub fn pow(&self, e: u64) -> MatrixK {
        assert!(self.is_square());
        let mut acc = Self::identity(self.rows, self.field);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Reduced row echelon form and pivot columns. Pivots are taken in the
    /// lowest row carrying a nonzero entry in the current column.
    pub fn rref(&self) -> Result<(MatrixK, Vec<usize>)> {
        let mut m = self.clone();
        let (rows, cols) = (m.rows, m.cols);
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == rows {
                break;
            }
            let Some(p) = (r..rows).find(|&i| !m.get(i, c).is_zero()) else {
                continue;
            };
            if p != r {
                for k in 0..cols {
                    m.data.swap(p * cols + k, r * cols + k);
                }
            }
            let inv = m.get(r, c).inv()?;
            for k in c..cols {
                let v = m.get(r, k).mul(&inv);
                m.data[r * cols + k] = v;
            }
            for i in 0..rows {
                if i == r {
                    continue;
                }
                let f = m.get(i, c).clone();
                if f.is_zero() {
                    continue;
                }
                for k in c..cols {
                    let v = m.get(i, k).sub(&f.mul(m.get(r, k)));
                    m.data[i * cols + k] = v;
                }
            }
            pivots.push(c);
            r += 1;
        }
        Ok((m, pivots))
    }

    pub fn rank(&self) -> Result<usize> {
        Ok(self.rref()?.1.len())
    }

    /// Basis of `{x : self·x = 0}` read off the reduced row echelon form:
    /// one vector per free column, with a 1 in that column.
    pub fn kernel_basis(&self) -> Result<Vec<Vec<TowerElement>>> {
        let (r, pivots) = self.rref()?;
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        Ok(free
            .iter()
            .map(|&f| {
                let mut v = vec![TowerElement::zero(self.field); self.cols];
                v[f] = TowerElement::one(self.field);
                for (row, &pc) in pivots.iter().enumerate() {
                    v[pc] = r.get(row, f).neg();
                }
                v
            })
            .collect())
    }

    pub fn det(&self) -> Result<TowerElement> {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let n = self.rows;
        let mut m = self.clone();
        let mut det = TowerElement::one(self.field);
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| !m.get(i, c).is_zero()) else {
                return Ok(TowerElement::zero(self.field));
            };
            if p != c {
                for k in 0..n {
                    m.data.swap(p * n + k, c * n + k);
                }
                det = det.neg();
            }
            let piv = m.get(c, c).clone();
            det = det.mul(&piv);
            let inv = piv.inv()?;
            for i in c + 1..n {
                let f = m.get(i, c).mul(&inv);
                if f.is_zero() {
                    continue;
                }
                for k in c..n {
                    let v = m.get(i, k).sub(&f.mul(m.get(c, k)));
                    m.data[i * n + k] = v;
                }
            }
        }
        Ok(det)
    }

    pub fn inverse(&self) -> Result<MatrixK> {
        assert!(self.is_square(), "inverse of a non-square matrix");
        let n = self.rows;
        let aug = Self::from_fn(n, 2 * n, self.field, |i, k| {
            if k < n {
                self.get(i, k).clone()
            } else if k - n == i {
                TowerElement::one(self.field)
            } else {
                TowerElement::zero(self.field)
            }
        });
        let (r, pivots) = aug.rref()?;
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Err(Error::Domain("inverse of a singular matrix".into()));
        }
        Ok(Self::from_fn(n, n, self.field, |i, k| r.get(i, n + k).clone()))
    }

    /// Determinant of the submatrix on `rows × cols` by Laplace expansion
    /// along the first row (division-free, meant for small minors).
    pub fn minor(&self, rows: &[usize], cols: &[usize]) -> TowerElement {
        debug_assert_eq!(rows.len(), cols.len());
        match rows.len() {
            0 => TowerElement::one(self.field),
            1 => self.get(rows[0], cols[0]).clone(),
            2 => {
                let neg = self.get(rows[0], cols[1]).neg();
                let pairs = [
                    (self.get(rows[0], cols[0]), self.get(rows[1], cols[1])),
                    (&neg, self.get(rows[1], cols[0])),
                ];
                TowerElement::dot(self.field, &pairs)
            }
            _ => {
                let mut cofactors = Vec::with_capacity(cols.len());
                let mut sub_cols = Vec::with_capacity(cols.len() - 1);
                for (k, &c) in cols.iter().enumerate() {
                    if self.get(rows[0], c).is_zero() {
                        continue;
                    }
                    sub_cols.clear();
                    sub_cols.extend(cols.iter().enumerate().filter(|&(t, _)| t != k).map(|(_, &c)| c));
                    let m = self.minor(&rows[1..], &sub_cols);
                    cofactors.push((c, if k % 2 == 0 { m } else { m.neg() }));
                }
                let pairs: Vec<_> = cofactors.iter().map(|(c, m)| (self.get(rows[0], *c), m)).collect();
                TowerElement::dot(self.field, &pairs)
            }
        }
    }

    /// Characteristic polynomial `det(x·I − self)`. Up to size 4 it is read
    /// off sums of principal minors; beyond that Faddeev–LeVerrier, whose
    /// only divisions are by `1, …, n`.
    pub fn char_poly(&self) -> CharPoly {
        assert!(self.is_square());
        let n = self.rows;
        let f = self.field;
        if n <= 4 {
            let mut coeffs = vec![TowerElement::zero(f); n + 1];
            coeffs[n] = TowerElement::one(f);
            for mask in 1u32..(1 << n) {
                let idx: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
                let k = idx.len();
                let m = self.minor(&idx, &idx);
                coeffs[n - k] = if k % 2 == 0 { coeffs[n - k].add(&m) } else { coeffs[n - k].sub(&m) };
            }
            return CharPoly { coeffs };
        }
        let mut coeffs = vec![TowerElement::zero(f); n + 1];
        coeffs[n] = TowerElement::one(f);
        let mut m = MatrixK::zeros(n, n, f);
        for k in 1..=n {
            // M_k = A·M_{k-1} + c_{n-k+1}·I
            let mut next = self.mul(&m);
            for i in 0..n {
                let v = next.get(i, i).add(&coeffs[n - k + 1]);
                next.data[i * n + i] = v;
            }
            m = next;
            let tr = self.mul(&m).trace();
            coeffs[n - k] = tr.scale(&Rational::new(-1, k as i64));
        }
        CharPoly { coeffs }
    }

    /// Entry-wise concatenation of canonical keys, prefixed by the shape.
    pub fn canonical_key(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&(self.rows as u32).to_be_bytes());
        out.extend_from_slice(&(self.cols as u32).to_be_bytes());
        self.field.key_bytes(&mut out);
        for x in &self.data {
            x.key_coords_into(&mut out);
        }
        out
    }
}

impl PartialEq for MatrixK {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.data == other.data
    }
}

impl Eq for MatrixK {}

impl Hash for MatrixK {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_usize(self.rows);
        state.write_usize(self.cols);
        for x in &self.data {
            x.hash(state);
        }
    }
}

impl fmt::Debug for MatrixK {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "MatrixK {}x{} over {} [", self.rows, self.cols, self.field.id())?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|k| self.get(i, k).to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

/// A monic polynomial over the tower field, coefficients lowest degree first.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CharPoly {
    coeffs: Vec<TowerElement>,
}

impl CharPoly {
    pub fn from_coeffs(coeffs: Vec<TowerElement>) -> Self {
        assert!(coeffs.last().is_some_and(|c| c.is_one()), "polynomial must be monic");
        CharPoly { coeffs }
    }

    /// `Π (x − r)` over the given roots.
    pub fn from_roots(field: Field, roots: &[TowerElement]) -> Self {
        let mut coeffs = vec![TowerElement::one(field)];
        for r in roots {
            let mut next = vec![TowerElement::zero(field); coeffs.len() + 1];
            for (k, c) in coeffs.iter().enumerate() {
                next[k + 1] = next[k + 1].add(c);
                next[k] = next[k].sub(&c.mul(r));
            }
            coeffs = next;
        }
        CharPoly { coeffs }
    }

    /// From integer coefficients, lowest degree first.
    pub fn from_ints(field: Field, coeffs: &[i64]) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&c| TowerElement::from_int(field, c)).collect())
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[TowerElement] {
        &self.coeffs
    }

    pub fn promote(&self, field: Field) -> CharPoly {
        CharPoly { coeffs: self.coeffs.iter().map(|c| c.promote(field)).collect() }
    }

    /// Horner evaluation at a square matrix.
    pub fn eval_matrix(&self, m: &MatrixK) -> MatrixK {
        let n = m.rows();
        let mut acc = MatrixK::zeros(n, n, m.field());
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(m).add(&MatrixK::scalar(n, &c.promote(m.field())));
        }
        acc
    }

    pub fn eval(&self, x: &TowerElement) -> TowerElement {
        self.coeffs
            .iter()
            .rev()
            .fold(TowerElement::zero(x.field()), |acc, c| acc.mul(x).add(c))
    }

    /// `det(I − t·g)` as the reversed polynomial `Σ c_{n−k} t^k`.
    pub fn reversed(&self) -> Vec<TowerElement> {
        self.coeffs.iter().rev().cloned().collect()
    }
}

impl fmt::Debug for CharPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| format!("({c})x^{k}"))
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

/// Square integer matrix, used for the rational (Cartan) model of E6.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntMatrix {
    n: usize,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn new(n: usize, data: Vec<i64>) -> Self {
        assert_eq!(data.len(), n * n);
        IntMatrix { n, data }
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0; n * n];
        for i in 0..n {
            data[i * n + i] = 1;
        }
        IntMatrix { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, k: usize) -> i64 {
        self.data[i * self.n + k]
    }

    pub fn entries(&self) -> &[i64] {
        &self.data
    }

    pub fn mul(&self, rhs: &IntMatrix) -> IntMatrix {
        assert_eq!(self.n, rhs.n);
        let n = self.n;
        let mut data = vec![0i64; n * n];
        for i in 0..n {
            for t in 0..n {
                let a = self.data[i * n + t];
                if a == 0 {
                    continue;
                }
                for k in 0..n {
                    data[i * n + k] += a * rhs.data[t * n + k];
                }
            }
        }
        IntMatrix { n, data }
    }

    pub fn mul_vec(&self, v: &[TowerElement]) -> Vec<TowerElement> {
        let f = v[0].field();
        (0..self.n)
            .map(|i| {
                (0..self.n).fold(TowerElement::zero(f), |acc, k| match self.get(i, k) {
                    0 => acc,
                    1 => acc.add(&v[k]),
                    -1 => acc.sub(&v[k]),
                    c => acc.add(&v[k].scale(&Rational::from_int(c))),
                })
            })
            .collect()
    }

    pub fn transpose(&self) -> IntMatrix {
        let n = self.n;
        IntMatrix { n, data: (0..n * n).map(|k| self.data[(k % n) * n + k / n]).collect() }
    }

    pub fn trace(&self) -> i64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn is_identity(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|k| self.get(i, k) == i64::from(i == k)))
    }

    pub fn commutes_with(&self, rhs: &IntMatrix) -> bool {
        let n = self.n;
        (0..n).all(|i| {
            (0..n).all(|k| {
                let ab: i64 = (0..n).map(|t| self.get(i, t) * rhs.get(t, k)).sum();
                let ba: i64 = (0..n).map(|t| rhs.get(i, t) * self.get(t, k)).sum();
                ab == ba
            })
        })
    }

    /// Bareiss fraction-free determinant.
    pub fn det(&self) -> i64 {
        let n = self.n;
        let mut m: Vec<i128> = self.data.iter().map(|&x| x as i128).collect();
        let mut sign = 1i128;
        let mut prev = 1i128;
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| m[i * n + c] != 0) else {
                return 0;
            };
            if p != c {
                for k in 0..n {
                    m.swap(p * n + k, c * n + k);
                }
                sign = -sign;
            }
            for i in c + 1..n {
                for k in c + 1..n {
                    m[i * n + k] = (m[i * n + k] * m[c * n + c] - m[i * n + c] * m[c * n + k]) / prev;
                }
                m[i * n + c] = 0;
            }
            prev = m[c * n + c];
        }
        (sign * m[n * n - 1]) as i64
    }

    /// Characteristic polynomial `det(x·I − self)`, integer coefficients
    /// lowest degree first (Faddeev–LeVerrier with exact integer division).
    pub fn char_poly(&self) -> Vec<i64> {
        let n = self.n;
        let mut coeffs = vec![0i64; n + 1];
        coeffs[n] = 1;
        let mut m = IntMatrix { n, data: vec![0; n * n] };
        for k in 1..=n {
            let mut next = self.mul(&m);
            for i in 0..n {
                next.data[i * n + i] += coeffs[n - k + 1];
            }
            m = next;
            let tr = self.mul(&m).trace();
            let (q, r) = (-tr).div_rem(&(k as i64));
            debug_assert_eq!(r, 0);
            coeffs[n - k] = q;
        }
        coeffs
    }

    pub fn pow(&self, mut e: u64) -> IntMatrix {
        let mut acc = Self::identity(self.n);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn to_k(&self, field: Field) -> MatrixK {
        MatrixK::from_ints(field, self.n, self.n, &self.data)
    }

    pub fn canonical_key(&self) -> Vec<u8> {
        let mut out = (self.n as u32).to_be_bytes().to_vec();
        for x in &self.data {
            out.extend_from_slice(&x.to_be_bytes());
        }
        out
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntMatrix[")?;
        for i in 0..self.n {
            if i > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = (0..self.n).map(|k| self.get(i, k).to_string()).collect();
            write!(f, "{}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

/// A matrix over `K` that is rational and integral, as an [`IntMatrix`].
pub fn to_integer_matrix(m: &MatrixK) -> Option<IntMatrix> {
    if !m.is_square() {
        return None;
    }
    let data = m
        .entries()
        .iter()
        .map(|x| x.as_rational().and_then(|q| q.to_i64()))
        .collect::<Option<Vec<_>>>()?;
    Some(IntMatrix::new(m.rows(), data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::FieldDescriptor;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn base() -> Field {
        FieldDescriptor::base()
    }

    fn random_rational_matrix(rng: &mut ChaCha8Rng, n: usize) -> MatrixK {
        let vals: Vec<Rational> =
            (0..n * n).map(|_| Rational::new(rng.gen_range(-5..=5), rng.gen_range(1..=3))).collect();
        MatrixK::from_rationals(base(), n, n, &vals)
    }

    #[test]
    fn identity_inverse_det() {
        let i = MatrixK::identity(4, base());
        assert_eq!(i.inverse().unwrap(), i);
        assert!(i.det().unwrap().is_one());
        assert!(i.is_identity());
    }

    #[test]
    fn singular_inverse_is_domain_error() {
        let m = MatrixK::from_ints(base(), 2, 2, &[1, 2, 2, 4]);
        assert!(matches!(m.inverse(), Err(Error::Domain(_))));
        assert!(m.det().unwrap().is_zero());
    }

    #[test]
    fn char_poly_of_diag_one_j_j_j() {
        let f = base();
        let one = TowerElement::one(f);
        let j = TowerElement::j(f);
        let m = MatrixK::diagonal(&[one.clone(), j.clone(), j.clone(), j.clone()]);
        let cp = m.char_poly();
        // expand (x − 1)(x − j)³ by hand: with j³ = 1, (x − j)³ = x³ − 3jx² + 3j²x − 1
        let j2 = j.square();
        let three = Rational::from_int(3);
        let cubic = [
            TowerElement::from_int(f, -1),
            j2.scale(&three),
            j.scale(&three).neg(),
            TowerElement::one(f),
        ];
        let mut expected = vec![TowerElement::zero(f); 5];
        for (k, c) in cubic.iter().enumerate() {
            expected[k + 1] = expected[k + 1].add(c);
            expected[k] = expected[k].sub(c);
        }
        assert_eq!(cp.coeffs(), expected.as_slice());
        assert_eq!(cp, CharPoly::from_roots(f, &[one, j.clone(), j.clone(), j]));
    }

    #[test]
    fn cayley_hamilton_and_det_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..=5 {
            let m = random_rational_matrix(&mut rng, n);
            let cp = m.char_poly();
            assert!(cp.eval_matrix(&m).is_zero());
            let det = m.det().unwrap();
            let c0 = if n % 2 == 0 { cp.coeffs()[0].clone() } else { cp.coeffs()[0].neg() };
            assert_eq!(det, c0);
            if !det.is_zero() {
                assert!(m.mul(&m.inverse().unwrap()).is_identity());
            }
        }
    }

    #[test]
    fn kernel_and_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            // rank-deficient: 5x5 from product of 5x3 and 3x5
            let a = {
                let vals: Vec<Rational> =
                    (0..15).map(|_| Rational::from_int(rng.gen_range(-3..=3))).collect();
                MatrixK::from_rationals(base(), 5, 3, &vals)
            };
            let b = {
                let vals: Vec<Rational> =
                    (0..15).map(|_| Rational::from_int(rng.gen_range(-3..=3))).collect();
                MatrixK::from_rationals(base(), 3, 5, &vals)
            };
            let m = a.mul(&b);
            let rank = m.rank().unwrap();
            let ker = m.kernel_basis().unwrap();
            assert_eq!(rank + ker.len(), 5);
            assert!(rank <= 3);
            for v in &ker {
                assert!(m.mul_vec(v).iter().all(|x| x.is_zero()));
            }
        }
    }

    #[test]
    fn integer_matrix_agrees_with_k() {
        let m = IntMatrix::new(3, vec![2, -1, 0, -1, 2, -1, 0, -1, 2]);
        assert_eq!(m.det(), 4);
        let cp = m.char_poly();
        let ck = m.to_k(base()).char_poly();
        assert_eq!(CharPoly::from_ints(base(), &cp), ck);
        assert_eq!(cp, vec![-4, 10, -6, 1]);
        assert_eq!(to_integer_matrix(&m.to_k(base())), Some(m.clone()));
        assert_eq!(m.pow(2), m.mul(&m));
        assert!(m.commutes_with(&m.pow(3)));
    }
}
