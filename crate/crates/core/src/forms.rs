//! Symmetric bilinear forms: rational congruence diagonalization and the
//! transport of one form onto a scalar multiple of another.

use crate::error::{ensure, Error, Result};
use crate::field::{sqrt_rational, Field, FieldDescriptor, TowerElement};
use crate::matrix::MatrixK;
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymmetricForm {
    gram: MatrixK,
}

impl SymmetricForm {
    pub fn new(gram: MatrixK) -> Result<Self> {
        if !gram.is_square() || gram.transpose() != gram {
            return Err(Error::Domain("Gram matrix is not symmetric".into()));
        }
        Ok(SymmetricForm { gram })
    }

    pub fn gram(&self) -> &MatrixK {
        &self.gram
    }

    pub fn dim(&self) -> usize {
        self.gram.rows()
    }

    pub fn eval(&self, x: &[TowerElement], y: &[TowerElement]) -> TowerElement {
        let gy = self.gram.mul_vec(y);
        x.iter().zip(&gy).fold(TowerElement::zero(self.gram.field()), |acc, (a, b)| acc.add(&a.mul(b)))
    }

    /// Does `g` preserve the form (`gᵀ·S·g = S`)?
    pub fn is_preserved_by(&self, g: &MatrixK) -> bool {
        g.transpose().mul(&self.gram).mul(g) == self.gram
    }
}

/// Congruence diagonalization `QᵀSQ = D` without square roots.
///
/// At step `k` the pivot is the first nonzero diagonal entry of the
/// remaining block (swapped into place). When that diagonal is entirely zero
/// the lowest nonzero off-diagonal entry `(r, i)` is used: `r` is swapped to
/// `k` and `e_k ← e_k + e_i`, which makes the pivot `2·S_ki`.
pub fn congruence_diagonalize(s: &SymmetricForm) -> Result<(MatrixK, Vec<TowerElement>)> {
    let n = s.dim();
    let field = s.gram.field();
    let mut m = s.gram.clone();
    let mut q = MatrixK::identity(n, field);

    let swap = |m: &mut MatrixK, q: &mut MatrixK, a: usize, b: usize| {
        if a == b {
            return;
        }
        for t in 0..n {
            let (x, y) = (m.get(a, t).clone(), m.get(b, t).clone());
            m.set(a, t, y);
            m.set(b, t, x);
        }
        for t in 0..n {
            let (x, y) = (m.get(t, a).clone(), m.get(t, b).clone());
            m.set(t, a, y);
            m.set(t, b, x);
            let (x, y) = (q.get(t, a).clone(), q.get(t, b).clone());
            q.set(t, a, y);
            q.set(t, b, x);
        }
    };
    // e_dst ← e_dst + f·e_src
    let add = |m: &mut MatrixK, q: &mut MatrixK, dst: usize, src: usize, f: &TowerElement| {
        for t in 0..n {
            let v = m.get(dst, t).add(&f.mul(m.get(src, t)));
            m.set(dst, t, v);
        }
        for t in 0..n {
            let v = m.get(t, dst).add(&f.mul(m.get(t, src)));
            m.set(t, dst, v);
            let v = q.get(t, dst).add(&f.mul(q.get(t, src)));
            q.set(t, dst, v);
        }
    };

    for k in 0..n {
        if m.get(k, k).is_zero() {
            if let Some(i) = (k + 1..n).find(|&i| !m.get(i, i).is_zero()) {
                swap(&mut m, &mut q, k, i);
            } else {
                let found = (k..n).find_map(|r| (k..n).find(|&c| c != r && !m.get(r, c).is_zero()).map(|c| (r, c)));
                let Some((r, c)) = found else {
                    return Err(Error::Domain("degenerate symmetric form".into()));
                };
                swap(&mut m, &mut q, k, r);
                let c = if c == k { r } else { c };
                add(&mut m, &mut q, k, c, &TowerElement::one(field));
            }
        }
        let inv = m.get(k, k).inv()?;
        for i in k + 1..n {
            if m.get(i, k).is_zero() {
                continue;
            }
            let f = m.get(i, k).mul(&inv).neg();
            add(&mut m, &mut q, i, k, &f);
        }
    }
    let d: Vec<TowerElement> = (0..n).map(|i| m.get(i, i).clone()).collect();
    ensure!(
        q.transpose().mul(&s.gram).mul(&q) == MatrixK::diagonal(&d),
        "congruence diagonalization failed its post-check"
    );
    Ok((q, d))
}

/// Scalars tried for `PᵀJP = c·A`, in order of preference.
pub const TRANSPORT_SCALARS: [(i64, i64); 6] = [(1, 1), (2, 1), (3, 1), (6, 1), (1, 2), (1, 3)];

/// Result of [`solve_form_transport`].
#[derive(Clone, Debug)]
pub struct FormTransport {
    pub p: MatrixK,
    pub c: Rational,
    pub field: Field,
}

/// Squarefree kernel of a nonzero rational, ignoring sign and the prime 3
/// (both are squares up to units of the base field).
fn radical_primes(q: &Rational) -> Vec<u64> {
    let n = q.numer();
    let d = q.denom();
    let mut x: u64 = (num_traits::Signed::abs(&n) * d).try_into().expect("small radicand");
    let mut primes = Vec::new();
    let mut p = 2;
    while p * p <= x {
        let mut e = 0;
        while x % p == 0 {
            x /= p;
            e += 1;
        }
        if e % 2 == 1 && p != 3 {
            primes.push(p);
        }
        p += 1;
    }
    if x > 1 && x != 3 {
        primes.push(x);
    }
    primes
}

/// Find `P` with `PᵀJP = c·A`.
///
/// Both forms are congruence-diagonalized over `Q`, `QAᵀ·A·QA = DA` and
/// `QJᵀ·J·QJ = DJ`; then `P = QJ·S·QA⁻¹` with `S` diagonal and
/// `s_i² = c·DA_i/DJ_i`. The scalar `c` is the first of
/// [`TRANSPORT_SCALARS`] minimizing the number of adjoined primes.
pub fn solve_form_transport(a: &SymmetricForm, j: &SymmetricForm) -> Result<FormTransport> {
    if a.dim() != j.dim() {
        return Err(Error::Domain("forms of different dimension".into()));
    }
    let (qa, da) = congruence_diagonalize(a)?;
    let (qj, dj) = congruence_diagonalize(j)?;
    let to_q = |x: &TowerElement| {
        x.as_rational()
            .ok_or_else(|| Error::Domain("form transport needs rational Gram matrices".into()))
    };
    let da = da.iter().map(to_q).collect::<Result<Vec<_>>>()?;
    let dj = dj.iter().map(to_q).collect::<Result<Vec<_>>>()?;
    let ratios: Vec<Rational> = da.iter().zip(&dj).map(|(x, y)| x / y).collect();

    let mut best: Option<(usize, Rational)> = None;
    for &(num, den) in &TRANSPORT_SCALARS {
        let c = Rational::new(num, den);
        let mut primes: Vec<u64> = ratios.iter().flat_map(|r| radical_primes(&(&c * r))).collect();
        primes.sort_unstable();
        primes.dedup();
        if best.as_ref().is_none_or(|(n, _)| primes.len() < *n) {
            best = Some((primes.len(), c));
        }
    }
    let (_, c) = best.expect("scalar list is nonempty");

    let mut field = FieldDescriptor::join(a.gram.field(), j.gram.field());
    let mut roots = Vec::new();
    for r in &ratios {
        let (f, s) = sqrt_rational(field, &(&c * r))?;
        field = f;
        roots.push(s);
    }
    let s = MatrixK::diagonal(&roots.iter().map(|x| x.promote(field)).collect::<Vec<_>>());
    let p = qj.promote(field).mul(&s).mul(&qa.promote(field).inverse()?);
    let lhs = p.transpose().mul(&j.gram.promote(field)).mul(&p);
    let rhs = a.gram.promote(field).scale(&TowerElement::from_rational(field, c.clone()));
    ensure!(lhs == rhs, "form transport failed its post-check PᵀJP = cA");
    Ok(FormTransport { p, c, field })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::wedge_gram;

    fn base() -> Field {
        FieldDescriptor::base()
    }

    #[test]
    fn identity_diagonalizes_trivially() {
        let s = SymmetricForm::new(MatrixK::identity(4, base())).unwrap();
        let (q, d) = congruence_diagonalize(&s).unwrap();
        assert!(q.is_identity());
        assert!(d.iter().all(|x| x.is_one()));
    }

    #[test]
    fn wedge_gram_diagonalizes_with_hyperbolic_fixups() {
        let j = SymmetricForm::new(wedge_gram(base())).unwrap();
        let (q, d) = congruence_diagonalize(&j).unwrap();
        assert_eq!(q.transpose().mul(j.gram()).mul(&q), MatrixK::diagonal(&d));
        let prod = d.iter().fold(TowerElement::one(base()), |acc, x| acc.mul(x));
        // det(Q)²·det(J) = Πd
        let detq = q.det().unwrap();
        assert_eq!(prod, detq.square().mul(&j.gram().det().unwrap()));
        assert!(d.iter().all(|x| !x.is_zero()));
    }

    #[test]
    fn degenerate_form_is_rejected() {
        let s = SymmetricForm::new(MatrixK::from_ints(base(), 2, 2, &[1, 1, 1, 1])).unwrap();
        assert!(matches!(congruence_diagonalize(&s), Err(Error::Domain(_))));
        assert!(SymmetricForm::new(MatrixK::from_ints(base(), 2, 2, &[1, 2, 3, 4])).is_err());
    }

    #[test]
    fn transport_of_small_forms() {
        // diag(1, 1) onto the hyperbolic plane
        let a = SymmetricForm::new(MatrixK::identity(2, base())).unwrap();
        let h = SymmetricForm::new(MatrixK::from_ints(base(), 2, 2, &[0, 1, 1, 0])).unwrap();
        let t = solve_form_transport(&a, &h).unwrap();
        let lhs = t.p.transpose().mul(&h.gram().promote(t.field)).mul(&t.p);
        let c = TowerElement::from_rational(t.field, t.c.clone());
        assert_eq!(lhs, a.gram().promote(t.field).scale(&c));
    }
}
