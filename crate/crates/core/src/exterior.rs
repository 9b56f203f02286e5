//! The exterior square of a 4-dimensional space.
//!
//! Bivectors use the ordered basis `e1∧e2, e1∧e3, e1∧e4, e2∧e3, e2∧e4,
//! e3∧e4` throughout, and the volume form is `ε = e1∧e2∧e3∧e4`.

use crate::error::{Error, Result};
use crate::field::{Field, TowerElement};
use crate::matrix::MatrixK;

/// Index pairs of the bivector basis, 0-based.
pub const BIVECTOR_BASIS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Coefficient of `ε` in `e_I ∧ e_J` for bivector basis indices `I`, `J`.
fn wedge_sign(i: usize, j: usize) -> i64 {
    match (i.min(j), i.max(j)) {
        (0, 5) | (2, 3) => 1,
        (1, 4) => -1,
        _ => 0,
    }
}

/// An element of `∧²V` in the fixed basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Bivector(pub [TowerElement; 6]);

impl Bivector {
    pub fn from_slice(v: &[TowerElement]) -> Self {
        assert_eq!(v.len(), 6, "bivector needs 6 coordinates");
        Bivector(std::array::from_fn(|k| v[k].clone()))
    }

    /// `u ∧ v` for `u, v ∈ V`.
    pub fn wedge(u: &[TowerElement], v: &[TowerElement]) -> Self {
        assert!(u.len() == 4 && v.len() == 4);
        Bivector(std::array::from_fn(|k| {
            let (a, b) = BIVECTOR_BASIS[k];
            u[a].mul(&v[b]).sub(&u[b].mul(&v[a]))
        }))
    }

    /// Basis bivector `e_a ∧ e_b` (0-based, `a < b`).
    pub fn basis(field: Field, a: usize, b: usize) -> Self {
        let k = BIVECTOR_BASIS.iter().position(|&p| p == (a, b)).expect("a < b < 4");
        Bivector(std::array::from_fn(|i| {
            if i == k {
                TowerElement::one(field)
            } else {
                TowerElement::zero(field)
            }
        }))
    }

    pub fn coords(&self) -> &[TowerElement] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|x| x.is_zero())
    }

    pub fn add(&self, rhs: &Bivector) -> Bivector {
        Bivector(std::array::from_fn(|k| self.0[k].add(&rhs.0[k])))
    }

    /// The antisymmetric 4×4 matrix `B` with `B_ab = b_ab`.
    pub fn antisymmetric_matrix(&self) -> MatrixK {
        let field = self.0[0].field();
        let mut m = MatrixK::zeros(4, 4, field);
        for (k, &(a, b)) in BIVECTOR_BASIS.iter().enumerate() {
            m.set(a, b, self.0[k].clone());
            m.set(b, a, self.0[k].neg());
        }
        m
    }

    /// `Pf(B) = b12·b34 − b13·b24 + b14·b23`; `b∧b = 2·Pf(B)·ε`.
    pub fn pfaffian(&self) -> TowerElement {
        let b = &self.0;
        b[0].mul(&b[5]).sub(&b[1].mul(&b[4])).add(&b[2].mul(&b[3]))
    }

    /// For a nonzero decomposable `b = u∧v`, a basis of `span(u, v)` (the
    /// column space of `B`, in reduced echelon form).
    pub fn support(&self) -> Result<Vec<Vec<TowerElement>>> {
        if self.is_zero() {
            return Err(Error::Domain("support of the zero bivector".into()));
        }
        if !self.pfaffian().is_zero() {
            return Err(Error::Domain("support of an indecomposable bivector".into()));
        }
        let basis = span_basis(&self.antisymmetric_matrix().transpose().rows_vec())?;
        if basis.len() != 2 {
            return Err(Error::Construction(format!(
                "decomposable bivector has a support of dimension {}",
                basis.len()
            )));
        }
        Ok(basis)
    }
}

impl MatrixK {
    fn rows_vec(&self) -> Vec<Vec<TowerElement>> {
        (0..self.rows()).map(|i| (0..self.cols()).map(|k| self.get(i, k).clone()).collect()).collect()
    }
}

/// `(Pf(b), support)`; the support is `None` when `Pf(b) ≠ 0`.
pub fn pfaffian_and_support(b: &Bivector) -> Result<(TowerElement, Option<Vec<Vec<TowerElement>>>)> {
    if b.is_zero() {
        return Err(Error::Domain("pfaffian_and_support of the zero bivector".into()));
    }
    let pf = b.pfaffian();
    if pf.is_zero() {
        Ok((pf, Some(b.support()?)))
    } else {
        Ok((pf, None))
    }
}

/// Matrix of `∧²g` in the bivector basis: entry `(I, J)` is the 2×2 minor of
/// `g` on rows `I` and columns `J`.
pub fn exterior_square(g: &MatrixK) -> MatrixK {
    assert!(g.rows() == 4 && g.cols() == 4, "exterior_square needs a 4×4 matrix");
    MatrixK::from_fn(6, 6, g.field(), |r, c| {
        let (a, b) = BIVECTOR_BASIS[r];
        let (x, y) = BIVECTOR_BASIS[c];
        let neg = g.get(a, y).neg();
        TowerElement::dot(g.field(), &[(g.get(a, x), g.get(b, y)), (&neg, g.get(b, x))])
    })
}

/// `β∧(x, y)`: the coefficient of `ε` in `x ∧ y`.
pub fn wedge_form(x: &Bivector, y: &Bivector) -> TowerElement {
    let field = x.0[0].field();
    let mut acc = TowerElement::zero(field);
    for i in 0..6 {
        let j = 5 - i;
        match wedge_sign(i, j) {
            1 => acc = acc.add(&x.0[i].mul(&y.0[j])),
            -1 => acc = acc.sub(&x.0[i].mul(&y.0[j])),
            _ => {}
        }
    }
    acc
}

/// Gram matrix of `β∧`: antidiagonal `(1, −1, 1, 1, −1, 1)`.
pub fn wedge_gram(field: Field) -> MatrixK {
    MatrixK::from_fn(6, 6, field, |i, j| TowerElement::from_int(field, wedge_sign(i, j)))
}

/// Reduced echelon basis of the span of the given vectors.
pub fn span_basis(vectors: &[Vec<TowerElement>]) -> Result<Vec<Vec<TowerElement>>> {
    if vectors.is_empty() {
        return Ok(Vec::new());
    }
    let field = vectors[0][0].field();
    let n = vectors[0].len();
    let m = MatrixK::from_fn(vectors.len(), n, field, |i, k| vectors[i][k].clone());
    let (r, pivots) = m.rref()?;
    Ok((0..pivots.len()).map(|i| (0..n).map(|k| r.get(i, k).clone()).collect()).collect())
}

/// Basis of the intersection of two subspaces given by spanning sets.
pub fn intersect_subspaces(
    a: &[Vec<TowerElement>],
    b: &[Vec<TowerElement>],
) -> Result<Vec<Vec<TowerElement>>> {
    if a.is_empty() || b.is_empty() {
        return Ok(Vec::new());
    }
    let field = a[0][0].field();
    let n = a[0].len();
    // x·a_i − y·b_k = 0, read off the a-part of each kernel vector
    let m = MatrixK::from_fn(n, a.len() + b.len(), field, |i, k| {
        if k < a.len() {
            a[k][i].clone()
        } else {
            b[k - a.len()][i].neg()
        }
    });
    let vecs: Vec<Vec<TowerElement>> = m
        .kernel_basis()?
        .iter()
        .map(|coef| {
            (0..n)
                .map(|i| {
                    (0..a.len()).fold(TowerElement::zero(field), |acc, k| acc.add(&coef[k].mul(&a[k][i])))
                })
                .collect()
        })
        .collect();
    span_basis(&vecs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::Rational;
    use crate::FieldDescriptor;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn base() -> Field {
        FieldDescriptor::base()
    }

    fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<TowerElement> {
        (0..n)
            .map(|_| TowerElement::from_rational(base(), Rational::new(rng.gen_range(-6..=6), rng.gen_range(1..=3))))
            .collect()
    }

    /// ε-coefficient of `e_I ∧ e_J` by sorting the four indices.
    fn brute_wedge_sign(i: usize, j: usize) -> i64 {
        let (a, b) = BIVECTOR_BASIS[i];
        let (c, d) = BIVECTOR_BASIS[j];
        let mut idx = [a, b, c, d];
        let mut sorted = idx;
        sorted.sort();
        if sorted != [0, 1, 2, 3] {
            return 0;
        }
        let mut sign = 1;
        for x in 0..4 {
            for y in 0..3 - x {
                if idx[y] > idx[y + 1] {
                    idx.swap(y, y + 1);
                    sign = -sign;
                }
            }
        }
        sign
    }

    #[test]
    fn wedge_gram_matches_brute_force() {
        let f = base();
        let j = wedge_gram(f);
        for a in 0..6 {
            for b in 0..6 {
                assert_eq!(j.get(a, b), &TowerElement::from_int(f, brute_wedge_sign(a, b)));
            }
        }
        let anti = [1, -1, 1, 1, -1, 1];
        for (i, &s) in anti.iter().enumerate() {
            assert_eq!(j.get(i, 5 - i), &TowerElement::from_int(f, s));
        }
        assert_eq!(j.det().unwrap(), TowerElement::from_int(f, -1));
    }

    #[test]
    fn lambda_of_identity_and_diagonal() {
        let f = base();
        assert!(exterior_square(&MatrixK::identity(4, f)).is_identity());
        let d: Vec<TowerElement> = [2, 3, 5, 7].iter().map(|&x| TowerElement::from_int(f, x)).collect();
        let l = exterior_square(&MatrixK::diagonal(&d));
        let expected = [6, 10, 14, 15, 21, 35];
        let expected: Vec<TowerElement> = expected.iter().map(|&x| TowerElement::from_int(f, x)).collect();
        assert_eq!(l, MatrixK::diagonal(&expected));
    }

    #[test]
    fn decomposable_bivectors() {
        let f = base();
        let e12 = Bivector::basis(f, 0, 1);
        let (pf, support) = pfaffian_and_support(&e12).unwrap();
        assert!(pf.is_zero());
        let s = support.unwrap();
        let e = |i: usize| (0..4).map(|k| TowerElement::from_int(f, (k == i) as i64)).collect::<Vec<_>>();
        assert_eq!(s, vec![e(0), e(1)]);

        let sym = e12.add(&Bivector::basis(f, 2, 3));
        assert!(sym.pfaffian().is_one());
        assert_eq!(wedge_form(&sym, &sym), TowerElement::from_int(f, 2));
        assert!(sym.support().is_err());
        assert!(pfaffian_and_support(&Bivector::from_slice(&vec![TowerElement::zero(f); 6])).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let u = random_vec(&mut rng, 4);
            let v = random_vec(&mut rng, 4);
            let b = Bivector::wedge(&u, &v);
            assert!(b.pfaffian().is_zero());
            assert!(wedge_form(&b, &b).is_zero());
            if !b.is_zero() {
                let s = b.support().unwrap();
                // u and v lie in the support
                assert_eq!(span_basis(&[s.clone(), vec![u.clone(), v.clone()]].concat()).unwrap().len(), 2);
            }
        }
    }

    #[test]
    fn pfaffian_squared_is_det() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let b = Bivector::from_slice(&random_vec(&mut rng, 6));
            let pf = b.pfaffian();
            assert_eq!(pf.square(), b.antisymmetric_matrix().det().unwrap());
            assert_eq!(wedge_form(&b, &b), pf.scale(&Rational::from_int(2)));
        }
    }

    #[test]
    fn subspace_intersection() {
        let f = base();
        let e = |i: usize| (0..4).map(|k| TowerElement::from_int(f, (k == i) as i64)).collect::<Vec<_>>();
        let a = vec![e(0), e(1)];
        let b = vec![e(1), e(2)];
        assert_eq!(intersect_subspaces(&a, &b).unwrap(), vec![e(1)]);
        assert!(intersect_subspaces(&a, &[e(3)]).unwrap().is_empty());
    }
}
