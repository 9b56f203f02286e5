//! The E6 root-system model, reflections, Molien series and degrees,
//! character norms, regular eigenvectors and the order-8 profile.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{Field, FieldDescriptor, TowerElement};
use crate::forms::SymmetricForm;
use crate::groups::{element_order, FiniteMatrixGroup};
use crate::matrix::{IntMatrix, MatrixK};
use crate::rational::Rational;

/// Cartan matrix of type E6, Bourbaki numbering (node 2 hangs off node 4).
pub const E6_CARTAN: [[i64; 6]; 6] = [
    [2, 0, -1, 0, 0, 0],
    [0, 2, 0, -1, 0, 0],
    [-1, 0, 2, -1, 0, 0],
    [0, -1, -1, 2, -1, 0],
    [0, 0, 0, -1, 2, -1],
    [0, 0, 0, 0, -1, 2],
];

pub const E6_ORDER: usize = 51_840;

#[derive(Clone, Debug)]
pub struct RootSystemModel {
    pub cartan: IntMatrix,
    pub simple_reflections: Vec<IntMatrix>,
    pub invariant_gram: SymmetricForm,
}

impl RootSystemModel {
    /// Simple reflections in the simple-root basis, acting on columns:
    /// `s_i(α_k) = α_k − A_ik·α_i`.
    pub fn build_e6() -> Self {
        let cartan = IntMatrix::new(6, E6_CARTAN.iter().flatten().copied().collect());
        let simple_reflections = (0..6)
            .map(|i| {
                let mut d = IntMatrix::identity(6).entries().to_vec();
                for k in 0..6 {
                    d[i * 6 + k] -= E6_CARTAN[i][k];
                }
                IntMatrix::new(6, d)
            })
            .collect();
        let invariant_gram = SymmetricForm::new(cartan.to_k(FieldDescriptor::base())).expect("Cartan matrix of E6 is symmetric");
        RootSystemModel { cartan, simple_reflections, invariant_gram }
    }

    pub fn closure(&self) -> Result<FiniteMatrixGroup<IntMatrix>> {
        FiniteMatrixGroup::closure(IntMatrix::identity(6), &self.simple_reflections, E6_ORDER)
    }

    /// `sᵀ A s = A`.
    pub fn preserves_gram(&self, s: &IntMatrix) -> bool {
        s.transpose().mul(&self.cartan).mul(s) == self.cartan
    }
}

/// `rank(m) ≤ 1`: every 2×2 minor vanishes.
fn rank_at_most_one(m: &MatrixK) -> bool {
    let (r, c) = (m.rows(), m.cols());
    for i in 0..r {
        for k in i + 1..r {
            for a in 0..c {
                for b in a + 1..c {
                    let lhs = m.get(i, a).mul(m.get(k, b));
                    let rhs = m.get(i, b).mul(m.get(k, a));
                    if lhs != rhs {
                        return false;
                    }
                }
            }
        }
    }
    true
}

pub fn is_reflection(g: &MatrixK) -> bool {
    let d = g.sub(&MatrixK::identity(g.rows(), g.field()));
    !d.is_zero() && rank_at_most_one(&d)
}

pub fn is_reflection_int(g: &IntMatrix) -> bool {
    let n = g.dim();
    let d: Vec<i64> = (0..n * n).map(|t| g.entries()[t] - i64::from(t / n == t % n)).collect();
    if d.iter().all(|&x| x == 0) {
        return false;
    }
    for i in 0..n {
        for k in i + 1..n {
            for a in 0..n {
                for b in a + 1..n {
                    if d[i * n + a] * d[k * n + b] != d[i * n + b] * d[k * n + a] {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Positions of the reflections of `g`, in discovery order.
pub fn reflections_of(g: &FiniteMatrixGroup<MatrixK>) -> Vec<usize> {
    (0..g.order()).into_par_iter().filter(|&i| is_reflection(g.get(i))).collect()
}

pub fn reflections_of_int(g: &FiniteMatrixGroup<IntMatrix>) -> Vec<usize> {
    (0..g.order()).into_par_iter().filter(|&i| is_reflection_int(g.get(i))).collect()
}

/// Truncated Molien series `c_0 … c_N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MolienSeries {
    pub coefficients: Vec<Rational>,
}

impl MolienSeries {
    pub fn truncation(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// Series of `Π 1/(1 − t^d)` truncated at `n`.
    pub fn from_degrees(degrees: &[usize], n: usize) -> Self {
        let mut c = vec![Rational::ZERO; n + 1];
        c[0] = Rational::ONE;
        for &d in degrees {
            for m in d..=n {
                let add = c[m - d].clone();
                c[m] += &add;
            }
        }
        MolienSeries { coefficients: c }
    }
}

/// `1/det(I − t·g)` up to `t^n`, from the characteristic polynomial of `g`
/// (lowest degree first): `det(I − t·g)` is its reversal.
fn inverse_det_series(char_poly: &[TowerElement], n: usize) -> Vec<TowerElement> {
    let field = char_poly[0].field();
    let dim = char_poly.len() - 1;
    // q_k = coefficient of t^k in det(I − t·g) = char_poly[dim − k]
    let q: Vec<&TowerElement> = (0..=dim).map(|k| &char_poly[dim - k]).collect();
    let mut c: Vec<TowerElement> = Vec::with_capacity(n + 1);
    c.push(TowerElement::one(field));
    for m in 1..=n {
        let mut acc = TowerElement::zero(field);
        for k in 1..=dim.min(m) {
            if !q[k].is_zero() {
                acc = acc.sub(&q[k].mul(&c[m - k]));
            }
        }
        c.push(acc);
    }
    c
}

/// Molien series from characteristic polynomials with multiplicities.
/// Coefficients must come out as non-negative integers.
pub fn molien_from_char_polys<'a>(
    polys: impl IntoIterator<Item = (&'a [TowerElement], usize)>,
    group_order: usize,
    n: usize,
) -> Result<MolienSeries> {
    let polys: Vec<(&[TowerElement], usize)> = polys.into_iter().collect();
    if polys.is_empty() || n == 0 {
        return Err(Error::Domain("Molien series needs a group and N ≥ 1".into()));
    }
    let field = polys[0].0[0].field();
    let partials: Vec<Vec<TowerElement>> = polys
        .par_iter()
        .map(|(p, mult)| {
            let m = TowerElement::from_int(field, *mult as i64);
            inverse_det_series(p, n).iter().map(|x| x.mul(&m)).collect()
        })
        .collect();
    let mut total = vec![TowerElement::zero(field); n + 1];
    for p in &partials {
        for (t, x) in total.iter_mut().zip(p) {
            *t = t.add(x);
        }
    }
    let order = Rational::from_int(group_order as i64);
    let mut coefficients = Vec::with_capacity(n + 1);
    for (m, t) in total.iter().enumerate() {
        let q = t
            .as_rational()
            .ok_or_else(|| Error::Construction(format!("Molien coefficient {m} is not rational")))?;
        let c = &q / &order;
        if !c.is_integer() || c.is_negative() {
            return Err(Error::Construction(format!("Molien coefficient {m} = {c} is not a non-negative integer")));
        }
        coefficients.push(c);
    }
    Ok(MolienSeries { coefficients })
}

/// Characteristic polynomials of all elements with multiplicities, in order
/// of first occurrence.
pub fn char_poly_census(g: &FiniteMatrixGroup<MatrixK>) -> Vec<(Vec<TowerElement>, usize)> {
    let polys: Vec<Vec<TowerElement>> = (0..g.order()).into_par_iter().map(|i| g.get(i).char_poly().coeffs().to_vec()).collect();
    census(polys)
}

pub fn char_poly_census_int(g: &FiniteMatrixGroup<IntMatrix>) -> Vec<(Vec<i64>, usize)> {
    let polys: Vec<Vec<i64>> = (0..g.order()).into_par_iter().map(|i| g.get(i).char_poly()).collect();
    census(polys)
}

fn census<T: Eq + std::hash::Hash + Clone>(items: Vec<T>) -> Vec<(T, usize)> {
    let mut pos: HashMap<T, usize> = HashMap::new();
    let mut out: Vec<(T, usize)> = Vec::new();
    for p in items {
        match pos.get(&p) {
            Some(&i) => out[i].1 += 1,
            None => {
                pos.insert(p.clone(), out.len());
                out.push((p, 1));
            }
        }
    }
    out
}

pub fn molien_series(g: &FiniteMatrixGroup<MatrixK>, n: usize) -> Result<MolienSeries> {
    let census = char_poly_census(g);
    molien_from_char_polys(census.iter().map(|(p, m)| (p.as_slice(), *m)), g.order(), n)
}

pub fn molien_series_int(g: &FiniteMatrixGroup<IntMatrix>, n: usize) -> Result<MolienSeries> {
    let f = FieldDescriptor::base();
    let census: Vec<(Vec<TowerElement>, usize)> = char_poly_census_int(g)
        .into_iter()
        .map(|(p, m)| (p.iter().map(|&c| TowerElement::from_int(f, c)).collect(), m))
        .collect();
    molien_from_char_polys(census.iter().map(|(p, m)| (p.as_slice(), *m)), g.order(), n)
}

/// Degrees of a reflection group, sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeList {
    pub degrees: Vec<usize>,
}

impl DegreeList {
    pub fn product(&self) -> usize {
        self.degrees.iter().product()
    }

    pub fn sum(&self) -> usize {
        self.degrees.iter().sum()
    }

    pub fn reflection_count(&self) -> usize {
        self.degrees.iter().map(|d| d - 1).sum()
    }
}

/// Peel off `1/(1 − t^d)` factors greedily, `d` the lowest positive exponent
/// with a nonzero coefficient, then check the residue and both identities.
pub fn extract_degrees(s: &MolienSeries, k: usize, group_order: usize, reflection_count: usize) -> Result<DegreeList> {
    let n = s.truncation();
    let mut c = s.coefficients.clone();
    if !c[0].is_one() {
        return Err(Error::Construction("not a reflection-group series: c_0 ≠ 1".into()));
    }
    let mut degrees = Vec::with_capacity(k);
    for _ in 0..k {
        let d = (1..=n)
            .find(|&m| !c[m].is_zero())
            .ok_or_else(|| Error::Construction("not a reflection-group series: ran out of terms".into()))?;
        for m in (d..=n).rev() {
            let sub = c[m - d].clone();
            c[m] -= &sub;
        }
        degrees.push(d);
    }
    if c.iter().skip(1).any(|x| !x.is_zero()) {
        return Err(Error::Construction("not a reflection-group series: residue is not 1".into()));
    }
    degrees.sort_unstable();
    let list = DegreeList { degrees };
    if list.product() != group_order || list.reflection_count() != reflection_count {
        return Err(Error::Construction(format!(
            "not a reflection-group series: degrees {:?} give order {} and {} reflections",
            list.degrees,
            list.product(),
            list.reflection_count()
        )));
    }
    Ok(list)
}

/// `(1/|G|)·Σ χ(g)·conj(χ(g))`.
pub fn character_norm(g: &FiniteMatrixGroup<MatrixK>) -> Result<Rational> {
    let traces: Vec<TowerElement> = (0..g.order()).into_par_iter().map(|i| g.get(i).trace()).collect();
    let field = traces.first().map(|t| t.field()).unwrap_or(FieldDescriptor::base());
    let sum = census(traces).into_iter().fold(TowerElement::zero(field), |acc, (t, m)| {
        acc.add(&t.mul(&t.conjugate()).scale(&Rational::from_int(m as i64)))
    });
    let q = sum.as_rational().ok_or_else(|| Error::Construction("character norm is not rational".into()))?;
    Ok(&q / &Rational::from_int(g.order() as i64))
}

pub fn character_norm_int(g: &FiniteMatrixGroup<IntMatrix>) -> Rational {
    let sum: i64 = (0..g.order()).into_par_iter().map(|i| g.get(i).trace().pow(2)).sum();
    Rational::new(sum, g.order() as i64)
}

/// Outcome of [`regular_vector_check`].
#[derive(Clone, Debug)]
pub struct RegularVector {
    pub vector: Vec<TowerElement>,
    pub eigenspace_dim: usize,
    pub stabilizer_order: usize,
}

fn stabilizer_order(g: &FiniteMatrixGroup<IntMatrix>, v: &[TowerElement]) -> usize {
    (0..g.order()).into_par_iter().filter(|&i| g.get(i).mul_vec(v) == v).count()
}

/// Search for an eigenvector of `w` with small stabilizer in `g`:
/// first `Σ 2^(i−1)·b_i`, then `b_1 + m·b_2 + m²·b_3 + …` for `m = 1, 2, …`.
/// Stops at a trivial stabilizer or after `max_candidates` tries.
pub fn regular_vector_check(
    g: &FiniteMatrixGroup<IntMatrix>,
    w: &IntMatrix,
    eigenvalue: &TowerElement,
    max_candidates: usize,
) -> Result<RegularVector> {
    let field: Field = eigenvalue.field();
    let n = w.dim();
    let shifted = w.to_k(field).sub(&MatrixK::scalar(n, eigenvalue));
    let basis = shifted.kernel_basis()?;
    if basis.is_empty() {
        return Err(Error::Domain("eigenspace is zero".into()));
    }
    let combine = |coefs: &[i64]| -> Vec<TowerElement> {
        (0..n)
            .map(|i| {
                basis.iter().zip(coefs).fold(TowerElement::zero(field), |acc, (b, &c)| {
                    acc.add(&b[i].scale(&Rational::from_int(c)))
                })
            })
            .collect()
    };
    let mut candidates = vec![combine(&(0..basis.len()).map(|i| 1i64 << i).collect::<Vec<_>>())];
    for m in 1..max_candidates as i64 {
        let coefs: Vec<i64> = (0..basis.len() as u32).map(|i| m.pow(i)).collect();
        candidates.push(combine(&coefs));
    }
    let mut best: Option<(usize, Vec<TowerElement>)> = None;
    for v in candidates.into_iter().take(max_candidates.max(1)) {
        let s = stabilizer_order(g, &v);
        if best.as_ref().is_none_or(|(b, _)| s < *b) {
            best = Some((s, v));
        }
        if s == 1 {
            break;
        }
    }
    let (stabilizer_order, vector) = best.expect("at least one candidate");
    Ok(RegularVector { vector, eigenspace_dim: basis.len(), stabilizer_order })
}

/// Integer characteristic polynomial `(x² − 1)(x⁴ + 1)`, lowest degree first.
pub const ORDER8_CHAR_POLY: [i64; 7] = [-1, 0, 1, 0, -1, 0, 1];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Order8Profile {
    pub count: usize,
    pub char_poly_matches: usize,
    pub det_minus_one: usize,
    pub count_in_derived: usize,
}

impl Order8Profile {
    pub fn holds(&self) -> bool {
        self.count > 0 && self.char_poly_matches == self.count && self.det_minus_one == self.count && self.count_in_derived == 0
    }
}

pub fn order8_profile(g: &FiniteMatrixGroup<IntMatrix>, derived: &FiniteMatrixGroup<IntMatrix>) -> Result<Order8Profile> {
    let order8 = |grp: &FiniteMatrixGroup<IntMatrix>| -> Result<Vec<usize>> {
        let flags: Vec<bool> = (0..grp.order())
            .into_par_iter()
            .map(|i| element_order(grp.get(i), 1000).map(|o| o == 8))
            .collect::<Result<_>>()?;
        Ok(flags.iter().enumerate().filter(|(_, &f)| f).map(|(i, _)| i).collect())
    };
    let idx = order8(g)?;
    let char_poly_matches = idx.iter().filter(|&&i| g.get(i).char_poly() == ORDER8_CHAR_POLY).count();
    let det_minus_one = idx.iter().filter(|&&i| g.get(i).det() == -1).count();
    Ok(Order8Profile { count: idx.len(), char_poly_matches, det_minus_one, count_in_derived: order8(derived)?.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_reflections_are_reflections_preserving_the_gram() {
        let e6 = RootSystemModel::build_e6();
        for s in &e6.simple_reflections {
            assert!(s.mul(s).is_identity());
            assert_eq!(s.det(), -1);
            assert!(is_reflection_int(s));
            assert!(e6.preserves_gram(s));
        }
        assert!(!is_reflection_int(&IntMatrix::identity(6)));
    }

    #[test]
    fn trivial_group_molien_and_degrees() {
        let f = FieldDescriptor::base();
        let g = FiniteMatrixGroup::closure(MatrixK::identity(4, f), &[], 1).unwrap();
        let s = molien_series(&g, 10).unwrap();
        let ints: Vec<String> = s.coefficients.iter().take(5).map(|c| c.to_string()).collect();
        assert_eq!(ints, ["1", "4", "10", "20", "35"]);
        assert_eq!(extract_degrees(&s, 4, 1, 0).unwrap().degrees, vec![1, 1, 1, 1]);
        assert_eq!(character_norm(&g).unwrap(), Rational::from_int(16));
        assert!(!is_reflection(&MatrixK::identity(4, f)));
    }

    #[test]
    fn cyclic_reflection_group_of_order_three() {
        // diag(j, 1): degrees (1, 3)
        let f = FieldDescriptor::base();
        let s = MatrixK::diagonal(&[TowerElement::j(f), TowerElement::one(f)]);
        assert!(is_reflection(&s));
        let g = FiniteMatrixGroup::closure(MatrixK::identity(2, f), &[s], 10).unwrap();
        let m = molien_series(&g, 20).unwrap();
        assert_eq!(m, MolienSeries::from_degrees(&[1, 3], 20));
        assert_eq!(extract_degrees(&m, 2, 3, 2).unwrap().degrees, vec![1, 3]);
        assert!(extract_degrees(&m, 2, 3, 3).is_err());
    }

    #[test]
    fn regular_vector_stabilizers() {
        let f = FieldDescriptor::base();
        let trivial = FiniteMatrixGroup::closure(IntMatrix::identity(6), &[], 1).unwrap();
        let r = regular_vector_check(&trivial, &IntMatrix::identity(6), &TowerElement::one(f), 1).unwrap();
        assert_eq!((r.stabilizer_order, r.eigenspace_dim), (1, 6));

        // fixed vectors of s1 inside ⟨s1, s2⟩ are stabilized by {I, s1}
        let e6 = RootSystemModel::build_e6();
        let g = FiniteMatrixGroup::closure(IntMatrix::identity(6), &e6.simple_reflections[..2], 100).unwrap();
        let s1 = &e6.simple_reflections[0];
        let r = regular_vector_check(&g, s1, &TowerElement::one(f), 3).unwrap();
        assert_eq!((r.stabilizer_order, r.eigenspace_dim), (2, 5));
        assert!(regular_vector_check(&g, s1, &TowerElement::j(f), 1).is_err());
    }
}
