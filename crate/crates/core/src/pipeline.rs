//! The construction: transport E6 into the orthogonal group of the wedge
//! form, lift the class C3 through `Λ`, build the order-3 reflections and
//! the group they generate.

use rayon::prelude::*;

use crate::error::{ensure, Error, Result};
use crate::exterior::{exterior_square, intersect_subspaces, span_basis, wedge_gram, Bivector};
use crate::field::{Field, FieldDescriptor, TowerElement};
use crate::forms::{solve_form_transport, SymmetricForm};
use crate::groups::{greedy_closure, FiniteMatrixGroup};
use crate::matrix::{to_integer_matrix, CharPoly, IntMatrix, MatrixK};
use crate::rational::Rational;
use crate::reflection::{RootSystemModel, E6_ORDER};

pub const D_E6_ORDER: usize = 25_920;
pub const C3_SIZE: usize = 80;
pub const C3_CENTRALIZER_ORDER: usize = 648;
pub const W_ORDER: usize = 155_520;
pub const LAMBDA_W_ORDER: usize = 77_760;
pub const REFLECTION_COUNT: usize = 80;
pub const W_DEGREES: [usize; 4] = [12, 18, 24, 30];
pub const E6_DEGREES: [usize; 6] = [2, 5, 6, 8, 9, 12];

/// `P` with `Pᵀ·J·P = c·A`, and the conjugation `g ↦ P g P⁻¹` it induces
/// from the Cartan model into `O(β∧)`.
#[derive(Clone, Debug)]
pub struct Transport {
    pub p: MatrixK,
    pub p_inv: MatrixK,
    pub c: Rational,
}

impl Transport {
    pub fn solve(model: &RootSystemModel) -> Result<Self> {
        let j = SymmetricForm::new(wedge_gram(FieldDescriptor::base()))?;
        let t = solve_form_transport(&model.invariant_gram, &j)?;
        let p_inv = t.p.inverse()?;
        Ok(Transport { p: t.p, p_inv, c: t.c })
    }

    /// Rebuild from a stored `P`, re-checking `Pᵀ·J·P = c·A`.
    pub fn from_parts(p: MatrixK, c: Rational, model: &RootSystemModel) -> Result<Self> {
        let f = p.field();
        let lhs = p.transpose().mul(&wedge_gram(f)).mul(&p);
        let rhs = model.cartan.to_k(f).scale(&TowerElement::from_rational(f, c.clone()));
        if lhs != rhs {
            return Err(Error::Cache("stored transport matrix fails PᵀJP = cA".into()));
        }
        let p_inv = p.inverse()?;
        Ok(Transport { p, p_inv, c })
    }

    pub fn field(&self) -> Field {
        self.p.field()
    }

    pub fn forward(&self, g: &IntMatrix) -> MatrixK {
        self.p.mul(&g.to_k(self.field())).mul(&self.p_inv)
    }

    pub fn back(&self, g: &MatrixK) -> Result<IntMatrix> {
        to_integer_matrix(&self.p_inv.mul(g).mul(&self.p))
            .ok_or_else(|| Error::Construction("transported matrix is not integral in the Cartan model".into()))
    }
}

/// Positions in `e6` (discovery order) of the elements with a 3-dimensional
/// `j`-eigenspace. Candidates are prefiltered by `w³ = I`, `tr w = −3`
/// (for a rational matrix this is equivalent) and then confirmed by rank.
pub fn enumerate_c3(e6: &FiniteMatrixGroup<IntMatrix>) -> Result<Vec<usize>> {
    let f = FieldDescriptor::base();
    let j = TowerElement::j(f);
    let candidates: Vec<usize> = (0..e6.order())
        .into_par_iter()
        .filter(|&i| {
            let w = e6.get(i);
            w.trace() == -3 && w.pow(3).is_identity()
        })
        .collect();
    let mut out = Vec::with_capacity(candidates.len());
    for i in candidates {
        let w = e6.get(i);
        if w.to_k(f).sub(&MatrixK::scalar(6, &j)).rank()? == 3 {
            ensure!(w.det() == 1, "C3 element with determinant {}", w.det());
            out.push(i);
        }
    }
    ensure!(out.len() == C3_SIZE, "C3 has {} elements, expected {C3_SIZE}", out.len());
    for &i in &out {
        let inv = e6.inverse_index(i)?;
        ensure!(out.contains(&inv), "C3 is not closed under inverses");
    }
    Ok(out)
}

fn kernel_bivectors(w: &MatrixK, e: &TowerElement) -> Result<Vec<Bivector>> {
    let k = w.sub(&MatrixK::scalar(6, e)).kernel_basis()?;
    Ok(k.iter().map(|v| Bivector::from_slice(v)).collect())
}

fn supports(bivectors: &[Bivector]) -> Option<Vec<Vec<Vec<TowerElement>>>> {
    bivectors
        .iter()
        .map(|b| if b.pfaffian().is_zero() { b.support().ok() } else { None })
        .collect()
}

/// The 4×4 lift `h` with `Λ(h) = w'` for `w'` in transported C3.
///
/// For the eigenvalue `e ∈ {j², j}` whose eigenspace `K_e` is `∧²M` (the
/// supports of its bivectors span a 3-space `M`), the other eigenspace is
/// `L ∧ M` and `L` is the common line of its supports. Then `h` is the
/// identity on `L` and `e²` on `M`, so `Λ(h)` is `e⁴ = e` on `∧²M` and `e²`
/// on `L ∧ M`. `e = j²` gives eigenvalues `1, j, j, j`; `e = j` gives the
/// inverse of such an element.
pub fn lift_c3(w: &MatrixK) -> Result<MatrixK> {
    let f = w.field();
    let j = TowerElement::j(f);
    let j2 = j.square();
    let kj = kernel_bivectors(w, &j)?;
    let kj2 = kernel_bivectors(w, &j2)?;
    ensure!(kj.len() == 3 && kj2.len() == 3, "eigenspaces of dimensions {} and {}", kj.len(), kj2.len());
    for (e, wedge_m, other) in [(&j2, &kj2, &kj), (&j, &kj, &kj2)] {
        let Some(sup) = supports(wedge_m) else { continue };
        let m = span_basis(&sup.concat())?;
        if m.len() != 3 {
            continue;
        }
        let other_sup = supports(other).ok_or_else(|| Error::Construction("indecomposable bivector in L∧M".into()))?;
        let mut l = other_sup[0].clone();
        for s in &other_sup[1..] {
            l = intersect_subspaces(&l, s)?;
        }
        ensure!(l.len() == 1, "common line of supports has dimension {}", l.len());
        let mut cols = l.clone();
        cols.extend(m);
        let b = MatrixK::from_columns(f, &cols);
        ensure!(b.rank()? == 4, "L and M do not span V");
        let e2 = e.square();
        let d = MatrixK::diagonal(&[TowerElement::one(f), e2.clone(), e2.clone(), e2]);
        let h = b.mul(&d).mul(&b.inverse()?);
        ensure!(exterior_square(&h) == *w, "Λ(lift) differs from the C3 element");
        ensure!(h.det()?.is_one(), "lift does not have determinant 1");
        return Ok(h);
    }
    Err(Error::Construction("no eigenspace of the form ∧²M".into()))
}

/// `(x − 1)(x − j)³`.
pub fn distinguished_char_poly(field: Field) -> CharPoly {
    let j = TowerElement::j(field);
    CharPoly::from_roots(field, &[TowerElement::one(field), j.clone(), j.clone(), j])
}

/// The unique element of `{h, h⁻¹}` with eigenvalues `1, j, j, j`.
pub fn distinguished_lift(h: &MatrixK) -> Result<MatrixK> {
    let target = distinguished_char_poly(h.field());
    if h.char_poly() == target {
        return Ok(h.clone());
    }
    let inv = h.inverse()?;
    ensure!(inv.char_poly() == target, "neither h nor h⁻¹ has eigenvalues 1, j, j, j");
    Ok(inv)
}

/// For the lift `h` of `w'`: `Λ` maps `{±h, ±h⁻¹}` into `{w', w'⁻¹}`, the
/// four are distinct, and exactly one has eigenvalues `1, j, j, j`.
pub fn lemma_uniqueness_check(w: &MatrixK, h: &MatrixK) -> Result<bool> {
    let hi = h.inverse()?;
    let cands = [h.clone(), h.neg(), hi.clone(), hi.neg()];
    let w_inv = w.inverse()?;
    let images_ok = cands.iter().all(|g| {
        let l = exterior_square(g);
        l == *w || l == w_inv
    });
    let distinct = (0..4).all(|a| (a + 1..4).all(|b| cands[a] != cands[b]));
    let target = distinguished_char_poly(h.field());
    let distinguished = cands.iter().filter(|g| g.char_poly() == target).count();
    Ok(images_ok && distinct && distinguished == 1 && exterior_square(&h.neg()) == exterior_square(h))
}

/// The reflection attached to a lift: `j²·w̃` for `w̃` with eigenvalues
/// `1, j, j, j`, and `j·w̃⁻¹` for its inverse.
pub fn reflection_from_lift(h: &MatrixK) -> Result<MatrixK> {
    let f = h.field();
    let j = TowerElement::j(f);
    if h.char_poly() == distinguished_char_poly(f) {
        Ok(h.scale(&j.square()))
    } else {
        Ok(h.scale(&j))
    }
}

/// `λ(s) = det(s)·Λ(s)`.
pub fn lambda(s: &MatrixK) -> Result<MatrixK> {
    Ok(exterior_square(s).scale(&s.det()?))
}

/// `ζ6·I` and `−I`, generators of the scalar subgroup `µ6`.
pub fn mu6_generators(field: Field) -> [MatrixK; 2] {
    let zeta6 = TowerElement::zeta_pow(field, 2);
    [MatrixK::scalar(4, &zeta6), MatrixK::scalar(4, &TowerElement::from_int(field, -1))]
}

/// `W = ⟨Ref⟩`, closed from reflections chosen greedily in order; the lifts
/// and `µ6` must then be members, which gives `⟨Ref⟩ = ⟨lifts, µ6⟩` since
/// every reflection is a scalar multiple of a lift.
pub fn build_w(lifts: &[MatrixK], reflections: &[MatrixK]) -> Result<FiniteMatrixGroup<MatrixK>> {
    let f = reflections[0].field();
    let w = greedy_closure(MatrixK::identity(4, f), reflections.iter().cloned(), Some(W_ORDER), W_ORDER)?;
    ensure!(w.order() == W_ORDER, "W has order {}, expected {W_ORDER}", w.order());
    ensure!(lifts.iter().all(|h| w.contains(h)), "a lift is not in ⟨Ref⟩");
    ensure!(mu6_generators(f).iter().all(|z| w.contains(z)), "µ6 is not in ⟨Ref⟩");
    ensure!(reflections.iter().all(|s| w.contains(s)), "a reflection is missing from W");
    Ok(w)
}

/// Everything the verification battery reads.
#[derive(Clone, Debug)]
pub struct ConstructionContext {
    pub model: RootSystemModel,
    pub e6: FiniteMatrixGroup<IntMatrix>,
    pub d_e6: FiniteMatrixGroup<IntMatrix>,
    pub transport: Transport,
    pub transported_generators: Vec<MatrixK>,
    /// Positions of C3 in `e6`.
    pub c3: Vec<usize>,
    pub c3_transported: Vec<MatrixK>,
    /// `lifts[i]` is the lift of `c3_transported[i]`.
    pub lifts: Vec<MatrixK>,
    /// `reflections[i] = reflection_from_lift(lifts[i])`.
    pub reflections: Vec<MatrixK>,
    pub w: FiniteMatrixGroup<MatrixK>,
}

/// The stages before `W`, cheap enough to recompute on every run.
#[derive(Clone, Debug)]
pub struct PreW {
    pub model: RootSystemModel,
    pub e6: FiniteMatrixGroup<IntMatrix>,
    pub d_e6: FiniteMatrixGroup<IntMatrix>,
    pub transport: Transport,
    pub c3: Vec<usize>,
    pub c3_transported: Vec<MatrixK>,
    pub lifts: Vec<MatrixK>,
    pub reflections: Vec<MatrixK>,
}

impl PreW {
    pub fn from_e6(model: RootSystemModel, e6: FiniteMatrixGroup<IntMatrix>, transport: Transport) -> Result<Self> {
        ensure!(e6.order() == E6_ORDER, "E6 has order {}", e6.order());
        let d_e6 = e6.subgroup_by_det(&[1])?;
        ensure!(d_e6.order() == D_E6_ORDER, "D(E6) has order {}", d_e6.order());
        let c3 = enumerate_c3(&e6)?;
        let c3_transported: Vec<MatrixK> = c3.par_iter().map(|&i| transport.forward(e6.get(i))).collect();
        let lifts: Vec<MatrixK> = c3_transported.par_iter().map(lift_c3).collect::<Result<_>>()?;
        let reflections: Vec<MatrixK> = lifts.iter().map(reflection_from_lift).collect::<Result<_>>()?;
        Ok(PreW { model, e6, d_e6, transport, c3, c3_transported, lifts, reflections })
    }

    pub fn build() -> Result<Self> {
        let model = RootSystemModel::build_e6();
        let e6 = model.closure()?;
        let transport = Transport::solve(&model)?;
        Self::from_e6(model, e6, transport)
    }

    pub fn with_w(self, w: FiniteMatrixGroup<MatrixK>) -> Result<ConstructionContext> {
        ensure!(w.order() == W_ORDER, "W has order {}", w.order());
        let f = self.transport.field();
        ensure!(w.identity().field() == f, "W lives over {} instead of {}", w.identity().field().id(), f.id());
        ensure!(self.reflections.iter().all(|s| w.contains(s)), "a reflection is missing from W");
        let transported_generators = self.model.simple_reflections.iter().map(|s| self.transport.forward(s)).collect();
        Ok(ConstructionContext {
            model: self.model,
            e6: self.e6,
            d_e6: self.d_e6,
            transport: self.transport,
            transported_generators,
            c3: self.c3,
            c3_transported: self.c3_transported,
            lifts: self.lifts,
            reflections: self.reflections,
            w,
        })
    }
}

impl ConstructionContext {
    pub fn build() -> Result<Self> {
        let pre = PreW::build()?;
        let w = build_w(&pre.lifts, &pre.reflections)?;
        pre.with_w(w)
    }

    pub fn field(&self) -> Field {
        self.transport.field()
    }

    /// The chosen representative `w3`: the first C3 element discovered.
    pub fn w3(&self) -> &IntMatrix {
        self.e6.get(self.c3[0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reflection::is_reflection;

    #[test]
    fn lift_of_a_diagonal_element() {
        let f = FieldDescriptor::base();
        let j = TowerElement::j(f);
        let h = MatrixK::diagonal(&[TowerElement::one(f), j.clone(), j.clone(), j.clone()]);
        let w = exterior_square(&h);
        let l = lift_c3(&w).unwrap();
        assert_eq!(l, h);
        assert_eq!(distinguished_lift(&l).unwrap(), h);
        assert!(lemma_uniqueness_check(&w, &l).unwrap());
        let hi = h.inverse().unwrap();
        let wi = exterior_square(&hi);
        assert_eq!(lift_c3(&wi).unwrap(), hi);
        assert_eq!(distinguished_lift(&hi).unwrap(), h);
        let s = reflection_from_lift(&h).unwrap();
        assert!(is_reflection(&s));
        assert_eq!(lambda(&s).unwrap(), w);
        assert_eq!(lambda(&reflection_from_lift(&hi).unwrap()).unwrap(), wi);
    }

    #[test]
    fn non_c3_input_is_rejected() {
        let f = FieldDescriptor::base();
        assert!(lift_c3(&MatrixK::identity(6, f)).is_err());
    }

    #[test]
    fn transport_round_trip() {
        let model = RootSystemModel::build_e6();
        let t = Transport::solve(&model).unwrap();
        let f = t.field();
        let jg = wedge_gram(f);
        assert!(t.forward(&IntMatrix::identity(6)).is_identity());
        for s in &model.simple_reflections {
            let g = t.forward(s);
            assert_eq!(g.transpose().mul(&jg).mul(&g), jg);
            assert_eq!(&t.back(&g).unwrap(), s);
        }
        assert!(t.back(&MatrixK::scalar(6, &TowerElement::j(f))).is_err());
    }
}
