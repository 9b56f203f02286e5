//! The verification battery run over a finished construction.

use std::cell::OnceCell;
use std::collections::{BTreeMap, HashSet};
use std::fmt::Display;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::{exterior_square, wedge_form, wedge_gram, Bivector};
use crate::field::{FieldDescriptor, TowerElement};
use crate::groups::{element_order, greedy_closure, ConjClassTable};
use crate::matrix::{CharPoly, MatrixK};
use crate::pipeline::*;
use crate::rational::Rational;
use crate::reflection::{
    char_poly_census, character_norm_int, extract_degrees, is_reflection, molien_from_char_polys,
    molien_series_int, order8_profile, reflections_of, reflections_of_int, regular_vector_check, DegreeList,
    E6_ORDER,
};

pub const DEFAULT_TRUNCATION: usize = 96;
pub const MIN_TRUNCATION: usize = 85;
pub const DEFAULT_SEED: u64 = 0x5eed_0032;
pub const PROPERTY_SAMPLES: usize = 100;

#[derive(Clone, Debug)]
pub struct BatteryConfig {
    pub truncation: usize,
    pub seed: u64,
    pub property_samples: usize,
    /// Check ids or aliases; `None` runs everything.
    pub checks: Option<Vec<String>>,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        BatteryConfig { truncation: DEFAULT_TRUNCATION, seed: DEFAULT_SEED, property_samples: PROPERTY_SAMPLES, checks: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Warn,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Warn => "WARN",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub id: String,
    pub description: String,
    pub expected: String,
    pub actual: String,
    pub status: Status,
    pub ms: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub overall: Status,
    pub field: String,
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.overall == Status::Pass
    }

    pub fn get(&self, id: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.id == id)
    }

    /// The same report with every timing zeroed.
    pub fn without_timings(&self) -> Self {
        let mut r = self.clone();
        r.checks.iter_mut().for_each(|c| c.ms = 0);
        r
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!("[{}] {:<22} {} ({} ms)\n", c.status.label(), c.id, c.description, c.ms));
            out.push_str(&format!("       expected: {}\n", c.expected));
            out.push_str(&format!("       actual:   {}\n", c.actual));
        }
        let passed = self.checks.iter().filter(|c| c.status != Status::Fail).count();
        out.push_str(&format!("overall: {} ({passed}/{} checks without failure)\n", self.overall.label(), self.checks.len()));
        out
    }
}

pub struct CheckSpec {
    pub id: &'static str,
    pub alias: Option<&'static str>,
    pub description: &'static str,
}

const fn spec(id: &'static str, alias: Option<&'static str>, description: &'static str) -> CheckSpec {
    CheckSpec { id, alias, description }
}

/// Every check, in execution order.
pub const CHECKS: &[CheckSpec] = &[
    spec("e6-order", None, "closure of the E6 simple reflections and its det-1 subgroup"),
    spec("transport", None, "transport of the Cartan form onto the wedge form"),
    spec("c3-class", Some("c3"), "the class C3 of elements with a 3-dimensional j-eigenspace"),
    spec("c3-split", None, "w3 versus its inverse in E6 and D(E6); the D(E6)-classes inside C3"),
    spec("lift-lemma", Some("lifts"), "lifts through the exterior square and their uniqueness"),
    spec("reflections", None, "the 80 reflections and the bijection λ onto transported C3"),
    spec("w-orders", Some("orders"), "order, det-1 part, image, center and determinants of W"),
    spec("quotient", None, "W/µ6 ≅ D(E6) through the exterior square"),
    spec("subgroup-h", None, "the subgroup H generated by the lifts"),
    spec("e6-degrees", None, "Molien series and degrees of E6"),
    spec("w-degrees", Some("degrees"), "Molien series and degrees of W"),
    spec("character-norm", None, "irreducibility via the character norm"),
    spec("primitivity", None, "normal-subgroup certificate for primitivity"),
    spec("order8-profile", None, "order-8 elements of E6 and D(E6)"),
    spec("springer-regular", Some("regular"), "regular j-eigenvector of w3"),
    spec("exterior-laws", Some("properties"), "exterior-square laws on seeded random matrices"),
    spec("shephard-todd", None, "invariant tuple of W against the data of G32"),
    spec("cyclotomic-char-polys", None, "characteristic polynomials of W have coefficients in Q(ζ3)"),
];

/// Resolve a filter of ids and aliases to specs in execution order.
pub fn select_checks(filter: Option<&[String]>) -> Result<Vec<&'static CheckSpec>> {
    let Some(filter) = filter else {
        return Ok(CHECKS.iter().collect());
    };
    for name in filter {
        if !CHECKS.iter().any(|c| c.id == name || c.alias == Some(name.as_str())) {
            return Err(Error::Domain(format!("unknown check `{name}`")));
        }
    }
    Ok(CHECKS
        .iter()
        .filter(|c| filter.iter().any(|n| c.id == n || c.alias == Some(n.as_str())))
        .collect())
}

struct Outcome {
    expected: String,
    actual: String,
    status: Status,
}

fn outcome(expected: impl Display, actual: impl Display, ok: bool) -> Outcome {
    Outcome { expected: expected.to_string(), actual: actual.to_string(), status: if ok { Status::Pass } else { Status::Fail } }
}

/// Per-element data of `W` under `Λ(g) = j^k · P d P⁻¹`, `d ∈ D(E6)`.
struct QuotientData {
    k: Vec<u8>,
    d: Vec<u32>,
    /// number of `k ∈ {0, 1, 2}` giving a factorization, per element
    matches: Vec<u8>,
}

type Census = Vec<(Vec<TowerElement>, usize)>;

/// Shared intermediate results, computed on first use.
struct Battery<'a> {
    ctx: &'a ConstructionContext,
    config: &'a BatteryConfig,
    e6_classes: OnceCell<Result<ConjClassTable, String>>,
    d_classes: OnceCell<Result<ConjClassTable, String>>,
    quotient: OnceCell<Result<QuotientData, String>>,
    census: OnceCell<Result<Census, String>>,
    w_reflections: OnceCell<Vec<usize>>,
    center: OnceCell<Result<Vec<MatrixK>, String>>,
    w_degrees: OnceCell<Result<DegreeList, String>>,
    d_simple: OnceCell<Result<bool, String>>,
}

fn lazy<T>(cell: &OnceCell<Result<T, String>>, f: impl FnOnce() -> Result<T>) -> Result<&T> {
    cell.get_or_init(|| f().map_err(|e| e.to_string())).as_ref().map_err(|e| Error::Construction(e.clone()))
}

fn join<T: Display>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

impl<'a> Battery<'a> {
    fn new(ctx: &'a ConstructionContext, config: &'a BatteryConfig) -> Self {
        Battery {
            ctx,
            config,
            e6_classes: OnceCell::new(),
            d_classes: OnceCell::new(),
            quotient: OnceCell::new(),
            census: OnceCell::new(),
            w_reflections: OnceCell::new(),
            center: OnceCell::new(),
            w_degrees: OnceCell::new(),
            d_simple: OnceCell::new(),
        }
    }

    fn e6_classes(&self) -> Result<&ConjClassTable> {
        lazy(&self.e6_classes, || self.ctx.e6.conjugacy_classes())
    }

    fn d_classes(&self) -> Result<&ConjClassTable> {
        lazy(&self.d_classes, || self.ctx.d_e6.conjugacy_classes())
    }

    fn census(&self) -> Result<&Census> {
        lazy(&self.census, || Ok(char_poly_census(&self.ctx.w)))
    }

    fn w_reflections(&self) -> &[usize] {
        self.w_reflections.get_or_init(|| reflections_of(&self.ctx.w))
    }

    fn center(&self) -> Result<&Vec<MatrixK>> {
        lazy(&self.center, || Ok(self.ctx.w.center()?.elements().cloned().collect()))
    }

    fn d_simple(&self) -> Result<bool> {
        lazy(&self.d_simple, || self.ctx.d_e6.simplicity_certificate(self.d_classes()?)).copied()
    }

    fn quotient(&self) -> Result<&QuotientData> {
        lazy(&self.quotient, || {
            let ctx = self.ctx;
            let f = ctx.field();
            let d = &ctx.d_e6;
            let index: FxHashMap<MatrixK, u32> =
                (0..d.order()).into_par_iter().map(|i| (ctx.transport.forward(d.get(i)), i as u32)).collect();
            let j = TowerElement::j(f);
            // j^{-k}
            let unscale = [TowerElement::one(f), j.square(), j];
            let per: Vec<(u8, u32, u8)> = (0..ctx.w.order())
                .into_par_iter()
                .map(|i| {
                    let l = exterior_square(ctx.w.get(i));
                    let mut found = (u8::MAX, u32::MAX);
                    let mut matches = 0u8;
                    for (k, u) in unscale.iter().enumerate() {
                        let x = if k == 0 { l.clone() } else { l.scale(u) };
                        if let Some(&di) = index.get(&x) {
                            if matches == 0 {
                                found = (k as u8, di);
                            }
                            matches += 1;
                        }
                    }
                    (found.0, found.1, matches)
                })
                .collect();
            Ok(QuotientData {
                k: per.iter().map(|p| p.0).collect(),
                d: per.iter().map(|p| p.1).collect(),
                matches: per.iter().map(|p| p.2).collect(),
            })
        })
    }

    fn w_degrees(&self) -> Result<&DegreeList> {
        lazy(&self.w_degrees, || {
            if self.config.truncation < MIN_TRUNCATION {
                return Err(Error::Domain(format!("truncation {} is below {MIN_TRUNCATION}", self.config.truncation)));
            }
            let census = self.census()?;
            let series = molien_from_char_polys(
                census.iter().map(|(p, m)| (p.as_slice(), *m)),
                self.ctx.w.order(),
                self.config.truncation,
            )?;
            extract_degrees(&series, 4, self.ctx.w.order(), self.w_reflections().len())
        })
    }

    fn run(&self, id: &str) -> Result<Outcome> {
        match id {
            "e6-order" => self.e6_order(),
            "transport" => self.transport(),
            "c3-class" => self.c3_class(),
            "c3-split" => self.c3_split(),
            "lift-lemma" => self.lift_lemma(),
            "reflections" => self.reflections(),
            "w-orders" => self.w_orders(),
            "quotient" => self.quotient_check(),
            "subgroup-h" => self.subgroup_h(),
            "e6-degrees" => self.e6_degrees(),
            "w-degrees" => self.w_degrees_check(),
            "character-norm" => self.character_norm(),
            "primitivity" => self.primitivity(),
            "order8-profile" => self.order8(),
            "springer-regular" => self.springer(),
            "exterior-laws" => self.exterior_laws(),
            "shephard-todd" => self.shephard_todd(),
            "cyclotomic-char-polys" => self.cyclotomic(),
            other => Err(Error::Domain(format!("unknown check `{other}`"))),
        }
    }

    fn e6_order(&self) -> Result<Outcome> {
        let ctx = self.ctx;
        let from_simple = ctx.e6.generators() == ctx.model.simple_reflections.as_slice();
        let (a, b) = (ctx.e6.order(), ctx.d_e6.order());
        Ok(outcome(
            format!("|E6| = {E6_ORDER}, |D(E6)| = {D_E6_ORDER}, generated by the six simple reflections"),
            format!("|E6| = {a}, |D(E6)| = {b}, generated by the six simple reflections: {from_simple}"),
            a == E6_ORDER && b == D_E6_ORDER && from_simple,
        ))
    }

    fn transport(&self) -> Result<Outcome> {
        let ctx = self.ctx;
        let t = &ctx.transport;
        let f = ctx.field();
        let jg = wedge_gram(f);
        let pjp = t.p.transpose().mul(&jg).mul(&t.p)
            == ctx.model.cartan.to_k(f).scale(&TowerElement::from_rational(f, t.c.clone()));
        let preserves = |g: &MatrixK| g.transpose().mul(&jg).mul(g) == jg;
        let gens_ok = ctx
            .transported_generators
            .iter()
            .zip(&ctx.model.simple_reflections)
            .all(|(g, s)| preserves(g) && t.back(g).as_ref().ok() == Some(s));
        let c3_ok = ctx.c3_transported.par_iter().all(preserves);
        let identity_ok = t.forward(&crate::matrix::IntMatrix::identity(6)).is_identity();
        Ok(outcome(
            "PᵀJP = cA; transported generators and C3 preserve J; round trips are exact",
            format!(
                "c = {}, field {}, PᵀJP = cA: {pjp}, generators: {gens_ok}, C3: {c3_ok}, transport(I) = I: {identity_ok}",
                t.c,
                f.id()
            ),
            pjp && gens_ok && c3_ok && identity_ok,
        ))
    }

    fn c3_class(&self) -> Result<Outcome> {
        let ctx = self.ctx;
        let e6 = &ctx.e6;
        let ok_elems = ctx
            .c3
            .iter()
            .filter(|&&i| {
                let w = e6.get(i);
                w.det() == 1 && !w.is_identity() && w.pow(3).is_identity() && w.trace() == -3
            })
            .count();
        let w3 = ctx.w3();
        let cent = e6.centralizer(w3)?.order();
        let table = self.e6_classes()?;
        let rep = ctx.c3[0];
        let one_class = ctx.c3.iter().all(|&i| table.same_class(i, rep)) && table.class_size_of(rep) == ctx.c3.len();
        Ok(outcome(
            format!("{C3_SIZE} elements, all det 1, order 3, trace −3; one E6-class; |C_E6(w3)| = {C3_CENTRALIZER_ORDER}"),
            format!(
                "{} elements, {ok_elems} with det 1, order 3, trace −3; one E6-class: {one_class}; |C_E6(w3)| = {cent}",
                ctx.c3.len()
            ),
            ctx.c3.len() == C3_SIZE && ok_elems == C3_SIZE && one_class && cent == C3_CENTRALIZER_ORDER,
        ))
    }

    fn c3_split(&self) -> Result<Outcome> {
        let ctx = self.ctx;
        let w3_pos = ctx.c3[0];
        let inv_pos = ctx.e6.inverse_index(w3_pos)?;
        let e6_table = self.e6_classes()?;
        let conj_e6 = e6_table.same_class(w3_pos, inv_pos);
        let d = &ctx.d_e6;
        let d_table = self.d_classes()?;
        let dpos = |i: usize| d.index_of(ctx.e6.get(i)).ok_or_else(|| Error::Construction("C3 element outside D(E6)".into()));
        let (a, b) = (dpos(w3_pos)?, dpos(inv_pos)?);
        let conj_d = d_table.same_class(a, b);
        let mut split: BTreeMap<u32, usize> = BTreeMap::new();
        for &i in &ctx.c3 {
            *split.entry(d_table.class_of[dpos(i)?]).or_insert(0) += 1;
        }
        let parts: Vec<usize> = split.values().copied().collect();
        let whole = split.iter().all(|(&c, &n)| d_table.sizes[c as usize] == n);
        Ok(outcome(
            "w3 ~ w3⁻¹ in E6, not in D(E6); C3 = two D(E6)-classes of size 40",
            format!("conjugate in E6: {conj_e6}, in D(E6): {conj_d}; D(E6)-classes in C3: [{}], full classes: {whole}", join(&parts)),
            conj_e6 && !conj_d && parts == [40, 40] && whole,
        ))
    }

    fn lift_lemma(&self) -> Result<Outcome> {
        let ctx = self.ctx;
        let results: Vec<bool> = ctx
            .c3_transported
            .par_iter()
            .zip(&ctx.lifts)
            .map(|(w, h)| {
                Ok(exterior_square(h) == *w
                    && h.det()?.is_one()
                    && h.pow(3).is_identity()
                    && !h.is_identity()
                    && lemma_uniqueness_check(w, h)?)
            })
            .collect::<Result<_>>()?;
        let good = results.iter().filter(|&&b| b).count();
        let distinguished: HashSet<MatrixK> = ctx.lifts.iter().map(distinguished_lift).collect::<Result<_>>()?;
        let lifts: HashSet<&MatrixK> = ctx.lifts.iter().collect();
        Ok(outcome(
            format!("{C3_SIZE}/{C3_SIZE} pass (Λ(h) = w, order 3, det 1, one of ±h^±1 with eigenvalues 1, j, j, j); 80 lifts, 40 distinguished"),
            format!("{good}/{} pass; {} lifts, {} distinguished", ctx.lifts.len(), lifts.len(), distinguished.len()),
            good == C3_SIZE && lifts.len() == C3_SIZE && distinguished.len() == C3_SIZE / 2,
        ))
    }

    fn reflections(&self) -> Result<Outcome> {
        let ctx = self.ctx;
        let f = ctx.field();
        let j = TowerElement::j(f);
        let j2 = j.square();
        let one = TowerElement::one(f);
        let shapes: Vec<bool> = ctx
            .reflections
            .par_iter()
            .map(|s| {
                let det = s.det()?;
                let expected_lambda_poly =
                    CharPoly::from_roots(f, &[one.clone(), one.clone(), one.clone(), det.clone(), det.clone(), det.clone()]);
                Ok(is_reflection(s)
                    && s.pow(3).is_identity()
                    && (det == j || det == j2)
                    && exterior_square(s).char_poly() == expected_lambda_poly)
            })
            .collect::<Result<_>>()?;
        let good = shapes.iter().filter(|&&b| b).count();
        let distinct: HashSet<&MatrixK> = ctx.reflections.iter().collect();
        let images: Vec<MatrixK> = ctx.reflections.par_iter().map(lambda).collect::<Result<_>>()?;
        let image_set: HashSet<&MatrixK> = images.iter().collect();
        let c3_set: HashSet<&MatrixK> = ctx.c3_transported.iter().collect();
        let bijective = images.iter().zip(&ctx.c3_transported).all(|(a, b)| a == b)
            && image_set.len() == C3_SIZE
            && image_set == c3_set;
        let scanned: HashSet<&MatrixK> = self.w_reflections().iter().map(|&i| ctx.w.get(i)).collect();
        let scan_ok = scanned == distinct;
        Ok(outcome(
            format!("{REFLECTION_COUNT} distinct reflections of order 3 with det ∈ {{j, j²}} and Λ-eigenvalues 1,1,1,det,det,det; λ bijective onto C3; a scan of W finds exactly these"),
            format!(
                "{} distinct, {good} of the expected shape; λ bijective: {bijective}; scan of W finds {} (same set: {scan_ok})",
                distinct.len(),
                scanned.len()
            ),
            distinct.len() == REFLECTION_COUNT && good == REFLECTION_COUNT && bijective && scan_ok,
        ))
    }

    fn w_orders(&self) -> Result<Outcome> {
        let ctx = self.ctx;
        let f = ctx.field();
        let census = self.census()?;
        let one = TowerElement::one(f);
        // det g = constant term of the characteristic polynomial for even dimension
        let sl = census.iter().filter(|(p, _)| p[0] == one).map(|(_, m)| m).sum::<usize>();
        let det_cubed = census.iter().all(|(p, _)| p[0].pow(3).map(|x| x.is_one()).unwrap_or(false));
        let q = self.quotient()?;
        let image: HashSet<(u8, u32)> = q.k.iter().copied().zip(q.d.iter().copied()).collect();
        let center = self.center()?;
        let mu6: HashSet<MatrixK> = (0..6).map(|k| MatrixK::scalar(4, &TowerElement::zeta_pow(f, 2 * k))).collect();
        let center_set: HashSet<MatrixK> = center.iter().cloned().collect();
        let center_ok = center_set == mu6;
        Ok(outcome(
            format!("|W| = {W_ORDER}, |W ∩ SL| = 51840, |Λ(W)| = {LAMBDA_W_ORDER}, Z(W) = {{ζ6^k·I}}, det(g)³ = 1 for all g"),
            format!(
                "|W| = {}, |W ∩ SL| = {sl}, |Λ(W)| = {}, |Z(W)| = {} (equals µ6: {center_ok}), det(g)³ = 1 for all g: {det_cubed}",
                ctx.w.order(),
                image.len(),
                center.len()
            ),
            ctx.w.order() == W_ORDER && sl == 51_840 && image.len() == LAMBDA_W_ORDER && center_ok && det_cubed,
        ))
    }

    fn quotient_check(&self) -> Result<Outcome> {
        let ctx = self.ctx;
        let q = self.quotient()?;
        let unique = q.matches.iter().filter(|&&m| m == 1).count();
        let hit: HashSet<u32> = q.d.iter().copied().collect();
        let kernel: Vec<usize> = (0..ctx.w.order()).filter(|&i| q.d[i] == 0).collect();
        let kernel_scalar = kernel.iter().all(|&i| ctx.w.get(i).as_scalar().is_some());
        // the factorization is compatible with the discovery record of W
        let gen_pos: Vec<usize> = ctx
            .w
            .generators()
            .iter()
            .map(|g| ctx.w.index_of(g).ok_or_else(|| Error::Construction("generator outside W".into())))
            .collect::<Result<_>>()?;
        let disc = ctx.w.discovery();
        let d = &ctx.d_e6;
        let consistent = unique == ctx.w.order()
            && (1..ctx.w.order()).into_par_iter().all(|i| {
                let (p, g) = (disc[i].parent as usize, gen_pos[disc[i].generator as usize]);
                let prod = d.get(q.d[p] as usize).mul(d.get(q.d[g] as usize));
                d.index_of(&prod) == Some(q.d[i] as usize) && (q.k[p] + q.k[g]) % 3 == q.k[i]
            });
        Ok(outcome(
            format!("every Λ(g) = j^k·d with unique k, d ∈ D(E6); g ↦ d onto D(E6) ({D_E6_ORDER}) with kernel µ6 (6 scalars); compatible with products"),
            format!(
                "{unique}/{} unique factorizations; image size {}; kernel {} elements (scalar: {kernel_scalar}); compatible with products: {consistent}",
                ctx.w.order(),
                hit.len(),
                kernel.len()
            ),
            unique == W_ORDER && hit.len() == D_E6_ORDER && kernel.len() == 6 && kernel_scalar && consistent,
        ))
    }

    fn subgroup_h(&self) -> Result<Outcome> {
        let ctx = self.ctx;
        let f = ctx.field();
        let h = greedy_closure(MatrixK::identity(4, f), ctx.lifts.iter().cloned(), None, 2 * D_E6_ORDER)?;
        let q = self.quotient()?;
        let pos: Vec<usize> = h
            .elements()
            .map(|x| ctx.w.index_of(x).ok_or_else(|| Error::Construction("H is not inside W".into())))
            .collect::<Result<_>>()?;
        let in_d = pos.iter().all(|&i| q.k[i] == 0);
        let image: HashSet<u32> = pos.iter().map(|&i| q.d[i]).collect();
        let scalars = h.elements().filter(|x| x.as_scalar().is_some()).count();
        let h_mu6 = h.order() * 6 / scalars;
        let rc: HashSet<MatrixK> = ctx
            .reflections
            .iter()
            .map(|s| Ok(s.scale(&s.det()?.inv()?)))
            .collect::<Result<_>>()?;
        let lift_set: HashSet<MatrixK> = ctx.lifts.iter().cloned().collect();
        let rc_ok = rc == lift_set;
        Ok(outcome(
            format!("Λ(H) = D(E6) ({D_E6_ORDER} elements); |H·µ6| = {W_ORDER}; RC = lift set"),
            format!(
                "|H| = {}, Λ(H) inside D(E6): {in_d}, |Λ(H)| = {}; |H·µ6| = {h_mu6}; RC = lift set: {rc_ok}",
                h.order(),
                image.len()
            ),
            in_d && image.len() == D_E6_ORDER && h_mu6 == W_ORDER && rc_ok,
        ))
    }

    fn e6_degrees(&self) -> Result<Outcome> {
        let ctx = self.ctx;
        let n = self.config.truncation;
        let series = molien_series_int(&ctx.e6, n)?;
        let refl = reflections_of_int(&ctx.e6).len();
        let degrees = extract_degrees(&series, 6, ctx.e6.order(), refl)?;
        let by3 = degrees.degrees.iter().filter(|d| *d % 3 == 0).count();
        Ok(outcome(
            format!("degrees ({}), 36 reflections, exactly 3 degrees divisible by 3", join(&E6_DEGREES)),
            format!("degrees ({}), {refl} reflections, {by3} divisible by 3, truncation {n}", join(&degrees.degrees)),
            degrees.degrees == E6_DEGREES && refl == 36 && by3 == 3,
        ))
    }

    fn w_degrees_check(&self) -> Result<Outcome> {
        let d = self.w_degrees()?;
        Ok(outcome(
            format!("degrees ({}), Σd = 84, Πd = {W_ORDER}", join(&W_DEGREES)),
            format!(
                "degrees ({}), Σd = {}, Πd = {}, truncation {}",
                join(&d.degrees),
                d.sum(),
                d.product(),
                self.config.truncation
            ),
            d.degrees == W_DEGREES && d.sum() == 84 && d.product() == W_ORDER,
        ))
    }

    fn w_character_norm(&self) -> Result<Rational> {
        let census = self.census()?;
        let f = self.ctx.field();
        let sum = census.iter().fold(TowerElement::zero(f), |acc, (p, m)| {
            let tr = p[3].neg();
            acc.add(&tr.mul(&tr.conjugate()).scale(&Rational::from_int(*m as i64)))
        });
        let q = sum.as_rational().ok_or_else(|| Error::Construction("character norm is not rational".into()))?;
        Ok(&q / &Rational::from_int(self.ctx.w.order() as i64))
    }

    fn character_norm(&self) -> Result<Outcome> {
        let w = self.w_character_norm()?;
        let e6 = character_norm_int(&self.ctx.e6);
        Ok(outcome("W: 1, E6: 1", format!("W: {w}, E6: {e6}"), w.is_one() && e6.is_one()))
    }

    fn primitivity(&self) -> Result<Outcome> {
        let ctx = self.ctx;
        let simple = self.d_simple()?;
        let refl: HashSet<&MatrixK> = ctx.reflections.iter().collect();
        let gens_refl = ctx.w.generators().iter().all(|g| refl.contains(g) && element_order(g, 10).ok() == Some(3));
        let by_reflections = gens_refl && ctx.w.order() == W_ORDER;
        let center = self.center()?.len();
        let norm = self.w_character_norm()?;
        Ok(outcome(
            "D(E6) simple; W generated by order-3 reflections; |Z(W)| = 6; character norm 1",
            format!(
                "D(E6) simple: {simple}; W generated by {} order-3 reflections: {by_reflections}; |Z(W)| = {center}; character norm {norm}",
                ctx.w.generators().len()
            ),
            simple && by_reflections && center == 6 && norm.is_one(),
        ))
    }

    fn order8(&self) -> Result<Outcome> {
        let p = order8_profile(&self.ctx.e6, &self.ctx.d_e6)?;
        Ok(outcome(
            "order-8 elements exist in E6, all with char poly (x²−1)(x⁴+1) and det −1; none in D(E6)",
            format!(
                "{} order-8 elements, {} with char poly (x²−1)(x⁴+1), {} with det −1; {} in D(E6)",
                p.count, p.char_poly_matches, p.det_minus_one, p.count_in_derived
            ),
            p.holds(),
        ))
    }

    fn springer(&self) -> Result<Outcome> {
        let j = TowerElement::j(FieldDescriptor::base());
        let r = regular_vector_check(&self.ctx.e6, self.ctx.w3(), &j, 8)?;
        let v: Vec<String> = r.vector.iter().map(|x| x.to_string()).collect();
        Ok(outcome(
            "j-eigenspace of dimension 3 containing a vector with trivial stabilizer",
            format!("eigenspace dimension {}, stabilizer order {} for v = ({})", r.eigenspace_dim, r.stabilizer_order, v.join(", ")),
            r.eigenspace_dim == 3 && r.stabilizer_order == 1,
        ))
    }

    fn exterior_laws(&self) -> Result<Outcome> {
        let (passed, total) = exterior_property_suite(self.config.seed, self.config.property_samples);
        Ok(outcome(
            format!("{total}/{total} samples satisfy Λ(gh) = Λ(g)Λ(h), Λ(−g) = Λ(g), det Λ(g) = det(g)³, β∧(Λ(g)x, Λ(g)y) = det(g)·β∧(x, y)"),
            format!("{passed}/{total} samples (seed {:#x})", self.config.seed),
            passed == total && total > 0,
        ))
    }

    fn shephard_todd(&self) -> Result<Outcome> {
        let ctx = self.ctx;
        let refl = self.w_reflections();
        let all3 = refl.iter().all(|&i| element_order(ctx.w.get(i), 10).ok() == Some(3));
        let degrees = self.w_degrees()?;
        let center = self.center()?.len();
        let tuple = format!(
            "({}, {}, all order 3: {all3}, ({}), {center})",
            ctx.w.order(),
            refl.len(),
            join(&degrees.degrees)
        );
        Ok(outcome(
            format!("({W_ORDER}, {REFLECTION_COUNT}, all order 3: true, ({}), 6)", join(&W_DEGREES)),
            tuple,
            ctx.w.order() == W_ORDER && refl.len() == REFLECTION_COUNT && all3 && degrees.degrees == W_DEGREES && center == 6,
        ))
    }

    fn cyclotomic(&self) -> Result<Outcome> {
        let census = self.census()?;
        // Q(ζ3) = span{1, ζ²}: basis indices 0 and 2 without radicals
        let outside = census
            .iter()
            .filter(|(p, _)| p.iter().any(|c| c.terms().any(|(i, _)| i != 0 && i != 2)))
            .count();
        Ok(Outcome {
            expected: format!("all {} distinct characteristic polynomials over Q(ζ3)", census.len()),
            actual: format!("{outside} of {} have coefficients outside Q(ζ3)", census.len()),
            status: if outside == 0 { Status::Pass } else { Status::Warn },
        })
    }
}

/// Seeded random checks of the exterior-square laws on rational 4×4
/// matrices. Returns `(passed, total)`.
pub fn exterior_property_suite(seed: u64, samples: usize) -> (usize, usize) {
    let f = FieldDescriptor::base();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rat = |rng: &mut ChaCha8Rng| TowerElement::from_rational(f, Rational::new(rng.gen_range(-6..=6), rng.gen_range(1..=3)));
    let mut passed = 0;
    for _ in 0..samples {
        let g = MatrixK::from_fn(4, 4, f, |_, _| rat(&mut rng));
        let h = MatrixK::from_fn(4, 4, f, |_, _| rat(&mut rng));
        let x = Bivector((0..6).map(|_| rat(&mut rng)).collect::<Vec<_>>().try_into().expect("six coordinates"));
        let y = Bivector((0..6).map(|_| rat(&mut rng)).collect::<Vec<_>>().try_into().expect("six coordinates"));
        let (lg, lh) = (exterior_square(&g), exterior_square(&h));
        let Ok(det) = g.det() else { continue };
        let hom = exterior_square(&g.mul(&h)) == lg.mul(&lh);
        let sign = exterior_square(&g.neg()) == lg;
        let det_law = lg.det().map(|d| d == det.pow(3).expect("nonnegative power")).unwrap_or(false);
        let gx = Bivector::from_slice(&lg.mul_vec(x.coords()));
        let gy = Bivector::from_slice(&lg.mul_vec(y.coords()));
        let form = wedge_form(&gx, &gy) == det.mul(&wedge_form(&x, &y));
        if hom && sign && det_law && form {
            passed += 1;
        }
    }
    (passed, samples)
}

/// Run the selected checks in catalogue order; failures become report
/// entries and never stop the run. Errors only for an unknown check name.
pub fn run_battery(ctx: &ConstructionContext, config: &BatteryConfig) -> Result<VerificationReport> {
    let selected = select_checks(config.checks.as_deref())?;
    let battery = Battery::new(ctx, config);
    let mut checks = Vec::with_capacity(selected.len());
    for spec in selected {
        let start = Instant::now();
        let result = battery.run(spec.id);
        let ms = start.elapsed().as_millis() as u64;
        let (expected, actual, status) = match result {
            Ok(o) => (o.expected, o.actual, o.status),
            Err(e) => ("check completes".to_string(), format!("error: {e}"), Status::Fail),
        };
        checks.push(CheckResult { id: spec.id.to_string(), description: spec.description.to_string(), expected, actual, status, ms });
    }
    let overall = if checks.iter().any(|c| c.status == Status::Fail) { Status::Fail } else { Status::Pass };
    Ok(VerificationReport { overall, field: ctx.field().id(), checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_filter_resolves_aliases() {
        let names = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        let sel = select_checks(Some(&names(&["orders", "reflections"]))).unwrap();
        assert_eq!(sel.iter().map(|c| c.id).collect::<Vec<_>>(), ["reflections", "w-orders"]);
        assert!(select_checks(Some(&names(&["nope"]))).is_err());
        assert_eq!(select_checks(None).unwrap().len(), CHECKS.len());
        assert!(select_checks(Some(&[])).unwrap().is_empty());
    }

    #[test]
    fn property_suite_passes_and_is_seeded() {
        assert_eq!(exterior_property_suite(1, 10), (10, 10));
        assert_eq!(exterior_property_suite(DEFAULT_SEED, 5), (5, 5));
    }

    #[test]
    fn ids_are_unique() {
        let mut seen = HashSet::new();
        for c in CHECKS {
            assert!(seen.insert(c.id));
            if let Some(a) = c.alias {
                assert!(seen.insert(a));
            }
        }
    }
}
