//! Enumerated finite matrix groups.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::hash::Hash;

use indexmap::IndexSet;
use rayon::prelude::*;
use rustc_hash::FxBuildHasher;

use crate::error::{Error, Result};
use crate::field::TowerElement;
use crate::matrix::{IntMatrix, MatrixK};

/// What the group algorithms need from a matrix type.
pub trait GroupElement: Clone + Eq + Hash + Send + Sync + Debug {
    type Scalar: Clone + PartialEq + Debug + Send + Sync;

    fn compose(&self, rhs: &Self) -> Self;
    fn identity_like(&self) -> Self;
    fn is_identity(&self) -> bool;
    fn commutes_with(&self, rhs: &Self) -> bool;
    fn determinant(&self) -> Result<Self::Scalar>;
    fn canonical_key(&self) -> Vec<u8>;
}

impl GroupElement for IntMatrix {
    type Scalar = i64;

    fn compose(&self, rhs: &Self) -> Self {
        self.mul(rhs)
    }
    fn identity_like(&self) -> Self {
        IntMatrix::identity(self.dim())
    }
    fn is_identity(&self) -> bool {
        IntMatrix::is_identity(self)
    }
    fn commutes_with(&self, rhs: &Self) -> bool {
        IntMatrix::commutes_with(self, rhs)
    }
    fn determinant(&self) -> Result<i64> {
        Ok(self.det())
    }
    fn canonical_key(&self) -> Vec<u8> {
        IntMatrix::canonical_key(self)
    }
}

impl GroupElement for MatrixK {
    type Scalar = TowerElement;

    fn compose(&self, rhs: &Self) -> Self {
        self.mul(rhs)
    }
    fn identity_like(&self) -> Self {
        MatrixK::identity(self.rows(), self.field())
    }
    fn is_identity(&self) -> bool {
        MatrixK::is_identity(self)
    }
    fn commutes_with(&self, rhs: &Self) -> bool {
        MatrixK::commutes_with(self, rhs)
    }
    fn determinant(&self) -> Result<TowerElement> {
        self.det()
    }
    fn canonical_key(&self) -> Vec<u8> {
        MatrixK::canonical_key(self)
    }
}

/// Order of a finite-order element by repeated multiplication.
pub fn element_order<E: GroupElement>(g: &E, limit: usize) -> Result<usize> {
    let mut x = g.clone();
    for k in 1..=limit {
        if x.is_identity() {
            return Ok(k);
        }
        x = x.compose(g);
    }
    Err(Error::Domain(format!("element order exceeds {limit}")))
}

/// Inverse of a finite-order element as `g^(ord−1)`.
pub fn finite_inverse<E: GroupElement>(g: &E) -> Result<E> {
    let mut prev = g.identity_like();
    let mut x = g.clone();
    for _ in 0..10_000 {
        if x.is_identity() {
            return Ok(prev);
        }
        prev = x.clone();
        x = x.compose(g);
    }
    Err(Error::Domain("element does not have finite order".into()))
}

/// How element `i > 0` was discovered: `elements[parent] · generators[gen]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Discovery {
    pub parent: u32,
    pub generator: u32,
}

const FRONTIER_CHUNK: usize = 4096;

/// A finite group stored as its full element list in discovery order. The
/// identity sits at position 0.
#[derive(Clone, Debug)]
pub struct FiniteMatrixGroup<E: GroupElement> {
    elements: IndexSet<E, FxBuildHasher>,
    generators: Vec<E>,
    discovery: Vec<Discovery>,
}

impl<E: GroupElement> FiniteMatrixGroup<E> {
    /// Breadth-first closure of `generators` under right multiplication.
    /// Fails with [`Error::RunawayClosure`] past `order_bound` elements.
    pub fn closure(identity: E, generators: &[E], order_bound: usize) -> Result<Self> {
        if !identity.is_identity() {
            return Err(Error::Domain("closure seed is not the identity".into()));
        }
        let mut group = FiniteMatrixGroup {
            elements: IndexSet::with_hasher(FxBuildHasher),
            generators: Vec::new(),
            discovery: vec![Discovery { parent: 0, generator: 0 }],
        };
        group.elements.insert(identity);
        group.extend_with(generators, order_bound)?;
        Ok(group)
    }

    /// The closure of the current generators plus `new`, reusing the
    /// elements already found (old elements only need the new generators).
    pub fn extend_with(&mut self, new: &[E], order_bound: usize) -> Result<()> {
        let first_new_gen = self.generators.len();
        self.generators.extend(new.iter().cloned());
        let old_count = self.elements.len();
        self.bfs_level(0..old_count, first_new_gen, order_bound)?;
        let mut start = old_count;
        while start < self.elements.len() {
            let end = self.elements.len();
            self.bfs_level(start..end, 0, order_bound)?;
            start = end;
        }
        Ok(())
    }

    fn bfs_level(
        &mut self,
        range: std::ops::Range<usize>,
        first_gen: usize,
        order_bound: usize,
    ) -> Result<()> {
        let ngen = self.generators.len() - first_gen;
        if ngen == 0 {
            return Ok(());
        }
        let mut i = range.start;
        while i < range.end {
            let hi = (i + FRONTIER_CHUNK).min(range.end);
            let products: Vec<E> = {
                let elems = &self.elements;
                let gens = &self.generators[first_gen..];
                (i..hi)
                    .into_par_iter()
                    .flat_map_iter(|e| {
                        let x = &elems[e];
                        gens.iter().map(move |s| x.compose(s))
                    })
                    .collect()
            };
            for (k, p) in products.into_iter().enumerate() {
                let (_, inserted) = self.elements.insert_full(p);
                if inserted {
                    self.discovery.push(Discovery {
                        parent: (i + k / ngen) as u32,
                        generator: (first_gen + k % ngen) as u32,
                    });
                    if self.elements.len() > order_bound {
                        return Err(Error::RunawayClosure { bound: order_bound });
                    }
                }
            }
            i = hi;
        }
        Ok(())
    }

    /// Rebuild from a stored element list, checking that every element is
    /// its recorded parent times its recorded generator and that keys are
    /// distinct.
    pub fn from_parts(elements: Vec<E>, generators: Vec<E>, discovery: Vec<Discovery>) -> Result<Self> {
        if elements.is_empty() || !elements[0].is_identity() {
            return Err(Error::Cache("group does not start with the identity".into()));
        }
        if discovery.len() != elements.len() {
            return Err(Error::Cache("discovery record length mismatch".into()));
        }
        let ok = (1..elements.len()).into_par_iter().all(|i| {
            let d = discovery[i];
            (d.parent as usize) < i
                && (d.generator as usize) < generators.len()
                && elements[d.parent as usize].compose(&generators[d.generator as usize]) == elements[i]
        });
        if !ok {
            return Err(Error::Cache("discovery record does not reproduce the elements".into()));
        }
        let n = elements.len();
        let set: IndexSet<E, FxBuildHasher> = elements.into_iter().collect();
        if set.len() != n {
            return Err(Error::Cache("duplicate group elements".into()));
        }
        Ok(FiniteMatrixGroup { elements: set, generators, discovery })
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn generators(&self) -> &[E] {
        &self.generators
    }

    pub fn discovery(&self) -> &[Discovery] {
        &self.discovery
    }

    pub fn elements(&self) -> impl ExactSizeIterator<Item = &E> + '_ {
        self.elements.iter()
    }

    pub fn element_slice(&self) -> &indexmap::set::Slice<E> {
        self.elements.as_slice()
    }

    pub fn get(&self, i: usize) -> &E {
        &self.elements[i]
    }

    pub fn identity(&self) -> &E {
        &self.elements[0]
    }

    pub fn index_of(&self, g: &E) -> Option<usize> {
        self.elements.get_index_of(g)
    }

    pub fn contains(&self, g: &E) -> bool {
        self.elements.contains(g)
    }

    fn require(&self, g: &E) -> Result<usize> {
        self.index_of(g).ok_or_else(|| Error::Domain("element is not in the group".into()))
    }

    /// Inverse of the element at position `i`, looked up in the group.
    pub fn inverse_index(&self, i: usize) -> Result<usize> {
        self.require(&finite_inverse(self.get(i))?)
    }

    /// The subgroup of elements satisfying `keep`. Generators are picked
    /// greedily in discovery order and the closure of those generators must
    /// coincide with the filtered set.
    pub fn subgroup_where(&self, keep: impl Fn(&E) -> bool + Sync) -> Result<Self> {
        let selected: Vec<usize> = (0..self.order()).into_par_iter().filter(|&i| keep(self.get(i))).collect();
        let bound = selected.len();
        let sub = greedy_closure(self.identity().clone(), selected.iter().map(|&i| self.get(i).clone()), Some(bound), bound)
            .map_err(|e| match e {
                Error::RunawayClosure { .. } => {
                    Error::Construction("filtered subset is not closed under multiplication".into())
                }
                other => other,
            })?;
        if sub.order() != bound {
            return Err(Error::Construction("filtered subset is not a subgroup".into()));
        }
        Ok(sub)
    }

    /// Elements whose determinant lies in `allowed`.
    pub fn subgroup_by_det(&self, allowed: &[E::Scalar]) -> Result<Self> {
        let dets: Vec<E::Scalar> = (0..self.order())
            .into_par_iter()
            .map(|i| self.get(i).determinant())
            .collect::<Result<_>>()?;
        let keep: Vec<bool> = dets.iter().map(|d| allowed.contains(d)).collect();
        let sub = self.subgroup_where(|g| keep[self.index_of(g).unwrap()])?;
        Ok(sub)
    }

    pub fn centralizer(&self, g: &E) -> Result<Self> {
        self.require(g)?;
        self.subgroup_where(|x| x.commutes_with(g))
    }

    /// Elements commuting with every generator.
    pub fn center(&self) -> Result<Self> {
        self.subgroup_where(|x| self.generators.iter().all(|s| x.commutes_with(s)))
    }

    /// Conjugacy classes as orbits under conjugation by the generators.
    pub fn conjugacy_classes(&self) -> Result<ConjClassTable> {
        let gen_pairs: Vec<(E, E)> = self
            .generators
            .iter()
            .map(|s| Ok((s.clone(), finite_inverse(s)?)))
            .collect::<Result<_>>()?;
        let n = self.order();
        let mut class_of = vec![u32::MAX; n];
        let mut representatives = Vec::new();
        let mut sizes = Vec::new();
        for start in 0..n {
            if class_of[start] != u32::MAX {
                continue;
            }
            let id = representatives.len() as u32;
            representatives.push(start);
            class_of[start] = id;
            let mut orbit = vec![start];
            let mut k = 0;
            while k < orbit.len() {
                let x = self.get(orbit[k]).clone();
                let images: Vec<E> = gen_pairs.par_iter().map(|(s, si)| si.compose(&x).compose(s)).collect();
                for y in images {
                    let yi = self.require(&y)?;
                    if class_of[yi] == u32::MAX {
                        class_of[yi] = id;
                        orbit.push(yi);
                    }
                }
                k += 1;
            }
            sizes.push(orbit.len());
        }
        Ok(ConjClassTable { representatives, sizes, class_of })
    }

    /// Is there `x` with `x·g = h·x`? Full scan.
    pub fn are_conjugate(&self, g: &E, h: &E) -> Result<bool> {
        self.require(g)?;
        self.require(h)?;
        Ok((0..self.order()).into_par_iter().any(|i| {
            let x = self.get(i);
            x.compose(g) == h.compose(x)
        }))
    }

    /// Number of elements of each order.
    pub fn order_spectrum(&self) -> Result<BTreeMap<usize, usize>> {
        let orders: Vec<usize> =
            (0..self.order()).into_par_iter().map(|i| element_order(self.get(i), 1000)).collect::<Result<_>>()?;
        let mut spec = BTreeMap::new();
        for o in orders {
            *spec.entry(o).or_insert(0) += 1;
        }
        Ok(spec)
    }

    /// The subgroup generated by the conjugacy class of `g` (conjugates are
    /// added greedily while they are not yet contained).
    pub fn normal_closure(&self, g: &E, table: Option<&ConjClassTable>) -> Result<Self> {
        let gi = self.require(g)?;
        let owned;
        let table = match table {
            Some(t) => t,
            None => {
                owned = self.conjugacy_classes()?;
                &owned
            }
        };
        let class = table.class_of[gi];
        let members = (0..self.order()).filter(|&i| table.class_of[i] == class).map(|i| self.get(i).clone());
        greedy_closure(self.identity().clone(), members, Some(self.order()), self.order())
    }

    /// True iff every nontrivial conjugacy class generates the whole group
    /// as a normal subgroup (i.e. the group is simple), for a nontrivial
    /// group.
    pub fn simplicity_certificate(&self, table: &ConjClassTable) -> Result<bool> {
        if self.order() == 1 {
            return Ok(false);
        }
        for &rep in &table.representatives {
            let g = self.get(rep);
            if g.is_identity() {
                continue;
            }
            if self.normal_closure(g, Some(table))?.order() != self.order() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Grow a group by taking candidates in order and keeping each one not
/// already contained; stops early once `target` elements are reached.
pub fn greedy_closure<E: GroupElement>(
    identity: E,
    candidates: impl IntoIterator<Item = E>,
    target: Option<usize>,
    order_bound: usize,
) -> Result<FiniteMatrixGroup<E>> {
    let mut group = FiniteMatrixGroup::closure(identity, &[], order_bound)?;
    for c in candidates {
        if Some(group.order()) == target {
            break;
        }
        if group.contains(&c) {
            continue;
        }
        group.extend_with(&[c], order_bound)?;
    }
    Ok(group)
}

/// Conjugacy classes of an enumerated group, indexed by element position.
#[derive(Clone, Debug)]
pub struct ConjClassTable {
    pub representatives: Vec<usize>,
    pub sizes: Vec<usize>,
    pub class_of: Vec<u32>,
}

impl ConjClassTable {
    pub fn num_classes(&self) -> usize {
        self.representatives.len()
    }

    pub fn same_class(&self, a: usize, b: usize) -> bool {
        self.class_of[a] == self.class_of[b]
    }

    pub fn class_size_of(&self, i: usize) -> usize {
        self.sizes[self.class_of[i] as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldDescriptor;

    fn perm_matrix(p: &[usize]) -> IntMatrix {
        let n = p.len();
        let mut d = vec![0; n * n];
        for (i, &j) in p.iter().enumerate() {
            d[j * n + i] = 1;
        }
        IntMatrix::new(n, d)
    }

    fn s4() -> FiniteMatrixGroup<IntMatrix> {
        let gens = [perm_matrix(&[1, 0, 2, 3]), perm_matrix(&[1, 2, 3, 0])];
        FiniteMatrixGroup::closure(IntMatrix::identity(4), &gens, 100).unwrap()
    }

    #[test]
    fn trivial_closure() {
        let g = FiniteMatrixGroup::closure(IntMatrix::identity(3), &[IntMatrix::identity(3)], 10).unwrap();
        assert_eq!(g.order(), 1);
    }

    #[test]
    fn symmetric_group_data() {
        let g = s4();
        assert_eq!(g.order(), 24);
        let a4 = g.subgroup_by_det(&[1]).unwrap();
        assert_eq!(a4.order(), 12);
        assert_eq!(g.subgroup_by_det(&[1, -1]).unwrap().order(), 24);
        let t = g.conjugacy_classes().unwrap();
        let mut sizes = t.sizes.clone();
        sizes.sort();
        assert_eq!(sizes, vec![1, 3, 6, 6, 8]);
        for (&rep, &size) in t.representatives.iter().zip(&t.sizes) {
            assert_eq!(size * g.centralizer(g.get(rep)).unwrap().order(), 24);
        }
        assert_eq!(g.center().unwrap().order(), 1);
        let spec = g.order_spectrum().unwrap();
        assert_eq!(spec, BTreeMap::from([(1, 1), (2, 9), (3, 8), (4, 6)]));
        // a 3-cycle generates A4 as a normal subgroup; S4 is not simple
        let c3 = perm_matrix(&[1, 2, 0, 3]);
        assert_eq!(g.normal_closure(&c3, Some(&t)).unwrap().order(), 12);
        assert!(!g.simplicity_certificate(&t).unwrap());
        assert!(g.are_conjugate(&c3, &c3.pow(2)).unwrap());
        assert!(!a4.are_conjugate(&c3, &c3.pow(2)).unwrap());
    }

    #[test]
    fn runaway_closure_is_reported() {
        let g = [perm_matrix(&[1, 2, 3, 0])];
        assert!(matches!(
            FiniteMatrixGroup::closure(IntMatrix::identity(4), &g, 3),
            Err(Error::RunawayClosure { bound: 3 })
        ));
    }

    #[test]
    fn scalar_cyclic_group_is_not_simple() {
        let f = FieldDescriptor::base();
        let i = MatrixK::scalar(2, &TowerElement::zeta_pow(f, 3));
        let g = FiniteMatrixGroup::closure(MatrixK::identity(2, f), &[i], 10).unwrap();
        assert_eq!(g.order(), 4);
        let t = g.conjugacy_classes().unwrap();
        assert!(!g.simplicity_certificate(&t).unwrap());
        assert_eq!(g.center().unwrap().order(), 4);
    }

    #[test]
    fn from_parts_round_trip_and_tamper() {
        let g = s4();
        let elems: Vec<IntMatrix> = g.elements().cloned().collect();
        let back = FiniteMatrixGroup::from_parts(elems.clone(), g.generators().to_vec(), g.discovery().to_vec()).unwrap();
        assert_eq!(back.order(), 24);
        let mut bad = elems;
        bad.swap(3, 4);
        assert!(FiniteMatrixGroup::from_parts(bad, g.generators().to_vec(), g.discovery().to_vec()).is_err());
    }

    #[test]
    fn membership_and_products() {
        let g = s4();
        for i in 0..g.order() {
            let inv = g.inverse_index(i).unwrap();
            assert!(g.get(i).compose(g.get(inv)).is_identity());
            assert!(g.contains(&g.get(i).compose(g.get((i * 7) % 24))));
        }
        let outside = IntMatrix::new(4, vec![2, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1]);
        assert!(g.are_conjugate(&outside, g.identity()).is_err());
    }
}
