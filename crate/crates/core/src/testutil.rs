use crate::operator::Operator;
use crate::projmap::{DenseSuperMap, SubsetMap};
use crate::space::{labels, CompositeSpace, Label};

pub fn sp(pairs: &[(&str, usize)]) -> CompositeSpace {
    CompositeSpace::new(pairs.iter().map(|(l, d)| (*l, *d))).unwrap()
}

pub fn qubits(ls: &[&str]) -> CompositeSpace {
    CompositeSpace::new(ls.iter().map(|l| (*l, 2))).unwrap()
}

pub fn ls(xs: &[&str]) -> Vec<Label> {
    labels(xs.iter().copied())
}

pub fn subset_map(space: CompositeSpace, terms: &[(&[&str], i64)]) -> SubsetMap {
    SubsetMap::from_int_terms(space, terms).unwrap()
}

/// `M ↦ ⟨m|M|n⟩ |m⟩⟨n|`.
pub fn off_diagonal(space: CompositeSpace, m: usize, n: usize) -> DenseSuperMap {
    DenseSuperMap::from_map(space.clone(), space.clone(), |x| {
        Ok(Operator::unit(space.clone(), m, n).scale(x.matrix()[(m, n)]))
    })
    .unwrap()
}
