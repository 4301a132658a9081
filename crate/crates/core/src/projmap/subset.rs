use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::{DenseSuperMap, Predicates};
use crate::error::{Error, Result};
use crate::operator::Operator;
use crate::par::Exec;
use crate::rational::{q_fmt, q_frac, q_parts, q_to_f64, Q};
use crate::space::{CompositeSpace, Label};

/// `Σ_S c_S · _S` with exact rational coefficients. Subsets are bitmasks over
/// the positions of `space`; bits of dimension-one labels are always cleared.
#[derive(Clone, Debug)]
pub struct SubsetMap {
    space: CompositeSpace,
    coeffs: BTreeMap<u64, Q>,
}

impl SubsetMap {
    pub fn zero(space: CompositeSpace) -> Self {
        assert!(space.len() <= 64, "subset maps support at most 64 labels");
        SubsetMap { space, coeffs: BTreeMap::new() }
    }

    pub fn identity(space: CompositeSpace) -> Self {
        let mut m = SubsetMap::zero(space);
        m.coeffs.insert(0, Q::one());
        m
    }

    /// The single term `_S`.
    pub fn trace_replace(space: CompositeSpace, subset: &[Label]) -> Result<Self> {
        let mut m = SubsetMap::zero(space);
        m.add_term(subset, Q::one())?;
        Ok(m)
    }

    pub fn from_terms<'a, I>(space: CompositeSpace, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a [Label], Q)>,
    {
        let mut m = SubsetMap::zero(space);
        for (s, c) in terms {
            m.add_term(s, c)?;
        }
        Ok(m)
    }

    /// Builds a map from terms written with integer coefficients.
    pub fn from_int_terms(space: CompositeSpace, terms: &[(&[&str], i64)]) -> Result<Self> {
        let mut m = SubsetMap::zero(space);
        for (s, c) in terms {
            let ls: Vec<Label> = s.iter().map(|l| Label::from(*l)).collect();
            m.add_term(&ls, q_frac(*c, 1))?;
        }
        Ok(m)
    }

    pub fn space(&self) -> &CompositeSpace {
        &self.space
    }

    fn trivial_mask(&self) -> u64 {
        self.space
            .dims()
            .iter()
            .enumerate()
            .filter(|(_, d)| **d > 1)
            .fold(0u64, |m, (p, _)| m | (1u64 << p))
    }

    fn mask_of(&self, subset: &[Label]) -> Result<u64> {
        let mut m = 0u64;
        for p in self.space.positions(subset)? {
            m |= 1u64 << p;
        }
        Ok(m & self.trivial_mask())
    }

    fn labels_of(&self, mask: u64) -> Vec<Label> {
        self.space
            .subsystems()
            .iter()
            .enumerate()
            .filter(|(p, _)| mask >> p & 1 == 1)
            .map(|(_, (l, _))| l.clone())
            .collect()
    }

    fn insert(&mut self, mask: u64, c: Q) {
        let mask = mask & self.trivial_mask();
        let e = self.coeffs.entry(mask).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            self.coeffs.remove(&mask);
        }
    }

    pub fn add_term(&mut self, subset: &[Label], c: Q) -> Result<()> {
        let m = self.mask_of(subset)?;
        self.insert(m, c);
        Ok(())
    }

    /// Coefficient of `_S` (zero when absent).
    pub fn coefficient(&self, subset: &[Label]) -> Result<Q> {
        let m = self.mask_of(subset)?;
        Ok(self.coeffs.get(&m).cloned().unwrap_or_else(Q::zero))
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Terms ordered by subset size, then by label position.
    pub fn terms(&self) -> Vec<(Vec<Label>, Q)> {
        let mut v: Vec<(Vec<Label>, Q)> = self.coeffs.iter().map(|(m, c)| (self.labels_of(*m), c.clone())).collect();
        v.sort_by(|(a, _), (b, _)| a.len().cmp(&b.len()).then_with(|| colex_key(a).cmp(&colex_key(b))));
        v
    }

    /// Label-order independent form used for equality.
    pub fn canonical(&self) -> BTreeMap<BTreeSet<Label>, Q> {
        self.coeffs
            .iter()
            .map(|(m, c)| (self.labels_of(*m).into_iter().collect(), c.clone()))
            .collect()
    }

    pub fn coefficient_sum(&self) -> Q {
        self.coeffs.values().fold(Q::zero(), |a, c| a + c)
    }

    /// Same terms on a space given in another label order.
    pub fn reindexed(&self, target: &CompositeSpace) -> Result<SubsetMap> {
        if !self.space.same_set(target) {
            return Err(Error::SpaceMismatch(format!("{} vs {}", self.space, target)));
        }
        let mut out = SubsetMap::zero(target.clone());
        for (m, c) in &self.coeffs {
            let mm = out.mask_of(&self.labels_of(*m))?;
            out.insert(mm, c.clone());
        }
        Ok(out)
    }

    /// Same terms on a larger space (the map tensored with the identity on `extra`).
    pub fn extend(&self, extra: &CompositeSpace) -> Result<SubsetMap> {
        let space = self.space.concat(extra)?;
        let mut out = SubsetMap::zero(space);
        for (m, c) in &self.coeffs {
            out.insert(*m, c.clone());
        }
        Ok(out)
    }

    /// Embeds into a superset space given in any order.
    pub fn lift_to(&self, target: &CompositeSpace) -> Result<SubsetMap> {
        for (l, d) in self.space.subsystems() {
            if target.dim_of(l)? != *d {
                return Err(Error::SpaceMismatch(format!("label {l} has different dimension")));
            }
        }
        let mut out = SubsetMap::zero(target.clone());
        for (m, c) in &self.coeffs {
            let mm = out.mask_of(&self.labels_of(*m))?;
            out.insert(mm, c.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, s: &Q) -> SubsetMap {
        let mut out = SubsetMap::zero(self.space.clone());
        for (m, c) in &self.coeffs {
            out.insert(*m, c * s);
        }
        out
    }

    pub fn add(&self, other: &SubsetMap) -> Result<SubsetMap> {
        let o = other.reindexed(&self.space)?;
        let mut out = self.clone();
        for (m, c) in o.coeffs {
            out.insert(m, c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &SubsetMap) -> Result<SubsetMap> {
        self.add(&other.scale(&-Q::one()))
    }

    /// `self ∘ other` via `_A ∘ _B = _{A∪B}`.
    pub fn compose(&self, other: &SubsetMap) -> Result<SubsetMap> {
        let o = other.reindexed(&self.space)?;
        let mut out = SubsetMap::zero(self.space.clone());
        for (a, ca) in &self.coeffs {
            for (b, cb) in &o.coeffs {
                out.insert(a | b, ca * cb);
            }
        }
        Ok(out)
    }

    /// `self ⊗ other` on the concatenated space.
    pub fn tensor(&self, other: &SubsetMap) -> Result<SubsetMap> {
        let space = self.space.concat(&other.space)?;
        let shift = self.space.len();
        let mut out = SubsetMap::zero(space);
        for (a, ca) in &self.coeffs {
            for (b, cb) in &other.coeffs {
                out.insert(a | (b << shift), ca * cb);
            }
        }
        Ok(out)
    }

    fn apply_masked(&self, a: &Operator) -> Result<Operator> {
        let mut acc = Operator::zeros(a.space().clone());
        for (m, c) in &self.coeffs {
            let t = a.trace_and_replace(&self.labels_of(*m))?;
            acc = acc.add(&t.scale_re(q_to_f64(c)))?;
        }
        Ok(acc)
    }

    pub fn apply(&self, a: &Operator) -> Result<Operator> {
        if !a.space().same_set(&self.space) {
            return Err(Error::SpaceMismatch(format!("map on {} applied to {}", self.space, a.space())));
        }
        self.apply_masked(a)
    }

    /// Applies the map tensored with the identity on the labels of `a` outside the map's space.
    pub fn apply_lifted(&self, a: &Operator) -> Result<Operator> {
        for (l, d) in self.space.subsystems() {
            if a.space().dim_of(l).map_err(|_| Error::SpaceMismatch(format!("label {l} missing")))? != *d {
                return Err(Error::SpaceMismatch(format!("label {l} has different dimension")));
            }
        }
        self.apply_masked(a)
    }

    /// Exact predicates: every `_S` is self-adjoint and commutes with transposition.
    pub fn predicates(&self) -> Predicates {
        let is_projector = self.compose(self).map(|p| p == *self).unwrap_or(false);
        let unital = self.coefficient_sum() == Q::one();
        Predicates {
            is_projector,
            is_self_adjoint: true,
            is_unital: unital,
            commutes_with_transpose: true,
            is_trace_preserving: unital,
            lemma1_consistent: true,
        }
    }

    pub fn to_dense(&self, budget: usize) -> Result<DenseSuperMap> {
        self.to_dense_exec(budget, Exec::default())
    }

    pub fn to_dense_exec(&self, budget: usize, exec: Exec) -> Result<DenseSuperMap> {
        let d = self.space.total_dim();
        if d > budget {
            return Err(Error::BudgetExceeded { needed: d, budget });
        }
        DenseSuperMap::from_map_exec(self.space.clone(), self.space.clone(), exec, |a| self.apply_masked(a))
    }

    pub fn to_file(&self) -> Result<SubsetMapFile> {
        let terms = self
            .terms()
            .into_iter()
            .map(|(s, c)| {
                let (num, den) = q_parts(&c).ok_or_else(|| Error::BadDims("coefficient exceeds 64 bits".into()))?;
                Ok(TermFile { subset: s.into_iter().map(|l| l.0).collect(), num, den })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SubsetMapFile {
            labels: self.space.subsystems().iter().map(|(l, d)| (l.0.clone(), *d)).collect(),
            terms,
        })
    }

    pub fn from_file(f: &SubsetMapFile) -> Result<SubsetMap> {
        let space = CompositeSpace::new(f.labels.iter().map(|(l, d)| (l.as_str(), *d)))?;
        let mut m = SubsetMap::zero(space);
        for t in &f.terms {
            if t.den == 0 {
                return Err(Error::BadDims("zero denominator".into()));
            }
            let ls: Vec<Label> = t.subset.iter().map(Label::from).collect();
            m.add_term(&ls, q_frac(t.num, t.den))?;
        }
        Ok(m)
    }
}

impl PartialEq for SubsetMap {
    fn eq(&self, other: &Self) -> bool {
        self.space.same_set(&other.space) && self.canonical() == other.canonical()
    }
}

impl fmt::Display for SubsetMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.terms();
        if terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (s, c)) in terms.iter().enumerate() {
            let neg = *c < Q::zero();
            let mag = if neg { -c.clone() } else { c.clone() };
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            let name = subset_name(s);
            if mag.is_one() {
                write!(f, "{name}")?;
            } else {
                write!(f, "{}*{name}", q_fmt(&mag))?;
            }
        }
        Ok(())
    }
}

fn label_key(l: &Label) -> (u8, u64, &str) {
    match l.0.parse::<u64>() {
        Ok(n) => (0, n, ""),
        Err(_) => (1, 0, l.0.as_str()),
    }
}

/// Natural label order, largest first, so equal-size subsets compare colexicographically.
fn colex_key(ls: &[Label]) -> Vec<(u8, u64, &str)> {
    let mut k: Vec<_> = ls.iter().map(label_key).collect();
    k.sort_unstable_by(|a, b| b.cmp(a));
    k
}

/// `_1234`-style name of a trace-and-replace term, labels in natural order.
/// Multi-character labels are comma separated; the empty subset is `id`.
pub fn subset_name(ls: &[Label]) -> String {
    if ls.is_empty() {
        return "id".into();
    }
    let mut v: Vec<&Label> = ls.iter().collect();
    v.sort_by(|a, b| label_key(a).cmp(&label_key(b)));
    let sep = if v.iter().all(|l| l.0.chars().count() == 1) { "" } else { "," };
    format!("_{}", v.iter().map(|l| l.0.as_str()).collect::<Vec<_>>().join(sep))
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TermFile {
    pub subset: Vec<String>,
    pub num: i64,
    pub den: i64,
}

/// JSON form of a [`SubsetMap`].
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SubsetMapFile {
    pub labels: Vec<(String, usize)>,
    pub terms: Vec<TermFile>,
}
