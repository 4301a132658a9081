//! Labeled composite spaces.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Opaque subsystem identifier.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Label(pub String);

impl Label {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Label {
    fn from(s: &str) -> Self {
        Label(s.to_string())
    }
}

impl From<String> for Label {
    fn from(s: String) -> Self {
        Label(s)
    }
}

impl From<&String> for Label {
    fn from(s: &String) -> Self {
        Label(s.clone())
    }
}

impl From<&Label> for Label {
    fn from(l: &Label) -> Self {
        l.clone()
    }
}

impl From<usize> for Label {
    fn from(n: usize) -> Self {
        Label(n.to_string())
    }
}

/// Collects anything label-like into a `Vec<Label>`.
pub fn labels<I, L>(it: I) -> Vec<Label>
where
    I: IntoIterator<Item = L>,
    L: Into<Label>,
{
    it.into_iter().map(Into::into).collect()
}

/// Ordered sequence of labeled subsystems. The first label is the most significant
/// digit of the computational-basis index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct CompositeSpace {
    subsystems: Vec<(Label, usize)>,
}

impl CompositeSpace {
    pub fn new<I, L>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (L, usize)>,
        L: Into<Label>,
    {
        let mut subsystems: Vec<(Label, usize)> = Vec::new();
        for (l, d) in pairs {
            let l = l.into();
            if d == 0 {
                return Err(Error::NonPositiveDim(l.0));
            }
            if subsystems.iter().any(|(m, _)| *m == l) {
                return Err(Error::DuplicateLabel(l.0));
            }
            subsystems.push((l, d));
        }
        Ok(CompositeSpace { subsystems })
    }

    /// The zero-subsystem space, isomorphic to the complex numbers.
    pub fn trivial() -> Self {
        CompositeSpace::default()
    }

    pub fn subsystems(&self) -> &[(Label, usize)] {
        &self.subsystems
    }

    pub fn len(&self) -> usize {
        self.subsystems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsystems.is_empty()
    }

    pub fn labels(&self) -> Vec<Label> {
        self.subsystems.iter().map(|(l, _)| l.clone()).collect()
    }

    pub fn label_set(&self) -> BTreeSet<Label> {
        self.subsystems.iter().map(|(l, _)| l.clone()).collect()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.subsystems.iter().map(|(_, d)| *d).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.subsystems.iter().map(|(_, d)| *d).product()
    }

    pub fn position(&self, l: &Label) -> Option<usize> {
        self.subsystems.iter().position(|(m, _)| m == l)
    }

    pub fn contains(&self, l: &Label) -> bool {
        self.position(l).is_some()
    }

    pub fn dim_of(&self, l: &Label) -> Result<usize> {
        self.position(l)
            .map(|p| self.subsystems[p].1)
            .ok_or_else(|| Error::UnknownLabel(l.0.clone()))
    }

    /// Product of the dimensions of `ls`.
    pub fn dim_of_set(&self, ls: &[Label]) -> Result<usize> {
        ls.iter().map(|l| self.dim_of(l)).product()
    }

    /// Positions of `ls`, failing on unknown labels.
    pub fn positions(&self, ls: &[Label]) -> Result<Vec<usize>> {
        ls.iter()
            .map(|l| self.position(l).ok_or_else(|| Error::UnknownLabel(l.0.clone())))
            .collect()
    }

    /// Index stride of every subsystem.
    pub fn strides(&self) -> Vec<usize> {
        let n = self.subsystems.len();
        let mut s = vec![1; n];
        for k in (0..n.saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.subsystems[k + 1].1;
        }
        s
    }

    /// Index offsets obtained by running over all digit combinations of the
    /// subsystems at `positions` (first position most significant), with all
    /// other digits zero.
    pub fn offsets(&self, positions: &[usize]) -> Vec<usize> {
        let strides = self.strides();
        let mut out = vec![0usize];
        for &p in positions {
            let d = self.subsystems[p].1;
            let st = strides[p];
            let mut next = Vec::with_capacity(out.len() * d);
            for &o in &out {
                for k in 0..d {
                    next.push(o + k * st);
                }
            }
            out = next;
        }
        out
    }

    /// Restriction to the labels in `ls`, kept in this space's order.
    pub fn restrict(&self, ls: &[Label]) -> Result<CompositeSpace> {
        for l in ls {
            self.dim_of(l)?;
        }
        Ok(CompositeSpace {
            subsystems: self.subsystems.iter().filter(|(l, _)| ls.contains(l)).cloned().collect(),
        })
    }

    /// Restriction to the labels not in `ls`.
    pub fn without(&self, ls: &[Label]) -> CompositeSpace {
        CompositeSpace {
            subsystems: self.subsystems.iter().filter(|(l, _)| !ls.contains(l)).cloned().collect(),
        }
    }

    /// Concatenation of two spaces with disjoint labels.
    pub fn concat(&self, other: &CompositeSpace) -> Result<CompositeSpace> {
        for (l, _) in &other.subsystems {
            if self.contains(l) {
                return Err(Error::LabelCollision(l.0.clone()));
            }
        }
        let mut subsystems = self.subsystems.clone();
        subsystems.extend(other.subsystems.iter().cloned());
        Ok(CompositeSpace { subsystems })
    }

    /// The same subsystems listed in `order`.
    pub fn reordered(&self, order: &[Label]) -> Result<CompositeSpace> {
        if order.len() != self.len() {
            return Err(Error::NotAPermutation);
        }
        let mut subsystems = Vec::with_capacity(order.len());
        for l in order {
            let p = self.position(l).ok_or(Error::NotAPermutation)?;
            if subsystems.iter().any(|(m, _): &(Label, usize)| m == l) {
                return Err(Error::NotAPermutation);
            }
            subsystems.push(self.subsystems[p].clone());
        }
        Ok(CompositeSpace { subsystems })
    }

    /// True when both spaces hold the same (label, dim) pairs in any order.
    pub fn same_set(&self, other: &CompositeSpace) -> bool {
        self.len() == other.len()
            && self.subsystems.iter().all(|(l, d)| other.dim_of(l).map(|e| e == *d).unwrap_or(false))
    }
}

impl fmt::Display for CompositeSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, (l, d)) in self.subsystems.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{l}:{d}")?;
        }
        write!(f, "]")
    }
}
