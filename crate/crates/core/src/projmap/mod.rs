//! Linear maps on operators: the exact subset algebra and dense supermaps.

mod dense;
mod subset;

pub use dense::DenseSuperMap;
pub use subset::{subset_name, SubsetMap, SubsetMapFile, TermFile};

use std::sync::atomic::{AtomicUsize, Ordering};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::{Operator, DEFAULT_TOL};
use crate::space::CompositeSpace;

/// Default limit on the total dimension of densified maps.
pub const DEFAULT_DENSE_BUDGET: usize = 64;

static DENSE_BUDGET: AtomicUsize = AtomicUsize::new(DEFAULT_DENSE_BUDGET);

/// Budget used when mixed symbolic/dense operations force densification.
pub fn dense_budget() -> usize {
    DENSE_BUDGET.load(Ordering::Relaxed)
}

pub fn set_dense_budget(n: usize) {
    DENSE_BUDGET.store(n, Ordering::Relaxed);
}

/// Structural properties of a map on operators.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Predicates {
    pub is_projector: bool,
    pub is_self_adjoint: bool,
    pub is_unital: bool,
    pub commutes_with_transpose: bool,
    pub is_trace_preserving: bool,
    /// Self-adjoint and unital implies trace preserving.
    pub lemma1_consistent: bool,
}

impl Predicates {
    /// The hypotheses under which the specialised transform theorem applies.
    pub fn is_nice(&self) -> bool {
        self.is_projector && self.is_self_adjoint && self.is_unital && self.commutes_with_transpose
    }
}

/// A linear map on operators in either representation.
#[derive(Clone, Debug)]
pub enum OpMap {
    Symbolic(SubsetMap),
    Dense(DenseSuperMap),
}

impl From<SubsetMap> for OpMap {
    fn from(m: SubsetMap) -> Self {
        OpMap::Symbolic(m)
    }
}

impl From<DenseSuperMap> for OpMap {
    fn from(m: DenseSuperMap) -> Self {
        OpMap::Dense(m)
    }
}

impl OpMap {
    pub fn identity(space: CompositeSpace) -> Self {
        OpMap::Symbolic(SubsetMap::identity(space))
    }

    pub fn in_space(&self) -> &CompositeSpace {
        match self {
            OpMap::Symbolic(m) => m.space(),
            OpMap::Dense(m) => m.in_space(),
        }
    }

    pub fn out_space(&self) -> &CompositeSpace {
        match self {
            OpMap::Symbolic(m) => m.space(),
            OpMap::Dense(m) => m.out_space(),
        }
    }

    pub fn as_symbolic(&self) -> Option<&SubsetMap> {
        match self {
            OpMap::Symbolic(m) => Some(m),
            OpMap::Dense(_) => None,
        }
    }

    pub fn is_symbolic(&self) -> bool {
        matches!(self, OpMap::Symbolic(_))
    }

    pub fn apply(&self, a: &Operator) -> Result<Operator> {
        match self {
            OpMap::Symbolic(m) => m.apply(a),
            OpMap::Dense(m) => m.apply(a),
        }
    }

    /// Applies `P ⊗ 1` to an operator whose space contains the map's space.
    pub fn apply_lifted(&self, a: &Operator) -> Result<Operator> {
        match self {
            OpMap::Symbolic(m) => m.apply_lifted(a),
            OpMap::Dense(m) => m.apply_lifted(a),
        }
    }

    pub fn to_dense(&self, budget: usize) -> Result<DenseSuperMap> {
        match self {
            OpMap::Symbolic(m) => m.to_dense(budget),
            OpMap::Dense(m) => Ok(m.clone()),
        }
    }

    fn densify(&self) -> Result<DenseSuperMap> {
        self.to_dense(dense_budget())
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &OpMap) -> Result<OpMap> {
        match (self, other) {
            (OpMap::Symbolic(p), OpMap::Symbolic(q)) => Ok(OpMap::Symbolic(p.compose(q)?)),
            _ => Ok(OpMap::Dense(self.densify()?.compose(&other.densify()?)?)),
        }
    }

    pub fn tensor_map(&self, other: &OpMap) -> Result<OpMap> {
        match (self, other) {
            (OpMap::Symbolic(p), OpMap::Symbolic(q)) => Ok(OpMap::Symbolic(p.tensor(q)?)),
            _ => Ok(OpMap::Dense(self.densify()?.tensor(&other.densify()?)?)),
        }
    }

    pub fn add(&self, other: &OpMap) -> Result<OpMap> {
        match (self, other) {
            (OpMap::Symbolic(p), OpMap::Symbolic(q)) => Ok(OpMap::Symbolic(p.add(q)?)),
            _ => Ok(OpMap::Dense(self.densify()?.add(&other.densify()?)?)),
        }
    }

    pub fn sub(&self, other: &OpMap) -> Result<OpMap> {
        match (self, other) {
            (OpMap::Symbolic(p), OpMap::Symbolic(q)) => Ok(OpMap::Symbolic(p.sub(q)?)),
            _ => Ok(OpMap::Dense(self.densify()?.sub(&other.densify()?)?)),
        }
    }

    /// Hilbert–Schmidt adjoint.
    pub fn adjoint(&self) -> OpMap {
        match self {
            OpMap::Symbolic(m) => OpMap::Symbolic(m.clone()),
            OpMap::Dense(m) => OpMap::Dense(m.adjoint()),
        }
    }

    /// `P^τ[A] = P†[A*]*`.
    pub fn tau_twirl(&self) -> OpMap {
        match self {
            OpMap::Symbolic(m) => OpMap::Symbolic(m.clone()),
            OpMap::Dense(m) => OpMap::Dense(m.tau_twirl()),
        }
    }

    pub fn predicates(&self) -> Result<Predicates> {
        self.predicates_tol(DEFAULT_TOL)
    }

    /// Exact for symbolic maps, numeric at `tol` for dense ones.
    pub fn predicates_tol(&self, tol: f64) -> Result<Predicates> {
        match self {
            OpMap::Symbolic(m) => Ok(m.predicates()),
            OpMap::Dense(m) => m.predicates(tol),
        }
    }

    /// Orthonormal basis of the image; Hermitian when the map preserves Hermiticity.
    pub fn image_basis(&self, budget: usize) -> Result<Vec<Operator>> {
        self.to_dense(budget)?.image_basis(DEFAULT_TOL)
    }

    /// Entrywise comparison after densification.
    pub fn approx_eq(&self, other: &OpMap, tol: f64) -> Result<bool> {
        if let (OpMap::Symbolic(p), OpMap::Symbolic(q)) = (self, other) {
            return Ok(p == q);
        }
        let a = self.densify()?;
        let b = other.densify()?;
        if !a.in_space().same_set(b.in_space()) {
            return Err(Error::SpaceMismatch(format!("{} vs {}", a.in_space(), b.in_space())));
        }
        Ok(a.max_deviation(&b)? <= tol)
    }
}
