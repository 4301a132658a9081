//! Dense operators on labeled composite spaces.

use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{CompositeSpace, Label};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

pub const DEFAULT_TOL: f64 = 1e-9;

/// A square complex matrix whose rows and columns are indexed by the
/// computational basis of `space`.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    space: CompositeSpace,
    mat: CMat,
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

impl Operator {
    pub fn new(space: CompositeSpace, mat: CMat) -> Result<Self> {
        let d = space.total_dim();
        if mat.nrows() != d || mat.ncols() != d {
            return Err(Error::InvalidMatrix(format!(
                "expected {d}x{d}, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidMatrix("non-finite entry".into()));
        }
        Ok(Operator { space, mat })
    }

    pub(crate) fn from_parts(space: CompositeSpace, mat: CMat) -> Self {
        debug_assert_eq!(mat.nrows(), space.total_dim());
        Operator { space, mat }
    }

    pub fn from_fn(space: CompositeSpace, f: impl FnMut(usize, usize) -> C64) -> Self {
        let d = space.total_dim();
        Operator { space, mat: CMat::from_fn(d, d, f) }
    }

    pub fn zeros(space: CompositeSpace) -> Self {
        let d = space.total_dim();
        Operator { space, mat: CMat::zeros(d, d) }
    }

    pub fn identity(space: CompositeSpace) -> Self {
        let d = space.total_dim();
        Operator { space, mat: CMat::identity(d, d) }
    }

    /// Maximally mixed state `1/d`.
    pub fn maximally_mixed(space: CompositeSpace) -> Self {
        let d = space.total_dim();
        Operator { space, mat: CMat::identity(d, d).unscale(d as f64) }
    }

    /// Matrix unit `|j⟩⟨k|`.
    pub fn unit(space: CompositeSpace, j: usize, k: usize) -> Self {
        let mut op = Operator::zeros(space);
        op.mat[(j, k)] = c(1.0);
        op
    }

    /// Projector onto a computational basis state given by one digit per subsystem.
    pub fn basis_projector(space: CompositeSpace, digits: &[usize]) -> Self {
        let strides = space.strides();
        let j: usize = digits.iter().zip(&strides).map(|(a, b)| a * b).sum();
        Operator::unit(space, j, j)
    }

    /// Unnormalized maximally entangled operator `Σ_jk |jj⟩⟨kk|` on `a ⊗ b` (equal dims).
    pub fn max_entangled(space: CompositeSpace) -> Result<Self> {
        let dims = space.dims();
        if dims.len() != 2 || dims[0] != dims[1] {
            return Err(Error::BadDims("maximally entangled operator needs two equal subsystems".into()));
        }
        let d = dims[0];
        let mut op = Operator::zeros(space);
        for j in 0..d {
            for k in 0..d {
                op.mat[(j * d + j, k * d + k)] = c(1.0);
            }
        }
        Ok(op)
    }

    pub fn space(&self) -> &CompositeSpace {
        &self.space
    }

    pub fn labels(&self) -> Vec<Label> {
        self.space.labels()
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    pub fn dagger(&self) -> Self {
        Operator { space: self.space.clone(), mat: self.mat.adjoint() }
    }

    pub fn conj(&self) -> Self {
        Operator { space: self.space.clone(), mat: self.mat.map(|z| z.conj()) }
    }

    pub fn transpose(&self) -> Self {
        Operator { space: self.space.clone(), mat: self.mat.transpose() }
    }

    pub fn scale(&self, s: C64) -> Self {
        Operator { space: self.space.clone(), mat: &self.mat * s }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(c(s))
    }

    /// Hermitian part `(A + A†)/2`.
    pub fn hermitian_part(&self) -> Self {
        Operator { space: self.space.clone(), mat: (&self.mat + self.mat.adjoint()).unscale(2.0) }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.mat.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (&self.mat - self.mat.adjoint()).iter().all(|z| z.norm() <= tol)
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> f64 {
        if self.dim() == 0 {
            return 0.0;
        }
        self.mat.clone().singular_values().iter().cloned().fold(0.0, f64::max)
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.hermitian_part().mat.symmetric_eigenvalues().iter().cloned().collect();
        v.sort_by(|a, b| a.total_cmp(b));
        v
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().cloned().unwrap_or(0.0)
    }

    /// Reorders `other` to this operator's label order and checks the spaces agree.
    fn aligned<'a>(&self, other: &'a Operator) -> Result<std::borrow::Cow<'a, Operator>> {
        if other.space == self.space {
            return Ok(std::borrow::Cow::Borrowed(other));
        }
        if !self.space.same_set(&other.space) {
            return Err(Error::SpaceMismatch(format!("{} vs {}", self.space, other.space)));
        }
        Ok(std::borrow::Cow::Owned(other.permute(&self.space.labels())?))
    }

    pub fn add(&self, other: &Operator) -> Result<Self> {
        let o = self.aligned(other)?;
        Ok(Operator { space: self.space.clone(), mat: &self.mat + &o.mat })
    }

    pub fn sub(&self, other: &Operator) -> Result<Self> {
        let o = self.aligned(other)?;
        Ok(Operator { space: self.space.clone(), mat: &self.mat - &o.mat })
    }

    /// Matrix product on a common space.
    pub fn mul(&self, other: &Operator) -> Result<Self> {
        let o = self.aligned(other)?;
        Ok(Operator { space: self.space.clone(), mat: &self.mat * &o.mat })
    }

    /// `tr(A B)` on a common space.
    pub fn trace_product(&self, other: &Operator) -> Result<C64> {
        let o = self.aligned(other)?;
        let d = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..d {
            for k in 0..d {
                acc += self.mat[(j, k)] * o.mat[(k, j)];
            }
        }
        Ok(acc)
    }

    /// Frobenius distance after label alignment.
    pub fn distance(&self, other: &Operator) -> Result<f64> {
        Ok(self.sub(other)?.frobenius_norm())
    }

    /// Largest entrywise deviation after label alignment.
    pub fn max_deviation(&self, other: &Operator) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    pub fn approx_eq(&self, other: &Operator, tol: f64) -> bool {
        self.distance(other).map(|d| d <= tol).unwrap_or(false)
    }

    /// Kronecker product over the concatenated space.
    pub fn tensor(&self, other: &Operator) -> Result<Self> {
        let space = self.space.concat(&other.space)?;
        Ok(Operator { space, mat: self.mat.kronecker(&other.mat) })
    }

    /// `A ⊗ 1` on `self`'s space extended by `extra`.
    pub fn extend(&self, extra: &CompositeSpace) -> Result<Self> {
        self.tensor(&Operator::identity(extra.clone()))
    }

    fn split(&self, subset: &[Label]) -> Result<(Vec<usize>, Vec<usize>)> {
        let sel = self.space.positions(subset)?;
        let rest: Vec<usize> = (0..self.space.len()).filter(|p| !sel.contains(p)).collect();
        Ok((self.space.offsets(&rest), self.space.offsets(&sel)))
    }

    /// Partial trace over `subset`; the result lives on the remaining labels.
    pub fn partial_trace(&self, subset: &[Label]) -> Result<Self> {
        let (keep, tr) = self.split(subset)?;
        let space = self.space.without(subset);
        let mat = CMat::from_fn(keep.len(), keep.len(), |a, b| {
            tr.iter().map(|&t| self.mat[(keep[a] + t, keep[b] + t)]).sum()
        });
        Ok(Operator { space, mat })
    }

    /// Partial transpose over `subset` in the computational basis.
    pub fn partial_transpose(&self, subset: &[Label]) -> Result<Self> {
        let (keep, sel) = self.split(subset)?;
        let mut mat = CMat::zeros(self.dim(), self.dim());
        for &k1 in &keep {
            for &k2 in &keep {
                for &s1 in &sel {
                    for &s2 in &sel {
                        mat[(k1 + s1, k2 + s2)] = self.mat[(k1 + s2, k2 + s1)];
                    }
                }
            }
        }
        Ok(Operator { space: self.space.clone(), mat })
    }

    /// `tr_S A ⊗ 1_S / d_S`, with the replaced subsystems kept in their slots.
    pub fn trace_and_replace(&self, subset: &[Label]) -> Result<Self> {
        let (keep, tr) = self.split(subset)?;
        if tr.len() == 1 {
            return Ok(self.clone());
        }
        let inv = 1.0 / tr.len() as f64;
        let mut mat = CMat::zeros(self.dim(), self.dim());
        for &k1 in &keep {
            for &k2 in &keep {
                let s: C64 = tr.iter().map(|&t| self.mat[(k1 + t, k2 + t)]).sum::<C64>() * inv;
                for &t in &tr {
                    mat[(k1 + t, k2 + t)] = s;
                }
            }
        }
        Ok(Operator { space: self.space.clone(), mat })
    }

    /// Reindexes the operator so its labels appear in `order`.
    pub fn permute(&self, order: &[Label]) -> Result<Self> {
        let space = self.space.reordered(order)?;
        if space == self.space {
            return Ok(self.clone());
        }
        let pos = self.space.positions(order)?;
        let idx = self.space.offsets(&pos);
        let d = self.dim();
        let mat = CMat::from_fn(d, d, |a, b| self.mat[(idx[a], idx[b])]);
        Ok(Operator { space, mat })
    }

    /// Permutes to the label order of `target`, which must hold the same subsystems.
    pub fn align_to(&self, target: &CompositeSpace) -> Result<Self> {
        if !self.space.same_set(target) {
            return Err(Error::SpaceMismatch(format!("{} vs {}", self.space, target)));
        }
        self.permute(&target.labels())
    }

    /// Column-stacked vectorization, `v[r + c·d] = A[r, c]`.
    pub fn vectorize(&self) -> nalgebra::DVector<C64> {
        nalgebra::DVector::from_column_slice(self.mat.as_slice())
    }

    pub fn from_vector(space: CompositeSpace, v: &[C64]) -> Result<Self> {
        let d = space.total_dim();
        if v.len() != d * d {
            return Err(Error::InvalidMatrix(format!("vector of length {} for dimension {d}", v.len())));
        }
        Ok(Operator { space, mat: CMat::from_column_slice(d, d, v) })
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let file = OperatorFile {
            labels: self.space.subsystems().iter().map(|(l, d)| (l.0.clone(), *d)).collect(),
            matrix: (0..self.dim())
                .map(|r| (0..self.dim()).map(|c| [self.mat[(r, c)].re, self.mat[(r, c)].im]).collect())
                .collect(),
        };
        serde_json::to_value(file).expect("operator serializes")
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_json_value()).expect("operator serializes")
    }

    pub fn from_json_value(v: serde_json::Value) -> Result<Self> {
        let file: OperatorFile = serde_json::from_value(v)?;
        let space = CompositeSpace::new(file.labels)?;
        let d = space.total_dim();
        if file.matrix.len() != d || file.matrix.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidMatrix(format!("matrix must be {d}x{d}")));
        }
        let mat = CMat::from_fn(d, d, |r, c| C64::new(file.matrix[r][c][0], file.matrix[r][c][1]));
        Operator::new(space, mat)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Operator::from_json_value(serde_json::from_str(s)?)
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        Operator::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct OperatorFile {
    labels: Vec<(String, usize)>,
    matrix: Vec<Vec<[f64; 2]>>,
}
