use nalgebra::DVector;

use super::Predicates;
use crate::error::{Error, Result};
use crate::operator::{CMat, Operator, C64};
use crate::par::Exec;
use crate::space::{CompositeSpace, Label};

/// Supermatrix of a linear map `L(in) → L(out)` acting on column-stacked
/// vectorizations, `vec(A)[r + c·d] = A[r, c]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseSuperMap {
    in_space: CompositeSpace,
    out_space: CompositeSpace,
    mat: CMat,
}

/// Vectorization index permutation induced by reordering labels.
fn vec_perm(space: &CompositeSpace, order: &[Label]) -> Result<Vec<usize>> {
    let pos = space.positions(order)?;
    let idx = space.offsets(&pos);
    let d = idx.len();
    let mut out = Vec::with_capacity(d * d);
    for b in 0..d {
        for a in 0..d {
            out.push(idx[a] + idx[b] * d);
        }
    }
    Ok(out)
}

/// `K` with `K vec(A) = vec(Aᵀ)`.
fn transpose_perm(d: usize) -> Vec<usize> {
    let mut out = vec![0; d * d];
    for r in 0..d {
        for c in 0..d {
            out[r + c * d] = c + r * d;
        }
    }
    out
}

fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn hermitian_basis(space: &CompositeSpace) -> Vec<Operator> {
    let d = space.total_dim();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(d * d);
    for j in 0..d {
        out.push(Operator::unit(space.clone(), j, j));
        for k in (j + 1)..d {
            out.push(Operator::from_fn(space.clone(), |r, c| {
                if (r, c) == (j, k) || (r, c) == (k, j) {
                    C64::new(s, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }));
            out.push(Operator::from_fn(space.clone(), |r, c| {
                if (r, c) == (j, k) {
                    C64::new(0.0, -s)
                } else if (r, c) == (k, j) {
                    C64::new(0.0, s)
                } else {
                    C64::new(0.0, 0.0)
                }
            }));
        }
    }
    out
}

/// Two-pass Gram–Schmidt. `real` restricts the inner product to `Re⟨a,b⟩`.
fn gram_schmidt(cands: Vec<DVector<C64>>, real: bool, tol: f64) -> Vec<DVector<C64>> {
    let mut basis: Vec<DVector<C64>> = Vec::new();
    for mut v in cands {
        let n0 = v.norm();
        if n0 <= tol {
            continue;
        }
        for _ in 0..2 {
            for b in &basis {
                let mut ip = b.dotc(&v);
                if real {
                    ip = C64::new(ip.re, 0.0);
                }
                v -= b * ip;
            }
        }
        let n = v.norm();
        if n > tol.max(1e-8 * n0) {
            basis.push(v.unscale(n));
        }
    }
    basis
}

impl DenseSuperMap {
    pub fn from_matrix(in_space: CompositeSpace, out_space: CompositeSpace, mat: CMat) -> Result<Self> {
        let (di, dout) = (in_space.total_dim(), out_space.total_dim());
        if mat.nrows() != dout * dout || mat.ncols() != di * di {
            return Err(Error::InvalidMatrix(format!(
                "supermatrix must be {}x{}, got {}x{}",
                dout * dout,
                di * di,
                mat.nrows(),
                mat.ncols()
            )));
        }
        Ok(DenseSuperMap { in_space, out_space, mat })
    }

    pub fn identity(space: CompositeSpace) -> Self {
        let d = space.total_dim();
        DenseSuperMap { in_space: space.clone(), out_space: space, mat: CMat::identity(d * d, d * d) }
    }

    /// Builds the supermatrix column by column from the images of matrix units.
    pub fn from_map<F>(in_space: CompositeSpace, out_space: CompositeSpace, f: F) -> Result<Self>
    where
        F: Fn(&Operator) -> Result<Operator> + Sync + Send,
    {
        Self::from_map_exec(in_space, out_space, Exec::default(), f)
    }

    pub fn from_map_exec<F>(in_space: CompositeSpace, out_space: CompositeSpace, exec: Exec, f: F) -> Result<Self>
    where
        F: Fn(&Operator) -> Result<Operator> + Sync + Send,
    {
        let di = in_space.total_dim();
        let dout = out_space.total_dim();
        let cols = exec.map_range(di * di, |col| -> Result<DVector<C64>> {
            let e = Operator::unit(in_space.clone(), col % di, col / di);
            let img = f(&e)?.align_to(&out_space)?;
            Ok(img.vectorize())
        });
        let mut mat = CMat::zeros(dout * dout, di * di);
        for (k, col) in cols.into_iter().enumerate() {
            let col: DVector<C64> = col?;
            mat.set_column(k, &col);
        }
        Ok(DenseSuperMap { in_space, out_space, mat })
    }

    pub fn in_space(&self) -> &CompositeSpace {
        &self.in_space
    }

    pub fn out_space(&self) -> &CompositeSpace {
        &self.out_space
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    /// The same map with its spaces listed in other label orders.
    pub fn reordered(&self, in_target: &CompositeSpace, out_target: &CompositeSpace) -> Result<Self> {
        if *in_target == self.in_space && *out_target == self.out_space {
            return Ok(self.clone());
        }
        if !in_target.same_set(&self.in_space) || !out_target.same_set(&self.out_space) {
            return Err(Error::SpaceMismatch(format!(
                "{} -> {} vs {} -> {}",
                self.in_space, self.out_space, in_target, out_target
            )));
        }
        let cp = vec_perm(&self.in_space, &in_target.labels())?;
        let rp = vec_perm(&self.out_space, &out_target.labels())?;
        let mat = CMat::from_fn(rp.len(), cp.len(), |r, c| self.mat[(rp[r], cp[c])]);
        Ok(DenseSuperMap { in_space: in_target.clone(), out_space: out_target.clone(), mat })
    }

    pub fn apply(&self, a: &Operator) -> Result<Operator> {
        if !a.space().same_set(&self.in_space) {
            return Err(Error::SpaceMismatch(format!("map on {} applied to {}", self.in_space, a.space())));
        }
        let a = a.align_to(&self.in_space)?;
        let v = &self.mat * a.vectorize();
        Operator::from_vector(self.out_space.clone(), v.as_slice())
    }

    /// Applies `P ⊗ 1` to an operator on a superset of the map's labels.
    pub fn apply_lifted(&self, a: &Operator) -> Result<Operator> {
        if a.space().same_set(&self.in_space) {
            return self.apply(a);
        }
        if !self.in_space.same_set(&self.out_space) {
            return Err(Error::SpaceMismatch("lifting requires equal input and output spaces".into()));
        }
        let me = self.reordered(&self.in_space, &self.in_space)?;
        let pl = me.in_space.labels();
        for (l, d) in me.in_space.subsystems() {
            if a.space().dim_of(l).map_err(|_| Error::SpaceMismatch(format!("label {l} missing")))? != *d {
                return Err(Error::SpaceMismatch(format!("label {l} has different dimension")));
            }
        }
        let rest = a.space().without(&pl);
        let mut order = pl.clone();
        order.extend(rest.labels());
        let orig = a.labels();
        let ap = a.permute(&order)?;
        let (dp, dr) = (me.in_space.total_dim(), rest.total_dim());
        let m = ap.matrix();
        let x = CMat::from_fn(dp * dp, dr * dr, |pv, rv| {
            let (p1, p2) = (pv % dp, pv / dp);
            let (r1, r2) = (rv % dr, rv / dr);
            m[(p1 * dr + r1, p2 * dr + r2)]
        });
        let y = &me.mat * x;
        let mut out = CMat::zeros(dp * dr, dp * dr);
        for rv in 0..dr * dr {
            let (r1, r2) = (rv % dr, rv / dr);
            for pv in 0..dp * dp {
                let (p1, p2) = (pv % dp, pv / dp);
                out[(p1 * dr + r1, p2 * dr + r2)] = y[(pv, rv)];
            }
        }
        Operator::new(ap.space().clone(), out)?.permute(&orig)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &DenseSuperMap) -> Result<DenseSuperMap> {
        let o = other.reordered(&other.in_space, &self.in_space)?;
        Ok(DenseSuperMap { in_space: o.in_space.clone(), out_space: self.out_space.clone(), mat: &self.mat * &o.mat })
    }

    pub fn add(&self, other: &DenseSuperMap) -> Result<DenseSuperMap> {
        let o = other.reordered(&self.in_space, &self.out_space)?;
        Ok(DenseSuperMap { in_space: self.in_space.clone(), out_space: self.out_space.clone(), mat: &self.mat + &o.mat })
    }

    pub fn sub(&self, other: &DenseSuperMap) -> Result<DenseSuperMap> {
        let o = other.reordered(&self.in_space, &self.out_space)?;
        Ok(DenseSuperMap { in_space: self.in_space.clone(), out_space: self.out_space.clone(), mat: &self.mat - &o.mat })
    }

    pub fn scale(&self, s: C64) -> DenseSuperMap {
        DenseSuperMap { in_space: self.in_space.clone(), out_space: self.out_space.clone(), mat: &self.mat * s }
    }

    /// `self ⊗ other` on concatenated spaces.
    pub fn tensor(&self, other: &DenseSuperMap) -> Result<DenseSuperMap> {
        let in_space = self.in_space.concat(&other.in_space)?;
        let out_space = self.out_space.concat(&other.out_space)?;
        let (ai, bi) = (self.in_space.total_dim(), other.in_space.total_dim());
        let (ao, bo) = (self.out_space.total_dim(), other.out_space.total_dim());
        let (di, dout) = (ai * bi, ao * bo);
        let mut mat = CMat::zeros(dout * dout, di * di);
        for ka in 0..ai {
            for ja in 0..ai {
                for kb in 0..bi {
                    for jb in 0..bi {
                        let col = (ja * bi + jb) + (ka * bi + kb) * di;
                        let ca = ja + ka * ai;
                        let cb = jb + kb * bi;
                        for ca_r in 0..ao * ao {
                            let x = self.mat[(ca_r, ca)];
                            if x == C64::new(0.0, 0.0) {
                                continue;
                            }
                            let (ra, sa) = (ca_r % ao, ca_r / ao);
                            for cb_r in 0..bo * bo {
                                let y = other.mat[(cb_r, cb)];
                                let (rb, sb) = (cb_r % bo, cb_r / bo);
                                mat[((ra * bo + rb) + (sa * bo + sb) * dout, col)] = x * y;
                            }
                        }
                    }
                }
            }
        }
        Ok(DenseSuperMap { in_space, out_space, mat })
    }

    /// Hilbert–Schmidt adjoint: supermatrix `M†`.
    pub fn adjoint(&self) -> DenseSuperMap {
        DenseSuperMap { in_space: self.out_space.clone(), out_space: self.in_space.clone(), mat: self.mat.adjoint() }
    }

    /// `P^τ[A] = P†[A*]*`: supermatrix `Mᵀ`.
    pub fn tau_twirl(&self) -> DenseSuperMap {
        DenseSuperMap { in_space: self.out_space.clone(), out_space: self.in_space.clone(), mat: self.mat.transpose() }
    }

    /// Largest entrywise supermatrix deviation after label alignment.
    pub fn max_deviation(&self, other: &DenseSuperMap) -> Result<f64> {
        let o = other.reordered(&self.in_space, &self.out_space)?;
        Ok(max_abs(&(&self.mat - &o.mat)))
    }

    pub fn rank(&self, tol: f64) -> usize {
        if self.mat.is_empty() {
            return 0;
        }
        let sv = self.mat.clone().singular_values();
        let top = sv.iter().cloned().fold(0.0, f64::max);
        sv.iter().filter(|s| **s > tol * top.max(1.0)).count()
    }

    fn square(&self) -> Result<DenseSuperMap> {
        if !self.in_space.same_set(&self.out_space) {
            return Err(Error::SpaceMismatch(format!("{} -> {} is not square", self.in_space, self.out_space)));
        }
        self.reordered(&self.in_space, &self.in_space)
    }

    /// `P[A†] = P[A]†` for all A.
    pub fn is_hermiticity_preserving(&self, tol: f64) -> Result<bool> {
        let m = self.square()?;
        let d = m.in_space.total_dim();
        let k = transpose_perm(d);
        let lhs = CMat::from_fn(d * d, d * d, |r, c| m.mat[(r, k[c])]);
        let rhs = CMat::from_fn(d * d, d * d, |r, c| m.mat[(k[r], c)].conj());
        Ok(max_abs(&(lhs - rhs)) <= tol)
    }

    pub fn predicates(&self, tol: f64) -> Result<Predicates> {
        let m = self.square()?;
        let d = m.in_space.total_dim();
        let mm = &m.mat;
        let is_projector = max_abs(&(mm * mm - mm)) <= tol;
        let is_self_adjoint = max_abs(&(mm - mm.adjoint())) <= tol;
        let one = Operator::identity(m.in_space.clone()).vectorize();
        let is_unital = (mm * &one - &one).camax() <= tol;
        let is_trace_preserving = (mm.transpose() * &one - &one).camax() <= tol;
        let k = transpose_perm(d);
        let mk = CMat::from_fn(d * d, d * d, |r, c| mm[(r, k[c])]);
        let km = CMat::from_fn(d * d, d * d, |r, c| mm[(k[r], c)]);
        let commutes_with_transpose = max_abs(&(mk - km)) <= tol;
        Ok(Predicates {
            is_projector,
            is_self_adjoint,
            is_unital,
            commutes_with_transpose,
            is_trace_preserving,
            lemma1_consistent: !(is_self_adjoint && is_unital) || is_trace_preserving,
        })
    }

    /// Hilbert–Schmidt orthonormal basis of the image. Hermitian whenever the map
    /// preserves Hermiticity.
    pub fn image_basis(&self, tol: f64) -> Result<Vec<Operator>> {
        let m = self.square()?;
        if !m.predicates(tol)?.is_projector {
            return Err(Error::NotAProjector);
        }
        let space = m.in_space.clone();
        let herm = m.is_hermiticity_preserving(tol)?;
        let cands: Vec<DVector<C64>> = if herm {
            hermitian_basis(&space)
                .iter()
                .map(|h| m.apply(h).map(|x| x.hermitian_part().vectorize()))
                .collect::<Result<_>>()?
        } else {
            (0..m.mat.ncols()).map(|c| m.mat.column(c).into_owned()).collect()
        };
        gram_schmidt(cands, herm, 1e-10)
            .into_iter()
            .map(|v| Operator::from_vector(space.clone(), v.as_slice()))
            .collect()
    }

    /// Orthogonal projector onto the span of `basis` (assumed orthonormal).
    pub fn orthogonal_projector(space: CompositeSpace, basis: &[Operator]) -> Result<DenseSuperMap> {
        let d = space.total_dim();
        let mut mat = CMat::zeros(d * d, d * d);
        for b in basis {
            let v = b.align_to(&space)?.vectorize();
            mat += &v * v.adjoint();
        }
        Ok(DenseSuperMap { in_space: space.clone(), out_space: space, mat })
    }
}
