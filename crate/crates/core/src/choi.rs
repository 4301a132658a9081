//! Choi matrices and the link product.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::{CMat, Operator};
use crate::projmap::{DenseSuperMap, OpMap};
use crate::space::{CompositeSpace, Label};

/// An operator on `input ⊗ output`, stored with the input labels first.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiMatrix {
    op: Operator,
    input: CompositeSpace,
    output: CompositeSpace,
}

impl ChoiMatrix {
    /// Wraps an operator whose labels split into `input` and `output`.
    pub fn new(op: Operator, input: &[Label], output: &[Label]) -> Result<Self> {
        let in_space = op.space().restrict(input)?;
        let out_space = op.space().restrict(output)?;
        let in_space = in_space.reordered(input)?;
        let out_space = out_space.reordered(output)?;
        let full = in_space.concat(&out_space)?;
        let op = op.align_to(&full)?;
        Ok(ChoiMatrix { op, input: in_space, output: out_space })
    }

    pub fn op(&self) -> &Operator {
        &self.op
    }

    pub fn into_operator(self) -> Operator {
        self.op
    }

    pub fn in_space(&self) -> &CompositeSpace {
        &self.input
    }

    pub fn out_space(&self) -> &CompositeSpace {
        &self.output
    }

    /// `T[X] = tr_in[(Xᵀ ⊗ 1) T]`.
    pub fn apply(&self, x: &Operator) -> Result<Operator> {
        apply_choi(self, x)
    }

    /// The represented map as a supermatrix `L(in) → L(out)`.
    pub fn action_map(&self) -> DenseSuperMap {
        let di = self.input.total_dim();
        let dz = self.output.total_dim();
        let t = self.op.matrix();
        let mat = CMat::from_fn(dz * dz, di * di, |r, c| {
            let (z, z2) = (r % dz, r / dz);
            let (y, y2) = (c % di, c / di);
            t[(y * dz + z, y2 * dz + z2)]
        });
        DenseSuperMap::from_matrix(self.input.clone(), self.output.clone(), mat).expect("shape matches")
    }

    /// `(tr_out T)ᵀ`, the effect whose pairing gives the outcome probability.
    pub fn effect(&self) -> Result<Operator> {
        Ok(self.op.partial_trace(&self.output.labels())?.transpose())
    }
}

/// `T = Σ_jk |j⟩⟨k| ⊗ F[|j⟩⟨k|]`.
pub fn choi_of_map<F>(f: F, in_space: &CompositeSpace, out_space: &CompositeSpace) -> Result<ChoiMatrix>
where
    F: Fn(&Operator) -> Result<Operator>,
{
    let full = in_space.concat(out_space)?;
    let di = in_space.total_dim();
    let dout = out_space.total_dim();
    let mut mat = CMat::zeros(di * dout, di * dout);
    for j in 0..di {
        for k in 0..di {
            let img = f(&Operator::unit(in_space.clone(), j, k))?;
            if !img.space().same_set(out_space) {
                return Err(Error::SpaceMismatch(format!("map output {} vs declared {}", img.space(), out_space)));
            }
            let img = img.align_to(out_space)?;
            let m = img.matrix();
            for a in 0..dout {
                for b in 0..dout {
                    mat[(j * dout + a, k * dout + b)] = m[(a, b)];
                }
            }
        }
    }
    Ok(ChoiMatrix { op: Operator::new(full, mat)?, input: in_space.clone(), output: out_space.clone() })
}

/// Choi matrix of a square map whose output labels are renamed to `out_labels`.
pub fn choi_of_opmap(p: &OpMap, out_labels: &[Label]) -> Result<ChoiMatrix> {
    let out_space = p.out_space();
    if out_labels.len() != out_space.len() {
        return Err(Error::BadDims("one output label per subsystem required".into()));
    }
    let renamed =
        CompositeSpace::new(out_labels.iter().cloned().zip(out_space.dims()))?;
    choi_of_map(
        |x| {
            let y = p.apply(x)?;
            Operator::new(renamed.clone(), y.into_matrix())
        },
        p.in_space(),
        &renamed,
    )
}

/// `T ⋆ X` with `X` on the Choi matrix's input labels.
pub fn apply_choi(t: &ChoiMatrix, x: &Operator) -> Result<Operator> {
    if !x.space().same_set(&t.input) {
        return Err(Error::SpaceMismatch(format!("input {} vs operand {}", t.input, x.space())));
    }
    link(&t.op, x)?.align_to(&t.output)
}

/// Link product: contraction over the shared labels `Y`,
/// `(A ⋆ B)[(x,z),(x',z')] = Σ A[(x,y),(x',y')] B[(y,z),(y',z')]`.
/// The result lists A's remaining labels followed by B's.
pub fn link(a: &Operator, b: &Operator) -> Result<Operator> {
    let shared: Vec<Label> = a.labels().into_iter().filter(|l| b.space().contains(l)).collect();
    for l in &shared {
        let (da, db) = (a.space().dim_of(l)?, b.space().dim_of(l)?);
        if da != db {
            return Err(Error::DimMismatchOnSharedLabel { label: l.0.clone(), left: da, right: db });
        }
    }
    let xs = a.space().without(&shared);
    let zs = b.space().without(&shared);
    let mut a_order = xs.labels();
    a_order.extend(shared.iter().cloned());
    let mut b_order = shared.clone();
    b_order.extend(zs.labels());
    let ap = a.permute(&a_order)?;
    let bp = b.permute(&b_order)?;
    let (dx, dy, dz) = (xs.total_dim(), a.space().dim_of_set(&shared)?, zs.total_dim());
    let am = ap.matrix();
    let bm = bp.matrix();
    let ahat = CMat::from_fn(dx * dx, dy * dy, |r, c| {
        let (x, x2) = (r % dx, r / dx);
        let (y, y2) = (c % dy, c / dy);
        am[(x * dy + y, x2 * dy + y2)]
    });
    let bhat = CMat::from_fn(dy * dy, dz * dz, |r, c| {
        let (y, y2) = (r % dy, r / dy);
        let (z, z2) = (c % dz, c / dz);
        bm[(y * dz + z, y2 * dz + z2)]
    });
    let chat = ahat * bhat;
    let mat = CMat::from_fn(dx * dz, dx * dz, |r, c| {
        let (x, z) = (r / dz, r % dz);
        let (x2, z2) = (c / dz, c % dz);
        chat[(x + x2 * dx, z + z2 * dz)]
    });
    Operator::new(xs.concat(&zs)?, mat)
}

/// Deviations for moving a map across a link product.
#[derive(Clone, Debug, Serialize)]
pub struct MoveReport {
    /// `max |A ⋆ P[B] − P^τ[A] ⋆ B|`.
    pub twirled_deviation: f64,
    /// `max |A ⋆ P[B] − P[A] ⋆ B|`.
    pub plain_deviation: f64,
    /// Whether the map is self-adjoint and commutes with the transpose, so that
    /// the plain form is expected to hold.
    pub plain_form_expected: bool,
}

/// Evaluates both sides of `A ⋆ P[B] = P^τ[A] ⋆ B` and the untwirled variant.
pub fn move_map(a: &Operator, p: &OpMap, b: &Operator) -> Result<MoveReport> {
    for (l, _) in p.in_space().subsystems() {
        if !a.space().contains(l) || !b.space().contains(l) {
            return Err(Error::SpaceMismatch(format!("map label {l} is not shared by both operands")));
        }
    }
    let lhs = link(a, &p.apply_lifted(b)?)?;
    let rhs = link(&p.tau_twirl().apply_lifted(a)?, b)?;
    let plain = link(&p.apply_lifted(a)?, b)?;
    let preds = p.predicates()?;
    Ok(MoveReport {
        twirled_deviation: lhs.max_deviation(&rhs)?,
        plain_deviation: lhs.max_deviation(&plain)?,
        plain_form_expected: preds.is_self_adjoint && preds.commutes_with_transpose,
    })
}

#[cfg(test)]
mod tests;
