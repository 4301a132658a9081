//! Characterizations of transformations between object sets.

use serde::{Deserialize, Serialize};

use crate::choi::ChoiMatrix;
use crate::error::{Error, Result};
use crate::objects::{AffineConstraintSet, AffineEquation, Characterization, Gamma, LinearSpace, ObjectSet, Roles};
use crate::operator::{Operator, C64, DEFAULT_TOL};
use crate::par::Exec;
use crate::projmap::{dense_budget, DenseSuperMap, OpMap, SubsetMap};
use crate::rational::q_to_f64;
use crate::sampling::{random_operator, rng_from_seed};
use crate::space::CompositeSpace;

/// Which construction produced a [`TransformSpec`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// Five-term projector with scalar trace condition.
    Specialised,
    /// Twirled three-term projector with an operator trace equation.
    General,
    /// Traceless input set: linear characterization via `P′`.
    Traceless,
}

/// Transformations from `input` to `output`.
#[derive(Clone, Debug)]
pub struct TransformSpec {
    pub input: ObjectSet,
    pub output: ObjectSet,
    /// `γ_out / γ_in` (zero on the traceless route).
    pub rescale: Gamma,
    pub result: Characterization,
    pub route: Route,
    /// Raised when `γ_out = 0` with `γ_in ≠ 0`: positive members may collapse to zero.
    pub warnings: Vec<String>,
}

fn transform_roles(s_in: &ObjectSet, s_out: &ObjectSet) -> Roles {
    let mut inputs = s_in.roles.outputs.clone();
    inputs.extend(s_out.roles.inputs.iter().cloned());
    let mut outputs = s_in.roles.inputs.clone();
    outputs.extend(s_out.roles.outputs.iter().cloned());
    Roles { inputs, outputs }
}

fn joint_space(s_in: &ObjectSet, s_out: &ObjectSet) -> Result<CompositeSpace> {
    s_in.space.concat(&s_out.space)
}

/// `P ⊗ 1_extra`.
fn extend(p: &OpMap, extra: &CompositeSpace) -> Result<OpMap> {
    match p {
        OpMap::Symbolic(m) => Ok(OpMap::Symbolic(m.extend(extra)?)),
        OpMap::Dense(_) => p.tensor_map(&OpMap::identity(extra.clone())),
    }
}

fn check_nice(s: &ObjectSet, which: &str) -> Result<()> {
    let p = s.projector.predicates()?;
    if !p.is_nice() {
        return Err(Error::HypothesisViolated(format!(
            "{which} projector of `{}` is not a self-adjoint unital projector commuting with the transpose",
            s.name
        )));
    }
    Ok(())
}

/// Five-term projector
/// `1 − P_i⊗1 + P_i⊗P_o − (P_i⊗1)∘_o + _io` with `γ = (γ_o/γ_i)·d_i`.
pub fn build_transform_space(s_in: &ObjectSet, s_out: &ObjectSet) -> Result<TransformSpec> {
    if s_in.gamma.is_zero() {
        return Err(Error::ZeroGammaIn);
    }
    check_nice(s_in, "input")?;
    check_nice(s_out, "output")?;
    let space = joint_space(s_in, s_out)?;
    let id = OpMap::identity(space.clone());
    let pi = extend(&s_in.projector, &s_out.space)?;
    let pipo = s_in.projector.tensor_map(&s_out.projector)?;
    let tr_o = OpMap::Symbolic(SubsetMap::trace_replace(space.clone(), &s_out.space.labels())?);
    let tr_io = OpMap::Symbolic(SubsetMap::trace_replace(space.clone(), &space.labels())?);
    let projector = id.sub(&pi)?.add(&pipo)?.sub(&pi.compose(&tr_o)?)?.add(&tr_io)?;
    let rescale = s_out.gamma.div(&s_in.gamma)?;
    let gamma = rescale.times(&Gamma::dims_of(&s_in.space.labels())).simplified(&space);
    let warnings = zero_out_warning(s_out);
    Ok(TransformSpec {
        input: s_in.clone(),
        output: s_out.clone(),
        rescale,
        result: Characterization::Object(ObjectSet {
            name: format!("transform({} -> {})", s_in.name, s_out.name),
            space,
            projector,
            gamma,
            require_psd: true,
            roles: transform_roles(s_in, s_out),
        }),
        route: Route::Specialised,
        warnings,
    })
}

fn zero_out_warning(s_out: &ObjectSet) -> Vec<String> {
    if s_out.gamma.is_zero() && s_out.require_psd {
        vec!["output trace value is zero: positive members of the output set are zero".into()]
    } else {
        vec![]
    }
}

/// Three-term projector `1 − P_i⊗1 + P_i⊗P_o` for linear spaces.
pub fn build_transform_space_linear(p_in: &OpMap, p_out: &OpMap) -> Result<OpMap> {
    for (p, which) in [(p_in, "input"), (p_out, "output")] {
        if !p.predicates()?.is_nice() {
            return Err(Error::HypothesisViolated(format!(
                "{which} projector is not a self-adjoint unital projector commuting with the transpose"
            )));
        }
    }
    general_linear(p_in, p_out)
}

/// `1 − P_i^τ⊗1 + P_i^τ⊗P_o`, valid for arbitrary projectors.
pub fn general_linear(p_in: &OpMap, p_out: &OpMap) -> Result<OpMap> {
    let space = p_in.in_space().concat(p_out.in_space())?;
    let tw = p_in.tau_twirl();
    let id = OpMap::identity(space);
    id.sub(&extend(&tw, p_out.in_space())?)?.add(&tw.tensor_map(p_out)?)
}

/// Linear-space transformation set as a [`Characterization`].
pub fn linear_transform(s_in: &Characterization, s_out: &Characterization) -> Result<Characterization> {
    let projector = build_transform_space_linear(s_in.projector(), s_out.projector())?;
    let space = s_in.space().concat(s_out.space())?;
    let mut inputs = s_in.roles().outputs.clone();
    inputs.extend(s_out.roles().inputs.iter().cloned());
    let mut outputs = s_in.roles().inputs.clone();
    outputs.extend(s_out.roles().outputs.iter().cloned());
    Ok(Characterization::Linear(LinearSpace {
        name: format!("linear_transform({} -> {})", s_in.name(), s_out.name()),
        space,
        projector,
        roles: Roles { inputs, outputs },
    }))
}

/// General projector route: `T = 1 − P_i^τ⊗1 + P_i^τ⊗P_o` together with
/// `P_i^τ[tr_o T] = (γ_o/γ_i)·P_i^τ[1_i]`.
pub fn build_transform_space_general(s_in: &ObjectSet, s_out: &ObjectSet) -> Result<TransformSpec> {
    if s_in.gamma.is_zero() {
        return Err(Error::ZeroGammaIn);
    }
    let space = joint_space(s_in, s_out)?;
    let projector = general_linear(&s_in.projector, &s_out.projector)?;
    let rescale = s_out.gamma.div(&s_in.gamma)?;
    let r = q_to_f64(&rescale.eval(&space)?);
    let tw = s_in.projector.tau_twirl();
    let rhs = tw.apply(&Operator::identity(s_in.space.clone()))?.scale_re(r);
    Ok(TransformSpec {
        input: s_in.clone(),
        output: s_out.clone(),
        rescale,
        result: Characterization::Affine(AffineConstraintSet {
            name: format!("transform({} -> {})", s_in.name, s_out.name),
            space,
            projector,
            equation: AffineEquation { traced: s_out.space.labels(), transpose: false, map: tw, rhs },
            require_psd: true,
            roles: transform_roles(s_in, s_out),
        }),
        route: Route::General,
        warnings: zero_out_warning(s_out),
    })
}

/// Tries the specialised construction, then the general one, then the traceless one.
pub fn build_transform(s_in: &ObjectSet, s_out: &ObjectSet) -> Result<TransformSpec> {
    match build_transform_space(s_in, s_out) {
        Ok(t) => Ok(t),
        Err(Error::HypothesisViolated(_)) => build_transform_space_general(s_in, s_out),
        Err(Error::ZeroGammaIn) => build_traceless_transform(s_in, s_out),
        Err(e) => Err(e),
    }
}

/// Orthogonal projector onto `{P[X] : tr P[X] = 0}`.
pub fn build_traceless_projector(s: &ObjectSet) -> Result<OpMap> {
    build_traceless_projector_budget(s, dense_budget())
}

pub fn build_traceless_projector_budget(s: &ObjectSet, budget: usize) -> Result<OpMap> {
    let dense = s.projector.to_dense(budget)?;
    let basis = dense.image_basis(DEFAULT_TOL)?;
    let space = s.space.clone();
    // Component of the trace functional inside the image.
    let mut t = Operator::zeros(space.clone());
    for b in &basis {
        t = t.add(&b.scale(b.trace().conj()))?;
    }
    let tn = t.frobenius_norm();
    let mut out = Vec::with_capacity(basis.len());
    let tdir = if tn > 1e-12 { Some(t.scale_re(1.0 / tn)) } else { None };
    for b in &basis {
        let mut v = b.clone();
        if let Some(td) = &tdir {
            let ip = td.dagger().trace_product(&v)?;
            v = v.sub(&td.scale(ip))?;
        }
        for u in &out {
            let u: &Operator = u;
            let ip = u.dagger().trace_product(&v)?;
            v = v.sub(&u.scale(ip))?;
        }
        let n = v.frobenius_norm();
        if n > 1e-8 {
            out.push(v.scale_re(1.0 / n));
        }
    }
    Ok(OpMap::Dense(DenseSuperMap::orthogonal_projector(space, &out)?))
}

/// Traceless route: `1 − P′_i^τ⊗1 + P′_i^τ⊗P′_o` where `P′_o` is the traceless
/// projector of the output when it also has zero trace value.
pub fn build_traceless_transform(s_in: &ObjectSet, s_out: &ObjectSet) -> Result<TransformSpec> {
    let pi = build_traceless_projector(s_in)?;
    let po = if s_out.gamma.is_zero() { build_traceless_projector(s_out)? } else { s_out.projector.clone() };
    let space = joint_space(s_in, s_out)?;
    let projector = general_linear(&pi, &po)?;
    Ok(TransformSpec {
        input: s_in.clone(),
        output: s_out.clone(),
        rescale: Gamma::zero(),
        result: Characterization::Linear(LinearSpace {
            name: format!("transform({} -> {})", s_in.name, s_out.name),
            space,
            projector,
            roles: transform_roles(s_in, s_out),
        }),
        route: Route::Traceless,
        warnings: vec![],
    })
}

/// Outcome of checking the map-level conditions on a Choi matrix.
#[derive(Clone, Debug, Serialize)]
pub struct MapVersionReport {
    /// Whether a full operator basis was used (otherwise random samples).
    pub exhaustive: bool,
    pub n_inputs: usize,
    /// `max ‖P_o[T[P_i X]] − T[P_i X]‖`.
    pub projector_residual: f64,
    /// `max |tr T[P_i X] − (γ_o/γ_i) tr P_i X|`.
    pub trace_residual: f64,
    pub pass: bool,
    /// Membership of the Choi matrix in the built characterization (positivity ignored).
    pub choi_membership: bool,
    /// The map-level and Choi-level verdicts agree.
    pub consistent: bool,
}

/// Input dimension up to which a full basis is used.
pub const EXHAUSTIVE_INPUT_DIM: usize = 16;

/// Checks `P_o∘T∘P_i = T∘P_i` and `tr∘T∘P_i = (γ_o/γ_i) tr∘P_i`.
pub fn check_map_version(
    t: &ChoiMatrix,
    spec: &TransformSpec,
    n_samples: usize,
    seed: u64,
    tol: f64,
    exec: Exec,
) -> Result<MapVersionReport> {
    let s_in = &spec.input;
    let s_out = &spec.output;
    if !t.in_space().same_set(&s_in.space) || !t.out_space().same_set(&s_out.space) {
        return Err(Error::SpaceMismatch(format!(
            "Choi matrix {} -> {} vs transformation {} -> {}",
            t.in_space(),
            t.out_space(),
            s_in.space,
            s_out.space
        )));
    }
    let action = t.action_map().reordered(&s_in.space, &s_out.space)?;
    let r = C64::new(q_to_f64(&spec.rescale.eval(&s_in.space.concat(&s_out.space)?)?), 0.0);
    let di = s_in.space.total_dim();
    let exhaustive = di <= EXHAUSTIVE_INPUT_DIM;
    let n = if exhaustive { di * di } else { n_samples };
    let residuals = exec.map_range(n, |k| -> Result<(f64, f64)> {
        let e = if exhaustive {
            Operator::unit(s_in.space.clone(), k % di, k / di)
        } else {
            let mut rng = rng_from_seed(seed.wrapping_add(k as u64));
            random_operator(&s_in.space, &mut rng)
        };
        let x = s_in.projector.apply(&e)?;
        let y = action.apply(&x)?;
        let pres = s_out.projector.apply(&y)?.distance(&y)?;
        let tres = (y.trace() - r * x.trace()).norm();
        Ok((pres, tres))
    });
    let mut pres: f64 = 0.0;
    let mut tres: f64 = 0.0;
    for res in residuals {
        let (a, b) = res?;
        pres = pres.max(a);
        tres = tres.max(b);
    }
    let pass = pres <= tol && tres <= tol;
    let m = spec.result.validate_tol(t.op(), tol)?;
    let choi_membership = m.projector_pass && m.trace_pass;
    Ok(MapVersionReport {
        exhaustive,
        n_inputs: n,
        projector_residual: pres,
        trace_residual: tres,
        pass,
        choi_membership,
        consistent: pass == choi_membership,
    })
}

#[cfg(test)]
mod tests;
