//! Quantum-object sets as (projector, trace value) descriptors and the validator.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{Operator, DEFAULT_TOL};
use crate::par::Exec;
use crate::projmap::{OpMap, SubsetMap};
use crate::rational::{q, q_fmt, q_to_f64, Q};
use crate::space::{CompositeSpace, Label};

/// Trace value written as `coeff · Π d_l^{e_l}`, evaluated against a space on demand.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gamma {
    pub coeff: Q,
    pub dims: BTreeMap<Label, i32>,
}

impl Gamma {
    pub fn constant(c: Q) -> Self {
        Gamma { coeff: c, dims: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Gamma::constant(Q::one())
    }

    pub fn zero() -> Self {
        Gamma::constant(Q::zero())
    }

    /// `Π_{l ∈ ls} d_l`.
    pub fn dims_of(ls: &[Label]) -> Self {
        let mut g = Gamma::one();
        for l in ls {
            *g.dims.entry(l.clone()).or_insert(0) += 1;
        }
        g
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero()
    }

    pub fn times(&self, other: &Gamma) -> Gamma {
        let mut g = Gamma { coeff: &self.coeff * &other.coeff, dims: self.dims.clone() };
        for (l, e) in &other.dims {
            *g.dims.entry(l.clone()).or_insert(0) += e;
        }
        g.dims.retain(|_, e| *e != 0);
        g
    }

    pub fn inverse(&self) -> Result<Gamma> {
        if self.is_zero() {
            return Err(Error::ZeroGamma);
        }
        Ok(Gamma { coeff: Q::one() / &self.coeff, dims: self.dims.iter().map(|(l, e)| (l.clone(), -e)).collect() })
    }

    pub fn div(&self, other: &Gamma) -> Result<Gamma> {
        Ok(self.times(&other.inverse()?))
    }

    pub fn eval(&self, space: &CompositeSpace) -> Result<Q> {
        let mut v = self.coeff.clone();
        for (l, e) in &self.dims {
            let d = q(space.dim_of(l)? as i64);
            for _ in 0..e.unsigned_abs() {
                if *e > 0 {
                    v *= &d;
                } else {
                    v /= &d;
                }
            }
        }
        Ok(v)
    }

    /// Drops factors of labels with dimension one in `space`.
    pub fn simplified(&self, space: &CompositeSpace) -> Gamma {
        let mut g = self.clone();
        g.dims.retain(|l, _| space.dim_of(l).map(|d| d > 1).unwrap_or(true));
        g
    }
}

impl fmt::Display for Gamma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let num: Vec<String> =
            self.dims.iter().filter(|(_, e)| **e > 0).flat_map(|(l, e)| (0..*e).map(move |_| format!("d_{l}"))).collect();
        let den: Vec<String> = self
            .dims
            .iter()
            .filter(|(_, e)| **e < 0)
            .flat_map(|(l, e)| (0..-*e).map(move |_| format!("d_{l}")))
            .collect();
        let mut parts = Vec::new();
        if !self.coeff.is_one() || num.is_empty() {
            parts.push(q_fmt(&self.coeff));
        }
        parts.extend(num);
        write!(f, "{}", parts.join("*"))?;
        if !den.is_empty() {
            write!(f, "/{}", den.join("/"))?;
        }
        Ok(())
    }
}

/// Which labels play the role of inputs and outputs of the objects in a set.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Roles {
    pub inputs: Vec<Label>,
    pub outputs: Vec<Label>,
}

impl Roles {
    pub fn swapped(&self) -> Roles {
        Roles { inputs: self.outputs.clone(), outputs: self.inputs.clone() }
    }

    fn concat(&self, other: &Roles) -> Roles {
        let mut r = self.clone();
        r.inputs.extend(other.inputs.iter().cloned());
        r.outputs.extend(other.outputs.iter().cloned());
        r
    }
}

/// `{W : (W ⪰ 0), P[W] = W, tr W = γ}`.
#[derive(Clone, Debug)]
pub struct ObjectSet {
    pub name: String,
    pub space: CompositeSpace,
    pub projector: OpMap,
    pub gamma: Gamma,
    pub require_psd: bool,
    pub roles: Roles,
}

/// Operator equation `map[(tr_traced W)^τ?] = rhs`.
#[derive(Clone, Debug)]
pub struct AffineEquation {
    pub traced: Vec<Label>,
    pub transpose: bool,
    pub map: OpMap,
    pub rhs: Operator,
}

impl AffineEquation {
    pub fn lhs(&self, w: &Operator) -> Result<Operator> {
        let mut x = w.partial_trace(&self.traced)?;
        if self.transpose {
            x = x.transpose();
        }
        self.map.apply(&x)
    }

    pub fn residual(&self, w: &Operator) -> Result<f64> {
        self.lhs(w)?.distance(&self.rhs)
    }
}

/// `{W : (W ⪰ 0), P[W] = W, equation holds}`, used when the trace condition is not scalar.
#[derive(Clone, Debug)]
pub struct AffineConstraintSet {
    pub name: String,
    pub space: CompositeSpace,
    pub projector: OpMap,
    pub equation: AffineEquation,
    pub require_psd: bool,
    pub roles: Roles,
}

/// The linear span `{W : P[W] = W}` without any normalization.
#[derive(Clone, Debug)]
pub struct LinearSpace {
    pub name: String,
    pub space: CompositeSpace,
    pub projector: OpMap,
    pub roles: Roles,
}

/// Any of the supported set descriptions.
#[derive(Clone, Debug)]
pub enum Characterization {
    Object(ObjectSet),
    Affine(AffineConstraintSet),
    Linear(LinearSpace),
}

/// Residuals of a membership test. Every residual is always computed.
#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub psd_pass: bool,
    pub projector_pass: bool,
    pub trace_pass: bool,
    pub min_eigenvalue: f64,
    pub hermiticity_residual: f64,
    pub projector_residual: f64,
    pub trace_residual: f64,
    pub pass: bool,
}

fn psd_check(w: &Operator, tol: f64) -> (bool, f64, f64) {
    let herm = w.distance(&w.dagger()).unwrap_or(f64::INFINITY);
    let min = w.min_eigenvalue();
    let scale = w.spectral_norm();
    let ok = herm <= tol * scale.max(1.0) && min >= -tol * scale;
    (ok, min, herm)
}

impl ObjectSet {
    pub fn gamma_value(&self) -> Result<Q> {
        self.gamma.eval(&self.space)
    }

    pub fn gamma_f64(&self) -> f64 {
        self.gamma_value().map(|g| q_to_f64(&g)).unwrap_or(f64::NAN)
    }

    pub fn validate(&self, w: &Operator) -> Result<ValidationReport> {
        self.validate_tol(w, DEFAULT_TOL)
    }

    pub fn validate_tol(&self, w: &Operator, tol: f64) -> Result<ValidationReport> {
        if !w.space().same_set(&self.space) {
            return Err(Error::SpaceMismatch(format!("set on {} vs operator on {}", self.space, w.space())));
        }
        let (psd_ok, min, herm) = psd_check(w, tol);
        let pres = self.projector.apply(w)?.distance(w)?;
        let tres = (w.trace() - crate::operator::C64::new(self.gamma_f64(), 0.0)).norm();
        let psd_pass = !self.require_psd || psd_ok;
        let projector_pass = pres <= tol;
        let trace_pass = tres <= tol;
        Ok(ValidationReport {
            psd_pass,
            projector_pass,
            trace_pass,
            min_eigenvalue: min,
            hermiticity_residual: herm,
            projector_residual: pres,
            trace_residual: tres,
            pass: psd_pass && projector_pass && trace_pass,
        })
    }

    pub fn validate_batch(&self, ws: &[Operator], tol: f64, exec: Exec) -> Result<Vec<ValidationReport>> {
        exec.map(ws, |w| self.validate_tol(w, tol)).into_iter().collect()
    }

    pub fn symbolic_projector(&self) -> Option<&SubsetMap> {
        self.projector.as_symbolic()
    }
}

impl Characterization {
    pub fn name(&self) -> &str {
        match self {
            Characterization::Object(s) => &s.name,
            Characterization::Affine(s) => &s.name,
            Characterization::Linear(s) => &s.name,
        }
    }

    pub fn space(&self) -> &CompositeSpace {
        match self {
            Characterization::Object(s) => &s.space,
            Characterization::Affine(s) => &s.space,
            Characterization::Linear(s) => &s.space,
        }
    }

    pub fn projector(&self) -> &OpMap {
        match self {
            Characterization::Object(s) => &s.projector,
            Characterization::Affine(s) => &s.projector,
            Characterization::Linear(s) => &s.projector,
        }
    }

    pub fn roles(&self) -> &Roles {
        match self {
            Characterization::Object(s) => &s.roles,
            Characterization::Affine(s) => &s.roles,
            Characterization::Linear(s) => &s.roles,
        }
    }

    pub fn as_object(&self) -> Option<&ObjectSet> {
        match self {
            Characterization::Object(s) => Some(s),
            _ => None,
        }
    }

    pub fn into_object(self) -> Result<ObjectSet> {
        match self {
            Characterization::Object(s) => Ok(s),
            other => Err(Error::HypothesisViolated(format!("`{}` has no scalar trace condition", other.name()))),
        }
    }

    pub fn validate_tol(&self, w: &Operator, tol: f64) -> Result<ValidationReport> {
        match self {
            Characterization::Object(s) => s.validate_tol(w, tol),
            Characterization::Affine(s) => {
                if !w.space().same_set(&s.space) {
                    return Err(Error::SpaceMismatch(format!("set on {} vs operator on {}", s.space, w.space())));
                }
                let (psd_ok, min, herm) = psd_check(w, tol);
                let pres = s.projector.apply(w)?.distance(w)?;
                let tres = s.equation.residual(w)?;
                let psd_pass = !s.require_psd || psd_ok;
                Ok(ValidationReport {
                    psd_pass,
                    projector_pass: pres <= tol,
                    trace_pass: tres <= tol,
                    min_eigenvalue: min,
                    hermiticity_residual: herm,
                    projector_residual: pres,
                    trace_residual: tres,
                    pass: psd_pass && pres <= tol && tres <= tol,
                })
            }
            Characterization::Linear(s) => {
                if !w.space().same_set(&s.space) {
                    return Err(Error::SpaceMismatch(format!("set on {} vs operator on {}", s.space, w.space())));
                }
                let (_, min, herm) = psd_check(w, tol);
                let pres = s.projector.apply(w)?.distance(w)?;
                Ok(ValidationReport {
                    psd_pass: true,
                    projector_pass: pres <= tol,
                    trace_pass: true,
                    min_eigenvalue: min,
                    hermiticity_residual: herm,
                    projector_residual: pres,
                    trace_residual: 0.0,
                    pass: pres <= tol,
                })
            }
        }
    }

    pub fn validate(&self, w: &Operator) -> Result<ValidationReport> {
        self.validate_tol(w, DEFAULT_TOL)
    }
}

/// Quantum states: `P = 1`, `γ = 1`.
pub fn state_set(space: &CompositeSpace) -> ObjectSet {
    ObjectSet {
        name: "state".into(),
        space: space.clone(),
        projector: OpMap::identity(space.clone()),
        gamma: Gamma::one(),
        require_psd: true,
        roles: Roles { inputs: vec![], outputs: space.labels() },
    }
}

/// Channels `i → o`: `P = 1 − _o + _io`, `γ = d_i`.
pub fn channel_set(i: &CompositeSpace, o: &CompositeSpace) -> Result<ObjectSet> {
    let space = i.concat(o)?;
    let mut p = SubsetMap::identity(space.clone());
    p.add_term(&o.labels(), -Q::one())?;
    p.add_term(&space.labels(), Q::one())?;
    Ok(ObjectSet {
        name: "channel".into(),
        gamma: Gamma::dims_of(&i.labels()),
        projector: OpMap::Symbolic(p),
        space,
        require_psd: true,
        roles: Roles { inputs: i.labels(), outputs: o.labels() },
    })
}

/// A comb with ordered teeth `(I_k, O_k)`, built by the recursion
/// `comb[(I1,O1),…,(In,On)] = transform(comb[(O1,I2),…,(O_{n−1},I_n)] → channel(I1 → On))`.
pub fn comb_set(teeth: &[(CompositeSpace, CompositeSpace)]) -> Result<ObjectSet> {
    let mut all = CompositeSpace::trivial();
    for (i, o) in teeth {
        all = all.concat(i)?.concat(o)?;
    }
    let mut set = comb_inner(teeth)?;
    set.name = "comb".into();
    set.roles = Roles {
        inputs: teeth.iter().flat_map(|(i, _)| i.labels()).collect(),
        outputs: teeth.iter().flat_map(|(_, o)| o.labels()).collect(),
    };
    let order = all.labels();
    set.projector = reorder_map(&set.projector, &all)?;
    set.space = set.space.reordered(&order)?;
    Ok(set)
}

fn comb_inner(teeth: &[(CompositeSpace, CompositeSpace)]) -> Result<ObjectSet> {
    match teeth.len() {
        0 => Ok(state_set(&CompositeSpace::trivial())),
        1 => channel_set(&teeth[0].0, &teeth[0].1),
        n => {
            let inner: Vec<(CompositeSpace, CompositeSpace)> =
                (0..n - 1).map(|k| (teeth[k].1.clone(), teeth[k + 1].0.clone())).collect();
            let s_in = comb_inner(&inner)?;
            let s_out = channel_set(&teeth[0].0, &teeth[n - 1].1)?;
            crate::transforms::build_transform_space(&s_in, &s_out)?.result.into_object()
        }
    }
}

fn reorder_map(p: &OpMap, target: &CompositeSpace) -> Result<OpMap> {
    match p {
        OpMap::Symbolic(m) => Ok(OpMap::Symbolic(m.reindexed(target)?)),
        OpMap::Dense(m) => Ok(OpMap::Dense(m.reordered(target, target)?)),
    }
}

/// Non-signalling channels: composition of the per-party channel projectors, `γ = d_i`.
pub fn nonsignalling_set(pairs: &[(CompositeSpace, CompositeSpace)]) -> Result<ObjectSet> {
    let mut space = CompositeSpace::trivial();
    for (i, o) in pairs {
        space = space.concat(i)?.concat(o)?;
    }
    let mut p = SubsetMap::identity(space.clone());
    for (i, o) in pairs {
        let party = channel_set(i, o)?;
        let lifted = party.symbolic_projector().expect("channel projector is symbolic").lift_to(&space)?;
        p = lifted.compose(&p)?;
    }
    let inputs: Vec<Label> = pairs.iter().flat_map(|(i, _)| i.labels()).collect();
    let outputs: Vec<Label> = pairs.iter().flat_map(|(_, o)| o.labels()).collect();
    Ok(ObjectSet {
        name: "ns".into(),
        gamma: Gamma::dims_of(&inputs),
        projector: OpMap::Symbolic(p),
        space,
        require_psd: true,
        roles: Roles { inputs, outputs },
    })
}

/// Process matrices: the dual affine set of the non-signalling channels.
pub fn process_matrix_set(pairs: &[(CompositeSpace, CompositeSpace)]) -> Result<ObjectSet> {
    let mut s = dual_set(&nonsignalling_set(pairs)?)?.into_object()?;
    s.name = "pm".into();
    Ok(s)
}

/// Dual affine set `{W̄ : tr(W̄ W) = 1 ∀ W ∈ S}`.
///
/// For self-adjoint, unital, transpose-commuting projectors this is the object set
/// with projector `1 − P + _all` and `γ = d/γ_S`. Otherwise the operator equation
/// `P^τ[W̄^τ] = P^τ[1]/γ` is returned.
pub fn dual_set(s: &ObjectSet) -> Result<Characterization> {
    if s.gamma.is_zero() {
        return Err(Error::ZeroGamma);
    }
    let name = format!("dual({})", s.name);
    let preds = s.projector.predicates()?;
    let all = s.space.labels();
    let gamma = Gamma::dims_of(&all).div(&s.gamma)?;
    if preds.is_nice() {
        let id = OpMap::identity(s.space.clone());
        let tr_all = OpMap::Symbolic(SubsetMap::trace_replace(s.space.clone(), &all)?);
        let projector = id.sub(&s.projector)?.add(&tr_all)?;
        return Ok(Characterization::Object(ObjectSet {
            name,
            space: s.space.clone(),
            projector,
            gamma,
            require_psd: s.require_psd,
            roles: s.roles.swapped(),
        }));
    }
    let tw = s.projector.tau_twirl();
    let g = q_to_f64(&s.gamma_value()?);
    let rhs = tw.apply(&Operator::identity(s.space.clone()))?.scale_re(1.0 / g);
    Ok(Characterization::Affine(AffineConstraintSet {
        name,
        space: s.space.clone(),
        projector: OpMap::identity(s.space.clone()),
        equation: AffineEquation { traced: vec![], transpose: true, map: tw, rhs },
        require_psd: s.require_psd,
        roles: s.roles.swapped(),
    }))
}

/// Products `W_1 ⊗ W_2`: projector `P_1 ⊗ P_2`, `γ = γ_1 γ_2`.
pub fn tensor_set(a: &ObjectSet, b: &ObjectSet) -> Result<ObjectSet> {
    Ok(ObjectSet {
        name: format!("tensor({}, {})", a.name, b.name),
        space: a.space.concat(&b.space)?,
        projector: a.projector.tensor_map(&b.projector)?,
        gamma: a.gamma.times(&b.gamma),
        require_psd: a.require_psd && b.require_psd,
        roles: a.roles.concat(&b.roles),
    })
}

impl ObjectSet {
    /// True when the trace value is positive (as all catalogue sets are).
    pub fn has_positive_gamma(&self) -> bool {
        self.gamma_value().map(|g| g.is_positive()).unwrap_or(false)
    }
}
