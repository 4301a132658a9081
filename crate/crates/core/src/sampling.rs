//! Seeded random objects, instruments and measurements.
//!
//! All generators draw from ChaCha20 seeded with a 64-bit integer, so streams are
//! identical across platforms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::choi::{apply_choi, ChoiMatrix};
use crate::error::{Error, Result};
use crate::objects::{ObjectSet, ValidationReport};
use crate::operator::{CMat, Operator, C64};
use crate::par::Exec;
use crate::space::CompositeSpace;
use crate::transforms::TransformSpec;

pub type SeededRng = ChaCha20Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Complex Gaussian matrix with entries of unit variance.
pub fn ginibre<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * s, im * s)
    })
}

pub fn random_operator<R: Rng>(space: &CompositeSpace, rng: &mut R) -> Operator {
    let d = space.total_dim();
    Operator::from_parts(space.clone(), ginibre(d, d, rng))
}

pub fn random_hermitian<R: Rng>(space: &CompositeSpace, rng: &mut R) -> Operator {
    random_operator(space, rng).hermitian_part()
}

/// `G G†` for a `d × rank` Gaussian `G`.
pub fn random_psd<R: Rng>(space: &CompositeSpace, rank: usize, rng: &mut R) -> Operator {
    let d = space.total_dim();
    let g = ginibre(d, rank.max(1), rng);
    Operator::from_parts(space.clone(), &g * g.adjoint())
}

pub fn random_density<R: Rng>(space: &CompositeSpace, rng: &mut R) -> Operator {
    let p = random_psd(space, space.total_dim(), rng);
    let t = p.trace().re;
    p.scale_re(1.0 / t)
}

/// Haar-distributed `rows × cols` isometry (`rows ≥ cols`).
pub fn random_isometry<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Result<CMat> {
    if rows < cols {
        return Err(Error::BadDims(format!("no {rows}x{cols} isometry exists")));
    }
    let qr = ginibre(rows, cols, rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    for k in 0..cols {
        let z = r[(k, k)];
        let ph = if z.norm() > 0.0 { z / z.norm() } else { C64::new(1.0, 0.0) };
        let mut col = q.column_mut(k);
        col *= ph;
    }
    Ok(q)
}

pub fn random_unitary<R: Rng>(d: usize, rng: &mut R) -> CMat {
    random_isometry(d, d, rng).expect("square isometry exists")
}

/// Random member `W = γ·1/d + ε·H` of a set with a unital projector, where `H`
/// is a traceless Hermitian fixed point and `ε` is half the largest value keeping
/// `W` positive.
pub fn random_member<R: Rng>(set: &ObjectSet, rng: &mut R) -> Result<Operator> {
    if !set.projector.predicates()?.is_unital {
        return Err(Error::NonUnitalProjector);
    }
    let space = &set.space;
    let d = space.total_dim() as f64;
    let g = set.gamma_f64();
    let base = Operator::identity(space.clone()).scale_re(g / d);
    let h0 = random_hermitian(space, rng);
    let ph = set.projector.apply(&h0)?.hermitian_part();
    let ph = if set.projector.apply(&ph)?.distance(&ph)? <= 1e-9 * ph.frobenius_norm().max(1.0) {
        ph
    } else {
        Operator::zeros(space.clone())
    };
    let h = ph.sub(&Operator::identity(space.clone()).scale(ph.trace() / d))?;
    if h.frobenius_norm() <= 1e-12 || !set.require_psd {
        return base.add(&h);
    }
    let lmin = h.min_eigenvalue();
    let eps = if lmin < 0.0 && g > 0.0 { 0.5 * (g / d) / (-lmin) } else { 0.0 };
    base.add(&h.scale_re(eps))
}

/// A point of the affine set without positivity: `P[H]` rescaled to trace `γ`.
pub fn random_affine_point<R: Rng>(set: &ObjectSet, rng: &mut R) -> Result<Operator> {
    let g = set.gamma_f64();
    for _ in 0..8 {
        let x = set.projector.apply(&random_hermitian(&set.space, rng))?;
        let t = x.trace();
        if t.norm() > 1e-6 {
            return Ok(x.scale(C64::new(g, 0.0) / t));
        }
    }
    if g == 0.0 {
        return set.projector.apply(&random_hermitian(&set.space, rng));
    }
    Err(Error::HypothesisViolated("projector image has no element with nonzero trace".into()))
}

pub fn random_members(set: &ObjectSet, n: usize, seed: u64, exec: Exec) -> Result<Vec<Operator>> {
    exec.map_range(n, |k| {
        let mut rng = rng_from_seed(seed.wrapping_add(k as u64));
        random_member(set, &mut rng)
    })
    .into_iter()
    .collect()
}

/// Element of the image of `p` built from a random Hermitian operator.
pub fn random_in_span<R: Rng>(p: &crate::projmap::OpMap, rng: &mut R) -> Result<Operator> {
    p.apply(&random_hermitian(p.in_space(), rng))
}

/// Choi matrix of `ρ ↦ tr_env(V ρ V†)` for a random isometry `V`. The environment
/// dimension is raised to `⌈d_i/d_o⌉` when smaller.
pub fn random_cptp<R: Rng>(
    i: &CompositeSpace,
    o: &CompositeSpace,
    env_dim: usize,
    rng: &mut R,
) -> Result<ChoiMatrix> {
    if env_dim == 0 {
        return Err(Error::BadDims("environment dimension must be positive".into()));
    }
    let di = i.total_dim();
    let dout = o.total_dim();
    let de = env_dim.max(di.div_ceil(dout));
    let v = random_isometry(dout * de, di, rng)?;
    let space = i.concat(o)?;
    let mat = CMat::from_fn(di * dout, di * dout, |r, c| {
        let (j, a) = (r / dout, r % dout);
        let (k, b) = (c / dout, c % dout);
        (0..de).map(|e| v[(a * de + e, j)] * v[(b * de + e, k)].conj()).sum()
    });
    ChoiMatrix::new(Operator::new(space, mat)?, &i.labels(), &o.labels())
}

/// Elements of a probabilistic transformation.
#[derive(Clone, Debug)]
pub struct Instrument {
    pub elements: Vec<ChoiMatrix>,
    pub target: TransformSpec,
}

#[derive(Clone, Debug, Serialize)]
pub struct InstrumentReport {
    pub element_min_eigenvalues: Vec<f64>,
    pub elements_psd: bool,
    pub sum: ValidationReport,
    pub pass: bool,
}

pub fn validate_instrument(ins: &Instrument, tol: f64) -> Result<InstrumentReport> {
    let first = ins.elements.first().ok_or_else(|| Error::BadDims("empty instrument".into()))?;
    let mut sum = Operator::zeros(first.op().space().clone());
    let mut eigs = Vec::with_capacity(ins.elements.len());
    let mut psd = true;
    for e in &ins.elements {
        if e.in_space() != first.in_space() || e.out_space() != first.out_space() {
            return Err(Error::SpaceMismatch("instrument elements live on different spaces".into()));
        }
        let m = e.op().min_eigenvalue();
        psd &= e.op().is_hermitian(tol) && m >= -tol * e.op().spectral_norm();
        eigs.push(m);
        sum = sum.add(e.op())?;
    }
    let report = ins.target.result.validate_tol(&sum, tol)?;
    Ok(InstrumentReport { element_min_eigenvalues: eigs, elements_psd: psd, pass: psd && report.pass, sum: report })
}

fn psd_power(a: &Operator, p: f64) -> Operator {
    let h = a.hermitian_part();
    let eig = h.matrix().clone().symmetric_eigen();
    let top = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let d = h.dim();
    let mut out = CMat::zeros(d, d);
    for k in 0..d {
        let l = eig.eigenvalues[k];
        if l > 1e-12 * top.max(1.0) {
            let v = eig.eigenvectors.column(k);
            out += (v * v.adjoint()) * C64::new(l.powf(p), 0.0);
        }
    }
    Operator::from_parts(h.space().clone(), out)
}

/// Random `n`-outcome instrument `T_i = C^{1/2} M_i C^{1/2}` around a random
/// deterministic member `C` of the target, with `{M_i}` a random POVM.
pub fn random_instrument<R: Rng>(target: &TransformSpec, n: usize, rng: &mut R) -> Result<Instrument> {
    let set = target.result.as_object().ok_or_else(|| {
        Error::HypothesisViolated("instrument sampling needs a scalar trace condition".into())
    })?;
    let c = random_member(set, rng)?;
    let space = set.space.clone();
    let gs: Vec<Operator> = (0..n.max(1)).map(|_| random_psd(&space, space.total_dim(), rng)).collect();
    let mut s = Operator::zeros(space.clone());
    for g in &gs {
        s = s.add(g)?;
    }
    let s_inv_half = psd_power(&s, -0.5);
    let c_half = psd_power(&c, 0.5);
    let input = target.input.space.labels();
    let output = target.output.space.labels();
    let elements = gs
        .iter()
        .map(|g| {
            let m = s_inv_half.mul(g)?.mul(&s_inv_half)?;
            let t = c_half.mul(&m)?.mul(&c_half)?.hermitian_part();
            ChoiMatrix::new(t, &input, &output)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Instrument { elements, target: target.clone() })
}

/// Effects `M_i` with `p(i) = tr(M_i W)`.
#[derive(Clone, Debug)]
pub struct Measurement {
    pub effects: Vec<Operator>,
    pub target_set: ObjectSet,
}

/// `M_i = (tr_o T_i)ᵀ`, the adjoint of element `i` applied to the identity.
pub fn measurement_from_instrument(ins: &Instrument) -> Result<Measurement> {
    let effects = ins.elements.iter().map(|e| e.effect()).collect::<Result<Vec<_>>>()?;
    Ok(Measurement { effects, target_set: ins.target.input.clone() })
}

#[derive(Clone, Debug, Serialize)]
pub struct OutcomeProbabilities {
    pub probabilities: Vec<f64>,
    pub sum: f64,
    /// The probed operator failed membership of the target set.
    pub not_a_member: bool,
}

pub fn outcome_probs(w: &Operator, m: &Measurement) -> Result<OutcomeProbabilities> {
    if !w.space().same_set(&m.target_set.space) {
        return Err(Error::SpaceMismatch(format!("{} vs {}", w.space(), m.target_set.space)));
    }
    let probabilities = m.effects.iter().map(|e| e.trace_product(w).map(|z| z.re)).collect::<Result<Vec<_>>>()?;
    let not_a_member = !m.target_set.validate_tol(w, 1e-8)?.pass;
    Ok(OutcomeProbabilities { sum: probabilities.iter().sum(), probabilities, not_a_member })
}

/// Outcome probabilities computed through the Choi action, `tr T_i[W]`.
pub fn instrument_probs(ins: &Instrument, w: &Operator) -> Result<Vec<f64>> {
    ins.elements.iter().map(|e| apply_choi(e, w).map(|y| y.trace().re)).collect()
}

/// Orthogonal projector onto the joint support of the deterministic members.
/// Unital projectors admit a full-rank member, so the support is everything.
pub fn support_projector(set: &ObjectSet) -> Result<Operator> {
    if !set.projector.predicates()?.is_unital {
        return Err(Error::NonUnitalProjector);
    }
    Ok(Operator::identity(set.space.clone()))
}

/// `‖Π T Π − T‖_F` for the support projector `Π`.
pub fn support_residual(set: &ObjectSet, t: &Operator) -> Result<f64> {
    let pi = support_projector(set)?;
    pi.mul(t)?.mul(&pi)?.distance(t)
}
