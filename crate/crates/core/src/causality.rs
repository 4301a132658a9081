//! Exact signalling analysis of projector-defined sets.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::objects::{Characterization, ObjectSet};
use crate::par::Exec;
use crate::projmap::SubsetMap;
use crate::rational::q_fmt;
use crate::sampling::{random_operator, rng_from_seed};
use crate::space::{CompositeSpace, Label};

/// `_lhs T = _rhs T` for every `T` in the image of a projector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CausalCondition {
    pub lhs: Vec<Label>,
    pub rhs: Vec<Label>,
}

impl CausalCondition {
    pub fn new(lhs: Vec<Label>, rhs: Vec<Label>) -> Result<Self> {
        if let Some(l) = lhs.iter().find(|l| !rhs.contains(l)) {
            return Err(Error::HypothesisViolated(format!("label {l} of the left subset is missing on the right")));
        }
        Ok(CausalCondition { lhs, rhs })
    }

    /// `_c T = _{x c} T`.
    pub fn discard_with(candidate: &Label, partner: &Label) -> Self {
        CausalCondition { lhs: vec![candidate.clone()], rhs: vec![partner.clone(), candidate.clone()] }
    }
}

fn symbolic(set: &Characterization) -> Result<&SubsetMap> {
    set.projector()
        .as_symbolic()
        .ok_or_else(|| Error::HypothesisViolated("causality analysis needs a symbolic projector".into()))
}

/// `(_lhs − _rhs) ∘ P` in the subset algebra.
pub fn condition_residual(p: &SubsetMap, c: &CausalCondition) -> Result<SubsetMap> {
    let l = SubsetMap::trace_replace(p.space().clone(), &c.lhs)?;
    let r = SubsetMap::trace_replace(p.space().clone(), &c.rhs)?;
    l.sub(&r)?.compose(p)
}

/// Exact test: the residual map vanishes.
pub fn condition_holds(set: &Characterization, c: &CausalCondition) -> Result<bool> {
    Ok(condition_residual(symbolic(set)?, c)?.is_zero())
}

/// Largest `‖(_lhs − _rhs)[P[X]]‖_F` over random operators `X`.
pub fn numeric_shadow(set: &Characterization, c: &CausalCondition, samples: usize, seed: u64, exec: Exec) -> Result<f64> {
    let p = set.projector();
    let space = set.space().clone();
    let l = SubsetMap::trace_replace(space.clone(), &c.lhs)?;
    let r = SubsetMap::trace_replace(space.clone(), &c.rhs)?;
    let diff = l.sub(&r)?;
    let vals = exec.map_range(samples, |k| -> Result<f64> {
        let mut rng = rng_from_seed(seed.wrapping_add(k as u64));
        let x = random_operator(&space, &mut rng);
        let y = p.apply(&x)?;
        Ok(diff.apply(&y)?.frobenius_norm())
    });
    vals.into_iter().try_fold(0.0f64, |m, v| Ok(m.max(v?)))
}

#[derive(Clone, Debug, Serialize)]
pub struct PartnerResult {
    pub partner: Label,
    pub holds: bool,
    /// Nonzero terms of the residual map as `(subset, coefficient)`.
    pub residual: Vec<(Vec<Label>, String)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FinalOutputReport {
    pub candidate: Label,
    pub partners: Vec<PartnerResult>,
    /// Some partner `x` satisfies `_c T = _{x c} T` on the whole set.
    pub is_final: bool,
}

/// Tests whether `candidate` can be the last output: discarding it must coincide
/// with discarding it together with one of the `partners`.
pub fn is_final_output(set: &Characterization, candidate: &Label, partners: &[Label]) -> Result<FinalOutputReport> {
    let p = symbolic(set)?;
    if !p.space().contains(candidate) {
        return Err(Error::UnknownLabel(candidate.0.clone()));
    }
    let mut results = Vec::with_capacity(partners.len());
    for x in partners {
        if !p.space().contains(x) {
            return Err(Error::UnknownLabel(x.0.clone()));
        }
        let res = condition_residual(p, &CausalCondition::discard_with(candidate, x))?;
        results.push(PartnerResult {
            partner: x.clone(),
            holds: res.is_zero(),
            residual: res.terms().into_iter().map(|(s, c)| (s, q_fmt(&c))).collect(),
        });
    }
    let is_final = results.iter().any(|r| r.holds);
    Ok(FinalOutputReport { candidate: candidate.clone(), partners: results, is_final })
}

#[derive(Clone, Debug, Serialize)]
pub struct SurveyReport {
    pub entries: Vec<FinalOutputReport>,
    pub admissible: Vec<Label>,
    /// No candidate output is final, so the set admits causally disordered elements.
    pub causally_disordered: bool,
}

impl SurveyReport {
    pub fn verdict(&self) -> String {
        if self.causally_disordered {
            "no admissible final output".into()
        } else {
            let ls: Vec<&str> = self.admissible.iter().map(|l| l.as_str()).collect();
            format!("admissible final output: {}", ls.join(", "))
        }
    }
}

/// Runs [`is_final_output`] for every output against all inputs.
pub fn causal_order_survey(set: &Characterization, outputs: &[Label], inputs: &[Label]) -> Result<SurveyReport> {
    causal_order_survey_exec(set, outputs, inputs, Exec::Sequential)
}

pub fn causal_order_survey_exec(
    set: &Characterization,
    outputs: &[Label],
    inputs: &[Label],
    exec: Exec,
) -> Result<SurveyReport> {
    let entries: Vec<FinalOutputReport> =
        exec.map(outputs, |o| is_final_output(set, o, inputs)).into_iter().collect::<Result<_>>()?;
    let admissible: Vec<Label> = entries.iter().filter(|e| e.is_final).map(|e| e.candidate.clone()).collect();
    Ok(SurveyReport { causally_disordered: admissible.is_empty(), admissible, entries })
}

/// Survey using the input and output roles recorded on the set.
pub fn survey_by_roles(set: &Characterization) -> Result<SurveyReport> {
    let r = set.roles().clone();
    causal_order_survey(set, &r.outputs, &r.inputs)
}

/// Inputs that precede `candidate` in a comb with the given teeth order.
pub fn partners_from_comb(teeth: &[(CompositeSpace, CompositeSpace)], candidate: &Label) -> Result<Vec<Label>> {
    let mut seen = Vec::new();
    for (i, o) in teeth {
        seen.extend(i.labels());
        if o.contains(candidate) {
            return Ok(seen);
        }
    }
    Err(Error::UnknownLabel(candidate.0.clone()))
}

/// For an object set with recorded roles.
pub fn survey_object(set: &ObjectSet) -> Result<SurveyReport> {
    survey_by_roles(&Characterization::Object(set.clone()))
}

#[cfg(test)]
mod tests;
