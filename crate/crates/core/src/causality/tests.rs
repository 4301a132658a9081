use super::*;
use crate::objects::{channel_set, comb_set, nonsignalling_set, process_matrix_set};
use crate::testutil::{ls, qubits, subset_map};
use crate::transforms::build_transform_space;

fn q1(l: &str) -> CompositeSpace {
    qubits(&[l])
}

fn l(s: &str) -> Label {
    Label::from(s)
}

fn superchannel() -> Characterization {
    Characterization::Object(comb_set(&[(q1("1"), q1("2")), (q1("3"), q1("4"))]).unwrap())
}

fn sup_to_sup() -> Characterization {
    let a = comb_set(&[(q1("1"), q1("2")), (q1("3"), q1("4"))]).unwrap();
    let b = comb_set(&[(q1("0"), q1("5")), (q1("6"), q1("7"))]).unwrap();
    build_transform_space(&a, &b).unwrap().result
}

#[test]
fn superchannel_conditions_hold() {
    let s = superchannel();
    assert!(condition_holds(&s, &CausalCondition::new(ls(&["4"]), ls(&["3", "4"])).unwrap()).unwrap());
    assert!(condition_holds(&s, &CausalCondition::new(ls(&["2", "3", "4"]), ls(&["1", "2", "3", "4"])).unwrap()).unwrap());
    assert!(!condition_holds(&s, &CausalCondition::new(ls(&["2"]), ls(&["1", "2"])).unwrap()).unwrap());
}

#[test]
fn superchannel_final_output() {
    let s = superchannel();
    let r = is_final_output(&s, &l("4"), &ls(&["3"])).unwrap();
    assert!(r.is_final);
    let r = is_final_output(&s, &l("4"), &ls(&["2"])).unwrap();
    assert!(!r.is_final);
    let terms: Vec<(Vec<Label>, String)> = r.partners[0].residual.clone();
    assert_eq!(terms, vec![(ls(&["3", "4"]), "1".to_string()), (ls(&["2", "3", "4"]), "-1".to_string())]);
    let survey = survey_by_roles(&s).unwrap();
    assert!(!survey.causally_disordered);
    assert_eq!(survey.admissible, ls(&["4"]));
    assert_eq!(survey.verdict(), "admissible final output: 4");
}

#[test]
fn sup_to_sup_has_no_final_output() {
    let s = sup_to_sup();
    let inputs = ls(&["0", "2", "4", "6"]);
    let r = is_final_output(&s, &l("7"), &inputs).unwrap();
    assert!(!r.is_final);
    assert!(r.partners.iter().all(|p| !p.holds && !p.residual.is_empty()));
    for c in ["7", "1", "5", "3"] {
        assert!(!is_final_output(&s, &l(c), &inputs).unwrap().is_final, "candidate {c}");
    }
    let survey = survey_by_roles(&s).unwrap();
    assert!(survey.causally_disordered);
    assert_eq!(survey.entries.len(), 4);
    assert_eq!(survey.verdict(), "no admissible final output");
}

#[test]
fn sup_to_sup_residual_matches_closed_form() {
    let s = sup_to_sup();
    let p = s.projector().as_symbolic().unwrap();
    let res = condition_residual(p, &CausalCondition::discard_with(&l("7"), &l("4"))).unwrap();
    let rhs = subset_map(
        p.space().clone(),
        &[(&["6", "7"], 1), (&["4", "6", "7"], -1), (&["5", "6", "7"], -1), (&["4", "5", "6", "7"], 1)],
    )
    .compose(p)
    .unwrap();
    assert_eq!(res, rhs);
    assert!(!res.is_zero());
}

#[test]
fn process_matrices_are_not_causally_ordered() {
    let pm = Characterization::Object(process_matrix_set(&[(q1("1"), q1("2")), (q1("3"), q1("4"))]).unwrap());
    let survey = causal_order_survey(&pm, &ls(&["2", "4"]), &ls(&["1", "3"])).unwrap();
    assert!(survey.causally_disordered);
    let par = causal_order_survey_exec(&pm, &ls(&["2", "4"]), &ls(&["1", "3"]), Exec::Parallel).unwrap();
    assert_eq!(par.admissible, survey.admissible);
}

#[test]
fn nonsignalling_parties() {
    let ns = Characterization::Object(nonsignalling_set(&[(q1("1"), q1("2")), (q1("3"), q1("4"))]).unwrap());
    assert!(condition_holds(&ns, &CausalCondition::new(ls(&["2"]), ls(&["1", "2"])).unwrap()).unwrap());
    assert!(condition_holds(&ns, &CausalCondition::new(ls(&["4"]), ls(&["3", "4"])).unwrap()).unwrap());
    let ch = Characterization::Object(channel_set(&qubits(&["1", "3"]), &qubits(&["2", "4"])).unwrap());
    assert!(!condition_holds(&ch, &CausalCondition::new(ls(&["4"]), ls(&["3", "4"])).unwrap()).unwrap());
}

#[test]
fn numeric_shadow_agrees_with_exact_verdict() {
    let s = superchannel();
    let holds = CausalCondition::new(ls(&["4"]), ls(&["3", "4"])).unwrap();
    let fails = CausalCondition::new(ls(&["4"]), ls(&["2", "4"])).unwrap();
    assert!(numeric_shadow(&s, &holds, 20, 1, Exec::Parallel).unwrap() < 1e-10);
    assert!(numeric_shadow(&s, &fails, 20, 1, Exec::Sequential).unwrap() > 1e-3);
    let seq = numeric_shadow(&s, &fails, 20, 1, Exec::Sequential).unwrap();
    let par = numeric_shadow(&s, &fails, 20, 1, Exec::Parallel).unwrap();
    assert_eq!(seq, par);
}

#[test]
fn comb_partners_and_errors() {
    let teeth = vec![(q1("1"), q1("2")), (q1("3"), q1("4"))];
    assert_eq!(partners_from_comb(&teeth, &l("4")).unwrap(), ls(&["1", "3"]));
    assert_eq!(partners_from_comb(&teeth, &l("2")).unwrap(), ls(&["1"]));
    assert!(matches!(partners_from_comb(&teeth, &l("9")), Err(Error::UnknownLabel(_))));
    assert!(matches!(is_final_output(&superchannel(), &l("9"), &ls(&["1"])), Err(Error::UnknownLabel(_))));
    assert!(CausalCondition::new(ls(&["4"]), ls(&["3"])).is_err());
    let dense = Characterization::Object(crate::objects::ObjectSet {
        projector: crate::projmap::OpMap::Dense(crate::projmap::DenseSuperMap::identity(q1("a"))),
        ..crate::objects::state_set(&q1("a"))
    });
    assert!(matches!(is_final_output(&dense, &l("a"), &[]), Err(Error::HypothesisViolated(_))));
}
