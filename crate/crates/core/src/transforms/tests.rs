use super::*;
use crate::choi::{apply_choi, link};
use crate::objects::{channel_set, comb_set, state_set, tensor_set};
use crate::projmap::DenseSuperMap;
use crate::rational::q;
use crate::sampling::{random_cptp, random_hermitian, random_psd};
use crate::space::Label;
use crate::testutil::{ls, off_diagonal, qubits, subset_map};

fn q1(l: &str) -> CompositeSpace {
    qubits(&[l])
}

fn object(t: &TransformSpec) -> &ObjectSet {
    t.result.as_object().unwrap()
}

fn superchannel(a: &str, b: &str, c: &str, d: &str) -> ObjectSet {
    comb_set(&[(q1(a), q1(b)), (q1(c), q1(d))]).unwrap()
}

fn sup_to_sup_projector() -> SubsetMap {
    let terms: Vec<(&[&str], i64)> = vec![
        (&[], 1),
        (&["7"], -1),
        (&["4", "7"], 1),
        (&["6", "7"], 1),
        (&["3", "4", "7"], -1),
        (&["4", "6", "7"], -1),
        (&["5", "6", "7"], -1),
        (&["2", "3", "4", "7"], 1),
        (&["3", "4", "6", "7"], 1),
        (&["4", "5", "6", "7"], 1),
        (&["1", "2", "3", "4", "7"], -1),
        (&["2", "3", "4", "6", "7"], -1),
        (&["3", "4", "5", "6", "7"], -1),
        (&["1", "2", "3", "4", "6", "7"], 1),
        (&["2", "3", "4", "5", "6", "7"], 1),
        (&["1", "2", "3", "4", "5", "6", "7"], -1),
        (&["0", "1", "2", "3", "4", "5", "6", "7"], 1),
    ];
    subset_map(qubits(&["1", "2", "3", "4", "0", "5", "6", "7"]), &terms)
}

#[test]
fn states_to_states_are_channels() {
    let t = build_transform_space(&state_set(&q1("i")), &state_set(&q1("o"))).unwrap();
    let ch = channel_set(&q1("i"), &q1("o")).unwrap();
    assert_eq!(object(&t).symbolic_projector(), ch.symbolic_projector());
    assert_eq!(object(&t).gamma, ch.gamma);
    assert_eq!(t.route, Route::Specialised);
    assert_eq!(object(&t).roles, ch.roles);
}

#[test]
fn channels_to_channels_are_superchannels() {
    let t = build_transform_space(&channel_set(&q1("2"), &q1("3")).unwrap(), &channel_set(&q1("1"), &q1("4")).unwrap())
        .unwrap();
    let s = superchannel("1", "2", "3", "4");
    let got = object(&t);
    assert_eq!(got.symbolic_projector().unwrap().lift_to(&s.space).unwrap(), *s.symbolic_projector().unwrap());
    assert_eq!(got.gamma, Gamma::dims_of(&ls(&["1", "3"])));
    assert_eq!(got.symbolic_projector().unwrap().num_terms(), 5);
}

#[test]
fn one_slot_comb_from_channel_to_channel_with_trivial_input() {
    let t = build_transform_space(&channel_set(&q1("1"), &q1("2")).unwrap(), &state_set(&q1("3"))).unwrap();
    let expected = subset_map(qubits(&["1", "2", "3"]), &[(&[], 1), (&["3"], -1), (&["2", "3"], 1)]);
    assert_eq!(object(&t).symbolic_projector().unwrap(), &expected);
    assert_eq!(object(&t).gamma, Gamma::dims_of(&ls(&["2"])));
}

#[test]
fn process_matrix_from_channels_to_scalars() {
    let ch = tensor_set(&channel_set(&q1("1"), &q1("2")).unwrap(), &channel_set(&q1("3"), &q1("4")).unwrap()).unwrap();
    let t = build_transform_space(&ch, &state_set(&CompositeSpace::trivial())).unwrap();
    let pm = crate::objects::process_matrix_set(&[(q1("1"), q1("2")), (q1("3"), q1("4"))]).unwrap();
    assert_eq!(object(&t).symbolic_projector(), pm.symbolic_projector());
    assert_eq!(object(&t).gamma, Gamma::dims_of(&ls(&["2", "4"])));
}

#[test]
fn process_matrix_revisited() {
    let out = comb_set(&[(CompositeSpace::trivial(), q1("3")), (q1("4"), CompositeSpace::trivial())]).unwrap();
    assert_eq!(out.symbolic_projector().unwrap(), &subset_map(qubits(&["3", "4"]), &[(&["4"], 1)]));
    assert_eq!(out.gamma, Gamma::dims_of(&ls(&["4"])));
    let t = build_transform_space(&channel_set(&q1("1"), &q1("2")).unwrap(), &out).unwrap();
    let pm = crate::objects::process_matrix_set(&[(q1("1"), q1("2")), (q1("3"), q1("4"))]).unwrap();
    assert_eq!(object(&t).symbolic_projector(), pm.symbolic_projector());
    assert_eq!(object(&t).gamma, Gamma::dims_of(&ls(&["2", "4"])));
}

#[test]
fn superchannels_to_superchannels() {
    let t = build_transform_space(&superchannel("1", "2", "3", "4"), &superchannel("0", "5", "6", "7")).unwrap();
    let got = object(&t);
    assert_eq!(got.symbolic_projector().unwrap(), &sup_to_sup_projector());
    assert_eq!(got.symbolic_projector().unwrap().num_terms(), 17);
    assert_eq!(got.gamma, Gamma::dims_of(&ls(&["0", "2", "4", "6"])));
    assert_eq!(got.roles.inputs, ls(&["2", "4", "0", "6"]));
    assert_eq!(got.roles.outputs, ls(&["1", "3", "5", "7"]));
    assert!(got.symbolic_projector().unwrap().predicates().is_nice());
}

#[test]
fn five_term_map_matches_naive_expansion() {
    let s_in = superchannel("1", "2", "3", "4");
    let s_out = channel_set(&q1("a"), &q1("b")).unwrap();
    let t = build_transform_space(&s_in, &s_out).unwrap();
    let space = s_in.space.concat(&s_out.space).unwrap();
    let pi = s_in.symbolic_projector().unwrap().extend(&s_out.space).unwrap();
    let po = s_in.symbolic_projector().unwrap().tensor(s_out.symbolic_projector().unwrap()).unwrap();
    let tr_o = SubsetMap::trace_replace(space.clone(), &s_out.space.labels()).unwrap();
    let tr_all = SubsetMap::trace_replace(space.clone(), &space.labels()).unwrap();
    let naive = SubsetMap::identity(space).sub(&pi).unwrap().add(&po).unwrap().sub(&pi.compose(&tr_o).unwrap()).unwrap().add(&tr_all).unwrap();
    assert_eq!(object(&t).symbolic_projector().unwrap(), &naive);
}

#[test]
fn linear_superchannel_example() {
    let ch_in = channel_set(&q1("2"), &q1("3")).unwrap();
    let ch_out = channel_set(&q1("1"), &q1("4")).unwrap();
    let lin = build_transform_space_linear(&ch_in.projector, &ch_out.projector).unwrap();
    let target = qubits(&["1", "2", "3", "4"]);
    let got = lin.as_symbolic().unwrap().lift_to(&target).unwrap();
    let expected = subset_map(
        target.clone(),
        &[
            (&[], 1),
            (&["4"], -1),
            (&["1", "4"], 1),
            (&["3", "4"], 1),
            (&["1", "3", "4"], -1),
            (&["2", "3", "4"], -1),
            (&["1", "2", "3", "4"], 1),
        ],
    );
    assert_eq!(got, expected);

    let affine = build_transform_space(&ch_in, &ch_out).unwrap();
    let five = object(&affine).symbolic_projector().unwrap().lift_to(&target).unwrap();
    assert_ne!(got, five);
}

#[test]
fn linear_process_matrix_example() {
    let out = comb_set(&[(CompositeSpace::trivial(), q1("3")), (q1("4"), CompositeSpace::trivial())]).unwrap();
    let lin = build_transform_space_linear(&channel_set(&q1("1"), &q1("2")).unwrap().projector, &out.projector).unwrap();
    let expected = subset_map(
        qubits(&["1", "2", "3", "4"]),
        &[(&["2"], 1), (&["4"], 1), (&["2", "4"], -1), (&["1", "2"], -1), (&["1", "2", "4"], 1)],
    );
    assert_eq!(lin.as_symbolic().unwrap(), &expected);

    let id = build_transform_space_linear(&OpMap::identity(q1("a")), &OpMap::identity(q1("b"))).unwrap();
    assert_eq!(id.as_symbolic().unwrap(), &SubsetMap::identity(qubits(&["a", "b"])));
}

#[test]
fn linear_transform_characterization() {
    let a = Characterization::Object(channel_set(&q1("2"), &q1("3")).unwrap());
    let b = Characterization::Object(channel_set(&q1("1"), &q1("4")).unwrap());
    let l = linear_transform(&a, &b).unwrap();
    assert!(matches!(l, Characterization::Linear(_)));
    assert_eq!(l.roles().inputs, ls(&["3", "1"]));
}

#[test]
fn general_route_agrees_with_specialised() {
    let s_in = channel_set(&q1("2"), &q1("3")).unwrap();
    let s_out = channel_set(&q1("1"), &q1("4")).unwrap();
    let a = build_transform_space(&s_in, &s_out).unwrap();
    let b = build_transform_space_general(&s_in, &s_out).unwrap();
    assert_eq!(b.route, Route::General);
    let mut rng = rng_from_seed(11);
    // The projectors differ off the affine set; the member sets coincide.
    let x = random_operator(a.result.space(), &mut rng);
    let pa = a.result.projector().apply(&x).unwrap();
    let pb = b.result.projector().apply(&x).unwrap();
    assert!(pa.distance(&pb).unwrap() > 1e-6);
    // Members of one are members of the other.
    let spec_obj = object(&a);
    for _ in 0..5 {
        let h = random_hermitian(&spec_obj.space, &mut rng);
        let p = spec_obj.projector.apply(&h).unwrap();
        let w = p.add(&Operator::identity(spec_obj.space.clone()).scale_re(
            (spec_obj.gamma_f64() - p.trace().re) / spec_obj.space.total_dim() as f64,
        ))
        .unwrap();
        let ra = a.result.validate(&w).unwrap();
        let rb = b.result.validate(&w).unwrap();
        assert!(ra.projector_pass && ra.trace_pass);
        assert!(rb.projector_pass && rb.trace_pass);
    }
}

#[test]
fn identity_projectors_leave_only_trace_equation() {
    let a = ObjectSet {
        name: "all".into(),
        space: q1("a"),
        projector: OpMap::identity(q1("a")),
        gamma: Gamma::one(),
        require_psd: false,
        roles: Default::default(),
    };
    let b = ObjectSet { name: "all_b".into(), space: q1("b"), projector: OpMap::identity(q1("b")), ..a.clone() };
    let t = build_transform_space_general(&a, &b).unwrap();
    assert_eq!(t.result.projector().as_symbolic().unwrap(), &SubsetMap::identity(qubits(&["a", "b"])));
    let Characterization::Affine(aff) = &t.result else { panic!("expected affine result") };
    assert!(aff.equation.rhs.approx_eq(&Operator::identity(q1("a")), 1e-12));
}

#[test]
fn off_diagonal_general_projector() {
    let pi = OpMap::Dense(off_diagonal(q1("i"), 0, 1));
    let po = OpMap::Dense(off_diagonal(q1("o"), 1, 0));
    let p = general_linear(&pi, &po).unwrap();
    let space = qubits(&["i", "o"]);
    let proj = |a: usize, b: usize| Operator::unit(space.clone(), a, b);
    let mut rng = rng_from_seed(13);
    for _ in 0..5 {
        let t = random_operator(&space, &mut rng);
        let mm = Operator::unit(q1("i"), 0, 0).extend(&q1("o")).unwrap();
        let nn = Operator::unit(q1("i"), 1, 1).extend(&q1("o")).unwrap();
        // |m α⟩ = |0 1⟩ (index 1), |n β⟩ = |1 0⟩ (index 2)
        let closed = t
            .sub(&mm.mul(&t).unwrap().mul(&nn).unwrap())
            .unwrap()
            .add(&proj(1, 1).mul(&t).unwrap().mul(&proj(2, 2)).unwrap())
            .unwrap();
        assert!(p.apply(&t).unwrap().distance(&closed).unwrap() < 1e-12);
    }
    let d = p.to_dense(64).unwrap();
    assert!(d.compose(&d).unwrap().max_deviation(&d).unwrap() < 1e-12);
}

#[test]
fn fallback_order() {
    let oblique = DenseSuperMap::from_map(q1("a"), q1("a"), |m| Ok(Operator::unit(q1("a"), 0, 0).scale(m.trace()))).unwrap();
    let s_in = ObjectSet {
        name: "pinned".into(),
        space: q1("a"),
        projector: OpMap::Dense(oblique),
        gamma: Gamma::one(),
        require_psd: true,
        roles: Default::default(),
    };
    let s_out = state_set(&q1("b"));
    assert!(matches!(build_transform_space(&s_in, &s_out), Err(Error::HypothesisViolated(_))));
    assert_eq!(build_transform(&s_in, &s_out).unwrap().route, Route::General);

    let zero = ObjectSet { gamma: Gamma::zero(), ..state_set(&q1("a")) };
    assert!(matches!(build_transform_space(&zero, &s_out), Err(Error::ZeroGammaIn)));
    assert_eq!(build_transform(&zero, &s_out).unwrap().route, Route::Traceless);
    assert_eq!(build_transform(&state_set(&q1("a")), &s_out).unwrap().route, Route::Specialised);

    let zero_out = ObjectSet { gamma: Gamma::zero(), ..s_out };
    let t = build_transform_space(&state_set(&q1("a")), &zero_out).unwrap();
    assert_eq!(t.warnings.len(), 1);
}

#[test]
fn traceless_projector_dimensions() {
    let id = ObjectSet { gamma: Gamma::zero(), ..state_set(&q1("a")) };
    let p = build_traceless_projector(&id).unwrap().to_dense(64).unwrap();
    assert_eq!(p.rank(1e-9), 3);
    let x = Operator::identity(q1("a"));
    assert!(p.apply(&x).unwrap().frobenius_norm() < 1e-12);

    let ch = ObjectSet { gamma: Gamma::zero(), ..channel_set(&q1("i"), &q1("o")).unwrap() };
    let p = build_traceless_projector(&ch).unwrap().to_dense(64).unwrap();
    assert_eq!(p.rank(1e-9), 12);
    assert!(p.compose(&p).unwrap().max_deviation(&p).unwrap() < 1e-10);

    let one = ObjectSet {
        name: "span1".into(),
        space: q1("a"),
        projector: OpMap::Symbolic(SubsetMap::trace_replace(q1("a"), &ls(&["a"])).unwrap()),
        gamma: Gamma::zero(),
        require_psd: true,
        roles: Default::default(),
    };
    let p = build_traceless_projector(&one).unwrap().to_dense(64).unwrap();
    assert_eq!(p.rank(1e-9), 0);
    assert!(matches!(build_traceless_projector_budget(&ch, 2), Err(Error::BudgetExceeded { .. })));
}

#[test]
fn traceless_transform_maps_traceless_inputs() {
    let zero = ObjectSet { gamma: Gamma::zero(), ..state_set(&q1("a")) };
    let t = build_traceless_transform(&zero, &state_set(&q1("b"))).unwrap();
    assert_eq!(t.rescale, Gamma::zero());
    let p = t.result.projector().to_dense(64).unwrap();
    assert!(p.compose(&p).unwrap().max_deviation(&p).unwrap() < 1e-10);
    // Any map that sends traceless inputs to zero lies in the span.
    let fixed = Operator::identity(qubits(&["a", "b"]));
    assert!(p.apply(&fixed).unwrap().distance(&fixed).unwrap() < 1e-10);
}

fn superchannel_construct(rng: &mut crate::sampling::SeededRng) -> ChoiMatrix {
    let env = CompositeSpace::new([("m", 2)]).unwrap();
    let pre = random_cptp(&q1("1"), &q1("2").concat(&env).unwrap(), 2, rng).unwrap();
    let post = random_cptp(&q1("3").concat(&env).unwrap(), &q1("4"), 2, rng).unwrap();
    let t = link(pre.op(), post.op()).unwrap();
    ChoiMatrix::new(t, &ls(&["2", "3"]), &ls(&["1", "4"])).unwrap()
}

#[test]
fn map_version_accepts_superchannel_construct() {
    let spec = build_transform_space(&channel_set(&q1("2"), &q1("3")).unwrap(), &channel_set(&q1("1"), &q1("4")).unwrap())
        .unwrap();
    let mut rng = rng_from_seed(17);
    for _ in 0..3 {
        let t = superchannel_construct(&mut rng);
        let r = check_map_version(&t, &spec, 8, 1, 1e-9, Exec::Parallel).unwrap();
        assert!(r.exhaustive && r.n_inputs == 16);
        assert!(r.pass && r.choi_membership && r.consistent, "{r:?}");
        assert!(spec.result.validate(t.op()).unwrap().pass);

        let rho = random_cptp(&q1("2"), &q1("3"), 2, &mut rng).unwrap();
        let out = apply_choi(&t, rho.op()).unwrap();
        assert!(spec.output.validate(&out).unwrap().pass);
    }
}

#[test]
fn map_version_rejects_non_member() {
    let spec = build_transform_space(&channel_set(&q1("2"), &q1("3")).unwrap(), &channel_set(&q1("1"), &q1("4")).unwrap())
        .unwrap();
    let mut rng = rng_from_seed(19);
    let w = random_psd(&qubits(&["1", "2", "3", "4"]), 16, &mut rng);
    let w = w.scale_re(4.0 / w.trace().re);
    let t = ChoiMatrix::new(w, &ls(&["2", "3"]), &ls(&["1", "4"])).unwrap();
    let r = check_map_version(&t, &spec, 8, 1, 1e-9, Exec::Sequential).unwrap();
    assert!(!r.pass && !r.choi_membership && r.consistent);
    assert!(r.projector_residual > 1e-3);
}

#[test]
fn map_version_identity_channel_on_states() {
    let spec = build_transform_space(&state_set(&q1("i")), &state_set(&q1("o"))).unwrap();
    let t = ChoiMatrix::new(Operator::max_entangled(qubits(&["i", "o"])).unwrap(), &ls(&["i"]), &ls(&["o"])).unwrap();
    let r = check_map_version(&t, &spec, 8, 1, 1e-9, Exec::Sequential).unwrap();
    assert!(r.pass && r.consistent);
    let wrong = ChoiMatrix::new(Operator::max_entangled(qubits(&["i", "x"])).unwrap(), &ls(&["i"]), &ls(&["x"])).unwrap();
    assert!(matches!(check_map_version(&wrong, &spec, 8, 1, 1e-9, Exec::Sequential), Err(Error::SpaceMismatch(_))));
}

#[test]
fn map_version_sampled_for_large_inputs() {
    let s_in = state_set(&CompositeSpace::new([("i", 17)]).unwrap());
    let s_out = state_set(&q1("o"));
    let spec = build_transform_space(&s_in, &s_out).unwrap();
    let mut rng = rng_from_seed(23);
    let t = random_cptp(&s_in.space, &s_out.space, 3, &mut rng).unwrap();
    let r = check_map_version(&t, &spec, 12, 5, 1e-9, Exec::Parallel).unwrap();
    assert!(!r.exhaustive && r.n_inputs == 12 && r.pass && r.consistent);
}

#[test]
fn choi_level_members_map_inputs_into_outputs() {
    let s_in = channel_set(&q1("2"), &q1("3")).unwrap();
    let s_out = channel_set(&q1("1"), &q1("4")).unwrap();
    let spec = build_transform_space(&s_in, &s_out).unwrap();
    let obj = object(&spec);
    let mut rng = rng_from_seed(29);
    for _ in 0..10 {
        let h = random_hermitian(&obj.space, &mut rng);
        let p = obj.projector.apply(&h).unwrap();
        let shift = (obj.gamma_f64() - p.trace().re) / obj.space.total_dim() as f64;
        let w = p.add(&Operator::identity(obj.space.clone()).scale_re(shift)).unwrap();
        let t = ChoiMatrix::new(w, &s_in.space.labels(), &s_out.space.labels()).unwrap();
        for _ in 0..5 {
            let x = random_cptp(&q1("2"), &q1("3"), 2, &mut rng).unwrap();
            let y = apply_choi(&t, x.op()).unwrap();
            let r = s_out.validate_tol(&y, 1e-8).unwrap();
            assert!(r.projector_pass && r.trace_pass);
        }
    }
    assert_eq!(obj.gamma_value().unwrap(), q(4));
    let _: Vec<Label> = obj.roles.inputs.clone();
}
