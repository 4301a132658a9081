use super::*;
use crate::operator::C64;
use crate::projmap::{DenseSuperMap, SubsetMap};
use crate::sampling::{ginibre, random_cptp, random_density, random_hermitian, random_operator, rng_from_seed};
use crate::testutil::{ls, off_diagonal, qubits, sp, subset_map};

fn identity_choi() -> ChoiMatrix {
    choi_of_map(|x| Operator::new(qubits(&["o"]), x.matrix().clone()), &qubits(&["i"]), &qubits(&["o"])).unwrap()
}

#[test]
fn choi_of_identity_and_depolarizer() {
    let t = identity_choi();
    let phi = Operator::max_entangled(qubits(&["i", "o"])).unwrap();
    assert_eq!(t.op(), &phi);
    assert!((t.op().trace().re - 2.0).abs() < 1e-15);

    let dep = choi_of_map(
        |x| Ok(Operator::maximally_mixed(qubits(&["o"])).scale(x.trace())),
        &qubits(&["i"]),
        &qubits(&["o"]),
    )
    .unwrap();
    assert!(dep.op().approx_eq(&Operator::identity(qubits(&["i", "o"])).scale_re(0.5), 1e-15));
}

#[test]
fn random_cptp_choi_is_positive_and_trace_preserving() {
    let mut rng = rng_from_seed(2);
    let c = random_cptp(&qubits(&["i"]), &qubits(&["o"]), 3, &mut rng).unwrap();
    assert!(c.op().min_eigenvalue() > -1e-12);
    let r = c.op().partial_trace(&ls(&["o"])).unwrap();
    assert!(r.approx_eq(&Operator::identity(qubits(&["i"])), 1e-10));
}

#[test]
fn apply_choi_examples() {
    let mut rng = rng_from_seed(4);
    let rho = random_density(&qubits(&["i"]), &mut rng);
    let out = identity_choi().apply(&rho).unwrap();
    assert!(out.matrix() == rho.matrix());

    let dep = ChoiMatrix::new(Operator::identity(qubits(&["i", "o"])).scale_re(0.5), &ls(&["i"]), &ls(&["o"])).unwrap();
    let x = random_operator(&qubits(&["i"]), &mut rng);
    let y = dep.apply(&x).unwrap();
    assert!(y.approx_eq(&Operator::maximally_mixed(qubits(&["o"])).scale(x.trace()), 1e-14));
}

#[test]
fn choi_round_trip_on_full_basis() {
    let mut rng = rng_from_seed(5);
    let i = sp(&[("a", 2), ("b", 3)]);
    let o = sp(&[("c", 2)]);
    let f = DenseSuperMap::from_matrix(i.clone(), o.clone(), ginibre(4, 36, &mut rng)).unwrap();
    let t = choi_of_map(|x| f.apply(x), &i, &o).unwrap();
    for j in 0..6 {
        for k in 0..6 {
            let e = Operator::unit(i.clone(), j, k);
            assert!(t.apply(&e).unwrap().approx_eq(&f.apply(&e).unwrap(), 1e-12));
        }
    }
    assert!(t.action_map().max_deviation(&f).unwrap() < 1e-14);
}

#[test]
fn choi_is_linear() {
    let mut rng = rng_from_seed(6);
    let i = qubits(&["a"]);
    let o = qubits(&["b"]);
    let f = DenseSuperMap::from_matrix(i.clone(), o.clone(), ginibre(4, 4, &mut rng)).unwrap();
    let g = DenseSuperMap::from_matrix(i.clone(), o.clone(), ginibre(4, 4, &mut rng)).unwrap();
    let s = C64::new(0.3, -1.2);
    let tf = choi_of_map(|x| f.apply(x), &i, &o).unwrap();
    let tg = choi_of_map(|x| g.apply(x), &i, &o).unwrap();
    let tsum = choi_of_map(|x| f.apply(x)?.scale(s).add(&g.apply(x)?), &i, &o).unwrap();
    assert!(tsum.op().approx_eq(&tf.op().scale(s).add(tg.op()).unwrap(), 1e-12));
}

#[test]
fn link_special_cases() {
    let mut rng = rng_from_seed(7);
    let a = random_operator(&qubits(&["a"]), &mut rng);
    let b = random_operator(&sp(&[("b", 3)]), &mut rng);
    assert_eq!(link(&a, &b).unwrap(), a.tensor(&b).unwrap());

    let c = random_operator(&qubits(&["a", "b"]), &mut rng);
    let d = random_operator(&qubits(&["b", "a"]), &mut rng);
    let full = link(&c, &d).unwrap();
    assert_eq!(full.dim(), 1);
    let expected = c.trace_product(&d.transpose().align_to(c.space()).unwrap()).unwrap();
    assert!((full.matrix()[(0, 0)] - expected).norm() < 1e-12);

    let rho = random_density(&qubits(&["i"]), &mut rng);
    let out = link(identity_choi().op(), &rho).unwrap();
    assert!(out.matrix() == rho.matrix());

    let bad = random_operator(&sp(&[("a", 3)]), &mut rng);
    assert!(matches!(link(&a, &bad), Err(Error::DimMismatchOnSharedLabel { .. })));
}

#[test]
fn link_is_commutative_associative_and_preserves_structure() {
    let mut rng = rng_from_seed(8);
    let a = random_operator(&qubits(&["x", "y"]), &mut rng);
    let b = random_operator(&sp(&[("y", 2), ("z", 3)]), &mut rng);
    let c = random_operator(&sp(&[("z", 3), ("w", 2)]), &mut rng);
    let ab = link(&a, &b).unwrap();
    let ba = link(&b, &a).unwrap();
    assert!(ab.approx_eq(&ba, 1e-12));
    let l = link(&ab, &c).unwrap();
    let r = link(&a, &link(&b, &c).unwrap()).unwrap();
    assert!(l.approx_eq(&r, 1e-10));

    let h1 = random_hermitian(&qubits(&["x", "y"]), &mut rng);
    let h2 = random_hermitian(&sp(&[("y", 2), ("z", 3)]), &mut rng);
    assert!(link(&h1, &h2).unwrap().is_hermitian(1e-12));

    let p1 = crate::sampling::random_psd(&qubits(&["x", "y"]), 2, &mut rng);
    let p2 = crate::sampling::random_psd(&sp(&[("y", 2), ("z", 3)]), 2, &mut rng);
    assert!(link(&p1, &p2).unwrap().min_eigenvalue() > -1e-12);
}

/// Two operators are equal when they link identically with a full basis of the shared space.
fn agree_on_basis(a: &Operator, a2: &Operator, shared: &CompositeSpace) -> bool {
    let d = shared.total_dim();
    (0..d).all(|j| {
        (0..d).all(|k| {
            let e = Operator::unit(shared.clone(), j, k);
            link(a, &e).unwrap().approx_eq(&link(a2, &e).unwrap(), 1e-12)
        })
    })
}

#[test]
fn link_completeness() {
    let mut rng = rng_from_seed(10);
    let a = random_operator(&qubits(&["x", "y"]), &mut rng);
    assert!(agree_on_basis(&a, &a.clone(), &qubits(&["y"])));
    let mut m = a.matrix().clone();
    m[(1, 2)] += C64::new(1e-3, 0.0);
    let a2 = Operator::new(a.space().clone(), m).unwrap();
    assert!(!agree_on_basis(&a, &a2, &qubits(&["y"])));
}

#[test]
fn move_map_channel_projector() {
    let mut rng = rng_from_seed(12);
    let p = OpMap::Symbolic(subset_map(qubits(&["i", "o"]), &[(&[], 1), (&["o"], -1), (&["i", "o"], 1)]));
    let a = random_operator(&qubits(&["x", "i", "o"]), &mut rng);
    let b = random_operator(&qubits(&["i", "o", "z"]), &mut rng);
    let r = move_map(&a, &p, &b).unwrap();
    assert!(r.twirled_deviation < 1e-10);
    assert!(r.plain_deviation < 1e-10);
    assert!(r.plain_form_expected);

    let id = OpMap::identity(qubits(&["i", "o"]));
    let r = move_map(&a, &id, &b).unwrap();
    assert_eq!(r.twirled_deviation, 0.0);
    assert_eq!(r.plain_deviation, 0.0);
}

#[test]
fn move_map_off_diagonal_and_oblique() {
    let mut rng = rng_from_seed(13);
    let s = sp(&[("y", 3)]);
    let off = OpMap::Dense(off_diagonal(s.clone(), 0, 2));
    let a = random_operator(&sp(&[("x", 2), ("y", 3)]), &mut rng);
    let b = random_operator(&sp(&[("y", 3), ("z", 2)]), &mut rng);
    let r = move_map(&a, &off, &b).unwrap();
    assert!(r.twirled_deviation < 1e-10);
    // The orthogonal off-diagonal projector equals its own twirl, so the plain form holds too.
    assert!(r.plain_deviation < 1e-10);
    assert!(!r.plain_form_expected);

    // P[M] = tr(M) |0⟩⟨0|: oblique, so the plain form fails while the twirled one holds.
    let zero = Operator::unit(s.clone(), 0, 0);
    let obl = OpMap::Dense(DenseSuperMap::from_map(s.clone(), s.clone(), |m| Ok(zero.scale(m.trace()))).unwrap());
    assert!(obl.predicates().unwrap().is_projector);
    let r = move_map(&a, &obl, &b).unwrap();
    assert!(r.twirled_deviation < 1e-10);
    assert!(r.plain_deviation > 1e-3);
    assert!(!r.plain_form_expected);
}

#[test]
fn move_map_rejects_unshared_labels() {
    let mut rng = rng_from_seed(14);
    let a = random_operator(&qubits(&["x"]), &mut rng);
    let b = random_operator(&qubits(&["y"]), &mut rng);
    let p = OpMap::identity(qubits(&["y"]));
    assert!(matches!(move_map(&a, &p, &b), Err(Error::SpaceMismatch(_))));
}

#[test]
fn choi_of_opmap_renames_outputs() {
    let p = OpMap::Symbolic(SubsetMap::identity(qubits(&["a"])));
    let t = choi_of_opmap(&p, &ls(&["a_out"])).unwrap();
    assert_eq!(t.op().matrix(), Operator::max_entangled(qubits(&["a", "a_out"])).unwrap().matrix());
}
