use nsbox::boxes::{
    deterministic_box, deterministic_strategies, isotropic_box, marginalize, mix, p_eps_box, pr_box, tensor, validate,
    BellBox,
};
use nsbox::distill::recurrence_step;
use nsbox::orthograph::{build_orthogonality_graph, clique_saturation, OrthoGraph};
use nsbox::polytope::classical::{classical_membership, ClassicalOptions};
use nsbox::rational::{format_rational, parse_rational, rat, Rational};
use nsbox::scenario::BellScenario;
use proptest::prelude::*;

struct Setting {
    graph: OrthoGraph,
    vertices: Vec<BellBox>,
}

fn setting(k: usize) -> Setting {
    let s = BellScenario::uniform(2, 2, k).unwrap();
    let mut vertices: Vec<BellBox> =
        deterministic_strategies(&s).iter().map(|st| deterministic_box(&s, st).unwrap()).collect();
    vertices.push(pr_box(2, k).unwrap());
    Setting { graph: build_orthogonality_graph(&s), vertices }
}

fn weights(raw: &[u32]) -> Vec<Rational> {
    let total: i64 = raw.iter().map(|&w| i64::from(w)).sum::<i64>().max(1);
    raw.iter().map(|&w| rat(i64::from(w), total)).collect()
}

/// Random point of the no-signaling polytope as a mixture of a few vertices.
fn random_box(set: &Setting, picks: &[(usize, u32)]) -> BellBox {
    let chosen: Vec<&BellBox> = picks.iter().map(|&(i, _)| &set.vertices[i % set.vertices.len()]).collect();
    let mut raw: Vec<u32> = picks.iter().map(|&(_, w)| w).collect();
    if raw.iter().all(|&w| w == 0) {
        raw[0] = 1;
    }
    mix(&chosen, &weights(&raw)).unwrap()
}

fn picks() -> impl Strategy<Value = Vec<(usize, u32)>> {
    prop::collection::vec((0usize..1000, 0u32..20), 1..5)
}

fn unit_rational() -> impl Strategy<Value = Rational> {
    (1i64..50).prop_flat_map(|q| (0..=q).prop_map(move |p| rat(p, q)))
}

fn clique_form_agrees(set: &Setting, b: &BellBox) -> bool {
    let saturated = clique_saturation(b, &set.graph).unwrap().all_saturated();
    let nonneg = b.entries().iter().all(|p| *p >= rat(0, 1));
    validate(b).is_valid() == (saturated && nonneg)
}

fn perturb(b: &BellBox, from: usize, to: usize, step: u32) -> BellBox {
    let n = b.len();
    let (from, to) = (from % n, to % n);
    let mut entries = b.entries().to_vec();
    let delta = (entries[from].clone() * rat(i64::from(step), 10)).min(rat(1, 7));
    entries[from] -= &delta;
    entries[to] += &delta;
    BellBox::new(b.scenario().clone(), entries).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn clique_form_matches_validation_222(p in picks(), from in 0usize..64, to in 0usize..64, step in 1u32..10) {
        let set = setting(2);
        let b = random_box(&set, &p);
        prop_assert!(validate(&b).is_valid());
        prop_assert!(clique_form_agrees(&set, &b));
        prop_assert!(clique_form_agrees(&set, &perturb(&b, from, to, step)));
    }

    #[test]
    fn clique_form_matches_validation_223(p in picks(), from in 0usize..64, to in 0usize..64, step in 1u32..10) {
        let set = setting(3);
        let b = random_box(&set, &p);
        prop_assert!(validate(&b).is_valid());
        prop_assert!(clique_form_agrees(&set, &b));
        prop_assert!(clique_form_agrees(&set, &perturb(&b, from, to, step)));
    }

    #[test]
    fn mixtures_stay_valid(p in picks(), q in picks(), w in unit_rational()) {
        let set = setting(2);
        let (a, b) = (random_box(&set, &p), random_box(&set, &q));
        let m = mix(&[&a, &b], &[w.clone(), rat(1, 1) - w]).unwrap();
        prop_assert!(validate(&m).is_valid());
    }

    #[test]
    fn tensor_marginalizes_back(p in picks(), q in picks()) {
        let set = setting(2);
        let (a, b) = (random_box(&set, &p), random_box(&set, &q));
        let t = tensor(&a, &b);
        prop_assert!(validate(&t).is_valid());
        prop_assert_eq!(marginalize(&t, &[0, 1]).unwrap(), a);
        prop_assert_eq!(marginalize(&t, &[2, 3]).unwrap(), b);
    }

    #[test]
    fn families_are_valid(n in 2usize..4, k in 2usize..4, eps in unit_rational()) {
        prop_assert!(validate(&isotropic_box(n, k, &eps).unwrap()).is_valid());
        prop_assert!(validate(&p_eps_box(n, k, &eps).unwrap()).is_valid());
    }

    #[test]
    fn recurrence_increases_within_unit_interval(n in 2usize..4, k in 2usize..4, eps in unit_rational()) {
        let next = recurrence_step(&eps, n, k);
        prop_assert!(next >= eps);
        prop_assert!(next <= rat(1, 1));
    }

    #[test]
    fn local_mixtures_decompose(raw in prop::collection::vec(0u32..10, 16)) {
        let set = setting(2);
        let dets: Vec<&BellBox> = set.vertices[..16].iter().collect();
        let mut raw = raw;
        raw[0] += 1;
        let b = mix(&dets, &weights(&raw)).unwrap();
        let report = classical_membership(&b, &ClassicalOptions::default()).unwrap();
        prop_assert!(report.certificate.is_local());
    }

    #[test]
    fn rational_text_round_trip(p in -1000i64..1000, q in 1i64..1000) {
        let x = rat(p, q);
        prop_assert_eq!(parse_rational(&format_rational(&x)).unwrap(), x);
    }
}
