mod common;

use common::enumerate_posterior;
use frl_core::fairness::{
    classify, conservative_bounds, frl, frl_bruteforce, FairnessModel, Instance,
    DEFAULT_BRUTE_FORCE_CAP,
};
use frl_core::model::{joint_states, Assignment, BayesianNetwork, Role, VarId};
use frl_core::synth::{random_network, sample_rows, with_random_private};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_model(
    rng: &mut ChaCha8Rng,
    max_vars: usize,
    max_card: usize,
) -> (BayesianNetwork, FairnessModel) {
    let n = rng.gen_range(2..=max_vars);
    let bn = random_network(rng, n, max_card, 3);
    let bn = with_random_private(rng, &bn, 4);
    let model = FairnessModel::new(&bn).unwrap();
    (bn, model)
}

fn random_instance(rng: &mut ChaCha8Rng, bn: &BayesianNetwork, id: usize) -> Instance {
    let row = sample_rows(bn, 1, rng).pop().unwrap();
    let y = bn.target().unwrap();
    let features = bn
        .variables()
        .keys()
        .filter(|&&v| v != y)
        .map(|&v| (v, row[v.index()]))
        .collect();
    Instance {
        id,
        features,
        true_class: row[y.index()],
    }
}

fn private_domain(model: &FairnessModel) -> Vec<(VarId, usize)> {
    model
        .private_in_blanket()
        .iter()
        .map(|&v| (v, model.blanket_bn().cardinality(v).unwrap()))
        .collect()
}

fn public_part(model: &FairnessModel, inst: &Instance) -> Assignment {
    inst.features
        .filtered(|v| model.public_in_blanket().contains(&v))
}

/// `(x, P(y0 | x, public))` for every private blanket configuration, from
/// joint enumeration of the full network.
fn sweep(bn: &BayesianNetwork, model: &FairnessModel, inst: &Instance) -> Vec<(Assignment, f64)> {
    let y = bn.target().unwrap();
    let public = inst
        .features
        .filtered(|v| v != y && !model.private_in_blanket().contains(&v));
    joint_states(&private_domain(model))
        .map(|x| {
            let p = enumerate_posterior(bn, y, &x.merged(&public))[0];
            (x, p)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(80))]

    #[test]
    fn ratio_field_matches_brute_force(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (bn, model) = random_model(&mut rng, 10, 4);
        for id in 0..5 {
            let inst = random_instance(&mut rng, &bn, id);
            let a = frl(&model, &inst).unwrap();
            let b = frl_bruteforce(&model, &inst, DEFAULT_BRUTE_FORCE_CAP).unwrap();
            prop_assert!((a.frl - b.frl).abs() < 1e-9);
            prop_assert!((a.posterior_y0 - b.posterior_y0).abs() < 1e-12);
            prop_assert!(a.frl <= a.posterior_y0.max(1.0 - a.posterior_y0) + 1e-12);
            // x* agrees whenever the best deviation is unique
            let public = public_part(&model, &inst);
            let devs: Vec<(Assignment, f64)> = joint_states(&private_domain(&model)).map(|x| {
                let full = x.merged(&public);
                let p = frl_core::inference::posterior(model.blanket_bn(), model.target(), &full).unwrap()[0];
                (x, (p - a.posterior_y0).abs())
            }).collect();
            let near = devs.iter().filter(|(_, d)| (d - b.frl).abs() < 1e-9).count();
            if near == 1 && !model.fair_by_design() {
                prop_assert_eq!(&a.x_star, &b.x_star);
            }
        }
    }

    #[test]
    fn bounds_reach_true_extremes(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (bn, model) = random_model(&mut rng, 6, 3);
        let inst = random_instance(&mut rng, &bn, 0);
        let b = conservative_bounds(&model, &inst.features).unwrap();
        let s = sweep(&bn, &model, &inst);
        let hi = s.iter().map(|(_, p)| *p).fold(f64::NEG_INFINITY, f64::max);
        let lo = s.iter().map(|(_, p)| *p).fold(f64::INFINITY, f64::min);
        prop_assert!((b.p_max - hi).abs() < 1e-9, "{} vs {}", b.p_max, hi);
        prop_assert!((b.p_min - lo).abs() < 1e-9);
    }

    #[test]
    fn ratio_potentials_give_joint_odds(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (bn, model) = random_model(&mut rng, 6, 3);
        let inst = random_instance(&mut rng, &bn, 0);
        let y = model.target();
        let public = public_part(&model, &inst);
        for x in joint_states(&private_domain(&model)) {
            let full = x.merged(&public);
            let log_odds = model.ratio_mrf().log_score(&full).unwrap();
            let p = enumerate_posterior(&bn, y, &full);
            prop_assert!((log_odds - (p[1] / p[0]).ln()).abs() < 1e-9);
        }
    }

    #[test]
    fn odds_maximiser_minimises_first_class(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (bn, model) = random_model(&mut rng, 6, 3);
        let inst = random_instance(&mut rng, &bn, 0);
        let public = public_part(&model, &inst);
        let s = sweep(&bn, &model, &inst);
        let by_odds = s.iter().map(|(x, _)| (x, model.ratio_mrf().log_score(&x.merged(&public)).unwrap()))
            .fold(None::<(&Assignment, f64)>, |best, (x, o)| match best { Some((_, b)) if b >= o => best, _ => Some((x, o)) })
            .unwrap().0;
        let by_post = s.iter().fold(None::<(&Assignment, f64)>, |best, (x, p)| match best {
            Some((_, b)) if b <= *p => best,
            _ => Some((x, *p)),
        }).unwrap();
        let p_at_odds = s.iter().find(|(x, _)| x == by_odds).unwrap().1;
        prop_assert!((p_at_odds - by_post.1).abs() < 1e-9);
    }

    #[test]
    fn second_class_deviation_is_the_same(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (bn, model) = random_model(&mut rng, 6, 3);
        let inst = random_instance(&mut rng, &bn, 0);
        let rec = frl(&model, &inst).unwrap();
        let s = sweep(&bn, &model, &inst);
        let p1_hat = 1.0 - rec.posterior_y0;
        let rho1 = s.iter().map(|(_, p)| ((1.0 - p) - p1_hat).abs()).fold(0.0, f64::max);
        prop_assert!((rho1 - rec.frl).abs() < 1e-9);
        let at_star = s.iter().find(|(x, _)| rec.x_star.filtered(|v| x.contains(v)) == *x).map(|(_, p)| *p);
        if let Some(p) = at_star {
            prop_assert!((((1.0 - p) - p1_hat).abs() - rho1).abs() < 1e-9);
        }
    }

    #[test]
    fn prediction_is_argmax_of_enumeration(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (bn, model) = random_model(&mut rng, 6, 3);
        let inst = random_instance(&mut rng, &bn, 0);
        let (class, post) = classify(&model, &inst.features).unwrap();
        let want = enumerate_posterior(&bn, model.target(), &inst.features);
        prop_assert!((post[0] - want[0]).abs() < 1e-9);
        if (want[0] - want[1]).abs() > 1e-9 {
            prop_assert_eq!(class, if want[0] > want[1] { 0 } else { 1 });
        }
    }

    #[test]
    fn shared_public_evidence_shares_bounds(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (bn, model) = random_model(&mut rng, 8, 3);
        let a = random_instance(&mut rng, &bn, 0);
        let mut b = a.clone();
        for &v in model.private().iter() {
            b.features.insert(v, rng.gen_range(0..bn.cardinality(v).unwrap()));
        }
        let (ba, bb) = (conservative_bounds(&model, &a.features).unwrap(), conservative_bounds(&model, &b.features).unwrap());
        prop_assert_eq!(&ba, &bb);
        if frl_core::fairness::private_configurations(&model) == 2 {
            prop_assert!((frl(&model, &a).unwrap().frl - frl(&model, &b).unwrap().frl).abs() < 1e-9);
        }
    }
}

#[test]
fn private_features_outside_the_blanket_are_copied() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut checked = 0;
    while checked < 20 {
        let (bn, model) = random_model(&mut rng, 8, 3);
        let outside: Vec<VarId> = bn
            .with_role(Role::Private)
            .into_iter()
            .filter(|v| !model.private_in_blanket().contains(v))
            .collect();
        if outside.is_empty() {
            continue;
        }
        let inst = random_instance(&mut rng, &bn, 0);
        let rec = frl(&model, &inst).unwrap();
        for v in outside {
            assert_eq!(rec.x_star.get(v), inst.features.get(v));
        }
        checked += 1;
    }
}
