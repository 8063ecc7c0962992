mod common;

use common::h2;
use ftq_core::bounds::{
    appendix_d_bound, appendix_d_dmax, capacity_comparison, lemma1_objective, lemma1_rhs, max_eps_lip,
    maximize_separable, p1_optimum, p3_optimum, prop1_bound, prop2_bound, thm1_bound, BoundParams,
    ConstraintVariant, EpsilonAllocation,
};
use ftq_core::channels::{dephasing, depolarizing, QuantumChannel};
use ftq_core::coherent::OptimizerOptions;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::LN_2;

/// A valid `(d, g, eps, L)`: `d >= 2g`, `eps in (0, 0.11)`, `eps L` up to the cap.
#[derive(Debug, Clone, Copy)]
struct Tuple {
    d: u64,
    g: u64,
    eps: f64,
    lip: f64,
}

impl Tuple {
    fn l(&self) -> f64 {
        (1.0 / (1.0 - self.eps * self.lip)).ln()
    }
}

fn sample(rng: &mut ChaCha8Rng) -> Tuple {
    let g = rng.random_range(1..=8u64);
    // log-uniform d in [2g, 20000]
    let lo = (2 * g) as f64;
    let d = (lo * (20_000.0 / lo).powf(rng.random::<f64>())).round().max(lo) as u64;
    let eps = rng.random_range(1e-6..0.11);
    // every tenth sample sits exactly on the cap eps L = 1 - e^{-1/8}
    let product = if rng.random_range(0..10) == 0 {
        max_eps_lip()
    } else {
        rng.random_range(1e-9..=max_eps_lip())
    };
    Tuple {
        d,
        g,
        eps,
        lip: product / eps,
    }
}

fn samples(n: usize, seed: u64) -> Vec<Tuple> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| sample(&mut rng)).collect()
}

#[test]
fn prop1_reference_value() {
    // one-line evaluation, independent of the library
    let (d, g, ic) = (100.0f64, 2.0f64, 1.0620086f64);
    let direct = d / (ic / g + ((4.0 * d / g).ln() + 8.0 / 7.0) / (2.0 * (d - g) * LN_2)) - 2.0 * g;
    let v = prop1_bound(100, 2, 1.0620086).unwrap();
    assert!((v.value - direct).abs() < 1e-9);
    assert!((v.value - 168.886015678775).abs() < 1e-3);
    assert!(!v.vacuous);
    assert!((prop1_bound(100, 2, 0.0).unwrap().value - 2105.19370669706).abs() < 1e-6);
}

#[test]
fn frozen_reference_values() {
    let p = BoundParams::new(100, 2, 0.05, 1.0).unwrap().with_gates(50).unwrap();
    assert!((thm1_bound(&p, 1.062009).unwrap().value - 181.146865203161).abs() < 1e-8);
    // at the cap l = 1/8, so k = 2 and the symmetric point is 1/16
    assert!((p3_optimum(4, 0.1, max_eps_lip() / 0.1).unwrap() - 2.69832053293611).abs() < 1e-9);
    assert!((prop2_bound(10, 2).unwrap().value - 138199.816348418).abs() < 1e-5);
    let tiny = prop2_bound(1, 1).unwrap();
    assert!((tiny.value + 0.736402861884273).abs() < 1e-12);
    assert!(tiny.vacuous);
    assert!((appendix_d_dmax(2.0).unwrap() - 2.0 / (3.0 * LN_2)).abs() < 1e-12);
    assert!((appendix_d_dmax(2.0).unwrap() - 0.961_796_693_925_975_6).abs() < 1e-12);
}

#[test]
fn binary_entropy_chain_holds() {
    let tuples = samples(1000, 1);
    let mut worst = f64::NEG_INFINITY;
    for t in &tuples {
        let (d, g) = (t.d as f64, t.g as f64);
        let lhs = h2(2.0 * g / d * t.l());
        let rhs = g / (4.0 * d * LN_2) * ((4.0 * d / g).ln() + 8.0 / 7.0);
        worst = worst.max(lhs - rhs);
        assert!(lhs <= rhs + 1e-9, "{t:?}: {lhs} > {rhs}");
    }
    assert!(worst < 0.0);
}

#[test]
fn inverse_margin_at_most_two() {
    for t in samples(1000, 2) {
        let p = BoundParams::new(t.d, t.g, t.eps, t.lip).unwrap();
        let k = p.inverse_margin();
        assert!((1.0..=2.0 + 1e-9).contains(&k), "{t:?}: k = {k}");
        assert!((k - 1.0 / (1.0 - 4.0 * t.l())).abs() < 1e-9);
    }
}

#[test]
fn lemma1_decomposition_bounded_by_p1_plus_p3() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for t in samples(1000, 4) {
        let gates = rng.random_range(1..=12u64);
        let ic = rng.random_range(0.0..=t.g as f64);
        let budget = 2.0 * t.l();
        let cap = p1_optimum(gates, t.eps, t.lip, ic).unwrap() + p3_optimum(gates, t.eps, t.lip).unwrap();

        let mut extreme = vec![0.0; gates as usize];
        extreme[0] = budget;
        let symmetric = vec![budget / gates as f64; gates as usize];
        let mut random: Vec<f64> = (0..gates).map(|_| rng.random::<f64>()).collect();
        let scale = budget * rng.random::<f64>() / random.iter().sum::<f64>();
        random.iter_mut().for_each(|x| *x *= scale);

        for alloc in [extreme, symmetric, random] {
            let v = lemma1_objective(&EpsilonAllocation::new(alloc.clone()).unwrap(), ic).unwrap();
            assert!(v <= cap + 1e-9, "{t:?}, G {gates}, Ic {ic}, {alloc:?}: {v} > {cap}");
        }
    }
}

#[test]
fn feasible_allocations_fit_the_budget() {
    // prod (1 - eps_i/2) >= 1 - eps L forces sum eps_i <= 2l, since -ln(1 - x) >= x
    for t in samples(200, 5) {
        let target = 1.0 - t.eps * t.lip;
        for gates in [1usize, 3, 7] {
            let tight = 2.0 * (1.0 - target.powf(1.0 / gates as f64)) * (1.0 - 1e-12);
            let alloc = EpsilonAllocation::uniform(gates, tight).unwrap();
            assert!(lemma1_rhs(&alloc, t.eps, t.lip, 0.5, ConstraintVariant::Halved).is_ok());
            assert!(tight * gates as f64 <= 2.0 * t.l() + 1e-12, "{t:?}, G {gates}");
        }
    }
}

#[test]
fn prop1_never_exceeds_thm1() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for t in samples(100, 7) {
        let min_gates = t.d.div_ceil(t.g).max(2);
        let gates = min_gates + rng.random_range(0..=10 * min_gates);
        let ic = rng.random_range(0.0..=t.g as f64);
        let p = BoundParams::new(t.d, t.g, t.eps, t.lip).unwrap().with_gates(gates).unwrap();
        let weak = prop1_bound(t.d, t.g, ic).unwrap().value;
        let strong = thm1_bound(&p, ic).unwrap().value;
        assert!(
            weak <= strong + 1e-6 * strong.abs().max(1.0),
            "{t:?}, G {gates}, Ic {ic}: {weak} > {strong}"
        );
    }
}

#[test]
fn thm1_is_nonincreasing_in_coherent_information() {
    for t in samples(50, 8) {
        let p = BoundParams::new(t.d, t.g, t.eps, t.lip)
            .unwrap()
            .with_gates(t.d.div_ceil(t.g).max(2))
            .unwrap();
        let mut prev = f64::INFINITY;
        for i in 0..=20 {
            let ic = t.g as f64 * i as f64 / 20.0;
            let v = thm1_bound(&p, ic).unwrap().value;
            assert!(v <= prev + 1e-9 * prev.abs().max(1.0), "{t:?}: Ic {ic}");
            prev = v;
        }
    }
}

#[test]
fn closed_form_optima_match_numeric_optima() {
    let (eps, lip) = (0.05, 1.0);
    let l = (1.0f64 / (1.0 - eps * lip)).ln();
    let k = 1.0 / (1.0 - 4.0 * l);
    for gates in 2..=4u64 {
        for ic in [0.3, 1.0620086, 2.0] {
            let numeric = maximize_separable(gates as usize, 2.0 * l, |x| ic / (1.0 - 2.0 * x)).unwrap();
            let closed = p1_optimum(gates, eps, lip, ic).unwrap();
            assert!((numeric.value - closed).abs() < 1e-6, "P1, G {gates}: {} vs {closed}", numeric.value);
        }
        let numeric = maximize_separable(gates as usize, 2.0 * l, |x| k * h2(x)).unwrap();
        let closed = p3_optimum(gates, eps, lip).unwrap();
        assert!((numeric.value - closed).abs() < 1e-6, "P3, G {gates}: {} vs {closed}", numeric.value);
    }
}

#[test]
fn lemma1_numeric_optimum_bounded_by_p1_plus_p3() {
    for t in samples(40, 9) {
        let l = t.l();
        for gates in 1..=4u64 {
            for ic in [0.0, 0.5 * t.g as f64, t.g as f64] {
                let numeric =
                    maximize_separable(gates as usize, 2.0 * l, |x| (ic + h2(x)) / (1.0 - 2.0 * x)).unwrap();
                let cap = p1_optimum(gates, t.eps, t.lip, ic).unwrap() + p3_optimum(gates, t.eps, t.lip).unwrap();
                assert!(numeric.value <= cap + 1e-6, "{t:?}, G {gates}: {} > {cap}", numeric.value);
            }
        }
    }
}

#[test]
fn renyi_bound_examples() {
    let v = appendix_d_bound(10, 0.05, 1.0, 2.0, 0.5).unwrap();
    let l = (1.0f64 / 0.95).ln();
    let direct = 10.0 * 0.5 + 2.0 / LN_2 * (2.0 * l) / (1.0 - 2.0 * l);
    assert!((v - direct).abs() < 1e-12);
    // zero Rényi information at the cap eps L = 1 - e^{-1/8} reproduces d_max
    let at_cap = appendix_d_bound(5, 0.1, max_eps_lip() / 0.1, 3.0, 0.0).unwrap();
    assert!((at_cap - appendix_d_dmax(3.0).unwrap()).abs() < 1e-9);
    assert!(appendix_d_dmax(1.0).is_err());
}

#[test]
fn capacity_comparison_examples() {
    let opts = OptimizerOptions::default().with_restarts(6);

    let id = capacity_comparison(&QuantumChannel::identity(2), 2, &opts).unwrap();
    for row in &id.rows {
        assert!((row.ratio.unwrap() - 1.0).abs() < 1e-5);
    }
    assert!(id.upper_estimate);

    let deph = capacity_comparison(&dephasing(0.1).unwrap(), 3, &opts).unwrap();
    let expected = 1.0 / (1.0 - h2(0.1));
    assert!((expected - 1.88322354377324).abs() < 1e-12);
    for row in &deph.rows {
        assert!((row.ratio.unwrap() - expected).abs() < 1e-3, "k {}: {:?}", row.k, row.ratio);
    }
    assert!((deph.min_ratio.unwrap() - expected).abs() < 1e-3);

    let dep = capacity_comparison(&depolarizing(0.1).unwrap(), 2, &opts).unwrap();
    let ratios: Vec<f64> = dep.rows.iter().map(|r| r.ratio.unwrap()).collect();
    assert!(ratios[1] <= ratios[0] + 1e-4, "{ratios:?}");
    assert_eq!(dep.min_ratio, ratios.iter().cloned().reduce(f64::min));
}
