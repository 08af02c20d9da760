use std::collections::BTreeMap;

use handoff_core::context::{CriteriaVector, CriterionDef, ContextSource, Polarity};
use handoff_core::desirability::{desirability, rank, AvailableNetworkList, DesirabilityScore};
use handoff_core::{Catalog, WeightProfile};
use proptest::prelude::*;

const FLOOR: f64 = 1e-6;

fn catalog() -> Catalog {
    let def = |id: &str, pol| CriterionDef::new(id, ContextSource::Network, pol, "", FLOOR);
    Catalog::new(vec![
        def("a", Polarity::Beneficial),
        def("b", Polarity::Beneficial),
        def("e", Polarity::Beneficial),
        def("c", Polarity::Detrimental),
        def("d", Polarity::Detrimental),
    ])
    .unwrap()
}

fn weights(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn vector(pairs: &[(&str, f64)]) -> CriteriaVector {
    pairs.iter().fold(CriteriaVector::new(0), |v, (k, x)| v.with(k, *x))
}

fn score(k: f64, w: &[(&str, f64)], v: &[(&str, f64)]) -> f64 {
    let p = WeightProfile::new(k, &weights(w), &catalog()).unwrap();
    desirability("n", &vector(v), &p).unwrap().value
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn worked_example_is_three() {
    let cat = handoff_core::context::default_catalog();
    let p = WeightProfile::new(
        1.0,
        &weights(&[("NBW", 0.5), ("NT", 0.5), ("NL", 0.5), ("ND", 0.5)]),
        &cat,
    )
    .unwrap();
    let v = vector(&[("NBW", 100.0), ("NT", 50.0), ("NL", 10.0), ("ND", 5.0)]);
    let d = desirability("n", &v, &p).unwrap().value;
    assert!((d - 3.0).abs() < 1e-12, "{d}");
}

// Values computed with 50-digit arbitrary-precision arithmetic.
#[test]
fn frozen_high_precision_instances() {
    let d = score(
        0.5,
        &[("a", 0.2), ("b", 0.8), ("c", 0.6), ("d", 0.4)],
        &[("a", 3.7), ("b", 120.5), ("c", 0.03), ("d", 42.0)],
    );
    assert!(rel_close(d, 3.317266626281310745364589, 1e-12), "{d}");

    let d = score(10.0, &[("a", 1.0), ("c", 0.3), ("d", 0.7)], &[("a", 1e-9), ("c", 7.25), ("d", 0.0)]);
    assert!(rel_close(d, -10.6614814676812350781253, 1e-12), "{d}");

    let d = score(0.0, &[("a", 0.25), ("b", 0.25), ("e", 0.5)], &[("a", 2.0), ("b", 2.0), ("e", 1000.0)]);
    assert!(rel_close(d, 1.650514997831990597606869, 1e-12), "{d}");
}

#[test]
fn symmetric_cancellation() {
    assert_eq!(score(0.0, &[("a", 1.0), ("c", 1.0)], &[("a", 10.0), ("c", 10.0)]), 0.0);
}

/// Direct evaluation of the weighted log sum, written independently of the
/// library: natural logs converted to base 10 and values clamped inline.
fn direct(k: f64, wp: &[f64], vp: &[f64], wn: &[f64], vn: &[f64]) -> f64 {
    let term = |w: f64, v: f64| (k + w) * (if v > 0.0 { v.max(FLOOR) } else { FLOOR }).ln() / std::f64::consts::LN_10;
    wp.iter().zip(vp).map(|(w, v)| term(*w, *v)).sum::<f64>() - wn.iter().zip(vn).map(|(w, v)| term(*w, *v)).sum::<f64>()
}

fn simplex(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, n).prop_map(|xs| {
        let s: f64 = xs.iter().sum();
        let mut w: Vec<f64> = xs.iter().map(|x| x / s).collect();
        let rest: f64 = w[1..].iter().sum();
        w[0] = 1.0 - rest;
        w
    })
}

fn instance() -> impl Strategy<Value = (f64, Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>)> {
    (
        0.0f64..5.0,
        simplex(3),
        prop::collection::vec(1e-3f64..1e6, 3),
        simplex(2),
        prop::collection::vec(1e-3f64..1e6, 2),
    )
}

fn lib_value(k: f64, wp: &[f64], vp: &[f64], wn: &[f64], vn: &[f64]) -> f64 {
    let w = [("a", wp[0]), ("b", wp[1]), ("e", wp[2]), ("c", wn[0]), ("d", wn[1])];
    let v = [("a", vp[0]), ("b", vp[1]), ("e", vp[2]), ("c", vn[0]), ("d", vn[1])];
    score(k, &w, &v)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn matches_direct_evaluation((k, wp, vp, wn, vn) in instance()) {
        let lib = lib_value(k, &wp, &vp, &wn, &vn);
        let oracle = direct(k, &wp, &vp, &wn, &vn);
        prop_assert!(rel_close(lib, oracle, 1e-9), "{} vs {}", lib, oracle);
    }

    #[test]
    fn beneficial_up_raises_detrimental_up_lowers(
        (k, wp, vp, wn, vn) in instance(),
        i in 0usize..3,
        j in 0usize..2,
        factor in 1.01f64..10.0,
    ) {
        let base = lib_value(k, &wp, &vp, &wn, &vn);
        let mut vp2 = vp.clone();
        vp2[i] *= factor;
        prop_assert!(lib_value(k, &wp, &vp2, &wn, &vn) > base);
        let mut vn2 = vn.clone();
        vn2[j] *= factor;
        prop_assert!(lib_value(k, &wp, &vp, &wn, &vn2) < base);
    }

    #[test]
    fn ranking_is_sorted_idempotent_and_shift_invariant(
        values in prop::collection::vec(-50.0f64..50.0, 1..8),
        shift in -10.0f64..10.0,
    ) {
        let pairs: Vec<(String, f64)> = values.iter().enumerate().map(|(i, v)| (format!("n{i}"), *v)).collect();
        let anl = AvailableNetworkList::from_pairs(&pairs, 0).unwrap();
        let e = anl.entries();
        prop_assert!(e.windows(2).all(|w| w[0].value > w[1].value || (w[0].value == w[1].value && w[0].network < w[1].network)));
        let again = rank(e.to_vec(), 0).unwrap();
        prop_assert_eq!(&again, &anl);
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert_eq!(anl.head().unwrap().value, max);

        let shifted = rank(
            e.iter().map(|s| DesirabilityScore::new(s.network.clone(), s.value + shift, 0)).collect(),
            0,
        ).unwrap();
        // Shifts can merge near-equal values through rounding; order is preserved otherwise.
        let distinct = values.iter().all(|a| values.iter().filter(|b| (*b - a).abs() < 1e-9).count() == 1);
        if distinct {
            let ids = |l: &AvailableNetworkList| l.networks().cloned().collect::<Vec<_>>();
            prop_assert_eq!(ids(&shifted), ids(&anl));
        }
    }
}
