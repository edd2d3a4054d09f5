use fqw::bvp::{compute_zg, genus_switch, simple_walk_f00, simple_walk_f10};
use fqw::cra::lambda_max;
use fqw::enumeration::{excursion_period, excursion_series};
use fqw::par::Exec;
use fqw::poly::rat;
use fqw::quad::QuadratureSpec;
use fqw::queueing::{coupled_f0, CoupledParams};
use fqw::stepset::{enumerate_models, parse_stepset, ALL_STEPS};
use fqw::{FqwError, WeightedStepSet};
use proptest::prelude::*;

/// min of S(e^u, e^v) by damped Newton; S is convex in (u, v). None when
/// the infimum is approached at infinity.
fn min_inventory(ws: &WeightedStepSet) -> Option<f64> {
    let steps: Vec<(f64, f64)> = ws.steps().iter().map(|&(i, j)| (i as f64, j as f64)).collect();
    let eval = |u: f64, v: f64| {
        let (mut s, mut g, mut h) = (0.0, [0.0; 2], [0.0; 3]);
        for &(i, j) in &steps {
            let t = (i * u + j * v).exp();
            s += t;
            g[0] += i * t;
            g[1] += j * t;
            h[0] += i * i * t;
            h[1] += i * j * t;
            h[2] += j * j * t;
        }
        (s, g, h)
    };
    let (mut u, mut v) = (0.0, 0.0);
    for _ in 0..200 {
        let (s, g, h) = eval(u, v);
        if g[0].hypot(g[1]) < 1e-13 * s {
            return Some(s);
        }
        let det = h[0] * h[2] - h[1] * h[1];
        if det.abs() < 1e-300 {
            return None;
        }
        let (du, dv) = ((h[2] * g[0] - h[1] * g[1]) / det, (h[0] * g[1] - h[1] * g[0]) / det);
        let mut t = 1.0;
        while eval(u - t * du, v - t * dv).0 > s && t > 1e-12 {
            t *= 0.5;
        }
        u -= t * du;
        v -= t * dv;
        if u.abs() > 40.0 || v.abs() > 40.0 {
            return None;
        }
    }
    None
}

#[test]
fn zg_is_reciprocal_of_minimal_inventory() {
    let mut checked = 0;
    for m in enumerate_models() {
        let ws = &m.representative;
        let Some(min) = min_inventory(ws) else { continue };
        let r = compute_zg(ws).unwrap();
        assert!((r.z_g * min - 1.0).abs() < 1e-9, "model {} ({ws}): z_g = {}, 1/min S = {}", m.id, r.z_g, 1.0 / min);
        checked += 1;
    }
    assert!(checked >= 70, "only {checked} models have an interior minimum");
}

#[test]
fn excursions_exist_unless_steps_never_lower_the_sum() {
    for m in enumerate_models() {
        let ws = &m.representative;
        let s = excursion_series(ws, 24, Exec::default()).unwrap();
        let singular = ws.steps().iter().all(|&(i, j)| i + j >= 0);
        assert_eq!(excursion_period(&s).is_none(), singular, "model {} ({ws})", m.id);
    }
}

#[test]
fn diagonal_model_splits_at_its_singularity() {
    let ws = parse_stepset("SW,NW,SE,NE").unwrap();
    let r = compute_zg(&ws).unwrap();
    assert!((r.z_g - 0.25).abs() < 1e-9);
    assert!(matches!(genus_switch(&ws, r.z_g, 1e-4), Err(FqwError::Reducible(_))));
}

#[test]
fn genus_switches_on_census_models_with_excursions() {
    let mut switched = 0;
    for m in enumerate_models() {
        let ws = &m.representative;
        if ws.steps().iter().all(|&(i, j)| i + j >= 0) || ws.to_spec() == "SW,NW,SE,NE" {
            continue;
        }
        let r = compute_zg(ws).unwrap();
        let sw = genus_switch(ws, r.z_g, 1e-4).unwrap_or_else(|err| panic!("model {} ({ws}): {err}", m.id));
        assert_eq!((sw.below.genus, sw.at.genus), (1, 0), "model {} ({ws})", m.id);
        switched += 1;
    }
    assert!(switched >= 70);
}

fn any_stepset() -> impl Strategy<Value = WeightedStepSet> {
    (1u16..256).prop_map(|mask| {
        let steps: Vec<_> = (0..8).filter(|k| mask >> k & 1 == 1).map(|k| ALL_STEPS[k]).collect();
        WeightedStepSet::counting(&steps).unwrap()
    })
}

fn weighted_stepset() -> impl Strategy<Value = WeightedStepSet> {
    prop::collection::vec(1i64..20, 8).prop_flat_map(|w| {
        (1u16..256).prop_map(move |mask| {
            let rates: Vec<_> = (0..8)
                .filter(|k| mask >> k & 1 == 1)
                .map(|k| (ALL_STEPS[k], rat(w[k], 7)))
                .collect();
            WeightedStepSet::from_rates(&rates).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stepset_spec_round_trips(ws in any_stepset()) {
        prop_assert_eq!(parse_stepset(&ws.to_spec()).unwrap(), ws);
    }

    #[test]
    fn weighted_spec_round_trips(ws in weighted_stepset()) {
        prop_assert_eq!(parse_stepset(&ws.to_spec()).unwrap(), ws);
    }

    #[test]
    fn simple_walk_integrals_increase(a in 0.001f64..0.249, b in 0.001f64..0.249) {
        prop_assume!((a - b).abs() > 1e-6);
        let (lo, hi) = (a.min(b), a.max(b));
        let q = QuadratureSpec::default();
        prop_assert!(simple_walk_f00(lo, &q).unwrap() < simple_walk_f00(hi, &q).unwrap());
        prop_assert!(simple_walk_f10(lo, &q).unwrap() < simple_walk_f10(hi, &q).unwrap());
    }

    #[test]
    fn coupled_f0_increases(a in 0.01f64..0.95, b in 0.01f64..0.95, l in 2i64..8) {
        prop_assume!((a - b).abs() > 1e-4);
        let (lo, hi) = (a.min(b), a.max(b));
        let p = CoupledParams::processor_sharing(rat(l, 10), rat(l, 10), rat(2, 1), rat(2, 1), rat(1, 2)).unwrap();
        let q = QuadratureSpec::default();
        prop_assert!(coupled_f0(lo, &p, &q).unwrap() < coupled_f0(hi, &p, &q).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn threshold_is_symmetric_in_the_coin(p in 0.2f64..0.45) {
        let (a, b) = (lambda_max(p, 1e-8).unwrap(), lambda_max(1.0 - p, 1e-8).unwrap());
        prop_assert!((a - b).abs() < 1e-6, "{} vs {}", a, b);
    }
}
