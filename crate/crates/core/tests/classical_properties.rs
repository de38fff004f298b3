use okounkov_core::classical::{
    chebyshev_constant, chebyshev_number, leja_fekete, transfinite_diameter, AdmissibleWeight, CompactSet, SetDescriptor,
};
use proptest::prelude::*;

fn cloud() -> impl Strategy<Value = Vec<[f64; 2]>> {
    prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b)| [a, b]), 8..20)
}

fn weight() -> impl Strategy<Value = AdmissibleWeight> {
    prop_oneof![
        Just(AdmissibleWeight::Unit),
        (-1.0f64..1.0).prop_map(|a| AdmissibleWeight::Exponential { a }),
        (0.0f64..2.0).prop_map(|p| AdmissibleWeight::Modulus { p }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn submultiplicative_on_clouds(points in cloud(), h in weight(), k in 1usize..4, m in 1usize..4) {
        let set = CompactSet::new(SetDescriptor::Cloud { points }, 1).unwrap();
        prop_assume!(set.len() > k + m);
        let yk = chebyshev_number(&set, k, &h).unwrap();
        let ym = chebyshev_number(&set, m, &h).unwrap();
        let ykm = chebyshev_number(&set, k + m, &h).unwrap();
        // The certified lower bound can never exceed the product of attained values.
        prop_assert!(ykm.ln_lower_bound <= yk.ln_value + ym.ln_value + 1e-12);
        if ykm.converged {
            prop_assert!(ykm.ln_value <= yk.ln_value + ym.ln_value + 1e-5);
        }
    }

    #[test]
    fn submultiplicative_on_intervals(a in -2.0f64..0.0, len in 0.5f64..3.0, w in -1.0f64..1.0, k in 1usize..8, m in 1usize..8) {
        let d = SetDescriptor::Interval { a, b: a + len };
        let h = AdmissibleWeight::Exponential { a: w };
        let y = |j: usize| chebyshev_number(&CompactSet::new(d.clone(), 256).unwrap(), j, &h).unwrap().ln_value;
        prop_assert!(y(k + m) <= y(k) + y(m) + 1e-9);
    }

    #[test]
    fn nested_refinement_is_monotone(a in -2.0f64..0.0, len in 0.5f64..3.0, w in -1.0f64..1.0, k in 1usize..10) {
        let h = AdmissibleWeight::Exponential { a: w };
        let set = CompactSet::for_degree(SetDescriptor::Interval { a, b: a + len }, k).unwrap();
        let n = chebyshev_number(&set, k, &h).unwrap();
        let r = n.refinement.unwrap();
        // both runs bracket the same continuum value, so the refined value
        // cannot fall below the coarse certified lower bound
        prop_assert!(n.ln_lower_bound <= n.ln_value + 1e-12);
        prop_assert!(r.refined_ln_value >= n.ln_lower_bound - 1e-12);
        prop_assert!(r.stable, "{}", r.relative_change);
    }

    #[test]
    fn leja_polish_never_loses(points in cloud(), k in 2usize..6) {
        let set = CompactSet::new(SetDescriptor::Cloud { points }, 1).unwrap();
        prop_assume!(set.len() >= k);
        let f = leja_fekete(&set, k).unwrap();
        prop_assert!(f.ln_d_greedy <= f.ln_d + 1e-12);
    }
}

#[test]
fn circle_refinement_is_monotone() {
    for k in [3, 7] {
        for h in [AdmissibleWeight::Modulus { p: 1.0 }, AdmissibleWeight::Exponential { a: 0.5 }] {
            let coarse = CompactSet::new(SetDescriptor::Circle { r: 1.0, center: [0.5, 0.0] }, 4 * k).unwrap();
            let n = chebyshev_number(&coarse, k, &h).unwrap();
            assert!(n.refinement.unwrap().refined_ln_value >= n.ln_value - 1e-5);
            let fine = CompactSet::for_degree(SetDescriptor::Circle { r: 1.0, center: [0.5, 0.0] }, k).unwrap();
            let n = chebyshev_number(&fine, k, &h).unwrap();
            let r = n.refinement.unwrap();
            assert!(r.refined_ln_value >= n.ln_value - 1e-5);
            assert!(r.stable, "{k} {h:?}: {}", r.relative_change);
        }
    }
}

#[test]
fn transfinite_diameter_matches_chebyshev_constant() {
    let sets = [
        SetDescriptor::Disc { r: 1.0, center: [0.0, 0.0] },
        SetDescriptor::Interval { a: -1.0, b: 1.0 },
        SetDescriptor::Circle { r: 2.0, center: [0.0, 0.0] },
    ];
    let logs: Vec<(f64, f64)> = sets
        .iter()
        .map(|d| {
            let c = chebyshev_constant(d, &AdmissibleWeight::Unit, 24).unwrap();
            let t = transfinite_diameter(d, 40).unwrap();
            (t.limit.ln(), c.limit.ln())
        })
        .collect();
    for (t, c) in &logs {
        assert!((t - c).abs() <= 0.05, "{t} vs {c}");
    }
    for i in 0..logs.len() {
        for j in 0..i {
            let dt = logs[i].0 - logs[j].0;
            let dc = logs[i].1 - logs[j].1;
            assert!((dt - dc).abs() <= 0.05);
        }
    }
    assert!((logs[2].1 - 2f64.ln()).abs() < 1e-6);
}
