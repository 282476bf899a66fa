mod support;

use layerscat::special_functions::riccati_table;
use layerscat::{phase_shifts, LayeredPotential};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::{phase_difference, reference_phase_shifts, riccati_pair};

fn assert_matches_reference(p: &LayeredPotential, k: f64, l_max: usize, tol: f64) {
    let layers: Vec<(f64, f64)> = p
        .breakpoints()
        .iter()
        .copied()
        .zip(p.values().iter().copied())
        .collect();
    let reference = reference_phase_shifts(&layers, k, l_max);
    let got = phase_shifts(p, k, l_max).unwrap();
    for l in 0..=l_max {
        let d = phase_difference(got.shifts[l], reference[l]);
        assert!(
            d.abs() < tol,
            "{p:?} k={k} l={l}: {} vs {} ",
            got.shifts[l],
            reference[l]
        );
    }
}

#[test]
fn single_attractive_layer_matches_radial_integration() {
    let p = LayeredPotential::step(8.0, -4.0).unwrap();
    assert_matches_reference(&p, 2.0, 10, 1e-6);
}

#[test]
fn barrier_with_forbidden_region_matches_radial_integration() {
    let p = LayeredPotential::new(vec![2.0, 5.0], vec![-6.0, 9.0]).unwrap();
    assert_matches_reference(&p, 2.5, 30, 1e-6);
}

#[test]
fn seeded_random_potentials_match_variable_phase() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..6 {
        let n = rng.gen_range(1..=3);
        let mut radii: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..10.0)).collect();
        radii.sort_by(f64::total_cmp);
        let values: Vec<f64> = (0..n).map(|_| rng.gen_range(-20.0..0.0)).collect();
        let p = LayeredPotential::new(radii, values).unwrap();
        for k in [1.0, 2.5, 4.0] {
            assert_matches_reference(&p, k, 30, 1e-6);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn riccati_table_matches_reference(x in 0.05f64..120.0, l_max in 0usize..=35) {
        let t = riccati_table(l_max, x).unwrap();
        let (j, n) = riccati_pair(l_max, x);
        for l in 0..=l_max {
            let sj = j[l].abs().max(1e-300);
            prop_assert!((t.j[l] - j[l]).abs() <= 1e-9 * sj + 1e-14, "j l={} x={}", l, x);
            prop_assert!((t.n[l] - n[l]).abs() <= 1e-9 * n[l].abs() + 1e-14, "n l={} x={}", l, x);
            prop_assert!((t.wronskian(l) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn riccati_asymptotics(l in 0usize..=10, x in 100.0f64..400.0) {
        prop_assume!(x >= 10.0 * l as f64);
        let t = riccati_table(l, x).unwrap();
        let phase = x - l as f64 * std::f64::consts::FRAC_PI_2;
        let bound = (l * (l + 1)) as f64 / x;
        prop_assert!((t.j[l] - phase.sin()).abs() <= bound + 1e-9);
        prop_assert!((t.n[l] + phase.cos()).abs() <= bound + 1e-9);
    }

    #[test]
    fn high_orders_decouple(
        radius in 0.5f64..4.0,
        value in -20.0f64..0.0,
        k in 0.5f64..2.0,
    ) {
        let p = LayeredPotential::step(radius, value).unwrap();
        let l_low = (k * radius).ceil() as usize + 10;
        let d = phase_shifts(&p, k, l_low + 5).unwrap();
        for l in l_low..=l_low + 5 {
            prop_assert!(d.shifts[l].abs() < 1e-6, "l={} delta={}", l, d.shifts[l]);
        }
    }
}
