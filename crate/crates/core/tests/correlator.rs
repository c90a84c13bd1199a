use std::f64::consts::PI;

use tfim_wasserstein::ed::{ed_xx_correlator, ground_state};
use tfim_wasserstein::real::compensated_sum;
use tfim_wasserstein::tfim::{
    correlator_table, correlator_table_with, moments_from_table, mx_moments, ring_correlation_sum,
};
use tfim_wasserstein::toeplitz::{lu_minor, Toeplitz};
use tfim_wasserstein::{MinorMethod, QuadratureConfig};

fn cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

/// `C(n)` at `g = 1` from the closed-form Toeplitz determinant of the kernel `2 (-1)^m / (pi (2m+1))`.
fn critical_closed_form(n: usize) -> f64 {
    let ln_h = |n: usize| -> f64 { (1..n).map(|k| (n - k) as f64 * (k as f64).ln()).sum() };
    let nf = n as f64;
    (nf * (2.0 / PI).ln() + 2.0 * nf * (nf - 1.0) * 2f64.ln() + 4.0 * ln_h(n) - ln_h(2 * n)).exp()
}

#[test]
fn critical_table_matches_closed_form() {
    assert!((critical_closed_form(2) - 16.0 / (3.0 * PI * PI)).abs() < 1e-15);
    let t = correlator_table(1.0, 60, &cfg()).unwrap();
    for n in 1..=60 {
        let want = critical_closed_form(n);
        assert!(
            ((t.get(n) - want) / want).abs() < 1e-10,
            "n={n}: {} vs {want}",
            t.get(n)
        );
    }
}

#[test]
fn minor_chains_agree() {
    for g in [0.5, 1.0, 2.0] {
        let a = correlator_table_with(g, 12, &cfg(), MinorMethod::LevinsonMinors).unwrap();
        let b = correlator_table_with(g, 12, &cfg(), MinorMethod::LuPerN).unwrap();
        for n in 1..=12 {
            assert!((a.get(n) - b.get(n)).abs() < 1e-10, "g={g} n={n}");
        }
    }
}

/// Ring kernel at antiperiodic momenta `k = pi (2j + 1) / L`: the even-parity sector of an
/// `L`-site periodic chain.
fn ring_kernel(m: i64, g: f64, l: usize) -> f64 {
    let terms = (0..l).map(|j| {
        let k = PI * (2 * j + 1) as f64 / l as f64;
        let km = k * m as f64;
        (km.cos() * (g + k.cos()) - km.sin() * k.sin()) / (1.0 + g * g + 2.0 * g * k.cos()).sqrt()
    });
    compensated_sum(terms) / l as f64
}

fn ring_correlator(g: f64, l: usize, n: usize) -> f64 {
    let col = (0..n).map(|k| ring_kernel(k as i64 - 1, g, l)).collect();
    let row = (0..n).map(|k| ring_kernel(-(k as i64) - 1, g, l)).collect();
    lu_minor(&Toeplitz::new(col, row), n)
}

#[test]
fn finite_ring_determinant_reproduces_exact_diagonalization() {
    for g in [1.0, 1.5, 2.0, 3.0] {
        for l in [8, 10, 12] {
            let sol = ground_state(l, g).unwrap();
            for n in 1..=l / 2 {
                let ed = ed_xx_correlator(&sol, n).unwrap();
                let det = ring_correlator(g, l, n);
                assert!((ed - det).abs() < 1e-10, "g={g} L={l} n={n}: {ed} vs {det}");
            }
        }
    }
}

#[test]
fn infinite_chain_close_to_small_ring_away_from_criticality() {
    for (g, tol) in [(2.0, 1e-3), (3.0, 1e-4)] {
        let t = correlator_table(g, 3, &cfg()).unwrap();
        let sol = ground_state(12, g).unwrap();
        for n in 1..=3 {
            let ed = ed_xx_correlator(&sol, n).unwrap();
            assert!((t.get(n) - ed).abs() < tol, "g={g} n={n}");
        }
    }
    let t = correlator_table(1.0, 1, &cfg()).unwrap();
    let ed = ed_xx_correlator(&ground_state(12, 1.0).unwrap(), 1).unwrap();
    assert!((ed - t.get(1)).abs() < 0.02);
}

#[test]
fn table_invariants() {
    for g in [0.0, 0.3, 0.9, 0.99, 1.0, 1.01, 1.2, 2.0, 5.0] {
        let t = correlator_table(g, 200, &cfg()).unwrap();
        let m2 = tfim_wasserstein::tfim::magnetization(g).powi(2);
        for n in 1..=200 {
            let c = t.get(n);
            assert!((0.0..=1.0 + 1e-12).contains(&c), "g={g} n={n}: {c}");
            assert!(c <= t.get(n - 1) + 1e-12, "g={g} not monotone at n={n}");
            assert!(c >= m2 - 1e-12, "g={g} n={n} below m^2");
        }
    }
    let ordered = correlator_table(0.5, 400, &cfg()).unwrap();
    let m2 = tfim_wasserstein::tfim::magnetization(0.5f64).powi(2);
    assert!((ordered.get(400) - m2).abs() < 1e-10);
    let disordered = correlator_table(3.0, 400, &cfg()).unwrap();
    assert!(disordered.get(400) < 1e-12);
}

#[test]
fn critical_decay() {
    let t = correlator_table(1.0, 400, &cfg()).unwrap();
    let scaled: Vec<f64> = (50..=400)
        .map(|n| (n as f64).powf(0.25) * t.get(n))
        .collect();
    let lo = scaled.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = scaled.iter().copied().fold(0.0, f64::max);
    assert!((hi - lo) / lo < 0.05, "{lo}..{hi}");
}

#[test]
fn ring_moments_examples() {
    let o = mx_moments(0.0, 10, &cfg()).unwrap();
    assert_eq!((o.mx_mean, o.mx2_mean), (10.0, 100.0));
    let o = mx_moments(1e6, 10, &cfg()).unwrap();
    assert!((o.mx2_mean - 10.0).abs() < 1e-4);
    let coarse = mx_moments(2.0, 500, &cfg()).unwrap();
    let fine = mx_moments(2.0, 500, &QuadratureConfig::with_tol(1e-14)).unwrap();
    assert!((coarse.mx2_mean - fine.mx2_mean).abs() / 500.0 < 1e-6);
}

#[test]
fn variance_is_non_negative() {
    for g in [0.0, 0.2, 0.5, 0.8, 0.95, 0.999, 1.0, 1.001, 1.05, 1.5, 3.0] {
        let t = correlator_table(g, 150, &cfg()).unwrap();
        for l in [2, 3, 10, 51, 100, 300] {
            let o = moments_from_table(&t, l).unwrap();
            assert!(
                o.variance() >= -1e-9 * o.mx2_mean,
                "g={g} L={l}: {}",
                o.variance()
            );
        }
    }
}

#[test]
fn ring_sum_independent_of_order() {
    for g in [0.7, 1.0, 1.3] {
        let t = correlator_table(g, 350, &cfg()).unwrap();
        let l = 700;
        let forward = ring_correlation_sum(&t, l);
        let backward = compensated_sum((1..l).rev().map(|d| t.get(d.min(l - d))));
        assert!((forward - backward).abs() < 1e-9);
    }
}

#[test]
fn prefix_of_longer_table() {
    for g in [0.4, 1.0, 1.7] {
        let short = correlator_table(g, 10, &cfg()).unwrap();
        let long = correlator_table(g, 100, &cfg()).unwrap();
        for n in 1..=10 {
            assert!((short.get(n) - long.get(n)).abs() < 1e-12);
        }
    }
}
