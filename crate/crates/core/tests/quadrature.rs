use std::f64::consts::PI;

use tfim_wasserstein::quadrature::{g_integral, l_integral};
use tfim_wasserstein::QuadratureConfig;

const COUPLINGS: [f64; 10] = [0.05, 0.3, 0.7, 0.9, 0.99, 1.0, 1.01, 1.1, 2.0, 7.5];
const HARMONICS: [i64; 8] = [-40, -3, -1, 0, 1, 4, 25, 300];

fn doubled(cfg: &QuadratureConfig) -> QuadratureConfig {
    QuadratureConfig {
        nodes_per_panel: 2 * cfg.nodes_per_panel,
        ..cfg.clone()
    }
}

#[test]
fn node_doubling_is_stable() {
    let base = QuadratureConfig::default();
    let fine = doubled(&base);
    for g in COUPLINGS {
        for m in HARMONICS {
            let a = g_integral(m, g, &base).unwrap();
            let b = g_integral(m, g, &fine).unwrap();
            assert!((a - b).abs() < 1e-10, "G({m}; {g}): {a} vs {b}");
            if (g - 1.0).abs() >= 0.1 {
                let a = l_integral(m, g, &base).unwrap();
                let b = l_integral(m, g, &fine).unwrap();
                assert!((a - b).abs() < 1e-10, "L({m}; {g}): {a} vs {b}");
            }
        }
    }
}

#[test]
fn tenfold_nodes_reproduce_l() {
    let base = QuadratureConfig::default();
    let dense = QuadratureConfig {
        nodes_per_panel: 10 * base.nodes_per_panel,
        ..base.clone()
    };
    let v = l_integral(1, 2.0, &base).unwrap();
    assert!((v - l_integral(1, 2.0, &dense).unwrap()).abs() < 1e-10);
    assert!((l_integral(0, 1e6, &base).unwrap() - 1.0).abs() < 1e-6);
    assert!(l_integral(3, 1e6, &base).unwrap().abs() < 1e-6);
}

#[test]
fn closed_forms() {
    let cfg = QuadratureConfig::default();
    for m in -30..30 {
        let want = if m == -1 { 1.0 } else { 0.0 };
        assert!((g_integral(m, 0.0, &cfg).unwrap() - want).abs() < 1e-12);
        let crit = 2.0 * (-1f64).powi(m as i32) / (PI * (2 * m + 1) as f64);
        assert!(
            (g_integral(m, 1.0, &cfg).unwrap() - crit).abs() < 1e-12,
            "m={m}"
        );
    }
}

#[test]
fn g_is_continuous_through_the_critical_point() {
    let cfg = QuadratureConfig::default();
    for m in [-1, 0, 3] {
        let at = g_integral(m, 1.0, &cfg).unwrap();
        for eps in [1e-6, 1e-9] {
            assert!((g_integral(m, 1.0 - eps, &cfg).unwrap() - at).abs() < 10.0 * eps);
            assert!((g_integral(m, 1.0 + eps, &cfg).unwrap() - at).abs() < 10.0 * eps);
        }
    }
}
