//! Infinite-chain TFIM quantities: `<sx_0 sx_n>` as Toeplitz determinants, the spontaneous
//! magnetization, and `<Mx>`, `<Mx^2>` on a periodic ring of `L` sites.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::{KernelIntegrator, QuadratureConfig};
use crate::real::{CompensatedSum, Real};
use crate::toeplitz::{levinson_minors, lu_minor, Toeplitz};

/// Minors below this magnitude end the Levinson chain.
pub const BREAKDOWN_THRESHOLD: f64 = 1e-13;
/// Correlators below this magnitude are stored as exactly zero.
pub const CLAMP_THRESHOLD: f64 = 1e-15;

/// How a [`CorrelatorTable`] was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MinorMethod {
    /// Single `O(n^2)` Levinson chain over all orders.
    LevinsonMinors,
    /// Pivoted elimination per order, for every order past a recursion breakdown.
    LuPerN,
}

impl MinorMethod {
    pub fn tag(self) -> &'static str {
        match self {
            MinorMethod::LevinsonMinors => "LEVINSON_MINORS",
            MinorMethod::LuPerN => "LU_PER_N",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "LEVINSON_MINORS" => Some(MinorMethod::LevinsonMinors),
            "LU_PER_N" => Some(MinorMethod::LuPerN),
            _ => None,
        }
    }
}

/// `C(n) = <sx_0 sx_n>` for `n = 1..=n_max` at one coupling.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelatorTable<T> {
    pub g: T,
    pub n_max: usize,
    /// `values[n - 1] = C(n)`.
    pub values: Vec<T>,
    pub tol: T,
    pub method: MinorMethod,
}

impl<T: Real> CorrelatorTable<T> {
    /// `C(n)`; `C(0) = 1`.
    pub fn get(&self, n: usize) -> T {
        if n == 0 {
            T::one()
        } else {
            self.values[n - 1]
        }
    }

    /// Table restricted to `C(1..=n_max)`.
    pub fn prefix(&self, n_max: usize) -> Option<Self> {
        (n_max >= 1 && n_max <= self.n_max).then(|| Self {
            g: self.g,
            n_max,
            values: self.values[..n_max].to_vec(),
            tol: self.tol,
            method: self.method,
        })
    }
}

/// Moments of `Mx = sum_i sx_i` in one ground state on a ring of `l` sites.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundStateObservables<T> {
    pub g: T,
    pub l: usize,
    /// `<Mx>`
    pub mx_mean: T,
    /// `<Mx^2>`
    pub mx2_mean: T,
}

impl<T: Real> GroundStateObservables<T> {
    pub fn variance(&self) -> T {
        self.mx2_mean - self.mx_mean * self.mx_mean
    }
}

/// Spontaneous magnetization per site, `(1 - g^2)^(1/8)` for `g <= 1` and zero beyond.
pub fn magnetization<T: Real>(g: T) -> T {
    if g <= T::one() {
        (T::one() - g * g).max(T::zero()).powf(T::lit(0.125))
    } else {
        T::zero()
    }
}

/// Correlators `C(1..=n_max)` as leading minors of `[G(i - j - 1)]`.
pub fn correlator_table<T: Real>(
    g: T,
    n_max: usize,
    cfg: &QuadratureConfig<T>,
) -> Result<CorrelatorTable<T>> {
    correlator_table_with(g, n_max, cfg, MinorMethod::LevinsonMinors)
}

/// As [`correlator_table`], forcing a method. `LuPerN` evaluates every order by elimination.
pub fn correlator_table_with<T: Real>(
    g: T,
    n_max: usize,
    cfg: &QuadratureConfig<T>,
    method: MinorMethod,
) -> Result<CorrelatorTable<T>> {
    if n_max < 1 {
        return Err(Error::InvalidInput("n_max must be >= 1".into()));
    }
    if !(g >= T::zero()) || !g.is_finite() {
        return Err(Error::InvalidInput(format!(
            "coupling must be >= 0, got {g}"
        )));
    }
    let toeplitz = kernel_toeplitz(g, n_max, cfg)?;
    let threshold = T::lit(BREAKDOWN_THRESHOLD);

    let (raw, method) = match method {
        MinorMethod::LuPerN => (
            (1..=n_max).map(|n| lu_minor(&toeplitz, n)).collect(),
            method,
        ),
        MinorMethod::LevinsonMinors => match levinson_minors(&toeplitz, threshold) {
            Ok(minors) => (minors, MinorMethod::LevinsonMinors),
            Err(breakdown) => {
                log::debug!(
                    "minor chain broke down at order {} for g = {g}; switching to elimination",
                    breakdown.order
                );
                (
                    finish_by_elimination(&toeplitz, breakdown.minors),
                    MinorMethod::LuPerN,
                )
            }
        },
    };

    let clamp = T::lit(CLAMP_THRESHOLD);
    let mut clamped = 0usize;
    let values = raw
        .into_iter()
        .map(|c| {
            if c.abs() < clamp && c != T::zero() {
                clamped += 1;
                T::zero()
            } else {
                c
            }
        })
        .collect();
    if clamped > 0 {
        log::warn!("g = {g}: {clamped} correlator values below {CLAMP_THRESHOLD:e} clamped to 0");
    }

    Ok(CorrelatorTable {
        g,
        n_max,
        values,
        tol: cfg.target_abs_tol,
        method,
    })
}

/// Continues a broken-down chain by elimination. Correlators are non-increasing in `n`,
/// so once one falls below the clamp threshold every later order is zero at that resolution.
fn finish_by_elimination<T: Real>(t: &Toeplitz<T>, mut minors: Vec<T>) -> Vec<T> {
    let n_max = t.order();
    let clamp = T::lit(CLAMP_THRESHOLD);
    while minors.len() < n_max {
        let n = minors.len() + 1;
        let det = lu_minor(t, n);
        minors.push(det);
        if det.abs() < clamp {
            minors.resize(n_max, T::zero());
        }
    }
    minors
}

/// Toeplitz matrix `T[i][j] = G(i - j - 1)` of order `n_max`.
fn kernel_toeplitz<T: Real>(g: T, n_max: usize, cfg: &QuadratureConfig<T>) -> Result<Toeplitz<T>> {
    let integrator = KernelIntegrator::new(cfg.clone())?;
    let lo = -(n_max as i64);
    let hi = n_max as i64 - 2;
    // kernel[k] = G(lo + k)
    let kernel = (lo..=hi)
        .into_par_iter()
        .map(|m| integrator.g_integral(m, g))
        .collect::<Result<Vec<T>>>()?;
    let at = |m: i64| kernel[(m - lo) as usize];
    let col = (0..n_max as i64).map(|k| at(k - 1)).collect();
    let row = (0..n_max as i64).map(|k| at(-k - 1)).collect();
    Ok(Toeplitz::new(col, row))
}

/// `<Mx>` and `<Mx^2>` on a periodic ring of `l` sites.
///
/// `<Mx>` is the thermodynamic-limit magnetization times `l` at every size. `<Mx^2>` sums
/// infinite-chain correlators at minimal-image separations, with the local term `(sx)^2 = 1`.
pub fn mx_moments<T: Real>(
    g: T,
    l: usize,
    cfg: &QuadratureConfig<T>,
) -> Result<GroundStateObservables<T>> {
    if l < 2 {
        return Err(Error::InvalidInput(format!("ring needs L >= 2, got {l}")));
    }
    let table = correlator_table(g, l / 2, cfg)?;
    moments_from_table(&table, l)
}

/// Ring moments from an existing table, which must reach `n_max >= l / 2`.
pub fn moments_from_table<T: Real>(
    table: &CorrelatorTable<T>,
    l: usize,
) -> Result<GroundStateObservables<T>> {
    if l < 2 {
        return Err(Error::InvalidInput(format!("ring needs L >= 2, got {l}")));
    }
    if table.n_max < l / 2 {
        return Err(Error::InvalidInput(format!(
            "table reaches n = {} but L = {l} needs {}",
            table.n_max,
            l / 2
        )));
    }
    let lf = T::of_usize(l);
    Ok(GroundStateObservables {
        g: table.g,
        l,
        mx_mean: lf * magnetization(table.g),
        mx2_mean: lf * (T::one() + ring_correlation_sum(table, l)),
    })
}

/// `sum_{d=1}^{l-1} C(min(d, l - d))`.
pub fn ring_correlation_sum<T: Real>(table: &CorrelatorTable<T>, l: usize) -> T {
    let mut acc = CompensatedSum::new();
    for d in 1..l {
        acc.add(table.get(d.min(l - d)));
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cfg() -> QuadratureConfig<f64> {
        QuadratureConfig::default()
    }

    #[test]
    fn magnetization_values() {
        assert_eq!(magnetization(0.0), 1.0);
        assert_eq!(magnetization(1.0), 0.0);
        assert_eq!(magnetization(1.5), 0.0);
        assert!((magnetization(0.6) - 0.64f64.powf(0.125)).abs() < 1e-15);
        assert!((magnetization(0.6f64) - 0.945_741_6).abs() < 1e-7);
        assert!(magnetization(1.0 - 1e-12) > 0.0);
    }

    #[test]
    fn ordered_limit_is_all_ones() {
        let t = correlator_table(0.0, 20, &cfg()).unwrap();
        assert!(t.values.iter().all(|&c| c == 1.0));
        assert_eq!(t.method, MinorMethod::LevinsonMinors);
    }

    #[test]
    fn critical_nearest_neighbour_is_two_over_pi() {
        let t = correlator_table(1.0, 3, &cfg()).unwrap();
        assert!((t.get(1) - 2.0 / PI).abs() < 1e-12);
        // det [[G(-1), G(-2)], [G(0), G(-1)]] = 16 / (3 pi^2) at g = 1
        assert!((t.get(2) - 16.0 / (3.0 * PI * PI)).abs() < 1e-12);
    }

    #[test]
    fn disordered_table_survives_breakdown() {
        let t = correlator_table(3.0, 80, &cfg()).unwrap();
        assert_eq!(t.method, MinorMethod::LuPerN);
        assert!(t.values.iter().all(|&c| (0.0..=1.0).contains(&c)));
        assert_eq!(*t.values.last().unwrap(), 0.0);
        assert!(t.values.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn moments_limits() {
        let m = mx_moments(0.0, 10, &cfg()).unwrap();
        assert_eq!((m.mx_mean, m.mx2_mean), (10.0, 100.0));
        let m = mx_moments(1e6, 10, &cfg()).unwrap();
        assert_eq!(m.mx_mean, 0.0);
        assert!((m.mx2_mean - 10.0).abs() < 1e-4);
    }

    #[test]
    fn short_table_is_rejected() {
        let t = correlator_table(0.5, 3, &cfg()).unwrap();
        assert!(moments_from_table(&t, 10).is_err());
        assert!(mx_moments(0.5, 1, &cfg()).is_err());
        assert!(correlator_table(0.5, 0, &cfg()).is_err());
    }

    #[test]
    fn odd_ring_uses_both_images() {
        let t = correlator_table(0.8, 3, &cfg()).unwrap();
        let s = ring_correlation_sum(&t, 7);
        let want = 2.0 * (t.get(1) + t.get(2) + t.get(3));
        assert!((s - want).abs() < 1e-14);
    }

    #[test]
    fn prefix_view() {
        let t = correlator_table(0.5, 10, &cfg()).unwrap();
        let p = t.prefix(4).unwrap();
        assert_eq!(p.values, t.values[..4]);
        assert!(t.prefix(11).is_none());
    }
}
