//! Parameter sweeps and critical-exponent extraction by log-log least squares.
//!
//! Four scaling regimes are covered:
//!
//! - [`qfi_size_scaling`]: `F_Q ~ L^(2 - eta)` at `g = 1`.
//! - [`distance_size_scaling`]: `D^2 ~ L^Delta` for a pair straddling the critical point
//!   (finite-size regime, `L << xi`).
//! - [`subleading_exponent`]: `(D^2/L^2 - 1/2) L ~ g_sigma_tilde^(nu (eta - 1))` with `g_rho = 0`
//!   (thermodynamic regime, `xi << L`).
//! - [`leading_exponent`]: `D^2/L^2 - c ~ (-g_rho_tilde)^(2 beta)` with `sigma` deep in the
//!   disordered phase.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::QuadratureConfig;
use crate::real::Real;
use crate::tfim::{correlator_table, moments_from_table, CorrelatorTable, GroundStateObservables};
use crate::wasserstein::{distance_squared, qfi, G_CRITICAL};

/// Default ring sizes for size-scaling fits.
pub const SIZE_LADDER: [usize; 14] = [
    20, 40, 80, 120, 150, 200, 250, 300, 350, 400, 450, 500, 600, 700,
];
/// `xi` must be below `L / margin` (thermodynamic regime) or above `margin * L` (finite size).
pub const DEFAULT_WINDOW_MARGIN: f64 = 10.0;
/// Offset-subtraction rounds in [`leading_exponent`].
pub const LEADING_OFFSET_ITERATIONS: usize = 2;

/// One ordinary-least-squares fit of `ln y = ln amplitude + exponent ln x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult<T> {
    pub exponent: T,
    pub amplitude: T,
    /// Standard error of the slope.
    pub stderr: T,
    pub r_squared: T,
    /// Smallest and largest abscissa used.
    pub window: (T, T),
    pub n_points: usize,
}

/// Power-law fit by OLS in log-log space.
///
/// Logs are taken of ratios to the first point, so rescaling all `y` (or all `x`) by a power
/// of two leaves the slope bit-identical.
pub fn fit_power_law<T: Real>(points: &[(T, T)]) -> Result<FitResult<T>> {
    fit_relative(points).map(|(fit, _)| fit)
}

/// The fit plus its intercept relative to the first point, `ln(y_hat/y0)` at `x = x0`.
fn fit_relative<T: Real>(points: &[(T, T)]) -> Result<(FitResult<T>, T)> {
    if points.len() < 3 {
        return Err(Error::InsufficientPoints(points.len()));
    }
    for &(x, y) in points {
        if !(x > T::zero() && y > T::zero()) || !x.is_finite() || !y.is_finite() {
            return Err(Error::NonPositiveData {
                x: x.f64(),
                y: y.f64(),
            });
        }
    }
    let (x0, y0) = points[0];
    let lx: Vec<T> = points.iter().map(|&(x, _)| (x / x0).ln()).collect();
    let ly: Vec<T> = points.iter().map(|&(_, y)| (y / y0).ln()).collect();
    let n = T::of_usize(points.len());
    let mx = lx.iter().copied().sum::<T>() / n;
    let my = ly.iter().copied().sum::<T>() / n;
    let sxx: T = lx.iter().map(|&x| (x - mx) * (x - mx)).sum();
    if sxx == T::zero() {
        return Err(Error::DegenerateAbscissa);
    }
    let sxy: T = lx.iter().zip(&ly).map(|(&x, &y)| (x - mx) * (y - my)).sum();
    let syy: T = ly.iter().map(|&y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept_rel = my - slope * mx;
    let ss_res: T = lx
        .iter()
        .zip(&ly)
        .map(|(&x, &y)| {
            let r = y - (intercept_rel + slope * x);
            r * r
        })
        .sum();
    let r_squared = if syy == T::zero() {
        T::one()
    } else {
        (T::one() - ss_res / syy).max(T::zero()).min(T::one())
    };
    let dof = T::of_usize(points.len() - 2);
    let stderr = (ss_res / dof / sxx).sqrt();
    // ln y = ln y0 + intercept_rel + slope (ln x - ln x0)
    let amplitude = (y0.ln() + intercept_rel - slope * x0.ln()).exp();
    let (lo, hi) = points
        .iter()
        .fold((points[0].0, points[0].0), |(lo, hi), &(x, _)| {
            (lo.min(x), hi.max(x))
        });
    let fit = FitResult {
        exponent: slope,
        amplitude,
        stderr,
        r_squared,
        window: (lo, hi),
        n_points: points.len(),
    };
    Ok((fit, intercept_rel))
}

/// Supplies correlator tables; implementations may cache.
pub trait TableSource: Sync {
    fn table(&self, g: f64, n_max: usize) -> Result<CorrelatorTable<f64>>;

    /// `<Mx>`, `<Mx^2>` on a ring of `l` sites.
    fn moments(&self, g: f64, l: usize) -> Result<GroundStateObservables<f64>> {
        if l < 2 {
            return Err(Error::InvalidInput(format!("ring needs L >= 2, got {l}")));
        }
        moments_from_table(&self.table(g, l / 2)?, l)
    }

    /// Moments at one coupling for several sizes, from a single table.
    fn moments_for_sizes(
        &self,
        g: f64,
        sizes: &[usize],
    ) -> Result<Vec<GroundStateObservables<f64>>> {
        let Some(&largest) = sizes.iter().max() else {
            return Ok(Vec::new());
        };
        if largest < 2 {
            return Err(Error::InvalidInput(format!(
                "ring needs L >= 2, got {largest}"
            )));
        }
        let table = self.table(g, largest / 2)?;
        sizes
            .iter()
            .map(|&l| moments_from_table(&table, l))
            .collect()
    }
}

/// Computes every table from scratch.
#[derive(Debug, Clone, Default)]
pub struct DirectSource {
    pub cfg: QuadratureConfig<f64>,
}

impl DirectSource {
    pub fn new(quad_tol: f64) -> Self {
        Self {
            cfg: QuadratureConfig::with_tol(quad_tol),
        }
    }
}

impl TableSource for DirectSource {
    fn table(&self, g: f64, n_max: usize) -> Result<CorrelatorTable<f64>> {
        correlator_table(g, n_max, &self.cfg)
    }
}

/// What a sweep measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    QfiVsL,
    D2VsL,
    SubleadingVsG,
    LeadingVsG,
}

/// Declarative description of one exponent extraction.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub g_rho: Vec<f64>,
    pub g_sigma: Vec<f64>,
    pub sizes: Vec<usize>,
    pub quad_tol: f64,
    pub mode: SweepMode,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() || !self.sizes.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidInput(
                "sizes must be non-empty and strictly increasing".into(),
            ));
        }
        for (name, grid) in [("g_rho", &self.g_rho), ("g_sigma", &self.g_sigma)] {
            if grid.iter().any(|&g| !(g >= 0.0) || !g.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "{name} must be non-negative and finite"
                )));
            }
            if !grid.windows(2).all(|w| w[0] < w[1]) {
                return Err(Error::InvalidInput(format!(
                    "{name} grid must be sorted and distinct"
                )));
            }
        }
        if !(self.quad_tol > 0.0) {
            return Err(Error::InvalidInput("quad_tol must be positive".into()));
        }
        Ok(())
    }
}

/// One fitted data point with its provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub g_rho: f64,
    pub g_sigma: f64,
    pub l: usize,
    /// Abscissa of the fit (`L` or a reduced coupling).
    pub x: f64,
    /// Ordinate of the fit.
    pub y: f64,
}

/// Sweep data plus the exponent extracted from it.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRun {
    pub points: Vec<SweepPoint>,
    pub fit: FitResult<f64>,
    /// Constant subtracted from the ordinate before the final fit.
    pub offset: f64,
    /// Non-fatal departures from the assumed scaling regime.
    pub warnings: Vec<String>,
}

fn check_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.len() < 3 {
        return Err(Error::InsufficientPoints(sizes.len()));
    }
    if !sizes.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidInput(
            "sizes must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Dispatches a [`SweepSpec`]. Grid modes use the first size; size modes the first couplings.
pub fn run_sweep<S: TableSource>(spec: &SweepSpec, source: &S) -> Result<ScalingRun> {
    spec.validate()?;
    let first = |grid: &[f64], name: &str| {
        grid.first()
            .copied()
            .ok_or_else(|| Error::InvalidInput(format!("{name} grid is empty")))
    };
    match spec.mode {
        SweepMode::QfiVsL => qfi_size_scaling(source, &spec.sizes),
        SweepMode::D2VsL => distance_size_scaling(
            source,
            first(&spec.g_rho, "g_rho")?,
            first(&spec.g_sigma, "g_sigma")?,
            &spec.sizes,
        ),
        SweepMode::SubleadingVsG => subleading_exponent(
            source,
            &spec.g_sigma,
            spec.sizes[0],
            &SubleadingOptions::default(),
        ),
        SweepMode::LeadingVsG => leading_exponent(
            source,
            &spec.g_rho,
            first(&spec.g_sigma, "g_sigma")?,
            spec.sizes[0],
        ),
    }
}

/// `F_Q(g = 1, L)` across sizes, fitted against `L`.
pub fn qfi_size_scaling<S: TableSource>(source: &S, sizes: &[usize]) -> Result<ScalingRun> {
    check_sizes(sizes)?;
    if let Some(&bad) = sizes.iter().find(|&&l| l % 2 != 0 || l < 20) {
        return Err(Error::InvalidInput(format!(
            "QFI size scaling needs even sizes >= 20, got {bad}"
        )));
    }
    let obs = source.moments_for_sizes(G_CRITICAL, sizes)?;
    let points = obs
        .iter()
        .map(|o| {
            Ok(SweepPoint {
                g_rho: o.g,
                g_sigma: o.g,
                l: o.l,
                x: o.l as f64,
                y: qfi(o)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    finish(points, 0.0, Vec::new())
}

/// `D^2(rho, sigma)` across sizes, fitted against `L`.
pub fn distance_size_scaling<S: TableSource>(
    source: &S,
    g_rho: f64,
    g_sigma: f64,
    sizes: &[usize],
) -> Result<ScalingRun> {
    check_sizes(sizes)?;
    for g in [g_rho, g_sigma] {
        if !(g > 0.0 && g < 2.0) {
            return Err(Error::InvalidInput(format!(
                "size scaling of D^2 needs couplings in (0, 2), got {g}"
            )));
        }
    }
    let largest = *sizes.last().expect("checked above") as f64;
    let mut warnings = Vec::new();
    for (name, g) in [("g_rho", g_rho), ("g_sigma", g_sigma)] {
        let reduced = (g - G_CRITICAL).abs();
        let xi = 1.0 / reduced;
        if xi < largest {
            let msg = format!(
                "AssumptionViolation: {name} = {g} has xi ~ {xi:.3e} < max(L) = {largest}; finite-size regime not satisfied"
            );
            log::warn!("{msg}");
            warnings.push(msg);
        }
    }
    let (rho, sigma) = rayon::join(
        || source.moments_for_sizes(g_rho, sizes),
        || source.moments_for_sizes(g_sigma, sizes),
    );
    let points = rho?
        .iter()
        .zip(&sigma?)
        .map(|(a, b)| {
            let d = distance_squared(a, b)?;
            Ok(SweepPoint {
                g_rho,
                g_sigma,
                l: a.l,
                x: a.l as f64,
                y: d.d_squared,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    finish(points, 0.0, warnings)
}

/// Knobs for [`subleading_exponent`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubleadingOptions {
    /// Points need `xi = 1 / (g - 1) < L / window_margin`.
    pub window_margin: f64,
    /// Keep the local `(sx)^2` terms of both states in `D^2` (the default).
    pub include_local_terms: bool,
}

impl Default for SubleadingOptions {
    fn default() -> Self {
        Self {
            window_margin: DEFAULT_WINDOW_MARGIN,
            include_local_terms: true,
        }
    }
}

/// `y = (D^2/L^2 - 1/2) L` at `g_rho = 0` against `g_sigma - 1`.
pub fn subleading_exponent<S: TableSource>(
    source: &S,
    g_sigma_grid: &[f64],
    l: usize,
    opts: &SubleadingOptions,
) -> Result<ScalingRun> {
    let lf = l as f64;
    let mut warnings = Vec::new();
    let admitted: Vec<f64> = g_sigma_grid
        .iter()
        .copied()
        .filter(|&g| {
            let ok = g > G_CRITICAL && 1.0 / (g - G_CRITICAL) < lf / opts.window_margin;
            if !ok {
                warnings.push(format!(
                    "g_sigma = {g} dropped: outside 1 < g with xi < L/{}",
                    opts.window_margin
                ));
            }
            ok
        })
        .collect();
    if admitted.is_empty() {
        return Err(Error::WindowEmpty(format!(
            "no g_sigma > 1 with xi < {} at L = {l}",
            lf / opts.window_margin
        )));
    }
    let rho = source.moments(0.0, l)?;
    let sigma = admitted
        .par_iter()
        .map(|&g| source.moments(g, l))
        .collect::<Result<Vec<_>>>()?;
    // both states contribute a local term L to <Mx^2>, i.e. 1/2 + 1/2 in units of L
    let local = if opts.include_local_terms { 0.0 } else { 1.0 };
    let points = sigma
        .iter()
        .map(|b| {
            let d = distance_squared(&rho, b)?;
            Ok(SweepPoint {
                g_rho: 0.0,
                g_sigma: b.g,
                l,
                x: b.g - G_CRITICAL,
                y: (d.per_site_squared() - 0.5) * lf - local,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    finish(points, 0.5, warnings)
}

/// `D^2/L^2` against `-(g_rho - 1)` with `sigma` deep in the disordered phase.
///
/// The `g_rho`-independent offset is estimated by iterated fitting: fit, take the offset as
/// the residual of the power law at the smallest `-g_rho_tilde`, subtract, refit.
pub fn leading_exponent<S: TableSource>(
    source: &S,
    g_rho_grid: &[f64],
    g_sigma: f64,
    l: usize,
) -> Result<ScalingRun> {
    if !(g_sigma > G_CRITICAL) {
        return Err(Error::InvalidInput(format!(
            "leading exponent needs sigma in the disordered phase, got g_sigma = {g_sigma}"
        )));
    }
    let mut warnings = Vec::new();
    let admitted: Vec<f64> = g_rho_grid
        .iter()
        .copied()
        .filter(|&g| {
            let ok = (0.0..G_CRITICAL).contains(&g);
            if !ok {
                warnings.push(format!("g_rho = {g} dropped: not in the ordered phase"));
            }
            ok
        })
        .collect();
    if admitted.is_empty() {
        return Err(Error::WindowEmpty("no g_rho < 1 in the grid".into()));
    }
    let sigma = source.moments(g_sigma, l)?;
    let rho = admitted
        .par_iter()
        .map(|&g| source.moments(g, l))
        .collect::<Result<Vec<_>>>()?;
    let raw = rho
        .iter()
        .map(|a| {
            let d = distance_squared(a, &sigma)?;
            Ok(SweepPoint {
                g_rho: a.g,
                g_sigma,
                l,
                x: G_CRITICAL - a.g,
                y: d.per_site_squared(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (fit, offset) = fit_with_offset(&raw, LEADING_OFFSET_ITERATIONS)?;
    Ok(ScalingRun {
        points: raw,
        fit,
        offset,
        warnings,
    })
}

/// Fit `y - c` against `x`, re-estimating `c` from the residual at the smallest `x`.
fn fit_with_offset(points: &[SweepPoint], iterations: usize) -> Result<(FitResult<f64>, f64)> {
    let xy = |c: f64| -> Vec<(f64, f64)> { points.iter().map(|p| (p.x, p.y - c)).collect() };
    let mut offset = 0.0;
    let mut data = xy(offset);
    let mut fit = fit_relative(&data)?;
    let anchor = points
        .iter()
        .min_by(|a, b| a.x.total_cmp(&b.x))
        .expect("fit succeeded so points exist");
    for _ in 0..iterations {
        // evaluated relative to the first point, so the offset scales exactly with y
        let (x0, y0) = data[0];
        let (f, rel) = fit;
        let modelled = y0 * (rel + f.exponent * (anchor.x / x0).ln()).exp();
        offset += (anchor.y - offset) - modelled;
        data = xy(offset);
        fit = fit_relative(&data)?;
    }
    Ok((fit.0, offset))
}

fn finish(points: Vec<SweepPoint>, offset: f64, warnings: Vec<String>) -> Result<ScalingRun> {
    let xy: Vec<(f64, f64)> = points.iter().map(|p| (p.x, p.y)).collect();
    let fit = fit_power_law(&xy)?;
    Ok(ScalingRun {
        points,
        fit,
        offset,
        warnings,
    })
}

/// `n` log-spaced values on `[lo, hi]`, endpoints exact.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| {
                    if i == 0 {
                        lo
                    } else if i == n - 1 {
                        hi
                    } else {
                        (a + (b - a) * i as f64 / (n - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

/// `n` evenly spaced values on `[lo, hi]`.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}
