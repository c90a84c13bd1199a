//! Kernel integrals on `[0, pi]` feeding the Toeplitz correlator construction.
//!
//! Two kernels are provided. With `w(k) = sqrt(1 + g^2 + 2 g cos k)`:
//!
//! * `L(n) = (1/pi) int_0^pi cos(n k) / sqrt(1 + 1/g^2 + (2/g) cos k) dk = (g/pi) int cos(n k) / w(k) dk`
//! * `G(m) = (1/pi) int_0^pi [cos(k m)(g + cos k) - sin(k m) sin k] / w(k) dk`
//!
//! Both are evaluated in the reflected variable `s = pi - k`, where the near-singular
//! point `k = pi` (at `g ~ 1`) sits at `s = 0`. In that variable the `G` numerator becomes
//! `(g - 1) cos(m s) + 2 sin((2m+1) s / 2) sin(s / 2)` and the denominator
//! `sqrt((1 - g)^2 + 4 g sin^2(s / 2))`, both free of cancellation.
//!
//! The rule is composite Gauss-Legendre: uniform panels sized to the highest harmonic,
//! plus panels graded geometrically toward `s = 0` down to the width `|1 - g| / sqrt(g)` of
//! the near-singular feature. Refinement bisects every panel until two successive
//! layouts agree to the target tolerance.

use crate::error::{Error, Result};
use crate::real::{CompensatedSum, Real};

/// Which of the two kernel integrals to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelKind {
    L,
    G,
}

/// One kernel evaluation request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec<T> {
    pub harmonic_index: i64,
    pub coupling_g: T,
    pub kind: KernelKind,
}

impl<T: Real> KernelSpec<T> {
    pub fn l(n: i64, g: T) -> Self {
        Self {
            harmonic_index: n,
            coupling_g: g,
            kind: KernelKind::L,
        }
    }

    pub fn g(m: i64, g: T) -> Self {
        Self {
            harmonic_index: m,
            coupling_g: g,
            kind: KernelKind::G,
        }
    }

    pub fn evaluate(&self, cfg: &QuadratureConfig<T>) -> Result<T> {
        let integrator = KernelIntegrator::new(cfg.clone())?;
        match self.kind {
            KernelKind::L => integrator.l_integral(self.harmonic_index, self.coupling_g),
            KernelKind::G => integrator.g_integral(self.harmonic_index, self.coupling_g),
        }
    }
}

/// Composite Gauss-Legendre settings.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureConfig<T> {
    /// Gauss-Legendre nodes per panel, at least 8.
    pub nodes_per_panel: usize,
    /// Minimum number of uniform panels on `[0, pi]`.
    pub panels: usize,
    pub target_abs_tol: T,
    /// Maximum number of panel bisections before giving up.
    pub refinement_limit: usize,
}

impl<T: Real> Default for QuadratureConfig<T> {
    fn default() -> Self {
        Self {
            nodes_per_panel: 32,
            panels: 8,
            target_abs_tol: T::lit(1e-12).max(T::epsilon() * T::lit(64.0)),
            refinement_limit: 8,
        }
    }
}

impl<T: Real> QuadratureConfig<T> {
    pub fn with_tol(tol: T) -> Self {
        Self {
            target_abs_tol: tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes_per_panel < 8 {
            return Err(Error::InvalidInput(format!(
                "nodes_per_panel must be >= 8, got {}",
                self.nodes_per_panel
            )));
        }
        if self.panels < 1 {
            return Err(Error::InvalidInput("panels must be >= 1".into()));
        }
        if !(self.target_abs_tol > T::zero()) {
            return Err(Error::InvalidInput(format!(
                "target_abs_tol must be positive, got {}",
                self.target_abs_tol
            )));
        }
        Ok(())
    }

    /// Uniform panel count for a kernel whose integrand carries harmonics up to `harmonic`.
    /// Keeps at least 8 nodes per oscillation period.
    fn uniform_panels(&self, harmonic: u64) -> usize {
        let needed = (harmonic as usize * 8).div_ceil(self.nodes_per_panel);
        self.panels.max(needed)
    }
}

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    pub fn new(n: usize) -> Self {
        let (nodes, weights) = gauss_legendre_f64(n);
        Self {
            nodes: nodes.into_iter().map(T::lit).collect(),
            weights: weights.into_iter().map(T::lit).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Integral of `f` over `[a, b]`, accumulated into `acc`.
    fn accumulate<F: Fn(T) -> T>(&self, a: T, b: T, f: &F, acc: &mut CompensatedSum<T>) {
        let half = (b - a) * T::lit(0.5);
        let mid = (b + a) * T::lit(0.5);
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc.add(w * half * f(mid + half * x));
        }
    }
}

/// Newton iteration on the Legendre recurrence, in double precision.
fn gauss_legendre_f64(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Reusable evaluator: holds one Gauss-Legendre rule for many kernel calls.
#[derive(Debug, Clone)]
pub struct KernelIntegrator<T> {
    cfg: QuadratureConfig<T>,
    rule: GaussLegendre<T>,
}

/// Above this coupling `G(m)` uses its first-order large-`g` expansion.
const LARGE_G: f64 = 1e6;
/// `l_integral` refuses couplings this close to the critical point.
const L_SINGULAR_BAND: f64 = 0.1;
/// Graded panels stop at this width; the near-singular feature below it contributes < 1e-15.
const GRADING_FLOOR: f64 = 1e-15;

impl<T: Real> KernelIntegrator<T> {
    pub fn new(cfg: QuadratureConfig<T>) -> Result<Self> {
        cfg.validate()?;
        let rule = GaussLegendre::new(cfg.nodes_per_panel);
        Ok(Self { cfg, rule })
    }

    pub fn config(&self) -> &QuadratureConfig<T> {
        &self.cfg
    }

    /// `L(n)` for `g > 0` away from the critical band `|g - 1| < 0.1`.
    pub fn l_integral(&self, n: i64, g: T) -> Result<T> {
        if !(g > T::zero()) || !g.is_finite() {
            return Err(Error::InvalidInput(format!("L(n) requires g > 0, got {g}")));
        }
        if (g - T::one()).abs() < T::lit(L_SINGULAR_BAND) {
            return Err(Error::SingularIntegrand { n, g: g.f64() });
        }
        let one = T::one();
        let gm1_sq = (one - g) * (one - g);
        let four_g = T::lit(4.0) * g;
        let nf = T::of_i64(n);
        let prefactor = sign_of_parity::<T>(n) * g / T::PI();
        let f = move |s: T| {
            let h = (s * T::lit(0.5)).sin();
            (nf * s).cos() / (gm1_sq + four_g * h * h).sqrt()
        };
        let harmonic = n.unsigned_abs();
        let raw = self.integrate(&f, harmonic, feature_width(g), &format!("L({n}; g={g})"))?;
        Ok(prefactor * raw)
    }

    /// `G(m)` for any integer `m` and `g >= 0`, finite across `g = 1`.
    pub fn g_integral(&self, m: i64, g: T) -> Result<T> {
        if !(g >= T::zero()) || !g.is_finite() {
            return Err(Error::InvalidInput(format!(
                "G(m) requires g >= 0, got {g}"
            )));
        }
        if g == T::zero() {
            return Ok(if m == -1 { T::one() } else { T::zero() });
        }
        if g > T::lit(LARGE_G) {
            let corr = T::one() / (T::lit(2.0) * g);
            return Ok(match m {
                0 => T::one(),
                -1 => corr,
                1 => -corr,
                _ => T::zero(),
            });
        }
        let one = T::one();
        let half = T::lit(0.5);
        let gm1 = g - one;
        let gm1_sq = gm1 * gm1;
        let four_g = T::lit(4.0) * g;
        let mf = T::of_i64(m);
        let twice_m_plus_one = T::of_i64(2 * m + 1);
        let f = move |s: T| {
            let h = (s * half).sin();
            let num = gm1 * (mf * s).cos() + T::lit(2.0) * (twice_m_plus_one * s * half).sin() * h;
            num / (gm1_sq + four_g * h * h).sqrt()
        };
        let harmonic = m.unsigned_abs().max((m + 1).unsigned_abs());
        let raw = self.integrate(&f, harmonic, feature_width(g), &format!("G({m}; g={g})"))?;
        Ok(sign_of_parity::<T>(m) / T::PI() * raw)
    }

    fn integrate<F: Fn(T) -> T>(&self, f: &F, harmonic: u64, width: T, what: &str) -> Result<T> {
        let mut breaks = panel_breaks(self.cfg.uniform_panels(harmonic), width);
        let mut coarse = self.apply(f, &breaks);
        let mut estimate = T::infinity();
        for _ in 0..self.cfg.refinement_limit.max(1) {
            breaks = bisect(&breaks);
            let fine = self.apply(f, &breaks);
            estimate = (fine - coarse).abs();
            if estimate <= self.cfg.target_abs_tol {
                return Ok(fine);
            }
            coarse = fine;
        }
        Err(Error::NonConvergence {
            what: what.to_string(),
            estimate: estimate.f64(),
            tol: self.cfg.target_abs_tol.f64(),
        })
    }

    fn apply<F: Fn(T) -> T>(&self, f: &F, breaks: &[T]) -> T {
        let mut acc = CompensatedSum::new();
        for w in breaks.windows(2) {
            self.rule.accumulate(w[0], w[1], f, &mut acc);
        }
        acc.value()
    }
}

/// `(-1)^n` as a scalar.
fn sign_of_parity<T: Real>(n: i64) -> T {
    if n.rem_euclid(2) == 0 {
        T::one()
    } else {
        -T::one()
    }
}

/// Width in `s` of the near-singular feature at `s = 0`.
fn feature_width<T: Real>(g: T) -> T {
    (g - T::one()).abs() / g.sqrt()
}

/// Ascending panel boundaries on `[0, pi]`.
fn panel_breaks<T: Real>(uniform: usize, width: T) -> Vec<T> {
    let pi = T::PI();
    let step = pi / T::of_usize(uniform);
    let mut graded = Vec::new();
    let floor = width.max(T::lit(GRADING_FLOOR));
    let mut b = step * T::lit(0.5);
    while b > floor {
        graded.push(b);
        b = b * T::lit(0.5);
    }
    let mut breaks = Vec::with_capacity(uniform + graded.len() + 1);
    breaks.push(T::zero());
    breaks.extend(graded.into_iter().rev());
    breaks.extend((1..uniform).map(|i| step * T::of_usize(i)));
    breaks.push(pi);
    breaks
}

fn bisect<T: Real>(breaks: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(2 * breaks.len());
    for w in breaks.windows(2) {
        out.push(w[0]);
        out.push((w[0] + w[1]) * T::lit(0.5));
    }
    out.extend(breaks.last().copied());
    out
}

/// `L(n)` with a fresh integrator.
pub fn l_integral<T: Real>(n: i64, g: T, cfg: &QuadratureConfig<T>) -> Result<T> {
    KernelSpec::l(n, g).evaluate(cfg)
}

/// `G(m)` with a fresh integrator.
pub fn g_integral<T: Real>(m: i64, g: T, cfg: &QuadratureConfig<T>) -> Result<T> {
    KernelSpec::g(m, g).evaluate(cfg)
}
