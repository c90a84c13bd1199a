//! Order-2 quantum Wasserstein distance between pure states, for the transport observable
//! `O = Mx`:
//!
//! `D(rho, sigma)^2 = 1/2 <O^2>_rho + 1/2 <O^2>_sigma - <O>_rho <O>_sigma`,
//!
//! and the self-distance `D(rho, rho)^2 = Var(O) = F_Q / 4`.

use crate::error::{Error, Result};
use crate::real::Real;
use crate::tfim::GroundStateObservables;

/// Critical coupling of the TFIM.
pub const G_CRITICAL: f64 = 1.0;
/// Variances down to this (negative) value are treated as rounding and clamped to zero.
pub const VARIANCE_SLACK: f64 = 1e-9;

/// `D^2` with its three raw terms kept separately.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceResult<T> {
    pub d_squared: T,
    /// `1/2 <O^2>_rho`
    pub term_rho: T,
    /// `1/2 <O^2>_sigma`
    pub term_sigma: T,
    /// `<O>_rho <O>_sigma`
    pub cross: T,
    pub g_rho: T,
    pub g_sigma: T,
    pub l: usize,
}

impl<T: Real> DistanceResult<T> {
    /// `D^2 / L^2`.
    pub fn per_site_squared(&self) -> T {
        let l = T::of_usize(self.l);
        self.d_squared / (l * l)
    }

    /// `g_rho - g_c`
    pub fn reduced_rho(&self) -> T {
        self.g_rho - T::lit(G_CRITICAL)
    }

    /// `g_sigma - g_c`
    pub fn reduced_sigma(&self) -> T {
        self.g_sigma - T::lit(G_CRITICAL)
    }
}

/// Pure-state distance between two ground states on the same ring.
pub fn distance_squared<T: Real>(
    a: &GroundStateObservables<T>,
    b: &GroundStateObservables<T>,
) -> Result<DistanceResult<T>> {
    if a.l != b.l {
        return Err(Error::SizeMismatch(a.l, b.l));
    }
    let half = T::lit(0.5);
    let term_rho = half * a.mx2_mean;
    let term_sigma = half * b.mx2_mean;
    let cross = a.mx_mean * b.mx_mean;
    Ok(DistanceResult {
        d_squared: term_rho + term_sigma - cross,
        term_rho,
        term_sigma,
        cross,
        g_rho: a.g,
        g_sigma: b.g,
        l: a.l,
    })
}

/// Quantum Fisher information `4 Var(Mx)` of a pure state.
///
/// The negativity allowance scales with `<Mx^2>`, the magnitude the variance is cancelled from.
pub fn qfi<T: Real>(a: &GroundStateObservables<T>) -> Result<T> {
    let var = a.mx2_mean - a.mx_mean * a.mx_mean;
    if var >= T::zero() {
        return Ok(T::lit(4.0) * var);
    }
    let slack = T::lit(VARIANCE_SLACK) * a.mx2_mean.abs().max(T::one());
    if var < -slack {
        return Err(Error::NegativeVariance(var.f64()));
    }
    Ok(T::zero())
}
