//! Reference capacities for comparison curves: ergodic capacity (plain
//! water-filling on the minimum gain, no rate guarantee) and outage capacity
//! (fixed-rate truncated channel inversion above the `eps`-quantile).
//!
//! The water-filling here is written separately from [`crate::policy`] so the
//! two can check each other.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fading::{quantile_of_min, GainLaw, MinGainDistribution};
use crate::numerics::{bisect, bracket_above, integrate_with_breaks, Tolerances};
use crate::policy::{min_power, solve, SystemParams};

/// How `c_outage` is reported. Written into CSV metadata.
pub const OUTAGE_CONVENTION: &str =
    "c_outage = (1 - eps) * r, where r = 0.5*log2(1 + p_av/(sigma2*J)) is the fixed rate of truncated channel inversion above the eps-quantile of the minimum gain and J = E[1/h; h >= h_eps]";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityPoint {
    pub p_av: f64,
    /// `None` below the minimum power.
    pub c_service: Option<f64>,
    pub c_ergodic: f64,
    pub c_outage: f64,
}

fn check_power(p_av: f64, sigma2: f64) -> Result<()> {
    if !(p_av >= 0.0 && p_av.is_finite()) {
        return Err(Error::invalid(format!("p_av must be nonnegative, got {p_av}")));
    }
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::invalid(format!("sigma2 must be positive, got {sigma2}")));
    }
    Ok(())
}

fn water_filling_power(d: &MinGainDistribution, level: f64, sigma2: f64, tol: &Tolerances) -> Result<f64> {
    let (inf, sup) = d.support();
    let cutoff = (sigma2 / level).max(inf);
    if level <= 0.0 || cutoff >= sup {
        return Ok(0.0);
    }
    let f = |h: f64| (level - sigma2 / h) * d.pdf(h);
    Ok(integrate_with_breaks(f, cutoff, sup, &d.breakpoints(), &tol.quad)?)
}

/// Water level of pure water-filling on the minimum gain at budget `p_av`.
pub fn ergodic_water_level(d: &MinGainDistribution, p_av: f64, sigma2: f64, tol: &Tolerances) -> Result<f64> {
    check_power(p_av, sigma2)?;
    if p_av == 0.0 {
        return Ok(0.0);
    }
    let power = |level: f64| water_filling_power(d, level, sigma2, tol).unwrap_or(f64::NAN);
    let hi = bracket_above(power, 0.0, p_av)?;
    let lo = if hi >= 2.0 { 0.5 * hi } else { 0.0 };
    let level = bisect(power, lo, hi, p_av, &tol.root)?;
    // surface quadrature failures the closure had to swallow
    water_filling_power(d, level, sigma2, tol)?;
    Ok(level)
}

pub fn ergodic_capacity(d: &MinGainDistribution, p_av: f64, sigma2: f64, tol: &Tolerances) -> Result<f64> {
    let level = ergodic_water_level(d, p_av, sigma2, tol)?;
    if level == 0.0 {
        return Ok(0.0);
    }
    let (inf, sup) = d.support();
    let cutoff = (sigma2 / level).max(inf);
    if cutoff >= sup {
        return Ok(0.0);
    }
    let f = |h: f64| 0.5 * (h * level / sigma2).log2() * d.pdf(h);
    Ok(integrate_with_breaks(f, cutoff, sup, &d.breakpoints(), &tol.quad)?)
}

/// `J = E[1/h; h >= h_eps]`. Fails with a divergence error when `eps = 0` and
/// the density is positive at zero.
pub fn inverse_gain_moment(d: &MinGainDistribution, eps: f64, tol: &Tolerances) -> Result<f64> {
    let h_eps = quantile_of_min(d, eps)?.max(d.support().0);
    let sup = d.support().1;
    if h_eps >= sup {
        return Ok(0.0);
    }
    let f = |h: f64| if h > 0.0 { d.pdf(h) / h } else { 0.0 };
    Ok(integrate_with_breaks(f, h_eps, sup, &d.breakpoints(), &tol.quad)?)
}

/// Largest fixed rate that truncated channel inversion above the
/// `eps`-quantile sustains at budget `p_av`.
pub fn outage_fixed_rate(d: &MinGainDistribution, p_av: f64, eps: f64, sigma2: f64, tol: &Tolerances) -> Result<f64> {
    check_power(p_av, sigma2)?;
    if p_av == 0.0 {
        return Ok(0.0);
    }
    let j = inverse_gain_moment(d, eps, tol)?;
    if j == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(0.5 * (p_av / (sigma2 * j)).ln_1p() / std::f64::consts::LN_2)
}

/// Outage capacity under [`OUTAGE_CONVENTION`].
pub fn outage_capacity(d: &MinGainDistribution, p_av: f64, eps: f64, sigma2: f64, tol: &Tolerances) -> Result<f64> {
    Ok((1.0 - eps) * outage_fixed_rate(d, p_av, eps, sigma2, tol)?)
}

fn sweep_point(d: &MinGainDistribution, params: &SystemParams, p_min: f64, p_av: f64, tol: &Tolerances) -> Result<CapacityPoint> {
    let pr = params.with_p_av(p_av);
    pr.validate()?;
    let c_service = if p_min.is_finite() && p_av >= p_min * (1.0 - crate::policy::FEASIBILITY_SLACK) {
        Some(solve(d, &pr, tol)?.expected_capacity()?)
    } else {
        None
    };
    Ok(CapacityPoint {
        p_av,
        c_service,
        c_ergodic: ergodic_capacity(d, p_av, pr.sigma2, tol)?,
        c_outage: outage_capacity(d, p_av, pr.eps, pr.sigma2, tol)?,
    })
}

/// One point per budget in `p_grid`, evaluated in parallel, in grid order.
pub fn sweep(d: &MinGainDistribution, params: &SystemParams, p_grid: &[f64], tol: &Tolerances) -> Result<Vec<CapacityPoint>> {
    let p_min = min_power(d, params, tol)?;
    p_grid
        .par_iter()
        .map(|&p| sweep_point(d, params, p_min, p, tol))
        .collect()
}
