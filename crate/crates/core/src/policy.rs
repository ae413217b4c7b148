//! The service-outage constrained power allocation problem, reduced to the
//! minimum channel gain `h`:
//!
//! ```text
//! maximize    E[R(h * gamma(h))]
//! subject to  E[gamma(h)] <= p_av,  gamma(h) >= 0,
//!             Pr{h * gamma(h) < (2^(2 r0) - 1) sigma2} <= eps
//! ```
//!
//! with `R(x) = 1/2 log2(1 + x / sigma2)`. Let `h_eps` be the `eps`-quantile of
//! the minimum gain. The problem is feasible iff `p_av >= p_min` where
//!
//! ```text
//! p_min = integral_{h_eps}^inf (2^(2 r0) - 1) sigma2 / h  f(h) dh
//! ```
//!
//! and the optimal policy is water-filling floored by channel inversion on the
//! service region `h >= h_eps`, plain water-filling below it:
//!
//! ```text
//! gamma(h) = max{lambda - sigma2/h, (2^(2 r0) - 1) sigma2 / h}   h >= h_eps
//!          = [lambda - sigma2/h]^+                               h <  h_eps
//! ```
//!
//! with the water level `lambda` set so the budget is met with equality.

use std::cell::RefCell;

use crate::error::{Error, Result};
use crate::fading::{quantile_of_min, GainLaw, MinGainDistribution};
use crate::numerics::{bisect, bracket_above, integrate_with_breaks, NumericsError, Tolerances};

/// Budgets within this relative distance below `p_min` still count as
/// feasible, so quadrature noise cannot flip the boundary case.
pub const FEASIBILITY_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Noise variance, common to all users.
    pub sigma2: f64,
    /// Basic service rate in bits per symbol.
    pub r0: f64,
    /// Service outage budget.
    pub eps: f64,
    /// Average transmit power budget, linear units.
    pub p_av: f64,
}

impl SystemParams {
    pub fn new(sigma2: f64, r0: f64, eps: f64, p_av: f64) -> Result<Self> {
        let p = SystemParams { sigma2, r0, eps, p_av };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(Error::invalid(format!("sigma2 must be positive, got {}", self.sigma2)));
        }
        if !(self.r0 >= 0.0 && self.r0.is_finite()) {
            return Err(Error::invalid(format!("r0 must be nonnegative, got {}", self.r0)));
        }
        if !(0.0..1.0).contains(&self.eps) {
            return Err(Error::invalid(format!("eps must lie in [0, 1), got {}", self.eps)));
        }
        if !(self.p_av >= 0.0 && self.p_av.is_finite()) {
            return Err(Error::invalid(format!("p_av must be nonnegative, got {}", self.p_av)));
        }
        Ok(())
    }

    pub fn with_p_av(self, p_av: f64) -> Self {
        SystemParams { p_av, ..self }
    }

    /// `R(x) = 1/2 log2(1 + x / sigma2)`, where `x` is gain times power.
    pub fn rate(&self, x: f64) -> f64 {
        0.5 * (x / self.sigma2).ln_1p() / std::f64::consts::LN_2
    }

    /// `2^(2 r0) - 1`.
    pub fn inversion_factor(&self) -> f64 {
        (2.0 * self.r0 * std::f64::consts::LN_2).exp_m1()
    }

    /// Power that delivers exactly `r0` at gain `h`. Strictly decreasing in
    /// `h`, identically zero when `r0 = 0`.
    pub fn inversion_power(&self, h: f64) -> f64 {
        self.inversion_factor() * self.sigma2 / h
    }

    /// `2^(2 r0) sigma2`: above gain `(this) / lambda` water-filling alone
    /// already delivers `r0`.
    fn service_knee(&self) -> f64 {
        (self.inversion_factor() + 1.0) * self.sigma2
    }
}

fn allocation(lambda: f64, h_thresh: f64, params: &SystemParams, h: f64) -> f64 {
    if h <= 0.0 {
        return 0.0;
    }
    let water = lambda - params.sigma2 / h;
    if h >= h_thresh {
        water.max(params.inversion_power(h))
    } else {
        water.max(0.0)
    }
}

/// Integration range and kink locations of the policy integrands.
fn policy_domain(lambda: f64, h_thresh: f64, params: &SystemParams, d: &MinGainDistribution) -> (f64, f64, Vec<f64>) {
    let (inf, sup) = d.support();
    let mut breaks = d.breakpoints();
    breaks.push(h_thresh);
    let lower = if lambda > 0.0 {
        let cutoff = params.sigma2 / lambda;
        breaks.push(cutoff);
        breaks.push(params.service_knee() / lambda);
        cutoff.min(h_thresh)
    } else {
        h_thresh
    };
    (lower.max(inf), sup, breaks)
}

/// Minimum average power for which the outage constraint can be met.
/// Returns `+inf` when the inversion integral diverges.
pub fn min_power(d: &MinGainDistribution, params: &SystemParams, tol: &Tolerances) -> Result<f64> {
    params.validate()?;
    let factor = params.inversion_factor();
    if factor == 0.0 {
        return Ok(0.0);
    }
    let h_thresh = quantile_of_min(d, params.eps)?;
    let sup = d.support().1;
    let lower = h_thresh.max(d.support().0);
    if lower >= sup {
        return Ok(0.0);
    }
    let integrand = |h: f64| if h > 0.0 { d.pdf(h) / h } else { 0.0 };
    match integrate_with_breaks(integrand, lower, sup, &d.breakpoints(), &tol.quad) {
        Ok(v) => Ok(factor * params.sigma2 * v),
        Err(NumericsError::DivergentIntegral) => Ok(f64::INFINITY),
        Err(e) => Err(e.into()),
    }
}

/// Average power spent by the policy with water level `lambda` and service
/// threshold `h_thresh`.
pub fn expected_power(
    lambda: f64,
    h_thresh: f64,
    params: &SystemParams,
    d: &MinGainDistribution,
    tol: &Tolerances,
) -> Result<f64> {
    if lambda.is_nan() || lambda < 0.0 {
        return Err(Error::invalid(format!("water level must be nonnegative, got {lambda}")));
    }
    let (lower, upper, breaks) = policy_domain(lambda, h_thresh, params, d);
    if lower >= upper {
        return Ok(0.0);
    }
    let integrand = |h: f64| allocation(lambda, h_thresh, params, h) * d.pdf(h);
    Ok(integrate_with_breaks(integrand, lower, upper, &breaks, &tol.quad)?)
}

/// A solved allocation policy. Only constructed for feasible problems.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    pub h_thresh: f64,
    pub lambda: f64,
    pub p_min: f64,
    pub params: SystemParams,
    pub min_dist: MinGainDistribution,
    pub tol: Tolerances,
}

/// Feasibility check plus water-level search.
pub fn solve(d: &MinGainDistribution, params: &SystemParams, tol: &Tolerances) -> Result<Policy> {
    params.validate()?;
    let h_thresh = quantile_of_min(d, params.eps)?;
    let p_min = min_power(d, params, tol)?;
    if !p_min.is_finite() || params.p_av < p_min * (1.0 - FEASIBILITY_SLACK) {
        return Err(Error::InfeasiblePower {
            p_av: params.p_av,
            p_min,
        });
    }

    let lambda = if params.p_av <= p_min {
        0.0
    } else {
        let failure: RefCell<Option<Error>> = RefCell::new(None);
        let power = |lambda: f64| match expected_power(lambda, h_thresh, params, d, tol) {
            Ok(p) => p,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        };
        let hi = bracket_above(power, 0.0, params.p_av);
        if let Some(e) = failure.borrow_mut().take() {
            return Err(e);
        }
        let hi = hi?;
        // bracket_above already saw power(hi / 2) < p_av
        let lo = if hi >= 2.0 { 0.5 * hi } else { 0.0 };
        let root = bisect(power, lo, hi, params.p_av, &tol.root);
        if let Some(e) = failure.borrow_mut().take() {
            return Err(e);
        }
        root?
    };

    Ok(Policy {
        h_thresh,
        lambda,
        p_min,
        params: *params,
        min_dist: d.clone(),
        tol: *tol,
    })
}

impl Policy {
    /// Power for a block whose minimum gain is `h_min`.
    pub fn allocate(&self, h_min: f64) -> f64 {
        allocation(self.lambda, self.h_thresh, &self.params, h_min)
    }

    pub fn expected_power(&self) -> Result<f64> {
        expected_power(self.lambda, self.h_thresh, &self.params, &self.min_dist, &self.tol)
    }

    /// Average rate, bits per symbol.
    pub fn expected_capacity(&self) -> Result<f64> {
        let d = &self.min_dist;
        let (lower, upper, breaks) = policy_domain(self.lambda, self.h_thresh, &self.params, d);
        if lower >= upper {
            return Ok(0.0);
        }
        let integrand = |h: f64| self.params.rate(h * self.allocate(h)) * d.pdf(h);
        Ok(integrate_with_breaks(integrand, lower, upper, &breaks, &self.tol.quad)?)
    }

    /// Exact service outage probability of the policy. Below the threshold,
    /// water-filling alone reaches `r0` once `h >= 2^(2 r0) sigma2 / lambda`,
    /// so outage is the cdf mass below `min(h_eps, 2^(2 r0) sigma2 / lambda)`.
    pub fn outage_probability(&self) -> f64 {
        if self.params.inversion_factor() == 0.0 {
            return 0.0;
        }
        if self.lambda <= 0.0 {
            return self.params.eps;
        }
        let knee = self.params.service_knee() / self.lambda;
        if knee >= self.h_thresh {
            self.params.eps
        } else {
            self.min_dist.cdf(knee)
        }
    }

    pub fn rate_at(&self, h_min: f64) -> f64 {
        self.params.rate(h_min * self.allocate(h_min))
    }
}
