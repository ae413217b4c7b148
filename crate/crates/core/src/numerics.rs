//! Adaptive quadrature on finite and semi-infinite intervals, and monotone
//! root finding.
//!
//! Quadrature is a globally adaptive 15-point Gauss–Kronrod scheme. An upper
//! limit of `+inf` is handled with the substitution `u = 1 / (1 + x - a)`,
//! which maps `[a, inf)` onto `(0, 1]` and keeps exponentially decaying
//! integrands bounded. When the adaptive scheme fails, the integrand is probed
//! for divergence by watching partial integrals over geometrically shrinking
//! (or growing) windows at each end of the interval.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("no convergence after {iterations} iterations (error estimate {estimate:e})")]
    NonConvergence { iterations: usize, estimate: f64 },

    #[error("integral diverges")]
    DivergentIntegral,

    #[error("invalid bracket: g(lo) = {g_lo}, g(hi) = {g_hi}, target = {target}")]
    BracketInvalid { g_lo: f64, g_hi: f64, target: f64 },

    #[error("target {target} not reached after {doublings} doublings")]
    NoBracket { target: f64, doublings: u32 },

    #[error("invalid interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },

    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),
}

/// Stopping rule shared by the quadrature and root-finding routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    /// Subinterval budget for quadrature, iteration budget for bisection.
    pub max_iter: usize,
}

impl Tolerance {
    pub fn new(rel: f64, abs: f64, max_iter: usize) -> Result<Self, NumericsError> {
        if !(rel > 0.0 && rel.is_finite()) {
            return Err(NumericsError::InvalidTolerance(format!("rel = {rel}")));
        }
        if !(abs > 0.0 && abs.is_finite()) {
            return Err(NumericsError::InvalidTolerance(format!("abs = {abs}")));
        }
        if max_iter == 0 {
            return Err(NumericsError::InvalidTolerance("max_iter = 0".into()));
        }
        Ok(Tolerance { rel, abs, max_iter })
    }

    pub const fn quadrature() -> Self {
        Tolerance {
            rel: 1e-9,
            abs: 1e-12,
            max_iter: 1_000_000,
        }
    }

    pub const fn root() -> Self {
        Tolerance {
            rel: 1e-9,
            abs: 1e-12,
            max_iter: 60,
        }
    }
}

/// The pair of tolerances every solver in the crate threads through.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub quad: Tolerance,
    pub root: Tolerance,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            quad: Tolerance::quadrature(),
            root: Tolerance::root(),
        }
    }
}

impl Tolerances {
    /// Parses an override of the form `REL` or `REL,ABS`, applied to both
    /// quadrature and root finding. Iteration budgets keep their defaults.
    pub fn parse_override(s: &str) -> Result<Self, NumericsError> {
        let mut parts = s.split(',').map(str::trim);
        let parse = |p: Option<&str>| -> Result<Option<f64>, NumericsError> {
            match p {
                None | Some("") => Ok(None),
                Some(v) => v
                    .parse::<f64>()
                    .map(Some)
                    .map_err(|_| NumericsError::InvalidTolerance(format!("cannot parse {v:?}"))),
            }
        };
        let rel = parse(parts.next())?
            .ok_or_else(|| NumericsError::InvalidTolerance("empty override".into()))?;
        let abs = parse(parts.next())?.unwrap_or(Tolerance::quadrature().abs);
        if parts.next().is_some() {
            return Err(NumericsError::InvalidTolerance(format!(
                "expected REL[,ABS], got {s:?}"
            )));
        }
        let d = Tolerances::default();
        Ok(Tolerances {
            quad: Tolerance::new(rel, abs, d.quad.max_iter)?,
            root: Tolerance::new(rel, abs, d.root.max_iter)?,
        })
    }
}

// 15-point Kronrod abscissae and weights, with the embedded 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gauss_kronrod_15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    // small weights first, center last
    let mut res_g = 0.0;
    let mut res_k = 0.0;
    let mut res_abs = 0.0;
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    res_g += fc * WG[3];
    res_k += fc * WGK[7];
    res_abs += (fc * WGK[7]).abs();
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let result = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (result, err)
}

#[derive(Debug)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: &Tolerance) -> Result<f64, NumericsError> {
    let (value, error) = gauss_kronrod_15(f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    let mut segments = 1usize;
    loop {
        if !total.is_finite() || total_err.is_nan() {
            return Err(NumericsError::DivergentIntegral);
        }
        if total_err <= tol.abs.max(tol.rel * total.abs()) {
            // running sums drift; confirm against an exact re-summation
            total = heap.iter().map(|s| s.value).sum();
            total_err = heap.iter().map(|s| s.error).sum();
            if total_err <= tol.abs.max(tol.rel * total.abs()) {
                return Ok(total);
            }
        }
        if segments >= tol.max_iter {
            return Err(NumericsError::NonConvergence {
                iterations: segments,
                estimate: total_err,
            });
        }
        let worst = heap.pop().expect("heap never empties");
        let mid = 0.5 * (worst.a + worst.b);
        let scale = worst.a.abs().max(worst.b.abs()).max(f64::MIN_POSITIVE);
        if !(worst.a < mid && mid < worst.b) || worst.b - worst.a <= 64.0 * f64::EPSILON * scale {
            return Err(NumericsError::NonConvergence {
                iterations: segments,
                estimate: total_err,
            });
        }
        let (lv, le) = gauss_kronrod_15(f, worst.a, mid);
        let (rv, re) = gauss_kronrod_15(f, mid, worst.b);
        total += lv + rv - worst.value;
        total_err += le + re - worst.error;
        heap.push(Segment { a: worst.a, b: mid, value: lv, error: le });
        heap.push(Segment { a: mid, b: worst.b, value: rv, error: re });
        segments += 1;
    }
}

const PROBE_STEPS: i32 = 60;
const PROBE_WINDOW: usize = 8;

/// True if the window integrals `d_k` stop shrinking toward the end of the
/// probe sequence, i.e. the partial integrals grow without bound. The
/// sequence ends early once a window collapses in floating point.
fn windows_do_not_shrink(mut window: impl FnMut(i32) -> Option<f64>) -> bool {
    let mut d = Vec::with_capacity(PROBE_STEPS as usize);
    for k in 0..PROBE_STEPS {
        match window(k) {
            Some(v) if v.is_finite() => d.push(v.abs()),
            _ => break,
        }
    }
    if d.len() < 2 * PROBE_WINDOW {
        return false;
    }
    let tail = &d[d.len() - PROBE_WINDOW..];
    tail.iter().all(|&v| v > 0.0) && tail.windows(2).all(|w| w[1] >= 0.9 * w[0])
}

fn probe_divergence<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: &Tolerance) -> bool {
    let piece = |lo: f64, hi: f64| adaptive(f, lo, hi, tol).ok();
    let w = if b.is_finite() { (b - a).min(1.0) } else { 1.0 };
    let lower = windows_do_not_shrink(|k| {
        let hi = a + w * 2f64.powi(-k);
        let lo = a + w * 2f64.powi(-k - 1);
        (lo > a).then(|| piece(lo, hi)).flatten()
    });
    if lower {
        return true;
    }
    if b.is_infinite() {
        windows_do_not_shrink(|k| piece(a + 2f64.powi(k), a + 2f64.powi(k + 1)))
    } else {
        windows_do_not_shrink(|k| {
            let lo = b - w * 2f64.powi(-k);
            let hi = b - w * 2f64.powi(-k - 1);
            (hi < b).then(|| piece(lo, hi)).flatten()
        })
    }
}

/// Integrates `f` over `[a, b]`, where `b` may be `+inf`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: &Tolerance) -> Result<f64, NumericsError> {
    if !a.is_finite() || b.is_nan() || b == f64::NEG_INFINITY || a > b {
        return Err(NumericsError::InvalidInterval { a, b });
    }
    if a == b {
        return Ok(0.0);
    }
    let outcome = if b.is_finite() {
        adaptive(&f, a, b, tol)
    } else {
        let g = |u: f64| {
            let x = a + (1.0 - u) / u;
            f(x) / (u * u)
        };
        adaptive(&g, 0.0, 1.0, tol)
    };
    match outcome {
        Err(NumericsError::NonConvergence { .. }) | Err(NumericsError::DivergentIntegral)
            if probe_divergence(&f, a, b, tol) =>
        {
            Err(NumericsError::DivergentIntegral)
        }
        other => other,
    }
}

/// Integrates `f` over `[a, b]`, splitting at every breakpoint strictly
/// inside the interval. Use it for integrands with known kinks.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    tol: &Tolerance,
) -> Result<f64, NumericsError> {
    let mut cuts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&x| x.is_finite() && x > a && x < b)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(a);
    edges.extend(cuts);
    edges.push(b);
    let mut sum = 0.0;
    for w in edges.windows(2) {
        sum += integrate(&f, w[0], w[1], tol)?;
    }
    Ok(sum)
}

/// Finds `x` in `[lo, hi]` with `g(x) = target` for nondecreasing `g`.
pub fn bisect<G: Fn(f64) -> f64>(
    g: G,
    mut lo: f64,
    mut hi: f64,
    target: f64,
    tol: &Tolerance,
) -> Result<f64, NumericsError> {
    let g_lo = g(lo);
    let g_hi = g(hi);
    if !(lo <= hi && g_lo <= target && target <= g_hi) {
        return Err(NumericsError::BracketInvalid { g_lo, g_hi, target });
    }
    if (g_lo - target).abs() <= tol.abs {
        return Ok(lo);
    }
    if (g_hi - target).abs() <= tol.abs {
        return Ok(hi);
    }
    for _ in 0..tol.max_iter {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let gm = g(mid);
        if (gm - target).abs() <= tol.abs || hi - lo <= tol.rel * mid.abs() {
            return Ok(mid);
        }
        if gm < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(NumericsError::NonConvergence {
        iterations: tol.max_iter,
        estimate: hi - lo,
    })
}

pub const DEFAULT_MAX_DOUBLINGS: u32 = 64;

/// Returns `hi` with `g(hi) >= target`, trying `lo + 1, lo + 2, lo + 4, ...`.
pub fn bracket_above<G: Fn(f64) -> f64>(g: G, lo: f64, target: f64) -> Result<f64, NumericsError> {
    bracket_above_capped(g, lo, target, DEFAULT_MAX_DOUBLINGS)
}

pub fn bracket_above_capped<G: Fn(f64) -> f64>(
    g: G,
    lo: f64,
    target: f64,
    max_doublings: u32,
) -> Result<f64, NumericsError> {
    let mut step = 1.0;
    for _ in 0..=max_doublings {
        let hi = lo + step;
        if g(hi) >= target {
            return Ok(hi);
        }
        step *= 2.0;
    }
    Err(NumericsError::NoBracket {
        target,
        doublings: max_doublings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad() -> Tolerance {
        Tolerance::quadrature()
    }

    /// Midpoint rule with a fixed step, used as an oracle independent of the
    /// adaptive scheme.
    fn midpoint_sum(f: impl Fn(f64) -> f64, a: f64, b: f64, step: f64) -> f64 {
        let n = ((b - a) / step).ceil() as usize;
        let h = (b - a) / n as f64;
        (0..n).map(|i| f(a + (i as f64 + 0.5) * h)).sum::<f64>() * h
    }

    #[test]
    fn exponential_tail_integrates_to_one() {
        let v = integrate(|x: f64| (-x).exp(), 0.0, f64::INFINITY, &quad()).unwrap();
        assert!((v - 1.0).abs() <= 1e-9, "{v}");
    }

    #[test]
    fn constant_on_unit_interval_is_exact() {
        let v = integrate(|_| 1.0, 0.0, 1.0, &quad()).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn exponential_integral_matches_fixed_step_oracle() {
        let a = -(0.9f64).ln();
        let f = |x: f64| (-x).exp() / x;
        // beyond x = 40 the tail is below 1e-19
        let oracle = midpoint_sum(f, a, 40.0, 1e-5);
        // E1(-ln 0.9), evaluated once at 30 digits
        const FROZEN: f64 = 1.775_800_683_423_525;
        assert!((oracle - FROZEN).abs() < 1e-8, "oracle {oracle}");
        let v = integrate(f, a, f64::INFINITY, &quad()).unwrap();
        assert!((v - FROZEN).abs() < 1e-8, "{v}");
    }

    #[test]
    fn log_divergence_at_origin_is_reported() {
        let r = integrate(|x: f64| (-x).exp() / x, 0.0, f64::INFINITY, &quad());
        assert_eq!(r, Err(NumericsError::DivergentIntegral));
        let r = integrate(|x: f64| 1.0 / x, 0.0, 1.0, &quad());
        assert_eq!(r, Err(NumericsError::DivergentIntegral));
    }

    #[test]
    fn harmonic_tail_is_reported_divergent() {
        let r = integrate(|x: f64| 1.0 / (1.0 + x), 0.0, f64::INFINITY, &quad());
        assert_eq!(r, Err(NumericsError::DivergentIntegral));
    }

    #[test]
    fn integrable_singularity_converges() {
        let v = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, &quad()).unwrap();
        assert!((v - 2.0).abs() < 1e-8, "{v}");
    }

    #[test]
    fn breakpoints_handle_kinks() {
        let f = |x: f64| (x - 0.3).abs();
        let v = integrate_with_breaks(f, 0.0, 1.0, &[0.3, 5.0, -1.0], &quad()).unwrap();
        let exact = 0.5 * 0.3 * 0.3 + 0.5 * 0.7 * 0.7;
        assert!((v - exact).abs() < 1e-14);
    }

    #[test]
    fn additivity_across_split_point() {
        let f = |x: f64| (-x * x).exp() * (3.0 * x).cos();
        let t = quad();
        let whole = integrate(f, 0.0, f64::INFINITY, &t).unwrap();
        let left = integrate(f, 0.0, 1.3, &t).unwrap();
        let right = integrate(f, 1.3, f64::INFINITY, &t).unwrap();
        let slack = 2.0 * t.abs.max(t.rel * whole.abs());
        assert!((whole - left - right).abs() <= slack);
    }

    #[test]
    fn reversed_interval_is_rejected() {
        assert!(matches!(
            integrate(|x| x, 1.0, 0.0, &quad()),
            Err(NumericsError::InvalidInterval { .. })
        ));
    }

    #[test]
    fn subdivision_budget_is_enforced() {
        let t = Tolerance::new(1e-14, 1e-300, 3).unwrap();
        let r = integrate(|x: f64| (50.0 * x).sin().abs(), 0.0, 10.0, &t);
        assert!(matches!(r, Err(NumericsError::NonConvergence { .. })));
    }

    #[test]
    fn bisect_identity() {
        assert_eq!(bisect(|x| x, 0.0, 2.0, 1.0, &Tolerance::root()).unwrap(), 1.0);
    }

    #[test]
    fn bisect_target_at_endpoint() {
        let x = bisect(|x: f64| x.powi(3), 0.0, 2.0, 8.0, &Tolerance::root()).unwrap();
        assert_eq!(x, 2.0);
    }

    #[test]
    fn bisect_exponential_cdf() {
        let t = Tolerance::root();
        let x = bisect(|x: f64| 1.0 - (-x).exp(), 0.0, 10.0, 0.1, &t).unwrap();
        // -ln(0.9) by hand: 0.1053605156578263
        assert!((x - 0.105_360_515_657_826_3).abs() <= 1e-9 * 0.2);
        let residual = (1.0 - (-x).exp() - 0.1).abs();
        assert!(residual <= t.abs || residual <= 1e-9);
    }

    #[test]
    fn bisect_rejects_bad_bracket() {
        let r = bisect(|x| x, 2.0, 3.0, 1.0, &Tolerance::root());
        assert!(matches!(r, Err(NumericsError::BracketInvalid { .. })));
    }

    #[test]
    fn bisect_reports_iteration_budget() {
        let t = Tolerance::new(1e-15, 1e-300, 5).unwrap();
        let r = bisect(|x: f64| x.powi(3), 0.0, 3.0, 2.0, &t);
        assert!(matches!(r, Err(NumericsError::NonConvergence { .. })));
    }

    #[test]
    fn bisect_is_deterministic() {
        let g = |x: f64| x.exp() - 1.0;
        let t = Tolerance::root();
        let a = bisect(g, 0.0, 5.0, 3.3, &t).unwrap();
        let b = bisect(g, 0.0, 5.0, 3.3, &t).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn bracket_doubling_sequences() {
        assert_eq!(bracket_above(|x| x, 0.0, 5.0).unwrap(), 8.0);
        assert_eq!(bracket_above(|x| x * x, 0.0, 100.0).unwrap(), 16.0);
        assert!(matches!(
            bracket_above(|x: f64| 1.0 - (-x).exp(), 0.0, 2.0),
            Err(NumericsError::NoBracket { .. })
        ));
    }

    #[test]
    fn tolerance_validation_and_override() {
        assert!(Tolerance::new(0.0, 1e-12, 10).is_err());
        assert!(Tolerance::new(1e-9, -1.0, 10).is_err());
        assert!(Tolerance::new(1e-9, 1e-12, 0).is_err());
        let t = Tolerances::parse_override("1e-7").unwrap();
        assert_eq!(t.quad.rel, 1e-7);
        assert_eq!(t.quad.abs, 1e-12);
        let t = Tolerances::parse_override("1e-6, 1e-10").unwrap();
        assert_eq!(t.root.abs, 1e-10);
        assert!(Tolerances::parse_override("x").is_err());
        assert!(Tolerances::parse_override("1,2,3").is_err());
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn additive_for_any_split(a in 0.0f64..2.0, w1 in 0.01f64..3.0, w2 in 0.01f64..3.0) {
                let f = |x: f64| (-0.7 * x).exp() * (1.0 + x.sin());
                let t = Tolerance::quadrature();
                let (b, c) = (a + w1, a + w1 + w2);
                let ab = integrate(f, a, b, &t).unwrap();
                let bc = integrate(f, b, c, &t).unwrap();
                let ac = integrate(f, a, c, &t).unwrap();
                prop_assert!((ac - ab - bc).abs() <= 2.0 * t.abs.max(t.rel * ac.abs()));
            }

            #[test]
            fn bisect_residual_bound(target in 0.01f64..0.99) {
                let t = Tolerance::root();
                let g = |x: f64| 1.0 - (-x).exp();
                let x = bisect(g, 0.0, 20.0, target, &t).unwrap();
                let exact = -(1.0 - target).ln();
                prop_assert!((g(x) - target).abs() <= t.abs || (x - exact).abs() <= 2.0 * t.rel * x.abs());
            }
        }
    }
}
