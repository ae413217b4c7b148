//! Channel-gain laws and the law of the minimum gain across users.
//!
//! Every law is continuous on `[0, inf)`. [`GainDistribution`] covers the
//! per-user laws: exponential power gain (Rayleigh amplitude) and a tabulated
//! CDF interpolated with a monotone cubic. [`MinGainDistribution`] composes
//! independent per-user laws into the law of `min_i h_i`, whose density is
//!
//! ```text
//! f(x) = sum_i f_i(x) * prod_{j != i} (1 - F_j(x))
//! ```

use std::fs;
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};
use crate::numerics::{bisect, bracket_above, Tolerance};

/// Analytic interface shared by every gain law.
pub trait GainLaw {
    fn pdf(&self, x: f64) -> f64;
    fn cdf(&self, x: f64) -> f64;

    /// `ln(1 - cdf(x))`, accurate where the cdf is tiny.
    fn log_survival(&self, x: f64) -> f64 {
        (-self.cdf(x)).ln_1p()
    }

    /// Smallest `x` with `cdf(x) >= p`.
    fn quantile(&self, p: f64) -> f64 {
        quantile_by_bisection(self, p)
    }

    /// `(inf, sup)` of the support. `sup` may be `+inf`.
    fn support(&self) -> (f64, f64);

    /// Points where the density is not smooth. Quadrature splits there.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64;
}

const QUANTILE_TOL: Tolerance = Tolerance {
    rel: 1e-15,
    abs: 1e-13,
    max_iter: 200,
};

/// Generic inverse by bisection on the cdf.
pub fn quantile_by_bisection<L: GainLaw + ?Sized>(law: &L, p: f64) -> f64 {
    let (lo, sup) = law.support();
    if p <= 0.0 {
        return lo;
    }
    if p >= 1.0 {
        return sup;
    }
    let hi = if sup.is_finite() {
        sup
    } else {
        bracket_above(|x| law.cdf(x), lo, p).unwrap_or(f64::MAX)
    };
    bisect(|x| law.cdf(x), lo, hi, p, &QUANTILE_TOL).unwrap_or(hi)
}

/// Exponential power gain with mean `omega`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponential {
    omega: f64,
}

impl Exponential {
    pub fn new(omega: f64) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::invalid(format!("mean gain must be positive, got {omega}")));
        }
        Ok(Exponential { omega })
    }

    pub fn mean(&self) -> f64 {
        self.omega
    }
}

impl GainLaw for Exponential {
    fn pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            0.0
        } else {
            (-x / self.omega).exp() / self.omega
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -(-x / self.omega).exp_m1()
        }
    }

    fn log_survival(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -x / self.omega
        }
    }

    fn quantile(&self, p: f64) -> f64 {
        if p <= 0.0 {
            0.0
        } else if p >= 1.0 {
            f64::INFINITY
        } else {
            -self.omega * (-p).ln_1p()
        }
    }

    fn support(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        -self.omega * (-u).ln_1p()
    }
}

/// A law given by a table of `(gain, cdf)` knots, interpolated with a
/// monotone piecewise cubic (Fritsch–Carlson slopes). The table is
/// renormalized so the last knot carries cdf 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated {
    gains: Vec<f64>,
    cdf: Vec<f64>,
    slopes: Vec<f64>,
}

impl Tabulated {
    pub fn new(gains: Vec<f64>, cdf: Vec<f64>) -> Result<Self> {
        validate_table(&gains, &cdf).map_err(Error::InvalidParam)?;
        let last = *cdf.last().unwrap();
        let cdf: Vec<f64> = cdf.iter().map(|c| c / last).collect();
        let slopes = pchip_slopes(&gains, &cdf);
        Ok(Tabulated { gains, cdf, slopes })
    }

    /// Reads the two-column `gain cdf` text format. Blank lines and `#`
    /// comments are ignored.
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let cfg_err = |line: usize, msg: String| Error::Config {
            path: origin.to_string(),
            line,
            msg,
        };
        let mut gains = Vec::new();
        let mut cdf = Vec::new();
        let mut last_line = 0;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            last_line = idx + 1;
            let cols: Vec<&str> = line.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()).collect();
            if cols.len() != 2 {
                return Err(cfg_err(idx + 1, format!("expected two columns `gain cdf`, got {}", cols.len())));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| cfg_err(idx + 1, format!("not a number: {s:?}")))
            };
            let (g, c) = (parse(cols[0])?, parse(cols[1])?);
            if gains.is_empty() && c != 0.0 {
                return Err(cfg_err(idx + 1, format!("first cdf value must be 0, got {c}")));
            }
            if let (Some(&pg), Some(&pc)) = (gains.last(), cdf.last()) {
                if !(g > pg && c > pc) {
                    return Err(cfg_err(idx + 1, "gain and cdf columns must be strictly increasing".into()));
                }
            }
            gains.push(g);
            cdf.push(c);
        }
        validate_table(&gains, &cdf).map_err(|msg| cfg_err(last_line, msg))?;
        Tabulated::new(gains, cdf)
    }

    fn segment(&self, x: f64) -> usize {
        // index k with gains[k] <= x < gains[k + 1]
        let k = self.gains.partition_point(|&g| g <= x);
        k.saturating_sub(1).min(self.gains.len() - 2)
    }
}

fn validate_table(gains: &[f64], cdf: &[f64]) -> std::result::Result<(), String> {
    if gains.len() != cdf.len() {
        return Err("gain and cdf columns differ in length".into());
    }
    if gains.len() < 2 {
        return Err("a table needs at least two rows".into());
    }
    if gains.iter().chain(cdf).any(|v| !v.is_finite()) {
        return Err("table entries must be finite".into());
    }
    if gains[0] < 0.0 {
        return Err("gains must be nonnegative".into());
    }
    if cdf[0] != 0.0 {
        return Err(format!("first cdf value must be 0, got {}", cdf[0]));
    }
    let last = *cdf.last().unwrap();
    if !(0.9999..=1.0).contains(&last) {
        return Err(format!("last cdf value must lie in [0.9999, 1], got {last}"));
    }
    let increasing = |v: &[f64]| v.windows(2).all(|w| w[1] > w[0]);
    if !increasing(gains) || !increasing(cdf) {
        return Err("gain and cdf columns must be strictly increasing".into());
    }
    Ok(())
}

fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    if n == 2 {
        return vec![delta[0]; 2];
    }
    let mut d = vec![0.0; n];
    for k in 1..n - 1 {
        if delta[k - 1] * delta[k] > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
    }
    let end = |h0: f64, h1: f64, d0: f64, d1: f64| {
        let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if s.signum() != d0.signum() {
            0.0
        } else if d0.signum() != d1.signum() && s.abs() > 3.0 * d0.abs() {
            3.0 * d0
        } else {
            s
        }
    };
    d[0] = end(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

impl GainLaw for Tabulated {
    fn pdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x < lo || x > hi {
            return 0.0;
        }
        let k = self.segment(x);
        let h = self.gains[k + 1] - self.gains[k];
        let t = (x - self.gains[k]) / h;
        let (y0, y1, d0, d1) = (self.cdf[k], self.cdf[k + 1], self.slopes[k], self.slopes[k + 1]);
        let v = (6.0 * t * t - 6.0 * t) * y0
            + (3.0 * t * t - 4.0 * t + 1.0) * h * d0
            + (-6.0 * t * t + 6.0 * t) * y1
            + (3.0 * t * t - 2.0 * t) * h * d1;
        (v / h).max(0.0)
    }

    fn cdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x <= lo {
            return 0.0;
        }
        if x >= hi {
            return 1.0;
        }
        let k = self.segment(x);
        let h = self.gains[k + 1] - self.gains[k];
        let t = (x - self.gains[k]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * self.cdf[k]
            + (t3 - 2.0 * t2 + t) * h * self.slopes[k]
            + (-2.0 * t3 + 3.0 * t2) * self.cdf[k + 1]
            + (t3 - t2) * h * self.slopes[k + 1];
        v.clamp(0.0, 1.0)
    }

    fn quantile(&self, p: f64) -> f64 {
        let (lo, hi) = self.support();
        if p <= 0.0 {
            return lo;
        }
        if p >= 1.0 {
            return hi;
        }
        let k = self.cdf.partition_point(|&c| c <= p).saturating_sub(1).min(self.cdf.len() - 2);
        bisect(|x| self.cdf(x), self.gains[k], self.gains[k + 1], p, &QUANTILE_TOL)
            .unwrap_or(self.gains[k])
    }

    fn support(&self) -> (f64, f64) {
        (self.gains[0], *self.gains.last().unwrap())
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.gains.clone()
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.random())
    }
}

/// A per-user channel power-gain law.
#[derive(Debug, Clone, PartialEq)]
pub enum GainDistribution {
    Exponential(Exponential),
    Tabulated(Tabulated),
}

/// Rayleigh-faded user: exponential power gain with mean `omega`.
pub fn exponential_gain(omega: f64) -> Result<GainDistribution> {
    Exponential::new(omega).map(GainDistribution::Exponential)
}

impl GainDistribution {
    /// Mean gain, when known in closed form.
    pub fn mean_gain(&self) -> Option<f64> {
        match self {
            GainDistribution::Exponential(e) => Some(e.mean()),
            GainDistribution::Tabulated(_) => None,
        }
    }
}

macro_rules! dispatch {
    ($self:ident, $law:ident => $body:expr) => {
        match $self {
            GainDistribution::Exponential($law) => $body,
            GainDistribution::Tabulated($law) => $body,
        }
    };
}

impl GainLaw for GainDistribution {
    fn pdf(&self, x: f64) -> f64 {
        dispatch!(self, l => l.pdf(x))
    }
    fn cdf(&self, x: f64) -> f64 {
        dispatch!(self, l => l.cdf(x))
    }
    fn log_survival(&self, x: f64) -> f64 {
        dispatch!(self, l => l.log_survival(x))
    }
    fn quantile(&self, p: f64) -> f64 {
        dispatch!(self, l => l.quantile(p))
    }
    fn support(&self) -> (f64, f64) {
        dispatch!(self, l => l.support())
    }
    fn breakpoints(&self) -> Vec<f64> {
        dispatch!(self, l => l.breakpoints())
    }
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        dispatch!(self, l => l.sample(rng))
    }
}

/// Law of the minimum of independent per-user gains.
#[derive(Debug, Clone, PartialEq)]
pub struct MinGainDistribution {
    parts: Vec<GainDistribution>,
}

pub fn min_gain(parts: Vec<GainDistribution>) -> Result<MinGainDistribution> {
    MinGainDistribution::new(parts)
}

impl MinGainDistribution {
    pub fn new(parts: Vec<GainDistribution>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::EmptyList);
        }
        Ok(MinGainDistribution { parts })
    }

    pub fn parts(&self) -> &[GainDistribution] {
        &self.parts
    }

    pub fn n_users(&self) -> usize {
        self.parts.len()
    }

    /// If every part is exponential the minimum is exponential too, with
    /// rate equal to the sum of the rates. Returns that mean.
    pub fn exponential_mean(&self) -> Option<f64> {
        let mut rate = 0.0;
        for p in &self.parts {
            match p {
                GainDistribution::Exponential(e) => rate += 1.0 / e.mean(),
                _ => return None,
            }
        }
        Some(1.0 / rate)
    }
}

impl GainLaw for MinGainDistribution {
    fn pdf(&self, x: f64) -> f64 {
        let n = self.parts.len();
        let surv: Vec<f64> = self.parts.iter().map(|p| 1.0 - p.cdf(x)).collect();
        // prefix[i] = prod_{j < i} surv[j]
        let mut prefix = vec![1.0; n + 1];
        for i in 0..n {
            prefix[i + 1] = prefix[i] * surv[i];
        }
        let mut suffix = 1.0;
        let mut total = 0.0;
        for i in (0..n).rev() {
            total += self.parts[i].pdf(x) * prefix[i] * suffix;
            suffix *= surv[i];
        }
        total
    }

    fn cdf(&self, x: f64) -> f64 {
        -self.log_survival(x).exp_m1()
    }

    fn log_survival(&self, x: f64) -> f64 {
        self.parts.iter().map(|p| p.log_survival(x)).sum()
    }

    fn quantile(&self, p: f64) -> f64 {
        match self.exponential_mean() {
            Some(omega) if p > 0.0 => {
                if p >= 1.0 {
                    f64::INFINITY
                } else {
                    -omega * (-p).ln_1p()
                }
            }
            _ => quantile_by_bisection(self, p),
        }
    }

    fn support(&self) -> (f64, f64) {
        self.parts.iter().map(|p| p.support()).fold((f64::INFINITY, f64::INFINITY), |acc, s| {
            (acc.0.min(s.0), acc.1.min(s.1))
        })
    }

    fn breakpoints(&self) -> Vec<f64> {
        let sup = self.support().1;
        let mut b: Vec<f64> = self.parts.iter().flat_map(|p| p.breakpoints()).filter(|&x| x < sup).collect();
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.parts.iter().map(|p| p.sample(rng)).fold(f64::INFINITY, f64::min)
    }
}

/// The `eps`-quantile of the minimum gain: the service threshold.
pub fn quantile_of_min(d: &MinGainDistribution, eps: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::invalid(format!("outage budget must lie in [0, 1), got {eps}")));
    }
    if eps == 0.0 {
        return Ok(d.support().0);
    }
    Ok(d.quantile(eps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::ks_statistic;
    use crate::numerics::integrate_with_breaks;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn exp(omega: f64) -> GainDistribution {
        exponential_gain(omega).unwrap()
    }

    fn sample_points() -> Vec<f64> {
        (1..=100).map(|k| 0.03 * k as f64).collect()
    }

    #[test]
    fn exponential_examples() {
        assert_eq!(exp(1.0).cdf(0.0), 0.0);
        assert!((exp(1.0).quantile(0.5) - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(exp(2.0).pdf(0.0), 0.5);
        assert!(exponential_gain(0.0).is_err());
        assert!(exponential_gain(-1.0).is_err());
        assert!(exponential_gain(f64::NAN).is_err());
    }

    #[test]
    fn four_iid_exponentials_compose_to_rate_four() {
        let d = min_gain(vec![exp(1.0); 4]).unwrap();
        for x in sample_points() {
            assert!((d.cdf(x) - (1.0 - (-4.0 * x).exp())).abs() < 1e-12);
            assert!((d.pdf(x) - 4.0 * (-4.0 * x).exp()).abs() < 1e-12);
        }
        assert!((d.exponential_mean().unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn single_part_is_identity() {
        let tab = Tabulated::new(vec![0.0, 0.5, 1.0, 3.0], vec![0.0, 0.3, 0.6, 1.0]).unwrap();
        for law in [exp(1.7), GainDistribution::Tabulated(tab)] {
            let d = min_gain(vec![law.clone()]).unwrap();
            for x in sample_points() {
                assert!((d.cdf(x) - law.cdf(x)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn heterogeneous_pair_has_rates_added() {
        let d = min_gain(vec![exp(1.0), exp(2.0)]).unwrap();
        for x in sample_points() {
            let expected = 1.0 - (-x).exp() * (-x / 2.0).exp();
            assert!((d.cdf(x) - expected).abs() < 1e-12);
        }
        assert!((d.exponential_mean().unwrap() - 2.0 / 3.0).abs() < 1e-15);

        // empirical check on 10^6 min-of-pair draws
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 1_000_000;
        let mut s: Vec<f64> = (0..n).map(|_| d.sample(&mut rng)).collect();
        let mean = s.iter().sum::<f64>() / n as f64;
        // the minimum is exponential, so its std equals its mean
        let se = (2.0 / 3.0) / (n as f64).sqrt();
        assert!((mean - 2.0 / 3.0).abs() < 4.0 * se, "mean {mean}");
        let ks = ks_statistic(&mut s, |x| d.cdf(x));
        assert!(ks < 1.628 / (n as f64).sqrt(), "ks {ks}");
    }

    #[test]
    fn empty_part_list_rejected() {
        assert!(matches!(min_gain(vec![]), Err(Error::EmptyList)));
    }

    #[test]
    fn quantile_of_min_examples() {
        let d = min_gain(vec![exp(0.8)]).unwrap();
        assert!((quantile_of_min(&d, 0.2).unwrap() - (-0.8 * (0.8f64).ln())).abs() < 1e-15);
        assert_eq!(quantile_of_min(&d, 0.0).unwrap(), 0.0);
        let d1 = min_gain(vec![exp(1.0)]).unwrap();
        assert!((quantile_of_min(&d1, 0.1).unwrap() - 0.105_360_515_657_826_3).abs() < 1e-15);
        assert!(quantile_of_min(&d1, 1.0).is_err());
        assert!(quantile_of_min(&d1, -0.1).is_err());
    }

    #[test]
    fn quantile_of_min_generic_path_hits_cdf() {
        let tab = Tabulated::new(vec![0.0, 0.4, 1.0, 2.0, 5.0], vec![0.0, 0.2, 0.55, 0.85, 1.0]).unwrap();
        let d = min_gain(vec![GainDistribution::Tabulated(tab), exp(1.5)]).unwrap();
        for eps in [1e-4, 0.01, 0.1, 0.5, 0.9] {
            let q = quantile_of_min(&d, eps).unwrap();
            assert!((d.cdf(q) - eps).abs() <= 1e-10, "eps {eps}");
        }
    }

    #[test]
    fn product_form_of_min_cdf() {
        let tab = Tabulated::new(vec![0.1, 0.5, 1.5, 4.0], vec![0.0, 0.25, 0.7, 1.0]).unwrap();
        let parts = vec![exp(1.0), exp(0.3), GainDistribution::Tabulated(tab)];
        let d = min_gain(parts.clone()).unwrap();
        for x in sample_points() {
            let prod: f64 = parts.iter().map(|p| 1.0 - p.cdf(x)).product();
            assert!((d.cdf(x) - (1.0 - prod)).abs() <= 1e-10);
        }
    }

    #[test]
    fn density_is_derivative_of_cdf() {
        let tab = Tabulated::new(vec![0.0, 0.5, 1.5, 4.0, 9.0], vec![0.0, 0.25, 0.7, 0.95, 1.0]).unwrap();
        let d = min_gain(vec![exp(1.0), exp(2.5), GainDistribution::Tabulated(tab)]).unwrap();
        let knots = d.breakpoints();
        for x in sample_points() {
            if knots.iter().any(|k| (k - x).abs() < 1e-3) {
                continue;
            }
            let h = 1e-5 * x.max(1e-3);
            let numeric = (d.cdf(x + h) - d.cdf(x - h)) / (2.0 * h);
            let pdf = d.pdf(x);
            assert!((numeric - pdf).abs() <= 1e-6 * pdf.abs().max(1e-3), "x {x}: {numeric} vs {pdf}");
        }
    }

    #[test]
    fn iid_closure_pointwise() {
        for n in [2usize, 5, 16] {
            let omega = 1.3;
            let d = min_gain(vec![exp(omega); n]).unwrap();
            let reference = exp(omega / n as f64);
            for x in sample_points() {
                assert!((d.cdf(x) - reference.cdf(x)).abs() <= 1e-12);
                assert!((d.pdf(x) - reference.pdf(x)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn sampler_passes_ks() {
        let tab = Tabulated::new(vec![0.0, 0.5, 1.5, 4.0], vec![0.0, 0.25, 0.7, 1.0]).unwrap();
        let d = min_gain(vec![exp(2.0), GainDistribution::Tabulated(tab)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let mut s: Vec<f64> = (0..n).map(|_| d.sample(&mut rng)).collect();
        let ks = ks_statistic(&mut s, |x| d.cdf(x));
        assert!(ks < 1.628 / (n as f64).sqrt(), "ks {ks}");
    }

    #[test]
    fn tabulated_density_integrates_to_cdf_increments() {
        let tab = Tabulated::new(
            vec![0.0, 0.2, 0.7, 1.1, 2.0, 6.0],
            vec![0.0, 0.05, 0.35, 0.6, 0.9, 0.99995],
        )
        .unwrap();
        let knots = tab.breakpoints();
        let tol = Tolerance::quadrature();
        for (a, b) in [(0.0, 6.0), (0.1, 0.9), (0.65, 3.3), (1.5, 1.6)] {
            let integral = integrate_with_breaks(|x| tab.pdf(x), a, b, &knots, &tol).unwrap();
            assert!((tab.cdf(b) - tab.cdf(a) - integral).abs() <= 1e-8);
        }
        for k in 1..60 {
            let x = 0.1 * k as f64;
            assert!((tab.quantile(tab.cdf(x)) - x).abs() <= 1e-8, "x {x}");
        }
    }

    #[test]
    fn tabulated_parse_and_reject() {
        let good = "# gain cdf\n0 0\n0.5 0.4\n\n1.0 0.7  # knee\n3.0 0.99995\n";
        let t = Tabulated::parse(good, "mem").unwrap();
        assert_eq!(t.support(), (0.0, 3.0));
        assert!((t.cdf(3.0) - 1.0).abs() < 1e-15);

        let cases = [
            ("0 0\n1 0.5\n0.5 1.0\n", 3),
            ("0 0.1\n1 1\n", 1),
            ("0 0\n1 0.9\n", 2),
            ("0 0\n1 x\n", 2),
            ("0 0 0\n", 1),
            ("0 0\n1 0.5\n2 0.5\n", 3),
        ];
        for (text, line) in cases {
            match Tabulated::parse(text, "t.txt") {
                Err(Error::Config { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }
}
