//! Block-fading simulation of a solved policy.
//!
//! Every block owns a ChaCha8 stream selected by its index, so a block's
//! draws never depend on which worker runs it. Blocks are summed in fixed
//! leaves of [`LEAF_BLOCKS`] and the leaves are folded in order, which keeps
//! results bit-identical across chunk sizes and thread counts.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fading::{exponential_gain, min_gain, GainDistribution, GainLaw};
use crate::numerics::Tolerances;
use crate::policy::{min_power, Policy, SystemParams};

pub const LEAF_BLOCKS: u64 = 1024;

/// A block counts as outage when its rate falls this far below `r0`.
pub const OUTAGE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub n_blocks: u64,
    pub seed: u64,
    /// Blocks per work unit. Only affects scheduling.
    pub chunk: u64,
}

impl SimConfig {
    pub fn new(n_blocks: u64, seed: u64) -> Self {
        SimConfig {
            n_blocks,
            seed,
            chunk: 16 * LEAF_BLOCKS,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_blocks == 0 {
            return Err(Error::invalid("n_blocks must be at least 1"));
        }
        if self.chunk == 0 {
            return Err(Error::invalid("chunk must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimStats {
    pub outage_rate: f64,
    pub mean_power: f64,
    pub mean_rate: f64,
    pub se_outage: f64,
    pub se_power: f64,
    pub se_rate: f64,
    pub n_blocks: u64,
}

/// Outcome of one fading block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Block {
    pub h_min: f64,
    pub power: f64,
    pub rate: f64,
    pub outage: bool,
}

#[derive(Debug, Clone, Copy, Default)]
struct Sums {
    outages: u64,
    power: f64,
    power2: f64,
    rate: f64,
    rate2: f64,
}

impl Sums {
    fn push(&mut self, b: &Block) {
        self.outages += b.outage as u64;
        self.power += b.power;
        self.power2 += b.power * b.power;
        self.rate += b.rate;
        self.rate2 += b.rate * b.rate;
    }

    fn merge(mut self, o: &Sums) -> Sums {
        self.outages += o.outages;
        self.power += o.power;
        self.power2 += o.power2;
        self.rate += o.rate;
        self.rate2 += o.rate2;
        self
    }
}

/// The random stream used by block `block`.
pub fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

/// Minimum of one draw from each user.
pub fn draw_min_gain<R: Rng + ?Sized>(users: &[GainDistribution], rng: &mut R) -> f64 {
    users.iter().map(|u| u.sample(rng)).fold(f64::INFINITY, f64::min)
}

pub fn run_block(pol: &Policy, users: &[GainDistribution], seed: u64, block: u64) -> Block {
    let mut rng = block_rng(seed, block);
    let h_min = draw_min_gain(users, &mut rng);
    let power = pol.allocate(h_min);
    let rate = pol.params.rate(h_min * power);
    Block {
        h_min,
        power,
        rate,
        outage: rate < pol.params.r0 - OUTAGE_SLACK,
    }
}

fn leaf_sums(pol: &Policy, users: &[GainDistribution], seed: u64, start: u64, end: u64) -> Sums {
    let mut s = Sums::default();
    for block in start..end {
        s.push(&run_block(pol, users, seed, block));
    }
    s
}

fn mean_and_se(sum: f64, sum2: f64, n: f64) -> (f64, f64) {
    let mean = sum / n;
    if n < 2.0 {
        return (mean, 0.0);
    }
    let var = ((sum2 - n * mean * mean) / (n - 1.0)).max(0.0);
    (mean, (var / n).sqrt())
}

pub fn simulate(pol: &Policy, users: &[GainDistribution], cfg: &SimConfig) -> Result<SimStats> {
    cfg.validate()?;
    if users.is_empty() {
        return Err(Error::EmptyList);
    }
    let n = cfg.n_blocks;
    let leaves = n.div_ceil(LEAF_BLOCKS);
    let per_unit = (cfg.chunk / LEAF_BLOCKS).max(1) as usize;
    let sums: Vec<Sums> = (0..leaves as usize)
        .into_par_iter()
        .with_min_len(per_unit)
        .map(|leaf| {
            let start = leaf as u64 * LEAF_BLOCKS;
            leaf_sums(pol, users, cfg.seed, start, (start + LEAF_BLOCKS).min(n))
        })
        .collect();
    let total = sums.iter().fold(Sums::default(), |acc, s| acc.merge(s));

    let nf = n as f64;
    let outage_rate = total.outages as f64 / nf;
    let se_outage = if n > 1 {
        (outage_rate * (1.0 - outage_rate) / (nf - 1.0)).sqrt()
    } else {
        0.0
    };
    let (mean_power, se_power) = mean_and_se(total.power, total.power2, nf);
    let (mean_rate, se_rate) = mean_and_se(total.rate, total.rate2, nf);
    Ok(SimStats {
        outage_rate,
        mean_power,
        mean_rate,
        se_outage,
        se_power,
        se_rate,
        n_blocks: n,
    })
}

/// Per-block CSV dump: `block,h_min,power,rate,outage`. Debugging aid.
pub fn write_trace<W: Write>(
    pol: &Policy,
    users: &[GainDistribution],
    cfg: &SimConfig,
    out: &mut W,
) -> Result<()> {
    cfg.validate()?;
    writeln!(out, "block,h_min,power,rate,outage")?;
    for block in 0..cfg.n_blocks {
        let b = run_block(pol, users, cfg.seed, block);
        writeln!(
            out,
            "{block},{},{},{},{}",
            crate::cli::fmt_num(b.h_min),
            crate::cli::fmt_num(b.power),
            crate::cli::fmt_num(b.rate),
            b.outage as u8
        )?;
    }
    Ok(())
}

/// `p_min` for `N` iid exponential(`omega`) users, for each `N` in `n_list`.
pub fn scaling_experiment(
    omega: f64,
    params: &SystemParams,
    n_list: &[usize],
    tol: &Tolerances,
) -> Result<Vec<(usize, f64)>> {
    if n_list.is_empty() {
        return Err(Error::EmptyList);
    }
    let user = exponential_gain(omega)?;
    n_list
        .iter()
        .map(|&n| {
            if n == 0 {
                return Err(Error::invalid("number of users must be at least 1"));
            }
            let d = min_gain(vec![user.clone(); n])?;
            Ok((n, min_power(&d, params, tol)?))
        })
        .collect()
}

/// Kolmogorov-Smirnov distance between the sample and `cdf`. Sorts `samples`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &mut [f64], cdf: F) -> f64 {
    samples.sort_by(|a, b| a.total_cmp(b));
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic KS critical value at the 1% level.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::solve;

    fn users(omegas: &[f64]) -> Vec<GainDistribution> {
        omegas.iter().map(|&o| exponential_gain(o).unwrap()).collect()
    }

    fn solved(omegas: &[f64], r0: f64, eps: f64, p_av: f64) -> Policy {
        let d = min_gain(users(omegas)).unwrap();
        solve(&d, &SystemParams::new(1.0, r0, eps, p_av).unwrap(), &Tolerances::default()).unwrap()
    }

    #[test]
    fn ks_of_exact_grid_is_small() {
        let mut s: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).rev().collect();
        let d = ks_statistic(&mut s, |x| x);
        assert!((d - 0.0005).abs() < 1e-12);
        assert!(s.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn zero_rate_never_outages() {
        let pol = solved(&[1.0, 2.0], 0.0, 0.1, 2.0);
        let st = simulate(&pol, &users(&[1.0, 2.0]), &SimConfig::new(20_000, 3)).unwrap();
        assert_eq!(st.outage_rate, 0.0);
    }

    #[test]
    fn deterministic_across_chunking_and_threads() {
        let pol = solved(&[1.0, 2.0], 0.5, 0.05, 8.0);
        let u = users(&[1.0, 2.0]);
        let base = simulate(&pol, &u, &SimConfig { n_blocks: 50_001, seed: 11, chunk: 1 }).unwrap();
        for chunk in [7, 1024, 100_000] {
            let st = simulate(&pol, &u, &SimConfig { n_blocks: 50_001, seed: 11, chunk }).unwrap();
            assert_eq!(st, base);
        }
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let single = pool.install(|| simulate(&pol, &u, &SimConfig { n_blocks: 50_001, seed: 11, chunk: 4096 }).unwrap());
        assert_eq!(single, base);
        let other = simulate(&pol, &u, &SimConfig { n_blocks: 50_001, seed: 12, chunk: 1 }).unwrap();
        assert_ne!(other, base);
    }

    #[test]
    fn config_validation() {
        let pol = solved(&[1.0], 0.5, 0.1, 3.0);
        assert!(simulate(&pol, &users(&[1.0]), &SimConfig { n_blocks: 0, seed: 0, chunk: 1 }).is_err());
        assert!(simulate(&pol, &users(&[1.0]), &SimConfig { n_blocks: 1, seed: 0, chunk: 0 }).is_err());
        assert!(simulate(&pol, &[], &SimConfig::new(1, 0)).is_err());
        let one = simulate(&pol, &users(&[1.0]), &SimConfig::new(1, 0)).unwrap();
        assert_eq!(one.se_rate, 0.0);
    }

    #[test]
    fn statistics_match_analytic_values() {
        let pol = solved(&[1.0, 2.0], 0.5, 0.05, 9.0);
        let st = simulate(&pol, &users(&[1.0, 2.0]), &SimConfig::new(400_000, 99)).unwrap();
        assert!(st.outage_rate <= 0.05 + 3.0 * st.se_outage);
        assert!((st.mean_power - 9.0).abs() <= 3.0 * st.se_power, "{st:?}");
        let cap = pol.expected_capacity().unwrap();
        assert!((st.mean_rate - cap).abs() <= 3.0 * st.se_rate, "{st:?} vs {cap}");
    }

    #[test]
    fn simulated_min_gain_passes_ks() {
        let u = users(&[1.0, 2.0, 0.5]);
        let d = min_gain(u.clone()).unwrap();
        let n = 50_000u64;
        let mut s: Vec<f64> = (0..n).map(|b| draw_min_gain(&u, &mut block_rng(8, b))).collect();
        let ks = ks_statistic(&mut s, |x| d.cdf(x));
        assert!(ks < ks_critical_1pct(n as usize), "{ks}");
    }

    #[test]
    fn trace_rows() {
        let pol = solved(&[1.0], 0.5, 0.1, 3.0);
        let u = users(&[1.0]);
        let cfg = SimConfig::new(5, 4);
        let mut buf = Vec::new();
        write_trace(&pol, &u, &cfg, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 6);
        assert_eq!(lines[0], "block,h_min,power,rate,outage");
        let b3 = run_block(&pol, &u, 4, 3);
        assert!(lines[4].starts_with("3,"));
        assert!(lines[4].ends_with(if b3.outage { ",1" } else { ",0" }));
    }

    #[test]
    fn scaling_is_linear() {
        let p = SystemParams::new(1.0, 0.5, 0.1, 0.0).unwrap();
        let rows = scaling_experiment(1.0, &p, &[1, 2, 5, 64], &Tolerances::default()).unwrap();
        let base = rows[0].1;
        for (n, pm) in rows {
            assert!((pm / base - n as f64).abs() <= 1e-6 * n as f64);
        }
        assert!(scaling_experiment(1.0, &p, &[], &Tolerances::default()).is_err());
        assert!(scaling_experiment(1.0, &p, &[0], &Tolerances::default()).is_err());
    }

    #[test]
    fn scaling_slopes_order_with_rate() {
        let slope = |r0: f64| {
            let p = SystemParams::new(1.0, r0, 0.1, 0.0).unwrap();
            let rows = scaling_experiment(1.0, &p, &[1, 2, 3, 4], &Tolerances::default()).unwrap();
            let (sxy, sxx) = rows
                .iter()
                .fold((0.0, 0.0), |(a, b), &(n, pm)| (a + n as f64 * pm, b + (n * n) as f64));
            sxy / sxx
        };
        let (a, b, c) = (slope(0.25), slope(0.5), slope(1.0));
        assert!(0.0 < a && a < b && b < c);
    }
}
