//! Brute-force solvers on discretized instances, used to check the analytic
//! policy from the outside.
//!
//! Every candidate outage set turns the problem into a concave program whose
//! KKT solution is water-filling with per-bin floors:
//! `x_i = max(floor_i, mu - sigma2 / g_i)`, with `floor_i` the inversion power
//! on service bins and zero on outage bins, and `mu` found by bisection on
//! the total power. Nothing here calls into [`crate::policy`].

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fading::{GainDistribution, GainLaw, MinGainDistribution};
use crate::numerics::{integrate_with_breaks, Tolerances};
use crate::policy::SystemParams;

/// Outage-set masses may exceed `eps` by this much.
pub const MASS_SLACK: f64 = 1e-12;
/// Largest instance searched exhaustively.
pub const MAX_EXHAUSTIVE_BINS: usize = 20;
pub const MAX_JOINT_BINS: usize = 50;
/// Largest joint grid (cells) cross-checked by subset enumeration.
pub const MAX_ENUMERATION_CELLS: usize = 25;

pub const SUBGRADIENT_ITERATIONS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteInstance {
    pub gains: Vec<f64>,
    pub probs: Vec<f64>,
    pub params: SystemParams,
}

impl DiscreteInstance {
    pub fn new(gains: Vec<f64>, probs: Vec<f64>, params: SystemParams) -> Result<Self> {
        params.validate()?;
        if gains.is_empty() || gains.len() != probs.len() {
            return Err(Error::invalid("gains and probs must be nonempty and of equal length"));
        }
        if gains[0] <= 0.0 || gains.windows(2).any(|w| w[1] <= w[0]) || gains.iter().any(|g| !g.is_finite()) {
            return Err(Error::invalid("gains must be positive, finite and strictly increasing"));
        }
        if probs.iter().any(|p| p.is_nan() || *p < 0.0) {
            return Err(Error::invalid("probs must be nonnegative"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("probs sum to {total}, not 1")));
        }
        Ok(DiscreteInstance { gains, probs, params })
    }

    pub fn n_bins(&self) -> usize {
        self.gains.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    /// Every outage set within the budget.
    Exhaustive,
    /// Prefixes of the ascending gain list only.
    Threshold,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub capacity: f64,
    pub alloc: Vec<f64>,
    /// Bins whose rate ends below `r0`, ascending.
    pub outage_set: Vec<usize>,
    pub mode: SearchMode,
}

fn check_bins(n_bins: usize, mass_cut: f64) -> Result<()> {
    if n_bins < 2 {
        return Err(Error::invalid(format!("at least 2 bins are required, got {n_bins}")));
    }
    if !(mass_cut > 0.0 && mass_cut < 0.01) {
        return Err(Error::invalid(format!("mass_cut must lie in (0, 0.01), got {mass_cut}")));
    }
    Ok(())
}

/// Equiprobable bin edges of `d` after trimming `mass_cut / 2` from each tail.
fn equiprobable_edges<L: GainLaw>(d: &L, n_bins: usize, mass_cut: f64) -> Vec<f64> {
    (0..=n_bins)
        .map(|k| d.quantile(0.5 * mass_cut + (1.0 - mass_cut) * k as f64 / n_bins as f64))
        .collect()
}

fn conditional_means<L: GainLaw>(d: &L, edges: &[f64], tol: &Tolerances) -> Result<Vec<f64>> {
    let breaks = d.breakpoints();
    edges
        .windows(2)
        .map(|w| {
            let mass = d.cdf(w[1]) - d.cdf(w[0]);
            let first = integrate_with_breaks(|x| x * d.pdf(x), w[0], w[1], &breaks, &tol.quad)?;
            Ok(if mass > 0.0 { first / mass } else { 0.5 * (w[0] + w[1]) })
        })
        .collect()
}

/// Equiprobable discretization of the minimum-gain law: `n_bins` bins
/// between the `mass_cut / 2` and `1 - mass_cut / 2` quantiles, each placed
/// at its conditional mean gain and given mass `1 / n_bins`.
pub fn discretize(
    d: &MinGainDistribution,
    params: &SystemParams,
    n_bins: usize,
    mass_cut: f64,
    tol: &Tolerances,
) -> Result<DiscreteInstance> {
    check_bins(n_bins, mass_cut)?;
    let edges = equiprobable_edges(d, n_bins, mass_cut);
    let gains = conditional_means(d, &edges, tol)?;
    DiscreteInstance::new(gains, vec![1.0 / n_bins as f64; n_bins], *params)
}

/// KKT solution of `max sum m_i R(g_i x_i)` subject to `sum m_i x_i <= budget`
/// and `x_i >= floor_i`. `None` when the floors alone exceed the budget.
fn water_fill_with_floors(gains: &[f64], masses: &[f64], floors: &[f64], budget: f64, sigma2: f64) -> Option<Vec<f64>> {
    let floor_power: f64 = masses.iter().zip(floors).map(|(m, f)| m * f).sum();
    if floor_power > budget * (1.0 + 1e-12) + 1e-300 {
        return None;
    }
    let spend = |mu: f64| -> f64 {
        gains
            .iter()
            .zip(masses)
            .zip(floors)
            .map(|((&g, &m), &f)| m * f.max(mu - sigma2 / g))
            .sum()
    };
    let total_mass: f64 = masses.iter().sum();
    let noise: f64 = gains.iter().zip(masses).map(|(&g, &m)| m * sigma2 / g).sum();
    let max_floor = floors.iter().cloned().fold(0.0, f64::max);
    let (mut lo, mut hi) = (0.0, (budget + noise) / total_mass + max_floor + 1.0);
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if spend(mid) > budget {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(gains.iter().zip(floors).map(|(&g, &f)| f.max(lo - sigma2 / g)).collect())
}

fn rate(params: &SystemParams, g: f64, x: f64) -> f64 {
    0.5 * (1.0 + g * x / params.sigma2).log2()
}

fn inversion(params: &SystemParams, g: f64) -> f64 {
    (4f64.powf(params.r0) - 1.0) * params.sigma2 / g
}

fn is_outage(params: &SystemParams, g: f64, x: f64) -> bool {
    rate(params, g, x) < params.r0 - 1e-12
}

/// Solve the subproblem with outage set given as a bin mask.
fn solve_with_outage(inst: &DiscreteInstance, outage: &[bool]) -> Option<(f64, Vec<f64>)> {
    let p = &inst.params;
    let floors: Vec<f64> = inst
        .gains
        .iter()
        .zip(outage)
        .map(|(&g, &out)| if out { 0.0 } else { inversion(p, g) })
        .collect();
    let alloc = water_fill_with_floors(&inst.gains, &inst.probs, &floors, p.p_av, p.sigma2)?;
    let cap = inst
        .gains
        .iter()
        .zip(&inst.probs)
        .zip(&alloc)
        .map(|((&g, &m), &x)| m * rate(p, g, x))
        .sum();
    Some((cap, alloc))
}

/// Highest capacity first; ties go to the earlier candidate.
fn best<T>(candidates: Vec<Option<(f64, T)>>) -> Option<(f64, T)> {
    candidates
        .into_iter()
        .flatten()
        .fold(None, |acc: Option<(f64, T)>, c| match acc {
            Some(a) if a.0 >= c.0 => Some(a),
            _ => Some(c),
        })
}

/// Best allocation over all admissible outage sets. Instances with at most
/// [`MAX_EXHAUSTIVE_BINS`] bins are searched exhaustively; larger ones over
/// threshold-form (prefix) sets only.
pub fn brute_force_1d(inst: &DiscreteInstance) -> Result<OracleSolution> {
    let n = inst.n_bins();
    let eps = inst.params.eps;
    let mode = if n <= MAX_EXHAUSTIVE_BINS {
        SearchMode::Exhaustive
    } else {
        SearchMode::Threshold
    };
    let masks: Vec<Vec<bool>> = match mode {
        SearchMode::Exhaustive => {
            let mut masks: Vec<(f64, u32)> = (0u32..(1 << n))
                .map(|bits| {
                    let mass = (0..n).filter(|i| bits >> i & 1 == 1).map(|i| inst.probs[i]).sum();
                    (mass, bits)
                })
                .filter(|&(mass, _)| mass <= eps + MASS_SLACK)
                .collect();
            // heaviest sets first: they have the loosest floors
            masks.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            masks
                .into_iter()
                .map(|(_, bits)| (0..n).map(|i| bits >> i & 1 == 1).collect())
                .collect()
        }
        SearchMode::Threshold => {
            let mut mass = 0.0;
            let mut k = 0;
            while k < n && mass + inst.probs[k] <= eps + MASS_SLACK {
                mass += inst.probs[k];
                k += 1;
            }
            (0..=k).rev().map(|k| (0..n).map(|i| i < k).collect()).collect()
        }
    };
    let results: Vec<Option<(f64, Vec<f64>)>> = masks.par_iter().map(|m| solve_with_outage(inst, m)).collect();
    let (capacity, alloc) = best(results).ok_or(Error::InfeasibleDiscrete { p_av: inst.params.p_av })?;
    let outage_set = (0..n).filter(|&i| is_outage(&inst.params, inst.gains[i], alloc[i])).collect();
    Ok(OracleSolution {
        capacity,
        alloc,
        outage_set,
        mode,
    })
}

/// CSV audit dump: `bin,gain,mass,power,outage`.
pub fn write_1d_csv<W: Write>(inst: &DiscreteInstance, sol: &OracleSolution, out: &mut W) -> Result<()> {
    use crate::cli::fmt_num;
    writeln!(out, "bin,gain,mass,power,outage")?;
    for i in 0..inst.n_bins() {
        writeln!(
            out,
            "{i},{},{},{},{}",
            fmt_num(inst.gains[i]),
            fmt_num(inst.probs[i]),
            fmt_num(sol.alloc[i]),
            sol.outage_set.contains(&i) as u8
        )?;
    }
    Ok(())
}

/// Two users on a common gain axis. `grid[i * n + j]` is the mass of
/// `(h1, h2) = (axis[i], axis[j])`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDiscreteInstance {
    pub axis: Vec<f64>,
    pub grid: Vec<f64>,
    pub params: SystemParams,
}

impl JointDiscreteInstance {
    pub fn new(axis: Vec<f64>, grid: Vec<f64>, params: SystemParams) -> Result<Self> {
        params.validate()?;
        let n = axis.len();
        if !(2..=MAX_JOINT_BINS).contains(&n) {
            return Err(Error::invalid(format!("joint grid side must lie in [2, {MAX_JOINT_BINS}], got {n}")));
        }
        if grid.len() != n * n {
            return Err(Error::invalid("joint grid must be square over the axis"));
        }
        if axis[0] <= 0.0 || axis.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("axis must be positive and strictly increasing"));
        }
        if grid.iter().any(|m| m.is_nan() || *m < 0.0) {
            return Err(Error::invalid("masses must be nonnegative"));
        }
        let total: f64 = grid.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("masses sum to {total}, not 1")));
        }
        Ok(JointDiscreteInstance { axis, grid, params })
    }

    pub fn side(&self) -> usize {
        self.axis.len()
    }

    pub fn mass(&self, i: usize, j: usize) -> f64 {
        self.grid[i * self.side() + j]
    }

    /// Index of the weaker user's gain in cell `(i, j)`.
    pub fn level(i: usize, j: usize) -> usize {
        i.min(j)
    }

    /// Cells with `h1 <= h2` belong to the first subspace.
    pub fn in_first(i: usize, j: usize) -> bool {
        i <= j
    }

    /// The transposed instance (users swapped).
    pub fn transpose(&self) -> Self {
        let n = self.side();
        let grid = (0..n * n).map(|c| self.mass(c % n, c / n)).collect();
        JointDiscreteInstance {
            axis: self.axis.clone(),
            grid,
            params: self.params,
        }
    }
}

/// Joint grid for two independent users on a common axis. Bin edges are
/// equiprobable quantiles of the minimum of the two laws, axis values are the
/// conditional means of that minimum, and each cell carries the product of
/// the users' own bin masses.
pub fn discretize_joint(
    u1: &GainDistribution,
    u2: &GainDistribution,
    params: &SystemParams,
    n_bins: usize,
    mass_cut: f64,
    tol: &Tolerances,
) -> Result<JointDiscreteInstance> {
    check_bins(n_bins, mass_cut)?;
    if n_bins > MAX_JOINT_BINS {
        return Err(Error::invalid(format!("joint grid side must be at most {MAX_JOINT_BINS}, got {n_bins}")));
    }
    let min_law = MinGainDistribution::new(vec![u1.clone(), u2.clone()])?;
    let edges = equiprobable_edges(&min_law, n_bins, mass_cut);
    let axis = conditional_means(&min_law, &edges, tol)?;
    let bins = |u: &GainDistribution| -> Vec<f64> { edges.windows(2).map(|w| u.cdf(w[1]) - u.cdf(w[0])).collect() };
    let (p1, p2) = (bins(u1), bins(u2));
    let mut grid: Vec<f64> = p1.iter().flat_map(|a| p2.iter().map(move |b| a * b)).collect();
    let total: f64 = grid.iter().sum();
    grid.iter_mut().for_each(|m| *m /= total);
    JointDiscreteInstance::new(axis, grid, *params)
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointSolution {
    pub capacity: f64,
    /// Row-major like the instance grid.
    pub alloc: Vec<f64>,
    /// First-subspace outage cells are those with `i < k1`.
    pub k1: usize,
    /// Second-subspace outage cells are those with `j < k2`.
    pub k2: usize,
    pub eps1: f64,
    pub eps2: f64,
    /// `axis[k1]` and `axis[k2]`: lowest served gain in each subspace.
    pub h1_thresh: f64,
    pub h2_thresh: f64,
    /// Largest spread of allocations among cells sharing a minimum gain.
    pub same_min_deviation: f64,
    /// The same spread over levels outside `min(k1, k2)..max(k1, k2)`,
    /// where both subspaces agree on service or outage.
    pub off_band_deviation: f64,
    /// Probability of the levels inside that band.
    pub band_mass: f64,
    /// Largest allocation change between adjacent gain levels within either
    /// subspace: the allocation resolution of the grid.
    pub resolution_unit: f64,
    /// Projected subgradient ascent restricted to the winning outage set.
    pub subgradient_capacity: f64,
    /// Best capacity over all admissible cell subsets, on small grids only.
    pub enumeration_capacity: Option<f64>,
}

impl JointSolution {
    pub fn threshold_gap_bins(&self) -> usize {
        self.k1.abs_diff(self.k2)
    }
}

struct Cells {
    gains: Vec<f64>,
    masses: Vec<f64>,
}

fn cells(inst: &JointDiscreteInstance) -> Cells {
    let n = inst.side();
    let gains = (0..n * n)
        .map(|c| inst.axis[JointDiscreteInstance::level(c / n, c % n)])
        .collect();
    Cells {
        gains,
        masses: inst.grid.clone(),
    }
}

fn joint_solve(inst: &JointDiscreteInstance, cells: &Cells, outage: &[bool]) -> Option<(f64, Vec<f64>)> {
    let p = &inst.params;
    let floors: Vec<f64> = cells
        .gains
        .iter()
        .zip(outage)
        .map(|(&g, &out)| if out { 0.0 } else { inversion(p, g) })
        .collect();
    let alloc = water_fill_with_floors(&cells.gains, &cells.masses, &floors, p.p_av, p.sigma2)?;
    let cap = objective(p, cells, &alloc);
    Some((cap, alloc))
}

fn objective(p: &SystemParams, cells: &Cells, alloc: &[f64]) -> f64 {
    cells
        .gains
        .iter()
        .zip(&cells.masses)
        .zip(alloc)
        .map(|((&g, &m), &x)| m * rate(p, g, x))
        .sum()
}

fn threshold_mask(n: usize, k1: usize, k2: usize) -> Vec<bool> {
    (0..n * n)
        .map(|c| {
            let (i, j) = (c / n, c % n);
            if JointDiscreteInstance::in_first(i, j) {
                i < k1
            } else {
                j < k2
            }
        })
        .collect()
}

fn subspace_mass(inst: &JointDiscreteInstance, k: usize, first: bool) -> f64 {
    let n = inst.side();
    let mut m = 0.0;
    for i in 0..n {
        for j in 0..n {
            if JointDiscreteInstance::in_first(i, j) == first && (if first { i } else { j }) < k {
                m += inst.mass(i, j);
            }
        }
    }
    m
}

/// Projected subgradient ascent on a fixed outage set with step `c / sqrt(t)`.
/// The projection onto `{x >= floor, sum m x <= budget}` is exact in the
/// mass-weighted norm: every cell drops by a common amount, clamped at its
/// floor.
pub fn subgradient_ascent(
    inst: &JointDiscreteInstance,
    outage: &[bool],
    iterations: usize,
) -> Option<(f64, Vec<f64>)> {
    let p = &inst.params;
    let cells = cells(inst);
    let floors: Vec<f64> = cells
        .gains
        .iter()
        .zip(outage)
        .map(|(&g, &out)| if out { 0.0 } else { inversion(p, g) })
        .collect();
    let floor_power: f64 = cells.masses.iter().zip(&floors).map(|(m, f)| m * f).sum();
    let spare = p.p_av - floor_power;
    if spare < -1e-12 * p.p_av {
        return None;
    }
    let spare = spare.max(0.0);
    let mut order: Vec<usize> = (0..floors.len()).collect();
    let project = |x: &mut Vec<f64>, order: &mut Vec<usize>| {
        for (xi, f) in x.iter_mut().zip(&floors) {
            *xi = xi.max(*f);
        }
        let extra: f64 = cells.masses.iter().zip(x.iter()).zip(&floors).map(|((m, xi), f)| m * (xi - f)).sum();
        if extra <= spare {
            return;
        }
        // shift every cell down by a common tau, clamped at its floor
        let z: Vec<f64> = x.iter().zip(&floors).map(|(xi, f)| xi - f).collect();
        order.sort_by(|&a, &b| z[b].total_cmp(&z[a]));
        let (mut mass, mut first) = (0.0, 0.0);
        let mut tau = 0.0;
        for (k, &i) in order.iter().enumerate() {
            mass += cells.masses[i];
            first += cells.masses[i] * z[i];
            tau = (first - spare) / mass;
            let next = order.get(k + 1).map_or(f64::NEG_INFINITY, |&j| z[j]);
            if tau >= next {
                break;
            }
        }
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = floors[i] + (z[i] - tau).max(0.0);
        }
    };
    let mut x: Vec<f64> = floors.iter().map(|f| f + spare).collect();
    project(&mut x, &mut order);
    let step0 = p.p_av.max(1.0);
    let mut best_val = objective(p, &cells, &x);
    let mut best_x = x.clone();
    for t in 1..=iterations {
        let step = step0 / (t as f64).sqrt();
        for (xi, &g) in x.iter_mut().zip(&cells.gains) {
            // gradient of R(g x) per unit of cell mass
            *xi += step * g / (2.0 * std::f64::consts::LN_2 * (p.sigma2 + g * *xi));
        }
        project(&mut x, &mut order);
        let v = objective(p, &cells, &x);
        if v > best_val {
            best_val = v;
            best_x.clone_from(&x);
        }
    }
    Some((best_val, best_x))
}

/// Best capacity over every admissible subset of cells, by depth-first
/// search with mass pruning. Only for grids of at most
/// [`MAX_ENUMERATION_CELLS`] cells.
pub fn enumerate_joint(inst: &JointDiscreteInstance) -> Result<Option<f64>> {
    let cells = cells(inst);
    let n_cells = cells.gains.len();
    if n_cells > MAX_ENUMERATION_CELLS {
        return Err(Error::invalid(format!("enumeration is limited to {MAX_ENUMERATION_CELLS} cells")));
    }
    let eps = inst.params.eps;
    let mut sets: Vec<Vec<bool>> = Vec::new();
    let mut mask = vec![false; n_cells];
    fn dfs(idx: usize, mass: f64, eps: f64, masses: &[f64], mask: &mut Vec<bool>, out: &mut Vec<Vec<bool>>) {
        if idx == masses.len() {
            out.push(mask.clone());
            return;
        }
        dfs(idx + 1, mass, eps, masses, mask, out);
        if mass + masses[idx] <= eps + MASS_SLACK {
            mask[idx] = true;
            dfs(idx + 1, mass + masses[idx], eps, masses, mask, out);
            mask[idx] = false;
        }
    }
    dfs(0, 0.0, eps, &cells.masses, &mut mask, &mut sets);
    let results: Vec<Option<(f64, ())>> = sets
        .par_iter()
        .map(|m| joint_solve(inst, &cells, m).map(|(c, _)| (c, ())))
        .collect();
    Ok(best(results).map(|(c, _)| c))
}

/// Two-user oracle. Outage sets are searched over threshold pairs
/// `(k1, k2)`: first-subspace cells with `i < k1` and second-subspace cells
/// with `j < k2`, taking the largest admissible `k2` for each `k1`. Each
/// candidate is solved exactly through its KKT conditions; projected
/// subgradient ascent and, on tiny grids, subset enumeration are run as
/// cross-checks.
pub fn brute_force_2user(inst: &JointDiscreteInstance) -> Result<JointSolution> {
    let n = inst.side();
    let eps = inst.params.eps;
    let cells = cells(inst);
    let first: Vec<f64> = (0..=n).map(|k| subspace_mass(inst, k, true)).collect();
    let second: Vec<f64> = (0..=n).map(|k| subspace_mass(inst, k, false)).collect();
    let pairs: Vec<(usize, usize)> = (0..=n)
        .filter(|&k1| first[k1] <= eps + MASS_SLACK)
        .map(|k1| {
            let k2 = (0..=n).rev().find(|&k2| first[k1] + second[k2] <= eps + MASS_SLACK).unwrap_or(0);
            (k1, k2)
        })
        .collect();
    type Candidate = (f64, (usize, usize, Vec<f64>));
    let results: Vec<Option<Candidate>> = pairs
        .par_iter()
        .map(|&(k1, k2)| joint_solve(inst, &cells, &threshold_mask(n, k1, k2)).map(|(c, a)| (c, (k1, k2, a))))
        .collect();
    // among equal capacities prefer the most balanced split
    let mut ranked: Vec<Candidate> = results.into_iter().flatten().collect();
    ranked.sort_by(|a, b| {
        b.0.total_cmp(&a.0)
            .then(a.1 .0.abs_diff(a.1 .1).cmp(&b.1 .0.abs_diff(b.1 .1)))
            .then(a.1 .0.cmp(&b.1 .0))
    });
    let top = ranked.first().map(|r| r.0).ok_or(Error::InfeasibleDiscrete { p_av: inst.params.p_av })?;
    let (capacity, (k1, k2, alloc)) = ranked
        .into_iter()
        .filter(|r| r.0 >= top - 1e-13 * top.abs().max(1.0))
        .min_by_key(|r| (r.1 .0.abs_diff(r.1 .1), r.1 .0))
        .expect("nonempty");

    let mut level_min = vec![f64::INFINITY; n];
    let mut level_max = vec![f64::NEG_INFINITY; n];
    for (c, &x) in alloc.iter().enumerate() {
        let l = JointDiscreteInstance::level(c / n, c % n);
        level_min[l] = level_min[l].min(x);
        level_max[l] = level_max[l].max(x);
    }
    let spread = |l: usize| level_max[l] - level_min[l];
    let same_min_deviation = (0..n).map(spread).fold(0.0, f64::max);
    let band = k1.min(k2)..k1.max(k2);
    let off_band_deviation = (0..n).filter(|l| !band.contains(l)).map(spread).fold(0.0, f64::max);
    let band_mass: f64 = (0..n * n)
        .filter(|&c| band.contains(&JointDiscreteInstance::level(c / n, c % n)))
        .map(|c| cells.masses[c])
        .sum();
    // per-level profiles of each subspace: the diagonal cell (l, l) and the
    // cell (l + 1, l) just below it
    let first_profile: Vec<f64> = (0..n).map(|l| alloc[l * n + l]).collect();
    let second_profile: Vec<f64> = (0..n - 1).map(|l| alloc[(l + 1) * n + l]).collect();
    let max_jump = |v: &[f64]| v.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
    let resolution_unit = max_jump(&first_profile).max(max_jump(&second_profile));

    let winning = threshold_mask(n, k1, k2);
    let subgradient_capacity = subgradient_ascent(inst, &winning, SUBGRADIENT_ITERATIONS)
        .map(|r| r.0)
        .ok_or(crate::numerics::NumericsError::NonConvergence {
            iterations: 0,
            estimate: capacity,
        })?;
    let enumeration_capacity = if n * n <= MAX_ENUMERATION_CELLS {
        enumerate_joint(inst)?
    } else {
        None
    };
    let axis_at = |k: usize| inst.axis.get(k).copied().unwrap_or(f64::INFINITY);
    Ok(JointSolution {
        capacity,
        alloc,
        k1,
        k2,
        eps1: first[k1],
        eps2: second[k2],
        h1_thresh: axis_at(k1),
        h2_thresh: axis_at(k2),
        same_min_deviation,
        off_band_deviation,
        band_mass,
        resolution_unit,
        subgradient_capacity,
        enumeration_capacity,
    })
}

/// CSV audit dump: `i,j,h1,h2,mass,power,outage`.
pub fn write_joint_csv<W: Write>(inst: &JointDiscreteInstance, sol: &JointSolution, out: &mut W) -> Result<()> {
    use crate::cli::fmt_num;
    let n = inst.side();
    writeln!(out, "i,j,h1,h2,mass,power,outage")?;
    for i in 0..n {
        for j in 0..n {
            let x = sol.alloc[i * n + j];
            let g = inst.axis[JointDiscreteInstance::level(i, j)];
            writeln!(
                out,
                "{i},{j},{},{},{},{},{}",
                fmt_num(inst.axis[i]),
                fmt_num(inst.axis[j]),
                fmt_num(inst.mass(i, j)),
                fmt_num(x),
                is_outage(&inst.params, g, x) as u8
            )?;
        }
    }
    Ok(())
}
