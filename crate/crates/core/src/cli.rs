//! Command-line surface: scenario files, subcommands and CSV output.
//!
//! Scenario files are flat `key = value` lines. Top-level keys are `sigma2`,
//! `r0`, `eps`, `p_av` (linear) or `p_av_db`, and `label`. Each `[user]`
//! section adds one user with `law = exponential` and `mean = ...`, or
//! `law = tabulated` and `table = path` (relative to the scenario file).
//!
//! ```text
//! label = two users
//! sigma2 = 1
//! r0 = 0.5
//! eps = 0.01
//! p_av_db = 9
//!
//! [user]
//! law = exponential
//! mean = 1
//!
//! [user]
//! law = exponential
//! mean = 2
//! ```

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::baselines::{self, OUTAGE_CONVENTION};
use crate::error::{Error, Result};
use crate::fading::{exponential_gain, GainDistribution, MinGainDistribution, Tabulated};
use crate::montecarlo::{self, SimConfig};
use crate::numerics::Tolerances;
use crate::oracle;
use crate::policy::{self, SystemParams};

pub const TOL_ENV: &str = "OUTAGE_ALLOC_TOL";
pub const DEFAULT_SEED: u64 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

pub const SWEEP_HEADER: &str = "p_av_db,p_av_linear,c_service,c_ergodic,c_outage,p_min,feasible";
pub const SCALING_HEADER: &str = "n_users,p_min,ratio_to_single";
pub const SOLVE_HEADER: &str = "label,n_users,sigma2,r0,eps,p_av,h_thresh,p_min,feasible,lambda,capacity,outage_probability";

/// Gap between oracle and analytic capacity that still passes.
pub const ORACLE_PASS_GAP: f64 = 1e-3;

/// Formats like C's `%.12g`.
pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..12).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(p: f64) -> f64 {
    10.0 * p.log10()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub label: String,
    pub sigma2: f64,
    pub r0: f64,
    pub eps: f64,
    /// Linear units.
    pub p_av: Option<f64>,
    pub users: Vec<GainDistribution>,
}

impl Scenario {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config {
            path: path.display().to_string(),
            line: 0,
            msg: e.to_string(),
        })?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let origin = path.display().to_string();
        let base = path.parent().unwrap_or(Path::new("."));
        let err = |line: usize, msg: String| Error::Config {
            path: origin.clone(),
            line,
            msg,
        };

        #[derive(Default)]
        struct UserDraft {
            line: usize,
            law: Option<String>,
            mean: Option<f64>,
            table: Option<String>,
        }

        let mut label = String::new();
        let (mut sigma2, mut r0, mut eps) = (None, None, None);
        let mut p_av: Option<(f64, usize)> = None;
        let mut users: Vec<UserDraft> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') {
                if line != "[user]" {
                    return Err(err(line_no, format!("unknown section {line}")));
                }
                users.push(UserDraft {
                    line: line_no,
                    ..Default::default()
                });
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| err(line_no, format!("expected key = value, got {line:?}")))?;
            let number = || -> Result<f64> {
                value
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| err(line_no, format!("{key}: not a number: {value:?}")))
            };
            match users.last_mut() {
                Some(user) => match key {
                    "law" => user.law = Some(value.to_string()),
                    "mean" | "omega" => user.mean = Some(number()?),
                    "table" => user.table = Some(value.to_string()),
                    _ => return Err(err(line_no, format!("unknown user key {key:?}"))),
                },
                None => match key {
                    "label" => label = value.to_string(),
                    "sigma2" => sigma2 = Some((number()?, line_no)),
                    "r0" => r0 = Some((number()?, line_no)),
                    "eps" => eps = Some((number()?, line_no)),
                    "p_av" | "p_av_db" => {
                        if p_av.is_some() {
                            return Err(err(line_no, "p_av given twice".into()));
                        }
                        let v = number()?;
                        p_av = Some((if key == "p_av" { v } else { db_to_linear(v) }, line_no));
                    }
                    _ => return Err(err(line_no, format!("unknown key {key:?}"))),
                },
            }
        }

        let (sigma2, sigma2_line) = sigma2.unwrap_or((1.0, 0));
        let (r0, r0_line) = r0.ok_or_else(|| err(0, "missing key r0".into()))?;
        let (eps, eps_line) = eps.ok_or_else(|| err(0, "missing key eps".into()))?;
        let checks = [
            (sigma2 > 0.0, sigma2_line, "sigma2 must be positive"),
            (r0 >= 0.0, r0_line, "r0 must be nonnegative"),
            ((0.0..1.0).contains(&eps), eps_line, "eps must lie in [0, 1)"),
            (p_av.is_none_or(|p| p.0 >= 0.0), p_av.map_or(0, |p| p.1), "p_av must be nonnegative"),
        ];
        if let Some(&(_, line, msg)) = checks.iter().find(|c| !c.0) {
            return Err(err(line, msg.into()));
        }
        if users.is_empty() {
            return Err(err(0, "at least one [user] section is required".into()));
        }
        let users = users
            .into_iter()
            .map(|u| match u.law.as_deref() {
                Some("exponential") | Some("rayleigh") => {
                    let mean = u.mean.ok_or_else(|| err(u.line, "exponential user needs mean".into()))?;
                    exponential_gain(mean).map_err(|e| err(u.line, e.to_string()))
                }
                Some("tabulated") => {
                    let table = u.table.ok_or_else(|| err(u.line, "tabulated user needs table".into()))?;
                    let path = base.join(table);
                    Tabulated::from_path(&path)
                        .map(GainDistribution::Tabulated)
                        .map_err(|e| match e {
                            Error::Io(io) => err(u.line, format!("{}: {io}", path.display())),
                            other => other,
                        })
                }
                Some(other) => Err(err(u.line, format!("unknown law {other:?}"))),
                None => Err(err(u.line, "user section needs law".into())),
            })
            .collect::<Result<Vec<_>>>()?;

        Ok(Scenario {
            label,
            sigma2,
            r0,
            eps,
            p_av: p_av.map(|p| p.0),
            users,
        })
    }

    pub fn params(&self) -> Result<SystemParams> {
        let p_av = self
            .p_av
            .ok_or_else(|| Error::invalid("scenario needs p_av or p_av_db for this command"))?;
        SystemParams::new(self.sigma2, self.r0, self.eps, p_av)
    }

    /// Parameters with the budget left at zero, for commands that set it.
    pub fn base_params(&self) -> Result<SystemParams> {
        SystemParams::new(self.sigma2, self.r0, self.eps, self.p_av.unwrap_or(0.0))
    }

    pub fn min_gain(&self) -> Result<MinGainDistribution> {
        MinGainDistribution::new(self.users.clone())
    }
}

#[derive(Debug, Parser)]
#[command(name = "outage-alloc", version, about = "Power allocation under a service-outage constraint")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Scenario file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output CSV path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for every random draw.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Feasibility, water level, capacity and outage of the optimal policy.
    Solve {
        #[command(flatten)]
        common: Common,
    },
    /// Service, ergodic and outage capacity over a grid of budgets.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Budget grid in dB, `start:stop:points`.
        #[arg(long)]
        grid: String,
    },
    /// Minimum power against the number of iid exponential users.
    Scaling {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 64)]
        n_max: usize,
        /// Mean gain of every user.
        #[arg(long, default_value_t = 1.0)]
        omega: f64,
        /// Service rates, one CSV per value.
        #[arg(long, value_delimiter = ',')]
        r0_list: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1.0)]
        sigma2: f64,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
    },
    /// Block-fading simulation of the solved policy.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1_000_000)]
        blocks: u64,
        /// Per-block CSV dump.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Brute-force check on a discretized instance.
    Oracle {
        #[command(flatten)]
        common: Common,
        /// Bins of the one-dimensional minimum-gain check.
        #[arg(long, conflicts_with = "joint_grid")]
        bins: Option<usize>,
        /// Side of the two-user joint grid.
        #[arg(long)]
        joint_grid: Option<usize>,
        #[arg(long, default_value_t = 1e-9)]
        mass_cut: f64,
    },
}

/// Parses the `start:stop:points` grid into linear budgets.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Error::invalid(format!("grid must be start:stop:points, got {spec:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let stop: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let points: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if points == 0 || !start.is_finite() || !stop.is_finite() {
        return Err(bad());
    }
    if points == 1 {
        if start != stop {
            return Err(Error::invalid("a single-point grid needs start = stop"));
        }
        return Ok(vec![start]);
    }
    Ok((0..points)
        .map(|k| start + (stop - start) * k as f64 / (points - 1) as f64)
        .collect())
}

/// Tolerances from the environment override, or the defaults.
pub fn tolerances_from_env() -> Result<Tolerances> {
    match std::env::var(TOL_ENV) {
        Ok(s) => Ok(Tolerances::parse_override(&s)?),
        Err(_) => Ok(Tolerances::default()),
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InfeasiblePower { .. } | Error::InfeasibleDiscrete { .. } => EXIT_INFEASIBLE,
        Error::Numerics(_) => EXIT_NUMERICAL,
        Error::InvalidParam(_) | Error::EmptyList | Error::Config { .. } | Error::Io(_) => EXIT_USAGE,
    }
}

fn load(common: &Common) -> Result<Scenario> {
    let path = common
        .config
        .as_ref()
        .ok_or_else(|| Error::invalid("--config is required"))?;
    Scenario::from_path(path)
}

/// Writes to `--out` or stdout.
fn emit(out: &Option<PathBuf>, body: &str, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(p) => fs::write(p, body)?,
        None => stdout.write_all(body.as_bytes())?,
    }
    Ok(())
}

fn meta_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

fn tol_line(tol: &Tolerances) -> String {
    format!(
        "tolerances = quad rel {} abs {}, root rel {} abs {}\n",
        fmt_num(tol.quad.rel),
        fmt_num(tol.quad.abs),
        fmt_num(tol.root.rel),
        fmt_num(tol.root.abs)
    )
}

fn run_solve(common: &Common, tol: &Tolerances, stdout: &mut dyn Write) -> Result<()> {
    let sc = load(common)?;
    let params = sc.params()?;
    let d = sc.min_gain()?;
    let pol = policy::solve(&d, &params, tol)?;
    let cap = pol.expected_capacity()?;
    let outage = pol.outage_probability();
    writeln!(stdout, "scenario            {}", sc.label)?;
    writeln!(stdout, "users               {}", d.n_users())?;
    writeln!(stdout, "p_av                {} ({} dB)", fmt_num(params.p_av), fmt_num(linear_to_db(params.p_av)))?;
    writeln!(stdout, "h_thresh            {}", fmt_num(pol.h_thresh))?;
    writeln!(stdout, "p_min               {} ({} dB)", fmt_num(pol.p_min), fmt_num(linear_to_db(pol.p_min)))?;
    writeln!(stdout, "feasible            true")?;
    writeln!(stdout, "lambda              {}", fmt_num(pol.lambda))?;
    writeln!(stdout, "capacity            {}", fmt_num(cap))?;
    writeln!(stdout, "excess over r0      {}", fmt_num(cap - params.r0))?;
    writeln!(stdout, "outage probability  {}", fmt_num(outage))?;
    if let Some(out) = &common.out {
        let row = [
            sc.label.replace(',', " "),
            d.n_users().to_string(),
            fmt_num(params.sigma2),
            fmt_num(params.r0),
            fmt_num(params.eps),
            fmt_num(params.p_av),
            fmt_num(pol.h_thresh),
            fmt_num(pol.p_min),
            "true".into(),
            fmt_num(pol.lambda),
            fmt_num(cap),
            fmt_num(outage),
        ]
        .join(",");
        fs::write(out, format!("{SOLVE_HEADER}\n{row}\n"))?;
    }
    Ok(())
}

/// Sweep CSV body for one scenario.
pub fn sweep_csv(d: &MinGainDistribution, params: &SystemParams, grid_db: &[f64], tol: &Tolerances) -> Result<String> {
    let p_min = policy::min_power(d, params, tol)?;
    let linear: Vec<f64> = grid_db.iter().map(|&db| db_to_linear(db)).collect();
    let pts = baselines::sweep(d, params, &linear, tol)?;
    let mut body = format!("{SWEEP_HEADER}\n");
    for (db, pt) in grid_db.iter().zip(&pts) {
        body.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt_num(*db),
            fmt_num(pt.p_av),
            pt.c_service.map(fmt_num).unwrap_or_default(),
            fmt_num(pt.c_ergodic),
            fmt_num(pt.c_outage),
            fmt_num(p_min),
            pt.c_service.is_some()
        ));
    }
    Ok(body)
}

fn run_sweep(common: &Common, grid: &str, tol: &Tolerances, stdout: &mut dyn Write) -> Result<()> {
    let sc = load(common)?;
    let grid_db = parse_grid(grid)?;
    let params = sc.base_params()?;
    let body = sweep_csv(&sc.min_gain()?, &params, &grid_db, tol)?;
    emit(&common.out, &body, stdout)?;
    if let Some(out) = &common.out {
        let meta = format!(
            "scenario = {}\nsigma2 = {}\nr0 = {}\neps = {}\ngrid_db = {grid}\nc_outage: {OUTAGE_CONVENTION}\nc_service: empty where p_av < p_min\n{}",
            sc.label,
            fmt_num(params.sigma2),
            fmt_num(params.r0),
            fmt_num(params.eps),
            tol_line(tol)
        );
        fs::write(meta_path(out), meta)?;
    }
    Ok(())
}

/// Scaling CSV body.
pub fn scaling_csv(omega: f64, params: &SystemParams, n_max: usize, tol: &Tolerances) -> Result<String> {
    let n_list: Vec<usize> = (1..=n_max).collect();
    let rows = montecarlo::scaling_experiment(omega, params, &n_list, tol)?;
    let single = rows[0].1;
    let mut body = format!("{SCALING_HEADER}\n");
    for (n, p) in rows {
        body.push_str(&format!("{n},{},{}\n", fmt_num(p), fmt_num(p / single)));
    }
    Ok(body)
}

/// `<stem>_r0_<value>.<ext>` next to `out`.
pub fn per_rate_path(out: &Path, r0: f64) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match out.extension() {
        Some(ext) => format!("{stem}_r0_{}.{}", fmt_num(r0), ext.to_string_lossy()),
        None => format!("{stem}_r0_{}", fmt_num(r0)),
    };
    out.with_file_name(name)
}

#[allow(clippy::too_many_arguments)]
fn run_scaling(
    common: &Common,
    n_max: usize,
    omega: f64,
    r0_list: &Option<Vec<f64>>,
    sigma2: f64,
    eps: f64,
    tol: &Tolerances,
    stdout: &mut dyn Write,
) -> Result<()> {
    if n_max == 0 {
        return Err(Error::invalid("--n-max must be at least 1"));
    }
    let base = match &common.config {
        Some(_) => load(common)?.base_params()?,
        None => SystemParams::new(sigma2, 0.5, eps, 0.0)?,
    };
    let rates = r0_list.clone().unwrap_or_else(|| vec![base.r0]);
    if rates.is_empty() {
        return Err(Error::invalid("--r0-list is empty"));
    }
    if rates.len() > 1 && common.out.is_none() {
        return Err(Error::invalid("several service rates need --out"));
    }
    for &r0 in &rates {
        let params = SystemParams { r0, ..base };
        params.validate()?;
        let body = scaling_csv(omega, &params, n_max, tol)?;
        match &common.out {
            Some(out) if rates.len() > 1 => fs::write(per_rate_path(out, r0), body)?,
            out => emit(out, &body, stdout)?,
        }
    }
    Ok(())
}

fn run_simulate(
    common: &Common,
    blocks: u64,
    trace: &Option<PathBuf>,
    tol: &Tolerances,
    stdout: &mut dyn Write,
) -> Result<()> {
    let sc = load(common)?;
    let params = sc.params()?;
    let d = sc.min_gain()?;
    let pol = policy::solve(&d, &params, tol)?;
    let cfg = SimConfig::new(blocks, common.seed);
    let st = montecarlo::simulate(&pol, &sc.users, &cfg)?;
    let cap = pol.expected_capacity()?;
    let outage = pol.outage_probability();
    let check = |ok: bool| if ok { "ok" } else { "DISAGREE" };
    let rate_ok = (st.mean_rate - cap).abs() <= 3.0 * st.se_rate;
    let power_ok = (st.mean_power - params.p_av).abs() <= 3.0 * st.se_power;
    let outage_ok = st.outage_rate <= params.eps + 3.0 * st.se_outage;
    writeln!(stdout, "scenario  {}", sc.label)?;
    writeln!(stdout, "blocks    {}  seed {}", st.n_blocks, common.seed)?;
    writeln!(stdout, "quantity      empirical       std.err         analytic")?;
    writeln!(
        stdout,
        "outage        {:<15} {:<15} {:<15} {} (budget {})",
        fmt_num(st.outage_rate),
        fmt_num(st.se_outage),
        fmt_num(outage),
        check(outage_ok),
        fmt_num(params.eps)
    )?;
    writeln!(
        stdout,
        "power         {:<15} {:<15} {:<15} {}",
        fmt_num(st.mean_power),
        fmt_num(st.se_power),
        fmt_num(params.p_av),
        check(power_ok)
    )?;
    writeln!(
        stdout,
        "rate          {:<15} {:<15} {:<15} {}",
        fmt_num(st.mean_rate),
        fmt_num(st.se_rate),
        fmt_num(cap),
        check(rate_ok)
    )?;
    if let Some(out) = &common.out {
        let body = format!(
            "n_blocks,seed,outage_rate,se_outage,mean_power,se_power,mean_rate,se_rate,analytic_outage,analytic_capacity\n{},{},{},{},{},{},{},{},{},{}\n",
            st.n_blocks,
            common.seed,
            fmt_num(st.outage_rate),
            fmt_num(st.se_outage),
            fmt_num(st.mean_power),
            fmt_num(st.se_power),
            fmt_num(st.mean_rate),
            fmt_num(st.se_rate),
            fmt_num(outage),
            fmt_num(cap)
        );
        fs::write(out, body)?;
    }
    if let Some(path) = trace {
        let mut f = std::io::BufWriter::new(fs::File::create(path)?);
        montecarlo::write_trace(&pol, &sc.users, &cfg, &mut f)?;
        f.flush()?;
    }
    Ok(())
}

fn run_oracle(
    common: &Common,
    bins: Option<usize>,
    joint_grid: Option<usize>,
    mass_cut: f64,
    tol: &Tolerances,
    stdout: &mut dyn Write,
) -> Result<()> {
    let sc = load(common)?;
    let params = sc.params()?;
    match (bins, joint_grid) {
        (Some(n), None) => {
            let d = sc.min_gain()?;
            let analytic = policy::solve(&d, &params, tol)?.expected_capacity()?;
            let inst = oracle::discretize(&d, &params, n, mass_cut, tol)?;
            let sol = oracle::brute_force_1d(&inst)?;
            let gap = (sol.capacity - analytic).abs();
            let mode = match sol.mode {
                oracle::SearchMode::Exhaustive => "exhaustive",
                oracle::SearchMode::Threshold => "threshold",
            };
            writeln!(stdout, "bins               {n} ({mode})")?;
            writeln!(stdout, "analytic capacity  {}", fmt_num(analytic))?;
            writeln!(stdout, "oracle capacity    {}", fmt_num(sol.capacity))?;
            writeln!(stdout, "absolute gap       {}", fmt_num(gap))?;
            let lost: f64 = sol.outage_set.iter().map(|&i| inst.probs[i]).sum();
            writeln!(stdout, "oracle outage mass {}", fmt_num(lost))?;
            writeln!(
                stdout,
                "{} (gap <= {})",
                if gap <= ORACLE_PASS_GAP { "PASS" } else { "FAIL" },
                fmt_num(ORACLE_PASS_GAP)
            )?;
            if let Some(out) = &common.out {
                let mut f = std::io::BufWriter::new(fs::File::create(out)?);
                oracle::write_1d_csv(&inst, &sol, &mut f)?;
                f.flush()?;
            }
        }
        (None, Some(n)) => {
            if sc.users.len() != 2 {
                return Err(Error::invalid("the joint-grid check needs exactly two users"));
            }
            let inst = oracle::discretize_joint(&sc.users[0], &sc.users[1], &params, n, mass_cut.max(1e-6), tol)?;
            let sol = oracle::brute_force_2user(&inst)?;
            writeln!(stdout, "joint grid              {n} x {n}")?;
            writeln!(stdout, "oracle capacity         {}", fmt_num(sol.capacity))?;
            writeln!(stdout, "subgradient capacity    {} ({} iterations)", fmt_num(sol.subgradient_capacity), oracle::SUBGRADIENT_ITERATIONS)?;
            if let Some(all) = sol.enumeration_capacity {
                writeln!(stdout, "enumeration capacity    {}", fmt_num(all))?;
            }
            writeln!(stdout, "split eps1, eps2        {}, {}", fmt_num(sol.eps1), fmt_num(sol.eps2))?;
            writeln!(stdout, "thresholds h1, h2       {}, {} (bins {}, {})", fmt_num(sol.h1_thresh), fmt_num(sol.h2_thresh), sol.k1, sol.k2)?;
            let equal = sol.threshold_gap_bins() <= 1;
            writeln!(stdout, "equal thresholds        {} (bin gap {})", if equal { "PASS" } else { "FAIL" }, sol.threshold_gap_bins())?;
            let same = sol.same_min_deviation <= 2.0 * sol.resolution_unit;
            writeln!(
                stdout,
                "min-gain sufficiency    {} (deviation {}, resolution unit {})",
                if same { "PASS" } else { "FAIL" },
                fmt_num(sol.same_min_deviation),
                fmt_num(sol.resolution_unit)
            )?;
            writeln!(
                stdout,
                "outside threshold band  deviation {}, band probability {}",
                fmt_num(sol.off_band_deviation),
                fmt_num(sol.band_mass)
            )?;
            if let Some(out) = &common.out {
                let mut f = std::io::BufWriter::new(fs::File::create(out)?);
                oracle::write_joint_csv(&inst, &sol, &mut f)?;
                f.flush()?;
            }
        }
        _ => return Err(Error::invalid("oracle needs exactly one of --bins or --joint-grid")),
    }
    Ok(())
}

pub fn execute(cli: &Cli, tol: &Tolerances, stdout: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Solve { common } => run_solve(common, tol, stdout),
        Command::Sweep { common, grid } => run_sweep(common, grid, tol, stdout),
        Command::Scaling {
            common,
            n_max,
            omega,
            r0_list,
            sigma2,
            eps,
        } => run_scaling(common, *n_max, *omega, r0_list, *sigma2, *eps, tol, stdout),
        Command::Simulate { common, blocks, trace } => run_simulate(common, *blocks, trace, tol, stdout),
        Command::Oracle {
            common,
            bins,
            joint_grid,
            mass_cut,
        } => run_oracle(common, *bins, *joint_grid, *mass_cut, tol, stdout),
    }
}

/// Entry point shared by the binary and the tests. Returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    let tol = match tolerances_from_env() {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(stderr, "error: {TOL_ENV}: {e}");
            return EXIT_USAGE;
        }
    };
    match execute(&cli, &tol, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}
