//! Command-line sweeps over the postselection scenarios.
//!
//! Grids are comma lists or inclusive `start:stop:step` ranges. Every sweep
//! point is independent; points are evaluated in parallel and written in grid
//! order, so identical invocations give byte-identical CSV.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rayon::prelude::*;

use postselect::scenarios::{self, ComparisonResult, NlssResult, TwoPhotonResult};
use postselect::DenominatorSign;

pub const COMPARE_HEADER: &str = "alpha,eta,gain,p_max,pr00_povm,pr00_closed,f_c,f_uhlmann,p_zero,chi_raw,chi_att,chi_ampatt";
pub const TWO_PHOTON_HEADER: &str = "t_abs,p20,p10,p00,f_c_formula,f_c_sim";
pub const NLSS_HEADER: &str = "k,success_prob,p_max,k4,k4_ratio";

const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    /// Bad flags, config entries or parameter ranges.
    Usage(String),
    /// A truncation or convention guard tripped while evaluating.
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Numerical(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<postselect::Error> for CliError {
    fn from(e: postselect::Error) -> Self {
        if e.is_numerical_guard() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "postselect", version, about = "Correct output fidelity sweeps for postselecting optical devices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Coherent-state comparison behind a preamplified lossy detector.
    Compare(CompareFlags),
    /// Two-photon generator on a lossy splitter with |t| = |r|.
    TwoPhoton(TwoPhotonFlags),
    /// Nonlinear sign-shift gate with uniformly lossy splitters.
    Nlss(NlssFlags),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonFlags {
    /// Truncation dimension per mode.
    #[arg(long)]
    pub dim: Option<String>,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// key=value file supplying defaults for any flag.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CompareFlags {
    /// Coherent amplitude grid.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    /// Detector efficiency grid, each in (0, 1].
    #[arg(long)]
    pub eta: Option<String>,
    /// Amplifier gain grid, each >= 1.
    #[arg(long)]
    pub gain: Option<String>,
    /// Denominator sign of the closed-form comparison column.
    #[arg(long, value_parser = ["plus", "minus"])]
    pub denominator_sign: Option<String>,
    #[command(flatten)]
    pub common: CommonFlags,
}

#[derive(Debug, Clone, Default, Args)]
pub struct TwoPhotonFlags {
    /// |t| = |r| grid.
    #[arg(long)]
    pub t: Option<String>,
    #[command(flatten)]
    pub common: CommonFlags,
}

#[derive(Debug, Clone, Default, Args)]
pub struct NlssFlags {
    /// Uniform splitter loss factor K grid, each in (0, 1].
    #[arg(long)]
    pub k: Option<String>,
    #[command(flatten)]
    pub common: CommonFlags,
}

/// Parses a comma list and/or inclusive `start:stop:step` ranges.
pub fn parse_grid(flag: &str, text: &str) -> Result<Vec<f64>> {
    let bad = |why: String| CliError::Usage(format!("--{flag}: {why}"));
    let number = |s: &str| -> Result<f64> {
        let v: f64 = s.trim().parse().map_err(|_| bad(format!("cannot parse {s:?} as a number")))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(bad(format!("{s:?} is not finite")))
        }
    };
    let mut values = Vec::new();
    for item in text.split(',') {
        let parts: Vec<&str> = item.split(':').collect();
        match parts.as_slice() {
            [single] => values.push(number(single)?),
            [start, stop, step] => {
                let (start, stop, step) = (number(start)?, number(stop)?, number(step)?);
                if !(step > 0.0) || stop < start {
                    return Err(bad(format!("range {item:?} needs start <= stop and a positive step")));
                }
                let count = ((stop - start) / step + 1e-9).floor() as usize;
                if count > 1_000_000 {
                    return Err(bad(format!("range {item:?} has too many points")));
                }
                // snap to 12 significant digits so 1 + 3*0.1 prints as 1.3
                values.extend((0..=count).map(|i| round_significant(start + i as f64 * step)));
            }
            _ => return Err(bad(format!("{item:?} is neither a number nor start:stop:step"))),
        }
    }
    if values.is_empty() {
        return Err(bad("empty grid".into()));
    }
    Ok(values)
}

fn round_significant(x: f64) -> f64 {
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

/// `%.12g`: 12 significant digits, trailing zeros dropped, scientific
/// notation outside `[1e-4, 1e12)`.
pub fn format_value(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exponent) = sci.split_once('e').expect("exponent present");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    if exponent < -4 || exponent >= SIGNIFICANT_DIGITS as i32 {
        let mantissa = trim_zeros(mantissa);
        let sign = if exponent < 0 { '-' } else { '+' };
        return format!("{mantissa}e{sign}{:02}", exponent.abs());
    }
    let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exponent).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Reads `key = value` lines; `#` starts a comment. Keys use the flag
/// spelling with either `-` or `_`.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Usage(format!("config line {}: expected key=value", lineno + 1)));
        };
        out.insert(key.trim().replace('_', "-"), value.trim().to_string());
    }
    Ok(out)
}

struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    fn load(scenario: &str, config: Option<&PathBuf>, flags: &[(&str, &Option<String>)]) -> Result<Self> {
        let mut values = match config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Usage(format!("--config: cannot read {}: {e}", path.display())))?;
                parse_config(&text)?
            }
            None => BTreeMap::new(),
        };
        if let Some(s) = values.remove("scenario") {
            if s != scenario {
                return Err(CliError::Usage(format!("config is for scenario {s:?}, not {scenario:?}")));
            }
        }
        for (name, value) in flags {
            if let Some(v) = value {
                values.insert(name.to_string(), v.clone());
            }
        }
        Ok(Settings { values })
    }

    fn grid(&self, name: &str, default: Option<&str>) -> Result<Vec<f64>> {
        match self.values.get(name).map(String::as_str).or(default) {
            Some(text) => parse_grid(name, text),
            None => Err(CliError::Usage(format!("the --{name} grid is required"))),
        }
    }

    fn dim(&self, default: usize) -> Result<usize> {
        let Some(text) = self.values.get("dim") else {
            return Ok(default);
        };
        let dim: usize = text
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("--dim: cannot parse {text:?} as a positive integer")))?;
        if dim < 4 {
            return Err(CliError::Usage(format!("--dim: {dim} is below the minimum of 4")));
        }
        Ok(dim)
    }

    fn out(&self, flag: &Option<PathBuf>) -> Option<PathBuf> {
        flag.clone().or_else(|| self.values.get("out").map(PathBuf::from))
    }
}

fn check_each(flag: &str, values: &[f64], ok: impl Fn(f64) -> bool, what: &str) -> Result<()> {
    match values.iter().find(|&&v| !ok(v)) {
        Some(v) => Err(CliError::Usage(format!("--{flag}: {v} is outside {what}"))),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparePlan {
    pub alpha: Vec<f64>,
    pub eta: Vec<f64>,
    pub gain: Vec<f64>,
    pub dim: usize,
    pub sign: DenominatorSign,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoPhotonPlan {
    pub t: Vec<f64>,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NlssPlan {
    pub k: Vec<f64>,
    pub dim: usize,
}

/// A fully resolved invocation.
#[derive(Debug, Clone, PartialEq)]
pub enum Job {
    Compare(ComparePlan),
    TwoPhoton(TwoPhotonPlan),
    Nlss(NlssPlan),
}

/// Merges config file and flags and validates every grid.
pub fn resolve(command: &Command) -> Result<(Job, Option<PathBuf>)> {
    match command {
        Command::Compare(f) => {
            let s = Settings::load(
                "compare",
                f.common.config.as_ref(),
                &[
                    ("alpha", &f.alpha),
                    ("eta", &f.eta),
                    ("gain", &f.gain),
                    ("dim", &f.common.dim),
                    ("denominator-sign", &f.denominator_sign),
                ],
            )?;
            let plan = ComparePlan {
                alpha: s.grid("alpha", None)?,
                eta: s.grid("eta", Some("1"))?,
                gain: s.grid("gain", Some("1"))?,
                dim: s.dim(scenarios::COMPARISON_DIM)?,
                sign: match s.values.get("denominator-sign") {
                    Some(v) => v.parse().map_err(|e| CliError::Usage(format!("--denominator-sign: {e}")))?,
                    None => DenominatorSign::Plus,
                },
            };
            check_each("alpha", &plan.alpha, |a| a >= 0.0, "[0, inf)")?;
            check_each("eta", &plan.eta, |e| e > 0.0 && e <= 1.0, "(0, 1]")?;
            check_each("gain", &plan.gain, |g| g >= 1.0, "[1, inf)")?;
            Ok((Job::Compare(plan), s.out(&f.common.out)))
        }
        Command::TwoPhoton(f) => {
            let s = Settings::load("two-photon", f.common.config.as_ref(), &[("t", &f.t), ("dim", &f.common.dim)])?;
            let plan = TwoPhotonPlan {
                t: s.grid("t", None)?,
                dim: s.dim(4)?,
            };
            check_each("t", &plan.t, |t| t > 0.0 && 2.0 * t * t <= 1.0 + 1e-12, "(0, 1/sqrt(2)] (|t|^2 + |r|^2 <= 1)")?;
            Ok((Job::TwoPhoton(plan), s.out(&f.common.out)))
        }
        Command::Nlss(f) => {
            let s = Settings::load("nlss", f.common.config.as_ref(), &[("k", &f.k), ("dim", &f.common.dim)])?;
            let plan = NlssPlan {
                k: s.grid("k", None)?,
                dim: s.dim(scenarios::NS_DIM)?,
            };
            check_each("k", &plan.k, |k| k > 0.0 && k <= 1.0, "(0, 1]")?;
            Ok((Job::Nlss(plan), s.out(&f.common.out)))
        }
    }
}

fn csv(header: &str, rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(format_value).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn compare_results(plan: &ComparePlan) -> Result<Vec<ComparisonResult>> {
    let mut points = Vec::new();
    for &a in &plan.alpha {
        for &e in &plan.eta {
            for &g in &plan.gain {
                points.push((a, e, g));
            }
        }
    }
    points
        .par_iter()
        .map(|&(a, e, g)| Ok(scenarios::coherent_comparison(a, e, g, plan.dim, plan.sign)?))
        .collect()
}

pub fn compare_row(r: &ComparisonResult) -> Vec<f64> {
    vec![
        r.alpha,
        r.eta,
        r.gain,
        r.p_max,
        r.pr00_povm,
        r.pr00_closed,
        r.f_c,
        r.f_uhlmann,
        r.p_zero_counts,
        r.chi_unprocessed,
        r.chi_attenuated,
        r.chi_amp_att,
    ]
}

/// `|t| = |r| = x` with real `t` and imaginary `r`.
pub fn two_photon_results(plan: &TwoPhotonPlan) -> Result<Vec<TwoPhotonResult>> {
    plan.t
        .par_iter()
        .map(|&x| Ok(scenarios::two_photon_generator(Complex64::new(x, 0.0), Complex64::new(0.0, x), plan.dim)?))
        .collect()
}

pub fn two_photon_row(r: &TwoPhotonResult) -> Vec<f64> {
    vec![r.t.norm(), r.p20, r.p10, r.p00, r.f_c_formula, r.f_c_simulated]
}

/// Equal-weight input `(|0⟩ + |1⟩ + |2⟩)/√3`.
pub fn nlss_results(plan: &NlssPlan) -> Result<Vec<NlssResult>> {
    let s = Complex64::new(1.0 / 3f64.sqrt(), 0.0);
    plan.k
        .par_iter()
        .map(|&k| Ok(scenarios::nlss_gate(k, [s; 3], plan.dim)?))
        .collect()
}

pub fn nlss_row(r: &NlssResult) -> Vec<f64> {
    let k4 = r.k_loss.powi(4);
    vec![r.k_loss, r.success_prob, r.p_max, k4, r.k4_ratio]
}

/// Evaluates a job and renders its CSV.
pub fn render(job: &Job) -> Result<String> {
    Ok(match job {
        Job::Compare(plan) => csv(COMPARE_HEADER, compare_results(plan)?.iter().map(compare_row)),
        Job::TwoPhoton(plan) => csv(TWO_PHOTON_HEADER, two_photon_results(plan)?.iter().map(two_photon_row)),
        Job::Nlss(plan) => csv(NLSS_HEADER, nlss_results(plan)?.iter().map(nlss_row)),
    })
}
