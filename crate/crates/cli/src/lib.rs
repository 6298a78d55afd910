//! Random instances and the benchmark harness behind the `agesched bench` command.
//!
//! Deadlines are drawn i.i.d. uniform from `[d_min, d_max]` with ChaCha8, seeded per
//! instance by mixing the master seed with `(n, index)` through SplitMix64. Instances
//! therefore do not depend on how the work is scheduled across threads, and every
//! algorithm sees the same instances.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use agesched::{
    gd_parts, lower_bound, optimal_channels, schedule_from_chain, solve_chain, tga_until, verify,
    verify_composed, AoiConstraints, Error as CoreError, Rational,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("invalid benchmark configuration: {0}")]
    Config(String),
    #[error(
        "{algorithm} produced an infeasible schedule for n={n} idx={idx} (seed {seed}): {detail}"
    )]
    VerificationFailed {
        algorithm: Algorithm,
        n: usize,
        idx: usize,
        seed: u64,
        detail: String,
    },
    #[error("{algorithm} failed for n={n} idx={idx}: {source}")]
    Algorithm {
        algorithm: Algorithm,
        n: usize,
        idx: usize,
        source: CoreError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Lb,
    Gd,
    Aion,
    Tga,
    Oracle,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Lb,
        Algorithm::Gd,
        Algorithm::Aion,
        Algorithm::Tga,
        Algorithm::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Lb => "lb",
            Algorithm::Gd => "gd",
            Algorithm::Aion => "aion",
            Algorithm::Tga => "tga",
            Algorithm::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s.trim())
            .ok_or_else(|| {
                format!("unknown algorithm {s:?} (expected lb, gd, aion, tga or oracle)")
            })
    }
}

/// Comma-separated algorithm list, e.g. `"lb,gd,tga"`.
pub fn parse_algorithms(text: &str) -> Result<Vec<Algorithm>, String> {
    let mut out: Vec<Algorithm> = text
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect::<Result<_, _>>()?;
    out.sort();
    out.dedup();
    if out.is_empty() {
        return Err("no algorithms selected".into());
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct BenchmarkConfig {
    pub n_values: Vec<usize>,
    pub d_min: u64,
    pub d_max: u64,
    pub instances: usize,
    pub seed: u64,
    pub gamma: Rational,
    pub algorithms: Vec<Algorithm>,
    /// Per-instance limit on the TGA grouping search.
    pub time_budget: Option<Duration>,
    pub state_budget: u64,
}

impl BenchmarkConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.d_min < 2 || self.d_min > self.d_max {
            return Err(BenchError::Config(format!(
                "need 2 <= d_min <= d_max, got d_min={} d_max={}",
                self.d_min, self.d_max
            )));
        }
        if self.instances == 0 {
            return Err(BenchError::Config("instances must be at least 1".into()));
        }
        if self.n_values.is_empty() || self.n_values.contains(&0) {
            return Err(BenchError::Config("n values must be positive".into()));
        }
        Ok(())
    }

    fn runs(&self, a: Algorithm) -> bool {
        self.algorithms.contains(&a)
    }
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of instance `idx` at size `n`.
pub fn instance_seed(master: u64, n: usize, idx: usize) -> u64 {
    mix(mix(mix(master) ^ n as u64) ^ idx as u64)
}

pub fn generate_instance(
    n: usize,
    d_min: u64,
    d_max: u64,
    seed: u64,
) -> Result<AoiConstraints, BenchError> {
    if n == 0 || d_min == 0 || d_min > d_max {
        return Err(BenchError::Config(format!(
            "invalid instance parameters n={n} d_min={d_min} d_max={d_max}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d: Vec<u64> = (0..n).map(|_| rng.gen_range(d_min..=d_max)).collect();
    Ok(AoiConstraints::new(d).expect("positive deadlines"))
}

/// One algorithm's outcome on one instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cell {
    Channels(u64),
    Timeout,
    BudgetExceeded,
    Skipped,
}

impl Cell {
    pub fn channels(self) -> Option<u64> {
        match self {
            Cell::Channels(k) => Some(k),
            _ => None,
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Channels(k) => write!(f, "{k}"),
            Cell::Timeout => f.write_str("timeout"),
            Cell::BudgetExceeded => f.write_str("budget"),
            Cell::Skipped => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRecord {
    pub n: usize,
    pub idx: usize,
    pub seed: u64,
    pub lb: u64,
    pub gd: Cell,
    pub aion: Cell,
    pub tga: Cell,
    pub oracle: Cell,
    pub t_gd_ms: Option<f64>,
    pub t_aion_ms: Option<f64>,
    pub t_tga_ms: Option<f64>,
}

pub const CSV_HEADER: &str = "n,idx,seed,lb,gd,aion,tga,oracle,t_gd_ms,t_aion_ms,t_tga_ms";

fn ms(t: Option<f64>) -> String {
    t.map(|t| format!("{t:.3}")).unwrap_or_default()
}

impl BenchmarkRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.n,
            self.idx,
            self.seed,
            self.lb,
            self.gd,
            self.aion,
            self.tga,
            self.oracle,
            ms(self.t_gd_ms),
            ms(self.t_aion_ms),
            ms(self.t_tga_ms)
        )
    }

    pub fn cell(&self, a: Algorithm) -> Cell {
        match a {
            Algorithm::Lb => Cell::Channels(self.lb),
            Algorithm::Gd => self.gd,
            Algorithm::Aion => self.aion,
            Algorithm::Tga => self.tga,
            Algorithm::Oracle => self.oracle,
        }
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64() * 1e3)
}

/// Generates instance `(n, idx)`, runs the selected algorithms and verifies every
/// schedule before recording its channel count.
pub fn run_instance(
    cfg: &BenchmarkConfig,
    n: usize,
    idx: usize,
) -> Result<BenchmarkRecord, BenchError> {
    let seed = instance_seed(cfg.seed, n, idx);
    let d = generate_instance(n, cfg.d_min, cfg.d_max, seed)?;
    let fail = |algorithm, source| BenchError::Algorithm {
        algorithm,
        n,
        idx,
        source,
    };
    let infeasible = |algorithm, detail: String| BenchError::VerificationFailed {
        algorithm,
        n,
        idx,
        seed,
        detail,
    };
    let lb = lower_bound(&d).expect("non-empty instance");
    let mut rec = BenchmarkRecord {
        n,
        idx,
        seed,
        lb,
        gd: Cell::Skipped,
        aion: Cell::Skipped,
        tga: Cell::Skipped,
        oracle: Cell::Skipped,
        t_gd_ms: None,
        t_aion_ms: None,
        t_tga_ms: None,
    };

    if cfg.runs(Algorithm::Gd) {
        // One part per deadline value: the flat grid's lcm cycle is too large to build.
        let (s, t) = timed(|| gd_parts(&d));
        let s = s.map_err(|e| fail(Algorithm::Gd, e))?;
        let report = verify_composed(&s, &d);
        if !report.feasible {
            return Err(infeasible(
                Algorithm::Gd,
                format!("{:?}", report.violations),
            ));
        }
        rec.gd = Cell::Channels(s.num_channels() as u64);
        rec.t_gd_ms = Some(t);
    }
    if cfg.runs(Algorithm::Aion) {
        let (s, t) = timed(|| solve_chain(&d).and_then(|sol| schedule_from_chain(&sol)));
        let s = s.map_err(|e| fail(Algorithm::Aion, e))?;
        let report = verify(&s, &d);
        if !report.feasible {
            return Err(infeasible(
                Algorithm::Aion,
                format!("{:?}", report.violations),
            ));
        }
        rec.aion = Cell::Channels(s.num_channels() as u64);
        rec.t_aion_ms = Some(t);
    }
    if cfg.runs(Algorithm::Tga) {
        let deadline = cfg.time_budget.map(|b| Instant::now() + b);
        let (r, t) = timed(|| tga_until(&d, &cfg.gamma, deadline));
        rec.t_tga_ms = Some(t);
        match r {
            Ok(r) => {
                let report = verify_composed(&r.schedule, &d);
                if !report.feasible {
                    return Err(infeasible(
                        Algorithm::Tga,
                        format!("{:?}", report.violations),
                    ));
                }
                rec.tga = Cell::Channels(r.schedule.num_channels() as u64);
            }
            Err(CoreError::TimeBudgetExceeded) => rec.tga = Cell::Timeout,
            Err(e) => return Err(fail(Algorithm::Tga, e)),
        }
    }
    if cfg.runs(Algorithm::Oracle) {
        rec.oracle = match optimal_channels(&d, cfg.state_budget) {
            Ok(k) => Cell::Channels(k),
            Err(CoreError::StateBudgetExceeded { .. }) => Cell::BudgetExceeded,
            Err(e) => return Err(fail(Algorithm::Oracle, e)),
        };
    }
    Ok(rec)
}

/// Runs every instance, in parallel within each `n`, calling `emit` on the records of
/// each `n` in `(n, idx)` order as soon as that `n` is done.
pub fn run_benchmark(
    cfg: &BenchmarkConfig,
    mut emit: impl FnMut(&BenchmarkRecord),
) -> Result<Vec<BenchmarkRecord>, BenchError> {
    cfg.validate()?;
    let mut all = Vec::with_capacity(cfg.n_values.len() * cfg.instances);
    for &n in &cfg.n_values {
        let mut batch: Vec<BenchmarkRecord> = (0..cfg.instances)
            .into_par_iter()
            .map(|idx| run_instance(cfg, n, idx))
            .collect::<Result<_, _>>()?;
        batch.sort_by_key(|r| r.idx);
        for r in &batch {
            emit(r);
        }
        all.extend(batch);
    }
    Ok(all)
}

/// Means over the instances of one `n`. Algorithms with any missing value (skipped,
/// timed out) have no mean.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub n: usize,
    pub instances: usize,
    pub means: Vec<(Algorithm, Option<f64>)>,
}

impl SummaryRow {
    pub fn mean(&self, a: Algorithm) -> Option<f64> {
        self.means.iter().find(|m| m.0 == a).and_then(|m| m.1)
    }

    /// Mean channels above the lower bound.
    pub fn gap(&self, a: Algorithm) -> Option<f64> {
        Some(self.mean(a)? - self.mean(Algorithm::Lb)?)
    }
}

pub fn summarize(records: &[BenchmarkRecord]) -> Vec<SummaryRow> {
    let mut ns: Vec<usize> = records.iter().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    ns.into_iter()
        .map(|n| {
            let rows: Vec<&BenchmarkRecord> = records.iter().filter(|r| r.n == n).collect();
            let means = Algorithm::ALL
                .into_iter()
                .map(|a| {
                    let vals: Option<Vec<u64>> =
                        rows.iter().map(|r| r.cell(a).channels()).collect();
                    let mean = vals.map(|v| v.iter().sum::<u64>() as f64 / v.len() as f64);
                    (a, mean)
                })
                .collect();
            SummaryRow {
                n,
                instances: rows.len(),
                means,
            }
        })
        .collect()
}

/// Plain-text table of per-`n` means and gaps to the lower bound.
pub fn format_summary(rows: &[SummaryRow], algorithms: &[Algorithm]) -> String {
    let shown: Vec<Algorithm> = algorithms
        .iter()
        .copied()
        .filter(|&a| a != Algorithm::Lb)
        .collect();
    let mut out = format!("{:>6} {:>9} {:>9}", "n", "count", "lb");
    for a in &shown {
        out += &format!(" {:>9} {:>9}", a.name(), format!("{}-lb", a.name()));
    }
    out.push('\n');
    let cell = |v: Option<f64>| v.map(|v| format!("{v:.3}")).unwrap_or_else(|| "-".into());
    for r in rows {
        out += &format!(
            "{:>6} {:>9} {:>9}",
            r.n,
            r.instances,
            cell(r.mean(Algorithm::Lb))
        );
        for &a in &shown {
            out += &format!(" {:>9} {:>9}", cell(r.mean(a)), cell(r.gap(a)));
        }
        out.push('\n');
    }
    out
}

/// `lo:hi:step` (inclusive) or a single integer.
pub fn parse_n_spec(text: &str) -> Result<Vec<usize>, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let num = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| format!("invalid number {s:?} in --n {text:?}"))
    };
    match parts.as_slice() {
        [one] => Ok(vec![num(one)?]),
        [lo, hi, step] => {
            let (lo, hi, step) = (num(lo)?, num(hi)?, num(step)?);
            if step == 0 || lo > hi {
                return Err(format!("--n {text:?}: need lo <= hi and step > 0"));
            }
            Ok((lo..=hi).step_by(step).collect())
        }
        _ => Err(format!("--n {text:?}: expected N or lo:hi:step")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_are_distinct_and_stable() {
        assert_eq!(instance_seed(42, 10, 3), instance_seed(42, 10, 3));
        assert_ne!(instance_seed(42, 10, 3), instance_seed(42, 10, 4));
        assert_ne!(instance_seed(42, 10, 3), instance_seed(42, 11, 3));
        assert_ne!(instance_seed(42, 10, 3), instance_seed(43, 10, 3));
    }

    #[test]
    fn n_spec() {
        assert_eq!(parse_n_spec("10:50:20").unwrap(), vec![10, 30, 50]);
        assert_eq!(parse_n_spec("7").unwrap(), vec![7]);
        assert!(parse_n_spec("5:1:1").is_err());
        assert!(parse_n_spec("a").is_err());
    }

    #[test]
    fn algorithm_list() {
        assert_eq!(
            parse_algorithms("tga,lb,tga").unwrap(),
            vec![Algorithm::Lb, Algorithm::Tga]
        );
        assert!(parse_algorithms("fast").is_err());
    }
}
