//! Subcommand orchestration, report writing and exit codes.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;

use crate::bounds::{self, BoundReport, C_GAMMA, C_MAIN, X_FINAL_CEILING};
use crate::cache::{Cache, ALGORITHM_VERSION};
use crate::char_sums::{char_tables, Kind};
use crate::error::Error;
use crate::field::PrimeModulus;
use crate::partial_sums::{reduce_records, scan_records, ConstantReport, PartialSumRecord, ScanPlan};
use crate::sieve::{self, SieveSummary, Status, Verdict};
use crate::units::{self, SweepRow, MAX_TAIL};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Constants,
    Bounds,
    Units,
    Sieve,
    Csum,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    Csv,
    #[default]
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    /// Exclusive bound M on the primes of a constant scan.
    pub max_prime: u64,
    /// Residue classes mod 9.
    pub classes: Vec<u64>,
    pub threads: usize,
    pub ell_max: u64,
    pub x_bound: f64,
    pub out: PathBuf,
    pub cache: Option<PathBuf>,
    pub format: Format,
    /// Prime for `csum`.
    pub prime: Option<u64>,
}

impl RunConfig {
    pub fn new(command: Command, out: impl Into<PathBuf>) -> Self {
        RunConfig {
            command,
            max_prime: 10_000,
            classes: vec![2, 5],
            threads: default_threads(),
            ell_max: sieve::DEFAULT_ELL_MAX,
            x_bound: sieve::DEFAULT_X_BOUND,
            out: out.into(),
            cache: None,
            format: Format::Json,
            prime: None,
        }
    }

    pub fn validate(&self) -> Result<(), RunError> {
        let bad = |msg: String| Err(RunError::Config(msg));
        if self.threads == 0 {
            return bad("worker count must be at least 1".into());
        }
        if self.max_prime < 11 {
            return bad(format!("--max-prime {} must be at least 11", self.max_prime));
        }
        if !(self.x_bound > 0.0) {
            return bad(format!("--x-bound {} must be positive", self.x_bound));
        }
        if self.classes.is_empty() || self.classes.iter().any(|&c| c >= 9) {
            return bad("--classes must be residues mod 9".into());
        }
        Ok(())
    }
}

pub fn default_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[derive(Debug)]
pub enum RunError {
    /// A published statement failed to reproduce.
    Assertion { statement: String, detail: String },
    Io(String),
    Config(String),
    Compute(Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Io(_) => 3,
            _ => 2,
        }
    }

    fn assertion(statement: &str, detail: impl Into<String>) -> Self {
        RunError::Assertion {
            statement: statement.to_string(),
            detail: detail.into(),
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Assertion { statement, detail } => write!(f, "assertion failed [{statement}]: {detail}"),
            RunError::Io(e) => write!(f, "I/O error: {e}"),
            RunError::Config(e) => write!(f, "invalid configuration: {e}"),
            RunError::Compute(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(s) => RunError::Io(s),
            other => RunError::Compute(other),
        }
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e.to_string())
    }
}

impl From<csv::Error> for RunError {
    fn from(e: csv::Error) -> Self {
        RunError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for RunError {
    fn from(e: serde_json::Error) -> Self {
        RunError::Io(e.to_string())
    }
}

/// Conventions every report depends on.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub algorithm_version: &'static str,
    pub epsilon: &'static str,
    pub gamma_coset: &'static str,
    pub kernel: &'static str,
    pub truncation: String,
    pub constants: String,
}

impl Provenance {
    fn new(cfg: &RunConfig) -> Self {
        Provenance {
            algorithm_version: ALGORITHM_VERSION,
            epsilon: "least positive quadratic non-residue mod p",
            gamma_coset: "coset of (1 + b sqrt(eps)) for the least b with 1 + b sqrt(eps) not a cube",
            kernel: "c(m) = sum_{b in F(1)} e(mb/p); c(0) = (p-2)/3, c_gamma(0) = (p+1)/3",
            truncation: format!("q-series N = ceil(40 p / |log|q||), tail <= {MAX_TAIL:e}"),
            constants: format!(
                "C = {C_MAIN}, C_gamma = {C_GAMMA}, x_bound = {}, ell_max = {}, M = {}, classes mod 9 = {:?}",
                cfg.x_bound, cfg.ell_max, cfg.max_prime, cfg.classes
            ),
        }
    }

    fn csv_header(&self) -> String {
        format!(
            "# algorithm_version: {}\n# epsilon: {}\n# gamma_coset: {}\n# kernel: {}\n# truncation: {}\n# constants: {}\n",
            self.algorithm_version, self.epsilon, self.gamma_coset, self.kernel, self.truncation, self.constants
        )
    }
}

#[derive(Serialize)]
struct Wrapped<'a, T: Serialize> {
    provenance: &'a Provenance,
    #[serde(flatten)]
    body: &'a T,
}

struct Reporter<'a> {
    cfg: &'a RunConfig,
    provenance: Provenance,
    written: Vec<PathBuf>,
}

impl<'a> Reporter<'a> {
    fn new(cfg: &'a RunConfig) -> Result<Self, RunError> {
        fs::create_dir_all(&cfg.out)?;
        Ok(Reporter {
            cfg,
            provenance: Provenance::new(cfg),
            written: Vec::new(),
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.cfg.out.join(name)
    }

    /// Rows as CSV under the provenance header.
    fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<(), RunError> {
        let path = self.path(name);
        let mut f = fs::File::create(&path)?;
        f.write_all(self.provenance.csv_header().as_bytes())?;
        let mut w = csv::WriterBuilder::new().has_headers(true).from_writer(f);
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        self.written.push(path);
        Ok(())
    }

    /// A summary object in the configured format.
    fn summary<T: Serialize>(&mut self, stem: &str, body: &T) -> Result<(), RunError> {
        let path = match self.cfg.format {
            Format::Json => {
                let path = self.path(&format!("{stem}.json"));
                let text = serde_json::to_string_pretty(&Wrapped {
                    provenance: &self.provenance,
                    body,
                })?;
                fs::write(&path, text + "\n")?;
                path
            }
            Format::Csv => {
                let path = self.path(&format!("{stem}.csv"));
                let value = serde_json::to_value(body)?;
                let mut text = self.provenance.csv_header();
                text.push_str("key,value\n");
                flatten_json("", &value, &mut text);
                fs::write(&path, text)?;
                path
            }
        };
        self.written.push(path);
        Ok(())
    }
}

fn flatten_json(prefix: &str, v: &serde_json::Value, out: &mut String) {
    match v {
        serde_json::Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten_json(&key, v, out);
            }
        }
        other => out.push_str(&format!("{prefix},{other}\n")),
    }
}

/// `C(M)` for both kinds, reusing and extending the cache when configured.
#[derive(Debug, Clone, Serialize)]
pub struct ConstantsSummary {
    pub max_prime: u64,
    pub main: ConstantReport,
    pub gamma: ConstantReport,
}

fn constants(cfg: &RunConfig, rep: &mut Reporter) -> Result<ConstantsSummary, RunError> {
    let plan = ScanPlan {
        max_prime: cfg.max_prime,
        modulus: 9,
        classes: cfg.classes.clone(),
    };
    let primes = plan.primes();
    let kinds = [Kind::Main, Kind::Gamma];
    let cache = cfg.cache.as_deref().map(Cache::open).transpose()?;
    let known = match &cache {
        Some(c) => c.load()?,
        None => Default::default(),
    };
    let fresh = primes
        .iter()
        .filter(|&&p| kinds.iter().any(|k| !known.contains_key(&(p, *k))))
        .count();
    log::info!(
        "constant scan: {} primes below {}, {} cached, {} to compute on {} workers",
        primes.len(),
        cfg.max_prime,
        primes.len() - fresh,
        fresh,
        cfg.threads
    );
    let store_err = std::sync::Mutex::new(None);
    let records = scan_records(&primes, &kinds, cfg.threads, &known, |r| {
        if let Some(c) = &cache {
            if let Err(e) = c.store(r) {
                store_err.lock().unwrap().get_or_insert(e);
            }
        }
    })?;
    if let Some(e) = store_err.into_inner().unwrap() {
        return Err(e.into());
    }
    let records: Vec<PartialSumRecord> = records
        .into_iter()
        .filter(|r| primes.binary_search(&r.p).is_ok())
        .collect();
    let reduce = |kind| {
        reduce_records(cfg.max_prime, kind, &records)
            .ok_or_else(|| RunError::Config(format!("no primes below {}", cfg.max_prime)))
    };
    let summary = ConstantsSummary {
        max_prime: cfg.max_prime,
        main: reduce(Kind::Main)?,
        gamma: reduce(Kind::Gamma)?,
    };
    rep.csv("constants_per_prime.csv", &records)?;
    rep.summary("constants", &summary)?;
    println!(
        "C({}) = {:.6} at p = {} (s = {}); C_gamma({}) = {:.6} at p = {} (s = {})",
        cfg.max_prime,
        summary.main.c_of_m,
        summary.main.witness_p,
        summary.main.witness_s,
        cfg.max_prime,
        summary.gamma.c_of_m,
        summary.gamma.witness_p,
        summary.gamma.witness_s
    );
    Ok(summary)
}

fn bounds_step(rep: &mut Reporter, c: f64, c_gamma: f64) -> Result<BoundReport, RunError> {
    let report = bounds::bound_report(c, c_gamma).map_err(|e| {
        RunError::assertion("p < 103000; |log|q|| < 39; p < 20400", e.to_string())
    })?;
    rep.summary("bounds", &report)?;
    println!(
        "p_max_pipeline = {}, x_final = {:.6}, p_max_final = {}",
        report.p_max_pipeline, report.x_final, report.p_max_final
    );
    Ok(report)
}

pub const SWEEP_PRIMES: [u64; 3] = [11, 23, 29];

fn units_step(rep: &mut Reporter) -> Result<Vec<SweepRow>, RunError> {
    let heights: Vec<f64> = (4..=20).map(|k| k as f64 * 0.5).collect();
    let rows = units::bound_sweep(&SWEEP_PRIMES, &heights)?;
    rep.csv("units.csv", &rows)?;
    let structure = units::verify_u_structure(11, &[20.0, 30.0, 50.0])?;
    rep.summary("units_structure", &structure)?;
    println!(
        "units: {} sweep rows; p = 11 slope error {:.2e}, constant error {:.2e}",
        rows.len(),
        structure.max_slope_error(),
        structure.final_constant_error()
    );
    if let Some(r) = rows.iter().find(|r| r.log_abs_r > r.bound_rhs) {
        return Err(RunError::assertion(
            "|log|R|| <= 4 pi^2 p sqrt(p) / (3 |log|q||)",
            format!("p = {}, Im tau = {}: {} > {}", r.p, r.im_tau, r.log_abs_r, r.bound_rhs),
        ));
    }
    Ok(rows)
}

#[derive(Serialize)]
struct SieveRow {
    p: u64,
    d: u32,
    c: i64,
    j: i64,
    witness_ell: Option<u64>,
    a_ell: Option<i64>,
    status: &'static str,
}

fn sieve_step(cfg: &RunConfig, rep: &mut Reporter, x_bound: f64) -> Result<SieveSummary, RunError> {
    let started = Instant::now();
    let cands = sieve::enumerate_candidates(x_bound, sieve::P_RANGE);
    log::info!(
        "sieve: {} candidates at x = {x_bound}, l <= {}, {} workers",
        cands.len(),
        cfg.ell_max,
        cfg.threads
    );
    let verdicts = sieve::run_sieve(&cands, cfg.ell_max, cfg.threads)?;
    let summary = sieve::summarize(&verdicts, started);
    let rows: Vec<SieveRow> = verdicts.iter().map(sieve_row).collect();
    rep.csv("sieve.csv", &rows)?;
    rep.summary("sieve_summary", &summary)?;
    println!(
        "sieve: {} / {} ruled out, max witness l = {}, {:.1} s",
        summary.ruled_out, summary.candidates, summary.max_witness_ell, summary.wall_time_seconds
    );
    if !summary.all_ruled_out() {
        let first = verdicts.iter().find(|v| v.status == Status::NotRuledOut).unwrap();
        return Err(RunError::assertion(
            "every candidate j-invariant is ruled out",
            format!(
                "{} candidates survive l <= {}; first: p = {}, d = {}, c = {}",
                summary.candidates - summary.ruled_out,
                cfg.ell_max,
                first.candidate.p,
                first.candidate.d,
                first.candidate.c
            ),
        ));
    }
    Ok(summary)
}

fn sieve_row(v: &Verdict) -> SieveRow {
    SieveRow {
        p: v.candidate.p,
        d: v.candidate.d,
        c: v.candidate.c,
        j: v.candidate.j,
        witness_ell: v.witness_ell,
        a_ell: v.a_ell,
        status: v.status.as_str(),
    }
}

#[derive(Serialize)]
struct CsumRow {
    kind: Kind,
    m: u64,
    re: f64,
    im: f64,
}

fn csum_step(cfg: &RunConfig, rep: &mut Reporter) -> Result<(), RunError> {
    let p = cfg
        .prime
        .ok_or_else(|| RunError::Config("csum needs --prime".into()))?;
    let (main, gamma) = char_tables(PrimeModulus::new_cartan(p)?)?;
    let rows: Vec<CsumRow> = [&main, &gamma]
        .iter()
        .flat_map(|t| {
            t.values.iter().enumerate().map(move |(m, z)| CsumRow {
                kind: t.kind,
                m: m as u64,
                re: z.re,
                im: z.im,
            })
        })
        .collect();
    rep.csv(&format!("csum_{p}.csv"), &rows)?;
    let sum: Complex64 = main.values.iter().sum();
    println!("csum p = {p}: sum_m c(m) = {:.6}", sum.re);
    Ok(())
}

/// Steps of the full verification, in order: constants, bounds, sieve.
fn all(cfg: &RunConfig, rep: &mut Reporter) -> Result<(), RunError> {
    let consts = constants(cfg, rep)?;
    if consts.main.c_of_m > C_MAIN {
        return Err(RunError::assertion(
            "C <= 4.25",
            format!("C({}) = {}", cfg.max_prime, consts.main.c_of_m),
        ));
    }
    if consts.gamma.c_of_m > C_GAMMA {
        return Err(RunError::assertion(
            "C_gamma <= 2.81",
            format!("C_gamma({}) = {}", cfg.max_prime, consts.gamma.c_of_m),
        ));
    }
    let report = bounds_step(rep, C_MAIN, C_GAMMA)?;
    if report.x_final >= X_FINAL_CEILING {
        return Err(RunError::assertion("|log|q|| < 39", format!("x_final = {}", report.x_final)));
    }
    // the rounded bound covers every candidate allowed by x_final
    sieve_step(cfg, rep, cfg.x_bound.max(report.x_final))?;
    Ok(())
}

/// Runs one subcommand; returns the files written.
pub fn run(cfg: &RunConfig) -> Result<Vec<PathBuf>, RunError> {
    cfg.validate()?;
    let mut rep = Reporter::new(cfg)?;
    let result = match cfg.command {
        Command::Constants => constants(cfg, &mut rep).map(|_| ()),
        Command::Bounds => bounds_step(&mut rep, C_MAIN, C_GAMMA).map(|_| ()),
        Command::Units => units_step(&mut rep).map(|_| ()),
        Command::Sieve => sieve_step(cfg, &mut rep, cfg.x_bound).map(|_| ()),
        Command::Csum => csum_step(cfg, &mut rep),
        Command::All => all(cfg, &mut rep),
    };
    if let Err(RunError::Assertion { statement, detail }) = &result {
        write_failure(&cfg.out, statement, detail)?;
    }
    result.map(|_| rep.written)
}

fn write_failure(dir: &Path, statement: &str, detail: &str) -> Result<(), RunError> {
    let body = serde_json::json!({ "violated": statement, "detail": detail });
    fs::write(dir.join("failure.json"), serde_json::to_string_pretty(&body)? + "\n")?;
    Ok(())
}
