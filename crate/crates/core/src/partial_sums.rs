//! Abel partial sums `D(s) = sum_{m <= s, p not| m} sigma_{-1}(m) c(m)` and the
//! empirical constants `C(M) = max_p max_{s<p} |D(s)| / sqrt(ps)`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::char_sums::{char_tables, CharTable, Kind};
use crate::error::{Error, Result};
use crate::field::PrimeModulus;
use crate::primes;

/// `sigma_{-1}(m) = sum_{k | m} 1/k` for `m <= n_max`; index 0 holds 0.
pub fn sigma_minus1_table(n_max: usize) -> Vec<f64> {
    let mut sigma = vec![0.0; n_max + 1];
    for k in 1..=n_max {
        let w = 1.0 / k as f64;
        let mut m = k;
        while m <= n_max {
            sigma[m] += w;
            m += k;
        }
    }
    sigma
}

/// Compensated summation over complex terms.
#[derive(Debug, Default, Clone, Copy)]
struct Kahan {
    sum: Complex64,
    comp: Complex64,
}

impl Kahan {
    #[inline]
    fn add(&mut self, x: Complex64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }
}

/// Per-prime statistics of `D(s)` for `1 <= s < p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartialSumRecord {
    pub p: u64,
    pub kind: Kind,
    /// `max_{1 <= s < p} |D(s)| / sqrt(p s)`.
    pub c_p: f64,
    pub argmax_s: u64,
}

fn check_sigma(sigma: &[f64], needed: u64) -> Result<()> {
    if (sigma.len() as u64) <= needed {
        return Err(Error::Domain(format!(
            "sigma table covers m <= {}, need {}",
            sigma.len().saturating_sub(1),
            needed
        )));
    }
    Ok(())
}

/// Running maximum of `|D(s)|/sqrt(ps)` over `s < p`.
pub fn d_scan(table: &CharTable, sigma: &[f64]) -> Result<PartialSumRecord> {
    let p = table.p();
    check_sigma(sigma, p - 1)?;
    let pf = p as f64;
    let mut acc = Kahan::default();
    let mut best = (f64::NEG_INFINITY, 1u64);
    for s in 1..p {
        acc.add(table.values[s as usize] * sigma[s as usize]);
        let ratio = acc.sum.norm() / (pf * s as f64).sqrt();
        if ratio > best.0 {
            best = (ratio, s);
        }
    }
    Ok(PartialSumRecord {
        p,
        kind: table.kind,
        c_p: best.0,
        argmax_s: best.1,
    })
}

/// `D(s)` for `s = 0..=s_max` (entry 0 is 0), skipping multiples of p.
pub fn d_series(table: &CharTable, sigma: &[f64], s_max: u64) -> Result<Vec<Complex64>> {
    check_sigma(sigma, s_max)?;
    let p = table.p();
    let mut out = Vec::with_capacity(s_max as usize + 1);
    out.push(Complex64::new(0.0, 0.0));
    let mut acc = Kahan::default();
    for m in 1..=s_max {
        if m % p != 0 {
            acc.add(table.at(m) * sigma[m as usize]);
        }
        out.push(acc.sum);
    }
    Ok(out)
}

/// Which primes a constant scan covers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanPlan {
    /// Exclusive upper bound M.
    pub max_prime: u64,
    pub modulus: u64,
    pub classes: Vec<u64>,
}

impl ScanPlan {
    /// Primes `p = 2, 5 mod 9` below `max_prime`.
    pub fn standard(max_prime: u64) -> Self {
        ScanPlan {
            max_prime,
            modulus: 9,
            classes: vec![2, 5],
        }
    }

    /// Odd primes `p = 2 mod 3` in the requested classes.
    pub fn primes(&self) -> Vec<u64> {
        primes::primes_in_classes(self.max_prime, self.modulus, &self.classes)
            .into_iter()
            .filter(|&p| p > 3 && p % 3 == 2)
            .collect()
    }
}

/// Maximum of `c_p` over a set of primes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantReport {
    pub max_prime: u64,
    pub kind: Kind,
    /// `C(M)`.
    pub c_of_m: f64,
    pub witness_p: u64,
    pub witness_s: u64,
    pub primes_processed: usize,
}

/// Max with ties broken toward the smaller prime; independent of input order.
pub fn reduce_records(max_prime: u64, kind: Kind, records: &[PartialSumRecord]) -> Option<ConstantReport> {
    let mut best: Option<&PartialSumRecord> = None;
    let mut count = 0;
    for r in records.iter().filter(|r| r.kind == kind) {
        count += 1;
        best = match best {
            None => Some(r),
            Some(b) if r.c_p > b.c_p || (r.c_p == b.c_p && r.p < b.p) => Some(r),
            keep => keep,
        };
    }
    best.map(|b| ConstantReport {
        max_prime,
        kind,
        c_of_m: b.c_p,
        witness_p: b.p,
        witness_s: b.argmax_s,
        primes_processed: count,
    })
}

/// Computes records for every `(p, kind)` not already in `known`, in parallel.
///
/// `sink` sees each fresh record as soon as it is produced (in scheduling
/// order); the returned vector is sorted by `(p, kind)` and includes the
/// reused records.
pub fn scan_records<F>(
    primes: &[u64],
    kinds: &[Kind],
    threads: usize,
    known: &BTreeMap<(u64, Kind), PartialSumRecord>,
    sink: F,
) -> Result<Vec<PartialSumRecord>>
where
    F: Fn(&PartialSumRecord) + Sync,
{
    let todo: Vec<u64> = primes
        .iter()
        .copied()
        .filter(|p| kinds.iter().any(|k| !known.contains_key(&(*p, *k))))
        .collect();
    let sigma_len = primes.iter().copied().max().unwrap_or(2) as usize;
    let sigma = sigma_minus1_table(sigma_len);

    let work = |p: u64| -> Result<Vec<PartialSumRecord>> {
        let modulus = PrimeModulus::new_cartan(p)?;
        let (main, gamma) = char_tables(modulus)?;
        let mut out = Vec::with_capacity(2);
        for kind in kinds {
            if known.contains_key(&(p, *kind)) {
                continue;
            }
            let table = match kind {
                Kind::Main => &main,
                Kind::Gamma => &gamma,
            };
            let rec = d_scan(table, &sigma)?;
            sink(&rec);
            out.push(rec);
        }
        Ok(out)
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Solver(format!("thread pool: {e}")))?;
    let results: Vec<(u64, Result<Vec<PartialSumRecord>>)> =
        pool.install(|| todo.par_iter().map(|&p| (p, work(p))).collect());

    let mut failed = Vec::new();
    let mut records: Vec<PartialSumRecord> = Vec::new();
    for (p, res) in results {
        match res {
            Ok(rs) => records.extend(rs),
            Err(e) => {
                log::error!("p = {p}: {e}");
                failed.push(p);
            }
        }
    }
    if !failed.is_empty() {
        return Err(Error::PartialScan { unprocessed: failed });
    }
    for p in primes {
        for kind in kinds {
            if let Some(r) = known.get(&(*p, *kind)) {
                records.push(*r);
            }
        }
    }
    records.sort_by(|a, b| (a.p, a.kind).cmp(&(b.p, b.kind)));
    Ok(records)
}

/// `C(M)` for one kind over primes `p = 2, 5 mod 9` below `max_prime`.
pub fn constant_scan(max_prime: u64, kind: Kind, threads: usize) -> Result<ConstantReport> {
    if max_prime < 11 {
        return Err(Error::Domain(format!("cutoff M = {max_prime} must be >= 11")));
    }
    let plan = ScanPlan::standard(max_prime);
    let primes = plan.primes();
    let records = scan_records(&primes, &[kind], threads, &BTreeMap::new(), |_| {})?;
    let report = reduce_records(max_prime, kind, &records)
        .ok_or_else(|| Error::Domain("no primes in range".into()))?;
    let lls = (report.witness_p as f64).ln().ln();
    log::info!(
        "C({}) [{}] = {:.6} at p = {}; C / (log log p)^2 = {:.4}",
        max_prime,
        kind,
        report.c_of_m,
        report.witness_p,
        report.c_of_m / (lls * lls)
    );
    Ok(report)
}
