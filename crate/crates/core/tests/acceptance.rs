//! One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

mod common;

use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use cartan_core::bounds::{self, final_inequality_gap, pipeline_holds, WORST_CASE_PRIME};
use cartan_core::char_sums::{char_table, char_tables, Kind};
use cartan_core::field::PrimeModulus;
use cartan_core::partial_sums::{reduce_records, scan_records, ScanPlan};
use cartan_core::sieve::{
    self, count_points, discriminant, enumerate_candidates, frobenius_roots_are_cubes, integer_census,
};
use cartan_core::units::{bound_sweep, verify_u_structure};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use serde_json::Value;

use common::*;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn cartan(args: &[&str], out: &Path) -> Result<(Value, Duration), String> {
    let started = Instant::now();
    let o = Command::new(env!("CARGO_BIN_EXE_cartan"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("RUST_LOG", "warn")
        .output()
        .map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    if !o.status.success() {
        return Err(format!("cartan {args:?} exited {:?}: {}", o.status.code(), String::from_utf8_lossy(&o.stderr)));
    }
    let file = match args[0] {
        "constants" => "constants.json",
        "bounds" => "bounds.json",
        "sieve" => "sieve_summary.json",
        other => return Err(format!("no summary for {other}")),
    };
    let text = std::fs::read_to_string(out.join(file)).map_err(|e| e.to_string())?;
    let v = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    Ok((v, elapsed))
}

fn f(v: &Value, path: &[&str]) -> f64 {
    path.iter().fold(v, |v, k| &v[k]).as_f64().unwrap_or(f64::NAN)
}

/// Shared `(p, kind)` records for p < 103000, used by criteria 2 and 3.
struct FullScan {
    records: Vec<cartan_core::partial_sums::PartialSumRecord>,
    seconds: f64,
}

fn full_scan() -> Result<FullScan, String> {
    let started = Instant::now();
    let primes = ScanPlan::standard(bounds::P_PIPELINE_CEILING).primes();
    let records = scan_records(&primes, &[Kind::Main, Kind::Gamma], threads(), &BTreeMap::new(), |_| {})
        .map_err(|e| e.to_string())?;
    Ok(FullScan {
        records,
        seconds: started.elapsed().as_secs_f64(),
    })
}

fn criterion_1(dir: &Path) -> Outcome {
    let (v, t) = cartan(&["constants", "--max-prime", "10000"], dir)?;
    let c = f(&v, &["main", "c_of_m"]);
    check(
        (c - 3.789).abs() <= 0.005 && t < Duration::from_secs(120),
        format!("C(1e4) = {c:.6} at p = {}, {:.1}s", v["main"]["witness_p"], t.as_secs_f64()),
    )
}

fn criterion_2(scan: &FullScan) -> Outcome {
    let below: Vec<_> = scan.records.iter().copied().filter(|r| r.p < 100_000).collect();
    let r = reduce_records(100_000, Kind::Main, &below).ok_or("empty scan")?;
    check(
        (r.c_of_m - 4.246).abs() <= 0.005 && r.c_of_m <= bounds::C_MAIN,
        format!("C(1e5) = {:.6} at p = {} (s = {}), scan {:.0}s", r.c_of_m, r.witness_p, r.witness_s, scan.seconds),
    )
}

fn criterion_3(scan: &FullScan) -> Outcome {
    let small: Vec<_> = scan.records.iter().copied().filter(|r| r.p < 10_000).collect();
    let g4 = reduce_records(10_000, Kind::Gamma, &small).ok_or("empty scan")?;
    let gf = reduce_records(bounds::P_PIPELINE_CEILING, Kind::Gamma, &scan.records).ok_or("empty scan")?;
    check(
        g4.c_of_m <= bounds::C_GAMMA && gf.c_of_m <= bounds::C_GAMMA,
        format!(
            "C_gamma(1e4) = {:.6}, C_gamma(103000) = {:.6} at p = {}",
            g4.c_of_m, gf.c_of_m, gf.witness_p
        ),
    )
}

fn criterion_4() -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    for p in small_primes(5, 1000).into_iter().filter(|p| p % 3 == 2) {
        let (main, gamma) = char_tables(PrimeModulus::new(p).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let sqrt_p = (p as f64).sqrt();
        if main.max_abs_nonzero() > 4.0 / 3.0 * sqrt_p {
            return Err(format!("p = {p}: max |c(s)| = {} above 4/3 sqrt(p)", main.max_abs_nonzero()));
        }
        worst = worst.max(main.max_abs_nonzero() / sqrt_p);
        let tol = 1e-8 * p as f64;
        let total: Complex64 = main.values.iter().sum();
        if (total.re - p as f64).abs() > tol || total.im.abs() > tol {
            return Err(format!("p = {p}: sum c(m) = {total}"));
        }
        for m in 1..p as usize {
            if (gamma.values[m].re + main.values[m].re / 2.0).abs() > tol {
                return Err(format!("p = {p}, m = {m}: Re c_gamma != -c/2"));
            }
        }
        count += 1;
    }
    Ok(format!("{count} primes, max |c(s)|/sqrt(p) = {worst:.6} <= 4/3"))
}

fn criterion_5(dir: &Path) -> Outcome {
    let (v, t) = cartan(&["bounds"], dir)?;
    let p_max = v["p_max_pipeline"].as_u64().ok_or("p_max_pipeline missing")?;
    let x = f(&v, &["x_final"]);
    let p_final = v["p_max_final"].as_u64().ok_or("p_max_final missing")?;
    let resub = pipeline_holds(p_max)
        && !pipeline_holds(p_max + 1)
        && final_inequality_gap(x, bounds::C_GAMMA, WORST_CASE_PRIME) <= 0.0
        && final_inequality_gap(x + 1e-3, bounds::C_GAMMA, WORST_CASE_PRIME) > 0.0
        && bounds::final_p_bound(x) == p_final;
    check(
        p_max < bounds::P_PIPELINE_CEILING && x < bounds::X_FINAL_CEILING && p_final < bounds::P_FINAL_CEILING && resub,
        format!(
            "p_max_pipeline = {p_max}, x_final = {x:.4}, p_max_final = {p_final}, re-substitution {}, {:.2}s",
            if resub { "ok" } else { "failed" },
            t.as_secs_f64()
        ),
    )
}

fn criterion_6() -> Outcome {
    let all = enumerate_candidates(sieve::DEFAULT_X_BOUND, sieve::P_RANGE);
    let total = all.len();
    let spot = all.iter().filter(|c| c.p == 2003 && c.d == 4).count();
    let integers = integer_census(sieve::DEFAULT_X_BOUND, sieve::P_RANGE);
    check(
        total == 645_552 && spot == 62,
        format!(
            "candidates = {total} (expected 645552), p = 2003 d = 4 gives {spot} (expected 62); \
             over all integers 100 < n < 20400 the count is {integers}"
        ),
    )
}

fn criterion_7(dir: &Path) -> Outcome {
    let (v, t) = cartan(&["sieve", "--threads", "1"], dir)?;
    let n = v["candidates"].as_u64().unwrap_or(0);
    let ruled = v["ruled_out"].as_u64().unwrap_or(0);
    let ell = v["max_witness_ell"].as_u64().unwrap_or(u64::MAX);
    check(
        n > 0 && n == ruled && ell < 200 && t < Duration::from_secs(600),
        format!("{ruled}/{n} ruled out, max witness l = {ell}, {:.1}s on 1 thread", t.as_secs_f64()),
    )
}

fn criterion_8() -> Outcome {
    let r = verify_u_structure(11, &[20.0, 30.0, 50.0]).map_err(|e| e.to_string())?;
    let slope = r.rows[1].slope.ok_or("no slope")?;
    let slope_err = ((slope - 20.0 / 11.0) / (20.0 / 11.0)).abs();
    let constant = r.rows[2].constant_estimate;
    let const_err = (constant - 3.0 * 11f64.ln()).abs();
    check(
        slope_err <= 1e-6 && const_err <= 1e-8,
        format!("slope = {slope:.10} (rel err {slope_err:.1e}), constant at 50 = {constant:.10} (err {const_err:.1e})"),
    )
}

fn criterion_9() -> Outcome {
    let heights: Vec<f64> = (0..=16).map(|i| 2.0 + 0.5 * i as f64).collect();
    let rows = bound_sweep(&[11, 23, 29], &heights).map_err(|e| e.to_string())?;
    let worst = rows
        .iter()
        .max_by(|a, b| (a.log_abs_r / a.bound_rhs).total_cmp(&(b.log_abs_r / b.bound_rhs)))
        .ok_or("empty sweep")?;
    check(
        rows.iter().all(|r| r.log_abs_r <= r.bound_rhs),
        format!(
            "{} points, largest |log|R||/bound = {:.3e} at p = {}, Im tau = {}",
            rows.len(),
            worst.log_abs_r / worst.bound_rhs,
            worst.p,
            worst.im_tau
        ),
    )
}

fn criterion_10() -> Outcome {
    let mut tables = 0;
    for p in small_primes(5, 102).into_iter().filter(|p| p % 3 == 2) {
        let m = PrimeModulus::new(p).map_err(|e| e.to_string())?;
        for (kind, gamma) in [(Kind::Main, false), (Kind::Gamma, true)] {
            let fast = char_table(m, kind).map_err(|e| e.to_string())?;
            let slow = brute_char_table(p, gamma);
            if fast.values.iter().zip(&slow).any(|(a, b)| (a - b).norm() > 1e-9 * p as f64) {
                return Err(format!("char table mismatch at p = {p} ({kind})"));
            }
            tables += 1;
        }
    }
    let mut rng = rand::rngs::StdRng::seed_from_u64(0xacce);
    let ells = small_primes(5, 98);
    let mut curves = 0;
    while curves < 50 {
        let ell = ells[rng.gen_range(0..ells.len())];
        let (a, b) = (rng.gen_range(0..ell), rng.gen_range(0..ell));
        if discriminant(a, b, ell) == 0 {
            continue;
        }
        if count_points(a, b, ell).map_err(|e| e.to_string())? != naive_point_count(a, b, ell) {
            return Err(format!("point count mismatch l = {ell}, A = {a}, B = {b}"));
        }
        curves += 1;
    }
    let mut traces = 0;
    for p in [5u64, 11, 17, 23] {
        let m = PrimeModulus::new(p).map_err(|e| e.to_string())?;
        for ell in small_primes(5, 60).into_iter().filter(|&l| l != p) {
            let bound = (2.0 * (ell as f64).sqrt()).floor() as i64;
            for a in -bound..=bound {
                if frobenius_roots_are_cubes(a, ell, &m).map_err(|e| e.to_string())? != brute_roots_are_cubes(a, ell, p) {
                    return Err(format!("cube test mismatch p = {p}, l = {ell}, a = {a}"));
                }
                traces += 1;
            }
        }
    }
    Ok(format!("{tables} char tables, {curves} curves, {traces} Frobenius traces agree"))
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().expect("temp dir");
    let sub = |name: &str| dir.path().join(name);
    let scan = full_scan();
    let from_scan = |f: fn(&FullScan) -> Outcome| scan.as_ref().map_err(Clone::clone).and_then(f);

    let results: Vec<(u32, &str, Outcome)> = vec![
        (1, "constant C(1e4)", criterion_1(&sub("c1"))),
        (2, "constant C(1e5)", from_scan(criterion_2)),
        (3, "constant C_gamma", from_scan(criterion_3)),
        (4, "Weil bound and coset identities", criterion_4()),
        (5, "bound pipeline", criterion_5(&sub("c5"))),
        (6, "candidate census", criterion_6()),
        (7, "full sieve", criterion_7(&sub("c7"))),
        (8, "modular unit structure", criterion_8()),
        (9, "log R bound sweep", criterion_9()),
        (10, "oracle equivalence", criterion_10()),
    ];

    let mut failed = 0;
    for (n, name, outcome) in &results {
        match outcome {
            Ok(d) => println!("ACCEPTANCE [{n}] PASS {name}: {d}"),
            Err(d) => {
                failed += 1;
                println!("ACCEPTANCE [{n}] FAIL {name}: {d}");
            }
        }
    }
    println!("ACCEPTANCE {}/{} passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
