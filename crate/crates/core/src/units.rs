//! q-expansions of the modular units `R`, `R_gamma` and `U` built from cube
//! character sums, plus the structural checks on `U`.
//!
//! `q^{m/p}` always means `exp(2 pi i tau m / p)`; pass a shifted `tau` (see
//! [`real_root_tau`]) to pick the real p-th root when `q < 0`.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::char_sums::{char_table, cube_cosets, CharTable, CubeCosetData, Kind};
use crate::error::{Error, Result};
use crate::field::{mul_mod, PrimeModulus};
use crate::partial_sums::{d_series, sigma_minus1_table};

/// Largest tail bound accepted from a truncated series.
pub const MAX_TAIL: f64 = 1e-8;

fn check_p(p: u64) -> Result<()> {
    PrimeModulus::new_cartan(p).map(|_| ())
}

/// `Ord_q(U) = (p^2 - 1) / (6p)`.
pub fn ord_q_u(p: u64) -> Result<Ratio<i64>> {
    check_p(p)?;
    let p = p as i64;
    Ok(Ratio::new(p * p - 1, 6 * p))
}

/// `Ord_q(U o gamma) = -(p^2 - 1) / (12p)`.
pub fn ord_q_u_gamma(p: u64) -> Result<Ratio<i64>> {
    check_p(p)?;
    let p = p as i64;
    Ok(Ratio::new(-(p * p - 1), 12 * p))
}

fn ratio_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `|log|q||` at `tau`.
pub fn abs_log_q(tau: Complex64) -> f64 {
    2.0 * PI * tau.im
}

/// Moves `tau` with `Re tau = 1/2` to `tau + (p-1)/2`, where
/// `exp(2 pi i tau / p)` is the real p-th root of the (negative) `q`.
pub fn real_root_tau(p: u64, tau: Complex64) -> Complex64 {
    let frac = tau.re - tau.re.floor();
    if (frac - 0.5).abs() < 1e-12 {
        tau + Complex64::new((p as f64 - 1.0) / 2.0, 0.0)
    } else {
        tau
    }
}

/// `exp(2 pi i tau t)`.
fn q_pow(tau: Complex64, t: f64) -> Complex64 {
    (Complex64::new(0.0, 2.0 * PI) * tau * t).exp()
}

/// `log|1 - z|`, accurate for small `z`.
fn log_abs_one_minus(z: Complex64) -> f64 {
    0.5 * (z.norm_sqr() - 2.0 * z.re).ln_1p()
}

/// Truncated series value and a bound on what was dropped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: Complex64,
    pub truncation: u64,
    pub tail_bound: f64,
}

/// `sum_{m > n} m r^m`.
fn weighted_geometric_tail(n: u64, r: f64) -> f64 {
    let n1 = (n + 1) as f64;
    r.powf(n1) * (n1 / (1.0 - r) + r / ((1.0 - r) * (1.0 - r)))
}

/// Character table and divisor weights for evaluating `log R` or
/// `log R_gamma` at many points.
pub struct UnitSeries {
    table: CharTable,
    c_max: f64,
}

impl UnitSeries {
    pub fn new(p: u64, kind: Kind) -> Result<Self> {
        let table = char_table(PrimeModulus::new_cartan(p)?, kind)?;
        let c_max = table.max_abs_nonzero();
        Ok(UnitSeries { table, c_max })
    }

    pub fn p(&self) -> u64 {
        self.table.p()
    }

    pub fn kind(&self) -> Kind {
        self.table.kind
    }

    pub fn table(&self) -> &CharTable {
        &self.table
    }

    /// `ceil(40 p / |log|q||)`.
    pub fn default_truncation(&self, tau: Complex64) -> u64 {
        (40.0 * self.p() as f64 / abs_log_q(tau)).ceil() as u64
    }

    fn check_tau(tau: Complex64) -> Result<()> {
        if !(tau.im >= 1.0) || !tau.re.is_finite() {
            return Err(Error::Domain(format!("Im(tau) = {} must be >= 1", tau.im)));
        }
        Ok(())
    }

    /// `sum_{n >= 1, p not| n} -log(1 - q^n)` and its tail bound.
    fn cusp_sum(&self, tau: Complex64) -> (Complex64, f64) {
        let p = self.p();
        let abs_q = (-abs_log_q(tau)).exp();
        let mut sum = Complex64::new(0.0, 0.0);
        let mut n = 1u64;
        while abs_q.powf(n as f64) > 1e-20 {
            if n % p != 0 {
                sum -= (Complex64::new(1.0, 0.0) - q_pow(tau, n as f64)).ln();
            }
            n += 1;
        }
        let tail = abs_q.powf(n as f64) / ((1.0 - abs_q) * (1.0 - abs_q));
        (sum, tail)
    }

    fn cusp_coefficient(&self) -> f64 {
        let pf = self.p() as f64;
        match self.kind() {
            Kind::Main => 4.0 * (pf + 1.0) / pf,
            Kind::Gamma => -2.0 * (pf + 1.0) / pf,
        }
    }

    /// Divisor-sum form `-6 sum_{p not| m} q^{m/p} sigma_{-1}(m) c(m) + k sum_{p not| n} -log(1-q^n)`,
    /// with `k = 4(p+1)/p` for `R` and `-2(p+1)/p` for `R_gamma`.
    pub fn log_r(&self, tau: Complex64, truncation: Option<u64>) -> Result<SeriesValue> {
        Self::check_tau(tau)?;
        let n = truncation.unwrap_or_else(|| self.default_truncation(tau));
        let p = self.p();
        let sigma = sigma_minus1_table(n as usize);
        let mut s = Complex64::new(0.0, 0.0);
        for m in (1..=n).rev() {
            if m % p != 0 {
                s += q_pow(tau, m as f64 / p as f64) * self.table.at(m) * sigma[m as usize];
            }
        }
        let (cusp, cusp_tail) = self.cusp_sum(tau);
        let r = (-abs_log_q(tau) / p as f64).exp();
        let tail = 6.0 * self.c_max * weighted_geometric_tail(n, r)
            + self.cusp_coefficient().abs() * cusp_tail;
        finish(-6.0 * s + self.cusp_coefficient() * cusp, n, tail)
    }

    /// Same value through partial summation,
    /// `S = -6 sum_s (q^{s/p} - q^{(s+1)/p}) D(s)`.
    pub fn log_r_abel(&self, tau: Complex64, truncation: Option<u64>) -> Result<SeriesValue> {
        Self::check_tau(tau)?;
        let n = truncation.unwrap_or_else(|| self.default_truncation(tau));
        let p = self.p() as f64;
        let sigma = sigma_minus1_table(n as usize);
        let d = d_series(&self.table, &sigma, n)?;
        let mut s = Complex64::new(0.0, 0.0);
        for k in (1..=n).rev() {
            let diff = q_pow(tau, k as f64 / p) - q_pow(tau, (k + 1) as f64 / p);
            s += diff * d[k as usize];
        }
        let (cusp, cusp_tail) = self.cusp_sum(tau);
        let r = (-abs_log_q(tau) / p).exp();
        // the truncated Abel sum differs from the truncated direct sum by
        // the boundary term q^{(N+1)/p} D(N)
        let tail = 6.0 * self.c_max * weighted_geometric_tail(n, r)
            + 6.0 * r.powf((n + 1) as f64) * d[n as usize].norm()
            + self.cusp_coefficient().abs() * cusp_tail;
        finish(-6.0 * s + self.cusp_coefficient() * cusp, n, tail)
    }
}

fn finish(value: Complex64, truncation: u64, tail_bound: f64) -> Result<SeriesValue> {
    if !(tail_bound <= MAX_TAIL) {
        return Err(Error::InsufficientTruncation {
            truncation: truncation as usize,
            tail: tail_bound,
        });
    }
    Ok(SeriesValue {
        value,
        truncation,
        tail_bound,
    })
}

/// `log R` (main) or `log R_gamma` (gamma) at `tau`.
pub fn eval_log_r(p: u64, tau: Complex64, kind: Kind, truncation: Option<u64>) -> Result<SeriesValue> {
    UnitSeries::new(p, kind)?.log_r(tau, truncation)
}

/// `4 pi^2 p sqrt(p) / (3 |log|q||)`.
pub fn log_r_bound(p: u64, x: f64) -> f64 {
    let pf = p as f64;
    4.0 * PI * PI * pf * pf.sqrt() / (3.0 * x)
}

/// `B_2(t) = t^2 - t + 1/6`.
fn bernoulli2(t: f64) -> f64 {
    t * t - t + 1.0 / 6.0
}

/// Pairs `(a, b)` of the cusp orbit: `O_cubes` for main, its gamma coset otherwise.
pub fn orbit_pairs(cosets: &CubeCosetData, kind: Kind) -> Vec<(u64, u64)> {
    let p = cosets.modulus.p();
    let mut pairs = Vec::with_capacity(((p * p - 1) / 3) as usize);
    if kind == Kind::Main {
        pairs.extend((1..p).map(|b| (0, b)));
    }
    let fiber = cosets.fiber(kind);
    for a in 1..p {
        pairs.extend(fiber.iter().map(|&f| (a, mul_mod(a, f, p))));
    }
    pairs
}

/// `log|U|` (main) or `log|U o gamma|` (gamma) from the product of cubed
/// Siegel functions over the orbit; the root of unity drops out.
pub fn log_abs_u(cosets: &CubeCosetData, tau: Complex64, kind: Kind) -> Result<f64> {
    if !(tau.im > 0.0) {
        return Err(Error::Domain(format!("Im(tau) = {} must be positive", tau.im)));
    }
    let p = cosets.modulus.p();
    let pairs = orbit_pairs(cosets, kind);
    if pairs.len() as u64 != (p * p - 1) / 3 {
        return Err(Error::Structural(format!(
            "orbit has {} pairs, expected (p^2-1)/3 = {}",
            pairs.len(),
            (p * p - 1) / 3
        )));
    }
    let x = abs_log_q(tau);
    let terms = (42.0 / x).ceil() as u64 + 1;
    let pf = p as f64;
    let mut total = 0.0;
    for (a, b) in pairs {
        let a1 = a as f64 / pf;
        let phase = 2.0 * PI * b as f64 / pf;
        let e = Complex64::new(phase.cos(), phase.sin());
        let mut acc = -bernoulli2(a1) / 2.0 * x;
        for n in 0..=terms {
            acc += log_abs_one_minus(q_pow(tau, n as f64 + a1) * e);
            acc += log_abs_one_minus(q_pow(tau, n as f64 + 1.0 - a1) * e.conj());
        }
        total += 3.0 * acc;
    }
    Ok(total)
}

/// Values at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitEvaluation {
    pub p: u64,
    pub tau: (f64, f64),
    pub truncation: u64,
    pub log_r: (f64, f64),
    pub log_r_gamma: (f64, f64),
    pub log_u_abs: f64,
    pub tail_bound: f64,
}

pub fn evaluate_units(p: u64, tau: Complex64) -> Result<UnitEvaluation> {
    let main = eval_log_r(p, tau, Kind::Main, None)?;
    let gamma = eval_log_r(p, tau, Kind::Gamma, None)?;
    let cosets = cube_cosets(PrimeModulus::new_cartan(p)?)?;
    Ok(UnitEvaluation {
        p,
        tau: (tau.re, tau.im),
        truncation: main.truncation.max(gamma.truncation),
        log_r: (main.value.re, main.value.im),
        log_r_gamma: (gamma.value.re, gamma.value.im),
        log_u_abs: log_abs_u(&cosets, tau, Kind::Main)?,
        tail_bound: main.tail_bound.max(gamma.tail_bound),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructureRow {
    pub im_tau: f64,
    pub log_abs_u: f64,
    /// `log|U| - Ord_q(U) log|q|`.
    pub constant_estimate: f64,
    /// Finite-difference slope of `log|U|` against `log|q|` from the previous row.
    pub slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    pub p: u64,
    pub kind: Kind,
    pub order: f64,
    /// `3 log p` for `U`, 0 for `U o gamma`.
    pub expected_constant: f64,
    pub rows: Vec<StructureRow>,
}

impl StructureReport {
    /// Largest relative slope error over consecutive heights.
    pub fn max_slope_error(&self) -> f64 {
        self.rows
            .iter()
            .filter_map(|r| r.slope)
            .map(|s| ((s - self.order) / self.order).abs())
            .fold(0.0, f64::max)
    }

    /// Constant-term error at the largest height.
    pub fn final_constant_error(&self) -> f64 {
        self.rows
            .last()
            .map_or(f64::INFINITY, |r| (r.constant_estimate - self.expected_constant).abs())
    }
}

/// Checks `U = zeta q^{Ord} p^3 R` along the imaginary axis.
pub fn verify_u_structure(p: u64, im_tau_list: &[f64]) -> Result<StructureReport> {
    verify_unit_structure(p, im_tau_list, Kind::Main)
}

/// [`verify_u_structure`] for `U` (main) or `U o gamma` (gamma).
///
/// Fails if at some height `|log|U| - Ord log|q| - const|` exceeds the
/// `|log|R||` bound.
pub fn verify_unit_structure(p: u64, im_tau_list: &[f64], kind: Kind) -> Result<StructureReport> {
    if im_tau_list.is_empty() {
        return Err(Error::Domain("no heights given".into()));
    }
    if let Some(h) = im_tau_list.iter().find(|&&h| !(h >= 5.0)) {
        return Err(Error::Domain(format!("height {h} below 5")));
    }
    let cosets = cube_cosets(PrimeModulus::new_cartan(p)?)?;
    let (order, expected_constant) = match kind {
        Kind::Main => (ratio_f64(ord_q_u(p)?), 3.0 * (p as f64).ln()),
        Kind::Gamma => (ratio_f64(ord_q_u_gamma(p)?), 0.0),
    };
    let mut rows: Vec<StructureRow> = Vec::with_capacity(im_tau_list.len());
    for &h in im_tau_list {
        let tau = Complex64::new(0.0, h);
        let log_q = -abs_log_q(tau);
        let lu = log_abs_u(&cosets, tau, kind)?;
        let constant_estimate = lu - order * log_q;
        if (constant_estimate - expected_constant).abs() > log_r_bound(p, -log_q) + 1e-9 {
            return Err(Error::Structural(format!(
                "p = {p}, Im(tau) = {h}: constant {constant_estimate} too far from {expected_constant}"
            )));
        }
        let slope = rows
            .last()
            .map(|prev| (lu - prev.log_abs_u) / (log_q + 2.0 * PI * prev.im_tau));
        rows.push(StructureRow {
            im_tau: h,
            log_abs_u: lu,
            constant_estimate,
            slope,
        });
    }
    Ok(StructureReport {
        p,
        kind,
        order,
        expected_constant,
        rows,
    })
}

/// One line of the `units` sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub p: u64,
    pub im_tau: f64,
    #[serde(rename = "log_abs_R")]
    pub log_abs_r: f64,
    pub bound_rhs: f64,
    pub slope_estimate: f64,
}

/// `|log|R||` against its bound on the imaginary axis, with a central
/// finite-difference slope of `log|U|` in `log|q|`.
pub fn bound_sweep(primes: &[u64], heights: &[f64]) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for &p in primes {
        let series = UnitSeries::new(p, Kind::Main)?;
        let cosets = cube_cosets(PrimeModulus::new_cartan(p)?)?;
        for &h in heights {
            let tau = Complex64::new(0.0, h);
            let log_r = series.log_r(tau, None)?;
            let dh = 1e-3 * h;
            let up = log_abs_u(&cosets, Complex64::new(0.0, h + dh), Kind::Main)?;
            let down = log_abs_u(&cosets, Complex64::new(0.0, h - dh), Kind::Main)?;
            rows.push(SweepRow {
                p,
                im_tau: h,
                log_abs_r: log_r.value.re.abs(),
                bound_rhs: log_r_bound(p, abs_log_q(tau)),
                slope_estimate: (up - down) / (-2.0 * PI * 2.0 * dh),
            });
        }
    }
    Ok(rows)
}
