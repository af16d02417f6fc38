//! Closed-form height and modular-unit inequalities, and the numeric solvers
//! that chain them into absolute bounds on `p` and on `x = |log|q||`.
//!
//! Every solver re-substitutes its answer: the returned value satisfies the
//! defining inequality and the next integer (or `x + 0.001`) violates it.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::char_sums::Kind;
use crate::error::{Error, Result};

/// Constant factor `2 sqrt(2) pi 101 / (10 sqrt(102))` of the fourth-root bound.
pub fn weil_stage_coefficient() -> f64 {
    2.0 * 2f64.sqrt() * PI * 101.0 / (10.0 * 102f64.sqrt())
}

/// Leading constant of the sharpened surjectivity inequality.
pub const SURJECTIVITY_FACTOR: f64 = 2530.0;
/// Additive constant of the sharpened surjectivity inequality.
pub const SURJECTIVITY_SHIFT: f64 = 1.94;
/// `x >= 30` hypothesis shared by the sharpened branches.
pub const X_FLOOR: f64 = 30.0;
/// Constant used to bound the `s < p` partial sums of the main table.
pub const C_MAIN: f64 = 4.25;
/// Constant used to bound the `s < p` partial sums of the gamma table.
pub const C_GAMMA: f64 = 2.81;
/// Published ceilings, asserted after solving.
pub const P_PIPELINE_CEILING: u64 = 103_000;
pub const X_FINAL_CEILING: f64 = 39.0;
pub const P_FINAL_CEILING: u64 = 20_400;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Range of `|log|q||` compatible with `|j| = j_abs` for `tau` in the standard
/// fundamental domain.
pub fn logq_vs_logj(j_abs: f64) -> Result<Interval> {
    if !(j_abs > 0.0) || !j_abs.is_finite() {
        return Err(Error::Domain(format!("|j| = {j_abs} must be positive")));
    }
    let hi = (j_abs + 970.8).ln();
    let lo = if j_abs >= 3500.0 { j_abs.ln() - LN_2 } else { 0.0 };
    Ok(Interval { lo, hi })
}

/// Faltings height bounds in terms of `x = |log|q||`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaltingsBounds {
    pub lower: f64,
    /// Only available for integral `j`.
    pub upper: Option<f64>,
}

impl FaltingsBounds {
    pub fn contains(&self, h: f64) -> bool {
        self.lower <= h && self.upper.map_or(true, |u| h <= u)
    }
}

/// Upper bound of the Faltings height for integral `j` at `x = |log|q||`.
fn faltings_upper(x: f64) -> f64 {
    x / 12.0 - 0.5 * x.ln() - 0.5 * LN_2 + PI * PI / (3.0 * x)
}

pub fn faltings_bounds(logq_abs: f64, integral_j: bool) -> Result<FaltingsBounds> {
    if !(logq_abs > 0.0) || !logq_abs.is_finite() {
        return Err(Error::Domain(format!("|log|q|| = {logq_abs} must be positive")));
    }
    let x = logq_abs;
    let q = (-x).exp();
    let lower = x / 12.0 - 0.5 * x.ln() - 0.5 * LN_2 - 2.0 * q / (1.0 - q);
    Ok(FaltingsBounds {
        lower,
        upper: integral_j.then(|| faltings_upper(x)),
    })
}

/// `2530 (h + 2 log p + 1.5 log Im(tau) + 1.94)`.
fn surjectivity_rhs(p: f64, h_f: f64, im_tau: f64) -> f64 {
    SURJECTIVITY_FACTOR * (h_f + 2.0 * p.ln() + 1.5 * im_tau.ln() + SURJECTIVITY_SHIFT)
}

/// Largest integer `p >= 1` with `p < F(p)`, for `F` concave and slowly growing.
///
/// Iterates `p <- F(p)` from 100 to the fixed point, then scans down from
/// just above it to the integer boundary.
fn largest_integer_below_fixed_point(f: impl Fn(f64) -> f64) -> Result<u64> {
    let mut p = 100.0;
    let mut converged = false;
    for _ in 0..100 {
        let next = f(p);
        if !next.is_finite() || next <= 0.0 {
            return Err(Error::Solver(format!("right side not positive at p = {p}")));
        }
        if (next - p).abs() < 1e-9 * p.max(1.0) {
            p = next;
            converged = true;
            break;
        }
        p = next;
    }
    if !converged {
        return Err(Error::Solver("fixed-point iteration did not converge in 100 steps".into()));
    }
    let mut n = p.ceil() as u64 + 2;
    while n > 1 && !((n as f64) < f(n as f64)) {
        n -= 1;
    }
    if !((n as f64) < f(n as f64)) {
        return Err(Error::Solver("no integer satisfies the inequality".into()));
    }
    Ok(n)
}

/// Largest integer `p` with `p < 2530 (h_f + 2 log p + 1.5 log im_tau + 1.94)`.
pub fn surjectivity_pmax(h_f: f64, im_tau: f64) -> Result<u64> {
    if im_tau < X_FLOOR / (2.0 * PI) - 1e-12 {
        return Err(Error::Hypothesis(format!(
            "Im(tau) = {im_tau} below 30/(2 pi): the sharpened branch needs |log|q|| >= 30"
        )));
    }
    largest_integer_below_fixed_point(|p| surjectivity_rhs(p, h_f, im_tau))
}

/// Fourth-root bound on `|log|q||` for primes `p > 100`, `p = 2 mod 3`.
pub fn weil_stage_x(p: u64) -> Result<f64> {
    if p <= 100 {
        return Err(Error::Domain(format!("p = {p} must exceed 100")));
    }
    Ok(weil_stage_x_real(p as f64))
}

fn weil_stage_x_real(p: f64) -> f64 {
    weil_stage_coefficient() * p.powf(0.25) + 1.65
}

/// Outcome of the first-stage solve for `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineBound {
    /// Largest integer `p` consistent with the chained inequality.
    pub p_max: u64,
    /// Largest prime `p = 2 mod 3`, `p > 100`, not exceeding `p_max`.
    pub largest_admissible_prime: u64,
    /// `x` used at `p_max`.
    pub x_at_p_max: f64,
}

/// Right side of the chained inequality at real `p`, with `x = max(30, x_of_p(p))`.
fn pipeline_rhs(p: f64, x_of_p: &dyn Fn(f64) -> f64) -> f64 {
    let x = x_of_p(p).max(X_FLOOR);
    surjectivity_rhs(p, faltings_upper(x), x / (2.0 * PI))
}

/// Solves the surjectivity inequality with `h_F` bounded through the
/// integral-j height bound and `x` through [`weil_stage_x`].
pub fn pipeline_pmax() -> Result<PipelineBound> {
    pipeline_pmax_with(Some(&weil_stage_x_real))
}

/// [`pipeline_pmax`] with a pluggable bound on `x`; `None` leaves `x`
/// unconstrained, which has no finite solution.
pub fn pipeline_pmax_with(x_of_p: Option<&dyn Fn(f64) -> f64>) -> Result<PipelineBound> {
    let Some(x_of_p) = x_of_p else {
        return Err(Error::NoBound(
            "without a bound on |log|q|| the height term is unbounded".into(),
        ));
    };
    let p_max = largest_integer_below_fixed_point(|p| pipeline_rhs(p, x_of_p))?;
    let largest_admissible_prime = (101..=p_max)
        .rev()
        .find(|&n| n % 3 == 2 && crate::primes::is_prime(n))
        .ok_or_else(|| Error::NoBound("no admissible prime below the bound".into()))?;
    Ok(PipelineBound {
        p_max,
        largest_admissible_prime,
        x_at_p_max: x_of_p(p_max as f64).max(X_FLOOR),
    })
}

/// Checks `p < F(p)` for the pipeline inequality.
pub fn pipeline_holds(p: u64) -> bool {
    (p as f64) < pipeline_rhs(p as f64, &weil_stage_x_real)
}

/// Bound on `|log|R||` (main) or `|log|R_gamma||` (gamma) after Abel summation.
pub fn abel_log_r_bound(p: u64, x: f64, c: f64, kind: Kind) -> Result<f64> {
    if x < X_FLOOR {
        return Err(Error::Hypothesis(format!("x = {x} < 30")));
    }
    if p <= 100 {
        return Err(Error::Domain(format!("p = {p} must exceed 100")));
    }
    let pf = p as f64;
    let main_term = 3.0 * c * pf * PI.sqrt() / x.sqrt() * 1.28;
    let cusp_term = 5.0 / 3.0 * PI * PI * (-x).exp() * pf * pf.sqrt();
    let tail_coeff = match kind {
        Kind::Main => 2.0,
        Kind::Gamma => 1.0,
    };
    let tail_term = tail_coeff * (pf + 1.0) * PI * PI / (3.0 * pf * x);
    Ok(main_term + cusp_term + tail_term)
}

/// Prime at which the final inequality is tightest.
pub const WORST_CASE_PRIME: u64 = 101;

/// `(p^2 - 1)/(12 p) x - 3 log p - |log|R_gamma|| bound`, with `p^4 |q| <= 2`.
///
/// Non-positive exactly when `x` is still allowed.
pub fn final_inequality_gap(x: f64, c_gamma: f64, p: u64) -> f64 {
    let pf = p as f64;
    let lhs = (pf * pf - 1.0) / (12.0 * pf) * x;
    let main_term = 3.0 * c_gamma * pf * PI.sqrt() / x.sqrt() * 1.28;
    // (5/3) pi^2 |q| p sqrt(p) with |q| <= 2/p^4
    let cusp_term = 10.0 * PI * PI / (3.0 * pf * pf * pf.sqrt());
    let tail_term = (pf + 1.0) * PI * PI / (3.0 * pf * x);
    lhs - 3.0 * pf.ln() - main_term - cusp_term - tail_term
}

/// Largest `x` in `[30, 200]` allowed by the final inequality at `p = 101`.
///
/// Returns 30 when no `x >= 30` survives (the `x < 30` case is handled
/// separately by hypothesis).
pub fn final_x_bound(c_gamma: f64) -> Result<f64> {
    if !(c_gamma >= 0.0) {
        return Err(Error::Domain(format!("C_gamma = {c_gamma} must be non-negative")));
    }
    let gap = |x: f64| final_inequality_gap(x, c_gamma, WORST_CASE_PRIME);
    let (mut lo, mut hi) = (X_FLOOR, 200.0);
    if gap(lo) > 0.0 {
        return Ok(X_FLOOR);
    }
    if gap(hi) <= 0.0 {
        return Err(Error::Solver(format!("x bound exceeds {hi}")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gap(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    Ok(lo)
}

/// `p <= (2 e^x)^{1/4}`, from `p^4 <= |j| <= 2 e^x`.
pub fn final_p_bound(x_final: f64) -> u64 {
    (2f64.powf(0.25) * (x_final / 4.0).exp()).floor() as u64
}

/// Half-width `(2 e^x)^{1/3} p^{-d/3}` of the admissible `c` range.
pub fn c_interval(p: u64, d: u32, x: f64) -> f64 {
    ((LN_2 + x - d as f64 * (p as f64).ln()) / 3.0).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantsUsed {
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "C_gamma")]
    pub c_gamma: f64,
}

/// Staged outputs of the bound pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub p_max_pipeline: u64,
    pub largest_admissible_prime: u64,
    pub x_weil_stage: f64,
    pub x_final: f64,
    pub p_max_final: u64,
    pub main_abel_bound_at_101: f64,
    pub gamma_abel_bound_at_101: f64,
    pub constants_used: ConstantsUsed,
}

/// Runs the whole chain and checks each published ceiling and each
/// re-substitution.
pub fn bound_report(c: f64, c_gamma: f64) -> Result<BoundReport> {
    let pipeline = pipeline_pmax()?;
    if !pipeline_holds(pipeline.p_max) || pipeline_holds(pipeline.p_max + 1) {
        return Err(Error::Solver("pipeline bound is not tight".into()));
    }
    if pipeline.p_max >= P_PIPELINE_CEILING {
        return Err(Error::Solver(format!(
            "p_max = {} not below {P_PIPELINE_CEILING}",
            pipeline.p_max
        )));
    }
    let x_final = final_x_bound(c_gamma)?;
    if x_final > X_FLOOR
        && (final_inequality_gap(x_final, c_gamma, WORST_CASE_PRIME) > 0.0
            || final_inequality_gap(x_final + 1e-3, c_gamma, WORST_CASE_PRIME) <= 0.0)
    {
        return Err(Error::Solver("x bound is not tight".into()));
    }
    if x_final >= X_FINAL_CEILING {
        return Err(Error::Solver(format!("x_final = {x_final} not below 39")));
    }
    let p_max_final = final_p_bound(x_final);
    if p_max_final >= P_FINAL_CEILING {
        return Err(Error::Solver(format!("p_max_final = {p_max_final} not below 20400")));
    }
    Ok(BoundReport {
        p_max_pipeline: pipeline.p_max,
        largest_admissible_prime: pipeline.largest_admissible_prime,
        x_weil_stage: pipeline.x_at_p_max,
        x_final,
        p_max_final,
        main_abel_bound_at_101: abel_log_r_bound(101, X_FLOOR, c, Kind::Main)?,
        gamma_abel_bound_at_101: abel_log_r_bound(101, X_FLOOR, c_gamma, Kind::Gamma)?,
        constants_used: ConstantsUsed { c, c_gamma },
    })
}
