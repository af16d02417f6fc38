//! Candidate enumeration `j = p^d c^3` and the Frobenius cube sieve.
//!
//! A candidate is ruled out by a prime `l` of good reduction whose Frobenius
//! eigenvalues (roots of `t^2 - a_l t + l` over F_{p^2}) are not both cubes.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{
    inv_mod, is_square_fp, mul_mod, pow_mod, reduce_signed, sqrt_mod, PrimeModulus, QuadExt,
    Residuosity,
};
use crate::primes;

pub const DEFAULT_X_BOUND: f64 = 39.0;
pub const DEFAULT_ELL_MAX: u64 = 500;
/// Open range of primes left after the analytic bounds.
pub const P_RANGE: (u64, u64) = (100, 20_400);
pub const EXPONENTS: [u32; 2] = [4, 5];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Candidate {
    pub p: u64,
    pub d: u32,
    pub c: i64,
    pub j: i64,
}

impl Candidate {
    pub fn new(p: u64, d: u32, c: i64) -> Result<Self> {
        let j = (p as i128).pow(d) * (c as i128).pow(3);
        if c == 0 || j.abs() > i64::MAX as i128 {
            return Err(Error::Domain(format!("p = {p}, d = {d}, c = {c} out of range")));
        }
        Ok(Candidate { p, d, c, j: j as i64 })
    }

    /// `j mod l` from `p^d mod l` and `c^3 mod l`.
    pub fn j_mod(&self, ell: u64) -> u64 {
        let pd = pow_mod(self.p % ell, self.d as u64, ell);
        let c = reduce_signed(self.c as i128, ell);
        mul_mod(pd, pow_mod(c, 3, ell), ell)
    }
}

/// `floor(2 e^x)` as an integer; exact up to the last few units at x = 39.
fn j_ceiling(x_bound: f64) -> i128 {
    (2.0 * x_bound.exp()).floor() as i128
}

/// Largest `c >= 0` with `c^3 p^d <= floor(2 e^x)`.
pub fn c_max(p: u64, d: u32, x_bound: f64) -> i64 {
    let ceiling = j_ceiling(x_bound);
    let pd = (p as i128).pow(d);
    let mut c = ((2f64.ln() + x_bound - d as f64 * (p as f64).ln()) / 3.0)
        .exp()
        .floor() as i128;
    while c > 0 && c * c * c * pd > ceiling {
        c -= 1;
    }
    while (c + 1) * (c + 1) * (c + 1) * pd <= ceiling {
        c += 1;
    }
    c as i64
}

/// Primes in `(lo, hi)` congruent to 2 or 5 mod 9.
pub fn candidate_primes(p_range: (u64, u64)) -> Vec<u64> {
    primes::primes_in_classes(p_range.1, 9, &[2, 5])
        .into_iter()
        .filter(|&p| p > p_range.0)
        .collect()
}

/// All `(p, d, c)` with `0 < |c| <= (2 e^x)^{1/3} p^{-d/3}`, ordered by
/// `p`, then `d`, then `c`.
pub fn enumerate_candidates(x_bound: f64, p_range: (u64, u64)) -> Vec<Candidate> {
    let mut out = Vec::new();
    for p in candidate_primes(p_range) {
        for d in EXPONENTS {
            let m = c_max(p, d, x_bound);
            for c in (-m..=m).filter(|&c| c != 0) {
                out.push(Candidate::new(p, d, c).expect("c range keeps j below 2e^x"));
            }
        }
    }
    out
}

/// Number of candidates without materialising them.
pub fn candidate_count(x_bound: f64, p_range: (u64, u64)) -> u64 {
    candidate_primes(p_range)
        .into_iter()
        .flat_map(|p| EXPONENTS.map(|d| 2 * c_max(p, d, x_bound) as u64))
        .sum()
}

/// `sum 2 c_max(n, d)` over every integer `n` in `(lo, hi)` and `d in {4, 5}`,
/// with no primality or congruence filter.
pub fn integer_census(x_bound: f64, p_range: (u64, u64)) -> u64 {
    (p_range.0 + 1..p_range.1)
        .flat_map(|n| EXPONENTS.map(|d| 2 * c_max(n, d, x_bound) as u64))
        .sum()
}

/// Short Weierstrass model `y^2 = x^3 + A x + B` mod l.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Reduction {
    Good { a: u64, b: u64 },
    Bad,
}

fn check_ell(ell: u64) -> Result<()> {
    if ell == 2 || ell == 3 {
        return Err(Error::SkippedPrime {
            ell,
            reason: "residue characteristic 2 or 3",
        });
    }
    Ok(())
}

/// Model `A = 3 j (1728 - j)`, `B = 2 j (1728 - j)^2` from `j mod l`.
pub fn model_from_j(j_bar: u64, ell: u64) -> Result<Reduction> {
    check_ell(ell)?;
    let j = j_bar % ell;
    let k = 1728 % ell;
    if j == 0 || j == k {
        return Ok(Reduction::Bad);
    }
    let t = (k + ell - j) % ell;
    let a = mul_mod(3, mul_mod(j, t, ell), ell);
    let b = mul_mod(2, mul_mod(j, mul_mod(t, t, ell), ell), ell);
    if discriminant(a, b, ell) == 0 {
        return Ok(Reduction::Bad);
    }
    Ok(Reduction::Good { a, b })
}

/// Reduction of a candidate's curve at `l`.
pub fn curve_mod_ell(cand: &Candidate, ell: u64) -> Result<Reduction> {
    check_ell(ell)?;
    if ell == cand.p {
        return Err(Error::SkippedPrime {
            ell,
            reason: "l equals p",
        });
    }
    model_from_j(cand.j_mod(ell), ell)
}

/// `4 A^3 + 27 B^2 mod l`.
pub fn discriminant(a: u64, b: u64, ell: u64) -> u64 {
    let a3 = pow_mod(a % ell, 3, ell);
    let b2 = mul_mod(b % ell, b % ell, ell);
    (mul_mod(4, a3, ell) + mul_mod(27 % ell, b2, ell)) % ell
}

/// `j = 1728 * 4A^3 / (4A^3 + 27B^2) mod l`.
pub fn j_invariant(a: u64, b: u64, ell: u64) -> Result<u64> {
    let disc = discriminant(a, b, ell);
    if disc == 0 {
        return Err(Error::Domain(format!("singular curve mod {ell}")));
    }
    let num = mul_mod(1728 % ell, mul_mod(4, pow_mod(a % ell, 3, ell), ell), ell);
    Ok(mul_mod(num, inv_mod(disc, ell), ell))
}

/// Quadratic character of F_l as a lookup table.
#[derive(Debug, Clone)]
pub struct QuadraticCharacter {
    ell: u64,
    chi: Vec<i8>,
}

impl QuadraticCharacter {
    pub fn new(ell: u64) -> Self {
        let mut chi = vec![-1i8; ell as usize];
        chi[0] = 0;
        for x in 1..ell {
            chi[mul_mod(x, x, ell) as usize] = 1;
        }
        QuadraticCharacter { ell, chi }
    }

    pub fn ell(&self) -> u64 {
        self.ell
    }

    #[inline]
    pub fn at(&self, x: u64) -> i64 {
        self.chi[(x % self.ell) as usize] as i64
    }

    /// `l + 1 + sum_x chi(x^3 + A x + B)`.
    pub fn count_points(&self, a: u64, b: u64) -> Result<u64> {
        let ell = self.ell;
        if discriminant(a, b, ell) == 0 {
            return Err(Error::Domain(format!("singular curve mod {ell}")));
        }
        let (a, b) = (a % ell, b % ell);
        let mut s = 0i64;
        for x in 0..ell {
            let x2 = mul_mod(x, x, ell);
            let rhs = (mul_mod(x2 + a, x, ell) + b) % ell;
            s += self.at(rhs);
        }
        let trace = -s;
        if (trace * trace) as u64 > 4 * ell {
            return Err(Error::Structural(format!(
                "Hasse bound violated: a = {trace} at l = {ell}"
            )));
        }
        Ok((ell as i64 + 1 + s) as u64)
    }
}

/// `|E(F_l)|` for `y^2 = x^3 + A x + B`, point at infinity included.
pub fn count_points(a: u64, b: u64, ell: u64) -> Result<u64> {
    QuadraticCharacter::new(ell).count_points(a, b)
}

/// Roots of `t^2 - a t + l` in F_{p^2}, each checked against the polynomial.
pub fn frobenius_roots(a_ell: i64, ell: u64, m: &PrimeModulus) -> Result<[QuadExt; 2]> {
    let p = m.p();
    if ell % p == 0 {
        return Err(Error::Domain(format!("l = {ell} divisible by p = {p}")));
    }
    let a = reduce_signed(a_ell as i128, p);
    let l = ell % p;
    let half = inv_mod(2, p);
    let disc = reduce_signed(a as i128 * a as i128 - 4 * l as i128, p);
    let roots = match is_square_fp(disc, p) {
        Residuosity::Zero => {
            let r = QuadExt::new(mul_mod(a, half, p), 0);
            [r, r]
        }
        Residuosity::Square => {
            let s = sqrt_mod(disc, p).expect("square has a root");
            [
                QuadExt::new(mul_mod((a + s) % p, half, p), 0),
                QuadExt::new(mul_mod((a + p - s) % p, half, p), 0),
            ]
        }
        Residuosity::NonSquare => {
            // disc = eps w^2
            let w = sqrt_mod(mul_mod(disc, inv_mod(m.epsilon(), p), p), p)
                .expect("disc / eps is a square");
            let r = QuadExt::new(mul_mod(a, half, p), mul_mod(w, half, p));
            [r, m.conj(r)]
        }
    };
    for r in roots {
        let val = m.add(
            m.sub(m.mul(r, r), m.mul(QuadExt::new(a, 0), r)),
            QuadExt::new(l, 0),
        );
        if !val.is_zero() {
            return Err(Error::Structural(format!(
                "root {r:?} does not satisfy t^2 - {a_ell} t + {ell} mod {p}"
            )));
        }
    }
    Ok(roots)
}

/// Whether both Frobenius eigenvalues are cubes in F_{p^2}^x.
pub fn frobenius_roots_are_cubes(a_ell: i64, ell: u64, m: &PrimeModulus) -> Result<bool> {
    let roots = frobenius_roots(a_ell, ell, m)?;
    for r in roots {
        if !m.is_cube(r)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    RuledOut,
    NotRuledOut,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::RuledOut => "ruled_out",
            Status::NotRuledOut => "not_ruled_out",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub candidate: Candidate,
    pub witness_ell: Option<u64>,
    pub a_ell: Option<i64>,
    pub status: Status,
}

/// Character tables for every prime `5 <= l <= ell_max`.
pub struct SieveContext {
    ell_max: u64,
    characters: Vec<QuadraticCharacter>,
}

impl SieveContext {
    pub fn new(ell_max: u64) -> Self {
        let characters = primes::primes_below(ell_max + 1)
            .into_iter()
            .filter(|&l| l >= 5)
            .map(QuadraticCharacter::new)
            .collect();
        SieveContext {
            ell_max,
            characters,
        }
    }

    pub fn ell_max(&self) -> u64 {
        self.ell_max
    }

    /// First prime `l` whose Frobenius eigenvalues are not both cubes.
    pub fn rule_out(&self, cand: &Candidate) -> Result<Verdict> {
        let m = PrimeModulus::new_cartan(cand.p)?;
        for chi in &self.characters {
            let ell = chi.ell();
            if ell == cand.p {
                continue;
            }
            let (a, b) = match curve_mod_ell(cand, ell)? {
                Reduction::Good { a, b } => (a, b),
                Reduction::Bad => continue,
            };
            let a_ell = ell as i64 + 1 - chi.count_points(a, b)? as i64;
            if !frobenius_roots_are_cubes(a_ell, ell, &m)? {
                return Ok(Verdict {
                    candidate: *cand,
                    witness_ell: Some(ell),
                    a_ell: Some(a_ell),
                    status: Status::RuledOut,
                });
            }
        }
        Ok(Verdict {
            candidate: *cand,
            witness_ell: None,
            a_ell: None,
            status: Status::NotRuledOut,
        })
    }
}

pub fn rule_out(cand: &Candidate, ell_max: u64) -> Result<Verdict> {
    SieveContext::new(ell_max).rule_out(cand)
}

/// Verdicts in candidate order, computed on `threads` workers.
pub fn run_sieve(candidates: &[Candidate], ell_max: u64, threads: usize) -> Result<Vec<Verdict>> {
    let ctx = SieveContext::new(ell_max);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Solver(format!("thread pool: {e}")))?;
    pool.install(|| candidates.par_iter().map(|c| ctx.rule_out(c)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SieveSummary {
    pub candidates: u64,
    pub ruled_out: u64,
    pub max_witness_ell: u64,
    pub wall_time_seconds: f64,
}

impl SieveSummary {
    pub fn all_ruled_out(&self) -> bool {
        self.ruled_out == self.candidates
    }
}

pub fn summarize(verdicts: &[Verdict], started: Instant) -> SieveSummary {
    SieveSummary {
        candidates: verdicts.len() as u64,
        ruled_out: verdicts
            .iter()
            .filter(|v| v.status == Status::RuledOut)
            .count() as u64,
        max_witness_ell: verdicts.iter().filter_map(|v| v.witness_ell).max().unwrap_or(0),
        wall_time_seconds: started.elapsed().as_secs_f64(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_range_matches_float_bound() {
        for (p, d) in [(101u64, 4u32), (2003, 4), (2003, 5), (20_399, 5)] {
            let m = c_max(p, d, 39.0);
            let f = crate::bounds::c_interval(p, d, 39.0);
            assert_eq!(m, f.floor() as i64, "p={p} d={d}");
        }
        assert_eq!(c_max(2003, 4, 39.0), 22);
        assert_eq!(c_max(20_399, 5, 39.0), 0);
    }

    #[test]
    fn enumeration_order_and_invariants() {
        let cands = enumerate_candidates(39.0, (100, 400));
        assert_eq!(cands.len() as u64, candidate_count(39.0, (100, 400)));
        for w in cands.windows(2) {
            let (a, b) = (w[0], w[1]);
            assert!((a.p, a.d, a.c) < (b.p, b.d, b.c));
        }
        for c in &cands {
            assert!(matches!(c.p % 9, 2 | 5));
            assert!(c.c != 0 && c.j % (c.p as i64).pow(4) == 0);
            assert!((c.j as f64).abs() <= 2.0 * 39f64.exp());
        }
    }

    #[test]
    fn j_mod_by_exponentiation() {
        let c = Candidate::new(2003, 4, 1).unwrap();
        assert_eq!(c.j_mod(5), (2003u64.pow(4) % 5));
        let c = Candidate::new(103, 5, -7).unwrap();
        for ell in [5u64, 7, 11, 97] {
            assert_eq!(c.j_mod(ell), reduce_signed(c.j as i128, ell));
        }
    }

    #[test]
    fn model_has_the_right_j() {
        for ell in [5u64, 7, 13, 101] {
            for j in 0..ell {
                match model_from_j(j, ell).unwrap() {
                    Reduction::Bad => assert!(j == 0 || j == 1728 % ell),
                    Reduction::Good { a, b } => assert_eq!(j_invariant(a, b, ell).unwrap(), j),
                }
            }
        }
        assert!(matches!(model_from_j(1, 3), Err(Error::SkippedPrime { .. })));
        let c = Candidate::new(101, 4, 1).unwrap();
        assert!(matches!(curve_mod_ell(&c, 101), Err(Error::SkippedPrime { .. })));
    }

    #[test]
    fn point_count_example() {
        assert_eq!(count_points(1, 1, 5).unwrap(), 9);
        assert!(count_points(0, 0, 7).is_err());
    }

    #[test]
    fn frobenius_examples() {
        let m = PrimeModulus::new(5).unwrap();
        // a = 0: roots +-sqrt(-l)
        for ell in [7u64, 11, 13, 17] {
            assert!(frobenius_roots_are_cubes(0, ell, &m).unwrap());
        }
        let r = frobenius_roots(1, 7, &m).unwrap();
        assert_ne!(r[0].b, 0);
        assert!(frobenius_roots(1, 10, &m).is_err());
    }

    #[test]
    fn tiny_ell_max_falls_through() {
        let c = Candidate::new(101, 4, 1).unwrap();
        let v = rule_out(&c, 5).unwrap();
        if v.status == Status::NotRuledOut {
            assert!(v.witness_ell.is_none());
        } else {
            assert_eq!(v.witness_ell, Some(5));
        }
        let v = rule_out(&c, 4).unwrap();
        assert_eq!(v.status, Status::NotRuledOut);
    }

    #[test]
    fn small_sieve_is_scheduler_independent() {
        let cands = enumerate_candidates(39.0, (100, 300));
        let a = run_sieve(&cands, 500, 1).unwrap();
        let b = run_sieve(&cands, 500, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|v| v.status == Status::RuledOut));
    }
}
