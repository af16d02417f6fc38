//! Cube-coset fibers of F_{p^2}^x and their character-sum tables.
//!
//! For `a != 0` the fiber `F(a) = {b : a + b sqrt(eps) is a nonzero cube}`
//! satisfies `F(ka) = k F(1)`, so `c(k) = sum_{b in F(1)} e(kb/p)` is the
//! length-p DFT of the indicator of `F(1)`. The same holds for the fibers of
//! a non-trivial coset `u * cubes`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::RaderPlan;
use crate::field::{add_mod, inv_mod, mul_mod, PrimeModulus, QuadExt};

/// Which coset the table is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    /// The cube subgroup itself.
    Main,
    /// The non-trivial coset containing the first non-cube `(1, b)`.
    Gamma,
}

impl Kind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Kind::Main => "main",
            Kind::Gamma => "gamma",
        }
    }

    /// Exact value pinned at index 0: `(p-2)/3` or `(p+1)/3`.
    pub fn zero_value(&self, p: u64) -> f64 {
        match self {
            Kind::Main => ((p - 2) / 3) as f64,
            Kind::Gamma => ((p + 1) / 3) as f64,
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Kind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "main" => Ok(Kind::Main),
            "gamma" => Ok(Kind::Gamma),
            other => Err(format!("unknown kind '{other}' (expected main|gamma)")),
        }
    }
}

/// The fibers over `a = 1` of the cube subgroup and of one non-trivial coset.
#[derive(Debug, Clone, PartialEq)]
pub struct CubeCosetData {
    pub modulus: PrimeModulus,
    /// `F(1)`, sorted.
    pub fiber_main: Vec<u64>,
    /// `F_gamma(1)` for the coset `gamma_unit * cubes`, sorted.
    pub fiber_gamma: Vec<u64>,
    /// Coset representative: the first `(1, b)` in scan order `b = 1, 2, ...` that is not a cube.
    pub gamma_unit: QuadExt,
}

/// Montgomery batch inversion. All inputs must be nonzero.
fn batch_invert(values: &[u64], p: u64) -> Vec<u64> {
    let mut prefix = Vec::with_capacity(values.len());
    let mut acc = 1u64;
    for &v in values {
        prefix.push(acc);
        acc = mul_mod(acc, v, p);
    }
    let mut inv = inv_mod(acc, p);
    let mut out = vec![0u64; values.len()];
    for i in (0..values.len()).rev() {
        out[i] = mul_mod(inv, prefix[i], p);
        inv = mul_mod(inv, values[i], p);
    }
    out
}

/// Marks `b'/a'` for every projective point `(a' : b')` of `unit * z^3`, `a' != 0`.
///
/// `z` runs over `(1, t)` for `t in F_p` and over `sqrt(eps)`; together these
/// represent every class of `F_{p^2}^x / F_p^x`.
fn mark_coset_fiber(m: &PrimeModulus, unit: QuadExt) -> Vec<bool> {
    let p = m.p();
    let eps = m.epsilon();
    let mut num = Vec::with_capacity(p as usize + 1);
    let mut den = Vec::with_capacity(p as usize + 1);
    let push = |x: QuadExt, num: &mut Vec<u64>, den: &mut Vec<u64>| {
        let y = m.mul(unit, x);
        if y.a != 0 {
            num.push(y.b);
            den.push(y.a);
        }
    };
    for t in 0..p {
        let t2 = mul_mod(t, t, p);
        // (1 + t r)^3 = (1 + 3 eps t^2) + (3t + eps t^3) r
        let a = add_mod(1, mul_mod(3 * eps % p, t2, p), p);
        let b = add_mod(mul_mod(3, t, p), mul_mod(eps, mul_mod(t2, t, p), p), p);
        push(QuadExt::new(a, b), &mut num, &mut den);
    }
    // sqrt(eps)^3 = eps * sqrt(eps)
    push(QuadExt::new(0, eps % p), &mut num, &mut den);

    let inv = batch_invert(&den, p);
    let mut mark = vec![false; p as usize];
    for (n, i) in num.iter().zip(inv) {
        mark[mul_mod(*n, i, p) as usize] = true;
    }
    mark
}

fn collect_marked(mark: &[bool]) -> Vec<u64> {
    mark.iter()
        .enumerate()
        .filter_map(|(b, &m)| m.then_some(b as u64))
        .collect()
}

/// Fibers over `a = 1` of the cube subgroup and of the coset of the first non-cube.
pub fn cube_cosets(modulus: PrimeModulus) -> Result<CubeCosetData> {
    modulus.require_two_mod_three()?;
    let main_mark = mark_coset_fiber(&modulus, QuadExt::ONE);
    let first = (1..modulus.p())
        .find(|&b| !main_mark[b as usize])
        .expect("a non-cube (1, b) exists for p = 2 mod 3");
    let gamma_unit = QuadExt::new(1, first);
    let gamma_mark = mark_coset_fiber(&modulus, gamma_unit);
    Ok(CubeCosetData {
        modulus,
        fiber_main: collect_marked(&main_mark),
        fiber_gamma: collect_marked(&gamma_mark),
        gamma_unit,
    })
}

impl CubeCosetData {
    pub fn fiber(&self, kind: Kind) -> &[u64] {
        match kind {
            Kind::Main => &self.fiber_main,
            Kind::Gamma => &self.fiber_gamma,
        }
    }

    fn indicator(&self, kind: Kind) -> Vec<Complex64> {
        let mut x = vec![Complex64::new(0.0, 0.0); self.modulus.p() as usize];
        for &b in self.fiber(kind) {
            x[b as usize] = Complex64::new(1.0, 0.0);
        }
        x
    }
}

/// Character sums `c(m)` (or `c_gamma(m)`) for `m = 0..p-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct CharTable {
    pub modulus: PrimeModulus,
    pub kind: Kind,
    pub gamma_unit: QuadExt,
    pub values: Vec<Complex64>,
}

impl CharTable {
    pub fn p(&self) -> u64 {
        self.modulus.p()
    }

    #[inline]
    pub fn at(&self, m: u64) -> Complex64 {
        self.values[(m % self.p()) as usize]
    }

    /// Largest `|c(m)|` over `m != 0`.
    pub fn max_abs_nonzero(&self) -> f64 {
        self.values[1..].iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

fn table_from(data: &CubeCosetData, kind: Kind, plan: &RaderPlan) -> CharTable {
    let p = data.modulus.p();
    let mut values = plan.transform(&data.indicator(kind));
    values[0] = Complex64::new(kind.zero_value(p), 0.0);
    CharTable {
        modulus: data.modulus,
        kind,
        gamma_unit: data.gamma_unit,
        values,
    }
}

/// Builds the table for one kind.
pub fn char_table(modulus: PrimeModulus, kind: Kind) -> Result<CharTable> {
    let data = cube_cosets(modulus)?;
    let plan = RaderPlan::new(modulus.p())?;
    Ok(table_from(&data, kind, &plan))
}

/// Builds both tables sharing one coset enumeration and one Rader plan.
pub fn char_tables(modulus: PrimeModulus) -> Result<(CharTable, CharTable)> {
    let data = cube_cosets(modulus)?;
    let plan = RaderPlan::new(modulus.p())?;
    Ok((
        table_from(&data, Kind::Main, &plan),
        table_from(&data, Kind::Gamma, &plan),
    ))
}

/// Result of [`verify_weil`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeilReport {
    pub p: u64,
    pub max_ratio: f64,
    pub argmax_s: u64,
}

/// Slack on the ratio bound 4/3.
pub const WEIL_TOLERANCE: f64 = 1e-9;

/// Largest `|c(s)|/sqrt(p)` over `s != 0`; errors if it exceeds `4/3`.
pub fn verify_weil(table: &CharTable) -> Result<WeilReport> {
    if table.kind != Kind::Main {
        return Err(Error::WrongKind { expected: "main" });
    }
    let p = table.p();
    let sqrt_p = (p as f64).sqrt();
    let (argmax_s, max_ratio) = table.values[1..]
        .iter()
        .enumerate()
        .map(|(i, z)| (i as u64 + 1, z.norm() / sqrt_p))
        .fold((1, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
    if max_ratio > 4.0 / 3.0 + WEIL_TOLERANCE {
        return Err(Error::WeilViolation {
            p,
            s: argmax_s,
            ratio: max_ratio,
        });
    }
    Ok(WeilReport {
        p,
        max_ratio,
        argmax_s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn p5_fibers() {
        let d = cube_cosets(PrimeModulus::new(5).unwrap()).unwrap();
        assert_eq!(d.fiber_main, vec![0]);
        assert_eq!(d.gamma_unit, QuadExt::new(1, 1));
        assert_eq!(d.fiber_gamma, vec![1, 3]);
    }

    #[test]
    fn rejects_one_mod_three() {
        let m = PrimeModulus::new(7).unwrap();
        assert_eq!(cube_cosets(m), Err(Error::UnsupportedCongruence(7)));
        assert!(char_table(m, Kind::Main).is_err());
    }

    #[test]
    fn fiber_sizes_and_partition() {
        for p in crate::primes::primes_below(2000) {
            if p % 3 != 2 || p == 2 {
                continue;
            }
            let d = cube_cosets(PrimeModulus::new(p).unwrap()).unwrap();
            assert_eq!(d.fiber_main.len() as u64, (p - 2) / 3, "p={p}");
            assert_eq!(d.fiber_gamma.len() as u64, (p + 1) / 3, "p={p}");
            let mut seen = vec![0u8; p as usize];
            for &b in &d.fiber_main {
                seen[b as usize] += 1;
                assert!(d.fiber_main.binary_search(&((p - b) % p)).is_ok());
            }
            for &b in &d.fiber_gamma {
                seen[b as usize] += 1;
                seen[((p - b) % p) as usize] += 1;
            }
            assert!(seen.iter().all(|&c| c == 1), "p={p}");
        }
    }

    #[test]
    fn p5_tables() {
        let m = PrimeModulus::new(5).unwrap();
        let main = char_table(m, Kind::Main).unwrap();
        for v in &main.values {
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
        let gamma = char_table(m, Kind::Gamma).unwrap();
        assert!((gamma.values[1].re + 0.5).abs() < 1e-12);
        let want = Complex64::from_polar(1.0, 2.0 * PI / 5.0)
            + Complex64::from_polar(1.0, 6.0 * PI / 5.0);
        assert!((gamma.values[1] - want).norm() < 1e-12);
        assert_eq!(gamma.values[0], Complex64::new(2.0, 0.0));
    }

    #[test]
    fn weil_report_p5() {
        let t = char_table(PrimeModulus::new(5).unwrap(), Kind::Main).unwrap();
        let r = verify_weil(&t).unwrap();
        assert!((r.max_ratio - 1.0 / 5f64.sqrt()).abs() < 1e-12);
        let g = char_table(PrimeModulus::new(5).unwrap(), Kind::Gamma).unwrap();
        assert_eq!(verify_weil(&g), Err(Error::WrongKind { expected: "main" }));
    }

    #[test]
    fn weil_violation_reported() {
        let mut t = char_table(PrimeModulus::new(11).unwrap(), Kind::Main).unwrap();
        t.values[4] = Complex64::new(10.0, 0.0);
        match verify_weil(&t) {
            Err(Error::WeilViolation { p: 11, s: 4, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn batch_inversion() {
        let vals = [3u64, 5, 7, 100, 1];
        let inv = batch_invert(&vals, 101);
        for (v, i) in vals.iter().zip(inv) {
            assert_eq!(mul_mod(*v, i, 101), 1);
        }
    }

    #[test]
    fn kind_parse() {
        assert_eq!("main".parse::<Kind>().unwrap(), Kind::Main);
        assert_eq!("gamma".parse::<Kind>().unwrap(), Kind::Gamma);
        assert!("other".parse::<Kind>().is_err());
    }
}
