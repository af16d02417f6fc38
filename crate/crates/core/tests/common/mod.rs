//! Brute-force oracles, written without the library's fast paths.
#![allow(dead_code)]

use std::collections::HashSet;
use std::f64::consts::PI;

use num_complex::Complex64;

pub fn least_nonresidue(p: u64) -> u64 {
    let squares: HashSet<u64> = (1..p).map(|x| x * x % p).collect();
    (2..p).find(|n| !squares.contains(n)).unwrap()
}

/// F_{p^2} = F_p[r]/(r^2 - eps), elements as pairs.
#[derive(Clone, Copy)]
pub struct Fp2 {
    pub p: u64,
    pub eps: u64,
}

impl Fp2 {
    pub fn new(p: u64) -> Self {
        Fp2 { p, eps: least_nonresidue(p) }
    }

    pub fn mul(&self, x: (u64, u64), y: (u64, u64)) -> (u64, u64) {
        let p = self.p;
        ((x.0 * y.0 + self.eps * (x.1 * y.1 % p)) % p, (x.0 * y.1 + x.1 * y.0) % p)
    }

    pub fn elements(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        (0..self.p).flat_map(move |a| (0..self.p).map(move |b| (a, b)))
    }

    /// `{z^3 : z != 0}` by cubing every nonzero element.
    pub fn cubes(&self) -> HashSet<(u64, u64)> {
        self.elements()
            .filter(|&z| z != (0, 0))
            .map(|z| self.mul(z, self.mul(z, z)))
            .collect()
    }
}

/// `c(m)` (gamma = false) or `c_gamma(m)` by a double loop over the
/// exhaustive cube set.
pub fn brute_char_table(p: u64, gamma: bool) -> Vec<Complex64> {
    let f = Fp2::new(p);
    let cubes = f.cubes();
    let fiber: Vec<u64> = if gamma {
        let b0 = (1..p).find(|&b| !cubes.contains(&(1, b))).unwrap();
        let u = (1, b0);
        let coset: HashSet<(u64, u64)> = cubes.iter().map(|&z| f.mul(u, z)).collect();
        (0..p).filter(|&b| coset.contains(&(1, b))).collect()
    } else {
        (0..p).filter(|&b| cubes.contains(&(1, b))).collect()
    };
    (0..p)
        .map(|m| {
            fiber
                .iter()
                .map(|&b| {
                    let t = 2.0 * PI * ((m * b) % p) as f64 / p as f64;
                    Complex64::new(t.cos(), t.sin())
                })
                .sum()
        })
        .collect()
}

/// Affine solutions of `y^2 = x^3 + a x + b` plus the point at infinity.
pub fn naive_point_count(a: u64, b: u64, ell: u64) -> u64 {
    let mut n = 1;
    for x in 0..ell {
        let rhs = (x * x % ell * x + a * x + b) % ell;
        for y in 0..ell {
            if y * y % ell == rhs {
                n += 1;
            }
        }
    }
    n
}

/// Whether every root of `t^2 - a t + l` in F_{p^2} lies in the cube set.
pub fn brute_roots_are_cubes(a: i64, ell: u64, p: u64) -> bool {
    let f = Fp2::new(p);
    let cubes = f.cubes();
    let a = a.rem_euclid(p as i64) as u64;
    let l = ell % p;
    let roots: Vec<(u64, u64)> = f
        .elements()
        .filter(|&z| {
            let z2 = f.mul(z, z);
            let az = f.mul((a, 0), z);
            ((z2.0 + p - az.0 + l) % p, (z2.1 + p - az.1) % p) == (0, 0)
        })
        .collect();
    assert!(!roots.is_empty() && roots.len() <= 2);
    roots.iter().all(|r| cubes.contains(r))
}

pub fn small_primes(lo: u64, hi: u64) -> Vec<u64> {
    (lo.max(2)..hi)
        .filter(|&n| (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0))
        .collect()
}
