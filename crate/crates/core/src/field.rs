//! Arithmetic in F_p and in the quadratic extension F_{p^2} = F_p(sqrt(eps)),
//! where eps is the least positive quadratic non-residue mod p.

use crate::error::{Error, Result};
use crate::primes;

#[inline]
pub fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

#[inline]
pub fn add_mod(a: u64, b: u64, p: u64) -> u64 {
    let s = a as u128 + b as u128;
    (s % p as u128) as u64
}

#[inline]
pub fn sub_mod(a: u64, b: u64, p: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        (p - b) + a
    }
}

pub fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

/// Inverse of a nonzero residue (Fermat).
#[inline]
pub fn inv_mod(a: u64, p: u64) -> u64 {
    debug_assert!(a % p != 0);
    pow_mod(a, p - 2, p)
}

/// Reduces a signed integer to `[0, p)`.
#[inline]
pub fn reduce_signed(n: i128, p: u64) -> u64 {
    n.rem_euclid(p as i128) as u64
}

/// Quadratic residuosity of a residue mod an odd prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Residuosity {
    Square,
    NonSquare,
    Zero,
}

/// Euler's criterion.
pub fn is_square_fp(n: u64, p: u64) -> Residuosity {
    let n = n % p;
    if n == 0 {
        return Residuosity::Zero;
    }
    if pow_mod(n, (p - 1) / 2, p) == 1 {
        Residuosity::Square
    } else {
        Residuosity::NonSquare
    }
}

fn check_odd_prime(p: u64) -> Result<()> {
    if p <= 2 || !primes::is_prime(p) {
        return Err(Error::InvalidModulus(p));
    }
    Ok(())
}

/// Smallest n >= 2 with n^((p-1)/2) = -1 mod p.
pub fn least_nonresidue(p: u64) -> Result<u64> {
    check_odd_prime(p)?;
    let mut n = 2;
    while is_square_fp(n, p) != Residuosity::NonSquare {
        n += 1;
    }
    Ok(n)
}

/// Square root of a quadratic residue mod an odd prime (Tonelli-Shanks).
/// Returns `None` for non-residues.
pub fn sqrt_mod(n: u64, p: u64) -> Option<u64> {
    let n = n % p;
    match is_square_fp(n, p) {
        Residuosity::Zero => return Some(0),
        Residuosity::NonSquare => return None,
        Residuosity::Square => {}
    }
    if p % 4 == 3 {
        return Some(pow_mod(n, (p + 1) / 4, p));
    }
    let mut q = p - 1;
    let mut s = 0u32;
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let z = (2..p)
        .find(|&z| is_square_fp(z, p) == Residuosity::NonSquare)
        .expect("odd prime has a non-residue");
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(n, q, p);
    let mut r = pow_mod(n, (q + 1) / 2, p);
    while t != 1 {
        let mut i = 0;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mul_mod(t2, t2, p);
            i += 1;
        }
        let b = pow_mod(c, 1 << (m - i - 1), p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    Some(r)
}

/// Smallest generator of F_p^x.
pub fn primitive_root(p: u64) -> Result<u64> {
    check_odd_prime(p)?;
    let factors = primes::prime_factors(p - 1);
    (2..p)
        .find(|&g| factors.iter().all(|&f| pow_mod(g, (p - 1) / f, p) != 1))
        .ok_or(Error::InvalidModulus(p))
}

/// An element `a + b*sqrt(eps)` of F_{p^2}. Coordinates are kept reduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuadExt {
    pub a: u64,
    pub b: u64,
}

impl QuadExt {
    pub const ONE: QuadExt = QuadExt { a: 1, b: 0 };
    pub const ZERO: QuadExt = QuadExt { a: 0, b: 0 };

    pub const fn new(a: u64, b: u64) -> Self {
        QuadExt { a, b }
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0 && self.b == 0
    }
}

/// An odd prime together with its canonical non-residue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeModulus {
    p: u64,
    epsilon: u64,
}

impl PrimeModulus {
    pub fn new(p: u64) -> Result<Self> {
        let epsilon = least_nonresidue(p)?;
        Ok(PrimeModulus { p, epsilon })
    }

    /// Like [`PrimeModulus::new`] but also requires `p = 2 mod 3`.
    pub fn new_cartan(p: u64) -> Result<Self> {
        let m = Self::new(p)?;
        m.require_two_mod_three()?;
        Ok(m)
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn epsilon(&self) -> u64 {
        self.epsilon
    }

    pub fn require_two_mod_three(&self) -> Result<()> {
        if self.p % 3 != 2 {
            return Err(Error::UnsupportedCongruence(self.p));
        }
        Ok(())
    }

    pub fn elem(&self, a: i128, b: i128) -> QuadExt {
        QuadExt::new(reduce_signed(a, self.p), reduce_signed(b, self.p))
    }

    #[inline]
    pub fn add(&self, x: QuadExt, y: QuadExt) -> QuadExt {
        QuadExt::new(add_mod(x.a, y.a, self.p), add_mod(x.b, y.b, self.p))
    }

    #[inline]
    pub fn sub(&self, x: QuadExt, y: QuadExt) -> QuadExt {
        QuadExt::new(sub_mod(x.a, y.a, self.p), sub_mod(x.b, y.b, self.p))
    }

    /// (a1 + b1 r)(a2 + b2 r) = (a1 a2 + eps b1 b2) + (a1 b2 + a2 b1) r, with r^2 = eps.
    #[inline]
    pub fn mul(&self, x: QuadExt, y: QuadExt) -> QuadExt {
        let p = self.p as u128;
        let bb = (x.b as u128 * y.b as u128) % p;
        let a = (x.a as u128 * y.a as u128 + bb * self.epsilon as u128) % p;
        let b = (x.a as u128 * y.b as u128 + x.b as u128 * y.a as u128) % p;
        QuadExt::new(a as u64, b as u64)
    }

    /// Norm a^2 - eps b^2 in F_p.
    pub fn norm(&self, x: QuadExt) -> u64 {
        let p = self.p;
        sub_mod(
            mul_mod(x.a, x.a, p),
            mul_mod(self.epsilon, mul_mod(x.b, x.b, p), p),
            p,
        )
    }

    /// Frobenius conjugate a - b sqrt(eps).
    pub fn conj(&self, x: QuadExt) -> QuadExt {
        QuadExt::new(x.a, sub_mod(0, x.b, self.p))
    }

    pub fn inv(&self, x: QuadExt) -> Result<QuadExt> {
        if x.is_zero() {
            return Err(Error::ZeroElement);
        }
        let n_inv = inv_mod(self.norm(x), self.p);
        let c = self.conj(x);
        Ok(QuadExt::new(
            mul_mod(c.a, n_inv, self.p),
            mul_mod(c.b, n_inv, self.p),
        ))
    }

    /// Square-and-multiply; `x^0 = 1`.
    pub fn qe_pow(&self, mut x: QuadExt, mut e: u128) -> QuadExt {
        let mut acc = QuadExt::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, x);
            }
            x = self.mul(x, x);
            e >>= 1;
        }
        acc
    }

    /// Order of F_{p^2}^x.
    pub fn group_order(&self) -> u128 {
        let p = self.p as u128;
        p * p - 1
    }

    /// `x` is a cube in F_{p^2}^x iff `x^((p^2-1)/3) = 1`. Needs p = 2 mod 3.
    pub fn is_cube(&self, x: QuadExt) -> Result<bool> {
        if x.is_zero() {
            return Err(Error::ZeroElement);
        }
        self.require_two_mod_three()?;
        Ok(self.qe_pow(x, self.group_order() / 3) == QuadExt::ONE)
    }
}
