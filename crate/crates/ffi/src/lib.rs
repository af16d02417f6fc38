//! C interface to `cartan-core`.
//!
//! Every entry point returns a [`CartanStatus`]; on failure the message is
//! available from [`cartan_last_error`] on the same thread. Objects are
//! handed out as opaque pointers and must be released with the matching
//! `*_free` function.

use std::cell::RefCell;
use std::ffi::CString;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use libc::c_char;

use cartan_core::bounds;
use cartan_core::char_sums::{char_table, CharTable, Kind};
use cartan_core::field::{PrimeModulus, QuadExt};
use cartan_core::partial_sums::{d_scan, sigma_minus1_table};
use cartan_core::sieve::{self, Candidate, SieveContext, Status};
use cartan_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CartanStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    Hypothesis = 4,
    Solver = 5,
    Structural = 6,
    Io = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CartanKind {
    Main = 0,
    Gamma = 1,
}

impl From<CartanKind> for Kind {
    fn from(k: CartanKind) -> Self {
        match k {
            CartanKind::Main => Kind::Main,
            CartanKind::Gamma => Kind::Gamma,
        }
    }
}

/// Opaque table of `c(m)` or `c_gamma(m)` for one prime.
pub struct CartanCharTable {
    inner: CharTable,
}

/// Opaque sieve state (quadratic characters up to `ell_max`).
pub struct CartanSieve {
    inner: SieveContext,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CartanBounds {
    pub p_max_pipeline: u64,
    pub x_final: f64,
    pub p_max_final: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CartanVerdict {
    /// 1 if a witness prime was found.
    pub ruled_out: i32,
    /// 0 when not ruled out.
    pub witness_ell: u64,
    pub a_ell: i64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> CartanStatus {
    match e {
        Error::InvalidModulus(_)
        | Error::UnsupportedCongruence(_)
        | Error::ZeroElement
        | Error::WrongKind { .. }
        | Error::SkippedPrime { .. } => CartanStatus::InvalidArgument,
        Error::Domain(_) | Error::InsufficientTruncation { .. } => CartanStatus::Domain,
        Error::Hypothesis(_) => CartanStatus::Hypothesis,
        Error::Solver(_) | Error::NoBound(_) | Error::PartialScan { .. } => CartanStatus::Solver,
        Error::WeilViolation { .. } | Error::Structural(_) => CartanStatus::Structural,
        Error::Io(_) => CartanStatus::Io,
    }
}

/// Runs `f`, translating errors and panics into a status code.
fn guard<F>(f: F) -> CartanStatus
where
    F: FnOnce() -> Result<(), (CartanStatus, String)>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CartanStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside cartan".into());
            CartanStatus::Panic
        }
    }
}

fn core<T>(r: cartan_core::Result<T>) -> Result<T, (CartanStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), (CartanStatus, String)> {
    if p.is_null() {
        Err((CartanStatus::NullPointer, format!("{name} is null")))
    } else {
        Ok(())
    }
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cartan_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds the character-sum table for prime `p = 2 mod 3`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn cartan_char_table_new(
    p: u64,
    kind: CartanKind,
    out: *mut *mut CartanCharTable,
) -> CartanStatus {
    guard(|| {
        non_null(out, "out")?;
        let modulus = core(PrimeModulus::new_cartan(p))?;
        let inner = core(char_table(modulus, kind.into()))?;
        *out = Box::into_raw(Box::new(CartanCharTable { inner }));
        Ok(())
    })
}

/// # Safety
/// `table` must come from [`cartan_char_table_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cartan_char_table_free(table: *mut CartanCharTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Number of entries (`p`); 0 for a null table.
///
/// # Safety
/// `table` must be null or a live table.
#[no_mangle]
pub unsafe extern "C" fn cartan_char_table_len(table: *const CartanCharTable) -> usize {
    table.as_ref().map_or(0, |t| t.inner.values.len())
}

/// `c(m mod p)` as real and imaginary parts.
///
/// # Safety
/// `table` must be a live table; `re` and `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cartan_char_table_get(
    table: *const CartanCharTable,
    m: u64,
    re: *mut f64,
    im: *mut f64,
) -> CartanStatus {
    guard(|| {
        non_null(table, "table")?;
        non_null(re, "re")?;
        non_null(im, "im")?;
        let z = (*table).inner.at(m);
        *re = z.re;
        *im = z.im;
        Ok(())
    })
}

/// `max_{s<p} |D(s)| / sqrt(ps)` and the `s` attaining it.
///
/// # Safety
/// `table` must be a live table; `c_p` and `argmax_s` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cartan_char_table_partial_sum_constant(
    table: *const CartanCharTable,
    c_p: *mut f64,
    argmax_s: *mut u64,
) -> CartanStatus {
    guard(|| {
        non_null(table, "table")?;
        non_null(c_p, "c_p")?;
        non_null(argmax_s, "argmax_s")?;
        let t = &(*table).inner;
        let rec = core(d_scan(t, &sigma_minus1_table(t.p() as usize)))?;
        *c_p = rec.c_p;
        *argmax_s = rec.argmax_s;
        Ok(())
    })
}

/// Whether `a + b sqrt(eps)` is a cube in F_{p^2}, `eps` the least non-residue.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cartan_is_cube(p: u64, a: u64, b: u64, out: *mut i32) -> CartanStatus {
    guard(|| {
        non_null(out, "out")?;
        let m = core(PrimeModulus::new_cartan(p))?;
        *out = core(m.is_cube(QuadExt::new(a % p, b % p)))? as i32;
        Ok(())
    })
}

/// `|E(F_l)|` for `y^2 = x^3 + a x + b`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cartan_count_points(a: u64, b: u64, ell: u64, out: *mut u64) -> CartanStatus {
    guard(|| {
        non_null(out, "out")?;
        if ell < 5 || !cartan_core::primes::is_prime(ell) {
            return Err((CartanStatus::InvalidArgument, format!("l = {ell} must be a prime >= 5")));
        }
        *out = core(sieve::count_points(a, b, ell))?;
        Ok(())
    })
}

/// Solves the analytic bound chain with the default constants.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cartan_bounds(out: *mut CartanBounds) -> CartanStatus {
    guard(|| {
        non_null(out, "out")?;
        let r = core(bounds::bound_report(bounds::C_MAIN, bounds::C_GAMMA))?;
        *out = CartanBounds {
            p_max_pipeline: r.p_max_pipeline,
            x_final: r.x_final,
            p_max_final: r.p_max_final,
        };
        Ok(())
    })
}

/// Largest `|log|q||` allowed at `p = 101` for the given `C_gamma`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cartan_final_x_bound(c_gamma: f64, out: *mut f64) -> CartanStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = core(bounds::final_x_bound(c_gamma))?;
        Ok(())
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cartan_sieve_new(ell_max: u64, out: *mut *mut CartanSieve) -> CartanStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = Box::into_raw(Box::new(CartanSieve {
            inner: SieveContext::new(ell_max),
        }));
        Ok(())
    })
}

/// # Safety
/// `sieve` must come from [`cartan_sieve_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cartan_sieve_free(sieve: *mut CartanSieve) {
    if !sieve.is_null() {
        drop(Box::from_raw(sieve));
    }
}

/// Looks for a witness prime for `j = p^d c^3`.
///
/// # Safety
/// `sieve` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cartan_sieve_rule_out(
    sieve: *const CartanSieve,
    p: u64,
    d: u32,
    c: i64,
    out: *mut CartanVerdict,
) -> CartanStatus {
    guard(|| {
        non_null(sieve, "sieve")?;
        non_null(out, "out")?;
        let cand = core(Candidate::new(p, d, c))?;
        let v = core((*sieve).inner.rule_out(&cand))?;
        *out = CartanVerdict {
            ruled_out: (v.status == Status::RuledOut) as i32,
            witness_ell: v.witness_ell.unwrap_or(0),
            a_ell: v.a_ell.unwrap_or(0),
        };
        Ok(())
    })
}
