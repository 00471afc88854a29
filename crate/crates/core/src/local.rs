//! Local arithmetic of `x^ℓ + u`: root counts modulo primes, the
//! multiplicative coefficients `λ(q, u)` and `A(q, u)`, Gauss-type sums and
//! an irreducibility test over the rationals.

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::arith::{self, exact_root, factorize, gcd, is_prime_64, jacobi, pow_mod};
use crate::{Error, Result};

/// Primes at or below this bound use direct enumeration in [`rho`].
const ENUMERATION_BOUND: u64 = 64;

/// The polynomial `x^ℓ + u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PolynomialSpec {
    pub ell: u32,
    pub u: i64,
}

impl PolynomialSpec {
    pub fn new(ell: u32, u: i64) -> Result<Self> {
        if ell == 0 {
            return Err(Error::invalid("degree ell must be at least 1"));
        }
        if u == 0 {
            return Err(Error::invalid("shift u must be nonzero"));
        }
        Ok(Self { ell, u })
    }

    /// Same degree, different shift.
    pub fn with_u(self, u: i64) -> Result<Self> {
        Self::new(self.ell, u)
    }

    /// `u mod p` in `0..p`.
    #[inline]
    pub fn u_mod(&self, p: u64) -> u64 {
        self.u.rem_euclid(p as i64) as u64
    }
}

impl fmt::Display for PolynomialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.u < 0 {
            write!(f, "x^{} - {}", self.ell, self.u.unsigned_abs())
        } else {
            write!(f, "x^{} + {}", self.ell, self.u)
        }
    }
}

/// `ϱ_ℓ(p, u)` at a single prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalDensity {
    pub p: u64,
    pub rho: u64,
}

/// Number of roots of `x^ℓ + u` modulo the prime `p`.
pub fn rho(p: u64, spec: &PolynomialSpec) -> Result<u64> {
    if !is_prime_64(p) {
        return Err(Error::NotPrime(p));
    }
    Ok(rho_unchecked(p, spec))
}

/// [`rho`] without the primality check, for callers iterating over sieved
/// primes.
#[inline]
pub fn rho_unchecked(p: u64, spec: &PolynomialSpec) -> u64 {
    if p <= ENUMERATION_BOUND {
        rho_enumerate(p, spec)
    } else {
        rho_power_residue(p, spec)
    }
}

pub fn local_density(p: u64, spec: &PolynomialSpec) -> Result<LocalDensity> {
    rho(p, spec).map(|rho| LocalDensity { p, rho })
}

/// Count residues `x` with `x^ℓ ≡ -u (mod p)` by enumeration.
pub(crate) fn rho_enumerate(p: u64, spec: &PolynomialSpec) -> u64 {
    let target = (p - spec.u_mod(p)) % p;
    (0..p)
        .filter(|&x| pow_mod(x, spec.ell as u64, p) == target)
        .count() as u64
}

/// Power-residue closed form: for `p ∤ u` the equation `x^ℓ = c` has
/// `gcd(ℓ, p-1)` roots if `c^{(p-1)/g} = 1` and none otherwise.
pub(crate) fn rho_power_residue(p: u64, spec: &PolynomialSpec) -> u64 {
    let u = spec.u_mod(p);
    if u == 0 {
        return 1;
    }
    let c = p - u;
    let g = gcd(spec.ell as u64, p - 1);
    let residue = match g {
        1 => true,
        2 => jacobi(c, p) == 1,
        _ => pow_mod(c, (p - 1) / g, p) == 1,
    };
    if residue {
        g
    } else {
        0
    }
}

fn square_free_factors(q: u64) -> Result<Vec<u64>> {
    if q == 0 {
        return Err(Error::invalid("modulus q must be positive"));
    }
    let f = factorize(q);
    if !f.is_square_free() {
        return Err(Error::NotSquareFree(q));
    }
    Ok(f.primes().collect())
}

/// `λ(q, u) = Π_{p | q} (ϱ_ℓ(p, u) - 1)` for square-free `q`.
pub fn lambda_q(q: u64, spec: &PolynomialSpec) -> Result<i64> {
    let primes = square_free_factors(q)?;
    Ok(lambda_from_primes(&primes, |p| rho_unchecked(p, spec)))
}

pub(crate) fn lambda_from_primes(primes: &[u64], mut rho_at: impl FnMut(u64) -> u64) -> i64 {
    primes.iter().map(|&p| rho_at(p) as i64 - 1).product()
}

/// Per-prime numerator of `A(p, u)·φ(p)`:
/// `(ϱ - 1)p + 1` when `p ∤ u`, `(ϱ - 2)p + 1` when `p | u`.
#[inline]
pub(crate) fn a_numerator(p: u64, rho: u64, divides_u: bool) -> i128 {
    let shift = if divides_u { 2 } else { 1 };
    (rho as i128 - shift) * p as i128 + 1
}

/// `A(q, u)` for square-free `q`, exactly.
///
/// With `q` square-free, `q/φ(q) · Π (ϱ - 1 + 1/p)` telescopes to
/// `Π ((ϱ - 1)p + 1) / φ(q)`, and likewise for the `p | u` factor.
pub fn a_q(q: u64, spec: &PolynomialSpec) -> Result<Ratio<i128>> {
    let primes = square_free_factors(q)?;
    let mut num: i128 = 1;
    let mut den: i128 = 1;
    for &p in &primes {
        let r = rho_unchecked(p, spec);
        num *= a_numerator(p, r, spec.u_mod(p) == 0);
        den *= (p - 1) as i128;
    }
    Ok(Ratio::new(num, den))
}

pub fn a_q_f64(q: u64, spec: &PolynomialSpec) -> Result<f64> {
    a_q(q, spec).map(|r| ratio_to_f64(&r))
}

pub(crate) fn ratio_to_f64(r: &Ratio<i128>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn unit_roots(q: u64) -> Vec<Complex64> {
    (0..q)
        .map(|k| Complex64::from_polar(1.0, TAU * k as f64 / q as f64))
        .collect()
}

fn gauss_sum(q: u64, a: i64, ell: u32, units_only: bool) -> Complex64 {
    assert!(q >= 1, "modulus must be positive");
    let roots = unit_roots(q);
    let a = a.rem_euclid(q as i64) as u64;
    (0..q)
        .filter(|&h| !units_only || gcd(h, q) == 1)
        .map(|h| {
            let k = arith::mul_mod(a, pow_mod(h, ell as u64, q), q);
            roots[k as usize]
        })
        .sum()
}

/// `B_ℓ(q, a) = Σ_{h ∈ Z_q^*} e(a h^ℓ / q)`. Any `a` is accepted; the major
/// arc analysis only uses `gcd(a, q) = 1`.
pub fn gauss_b(q: u64, a: i64, ell: u32) -> Complex64 {
    gauss_sum(q, a, ell, true)
}

/// `B'_ℓ(q, a) = Σ_{h ∈ Z_q} e(a h^ℓ / q)`.
pub fn gauss_b_prime(q: u64, a: i64, ell: u32) -> Complex64 {
    gauss_sum(q, a, ell, false)
}

/// Irreducibility of `x^ℓ + u` over the rationals by Capelli's criterion for
/// binomials: `x^ℓ - c` is reducible iff `c = w^t` for a prime `t | ℓ`, or
/// `4 | ℓ` and `c = -4w^4`.
pub fn is_irreducible(spec: &PolynomialSpec) -> bool {
    let c = -(spec.u as i128);
    let ell = spec.ell as u64;
    let is_power = |t: u32| -> bool {
        if c >= 0 {
            u64::try_from(c).is_ok_and(|c| exact_root(c, t).is_some())
        } else {
            t % 2 == 1 && u64::try_from(-c).is_ok_and(|c| exact_root(c, t).is_some())
        }
    };
    let prime_divisors = factorize(ell).primes().collect::<Vec<_>>();
    if prime_divisors.iter().any(|&t| is_power(t as u32)) {
        return false;
    }
    if ell % 4 == 0 && c < 0 && (-c) % 4 == 0 {
        if let Ok(w4) = u64::try_from(-c / 4) {
            if exact_root(w4, 4).is_some() {
                return false;
            }
        }
    }
    true
}
