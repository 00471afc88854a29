//! Singular series for `x^ℓ + u`.
//!
//! Two families of truncations are provided:
//!
//! - Dirichlet-type sums over square-free `q <= z`:
//!   `𝔖'(u, z) = Σ μ(q)λ(q, u)/φ(q)` and `𝔖(u, z) = Σ μ(q)A(q, u)/φ(q)`.
//! - Euler products over primes `p <= P`:
//!   `𝔓'(u, P) = Π (1 - (ϱ - 1)/(p - 1))` and the combined product `𝔓(u, P)`.
//!
//! The "full" constants are never claimed exactly; they are products at an
//! explicit cutoff, carried in every [`TruncatedValue`].
//!
//! For `p | u` the combined factor `(p - ϱ)/(p - 1 - ϱ) · (1 - 1/(p - 1)^2)`
//! with `ϱ = 1` is evaluated in its simplified form `p/(p - 1)`, which is
//! finite at `p = 2`.

use serde::{Deserialize, Serialize};

use crate::arith::{sieve_primes, FactorTable};
use crate::local::{a_numerator, rho_unchecked, PolynomialSpec};
use crate::numeric::NeumaierSum;
use crate::{par, Error, Result};

/// Products with more factors than this accumulate in log space.
const LOG_SPACE_FACTORS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Method {
    DirichletSum,
    EulerProduct,
    CombinedFactorProduct,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::DirichletSum => "DIRICHLET_SUM",
            Method::EulerProduct => "EULER_PRODUCT",
            Method::CombinedFactorProduct => "COMBINED_FACTOR_PRODUCT",
        }
    }
}

/// A singular-series evaluation together with how it was truncated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedValue {
    pub value: f64,
    pub method: Method,
    pub cutoff: f64,
    pub spec: PolynomialSpec,
}

/// Prime list and factor table shared across many evaluations.
///
/// `prime_limit` bounds the Euler-product cutoffs and `sum_limit` the
/// Dirichlet-sum cutoffs that can be served.
#[derive(Debug, Clone)]
pub struct SeriesTables {
    prime_limit: u64,
    primes: Vec<u64>,
    factors: FactorTable,
}

fn cutoff_floor(cutoff: f64) -> Result<u64> {
    if !cutoff.is_finite() || cutoff < 1.0 {
        return Err(Error::invalid(format!("cutoff must be >= 1, got {cutoff}")));
    }
    Ok(cutoff.floor() as u64)
}

impl SeriesTables {
    pub fn new(prime_limit: u64, sum_limit: u64) -> Self {
        Self {
            prime_limit,
            primes: sieve_primes(prime_limit),
            factors: FactorTable::new(sum_limit.max(1)),
        }
    }

    /// Tables able to serve product cutoffs up to `prime_limit` only.
    pub fn for_products(prime_limit: u64) -> Self {
        Self::new(prime_limit, 1)
    }

    pub fn prime_limit(&self) -> u64 {
        self.prime_limit
    }

    fn primes_upto(&self, cutoff: f64) -> Result<&[u64]> {
        let p_max = cutoff_floor(cutoff)?;
        if p_max > self.prime_limit {
            return Err(Error::range(
                "series-prime-table",
                format!("cutoff {cutoff} exceeds table limit {}", self.prime_limit),
            ));
        }
        Ok(&self.primes[..self.primes.partition_point(|&p| p <= p_max)])
    }

    fn check_sum_limit(&self, z: u64) -> Result<()> {
        if z > self.factors.limit() {
            return Err(Error::range(
                "series-factor-table",
                format!("cutoff {z} exceeds factor table limit {}", self.factors.limit()),
            ));
        }
        Ok(())
    }

    /// `𝔖'_ℓ(u, z)`.
    pub fn s_prime_trunc(&self, spec: &PolynomialSpec, z: f64) -> Result<TruncatedValue> {
        let zf = cutoff_floor(z)?;
        self.check_sum_limit(zf)?;
        let rho = RhoCache::new(spec, zf);
        let mut sum = NeumaierSum::new();
        let mut primes = Vec::new();
        for q in 1..=zf {
            if !self.factors.square_free_primes(q, &mut primes) {
                continue;
            }
            // μ(q)λ(q, u) = Π_{p|q} (1 - ϱ)
            let mut num: i64 = 1;
            let mut phi: u64 = 1;
            for &p in &primes {
                num *= 1 - rho.get(p) as i64;
                phi *= p - 1;
                if num == 0 {
                    break;
                }
            }
            if num != 0 {
                sum.add(num as f64 / phi as f64);
            }
        }
        Ok(TruncatedValue {
            value: sum.value(),
            method: Method::DirichletSum,
            cutoff: z,
            spec: *spec,
        })
    }

    /// `𝔖_ℓ(u, z)`.
    pub fn s_trunc(&self, spec: &PolynomialSpec, z: f64) -> Result<TruncatedValue> {
        let zf = cutoff_floor(z)?;
        self.check_sum_limit(zf)?;
        let rho = RhoCache::new(spec, zf);
        let mut sum = NeumaierSum::new();
        let mut primes = Vec::new();
        for q in 1..=zf {
            if !self.factors.square_free_primes(q, &mut primes) {
                continue;
            }
            // μ(q)A(q, u)/φ(q) = μ(q) Π N_p / φ(q)^2, exact before the division.
            let mut num: i128 = if primes.len() % 2 == 0 { 1 } else { -1 };
            let mut phi: i128 = 1;
            for &p in &primes {
                num *= a_numerator(p, rho.get(p), spec.u_mod(p) == 0);
                phi *= (p - 1) as i128;
            }
            if num != 0 {
                sum.add(num as f64 / (phi * phi) as f64);
            }
        }
        Ok(TruncatedValue {
            value: sum.value(),
            method: Method::DirichletSum,
            cutoff: z,
            spec: *spec,
        })
    }

    /// `𝔓'_ℓ(u, P) = Π_{p <= P} (p - ϱ)/(p - 1)`.
    pub fn p_prime_trunc(&self, spec: &PolynomialSpec, cutoff: f64) -> Result<TruncatedValue> {
        let primes = self.primes_upto(cutoff)?;
        let value = product(primes.iter().map(|&p| prime_factor(p, rho_unchecked(p, spec))));
        Ok(TruncatedValue {
            value,
            method: Method::EulerProduct,
            cutoff,
            spec: *spec,
        })
    }

    /// `𝔓_ℓ(u, P)` with the `p | u` factors pre-combined into `p/(p - 1)`.
    pub fn p_trunc(&self, spec: &PolynomialSpec, cutoff: f64) -> Result<TruncatedValue> {
        let primes = self.primes_upto(cutoff)?;
        let value = product(
            primes
                .iter()
                .map(|&p| combined_factor(p, rho_unchecked(p, spec), spec.u_mod(p) == 0)),
        );
        Ok(TruncatedValue {
            value,
            method: Method::CombinedFactorProduct,
            cutoff,
            spec: *spec,
        })
    }

    /// Truncated `f_ℓ(u, P) = Π_{p|u} (1 - 1/(p - ϱ))^{-1} Π_p (1 - ϱ/((p - 1)(p - ϱ)))`,
    /// so that `𝔓 = 𝔓' · f`. The `p | u` part is taken in the simplified
    /// form `p/(p - 1)`.
    pub fn f_factor(&self, spec: &PolynomialSpec, cutoff: f64) -> Result<f64> {
        let primes = self.primes_upto(cutoff)?;
        let mut factors = Vec::with_capacity(primes.len());
        for &p in primes {
            let r = rho_unchecked(p, spec);
            if spec.u_mod(p) == 0 {
                factors.push(p as f64 / (p - 1) as f64);
            } else {
                if r >= p {
                    return Err(Error::SingularFactor(p));
                }
                let d = (p - 1) as i128 * (p - r) as i128;
                factors.push((d - r as i128) as f64 / d as f64);
            }
        }
        Ok(product(factors.into_iter()))
    }

    pub fn sigma_full(&self, spec: &PolynomialSpec, cutoff: f64) -> Result<TruncatedValue> {
        self.p_trunc(spec, cutoff)
    }

    pub fn sigma_prime_full(&self, spec: &PolynomialSpec, cutoff: f64) -> Result<TruncatedValue> {
        self.p_prime_trunc(spec, cutoff)
    }

    /// `Σ_{p <= P} (ϱ_ℓ(p, u) - 1)/p`.
    pub fn rho_deficit_sum(&self, spec: &PolynomialSpec, cutoff: f64) -> Result<f64> {
        if cutoff < 2.0 {
            return Ok(0.0);
        }
        let primes = self.primes_upto(cutoff)?;
        Ok(primes
            .iter()
            .map(|&p| (rho_unchecked(p, spec) as f64 - 1.0) / p as f64)
            .collect::<NeumaierSum>()
            .value())
    }
}

/// Per-prime `ϱ` values for every prime up to a bound, indexed by `p`.
struct RhoCache {
    values: Vec<u8>,
}

impl RhoCache {
    fn new(spec: &PolynomialSpec, limit: u64) -> Self {
        let mut values = vec![0u8; limit as usize + 1];
        for p in sieve_primes(limit) {
            values[p as usize] = rho_unchecked(p, spec).min(u8::MAX as u64) as u8;
        }
        Self { values }
    }

    #[inline]
    fn get(&self, p: u64) -> u64 {
        self.values[p as usize] as u64
    }
}

#[inline]
fn prime_factor(p: u64, rho: u64) -> f64 {
    (p as f64 - rho as f64) / (p - 1) as f64
}

/// `1 - (ϱ - 1)/(p - 1) - ϱ/(p - 1)^2 = ((p - 1)(p - ϱ) - ϱ)/(p - 1)^2` for
/// `p ∤ u`; `p/(p - 1)` for `p | u`.
#[inline]
fn combined_factor(p: u64, rho: u64, divides_u: bool) -> f64 {
    if divides_u {
        return p as f64 / (p - 1) as f64;
    }
    let pm1 = (p - 1) as i128;
    let num = pm1 * (p as i128 - rho as i128) - rho as i128;
    num as f64 / (pm1 * pm1) as f64
}

fn product(factors: impl ExactSizeIterator<Item = f64>) -> f64 {
    if factors.len() <= LOG_SPACE_FACTORS {
        return factors.product();
    }
    let mut log = NeumaierSum::new();
    let mut negative = false;
    for f in factors {
        if f == 0.0 {
            return 0.0;
        }
        negative ^= f < 0.0;
        log.add(f.abs().ln());
    }
    let mag = log.value().exp();
    if negative {
        -mag
    } else {
        mag
    }
}

fn tables_for_sum(z: f64) -> Result<SeriesTables> {
    let zf = cutoff_floor(z)?;
    Ok(SeriesTables::new(1, zf))
}

fn tables_for_product(cutoff: f64) -> Result<SeriesTables> {
    let pf = cutoff_floor(cutoff)?;
    Ok(SeriesTables::for_products(pf))
}

pub fn s_prime_trunc(spec: &PolynomialSpec, z: f64) -> Result<TruncatedValue> {
    tables_for_sum(z)?.s_prime_trunc(spec, z)
}

pub fn s_trunc(spec: &PolynomialSpec, z: f64) -> Result<TruncatedValue> {
    tables_for_sum(z)?.s_trunc(spec, z)
}

pub fn p_prime_trunc(spec: &PolynomialSpec, cutoff: f64) -> Result<TruncatedValue> {
    tables_for_product(cutoff)?.p_prime_trunc(spec, cutoff)
}

pub fn p_trunc(spec: &PolynomialSpec, cutoff: f64) -> Result<TruncatedValue> {
    tables_for_product(cutoff)?.p_trunc(spec, cutoff)
}

pub fn f_factor(spec: &PolynomialSpec, cutoff: f64) -> Result<f64> {
    tables_for_product(cutoff)?.f_factor(spec, cutoff)
}

pub fn sigma_full(spec: &PolynomialSpec, cutoff: f64) -> Result<TruncatedValue> {
    p_trunc(spec, cutoff)
}

pub fn sigma_prime_full(spec: &PolynomialSpec, cutoff: f64) -> Result<TruncatedValue> {
    p_prime_trunc(spec, cutoff)
}

pub fn rho_deficit_sum(spec: &PolynomialSpec, cutoff: f64) -> Result<f64> {
    if cutoff < 2.0 {
        return Ok(0.0);
    }
    tables_for_product(cutoff)?.rho_deficit_sum(spec, cutoff)
}

/// `4ℓ log log(2|u|)`, the growth shape the deficit sum is compared against.
pub fn deficit_reference(spec: &PolynomialSpec) -> f64 {
    let two_u = 2.0 * (spec.u.unsigned_abs() as f64);
    4.0 * spec.ell as f64 * two_u.ln().ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrudeBoundRow {
    pub u: i64,
    pub sigma: f64,
    pub sigma_prime: f64,
}

/// Sweep of `𝔖_ℓ(u)` and `𝔖'_ℓ(u)` over `1 <= u <= u_max`, with the observed
/// maxima and the `log^{5ℓ}(2u_max)` scale the crude bound is stated in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrudeBoundReport {
    pub ell: u32,
    pub cutoff: f64,
    pub rows: Vec<CrudeBoundRow>,
    pub max_sigma: f64,
    pub max_sigma_prime: f64,
    pub log_scale: f64,
}

pub fn crude_bound_report(ell: u32, u_max: u64, cutoff: f64) -> Result<CrudeBoundReport> {
    if u_max < 1 {
        return Err(Error::invalid("u_max must be at least 1"));
    }
    let tables = tables_for_product(cutoff)?;
    let us: Vec<i64> = (1..=u_max as i64).collect();
    let rows = par::ordered_map(&us, |&u| -> Result<CrudeBoundRow> {
        let spec = PolynomialSpec::new(ell, u)?;
        Ok(CrudeBoundRow {
            u,
            sigma: tables.sigma_full(&spec, cutoff)?.value,
            sigma_prime: tables.sigma_prime_full(&spec, cutoff)?.value,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let max_sigma = rows.iter().map(|r| r.sigma).fold(f64::NEG_INFINITY, f64::max);
    let max_sigma_prime = rows
        .iter()
        .map(|r| r.sigma_prime)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(CrudeBoundReport {
        ell,
        cutoff,
        rows,
        max_sigma,
        max_sigma_prime,
        log_scale: (2.0 * u_max as f64).ln().powi(5 * ell as i32),
    })
}
