//! Packaged agreement checks between the fast routines and the oracles, at
//! a scale that runs in seconds.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::arith::{factorize, gcd, mobius, sieve_primes};
use crate::counts::count_weighted;
use crate::expsum::{circle_integral, parseval_mean};
use crate::local::{a_q_f64, gauss_b, lambda_q, rho};
use crate::oracle::{
    a_bruteforce, convolution_count, counts_bruteforce, lambda_bruteforce, rho_bruteforce_table,
};
use crate::series::SeriesTables;
use crate::{PolynomialSpec, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Local,
    Series,
    Circle,
    All,
}

impl FromStr for Suite {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "local" => Ok(Suite::Local),
            "series" => Ok(Suite::Series),
            "circle" => Ok(Suite::Circle),
            "all" => Ok(Suite::All),
            _ => Err(crate::Error::invalid(format!(
                "unknown suite {s:?}, expected local, series, circle or all"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub name: String,
    pub checks: u64,
    pub mismatches: u64,
    /// The first few mismatches, for the log.
    pub details: Vec<String>,
}

const MAX_DETAILS: usize = 20;

impl SuiteReport {
    fn new(name: &str) -> Self {
        Self { name: name.to_string(), checks: 0, mismatches: 0, details: Vec::new() }
    }

    fn check(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.mismatches += 1;
            if self.details.len() < MAX_DETAILS {
                self.details.push(detail());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.mismatches == 0
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "{status} {} checks={} mismatches={}", self.name, self.checks, self.mismatches)
    }
}

fn spec(ell: u32, u: i64) -> Result<PolynomialSpec> {
    PolynomialSpec::new(ell, u)
}

/// Root counts against enumeration for every residue class, `λ` and `A`
/// against the double sums, and `B_1(q, -a) = μ(q)`.
pub fn verify_local() -> Result<SuiteReport> {
    let mut report = SuiteReport::new("local");
    for p in sieve_primes(1000) {
        for ell in 2..=6u32 {
            let table = rho_bruteforce_table(p, ell)?;
            report.check(table.iter().sum::<u64>() == p, || format!("mass p={p} ell={ell}"));
            for (c, &expected) in table.iter().enumerate() {
                let s = spec(ell, c as i64 + p as i64)?;
                let got = rho(p, &s)?;
                report.check(got == expected, || format!("rho p={p} ell={ell} u={c}: {got} vs {expected}"));
            }
        }
    }
    for q in (1..=60u64).filter(|&q| factorize(q).is_square_free()) {
        for ell in 2..=4u32 {
            for u in 1..=12i64 {
                let s = spec(ell, u)?;
                let lam = lambda_q(q, &s)?;
                let lam_ref = lambda_bruteforce(q, &s)?;
                report.check(
                    (lam_ref.re - lam as f64).abs() < 1e-8 && lam_ref.im.abs() < 1e-8,
                    || format!("lambda q={q} {s}: {lam} vs {lam_ref}"),
                );
                let a = a_q_f64(q, &s)?;
                let a_ref = a_bruteforce(q, &s)?;
                report.check((a_ref - a).norm() < 1e-8, || format!("A q={q} {s}: {a} vs {a_ref}"));
            }
        }
    }
    for q in 1..=200u64 {
        for a in (1..=q).filter(|&a| gcd(a, q) == 1) {
            let b = gauss_b(q, -(a as i64), 1);
            let mu = mobius(q) as f64;
            report.check((b.re - mu).abs() < 1e-9 && b.im.abs() < 1e-9, || format!("B_1({q},-{a}) = {b}"));
        }
    }
    Ok(report)
}

/// Factorization `𝔓 = 𝔓'·f`, the vanishing series at `u = 2`, Dirichlet sums
/// against the oracle coefficients, and the weighted count against trial
/// division.
pub fn verify_series() -> Result<SuiteReport> {
    let mut report = SuiteReport::new("series");
    let tables = SeriesTables::new(1000, 60);
    for ell in [2u32, 3] {
        for u in 1..=200i64 {
            let s = spec(ell, u)?;
            for cutoff in [10.0, 100.0, 1000.0] {
                let full = tables.p_trunc(&s, cutoff)?.value;
                let primed = tables.p_prime_trunc(&s, cutoff)?.value;
                let f = tables.f_factor(&s, cutoff)?;
                let tol = 1e-10 * full.abs().max(primed.abs() * f.abs()).max(1e-300);
                report.check((full - primed * f).abs() <= tol, || {
                    format!("product {s} cutoff={cutoff}: {full} vs {}", primed * f)
                });
            }
        }
    }
    for cutoff in [3.0, 100.0, 1000.0] {
        let v = tables.sigma_full(&spec(2, 2)?, cutoff)?.value;
        report.check(v == 0.0, || format!("sigma_full(2, 2, {cutoff}) = {v}"));
    }
    for ell in [2u32, 3] {
        for u in 1..=10i64 {
            let s = spec(ell, u)?;
            let mut sum = 0.0;
            let mut sum_prime = 0.0;
            for q in (1..=60u64).filter(|&q| factorize(q).is_square_free()) {
                let f = factorize(q);
                let (mu, phi) = (f.mobius() as f64, f.euler_phi() as f64);
                sum += mu * a_bruteforce(q, &s)?.re / phi;
                sum_prime += mu * lambda_bruteforce(q, &s)?.re / phi;
            }
            let got = tables.s_trunc(&s, 60.0)?.value;
            let got_prime = tables.s_prime_trunc(&s, 60.0)?.value;
            report.check((got - sum).abs() < 1e-8, || format!("S_trunc {s}: {got} vs {sum}"));
            report.check((got_prime - sum_prime).abs() < 1e-8, || {
                format!("S'_trunc {s}: {got_prime} vs {sum_prime}")
            });
        }
    }
    for (ell, x) in [(2u32, 100_000u64), (3, 1_000_000)] {
        for u in [-7i64, 1, 2, 4, 10] {
            let s = spec(ell, u)?;
            let got = count_weighted(&s, x)?;
            let (expected, _) = counts_bruteforce(&s, x)?;
            report.check((got - expected).abs() < 1e-8 * expected.max(1.0), || {
                format!("count {s} X={x}: {got} vs {expected}")
            });
        }
    }
    Ok(report)
}

/// The exact circle identity on small blocks and Parseval on one grid.
pub fn verify_circle() -> Result<SuiteReport> {
    let mut report = SuiteReport::new("circle");
    for (ell, z, u_max) in [(2u32, 16.0, 12i64), (2, 50.0, 12), (3, 16.0, 8), (1, 100.0, 8)] {
        for u in 1..=u_max {
            let s = spec(ell, u)?;
            let lhs = circle_integral(&s, z)?;
            let rhs = convolution_count(&s, z)?;
            report.check((lhs - rhs).abs() < 1e-6, || format!("circle {s} z={z}: {lhs} vs {rhs}"));
        }
    }
    let (mean, target) = parseval_mean(2, 200.0, None)?;
    report.check(((mean - target) / target).abs() < 1e-8, || format!("parseval: {mean} vs {target}"));
    Ok(report)
}

pub fn run_suite(suite: Suite) -> Result<Vec<SuiteReport>> {
    Ok(match suite {
        Suite::Local => vec![verify_local()?],
        Suite::Series => vec![verify_series()?],
        Suite::Circle => vec![verify_circle()?],
        Suite::All => vec![verify_local()?, verify_series()?, verify_circle()?],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_pass() {
        for r in run_suite(Suite::All).unwrap() {
            assert!(r.passed(), "{r}: {:?}", r.details);
            assert!(r.checks > 0);
        }
    }

    #[test]
    fn suite_names_parse() {
        assert_eq!("circle".parse::<Suite>().unwrap(), Suite::Circle);
        assert!("nope".parse::<Suite>().is_err());
    }
}
