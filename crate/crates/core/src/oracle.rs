//! Brute-force references. Every routine here walks its full range with no
//! algebraic shortcuts and refuses inputs beyond a hard cap.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::local::PolynomialSpec;
use crate::{Error, Result};

pub const RHO_MAX_P: u64 = 1_000_000;
pub const DOUBLE_SUM_MAX_Q: u64 = 10_000;
pub const CONVOLUTION_MAX_RANGE: u64 = 10_000_000;

fn cap(guard: &'static str, value: u64, max: u64) -> Result<()> {
    if value > max {
        return Err(Error::range(guard, format!("{value} > {max}")));
    }
    Ok(())
}

pub fn is_prime_trial(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// `Λ(n)` by trial division: strip the smallest factor and check nothing
/// else remains.
pub fn von_mangoldt_trial(n: u64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            let mut m = n;
            while m % d == 0 {
                m /= d;
            }
            return if m == 1 { (d as f64).ln() } else { 0.0 };
        }
        d += 1;
    }
    (n as f64).ln()
}

/// `x^ℓ mod m` by repeated multiplication.
fn power_by_repetition(x: u64, ell: u32, m: u64) -> u64 {
    let mut acc = 1 % m;
    for _ in 0..ell {
        acc = acc * x % m;
    }
    acc
}

/// `#{x mod p : x^ℓ + u ≡ 0}` by enumeration.
pub fn rho_bruteforce(p: u64, spec: &PolynomialSpec) -> Result<u64> {
    cap("oracle-rho-p", p, RHO_MAX_P)?;
    let u = spec.u.rem_euclid(p as i64) as u64;
    Ok((0..p)
        .filter(|&x| (power_by_repetition(x, spec.ell, p) + u) % p == 0)
        .count() as u64)
}

/// Root counts for every residue class of `u` modulo `p` at once: entry
/// `c` is `#{x : x^ℓ + c ≡ 0 (mod p)}`. One enumeration of `x` per call.
pub fn rho_bruteforce_table(p: u64, ell: u32) -> Result<Vec<u64>> {
    cap("oracle-rho-p", p, RHO_MAX_P)?;
    let mut counts = vec![0u64; p as usize];
    for x in 0..p {
        let c = (p - power_by_repetition(x, ell, p)) % p;
        counts[c as usize] += 1;
    }
    Ok(counts)
}

fn gcd_slow(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd_slow(b, a % b)
    }
}

fn double_sum(q: u64, spec: &PolynomialSpec, h_units_only: bool) -> Complex64 {
    let roots: Vec<Complex64> = (0..q)
        .map(|k| Complex64::from_polar(1.0, TAU * k as f64 / q as f64))
        .collect();
    let u = spec.u.rem_euclid(q as i64) as u64;
    let hs: Vec<u64> = (0..q)
        .filter(|&h| !h_units_only || gcd_slow(h, q) == 1)
        .map(|h| power_by_repetition(h, spec.ell, q))
        .collect();
    let mut total = Complex64::new(0.0, 0.0);
    for a in (0..q).filter(|&a| gcd_slow(a, q) == 1) {
        for &hl in &hs {
            total += roots[((a * ((hl + u) % q)) % q) as usize];
        }
    }
    total
}

fn phi_count(q: u64) -> u64 {
    (0..q).filter(|&a| gcd_slow(a, q) == 1).count() as u64
}

/// `λ(q, u) = (1/q) Σ_{a ∈ Z_q^*} Σ_{h ∈ Z_q} e(a(h^ℓ + u)/q)`.
pub fn lambda_bruteforce(q: u64, spec: &PolynomialSpec) -> Result<Complex64> {
    if q == 0 {
        return Err(Error::invalid("q must be positive"));
    }
    cap("oracle-double-sum-q", q, DOUBLE_SUM_MAX_Q)?;
    Ok(double_sum(q, spec, false) / q as f64)
}

/// `A(q, u) = (1/φ(q)) Σ_{a ∈ Z_q^*} Σ_{h ∈ Z_q^*} e(a(h^ℓ + u)/q)`.
pub fn a_bruteforce(q: u64, spec: &PolynomialSpec) -> Result<Complex64> {
    if q == 0 {
        return Err(Error::invalid("q must be positive"));
    }
    cap("oracle-double-sum-q", q, DOUBLE_SUM_MAX_Q)?;
    Ok(double_sum(q, spec, true) / phi_count(q) as f64)
}

/// `Σ Λ(m)Λ(m^ℓ + u)` over `z < m^ℓ <= 2^ℓ z` with `m^ℓ + u <= 2^ℓ z`.
pub fn convolution_count(spec: &PolynomialSpec, z: f64) -> Result<f64> {
    if !(z >= 1.0) {
        return Err(Error::invalid("z must be >= 1"));
    }
    let top = ((1u64 << spec.ell) as f64 * z).floor() as u64;
    cap("oracle-convolution-range", top, CONVOLUTION_MAX_RANGE)?;
    let zf = z.floor() as u64;
    let mut total = 0.0;
    let mut m = 1u64;
    loop {
        let Some(ml) = m.checked_pow(spec.ell) else { break };
        if ml > top {
            break;
        }
        if ml > zf {
            let n = ml as i64 + spec.u;
            if n >= 1 && n as u64 <= top {
                total += von_mangoldt_trial(m) * von_mangoldt_trial(n as u64);
            }
        }
        m += 1;
    }
    Ok(total)
}

/// Both counts `Σ_{m^ℓ <= X} Λ(m)Λ(m^ℓ + u)` and `Σ_{m^ℓ <= X} Λ(m^ℓ + u)`
/// by trial division.
pub fn counts_bruteforce(spec: &PolynomialSpec, x: u64) -> Result<(f64, f64)> {
    cap("oracle-count-x", x, 1_000_000_000_000)?;
    let mut weighted = 0.0;
    let mut outer = 0.0;
    let mut m = 1u64;
    while m.checked_pow(spec.ell).is_some_and(|v| v <= x) {
        let n = m.pow(spec.ell) as i64 + spec.u;
        let w = if n >= 1 { von_mangoldt_trial(n as u64) } else { 0.0 };
        outer += w;
        weighted += von_mangoldt_trial(m) * w;
        m += 1;
    }
    Ok((weighted, outer))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(ell: u32, u: i64) -> PolynomialSpec {
        PolynomialSpec::new(ell, u).unwrap()
    }

    #[test]
    fn rho_oracle_examples() {
        assert_eq!(rho_bruteforce(5, &spec(2, 1)).unwrap(), 2);
        assert_eq!(rho_bruteforce(3, &spec(2, 1)).unwrap(), 0);
        for ell in 1..6 {
            assert_eq!(rho_bruteforce(2, &spec(ell, 7)).unwrap(), 1);
        }
        // x^4 ≡ -1 (mod 13) has no solution: the fourth powers mod 13 are {0,1,3,9}.
        assert_eq!(rho_bruteforce(13, &spec(4, 1)).unwrap(), 0);
        assert_eq!(
            rho_bruteforce(13, &spec(4, 1)).unwrap(),
            crate::local::rho(13, &spec(4, 1)).unwrap()
        );
        assert!(rho_bruteforce(RHO_MAX_P + 1, &spec(2, 1)).is_err());
    }

    #[test]
    fn rho_table_matches_pointwise_oracle() {
        for p in [2u64, 3, 5, 7, 13, 31] {
            for ell in 1..=6 {
                let table = rho_bruteforce_table(p, ell).unwrap();
                assert_eq!(table.iter().sum::<u64>(), p);
                for u in 1..=p as i64 {
                    assert_eq!(
                        table[(u % p as i64) as usize],
                        rho_bruteforce(p, &spec(ell, u)).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn double_sum_examples() {
        let one = lambda_bruteforce(1, &spec(3, 4)).unwrap();
        assert!((one - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        let a = a_bruteforce(5, &spec(2, 1)).unwrap();
        assert!((a.re - 1.5).abs() < 1e-12 && a.im.abs() < 1e-12);
        let l6 = lambda_bruteforce(6, &spec(2, 1)).unwrap();
        let l2 = lambda_bruteforce(2, &spec(2, 1)).unwrap();
        let l3 = lambda_bruteforce(3, &spec(2, 1)).unwrap();
        assert!((l6 - l2 * l3).norm() < 1e-12);
        assert!(lambda_bruteforce(DOUBLE_SUM_MAX_Q + 1, &spec(2, 1)).is_err());
    }

    #[test]
    fn convolution_examples() {
        assert_eq!(convolution_count(&spec(2, 1), 16.0).unwrap(), 0.0);
        assert_eq!(convolution_count(&spec(2, 100), 16.0).unwrap(), 0.0);
        // m = 5: 29 prime; m = 7: 53 prime; m = 6 has Λ(6) = 0.
        let expected = 5f64.ln() * 29f64.ln() + 7f64.ln() * 53f64.ln();
        assert!((convolution_count(&spec(2, 4), 16.0).unwrap() - expected).abs() < 1e-12);
        assert!(convolution_count(&spec(2, 4), 100.0).unwrap() > 0.0);
        assert!(convolution_count(&spec(2, 1), 1e7).is_err());
    }

    #[test]
    fn trial_von_mangoldt() {
        assert_eq!(von_mangoldt_trial(1), 0.0);
        assert_eq!(von_mangoldt_trial(8), 2f64.ln());
        assert_eq!(von_mangoldt_trial(12), 0.0);
        assert_eq!(von_mangoldt_trial(97), 97f64.ln());
    }
}
