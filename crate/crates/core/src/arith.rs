//! Exact integer arithmetic: sieves, deterministic primality for 64-bit
//! inputs, von Mangoldt evaluation and the standard multiplicative functions.
//!
//! Von Mangoldt values are stored as the prime base `p` of `n = p^k` (or `0`
//! when `Λ(n) = 0`). Callers take `ln p` only when accumulating.

use crate::{Error, Result};

/// Segment length (in odd numbers) used by the segmented sieves.
const SEGMENT: u64 = 1 << 18;

/// Witnesses `2, 3, ..., 37` make Miller-Rabin deterministic below
/// 3.3 * 10^24, which covers every `u64`.
const MR_WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    if m < (1 << 32) {
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base % m;
            }
            base = base * base % m;
            exp >>= 1;
        }
    } else {
        while exp > 0 {
            if exp & 1 == 1 {
                acc = mul_mod(acc, base, m);
            }
            base = mul_mod(base, base, m);
            exp >>= 1;
        }
    }
    acc
}

/// `⌊n^{1/k}⌋`, from a rounded floating root corrected by exact checks.
pub fn iroot(n: u64, k: u32) -> u64 {
    assert!(k >= 1, "root index must be positive");
    if k == 1 || n < 2 {
        return n;
    }
    if k >= 64 {
        return 1;
    }
    let mut r = (n as f64).powf(1.0 / k as f64).round() as u64;
    // pow_le(r, k, n) is true iff r^k <= n.
    let pow_le = |r: u64| r.checked_pow(k).is_some_and(|v| v <= n);
    while r > 0 && !pow_le(r) {
        r -= 1;
    }
    while pow_le(r + 1) {
        r += 1;
    }
    r
}

/// Exact integer `k`-th root of `n` if it exists.
pub fn exact_root(n: u64, k: u32) -> Option<u64> {
    let r = iroot(n, k);
    (r.checked_pow(k) == Some(n)).then_some(r)
}

pub fn isqrt(n: u64) -> u64 {
    iroot(n, 2)
}

/// Jacobi symbol `(a/n)` for odd `n`.
pub fn jacobi(mut a: u64, mut n: u64) -> i32 {
    assert!(n % 2 == 1, "jacobi symbol needs an odd modulus");
    a %= n;
    let mut t = 1;
    while a != 0 {
        let z = a.trailing_zeros();
        a >>= z;
        if z % 2 == 1 && (n % 8 == 3 || n % 8 == 5) {
            t = -t;
        }
        if a % 4 == 3 && n % 4 == 3 {
            t = -t;
        }
        std::mem::swap(&mut a, &mut n);
        a %= n;
    }
    if n == 1 {
        t
    } else {
        0
    }
}

/// Deterministic primality for every 64-bit input.
pub fn is_prime_64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_WITNESSES {
        if n % p == 0 {
            return n == p;
        }
    }
    if n < 41 * 41 {
        return true;
    }
    let d_shift = (n - 1).trailing_zeros();
    let d = (n - 1) >> d_shift;
    'witness: for &a in &MR_WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..d_shift {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Von Mangoldt value of a single integer: the prime base `p` when
/// `n = p^k`, else `None`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VonMangoldt {
    pub base: Option<u64>,
}

impl VonMangoldt {
    /// `Λ(n)` in double precision.
    pub fn weight(&self) -> f64 {
        self.base.map_or(0.0, |p| (p as f64).ln())
    }
}

/// `Λ(n)` for any `n >= 1`. Prime powers are found by testing exact `k`-th
/// roots for every `k` with `2^k <= n`.
pub fn von_mangoldt_64(n: u64) -> VonMangoldt {
    VonMangoldt {
        base: prime_power_base(n),
    }
}

fn prime_power_base(n: u64) -> Option<u64> {
    if n < 2 {
        return None;
    }
    if is_prime_64(n) {
        return Some(n);
    }
    let max_k = 63 - n.leading_zeros();
    (2..=max_k).find_map(|k| exact_root(n, k).filter(|&r| is_prime_64(r)))
}

/// Primes up to `limit` by a segmented odd-only sieve.
pub fn sieve_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let root = isqrt(limit);
    let base = simple_sieve(root);
    let mut primes = vec![2];
    // Odd numbers 2i+1 for i in [lo, hi).
    let total = (limit - 1) / 2 + 1;
    let mut seg = vec![true; SEGMENT as usize];
    let mut lo = 1u64;
    while lo < total {
        let hi = (lo + SEGMENT).min(total);
        let len = (hi - lo) as usize;
        seg[..len].fill(true);
        for &p in base.iter().skip(1) {
            let p2 = p * p;
            if p2 > 2 * hi + 1 {
                break;
            }
            // First odd multiple of p that is >= max(p^2, 2*lo+1).
            let start_val = p2.max((2 * lo + 1).div_ceil(p) * p);
            let start_val = if start_val % 2 == 0 {
                start_val + p
            } else {
                start_val
            };
            let mut idx = (start_val - 1) / 2;
            while idx < hi {
                seg[(idx - lo) as usize] = false;
                idx += p;
            }
        }
        primes.extend(
            seg[..len]
                .iter()
                .enumerate()
                .filter(|(_, &is_p)| is_p)
                .map(|(i, _)| 2 * (lo + i as u64) + 1),
        );
        lo = hi;
    }
    primes
}

fn simple_sieve(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

/// Dense von Mangoldt table on `1..=limit`: entry `n` holds the prime `p`
/// with `Λ(n) = ln p`, or `0`.
#[derive(Debug, Clone)]
pub struct LambdaTable {
    limit: u64,
    base: Vec<u32>,
}

impl LambdaTable {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// Prime base of `n`, or `0`. Panics if `n > limit`.
    #[inline]
    pub fn entry(&self, n: u64) -> u32 {
        self.base[n as usize]
    }

    #[inline]
    pub fn weight(&self, n: u64) -> f64 {
        match self.entry(n) {
            0 => 0.0,
            p => (p as f64).ln(),
        }
    }

    /// Chebyshev `ψ(n) = Σ_{k<=n} Λ(k)`.
    pub fn psi(&self, n: u64) -> f64 {
        crate::numeric::compensated_sum((1..=n.min(self.limit)).map(|k| self.weight(k)))
    }
}

pub fn build_lambda_table(limit: u64) -> Result<LambdaTable> {
    if limit > u32::MAX as u64 {
        return Err(Error::range(
            "lambda-table-limit",
            format!("{limit} exceeds 2^32 - 1"),
        ));
    }
    let mut base = Vec::new();
    base.try_reserve_exact(limit as usize + 1).map_err(|_| {
        Error::range("lambda-table-memory", format!("cannot allocate a table up to {limit}"))
    })?;
    base.resize(limit as usize + 1, 0u32);
    for p in sieve_primes(limit) {
        let mut pk = p;
        loop {
            base[pk as usize] = p as u32;
            match pk.checked_mul(p) {
                Some(next) if next <= limit => pk = next,
                _ => break,
            }
        }
    }
    Ok(LambdaTable { limit, base })
}

/// Every prime up to `limit`, for sieving windows below `limit^2`.
#[derive(Debug, Clone)]
pub struct SievingPrimes {
    limit: u64,
    primes: Vec<u64>,
}

impl SievingPrimes {
    pub fn new(limit: u64) -> Self {
        Self { limit, primes: sieve_primes(limit) }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }
}

/// Von Mangoldt values on a window `[lo, hi]` of large integers, sieved with
/// primes up to `√hi`.
#[derive(Debug, Clone)]
pub struct LambdaWindow {
    lo: u64,
    base: Vec<u64>,
}

impl LambdaWindow {
    pub fn new(lo: u64, hi: u64, sieving: &SievingPrimes) -> Result<Self> {
        let lo = lo.max(1);
        if hi < lo {
            return Ok(Self { lo, base: Vec::new() });
        }
        let root = isqrt(hi);
        if sieving.limit < root {
            return Err(Error::range(
                "window-sieving-primes",
                format!("sieving primes stop at {} below sqrt({hi}) = {root}", sieving.limit),
            ));
        }
        let len = (hi - lo + 1) as usize;
        let mut prime = vec![true; len];
        if lo == 1 {
            prime[0] = false;
        }
        for &p in &sieving.primes {
            if p > root {
                break;
            }
            let start = (p * p).max(lo.div_ceil(p) * p);
            let mut n = start;
            while n <= hi {
                prime[(n - lo) as usize] = false;
                n += p;
            }
        }
        let mut base: Vec<u64> = prime
            .iter()
            .enumerate()
            .map(|(i, &is_p)| if is_p { lo + i as u64 } else { 0 })
            .collect();
        for &p in &sieving.primes {
            if p > root {
                break;
            }
            let mut pk = p * p;
            while pk <= hi {
                if pk >= lo {
                    base[(pk - lo) as usize] = p;
                }
                match pk.checked_mul(p) {
                    Some(next) => pk = next,
                    None => break,
                }
            }
        }
        Ok(Self { lo, base })
    }

    /// Prime base of `n`, or `0`. Panics outside the window.
    #[inline]
    pub fn entry(&self, n: u64) -> u64 {
        self.base[(n - self.lo) as usize]
    }
}

/// `n = Π p^e`, primes ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactoredInteger {
    pub n: u64,
    pub factors: Vec<(u64, u32)>,
}

impl FactoredInteger {
    pub fn is_square_free(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    pub fn mobius(&self) -> i64 {
        if !self.is_square_free() {
            0
        } else if self.factors.len() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn euler_phi(&self) -> u64 {
        self.factors
            .iter()
            .map(|&(p, e)| (p - 1) * p.pow(e - 1))
            .product()
    }
}

/// Trial-division factorization. Intended for moduli, not for huge inputs.
pub fn factorize(n: u64) -> FactoredInteger {
    assert!(n >= 1, "factorize requires n >= 1");
    let mut factors = Vec::new();
    let mut m = n;
    let mut p = 2u64;
    while p.saturating_mul(p) <= m {
        if m % p == 0 {
            let mut e = 0;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            factors.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if m > 1 {
        factors.push((m, 1));
    }
    FactoredInteger { n, factors }
}

pub fn mobius(q: u64) -> i64 {
    factorize(q).mobius()
}

pub fn euler_phi(q: u64) -> u64 {
    factorize(q).euler_phi()
}

/// Smallest-prime-factor table for fast factorization of every `n <= limit`.
#[derive(Debug, Clone)]
pub struct FactorTable {
    spf: Vec<u32>,
}

impl FactorTable {
    pub fn new(limit: u64) -> Self {
        let n = limit as usize;
        let mut spf = vec![0u32; n + 1];
        for i in 2..=n {
            if spf[i] == 0 {
                let mut j = i;
                while j <= n {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        Self { spf }
    }

    pub fn limit(&self) -> u64 {
        (self.spf.len() - 1) as u64
    }

    pub fn factorize(&self, n: u64) -> FactoredInteger {
        assert!(n >= 1 && n <= self.limit(), "{n} outside factor table");
        let mut factors: Vec<(u64, u32)> = Vec::new();
        let mut m = n as usize;
        while m > 1 {
            let p = self.spf[m] as u64;
            match factors.last_mut() {
                Some((q, e)) if *q == p => *e += 1,
                _ => factors.push((p, 1)),
            }
            m /= p as usize;
        }
        FactoredInteger { n, factors }
    }

    /// Distinct prime factors of `n` if `n` is square-free.
    pub fn square_free_primes(&self, n: u64, out: &mut Vec<u64>) -> bool {
        out.clear();
        let mut m = n as usize;
        while m > 1 {
            let p = self.spf[m] as usize;
            m /= p;
            if m % p == 0 {
                return false;
            }
            out.push(p as u64);
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use proptest::prelude::*;

    #[test]
    fn sieve_small_cases() {
        assert_eq!(sieve_primes(10), vec![2, 3, 5, 7]);
        assert_eq!(sieve_primes(2), vec![2]);
        assert!(sieve_primes(1).is_empty());
        assert!(sieve_primes(0).is_empty());
        assert_eq!(sieve_primes(3), vec![2, 3]);
    }

    #[test]
    fn sieve_counts_match_prime_counting() {
        // π(10^k) from the trial-division oracle for small k; π(10^6) = 78498.
        let limit = 20_000;
        let expected = (0..=limit).filter(|&n| oracle::is_prime_trial(n)).count();
        assert_eq!(sieve_primes(limit).len(), expected);
        assert_eq!(sieve_primes(1_000_000).len(), 78_498);
    }

    #[test]
    fn sieve_crosses_segment_boundaries() {
        let limit = 3 * SEGMENT + 17;
        let primes = sieve_primes(limit);
        assert!(primes.windows(2).all(|w| w[0] < w[1]));
        for &p in primes.iter().step_by(97) {
            assert!(oracle::is_prime_trial(p), "{p}");
        }
        let expected = (0..=limit).filter(|&n| is_prime_64(n)).count();
        assert_eq!(primes.len(), expected);
    }

    #[test]
    fn lambda_table_examples() {
        let t = build_lambda_table(10).unwrap();
        assert_eq!(t.entry(8), 2);
        assert_eq!(t.entry(6), 0);
        assert_eq!(t.entry(1), 0);
        let t = build_lambda_table(100).unwrap();
        assert_eq!(t.entry(49), 7);
        assert_eq!(t.entry(97), 97);
        assert_eq!(t.entry(64), 2);
        assert_eq!(t.entry(100), 0);
    }

    #[test]
    fn lambda_table_agrees_with_pointwise_evaluation() {
        let limit = 100_000;
        let t = build_lambda_table(limit).unwrap();
        for n in 1..=limit {
            let expected = von_mangoldt_64(n).base.unwrap_or(0);
            assert_eq!(t.entry(n) as u64, expected, "n = {n}");
        }
    }

    #[test]
    fn chebyshev_psi_sanity() {
        let n = 10_000_000;
        let t = build_lambda_table(n).unwrap();
        let ratio = t.psi(n) / n as f64;
        assert!((ratio - 1.0).abs() < 0.05, "psi(N)/N = {ratio}");
    }

    #[test]
    fn primality_examples() {
        assert!(!is_prime_64(0));
        assert!(!is_prime_64(1));
        assert!(is_prime_64(2));
        assert!(is_prime_64(1_000_003));
        // 10^12 + 39 is prime (trial division oracle).
        assert!(oracle::is_prime_trial(1_000_000_000_039));
        assert!(is_prime_64(1_000_000_000_039));
        assert!(is_prime_64(18_446_744_073_709_551_557)); // largest 64-bit prime
        assert!(!is_prime_64(3_215_031_751)); // strong pseudoprime to 2, 3, 5, 7
        assert!(!is_prime_64(u64::MAX));
    }

    #[test]
    fn primality_matches_trial_division_to_a_million() {
        for n in 0..=1_000_000u64 {
            assert_eq!(is_prime_64(n), oracle::is_prime_trial(n), "n = {n}");
        }
    }

    #[test]
    fn von_mangoldt_examples() {
        assert_eq!(von_mangoldt_64(97).base, Some(97));
        assert!((von_mangoldt_64(97).weight() - 97f64.ln()).abs() < 1e-15);
        assert_eq!(3u64.pow(20), 3_486_784_401);
        assert_eq!(von_mangoldt_64(3_486_784_401).base, Some(3));
        assert_eq!(von_mangoldt_64(100).base, None);
        assert_eq!(von_mangoldt_64(1).base, None);
        assert_eq!(von_mangoldt_64(1 << 63).base, Some(2));
        assert_eq!(von_mangoldt_64(1_000_003 * 1_000_003).base, Some(1_000_003));
        assert_eq!(von_mangoldt_64(1_000_003 * 1_000_033).base, None);
    }

    #[test]
    fn integer_roots_at_boundaries() {
        assert_eq!(iroot(u64::MAX, 2), 4_294_967_295);
        assert_eq!(iroot(1 << 62, 2), 1 << 31);
        assert_eq!(iroot((1 << 62) - 1, 2), (1 << 31) - 1);
        assert_eq!(iroot(999_999_999_999, 3), 9_999);
        assert_eq!(iroot(1_000_000_000_000, 3), 10_000);
        assert_eq!(iroot(7, 5), 1);
        assert_eq!(exact_root(3_486_784_401, 20), Some(3));
        assert_eq!(exact_root(3_486_784_400, 20), None);
    }

    #[test]
    fn multiplicative_function_examples() {
        assert_eq!(mobius(30), -1);
        assert_eq!(mobius(12), 0);
        assert_eq!(mobius(1), 1);
        assert_eq!(euler_phi(10), 4);
        assert_eq!(euler_phi(1), 1);
        assert_eq!(euler_phi(97), 96);
        assert_eq!(factorize(360).factors, vec![(2, 3), (3, 2), (5, 1)]);
    }

    #[test]
    fn mobius_sums_over_divisors() {
        for n in 1..=10_000u64 {
            let s: i64 = (1..=n).filter(|d| n % d == 0).map(mobius).sum();
            assert_eq!(s, (n == 1) as i64, "n = {n}");
        }
    }

    #[test]
    fn factor_table_agrees_with_trial_division() {
        let table = FactorTable::new(5000);
        let mut buf = Vec::new();
        for n in 1..=5000 {
            let f = factorize(n);
            assert_eq!(table.factorize(n), f);
            let sf = table.square_free_primes(n, &mut buf);
            assert_eq!(sf, f.is_square_free());
            if sf {
                assert_eq!(buf, f.primes().collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn jacobi_matches_euler_criterion() {
        for p in sieve_primes(2000).into_iter().skip(1) {
            for a in 0..p {
                let e = pow_mod(a, (p - 1) / 2, p);
                let expected = if e == 0 { 0 } else if e == 1 { 1 } else { -1 };
                assert_eq!(jacobi(a, p), expected, "a={a} p={p}");
            }
        }
        assert_eq!(jacobi(2, 15), 1);
        assert_eq!(jacobi(7, 15), -1);
        assert_eq!(jacobi(5, 15), 0);
    }

    #[test]
    fn window_matches_dense_table() {
        let dense = build_lambda_table(200_000).unwrap();
        let primes = SievingPrimes::new(500);
        for (lo, hi) in [(1, 1000), (150_000, 151_000), (65_530, 65_540), (2, 2)] {
            let w = LambdaWindow::new(lo, hi, &primes).unwrap();
            for n in lo..=hi {
                assert_eq!(w.entry(n), dense.entry(n) as u64, "n = {n}");
            }
        }
        assert!(LambdaWindow::new(1, 1_000_000, &primes).is_err());
    }

    proptest! {
        #[test]
        fn factorization_reconstructs(n in 1u64..5_000_000) {
            let f = factorize(n);
            let prod: u64 = f.factors.iter().map(|&(p, e)| p.pow(e)).product();
            prop_assert_eq!(prod, n);
            prop_assert!(f.factors.windows(2).all(|w| w[0].0 < w[1].0));
            prop_assert!(f.primes().all(is_prime_64));
        }

        #[test]
        fn phi_is_multiplicative(a in 1u64..5000, b in 1u64..5000) {
            prop_assume!(gcd(a, b) == 1);
            prop_assert_eq!(euler_phi(a * b), euler_phi(a) * euler_phi(b));
        }

        #[test]
        fn iroot_brackets(n in any::<u64>(), k in 2u32..12) {
            let r = iroot(n, k);
            prop_assert!(r.checked_pow(k).is_some_and(|v| v <= n));
            prop_assert!((r + 1).checked_pow(k).is_none_or(|v| v > n));
        }
    }
}
