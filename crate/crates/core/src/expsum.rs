//! Exponential sums over a dyadic block, the major/minor arc dissection and
//! an exact check of the circle identity.
//!
//! With `N = ⌊2^ℓ z⌋` the four sums are
//!
//! ```text
//! I_ℓ(α, z) = Σ_{z < m^ℓ <= N} e(m^ℓ α)      J_ℓ(α, z) = Σ_{z < m^ℓ <= N} Λ(m) e(m^ℓ α)
//! I(α, z)   = Σ_{m <= N} e(-mα)              J(α, z)   = Σ_{m <= N} Λ(m) e(-mα)
//! ```
//!
//! Points are passed as [`Alpha`], a rational `a/q` plus a real offset `β`.
//! The rational part of every phase is reduced with integer arithmetic and
//! the real part with an error-free product, so large frequencies do not
//! eat the phase.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::arith::{build_lambda_table, euler_phi, gcd, iroot, mobius, LambdaTable};
use crate::local::{gauss_b, gauss_b_prime, PolynomialSpec};
use crate::numeric::NeumaierSum;
use crate::{par, Error, Result};

/// Largest `⌊2^ℓ z⌋` accepted by [`circle_integral`] and the sampling helpers.
pub const DFT_MAX_RANGE: u64 = 1_000_000;
/// Largest `⌊2^ℓ z⌋` accepted by the direct evaluators.
pub const EVAL_MAX_RANGE: u64 = 1 << 40;
/// Largest denominator bound `⌊Q⌋` for which arcs are materialized.
pub const ARCS_MAX_Q: u64 = 2000;

const BLOCK: u64 = 1 << 15;

/// A point `α = num/den + beta` on the circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Alpha {
    pub num: i64,
    pub den: u64,
    pub beta: f64,
}

impl Alpha {
    pub fn rational(num: i64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::invalid("denominator must be positive"));
        }
        Ok(Self { num, den, beta: 0.0 })
    }

    pub fn real(x: f64) -> Self {
        Self { num: 0, den: 1, beta: x }
    }

    /// `a/q + β`.
    pub fn shifted(a: i64, q: u64, beta: f64) -> Result<Self> {
        Ok(Self { beta, ..Self::rational(a, q)? })
    }

    pub fn is_rational(&self) -> bool {
        self.beta == 0.0
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64 + self.beta
    }

    pub fn plus_integer(&self, k: i64) -> Self {
        Self { num: self.num + k * self.den as i64, ..*self }
    }

    /// Fractional part of `n·α` in `[0, 1)`.
    pub fn frac_of_multiple(&self, n: u64) -> f64 {
        let den = self.den as u128;
        let r = (n as u128 % den) * (self.num.rem_euclid(self.den as i64) as u128) % den;
        let rational = r as f64 / self.den as f64;
        if self.beta == 0.0 {
            return rational;
        }
        let nf = n as f64;
        let p = nf * self.beta;
        let err = nf.mul_add(self.beta, -p);
        let t = (p - p.floor()) + err + rational;
        t - t.floor()
    }
}

impl std::ops::Neg for Alpha {
    type Output = Alpha;
    fn neg(self) -> Alpha {
        Alpha { num: -self.num, den: self.den, beta: -self.beta }
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.is_rational(), self.den) {
            (true, 1) => write!(f, "{}", self.num),
            (true, _) => write!(f, "{}/{}", self.num, self.den),
            (false, _) if self.num == 0 => write!(f, "{}", self.beta),
            (false, _) => write!(f, "{}/{}{:+}", self.num, self.den, self.beta),
        }
    }
}

/// Accepts `p/q`, an integer, or a decimal. Decimals with up to 18 digits
/// are read as exact rationals `d/10^k`; anything longer becomes a real.
impl FromStr for Alpha {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::invalid(format!("cannot parse alpha from {s:?}"));
        if let Some((p, q)) = s.split_once('/') {
            let p: i64 = p.trim().parse().map_err(|_| bad())?;
            let q: u64 = q.trim().parse().map_err(|_| bad())?;
            return Self::rational(p, q);
        }
        if let Ok(n) = s.parse::<i64>() {
            return Self::rational(n, 1);
        }
        let x: f64 = s.parse().map_err(|_| bad())?;
        if !x.is_finite() {
            return Err(bad());
        }
        if let Some((int, frac)) = s.split_once('.') {
            let digits = frac.len() as u32;
            if !s.contains(['e', 'E']) && digits <= 18 && frac.bytes().all(|b| b.is_ascii_digit()) {
                let joined = format!("{int}{frac}");
                if let (Ok(num), Some(den)) = (joined.parse::<i64>(), 10u64.checked_pow(digits)) {
                    let g = gcd(num.unsigned_abs(), den).max(1);
                    return Self::rational(num / g as i64, den / g);
                }
            }
        }
        Ok(Self::real(x))
    }
}

/// A complex value of one of the four sums, with the number of summands and
/// the trivial bound `Σ |coefficient|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpSumValue {
    pub re: f64,
    pub im: f64,
    pub terms: u64,
    pub bound: f64,
}

impl ExpSumValue {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn norm(&self) -> f64 {
        self.value().norm()
    }

    fn from_parts(z: Complex64, terms: u64, bound: f64) -> Self {
        Self { re: z.re, im: z.im, terms, bound }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Sign {
    Plus,
    Minus,
}

#[inline]
fn unit(theta: f64, sign: Sign) -> Complex64 {
    let (s, c) = (TAU * theta).sin_cos();
    match sign {
        Sign::Plus => Complex64::new(c, s),
        Sign::Minus => Complex64::new(c, -s),
    }
}

/// `Σ_{m=lo}^{hi} w(m) e(±freq(m)·α)` in fixed blocks, combined in order.
fn phase_sum<F>(alpha: &Alpha, lo: u64, hi: u64, sign: Sign, term: F) -> ExpSumValue
where
    F: Fn(u64) -> (u64, f64) + Sync,
{
    if lo > hi {
        return ExpSumValue::from_parts(Complex64::new(0.0, 0.0), 0, 0.0);
    }
    let starts: Vec<u64> = (lo..=hi).step_by(BLOCK as usize).collect();
    let partials = par::ordered_map(&starts, |&start| {
        let end = (start + BLOCK - 1).min(hi);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut bound = 0.0;
        for m in start..=end {
            let (freq, w) = term(m);
            if w != 0.0 {
                acc += unit(alpha.frac_of_multiple(freq), sign) * w;
                bound += w.abs();
            }
        }
        (acc, bound)
    });
    let mut re = NeumaierSum::new();
    let mut im = NeumaierSum::new();
    let mut bound = NeumaierSum::new();
    for (acc, b) in partials {
        re.add(acc.re);
        im.add(acc.im);
        bound.add(b);
    }
    let value = ExpSumValue::from_parts(Complex64::new(re.value(), im.value()), hi - lo + 1, bound.value());
    debug_assert!(value.norm() <= value.bound * (1.0 + 1e-12) + 1e-9);
    value
}

/// The integer ranges of one dyadic block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockRange {
    pub ell: u32,
    /// `⌊z⌋`.
    pub lower: u64,
    /// `⌊2^ℓ z⌋`.
    pub top: u64,
    /// Smallest `m` with `m^ℓ > z`.
    pub m_lo: u64,
    /// Largest `m` with `m^ℓ <= 2^ℓ z`.
    pub m_hi: u64,
}

impl BlockRange {
    pub fn new(ell: u32, z: f64) -> Result<Self> {
        if ell == 0 {
            return Err(Error::invalid("ell must be positive"));
        }
        if !(z >= 1.0) || !z.is_finite() {
            return Err(Error::invalid(format!("z must be >= 1, got {z}")));
        }
        let scaled = 2f64.powi(ell as i32) * z;
        if scaled > EVAL_MAX_RANGE as f64 {
            return Err(Error::range("expsum-range", format!("2^ℓ z = {scaled} exceeds 2^40")));
        }
        let lower = z.floor() as u64;
        let top = scaled.floor() as u64;
        Ok(Self { ell, lower, top, m_lo: iroot(lower, ell) + 1, m_hi: iroot(top, ell) })
    }

    /// `#{m : z < m^ℓ <= 2^ℓ z}`.
    pub fn power_count(&self) -> u64 {
        (self.m_hi + 1).saturating_sub(self.m_lo)
    }
}

fn lambda_table(limit: u64) -> Result<LambdaTable> {
    build_lambda_table(limit.max(1))
}

/// Evaluator for one `(ℓ, z)` that keeps the von Mangoldt table between calls.
#[derive(Debug, Clone)]
pub struct ExpSumContext {
    range: BlockRange,
    table: LambdaTable,
}

impl ExpSumContext {
    pub fn new(ell: u32, z: f64) -> Result<Self> {
        let range = BlockRange::new(ell, z)?;
        Ok(Self { range, table: lambda_table(range.top)? })
    }

    pub fn range(&self) -> BlockRange {
        self.range
    }

    pub fn i_ell(&self, alpha: &Alpha) -> ExpSumValue {
        i_ell_in(&self.range, alpha)
    }

    pub fn j_ell(&self, alpha: &Alpha) -> ExpSumValue {
        j_ell_in(&self.range, &self.table, alpha)
    }

    pub fn i(&self, alpha: &Alpha) -> ExpSumValue {
        i_in(&self.range, alpha)
    }

    pub fn j(&self, alpha: &Alpha) -> ExpSumValue {
        j_in(&self.range, &self.table, alpha)
    }

    /// `(R_ℓ, R'_ℓ)` at `α = a/q + β`:
    /// `R_ℓ = J_ℓ(α) - I_ℓ(β)·B_ℓ(q,a)/φ(q)` and `R'_ℓ = I_ℓ(α) - I_ℓ(β)·B'_ℓ(q,a)/q`.
    pub fn major_residual(&self, q: u64, a: i64, beta: f64) -> Result<(ExpSumValue, ExpSumValue)> {
        check_coprime(a, q)?;
        let alpha = Alpha::shifted(a, q, beta)?;
        let ell = self.range.ell;
        let base = self.i_ell(&Alpha::real(beta));
        let b = gauss_b(q, a, ell) / euler_phi(q) as f64;
        let b_prime = gauss_b_prime(q, a, ell) / q as f64;
        let j = self.j_ell(&alpha);
        let i = self.i_ell(&alpha);
        let r = j.value() - base.value() * b;
        let r_prime = i.value() - base.value() * b_prime;
        Ok((
            ExpSumValue::from_parts(r, j.terms, j.bound + base.bound * b.norm()),
            ExpSumValue::from_parts(r_prime, i.terms, i.bound + base.bound * b_prime.norm()),
        ))
    }

    /// `R(α) = J(α) - (μ(q)/φ(q))·I(β)` at `α = a/q + β`.
    pub fn linear_residual(&self, q: u64, a: i64, beta: f64) -> Result<ExpSumValue> {
        check_coprime(a, q)?;
        let alpha = Alpha::shifted(a, q, beta)?;
        let j = self.j(&alpha);
        let i = self.i(&Alpha::real(beta));
        let c = mobius(q) as f64 / euler_phi(q) as f64;
        Ok(ExpSumValue::from_parts(j.value() - i.value() * c, j.terms, j.bound + i.bound * c.abs()))
    }
}

fn check_coprime(a: i64, q: u64) -> Result<()> {
    if q == 0 || gcd(a.unsigned_abs(), q) != 1 {
        return Err(Error::NotCoprime { a, q });
    }
    Ok(())
}

fn i_ell_in(r: &BlockRange, alpha: &Alpha) -> ExpSumValue {
    let ell = r.ell;
    phase_sum(alpha, r.m_lo, r.m_hi, Sign::Plus, |m| (m.pow(ell), 1.0))
}

fn j_ell_in(r: &BlockRange, table: &LambdaTable, alpha: &Alpha) -> ExpSumValue {
    let ell = r.ell;
    phase_sum(alpha, r.m_lo, r.m_hi, Sign::Plus, |m| (m.pow(ell), table.weight(m)))
}

fn i_in(r: &BlockRange, alpha: &Alpha) -> ExpSumValue {
    phase_sum(alpha, 1, r.top, Sign::Minus, |m| (m, 1.0))
}

fn j_in(r: &BlockRange, table: &LambdaTable, alpha: &Alpha) -> ExpSumValue {
    phase_sum(alpha, 1, r.top, Sign::Minus, |m| (m, table.weight(m)))
}

#[allow(non_snake_case)]
pub fn eval_I_ell(alpha: &Alpha, z: f64, ell: u32) -> Result<ExpSumValue> {
    Ok(i_ell_in(&BlockRange::new(ell, z)?, alpha))
}

#[allow(non_snake_case)]
pub fn eval_J_ell(alpha: &Alpha, z: f64, ell: u32) -> Result<ExpSumValue> {
    let r = BlockRange::new(ell, z)?;
    Ok(j_ell_in(&r, &lambda_table(r.m_hi)?, alpha))
}

#[allow(non_snake_case)]
pub fn eval_I(alpha: &Alpha, z: f64, ell: u32) -> Result<ExpSumValue> {
    Ok(i_in(&BlockRange::new(ell, z)?, alpha))
}

#[allow(non_snake_case)]
pub fn eval_J(alpha: &Alpha, z: f64, ell: u32) -> Result<ExpSumValue> {
    let r = BlockRange::new(ell, z)?;
    Ok(j_in(&r, &lambda_table(r.top)?, alpha))
}

/// Which of the four sums to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Which {
    I,
    J,
    Iell,
    Jell,
}

impl FromStr for Which {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "I" => Ok(Which::I),
            "J" => Ok(Which::J),
            "Iell" => Ok(Which::Iell),
            "Jell" => Ok(Which::Jell),
            _ => Err(Error::invalid(format!("unknown sum {s:?}, expected I, J, Iell or Jell"))),
        }
    }
}

pub fn eval(which: Which, alpha: &Alpha, z: f64, ell: u32) -> Result<ExpSumValue> {
    match which {
        Which::I => eval_I(alpha, z, ell),
        Which::J => eval_J(alpha, z, ell),
        Which::Iell => eval_I_ell(alpha, z, ell),
        Which::Jell => eval_J_ell(alpha, z, ell),
    }
}

/// `(R_ℓ, R'_ℓ)` at `α = a/q + β`; see [`ExpSumContext::major_residual`].
pub fn major_residual(q: u64, a: i64, beta: f64, z: f64, ell: u32) -> Result<(ExpSumValue, ExpSumValue)> {
    check_coprime(a, q)?;
    ExpSumContext::new(ell, z)?.major_residual(q, a, beta)
}

/// `R(α) = J(α) - (μ(q)/φ(q))·I(β)`; see [`ExpSumContext::linear_residual`].
pub fn linear_residual(q: u64, a: i64, beta: f64, z: f64, ell: u32) -> Result<ExpSumValue> {
    check_coprime(a, q)?;
    ExpSumContext::new(ell, z)?.linear_residual(q, a, beta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MajorArc {
    pub q: u64,
    pub a: u64,
    /// Left endpoint, excluded.
    pub lo: f64,
    /// Right endpoint, included.
    pub hi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "UPPERCASE")]
pub enum ArcClass {
    Major { q: u64, a: u64 },
    Minor,
}

/// Arcs `(a/q - δ, a/q + δ]` for `q <= Q`, `1 <= a <= q`, `gcd(a, q) = 1`,
/// with `L = ln X`, `Q = L^E` and `δ = L^E / X`. Arcs are listed in
/// increasing order of `a/q`, so the one around `1/1` comes last.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcPartition {
    #[serde(rename = "X")]
    pub x: u64,
    pub exponent: f64,
    #[serde(rename = "Q")]
    pub q_bound: f64,
    pub q_max: u64,
    pub delta: f64,
    pub major: Vec<MajorArc>,
}

/// Exact sign of `n - c·k` for an integer `n`, a double `c` and an integer
/// `k < 2^53`, using an error-free product.
fn compare_int_with_product(n: i128, c: f64, k: u64) -> std::cmp::Ordering {
    let kf = k as f64;
    let t = c * kf;
    let e = c.mul_add(kf, -t);
    let nf = n as f64;
    if nf as i128 != n {
        return nf.partial_cmp(&t).unwrap_or(std::cmp::Ordering::Equal);
    }
    let d = nf - t;
    d.partial_cmp(&e).unwrap_or(std::cmp::Ordering::Equal)
}

/// Farey fractions `a/q` in `(0, 1]` with `q <= n`, in increasing order.
fn farey(n: u64) -> Vec<(u64, u64)> {
    let (mut a, mut b, mut c, mut d) = (0u64, 1u64, 1u64, n);
    let mut out = vec![(c, d)];
    while c < d {
        let k = (n + b) / d;
        let next = (k * c - a, k * d - b);
        (a, b) = (c, d);
        (c, d) = next;
        out.push((c, d));
    }
    out
}

pub fn build_arcs(x: u64, exponent: f64) -> Result<ArcPartition> {
    if x < 16 {
        return Err(Error::invalid(format!("X must be >= 16, got {x}")));
    }
    if !(exponent > 0.0) || !exponent.is_finite() {
        return Err(Error::invalid(format!("exponent must be positive, got {exponent}")));
    }
    let xf = x as f64;
    let q_bound = xf.ln().powf(exponent);
    if q_bound.powi(3) > xf {
        return Err(Error::range(
            "arcs-disjointness",
            format!("Q^3 = {} exceeds X = {x}", q_bound.powi(3)),
        ));
    }
    let q_max = q_bound.floor() as u64;
    if q_max > ARCS_MAX_Q {
        return Err(Error::range("arcs-count", format!("Q = {q_bound} exceeds {ARCS_MAX_Q}")));
    }
    let delta = q_bound / xf;
    let fractions = farey(q_max);
    // Adjacent Farey fractions satisfy a'q - aq' = 1, so neighbouring arcs
    // are disjoint iff 2δ·q·q' <= 1; the first arc must also clear δ.
    let (_, q_first) = fractions[0];
    if compare_int_with_product(1, 2.0 * delta, q_first).is_lt() {
        return Err(Error::ArcOverlap { left: "1/1 - 1".into(), right: format!("1/{q_first}") });
    }
    for w in fractions.windows(2) {
        let ((a1, q1), (a2, q2)) = (w[0], w[1]);
        let gap = a2 as i128 * q1 as i128 - a1 as i128 * q2 as i128;
        if compare_int_with_product(gap, 2.0 * delta, q1 * q2).is_lt() {
            return Err(Error::ArcOverlap { left: format!("{a1}/{q1}"), right: format!("{a2}/{q2}") });
        }
    }
    let major = fractions
        .into_iter()
        .map(|(a, q)| {
            let c = a as f64 / q as f64;
            MajorArc { q, a, lo: c - delta, hi: c + delta }
        })
        .collect();
    Ok(ArcPartition { x, exponent, q_bound, q_max, delta, major })
}

/// Slack used when classifying a point given only as a double.
pub const REAL_SLACK: f64 = 1e-15;

impl ArcPartition {
    /// `Σ_{q<=Q} φ(q)·2δ`.
    pub fn total_measure(&self) -> f64 {
        let count: u64 = (1..=self.q_max).map(euler_phi).sum();
        count as f64 * 2.0 * self.delta
    }

    /// `Σ (hi - lo)` over the materialized arcs.
    pub fn measure_direct(&self) -> f64 {
        self.major.iter().map(|arc| arc.hi - arc.lo).collect::<NeumaierSum>().value()
    }

    /// `MAJOR(q, a)` if `α` lies in `(a/q - δ, a/q + δ]` modulo 1.
    pub fn classify(&self, alpha: &Alpha) -> ArcClass {
        if alpha.is_rational() {
            if let Some(c) = self.classify_rational(alpha.num, alpha.den) {
                return c;
            }
        }
        self.classify_real(alpha.to_f64())
    }

    fn classify_rational(&self, num: i64, den: u64) -> Option<ArcClass> {
        let r = num.rem_euclid(den as i64) as i128;
        let s = den as i128;
        for q in 1..=self.q_max {
            let sq = (den as u128).checked_mul(q as u128)?;
            if sq >= 1 << 53 {
                return None;
            }
            // Nearest numerator, floor((2rq + s) / 2s).
            let near = (2 * r * q as i128 + s).div_euclid(2 * s);
            for a in [near - 1, near, near + 1] {
                let a_mod = a.rem_euclid(q as i128) as u64;
                let a_mod = if a_mod == 0 { q } else { a_mod };
                if gcd(a_mod, q) != 1 {
                    continue;
                }
                // α - a/q = d / (s q) with d = r q - a s; test -δ < d/(sq) <= δ.
                let d = r * q as i128 - a * s;
                let below_upper = compare_int_with_product(d, self.delta, sq as u64).is_le();
                let above_lower = compare_int_with_product(-d, self.delta, sq as u64).is_lt();
                if below_upper && above_lower {
                    return Some(ArcClass::Major { q, a: a_mod });
                }
            }
        }
        Some(ArcClass::Minor)
    }

    fn classify_real(&self, x: f64) -> ArcClass {
        let x = x.rem_euclid(1.0);
        for q in 1..=self.q_max {
            let qf = q as f64;
            let near = (x * qf).round() as i64;
            for a in [near - 1, near, near + 1] {
                let a_mod = a.rem_euclid(q as i64) as u64;
                let a_mod = if a_mod == 0 { q } else { a_mod };
                if gcd(a_mod, q) != 1 {
                    continue;
                }
                let d = x - a as f64 / qf;
                if d > -self.delta - REAL_SLACK && d <= self.delta + REAL_SLACK {
                    return ArcClass::Major { q, a: a_mod };
                }
            }
        }
        ArcClass::Minor
    }
}

fn dft_guard(range: &BlockRange) -> Result<()> {
    if range.top > DFT_MAX_RANGE {
        return Err(Error::range(
            "circle-dft-size",
            format!("2^ℓ z = {} exceeds {DFT_MAX_RANGE}", range.top),
        ));
    }
    Ok(())
}

/// `J(k/n)` for `k = 0..n` by one forward FFT.
fn sample_j(range: &BlockRange, table: &LambdaTable, n: usize) -> Vec<Complex64> {
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for m in 1..=range.top {
        buf[m as usize % n] += table.weight(m);
    }
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf
}

/// `J_ℓ(k/n)` for `k = 0..n` by one unnormalized inverse FFT.
fn sample_j_ell(range: &BlockRange, table: &LambdaTable, n: usize) -> Vec<Complex64> {
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for m in range.m_lo..=range.m_hi {
        buf[(m.pow(range.ell) % n as u64) as usize] += table.weight(m);
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    buf
}

/// `J_ℓ(k/n, z)` on an `n`-point grid.
pub fn sample_j_ell_grid(ell: u32, z: f64, n: usize) -> Result<Vec<Complex64>> {
    let range = BlockRange::new(ell, z)?;
    dft_guard(&range)?;
    if n == 0 || n as u64 > 8 * DFT_MAX_RANGE {
        return Err(Error::invalid(format!("grid size must lie in [1, {}]", 8 * DFT_MAX_RANGE)));
    }
    Ok(sample_j_ell(&range, &lambda_table(range.m_hi)?, n))
}

/// `∫_0^1 J(α,z) J_ℓ(α,z) e(uα) dα`, evaluated exactly as the mean over an
/// FFT grid finer than every frequency in the integrand. This equals
/// `Σ Λ(m)Λ(m^ℓ+u)` over `z < m^ℓ <= 2^ℓ z` with `m^ℓ + u <= 2^ℓ z`.
pub fn circle_integral(spec: &PolynomialSpec, z: f64) -> Result<f64> {
    let range = BlockRange::new(spec.ell, z)?;
    dft_guard(&range)?;
    if spec.u < 1 {
        return Err(Error::invalid(format!("u must be >= 1, got {}", spec.u)));
    }
    let u = spec.u as u64;
    if u > DFT_MAX_RANGE {
        return Err(Error::range("circle-dft-size", format!("u = {u} exceeds {DFT_MAX_RANGE}")));
    }
    let n = (2 * range.top + u + 1).next_power_of_two() as usize;
    let table = lambda_table(range.top)?;
    let j = sample_j(&range, &table, n);
    let j_ell = sample_j_ell(&range, &table, n);
    let mut re = NeumaierSum::new();
    let mut im = NeumaierSum::new();
    for (k, (a, b)) in j.iter().zip(&j_ell).enumerate() {
        let idx = (u as u128 * k as u128 % n as u128) as f64;
        let v = a * b * unit(idx / n as f64, Sign::Plus);
        re.add(v.re);
        im.add(v.im);
    }
    let (re, im) = (re.value() / n as f64, im.value() / n as f64);
    let scale: f64 = j_ell[0].re * j[0].re;
    let tol = 1e-8f64.max(1e-14 * scale);
    if im.abs() > tol {
        return Err(Error::Numerical(format!("imaginary part {im:e} exceeds {tol:e}")));
    }
    Ok(re)
}

/// `((1/n) Σ_k |J_ℓ(k/n, z)|^2, Σ_{z<m^ℓ<=2^ℓ z} Λ(m)^2)`. The grid must satisfy
/// `n > 2·⌊2^ℓ z⌋`; `None` picks the next power of two.
pub fn parseval_mean(ell: u32, z: f64, n: Option<usize>) -> Result<(f64, f64)> {
    let range = BlockRange::new(ell, z)?;
    dft_guard(&range)?;
    let n = n.unwrap_or((2 * range.top + 1).next_power_of_two() as usize);
    if (n as u64) <= 2 * range.top {
        return Err(Error::invalid(format!("grid size {n} must exceed {}", 2 * range.top)));
    }
    let table = lambda_table(range.m_hi)?;
    let samples = sample_j_ell(&range, &table, n);
    let mean = samples.iter().map(|v| v.norm_sqr()).collect::<NeumaierSum>().value() / n as f64;
    let target = (range.m_lo..=range.m_hi)
        .map(|m| table.weight(m).powi(2))
        .collect::<NeumaierSum>()
        .value();
    Ok((mean, target))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::convolution_count;
    use proptest::prelude::*;

    fn spec(ell: u32, u: i64) -> PolynomialSpec {
        PolynomialSpec::new(ell, u).unwrap()
    }

    fn close(a: ExpSumValue, b: ExpSumValue, tol: f64) -> bool {
        (a.value() - b.value()).norm() <= tol
    }

    #[test]
    fn alpha_parsing() {
        assert_eq!("3/7".parse::<Alpha>().unwrap(), Alpha::rational(3, 7).unwrap());
        assert_eq!("0.25".parse::<Alpha>().unwrap(), Alpha::rational(1, 4).unwrap());
        assert_eq!("-2".parse::<Alpha>().unwrap(), Alpha::rational(-2, 1).unwrap());
        assert!("1e-3".parse::<Alpha>().unwrap().beta == 1e-3);
        assert!("1/0".parse::<Alpha>().is_err());
        assert!("abc".parse::<Alpha>().is_err());
    }

    #[test]
    fn phase_reduction_is_exact_for_rationals() {
        let a = Alpha::rational(1, 3).unwrap();
        assert_eq!(a.frac_of_multiple(1_000_000_000_000), 1.0 / 3.0);
        let b = Alpha::shifted(1, 2, 1e-9).unwrap();
        let f = b.frac_of_multiple(3_000_000);
        assert!((f - 0.003).abs() < 1e-12);
    }

    #[test]
    fn i_ell_at_zero_counts_powers() {
        for (ell, z) in [(2u32, 16.0), (2, 1000.0), (3, 64.0), (4, 50.5)] {
            let v = eval_I_ell(&Alpha::real(0.0), z, ell).unwrap();
            let r = BlockRange::new(ell, z).unwrap();
            let expected = iroot((2f64.powi(ell as i32) * z) as u64, ell) - iroot(z as u64, ell);
            assert_eq!(v.re, expected as f64);
            assert_eq!(v.im, 0.0);
            assert_eq!(r.power_count(), expected);
        }
    }

    #[test]
    fn i_ell_at_half() {
        let v = eval_I_ell(&Alpha::rational(1, 2).unwrap(), 16.0, 2).unwrap();
        assert!(v.value().norm() < 1e-12);
        assert_eq!(v.terms, 4);
    }

    #[test]
    fn j_at_zero_is_psi() {
        let z = 1000.0;
        let v = eval_J(&Alpha::real(0.0), z, 2).unwrap();
        let table = build_lambda_table(4000).unwrap();
        assert!((v.re - table.psi(4000)).abs() < 1e-9);
    }

    #[test]
    fn trivial_bound_holds() {
        let ctx = ExpSumContext::new(3, 500.0).unwrap();
        for s in ["1/3", "2/7", "0.123456", "5/11"] {
            let a: Alpha = s.parse().unwrap();
            for v in [ctx.i(&a), ctx.j(&a), ctx.i_ell(&a), ctx.j_ell(&a)] {
                assert!(v.norm() <= v.bound + 1e-9);
                assert!(v.bound <= v.terms as f64 * (4000f64).ln() + 1e-9);
            }
        }
    }

    #[test]
    fn rational_residual_vanishes_on_the_unit_arc() {
        let (_, r_prime) = major_residual(1, 1, 0.0, 1000.0, 2).unwrap();
        assert_eq!(r_prime.re, 0.0);
        assert_eq!(r_prime.im, 0.0);
        assert!(matches!(major_residual(4, 2, 0.0, 100.0, 2), Err(Error::NotCoprime { .. })));
    }

    #[test]
    fn major_residual_at_a_third() {
        // No power of 3 lies in (100, 200], so every prime power m there has
        // m^2 ≡ 1 (mod 3) and R_2 = e(1/3)·(ψ(200) - ψ(100) - 100). Reference
        // from an independent summation.
        let ctx = ExpSumContext::new(2, 1e4).unwrap();
        let (r, _) = ctx.major_residual(3, 1, 0.0).unwrap();
        assert!((r.re - -6.050272797848663).abs() < 1e-9);
        assert!((r.im - 10.479379885525802).abs() < 1e-9);
        let j = ctx.j_ell(&Alpha::rational(1, 3).unwrap());
        assert!(r.norm() < 0.15 * j.norm());
        let wide = ExpSumContext::new(2, 1e6).unwrap();
        let (r_wide, _) = wide.major_residual(3, 1, 0.0).unwrap();
        let j_wide = wide.j_ell(&Alpha::rational(1, 3).unwrap());
        assert!(r_wide.norm() / j_wide.norm() < r.norm() / j.norm());
    }

    #[test]
    fn linear_residual_against_direct_sum() {
        let ctx = ExpSumContext::new(1, 500.0).unwrap();
        let (q, a, beta) = (5u64, 2i64, 1e-4);
        let r = ctx.linear_residual(q, a, beta).unwrap();
        let table = build_lambda_table(1000).unwrap();
        let alpha = 2.0 / 5.0 + beta;
        let c = mobius(q) as f64 / euler_phi(q) as f64;
        let mut direct = Complex64::new(0.0, 0.0);
        for m in 1..=1000u64 {
            let ph = Complex64::from_polar(1.0, -TAU * (m as f64 * alpha).fract());
            let ph_beta = Complex64::from_polar(1.0, -TAU * (m as f64 * beta).fract());
            direct += ph * table.weight(m) - ph_beta * c;
        }
        assert!((r.value() - direct).norm() < 1e-8);
    }

    #[test]
    fn circle_examples() {
        assert!(circle_integral(&spec(2, 1), 16.0).unwrap().abs() < 1e-8);
        let expected = 5f64.ln() * 29f64.ln() + 7f64.ln() * 53f64.ln();
        assert!((circle_integral(&spec(2, 4), 16.0).unwrap() - expected).abs() < 1e-8);
        assert!(circle_integral(&spec(2, 100), 16.0).unwrap().abs() < 1e-8);
        let zero_shift = PolynomialSpec { ell: 2, u: 0 };
        assert!(circle_integral(&zero_shift, 16.0).is_err());
        assert!(matches!(
            circle_integral(&spec(2, 1), 1e6),
            Err(Error::Range { guard: "circle-dft-size", .. })
        ));
    }

    #[test]
    fn circle_matches_convolution() {
        for (ell, z) in [(1u32, 37.0), (2, 50.0), (3, 20.5)] {
            for u in 1..=12 {
                let s = spec(ell, u);
                let lhs = circle_integral(&s, z).unwrap();
                let rhs = convolution_count(&s, z).unwrap();
                assert!((lhs - rhs).abs() < 1e-6, "ell={ell} z={z} u={u}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn parseval_examples() {
        let (mean, target) = parseval_mean(2, 200.0, None).unwrap();
        assert!(((mean - target) / target).abs() < 1e-8);
        assert!(parseval_mean(2, 200.0, Some(1600)).is_err());
        let (mean, target) = parseval_mean(3, 100.0, Some(1601)).unwrap();
        assert!(((mean - target) / target).abs() < 1e-8);
    }

    #[test]
    fn arcs_examples() {
        let p = build_arcs(1_000_000, 1.0).unwrap();
        assert_eq!(p.q_max, 13);
        for arc in &p.major {
            assert!(arc.lo >= p.delta && arc.hi <= 1.0 + p.delta);
            let a = Alpha::rational(arc.a as i64, arc.q).unwrap();
            assert_eq!(p.classify(&a), ArcClass::Major { q: arc.q, a: arc.a });
        }
        for w in p.major.windows(2) {
            assert!(w[0].hi <= w[1].lo);
        }
        let q_up = p.q_bound.ceil() as u64;
        let off = Alpha::shifted(1, 2 * q_up + 1, 3.0 * p.delta).unwrap();
        assert_eq!(p.classify(&off), ArcClass::Minor);
        assert_eq!(p.classify(&Alpha::real(0.0)), ArcClass::Major { q: 1, a: 1 });
        assert_eq!(p.classify(&Alpha::rational(-2, 3).unwrap()), ArcClass::Major { q: 3, a: 1 });
        assert!((p.total_measure() - p.measure_direct()).abs() < 1e-12);
    }

    #[test]
    fn arc_endpoints() {
        let p = build_arcs(1_000_000, 1.0).unwrap();
        // δ·X = L exactly only up to rounding, so probe at rational points well
        // inside and outside of each boundary.
        let x = 1_000_000u64;
        let inside = Alpha::rational((x / 2) as i64 + 13, x).unwrap();
        assert_eq!(p.classify(&inside), ArcClass::Major { q: 2, a: 1 });
        let outside = Alpha::rational((x / 2) as i64 + 14, x).unwrap();
        assert_eq!(p.classify(&outside), ArcClass::Minor);
        let left = Alpha::rational((x / 2) as i64 - 13, x).unwrap();
        assert_eq!(p.classify(&left), ArcClass::Major { q: 2, a: 1 });
    }

    #[test]
    fn arcs_reject_large_exponent() {
        assert!(matches!(
            build_arcs(1000, 2.0),
            Err(Error::Range { guard: "arcs-disjointness", .. })
        ));
        assert!(build_arcs(10, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn periodicity(num in -50i64..50, den in 1u64..60, beta in -0.01f64..0.01, k in -3i64..3) {
            let ctx = ExpSumContext::new(2, 300.0).unwrap();
            let a = Alpha::shifted(num, den, beta).unwrap();
            let b = a.plus_integer(k);
            prop_assert!(close(ctx.i_ell(&a), ctx.i_ell(&b), 1e-10));
            prop_assert!(close(ctx.j_ell(&a), ctx.j_ell(&b), 1e-10));
            prop_assert!(close(ctx.i(&a), ctx.i(&b), 1e-10));
            prop_assert!(close(ctx.j(&a), ctx.j(&b), 1e-10));
        }

        #[test]
        fn conjugate_symmetry(num in -50i64..50, den in 1u64..60, beta in -0.01f64..0.01) {
            let a = Alpha::shifted(num, den, beta).unwrap();
            let lhs = eval_I_ell(&a, 500.0, 3).unwrap().value().conj();
            let rhs = eval_I_ell(&-a, 500.0, 3).unwrap().value();
            prop_assert!((lhs - rhs).norm() < 1e-10);
        }

        #[test]
        fn farey_arcs_disjoint(x in 16u64..5_000_000, e in 0.3f64..1.2) {
            if let Ok(p) = build_arcs(x, e) {
                for w in p.major.windows(2) {
                    let gap = (w[1].a * w[0].q) as i128 - (w[0].a * w[1].q) as i128;
                    prop_assert_eq!(gap, 1);
                    prop_assert!(w[0].hi <= w[1].lo + 1e-15);
                }
            }
        }
    }
}
