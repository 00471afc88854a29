//! Weighted prime counts along `m^ℓ + u`.
//!
//! `count_weighted` is `Σ_{m^ℓ <= X} Λ(m)Λ(m^ℓ + u)` and `count_outer` is
//! `Σ_{m^ℓ <= X} Λ(m^ℓ + u)`. Both include prime powers, exactly as `Λ`
//! demands. Values `m^ℓ + u < 1` (possible for negative `u`) contribute 0.
//!
//! [`sweep_counts`] evaluates both counts for every `1 <= u <= y` at once,
//! sieving `Λ` on the window `[m^ℓ + 1, m^ℓ + y]` for each `m` (or on one
//! dense table when the whole range is small).

use serde::{Deserialize, Serialize};

use crate::arith::{
    build_lambda_table, iroot, isqrt, von_mangoldt_64, LambdaTable, LambdaWindow, SievingPrimes,
};
use crate::local::PolynomialSpec;
use crate::numeric::NeumaierSum;
use crate::series::SeriesTables;
use crate::{par, Error, Result};

/// All evaluated values must stay below this bound.
pub const VALUE_LIMIT: u64 = 1 << 63;
/// Largest `⌊X^{1/ℓ}⌋` accepted by [`sweep_counts`].
pub const SWEEP_M_LIMIT: u64 = 1 << 28;

/// Dense tables are used when every value fits below this bound.
const DENSE_LIMIT: u64 = 1 << 25;

/// Number of consecutive `m` handled by one work item in sweeps. Fixed so
/// the reduction order is independent of the worker count.
const M_BLOCK: u64 = 64;

/// `#{m >= 1 : m^ℓ <= X} = ⌊X^{1/ℓ}⌋`.
pub fn root_count(x: u64, ell: u32) -> u64 {
    iroot(x, ell)
}

fn value_guard(spec: &PolynomialSpec, m_max: u64, extra: u64) -> Result<()> {
    let top = m_max
        .checked_pow(spec.ell)
        .and_then(|v| v.checked_add(spec.u.max(0) as u64))
        .and_then(|v| v.checked_add(extra));
    match top {
        Some(v) if v < VALUE_LIMIT => Ok(()),
        _ => Err(Error::range(
            "value-below-2^63",
            format!("m^{} + u exceeds 2^63 for m up to {m_max}", spec.ell),
        )),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Weighting {
    Weighted,
    Outer,
}

/// Sum over integers `m` with `lo < m^ℓ <= hi`.
fn count_between(spec: &PolynomialSpec, lo: u64, hi: u64, weighting: Weighting) -> Result<f64> {
    let m_max = iroot(hi, spec.ell);
    value_guard(spec, m_max, 0)?;
    let m_min = iroot(lo, spec.ell) + 1;
    let table = match weighting {
        Weighting::Weighted => Some(build_lambda_table(m_max)?),
        Weighting::Outer => None,
    };
    let mut sum = NeumaierSum::new();
    for m in m_min..=m_max {
        let lam_m = table.as_ref().map_or(1.0, |t| t.weight(m));
        if lam_m == 0.0 {
            continue;
        }
        let n = m.pow(spec.ell) as i64 + spec.u;
        if n >= 1 {
            let w = von_mangoldt_64(n as u64).weight();
            if w != 0.0 {
                sum.add(lam_m * w);
            }
        }
    }
    Ok(sum.value())
}

/// `Σ_{m^ℓ <= X} Λ(m)Λ(m^ℓ + u)`.
pub fn count_weighted(spec: &PolynomialSpec, x: u64) -> Result<f64> {
    count_between(spec, 0, x, Weighting::Weighted)
}

/// `Σ_{m^ℓ <= X} Λ(m^ℓ + u)`.
pub fn count_outer(spec: &PolynomialSpec, x: u64) -> Result<f64> {
    count_between(spec, 0, x, Weighting::Outer)
}

/// [`count_weighted`] restricted to `lo < m^ℓ <= hi`.
pub fn count_weighted_between(spec: &PolynomialSpec, lo: u64, hi: u64) -> Result<f64> {
    count_between(spec, lo, hi, Weighting::Weighted)
}

/// [`count_outer`] restricted to `lo < m^ℓ <= hi`.
pub fn count_outer_between(spec: &PolynomialSpec, lo: u64, hi: u64) -> Result<f64> {
    count_between(spec, lo, hi, Weighting::Outer)
}

/// One shift's count against its singular-series prediction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub spec: PolynomialSpec,
    #[serde(rename = "X")]
    pub x: u64,
    pub count: f64,
    pub prediction: f64,
    pub error: f64,
}

impl ErrorRecord {
    pub fn new(spec: PolynomialSpec, x: u64, count: f64, sigma: f64) -> Self {
        let prediction = sigma * root_count(x, spec.ell) as f64;
        Self {
            spec,
            x,
            count,
            prediction,
            error: count - prediction,
        }
    }
}

/// `Σ Λ(m)Λ(m^ℓ + u)` against `𝔖_ℓ(u)·⌊X^{1/ℓ}⌋`.
pub fn error_record(spec: &PolynomialSpec, x: u64, sigma_cutoff: f64) -> Result<ErrorRecord> {
    let sigma = crate::series::sigma_full(spec, sigma_cutoff)?.value;
    Ok(ErrorRecord::new(*spec, x, count_weighted(spec, x)?, sigma))
}

/// `Σ Λ(m^ℓ + u)` against `𝔖'_ℓ(u)·⌊X^{1/ℓ}⌋`.
pub fn error_record_outer(spec: &PolynomialSpec, x: u64, sigma_cutoff: f64) -> Result<ErrorRecord> {
    let sigma = crate::series::sigma_prime_full(spec, sigma_cutoff)?.value;
    Ok(ErrorRecord::new(*spec, x, count_outer(spec, x)?, sigma))
}

/// Half-open block `(lo, hi]` of values of `m^ℓ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DyadicBlock {
    /// Real lower end `z` (exclusive).
    pub z: f64,
    /// Real upper end (inclusive), `2^ℓ z` except where truncated.
    pub upper: f64,
    /// `⌊z⌋`: integers `n` in the block satisfy `lo < n <= hi`.
    pub lo: u64,
    pub hi: u64,
}

/// Cover of `(X L^{-B}, X]`, `L = ln X`, by blocks `(z, 2^ℓ z]` with `z`
/// running down from `X/2^ℓ` by factors of `2^ℓ`. The last block is cut at
/// `X L^{-B}`. Returns the blocks (descending) and the head cut `X L^{-B}`.
pub fn dyadic_blocks(ell: u32, x: u64, b_param: f64) -> Result<(Vec<DyadicBlock>, f64)> {
    if ell == 0 || ell >= 63 {
        return Err(Error::invalid("ell must be in 1..63"));
    }
    let step = (1u64 << ell) as f64;
    if (x as f64) < step || x < 3 {
        return Err(Error::invalid(format!("X must be at least 2^ell = {step}")));
    }
    if !(b_param > 0.0) {
        return Err(Error::invalid("B must be positive"));
    }
    let xf = x as f64;
    let cut = xf * xf.ln().powf(-b_param);
    let mut blocks = Vec::new();
    let mut upper = xf;
    while upper > cut {
        let z = (upper / step).max(cut);
        blocks.push(DyadicBlock {
            z,
            upper,
            lo: z.floor() as u64,
            hi: upper.floor() as u64,
        });
        upper = z;
    }
    Ok((blocks, cut))
}

/// Per-shift counts for `u = 1..=y`; index `u - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCounts {
    pub ell: u32,
    pub x: u64,
    pub weighted: Vec<f64>,
    pub outer: Vec<f64>,
}

enum LambdaSource<'a> {
    Dense(&'a LambdaTable),
    Windowed(&'a SievingPrimes),
}

/// Both counts for every shift `1 <= u <= y` at a common `X`.
///
/// Work is split into fixed blocks of `m`; each block accumulates its own
/// per-shift partial sums in ascending `m`, and blocks are reduced in order.
/// The result is bit-identical for any worker count.
pub fn sweep_counts(ell: u32, x: u64, y: u64) -> Result<SweepCounts> {
    let probe = PolynomialSpec::new(ell, 1)?;
    if y == 0 {
        return Ok(SweepCounts { ell, x, weighted: Vec::new(), outer: Vec::new() });
    }
    let m_max = iroot(x, ell);
    value_guard(&probe, m_max, y)?;
    if m_max > SWEEP_M_LIMIT {
        return Err(Error::range(
            "sweep-m-limit",
            format!("X^(1/ℓ) = {m_max} exceeds {SWEEP_M_LIMIT}"),
        ));
    }
    let top = m_max.pow(ell) + y;
    let small = build_lambda_table(m_max)?;

    let dense;
    let base_primes;
    let source = if top <= DENSE_LIMIT {
        dense = build_lambda_table(top)?;
        LambdaSource::Dense(&dense)
    } else {
        base_primes = SievingPrimes::new(isqrt(top));
        LambdaSource::Windowed(&base_primes)
    };
    sweep_with_source(ell, x, y, m_max, &small, &source)
}

fn sweep_with_source(
    ell: u32,
    x: u64,
    y: u64,
    m_max: u64,
    small: &LambdaTable,
    source: &LambdaSource<'_>,
) -> Result<SweepCounts> {
    let blocks: Vec<(u64, u64)> = (0..m_max.div_ceil(M_BLOCK))
        .map(|b| (b * M_BLOCK + 1, ((b + 1) * M_BLOCK).min(m_max)))
        .collect();
    let partials = par::ordered_map(&blocks, |&(m_lo, m_hi)| -> Result<(Vec<f64>, Vec<f64>)> {
        let mut weighted = vec![0.0; y as usize];
        let mut outer = vec![0.0; y as usize];
        for m in m_lo..=m_hi {
            let base = m.pow(ell);
            let lam_m = small.weight(m);
            let window = match source {
                LambdaSource::Windowed(primes) => Some(LambdaWindow::new(base + 1, base + y, primes)?),
                LambdaSource::Dense(_) => None,
            };
            for u in 1..=y {
                let p = match (source, &window) {
                    (LambdaSource::Dense(t), _) => t.entry(base + u) as u64,
                    (_, Some(w)) => w.entry(base + u),
                    _ => unreachable!(),
                };
                if p != 0 {
                    let w = (p as f64).ln();
                    outer[(u - 1) as usize] += w;
                    weighted[(u - 1) as usize] += lam_m * w;
                }
            }
        }
        Ok((weighted, outer))
    });
    let mut weighted = vec![0.0; y as usize];
    let mut outer = vec![0.0; y as usize];
    for partial in partials {
        let (w, o) = partial?;
        for (acc, v) in weighted.iter_mut().zip(w) {
            *acc += v;
        }
        for (acc, v) in outer.iter_mut().zip(o) {
            *acc += v;
        }
    }
    Ok(SweepCounts { ell, x, weighted, outer })
}

/// Error records for all shifts `1 <= u <= y`, using one singular-series
/// cutoff for every shift.
pub fn sweep_error_records(
    ell: u32,
    x: u64,
    y: u64,
    sigma_cutoff: f64,
    outer: bool,
) -> Result<Vec<ErrorRecord>> {
    let counts = sweep_counts(ell, x, y)?;
    let tables = SeriesTables::for_products(sigma_cutoff.max(1.0).floor() as u64);
    let us: Vec<i64> = (1..=y as i64).collect();
    let sigmas = par::ordered_map(&us, |&u| -> Result<f64> {
        let spec = PolynomialSpec::new(ell, u)?;
        let v = if outer {
            tables.sigma_prime_full(&spec, sigma_cutoff)?
        } else {
            tables.sigma_full(&spec, sigma_cutoff)?
        };
        Ok(v.value)
    });
    us.iter()
        .zip(sigmas)
        .map(|(&u, sigma)| {
            let spec = PolynomialSpec::new(ell, u)?;
            let count = if outer {
                counts.outer[(u - 1) as usize]
            } else {
                counts.weighted[(u - 1) as usize]
            };
            Ok(ErrorRecord::new(spec, x, count, sigma?))
        })
        .collect()
}
