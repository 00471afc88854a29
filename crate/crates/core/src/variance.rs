//! Mean-square statistics over the shift `u`.
//!
//! `S_ℓ(y, X) = Σ_{u <= y} |Σ_{m^ℓ <= X} Λ(m^ℓ+u)Λ(m) - 𝔖_ℓ(u)·#{m^ℓ <= X}|^2`
//! and its primed analogue with `Σ Λ(m^ℓ+u)` and `𝔖'_ℓ(u)`, plus the
//! truncation experiments that compare sums and products of the singular
//! series in mean square.
//!
//! Nothing here asserts the asymptotic savings; reports carry the raw and
//! normalized numbers and the caller decides what trend to look at.

use serde::{Deserialize, Serialize};

use crate::counts::{sweep_error_records, ErrorRecord};
use crate::local::PolynomialSpec;
use crate::numeric::NeumaierSum;
use crate::series::SeriesTables;
use crate::{par, Error, Result};

/// Largest `x` accepted by [`product_vs_sum_discrepancy`].
pub const DISCREPANCY_MAX_X: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// `Σ Λ(m)Λ(m^ℓ+u)` against `𝔖_ℓ(u)`.
    Sigma,
    /// `Σ Λ(m^ℓ+u)` against `𝔖'_ℓ(u)`.
    SigmaPrime,
}

/// Order statistics of `|error|` across shifts (nearest-rank quantiles).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub q90: f64,
    pub max: f64,
    pub mean: f64,
}

impl Quantiles {
    pub fn from_values(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self { min: 0.0, q25: 0.0, median: 0.0, q75: 0.0, q90: 0.0, max: 0.0, mean: 0.0 };
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let rank = |q: f64| {
            let idx = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len()) - 1;
            sorted[idx]
        };
        let mean = values.iter().copied().collect::<NeumaierSum>().value() / values.len() as f64;
        Self {
            min: sorted[0],
            q25: rank(0.25),
            median: rank(0.5),
            q75: rank(0.75),
            q90: rank(0.9),
            max: sorted[sorted.len() - 1],
            mean,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport {
    pub ell: u32,
    pub y: u64,
    #[serde(rename = "X")]
    pub x: u64,
    #[serde(rename = "S")]
    pub s: f64,
    /// `S / (y · X^{2/ℓ})`.
    pub normalized: f64,
    /// Shifts whose singular-series value is exactly 0.
    pub n_obstructed: u64,
    pub per_u_quantiles: Quantiles,
    pub variant: Variant,
    pub sigma_cutoff: f64,
    /// The same normalization over the unobstructed shifts only.
    pub normalized_unobstructed: f64,
}

/// A report plus the per-shift records it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceRun {
    pub report: VarianceReport,
    pub records: Vec<ErrorRecord>,
}

fn check_variance_args(y: u64, x: u64) -> Result<()> {
    if y < 1 || y > x {
        return Err(Error::invalid(format!("need 1 <= y <= X, got y = {y}, X = {x}")));
    }
    Ok(())
}

/// Build a report from per-shift records, summing in ascending `u`.
pub fn report_from_records(
    ell: u32,
    y: u64,
    x: u64,
    variant: Variant,
    sigma_cutoff: f64,
    records: &[ErrorRecord],
) -> VarianceReport {
    let mut s = NeumaierSum::new();
    let mut s_clean = NeumaierSum::new();
    let mut n_obstructed = 0u64;
    for r in records {
        let sq = r.error * r.error;
        s.add(sq);
        if r.prediction == 0.0 {
            n_obstructed += 1;
        } else {
            s_clean.add(sq);
        }
    }
    let scale = (x as f64).powf(2.0 / ell as f64);
    let s = s.value();
    let clean = y - n_obstructed;
    let abs_errors: Vec<f64> = records.iter().map(|r| r.error.abs()).collect();
    VarianceReport {
        ell,
        y,
        x,
        s,
        normalized: s / (y as f64 * scale),
        n_obstructed,
        per_u_quantiles: Quantiles::from_values(&abs_errors),
        variant,
        sigma_cutoff,
        normalized_unobstructed: if clean == 0 {
            0.0
        } else {
            s_clean.value() / (clean as f64 * scale)
        },
    }
}

fn variance(ell: u32, y: u64, x: u64, sigma_cutoff: f64, variant: Variant) -> Result<VarianceRun> {
    check_variance_args(y, x)?;
    let records = sweep_error_records(ell, x, y, sigma_cutoff, variant == Variant::SigmaPrime)?;
    let report = report_from_records(ell, y, x, variant, sigma_cutoff, &records);
    Ok(VarianceRun { report, records })
}

/// `S_ℓ(y, X)` with `𝔖_ℓ(u)` taken at `sigma_cutoff` for every shift.
pub fn variance_s(ell: u32, y: u64, x: u64, sigma_cutoff: f64) -> Result<VarianceRun> {
    variance(ell, y, x, sigma_cutoff, Variant::Sigma)
}

/// `S'_ℓ(y, X)` with `𝔖'_ℓ(u)` taken at `sigma_cutoff` for every shift.
pub fn variance_s_prime(ell: u32, y: u64, x: u64, sigma_cutoff: f64) -> Result<VarianceRun> {
    variance(ell, y, x, sigma_cutoff, Variant::SigmaPrime)
}

pub fn run_variance(variant: Variant, ell: u32, y: u64, x: u64, sigma_cutoff: f64) -> Result<VarianceRun> {
    variance(ell, y, x, sigma_cutoff, variant)
}

/// `(1/y) Σ_{y < n <= 2y} |𝔖'_ℓ(nv, z) - 𝔖'_ℓ(nv)|^2`, the full series taken
/// as the Euler product at `ref_cutoff`.
pub fn meansquare_truncation(ell: u32, v: i64, y: u64, z: f64, ref_cutoff: f64) -> Result<f64> {
    let tables = SeriesTables::new(ref_cutoff.max(1.0).floor() as u64, z.max(1.0).floor() as u64);
    meansquare_truncation_with(&tables, ell, v, y, z, ref_cutoff)
}

/// [`meansquare_truncation`] with caller-provided tables.
pub fn meansquare_truncation_with(
    tables: &SeriesTables,
    ell: u32,
    v: i64,
    y: u64,
    z: f64,
    ref_cutoff: f64,
) -> Result<f64> {
    Ok(meansquare_truncation_profile(tables, ell, v, y, &[z], ref_cutoff)?[0])
}

/// [`meansquare_truncation`] at several truncation points, evaluating the
/// reference product once per shift.
pub fn meansquare_truncation_profile(
    tables: &SeriesTables,
    ell: u32,
    v: i64,
    y: u64,
    zs: &[f64],
    ref_cutoff: f64,
) -> Result<Vec<f64>> {
    if v == 0 {
        return Err(Error::invalid("v must be nonzero"));
    }
    if y == 0 {
        return Err(Error::invalid("y must be positive"));
    }
    if let Some(z) = zs.iter().find(|&&z| !(z >= 1.0 && z <= y as f64)) {
        return Err(Error::invalid(format!("need 1 <= z <= y, got z = {z}, y = {y}")));
    }
    let ns: Vec<i64> = (y as i64 + 1..=2 * y as i64).collect();
    let diffs = par::ordered_map(&ns, |&n| -> Result<Vec<f64>> {
        let spec = PolynomialSpec::new(ell, n * v)?;
        let reference = tables.sigma_prime_full(&spec, ref_cutoff)?.value;
        zs.iter()
            .map(|&z| {
                let d = tables.s_prime_trunc(&spec, z)?.value - reference;
                Ok(d * d)
            })
            .collect()
    });
    let mut sums = vec![NeumaierSum::new(); zs.len()];
    for d in diffs {
        for (sum, v) in sums.iter_mut().zip(d?) {
            sum.add(v);
        }
    }
    Ok(sums.iter().map(|s| s.value() / y as f64).collect())
}

/// `(Σ_{u<=y} |𝔓_ℓ(u,x) - 𝔖_ℓ(u,x)|^2, Σ_{u<=y} |𝔓'_ℓ(u,x) - 𝔖'_ℓ(u,x)|^2)`.
pub fn product_vs_sum_discrepancy(ell: u32, y: u64, x: f64) -> Result<(f64, f64)> {
    if !(x >= 2.0 && x <= DISCREPANCY_MAX_X) {
        return Err(Error::range(
            "discrepancy-x",
            format!("x must lie in [2, {DISCREPANCY_MAX_X}], got {x}"),
        ));
    }
    if y == 0 {
        return Ok((0.0, 0.0));
    }
    let xf = x.floor() as u64;
    let tables = SeriesTables::new(xf, xf);
    let us: Vec<i64> = (1..=y as i64).collect();
    let terms = par::ordered_map(&us, |&u| -> Result<(f64, f64)> {
        let spec = PolynomialSpec::new(ell, u)?;
        let d = tables.p_trunc(&spec, x)?.value - tables.s_trunc(&spec, x)?.value;
        let dp = tables.p_prime_trunc(&spec, x)?.value - tables.s_prime_trunc(&spec, x)?.value;
        Ok((d * d, dp * dp))
    });
    let mut full = NeumaierSum::new();
    let mut primed = NeumaierSum::new();
    for t in terms {
        let (a, b) = t?;
        full.add(a);
        primed.add(b);
    }
    Ok((full.value(), primed.value()))
}
