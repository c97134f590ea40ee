//! Finite truncations of the infinite-dimensional model with summable
//! weights `alpha_1, alpha_2, ...` and extra mass `alpha_inf`.
//!
//! The truncation of size `n` keeps `alpha_1..alpha_{n-1}`, lumps the tail
//! `sum_{i >= n} alpha_i` into coordinate `n`, and uses `alpha_inf` as the
//! remainder weight.

use rayon::prelude::*;
use serde::Serialize;

use crate::diffusion::SimConfig;
use crate::polynomial::Polynomial;
use crate::simplex::{AlphaParams, Partition, SimplexPoint};
use crate::spectrum::{apply_generator, poincare_ratio, spectral_gap, DEFAULT_D_MAX};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum GemFamily {
    /// `alpha_1..alpha_K`, zero beyond.
    Explicit { alphas: Vec<f64> },
    /// `alpha_i = c r^i` for `i >= 1`.
    Geometric { c: f64, r: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GemParams {
    family: GemFamily,
    alpha_inf: f64,
}

fn positive(v: f64, name: &str) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::input(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

impl GemParams {
    pub fn explicit(alphas: Vec<f64>, alpha_inf: f64) -> Result<Self> {
        if alphas.is_empty() {
            return Err(Error::input("explicit family needs at least one weight"));
        }
        for (i, &a) in alphas.iter().enumerate() {
            positive(a, &format!("alpha[{}]", i + 1))?;
        }
        positive(alpha_inf, "alpha_inf")?;
        Ok(GemParams {
            family: GemFamily::Explicit { alphas },
            alpha_inf,
        })
    }

    pub fn geometric(c: f64, r: f64, alpha_inf: f64) -> Result<Self> {
        positive(c, "c")?;
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::input(format!("ratio r must lie in (0, 1), got {r}")));
        }
        positive(alpha_inf, "alpha_inf")?;
        Ok(GemParams {
            family: GemFamily::Geometric { c, r },
            alpha_inf,
        })
    }

    pub fn family(&self) -> &GemFamily {
        &self.family
    }

    pub fn alpha_inf(&self) -> f64 {
        self.alpha_inf
    }

    /// `alpha_i`, 1-based.
    pub fn alpha(&self, i: usize) -> f64 {
        assert!(i >= 1, "weights are indexed from 1");
        match &self.family {
            GemFamily::Explicit { alphas } => alphas.get(i - 1).copied().unwrap_or(0.0),
            GemFamily::Geometric { c, r } => c * r.powi(i as i32),
        }
    }

    /// `sum_{i >= n} alpha_i` in closed form.
    pub fn tail_sum(&self, n: usize) -> f64 {
        let n = n.max(1);
        match &self.family {
            GemFamily::Explicit { alphas } => alphas.iter().skip(n - 1).sum(),
            GemFamily::Geometric { c, r } => c * r.powi(n as i32) / (1.0 - r),
        }
    }

    /// `|alpha|_1 + alpha_inf`.
    pub fn total(&self) -> f64 {
        self.tail_sum(1) + self.alpha_inf
    }
}

/// `(alpha_1, ..., alpha_{n-1}, sum_{i >= n} alpha_i ; alpha_inf)`.
pub fn truncate_params(gem: &GemParams, n: usize) -> Result<AlphaParams> {
    if n == 0 {
        return Err(Error::input("truncation size must be at least 1"));
    }
    let tail = gem.tail_sum(n);
    if !(tail > 0.0) {
        return Err(Error::input(format!(
            "truncation at n = {n} has zero tail weight; the explicit list is too short"
        )));
    }
    let mut alphas: Vec<f64> = (1..n).map(|i| gem.alpha(i)).collect();
    alphas.push(tail);
    AlphaParams::new(alphas, gem.alpha_inf)
}

/// Blocks mapping the size-`n` truncation onto the size-`m` one: coordinates
/// `m..n` (1-based) are lumped, everything else is kept.
pub fn truncation_partition(m: usize, n: usize) -> Result<Partition> {
    if m == 0 || m > n {
        return Err(Error::input(format!("need 1 <= m <= n, got m = {m}, n = {n}")));
    }
    let mut blocks: Vec<Vec<usize>> = (0..m - 1).map(|i| vec![i]).collect();
    blocks.push((m - 1..n).collect());
    blocks.push(vec![n]);
    Partition::new(blocks, n + 1)
}

/// Lumps coordinates `m..` (1-based) of a finer point into coordinate `m`.
pub fn coarsen(x: &SimplexPoint, m: usize) -> Result<SimplexPoint> {
    Ok(truncation_partition(m, x.dim())?.aggregate_point(x))
}

/// `2 sum_{i=m+1}^n alpha_i / (alpha_inf + sum_{i > n} alpha_i)`.
pub fn wasserstein_truncation_bound(gem: &GemParams, m: usize, n: usize) -> Result<f64> {
    if m == 0 || m > n {
        return Err(Error::input(format!("need 1 <= m <= n, got m = {m}, n = {n}")));
    }
    let num: f64 = (m + 1..=n).map(|i| gem.alpha(i)).sum();
    Ok(2.0 * num / (gem.alpha_inf + gem.tail_sum(n + 1)))
}

/// `2 sqrt(sum_{j > m} (x_j + alpha_j T))`.
pub fn kolmogorov_bound(gem: &GemParams, x: &[f64], m: usize, horizon: f64) -> f64 {
    let mass: f64 = x.iter().skip(m).sum();
    2.0 * (mass + gem.tail_sum(m + 1) * horizon).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CouplingReport {
    pub m: usize,
    pub n: usize,
    pub horizon: f64,
    /// Monte Carlo mean of `sup_{t <= T} sum_{j=m+1}^n X_j(t)`.
    pub estimate: f64,
    pub se: f64,
    pub bound: f64,
    /// The coupled paths are `2 * sum_{j=m+1}^n X_j` apart in `l1`.
    pub l1_estimate: f64,
    pub within: bool,
}

/// Runs the size-`n` truncation from `x` (lumped at `n`) and measures how far
/// the size-`m` truncation obtained by lumping coordinates `m..n` of the same
/// path drifts from it.
pub fn coupled_truncations(
    gem: &GemParams,
    x: &[f64],
    m: usize,
    n: usize,
    cfg: &SimConfig,
) -> Result<CouplingReport> {
    cfg.validate()?;
    if m == 0 || m >= n {
        return Err(Error::input(format!("need 1 <= m < n, got m = {m}, n = {n}")));
    }
    if x.iter().any(|&v| !(v >= 0.0)) || x.iter().sum::<f64>() > 1.0 + crate::simplex::SIMPLEX_TOL {
        return Err(Error::input("start point must be nonnegative with total mass at most 1"));
    }
    let alpha = truncate_params(gem, n)?;
    let mut start: Vec<f64> = (0..n - 1).map(|i| x.get(i).copied().unwrap_or(0.0)).collect();
    start.push(x.iter().skip(n - 1).sum());
    let x0 = SimplexPoint::new(start)?;
    let sups: Vec<f64> = (0..cfg.paths)
        .into_par_iter()
        .map(|p| -> Result<f64> {
            let tr = crate::diffusion::simulate_path(&x0, &alpha, cfg, p as u64)?;
            Ok(tr
                .states
                .iter()
                .map(|s| s.coords()[m..].iter().sum::<f64>())
                .fold(0.0, f64::max))
        })
        .collect::<Result<_>>()?;
    let k = sups.len() as f64;
    let estimate = sups.iter().sum::<f64>() / k;
    let se = if sups.len() > 1 {
        (sups.iter().map(|s| (s - estimate).powi(2)).sum::<f64>() / (k - 1.0)).sqrt() / k.sqrt()
    } else {
        f64::NAN
    };
    let bound = kolmogorov_bound(gem, x, m, cfg.horizon);
    Ok(CouplingReport {
        m,
        n,
        horizon: cfg.horizon,
        estimate,
        se,
        bound,
        l1_estimate: 2.0 * estimate,
        within: estimate <= bound + 3.0 * se.max(0.0),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessRow {
    pub n: usize,
    /// Spectral gap of the truncated generator.
    pub gap: f64,
    pub gap_certified: bool,
    /// `max |coefficient of L u + alpha_inf u|` for `u = alpha_2 x_1 -
    /// alpha_1 x_2`; only for `n >= 3`, where both are regular coordinates.
    pub generator_residual: Option<f64>,
    pub poincare_ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessReport {
    pub alpha_inf: f64,
    pub rows: Vec<WitnessRow>,
}

/// Checks on truncations of each size in `sizes` that the gap is `alpha_inf`
/// and that `u = alpha_2 x_1 - alpha_1 x_2` is an eigenfunction for it.
pub fn infinite_gap_witness(gem: &GemParams, sizes: &[usize]) -> Result<WitnessReport> {
    let mut rows = Vec::with_capacity(sizes.len());
    for &n in sizes {
        if n < 2 {
            return Err(Error::input(format!("truncation size must be at least 2, got {n}")));
        }
        let alpha = truncate_params(gem, n)?;
        let cert = spectral_gap(&alpha, DEFAULT_D_MAX)?;
        let (residual, ratio) = if n >= 3 {
            let mut coeffs = vec![0.0; n];
            coeffs[0] = gem.alpha(2);
            coeffs[1] = -gem.alpha(1);
            let u = Polynomial::linear(&coeffs, 0.0);
            let lu = apply_generator(&alpha, &u)?;
            let res = (&lu + &u.scale(gem.alpha_inf)).max_abs_coefficient();
            (Some(res), Some(poincare_ratio(&alpha, &u)?))
        } else {
            (None, None)
        };
        rows.push(WitnessRow {
            n,
            gap: cert.gap,
            gap_certified: cert.certified,
            generator_residual: residual,
            poincare_ratio: ratio,
        });
    }
    Ok(WitnessReport {
        alpha_inf: gem.alpha_inf,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simplex::monomial_expectation;
    use crate::MultiIndex;
    use approx::assert_relative_eq;

    fn geo() -> GemParams {
        GemParams::geometric(1.0, 0.5, 0.8).unwrap()
    }

    #[test]
    fn truncation_examples() {
        let a = truncate_params(&geo(), 2).unwrap();
        assert_eq!(a.alphas(), &[0.5, 0.5]);
        assert_eq!(a.alpha_last(), 0.8);
        for n in 1..12 {
            assert_relative_eq!(truncate_params(&geo(), n).unwrap().total(), 1.8, epsilon = 1e-14);
        }
        let e = GemParams::explicit(vec![0.3, 0.2], 1.0).unwrap();
        assert!(truncate_params(&e, 2).is_ok());
        assert!(truncate_params(&e, 3).is_err());
        assert!(GemParams::geometric(1.0, 1.0, 1.0).is_err());
        assert!(GemParams::explicit(vec![0.3, 0.0], 1.0).is_err());
    }

    #[test]
    fn wasserstein_examples() {
        let g = geo();
        assert_eq!(wasserstein_truncation_bound(&g, 5, 5).unwrap(), 0.0);
        let expect = 2.0 * (0.0625 + 0.03125) / (0.8 + 0.03125);
        assert_relative_eq!(wasserstein_truncation_bound(&g, 3, 5).unwrap(), expect, epsilon = 1e-15);
        let sweep: Vec<f64> = (1..10).map(|m| wasserstein_truncation_bound(&g, m, m + 3).unwrap()).collect();
        assert!(sweep.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn lumping_maps_truncations_onto_each_other() {
        let g = geo();
        for (m, n) in [(2, 4), (3, 8), (1, 5)] {
            let fine = truncate_params(&g, n).unwrap();
            let coarse = truncate_params(&g, m).unwrap();
            let lumped = truncation_partition(m, n).unwrap().aggregate_alpha(&fine).unwrap();
            for (a, b) in lumped.full().iter().zip(coarse.full()) {
                assert_relative_eq!(*a, b, epsilon = 1e-15);
            }
            // first and second moments of the lumped coordinate
            let k = m - 1;
            let e1 = monomial_expectation(&coarse, &MultiIndex::unit(m, k)).unwrap();
            let direct: f64 = (k..n)
                .map(|j| monomial_expectation(&fine, &MultiIndex::unit(n, j)).unwrap())
                .sum();
            assert_relative_eq!(e1, direct, max_relative = 1e-12);
            let mut sq = vec![0; m];
            sq[k] = 2;
            let e2 = monomial_expectation(&coarse, &MultiIndex::new(sq)).unwrap();
            let mut direct2 = 0.0;
            for i in k..n {
                for j in k..n {
                    let mut e = vec![0; n];
                    e[i] += 1;
                    e[j] += 1;
                    direct2 += monomial_expectation(&fine, &MultiIndex::new(e)).unwrap();
                }
            }
            assert_relative_eq!(e2, direct2, max_relative = 1e-12);
        }
    }

    #[test]
    fn bound_shrinks_geometrically() {
        let g = geo();
        let b: Vec<f64> = (2..8).map(|m| kolmogorov_bound(&g, &[], m, 1.0)).collect();
        for w in b.windows(2) {
            assert_relative_eq!(w[1] / w[0], 0.5f64.sqrt(), epsilon = 1e-12);
        }
        assert_eq!(kolmogorov_bound(&g, &[], 3, 0.0), 0.0);
    }

    #[test]
    fn coupling_at_zero_horizon_is_zero() {
        let g = geo();
        let cfg = SimConfig::new(1e-3, 0.0, 8, 3).unwrap();
        let r = coupled_truncations(&g, &[0.1, 0.2], 3, 6, &cfg).unwrap();
        assert_eq!(r.estimate, 0.0);
        assert_eq!(r.bound, 0.0);
        assert!(r.within);
    }

    #[test]
    fn witness_on_small_truncations() {
        let g = geo();
        let rep = infinite_gap_witness(&g, &[2, 3, 5]).unwrap();
        for row in &rep.rows {
            assert!((row.gap - 0.8).abs() < 1e-12);
        }
        assert!(rep.rows[0].generator_residual.is_none());
        assert!(rep.rows[1].generator_residual.unwrap() < 1e-15);
        assert_relative_eq!(rep.rows[2].poincare_ratio.unwrap(), 0.8, max_relative = 1e-12);
    }
}
