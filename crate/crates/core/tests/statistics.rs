//! Monte Carlo and quadrature checks against closed forms.

use dirichlet_lab_core::diffusion::{decay_rate_fit, DecayConfig, SimConfig, X0Law};
use dirichlet_lab_core::infinite::{coupled_truncations, GemParams};
use dirichlet_lab_core::rng::stream_rng;
use dirichlet_lab_core::simplex::{aggregate, log_density, monomial_expectation, polya_urn, sample_ensemble, Partition};
use dirichlet_lab_core::spectrum::degree_one_basis;
use dirichlet_lab_core::{AlphaParams, MultiIndex, SimplexPoint};

fn alpha(v: &[f64]) -> AlphaParams {
    AlphaParams::from_full(v).unwrap()
}

/// All exponent vectors of degree 1 and 2.
fn low_exponents(n: usize) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    for i in 0..n {
        out.push(MultiIndex::unit(n, i));
        for j in i..n {
            out.push(MultiIndex::unit(n, i).sum(&MultiIndex::unit(n, j)));
        }
    }
    out
}

fn monomial(x: &[f64], k: &MultiIndex) -> f64 {
    x.iter().zip(k.entries()).map(|(v, &e)| v.powi(e as i32)).product()
}

/// Largest `|empirical - exact| / se` over degree <= 2 monomials.
fn worst_z(points: &[SimplexPoint], alpha: &AlphaParams) -> f64 {
    let n = points.len() as f64;
    low_exponents(alpha.dim())
        .iter()
        .map(|k| {
            let v: Vec<f64> = points.iter().map(|p| monomial(p.coords(), k)).collect();
            let mean = v.iter().sum::<f64>() / n;
            let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (mean - monomial_expectation(alpha, k).unwrap()).abs() / (var / n).sqrt()
        })
        .fold(0.0, f64::max)
}

#[test]
fn sampler_moments_match_closed_forms() {
    for (seed, v) in [(1u64, vec![0.4, 1.7, 2.2]), (2, vec![3.0, 0.3, 1.1, 0.8])] {
        let a = alpha(&v);
        let z = worst_z(&sample_ensemble(&a, 1_000_000, seed), &a);
        assert!(z < 4.0, "alpha {v:?}: worst z {z}");
    }
}

#[test]
fn aggregation_commutes_with_sampling() {
    let a = alpha(&[0.6, 1.2, 0.9, 2.0, 0.5]);
    let blocks = vec![vec![0, 2], vec![1], vec![3, 4]];
    let agg = aggregate(&a, blocks.clone()).unwrap();
    let partition = Partition::new(blocks, 5).unwrap();
    let summed: Vec<SimplexPoint> = sample_ensemble(&a, 1_000_000, 3)
        .iter()
        .map(|x| partition.aggregate_point(x))
        .collect();
    let direct = sample_ensemble(&agg, 1_000_000, 4);
    assert!(worst_z(&summed, &agg) < 4.0);
    assert!(worst_z(&direct, &agg) < 4.0);
}

/// Centroid rule on the triangulated grid of step `h`, second-order accurate
/// for smooth densities.
fn triangle_quadrature(f: impl Fn(f64, f64) -> f64, h: f64) -> f64 {
    let k = (1.0 / h).round() as usize;
    let area = h * h / 2.0;
    let mut total = 0.0;
    for i in 0..k {
        for j in 0..k - i {
            let (x, y) = (i as f64 * h, j as f64 * h);
            total += f(x + h / 3.0, y + h / 3.0) * area;
            if i + j + 1 < k {
                total += f(x + 2.0 * h / 3.0, y + 2.0 * h / 3.0) * area;
            }
        }
    }
    total
}

#[test]
fn density_integrates_to_one() {
    for v in [[1.0, 1.0, 1.0], [1.5, 2.0, 1.2], [3.0, 1.0, 4.5]] {
        let a = alpha(&v);
        let integral = triangle_quadrature(
            |x, y| log_density(&a, &SimplexPoint::new(vec![x, y]).unwrap()).unwrap().exp(),
            1.0 / 400.0,
        );
        assert!((integral - 1.0).abs() < 1e-3, "alpha {v:?}: {integral}");
    }
}

#[test]
fn polya_urn_proportions_follow_the_beta_binomial_law() {
    let a = alpha(&[0.8, 1.5, 1.2]);
    let steps = 200u64;
    let draws = 20_000;
    let total = a.total();
    for i in 0..a.dim() {
        let z: Vec<f64> = (0..draws)
            .map(|r| polya_urn(&a, steps, &mut stream_rng(17, r as u64)).coords()[i])
            .collect();
        let p = a.get(i) / total;
        let n = steps as f64;
        let exact_var = n * p * (1.0 - p) / ((total + 1.0) * (total + n));
        let k = draws as f64;
        let mean = z.iter().sum::<f64>() / k;
        let var = z.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
        let m4 = z.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / k;
        assert!((mean - p).abs() < 4.0 * (var / k).sqrt(), "coordinate {i}: mean {mean} vs {p}");
        let se_var = ((m4 - var * var) / k).sqrt();
        assert!((var - exact_var).abs() < 4.0 * se_var, "coordinate {i}: var {var} vs {exact_var}");
    }
}

#[test]
fn faster_eigenfunction_decays_faster() {
    let a = alpha(&[1.1, 0.6, 0.9]);
    let basis = degree_one_basis(&a).unwrap();
    let cfg = SimConfig::new(1e-3, 0.6, 1, 5).unwrap().with_stride(10).unwrap();
    let dc = DecayConfig { outer: 600, bootstrap: 400, ..DecayConfig::default() };
    let slow = decay_rate_fit(&a, &basis[0], &cfg, &X0Law::Stationary, &dc).unwrap();
    let fast = decay_rate_fit(&a, &basis[1], &cfg, &X0Law::Stationary, &dc).unwrap();
    assert!(fast.ci.0 > slow.ci.1, "u_N {:?} vs u_1 {:?}", fast.ci, slow.ci);
}

#[test]
fn coupling_sweep_respects_the_bound() {
    let gem = GemParams::geometric(0.8, 0.4, 1.5).unwrap();
    let x = [0.3, 0.2, 0.1, 0.1, 0.05, 0.05];
    for (m, n) in [(1, 3), (2, 5), (3, 6)] {
        for horizon in [0.3, 0.8] {
            let cfg = SimConfig::new(1e-3, horizon, 400, 29).unwrap();
            let rep = coupled_truncations(&gem, &x, m, n, &cfg).unwrap();
            assert!(rep.estimate <= rep.bound + 3.0 * rep.se, "{rep:?}");
        }
    }
}
