//! The generator on polynomials, exact Dirichlet integrals, energies and
//! Poincare ratios.

use crate::polynomial::{MultiIndex, Polynomial};
use crate::simplex::{ln_monomial_expectation, AlphaParams};
use crate::{Error, Result};

fn check_dim(alpha: &AlphaParams, f: &Polynomial) -> Result<()> {
    if f.nvars() != alpha.dim() {
        return Err(Error::input(format!(
            "polynomial in {} variables, alpha has N = {}",
            f.nvars(),
            alpha.dim()
        )));
    }
    Ok(())
}

/// `L f = sum_n x_n (1 - |x|) f_nn + (alpha_n (1 - |x|) - alpha_{N+1} x_n) f_n`.
///
/// Term by term, `L x^k = sum_n k_n (k_n - 1 + alpha_n) (x^{k-e_n} - sum_m
/// x^{k-e_n+e_m}) - alpha_{N+1} |k| x^k`.
pub fn apply_generator(alpha: &AlphaParams, f: &Polynomial) -> Result<Polynomial> {
    check_dim(alpha, f)?;
    let n = alpha.dim();
    let mut out = Polynomial::zero(n);
    for (k, c) in f.terms() {
        let d = k.degree();
        if d == 0 {
            continue;
        }
        out.add_term(k.clone(), -alpha.alpha_last() * d as f64 * c);
        for i in 0..n {
            let ki = k.get(i);
            if ki == 0 {
                continue;
            }
            let w = c * ki as f64 * (ki as f64 - 1.0 + alpha.get(i));
            let mut lowered = k.entries().to_vec();
            lowered[i] -= 1;
            for m in 0..n {
                let mut raised = lowered.clone();
                raised[m] += 1;
                out.add_term(MultiIndex::new(raised), -w);
            }
            out.add_term(MultiIndex::new(lowered), w);
        }
    }
    Ok(out)
}

/// `E[x^k]` for the exponent entries `k`.
fn moment(alpha: &AlphaParams, k: &[u32]) -> f64 {
    ln_monomial_expectation(alpha, k).exp()
}

/// `∫ f dμ`.
pub fn integrate(alpha: &AlphaParams, f: &Polynomial) -> Result<f64> {
    check_dim(alpha, f)?;
    Ok(f.terms().map(|(k, c)| c * moment(alpha, k.entries())).sum())
}

/// `Var_μ(f)`, computed as `∫ (f - μ(f))^2 dμ`.
pub fn variance(alpha: &AlphaParams, f: &Polynomial) -> Result<f64> {
    let centered = f - &Polynomial::constant(f.nvars(), integrate(alpha, f)?);
    integrate(alpha, &(&centered * &centered))
}

/// `E(f, g) = ∫ (1 - |x|) sum_n x_n f_n g_n dμ`.
///
/// Uses `E[x^k (1 - |x|)] = E[x^k] alpha_{N+1} / (|alpha| + |k|)`, which
/// avoids the cancellation of expanding the remainder factor.
pub fn dirichlet_energy(alpha: &AlphaParams, f: &Polynomial, g: &Polynomial) -> Result<f64> {
    check_dim(alpha, f)?;
    check_dim(alpha, g)?;
    let total = alpha.total();
    let mut sum = 0.0;
    for i in 0..alpha.dim() {
        let fi = f.derivative(i);
        if fi.is_zero() {
            continue;
        }
        let gi = g.derivative(i);
        for (k, c) in (&fi * &gi).mul_var(i).terms() {
            let m = moment(alpha, k.entries()) * alpha.alpha_last() / (total + k.degree() as f64);
            sum += c * m;
        }
    }
    Ok(sum)
}

/// `E(f, f) / Var_μ(f)`.
pub fn poincare_ratio(alpha: &AlphaParams, f: &Polynomial) -> Result<f64> {
    check_dim(alpha, f)?;
    if f.is_constant() {
        return Err(Error::Degenerate("Poincare ratio of a constant function".into()));
    }
    let var = variance(alpha, f)?;
    if !(var > 0.0) {
        return Err(Error::Degenerate(format!("variance {var:e} is not positive")));
    }
    Ok(dirichlet_energy(alpha, f, f)? / var)
}

/// Coefficient vectors `theta_1..theta_{N-1}` with `sum_k theta_ik alpha_k =
/// 0` and `sum_k theta_ik theta_jk alpha_k = delta_ij`.
///
/// Built by Gram-Schmidt in the `alpha`-weighted inner product, starting
/// from `e_j - (alpha_j / tilde_alpha) 1` for `j = 1..N` in order and
/// skipping candidates that become dependent.
#[allow(clippy::needless_range_loop)]
pub fn degree_one_theta(alpha: &AlphaParams) -> Result<Vec<Vec<f64>>> {
    let n = alpha.dim();
    let a = alpha.alphas();
    let ta = alpha.tilde_alpha();
    let dot = |u: &[f64], v: &[f64]| -> f64 { u.iter().zip(v).zip(a).map(|((x, y), w)| x * y * w).sum() };
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n.saturating_sub(1));
    for j in 0..n {
        if basis.len() + 1 == n {
            break;
        }
        let mut v: Vec<f64> = (0..n).map(|k| f64::from(k == j) - a[j] / ta).collect();
        let scale = dot(&v, &v).sqrt();
        // two passes for orthogonality to working precision
        for _ in 0..2 {
            for b in &basis {
                let p = dot(&v, b);
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm <= 1e-10 * scale {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        basis.push(v);
    }
    if basis.len() + 1 != n {
        return Err(Error::Degenerate(format!(
            "Gram-Schmidt produced {} of {} directions",
            basis.len(),
            n - 1
        )));
    }
    Ok(basis)
}

/// `u_1..u_N`: `u_i(x) = sum_j theta_ij x_j` for `i < N` (eigenvalue
/// `alpha_{N+1}`) and `u_N(x) = |x| - tilde_alpha / |alpha|` (eigenvalue
/// `|alpha|`). For `N = 1` only `u_N` is returned.
pub fn degree_one_basis(alpha: &AlphaParams) -> Result<Vec<Polynomial>> {
    let n = alpha.dim();
    let mut out: Vec<Polynomial> = degree_one_theta(alpha)?
        .iter()
        .map(|theta| Polynomial::linear(theta, 0.0))
        .collect();
    out.push(Polynomial::linear(&vec![1.0; n], -alpha.tilde_alpha() / alpha.total()));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::matrix::build_md;
    use approx::assert_relative_eq;

    fn alpha(v: &[f64]) -> AlphaParams {
        AlphaParams::from_full(v).unwrap()
    }

    fn max_abs_diff(a: &Polynomial, b: &Polynomial) -> f64 {
        (a - b).max_abs_coefficient()
    }

    #[test]
    fn generator_on_constants_and_coordinates() {
        let a = alpha(&[0.7, 1.3, 2.1]);
        assert!(apply_generator(&a, &Polynomial::constant(2, 3.0)).unwrap().is_zero());
        let lx = apply_generator(&a, &Polynomial::variable(2, 0)).unwrap();
        let expect = Polynomial::linear(&[-0.7 - 2.1, -0.7], 0.7);
        assert!(max_abs_diff(&lx, &expect) < 1e-15);
    }

    #[test]
    fn generator_matches_direct_differentiation() {
        let a = alpha(&[0.4, 1.2, 0.9, 1.5]);
        let n = 3;
        let f = Polynomial::from_terms(
            n,
            [
                (MultiIndex::new(vec![2, 1, 0]), 1.5),
                (MultiIndex::new(vec![0, 0, 3]), -0.5),
                (MultiIndex::new(vec![1, 0, 1]), 2.0),
            ],
        )
        .unwrap();
        let r = Polynomial::remainder(n);
        let mut direct = Polynomial::zero(n);
        for i in 0..n {
            let fi = f.derivative(i);
            let fii = fi.derivative(i);
            let diff = &(&r * &fii).mul_var(i);
            let drift = &(&r.scale(a.get(i)) - &Polynomial::variable(n, i).scale(a.alpha_last())) * &fi;
            direct = &(&direct + diff) + &drift;
        }
        assert!(max_abs_diff(&apply_generator(&a, &f).unwrap(), &direct) < 1e-13);
    }

    #[test]
    fn top_degree_part_is_a_column_of_md() {
        let a = alpha(&[0.7, 1.3, 0.5, 2.1]);
        let d = 3;
        let m = build_md(&a, d).unwrap();
        for (j, k) in m.indices().iter().enumerate() {
            let lf = apply_generator(&a, &Polynomial::monomial(k.clone(), 1.0)).unwrap();
            let top = lf.homogeneous_part(d).scale(-1.0);
            for (i, ki) in m.indices().iter().enumerate() {
                assert!((top.coefficient(ki) - m.get(i, j)).abs() < 1e-13, "{ki} in -L x^{k}");
            }
            assert!(lf.degree() <= d);
        }
    }

    #[test]
    fn moments_and_variance() {
        let a = alpha(&[1.0, 1.0]);
        let x = Polynomial::variable(1, 0);
        assert_relative_eq!(integrate(&a, &x).unwrap(), 0.5, epsilon = 1e-15);
        assert_relative_eq!(variance(&a, &x).unwrap(), 1.0 / 12.0, epsilon = 1e-15);
    }

    #[test]
    fn energy_of_the_antisymmetric_witness() {
        let a = alpha(&[0.7, 1.3, 2.1]);
        let (a1, a2, a3, t) = (0.7, 1.3, 2.1, a.total());
        let u = Polynomial::linear(&[a2, -a1], 0.0);
        let e = dirichlet_energy(&a, &u, &u).unwrap();
        assert_relative_eq!(e, a3 * a1 * a2 * (a1 + a2) / (t * (t + 1.0)), max_relative = 1e-13);
        assert_eq!(dirichlet_energy(&a, &Polynomial::constant(2, 1.0), &u).unwrap(), 0.0);
    }

    #[test]
    fn degree_one_basis_properties() {
        let a = alpha(&[0.4, 1.1, 0.8, 2.3, 0.9]);
        let theta = degree_one_theta(&a).unwrap();
        assert_eq!(theta.len(), 3);
        for (i, ti) in theta.iter().enumerate() {
            let s: f64 = ti.iter().zip(a.alphas()).map(|(t, w)| t * w).sum();
            assert!(s.abs() < 1e-14);
            for (j, tj) in theta.iter().enumerate() {
                let g: f64 = ti.iter().zip(tj).zip(a.alphas()).map(|((x, y), w)| x * y * w).sum();
                assert!((g - f64::from(i == j)).abs() < 1e-14);
            }
        }
        let u = degree_one_basis(&a).unwrap();
        assert_eq!(u.len(), 4);
        for (i, ui) in u.iter().enumerate() {
            assert!(integrate(&a, ui).unwrap().abs() < 1e-15);
            let lam = if i + 1 < u.len() { a.alpha_last() } else { a.total() };
            let lu = apply_generator(&a, ui).unwrap();
            assert!(max_abs_diff(&lu, &ui.scale(-lam)) < 1e-14);
            assert_relative_eq!(poincare_ratio(&a, ui).unwrap(), lam, max_relative = 1e-12);
            for uj in &u[..i] {
                assert!(integrate(&a, &(ui * uj)).unwrap().abs() < 1e-12);
            }
        }
    }

    #[test]
    fn poincare_inequality_on_a_square() {
        let a = alpha(&[1.0, 1.0, 1.0]);
        let f = Polynomial::monomial(MultiIndex::new(vec![2, 0]), 1.0);
        assert!(poincare_ratio(&a, &f).unwrap() >= 1.0);
        assert!(matches!(
            poincare_ratio(&a, &Polynomial::constant(2, 4.0)),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let a = alpha(&[1.0, 1.0, 1.0]);
        assert!(apply_generator(&a, &Polynomial::variable(3, 0)).is_err());
    }
}
