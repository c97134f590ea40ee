//! Log-gamma arithmetic and binomial counts.

use crate::{Error, Result};

pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// `ln [a]_m` where `[a]_m = a (a + 1) ... (a + m - 1)` is the rising
/// factorial. Short products are summed term by term; long ones go through
/// log-gamma differences.
pub fn ln_rising(a: f64, m: u64) -> f64 {
    if m <= 32 {
        (0..m).map(|j| (a + j as f64).ln()).sum()
    } else {
        ln_gamma(a + m as f64) - ln_gamma(a)
    }
}

pub fn ln_factorial(m: u64) -> f64 {
    ln_rising(1.0, m)
}

/// `t[m] = ln([a]_m / m!)` for `m = 0..=m_max`, accumulated from
/// `ln(1 + (a - 1) / (j + 1))` with compensated summation. Neighbouring
/// entries differ by exactly one rounded term, which keeps ratios of
/// stationary weights accurate for large counts.
pub fn ln_rising_over_factorial_table(a: f64, m_max: u64) -> Vec<f64> {
    let mut t = Vec::with_capacity(m_max as usize + 1);
    let (mut sum, mut comp) = (0.0_f64, 0.0_f64);
    t.push(0.0);
    for j in 0..m_max {
        let term = ((a - 1.0) / (j + 1) as f64).ln_1p();
        let next = sum + term;
        comp += if sum.abs() >= term.abs() { (sum - next) + term } else { (term - next) + sum };
        sum = next;
        t.push(sum + comp);
    }
    t
}

/// `binom(n, k)` with overflow reported as a capacity error.
pub fn binomial(n: u64, k: u64) -> Result<u64> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return Err(Error::Capacity(format!("binom({n}, {k}) overflows u64")));
        }
    }
    Ok(acc as u64)
}

/// Number of monomials of total degree exactly `d` in `n` variables,
/// `binom(d + n - 1, d)`.
pub fn homogeneous_dim(n: usize, d: usize) -> Result<u64> {
    if n == 0 {
        return Ok(u64::from(d == 0));
    }
    binomial((d + n - 1) as u64, d as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rising_factorial_both_routes_agree() {
        for &a in &[0.3, 1.0, 2.7, 11.5] {
            let direct: f64 = (0..40).map(|j| (a + j as f64).ln()).sum();
            assert_relative_eq!(ln_rising(a, 40), direct, max_relative = 1e-12);
        }
        assert_eq!(ln_rising(0.5, 0), 0.0);
    }

    #[test]
    fn weight_table_matches_log_gamma() {
        for &a in &[0.2, 1.0, 2.5] {
            let t = ln_rising_over_factorial_table(a, 300);
            assert_eq!(t.len(), 301);
            for m in [0u64, 1, 7, 33, 300] {
                let lg = ln_rising(a, m) - ln_factorial(m);
                assert!((t[m as usize] - lg).abs() < 1e-11 * (1.0 + lg.abs()), "a={a} m={m}");
            }
        }
        assert!(ln_rising_over_factorial_table(1.0, 50).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2).unwrap(), 10);
        assert_eq!(binomial(9, 3).unwrap(), 84);
        assert_eq!(binomial(3, 5).unwrap(), 0);
        assert_eq!(homogeneous_dim(2, 2).unwrap(), 3);
        assert_eq!(homogeneous_dim(3, 4).unwrap(), 15);
        assert_eq!(homogeneous_dim(1, 17).unwrap(), 1);
        assert!(binomial(200, 100).is_err());
    }
}
