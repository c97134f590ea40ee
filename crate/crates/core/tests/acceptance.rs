//! Acceptance suite. Each test prints one `criterion NN: PASS|FAIL` line with
//! the measured numbers and then asserts the outcome.

use std::time::{Duration, Instant};

use rand::Rng;

use dirichlet_lab_core::chain::{
    chain_spectral_gap, detailed_balance_check, detailed_balance_violation, enumerate_states,
    generator_matrix, gillespie, stationary_measure, total_variation, ChainSpec, DiscreteState,
    StopRule,
};
use dirichlet_lab_core::diffusion::{
    decay_rate_fit, ensemble_stats, DecayConfig, SimConfig, X0Law,
};
use dirichlet_lab_core::infinite::{
    coupled_truncations, infinite_gap_witness, truncate_params, GemParams,
};
use dirichlet_lab_core::rng::{stream_rng, StreamRng};
use dirichlet_lab_core::simplex::{monomial_expectation, sample_ensemble};
use dirichlet_lab_core::spectrum::{
    apply_generator, build_md, degree_one_basis, eigen_multiset, poincare_ratio, spectral_gap,
    spectrum_parametrized_degree, spectrum_recursion, ClusterTol,
};
use dirichlet_lab_core::{AlphaParams, MultiIndex, Polynomial, SimplexPoint};

const GAP_TOL: f64 = 1e-8;
const BASE_CASE_TOL: f64 = 1e-12;
const MULTISET_TOL: f64 = 1e-8;
const POINCARE_EXACT_TOL: f64 = 1e-12;
const POINCARE_MC_REL: f64 = 0.02;
const CHAIN_GAP_TOL: f64 = 1e-8;
const BALANCE_TOL: f64 = 1e-12;
const PERTURBATION_FLOOR: f64 = 1e-3;
const TV_TOL: f64 = 0.02;
const MOMENT_SES: f64 = 4.0;
const DECAY_REL: f64 = 0.15;
const WITNESS_GAP_TOL: f64 = 1e-8;
const COUPLING_SES: f64 = 3.0;

fn report(id: u32, name: &str, pass: bool, elapsed: Duration, limit: Duration, detail: &str) {
    let in_time = elapsed <= limit;
    let verdict = if pass && in_time { "PASS" } else { "FAIL" };
    println!(
        "criterion {id:02}: {verdict} {name} [{:.2}s of {:.0}s] {detail}",
        elapsed.as_secs_f64(),
        limit.as_secs_f64()
    );
    assert!(pass, "criterion {id} failed: {detail}");
    assert!(in_time, "criterion {id} exceeded its time budget");
}

fn random_alpha(rng: &mut StreamRng, n: usize) -> AlphaParams {
    let full: Vec<f64> = (0..=n).map(|_| rng.random_range(0.2..3.0)).collect();
    AlphaParams::from_full(&full).unwrap()
}

#[test]
fn criterion_01_continuous_gap() {
    let start = Instant::now();
    let mut worst = 0.0_f64;
    let mut all_certified = true;
    for n in [2usize, 3] {
        let mut rng = stream_rng(101, n as u64);
        for _ in 0..20 {
            let a = random_alpha(&mut rng, n);
            let g = spectral_gap(&a, 5).unwrap();
            worst = worst.max((g.gap - a.alpha_last()).abs());
            all_certified &= g.certified;
        }
    }
    report(
        1,
        "gap equals alpha_{N+1} for N in {2,3}",
        worst <= GAP_TOL && all_certified,
        start.elapsed(),
        Duration::from_secs(5),
        &format!("max |gap - alpha_last| = {worst:.2e}, certified = {all_certified}"),
    );
}

#[test]
fn criterion_02_one_dimensional_gap() {
    let start = Instant::now();
    let mut rng = stream_rng(102, 0);
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let a = random_alpha(&mut rng, 1);
        let spec = spectrum_recursion(&a, 6, ClusterTol::default()).unwrap();
        let min = spec.shifted[1..]
            .iter()
            .filter_map(|m| m.min_positive())
            .fold(f64::INFINITY, f64::min);
        worst = worst.max((min - a.total()).abs());
    }
    report(
        2,
        "N = 1 minimum positive eigenvalue is alpha_1 + alpha_2",
        worst <= BASE_CASE_TOL,
        start.elapsed(),
        Duration::from_secs(1),
        &format!("max deviation = {worst:.2e}"),
    );
}

#[test]
fn criterion_03_three_way_spectrum() {
    let start = Instant::now();
    let tol = ClusterTol::default();
    let mut failures = Vec::new();
    let mut checked = 0;
    for n in 1..=3usize {
        let mut rng = stream_rng(103, n as u64);
        for _ in 0..5 {
            let a = random_alpha(&mut rng, n);
            let rec = spectrum_recursion(&a, 4, tol).unwrap();
            for d in 0..=4u32 {
                let eig = eigen_multiset(&build_md(&a, d).unwrap(), tol).unwrap();
                let par = spectrum_parametrized_degree(&a, d, tol).unwrap();
                let r = &rec.shifted[d as usize];
                for (label, other) in [("eigen", &eig), ("keys", &par)] {
                    if let Some(why) = r.mismatch(other, MULTISET_TOL) {
                        failures.push(format!("N={n} d={d} {label}: {why}"));
                    }
                }
                checked += 1;
            }
        }
    }
    report(
        3,
        "matrix, recursion and key spectra coincide",
        failures.is_empty(),
        start.elapsed(),
        Duration::from_secs(30),
        &format!("{checked} (alpha, d) cases, mismatches: {failures:?}"),
    );
}

/// Monte Carlo `E(f,f) / Var(f)` for a linear `f` with gradient `grad`.
fn mc_linear_ratio(a: &AlphaParams, grad: &[f64], c0: f64, samples: usize, seed: u64) -> f64 {
    let xs = sample_ensemble(a, samples, seed);
    let (mut s1, mut s2, mut e) = (0.0, 0.0, 0.0);
    for x in &xs {
        let f: f64 = c0 + grad.iter().zip(x.coords()).map(|(g, v)| g * v).sum::<f64>();
        s1 += f;
        s2 += f * f;
        e += x.remainder() * grad.iter().zip(x.coords()).map(|(g, v)| v * g * g).sum::<f64>();
    }
    let k = samples as f64;
    let var = s2 / k - (s1 / k).powi(2);
    (e / k) / var
}

#[test]
fn criterion_04_poincare_sharpness() {
    let start = Instant::now();
    let mut rng = stream_rng(104, 0);
    let mut exact_worst = 0.0_f64;
    let mut mc_worst = 0.0_f64;
    for (case, n) in [2usize, 3].into_iter().enumerate() {
        let a = random_alpha(&mut rng, n);
        let basis = degree_one_basis(&a).unwrap();
        for (i, u) in basis.iter().enumerate() {
            let target = if i + 1 < basis.len() { a.alpha_last() } else { a.total() };
            let exact = poincare_ratio(&a, u).unwrap();
            exact_worst = exact_worst.max((exact - target).abs() / target);
            let grad: Vec<f64> = (0..n).map(|j| u.coefficient(&MultiIndex::unit(n, j))).collect();
            let c0 = u.coefficient(&MultiIndex::zeros(n));
            let mc = mc_linear_ratio(&a, &grad, c0, 1_000_000, 1040 + case as u64);
            mc_worst = mc_worst.max((mc - target).abs() / target);
        }
    }
    report(
        4,
        "Poincare ratio of u_i is alpha_{N+1}, of u_N is |alpha|",
        exact_worst <= POINCARE_EXACT_TOL && mc_worst <= POINCARE_MC_REL,
        start.elapsed(),
        Duration::from_secs(60),
        &format!("exact rel. error {exact_worst:.2e}, Monte Carlo rel. error {mc_worst:.4}"),
    );
}

#[test]
fn criterion_05_chain_gap() {
    let start = Instant::now();
    let mut rng = stream_rng(105, 0);
    let mut worst = 0.0_f64;
    let mut spread = 0.0_f64;
    for _ in 0..5 {
        let a = random_alpha(&mut rng, 2);
        let gaps: Vec<f64> = (3..=8u32)
            .map(|m| chain_spectral_gap(&ChainSpec::new(m, a.clone()).unwrap()).unwrap().gap)
            .collect();
        for g in &gaps {
            worst = worst.max((g - a.alpha_last()).abs());
        }
        let hi = gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = gaps.iter().copied().fold(f64::INFINITY, f64::min);
        spread = spread.max(hi - lo);
    }
    report(
        5,
        "chain gap equals alpha_3 for M = 3..8",
        worst <= CHAIN_GAP_TOL && spread <= CHAIN_GAP_TOL,
        start.elapsed(),
        Duration::from_secs(60),
        &format!("max |gap - alpha_3| = {worst:.2e}, spread over M = {spread:.2e}"),
    );
}

#[test]
fn criterion_06_detailed_balance() {
    let start = Instant::now();
    let mut rng = stream_rng(106, 0);
    let mut worst = 0.0_f64;
    let mut specs = 0;
    let sizes: [(usize, &[u32]); 4] = [
        (1, &[2, 10, 100, 1000, 4999]),
        (2, &[3, 8, 20, 50, 98]),
        (3, &[4, 6, 12, 20, 27]),
        (4, &[5, 8, 12, 15]),
    ];
    for (n, ms) in sizes {
        for &m in ms {
            let spec = ChainSpec::new(m, random_alpha(&mut rng, n)).unwrap();
            assert!(spec.num_states().unwrap() <= 5000);
            worst = worst.max(detailed_balance_check(&spec).unwrap());
            specs += 1;
        }
    }
    let spec = ChainSpec::new(5, random_alpha(&mut rng, 2)).unwrap();
    let mu = stationary_measure(&spec).unwrap();
    let mut a = generator_matrix(&spec).unwrap();
    let (i, j) = (7, a.row(7).iter().find(|&&(c, _)| c != 7).unwrap().0);
    let q = a.get(i, j);
    a.set_rate(i, j, 1.01 * q).unwrap();
    let injected = detailed_balance_violation(&a, &mu).unwrap();
    report(
        6,
        "detailed balance holds and a 1% rate error is detected",
        worst < BALANCE_TOL && injected > PERTURBATION_FLOOR,
        start.elapsed(),
        Duration::from_secs(30),
        &format!("{specs} specs, max violation {worst:.2e}, injected violation {injected:.2e}"),
    );
}

#[test]
fn criterion_07_gillespie_occupation() {
    let start = Instant::now();
    let spec = ChainSpec::new(4, AlphaParams::from_full(&[0.7, 1.3, 2.1]).unwrap()).unwrap();
    let states = enumerate_states(&spec).unwrap();
    let path = gillespie(&spec, &DiscreteState::zeros(2), StopRule::Jumps(1_000_000), &mut stream_rng(107, 0))
        .unwrap();
    let occ = path.occupation(&states);
    let mu = stationary_measure(&spec).unwrap().probabilities();
    let tv = total_variation(&occ, &mu);
    report(
        7,
        "Gillespie occupation measure matches the stationary law",
        tv < TV_TOL && path.jumps() == 1_000_000,
        start.elapsed(),
        Duration::from_secs(60),
        &format!("total variation {tv:.4} over {} jumps", path.jumps()),
    );
}

#[test]
fn criterion_08_diffusion_moments() {
    let start = Instant::now();
    let a = AlphaParams::from_full(&[0.7, 1.3, 2.1]).unwrap();
    let x0 = X0Law::Point(SimplexPoint::new(vec![0.6, 0.1]).unwrap());
    let exps: Vec<Vec<u32>> = vec![vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]];
    let obs: Vec<Polynomial> = exps
        .iter()
        .map(|e| Polynomial::monomial(MultiIndex::new(e.clone()), 1.0))
        .collect();
    let cfg = SimConfig::new(1e-3, 50.0, 10_000, 108).unwrap().with_stride(usize::MAX).unwrap();
    let stats = ensemble_stats(&x0, &a, &cfg, &obs).unwrap();
    let last = stats.times.len() - 1;
    assert_eq!(stats.times[last], 50.0);
    let mut worst = 0.0_f64;
    let mut lines = Vec::new();
    for (j, e) in exps.iter().enumerate() {
        let target = monomial_expectation(&a, &MultiIndex::new(e.clone())).unwrap();
        let z = (stats.means[last][j] - target) / stats.std_errors[last][j];
        worst = worst.max(z.abs());
        lines.push(format!("{e:?}: z = {z:+.2}"));
    }
    report(
        8,
        "terminal Euler-Maruyama moments match exact moments",
        worst <= MOMENT_SES,
        start.elapsed(),
        Duration::from_secs(300),
        &lines.join(", "),
    );
}

#[test]
fn criterion_09_decay_rates() {
    let start = Instant::now();
    let a = AlphaParams::from_full(&[0.7, 1.3, 2.1]).unwrap();
    let basis = degree_one_basis(&a).unwrap();
    let cfg = SimConfig::new(1e-3, 0.6, 1, 109).unwrap().with_stride(10).unwrap();
    let dc = DecayConfig::default();
    let mut pass = true;
    let mut lines = Vec::new();
    for (f, target, label) in [(&basis[0], a.alpha_last(), "u_1"), (&basis[1], a.total(), "u_N")] {
        let fit = decay_rate_fit(&a, f, &cfg, &X0Law::Stationary, &dc).unwrap();
        let rel = (fit.rate - target).abs() / target;
        let covered = fit.ci.0 <= target && target <= fit.ci.1;
        pass &= rel <= DECAY_REL && covered && !fit.inconclusive;
        lines.push(format!(
            "{label}: rate {:.4} (target {target:.4}, CI [{:.4}, {:.4}])",
            fit.rate, fit.ci.0, fit.ci.1
        ));
    }
    report(
        9,
        "decay rates of degree-one eigenfunctions",
        pass,
        start.elapsed(),
        Duration::from_secs(600),
        &lines.join("; "),
    );
}

#[test]
fn criterion_10_infinite_witness() {
    let start = Instant::now();
    let gem = GemParams::geometric(1.0, 0.5, 0.8).unwrap();
    let rep = infinite_gap_witness(&gem, &(2..=8).collect::<Vec<_>>()).unwrap();
    let gap_err = rep
        .rows
        .iter()
        .map(|r| (r.gap - gem.alpha_inf()).abs())
        .fold(0.0, f64::max);
    let mut exact = true;
    for n in 3..=8 {
        let alpha = truncate_params(&gem, n).unwrap();
        let mut coeffs = vec![0.0; n];
        coeffs[0] = gem.alpha(2);
        coeffs[1] = -gem.alpha(1);
        let u = Polynomial::linear(&coeffs, 0.0);
        exact &= apply_generator(&alpha, &u).unwrap() == u.scale(-gem.alpha_inf());
    }
    report(
        10,
        "truncated gaps equal alpha_inf and the witness is an eigenfunction",
        gap_err <= WITNESS_GAP_TOL && exact,
        start.elapsed(),
        Duration::from_secs(10),
        &format!("max gap error {gap_err:.2e}, L u == -alpha_inf u exactly: {exact}"),
    );
}

#[test]
fn criterion_11_coupling_bound() {
    let start = Instant::now();
    let gem = GemParams::geometric(1.0, 0.6, 0.5).unwrap();
    let x = [0.2, 0.15, 0.1, 0.08, 0.05, 0.04, 0.03, 0.02, 0.01, 0.01];
    let mut pass = true;
    let mut lines = Vec::new();
    for (m, n) in [(2usize, 4usize), (3, 6), (4, 8), (6, 10)] {
        for t in [0.25, 0.5, 1.0] {
            let cfg = SimConfig::new(1e-3, t, 1000, 111).unwrap();
            let r = coupled_truncations(&gem, &x, m, n, &cfg).unwrap();
            let ok = r.estimate <= r.bound + COUPLING_SES * r.se;
            pass &= ok;
            lines.push(format!("({m},{n},{t}): {:.4} <= {:.4}", r.estimate, r.bound));
        }
    }
    report(
        11,
        "coupled truncations stay within the maximal-inequality bound",
        pass && lines.len() == 12,
        start.elapsed(),
        Duration::from_secs(600),
        &lines.join(", "),
    );
}
