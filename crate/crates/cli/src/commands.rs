use std::fmt::Write as _;

use serde_json::{json, Value};

use dirichlet_lab_core::chain::{
    chain_spectral_gap, detailed_balance_check, detailed_balance_violation, generator_matrix,
    stationarity_residual, stationary_measure, ChainSpec,
};
use dirichlet_lab_core::diffusion::{
    decay_rate_fit, ensemble_stats, simulate_path, BoundaryPolicy, DecayConfig, SimConfig, X0Law,
};
use dirichlet_lab_core::infinite::{
    coupled_truncations, infinite_gap_witness, wasserstein_truncation_bound, GemParams,
};
use dirichlet_lab_core::simplex::{monomial_expectation, sample_ensemble};
use dirichlet_lab_core::spectrum::{
    build_md, degree_one_basis, eigen_multiset, poincare_ratio, spectral_gap, spectral_gap_eigen,
    spectrum_parametrized_degree, spectrum_recursion, ClusterTol, EigenMultiset,
};
use dirichlet_lab_core::{AlphaParams, MultiIndex, Polynomial, SimplexPoint};

use crate::args::{BalanceArgs, Boundary, ChainArgs, DecayArgs, InfiniteArgs, PoincareArgs, SimArgs, SimulateArgs, SpectrumArgs};
use crate::config::{ChainBlock, Decimal, DiffusionBlock, ExperimentConfig, StartSpec};
use crate::error::{CliError, Result};

/// What a command produced: the JSON summary, CSV detail files and the
/// assertions that failed.
pub struct Report {
    pub name: &'static str,
    pub summary: Value,
    pub csv: Vec<(String, String)>,
    pub failures: Vec<String>,
}

/// Resolved inputs shared by all commands.
pub struct Context {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub tolerance: Option<f64>,
    pub alpha_text: Option<Vec<String>>,
}

const BALANCE_TOL: f64 = 1e-12;
const MOMENT_SES: f64 = 4.0;

fn parse_number(field: &str, text: &str) -> Result<f64> {
    text.trim()
        .parse::<f64>()
        .map_err(|_| CliError::Parse(format!("field `{field}`: cannot read {text:?} as a number")))
}

impl Context {
    fn tolerance(&self, default: f64) -> Result<f64> {
        let t = self.tolerance.or(self.config.tolerance).unwrap_or(default);
        if !(t.is_finite() && t > 0.0) {
            return Err(CliError::validation(format!("field `tolerance`: must be positive, got {t}")));
        }
        Ok(t)
    }

    fn alpha(&self) -> Result<AlphaParams> {
        let texts: Vec<String> = match (&self.alpha_text, &self.config.alpha) {
            (Some(t), _) => t.clone(),
            (None, Some(c)) => c.iter().map(Decimal::to_text).collect(),
            (None, None) => return Err(CliError::validation("field `alpha`: missing (use --alpha or the config)")),
        };
        let mut values = Vec::with_capacity(texts.len());
        for (i, t) in texts.iter().enumerate() {
            let v = parse_number(&format!("alpha[{i}]"), t)?;
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::validation(format!("field `alpha[{i}]`: must be positive and finite, got {t}")));
            }
            values.push(v);
        }
        if values.len() < 2 {
            return Err(CliError::validation(format!(
                "field `alpha`: needs at least 2 entries, got {}",
                values.len()
            )));
        }
        Ok(AlphaParams::from_full(&values)?)
    }
}

fn multiset_json(m: &EigenMultiset) -> Value {
    m.clusters()
        .iter()
        .map(|c| json!({"value": c.value, "multiplicity": c.multiplicity}))
        .collect()
}

fn positive<T: Into<f64> + Copy>(field: &str, v: T) -> Result<T> {
    let x: f64 = v.into();
    if !(x.is_finite() && x > 0.0) {
        return Err(CliError::validation(format!("field `{field}`: must be positive, got {x}")));
    }
    Ok(v)
}

pub fn spectrum(ctx: &Context, args: &SpectrumArgs) -> Result<Report> {
    let alpha = ctx.alpha()?;
    let block = ctx.config.spectrum.clone().unwrap_or_default();
    let d_max = args.d_max.or(block.d_max).unwrap_or(4);
    let tol = ctx.tolerance(1e-8)?;
    let ct = ClusterTol::default();
    let rec = spectrum_recursion(&alpha, d_max, ct)?;
    let mut degrees = Vec::new();
    let mut csv = String::from("degree,value,multiplicity\n");
    let mut failures = Vec::new();
    let mut non_generic = false;
    for d in 0..=d_max {
        let lambda = &rec.shifted[d as usize];
        let matrix = eigen_multiset(&build_md(&alpha, d)?, ct)?;
        let keys = spectrum_parametrized_degree(&alpha, d, ct)?;
        let matrix_mismatch = matrix.mismatch(lambda, tol);
        let keys_mismatch = keys.mismatch(lambda, tol);
        for (route, m) in [("matrix", &matrix_mismatch), ("keys", &keys_mismatch)] {
            if let Some(msg) = m {
                failures.push(format!("degree {d}: {route} spectrum differs from the recursion: {msg}"));
            }
        }
        non_generic |= lambda.is_non_generic() || keys.is_non_generic();
        for c in lambda.clusters() {
            writeln!(csv, "{d},{},{}", c.value, c.multiplicity).unwrap();
        }
        degrees.push(json!({
            "degree": d,
            "dimension": lambda.dimension(),
            "eigenvalues": multiset_json(lambda),
            "matrix_agrees": matrix_mismatch.is_none(),
            "keys_agrees": keys_mismatch.is_none(),
        }));
    }
    let gap = rec.shifted[1..].iter().filter_map(EigenMultiset::min_positive).fold(f64::INFINITY, f64::min);
    Ok(Report {
        name: "spectrum",
        summary: json!({
            "report": "spectrum",
            "alpha": alpha.full(),
            "d_max": d_max,
            "tolerance": tol,
            "gap_in_window": gap,
            "non_generic": non_generic,
            "degrees": degrees,
        }),
        csv: vec![("spectrum.csv".into(), csv)],
        failures,
    })
}

pub fn gap(ctx: &Context, args: &SpectrumArgs) -> Result<Report> {
    let alpha = ctx.alpha()?;
    let block = ctx.config.gap.clone().unwrap_or_default();
    let d_max = args.d_max.or(block.d_max).unwrap_or(5);
    let tol = ctx.tolerance(1e-8)?;
    let rec = spectral_gap(&alpha, d_max)?;
    let eig = spectral_gap_eigen(&alpha, d_max, ClusterTol::default())?;
    let agrees = (rec.gap - eig.gap).abs() <= tol;
    let mut failures = Vec::new();
    if !agrees {
        failures.push(format!("recursion gap {} and eigensolver gap {} differ by more than {tol}", rec.gap, eig.gap));
    }
    if !rec.certified {
        failures.push(format!(
            "gap {} is not below the bound {} for degrees beyond {d_max}",
            rec.gap, rec.unseen_lower_bound
        ));
    }
    let spec = spectrum_recursion(&alpha, d_max, ClusterTol::default())?;
    let mut csv = String::from("degree,recursion,eigen\n");
    for d in 1..=d_max {
        let r = spec.shifted[d as usize].min_positive().unwrap_or(f64::NAN);
        let e = eigen_multiset(&build_md(&alpha, d)?, ClusterTol::default())?.min_positive().unwrap_or(f64::NAN);
        writeln!(csv, "{d},{r},{e}").unwrap();
    }
    Ok(Report {
        name: "gap",
        summary: json!({
            "report": "gap",
            "alpha": alpha.full(),
            "d_max": d_max,
            "gap": rec.gap,
            "method": "recursion+eigen",
            "agrees": agrees,
            "eigen_gap": eig.gap,
            "argmin_degree": rec.argmin_degree,
            "certified": rec.certified,
            "unseen_lower_bound": rec.unseen_lower_bound,
            "tolerance": tol,
        }),
        csv: vec![("gap_by_degree.csv".into(), csv)],
        failures,
    })
}

fn chain_spec(ctx: &Context, args: &ChainArgs, block: &ChainBlock) -> Result<ChainSpec> {
    let alpha = ctx.alpha()?;
    let n = alpha.dim() as u32;
    let m = args.m.or(block.m).unwrap_or(6.max(n + 1));
    if args.relaxed || block.relaxed.unwrap_or(false) {
        Ok(ChainSpec::relaxed(m, alpha)?)
    } else {
        ChainSpec::new(m, alpha).map_err(|e| CliError::validation(format!("field `m`: {e}")))
    }
}

pub fn chain_gap(ctx: &Context, args: &ChainArgs) -> Result<Report> {
    let block = ctx.config.chain.clone().unwrap_or_default();
    let spec = chain_spec(ctx, args, &block)?;
    let tol = ctx.tolerance(1e-8)?;
    let g = chain_spectral_gap(&spec)?;
    let violation = detailed_balance_check(&spec)?;
    let mu = stationary_measure(&spec)?;
    let expected = spec.alpha().alpha_last();
    let mut failures = Vec::new();
    if violation >= BALANCE_TOL {
        failures.push(format!("detailed balance violated by {violation:e}"));
    }
    if g.theorem_applies && (g.gap - expected).abs() > tol {
        failures.push(format!("gap {} differs from alpha_(N+1) = {expected} by more than {tol}", g.gap));
    }
    let mut csv = Vec::new();
    mu.write_csv(&mut csv).expect("writing to memory");
    Ok(Report {
        name: "chain-gap",
        summary: json!({
            "report": "chain-gap",
            "alpha": spec.alpha().full(),
            "m": spec.population(),
            "n": spec.dim(),
            "states": g.states,
            "gap": g.gap,
            "smallest": g.smallest,
            "expected_gap": expected,
            "theorem_applies": g.theorem_applies,
            "detailed_balance_violation": violation,
            "tolerance": tol,
        }),
        csv: vec![("stationary.csv".into(), String::from_utf8(csv).expect("ascii"))],
        failures,
    })
}

pub fn detailed_balance(ctx: &Context, args: &BalanceArgs) -> Result<Report> {
    let block = ctx.config.chain.clone().unwrap_or_default();
    let spec = chain_spec(ctx, &args.chain, &block)?;
    let tol = ctx.tolerance(BALANCE_TOL)?;
    let mut a = generator_matrix(&spec)?;
    let mu = stationary_measure(&spec)?;
    let perturb = args.perturb.or(block.perturb);
    let perturbation = match perturb {
        Some(f) => {
            if !(f.is_finite() && f > -1.0 && f != 0.0) {
                return Err(CliError::validation(format!("field `perturb`: must be a nonzero fraction above -1, got {f}")));
            }
            let (col, q) = a
                .row(0)
                .iter()
                .copied()
                .find(|&(j, _)| j != 0)
                .ok_or_else(|| CliError::validation("the chain has a single state; nothing to perturb"))?;
            a.set_rate(0, col, q * (1.0 + f))?;
            Some(json!({"row": 0, "col": col, "fraction": f}))
        }
        None => None,
    };
    let violation = detailed_balance_violation(&a, &mu)?;
    let residual = stationarity_residual(&a, &mu)?;
    let detected = violation >= tol;
    let mut failures = Vec::new();
    match (&perturbation, detected) {
        (None, true) => failures.push(format!("detailed balance violated by {violation:e}")),
        (Some(_), false) => failures.push(format!("perturbation went undetected (violation {violation:e})")),
        _ => {}
    }
    let mut csv = Vec::new();
    a.write_triplets_csv(&mut csv).expect("writing to memory");
    Ok(Report {
        name: "detailed-balance",
        summary: json!({
            "report": "detailed-balance",
            "alpha": spec.alpha().full(),
            "m": spec.population(),
            "states": a.size(),
            "violation": violation,
            "stationarity_residual": residual,
            "perturbation": perturbation,
            "violation_detected": detected,
            "tolerance": tol,
        }),
        csv: vec![("generator.csv".into(), String::from_utf8(csv).expect("ascii"))],
        failures,
    })
}

fn label(k: &MultiIndex) -> String {
    let parts: Vec<String> = k
        .entries()
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(i, &e)| if e == 1 { format!("x{}", i + 1) } else { format!("x{}^{e}", i + 1) })
        .collect();
    parts.join("*")
}

fn low_exponents(n: usize) -> Vec<MultiIndex> {
    let mut out: Vec<MultiIndex> = (0..n).map(|i| MultiIndex::unit(n, i)).collect();
    for i in 0..n {
        for j in i..n {
            out.push(MultiIndex::unit(n, i).sum(&MultiIndex::unit(n, j)));
        }
    }
    out
}

fn sim_config(
    args: &SimArgs,
    block: &DiffusionBlock,
    seed: u64,
    paths: usize,
    default_dt: f64,
    default_horizon: f64,
    default_stride: usize,
) -> Result<SimConfig> {
    let dt = positive("dt", args.dt.or(block.dt).unwrap_or(default_dt))?;
    let horizon = args.horizon.or(block.horizon).unwrap_or(default_horizon);
    let boundary = match args.boundary.or(block.boundary).unwrap_or(Boundary::Clamp) {
        Boundary::Clamp => BoundaryPolicy::Clamp,
        Boundary::Reflect => BoundaryPolicy::Reflect,
    };
    Ok(SimConfig::new(dt, horizon, paths, seed)?
        .with_boundary(boundary)
        .with_stride(args.stride.or(block.stride).unwrap_or(default_stride))?)
}

fn start_law(args: &SimulateArgs, block: &DiffusionBlock, alpha: &AlphaParams) -> Result<X0Law> {
    let spec = match (&args.x0, &block.x0) {
        (Some(v), _) if v.len() == 1 && v[0].trim() == "stationary" => StartSpec::Word("stationary".into()),
        (Some(v), _) => StartSpec::Point(v.iter().cloned().map(Decimal::Text).collect()),
        (None, Some(s)) => s.clone(),
        (None, None) => return Ok(X0Law::Point(SimplexPoint::mean_of(alpha))),
    };
    match spec {
        StartSpec::Word(w) if w == "stationary" => Ok(X0Law::Stationary),
        StartSpec::Word(w) => Err(CliError::validation(format!("field `x0`: expected a point or \"stationary\", got {w:?}"))),
        StartSpec::Point(p) => {
            let coords = p
                .iter()
                .enumerate()
                .map(|(i, d)| parse_number(&format!("x0[{i}]"), &d.to_text()))
                .collect::<Result<Vec<f64>>>()?;
            if coords.len() != alpha.dim() {
                return Err(CliError::validation(format!(
                    "field `x0`: has {} coordinates, alpha has N = {}",
                    coords.len(),
                    alpha.dim()
                )));
            }
            let x = SimplexPoint::new(coords).map_err(|e| CliError::validation(format!("field `x0`: {e}")))?;
            Ok(X0Law::Point(x))
        }
    }
}

pub fn simulate(ctx: &Context, args: &SimulateArgs) -> Result<Report> {
    let alpha = ctx.alpha()?;
    let block = ctx.config.diffusion.clone().unwrap_or_default();
    let paths = positive("paths", args.paths.or(block.paths).unwrap_or(1000) as f64)? as usize;
    let cfg = sim_config(&args.sim, &block, ctx.seed, paths, SimConfig::default_dt(&alpha), 1.0, 100)?;
    let law = start_law(args, &block, &alpha)?;
    let n = alpha.dim();
    let exps = low_exponents(n);
    let observables: Vec<Polynomial> = exps.iter().map(|k| Polynomial::monomial(k.clone(), 1.0)).collect();
    let stats = ensemble_stats(&law, &alpha, &cfg, &observables)?;

    let labels: Vec<String> = exps.iter().map(label).collect();
    let mut ensemble = String::from("t");
    for l in &labels {
        write!(ensemble, ",mean_{l},se_{l}").unwrap();
    }
    ensemble.push('\n');
    for (ti, t) in stats.times.iter().enumerate() {
        write!(ensemble, "{t}").unwrap();
        for j in 0..labels.len() {
            write!(ensemble, ",{},{}", stats.means[ti][j], stats.std_errors[ti][j]).unwrap();
        }
        ensemble.push('\n');
    }
    let last = stats.times.len() - 1;
    let mut terminal = Vec::new();
    let mut worst = 0.0_f64;
    for (j, k) in exps.iter().enumerate() {
        let exact = monomial_expectation(&alpha, k)?;
        let (mean, se) = (stats.means[last][j], stats.std_errors[last][j]);
        let z = (mean - exact) / se;
        worst = worst.max(z.abs());
        terminal.push(json!({"monomial": labels[j], "mean": mean, "se": se, "stationary": exact, "z": z}));
    }
    let mut failures = Vec::new();
    if (args.assert_stationary || block.assert_stationary.unwrap_or(false))
        && !(worst <= MOMENT_SES) {
            failures.push(format!("terminal moments are {worst:.2} standard errors from the stationary ones"));
        }
    let mut csv = vec![("ensemble.csv".to_string(), ensemble)];
    let x0_json = match &law {
        X0Law::Point(x) => {
            let tr = simulate_path(x, &alpha, &cfg, 0)?;
            let mut s = String::from("t");
            for i in 1..=n {
                write!(s, ",x{i}").unwrap();
            }
            s.push('\n');
            for (t, x) in tr.times.iter().zip(&tr.states) {
                write!(s, "{t}").unwrap();
                for c in x.coords() {
                    write!(s, ",{c}").unwrap();
                }
                s.push('\n');
            }
            csv.push(("trajectory.csv".into(), s));
            json!(x.coords())
        }
        X0Law::Stationary => json!("stationary"),
    };
    Ok(Report {
        name: "simulate",
        summary: json!({
            "report": "simulate",
            "alpha": alpha.full(),
            "x0": x0_json,
            "dt": cfg.dt,
            "horizon": cfg.horizon,
            "paths": cfg.paths,
            "seed": cfg.seed,
            "boundary": cfg.boundary,
            "terminal": terminal,
            "max_abs_z": worst,
        }),
        csv,
        failures,
    })
}

pub fn decay_fit(ctx: &Context, args: &DecayArgs) -> Result<Report> {
    let alpha = ctx.alpha()?;
    let block = ctx.config.diffusion.clone().unwrap_or_default();
    let n = alpha.dim();
    let which = args.eigenfunction.or(block.eigenfunction).unwrap_or(1);
    if which == 0 || which > n {
        return Err(CliError::validation(format!("field `eigenfunction`: must lie in 1..={n}, got {which}")));
    }
    let basis = degree_one_basis(&alpha)?;
    // for N = 1 the basis holds only the symmetric function
    let f = &basis[basis.len() - (n - which) - 1];
    let target = if which == n { alpha.total() } else { alpha.alpha_last() };
    let tol = ctx.tolerance(0.15)?;
    let cfg = sim_config(&args.sim, &block, ctx.seed, 1, 1e-3, 1.5 / target, 10)?;
    let defaults = DecayConfig::default();
    let dc = DecayConfig {
        outer: args.outer.or(block.outer).unwrap_or(defaults.outer),
        inner: args.inner.or(block.inner).unwrap_or(defaults.inner),
        bootstrap: args.bootstrap.or(block.bootstrap).unwrap_or(defaults.bootstrap),
        t_start: args.t_start.or(block.t_start).unwrap_or(defaults.t_start),
        drop_fraction: defaults.drop_fraction,
    };
    let fit = decay_rate_fit(&alpha, f, &cfg, &X0Law::Stationary, &dc)?;
    let rel = (fit.rate - target).abs() / target;
    let covered = fit.ci.0 <= target && target <= fit.ci.1;
    let mut failures = Vec::new();
    if fit.inconclusive {
        failures.push("the fit is inconclusive".to_string());
    }
    if !(rel <= tol) {
        failures.push(format!("rate {} is {:.1}% from the target {target}", fit.rate, 100.0 * rel));
    }
    if !covered {
        failures.push(format!("bootstrap interval [{}, {}] misses the target {target}", fit.ci.0, fit.ci.1));
    }
    let mut curve = String::from("t,squared_deviation\n");
    for (t, s) in &fit.curve {
        writeln!(curve, "{t},{s}").unwrap();
    }
    Ok(Report {
        name: "decay-fit",
        summary: json!({
            "report": "decay-fit",
            "alpha": alpha.full(),
            "eigenfunction": which,
            "target": target,
            "rate": fit.rate,
            "stderr": fit.stderr,
            "ci": [fit.ci.0, fit.ci.1],
            "window": [fit.window.0, fit.window.1],
            "dt": fit.dt,
            "paths": fit.paths,
            "inconclusive": fit.inconclusive,
            "relative_error": rel,
            "covered": covered,
        }),
        csv: vec![("decay_curve.csv".into(), curve)],
        failures,
    })
}

/// Monte Carlo `E(f, f) / Var f` from Dirichlet samples.
fn poincare_monte_carlo(alpha: &AlphaParams, f: &Polynomial, samples: usize, seed: u64) -> f64 {
    let n = alpha.dim();
    let grads: Vec<Polynomial> = (0..n).map(|i| f.derivative(i)).collect();
    let xs = sample_ensemble(alpha, samples, seed);
    let k = samples as f64;
    let values: Vec<f64> = xs.iter().map(|x| f.evaluate(x.coords())).collect();
    let mean = values.iter().sum::<f64>() / k;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    let energy = xs
        .iter()
        .map(|x| {
            let c = x.coords();
            x.remainder() * (0..n).map(|i| c[i] * grads[i].evaluate(c).powi(2)).sum::<f64>()
        })
        .sum::<f64>()
        / k;
    energy / var
}

pub fn poincare(ctx: &Context, args: &PoincareArgs) -> Result<Report> {
    let alpha = ctx.alpha()?;
    let samples = args
        .samples
        .or(ctx.config.poincare.as_ref().and_then(|b| b.samples))
        .unwrap_or(100_000);
    if samples == 1 {
        return Err(CliError::validation("field `samples`: need 0 or at least 2"));
    }
    let tol = ctx.tolerance(1e-12)?;
    let n = alpha.dim();
    let basis = degree_one_basis(&alpha)?;
    let mut rows = Vec::new();
    let mut csv = String::from("function,exact,target,monte_carlo\n");
    let mut failures = Vec::new();
    for (idx, f) in basis.iter().enumerate() {
        let which = n - basis.len() + idx + 1;
        let name = if which == n { "u_N".to_string() } else { format!("u_{which}") };
        let target = if which == n { alpha.total() } else { alpha.alpha_last() };
        let exact = poincare_ratio(&alpha, f)?;
        let rel = (exact - target).abs() / target;
        if !(rel <= tol) {
            failures.push(format!("{name}: ratio {exact} is {rel:e} from {target}"));
        }
        let mc = (samples > 0).then(|| poincare_monte_carlo(&alpha, f, samples, ctx.seed));
        writeln!(csv, "{name},{exact},{target},{}", mc.map_or(String::new(), |v| v.to_string())).unwrap();
        rows.push(json!({
            "function": name,
            "exact": exact,
            "target": target,
            "relative_error": rel,
            "monte_carlo": mc,
        }));
    }
    Ok(Report {
        name: "poincare",
        summary: json!({
            "report": "poincare",
            "alpha": alpha.full(),
            "samples": samples,
            "seed": ctx.seed,
            "tolerance": tol,
            "rows": rows,
        }),
        csv: vec![("poincare.csv".into(), csv)],
        failures,
    })
}

pub fn infinite_sweep(ctx: &Context, args: &InfiniteArgs) -> Result<Report> {
    let block = ctx.config.infinite.clone().unwrap_or_default();
    let alpha_inf = args.alpha_inf.or(block.alpha_inf).unwrap_or(0.8);
    let gem = match args.alphas.clone().or(block.alphas.clone()) {
        Some(list) => GemParams::explicit(list, alpha_inf)?,
        None => GemParams::geometric(
            args.c.or(block.c).unwrap_or(1.0),
            args.r.or(block.r).unwrap_or(0.5),
            alpha_inf,
        )?,
    };
    let tol = ctx.tolerance(1e-8)?;
    let sizes = args.sizes.clone().or(block.sizes.clone()).unwrap_or_else(|| (2..=8).collect());
    let witness = infinite_gap_witness(&gem, &sizes)?;
    let mut failures = Vec::new();
    for row in &witness.rows {
        if (row.gap - alpha_inf).abs() > tol {
            failures.push(format!("n = {}: gap {} differs from alpha_inf = {alpha_inf}", row.n, row.gap));
        }
        if row.generator_residual.is_some_and(|r| r > tol) {
            failures.push(format!("n = {}: witness is not an eigenfunction", row.n));
        }
    }

    let pairs = block.pairs.clone().unwrap_or_else(|| vec![(2, 4), (3, 6), (4, 8), (6, 10)]);
    let horizons = block.horizons.clone().unwrap_or_else(|| vec![0.25, 0.5, 1.0]);
    let x = block
        .x
        .clone()
        .unwrap_or_else(|| vec![0.2, 0.15, 0.1, 0.08, 0.05, 0.04, 0.03, 0.02, 0.01, 0.01]);
    let paths = args.paths.or(block.paths).unwrap_or(1000);
    let dt = positive("dt", args.dt.or(block.dt).unwrap_or(1e-3))?;
    let mut wasserstein = Vec::new();
    let mut coupling = Vec::new();
    let mut csv = String::from("m,n,horizon,bound,estimate,se\n");
    for &(m, n) in &pairs {
        wasserstein.push(json!({"m": m, "n": n, "bound": wasserstein_truncation_bound(&gem, m, n)?}));
        if paths == 0 {
            continue;
        }
        for &h in &horizons {
            let cfg = SimConfig::new(dt, h, paths, ctx.seed)?;
            let rep = coupled_truncations(&gem, &x, m, n, &cfg)?;
            if !rep.within {
                failures.push(format!(
                    "(m, n, T) = ({m}, {n}, {h}): estimate {} exceeds the bound {} by more than 3 SE",
                    rep.estimate, rep.bound
                ));
            }
            writeln!(csv, "{m},{n},{h},{},{},{}", rep.bound, rep.estimate, rep.se).unwrap();
            coupling.push(serde_json::to_value(&rep).expect("serializable"));
        }
    }
    Ok(Report {
        name: "infinite-sweep",
        summary: json!({
            "report": "infinite-sweep",
            "family": gem.family(),
            "alpha_inf": alpha_inf,
            "tolerance": tol,
            "witness": witness.rows,
            "wasserstein": wasserstein,
            "coupling": coupling,
        }),
        csv: vec![("coupling.csv".into(), csv)],
        failures,
    })
}
