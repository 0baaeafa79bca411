//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p nrds --test acceptance -- --nocapture`. The process
//! exits nonzero only when a criterion outside `EXPECTED_FAILURES` fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use nrds::bench::{
    conjugacy_sweep, cube_on_grid, lookup, mua_nonexistence_probe, registry, sample_variance, stationary_samples,
    DriverKind, ExperimentConfig, ProblemId,
};
use nrds::cocycle::{make_nrds, Cocycle, EvolutionProcess, FieldSpec, IntegratorConfig, SdeSpec};
use nrds::cohomology::{verify_conjugacy, KappaSpec, PowerCohomology};
use nrds::driver::{BasePoint, OuEvaluator, SamplePath};
use nrds::setvalued::{
    estimate_mjua, forward_omega_limit, global_uniform_omega_limit, hausdorff_dist, uniform_omega_limit, BoxSet,
    LimitEstimate,
};
use nrds::symbolspace::{holder_diagnostic, stability_probe, symbol_trajectory, SymbolFunction};
use nrds::{Error, Result};

/// Criteria that cannot hold for the model as specified; see the README.
const EXPECTED_FAILURES: &[&str] = &["6b"];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { pass, detail: detail.into() })
}

fn mjua(cfg: &ExperimentConfig, b: &BasePoint<f64>) -> Result<LimitEstimate<f64>> {
    let problem = lookup(cfg.problem.as_str())?;
    let phi = problem.cocycle(&cfg.params, cfg.driver.kind, cfg.integrator)?;
    estimate_mjua(phi.as_ref(), &cfg.library()?, &cfg.grid()?, b, &cfg.limit_config())
}

fn reference_distance(cfg: &ExperimentConfig, b: &BasePoint<f64>, est: &BoxSet<f64>) -> Result<f64> {
    let problem = lookup(cfg.problem.as_str())?;
    let reference = problem
        .reference(&cfg.params, b, &cfg.grid()?)
        .ok_or_else(|| Error::Config(format!("{} has no reference", problem.id)))??;
    hausdorff_dist(est, &reference)
}

fn criterion_1() -> Result<Outcome> {
    let mut cfg = ExperimentConfig::defaults(ProblemId::Sin);
    cfg.output.rate = false;
    let (mut worst, mut slowest) = (0.0f64, 0.0f64);
    for j in 0..cfg.base_count() {
        let start = Instant::now();
        let b = cfg.base_point(j)?;
        let est = mjua(&cfg, &b)?;
        let d = reference_distance(&cfg, &b, &est.set)?;
        slowest = slowest.max(start.elapsed().as_secs_f64());
        worst = worst.max(d);
    }
    outcome(
        worst <= 1e-2 && slowest <= 60.0,
        format!("max distance {worst:.4} over {} bases, slowest base {slowest:.1} s", cfg.base_count()),
    )
}

/// Runs cubic_example on one driver and returns the estimates with the worst distance.
fn cubic_runs(kind: DriverKind) -> Result<(Vec<(BasePoint<f64>, BoxSet<f64>)>, f64)> {
    let mut cfg = ExperimentConfig::defaults(ProblemId::Cubic);
    cfg.driver.kind = kind;
    if kind == DriverKind::Circle {
        cfg.driver.angles = vec![0.0, 1.0, 2.0, 3.5, 5.0];
    }
    cfg.validate()?;
    let mut worst = 0.0f64;
    let mut runs = Vec::new();
    for j in 0..cfg.base_count() {
        let b = cfg.base_point(j)?;
        let est = mjua(&cfg, &b)?;
        worst = worst.max(reference_distance(&cfg, &b, &est.set)?);
        runs.push((b, est.set));
    }
    Ok((runs, worst))
}

fn criterion_2(wiener: &[(BasePoint<f64>, BoxSet<f64>)], wiener_worst: f64) -> Result<Outcome> {
    let (circle, circle_worst) = cubic_runs(DriverKind::Circle)?;
    outcome(
        wiener_worst <= 5e-2 && circle_worst <= 5e-2,
        format!(
            "max distance {wiener_worst:.4} (wiener, {} bases), {circle_worst:.4} (circle, {} bases)",
            wiener.len(),
            circle.len()
        ),
    )
}

fn criterion_3() -> Result<Outcome> {
    let cfg = ExperimentConfig::defaults(ProblemId::Sin);
    let problem = lookup("sin_example")?;
    let phi = problem.cocycle(&cfg.params, DriverKind::Circle, cfg.integrator)?;
    let grid = cfg.grid()?;
    let limits = cfg.limit_config();
    let samples: Vec<BasePoint<f64>> = (0..64).map(|k| BasePoint::circle(0.0, 2.0 * PI * k as f64 / 64.0)).collect();
    let library = cfg.library()?;
    let largest = library.last().expect("non-empty library");
    let global = global_uniform_omega_limit(phi.as_ref(), largest, &grid, &samples, &limits)?;
    let reference = problem
        .global_reference(&cfg.params, &grid)
        .ok_or_else(|| Error::Config("sin_example has no global reference".into()))??;
    let d = hausdorff_dist(&global.set, &reference)?;
    let widened = global.set.dilate(1);
    let mut outside = 0;
    for b in &samples {
        let est = estimate_mjua(phi.as_ref(), &library, &grid, b, &limits)?;
        outside += !est.set.is_subset(&widened)? as usize;
    }
    outcome(
        d <= 2e-2 && outside == 0,
        format!("distance to [-1,1] {d:.4}; {outside} of 64 per-sample estimates outside the dilated global set"),
    )
}

fn law_residuals(phi: &dyn Cocycle<f64>, b: &BasePoint<f64>, x: &[f64], t: f64, s: f64) -> Result<f64> {
    let full = phi.apply(t + s, b, x)?;
    let mid = phi.apply(s, b, x)?;
    let two = phi.apply(t, &b.shift(s)?, &mid)?;
    let ep = EvolutionProcess::new(phi, b.clone());
    let direct = ep.apply(t + s, 0.0, x)?;
    let composed = ep.apply(t + s, s, &ep.apply(s, 0.0, x)?)?;
    let mut worst = 0.0f64;
    for i in 0..x.len() {
        worst = worst.max((full[i] - two[i]).abs()).max((direct[i] - composed[i]).abs());
    }
    Ok(worst)
}

fn criterion_4() -> Result<Outcome> {
    let (t, s) = (1.5, 2.5);
    let dt = 1e-2;
    let mut notes = Vec::new();
    let mut pass = true;
    for problem in registry() {
        let cfg = ExperimentConfig::defaults(problem.id);
        let kind = problem.drivers[0];
        let b = match kind {
            DriverKind::Circle => BasePoint::circle(0.3, 1.1),
            DriverKind::Wiener => BasePoint::wiener(0.3, SamplePath::wiener(11, -40.0, 20.0, dt / 2.0)?),
        };
        let x = vec![0.5; problem.dim];
        let mut res = [0.0; 2];
        for (k, h) in [dt, dt / 2.0].into_iter().enumerate() {
            let phi = problem.cocycle(&cfg.params, kind, IntegratorConfig::rk4(h))?;
            res[k] = law_residuals(phi.as_ref(), &b, &x, t, s)?;
        }
        let bound = 10.0 * dt.powi(4) * (t + s);
        let halving = res[0] >= 12.0 * res[1] || (res[0] < 1e-12 && res[1] < 1e-12);
        pass &= res[0] <= bound && halving;
        notes.push(format!("{} {:.1e}/{:.1e}", problem.id, res[0], res[1]));
    }
    outcome(pass, format!("residuals at dt 1e-2 / 5e-3: {}", notes.join(", ")))
}

fn criterion_5() -> Result<Outcome> {
    let dt = 2f64.powi(-12);
    let p = SamplePath::wiener(21, -25.0, 4.0, dt)?;
    let geometric = SdeSpec::new(vec![0.0], FieldSpec::autonomous(1, |_: &[f64], du: &mut [f64]| du[0] = 0.0)?, KappaSpec::constant(1.0))?;
    let dts: Vec<f64> = (6..=10).map(|k| 2f64.powi(-k)).collect();
    let geo = verify_conjugacy(&geometric, &p, 0.0, &[0.5], 1.0, &dts)?;
    let cubic = conjugacy_sweep(&ExperimentConfig::defaults(ProblemId::StochasticCubic))?;
    let mut pass = true;
    let mut notes = Vec::new();
    for (name, rep) in [("du = u o dW", &geo), ("stochastic_cubic", &cubic)] {
        let err = rep.rows.last().map(|r| r.sup_error).unwrap_or(f64::INFINITY);
        let order = rep.order.unwrap_or(f64::NAN);
        pass &= err <= 1e-2 && order >= 0.5;
        notes.push(format!("{name}: error {err:.2e}, order {order:.2}"));
    }
    outcome(pass, notes.join("; "))
}

fn criterion_6a() -> Result<Outcome> {
    let z = stationary_samples(0..100_000u64, 0.01, &OuEvaluator::default())?;
    let v = sample_variance(&z);
    outcome((v - 0.5).abs() <= 0.02, format!("variance {v:.4} over {} seeds", z.len()))
}

fn criterion_6b() -> Result<Outcome> {
    let seeds: Vec<u64> = (0..200).collect();
    let probe = mua_nonexistence_probe(&seeds, &[10.0, 100.0, 1000.0], 0.01, &OuEvaluator::default())?;
    outcome(
        probe.fraction_increasing >= 0.95,
        format!(
            "{:.3} of 200 seeds strictly increasing (needs 0.95; about 0.81 expected for a stationary OU process)",
            probe.fraction_increasing
        ),
    )
}

fn criterion_7() -> Result<Outcome> {
    let ev = OuEvaluator::default();
    let field = FieldSpec::new(1, vec![nrds::cocycle::Channel::along("z", |z: f64| z)], |_, ch, _, du| du[0] = ch[0])?;
    let mut inside = 0;
    for seed in 0..100 {
        let b = BasePoint::wiener(0.0, SamplePath::wiener(seed, -75.0, 75.0, 0.01)?);
        let orbit = SymbolFunction::orbit(&field, &b, 50.0, 0.01, &ev)?;
        let h = holder_diagnostic(&orbit, 50.0)?;
        inside += (0.4..=0.5).contains(&h.alpha) as usize;
    }
    let root = SymbolFunction::from_fn(|t: f64| t.abs().sqrt(), 0.0005, -1.0, 1.0, 0.0)?;
    let alpha = holder_diagnostic(&root, 1.0)?.alpha;
    outcome(
        inside >= 90 && (alpha - 0.5).abs() <= 0.05,
        format!("{inside} of 100 OU orbits in [0.4, 0.5]; |t|^(1/2) gives alpha {alpha:.3}"),
    )
}

fn invariance(id: ProblemId, base: Option<(&BasePoint<f64>, &BoxSet<f64>)>) -> Result<(f64, f64)> {
    let cfg = ExperimentConfig::defaults(id);
    let (b, est) = match base {
        Some((b, e)) => (b.clone(), e.clone()),
        None => {
            let b = cfg.base_point(0)?;
            let e = mjua(&cfg, &b)?.set;
            (b, e)
        }
    };
    let mut worst = 0.0f64;
    for t in [1.0, 3.0] {
        let moved = mjua(&cfg, &b.shift(t)?)?.set;
        worst = worst.max(hausdorff_dist(&moved, &est)?);
    }
    Ok((worst, cfg.grid()?.diameter()))
}

fn criterion_8(cubic: (&BasePoint<f64>, &BoxSet<f64>)) -> Result<Outcome> {
    let (sin_d, sin_h) = invariance(ProblemId::Sin, None)?;
    let (cub_d, cub_h) = invariance(ProblemId::Cubic, Some(cubic))?;
    outcome(
        sin_d <= 2.0 * sin_h && cub_d <= 2.0 * cub_h,
        format!(
            "sin_example {:.2} cells, cubic_example {:.2} cells",
            sin_d / sin_h,
            cub_d / cub_h
        ),
    )
}

fn criterion_9(b: &BasePoint<f64>, a: &BoxSet<f64>) -> Result<Outcome> {
    let cfg = ExperimentConfig::defaults(ProblemId::Cubic);
    let problem = lookup("cubic_example")?;
    let phi = problem.cocycle(&cfg.params, cfg.driver.kind, cfg.integrator)?;
    let limits = cfg.limit_config();
    let report = stability_probe(phi.as_ref(), a, 0.5, &[0.05, 0.1, 0.25], b, &limits)?;
    let reference = problem
        .reference(&cfg.params, b, &cfg.grid()?)
        .ok_or_else(|| Error::Config("cubic_example has no reference".into()))??;
    let top = reference.centers().iter().map(|c| c[0]).fold(f64::MIN, f64::max);
    let wrong = BoxSet::from_points(a.grid().clone(), [&[top + 1.0][..]]);
    let adversarial = stability_probe(phi.as_ref(), &wrong, 0.5, &[0.05, 0.1, 0.25], b, &limits)?;
    let escape = adversarial.rows.iter().find_map(|r| r.escape.as_ref());
    let escape_note = match escape {
        Some(e) => format!("escape at s {} t {:.2} dist {:.2}", e.s, e.t, e.dist),
        None => "no escape reported".into(),
    };
    outcome(
        report.best().is_some() && adversarial.best().is_none() && escape.is_some(),
        format!("best delta {:?}; wrong attractor at {:.2}: {escape_note}", report.best(), top + 1.0),
    )
}

fn criterion_10() -> Result<Outcome> {
    let problem = lookup("coupled_example")?;
    let cfg = ExperimentConfig::defaults(ProblemId::Coupled);
    let field = problem.field(&cfg.params, DriverKind::Wiener)?;
    let h = 0.01;
    let icfg = IntegratorConfig::rk4(h);
    let phi = make_nrds(field.clone(), icfg)?;
    let ev = OuEvaluator::default();
    let mut worst_ratio = 0.0f64;
    for (seed, tau) in [(4u64, -2.0), (5, 0.0), (6, 3.0)] {
        let b = BasePoint::wiener(tau, SamplePath::wiener(seed, -60.0, 60.0, 0.01)?);
        let sigma = SymbolFunction::orbit(&field, &b, 6.0, h / 2.0, &ev)?;
        let x = [0.7, -0.4];
        let psi = symbol_trajectory(&field, &x, &sigma, 5.0, &icfg)?;
        let nrds = phi.trajectory(5.0, &b, &x)?;
        for k in 1..psi.len() {
            let t = psi.times[k];
            let dev = (0..2).map(|i| (psi.state(k)[i] - nrds.state(k)[i]).abs()).fold(0.0, f64::max);
            worst_ratio = worst_ratio.max(dev / (10.0 * h.powi(4) * t));
        }
    }
    outcome(worst_ratio <= 1.0, format!("max deviation / (10 dt^4 t) = {worst_ratio:.2e} on [0, 5]"))
}

fn criterion_11() -> Result<Outcome> {
    let pc = PowerCohomology::constant(1, 1.0, 1.0)?;
    let grid: Vec<f64> = (0..=190).map(|i| 0.1 + 0.01 * i as f64).collect();
    let mut identity = 0.0f64;
    let mut literal_gap = 0.0f64;
    for &u in &grid {
        identity = identity.max((pc.g_inverse(0.0, pc.f(0.0, u))? - u).abs());
        let lit = pc.residual(0.0, &[u], false)?;
        literal_gap = literal_gap.max((lit - 2.0 * pc.k(0.0) * pc.f(0.0, u)).abs() / pc.f(0.0, u));
    }
    let corrected = pc.residual(0.0, &grid, true)?;
    outcome(
        identity <= 1e-12 && literal_gap <= 1e-4 && corrected <= 1e-6,
        format!(
            "G o F error {identity:.1e}; literal residual minus 2kF {literal_gap:.1e} (relative); corrected residual {corrected:.1e}"
        ),
    )
}

fn criterion_12() -> Result<Outcome> {
    let mut pass = true;
    let mut notes = Vec::new();
    for problem in registry() {
        let cfg = ExperimentConfig::defaults(problem.id);
        let phi = problem.cocycle(&cfg.params, cfg.driver.kind, cfg.integrator)?;
        let grid = cfg.grid()?;
        let limits = cfg.limit_config();
        let b = cfg.base_point(0)?;
        let r = cfg.boxes.library[0];
        let b0 = cube_on_grid(&grid, r);
        let forward = forward_omega_limit(phi.as_ref(), &b0, &grid, &b, &limits)?;
        let uniform = uniform_omega_limit(phi.as_ref(), &b0, &grid, &b, &limits)?;
        let ok = forward.set.is_subset(&uniform.set.dilate(1))?;
        pass &= ok;
        notes.push(format!("{} {}/{}", problem.id, forward.set.count(), uniform.set.count()));
    }
    outcome(pass, format!("forward/uniform cells: {}", notes.join(", ")))
}

fn main() -> ExitCode {
    let mut results: Vec<(&str, Result<Outcome>)> = Vec::new();
    let record = |name: &'static str, r: Result<Outcome>, results: &mut Vec<(&str, Result<Outcome>)>| {
        let line = match &r {
            Ok(o) => format!("CRITERION {name}: {}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail),
            Err(e) => format!("CRITERION {name}: FAIL: error: {e}"),
        };
        println!("{line}");
        results.push((name, r));
    };
    record("1", criterion_1(), &mut results);
    let cubic = cubic_runs(DriverKind::Wiener);
    match &cubic {
        Ok((runs, worst)) => {
            record("2", criterion_2(runs, *worst), &mut results);
        }
        Err(e) => record("2", Err(e.clone()), &mut results),
    }
    record("3", criterion_3(), &mut results);
    record("4", criterion_4(), &mut results);
    record("5", criterion_5(), &mut results);
    record("6a", criterion_6a(), &mut results);
    record("6b", criterion_6b(), &mut results);
    record("7", criterion_7(), &mut results);
    match &cubic {
        Ok((runs, _)) => {
            let (b, a) = &runs[0];
            record("8", criterion_8((b, a)), &mut results);
            record("9", criterion_9(b, a), &mut results);
        }
        Err(e) => {
            record("8", Err(e.clone()), &mut results);
            record("9", Err(e.clone()), &mut results);
        }
    }
    record("10", criterion_10(), &mut results);
    record("11", criterion_11(), &mut results);
    record("12", criterion_12(), &mut results);

    let failed: Vec<&str> = results
        .iter()
        .filter(|(_, r)| !matches!(r, Ok(o) if o.pass))
        .map(|(n, _)| *n)
        .collect();
    let unexpected: Vec<&str> = failed.iter().copied().filter(|n| !EXPECTED_FAILURES.contains(n)).collect();
    println!(
        "acceptance: {} of {} criteria pass; failing: {:?}; unexpected: {:?}",
        results.len() - failed.len(),
        results.len(),
        failed,
        unexpected
    );
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
