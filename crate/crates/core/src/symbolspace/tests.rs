use std::f64::consts::PI;

use proptest::prelude::*;

use super::*;
use crate::cocycle::{make_nrds, Channel, Cocycle, FieldSpec, IntegratorConfig};
use crate::driver::{BasePoint, OuEvaluator, SamplePath};
use crate::setvalued::{BoxSet, Grid, LimitConfig};

fn sym(f: impl Fn(f64) -> f64, dt: f64, w: f64) -> SymbolFunction<f64> {
    SymbolFunction::from_fn(f, dt, -w, w, 0.0).unwrap()
}

fn forced_field() -> FieldSpec<f64> {
    FieldSpec::new(1, vec![Channel::process("beta", |t: f64, z: f64| z * (-0.1 * t * t).exp())], |_, ch, u, du| {
        du[0] = -u[0] + ch[0]
    })
    .unwrap()
}

fn wiener_base(seed: u64, tau: f64) -> BasePoint<f64> {
    BasePoint::wiener(tau, SamplePath::wiener(seed, -60.0, 60.0, 0.01).unwrap())
}

#[test]
fn constant_symbol_has_singleton_net() {
    let b = sym(|_| 0.7, 0.01, 30.0);
    let shifts: Vec<f64> = (-10..=10).map(|k| k as f64).collect();
    let net = hull_net(&b, &shifts, 0.01, &HullOptions::default()).unwrap();
    assert_eq!(net.net.len(), 1);
    assert_eq!(net.radius, 0.0);
}

#[test]
fn sine_is_periodic_in_the_metric() {
    let dt = PI / 500.0;
    let samples: Vec<f64> = (-8000..=8000).map(|k| (k as f64 * dt).sin()).collect();
    let b = SymbolFunction::from_samples(samples, dt, 8000, 0.0).unwrap();
    let t = b.translate(1000.0 * dt).unwrap();
    assert!(co_metric(&b, &t, DEFAULT_TRUNCATION).unwrap() < 1e-12);
    let half = b.translate(500.0 * dt).unwrap();
    assert!(co_metric(&b, &half, DEFAULT_TRUNCATION).unwrap() > 0.5);
}

#[test]
fn net_covers_every_translate() {
    let b = sym(|t| (t).sin() + 0.5 * (2.3 * t).cos(), 0.01, 40.0);
    let shifts: Vec<f64> = (-300..=300).map(|k| k as f64 * 0.1).collect();
    let eps = 0.05;
    let net = hull_net(&b, &shifts, eps, &HullOptions::default()).unwrap();
    assert!(net.net.len() > 1);
    assert!(net.radius <= eps);
    assert_eq!(net.cover_radius(&b, &shifts).unwrap(), net.radius);
    for (i, x) in net.net.iter().enumerate() {
        for y in &net.net[..i] {
            assert!(co_metric(x, y, DEFAULT_TRUNCATION).unwrap() > eps);
        }
    }
}

#[test]
fn translated_orbit_gives_nearby_net() {
    let b = sym(|t| (0.7 * t).sin() * (0.3 * t).cos(), 0.01, 60.0);
    let eps = 0.05;
    let shifts: Vec<f64> = (-200..=200).map(|k| k as f64 * 0.1).collect();
    let moved = b.translate(3.0).unwrap();
    let n0 = hull_net(&b, &shifts, eps, &HullOptions::default()).unwrap();
    let n1 = hull_net(&moved, &shifts, eps, &HullOptions::default()).unwrap();
    // the translated shift grid samples [−17, 23] instead of [−20, 20]; both
    // sample the same periodic-in-law hull closely enough
    assert!(n0.net_distance(&n1).unwrap() <= 2.0 * eps);
}

#[test]
fn closure_point_added_for_decaying_orbit() {
    let b = sym(|t| (-t * t).exp(), 0.01, 40.0);
    let shifts: Vec<f64> = (-50..=50).map(|k| k as f64 * 0.1).collect();
    let opts = HullOptions { closure_threshold: Some(1e-6), ..HullOptions::default() };
    let net = hull_net(&b, &shifts, 0.03, &opts).unwrap();
    assert!(net.has_closure);
    let last = net.net.last().unwrap();
    assert_eq!(last.node(0), Some(0.0));
    let off = hull_net(&b, &shifts, 0.03, &HullOptions::default()).unwrap();
    assert!(!off.has_closure);
    assert_eq!(off.net.len() + 1, net.net.len());
}

#[test]
fn hull_rejects_short_window() {
    let b = sym(f64::sin, 0.01, 12.0);
    assert!(hull_net(&b, &[0.0, 5.0], 0.1, &HullOptions::default()).is_err());
    assert!(hull_net(&b, &[0.0], 0.0, &HullOptions::default()).is_err());
}

#[test]
fn hull_dump_layout() {
    let b = sym(|_| 1.0, 0.5, 10.0);
    let net = hull_net(&b, &[0.0], 0.1, &HullOptions::default()).unwrap();
    let mut out = Vec::new();
    net.write_dump(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "0.1");
    assert_eq!(lines[1], "10");
    assert_eq!(lines[2], "0.5 0 -10 41");
    assert_eq!(lines.len(), 3 + 41);
}

#[test]
fn holder_of_constant() {
    let h = holder_diagnostic(&sym(|_| -2.0, 0.001, 2.0), 1.0).unwrap();
    assert_eq!(h.alpha, 1.0);
    assert_eq!(h.ell, 0.0);
    assert_eq!(h.sup_abs, 2.0);
}

#[test]
fn holder_of_square_root() {
    let h = holder_diagnostic(&sym(|t| t.abs().sqrt(), 0.0005, 1.0), 1.0).unwrap();
    assert!((h.alpha - 0.5).abs() <= 0.05, "alpha {}", h.alpha);
    assert!((h.ell - 1.0).abs() < 0.05, "ell {}", h.ell);
}

#[test]
fn holder_of_lipschitz_function() {
    let h = holder_diagnostic(&sym(|t| 3.0 * t, 0.001, 2.0), 1.0).unwrap();
    assert!((h.alpha - 1.0).abs() < 1e-9);
    assert!((h.ell - 3.0).abs() < 1e-6);
}

#[test]
fn holder_window_must_fit() {
    assert!(holder_diagnostic(&sym(f64::sin, 0.01, 1.0), 2.0).is_err());
}

#[test]
fn net_is_equicontinuous() {
    let ev = OuEvaluator::default();
    let field = forced_field();
    let b = wiener_base(5, 0.0);
    let orbit = SymbolFunction::orbit(&field, &b, 25.0, 0.01, &ev).unwrap();
    let shifts: Vec<f64> = (-50..=50).map(|k| k as f64 * 0.1).collect();
    let net = hull_net(&orbit, &shifts, 0.02, &HullOptions::default()).unwrap();
    let m = 2.0;
    for s in &net.net {
        let h = holder_diagnostic(s, m).unwrap();
        for lag in dyadic_lags(s, m, DEFAULT_MAX_LAG) {
            let delta = lag as f64 * s.dt();
            assert!(modulus(s, m, lag) <= h.ell * delta.powf(h.alpha) * 1.25 + 1e-15);
        }
    }
}

#[test]
fn skew_step_at_zero_is_identity() {
    let s = sym(f64::cos, 0.005, 10.0);
    let field = FieldSpec::new(1, vec![Channel::time("s", |t: f64| t)], |_, ch, u, du| du[0] = -u[0] + ch[0]).unwrap();
    let (x, s2) = skew_step(&field, &[1.25], &s, 0.0, &IntegratorConfig::rk4(0.01)).unwrap();
    assert_eq!(x, vec![1.25]);
    assert_eq!(s2.tau_sigma(), s.tau_sigma());
    assert_eq!(s2.node(7), s.node(7));
}

#[test]
fn skew_product_semigroup_law() {
    let h = 0.01;
    let s = sym(|t| (2.0 * t).sin(), h / 2.0, 20.0);
    let field = FieldSpec::new(1, vec![Channel::time("s", |t: f64| t)], |_, ch, u, du| {
        du[0] = u[0] - u[0].powi(3) + ch[0]
    })
    .unwrap();
    let cfg = IntegratorConfig::rk4(h);
    let (t1, t2) = (1.5, 2.25);
    let (xa, sa) = skew_step(&field, &[0.3], &s, t1, &cfg).unwrap();
    let (xb, sb) = skew_step(&field, &xa, &sa, t2, &cfg).unwrap();
    let (xc, sc) = skew_step(&field, &[0.3], &s, t1 + t2, &cfg).unwrap();
    assert!((xb[0] - xc[0]).abs() <= 10.0 * h.powi(4) * (t1 + t2));
    assert_eq!(sb.tau_sigma(), sc.tau_sigma());
    for k in -100..100 {
        assert_eq!(sb.node(k), sc.node(k));
    }
}

#[test]
fn symbol_flow_matches_cocycle() {
    let ev = OuEvaluator::default();
    let field = forced_field();
    let h = 0.01;
    let cfg = IntegratorConfig::rk4(h);
    let phi = make_nrds(field.clone(), cfg).unwrap();
    for tau in [-3.0, 0.0, 2.5] {
        let b = wiener_base(9, tau);
        let sigma = SymbolFunction::orbit(&field, &b, 6.0, h / 2.0, &ev).unwrap();
        assert_eq!(sigma.tau_sigma(), tau);
        let psi = symbol_trajectory(&field, &[0.4], &sigma, 5.0, &cfg).unwrap();
        let nrds = phi.trajectory(5.0, &b, &[0.4]).unwrap();
        for k in 0..psi.len() {
            let t = psi.times[k];
            let dev = (psi.state(k)[0] - nrds.state(k)[0]).abs();
            assert!(dev <= 10.0 * h.powi(4) * t + 1e-15, "τ {tau} t {t} dev {dev}");
        }
    }
}

fn contraction() -> impl Cocycle<f64> {
    make_nrds(FieldSpec::<f64>::autonomous(1, |u, du| du[0] = -u[0]).unwrap(), IntegratorConfig::rk4(0.05)).unwrap()
}

fn probe_cfg() -> LimitConfig<f64> {
    LimitConfig {
        shifts: vec![-2.0, 0.0, 2.0],
        t_burn: 2.0,
        t_tail: 5.0,
        ..LimitConfig::default()
    }
}

#[test]
fn contraction_is_stable_for_every_delta() {
    let grid = Grid::cube(1, -2.0, 2.0, 65).unwrap();
    let a = BoxSet::from_points(grid, [&[0.0][..]]);
    let deltas = [0.05, 0.1, 0.25, 0.45];
    let r = stability_probe(&contraction(), &a, 0.5, &deltas, &BasePoint::circle(0.0, 0.0), &probe_cfg()).unwrap();
    assert!(r.rows.iter().all(|row| row.pass()));
    assert_eq!(r.best(), Some(0.45));
}

#[test]
fn wrong_attractor_reports_escape() {
    let grid = Grid::cube(1, -2.0, 2.0, 65).unwrap();
    let a = BoxSet::from_points(grid, [&[1.5][..]]);
    let r = stability_probe(&contraction(), &a, 0.5, &[0.1, 0.25], &BasePoint::circle(0.0, 0.0), &probe_cfg()).unwrap();
    assert_eq!(r.best(), None);
    let e = r.rows[0].escape.as_ref().unwrap();
    assert!(e.t > 0.0 && e.dist > 0.5);
    let mut out = Vec::new();
    r.write_csv(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert!(text.starts_with("delta,pass,escape_s,escape_t\n0.1,false,"));
}

#[test]
fn probe_rejects_bad_candidates() {
    let grid = Grid::cube(1, -2.0, 2.0, 65).unwrap();
    let a = BoxSet::from_points(grid, [&[0.0][..]]);
    let b = BasePoint::circle(0.0, 0.0);
    let phi = contraction();
    assert!(stability_probe(&phi, &a, 0.5, &[], &b, &probe_cfg()).is_err());
    assert!(stability_probe(&phi, &a, 0.5, &[0.6], &b, &probe_cfg()).is_err());
    assert!(stability_probe(&phi, &a, 0.5, &[0.2, 0.1], &b, &probe_cfg()).is_err());
}

#[test]
fn seeds_stay_within_delta() {
    let grid = Grid::<f64>::cube(2, -1.0, 1.0, 16).unwrap();
    let a = BoxSet::covering_box(grid, &[-0.2, -0.2], &[0.1, 0.3]).unwrap();
    let seeds = delta_seeds(&a, 0.3);
    assert!(seeds.len() / 2 > a.count());
    for x in seeds.chunks(2) {
        let near = a.cells().any(|i| {
            let c = a.grid().center(i);
            (x[0] - c[0]).abs() <= 0.3 + 1e-12 && (x[1] - c[1]).abs() <= 0.3 + 1e-12
        });
        assert!(near);
    }
}

proptest! {
    #[test]
    fn metric_axioms(a in -2.0f64..2.0, b in -2.0f64..2.0, c in -2.0f64..2.0, w in 0.1f64..3.0) {
        let f = sym(|t| a * (w * t).sin(), 0.05, 12.0);
        let g = sym(|t| b * (t).cos(), 0.05, 12.0);
        let h = sym(|t| c * t.tanh(), 0.05, 12.0);
        let fg = co_metric(&f, &g, DEFAULT_TRUNCATION).unwrap();
        let gh = co_metric(&g, &h, DEFAULT_TRUNCATION).unwrap();
        let fh = co_metric(&f, &h, DEFAULT_TRUNCATION).unwrap();
        prop_assert!((0.0..1.0).contains(&fg));
        prop_assert_eq!(fg, co_metric(&g, &f, DEFAULT_TRUNCATION).unwrap());
        prop_assert!(fh <= fg + gh + 1e-15);
        prop_assert_eq!(co_metric(&f, &f, DEFAULT_TRUNCATION).unwrap(), 0.0);
    }
}

#[test]
fn holder_of_ou_orbits() {
    // a short Monte Carlo run; the acceptance suite uses 100 seeds
    let ev = OuEvaluator::default();
    let field = FieldSpec::new(1, vec![Channel::along("z", |z: f64| z)], |_, ch, _, du| du[0] = ch[0]).unwrap();
    let mut inside = 0;
    for seed in 0..20 {
        let b = BasePoint::wiener(0.0, SamplePath::wiener(seed, -75.0, 75.0, 0.01).unwrap());
        let orbit = SymbolFunction::orbit(&field, &b, 50.0, 0.01, &ev).unwrap();
        let h = holder_diagnostic(&orbit, 50.0).unwrap();
        assert!(h.alpha > 0.3 && h.alpha < 0.6, "alpha {}", h.alpha);
        inside += (0.4..=0.5).contains(&h.alpha) as usize;
    }
    assert!(inside >= 16);
}
