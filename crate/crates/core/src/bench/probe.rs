use std::io::Write;

use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::driver::{OuEvaluator, SamplePath};
use crate::error::{Error, Result};

/// Windowed suprema of `|z(θ_s ω)|` for one seed.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRow {
    pub seed: u64,
    pub sups: Vec<f64>,
}

impl ProbeRow {
    pub fn strictly_increasing(&self) -> bool {
        self.sups.windows(2).all(|w| w[1] > w[0])
    }
}

/// One-sample Kolmogorov–Smirnov statistic and its asymptotic p-value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OuProbe {
    pub windows: Vec<f64>,
    pub rows: Vec<ProbeRow>,
    /// Fraction of seeds whose suprema increase strictly with `S`.
    pub fraction_increasing: f64,
    /// `z(ω)` for every seed, tested against `N(0, 1/2)`.
    pub ks: KsResult,
    pub variance: f64,
}

/// `sup_{|s| ≤ S} |z(θ_s ω)|` over the path nodes, for every `S`.
pub fn windowed_sups(p: &SamplePath<f64>, windows: &[f64], ev: &OuEvaluator<f64>) -> Result<Vec<f64>> {
    let s_max = windows.iter().copied().fold(0.0, f64::max);
    p.require(-s_max - ev.t_trunc(), s_max)?;
    let series = p.ou_series(ev)?;
    let i0 = p.index_of(-s_max)?;
    let i1 = p.index_of(s_max)?;
    let eps = p.dt() * 1e-6;
    let mut sups = vec![0.0f64; windows.len()];
    for i in i0..=i1 {
        let t = p.time_of(i).abs();
        let z = series.at_node(i).expect("series covers the window").abs();
        for (m, &s) in sups.iter_mut().zip(windows) {
            if t <= s + eps {
                *m = m.max(z);
            }
        }
    }
    Ok(sups)
}

/// Kolmogorov distribution tail `P(K > λ)`.
fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * lambda * lambda).exp();
        sum += if k as u64 % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// KS test of `samples` against `N(mean, sd²)`.
pub fn ks_normal(samples: &[f64], mean: f64, sd: f64) -> Result<KsResult> {
    if samples.is_empty() {
        return Err(Error::EmptySet("KS sample"));
    }
    let dist = Normal::new(mean, sd).map_err(|e| Error::Domain(e.to_string()))?;
    let mut x = samples.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    let d = x
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = dist.cdf(v);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    let sq = n.sqrt();
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_tail((sq + 0.12 + 0.11 / sq) * d),
        n: x.len(),
    })
}

/// Two-sample KS statistic `sup |F_a − F_b|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

/// `z(ω)` for each seed, each from its own short path on `[−t_trunc − 1, 1]`.
pub fn stationary_samples(seeds: impl IntoParallelIterator<Item = u64>, dt: f64, ev: &OuEvaluator<f64>) -> Result<Vec<f64>> {
    let lo = -((ev.t_trunc() + 1.0) / dt).ceil() * dt;
    seeds
        .into_par_iter()
        .map(|s| {
            let p = SamplePath::wiener(s, lo, 1.0, dt)?;
            Ok(ev.eval(&p, 0.0)?.value)
        })
        .collect()
}

pub fn sample_variance(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
}

/// Evidence that the OU equation has no uniform attractor: windowed suprema
/// of `|z|` keep growing with the window, and `z(ω)` is Gaussian.
pub fn mua_nonexistence_probe(seeds: &[u64], windows: &[f64], dt: f64, ev: &OuEvaluator<f64>) -> Result<OuProbe> {
    if windows.is_empty() || windows.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("window list must be nonempty and increasing".into()));
    }
    if seeds.is_empty() {
        return Err(Error::EmptySet("seed list"));
    }
    let s_max = windows[windows.len() - 1];
    let lo = -((s_max + ev.t_trunc() + 1.0) / dt).ceil() * dt;
    let hi = ((s_max + 1.0) / dt).ceil() * dt;
    let rows: Vec<(ProbeRow, f64)> = seeds
        .par_iter()
        .map(|&seed| {
            let p = SamplePath::wiener(seed, lo, hi, dt)?;
            let sups = windowed_sups(&p, windows, ev)?;
            let z0 = p.ou_at(ev, 0.0)?;
            Ok((ProbeRow { seed, sups }, z0))
        })
        .collect::<Result<_>>()?;
    let (rows, z): (Vec<ProbeRow>, Vec<f64>) = rows.into_iter().unzip();
    let up = rows.iter().filter(|r| r.strictly_increasing()).count();
    Ok(OuProbe {
        windows: windows.to_vec(),
        fraction_increasing: up as f64 / rows.len() as f64,
        ks: ks_normal(&z, 0.0, 0.5f64.sqrt())?,
        variance: sample_variance(&z),
        rows,
    })
}

impl OuProbe {
    /// CSV `seed,S=…,…` with one row per seed.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let head: Vec<String> = self.windows.iter().map(|s| format!("S={s}")).collect();
        writeln!(w, "seed,{}", head.join(","))?;
        for r in &self.rows {
            let vals: Vec<String> = r.sups.iter().map(|v| v.to_string()).collect();
            writeln!(w, "{},{}", r.seed, vals.join(","))?;
        }
        Ok(())
    }
}
