use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::ExperimentConfig;
use super::registry::lookup;
use crate::cohomology::{verify_conjugacy, ConvergenceReport};
use crate::driver::SamplePath;
use crate::error::{Error, Result};
use crate::setvalued::{attraction_rate, estimate_mjua, hausdorff_dist, write_rate_csv, BoxSet, Grid, LimitEstimate, RateRow};

/// Outcome at one base point.
#[derive(Debug, Clone)]
pub struct BaseEstimate {
    pub estimate: LimitEstimate<f64>,
    /// Hausdorff distance to the closed-form attractor, when there is one.
    pub distance: Option<f64>,
    /// Attraction towards the reference (or the estimate itself without one).
    pub rate: Vec<RateRow<f64>>,
}

#[derive(Debug, Clone)]
pub struct BaseResult {
    pub index: usize,
    pub tau: f64,
    pub outcome: Result<BaseEstimate>,
}

#[derive(Debug, Clone)]
pub struct ResultRecord {
    pub problem: String,
    pub bases: Vec<BaseResult>,
    /// Largest reference distance over the base points.
    pub distance: Option<f64>,
    pub conjugacy: Option<ConvergenceReport<f64>>,
    pub runtime_ms: u128,
    pub config_hash: String,
    pub echo: String,
}

#[derive(Serialize)]
struct Summary<'a> {
    problem: &'a str,
    distance: Option<f64>,
    runtime_ms: u128,
    config_hash: &'a str,
}

/// Hex SHA-256 of the canonical config text.
pub fn config_hash(echo: &str) -> String {
    Sha256::digest(echo.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// Output cells whose centers lie in the cube `[−r, r]^d`.
pub fn cube_on_grid(grid: &Grid<f64>, r: f64) -> BoxSet<f64> {
    let d = grid.dim();
    let mut set = BoxSet::empty(grid.clone());
    for idx in 0..grid.cells() {
        if grid.center(idx)[..d].iter().all(|x| x.abs() <= r) {
            set.insert_cell(idx);
        }
    }
    set
}

fn run_base(cfg: &ExperimentConfig, j: usize) -> Result<BaseEstimate> {
    let problem = lookup(cfg.problem.as_str())?;
    let phi = problem.cocycle(&cfg.params, cfg.driver.kind, cfg.integrator)?;
    let grid = cfg.grid()?;
    let limits = cfg.limit_config();
    let b = cfg.base_point(j)?;
    let library = cfg.library()?;
    let estimate = estimate_mjua(phi.as_ref(), &library, &grid, &b, &limits)?;
    let reference = problem.reference(&cfg.params, &b, &grid).transpose()?;
    let distance = match &reference {
        Some(r) => Some(hausdorff_dist(&estimate.set, r)?),
        None => None,
    };
    let rate = if cfg.output.rate {
        let r_max = cfg.boxes.library.iter().copied().fold(0.0, f64::max);
        let b0 = cube_on_grid(&grid, r_max);
        let target = reference.as_ref().unwrap_or(&estimate.set);
        if b0.is_empty() {
            Vec::new()
        } else {
            attraction_rate(phi.as_ref(), &b0, target, &b, &limits)?
        }
    } else {
        Vec::new()
    };
    Ok(BaseEstimate { estimate, distance, rate })
}

/// Conjugacy sweep at `Δt = 2^{−6} … 2^{−10}` over `[0, 1]` from `x₀ = 0.5`.
pub fn conjugacy_sweep(cfg: &ExperimentConfig) -> Result<ConvergenceReport<f64>> {
    let problem = lookup(cfg.problem.as_str())?;
    let sde = problem.sde(&cfg.params)?;
    let tau = cfg.driver.taus[0];
    let dt = 2f64.powi(-12);
    let lo = -((tau.abs() + cfg.driver.ou_truncation + 5.0) / dt).ceil() * dt;
    let p = SamplePath::wiener(cfg.driver.seeds[0], lo, 4.0, dt)?;
    let dts: Vec<f64> = (6..=10).map(|k| 2f64.powi(-k)).collect();
    verify_conjugacy(&sde, &p, tau, &[0.5], 1.0, &dts)
}

/// Runs every base point, then the conjugacy check for stochastic problems.
/// Numerical failures are kept per base point instead of aborting the batch.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ResultRecord> {
    cfg.validate()?;
    let start = Instant::now();
    let problem = lookup(cfg.problem.as_str())?;
    let bases: Vec<BaseResult> = (0..cfg.base_count())
        .map(|j| BaseResult {
            index: j,
            tau: if cfg.driver.taus.len() == 1 { cfg.driver.taus[0] } else { cfg.driver.taus[j] },
            outcome: run_base(cfg, j),
        })
        .collect();
    let conjugacy = if problem.stochastic && cfg.output.conjugacy && problem.sde(&cfg.params).is_ok() {
        Some(conjugacy_sweep(cfg)?)
    } else {
        None
    };
    let distance = bases
        .iter()
        .filter_map(|b| b.outcome.as_ref().ok().and_then(|e| e.distance))
        .reduce(f64::max);
    let echo = cfg.echo();
    Ok(ResultRecord {
        problem: problem.id.to_string(),
        bases,
        distance,
        conjugacy,
        runtime_ms: start.elapsed().as_millis(),
        config_hash: config_hash(&echo),
        echo,
    })
}

impl ResultRecord {
    /// First recorded failure, or a tolerance violation.
    pub fn status(&self, tolerance: Option<f64>) -> Result<()> {
        if let Some(e) = self.bases.iter().find_map(|b| b.outcome.as_ref().err()) {
            return Err(e.clone());
        }
        if let (Some(limit), Some(d)) = (tolerance, self.distance) {
            if d > limit {
                return Err(Error::Tolerance { what: "reference distance".into(), value: d, limit });
            }
        }
        Ok(())
    }

    /// Writes the dumps, tables, summary and config echo into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let create = |name: &str| -> Result<BufWriter<File>> { Ok(BufWriter::new(File::create(dir.join(name))?)) };
        let mut table = create("bases.csv")?;
        writeln!(table, "index,tau,distance,cells,nested,shrink,error")?;
        for b in &self.bases {
            match &b.outcome {
                Ok(e) => {
                    let dist = e.distance.map(|d| d.to_string()).unwrap_or_default();
                    writeln!(
                        table,
                        "{},{},{},{},{},{},",
                        b.index,
                        b.tau,
                        dist,
                        e.estimate.set.count(),
                        e.estimate.nested,
                        e.estimate.shrink
                    )?;
                    e.estimate.set.write_dump(create(&format!("mjua_{}.box", b.index))?)?;
                    if !e.rate.is_empty() {
                        write_rate_csv(&e.rate, create(&format!("rate_{}.csv", b.index))?)?;
                    }
                }
                Err(err) => writeln!(table, "{},{},,,,,\"{}\"", b.index, b.tau, err.to_string().replace('"', "'"))?,
            }
        }
        table.flush()?;
        if let Some(c) = &self.conjugacy {
            let mut w = create("conjugacy.csv")?;
            c.write_csv(&mut w)?;
            w.flush()?;
        }
        let mut echo = create("config.echo")?;
        echo.write_all(self.echo.as_bytes())?;
        echo.flush()?;
        let summary = Summary {
            problem: &self.problem,
            distance: self.distance,
            runtime_ms: self.runtime_ms,
            config_hash: &self.config_hash,
        };
        let text = serde_json::to_string_pretty(&summary).map_err(|e| Error::Io(e.to_string()))?;
        fs::write(dir.join("summary.json"), text + "\n")?;
        Ok(())
    }
}
