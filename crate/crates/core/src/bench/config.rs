use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use super::registry::{lookup, Amplitude, DriverKind, ProblemId, ProblemParams};
use crate::cocycle::{IntegratorConfig, Scheme};
use crate::driver::{BasePoint, CircleState, OuEvaluator, SamplePath};
use crate::error::{Error, Result};
use crate::setvalued::{symmetric_shifts, BoxSet, Grid, LimitConfig};

/// Noise driver settings; list-valued keys broadcast when of length one.
#[derive(Debug, Clone, PartialEq)]
pub struct DriverSection {
    pub kind: DriverKind,
    pub seeds: Vec<u64>,
    pub taus: Vec<f64>,
    pub angles: Vec<f64>,
    pub dt: f64,
    pub ou_truncation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitSection {
    pub s_max: f64,
    pub shift_count: usize,
    pub t_burn: f64,
    pub t_tail: f64,
    pub stride: f64,
    pub seed_density: usize,
    pub points_per_cell: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxSection {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
    /// Half-widths `r` of the cubes `[−r, r]^d` forming the bounded-set library.
    pub library: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub rate: bool,
    pub conjugacy: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemId,
    pub params: ProblemParams,
    /// Largest admissible reference distance; exceeding it fails the run.
    pub tolerance: Option<f64>,
    pub driver: DriverSection,
    pub integrator: IntegratorConfig<f64>,
    pub limits: LimitSection,
    pub boxes: BoxSection,
    pub output: OutputSection,
}

impl ExperimentConfig {
    /// The shipped configuration of a registry problem.
    pub fn defaults(id: ProblemId) -> Self {
        let base = Self {
            problem: id,
            params: ProblemParams::default(),
            tolerance: None,
            driver: DriverSection {
                kind: DriverKind::Wiener,
                seeds: vec![1],
                taus: vec![0.0],
                angles: vec![0.0],
                dt: 0.01,
                ou_truncation: 20.0,
            },
            integrator: IntegratorConfig::rk4(0.01),
            limits: LimitSection {
                s_max: 20.0,
                shift_count: 41,
                t_burn: 40.0,
                t_tail: 60.0,
                stride: 1.0,
                seed_density: 32,
                points_per_cell: 3,
            },
            boxes: BoxSection {
                lo: -4.0,
                hi: 4.0,
                n: 512,
                library: vec![1.0, 5.0],
            },
            output: OutputSection {
                dir: PathBuf::from("out").join(id.as_str()),
                rate: true,
                conjugacy: true,
            },
        };
        match id {
            ProblemId::Sin => Self {
                tolerance: Some(1e-2),
                driver: DriverSection {
                    kind: DriverKind::Circle,
                    taus: vec![0.0, 1.0, -2.5, 4.0, 7.5],
                    angles: vec![0.0, 2.0, 0.7, 5.5, 3.1],
                    ..base.driver
                },
                boxes: BoxSection { lo: -2.0, hi: 2.0, ..base.boxes },
                ..base
            },
            ProblemId::Cubic => Self {
                tolerance: Some(5e-2),
                integrator: IntegratorConfig::rk4(0.02),
                driver: DriverSection {
                    seeds: vec![1, 2, 3, 4, 5],
                    taus: vec![0.0, 1.0, -2.0, 3.5, -6.0],
                    ..base.driver
                },
                ..base
            },
            ProblemId::Coupled => Self {
                integrator: IntegratorConfig::rk4(0.05),
                limits: LimitSection { stride: 0.5, ..base.limits },
                boxes: BoxSection {
                    lo: -2.5,
                    hi: 2.5,
                    n: 64,
                    library: vec![1.0, 2.0],
                },
                ..base
            },
            ProblemId::OuCounterexample => Self {
                boxes: BoxSection { lo: -6.0, hi: 6.0, n: 256, library: vec![1.0, 5.0] },
                ..base
            },
            ProblemId::StochasticCubic => Self {
                params: ProblemParams { amplitude: Amplitude::Constant(1.0), ..base.params },
                integrator: IntegratorConfig::rk4(0.02),
                boxes: BoxSection { lo: -3.0, hi: 3.0, ..base.boxes },
                ..base
            },
        }
    }

    pub fn limit_config(&self) -> LimitConfig<f64> {
        let l = &self.limits;
        LimitConfig {
            shifts: symmetric_shifts(l.s_max, l.shift_count),
            t_burn: l.t_burn,
            t_tail: l.t_tail,
            stride: l.stride,
            seed_density: l.seed_density,
            points_per_cell: l.points_per_cell,
        }
    }

    pub fn dim(&self) -> usize {
        lookup(self.problem.as_str()).map(|p| p.dim).unwrap_or(1)
    }

    pub fn grid(&self) -> Result<Grid<f64>> {
        Grid::cube(self.dim(), self.boxes.lo, self.boxes.hi, self.boxes.n)
    }

    /// The cubes `[−r, r]^d` of the library.
    pub fn library(&self) -> Result<Vec<BoxSet<f64>>> {
        let d = self.dim();
        self.boxes
            .library
            .iter()
            .map(|&r| {
                let g = Grid::cube(d, -r, r, 1)?;
                Ok(BoxSet::full(g))
            })
            .collect()
    }

    pub fn ou(&self) -> Result<OuEvaluator<f64>> {
        OuEvaluator::new(self.driver.ou_truncation)
    }

    pub fn base_count(&self) -> usize {
        let d = &self.driver;
        match d.kind {
            DriverKind::Circle => d.taus.len().max(d.angles.len()),
            DriverKind::Wiener => d.taus.len().max(d.seeds.len()),
        }
    }

    /// Time window every Wiener path must cover for base time `tau`, leaving
    /// `margin` on both sides for extra shifts.
    pub fn path_window(&self, tau: f64, margin: f64) -> (f64, f64) {
        let l = &self.limits;
        let lo = -(tau.abs() + l.s_max + self.driver.ou_truncation + margin);
        let hi = tau.abs() + l.s_max + l.t_burn + l.t_tail + margin;
        let dt = self.driver.dt;
        ((lo / dt).floor() * dt, (hi / dt).ceil() * dt)
    }

    /// The `j`-th base point together with a label for file names and reports.
    pub fn base_point(&self, j: usize) -> Result<BasePoint<f64>> {
        let d = &self.driver;
        let pick = |v: &[f64]| if v.len() == 1 { v[0] } else { v[j] };
        let tau = pick(&d.taus);
        match d.kind {
            DriverKind::Circle => Ok(BasePoint::circle(tau, pick(&d.angles))),
            DriverKind::Wiener => {
                let seed = if d.seeds.len() == 1 { d.seeds[0] } else { d.seeds[j] };
                let (lo, hi) = self.path_window(tau, 10.0);
                Ok(BasePoint::wiener(tau, SamplePath::wiener(seed, lo, hi, d.dt)?))
            }
        }
    }

    pub fn circle_state(&self, j: usize) -> CircleState<f64> {
        let a = &self.driver.angles;
        CircleState::new(if a.len() == 1 { a[0] } else { a[j] })
    }

    pub fn validate(&self) -> Result<()> {
        let p = lookup(self.problem.as_str())?;
        if !p.supports(self.driver.kind) {
            return Err(Error::Config(format!("{} does not run on the {} driver", p.id, self.driver.kind)));
        }
        let d = &self.driver;
        let lens = match d.kind {
            DriverKind::Circle => [d.taus.len(), d.angles.len()],
            DriverKind::Wiener => [d.taus.len(), d.seeds.len()],
        };
        let n = self.base_count();
        if lens.iter().any(|&l| l == 0 || (l != 1 && l != n)) {
            return Err(Error::Config("driver lists must have length 1 or a common length".into()));
        }
        if !(d.dt > 0.0) {
            return Err(Error::Config("driver dt must be positive".into()));
        }
        self.integrator.validate()?;
        if self.integrator.scheme != Scheme::Rk4 {
            return Err(Error::Config("set-valued runs integrate with rk4".into()));
        }
        self.limit_config().validate()?;
        self.integrator.steps(self.limits.stride)?;
        self.grid()?;
        if self.boxes.library.is_empty() || self.boxes.library.iter().any(|r| !(*r > 0.0)) {
            return Err(Error::Config("library radii must be positive".into()));
        }
        self.ou()?;
        Ok(())
    }

    /// Canonical text form. Parsing it yields the same configuration apart
    /// from the output directory, which is not part of the experiment.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        let _ = writeln!(s, "[problem]");
        let _ = writeln!(s, "id = {}", self.problem);
        let amp = match self.params.amplitude {
            Amplitude::Bounded => "bounded".to_string(),
            Amplitude::Unbounded => "unbounded".to_string(),
            Amplitude::Constant(a) => a.to_string(),
        };
        let _ = writeln!(s, "amplitude = {amp}");
        let _ = writeln!(s, "k = {}", self.params.k);
        let _ = writeln!(s, "gamma = {}", self.params.gamma);
        if let Some(t) = self.tolerance {
            let _ = writeln!(s, "tolerance = {t}");
        }
        let d = &self.driver;
        let _ = writeln!(s, "\n[driver]");
        let _ = writeln!(s, "kind = {}", d.kind);
        let seeds: Vec<String> = d.seeds.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(s, "seeds = {}", seeds.join(", "));
        let _ = writeln!(s, "taus = {}", list(&d.taus));
        let _ = writeln!(s, "angles = {}", list(&d.angles));
        let _ = writeln!(s, "dt = {}", d.dt);
        let _ = writeln!(s, "ou_truncation = {}", d.ou_truncation);
        let _ = writeln!(s, "\n[integrator]");
        let _ = writeln!(s, "scheme = {}", self.integrator.scheme);
        let _ = writeln!(s, "step = {}", self.integrator.step);
        let _ = writeln!(s, "blowup = {}", self.integrator.blowup);
        let l = &self.limits;
        let _ = writeln!(s, "\n[limits]");
        let _ = writeln!(s, "s_max = {}", l.s_max);
        let _ = writeln!(s, "shift_count = {}", l.shift_count);
        let _ = writeln!(s, "t_burn = {}", l.t_burn);
        let _ = writeln!(s, "t_tail = {}", l.t_tail);
        let _ = writeln!(s, "stride = {}", l.stride);
        let _ = writeln!(s, "seed_density = {}", l.seed_density);
        let _ = writeln!(s, "points_per_cell = {}", l.points_per_cell);
        let b = &self.boxes;
        let _ = writeln!(s, "\n[boxes]");
        let _ = writeln!(s, "lo = {}", b.lo);
        let _ = writeln!(s, "hi = {}", b.hi);
        let _ = writeln!(s, "n = {}", b.n);
        let _ = writeln!(s, "library = {}", list(&b.library));
        let _ = writeln!(s, "\n[output]");
        let _ = writeln!(s, "rate = {}", self.output.rate);
        let _ = writeln!(s, "conjugacy = {}", self.output.conjugacy);
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let entries = scan(text)?;
        let (id_line, id) = entries
            .get(&("problem", "id"))
            .ok_or_else(|| Error::Config("missing `id` in [problem]".into()))?;
        let id: ProblemId = id.parse().map_err(|e| match e {
            Error::UnknownProblem(_) => e,
            other => Error::Parse { line: *id_line, msg: other.to_string() },
        })?;
        let mut cfg = Self::defaults(id);
        for (&(section, key), (line, value)) in &entries {
            cfg.set(section, key, value)
                .map_err(|msg| Error::Parse { line: *line, msg })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, section: &str, key: &str, v: &str) -> std::result::Result<(), String> {
        match (section, key) {
            ("problem", "id") => {}
            ("problem", "amplitude") => {
                self.params.amplitude = match v {
                    "bounded" => Amplitude::Bounded,
                    "unbounded" => Amplitude::Unbounded,
                    _ => Amplitude::Constant(num(v)?),
                }
            }
            ("problem", "k") => self.params.k = num(v)?,
            ("problem", "gamma") => self.params.gamma = num(v)?,
            ("problem", "tolerance") => self.tolerance = Some(num(v)?),
            ("driver", "kind") => self.driver.kind = v.parse().map_err(|e: Error| e.to_string())?,
            ("driver", "seeds") => self.driver.seeds = nums(v)?,
            ("driver", "taus") => self.driver.taus = nums(v)?,
            ("driver", "angles") => self.driver.angles = nums(v)?,
            ("driver", "dt") => self.driver.dt = num(v)?,
            ("driver", "ou_truncation") => self.driver.ou_truncation = num(v)?,
            ("integrator", "scheme") => {
                self.integrator.scheme = v.parse().map_err(|e: Error| e.to_string())?
            }
            ("integrator", "step") => self.integrator.step = num(v)?,
            ("integrator", "blowup") => self.integrator.blowup = num(v)?,
            ("limits", "s_max") => self.limits.s_max = num(v)?,
            ("limits", "shift_count") => self.limits.shift_count = num(v)?,
            ("limits", "t_burn") => self.limits.t_burn = num(v)?,
            ("limits", "t_tail") => self.limits.t_tail = num(v)?,
            ("limits", "stride") => self.limits.stride = num(v)?,
            ("limits", "seed_density") => self.limits.seed_density = num(v)?,
            ("limits", "points_per_cell") => self.limits.points_per_cell = num(v)?,
            ("boxes", "lo") => self.boxes.lo = num(v)?,
            ("boxes", "hi") => self.boxes.hi = num(v)?,
            ("boxes", "n") => self.boxes.n = num(v)?,
            ("boxes", "library") => self.boxes.library = nums(v)?,
            ("output", "dir") => self.output.dir = PathBuf::from(v),
            ("output", "rate") => self.output.rate = num(v)?,
            ("output", "conjugacy") => self.output.conjugacy = num(v)?,
            _ => return Err(format!("unknown key `{key}` in [{section}]")),
        }
        Ok(())
    }
}

fn num<X: FromStr>(v: &str) -> std::result::Result<X, String> {
    v.parse().map_err(|_| format!("cannot parse `{v}`"))
}

fn nums<X: FromStr>(v: &str) -> std::result::Result<Vec<X>, String> {
    v.split(',').map(|p| num(p.trim())).collect()
}

const SECTIONS: [&str; 6] = ["problem", "driver", "integrator", "limits", "boxes", "output"];

type Entries<'a> = BTreeMap<(&'static str, &'a str), (usize, &'a str)>;

/// Splits the file into `(section, key) → (line, value)`.
fn scan(text: &str) -> Result<Entries<'_>> {
    let mut out = BTreeMap::new();
    let mut section: Option<&'static str> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(name) = body.strip_prefix('[').and_then(|b| b.strip_suffix(']')) {
            section = Some(
                SECTIONS
                    .into_iter()
                    .find(|s| *s == name.trim())
                    .ok_or_else(|| Error::Parse { line, msg: format!("unknown section [{name}]") })?,
            );
            continue;
        }
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| Error::Parse { line, msg: "expected `key = value`".into() })?;
        let sec = section.ok_or_else(|| Error::Parse { line, msg: "key outside any section".into() })?;
        if out.insert((sec, key.trim()), (line, value.trim())).is_some() {
            return Err(Error::Parse { line, msg: format!("duplicate key `{}`", key.trim()) });
        }
    }
    Ok(out)
}
