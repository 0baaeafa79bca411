use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::cocycle::{make_nrds, Channel, Cocycle, Conjugated, FieldSpec, IntegratorConfig, SdeSpec, StateTransform};
use crate::cohomology::{conjugated_cocycle, KappaSpec};
use crate::driver::{BasePoint, OuEvaluator};
use crate::error::{Error, Result};
use crate::setvalued::{BoxSet, Grid};

/// Which noise driver a base point carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriverKind {
    Circle,
    Wiener,
}

impl fmt::Display for DriverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DriverKind::Circle => "circle",
            DriverKind::Wiener => "wiener",
        })
    }
}

impl FromStr for DriverKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "circle" => Ok(DriverKind::Circle),
            "wiener" => Ok(DriverKind::Wiener),
            _ => Err(Error::Config(format!("unknown driver kind `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemId {
    Sin,
    Cubic,
    Coupled,
    OuCounterexample,
    StochasticCubic,
}

impl ProblemId {
    pub const ALL: [ProblemId; 5] = [
        ProblemId::Sin,
        ProblemId::Cubic,
        ProblemId::Coupled,
        ProblemId::OuCounterexample,
        ProblemId::StochasticCubic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProblemId::Sin => "sin_example",
            ProblemId::Cubic => "cubic_example",
            ProblemId::Coupled => "coupled_example",
            ProblemId::OuCounterexample => "ou_counterexample",
            ProblemId::StochasticCubic => "stochastic_cubic",
        }
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProblemId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ProblemId::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::UnknownProblem(s.to_string()))
    }
}

/// How the random amplitude `a` of the cubic problems is drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Amplitude {
    /// `1 + min(|z|, 2)` on a Wiener driver, `1 + 0.5|sin(angle)|` on the circle.
    Bounded,
    /// `1 + |z|`; Wiener driver only.
    Unbounded,
    Constant(f64),
}

impl Amplitude {
    fn eval(self, kind: DriverKind, xi: f64) -> f64 {
        match (self, kind) {
            (Amplitude::Constant(a), _) => a,
            (Amplitude::Bounded, DriverKind::Wiener) => 1.0 + xi.abs().min(2.0),
            (Amplitude::Bounded, DriverKind::Circle) => 1.0 + 0.5 * xi.sin().abs(),
            (Amplitude::Unbounded, DriverKind::Wiener) => 1.0 + xi.abs(),
            (Amplitude::Unbounded, DriverKind::Circle) => 1.0 + 0.5 * xi.sin().abs(),
        }
    }
}

/// Tunable parameters shared by the registry problems.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemParams {
    pub amplitude: Amplitude,
    /// Coupling constant of the two-dimensional problem.
    pub k: f64,
    /// Amplitude of the decaying forcing profile `γ e^{−t²}`.
    pub gamma: f64,
}

impl Default for ProblemParams {
    fn default() -> Self {
        Self {
            amplitude: Amplitude::Bounded,
            k: 1.0,
            gamma: 0.02,
        }
    }
}

/// A registry entry: the equation, the drivers it runs on and, where one is
/// known, its attractor in closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkProblem {
    pub id: ProblemId,
    pub summary: &'static str,
    pub dim: usize,
    pub drivers: &'static [DriverKind],
    pub has_reference: bool,
    pub stochastic: bool,
}

pub fn registry() -> Vec<BenchmarkProblem> {
    use DriverKind::*;
    vec![
        BenchmarkProblem {
            id: ProblemId::Sin,
            summary: "x' = -x + sin(θ_{-τ}ω) + e^{-t²} on the circle; attractor {sin(ω - τ)}",
            dim: 1,
            drivers: &[Circle],
            has_reference: true,
            stochastic: false,
        },
        BenchmarkProblem {
            id: ProblemId::Cubic,
            summary: "x' = x - x³/a² + |g(t) z(θ_t ω)| x³; attractor [-a, a] with a = a(θ_{-τ}ω)",
            dim: 1,
            drivers: &[Wiener, Circle],
            has_reference: true,
            stochastic: false,
        },
        BenchmarkProblem {
            id: ProblemId::Coupled,
            summary: "two diffusively coupled cubics with coefficient β = 1 + tanh(z)/2",
            dim: 2,
            drivers: &[Wiener, Circle],
            has_reference: false,
            stochastic: false,
        },
        BenchmarkProblem {
            id: ProblemId::OuCounterexample,
            summary: "dz = -z dt + dW: pullback attractor {z(ω)}, no uniform attractor",
            dim: 1,
            drivers: &[Wiener],
            has_reference: false,
            stochastic: true,
        },
        BenchmarkProblem {
            id: ProblemId::StochasticCubic,
            summary: "dx = (x - x³/a²) dt + κ(t) x ∘ dW with κ = 1/(1 + t²), through its random ODE",
            dim: 1,
            drivers: &[Wiener],
            has_reference: false,
            stochastic: true,
        },
    ]
}

pub fn lookup(id: &str) -> Result<BenchmarkProblem> {
    let id: ProblemId = id.parse()?;
    Ok(registry().into_iter().find(|p| p.id == id).expect("every id is registered"))
}

/// `u ↦ u - z(ω)` relating the OU equation to `v' = -v`.
#[derive(Debug, Clone, Default)]
pub struct OuShift {
    pub ou: OuEvaluator<f64>,
}

impl StateTransform<f64> for OuShift {
    fn forward(&self, b: &BasePoint<f64>, x: &mut [f64]) -> Result<()> {
        let z = b.driver.observable(&self.ou)?;
        x.iter_mut().for_each(|v| *v -= z);
        Ok(())
    }

    fn inverse(&self, b: &BasePoint<f64>, x: &mut [f64]) -> Result<()> {
        let z = b.driver.observable(&self.ou)?;
        x.iter_mut().for_each(|v| *v += z);
        Ok(())
    }
}

fn decay(gamma: f64) -> impl Fn(f64) -> f64 + Send + Sync + 'static {
    move |t| gamma * (-t * t).exp()
}

impl BenchmarkProblem {
    pub fn supports(&self, kind: DriverKind) -> bool {
        self.drivers.contains(&kind)
    }

    fn check_driver(&self, kind: DriverKind) -> Result<()> {
        if !self.supports(kind) {
            return Err(Error::Config(format!("{} does not run on the {kind} driver", self.id)));
        }
        Ok(())
    }

    /// Right-hand side in the form `u' = f(Θ_r b, u)`. The stochastic problems
    /// return the field of their random ODE.
    pub fn field(&self, params: &ProblemParams, kind: DriverKind) -> Result<FieldSpec<f64>> {
        self.check_driver(kind)?;
        match self.id {
            ProblemId::Sin => FieldSpec::new(
                1,
                vec![Channel::frozen("sin", f64::sin), Channel::time("beta", decay(1.0))],
                |_, ch, u, du| du[0] = -u[0] + ch[0] + ch[1],
            ),
            ProblemId::Cubic => {
                let amp = params.amplitude;
                if amp == Amplitude::Unbounded && kind == DriverKind::Circle {
                    return Err(Error::Config("the unbounded amplitude needs the wiener driver".into()));
                }
                let noise = match kind {
                    DriverKind::Wiener => Channel::along("z", |z| z),
                    DriverKind::Circle => Channel::along("z", f64::cos),
                };
                FieldSpec::new(
                    1,
                    vec![
                        Channel::frozen("a", move |xi| amp.eval(kind, xi)),
                        Channel::time("g", decay(params.gamma)),
                        noise,
                    ],
                    |_, ch, u, du| {
                        let u3 = u[0] * u[0] * u[0];
                        du[0] = u[0] - u3 / (ch[0] * ch[0]) + (ch[1] * ch[2]).abs() * u3;
                    },
                )
            }
            ProblemId::Coupled => {
                let k = params.k;
                let beta = match kind {
                    DriverKind::Wiener => Channel::along("beta", |z: f64| 1.0 + 0.5 * z.tanh()),
                    DriverKind::Circle => Channel::along("beta", |a: f64| 1.0 + 0.5 * a.cos()),
                };
                FieldSpec::new(2, vec![beta], move |_, ch, x, dx| {
                    let c = k * (x[1] - x[0]);
                    dx[0] = c + x[0] - ch[0] * x[0].powi(3);
                    dx[1] = -c + x[1] - ch[0] * x[1].powi(3);
                })
            }
            ProblemId::OuCounterexample => FieldSpec::autonomous(1, |v: &[f64], dv: &mut [f64]| dv[0] = -v[0]),
            ProblemId::StochasticCubic => crate::cohomology::conjugated_field(&self.sde(params)?),
        }
    }

    /// The Stratonovich equation behind a stochastic problem.
    pub fn sde(&self, params: &ProblemParams) -> Result<SdeSpec<f64>> {
        match self.id {
            ProblemId::StochasticCubic => {
                let a = match params.amplitude {
                    Amplitude::Constant(a) => a,
                    _ => 1.0,
                };
                SdeSpec::new(
                    vec![1.0],
                    FieldSpec::autonomous(1, move |u: &[f64], du: &mut [f64]| du[0] = -u[0].powi(3) / (a * a))?,
                    KappaSpec::inverse_quadratic(),
                )
            }
            _ => Err(Error::Config(format!("{} has no Stratonovich form", self.id))),
        }
    }

    /// The cocycle `φ` the set-valued estimators run on.
    pub fn cocycle(
        &self,
        params: &ProblemParams,
        kind: DriverKind,
        cfg: IntegratorConfig<f64>,
    ) -> Result<Arc<dyn Cocycle<f64>>> {
        Ok(match self.id {
            ProblemId::OuCounterexample => Arc::new(Conjugated::new(
                make_nrds(self.field(params, kind)?, cfg)?,
                OuShift::default(),
            )),
            ProblemId::StochasticCubic => {
                self.check_driver(kind)?;
                Arc::new(conjugated_cocycle(&self.sde(params)?, cfg)?)
            }
            _ => Arc::new(make_nrds(self.field(params, kind)?, cfg)?),
        })
    }

    /// The closed-form attractor at `b`, rasterized on `grid`.
    pub fn reference(&self, params: &ProblemParams, b: &BasePoint<f64>, grid: &Grid<f64>) -> Option<Result<BoxSet<f64>>> {
        let kind = match b.driver.kind() {
            "circle" => DriverKind::Circle,
            _ => DriverKind::Wiener,
        };
        match self.id {
            ProblemId::Sin => Some((|| {
                let v = self.frozen_value(params, kind, b, "sin")?;
                BoxSet::covering_box(grid.clone(), &[v], &[v])
            })()),
            ProblemId::Cubic => Some((|| {
                let a = self.frozen_value(params, kind, b, "a")?;
                BoxSet::covering_box(grid.clone(), &[-a], &[a])
            })()),
            _ => None,
        }
    }

    /// The rougher attractor, uniform over all of `ℝ × Ω`, where it is known.
    pub fn global_reference(&self, params: &ProblemParams, grid: &Grid<f64>) -> Option<Result<BoxSet<f64>>> {
        match (self.id, params.amplitude) {
            (ProblemId::Sin, _) => Some(BoxSet::covering_box(grid.clone(), &[-1.0], &[1.0])),
            (ProblemId::Cubic, Amplitude::Constant(a)) => Some(BoxSet::covering_box(grid.clone(), &[-a], &[a])),
            _ => None,
        }
    }

    fn frozen_value(&self, params: &ProblemParams, kind: DriverKind, b: &BasePoint<f64>, name: &str) -> Result<f64> {
        let field = self.field(params, kind)?;
        let j = field.channel_index(name).expect("registry field defines the channel");
        let src = field.source(b, &OuEvaluator::default())?;
        let mut ch = vec![0.0; field.channels().len()];
        crate::cocycle::ChannelSource::fill(&src, 0.0, &mut ch)?;
        Ok(ch[j])
    }
}
