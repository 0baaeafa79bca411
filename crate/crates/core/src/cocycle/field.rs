use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use crate::driver::{BasePoint, Driver, ObservableTrack, OuEvaluator};
use crate::error::{Error, Result};
use crate::Real;

pub const MAX_DIM: usize = 3;

type Scalar1<T> = Arc<dyn Fn(T) -> T + Send + Sync>;
type Scalar2<T> = Arc<dyn Fn(T, T) -> T + Send + Sync>;

/// Right-hand side `(t, channels, u, du)`; `t` is absolute time `τ + r`.
pub type Rhs<T> = Arc<dyn Fn(T, &[T], &[T], &mut [T]) + Send + Sync>;

/// How a channel is read off the base point `(τ, ω)` at elapsed time `r`.
#[derive(Clone)]
pub enum ChannelKind<T> {
    /// `f(τ + r)`.
    Time(Scalar1<T>),
    /// `f(τ + r, ξ(θ_r ω))`, where `ξ` is the driver observable.
    Process(Scalar2<T>),
    /// `f(ξ(θ_{−τ} ω))`: constant along every orbit of `Θ`.
    Frozen(Scalar1<T>),
}

#[derive(Clone)]
pub struct Channel<T> {
    pub name: String,
    pub kind: ChannelKind<T>,
}

impl<T: Real> Channel<T> {
    /// Deterministic channel `f(τ + r)`.
    pub fn time(name: &str, f: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        Self {
            name: name.to_string(),
            kind: ChannelKind::Time(Arc::new(f)),
        }
    }

    /// Channel `f(ξ(θ_r ω))` driven by the observable only.
    pub fn along(name: &str, f: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        Self::process(name, move |_, x| f(x))
    }

    pub fn process(name: &str, f: impl Fn(T, T) -> T + Send + Sync + 'static) -> Self {
        Self {
            name: name.to_string(),
            kind: ChannelKind::Process(Arc::new(f)),
        }
    }

    pub fn frozen(name: &str, f: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        Self {
            name: name.to_string(),
            kind: ChannelKind::Frozen(Arc::new(f)),
        }
    }
}

impl<T> fmt::Debug for Channel<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            ChannelKind::Time(_) => "time",
            ChannelKind::Process(_) => "process",
            ChannelKind::Frozen(_) => "frozen",
        };
        write!(f, "{}({kind})", self.name)
    }
}

/// A vector field `f(Θ_r(τ, ω), u)` on `ℝ^d`, `d ≤ 3`, assembled from named
/// driver channels.
#[derive(Clone)]
pub struct FieldSpec<T> {
    dim: usize,
    channels: Vec<Channel<T>>,
    rhs: Rhs<T>,
}

impl<T> fmt::Debug for FieldSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldSpec")
            .field("dim", &self.dim)
            .field("channels", &self.channels)
            .finish()
    }
}

impl<T: Real> FieldSpec<T> {
    pub fn new(
        dim: usize,
        channels: Vec<Channel<T>>,
        rhs: impl Fn(T, &[T], &[T], &mut [T]) + Send + Sync + 'static,
    ) -> Result<Self> {
        Self::from_arc(dim, channels, Arc::new(rhs))
    }

    pub fn from_arc(dim: usize, channels: Vec<Channel<T>>, rhs: Rhs<T>) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::Field(format!("dimension must be 1..={MAX_DIM}, got {dim}")));
        }
        let mut seen = HashSet::new();
        for c in &channels {
            if !seen.insert(c.name.as_str()) {
                return Err(Error::Field(format!("duplicate channel name `{}`", c.name)));
            }
        }
        Ok(Self { dim, channels, rhs })
    }

    /// Autonomous field with no channels.
    pub fn autonomous(
        dim: usize,
        f: impl Fn(&[T], &mut [T]) + Send + Sync + 'static,
    ) -> Result<Self> {
        Self::new(dim, vec![], move |_, _, u, du| f(u, du))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn channels(&self) -> &[Channel<T>] {
        &self.channels
    }

    pub fn channel_index(&self, name: &str) -> Option<usize> {
        self.channels.iter().position(|c| c.name == name)
    }

    pub fn rhs(&self) -> &Rhs<T> {
        &self.rhs
    }

    #[inline]
    pub fn eval(&self, t: T, ch: &[T], u: &[T], du: &mut [T]) {
        (self.rhs)(t, ch, u, du)
    }

    /// Channel reader for trajectories starting at `b`.
    pub fn source(&self, b: &BasePoint<T>, ev: &OuEvaluator<T>) -> Result<BaseChannels<T>> {
        let needs_track = self
            .channels
            .iter()
            .any(|c| matches!(c.kind, ChannelKind::Process(_)));
        let track = if needs_track {
            Some(b.observable_track(ev)?)
        } else {
            None
        };
        let mut frozen = Vec::with_capacity(self.channels.len());
        let mut frozen_xi = None;
        for c in &self.channels {
            frozen.push(match &c.kind {
                ChannelKind::Process(_) | ChannelKind::Time(_) => None,
                ChannelKind::Frozen(f) => {
                    if frozen_xi.is_none() {
                        frozen_xi = Some(frozen_observable(b, ev)?);
                    }
                    Some(f(frozen_xi.unwrap()))
                }
            });
        }
        Ok(BaseChannels {
            tau: b.tau,
            track,
            kinds: self.channels.iter().map(|c| c.kind.clone()).collect(),
            frozen,
        })
    }
}

/// `ξ(θ_{−τ} ω)`.
fn frozen_observable<T: Real>(b: &BasePoint<T>, ev: &OuEvaluator<T>) -> Result<T> {
    match &b.driver {
        Driver::Circle(c) => Ok(c.shift(-b.tau).angle()),
        Driver::Wiener(p) => p.ou_at(ev, -b.tau),
    }
}

/// Anything that can fill the channel vector at elapsed time `r`.
pub trait ChannelSource<T: Real>: Send + Sync {
    fn len(&self) -> usize;
    fn fill(&self, r: T, out: &mut [T]) -> Result<()>;
    /// Absolute time handed to the right-hand side.
    fn abs_time(&self, r: T) -> T;
}

/// Channels read off a fixed base point.
pub struct BaseChannels<T: Real> {
    tau: T,
    track: Option<ObservableTrack<T>>,
    kinds: Vec<ChannelKind<T>>,
    frozen: Vec<Option<T>>,
}

impl<T: Real> ChannelSource<T> for BaseChannels<T> {
    fn len(&self) -> usize {
        self.kinds.len()
    }

    fn fill(&self, r: T, out: &mut [T]) -> Result<()> {
        let mut xi = None;
        for (j, k) in self.kinds.iter().enumerate() {
            out[j] = match (k, self.frozen[j]) {
                (_, Some(v)) => v,
                (ChannelKind::Time(f), None) => f(self.tau + r),
                (ChannelKind::Process(f), None) => {
                    let x = match xi {
                        Some(x) => x,
                        None => {
                            let x = self.track.as_ref().expect("track built for process channels").at(r)?;
                            xi = Some(x);
                            x
                        }
                    };
                    f(self.tau + r, x)
                }
                (ChannelKind::Frozen(_), None) => unreachable!("frozen channels are precomputed"),
            };
        }
        Ok(())
    }

    fn abs_time(&self, r: T) -> T {
        self.tau + r
    }
}

impl<T: Real> BaseChannels<T> {
    /// The observable `ξ(θ_r ω)`, when some channel depends on it.
    pub fn observable(&self, r: T) -> Option<Result<T>> {
        self.track.as_ref().map(|t| t.at(r))
    }
}
