use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate aerodynamic state: {0}")]
    DegenerateState(String),

    #[error("Euler singularity: |theta| = {theta:.6} rad is within the guard band of pi/2")]
    EulerSingularity { theta: f64 },

    #[error("trim did not converge after {iterations} iterations (residual {residual:.3e}): {reason}")]
    TrimNoConvergence {
        iterations: usize,
        residual: f64,
        reason: String,
    },

    #[error("airspeed {airspeed:.4} m/s is below the {floor} m/s floor")]
    LowAirspeed { airspeed: f64, floor: f64 },

    #[error("observer diverged: |x_hat| = {norm:.3e} exceeds bound {bound:.3e}")]
    ObserverDivergence { norm: f64, bound: f64 },

    #[error("allocation matrix is singular (det = {det:.3e})")]
    SingularAllocation { det: f64 },

    #[error("allocation matrix condition number {cond:.3e} exceeds bound {bound:.3e}")]
    IllConditionedAllocation { cond: f64, bound: f64 },

    #[error("simulation fault at t = {time:.2} s: {source}")]
    SimulationFault {
        time: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("configuration error: {message}")]
    Config { key: Option<String>, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn at_time(self, time: f64) -> Self {
        match self {
            e @ Error::SimulationFault { .. } => e,
            e => Error::SimulationFault {
                time,
                source: Box::new(e),
            },
        }
    }

    /// Short machine-readable name of the error variant. Simulation faults
    /// report the kind of their cause.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::DegenerateState(_) => "degenerate_state",
            Error::EulerSingularity { .. } => "euler_singularity",
            Error::TrimNoConvergence { .. } => "trim_failure",
            Error::LowAirspeed { .. } => "low_airspeed",
            Error::ObserverDivergence { .. } => "observer_divergence",
            Error::SingularAllocation { .. } => "singular_allocation",
            Error::IllConditionedAllocation { .. } => "ill_conditioned_allocation",
            Error::SimulationFault { source, .. } => source.kind(),
            Error::Config { .. } => "config",
            Error::Io(_) => "io",
        }
    }

    /// Simulation time of a fault raised while stepping.
    pub fn time(&self) -> Option<f64> {
        match self {
            Error::SimulationFault { time, .. } => Some(*time),
            _ => None,
        }
    }

    /// True for faults raised while stepping a simulation, as opposed to
    /// configuration or I/O problems.
    pub fn is_simulation_fault(&self) -> bool {
        !matches!(
            self,
            Error::Config { .. } | Error::Io(_) | Error::InvalidParameter { .. }
        )
    }
}
