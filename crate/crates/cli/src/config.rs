use serde::{Deserialize, Serialize};

use extreme_chains::diagnostics::{Figure1Chain, InitialState, FIGURE1_X0};
use extreme_chains::kernels::KernelParams;
use extreme_chains::norming::{LimitParams, SchemeParams};
use extreme_chains::tailchain::ChangePointRule;

use crate::CliError;

fn one() -> usize {
    1
}

fn figure1_x0() -> f64 {
    FIGURE1_X0
}

fn figure1_horizon() -> usize {
    15
}

fn figure1_paths() -> usize {
    10_000
}

/// One experiment. The `kind` field selects the variant and `seed` is
/// mandatory everywhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Experiment {
    /// Paths of the chain from a fixed start or an exceedance.
    Simulate {
        seed: u64,
        kernel: KernelParams,
        init: InitialState<f64>,
        horizon: usize,
        n: usize,
        /// Marks change-points in the path table.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        changepoint: Option<ChangePointRule>,
    },
    /// KS distances of normalized kernel draws from a limit law over a grid.
    Converge {
        seed: u64,
        kernel: KernelParams,
        scheme: SchemeParams,
        limit: LimitParams,
        #[serde(default = "one")]
        t: usize,
        v_grid: Vec<f64>,
        n: usize,
        /// Also tabulate remainder terms on this many points of [−5, 5].
        #[serde(default, skip_serializing_if = "Option::is_none")]
        remainder_points: Option<usize>,
    },
    /// Envelopes of the four exponential-margin comparison chains.
    Figure1 {
        seed: u64,
        #[serde(default = "figure1_x0")]
        x0: f64,
        #[serde(default = "figure1_horizon")]
        horizon: usize,
        #[serde(default = "figure1_paths")]
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        chains: Option<Vec<Figure1Chain>>,
    },
    /// Hidden tail chain paths with regimes and change-points.
    Hidden {
        seed: u64,
        chain: HiddenParams,
        horizon: usize,
        n: usize,
    },
    /// Sign-alternating tail chain on Laplace margins.
    Negdep {
        seed: u64,
        scheme: SchemeParams,
        k_minus: LimitParams,
        k_plus: LimitParams,
        horizon: usize,
        n: usize,
    },
    /// χ estimates over a grid of levels.
    Chi {
        seed: u64,
        kernel: KernelParams,
        #[serde(default = "one")]
        t: usize,
        u_grid: Vec<f64>,
        n: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case", deny_unknown_fields)]
pub enum HiddenParams {
    AsymmetricLogistic { phi1: f64, phi2: f64, nu: f64 },
    HtMixture { lambda: f64, first: ComponentParams, second: ComponentParams },
    RootzenSmith,
    Arch { theta0: f64, theta1: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentParams {
    pub alpha: f64,
    pub beta: f64,
    /// Must be a law without atoms.
    pub innovation: LimitParams,
}

impl Experiment {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::Simulate { .. } => "simulate",
            Experiment::Converge { .. } => "converge",
            Experiment::Figure1 { .. } => "figure1",
            Experiment::Hidden { .. } => "hidden",
            Experiment::Negdep { .. } => "negdep",
            Experiment::Chi { .. } => "chi",
        }
    }

    pub fn seed(&self) -> u64 {
        match *self {
            Experiment::Simulate { seed, .. }
            | Experiment::Converge { seed, .. }
            | Experiment::Figure1 { seed, .. }
            | Experiment::Hidden { seed, .. }
            | Experiment::Negdep { seed, .. }
            | Experiment::Chi { seed, .. } => seed,
        }
    }
}
