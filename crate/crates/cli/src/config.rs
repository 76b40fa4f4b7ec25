//! Optional TOML config file. Every key is optional; command-line flags
//! override whatever the file sets.
//!
//! ```toml
//! generations = 300
//! stop_at_optimum = true
//! bco_broadcast = "best-so-far"
//!
//! [sa]
//! outer_iterations = 200
//! t_frozen = 0.01
//!
//! [pso]
//! c1 = 2.0
//! beta = 0.975
//!
//! [bench]
//! problems = [6, 7]
//! coordinators = ["esa", "bco", "pso"]
//! swarm_sizes = [5, 10, 20, 50]
//! inner = [1, 5, 10]
//! replications = 50
//!
//! [optima]
//! 6 = 10618
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use saswarm::{BroadcastSource, CoordinatorKind, PsoParams, SaConfig, SwarmConfig};

use crate::Failure;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub swarm_size: Option<usize>,
    pub generations: Option<usize>,
    pub coordinator: Option<String>,
    pub seed: Option<u64>,
    pub stop_at_optimum: Option<bool>,
    pub bco_broadcast: Option<String>,
    #[serde(default)]
    pub sa: SaSection,
    #[serde(default)]
    pub pso: PsoSection,
    #[serde(default)]
    pub bench: BenchSection,
    /// Known optimum per 1-based problem index.
    #[serde(default)]
    pub optima: BTreeMap<String, f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SaSection {
    pub outer_iterations: Option<usize>,
    pub inner_iterations: Option<usize>,
    pub t_hot: Option<f64>,
    pub t_frozen: Option<f64>,
    pub max_flips: Option<usize>,
    pub neighbor_retry_cap: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsoSection {
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub w0: Option<f64>,
    pub beta: Option<f64>,
    pub delta: Option<f64>,
    pub v_max: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSection {
    pub problems: Option<Vec<usize>>,
    pub coordinators: Option<Vec<String>>,
    pub swarm_sizes: Option<Vec<usize>>,
    pub inner: Option<Vec<usize>>,
    pub replications: Option<usize>,
    pub seed_base: Option<u64>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub fig2_out: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Input(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
    }

    pub fn optima(&self) -> Result<Vec<(usize, f64)>, Failure> {
        self.optima
            .iter()
            .map(|(k, v)| {
                let k = k
                    .parse()
                    .map_err(|_| Failure::Config(format!("optima key {k:?} is not a problem index")))?;
                Ok((k, *v))
            })
            .collect()
    }

    fn sa(&self) -> SaConfig {
        let d = SaConfig::default();
        let s = &self.sa;
        SaConfig {
            outer_iterations: s.outer_iterations.unwrap_or(d.outer_iterations),
            inner_iterations: s.inner_iterations.unwrap_or(d.inner_iterations),
            t_hot: s.t_hot.or(d.t_hot),
            t_frozen: s.t_frozen.unwrap_or(d.t_frozen),
            max_flips: s.max_flips.unwrap_or(d.max_flips),
            neighbor_retry_cap: s.neighbor_retry_cap.unwrap_or(d.neighbor_retry_cap),
        }
    }

    fn pso(&self) -> PsoParams {
        let d = PsoParams::default();
        let p = &self.pso;
        PsoParams {
            c1: p.c1.unwrap_or(d.c1),
            c2: p.c2.unwrap_or(d.c2),
            w0: p.w0.unwrap_or(d.w0),
            beta: p.beta.unwrap_or(d.beta),
            delta: p.delta.unwrap_or(d.delta),
            v_max: p.v_max.unwrap_or(d.v_max),
        }
    }

    fn broadcast(&self) -> Result<BroadcastSource, Failure> {
        match self.bco_broadcast.as_deref() {
            None | Some("best-so-far") => Ok(BroadcastSource::BestSoFar),
            Some("best-of-generation") => Ok(BroadcastSource::BestOfGeneration),
            Some(other) => Err(Failure::Config(format!(
                "bco_broadcast must be best-so-far or best-of-generation, got {other:?}"
            ))),
        }
    }

    /// Resolves a coordinator name, applying the file's PSO and BCO settings.
    pub fn coordinator(&self, name: &str) -> Result<CoordinatorKind, Failure> {
        Ok(match CoordinatorKind::parse(name)? {
            CoordinatorKind::Pso(_) => CoordinatorKind::Pso(self.pso()),
            CoordinatorKind::Bco(_) => CoordinatorKind::Bco(self.broadcast()?),
            k => k,
        })
    }

    /// Base swarm settings from the file, with library defaults elsewhere.
    pub fn swarm(&self) -> Result<SwarmConfig, Failure> {
        let d = SwarmConfig::default();
        let coordinator = match &self.coordinator {
            Some(name) => self.coordinator(name)?,
            None => CoordinatorKind::Pso(self.pso()),
        };
        Ok(SwarmConfig {
            swarm_size: self.swarm_size.unwrap_or(d.swarm_size),
            generations: self.generations.unwrap_or(d.generations),
            sa: self.sa(),
            coordinator,
            seed: self.seed.unwrap_or(d.seed),
            stop_at_optimum: self.stop_at_optimum.unwrap_or(d.stop_at_optimum),
        })
    }
}
