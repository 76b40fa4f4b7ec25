//! Swarms of simulated-annealing agents for the multidimensional knapsack
//! problem.
//!
//! Each agent runs a short, fixed-budget annealing pass per generation. At
//! the generation barrier a coordinator turns the pool of frozen solutions
//! into the next generation's hot solutions:
//!
//! - **ESA** keeps every agent on its own frozen solution,
//! - **BCO** restarts every agent from the best solution found,
//! - **PSO** samples new states from a binary particle swarm whose particles
//!   are the agents, with personal and global bests.
//!
//! ```
//! use saswarm::{orlib, run_swarm, CoordinatorKind, SwarmConfig};
//!
//! let file = orlib::parse_orlib("1  3 1 0  4 5 6  1 2 3  3").unwrap();
//! let cfg = SwarmConfig {
//!     swarm_size: 4,
//!     generations: 5,
//!     coordinator: CoordinatorKind::pso(),
//!     ..SwarmConfig::default()
//! };
//! let result = run_swarm(&file.problems[0], &cfg).unwrap();
//! assert_eq!(result.best.fitness(), 9.0);
//! ```

pub mod bench;
pub mod coordination;
pub mod engine;
pub mod error;
pub mod mkp;
pub mod orlib;
pub mod rng;
pub mod sa;

pub use bench::{rpe, run_grid, summarize_fig2, CellStats, ExperimentGrid, Fig2Row, InstanceSelector};
pub use coordination::{BroadcastSource, Coordinator, CoordinatorKind, PsoParams, PsoState};
pub use engine::{init_swarm, run_swarm, GenerationStats, RunResult, Swarm, SwarmConfig};
pub use error::{Error, Result};
pub use mkp::{brute_force_optimum, is_feasible, objective, repair, MkpInstance, Solution};
pub use orlib::{parse_orlib, BenchmarkFile, ParseError};
pub use sa::{accept, neighbor, run_sa, CoolingSchedule, SaConfig, SaRunTrace};
