//! The generation loop: N agents anneal their hot solutions in parallel,
//! the frozen pool is collected, and the coordinator produces the next hot
//! pool. The best solution seen in any generation is the run's answer.

use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;

use crate::coordination::{best_index, Coordinator, CoordinatorKind};
use crate::error::{Error, Result};
use crate::mkp::{repair, MkpInstance, Solution};
use crate::rng::{self, Stream};
use crate::sa::{run_sa, SaConfig, SaRunTrace};

#[derive(Debug, Clone, PartialEq)]
pub struct SwarmConfig {
    pub swarm_size: usize,
    /// Generation budget `T`.
    pub generations: usize,
    pub sa: SaConfig,
    pub coordinator: CoordinatorKind,
    pub seed: u64,
    /// Stop as soon as the instance's known optimum is reached.
    pub stop_at_optimum: bool,
}

impl Default for SwarmConfig {
    fn default() -> Self {
        Self {
            swarm_size: 20,
            generations: 300,
            sa: SaConfig::default(),
            coordinator: CoordinatorKind::pso(),
            seed: 0,
            stop_at_optimum: false,
        }
    }
}

impl SwarmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.swarm_size == 0 {
            return Err(Error::Config("swarm_size must be positive".into()));
        }
        if self.generations == 0 {
            return Err(Error::Config("generations must be positive".into()));
        }
        self.sa.validate()?;
        if let CoordinatorKind::Pso(p) = &self.coordinator {
            p.validate()?;
        }
        Ok(())
    }
}

/// Outcome of one swarm run.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub best: Solution,
    /// Generation (0-based) in which `best` was first produced.
    pub best_generation: usize,
    /// Frozen-pool fitness vector of every executed generation.
    pub fitness_history: Vec<Vec<f64>>,
    pub wall_time: Duration,
    pub generations_executed: usize,
}

impl RunResult {
    /// Equality of everything except timing.
    pub fn same_outcome(&self, other: &RunResult) -> bool {
        self.best == other.best
            && self.best_generation == other.best_generation
            && self.fitness_history == other.fitness_history
            && self.generations_executed == other.generations_executed
    }

    /// Best-so-far fitness after each generation.
    pub fn running_best(&self) -> Vec<f64> {
        self.fitness_history
            .iter()
            .scan(f64::NEG_INFINITY, |best, gen| {
                *best = gen.iter().copied().fold(*best, f64::max);
                Some(*best)
            })
            .collect()
    }
}

/// Per-generation summary.
#[derive(Debug, Clone)]
pub struct GenerationStats {
    pub generation: usize,
    pub frozen: Vec<Solution>,
    pub traces: Vec<SaRunTrace>,
    pub best_of_generation: f64,
    pub best_so_far: f64,
}

impl GenerationStats {
    pub fn fitness(&self) -> Vec<f64> {
        self.frozen.iter().map(Solution::fitness).collect()
    }
}

/// Random, repaired starting solutions plus the agent and coordinator
/// streams derived from `cfg.seed`.
pub fn init_swarm(instance: &MkpInstance, cfg: &SwarmConfig) -> Result<(Vec<Solution>, Vec<Stream>, Stream)> {
    cfg.validate()?;
    let (mut agents, coordinator) = rng::split(cfg.seed, cfg.swarm_size);
    let pool = agents
        .iter_mut()
        .map(|r| {
            let bits: Vec<bool> = (0..instance.n()).map(|_| r.gen::<bool>()).collect();
            repair(instance, &bits)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((pool, agents, coordinator))
}

/// A swarm in progress.
pub struct Swarm<'a> {
    instance: &'a MkpInstance,
    cfg: SwarmConfig,
    hot: Vec<Solution>,
    agents: Vec<Stream>,
    coordinator: Coordinator,
    best: Option<(Solution, usize)>,
    generation: usize,
}

impl<'a> Swarm<'a> {
    pub fn new(instance: &'a MkpInstance, cfg: SwarmConfig) -> Result<Self> {
        cfg.sa.schedule(instance)?;
        let (hot, agents, coord_rng) = init_swarm(instance, &cfg)?;
        let coordinator = Coordinator::new(cfg.coordinator.clone(), coord_rng)?;
        Ok(Self {
            instance,
            cfg,
            hot,
            agents,
            coordinator,
            best: None,
            generation: 0,
        })
    }

    pub fn hot_pool(&self) -> &[Solution] {
        &self.hot
    }

    pub fn best(&self) -> Option<&Solution> {
        self.best.as_ref().map(|(s, _)| s)
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    pub fn coordinator(&self) -> &Coordinator {
        &self.coordinator
    }

    /// Runs one generation. When `coordinate` is set the coordinator turns
    /// the frozen pool into the next hot pool; otherwise the hot pool is
    /// left as the frozen pool.
    pub fn step(&mut self, coordinate: bool) -> Result<GenerationStats> {
        let instance = self.instance;
        let sa = &self.cfg.sa;
        // Results are collected in agent order, so scheduling never leaks
        // into the outcome.
        let runs = self
            .hot
            .par_iter()
            .zip(self.agents.par_iter_mut())
            .map(|(hot, rng)| run_sa(instance, hot, sa, rng))
            .collect::<Result<Vec<_>>>()?;
        let (frozen, traces): (Vec<Solution>, Vec<SaRunTrace>) = runs.into_iter().unzip();

        let gen_best = best_index(&frozen).expect("swarm is never empty");
        let improved = self
            .best
            .as_ref()
            .is_none_or(|(b, _)| frozen[gen_best].fitness() > b.fitness());
        if improved {
            self.best = Some((frozen[gen_best].clone(), self.generation));
        }
        let best_so_far = self.best.as_ref().expect("set above").0.clone();

        self.hot = if coordinate {
            self.coordinator.coordinate(instance, &frozen, &best_so_far)?
        } else {
            frozen.clone()
        };

        let stats = GenerationStats {
            generation: self.generation,
            best_of_generation: frozen[gen_best].fitness(),
            best_so_far: best_so_far.fitness(),
            frozen,
            traces,
        };
        self.generation += 1;
        Ok(stats)
    }

    fn reached_optimum(&self) -> bool {
        match (self.instance.known_optimum(), &self.best) {
            (Some(opt), Some((b, _))) => b.fitness() >= opt - 1e-9 * opt.abs().max(1.0),
            _ => false,
        }
    }

    /// Runs the remaining generations and reports the best solution found.
    pub fn run(mut self) -> Result<RunResult> {
        let start = Instant::now();
        let mut history = Vec::with_capacity(self.cfg.generations);
        while self.generation < self.cfg.generations {
            let last = self.generation + 1 == self.cfg.generations;
            let stats = self.step(!last)?;
            history.push(stats.fitness());
            if self.cfg.stop_at_optimum && self.reached_optimum() {
                break;
            }
        }
        let (best, best_generation) = self.best.expect("at least one generation ran");
        Ok(RunResult {
            best,
            best_generation,
            generations_executed: history.len(),
            fitness_history: history,
            wall_time: start.elapsed(),
        })
    }
}

/// Runs a full swarm on `instance`.
pub fn run_swarm(instance: &MkpInstance, cfg: &SwarmConfig) -> Result<RunResult> {
    Swarm::new(instance, cfg.clone())?.run()
}
