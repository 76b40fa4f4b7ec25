//! Experiment grids: coordinators × swarm sizes × inner iterations on a set
//! of benchmarks, each cell replicated with distinct seeds and summarised by
//! its relative error against the known optimum and its mean run time.

use std::path::PathBuf;

use rayon::prelude::*;

use crate::coordination::CoordinatorKind;
use crate::engine::{run_swarm, RunResult, SwarmConfig};
use crate::error::{Error, Result};
use crate::mkp::MkpInstance;
use crate::orlib;

/// Relative error `(f_opt − f_avrg) / f_opt`, reported as a fraction.
pub fn rpe(f_opt: f64, f_avrg: f64) -> Result<f64> {
    if !(f_opt > 0.0) || !f_opt.is_finite() {
        return Err(Error::invalid(format!("optimum must be positive, got {f_opt}")));
    }
    Ok((f_opt - f_avrg) / f_opt)
}

/// Problems to load from one `mknap` file, 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceSelector {
    pub path: PathBuf,
    pub problems: Vec<usize>,
}

/// Loads the selected problems. `optima` overrides the file's optimum for
/// the given 1-based problem index.
pub fn load_benchmarks(selectors: &[InstanceSelector], optima: &[(usize, f64)]) -> Result<Vec<MkpInstance>> {
    let mut out = Vec::new();
    for sel in selectors {
        let file = orlib::load_file(&sel.path)?;
        for &k in &sel.problems {
            let inst = file.problem(k).ok_or_else(|| {
                Error::Config(format!(
                    "{} has {} problems, no problem {k}",
                    sel.path.display(),
                    file.problems.len()
                ))
            })?;
            let mut inst = inst.clone();
            if let Some(&(_, v)) = optima.iter().find(|(p, _)| *p == k) {
                inst = inst.with_known_optimum(Some(v));
            }
            out.push(inst);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct ExperimentGrid {
    pub benchmarks: Vec<MkpInstance>,
    pub coordinators: Vec<CoordinatorKind>,
    pub swarm_sizes: Vec<usize>,
    pub inner_iterations: Vec<usize>,
    pub replications: usize,
    pub seed_base: u64,
    /// Settings shared by every cell (generations, schedule, early stop).
    pub base: SwarmConfig,
}

/// One grid cell before it is run.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSpec {
    pub index: usize,
    pub benchmark: usize,
    pub coordinator: CoordinatorKind,
    pub swarm_size: usize,
    pub inner_iters: usize,
}

impl ExperimentGrid {
    pub fn validate(&self) -> Result<()> {
        if self.benchmarks.is_empty()
            || self.coordinators.is_empty()
            || self.swarm_sizes.is_empty()
            || self.inner_iterations.is_empty()
        {
            return Err(Error::Config("every grid axis needs at least one value".into()));
        }
        if self.replications == 0 {
            return Err(Error::Config("replications must be positive".into()));
        }
        if self.swarm_sizes.contains(&0) || self.inner_iterations.contains(&0) {
            return Err(Error::Config("swarm sizes and inner iterations must be positive".into()));
        }
        for b in &self.benchmarks {
            if b.known_optimum().is_none() {
                return Err(Error::Config(format!(
                    "{} has no known optimum; supply one to compute RPE",
                    b.name()
                )));
            }
        }
        self.base.validate()
    }

    /// Cells in run order: benchmark, coordinator, inner iterations, swarm size.
    pub fn cells(&self) -> Vec<CellSpec> {
        let mut out = Vec::new();
        for b in 0..self.benchmarks.len() {
            for c in &self.coordinators {
                for &inner in &self.inner_iterations {
                    for &size in &self.swarm_sizes {
                        out.push(CellSpec {
                            index: out.len(),
                            benchmark: b,
                            coordinator: c.clone(),
                            swarm_size: size,
                            inner_iters: inner,
                        });
                    }
                }
            }
        }
        out
    }

    /// Seed of replication `r` in cell `cell`. Seeds are consecutive within
    /// a cell and cells occupy disjoint blocks.
    pub fn seed(&self, cell: usize, r: usize) -> u64 {
        self.seed_base
            .wrapping_add((cell as u64).wrapping_mul(self.replications as u64))
            .wrapping_add(r as u64)
    }

    fn config(&self, spec: &CellSpec, seed: u64) -> SwarmConfig {
        let mut cfg = self.base.clone();
        cfg.swarm_size = spec.swarm_size;
        cfg.sa.inner_iterations = spec.inner_iters;
        cfg.coordinator = spec.coordinator.clone();
        cfg.seed = seed;
        cfg
    }
}

/// Aggregated replications of one grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellStats {
    pub benchmark: String,
    pub coordinator: CoordinatorKind,
    pub swarm_size: usize,
    pub inner_iters: usize,
    pub rpe: f64,
    pub cpu_mean_s: f64,
    pub f_avrg: f64,
    pub f_opt: f64,
    pub best_found: f64,
    pub replications: usize,
    /// Share of replications that reached `f_opt`.
    pub hit_rate: f64,
}

impl CellStats {
    /// Aggregates finished runs of one cell.
    pub fn from_runs(benchmark: &str, spec: &CellSpec, f_opt: f64, runs: &[RunResult]) -> Result<Self> {
        if runs.is_empty() {
            return Err(Error::invalid("a cell needs at least one run"));
        }
        let count = runs.len() as f64;
        let f_avrg = runs.iter().map(|r| r.best.fitness()).sum::<f64>() / count;
        let best_found = runs.iter().map(|r| r.best.fitness()).fold(f64::MIN, f64::max);
        let hits = runs
            .iter()
            .filter(|r| r.best.fitness() >= f_opt - 1e-9 * f_opt)
            .count();
        // All-hit cells are exactly zero regardless of summation rounding.
        let rpe = if hits == runs.len() { 0.0 } else { rpe(f_opt, f_avrg)? };
        Ok(Self {
            benchmark: benchmark.to_string(),
            coordinator: spec.coordinator.clone(),
            swarm_size: spec.swarm_size,
            inner_iters: spec.inner_iters,
            rpe,
            cpu_mean_s: runs.iter().map(|r| r.wall_time.as_secs_f64()).sum::<f64>() / count,
            f_avrg,
            f_opt,
            best_found,
            replications: runs.len(),
            hit_rate: hits as f64 / count,
        })
    }

    pub(crate) fn sort_key(&self) -> (&str, u8, usize, usize) {
        (&self.benchmark, self.coordinator.rank(), self.swarm_size, self.inner_iters)
    }

    /// Equality ignoring the timing column.
    pub fn same_quality(&self, other: &CellStats) -> bool {
        CellStats {
            cpu_mean_s: 0.0,
            ..self.clone()
        } == CellStats {
            cpu_mean_s: 0.0,
            ..other.clone()
        }
    }
}

/// Runs every cell of `grid`, replications in parallel on up to
/// `parallel_replications` threads.
pub fn run_grid(grid: &ExperimentGrid, parallel_replications: usize) -> Result<Vec<CellStats>> {
    run_grid_with(grid, parallel_replications, |_| {})
}

/// As [`run_grid`], calling `on_cell` after each finished cell.
pub fn run_grid_with<F>(grid: &ExperimentGrid, parallel_replications: usize, mut on_cell: F) -> Result<Vec<CellStats>>
where
    F: FnMut(&CellStats),
{
    grid.validate()?;
    if parallel_replications == 0 {
        return Err(Error::Config("parallel_replications must be positive".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallel_replications)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;

    let mut out = Vec::new();
    for spec in grid.cells() {
        let instance = &grid.benchmarks[spec.benchmark];
        let f_opt = instance.known_optimum().expect("validated");
        let runs = pool.install(|| {
            (0..grid.replications)
                .into_par_iter()
                .map(|r| run_swarm(instance, &grid.config(&spec, grid.seed(spec.index, r))))
                .collect::<Result<Vec<_>>>()
        })?;
        let cell = CellStats::from_runs(instance.name(), &spec, f_opt, &runs)?;
        on_cell(&cell);
        out.push(cell);
    }
    Ok(out)
}

/// Averaged RPE of one (benchmark, inner iterations, coordinator) group.
#[derive(Debug, Clone, PartialEq)]
pub struct Fig2Row {
    pub benchmark: String,
    pub inner_iters: usize,
    pub coordinator: CoordinatorKind,
    pub mean_rpe: f64,
    /// Number of swarm sizes averaged.
    pub cells: usize,
}

/// Averages cell RPE across swarm sizes per (benchmark, inner, coordinator).
pub fn summarize_fig2(cells: &[CellStats]) -> Result<Vec<Fig2Row>> {
    if cells.is_empty() {
        return Err(Error::invalid("no cells to summarise"));
    }
    let mut rows: Vec<Fig2Row> = Vec::new();
    for c in cells {
        match rows.iter_mut().find(|r| {
            r.benchmark == c.benchmark && r.inner_iters == c.inner_iters && r.coordinator.rank() == c.coordinator.rank()
        }) {
            Some(r) => {
                r.mean_rpe += c.rpe;
                r.cells += 1;
            }
            None => rows.push(Fig2Row {
                benchmark: c.benchmark.clone(),
                inner_iters: c.inner_iters,
                coordinator: c.coordinator.clone(),
                mean_rpe: c.rpe,
                cells: 1,
            }),
        }
    }
    for r in &mut rows {
        r.mean_rpe /= r.cells as f64;
    }
    rows.sort_by(|a, b| {
        (&a.benchmark, a.inner_iters, a.coordinator.rank()).cmp(&(&b.benchmark, b.inner_iters, b.coordinator.rank()))
    });
    Ok(rows)
}
