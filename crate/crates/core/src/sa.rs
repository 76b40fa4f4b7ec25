//! Fast-track simulated annealing run by every agent once per generation.
//!
//! The search stays inside the feasible region: an infeasible neighbour is
//! resampled rather than penalised, and the returned frozen solution is the
//! best state visited during the run.

use rand::Rng;

use crate::error::{Error, Result};
use crate::mkp::{MkpInstance, Solution};

/// Parameters of one annealing run.
#[derive(Debug, Clone, PartialEq)]
pub struct SaConfig {
    /// Temperature levels per run.
    pub outer_iterations: usize,
    /// Proposals per temperature level.
    pub inner_iterations: usize,
    /// Initial temperature; `None` uses the instance's largest profit.
    pub t_hot: Option<f64>,
    pub t_frozen: f64,
    /// A move flips between 1 and `max_flips` distinct bits.
    pub max_flips: usize,
    /// Extra draws allowed when a proposed neighbour is infeasible.
    pub neighbor_retry_cap: usize,
}

impl Default for SaConfig {
    fn default() -> Self {
        Self {
            outer_iterations: 200,
            inner_iterations: 1,
            t_hot: None,
            t_frozen: 0.01,
            max_flips: 3,
            neighbor_retry_cap: 20,
        }
    }
}

impl SaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.outer_iterations < 2 {
            return Err(Error::Config("outer_iterations must be at least 2".into()));
        }
        if self.inner_iterations == 0 {
            return Err(Error::Config("inner_iterations must be positive".into()));
        }
        if self.max_flips == 0 {
            return Err(Error::Config("max_flips must be positive".into()));
        }
        if !(self.t_frozen.is_finite() && self.t_frozen > 0.0) {
            return Err(Error::Config(format!("t_frozen must be positive, got {}", self.t_frozen)));
        }
        if let Some(t) = self.t_hot {
            if !(t.is_finite() && t > self.t_frozen) {
                return Err(Error::Config(format!(
                    "t_hot ({t}) must be finite and above t_frozen ({})",
                    self.t_frozen
                )));
            }
        }
        Ok(())
    }

    /// Geometric schedule for `instance`, resolving the default `t_hot`.
    pub fn schedule(&self, instance: &MkpInstance) -> Result<CoolingSchedule> {
        self.validate()?;
        let t_hot = self.t_hot.unwrap_or_else(|| instance.max_profit());
        CoolingSchedule::new(t_hot, self.t_frozen, self.outer_iterations)
    }
}

/// `t(level) = t_hot · α^level` with `α = (t_frozen / t_hot)^(1 / (levels − 1))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoolingSchedule {
    t_hot: f64,
    t_frozen: f64,
    levels: usize,
    alpha: f64,
}

impl CoolingSchedule {
    pub fn new(t_hot: f64, t_frozen: f64, levels: usize) -> Result<Self> {
        if levels < 2 {
            return Err(Error::Config("a schedule needs at least 2 levels".into()));
        }
        if !(t_frozen > 0.0 && t_hot > t_frozen && t_hot.is_finite()) {
            return Err(Error::Config(format!(
                "need 0 < t_frozen < t_hot, got t_frozen={t_frozen}, t_hot={t_hot}"
            )));
        }
        let alpha = (t_frozen / t_hot).powf(1.0 / (levels - 1) as f64);
        Ok(Self {
            t_hot,
            t_frozen,
            levels,
            alpha,
        })
    }

    pub fn t_hot(&self) -> f64 {
        self.t_hot
    }

    pub fn t_frozen(&self) -> f64 {
        self.t_frozen
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Temperature at `level` (`0 <= level < levels`).
    pub fn temperature(&self, level: usize) -> f64 {
        debug_assert!(level < self.levels);
        if level + 1 == self.levels {
            return self.t_frozen;
        }
        self.t_hot * self.alpha.powi(level as i32)
    }
}

/// Stochastic acceptance for maximisation with `delta = f(x') − f(x)`.
/// Improvements and lateral moves are always taken; a worsening move is
/// taken iff `exp(delta / temperature) >= rho`.
pub fn accept(delta: f64, temperature: f64, rho: f64) -> Result<bool> {
    if !delta.is_finite() {
        return Err(Error::invalid(format!("non-finite delta {delta}")));
    }
    if !(temperature > 0.0) {
        return Err(Error::invalid(format!("temperature must be positive, got {temperature}")));
    }
    Ok(delta >= 0.0 || (delta / temperature).exp() >= rho)
}

/// Outcome counters of one annealing run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaRunTrace {
    /// Fitness of the hot (input) solution.
    pub start_fitness: f64,
    /// Fitness of the frozen (returned) solution.
    pub end_fitness: f64,
    pub accepted_moves: u64,
    pub proposed_moves: u64,
}

/// Incremental search state: current bits with their constraint loads.
pub(crate) struct Walker<'a> {
    instance: &'a MkpInstance,
    bits: Vec<bool>,
    loads: Vec<f64>,
    fitness: f64,
    flips: Vec<usize>,
    trial: Vec<f64>,
    exact_sums: bool,
}

impl<'a> Walker<'a> {
    pub(crate) fn new(instance: &'a MkpInstance, start: &Solution) -> Self {
        let bits = start.bits().to_vec();
        let loads = (0..instance.m()).map(|i| instance.load(i, &bits)).collect();
        Self {
            instance,
            fitness: start.fitness(),
            bits,
            loads,
            flips: Vec::with_capacity(8),
            trial: vec![0.0; instance.m()],
            exact_sums: is_integral(instance),
        }
    }

    /// Draws a feasible flip set, resampling up to `retry_cap` extra times.
    /// Returns the fitness change, or `None` when every draw was infeasible.
    pub(crate) fn propose<R: Rng + ?Sized>(
        &mut self,
        max_flips: usize,
        retry_cap: usize,
        rng: &mut R,
    ) -> Option<f64> {
        let n = self.bits.len();
        let k_max = max_flips.clamp(1, n);
        for _ in 0..=retry_cap {
            let k = rng.gen_range(1..=k_max);
            self.flips.clear();
            while self.flips.len() < k {
                let j = rng.gen_range(0..n);
                if !self.flips.contains(&j) {
                    self.flips.push(j);
                }
            }
            if self.trial_fits() {
                let profits = self.instance.profits();
                let delta = self
                    .flips
                    .iter()
                    .map(|&j| if self.bits[j] { -profits[j] } else { profits[j] })
                    .sum();
                return Some(delta);
            }
        }
        None
    }

    fn trial_fits(&mut self) -> bool {
        let caps = self.instance.capacities();
        let mut ambiguous = false;
        for i in 0..self.loads.len() {
            let mut load = self.loads[i];
            for &j in &self.flips {
                let r = self.instance.weight(i, j);
                load += if self.bits[j] { -r } else { r };
            }
            self.trial[i] = load;
            if self.exact_sums {
                if load > caps[i] {
                    return false;
                }
            } else {
                let tol = 1e-9 * caps[i].max(1.0);
                if load > caps[i] + tol {
                    return false;
                }
                ambiguous |= load > caps[i] - tol;
            }
        }
        if ambiguous {
            // Running sums are inexact for fractional data; settle
            // borderline cases with a from-scratch evaluation.
            for &j in &self.flips {
                self.bits[j] = !self.bits[j];
            }
            let fits = self.instance.fits(&self.bits);
            for &j in &self.flips {
                self.bits[j] = !self.bits[j];
            }
            return fits;
        }
        true
    }

    /// Applies the last proposal.
    pub(crate) fn commit(&mut self, delta: f64) {
        for &j in &self.flips {
            self.bits[j] = !self.bits[j];
        }
        std::mem::swap(&mut self.loads, &mut self.trial);
        self.fitness += delta;
    }

    pub(crate) fn fitness(&self) -> f64 {
        self.fitness
    }

    pub(crate) fn bits(&self) -> &[bool] {
        &self.bits
    }
}

fn is_integral(instance: &MkpInstance) -> bool {
    let limit = 2f64.powi(50);
    let ok = |v: &f64| v.fract() == 0.0 && v.abs() < limit;
    instance.profits().iter().all(ok)
        && instance.capacities().iter().all(ok)
        && (0..instance.m()).all(|i| instance.weight_row(i).iter().all(ok))
}

fn require_feasible(instance: &MkpInstance, s: &Solution) -> Result<()> {
    if s.len() != instance.n() {
        return Err(Error::Dimension {
            expected: instance.n(),
            actual: s.len(),
        });
    }
    if !instance.fits(s.bits()) {
        return Err(Error::invalid("starting solution is infeasible"));
    }
    Ok(())
}

/// One neighbourhood move: flip `k ~ U{1..max_flips}` distinct random bits,
/// resampling infeasible results up to `neighbor_retry_cap` times. Falls back
/// to `current` when no feasible neighbour was drawn.
pub fn neighbor<R: Rng + ?Sized>(
    current: &Solution,
    instance: &MkpInstance,
    cfg: &SaConfig,
    rng: &mut R,
) -> Result<Solution> {
    require_feasible(instance, current)?;
    let mut walker = Walker::new(instance, current);
    match walker.propose(cfg.max_flips, cfg.neighbor_retry_cap, rng) {
        Some(delta) => {
            walker.commit(delta);
            Solution::evaluate(instance, walker.bits.clone())
        }
        None => Ok(current.clone()),
    }
}

/// Anneals from `hot` and returns the best solution visited (the frozen
/// solution) with run counters.
pub fn run_sa<R: Rng + ?Sized>(
    instance: &MkpInstance,
    hot: &Solution,
    cfg: &SaConfig,
    rng: &mut R,
) -> Result<(Solution, SaRunTrace)> {
    let schedule = cfg.schedule(instance)?;
    require_feasible(instance, hot)?;

    let mut walker = Walker::new(instance, hot);
    let mut best_bits = walker.bits().to_vec();
    let mut best_fitness = walker.fitness();
    let mut accepted = 0u64;

    for level in 0..schedule.levels() {
        let t = schedule.temperature(level);
        for _ in 0..cfg.inner_iterations {
            let Some(delta) = walker.propose(cfg.max_flips, cfg.neighbor_retry_cap, rng) else {
                continue;
            };
            let rho = if delta < 0.0 { rng.gen::<f64>() } else { 0.0 };
            if accept(delta, t, rho)? {
                walker.commit(delta);
                accepted += 1;
                if walker.fitness() > best_fitness {
                    best_fitness = walker.fitness();
                    best_bits.copy_from_slice(walker.bits());
                }
            }
        }
    }

    let frozen = if best_bits == hot.bits() {
        hot.clone()
    } else {
        Solution::evaluate(instance, best_bits)?
    };
    let trace = SaRunTrace {
        start_fitness: hot.fitness(),
        end_fitness: frozen.fitness(),
        accepted_moves: accepted,
        proposed_moves: (schedule.levels() * cfg.inner_iterations) as u64,
    };
    Ok((frozen, trace))
}
