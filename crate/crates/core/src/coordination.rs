//! Generation-barrier coordinators. Each maps the pool of frozen solutions
//! to the hot solutions the agents start from in the next generation.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::mkp::{repair, MkpInstance, Solution};
use crate::rng::Stream;

/// Binary PSO constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsoParams {
    /// Cognitive learning factor.
    pub c1: f64,
    /// Social learning factor.
    pub c2: f64,
    /// Initial inertia weight.
    pub w0: f64,
    /// Inertia decrement factor, `w_{t+1} = w_t · beta`. The default of 1
    /// keeps the inertia constant: with decay, velocities on bits where the
    /// swarm agrees shrink towards zero and those bits turn into coin flips.
    pub beta: f64,
    /// Constriction factor.
    pub delta: f64,
    /// Velocities are clamped to `[-v_max, v_max]`.
    pub v_max: f64,
}

impl Default for PsoParams {
    fn default() -> Self {
        Self {
            c1: 2.0,
            c2: 2.0,
            w0: 0.9,
            beta: 1.0,
            delta: 1.0,
            v_max: 4.0,
        }
    }
}

impl PsoParams {
    pub fn validate(&self) -> Result<()> {
        let all = [self.c1, self.c2, self.w0, self.beta, self.delta, self.v_max];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("PSO parameters must be finite".into()));
        }
        if self.c1 < 0.0 || self.c2 < 0.0 {
            return Err(Error::Config("c1 and c2 must be non-negative".into()));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::Config(format!("beta must be in (0, 1], got {}", self.beta)));
        }
        if self.w0 <= 0.0 || self.delta <= 0.0 || self.v_max <= 0.0 {
            return Err(Error::Config("w0, delta and v_max must be positive".into()));
        }
        Ok(())
    }
}

/// Which solution BCO broadcasts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BroadcastSource {
    /// Best solution found in any generation so far.
    #[default]
    BestSoFar,
    /// Best frozen solution of the generation just finished.
    BestOfGeneration,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CoordinatorKind {
    /// Evolutionary SA: each agent keeps its own frozen solution.
    Esa,
    /// Bee colony: the best solution is handed to every agent.
    Bco(BroadcastSource),
    /// Binary particle swarm over frozen, personal-best and global-best.
    Pso(PsoParams),
}

impl CoordinatorKind {
    pub fn esa() -> Self {
        Self::Esa
    }

    pub fn bco() -> Self {
        Self::Bco(BroadcastSource::default())
    }

    pub fn pso() -> Self {
        Self::Pso(PsoParams::default())
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::Esa => "ESA",
            Self::Bco(_) => "BCO",
            Self::Pso(_) => "PSO",
        }
    }

    /// Report ordering: ESA, BCO, PSO.
    pub fn rank(&self) -> u8 {
        match self {
            Self::Esa => 0,
            Self::Bco(_) => 1,
            Self::Pso(_) => 2,
        }
    }

    /// Parses `esa`, `bco` or `pso` (any case) with default settings.
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "esa" => Ok(Self::esa()),
            "bco" => Ok(Self::bco()),
            "pso" => Ok(Self::pso()),
            other => Err(Error::Config(format!(
                "unknown coordinator {other:?} (expected esa, bco or pso)"
            ))),
        }
    }
}

impl fmt::Display for CoordinatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

fn non_empty(pool: &[Solution]) -> Result<()> {
    if pool.is_empty() {
        return Err(Error::invalid("empty solution pool"));
    }
    Ok(())
}

/// Index of the fittest solution, lowest index on ties.
pub fn best_index(pool: &[Solution]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, s) in pool.iter().enumerate() {
        if best.is_none_or(|b| s.fitness() > pool[b].fitness()) {
            best = Some(i);
        }
    }
    best
}

/// ESA: every agent takes up its own frozen solution.
pub fn esa_coordinate(frozen: &[Solution]) -> Result<Vec<Solution>> {
    non_empty(frozen)?;
    Ok(frozen.to_vec())
}

/// BCO: every agent restarts from `best`.
pub fn bco_coordinate(frozen: &[Solution], best: &Solution) -> Result<Vec<Solution>> {
    non_empty(frozen)?;
    if let Some(i) = best_index(frozen) {
        if frozen[i].fitness() > best.fitness() {
            return Err(Error::invalid(
                "broadcast solution is worse than the pool's best",
            ));
        }
    }
    Ok(vec![best.clone(); frozen.len()])
}

/// Swarm memory carried across generations.
#[derive(Debug, Clone, PartialEq)]
pub struct PsoState {
    pub velocities: Vec<Vec<f64>>,
    pub personal_bests: Vec<Solution>,
    pub global_best: Solution,
    /// Current inertia weight `w_t`.
    pub inertia: f64,
}

impl PsoState {
    /// Velocities uniform in `[-v_max, v_max]`; personal bests are the first
    /// frozen pool.
    pub fn new<R: Rng + ?Sized>(frozen: &[Solution], params: &PsoParams, rng: &mut R) -> Result<Self> {
        non_empty(frozen)?;
        params.validate()?;
        let n = frozen[0].len();
        if frozen.iter().any(|s| s.len() != n) {
            return Err(Error::invalid("frozen solutions differ in length"));
        }
        let velocities = frozen
            .iter()
            .map(|_| (0..n).map(|_| rng.gen_range(-params.v_max..=params.v_max)).collect())
            .collect();
        let global_best = frozen[best_index(frozen).unwrap_or(0)].clone();
        Ok(Self {
            velocities,
            personal_bests: frozen.to_vec(),
            global_best,
            inertia: params.w0,
        })
    }

    pub fn swarm_size(&self) -> usize {
        self.velocities.len()
    }

    /// Replaces personal bests that a frozen solution strictly beats, then
    /// the global best if a personal best strictly beats it.
    pub fn refresh_bests(&mut self, frozen: &[Solution]) -> Result<()> {
        self.check_shape(frozen)?;
        for (pb, f) in self.personal_bests.iter_mut().zip(frozen) {
            if f.fitness() > pb.fitness() {
                *pb = f.clone();
            }
        }
        if let Some(i) = best_index(&self.personal_bests) {
            if self.personal_bests[i].fitness() > self.global_best.fitness() {
                self.global_best = self.personal_bests[i].clone();
            }
        }
        Ok(())
    }

    fn check_shape(&self, frozen: &[Solution]) -> Result<()> {
        if frozen.len() != self.swarm_size() || self.personal_bests.len() != self.swarm_size() {
            return Err(Error::Dimension {
                expected: self.swarm_size(),
                actual: frozen.len(),
            });
        }
        let n = self.global_best.len();
        for (v, s) in self.velocities.iter().zip(frozen) {
            if v.len() != n || s.len() != n {
                return Err(Error::Dimension {
                    expected: n,
                    actual: v.len().min(s.len()),
                });
            }
        }
        Ok(())
    }
}

#[inline]
fn bit(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// One velocity component:
/// `δ · (w·v + c1·r1·(y − x) + c2·r2·(g − x))`, clamped to `±v_max`.
#[allow(clippy::too_many_arguments)]
pub fn velocity_component(
    v: f64,
    inertia: f64,
    x: f64,
    personal: f64,
    global: f64,
    r1: f64,
    r2: f64,
    params: &PsoParams,
) -> f64 {
    let raw = params.delta
        * (inertia * v + params.c1 * r1 * (personal - x) + params.c2 * r2 * (global - x));
    raw.clamp(-params.v_max, params.v_max)
}

/// Updates every velocity from the agents' frozen bits, their personal
/// bests and the global best, then decays the inertia weight by `beta`.
pub fn pso_velocity_update<R: Rng + ?Sized>(
    state: &mut PsoState,
    frozen: &[Solution],
    params: &PsoParams,
    rng: &mut R,
) -> Result<()> {
    state.check_shape(frozen)?;
    let w = state.inertia;
    let g = state.global_best.bits();
    for ((v, pb), x) in state
        .velocities
        .iter_mut()
        .zip(&state.personal_bests)
        .zip(frozen)
    {
        for (k, vk) in v.iter_mut().enumerate() {
            let r1: f64 = rng.gen();
            let r2: f64 = rng.gen();
            *vk = velocity_component(
                *vk,
                w,
                bit(x.bits()[k]),
                bit(pb.bits()[k]),
                bit(g[k]),
                r1,
                r2,
                params,
            );
        }
    }
    state.inertia = w * params.beta;
    Ok(())
}

/// Logistic sigmoid `1 / (1 + e^{-v})`.
pub fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

/// Samples binary positions: bit `k` of agent `i` is set iff a fresh
/// uniform draw falls below `sigmoid(v_ik)`.
pub fn pso_position_sample<R: Rng + ?Sized>(
    velocities: &[Vec<f64>],
    rng: &mut R,
) -> Result<Vec<Vec<bool>>> {
    if velocities.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite velocity"));
    }
    Ok(velocities
        .iter()
        .map(|v| v.iter().map(|&vk| rng.gen::<f64>() < sigmoid(vk)).collect())
        .collect())
}

/// Full PSO coordination step: refresh bests, move velocities, sample and
/// repair new positions. Returns the next hot pool.
pub fn pso_coordinate<R: Rng + ?Sized>(
    state: &mut PsoState,
    frozen: &[Solution],
    params: &PsoParams,
    instance: &MkpInstance,
    rng: &mut R,
) -> Result<Vec<Solution>> {
    non_empty(frozen)?;
    state.refresh_bests(frozen)?;
    pso_velocity_update(state, frozen, params, rng)?;
    pso_position_sample(&state.velocities, rng)?
        .iter()
        .map(|bits| repair(instance, bits))
        .collect()
}

/// A configured coordinator with its private random stream and, for PSO,
/// the swarm memory.
#[derive(Debug, Clone)]
pub struct Coordinator {
    kind: CoordinatorKind,
    pso: Option<PsoState>,
    rng: Stream,
}

impl Coordinator {
    pub fn new(kind: CoordinatorKind, rng: Stream) -> Result<Self> {
        if let CoordinatorKind::Pso(p) = &kind {
            p.validate()?;
        }
        Ok(Self {
            kind,
            pso: None,
            rng,
        })
    }

    pub fn kind(&self) -> &CoordinatorKind {
        &self.kind
    }

    /// PSO memory, present after the first PSO coordination.
    pub fn pso_state(&self) -> Option<&PsoState> {
        self.pso.as_ref()
    }

    /// Produces the next hot pool from this generation's frozen pool.
    pub fn coordinate(
        &mut self,
        instance: &MkpInstance,
        frozen: &[Solution],
        best_so_far: &Solution,
    ) -> Result<Vec<Solution>> {
        match &self.kind {
            CoordinatorKind::Esa => esa_coordinate(frozen),
            CoordinatorKind::Bco(source) => {
                let generation_best;
                let best = match source {
                    BroadcastSource::BestSoFar => best_so_far,
                    BroadcastSource::BestOfGeneration => {
                        non_empty(frozen)?;
                        generation_best = frozen[best_index(frozen).unwrap_or(0)].clone();
                        &generation_best
                    }
                };
                bco_coordinate(frozen, best)
            }
            CoordinatorKind::Pso(params) => {
                let params = *params;
                if self.pso.is_none() {
                    self.pso = Some(PsoState::new(frozen, &params, &mut self.rng)?);
                }
                let state = self.pso.as_mut().expect("initialised above");
                pso_coordinate(state, frozen, &params, instance, &mut self.rng)
            }
        }
    }
}
