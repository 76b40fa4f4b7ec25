//! Deterministic random streams.
//!
//! Every run is driven by one master seed. Agent `i` draws from ChaCha8
//! stream `i` of that seed and the coordinator from stream `n_agents`, so
//! each stream is a disjoint counter range of the same keyed generator and
//! results never depend on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// Stream `index` of the generator keyed by `seed`.
pub fn stream(seed: u64, index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `n_agents` agent streams followed by the coordinator stream.
pub fn split(seed: u64, n_agents: usize) -> (Vec<Stream>, Stream) {
    let agents = (0..n_agents as u64).map(|i| stream(seed, i)).collect();
    (agents, stream(seed, n_agents as u64))
}
