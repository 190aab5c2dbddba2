//! Shared inputs for the criterion benchmarks in `benches/`.

use gram_expect::models::seeded_rng;
use gram_expect::monte_carlo::KindSelection;
use gram_expect::{sample_gram, ExactMatrix, Model, MultinomialCountModel, SimulationConfig};

pub fn reference_model() -> Model {
    Model::Multinomial(MultinomialCountModel::reference())
}

/// Gram matrix of `n` columns from the reference model.
pub fn sampled_gram(n: usize, seed: u64) -> ExactMatrix {
    sample_gram(&reference_model(), n, &mut seeded_rng(seed, n as u64)).expect("reference model samples")
}

/// Small simulation runs sized so one iteration takes well under a second.
pub fn det_run() -> SimulationConfig {
    SimulationConfig::new(reference_model(), 200, 8, 6, KindSelection::Det, 1)
}

pub fn perm_run() -> SimulationConfig {
    SimulationConfig::new(reference_model(), 12, 8, 4, KindSelection::Perm, 1)
}
