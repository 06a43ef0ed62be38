//! Seed derivation for reproducible parallel simulation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator for path `index` under `master_seed`.
///
/// ChaCha is counter based: each index selects an independent stream of the
/// same key, so results do not depend on the order paths are generated in.
pub fn path_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}
