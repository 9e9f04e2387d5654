//! Seeded, portable random streams. Every consumer draws from its own
//! (seed, role) stream so that e.g. noise draws never perturb problem
//! construction.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a random stream is used for. Each role gets an independent stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    /// Orthogonal eigenbasis of the quadratic problem.
    ProblemBasis,
    /// Entries of the solution matrix.
    Solution,
    /// Gradient noise.
    Noise,
    /// Online loss streams.
    LossStream,
    /// Anything test-local.
    Test,
}

impl Role {
    fn stream(self) -> u64 {
        match self {
            Role::ProblemBasis => 1,
            Role::Solution => 2,
            Role::Noise => 3,
            Role::LossStream => 4,
            Role::Test => 5,
        }
    }
}

/// A ChaCha stream pinned to `(seed, role)`.
pub fn stream(seed: u64, role: Role) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(role.stream());
    rng
}
