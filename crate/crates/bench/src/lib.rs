//! Shared inputs for the criterion benches.

use csext::oracle::random_instance;
use csext::{ExtensionKit, ProblemInstance, Tolerance};

/// Ambient dimensions exercised by every bench group.
pub const DIMS: [usize; 4] = [2, 4, 8, 16];

/// A seeded instance with a half-dimensional domain.
pub fn instance(n: usize) -> ProblemInstance {
    random_instance(42, n, n / 2).expect("valid dimensions")
}

pub fn kit(n: usize) -> ExtensionKit {
    instance(n).kit(Tolerance::default()).expect("random instances build")
}
