//! Shared fixtures for the criterion benchmarks.

use blochecho::{haar_u4, ComplexMatrix, RngStream};

/// A fixed batch of Haar-random two-qubit unitaries.
pub fn haar_batch(count: usize, seed: u64) -> Vec<ComplexMatrix> {
    let mut rng = RngStream::new(seed);
    (0..count).map(|_| haar_u4(&mut rng)).collect()
}
