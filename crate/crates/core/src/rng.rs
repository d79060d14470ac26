//! Sources of randomness for the samplers.
//!
//! Every sampler draws its random decisions through [`Chooser`], which
//! returns a uniform index in `0..n`. Production runs wrap a seeded
//! generator in [`RngChooser`]; the exact decision-tree walk in
//! [`crate::oracle`] substitutes a scripted chooser that enumerates every
//! branch.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Uniform choice among `n` alternatives.
pub trait Chooser {
    /// Returns an index in `0..n`. Callers never ask for `n == 0`.
    fn choose(&mut self, n: usize) -> usize;
}

/// Adapts any [`Rng`] into a [`Chooser`].
pub struct RngChooser<'a, R: Rng + ?Sized>(pub &'a mut R);

impl<R: Rng + ?Sized> Chooser for RngChooser<'_, R> {
    fn choose(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        if n == 1 {
            0
        } else {
            self.0.random_range(0..n)
        }
    }
}

/// Stream domains keep spectra and graph streams of the same id apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamDomain {
    Spectra = 1,
    Graph = 2,
    Auxiliary = 3,
}

/// Counter-based stream derivation: the generator for `(seed, domain, id)`
/// does not depend on how many other streams were created before it.
pub fn derive_stream(seed: u64, domain: StreamDomain, id: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(domain as u64).to_le_bytes());
    key[16..24].copy_from_slice(&id.to_le_bytes());
    key[24..].copy_from_slice(b"jdm-smpl");
    ChaCha8Rng::from_seed(key)
}
