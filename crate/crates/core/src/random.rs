//! Seeded sampling helpers: Haar unitaries, random programs, seed streams.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::mesh::{layer_placements, MeshProgram};
use crate::mzi::MziSetting;
use crate::signal::{SignalVector, TransferMatrix};

/// Deterministic RNG for a seed.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mixes a base seed with a path of indices into an independent child seed.
///
/// splitmix64 finaliser applied per component, so `(s, [a, b])` and
/// `(s, [b, a])` land on unrelated streams.
pub fn stream_seed(base: u64, path: &[u64]) -> u64 {
    let mut h = splitmix(base ^ 0x5851_f42d_4c95_7f2d);
    for &p in path {
        h = splitmix(h ^ splitmix(p.wrapping_add(0x9e37_79b9_7f4a_7c15)));
    }
    h
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Circularly-symmetric complex Gaussian with unit variance per component.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im)
}

/// N×N matrix of i.i.d. `complex_normal` entries.
pub fn ginibre<R: Rng + ?Sized>(n: usize, rng: &mut R) -> TransferMatrix {
    TransferMatrix::from_fn(n, n, |_, _| complex_normal(rng))
}

/// Haar-distributed unitary via QR of a Ginibre matrix with the phases of
/// `R`'s diagonal folded back into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> TransferMatrix {
    let qr = ginibre(n, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let norm = d.norm();
        let ph = if norm > 0.0 { d / norm } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= ph;
        }
    }
    q
}

/// Rectangular-topology program with uniformly random phases.
pub fn random_program<R: Rng + ?Sized>(n: usize, rng: &mut R) -> MeshProgram {
    let mut pairs = Vec::new();
    for layer in 0..n {
        let mut port = layer % 2;
        while port + 1 < n {
            let s = MziSetting::new(rng.random::<f64>() * TAU, rng.random::<f64>() * TAU).expect("finite phases");
            pairs.push((port, s));
            port += 2;
        }
    }
    let placements = layer_placements(n, &pairs);
    let phases = (0..n).map(|_| rng.random::<f64>() * TAU).collect();
    MeshProgram::new(n, placements, phases).expect("rectangular layout is valid")
}

pub fn random_signal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> SignalVector {
    SignalVector((0..n).map(|_| complex_normal(rng)).collect())
}
