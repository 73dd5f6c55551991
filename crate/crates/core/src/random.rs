//! Seeded random matrices and states for sampling and property suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::operators::{c64, hermitian_part, trace, validate_density, CMatrix, DensityOperator};

pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Per-trial seed derived from a master seed (splitmix64 finalizer).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Matrix with i.i.d. standard complex Gaussian entries (real and imaginary parts `N(0,1)`).
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        c64(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Haar-random unitary via QR of a Ginibre matrix with the phase of `R`'s diagonal removed.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    random_isometry(dim, dim, rng)
}

/// `rows × cols` isometry (`V†V = 1`), `rows ≥ cols`.
pub fn random_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    let qr = ginibre(rows, cols, rng).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..cols {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c64(1.0, 0.0) };
        for i in 0..rows {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    hermitian_part(&ginibre(dim, dim, rng))
}

/// Random operator; Hermitized when `hermitian` is set.
pub fn random_operator<R: Rng + ?Sized>(dim: usize, hermitian: bool, rng: &mut R) -> CMatrix {
    let g = ginibre(dim, dim, rng);
    if hermitian {
        hermitian_part(&g)
    } else {
        g
    }
}

/// Density operator `GG†/Tr(GG†)` with `G` a `dim × rank` Ginibre matrix.
pub fn random_density<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> DensityOperator {
    let g = ginibre(dim, rank.max(1), rng);
    let a = &g * g.adjoint();
    let t = trace(&a).re;
    validate_density(a.unscale(t)).expect("Wishart sample is a valid state")
}

/// Density operator with a uniformly chosen rank in `1..=dim`.
pub fn random_state_any_rank<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityOperator {
    let rank = rng.random_range(1..=dim);
    random_density(dim, rank, rng)
}

/// Random probability vector (normalized exponentials, i.e. flat Dirichlet).
pub fn random_probabilities<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..n)
        .map(|_| -(1.0 - rng.random::<f64>()).ln())
        .collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}
