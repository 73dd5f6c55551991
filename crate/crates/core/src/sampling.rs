//! Random channel families and engine cycles for the property suites.

use std::f64::consts::TAU;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::channels::{
    bare_measurement, feedback_from_measurement, general_measurement, partial_thermalization,
    random_bare_measurement, KrausChannel,
};
use crate::engine::{EngineCycle, EngineStep};
use crate::error::{Error, Result};
use crate::operators::{c64, identity, CMatrix, HermitianOperator};
use crate::random::{random_hermitian, random_isometry, random_probabilities, random_unitary};

/// How a random pure bare-measurement cycle is built.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CycleFamily {
    /// Gaussian POVM square roots and Haar unitaries; the steady regime is usually `1/d`.
    Generic,
    /// Measurements diagonal in a shared random basis and monomial unitaries in that
    /// basis, so the steady regime is a nontrivial periodic orbit.
    Commuting,
}

pub fn random_hamiltonian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianOperator {
    HermitianOperator::new(random_hermitian(dim, rng)).expect("Hermitian part is Hermitian")
}

/// Projective measurement onto the columns of a Haar-random basis.
pub fn random_projective_measurement<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<KrausChannel> {
    let v = random_unitary(dim, rng);
    let ops = (0..dim)
        .map(|j| {
            let col = v.column(j);
            col * col.adjoint()
        })
        .collect();
    bare_measurement(ops)
}

/// Bare measurement `M_s = V diag(√w_s) V†`. Each basis index gets its own
/// outcome distribution; with `degenerate_pairs`, some indices share a distribution
/// so coherences between them survive the measurement.
pub fn commuting_measurement<R: Rng + ?Sized>(
    basis: &CMatrix,
    n_outcomes: usize,
    degenerate_pairs: bool,
    rng: &mut R,
) -> Result<KrausChannel> {
    let dim = basis.nrows();
    let mut weights: Vec<Vec<f64>> = (0..dim).map(|_| random_probabilities(n_outcomes, rng)).collect();
    if degenerate_pairs && dim > 2 && rng.random_bool(0.5) {
        let i = rng.random_range(0..dim);
        let j = (i + 1 + rng.random_range(0..dim - 1)) % dim;
        weights[j] = weights[i].clone();
    }
    let ops = (0..n_outcomes)
        .map(|s| {
            let diag = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                dim,
                weights.iter().map(|w| c64(w[s].sqrt(), 0.0)),
            ));
            basis * diag * basis.adjoint()
        })
        .collect();
    bare_measurement(ops)
}

/// `V P Φ V†` with `P` a random permutation and `Φ` phases that are `q`-th roots
/// of unity, `q ≤ 4`.
pub fn monomial_unitary<R: Rng + ?Sized>(basis: &CMatrix, rng: &mut R) -> CMatrix {
    let dim = basis.nrows();
    let mut perm: Vec<usize> = (0..dim).collect();
    perm.shuffle(rng);
    let q = rng.random_range(1..=4u32);
    let mut m = CMatrix::zeros(dim, dim);
    for (j, &i) in perm.iter().enumerate() {
        let phase = TAU * rng.random_range(0..q) as f64 / q as f64;
        m[(i, j)] = c64(phase.cos(), phase.sin());
    }
    basis * m * basis.adjoint()
}

/// Random cycle of `k` bare measurements with random drives. `H^(K) = H^(0)`.
pub fn random_bare_cycle<R: Rng + ?Sized>(
    dim: usize,
    k: usize,
    family: CycleFamily,
    rng: &mut R,
) -> Result<EngineCycle> {
    if k == 0 {
        return Err(Error::ParamOutOfRange { name: "k", value: 0.0 });
    }
    let h = random_hamiltonian(dim, rng);
    let basis = random_unitary(dim, rng);
    let mut steps = Vec::with_capacity(k);
    for step in 1..=k {
        let n_outcomes = rng.random_range(2..=3);
        let (channel, unitary) = match family {
            CycleFamily::Generic => (
                random_bare_measurement(dim, n_outcomes, rng)?,
                random_unitary(dim, rng),
            ),
            CycleFamily::Commuting => (
                commuting_measurement(&basis, n_outcomes, true, rng)?,
                monomial_unitary(&basis, rng),
            ),
        };
        let post_hamiltonian = if step == k { h.clone() } else { random_hamiltonian(dim, rng) };
        steps.push(EngineStep {
            channel,
            unitary,
            post_hamiltonian,
        });
    }
    EngineCycle::new(h, steps)
}

/// Channel with `n_kraus` operators cut from a Haar-random Stinespring isometry.
/// With `n_kraus ≥ 2` it is almost surely primitive.
pub fn random_general_channel<R: Rng + ?Sized>(dim: usize, n_kraus: usize, rng: &mut R) -> Result<KrausChannel> {
    let v = random_isometry(dim * n_kraus, dim, rng);
    let ops = (0..n_kraus).map(|i| v.rows(i * dim, dim).into_owned()).collect();
    general_measurement(ops)
}

/// Random bare measurement with Haar-random feedback unitaries per outcome.
pub fn random_feedback<R: Rng + ?Sized>(dim: usize, n_outcomes: usize, rng: &mut R) -> Result<KrausChannel> {
    let m = random_bare_measurement(dim, n_outcomes, rng)?;
    let us = (0..m.kraus_ops().len()).map(|_| random_unitary(dim, rng)).collect();
    feedback_from_measurement(m.kraus_ops().to_vec(), us)
}

/// Random partial thermalization: random `H`, `β ∈ [0.1, 3]`, `λ ∈ (0, 1]`.
pub fn random_thermal<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<(KrausChannel, HermitianOperator, f64)> {
    let h = random_hamiltonian(dim, rng);
    let beta = rng.random_range(0.1..=3.0);
    let lambda = 1.0 - rng.random::<f64>();
    Ok((partial_thermalization(&h, beta, lambda)?, h, beta))
}

/// Operator commuting with every measurement built on `basis`: diagonal in it.
pub fn commuting_operator<R: Rng + ?Sized>(basis: &CMatrix, rng: &mut R) -> CMatrix {
    let dim = basis.nrows();
    let mut d = identity(dim);
    for i in 0..dim {
        d[(i, i)] = c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    }
    basis * d * basis.adjoint()
}
