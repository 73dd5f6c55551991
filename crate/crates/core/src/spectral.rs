//! Asymptotics of repeated channels.
//!
//! The steady regime of `E^n` is governed by the eigenvalues of `E` on the
//! unit circle. This module finds them, builds the spectral projector onto
//! their eigenspaces, projects states onto it and scans for recurrences of
//! the projected state.

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channels::{unvectorize, vectorize, Superoperator};
use crate::error::{Error, Result};
use crate::random::{random_unitary, rng_from_seed};
use crate::operators::{
    c64, hermitian_spectrum, hs_norm, identity, validate_density, CMatrix, DensityOperator,
};

/// Default cutoff on `1 − |λ|` for peripheral eigenvalues.
pub const TAU_PERIP: f64 = 1e-9;
/// Eigenvalues closer than this are treated as one cluster.
pub const CLUSTER_TOL: f64 = 1e-8;
/// Largest accepted condition number of the left/right eigenvector pairing.
pub const MAX_PAIRING_CONDITION: f64 = 1e8;
/// Smallest singular value (relative) still counted as part of a null space.
const NULL_SPACE_TOL: f64 = 1e-6;

const SCHUR_MAX_ITER: usize = 5_000;
/// Similarity restarts after the QR iteration stalls.
const SCHUR_RESTARTS: u64 = 4;

/// Eigenvalues of a general square matrix. Matrices with negligible imaginary
/// part go through the real Schur form; a stalled QR iteration is retried on a
/// shifted random orthogonal similarity of the input.
pub fn eigenvalues_of(m: &CMatrix) -> Result<Vec<Complex64>> {
    let scale = hs_norm(m).max(1.0);
    let imag = m.iter().fold(0.0f64, |a, z| a.max(z.im.abs()));
    if imag <= 1e-14 * scale {
        real_eigenvalues(&m.map(|z| z.re))
    } else {
        complex_eigenvalues(m)
    }
}

fn restart_shift(attempt: u64) -> f64 {
    0.37 * attempt as f64
}

fn real_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    let n = m.nrows();
    for attempt in 0..=SCHUR_RESTARTS {
        let shift = restart_shift(attempt);
        let a = if attempt == 0 {
            m.clone()
        } else {
            let q = random_orthogonal(n, attempt);
            q.transpose() * m * &q + DMatrix::identity(n, n) * shift
        };
        if let Some(schur) = Schur::try_new(a, f64::EPSILON, SCHUR_MAX_ITER) {
            return Ok(schur.complex_eigenvalues().iter().map(|z| z - shift).collect());
        }
    }
    Err(Error::EigSolverFailure)
}

fn complex_eigenvalues(m: &CMatrix) -> Result<Vec<Complex64>> {
    let n = m.nrows();
    for attempt in 0..=SCHUR_RESTARTS {
        let shift = restart_shift(attempt);
        let a = if attempt == 0 {
            m.clone()
        } else {
            let q = random_unitary(n, &mut rng_from_seed(attempt));
            q.adjoint() * m * &q + CMatrix::identity(n, n) * c64(shift, 0.0)
        };
        if let Some(schur) = Schur::try_new(a, f64::EPSILON, SCHUR_MAX_ITER) {
            let (_, t) = schur.unpack();
            return Ok(t.diagonal().iter().map(|z| z - shift).collect());
        }
    }
    Err(Error::EigSolverFailure)
}

fn random_orthogonal(n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = rng_from_seed(seed);
    DMatrix::from_fn(n, n, |_, _| rand::Rng::sample(&mut rng, rand_distr::StandardNormal))
        .qr()
        .q()
}

/// `[[Re A, −Im A], [Im A, Re A]]`.
fn realify(a: &CMatrix) -> DMatrix<f64> {
    let (r, c) = a.shape();
    DMatrix::from_fn(2 * r, 2 * c, |i, j| {
        let z = a[(i % r, j % c)];
        match (i < r, j < c) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Orthonormal basis of the complex span of `vectors`, `rank` columns, by pivoted Gram–Schmidt.
fn complex_span(mut vectors: Vec<DVector<Complex64>>, rank: usize) -> CMatrix {
    let n = vectors.first().map_or(0, |v| v.len());
    let mut basis = CMatrix::zeros(n, rank);
    for k in 0..rank {
        let (best, _) = vectors
            .iter()
            .enumerate()
            .map(|(i, v)| (i, v.norm()))
            .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        let q = vectors.swap_remove(best);
        let q = q.unscale(q.norm());
        for v in vectors.iter_mut() {
            let overlap = q.dotc(v);
            *v -= &q * overlap;
        }
        basis.set_column(k, &q);
    }
    basis
}

/// Orthonormal basis of the null space of a square complex matrix with nullity
/// `mult`, and the largest singular value assigned to it. Works on the real form
/// so the null vectors come from a real SVD.
fn null_space(a: &CMatrix, mult: usize) -> Result<(CMatrix, f64)> {
    let n = a.nrows();
    let svd = realify(a).svd(false, true);
    let v_t = svd.v_t.ok_or(Error::EigSolverFailure)?;
    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&x, &y| svd.singular_values[x].total_cmp(&svd.singular_values[y]));
    let null = &order[..2 * mult];
    let largest = null.iter().map(|&i| svd.singular_values[i]).fold(0.0f64, f64::max);
    let vectors = null
        .iter()
        .map(|&j| DVector::from_fn(n, |i, _| c64(v_t[(j, i)], v_t[(j, i + n)])))
        .collect();
    Ok((complex_span(vectors, mult), largest))
}

/// Right and left null spaces, both from right singular vectors (of `A` and `A†`).
fn null_spaces(a: &CMatrix, mult: usize) -> Result<(CMatrix, CMatrix, f64)> {
    let (right, r) = null_space(a, mult)?;
    let (left, l) = null_space(&a.adjoint(), mult)?;
    Ok((right, left, r.max(l)))
}

fn sort_by_modulus(eigs: &mut [Complex64]) {
    eigs.sort_by(|a, b| b.norm().total_cmp(&a.norm()).then(a.arg().total_cmp(&b.arg())));
}

/// All `d²` eigenvalues of a superoperator, sorted by modulus (descending).
pub fn spectrum(e: &Superoperator) -> Result<Vec<Complex64>> {
    let mut eigs = eigenvalues_of(&e.in_hermitian_basis())?;
    sort_by_modulus(&mut eigs);
    Ok(eigs)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProjectorMethod {
    /// Left/right null-space pairing per eigenvalue cluster.
    Biorthogonal,
    /// Cesàro averages of `(λ̄E)^n` per cluster.
    Cesaro,
}

#[derive(Clone, Debug)]
pub struct PeripheralDecomposition {
    /// Full spectrum, sorted by modulus.
    pub eigenvalues: Vec<Complex64>,
    /// Indices into `eigenvalues` with `|λ| ≥ 1 − τ_perip`.
    pub peripheral_indices: Vec<usize>,
    pub projector: Superoperator,
    pub method: ProjectorMethod,
}

impl PeripheralDecomposition {
    pub fn peripheral_eigenvalues(&self) -> Vec<Complex64> {
        self.peripheral_indices.iter().map(|&i| self.eigenvalues[i]).collect()
    }

    /// Residuals of the defining properties of `P̂_φ` relative to the cycle `e`.
    pub fn check(&self, e: &Superoperator) -> ProjectorChecks {
        let p = self.projector.matrix();
        let idempotence = hs_norm(&(p * p - p));
        let commutation = hs_norm(&(p * e.matrix() - e.matrix() * p));
        let trace_preservation = self.projector.trace_preservation_residual();
        let choi_min_eigenvalue = *hermitian_spectrum(&self.projector.choi())
            .eigenvalues
            .last()
            .expect("nonempty");
        let choi_hermiticity = crate::operators::hermiticity_deviation(&self.projector.choi());
        ProjectorChecks {
            idempotence,
            commutation,
            trace_preservation,
            choi_hermiticity,
            choi_min_eigenvalue,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProjectorChecks {
    pub idempotence: f64,
    pub commutation: f64,
    pub trace_preservation: f64,
    pub choi_hermiticity: f64,
    pub choi_min_eigenvalue: f64,
}

impl ProjectorChecks {
    /// True when every residual is below `tol` and the Choi matrix is PSD within `tol`.
    pub fn all_within(&self, tol: f64) -> bool {
        self.idempotence <= tol
            && self.commutation <= tol
            && self.trace_preservation <= tol
            && self.choi_hermiticity <= tol
            && self.choi_min_eigenvalue >= -tol
    }
}

fn peripheral_clusters(eigs: &[Complex64], tau_perip: f64) -> (Vec<usize>, Vec<Vec<usize>>) {
    let peripheral: Vec<usize> = (0..eigs.len())
        .filter(|&i| eigs[i].norm() >= 1.0 - tau_perip)
        .collect();
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for &i in &peripheral {
        match clusters
            .iter_mut()
            .find(|c| c.iter().any(|&j| (eigs[j] - eigs[i]).norm() < CLUSTER_TOL))
        {
            Some(c) => c.push(i),
            None => clusters.push(vec![i]),
        }
    }
    (peripheral, clusters)
}

fn cluster_center(eigs: &[Complex64], cluster: &[usize]) -> Complex64 {
    let sum: Complex64 = cluster.iter().map(|&i| eigs[i]).sum();
    sum / cluster.len() as f64
}

/// Spectral projector onto the eigenspace of `mu` with multiplicity `mult`:
/// `R (L†R)^{-1} L†` from the right and left null spaces of `E − μ`.
fn biorthogonal_projector(e: &CMatrix, mu: Complex64, mult: usize) -> Result<CMatrix> {
    let n = e.nrows();
    let shifted = e - CMatrix::identity(n, n) * mu;
    let scale = hs_norm(e).max(1.0);
    let (right, left, largest_null) = null_spaces(&shifted, mult)?;
    if largest_null > NULL_SPACE_TOL * scale {
        return Err(Error::IllConditioned {
            condition: largest_null / f64::EPSILON,
        });
    }
    let pairing = left.adjoint() * &right;
    let sv = pairing.clone().singular_values();
    let smax = sv.iter().copied().fold(0.0f64, f64::max);
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if condition > MAX_PAIRING_CONDITION {
        return Err(Error::IllConditioned { condition });
    }
    let inv = pairing.try_inverse().ok_or(Error::IllConditioned { condition })?;
    Ok(right * inv * left.adjoint())
}

/// Peripheral projector `P̂_φ` from biorthogonal left/right eigenvector pairs.
///
/// Fails with [`Error::IllConditioned`] instead of returning a doubtful
/// projector; see [`peripheral_projector_cesaro`] for the fallback.
pub fn peripheral_projector(e: &Superoperator, tau_perip: f64) -> Result<PeripheralDecomposition> {
    let eigenvalues = spectrum(e)?;
    let (peripheral_indices, clusters) = peripheral_clusters(&eigenvalues, tau_perip);
    let n = e.matrix().nrows();
    let mut p = CMatrix::zeros(n, n);
    for cluster in &clusters {
        let mu = cluster_center(&eigenvalues, cluster);
        p += biorthogonal_projector(e.matrix(), mu, cluster.len())?;
    }
    Ok(PeripheralDecomposition {
        eigenvalues,
        peripheral_indices,
        projector: Superoperator::new(e.dim(), p)?,
        method: ProjectorMethod::Biorthogonal,
    })
}

/// Cesàro average `(1/N) Σ_{n<N} T^n` with `N = 2^doublings`, by repeated doubling.
fn cesaro_average(t: &CMatrix, doublings: u32) -> CMatrix {
    let n = t.nrows();
    let mut sum = CMatrix::identity(n, n);
    let mut power = t.clone();
    for _ in 0..doublings {
        sum = &sum + &power * &sum;
        power = &power * &power;
    }
    sum.unscale(2f64.powi(doublings as i32))
}

/// Peripheral projector from Cesàro averages of `(μ̄E)^n` over each peripheral cluster `μ`.
pub fn peripheral_projector_cesaro(e: &Superoperator, tau_perip: f64) -> Result<PeripheralDecomposition> {
    let eigenvalues = spectrum(e)?;
    let (peripheral_indices, clusters) = peripheral_clusters(&eigenvalues, tau_perip);
    let n = e.matrix().nrows();
    let mut p = CMatrix::zeros(n, n);
    for cluster in &clusters {
        let mu = cluster_center(&eigenvalues, cluster);
        let phase = mu / mu.norm();
        p += cesaro_average(&(e.matrix() * phase.conj()), 30);
    }
    Ok(PeripheralDecomposition {
        eigenvalues,
        peripheral_indices,
        projector: Superoperator::new(e.dim(), p)?,
        method: ProjectorMethod::Cesaro,
    })
}

/// Biorthogonal projector, falling back to Cesàro averaging when the pairing is ill-conditioned.
pub fn peripheral_projector_or_cesaro(e: &Superoperator, tau_perip: f64) -> Result<PeripheralDecomposition> {
    match peripheral_projector(e, tau_perip) {
        Err(Error::IllConditioned { condition }) => {
            log::warn!("peripheral pairing ill-conditioned ({condition:.3e}); using Cesàro averages");
            peripheral_projector_cesaro(e, tau_perip)
        }
        other => other,
    }
}

/// `ρ_φ = P_φ(ρ)`. A projected state that fails validation signals a broken projector.
pub fn project_peripheral(pd: &PeripheralDecomposition, rho: &DensityOperator) -> Result<DensityOperator> {
    if rho.dim() != pd.projector.dim() {
        return Err(Error::DimMismatch {
            expected: pd.projector.dim(),
            found: rho.dim(),
        });
    }
    validate_density(pd.projector.apply_operator(rho.matrix())).map_err(|e| Error::ValidationFailure(Box::new(e)))
}

/// Times `n ≤ n_max` with `‖E^n(ρ_φ) − ρ_φ‖_HS < ε`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceRecord {
    pub epsilon: f64,
    pub n_max: usize,
    pub times: Vec<usize>,
    pub distances: Vec<f64>,
}

impl RecurrenceRecord {
    pub fn last_time(&self) -> Option<usize> {
        self.times.last().copied()
    }
}

/// HS distances `‖E^n(ρ) − ρ_ref‖` for `n = 1..=n_max`, iterating the state (no matrix powers).
pub fn orbit_distances(e: &Superoperator, start: &CMatrix, reference: &CMatrix, n_max: usize) -> Vec<f64> {
    let target = vectorize(reference);
    let mut state: DVector<Complex64> = vectorize(start);
    let mut out = Vec::with_capacity(n_max);
    for _ in 0..n_max {
        state = e.matrix() * &state;
        out.push((&state - &target).norm());
    }
    out
}

/// Exhaustive scan for recurrences of `ρ_φ` under `E`.
pub fn find_recurrences(
    e: &Superoperator,
    rho_phi: &DensityOperator,
    epsilon: f64,
    n_max: usize,
) -> Result<RecurrenceRecord> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::ParamOutOfRange {
            name: "epsilon",
            value: epsilon,
        });
    }
    if rho_phi.dim() != e.dim() {
        return Err(Error::DimMismatch {
            expected: e.dim(),
            found: rho_phi.dim(),
        });
    }
    let dists = orbit_distances(e, rho_phi.matrix(), rho_phi.matrix(), n_max);
    let mut times = Vec::new();
    let mut distances = Vec::new();
    let mut closest = (f64::INFINITY, 0);
    for (i, &d) in dists.iter().enumerate() {
        if d < closest.0 {
            closest = (d, i + 1);
        }
        if d < epsilon {
            times.push(i + 1);
            distances.push(d);
        }
    }
    if times.is_empty() {
        return Err(Error::NoRecurrenceFound {
            n_max,
            epsilon,
            min_distance: closest.0,
            closest_n: closest.1,
        });
    }
    Ok(RecurrenceRecord {
        epsilon,
        n_max,
        times,
        distances,
    })
}

/// Smallest `n` such that `‖E^m(ρ) − E^m(ρ_φ)‖_HS < tol` for every `m` in `n..=n_max`.
pub fn steady_regime_burn_in(
    e: &Superoperator,
    rho: &DensityOperator,
    rho_phi: &DensityOperator,
    tol: f64,
    n_max: usize,
) -> Option<usize> {
    let mut a = vectorize(rho.matrix());
    let mut b = vectorize(rho_phi.matrix());
    let mut burn_in = None;
    if (&a - &b).norm() < tol {
        burn_in = Some(0);
    }
    for n in 1..=n_max {
        a = e.matrix() * &a;
        b = e.matrix() * &b;
        if (&a - &b).norm() < tol {
            burn_in.get_or_insert(n);
        } else {
            burn_in = None;
        }
    }
    burn_in
}

#[derive(Clone, Debug)]
pub struct FixedPoints {
    /// HS-orthonormal basis of the eigenvalue-1 eigenspace.
    pub basis: Vec<CMatrix>,
    /// A fixed density operator, when one was found in the eigenspace.
    pub state: Option<DensityOperator>,
}

/// Fixed points of `E`: the eigenvalue-1 eigenspace and, when available, a fixed state.
///
/// The state is the eigenvalue-1 spectral projection of `1/d`, accepted only
/// after its Hermitian part passes density validation.
pub fn fixed_points(e: &Superoperator) -> Result<FixedPoints> {
    let eigs = spectrum(e)?;
    let one = c64(1.0, 0.0);
    let mult = eigs.iter().filter(|z| (*z - one).norm() < CLUSTER_TOL.max(TAU_PERIP)).count();
    if mult == 0 {
        return Ok(FixedPoints {
            basis: Vec::new(),
            state: None,
        });
    }
    let d = e.dim();
    let n = d * d;
    let shifted = e.matrix() - CMatrix::identity(n, n);
    let (right, _) = null_space(&shifted, mult)?;
    let basis = right.column_iter().map(|v| unvectorize(&v.into_owned(), d)).collect();
    let state = match biorthogonal_projector(e.matrix(), one, mult) {
        Ok(p1) => {
            let image = unvectorize(&(p1 * vectorize(&identity(d).unscale(d as f64))), d);
            validate_density(crate::operators::hermitian_part(&image)).ok()
        }
        Err(_) => None,
    };
    Ok(FixedPoints { basis, state })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{
        bare_measurement, identity_channel, partial_thermalization, to_superoperator, unitary_channel,
    };
    use crate::operators::{diag_real, gibbs_state, pauli, real_matrix, HermitianOperator};

    fn sigma_z_measurement() -> Superoperator {
        to_superoperator(&bare_measurement(vec![diag_real(&[1., 0.]), diag_real(&[0., 1.])]).unwrap())
    }

    fn sigma_x_measurement() -> Superoperator {
        to_superoperator(
            &bare_measurement(vec![
                real_matrix(2, &[0.5, 0.5, 0.5, 0.5]),
                real_matrix(2, &[0.5, -0.5, -0.5, 0.5]),
            ])
            .unwrap(),
        )
    }

    fn phase_unitary(theta: f64) -> CMatrix {
        let mut u = identity(2);
        u[(1, 1)] = Complex64::from_polar(1.0, theta);
        u
    }

    fn assert_spectrum(actual: &[Complex64], expected: &[Complex64]) {
        assert_eq!(actual.len(), expected.len());
        let mut used = vec![false; expected.len()];
        for a in actual {
            let hit = expected
                .iter()
                .enumerate()
                .position(|(j, b)| !used[j] && (a - b).norm() < 1e-10)
                .unwrap_or_else(|| panic!("unexpected eigenvalue {a}"));
            used[hit] = true;
        }
    }

    #[test]
    fn spectrum_examples() {
        let id = to_superoperator(&identity_channel(2));
        assert_spectrum(&spectrum(&id).unwrap(), &[c64(1., 0.); 4]);

        let theta = 0.7;
        let u = to_superoperator(&unitary_channel(phase_unitary(theta)).unwrap());
        let e = Complex64::from_polar(1.0, theta);
        assert_spectrum(&spectrum(&u).unwrap(), &[c64(1., 0.), c64(1., 0.), e, e.conj()]);

        assert_spectrum(
            &spectrum(&sigma_z_measurement()).unwrap(),
            &[c64(1., 0.), c64(1., 0.), c64(0., 0.), c64(0., 0.)],
        );
    }

    #[test]
    fn projector_examples() {
        let id = to_superoperator(&identity_channel(3));
        let pd = peripheral_projector(&id, TAU_PERIP).unwrap();
        assert!(hs_norm(&(pd.projector.matrix() - identity(9))) < 1e-10);

        let z = sigma_z_measurement();
        let pd = peripheral_projector(&z, TAU_PERIP).unwrap();
        assert_eq!(pd.peripheral_indices.len(), 2);
        assert!(hs_norm(&(pd.projector.matrix() - z.matrix())) < 1e-10);
        assert!(pd.check(&z).all_within(1e-10));
    }

    #[test]
    fn contractive_channel_has_rank_one_projector() {
        let h = HermitianOperator::new(pauli::z().scale(0.5)).unwrap();
        let th = to_superoperator(&partial_thermalization(&h, 2.0, 0.5).unwrap());
        let pd = peripheral_projector(&th, TAU_PERIP).unwrap();
        assert_eq!(pd.peripheral_indices.len(), 1);
        let gibbs = gibbs_state(&h, 2.0).unwrap();
        let expected = vectorize(gibbs.matrix()) * vectorize(&identity(2)).adjoint();
        assert!(hs_norm(&(pd.projector.matrix() - expected)) < 1e-10);
    }

    #[test]
    fn cesaro_agrees_with_biorthogonal() {
        let theta = 2.0 * std::f64::consts::PI * 0.38;
        let u = unitary_channel(phase_unitary(theta)).unwrap();
        let m = bare_measurement(vec![
            diag_real(&[0.8f64.sqrt(), 0.3f64.sqrt()]),
            diag_real(&[0.2f64.sqrt(), 0.7f64.sqrt()]),
        ])
        .unwrap();
        let e = crate::channels::compose(&[&m, &u]).unwrap();
        let a = peripheral_projector(&e, TAU_PERIP).unwrap();
        let b = peripheral_projector_cesaro(&e, TAU_PERIP).unwrap();
        assert_eq!(b.method, ProjectorMethod::Cesaro);
        assert!(hs_norm(&(a.projector.matrix() - b.projector.matrix())) < 1e-7);
    }

    #[test]
    fn project_examples() {
        let x = sigma_x_measurement();
        let pd = peripheral_projector(&x, TAU_PERIP).unwrap();
        let ground = DensityOperator::pure(&[c64(0., 0.), c64(1., 0.)]).unwrap();
        let phi = project_peripheral(&pd, &ground).unwrap();
        assert!(hs_norm(&(phi.matrix() - identity(2).unscale(2.0))) < 1e-10);
        let again = project_peripheral(&pd, &phi).unwrap();
        assert!(hs_norm(&(again.matrix() - phi.matrix())) < 1e-10);

        let id = to_superoperator(&identity_channel(2));
        let pd = peripheral_projector(&id, TAU_PERIP).unwrap();
        let rho = crate::random::random_density(2, 2, &mut crate::random::rng_from_seed(1));
        assert!(hs_norm(&(project_peripheral(&pd, &rho).unwrap().matrix() - rho.matrix())) < 1e-10);
    }

    #[test]
    fn recurrences_of_fixed_point_and_limit_cycle() {
        let id = to_superoperator(&identity_channel(2));
        let rho = DensityOperator::maximally_mixed(2);
        let rec = find_recurrences(&id, &rho, 1e-6, 50).unwrap();
        assert_eq!(rec.times, (1..=50).collect::<Vec<_>>());

        let flip = to_superoperator(&unitary_channel(pauli::x()).unwrap());
        let excited = DensityOperator::pure(&[c64(1., 0.), c64(0., 0.)]).unwrap();
        let rec = find_recurrences(&flip, &excited, 1e-6, 20).unwrap();
        assert_eq!(rec.times, vec![2, 4, 6, 8, 10, 12, 14, 16, 18, 20]);
        assert!(rec.distances.iter().all(|&d| d < 1e-6));
    }

    #[test]
    fn quasi_periodic_recurrence_matches_diophantine_scan() {
        let alpha = 0.38;
        let u = to_superoperator(&unitary_channel(phase_unitary(2.0 * std::f64::consts::PI * alpha)).unwrap());
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = DensityOperator::pure(&[c64(s, 0.), c64(s, 0.)]).unwrap();
        let eps = 1e-2;
        let rec = find_recurrences(&u, &plus, eps, 200).unwrap();
        // Oracle: the distance is √2·|sin(π α n)|.
        let oracle: Vec<usize> = (1..=200usize)
            .filter(|&n| 2f64.sqrt() * (std::f64::consts::PI * alpha * n as f64).sin().abs() < eps)
            .collect();
        assert_eq!(rec.times, oracle);
        assert_eq!(rec.times[0], 50);
        // Convergent denominators of 0.38 = 19/50 from its continued fraction.
        let (mut p, mut q) = (19usize, 50usize);
        let mut terms = Vec::new();
        while p != 0 {
            terms.push(q / p);
            (p, q) = (q % p, p);
        }
        let (mut prev, mut cur) = (0usize, 1usize);
        let mut denominators = Vec::new();
        for a in terms {
            (prev, cur) = (cur, a * cur + prev);
            denominators.push(cur);
        }
        assert!(denominators.contains(&rec.times[0]));
        assert_eq!(*denominators.last().unwrap(), 50);
    }

    #[test]
    fn no_recurrence_reports_closest_approach() {
        let h = HermitianOperator::new(pauli::z().scale(0.5)).unwrap();
        let th = to_superoperator(&partial_thermalization(&h, 2.0, 0.5).unwrap());
        let excited = DensityOperator::pure(&[c64(1., 0.), c64(0., 0.)]).unwrap();
        match find_recurrences(&th, &excited, 1e-6, 100) {
            Err(Error::NoRecurrenceFound { min_distance, closest_n, .. }) => {
                assert!(min_distance > 0.1);
                assert_eq!(closest_n, 1);
            }
            other => panic!("expected NoRecurrenceFound, got {other:?}"),
        }
    }

    #[test]
    fn fixed_point_examples() {
        let z = sigma_z_measurement();
        let fp = fixed_points(&z).unwrap();
        assert_eq!(fp.basis.len(), 2);
        for b in &fp.basis {
            assert!(b[(0, 1)].norm() < 1e-12 && b[(1, 0)].norm() < 1e-12);
        }
        let x = sigma_x_measurement();
        let fp = fixed_points(&x).unwrap();
        let state = fp.state.unwrap();
        assert!(hs_norm(&(state.matrix() - identity(2).unscale(2.0))) < 1e-10);

        let h = HermitianOperator::new(real_matrix(3, &[1., 0.2, 0., 0.2, -0.5, 0.3, 0., 0.3, 0.1])).unwrap();
        let th = to_superoperator(&partial_thermalization(&h, 1.3, 0.5).unwrap());
        let fp = fixed_points(&th).unwrap();
        assert_eq!(fp.basis.len(), 1);
        let gibbs = gibbs_state(&h, 1.3).unwrap();
        assert!(hs_norm(&(fp.state.unwrap().matrix() - gibbs.matrix())) < 1e-10);
    }

    #[test]
    fn burn_in_is_reported_for_contractive_cycle() {
        let h = HermitianOperator::new(pauli::z().scale(0.5)).unwrap();
        let th = to_superoperator(&partial_thermalization(&h, 2.0, 0.5).unwrap());
        let pd = peripheral_projector(&th, TAU_PERIP).unwrap();
        let excited = DensityOperator::pure(&[c64(1., 0.), c64(0., 0.)]).unwrap();
        let phi = project_peripheral(&pd, &excited).unwrap();
        let n = steady_regime_burn_in(&th, &excited, &phi, 1e-6, 100).unwrap();
        // Distance halves every cycle from ‖|e⟩⟨e| − gibbs‖.
        let d0 = hs_norm(&(excited.matrix() - phi.matrix()));
        let expected = (1..).find(|&k| d0 * 0.5f64.powi(k) < 1e-6).unwrap() as usize;
        assert_eq!(n, expected);
    }
}
