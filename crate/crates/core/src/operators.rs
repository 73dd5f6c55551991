//! Hermitian operator algebra on finite-dimensional Hilbert spaces.
//!
//! Density operators, Hamiltonians and the handful of spectral functions the
//! rest of the crate is built on: von Neumann entropy, Hilbert-Schmidt
//! geometry, PSD square roots, polar decomposition, Gibbs states and
//! majorization. Entropies are in nats.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix used for operators and superoperators alike.
pub type CMatrix = DMatrix<Complex64>;

/// Numerical tolerances shared across the crate.
pub mod tol {
    /// Hermiticity, relative to `max(1, ‖A‖_HS)`.
    pub const HERM: f64 = 1e-10;
    /// Most negative eigenvalue accepted (and clipped to zero) for PSD operators.
    pub const PSD: f64 = 1e-10;
    /// Allowed deviation of a density operator's trace from one.
    pub const TRACE: f64 = 1e-10;
    /// Reconstruction and unitarity checks.
    pub const RECON: f64 = 1e-9;
    /// Partial-sum slack in majorization comparisons.
    pub const MAJOR: f64 = 1e-9;
    /// Kraus completeness `‖Σ K†K − 1‖_HS`.
    pub const KRAUS: f64 = 1e-9;
    /// Outcome probabilities below this are dropped from ensemble sums.
    pub const PROB: f64 = 1e-12;
}

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

/// Matrix from real row-major entries.
pub fn real_matrix(dim: usize, entries: &[f64]) -> CMatrix {
    assert_eq!(entries.len(), dim * dim, "need dim*dim entries");
    CMatrix::from_row_iterator(dim, dim, entries.iter().map(|&x| c64(x, 0.0)))
}

pub fn diag_real(values: &[f64]) -> CMatrix {
    let n = values.len();
    CMatrix::from_fn(n, n, |i, j| if i == j { c64(values[i], 0.0) } else { c64(0.0, 0.0) })
}

/// `|v⟩⟨v|` for a (not necessarily normalized) vector.
pub fn ket_bra(v: &[Complex64]) -> CMatrix {
    let n = v.len();
    CMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj())
}

/// Pauli matrices in the basis `(|e⟩, |g⟩)`, so `σ_z|g⟩ = −|g⟩`.
pub mod pauli {
    use super::{c64, CMatrix};

    pub fn x() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c64(0., 0.), c64(1., 0.), c64(1., 0.), c64(0., 0.)])
    }

    pub fn y() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c64(0., 0.), c64(0., -1.), c64(0., 1.), c64(0., 0.)])
    }

    pub fn z() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c64(1., 0.), c64(0., 0.), c64(0., 0.), c64(-1., 0.)])
    }
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Hilbert-Schmidt inner product `(X|Y) = Tr(X†Y)`.
pub fn hs_inner(x: &CMatrix, y: &CMatrix) -> Result<Complex64> {
    check_same_shape(x, y)?;
    Ok(x.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum())
}

pub fn hs_norm(x: &CMatrix) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn check_same_shape(x: &CMatrix, y: &CMatrix) -> Result<()> {
    if x.shape() != y.shape() {
        return Err(Error::DimMismatch {
            expected: x.nrows(),
            found: y.nrows(),
        });
    }
    Ok(())
}

pub(crate) fn check_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

/// `‖A − A†‖_HS`.
pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    hs_norm(&(m - m.adjoint()))
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// `‖U†U − 1‖_HS`.
pub fn unitarity_deviation(u: &CMatrix) -> f64 {
    let n = u.ncols();
    hs_norm(&(u.adjoint() * u - identity(n)))
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues sorted descending.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Columns are the eigenvectors matching `eigenvalues`.
    pub eigenvectors: CMatrix,
}

impl Spectrum {
    /// `V diag(f(λ)) V†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let v = &self.eigenvectors;
        let n = v.nrows();
        let mut scaled = v.clone();
        for (j, &lam) in self.eigenvalues.iter().enumerate() {
            let s = f(lam);
            for i in 0..n {
                scaled[(i, j)] *= s;
            }
        }
        scaled * v.adjoint()
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.map(|x| x)
    }
}

/// Eigendecomposition of the Hermitian part of `m`.
pub fn hermitian_spectrum(m: &CMatrix) -> Spectrum {
    let h = hermitian_part(m);
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = CMatrix::from_fn(m.nrows(), order.len(), |i, j| eig.eigenvectors[(i, order[j])]);
    Spectrum {
        eigenvalues,
        eigenvectors,
    }
}

/// Sum of absolute eigenvalues of the Hermitian part.
pub fn trace_norm_hermitian(m: &CMatrix) -> f64 {
    hermitian_spectrum(m).eigenvalues.iter().map(|x| x.abs()).sum()
}

/// Largest absolute eigenvalue of the Hermitian part (operator norm for Hermitian input).
pub fn operator_norm_hermitian(m: &CMatrix) -> f64 {
    hermitian_spectrum(m)
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, x| acc.max(x.abs()))
}

/// A Hermitian operator of dimension at least two.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    matrix: CMatrix,
}

impl HermitianOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let dim = check_square(&matrix)?;
        if dim < 2 {
            return Err(Error::DimTooSmall(dim));
        }
        let deviation = hermiticity_deviation(&matrix);
        if deviation > tol::HERM * hs_norm(&matrix).max(1.0) {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self {
            matrix: hermitian_part(&matrix),
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn spectrum(&self) -> Spectrum {
        hermitian_spectrum(&self.matrix)
    }

    pub fn operator_norm(&self) -> f64 {
        operator_norm_hermitian(&self.matrix)
    }
}

/// Hermitian, positive semidefinite, unit-trace operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
}

impl DensityOperator {
    pub fn new(raw: CMatrix) -> Result<Self> {
        validate_density(raw)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: identity(dim).unscale(dim as f64),
        }
    }

    /// `|ψ⟩⟨ψ|` after normalizing `ψ`.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::TraceMismatch { trace: 0.0 });
        }
        let v: Vec<Complex64> = psi.iter().map(|z| z / norm).collect();
        validate_density(ket_bra(&v))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn spectrum(&self) -> Spectrum {
        hermitian_spectrum(&self.matrix)
    }

    pub fn entropy(&self) -> f64 {
        von_neumann_entropy(self)
    }

    pub fn purity(&self) -> f64 {
        hs_norm(&self.matrix).powi(2)
    }

    /// Conjugation `UρU†`; `u` is assumed unitary.
    pub fn conjugate(&self, u: &CMatrix) -> Result<Self> {
        check_same_shape(&self.matrix, u)?;
        validate_density(u * &self.matrix * u.adjoint())
    }
}

/// Validate a raw matrix as a density operator.
///
/// Eigenvalues in `[−τ_psd, 0)` are clipped to zero and the trace renormalized.
pub fn validate_density(raw: CMatrix) -> Result<DensityOperator> {
    let dim = check_square(&raw)?;
    if dim < 2 {
        return Err(Error::DimTooSmall(dim));
    }
    let deviation = hermiticity_deviation(&raw);
    if deviation > tol::HERM * hs_norm(&raw).max(1.0) {
        return Err(Error::NotHermitian { deviation });
    }
    let herm = hermitian_part(&raw);
    let tr = trace(&herm).re;
    if (tr - 1.0).abs() > tol::TRACE {
        return Err(Error::TraceMismatch { trace: tr });
    }
    let spec = hermitian_spectrum(&herm);
    let min = *spec.eigenvalues.last().expect("dim >= 2");
    if min < -tol::PSD {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    let matrix = if min < 0.0 {
        let clipped = spec.map(|x| x.max(0.0));
        let t = trace(&clipped).re;
        clipped.unscale(t)
    } else {
        herm.unscale(tr)
    };
    Ok(DensityOperator { matrix })
}

/// `−Σ λ ln λ` over the eigenvalues, with eigenvalues below `τ_psd` dropped.
pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    entropy_of_eigenvalues(&rho.spectrum().eigenvalues)
}

pub(crate) fn entropy_of_eigenvalues(eigenvalues: &[f64]) -> f64 {
    let s: f64 = eigenvalues
        .iter()
        .filter(|&&x| x > tol::PSD)
        .map(|&x| -x * x.ln())
        .sum();
    s.max(0.0)
}

/// `Tr(Hρ)`; the imaginary part must vanish within `τ_herm`.
pub fn energy_expectation(h: &HermitianOperator, rho: &DensityOperator) -> Result<f64> {
    if h.dim() != rho.dim() {
        return Err(Error::DimMismatch {
            expected: h.dim(),
            found: rho.dim(),
        });
    }
    let e = hs_inner(h.matrix(), rho.matrix())?;
    if e.im.abs() > tol::HERM * h.matrix().norm().max(1.0) {
        return Err(Error::NotHermitian { deviation: e.im.abs() });
    }
    Ok(e.re)
}

/// Square root of a PSD matrix given as a raw Hermitian matrix.
pub fn psd_sqrt_matrix(a: &CMatrix) -> Result<CMatrix> {
    check_square(a)?;
    let deviation = hermiticity_deviation(a);
    let scale = hs_norm(a).max(1.0);
    if deviation > tol::HERM * scale {
        return Err(Error::NotHermitian { deviation });
    }
    let spec = hermitian_spectrum(a);
    let min = *spec.eigenvalues.last().unwrap_or(&0.0);
    if min < -tol::PSD * scale {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    Ok(spec.map(|x| x.max(0.0).sqrt()))
}

pub fn psd_sqrt(a: &HermitianOperator) -> Result<HermitianOperator> {
    let root = psd_sqrt_matrix(a.matrix())?;
    Ok(HermitianOperator {
        matrix: hermitian_part(&root),
    })
}

/// Polar decomposition `K = U P` with `P = √(K†K)`, computed from the SVD
/// `K = W Σ V†` as `U = W V†`, `P = V Σ V†`. For singular `K` the unitary is
/// completed on the kernel by the singular-vector pairing.
pub fn polar_decompose(k: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    let n = check_square(k)?;
    let svd = k.clone().svd(true, true);
    let w = svd.u.ok_or(Error::EigSolverFailure)?;
    let v_t = svd.v_t.ok_or(Error::EigSolverFailure)?;
    let u = &w * &v_t;
    let v = v_t.adjoint();
    let mut scaled = v.clone();
    for j in 0..n {
        let s = svd.singular_values[j];
        for i in 0..n {
            scaled[(i, j)] *= s;
        }
    }
    let p = hermitian_part(&(scaled * &v_t));
    Ok((u, p))
}

/// `e^{−βH} / Tr e^{−βH}`, evaluated on the spectrum shifted by its minimum.
pub fn gibbs_state(h: &HermitianOperator, beta: f64) -> Result<DensityOperator> {
    if !beta.is_finite() || beta < 0.0 {
        return Err(Error::ParamOutOfRange { name: "beta", value: beta });
    }
    let spec = h.spectrum();
    let weights = gibbs_weights(&spec.eigenvalues, beta);
    let mut scaled = spec.eigenvectors.clone();
    for (j, w) in weights.iter().enumerate() {
        for i in 0..scaled.nrows() {
            scaled[(i, j)] *= *w;
        }
    }
    validate_density(scaled * spec.eigenvectors.adjoint())
}

/// Normalized Boltzmann weights for the given energies.
pub fn gibbs_weights(energies: &[f64], beta: f64) -> Vec<f64> {
    let e_min = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let raw: Vec<f64> = energies.iter().map(|&e| (-beta * (e - e_min)).exp()).collect();
    let z: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / z).collect()
}

/// Smallest slack `Σ_{i≤k} λ↓_i(σ) − Σ_{i≤k} λ↓_i(τ)` over all `k`.
/// Nonnegative (up to roundoff) exactly when `σ` majorizes `τ`.
pub fn majorization_margin(sigma: &DensityOperator, tau: &DensityOperator) -> Result<f64> {
    if sigma.dim() != tau.dim() {
        return Err(Error::DimMismatch {
            expected: sigma.dim(),
            found: tau.dim(),
        });
    }
    let a = sigma.spectrum().eigenvalues;
    let b = tau.spectrum().eigenvalues;
    let mut sa = 0.0;
    let mut sb = 0.0;
    let mut margin = f64::INFINITY;
    for (x, y) in a.iter().zip(b.iter()) {
        sa += x;
        sb += y;
        margin = margin.min(sa - sb);
    }
    Ok(margin)
}

/// Whether `σ` majorizes `τ`, within `τ_major`.
pub fn majorizes(sigma: &DensityOperator, tau: &DensityOperator) -> Result<bool> {
    Ok(majorization_margin(sigma, tau)? >= -tol::MAJOR)
}

/// Largest absolute difference between the sorted spectra.
pub fn spectral_distance(a: &DensityOperator, b: &DensityOperator) -> f64 {
    let x = a.spectrum().eigenvalues;
    let y = b.spectrum().eigenvalues;
    x.iter().zip(y.iter()).fold(0.0f64, |acc, (p, q)| acc.max((p - q).abs()))
}
