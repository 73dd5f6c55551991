//! Quantum channels in Kraus and superoperator form.
//!
//! Superoperators act on column-stacked operators: `vec(X)[i + d·j] = X[i, j]`,
//! so that `vec(AXB) = (Bᵀ ⊗ A) vec(X)` and conjugation by `K` becomes
//! `conj(K) ⊗ K`. Column stacking is also nalgebra's storage order.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{
    c64, gibbs_weights, hermitian_part, hermitian_spectrum, hermiticity_deviation, hs_norm,
    identity, polar_decompose, psd_sqrt_matrix, tol, unitarity_deviation, validate_density,
    CMatrix, DensityOperator, HermitianOperator,
};
use crate::random::{ginibre, rng_from_seed};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChannelKind {
    BareMeasurement,
    GeneralMeasurement,
    Unitary,
    Feedback,
    Thermal,
    Composite,
}

/// Bare measurement operators `M_s ≥ 0` together with outcome-conditioned unitaries `U_s`.
#[derive(Clone, Debug)]
pub struct MeasurementParts {
    pub measurement: Vec<CMatrix>,
    pub unitaries: Vec<CMatrix>,
}

#[derive(Clone, Debug)]
pub struct KrausChannel {
    dim: usize,
    kraus_ops: Vec<CMatrix>,
    kind: ChannelKind,
    parts: Option<MeasurementParts>,
    thermal: Option<ThermalParams>,
}

/// Parameters of a partial thermalization channel.
#[derive(Clone, Debug)]
pub struct ThermalParams {
    pub hamiltonian: HermitianOperator,
    pub beta: f64,
    pub lambda: f64,
}

impl KrausChannel {
    fn from_ops(ops: Vec<CMatrix>, kind: ChannelKind) -> Result<Self> {
        let dim = check_op_shapes(&ops)?;
        let residual = kraus_residual(&ops);
        if residual > tol::KRAUS {
            return Err(Error::KrausViolation { residual });
        }
        Ok(Self {
            dim,
            kraus_ops: ops,
            kind,
            parts: None,
            thermal: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn kraus_ops(&self) -> &[CMatrix] {
        &self.kraus_ops
    }

    /// Stored measurement/feedback split, present for feedback channels.
    pub fn parts(&self) -> Option<&MeasurementParts> {
        self.parts.as_ref()
    }

    pub fn thermal_params(&self) -> Option<&ThermalParams> {
        self.thermal.as_ref()
    }

    /// Linear action `Σ K X K†` on an arbitrary operator.
    pub fn apply_operator(&self, x: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for k in &self.kraus_ops {
            out += k * x * k.adjoint();
        }
        out
    }

    /// Adjoint (Heisenberg) action `Σ K† X K`.
    pub fn apply_adjoint(&self, x: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for k in &self.kraus_ops {
            out += k.adjoint() * x * k;
        }
        out
    }

    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        apply(self, rho)
    }

    /// Whether every Kraus operator is Hermitian within `τ_herm`.
    pub fn has_hermitian_kraus(&self) -> Option<usize> {
        self.kraus_ops
            .iter()
            .position(|k| hermiticity_deviation(k) > tol::HERM * hs_norm(k).max(1.0))
    }

    /// Split into a bare measurement followed by outcome-conditioned unitaries.
    ///
    /// Feedback channels return their stored parts; general measurements go
    /// through [`polar_split`]; a unitary channel is `{1}` followed by `{U}`.
    /// Thermal and composite channels have no such split.
    pub fn measurement_parts(&self) -> Option<(KrausChannel, Vec<CMatrix>)> {
        match self.kind {
            ChannelKind::BareMeasurement => {
                let us = vec![identity(self.dim); self.kraus_ops.len()];
                Some((self.clone(), us))
            }
            ChannelKind::Feedback => {
                let parts = self.parts.as_ref()?;
                let bare = KrausChannel {
                    dim: self.dim,
                    kraus_ops: parts.measurement.clone(),
                    kind: ChannelKind::BareMeasurement,
                    parts: None,
                    thermal: None,
                };
                Some((bare, parts.unitaries.clone()))
            }
            ChannelKind::GeneralMeasurement | ChannelKind::Unitary => polar_split(self).ok(),
            ChannelKind::Thermal | ChannelKind::Composite => None,
        }
    }
}

fn check_op_shapes(ops: &[CMatrix]) -> Result<usize> {
    let first = ops.first().ok_or(Error::KrausViolation { residual: f64::INFINITY })?;
    let dim = first.nrows();
    if dim < 2 {
        return Err(Error::DimTooSmall(dim));
    }
    for op in ops {
        if op.nrows() != op.ncols() {
            return Err(Error::NotSquare {
                rows: op.nrows(),
                cols: op.ncols(),
            });
        }
        if op.nrows() != dim {
            return Err(Error::DimMismatch {
                expected: dim,
                found: op.nrows(),
            });
        }
    }
    Ok(dim)
}

/// `‖Σ K†K − 1‖_HS`.
pub fn kraus_residual(ops: &[CMatrix]) -> f64 {
    let dim = ops[0].nrows();
    let mut sum = CMatrix::zeros(dim, dim);
    for k in ops {
        sum += k.adjoint() * k;
    }
    hs_norm(&(sum - identity(dim)))
}

/// `‖Σ K K† − 1‖_HS`.
pub fn unitality_residual(ops: &[CMatrix]) -> f64 {
    let dim = ops[0].nrows();
    let mut sum = CMatrix::zeros(dim, dim);
    for k in ops {
        sum += k * k.adjoint();
    }
    hs_norm(&(sum - identity(dim)))
}

fn check_psd_operator(index: usize, m: &CMatrix) -> Result<()> {
    let scale = hs_norm(m).max(1.0);
    let deviation = hermiticity_deviation(m);
    if deviation > tol::HERM * scale {
        return Err(Error::NotPsdOperator {
            index,
            reason: format!("not Hermitian, deviation {deviation:.3e}"),
        });
    }
    let min = *hermitian_spectrum(m).eigenvalues.last().expect("nonempty");
    if min < -tol::PSD * scale {
        return Err(Error::NotPsdOperator {
            index,
            reason: format!("min eigenvalue {min:.3e}"),
        });
    }
    Ok(())
}

/// Nonselective bare measurement `ρ ↦ Σ M_s ρ M_s` with `M_s ≥ 0`, `Σ M_s² = 1`.
pub fn bare_measurement(ops: Vec<CMatrix>) -> Result<KrausChannel> {
    check_op_shapes(&ops)?;
    for (i, m) in ops.iter().enumerate() {
        check_psd_operator(i, m)?;
    }
    let ops = ops.iter().map(hermitian_part).collect();
    KrausChannel::from_ops(ops, ChannelKind::BareMeasurement)
}

/// Measurement with arbitrary Kraus operators.
pub fn general_measurement(ops: Vec<CMatrix>) -> Result<KrausChannel> {
    KrausChannel::from_ops(ops, ChannelKind::GeneralMeasurement)
}

pub fn identity_channel(dim: usize) -> KrausChannel {
    KrausChannel {
        dim,
        kraus_ops: vec![identity(dim)],
        kind: ChannelKind::BareMeasurement,
        parts: None,
        thermal: None,
    }
}

fn check_unitary(index: usize, u: &CMatrix) -> Result<()> {
    if u.nrows() != u.ncols() {
        return Err(Error::NotSquare {
            rows: u.nrows(),
            cols: u.ncols(),
        });
    }
    let deviation = unitarity_deviation(u);
    if deviation > tol::RECON {
        return Err(Error::NotUnitary { index, deviation });
    }
    Ok(())
}

pub fn unitary_channel(u: CMatrix) -> Result<KrausChannel> {
    check_unitary(0, &u)?;
    KrausChannel::from_ops(vec![u], ChannelKind::Unitary)
}

/// Bare measurement followed by outcome-conditioned unitaries: Kraus set `{U_s M_s}`.
pub fn feedback_from_measurement(ms: Vec<CMatrix>, us: Vec<CMatrix>) -> Result<KrausChannel> {
    if ms.len() != us.len() {
        return Err(Error::LengthMismatch {
            measurements: ms.len(),
            unitaries: us.len(),
        });
    }
    let bare = bare_measurement(ms)?;
    for (i, u) in us.iter().enumerate() {
        check_unitary(i, u)?;
        if u.nrows() != bare.dim {
            return Err(Error::DimMismatch {
                expected: bare.dim,
                found: u.nrows(),
            });
        }
    }
    let ops = bare
        .kraus_ops
        .iter()
        .zip(us.iter())
        .map(|(m, u)| u * m)
        .collect();
    let mut ch = KrausChannel::from_ops(ops, ChannelKind::Feedback)?;
    ch.parts = Some(MeasurementParts {
        measurement: bare.kraus_ops,
        unitaries: us,
    });
    Ok(ch)
}

/// Polar split `K_s = U_s M_s` of every Kraus operator.
///
/// On the kernel of a singular `M_s` the unitary is fixed by the SVD pairing.
pub fn polar_split(ch: &KrausChannel) -> Result<(KrausChannel, Vec<CMatrix>)> {
    let mut ms = Vec::with_capacity(ch.kraus_ops.len());
    let mut us = Vec::with_capacity(ch.kraus_ops.len());
    for k in &ch.kraus_ops {
        let (u, p) = polar_decompose(k)?;
        ms.push(p);
        us.push(u);
    }
    Ok((bare_measurement(ms)?, us))
}

/// `ρ ↦ (1−λ)ρ + λ·Tr(ρ)·gibbs(H, β)` with Kraus operators
/// `{√(1−λ)·1} ∪ {√(λ p_j)|e_j⟩⟨e_k|}` in the eigenbasis of `H`.
pub fn partial_thermalization(h: &HermitianOperator, beta: f64, lambda: f64) -> Result<KrausChannel> {
    if !beta.is_finite() || beta < 0.0 {
        return Err(Error::ParamOutOfRange { name: "beta", value: beta });
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::ParamOutOfRange {
            name: "lambda",
            value: lambda,
        });
    }
    let dim = h.dim();
    let spec = h.spectrum();
    let weights = gibbs_weights(&spec.eigenvalues, beta);
    let mut ops = Vec::new();
    if lambda < 1.0 {
        ops.push(identity(dim).scale((1.0 - lambda).sqrt()));
    }
    if lambda > 0.0 {
        let v = &spec.eigenvectors;
        for (j, p) in weights.iter().enumerate() {
            let amp = (lambda * p).sqrt();
            if amp == 0.0 {
                continue;
            }
            for k in 0..dim {
                let op = CMatrix::from_fn(dim, dim, |a, b| v[(a, j)] * v[(b, k)].conj() * amp);
                ops.push(op);
            }
        }
    }
    let mut ch = KrausChannel::from_ops(ops, ChannelKind::Thermal)?;
    ch.thermal = Some(ThermalParams {
        hamiltonian: h.clone(),
        beta,
        lambda,
    });
    Ok(ch)
}

/// `Σ K ρ K†`, revalidated as a density operator.
pub fn apply(ch: &KrausChannel, rho: &DensityOperator) -> Result<DensityOperator> {
    if ch.dim != rho.dim() {
        return Err(Error::DimMismatch {
            expected: ch.dim,
            found: rho.dim(),
        });
    }
    validate_density(ch.apply_operator(rho.matrix()))
}

pub fn vectorize(x: &CMatrix) -> DVector<Complex64> {
    DVector::from_column_slice(x.as_slice())
}

pub fn unvectorize(v: &DVector<Complex64>, dim: usize) -> CMatrix {
    CMatrix::from_column_slice(dim, dim, v.as_slice())
}

/// Linear map on `d × d` operators as a `d² × d²` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: CMatrix,
}

impl Superoperator {
    pub fn new(dim: usize, matrix: CMatrix) -> Result<Self> {
        let n = dim * dim;
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimMismatch {
                expected: n,
                found: matrix.nrows(),
            });
        }
        Ok(Self { dim, matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            matrix: identity(dim * dim),
        }
    }

    /// Superoperator of an arbitrary linear map, read off its action on matrix units.
    pub fn from_map(dim: usize, map: impl Fn(&CMatrix) -> CMatrix) -> Self {
        let n = dim * dim;
        let mut matrix = CMatrix::zeros(n, n);
        for col in 0..n {
            let mut unit = CMatrix::zeros(dim, dim);
            unit[(col % dim, col / dim)] = c64(1.0, 0.0);
            let image = map(&unit);
            for (row, z) in image.iter().enumerate() {
                matrix[(row, col)] = *z;
            }
        }
        Self { dim, matrix }
    }

    /// Transpose map `X ↦ Xᵀ`: positive, trace preserving, not completely positive.
    pub fn transpose_map(dim: usize) -> Self {
        Self::from_map(dim, |x| x.transpose())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn apply_operator(&self, x: &CMatrix) -> CMatrix {
        unvectorize(&(&self.matrix * vectorize(x)), self.dim)
    }

    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        if rho.dim() != self.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                found: rho.dim(),
            });
        }
        validate_density(self.apply_operator(rho.matrix()))
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &Superoperator) -> Result<Superoperator> {
        if next.dim != self.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                found: next.dim,
            });
        }
        Ok(Superoperator {
            dim: self.dim,
            matrix: &next.matrix * &self.matrix,
        })
    }

    /// Choi matrix `Σ_{ij} E_ij ⊗ Φ(E_ij)`, indexed `[(i·d + k), (j·d + l)] = Φ(E_ij)[k, l]`.
    pub fn choi(&self) -> CMatrix {
        let d = self.dim;
        let mut choi = CMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                let col = i + d * j;
                for k in 0..d {
                    for l in 0..d {
                        choi[(i * d + k, j * d + l)] = self.matrix[(k + d * l, col)];
                    }
                }
            }
        }
        choi
    }

    /// Matrix in the orthonormal Hermitian operator basis of [`hermitian_operator_basis`].
    pub fn in_hermitian_basis(&self) -> CMatrix {
        let basis = hermitian_basis_matrix(self.dim);
        basis.adjoint() * &self.matrix * basis
    }

    /// `‖M̂†vec(1) − vec(1)‖`: zero iff trace preserving.
    pub fn trace_preservation_residual(&self) -> f64 {
        let one = vectorize(&identity(self.dim));
        (self.matrix.adjoint() * &one - &one).norm()
    }

    /// `‖M̂ vec(1) − vec(1)‖`: zero iff unital.
    pub fn unitality_residual(&self) -> f64 {
        let one = vectorize(&identity(self.dim));
        (&self.matrix * &one - &one).norm()
    }
}

/// `Σ_s conj(K_s) ⊗ K_s`.
pub fn to_superoperator(ch: &KrausChannel) -> Superoperator {
    let n = ch.dim * ch.dim;
    let mut matrix = CMatrix::zeros(n, n);
    for k in &ch.kraus_ops {
        matrix += k.conjugate().kronecker(k);
    }
    Superoperator { dim: ch.dim, matrix }
}

/// Superoperator of the sequence `chs`, listed in order of application:
/// `compose(&[a, b, c])` is `c ∘ b ∘ a`.
pub fn compose(chs: &[&KrausChannel]) -> Result<Superoperator> {
    let first = chs.first().ok_or(Error::DimTooSmall(0))?;
    let mut acc = Superoperator::identity(first.dim);
    for ch in chs {
        if ch.dim != first.dim {
            return Err(Error::DimMismatch {
                expected: first.dim,
                found: ch.dim,
            });
        }
        acc = acc.then(&to_superoperator(ch))?;
    }
    Ok(acc)
}

/// Orthonormal Hermitian operator basis: `1/√d`, then symmetric and
/// antisymmetric off-diagonal generators, then the traceless diagonal ones.
pub fn hermitian_operator_basis(dim: usize) -> Vec<CMatrix> {
    let mut basis = vec![identity(dim).unscale((dim as f64).sqrt())];
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..dim {
        for k in (j + 1)..dim {
            let mut sym = CMatrix::zeros(dim, dim);
            sym[(j, k)] = c64(s, 0.0);
            sym[(k, j)] = c64(s, 0.0);
            basis.push(sym);
            let mut anti = CMatrix::zeros(dim, dim);
            anti[(j, k)] = c64(0.0, -s);
            anti[(k, j)] = c64(0.0, s);
            basis.push(anti);
        }
    }
    for l in 1..dim {
        let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
        let mut diag = CMatrix::zeros(dim, dim);
        for j in 0..l {
            diag[(j, j)] = c64(norm, 0.0);
        }
        diag[(l, l)] = c64(-(l as f64) * norm, 0.0);
        basis.push(diag);
    }
    basis
}

fn hermitian_basis_matrix(dim: usize) -> CMatrix {
    let basis = hermitian_operator_basis(dim);
    let n = dim * dim;
    let mut b = CMatrix::zeros(n, n);
    for (col, g) in basis.iter().enumerate() {
        for (row, z) in g.iter().enumerate() {
            b[(row, col)] = *z;
        }
    }
    b
}

/// Structural properties of a channel, each with the size of its worst violation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelReport {
    pub trace_preserving: bool,
    pub unital: bool,
    pub self_dual: bool,
    pub completely_positive: bool,
    pub spectrum_nonnegative: bool,
    pub worst_violation: ChannelViolations,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelViolations {
    pub trace_preserving: f64,
    pub unital: f64,
    pub self_dual: f64,
    pub completely_positive: f64,
    pub spectrum_nonnegative: f64,
}

pub fn classify(ch: &KrausChannel) -> ChannelReport {
    let sup = to_superoperator(ch);
    let mut report = classify_superoperator(&sup);
    let tp = kraus_residual(&ch.kraus_ops);
    let unital = unitality_residual(&ch.kraus_ops);
    report.worst_violation.trace_preserving = tp;
    report.worst_violation.unital = unital;
    report.trace_preserving = tp <= tol::KRAUS;
    report.unital = unital <= tol::KRAUS;
    report
}

/// Classification of a map given only by its superoperator (e.g. the transpose map).
pub fn classify_superoperator(sup: &Superoperator) -> ChannelReport {
    let d = sup.dim;
    let tp = sup.trace_preservation_residual();
    let unital = sup.unitality_residual();

    let in_basis = sup.in_hermitian_basis();
    let scale = hs_norm(&in_basis).max(1.0);
    let self_dual_dev = hermiticity_deviation(&in_basis);
    let self_dual = self_dual_dev <= tol::HERM * scale;

    let choi_min = *hermitian_spectrum(&sup.choi())
        .eigenvalues
        .last()
        .expect("nonempty");
    let cp_violation = (-choi_min).max(0.0);
    let completely_positive = choi_min >= -tol::PSD * d as f64;

    let spectrum_violation = if self_dual {
        let min = *hermitian_spectrum(&in_basis).eigenvalues.last().expect("nonempty");
        (-min).max(0.0)
    } else {
        match crate::spectral::eigenvalues_of(&sup.matrix) {
            Ok(eigs) => eigs
                .iter()
                .fold(0.0f64, |acc, z| acc.max(z.im.abs()).max(-z.re)),
            Err(_) => f64::INFINITY,
        }
    };
    ChannelReport {
        trace_preserving: tp <= tol::KRAUS,
        unital: unital <= tol::KRAUS,
        self_dual,
        completely_positive,
        spectrum_nonnegative: spectrum_violation <= tol::PSD,
        worst_violation: ChannelViolations {
            trace_preserving: tp,
            unital,
            self_dual: self_dual_dev,
            completely_positive: cp_violation,
            spectrum_nonnegative: spectrum_violation,
        },
    }
}

const SAMPLE_RETRIES: usize = 16;

/// Random bare measurement with `n_outcomes` outcomes, deterministic in `seed`.
///
/// Draws `A_s = G_s G_s†`, normalizes `E_s = S^{−1/2} A_s S^{−1/2}` with
/// `S = Σ A_s`, and returns `M_s = √E_s`.
pub fn sample_random_bare_measurement(dim: usize, n_outcomes: usize, seed: u64) -> Result<KrausChannel> {
    let mut rng = rng_from_seed(seed);
    random_bare_measurement(dim, n_outcomes, &mut rng)
}

pub fn random_bare_measurement<R: rand::Rng + ?Sized>(
    dim: usize,
    n_outcomes: usize,
    rng: &mut R,
) -> Result<KrausChannel> {
    if n_outcomes == 0 {
        return Err(Error::ParamOutOfRange {
            name: "n_outcomes",
            value: 0.0,
        });
    }
    if dim < 2 {
        return Err(Error::DimTooSmall(dim));
    }
    if n_outcomes == 1 {
        return Ok(identity_channel(dim));
    }
    for _ in 0..SAMPLE_RETRIES {
        let effects: Vec<CMatrix> = (0..n_outcomes)
            .map(|_| {
                let g = ginibre(dim, dim, rng);
                &g * g.adjoint()
            })
            .collect();
        let mut total = CMatrix::zeros(dim, dim);
        for a in &effects {
            total += a;
        }
        let spec = hermitian_spectrum(&total);
        let max = spec.eigenvalues[0];
        let min = *spec.eigenvalues.last().expect("nonempty");
        if min <= 1e-10 * max {
            continue;
        }
        let inv_sqrt = spec.map(|x| 1.0 / x.sqrt());
        let ops = effects
            .iter()
            .map(|a| psd_sqrt_matrix(&hermitian_part(&(&inv_sqrt * a * &inv_sqrt))))
            .collect::<Result<Vec<_>>>()?;
        return bare_measurement(ops);
    }
    Err(Error::DegenerateSample {
        attempts: SAMPLE_RETRIES,
    })
}
