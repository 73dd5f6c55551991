use thiserror::Error;

/// Errors raised by the operator, channel, spectral and engine layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension {0} is too small (need at least 2)")]
    DimTooSmall(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },

    #[error("operator is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("operator is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("trace {trace} differs from 1")]
    TraceMismatch { trace: f64 },

    #[error("measurement operator {index} is not positive semidefinite ({reason})")]
    NotPsdOperator { index: usize, reason: String },

    #[error("Kraus condition violated (residual {residual:.3e})")]
    KrausViolation { residual: f64 },

    #[error("operator {index} is not unitary (deviation {deviation:.3e})")]
    NotUnitary { index: usize, deviation: f64 },

    #[error("length mismatch: {measurements} measurement operators but {unitaries} unitaries")]
    LengthMismatch { measurements: usize, unitaries: usize },

    #[error("parameter {name} = {value} is out of range")]
    ParamOutOfRange { name: &'static str, value: f64 },

    #[error("random measurement sample degenerate after {attempts} attempts")]
    DegenerateSample { attempts: usize },

    #[error("eigenvalue solver did not converge")]
    EigSolverFailure,

    #[error("peripheral eigenvector pairing is ill-conditioned (condition number {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("projected operator is not a valid density operator: {0}")]
    ValidationFailure(Box<Error>),

    #[error(
        "no recurrence within n_max = {n_max} at epsilon = {epsilon:.3e} (closest approach {min_distance:.3e} at n = {closest_n})"
    )]
    NoRecurrenceFound {
        n_max: usize,
        epsilon: f64,
        min_distance: f64,
        closest_n: usize,
    },

    #[error("Kraus operator {index} is not Hermitian; supply a Hermitian Kraus form")]
    NonHermitianKraus { index: usize },

    #[error("step {step} is not a bare measurement; the no-go check needs a pure bare-measurement cycle")]
    NotPureMeasurementCycle { step: usize },

    #[error("final Hamiltonian differs from the initial one (deviation {deviation:.3e})")]
    HamiltonianNotClosed { deviation: f64 },

    #[error("config error at `{path}`: {message}")]
    ConfigParse { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
