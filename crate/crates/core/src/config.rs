//! JSON engine configs and matrix/channel serialization.
//!
//! Matrices are arrays of rows; each entry is a `[re, im]` pair.
//!
//! ```json
//! {
//!   "dim": 2,
//!   "hamiltonians": [H0, H1, ..., HK],
//!   "steps": [{ "channel": { "kind": "bare", "ops": [...] }, "unitary": U1 }, ...],
//!   "initial_state": { "kind": "ground" },
//!   "run": { "n_cycles": 10, "epsilon": 1e-6, "n_max": 10000, "seed": 0 },
//!   "expect": [{ "quantity": "w_total_limit", "value": 0.0, "tol": 1e-10 }]
//! }
//! ```
//!
//! `hamiltonians[k]` is `H^(k)`; the list has `K + 1` entries and must close
//! (`H^(K) = H^(0)`). Thermal steps thermalize with respect to `H^(k−1)`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channels::{
    bare_measurement, feedback_from_measurement, general_measurement, partial_thermalization, unitary_channel,
    ChannelKind, KrausChannel,
};
use crate::engine::{EngineCycle, EngineStep, SpectralSettings};
use crate::error::{Error, Result};
use crate::operators::{c64, gibbs_state, CMatrix, DensityOperator, HermitianOperator};
use crate::random::{random_density, rng_from_seed};
use crate::spectral::TAU_PERIP;

/// One complex entry, serialized as `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Entry(pub f64, pub f64);

impl Serialize for Entry {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.0, self.1].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Entry {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        match v[..] {
            [re, im] => Ok(Entry(re, im)),
            _ => Err(serde::de::Error::custom(format!(
                "expected a [re, im] pair, found {} numbers",
                v.len()
            ))),
        }
    }
}

/// Square complex matrix as nested rows of `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<Entry>>", into = "Vec<Vec<Entry>>")]
pub struct MatrixSpec(CMatrix);

impl MatrixSpec {
    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }
}

impl From<&CMatrix> for MatrixSpec {
    fn from(m: &CMatrix) -> Self {
        MatrixSpec(m.clone())
    }
}

impl TryFrom<Vec<Vec<Entry>>> for MatrixSpec {
    type Error = String;

    fn try_from(rows: Vec<Vec<Entry>>) -> std::result::Result<Self, String> {
        let n = rows.len();
        if n == 0 {
            return Err("matrix has no rows".into());
        }
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(format!("matrix is not square: row {i} has {} entries, expected {n}", r.len()));
        }
        Ok(MatrixSpec(CMatrix::from_fn(n, n, |i, j| {
            let Entry(re, im) = rows[i][j];
            c64(re, im)
        })))
    }
}

impl From<MatrixSpec> for Vec<Vec<Entry>> {
    fn from(m: MatrixSpec) -> Self {
        let m = m.0;
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| Entry(m[(i, j)].re, m[(i, j)].im)).collect())
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelSpecKind {
    Bare,
    General,
    Unitary,
    Feedback,
    Thermal,
}

/// A channel as written in configs and witnesses. Feedback channels list the bare
/// measurement in `ops` and the outcome-conditioned unitaries in `unitaries`;
/// thermal channels need only `beta` and `lambda`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub kind: ChannelSpecKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ops: Vec<MatrixSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unitaries: Vec<MatrixSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

fn matrices(specs: &[MatrixSpec]) -> Vec<CMatrix> {
    specs.iter().map(|m| m.matrix().clone()).collect()
}

impl ChannelSpec {
    pub fn from_channel(ch: &KrausChannel) -> Self {
        let mut spec = ChannelSpec {
            kind: ChannelSpecKind::General,
            ops: ch.kraus_ops().iter().map(MatrixSpec::from).collect(),
            unitaries: Vec::new(),
            beta: None,
            lambda: None,
        };
        match ch.kind() {
            ChannelKind::BareMeasurement => spec.kind = ChannelSpecKind::Bare,
            ChannelKind::Unitary => spec.kind = ChannelSpecKind::Unitary,
            ChannelKind::Feedback => {
                if let Some(parts) = ch.parts() {
                    spec.kind = ChannelSpecKind::Feedback;
                    spec.ops = parts.measurement.iter().map(MatrixSpec::from).collect();
                    spec.unitaries = parts.unitaries.iter().map(MatrixSpec::from).collect();
                }
            }
            ChannelKind::Thermal => {
                if let Some(p) = ch.thermal_params() {
                    spec.kind = ChannelSpecKind::Thermal;
                    spec.ops.clear();
                    spec.beta = Some(p.beta);
                    spec.lambda = Some(p.lambda);
                }
            }
            ChannelKind::GeneralMeasurement | ChannelKind::Composite => {}
        }
        spec
    }

    /// Build the channel; thermal channels need the bath Hamiltonian.
    pub fn to_channel(&self, bath: Option<&HermitianOperator>) -> Result<KrausChannel> {
        match self.kind {
            ChannelSpecKind::Bare => bare_measurement(matrices(&self.ops)),
            ChannelSpecKind::General => general_measurement(matrices(&self.ops)),
            ChannelSpecKind::Unitary => match &self.ops[..] {
                [u] => unitary_channel(u.matrix().clone()),
                _ => Err(Error::ParamOutOfRange {
                    name: "unitary ops",
                    value: self.ops.len() as f64,
                }),
            },
            ChannelSpecKind::Feedback => feedback_from_measurement(matrices(&self.ops), matrices(&self.unitaries)),
            ChannelSpecKind::Thermal => {
                let beta = self.beta.ok_or(Error::ParamOutOfRange {
                    name: "beta",
                    value: f64::NAN,
                })?;
                let lambda = self.lambda.ok_or(Error::ParamOutOfRange {
                    name: "lambda",
                    value: f64::NAN,
                })?;
                let h = bath.ok_or(Error::ParamOutOfRange {
                    name: "bath hamiltonian",
                    value: f64::NAN,
                })?;
                partial_thermalization(h, beta, lambda)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepSpec {
    pub channel: ChannelSpec,
    pub unitary: MatrixSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    Matrix { matrix: MatrixSpec },
    /// Gibbs state of `H^(0)`.
    Gibbs { beta: f64 },
    /// Projector onto the lowest eigenvector of `H^(0)`.
    Ground,
    MaximallyMixed,
    /// Random state of the given rank (full rank by default), drawn from `run.seed`.
    Random {
        #[serde(default)]
        rank: Option<usize>,
    },
}

fn default_epsilon() -> f64 {
    1e-6
}

fn default_n_max() -> usize {
    10_000
}

fn default_tau_perip() -> f64 {
    TAU_PERIP
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    /// Cycles in the transient ledger started from the initial state.
    pub n_cycles: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_tau_perip")]
    pub tau_perip: f64,
    /// Start the ledger from the peripheral projection of the initial state.
    #[serde(default = "default_true")]
    pub steady: bool,
}

/// Expected summary value, checked by `engine run`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectation {
    pub quantity: String,
    pub value: f64,
    pub tol: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub dim: usize,
    pub hamiltonians: Vec<MatrixSpec>,
    pub steps: Vec<StepSpec>,
    pub initial_state: InitialState,
    pub run: RunSpec,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub expect: Vec<Expectation>,
}

fn at(path: impl Into<String>) -> impl FnOnce(Error) -> Error {
    let path = path.into();
    move |e| match e {
        Error::ConfigParse { .. } => e,
        other => Error::ConfigParse {
            path,
            message: other.to_string(),
        },
    }
}

impl EngineConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: EngineConfig = serde_path_to_error::deserialize(de).map_err(|e| Error::ConfigParse {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        config.check_shape()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    fn check_shape(&self) -> Result<()> {
        let dim_err = |path: String, found: usize| Error::ConfigParse {
            path,
            message: format!("expected a {0}x{0} matrix, found {1}x{1}", self.dim, found),
        };
        if self.hamiltonians.len() != self.steps.len() + 1 {
            return Err(Error::ConfigParse {
                path: "hamiltonians".into(),
                message: format!(
                    "expected {} Hamiltonians (one more than the {} steps), found {}",
                    self.steps.len() + 1,
                    self.steps.len(),
                    self.hamiltonians.len()
                ),
            });
        }
        for (i, h) in self.hamiltonians.iter().enumerate() {
            if h.matrix().nrows() != self.dim {
                return Err(dim_err(format!("hamiltonians[{i}]"), h.matrix().nrows()));
            }
        }
        for (i, s) in self.steps.iter().enumerate() {
            if s.unitary.matrix().nrows() != self.dim {
                return Err(dim_err(format!("steps[{i}].unitary"), s.unitary.matrix().nrows()));
            }
            for (field, list) in [("ops", &s.channel.ops), ("unitaries", &s.channel.unitaries)] {
                for (j, m) in list.iter().enumerate() {
                    if m.matrix().nrows() != self.dim {
                        return Err(dim_err(format!("steps[{i}].channel.{field}[{j}]"), m.matrix().nrows()));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn hamiltonian(&self, k: usize) -> Result<HermitianOperator> {
        HermitianOperator::new(self.hamiltonians[k].matrix().clone()).map_err(at(format!("hamiltonians[{k}]")))
    }

    pub fn cycle(&self) -> Result<EngineCycle> {
        let h0 = self.hamiltonian(0)?;
        let mut steps = Vec::with_capacity(self.steps.len());
        for (i, s) in self.steps.iter().enumerate() {
            let prev = self.hamiltonian(i)?;
            steps.push(EngineStep {
                channel: s.channel.to_channel(Some(&prev)).map_err(at(format!("steps[{i}].channel")))?,
                unitary: s.unitary.matrix().clone(),
                post_hamiltonian: self.hamiltonian(i + 1)?,
            });
        }
        EngineCycle::new(h0, steps).map_err(at("steps"))
    }

    pub fn initial_state(&self) -> Result<DensityOperator> {
        let h0 = self.hamiltonian(0)?;
        match &self.initial_state {
            InitialState::Matrix { matrix } => {
                DensityOperator::new(matrix.matrix().clone()).map_err(at("initial_state.matrix"))
            }
            InitialState::Gibbs { beta } => gibbs_state(&h0, *beta).map_err(at("initial_state.beta")),
            InitialState::Ground => {
                let spec = h0.spectrum();
                let ground = spec.eigenvectors.column(self.dim - 1).clone_owned();
                Ok(DensityOperator::pure(ground.as_slice())?)
            }
            InitialState::MaximallyMixed => Ok(DensityOperator::maximally_mixed(self.dim)),
            InitialState::Random { rank } => {
                let mut rng = rng_from_seed(self.run.seed);
                Ok(random_density(self.dim, rank.unwrap_or(self.dim), &mut rng))
            }
        }
    }

    pub fn spectral_settings(&self) -> SpectralSettings {
        SpectralSettings {
            tau_perip: self.run.tau_perip,
            epsilon: self.run.epsilon,
            n_max: self.run.n_max,
        }
    }

    /// Config describing an existing cycle.
    pub fn from_cycle(cycle: &EngineCycle, initial_state: InitialState, run: RunSpec) -> Self {
        let mut hamiltonians = vec![MatrixSpec::from(cycle.hamiltonian().matrix())];
        let mut steps = Vec::new();
        for s in cycle.steps() {
            hamiltonians.push(MatrixSpec::from(s.post_hamiltonian.matrix()));
            steps.push(StepSpec {
                channel: ChannelSpec::from_channel(&s.channel),
                unitary: MatrixSpec::from(&s.unitary),
            });
        }
        EngineConfig {
            description: None,
            dim: cycle.dim(),
            hamiltonians,
            steps,
            initial_state,
            run,
            expect: Vec::new(),
        }
    }
}
