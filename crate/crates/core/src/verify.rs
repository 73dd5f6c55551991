//! Randomized property suites for the entropy, contractivity and no-go results.
//!
//! Every suite is deterministic in `(dim, n_trials, seed)`: trial `i` draws from
//! its own generator seeded with `derive_seed(seed, i)`, trials run in parallel and
//! are reduced in index order.
//!
//! Each check reports a `violation`, the largest excess of a checked quantity over
//! its tolerance. A trial passes when the violation is `≤ 0`; negative values are slack.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{
    classify_superoperator, identity_channel, random_bare_measurement, ChannelReport, KrausChannel, Superoperator,
};
use crate::config::{ChannelSpec, EngineConfig, InitialState, MatrixSpec, RunSpec};
use crate::engine::{first_law_along, EngineCycle, SpectralSettings};
use crate::error::{Error, Result};
use crate::operators::{
    hs_inner, hs_norm, majorization_margin, spectral_distance, CMatrix, DensityOperator,
};
use crate::random::{derive_seed, random_density, random_operator, random_state_any_rank, random_unitary, rng_from_seed, SeededRng};
use crate::sampling::{
    commuting_measurement, commuting_operator, random_bare_cycle, random_projective_measurement, CycleFamily,
};
use crate::spectral::{find_recurrences, peripheral_projector_or_cesaro, project_peripheral};

/// Entropy never decreases under a bare measurement beyond this.
pub const MONOTONICITY_TOL: f64 = 1e-10;
/// Fixed-point pairs have `|ΔS_ms|` below this.
pub const FIXED_POINT_TOL: f64 = 1e-10;
/// Pairs count as disturbing above this HS distance.
pub const DISTURBANCE_THRESHOLD: f64 = 1e-3;
/// Both half-contractivity inequalities and `(X|M̂|X) ≥ 0`.
pub const CONTRACTIVITY_TOL: f64 = 1e-10;
/// `(X|M(X)) ≥ ‖X‖² − GAP_TOL` counts as saturation.
pub const GAP_TOL: f64 = 1e-12;
/// Saturated instances must be this close to a fixed point.
pub const SATURATION_DISTANCE: f64 = 1e-6;
pub const COMMUTATOR_TOL: f64 = 1e-10;
/// Spectra this close count as equal in the majorization suite.
pub const EQUAL_SPECTRA_TOL: f64 = 1e-9;
/// Per-step and total bounds in the no-go check.
pub const NO_GO_TOL: f64 = 1e-7;
/// Interpolation points in the nondisturbance sweep.
pub const SWEEP_POINTS: usize = 32;
/// Allowed decrease of `ΔS_ms` between neighbouring sweep points.
pub const SWEEP_MONOTONE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Monotonicity,
    Equivalence,
    HalfContractivity,
    Commutator,
    Majorization,
    NoGo,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Monotonicity,
        Suite::Equivalence,
        Suite::HalfContractivity,
        Suite::Commutator,
        Suite::Majorization,
        Suite::NoGo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Monotonicity => "monotonicity",
            Suite::Equivalence => "equivalence",
            Suite::HalfContractivity => "half_contractivity",
            Suite::Commutator => "commutator",
            Suite::Majorization => "majorization",
            Suite::NoGo => "no_go",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "nondisturbance_equivalence" => Some(Suite::Equivalence),
            _ => Self::ALL.into_iter().find(|s| s.name() == name),
        }
    }

    pub fn run(self, dim: usize, n_trials: usize, seed: u64) -> Result<TrialReport> {
        match self {
            Suite::Monotonicity => verify_monotonicity(dim, n_trials, seed),
            Suite::Equivalence => verify_nondisturbance_equivalence(dim, n_trials, seed),
            Suite::HalfContractivity => verify_half_contractivity(dim, n_trials, seed),
            Suite::Commutator => verify_commutator_identity(dim, n_trials, seed),
            Suite::Majorization => verify_majorization_step(dim, n_trials, seed),
            Suite::NoGo => verify_no_go_suite(dim, n_trials, seed),
        }
    }
}

/// Result of one check on one instance.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub violation: f64,
    pub values: BTreeMap<String, f64>,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            violation: f64::NEG_INFINITY,
            values: BTreeMap::new(),
        }
    }

    fn value(&mut self, key: &str, v: f64) -> f64 {
        self.values.insert(key.to_string(), v);
        v
    }

    /// Record `measured ≤ bound`.
    fn bound(&mut self, measured: f64, bound: f64) {
        self.violation = self.violation.max(measured - bound);
    }

    pub fn passed(&self) -> bool {
        self.violation <= 0.0
    }
}

/// The instance a check was evaluated on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Instance {
    State { channel: ChannelSpec, state: MatrixSpec },
    Operator { channel: ChannelSpec, operator: MatrixSpec },
    Cycle { config: Box<EngineConfig> },
}

/// Which check produced an outcome; selects the re-evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Monotonicity,
    FixedPoint,
    Disturbing,
    Sweep,
    HalfContractivity,
    Commutator,
    Majorization,
    NoGo,
}

/// The worst failing instance of a suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub check: Check,
    pub trial: usize,
    pub instance: Instance,
    pub values: BTreeMap<String, f64>,
    pub violation: f64,
}

impl Witness {
    /// Re-run the check on the stored instance.
    pub fn reevaluate(&self) -> Result<Outcome> {
        match (&self.instance, self.check) {
            (Instance::State { channel, state }, check) => {
                let ch = channel.to_channel(None)?;
                let rho = DensityOperator::new(state.matrix().clone())?;
                match check {
                    Check::Monotonicity => check_monotonicity(&ch, &rho),
                    Check::FixedPoint => check_fixed_point(&ch, &rho),
                    Check::Disturbing => check_disturbing(&ch, &rho),
                    Check::Sweep => check_sweep(&ch, &rho),
                    Check::Majorization => check_majorization(&ch, &rho),
                    _ => Err(Error::ParamOutOfRange {
                        name: "witness check",
                        value: f64::NAN,
                    }),
                }
            }
            (Instance::Operator { channel, operator }, check) => {
                let ch = channel.to_channel(None)?;
                match check {
                    Check::HalfContractivity => Ok(check_half_contractivity(&ch, operator.matrix())),
                    Check::Commutator => check_commutator(&ch, operator.matrix()),
                    _ => Err(Error::ParamOutOfRange {
                        name: "witness check",
                        value: f64::NAN,
                    }),
                }
            }
            (Instance::Cycle { config }, _) => {
                let cycle = config.cycle()?;
                let rho0 = config.initial_state()?;
                check_no_go(&cycle, &rho0, &config.spectral_settings())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub suite: String,
    pub dim: usize,
    pub seed: u64,
    pub n_trials: usize,
    pub n_pass: usize,
    /// Largest excess over tolerance across all trials; `≤ 0` when every trial passes.
    pub worst_violation: f64,
    /// Minimum and maximum of every recorded value, keyed `min.<name>` / `max.<name>`.
    pub stats: BTreeMap<String, f64>,
    pub witness: Option<Witness>,
}

impl TrialReport {
    pub fn passed(&self) -> bool {
        self.n_pass == self.n_trials
    }
}

struct Trial {
    check: Check,
    outcome: Outcome,
    instance: Instance,
}

fn state_instance(ch: &KrausChannel, rho: &DensityOperator) -> Instance {
    Instance::State {
        channel: ChannelSpec::from_channel(ch),
        state: MatrixSpec::from(rho.matrix()),
    }
}

fn operator_instance(ch: &KrausChannel, x: &CMatrix) -> Instance {
    Instance::Operator {
        channel: ChannelSpec::from_channel(ch),
        operator: MatrixSpec::from(x),
    }
}

fn run_trials(
    suite: Suite,
    dim: usize,
    n_trials: usize,
    seed: u64,
    trial: impl Fn(usize, &mut SeededRng) -> Result<Trial> + Sync,
) -> Result<TrialReport> {
    if dim < 2 {
        return Err(Error::DimTooSmall(dim));
    }
    let trials: Vec<Trial> = (0..n_trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_from_seed(derive_seed(seed, i as u64));
            trial(i, &mut rng)
        })
        .collect::<Result<_>>()?;
    let mut stats = BTreeMap::new();
    let mut worst = f64::NEG_INFINITY;
    let mut n_pass = 0;
    let mut witness: Option<Witness> = None;
    for (i, t) in trials.into_iter().enumerate() {
        for (k, &v) in &t.outcome.values {
            let lo = stats.entry(format!("min.{k}")).or_insert(f64::INFINITY);
            *lo = f64::min(*lo, v);
            let hi = stats.entry(format!("max.{k}")).or_insert(f64::NEG_INFINITY);
            *hi = f64::max(*hi, v);
        }
        worst = worst.max(t.outcome.violation);
        if t.outcome.passed() {
            n_pass += 1;
        } else if witness.as_ref().is_none_or(|w| t.outcome.violation > w.violation) {
            witness = Some(Witness {
                check: t.check,
                trial: i,
                instance: t.instance,
                values: t.outcome.values,
                violation: t.outcome.violation,
            });
        }
    }
    if n_trials == 0 {
        worst = 0.0;
    }
    Ok(TrialReport {
        suite: suite.name().to_string(),
        dim,
        seed,
        n_trials,
        n_pass,
        worst_violation: worst,
        stats,
        witness,
    })
}

fn entropy_change(ch: &KrausChannel, rho: &DensityOperator) -> Result<(f64, f64)> {
    let out = ch.apply(rho)?;
    Ok((out.entropy() - rho.entropy(), hs_norm(&(out.matrix() - rho.matrix()))))
}

/// `ΔS_ms ≥ −MONOTONICITY_TOL`.
pub fn check_monotonicity(ch: &KrausChannel, rho: &DensityOperator) -> Result<Outcome> {
    let mut o = Outcome::new();
    let (ds, dist) = entropy_change(ch, rho)?;
    o.value("entropy_change", ds);
    o.value("disturbance", dist);
    o.bound(-ds, MONOTONICITY_TOL);
    Ok(o)
}

/// `|ΔS_ms| ≤ FIXED_POINT_TOL` for a pair with `M(ρ) = ρ`.
pub fn check_fixed_point(ch: &KrausChannel, rho: &DensityOperator) -> Result<Outcome> {
    let mut o = Outcome::new();
    let (ds, dist) = entropy_change(ch, rho)?;
    o.value("fixed_point_entropy_change", ds);
    o.value("fixed_point_disturbance", dist);
    o.bound(ds.abs(), FIXED_POINT_TOL);
    Ok(o)
}

/// Roundoff scale of a von Neumann entropy of a `d × d` state.
pub fn entropy_floor(dim: usize) -> f64 {
    64.0 * dim as f64 * f64::EPSILON * (dim as f64).ln().max(1.0)
}

/// A pair with disturbance above `DISTURBANCE_THRESHOLD` has `ΔS_ms` above the
/// entropy roundoff floor. Pairs below the threshold are recorded but not judged.
pub fn check_disturbing(ch: &KrausChannel, rho: &DensityOperator) -> Result<Outcome> {
    let mut o = Outcome::new();
    let (ds, dist) = entropy_change(ch, rho)?;
    o.value("entropy_change", ds);
    o.value("disturbance", dist);
    let floor = o.value("floor", entropy_floor(rho.dim()));
    if dist > DISTURBANCE_THRESHOLD {
        o.value("judged_entropy_change", ds);
        o.value("entropy_per_disturbance_sq", ds / (dist * dist));
        o.bound(floor, ds);
    } else {
        o.bound(0.0, 0.0);
    }
    Ok(o)
}

/// Sweep `ρ_t = (1 − t)·1/d + t·ρ` over `t ∈ [0, 1]`. `ρ_0` is fixed, the
/// disturbance grows linearly in `t`, and `ΔS_ms(ρ_t)` must rise monotonically
/// from zero. Records the calibrated modulus `min_t ΔS_ms / disturbance²`.
pub fn check_sweep(ch: &KrausChannel, rho: &DensityOperator) -> Result<Outcome> {
    let d = rho.dim();
    let mixed = DensityOperator::maximally_mixed(d);
    let mut o = Outcome::new();
    let mut prev_ds = f64::NEG_INFINITY;
    let mut prev_dist = f64::NEG_INFINITY;
    let mut modulus = f64::INFINITY;
    let mut worst_drop = f64::NEG_INFINITY;
    for j in 0..=SWEEP_POINTS {
        let t = j as f64 / SWEEP_POINTS as f64;
        let rho_t = DensityOperator::new(mixed.matrix().scale(1.0 - t) + rho.matrix().scale(t))?;
        let (ds, dist) = entropy_change(ch, &rho_t)?;
        if j == 0 {
            o.value("endpoint_entropy_change", ds);
            o.bound(ds.abs(), FIXED_POINT_TOL);
        } else {
            worst_drop = worst_drop.max(prev_ds - ds);
            if dist <= prev_dist {
                o.bound(prev_dist - dist, 0.0);
            }
            if dist > DISTURBANCE_THRESHOLD {
                modulus = modulus.min(ds / (dist * dist));
            }
        }
        prev_ds = ds;
        prev_dist = dist;
    }
    o.value("max_entropy_drop", worst_drop);
    o.bound(worst_drop, SWEEP_MONOTONE_TOL);
    o.value("final_disturbance", prev_dist);
    o.value("final_entropy_change", prev_ds);
    if modulus.is_finite() {
        o.value("modulus", modulus);
    }
    Ok(o)
}

/// `‖M(X)‖² ≤ (X|M(X)) ≤ ‖X‖²`, `(X|M(X))` real and nonnegative, and the
/// saturation ladder in both directions.
pub fn check_half_contractivity(ch: &KrausChannel, x: &CMatrix) -> Outcome {
    let mut o = Outcome::new();
    let mx = ch.apply_operator(x);
    let a = hs_norm(&mx).powi(2);
    let inner = hs_inner(x, &mx).expect("same shape");
    let b = inner.re;
    let c = hs_norm(x).powi(2);
    let fixed_distance = hs_norm(&(&mx - x));
    o.value("output_norm_sq", a);
    o.value("overlap", b);
    o.value("input_norm_sq", c);
    o.value("overlap_imaginary", inner.im);
    o.value("fixed_point_distance", fixed_distance);
    o.bound(a - b, CONTRACTIVITY_TOL);
    o.bound(b - c, CONTRACTIVITY_TOL);
    o.bound(-b, CONTRACTIVITY_TOL);
    o.bound(inner.im.abs(), CONTRACTIVITY_TOL);
    if b >= c - GAP_TOL {
        o.bound(fixed_distance, SATURATION_DISTANCE);
    }
    if fixed_distance <= 1e-12 * c.sqrt().max(1.0) {
        o.bound((a - b).abs(), CONTRACTIVITY_TOL);
        o.bound((c - b).abs(), CONTRACTIVITY_TOL);
    }
    o
}

/// `‖X‖² − (X|M(X)) − ½ Σ_s ‖[X, A_s]‖²`. Needs Hermitian Kraus operators.
pub fn commutator_identity_residual(ch: &KrausChannel, x: &CMatrix) -> Result<f64> {
    if let Some(index) = ch.has_hermitian_kraus() {
        return Err(Error::NonHermitianKraus { index });
    }
    let mx = ch.apply_operator(x);
    let lhs = hs_norm(x).powi(2) - hs_inner(x, &mx)?.re;
    let rhs: f64 = ch
        .kraus_ops()
        .iter()
        .map(|a| 0.5 * hs_norm(&(x * a - a * x)).powi(2))
        .sum();
    Ok(lhs - rhs)
}

pub fn check_commutator(ch: &KrausChannel, x: &CMatrix) -> Result<Outcome> {
    let mut o = Outcome::new();
    let r = commutator_identity_residual(ch, x)?;
    o.value("residual", r);
    o.bound(r.abs(), COMMUTATOR_TOL);
    Ok(o)
}

/// `ρ ≻ M(ρ)`; equal spectra imply `M(ρ) = ρ`.
pub fn check_majorization(ch: &KrausChannel, rho: &DensityOperator) -> Result<Outcome> {
    let mut o = Outcome::new();
    let out = ch.apply(rho)?;
    let margin = o.value("margin", majorization_margin(rho, &out)?);
    let gap = o.value("spectral_distance", spectral_distance(rho, &out));
    let dist = o.value("disturbance", hs_norm(&(out.matrix() - rho.matrix())));
    o.bound(-margin, crate::operators::tol::MAJOR);
    if gap <= EQUAL_SPECTRA_TOL {
        o.bound(dist, SATURATION_DISTANCE);
    }
    Ok(o)
}

/// Steady-regime no-go check on a cycle started from the peripheral projection of `rho0`.
pub fn check_no_go(cycle: &EngineCycle, rho0: &DensityOperator, settings: &SpectralSettings) -> Result<Outcome> {
    let e = cycle.superoperator()?;
    let pd = peripheral_projector_or_cesaro(&e, settings.tau_perip)?;
    let rho_phi = project_peripheral(&pd, rho0)?;
    let rec = find_recurrences(&e, &rho_phi, settings.epsilon, settings.n_max)?;
    let report = first_law_along(cycle, &rho_phi, rec)?;
    let mut o = Outcome::new();
    let max_w = report.totals.iter().fold(0.0f64, |a, t| a.max(t.w_total.abs()));
    let max_ds_total = report.totals.iter().fold(0.0f64, |a, t| a.max(t.ds_ms_total.abs()));
    o.value("max_abs_energy_injected", report.max_abs_energy_injected);
    o.value("max_abs_entropy_disturbance", report.max_abs_entropy_disturbance);
    o.value("max_disturbance", report.max_disturbance);
    o.value("max_abs_w_total", max_w);
    o.value("max_abs_ds_total", max_ds_total);
    o.value("w_total_limit", report.w_total_limit);
    o.value("recurrences", report.totals.len() as f64);
    o.value("peripheral_eigenvalues", pd.peripheral_indices.len() as f64);
    for v in [
        report.max_abs_energy_injected,
        report.max_abs_entropy_disturbance,
        report.max_disturbance,
        max_w,
        max_ds_total,
    ] {
        o.bound(v, NO_GO_TOL);
    }
    Ok(o)
}

/// Entropy monotonicity on random bare measurements and states of random rank.
/// Every tenth trial is a projective measurement, every tenth an identity channel.
pub fn verify_monotonicity(dim: usize, n_trials: usize, seed: u64) -> Result<TrialReport> {
    run_trials(Suite::Monotonicity, dim, n_trials, seed, |i, rng| {
        let ch = match i % 10 {
            0 => identity_channel(dim),
            1 => random_projective_measurement(dim, rng)?,
            _ => random_bare_measurement(dim, rng.random_range(2..=dim + 2), rng)?,
        };
        let rho = random_state_any_rank(dim, rng);
        Ok(Trial {
            check: Check::Monotonicity,
            outcome: check_monotonicity(&ch, &rho)?,
            instance: state_instance(&ch, &rho),
        })
    })
}

/// Fixed-point pair: `1/d` under a random measurement, a state diagonal in the
/// basis of a commuting measurement, or a projective measurement on its eigenbasis.
fn fixed_point_pair(dim: usize, i: usize, rng: &mut SeededRng) -> Result<(KrausChannel, DensityOperator)> {
    match i % 3 {
        0 => Ok((
            random_bare_measurement(dim, rng.random_range(2..=dim + 2), rng)?,
            DensityOperator::maximally_mixed(dim),
        )),
        1 => {
            let basis = random_unitary(dim, rng);
            let ch = commuting_measurement(&basis, rng.random_range(2..=4), false, rng)?;
            let rho = diagonal_state(&basis, rng)?;
            Ok((ch, rho))
        }
        _ => {
            let ch = random_projective_measurement(dim, rng)?;
            let mut basis = CMatrix::zeros(dim, dim);
            for (j, p) in ch.kraus_ops().iter().enumerate() {
                let spec = crate::operators::hermitian_spectrum(p);
                basis.set_column(j, &spec.eigenvectors.column(0));
            }
            let rho = diagonal_state(&basis, rng)?;
            Ok((ch, rho))
        }
    }
}

fn diagonal_state(basis: &CMatrix, rng: &mut SeededRng) -> Result<DensityOperator> {
    let p = crate::random::random_probabilities(basis.nrows(), rng);
    let d = crate::operators::diag_real(&p);
    crate::operators::validate_density(basis * d * basis.adjoint())
}

/// Both directions of the entropy/nondisturbance equivalence. Trials cycle through
/// constructed fixed-point pairs, random disturbing pairs and interpolation sweeps.
pub fn verify_nondisturbance_equivalence(dim: usize, n_trials: usize, seed: u64) -> Result<TrialReport> {
    run_trials(Suite::Equivalence, dim, n_trials, seed, |i, rng| {
        let (check, ch, rho) = match i % 3 {
            0 => {
                let (ch, rho) = fixed_point_pair(dim, i / 3, rng)?;
                (Check::FixedPoint, ch, rho)
            }
            1 => {
                let ch = random_bare_measurement(dim, rng.random_range(2..=dim + 2), rng)?;
                (Check::Disturbing, ch, random_state_any_rank(dim, rng))
            }
            _ => {
                let ch = random_bare_measurement(dim, rng.random_range(2..=dim + 2), rng)?;
                (Check::Sweep, ch, random_state_any_rank(dim, rng))
            }
        };
        let outcome = match check {
            Check::FixedPoint => check_fixed_point(&ch, &rho)?,
            Check::Disturbing => check_disturbing(&ch, &rho)?,
            _ => check_sweep(&ch, &rho)?,
        };
        Ok(Trial {
            check,
            outcome,
            instance: state_instance(&ch, &rho),
        })
    })
}

/// Random measurements and operators (Hermitian half of the time); every fourth trial
/// uses a commuting measurement with an operator in its commutant.
fn measurement_and_operator(dim: usize, i: usize, rng: &mut SeededRng) -> Result<(KrausChannel, CMatrix)> {
    if i % 4 == 3 {
        let basis = random_unitary(dim, rng);
        let ch = commuting_measurement(&basis, rng.random_range(2..=4), false, rng)?;
        Ok((ch, commuting_operator(&basis, rng)))
    } else {
        let ch = random_bare_measurement(dim, rng.random_range(2..=dim + 2), rng)?;
        Ok((ch, random_operator(dim, i.is_multiple_of(2), rng)))
    }
}

pub fn verify_half_contractivity(dim: usize, n_trials: usize, seed: u64) -> Result<TrialReport> {
    run_trials(Suite::HalfContractivity, dim, n_trials, seed, |i, rng| {
        let (ch, x) = measurement_and_operator(dim, i, rng)?;
        Ok(Trial {
            check: Check::HalfContractivity,
            outcome: check_half_contractivity(&ch, &x),
            instance: operator_instance(&ch, &x),
        })
    })
}

pub fn verify_commutator_identity(dim: usize, n_trials: usize, seed: u64) -> Result<TrialReport> {
    run_trials(Suite::Commutator, dim, n_trials, seed, |i, rng| {
        let (ch, x) = measurement_and_operator(dim, i, rng)?;
        Ok(Trial {
            check: Check::Commutator,
            outcome: check_commutator(&ch, &x)?,
            instance: operator_instance(&ch, &x),
        })
    })
}

pub fn verify_majorization_step(dim: usize, n_trials: usize, seed: u64) -> Result<TrialReport> {
    run_trials(Suite::Majorization, dim, n_trials, seed, |i, rng| {
        let (ch, rho) = if i % 4 == 3 {
            fixed_point_pair(dim, i / 4, rng)?
        } else {
            let ch = random_bare_measurement(dim, rng.random_range(2..=dim + 2), rng)?;
            (ch, random_state_any_rank(dim, rng))
        };
        Ok(Trial {
            check: Check::Majorization,
            outcome: check_majorization(&ch, &rho)?,
            instance: state_instance(&ch, &rho),
        })
    })
}

fn cycle_instance(cycle: &EngineCycle, rho0: &DensityOperator, settings: &SpectralSettings) -> Instance {
    Instance::Cycle {
        config: Box::new(EngineConfig::from_cycle(
            cycle,
            InitialState::Matrix {
                matrix: MatrixSpec::from(rho0.matrix()),
            },
            RunSpec {
                n_cycles: 1,
                epsilon: settings.epsilon,
                n_max: settings.n_max,
                seed: 0,
                tau_perip: settings.tau_perip,
                steady: true,
            },
        )),
    }
}

/// No-go check on one cycle. Fails with `NotPureMeasurementCycle` when a step is
/// not a bare measurement.
pub fn verify_no_go(cycle: &EngineCycle, rho0: &DensityOperator, settings: &SpectralSettings) -> Result<TrialReport> {
    if let Some(step) = cycle.first_non_bare_step() {
        return Err(Error::NotPureMeasurementCycle { step });
    }
    verify_no_go_unchecked(cycle, rho0, settings)
}

/// The no-go check without the bare-measurement precondition, for negative controls.
pub fn verify_no_go_unchecked(
    cycle: &EngineCycle,
    rho0: &DensityOperator,
    settings: &SpectralSettings,
) -> Result<TrialReport> {
    let outcome = check_no_go(cycle, rho0, settings)?;
    let instance = cycle_instance(cycle, rho0, settings);
    let mut stats = BTreeMap::new();
    for (k, &v) in &outcome.values {
        stats.insert(format!("min.{k}"), v);
        stats.insert(format!("max.{k}"), v);
    }
    let passed = outcome.passed();
    Ok(TrialReport {
        suite: Suite::NoGo.name().to_string(),
        dim: cycle.dim(),
        seed: 0,
        n_trials: 1,
        n_pass: usize::from(passed),
        worst_violation: outcome.violation,
        stats,
        witness: (!passed).then_some(Witness {
            check: Check::NoGo,
            trial: 0,
            instance,
            values: outcome.values,
            violation: outcome.violation,
        }),
    })
}

/// Settings used by the random no-go suite.
pub fn no_go_settings() -> SpectralSettings {
    SpectralSettings {
        epsilon: 1e-6,
        n_max: 10_000,
        ..Default::default()
    }
}

/// No-go check on random pure bare-measurement cycles with `K = 1 + (i mod 3)`,
/// alternating generic and commuting families, from random initial states.
pub fn verify_no_go_suite(dim: usize, n_trials: usize, seed: u64) -> Result<TrialReport> {
    let settings = no_go_settings();
    run_trials(Suite::NoGo, dim, n_trials, seed, |i, rng| {
        let family = if i % 2 == 0 { CycleFamily::Commuting } else { CycleFamily::Generic };
        let cycle = random_bare_cycle(dim, 1 + i % 3, family, rng)?;
        let rho0 = random_density(dim, dim, rng);
        Ok(Trial {
            check: Check::NoGo,
            outcome: check_no_go(&cycle, &rho0, &settings)?,
            instance: cycle_instance(&cycle, &rho0, &settings),
        })
    })
}

/// The transpose map as a control outside the theorem's reach: positive, trace
/// preserving and self-dual but with a negative eigenvalue and not completely
/// positive. It preserves every spectrum, so `ΔS = 0` while states are disturbed.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TransposeControl {
    pub report: ChannelReport,
    pub max_abs_entropy_change: f64,
    pub max_disturbance: f64,
}

pub fn transpose_control(dim: usize, n_states: usize, seed: u64) -> Result<TransposeControl> {
    let t = Superoperator::transpose_map(dim);
    let report = classify_superoperator(&t);
    let mut rng = rng_from_seed(seed);
    let mut max_ds = 0.0f64;
    let mut max_dist = 0.0f64;
    for _ in 0..n_states {
        let rho = random_state_any_rank(dim, &mut rng);
        let out = t.apply(&rho)?;
        max_ds = max_ds.max((out.entropy() - rho.entropy()).abs());
        max_dist = max_dist.max(hs_norm(&(out.matrix() - rho.matrix())));
    }
    Ok(TransposeControl {
        report,
        max_abs_entropy_change: max_ds,
        max_disturbance: max_dist,
    })
}
