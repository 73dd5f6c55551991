//! Engine cycles and their thermodynamic bookkeeping.
//!
//! A cycle is a sequence of `K` steps; step `k` applies a channel (usually a
//! bare measurement) followed by a unitary `U^(k)` generated while the
//! Hamiltonian is driven from `H^(k−1)` to `H^(k)`, with `H^(0) = H^(K) = H`.
//!
//! Sign convention: `work` is the work done *on* the working substance, so
//! extracted work is `−work`.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::channels::{
    bare_measurement, compose, feedback_from_measurement, partial_thermalization, unitary_channel,
    ChannelKind, KrausChannel, Superoperator,
};
use crate::error::{Error, Result};
use crate::operators::{
    energy_expectation, gibbs_state, hs_norm, identity, pauli, real_matrix, tol,
    trace_norm_hermitian, unitarity_deviation, CMatrix, DensityOperator, HermitianOperator,
};
use crate::spectral::{
    find_recurrences, peripheral_projector_or_cesaro, project_peripheral, RecurrenceRecord, TAU_PERIP,
};

#[derive(Clone, Debug)]
pub struct EngineStep {
    /// `M^(k)`: a bare measurement, or a feedback/general/thermal channel in engine variants.
    pub channel: KrausChannel,
    /// `U^(k)`.
    pub unitary: CMatrix,
    /// `H^(k)`, the Hamiltonian at the end of the drive.
    pub post_hamiltonian: HermitianOperator,
}

#[derive(Clone, Debug)]
pub struct EngineCycle {
    hamiltonian: HermitianOperator,
    steps: Vec<EngineStep>,
}

impl EngineCycle {
    pub fn new(hamiltonian: HermitianOperator, steps: Vec<EngineStep>) -> Result<Self> {
        let dim = hamiltonian.dim();
        let last = steps.last().ok_or(Error::ParamOutOfRange {
            name: "steps",
            value: 0.0,
        })?;
        for (i, step) in steps.iter().enumerate() {
            for found in [step.channel.dim(), step.unitary.nrows(), step.post_hamiltonian.dim()] {
                if found != dim {
                    return Err(Error::DimMismatch { expected: dim, found });
                }
            }
            let deviation = unitarity_deviation(&step.unitary);
            if deviation > tol::RECON {
                return Err(Error::NotUnitary { index: i, deviation });
            }
        }
        let deviation = hs_norm(&(last.post_hamiltonian.matrix() - hamiltonian.matrix()));
        if deviation > tol::HERM * hs_norm(hamiltonian.matrix()).max(1.0) {
            return Err(Error::HamiltonianNotClosed { deviation });
        }
        Ok(Self { hamiltonian, steps })
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    /// `H = H^(0) = H^(K)`.
    pub fn hamiltonian(&self) -> &HermitianOperator {
        &self.hamiltonian
    }

    pub fn steps(&self) -> &[EngineStep] {
        &self.steps
    }

    /// `H^(k)` for `k = 0..=K`.
    pub fn hamiltonian_at(&self, k: usize) -> &HermitianOperator {
        if k == 0 {
            &self.hamiltonian
        } else {
            &self.steps[k - 1].post_hamiltonian
        }
    }

    /// `E = U^(K)∘M^(K)∘⋯∘U^(1)∘M^(1)`.
    pub fn superoperator(&self) -> Result<Superoperator> {
        let mut channels = Vec::with_capacity(2 * self.steps.len());
        for step in &self.steps {
            channels.push(step.channel.clone());
            channels.push(unitary_channel(step.unitary.clone())?);
        }
        let refs: Vec<&KrausChannel> = channels.iter().collect();
        compose(&refs)
    }

    /// Index of the first step whose channel is not a bare measurement.
    pub fn first_non_bare_step(&self) -> Option<usize> {
        self.steps
            .iter()
            .position(|s| s.channel.kind() != ChannelKind::BareMeasurement)
    }
}

/// One step of one cycle. For feedback and general measurements the mid
/// state is the bare-measurement image and the outcome-conditioned unitaries
/// are booked as work together with `U^(k)`; for thermal steps the mid state
/// is the thermalized state and `energy_injected` is the heat absorbed.
#[derive(Clone, Debug)]
pub struct StepRecord {
    pub n: usize,
    pub k: usize,
    pub state_before: DensityOperator,
    pub state_mid: DensityOperator,
    pub state_after: DensityOperator,
    /// `W_U^(n,k) = Tr[H^(k) ρ_after] − Tr[H^(k−1) ρ_mid]`.
    pub work: f64,
    /// `E_ms^(n,k) = Tr[H^(k−1) ρ_mid] − Tr[H^(k−1) ρ_before]`.
    pub energy_injected: f64,
    /// `ΔS_ms^(n,k) = S(ρ_mid) − S(ρ_before)`.
    pub entropy_disturbance: f64,
    pub entropy_before: f64,
    pub entropy_mid: f64,
    pub entropy_after: f64,
    pub energy_before: f64,
    pub energy_mid: f64,
    pub energy_after: f64,
    /// `‖ρ_mid − ρ_before‖_HS`.
    pub disturbance: f64,
}

fn advance(
    cycle: &EngineCycle,
    n: usize,
    k: usize,
    before: &DensityOperator,
    entropy_before: f64,
) -> Result<StepRecord> {
    let step = &cycle.steps[k - 1];
    let h_prev = cycle.hamiltonian_at(k - 1);
    let h_next = cycle.hamiltonian_at(k);
    let (mid, post_channel) = match step.channel.kind() {
        ChannelKind::BareMeasurement | ChannelKind::Thermal | ChannelKind::Composite => {
            let mid = step.channel.apply(before)?;
            (mid.clone(), mid)
        }
        ChannelKind::Feedback | ChannelKind::GeneralMeasurement | ChannelKind::Unitary => {
            let (bare, _) = step.channel.measurement_parts().ok_or(Error::EigSolverFailure)?;
            (bare.apply(before)?, step.channel.apply(before)?)
        }
    };
    let after = post_channel.conjugate(&step.unitary)?;
    let energy_before = energy_expectation(h_prev, before)?;
    let energy_mid = energy_expectation(h_prev, &mid)?;
    let energy_after = energy_expectation(h_next, &after)?;
    let entropy_mid = mid.entropy();
    let entropy_after = after.entropy();
    let disturbance = hs_norm(&(mid.matrix() - before.matrix()));
    Ok(StepRecord {
        n,
        k,
        state_before: before.clone(),
        state_mid: mid,
        state_after: after,
        work: energy_after - energy_mid,
        energy_injected: energy_mid - energy_before,
        entropy_disturbance: entropy_mid - entropy_before,
        entropy_before,
        entropy_mid,
        entropy_after,
        energy_before,
        energy_mid,
        energy_after,
        disturbance,
    })
}

/// Drive the cycle `n_cycles` times from `rho0`, handing each step record to `visit`.
/// Returns the final state.
pub fn run_with(
    cycle: &EngineCycle,
    rho0: &DensityOperator,
    n_cycles: usize,
    mut visit: impl FnMut(&StepRecord) -> Result<()>,
) -> Result<DensityOperator> {
    if rho0.dim() != cycle.dim() {
        return Err(Error::DimMismatch {
            expected: cycle.dim(),
            found: rho0.dim(),
        });
    }
    let mut state = rho0.clone();
    let mut entropy = state.entropy();
    for n in 1..=n_cycles {
        for k in 1..=cycle.steps.len() {
            let rec = advance(cycle, n, k, &state, entropy)?;
            visit(&rec)?;
            entropy = rec.entropy_after;
            state = rec.state_after;
        }
    }
    Ok(state)
}

#[derive(Clone, Debug)]
pub struct CycleLedger {
    pub records: Vec<StepRecord>,
    pub initial_state: DensityOperator,
    pub final_state: DensityOperator,
    pub steps_per_cycle: usize,
}

impl CycleLedger {
    pub fn total_work(&self) -> f64 {
        self.records.iter().map(|r| r.work).sum()
    }

    pub fn total_energy_injected(&self) -> f64 {
        self.records.iter().map(|r| r.energy_injected).sum()
    }

    /// Work per cycle, indexed by cycle number − 1.
    pub fn work_per_cycle(&self) -> Vec<f64> {
        self.records
            .chunks(self.steps_per_cycle)
            .map(|c| c.iter().map(|r| r.work).sum())
            .collect()
    }

    pub fn max_abs_energy_injected(&self) -> f64 {
        self.records
            .iter()
            .fold(0.0f64, |acc, r| acc.max(r.energy_injected.abs()))
    }

    /// `|Σ(W + E_ms) − (Tr[Hρ_final] − Tr[Hρ_initial])|`.
    pub fn bookkeeping_residual(&self, h: &HermitianOperator) -> Result<f64> {
        let delta = energy_expectation(h, &self.final_state)? - energy_expectation(h, &self.initial_state)?;
        Ok((self.total_work() + self.total_energy_injected() - delta).abs())
    }

    /// CSV with columns `n, k, W, E_ms, dS_ms, S_before, S_mid, S_after, E_before, E_mid, E_after`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(LEDGER_COLUMNS)?;
        for r in &self.records {
            let mut row = vec![r.n.to_string(), r.k.to_string()];
            row.extend(
                [
                    r.work,
                    r.energy_injected,
                    r.entropy_disturbance,
                    r.entropy_before,
                    r.entropy_mid,
                    r.entropy_after,
                    r.energy_before,
                    r.energy_mid,
                    r.energy_after,
                ]
                .iter()
                .map(|&x| fmt_f64(x)),
            );
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub const LEDGER_COLUMNS: [&str; 11] = [
    "n", "k", "W", "E_ms", "dS_ms", "S_before", "S_mid", "S_after", "E_before", "E_mid", "E_after",
];

/// Floats in reports carry 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn run(cycle: &EngineCycle, rho0: &DensityOperator, n_cycles: usize) -> Result<CycleLedger> {
    if n_cycles == 0 {
        return Err(Error::ParamOutOfRange {
            name: "n_cycles",
            value: 0.0,
        });
    }
    let mut records = Vec::with_capacity(n_cycles * cycle.steps.len());
    let final_state = run_with(cycle, rho0, n_cycles, |r| {
        records.push(r.clone());
        Ok(())
    })?;
    Ok(CycleLedger {
        records,
        initial_state: rho0.clone(),
        final_state,
        steps_per_cycle: cycle.steps.len(),
    })
}

/// Settings for the steady-regime analysis.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SpectralSettings {
    pub tau_perip: f64,
    pub epsilon: f64,
    pub n_max: usize,
}

impl Default for SpectralSettings {
    fn default() -> Self {
        Self {
            tau_perip: TAU_PERIP,
            epsilon: 1e-6,
            n_max: 100_000,
        }
    }
}

/// Peripheral projection of `rho0` under the cycle map.
pub fn steady_state(cycle: &EngineCycle, rho0: &DensityOperator, settings: &SpectralSettings) -> Result<DensityOperator> {
    let e = cycle.superoperator()?;
    let pd = peripheral_projector_or_cesaro(&e, settings.tau_perip)?;
    project_peripheral(&pd, rho0)
}

/// Running totals at one recurrence time `n_i`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RecurrenceTotals {
    pub n: usize,
    pub w_total: f64,
    pub e_ms_total: f64,
    pub ds_ms_total: f64,
    /// `Tr[H E^n(ρ_φ)] − Tr[Hρ_φ]`.
    pub delta_e: f64,
    /// `|W_total + E_ms_total|`.
    pub residual: f64,
    /// `|W_total + E_ms_total − ΔE|`; zero up to roundoff.
    pub bookkeeping_error: f64,
    /// `‖E^n(ρ_φ) − ρ_φ‖_1`.
    pub trace_distance: f64,
    /// `‖H‖_op · trace_distance`.
    pub energy_bound: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FirstLawReport {
    pub recurrence: RecurrenceRecord,
    pub totals: Vec<RecurrenceTotals>,
    pub hamiltonian_norm: f64,
    /// Values at the largest recurrence time, standing in for the `i → ∞` limits.
    pub w_total_limit: f64,
    pub e_ms_total_limit: f64,
    pub ds_ms_total_limit: f64,
    pub residual_limit: f64,
    /// `−W_total / n` at the largest recurrence time.
    pub extracted_work_per_cycle: f64,
    pub max_abs_energy_injected: f64,
    pub max_abs_entropy_disturbance: f64,
    pub max_disturbance: f64,
    pub max_bookkeeping_error: f64,
    /// Largest `residual − energy_bound` over all recurrences.
    pub worst_bound_excess: f64,
}

/// Project onto the steady regime, find recurrences and accumulate the
/// first-law totals along them.
pub fn first_law_report(
    cycle: &EngineCycle,
    rho0: &DensityOperator,
    settings: &SpectralSettings,
) -> Result<FirstLawReport> {
    let e = cycle.superoperator()?;
    let pd = peripheral_projector_or_cesaro(&e, settings.tau_perip)?;
    let rho_phi = project_peripheral(&pd, rho0)?;
    let recurrence = find_recurrences(&e, &rho_phi, settings.epsilon, settings.n_max)?;
    first_law_along(cycle, &rho_phi, recurrence)
}

/// First-law totals from a given steady state and its recurrence record.
pub fn first_law_along(
    cycle: &EngineCycle,
    rho_phi: &DensityOperator,
    recurrence: RecurrenceRecord,
) -> Result<FirstLawReport> {
    let h = cycle.hamiltonian();
    let h_norm = h.operator_norm();
    let e0 = energy_expectation(h, rho_phi)?;
    let k_last = cycle.steps.len();
    let n_last = recurrence.last_time().unwrap_or(0);

    let mut w = 0.0;
    let mut e_ms = 0.0;
    let mut ds = 0.0;
    let mut max_e = 0.0f64;
    let mut max_ds = 0.0f64;
    let mut max_dist = 0.0f64;
    let mut totals = Vec::with_capacity(recurrence.times.len());
    let mut next = recurrence.times.iter().peekable();
    run_with(cycle, rho_phi, n_last, |r| {
        w += r.work;
        e_ms += r.energy_injected;
        ds += r.entropy_disturbance;
        max_e = max_e.max(r.energy_injected.abs());
        max_ds = max_ds.max(r.entropy_disturbance.abs());
        max_dist = max_dist.max(r.disturbance);
        if r.k == k_last && next.peek() == Some(&&r.n) {
            next.next();
            let delta_e = energy_expectation(h, &r.state_after)? - e0;
            let trace_distance = trace_norm_hermitian(&(r.state_after.matrix() - rho_phi.matrix()));
            totals.push(RecurrenceTotals {
                n: r.n,
                w_total: w,
                e_ms_total: e_ms,
                ds_ms_total: ds,
                delta_e,
                residual: (w + e_ms).abs(),
                bookkeeping_error: (w + e_ms - delta_e).abs(),
                trace_distance,
                energy_bound: h_norm * trace_distance,
            });
        }
        Ok(())
    })?;
    let last = totals.last().cloned();
    let max_bookkeeping_error = totals.iter().fold(0.0f64, |a, t| a.max(t.bookkeeping_error));
    let worst_bound_excess = totals
        .iter()
        .fold(f64::NEG_INFINITY, |a, t| a.max(t.residual - t.energy_bound));
    Ok(FirstLawReport {
        recurrence,
        hamiltonian_norm: h_norm,
        w_total_limit: last.as_ref().map_or(0.0, |t| t.w_total),
        e_ms_total_limit: last.as_ref().map_or(0.0, |t| t.e_ms_total),
        ds_ms_total_limit: last.as_ref().map_or(0.0, |t| t.ds_ms_total),
        residual_limit: last.as_ref().map_or(0.0, |t| t.residual),
        extracted_work_per_cycle: last.as_ref().map_or(0.0, |t| -t.w_total / t.n as f64),
        max_abs_energy_injected: max_e,
        max_abs_entropy_disturbance: max_ds,
        max_disturbance: max_dist,
        max_bookkeeping_error,
        worst_bound_excess,
        totals,
    })
}

/// Thermal contact: a channel preserving `gibbs(H, β)`.
#[derive(Clone, Debug)]
pub struct ThermalContact {
    pub channel: KrausChannel,
    pub hamiltonian: HermitianOperator,
    pub beta: f64,
}

/// Operation sequence `ρ → bare measurement → feedback → unitary → thermal contact`,
/// each part optional.
#[derive(Clone, Debug, Default)]
pub struct CompositeOperation {
    pub measurement: Option<KrausChannel>,
    pub feedback: Option<Vec<CMatrix>>,
    pub unitary: Option<CMatrix>,
    pub thermal: Option<ThermalContact>,
}

impl CompositeOperation {
    /// Decompose an engine step into its entropy-relevant parts.
    pub fn from_step(step: &EngineStep) -> Self {
        let mut op = CompositeOperation {
            unitary: Some(step.unitary.clone()),
            ..Default::default()
        };
        match step.channel.kind() {
            ChannelKind::Thermal => {
                if let Some(p) = step.channel.thermal_params() {
                    op.thermal = Some(ThermalContact {
                        channel: step.channel.clone(),
                        hamiltonian: p.hamiltonian.clone(),
                        beta: p.beta,
                    });
                }
            }
            ChannelKind::BareMeasurement => op.measurement = Some(step.channel.clone()),
            _ => {
                if let Some((bare, us)) = step.channel.measurement_parts() {
                    op.measurement = Some(bare);
                    op.feedback = Some(us);
                }
            }
        }
        op
    }
}

/// Entropy changes of each part of a composite operation.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct EntropyBudget {
    pub ds_unitary: f64,
    pub ds_measurement: f64,
    pub ds_feedback: f64,
    pub ds_thermal: f64,
    pub chi_ms: f64,
    pub q_out: f64,
    pub beta: f64,
    /// `ΔS_fb + χ_ms`, nonnegative.
    pub feedback_bound_residual: f64,
    /// `ΔS_th + β Q_out`, nonnegative.
    pub second_law_residual: f64,
}

/// Information gain `χ_ms = S(Σ M_s ρ M_s) − Σ p_s S(M_s ρ M_s / p_s)`, `p_s = Tr(M_s² ρ)`.
pub fn information_gain(bare: &KrausChannel, rho: &DensityOperator) -> Result<f64> {
    let averaged = bare.apply(rho)?.entropy();
    let mut branch = 0.0;
    for m in bare.kraus_ops() {
        let unnormalized = m * rho.matrix() * m.adjoint();
        let p = crate::operators::trace(&unnormalized).re;
        if p < tol::PROB {
            continue;
        }
        let post = DensityOperator::new(unnormalized.unscale(p))?;
        branch += p * post.entropy();
    }
    Ok(averaged - branch)
}

pub fn entropy_budget(op: &CompositeOperation, rho: &DensityOperator) -> Result<EntropyBudget> {
    let mut budget = EntropyBudget::default();
    let mut state = rho.clone();
    if let Some(m) = &op.measurement {
        if m.dim() != rho.dim() {
            return Err(Error::DimMismatch {
                expected: rho.dim(),
                found: m.dim(),
            });
        }
        let mid = m.apply(&state)?;
        budget.ds_measurement = mid.entropy() - state.entropy();
        budget.chi_ms = information_gain(m, &state)?;
        if let Some(us) = &op.feedback {
            let ops: Vec<CMatrix> = m.kraus_ops().iter().zip(us).map(|(k, u)| u * k).collect();
            let mut out = CMatrix::zeros(rho.dim(), rho.dim());
            for k in &ops {
                out += k * state.matrix() * k.adjoint();
            }
            let after = DensityOperator::new(out)?;
            budget.ds_feedback = after.entropy() - mid.entropy();
            state = after;
        } else {
            state = mid;
        }
        budget.feedback_bound_residual = budget.ds_feedback + budget.chi_ms;
    }
    if let Some(u) = &op.unitary {
        let after = state.conjugate(u)?;
        budget.ds_unitary = after.entropy() - state.entropy();
        state = after;
    }
    if let Some(th) = &op.thermal {
        let after = th.channel.apply(&state)?;
        budget.ds_thermal = after.entropy() - state.entropy();
        budget.q_out = energy_expectation(&th.hamiltonian, &state)? - energy_expectation(&th.hamiltonian, &after)?;
        budget.beta = th.beta;
        budget.second_law_residual = budget.ds_thermal + th.beta * budget.q_out;
    }
    Ok(budget)
}

/// Reference qubit engines for the four measurement-powered engine layouts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// σ_x measurement with outcome-conditioned feedback `U_±: |±⟩ → |g⟩`.
    Fig1aFeedback,
    /// Measurement along a tilted axis, a fixed rotation, then partial thermalization.
    Fig1bThermal,
    /// The feedback engine with a single outcome-independent unitary.
    Fig1cNoFeedback,
    /// The thermal engine with the bath replaced by a σ_x measurement.
    Fig1dTwoMeasurements,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::Fig1aFeedback,
        Scenario::Fig1bThermal,
        Scenario::Fig1cNoFeedback,
        Scenario::Fig1dTwoMeasurements,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Fig1aFeedback => "fig1a_feedback",
            Scenario::Fig1bThermal => "fig1b_thermal",
            Scenario::Fig1cNoFeedback => "fig1c_no_feedback",
            Scenario::Fig1dTwoMeasurements => "fig1d_two_measurements",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }

    /// Reference initial state: the ground state, or the bath's Gibbs state for (b).
    pub fn initial_state(self) -> DensityOperator {
        match self {
            Scenario::Fig1bThermal => gibbs_state(&qubit_hamiltonian(), THERMAL_BETA).expect("valid Gibbs state"),
            _ => DensityOperator::new(ground_projector()).expect("pure state"),
        }
    }
}

/// Tilt of the first measurement axis from `z` in the thermal and two-measurement engines.
pub const TILT: f64 = std::f64::consts::FRAC_PI_3;
pub const THERMAL_BETA: f64 = 2.0;
pub const THERMAL_LAMBDA: f64 = 0.5;

/// `H = ½σ_z` with `|g⟩ = (0, 1)`.
pub fn qubit_hamiltonian() -> HermitianOperator {
    HermitianOperator::new(pauli::z().scale(0.5)).expect("Hermitian")
}

pub fn ground_projector() -> CMatrix {
    real_matrix(2, &[0., 0., 0., 1.])
}

/// Projectors `½(1 ± n·σ)` for `n = (sin θ, 0, cos θ)`.
pub fn axis_projectors(theta: f64) -> [CMatrix; 2] {
    let (s, c) = theta.sin_cos();
    [
        real_matrix(2, &[0.5 * (1.0 + c), 0.5 * s, 0.5 * s, 0.5 * (1.0 - c)]),
        real_matrix(2, &[0.5 * (1.0 - c), -0.5 * s, -0.5 * s, 0.5 * (1.0 + c)]),
    ]
}

/// `e^{iθσ_y/2}`, rotating the Bloch axis `(sin θ, 0, cos θ)` onto `z`.
pub fn tilt_back_rotation(theta: f64) -> CMatrix {
    let (s, c) = (0.5 * theta).sin_cos();
    real_matrix(2, &[c, s, -s, c])
}

/// `U_+ = |g⟩⟨+| + |e⟩⟨−|` and `U_− = |g⟩⟨−| + |e⟩⟨+|`.
pub fn feedback_unitaries() -> [CMatrix; 2] {
    let s = FRAC_1_SQRT_2;
    [real_matrix(2, &[s, -s, s, s]), real_matrix(2, &[s, s, s, -s])]
}

pub fn scenario(name: Scenario) -> EngineCycle {
    let h = qubit_hamiltonian();
    let sx = axis_projectors(std::f64::consts::FRAC_PI_2);
    let step = |channel: KrausChannel, unitary: CMatrix, post: HermitianOperator| EngineStep {
        channel,
        unitary,
        post_hamiltonian: post,
    };
    let steps = match name {
        Scenario::Fig1aFeedback => {
            let [up, um] = feedback_unitaries();
            let fb = feedback_from_measurement(sx.to_vec(), vec![up, um]).expect("valid feedback");
            vec![step(fb, identity(2), h.clone())]
        }
        Scenario::Fig1bThermal => {
            let m = bare_measurement(axis_projectors(TILT).to_vec()).expect("projective");
            let th = partial_thermalization(&h, THERMAL_BETA, THERMAL_LAMBDA).expect("valid");
            vec![
                step(m, tilt_back_rotation(TILT), h.clone()),
                step(th, identity(2), h.clone()),
            ]
        }
        Scenario::Fig1cNoFeedback => {
            let [up, _] = feedback_unitaries();
            let m = bare_measurement(sx.to_vec()).expect("projective");
            vec![step(m, up, h.clone())]
        }
        Scenario::Fig1dTwoMeasurements => {
            let m1 = bare_measurement(axis_projectors(TILT).to_vec()).expect("projective");
            let m2 = bare_measurement(sx.to_vec()).expect("projective");
            let driven = HermitianOperator::new(pauli::z()).expect("Hermitian");
            vec![
                step(m1, tilt_back_rotation(TILT), driven),
                step(m2, identity(2), h.clone()),
            ]
        }
    };
    EngineCycle::new(h, steps).expect("reference cycle is closed")
}
