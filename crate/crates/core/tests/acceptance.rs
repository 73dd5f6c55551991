//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use measurement_engine::channels::{to_superoperator, unitary_channel, vectorize, unvectorize, KrausChannel};
use measurement_engine::engine::{
    entropy_budget, first_law_report, run, scenario, steady_state, CompositeOperation,
    EngineCycle, EngineStep, Scenario, SpectralSettings,
};
use measurement_engine::operators::{hs_inner, hs_norm, pauli, CMatrix, DensityOperator};
use measurement_engine::random::{derive_seed, random_density, random_operator, random_unitary, rng_from_seed};
use measurement_engine::sampling::{
    random_bare_cycle, random_feedback, random_general_channel, random_hamiltonian, random_thermal, CycleFamily,
};
use measurement_engine::spectral::{peripheral_projector_or_cesaro, TAU_PERIP};
use measurement_engine::verify::{
    verify_commutator_identity, verify_half_contractivity, verify_monotonicity, verify_no_go_suite,
    verify_nondisturbance_equivalence, TrialReport,
};
use measurement_engine::{channels::bare_measurement, engine::axis_projectors, Result};

const SEED: u64 = 20_240_601;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Result<Verdict> {
    Ok(Verdict { pass, detail })
}

fn stat(r: &TrialReport, key: &str) -> f64 {
    r.stats.get(key).copied().unwrap_or(f64::NAN)
}

fn suite_line(r: &TrialReport) -> String {
    format!("{} d={} {}/{} worst={:.2e}", r.suite, r.dim, r.n_pass, r.n_trials, r.worst_violation)
}

fn criterion_1() -> Result<Verdict> {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    let (mut max_e, mut max_dist, mut max_w) = (0.0f64, 0.0f64, 0.0f64);
    for (dim, trials) in [(2, 67), (3, 67), (4, 66)] {
        let r = verify_no_go_suite(dim, trials, derive_seed(SEED, dim as u64))?;
        pass &= r.passed();
        max_e = max_e.max(stat(&r, "max.max_abs_energy_injected"));
        max_dist = max_dist.max(stat(&r, "max.max_disturbance"));
        max_w = max_w.max(stat(&r, "max.max_abs_w_total"));
        parts.push(format!("d={dim}: {}/{}", r.n_pass, r.n_trials));
    }
    let elapsed = start.elapsed();
    pass &= elapsed <= Duration::from_secs(300);
    verdict(
        pass,
        format!(
            "200 random bare cycles ({}) max|E_ms|={max_e:.2e} max disturbance={max_dist:.2e} max|W_total|={max_w:.2e} in {:.1}s",
            parts.join(", "),
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_2() -> Result<Verdict> {
    let settings = SpectralSettings {
        n_max: 1000,
        ..Default::default()
    };
    let fb = scenario(Scenario::Fig1aFeedback);
    let rho_phi = steady_state(&fb, &Scenario::Fig1aFeedback.initial_state(), &settings)?;
    let ledger = run(&fb, &rho_phi, 50)?;
    let w_err = ledger.records.iter().fold(0.0f64, |a, r| a.max((r.work + 0.5).abs()));
    let e_err = ledger.records.iter().fold(0.0f64, |a, r| a.max((r.energy_injected - 0.5).abs()));
    let report = first_law_report(&fb, &Scenario::Fig1aFeedback.initial_state(), &settings)?;
    let sum_err = report.totals.iter().fold(0.0f64, |a, t| a.max(t.residual));
    let pass_a = w_err <= 1e-10 && e_err <= 1e-10 && sum_err <= 1e-10;

    let th = scenario(Scenario::Fig1bThermal);
    let rho0 = Scenario::Fig1bThermal.initial_state();
    let rho_phi = steady_state(&th, &rho0, &settings)?;
    let ledger = run(&th, &rho_phi, 50)?;
    let per_cycle = ledger.work_per_cycle();
    let max_w = per_cycle.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let entering_bath = &ledger.records[0].state_after;
    let budget = entropy_budget(&CompositeOperation::from_step(&th.steps()[1]), entering_bath)?;
    let pass_b = max_w < 0.0 && budget.second_law_residual >= -1e-9;
    verdict(
        pass_a && pass_b,
        format!(
            "feedback: |W+0.5|<={w_err:.1e} |E_ms-0.5|<={e_err:.1e} first-law sum<={sum_err:.1e}; thermal: W/cycle={:.6e} second-law residual={:.3e}",
            per_cycle[0], budget.second_law_residual
        ),
    )
}

fn criterion_3() -> Result<Verdict> {
    let mut pass = true;
    let mut parts = Vec::new();
    for dim in 2..=4 {
        let r = verify_monotonicity(dim, 10_000, derive_seed(SEED, 30 + dim as u64))?;
        pass &= r.passed();
        parts.push(format!("{} min dS={:.2e}", suite_line(&r), stat(&r, "min.entropy_change")));
    }
    verdict(pass, parts.join("; "))
}

fn criterion_4() -> Result<Verdict> {
    let mut pass = true;
    let mut parts = Vec::new();
    for dim in 2..=4 {
        // Trials cycle fixed-point / disturbing / sweep, so 3000 trials give 1000 of each.
        let r = verify_nondisturbance_equivalence(dim, 3000, derive_seed(SEED, 40 + dim as u64))?;
        pass &= r.passed();
        let fixed = stat(&r, "max.fixed_point_entropy_change")
            .abs()
            .max(stat(&r, "min.fixed_point_entropy_change").abs())
            .max(stat(&r, "max.endpoint_entropy_change").abs())
            .max(stat(&r, "min.endpoint_entropy_change").abs());
        parts.push(format!(
            "{} max|dS| at fixed points={fixed:.1e} min dS when disturbed={:.3e} min sweep modulus={:.3e}",
            suite_line(&r),
            stat(&r, "min.judged_entropy_change"),
            stat(&r, "min.modulus")
        ));
    }
    verdict(pass, parts.join("; "))
}

fn criterion_5() -> Result<Verdict> {
    let mut pass = true;
    let mut parts = Vec::new();
    for dim in 2..=4 {
        let h = verify_half_contractivity(dim, 10_000, derive_seed(SEED, 50 + dim as u64))?;
        let c = verify_commutator_identity(dim, 10_000, derive_seed(SEED, 60 + dim as u64))?;
        pass &= h.passed() && c.passed();
        pass &= h.worst_violation <= 1e-9 - 1e-10 && c.worst_violation <= 1e-9 - 1e-10;
        parts.push(format!(
            "{}; {} max|residual|={:.1e}",
            suite_line(&h),
            suite_line(&c),
            stat(&c, "max.residual").abs().max(stat(&c, "min.residual").abs())
        ));
    }
    let m = bare_measurement(axis_projectors(std::f64::consts::FRAC_PI_2).to_vec())?;
    let z = pauli::z();
    let mz = m.apply_operator(&z);
    let lhs = hs_norm(&z).powi(2) - hs_inner(&z, &mz)?.re;
    let rhs: f64 = m.kraus_ops().iter().map(|p| 0.5 * hs_norm(&(&z * p - p * &z)).powi(2)).sum();
    let example = (lhs - 2.0).abs() <= 1e-12 && (rhs - 2.0).abs() <= 1e-12 && hs_norm(&mz) <= 1e-15;
    pass &= example;
    parts.push(format!("sigma_x/sigma_z example LHS={lhs} RHS={rhs}"));
    verdict(pass, parts.join("; "))
}

/// Cycle whose only step is a unitary rotation; every state is peripheral.
fn unitary_cycle(u: CMatrix, h: measurement_engine::operators::HermitianOperator) -> Result<EngineCycle> {
    let d = u.nrows();
    EngineCycle::new(
        h.clone(),
        vec![EngineStep {
            channel: unitary_channel(u)?,
            unitary: measurement_engine::operators::identity(d),
            post_hamiltonian: h,
        }],
    )
}

fn mixed_cycle(dim: usize, i: usize, rng: &mut measurement_engine::random::SeededRng) -> Result<EngineCycle> {
    let h = random_hamiltonian(dim, rng);
    let channel: KrausChannel = match i % 3 {
        0 => random_feedback(dim, 2, rng)?,
        1 => random_thermal(dim, rng)?.0,
        _ => random_general_channel(dim, 2, rng)?,
    };
    let mid = random_hamiltonian(dim, rng);
    EngineCycle::new(
        h.clone(),
        vec![
            EngineStep {
                channel,
                unitary: random_unitary(dim, rng),
                post_hamiltonian: mid,
            },
            EngineStep {
                channel: measurement_engine::channels::random_bare_measurement(dim, 2, rng)?,
                unitary: random_unitary(dim, rng),
                post_hamiltonian: h,
            },
        ],
    )
}

fn criterion_6() -> Result<Verdict> {
    let mut cases: Vec<(EngineCycle, DensityOperator, SpectralSettings)> = Vec::new();
    let fine = SpectralSettings {
        n_max: 2000,
        ..Default::default()
    };
    for s in Scenario::ALL {
        cases.push((scenario(s), s.initial_state(), fine));
    }
    let mut rng = rng_from_seed(derive_seed(SEED, 6));
    for i in 0..60 {
        let dim = 2 + i % 3;
        let cycle = match i % 3 {
            0 => random_bare_cycle(dim, 1 + i % 2, CycleFamily::Commuting, &mut rng)?,
            1 => random_bare_cycle(dim, 2, CycleFamily::Generic, &mut rng)?,
            _ => mixed_cycle(dim, i / 3, &mut rng)?,
        };
        cases.push((cycle, random_density(dim, dim, &mut rng), fine));
    }
    // Quasi-periodic qubit rotations: recurrences only to within ε, so the residual is nonzero.
    let coarse = SpectralSettings {
        epsilon: 2e-2,
        n_max: 10_000,
        ..Default::default()
    };
    for _ in 0..20 {
        let h = random_hamiltonian(2, &mut rng);
        cases.push((unitary_cycle(random_unitary(2, &mut rng), h)?, random_density(2, 2, &mut rng), coarse));
    }
    let mut pass = true;
    let mut worst_excess = f64::NEG_INFINITY;
    let mut max_residual = 0.0f64;
    let mut max_ratio = 0.0f64;
    let mut recurrences = 0;
    for (cycle, rho0, settings) in &cases {
        let r = first_law_report(cycle, rho0, settings)?;
        for t in &r.totals {
            recurrences += 1;
            let excess = t.residual - (t.energy_bound + 1e-10);
            worst_excess = worst_excess.max(excess);
            pass &= excess <= 0.0;
            max_residual = max_residual.max(t.residual);
            if t.energy_bound > 1e-12 {
                max_ratio = max_ratio.max(t.residual / t.energy_bound);
            }
        }
    }
    verdict(
        pass,
        format!(
            "{} cycles, {recurrences} recurrences: max residual={max_residual:.3e}, max residual/(|H| dist)={max_ratio:.3}, worst excess over bound={worst_excess:.2e}",
            cases.len()
        ),
    )
}

fn criterion_7() -> Result<Verdict> {
    let mut rng = rng_from_seed(derive_seed(SEED, 7));
    let mut worst = 0.0f64;
    let mut worst_choi = 0.0f64;
    let mut pass = true;
    for i in 0..200 {
        let dim = 2 + i % 3;
        let cycle = match i % 4 {
            0 | 1 => random_bare_cycle(dim, 1 + i % 3, CycleFamily::Commuting, &mut rng)?,
            2 => random_bare_cycle(dim, 1 + i % 3, CycleFamily::Generic, &mut rng)?,
            _ => mixed_cycle(dim, i, &mut rng)?,
        };
        let e = cycle.superoperator()?;
        let pd = peripheral_projector_or_cesaro(&e, TAU_PERIP)?;
        let c = pd.check(&e);
        worst = worst
            .max(c.idempotence)
            .max(c.commutation)
            .max(c.trace_preservation)
            .max(c.choi_hermiticity);
        worst_choi = worst_choi.max(-c.choi_min_eigenvalue);
        pass &= c.all_within(1e-8);
    }
    // Strictly contractive channels: the projection is X ↦ Tr(X)·σ with σ the unique fixed state.
    let mut worst_rank_one = 0.0f64;
    for i in 0..60 {
        let dim = 2 + i % 3;
        let ch = random_general_channel(dim, 2 + i % 2, &mut rng)?;
        let e = to_superoperator(&ch);
        let pd = peripheral_projector_or_cesaro(&e, TAU_PERIP)?;
        pass &= pd.peripheral_indices.len() == 1;
        // Oracle: power iteration to the fixed state.
        let mut v = vectorize(&measurement_engine::operators::identity(dim).unscale(dim as f64));
        for _ in 0..20_000 {
            let next = e.matrix() * &v;
            let delta = (&next - &v).norm();
            v = next;
            if delta < 1e-15 {
                break;
            }
        }
        let sigma = unvectorize(&v, dim);
        for _ in 0..5 {
            let x = random_operator(dim, false, &mut rng);
            let px = pd.projector.apply_operator(&x);
            let expected = sigma.scale(1.0) * x.trace();
            worst_rank_one = worst_rank_one.max(hs_norm(&(px - expected)));
        }
    }
    pass &= worst_rank_one <= 1e-8;
    verdict(
        pass,
        format!(
            "200 cycles: max projector residual={worst:.2e}, most negative Choi eigenvalue={:.2e}; 60 contractive channels: rank-1 deviation={worst_rank_one:.2e}",
            -worst_choi
        ),
    )
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn criterion_8() -> Result<Verdict> {
    let exe = env!("CARGO_BIN_EXE_engine");
    let tmp = std::env::temp_dir().join(format!("engine-acceptance-{}", std::process::id()));
    let mut pass = true;
    let mut compared = 0;
    let mut configs: Vec<PathBuf> = std::fs::read_dir(configs_dir())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    configs.sort();
    for config in &configs {
        let name = config.file_stem().unwrap().to_string_lossy().to_string();
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let dir = tmp.join(format!("{name}-{rep}"));
            let status = Command::new(exe)
                .args(["run", config.to_str().unwrap(), "--out", dir.to_str().unwrap()])
                .env("ENGINE_LOG", "quiet")
                .output()?;
            pass &= status.status.success();
            let spectrum = Command::new(exe)
                .args(["spectrum", config.to_str().unwrap()])
                .env("ENGINE_LOG", "quiet")
                .output()?;
            let mut files = Vec::new();
            for f in ["ledger.csv", "first_law.json", "entropy_budget.json"] {
                files.push(std::fs::read(dir.join(f))?);
            }
            files.push(spectrum.stdout);
            outputs.push(files);
        }
        for (a, b) in outputs[0].iter().zip(&outputs[1]) {
            compared += 1;
            pass &= a == b && !a.is_empty();
        }
    }
    let suite = |_: ()| {
        Command::new(exe)
            .args(["verify", "--suite", "monotonicity", "--dim", "3", "--trials", "200", "--seed", "9"])
            .output()
            .map(|o| o.stdout)
    };
    let (a, b) = (suite(())?, suite(())?);
    compared += 1;
    pass &= a == b && !a.is_empty();
    std::fs::remove_dir_all(&tmp).ok();
    verdict(
        pass && configs.len() == 4,
        format!("{} bundled configs, {compared} output pairs byte-identical", configs.len()),
    )
}

type Criterion = fn() -> Result<Verdict>;

fn main() {
    let criteria: [(&str, Criterion); 8] = [
        ("no-go theorem on random bare cycles", criterion_1),
        ("negative controls (feedback and thermal engines)", criterion_2),
        ("entropy monotonicity", criterion_3),
        ("nondisturbance equivalence", criterion_4),
        ("half-contractivity and commutator identity", criterion_5),
        ("first law along recurrences", criterion_6),
        ("peripheral projection", criterion_7),
        ("determinism of bundled configs", criterion_8),
    ];
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = match f() {
            Ok(v) => (v.pass, v.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failures += 1;
        }
        println!(
            "criterion {}: {} {name} [{:.1}s] {detail}",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
