//! Command implementations behind the `engine` binary.

use std::collections::BTreeMap;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use log::{debug, info};
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::config::EngineConfig;
use crate::engine::{
    entropy_budget, first_law_report, fmt_f64, run, steady_state, CompositeOperation, EntropyBudget, FirstLawReport,
};
use crate::error::{Error, Result};
use crate::spectral::{
    find_recurrences, peripheral_projector_or_cesaro, project_peripheral, spectrum as channel_spectrum,
    ProjectorMethod, RecurrenceRecord,
};
use crate::verify::{Suite, TrialReport};

#[derive(Debug, Parser)]
#[command(name = "engine", version, about = "Measurement-powered engine cycles: ledgers, spectra and property suites")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an engine config; writes ledger.csv, first_law.json and entropy_budget.json.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the cycle spectrum, peripheral indices and recurrences as JSON.
    Spectrum { config: PathBuf },
    /// Run a property suite and print its report as JSON.
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Aggregate a ledger CSV into per-cycle totals and a long-format CSV.
    Report {
        ledger: PathBuf,
        /// Output directory (defaults to the ledger's directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Pretty JSON whose floats carry 17 significant digits.
struct Sig17(PrettyFormatter<'static>);

impl Formatter for Sig17 {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt_f64(value).as_bytes())
    }
    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("in-memory JSON serialization");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON is UTF-8")
}

/// Headline numbers of a run; `expect` entries refer to these keys.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunSummary {
    pub values: BTreeMap<String, f64>,
    pub failed_expectations: Vec<String>,
}

impl RunSummary {
    pub fn line(&self) -> String {
        let v = |k: &str| self.values.get(k).copied().unwrap_or(f64::NAN);
        format!(
            "W_total = {:.6e} at n = {} (extracted work per cycle {:.6e}); max |E_ms| in steady regime = {:.3e}",
            v("w_total_limit"),
            v("last_recurrence"),
            v("extracted_work_per_cycle"),
            v("max_abs_energy_injected"),
        )
    }
}

#[derive(Serialize)]
struct BudgetEntry {
    k: usize,
    budget: EntropyBudget,
}

/// `engine run`: ledger from the steady state (or the initial state when
/// `run.steady` is false), first-law report and per-step entropy budgets.
pub fn cmd_run(config_path: &Path, out_dir: &Path) -> Result<RunSummary> {
    let config = EngineConfig::load(config_path)?;
    let cycle = config.cycle()?;
    let rho0 = config.initial_state()?;
    let settings = config.spectral_settings();
    info!("loaded {} (d = {}, K = {})", config_path.display(), cycle.dim(), cycle.steps().len());

    let start = if config.run.steady {
        steady_state(&cycle, &rho0, &settings)?
    } else {
        rho0.clone()
    };
    let ledger = run(&cycle, &start, config.run.n_cycles)?;
    let report: FirstLawReport = first_law_report(&cycle, &rho0, &settings)?;
    debug!("{} recurrences up to n = {:?}", report.totals.len(), report.recurrence.last_time());

    let mut budgets = Vec::with_capacity(cycle.steps().len());
    let mut state = start.clone();
    for (i, step) in cycle.steps().iter().enumerate() {
        budgets.push(BudgetEntry {
            k: i + 1,
            budget: entropy_budget(&CompositeOperation::from_step(step), &state)?,
        });
        state = ledger.records[i].state_after.clone();
    }

    std::fs::create_dir_all(out_dir)?;
    ledger.write_csv(std::fs::File::create(out_dir.join("ledger.csv"))?)?;
    std::fs::write(out_dir.join("first_law.json"), to_json(&report))?;
    std::fs::write(out_dir.join("entropy_budget.json"), to_json(&budgets))?;

    let mut values = BTreeMap::new();
    values.insert("w_total_limit".to_string(), report.w_total_limit);
    values.insert("e_ms_total_limit".to_string(), report.e_ms_total_limit);
    values.insert("ds_ms_total_limit".to_string(), report.ds_ms_total_limit);
    values.insert("residual_limit".to_string(), report.residual_limit);
    values.insert("extracted_work_per_cycle".to_string(), report.extracted_work_per_cycle);
    values.insert("max_abs_energy_injected".to_string(), report.max_abs_energy_injected);
    values.insert("max_disturbance".to_string(), report.max_disturbance);
    values.insert("last_recurrence".to_string(), report.recurrence.last_time().unwrap_or(0) as f64);
    values.insert("ledger_total_work".to_string(), ledger.total_work());
    values.insert(
        "ledger_last_cycle_work".to_string(),
        ledger.work_per_cycle().last().copied().unwrap_or(0.0),
    );
    for (i, b) in budgets.iter().enumerate() {
        values.insert(format!("step{}_feedback_bound_residual", i + 1), b.budget.feedback_bound_residual);
        values.insert(format!("step{}_second_law_residual", i + 1), b.budget.second_law_residual);
    }
    let mut failed = Vec::new();
    for e in &config.expect {
        match values.get(&e.quantity) {
            Some(&v) if (v - e.value).abs() <= e.tol => {}
            Some(&v) => failed.push(format!("{}: {} differs from {} by more than {}", e.quantity, v, e.value, e.tol)),
            None => failed.push(format!("{}: unknown quantity", e.quantity)),
        }
    }
    Ok(RunSummary {
        values,
        failed_expectations: failed,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumDump {
    /// `[re, im]`, by modulus descending.
    pub eigenvalues: Vec<[f64; 2]>,
    pub peripheral_indices: Vec<usize>,
    pub projector_method: ProjectorMethod,
    pub recurrence: Option<RecurrenceRecord>,
    pub recurrence_error: Option<String>,
}

/// `engine spectrum`.
pub fn cmd_spectrum(config_path: &Path) -> Result<SpectrumDump> {
    let config = EngineConfig::load(config_path)?;
    let cycle = config.cycle()?;
    let e = cycle.superoperator()?;
    let eigenvalues = channel_spectrum(&e)?.iter().map(|z| [z.re, z.im]).collect();
    let pd = peripheral_projector_or_cesaro(&e, config.run.tau_perip)?;
    let rho_phi = project_peripheral(&pd, &config.initial_state()?)?;
    let (recurrence, recurrence_error) = match find_recurrences(&e, &rho_phi, config.run.epsilon, config.run.n_max) {
        Ok(r) => (Some(r), None),
        Err(err @ Error::NoRecurrenceFound { .. }) => (None, Some(err.to_string())),
        Err(err) => return Err(err),
    };
    Ok(SpectrumDump {
        eigenvalues,
        peripheral_indices: pd.peripheral_indices.clone(),
        projector_method: pd.method,
        recurrence,
        recurrence_error,
    })
}

/// `engine verify`.
pub fn cmd_verify(suite: &str, dim: usize, trials: usize, seed: u64) -> Result<TrialReport> {
    let suite = Suite::from_name(suite).ok_or_else(|| Error::ConfigParse {
        path: "--suite".into(),
        message: format!(
            "unknown suite `{suite}` (expected one of {})",
            Suite::ALL.map(|s| s.name()).join(", ")
        ),
    })?;
    suite.run(dim, trials, seed)
}

/// Per-cycle sums of a ledger.
#[derive(Clone, Debug, PartialEq)]
pub struct CycleTotals {
    pub n: usize,
    pub work: f64,
    pub energy_injected: f64,
    pub entropy_disturbance: f64,
}

#[derive(Debug, Deserialize)]
struct LedgerRow {
    n: usize,
    #[serde(rename = "W")]
    w: f64,
    #[serde(rename = "E_ms")]
    e_ms: f64,
    #[serde(rename = "dS_ms")]
    ds_ms: f64,
}

pub fn read_cycle_totals(ledger: &Path) -> Result<Vec<CycleTotals>> {
    let mut reader = csv::Reader::from_path(ledger)?;
    let mut totals: Vec<CycleTotals> = Vec::new();
    for row in reader.deserialize() {
        let row: LedgerRow = row?;
        match totals.last_mut() {
            Some(t) if t.n == row.n => {
                t.work += row.w;
                t.energy_injected += row.e_ms;
                t.entropy_disturbance += row.ds_ms;
            }
            _ => totals.push(CycleTotals {
                n: row.n,
                work: row.w,
                energy_injected: row.e_ms,
                entropy_disturbance: row.ds_ms,
            }),
        }
    }
    Ok(totals)
}

/// `engine report`: writes `<stem>_per_cycle.csv` and `<stem>_long.csv`; returns the
/// per-cycle CSV text.
pub fn cmd_report(ledger: &Path, out_dir: Option<&Path>) -> Result<String> {
    let totals = read_cycle_totals(ledger)?;
    let dir = out_dir
        .map(Path::to_path_buf)
        .unwrap_or_else(|| ledger.parent().map(Path::to_path_buf).unwrap_or_default());
    let stem = ledger.file_stem().and_then(|s| s.to_str()).unwrap_or("ledger");

    let mut per_cycle = csv::Writer::from_writer(Vec::new());
    per_cycle.write_record(["n", "W", "E_ms", "dS_ms", "W_plus_E_ms"])?;
    let mut long = csv::Writer::from_writer(Vec::new());
    long.write_record(["cycle", "quantity", "value"])?;
    for t in &totals {
        per_cycle.write_record([
            t.n.to_string(),
            fmt_f64(t.work),
            fmt_f64(t.energy_injected),
            fmt_f64(t.entropy_disturbance),
            fmt_f64(t.work + t.energy_injected),
        ])?;
        for (q, v) in [("W", t.work), ("E_ms", t.energy_injected), ("dS_ms", t.entropy_disturbance)] {
            long.write_record([t.n.to_string(), q.to_string(), fmt_f64(v)])?;
        }
    }
    let per_cycle = per_cycle.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    let long = long.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    if !dir.as_os_str().is_empty() {
        std::fs::create_dir_all(&dir)?;
    }
    std::fs::write(dir.join(format!("{stem}_per_cycle.csv")), &per_cycle)?;
    std::fs::write(dir.join(format!("{stem}_long.csv")), &long)?;
    Ok(String::from_utf8(per_cycle).expect("CSV is UTF-8"))
}

/// Dispatch a parsed command, writing results to `out`. Returns whether the
/// command's own checks passed (expectations for `run`, the suite for `verify`).
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<bool> {
    match &cli.command {
        Command::Run { config, out: dir } => {
            let summary = cmd_run(config, dir)?;
            writeln!(out, "{}", summary.line())?;
            for f in &summary.failed_expectations {
                writeln!(out, "expectation failed: {f}")?;
            }
            Ok(summary.failed_expectations.is_empty())
        }
        Command::Spectrum { config } => {
            out.write_all(to_json(&cmd_spectrum(config)?).as_bytes())?;
            Ok(true)
        }
        Command::Verify {
            suite,
            dim,
            trials,
            seed,
        } => {
            let report = cmd_verify(suite, *dim, *trials, *seed)?;
            out.write_all(to_json(&report).as_bytes())?;
            Ok(report.passed())
        }
        Command::Report { ledger, out: dir } => {
            out.write_all(cmd_report(ledger, dir.as_deref())?.as_bytes())?;
            Ok(true)
        }
    }
}

/// Log filter for `ENGINE_LOG` (`quiet`, `info` or `debug`; warnings otherwise).
pub fn log_level(var: Option<&str>) -> log::LevelFilter {
    match var.map(str::trim) {
        Some("quiet") => log::LevelFilter::Off,
        Some("info") => log::LevelFilter::Info,
        Some("debug") => log::LevelFilter::Debug,
        _ => log::LevelFilter::Warn,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_floats_have_seventeen_digits() {
        let s = to_json(&vec![0.1f64, -2.5, 1e-300]);
        assert!(s.contains("1.0000000000000001e-1"), "{s}");
        assert!(s.contains("-2.5000000000000000e0"));
        let back: Vec<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, vec![0.1, -2.5, 1e-300]);
    }

    #[test]
    fn log_levels() {
        assert_eq!(log_level(Some("quiet")), log::LevelFilter::Off);
        assert_eq!(log_level(Some("debug")), log::LevelFilter::Debug);
        assert_eq!(log_level(None), log::LevelFilter::Warn);
    }

    #[test]
    fn unknown_suite_is_rejected() {
        assert!(matches!(cmd_verify("nope", 2, 1, 0), Err(Error::ConfigParse { .. })));
    }
}
