//! The `mermin3` command-line front end.
//!
//! Exit codes: 0 success, 2 input error, 3 optimization regression (the best
//! value found is more than [`REGRESSION_MARGIN`] below the class maximum).
//!
//! State fixtures accepted by `eval`: `ghz`, `sharp-bisep`, basis labels such
//! as `010`, `noisy_ghz(V)`, or a path to a JSON file `{"amplitudes": [...]}`
//! whose entries are reals or `[re, im]` pairs.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::bell::{bell_value, build_mermin, build_sigma, BellOperator, MeasurementSettings};
use crate::error::{Error, Result};
use crate::manifest::{manifest_path, ResolvedCommand, RunManifest};
use crate::optimizer::{known_maximum, maximize, Functional, OptimizationConfig};
use crate::qcore::{DensityMatrix, PureState, C64, CONSTRUCTION_TOL};
use crate::shotsim::{run_experiment, Amplitude, PlanFile};
use crate::stateclasses::{basis_state, decode, ghz, noisy_ghz, sharp_bisep, PartitionClass};
use crate::witness::{
    classify, estimate_m3, load_correlations, BoundSet, Classification, DEFAULT_CONFIDENCE,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_REGRESSION: i32 = 3;

pub const REGRESSION_MARGIN: f64 = 1e-3;

const DEFAULT_OPTIMUM_PATH: &str = "optimum.json";
const DEFAULT_CORRELATIONS_PATH: &str = "correlations.json";

#[derive(Debug, Parser)]
#[command(
    name = "mermin3",
    version,
    about = "Mermin-operator entanglement witness toolkit"
)]
struct Cli {
    /// Master seed for stochastic commands (overrides a plan file's seed).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Print a machine-readable JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,

    /// Output file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate <M3> or Σ on a state.
    Eval {
        /// ghz, sharp-bisep, a basis label like 010, noisy_ghz(V), or an amplitude file.
        state: String,
        /// mermin or sigma.
        #[arg(default_value = "mermin")]
        functional: String,
        /// JSON file with the six Bloch vectors a, a_prime, b, b_prime, c, c_prime (sigma only).
        #[arg(long)]
        settings: Option<PathBuf>,
    },
    /// Maximize a functional over a separability class.
    Optimize {
        /// full-separable, bisep-12|3, bisep-13|2, bisep-1|23 or unrestricted.
        class: String,
        /// mermin or sigma.
        functional: String,
        /// Also optimize the six measurement directions (sigma only).
        #[arg(long)]
        free_settings: bool,
        #[arg(long, default_value_t = 64)]
        restarts: usize,
        #[arg(long, default_value_t = 2000)]
        max_iterations: usize,
        #[arg(long, default_value_t = 1e-8)]
        tolerance: f64,
    },
    /// Classify a correlation file.
    Witness {
        file: PathBuf,
        /// Confidence multiplier k on the standard error.
        #[arg(long, default_value_t = DEFAULT_CONFIDENCE)]
        confidence: f64,
    },
    /// Simulate a measurement plan and write a correlation file.
    Simulate { plan: PathBuf },
    /// Re-run the command recorded in a manifest.
    Replay { manifest: PathBuf },
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.exit_code() == 0 {
                let _ = write!(stdout, "{e}");
                return EXIT_OK;
            }
            let _ = write!(stderr, "{e}");
            return EXIT_INPUT;
        }
    };
    match execute(cli, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_INPUT
        }
    }
}

fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<i32> {
    let (resolved, out) = match cli.command {
        Command::Replay { manifest } => {
            let m = RunManifest::load(&manifest)?;
            let out = cli.out.or_else(|| m.outputs.first().map(PathBuf::from));
            return run_resolved(&m.resolved, cli.json || m.json, out.as_deref(), stdout);
        }
        command => (resolve(command, cli.seed)?, cli.out),
    };
    run_resolved(&resolved, cli.json, out.as_deref(), stdout)
}

fn resolve(command: Command, seed: Option<u64>) -> Result<ResolvedCommand> {
    Ok(match command {
        Command::Eval {
            state,
            functional,
            settings,
        } => {
            let functional: Functional = functional.parse()?;
            let settings = match settings {
                None => MeasurementSettings::mermin_axes(),
                Some(_) if functional == Functional::MerminFixed => {
                    return Err(Error::rejected(
                        "--settings applies to the sigma functional",
                    ))
                }
                Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)
                    .map_err(Error::from_json)?,
            };
            let amplitudes = if is_fixture(&state) {
                None
            } else {
                Some(load_amplitude_file(Path::new(&state))?)
            };
            ResolvedCommand::Eval {
                state,
                amplitudes,
                functional,
                settings,
            }
        }
        Command::Optimize {
            class,
            functional,
            free_settings,
            restarts,
            max_iterations,
            tolerance,
        } => {
            let functional: Functional = functional.parse()?;
            if free_settings && functional == Functional::MerminFixed {
                return Err(Error::rejected(
                    "--free-settings applies to the sigma functional",
                ));
            }
            let config = OptimizationConfig {
                restarts,
                max_iterations,
                tolerance,
                seed: seed.unwrap_or(0),
                optimize_settings: free_settings,
            };
            config.validate()?;
            ResolvedCommand::Optimize {
                class: class.parse()?,
                functional,
                config,
            }
        }
        Command::Witness { file, confidence } => ResolvedCommand::Witness {
            source: file.display().to_string(),
            record: load_correlations(&file)?,
            confidence,
        },
        Command::Simulate { plan } => {
            let mut plan = PlanFile::load(plan)?;
            if let Some(s) = seed {
                plan.seed = s;
            }
            plan.to_plan()?;
            ResolvedCommand::Simulate { plan }
        }
        Command::Replay { .. } => unreachable!("handled by the caller"),
    })
}

fn run_resolved(
    resolved: &ResolvedCommand,
    json: bool,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<i32> {
    match resolved {
        ResolvedCommand::Eval {
            state,
            amplitudes,
            functional,
            settings,
        } => cmd_eval(
            resolved,
            state,
            amplitudes.as_deref(),
            *functional,
            settings,
            json,
            out,
            stdout,
        ),
        ResolvedCommand::Optimize {
            class,
            functional,
            config,
        } => cmd_optimize(resolved, *class, *functional, config, json, out, stdout),
        ResolvedCommand::Witness {
            source,
            record,
            confidence,
        } => {
            let e = estimate_m3(record)?;
            let verdict = classify(e.value, e.std_error, &BoundSet::default(), *confidence)?;
            let report = json!({
                "source": source,
                "summary": verdict.summary(),
                "verdict": verdict,
                "error_model": "independent Gaussian errors combined in quadrature",
            });
            if json {
                write_json(stdout, &report)?;
            } else {
                writeln!(stdout, "{}", verdict.summary())?;
                writeln!(
                    stdout,
                    "estimate: {} ± {}",
                    verdict.estimate, verdict.std_error
                )?;
                writeln!(stdout, "sigma above 2: {:.4}", verdict.sigma_above_2)?;
                writeln!(stdout, "sigma above 2√2: {:.4}", verdict.sigma_above_2sqrt2)?;
                writeln!(stdout, "classification: {}", verdict.classification.tag())?;
                writeln!(stdout, "confidence multiplier: {}", verdict.confidence)?;
                if verdict.classification == Classification::ViolatesLhvAndBiseparableOrthogonal {
                    writeln!(
                        stdout,
                        "note: assumes the X and Y settings are orthogonal spin directions, \
                         for which the biseparable bound equals the LHV bound of 2"
                    )?;
                }
            }
            finish(resolved, json, out, &report)
        }
        ResolvedCommand::Simulate { plan } => {
            let sim = run_experiment(&plan.to_plan()?)?;
            let path = out.unwrap_or(Path::new(DEFAULT_CORRELATIONS_PATH));
            sim.record.store(path)?;
            write_manifest(resolved, json, path)?;
            let estimate = estimate_m3(&sim.record).ok();
            if json {
                write_json(
                    stdout,
                    &json!({
                        "output": path.display().to_string(),
                        "entries": sim.record.entries.len(),
                        "m3_estimate": estimate,
                        "warnings": sim.warnings,
                    }),
                )?;
            } else {
                writeln!(
                    stdout,
                    "wrote {} settings x {} shots to {}",
                    sim.record.entries.len(),
                    plan.shots,
                    path.display()
                )?;
                if let Some(e) = estimate {
                    writeln!(stdout, "<M3> estimate: {:.4} ± {:.4}", e.value, e.std_error)?;
                }
                for w in &sim.warnings {
                    writeln!(stdout, "warning: setting {}: {:?}", w.setting, w.kind)?;
                }
            }
            Ok(EXIT_OK)
        }
    }
}

fn is_fixture(state: &str) -> bool {
    matches!(state, "ghz" | "sharp-bisep")
        || parse_noisy(state).is_some()
        || basis_state(state).is_ok()
}

fn parse_noisy(state: &str) -> Option<&str> {
    state.strip_prefix("noisy_ghz(")?.strip_suffix(')')
}

#[derive(Deserialize)]
struct AmplitudeFile {
    amplitudes: Vec<Amplitude>,
}

fn load_amplitude_file(path: &Path) -> Result<Vec<[f64; 2]>> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::rejected(format!(
            "{:?} is neither a known state fixture nor a readable file: {e}",
            path.display().to_string()
        ))
    })?;
    let f: AmplitudeFile = serde_json::from_str(&text).map_err(Error::from_json)?;
    Ok(f.amplitudes
        .into_iter()
        .map(|a| {
            let z = a.to_complex();
            [z.re, z.im]
        })
        .collect())
}

enum EvalState {
    Pure(PureState),
    Mixed(DensityMatrix),
}

fn resolve_state(state: &str, amplitudes: Option<&[[f64; 2]]>) -> Result<EvalState> {
    if let Some(amps) = amplitudes {
        let amps: Vec<C64> = amps.iter().map(|[re, im]| C64::new(*re, *im)).collect();
        return Ok(EvalState::Pure(PureState::normalized(amps)?));
    }
    Ok(match state {
        "ghz" => EvalState::Pure(ghz()),
        "sharp-bisep" => EvalState::Pure(sharp_bisep()),
        s => match parse_noisy(s) {
            Some(v) => {
                let v: f64 = v
                    .trim()
                    .parse()
                    .map_err(|_| Error::rejected(format!("bad visibility in {s:?}")))?;
                EvalState::Mixed(noisy_ghz(v)?)
            }
            None => EvalState::Pure(basis_state(s)?),
        },
    })
}

#[derive(Serialize)]
struct Exceeds {
    lhv_and_biseparable_orthogonal: bool,
    biseparable_any_observables: bool,
    algebraic_max: bool,
}

#[allow(clippy::too_many_arguments)]
fn cmd_eval(
    resolved: &ResolvedCommand,
    state: &str,
    amplitudes: Option<&[[f64; 2]]>,
    functional: Functional,
    settings: &MeasurementSettings,
    json: bool,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<i32> {
    let op: BellOperator = match functional {
        Functional::MerminFixed => build_mermin(),
        Functional::SigmaGeneral => build_sigma(settings),
    };
    let value = match resolve_state(state, amplitudes)? {
        EvalState::Pure(s) => bell_value(&s, &op)?,
        EvalState::Mixed(rho) => bell_value(&rho, &op)?,
    };
    let bounds = BoundSet::default();
    // Values within rounding of a bound do not exceed it.
    let above = |b: f64| value.abs() > b + CONSTRUCTION_TOL;
    let exceeds = Exceeds {
        lhv_and_biseparable_orthogonal: above(bounds.lhv),
        biseparable_any_observables: above(bounds.biseparable_free),
        algebraic_max: above(bounds.algebraic_max),
    };
    let name = match functional {
        Functional::MerminFixed => "<M3>",
        Functional::SigmaGeneral => "Sigma",
    };
    let report = json!({
        "state": state,
        "functional": functional,
        "value": value,
        "bounds": bounds,
        "exceeds": exceeds,
    });
    if json {
        write_json(stdout, &report)?;
    } else {
        writeln!(stdout, "state: {state}")?;
        writeln!(stdout, "{name} = {value:.6}")?;
        writeln!(
            stdout,
            "bounds: LHV {}, biseparable (orthogonal observables) {}, biseparable (any observables) {:.6}, algebraic {}",
            bounds.lhv, bounds.biseparable_orthogonal, bounds.biseparable_free, bounds.algebraic_max
        )?;
        let mut hit = Vec::new();
        if exceeds.lhv_and_biseparable_orthogonal {
            hit.push("2");
        }
        if exceeds.biseparable_any_observables {
            hit.push("2√2");
        }
        if exceeds.algebraic_max {
            hit.push("4");
        }
        let hit = if hit.is_empty() {
            "none".to_string()
        } else {
            hit.join(", ")
        };
        writeln!(stdout, "exceeds: {hit}")?;
    }
    finish(resolved, json, out, &report)
}

fn cmd_optimize(
    resolved: &ResolvedCommand,
    class: PartitionClass,
    functional: Functional,
    config: &OptimizationConfig,
    json: bool,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<i32> {
    let r = maximize(class, functional, config)?;
    let target = known_maximum(class, functional, config.optimize_settings);
    let regression = r.best_value < target - REGRESSION_MARGIN;
    let state = decode(&r.best_state)?;
    let optimum = json!({
        "class": class,
        "functional": functional,
        "free_settings": config.optimize_settings,
        "best_value": r.best_value,
        "known_maximum": target,
        "state_parameters": r.best_state,
        "amplitudes": state.amplitudes().iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
        "settings": r.best_settings,
    });
    let path = out.unwrap_or(Path::new(DEFAULT_OPTIMUM_PATH));
    write_json_file(path, &optimum)?;
    write_manifest(resolved, json, path)?;

    if json {
        write_json(
            stdout,
            &json!({
                "result": r,
                "known_maximum": target,
                "regression": regression,
                "output": path.display().to_string(),
            }),
        )?;
    } else {
        writeln!(stdout, "{:.6}", r.best_value)?;
        writeln!(
            stdout,
            "class {class}, functional {functional}{}: best {:.10} (known maximum {:.10}) from restart {} of {}, {} iterations",
            if config.optimize_settings { " with free settings" } else { "" },
            r.best_value,
            target,
            r.best_restart,
            r.per_restart.len(),
            r.iterations
        )?;
        writeln!(stdout, "optimum written to {}", path.display())?;
        if regression {
            writeln!(
                stdout,
                "regression: best value is more than {REGRESSION_MARGIN} below the known maximum"
            )?;
        }
    }
    Ok(if regression { EXIT_REGRESSION } else { EXIT_OK })
}

/// Writes the report and manifest when `--out` is given.
fn finish(
    resolved: &ResolvedCommand,
    json: bool,
    out: Option<&Path>,
    report: &serde_json::Value,
) -> Result<i32> {
    if let Some(path) = out {
        write_json_file(path, report)?;
        write_manifest(resolved, json, path)?;
    }
    Ok(EXIT_OK)
}

fn write_manifest(resolved: &ResolvedCommand, json: bool, output: &Path) -> Result<()> {
    RunManifest::new(resolved.clone(), json, vec![output.display().to_string()])
        .store(manifest_path(output))
}

fn write_json(w: &mut dyn Write, value: &serde_json::Value) -> Result<()> {
    serde_json::to_writer_pretty(&mut *w, value).map_err(|e| Error::Io(e.into()))?;
    writeln!(w)?;
    Ok(())
}

fn write_json_file(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    std::fs::write(path, s)?;
    Ok(())
}
