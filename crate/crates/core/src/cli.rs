//! Command-line front end. `run` returns the process exit code:
//! 0 when every check passes, 1 on a verification failure, 2 on invalid input.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::json;

use crate::basis::{self, DfsBlock, Model};
use crate::compiler::{self, CompileOptions, EncodedBlock};
use crate::lie;
use crate::lindblad::{self, DensityMatrix, LindbladModel};
use crate::matrix::ComplexMatrix;
use crate::operators::build;
use crate::par::ExecMode;
use crate::report::{self, Report, PLUMBING};
use crate::stabilizer::{self, KlMode, STRUCTURE_TOL};
use crate::{config, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Weak,
    Strong,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Weak => Model::Weak,
            ModelArg::Strong => Model::Strong,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DemoArg {
    WeakPair,
    StrongThree,
    AmplitudeDamping,
}

#[derive(Debug, Parser)]
#[command(name = "dfs-forge", version, about = "Decoherence-free subspaces under collective noise")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Seed for randomized suites.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Disable data parallelism.
    #[arg(long, global = true)]
    pub sequential: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Orthonormal basis of one block as JSON.
    Basis {
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long)]
        n: usize,
        /// 2J (strong) or 2λ (weak).
        #[arg(long, allow_hyphen_values = true)]
        twoj: i64,
    },
    /// Structural checks on one block, one JSON line per check.
    Verify {
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        twoj: i64,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 20)]
        orthogonal: usize,
        #[arg(long, default_value_t = STRUCTURE_TOL)]
        tol: f64,
    },
    /// Lie closure of the default generators on every block.
    Closure {
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long)]
        n: usize,
    },
    /// Compile a target unitary on one block into a pulse schedule.
    Compile {
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        twoj: i64,
        /// JSON matrix file: rows of `[re, im]` pairs.
        #[arg(long)]
        target: PathBuf,
        #[arg(long, default_value_t = 1e-3)]
        epsilon: f64,
        #[arg(long, default_value_t = compiler::DEFAULT_STEP_CAP)]
        step_cap: usize,
    },
    /// Integrate the master equation from a JSON model file, or run a
    /// shipped contrast demo.
    Simulate {
        #[arg(long, conflicts_with = "demo", required_unless_present = "demo")]
        input: Option<PathBuf>,
        #[arg(long, value_enum)]
        demo: Option<DemoArg>,
        #[arg(long, default_value_t = lindblad::DEFAULT_DT)]
        dt: f64,
        /// Emit every k-th step.
        #[arg(long, default_value_t = 100)]
        sample_every: usize,
    },
    /// Strong-model degeneracy triangle.
    Table {
        #[arg(long, default_value_t = 6)]
        max_n: usize,
        #[arg(long)]
        csv: bool,
    },
    /// Encoding rate of the singlet block against its asymptote.
    Efficiency {
        #[arg(long, value_delimiter = ',', default_values_t = [10, 20, 40, 60])]
        n: Vec<usize>,
        #[arg(long)]
        csv: bool,
    },
}

/// Exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidInput(_)
        | Error::InvalidIndex(_)
        | Error::Parity { .. }
        | Error::DimensionMismatch(_)
        | Error::ResourceLimit { .. }
        | Error::Json(_)
        | Error::Io(_) => 2,
        _ => 1,
    }
}

fn open_output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Parses arguments and runs. Usage errors exit through clap with code 2.
pub fn main_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    run(&config)
}

pub fn run(config: &RunConfig) -> i32 {
    let result = open_output(&config.output).and_then(|mut out| {
        let pass = dispatch(config, &mut out)?;
        out.flush()?;
        Ok(pass)
    });
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn mode(config: &RunConfig) -> ExecMode {
    if config.sequential {
        ExecMode::Sequential
    } else {
        ExecMode::Parallel
    }
}

fn dispatch(config: &RunConfig, out: &mut dyn Write) -> Result<bool> {
    match &config.command {
        Command::Basis { model, n, twoj } => {
            let b = basis::block((*model).into(), *n, *twoj)?;
            serde_json::to_writer(&mut *out, &b)?;
            writeln!(out)?;
            Ok(true)
        }
        Command::Verify { model, n, twoj, samples, orthogonal, tol } => {
            let reports =
                verify_block((*model).into(), *n, *twoj, *samples, *orthogonal, *tol, config.seed, mode(config))?;
            for r in &reports {
                r.write_line(out)?;
            }
            Ok(reports.iter().all(|r| r.pass))
        }
        Command::Closure { model, n } => {
            let rep = lie::universality_certificate((*model).into(), *n, mode(config))?;
            let dims: serde_json::Map<String, serde_json::Value> =
                rep.per_block.iter().map(|b| (format!("twoJ={}", b.two_j), json!(b.dim))).collect();
            let r = Report::new("closure", "Lie closure of the encoded generators")
                .metric("total_dim", rep.total_dim as f64)
                .with_pass(rep.pass)
                .details(json!({"model": rep.model, "n": rep.n, "generators": rep.generators, "dims": dims, "per_block": rep.per_block}));
            r.write_line(out)?;
            Ok(r.pass)
        }
        Command::Compile { model, n, twoj, target, epsilon, step_cap } => {
            let target = read_json::<ComplexMatrix>(target)?;
            let enc = EncodedBlock::with_default_generators((*model).into(), *n, *twoj)?;
            let opts = CompileOptions { epsilon: *epsilon, step_cap: *step_cap, ..Default::default() };
            let seq = compiler::compile(&enc, &target, opts)?;
            let steps: Vec<_> = seq
                .steps
                .iter()
                .map(|p| json!({"primitive": seq.primitives[p.primitive].name, "duration": p.duration}))
                .collect();
            let doc = json!({
                "steps": steps,
                "achieved_error": seq.achieved_error,
                "length": seq.length,
                "max_prefix_leakage": seq.max_prefix_leakage,
            });
            serde_json::to_writer(&mut *out, &doc)?;
            writeln!(out)?;
            Ok(seq.achieved_error <= *epsilon)
        }
        Command::Simulate { input, demo, dt, sample_every } => match (input, demo) {
            (Some(path), _) => simulate_file(path, *sample_every, out),
            (None, Some(d)) => {
                let demo = match d {
                    DemoArg::WeakPair => lindblad::demo_weak_pair()?,
                    DemoArg::StrongThree => lindblad::demo_strong_three()?,
                    DemoArg::AmplitudeDamping => lindblad::demo_amplitude_damping()?,
                };
                let rep = demo.run(*dt, *sample_every)?;
                let r = Report::new(
                    format!("contrast {}", demo.name),
                    "decoherence-free states are unaffected by collective noise",
                )
                .metric("protected_final", rep.protected_final)
                .metric("unprotected_final", rep.unprotected_final)
                .metric("max_population_drift", rep.max_population_drift)
                .with_pass(rep.pass)
                .details(serde_json::to_value(&rep)?);
                r.write_line(out)?;
                Ok(r.pass)
            }
            (None, None) => Err(Error::InvalidInput("simulate needs --input or --demo".into())),
        },
        Command::Table { max_n, csv } => {
            let (r, cells) = report::table_degeneracies(*max_n)?;
            if *csv {
                let rows: Vec<Vec<String>> = cells
                    .iter()
                    .map(|c| vec![c.n.to_string(), c.two_j.to_string(), c.j.clone(), c.n_j.clone()])
                    .collect();
                report::write_csv(out, &["n", "twoJ", "J", "n_J"], &rows)?;
            } else {
                let r = r.clone().details(json!({"cells": cells, "mismatches": r.details["mismatches"]}));
                r.write_line(out)?;
            }
            Ok(r.pass)
        }
        Command::Efficiency { n, csv } => {
            let (r, points) = report::efficiency_curve(n)?;
            if *csv {
                let rows: Vec<Vec<String>> = points
                    .iter()
                    .map(|p| vec![p.n.to_string(), p.rate.to_string(), p.asymptote.to_string(), p.gap.to_string()])
                    .collect();
                report::write_csv(out, &["n", "rate", "asymptote", "gap"], &rows)?;
            } else {
                r.clone().details(json!({"points": points})).write_line(out)?;
            }
            Ok(r.pass)
        }
    }
}

/// Structural checks on one block.
#[allow(clippy::too_many_arguments)]
pub fn verify_block(
    model: Model,
    n: usize,
    two_j: i64,
    samples: usize,
    orthogonal: usize,
    tol: f64,
    seed: u64,
    mode: ExecMode,
) -> Result<Vec<Report>> {
    let block = basis::block(model, n, two_j)?;
    let mut out = Vec::new();

    out.push(
        Report::new("orthonormality", PLUMBING)
            .judged(block.orthonormality_defect(), 1e-10)
            .details(json!({"block": block.label(), "dim": block.dim()})),
    );

    let couplings = stabilizer::coupling_operators(model, n)?;
    let dfs = stabilizer::check_dfs_condition_tol(&block, &couplings, tol)?;
    out.push(
        Report::new("dfs_condition", "collective errors act trivially on the path factor")
            .judged(dfs.deviation.max(dfs.leakage), tol)
            .metric("leakage", dfs.leakage),
    );

    let suite = stabilizer::stabilizer_suite(model, n, samples, orthogonal, seed, mode)?;
    let stats = suite
        .blocks
        .iter()
        .find(|s| s.label == block.label())
        .ok_or_else(|| Error::InvariantBreach("block missing from stabilizer suite".into()))?;
    let viol_ok = stats.orthogonal_states == 0 || stats.min_violation >= suite.violation_floor;
    out.push(
        Report::new("stabilizer_fixation", "stabilizer fixes exactly the DFS")
            .judged(stats.worst_fixation, suite.fixation_tol)
            .metric("samples", samples as f64)
            .metric("min_violation", if stats.min_violation.is_nan() { -1.0 } else { stats.min_violation })
            .details(serde_json::to_value(stats)?),
    );
    if let Some(last) = out.last_mut() {
        last.pass = last.pass && viol_ok;
    }

    let mut worst: f64 = 0.0;
    let mut labels = Vec::new();
    for g in lie::default_generators(model, n) {
        let r = stabilizer::check_commutant_form(&block, &build(n, &g)?)?;
        worst = worst.max(r.deviation.max(r.leakage));
        labels.push(g.label());
    }
    out.push(
        Report::new("generators_in_commutant", "encoded gates act on the path factor only")
            .judged(worst, tol)
            .details(json!({"generators": labels})),
    );

    if model == Model::Strong && n == 4 && two_j == 0 {
        let kl = stabilizer::kl_check(&block, &stabilizer::weight_one_paulis(n)?, KlMode::Detection)?;
        out.push(
            Report::new("kl_detection", "error correcting code of distance 2")
                .judged(kl.worst_deviation, 1e-10)
                .metric("errors", kl.deviations.len() as f64),
        );
    }
    Ok(out)
}

#[derive(Debug, Deserialize)]
struct BlockRef {
    model: Model,
    n: usize,
    #[serde(rename = "twoJ")]
    two_j: i64,
    lambda_ref: ComplexMatrix,
}

#[derive(Debug, Deserialize)]
struct SimulationFile {
    #[serde(rename = "F_ops")]
    f_ops: Vec<ComplexMatrix>,
    a: ComplexMatrix,
    #[serde(rename = "H_S")]
    h_s: ComplexMatrix,
    rho0: ComplexMatrix,
    #[serde(rename = "T")]
    t_end: f64,
    dt: f64,
    #[serde(default)]
    block: Option<BlockRef>,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let file = File::open(path)?;
    Ok(serde_json::from_reader(io::BufReader::new(file))?)
}

fn simulate_file(path: &Path, sample_every: usize, out: &mut dyn Write) -> Result<bool> {
    let file: SimulationFile = read_json(path)?;
    let model = LindbladModel::new(file.f_ops, file.a, file.h_s)?;
    let block: Option<(DfsBlock, ComplexMatrix)> = match file.block {
        Some(b) => {
            config::check_dim(1 << b.n)?;
            Some((basis::block(b.model, b.n, b.two_j)?, b.lambda_ref))
        }
        None => None,
    };
    let rho0 = DensityMatrix { rho: file.rho0 };
    let every = sample_every.max(1);
    let steps = (file.t_end / file.dt).round() as usize;
    writeln!(out, "t,trace,block_population,lambda_fidelity")?;
    let mut k = 0usize;
    lindblad::evolve_with(&model, &rho0, file.t_end, file.dt, |t, rho| {
        if k.is_multiple_of(every) || k == steps {
            let (pop, fid) = match &block {
                Some((b, lref)) => {
                    let r = lindblad::subsystem_fidelity(b, &rho.rho, lref)?;
                    (r.population.to_string(), r.fidelity.to_string())
                }
                None => (String::new(), String::new()),
            };
            writeln!(out, "{t},{},{pop},{fid}", rho.trace())?;
        }
        k += 1;
        Ok(())
    })?;
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    use std::sync::atomic::{AtomicUsize, Ordering};

    static CALLS: AtomicUsize = AtomicUsize::new(0);

    fn code(args: &[&str]) -> i32 {
        let k = CALLS.fetch_add(1, Ordering::Relaxed);
        let out = std::env::temp_dir().join(format!("dfs-forge-cli-{}-{k}.out", std::process::id()));
        let mut v = vec!["dfs-forge"];
        v.extend_from_slice(args);
        let o = out.to_string_lossy().to_string();
        v.extend_from_slice(&["--output", &o]);
        let c = main_from_args(v);
        let _ = std::fs::remove_file(&out);
        c
    }

    #[test]
    fn verify_singlet_block_passes() {
        assert_eq!(code(&["verify", "--model", "strong", "--n", "4", "--twoj", "0", "--samples", "20"]), 0);
    }

    #[test]
    fn inadmissible_label_is_invalid_input() {
        assert_eq!(code(&["basis", "--model", "weak", "--n", "3", "--twoj", "99"]), 2);
        assert_eq!(code(&["basis", "--model", "strong", "--n", "3", "--twoj", "2"]), 2);
    }

    #[test]
    fn unknown_flag_is_usage_error() {
        assert_eq!(code(&["table", "--bogus"]), 2);
    }

    #[test]
    fn table_and_efficiency_pass() {
        assert_eq!(code(&["table", "--max-n", "6"]), 0);
        assert_eq!(code(&["efficiency", "--n", "10,20,40,60", "--csv"]), 0);
        assert_eq!(code(&["efficiency", "--n", "3"]), 2);
    }
}
