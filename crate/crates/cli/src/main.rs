//! Command-line interface for the Choi-calculus toolkit.
//!
//! Exit codes: 0 on a clean run, 1 on errors, and for `scan`: 2 when any
//! anomaly record exists, 3 when entanglement was detected on a PPT
//! composite.

use clap::{Parser, Subcommand, ValueEnum};
use num::FromPrimitive;
use pptsq_core::channel::{choi_of_map, compose, map_of_choi, ChoiMatrix};
use pptsq_core::entanglement::ppt_test_matrix;
use pptsq_core::error::{Error, Result};
use pptsq_core::io;
use pptsq_core::scalar::{parse_rational, Rat};
use pptsq_core::sqroot::{
    solve_factorization, verify_solution, ConstraintFlags, FactorizationMode,
    FactorizationProblem, SolverConfig,
};
use pptsq_core::witness::{builtin_registry, Witness, WitnessClass};
use pptsq_cli::families::{family_state, StateFamily};
use pptsq_cli::scan::{default_grid, scan, write_csv, Verdict};
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "pptsq", version, about = "Choi-matrix calculus, PPT diagnostics and channel factorization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Choi matrix of a map file.
    Choi {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Map read off a Choi matrix file under declared dimensions.
    Map {
        #[arg(long)]
        choi: PathBuf,
        #[arg(long = "in-dim")]
        in_dim: usize,
        #[arg(long = "out-dim")]
        out_dim: usize,
    },
    /// Composition `outer ∘ inner` of two map files.
    Compose {
        #[arg(long)]
        outer: PathBuf,
        #[arg(long)]
        inner: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// PPT test of a state file under a cut.
    Ppt {
        #[arg(long)]
        state: PathBuf,
        #[arg(long = "dim-a")]
        dim_a: usize,
        #[arg(long = "dim-b")]
        dim_b: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Pairing tr(ρ·C_ψᵗ) of a state file with a witness map file.
    Pair {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        witness: PathBuf,
    },
    /// Factor a target Choi matrix through an intermediate dimension.
    Sqroot {
        #[arg(long)]
        target: PathBuf,
        /// Dimension chain, e.g. `4,2,4`.
        #[arg(long)]
        dims: String,
        #[arg(long, value_enum, default_value_t = ModeArg::Square)]
        mode: ModeArg,
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Solver configuration JSON; explicit flags override it.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Scan a parameter grid of the agkl family.
    Scan {
        #[arg(long)]
        family: String,
        #[arg(long)]
        grid: Option<PathBuf>,
        #[arg(long = "witness-dir")]
        witness_dir: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Emit a reference state family matrix.
    Family {
        #[arg(long, value_enum)]
        name: FamilyArg,
        #[arg(long)]
        a: Option<String>,
        #[arg(long)]
        t: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Square,
    Pair,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Ones9,
    Choi3x3,
    Agkl,
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Choi { map, out } => {
            let tensor = io::read_map(&map)?;
            let choi = choi_of_map(&tensor);
            emit_matrix(choi.matrix(), Some(choi.cut()), out.as_deref())?;
            Ok(0)
        }
        Command::Map { choi, in_dim, out_dim } => {
            let (matrix, _) = io::read_matrix(&choi)?;
            let map = map_of_choi(&matrix, in_dim, out_dim)?;
            println!("{}", serde_json::to_string_pretty(&io::map_to_json(&map))?);
            Ok(0)
        }
        Command::Compose { outer, inner, out } => {
            let outer = io::read_map(&outer)?;
            let inner = io::read_map(&inner)?;
            let composed = compose(&outer, &inner)?;
            let json = serde_json::to_string_pretty(&io::map_to_json(&composed))?;
            match out {
                Some(path) => std::fs::write(path, json)?,
                None => println!("{json}"),
            }
            Ok(0)
        }
        Command::Ppt { state, dim_a, dim_b, tol } => {
            let (matrix, _) = io::read_matrix(&state)?;
            let verdict = ppt_test_matrix(&matrix, dim_a, dim_b, tol)?;
            println!("{}", serde_json::to_string_pretty(&verdict)?);
            Ok(0)
        }
        Command::Pair { state, witness } => {
            let (matrix, _) = io::read_matrix(&state)?;
            let map = io::read_map(&witness)?;
            let label = witness
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "witness".into());
            let w = Witness::new(map, WitnessClass::Unverified, label)?;
            let value = pptsq_core::entanglement::pairing_matrix(&matrix, &w)?;
            println!("{}", serde_json::json!({ "value": value }));
            Ok(0)
        }
        Command::Sqroot { target, dims, mode, restarts, seed, config } => {
            let (matrix, _) = io::read_matrix(&target)?;
            let dims = parse_dims(&dims)?;
            let choi = ChoiMatrix::new(matrix, dims.0, dims.2)?;
            let mode = match mode {
                ModeArg::Square => FactorizationMode::SquareRoot,
                ModeArg::Pair => FactorizationMode::GeneralPair,
            };
            let mut cfg = match config {
                Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)?,
                None => SolverConfig::default(),
            };
            if let Some(r) = restarts {
                cfg.restarts = r;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let problem = FactorizationProblem::new(choi.clone(), dims, mode)?
                .with_constraints(ConstraintFlags::ppt(), ConstraintFlags::ppt());
            let solutions = solve_factorization(&problem, &cfg)?;
            let mut out = Vec::new();
            for s in &solutions {
                let verification = verify_solution(s, &choi, cfg.residual_tol)?;
                out.push(serde_json::json!({
                    "residual": s.residual,
                    "factor1": io::map_to_json(&s.factor1),
                    "factor2": io::map_to_json(&s.factor2),
                    "constraint_violations": s.constraint_violations,
                    "verification": verification,
                }));
            }
            println!(
                "{}",
                serde_json::to_string_pretty(&serde_json::json!({
                    "solutions": out,
                    "count": solutions.len(),
                }))?
            );
            Ok(0)
        }
        Command::Scan { family, grid, witness_dir, tol, out, csv } => {
            if family != "agkl" {
                return Err(Error::InvalidArgument(format!(
                    "unsupported scan family {family:?} (only `agkl`)"
                )));
            }
            let points = match grid {
                Some(path) => load_grid(&path)?,
                None => default_grid(),
            };
            let witnesses = match witness_dir {
                Some(dir) => io::load_witness_registry(&dir)?,
                None => builtin_registry(4),
            };
            let report = scan(&points, tol, &witnesses);
            if let Some(path) = &out {
                std::fs::write(path, serde_json::to_string_pretty(&report)?)?;
            }
            if let Some(path) = &csv {
                write_csv(std::fs::File::create(path)?, &report)?;
            }
            println!(
                "scan: {} points, {} consistent, {} anomalies, {} detections",
                report.summary.total,
                report.summary.consistent,
                report.summary.anomalies,
                report.summary.entanglement_detected
            );
            for r in report.records.iter().filter(|r| r.verdict == Verdict::EntanglementDetected) {
                println!(
                    "DETECTION at (a, t) = ({}, {}): ccnr {}, pairings {:?} — advisory, evidence only",
                    r.a_exact, r.t_exact, r.ccnr_value, r.witness_pairings
                );
            }
            if report.summary.entanglement_detected > 0 {
                Ok(3)
            } else if report.summary.anomalies > 0 {
                Ok(2)
            } else {
                Ok(0)
            }
        }
        Command::Family { name, a, t, out } => {
            let family = match name {
                FamilyArg::Ones9 => StateFamily::Ones9,
                FamilyArg::Choi3x3 => StateFamily::Choi3x3,
                FamilyArg::Agkl => {
                    let a = a.ok_or_else(|| Error::InvalidArgument("agkl needs --a".into()))?;
                    let t = t.ok_or_else(|| Error::InvalidArgument("agkl needs --t".into()))?;
                    StateFamily::Agkl { a: parse_rational(&a)?, t: parse_rational(&t)? }
                }
            };
            let state = family_state(&family)?;
            emit_matrix(&state.matrix, state.cuts.first().copied(), out.as_deref())?;
            Ok(0)
        }
    }
}

fn emit_matrix(
    matrix: &pptsq_core::matrix::DenseMatrix,
    cut: Option<(usize, usize)>,
    out: Option<&Path>,
) -> Result<()> {
    let json = serde_json::to_string_pretty(&io::matrix_to_json(matrix, cut))?;
    match out {
        Some(path) => std::fs::write(path, json)?,
        None => println!("{json}"),
    }
    Ok(())
}

fn parse_dims(s: &str) -> Result<(usize, usize, usize)> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidArgument(format!("--dims expects A,B,C, got {s:?}")));
    }
    let parse = |p: &str| {
        p.trim()
            .parse::<usize>()
            .map_err(|_| Error::InvalidArgument(format!("bad dimension {p:?}")))
    };
    Ok((parse(parts[0])?, parse(parts[1])?, parse(parts[2])?))
}

/// Grid files list explicit points (rational strings or numbers) or give a
/// step count pattern matching the default grid construction.
#[derive(Deserialize)]
#[serde(untagged)]
enum GridSpec {
    Points { points: Vec<(serde_json::Value, serde_json::Value)> },
    Steps { a_steps: usize, t_steps: usize },
}

fn load_grid(path: &Path) -> Result<Vec<(Rat, Rat)>> {
    let spec: GridSpec = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    match spec {
        GridSpec::Points { points } => points
            .iter()
            .map(|(a, t)| Ok((value_to_rat(a)?, value_to_rat(t)?)))
            .collect(),
        GridSpec::Steps { a_steps, t_steps } => {
            let mut grid = Vec::new();
            for k in 1..=a_steps as i64 {
                let a = Rat::new(k.into(), (a_steps as i64 + 1).into());
                for j in 1..=t_steps as i64 {
                    let frac = Rat::new(
                        (2 * j - (t_steps as i64 + 1)).into(),
                        (t_steps as i64 + 1).into(),
                    );
                    grid.push((a.clone(), a.clone() * frac));
                }
            }
            Ok(grid)
        }
    }
}

fn value_to_rat(v: &serde_json::Value) -> Result<Rat> {
    match v {
        serde_json::Value::String(s) => parse_rational(s),
        serde_json::Value::Number(n) => {
            let f = n.as_f64().ok_or_else(|| Error::ParseRational(n.to_string()))?;
            Rat::from_f64(f).ok_or_else(|| Error::ParseRational(n.to_string()))
        }
        other => Err(Error::ParseRational(other.to_string())),
    }
}
