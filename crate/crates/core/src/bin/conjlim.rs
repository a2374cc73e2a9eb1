use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use conjlim::criteria::{basis_s_ker, dim_s_ker, in_s_c, in_s_c_star, in_s_im, in_s_ker};
use conjlim::error::{Error, Result};
use conjlim::goodpath::{construct_good_path, identity_residuals, laurent_path, GoodPath};
use conjlim::io::{
    from_json, matrix_to_csv, matrix_to_json, read_matrix, MatrixJson,
};
use conjlim::modifier::{
    conjugation_diag_bound_check, gershgorin, j_norm_bound, nilpotent_faithful, union_membership,
    union_membership_dual, Modifier, DEFAULT_DRAWS,
};
use conjlim::numkit::{rank, Matrix, Tolerance};
use conjlim::pathsim::{parse_grid, simulate, PathKind, PathSample, PathSpec};
use conjlim::suite::{exit_code, run_suite, SuiteConfig, SUITES};

#[derive(Parser)]
#[command(name = "conjlim", version, about = "Boundedness of U A U⁻¹ as U approaches a singular Z")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Kernel, image and annihilator criteria.
    Criteria {
        #[arg(long, value_enum)]
        op: CriteriaOp,
        #[arg(long = "Z")]
        z: PathBuf,
        #[arg(long = "A")]
        a: Option<PathBuf>,
        #[arg(long = "C")]
        c: Option<PathBuf>,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Construct a good path of Z, or expand the inverse of Z + Σ t^k E_k.
    Goodpath {
        #[arg(long = "Z")]
        z: PathBuf,
        /// Coefficients E_1, E_2, ... of a given path, in order.
        #[arg(long = "E")]
        e: Vec<PathBuf>,
        #[arg(long, default_value_t = 8)]
        order: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Modifier-based membership, faithfulness and Gershgorin bounds.
    Modifier {
        #[arg(long, value_enum)]
        op: ModifierOp,
        /// id, J, hadamard:h.json or general:l.json
        #[arg(long, default_value = "id")]
        phi: String,
        #[arg(long = "Z")]
        z: Option<PathBuf>,
        #[arg(long = "A")]
        a: Option<PathBuf>,
        /// Family members for diag-bound, B_0 first.
        #[arg(long = "B")]
        b: Vec<PathBuf>,
        #[arg(long, default_value_t = 1e6)]
        threshold: f64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 32)]
        trials: usize,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Growth of ‖φ(U(t) A U(t)⁻¹)‖ along a path.
    Simulate {
        /// linear|poly|goodpath|samples:file.json
        #[arg(long)]
        path: String,
        #[arg(long = "A")]
        a: PathBuf,
        #[arg(long, default_value = "id")]
        phi: String,
        /// lo:hi:points
        #[arg(long, default_value = "1e-6:1e-1:26")]
        grid: String,
        /// Also write a (t, norm) table.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a seeded verification suite, or `all`.
    Suite {
        id: String,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convert a matrix between JSON and CSV.
    Convert {
        input: PathBuf,
        /// Output file; the format follows its extension.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Format for stdout when --out is absent.
        #[arg(long, value_enum)]
        to: Option<Format>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CriteriaOp {
    Sker,
    Sim,
    Sc,
    ScStar,
    Dim,
    Basis,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModifierOp {
    Member,
    MemberDual,
    Faithful,
    Gershgorin,
    Jbound,
    DiagBound,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(clap::Args)]
struct TolArgs {
    #[arg(long, default_value_t = 1e-10)]
    rank_rel: f64,
    #[arg(long, default_value_t = 1e-8)]
    residual_abs: f64,
}

impl TolArgs {
    fn get(&self) -> Result<Tolerance> {
        Tolerance::new(self.rank_rel, self.residual_abs)
    }
}

fn need<'a>(p: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    p.as_deref()
        .ok_or_else(|| Error::InvalidInput(format!("{flag} is required for this operation")))
}

fn need_seed(seed: Option<u64>) -> Result<u64> {
    seed.ok_or_else(|| Error::InvalidInput("--seed is required for randomized operations".into()))
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let s = serde_json::to_string(value).expect("report serializes");
    match out {
        Some(p) => std::fs::write(p, s + "\n")?,
        None => {
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{s}") {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
                r => r?,
            }
        }
    }
    Ok(())
}

fn parse_phi(spec: &str) -> Result<Modifier> {
    match spec.split_once(':') {
        None if spec.eq_ignore_ascii_case("id") || spec.eq_ignore_ascii_case("identity") => {
            Ok(Modifier::Identity)
        }
        None if spec == "J" => Err(Error::InvalidInput(
            "J needs a size; it is inferred from --Z or --A".into(),
        )),
        Some(("hadamard", f)) => Modifier::hadamard(read_matrix(Path::new(f))?),
        Some(("general", f)) => Modifier::general(read_matrix(Path::new(f))?),
        _ => Err(Error::InvalidInput(format!(
            "unknown modifier '{spec}'; use id, J, hadamard:FILE or general:FILE"
        ))),
    }
}

fn phi_for(spec: &str, n: usize) -> Result<Modifier> {
    if spec == "J" {
        Ok(Modifier::j(n))
    } else {
        parse_phi(spec)
    }
}

#[derive(Serialize)]
struct DimReport {
    n: usize,
    rank: usize,
    dim: usize,
}

#[derive(Serialize)]
struct GoodPathOutput {
    #[serde(flatten)]
    path: GoodPath,
    left_residual: f64,
    right_residual: f64,
}

#[derive(serde::Deserialize)]
struct LinearFile {
    #[serde(rename = "Z")]
    z: MatrixJson,
    #[serde(rename = "E")]
    e: MatrixJson,
}

#[derive(serde::Deserialize)]
struct PolyFile {
    #[serde(rename = "Z")]
    z: MatrixJson,
    #[serde(rename = "E")]
    e: Vec<MatrixJson>,
}

fn load_path(spec: &str) -> Result<PathKind> {
    let (kind, file) = spec
        .split_once(':')
        .ok_or_else(|| Error::InvalidInput("--path must be KIND:FILE".into()))?;
    let text = std::fs::read_to_string(file)?;
    Ok(match kind {
        "linear" => {
            let f: LinearFile = from_json(&text)?;
            PathKind::Linear {
                z: f.z.try_into()?,
                e: f.e.try_into()?,
            }
        }
        "poly" | "polynomial" => {
            let f: PolyFile = from_json(&text)?;
            PathKind::Polynomial {
                z: f.z.try_into()?,
                e: f.e.into_iter().map(Matrix::try_from).collect::<Result<_>>()?,
            }
        }
        "goodpath" => PathKind::Goodpath {
            path: from_json(&text)?,
        },
        "samples" => PathKind::Samples {
            samples: from_json::<Vec<PathSample>>(&text)?,
        },
        other => {
            return Err(Error::InvalidInput(format!(
                "unknown path kind '{other}'; use linear, poly, goodpath or samples"
            )))
        }
    })
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Criteria { op, z, a, c, tol } => {
            let tol = tol.get()?;
            let z = read_matrix(&z)?;
            let a = || read_matrix(need(&a, "--A")?);
            match op {
                CriteriaOp::Sker => emit(&in_s_ker(&a()?, &z, &tol)?, None)?,
                CriteriaOp::Sim => emit(&in_s_im(&a()?, &z, &tol)?, None)?,
                CriteriaOp::Sc => emit(&in_s_c(&a()?, &z, &read_matrix(need(&c, "--C")?)?, &tol)?, None)?,
                CriteriaOp::ScStar => {
                    emit(&in_s_c_star(&a()?, &z, &read_matrix(need(&c, "--C")?)?, &tol)?, None)?
                }
                CriteriaOp::Dim => {
                    let r = rank(&z, &tol);
                    let n = z.nrows();
                    emit(&DimReport { n, rank: r, dim: dim_s_ker(n, r)? }, None)?
                }
                CriteriaOp::Basis => {
                    let b: Vec<MatrixJson> = basis_s_ker(&z, &tol)?.iter().map(MatrixJson::from).collect();
                    emit(&b, None)?
                }
            }
        }
        Command::Goodpath { z, e, order, out, tol } => {
            let tol = tol.get()?;
            let z = read_matrix(&z)?;
            let path = if e.is_empty() {
                construct_good_path(&z, &tol, order)?
            } else {
                let e: Vec<Matrix> = e.iter().map(|p| read_matrix(p)).collect::<Result<_>>()?;
                laurent_path(&z, &e, order, &tol)?
            };
            let (left_residual, right_residual) = identity_residuals(&path);
            emit(
                &GoodPathOutput {
                    path,
                    left_residual,
                    right_residual,
                },
                out.as_deref(),
            )?
        }
        Command::Modifier {
            op,
            phi,
            z,
            a,
            b,
            threshold,
            seed,
            trials,
            tol,
        } => {
            let tol = tol.get()?;
            match op {
                ModifierOp::Member | ModifierOp::MemberDual => {
                    let z = read_matrix(need(&z, "--Z")?)?;
                    let a = read_matrix(need(&a, "--A")?)?;
                    let phi = phi_for(&phi, z.nrows())?;
                    let seed = need_seed(seed)?;
                    let r = if matches!(op, ModifierOp::Member) {
                        union_membership(&a, &z, &phi, &tol, seed, DEFAULT_DRAWS)?
                    } else {
                        union_membership_dual(&a, &z, &phi, &tol, seed, DEFAULT_DRAWS)?
                    };
                    emit(&r, None)?
                }
                ModifierOp::Faithful => {
                    let n = match (&z, &a) {
                        (Some(p), _) | (None, Some(p)) => read_matrix(p)?.nrows(),
                        (None, None) => match parse_phi(&phi)?.dim() {
                            Some(n) => n,
                            None => {
                                return Err(Error::InvalidInput(
                                    "give --Z or --A to fix the matrix size".into(),
                                ))
                            }
                        },
                    };
                    let phi = phi_for(&phi, n)?;
                    emit(&nilpotent_faithful(&phi, n, &tol, need_seed(seed)?, trials)?, None)?
                }
                ModifierOp::Gershgorin => emit(&gershgorin(&read_matrix(need(&a, "--A")?)?)?, None)?,
                ModifierOp::Jbound => emit(&j_norm_bound(&read_matrix(need(&a, "--A")?)?)?, None)?,
                ModifierOp::DiagBound => {
                    let fam: Vec<Matrix> = b.iter().map(|p| read_matrix(p)).collect::<Result<_>>()?;
                    emit(&conjugation_diag_bound_check(&fam, threshold)?, None)?
                }
            }
        }
        Command::Simulate {
            path,
            a,
            phi,
            grid,
            csv,
            out,
        } => {
            let a = read_matrix(&a)?;
            let phi = phi_for(&phi, a.nrows())?;
            let spec = PathSpec::new(load_path(&path)?).with_grid(parse_grid(&grid)?);
            let report = simulate(&spec, &a, &phi)?;
            if let Some(p) = csv {
                std::fs::write(p, report.to_csv())?;
            }
            emit(&report, out.as_deref())?
        }
        Command::Suite {
            id,
            seed,
            trials,
            out,
        } => {
            let config = SuiteConfig { trials };
            let ids: Vec<&str> = if id == "all" { SUITES.to_vec() } else { vec![id.as_str()] };
            let reports = ids
                .iter()
                .map(|s| run_suite(s, seed, &config))
                .collect::<Result<Vec<_>>>()?;
            for r in &reports {
                let failed = r.failures().count();
                eprintln!(
                    "{:<22} {} {}/{} cases pass  [{}]",
                    r.suite_id,
                    if r.passed { "PASS" } else { "FAIL" },
                    r.cases.len() - failed,
                    r.cases.len(),
                    r.anchor
                );
            }
            if reports.len() == 1 {
                emit(&reports[0], out.as_deref())?;
            } else {
                emit(&reports, out.as_deref())?;
            }
            if let Some(bad) = reports.iter().find(|r| !r.passed) {
                return Ok(ExitCode::from(exit_code(&bad.suite_id) as u8));
            }
        }
        Command::Convert { input, out, to } => {
            let m = read_matrix(&input)?;
            match (out, to) {
                (Some(p), _) => conjlim::io::write_matrix(&p, &m)?,
                (None, Some(Format::Csv)) => print!("{}", matrix_to_csv(&m)),
                (None, _) => {
                    let from_csv = input.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
                    if from_csv || matches!(to, Some(Format::Json)) {
                        println!("{}", matrix_to_json(&m));
                    } else {
                        print!("{}", matrix_to_csv(&m));
                    }
                }
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
