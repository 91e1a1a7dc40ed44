use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use diffelim::frontend::{parse_poly, parse_system, Scope};
use diffelim::pipeline::{ags_report, carra_ferro_report, prepare, ps_report, run_matrix, run_pipeline, PipelineError, PipelineOptions, Prepared};
use diffelim::poly::{MultiPoly, Variable};
use diffelim::polytope::mixed_volumes_minus;
use diffelim::specialize::diff_generic_zero_eval;
use diffelim::sylvester::{build_sylvester, polynomial_quotient, SylvesterMatrix};
use diffelim::system::{DiffSystem, Mode};

#[derive(Parser)]
#[command(name = "diffelim", version, about = "Differential elimination with sparse resultant matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// System file.
    system: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// 1-based index into ps(P), or `all`.
    #[arg(long, default_value = "all")]
    distinguished: String,
    /// `concrete` or `generic`.
    #[arg(long)]
    mode: Option<String>,
    /// Also write the JSON output to this path.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Order matrix, Jacobi numbers and the super-essential subsystem.
    Analyze(Common),
    /// The prolonged system ps(P).
    Extend(Common),
    /// The generic algebraic system and its specialization table.
    Ags(Common),
    /// Build a resultant matrix (JSON).
    Matrix(Common),
    /// Determinant of a built or stored matrix.
    Det {
        /// System file; omit when `--matrix` is given.
        system: Option<PathBuf>,
        #[arg(long, conflicts_with = "system")]
        matrix: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "1")]
        distinguished: String,
        #[arg(long)]
        mode: Option<String>,
    },
    /// Full pipeline: elimination polynomials and report.
    Eliminate(Common),
    /// Order and degree bounds for each elimination polynomial.
    Bounds(Common),
    /// Check that a polynomial vanishes at the generic zero of the system.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        poly: PathBuf,
    },
    /// Exact division of one polynomial by another.
    Divide {
        #[arg(long)]
        poly: PathBuf,
        #[arg(long)]
        by: PathBuf,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        Failure { code: e.exit_code() as u8, message: e.to_string() }
    }
}

fn fail(code: u8, message: impl ToString) -> Failure {
    Failure { code, message: message.to_string() }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| fail(1, format!("{}: {e}", path.display())))
}

fn load(c: &Common) -> Result<DiffSystem, Failure> {
    let text = read(&c.system)?;
    parse_system(&text).map_err(|e| fail(2, format!("{}:{e}", c.system.display())))
}

fn mode(c: &Common) -> Result<Option<Mode>, Failure> {
    match c.mode.as_deref() {
        None => Ok(None),
        Some("concrete") => Ok(Some(Mode::Concrete)),
        Some("generic") => Ok(Some(Mode::Generic)),
        Some(m) => Err(fail(2, format!("unknown mode `{m}`"))),
    }
}

fn distinguished(c: &Common) -> Result<Option<usize>, Failure> {
    if c.distinguished == "all" {
        return Ok(None);
    }
    match c.distinguished.parse::<usize>() {
        Ok(l) if l >= 1 => Ok(Some(l - 1)),
        _ => Err(fail(2, format!("bad --distinguished `{}`", c.distinguished))),
    }
}

fn prepared(c: &Common) -> Result<Prepared, Failure> {
    Ok(prepare(load(c)?, mode(c)?)?)
}

fn emit_json(c: Option<&Common>, value: &impl serde::Serialize) -> Result<String, Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| fail(1, e))? + "\n";
    if let Some(path) = c.and_then(|c| c.json.as_ref()) {
        std::fs::write(path, &text).map_err(|e| fail(1, format!("{}: {e}", path.display())))?;
    }
    Ok(text)
}

fn run(cli: Cli) -> Result<String, Failure> {
    match cli.command {
        Command::Analyze(c) => {
            let p = prepared(&c)?;
            emit_json(Some(&c), &p.analysis)
        }
        Command::Extend(c) => {
            let p = prepared(&c)?;
            let value = serde_json::json!({
                "schema": 1,
                "ps": ps_report(&p),
                "carraFerro": carra_ferro_report(&p)?,
            });
            emit_json(Some(&c), &value)
        }
        Command::Ags(c) => {
            let p = prepared(&c)?;
            emit_json(Some(&c), &ags_report(&p))
        }
        Command::Matrix(c) => {
            let p = prepared(&c)?;
            let l = distinguished(&c)?.unwrap_or(0);
            if l >= p.ags.len() {
                return Err(fail(2, format!("no polynomial {} in ps(P)", l + 1)));
            }
            let (m, _) = build_sylvester(&p.ags, l, c.seed).map_err(PipelineError::from)?;
            emit_json(Some(&c), &m.to_file())
        }
        Command::Det { system, matrix, seed, distinguished: dist, mode } => {
            let m = match (matrix, system) {
                (Some(path), _) => SylvesterMatrix::from_json(&read(&path)?).map_err(|e| fail(2, e))?,
                (None, Some(system)) => {
                    let c = Common { system, seed, distinguished: dist, mode, json: None };
                    let p = prepared(&c)?;
                    let l = distinguished(&c)?.unwrap_or(0);
                    if l >= p.ags.len() {
                        return Err(fail(2, format!("no polynomial {} in ps(P)", l + 1)));
                    }
                    build_sylvester(&p.ags, l, c.seed).map_err(PipelineError::from)?.0
                }
                (None, None) => return Err(fail(2, "give a system or --matrix")),
            };
            let d = m.determinant().map_err(PipelineError::from)?;
            Ok(format!("{d}\n"))
        }
        Command::Eliminate(c) => {
            let opts = PipelineOptions { distinguished: distinguished(&c)?, seed: c.seed, mode: mode(&c)? };
            let (report, _) = run_pipeline(load(&c)?, &opts)?;
            emit_json(Some(&c), &report)?;
            let mut out = String::new();
            for m in &report.matrices {
                match &m.specialization {
                    Some(s) => out += &format!("D{} = {}\n", m.distinguished, s.poly),
                    None => out += &format!("D{} = 0\n", m.distinguished),
                }
            }
            Ok(out)
        }
        Command::Bounds(c) => {
            let p = prepared(&c)?;
            if p.sys.mode != Mode::Generic {
                return Err(fail(2, "bounds need a generic system (use --mode generic)"));
            }
            let targets: Vec<usize> = match distinguished(&c)? {
                Some(l) => vec![l],
                None => (0..p.ags.len()).collect(),
            };
            let mvs = mixed_volumes_minus(&p.ags.supports());
            let mut reports = Vec::new();
            for l in targets {
                let run = run_matrix(&p, l, c.seed, &mvs)?;
                if let Some(b) = run.report.bounds {
                    reports.push(serde_json::json!({ "distinguished": l + 1, "bounds": b }));
                }
            }
            if reports.is_empty() {
                return Err(PipelineError::Vanished("all determinants are zero".into()).into());
            }
            emit_json(Some(&c), &serde_json::json!({ "schema": 1, "matrices": reports }))
        }
        Command::Verify { common, poly } => {
            let p = prepared(&common)?;
            let q = parse_poly(&read(&poly)?, &Scope::of_system(&p.sys)).map_err(|e| fail(2, format!("{}:{e}", poly.display())))?;
            let algebraic = q.variables().iter().any(|v| matches!(v.variable(), Variable::GenCoeff { .. } | Variable::AlgVar { .. }));
            let (vanishes, point) = if algebraic {
                (p.ags.vanishes_at_generic_zero(&q).map_err(|e| fail(1, e))?, "algebraic generic zero")
            } else {
                if p.sys.mode != Mode::Generic {
                    return Err(fail(2, "membership in the differential ideal needs a generic system"));
                }
                (diff_generic_zero_eval(&q, &p.sys).map_err(|e| fail(1, e))?.is_zero(), "differential generic zero")
            };
            let value = serde_json::json!({ "schema": 1, "point": point, "vanishes": vanishes });
            let text = emit_json(Some(&common), &value)?;
            if vanishes {
                Ok(text)
            } else {
                Err(fail(1, format!("does not vanish at the {point}")))
            }
        }
        Command::Divide { poly, by } => {
            let scope = Scope::open();
            let parse = |path: &Path| -> Result<MultiPoly, Failure> {
                parse_poly(&read(path)?, &scope).map_err(|e| fail(2, format!("{}:{e}", path.display())))
            };
            let (a, b) = (parse(&poly)?, parse(&by)?);
            match polynomial_quotient(&a, &b) {
                Some(q) => Ok(format!("{q}\n")),
                None => Err(fail(1, "not divisible")),
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
