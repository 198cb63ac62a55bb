use std::fs::{self, OpenOptions};
use std::io::{self, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use lpcloak::bench::{run_bench, write_csv, BenchConfig};
use lpcloak::prelude::*;
use lpcloak::wire;

/// Outsource linear programs to an untrusted solver and check its answers.
#[derive(Parser)]
#[command(name = "lpcloak", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random problem with a known outcome.
    Gen {
        #[arg(long)]
        size: usize,
        /// Equality rows; defaults to ceil(size / 2).
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, default_value = "feasible")]
        mode: Mode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Use a random nonsingular inequality matrix instead of the identity.
        #[arg(long)]
        random_ineq: bool,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Draw a one-time key bound to a problem.
    Keygen {
        problem: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Disguise a problem. The key file is marked used afterwards.
    Encrypt {
        problem: PathBuf,
        key: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Solve a disguised problem locally, as the cloud would.
    Solve {
        encrypted: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Verify a cloud result and map it back to the original problem.
    Decrypt {
        problem: PathBuf,
        key: PathBuf,
        result: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Solve a small problem by vertex enumeration.
    Oracle {
        problem: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Run the solver service.
    Serve {
        #[arg(long, default_value_t = 7878)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Send a disguised problem to a running service.
    Client {
        encrypted: PathBuf,
        #[arg(long, default_value = "127.0.0.1:7878")]
        addr: String,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Time the full pipeline against a direct solve.
    Bench {
        /// Problem sizes n; repeat or comma-separate.
        #[arg(long = "size", value_delimiter = ',', default_values_t = [50, 100, 200, 400])]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

const EXIT_REJECTED: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_UNBOUNDED: u8 = 4;

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn tolerance(tol: Option<f64>) -> anyhow::Result<Tolerance> {
    Ok(match tol {
        Some(t) => Tolerance::with_rel(t)?,
        None => Tolerance::default(),
    })
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    serde_json::from_str(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, format!("{text}\n"))
            .with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = io::stdout().lock();
            writeln!(stdout, "{text}")?;
            Ok(())
        }
    }
}

fn load_problem(path: &Path) -> anyhow::Result<LpProblem> {
    LpProblem::from_json(&read(path)?).with_context(|| format!("loading {}", path.display()))
}

fn used_marker(key: &Path) -> PathBuf {
    let mut name = key.as_os_str().to_owned();
    name.push(".used");
    PathBuf::from(name)
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Gen {
            size,
            m,
            mode,
            seed,
            random_ineq,
            out,
        } => {
            let mut opts = GenOptions::new(size, m.unwrap_or(size.div_ceil(2)), mode);
            opts.random_ineq = random_ineq;
            let p = generate(&opts, seed)?;
            emit(out.as_deref(), &p.to_canonical_json())?;
        }
        Command::Keygen { problem, seed, out } => {
            let p = load_problem(&problem)?;
            emit(out.as_deref(), &keygen(&p, seed)?.to_json())?;
        }
        Command::Encrypt { problem, key, out } => {
            let p = load_problem(&problem)?;
            let k = SecretKey::from_json(&read(&key)?)?;
            if k.is_used() {
                return Err(Error::KeyReuse.into());
            }
            if digest(&p) != k.problem_digest {
                return Err(Error::KeyProblemMismatch.into());
            }
            let marker = used_marker(&key);
            match OpenOptions::new().write(true).create_new(true).open(&marker) {
                Ok(_) => {}
                Err(e) if e.kind() == io::ErrorKind::AlreadyExists => {
                    return Err(Error::KeyReuse.into());
                }
                Err(e) => {
                    return Err(e).with_context(|| format!("creating {}", marker.display()))
                }
            }
            let e = prob_enc(&k, &p)?;
            fs::write(&key, k.to_json()).with_context(|| format!("writing {}", key.display()))?;
            emit(out.as_deref(), &serde_json::to_string(&e)?)?;
        }
        Command::Solve { encrypted, tol, out } => {
            let e: EncryptedProblem = read_json(&encrypted)?;
            let r = proof_gen(&e, &tolerance(tol)?)?;
            emit(out.as_deref(), &serde_json::to_string(&r)?)?;
        }
        Command::Decrypt {
            problem,
            key,
            result,
            tol,
            out,
        } => {
            let p = load_problem(&problem)?;
            let k = SecretKey::from_json(&read(&key)?)?;
            let r: CloudResult = read_json(&result)?;
            let solution = match result_dec(&k, &p, &r, &tolerance(tol)?) {
                Ok(s) => s,
                Err(Error::VerificationFailed(rejection)) => {
                    eprintln!("rejected: {rejection}");
                    return Ok(ExitCode::from(EXIT_REJECTED));
                }
                Err(e) => return Err(e.into()),
            };
            emit(out.as_deref(), &serde_json::to_string_pretty(&solution)?)?;
            return Ok(match solution.status {
                Status::Optimal => ExitCode::SUCCESS,
                Status::Infeasible => ExitCode::from(EXIT_INFEASIBLE),
                Status::Unbounded => ExitCode::from(EXIT_UNBOUNDED),
            });
        }
        Command::Oracle { problem, tol } => {
            let p = load_problem(&problem)?;
            let outcome = enumerate_solve(&p, tol)?;
            emit(None, &serde_json::to_string_pretty(&outcome)?)?;
        }
        Command::Serve { port, host, tol } => {
            let listener = TcpListener::bind((host.as_str(), port))
                .with_context(|| format!("binding {host}:{port}"))?;
            eprintln!("listening on {}", listener.local_addr()?);
            wire::serve(listener, tolerance(tol)?)?;
        }
        Command::Client {
            encrypted,
            addr,
            out,
        } => {
            let e: EncryptedProblem = read_json(&encrypted)?;
            let r = wire::request(addr.as_str(), &e)?;
            emit(out.as_deref(), &serde_json::to_string(&r)?)?;
        }
        Command::Bench {
            sizes,
            trials,
            seed,
            csv,
        } => {
            if trials == 0 || sizes.is_empty() {
                bail!("need at least one size and one trial");
            }
            let records = run_bench(&BenchConfig::new(sizes, trials, seed))?;
            match csv {
                Some(path) => {
                    let file = fs::File::create(&path)
                        .with_context(|| format!("creating {}", path.display()))?;
                    write_csv(&records, io::BufWriter::new(file))?;
                }
                None => write_csv(&records, io::stdout().lock())?,
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
