mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gwsplit::gw::PipelineConfig;
use gwsplit::wang::LeibnizSign;

use commands::Ctx;
use report::{error_code, render, Envelope};

/// Obstruction calculus for symplectic fibrations over exact rationals.
#[derive(Parser, Debug)]
#[command(name = "gwsplit", version)]
struct Cli {
    /// Print the machine-readable report instead of the summary.
    #[arg(long, global = true)]
    json: bool,
    /// Include row provenance and solved spaces.
    #[arg(long, global = true)]
    verbose: bool,
    /// Sign convention of the Leibniz rule: koszul or flipped.
    #[arg(long, global = true, default_value = "koszul")]
    leibniz_sign: LeibnizSign,
    /// Largest table arity used for constraints.
    #[arg(long, global = true, default_value_t = 6)]
    max_arity: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the algebra axioms and Poincare duality.
    Validate { file: PathBuf },
    /// Solve for generalized Wang homomorphisms.
    Wang {
        file: PathBuf,
        /// Base dimensions; defaults to 2..=2n+1.
        #[arg(long = "m", num_args = 1..)]
        m: Vec<usize>,
    },
    /// Decide c-splitting from a problem document.
    Csplit {
        file: PathBuf,
        /// Use only the hard Lefschetz criterion with the cup-product table.
        #[arg(long)]
        blanchard: bool,
    },
    /// Bound the rank of the flux group.
    Flux { file: PathBuf },
    /// Build the cohomology ring of a blow-up.
    Blowup {
        file: PathBuf,
        /// Certify line-class invariants on basis pairs.
        #[arg(long)]
        emit_certificates: bool,
        /// Directory for ring.json and table_A.json.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Accept any odd fiber count.
        #[arg(long)]
        relaxed: bool,
    },
    /// Certify nonvanishing of line-class invariants.
    Certify {
        file: PathBuf,
        #[arg(long, requires = "beta")]
        alpha: Option<String>,
        #[arg(long, requires = "alpha")]
        beta: Option<String>,
        /// Check every dual-basis pair of the blown-up submanifold.
        #[arg(long)]
        family: bool,
        #[arg(long)]
        relaxed: bool,
    },
}

impl Command {
    fn file(&self) -> &PathBuf {
        match self {
            Command::Validate { file }
            | Command::Wang { file, .. }
            | Command::Csplit { file, .. }
            | Command::Flux { file }
            | Command::Blowup { file, .. }
            | Command::Certify { file, .. } => file,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let ctx = Ctx {
        verbose: cli.verbose,
        config: PipelineConfig { convention: cli.leibniz_sign, max_arity: cli.max_arity },
    };
    let res = match &cli.command {
        Command::Validate { file } => commands::validate(&ctx, file),
        Command::Wang { file, m } => commands::wang(&ctx, file, m),
        Command::Csplit { file, blanchard } => commands::csplit(&ctx, file, *blanchard),
        Command::Flux { file } => commands::flux(&ctx, file),
        Command::Blowup { file, emit_certificates, out, relaxed } => {
            commands::blowup(&ctx, file, *emit_certificates, out.as_deref(), *relaxed)
        }
        Command::Certify { file, alpha, beta, family, relaxed } => {
            let pair = alpha.as_deref().zip(beta.as_deref());
            commands::certify(&ctx, file, pair, *family, *relaxed)
        }
    };
    let env = Envelope { command: &argv, convention: cli.leibniz_sign.name(), max_arity: cli.max_arity };
    let code = match res {
        Ok(o) => {
            if cli.json {
                print!("{}", render(&env.wrap(&o)));
            } else {
                for l in &o.text {
                    println!("{l}");
                }
                if cli.verbose {
                    for d in &o.diagnostics {
                        println!("note: {d}");
                    }
                }
                for a in &o.assumptions {
                    println!("assumption: {a}");
                }
            }
            o.code
        }
        Err(e) => {
            if cli.json {
                print!("{}", render(&env.wrap_error(&e, std::slice::from_ref(cli.command.file()))));
            }
            eprintln!("error: {e}");
            error_code(&e)
        }
    };
    ExitCode::from(code as u8)
}
