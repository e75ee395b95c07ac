//! `occt`: batch checker and interactive toplevel.
//!
//! `occt check FILE...` parses, checks and reports every top-level binding
//! as a `name : type` line; `occt repl` starts an interactive loop.

use std::io::{BufRead, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use occt_core::checker::{AbsInfMode, CheckConfig};
use occt_core::eval::EvalResult;
use occt_core::session::Session;
use occt_core::syntax::parser::{parse_expr_or_decl, Decl, TopLevel};
use occt_core::syntax::pretty::{pretty_type, pretty_value};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AbsInfArg {
    Plus,
    Plusplus,
}

#[derive(Debug, Parser)]
#[command(
    name = "occt",
    about = "Occurrence typing checker for a small functional language"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, clap::Args)]
struct CommonFlags {
    /// Refinement iteration bound (default: twice the depth of the tested
    /// expression). Overrides the OCCT_ITERS environment variable.
    #[arg(long)]
    iters: Option<u32>,
    /// Evaluation fuel for the REPL and `:t`-free lines.
    #[arg(long, default_value_t = 10_000)]
    fuel: u64,
    /// Treat warnings as errors in the exit code.
    #[arg(long)]
    strict: bool,
    /// Allow type-cases that discriminate between function types.
    #[arg(long)]
    allow_arrow_tests: bool,
    /// Reconstruction rule for unannotated lambdas.
    #[arg(long, value_enum, default_value = "plusplus")]
    absinf: AbsInfArg,
    /// Extra builtins, one `name : Type` per line.
    #[arg(long)]
    builtins: Option<std::path::PathBuf>,
    /// Machine-readable JSON report.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check source files and print the inferred type of each binding.
    Check {
        #[command(flatten)]
        flags: CommonFlags,
        /// Source files (`.occ`).
        files: Vec<std::path::PathBuf>,
    },
    /// Interactive toplevel.
    Repl {
        #[command(flatten)]
        flags: CommonFlags,
    },
}

fn config_from(flags: &CommonFlags) -> CheckConfig {
    let env_iters = std::env::var("OCCT_ITERS")
        .ok()
        .and_then(|v| v.parse().ok());
    CheckConfig {
        iters: flags.iters.or(env_iters),
        allow_arrow_tests: flags.allow_arrow_tests,
        absinf: match flags.absinf {
            AbsInfArg::Plus => AbsInfMode::Plus,
            AbsInfArg::Plusplus => AbsInfMode::PlusPlus,
        },
        warnings: true,
    }
}

fn new_session(flags: &CommonFlags) -> Result<Session, String> {
    let mut session = Session::new(config_from(flags));
    session.fuel = flags.fuel;
    if let Some(path) = &flags.builtins {
        let src = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let extra = occt_core::builtins::parse_builtins(&session.store, &session.type_names, &src)
            .map_err(|e| e.to_string())?;
        session.add_builtins(extra);
    }
    Ok(session)
}

fn cmd_check(flags: &CommonFlags, files: &[std::path::PathBuf]) -> ExitCode {
    let mut failed = false;
    for path in files {
        let session = match new_session(flags) {
            Ok(s) => s,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::FAILURE;
            }
        };
        let mut session = session;
        let src = match std::fs::read_to_string(path) {
            Ok(s) => s,
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", path.display());
                failed = true;
                continue;
            }
        };
        let report = session.check_source(&src);
        if flags.json {
            println!("{}", report.json());
        } else {
            print!("{}", report.text());
        }
        if report.has_errors() || (flags.strict && report.has_warnings()) {
            failed = true;
        }
    }
    if failed {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

fn cmd_repl(flags: &CommonFlags) -> ExitCode {
    let mut session = match new_session(flags) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    let stdin = std::io::stdin();
    let mut out = std::io::stdout();
    loop {
        print!("> ");
        let _ = out.flush();
        let mut line = String::new();
        match stdin.lock().read_line(&mut line) {
            Ok(0) => return ExitCode::SUCCESS,
            Ok(_) => {}
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::FAILURE;
            }
        }
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix(':') {
            let mut words = rest.split_whitespace();
            match words.next() {
                Some("q") | Some("quit") => return ExitCode::SUCCESS,
                Some("t") => {
                    let expr_src = rest.trim_start_matches('t').trim();
                    type_line(&session, expr_src);
                }
                Some("set") => match (words.next(), words.next().and_then(|w| w.parse().ok())) {
                    (Some("fuel"), Some(n)) => session.fuel = n,
                    (Some("iters"), Some(n)) => session.cfg.iters = Some(n as u32),
                    _ => println!("usage: :set fuel N | :set iters N"),
                },
                _ => println!("commands: :t EXPR, :set fuel N, :set iters N, :q"),
            }
            continue;
        }
        eval_line(&mut session, line);
    }
}

fn type_line(session: &Session, src: &str) {
    match parse_expr_or_decl(&session.store, &session.type_names, src) {
        Ok(TopLevel::Expr(e)) => {
            let (r, warnings) = session.type_check(&e);
            for w in warnings {
                println!("{w}");
            }
            match r {
                Ok(t) => println!("{}", pretty_type(&session.store, t)),
                Err(e) => println!("{e}"),
            }
        }
        Ok(TopLevel::Decl(_)) => println!(":t expects an expression"),
        Err(e) => println!("{e}"),
    }
}

fn eval_line(session: &mut Session, line: &str) {
    match parse_expr_or_decl(&session.store, &session.type_names, line) {
        Ok(TopLevel::Decl(Decl::TypeGroup { bindings })) => {
            for (name, t) in bindings {
                println!("type {name} = {}", pretty_type(&session.store, t));
                session.type_names.insert(name, t);
            }
        }
        Ok(TopLevel::Decl(Decl::Let { name, expr, .. })) => {
            let report = session.check_binding(&name, &expr);
            for w in &report.warnings {
                println!("{w}");
            }
            match (&report.ty, report.errors.first()) {
                (Some(ty), _) => println!("{name} : {ty}"),
                (None, Some(err)) => println!("{err}"),
                _ => {}
            }
        }
        Ok(TopLevel::Expr(e)) => {
            let (r, warnings) = session.type_check(&e);
            for w in warnings {
                println!("{w}");
            }
            let ty = match r {
                Ok(t) => t,
                Err(e) => {
                    println!("{e}");
                    return;
                }
            };
            match session.eval(&e) {
                EvalResult::Done(v) => println!(
                    "{} : {}",
                    pretty_value(&session.store, &v),
                    pretty_type(&session.store, ty)
                ),
                EvalResult::OutOfFuel(_) => println!("<out of fuel>"),
                EvalResult::Stuck(v) => {
                    println!("<stuck> {}", pretty_value(&session.store, &v))
                }
            }
        }
        Err(e) => println!("{e}"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Check { flags, files } => cmd_check(flags, files),
        Command::Repl { flags } => cmd_repl(flags),
    }
}
