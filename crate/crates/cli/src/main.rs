//! `uhf`: run constructions and certificates described by action-spec documents.
//!
//! Exit status is 0 on success or PASS, 1 on a failed certificate or an infeasible
//! construction, and 2 on any input error.

mod commands;
mod document;
mod literal;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Failure, Outcome, Session};

#[derive(Parser)]
#[command(name = "uhf", version, about = "Product type group actions on UHF algebras at finite stages")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Action-spec document (TOML)
    document: PathBuf,
    /// Directory for CSV artifacts and the replay plan; overrides `output` in the document
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Describe the group, factor pattern and action
    Info(Common),
    /// Write the stage unitary of an element
    Evaluate(Common),
    /// Build a Rokhlin tower for one stage unitary
    Tower(Common),
    /// Certify a tower schedule against an epsilon rule
    Certify(Common),
    /// Commutator-trace witness series of a flow
    Witness(Common),
    /// Bump the action up onto a target factor pattern
    #[command(name = "bump-up")]
    BumpUp(Common),
    /// Cut a diagonal action down to one entry per eigenvalue class
    #[command(name = "cut-down")]
    CutDown(Common),
    /// Induce the action of a subgroup up to the group
    Induce(Common),
    /// Extend a subgroup action and report towers for every element
    Extend(Common),
    /// Strongly outer or universal Rokhlin construction
    Construct(Common),
    /// Covariance and connecting-map checks on crossed product stages
    Crossed(Common),
    /// Diameter of the pulled-back trace simplex
    Simplex(Common),
}

impl Command {
    fn parts(&self) -> (&'static str, &Common) {
        match self {
            Command::Info(c) => ("info", c),
            Command::Evaluate(c) => ("evaluate", c),
            Command::Tower(c) => ("tower", c),
            Command::Certify(c) => ("certify", c),
            Command::Witness(c) => ("witness", c),
            Command::BumpUp(c) => ("bump-up", c),
            Command::CutDown(c) => ("cut-down", c),
            Command::Induce(c) => ("induce", c),
            Command::Extend(c) => ("extend", c),
            Command::Construct(c) => ("construct", c),
            Command::Crossed(c) => ("crossed", c),
            Command::Simplex(c) => ("simplex", c),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, common) = cli.command.parts();
    let path = common.document.display().to_string();
    let source = match std::fs::read_to_string(&common.document) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {path}: {e}");
            return ExitCode::from(2);
        }
    };
    let doc = match document::load(source) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {path}: {e}");
            return ExitCode::from(2);
        }
    };
    let out = commands::default_out(&doc, common.out.as_deref());
    let mut session = Session::new(&doc, name, out);
    let result = match name {
        "info" => commands::info(&mut session),
        "evaluate" => commands::evaluate_cmd(&mut session),
        "tower" => commands::tower(&mut session),
        "certify" => commands::certify(&mut session),
        "witness" => commands::witness(&mut session),
        "bump-up" => commands::bump(&mut session),
        "cut-down" => commands::cut(&mut session),
        "induce" => commands::induce_cmd(&mut session),
        "extend" => commands::extend(&mut session),
        "construct" => commands::construct(&mut session),
        "crossed" => commands::crossed(&mut session),
        "simplex" => commands::simplex(&mut session),
        _ => unreachable!("every subcommand is dispatched"),
    };
    let code = match result {
        Ok(Outcome::Pass) => 0,
        Ok(Outcome::Fail) => 1,
        Err(Failure::Input(e)) => {
            eprintln!("error: {path}: {e}");
            return ExitCode::from(2);
        }
        Err(Failure::Core(uhf_core::Error::Infeasible(m))) => {
            eprintln!("infeasible: {m}");
            1
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if name != "info" {
        match session.finish() {
            Ok(p) => println!("plan written to {}", p.display()),
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        }
    }
    ExitCode::from(code)
}
