mod doc;
mod dot;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use autorees_core::rees::{
    add_zero, backward_transfer, backward_transfer_weak, drop_zero, forward_transfer, forward_transfer_general,
    prefix_backward_transfer, prefix_forward_transfer, ReesData, ReesMatrix, RowCrossSectionWitness, TransferOptions,
};
use autorees_core::structure::{
    consolidation_transfer, free_structure, trivial_structure, AutomaticStructure, CheckStatus, VerifyOptions,
};
use autorees_core::Error;

use doc::{Body, Document, GraphDoc, StructureDoc};

#[derive(Parser)]
#[command(name = "autorees", version, about = "Automatic structures for semigroupoids and Rees matrix semigroups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Checks that a document is well formed and its algebra obeys the axioms.
    Validate {
        file: PathBuf,
        /// Rees document against which a witness is checked.
        #[arg(long)]
        rees: Option<PathBuf>,
    },
    /// Operations on Rees matrix documents.
    Rees {
        #[command(subcommand)]
        command: ReesCommand,
    },
    /// Builds a structure for a Rees matrix semigroup from one for its base, or back.
    Transfer {
        #[arg(value_enum)]
        mode: Mode,
        /// The Rees matrix document. Not used by `consolidation`.
        #[arg(long)]
        rees: Option<PathBuf>,
        /// The input structure; derived from the algebra when omitted.
        #[arg(long)]
        structure: Option<PathBuf>,
        #[arg(long)]
        witness: Option<PathBuf>,
        /// Produce or consume a structure for the semigroup without zero.
        #[arg(long)]
        no_zero: bool,
        #[arg(long, default_value_t = 8)]
        max_verify_len: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Checks a structure against its definition on all words up to a length.
    Verify {
        file: PathBuf,
        #[arg(long, default_value_t = 8)]
        max_verify_len: usize,
    },
    /// Renders a document as DOT, or a document or DOT file as canonical JSON.
    Export {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Doc)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ReesCommand {
    /// Tabulates a Rees matrix semigroup over a finite base.
    Build {
        file: PathBuf,
        #[arg(long)]
        no_zero: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Forward,
    ForwardGeneral,
    Backward,
    BackwardWeak,
    PrefixForward,
    PrefixBackward,
    Consolidation,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Dot,
    Doc,
}

/// A failure with the exit status it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        let code = match error.chain().find_map(|e| e.downcast_ref::<Error>()) {
            Some(
                Error::Precondition(_)
                | Error::Unsupported(_)
                | Error::SearchExhausted { .. }
                | Error::NoLocalSemigroup(_),
            ) => 3,
            _ => 2,
        };
        Failure { code, error }
    }
}

fn unsupported(msg: impl Into<String>) -> Failure {
    Failure {
        code: 3,
        error: anyhow!(msg.into()),
    }
}

fn read(path: &Path) -> Result<Document> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    doc::parse(&text).with_context(|| format!("in {}", path.display()))
}

fn write(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn validate(file: &Path, rees: Option<&Path>) -> Result<u8, Failure> {
    let d = read(file)?;
    let verdict: Result<(), String> = match &d.body {
        Body::Graph(g) => g.build().map(|_| ()).map_err(|e| e.to_string()),
        Body::Semigroupoid { .. } => {
            let a = d.body.algebra()?;
            let rep = a.table.expect("tables are finite").validate();
            if rep.is_valid() {
                Ok(())
            } else {
                Err(rep.descriptions.join("\n"))
            }
        }
        Body::Free { .. } | Body::Consolidation { .. } | Body::Rees(_) => {
            d.body.checked_algebra().map(|_| ()).map_err(|e| format!("{e:#}"))
        }
        Body::Automaton { graph, automaton } => {
            let g = graph.build()?;
            automaton.path(&g).map(|_| ()).map_err(|e| format!("{e:#}"))
        }
        Body::Witness(w) => {
            let Some(r) = rees else {
                return Err(anyhow!("validating a witness needs --rees").into());
            };
            let data = rees_data(&read(r)?)?;
            w.witness(&data)
                .and_then(|w| Ok(w.validate(&data, TransferOptions::default().search_size)?))
                .map_err(|e| format!("{e:#}"))
        }
        Body::Structure(s) => s.build().map(|_| ()).map_err(|e| format!("{e:#}")),
    };
    match verdict {
        Ok(()) => {
            println!("valid {}", d.body.kind());
            Ok(0)
        }
        Err(why) => {
            println!("invalid {}", d.body.kind());
            println!("{why}");
            Ok(1)
        }
    }
}

fn rees_data(d: &Document) -> Result<ReesData> {
    match &d.body {
        Body::Rees(r) => r.data(),
        other => bail!("expected a rees document, found `{}`", other.kind()),
    }
}

fn rees_build(file: &Path, no_zero: bool, out: Option<&Path>) -> Result<u8, Failure> {
    let data = Arc::new(rees_data(&read(file)?)?);
    if !data.base.is_finite() {
        return Err(unsupported("only Rees matrix semigroups over finite bases can be tabulated"));
    }
    let m = ReesMatrix::new(data, !no_zero).map_err(anyhow::Error::from)?;
    write(out, &doc::render(Body::table_of(&m)?))?;
    Ok(0)
}

fn structure_of(path: &Path) -> Result<(AutomaticStructure, Body)> {
    let d = read(path)?;
    match d.body {
        Body::Structure(s) => {
            let (st, _) = s.build()?;
            Ok((st, s.algebra))
        }
        other => bail!("expected a structure document, found `{}`", other.kind()),
    }
}

/// The canonical structure of an algebra document, when there is one.
fn derived(body: &Body) -> Result<AutomaticStructure, Failure> {
    let a = body.checked_algebra()?;
    if let Some((g, identities)) = a.free {
        return Ok(free_structure(g, identities).map_err(anyhow::Error::from)?);
    }
    if a.algebra.is_finite() {
        return Ok(trivial_structure(a.algebra).map_err(anyhow::Error::from)?);
    }
    Err(unsupported("the algebra is infinite and no structure was given"))
}

struct TransferArgs<'a> {
    mode: Mode,
    rees: Option<&'a Path>,
    structure: Option<&'a Path>,
    witness: Option<&'a Path>,
    no_zero: bool,
    max_verify_len: usize,
    out: Option<&'a Path>,
}

fn transfer(args: TransferArgs<'_>) -> Result<u8, Failure> {
    let opts = TransferOptions::default();
    let (result, algebra) = if args.mode == Mode::Consolidation {
        let (s, body) = match args.structure {
            Some(p) => structure_of(p)?,
            None => return Err(anyhow!("consolidation needs --structure").into()),
        };
        let t = consolidation_transfer(&s).map_err(anyhow::Error::from)?;
        (t, Body::Consolidation { of: Box::new(body) })
    } else {
        let rees_path = args.rees.ok_or_else(|| anyhow!("--rees is required"))?;
        let rees_doc = read(rees_path)?;
        let Body::Rees(mut rd) = rees_doc.body.clone() else {
            return Err(anyhow!("expected a rees document").into());
        };
        let data = Arc::new(rd.data()?);
        let witness = match args.witness {
            Some(p) => match read(p)?.body {
                Body::Witness(w) => Some(w.witness(&data)?),
                other => return Err(anyhow!("expected a witness, found `{}`", other.kind()).into()),
            },
            None => None,
        };
        let need_witness = |strong: bool| -> Result<RowCrossSectionWitness, Failure> {
            if let Some(w) = &witness {
                return Ok(w.clone());
            }
            if data.base.is_finite() {
                return Ok(RowCrossSectionWitness::find(&data, strong).map_err(anyhow::Error::from)?);
            }
            Err(unsupported("a witness is required when the base is infinite"))
        };
        let forward = matches!(args.mode, Mode::Forward | Mode::ForwardGeneral | Mode::PrefixForward);
        let input = match (args.structure, forward) {
            (Some(p), _) => structure_of(p)?.0,
            (None, true) => derived(&rd.base)?,
            (None, false) => {
                let mut own = rd.clone();
                own.with_zero = !args.no_zero;
                derived(&Body::Rees(own))?
            }
        };
        let input = if !forward && args.no_zero {
            add_zero(&input, Arc::clone(&data)).map_err(anyhow::Error::from)?
        } else {
            input
        };
        let d = Arc::clone(&data);
        let t = match args.mode {
            Mode::Forward => forward_transfer(&input, d, &opts),
            Mode::ForwardGeneral => forward_transfer_general(&input, d, &opts),
            Mode::PrefixForward => prefix_forward_transfer(&input, d, &need_witness(true)?, &opts),
            Mode::Backward => backward_transfer(&input, d, &need_witness(true)?, &opts),
            Mode::BackwardWeak => backward_transfer_weak(&input, d, &need_witness(false)?, &opts),
            Mode::PrefixBackward => prefix_backward_transfer(&input, d, &opts),
            Mode::Consolidation => unreachable!(),
        }
        .map_err(anyhow::Error::from)?;
        if forward {
            rd.with_zero = !args.no_zero;
            let t = if args.no_zero {
                drop_zero(&t, data, &opts).map_err(anyhow::Error::from)?
            } else {
                t
            };
            (t, Body::Rees(rd))
        } else {
            (t, (*rd.base).clone())
        }
    };
    let code = report(&result, args.max_verify_len)?;
    write(args.out, &doc::render(Body::Structure(Box::new(StructureDoc::of(&result, algebra)))))?;
    Ok(code)
}

/// Prints the verification report to stderr; 0 when every check passes.
fn report(s: &AutomaticStructure, bound: usize) -> Result<u8> {
    let rep = s.verify(&VerifyOptions::new(bound))?;
    for c in &rep.checks {
        match &c.status {
            CheckStatus::Pass => eprintln!("pass {}", c.name),
            CheckStatus::Skipped(why) => eprintln!("skip {}: {why}", c.name),
            CheckStatus::Fail(why) => eprintln!("FAIL {}: {why}", c.name),
        }
    }
    Ok(if rep.passed() { 0 } else { 1 })
}

fn verify(file: &Path, bound: usize) -> Result<u8, Failure> {
    let (s, _) = structure_of(file)?;
    Ok(report(&s, bound)?)
}

fn export(file: &Path, format: Format, out: Option<&Path>) -> Result<u8, Failure> {
    let text = std::fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    if !text.trim_start().starts_with('{') {
        let (graph, automaton) = dot::parse_automaton(&text).with_context(|| format!("in {}", file.display()))?;
        let body = Body::Automaton { graph, automaton };
        let rendered = match format {
            Format::Doc => doc::render(body),
            Format::Dot => match &body {
                Body::Automaton { graph, automaton } => dot::automaton(graph, automaton),
                _ => unreachable!(),
            },
        };
        write(out, &rendered)?;
        return Ok(0);
    }
    let d = doc::parse(&text).with_context(|| format!("in {}", file.display()))?;
    let rendered = match format {
        Format::Doc => doc::render(d.body),
        Format::Dot => match &d.body {
            Body::Graph(g) => dot::graph(g),
            Body::Automaton { graph, automaton } => dot::automaton(graph, automaton),
            Body::Structure(s) => dot::automaton(&GraphDoc::of(&*s.graph()?), &s.language),
            Body::Free { graph, .. } => dot::graph(graph),
            other => return Err(unsupported(format!("no DOT rendering for `{}` documents", other.kind()))),
        },
    };
    write(out, &rendered)?;
    Ok(0)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Validate { file, rees } => validate(&file, rees.as_deref()),
        Command::Rees {
            command: ReesCommand::Build { file, no_zero, out },
        } => rees_build(&file, no_zero, out.as_deref()),
        Command::Transfer {
            mode,
            rees,
            structure,
            witness,
            no_zero,
            max_verify_len,
            out,
        } => transfer(TransferArgs {
            mode,
            rees: rees.as_deref(),
            structure: structure.as_deref(),
            witness: witness.as_deref(),
            no_zero,
            max_verify_len,
            out: out.as_deref(),
        }),
        Command::Verify { file, max_verify_len } => verify(&file, max_verify_len),
        Command::Export { file, format, out } => export(&file, format, out.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
