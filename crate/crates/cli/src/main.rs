mod commands;
mod doc;

use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use addcat::exec::Exec;
use addcat::ring::{Ring, RingRef, RingSpec};
use addcat::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::{CertifyFlags, CharseqFlags, NestedFlags, Report};
use doc::InstanceDoc;

/// Exact certification of regularity and coherence properties of
/// additive categories over computable rings.
#[derive(Parser)]
#[command(name = "addcat", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Evaluate batch trials one at a time.
    #[arg(long, global = true)]
    sequential: bool,

    /// Print the report on one line.
    #[arg(long, global = true)]
    compact: bool,
}

#[derive(Args)]
struct Input {
    /// Instance document; `-` reads standard input.
    input: Option<PathBuf>,

    /// Instance document given inline as JSON.
    #[arg(long, conflicts_with = "input")]
    inline: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Decide exactness of `f0` then `f1` at the middle object.
    CheckExact(Input),
    /// Certify a morphism or a sampled batch at a regularity level.
    Certify {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 0)]
        l: usize,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        max_len: Option<usize>,
        /// Ring for a batch run without an instance document.
        #[arg(long)]
        ring: Option<String>,
    },
    /// Minimal twisted nilpotency degree of a nil object.
    NilDegree {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        bound: Option<usize>,
    },
    /// Twisted Laurent morphism operations.
    Laurent {
        op: LaurentOp,
        #[command(flatten)]
        input: Input,
    },
    /// Build and check the characteristic sequence of a free object.
    CharseqVerify {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        rank: Option<usize>,
        /// `identity`, `frobenius:e` or `rotation:r`.
        #[arg(long)]
        aut: Option<String>,
        #[arg(long)]
        ring: Option<String>,
    },
    /// Sequence-category operations.
    Nested {
        op: NestedOp,
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 0)]
        l: usize,
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        max_len: Option<usize>,
        /// Require a componentwise lift instead of one up to finitely many indices.
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        ring: Option<String>,
    },
    /// Split an idempotent endomorphism.
    IdemSplit(Input),
    /// Decide whether `f` factors through `g`.
    Divides(Input),
}

#[derive(Clone, Copy, ValueEnum)]
enum LaurentOp {
    Compose,
    Normalize,
    Divide,
}

#[derive(Clone, Copy, ValueEnum)]
enum NestedOp {
    Certify,
    Lift,
    LimitEq,
}

enum Failure {
    Input(String),
    Unsupported(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        match e {
            Error::UnsupportedRing { .. } | Error::UnsupportedAut(_) => Failure::Unsupported(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

fn load(input: &Input) -> Result<Option<InstanceDoc>, Failure> {
    let text = match (&input.input, &input.inline) {
        (_, Some(s)) => s.clone(),
        (Some(p), None) if p.as_os_str() == "-" => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| Failure::Input(format!("reading standard input: {e}")))?;
            s
        }
        (Some(p), None) => {
            std::fs::read_to_string(p).map_err(|e| Failure::Input(format!("reading {}: {e}", p.display())))?
        }
        (None, None) => return Ok(None),
    };
    Ok(Some(InstanceDoc::parse(&text)?))
}

fn require(input: &Input) -> Result<InstanceDoc, Failure> {
    load(input)?.ok_or_else(|| Failure::Input("an instance document is required (path, `-` or --inline)".into()))
}

/// The ring from the document, or from `--ring` when there is none.
fn ring_of(doc: Option<&InstanceDoc>, flag: Option<&str>) -> Result<RingRef, Failure> {
    match (doc, flag) {
        (Some(_), Some(_)) => Err(Failure::Input("--ring conflicts with the ring of the instance document".into())),
        (Some(d), None) => Ok(d.ring.clone()),
        (None, Some(s)) => Ok(Ring::new(s.parse::<RingSpec>()?)?),
        (None, None) => Err(Failure::Input("give an instance document or --ring".into())),
    }
}

fn run(cli: &Cli) -> Result<Report, Failure> {
    let exec = if cli.sequential { Exec::Sequential } else { Exec::Parallel };
    Ok(match &cli.command {
        Command::CheckExact(i) => commands::check_exact(&require(i)?)?,
        Command::Certify { input, l, trials, seed, max_len, ring } => {
            let doc = load(input)?;
            let r = ring_of(doc.as_ref(), ring.as_deref())?;
            commands::certify(
                &r,
                doc.as_ref(),
                &CertifyFlags { l: *l, trials: *trials, seed: *seed, max_len: *max_len },
                exec,
            )?
        }
        Command::NilDegree { input, bound } => commands::nil(&require(input)?, *bound)?,
        Command::Laurent { op, input } => {
            let name = match op {
                LaurentOp::Compose => "compose",
                LaurentOp::Normalize => "normalize",
                LaurentOp::Divide => "divide",
            };
            commands::laurent(name, &require(input)?)?
        }
        Command::CharseqVerify { input, depth, rank, aut, ring } => {
            let doc = load(input)?;
            let r = ring_of(doc.as_ref(), ring.as_deref())?;
            commands::charseq(&r, doc.as_ref(), &CharseqFlags { depth: *depth, rank: *rank, aut: aut.clone() })?
        }
        Command::Nested { op, input, l, horizon, trials, seed, max_len, strict, model, ring } => {
            let doc = load(input)?;
            let r = ring_of(doc.as_ref(), ring.as_deref())?;
            let name = match op {
                NestedOp::Certify => "certify",
                NestedOp::Lift => "lift",
                NestedOp::LimitEq => "limit-eq",
            };
            let flags = NestedFlags {
                l: *l,
                horizon: *horizon,
                trials: *trials,
                seed: *seed,
                max_len: *max_len,
                strict: *strict,
            };
            commands::nested(name, &r, doc.as_ref(), model.as_deref(), &flags, exec)?
        }
        Command::IdemSplit(i) => commands::idem(&require(i)?)?,
        Command::Divides(i) => commands::divides_cmd(&require(i)?)?,
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // usage errors are input errors; help and version are not errors
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(report) => {
            let v = report.to_json();
            let text = if cli.compact { serde_json::to_string(&v) } else { serde_json::to_string_pretty(&v) };
            // a closed pipe on stdout is not an error of the command
            let _ = writeln!(std::io::stdout().lock(), "{}", text.expect("reports serialize"));
            ExitCode::from(report.verdict.exit_code() as u8)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("addcat: input error: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Unsupported(msg)) => {
            eprintln!("addcat: unsupported: {msg}");
            ExitCode::from(4)
        }
    }
}
