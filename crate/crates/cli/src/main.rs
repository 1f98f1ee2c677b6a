//! `puiseux`: Newton polygons, Puiseux expansions and height bounds from the
//! command line.  JSON goes to stdout, logs to stderr.
//!
//! Exit codes: 0 success (and every checked inequality holds), 1 computation
//! error or failed inequality, 2 usage or input error.

mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use puiseux::{Complex1024, Complex128, Complex256, Complex512, Exponent, Quadratic, Rational};

use commands::{run, Outcome, Output};
use config::{parse_exponent, parse_positive_exponent, usage, Backend, CliError, OpKind, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "puiseux", version, about = "Newton-Puiseux polygons and height bounds for differential and q-difference equations")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Operator: derivative (diff) or q-dilation (q).
    #[arg(long, value_enum, default_value = "diff", global = true)]
    pub op: OpKind,
    /// q for --op q, e.g. 2, 1/2 or (3 + i/4).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub q: Option<String>,
    /// N:VALUE fixes VALUE as the N-th root of q.
    #[arg(long = "q-root", global = true, allow_hyphen_values = true)]
    pub q_root: Option<String>,
    /// auto (exact, with square roots), rational, quadratic:d or numeric.
    #[arg(long, default_value = "auto", global = true)]
    pub backend: Backend,
    /// Bits of the numeric backend: 128, 256, 512 or 1024.
    #[arg(long, default_value_t = 256, global = true)]
    pub precision: u32,
    /// No logs on stderr.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Args, Debug, Clone)]
pub struct Input {
    /// File holding the equation A + B*y1.
    #[arg(long)]
    pub eq: Option<PathBuf>,
    /// The equation itself.
    #[arg(long, allow_hyphen_values = true)]
    pub text: Option<String>,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Parse an equation and print its cloud.
    Parse {
        #[command(flatten)]
        input: Input,
    },
    /// Newton polygon, sides and elements.
    Polygon {
        #[command(flatten)]
        input: Input,
        /// Co-slopes whose elements are printed.
        #[arg(long, value_delimiter = ',', value_parser = parse_positive_exponent)]
        mu: Vec<Exponent>,
        /// A series s for H(P, s).
        #[arg(long, allow_hyphen_values = true)]
        series: Option<String>,
    },
    /// Puiseux solution jets up to an order.
    Expand {
        #[command(flatten)]
        input: Input,
        /// Largest exponent kept, e.g. 3 or 7/2.
        #[arg(long, value_parser = parse_exponent)]
        order: Exponent,
        #[arg(long = "max-ram", default_value_t = 24)]
        max_ram: u32,
        /// param or sample:N.
        #[arg(long, default_value = "param")]
        dicritical: String,
        #[arg(long = "max-jets", default_value_t = 1024)]
        max_jets: usize,
    },
    /// Step records of a solution, one JSON object per line.
    Trace {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        solution: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        series: Option<String>,
        /// Number of steps, if more than the solution's length.
        #[arg(long)]
        steps: Option<i64>,
    },
    /// Bound report for fixtures (files or directories) or one equation.
    Verify {
        #[arg(long)]
        fixture: Vec<PathBuf>,
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        solution: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        series: Option<String>,
        /// Also require the equality conditions of the sharp case.
        #[arg(long)]
        strictness: bool,
        /// Longest chain tried by the unreasonableness search.
        #[arg(long = "search-length", default_value_t = puiseux::bounds::DEFAULT_SEARCH_LENGTH)]
        search_length: usize,
        /// Treat q as transcendental.
        #[arg(long)]
        transcendental: bool,
    },
    /// Seeded corpus of equations with planted solutions, as JSON fixtures.
    CorpusGen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest genus.
        #[arg(long, default_value_t = 3)]
        genus: usize,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long = "max-ram", default_value_t = 12)]
        max_ram: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cloud and polygon as svg, ascii or json.
    Render {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value = "svg")]
        format: String,
        /// Supporting lines to draw, by co-slope.
        #[arg(long, value_delimiter = ',', value_parser = parse_positive_exponent)]
        lines: Vec<Exponent>,
        #[arg(long)]
        title: Option<String>,
        /// Draw P_1, P_2, ... along this solution instead of P.
        #[arg(long)]
        solution: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        series: Option<String>,
    },
}

pub fn log(g: &Global, msg: &str) {
    if !g.quiet {
        eprintln!("puiseux: {msg}");
    }
}

fn run_config(cli: &Cli) -> RunConfig {
    let g = &cli.global;
    let (name, inputs, format, seed) = match &cli.command {
        Command::Parse { input } => ("parse", input.eq.iter().cloned().collect(), None, None),
        Command::Polygon { input, .. } => ("polygon", input.eq.iter().cloned().collect(), None, None),
        Command::Expand { input, .. } => ("expand", input.eq.iter().cloned().collect(), None, None),
        Command::Trace { input, solution, .. } => {
            ("trace", input.eq.iter().chain(solution).cloned().collect(), None, None)
        }
        Command::Verify { fixture, input, solution, .. } => {
            ("verify", fixture.iter().chain(&input.eq).chain(solution).cloned().collect(), None, None)
        }
        Command::CorpusGen { seed, .. } => ("corpus-gen", Vec::new(), None, Some(*seed)),
        Command::Render { input, format, solution, .. } => {
            ("render", input.eq.iter().chain(solution).cloned().collect(), Some(format.clone()), None)
        }
    };
    RunConfig {
        command: name.into(),
        inputs,
        op: g.op,
        q: g.q.clone(),
        q_root: g.q_root.clone(),
        backend: g.backend,
        precision: g.precision,
        format,
        seed,
    }
}

fn dispatch(cli: &Cli) -> Result<Outcome, CliError> {
    let (g, c) = (&cli.global, &cli.command);
    match g.backend {
        Backend::Rational => run::<Rational>(g, c),
        Backend::Auto | Backend::Quadratic { .. } => run::<Quadratic>(g, c),
        Backend::Numeric => match g.precision {
            128 => run::<Complex128>(g, c),
            256 => run::<Complex256>(g, c),
            512 => run::<Complex512>(g, c),
            1024 => run::<Complex1024>(g, c),
            p => Err(usage(format!("--precision {p}: use 128, 256, 512 or 1024"))),
        },
    }
}

fn emit(output: Output) -> std::io::Result<()> {
    let mut out = std::io::stdout().lock();
    match output {
        Output::Json(v) => writeln!(out, "{}", serde_json::to_string_pretty(&v)?)?,
        Output::Lines(vs) => {
            for v in vs {
                writeln!(out, "{}", serde_json::to_string(&v)?)?;
            }
        }
        Output::Text(t) => {
            out.write_all(t.as_bytes())?;
            if !t.ends_with('\n') {
                writeln!(out)?;
            }
        }
    }
    out.flush()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if !cli.global.quiet {
        if let Ok(cfg) = serde_json::to_string(&run_config(&cli)) {
            log(&cli.global, &format!("config {cfg}"));
        }
    }
    match dispatch(&cli) {
        Ok(outcome) => {
            if let Err(e) = emit(outcome.output) {
                eprintln!("puiseux: {e}");
                return ExitCode::from(1);
            }
            if outcome.pass {
                ExitCode::SUCCESS
            } else {
                log(&cli.global, "some inequality failed");
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("puiseux: error: {e}");
            ExitCode::from(e.code() as u8)
        }
    }
}
