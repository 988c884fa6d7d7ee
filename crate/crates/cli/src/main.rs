//! Command-line front end for the opercal library.
//!
//! Three subcommand families mirror the library layers: `aut` for jet
//! group arithmetic over ℚ, `cocycle` for coordinate-change jets on a
//! chart, and `oper` for connections, canonical forms, the Schwarzian,
//! and transition-cocycle checks. Output is deterministic text; errors
//! exit with code 2 (malformed input) or 3 (domain error) and a
//! machine-parsable `error[kind]:` prefix on standard error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num::BigRational;

use opercal::curve::{cocycle_consistency, taylor_cocycle_universal};
use opercal::io::{self, IoError};
use opercal::jetgroup::{AutJet, TruncSeries};
use opercal::oper::{
    canonicalize, change_coords, is_oper, schwarzian, torsor_cocycle_check,
    CanonicalizeOptions, Orientation,
};
use opercal::ring::QRing;

#[derive(Parser)]
#[command(name = "opercal", version, about = "exact jet-group and oper calculator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Jet group arithmetic over the rationals.
    Aut {
        #[command(subcommand)]
        command: AutCommand,
    },
    /// Taylor coordinate-change cocycles on a chart.
    Cocycle(CocycleArgs),
    /// Connections, canonical forms, and cocycle comparisons.
    Oper {
        #[command(subcommand)]
        command: OperCommand,
    },
}

#[derive(Subcommand)]
enum AutCommand {
    /// Group product: apply the first jet, then the second.
    Mul {
        a: String,
        b: String,
        #[arg(long)]
        order: Option<usize>,
    },
    /// Compositional inverse.
    Inv {
        jet: String,
        #[arg(long)]
        order: Option<usize>,
    },
    /// Truncate to a lower jet group.
    Project {
        jet: String,
        #[arg(long)]
        to: usize,
        #[arg(long)]
        order: Option<usize>,
    },
    /// Split into scaling and unipotent factors (scaling acts first).
    Decompose {
        jet: String,
        #[arg(long)]
        order: Option<usize>,
    },
}

#[derive(Args)]
struct CocycleArgs {
    /// Chart description file.
    #[arg(long)]
    chart: PathBuf,
    /// Coordinate expanded by the cocycle.
    #[arg(short = 's', long = "new")]
    s: String,
    /// Coordinate the expansion is taken against.
    #[arg(short = 't', long = "old")]
    t: String,
    #[arg(long)]
    order: usize,
    /// Evaluate the coefficients at a rational point of the chart.
    #[arg(long)]
    at: Option<String>,
    /// Instead of printing the cocycle, verify the triple consistency
    /// identity against this third coordinate.
    #[arg(long)]
    consistency_with: Option<String>,
}

#[derive(Subcommand)]
enum OperCommand {
    /// Test the oper condition, naming any failing component.
    IsOper {
        #[arg(long)]
        conn: PathBuf,
    },
    /// Gauge an oper into canonical form.
    Canonicalize {
        #[arg(long)]
        conn: PathBuf,
        /// Also print the gauge element.
        #[arg(long)]
        with_gauge: bool,
        /// Retry over the quadratic chart cover on a torus obstruction.
        #[arg(long)]
        allow_quadratic_extension: bool,
        /// Write the canonical oper as JSON to this path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rewrite canonical coefficients in another coordinate.
    ChangeCoords {
        #[arg(long)]
        canon: PathBuf,
        #[arg(long)]
        to: String,
        #[arg(long)]
        with_gauge: bool,
    },
    /// The Schwarzian derivative {t, s}.
    Schwarzian {
        #[arg(long)]
        chart: PathBuf,
        #[arg(short = 't', long = "old")]
        t: String,
        #[arg(short = 's', long = "new")]
        s: String,
    },
    /// Compare the jet-side and group-side transition cocycles of a
    /// coordinate pair.
    CocycleCheck {
        #[arg(long)]
        chart: PathBuf,
        #[arg(long)]
        lie: String,
        #[arg(long)]
        ti: String,
        #[arg(long)]
        tj: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = if e.is_parse() { "parse" } else { "domain" };
            eprintln!("error[{kind}]: {e}");
            ExitCode::from(if e.is_parse() { 2 } else { 3 })
        }
    }
}

fn run(cli: Cli) -> Result<(), IoError> {
    match cli.command {
        Command::Aut { command } => run_aut(command),
        Command::Cocycle(args) => run_cocycle(args),
        Command::Oper { command } => run_oper(command),
    }
}

/// Series arguments are inline literals, or files when prefixed with
/// `@`. Inline literals need `--order`.
fn load_series(arg: &str, order: Option<usize>) -> Result<TruncSeries<QRing>, IoError> {
    if let Some(path) = arg.strip_prefix('@') {
        let text = std::fs::read_to_string(path).map_err(|source| IoError::File {
            path: path.to_string(),
            source,
        })?;
        let series = io::series_from_file_str(&text)?;
        match order {
            Some(n) => Ok(series.truncate(n)?),
            None => Ok(series),
        }
    } else {
        let n = order.ok_or_else(|| {
            IoError::Literal("inline series literals require --order".to_string())
        })?;
        io::parse_series_literal(arg, n)
    }
}

fn load_jet(arg: &str, order: Option<usize>) -> Result<AutJet<QRing>, IoError> {
    Ok(AutJet::new(load_series(arg, order)?)?)
}

fn run_aut(cmd: AutCommand) -> Result<(), IoError> {
    match cmd {
        AutCommand::Mul { a, b, order } => {
            let x = load_jet(&a, order)?;
            let y = load_jet(&b, order)?;
            println!("{}", x.mul(&y)?.display("z"));
        }
        AutCommand::Inv { jet, order } => {
            let x = load_jet(&jet, order)?;
            println!("{}", x.inverse().display("z"));
        }
        AutCommand::Project { jet, to, order } => {
            let x = load_jet(&jet, order)?;
            println!("{}", x.project(to)?.display("z"));
        }
        AutCommand::Decompose { jet, order } => {
            let x = load_jet(&jet, order)?;
            let (gm, uni) = x.decompose();
            println!("scaling = {}", io::format_rational(&gm.0));
            println!("unipotent = {}", uni.jet().display("z"));
        }
    }
    Ok(())
}

fn run_cocycle(args: CocycleArgs) -> Result<(), IoError> {
    let chart = io::load_chart(&args.chart)?;
    if let Some(u) = &args.consistency_with {
        let ok = cocycle_consistency(&chart, u, &args.s, &args.t, args.order)?;
        println!("consistency: {}", if ok { "PASS" } else { "FAIL" });
        return Ok(());
    }
    match &args.at {
        None => {
            let jet = taylor_cocycle_universal(&chart, &args.s, &args.t, args.order)?;
            println!("{}", jet.display("z"));
        }
        Some(point) => {
            let x: BigRational = io::parse_rational(point)?;
            let jet =
                opercal::curve::taylor_cocycle_at_point(&chart, &args.s, &args.t, &x, args.order)?;
            println!("{}", jet.display("z"));
        }
    }
    Ok(())
}

fn print_canonical(oper: &opercal::oper::CanonicalOper) {
    for (i, (c, d)) in oper
        .coeffs()
        .iter()
        .zip(oper.lie().vcan_degrees())
        .enumerate()
    {
        println!("omega_{} (degree {}) = {}", i + 1, d, c.display());
    }
}

fn run_oper(cmd: OperCommand) -> Result<(), IoError> {
    match cmd {
        OperCommand::IsOper { conn } => {
            let connection = io::load_connection(&conn)?;
            let check = is_oper(&connection);
            println!("oper: {}", check.is_oper);
            for failure in &check.failures {
                println!("  - {failure}");
            }
        }
        OperCommand::Canonicalize { conn, with_gauge, allow_quadratic_extension, out } => {
            let connection = io::load_connection(&conn)?;
            let opts = CanonicalizeOptions { allow_quadratic_extension };
            let (canon, gauge) = canonicalize(&connection, &opts)?;
            print_canonical(&canon);
            if with_gauge {
                println!("gauge = {}", io::display_matrix(gauge.matrix()));
            }
            if let Some(path) = out {
                let file = io::canonical_to_file(&canon);
                let text =
                    serde_json::to_string_pretty(&file).expect("canonical files serialize");
                std::fs::write(&path, text + "\n").map_err(|source| IoError::File {
                    path: path.display().to_string(),
                    source,
                })?;
            }
        }
        OperCommand::ChangeCoords { canon, to, with_gauge } => {
            let oper = io::load_canonical(&canon)?;
            let (out, gauge) = change_coords(&oper, &to)?;
            print_canonical(&out);
            if with_gauge {
                println!("gauge = {}", io::display_matrix(gauge.matrix()));
            }
        }
        OperCommand::Schwarzian { chart, t, s } => {
            let chart = io::load_chart(&chart)?;
            let result = schwarzian(&chart, &t, &s)?;
            println!("{}", result.display());
        }
        OperCommand::CocycleCheck { chart, lie, ti, tj } => {
            let chart = io::load_chart(&chart)?;
            let base = Path::new(".");
            let lie = io::resolve_lie(&io::LieSpec::Name(lie), base)?;
            let report = torsor_cocycle_check(&chart, &lie, &ti, &tj)?;
            println!("cocycle check: {}", if report.holds { "PASS" } else { "FAIL" });
            match report.orientation {
                Some(Orientation::Direct) => println!("orientation: direct"),
                Some(Orientation::Inverse) => println!("orientation: inverse"),
                None => println!("orientation: none"),
            }
            println!(
                "inverse of connecting gauge: {}",
                report.inverse_of_connecting_gauge
            );
        }
    }
    Ok(())
}
