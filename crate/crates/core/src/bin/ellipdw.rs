use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ellipdw::cli::{parse_config, run_bench, run_compare, run_identities, Mode, OutputFormat, RunConfig};
use ellipdw::report::Route;
use ellipdw::Error;

#[derive(Parser)]
#[command(
    name = "ellipdw",
    version,
    about = "Domain-wall partition function of the eight-vertex model with a reflecting end"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_parser = ["json", "csv"])]
    output: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the partition function by several routes and compare them.
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long = "route")]
        routes: Vec<String>,
    },
    /// Run the named identity suite.
    Identities {
        #[command(flatten)]
        common: Common,
    },
    /// Time routes over a sweep of sizes.
    Bench {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', required = true)]
        n_sweep: Vec<usize>,
    },
}

fn load(common: &Common, mode: Mode) -> Result<RunConfig, Error> {
    let text = std::fs::read_to_string(&common.config)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", common.config.display())))?;
    let mut cfg = parse_config(&text)?;
    cfg.mode = mode;
    if let Some(o) = &common.output {
        cfg.output = o.parse()?;
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(t) = common.tol {
        cfg.tol = t;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<bool, Error> {
    let (text, pass) = match cli.command {
        Command::Compare { common, routes } => {
            let mut cfg = load(&common, Mode::Compare)?;
            if !routes.is_empty() {
                cfg.routes = routes.iter().map(|r| r.parse::<Route>()).collect::<Result<_, _>>()?;
            }
            let r = run_compare(&cfg)?;
            let text = match cfg.output {
                OutputFormat::Json => r.to_json(),
                OutputFormat::Csv => r.to_csv(),
            };
            (text, r.pass)
        }
        Command::Identities { common } => {
            let cfg = load(&common, Mode::Identities)?;
            let r = run_identities(&cfg)?;
            let text = match cfg.output {
                OutputFormat::Json => r.to_json(),
                OutputFormat::Csv => r.to_csv(),
            };
            (text, r.pass)
        }
        Command::Bench { common, n_sweep } => {
            let mut cfg = load(&common, Mode::Bench)?;
            cfg.n_sweep = n_sweep;
            let r = run_bench(&cfg)?;
            let text = match cfg.output {
                OutputFormat::Json => r.to_json(),
                OutputFormat::Csv => r.to_csv(),
            };
            (text, r.pass)
        }
    };
    println!("{}", text.trim_end());
    Ok(pass)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
