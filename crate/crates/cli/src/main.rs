use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use flybs_cli::commands::{
    cmd_compare, cmd_design, cmd_gradcheck, cmd_run, CompareArgs, DesignArgs, GradcheckArgs,
    RunArgs,
};
use flybs_cli::config::MethodName;

/// Multi-UAV uplink max-min rate simulator.
#[derive(Parser)]
#[command(name = "flybs", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodFlag {
    /// Closed-loop quadcopter dynamics tracking the rate gradient.
    Controlled,
    /// Idealized kinematic gradient ascent baseline.
    Gradient,
}

impl From<MethodFlag> for MethodName {
    fn from(m: MethodFlag) -> Self {
        match m {
            MethodFlag::Controlled => MethodName::Controlled,
            MethodFlag::Gradient => MethodName::Gradient,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario and write trajectory.csv plus summary.txt.
    Run {
        /// Scenario TOML file.
        config: PathBuf,
        /// Override the config's steering method.
        #[arg(long, value_enum)]
        method: Option<MethodFlag>,
        /// Override the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (default: config [output].dir, then "out").
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write trajectory.svg and rate.svg.
        #[arg(long)]
        plot: bool,
    },
    /// Run both methods over several seeds and write compare.csv.
    Compare {
        /// Scenario TOML file.
        config: PathBuf,
        /// Number of seeds, starting at the config's seed.
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        /// Output directory (default: config [output].dir, then "out").
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare analytic rate gradients against central finite differences.
    Gradcheck {
        /// Scenario TOML file providing the channel and fleet envelope.
        config: PathBuf,
        /// Number of random geometries to draw.
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Finite-difference step in meters.
        #[arg(long, default_value_t = 1e-4)]
        delta: f64,
        /// Check the config's literal positions instead of random draws.
        #[arg(long)]
        keep_positions: bool,
    },
    /// Design controller gains by LQR and print them with the closed-loop
    /// eigenvalues.
    Design {
        /// State weights qv,qo,qod for velocity, tilt, and tilt rate.
        #[arg(long, default_value = "1,0,0")]
        weights: String,
        /// Control effort weight, > 0.
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        /// Print the stock gain set instead of solving.
        #[arg(long)]
        default_gains: bool,
    },
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, method, seed, out, plot } => cmd_run(&RunArgs {
            config,
            method: method.map(MethodName::from),
            seed,
            out,
            plot,
        }),
        Command::Compare { config, seeds, out } => {
            cmd_compare(&CompareArgs { config, seeds, out })
        }
        Command::Gradcheck { config, samples, delta, keep_positions } => {
            cmd_gradcheck(&GradcheckArgs { config, samples, delta, keep_positions })
        }
        Command::Design { weights, r, default_gains } => {
            cmd_design(&DesignArgs { weights, r, default_gains })
        }
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
