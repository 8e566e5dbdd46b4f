use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rbfkan::experiment::{exit_code, run, table, Experiment, ExperimentConfig};
use rbfkan::layers::Architecture;
use rbfkan::{Error, Result};

#[derive(Parser)]
#[command(name = "rbfkan", version, about = "Train and compare RBF Kolmogorov-Arnold networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train and evaluate one model on one experiment.
    Run {
        /// nonsmooth2d, multiscale1d, ntk, heat, helmholtz, deeponet or mnist.
        #[arg(long)]
        experiment: String,
        /// mlp, kan, rbf-kan or free-rbf-kan.
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        grid: Option<usize>,
        /// gaussian or matern52.
        #[arg(long)]
        kernel: Option<String>,
        #[arg(long)]
        lr: Option<f64>,
        /// Multiplier on the initial basis-weight spread of KAN layers.
        #[arg(long)]
        init_scale: Option<f64>,
        /// L-BFGS iterations per batch.
        #[arg(long)]
        inner_iters: Option<usize>,
        /// Directory with the MNIST IDX files.
        #[arg(long)]
        data_dir: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Desk-scale variant.
        #[arg(long)]
        fast: bool,
    },
    /// Aggregate finished runs into a markdown table and a CSV file.
    Table {
        #[arg(required = true)]
        runs: Vec<PathBuf>,
        /// Where to write the CSV form.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            experiment,
            model,
            seed,
            epochs,
            grid,
            kernel,
            lr,
            init_scale,
            inner_iters,
            data_dir,
            out,
            fast,
        } => {
            let experiment: Experiment = experiment.parse()?;
            let model: Architecture = model.parse().map_err(Error::Config)?;
            let mut config = ExperimentConfig::preset(experiment, model, fast);
            config.seed = seed;
            config.out_dir = out;
            config.data_dir = data_dir;
            if let Some(e) = epochs {
                config.epochs = e;
            }
            if let Some(g) = grid {
                config.grid_size = g;
            }
            if let Some(k) = kernel {
                config.kernel = k.parse().map_err(Error::Config)?;
            }
            if let Some(l) = lr {
                config.lr = l;
            }
            if let Some(s) = init_scale {
                config.init_scale = s;
            }
            if let Some(k) = inner_iters {
                config.inner_iters = k;
            }
            let out = run(&config)?;
            let r = &out.result;
            println!(
                "{} {} {}: {} = {:.4e}, params = {}, train time = {:.1}s -> {}",
                r.experiment,
                r.model,
                r.layers,
                r.error_metric,
                r.error,
                r.n_params,
                out.timing.train_seconds,
                out.dir.display()
            );
        }
        Command::Table { runs, csv } => {
            let t = table(&runs)?;
            for (dir, why) in &t.skipped {
                eprintln!("warning: skipping {}: {why}", dir.display());
            }
            print!("{}", t.markdown());
            if let Some(path) = csv {
                std::fs::write(path, t.csv())?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
