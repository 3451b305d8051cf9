use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use letternet::glyphs::render_font;
use letternet::trainer::backprop_gradients;
use letternet_cli::runner::{gradcheck_exit, load_alphabet};
use letternet_cli::{run_experiment1, run_experiment2, CliError, Experiment, RunConfig};

#[derive(Parser)]
#[command(
    name = "letternet",
    version,
    about = "Train and inspect a sigmoid network on a 9x9 alphabet"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Letter-identity network (26 outputs): weight heatmaps and activation tables.
    Exp1(RunArgs),
    /// Feature-set network (10 outputs), clean and noisy training.
    Exp2(RunArgs),
    /// Compare backprop gradients with central finite differences.
    Gradcheck {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        instances: usize,
    },
    /// Print the resolved configuration as key=value lines.
    DumpConfig {
        #[arg(value_enum)]
        experiment: ExperimentArg,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Print the alphabet in the font file format.
    RenderFont {
        #[arg(long)]
        font: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentArg {
    Exp1,
    Exp2,
}

#[derive(Args, Clone)]
struct RunArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0.5)]
    eta: f64,
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
    #[arg(long, default_value_t = 5000)]
    max_epochs: usize,
    #[arg(long, default_value_t = 6)]
    hidden: usize,
    /// Pixel flip probability (exp1: training noise, default 0; exp2: noisy condition, default 0.1).
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Font file; the built-in alphabet when omitted.
    #[arg(long)]
    font: Option<PathBuf>,
    /// Pixels per heatmap cell.
    #[arg(long, default_value_t = 16)]
    cell_size: usize,
    /// Activation threshold for the strongly-activating-letters report.
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
}

impl RunArgs {
    fn resolve(self, experiment: Experiment) -> RunConfig {
        RunConfig {
            seed: self.seed,
            eta: self.eta,
            epsilon: self.epsilon,
            max_epochs: self.max_epochs,
            hidden_count: self.hidden,
            noise_rate: self.noise.unwrap_or(experiment.default_noise()),
            output_dir: self.out,
            font_path: self.font,
            cell_size: self.cell_size,
            threshold: self.threshold,
            ..RunConfig::new(experiment)
        }
    }
}

fn fail(e: CliError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    match cli.command {
        Command::Exp1(args) => {
            let config = args.resolve(Experiment::Exp1);
            match run_experiment1(&config) {
                Ok(m) => {
                    println!(
                        "exp1: {} artifacts, manifest {}",
                        m.entries.len(),
                        m.path.display()
                    );
                    for key in ["epochs_run", "converged", "final_sse", "clean_accuracy"] {
                        println!("  {key}={}", m.note(key).unwrap_or("?"));
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Exp2(args) => {
            let config = args.resolve(Experiment::Exp2);
            match run_experiment2(&config) {
                Ok(m) => {
                    println!(
                        "exp2: {} artifacts, manifest {}",
                        m.entries.len(),
                        m.path.display()
                    );
                    let accuracy = m.path.with_file_name("accuracy.txt");
                    if let Ok(text) = std::fs::read_to_string(accuracy) {
                        print!("{text}");
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Gradcheck { seed, instances } => {
            ExitCode::from(gradcheck_exit(seed, instances, backprop_gradients) as u8)
        }
        Command::DumpConfig { experiment, run } => {
            let experiment = match experiment {
                ExperimentArg::Exp1 => Experiment::Exp1,
                ExperimentArg::Exp2 => Experiment::Exp2,
            };
            let config = run.resolve(experiment);
            if let Err(e) = config.validate() {
                return fail(e);
            }
            print!("{}", config.to_key_values());
            ExitCode::SUCCESS
        }
        Command::RenderFont { font } => {
            let config = RunConfig {
                font_path: font,
                ..RunConfig::new(Experiment::Exp1)
            };
            match load_alphabet(&config) {
                Ok(glyphs) => {
                    print!("{}", render_font(&glyphs));
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
    }
}
