use chiral_decoherence_cli::config::{Mode, PipelineChoice, ScenarioConfig};
use chiral_decoherence_cli::plot::{gnuplot_script, SCRIPT_FILE};
use chiral_decoherence_cli::run::OUT_ENV;
use chiral_decoherence_cli::{config_hash, execute, parse_config, resolve, CliError, Overrides};
use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "chiral-decoherence", version, about = "Photon-induced decoherence of a two-state chiral molecule")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario file (TOML, schema_version = 1)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory; overrides $CHIRAL_DECOHERENCE_OUT and run.output_dir
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Random seed; overrides run.seed
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// B coefficient pipeline(s); overrides run.pipeline
    #[arg(long, global = true, value_enum)]
    pipeline: Option<PipelineArg>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the mode named by run.mode in the config
    Run,
    /// Elastic decoherence rate and B table at bath.temperature
    Rate,
    /// Rates over a temperature grid with a log-log fit
    Sweep,
    /// Density-matrix trajectory
    Evolve,
    /// Oracle comparisons; uses the built-in toy scenario without --config
    Verify,
    /// Write a gnuplot script for the CSV files of a mode
    PlotScript {
        /// Mode whose outputs to plot; defaults to run.mode
        #[arg(long = "for", value_enum)]
        for_mode: Option<ModeArg>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PipelineArg {
    Paper,
    Quadrature,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Rate,
    Sweep,
    Evolve,
    Verify,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Rate => Mode::Rate,
            ModeArg::Sweep => Mode::Sweep,
            ModeArg::Evolve => Mode::Evolve,
            ModeArg::Verify => Mode::Verify,
        }
    }
}

fn load(cli: &Cli, fallback: Option<Mode>) -> Result<(ScenarioConfig, String), CliError> {
    match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
            let cfg = parse_config(&text)?;
            Ok((cfg, config_hash(&text)))
        }
        None => match fallback {
            Some(mode) => {
                let cfg = ScenarioConfig::toy(mode);
                let canonical = serde_json::to_string(&cfg).expect("config serializes");
                Ok((cfg, config_hash(&canonical)))
            }
            None => Err(CliError::Validation("--config is required for this command".into())),
        },
    }
}

fn real_main(cli: Cli) -> Result<ExitCode, CliError> {
    let env_out = std::env::var(OUT_ENV).ok();
    let pipeline = cli.pipeline.map(|p| match p {
        PipelineArg::Paper => PipelineChoice::Paper,
        PipelineArg::Quadrature => PipelineChoice::Quadrature,
        PipelineArg::Both => PipelineChoice::Both,
    });
    let mode = match &cli.command {
        Command::Run => None,
        Command::Rate => Some(Mode::Rate),
        Command::Sweep => Some(Mode::Sweep),
        Command::Evolve => Some(Mode::Evolve),
        Command::Verify => Some(Mode::Verify),
        Command::PlotScript { for_mode } => {
            let (cfg, _) = load(&cli, None).or_else(|e| match for_mode {
                Some(m) => Ok((ScenarioConfig::toy((*m).into()), String::new())),
                None => Err(e),
            })?;
            let mode = for_mode
                .map(Mode::from)
                .or(cfg.run.mode)
                .ok_or_else(|| CliError::Validation("no mode: pass --for or set run.mode".into()))?;
            let ov = Overrides {
                mode: Some(mode),
                out_dir: cli.out.clone(),
                seed: cli.seed,
                pipeline,
            };
            let settings = resolve(&cfg, &ov, env_out.as_deref())?;
            std::fs::create_dir_all(&settings.out_dir)
                .map_err(|e| CliError::io(format!("creating {}", settings.out_dir.display()), e))?;
            let path = settings.out_dir.join(SCRIPT_FILE);
            std::fs::write(&path, gnuplot_script(mode, &settings.pipeline.pipelines()))
                .map_err(|e| CliError::io(format!("writing {}", path.display()), e))?;
            println!("{}", path.display());
            return Ok(ExitCode::SUCCESS);
        }
    };
    let (cfg, hash) = load(&cli, mode.filter(|m| *m == Mode::Verify))?;
    let ov = Overrides {
        mode,
        out_dir: cli.out.clone(),
        seed: cli.seed,
        pipeline,
    };
    let settings = resolve(&cfg, &ov, env_out.as_deref())?;
    let start = Instant::now();
    let output = execute(&cfg, &settings, &hash)?;
    output.write(&settings.out_dir)?;
    for line in &output.lines {
        println!("{line}");
    }
    eprintln!(
        "{} finished in {:.3} s; outputs in {}",
        settings.mode.name(),
        start.elapsed().as_secs_f64(),
        settings.out_dir.display()
    );
    let failed = output.failed_checks();
    if failed > 0 {
        let e = CliError::Verification(format!("{failed} check(s) failed"));
        eprintln!("error: {e}");
        return Ok(ExitCode::from(e.exit_code() as u8));
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match real_main(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
