use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use cvbm::array::{half_power_beamwidth, worst_case_crossover_gain, worst_case_pointing_error, Axis};
use cvbm::harness::config::load_config;
use cvbm::harness::experiment::run_grid_experiment;
use cvbm::harness::output::{emit_heatmap_csv, emit_summary, SummaryFormat};
use cvbm::harness::pipeline::{run_detection_pipeline, write_estimates};
use cvbm::protocol::write_session_traces;
use cvbm::ExperimentConfig;

#[derive(Parser)]
#[command(name = "cvbm", version, about = "Codebook vs. vision-aided beam management simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the grid experiment and write the heatmap and summaries into `--out`.
    Simulate {
        /// TOML config; omitted keys take their defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory, created if missing.
        #[arg(long, required_unless_present = "print_defaults")]
        out: Option<PathBuf>,
        /// Print the default config as TOML and exit.
        #[arg(long)]
        print_defaults: bool,
        /// Evaluate grid cells on all cores. Output is identical either way.
        #[arg(long)]
        parallel: bool,
        /// Also write per-session records to traces.jsonl.
        #[arg(long)]
        traces: bool,
    },
    /// Localize mobile detections from a JSON-lines file.
    Pipeline {
        /// One detection per line.
        #[arg(long)]
        detections: PathBuf,
        /// Only the camera section is used.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write per-record estimates as JSON lines.
        #[arg(long)]
        estimates: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Codebook utilities.
    Codebook {
        #[command(subcommand)]
        action: CodebookAction,
    },
}

#[derive(Subcommand)]
enum CodebookAction {
    /// Print codebook size and lattice quality figures.
    Inspect {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Polar steps of the pointing-error scan (azimuth gets four times as many).
        #[arg(long, default_value_t = 60)]
        scan_steps: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

fn config_from(path: Option<&Path>) -> Result<ExperimentConfig> {
    let cfg = match path {
        Some(p) => load_config(p)?,
        None => ExperimentConfig::default(),
    };
    for line in cfg.to_toml_string().lines().filter(|l| !l.is_empty()) {
        log::info!("config: {line}");
    }
    Ok(cfg)
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn simulate(config: Option<&Path>, out: &Path, parallel: bool, traces: bool) -> Result<()> {
    let cfg = config_from(config)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let started = std::time::Instant::now();
    let result = run_grid_experiment(&cfg, parallel)?;
    log::info!("{} cells in {:.2?}", result.cells.len(), started.elapsed());
    emit_heatmap_csv(&result.cells, &out.join("heatmap.csv"))?;
    let text = emit_summary(&result.summary, SummaryFormat::Text);
    write(&out.join("summary.txt"), &text)?;
    write(&out.join("summary.json"), emit_summary(&result.summary, SummaryFormat::Json))?;
    if traces {
        let mut buf = Vec::new();
        write_session_traces(&mut buf, &result.traces)?;
        write(&out.join("traces.jsonl"), buf)?;
    }
    print!("{text}");
    Ok(())
}

fn pipeline(detections: &Path, config: Option<&Path>, estimates: Option<&Path>, format: Format) -> Result<()> {
    let cfg = config_from(config)?;
    let report = run_detection_pipeline(detections, &cfg)?;
    if let Some(path) = estimates {
        let mut buf = Vec::new();
        write_estimates(&mut buf, &report.estimates)?;
        write(path, buf)?;
    }
    match format {
        Format::Json => {
            let v = serde_json::json!({
                "localized": report.estimates.len(),
                "person_records": report.person_records,
                "warnings": report.warning_count(),
                "stats": report.stats,
            });
            println!("{}", serde_json::to_string_pretty(&v)?);
        }
        Format::Text => {
            println!("localized = {}", report.estimates.len());
            println!("person_records = {}", report.person_records);
            println!("warnings = {}", report.warning_count());
            match report.stats {
                Some(s) => {
                    println!("with_ground_truth = {}", s.count);
                    println!("mean_distance_error_cm = {}", s.mean_distance_cm);
                    println!("mean_angle_error_deg = {}", s.mean_angle_deg);
                }
                None => println!("# no ground truth in input, error statistics skipped"),
            }
        }
    }
    Ok(())
}

fn inspect(config: Option<&Path>, scan_steps: usize) -> Result<()> {
    let cfg = config_from(config)?;
    let cb = cfg.array.codebook()?;
    let geom = cb.geometry();
    let (step_h, step_v) = cb.lattice_step();
    let (dims_h, dims_v) = cb.lattice_dims();
    println!("array = {}x{} (h x v), spacing {} wavelengths", geom.n_h, geom.n_v, geom.spacing_wavelengths);
    println!("codewords = {} ({dims_h} x {dims_v} lattice)", cb.len());
    println!("visible_codewords = {}", cb.visible_indices().count());
    println!("lattice_step_u = {step_h} (h), {step_v} (v)");
    println!("worst_case_crossover_db = {}", 10.0 * worst_case_crossover_gain(&cb).log10());
    for (name, axis) in [("h", Axis::Horizontal), ("v", Axis::Vertical)] {
        match half_power_beamwidth(geom, axis) {
            Ok(bw) => println!("hpbw_{name}_deg = {bw}"),
            Err(e) => println!("# hpbw_{name}: {e}"),
        }
    }
    let worst = worst_case_pointing_error(&cb, 60f64.to_radians(), scan_steps)?;
    println!(
        "worst_pointing_error_deg = {worst}  # theta <= 60 deg, {scan_steps} x {} grid, a lower bound",
        4 * scan_steps
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { print_defaults: true, .. } => {
            print!("{}", ExperimentConfig::default().to_toml_string());
            Ok(())
        }
        Command::Simulate { config, out, parallel, traces, .. } => {
            simulate(config.as_deref(), &out.expect("clap enforces --out"), parallel, traces)
        }
        Command::Pipeline { detections, config, estimates, format } => {
            pipeline(&detections, config.as_deref(), estimates.as_deref(), format)
        }
        Command::Codebook { action: CodebookAction::Inspect { config, scan_steps } } => {
            inspect(config.as_deref(), scan_steps)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
