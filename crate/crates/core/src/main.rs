use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use groupwalk::pipeline::{self, RunConfig};
use groupwalk::similarity::SimilarityParams;
use groupwalk::synth::ScenarioSpec;
use groupwalk::tracking::KalmanConfig;
use groupwalk::{io as gwio, TruthRecord};

#[derive(Parser)]
#[command(
    name = "groupwalk",
    version,
    about = "Online group-motion analytics over tracked bounding boxes",
    long_about = "Clusters tracked pedestrians frame by frame by instantaneous \
motion-pattern similarity and flags frames where three or more move together. \
Detections come in as newline-delimited `frame,id,x,y,w,h` records grouped by \
ascending frame; ground truth as `frame,id,group`."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline over a detection stream, emitting one JSON line
    /// per frame (ids, labels, cluster count, event flag, groups).
    Run {
        /// Detection file (`frame,id,x,y,w,h` per line).
        #[arg(long)]
        detections: PathBuf,
        /// Output path; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Score pipeline output against ground truth: mean AMI, the
    /// per-frame AMI series and event precision/recall as JSON.
    Evaluate {
        #[arg(long)]
        detections: PathBuf,
        /// Ground-truth file (`frame,id,group` per line).
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Evaluate every combination of the a/b grids; emits a CSV table
    /// `a,b,mean_ami`.
    Sweep {
        #[arg(long)]
        detections: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        /// Grid of scaling slopes.
        #[arg(long, value_delimiter = ',', default_value = "2,4,6,8,10")]
        a_grid: Vec<f64>,
        /// Grid of scaling offsets.
        #[arg(long, value_delimiter = ',', default_value = "10,100,1000")]
        b_grid: Vec<f64>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Generate a synthetic scenario with ground truth.
    Synth {
        /// Built-in scenario.
        #[arg(long, value_enum, conflicts_with = "spec")]
        preset: Option<Preset>,
        /// JSON scenario description (overrides --preset).
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Sequence length in frames (presets only).
        #[arg(long, default_value_t = 120)]
        frames: i64,
        /// Observation noise standard deviation in pixels (presets only).
        #[arg(long, default_value_t = 1.0)]
        obs_noise: f64,
        /// Scenario seed (presets only).
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Where to write the detection stream.
        #[arg(long)]
        detections: PathBuf,
        /// Where to write the ground-truth stream.
        #[arg(long)]
        truth: PathBuf,
    },
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Preset {
    /// Groups of sizes 3, 2 and 1 with distinct velocities.
    ThreeGroups,
    /// A group of six that splits into fragments of 1, 2 and 3.
    P5Split,
}

#[derive(Args)]
struct ConfigArgs {
    /// Similarity scaling slope.
    #[arg(long, default_value_t = 8.0)]
    a: f64,
    /// Similarity scaling offset.
    #[arg(long, default_value_t = 10.0)]
    b: f64,
    /// Eigengap threshold coefficient.
    #[arg(long, default_value_t = 0.8)]
    eigengap_coeff: f64,
    /// Measurement noise variance.
    #[arg(long, default_value_t = 10.0)]
    meas_noise: f64,
    /// Process noise variance on position/size components.
    #[arg(long, default_value_t = 10.0)]
    proc_noise_pos: f64,
    /// Process noise variance on flow components.
    #[arg(long, default_value_t = 2.0)]
    proc_noise_vel: f64,
    /// Initial covariance of position/size components for new tracks.
    #[arg(long, default_value_t = 100.0)]
    init_cov_pos: f64,
    /// Initial covariance of flow components for new tracks.
    #[arg(long, default_value_t = 25.0)]
    init_cov_vel: f64,
    /// k-means seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Drop tracks unseen for more than this many frames.
    #[arg(long, default_value_t = 10)]
    max_gap: u32,
    /// Frames excluded from scoring while flow estimates converge.
    #[arg(long, default_value_t = 15)]
    burn_in: u32,
}

impl ConfigArgs {
    fn to_config(&self) -> RunConfig {
        RunConfig {
            params: SimilarityParams { a: self.a, b: self.b },
            kalman: KalmanConfig {
                meas_noise: self.meas_noise,
                proc_noise_pos: self.proc_noise_pos,
                proc_noise_vel: self.proc_noise_vel,
                init_cov_pos: self.init_cov_pos,
                init_cov_vel: self.init_cov_vel,
            },
            eigengap_coeff: self.eigengap_coeff,
            kmeans_seed: self.seed,
            max_gap: self.max_gap,
            burn_in: self.burn_in,
        }
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn read_detections(path: &Path) -> Result<Vec<groupwalk::Detection>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    gwio::read_detections(BufReader::new(file))
        .with_context(|| format!("reading {}", path.display()))
}

fn read_truth(path: &Path) -> Result<Vec<TruthRecord>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    gwio::read_truth(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = execute(cli) {
        let broken_pipe = err.chain().any(|cause| {
            cause
                .downcast_ref::<std::io::Error>()
                .is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
        });
        if broken_pipe {
            return;
        }
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { detections, output, config } => {
            let dets = read_detections(&detections)?;
            let mut writer = open_output(output.as_deref())?;
            pipeline::run(&dets, &config.to_config(), &mut writer)?;
            writer.flush()?;
        }
        Command::Evaluate { detections, truth, output, config } => {
            let dets = read_detections(&detections)?;
            let truth = read_truth(&truth)?;
            let report = pipeline::evaluate(&dets, &truth, &config.to_config())?;
            let mut writer = open_output(output.as_deref())?;
            serde_json::to_writer_pretty(&mut writer, &report)?;
            writeln!(writer)?;
            writer.flush()?;
        }
        Command::Sweep { detections, truth, a_grid, b_grid, output, config } => {
            if a_grid.is_empty() || b_grid.is_empty() {
                bail!("sweep grids must not be empty");
            }
            let dets = read_detections(&detections)?;
            let truth = read_truth(&truth)?;
            let cells = pipeline::sweep(&dets, &truth, &a_grid, &b_grid, &config.to_config())?;
            let mut writer = open_output(output.as_deref())?;
            writeln!(writer, "a,b,mean_ami")?;
            for cell in cells {
                writeln!(writer, "{},{},{}", cell.a, cell.b, cell.mean_ami)?;
            }
            writer.flush()?;
        }
        Command::Synth { preset, spec, frames, obs_noise, seed, detections, truth } => {
            let scenario = match (spec, preset) {
                (Some(path), _) => {
                    let file = File::open(&path)
                        .with_context(|| format!("cannot open {}", path.display()))?;
                    serde_json::from_reader::<_, ScenarioSpec>(BufReader::new(file))
                        .with_context(|| format!("parsing {}", path.display()))?
                }
                (None, Some(Preset::ThreeGroups)) => {
                    ScenarioSpec::three_groups(frames, obs_noise, seed)
                }
                (None, Some(Preset::P5Split)) => {
                    ScenarioSpec::p5_split(frames, frames / 2, obs_noise, seed)
                }
                (None, None) => bail!("synth needs --preset or --spec"),
            };
            let sequence = groupwalk::generate(&scenario)?;
            let mut det_writer = open_output(Some(&detections))?;
            gwio::write_detections(&mut det_writer, &sequence.detections)?;
            det_writer.flush()?;
            let mut truth_writer = open_output(Some(&truth))?;
            gwio::write_truth(&mut truth_writer, &sequence.truth)?;
            truth_writer.flush()?;
        }
    }
    Ok(())
}
