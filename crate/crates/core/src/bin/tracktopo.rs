use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tracktopo::pipeline::{
    export_plots, run_experiment, write_outputs, ExperimentConfig, FeatureMethod, PipelineError,
    RunManifest, RunOptions, SplitStrategy, MANIFEST_FILE,
};
use tracktopo::synth::{generate_tracks, ScenarioConfig};
use tracktopo::tracks::write_tracks_csv;

/// Topological classification of motion tracks.
///
/// Every flag can also be set through an environment variable with the
/// `TRACKTOPO_` prefix, e.g. `TRACKTOPO_SEED=3`.
#[derive(Parser)]
#[command(name = "tracktopo", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic scene CSV.
    Synth {
        /// Scenario JSON; the built-in five-class scene when omitted.
        #[arg(long, env = "TRACKTOPO_SCENARIO")]
        config: Option<PathBuf>,
        /// Override the scenario seed.
        #[arg(long, env = "TRACKTOPO_SEED")]
        seed: Option<u64>,
        /// Output CSV path.
        #[arg(long, env = "TRACKTOPO_OUT")]
        out: PathBuf,
    },
    /// Run the classification grid and write its artifacts.
    Run(RunArgs),
    /// Write plot-ready example data from a finished run.
    Export {
        /// Run manifest, or the run directory containing it.
        #[arg(long, env = "TRACKTOPO_MANIFEST")]
        manifest: PathBuf,
        #[arg(long, env = "TRACKTOPO_OUT")]
        out: PathBuf,
    },
    /// Validate an experiment config, or print its JSON schema.
    Validate {
        #[arg(long, env = "TRACKTOPO_CONFIG")]
        config: Option<PathBuf>,
        /// Print the JSON schema of the experiment config.
        #[arg(long)]
        schema: bool,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long, env = "TRACKTOPO_CONFIG")]
    config: Option<PathBuf>,
    /// Scene CSV; replaces any scenario in the config.
    #[arg(long, env = "TRACKTOPO_TRACKS")]
    tracks: Option<PathBuf>,
    #[arg(long, env = "TRACKTOPO_OUT", default_value = "tracktopo-out")]
    out: PathBuf,
    /// Comma-separated sub-track lengths.
    #[arg(long, env = "TRACKTOPO_LENGTHS", value_delimiter = ',')]
    lengths: Option<Vec<usize>>,
    /// Comma-separated feature methods: statistic, persistence.
    #[arg(long, env = "TRACKTOPO_METHODS", value_delimiter = ',')]
    methods: Option<Vec<FeatureMethod>>,
    #[arg(long, env = "TRACKTOPO_K")]
    k: Option<usize>,
    #[arg(long, env = "TRACKTOPO_SEED")]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, env = "TRACKTOPO_JOBS")]
    jobs: Option<usize>,
    #[arg(long, env = "TRACKTOPO_EMBED_DIM")]
    embed_dim: Option<usize>,
    #[arg(long, env = "TRACKTOPO_EMBED_TAU")]
    embed_tau: Option<usize>,
    /// Estimate the delay and dimension from the training series.
    #[arg(long, env = "TRACKTOPO_AUTO_PARAMS")]
    auto_params: bool,
    /// Split each object's windows into leading train / trailing test blocks.
    #[arg(long, env = "TRACKTOPO_BLOCKED_SPLIT")]
    blocked_split: bool,
}

impl RunArgs {
    fn resolve(self) -> Result<(ExperimentConfig, PathBuf, RunOptions), PipelineError> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(t) = self.tracks {
            cfg.tracks = Some(t);
            cfg.scenario = None;
        }
        if let Some(l) = self.lengths {
            cfg.lengths = l;
        }
        if let Some(m) = self.methods {
            cfg.methods = m;
        }
        if let Some(k) = self.k {
            cfg.k = k;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(d) = self.embed_dim {
            cfg.embedding.dim = d;
        }
        if let Some(t) = self.embed_tau {
            cfg.embedding.tau = t;
        }
        if self.auto_params {
            cfg.embedding.auto = true;
        }
        if self.blocked_split {
            cfg.split.strategy = SplitStrategy::Blocked { gap: None };
        }
        if self.jobs == Some(0) {
            return Err(PipelineError::Config("--jobs must be >= 1".into()));
        }
        cfg.validate()?;
        Ok((cfg, self.out, RunOptions { jobs: self.jobs }))
    }
}

fn synth(config: Option<PathBuf>, seed: Option<u64>, out: PathBuf) -> Result<(), PipelineError> {
    let mut scenario = match config {
        Some(path) => {
            let text = std::fs::read_to_string(&path).map_err(|e| {
                PipelineError::Config(format!("cannot read scenario {}: {e}", path.display()))
            })?;
            ScenarioConfig::from_json(&text)?
        }
        None => ScenarioConfig::default(),
    };
    if let Some(s) = seed {
        scenario.seed = s;
    }
    let tracks = generate_tracks(&scenario)?;
    let file = std::fs::File::create(&out).map_err(|e| PipelineError::io(&out, e))?;
    write_tracks_csv(&tracks, std::io::BufWriter::new(file)).map_err(|e| PipelineError::io(&out, e))?;
    eprintln!("wrote {} tracks to {}", tracks.len(), out.display());
    Ok(())
}

fn run(args: RunArgs) -> Result<(), PipelineError> {
    let (cfg, out, options) = args.resolve()?;
    let output = run_experiment(&cfg, &options)?;
    write_outputs(&output, &out)?;
    println!("length  method       confuser-row      target-row        counts");
    for cell in &output.manifest.results {
        let row = |r: Option<[f64; 2]>| r.map_or("undefined".to_owned(), |r| format!("{:.2} {:.2}", r[0], r[1]));
        let cm = &cell.confusion;
        println!(
            "{:>6}  {:<11}  {:<16}  {:<16}  {:?}",
            cell.track_length,
            cell.feature_method.as_str(),
            row(cm.row_normalized[0]),
            row(cm.row_normalized[1]),
            cm.counts
        );
    }
    eprintln!("wrote results to {}", out.display());
    Ok(())
}

fn export(manifest: PathBuf, out: PathBuf) -> Result<(), PipelineError> {
    let path = if manifest.is_dir() {
        manifest.join(MANIFEST_FILE)
    } else {
        manifest
    };
    let m = RunManifest::load(&path)?;
    let files = export_plots(&m, &out)?;
    eprintln!("wrote {} files to {}", files.len(), out.display());
    Ok(())
}

fn validate(config: Option<PathBuf>, schema: bool) -> Result<(), PipelineError> {
    if schema || config.is_none() {
        println!("{}", ExperimentConfig::schema_json());
    }
    if let Some(path) = config {
        let cfg = ExperimentConfig::load(&path)?;
        eprintln!("{}: ok", path.display());
        println!(
            "{}",
            serde_json::to_string_pretty(&cfg).expect("config serializes")
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth { config, seed, out } => synth(config, seed, out),
        Command::Run(args) => run(args),
        Command::Export { manifest, out } => export(manifest, out),
        Command::Validate { config, schema } => validate(config, schema),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
