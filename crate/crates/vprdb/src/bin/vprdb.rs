use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use vprdb::core::graph::Selector;
use vprdb::core::synthetic::SceneKind;
use vprdb::{PipelineConfig, PipelineError};

#[derive(Parser)]
#[command(name = "vprdb", version, about = "Build and evaluate place-recognition databases from RGBD scans")]
struct Cli {
    /// Configuration file; command-line flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Select a database from a scanning sequence.
    Build {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        threshold: Option<f64>,
        /// Also write the pairwise overlap table.
        #[arg(long)]
        dump_overlap: bool,
    },
    /// Select databases for several thresholds from one overlap table.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        thresholds: Option<Vec<f64>>,
    },
    /// Recall@k of a database against query frames.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        database: Option<PathBuf>,
        #[arg(long)]
        db_descriptors: Option<PathBuf>,
        #[arg(long)]
        query_descriptors: Option<PathBuf>,
        /// Query sequence in the scan's world frame.
        #[arg(long)]
        query_input: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        query_ids: Option<Vec<u32>>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        gt_threshold: Option<f64>,
    },
    /// Write a synthetic scene in the sequence layout.
    Synth {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        kind: Option<SceneKind>,
        #[arg(long)]
        frames: Option<usize>,
        /// Meters between camera positions.
        #[arg(long)]
        step: Option<f64>,
        /// View width in voxels.
        #[arg(long)]
        view_extent: Option<u32>,
        #[arg(long)]
        voxel_size: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    voxel_size: Option<f64>,
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long)]
    max_depth: Option<f64>,
    #[arg(long)]
    selector: Option<Selector>,
    #[arg(long)]
    exact_limit: Option<usize>,
    #[arg(long)]
    max_dt: Option<f64>,
    /// Fill pixels without depth from the voxel map.
    #[arg(long)]
    reproject_depth: bool,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl Common {
    fn apply(self, c: &mut PipelineConfig) {
        if self.input.is_some() {
            c.input = self.input;
        }
        set(&mut c.out, self.out);
        set(&mut c.voxel_size, self.voxel_size);
        set(&mut c.stride, self.stride);
        set(&mut c.max_depth, self.max_depth);
        set(&mut c.selector, self.selector);
        set(&mut c.exact_vertex_limit, self.exact_limit);
        set(&mut c.max_dt, self.max_dt);
        c.reproject_depth |= self.reproject_depth;
    }
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    let mut config = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    match cli.command {
        Command::Build { common, threshold, dump_overlap } => {
            common.apply(&mut config);
            set(&mut config.threshold, threshold);
            config.dump_overlap |= dump_overlap;
            let outcome = vprdb::run_build(&config)?;
            println!(
                "database size {} | {} | {:.0}%",
                outcome.stats.db_size,
                outcome.stats.reduction_label(),
                outcome.stats.spatial_coverage
            );
        }
        Command::Sweep { common, thresholds } => {
            common.apply(&mut config);
            set(&mut config.thresholds, thresholds);
            for row in vprdb::run_sweep(&config)? {
                println!(
                    "threshold {}: database size {} | {} | {:.0}%",
                    row.threshold,
                    row.stats.db_size,
                    row.stats.reduction_label(),
                    row.stats.spatial_coverage
                );
            }
        }
        Command::Eval {
            common,
            threshold,
            database,
            db_descriptors,
            query_descriptors,
            query_input,
            query_ids,
            k,
            gt_threshold,
        } => {
            common.apply(&mut config);
            set(&mut config.threshold, threshold);
            for (slot, value) in [
                (&mut config.database, database),
                (&mut config.db_descriptors, db_descriptors),
                (&mut config.query_descriptors, query_descriptors),
                (&mut config.query_input, query_input),
            ] {
                if value.is_some() {
                    *slot = value;
                }
            }
            if query_ids.is_some() {
                config.query_ids = query_ids;
            }
            set(&mut config.k, k);
            set(&mut config.gt_threshold, gt_threshold);
            let outcome = vprdb::run_eval(&config)?;
            match outcome.report.recall {
                Some(r) => println!("recall@{} {r:.4}", outcome.report.k),
                None => println!("recall@{} undefined (no query has ground truth)", outcome.report.k),
            }
        }
        Command::Synth { out, kind, frames, step, view_extent, voxel_size, seed } => {
            set(&mut config.out, out);
            set(&mut config.synthetic.kind, kind);
            set(&mut config.synthetic.frames, frames);
            set(&mut config.synthetic.step, step);
            set(&mut config.synthetic.view_extent, view_extent);
            set(&mut config.voxel_size, voxel_size);
            set(&mut config.seed, seed);
            vprdb::run_synth(&config)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
