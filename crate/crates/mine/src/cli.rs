//! Command-line front end: configuration, app selection, run orchestration,
//! summary reporting.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::apps::{cliques_app, fsm_app, motifs_app};
use crate::embedding::ExplorationMode;
use crate::engine::{render_summary, run, Application, EngineConfig, RunReport, Storage};
use crate::graph::{InputGraph, LabelDict};

#[derive(Debug, Parser)]
#[command(
    name = "mine",
    about = "Systematic subgraph mining: frequent subgraphs, motifs, cliques",
    version
)]
pub struct CliArgs {
    #[command(subcommand)]
    pub app: AppCommand,
}

#[derive(Debug, Subcommand)]
pub enum AppCommand {
    /// Frequent subgraph mining with minimum image-based support
    /// (edge-based exploration).
    Fsm {
        #[command(flatten)]
        common: CommonOpts,
        /// Support threshold θ (>= 1).
        #[arg(long)]
        support: usize,
        /// Optional cap on embedding size (edges).
        #[arg(long)]
        max_size: Option<usize>,
    },
    /// Motif counting up to a maximum size (vertex-based exploration).
    Motifs {
        #[command(flatten)]
        common: CommonOpts,
        /// Maximum embedding size (vertices).
        #[arg(long)]
        max_size: usize,
        /// Keep input labels instead of treating the graph as unlabeled.
        #[arg(long)]
        labeled: bool,
    },
    /// Clique finding up to a maximum size (vertex-based exploration).
    Cliques {
        #[command(flatten)]
        common: CommonOpts,
        /// Maximum clique size (vertices).
        #[arg(long)]
        max_size: usize,
    },
}

#[derive(Debug, Args)]
pub struct CommonOpts {
    /// Input graph file.
    #[arg(long)]
    pub input: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads (falls back to MINE_WORKERS, then hardware
    /// parallelism).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Work-partition block size, in embeddings.
    #[arg(long, default_value_t = 1024)]
    pub block_size: u64,
    /// Frontier storage strategy.
    #[arg(long, value_enum, default_value_t = StorageArg::Odag)]
    pub storage: StorageArg,
    /// Override the app's exploration mode.
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Maximum pattern size before aborting.
    #[arg(long, default_value_t = 10)]
    pub max_pattern_size: usize,
    /// Sample embeddings and check callback automorphism invariance.
    #[arg(long)]
    pub debug_checks: bool,
    /// Optional dictionary mapping label names to integers; echoed in the
    /// summary.
    #[arg(long)]
    pub label_dict: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StorageArg {
    Odag,
    List,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Vertex,
    Edge,
}

/// Validated run configuration.
#[derive(Debug)]
pub struct RunConfig {
    pub app: AppKind,
    pub input: PathBuf,
    pub out: PathBuf,
    pub mode_override: Option<ExplorationMode>,
    pub support: Option<usize>,
    pub max_size: Option<usize>,
    pub labeled: bool,
    pub workers: usize,
    pub block_size: u64,
    pub storage: Storage,
    pub max_pattern_size: usize,
    pub debug_checks: bool,
    pub label_dict: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AppKind {
    Fsm,
    Motifs,
    Cliques,
}

impl AppKind {
    fn name(self) -> &'static str {
        match self {
            AppKind::Fsm => "fsm",
            AppKind::Motifs => "motifs",
            AppKind::Cliques => "cliques",
        }
    }
}

/// Parses argv into a validated configuration. Errors render as usage
/// errors with a nonzero exit.
pub fn parse_args<I, T>(argv: I) -> Result<RunConfig>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = CliArgs::try_parse_from(argv)?;
    build_config(cli)
}

fn build_config(cli: CliArgs) -> Result<RunConfig> {
    let (kind, common, support, max_size, labeled) = match cli.app {
        AppCommand::Fsm {
            common,
            support,
            max_size,
        } => (AppKind::Fsm, common, Some(support), max_size, true),
        AppCommand::Motifs {
            common,
            max_size,
            labeled,
        } => (AppKind::Motifs, common, None, Some(max_size), labeled),
        AppCommand::Cliques { common, max_size } => {
            (AppKind::Cliques, common, None, Some(max_size), true)
        }
    };
    if let Some(s) = support {
        if s < 1 {
            bail!("--support must be >= 1");
        }
    }
    if let Some(m) = max_size {
        if m < 1 {
            bail!("--max-size must be >= 1");
        }
    }
    let mode_override = common.mode.map(|m| match m {
        ModeArg::Vertex => ExplorationMode::VertexInduced,
        ModeArg::Edge => ExplorationMode::EdgeInduced,
    });
    if kind == AppKind::Cliques && mode_override == Some(ExplorationMode::EdgeInduced) {
        bail!("cliques requires vertex-based exploration: the clique filter is not anti-monotonic under edge growth");
    }
    let workers = match common.workers {
        Some(w) => w,
        None => match std::env::var("MINE_WORKERS") {
            Ok(v) => v
                .parse()
                .with_context(|| format!("MINE_WORKERS must be an integer, got `{v}`"))?,
            Err(_) => std::thread::available_parallelism().map_or(1, |n| n.get()),
        },
    };
    if workers < 1 {
        bail!("--workers must be >= 1");
    }
    if common.block_size < 1 {
        bail!("--block-size must be >= 1");
    }
    Ok(RunConfig {
        app: kind,
        input: common.input,
        out: common.out,
        mode_override,
        support,
        max_size,
        labeled,
        workers,
        block_size: common.block_size,
        storage: match common.storage {
            StorageArg::Odag => Storage::Odag,
            StorageArg::List => Storage::List,
        },
        max_pattern_size: common.max_pattern_size,
        debug_checks: common.debug_checks,
        label_dict: common.label_dict,
    })
}

/// Loads the graph, runs the configured app, writes outputs and
/// `summary.txt`.
pub fn execute(config: &RunConfig) -> Result<()> {
    let mut graph = InputGraph::load(&config.input)
        .with_context(|| format!("failed to load graph from {}", config.input.display()))?;
    if config.app == AppKind::Motifs && !config.labeled {
        graph = graph.strip_labels();
    }
    let dict = match &config.label_dict {
        Some(path) => Some(
            LabelDict::load(path)
                .with_context(|| format!("failed to load label dictionary from {}", path.display()))?,
        ),
        None => None,
    };

    let engine_config = EngineConfig {
        workers: config.workers,
        block_size: config.block_size,
        storage: config.storage,
        max_pattern_size: config.max_pattern_size,
        debug_checks: config.debug_checks,
        verify_roundtrip: false,
        collect_embeddings: false,
        collect_map_calls: false,
        out_dir: Some(config.out.clone()),
    };

    let summary = match config.app {
        AppKind::Fsm => {
            let mut app = fsm_app(config.support.expect("validated"), config.max_size);
            if let Some(mode) = config.mode_override {
                app = app.with_mode(mode);
            }
            run_and_summarize(&graph, &app, &engine_config, config, dict.as_ref())?
        }
        AppKind::Motifs => {
            let mut app = motifs_app(config.max_size.expect("validated"));
            if let Some(mode) = config.mode_override {
                app = app.with_mode(mode);
            }
            run_and_summarize(&graph, &app, &engine_config, config, dict.as_ref())?
        }
        AppKind::Cliques => {
            let app = cliques_app(config.max_size.expect("validated"));
            run_and_summarize(&graph, &app, &engine_config, config, dict.as_ref())?
        }
    };
    println!("{summary}");
    Ok(())
}

fn run_and_summarize<A: Application>(
    graph: &InputGraph,
    app: &A,
    engine_config: &EngineConfig,
    config: &RunConfig,
    dict: Option<&LabelDict>,
) -> Result<String> {
    let report: RunReport<A> = run(graph, app, engine_config)?;
    let mut header = format!(
        "app={} input={} vertices={} edges={} workers={} block_size={} storage={}\n",
        config.app.name(),
        config.input.display(),
        graph.num_vertices(),
        graph.num_edges(),
        config.workers,
        config.block_size,
        match config.storage {
            Storage::Odag => "odag",
            Storage::List => "list",
        },
    );
    if let Some(s) = config.support {
        header.push_str(&format!("support={s}\n"));
    }
    if let Some(m) = config.max_size {
        header.push_str(&format!("max_size={m}\n"));
    }
    if let Some(d) = dict {
        header.push_str(&format!("label_dict_entries={}\n", d.len()));
    }
    let summary = render_summary(&report, &header);
    std::fs::write(config.out.join("summary.txt"), &summary)
        .with_context(|| format!("failed to write summary under {}", config.out.display()))?;
    Ok(summary)
}

/// Binary entry point.
pub fn main() -> ExitCode {
    let config = match parse_args(std::env::args_os()) {
        Ok(c) => c,
        Err(err) => {
            // clap usage/help errors carry their own formatting and exit
            // semantics.
            if let Some(clap_err) = err.downcast_ref::<clap::Error>() {
                let _ = clap_err.print();
                return if clap_err.use_stderr() {
                    ExitCode::from(2)
                } else {
                    ExitCode::SUCCESS
                };
            }
            eprintln!("error: {err:#}");
            return ExitCode::from(2);
        }
    };
    match execute(&config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
