//! `pamfec`: build error-weight databases, simulate, estimate and search
//! concatenated RS + BCH coded PAM4 systems.

mod commands;
mod manifest;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pamfec::{Error, Result, Scheme};

use settings::{parse_ints, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "pamfec", version, about = "Concatenated RS + soft-decision BCH coding over PAM4")]
struct Cli {
    /// TOML configuration file, or a manifest from an earlier run.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Suppress progress output.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimate inner error-weight distributions over an SNR grid.
    BuildDb {
        /// Inner code, `ebch:n,b,t,J`, `bch:n,b,t,J` or `spc:n`; repeatable.
        #[arg(long)]
        inner: Vec<String>,
        #[arg(long = "scheme")]
        schemes: Vec<Scheme>,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Merge databases with disjoint or identical entries.
    MergeDb {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Summarize a database.
    InspectDb {
        path: PathBuf,
        /// List every entry.
        #[arg(long)]
        entries: bool,
    },
    /// Full-chain Monte-Carlo FER/BER.
    Simulate {
        /// System as `M,N,T,m,n,b,t,J,Type` (`-` for b and J of SPC).
        #[arg(long)]
        system: Option<String>,
        /// SNR points in dB.
        #[arg(long, value_delimiter = ',')]
        snr: Vec<f64>,
        #[command(flatten)]
        budget: BudgetArgs,
        /// Database for the semi-analytical column.
        #[arg(long)]
        db: Option<PathBuf>,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Required SNR and gap to the constrained Shannon limit.
    Estimate {
        #[arg(long)]
        system: Option<String>,
        #[command(flatten)]
        db: DbArgs,
        #[arg(long)]
        target_fer: Option<f64>,
        /// JSON report; printed to stdout when omitted.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Pareto search over code parameters.
    Search {
        #[command(flatten)]
        space: SpaceArgs,
        #[command(flatten)]
        db: DbArgs,
        #[arg(long)]
        target_fer: Option<f64>,
        /// Keep points resting on grid entries without observed errors.
        #[arg(long)]
        include_low_confidence: bool,
        /// Complexity ceiling of the best-gap-per-rate summary.
        #[arg(long)]
        summary_max_complexity: Option<f64>,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(Args, Debug, Default)]
struct GridArgs {
    #[arg(long)]
    grid_start: Option<f64>,
    #[arg(long)]
    grid_stop: Option<f64>,
    #[arg(long)]
    grid_step: Option<f64>,
    /// Single-point grid.
    #[arg(long, conflicts_with_all = ["grid_start", "grid_stop"])]
    snr: Option<f64>,
}

#[derive(Args, Debug, Default)]
struct BudgetArgs {
    #[arg(long)]
    min_frames: Option<u64>,
    #[arg(long)]
    min_error_frames: Option<u64>,
    #[arg(long)]
    max_frames: Option<u64>,
    #[arg(long)]
    batch: Option<u64>,
}

#[derive(Args, Debug, Default)]
struct DbArgs {
    /// Distribution database.
    #[arg(long)]
    db: Option<PathBuf>,
    /// Estimate missing entries instead of failing.
    #[arg(long)]
    fill_missing: bool,
    /// Where to store the database after filling.
    #[arg(long, requires = "fill_missing")]
    db_out: Option<PathBuf>,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    budget: BudgetArgs,
}

#[derive(Args, Debug, Default)]
struct SpaceArgs {
    /// Rate bucket centres.
    #[arg(long, value_delimiter = ',')]
    rates: Vec<f64>,
    #[arg(long)]
    rate_tolerance: Option<f64>,
    /// Latency caps in bits.
    #[arg(long)]
    caps: Option<String>,
    /// Outer correction radii, e.g. `1-20`.
    #[arg(long)]
    outer_t: Option<String>,
    /// Outer code lengths to keep.
    #[arg(long)]
    outer_n: Option<String>,
    #[arg(long)]
    inner_b: Option<String>,
    #[arg(long)]
    inner_t: Option<String>,
    #[arg(long)]
    test_bits: Option<String>,
    #[arg(long = "scheme")]
    schemes: Vec<Scheme>,
    #[arg(long)]
    no_spc: bool,
    #[arg(long)]
    no_ebch: bool,
    #[arg(long)]
    spc_max_n: Option<usize>,
}

impl GridArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(s) = self.snr {
            cfg.grid.start_db = s;
            cfg.grid.stop_db = s;
        }
        set(&mut cfg.grid.start_db, self.grid_start);
        set(&mut cfg.grid.stop_db, self.grid_stop);
        set(&mut cfg.grid.step_db, self.grid_step);
    }
}

impl BudgetArgs {
    fn apply_db(&self, cfg: &mut RunConfig) {
        set(&mut cfg.budget.min_frames, self.min_frames);
        set(&mut cfg.budget.min_error_frames, self.min_error_frames);
        set(&mut cfg.budget.max_frames, self.max_frames);
        set(&mut cfg.budget.batch, self.batch);
    }

    fn apply_chain(&self, cfg: &mut RunConfig) {
        set(&mut cfg.chain.min_frames, self.min_frames);
        set(&mut cfg.chain.min_frame_errors, self.min_error_frames);
        set(&mut cfg.chain.max_frames, self.max_frames);
        set(&mut cfg.chain.batch, self.batch);
    }
}

impl DbArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        if self.db.is_some() {
            cfg.database = self.db.clone();
        }
        cfg.fill_missing |= self.fill_missing;
        self.grid.apply(cfg);
        self.budget.apply_db(cfg);
    }
}

impl SpaceArgs {
    fn apply(&self, cfg: &mut RunConfig) -> Result<()> {
        let s = &mut cfg.search;
        if !self.rates.is_empty() {
            s.rates = self.rates.clone();
        }
        set(&mut s.rate_tolerance, self.rate_tolerance);
        if let Some(v) = &self.caps {
            s.latency_caps = parse_ints(v)?;
        }
        if let Some(v) = &self.outer_t {
            s.outer_t = parse_ints(v)?.into_iter().map(|x| x as usize).collect();
        }
        if let Some(v) = &self.outer_n {
            s.outer_n = parse_ints(v)?.into_iter().map(|x| x as usize).collect();
        }
        if let Some(v) = &self.inner_b {
            s.inner_b = parse_ints(v)?.into_iter().map(|x| x as u32).collect();
        }
        if let Some(v) = &self.inner_t {
            s.inner_t = parse_ints(v)?.into_iter().map(|x| x as usize).collect();
        }
        if let Some(v) = &self.test_bits {
            s.test_bits = parse_ints(v)?.into_iter().map(|x| x as usize).collect();
        }
        if !self.schemes.is_empty() {
            s.schemes = self.schemes.clone();
        }
        s.include_spc &= !self.no_spc;
        s.include_ebch &= !self.no_ebch;
        set(&mut s.spc_max_n, self.spc_max_n);
        Ok(())
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn resolve(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    set(&mut cfg.seed, cli.seed);
    set(&mut cfg.threads, cli.threads);
    match &cli.command {
        Command::BuildDb { inner, schemes, grid, budget, .. } => {
            if !inner.is_empty() {
                cfg.inner = inner.clone();
            }
            if !schemes.is_empty() {
                cfg.schemes = schemes.clone();
            }
            grid.apply(&mut cfg);
            budget.apply_db(&mut cfg);
        }
        Command::MergeDb { .. } => {}
        Command::InspectDb { path, .. } => cfg.database = Some(path.clone()),
        Command::Simulate { system, snr, budget, db, .. } => {
            set(&mut cfg.system, system.clone().map(Some));
            if !snr.is_empty() {
                cfg.snr = snr.clone();
            }
            budget.apply_chain(&mut cfg);
            if db.is_some() {
                cfg.database = db.clone();
            }
        }
        Command::Estimate { system, db, target_fer, .. } => {
            set(&mut cfg.system, system.clone().map(Some));
            db.apply(&mut cfg);
            set(&mut cfg.options.target_fer, *target_fer);
        }
        Command::Search { space, db, target_fer, include_low_confidence, summary_max_complexity, .. } => {
            space.apply(&mut cfg)?;
            db.apply(&mut cfg);
            set(&mut cfg.options.target_fer, *target_fer);
            cfg.options.include_low_confidence |= include_low_confidence;
            set(&mut cfg.options.summary_max_complexity, *summary_max_complexity);
        }
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = resolve(cli)?;
    if cfg.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build_global()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    }
    let ui = commands::Ui { quiet: cli.quiet };
    match &cli.command {
        Command::BuildDb { out, .. } => commands::build_db(&cfg, out, ui),
        Command::MergeDb { inputs, out } => commands::merge_db(&cfg, inputs, out, ui),
        Command::InspectDb { path, entries } => commands::inspect_db(path, *entries),
        Command::Simulate { out, .. } => commands::simulate(&cfg, out, ui),
        Command::Estimate { out, db, .. } => commands::estimate(&cfg, db.db_out.as_deref(), out.as_deref(), ui),
        Command::Search { out_dir, db, .. } => commands::search(&cfg, db.db_out.as_deref(), out_dir, ui),
    }
}

/// Exit status for each error category.
fn exit_code(e: &Error) -> u8 {
    match e.category() {
        "invalid-input" => 2,
        "infeasible" => 3,
        "coverage" => 4,
        "out-of-range" => 5,
        "format" => 6,
        "io" => 7,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::from(exit_code(&e))
        }
    }
}
