//! Command-line entry point for simulation, evaluation and live play.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use pacmodel::bots::{run_bots, BotPolicy};
use pacmodel::config::Config;
use pacmodel::corpus::bundled_spec;
use pacmodel::engine::Engine;
use pacmodel::eval::{
    evaluate, leave_one_out, parameter_sweep, pearson, EvalOptions, Model1Predictor, Model2Predictor, Predictor,
    RandomBaseline,
};
use pacmodel::log::GameLog;
use pacmodel::maze::{branching_rate, Maze};
use pacmodel_live::{Clock, ServerOptions};

#[derive(Parser)]
#[command(name = "pacmodel", version, about = "Pac-Man simulation and player move prediction")]
struct Cli {
    /// Configuration file (TOML); built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play bot games and write their logs.
    Simulate(SimulateArgs),
    /// Score a predictor against logged games.
    Eval(EvalArgs),
    /// Evaluate a predictor over the depth x lambda grid.
    Sweep(SweepArgs),
    /// Leave-one-out ablation of the behavlet model.
    Loo(LogArgs),
    /// Correlate per-game accuracy with per-game ms/state from an eval report.
    Correlate(CorrelateArgs),
    /// Host live games over websockets.
    Serve(ServeArgs),
    /// Parse a maze file and print its adjacency census.
    ValidateMaze(ValidateArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Bot policy.
    #[arg(long, value_parser = parse_policy, required_unless_present = "corpus")]
    policy: Option<BotPolicy>,
    #[arg(long, default_value_t = 10)]
    games: usize,
    /// Corpus seed; defaults to the configured evaluation seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Per-game tick limit; defaults to the configured value.
    #[arg(long)]
    tick_cap: Option<u32>,
    /// Regenerate a bundled corpus (`random100`, `goal`) instead.
    #[arg(long, conflicts_with = "policy")]
    corpus: Option<String>,
}

#[derive(Args)]
struct LogArgs {
    /// Log files or directories of `.jsonl` logs.
    #[arg(long, num_args = 1..)]
    logs: Vec<PathBuf>,
    /// Use a bundled corpus instead of log files.
    #[arg(long)]
    corpus: Option<String>,
    /// Record wall-clock time per prediction.
    #[arg(long)]
    timing: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelChoice {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    Random,
}

impl ModelChoice {
    fn tag(self) -> &'static str {
        match self {
            ModelChoice::One => "model1",
            ModelChoice::Two => "model2",
            ModelChoice::Random => "random",
        }
    }
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long, value_enum)]
    model: ModelChoice,
    #[command(flatten)]
    logs: LogArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum, default_value = "2")]
    model: ModelChoice,
    #[command(flatten)]
    logs: LogArgs,
}

#[derive(Args)]
struct CorrelateArgs {
    /// CSV written by `eval --timing`.
    #[arg(long)]
    report: PathBuf,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value_t = 8765)]
    port: u16,
    /// Tick period in ms; defaults to the configured frame time.
    #[arg(long)]
    frame_ms: Option<u64>,
    /// Advance one tick per input frame instead of on a clock.
    #[arg(long)]
    lockstep: bool,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    file: PathBuf,
}

fn parse_policy(s: &str) -> Result<BotPolicy, String> {
    s.parse()
}

/// Bad invocation: reported like a clap error, exit code 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

struct Ctx {
    config: Config,
    digest: String,
    engine: Engine,
    out: PathBuf,
}

impl Ctx {
    fn load(cli: &Cli) -> Result<Self> {
        let mut config = match &cli.config {
            Some(path) if !path.exists() => return Err(usage(format!("config file {} not found", path.display()))),
            Some(path) => Config::load(path)?,
            None => Config::default(),
        };
        if let Some(out) = &cli.out {
            config.output.dir = out.clone();
        }
        let maze = config.load_maze()?;
        let engine = Engine::new(Arc::new(maze), config.rules.clone())?;
        let digest = config.digest();
        let out = config.output.dir.clone();
        Ok(Self { config, digest, engine, out })
    }

    fn write(&self, name: impl AsRef<Path>, contents: &str) -> Result<PathBuf> {
        let path = self.out.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
        }
        std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    fn opts(&self, args: &LogArgs) -> EvalOptions {
        EvalOptions { timing: args.timing || self.config.eval.timing }
    }

    fn logs(&self, args: &LogArgs) -> Result<Vec<GameLog>> {
        if let Some(name) = &args.corpus {
            if !args.logs.is_empty() {
                return Err(usage("pass either --logs or --corpus, not both"));
            }
            let spec = bundled_spec(name).ok_or_else(|| usage(format!("unknown corpus `{name}`")))?;
            return Ok(spec.generate(&self.engine, &self.digest));
        }
        let mut files = Vec::new();
        for path in &args.logs {
            if path.is_dir() {
                collect_jsonl(path, &mut files)?;
            } else if path.is_file() {
                files.push(path.clone());
            } else {
                return Err(usage(format!("log path {} not found", path.display())));
            }
        }
        if files.is_empty() {
            return Err(usage("no logs given (use --logs FILE|DIR or --corpus NAME)"));
        }
        files
            .iter()
            .map(|f| {
                let text = std::fs::read_to_string(f).with_context(|| format!("reading {}", f.display()))?;
                GameLog::parse(&text).with_context(|| format!("parsing {}", f.display()))
            })
            .collect()
    }
}

fn collect_jsonl(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)?.map(|e| e.map(|e| e.path())).collect::<Result<_, _>>()?;
    entries.sort();
    for p in entries {
        if p.is_dir() {
            collect_jsonl(&p, out)?;
        } else if p.extension().is_some_and(|e| e == "jsonl") {
            out.push(p);
        }
    }
    Ok(())
}

fn predictor(ctx: &Ctx, model: ModelChoice) -> Box<dyn Predictor> {
    match model {
        ModelChoice::One => Box::new(Model1Predictor(ctx.config.model1())),
        ModelChoice::Two => Box::new(Model2Predictor(ctx.config.model2())),
        ModelChoice::Random => Box::new(RandomBaseline { seed: ctx.config.eval.seed }),
    }
}

fn simulate(ctx: &Ctx, args: &SimulateArgs) -> Result<()> {
    let seed = args.seed.unwrap_or(ctx.config.eval.seed);
    let cap = args.tick_cap.unwrap_or(ctx.config.eval.tick_cap);
    let (dir, logs) = match (&args.corpus, args.policy) {
        (Some(name), _) => {
            let spec = bundled_spec(name).ok_or_else(|| usage(format!("unknown corpus `{name}`")))?;
            (format!("logs/{name}"), spec.generate(&ctx.engine, &ctx.digest))
        }
        (None, Some(policy)) => {
            (format!("logs/{policy}-seed{seed}"), run_bots(&ctx.engine, policy, args.games, seed, cap, &ctx.digest))
        }
        (None, None) => return Err(usage("--policy or --corpus is required")),
    };
    for (i, log) in logs.iter().enumerate() {
        ctx.write(format!("{dir}/game-{i:04}.jsonl"), &log.to_jsonl())?;
    }
    let ticks: usize = logs.iter().map(|l| l.records.len()).sum();
    println!("wrote {} games ({ticks} ticks) to {}", logs.len(), ctx.out.join(&dir).display());
    Ok(())
}

fn eval(ctx: &Ctx, args: &EvalArgs) -> Result<()> {
    let logs = ctx.logs(&args.logs)?;
    let report = evaluate(&ctx.engine, &logs, predictor(ctx, args.model).as_ref(), ctx.opts(&args.logs))?;
    let path = ctx.write(format!("eval-{}.csv", args.model.tag()), &report.to_csv(&ctx.digest))?;
    println!("{}", report.summary_line());
    println!("wrote {}", path.display());
    Ok(())
}

fn sweep(ctx: &Ctx, args: &SweepArgs) -> Result<()> {
    let logs = ctx.logs(&args.logs)?;
    let opts = ctx.opts(&args.logs);
    let grid = match args.model {
        ModelChoice::Two => {
            let base = ctx.config.model2();
            parameter_sweep(&ctx.engine, &logs, |p| Model2Predictor(pacmodel::Model2Config { params: p, ..base.clone() }), opts)?
        }
        ModelChoice::One => {
            let base = ctx.config.model1();
            parameter_sweep(&ctx.engine, &logs, |p| Model1Predictor(pacmodel::Model1Config { params: p, ..base }), opts)?
        }
        ModelChoice::Random => return Err(usage("sweep needs --model 1 or 2")),
    };
    let path = ctx.write(format!("sweep-{}.csv", args.model.tag()), &grid.to_csv(&ctx.digest))?;
    if let Some(best) = grid.best() {
        println!("best cell: depth {} lambda {}", best.depth, best.lambda);
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn loo(ctx: &Ctx, args: &LogArgs) -> Result<()> {
    let logs = ctx.logs(args)?;
    let table = leave_one_out(&ctx.engine, &logs, &ctx.config.model2(), ctx.opts(args))?;
    let csv = table.to_csv(&ctx.digest);
    let path = ctx.write("loo.csv", &csv)?;
    print!("{}", csv.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect::<String>());
    println!("wrote {}", path.display());
    Ok(())
}

/// (accuracy, mean ms) per game from an eval CSV.
fn report_pairs(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    let header: Vec<&str> = lines.next().context("empty report")?.split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).with_context(|| format!("report has no `{name}` column"));
    let (acc, ms) = (col("accuracy")?, col("mean_ms")?);
    let mut pairs = Vec::new();
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        let get = |i: usize| fields.get(i).copied().context("short row");
        if get(ms)? == "NA" {
            bail!("report has no timing data; rerun eval with --timing");
        }
        pairs.push((get(acc)?.parse()?, get(ms)?.parse()?));
    }
    Ok(pairs)
}

fn correlate(ctx: &Ctx, args: &CorrelateArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.report)
        .map_err(|e| usage(format!("cannot read report {}: {e}", args.report.display())))?;
    let c = pearson(&report_pairs(&text)?)?;
    let body = format!(
        "# config_digest: {}\n# source: {}\nr,p,n\n{:.6},{:.6},{}\n",
        ctx.digest,
        args.report.display(),
        c.r,
        c.p,
        c.n
    );
    let path = ctx.write("correlate.csv", &body)?;
    println!("accuracy vs ms/state: r = {:.4}, p = {:.4}, n = {}", c.r, c.p, c.n);
    println!("wrote {}", path.display());
    Ok(())
}

fn serve(ctx: Ctx, args: &ServeArgs) -> Result<()> {
    let frame_ms = args.frame_ms.unwrap_or(ctx.config.live.frame_ms);
    let opts = Arc::new(ServerOptions {
        engine: Arc::new(ctx.engine),
        model2: ctx.config.model2(),
        config_digest: ctx.digest,
        clock: if args.lockstep { Clock::Lockstep } else { Clock::Fixed(Duration::from_millis(frame_ms)) },
        budget: Duration::from_millis(frame_ms.max(1)),
        seed: ctx.config.live.seed,
        log_dir: Some(ctx.out.join("live")),
    });
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(("127.0.0.1", args.port)).await?;
        println!("listening on ws://{}", listener.local_addr()?);
        pacmodel_live::serve(listener, opts).await
    })?;
    Ok(())
}

fn validate_maze(args: &ValidateArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.file)
        .map_err(|e| usage(format!("cannot read maze {}: {e}", args.file.display())))?;
    let maze = Maze::parse(&text).with_context(|| format!("invalid maze {}", args.file.display()))?;
    let census = maze.census();
    println!("census: ({}, {}, {})", census.deg2, census.deg3, census.deg4);
    println!("navigable cells: {}", census.total());
    if let Ok(rate) = branching_rate(&census, 1.0) {
        println!("branching rate: {rate:.4}");
    }
    println!("pills: {}, power pills: {}", maze.pill_layout().len(), maze.power_pill_layout().len());
    println!("playable: {}", maze.is_playable());
    println!("checksum: {}", maze.checksum());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if let Command::ValidateMaze(args) = &cli.command {
        return validate_maze(args);
    }
    let ctx = Ctx::load(&cli)?;
    match &cli.command {
        Command::Simulate(a) => simulate(&ctx, a),
        Command::Eval(a) => eval(&ctx, a),
        Command::Sweep(a) => sweep(&ctx, a),
        Command::Loo(a) => loo(&ctx, a),
        Command::Correlate(a) => correlate(&ctx, a),
        Command::Serve(a) => serve(ctx, a),
        Command::ValidateMaze(_) => unreachable!(),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<Usage>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(1)
        }
    }
}

/// The error chain, skipping causes whose text an outer message already includes.
fn describe(e: &anyhow::Error) -> String {
    let mut out = e.to_string();
    for cause in e.chain().skip(1) {
        let text = cause.to_string();
        if !out.contains(&text) {
            out.push_str(": ");
            out.push_str(&text);
        }
    }
    out
}
