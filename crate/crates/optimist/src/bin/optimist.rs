use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};

use optimist::config::{
    parse_grid, parse_target, ArmsBlock, DesignBlock, RunConfig, Settings, BIAS_NAMES,
};
use optimist::harness::{self, new_run_dir};
use optimist::plan::ExperimentPlan;
use optimist::report::{to_json, CiReport, Manifest, TestReport};
use optimist::trajectory_csv::{load_trajectory, save_trajectory, write_trajectory};
use optimist::{Error, Result};
use optimist_core::{
    confidence_interval, design_catalog, run_true_experiment, test_point_null, CiOptions, NullSpec,
    SeedSpec,
};

const EXIT_ACCEPTANCE: u8 = 4;

/// Post-hoc inference for adaptive experiments by resimulation with optimistic
/// nuisance estimates.
#[derive(Parser)]
#[command(name = "optimist", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a design against known arm distributions and write the trajectory CSV.
    Simulate(RunArgs),
    /// Test a point null on a recorded trajectory.
    Test {
        /// Trajectory CSV with header `t,arm,outcome`.
        trajectory: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Confidence interval by inverting the test over a grid of nulls.
    Ci {
        /// Trajectory CSV with header `t,arm,outcome`.
        trajectory: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run an experiment plan and write metrics under `<out>/<plan>/<timestamp>/`.
    Experiment {
        plan: PathBuf,
        /// Override the plan's replication count.
        #[arg(long)]
        reps: Option<usize>,
        /// Override the plan's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; defaults to all cores.
        #[arg(long, env = "OPTIMIST_WORKERS")]
        workers: Option<usize>,
        /// Results root.
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// List the design catalog.
    Designs,
}

#[derive(Args, Default)]
struct RunArgs {
    /// TOML config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Design that generated (or will generate) the data.
    #[arg(long)]
    design: Option<String>,
    /// Design parameter `key=value`; repeatable.
    #[arg(long = "design-param", value_name = "KEY=VALUE")]
    design_params: Vec<String>,
    /// Number of arms, when no arm model is given.
    #[arg(short = 'K', long = "arms-count")]
    arms_count: Option<usize>,
    /// True arms, e.g. `bernoulli:0.5,0.5` or `gaussian:0,0/1,1`.
    #[arg(long)]
    arms: Option<String>,
    /// Horizon.
    #[arg(long = "T", value_name = "T")]
    horizon: Option<usize>,
    /// `arm:N` or `diff:A,B`.
    #[arg(long)]
    target: Option<String>,
    /// Null value of the target.
    #[arg(long, allow_hyphen_values = true)]
    theta0: Option<f64>,
    /// Test level; the interval has coverage 1 - alpha.
    #[arg(long)]
    alpha: Option<f64>,
    /// Simulations per null.
    #[arg(short = 'B', long = "B")]
    replicates: Option<usize>,
    /// `lo:hi:count` or `v1,v2,...`.
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    /// Optimism applied to nuisance means; see the list below.
    #[arg(long)]
    bias: Option<String>,
    /// `common` or `disjoint` random streams across nulls.
    #[arg(long)]
    seed_mode: Option<String>,
    /// Master seed; sampled and printed when omitted.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to all cores.
    #[arg(long, env = "OPTIMIST_WORKERS")]
    workers: Option<usize>,
    /// Output file; a `.manifest.json` is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig> {
        let file = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let mut design = file.design.clone();
        if let Some(name) = &self.design {
            design = Some(DesignBlock::named(name));
        }
        if !self.design_params.is_empty() || self.arms_count.is_some() {
            let d = design
                .as_mut()
                .ok_or_else(|| Error::config("`design`: parameters given without a design"))?;
            for kv in &self.design_params {
                let (k, v) = kv.split_once('=').ok_or_else(|| {
                    Error::config(format!("`design-param`: expected KEY=VALUE, got `{kv}`"))
                })?;
                d.params.insert(
                    k.trim().to_string(),
                    toml::Value::String(v.trim().to_string()),
                );
            }
            if self.arms_count.is_some() {
                d.arms = self.arms_count;
            }
        }
        let mut target = self.target.as_deref().map(parse_target).transpose()?;
        if let Some(t0) = self.theta0 {
            target.get_or_insert_with(Default::default).theta0 = Some(t0);
        }
        let flags = RunConfig {
            horizon: self.horizon,
            alpha: self.alpha,
            replicates: self.replicates,
            bias: self.bias.clone(),
            seed_mode: self.seed_mode.clone(),
            seed: self.seed,
            workers: self.workers,
            out: self.out.clone(),
            design,
            arms: self.arms.as_deref().map(ArmsBlock::parse).transpose()?,
            target,
            grid: self.grid.as_deref().map(parse_grid).transpose()?,
        };
        Ok(file.overlay(flags))
    }

    fn settings(&self) -> Result<Settings> {
        let s = self.config()?.resolve()?;
        if s.seed_sampled {
            eprintln!("seed: {}", s.seed);
        }
        Ok(s)
    }
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Prints `text` and, with `--out`, writes it there together with a manifest.
fn emit(s: &Settings, command: &str, text: &str) -> Result<()> {
    print!("{text}");
    if let Some(out) = &s.out {
        write_file(out, text)?;
        let echo = s.echo();
        write_file(
            &manifest_path(out),
            &to_json(&Manifest::new(command, s.seed, &echo)),
        )?;
    }
    Ok(())
}

fn with_workers<T>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T>
where
    T: Send,
{
    match workers {
        Some(0) => Err(Error::config("`workers`: must be at least 1")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::config(format!("`workers`: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

fn cmd_simulate(args: &RunArgs) -> Result<()> {
    let s = args.settings()?;
    let model = s
        .model
        .as_ref()
        .ok_or_else(|| Error::config("`arms`: simulate needs the true arm distributions"))?;
    let horizon = s
        .horizon
        .ok_or_else(|| Error::config("`T`: simulate needs a horizon"))?;
    let h = run_true_experiment(&s.design, model, horizon, SeedSpec::new(s.seed, 0))?;
    match &s.out {
        Some(out) => {
            save_trajectory(out, &h)?;
            let echo = s.echo();
            write_file(
                &manifest_path(out),
                &to_json(&Manifest::new("simulate", s.seed, &echo)),
            )
        }
        None => {
            let stdout = std::io::stdout().lock();
            write_trajectory(&h, stdout).map_err(|e| Error::io("<stdout>", e.into()))
        }
    }
}

fn cmd_test(path: &Path, args: &RunArgs) -> Result<()> {
    let s = args.settings()?;
    let theta0 = s
        .theta0
        .ok_or_else(|| Error::config("`target.theta0`: the null value is required"))?;
    let h = load_trajectory(path, s.design.arms())?;
    let null = NullSpec::new(s.target, theta0);
    let out = with_workers(s.workers, || {
        test_point_null(
            &h,
            &s.design,
            &null,
            s.alpha,
            s.replicates,
            s.bias,
            SeedSpec::new(s.seed, 0),
        )
    })??;
    emit(&s, "test", &to_json(&TestReport::from(&out)))
}

fn cmd_ci(path: &Path, args: &RunArgs) -> Result<()> {
    let s = args.settings()?;
    let h = load_trajectory(path, s.design.arms())?;
    let opts = CiOptions {
        alpha: s.alpha,
        replicates: s.replicates,
        bias: s.bias,
        seed_mode: s.seed_mode,
    };
    let grid = s.grid_values();
    let res = with_workers(s.workers, || {
        confidence_interval(
            &h,
            &s.design,
            s.target,
            &grid,
            &opts,
            SeedSpec::new(s.seed, 0),
        )
    })??;
    emit(&s, "ci", &to_json(&CiReport::from(&res)))
}

fn cmd_experiment(
    path: &Path,
    reps: Option<usize>,
    seed: Option<u64>,
    workers: Option<usize>,
    out: &Path,
) -> Result<bool> {
    let mut plan = ExperimentPlan::load(path)?;
    if let Some(r) = reps {
        plan.reps = r;
    }
    if let Some(s) = seed {
        plan.seed = s;
    }
    plan.validate()?;
    let report = with_workers(workers, || harness::run_plan(&plan))??;
    let dir = new_run_dir(out, &plan)?;
    harness::write_metrics(&dir.join("metrics.csv"), &plan, &report)?;
    harness::write_quantiles(&dir.join("quantiles.csv"), &plan, &report)?;
    let checks = report.check(&plan);
    let manifest = serde_json::json!({
        "plan": plan,
        "plan_hash": plan.hash(),
        "seed": plan.seed,
        "version": env!("CARGO_PKG_VERSION"),
        "workers": workers,
        "checks": checks,
    });
    write_file(&dir.join("manifest.json"), &to_json(&manifest))?;
    println!("{}", dir.display());
    let mut all = true;
    for c in &checks {
        println!(
            "{} {}: {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.label,
            c.detail
        );
        all &= c.pass;
    }
    Ok(all)
}

fn cmd_designs() {
    let mut out = std::io::stdout().lock();
    for e in design_catalog() {
        let _ = writeln!(out, "{:<18} {}", e.name, e.summary);
        let _ = writeln!(out, "{:<18} {}", "", e.kind);
    }
}

fn catalog_help() -> String {
    let mut s = String::from("Designs:\n");
    for e in design_catalog() {
        s.push_str(&format!("  {:<18} {}\n", e.name, e.summary));
    }
    s.push_str("\nBias kinds:\n");
    let about = [
        "ln ln N / sqrt N (default)",
        "ln N / sqrt N",
        "constant 1",
        "no bias; contrast only, does not control type I error",
    ];
    for (name, what) in BIAS_NAMES.iter().zip(about) {
        s.push_str(&format!("  {name:<18} {what}\n"));
    }
    s.push_str("\nExit codes: 0 ok, 2 config error, 3 data error, 4 acceptance failure.");
    s
}

fn main() -> ExitCode {
    let help = catalog_help();
    let cmd = Cli::command()
        .after_help(help.clone())
        .mut_subcommands(|sc| sc.after_help(help.clone()));
    let cli = match Cli::from_arg_matches(&cmd.get_matches()) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let result = match &cli.command {
        Command::Simulate(run) => cmd_simulate(run).map(|_| true),
        Command::Test { trajectory, run } => cmd_test(trajectory, run).map(|_| true),
        Command::Ci { trajectory, run } => cmd_ci(trajectory, run).map(|_| true),
        Command::Experiment {
            plan,
            reps,
            seed,
            workers,
            out,
        } => cmd_experiment(plan, *reps, *seed, *workers, out),
        Command::Designs => {
            cmd_designs();
            Ok(true)
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: acceptance checks failed");
            ExitCode::from(EXIT_ACCEPTANCE)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
