//! Command-line surface for the `crn` library: coupled-chain simulation,
//! convergence-bound estimation, monotonicity analysis, and artifact
//! emission (CSV, JSON, static SVG).
//!
//! Every run writes a `manifest.json` (command, resolved config, config
//! hash, seed, version) next to its outputs so results can be reproduced
//! byte for byte. Exit codes: 0 success, 1 numeric failure, 2 usage error.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use crn::chains::{by_name, registry, COS_FAMILY_DOMAIN};
use crn::estimators::{algorithm1, classify_monotonicity, common_region, InitSampler};
use crn::gibbs::{run_example, GibbsConfig, GibbsReport};
use crn::ifs::{simulate_backward, simulate_forward, Trajectory};
use crn::rng::{CouplingMode, DistributionSpec, UniformStream};
use crn::{Error, Result};

#[derive(Parser)]
#[command(
    name = "crn",
    version,
    about = "Markov chain convergence bounds from common-random-number coupled simulation"
)]
struct Cli {
    /// Worker threads for parallel replicates (0 = one per core).
    /// Output is byte-identical for any value: aggregation is in fixed
    /// replicate order.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the registered chains.
    Chains,
    /// Simulate a single trajectory of a registered chain.
    Simulate(SimulateArgs),
    /// Run coupled replicates and estimate E|X_n - Y_n|^p per iteration.
    Couple(CoupleArgs),
    /// Partition a parametric family into monotone regions of theta and
    /// report the common region for two fixed states.
    Monotonicity(MonotonicityArgs),
    /// Compute a distance-to-stationarity bound; `--example
    /// gibbs-regression` runs the bundled Bayesian regression pipeline.
    Bound(BoundArgs),
}

#[derive(Args, serde::Serialize)]
struct SimulateArgs {
    /// Registered chain name (see `crn chains`).
    #[arg(long)]
    chain: String,
    /// Number of steps.
    #[arg(long)]
    n: usize,
    /// RNG seed (overridden by the CRN_SEED environment variable).
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Initial state, comma-separated; defaults to the chain's registered
    /// initial value.
    #[arg(long, value_delimiter = ',')]
    x0: Option<Vec<f64>>,
    /// Compose the random maps newest-inside (backward process) instead of
    /// newest-outside (the Markov chain).
    #[arg(long)]
    backward: bool,
    /// Also write an SVG line plot of the first coordinate.
    #[arg(long)]
    svg: bool,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, serde::Serialize)]
struct CoupleArgs {
    /// Registered chain name (see `crn chains`).
    #[arg(long)]
    chain: String,
    /// Horizon N: iterations 0..=N are reported.
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Number of independent coupled replicates I.
    #[arg(long, default_value_t = 1000)]
    replicates: usize,
    /// Distance exponent p >= 1.
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    /// crn, antithetic, or independent.
    #[arg(long, default_value = "crn")]
    coupling: String,
    /// Initial state of the first copy, comma-separated.
    #[arg(long, value_delimiter = ',')]
    x0: Option<Vec<f64>>,
    /// Initial state of the second copy, comma-separated.
    #[arg(long, value_delimiter = ',')]
    y0: Option<Vec<f64>>,
    /// RNG seed (overridden by the CRN_SEED environment variable).
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, serde::Serialize)]
struct MonotonicityArgs {
    /// Family name: cos, product, logistic, or trig.
    #[arg(long)]
    function: String,
    /// First fixed state.
    #[arg(long)]
    x: f64,
    /// Second fixed state.
    #[arg(long)]
    y: f64,
    /// Grid resolution m for the theta domain.
    #[arg(long, default_value_t = 4096)]
    grid: usize,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, serde::Serialize)]
struct BoundArgs {
    /// JSON config file (see the bundled example config schema).
    #[arg(long, conflicts_with = "example")]
    config: Option<PathBuf>,
    /// Named built-in example; currently `gibbs-regression`.
    #[arg(long)]
    example: Option<String>,
    /// Dataset path override for `--example`.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn main() {
    let cli = Cli::parse();
    let workers = cli.workers;
    let run = move || dispatch(cli.command);
    let outcome = if workers > 0 {
        match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
            Ok(pool) => pool.install(run),
            Err(e) => Err(Error::InvalidParameter(format!("cannot build thread pool: {e}"))),
        }
    } else {
        run()
    };
    match outcome {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(exit_code(&e));
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Usage(_) | Error::InvalidParameter(_) | Error::Parse { .. } => 2,
        _ => 1,
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Chains => cmd_chains(),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Couple(args) => cmd_couple(args),
        Command::Monotonicity(args) => cmd_monotonicity(args),
        Command::Bound(args) => cmd_bound(args),
    }
}

/// CRN_SEED environment variable overrides any configured seed.
fn effective_seed(configured: u64) -> Result<u64> {
    match std::env::var("CRN_SEED") {
        Ok(v) => v
            .trim()
            .parse::<u64>()
            .map_err(|_| Error::Usage(format!("CRN_SEED must be a non-negative integer, got '{v}'"))),
        Err(_) => Ok(configured),
    }
}

fn chain_listing() -> String {
    registry()
        .iter()
        .map(|e| format!("  {}", e.chain.name))
        .collect::<Vec<_>>()
        .join("\n")
}

fn lookup_chain(name: &str) -> Result<crn::chains::ChainRegistryEntry> {
    by_name(name).ok_or_else(|| {
        Error::Usage(format!("unknown chain '{name}'; registered chains:\n{}", chain_listing()))
    })
}

fn cmd_chains() -> Result<()> {
    println!("{:<12} {:>4}  {:<9}  {}", "name", "dim", "one-step", "description");
    for entry in registry() {
        println!(
            "{:<12} {:>4}  {:<9}  {}",
            entry.chain.name,
            entry.chain.state_dim,
            if entry.theorem_applicable { "unbiased" } else { "bound" },
            entry.citation
        );
    }
    Ok(())
}

fn cmd_simulate(mut args: SimulateArgs) -> Result<()> {
    args.seed = effective_seed(args.seed)?;
    let entry = lookup_chain(&args.chain)?;
    let x0 = args.x0.clone().unwrap_or_else(|| entry.default_inits.0.clone());
    if x0.len() != entry.chain.state_dim {
        return Err(Error::Usage(format!(
            "--x0 has {} coordinates but chain '{}' has state dimension {}",
            x0.len(),
            args.chain,
            entry.chain.state_dim
        )));
    }
    args.x0 = Some(x0.clone());

    let mut stream = UniformStream::new(args.seed, 0);
    let traj = if args.backward {
        simulate_backward(&entry.chain, &x0, &mut stream, args.n)?
    } else {
        simulate_forward(&entry.chain, &x0, &mut stream, args.n)?
    };

    std::fs::create_dir_all(&args.out)?;
    write_trajectory_csv(&args.out.join("trajectory.csv"), &traj)?;
    if args.svg {
        let points: Vec<(f64, f64)> =
            traj.states.iter().enumerate().map(|(n, s)| (n as f64, s[0])).collect();
        let svg = svg_line_plot(
            &format!("{} trajectory", args.chain),
            "iteration",
            "state",
            &points,
        );
        std::fs::write(args.out.join("trajectory.svg"), svg)?;
    }
    write_manifest(&args.out, "simulate", serde_json::to_value(&args)?, Some(args.seed))?;
    println!("wrote {}", args.out.join("trajectory.csv").display());
    Ok(())
}

fn cmd_couple(mut args: CoupleArgs) -> Result<()> {
    args.seed = effective_seed(args.seed)?;
    let entry = lookup_chain(&args.chain)?;
    let mode: CouplingMode = args.coupling.parse()?;
    let x0 = args.x0.clone().unwrap_or_else(|| entry.default_inits.0.clone());
    let y0 = args.y0.clone().unwrap_or_else(|| entry.default_inits.1.clone());
    for (flag, v) in [("--x0", &x0), ("--y0", &y0)] {
        if v.len() != entry.chain.state_dim {
            return Err(Error::Usage(format!(
                "{flag} has {} coordinates but chain '{}' has state dimension {}",
                v.len(),
                args.chain,
                entry.chain.state_dim
            )));
        }
    }
    args.x0 = Some(x0.clone());
    args.y0 = Some(y0.clone());

    let report = algorithm1(
        &entry.chain,
        &InitSampler::point(x0),
        &InitSampler::point(y0),
        args.n,
        args.replicates,
        args.p,
        mode,
        args.seed,
    )?;

    std::fs::create_dir_all(&args.out)?;
    write_json(&args.out.join("couple.json"), &report)?;
    let mut csv = BufWriter::new(File::create(args.out.join("couple.csv"))?);
    report.write_csv(&mut csv)?;
    csv.flush()?;
    let points: Vec<(f64, f64)> =
        report.iterations.iter().map(|it| (it.n as f64, it.mean)).collect();
    let svg = svg_line_plot(
        &format!("{} coupled mean distance^p ({})", args.chain, mode),
        "iteration",
        "mean |x_n - y_n|^p",
        &points,
    );
    std::fs::write(args.out.join("couple.svg"), svg)?;
    write_manifest(&args.out, "couple", serde_json::to_value(&args)?, Some(args.seed))?;
    println!(
        "wrote {} (mean at n={}: {})",
        args.out.join("couple.json").display(),
        args.n,
        crn::format_float(report.mean_at(args.n))
    );
    Ok(())
}

/// Families available to `monotonicity`: a map theta -> f(theta, state),
/// the theta domain, and the theta law used for P(A).
fn monotonicity_family(
    name: &str,
) -> Result<(Box<dyn Fn(f64, f64) -> f64>, (f64, f64), DistributionSpec)> {
    use std::f64::consts::PI;
    match name {
        "cos" => Ok((
            Box::new(crn::chains::cos_family),
            COS_FAMILY_DOMAIN,
            DistributionSpec::Uniform { a: COS_FAMILY_DOMAIN.0, b: COS_FAMILY_DOMAIN.1 },
        )),
        "product" => Ok((
            Box::new(|t, x| x * t),
            (0.0, 1.0),
            DistributionSpec::Uniform { a: 0.0, b: 1.0 },
        )),
        "logistic" => Ok((
            Box::new(|t, x: f64| 4.0 * t * x * (1.0 - x)),
            (0.0, 1.0),
            DistributionSpec::Beta { a: 1.5, b: 0.5 },
        )),
        "trig" => Ok((
            Box::new(|t: f64, x: f64| ((1.0 - x.abs()) * t.cos()).sin()),
            (-PI / 2.0, 3.0 * PI / 2.0),
            DistributionSpec::Uniform { a: -PI / 2.0, b: 3.0 * PI / 2.0 },
        )),
        other => Err(Error::Usage(format!(
            "unknown function '{other}' (expected cos, product, logistic, trig)"
        ))),
    }
}

fn cmd_monotonicity(args: MonotonicityArgs) -> Result<()> {
    let (f, domain, law) = monotonicity_family(&args.function)?;
    let part_x = classify_monotonicity(&|t| f(t, args.x), domain, args.grid)?;
    let part_y = classify_monotonicity(&|t| f(t, args.y), domain, args.grid)?;
    let common = common_region(&part_x, &part_y, &law)?;

    let report = serde_json::json!({
        "function": args.function,
        "x": args.x,
        "y": args.y,
        "grid": args.grid,
        "domain": domain,
        "partition_x": part_x,
        "partition_y": part_y,
        "common_region": common,
    });
    std::fs::create_dir_all(&args.out)?;
    write_json(&args.out.join("monotonicity.json"), &report)?;
    write_manifest(&args.out, "monotonicity", serde_json::to_value(&args)?, None)?;
    println!(
        "wrote {} (P(A) = {})",
        args.out.join("monotonicity.json").display(),
        crn::format_float(common.prob_a)
    );
    Ok(())
}

fn cmd_bound(args: BoundArgs) -> Result<()> {
    let mut config = match (&args.config, &args.example) {
        (Some(path), None) => {
            if !path.exists() {
                return Err(Error::Usage(format!("config file not found: {}", path.display())));
            }
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str::<GibbsConfig>(&text)?
        }
        (None, Some(name)) if name == "gibbs-regression" => {
            let dataset = args
                .dataset
                .clone()
                .unwrap_or_else(|| PathBuf::from("data/carbs.csv"));
            GibbsConfig::example_default(dataset.to_string_lossy())
        }
        (None, Some(other)) => {
            return Err(Error::Usage(format!(
                "unknown example '{other}' (available: gibbs-regression)"
            )));
        }
        _ => {
            return Err(Error::Usage(
                "exactly one of --config or --example is required".into(),
            ));
        }
    };
    config.seed = effective_seed(config.seed)?;
    if !Path::new(&config.dataset).exists() {
        return Err(Error::Usage(format!("dataset not found: {}", config.dataset)));
    }

    let (report, traces) = run_example(&config)?;
    std::fs::create_dir_all(&args.out)?;
    write_json(&args.out.join("bound.json"), &report)?;
    write_gibbs_csv(&args.out.join("bound.csv"), &report)?;

    // Per-replicate absolute differences at the reference iteration
    // (n = 25, or the horizon when shorter), one CSV row per replicate.
    let n_ref = 25.min(config.horizon);
    let diffs: Vec<f64> = traces.iter().map(|t| t[n_ref]).collect();
    let mut hist = BufWriter::new(File::create(args.out.join("diffs.csv"))?);
    writeln!(hist, "replicate,abs_diff_n{n_ref}")?;
    for (i, d) in diffs.iter().enumerate() {
        writeln!(hist, "{},{}", i, crn::format_float(*d))?;
    }
    hist.flush()?;
    std::fs::write(
        args.out.join("diffs.svg"),
        svg_histogram(
            &format!("|sigma2 difference| at n = {n_ref}"),
            "absolute difference",
            &diffs,
            40,
        ),
    )?;

    let points: Vec<(f64, f64)> =
        report.iterations.iter().map(|it| (it.n as f64, it.w_bound)).collect();
    std::fs::write(
        args.out.join("bound.svg"),
        svg_line_plot("Wasserstein bound per iteration", "iteration", "bound", &points),
    )?;

    let manifest_config = serde_json::json!({
        "config": config,
        "out": args.out,
    });
    write_manifest(&args.out, "bound", manifest_config, Some(config.seed))?;
    println!(
        "wrote {} (K = {}, L = {})",
        args.out.join("bound.json").display(),
        crn::format_float(report.k_upper),
        crn::format_float(report.l)
    );
    Ok(())
}

fn write_gibbs_csv(path: &Path, report: &GibbsReport) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "iteration,mean_abs_diff,se,w_bound,tv_bound")?;
    for it in &report.iterations {
        writeln!(
            w,
            "{},{},{},{},{}",
            it.n,
            crn::format_float(it.mean_abs_diff),
            crn::format_float(it.se),
            crn::format_float(it.w_bound),
            crn::format_float(it.tv_bound)
        )?;
    }
    w.flush()?;
    Ok(())
}

fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    traj.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn write_manifest(
    out: &Path,
    command: &str,
    config: serde_json::Value,
    seed: Option<u64>,
) -> Result<()> {
    let canonical = serde_json::to_vec(&config)?;
    let hash = Sha256::digest(&canonical);
    let hex: String = hash.iter().map(|b| format!("{b:02x}")).collect();
    let manifest = serde_json::json!({
        "command": command,
        "config": config,
        "config_sha256": hex,
        "seed": seed,
        "version": env!("CARGO_PKG_VERSION"),
    });
    write_json(&out.join("manifest.json"), &manifest)
}

// ---------------------------------------------------------------------------
// Static SVG rendering: fixed 800x500 viewport, no timestamps, so repeated
// runs are byte-identical.

const SVG_W: f64 = 800.0;
const SVG_H: f64 = 500.0;
const MARGIN_L: f64 = 80.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 55.0;

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else if v.abs() >= 0.01 && v.abs() < 10_000.0 {
        format!("{v:.4}")
    } else {
        format!("{v:.3e}")
    }
}

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn sx(&self, x: f64) -> f64 {
        MARGIN_L + (x - self.x_min) / (self.x_max - self.x_min) * (SVG_W - MARGIN_L - MARGIN_R)
    }

    fn sy(&self, y: f64) -> f64 {
        SVG_H - MARGIN_B
            - (y - self.y_min) / (self.y_max - self.y_min) * (SVG_H - MARGIN_T - MARGIN_B)
    }
}

fn svg_open(title: &str) -> String {
    format!(
        concat!(
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" "#,
            r#"viewBox="0 0 {w} {h}" font-family="monospace" font-size="12">"#,
            "\n",
            r#"<rect width="{w}" height="{h}" fill="white"/>"#,
            "\n",
            r#"<text x="{tx}" y="22" text-anchor="middle" font-size="15">{title}</text>"#,
            "\n"
        ),
        w = SVG_W,
        h = SVG_H,
        tx = SVG_W / 2.0,
        title = title
    )
}

fn svg_axes(frame: &Frame, x_label: &str, y_label: &str, out: &mut String) {
    use std::fmt::Write as _;
    let x0 = MARGIN_L;
    let x1 = SVG_W - MARGIN_R;
    let y0 = SVG_H - MARGIN_B;
    let y1 = MARGIN_T;
    let _ = writeln!(
        out,
        r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>"#
    );
    let _ = writeln!(
        out,
        r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>"#
    );
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = frame.x_min + t * (frame.x_max - frame.x_min);
        let yv = frame.y_min + t * (frame.y_max - frame.y_min);
        let xs = frame.sx(xv);
        let ys = frame.sy(yv);
        let _ = writeln!(
            out,
            r#"<line x1="{xs}" y1="{y0}" x2="{xs}" y2="{yt}" stroke="black"/>"#,
            yt = y0 + 5.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{xs}" y="{yt}" text-anchor="middle">{}</text>"#,
            fmt_tick(xv),
            yt = y0 + 20.0
        );
        let _ = writeln!(
            out,
            r#"<line x1="{xt}" y1="{ys}" x2="{x0}" y2="{ys}" stroke="black"/>"#,
            xt = x0 - 5.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{xt}" y="{yt}" text-anchor="end">{}</text>"#,
            fmt_tick(yv),
            xt = x0 - 8.0,
            yt = ys + 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{xc}" y="{yb}" text-anchor="middle">{x_label}</text>"#,
        xc = (x0 + x1) / 2.0,
        yb = SVG_H - 12.0
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{yc}" text-anchor="middle" transform="rotate(-90 16 {yc})">{y_label}</text>"#,
        yc = (y0 + y1) / 2.0
    );
}

fn svg_line_plot(title: &str, x_label: &str, y_label: &str, points: &[(f64, f64)]) -> String {
    use std::fmt::Write as _;
    // Log scale when the positive range spans several decades.
    let all_positive = !points.is_empty() && points.iter().all(|&(_, y)| y > 0.0);
    let y_span = if all_positive {
        let lo = points.iter().map(|&(_, y)| y).fold(f64::INFINITY, f64::min);
        let hi = points.iter().map(|&(_, y)| y).fold(0.0_f64, f64::max);
        hi / lo
    } else {
        0.0
    };
    let log_y = all_positive && y_span > 1.0e3;
    let transformed: Vec<(f64, f64)> = points
        .iter()
        .map(|&(x, y)| (x, if log_y { y.log10() } else { y }))
        .collect();

    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for &(x, y) in &transformed {
        x_min = x_min.min(x);
        x_max = x_max.max(x);
        y_min = y_min.min(y);
        y_max = y_max.max(y);
    }
    if transformed.is_empty() {
        x_min = 0.0;
        x_max = 1.0;
        y_min = 0.0;
        y_max = 1.0;
    }
    if x_min == x_max {
        x_max = x_min + 1.0;
    }
    if y_min == y_max {
        y_max = y_min + 1.0;
        y_min -= 1.0;
    }
    let frame = Frame { x_min, x_max, y_min, y_max };

    let mut svg = svg_open(title);
    let y_label = if log_y { format!("log10 {y_label}") } else { y_label.to_string() };
    svg_axes(&frame, x_label, &y_label, &mut svg);
    let mut path = String::new();
    for (i, &(x, y)) in transformed.iter().enumerate() {
        let _ = write!(
            path,
            "{}{:.2},{:.2}",
            if i == 0 { "" } else { " " },
            frame.sx(x),
            frame.sy(y)
        );
    }
    let _ = writeln!(
        svg,
        r#"<polyline points="{path}" fill="none" stroke="steelblue" stroke-width="1.5"/>"#
    );
    svg.push_str("</svg>\n");
    svg
}

fn svg_histogram(title: &str, x_label: &str, values: &[f64], bins: usize) -> String {
    use std::fmt::Write as _;
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if values.is_empty() || lo == hi {
        (lo.min(0.0), hi.max(1.0))
    } else {
        (lo, hi)
    };
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in values {
        let idx = (((v - lo) / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    let max_count = counts.iter().copied().max().unwrap_or(1).max(1);

    let frame = Frame { x_min: lo, x_max: hi, y_min: 0.0, y_max: max_count as f64 };
    let mut svg = svg_open(title);
    svg_axes(&frame, x_label, "count", &mut svg);
    for (i, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let bx0 = frame.sx(lo + i as f64 * width);
        let bx1 = frame.sx(lo + (i + 1) as f64 * width);
        let by = frame.sy(c as f64);
        let _ = writeln!(
            svg,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="steelblue" stroke="white" stroke-width="0.5"/>"#,
            bx0,
            by,
            (bx1 - bx0).max(0.5),
            SVG_H - MARGIN_B - by
        );
    }
    svg.push_str("</svg>\n");
    svg
}
