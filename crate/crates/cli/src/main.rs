mod config;
mod svg;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use fractal_steiner::fractal::{
    build_sigma, epsilon_of, hausdorff_dimension_formula, total_length, validate_embedding, Depth,
    EmbeddedTree, LambdaSequence, TreeJson,
};
use fractal_steiner::solver::{solve_steiner, SolveOptions, MAX_TERMINALS};
use fractal_steiner::verifier::{check_theorem_with, estimate_dimension, verify_all};
use fractal_steiner::{Error, Point};

use config::{Format, Settings};

#[derive(Debug, Parser)]
#[command(
    name = "steinerfrac",
    version,
    about = "Self-similar Steiner trees: build, solve, check, draw"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    settings: Settings,
    /// JSON file with any of lambda, depth, tolerance, jobs, output, format
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the tree to --depth and write it as JSON, terminal CSV or SVG
    Generate,
    /// Exact Steiner tree of a terminal file (one `x,y` per line) or, without
    /// a file, of the root and the leaves of the tree at --depth
    Solve { input: Option<PathBuf> },
    /// Run the length-bound, construction and contact checks at --lambda;
    /// with --depth also the truncated minimality up to that depth
    Verify,
    /// Compare the exact Steiner tree of the depth-k terminals with the tree itself
    Theorem,
    /// Box-counting dimension of the 2^depth leaves
    Dimension,
    /// Draw a tree JSON file, or the tree at --lambda/--depth, as SVG
    Render {
        input: Option<PathBuf>,
        /// Draw the symmetry axis
        #[arg(long)]
        axis: bool,
    },
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Verify(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io(_) => 2,
            CliError::Verify(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(e) => CliError::Io(e.to_string()),
            Error::SolverFailure(m) => CliError::Verify(format!("solver failure: {m}")),
            e => CliError::Usage(e.to_string()),
        }
    }
}

type Outcome = Result<(), CliError>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Usage(m) => eprintln!("error: {m}"),
                CliError::Io(m) => eprintln!("i/o error: {m}"),
                CliError::Verify(m) => eprintln!("verification failed: {m}"),
            }
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: Cli) -> Outcome {
    let settings = match &cli.config {
        Some(path) => cli.settings.over(Settings::load(path)?),
        None => cli.settings,
    };
    if settings.depth == Some(0) {
        return Err(CliError::Usage("depth must be at least 1".into()));
    }
    match cli.command {
        Command::Generate => generate(&settings),
        Command::Solve { input } => solve(&settings, input.as_deref()),
        Command::Verify => verify(&settings),
        Command::Theorem => theorem(&settings),
        Command::Dimension => dimension(&settings),
        Command::Render { input, axis } => render(&settings, input.as_deref(), axis),
    }
}

fn write_out(path: &Path, content: &str) -> Outcome {
    fs::write(path, content).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Writes to `--output`, or to standard output when none is given.
fn emit(settings: &Settings, content: &str) -> Outcome {
    match &settings.output {
        Some(p) => write_out(p, content),
        None => std::io::stdout()
            .write_all(content.as_bytes())
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

fn require_format(settings: &Settings, allowed: &[Format]) -> Result<Format, CliError> {
    let f = settings.format();
    if allowed.contains(&f) {
        Ok(f)
    } else {
        Err(CliError::Usage(format!(
            "format {f:?} is not available for this command"
        )))
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| CliError::Usage(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn sequence(settings: &Settings) -> Result<LambdaSequence, CliError> {
    Ok(LambdaSequence::constant(settings.lambda())?)
}

fn solve_options(settings: &Settings) -> Result<SolveOptions, CliError> {
    let opts = SolveOptions {
        convergence_tol: settings.tolerance(),
        jobs: settings.jobs,
        ..SolveOptions::default()
    };
    opts.validate()?;
    Ok(opts)
}

fn root_and_leaves(tree: &EmbeddedTree) -> Vec<Point> {
    std::iter::once(tree.vertex(0))
        .chain(tree.leaves())
        .collect()
}

fn points_csv(points: &[Point]) -> String {
    points
        .iter()
        .map(|p| format!("{:.16e},{:.16e}\n", p.x, p.y))
        .collect()
}

fn generate(settings: &Settings) -> Outcome {
    let format = require_format(settings, &[Format::Json, Format::Csv, Format::Svg])?;
    let seq = sequence(settings)?;
    let depth = settings.depth.unwrap_or(6);
    let tree = build_sigma(&seq, depth)?;
    let lambda = settings.lambda();

    if let Some(path) = &settings.output {
        let content = match format {
            Format::Json => to_json(&tree.to_json())?,
            Format::Csv => points_csv(&root_and_leaves(&tree)),
            Format::Svg => svg::render(&tree, false),
        };
        write_out(path, &content)?;
    }

    let report = validate_embedding(&tree);
    if !report.valid {
        match report.crossings.first() {
            Some((a, b)) => eprintln!(
                "warning: embedding invalid: {} crossing edge pair(s), first {a:?} and {b:?}",
                report.crossings.len()
            ),
            None => eprintln!("warning: embedding invalid: branching angles or ratios off"),
        }
    }
    println!("lambda {lambda}");
    println!("depth {depth}");
    println!("vertices {}", tree.vertices.len());
    println!("leaves {}", tree.leaf_indices().len());
    println!(
        "total length {:.12}",
        total_length(&seq, Depth::Finite(depth))?
    );
    if let Ok(limit) = total_length(&seq, Depth::Infinite) {
        println!("limit length {limit:.12}");
    }
    println!("epsilon {:.12e}", epsilon_of(lambda)?);
    Ok(())
}

fn read_terminals(path: &Path) -> Result<Vec<Point>, CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut pts = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = || CliError::Usage(format!("{}:{}: expected `x,y`", path.display(), i + 1));
        let (x, y) = line.split_once(',').ok_or_else(bad)?;
        let x: f64 = x.trim().parse().map_err(|_| bad())?;
        let y: f64 = y.trim().parse().map_err(|_| bad())?;
        pts.push(Point::new(x, y));
    }
    Ok(pts)
}

fn solve(settings: &Settings, input: Option<&Path>) -> Outcome {
    let format = require_format(settings, &[Format::Json, Format::Csv])?;
    let terminals = match input {
        Some(path) => read_terminals(path)?,
        None => root_and_leaves(&build_sigma(
            &sequence(settings)?,
            settings.depth.unwrap_or(3),
        )?),
    };
    if terminals.len() > MAX_TERMINALS {
        return Err(CliError::Usage(format!(
            "{} terminals; the exact solver takes at most {MAX_TERMINALS}",
            terminals.len()
        )));
    }
    let sol = solve_steiner(&terminals, &solve_options(settings)?)?;
    let content = match format {
        Format::Csv => {
            let mut s = String::from("id,kind,x,y\n");
            for (i, p) in sol.terminals.iter().chain(&sol.steiner_points).enumerate() {
                let kind = if i < sol.terminals.len() {
                    "terminal"
                } else {
                    "steiner"
                };
                s.push_str(&format!("{i},{kind},{:.16e},{:.16e}\n", p.x, p.y));
            }
            s
        }
        _ => to_json(&sol.to_json())?,
    };
    emit(settings, &content)?;
    if settings.output.is_some() {
        println!("length {:.15}", sol.length);
        println!("topology {}", sol.topology.canonical_id);
        println!("ties {}", sol.ties.len());
    }
    Ok(())
}

fn verify(settings: &Settings) -> Outcome {
    require_format(settings, &[Format::Json])?;
    let bundle = verify_all(settings.lambda(), settings.depth.unwrap_or(0))?;
    for r in &bundle.reports {
        println!("{} {}", if r.pass { "PASS" } else { "FAIL" }, r.name);
    }
    if let Some(path) = &settings.output {
        write_out(path, &to_json(&bundle)?)?;
    }
    if bundle.pass {
        Ok(())
    } else {
        let failed: Vec<&str> = bundle
            .reports
            .iter()
            .filter(|r| !r.pass)
            .map(|r| r.name.as_str())
            .collect();
        Err(CliError::Verify(failed.join(", ")))
    }
}

fn theorem(settings: &Settings) -> Outcome {
    require_format(settings, &[Format::Json])?;
    let depth = settings.depth.unwrap_or(3);
    if depth > 4 {
        return Err(CliError::Usage(format!(
            "depth {depth} refused: it has {} terminals and the exact search stops at depth 4 (9 terminals)",
            (1u64 << (depth - 1)) + 1
        )));
    }
    let r = check_theorem_with(settings.lambda(), depth, &solve_options(settings)?)?;
    println!("lambda {}", r.lambda);
    println!("depth {}", r.depth);
    println!("truncation length {:.15}", r.truncation_length);
    println!("oracle length {:.15}", r.oracle_length);
    println!("relative gap {:.3e}", r.relative_gap);
    println!("vertex deviation {:.3e}", r.max_vertex_deviation);
    for (k, b) in r.per_step_lower_bounds.iter().enumerate() {
        println!("lower bound after step {} {:.15}", k + 1, b);
    }
    if let Some(path) = &settings.output {
        write_out(path, &to_json(&r)?)?;
    }
    if r.pass {
        Ok(())
    } else {
        Err(CliError::Verify(format!(
            "theorem check at depth {depth}: gap {:.3e}, vertex deviation {:.3e}",
            r.relative_gap, r.max_vertex_deviation
        )))
    }
}

#[derive(Serialize)]
struct DimensionJson {
    lambda: f64,
    depth: u32,
    points: usize,
    scales: Vec<f64>,
    estimate: f64,
    formula: f64,
}

fn dimension(settings: &Settings) -> Outcome {
    require_format(settings, &[Format::Json])?;
    let lambda = settings.lambda();
    let depth = settings.depth.unwrap_or(12);
    let tree = build_sigma(&sequence(settings)?, depth + 1)?;
    let points: Vec<Point> = tree.leaves().collect();
    let scales: Vec<f64> = (1..=(depth / 2).max(2) as i32)
        .map(|k| lambda.powi(k))
        .collect();
    let estimate = estimate_dimension(&points, &scales)?;
    let formula = hausdorff_dimension_formula(lambda)?;
    println!("points {}", points.len());
    println!("estimate {estimate:.6}");
    println!("formula {formula:.6}");
    if let Some(path) = &settings.output {
        let out = DimensionJson {
            lambda,
            depth,
            points: points.len(),
            scales,
            estimate,
            formula,
        };
        write_out(path, &to_json(&out)?)?;
    }
    Ok(())
}

fn render(settings: &Settings, input: Option<&Path>, axis: bool) -> Outcome {
    if matches!(settings.format, Some(f) if f != Format::Svg) {
        return Err(CliError::Usage("render only writes SVG".into()));
    }
    let tree = match input {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            let json: TreeJson = serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            EmbeddedTree::from_json(json)?
        }
        None => build_sigma(&sequence(settings)?, settings.depth.unwrap_or(6))?,
    };
    emit(settings, &svg::render(&tree, axis))
}
