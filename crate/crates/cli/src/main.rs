use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use capcover::arith::{fmt_rational, parse_rational};
use capcover::assignment::{integralize, write_solution};
use capcover::batch::{evaluate, Execution};
use capcover::instance::{
    from_set_cover, generate_random, parse_instance, parse_set_system, write_instance, Instance, Variant,
};
use capcover::lp::build_mmcc_lp;
use capcover::oracle::DEFAULT_BUDGET;
use capcover::rounding::{solve, variant_beta, PipelineConfig};
use capcover::verify::{check_run, check_solution, Candidate};
use capcover::Error;
use clap::{Parser, Subcommand};

const EXIT_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;

#[derive(Parser)]
#[command(name = "capcover", version, about = "Capacitated ball cover by LP rounding")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a random instance or a set-cover reduction.
    Generate(GenerateArgs),
    /// Solve, round, integralize and verify one instance.
    Solve(SolveArgs),
    /// Tabulate LP, oracle, greedy and pipeline sizes over a directory.
    Compare(CompareArgs),
}

#[derive(clap::Args)]
struct GenerateArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..), required_unless_present = "from_setcover")]
    points: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..), required_unless_present = "from_setcover")]
    balls: Option<u64>,
    #[arg(long, default_value = "monotonic")]
    variant: Variant,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Set system file: one set per line, element ids separated by spaces.
    #[arg(long, conflicts_with_all = ["points", "balls"])]
    from_setcover: Option<PathBuf>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..), default_value_t = 1)]
    capacity: u64,
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
}

#[derive(clap::Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, value_parser = parse_alpha)]
    alpha: Option<capcover::arith::Rational>,
    /// Reinterpret the instance under another variant.
    #[arg(long)]
    variant: Option<Variant>,
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    dump_lp: Option<PathBuf>,
    /// Solution file.
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
}

#[derive(clap::Args)]
struct CompareArgs {
    dir: PathBuf,
    #[arg(long, value_parser = parse_alpha)]
    alpha: Option<capcover::arith::Rational>,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: usize,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    sequential: bool,
}

fn parse_alpha(s: &str) -> Result<capcover::arith::Rational, String> {
    let a = parse_rational(s).map_err(|e| e.to_string())?;
    PipelineConfig::with_alpha(a.clone()).map_err(|e| e.to_string())?;
    Ok(a)
}

fn config(alpha: Option<capcover::arith::Rational>) -> PipelineConfig {
    alpha.map(|a| PipelineConfig::with_alpha(a).expect("validated by the parser")).unwrap_or_default()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Compare(args) => cmd_compare(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let infeasible = e.chain().any(|c| {
                matches!(
                    c.downcast_ref::<Error>(),
                    Some(Error::UncoveredPoint { .. } | Error::Infeasible(_) | Error::NoCover)
                )
            });
            ExitCode::from(if infeasible { EXIT_INFEASIBLE } else { EXIT_USAGE })
        }
    }
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_generate(args: GenerateArgs) -> Result<u8> {
    let instance = match &args.from_setcover {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            from_set_cover(&parse_set_system(&text)?, args.capacity)?
        }
        None => {
            let (points, balls) = (args.points.unwrap_or(1) as usize, args.balls.unwrap_or(1) as usize);
            eprintln!("seed {}", args.seed);
            generate_random(points, balls, args.variant, args.seed)?
        }
    };
    write_or_print(args.output.as_deref(), &write_instance(&instance))?;
    Ok(0)
}

fn load(path: &Path, variant: Option<Variant>) -> Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let instance = parse_instance(&text).with_context(|| format!("loading {}", path.display()))?;
    match variant {
        Some(v) if v != instance.variant() => Ok(Instance::with_demand(
            instance.space().clone(),
            instance.balls().to_vec(),
            v,
            instance.demand().to_vec(),
        )?),
        _ => Ok(instance),
    }
}

fn cmd_solve(args: SolveArgs) -> Result<u8> {
    let instance = load(&args.instance, args.variant)?;
    let cfg = config(args.alpha);
    if let Some(path) = &args.dump_lp {
        fs::write(path, build_mmcc_lp(&instance)?.dump()).with_context(|| format!("writing {}", path.display()))?;
    }
    let run = match solve(&instance, &cfg) {
        Ok(run) => run,
        Err(e @ (Error::UncoveredPoint { .. } | Error::Infeasible(_))) => {
            eprintln!("error: {e}");
            return Ok(EXIT_INFEASIBLE);
        }
        Err(e) => {
            println!("status = fail");
            println!("error = {e}");
            return Ok(EXIT_FAILED);
        }
    };
    if let Some(path) = &args.trace {
        fs::write(path, run.trace.render()).with_context(|| format!("writing {}", path.display()))?;
    }
    let beta = variant_beta(instance.variant());
    let mut report = check_run(&instance, &run, &cfg);
    report.extend(check_solution(&instance, &Candidate::from(&run.rounded), &beta));
    match integralize(&instance, &run.rounded) {
        Ok(integral) => {
            report.extend(check_solution(&instance, &Candidate::from(&integral), &beta));
            if let Some(path) = &args.output {
                fs::write(path, write_solution(&integral)).with_context(|| format!("writing {}", path.display()))?;
            }
        }
        Err(e) => report.record("integralize", false, e.to_string()),
    }

    let mut out = String::new();
    writeln!(out, "instance = {}", args.instance.display())?;
    writeln!(out, "variant = {}", instance.variant())?;
    writeln!(out, "alpha = {}", fmt_rational(&cfg.alpha))?;
    writeln!(out, "lp-opt = {}", fmt_rational(run.sigma_star.cost()))?;
    writeln!(out, "cost = {}", run.rounded.cost())?;
    writeln!(out, "max-expansion = {}", run.rounded.max_expansion())?;
    writeln!(out, "beta-limit = {beta}")?;
    writeln!(out, "status = {}", if report.passed() { "pass" } else { "fail" })?;
    writeln!(out)?;
    write!(out, "{report}")?;
    print!("{out}");
    Ok(if report.passed() { 0 } else { EXIT_FAILED })
}

struct Row {
    file: String,
    cells: Vec<String>,
    status: String,
}

const COLUMNS: [&str; 9] = ["variant", "points", "balls", "lp", "opt", "greedy", "pipeline", "expansion", "status"];

fn compare_one(path: &Path, cfg: &PipelineConfig, budget: usize) -> Row {
    let file = path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
    let fail = |msg: String| Row { file: file.clone(), cells: vec!["-".into(); 8], status: format!("error: {msg}") };
    let instance = match load(path, None) {
        Ok(i) => i,
        Err(e) => return fail(format!("{e:#}")),
    };
    match evaluate(&instance, cfg, budget) {
        Ok(ev) => Row {
            file,
            cells: vec![
                instance.variant().to_string(),
                instance.demand().len().to_string(),
                instance.balls().len().to_string(),
                fmt_rational(&ev.lp_opt),
                ev.opt.map_or_else(|| "?".into(), |o| o.to_string()),
                ev.greedy_cost.to_string(),
                ev.pipeline_cost.to_string(),
                ev.max_expansion.to_string(),
            ],
            status: if ev.passed() {
                "pass".into()
            } else {
                let names: Vec<&str> = ev.report.failures().map(|c| c.name.as_str()).collect();
                format!("fail: {}", names.join(" "))
            },
        },
        Err(e) => {
            let mut row = fail(e.to_string());
            row.cells[0] = instance.variant().to_string();
            row
        }
    }
}

fn cmd_compare(args: CompareArgs) -> Result<u8> {
    let cfg = config(args.alpha);
    let mut files: Vec<PathBuf> = fs::read_dir(&args.dir)
        .with_context(|| format!("reading {}", args.dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "inst"))
        .collect();
    files.sort();
    let exec = if args.sequential { Execution::Sequential } else { Execution::default() };
    let rows = exec.map(&files, |p| compare_one(p, &cfg, args.budget));

    let mut table = String::new();
    let mut header = vec!["file".to_string()];
    header.extend(COLUMNS.iter().map(|c| c.to_string()));
    let all: Vec<Vec<String>> = std::iter::once(header)
        .chain(rows.iter().map(|r| {
            let mut v = vec![r.file.clone()];
            v.extend(r.cells.iter().cloned());
            v.push(r.status.clone());
            v
        }))
        .collect();
    let widths: Vec<usize> =
        (0..all[0].len()).map(|i| all.iter().map(|r| r[i].chars().count()).max().unwrap_or(0)).collect();
    for r in &all {
        let line: Vec<String> = r
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, w))| if i + 1 == r.len() { c.clone() } else { format!("{c:<w$}") })
            .collect();
        writeln!(table, "{}", line.join("  "))?;
    }
    print!("{table}");

    if let Some(path) = &args.csv {
        let mut csv = String::new();
        writeln!(csv, "file,{}", COLUMNS.join(","))?;
        for r in &rows {
            let status = r.status.replace(',', ";");
            writeln!(csv, "{},{},{}", r.file, r.cells.join(","), status)?;
        }
        fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(if rows.iter().all(|r| r.status == "pass") { 0 } else { EXIT_FAILED })
}
