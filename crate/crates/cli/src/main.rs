use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use vqx_core::encoding::Encoding;
use vqx_core::objectives::Mode;
use vqx_core::sweep::{
    case_settings, emit_plots, emit_tables, grid, load_records, load_traces, prepare_point, run_case, Molecule,
    RunConfig,
};

#[derive(Parser)]
#[command(name = "vqx", version, about = "VQE / SSVQE dissociation-curve sweeps with constraint and tabu terms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment case over a bond-length grid.
    Run(RunArgs),
    /// Print the exact labelled spectrum at one bond length.
    Spectrum(SpectrumArgs),
    /// Redraw SVG charts from the CSV files in a results directory.
    Plot {
        dir: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    molecule: Option<Molecule>,
    /// Experiment case 1-12.
    #[arg(long)]
    case: Option<u8>,
    #[arg(long, value_parser = parse_mode)]
    method: Option<Mode>,
    #[arg(long)]
    constraints: Option<bool>,
    #[arg(long)]
    tabu: Option<bool>,
    #[arg(long)]
    encoding: Option<Encoding>,
    #[arg(long, requires_all = ["r_max", "step"])]
    r_min: Option<f64>,
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
    /// Explicit bond lengths in Å, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "r_min")]
    r: Option<Vec<f64>>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Trotter depth.
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    max_updates: Option<usize>,
    /// Deflation coefficient A in Hartree.
    #[arg(long)]
    deflation: Option<f64>,
    #[arg(long)]
    deflation_shift: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the resolved configuration as JSON and exit.
    #[arg(long)]
    print_config: bool,
    #[arg(long)]
    no_plots: bool,
}

#[derive(Args)]
struct SpectrumArgs {
    #[arg(long)]
    molecule: Molecule,
    #[arg(long)]
    r: f64,
    #[arg(long, default_value = "bk")]
    encoding: Encoding,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    match s {
        "vqe" => Ok(Mode::Vqe),
        "ssvqe" => Ok(Mode::Ssvqe),
        _ => Err(format!("unknown method '{s}' (expected vqe or ssvqe)")),
    }
}

fn resolve(args: &RunArgs) -> Result<RunConfig> {
    let mut cfg = match (&args.config, args.case) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            RunConfig::from_json(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        (None, Some(case)) => RunConfig::for_case(case)?,
        (None, None) => {
            let molecule = args.molecule.context("need --config, --case or --molecule")?;
            let mut cfg = RunConfig::for_case(if molecule == Molecule::H2 { 1 } else { 7 })?;
            cfg.method = args.method.unwrap_or(Mode::Vqe);
            cfg
        }
    };
    if let Some(case) = args.case {
        let (molecule, method, constraints, tabu) = case_settings(case)?;
        if args.molecule.is_some_and(|m| m != molecule) {
            bail!("case {case} is a {molecule} case");
        }
        if cfg.molecule != molecule {
            cfg.bond_lengths = molecule.default_bond_lengths();
        }
        cfg.molecule = molecule;
        cfg.method = method;
        cfg.constraints = constraints;
        cfg.tabu = tabu;
    }
    if let Some(m) = args.method {
        cfg.method = m;
    }
    if let Some(c) = args.constraints {
        cfg.constraints = c;
    }
    if let Some(t) = args.tabu {
        cfg.tabu = t;
    }
    if let Some(e) = args.encoding {
        cfg.encoding = e;
    }
    if let (Some(a), Some(b), Some(s)) = (args.r_min, args.r_max, args.step) {
        cfg.bond_lengths = grid(a, b, s);
    }
    if let Some(rs) = &args.r {
        cfg.bond_lengths = rs.clone();
    }
    if let Some(n) = args.samples {
        cfg.samples = n;
    }
    if let Some(s) = args.seed {
        cfg.optimizer.seed = s;
    }
    if let Some(d) = args.depth {
        cfg.depth = d;
    }
    if let Some(m) = args.max_updates {
        cfg.optimizer.max_updates = m;
    }
    if let Some(a) = args.deflation {
        cfg.objective.deflation_coefficient = a;
    }
    if args.deflation_shift {
        cfg.objective.deflation_shift = true;
    }
    if let Some(o) = &args.out {
        cfg.output = Some(o.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(args: RunArgs) -> Result<()> {
    let cfg = resolve(&args)?;
    if args.print_config {
        println!("{}", cfg.to_json()?);
        return Ok(());
    }
    let out = cfg.output.clone().unwrap_or_else(|| PathBuf::from("results"));
    let case = cfg.case()?;
    eprintln!(
        "case ({case}): {} {:?}, {} bond lengths x {} samples",
        cfg.molecule,
        cfg.method,
        cfg.bond_lengths.len(),
        cfg.samples
    );
    let result = run_case(&cfg)?;
    for f in &result.failures {
        eprintln!("failed cell r={} sample={}: {}", f.r, f.sample, f.message);
    }
    let files = emit_tables(&result, &out)?;
    fs::write(out.join("config.json"), cfg.to_json()?)?;
    if !args.no_plots {
        let traces = load_traces(&out)?;
        match emit_plots(&result.records, &traces, &out) {
            Ok(svgs) => eprintln!("wrote {} tables and {} plots to {}", files.len(), svgs.len(), out.display()),
            Err(e) => eprintln!("wrote {} tables to {}; no plots: {e}", files.len(), out.display()),
        }
    }
    if !result.failures.is_empty() && result.records.is_empty() {
        bail!("every cell failed");
    }
    Ok(())
}

fn spectrum(args: SpectrumArgs) -> Result<()> {
    let states = args.molecule.default_states();
    let point = prepare_point(args.molecule, args.r, args.encoding, &states)?;
    print!("{}", point.spectrum.to_csv());
    eprintln!("targets:");
    for (s, e) in states.iter().zip(&point.targets) {
        eprintln!("  {:<10} {e:.10}", s.label);
    }
    Ok(())
}

fn plot(dir: PathBuf) -> Result<()> {
    let records = load_records(&dir).with_context(|| format!("reading {}/energies.csv", dir.display()))?;
    let traces = load_traces(&dir)?;
    let files = emit_plots(&records, &traces, &dir)?;
    for f in files {
        println!("{}", f.display());
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run(a) => run(a),
        Command::Spectrum(a) => spectrum(a),
        Command::Plot { dir } => plot(dir),
    }
}
