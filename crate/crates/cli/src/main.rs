//! `uavg`: command-line driver for the unitary averaging simulations.

mod parse;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use uavg_core::experiments::{
    run_fig3_grid, run_panel_a_c, run_panel_b_d, run_repeatability, summarize, write_grid_csv, write_panel_csv,
    write_summary_csv, CopySource, ExperimentConfig, RunRecord, SweepAxis, TargetSpec,
};
use uavg_core::prelude::*;

use parse::{Counts, Reals};

#[derive(Parser)]
#[command(
    name = "uavg",
    version,
    about = "Noisy boson sampling and unitary averaging simulations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo comparison of unitary and distribution averaging.
    Simulate(SimulateArgs),
    /// Closed-form success probability lower bound on a (depth, photons) grid.
    Grid(GridArgs),
    /// Repeatability witness for a set of interferometer copies.
    Repeat(RepeatArgs),
    /// Rectangular mesh decomposition of a unitary.
    Decompose(DecomposeArgs),
    /// Exact distance and bounds between two transforms.
    Bound(BoundArgs),
    /// Linear combination of unitaries for a contraction.
    Lcu(LcuArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Panel {
    A,
    B,
    C,
    D,
    All,
}

#[derive(Args)]
struct SimulateArgs {
    /// a/c sweep the copy count at one ν; b/d sweep ν at one copy count.
    #[arg(long, value_enum, default_value = "all")]
    panel: Panel,
    /// JSON config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    /// Noise variances, comma separated.
    #[arg(long)]
    nu: Option<Reals>,
    /// Copy counts: "1..8", "1..=8", "1,2,4" or a mix.
    #[arg(long = "N")]
    copies: Option<Counts>,
    /// ν used by the copy-count sweep when several ν are configured.
    #[arg(long, default_value_t = 0.01)]
    fixed_nu: f64,
    /// Copy count used by the ν sweep when several counts are configured.
    #[arg(long = "fixed-N", default_value_t = 4)]
    fixed_copies: usize,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// "haar", "identity" or a path to a matrix JSON file.
    #[arg(long)]
    target: Option<String>,
    /// Seed for a Haar target; derived from the master seed when absent.
    #[arg(long)]
    target_seed: Option<u64>,
    /// Input occupations such as "1,1"; defaults to n single photons.
    #[arg(long)]
    input: Option<FockState>,
    #[arg(long)]
    fresh_target_per_run: bool,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, default_value_t = 0.01)]
    nu: f64,
    #[arg(long, default_value = "1..20")]
    d: Counts,
    #[arg(long, default_value = "1..20")]
    n: Counts,
    #[arg(long, default_value = "fig3.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct RepeatArgs {
    /// Matrix JSON files, one per copy.
    #[arg(long, num_args = 1.., conflicts_with = "target")]
    copies: Vec<PathBuf>,
    /// Target for noisy copies generated from the noise model.
    #[arg(long)]
    target: Option<PathBuf>,
    #[arg(long, default_value_t = 0.01)]
    nu: f64,
    /// Copies per run for noisy generation.
    #[arg(long, default_value_t = 2)]
    count: usize,
    #[arg(long, default_value_t = 300)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    input: FockState,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DecomposeArgs {
    /// Matrix JSON file.
    target: PathBuf,
    /// Pad to uniform depth (every mode passes one element per layer).
    #[arg(long)]
    pad: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundArgs {
    a: PathBuf,
    b: PathBuf,
    /// Photon count; the input is n single photons in the first modes.
    #[arg(long, conflicts_with = "input")]
    n: Option<usize>,
    #[arg(long)]
    input: Option<FockState>,
}

#[derive(Args)]
struct LcuArgs {
    #[arg(long)]
    target: PathBuf,
    /// Input used for the predicted herald probability.
    #[arg(long)]
    input: Option<FockState>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Grid(a) => grid(a),
        Command::Repeat(a) => repeat(a),
        Command::Decompose(a) => decompose(a),
        Command::Bound(a) => bound(a),
        Command::Lcu(a) => lcu(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::ZeroHeraldProbability => 3,
                _ => 2,
            })
        }
    }
}

fn emit_json(value: &serde_json::Value, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(p) => fs::write(p, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn build_config(a: &SimulateArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &a.config {
        Some(p) => serde_json::from_str(&fs::read_to_string(p)?)?,
        None => ExperimentConfig::default(),
    };
    macro_rules! take {
        ($field:ident, $value:expr) => {
            if let Some(v) = $value.clone() {
                cfg.$field = v;
            }
        };
    }
    take!(m, a.m);
    take!(n, a.n);
    take!(nu_values, a.nu.as_ref().map(|r| r.0.clone()));
    take!(n_values, a.copies.as_ref().map(|c| c.0.clone()));
    take!(runs, a.runs);
    take!(master_seed, a.seed);
    if a.input.is_some() {
        cfg.input_state = a.input.clone();
    }
    if a.threads.is_some() {
        cfg.threads = a.threads;
    }
    cfg.fresh_target_per_run |= a.fresh_target_per_run;
    if let Some(t) = &a.target {
        cfg.target = match t.as_str() {
            "haar" => TargetSpec::Haar { seed: None },
            "identity" => TargetSpec::Identity,
            path => TargetSpec::File { path: path.into() },
        };
    }
    if let Some(s) = a.target_seed {
        match &mut cfg.target {
            TargetSpec::Haar { seed } => *seed = Some(s),
            _ => return Err(Error::InvalidArgument("--target-seed needs a Haar target".into())),
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_sweep(dir: &Path, tag: &str, rows: &[RunRecord], axis: SweepAxis) -> Result<()> {
    write_panel_csv(rows, create(&dir.join(format!("panel_{tag}.csv")))?)?;
    write_summary_csv(
        &summarize(rows, axis),
        axis,
        create(&dir.join(format!("summary_{tag}.csv")))?,
    )?;
    Ok(())
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let cfg = build_config(&a)?;
    fs::create_dir_all(&a.out)?;
    let mut files = Vec::new();
    let mut sweeps = serde_json::Map::new();
    let mut depth = None;

    if matches!(a.panel, Panel::A | Panel::C | Panel::All) {
        let mut c = cfg.clone();
        if c.nu_values.len() != 1 {
            c.nu_values = vec![a.fixed_nu];
        }
        let rows = run_panel_a_c(&c)?;
        depth = rows.first().map(|r| r.depth);
        write_sweep(&a.out, "ac", &rows, SweepAxis::Copies)?;
        files.extend(["panel_ac.csv", "summary_ac.csv"]);
        sweeps.insert("ac".into(), json!({"nu_values": c.nu_values, "N_values": c.n_values}));
    }
    if matches!(a.panel, Panel::B | Panel::D | Panel::All) {
        let mut c = cfg.clone();
        if c.n_values.len() != 1 {
            c.n_values = vec![a.fixed_copies];
        }
        let rows = run_panel_b_d(&c)?;
        depth = rows.first().map(|r| r.depth);
        write_sweep(&a.out, "bd", &rows, SweepAxis::Nu)?;
        files.extend(["panel_bd.csv", "summary_bd.csv"]);
        sweeps.insert("bd".into(), json!({"nu_values": c.nu_values, "N_values": c.n_values}));
    }

    let target = if cfg.fresh_target_per_run {
        serde_json::Value::Null
    } else {
        serde_json::to_value(cfg.target_for_run(0)?)?
    };
    let meta = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "input_state": cfg.input()?.to_string(),
        "target_mode": if cfg.fresh_target_per_run { "fresh_per_run" } else { "fixed" },
        "target_matrix": target,
        "depth": depth,
        "sweeps": sweeps,
        "files": files,
    });
    emit_json(&meta, Some(&a.out.join("metadata.json")))?;
    for f in files {
        eprintln!("wrote {}", a.out.join(f).display());
    }
    Ok(())
}

fn grid(a: GridArgs) -> Result<()> {
    let g = run_fig3_grid(a.nu, &a.d.0, &a.n.0)?;
    let mut w = create(&a.out)?;
    write_grid_csv(&a.d.0, &a.n.0, &g, &mut w)?;
    w.flush()?;
    Ok(())
}

fn repeat(a: RepeatArgs) -> Result<()> {
    let source = match &a.target {
        Some(path) => CopySource::Noisy {
            target: ComplexMatrix::read_json(path)?,
            nu: a.nu,
            count: a.count,
        },
        None => CopySource::Fixed(a.copies.iter().map(ComplexMatrix::read_json).collect::<Result<_>>()?),
    };
    let report = run_repeatability(&source, &a.input, a.runs, a.seed)?;
    emit_json(&serde_json::to_value(report)?, a.out.as_deref())
}

fn decompose(a: DecomposeArgs) -> Result<()> {
    let u = ComplexMatrix::read_json(&a.target)?;
    let mut mesh = clements_decompose(&u)?;
    if a.pad {
        mesh = uniform_depth_pad(&mesh)?;
    }
    emit_json(&serde_json::to_value(&mesh)?, a.out.as_deref())
}

fn bound(a: BoundArgs) -> Result<()> {
    let ma = ComplexMatrix::read_json(&a.a)?;
    let mb = ComplexMatrix::read_json(&a.b)?;
    let input = match (a.input, a.n) {
        (Some(s), _) => s,
        (None, Some(n)) => FockState::single_photons(ma.rows(), n)?,
        (None, None) => return Err(Error::InvalidArgument("give --n or --input".into())),
    };
    let n = input.photons();
    let da = heralded_distribution(&ma, &input)?;
    let db = heralded_distribution(&mb, &input)?;
    let (pa, pb) = (da.herald_probability(), db.herald_probability());
    let both_unitary = ma.is_unitary(1e-8) && mb.is_unitary(1e-8);
    let arkhipov = if both_unitary {
        Some(arkhipov_bound(&ma, &mb, n)?)
    } else {
        None
    };
    let t1 = theorem1_bound(&ma, pa, &mb, pb, n)?;
    emit_json(
        &json!({
            "input": input.to_string(),
            "n": n,
            "tvd": tvd(&da, &db)?,
            "arkhipov_bound": arkhipov,
            "theorem1_bound": t1.bound,
            "k": t1.k,
            "invertible": t1.invertible,
            "p_a": pa,
            "p_b": pb,
        }),
        None,
    )
}

fn lcu(a: LcuArgs) -> Result<()> {
    let target = ComplexMatrix::read_json(&a.target)?;
    let (spec, net) = lcu_network(&target)?;
    let input = match a.input {
        Some(s) => s,
        None => FockState::single_photons(target.rows(), 1)?,
    };
    let p = heralded_distribution(&net.effective_transform(), &input)?.herald_probability();
    emit_json(
        &json!({
            "lcu": spec,
            "network": net,
            "input": input.to_string(),
            "herald_probability": p,
        }),
        a.out.as_deref(),
    )
}
