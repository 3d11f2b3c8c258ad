//! Monte Carlo harness comparing unitary averaging (UA) with distribution
//! averaging (DA).
//!
//! A sweep draws, for every `(ν, run)` work item, one sequence of noisy
//! copies of the target from the stream `derive(master_seed, [ν_index, run])`.
//! The first `N` copies of that sequence feed the row for `N`, so rows for
//! different `N` within a run share their copies. Work items are independent
//! and may run on any number of threads; rows are sorted before they are
//! returned, so output is identical for every worker count.

use std::io::Write;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::averaging::{distribution_average, repeatability_witness, unitary_average};
use crate::cmatrix::{haar_random, ComplexMatrix};
use crate::error::{Error, Result};
use crate::fock::FockState;
use crate::mesh::{clements_decompose, mesh_to_unitary, offset_theta, NoiseModel, NoisyInterferometer};
use crate::rng::RandomStream;
use crate::sampling::{arkhipov_bound, heralded_distribution, ideal_distribution, p_uni, theorem1_bound, tvd};

/// Stream path tag reserved for target generation.
const TARGET_STREAM: u64 = 0xA11C_E5ED_7A26_E700;
/// Stream path tag reserved for bootstrap resampling.
const BOOTSTRAP_STREAM: u64 = 0xB007_57A2_0000_0001;

/// Where the target unitary comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TargetSpec {
    /// Haar-random; the seed defaults to one derived from the master seed.
    Haar {
        #[serde(default)]
        seed: Option<u64>,
    },
    Identity,
    File {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub m: usize,
    pub n: usize,
    pub nu_values: Vec<f64>,
    #[serde(rename = "N_values")]
    pub n_values: Vec<usize>,
    pub runs: usize,
    pub master_seed: u64,
    pub target: TargetSpec,
    /// Defaults to `n` single photons in the first `n` modes.
    pub input_state: Option<FockState>,
    /// Draw a new Haar target for every run instead of one fixed target.
    pub fresh_target_per_run: bool,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            m: 2,
            n: 2,
            nu_values: vec![0.0, 0.005, 0.01, 0.02, 0.05],
            n_values: (1..=8).collect(),
            runs: 300,
            master_seed: 2025,
            target: TargetSpec::Haar { seed: None },
            input_state: None,
            fresh_target_per_run: false,
            threads: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.m == 0 {
            return bad("m must be at least 1".into());
        }
        if self.runs == 0 {
            return bad("runs must be at least 1".into());
        }
        if self.nu_values.is_empty() || self.n_values.is_empty() {
            return bad("nu_values and N_values must be non-empty".into());
        }
        if let Some(nu) = self.nu_values.iter().find(|&&nu| !(0.0..2.0).contains(&nu)) {
            return bad(format!("nu values must lie in [0, 2), got {nu}"));
        }
        if self.n_values.contains(&0) {
            return bad("N values must be at least 1".into());
        }
        if self.threads == Some(0) {
            return bad("threads must be at least 1".into());
        }
        let input = self.input()?;
        if input.modes() != self.m || input.photons() != self.n {
            return bad(format!(
                "input state {input} does not hold {} photons in {} modes",
                self.n, self.m
            ));
        }
        if self.fresh_target_per_run && !matches!(self.target, TargetSpec::Haar { .. }) {
            return bad("fresh targets per run require a Haar target".into());
        }
        Ok(())
    }

    pub fn input(&self) -> Result<FockState> {
        match &self.input_state {
            Some(s) => Ok(s.clone()),
            None => FockState::single_photons(self.m, self.n),
        }
    }

    /// The fixed target, or the target of `run` when targets are fresh per run.
    pub fn target_for_run(&self, run: usize) -> Result<ComplexMatrix> {
        match &self.target {
            TargetSpec::Identity => Ok(ComplexMatrix::identity(self.m)),
            TargetSpec::File { path } => {
                let u = ComplexMatrix::read_json(path)?;
                if u.rows() != self.m || u.cols() != self.m {
                    return Err(Error::InvalidArgument(format!(
                        "target file holds a {}x{} matrix, expected {m}x{m}",
                        u.rows(),
                        u.cols(),
                        m = self.m
                    )));
                }
                u.require_unitary(1e-8)?;
                Ok(u)
            }
            TargetSpec::Haar { seed } => {
                let mut rng = match (self.fresh_target_per_run, seed) {
                    (true, s) => RandomStream::derive(s.unwrap_or(self.master_seed), &[TARGET_STREAM, run as u64]),
                    (false, Some(s)) => RandomStream::from_seed(*s),
                    (false, None) => RandomStream::derive(self.master_seed, &[TARGET_STREAM]),
                };
                Ok(haar_random(self.m, &mut rng))
            }
        }
    }
}

/// One Monte Carlo row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub run: usize,
    #[serde(rename = "N")]
    pub copies: usize,
    pub nu: f64,
    /// `‖D_U − D_{U_avg}‖`.
    pub tvd_ua: f64,
    /// `‖D_U − mean_i D_{U_i}‖`.
    pub tvd_da: f64,
    /// Heralded-transform bound between `U` (p = 1) and `U_avg` (p = p_post).
    pub bound_ua: f64,
    /// `mean_i n‖U − U_i‖`, which bounds `tvd_da` through the triangle
    /// inequality.
    pub bound_da: f64,
    pub p_post: f64,
    pub p_uni: f64,
    /// `U_avg` is invertible, so `bound_ua` is backed by its hypothesis.
    pub invertible: bool,
    /// Uniform depth of the noisy mesh.
    #[serde(skip)]
    pub depth: usize,
    #[serde(skip)]
    nu_index: usize,
}

fn run_work_item(
    cfg: &ExperimentConfig,
    input: &FockState,
    fixed: Option<&NoisyInterferometer>,
    nu_index: usize,
    run: usize,
) -> Result<Vec<RunRecord>> {
    let nu = cfg.nu_values[nu_index];
    let owned;
    let dev = match fixed {
        Some(d) => d,
        None => {
            owned = NoisyInterferometer::new(&cfg.target_for_run(run)?)?;
            &owned
        }
    };
    let target = dev.target();
    let ideal = ideal_distribution(target, input)?;
    let noise = NoiseModel::gaussian(nu)?;
    let mut rng = RandomStream::derive(cfg.master_seed, &[nu_index as u64, run as u64]);
    let max_n = *cfg.n_values.iter().max().expect("validated non-empty");
    let copies: Vec<ComplexMatrix> = (0..max_n).map(|_| dev.sample(&noise, &mut rng)).collect();
    let copy_dists = copies
        .iter()
        .map(|u| ideal_distribution(u, input))
        .collect::<Result<Vec<_>>>()?;
    let copy_bounds = copies
        .iter()
        .map(|u| arkhipov_bound(target, u, cfg.n))
        .collect::<Result<Vec<_>>>()?;
    let p_uni = p_uni(nu, dev.depth(), cfg.n)?;

    cfg.n_values
        .iter()
        .map(|&n_copies| {
            let used = &copies[..n_copies];
            let avg = unitary_average(used)?;
            let ua = heralded_distribution(&avg, input)?;
            let p_post = ua.herald_probability();
            let da = distribution_average(&copy_dists[..n_copies])?;
            let bound = theorem1_bound(target, 1.0, &avg, p_post, cfg.n)?;
            Ok(RunRecord {
                run,
                copies: n_copies,
                nu,
                tvd_ua: tvd(&ideal, &ua)?,
                tvd_da: tvd(&ideal, &da)?,
                bound_ua: bound.bound,
                bound_da: copy_bounds[..n_copies].iter().sum::<f64>() / n_copies as f64,
                p_post,
                p_uni,
                invertible: bound.invertible,
                depth: dev.depth(),
                nu_index,
            })
        })
        .collect()
}

fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Runs every `(ν, N, run)` combination of the config. Rows are ordered by
/// the position of `ν` in `nu_values`, then the position of `N` in
/// `N_values`, then run index.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let input = cfg.input()?;
    let fixed = if cfg.fresh_target_per_run {
        None
    } else {
        Some(NoisyInterferometer::new(&cfg.target_for_run(0)?)?)
    };
    let items: Vec<(usize, usize)> = (0..cfg.nu_values.len())
        .flat_map(|i| (0..cfg.runs).map(move |r| (i, r)))
        .collect();
    let chunks: Vec<Vec<RunRecord>> = in_pool(cfg.threads, || {
        items
            .par_iter()
            .map(|&(i, r)| run_work_item(cfg, &input, fixed.as_ref(), i, r))
            .collect::<Result<Vec<_>>>()
    })??;
    let n_pos = |n: usize| cfg.n_values.iter().position(|&x| x == n).unwrap_or(usize::MAX);
    let mut rows: Vec<RunRecord> = chunks.into_iter().flatten().collect();
    rows.sort_by_key(|r| (r.nu_index, n_pos(r.copies), r.run));
    Ok(rows)
}

/// TVD and success probability against the number of copies at one `ν`.
pub fn run_panel_a_c(cfg: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    if cfg.nu_values.len() != 1 {
        return Err(Error::InvalidArgument(format!(
            "the N sweep takes exactly one nu value, got {}",
            cfg.nu_values.len()
        )));
    }
    run_sweep(cfg)
}

/// TVD and success probability against `ν` at one copy count.
pub fn run_panel_b_d(cfg: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    if cfg.n_values.len() != 1 {
        return Err(Error::InvalidArgument(format!(
            "the nu sweep takes exactly one N value, got {}",
            cfg.n_values.len()
        )));
    }
    run_sweep(cfg)
}

/// Seventeen significant digits, enough to round-trip an `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub const PANEL_HEADER: &str = "run,N,nu,tvd_ua,tvd_da,bound_ua,bound_da,p_post,p_uni,invertible_flag";

/// Writes panel rows as CSV with LF line endings.
pub fn write_panel_csv<W: Write>(rows: &[RunRecord], mut out: W) -> Result<()> {
    writeln!(out, "{PANEL_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.run,
            r.copies,
            format_float(r.nu),
            format_float(r.tvd_ua),
            format_float(r.tvd_da),
            format_float(r.bound_ua),
            format_float(r.bound_da),
            format_float(r.p_post),
            format_float(r.p_uni),
            u8::from(r.invertible)
        )?;
    }
    Ok(())
}

/// Sample mean and standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanStderr {
    pub mean: f64,
    pub stderr: f64,
}

impl MeanStderr {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let stderr = if xs.len() > 1 {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
        } else {
            0.0
        };
        Self { mean, stderr }
    }
}

/// Which config axis a summary groups by.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Copies,
    Nu,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub x: f64,
    pub tvd_ua: MeanStderr,
    pub tvd_da: MeanStderr,
    pub bound_ua: MeanStderr,
    pub bound_da: MeanStderr,
    pub p_post: MeanStderr,
    pub p_uni: f64,
    pub runs: usize,
}

/// Per-x mean and standard error of every column, in first-seen x order.
pub fn summarize(rows: &[RunRecord], axis: SweepAxis) -> Vec<SummaryRow> {
    let key = |r: &RunRecord| match axis {
        SweepAxis::Copies => r.copies as f64,
        SweepAxis::Nu => r.nu,
    };
    let mut xs: Vec<f64> = Vec::new();
    for r in rows {
        let k = key(r);
        if !xs.contains(&k) {
            xs.push(k);
        }
    }
    xs.into_iter()
        .map(|x| {
            let group: Vec<&RunRecord> = rows.iter().filter(|r| key(r) == x).collect();
            let col = |f: fn(&RunRecord) -> f64| MeanStderr::of(&group.iter().map(|r| f(r)).collect::<Vec<_>>());
            SummaryRow {
                x,
                tvd_ua: col(|r| r.tvd_ua),
                tvd_da: col(|r| r.tvd_da),
                bound_ua: col(|r| r.bound_ua),
                bound_da: col(|r| r.bound_da),
                p_post: col(|r| r.p_post),
                p_uni: group[0].p_uni,
                runs: group.len(),
            }
        })
        .collect()
}

pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], axis: SweepAxis, mut out: W) -> Result<()> {
    let x = match axis {
        SweepAxis::Copies => "N",
        SweepAxis::Nu => "nu",
    };
    writeln!(
        out,
        "{x},runs,tvd_ua_mean,tvd_ua_stderr,tvd_da_mean,tvd_da_stderr,bound_ua_mean,bound_ua_stderr,\
         bound_da_mean,bound_da_stderr,p_post_mean,p_post_stderr,p_uni"
    )?;
    for r in rows {
        let xs = match axis {
            SweepAxis::Copies => format!("{}", r.x as usize),
            SweepAxis::Nu => format_float(r.x),
        };
        let cells: Vec<String> = [r.tvd_ua, r.tvd_da, r.bound_ua, r.bound_da, r.p_post]
            .iter()
            .flat_map(|s| [format_float(s.mean), format_float(s.stderr)])
            .collect();
        writeln!(out, "{xs},{},{},{}", r.runs, cells.join(","), format_float(r.p_uni))?;
    }
    Ok(())
}

/// `p_uni(ν, d, n)` on a grid, indexed `[d][n]`.
pub fn run_fig3_grid(nu: f64, d_range: &[usize], n_range: &[usize]) -> Result<Vec<Vec<f64>>> {
    d_range
        .iter()
        .map(|&d| n_range.iter().map(|&n| p_uni(nu, d, n)).collect())
        .collect()
}

pub fn write_grid_csv<W: Write>(d_range: &[usize], n_range: &[usize], grid: &[Vec<f64>], mut out: W) -> Result<()> {
    writeln!(out, "d,n,p_uni")?;
    for (row, &d) in grid.iter().zip(d_range) {
        for (&p, &n) in row.iter().zip(n_range) {
            writeln!(out, "{d},{n},{}", format_float(p))?;
        }
    }
    Ok(())
}

/// Copies handed to the repeatability benchmark.
#[derive(Debug, Clone)]
pub enum CopySource {
    /// Measured or specified transforms; the witness is exact.
    Fixed(Vec<ComplexMatrix>),
    /// Fresh noisy realisations of `target` for every run.
    Noisy {
        target: ComplexMatrix,
        nu: f64,
        count: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepeatabilityReport {
    pub copies: usize,
    pub input: String,
    /// Exact witness for fixed copies, mean witness over runs otherwise.
    pub witness: f64,
    pub runs: usize,
    /// Standard error over runs (noisy copies only).
    pub stderr: Option<f64>,
    /// 95% percentile bootstrap interval of the mean (noisy copies only).
    pub ci95: Option<[f64; 2]>,
}

/// Ancilla-click probability of a uniform averaging network over the given
/// copies. For noisy copies the witness is averaged over `runs` draws and
/// a bootstrap interval is attached.
pub fn run_repeatability(
    source: &CopySource,
    input: &FockState,
    runs: usize,
    seed: u64,
) -> Result<RepeatabilityReport> {
    match source {
        CopySource::Fixed(copies) => {
            if copies.len() < 2 {
                return Err(Error::InvalidArgument("repeatability needs at least two copies".into()));
            }
            for c in copies {
                c.require_unitary(1e-8)?;
            }
            Ok(RepeatabilityReport {
                copies: copies.len(),
                input: input.to_string(),
                witness: repeatability_witness(copies, input)?,
                runs: 1,
                stderr: None,
                ci95: None,
            })
        }
        CopySource::Noisy { target, nu, count } => {
            if *count < 2 || runs == 0 {
                return Err(Error::InvalidArgument(
                    "noisy repeatability needs at least two copies and one run".into(),
                ));
            }
            let dev = NoisyInterferometer::new(target)?;
            let noise = NoiseModel::gaussian(*nu)?;
            let samples = (0..runs)
                .into_par_iter()
                .map(|r| {
                    let mut rng = RandomStream::derive(seed, &[r as u64]);
                    let copies: Vec<_> = (0..*count).map(|_| dev.sample(&noise, &mut rng)).collect();
                    repeatability_witness(&copies, input)
                })
                .collect::<Result<Vec<f64>>>()?;
            let stats = MeanStderr::of(&samples);
            Ok(RepeatabilityReport {
                copies: *count,
                input: input.to_string(),
                witness: stats.mean,
                runs,
                stderr: Some(stats.stderr),
                ci95: Some(bootstrap_ci(&samples, 1000, seed)),
            })
        }
    }
}

fn bootstrap_ci(samples: &[f64], resamples: usize, seed: u64) -> [f64; 2] {
    let mut rng = RandomStream::derive(seed, &[BOOTSTRAP_STREAM]);
    let n = samples.len();
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| {
            (0..n)
                .map(|_| samples[((rng.uniform() * n as f64) as usize).min(n - 1)])
                .sum::<f64>()
                / n as f64
        })
        .collect();
    means.sort_by(f64::total_cmp);
    let at = |q: f64| means[((q * (resamples - 1) as f64).round() as usize).min(resamples - 1)];
    [at(0.025), at(0.975)]
}

/// Two copies of `u` that differ only by `offset` radians on the θ of the
/// first beamsplitter of its Clements mesh.
pub fn theta_offset_pair(u: &ComplexMatrix, offset: f64) -> Result<[ComplexMatrix; 2]> {
    let mesh = clements_decompose(u)?;
    let reference = mesh_to_unitary(&mesh)?;
    let shifted = mesh_to_unitary(&offset_theta(&mesh, 0, offset)?)?;
    Ok([reference, shifted])
}
