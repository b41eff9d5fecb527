use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use launch_order::explorer::{DEFAULT_MAX_KERNELS, HARD_MAX_KERNELS};
use launch_order::simulator::resolve_names;
use launch_order::{
    build_schedule, derive_footprints, histogram, rank, simulate, sweep, Bin, GpuSpec,
    KernelFootprint, LaunchOrder, SimResult, SweepEntry, SweepReport,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::input::load_inputs;

pub const ORDER_FILE: &str = "order.json";
pub const RANKED_CSV: &str = "ranked.csv";
pub const HISTOGRAM_CSV: &str = "histogram.csv";
pub const DEFAULT_BINS: usize = 20;

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub kernels: PathBuf,
    /// Preset name or GPU spec path; overrides the document's `gpu`.
    pub gpu: Option<String>,
    /// Largest kernel count the permutation sweep accepts.
    pub max_perms: usize,
    pub out: Option<PathBuf>,
    pub bins: usize,
    /// Order file for `simulate` and `rank`.
    pub order: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(kernels: impl Into<PathBuf>) -> Self {
        RunConfig {
            kernels: kernels.into(),
            gpu: None,
            max_perms: DEFAULT_MAX_KERNELS,
            out: None,
            bins: DEFAULT_BINS,
            order: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderRound {
    pub index: usize,
    pub members: Vec<String>,
}

/// What `schedule` writes and `simulate`/`rank` read back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderFile {
    pub rounds: Vec<OrderRound>,
    pub order: Vec<String>,
}

impl From<&LaunchOrder> for OrderFile {
    fn from(o: &LaunchOrder) -> Self {
        OrderFile {
            rounds: o
                .rounds
                .iter()
                .map(|r| OrderRound {
                    index: r.index,
                    members: r.members.clone(),
                })
                .collect(),
            order: o.flattened(),
        }
    }
}

pub fn read_order_file(path: &Path) -> Result<OrderFile, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse {
        path: path.to_owned(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

fn out_file(cfg: &RunConfig, name: &str) -> Result<Option<PathBuf>, CliError> {
    let Some(dir) = &cfg.out else { return Ok(None) };
    fs::create_dir_all(dir).map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
    Ok(Some(dir.join(name)))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::io(format!("writing {}", path.display()), e))
}

fn load(cfg: &RunConfig) -> Result<(Vec<KernelFootprint>, GpuSpec), CliError> {
    let (profiles, spec) = load_inputs(&cfg.kernels, cfg.gpu.as_deref())?;
    let footprints = derive_footprints(&profiles, &spec)?;
    Ok((footprints, spec))
}

fn check_size(count: usize, cfg: &RunConfig) -> Result<(), CliError> {
    let max = cfg.max_perms.min(HARD_MAX_KERNELS);
    if count > max {
        return Err(CliError::TooManyKernels { count, max });
    }
    Ok(())
}

/// Builds the launch order and writes it to `order.json` under `--out`.
pub fn run_schedule(
    cfg: &RunConfig,
) -> Result<(LaunchOrder, Vec<KernelFootprint>, GpuSpec), CliError> {
    let (footprints, spec) = load(cfg)?;
    let order = build_schedule(&footprints, &spec)?;
    if let Some(path) = out_file(cfg, ORDER_FILE)? {
        let mut json = serde_json::to_string_pretty(&OrderFile::from(&order))
            .map_err(|e| CliError::Other(e.to_string()))?;
        json.push('\n');
        write(&path, json.as_bytes())?;
    }
    Ok((order, footprints, spec))
}

pub fn cmd_schedule(cfg: &RunConfig) -> Result<String, CliError> {
    let (order, _, spec) = run_schedule(cfg)?;
    let mut s = String::new();
    for r in &order.rounds {
        let c = &r.combined;
        let _ = writeln!(
            s,
            "round {}: {}  [shm {}/{}, regs {}/{}, warps {}/{}, blocks {}/{}, ratio {:.4}]",
            r.index,
            r.members.join(", "),
            c.shm_bytes,
            spec.shm_bytes_per_sm,
            c.regs,
            spec.regs_per_sm,
            c.warps,
            spec.max_warps_per_sm,
            c.blocks_per_sm,
            spec.max_blocks_per_sm,
            c.ratio,
        );
    }
    let _ = writeln!(s, "order: {}", order.flattened().join(" "));
    Ok(s)
}

/// Simulates the order in `--order`, or the document's kernel order.
pub fn run_simulate(
    cfg: &RunConfig,
) -> Result<(SimResult, Vec<KernelFootprint>, GpuSpec), CliError> {
    let (footprints, spec) = load(cfg)?;
    let order = match &cfg.order {
        Some(path) => resolve_names(&read_order_file(path)?.order, &footprints)?,
        None => (0..footprints.len()).collect(),
    };
    let result = simulate(&order, &footprints, &spec)?;
    Ok((result, footprints, spec))
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<String, CliError> {
    let (result, footprints, _) = run_simulate(cfg)?;
    let mut s = String::new();
    for (r, occ) in result.rounds.iter().zip(&result.occupancy) {
        let members: Vec<String> = r
            .placements
            .iter()
            .map(|p| format!("{}x{}", footprints[p.kernel].kernel, p.blocks))
            .collect();
        let _ = writeln!(
            s,
            "round {}: {}  inst {:.4}  mem {:.4}  time {:.4}  occupancy regs {:.4} shm {:.4} warps {:.4} blocks {:.4}",
            r.index,
            members.join(" "),
            r.inst_units,
            r.mem_units,
            r.time,
            occ.regs,
            occ.shm,
            occ.warps,
            occ.blocks,
        );
    }
    let _ = writeln!(s, "rounds: {}", result.rounds.len());
    let _ = writeln!(s, "total_time: {:.4}", result.total_time);
    Ok(s)
}

#[derive(Debug, Clone)]
pub struct Exploration {
    pub footprints: Vec<KernelFootprint>,
    pub candidate: Vec<usize>,
    pub sweep: Vec<SweepEntry>,
    pub report: SweepReport,
    pub bins: Vec<Bin>,
}

fn explore_with(cfg: &RunConfig, candidate_from_file: bool) -> Result<Exploration, CliError> {
    let (profiles, spec) = load_inputs(&cfg.kernels, cfg.gpu.as_deref())?;
    check_size(profiles.len(), cfg)?;
    if cfg.bins == 0 {
        return Err(CliError::validation("bins", "must be at least 1"));
    }
    let footprints = derive_footprints(&profiles, &spec)?;
    let names = match (&cfg.order, candidate_from_file) {
        (Some(path), true) => read_order_file(path)?.order,
        _ => build_schedule(&footprints, &spec)?.flattened(),
    };
    let candidate = resolve_names(&names, &footprints)?;
    let sweep = sweep(&footprints, &spec, cfg.max_perms)?;
    let report = rank(&candidate, &sweep)?;
    let bins = histogram(&sweep, cfg.bins);
    Ok(Exploration {
        footprints,
        candidate,
        sweep,
        report,
        bins,
    })
}

/// Sweeps every permutation, ranks the scheduler's order and writes the
/// ranked list and histogram CSVs under `--out`.
pub fn run_explore(cfg: &RunConfig) -> Result<Exploration, CliError> {
    let ex = explore_with(cfg, false)?;
    if let Some(path) = out_file(cfg, RANKED_CSV)? {
        write(&path, &ranked_csv(&ex.sweep, &ex.footprints)?)?;
    }
    if let Some(path) = out_file(cfg, HISTOGRAM_CSV)? {
        write(&path, &histogram_csv(&ex.bins)?)?;
    }
    Ok(ex)
}

pub fn cmd_explore(cfg: &RunConfig) -> Result<String, CliError> {
    let ex = run_explore(cfg)?;
    Ok(format_report(&ex))
}

/// Ranks the order in `--order` (default: the scheduler's) among all permutations.
pub fn cmd_rank(cfg: &RunConfig) -> Result<String, CliError> {
    let ex = explore_with(cfg, true)?;
    Ok(format_report(&ex))
}

fn format_report(ex: &Exploration) -> String {
    let r = &ex.report;
    let order: Vec<&str> = ex
        .candidate
        .iter()
        .map(|&i| ex.footprints[i].kernel.as_str())
        .collect();
    let mut s = String::new();
    let _ = writeln!(s, "order: {}", order.join(" "));
    let _ = writeln!(s, "permutations: {}", r.n_permutations);
    let _ = writeln!(s, "optimal: {:.4}", r.best_time);
    let _ = writeln!(s, "worst: {:.4}", r.worst_time);
    let _ = writeln!(s, "median: {:.4}", r.median_time);
    let _ = writeln!(s, "candidate: {:.4}", r.candidate_time);
    let _ = writeln!(s, "percentile rank: {:.4}%", r.percentile_rank);
    let _ = writeln!(s, "speedup over worst: {:.4}", r.speedup_over_worst);
    let _ = writeln!(
        s,
        "deviation from optimal: {:.4}%",
        r.deviation_from_optimal
    );
    s
}

fn csv_error(e: impl std::fmt::Display) -> CliError {
    CliError::Other(format!("csv: {e}"))
}

pub fn ranked_csv(sweep: &[SweepEntry], kernels: &[KernelFootprint]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["rank", "permutation", "time"])
        .map_err(csv_error)?;
    for (i, e) in sweep.iter().enumerate() {
        let perm: Vec<&str> = e
            .permutation
            .iter()
            .map(|&k| kernels[k].kernel.as_str())
            .collect();
        w.write_record([
            (i + 1).to_string(),
            perm.join("-"),
            format!("{:.4}", e.time),
        ])
        .map_err(csv_error)?;
    }
    w.into_inner().map_err(csv_error)
}

pub fn histogram_csv(bins: &[Bin]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["bin_lo", "bin_hi", "count"])
        .map_err(csv_error)?;
    for b in bins {
        w.write_record([
            format!("{:.4}", b.lo),
            format!("{:.4}", b.hi),
            b.count.to_string(),
        ])
        .map_err(csv_error)?;
    }
    w.into_inner().map_err(csv_error)
}
