//! Analytical execution-round model.
//!
//! Blocks are dispatched strictly in launch order. Each block goes to the
//! first SM, scanning round-robin from a cursor, that still has room for its
//! registers, shared memory, warps and a block slot. When the next block fits
//! nowhere the current round closes, every SM is emptied and dispatch resumes
//! in a fresh round. Rounds execute one after another.
//!
//! A round's time is `max(inst_units, balanced_ratio * mem_units)`: compute
//! retires one instruction unit per time unit and memory one memory unit per
//! `balanced_ratio` time units. Each kernel contributes work in proportion to
//! the fraction of its blocks placed in the round.
//!
//! Sums are taken in a canonical (sorted) order and memory units are
//! accumulated per distinct ratio, so rounds with the same work composition
//! produce bit-identical times whatever order their kernels arrived in.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::SimError;
use crate::model::{BlockDemand, GpuSpec, KernelFootprint};
use crate::scheduler::LaunchOrder;

/// Remaining capacity of one SM within the current round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SmState {
    pub free_regs: u32,
    pub free_shm_bytes: u32,
    pub free_warp_slots: u32,
    pub free_block_slots: u32,
}

impl SmState {
    pub fn empty(spec: &GpuSpec) -> Self {
        SmState {
            free_regs: spec.regs_per_sm,
            free_shm_bytes: spec.shm_bytes_per_sm,
            free_warp_slots: spec.max_warps_per_sm,
            free_block_slots: spec.max_blocks_per_sm,
        }
    }

    pub fn can_host(&self, block: &BlockDemand) -> bool {
        self.free_block_slots >= 1
            && self.free_regs >= block.regs
            && self.free_shm_bytes >= block.shm_bytes
            && self.free_warp_slots >= block.warps
    }

    /// Reserves room for `block`, or returns `None` if it would overflow.
    pub fn host(&self, block: &BlockDemand) -> Option<SmState> {
        Some(SmState {
            free_regs: self.free_regs.checked_sub(block.regs)?,
            free_shm_bytes: self.free_shm_bytes.checked_sub(block.shm_bytes)?,
            free_warp_slots: self.free_warp_slots.checked_sub(block.warps)?,
            free_block_slots: self.free_block_slots.checked_sub(1)?,
        })
    }
}

/// Blocks of one kernel placed in a round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Placement {
    /// Index into the kernel slice the simulation ran over.
    pub kernel: usize,
    pub blocks: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlacedRound {
    /// 1-based.
    pub index: usize,
    /// Per kernel, in dispatch order.
    pub placements: Vec<Placement>,
    /// `sm_blocks[s]` lists `(kernel, blocks)` resident on SM `s`.
    pub sm_blocks: Vec<Vec<(usize, u32)>>,
    pub inst_units: f64,
    pub mem_units: f64,
    pub time: f64,
}

impl PlacedRound {
    pub fn blocks(&self) -> u32 {
        self.placements.iter().map(|p| p.blocks).sum()
    }
}

/// Average per-SM utilisation of each resource over one round, in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Occupancy {
    pub regs: f64,
    pub shm: f64,
    pub warps: f64,
    pub blocks: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub rounds: Vec<PlacedRound>,
    pub occupancy: Vec<Occupancy>,
    pub total_time: f64,
}

/// `max(inst_units, balanced_ratio * mem_units)`.
pub fn round_time(round: &PlacedRound, spec: &GpuSpec) -> f64 {
    time_of(round.inst_units, round.mem_units, spec)
}

fn time_of(inst_units: f64, mem_units: f64, spec: &GpuSpec) -> f64 {
    inst_units.max(spec.balanced_ratio * mem_units)
}

fn ordered_sum(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    xs.into_iter().sum()
}

fn work_units(placements: &[Placement], kernels: &[KernelFootprint]) -> (f64, f64) {
    let mut by_ratio: HashMap<u64, (f64, Vec<f64>)> = HashMap::new();
    let mut all = Vec::with_capacity(placements.len());
    for p in placements {
        let k = &kernels[p.kernel];
        let inst = k.inst_count as f64 * p.blocks as f64 / k.grid_blocks as f64;
        all.push(inst);
        by_ratio
            .entry(k.ratio.to_bits())
            .or_insert_with(|| (k.ratio, Vec::new()))
            .1
            .push(inst);
    }
    let mem = by_ratio
        .into_values()
        .map(|(ratio, insts)| ordered_sum(insts) / ratio)
        .collect();
    (ordered_sum(all), ordered_sum(mem))
}

fn close_round(
    index: usize,
    placements: Vec<Placement>,
    sm_blocks: Vec<Vec<(usize, u32)>>,
    kernels: &[KernelFootprint],
    spec: &GpuSpec,
) -> PlacedRound {
    let (inst_units, mem_units) = work_units(&placements, kernels);
    PlacedRound {
        index,
        placements,
        sm_blocks,
        inst_units,
        mem_units,
        time: time_of(inst_units, mem_units, spec),
    }
}

/// Dispatches every block of `order` (indices into `kernels`) onto the SMs and
/// splits them into execution rounds.
pub fn place_blocks(
    order: &[usize],
    kernels: &[KernelFootprint],
    spec: &GpuSpec,
) -> Result<Vec<PlacedRound>, SimError> {
    spec.validate()?;
    let n_sm = spec.n_sm as usize;
    let fresh = SmState::empty(spec);

    let mut rounds = Vec::new();
    let mut sms = vec![fresh; n_sm];
    let mut sm_blocks: Vec<Vec<(usize, u32)>> = vec![Vec::new(); n_sm];
    let mut placements: Vec<Placement> = Vec::new();
    let mut cursor = 0usize;

    for &k in order {
        let kernel = kernels
            .get(k)
            .ok_or_else(|| SimError::MismatchedKernelSet(format!("index {k} out of range")))?;
        kernel.block.check_fits(&kernel.kernel, spec)?;
        for _ in 0..kernel.grid_blocks {
            let slot = (0..n_sm)
                .map(|step| (cursor + step) % n_sm)
                .find(|&s| sms[s].can_host(&kernel.block));
            let s = match slot {
                Some(s) => s,
                None => {
                    rounds.push(close_round(
                        rounds.len() + 1,
                        std::mem::take(&mut placements),
                        std::mem::replace(&mut sm_blocks, vec![Vec::new(); n_sm]),
                        kernels,
                        spec,
                    ));
                    sms.fill(fresh);
                    0
                }
            };
            sms[s] = sms[s].host(&kernel.block).expect("checked by can_host");
            cursor = (s + 1) % n_sm;

            match placements.last_mut() {
                Some(p) if p.kernel == k => p.blocks += 1,
                _ => placements.push(Placement {
                    kernel: k,
                    blocks: 1,
                }),
            }
            match sm_blocks[s].last_mut() {
                Some((kk, n)) if *kk == k => *n += 1,
                _ => sm_blocks[s].push((k, 1)),
            }
        }
    }
    if !placements.is_empty() {
        rounds.push(close_round(
            rounds.len() + 1,
            placements,
            sm_blocks,
            kernels,
            spec,
        ));
    }
    Ok(rounds)
}

fn occupancy(round: &PlacedRound, kernels: &[KernelFootprint], spec: &GpuSpec) -> Occupancy {
    let (mut regs, mut shm, mut warps, mut blocks) = (0u64, 0u64, 0u64, 0u64);
    for residents in &round.sm_blocks {
        for &(k, n) in residents {
            let b = &kernels[k].block;
            regs += b.regs as u64 * n as u64;
            shm += b.shm_bytes as u64 * n as u64;
            warps += b.warps as u64 * n as u64;
            blocks += n as u64;
        }
    }
    let n_sm = spec.n_sm as f64;
    let frac = |used: u64, limit: u32| used as f64 / (limit as f64 * n_sm);
    Occupancy {
        regs: frac(regs, spec.regs_per_sm),
        shm: frac(shm, spec.shm_bytes_per_sm),
        warps: frac(warps, spec.max_warps_per_sm),
        blocks: frac(blocks, spec.max_blocks_per_sm),
    }
}

fn check_permutation(order: &[usize], n: usize) -> Result<(), SimError> {
    if order.len() != n {
        return Err(SimError::MismatchedKernelSet(format!(
            "order has {} entries for {n} kernels",
            order.len()
        )));
    }
    let mut seen = vec![false; n];
    for &k in order {
        match seen.get_mut(k) {
            Some(s) if !*s => *s = true,
            Some(_) => {
                return Err(SimError::MismatchedKernelSet(format!(
                    "kernel {k} repeated"
                )))
            }
            None => {
                return Err(SimError::MismatchedKernelSet(format!(
                    "index {k} out of range"
                )))
            }
        }
    }
    Ok(())
}

/// Simulates launching `kernels` in the order given by `order`, a permutation
/// of `0..kernels.len()`.
pub fn simulate(
    order: &[usize],
    kernels: &[KernelFootprint],
    spec: &GpuSpec,
) -> Result<SimResult, SimError> {
    check_permutation(order, kernels.len())?;
    let rounds = place_blocks(order, kernels, spec)?;
    let occupancy = rounds.iter().map(|r| occupancy(r, kernels, spec)).collect();
    let total_time = ordered_sum(rounds.iter().map(|r| r.time).collect());
    Ok(SimResult {
        rounds,
        occupancy,
        total_time,
    })
}

/// Total model time only; skips the occupancy summary.
pub fn simulate_time(
    order: &[usize],
    kernels: &[KernelFootprint],
    spec: &GpuSpec,
) -> Result<f64, SimError> {
    check_permutation(order, kernels.len())?;
    let rounds = place_blocks(order, kernels, spec)?;
    Ok(ordered_sum(rounds.iter().map(|r| r.time).collect()))
}

/// Maps kernel names to indices into `kernels`.
pub fn resolve_names<S: AsRef<str>>(
    names: &[S],
    kernels: &[KernelFootprint],
) -> Result<Vec<usize>, SimError> {
    let index: HashMap<&str, usize> = kernels
        .iter()
        .enumerate()
        .map(|(i, k)| (k.kernel.as_str(), i))
        .collect();
    names
        .iter()
        .map(|n| {
            index
                .get(n.as_ref())
                .copied()
                .ok_or_else(|| SimError::UnknownKernel(n.as_ref().to_owned()))
        })
        .collect()
}

/// Simulates a scheduler-produced launch order.
pub fn simulate_launch_order(
    order: &LaunchOrder,
    kernels: &[KernelFootprint],
    spec: &GpuSpec,
) -> Result<SimResult, SimError> {
    let idx = resolve_names(&order.flattened(), kernels)?;
    simulate(&idx, kernels, spec)
}
