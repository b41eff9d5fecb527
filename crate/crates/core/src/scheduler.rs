//! Greedy launch-order construction.
//!
//! Each execution round is seeded with the highest-scoring feasible kernel
//! pair and then grown one kernel at a time, always taking the remaining
//! kernel that scores best against the round's combined profile, until
//! nothing else fits. A pair scores higher the more register, shared-memory
//! and warp capacity it leaves free, and earns a bonus when one kernel is
//! compute-bound and the other memory-bound and their mix lands close to the
//! device's balanced ratio.

use serde::Serialize;

use crate::error::ModelError;
use crate::model::{profile_combine, CombinedProfile, Footprint, GpuSpec, KernelFootprint};

/// Score of one kernel pair. Infeasible pairs always carry a zero value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairScore {
    pub i: String,
    pub j: String,
    pub feasible: bool,
    pub value: f64,
}

/// One execution round of a launch order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Round {
    /// 1-based.
    pub index: usize,
    /// Members by non-increasing shared-memory footprint.
    pub members: Vec<String>,
    pub combined: CombinedProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LaunchOrder {
    pub rounds: Vec<Round>,
}

impl LaunchOrder {
    /// Concatenation of all round members: the order kernels are launched in.
    pub fn flattened(&self) -> Vec<String> {
        self.rounds
            .iter()
            .flat_map(|r| r.members.iter().cloned())
            .collect()
    }
}

/// Whether `a` and `b` together stay within all four per-SM limits.
pub fn fits_together<A: Footprint + ?Sized>(a: &A, b: &KernelFootprint, spec: &GpuSpec) -> bool {
    let sum = |x: u32, y: u32| x as u64 + y as u64;
    sum(a.shm_bytes(), b.shm_bytes) <= spec.shm_bytes_per_sm as u64
        && sum(a.regs(), b.regs) <= spec.regs_per_sm as u64
        && sum(a.warps(), b.warps) <= spec.max_warps_per_sm as u64
        && sum(a.blocks_per_sm(), b.blocks_per_sm) <= spec.max_blocks_per_sm as u64
}

fn slack(limit: u32, a: u32, b: u32) -> f64 {
    let limit = limit as f64;
    ((limit - a as f64 - b as f64) / limit).max(0.0)
}

/// Bonus for pairing kernels on opposite sides of the balanced ratio; zero
/// when both sit on the same side.
fn balance_bonus(inst_a: u64, ratio_a: f64, inst_b: u64, ratio_b: f64, balanced: f64) -> f64 {
    let straddles = (ratio_a <= balanced && balanced <= ratio_b)
        || (ratio_b <= balanced && balanced <= ratio_a);
    if !straddles {
        return 0.0;
    }
    let mixed = crate::model::combined_ratio(inst_a, ratio_a, inst_b, ratio_b);
    (1.0 - (mixed - balanced).abs() / balanced).max(0.0)
}

pub fn score_pair<A: Footprint + ?Sized>(a: &A, b: &KernelFootprint, spec: &GpuSpec) -> PairScore {
    let (i, j) = (a.label(), b.kernel.clone());
    if !fits_together(a, b, spec) {
        return PairScore {
            i,
            j,
            feasible: false,
            value: 0.0,
        };
    }
    let value = slack(spec.shm_bytes_per_sm, a.shm_bytes(), b.shm_bytes)
        + slack(spec.regs_per_sm, a.regs(), b.regs)
        + slack(spec.max_warps_per_sm, a.warps(), b.warps)
        + balance_bonus(
            a.inst_count(),
            a.ratio(),
            b.inst_count,
            b.ratio,
            spec.balanced_ratio,
        );
    PairScore {
        i,
        j,
        feasible: true,
        value,
    }
}

/// Scores every ordered pair. The diagonal is infeasible.
pub fn score_matrix(kernels: &[KernelFootprint], spec: &GpuSpec) -> Vec<Vec<PairScore>> {
    kernels
        .iter()
        .enumerate()
        .map(|(i, a)| {
            kernels
                .iter()
                .enumerate()
                .map(|(j, b)| {
                    if i == j {
                        PairScore {
                            i: a.kernel.clone(),
                            j: b.kernel.clone(),
                            feasible: false,
                            value: 0.0,
                        }
                    } else {
                        score_pair(a, b, spec)
                    }
                })
                .collect()
        })
        .collect()
}

/// Inserts `idx` after every member with at least its shared-memory footprint.
fn insert_by_shm(members: &mut Vec<usize>, idx: usize, kernels: &[KernelFootprint]) {
    let shm = kernels[idx].shm_bytes;
    let pos = members
        .iter()
        .position(|&m| kernels[m].shm_bytes < shm)
        .unwrap_or(members.len());
    members.insert(pos, idx);
}

/// Builds a launch order for `kernels` (given as derived footprints).
///
/// Ties between equal-scoring pairs go to the lexicographically smallest
/// input-index pair, and between equal-scoring candidates to the smallest
/// input index.
pub fn build_schedule(
    kernels: &[KernelFootprint],
    spec: &GpuSpec,
) -> Result<LaunchOrder, ModelError> {
    spec.validate()?;
    let mut remaining: Vec<usize> = (0..kernels.len()).collect();
    let mut rounds: Vec<(Vec<usize>, CombinedProfile)> = Vec::new();

    while !remaining.is_empty() {
        if remaining.len() == 1 {
            let k = remaining.pop().unwrap();
            rounds.push((vec![k], CombinedProfile::from(&kernels[k])));
            break;
        }

        // best feasible pair over the surviving kernels
        let mut best: Option<(usize, usize, f64)> = None;
        for (x, &a) in remaining.iter().enumerate() {
            for &b in &remaining[x + 1..] {
                let s = score_pair(&kernels[a], &kernels[b], spec);
                if s.feasible && best.is_none_or(|(_, _, v)| s.value > v) {
                    best = Some((a, b, s.value));
                }
            }
        }

        let Some((a, b, _)) = best else {
            // nothing pairs up: run the rest one per round, largest shm first
            let mut rest = std::mem::take(&mut remaining);
            rest.sort_by_key(|&k| std::cmp::Reverse(kernels[k].shm_bytes));
            rounds.extend(
                rest.into_iter()
                    .map(|k| (vec![k], CombinedProfile::from(&kernels[k]))),
            );
            break;
        };

        remaining.retain(|&k| k != a && k != b);
        let mut members = vec![a];
        insert_by_shm(&mut members, b, kernels);
        let mut combined = profile_combine(&kernels[a], &kernels[b]);

        loop {
            let mut pick: Option<(usize, f64)> = None;
            for &c in &remaining {
                if !fits_together(&combined, &kernels[c], spec) {
                    continue;
                }
                let s = score_pair(&combined, &kernels[c], spec);
                if pick.is_none_or(|(_, v)| s.value > v) {
                    pick = Some((c, s.value));
                }
            }
            let Some((c, _)) = pick else { break };
            remaining.retain(|&k| k != c);
            insert_by_shm(&mut members, c, kernels);
            combined = profile_combine(&combined, &kernels[c]);
        }
        rounds.push((members, combined));
    }

    Ok(LaunchOrder {
        rounds: rounds
            .into_iter()
            .enumerate()
            .map(|(r, (members, combined))| Round {
                index: r + 1,
                members: members.iter().map(|&k| kernels[k].kernel.clone()).collect(),
                combined,
            })
            .collect(),
    })
}
