//! Exhaustive launch-order exploration.
//!
//! [`sweep`] simulates every permutation of a kernel set, [`rank`] places a
//! candidate order within that population and [`histogram`] bins the time
//! distribution.

use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::ExploreError;
use crate::model::{GpuSpec, KernelFootprint};
use crate::simulator::simulate_time;

/// Default cap on the kernel count [`sweep`] accepts.
pub const DEFAULT_MAX_KERNELS: usize = 8;
/// No sweep beyond this many kernels, whatever the caller asks for.
pub const HARD_MAX_KERNELS: usize = 10;

/// Relative tolerance under which two model times count as tied. Permutations
/// with identical work can differ in the last few bits of their sums.
pub const TIME_TIE_REL: f64 = 1e-9;

/// One simulated permutation: indices into the swept kernel slice.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepEntry {
    pub permutation: Vec<usize>,
    pub time: f64,
}

/// Where a candidate order falls among all permutations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepReport {
    pub n_permutations: usize,
    pub best_time: f64,
    pub worst_time: f64,
    pub median_time: f64,
    pub candidate_time: f64,
    /// Percentage of permutations at least as slow as the candidate.
    pub percentile_rank: f64,
    pub speedup_over_worst: f64,
    /// `(candidate - best) / best`, in percent.
    pub deviation_from_optimal: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

/// Simulates every permutation of `kernels`, sorted by ascending time with
/// ties in lexicographic permutation order.
pub fn sweep(
    kernels: &[KernelFootprint],
    spec: &GpuSpec,
    max_n: usize,
) -> Result<Vec<SweepEntry>, ExploreError> {
    let n = kernels.len();
    let cap = max_n.min(HARD_MAX_KERNELS);
    if n > cap {
        return Err(ExploreError::TooManyKernels { count: n, max: cap });
    }
    // permutations() yields lexicographic order; the stable sort keeps it for ties
    let perms: Vec<Vec<usize>> = (0..n).permutations(n).collect();
    let mut entries = perms
        .into_par_iter()
        .map(|permutation| {
            let time = simulate_time(&permutation, kernels, spec)?;
            Ok(SweepEntry { permutation, time })
        })
        .collect::<Result<Vec<_>, crate::error::SimError>>()?;
    entries.sort_by(|a, b| a.time.total_cmp(&b.time));
    Ok(entries)
}

fn ties(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIME_TIE_REL * a.abs().max(b.abs())
}

/// Ranks `candidate` (a permutation of the swept kernel indices) against the
/// sweep population. Ties count in the candidate's favour.
pub fn rank(candidate: &[usize], sweep: &[SweepEntry]) -> Result<SweepReport, ExploreError> {
    if sweep.is_empty() {
        return Err(ExploreError::EmptySweep);
    }
    let entry = sweep
        .iter()
        .find(|e| e.permutation == candidate)
        .ok_or_else(|| {
            ExploreError::MismatchedKernelSet(format!("{candidate:?} is not a swept permutation"))
        })?;
    let candidate_time = entry.time;

    let n = sweep.len();
    let best_time = sweep[0].time;
    let worst_time = sweep[n - 1].time;
    let median_time = sweep[(n - 1) / 2].time;
    let at_least_as_slow = sweep
        .iter()
        .filter(|e| e.time >= candidate_time || ties(e.time, candidate_time))
        .count();

    let (speedup_over_worst, deviation_from_optimal) = if candidate_time > 0.0 {
        (
            worst_time / candidate_time,
            (candidate_time - best_time) / best_time * 100.0,
        )
    } else {
        (1.0, 0.0)
    };
    Ok(SweepReport {
        n_permutations: n,
        best_time,
        worst_time,
        median_time,
        candidate_time,
        percentile_rank: 100.0 * at_least_as_slow as f64 / n as f64,
        speedup_over_worst,
        deviation_from_optimal,
    })
}

/// Equal-width bins over `[best, worst]`; the top edge belongs to the last bin.
pub fn histogram(sweep: &[SweepEntry], bins: usize) -> Vec<Bin> {
    let bins = bins.max(1);
    let Some(first) = sweep.first() else {
        return Vec::new();
    };
    let lo = first.time;
    let hi = sweep[sweep.len() - 1].time;
    let width = (hi - lo) / bins as f64;

    let mut out: Vec<Bin> = (0..bins)
        .map(|b| Bin {
            lo: lo + width * b as f64,
            hi: if b + 1 == bins {
                hi
            } else {
                lo + width * (b + 1) as f64
            },
            count: 0,
        })
        .collect();
    for e in sweep {
        let b = if width > 0.0 {
            (((e.time - lo) / width) as usize).min(bins - 1)
        } else {
            0
        };
        out[b].count += 1;
    }
    out
}
