//! Independent reference implementations used only by tests. None of this
//! calls into the crate's scoring, placement or enumeration code.
#![allow(dead_code)]

use launch_order::{GpuSpec, KernelFootprint};

/// Pair score written straight from the formula, over plain numbers.
pub fn score(a: &KernelFootprint, b: &KernelFootprint, spec: &GpuSpec) -> (bool, f64) {
    let shm = (a.shm_bytes + b.shm_bytes) as f64;
    let regs = (a.regs + b.regs) as f64;
    let warps = (a.warps + b.warps) as f64;
    let blocks = (a.blocks_per_sm + b.blocks_per_sm) as f64;
    let fits = shm <= spec.shm_bytes_per_sm as f64
        && regs <= spec.regs_per_sm as f64
        && warps <= spec.max_warps_per_sm as f64
        && blocks <= spec.max_blocks_per_sm as f64;
    if !fits {
        return (false, 0.0);
    }
    let term = |limit: u32, used: f64| f64::max((limit as f64 - used) / limit as f64, 0.0);
    let mut s = term(spec.shm_bytes_per_sm, shm)
        + term(spec.regs_per_sm, regs)
        + term(spec.max_warps_per_sm, warps);
    let rb = spec.balanced_ratio;
    if (a.ratio <= rb && rb <= b.ratio) || (b.ratio <= rb && rb <= a.ratio) {
        let total_inst = a.inst_count as f64 + b.inst_count as f64;
        let total_mem = a.inst_count as f64 / a.ratio + b.inst_count as f64 / b.ratio;
        let comb = total_inst / total_mem;
        s += f64::max(1.0 - (comb - rb).abs() / rb, 0.0);
    }
    (true, s)
}

/// All permutations of `0..n` by recursive swapping.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, rest: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..rest.len() {
            let k = rest.remove(i);
            prefix.push(k);
            go(prefix, rest, out);
            prefix.pop();
            rest.insert(i, k);
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut (0..n).collect(), &mut out);
    out
}

/// Replays `sm_blocks` of one round against fresh SMs; true when no SM runs
/// out of any resource.
pub fn round_fits(
    sm_blocks: &[Vec<(usize, u32)>],
    kernels: &[KernelFootprint],
    spec: &GpuSpec,
) -> bool {
    sm_blocks.len() == spec.n_sm as usize
        && sm_blocks.iter().all(|residents| {
            let (mut regs, mut shm, mut warps, mut blocks) = (0i64, 0i64, 0i64, 0i64);
            for &(k, n) in residents {
                let b = &kernels[k].block;
                regs += b.regs as i64 * n as i64;
                shm += b.shm_bytes as i64 * n as i64;
                warps += b.warps as i64 * n as i64;
                blocks += n as i64;
            }
            regs <= spec.regs_per_sm as i64
                && shm <= spec.shm_bytes_per_sm as i64
                && warps <= spec.max_warps_per_sm as i64
                && blocks <= spec.max_blocks_per_sm as i64
        })
}
