//! Benchmark kernel sets mirroring the six-kernel EP/BS experiments and an
//! eight-kernel mixed workload, all on the GTX 580 preset.
//!
//! Only launch geometry, shared memory and ratios are taken from the
//! published experiment setup. Register counts are fixed per application
//! (EP 20, BS 16 per thread), and instruction counts follow one synthetic
//! convention: `1000 * warps_per_block * grid_blocks`. The ES and SW kernels
//! of the eight-kernel set are synthetic profiles, one compute-heavy and one
//! memory-heavy application.

use crate::model::{KernelProfile, WARP_SIZE};

pub const EP_RATIO: f64 = 3.11;
pub const BS_RATIO: f64 = 11.1;
pub const ES_RATIO: f64 = 18.0;
pub const SW_RATIO: f64 = 1.8;

const KB: u32 = 1024;

/// Instructions per warp in the synthetic instruction-count convention.
pub const INST_PER_WARP: u64 = 1000;

pub fn kernel(
    name: &str,
    grid_blocks: u32,
    threads_per_block: u32,
    regs_per_thread: u32,
    shm_bytes_per_block: u32,
    ratio: f64,
) -> KernelProfile {
    let warps = threads_per_block.div_ceil(WARP_SIZE) as u64;
    KernelProfile {
        name: name.to_owned(),
        grid_blocks,
        threads_per_block,
        regs_per_thread,
        shm_bytes_per_block,
        inst_count: INST_PER_WARP * warps * grid_blocks as u64,
        mem_events: 0,
        ratio: Some(ratio),
    }
}

fn ep(name: &str, grid: u32, tpb: u32, shm: u32) -> KernelProfile {
    kernel(name, grid, tpb, 20, shm, EP_RATIO)
}

fn bs(name: &str, grid: u32, tpb: u32, shm: u32) -> KernelProfile {
    kernel(name, grid, tpb, 16, shm, BS_RATIO)
}

/// Six EP kernels, 16 x 128, shared memory 8K..48K.
pub fn ep_6_shm() -> Vec<KernelProfile> {
    (1..=6)
        .map(|i| ep(&format!("ep_shm{}k", 8 * i), 16, 128, 8 * i * KB))
        .collect()
}

/// Six EP kernels, block 128, grid 16..96 (4..24 warps per SM).
pub fn ep_6_grid() -> Vec<KernelProfile> {
    (1..=6)
        .map(|i| ep(&format!("ep_grid{}", 16 * i), 16 * i, 128, 0))
        .collect()
}

/// Six BS kernels, grid 32, block 64..1024.
pub fn bs_6_blk() -> Vec<KernelProfile> {
    [64, 128, 256, 512, 768, 1024]
        .into_iter()
        .map(|tpb| bs(&format!("bs_blk{tpb}"), 32, tpb, 0))
        .collect()
}

/// Three EP kernels with 4 warps per SM, three BS with 12.
pub fn ep_bs_6() -> Vec<KernelProfile> {
    let mut v: Vec<_> = (1..=3).map(|i| ep(&format!("ep{i}"), 16, 128, 0)).collect();
    v.extend((1..=3).map(|i| bs(&format!("bs{i}"), 32, 192, 0)));
    v
}

/// As [`ep_bs_6`] with per-SM shared memory 16K, 24K and 48K on each side.
pub fn ep_bs_6_shm() -> Vec<KernelProfile> {
    let mut v: Vec<_> = [16, 24, 48]
        .into_iter()
        .map(|s| ep(&format!("ep_shm{s}k"), 16, 128, s * KB))
        .collect();
    // two BS blocks per SM, so half the footprint per block
    v.extend(
        [16, 24, 48]
            .into_iter()
            .map(|s| bs(&format!("bs_shm{s}k"), 32, 192, s * KB / 2)),
    );
    v
}

/// Two kernels each of EP, BS, ES and SW, varying in every resource.
pub fn ep_bs_es_sw_8() -> Vec<KernelProfile> {
    vec![
        ep("ep_a", 32, 128, 4 * KB),
        ep("ep_b", 48, 256, 0),
        bs("bs_a", 32, 256, 0),
        bs("bs_b", 64, 128, 0),
        kernel("es_a", 16, 512, 28, 8 * KB, ES_RATIO),
        kernel("es_b", 32, 256, 28, 4 * KB, ES_RATIO),
        kernel("sw_a", 16, 64, 24, 24 * KB, SW_RATIO),
        kernel("sw_b", 32, 128, 24, 16 * KB, SW_RATIO),
    ]
}

/// Every fixture by name.
pub fn all() -> Vec<(&'static str, Vec<KernelProfile>)> {
    vec![
        ("ep-6-shm", ep_6_shm()),
        ("ep-6-grid", ep_6_grid()),
        ("bs-6-blk", bs_6_blk()),
        ("epbs-6", ep_bs_6()),
        ("epbs-6-shm", ep_bs_6_shm()),
        ("epbsessw-8", ep_bs_es_sw_8()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{derive_footprints, GpuSpec};

    #[test]
    fn footprints_match_experiment_table() {
        let spec = GpuSpec::gtx580();
        let shm: Vec<_> = derive_footprints(&ep_6_shm(), &spec)
            .unwrap()
            .iter()
            .map(|f| (f.shm_bytes / KB, f.warps))
            .collect();
        assert_eq!(
            shm,
            vec![(8, 4), (16, 4), (24, 4), (32, 4), (40, 4), (48, 4)]
        );

        let warps: Vec<_> = derive_footprints(&ep_6_grid(), &spec)
            .unwrap()
            .iter()
            .map(|f| f.warps)
            .collect();
        assert_eq!(warps, vec![4, 8, 12, 16, 20, 24]);

        // block 256 gives 16 by the footprint formula where the table lists 12,
        // likewise 512 and 768
        let warps: Vec<_> = derive_footprints(&bs_6_blk(), &spec)
            .unwrap()
            .iter()
            .map(|f| f.warps)
            .collect();
        assert_eq!(warps, vec![4, 8, 16, 32, 48, 64]);

        let f = derive_footprints(&ep_bs_6_shm(), &spec).unwrap();
        let summary: Vec<_> = f.iter().map(|f| (f.warps, f.shm_bytes / KB)).collect();
        assert_eq!(
            summary,
            vec![(4, 16), (4, 24), (4, 48), (12, 16), (12, 24), (12, 48)]
        );
    }

    #[test]
    fn every_fixture_is_feasible() {
        for (name, ks) in all() {
            assert!(derive_footprints(&ks, &GpuSpec::gtx580()).is_ok(), "{name}");
        }
    }
}
