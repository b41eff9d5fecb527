//! Hardware limits, per-kernel profiles and the per-SM footprints the
//! scheduler scores.
//!
//! A [`KernelProfile`] holds what the profiler reports for one kernel: launch
//! geometry, per-thread/per-block resource use and dynamic instruction and
//! memory-event counts. [`derive_footprint`] turns it into a
//! [`KernelFootprint`], the aggregate demand the kernel places on a single SM
//! when its blocks are spread round-robin over the device. Footprints and
//! [`CombinedProfile`]s (several kernels folded into one virtual kernel) both
//! implement [`Footprint`], which is what the pairwise scoring works against.

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Threads per warp.
pub const WARP_SIZE: u32 = 32;

/// Largest thread count a single block may request.
pub const MAX_THREADS_PER_BLOCK: u32 = 1024;

/// Per-SM hardware limits of a GPU plus its balanced instruction/memory ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpuSpec {
    pub n_sm: u32,
    pub regs_per_sm: u32,
    pub shm_bytes_per_sm: u32,
    pub max_warps_per_sm: u32,
    pub max_blocks_per_sm: u32,
    /// Instructions per memory unit at which compute and memory time match.
    pub balanced_ratio: f64,
}

impl GpuSpec {
    /// GeForce GTX 580 (Fermi): 16 SMs, 32K registers, 48 KiB shared memory,
    /// 48 warps and 8 blocks per SM.
    pub fn gtx580() -> Self {
        GpuSpec {
            n_sm: 16,
            regs_per_sm: 32 * 1024,
            shm_bytes_per_sm: 48 * 1024,
            max_warps_per_sm: 48,
            max_blocks_per_sm: 8,
            balanced_ratio: 4.11,
        }
    }

    /// Looks up a named preset.
    pub fn preset(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "gtx580" => Some(Self::gtx580()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let counts = [
            ("n_sm", self.n_sm),
            ("regs_per_sm", self.regs_per_sm),
            ("shm_bytes_per_sm", self.shm_bytes_per_sm),
            ("max_warps_per_sm", self.max_warps_per_sm),
            ("max_blocks_per_sm", self.max_blocks_per_sm),
        ];
        for (field, value) in counts {
            if value == 0 {
                return Err(ModelError::invalid(field, "must be strictly positive"));
            }
        }
        if !(self.balanced_ratio.is_finite() && self.balanced_ratio > 0.0) {
            return Err(ModelError::invalid(
                "balanced_ratio",
                "must be a finite positive number",
            ));
        }
        Ok(())
    }
}

/// Raw profiler counters and launch geometry of one kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelProfile {
    pub name: String,
    pub grid_blocks: u32,
    pub threads_per_block: u32,
    pub regs_per_thread: u32,
    pub shm_bytes_per_block: u32,
    /// Total dynamic instructions.
    pub inst_count: u64,
    /// Global stores plus L1 global load misses.
    #[serde(default)]
    pub mem_events: u64,
    /// Precomputed instruction/memory ratio; wins over the counters when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
}

impl KernelProfile {
    pub fn warps_per_block(&self) -> u32 {
        self.threads_per_block.div_ceil(WARP_SIZE)
    }

    pub fn regs_per_block(&self) -> u32 {
        self.regs_per_thread * self.threads_per_block
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.name.trim().is_empty() {
            return Err(ModelError::invalid("name", "must not be empty"));
        }
        if self.grid_blocks == 0 {
            return Err(ModelError::invalid_kernel(
                &self.name,
                "grid_blocks",
                "must be at least 1",
            ));
        }
        if self.threads_per_block == 0 || self.threads_per_block > MAX_THREADS_PER_BLOCK {
            return Err(ModelError::invalid_kernel(
                &self.name,
                "threads_per_block",
                "must be in 1..=1024",
            ));
        }
        if self
            .regs_per_thread
            .checked_mul(self.threads_per_block)
            .is_none()
        {
            return Err(ModelError::invalid_kernel(
                &self.name,
                "regs_per_thread",
                "register demand overflows",
            ));
        }
        if self.inst_count == 0 {
            return Err(ModelError::invalid_kernel(
                &self.name,
                "inst_count",
                "must be at least 1",
            ));
        }
        if let Some(r) = self.ratio {
            if !(r.is_finite() && r > 0.0) {
                return Err(ModelError::invalid_kernel(
                    &self.name,
                    "ratio",
                    "must be a finite positive number",
                ));
            }
        }
        Ok(())
    }

    /// The explicit ratio if present, otherwise one computed from the counters.
    pub fn resolved_ratio(&self) -> Result<f64, ModelError> {
        match self.ratio {
            Some(r) => Ok(r),
            None => compute_ratio(self.inst_count, self.mem_events).map_err(|_| {
                ModelError::MissingRatio {
                    kernel: self.name.clone(),
                }
            }),
        }
    }
}

/// Instruction/memory ratio from profiler counters: `inst / (4 * mem_events)`.
pub fn compute_ratio(inst_count: u64, mem_events: u64) -> Result<f64, ModelError> {
    if mem_events == 0 {
        return Err(ModelError::DivisionByZero);
    }
    Ok(inst_count as f64 / (4.0 * mem_events as f64))
}

/// Resources a single thread block holds while resident on an SM.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlockDemand {
    pub regs: u32,
    pub shm_bytes: u32,
    pub warps: u32,
}

impl BlockDemand {
    /// Errors when one block alone exceeds a fresh SM's capacity.
    pub fn check_fits(&self, kernel: &str, spec: &GpuSpec) -> Result<(), ModelError> {
        let checks = [
            ("registers", self.regs, spec.regs_per_sm),
            ("shared memory", self.shm_bytes, spec.shm_bytes_per_sm),
            ("warps", self.warps, spec.max_warps_per_sm),
        ];
        for (resource, demand, limit) in checks {
            if demand > limit {
                return Err(ModelError::InfeasibleKernel {
                    kernel: kernel.to_owned(),
                    resource,
                    demand: demand as u64,
                    limit: limit as u64,
                });
            }
        }
        Ok(())
    }
}

/// Aggregate per-SM demand of one kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelFootprint {
    pub kernel: String,
    pub blocks_per_sm: u32,
    pub warps: u32,
    pub regs: u32,
    pub shm_bytes: u32,
    pub inst_count: u64,
    pub ratio: f64,
    /// Total thread blocks in the grid.
    pub grid_blocks: u32,
    pub block: BlockDemand,
}

/// Derives the per-SM footprint of `profile`: per-block usage times
/// `ceil(grid_blocks / n_sm)`.
///
/// Fails when a single block already exceeds one of the SM limits, since such
/// a kernel can never be resident.
pub fn derive_footprint(
    profile: &KernelProfile,
    spec: &GpuSpec,
) -> Result<KernelFootprint, ModelError> {
    profile.validate()?;
    spec.validate()?;
    let ratio = profile.resolved_ratio()?;

    let block = BlockDemand {
        regs: profile.regs_per_block(),
        shm_bytes: profile.shm_bytes_per_block,
        warps: profile.warps_per_block(),
    };
    block.check_fits(&profile.name, spec)?;

    let blocks_per_sm = profile.grid_blocks.div_ceil(spec.n_sm);
    let scale = |per_block: u32, resource: &'static str| {
        per_block.checked_mul(blocks_per_sm).ok_or_else(|| {
            ModelError::invalid_kernel(&profile.name, resource, "footprint overflows")
        })
    };
    Ok(KernelFootprint {
        kernel: profile.name.clone(),
        blocks_per_sm,
        warps: scale(block.warps, "threads_per_block")?,
        regs: scale(block.regs, "regs_per_thread")?,
        shm_bytes: scale(block.shm_bytes, "shm_bytes_per_block")?,
        inst_count: profile.inst_count,
        ratio,
        grid_blocks: profile.grid_blocks,
        block,
    })
}

/// Derives footprints for a whole kernel set, rejecting duplicate names.
pub fn derive_footprints(
    profiles: &[KernelProfile],
    spec: &GpuSpec,
) -> Result<Vec<KernelFootprint>, ModelError> {
    let mut seen = std::collections::HashSet::new();
    profiles
        .iter()
        .map(|p| {
            if !seen.insert(p.name.as_str()) {
                return Err(ModelError::invalid_kernel(
                    &p.name,
                    "name",
                    "duplicate kernel name",
                ));
            }
            derive_footprint(p, spec)
        })
        .collect()
}

/// Anything carrying the per-SM resource fields the scoring inspects.
pub trait Footprint {
    /// Kernels this footprint stands for, in fold order.
    fn member_names(&self) -> Vec<String>;
    fn label(&self) -> String {
        self.member_names().join("+")
    }
    fn blocks_per_sm(&self) -> u32;
    fn warps(&self) -> u32;
    fn regs(&self) -> u32;
    fn shm_bytes(&self) -> u32;
    fn grid_blocks(&self) -> u64;
    fn inst_count(&self) -> u64;
    fn ratio(&self) -> f64;
}

impl Footprint for KernelFootprint {
    fn member_names(&self) -> Vec<String> {
        vec![self.kernel.clone()]
    }
    fn blocks_per_sm(&self) -> u32 {
        self.blocks_per_sm
    }
    fn warps(&self) -> u32 {
        self.warps
    }
    fn regs(&self) -> u32 {
        self.regs
    }
    fn shm_bytes(&self) -> u32 {
        self.shm_bytes
    }
    fn grid_blocks(&self) -> u64 {
        self.grid_blocks as u64
    }
    fn inst_count(&self) -> u64 {
        self.inst_count
    }
    fn ratio(&self) -> f64 {
        self.ratio
    }
}

/// Several kernels folded together into one virtual kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinedProfile {
    /// Member kernels in the order they were folded in.
    pub members: Vec<String>,
    pub blocks_per_sm: u32,
    pub warps: u32,
    pub regs: u32,
    pub shm_bytes: u32,
    pub grid_blocks: u64,
    pub inst_count: u64,
    pub ratio: f64,
}

impl From<&KernelFootprint> for CombinedProfile {
    fn from(k: &KernelFootprint) -> Self {
        CombinedProfile {
            members: vec![k.kernel.clone()],
            blocks_per_sm: k.blocks_per_sm,
            warps: k.warps,
            regs: k.regs,
            shm_bytes: k.shm_bytes,
            grid_blocks: k.grid_blocks as u64,
            inst_count: k.inst_count,
            ratio: k.ratio,
        }
    }
}

impl Footprint for CombinedProfile {
    fn member_names(&self) -> Vec<String> {
        self.members.clone()
    }
    fn blocks_per_sm(&self) -> u32 {
        self.blocks_per_sm
    }
    fn warps(&self) -> u32 {
        self.warps
    }
    fn regs(&self) -> u32 {
        self.regs
    }
    fn shm_bytes(&self) -> u32 {
        self.shm_bytes
    }
    fn grid_blocks(&self) -> u64 {
        self.grid_blocks
    }
    fn inst_count(&self) -> u64 {
        self.inst_count
    }
    fn ratio(&self) -> f64 {
        self.ratio
    }
}

/// Instruction-weighted harmonic combination of two ratios,
/// `(Ia + Ib) / (Ia / Ra + Ib / Rb)`: total instructions over total memory.
pub fn combined_ratio(inst_a: u64, ratio_a: f64, inst_b: u64, ratio_b: f64) -> f64 {
    let (ia, ib) = (inst_a as f64, inst_b as f64);
    (ia + ib) / (ia / ratio_a + ib / ratio_b)
}

/// Folds `b` into `a`. Resource fields add, instructions add and the ratio
/// becomes the instruction-weighted harmonic combination.
pub fn profile_combine<A: Footprint + ?Sized>(a: &A, b: &KernelFootprint) -> CombinedProfile {
    let mut members = a.member_names();
    members.push(b.kernel.clone());
    CombinedProfile {
        members,
        blocks_per_sm: a.blocks_per_sm().saturating_add(b.blocks_per_sm),
        warps: a.warps().saturating_add(b.warps),
        regs: a.regs().saturating_add(b.regs),
        shm_bytes: a.shm_bytes().saturating_add(b.shm_bytes),
        grid_blocks: a.grid_blocks() + b.grid_blocks as u64,
        inst_count: a.inst_count() + b.inst_count,
        ratio: combined_ratio(a.inst_count(), a.ratio(), b.inst_count, b.ratio),
    }
}
