//! Run documents: one JSON file holding the GPU and the kernel set.
//!
//! ```json
//! {
//!   "gpu": "gtx580",
//!   "kernels": [
//!     { "name": "ep1", "grid_blocks": 16, "threads_per_block": 128,
//!       "regs_per_thread": 20, "shm_bytes_per_block": 0,
//!       "inst_count": 64000, "ratio": 3.11 },
//!     { "name": "bs1", "grid_blocks": 32, "threads_per_block": 192,
//!       "regs_per_thread": 16, "shm_bytes_per_block": 0,
//!       "inst_count": 192000, "global_stores": 2000,
//!       "l1_global_load_misses": 2324 }
//!   ]
//! }
//! ```
//!
//! `gpu` is either a preset name or an object with the [`GpuSpec`] fields.
//! Each kernel needs a `ratio`, or raw counters to derive it from: either
//! `mem_events` or both `global_stores` and `l1_global_load_misses`.

use std::fs;
use std::path::{Path, PathBuf};

use launch_order::{GpuSpec, KernelProfile};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GpuField {
    Preset(String),
    Spec(GpuSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelFileEntry {
    pub name: String,
    pub grid_blocks: u32,
    pub threads_per_block: u32,
    #[serde(default)]
    pub regs_per_thread: u32,
    #[serde(default)]
    pub shm_bytes_per_block: u32,
    pub inst_count: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mem_events: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub global_stores: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l1_global_load_misses: Option<u64>,
}

impl KernelFileEntry {
    /// Sums the raw counters into `mem_events` and checks a ratio is resolvable.
    pub fn into_profile(self) -> Result<KernelProfile, CliError> {
        let from_raw = match (self.global_stores, self.l1_global_load_misses) {
            (Some(s), Some(m)) => Some(s.checked_add(m).ok_or_else(|| {
                CliError::validation(format!("{}.global_stores", self.name), "counter overflow")
            })?),
            (None, None) => None,
            _ => {
                return Err(CliError::validation(
                    format!("{}.l1_global_load_misses", self.name),
                    "global_stores and l1_global_load_misses must be given together",
                ))
            }
        };
        let mem_events = match (self.mem_events, from_raw) {
            (Some(a), Some(b)) if a != b => {
                return Err(CliError::validation(
                    format!("{}.mem_events", self.name),
                    format!("{a} disagrees with global_stores + l1_global_load_misses = {b}"),
                ))
            }
            (a, b) => a.or(b),
        };
        if self.ratio.is_none() && mem_events.unwrap_or(0) == 0 {
            return Err(CliError::MissingRatio { kernel: self.name });
        }
        let profile = KernelProfile {
            name: self.name,
            grid_blocks: self.grid_blocks,
            threads_per_block: self.threads_per_block,
            regs_per_thread: self.regs_per_thread,
            shm_bytes_per_block: self.shm_bytes_per_block,
            inst_count: self.inst_count,
            mem_events: mem_events.unwrap_or(0),
            ratio: self.ratio,
        };
        profile.validate()?;
        Ok(profile)
    }
}

impl From<&KernelProfile> for KernelFileEntry {
    fn from(p: &KernelProfile) -> Self {
        KernelFileEntry {
            name: p.name.clone(),
            grid_blocks: p.grid_blocks,
            threads_per_block: p.threads_per_block,
            regs_per_thread: p.regs_per_thread,
            shm_bytes_per_block: p.shm_bytes_per_block,
            inst_count: p.inst_count,
            ratio: p.ratio,
            mem_events: (p.mem_events > 0).then_some(p.mem_events),
            global_stores: None,
            l1_global_load_misses: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gpu: Option<GpuField>,
    pub kernels: Vec<KernelFileEntry>,
}

fn parse_json<T: serde::de::DeserializeOwned>(path: &Path, text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Parse {
        path: path.to_owned(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))
}

pub fn resolve_gpu(field: &GpuField) -> Result<GpuSpec, CliError> {
    let spec = match field {
        GpuField::Preset(name) => GpuSpec::preset(name)
            .ok_or_else(|| CliError::validation("gpu", format!("unknown preset `{name}`")))?,
        GpuField::Spec(spec) => *spec,
    };
    spec.validate()?;
    Ok(spec)
}

/// Reads the run document at `kernel_path`. `gpu` (a preset name or a path to
/// a JSON GPU spec) overrides whatever the document names.
pub fn load_inputs(
    kernel_path: &Path,
    gpu: Option<&str>,
) -> Result<(Vec<KernelProfile>, GpuSpec), CliError> {
    let doc: RunDocument = parse_json(kernel_path, &read(kernel_path)?)?;

    let gpu_field = match gpu {
        Some(arg) if GpuSpec::preset(arg).is_some() => GpuField::Preset(arg.to_owned()),
        Some(arg) => {
            let path = PathBuf::from(arg);
            if !path.exists() {
                return Err(CliError::validation(
                    "gpu",
                    format!("`{arg}` is neither a preset nor a readable file"),
                ));
            }
            GpuField::Spec(parse_json(&path, &read(&path)?)?)
        }
        None => doc.gpu.clone().ok_or_else(|| {
            CliError::validation("gpu", "no GPU given in the document or via --gpu")
        })?,
    };
    let spec = resolve_gpu(&gpu_field)?;

    let mut names = std::collections::HashSet::new();
    let profiles = doc
        .kernels
        .into_iter()
        .map(|entry| {
            if !names.insert(entry.name.clone()) {
                return Err(CliError::validation(
                    format!("{}.name", entry.name),
                    "duplicate kernel name",
                ));
            }
            entry.into_profile()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((profiles, spec))
}

/// Writes `profiles` as a run document for `gpu`.
pub fn to_document(profiles: &[KernelProfile], gpu: GpuField) -> RunDocument {
    RunDocument {
        gpu: Some(gpu),
        kernels: profiles.iter().map(KernelFileEntry::from).collect(),
    }
}
