//! On-disk layout of a generated workload.
//!
//! ```text
//! <dir>/manifest.json
//! <dir>/config.json
//! <dir>/sets.json
//! <dir>/pools/{baseline,arbitrary,benefit,penalty}/task_00000.json
//! ```

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::generator::{Counts, GenConfig, Generated, SetSpec, TaskPool};
use crate::io::{read_json, read_task, write_json, write_task, IoError};
use crate::taskgraph::Task;

pub const POOLS: [&str; 4] = ["baseline", "arbitrary", "benefit", "penalty"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub config_sha256: String,
    pub seed: u64,
    /// Seconds since the epoch; `SOURCE_DATE_EPOCH` when set.
    pub created_unix: u64,
    pub complete: bool,
    pub counts: Option<Counts>,
    pub paths: Vec<String>,
}

impl RunManifest {
    pub fn new(cfg: &GenConfig) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_sha256: config_hash(cfg),
            seed: cfg.seed,
            created_unix: timestamp(),
            complete: false,
            counts: None,
            paths: Vec::new(),
        }
    }
}

pub fn config_hash(cfg: &GenConfig) -> String {
    let canonical = serde_json::to_string(cfg).expect("config serializes");
    Sha256::digest(canonical.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

fn timestamp() -> u64 {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or_else(|| SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()))
}

fn task_path(dir: &Path, pool: &str, i: usize) -> PathBuf {
    dir.join("pools").join(pool).join(format!("task_{i:05}.json"))
}

fn pool_vec<'a>(pool: &'a TaskPool, name: &str) -> &'a [Task] {
    match name {
        "baseline" => &pool.baseline,
        "arbitrary" => &pool.arbitrary,
        "benefit" => &pool.benefit,
        _ => &pool.penalty,
    }
}

/// Writes the manifest first, then every stage output, then the final manifest.
pub fn save(dir: &Path, generated: &Generated) -> Result<RunManifest, IoError> {
    let mut manifest = RunManifest::new(&generated.config);
    write_json(&dir.join("manifest.json"), &manifest)?;
    write_json(&dir.join("config.json"), &generated.config)?;
    for name in POOLS {
        let tasks = pool_vec(&generated.pool, name);
        tasks.par_iter().enumerate().try_for_each(|(i, t)| write_task(&task_path(dir, name, i), t))?;
    }
    write_json(&dir.join("sets.json"), &generated.sets)?;
    manifest.complete = true;
    manifest.counts = Some(generated.counts);
    manifest.paths = ["config.json", "sets.json", "pools/baseline", "pools/arbitrary", "pools/benefit", "pools/penalty"]
        .map(String::from)
        .to_vec();
    write_json(&dir.join("manifest.json"), &manifest)?;
    Ok(manifest)
}

/// Loads the pools and set specifications written by [`save`].
pub fn load(dir: &Path) -> Result<(RunManifest, TaskPool, Vec<SetSpec>), IoError> {
    let manifest: RunManifest = read_json(&dir.join("manifest.json"))?;
    let n = manifest.counts.map_or(0, |c| c.kept);
    let read_pool = |name: &str| -> Result<Vec<Task>, IoError> {
        (0..n).into_par_iter().map(|i| read_task(&task_path(dir, name, i))).collect()
    };
    let pool = TaskPool {
        baseline: read_pool("baseline")?,
        arbitrary: read_pool("arbitrary")?,
        benefit: read_pool("benefit")?,
        penalty: read_pool("penalty")?,
    };
    let sets: Vec<SetSpec> = read_json(&dir.join("sets.json"))?;
    Ok((manifest, pool, sets))
}
