//! Task JSON files.
//!
//! ```json
//! {"objects":[{"id":1,"name":"fft","wceto":{"kind":"linear","c1":10.0,"factor":0.5}}],
//!  "nodes":[{"id":1,"object":1,"threads":1}],
//!  "edges":[[1,2]],
//!  "period":40.0,"deadline":40.0}
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::taskgraph::{ExecObject, GraphError, Node, NodeId, ObjectId, RawGraph, Task, TaskGraph};
use crate::wceto::Cycles;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{path}: {source}")]
    Graph { path: PathBuf, source: GraphError },
}

impl IoError {
    /// Malformed content, as opposed to a failed read or write.
    pub fn is_content_error(&self) -> bool {
        !matches!(self, IoError::Io { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: NodeId,
    pub object: ObjectId,
    #[serde(default = "one")]
    pub threads: u32,
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskFile {
    pub objects: Vec<ExecObject>,
    pub nodes: Vec<NodeRecord>,
    pub edges: Vec<[NodeId; 2]>,
    pub period: Cycles,
    pub deadline: Cycles,
}

impl TaskFile {
    pub fn from_task(task: &Task) -> Self {
        let raw = task.graph.to_raw();
        TaskFile {
            objects: raw.objects,
            nodes: raw.nodes.into_iter().map(|(id, n)| NodeRecord { id, object: n.object, threads: n.threads }).collect(),
            edges: raw.edges.into_iter().map(|(a, b)| [a, b]).collect(),
            period: task.period,
            deadline: task.deadline,
        }
    }

    pub fn into_task(self) -> Result<Task, GraphError> {
        let raw = RawGraph {
            objects: self.objects,
            nodes: self.nodes.into_iter().map(|r| (r.id, Node { object: r.object, threads: r.threads })).collect(),
            edges: self.edges.into_iter().map(|[a, b]| (a, b)).collect(),
        };
        Task::with_deadline(self.period, self.deadline, TaskGraph::new(raw)?)
    }
}

pub fn task_to_json(task: &Task) -> String {
    serde_json::to_string_pretty(&TaskFile::from_task(task)).expect("task serializes") + "\n"
}

pub fn task_from_json(text: &str) -> Result<Task, IoError> {
    let path = PathBuf::from("<string>");
    let file: TaskFile = serde_json::from_str(text).map_err(|source| IoError::Json { path: path.clone(), source })?;
    file.into_task().map_err(|source| IoError::Graph { path, source })
}

pub fn read_task(path: &Path) -> Result<Task, IoError> {
    let text = read_string(path)?;
    let file: TaskFile =
        serde_json::from_str(&text).map_err(|source| IoError::Json { path: path.to_path_buf(), source })?;
    file.into_task().map_err(|source| IoError::Graph { path: path.to_path_buf(), source })
}

pub fn write_task(path: &Path, task: &Task) -> Result<(), IoError> {
    write_string(path, &task_to_json(task))
}

pub fn read_string(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::Io { path: path.to_path_buf(), source })
}

/// Writes `text`, creating parent directories.
pub fn write_string(path: &Path, text: &str) -> Result<(), IoError> {
    let io = |source| IoError::Io { path: path.to_path_buf(), source };
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io)?;
    }
    fs::write(path, text).map_err(io)
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    let text = read_string(path)?;
    serde_json::from_str(&text).map_err(|source| IoError::Json { path: path.to_path_buf(), source })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    write_string(path, &(serde_json::to_string_pretty(value).expect("value serializes") + "\n"))
}
