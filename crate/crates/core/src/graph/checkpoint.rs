use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CallGraph;

const FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CheckpointError {
    #[error("no checkpoint for commit {0}")]
    UnknownCheckpoint(String),
    #[error("checkpoint I/O at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("checkpoint {path} is unreadable: {source}")]
    Format {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphCheckpoint {
    pub version: u32,
    pub commit: String,
    pub graph: CallGraph,
}

/// Frozen call graphs keyed by commit id, optionally mirrored to disk.
#[derive(Debug, Default)]
pub struct CheckpointStore {
    memory: BTreeMap<String, CallGraph>,
    dir: Option<PathBuf>,
    restores: usize,
}

impl CheckpointStore {
    pub fn in_memory() -> Self {
        Self::default()
    }

    pub fn on_disk(dir: &Path) -> Result<Self, CheckpointError> {
        std::fs::create_dir_all(dir).map_err(|source| CheckpointError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Self {
            dir: Some(dir.to_path_buf()),
            ..Self::default()
        })
    }

    fn file_for(&self, commit: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{commit}.json")))
    }

    pub fn checkpoint(&mut self, graph: &CallGraph, commit: &str) -> Result<(), CheckpointError> {
        if let Some(path) = self.file_for(commit) {
            let blob = GraphCheckpoint {
                version: FORMAT_VERSION,
                commit: commit.to_string(),
                graph: graph.clone(),
            };
            let bytes = serde_json::to_vec(&blob).map_err(|source| CheckpointError::Format {
                path: path.clone(),
                source,
            })?;
            std::fs::write(&path, bytes).map_err(|source| CheckpointError::Io { path, source })?;
        }
        self.memory.insert(commit.to_string(), graph.clone());
        Ok(())
    }

    pub fn restore(&mut self, commit: &str) -> Result<CallGraph, CheckpointError> {
        let graph = match self.memory.get(commit) {
            Some(g) => g.clone(),
            None => self.load(commit)?,
        };
        self.restores += 1;
        Ok(graph)
    }

    fn load(&self, commit: &str) -> Result<CallGraph, CheckpointError> {
        let Some(path) = self.file_for(commit).filter(|p| p.exists()) else {
            return Err(CheckpointError::UnknownCheckpoint(commit.to_string()));
        };
        let bytes = std::fs::read(&path).map_err(|source| CheckpointError::Io {
            path: path.clone(),
            source,
        })?;
        let blob: GraphCheckpoint =
            serde_json::from_slice(&bytes).map_err(|source| CheckpointError::Format { path, source })?;
        if blob.version != FORMAT_VERSION || blob.commit != commit {
            return Err(CheckpointError::UnknownCheckpoint(commit.to_string()));
        }
        Ok(blob.graph)
    }

    /// Drop the in-memory copy once every branch from the fork is done.
    pub fn release(&mut self, commit: &str) {
        self.memory.remove(commit);
    }

    pub fn restore_count(&self) -> usize {
        self.restores
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_call_graph, FileState};
    use crate::syntax::parse_source;

    #[test]
    fn round_trip_in_memory_and_on_disk() {
        let t = parse_source("class A { void f() { g(); } void g() {} }", "java").unwrap();
        let g = build_call_graph([("A.java", FileState::Parsed(&t))]);
        let mut mem = CheckpointStore::in_memory();
        mem.checkpoint(&g, "c1").unwrap();
        assert_eq!(mem.restore("c1").unwrap(), g);
        assert!(matches!(mem.restore("zz"), Err(CheckpointError::UnknownCheckpoint(_))));

        let dir = tempfile::tempdir().unwrap();
        let mut disk = CheckpointStore::on_disk(dir.path()).unwrap();
        disk.checkpoint(&g, "c1").unwrap();
        disk.release("c1");
        assert_eq!(disk.restore("c1").unwrap(), g);
        assert_eq!(disk.restore_count(), 1);
    }
}
