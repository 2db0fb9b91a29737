//! Project call graph, fork checkpoints, and call-graph impact scores.

mod callgraph;
mod checkpoint;
mod rank;

pub use callgraph::{
    build_call_graph, update_call_graph, CallGraph, CallSite, FileEntry, FileState, FunctionDecl, FunctionId,
    GraphNode,
};
pub use checkpoint::{CheckpointError, CheckpointStore, GraphCheckpoint};
pub use rank::{
    backward_propagate, impact_scores, pagerank, pagerank_indexed, propagate_indexed, ImpactScores, PageRank,
    RankParams,
};
