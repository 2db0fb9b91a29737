//! End-to-end analysis of a repository.
//!
//! The walk is two-pass. Pass one visits commits depth-first, keeps the call
//! graph in step (restoring a checkpoint when a walk resumes at a fork) and
//! records raw per-function metrics. Pass two fits one Box-Cox transform per
//! metric over every recorded function and fuses the normalized values into
//! per-commit scores.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::complexity::{measure, ComplexityRaw};
use crate::config::Config;
use crate::diff::{delta_ast, edit_script, group_by_function, map_trees_with, MatcherParams, FILE_SCOPE};
use crate::graph::{impact_scores, CallGraph, CheckpointError, CheckpointStore, FileState, FunctionId, RankParams};
use crate::pdg::{build_pdg, cdg_impact, changed_pdg_nodes, ddg_impact, impact_range};
use crate::repo::{walk_commits, ChangeKind, CommitRecord, DeveloperIdentity, FileChange, GitRepository, RepoError};
use crate::scoring::{
    combine_complexity, fit_boxcox, function_score, normalize, BoxCoxParams, CommitScore, FitOptions, FunctionScore,
    MetricParams, NormalizedMetrics,
};
use crate::syntax::{extract_functions, Blacklist, LanguageAdapter, LanguageRegistry, ParseError, SyntaxTree};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Repo(#[from] RepoError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error("cache I/O at {path}: {source}")]
    Cache {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Default)]
pub struct AnalyzeOptions {
    pub branch: Option<String>,
    pub cache: Option<PathBuf>,
}

/// Raw metrics of one changed function. File-scope changes carry no complexity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawFunctionRecord {
    pub file: String,
    pub function: String,
    pub delta_ast: f64,
    pub complexity: Option<ComplexityRaw>,
    pub ip: f64,
    pub ddg: f64,
    pub cdg: f64,
    pub ir: f64,
}

impl RawFunctionRecord {
    pub fn is_file_scope(&self) -> bool {
        self.function == FILE_SCOPE
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommitRaw {
    pub commit: String,
    pub parent_ids: Vec<String>,
    pub author: DeveloperIdentity,
    pub timestamp: i64,
    pub files_changed: usize,
    pub bulk: bool,
    pub skipped_files: Vec<String>,
    pub functions: Vec<RawFunctionRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommitEntry {
    pub commit: String,
    pub parent_ids: Vec<String>,
    pub author: DeveloperIdentity,
    pub timestamp: i64,
    pub files_changed: usize,
    pub bulk: bool,
    pub score: CommitScore<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CommitTiming {
    pub commit: String,
    pub ingest: Duration,
    pub parse: Duration,
    pub graph: Duration,
    pub rank: Duration,
    pub analyze: Duration,
}

impl CommitTiming {
    pub fn total(&self) -> Duration {
        self.ingest + self.parse + self.graph + self.rank + self.analyze
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimingReport {
    pub open: Duration,
    pub walk: Duration,
    pub fit: Duration,
    pub fuse: Duration,
    pub total: Duration,
    pub per_commit: Vec<CommitTiming>,
}

impl TimingReport {
    pub fn stages(&self) -> [(&'static str, Duration); 4] {
        [("open", self.open), ("walk", self.walk), ("fit", self.fit), ("fuse", self.fuse)]
    }
}

/// Result of one analysis. Timing is kept out of the serialized form so two
/// runs on the same input serialize identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisRun {
    pub schema_version: u32,
    pub repository: String,
    pub branch: Option<String>,
    pub config: Config,
    pub commits: Vec<CommitEntry>,
    pub params: Option<MetricParams<f64>>,
    pub checkpoint_restores: usize,
    #[serde(skip)]
    pub timing: TimingReport,
}

impl AnalysisRun {
    pub fn commit(&self, id: &str) -> Option<&CommitEntry> {
        self.commits.iter().find(|c| c.commit == id)
    }
}

pub fn timing_report(run: &AnalysisRun) -> &TimingReport {
    &run.timing
}

/// Cache directory for a repository: `<cache>/<hash of its canonical path>`.
pub fn repo_cache_dir(cache: &Path, repo: &Path) -> PathBuf {
    let canon = repo.canonicalize().unwrap_or_else(|_| repo.to_path_buf());
    let digest = Sha256::digest(canon.to_string_lossy().as_bytes());
    let hex: String = digest.iter().take(8).map(|b| format!("{b:02x}")).collect();
    cache.join(hex)
}

pub fn analyze_repository(path: &Path, config: &Config, options: &AnalyzeOptions) -> Result<AnalysisRun, PipelineError> {
    analyze_repository_with(path, config, options, |_, _| {})
}

/// As [`analyze_repository`], calling `observe` with the call graph after each commit.
pub fn analyze_repository_with(
    path: &Path,
    config: &Config,
    options: &AnalyzeOptions,
    mut observe: impl FnMut(&CommitRecord, &CallGraph),
) -> Result<AnalysisRun, PipelineError> {
    let start = Instant::now();
    let mut timing = TimingReport::default();
    let repo = GitRepository::open(path)?;
    let tree = repo.version_tree(options.branch.as_deref(), &config.bots.patterns)?;
    let cache_dir = options.cache.as_ref().map(|c| repo_cache_dir(c, path));
    let mut store = match &cache_dir {
        Some(dir) => CheckpointStore::on_disk(&dir.join("graph-checkpoints"))?,
        None => CheckpointStore::in_memory(),
    };
    let t_open = Instant::now();
    timing.open = t_open - start;

    let ctx = CommitContext::new(config);
    let mut graph = CallGraph::default();
    let mut prev: Option<&str> = None;
    let mut pending_children: HashMap<&str, usize> = HashMap::new();
    let mut raws = Vec::with_capacity(tree.len());
    for commit in walk_commits(&tree) {
        let parent = commit.first_parent().filter(|p| tree.commits.contains_key(*p));
        match parent {
            None if prev.is_some() => graph = CallGraph::default(),
            None => {}
            Some(p) if Some(p) == prev => {}
            Some(p) => graph = store.restore(p)?,
        }
        if let Some(left) = parent.and_then(|p| pending_children.get_mut(p)) {
            *left -= 1;
            if *left == 0 {
                store.release(parent.expect("has parent"));
            }
        }
        let (raw, t) = ctx.analyze_commit(&repo, commit, &mut graph)?;
        observe(commit, &graph);
        if tree.is_fork(&commit.id) {
            store.checkpoint(&graph, &commit.id)?;
            pending_children.insert(&commit.id, tree.children(&commit.id).len());
        }
        raws.push(raw);
        timing.per_commit.push(t);
        prev = Some(&commit.id);
    }
    let t_walk = Instant::now();
    timing.walk = t_walk - t_open;

    let params = fit_metrics(&raws, &FitOptions::from(&config.normalize));
    let t_fit = Instant::now();
    timing.fit = t_fit - t_walk;

    let commits: Vec<CommitEntry> = raws.par_iter().map(|r| fuse_commit(r, params.as_ref())).collect();
    if let Some(dir) = &cache_dir {
        write_cache(dir, &raws, params.as_ref())?;
    }
    let t_fuse = Instant::now();
    timing.fuse = t_fuse - t_fit;
    timing.total = t_fuse - start;

    Ok(AnalysisRun {
        schema_version: SCHEMA_VERSION,
        repository: repo.location().display().to_string(),
        branch: options.branch.clone(),
        config: config.clone(),
        commits,
        params,
        checkpoint_restores: store.restore_count(),
        timing,
    })
}

fn write_cache(dir: &Path, raws: &[CommitRaw], params: Option<&MetricParams<f64>>) -> Result<(), PipelineError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| PipelineError::Cache { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let raw_path = dir.join("raw-metrics.jsonl");
    let mut f = std::io::BufWriter::new(std::fs::File::create(&raw_path).map_err(io(&raw_path))?);
    for r in raws {
        let line = serde_json::to_string(r).expect("raw record serializes");
        writeln!(f, "{line}").map_err(io(&raw_path))?;
    }
    f.flush().map_err(io(&raw_path))?;
    let params_path = dir.join("boxcox-params.json");
    let text = serde_json::to_string_pretty(&params).expect("params serialize");
    std::fs::write(&params_path, text).map_err(io(&params_path))?;
    Ok(())
}

/// Fit one transform per metric over every non-file-scope record; `None` when there are none.
pub fn fit_metrics(raws: &[CommitRaw], opts: &FitOptions) -> Option<MetricParams<f64>> {
    let records: Vec<(&RawFunctionRecord, &ComplexityRaw)> = raws
        .iter()
        .flat_map(|r| &r.functions)
        .filter_map(|f| f.complexity.as_ref().map(|c| (f, c)))
        .collect();
    if records.is_empty() {
        return None;
    }
    let fit = |get: &dyn Fn(&RawFunctionRecord, &ComplexityRaw) -> f64| -> BoxCoxParams<f64> {
        let xs: Vec<f64> = records.iter().map(|(f, c)| get(f, c)).collect();
        fit_boxcox(&xs, opts)
    };
    Some(MetricParams {
        loc: fit(&|_, c| c.loc as f64),
        cc: fit(&|_, c| c.cc as f64),
        hv: fit(&|_, c| c.hv),
        pcom: fit(&|_, c| c.pcom),
        ip: fit(&|f, _| f.ip),
        ddg: fit(&|f, _| f.ddg),
        cdg: fit(&|f, _| f.cdg),
    })
}

/// Score one commit. File-scope changes count with CM = 1, IP = 0 and IR = 1.
pub fn fuse_commit(raw: &CommitRaw, params: Option<&MetricParams<f64>>) -> CommitEntry {
    let scores = raw
        .functions
        .iter()
        .map(|f| {
            let (cm, ip, normalized) = match (f.complexity, params) {
                (Some(c), Some(p)) => {
                    let n = NormalizedMetrics {
                        loc: normalize(c.loc as f64, &p.loc),
                        cc: normalize(c.cc as f64, &p.cc),
                        hv: normalize(c.hv, &p.hv),
                        pcom: normalize(c.pcom, &p.pcom),
                        ip: normalize(f.ip, &p.ip),
                        ddg: normalize(f.ddg, &p.ddg),
                        cdg: normalize(f.cdg, &p.cdg),
                    };
                    (combine_complexity(n.loc, n.cc, n.hv, n.pcom), n.ip, Some(n))
                }
                _ => (1.0, 0.0, None),
            };
            FunctionScore {
                file: f.file.clone(),
                function: f.function.clone(),
                delta_ast: f.delta_ast,
                cm,
                ip,
                ir: f.ir,
                score: function_score(f.delta_ast, cm, ip, f.ir),
                normalized,
            }
        })
        .collect();
    CommitEntry {
        commit: raw.commit.clone(),
        parent_ids: raw.parent_ids.clone(),
        author: raw.author.clone(),
        timestamp: raw.timestamp,
        files_changed: raw.files_changed,
        bulk: raw.bulk,
        score: CommitScore::new(&raw.commit, scores),
    }
}

type Parsed = Option<Result<SyntaxTree, ParseError>>;

struct ParsedFile<'a> {
    change: &'a FileChange,
    adapter: &'a dyn LanguageAdapter,
    before: Parsed,
    after: Parsed,
}

impl ParsedFile<'_> {
    fn before_path(&self) -> &str {
        self.change.old_path.as_deref().unwrap_or(&self.change.path)
    }
}

struct CommitContext<'c> {
    config: &'c Config,
    registry: LanguageRegistry,
    blacklist: Blacklist,
    matcher: MatcherParams,
    rank: RankParams<f64>,
}

impl<'c> CommitContext<'c> {
    fn new(config: &'c Config) -> Self {
        Self {
            config,
            registry: LanguageRegistry::default(),
            blacklist: Blacklist::new(&config.active_blacklist()),
            matcher: MatcherParams {
                min_height: config.diff.min_height,
                similarity_threshold: config.diff.similarity_threshold,
            },
            rank: RankParams {
                damping: config.graph.damping,
                tol: config.graph.tol,
                max_iter: config.graph.max_iter,
                decay: config.graph.decay,
            },
        }
    }

    /// Raw-metrics phase for one commit; `graph` must hold the first parent's state and is advanced.
    fn analyze_commit(
        &self,
        repo: &GitRepository,
        commit: &CommitRecord,
        graph: &mut CallGraph,
    ) -> Result<(CommitRaw, CommitTiming), PipelineError> {
        let mut t = CommitTiming {
            commit: commit.id.clone(),
            ..CommitTiming::default()
        };
        let t0 = Instant::now();
        let changes = repo.changed_files(commit)?;
        let t1 = Instant::now();
        t.ingest = t1 - t0;

        let parse = |text: &Option<String>, adapter: &dyn LanguageAdapter, binary: bool| -> Parsed {
            match text {
                Some(s) => Some(adapter.parse(s)),
                None if binary => Some(Err(ParseError {
                    offset: 0,
                    line: 0,
                    column: 0,
                    message: "binary or non-UTF-8 content".into(),
                })),
                None => None,
            }
        };
        let files: Vec<ParsedFile> = changes
            .par_iter()
            .filter_map(|c| {
                let adapter = self.registry.for_path(&c.path)?;
                Some(ParsedFile {
                    change: c,
                    adapter,
                    before: parse(&c.before_content, adapter, c.binary && c.kind != ChangeKind::Added),
                    after: parse(&c.after_content, adapter, c.binary && c.kind != ChangeKind::Deleted),
                })
            })
            .collect();
        let t2 = Instant::now();
        t.parse = t2 - t1;

        // rename sources first so a path vacated and re-added in one commit ends up present
        let mut updates: Vec<(&str, FileState)> = files
            .iter()
            .filter(|f| f.change.kind == ChangeKind::Renamed)
            .map(|f| (f.before_path(), FileState::Removed))
            .collect();
        for f in &files {
            let state = match &f.after {
                None => FileState::Removed,
                Some(Ok(tree)) => FileState::Parsed(tree),
                Some(Err(_)) => FileState::Unparseable,
            };
            updates.push((&f.change.path, state));
        }
        if !updates.is_empty() {
            graph.update(updates);
        }
        let t3 = Instant::now();
        t.graph = t3 - t2;

        let analyzed: Vec<Option<Vec<RawFunctionRecord>>> = files.par_iter().map(|f| self.analyze_file(f)).collect();
        let mut skipped = Vec::new();
        let mut functions = Vec::new();
        for (f, recs) in files.iter().zip(analyzed) {
            match recs {
                Some(r) => functions.extend(r),
                None => skipped.push(f.change.path.clone()),
            }
        }
        let t4 = Instant::now();
        t.analyze = t4 - t3;

        if functions.iter().any(|f| !f.is_file_scope()) {
            let scores = impact_scores(graph, &self.rank);
            for f in functions.iter_mut().filter(|f| !f.is_file_scope()) {
                f.ip = scores.inter_impact(&FunctionId::new(&f.file, &f.function));
            }
        }
        t.rank = t4.elapsed();

        let raw = CommitRaw {
            commit: commit.id.clone(),
            parent_ids: commit.parent_ids.clone(),
            author: commit.author.clone(),
            timestamp: commit.timestamp,
            files_changed: changes.len(),
            bulk: changes.len() > self.config.pipeline.bulk_threshold,
            skipped_files: skipped,
            functions,
        };
        Ok((raw, t))
    }

    /// `None` when either version fails to parse.
    fn analyze_file(&self, f: &ParsedFile) -> Option<Vec<RawFunctionRecord>> {
        let empty;
        let before = match &f.before {
            Some(Ok(t)) => t,
            Some(Err(e)) => {
                log::warn!("skipping {}: before version does not parse: {e}", f.before_path());
                return None;
            }
            None => {
                empty = f.adapter.parse("").ok()?;
                &empty
            }
        };
        let empty_after;
        let after = match &f.after {
            Some(Ok(t)) => t,
            Some(Err(e)) => {
                log::warn!("skipping {}: does not parse: {e}", f.change.path);
                return None;
            }
            None => {
                empty_after = f.adapter.parse("").ok()?;
                &empty_after
            }
        };
        let path = &f.change.path;
        let fns_before = extract_functions(before, f.before_path());
        let fns_after = extract_functions(after, path);
        let mapping = map_trees_with(before, after, &self.matcher);
        let script = edit_script(&mapping, before, after, &self.blacklist);
        let weights = self.config.delta_weights();
        let mut out = Vec::new();
        for group in group_by_function(&script.actions, &fns_before, &fns_after, path) {
            let delta = delta_ast(&group.actions, &weights);
            if group.function == FILE_SCOPE {
                out.push(RawFunctionRecord {
                    file: path.clone(),
                    function: group.function,
                    delta_ast: delta,
                    complexity: None,
                    ip: 0.0,
                    ddg: 0.0,
                    cdg: 0.0,
                    ir: 1.0,
                });
                continue;
            }
            let au = fns_after.iter().find(|u| u.qualified_name == group.function);
            let bu = au
                .and_then(|a| mapping.before_of(a.node))
                .and_then(|b| fns_before.iter().find(|u| u.node == b))
                .or_else(|| fns_before.iter().find(|u| u.qualified_name == group.function));
            let complexity = match (au, bu) {
                (Some(a), _) => measure(after, a),
                (None, Some(b)) => measure(before, b),
                (None, None) => continue,
            };
            let (ddg, cdg) = match (bu, au) {
                (Some(b), Some(a)) => {
                    let pb = build_pdg(before, b);
                    let pa = build_pdg(after, a);
                    let changed = changed_pdg_nodes(&pb, &pa, &group.actions, &mapping);
                    (ddg_impact(&pa, &changed), cdg_impact(&pa, &changed))
                }
                _ => (0.0, 0.0),
            };
            out.push(RawFunctionRecord {
                file: path.clone(),
                function: group.function,
                delta_ast: delta,
                complexity: Some(complexity),
                ip: 0.0,
                ddg,
                cdg,
                ir: impact_range(ddg, cdg),
            });
        }
        Some(out)
    }
}

/// Read a cached `raw-metrics.jsonl`.
pub fn read_raw_metrics(path: &Path) -> std::io::Result<Vec<CommitRaw>> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e)))
        .collect()
}

/// Full-rebuild call graph of a commit's snapshot, for checking the incremental graph.
pub fn rebuild_call_graph(repo: &GitRepository, commit_id: &str) -> Result<CallGraph, PipelineError> {
    let registry = LanguageRegistry::default();
    let files = repo.snapshot(commit_id, |p| registry.for_path(p).is_some())?;
    let parsed: BTreeMap<&str, Option<Result<SyntaxTree, ParseError>>> = files
        .par_iter()
        .map(|(p, text)| {
            let adapter = registry.for_path(p).expect("filtered");
            (p.as_str(), text.as_deref().map(|t| adapter.parse(t)))
        })
        .collect();
    Ok(crate::graph::build_call_graph(parsed.iter().map(|(p, r)| {
        let state = match r {
            Some(Ok(t)) => FileState::Parsed(t),
            _ => FileState::Unparseable,
        };
        (*p, state)
    })))
}
