//! Git history access: version tree, depth-first walk, per-commit file changes, author identity.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use git2::{Delta, DiffFindOptions, DiffOptions, ObjectType, Oid, TreeWalkMode, TreeWalkResult};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum RepoError {
    #[error("{path} is not a git repository: {message}")]
    NotARepository { path: String, message: String },
    #[error("corrupt history: {0}")]
    CorruptHistory(String),
    #[error("missing blob {0}")]
    MissingBlob(String),
    #[error("commit {0} has no author email")]
    MissingAuthor(String),
    #[error("unknown branch {0}")]
    UnknownBranch(String),
}

fn corrupt(e: git2::Error) -> RepoError {
    RepoError::CorruptHistory(e.message().to_string())
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DeveloperIdentity {
    pub email: String,
    pub display_name: String,
    pub is_bot: bool,
}

/// Lowercase and trim the email; flag bots by case-insensitive substring match on email or name.
pub fn resolve_developer<S: AsRef<str>>(
    name: Option<&str>,
    email: Option<&str>,
    bot_patterns: &[S],
) -> Option<DeveloperIdentity> {
    let email = email.map(|e| e.trim().to_lowercase()).filter(|e| !e.is_empty())?;
    let display_name = name.unwrap_or("").trim().to_string();
    let lname = display_name.to_lowercase();
    let is_bot = bot_patterns.iter().any(|p| {
        let p = p.as_ref().to_lowercase();
        !p.is_empty() && (email.contains(&p) || lname.contains(&p))
    });
    Some(DeveloperIdentity {
        email,
        display_name,
        is_bot,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChangeKind {
    Added,
    Deleted,
    Modified,
    Renamed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileChange {
    pub path: String,
    /// Source path of a rename.
    pub old_path: Option<String>,
    pub kind: ChangeKind,
    /// Absent for additions and for binary or non-UTF-8 blobs.
    pub before_content: Option<String>,
    pub after_content: Option<String>,
    pub binary: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitRecord {
    pub id: String,
    pub parent_ids: Vec<String>,
    pub author: DeveloperIdentity,
    pub timestamp: i64,
}

impl CommitRecord {
    pub fn first_parent(&self) -> Option<&str> {
        self.parent_ids.first().map(String::as_str)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VersionTree {
    pub commits: BTreeMap<String, CommitRecord>,
    pub heads: Vec<String>,
    /// First-parent children, ordered by (timestamp, id).
    children: BTreeMap<String, Vec<String>>,
}

impl VersionTree {
    pub fn from_commits(commits: impl IntoIterator<Item = CommitRecord>, heads: Vec<String>) -> Self {
        let commits: BTreeMap<String, CommitRecord> = commits.into_iter().map(|c| (c.id.clone(), c)).collect();
        let mut children: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for c in commits.values() {
            if let Some(p) = c.first_parent().filter(|p| commits.contains_key(*p)) {
                children.entry(p.to_string()).or_default().push(c.id.clone());
            }
        }
        for list in children.values_mut() {
            list.sort_by(|a, b| (commits[a].timestamp, a).cmp(&(commits[b].timestamp, b)));
        }
        Self {
            commits,
            heads,
            children,
        }
    }

    pub fn len(&self) -> usize {
        self.commits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.commits.is_empty()
    }

    /// Commits whose first parent is `id`.
    pub fn children(&self, id: &str) -> &[String] {
        self.children.get(id).map_or(&[], Vec::as_slice)
    }

    pub fn is_fork(&self, id: &str) -> bool {
        self.children(id).len() > 1
    }
}

/// Depth-first order over the first-parent tree: every commit follows its
/// first parent and each branch from a fork is emitted whole before the next.
pub fn walk_commits(tree: &VersionTree) -> Vec<&CommitRecord> {
    let mut roots: Vec<&CommitRecord> = tree
        .commits
        .values()
        .filter(|c| c.first_parent().is_none_or(|p| !tree.commits.contains_key(p)))
        .collect();
    roots.sort_by(|a, b| (a.timestamp, &a.id).cmp(&(b.timestamp, &b.id)));
    let mut out = Vec::with_capacity(tree.len());
    let mut stack: Vec<&str> = roots.iter().rev().map(|c| c.id.as_str()).collect();
    while let Some(id) = stack.pop() {
        out.push(&tree.commits[id]);
        stack.extend(tree.children(id).iter().rev().map(String::as_str));
    }
    out
}

pub struct GitRepository {
    repo: git2::Repository,
}

impl std::fmt::Debug for GitRepository {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GitRepository").field("path", &self.repo.path()).finish()
    }
}

impl GitRepository {
    pub fn open(path: &Path) -> Result<Self, RepoError> {
        let repo = git2::Repository::open(path).map_err(|e| RepoError::NotARepository {
            path: path.display().to_string(),
            message: e.message().to_string(),
        })?;
        Ok(Self { repo })
    }

    /// Commits reachable from every local branch, or from `branch` alone.
    pub fn version_tree<S: AsRef<str>>(&self, branch: Option<&str>, bot_patterns: &[S]) -> Result<VersionTree, RepoError> {
        let mut heads = BTreeSet::new();
        match branch {
            Some(b) => {
                let br = self
                    .repo
                    .find_branch(b, git2::BranchType::Local)
                    .map_err(|_| RepoError::UnknownBranch(b.to_string()))?;
                let oid = br.get().target().ok_or_else(|| RepoError::UnknownBranch(b.to_string()))?;
                heads.insert(oid);
            }
            None => {
                for br in self.repo.branches(Some(git2::BranchType::Local)).map_err(corrupt)? {
                    let (br, _) = br.map_err(corrupt)?;
                    if let Some(oid) = br.get().target() {
                        heads.insert(oid);
                    }
                }
            }
        }
        let mut walk = self.repo.revwalk().map_err(corrupt)?;
        for h in &heads {
            walk.push(*h).map_err(corrupt)?;
        }
        let mut commits = Vec::new();
        for oid in walk {
            let oid = oid.map_err(corrupt)?;
            let c = self.repo.find_commit(oid).map_err(corrupt)?;
            let sig = c.author();
            let author = resolve_developer(sig.name(), sig.email(), bot_patterns)
                .ok_or_else(|| RepoError::MissingAuthor(oid.to_string()))?;
            commits.push(CommitRecord {
                id: oid.to_string(),
                parent_ids: c.parent_ids().map(|p| p.to_string()).collect(),
                author,
                timestamp: sig.when().seconds(),
            });
        }
        Ok(VersionTree::from_commits(commits, heads.iter().map(Oid::to_string).collect()))
    }

    fn commit(&self, id: &str) -> Result<git2::Commit<'_>, RepoError> {
        let oid = Oid::from_str(id).map_err(corrupt)?;
        self.repo.find_commit(oid).map_err(corrupt)
    }

    fn blob_text(&self, oid: Oid) -> Result<(Option<String>, bool), RepoError> {
        let blob = self.repo.find_blob(oid).map_err(|_| RepoError::MissingBlob(oid.to_string()))?;
        if blob.is_binary() {
            return Ok((None, true));
        }
        match String::from_utf8(blob.content().to_vec()) {
            Ok(s) => Ok((Some(s), false)),
            Err(_) => Ok((None, true)),
        }
    }

    /// Changes against the first parent (everything is an addition for a root commit).
    pub fn changed_files(&self, commit: &CommitRecord) -> Result<Vec<FileChange>, RepoError> {
        let c = self.commit(&commit.id)?;
        let new_tree = c.tree().map_err(corrupt)?;
        let old_tree = match commit.first_parent() {
            Some(p) => Some(self.commit(p)?.tree().map_err(corrupt)?),
            None => None,
        };
        let mut opts = DiffOptions::new();
        opts.include_typechange(true);
        let mut diff = self
            .repo
            .diff_tree_to_tree(old_tree.as_ref(), Some(&new_tree), Some(&mut opts))
            .map_err(corrupt)?;
        diff.find_similar(Some(DiffFindOptions::new().renames(true)))
            .map_err(corrupt)?;
        let mut out: BTreeMap<String, FileChange> = BTreeMap::new();
        for delta in diff.deltas() {
            let kind = match delta.status() {
                Delta::Added | Delta::Copied => ChangeKind::Added,
                Delta::Deleted => ChangeKind::Deleted,
                Delta::Modified | Delta::Typechange => ChangeKind::Modified,
                Delta::Renamed => ChangeKind::Renamed,
                _ => continue,
            };
            let path_of = |f: git2::DiffFile<'_>| f.path().map(|p| p.to_string_lossy().replace('\\', "/"));
            let new_path = path_of(delta.new_file());
            let old_path = path_of(delta.old_file());
            let path = match kind {
                ChangeKind::Deleted => old_path.clone(),
                _ => new_path,
            }
            .ok_or_else(|| RepoError::CorruptHistory("delta without path".into()))?;
            let mut binary = delta.flags().is_binary();
            let before = if matches!(kind, ChangeKind::Added) {
                None
            } else {
                let (t, b) = self.blob_text(delta.old_file().id())?;
                binary |= b;
                t
            };
            let after = if matches!(kind, ChangeKind::Deleted) {
                None
            } else {
                let (t, b) = self.blob_text(delta.new_file().id())?;
                binary |= b;
                t
            };
            out.insert(
                path.clone(),
                FileChange {
                    path,
                    old_path: if kind == ChangeKind::Renamed { old_path } else { None },
                    kind,
                    before_content: before,
                    after_content: after,
                    binary,
                },
            );
        }
        Ok(out.into_values().collect())
    }

    /// Every file in the commit's tree whose path passes `keep`; `None` for binary content.
    pub fn snapshot(
        &self,
        commit_id: &str,
        keep: impl Fn(&str) -> bool,
    ) -> Result<BTreeMap<String, Option<String>>, RepoError> {
        let tree = self.commit(commit_id)?.tree().map_err(corrupt)?;
        let mut entries = Vec::new();
        tree.walk(TreeWalkMode::PreOrder, |dir, entry| {
            if entry.kind() == Some(ObjectType::Blob) {
                let path = format!("{dir}{}", entry.name().unwrap_or_default());
                if keep(&path) {
                    entries.push((path, entry.id()));
                }
            }
            TreeWalkResult::Ok
        })
        .map_err(corrupt)?;
        let mut out = BTreeMap::new();
        for (path, oid) in entries {
            out.insert(path, self.blob_text(oid)?.0);
        }
        Ok(out)
    }

    /// Canonical working-directory path, or the git dir for bare repositories.
    pub fn location(&self) -> &Path {
        self.repo.workdir().unwrap_or_else(|| self.repo.path())
    }
}
