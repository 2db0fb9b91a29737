#![allow(dead_code)]

use std::path::Path;

use git2::{build::CheckoutBuilder, Oid, Repository, Signature, Time};
use tempfile::TempDir;

pub const ALICE: (&str, &str) = ("Alice", "alice@example.com");
pub const BOB: (&str, &str) = ("Bob", "bob@example.com");
pub const DOCBOT: (&str, &str) = ("docbot[bot]", "docbot[bot]@users.noreply.github.com");

/// Scripted git repository in a temporary directory.
pub struct Fixture {
    pub dir: TempDir,
    pub repo: Repository,
    clock: i64,
}

impl Fixture {
    pub fn new() -> Self {
        let dir = tempfile::tempdir().expect("tempdir");
        let repo = Repository::init(dir.path()).expect("git init");
        Self {
            dir,
            repo,
            clock: 1_600_000_000,
        }
    }

    pub fn path(&self) -> &Path {
        self.dir.path()
    }

    /// Apply `changes` (content, or `None` to delete) and commit on HEAD.
    pub fn commit(&mut self, author: (&str, &str), changes: &[(&str, Option<&str>)]) -> Oid {
        self.commit_with_parents(author, changes, &[])
    }

    pub fn commit_with_parents(&mut self, author: (&str, &str), changes: &[(&str, Option<&str>)], extra: &[Oid]) -> Oid {
        let root = self.dir.path().to_path_buf();
        let mut index = self.repo.index().unwrap();
        for (path, content) in changes {
            let full = root.join(path);
            match content {
                Some(text) => {
                    std::fs::create_dir_all(full.parent().unwrap()).unwrap();
                    std::fs::write(&full, text).unwrap();
                    index.add_path(Path::new(path)).unwrap();
                }
                None => {
                    let _ = std::fs::remove_file(&full);
                    index.remove_path(Path::new(path)).unwrap();
                }
            }
        }
        index.write().unwrap();
        let tree = self.repo.find_tree(index.write_tree().unwrap()).unwrap();
        self.clock += 60;
        let sig = Signature::new(author.0, author.1, &Time::new(self.clock, 0)).unwrap();
        let mut parents = Vec::new();
        if let Ok(head) = self.repo.head() {
            parents.push(head.peel_to_commit().unwrap());
        }
        for oid in extra {
            parents.push(self.repo.find_commit(*oid).unwrap());
        }
        let refs: Vec<_> = parents.iter().collect();
        self.repo
            .commit(Some("HEAD"), &sig, &sig, "change", &tree, &refs)
            .unwrap()
    }

    /// Rename `from` to `to` keeping the content.
    pub fn rename(&mut self, author: (&str, &str), from: &str, to: &str) -> Oid {
        let text = std::fs::read_to_string(self.dir.path().join(from)).unwrap();
        self.commit(author, &[(from, None), (to, Some(&text))])
    }

    pub fn branch_at(&mut self, name: &str, at: Oid) {
        {
            let c = self.repo.find_commit(at).unwrap();
            self.repo.branch(name, &c, true).unwrap();
        }
        self.checkout(name);
    }

    pub fn checkout(&mut self, name: &str) {
        let refname = format!("refs/heads/{name}");
        let obj = self.repo.revparse_single(&refname).unwrap();
        self.repo
            .checkout_tree(&obj, Some(CheckoutBuilder::new().force().remove_untracked(true)))
            .unwrap();
        self.repo.set_head(&refname).unwrap();
    }

    pub fn head(&self) -> Oid {
        self.repo.head().unwrap().target().unwrap()
    }

    pub fn current_branch(&self) -> String {
        self.repo.head().unwrap().shorthand().unwrap().to_string()
    }
}

/// A Java class with `n` small methods, each calling the next and `helper`.
pub fn java_class(name: &str, n: usize, extra: &str) -> String {
    let mut s = format!("package p;\n\npublic class {name} {{\n");
    for i in 0..n {
        s.push_str(&format!(
            "    int m{i}(int x) {{\n        int y = x + {i};\n        if (y > 10) {{\n            y = helper(y);\n        }}\n        return {};\n    }}\n\n",
            if i + 1 < n { format!("m{}(y)", i + 1) } else { "y".to_string() }
        ));
    }
    s.push_str("    int helper(int v) {\n        return v / 2;\n    }\n");
    s.push_str(extra);
    s.push_str("}\n");
    s
}
