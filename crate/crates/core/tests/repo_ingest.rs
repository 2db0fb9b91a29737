mod common;

use common::{Fixture, ALICE, BOB};
use cvalue::repo::{walk_commits, ChangeKind, GitRepository, RepoError, VersionTree};

const BOTS: [&str; 2] = ["dependabot", "[bot]"];

fn tree_of(f: &Fixture) -> (GitRepository, VersionTree) {
    let repo = GitRepository::open(f.path()).unwrap();
    let tree = repo.version_tree(None, &BOTS).unwrap();
    (repo, tree)
}

#[test]
fn not_a_repository() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(GitRepository::open(dir.path()), Err(RepoError::NotARepository { .. })));
}

#[test]
fn unknown_branch() {
    let mut f = Fixture::new();
    f.commit(ALICE, &[("a.txt", Some("x"))]);
    let repo = GitRepository::open(f.path()).unwrap();
    assert!(matches!(repo.version_tree(Some("nope"), &BOTS), Err(RepoError::UnknownBranch(_))));
}

#[test]
fn single_root_and_linear_chain() {
    let mut f = Fixture::new();
    let a = f.commit(ALICE, &[("a.txt", Some("1"))]);
    let (_, t) = tree_of(&f);
    assert_eq!(t.len(), 1);
    assert!(t.commits[&a.to_string()].parent_ids.is_empty());

    let b = f.commit(ALICE, &[("a.txt", Some("2"))]);
    let c = f.commit(ALICE, &[("a.txt", Some("3"))]);
    let (_, t) = tree_of(&f);
    assert_eq!(t.len(), 3);
    let order: Vec<String> = walk_commits(&t).iter().map(|c| c.id.clone()).collect();
    assert_eq!(order, [a, b, c].map(|o| o.to_string()));
    assert_eq!(t.commits[&c.to_string()].parent_ids, vec![b.to_string()]);
}

#[test]
fn fork_and_merge_counts() {
    let mut f = Fixture::new();
    let base = f.commit(ALICE, &[("a.txt", Some("1"))]);
    let main = f.current_branch();
    f.branch_at("side", base);
    let s1 = f.commit(BOB, &[("b.txt", Some("side"))]);
    f.checkout(&main);
    f.commit(ALICE, &[("a.txt", Some("2"))]);
    let m = f.commit_with_parents(ALICE, &[("b.txt", Some("side"))], &[s1]);
    let (_, t) = tree_of(&f);
    assert_eq!(t.len(), 4);
    let parents: Vec<usize> = {
        let mut v: Vec<usize> = t.commits.values().map(|c| c.parent_ids.len()).collect();
        v.sort();
        v
    };
    assert_eq!(parents, vec![0, 1, 1, 2]);
    assert_eq!(t.commits[&m.to_string()].parent_ids.len(), 2);
    assert!(t.is_fork(&base.to_string()));
}

#[test]
fn branches_are_contiguous_in_walk() {
    // base -> (x1 -> x2), (y1 -> y2) with a second fork at x1 -> (z1 -> z2)
    let mut f = Fixture::new();
    let base = f.commit(ALICE, &[("a.txt", Some("0"))]);
    let main = f.current_branch();
    let x1 = f.commit(ALICE, &[("a.txt", Some("x1"))]);
    let x2 = f.commit(ALICE, &[("a.txt", Some("x2"))]);
    f.branch_at("y", base);
    let y1 = f.commit(BOB, &[("b.txt", Some("y1"))]);
    let y2 = f.commit(BOB, &[("b.txt", Some("y2"))]);
    f.branch_at("z", x1);
    let z1 = f.commit(BOB, &[("c.txt", Some("z1"))]);
    let z2 = f.commit(BOB, &[("c.txt", Some("z2"))]);
    f.checkout(&main);
    let (_, t) = tree_of(&f);
    let order: Vec<String> = walk_commits(&t).iter().map(|c| c.id.clone()).collect();
    assert_eq!(order.len(), 7);
    let pos = |o: git2::Oid| order.iter().position(|x| *x == o.to_string()).unwrap();
    for (a, b) in [(y1, y2), (z1, z2)] {
        assert_eq!(pos(b), pos(a) + 1, "branch commits adjacent");
    }
    assert!(pos(base) < pos(x1) && pos(x1) < pos(x2) && pos(x1) < pos(z1));
    // each commit after its first parent
    for c in walk_commits(&t) {
        if let Some(p) = c.first_parent() {
            assert!(order.iter().position(|x| x == p) < order.iter().position(|x| *x == c.id));
        }
    }
}

#[test]
fn changed_files_against_first_parent() {
    let mut f = Fixture::new();
    let root = f.commit(ALICE, &[("A.java", Some("class A {}")), ("B.java", Some("class B {}"))]);
    let (repo, t) = tree_of(&f);
    let ch = repo.changed_files(&t.commits[&root.to_string()]).unwrap();
    assert_eq!(ch.len(), 2);
    assert!(ch.iter().all(|c| c.kind == ChangeKind::Added && c.before_content.is_none()));

    let one = f.commit(ALICE, &[("A.java", Some("class A { int x; }"))]);
    let (repo, t) = tree_of(&f);
    let ch = repo.changed_files(&t.commits[&one.to_string()]).unwrap();
    assert_eq!(ch.len(), 1);
    assert_eq!(ch[0].kind, ChangeKind::Modified);
    assert_eq!(ch[0].before_content.as_deref(), Some("class A {}"));
    assert_eq!(ch[0].after_content.as_deref(), Some("class A { int x; }"));

    let body = "class Big {\n".to_string() + &"  int f() { return 1; }\n".repeat(20) + "}\n";
    f.commit(ALICE, &[("Big.java", Some(&body))]);
    let r = f.rename(ALICE, "Big.java", "Huge.java");
    let gone = f.commit(ALICE, &[("B.java", None)]);
    let (repo, t) = tree_of(&f);
    let ch = repo.changed_files(&t.commits[&r.to_string()]).unwrap();
    assert_eq!(ch.len(), 1);
    assert_eq!(ch[0].kind, ChangeKind::Renamed);
    assert_eq!(ch[0].old_path.as_deref(), Some("Big.java"));
    let ch = repo.changed_files(&t.commits[&gone.to_string()]).unwrap();
    assert_eq!(ch[0].kind, ChangeKind::Deleted);
    assert!(ch[0].after_content.is_none());
}

#[test]
fn merge_without_first_parent_delta_is_empty() {
    let mut f = Fixture::new();
    let base = f.commit(ALICE, &[("a.txt", Some("1"))]);
    let main = f.current_branch();
    f.branch_at("side", base);
    let side = f.commit(BOB, &[("a.txt", Some("1"))]);
    f.checkout(&main);
    // merge keeping our tree unchanged
    let m = f.commit_with_parents(ALICE, &[], &[side]);
    let (repo, t) = tree_of(&f);
    assert!(repo.changed_files(&t.commits[&m.to_string()]).unwrap().is_empty());
}

#[test]
fn before_content_matches_parent_blob() {
    let mut f = Fixture::new();
    f.commit(ALICE, &[("a.txt", Some("one")), ("b.txt", Some("two"))]);
    for i in 0..4 {
        f.commit(ALICE, &[("a.txt", Some(&format!("one {i}")))]);
    }
    let (repo, t) = tree_of(&f);
    for c in walk_commits(&t) {
        let Some(p) = c.first_parent() else { continue };
        let snap = repo.snapshot(p, |_| true).unwrap();
        for ch in repo.changed_files(c).unwrap() {
            if let Some(before) = &ch.before_content {
                assert_eq!(snap[&ch.path].as_deref(), Some(before.as_str()));
            }
        }
    }
}

#[test]
fn developers_keyed_by_email() {
    let mut f = Fixture::new();
    let a = f.commit(("Ann", "Dev@X.COM"), &[("a.txt", Some("1"))]);
    let b = f.commit(("Ann B.", "dev@x.com"), &[("a.txt", Some("2"))]);
    let bot = f.commit(
        ("dependabot[bot]", "49699333+dependabot[bot]@users.noreply.github.com"),
        &[("a.txt", Some("3"))],
    );
    let (_, t) = tree_of(&f);
    let ea = &t.commits[&a.to_string()].author;
    let eb = &t.commits[&b.to_string()].author;
    assert_eq!(ea.email, "dev@x.com");
    assert_eq!(ea.email, eb.email);
    assert!(!ea.is_bot);
    assert!(t.commits[&bot.to_string()].author.is_bot);
}
