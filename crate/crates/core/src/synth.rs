//! Synthetic git repositories with a planted vulnerability-fix signal.
//!
//! Every commit rewrites the initializer of a local variable inside one
//! handler method. Four lines further down, inside an `if` block, the
//! variable reaches a sink call. The commit is positive when that sink is
//! a dangerous one (`executeQuery`, `exec`, `evaluate`, `run`) and negative
//! for a benign one (`display`, `record`, `print`). The changed line and the
//! message look the same for both classes, so the label is visible only
//! through the def-use chain from the changed line.

use std::path::Path;
use std::process::Command;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ingest::{DatasetManifest, ManifestRecord, Split};

/// (receiver field, sink method) pairs.
pub const POSITIVE_SINKS: [(&str, &str); 4] =
    [("statement", "executeQuery"), ("runtime", "exec"), ("engine", "evaluate"), ("executor", "run")];
pub const NEGATIVE_SINKS: [(&str, &str); 3] = [("view", "display"), ("journal", "record"), ("console", "print")];

const VERBS: [&str; 8] = ["load", "store", "apply", "check", "sync", "fetch", "update", "route"];

pub fn is_positive_sink(method: &str) -> bool {
    POSITIVE_SINKS.iter().any(|(_, m)| *m == method)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub repos: usize,
    pub commits_per_repo: usize,
    pub positive_rate: f64,
    /// Trailing repositories assigned to the test split.
    pub test_repos: usize,
    /// Repositories before the test ones assigned to validation.
    pub validation_repos: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig { repos: 12, commits_per_repo: 20, positive_rate: 0.09, test_repos: 3, validation_repos: 1, seed: 7 }
    }
}

struct Handler {
    name: String,
    var: String,
    receiver: &'static str,
    sink: &'static str,
    literal: String,
}

struct JavaClass {
    package: String,
    name: String,
    handlers: Vec<Handler>,
}

impl JavaClass {
    fn path(&self) -> String {
        format!("src/main/java/{}/{}.java", self.package.replace('.', "/"), self.name)
    }

    fn render(&self) -> String {
        let mut s = format!(
            "package {};\n\nimport java.util.logging.Logger;\n\npublic class {} {{\n    private static final Logger LOG = Logger.getLogger(\"{}\");\n",
            self.package, self.name, self.name
        );
        let mut receivers: Vec<&str> = self.handlers.iter().map(|h| h.receiver).collect();
        receivers.sort_unstable();
        receivers.dedup();
        for r in receivers {
            s.push_str(&format!("    private final Sink {r} = new Sink();\n"));
        }
        for h in &self.handlers {
            s.push_str(&format!(
                "\n    /** Handles {name} requests. */\n    public void {name}(String input) {{\n        String {var} = input + \"{lit}\";\n        int count = input.length();\n        LOG.info(\"{name}\");\n        if (count > 0) {{\n            {recv}.{sink}({var});\n        }}\n        LOG.info(\"done\");\n    }}\n",
                name = h.name,
                var = h.var,
                lit = h.literal,
                recv = h.receiver,
                sink = h.sink,
            ));
        }
        s.push_str("}\n");
        s
    }
}

fn literal(rng: &mut ChaCha8Rng) -> String {
    let n = rng.gen_range(3..7);
    (0..n).map(|_| rng.gen_range(b'a'..=b'z') as char).collect()
}

/// Project-specific identifier such as `Qkwe`, so names carry no label.
fn word(rng: &mut ChaCha8Rng) -> String {
    let mut w = literal(rng);
    w[..1].make_ascii_uppercase();
    w
}

fn new_class(rng: &mut ChaCha8Rng, package: &str, name: &str, positives: usize, negatives: usize) -> JavaClass {
    let mut sinks: Vec<(&'static str, &'static str)> = Vec::new();
    for _ in 0..positives {
        sinks.push(*POSITIVE_SINKS.choose(rng).unwrap());
    }
    for _ in 0..negatives {
        sinks.push(*NEGATIVE_SINKS.choose(rng).unwrap());
    }
    sinks.shuffle(rng);
    let mut names: Vec<String> = Vec::new();
    let handlers = sinks
        .into_iter()
        .map(|(receiver, sink)| {
            let name = loop {
                let n = format!("{}{}", VERBS.choose(rng).unwrap(), word(rng));
                if !names.contains(&n) {
                    names.push(n.clone());
                    break n;
                }
            };
            let var = literal(rng);
            Handler { name, var, receiver, sink, literal: literal(rng) }
        })
        .collect();
    JavaClass { package: package.into(), name: name.into(), handlers }
}

fn git(dir: &Path, args: &[&str]) -> Result<String> {
    let out = Command::new("git")
        .arg("-C")
        .arg(dir)
        .args(args)
        .env("GIT_CONFIG_NOSYSTEM", "1")
        .env("GIT_CONFIG_GLOBAL", "/dev/null")
        .output()
        .map_err(|e| Error::Git(format!("cannot run git: {e}")))?;
    if !out.status.success() {
        return Err(Error::Git(format!("git {} failed: {}", args.join(" "), String::from_utf8_lossy(&out.stderr).trim())));
    }
    Ok(String::from_utf8_lossy(&out.stdout).trim().to_string())
}

struct RepoWriter<'a> {
    dir: &'a Path,
    tick: u64,
}

impl RepoWriter<'_> {
    fn init(dir: &Path) -> Result<RepoWriter<'_>> {
        std::fs::create_dir_all(dir)?;
        git(dir, &["init", "-q"])?;
        git(dir, &["config", "user.name", "Synth"])?;
        git(dir, &["config", "user.email", "synth@example.com"])?;
        git(dir, &["config", "commit.gpgsign", "false"])?;
        Ok(RepoWriter { dir, tick: 0 })
    }

    fn write(&self, class: &JavaClass) -> Result<()> {
        let path = self.dir.join(class.path());
        std::fs::create_dir_all(path.parent().expect("class path has a parent"))?;
        std::fs::write(path, class.render())?;
        Ok(())
    }

    /// Commit everything with a fixed clock so hashes are reproducible.
    fn commit(&mut self, message: &str) -> Result<String> {
        git(self.dir, &["add", "-A"])?;
        self.tick += 1;
        let date = format!("{} +0000", 1_600_000_000 + self.tick * 3600);
        let out = Command::new("git")
            .arg("-C")
            .arg(self.dir)
            .args(["commit", "-q", "-m", message])
            .env("GIT_AUTHOR_DATE", &date)
            .env("GIT_COMMITTER_DATE", &date)
            .env("GIT_CONFIG_NOSYSTEM", "1")
            .env("GIT_CONFIG_GLOBAL", "/dev/null")
            .output()
            .map_err(|e| Error::Git(format!("cannot run git: {e}")))?;
        if !out.status.success() {
            return Err(Error::Git(String::from_utf8_lossy(&out.stderr).trim().to_string()));
        }
        git(self.dir, &["rev-parse", "HEAD"])
    }
}

/// Rewrite the initializer of one handler whose sink class matches
/// `positive`. Returns the class index and the handler name.
fn mutate(rng: &mut ChaCha8Rng, classes: &mut [JavaClass], positive: bool) -> (usize, String) {
    let candidates: Vec<(usize, usize)> = classes
        .iter()
        .enumerate()
        .flat_map(|(ci, c)| c.handlers.iter().enumerate().map(move |(hi, h)| (ci, hi, h)))
        .filter(|(_, _, h)| is_positive_sink(h.sink) == positive)
        .map(|(ci, hi, _)| (ci, hi))
        .collect();
    let &(ci, hi) = candidates.choose(rng).expect("every class mix has both sink kinds");
    let h = &mut classes[ci].handlers[hi];
    let old = std::mem::take(&mut h.literal);
    h.literal = loop {
        let l = literal(rng);
        if l != old {
            break l;
        }
    };
    (ci, h.name.clone())
}

/// One repository: an initial snapshot commit, then `labels.len()`
/// labeled commits. Returns the labeled commit hashes.
fn build_repo(dir: &Path, repo_index: usize, labels: &[bool], rng: &mut ChaCha8Rng) -> Result<Vec<String>> {
    let mut repo = RepoWriter::init(dir)?;
    let package = format!("synth.r{repo_index}");
    let (first, second) = (word(rng), word(rng) + "Service");
    let mut classes = vec![new_class(rng, &package, &first, 2, 2), new_class(rng, &package, &second, 2, 2)];
    for c in &classes {
        repo.write(c)?;
    }
    repo.commit("Initial import")?;
    let mut shas = Vec::new();
    for &positive in labels {
        let (ci, name) = mutate(rng, &mut classes, positive);
        repo.write(&classes[ci])?;
        shas.push(repo.commit(&format!("Update {name}"))?);
    }
    Ok(shas)
}

fn labels(rng: &mut ChaCha8Rng, n: usize, rate: f64) -> Vec<bool> {
    let mut out: Vec<bool> = (0..n).map(|_| rng.gen_bool(rate)).collect();
    // both classes in every repository whenever possible
    if n >= 2 {
        if !out.contains(&true) {
            out[0] = true;
        }
        if !out.contains(&false) {
            out[n - 1] = false;
        }
    }
    out
}

/// Write `cfg.repos` repositories named `repo00`, `repo01`, ... under
/// `root` and return the project-level-split manifest.
pub fn generate_corpus(root: &Path, cfg: &SynthConfig) -> Result<DatasetManifest> {
    if cfg.test_repos + cfg.validation_repos >= cfg.repos {
        return Err(Error::Config("synthetic corpus needs at least one training repository".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut records = Vec::new();
    for r in 0..cfg.repos {
        let name = format!("repo{r:02}");
        let split = if r >= cfg.repos - cfg.test_repos {
            Split::Test
        } else if r >= cfg.repos - cfg.test_repos - cfg.validation_repos {
            Split::Validation
        } else {
            Split::Train
        };
        let labels = labels(&mut rng, cfg.commits_per_repo, cfg.positive_rate);
        let shas = build_repo(&root.join(&name), r, &labels, &mut rng)?;
        for (commit, label) in shas.into_iter().zip(labels) {
            records.push(ManifestRecord { repo: name.clone(), commit, label, split });
        }
    }
    let manifest = DatasetManifest { records };
    manifest.validate()?;
    Ok(manifest)
}

/// A fresh repository with `commits` changes of which exactly one is a
/// planted fix. Returns the planted commit hash.
pub fn generate_scan_repo(dir: &Path, commits: usize, seed: u64) -> Result<String> {
    if commits == 0 {
        return Err(Error::Config("scan repository needs at least one commit".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let planted = rng.gen_range(0..commits);
    let labels: Vec<bool> = (0..commits).map(|i| i == planted).collect();
    let shas = build_repo(dir, 99, &labels, &mut rng)?;
    Ok(shas[planted].clone())
}
