#![allow(dead_code)]

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub const PEOPLE: &[&str] = &[
    "Kurt Gödel", "Marie Curie", "Alan Turing", "Tom Brady", "Carl Sagan", "Sean Connery",
    "Cristiano Ronaldo", "Ada Lovelace", "Niels Bohr", "Frida Kahlo", "Miles Davis", "Jane Austen",
];
pub const PLACES: &[&str] = &["Vienna", "Paris", "London", "Boston", "Turin", "Copenhagen", "Mexico City", "Houston"];
pub const ORGS: &[&str] = &["Juventus", "Princeton University", "Bletchley Park", "New England Patriots", "NASA", "Royal Society"];

const TEMPLATES: &[&str] = &[
    "Where was {P} born?",
    "When was {P} born?",
    "Where did {P} go to school?",
    "What was {P}'s home life like?",
    "Did {P} ever live in {L}?",
    "When did {P} join {O}?",
    "How old was {P} when moving to {L}?",
    "What awards did {P} receive?",
    "Who influenced {P} most?",
    "What happened after that?",
    "Did {P} win the prize from {O}?",
    "What were {P}'s interests?",
];

pub struct Paths {
    pub corpus: PathBuf,
    pub catalog: PathBuf,
    pub first: PathBuf,
    pub last: PathBuf,
    pub lexicon: PathBuf,
    pub paraphrases: PathBuf,
}

fn turn(q: &str, a: &str) -> String {
    format!(
        "{{\"question\":{},\"rewritten_question\":{},\"answer\":{}}}",
        serde_json::to_string(q).unwrap(),
        serde_json::to_string(q).unwrap(),
        serde_json::to_string(a).unwrap()
    )
}

fn conversation(id: &str, topic: &str, turns: &[(String, String)]) -> String {
    let turns: Vec<String> = turns.iter().map(|(q, a)| turn(q, a)).collect();
    format!("{{\"conversation_id\":\"{id}\",\"topic\":\"{topic}\",\"turns\":[{}]}}\n", turns.join(","))
}

fn write_resources(dir: &Path, corpus: String, paraphrases: &str) -> Paths {
    let mut catalog = String::new();
    for p in PEOPLE {
        let _ = writeln!(catalog, "{p}\tPERSON");
    }
    for l in PLACES {
        let _ = writeln!(catalog, "{l}\tLOCATION");
    }
    for o in ORGS {
        let _ = writeln!(catalog, "{o}\tORG");
    }
    let paths = Paths {
        corpus: dir.join("corpus.jsonl"),
        catalog: dir.join("catalog.tsv"),
        first: dir.join("first.txt"),
        last: dir.join("last.txt"),
        lexicon: dir.join("lexicon.txt"),
        paraphrases: dir.join("paraphrases.jsonl"),
    };
    fs::write(&paths.corpus, corpus).unwrap();
    fs::write(&paths.catalog, catalog).unwrap();
    fs::write(&paths.first, "john\nmary\nlinda\npeter\n").unwrap();
    fs::write(&paths.last, "smith\nmiller\ngarcia\nbrown\n").unwrap();
    fs::write(&paths.lexicon, "curt\nmary\nallan\nthom\nkarl\nshawn\ncary\nbrady\nneals\nkurie\n").unwrap();
    fs::write(&paths.paraphrases, paraphrases).unwrap();
    paths
}

/// Synthetic corpus of `n` conversations with 1 to 6 turns each, built from
/// question templates over a fixed set of people, places and organizations.
pub fn synthetic(dir: &Path, n: usize) -> Paths {
    let mut corpus = String::new();
    for i in 0..n {
        let person = PEOPLE[i % PEOPLE.len()];
        let len = 1 + (i * 7 + 3) % 6;
        let turns: Vec<(String, String)> = (0..len)
            .map(|j| {
                let t = TEMPLATES[(i * 5 + j * 7) % TEMPLATES.len()];
                let q = t
                    .replace("{P}", person)
                    .replace("{L}", PLACES[(i + j) % PLACES.len()])
                    .replace("{O}", ORGS[(i * 3 + j) % ORGS.len()]);
                (q, format!("Answer {j} of dialog {i}, mentioning {person} and some further detail number {}", i * j))
            })
            .collect();
        corpus.push_str(&conversation(&format!("conv{i:03}"), person, &turns));
    }
    write_resources(dir, corpus, "{\"question\":\"When did Kurt Gödel join Juventus?\",\"paraphrase\":\"In which year did Kurt Gödel join Juventus?\"}\n")
}

pub const GODEL_TURNS: &[(&str, &str)] = &[
    ("Where was Kurt Gödel born?", "Brunn, Austria-Hungary"),
    ("When was Kurt Gödel born?", "April 28, 1906"),
    ("What was Kurt Gödel’s home life like?", "ethnic German family"),
    ("Where did Kurt Gödel go to school?", "Godel attended the Evangelische Volksschule in Brunn"),
    ("What were Kurt Gödel's interests?", "mathematics and philosophy"),
];

/// The five-turn Gödel dialog plus a one-turn dialog supplying the pool
/// question about Cristiano Ronaldo.
pub fn godel(dir: &Path) -> Paths {
    let turns: Vec<(String, String)> = GODEL_TURNS.iter().map(|(q, a)| (q.to_string(), a.to_string())).collect();
    let mut corpus = conversation("godel", "Kurt Gödel", &turns);
    corpus.push_str(&conversation(
        "ronaldo",
        "Cristiano Ronaldo",
        &[("When did Cristiano Ronaldo join Juventus?".into(), "In July 2018".into())],
    ));
    let paths = write_resources(
        dir,
        corpus,
        "{\"question\":\"Where did Kurt Gödel go to school?\",\"paraphrase\":\"Which school did Kurt Gödel attend?\"}\n",
    );
    fs::write(&paths.catalog, "Kurt Gödel\tPERSON\nCristiano Ronaldo\tPERSON\nJuventus\tORG\n").unwrap();
    paths
}

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_followup")
}

pub fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).env("RUST_LOG", "error").output().expect("spawn followup")
}

pub fn run_ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(out.status.success(), "followup {args:?} failed:\n{}", String::from_utf8_lossy(&out.stderr));
    out
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// `generate` with every resource of `paths`.
pub fn generate(paths: &Paths, out: &Path, seed: u64, workers: usize, extra: &[&str]) -> Output {
    let seed = seed.to_string();
    let workers = workers.to_string();
    let mut args = vec![
        "--workers", &workers, "generate",
        "--corpus", s(&paths.corpus),
        "--catalog", s(&paths.catalog),
        "--first-names", s(&paths.first),
        "--last-names", s(&paths.last),
        "--lexicon", s(&paths.lexicon),
        "--paraphrases", s(&paths.paraphrases),
        "--seed", &seed,
        "--out", s(out),
    ];
    args.extend_from_slice(extra);
    run_ok(&args)
}
