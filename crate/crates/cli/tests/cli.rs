use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use although_core::{parse_corpus, KnowledgeBase};

fn although(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_although"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = although(args);
    assert!(
        out.status.success(),
        "{:?}: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

struct Work {
    dir: tempfile::TempDir,
}

impl Work {
    fn new() -> Self {
        Work {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn principles(&self, body: &str) -> PathBuf {
        let p = self.path("principles.json");
        fs::write(&p, body).unwrap();
        p
    }
}

const DEFAULT_PRINCIPLES: &str = r#"{"principles": ["desired(on(a,b))", "desired(on(b,c))", "desired(clear(a))",
  "must_precede(on(b,c),on(a,b))"], "ranks": {}}"#;

#[test]
fn generate_blocksworld_writes_120_instances() {
    let w = Work::new();
    let c = w.path("c.json");
    ok(&["generate", "--domain", "blocksworld", "--out", s(&c)]);
    let corpus = parse_corpus(&fs::read_to_string(&c).unwrap()).unwrap();
    assert_eq!(corpus.instances().len(), 120);
}

#[test]
fn stacked_appears_in_final_states_only() {
    let w = Work::new();
    let c = w.path("c.json");
    ok(&[
        "generate",
        "--domain",
        "blocksworld",
        "--inject",
        "stacked",
        "--out",
        s(&c),
    ]);
    let corpus = parse_corpus(&fs::read_to_string(&c).unwrap()).unwrap();
    let stacked = although_core::Atom::parse("stacked([a,b,c])").unwrap();
    for inst in corpus.instances() {
        assert!(inst.last().holds(&stacked));
        assert!(inst.states()[..inst.len()].iter().all(|st| !st.holds(&stacked)));
    }
}

#[test]
fn same_seed_same_bytes_other_seed_differs() {
    let w = Work::new();
    let run = |name: &str, seed: &str| {
        let p = w.path(name);
        ok(&[
            "generate",
            "--domain",
            "blocksworld",
            "--inject",
            "prevention-b",
            "--seed",
            seed,
            "--out",
            s(&p),
        ]);
        fs::read(p).unwrap()
    };
    assert_eq!(run("a.json", "4"), run("b.json", "4"));
    assert_ne!(run("a.json", "4"), run("c.json", "5"));
}

#[test]
fn learn_base_corpus_has_no_prevention() {
    let w = Work::new();
    let (c, k) = (w.path("c.json"), w.path("k.json"));
    ok(&["generate", "--domain", "blocksworld", "--out", s(&c)]);
    ok(&["learn", "--corpus", s(&c), "--out", s(&k)]);
    let text = fs::read_to_string(&k).unwrap();
    assert!(text.contains("\"prevents\": []"));
    let kb = KnowledgeBase::from_json(&text).unwrap();
    assert_eq!(kb.to_json(), text);
}

#[test]
fn explain_figure2_text_and_json() {
    let w = Work::new();
    let (c, f, k) = (w.path("c.json"), w.path("f.json"), w.path("k.json"));
    ok(&["generate", "--domain", "blocksworld", "--out", s(&c)]);
    ok(&["learn", "--corpus", s(&c), "--out", s(&k)]);
    ok(&["generate", "--domain", "figure2", "--out", s(&f)]);
    let pr = w.principles(DEFAULT_PRINCIPLES);
    let (t, j) = (w.path("e.txt"), w.path("e.jsonl"));
    let base = [
        "explain",
        "--corpus",
        s(&f),
        "--kb",
        s(&k),
        "--principles",
        s(&pr),
        "--instance",
        "figure2",
    ];
    ok(&[&base[..], &["--out", s(&t), "--render", "text"]].concat());
    ok(&[&base[..], &["--out", s(&j)]].concat());
    let text = fs::read_to_string(&t).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines.iter().all(|l| l.starts_with("Although {")));
    assert_eq!(
        lines[1],
        "Although {Desired(On(A, B)), On(A, B)/S1}, the actor executed Move(A, B, P2), \
         resulting in S2 where {Desired(On(A, B)), ¬(On(A, B)/S2)}"
    );
    assert!(lines[3]
        .ends_with("; however, MustPrecede(On(B, C), On(A, B)):[Move(A, B, P2), Move(B, P1, C), Move(A, P2, B)]"));
    let json = fs::read_to_string(&j).unwrap();
    let kinds: Vec<String> = json
        .lines()
        .map(|l| {
            serde_json::from_str::<serde_json::Value>(l).unwrap()["kind"]
                .as_str()
                .unwrap()
                .to_string()
        })
        .collect();
    assert_eq!(kinds, ["although4", "although4", "although5", "although5"]);
}

#[test]
fn already_solved_instance_has_no_explanations() {
    let w = Work::new();
    let (c, k, e) = (w.path("c.json"), w.path("k.json"), w.path("e.txt"));
    ok(&["generate", "--domain", "blocksworld", "--out", s(&c)]);
    ok(&["learn", "--corpus", s(&c), "--out", s(&k)]);
    let corpus = parse_corpus(&fs::read_to_string(&c).unwrap()).unwrap();
    let solved = corpus
        .instances()
        .iter()
        .find(|i| i.is_empty())
        .expect("goal configuration");
    let pr = w.principles(DEFAULT_PRINCIPLES);
    ok(&[
        "explain",
        "--corpus",
        s(&c),
        "--kb",
        s(&k),
        "--principles",
        s(&pr),
        "--instance",
        solved.id(),
        "--out",
        s(&e),
    ]);
    assert_eq!(fs::read_to_string(&e).unwrap(), "");
}

#[test]
fn report_of_empty_kb() {
    let w = Work::new();
    let k = w.path("k.json");
    let empty = KnowledgeBase::default().to_json();
    fs::write(&k, &empty).unwrap();
    let text = ok(&["report", "--kb", s(&k)]);
    let headers = text.lines().filter(|l| !l.starts_with("  ")).count();
    let nones = text.lines().filter(|l| *l == "  (none)").count();
    assert!(headers > 5);
    assert_eq!(headers, nones);
    assert_eq!(ok(&["report", "--kb", s(&k), "--format", "json"]), empty);
}

#[test]
fn micro_domain_with_goal_override() {
    let w = Work::new();
    let (c, k) = (w.path("c.json"), w.path("k.json"));
    ok(&["generate", "--domain", "microblock", "--out", s(&c)]);
    ok(&["learn", "--corpus", s(&c), "--out", s(&k), "--goal", "g"]);
    let report = ok(&["report", "--kb", s(&k)]);
    assert!(report.contains("Undesired propositions (1)\n  Q\n"));
    assert!(report.contains("Undesired actions (1)\n  Spoil\n"));
}

fn assert_one_line_failure(out: &Output) {
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");
    assert!(err.starts_with("error: "), "{err}");
}

#[test]
fn unknown_instance_and_bad_principles_fail_cleanly() {
    let w = Work::new();
    let (f, k) = (w.path("f.json"), w.path("k.json"));
    ok(&["generate", "--domain", "figure2", "--out", s(&f)]);
    ok(&["learn", "--corpus", s(&f), "--out", s(&k)]);
    let pr = w.principles(DEFAULT_PRINCIPLES);
    let out = w.path("e.txt");
    let args = |pr: &Path, id: &'static str| {
        vec![
            "explain".to_string(),
            "--corpus".into(),
            s(&f).into(),
            "--kb".into(),
            s(&k).into(),
            "--principles".into(),
            s(pr).into(),
            "--instance".into(),
            id.into(),
            "--out".into(),
            s(&out).into(),
        ]
    };
    let run = |v: Vec<String>| although(&v.iter().map(String::as_str).collect::<Vec<_>>());
    let o = run(args(&pr, "nope"));
    assert_one_line_failure(&o);
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown instance `nope`"));

    let bad = w.principles(r#"{"principles": ["desired(On(a,b))"]}"#);
    assert_one_line_failure(&run(args(&bad, "figure2")));
    let unlisted = w.principles(r#"{"principles": ["desired(on(a,b))"], "ranks": {"desired(clear(a))": 3}}"#);
    assert_one_line_failure(&run(args(&unlisted, "figure2")));
}

#[test]
fn bad_corpus_and_unwritable_output_fail_cleanly() {
    let w = Work::new();
    let c = w.path("c.json");
    fs::write(
        &c,
        "{\"class\": \"x\", \"instances\": [{\"id\": \"i\", \"states\": [[\"On(a,b)\"]], \"actions\": []}]}",
    )
    .unwrap();
    let o = although(&["learn", "--corpus", s(&c), "--out", s(&w.path("k.json"))]);
    assert_one_line_failure(&o);
    assert!(String::from_utf8_lossy(&o.stderr).contains(s(&c)));

    let missing = w.path("no/such/dir/c.json");
    assert_one_line_failure(&although(&["generate", "--domain", "figure2", "--out", s(&missing)]));
    assert_one_line_failure(&although(&[
        "generate",
        "--domain",
        "microblock",
        "--inject",
        "stacked",
        "--out",
        s(&w.path("x.json")),
    ]));
    assert!(!although(&["generate", "--domain", "hanoi", "--out", "x"])
        .status
        .success());
}
