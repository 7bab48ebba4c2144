use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn termorder(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_termorder")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn without_timestamp(s: &str) -> String {
    s.lines().filter(|l| !l.starts_with("# timestamp=")).collect::<Vec<_>>().join("\n")
}

const CORPUS: &str = "<DOC>\n<DOCNO> D1 </DOCNO>\nthe retrieval of documents by term order\n</DOC>\n\
<DOC>\n<DOCNO> D2 </DOCNO>\norder of terms in retrieval\n</DOC>\n\
<DOC>\n<DOCNO> D3 </DOCNO>\nterm order retrieval models\n</DOC>\n\
<DOC>\n<DOCNO> D4 </DOCNO>\nunrelated text about cooking\n</DOC>\n\
<DOC>\n<DOCNO> D5 </DOCNO>\nmore cooking and baking\n</DOC>\n";

fn fixture(dir: &Path) -> (String, String) {
    let corpus = dir.join("corpus.trec");
    fs::write(&corpus, CORPUS).unwrap();
    let index = dir.join("index");
    let out = termorder(&["build-index", "--corpus", corpus.to_str().unwrap(), "--index", index.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).starts_with("docs=5 "));
    fs::write(dir.join("topics.tsv"), "1\tterm order retrieval\n2\tthe of\n").unwrap();
    fs::write(dir.join("qrels.txt"), "1 0 D1 1\n1 0 D2 0\n1 0 D3 1\n").unwrap();
    (index.to_str().unwrap().to_string(), dir.join("topics.tsv").to_str().unwrap().to_string())
}

#[test]
fn build_is_deterministic_and_rejects_empty_input() {
    let dir = tempfile::tempdir().unwrap();
    let (index, _) = fixture(dir.path());
    let again = dir.path().join("again");
    let out = termorder(&["build-index", "--corpus", dir.path().join("corpus.trec").to_str().unwrap(), "--index", again.to_str().unwrap()]);
    let hash = |s: &str| s.split("manifest_sha256=").nth(1).unwrap().trim().to_string();
    let first = termorder(&["build-index", "--corpus", dir.path().join("corpus.trec").to_str().unwrap(), "--index", &index]);
    assert_eq!(hash(&stdout(&out)), hash(&stdout(&first)));

    let empty = dir.path().join("empty.trec");
    fs::write(&empty, "").unwrap();
    let out = termorder(&["build-index", "--corpus", empty.to_str().unwrap(), "--index", dir.path().join("e").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let bad = dir.path().join("bad.trec");
    fs::write(&bad, "<DOC>\n<DOCNO> X </DOCNO>\ntext\n").unwrap();
    let out = termorder(&["build-index", "--corpus", bad.to_str().unwrap(), "--index", dir.path().join("b").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("byte"));
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(termorder(&["batch-search"]).status.code(), Some(1));
    assert_eq!(termorder(&["sweep", "--param", "sigma"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let (index, topics) = fixture(dir.path());
    let out = termorder(&["batch-search", "--index", &index, "--topics", &topics, "--model", "sdm", "--set", "nonsense=1"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(termorder(&["check-axioms"]).status.code(), Some(1));
}

#[test]
fn batch_search_writes_one_line_per_match_and_reduces() {
    let dir = tempfile::tempdir().unwrap();
    let (index, topics) = fixture(dir.path());
    let out = termorder(&["batch-search", "--index", &index, "--topics", &topics, "--model", "sdm"]);
    assert!(out.status.success());
    let sdm = stdout(&out);
    let lines: Vec<&str> = sdm.lines().filter(|l| l.starts_with("1 ")).collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("1 Q0 "));

    let reduced = termorder(&[
        "batch-search", "--index", &index, "--topics", &topics, "--model", "sdm-m", "--lambda-ow", "0", "--order-weights", "neutral",
    ]);
    let docs = |s: &str| s.lines().map(|l| l.split(' ').nth(2).unwrap().to_string()).collect::<Vec<_>>();
    assert_eq!(docs(&stdout(&reduced)), docs(&sdm));
}

#[test]
fn eval_and_reports_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (index, topics) = fixture(dir.path());
    let run = dir.path().join("sdm.run");
    let run_s = run.to_str().unwrap();
    assert!(termorder(&["batch-search", "--index", &index, "--topics", &topics, "--model", "sdm", "--run", run_s]).status.success());
    assert!(fs::read_to_string(format!("{run_s}.config")).unwrap().contains("# index_manifest_sha256="));
    let qrels = dir.path().join("qrels.txt");
    let eval = |extra: &[&str]| {
        let mut args = vec!["eval", "--run", run_s, "--qrels", qrels.to_str().unwrap()];
        args.extend_from_slice(extra);
        termorder(&args)
    };
    let a = eval(&["--baseline", run_s]);
    assert!(a.status.success());
    let text = stdout(&a);
    assert!(text.contains("MAP") && !text.contains('*'));
    let b = eval(&["--baseline", run_s]);
    assert_eq!(without_timestamp(&text), without_timestamp(&stdout(&b)));
    assert!(text.contains("# sdm.lambda_t=0.85"));
}

#[test]
fn analysis_commands() {
    let dir = tempfile::tempdir().unwrap();
    let (index, topics) = fixture(dir.path());
    let qrels = dir.path().join("qrels.txt");
    let pairs = dir.path().join("pairs.tsv");
    let out = termorder(&[
        "analyze-order", "--index", &index, "--topics", &topics, "--qrels", qrels.to_str().unwrap(), "--pairs", pairs.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("pairing_unit") || stdout(&out).contains("term-pair"));
    let dump = fs::read_to_string(&pairs).unwrap();
    assert!(dump.contains("term_a\tterm_b\tdf_ab\tdf_ba\tsem"));
    assert!(dump.contains("term\torder\t"));

    let sweep = termorder(&[
        "sweep", "--param", "window", "--values", "3", "--model", "sdm-m", "--index", &index, "--topics", &topics, "--qrels",
        qrels.to_str().unwrap(),
    ]);
    assert!(sweep.status.success());
    let rows: Vec<String> = stdout(&sweep).lines().filter(|l| !l.starts_with('#')).map(String::from).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[1].starts_with("3\t"));

    let axioms = termorder(&["check-axioms", "--synthetic", "--trials", "6", "--models", "sdm,sdm-m", "--gaps", "1"]);
    assert!(axioms.status.success());
    assert!(stdout(&axioms).contains("sdm-m"));
    let verbose = termorder(&["check-axioms", "--index", &index, "--trials", "3", "--models", "plm-m", "--verbose"]);
    let text = stdout(&verbose);
    assert!(text.contains("pad=true") && text.contains("pad=false"));
}
