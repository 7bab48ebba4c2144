//! AP, P@10 and MAP against a deliberately naive reference on random fixtures.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use termorder::eval::{average_precision, evaluate, precision_at, Qrels, Run};

/// Precision at every rank that holds a relevant document, averaged over all
/// relevant documents.
fn reference_ap(ranking: &[String], relevant: &HashSet<String>) -> f64 {
    let mut total = 0.0;
    for k in 1..=ranking.len().min(1000) {
        if relevant.contains(&ranking[k - 1]) {
            let hits = ranking[..k].iter().filter(|d| relevant.contains(*d)).count();
            total += hits as f64 / k as f64;
        }
    }
    total / relevant.len() as f64
}

fn reference_p10(ranking: &[String], relevant: &HashSet<String>) -> f64 {
    ranking.iter().take(10).filter(|d| relevant.contains(*d)).count() as f64 / 10.0
}

#[test]
fn random_fixtures_match_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let queries = rng.random_range(1..=20);
        let mut qrels = Qrels::new();
        let mut run = Run::new();
        let mut expected_ap = Vec::new();
        let mut expected_p10 = Vec::new();
        for q in 0..queries {
            let qid = format!("q{q:02}");
            let docs: Vec<String> = (0..50).map(|d| format!("d{d}")).collect();
            let relevant: HashSet<String> = docs.iter().filter(|_| rng.random_bool(0.2)).cloned().collect();
            for d in &docs {
                if rng.random_bool(0.6) {
                    qrels.insert(qid.clone(), d.clone(), relevant.contains(d) as i32);
                }
            }
            for d in &relevant {
                qrels.insert(qid.clone(), d.clone(), rng.random_range(1..=3));
            }
            let mut ranking = docs.clone();
            ranking.shuffle(&mut rng);
            ranking.truncate(rng.random_range(0..=50));
            let n = ranking.len();
            run.push_ranking(qid.clone(), ranking.iter().enumerate().map(|(i, d)| (d.clone(), (n - i) as f64)), "t");
            if !relevant.is_empty() {
                expected_ap.push(reference_ap(&ranking, &relevant));
                expected_p10.push(reference_p10(&ranking, &relevant));
                let judged = qrels.for_query(&qid).unwrap();
                assert!((average_precision(&ranking, judged, 1000).unwrap() - expected_ap.last().unwrap()).abs() <= 1e-12);
                assert!((precision_at(&ranking, judged, 10) - expected_p10.last().unwrap()).abs() <= 1e-12);
            }
        }
        let report = evaluate(&run, &qrels);
        let map = expected_ap.iter().sum::<f64>() / expected_ap.len().max(1) as f64;
        let p10 = expected_p10.iter().sum::<f64>() / expected_p10.len().max(1) as f64;
        assert!((report.map - map).abs() <= 1e-12);
        assert!((report.p10 - p10).abs() <= 1e-12);
        assert!(report.per_query.iter().all(|e| (0.0..=1.0).contains(&e.ap) && (0.0..=1.0).contains(&e.p10)));
    }
}

#[test]
fn run_file_round_trip_keeps_scores_usable() {
    let mut run = Run::new();
    run.push_ranking("1", [("a", -3.25), ("b", -3.5), ("c", -10.125)], "x");
    let mut buf = Vec::new();
    run.write(&mut buf).unwrap();
    let back = Run::parse(buf.as_slice(), std::path::Path::new("run")).unwrap();
    assert_eq!(back.ranked_docs("1"), vec!["a", "b", "c"]);
}
