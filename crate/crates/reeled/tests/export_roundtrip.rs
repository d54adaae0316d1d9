//! Study data from recorded sessions through the CSV export into the
//! group comparison.

mod common;

use std::collections::HashMap;
use std::sync::Arc;

use common::*;
use reeled::analysis::analyze;
use reeled::service::export::{header, ExportFilter};
use reeled::service::{Condition, ServiceError};
use reeled_core::analytics::catalog::ITEMS;
use reeled_core::stats::Summary;

#[test]
fn export_then_analyze_matches_the_store() {
    for (name, store) in stores() {
        let svc = service(store.clone(), Arc::new(FakeExecutor::default()));
        let submitted = run_study(&svc, 62, 7, 31);
        let csv = svc.export_csv(&researcher(), &ExportFilter::default()).unwrap();

        let mut rdr = csv::Reader::from_reader(csv.as_bytes());
        assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), header());
        let records: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
        assert_eq!(records.len(), submitted.len(), "{name}");

        // independent per-group values straight from the store
        let mut scores: HashMap<&str, Vec<f64>> = HashMap::new();
        let mut durations: HashMap<&str, Vec<f64>> = HashMap::new();
        for a in store.assignments().unwrap() {
            let Some(q) = store.quiz_result(a.assignment_id).unwrap() else {
                assert!(!submitted.contains_key(&a.student_id));
                continue;
            };
            let cond = a.condition.as_str();
            scores.entry(cond).or_default().push(q.score.score_pct);
            durations.entry(cond).or_default().push(q.quiz_duration_s.unwrap());
            let row = records.iter().find(|r| &r[1] == a.assignment_id.to_string().as_str()).unwrap();
            assert_eq!(&row[0], a.student_id.as_str());
            assert_eq!(&row[2], cond);
            for (k, c) in ITEMS.iter().enumerate() {
                let stored = q.questionnaire.iter().find(|l| l.item_id == c.item_id && l.instrument == c.instrument).unwrap();
                assert_eq!(row[6 + k].parse::<u8>().unwrap(), stored.value, "{}", c.item_id);
            }
        }

        let report = analyze(&csv).unwrap();
        let count = |c: Condition| submitted.values().filter(|v| **v == c).count();
        assert_eq!(report.groups[0].rows, count(Condition::LongForm));
        assert_eq!(report.groups[1].rows, count(Condition::Reels));

        let row = |m: &str| report.rows.iter().find(|r| r.metric == m).unwrap();
        for (metric, values) in [("quiz_score_pct", &scores), ("quiz_duration_s", &durations)] {
            let got = row(metric).result.group_summaries;
            for (g, cond) in ["long_form", "reels"].iter().enumerate() {
                let want = Summary::of(&values[cond]);
                assert_eq!(got[g].n, want.n);
                assert!((got[g].mean - want.mean).abs() < 1e-9, "{metric} {cond}");
                assert!((got[g].sd - want.sd).abs() < 1e-9, "{metric} {cond}");
            }
        }
        // 3 quiz metrics, 45 items and 3 UEQ-S scales
        assert_eq!(report.rows.len() + report.skipped.len(), 51);
        assert!(row("learning_experience.engaged").significant);
    }
}

#[test]
fn filters_restrict_rows() {
    let (_, store) = stores().remove(0);
    let svc = service(store, Arc::new(FakeExecutor::default()));
    let submitted = run_study(&svc, 10, 0, 3);
    let only = ExportFilter { condition: Some(Condition::Reels), ..Default::default() };
    let csv = svc.export_csv(&researcher(), &only).unwrap();
    let rows = csv.lines().count() - 1;
    assert_eq!(rows, submitted.values().filter(|c| **c == Condition::Reels).count());
    let none = ExportFilter { quiz_id: Some("other".into()), ..Default::default() };
    assert!(matches!(svc.export_csv(&researcher(), &none), Err(ServiceError::EmptyFilter)));
}

mod arbitrary_tables {
    use super::*;
    use proptest::prelude::*;

    fn table() -> impl Strategy<Value = Vec<(bool, Option<u8>, f64)>> {
        prop::collection::vec((any::<bool>(), prop::option::of(1u8..=7), 0.0f64..100.0), 0..40)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// Group sizes come from the condition column alone, and every
        /// metric with a column is either compared or listed as skipped.
        #[test]
        fn every_row_and_metric_is_accounted_for(rows in table()) {
            let mut csv = String::from("participant_id,condition,quiz_score_pct,imi_competence.pretty_good\n");
            for (i, (reels, likert, score)) in rows.iter().enumerate() {
                let cond = if *reels { "reels" } else { "long_form" };
                let likert = likert.map(|v| v.to_string()).unwrap_or_default();
                csv.push_str(&format!("p{i},{cond},{score},{likert}\n"));
            }
            let report = analyze(&csv).unwrap();
            let reels = rows.iter().filter(|r| r.0).count();
            prop_assert_eq!(report.groups[1].rows, reels);
            prop_assert_eq!(report.groups[0].rows, rows.len() - reels);
            let mut seen: Vec<&str> = report.rows.iter().map(|r| r.metric.as_str())
                .chain(report.skipped.iter().map(|s| s.metric.as_str()))
                .collect();
            seen.sort_unstable();
            prop_assert_eq!(seen, vec!["imi_competence.pretty_good", "quiz_score_pct"]);
            for r in &report.rows {
                prop_assert!((0.0..=1.0).contains(&r.result.p_value));
                prop_assert_eq!(r.significant, r.result.p_value < 0.05);
            }
        }
    }
}
