use std::collections::BTreeSet;
use std::path::Path;

use assertsec::metrics::{coverage_from_set, overhead_from_reports, set_coverage, MetricsRecord, OverheadRecord};
use assertsec::netlist::NetId;
use assertsec::select::{select, Candidate, CandidateFile, RuleEval, StrategyConfig, StrategyKind};
use proptest::prelude::*;

struct Expected {
    name: String,
    max_overhead: f64,
    covered: usize,
    required: f64,
    fixed_kept: bool,
    rank: usize,
    gain: u64,
    dynamic_kept: bool,
}

fn fixture(name: &str) -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)).unwrap()
}

fn expected() -> Vec<Expected> {
    let text = fixture("ah_candidates.expected.csv");
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    rdr.records()
        .map(|r| {
            let r = r.unwrap();
            Expected {
                name: r[0].to_string(),
                max_overhead: r[1].parse().unwrap(),
                covered: r[2].parse().unwrap(),
                required: r[4].parse().unwrap(),
                fixed_kept: &r[5] == "1",
                rank: r[6].parse().unwrap(),
                gain: r[7].parse().unwrap(),
                dynamic_kept: &r[10] == "1",
            }
        })
        .collect()
}

fn candidates() -> Vec<Candidate> {
    CandidateFile::from_json(&fixture("ah_candidates.json")).unwrap().candidates()
}

#[test]
fn fixed_rule_matches_hand_table() {
    let report = select(&candidates(), &StrategyConfig::default()).unwrap();
    let exp = expected();
    assert_eq!(report.candidates.len(), exp.len());
    for (got, e) in report.candidates.iter().zip(&exp) {
        assert_eq!(got.name, e.name);
        assert_eq!(got.max_overhead_pct, e.max_overhead);
        assert_eq!(got.covered_nodes, e.covered);
        assert_eq!(got.kept, e.fixed_kept, "{}", e.name);
        match &got.rules[..] {
            [RuleEval::Fixed { required_pct, .. }] => assert!((required_pct - e.required).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
    }
    assert_eq!(report.selected.len(), 11);
}

#[test]
fn dynamic_rule_matches_hand_table() {
    let cfg = StrategyConfig { kind: StrategyKind::Dynamic, ..StrategyConfig::default() };
    let report = select(&candidates(), &cfg).unwrap();
    let exp = expected();
    for (got, e) in report.candidates.iter().zip(&exp) {
        assert_eq!(got.kept, e.dynamic_kept, "{}", e.name);
        let impact = got.rules.iter().find_map(|r| match r {
            RuleEval::DynamicImpact { rank, .. } => Some(*rank),
            _ => None,
        });
        assert_eq!(impact, Some(e.rank), "{}", e.name);
        let point = report.series.iter().find(|p| p.name == e.name).unwrap();
        assert_eq!(point.gain as u64, e.gain, "{}", e.name);
    }
    let mut want: Vec<&str> = exp.iter().filter(|e| e.dynamic_kept).map(|e| e.name.as_str()).collect();
    want.sort();
    let mut got: Vec<&str> = report.selected.iter().map(String::as_str).collect();
    got.sort();
    assert_eq!(got, want);
}

fn universe(total: u32) -> Vec<NetId> {
    (0..total).map(NetId).collect()
}

fn arb_sets(total: u32, count: usize) -> impl Strategy<Value = Vec<BTreeSet<u32>>> {
    prop::collection::vec(prop::collection::btree_set(0..total, 0..total as usize), 1..=count)
}

fn arb_candidates() -> impl Strategy<Value = Vec<Candidate>> {
    (prop::collection::vec((0u32..400, prop::collection::btree_set(0u32..60, 0..40)), 3..9)).prop_map(|rows| {
        let nodes = universe(60);
        rows.into_iter()
            .enumerate()
            .map(|(i, (ovh, set))| {
                let name = format!("c{i}");
                Candidate {
                    overhead: OverheadRecord::new(&name, ovh as f64 / 100.0, 0.0, 0.0, false),
                    coverage: coverage_from_set(&name, set.into_iter().map(NetId).collect(), &nodes),
                    name,
                }
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn set_coverage_is_monotone_and_bounded(sets in arb_sets(50, 6)) {
        let nodes = universe(50);
        let results: Vec<_> = sets
            .iter()
            .enumerate()
            .map(|(i, s)| coverage_from_set(&format!("a{i}"), s.iter().copied().map(NetId).collect(), &nodes))
            .collect();
        let mut prev = 0;
        for k in 1..=results.len() {
            let c = set_coverage(&results[..k]).unwrap();
            prop_assert!(c.covered_nodes >= prev);
            prev = c.covered_nodes;
            let max = results[..k].iter().map(|r| r.covered_nodes).max().unwrap();
            let sum: usize = results[..k].iter().map(|r| r.covered_nodes).sum();
            prop_assert!(max <= c.covered_nodes && c.covered_nodes <= sum.min(50));
            prop_assert!(c.coverage_pct >= results[..k].iter().map(|r| r.coverage_pct).fold(0.0, f64::max));
        }
    }

    #[test]
    fn overheads_are_scale_invariant(
        base in (1u32..10_000, 1u32..10_000, 1u32..10_000),
        with in (1u32..10_000, 1u32..10_000, 1u32..10_000),
        scale in 1u32..1000,
    ) {
        let rec = |(a, p, t): (u32, u32, u32), c: f64| MetricsRecord { area: a as f64 * c, power: p as f64 * c, timing: t as f64 * c };
        let c = scale as f64 / 7.0;
        let plain = overhead_from_reports("x", &rec(base, 1.0), &rec(with, 1.0)).unwrap();
        let scaled = overhead_from_reports("x", &rec(base, c), &rec(with, c)).unwrap();
        for (a, b) in [
            (plain.area_pct, scaled.area_pct),
            (plain.power_pct, scaled.power_pct),
            (plain.timing_pct, scaled.timing_pct),
        ] {
            prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
        }
        prop_assert!(plain.max_overhead_pct >= 0.0);
    }

    #[test]
    fn dynamic_stage_one_ignores_order(cands in arb_candidates(), seed in any::<u64>()) {
        let cfg = StrategyConfig { kind: StrategyKind::Dynamic, ..StrategyConfig::default() };
        let stage_one = |cs: &[Candidate]| -> BTreeSet<String> {
            select(cs, &cfg)
                .unwrap()
                .candidates
                .into_iter()
                .filter(|c| c.reason != Some(assertsec::select::Reason::OverheadAboveDynamicCap))
                .map(|c| c.name)
                .collect()
        };
        let mut shuffled = cands.clone();
        let n = shuffled.len();
        for i in 0..n {
            shuffled.swap(i, (seed.rotate_left(i as u32 * 7) as usize) % n);
        }
        prop_assert_eq!(stage_one(&cands), stage_one(&shuffled));
        prop_assert_eq!(select(&cands, &cfg).unwrap().selected.into_iter().collect::<BTreeSet<_>>(),
                        select(&shuffled, &cfg).unwrap().selected.into_iter().collect::<BTreeSet<_>>());
    }

    #[test]
    fn dynamic_series_and_reasons(cands in arb_candidates()) {
        let cfg = StrategyConfig { kind: StrategyKind::Dynamic, ..StrategyConfig::default() };
        let r = select(&cands, &cfg).unwrap();
        for w in r.series.windows(2) {
            prop_assert!(w[0].covered <= w[1].covered);
        }
        for (rank, p) in r.series.iter().enumerate() {
            let kept = r.candidates.iter().find(|c| c.name == p.name).unwrap().kept;
            if rank > 0 && kept {
                prop_assert!(p.gain > 0);
            }
        }
        for c in &r.candidates {
            prop_assert_eq!(c.kept, c.reason.is_none());
        }
        prop_assert!(r.selected.iter().all(|s| cands.iter().any(|c| &c.name == s)));
    }

    #[test]
    fn fixed_rule_ignores_common_rescaling(cands in arb_candidates(), scale in 1u32..20) {
        let k = scale as f64;
        let base = select(&cands, &StrategyConfig::default()).unwrap();
        // Coverage values stay put; scaling K and every overhead by reciprocal
        // factors leaves each product unchanged.
        let rescaled: Vec<Candidate> = cands
            .iter()
            .map(|c| {
                let mut c = c.clone();
                c.overhead = OverheadRecord::new(&c.name, c.overhead.area_pct * 10.0 / k, 0.0, 0.0, false);
                c
            })
            .collect();
        let cfg = StrategyConfig { fixed_ratio: k, ..StrategyConfig::default() };
        let other = select(&rescaled, &cfg).unwrap();
        prop_assert_eq!(base.selected, other.selected);
    }
}
