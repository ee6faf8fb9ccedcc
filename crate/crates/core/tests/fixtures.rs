use std::path::Path;

use assertsec::monitorgen::parse_assertion_file;
use assertsec::netlist::{parse_netlist, Netlist};
use assertsec::select::{evaluate_assertion, FlowConfig, OverheadSource};

fn load(name: &str) -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)).unwrap()
}

fn design(name: &str) -> Netlist {
    parse_netlist(&load(name)).unwrap()
}

#[test]
fn fixtures_parse() {
    let cpu = design("toy_cpu.v");
    assert!(cpu.cells().len() >= 180, "{}", cpu.cells().len());
    assert!(cpu.find_net("tj_pay").is_some());
    let reg = design("reg_top.v");
    assert!(reg.find_net("reg_we").is_some());
}

#[test]
fn trojan_payload_reaches_store_check() {
    let cpu = design("toy_cpu.v");
    let file = parse_assertion_file(&load("patterns.assert")).unwrap();
    let spec = file.assertions.iter().find(|a| a.name == "asr_1").unwrap();
    let c = evaluate_assertion(&cpu, spec, &file.constants, &OverheadSource::Model, &FlowConfig::default()).unwrap();
    assert_eq!(c.reason, None, "{:?}", c.error);
    let pay = cpu.find_net("tj_pay").unwrap();
    assert!(c.per_node[&pay].status.is_reachable(), "{:?}", c.per_node[&pay]);
    let cov = c.coverage.unwrap();
    assert!(cov.covered_set.contains(&pay));
    assert_eq!(cov.total_nodes, cpu.list_nodes().len());
    eprintln!("asr_1: {}/{} {:?} {:?}", cov.covered_nodes, cov.total_nodes, c.verdicts, c.overhead);
}

#[test]
fn register_patterns_bind() {
    let reg = design("reg_top.v");
    let file = parse_assertion_file(&load("patterns.assert")).unwrap();
    for spec in file.assertions.iter().filter(|a| !a.name.starts_with("asr_")) {
        let c = evaluate_assertion(&reg, spec, &file.constants, &OverheadSource::Model, &FlowConfig::default()).unwrap();
        assert_eq!(c.reason, None, "{}: {:?}", spec.name, c.error);
        assert_eq!(c.verdicts.unknown, 0);
        eprintln!("{}: {:?} {:?}", spec.name, c.coverage.map(|c| c.covered_nodes), c.verdicts);
    }
}

#[test]
fn small_fixtures_have_hand_counted_nodes() {
    let two = design("two_cell.v");
    assert_eq!(two.node_names(), ["a", "b", "n1", "y"]);
    // sel[1:0], en, data[1:0], m[1:0], x1..x7, go, p, ready; clk and rst_n excluded.
    let s = design("sample12.v");
    assert_eq!(s.cells().len(), 12);
    assert_eq!(s.list_nodes().len(), 17);
    assert!(!s.node_names().iter().any(|n| n == "clk" || n == "rst_n"));
    assert_eq!(design("shift3.v").dffs().len(), 3);
}

#[test]
fn corpus_round_trips_through_printer() {
    for f in ["toy_cpu.v", "reg_top.v", "two_cell.v", "sample12.v", "shift3.v"] {
        let a = design(f);
        let b = parse_netlist(&a.to_text()).unwrap();
        assert_eq!(a, b, "{f}");
    }
}

fn bind_all(d: &Netlist, names: &[&str]) -> Netlist {
    use assertsec::monitorgen::{bind, compile_to_monitor, parse_assertion, shapes_of};
    let file = parse_assertion_file(&load("patterns.assert")).unwrap();
    let mut bound = d.clone();
    for name in names {
        let spec = file.assertions.iter().find(|a| &a.name == name).unwrap();
        let ast = parse_assertion(spec, &file.constants).unwrap();
        let m = compile_to_monitor(name, &ast, &shapes_of(d)).unwrap();
        bound = bind(&bound, &m).unwrap();
    }
    bound
}

#[test]
fn four_monitors_bind_as_observers() {
    use rand::{Rng, SeedableRng};
    let cpu = design("toy_cpu.v");
    let bound = bind_all(&cpu, &["asr_1", "asr_2", "asr_3", "asr_4"]);
    assert_eq!(bound.list_nodes(), cpu.list_nodes());
    assert_eq!(bound.primary_outputs().len(), cpu.primary_outputs().len() + 4);
    for name in ["asr_1", "asr_2", "asr_3", "asr_4"] {
        assert!(bound.primary_outputs().contains(&bound.find_net(&format!("{name}.fail")).unwrap()));
    }
    assert_eq!(bound.stimulus_inputs(), cpu.stimulus_inputs());
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let stim: Vec<Vec<bool>> =
            (0..64).map(|_| cpu.stimulus_inputs().iter().map(|_| rng.gen_bool(0.5)).collect()).collect();
        let a = cpu.simulate_vectors(&stim, None);
        let b = bound.simulate_vectors(&stim, None);
        for t in 0..stim.len() {
            for id in 0..cpu.nets().len() as u32 {
                let id = assertsec::netlist::NetId(id);
                assert_eq!(a.value(t, id), b.value(t, id), "{} at {t}", cpu.net_name(id));
            }
        }
    }
}

#[test]
fn sample_verdicts_match_enumeration() {
    use assertsec::pathcheck::{brute_force_reach, PathQuery};
    let s = design("sample12.v");
    let text = "[constants]\nMODE1 = 2'b01\n[assertions]\ns12: assert always {ready -> !(m == MODE1)}; @clock clk\n";
    let file = parse_assertion_file(text).unwrap();
    let c = evaluate_assertion(&s, &file.assertions[0], &file.constants, &OverheadSource::Model, &FlowConfig::default()).unwrap();
    assert_eq!(c.reason, None, "{:?}", c.error);
    let fail = c.fail_net.unwrap();
    let bound = {
        use assertsec::monitorgen::{bind, compile_to_monitor, parse_assertion, shapes_of};
        let ast = parse_assertion(&file.assertions[0], &file.constants).unwrap();
        bind(&s, &compile_to_monitor("s12", &ast, &shapes_of(&s)).unwrap()).unwrap()
    };
    let mut reachable = 0;
    for (origin, v) in &c.per_node {
        let q = PathQuery::new(&bound, *origin, fail, v.bound).unwrap();
        assert_eq!(v.status.is_reachable(), brute_force_reach(&bound, &q).unwrap(), "{}", s.net_name(*origin));
        reachable += usize::from(v.status.is_reachable());
    }
    assert!(reachable > 3 && reachable < s.list_nodes().len(), "{reachable}");
}

#[test]
fn processor_witnesses_replay() {
    use assertsec::pathcheck::{batch_check, CheckOptions, PathQuery, PathStatus};
    let cpu = design("toy_cpu.v");
    let bound = bind_all(&cpu, &["asr_1"]);
    let fail = bound.find_net("asr_1.fail").unwrap();
    let nodes = bound.list_nodes();
    let first = batch_check(&bound, fail, &nodes, &CheckOptions { jobs: 4, ..CheckOptions::default() }).unwrap();
    let again = batch_check(&bound, fail, &nodes, &CheckOptions { jobs: 1, ..CheckOptions::default() }).unwrap();
    assert_eq!(first, again);
    for (o, v) in &first {
        if let PathStatus::Reachable { witness } = &v.status {
            assert!(bound.structural_reach(*o, fail));
            assert!(witness.replay(&bound, &PathQuery::new(&bound, *o, fail, v.bound).unwrap()), "{}", bound.net_name(*o));
        }
    }
}
