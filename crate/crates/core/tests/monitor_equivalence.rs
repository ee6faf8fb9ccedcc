use std::collections::BTreeMap;

use assertsec::monitorgen::{
    compile_to_monitor, interpret, observe, parse_assertion, parse_assertion_file, AssertionAst, Expr,
    MonitorCircuit, Property, Shapes, Verdict, Word,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn bus(name: &str, w: usize) -> (String, Vec<String>) {
    (name.to_string(), (0..w).rev().map(|i| format!("{name}[{i}]")).collect())
}

/// Simulates the fragment on random inputs and returns the number of cycles
/// where `fail` disagrees with the interpreter.
fn mismatches(m: &MonitorCircuit, ast: &AssertionAst, rng: &mut ChaCha8Rng, len: usize, p_one: f64) -> usize {
    let n = &m.fragment;
    let vectors: Vec<Vec<bool>> =
        (0..len).map(|_| n.stimulus_inputs().iter().map(|_| rng.gen_bool(p_one)).collect()).collect();
    let trace = n.simulate_vectors(&vectors, None);
    let signals = observe(n, &trace, m).unwrap();
    let verdicts = interpret(ast, &signals).unwrap();
    (0..len).filter(|&t| trace.value(t, m.fail) != (verdicts[t] == Verdict::Fail)).count()
}

#[test]
fn table_patterns_match_interpreter() {
    let file = parse_assertion_file(include_str!("../fixtures/patterns.assert")).unwrap();
    let shapes = Shapes::from([bus("IR", 4), bus("addr_hit", 4)]);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for spec in &file.assertions {
        let ast = parse_assertion(spec, &file.constants).unwrap();
        let m = compile_to_monitor(&spec.name, &ast, &shapes).unwrap();
        for p in [0.1, 0.5, 0.9] {
            for _ in 0..50 {
                assert_eq!(mismatches(&m, &ast, &mut rng, 60, p), 0, "{}", spec.name);
            }
        }
    }
}

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        any::<bool>().prop_map(Expr::Const),
        prop::sample::select(vec!["a", "b", "c", "v[1]"]).prop_map(|s| Expr::Bit(s.to_string())),
        (0u8..8).prop_map(|k| Expr::Eq(Word::Signal("v".into()), Word::Literal((0..3).rev().map(|i| k >> i & 1 == 1).collect()))),
        Just(Expr::OneHot0(Word::Signal("v".into()))),
    ]
}

fn expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Not(Box::new(e))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::And(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Or(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Xor(Box::new(a), Box::new(b))),
            inner.clone().prop_map(|e| Expr::Rose(Box::new(e))),
            (inner.clone(), inner).prop_map(|(a, b)| Expr::Eq(Word::Bool(Box::new(a)), Word::Bool(Box::new(b)))),
        ]
    })
}

fn ast() -> impl Strategy<Value = AssertionAst> {
    let prop = prop_oneof![
        expr().prop_map(Property::Holds),
        (expr(), expr(), any::<bool>()).prop_map(|(antecedent, consequent, next_cycle)| Property::Implies {
            antecedent,
            consequent,
            next_cycle
        }),
    ];
    (prop, prop::option::of(expr())).prop_map(|(property, disable)| AssertionAst {
        property,
        disable,
        clock: Some("clk".into()),
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn random_assertions_match_interpreter(a in ast(), seed in any::<u64>()) {
        let shapes = Shapes::from([bus("v", 3)]);
        let m = compile_to_monitor("m", &a, &shapes).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        prop_assert_eq!(mismatches(&m, &a, &mut rng, 40, 0.5), 0);
    }

    #[test]
    fn monitor_size_is_linear_in_ast(a in ast()) {
        let shapes = Shapes::from([bus("v", 3)]);
        let m = compile_to_monitor("m", &a, &shapes).unwrap();
        let size = a.size(&|s| shapes.get(s).map_or(1, Vec::len));
        prop_assert!(m.fragment.cells().len() <= 3 * size + 3, "{} cells for size {}", m.fragment.cells().len(), size);
    }

    #[test]
    fn compilation_is_deterministic(a in ast()) {
        let shapes = Shapes::from([bus("v", 3)]);
        let m1 = compile_to_monitor("m", &a, &shapes).unwrap();
        let m2 = compile_to_monitor("m", &a, &shapes).unwrap();
        prop_assert_eq!(m1.fragment.to_text(), m2.fragment.to_text());
    }
}

#[test]
fn observed_signals_are_named_by_assertion() {
    let file = parse_assertion_file(include_str!("../fixtures/patterns.assert")).unwrap();
    let spec = file.assertions.iter().find(|a| a.name == "en2addrHit").unwrap();
    let ast = parse_assertion(spec, &file.constants).unwrap();
    let m = compile_to_monitor("m", &ast, &Shapes::from([bus("addr_hit", 4)])).unwrap();
    let keys: Vec<&String> = m.bindings.keys().collect();
    assert_eq!(keys, ["addr_hit", "reg_re", "reg_we", "rst_ni"]);
    let _: BTreeMap<String, Vec<String>> = m.bindings.clone();
}
