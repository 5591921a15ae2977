use mslh::cores::CheckConfig;
use mslh::engine::{run, EngineConfig, Verdict};
use mslh::ground::{herbrand_oracle, OracleVerdict};
use mslh::syntax::parse;
use std::path::PathBuf;

const EXPECTED: &[(&str, &str)] = &[
    ("coreex.p", "Unsatisfiable"),
    ("even_odd.p", "Satisfiable"),
    ("horn_refine.p", "Satisfiable"),
    ("intro.p", "Unsatisfiable"),
    ("lift_horn.p", "Unsatisfiable"),
    ("lift_shallow.p", "Unsatisfiable"),
    ("linabs.p", "Unsatisfiable"),
    ("lists.p", "Satisfiable"),
    ("mirror.p", "Satisfiable"),
    ("parity.p", "Satisfiable"),
    ("pigeon.p", "Unsatisfiable"),
    ("reach.p", "Satisfiable"),
    ("reach_unsat.p", "Unsatisfiable"),
    ("shallow_refine.p", "Satisfiable"),
    ("shallowex2.p", "Unsatisfiable"),
];

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

#[test]
fn every_fixture_is_listed() {
    let mut on_disk: Vec<String> = std::fs::read_dir(fixture(""))
        .unwrap()
        .filter_map(|e| e.ok()?.file_name().into_string().ok())
        .filter(|n| n.ends_with(".p"))
        .collect();
    on_disk.sort();
    let listed: Vec<String> = EXPECTED.iter().map(|(n, _)| n.to_string()).collect();
    assert_eq!(on_disk, listed);
}

#[test]
fn verdicts() {
    for (name, want) in EXPECTED {
        let n = parse(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap().clause_set();
        let st = run(&n, &EngineConfig::default()).unwrap();
        let v = st.verdict.as_ref().unwrap();
        assert_eq!(v.status(), *want, "{name}");
        match v {
            Verdict::Unsat(core, _) => {
                assert!(core.origins_match(&n), "{name}");
                assert_eq!(mslh::cores::check_core(core, &CheckConfig::default()), Some(true), "{name}");
                assert_eq!(herbrand_oracle(&n, 2, 200_000), OracleVerdict::Unsat, "{name}");
            }
            _ => assert_ne!(herbrand_oracle(&n, 2, 200_000), OracleVerdict::Unsat, "{name}"),
        }
        assert_eq!(st.last_trace.as_ref().unwrap().replay().unwrap(), st.last_trace.as_ref().unwrap().result);
    }
}

#[test]
fn tptp_round_trip() {
    for (name, _) in EXPECTED {
        let p = parse(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap();
        let q = parse(&p.to_tptp()).unwrap();
        let keys = |f: &mslh::syntax::ProblemFile| f.clauses.iter().map(|(_, c)| c.variant_key()).collect::<Vec<_>>();
        assert_eq!(keys(&p), keys(&q), "{name}");
    }
}
