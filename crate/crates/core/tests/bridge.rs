//! Plugin processes over the wire protocol. Every test returns early when `python3` is missing.
//!
//! Set `ASPX_BLESS=1` to rewrite the golden transcript under `tests/fixtures/golden`.

mod common;

use std::time::{Duration, Instant};

use aspx_core::bridge::{BridgeConfig, BridgeError, PluginSession, Role, ScriptedPlugin, Transcript};
use aspx_core::builtin::{encode_stable_marriage, generate_sm_instance, LazyStableMarriage, Vsids};
use aspx_core::{
    enumerate, parse_program, DispatchEvent, Extensions, GroundProgram, Method, SearchOutcome, SolveError,
    SolverConfig,
};
use common::{fixture, python3};

macro_rules! require_python {
    () => {
        if !python3() {
            eprintln!("python3 not found, skipping");
            return;
        }
    };
}

fn py(script: &str) -> Vec<String> {
    vec!["python3".into(), fixture(script)]
}

fn misbehave(mode: &str) -> Vec<String> {
    vec!["python3".into(), fixture("misbehave.py"), mode.into()]
}

fn quick() -> BridgeConfig {
    BridgeConfig {
        handshake_timeout: Duration::from_millis(500),
        response_timeout: Duration::from_millis(500),
        shutdown_grace: Duration::from_millis(300),
    }
}

fn program() -> GroundProgram {
    parse_program(common::malformed::PROGRAM).unwrap()
}

fn spawn(cmd: &[String], p: &GroundProgram, cfg: &BridgeConfig) -> Result<ScriptedPlugin, BridgeError> {
    ScriptedPlugin::spawn(cmd, Role::Propagator, p.atoms(), cfg, None)
}

fn solve_with(cmd: &[String], cfg: &BridgeConfig) -> Result<SearchOutcome, SolveError> {
    let p = program();
    let plugin = spawn(cmd, &p, cfg).expect("handshake");
    enumerate(&p, Extensions::new().with_propagator(plugin), &SolverConfig::default(), 0)
}

fn bridge_error(e: &SolveError) -> &BridgeError {
    match e {
        SolveError::Extension { source, .. } => source.downcast_ref::<BridgeError>().expect("bridge error"),
        other => panic!("expected a transport failure, got {other:?}"),
    }
}

#[test]
fn lazy_plugin_declares_two_methods() {
    require_python!();
    let p = program();
    let plugin = spawn(&py("lazy_marriage.py"), &p, &BridgeConfig::default()).unwrap();
    let caps: Vec<Method> = plugin.session().capabilities().iter().copied().collect();
    assert_eq!(caps, vec![Method::CheckStableModel, Method::GetReasonsForCheckFailure]);
}

#[test]
fn missing_executable() {
    let cmd = vec!["/nonexistent/plugin".to_string()];
    assert!(matches!(spawn(&cmd, &program(), &quick()), Err(BridgeError::SpawnFailed { .. })));
}

#[test]
fn handshake_failures() {
    require_python!();
    let p = program();
    match spawn(&misbehave("garbage"), &p, &quick()) {
        Err(BridgeError::ProtocolError { line, .. }) => assert_eq!(line, "hello there"),
        other => panic!("{:?}", other.err()),
    }
    match spawn(&misbehave("unknown-capability"), &p, &quick()) {
        Err(BridgeError::HandshakeError(m)) => assert!(m.contains("frobnicate"), "{m}"),
        other => panic!("{:?}", other.err()),
    }
    assert!(matches!(
        spawn(&misbehave("version"), &p, &quick()),
        Err(BridgeError::ProtocolVersionMismatch { expected: 1, found: 2 })
    ));
    assert!(matches!(spawn(&misbehave("refuse"), &p, &quick()), Err(BridgeError::HandshakeError(_))));
    let start = Instant::now();
    assert!(matches!(spawn(&misbehave("silent"), &p, &quick()), Err(BridgeError::HandshakeTimeout(_))));
    assert!(start.elapsed() < Duration::from_secs(5));
}

#[test]
fn transport_failures_abort_the_search() {
    require_python!();
    let e = solve_with(&misbehave("crash"), &quick()).unwrap_err();
    assert!(matches!(bridge_error(&e), BridgeError::PluginCrashed { method, .. } if method == "checkStableModel"));
    let e = solve_with(&misbehave("slow"), &quick()).unwrap_err();
    assert!(matches!(bridge_error(&e), BridgeError::ResponseTimeout { .. }));
    let e = solve_with(&misbehave("wrong-id"), &quick()).unwrap_err();
    assert!(matches!(bridge_error(&e), BridgeError::ProtocolError { message, .. } if message.contains("expected id 1")));
    let e = solve_with(&misbehave("error-reply"), &quick()).unwrap_err();
    assert!(matches!(bridge_error(&e), BridgeError::Remote { code: 7, .. }));
}

#[test]
fn contracts_hold_across_the_wire() {
    require_python!();
    let cfg = BridgeConfig::default();
    for (mode, method) in [
        ("bad-reason", Method::GetReasonForLiteral),
        ("untrue-reason", Method::GetReasonForLiteral),
        ("bad-failure", Method::GetReasonsForCheckFailure),
        ("empty-failure", Method::GetReasonsForCheckFailure),
    ] {
        match solve_with(&misbehave(mode), &cfg) {
            Err(SolveError::ContractViolation { extension, method: m, .. }) => {
                assert_eq!((extension.as_str(), m), ("misbehave", method), "{mode}")
            }
            other => panic!("{mode}: {other:?}"),
        }
    }
}

#[test]
fn shutdown_reaps_and_is_idempotent() {
    require_python!();
    let p = program();
    let mut session =
        PluginSession::spawn(&py("lazy_marriage.py"), Role::Propagator, p.atoms(), &quick(), None).unwrap();
    assert!(session.shutdown().is_some_and(|s| s.success()));
    assert!(session.is_closed());
    assert!(session.shutdown().is_some_and(|s| s.success()));
    assert!(matches!(session.call("checkStableModel", serde_json::json!({})), Err(BridgeError::Closed)));

    let mut stubborn =
        PluginSession::spawn(&misbehave("ignore-shutdown"), Role::Propagator, p.atoms(), &quick(), None).unwrap();
    let start = Instant::now();
    let status = stubborn.shutdown();
    assert!(start.elapsed() < Duration::from_secs(2));
    assert!(!status.is_some_and(|s| s.success()));
}

fn logged() -> SolverConfig {
    SolverConfig { record_dispatch: true, audit: true, ..SolverConfig::default() }
}

/// Dispatch events without the extension name, which differs between the two sides.
fn events(log: &[DispatchEvent]) -> Vec<(Method, Vec<i64>)> {
    log.iter().map(|e| (e.method, e.literals.clone())).collect()
}

fn run_logged(p: &GroundProgram, exts: Extensions) -> (SearchOutcome, Vec<(Method, Vec<i64>)>) {
    let mut solver = aspx_core::Solver::new(p.clone(), exts, logged());
    let out = solver.enumerate(0).unwrap();
    let log = events(solver.dispatch_log());
    (out, log)
}

#[test]
fn scripted_plugins_behave_like_builtins() {
    require_python!();
    let cfg = BridgeConfig::default();
    for (n, k, seed) in [(2, 0, 0), (3, 50, 1), (4, 25, 2), (4, 95, 4)] {
        let t = generate_sm_instance(n, k, seed);
        let base = encode_stable_marriage(&t, false);
        let plugin = spawn(&py("lazy_marriage.py"), &base, &cfg).unwrap();
        let (a, la) = run_logged(&base, Extensions::new().with_propagator(plugin));
        let (b, lb) = run_logged(&base, Extensions::new().with_propagator(LazyStableMarriage::new(t.clone())));
        assert_eq!(a.models, b.models);
        assert_eq!(la, lb);
        assert!(a.audit.violations.is_empty());

        let full = encode_stable_marriage(&t, true);
        let plugin = ScriptedPlugin::spawn(&py("vsids.py"), Role::Heuristic, full.atoms(), &cfg, None).unwrap();
        let (a, la) = run_logged(&full, Extensions::new().with_heuristic(plugin));
        let (b, lb) = run_logged(&full, Extensions::new().with_heuristic(Vsids::new()));
        assert_eq!(a.models, b.models);
        assert_eq!(a.statistics.decisions, b.statistics.decisions);
        assert_eq!(la, lb);
    }
}

fn record_lazy_transcript() -> Transcript {
    let t = generate_sm_instance(3, 50, 1);
    let base = encode_stable_marriage(&t, false);
    let transcript = Transcript::new();
    let plugin = ScriptedPlugin::spawn(
        &py("lazy_marriage.py"),
        Role::Propagator,
        base.atoms(),
        &BridgeConfig::default(),
        Some(transcript.clone()),
    )
    .unwrap();
    let out = enumerate(&base, Extensions::new().with_propagator(plugin), &SolverConfig::default(), 0).unwrap();
    assert!(!out.models.is_empty());
    transcript
}

#[test]
fn golden_transcript_replays() {
    require_python!();
    let requests_path = fixture("golden/lazy_marriage.requests");
    let responses_path = fixture("golden/lazy_marriage.responses");
    let transcript = record_lazy_transcript();
    let join = |lines: Vec<String>| lines.into_iter().map(|l| l + "\n").collect::<String>();
    if std::env::var_os("ASPX_BLESS").is_some() {
        std::fs::create_dir_all(fixture("golden")).unwrap();
        std::fs::write(&requests_path, join(transcript.requests())).unwrap();
        std::fs::write(&responses_path, join(transcript.responses())).unwrap();
    }
    let requests = std::fs::read_to_string(&requests_path).unwrap();
    let golden = std::fs::read_to_string(&responses_path).unwrap();
    // The host sends the same requests every time.
    assert_eq!(join(transcript.requests()), requests);
    let lines: Vec<String> = requests.lines().map(str::to_owned).collect();
    assert!(lines[0].starts_with(r#"{"id":0,"method":"init","params":{"version":1,"role":"propagator","atoms":["#));
    assert!(lines.last().unwrap().contains(r#""method":"shutdown""#));
    let replayed = PluginSession::replay(&py("lazy_marriage.py"), &lines, &BridgeConfig::default()).unwrap();
    assert_eq!(join(replayed), golden);
}
