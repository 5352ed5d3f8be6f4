mod common;

use std::io::BufReader;
use std::path::Path;
use std::process::Command;

use common::fixture;
use wayfinder::harness::{
    read_trace, run_batch, run_loaded, trace_to_string, write_trace, Event, LoadedScenario, NoiseToggles, RunStatus,
    Scenario,
};

fn load(name: &str) -> LoadedScenario {
    let sc = Scenario::load(&fixture(&format!("scenarios/{name}.toml"))).unwrap();
    LoadedScenario::load(&sc).unwrap()
}

#[test]
fn straight_corridor_reaches_goal_on_short_path() {
    let loaded = load("straight");
    for noiseless in [false, true] {
        let mut l = loaded.clone();
        if noiseless {
            l.scenario.noise = NoiseToggles::all(false);
        }
        for seed in 0..5 {
            let m = run_loaded(&l, seed).unwrap().metrics;
            assert!(m.success, "seed {seed}: {m:?}");
            assert_eq!(m.collision_count, 0);
            assert!((m.path_length - 12.0).abs() <= 0.6, "path {}", m.path_length);
        }
    }
}

#[test]
fn trace_round_trip_preserves_metrics() {
    let loaded = load("corridor");
    let out = run_loaded(&loaded, 11).unwrap();
    let mut buf = Vec::new();
    write_trace(&out.trace, &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf.clone()).unwrap(), trace_to_string(&out.trace));
    let back = read_trace(BufReader::new(&buf[..])).unwrap();
    assert_eq!(back, out.trace);
    assert_eq!(loaded.metrics(&back), out.metrics);
}

#[test]
fn trace_has_one_record_per_tick_and_ends_once() {
    let out = run_loaded(&load("atrium"), 2).unwrap();
    for (k, r) in out.trace.iter().enumerate() {
        assert_eq!(r.tick, k as u64);
    }
    let ends = out.trace.iter().filter(|r| r.status().is_some()).count();
    assert_eq!(ends, 1);
    let last = out.trace.last().unwrap();
    assert_eq!(last.status(), Some(out.metrics.status));
    assert!(last.cmd.is_none());
    assert!(out.trace[..out.trace.len() - 1].iter().all(|r| r.cmd.is_some()));
}

#[test]
fn batch_matches_single_runs() {
    let loaded = load("cluttered");
    let batch = run_batch(&loaded, &[9, 3]).unwrap();
    assert_eq!(batch.iter().map(|r| r.seed).collect::<Vec<_>>(), [3, 9]);
    for r in &batch {
        assert_eq!(r.output, run_loaded(&loaded, r.seed).unwrap());
    }
}

#[test]
fn unresolved_utterance_stops_without_moving() {
    let mut loaded = load("corridor");
    for utterance in ["hello there", "exit or stairs"] {
        loaded.scenario.utterance = utterance.to_string();
        let out = run_loaded(&loaded, 0).unwrap();
        assert_eq!(out.metrics.status, RunStatus::Clarify);
        assert!(!out.metrics.success);
        assert_eq!(out.trace.len(), 1);
        assert!(out.trace[0].cmd.is_none());
        assert!(out.trace[0].events.iter().any(|e| matches!(e, Event::Clarify { .. })));
        assert_eq!(out.metrics.path_length, 0.0);
    }
}

#[test]
fn timeout_when_duration_too_short() {
    let mut loaded = load("straight");
    loaded.scenario.duration_max = 3.0;
    let out = run_loaded(&loaded, 0).unwrap();
    assert_eq!(out.metrics.status, RunStatus::Timeout);
    assert!(!out.metrics.success);
    assert!(out.trace.last().unwrap().time <= 3.0 + 1e-9);
}

fn wayfinder(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_wayfinder")).args(args).output().unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn cli_exit_codes() {
    let scenario = fixture("scenarios/straight.toml");
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.jsonl");
    let ok = wayfinder(&["run", "--scenario", path_str(&scenario), "--noiseless", "--trace", path_str(&trace)]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    let records = read_trace(BufReader::new(std::fs::File::open(&trace).unwrap())).unwrap();
    assert_eq!(records.last().unwrap().status(), Some(RunStatus::Reached));

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "map = 3\n").unwrap();
    assert_eq!(wayfinder(&["run", "--scenario", path_str(&bad)]).status.code(), Some(2));
    assert_eq!(wayfinder(&["map-check", path_str(&bad)]).status.code(), Some(2));

    let short = dir.path().join("short.toml");
    let text = std::fs::read_to_string(&scenario).unwrap().replace("duration_max = 60.0", "duration_max = 2.0");
    let text = text.replace("../", &format!("{}/", fixture("").display()));
    std::fs::write(&short, text).unwrap();
    assert_eq!(wayfinder(&["run", "--scenario", path_str(&short)]).status.code(), Some(3));

    let map = wayfinder(&["map-check", path_str(&fixture("maps/corridor.map"))]);
    assert_eq!(map.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&map.stdout).contains("150 x 33"));

    let lex = fixture("intent/building.lex");
    let hit = wayfinder(&["intent", "--lexicon", path_str(&lex), "--utterance", "where is the lift"]);
    assert_eq!(String::from_utf8_lossy(&hit.stdout).trim(), "Navigating to elevator.");
    assert_eq!(hit.status.code(), Some(0));
    let miss = wayfinder(&["intent", "--lexicon", path_str(&lex), "--utterance", "good morning"]);
    assert_eq!(miss.status.code(), Some(3));
}

#[test]
fn cli_batch_writes_metrics_and_traces() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("runs");
    let scenario = fixture("scenarios/straight.toml");
    let r = wayfinder(&["batch", "--scenario", path_str(&scenario), "--seeds", "2", "--first-seed", "4", "--out", path_str(&out)]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let metrics = std::fs::read_to_string(out.join("metrics.jsonl")).unwrap();
    assert_eq!(metrics.lines().count(), 2);
    let loaded = load("straight");
    for seed in [4u64, 5] {
        let written = std::fs::read_to_string(out.join(format!("seed-{seed}.jsonl"))).unwrap();
        assert_eq!(written, trace_to_string(&run_loaded(&loaded, seed).unwrap().trace));
    }
}
