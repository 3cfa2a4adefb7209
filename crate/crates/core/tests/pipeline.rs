use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use ticket_router::corpus::GeneratorConfig;
use ticket_router::ltr::{BoostParams, ForestParams};
use ticket_router::pipeline::{ablate, build, evaluate, gen_data, report, run_all, train, PipelineConfig};
use ticket_router::Error;

fn small(dir: &Path) -> PipelineConfig {
    PipelineConfig {
        work_dir: dir.to_path_buf(),
        generator: GeneratorConfig {
            tickets: 400,
            ..GeneratorConfig::default()
        },
        test_per_length: 10,
        loo_pool: 10,
        forest: ForestParams {
            trees: 20,
            ..ForestParams::default()
        },
        boost: BoostParams {
            rounds: 30,
            ..BoostParams::default()
        },
        ..PipelineConfig::default()
    }
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().display().to_string(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn missing(e: Error) -> &'static str {
    match e {
        Error::MissingArtifact { command, .. } => command,
        other => panic!("expected a missing artifact, got {other}"),
    }
}

#[test]
fn stages_name_their_prerequisite() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(dir.path());
    assert_eq!(missing(build(&cfg).unwrap_err()), "gen-data");
    assert_eq!(missing(train(&cfg).unwrap_err()), "build");
    gen_data(&cfg).unwrap();
    build(&cfg).unwrap();
    assert_eq!(missing(evaluate(&cfg).unwrap_err()), "train");
    assert_eq!(missing(ablate(&cfg).unwrap_err()), "train");
    train(&cfg).unwrap();
    assert_eq!(missing(report(&cfg).unwrap_err()), "evaluate");
}

#[test]
fn changed_inputs_invalidate_the_build() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(dir.path());
    gen_data(&cfg).unwrap();
    build(&cfg).unwrap();
    let other = PipelineConfig {
        split_seed: cfg.split_seed + 1,
        ..small(dir.path())
    };
    let err = train(&other).unwrap_err().to_string();
    assert!(err.contains("build"), "{err}");
}

#[test]
fn full_run_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(dir.path());
    run_all(&cfg).unwrap();
    let first = snapshot(dir.path());
    for name in [
        "build/manifest.json",
        "build/features.csv",
        "models/pairwise.json",
        "models/pairwise-no-tg.json",
        "reports/metrics.csv",
        "reports/ablation.csv",
        "reports/summary.json",
    ] {
        assert!(first.contains_key(name), "{name} missing");
    }
    build(&cfg).unwrap();
    train(&cfg).unwrap();
    evaluate(&cfg).unwrap();
    ablate(&cfg).unwrap();
    report(&cfg).unwrap();
    assert_eq!(snapshot(dir.path()), first);

    let summary: serde_json::Value = serde_json::from_slice(&first["reports/summary.json"]).unwrap();
    assert!(summary["metrics"].is_object() || summary["metrics"].is_array());
    let metrics = String::from_utf8(first["reports/metrics.csv"].clone()).unwrap();
    for system in ["pointwise", "pairwise", "human"] {
        assert!(metrics.lines().any(|l| l.contains(system)), "{system}");
    }
}

#[test]
fn config_json_round_trip_and_validation() {
    let cfg = small(Path::new("w"));
    let back = PipelineConfig::from_json(&cfg.to_json()).unwrap();
    assert_eq!(back.to_json(), cfg.to_json());
    let bad = PipelineConfig {
        blocks: "T,XX".into(),
        ..PipelineConfig::default()
    };
    assert!(bad.validate().is_err());
    assert!(PipelineConfig::from_json("{\"seed\": \"x\"}").is_err());
}
