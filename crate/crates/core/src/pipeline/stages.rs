use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::config::PipelineConfig;
use super::state::{read, write, BuiltState, Manifest, HUMAN_LABEL, PAIRWISE_LABEL, POINTWISE_LABEL};
use crate::corpus::{corpus_stats, generate_synthetic, Corpus};
use crate::error::{Error, Result};
use crate::features::{Block, FeatureMatrix, FeatureRow, NormalizationTable};
use crate::group_network::{fidelity_and_roles, network_stats, NetworkStats};
use crate::ltr::{feature_importance, train_pairwise, train_pointwise, RankerModel};
use crate::root_ranker::{candidates_to_jsonl, generate_candidates};
use crate::routing_sim::{
    human_reference, leave_one_out_hit_rate, madr_eval, simulate_mstr_rr, CandidatePools, MetricsReport,
    ModelRouter, ReportSet, Router, TerRouter, TerVariant, STEP_CAP,
};

/// Writes the synthetic corpus into the corpus directory.
pub fn gen_data(cfg: &PipelineConfig) -> Result<Corpus> {
    let corpus = generate_synthetic(&cfg.generator, cfg.seed)?;
    corpus.save(&cfg.paths().corpus)?;
    Ok(corpus)
}

#[derive(Clone, Debug, Serialize)]
pub struct BuildSummary {
    pub train_tickets: usize,
    pub test_tickets: usize,
    pub training_instances: usize,
    pub transfer: NetworkStats,
    pub resolver: NetworkStats,
    pub root: NetworkStats,
}

fn load_corpus(cfg: &PipelineConfig) -> Result<Corpus> {
    let paths = cfg.paths();
    for p in paths.corpus.all() {
        read(p, "gen-data")?;
    }
    Corpus::load(&paths.corpus)
}

/// Splits the corpus, builds every model and writes the build artifacts.
pub fn build(cfg: &PipelineConfig) -> Result<BuildSummary> {
    cfg.validate()?;
    let paths = cfg.paths();
    let corpus = load_corpus(cfg)?;
    let state = BuiltState::from_corpus(cfg, corpus)?;
    let b = &paths.build;
    let ex = &state.extractor;
    write(&paths.split(), &serde_json::to_string_pretty(&state.split)?)?;
    write(&paths.embeddings(), &ex.text.embeddings.to_text())?;
    write(&b.join("h_trans.txt"), &ex.networks.transfer.to_edge_list())?;
    write(&b.join("h_res.txt"), &ex.networks.resolver.to_edge_list())?;
    write(&b.join("h_root.txt"), &ex.networks.root.to_edge_list())?;
    write(&b.join("priors.csv"), &ex.priors.to_csv(&ex.registry))?;
    write(&b.join("centrality.csv"), &ex.centrality.to_csv())?;
    write(&b.join("corpus_stats.json"), &serde_json::to_string_pretty(&corpus_stats(&state.corpus)?)?)?;
    let stats = BuildSummary {
        train_tickets: state.split.train.len(),
        test_tickets: state.split.test_ids().len(),
        training_instances: 0,
        transfer: network_stats(&ex.networks.transfer)?,
        resolver: network_stats(&ex.networks.resolver)?,
        root: network_stats(&ex.networks.root)?,
    };
    let fidelity = match fidelity_and_roles(
        state.train.records(),
        &ex.registry,
        &ex.priors,
        cfg.fidelity_width,
        cfg.train_seed,
    ) {
        Ok(f) => serde_json::to_value(&f)?,
        Err(e) => serde_json::json!({ "skipped": e.to_string() }),
    };
    write(&b.join("fidelity.json"), &serde_json::to_string_pretty(&fidelity)?)?;
    let sets: Vec<_> = state
        .corpus
        .records()
        .iter()
        .map(|r| state.candidates[&r.ticket_id].clone())
        .collect();
    write(&b.join("candidates.jsonl"), &candidates_to_jsonl(&sets))?;
    let (ds, norm) = state.training_set(cfg)?;
    write(&paths.normalization(), &norm.to_json())?;
    let matrix = FeatureMatrix {
        rows: (0..ds.len())
            .map(|i| {
                let q = ds.queries.iter().position(|q| q.contains(&i)).expect("row in a query");
                FeatureRow {
                    ticket_id: ds.keys[q].ticket_id.clone(),
                    step: ds.keys[q].step,
                    group_id: ex.registry.id(ds.groups[i]).to_string(),
                    label: ds.y[i],
                    values: ds.x[i],
                }
            })
            .collect(),
    };
    write(&b.join("features.csv"), &matrix.to_csv())?;
    let summary = BuildSummary {
        training_instances: ds.len(),
        ..stats
    };
    write(&b.join("network_stats.json"), &serde_json::to_string_pretty(&summary)?)?;
    write(&paths.manifest(), &serde_json::to_string_pretty(&Manifest::new(cfg)?)?)?;
    Ok(summary)
}

#[derive(Clone, Debug)]
pub struct TrainedModels {
    pub pointwise: RankerModel,
    pub pairwise: RankerModel,
}

fn load_norm(cfg: &PipelineConfig) -> Result<NormalizationTable> {
    NormalizationTable::from_json(&read(&cfg.paths().normalization(), "build")?)
}

fn load_model(cfg: &PipelineConfig, name: &str, command: &'static str) -> Result<RankerModel> {
    RankerModel::from_json(&read(&cfg.paths().model(name), command)?)
}

fn importance_csv(models: &[(&str, &RankerModel)]) -> String {
    let mut s = String::from("model,rank,slot,block,weight\n");
    for (name, m) in models {
        for (i, (slot, w, b)) in feature_importance(m).into_iter().enumerate() {
            writeln!(s, "{name},{},{slot},{b},{w}", i + 1).unwrap();
        }
    }
    s
}

/// Trains both rankers on the training split.
pub fn train(cfg: &PipelineConfig) -> Result<TrainedModels> {
    cfg.validate()?;
    let state = BuiltState::load(cfg)?;
    let norm = load_norm(cfg)?;
    let (ds, fitted) = state.training_set(cfg)?;
    if fitted != norm {
        return Err(Error::Config("normalization table is stale; run `build` again".into()));
    }
    let mask = cfg.mask()?;
    let pointwise = train_pointwise(&ds, &cfg.forest, mask, cfg.train_seed)?;
    let pairwise = train_pairwise(&ds, &cfg.boost, mask, cfg.train_seed)?;
    let paths = cfg.paths();
    write(&paths.model(POINTWISE_LABEL), &pointwise.to_json())?;
    write(&paths.model(PAIRWISE_LABEL), &pairwise.to_json())?;
    write(
        &paths.models.join("importance.csv"),
        &importance_csv(&[(POINTWISE_LABEL, &pointwise), (PAIRWISE_LABEL, &pairwise)]),
    )?;
    Ok(TrainedModels { pointwise, pairwise })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateCurvePoint {
    pub neighbors: usize,
    pub hit_rate: f64,
    /// mean share of registry groups in the candidate set
    pub coverage: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub reports: ReportSet,
    pub candidate_curve: Vec<CandidateCurvePoint>,
}

fn system_report(
    router: &dyn Router,
    set: &str,
    tests: &[(&crate::corpus::Ticket, &crate::corpus::RoutingRecord)],
    pools: &CandidatePools,
    loo_pools: &CandidatePools,
    state: &BuiltState,
    cfg: &PipelineConfig,
) -> Result<MetricsReport> {
    let reg = &state.extractor.registry;
    let (mr, _) = simulate_mstr_rr(router, tests, pools, reg, STEP_CAP)?;
    let madr = (1..=STEP_CAP)
        .map(|k| madr_eval(router, tests, pools, reg, k, STEP_CAP))
        .collect::<Result<Vec<_>>>()?;
    let hr = leave_one_out_hit_rate(router, tests, loo_pools, reg, cfg.loo_pool, cfg.train_seed)?;
    Ok(MetricsReport {
        test_set: set.to_string(),
        system: router.name().to_string(),
        tickets: tests.len(),
        mstr: mr.mstr,
        rr: mr.rr,
        madr,
        hr: Some(hr.hr),
    })
}

/// Simulates every system on every test set and measures candidate generation.
pub fn evaluate(cfg: &PipelineConfig) -> Result<Evaluation> {
    cfg.validate()?;
    let state = BuiltState::load(cfg)?;
    let norm = load_norm(cfg)?;
    let pointwise = load_model(cfg, POINTWISE_LABEL, "train")?;
    let pairwise = load_model(cfg, PAIRWISE_LABEL, "train")?;
    let ex = &state.extractor;
    let model_pools = state.pools();
    let registry_pools = CandidatePools::registry(&ex.registry);
    let mut routers: Vec<(Box<dyn Router + '_>, &CandidatePools)> = Vec::new();
    for (label, model) in [(POINTWISE_LABEL, &pointwise), (PAIRWISE_LABEL, &pairwise)] {
        let r = ModelRouter {
            label: label.into(),
            extractor: ex,
            norm: &norm,
            model,
        };
        routers.push((Box::new(r), &model_pools));
    }
    for variant in TerVariant::ALL {
        let r = TerRouter {
            variant,
            transitions: &ex.transitions,
            embeddings: &ex.text.embeddings,
            priors: &ex.priors,
        };
        routers.push((Box::new(r), &registry_pools));
    }
    let mut reports = ReportSet::default();
    let test_sets = state.test_sets()?;
    for (name, tests) in &test_sets {
        for (router, pools) in &routers {
            reports
                .reports
                .push(system_report(router.as_ref(), name, tests, pools, &model_pools, &state, cfg)?);
        }
        let (mr, madr) = human_reference(tests, STEP_CAP)?;
        reports.reports.push(MetricsReport {
            test_set: name.clone(),
            system: HUMAN_LABEL.into(),
            tickets: tests.len(),
            mstr: mr.mstr,
            rr: mr.rr,
            madr: vec![madr; STEP_CAP],
            hr: None,
        });
    }
    let all_tests: Vec<_> = test_sets.iter().flat_map(|(_, t)| t.iter().copied()).collect();
    let n_groups = ex.registry.len() as f64;
    let candidate_curve = (0..=cfg.neighbors.max(10))
        .map(|n| {
            let (mut hits, mut cover) = (0usize, 0.0);
            for (t, r) in &all_tests {
                let c = generate_candidates(t, n, &ex.networks.root, &state.index, &ex.registry)?;
                hits += c.contains(r.resolver()) as usize;
                cover += c.members.len() as f64 / n_groups;
            }
            let m = all_tests.len().max(1) as f64;
            Ok(CandidateCurvePoint {
                neighbors: n,
                hit_rate: hits as f64 / m,
                coverage: cover / m,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let paths = cfg.paths();
    write(&paths.reports.join("metrics.csv"), &reports.to_csv())?;
    let eval = Evaluation {
        reports,
        candidate_curve,
    };
    write(&paths.metrics_json(), &serde_json::to_string_pretty(&eval)?)?;
    let mut curve = String::from("neighbors,hit_rate,coverage\n");
    for p in &eval.candidate_curve {
        writeln!(curve, "{},{},{}", p.neighbors, p.hit_rate, p.coverage).unwrap();
    }
    write(&paths.reports.join("candidates.csv"), &curve)?;
    Ok(eval)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    /// removed block, `None` for the full model
    pub removed: Option<Block>,
    /// (test set, HR@1, HR@3, HR@5)
    pub hit_rates: Vec<(String, [f64; 3])>,
}

/// Retrains the pairwise ranker without each active block and measures
/// leave-one-out hit rates.
pub fn ablate(cfg: &PipelineConfig) -> Result<Vec<AblationRow>> {
    cfg.validate()?;
    let state = BuiltState::load(cfg)?;
    let norm = load_norm(cfg)?;
    let full = load_model(cfg, PAIRWISE_LABEL, "train")?;
    let (ds, _) = state.training_set(cfg)?;
    let ex = &state.extractor;
    let pools = state.pools();
    let tests = state.test_sets()?;
    let mask = cfg.mask()?;
    let paths = cfg.paths();
    let mut variants: Vec<(Option<Block>, RankerModel)> = vec![(None, full)];
    for b in mask.blocks() {
        let m = train_pairwise(&ds, &cfg.boost, mask.without(b), cfg.train_seed)?;
        write(&paths.model(&format!("{PAIRWISE_LABEL}-no-{}", b.name().to_lowercase())), &m.to_json())?;
        variants.push((Some(b), m));
    }
    let mut rows = Vec::new();
    for (removed, model) in &variants {
        let router = ModelRouter {
            label: PAIRWISE_LABEL.into(),
            extractor: ex,
            norm: &norm,
            model,
        };
        let hit_rates = tests
            .iter()
            .map(|(name, t)| {
                let hr = leave_one_out_hit_rate(&router, t, &pools, &ex.registry, cfg.loo_pool, cfg.train_seed)?;
                Ok((name.clone(), hr.hr))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(AblationRow {
            removed: *removed,
            hit_rates,
        });
    }
    let mut csv = String::from("removed");
    for (name, _) in &tests {
        for k in [1, 3, 5] {
            write!(csv, ",{name}_hr{k}").unwrap();
        }
    }
    csv.push('\n');
    for r in &rows {
        csv.push_str(r.removed.map_or("none", Block::name));
        for (_, hr) in &r.hit_rates {
            for v in hr {
                write!(csv, ",{v}").unwrap();
            }
        }
        csv.push('\n');
    }
    write(&paths.reports.join("ablation.csv"), &csv)?;
    write(&paths.ablation_json(), &serde_json::to_string_pretty(&rows)?)?;
    Ok(rows)
}

/// Consolidates evaluation, ablation, importance and build statistics.
pub fn report(cfg: &PipelineConfig) -> Result<serde_json::Value> {
    let paths = cfg.paths();
    let eval: Evaluation = serde_json::from_str(&read(&paths.metrics_json(), "evaluate")?)?;
    let ablation: Vec<AblationRow> = serde_json::from_str(&read(&paths.ablation_json(), "ablate")?)?;
    let stats: serde_json::Value = serde_json::from_str(&read(&paths.build.join("network_stats.json"), "build")?)?;
    let pointwise = load_model(cfg, POINTWISE_LABEL, "train")?;
    let pairwise = load_model(cfg, PAIRWISE_LABEL, "train")?;
    let block_importance = |m: &RankerModel| {
        Block::ALL
            .iter()
            .map(|b| (b.name(), m.importance[b.range()].iter().sum::<f64>()))
            .collect::<Vec<_>>()
    };
    let summary = serde_json::json!({
        "metrics": eval.reports.reports,
        "candidate_curve": eval.candidate_curve,
        "ablation": ablation,
        "networks": stats,
        "block_importance": {
            POINTWISE_LABEL: block_importance(&pointwise),
            PAIRWISE_LABEL: block_importance(&pairwise),
        },
    });
    write(&paths.reports.join("summary.json"), &serde_json::to_string_pretty(&summary)?)?;
    let mut csv = eval.reports.to_csv();
    for r in &ablation {
        for (set, hr) in &r.hit_rates {
            for (k, v) in [1, 3, 5].into_iter().zip(hr) {
                let sys = format!("{PAIRWISE_LABEL}-no-{}", r.removed.map_or("none", Block::name).to_lowercase());
                writeln!(csv, "{set},{sys},hr,{k},{v}").unwrap();
            }
        }
    }
    write(&paths.reports.join("summary.csv"), &csv)?;
    Ok(summary)
}

/// Every stage in order; skips data generation when an external corpus is configured.
pub fn run_all(cfg: &PipelineConfig) -> Result<serde_json::Value> {
    if cfg.corpus_dir.is_none() {
        gen_data(cfg)?;
    }
    build(cfg)?;
    train(cfg)?;
    evaluate(cfg)?;
    ablate(cfg)?;
    report(cfg)
}
