use std::collections::BTreeMap;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use edkit::builder::{build, BuildConfig};
use edkit::eval::{
    compute_stats, eval_mct, eval_multilabel, eval_mwt, eval_token_level, evaluate, Averaging,
    EvalOptions,
};
use edkit::ingest::{adapt, write_canonical, NativeFormat};
use edkit::parse::parse_generation;
use edkit::prompt::default_templates;
use edkit::reformulate::make_target;
use edkit::{Corpus, EventMention, Instance, ItemOrder, PredictionRecord, Split, TaskKind};
use edkit_testkit::{
    brute_force_multilabel, brute_force_stats, brute_force_token_scores, calais_instance,
    check_parse_invariants, perturb_prediction, random_corpus, random_generation, random_instance,
    random_labeling_pair, render_pairs,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(a: Option<f64>, b: f64, what: &str) -> std::result::Result<(), String> {
    match a {
        Some(a) if (a - b).abs() <= 1e-9 => Ok(()),
        other => Err(format!("{what}: got {other:?}, oracle {b}")),
    }
}

fn ed(id: &str, generation: &str) -> edkit::ParsedPrediction {
    parse_generation(generation, TaskKind::ED, id)
}

fn round_trip_identity() -> Check {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let instances: Vec<Instance> = (0..1000)
        .map(|i| random_instance(&mut rng, &format!("rt{i}"), Split::Test))
        .collect();
    let mwt = instances
        .iter()
        .flat_map(|i| &i.mentions)
        .filter(|m| m.is_multi_word())
        .count();
    let corpus = Corpus::new("roundtrip", instances).map_err(|e| e.to_string())?;
    let mut records = Vec::new();
    for inst in corpus.instances() {
        let target =
            make_target(inst, TaskKind::ED, ItemOrder::Annotation).map_err(|e| e.to_string())?;
        records.push(PredictionRecord {
            instance_id: inst.id.clone(),
            task: TaskKind::ED,
            generation: target.text,
        });
    }
    let report = evaluate(&corpus, &records, &EvalOptions::default()).map_err(|e| e.to_string())?;
    let d = &report.diagnostics;
    ensure(
        d.parse_issues.is_empty() && d.hallucinations == 0 && d.ambiguous_instances == 0,
        || format!("diagnostics not clean: {d:?}"),
    )?;
    for cell in &report.cells {
        ensure(cell.headline() == Some(1.0), || {
            format!(
                "{} / {} scored {:?}",
                cell.scheme.as_str(),
                cell.subset.as_str(),
                cell.headline()
            )
        })?;
    }
    let elapsed = started.elapsed();
    ensure(elapsed < Duration::from_secs(10), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "{} cells at 1.0, {mwt} multi-word mentions, {elapsed:.2?}",
        report.cells.len()
    ))
}

fn metric_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (gold, pred): (Vec<_>, Vec<_>) = (0..200)
        .map(|i| random_labeling_pair(&mut rng, &format!("p{i}")))
        .unzip();
    let mut compared = 0;
    let mut windows: Vec<std::ops::Range<usize>> = (0..200).map(|i| i..i + 1).collect();
    windows.push(0..200);
    for w in windows {
        let (g, p) = (&gold[w.clone()], &pred[w]);
        let oracle = brute_force_token_scores(g, p);
        for avg in [Averaging::Micro, Averaging::Macro, Averaging::Weighted] {
            let got = eval_token_level(g, p, avg).map_err(|e| e.to_string())?;
            let want = match avg {
                Averaging::Micro if oracle.counts == (0, 0, 0) => None,
                Averaging::Micro => Some(oracle.micro),
                Averaging::Macro => oracle.macro_avg,
                Averaging::Weighted => oracle.weighted,
            };
            match want {
                None => ensure(got.f1.is_none(), || {
                    format!("{avg:?}: expected N/A, got {:?}", got.f1)
                })?,
                Some((pr, rc, f1)) => {
                    within(got.precision, pr, &format!("{avg:?} P"))?;
                    within(got.recall, rc, &format!("{avg:?} R"))?;
                    within(got.f1, f1, &format!("{avg:?} F1"))?;
                }
            }
            compared += 1;
        }
    }

    let gold_inst: Vec<Instance> = (0..200)
        .map(|i| random_instance(&mut rng, &format!("m{i}"), Split::Test))
        .collect();
    let raw: Vec<_> = gold_inst
        .iter()
        .map(|g| perturb_prediction(&mut rng, g))
        .collect();
    let parsed: Vec<_> = gold_inst
        .iter()
        .zip(&raw)
        .map(|(g, p)| ed(&g.id, &render_pairs(p)))
        .collect();
    for i in 0..200 {
        let r = eval_multilabel(&gold_inst[i..=i], &parsed[i..=i]).map_err(|e| e.to_string())?;
        let want = brute_force_multilabel(&gold_inst[i..=i], &raw[i..=i]);
        ensure((r.tp, r.fp, r.fn_) == want, || {
            format!("instance {i}: {:?} vs {want:?}", (r.tp, r.fp, r.fn_))
        })?;
    }
    let r = eval_multilabel(&gold_inst, &parsed).map_err(|e| e.to_string())?;
    let want = brute_force_multilabel(&gold_inst, &raw);
    ensure((r.tp, r.fp, r.fn_) == want, || {
        format!("pooled: {:?} vs {want:?}", (r.tp, r.fp, r.fn_))
    })?;
    Ok(format!(
        "{compared} token comparisons within 1e-9, multilabel counts {want:?} exact"
    ))
}

fn calais_example() -> Check {
    let gold = calais_instance();
    let target =
        make_target(&gold, TaskKind::ED, ItemOrder::Annotation).map_err(|e| e.to_string())?;
    let expected = "detained->movement.transportperson | clashes->conflict.attack";
    ensure(target.text == expected, || {
        format!("target {:?}", target.text)
    })?;
    let single_task = ed(&gold.id, "detained->movement.transportperson");
    let r = eval_multilabel(&[&gold], &[single_task]).map_err(|e| e.to_string())?;
    ensure((r.tp, r.fp, r.fn_) == (1, 0, 1), || {
        format!("counts {:?}", (r.tp, r.fp, r.fn_))
    })?;
    within(r.precision, 1.0, "P")?;
    within(r.recall, 0.5, "R")?;
    within(r.f1, 2.0 / 3.0, "F1")?;
    Ok("TP=1 FP=0 FN=1, F1=0.667".into())
}

fn mct_rule() -> Check {
    let text = "He was purchasing shares.";
    let gold = Instance::new("mct", text, Split::Test)
        .with_mention(EventMention::from_label(
            7,
            17,
            "purchasing",
            "transaction.transferownership",
        ))
        .with_mention(EventMention::from_label(
            7,
            17,
            "purchasing",
            "transaction.transfermoney",
        ));
    let one = eval_mct(
        &[&gold],
        &[ed("mct", "purchasing->transaction.transferownership")],
    )
    .map_err(|e| e.to_string())?;
    let both = eval_mct(
        &[&gold],
        &[ed(
            "mct",
            "purchasing->transaction.transfermoney | purchasing->transaction.transferownership",
        )],
    )
    .map_err(|e| e.to_string())?;
    ensure(one.accuracy == Some(0.5), || {
        format!("one type: {:?}", one.accuracy)
    })?;
    ensure(both.accuracy == Some(1.0), || {
        format!("both types: {:?}", both.accuracy)
    })?;
    Ok("one of two types 0.5, both 1.0".into())
}

fn mwt_rule() -> Check {
    let gold = Instance::new("mwt", "The meeting took place today.", Split::Test).with_mention(
        EventMention::from_label(12, 22, "took place", "process_start"),
    );
    let partial =
        eval_mwt(&[&gold], &[ed("mwt", "place->process_start")]).map_err(|e| e.to_string())?;
    let full =
        eval_mwt(&[&gold], &[ed("mwt", "took place->process_start")]).map_err(|e| e.to_string())?;
    ensure(partial.accuracy == Some(0.0) && partial.tp == 0, || {
        format!("partial: {partial:?}")
    })?;
    ensure(full.accuracy == Some(1.0) && full.tp == 1, || {
        format!("full: {full:?}")
    })?;
    Ok("\"place\" 0, \"took place\" 1".into())
}

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

fn statistics_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let corpus = random_corpus(&mut rng, 100);
    let s = compute_stats(&corpus);
    let o = brute_force_stats(corpus.instances());
    let split_counts: Vec<(Split, usize)> = s.split_counts.iter().map(|(k, v)| (*k, *v)).collect();
    let mwt_by_split: Vec<(Split, usize)> = s.mwt_by_split.iter().map(|(k, v)| (*k, *v)).collect();
    let fields: Vec<(&str, bool)> = vec![
        ("instances", s.instances == o.instances),
        ("split_counts", split_counts == o.split_counts),
        ("triggers", s.triggers == o.triggers),
        ("types", s.types == o.types),
        ("neg_pct", s.neg_pct == o.neg_pct),
        ("events_per_row_avg", s.events_per_row_avg == o.events_avg),
        ("events_per_row_max", s.events_per_row_max == o.events_max),
        ("types_per_row_avg", s.types_per_row_avg == o.types_avg),
        ("types_per_row_max", s.types_per_row_max == o.types_max),
        ("zs_count", s.zs_count == Some(o.zs_count)),
        ("zs_types", s.zs_types == o.zs_types),
        (
            "mwt_pct_instances",
            s.mwt_pct_instances == o.mwt_pct_instances,
        ),
        ("mwt_pct_rows", s.mwt_pct_rows == o.mwt_pct_rows),
        ("mwt_by_split", mwt_by_split == o.mwt_by_split),
        (
            "mct_pct_instances",
            s.mct_pct_instances == o.mct_pct_instances,
        ),
        ("mct_pct_rows", s.mct_pct_rows == o.mct_pct_rows),
        ("warnings", s.warnings.is_empty()),
    ];
    let wrong: Vec<&str> = fields
        .iter()
        .filter(|(_, ok)| !ok)
        .map(|(n, _)| *n)
        .collect();
    ensure(wrong.is_empty(), || {
        format!("mismatched fields {wrong:?}\nimpl {s:?}\noracle {o:?}")
    })?;
    ensure(
        o.mct_pct_instances > 0.0 && o.mwt_pct_instances > 0.0 && o.neg_pct > 0.0,
        || "synthetic corpus lacks multi-word, multi-class or negative rows".into(),
    )?;
    let rams = adapt(fixtures().join("rams"), NativeFormat::Rams).map_err(|e| e.to_string())?;
    let neg = compute_stats(&rams).neg_pct;
    ensure(neg == 0.0, || format!("RAMS neg_pct {neg}"))?;
    Ok(format!("{} fields exact, RAMS neg_pct 0.0", fields.len()))
}

fn corpus_cardinality() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let corpus = random_corpus(&mut rng, 300);
    let n = corpus.split(Split::Train).count();
    let negatives = corpus
        .split(Split::Train)
        .filter(|i| i.is_negative())
        .count();
    let templates = default_templates(corpus.name());
    let all = build(&corpus, &BuildConfig::default(), &templates).map_err(|e| e.to_string())?;
    let train = all.iter().filter(|e| e.split == Split::Train).count();
    ensure(train == 3 * n, || {
        format!("{train} train examples for N={n}")
    })?;
    let config = BuildConfig {
        positive_only: true,
        ..BuildConfig::default()
    };
    let pos = build(&corpus, &config, &templates).map_err(|e| e.to_string())?;
    let none = pos
        .iter()
        .filter(|e| e.split == Split::Train && e.target == "NONE")
        .count();
    ensure(none == 0, || format!("{none} NONE train targets remain"))?;
    let pos_train = pos.iter().filter(|e| e.split == Split::Train).count();
    ensure(pos_train == 3 * (n - negatives), || {
        format!("{pos_train} positive-only train examples")
    })?;
    Ok(format!(
        "N={n}: {train} examples; positive_only drops {negatives} negatives"
    ))
}

fn parser_robustness() -> Check {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let tasks = TaskKind::ALL;
    for i in 0..100_000 {
        let raw: String = if i % 2 == 0 {
            random_generation(&mut rng)
        } else {
            let len = rng.random_range(0..48);
            (0..len).map(|_| rng.random::<char>()).collect()
        };
        let task = tasks[i % 3];
        let parsed = panic::catch_unwind(|| parse_generation(&raw, task, "fuzz"))
            .map_err(|_| format!("panic on {raw:?}"))?;
        check_parse_invariants(&raw, &parsed).map_err(|e| format!("{raw:?}: {e}"))?;
    }
    let elapsed = started.elapsed();
    ensure(elapsed < Duration::from_secs(60), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!("100000 strings, invariants hold, {elapsed:.2?}"))
}

fn run_build(
    dir: &Path,
    input: &Path,
    seed: &str,
    out: &str,
) -> std::result::Result<Vec<u8>, String> {
    let status = Command::new(env!("CARGO_BIN_EXE_edkit"))
        .args(["build", "--input"])
        .arg(input)
        .args(["--seed", seed, "--variant", "instr", "--out", out])
        .current_dir(dir)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(status.status.success(), || {
        String::from_utf8_lossy(&status.stderr).into_owned()
    })?;
    std::fs::read(dir.join(out)).map_err(|e| e.to_string())
}

fn build_determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let corpus = random_corpus(&mut rng, 200);
    let input = dir.path().join("synthetic.jsonl");
    write_canonical(&corpus, &input).map_err(|e| e.to_string())?;
    let a = run_build(dir.path(), &input, "42", "a.jsonl")?;
    let b = run_build(dir.path(), &input, "42", "b.jsonl")?;
    ensure(a == b, || "same seed produced different bytes".into())?;
    let c = run_build(dir.path(), &input, "43", "c.jsonl")?;
    ensure(a != c, || {
        "a different seed produced identical output".into()
    })?;
    Ok(format!("{} bytes identical across runs", a.len()))
}

fn main() -> ExitCode {
    let criteria: Vec<Criterion> = vec![
        ("round-trip identity", round_trip_identity),
        ("metric oracle equivalence", metric_oracle),
        ("worked WikiEvents example", calais_example),
        ("multi-class trigger accuracy", mct_rule),
        ("multi-word trigger exact match", mwt_rule),
        ("statistics oracle", statistics_oracle),
        ("corpus cardinality", corpus_cardinality),
        ("parser robustness", parser_robustness),
        ("build determinism", build_determinism),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut results = BTreeMap::new();
    for (name, check) in &criteria {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match &outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(reason) => println!("FAIL  {name}: {reason}"),
        }
        results.insert(*name, outcome.is_ok());
    }
    let failed = results.values().filter(|ok| !**ok).count();
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
