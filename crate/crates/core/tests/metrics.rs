use edkit::eval::{
    compute_stats, eval_multilabel, eval_token_level, evaluate, Averaging, EvalOptions, Scheme,
    Subset,
};
use edkit::parse::parse_generation;
use edkit::{Instance, PredictionRecord, Split, TaskKind};
use edkit_testkit::{
    brute_force_multilabel, brute_force_token_scores, perturb_prediction, random_corpus,
    random_instance, random_labeling_pair, render_pairs,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn close(a: Option<f64>, b: f64) -> bool {
    a.is_some_and(|a| (a - b).abs() < 1e-9)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn token_scores_match_oracle(seed in any::<u64>(), n in 1usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (gold, pred): (Vec<_>, Vec<_>) = (0..n).map(|i| random_labeling_pair(&mut rng, &format!("p{i}"))).unzip();
        let oracle = brute_force_token_scores(&gold, &pred);
        let micro = eval_token_level(&gold, &pred, Averaging::Micro).unwrap();
        prop_assert_eq!((micro.tp, micro.fp, micro.fn_), oracle.counts);
        if oracle.counts != (0, 0, 0) {
            prop_assert!(close(micro.precision, oracle.micro.0));
            prop_assert!(close(micro.recall, oracle.micro.1));
            prop_assert!(close(micro.f1, oracle.micro.2));
        }
        for (avg, want) in [(Averaging::Macro, oracle.macro_avg), (Averaging::Weighted, oracle.weighted)] {
            let got = eval_token_level(&gold, &pred, avg).unwrap();
            match want {
                None => prop_assert_eq!(got.f1, None),
                Some((p, r, f)) => {
                    prop_assert!(close(got.precision, p) && close(got.recall, r) && close(got.f1, f));
                }
            }
        }
    }

    #[test]
    fn multilabel_counts_match_oracle(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gold: Vec<Instance> = (0..20).map(|i| random_instance(&mut rng, &format!("g{i}"), Split::Test)).collect();
        let raw: Vec<_> = gold.iter().map(|g| perturb_prediction(&mut rng, g)).collect();
        let parsed: Vec<_> = gold.iter().zip(&raw)
            .map(|(g, p)| parse_generation(&render_pairs(p), TaskKind::ED, &g.id))
            .collect();
        let report = eval_multilabel(&gold, &parsed).unwrap();
        prop_assert_eq!((report.tp, report.fp, report.fn_), brute_force_multilabel(&gold, &raw));
    }

    #[test]
    fn multilabel_ignores_item_order(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gold: Vec<Instance> = (0..10).map(|i| random_instance(&mut rng, &format!("g{i}"), Split::Test)).collect();
        let raw: Vec<_> = gold.iter().map(|g| perturb_prediction(&mut rng, g)).collect();
        let mut shuffled = raw.clone();
        for p in shuffled.iter_mut().flatten() {
            p.shuffle(&mut rng);
        }
        let score = |preds: &[Option<Vec<(String, String)>>]| {
            let parsed: Vec<_> = gold.iter().zip(preds)
                .map(|(g, p)| parse_generation(&render_pairs(p), TaskKind::ED, &g.id))
                .collect();
            eval_multilabel(&gold, &parsed).unwrap()
        };
        prop_assert_eq!(score(&raw), score(&shuffled));
    }

    #[test]
    fn spurious_and_missing_pairs_move_scores_one_way(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gold: Vec<Instance> = (0..8).map(|i| random_instance(&mut rng, &format!("g{i}"), Split::Test)).collect();
        let raw: Vec<_> = gold.iter().map(|g| perturb_prediction(&mut rng, g)).collect();
        let score = |preds: &[Option<Vec<(String, String)>>]| {
            let parsed: Vec<_> = gold.iter().zip(preds)
                .map(|(g, p)| parse_generation(&render_pairs(p), TaskKind::ED, &g.id))
                .collect();
            eval_multilabel(&gold, &parsed).unwrap()
        };
        let base = score(&raw);

        let mut spurious = raw.clone();
        spurious[0].get_or_insert_with(Vec::new).push(("zzqx".into(), "made.up".into()));
        let with_spurious = score(&spurious);
        prop_assert!(with_spurious.precision.unwrap_or(0.0) <= base.precision.unwrap_or(0.0) + 1e-12
            || base.precision.is_none());

        let correct = raw.iter().enumerate().find_map(|(i, p)| {
            let pairs = p.as_ref()?;
            let j = pairs.iter().position(|(t, ty)| {
                gold[i].mentions.iter().any(|m| &m.trigger_text == t && &m.type_label() == ty)
            })?;
            Some((i, j))
        });
        if let Some((i, j)) = correct {
            let mut fewer = raw.clone();
            fewer[i].as_mut().unwrap().remove(j);
            let with_fewer = score(&fewer);
            prop_assert!(with_fewer.recall.unwrap() <= base.recall.unwrap() + 1e-12);
        }
    }
}

#[test]
fn pos_subset_size_follows_negative_share() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let corpus = random_corpus(&mut rng, 120);
    let stats = compute_stats(&corpus);
    let records: Vec<PredictionRecord> = corpus
        .instances()
        .iter()
        .map(|i| PredictionRecord {
            instance_id: i.id.clone(),
            task: TaskKind::ED,
            generation: "NONE".into(),
        })
        .collect();
    let options = EvalOptions {
        schemes: vec![Scheme::Multilabel],
        ..EvalOptions::default()
    };
    let report = evaluate(&corpus, &records, &options).unwrap();
    let pos = report.cell(Scheme::Multilabel, Subset::Pos).unwrap();
    let expected = (corpus.len() as f64 * (100.0 - stats.neg_pct) / 100.0).round() as usize;
    assert_eq!(pos.instances, expected);
    assert_eq!(
        report
            .cell(Scheme::Multilabel, Subset::All)
            .unwrap()
            .instances,
        corpus.len()
    );
}
