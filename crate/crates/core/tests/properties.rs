use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use sensecol::agreement::{compare, CollocationProfile};
use sensecol::collocations::{extract_features_of, extract_from_sentence, FeatureKind, KindGroup};
use sensecol::corpus::{Annotation, Document};
use sensecol::decision_list::{train_featurized, DecisionList, Rule};
use sensecol::evaluation::{equalize_per_word, kfold_by_document, kfold_by_example};
use sensecol::{extract_examples, parse_corpus, train, Corpus, Decision, PosTag, Sentence, Token};

const TAGS: [&str; 8] = ["NN", "NNS", "VB", "JJ", "RB", "IN", "DT", "."];

fn token_strategy() -> impl Strategy<Value = Token> {
    ("[a-zA-Z|#=]{1,6}", 0..TAGS.len())
        .prop_filter("comment prefix", |(f, _)| !f.starts_with("##"))
        .prop_map(|(f, t)| Token::new(f, PosTag::new(TAGS[t]).unwrap()).unwrap())
}

fn sentence_strategy() -> impl Strategy<Value = Sentence> {
    prop::collection::vec(token_strategy(), 1..12).prop_flat_map(|tokens| {
        let n = tokens.len();
        prop::collection::btree_map(0..n, (0..2usize, 0..3usize), 0..=n.min(3)).prop_map(move |anns| {
            let anns: BTreeMap<usize, Annotation> = anns
                .into_iter()
                .map(|(i, (w, s))| (i, Annotation::new(["state.n", "fall.v"][w], s.to_string()).unwrap()))
                .collect();
            Sentence::new(tokens.clone(), anns).unwrap()
        })
    })
}

fn corpus_strategy() -> impl Strategy<Value = Corpus> {
    prop::collection::vec(
        (prop::collection::vec(sentence_strategy(), 0..4), 0..3usize, prop::option::of(0..3usize)),
        0..5,
    )
    .prop_map(|docs| {
        let docs = docs
            .into_iter()
            .enumerate()
            .map(|(i, (sentences, g, cat))| {
                let mut d =
                    Document::new(format!("d{i}"), "c", format!("g{g}"), cat.map(|c| format!("cat{c}"))).unwrap();
                d.sentences = sentences;
                d
            })
            .collect();
        Corpus::from_documents("c", docs).unwrap()
    })
}

proptest! {
    #[test]
    fn serialization_round_trips(corpus in corpus_strategy()) {
        let text = corpus.serialize();
        let parsed = parse_corpus(&text, "c").unwrap();
        prop_assert_eq!(&parsed, &corpus);
        prop_assert_eq!(parsed.serialize(), text);
    }

    #[test]
    fn extraction_counts_annotations(corpus in corpus_strategy()) {
        let total: usize = corpus.documents().iter().flat_map(|d| &d.sentences).map(|s| s.annotations().len()).sum();
        let all = extract_examples(&corpus, None);
        prop_assert_eq!(all.len(), total);
        let split = extract_examples(&corpus, Some("state.n")).len() + extract_examples(&corpus, Some("fall.v")).len();
        prop_assert_eq!(split, total);
        prop_assert_eq!(extract_examples(&corpus, None), all.clone());
        for e in &all {
            prop_assert_eq!(e.target_form(), e.context.tokens()[e.token_index].form.as_str());
        }
    }

    #[test]
    fn feature_invariants(sentence in sentence_strategy(), pick in any::<prop::sample::Index>()) {
        let t = pick.index(sentence.len());
        let features = extract_from_sentence(&sentence, t, "k");
        prop_assert_eq!(&extract_from_sentence(&sentence, t, "k"), &features);

        let sent_words: BTreeSet<_> = features.iter().filter(|f| f.kind == FeatureKind::SENT_WORD).map(|f| &f.parts).collect();
        for f in features.iter().filter(|f| f.kind == FeatureKind::WIN4_WORD) {
            prop_assert!(sent_words.contains(&f.parts));
        }
        for f in &features {
            prop_assert_eq!(f.parts.len(), f.kind.arity());
            prop_assert_eq!(&f.target_form, &sentence.tokens()[t].form);
        }
        // a neighbour is content xor function
        for (cw, fw, idx) in [(FeatureKind::CW_LEFT, FeatureKind::FW_LEFT, t.checked_sub(1)), (FeatureKind::CW_RIGHT, FeatureKind::FW_RIGHT, Some(t + 1))] {
            let c = features.iter().filter(|f| f.kind == cw).count();
            let w = features.iter().filter(|f| f.kind == fw).count();
            let exists = idx.is_some_and(|i| i < sentence.len());
            prop_assert_eq!(c + w, usize::from(exists));
        }
        // the target position itself never contributes: global features
        // come from other positions only
        let others: BTreeSet<&str> = sentence.tokens().iter().enumerate()
            .filter(|(i, tok)| *i != t && tok.is_content()).map(|(_, tok)| tok.form.as_str()).collect();
        let sent: BTreeSet<&str> = sent_words.iter().map(|p| p[0].as_str()).collect();
        prop_assert_eq!(sent, others);
    }
}

/// Deterministic pool of (sense, feature set) items over a small vocabulary.
fn pool(seed: u64, n: usize, senses: usize) -> Vec<(String, BTreeSet<sensecol::Feature>)> {
    let mut rng = sensecol::rng::SplitMix64::new(seed);
    (0..n)
        .map(|_| {
            let sense = rng.below(senses).to_string();
            let mut set = BTreeSet::new();
            for _ in 0..1 + rng.below(4) {
                let kind = FeatureKind::ALL[rng.below(3)];
                let parts = (0..kind.arity()).map(|_| format!("v{}", rng.below(6))).collect();
                set.insert(sensecol::Feature::new(kind, "k.n", "k", parts).unwrap());
            }
            (sense, set)
        })
        .collect()
}

fn train_pool(items: &[(String, BTreeSet<sensecol::Feature>)]) -> DecisionList {
    train_featurized("k.n", items.iter().map(|(s, f)| (s.as_str(), f)), 0.1).unwrap()
}

fn weight_of(dl: &DecisionList, feature: &sensecol::Feature, sense: &str) -> Option<f64> {
    dl.rules().iter().find(|r| &r.feature == feature && r.sense == sense).map(|r| r.weight)
}

proptest! {
    #[test]
    fn adding_evidence_is_monotone(seed in any::<u64>(), senses in 2..5usize) {
        let mut items = pool(seed, 30, senses);
        let before = train_pool(&items);
        let (sense, set) = items[0].clone();
        let feature = set.iter().next().unwrap().clone();
        items.push((sense.clone(), [feature.clone()].into()));
        let after = train_pool(&items);
        let w0 = weight_of(&before, &feature, &sense).unwrap();
        let w1 = weight_of(&after, &feature, &sense).unwrap();
        prop_assert!(w1 > w0);
        for other in (0..senses).map(|s| s.to_string()).filter(|s| *s != sense) {
            if let (Some(a), Some(b)) = (weight_of(&before, &feature, &other), weight_of(&after, &feature, &other)) {
                prop_assert!(b <= a);
            }
        }
    }

    #[test]
    fn decisions_ignore_log_base(seed in any::<u64>(), scale in 0.01f64..100.0) {
        let items = pool(seed, 40, 3);
        let dl = train_pool(&items);
        let scaled: Vec<Rule> = dl.rules().iter().cloned().map(|mut r| { r.weight *= scale; r }).collect();
        let scaled = DecisionList::from_rules("k.n", 0.1, scaled);
        for probe in pool(seed ^ 0xABCD, 30, 3) {
            let a = dl.predict(&probe.1).sense();
            let b = scaled.predict(&probe.1).sense();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn two_senses_follow_binary_log_odds(seed in any::<u64>()) {
        let items = pool(seed, 40, 2);
        let dl = train_pool(&items);
        for probe in pool(seed.wrapping_add(1), 20, 2) {
            if let Decision::Answer { sense, rule } = dl.predict(&probe.1) {
                let count = |s: &str| items.iter().filter(|(x, f)| x == s && f.contains(&rule.feature)).count() as f64;
                let (c0, c1) = (count("0"), count("1"));
                let odds = |a: f64, b: f64| (a / if b == 0.0 { 0.1 } else { b }).ln();
                let best = if odds(c0, c1) >= odds(c1, c0) { "0" } else { "1" };
                prop_assert_eq!(sense, best);
            }
        }
    }

    #[test]
    fn training_is_deterministic(seed in any::<u64>()) {
        let items = pool(seed, 25, 3);
        prop_assert_eq!(train_pool(&items), train_pool(&items));
    }
}

#[test]
fn restrict_equals_training_on_intersection() {
    let spec = sensecol::SynthSpec {
        seed: 5,
        words: vec![sensecol::SynthWord::new(
            "bank.n",
            50,
            0.4,
            vec![
                sensecol::SynthSense::new("1", &["river", "shore"]),
                sensecol::SynthSense::new("2", &["loan", "money"]),
            ],
        )],
        ..Default::default()
    };
    let corpus = sensecol::synth(&spec).unwrap();
    let examples = extract_examples(&corpus, None);
    assert_eq!(examples.len(), 50);
    let all = FeatureKind::all();
    let full = train(&examples, &all, 0.1).unwrap();
    let selections: Vec<BTreeSet<FeatureKind>> = vec![
        KindGroup::LocalContent.kinds(),
        KindGroup::Global.kinds(),
        [FeatureKind::POS_BOTH, FeatureKind::FW_LEFT].into(),
        BTreeSet::new(),
    ];
    for kinds in selections {
        let restricted = full.restrict(&kinds);
        if kinds.is_empty() {
            assert!(restricted.is_empty());
            continue;
        }
        let direct = train(&examples, &kinds, 0.1).unwrap();
        assert_eq!(restricted, direct);
        let narrower = train(&examples, &KindGroup::LocalContent.kinds(), 0.1).unwrap().restrict(&kinds);
        let inter: BTreeSet<_> = kinds.intersection(&KindGroup::LocalContent.kinds()).copied().collect();
        if !inter.is_empty() {
            assert_eq!(narrower, train(&examples, &inter, 0.1).unwrap());
        }
    }
}

#[test]
fn mixed_targets_rejected() {
    let text = "#DOC id=a corpus=c group=g\nx\tNN\ta.n=1\ny\tNN\tb.n=1\n\n";
    let c = parse_corpus(text, "c").unwrap();
    let ex = extract_examples(&c, None);
    assert!(matches!(train(&ex, &FeatureKind::all(), 0.1), Err(sensecol::Error::MixedTargets(_, _))));
    assert!(sensecol::decision_list::count(&ex, &FeatureKind::all()).is_err());
    assert!(sensecol::decision_list::count(&[], &FeatureKind::all()).unwrap().is_empty());
}

fn synth_grouped(seed: u64, documents: usize) -> Corpus {
    let spec = sensecol::SynthSpec {
        seed,
        documents,
        words: vec![sensecol::SynthWord::new(
            "bank.n",
            documents * 3,
            0.2,
            vec![sensecol::SynthSense::new("1", &["river"]), sensecol::SynthSense::new("2", &["loan"])],
        )],
        ..Default::default()
    };
    sensecol::synth(&spec).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn folds_partition_units(seed in any::<u64>(), n in 2usize..80, k in 2usize..12) {
        prop_assume!(k <= n);
        let corpus = synth_grouped(seed, n);
        let examples = extract_examples(&corpus, None);
        let folds = kfold_by_example(&examples, k, seed).unwrap();
        prop_assert_eq!(folds.assignment().len(), examples.len());
        let sizes = folds.fold_sizes();
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);

        let docs = kfold_by_document(&corpus, k, seed).unwrap();
        let groups: BTreeSet<_> = corpus.grouping_keys().into_iter().collect();
        prop_assert_eq!(docs.assignment().len(), groups.len());
        let sizes = docs.fold_sizes();
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        for fold in 0..k {
            let test: BTreeSet<&str> = examples.iter().filter(|e| docs.fold_of(e.grouping_key) == Some(fold)).map(|e| e.grouping_key).collect();
            let train: BTreeSet<&str> = examples.iter().filter(|e| docs.fold_of(e.grouping_key) != Some(fold)).map(|e| e.grouping_key).collect();
            prop_assert!(test.is_disjoint(&train));
        }
    }

    #[test]
    fn equalization_balances_keys(seed in any::<u64>(), na in 1usize..40, nb in 1usize..40) {
        let a = synth_grouped(seed, na);
        let b = synth_grouped(seed.wrapping_add(7), nb);
        let ea = extract_examples(&a, None);
        let eb = extract_examples(&b, None);
        let (xa, xb) = equalize_per_word(&ea, &eb, seed);
        prop_assert_eq!(xa.len(), xb.len());
        prop_assert_eq!(xa.len(), ea.len().min(eb.len()));
    }

    #[test]
    fn agreement_is_symmetric(seed in any::<u64>()) {
        let kinds = KindGroup::LocalContent.kinds();
        let a = synth_grouped(seed, 20);
        let b = synth_grouped(seed.wrapping_add(1), 20);
        let pa: CollocationProfile = sensecol::collect(&a, "bank.n", &kinds);
        let pb = sensecol::collect(&b, "bank.n", &kinds);
        let (ab, ca) = compare(&pa, &pb).unwrap();
        let (ba, _) = compare(&pb, &pa).unwrap();
        prop_assert_eq!((ab.shared, ab.contradictions), (ba.shared, ba.contradictions));
        prop_assert!(ab.contradictions <= ab.shared && ab.shared <= ab.count_a.min(ab.count_b));
        prop_assert!((0.0..=100.0).contains(&ab.shared_pct) && (0.0..=100.0).contains(&ab.contradiction_pct));
        for c in &ca {
            prop_assert!(pa.entries.contains_key(&c.feature) && pb.entries.contains_key(&c.feature));
        }
        prop_assert_eq!(compare(&pa, &pa).unwrap().0.contradictions, 0);
    }
}

#[test]
fn features_respect_kind_filter() {
    let corpus = synth_grouped(1, 10);
    let kinds = KindGroup::Global.kinds();
    for e in extract_examples(&corpus, None) {
        assert!(extract_features_of(&e, &kinds).iter().all(|f| kinds.contains(&f.kind)));
    }
}
