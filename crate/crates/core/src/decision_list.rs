//! N-way decision lists over collocation features.
//!
//! Each observed (feature, sense) pair becomes a rule weighted by
//! `ln(count(sense, feature) / count(other senses, feature))`, with the
//! denominator replaced by the smoothing constant when no other sense was
//! seen. Rules are sorted by descending weight; the first rule whose feature
//! is present in a test context decides.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use crate::collocations::{extract_features_of, parse_feature, render_feature, Feature, FeatureKind, FeatureSet};
use crate::corpus::Example;
use crate::error::{Error, Result};

pub const DEFAULT_SMOOTHING: f64 = 0.1;

/// feature → sense → count. Zero counts are never stored.
pub type SenseCounts = BTreeMap<Feature, BTreeMap<String, u32>>;

fn single_target<'c>(examples: &[Example<'c>]) -> Result<Option<&'c str>> {
    let Some(first) = examples.first() else {
        return Ok(None);
    };
    if let Some(other) = examples.iter().find(|e| e.target_key != first.target_key) {
        return Err(Error::MixedTargets(first.target_key.into(), other.target_key.into()));
    }
    Ok(Some(first.target_key))
}

/// Counts, per feature of the given kinds, how many examples of each sense
/// contain it.
pub fn count(examples: &[Example<'_>], kinds: &BTreeSet<FeatureKind>) -> Result<SenseCounts> {
    single_target(examples)?;
    let featurized: Vec<_> = examples.iter().map(|e| (e.sense, extract_features_of(e, kinds))).collect();
    Ok(count_featurized(featurized.iter().map(|(s, f)| (*s, f))))
}

/// Counting over pre-extracted feature sets.
pub fn count_featurized<'a, I>(items: I) -> SenseCounts
where
    I: IntoIterator<Item = (&'a str, &'a FeatureSet)>,
{
    let mut counts = SenseCounts::new();
    for (sense, features) in items {
        for feature in features {
            *counts.entry(feature.clone()).or_default().entry(sense.to_string()).or_insert(0) += 1;
        }
    }
    counts
}

/// `ln(count_i / others_sum)`, or `ln(count_i / smoothing)` when no
/// competing sense was observed. `count_i = 0` gives negative infinity.
pub fn weight(count_i: u32, others_sum: u32, smoothing: f64) -> Result<f64> {
    if !(smoothing > 0.0 && smoothing.is_finite()) {
        return Err(Error::InvalidSmoothing(smoothing));
    }
    let denom = if others_sum == 0 { smoothing } else { f64::from(others_sum) };
    Ok((f64::from(count_i) / denom).ln())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rule {
    pub feature: Feature,
    /// Canonical feature string, cached for ordering and output.
    pub key: String,
    pub sense: String,
    pub weight: f64,
    pub count: u32,
    pub others: u32,
}

impl Rule {
    fn list_order(&self, other: &Rule) -> Ordering {
        other
            .weight
            .total_cmp(&self.weight)
            .then_with(|| self.feature.kind.cmp(&other.feature.kind))
            .then_with(|| self.key.cmp(&other.key))
            .then_with(|| self.sense.cmp(&other.sense))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Decision<'a> {
    Answer { sense: &'a str, rule: &'a Rule },
    Abstain,
}

impl<'a> Decision<'a> {
    pub fn sense(&self) -> Option<&'a str> {
        match self {
            Decision::Answer { sense, .. } => Some(sense),
            Decision::Abstain => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DecisionList {
    target_key: String,
    smoothing: f64,
    rules: Vec<Rule>,
    // first (strongest) rule index per feature
    index: HashMap<Feature, usize>,
}

impl PartialEq for DecisionList {
    fn eq(&self, other: &Self) -> bool {
        self.target_key == other.target_key && self.smoothing == other.smoothing && self.rules == other.rules
    }
}

impl DecisionList {
    /// Builds a list from arbitrary rules, sorting them into list order.
    pub fn from_rules(target_key: impl Into<String>, smoothing: f64, mut rules: Vec<Rule>) -> Self {
        rules.sort_by(Rule::list_order);
        Self::from_sorted(target_key.into(), smoothing, rules)
    }

    fn from_sorted(target_key: String, smoothing: f64, rules: Vec<Rule>) -> Self {
        let mut index = HashMap::with_capacity(rules.len());
        for (i, rule) in rules.iter().enumerate() {
            index.entry(rule.feature.clone()).or_insert(i);
        }
        DecisionList { target_key, smoothing, rules, index }
    }

    /// A list with no rules; it abstains on everything.
    pub fn empty(target_key: impl Into<String>, smoothing: f64) -> Self {
        Self::from_sorted(target_key.into(), smoothing, Vec::new())
    }

    pub fn target_key(&self) -> &str {
        &self.target_key
    }

    pub fn smoothing(&self) -> f64 {
        self.smoothing
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn predict(&self, features: &FeatureSet) -> Decision<'_> {
        features.iter().filter_map(|f| self.index.get(f).copied()).min().map_or(Decision::Abstain, |i| {
            let rule = &self.rules[i];
            Decision::Answer { sense: &rule.sense, rule }
        })
    }

    /// Keeps only rules of the given kinds, in their current order.
    pub fn restrict(&self, kinds: &BTreeSet<FeatureKind>) -> DecisionList {
        let rules = self.rules.iter().filter(|r| kinds.contains(&r.feature.kind)).cloned().collect();
        Self::from_sorted(self.target_key.clone(), self.smoothing, rules)
    }

    /// One rule per line: `weight\tsense\tfeature\tcount\tothers`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for r in &self.rules {
            let _ = writeln!(out, "{:.6}\t{}\t{}\t{}\t{}", r.weight, r.sense, r.key, r.count, r.others);
        }
        out
    }

    /// Reads rule lines written by [`DecisionList::to_tsv`], keeping file
    /// order. `##` lines and blank lines are skipped.
    pub fn from_tsv(target_key: impl Into<String>, smoothing: f64, text: &str) -> Result<Self> {
        let mut rules = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            if line.is_empty() || line.starts_with("##") {
                continue;
            }
            let bad = |what: &str| Error::parse(idx + 1, format!("rule line: {what}"));
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 5 {
                return Err(bad("expected 5 columns"));
            }
            let feature = parse_feature(cols[2]).map_err(|e| bad(&e.to_string()))?;
            rules.push(Rule {
                key: render_feature(&feature),
                feature,
                sense: cols[1].to_string(),
                weight: cols[0].parse().map_err(|_| bad("weight"))?,
                count: cols[3].parse().map_err(|_| bad("count"))?,
                others: cols[4].parse().map_err(|_| bad("others"))?,
            });
        }
        Ok(Self::from_sorted(target_key.into(), smoothing, rules))
    }
}

/// Trains from pre-extracted `(sense, features)` pairs.
pub fn train_featurized<'a, I>(target_key: &str, items: I, smoothing: f64) -> Result<DecisionList>
where
    I: IntoIterator<Item = (&'a str, &'a FeatureSet)>,
{
    weight(1, 0, smoothing)?;
    let mut seen = false;
    let counts = count_featurized(items.into_iter().inspect(|_| seen = true));
    if !seen {
        return Err(Error::EmptyTraining);
    }
    Ok(from_counts(target_key, &counts, smoothing))
}

/// Weights every observed (feature, sense) pair of `counts`.
pub fn from_counts(target_key: &str, counts: &SenseCounts, smoothing: f64) -> DecisionList {
    let mut rules = Vec::new();
    for (feature, senses) in counts {
        let total: u32 = senses.values().sum();
        let key = render_feature(feature);
        for (sense, &c) in senses {
            let others = total - c;
            let w = weight(c, others, smoothing).expect("smoothing checked by caller");
            rules.push(Rule {
                feature: feature.clone(),
                key: key.clone(),
                sense: sense.clone(),
                weight: w,
                count: c,
                others,
            });
        }
    }
    DecisionList::from_rules(target_key, smoothing, rules)
}

pub fn train(examples: &[Example<'_>], kinds: &BTreeSet<FeatureKind>, smoothing: f64) -> Result<DecisionList> {
    let target = single_target(examples)?.ok_or(Error::EmptyTraining)?;
    weight(1, 0, smoothing)?;
    let counts = count(examples, kinds)?;
    Ok(from_counts(target, &counts, smoothing))
}

pub fn predict<'a>(dl: &'a DecisionList, features: &FeatureSet) -> Decision<'a> {
    dl.predict(features)
}

pub fn restrict(dl: &DecisionList, kinds: &BTreeSet<FeatureKind>) -> DecisionList {
    dl.restrict(kinds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collocations::FeatureKind::*;

    fn feat(kind: FeatureKind, parts: &[&str]) -> Feature {
        Feature::new(kind, "state.n", "state", parts.iter().map(|s| s.to_string()).collect()).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-4
    }

    #[test]
    fn weights_against_printed_log_column() {
        assert!(close(weight(4, 0, 0.1).unwrap(), 3.6889));
        assert!(close(weight(12, 3, 0.1).unwrap(), 1.3863));
        assert!(close(weight(15, 2, 0.1).unwrap(), 2.0149));
        assert_eq!(weight(1, 1, 0.1).unwrap(), 0.0);
        assert!(weight(1, 3, 0.1).unwrap() < 0.0);
        assert_eq!(weight(0, 3, 0.1).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn bad_smoothing() {
        assert_eq!(weight(1, 0, 0.0), Err(Error::InvalidSmoothing(0.0)));
        assert!(weight(1, 0, -1.0).is_err());
        assert!(weight(1, 0, f64::NAN).is_err());
    }

    /// Counts from the rows "State government", "State and local" and
    /// "State court" of the learned-collocation listing for state.
    fn table_fixture() -> (Feature, Feature, Feature, DecisionList) {
        let gov = feat(CW_RIGHT, &["government"]);
        let local = feat(CW_2RIGHT, &["and", "local"]);
        let court = feat(CW_RIGHT, &["court"]);
        let mut sets: Vec<(&str, FeatureSet)> = Vec::new();
        for _ in 0..4 {
            sets.push(("5", [gov.clone()].into()));
        }
        for _ in 0..12 {
            sets.push(("3", [court.clone()].into()));
        }
        for _ in 0..3 {
            sets.push(("5", [court.clone()].into()));
        }
        sets.push(("3", [local.clone()].into()));
        sets.push(("4", [local.clone()].into()));
        for _ in 0..15 {
            sets.push(("5", [local.clone()].into()));
        }
        let dl = train_featurized("state.n", sets.iter().map(|(s, f)| (*s, f)), 0.1).unwrap();
        (gov, local, court, dl)
    }

    #[test]
    fn table_fixture_order_and_prediction() {
        let (gov, local, court, dl) = table_fixture();
        let top: Vec<_> = dl.rules().iter().take(3).map(|r| (r.feature.clone(), r.sense.as_str())).collect();
        assert_eq!(top, [(gov.clone(), "5"), (local.clone(), "5"), (court.clone(), "3")]);
        assert!(close(dl.rules()[0].weight, 3.6889));
        assert!(close(dl.rules()[1].weight, 2.0149));
        assert!(close(dl.rules()[2].weight, 1.3863));

        match dl.predict(&[court.clone()].into()) {
            Decision::Answer { sense, rule } => {
                assert_eq!(sense, "3");
                assert!(close(rule.weight, 1.3863));
                assert_eq!((rule.count, rule.others), (12, 3));
            }
            Decision::Abstain => panic!("court should fire"),
        }
        assert_eq!(dl.predict(&[court, gov].into()).sense(), Some("5"));
        assert_eq!(dl.predict(&FeatureSet::new()), Decision::Abstain);
    }

    #[test]
    fn single_example_single_feature() {
        let f = feat(CW_LEFT, &["x"]);
        let set: FeatureSet = [f].into();
        let dl = train_featurized("state.n", [("1", &set)], 0.1).unwrap();
        assert_eq!(dl.len(), 1);
        assert!((dl.rules()[0].weight - 10f64.ln()).abs() < 1e-12);
        assert!((dl.rules()[0].weight - std::f64::consts::LN_10).abs() < 1e-9);
    }

    #[test]
    fn ties_break_on_kind_then_string_then_sense() {
        let a = feat(CW_RIGHT, &["b"]);
        let b = feat(CW_LEFT, &["z"]);
        let c = feat(CW_LEFT, &["a"]);
        let sets: Vec<(&str, FeatureSet)> =
            vec![("2", [a.clone()].into()), ("1", [b.clone()].into()), ("1", [c.clone()].into())];
        let dl = train_featurized("state.n", sets.iter().map(|(s, f)| (*s, f)), 0.1).unwrap();
        let order: Vec<_> = dl.rules().iter().map(|r| r.feature.clone()).collect();
        assert_eq!(order, [c, b, a]);

        let shared = feat(CW_LEFT, &["s"]);
        let sets: Vec<(&str, FeatureSet)> = vec![("b", [shared.clone()].into()), ("a", [shared].into())];
        let dl = train_featurized("state.n", sets.iter().map(|(s, f)| (*s, f)), 0.1).unwrap();
        let senses: Vec<_> = dl.rules().iter().map(|r| r.sense.as_str()).collect();
        assert_eq!(senses, ["a", "b"]);
        assert_eq!(dl.rules()[0].weight, 0.0);
    }

    #[test]
    fn negative_weights_fire() {
        let f = feat(CW_LEFT, &["x"]);
        let set: FeatureSet = [f.clone()].into();
        let sets = [("1", &set), ("2", &set), ("3", &set)];
        let dl = train_featurized("state.n", sets, 0.1).unwrap();
        assert!(dl.rules().iter().all(|r| r.weight < 0.0));
        assert_eq!(dl.predict(&set).sense(), Some("1"));
    }

    #[test]
    fn empty_training_rejected() {
        assert_eq!(train_featurized("k", std::iter::empty(), 0.1).unwrap_err(), Error::EmptyTraining);
        assert_eq!(train(&[], &FeatureKind::all(), 0.1).unwrap_err(), Error::EmptyTraining);
    }

    #[test]
    fn restrict_identity_and_empty() {
        let (_, _, court, dl) = table_fixture();
        assert_eq!(dl.restrict(&FeatureKind::all()), dl);
        let none = dl.restrict(&BTreeSet::new());
        assert!(none.is_empty());
        assert_eq!(none.predict(&[court.clone()].into()), Decision::Abstain);
        let right = dl.restrict(&[CW_RIGHT].into());
        assert_eq!(right.len(), 3);
        assert_eq!(right.predict(&[court].into()).sense(), Some("3"));
    }

    #[test]
    fn tsv_round_trip_keeps_order() {
        let (_, _, _, dl) = table_fixture();
        let text = dl.to_tsv();
        assert!(text.starts_with("3.688879\t5\tCW_RIGHT|state.n|state|government\t4\t0\n"));
        let back = DecisionList::from_tsv("state.n", 0.1, &text).unwrap();
        let a: Vec<_> = dl.rules().iter().map(|r| (&r.key, &r.sense)).collect();
        let b: Vec<_> = back.rules().iter().map(|r| (&r.key, &r.sense)).collect();
        assert_eq!(a, b);
        assert_eq!(back.to_tsv(), text);
        assert!(DecisionList::from_tsv("k", 0.1, "1.0\tx\n").is_err());
    }
}
