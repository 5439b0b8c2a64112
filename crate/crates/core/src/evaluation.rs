//! Scoring, fold construction and the experiment runners.
//!
//! Every runner pools counts across words (micro-averaging) and emits a
//! [`Report`] whose rows come out in a fixed order regardless of how the
//! per-word work was scheduled.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::{self, Write as _};

use rayon::prelude::*;

use crate::collocations::{extract_features_of, render_kinds, FeatureKind, FeatureSet, KindGroup};
use crate::corpus::{extract_examples, Corpus, Example};
use crate::decision_list::{train_featurized, Decision, DecisionList, DEFAULT_SMOOTHING};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Score {
    pub total: u64,
    pub answered: u64,
    pub correct: u64,
}

impl Score {
    /// `correct / answered`, 0 when nothing was answered.
    pub fn precision(&self) -> f64 {
        if self.answered == 0 {
            0.0
        } else {
            self.correct as f64 / self.answered as f64
        }
    }

    /// `answered / total`, 0 for an empty test set.
    pub fn coverage(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.answered as f64 / self.total as f64
        }
    }

    /// Precision as a reduced fraction; `(0, 1)` when nothing was answered.
    pub fn precision_ratio(&self) -> (u64, u64) {
        reduce(self.correct, self.answered)
    }

    /// Coverage as a reduced fraction; `(0, 1)` for an empty test set.
    pub fn coverage_ratio(&self) -> (u64, u64) {
        reduce(self.answered, self.total)
    }

    pub fn record(&mut self, predicted: Option<&str>, gold: &str) {
        self.total += 1;
        if let Some(sense) = predicted {
            self.answered += 1;
            if sense == gold {
                self.correct += 1;
            }
        }
    }
}

fn reduce(num: u64, den: u64) -> (u64, u64) {
    if den == 0 {
        return (0, 1);
    }
    let (mut a, mut b) = (num, den);
    while b != 0 {
        (a, b) = (b, a % b);
    }
    (num / a, den / a)
}

impl std::ops::AddAssign for Score {
    fn add_assign(&mut self, rhs: Score) {
        self.total += rhs.total;
        self.answered += rhs.answered;
        self.correct += rhs.correct;
    }
}

pub fn score<S: AsRef<str>>(decisions: &[Decision<'_>], gold: &[S]) -> Result<Score> {
    if decisions.len() != gold.len() {
        return Err(Error::LengthMismatch { decisions: decisions.len(), gold: gold.len() });
    }
    let mut s = Score::default();
    for (d, g) in decisions.iter().zip(gold) {
        s.record(d.sense(), g.as_ref());
    }
    Ok(s)
}

/// `num / den` with three decimals, rounding the exact ratio half to even.
pub fn format_ratio(num: u64, den: u64) -> String {
    if den == 0 {
        return "0.000".to_string();
    }
    let scaled = u128::from(num) * 1000;
    let den = u128::from(den);
    let mut q = scaled / den;
    let twice_rem = 2 * (scaled % den);
    if twice_rem > den || (twice_rem == den && q % 2 == 1) {
        q += 1;
    }
    format!("{}.{:03}", q / 1000, q % 1000)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FoldUnit {
    Example,
    DocumentGroup,
}

impl fmt::Display for FoldUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FoldUnit::Example => "example",
            FoldUnit::DocumentGroup => "document",
        })
    }
}

impl std::str::FromStr for FoldUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "example" => Ok(FoldUnit::Example),
            "document" => Ok(FoldUnit::DocumentGroup),
            other => Err(Error::InvalidValue(format!("fold unit {other:?} (example|document)"))),
        }
    }
}

/// Assignment of units (example ids or grouping keys) to folds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldSpec {
    pub k: usize,
    pub unit: FoldUnit,
    pub seed: u64,
    assignment: BTreeMap<String, usize>,
}

impl FoldSpec {
    /// Shuffles `units` and deals them round-robin into `k` folds.
    fn deal(units: Vec<String>, k: usize, unit: FoldUnit, seed: u64) -> Result<Self> {
        if k < 2 || units.len() < k {
            return Err(Error::NotEnoughUnits { units: units.len(), k });
        }
        let mut order: Vec<usize> = (0..units.len()).collect();
        SplitMix64::new(seed).shuffle(&mut order);
        let mut assignment = BTreeMap::new();
        for (pos, &idx) in order.iter().enumerate() {
            assignment.insert(units[idx].clone(), pos % k);
        }
        Ok(FoldSpec { k, unit, seed, assignment })
    }

    pub fn fold_of(&self, unit: &str) -> Option<usize> {
        self.assignment.get(unit).copied()
    }

    pub fn assignment(&self) -> &BTreeMap<String, usize> {
        &self.assignment
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in self.assignment.values() {
            sizes[f] += 1;
        }
        sizes
    }

    pub fn members(&self, fold: usize) -> Vec<&str> {
        self.assignment.iter().filter(|(_, &f)| f == fold).map(|(u, _)| u.as_str()).collect()
    }
}

/// Folds over examples, keyed by [`Example::id`].
pub fn kfold_by_example(examples: &[Example<'_>], k: usize, seed: u64) -> Result<FoldSpec> {
    let units = examples.iter().map(Example::id).collect();
    FoldSpec::deal(units, k, FoldUnit::Example, seed)
}

/// Folds over the corpus's grouping keys (files or directories).
pub fn kfold_by_document(corpus: &Corpus, k: usize, seed: u64) -> Result<FoldSpec> {
    let units = corpus.grouping_keys().into_iter().map(str::to_string).collect();
    FoldSpec::deal(units, k, FoldUnit::DocumentGroup, seed)
}

/// Samples both sides down to the same number of examples per target key.
/// Keys missing from either side are dropped. Kept examples retain their
/// input order.
pub fn equalize_per_word<'a, 'b>(
    a: &[Example<'a>],
    b: &[Example<'b>],
    seed: u64,
) -> (Vec<Example<'a>>, Vec<Example<'b>>) {
    fn positions<'x>(xs: &[Example<'x>]) -> BTreeMap<&'x str, Vec<usize>> {
        let mut map: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, e) in xs.iter().enumerate() {
            map.entry(e.target_key).or_default().push(i);
        }
        map
    }
    let pa = positions(a);
    let pb = positions(b);
    let mut rng = SplitMix64::new(seed);
    let mut keep_a = vec![false; a.len()];
    let mut keep_b = vec![false; b.len()];
    for (key, ia) in &pa {
        let Some(ib) = pb.get(key) else { continue };
        let m = ia.len().min(ib.len());
        for (idx, keep) in [(ia, &mut keep_a), (ib, &mut keep_b)] {
            let mut chosen = idx.clone();
            if chosen.len() > m {
                rng.shuffle(&mut chosen);
                chosen.truncate(m);
            }
            for i in chosen {
                keep[i] = true;
            }
        }
    }
    let out_a = a.iter().zip(&keep_a).filter(|(_, &k)| k).map(|(e, _)| *e).collect();
    let out_b = b.iter().zip(&keep_b).filter(|(_, &k)| k).map(|(e, _)| *e).collect();
    (out_a, out_b)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReportRow {
    pub scope: String,
    pub label: String,
    pub score: Score,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub metadata: Vec<(String, String)>,
    pub rows: Vec<ReportRow>,
}

pub const REPORT_HEADER: &str = "scope\tlabel\tprecision\tcoverage\tanswered\tcorrect\ttotal";

impl Report {
    pub fn meta(&mut self, key: impl Into<String>, value: impl ToString) {
        self.metadata.push((key.into(), value.to_string()));
    }

    pub fn row(&self, scope: &str, label: &str) -> Option<&Score> {
        self.rows.iter().find(|r| r.scope == scope && r.label == label).map(|r| &r.score)
    }

    /// Metadata as `## key=value` lines, then the header and one row per
    /// line. Rows with an empty test set print `EMPTY` for both ratios.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "## {k}={v}");
        }
        out.push_str(REPORT_HEADER);
        out.push('\n');
        for r in &self.rows {
            let s = r.score;
            let (p, c) = if s.total == 0 {
                ("EMPTY".to_string(), "EMPTY".to_string())
            } else {
                (format_ratio(s.correct, s.answered), format_ratio(s.answered, s.total))
            };
            let _ = writeln!(out, "{}\t{}\t{p}\t{c}\t{}\t{}\t{}", r.scope, r.label, s.answered, s.correct, s.total);
        }
        out
    }
}

/// Parameters shared by the experiment runners.
#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolConfig {
    pub kinds: BTreeSet<FeatureKind>,
    pub words: Option<Vec<String>>,
    pub k: usize,
    pub seed: u64,
    pub smoothing: f64,
    pub fold_unit: FoldUnit,
    pub equalize: bool,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            kinds: FeatureKind::all(),
            words: None,
            k: 10,
            seed: 0,
            smoothing: DEFAULT_SMOOTHING,
            fold_unit: FoldUnit::Example,
            equalize: false,
        }
    }
}

impl ProtocolConfig {
    fn echo(&self, report: &mut Report) {
        report.meta("kinds", render_kinds(&self.kinds));
        if let Some(words) = &self.words {
            report.meta("words", words.join(","));
        }
        report.meta("k", self.k);
        report.meta("seed", self.seed);
        report.meta("smoothing", self.smoothing);
        report.meta("fold_unit", self.fold_unit);
        report.meta("equalize", self.equalize);
    }

    fn select_words<'c>(&self, keys: Vec<&'c str>) -> Vec<&'c str> {
        match &self.words {
            Some(filter) => keys.into_iter().filter(|k| filter.iter().any(|w| w == k)).collect(),
            None => keys,
        }
    }
}

/// `N`, `V`, ... from the suffix of `word.n`; `OTHER` without a suffix.
pub fn pos_class(target_key: &str) -> String {
    match target_key.rsplit_once('.') {
        Some((_, suffix)) if !suffix.is_empty() => suffix.to_uppercase(),
        _ => "OTHER".to_string(),
    }
}

const OVERALL: &str = "OVERALL";
const ALL_SCOPE: &str = "ALL";

/// Row labels for a kind selection: each kind then its group, per group,
/// then `OVERALL`.
fn labels_for(kinds: &BTreeSet<FeatureKind>) -> Vec<(String, BTreeSet<FeatureKind>)> {
    let mut labels = Vec::new();
    for group in KindGroup::ALL {
        let members: BTreeSet<_> = group.kinds().intersection(kinds).copied().collect();
        if members.is_empty() {
            continue;
        }
        for &kind in &members {
            labels.push((kind.name().to_string(), [kind].into()));
        }
        labels.push((group.name().to_string(), members));
    }
    labels.push((OVERALL.to_string(), kinds.clone()));
    labels
}

/// A trained list plus its per-label restrictions.
struct Evaluator {
    lists: Vec<DecisionList>,
}

impl Evaluator {
    fn new(full: &DecisionList, labels: &[(String, BTreeSet<FeatureKind>)]) -> Self {
        Evaluator { lists: labels.iter().map(|(_, kinds)| full.restrict(kinds)).collect() }
    }

    fn tally(&self, features: &FeatureSet, gold: &str, scores: &mut [Score]) {
        for (list, score) in self.lists.iter().zip(scores.iter_mut()) {
            score.record(list.predict(features).sense(), gold);
        }
    }

    fn abstain_all(gold_count: usize, scores: &mut [Score]) {
        for s in scores {
            s.total += gold_count as u64;
        }
    }
}

struct WordResult {
    key: String,
    scores: Vec<Score>,
}

fn featurize(examples: &[Example<'_>], kinds: &BTreeSet<FeatureKind>) -> Vec<FeatureSet> {
    examples.iter().map(|e| extract_features_of(e, kinds)).collect()
}

/// Trains on `train` and scores `test` under every label.
fn train_and_tally(
    key: &str,
    train: &[(&str, &FeatureSet)],
    test: &[(&str, &FeatureSet)],
    labels: &[(String, BTreeSet<FeatureKind>)],
    smoothing: f64,
    scores: &mut [Score],
) -> Result<()> {
    if test.is_empty() {
        return Ok(());
    }
    if train.is_empty() {
        Evaluator::abstain_all(test.len(), scores);
        return Ok(());
    }
    let full = train_featurized(key, train.iter().copied(), smoothing)?;
    let eval = Evaluator::new(&full, labels);
    for (gold, features) in test {
        eval.tally(features, gold, scores);
    }
    Ok(())
}

fn assemble(report: &mut Report, labels: &[(String, BTreeSet<FeatureKind>)], results: &[WordResult]) {
    let mut scopes: BTreeMap<String, Vec<Score>> = BTreeMap::new();
    let mut all = vec![Score::default(); labels.len()];
    for r in results {
        let scope = scopes.entry(pos_class(&r.key)).or_insert_with(|| vec![Score::default(); labels.len()]);
        for (i, s) in r.scores.iter().enumerate() {
            scope[i] += *s;
            all[i] += *s;
        }
    }
    for (scope, scores) in scopes.iter().map(|(k, v)| (k.as_str(), v)).chain([(ALL_SCOPE, &all)]) {
        for ((label, _), score) in labels.iter().zip(scores) {
            report.rows.push(ReportRow { scope: scope.to_string(), label: label.clone(), score: *score });
        }
    }
}

/// In-corpus k-fold cross-validation, by example or by document group.
pub fn run_xval(corpus: &Corpus, config: &ProtocolConfig) -> Result<Report> {
    weight_check(config)?;
    let words = config.select_words(corpus.target_keys());
    let labels = labels_for(&config.kinds);
    let doc_folds = match config.fold_unit {
        FoldUnit::DocumentGroup => Some(kfold_by_document(corpus, config.k, config.seed)?),
        FoldUnit::Example => None,
    };

    let outcomes: Vec<Result<WordResult, String>> = words
        .par_iter()
        .map(|&key| {
            let examples = extract_examples(corpus, Some(key));
            let fold_of: Vec<usize> = match &doc_folds {
                Some(folds) => {
                    examples.iter().map(|e| folds.fold_of(e.grouping_key).expect("every group is assigned")).collect()
                }
                None => {
                    let folds =
                        kfold_by_example(&examples, config.k, config.seed).map_err(|e| format!("{key}: {e}"))?;
                    examples.iter().map(|e| folds.fold_of(&e.id()).expect("every example is assigned")).collect()
                }
            };
            let features = featurize(&examples, &config.kinds);
            let mut scores = vec![Score::default(); labels.len()];
            for fold in 0..config.k {
                let mut train = Vec::new();
                let mut test = Vec::new();
                for ((e, f), &fi) in examples.iter().zip(&features).zip(&fold_of) {
                    if fi == fold { &mut test } else { &mut train }.push((e.sense, f));
                }
                train_and_tally(key, &train, &test, &labels, config.smoothing, &mut scores)
                    .map_err(|e| format!("{key}: {e}"))?;
            }
            Ok(WordResult { key: key.to_string(), scores })
        })
        .collect();

    let mut report = Report::default();
    report.meta("protocol", "xval");
    report.meta("corpus_name", &corpus.name);
    config.echo(&mut report);
    let mut results = Vec::new();
    for (word, outcome) in words.iter().zip(outcomes) {
        match outcome {
            Ok(r) => results.push(r),
            Err(reason) => report.meta("skipped", format!("{word} ({reason})")),
        }
    }
    assemble(&mut report, &labels, &results);
    Ok(report)
}

fn weight_check(config: &ProtocolConfig) -> Result<()> {
    crate::decision_list::weight(1, 0, config.smoothing).map(|_| ())
}

fn shared_words<'c>(a: &'c Corpus, b: &Corpus, config: &ProtocolConfig) -> Result<Vec<&'c str>> {
    let b_keys: BTreeSet<&str> = b.target_keys().into_iter().collect();
    let shared: Vec<&str> = a.target_keys().into_iter().filter(|k| b_keys.contains(k)).collect();
    let shared = config.select_words(shared);
    if shared.is_empty() {
        return Err(Error::NoSharedTargets(a.name.clone(), b.name.clone()));
    }
    Ok(shared)
}

fn group_by_key<'c>(examples: Vec<Example<'c>>) -> HashMap<&'c str, Vec<Example<'c>>> {
    let mut map: HashMap<&str, Vec<Example<'c>>> = HashMap::new();
    for e in examples {
        map.entry(e.target_key).or_default().push(e);
    }
    map
}

/// Trains on one corpus and tags the other.
pub fn run_cross(train_corpus: &Corpus, test_corpus: &Corpus, config: &ProtocolConfig) -> Result<Report> {
    weight_check(config)?;
    let words = shared_words(train_corpus, test_corpus, config)?;
    let labels = labels_for(&config.kinds);
    let keep = |e: &Example<'_>| words.contains(&e.target_key);
    let mut train_ex: Vec<_> = extract_examples(train_corpus, None).into_iter().filter(keep).collect();
    let mut test_ex: Vec<_> = extract_examples(test_corpus, None).into_iter().filter(keep).collect();
    if config.equalize {
        (train_ex, test_ex) = equalize_per_word(&train_ex, &test_ex, config.seed);
    }
    let train_by = group_by_key(train_ex);
    let test_by = group_by_key(test_ex);

    let results: Vec<WordResult> = words
        .par_iter()
        .map(|&key| {
            let empty = Vec::new();
            let tr = train_by.get(key).unwrap_or(&empty);
            let te = test_by.get(key).unwrap_or(&empty);
            let trf = featurize(tr, &config.kinds);
            let tef = featurize(te, &config.kinds);
            let train: Vec<_> = tr.iter().map(|e| e.sense).zip(&trf).collect();
            let test: Vec<_> = te.iter().map(|e| e.sense).zip(&tef).collect();
            let mut scores = vec![Score::default(); labels.len()];
            train_and_tally(key, &train, &test, &labels, config.smoothing, &mut scores)?;
            Ok(WordResult { key: key.to_string(), scores })
        })
        .collect::<Result<_>>()?;

    let mut report = Report::default();
    report.meta("protocol", "cross");
    report.meta("train_corpus", &train_corpus.name);
    report.meta("test_corpus", &test_corpus.name);
    config.echo(&mut report);
    assemble(&mut report, &labels, &results);
    Ok(report)
}

pub const CROSS_ROW: &str = "cross";
pub const REST_ROW: &str = "rest";

/// Tags every category of `bc` twice: with lists trained on `wsj`
/// (`cross` rows) and with lists trained on the other categories of `bc`
/// (`rest` rows).
pub fn run_categories(bc: &Corpus, wsj: &Corpus, config: &ProtocolConfig) -> Result<Report> {
    weight_check(config)?;
    let uncategorized: Vec<String> =
        bc.documents().iter().filter(|d| d.category.is_none()).map(|d| d.id.clone()).collect();
    if !uncategorized.is_empty() {
        return Err(Error::MissingCategory(uncategorized));
    }
    let words = shared_words(bc, wsj, config)?;
    let categories: BTreeSet<&str> = bc.documents().iter().filter_map(|d| d.category.as_deref()).collect();

    let bc_by = group_by_key(extract_examples(bc, None));
    let wsj_by = group_by_key(extract_examples(wsj, None));

    // per category: [cross, rest]
    let per_word: Vec<BTreeMap<&str, [Score; 2]>> = words
        .par_iter()
        .map(|&key| {
            let empty = Vec::new();
            let bc_ex = bc_by.get(key).unwrap_or(&empty);
            let wsj_ex = wsj_by.get(key).unwrap_or(&empty);
            let bcf = featurize(bc_ex, &config.kinds);
            let wsjf = featurize(wsj_ex, &config.kinds);
            let wsj_items: Vec<_> = wsj_ex.iter().map(|e| e.sense).zip(&wsjf).collect();
            let wsj_list = if wsj_items.is_empty() {
                DecisionList::empty(key, config.smoothing)
            } else {
                train_featurized(key, wsj_items, config.smoothing)?
            };
            let mut out = BTreeMap::new();
            for &cat in &categories {
                let mut inside = Vec::new();
                let mut rest = Vec::new();
                for (e, f) in bc_ex.iter().zip(&bcf) {
                    if e.category == Some(cat) { &mut inside } else { &mut rest }.push((e.sense, f));
                }
                let mut cross = Score::default();
                for (gold, f) in &inside {
                    cross.record(wsj_list.predict(f).sense(), gold);
                }
                let mut rest_score = [Score::default()];
                let all = [(OVERALL.to_string(), config.kinds.clone())];
                train_and_tally(key, &rest, &inside, &all, config.smoothing, &mut rest_score)?;
                out.insert(cat, [cross, rest_score[0]]);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let mut report = Report::default();
    report.meta("protocol", "categories");
    report.meta("bc_corpus", &bc.name);
    report.meta("wsj_corpus", &wsj.name);
    report.meta("cross_rows", format!("trained on {}", wsj.name));
    report.meta("rest_rows", format!("trained on the other categories of {}", bc.name));
    config.echo(&mut report);
    for &cat in &categories {
        let mut pair = [Score::default(); 2];
        for w in &per_word {
            pair[0] += w[cat][0];
            pair[1] += w[cat][1];
        }
        for (label, score) in [CROSS_ROW, REST_ROW].into_iter().zip(pair) {
            report.rows.push(ReportRow { scope: cat.to_string(), label: label.to_string(), score });
        }
    }
    Ok(report)
}
