//! How many collocations two corpora share for a word, and how many of the
//! shared ones point at different senses.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::collocations::{render_feature, FeatureKind, KindGroup};
use crate::corpus::{extract_examples, Corpus};
use crate::decision_list::count;
use crate::error::{Error, Result};

pub type SenseTally = BTreeMap<String, u32>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CollocationProfile {
    pub target_key: String,
    pub kinds: BTreeSet<FeatureKind>,
    /// canonical feature string → sense → count
    pub entries: BTreeMap<String, SenseTally>,
    pub source: String,
}

/// The local content-word kinds.
pub fn default_agreement_kinds() -> BTreeSet<FeatureKind> {
    KindGroup::LocalContent.kinds()
}

pub fn collect(corpus: &Corpus, target_key: &str, kinds: &BTreeSet<FeatureKind>) -> CollocationProfile {
    let examples = extract_examples(corpus, Some(target_key));
    let counts = count(&examples, kinds).expect("examples share one target key");
    CollocationProfile {
        target_key: target_key.to_string(),
        kinds: kinds.clone(),
        entries: counts.iter().map(|(f, senses)| (render_feature(f), senses.clone())).collect(),
        source: corpus.name.clone(),
    }
}

/// Most frequent sense, ties going to the smallest label. The flag reports
/// whether the maximum was shared.
pub fn majority_sense(entry: &SenseTally) -> Result<(&str, bool)> {
    let max = *entry.values().max().ok_or(Error::EmptyEntry)?;
    let mut winners = entry.iter().filter(|(_, &c)| c == max).map(|(s, _)| s.as_str());
    let first = winners.next().expect("max is attained");
    Ok((first, winners.next().is_some()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct AgreementStats {
    pub count_a: usize,
    pub count_b: usize,
    pub shared: usize,
    pub shared_pct: f64,
    pub contradictions: usize,
    pub contradiction_pct: f64,
    pub ties_a: usize,
    pub ties_b: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Contradiction {
    pub feature: String,
    pub sense_a: String,
    pub counts_a: SenseTally,
    pub sense_b: String,
    pub counts_b: SenseTally,
}

/// Shared and contradicting collocations between two profiles of the same
/// word and kind set. `shared_pct` is taken against the mean of the two
/// collocation counts.
pub fn compare(a: &CollocationProfile, b: &CollocationProfile) -> Result<(AgreementStats, Vec<Contradiction>)> {
    if a.target_key != b.target_key {
        return Err(Error::IncomparableProfiles(format!("target keys {:?} and {:?}", a.target_key, b.target_key)));
    }
    if a.kinds != b.kinds {
        return Err(Error::IncomparableProfiles("different kind sets".into()));
    }
    let mut shared = 0;
    let mut ties_a = 0;
    let mut ties_b = 0;
    let mut contradictions = Vec::new();
    // BTreeMap iteration keeps the listing sorted by feature string
    for (feature, counts_a) in &a.entries {
        let Some(counts_b) = b.entries.get(feature) else { continue };
        shared += 1;
        let (sa, ta) = majority_sense(counts_a)?;
        let (sb, tb) = majority_sense(counts_b)?;
        ties_a += usize::from(ta);
        ties_b += usize::from(tb);
        if sa != sb {
            contradictions.push(Contradiction {
                feature: feature.clone(),
                sense_a: sa.to_string(),
                counts_a: counts_a.clone(),
                sense_b: sb.to_string(),
                counts_b: counts_b.clone(),
            });
        }
    }
    let (count_a, count_b) = (a.entries.len(), b.entries.len());
    let mean = (count_a + count_b) as f64 / 2.0;
    let stats = AgreementStats {
        count_a,
        count_b,
        shared,
        shared_pct: if mean == 0.0 { 0.0 } else { 100.0 * shared as f64 / mean },
        contradictions: contradictions.len(),
        contradiction_pct: if shared == 0 { 0.0 } else { 100.0 * contradictions.len() as f64 / shared as f64 },
        ties_a,
        ties_b,
    };
    Ok((stats, contradictions))
}

pub const AGREEMENT_HEADER: &str = "word\t#coll_a\t#coll_b\t%shared\t%contradiction";
pub const DETAIL_HEADER: &str = "feature\tsense\tcount_a\tcount_b";

/// One agreement row, percentages with one decimal.
pub fn agreement_row(word: &str, stats: &AgreementStats) -> String {
    format!("{word}\t{}\t{}\t{:.1}\t{:.1}", stats.count_a, stats.count_b, stats.shared_pct, stats.contradiction_pct)
}

/// Per-sense count rows for each contradiction, every sense seen on
/// either side.
pub fn detail_rows(contradictions: &[Contradiction]) -> String {
    let mut out = String::new();
    for c in contradictions {
        let senses: BTreeSet<&String> = c.counts_a.keys().chain(c.counts_b.keys()).collect();
        for sense in senses {
            let a = c.counts_a.get(sense).copied().unwrap_or(0);
            let b = c.counts_b.get(sense).copied().unwrap_or(0);
            let _ = writeln!(out, "{}\t{sense}\t{a}\t{b}", c.feature);
        }
    }
    out
}

/// Profiles and compares every target key the two corpora share.
pub fn compare_corpora(
    a: &Corpus,
    b: &Corpus,
    kinds: &BTreeSet<FeatureKind>,
    words: Option<&[String]>,
) -> Result<Vec<(String, AgreementStats, Vec<Contradiction>)>> {
    let b_keys: BTreeSet<&str> = b.target_keys().into_iter().collect();
    let mut out = Vec::new();
    for key in a.target_keys() {
        if !b_keys.contains(key) || words.is_some_and(|w| !w.iter().any(|x| x == key)) {
            continue;
        }
        let (stats, contra) = compare(&collect(a, key, kinds), &collect(b, key, kinds))?;
        out.push((key.to_string(), stats, contra));
    }
    if out.is_empty() {
        return Err(Error::NoSharedTargets(a.name.clone(), b.name.clone()));
    }
    Ok(out)
}
