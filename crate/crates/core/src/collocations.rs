//! The fifteen collocation kinds and their extraction from a sentence.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{Example, Sentence};
use crate::error::{Error, Result};

/// Collocation kinds. Declaration order is the canonical ordinal used for
/// tie-breaking.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[allow(non_camel_case_types)]
pub enum FeatureKind {
    CW_LEFT,
    CW_RIGHT,
    CW_2LEFT,
    CW_2RIGHT,
    CW_BOTH,
    FW_LEFT,
    FW_RIGHT,
    FW_BOTH,
    POS_LEFT,
    POS_RIGHT,
    POS_2LEFT,
    POS_2RIGHT,
    POS_BOTH,
    WIN4_WORD,
    SENT_WORD,
}

/// The three families the reports aggregate over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum KindGroup {
    LocalContent,
    LocalPosFunction,
    Global,
}

impl KindGroup {
    pub const ALL: [KindGroup; 3] = [KindGroup::LocalContent, KindGroup::LocalPosFunction, KindGroup::Global];

    pub fn name(self) -> &'static str {
        match self {
            KindGroup::LocalContent => "local-content",
            KindGroup::LocalPosFunction => "local-posfun",
            KindGroup::Global => "global",
        }
    }

    pub fn kinds(self) -> BTreeSet<FeatureKind> {
        FeatureKind::ALL.into_iter().filter(|k| k.group() == self).collect()
    }
}

impl FeatureKind {
    pub const ALL: [FeatureKind; 15] = [
        FeatureKind::CW_LEFT,
        FeatureKind::CW_RIGHT,
        FeatureKind::CW_2LEFT,
        FeatureKind::CW_2RIGHT,
        FeatureKind::CW_BOTH,
        FeatureKind::FW_LEFT,
        FeatureKind::FW_RIGHT,
        FeatureKind::FW_BOTH,
        FeatureKind::POS_LEFT,
        FeatureKind::POS_RIGHT,
        FeatureKind::POS_2LEFT,
        FeatureKind::POS_2RIGHT,
        FeatureKind::POS_BOTH,
        FeatureKind::WIN4_WORD,
        FeatureKind::SENT_WORD,
    ];

    pub fn ordinal(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        use FeatureKind::*;
        match self {
            CW_LEFT => "CW_LEFT",
            CW_RIGHT => "CW_RIGHT",
            CW_2LEFT => "CW_2LEFT",
            CW_2RIGHT => "CW_2RIGHT",
            CW_BOTH => "CW_BOTH",
            FW_LEFT => "FW_LEFT",
            FW_RIGHT => "FW_RIGHT",
            FW_BOTH => "FW_BOTH",
            POS_LEFT => "POS_LEFT",
            POS_RIGHT => "POS_RIGHT",
            POS_2LEFT => "POS_2LEFT",
            POS_2RIGHT => "POS_2RIGHT",
            POS_BOTH => "POS_BOTH",
            WIN4_WORD => "WIN4_WORD",
            SENT_WORD => "SENT_WORD",
        }
    }

    pub fn group(self) -> KindGroup {
        use FeatureKind::*;
        match self {
            CW_LEFT | CW_RIGHT | CW_2LEFT | CW_2RIGHT | CW_BOTH => KindGroup::LocalContent,
            WIN4_WORD | SENT_WORD => KindGroup::Global,
            _ => KindGroup::LocalPosFunction,
        }
    }

    /// Number of parts a feature of this kind carries.
    pub fn arity(self) -> usize {
        use FeatureKind::*;
        match self {
            CW_2LEFT | CW_2RIGHT | CW_BOTH | FW_BOTH | POS_2LEFT | POS_2RIGHT | POS_BOTH => 2,
            _ => 1,
        }
    }

    pub fn all() -> BTreeSet<FeatureKind> {
        FeatureKind::ALL.into_iter().collect()
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FeatureKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidValue(format!("unknown collocation kind {s:?}")))
    }
}

/// Parses a comma-separated kind selection. Items are kind names or one of
/// the group names `local-content`, `local-posfun`, `global`, `all`.
pub fn parse_kinds(spec: &str) -> Result<BTreeSet<FeatureKind>> {
    let mut kinds = BTreeSet::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match item {
            "all" => kinds.extend(FeatureKind::ALL),
            other => match KindGroup::ALL.into_iter().find(|g| g.name() == other) {
                Some(group) => kinds.extend(group.kinds()),
                None => {
                    kinds.insert(other.parse()?);
                }
            },
        }
    }
    if kinds.is_empty() {
        return Err(Error::InvalidValue(format!("empty kind selection {spec:?}")));
    }
    Ok(kinds)
}

/// Shortest selection string that parses back to `kinds`.
pub fn render_kinds(kinds: &BTreeSet<FeatureKind>) -> String {
    if kinds.len() == FeatureKind::ALL.len() {
        return "all".to_string();
    }
    let mut parts = Vec::new();
    let mut rest = kinds.clone();
    for group in KindGroup::ALL {
        let gk = group.kinds();
        if gk.is_subset(kinds) {
            parts.push(group.name().to_string());
            rest.retain(|k| !gk.contains(k));
        }
    }
    parts.extend(rest.iter().map(|k| k.name().to_string()));
    parts.join(",")
}

/// One typed collocation instance. The target form is part of the identity,
/// so `governing body` and `governing bodies` are different collocations.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Feature {
    pub kind: FeatureKind,
    pub target_key: String,
    pub target_form: String,
    pub parts: Vec<String>,
}

pub type FeatureSet = BTreeSet<Feature>;

impl Feature {
    pub fn new(
        kind: FeatureKind,
        target_key: impl Into<String>,
        target_form: impl Into<String>,
        parts: Vec<String>,
    ) -> Result<Self> {
        if parts.len() != kind.arity() {
            return Err(Error::InvalidValue(format!("{kind} takes {} parts, got {}", kind.arity(), parts.len())));
        }
        Ok(Feature { kind, target_key: target_key.into(), target_form: target_form.into(), parts })
    }

    pub fn render(&self) -> String {
        render_feature(self)
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_feature(self))
    }
}

fn push_escaped(out: &mut String, field: &str) {
    for c in field.chars() {
        if c == '|' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
}

/// `<kind>|<target_key>|<target_form>|<part1>[|<part2>]`. A literal `|` or
/// `\` inside a field is backslash-escaped.
pub fn render_feature(feature: &Feature) -> String {
    let mut out = String::from(feature.kind.name());
    for field in [&feature.target_key, &feature.target_form].into_iter().chain(&feature.parts) {
        out.push('|');
        push_escaped(&mut out, field);
    }
    out
}

/// Inverse of [`render_feature`].
pub fn parse_feature(s: &str) -> Result<Feature> {
    let mut fields = vec![String::new()];
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => match chars.next() {
                Some(n) => fields.last_mut().unwrap().push(n),
                None => return Err(Error::InvalidValue(format!("dangling escape in {s:?}"))),
            },
            '|' => fields.push(String::new()),
            c => fields.last_mut().unwrap().push(c),
        }
    }
    if fields.len() < 4 {
        return Err(Error::InvalidValue(format!("feature string {s:?} has too few fields")));
    }
    let parts = fields.split_off(3);
    let kind: FeatureKind = fields[0].parse()?;
    Feature::new(kind, fields[1].clone(), fields[2].clone(), parts)
}

/// All collocations of every kind around token `target` of `sentence`.
///
/// Positions outside the sentence yield nothing; there is no padding.
pub fn extract_from_sentence(sentence: &Sentence, target: usize, target_key: &str) -> FeatureSet {
    use FeatureKind::*;

    let tokens = sentence.tokens();
    let mut out = FeatureSet::new();
    let Some(target_tok) = tokens.get(target) else {
        return out;
    };
    let mut emit = |kind: FeatureKind, parts: Vec<String>| {
        out.insert(Feature { kind, target_key: target_key.to_string(), target_form: target_tok.form.clone(), parts });
    };
    let at = |offset: isize| -> Option<&crate::corpus::Token> {
        let idx = target as isize + offset;
        if idx < 0 {
            None
        } else {
            tokens.get(idx as usize)
        }
    };
    let form = |t: &crate::corpus::Token| t.form.clone();
    let pos = |t: &crate::corpus::Token| t.pos.as_str().to_string();

    let left = at(-1);
    let right = at(1);

    for (tok, cw, fw, pk) in [(left, CW_LEFT, FW_LEFT, POS_LEFT), (right, CW_RIGHT, FW_RIGHT, POS_RIGHT)] {
        if let Some(t) = tok {
            emit(if t.is_content() { cw } else { fw }, vec![form(t)]);
            emit(pk, vec![pos(t)]);
        }
    }

    let pairs = [
        (at(-2), left, CW_2LEFT, None, POS_2LEFT),
        (right, at(2), CW_2RIGHT, None, POS_2RIGHT),
        (left, right, CW_BOTH, Some(FW_BOTH), POS_BOTH),
    ];
    for (a, b, cw, fw, pk) in pairs {
        let (Some(a), Some(b)) = (a, b) else { continue };
        if a.is_content() || b.is_content() {
            emit(cw, vec![form(a), form(b)]);
        } else if let Some(fw) = fw {
            emit(fw, vec![form(a), form(b)]);
        }
        emit(pk, vec![pos(a), pos(b)]);
    }

    let lo = target.saturating_sub(4);
    let hi = (target + 4).min(tokens.len() - 1);
    for (i, t) in tokens.iter().enumerate() {
        if i == target || !t.is_content() {
            continue;
        }
        if (lo..=hi).contains(&i) {
            emit(WIN4_WORD, vec![form(t)]);
        }
        emit(SENT_WORD, vec![form(t)]);
    }
    out
}

pub fn extract_features(example: &Example<'_>) -> FeatureSet {
    extract_from_sentence(example.context, example.token_index, example.target_key)
}

/// Features of `example` restricted to `kinds`.
pub fn extract_features_of(example: &Example<'_>, kinds: &BTreeSet<FeatureKind>) -> FeatureSet {
    let mut features = extract_features(example);
    if kinds.len() != FeatureKind::ALL.len() {
        features.retain(|f| kinds.contains(&f.kind));
    }
    features
}
