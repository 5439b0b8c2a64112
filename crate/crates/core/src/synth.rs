//! Seeded generator of sense-annotated corpora with planted collocations.
//!
//! Each example is one sentence: filler on both sides of the target word and
//! one slot adjacent to it that carries the sense signal. The slot holds a
//! document-specific word with probability `doc_colloc_rate`, otherwise a
//! signature word of the example's sense with probability `1 - noise`,
//! otherwise a confounder drawn from a pool shared by every sense of the
//! word.

use serde::{Deserialize, Serialize};

use crate::corpus::{Annotation, Corpus, Document, PosTag, Sentence, Token};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSpec {
    pub seed: u64,
    pub corpus_name: String,
    /// Prefix for document ids and grouping keys.
    pub doc_prefix: String,
    pub documents: usize,
    /// Consecutive documents sharing one grouping key.
    pub docs_per_group: usize,
    /// Assigned to documents round-robin; empty leaves documents uncategorized.
    pub categories: Vec<String>,
    pub filler_words: usize,
    pub filler_prefix: String,
    pub doc_colloc_rate: f64,
    /// Probability that an example takes its document's preferred sense.
    pub discourse: f64,
    pub words: Vec<SynthWord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthWord {
    pub target_key: String,
    /// Surface form; defaults to the key up to its last `.`.
    #[serde(default)]
    pub form: Option<String>,
    /// Defaults to `NN` for `.n` keys, `VB` for `.v`, `JJ` otherwise.
    #[serde(default)]
    pub pos: Option<String>,
    pub examples: usize,
    #[serde(default)]
    pub noise: f64,
    /// Defaults to five words derived from the form.
    #[serde(default)]
    pub confounders: Vec<String>,
    pub senses: Vec<SynthSense>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSense {
    pub label: String,
    #[serde(default = "one")]
    pub weight: f64,
    #[serde(default)]
    pub signatures: Vec<String>,
}

fn one() -> f64 {
    1.0
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            seed: 0,
            corpus_name: "synth".into(),
            doc_prefix: "d".into(),
            documents: 20,
            docs_per_group: 1,
            categories: Vec::new(),
            filler_words: 40,
            filler_prefix: "w".into(),
            doc_colloc_rate: 0.0,
            discourse: 0.0,
            words: Vec::new(),
        }
    }
}

impl SynthSense {
    pub fn new(label: &str, signatures: &[&str]) -> Self {
        SynthSense { label: label.into(), weight: 1.0, signatures: signatures.iter().map(|s| s.to_string()).collect() }
    }
}

impl SynthWord {
    pub fn new(target_key: &str, examples: usize, noise: f64, senses: Vec<SynthSense>) -> Self {
        SynthWord {
            target_key: target_key.into(),
            form: None,
            pos: None,
            examples,
            noise,
            confounders: Vec::new(),
            senses,
        }
    }

    fn form(&self) -> String {
        self.form.clone().unwrap_or_else(|| match self.target_key.rsplit_once('.') {
            Some((stem, _)) => stem.to_string(),
            None => self.target_key.clone(),
        })
    }

    fn pos(&self) -> String {
        self.pos.clone().unwrap_or_else(|| {
            match self.target_key.rsplit_once('.').map(|(_, s)| s) {
                Some("n") => "NN",
                Some("v") => "VB",
                _ => "JJ",
            }
            .to_string()
        })
    }

    fn confounders(&self) -> Vec<String> {
        if self.confounders.is_empty() {
            let form = self.form();
            (0..5).map(|i| format!("{form}_c{i}")).collect()
        } else {
            self.confounders.clone()
        }
    }
}

impl SynthSpec {
    /// A small three-category corpus with two words.
    pub fn demo(seed: u64) -> Self {
        SynthSpec {
            seed,
            corpus_name: "demo".into(),
            documents: 30,
            categories: vec!["A".into(), "B".into(), "C".into()],
            words: vec![
                SynthWord::new(
                    "state.n",
                    120,
                    0.3,
                    vec![
                        SynthSense::new("1", &["government", "officials"]),
                        SynthSense::new("2", &["mind", "emergency"]),
                        SynthSense::new("5", &["department", "aid"]),
                    ],
                ),
                SynthWord::new(
                    "fall.v",
                    80,
                    0.3,
                    vec![SynthSense::new("1", &["prices", "sharply"]), SynthSense::new("2", &["asleep", "ill"])],
                ),
            ],
            ..SynthSpec::default()
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSynth(m));
        if self.documents == 0 {
            return bad("documents must be positive".into());
        }
        if self.docs_per_group == 0 {
            return bad("docs_per_group must be positive".into());
        }
        for (name, p) in [("doc_colloc_rate", self.doc_colloc_rate), ("discourse", self.discourse)] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must lie in [0, 1]"));
            }
        }
        for w in &self.words {
            if w.senses.is_empty() {
                return bad(format!("{} has no senses", w.target_key));
            }
            if !(0.0..=1.0).contains(&w.noise) {
                return bad(format!("{}: noise must lie in [0, 1]", w.target_key));
            }
            for s in &w.senses {
                if !(s.weight > 0.0 && s.weight.is_finite()) {
                    return bad(format!("{} sense {}: weight must be positive", w.target_key, s.label));
                }
                if s.signatures.is_empty() && w.noise < 1.0 {
                    return bad(format!("{} sense {}: no signatures", w.target_key, s.label));
                }
                Annotation::new(w.target_key.clone(), s.label.clone())
                    .map_err(|e| Error::InvalidSynth(e.to_string()))?;
            }
            let words = w.senses.iter().flat_map(|s| &s.signatures).chain(&w.confounders);
            for form in words {
                token(form, "NN")?;
            }
            token(&w.form(), &w.pos())?;
        }
        Ok(())
    }
}

const FUNCTION_WORDS: [(&str, &str); 8] =
    [("the", "DT"), ("of", "IN"), ("a", "DT"), ("in", "IN"), ("and", "CC"), ("to", "TO"), (",", ","), ("for", "IN")];
const FILLER_TAGS: [&str; 4] = ["NN", "VB", "JJ", "RB"];

fn weighted_pick(rng: &mut SplitMix64, senses: &[SynthSense]) -> usize {
    let total: f64 = senses.iter().map(|s| s.weight).sum();
    let mut x = rng.next_f64() * total;
    for (i, s) in senses.iter().enumerate() {
        if x < s.weight {
            return i;
        }
        x -= s.weight;
    }
    senses.len() - 1
}

fn token(form: &str, pos: &str) -> Result<Token> {
    let pos = PosTag::new(pos).map_err(|e| Error::InvalidSynth(e.to_string()))?;
    Token::new(form, pos).map_err(|e| Error::InvalidSynth(e.to_string()))
}

/// Generates the corpus described by `spec`. Output depends only on `spec`.
pub fn synth(spec: &SynthSpec) -> Result<Corpus> {
    spec.validate()?;
    let mut rng = SplitMix64::new(spec.seed);
    let doc_ids: Vec<String> = (0..spec.documents).map(|d| format!("{}{d:04}", spec.doc_prefix)).collect();
    let mut doc_sentences: Vec<Vec<Sentence>> = vec![Vec::new(); spec.documents];

    let filler = |rng: &mut SplitMix64| -> Result<Token> {
        if spec.filler_words == 0 || rng.chance(0.5) {
            let (f, p) = *rng.pick(&FUNCTION_WORDS);
            token(f, p)
        } else {
            let n = rng.below(spec.filler_words);
            token(&format!("{}{n}", spec.filler_prefix), FILLER_TAGS[n % FILLER_TAGS.len()])
        }
    };

    for word in &spec.words {
        let form = word.form();
        let pos = word.pos();
        let confounders = word.confounders();
        let preferred: Vec<usize> = (0..spec.documents).map(|_| weighted_pick(&mut rng, &word.senses)).collect();
        for _ in 0..word.examples {
            let doc = rng.below(spec.documents);
            let sense_idx =
                if rng.chance(spec.discourse) { preferred[doc] } else { weighted_pick(&mut rng, &word.senses) };
            let sense = &word.senses[sense_idx];

            let left_len = 2 + rng.below(4);
            let right_len = 2 + rng.below(4);
            let mut left = (0..left_len).map(|_| filler(&mut rng)).collect::<Result<Vec<_>>>()?;
            let mut right = (0..right_len).map(|_| filler(&mut rng)).collect::<Result<Vec<_>>>()?;

            let signal = if rng.chance(spec.doc_colloc_rate) {
                format!("{}_k{}", doc_ids[doc], rng.below(3))
            } else if !rng.chance(word.noise) {
                rng.pick(&sense.signatures).clone()
            } else {
                rng.pick(&confounders).clone()
            };
            let signal = token(&signal, "NN")?;
            if rng.chance(0.5) {
                *left.last_mut().expect("left context is non-empty") = signal;
            } else {
                right[0] = signal;
            }

            let target_index = left.len();
            let mut tokens = left;
            tokens.push(token(&form, &pos)?);
            tokens.extend(right);
            tokens.push(token(".", ".")?);
            let ann = Annotation::new(word.target_key.clone(), sense.label.clone())
                .map_err(|e| Error::InvalidSynth(e.to_string()))?;
            let sentence = Sentence::new(tokens, [(target_index, ann)].into())?;
            doc_sentences[doc].push(sentence);
        }
    }

    let mut corpus = Corpus::new(spec.corpus_name.clone());
    for (d, (id, sentences)) in doc_ids.into_iter().zip(doc_sentences).enumerate() {
        let group = format!("{}g{:04}", spec.doc_prefix, d / spec.docs_per_group);
        let category = (!spec.categories.is_empty()).then(|| spec.categories[d % spec.categories.len()].clone());
        let mut doc = Document::new(id, spec.corpus_name.clone(), group, category)
            .map_err(|e| Error::InvalidSynth(e.to_string()))?;
        doc.sentences = sentences;
        corpus.push(doc)?;
    }
    Ok(corpus)
}
