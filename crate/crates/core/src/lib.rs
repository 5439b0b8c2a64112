//! Collocation decision lists for word sense disambiguation.
//!
//! The crate covers the whole pipeline: a vertical corpus format
//! ([`corpus`]), extraction of fifteen kinds of collocation
//! ([`collocations`]), n-way decision lists ([`decision_list`]), the
//! experiment runners and scoring ([`evaluation`]), cross-corpus collocation
//! agreement ([`agreement`]) and a seeded corpus generator ([`synth`]).

pub mod agreement;
pub mod collocations;
pub mod corpus;
pub mod decision_list;
pub mod error;
pub mod evaluation;
pub mod rng;
pub mod synth;

pub use agreement::{collect, compare, majority_sense, AgreementStats, CollocationProfile, Contradiction};
pub use collocations::{extract_features, parse_kinds, render_feature, Feature, FeatureKind, FeatureSet, KindGroup};
pub use corpus::{extract_examples, is_content_tag, parse_corpus, Corpus, Document, Example, PosTag, Sentence, Token};
pub use decision_list::{train, weight, Decision, DecisionList, Rule, SenseCounts, DEFAULT_SMOOTHING};
pub use error::{Error, Result};
pub use evaluation::{
    equalize_per_word, kfold_by_document, kfold_by_example, run_categories, run_cross, run_xval, score, FoldSpec,
    FoldUnit, ProtocolConfig, Report, Score,
};
pub use synth::{synth, SynthSense, SynthSpec, SynthWord};
