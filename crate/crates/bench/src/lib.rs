//! Fixtures shared by the benchmarks.

use sensecol::{synth, Corpus, SynthSense, SynthSpec, SynthWord};

/// A two-word corpus of roughly `examples_per_word * 2` examples.
pub fn bench_corpus(examples_per_word: usize) -> Corpus {
    let spec = SynthSpec {
        seed: 17,
        documents: 60,
        categories: vec!["A".into(), "B".into()],
        words: vec![
            SynthWord::new(
                "line.n",
                examples_per_word,
                0.3,
                vec![
                    SynthSense::new("1", &["cord", "rope"]),
                    SynthSense::new("2", &["queue", "waiting"]),
                    SynthSense::new("3", &["product", "launch"]),
                ],
            ),
            SynthWord::new(
                "strike.v",
                examples_per_word,
                0.3,
                vec![SynthSense::new("1", &["workers", "union"]), SynthSense::new("2", &["lightning", "ball"])],
            ),
        ],
        ..SynthSpec::default()
    };
    synth(&spec).expect("fixture spec is valid")
}
