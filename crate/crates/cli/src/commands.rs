use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use sensecol::agreement::{agreement_row, compare_corpora, detail_rows, AGREEMENT_HEADER, DETAIL_HEADER};
use sensecol::collocations::render_kinds;
use sensecol::decision_list::DecisionList;
use sensecol::evaluation::format_ratio;
use sensecol::{
    extract_examples, extract_features, parse_corpus, run_categories, run_cross, run_xval, synth, Corpus, FoldUnit,
    ProtocolConfig, Score, SynthSpec,
};

use crate::{AgreeArgs, Command, Common, CrossArgs, PairArgs, SynthArgs, TagArgs, TrainArgs, XvalArgs};

pub enum Failure {
    Usage(String),
    Data(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Data(e)
    }
}

type Outcome = Result<(), Failure>;

pub fn run(command: &Command) -> Outcome {
    match command {
        Command::Train(a) => train_cmd(a),
        Command::Tag(a) => tag_cmd(a),
        Command::Xval(a) => xval_cmd(a),
        Command::Cross(a) => cross_cmd(a),
        Command::Categories(a) => categories_cmd(a),
        Command::Agree(a) => agree_cmd(a),
        Command::Synth(a) => synth_cmd(a),
    }
}

/// Accumulates `## key=value` lines ahead of a body.
#[derive(Default)]
struct Header(String);

impl Header {
    fn new(command: &str) -> Self {
        let mut h = Header::default();
        h.add("command", command);
        h
    }

    fn add(&mut self, key: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.0, "## {key}={value}");
    }

    fn paths(&mut self, key: &str, paths: &[PathBuf]) {
        for p in paths {
            self.add(key, p.display());
        }
    }

    fn common(&mut self, c: &Common) {
        if let Some(words) = &c.words {
            self.add("words", words.join(","));
        }
        self.add("kinds", render_kinds(&c.kinds));
        self.add("seed", c.seed);
        self.add("smoothing", c.smoothing);
    }
}

fn corpus_name(path: &Path) -> String {
    path.file_stem().map_or_else(|| "corpus".to_string(), |s| s.to_string_lossy().into_owned())
}

fn load_corpus(path: &Path) -> anyhow::Result<Corpus> {
    let text = fs::read_to_string(path).with_context(|| format!("--corpus {}", path.display()))?;
    parse_corpus(&text, &corpus_name(path)).with_context(|| format!("--corpus {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("--out {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).context("writing stdout")
        }
    }
}

fn pair(paths: &[PathBuf], what: &str) -> Result<(PathBuf, PathBuf), Failure> {
    match paths {
        [a, b] => Ok((a.clone(), b.clone())),
        _ => Err(Failure::Usage(format!("--corpus must be given exactly twice ({what}), got {}", paths.len()))),
    }
}

fn check_smoothing(c: &Common) -> Outcome {
    if !(c.smoothing > 0.0 && c.smoothing.is_finite()) {
        return Err(Failure::Usage(format!("--smoothing must be positive, got {}", c.smoothing)));
    }
    Ok(())
}

fn config(c: &Common) -> ProtocolConfig {
    ProtocolConfig {
        kinds: c.kinds.clone(),
        words: c.words.clone(),
        seed: c.seed,
        smoothing: c.smoothing,
        ..ProtocolConfig::default()
    }
}

fn selected<'c>(corpus: &'c Corpus, words: &Option<Vec<String>>) -> Vec<&'c str> {
    corpus.target_keys().into_iter().filter(|k| words.as_ref().is_none_or(|w| w.iter().any(|x| x == k))).collect()
}

fn train_cmd(a: &TrainArgs) -> Outcome {
    check_smoothing(&a.common)?;
    let corpus = load_corpus(&a.corpus)?;
    let mut h = Header::new("train");
    h.paths("corpus", std::slice::from_ref(&a.corpus));
    h.common(&a.common);
    let mut body = h.0;
    for key in selected(&corpus, &a.common.words) {
        let examples = extract_examples(&corpus, Some(key));
        let dl = sensecol::train(&examples, &a.common.kinds, a.common.smoothing).map_err(|e| anyhow!(e))?;
        let _ = writeln!(body, "## target={key}");
        body.push_str(&dl.to_tsv());
    }
    emit(a.common.out.as_deref(), &body)?;
    Ok(())
}

/// Splits a rule dump into per-target lists.
fn load_model(path: &Path, smoothing: f64) -> anyhow::Result<Vec<DecisionList>> {
    let text = fs::read_to_string(path).with_context(|| format!("--model {}", path.display()))?;
    let mut lists = Vec::new();
    let mut current: Option<(String, String)> = None;
    let finish = |cur: Option<(String, String)>, lists: &mut Vec<DecisionList>| -> anyhow::Result<()> {
        if let Some((key, body)) = cur {
            let dl =
                DecisionList::from_tsv(key, smoothing, &body).with_context(|| format!("--model {}", path.display()))?;
            lists.push(dl);
        }
        Ok(())
    };
    for line in text.lines() {
        if let Some(key) = line.strip_prefix("## target=") {
            finish(current.take(), &mut lists)?;
            current = Some((key.to_string(), String::new()));
        } else if line.starts_with("##") || line.is_empty() {
            continue;
        } else if let Some((_, body)) = current.as_mut() {
            body.push_str(line);
            body.push('\n');
        } else {
            anyhow::bail!("--model {}: rule line before any '## target=' line", path.display());
        }
    }
    finish(current, &mut lists)?;
    Ok(lists)
}

fn tag_cmd(a: &TagArgs) -> Outcome {
    check_smoothing(&a.common)?;
    let lists = load_model(&a.model, a.common.smoothing)?;
    let corpus = load_corpus(&a.corpus)?;
    let mut rows = String::from("doc\tsentence\ttoken\ttarget\tgold\tpredicted\tweight\tfeature\n");
    let mut score = Score::default();
    for dl in &lists {
        if a.common.words.as_ref().is_some_and(|w| !w.iter().any(|x| x == dl.target_key())) {
            continue;
        }
        let dl = dl.restrict(&a.common.kinds);
        for e in extract_examples(&corpus, Some(dl.target_key())) {
            let decision = dl.predict(&extract_features(&e));
            score.record(decision.sense(), e.sense);
            let (pred, weight, feature) = match decision {
                sensecol::Decision::Answer { sense, rule } => (sense, format!("{:.6}", rule.weight), rule.key.as_str()),
                sensecol::Decision::Abstain => ("-", "-".to_string(), "-"),
            };
            let _ = writeln!(
                rows,
                "{}\t{}\t{}\t{}\t{}\t{pred}\t{weight}\t{feature}",
                e.doc_id, e.sentence_index, e.token_index, e.target_key, e.sense
            );
        }
    }
    let mut h = Header::new("tag");
    h.paths("model", std::slice::from_ref(&a.model));
    h.paths("corpus", std::slice::from_ref(&a.corpus));
    h.common(&a.common);
    h.add("precision", format_ratio(score.correct, score.answered));
    h.add("coverage", format_ratio(score.answered, score.total));
    h.add("answered", score.answered);
    h.add("correct", score.correct);
    h.add("total", score.total);
    emit(a.common.out.as_deref(), &(h.0 + &rows))?;
    Ok(())
}

fn xval_cmd(a: &XvalArgs) -> Outcome {
    check_smoothing(&a.common)?;
    if a.k < 2 {
        return Err(Failure::Usage(format!("--k must be at least 2, got {}", a.k)));
    }
    let corpus = load_corpus(&a.corpus)?;
    let cfg = ProtocolConfig { k: a.k, fold_unit: a.fold_unit, ..config(&a.common) };
    let report = run_xval(&corpus, &cfg).with_context(|| format!("--corpus {}", a.corpus.display()))?;
    let mut h = Header::new("xval");
    h.paths("corpus", std::slice::from_ref(&a.corpus));
    emit(a.common.out.as_deref(), &(h.0 + &report.to_tsv()))?;
    Ok(())
}

fn cross_cmd(a: &CrossArgs) -> Outcome {
    check_smoothing(&a.common)?;
    let (train, test) = pair(&a.corpus, "train, test")?;
    let (train_c, test_c) = (load_corpus(&train)?, load_corpus(&test)?);
    let cfg = ProtocolConfig { equalize: a.equalize, fold_unit: FoldUnit::Example, ..config(&a.common) };
    let report = run_cross(&train_c, &test_c, &cfg).map_err(|e| anyhow!(e))?;
    let mut h = Header::new("cross");
    h.paths("corpus", &a.corpus);
    emit(a.common.out.as_deref(), &(h.0 + &report.to_tsv()))?;
    Ok(())
}

fn categories_cmd(a: &PairArgs) -> Outcome {
    check_smoothing(&a.common)?;
    let (bc, wsj) = pair(&a.corpus, "categorized, outside")?;
    let (bc_c, wsj_c) = (load_corpus(&bc)?, load_corpus(&wsj)?);
    let report = run_categories(&bc_c, &wsj_c, &config(&a.common)).map_err(|e| anyhow!(e))?;
    let mut h = Header::new("categories");
    h.paths("corpus", &a.corpus);
    emit(a.common.out.as_deref(), &(h.0 + &report.to_tsv()))?;
    Ok(())
}

fn agree_cmd(a: &AgreeArgs) -> Outcome {
    let (pa, pb) = pair(&a.corpus, "first, second")?;
    let (ca, cb) = (load_corpus(&pa)?, load_corpus(&pb)?);
    let results = compare_corpora(&ca, &cb, &a.kinds, a.words.as_deref()).map_err(|e| anyhow!(e))?;

    let mut h = Header::new("agree");
    h.paths("corpus", &a.corpus);
    if let Some(words) = &a.words {
        h.add("words", words.join(","));
    }
    h.add("kinds", render_kinds(&a.kinds));
    h.add("shared_pct", "100*shared/mean(#coll_a,#coll_b)");
    h.add("contradiction", "majority senses differ (ties to the smallest label)");

    let mut body = format!("{AGREEMENT_HEADER}\n");
    let mut detail = String::new();
    let (mut total_a, mut total_b, mut shared, mut contra, mut ties_a, mut ties_b) = (0, 0, 0, 0, 0, 0);
    for (word, stats, contradictions) in &results {
        let _ = writeln!(body, "{}", agreement_row(word, stats));
        total_a += stats.count_a;
        total_b += stats.count_b;
        shared += stats.shared;
        contra += stats.contradictions;
        ties_a += stats.ties_a;
        ties_b += stats.ties_b;
        if !contradictions.is_empty() {
            let _ = writeln!(detail, "## word={word}");
            detail.push_str(&detail_rows(contradictions));
        }
    }
    let mean = (total_a + total_b) as f64 / 2.0;
    let pooled = sensecol::AgreementStats {
        count_a: total_a,
        count_b: total_b,
        shared,
        shared_pct: if mean == 0.0 { 0.0 } else { 100.0 * shared as f64 / mean },
        contradictions: contra,
        contradiction_pct: if shared == 0 { 0.0 } else { 100.0 * contra as f64 / shared as f64 },
        ties_a,
        ties_b,
    };
    let _ = writeln!(body, "{}", agreement_row("OVERALL", &pooled));
    emit(a.out.as_deref(), &(h.0.clone() + &body))?;
    if let Some(path) = &a.detail {
        let text = h.0 + DETAIL_HEADER + "\n" + &detail;
        fs::write(path, text).with_context(|| format!("--detail {}", path.display()))?;
    }
    Ok(())
}

fn synth_cmd(a: &SynthArgs) -> Outcome {
    let mut spec = match &a.spec {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("--spec {}", path.display()))?;
            toml::from_str::<SynthSpec>(&text).with_context(|| format!("--spec {}", path.display()))?
        }
        None => SynthSpec::demo(0),
    };
    if let Some(seed) = a.seed {
        spec.seed = seed;
    }
    let corpus = synth(&spec).map_err(|e| anyhow!(e)).context("synth")?;
    let mut h = Header::new("synth");
    match &a.spec {
        Some(p) => h.add("spec", p.display()),
        None => h.add("spec", "demo"),
    }
    h.add("seed", spec.seed);
    emit(a.out.as_deref(), &(h.0 + &corpus.serialize()))?;
    Ok(())
}
