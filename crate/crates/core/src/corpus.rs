//! Corpus data model and the vertical corpus file format.
//!
//! The format is line oriented, UTF-8, LF terminated:
//!
//! ```text
//! #DOC id=d01 corpus=wsj group=w00 category=A
//! The	DT
//! State	NNP
//! government	NN	government.n=1
//!
//! ## comment lines start with two hashes
//! ```
//!
//! A blank line ends a sentence, a header ends the current sentence and
//! document. Serialization always produces the canonical form: comments are
//! dropped, runs of blank lines collapse, header keys come in the order
//! `id corpus group category`, and every sentence is followed by exactly one
//! blank line.

// the format example needs literal tabs
#![allow(clippy::tabs_in_doc_comments)]

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use crate::error::{Error, Result};

/// A part-of-speech tag, consumed as an opaque string.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PosTag(String);

impl PosTag {
    pub fn new(tag: impl Into<String>) -> Result<Self> {
        let tag = tag.into();
        if tag.is_empty() || tag.chars().any(char::is_whitespace) {
            return Err(Error::InvalidValue(format!("bad PoS tag {tag:?}")));
        }
        Ok(PosTag(tag))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Nouns, verbs, adjectives and adverbs under the Penn convention.
    pub fn is_content(&self) -> bool {
        is_content_tag(self)
    }
}

impl fmt::Display for PosTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// True iff the tag starts with `N`, `V`, `J` or `R`. Everything else,
/// punctuation included, is a function tag.
pub fn is_content_tag(pos: &PosTag) -> bool {
    matches!(pos.0.as_bytes().first(), Some(b'N' | b'V' | b'J' | b'R'))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Token {
    pub form: String,
    pub pos: PosTag,
}

impl Token {
    /// Forms are case preserved and never normalized. A form may not start
    /// with `##`, which the file format reserves for comments.
    pub fn new(form: impl Into<String>, pos: PosTag) -> Result<Self> {
        let form = form.into();
        if form.is_empty() || form.contains(['\t', '\n', '\r']) || form.starts_with("##") || form.trim().is_empty() {
            return Err(Error::InvalidValue(format!("bad token form {form:?}")));
        }
        Ok(Token { form, pos })
    }

    pub fn is_content(&self) -> bool {
        self.pos.is_content()
    }
}

/// A sense annotation attached to one token.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Annotation {
    pub target_key: String,
    pub sense: String,
}

impl Annotation {
    pub fn new(target_key: impl Into<String>, sense: impl Into<String>) -> Result<Self> {
        let target_key = target_key.into();
        let sense = sense.into();
        if target_key.is_empty() || target_key.contains('=') || has_ws(&target_key) {
            return Err(Error::InvalidValue(format!("bad target key {target_key:?}")));
        }
        if sense.is_empty() || has_ws(&sense) {
            return Err(Error::InvalidValue(format!("bad sense label {sense:?}")));
        }
        Ok(Annotation { target_key, sense })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Sentence {
    tokens: Vec<Token>,
    annotations: BTreeMap<usize, Annotation>,
}

impl Sentence {
    pub fn new(tokens: Vec<Token>, annotations: BTreeMap<usize, Annotation>) -> Result<Self> {
        if let Some((&idx, _)) = annotations.iter().next_back() {
            if idx >= tokens.len() {
                return Err(Error::InvalidValue(format!(
                    "annotation on token {idx} of a {}-token sentence",
                    tokens.len()
                )));
            }
        }
        Ok(Sentence { tokens, annotations })
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn annotations(&self) -> &BTreeMap<usize, Annotation> {
        &self.annotations
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub corpus_name: String,
    pub category: Option<String>,
    /// File or directory identity; the unit of document-disjoint folds.
    pub grouping_key: String,
    pub sentences: Vec<Sentence>,
}

impl Document {
    pub fn new(
        id: impl Into<String>,
        corpus_name: impl Into<String>,
        grouping_key: impl Into<String>,
        category: Option<String>,
    ) -> Result<Self> {
        let doc = Document {
            id: id.into(),
            corpus_name: corpus_name.into(),
            category,
            grouping_key: grouping_key.into(),
            sentences: Vec::new(),
        };
        for (key, value) in doc.header_fields() {
            if value.is_empty() || has_ws(value) {
                return Err(Error::InvalidValue(format!("bad header value {key}={value:?}")));
            }
        }
        Ok(doc)
    }

    fn header_fields(&self) -> Vec<(&'static str, &str)> {
        let mut fields = vec![
            ("id", self.id.as_str()),
            ("corpus", self.corpus_name.as_str()),
            ("group", self.grouping_key.as_str()),
        ];
        if let Some(cat) = &self.category {
            fields.push(("category", cat.as_str()));
        }
        fields
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Corpus {
    pub name: String,
    documents: Vec<Document>,
}

impl Corpus {
    pub fn new(name: impl Into<String>) -> Self {
        Corpus { name: name.into(), documents: Vec::new() }
    }

    pub fn from_documents(name: impl Into<String>, documents: Vec<Document>) -> Result<Self> {
        let mut corpus = Corpus::new(name);
        for doc in documents {
            corpus.push(doc)?;
        }
        Ok(corpus)
    }

    /// Appends a document, rejecting duplicate ids.
    pub fn push(&mut self, doc: Document) -> Result<()> {
        if self.documents.iter().any(|d| d.id == doc.id) {
            return Err(Error::DuplicateDocument { id: doc.id, line: None });
        }
        self.documents.push(doc);
        Ok(())
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn token_count(&self) -> usize {
        self.documents.iter().flat_map(|d| &d.sentences).map(Sentence::len).sum()
    }

    /// Sorted distinct grouping keys.
    pub fn grouping_keys(&self) -> Vec<&str> {
        let mut keys: Vec<&str> = self.documents.iter().map(|d| d.grouping_key.as_str()).collect();
        keys.sort_unstable();
        keys.dedup();
        keys
    }

    /// Sorted distinct target keys among the annotations.
    pub fn target_keys(&self) -> Vec<&str> {
        let mut keys: Vec<&str> = self
            .documents
            .iter()
            .flat_map(|d| &d.sentences)
            .flat_map(|s| s.annotations.values())
            .map(|a| a.target_key.as_str())
            .collect();
        keys.sort_unstable();
        keys.dedup();
        keys
    }

    /// Writes the canonical vertical form.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for doc in &self.documents {
            out.push_str("#DOC");
            for (key, value) in doc.header_fields() {
                out.push(' ');
                out.push_str(key);
                out.push('=');
                out.push_str(value);
            }
            out.push('\n');
            for sentence in &doc.sentences {
                for (i, tok) in sentence.tokens.iter().enumerate() {
                    out.push_str(&tok.form);
                    out.push('\t');
                    out.push_str(tok.pos.as_str());
                    if let Some(ann) = sentence.annotations.get(&i) {
                        out.push('\t');
                        out.push_str(&ann.target_key);
                        out.push('=');
                        out.push_str(&ann.sense);
                    }
                    out.push('\n');
                }
                out.push('\n');
            }
        }
        out
    }
}

fn has_ws(s: &str) -> bool {
    s.chars().any(char::is_whitespace)
}

fn is_header(line: &str) -> bool {
    line == "#DOC" || line.starts_with("#DOC ")
}

struct SentenceBuilder {
    tokens: Vec<Token>,
    annotations: BTreeMap<usize, Annotation>,
}

/// Parses a vertical-format corpus. `corpus_name` names the returned corpus;
/// each document keeps the `corpus=` value of its own header.
pub fn parse_corpus(text: &str, corpus_name: &str) -> Result<Corpus> {
    let mut corpus = Corpus::new(corpus_name);
    let mut seen_ids = HashSet::new();
    let mut current: Option<Document> = None;
    let mut sentence = SentenceBuilder { tokens: Vec::new(), annotations: BTreeMap::new() };

    fn flush(doc: &mut Option<Document>, sentence: &mut SentenceBuilder) {
        if sentence.tokens.is_empty() {
            return;
        }
        let tokens = std::mem::take(&mut sentence.tokens);
        let annotations = std::mem::take(&mut sentence.annotations);
        // indices were checked while reading
        if let Some(doc) = doc.as_mut() {
            doc.sentences.push(Sentence { tokens, annotations });
        }
    }

    for (idx, line) in text.split('\n').enumerate() {
        let line_no = idx + 1;
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.starts_with("##") {
            continue;
        }
        if line.trim().is_empty() {
            flush(&mut current, &mut sentence);
            continue;
        }
        if is_header(line) {
            flush(&mut current, &mut sentence);
            if let Some(doc) = current.take() {
                corpus.documents.push(doc);
            }
            let doc = parse_header(line, line_no)?;
            if !seen_ids.insert(doc.id.clone()) {
                return Err(Error::DuplicateDocument { id: doc.id, line: Some(line_no) });
            }
            current = Some(doc);
            continue;
        }
        if current.is_none() {
            return Err(Error::parse(line_no, "token line before any #DOC header"));
        }
        let mut cols = line.split('\t');
        let form = cols.next().unwrap_or_default();
        let pos = cols.next().ok_or_else(|| Error::parse(line_no, "token line needs <form>\\t<pos>"))?;
        let pos = PosTag::new(pos).map_err(|e| Error::parse(line_no, e.to_string()))?;
        let token = Token::new(form, pos).map_err(|e| Error::parse(line_no, e.to_string()))?;
        if let Some(ann) = cols.next() {
            let (key, sense) =
                ann.split_once('=').ok_or_else(|| Error::parse(line_no, "annotation must be <target_key>=<sense>"))?;
            let ann = Annotation::new(key, sense).map_err(|e| Error::parse(line_no, e.to_string()))?;
            sentence.annotations.insert(sentence.tokens.len(), ann);
        }
        if cols.next().is_some() {
            return Err(Error::parse(line_no, "too many columns"));
        }
        sentence.tokens.push(token);
    }
    flush(&mut current, &mut sentence);
    if let Some(doc) = current.take() {
        corpus.documents.push(doc);
    }
    Ok(corpus)
}

fn parse_header(line: &str, line_no: usize) -> Result<Document> {
    let mut id = None;
    let mut corpus = None;
    let mut group = None;
    let mut category = None;
    for field in line["#DOC".len()..].split(' ').filter(|f| !f.is_empty()) {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| Error::parse(line_no, format!("header field {field:?} is not key=value")))?;
        if value.is_empty() || value.contains('\t') {
            return Err(Error::parse(line_no, format!("empty or tabbed value for {key}")));
        }
        let slot = match key {
            "id" => &mut id,
            "corpus" => &mut corpus,
            "group" => &mut group,
            "category" => &mut category,
            other => return Err(Error::parse(line_no, format!("unknown header key {other:?}"))),
        };
        if slot.replace(value.to_string()).is_some() {
            return Err(Error::parse(line_no, format!("repeated header key {key:?}")));
        }
    }
    let missing = |k: &str| Error::parse(line_no, format!("header lacks {k}="));
    Ok(Document {
        id: id.ok_or_else(|| missing("id"))?,
        corpus_name: corpus.ok_or_else(|| missing("corpus"))?,
        grouping_key: group.ok_or_else(|| missing("group"))?,
        category,
        sentences: Vec::new(),
    })
}

/// One annotated occurrence of a target word, borrowed from its corpus.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Example<'c> {
    pub target_key: &'c str,
    pub sense: &'c str,
    pub doc_id: &'c str,
    pub grouping_key: &'c str,
    pub category: Option<&'c str>,
    pub sentence_index: usize,
    pub token_index: usize,
    pub context: &'c Sentence,
}

impl<'c> Example<'c> {
    pub fn target_form(&self) -> &'c str {
        &self.context.tokens[self.token_index].form
    }

    /// `doc:sentence:token`, unique within a corpus.
    pub fn id(&self) -> String {
        format!("{}:{}:{}", self.doc_id, self.sentence_index, self.token_index)
    }
}

/// All annotations matching `target_key` (or every annotation), in
/// document, sentence, token order.
pub fn extract_examples<'c>(corpus: &'c Corpus, target_key: Option<&str>) -> Vec<Example<'c>> {
    let mut out = Vec::new();
    for doc in &corpus.documents {
        for (si, sentence) in doc.sentences.iter().enumerate() {
            for (&ti, ann) in &sentence.annotations {
                if target_key.is_some_and(|k| k != ann.target_key) {
                    continue;
                }
                out.push(Example {
                    target_key: &ann.target_key,
                    sense: &ann.sense,
                    doc_id: &doc.id,
                    grouping_key: &doc.grouping_key,
                    category: doc.category.as_deref(),
                    sentence_index: si,
                    token_index: ti,
                    context: sentence,
                });
            }
        }
    }
    out
}
