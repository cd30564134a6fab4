//! Translation through the layered grammar: tokenize, parse the source,
//! linearize the best tree in the target, and annotate both sides with the
//! confidence layer of every token.

use std::ops::Range;

use serde::Serialize;
use thiserror::Error;

use crate::ast::{check_tree, serialize_tree, Cost, LayerTag, Tree, TreePath, TypeErrorReport};
use crate::embedding::{Generated, LayeredGrammar, OOV_UNKNOWN, USE_CHUNKS};
use crate::linearize::{detokenize, linearize, LinearizeError, ProvToken};
use crate::pmcfg::{parse_with, tokenize_with_offsets, ChartStats, CompileError, ParseError, ParseOptions, ParsedTree};

/// Inputs longer than this many characters are rejected.
pub const MAX_INPUT_CHARS: usize = 10_000;

/// Confidence of a stretch of output.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Layer {
    Semantic,
    Syntactic,
    Word,
    Unknown,
}

impl Layer {
    pub fn name(self) -> &'static str {
        match self {
            Layer::Semantic => "SEMANTIC",
            Layer::Syntactic => "SYNTACTIC",
            Layer::Word => "WORD",
            Layer::Unknown => "UNKNOWN",
        }
    }
}

/// A character range of a text with one layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ConfidenceSpan {
    pub start: usize,
    pub end: usize,
    pub layer: Layer,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Alternative {
    pub target: String,
    pub cost: Cost,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tree: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TranslationResult {
    pub source: String,
    pub target: String,
    pub tree: String,
    pub cost: Cost,
    pub spans: Vec<ConfidenceSpan>,
    pub source_spans: Vec<ConfidenceSpan>,
    pub chunk_boundaries: Vec<[usize; 2]>,
    pub alternatives: Vec<Alternative>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SourceAnnotation {
    pub spans: Vec<ConfidenceSpan>,
    pub chunk_boundaries: Vec<[usize; 2]>,
}

#[derive(Clone, Debug)]
pub struct TranslateOptions {
    pub k: usize,
    /// When false, chunk analyses are not allowed and unparsable input fails.
    pub chunks: bool,
    /// Include the tree of every alternative.
    pub full_trees: bool,
}

impl Default for TranslateOptions {
    fn default() -> Self {
        TranslateOptions {
            k: 5,
            chunks: true,
            full_trees: false,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TranslateError {
    #[error("unknown language `{0}`")]
    UnknownLanguage(String),
    #[error("empty input")]
    EmptyInput,
    #[error("input is longer than {MAX_INPUT_CHARS} characters")]
    InputTooLong,
    #[error("no analysis covers the input")]
    NoParse,
    #[error(transparent)]
    Parse(ParseError),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Linearize(#[from] LinearizeError),
    #[error("ill-typed tree: {0}")]
    Type(#[from] TypeErrorReport),
}

impl From<ParseError> for TranslateError {
    fn from(e: ParseError) -> Self {
        match e {
            ParseError::NoParse => TranslateError::NoParse,
            e => TranslateError::Parse(e),
        }
    }
}

/// Ranked analyses of one input.
#[derive(Clone, Debug)]
pub struct Analysis {
    /// Tokens with their character ranges in the input.
    pub tokens: Vec<(String, Range<usize>)>,
    /// How many trailing tokens are sentence punctuation left out of parsing.
    pub trailing: usize,
    pub trees: Vec<ParsedTree>,
    pub stats: ChartStats,
}

fn is_final_punctuation(t: &str) -> bool {
    matches!(t, "." | "?" | "!")
}

/// Tokenizes and parses `text` as the layered start category.
pub fn analyze(lg: &LayeredGrammar, language: &str, text: &str, opts: &TranslateOptions) -> Result<Analysis, TranslateError> {
    if text.chars().count() > MAX_INPUT_CHARS {
        return Err(TranslateError::InputTooLong);
    }
    let pg = lg
        .parsing_grammar(language)
        .ok_or_else(|| TranslateError::UnknownLanguage(language.to_string()))??;
    let tokens = tokenize_with_offsets(text);
    if tokens.is_empty() {
        return Err(TranslateError::EmptyInput);
    }
    let mut body = tokens.len();
    while body > 1 && is_final_punctuation(&tokens[body - 1].0) {
        body -= 1;
    }
    let words: Vec<&str> = tokens[..body].iter().map(|(t, _)| t.as_str()).collect();
    let mut popts = ParseOptions::with_k(opts.k);
    if !opts.chunks {
        popts.blocked.insert(USE_CHUNKS.to_string());
    }
    let result = parse_with(&pg, &words, lg.signature().start(), &popts)?;
    Ok(Analysis {
        trailing: tokens.len() - body,
        tokens,
        trees: result.trees,
        stats: result.stats,
    })
}

/// Layer of a token emitted at `path`: the tag of the nearest non-neutral
/// node on the way to the root. Host material inside a word-level chunk
/// counts as a word, and literal leaves are words unless they were read as
/// unknown tokens.
pub fn token_layer(lg: &LayeredGrammar, tree: &Tree, path: &TreePath) -> Layer {
    let mut nodes = Vec::with_capacity(path.0.len() + 1);
    let mut t = tree;
    nodes.push(t);
    for &i in &path.0 {
        match t.children().get(i) {
            Some(c) => {
                t = c;
                nodes.push(t);
            }
            None => break,
        }
    }
    if let Some(Tree::Lit(_)) = nodes.last() {
        let parent = nodes.len().checked_sub(2).and_then(|i| nodes[i].fun());
        return if parent == Some(OOV_UNKNOWN) { Layer::Unknown } else { Layer::Word };
    }
    let tag_of = |n: &Tree| {
        n.fun()
            .and_then(|f| lg.signature().function(f))
            .map_or(LayerTag::Neutral, |d| d.layer)
    };
    let nearest = nodes.iter().rev().map(|n| tag_of(n)).find(|t| *t != LayerTag::Neutral);
    match nearest {
        Some(LayerTag::Semantic) => Layer::Semantic,
        Some(LayerTag::Syntactic) => {
            let in_word_chunk = nodes.iter().any(|n| {
                n.fun().is_some_and(|f| lg.generated(f) == Some(Generated::Chunk)) && tag_of(n) == LayerTag::Word
            });
            if in_word_chunk {
                Layer::Word
            } else {
                Layer::Syntactic
            }
        }
        Some(LayerTag::Word) | Some(LayerTag::Neutral) | None => Layer::Word,
    }
}

/// Merges adjacent tokens with equal layers into spans.
pub fn merge_spans(ranges: &[Range<usize>], layers: &[Layer]) -> Vec<ConfidenceSpan> {
    let mut out: Vec<ConfidenceSpan> = Vec::new();
    for (r, &layer) in ranges.iter().zip(layers) {
        match out.last_mut() {
            Some(last) if last.layer == layer => last.end = r.end,
            _ => out.push(ConfidenceSpan {
                start: r.start,
                end: r.end,
                layer,
            }),
        }
    }
    out
}

fn lin_tokens(lg: &LayeredGrammar, tree: &Tree, language: &str) -> Result<Vec<ProvToken>, TranslateError> {
    let conc = lg
        .concrete(language)
        .ok_or_else(|| TranslateError::UnknownLanguage(language.to_string()))?;
    let typed = check_tree(tree, lg.signature())?;
    Ok(linearize(&typed, conc)?)
}

fn chunk_roots(lg: &LayeredGrammar, tree: &Tree, path: TreePath, out: &mut Vec<TreePath>) {
    if tree.fun().is_some_and(|f| lg.is_chunk_function(f)) {
        out.push(path);
        return;
    }
    for (i, c) in tree.children().iter().enumerate() {
        chunk_roots(lg, c, path.child(i), out);
    }
}

/// Source-side layers and chunk boundaries for the best analysis.
fn annotate(lg: &LayeredGrammar, language: &str, analysis: &Analysis, tree: &Tree) -> Result<SourceAnnotation, TranslateError> {
    let toks = lin_tokens(lg, tree, language)?;
    let body = analysis.tokens.len() - analysis.trailing;
    let ranges: Vec<Range<usize>> = analysis.tokens.iter().map(|(_, r)| r.clone()).collect();
    let aligned = toks.len() == body && toks.iter().zip(&analysis.tokens).all(|(p, (t, _))| p.token == *t);
    let mut layers: Vec<Layer> = if aligned {
        toks.iter().map(|t| token_layer(lg, tree, &t.path)).collect()
    } else {
        vec![Layer::Word; body]
    };
    let last = layers.last().copied().unwrap_or(Layer::Word);
    layers.extend(std::iter::repeat_n(last, analysis.trailing));

    let mut roots = Vec::new();
    chunk_roots(lg, tree, TreePath::root(), &mut roots);
    let mut chunk_boundaries = Vec::new();
    if aligned {
        for root in roots {
            let idx: Vec<usize> = (0..toks.len()).filter(|&i| toks[i].path.starts_with(&root)).collect();
            if let (Some(&a), Some(&b)) = (idx.first(), idx.last()) {
                chunk_boundaries.push([ranges[a].start, ranges[b].end]);
            }
        }
        chunk_boundaries.sort();
    }
    Ok(SourceAnnotation {
        spans: merge_spans(&ranges, &layers),
        chunk_boundaries,
    })
}

/// Source-side confidence spans and chunk boundaries of `text`.
pub fn annotate_source(lg: &LayeredGrammar, text: &str, src: &str) -> Result<SourceAnnotation, TranslateError> {
    let opts = TranslateOptions {
        k: 1,
        ..Default::default()
    };
    let analysis = analyze(lg, src, text, &opts)?;
    let best = &analysis.trees[0];
    annotate(lg, src, &analysis, &best.tree)
}

/// Target text and spans for one tree, with trailing punctuation appended.
fn render(lg: &LayeredGrammar, tree: &Tree, tgt: &str, trailing: &[&str]) -> Result<(String, Vec<ConfidenceSpan>), TranslateError> {
    let toks = lin_tokens(lg, tree, tgt)?;
    let mut layers: Vec<Layer> = toks.iter().map(|t| token_layer(lg, tree, &t.path)).collect();
    let mut words: Vec<&str> = toks.iter().map(|t| t.token.as_str()).collect();
    let last = layers.last().copied().unwrap_or(Layer::Word);
    for p in trailing {
        words.push(p);
        layers.push(last);
    }
    let d = detokenize(&words);
    Ok((d.text.clone(), merge_spans(&d.spans, &layers)))
}

pub fn translate(lg: &LayeredGrammar, text: &str, src: &str, tgt: &str, k: usize) -> Result<TranslationResult, TranslateError> {
    translate_with(
        lg,
        text,
        src,
        tgt,
        &TranslateOptions {
            k,
            ..Default::default()
        },
    )
}

pub fn translate_with(
    lg: &LayeredGrammar,
    text: &str,
    src: &str,
    tgt: &str,
    opts: &TranslateOptions,
) -> Result<TranslationResult, TranslateError> {
    if lg.concrete(tgt).is_none() {
        return Err(TranslateError::UnknownLanguage(tgt.to_string()));
    }
    let analysis = analyze(lg, src, text, opts)?;
    let trailing: Vec<&str> = analysis.tokens[analysis.tokens.len() - analysis.trailing..]
        .iter()
        .map(|(t, _)| t.as_str())
        .collect();
    let best = &analysis.trees[0];
    let (target, spans) = render(lg, &best.tree, tgt, &trailing)?;
    let source_side = annotate(lg, src, &analysis, &best.tree)?;
    let mut alternatives = Vec::new();
    for alt in &analysis.trees[1..] {
        let (text, _) = render(lg, &alt.tree, tgt, &trailing)?;
        alternatives.push(Alternative {
            target: text,
            cost: alt.cost,
            tree: opts.full_trees.then(|| serialize_tree(&alt.tree)),
        });
    }
    Ok(TranslationResult {
        source: text.to_string(),
        target,
        tree: serialize_tree(&best.tree),
        cost: best.cost,
        spans,
        source_spans: source_side.spans,
        chunk_boundaries: source_side.chunk_boundaries,
        alternatives,
    })
}
