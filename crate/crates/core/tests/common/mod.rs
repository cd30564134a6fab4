#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use lcnl::ast::{AbstractSignature, CategoryId, Tree};
use lcnl::pack::{load_pack, GrammarPack};
use lcnl::translate::ConfidenceSpan;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

pub const DEMO: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../packs/demo");

pub fn demo() -> &'static GrammarPack {
    static PACK: OnceLock<GrammarPack> = OnceLock::new();
    PACK.get_or_init(|| load_pack(DEMO).expect("demo pack loads"))
}

/// Functions whose analyses depend on the input rather than the grammar.
pub const GUESSERS: [&str; 5] = ["OovName", "GuessN", "GuessA", "OovUnknown", "ChunkUnknown"];

/// Random well-typed trees that avoid a set of functions.
pub struct TreeGen<'a> {
    sig: &'a AbstractSignature,
    excluded: BTreeSet<String>,
    min_depth: BTreeMap<CategoryId, usize>,
}

impl<'a> TreeGen<'a> {
    pub fn new(sig: &'a AbstractSignature, excluded: &[&str]) -> Self {
        let excluded: BTreeSet<String> = excluded.iter().map(|s| s.to_string()).collect();
        let mut min_depth: BTreeMap<CategoryId, usize> = BTreeMap::new();
        min_depth.insert(CategoryId::string(), 0);
        loop {
            let mut changed = false;
            for f in sig.functions().filter(|f| !excluded.contains(&f.name)) {
                let Some(d) = f.args.iter().map(|a| min_depth.get(a).copied()).try_fold(0, |m, d| d.map(|d| m.max(d)))
                else {
                    continue;
                };
                let d = d + 1;
                if min_depth.get(&f.result).is_none_or(|&old| d < old) {
                    min_depth.insert(f.result.clone(), d);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        TreeGen { sig, excluded, min_depth }
    }

    pub fn generate(&self, rng: &mut StdRng, cat: &CategoryId, depth: usize) -> Tree {
        if cat.is_string() {
            return Tree::lit(rng.gen_range(1..100).to_string());
        }
        let options: Vec<_> = self
            .sig
            .producers(cat)
            .filter(|f| !self.excluded.contains(&f.name))
            .filter(|f| f.args.iter().all(|a| self.min_depth.get(a).is_some_and(|&d| d < depth)))
            .collect();
        let f = options.choose(rng).expect("some producer fits the depth bound");
        let children = f.args.iter().map(|a| self.generate(rng, a, depth - 1)).collect();
        Tree::app(f.name.clone(), children)
    }
}

const WORDS_ENG: &[&str] = &[
    "John", "Mary", "is", "are", "am", "not", "does", "do", "believe", "believes", "that", "the", "this", "queen",
    "city", "year", "years", "old", "has", "have", "she", "we", "they", "you", "I", "one", "five", "sixty-five",
    "twenty", "65", "7",
];
const WORDS_FRA: &[&str] = &[
    "John", "Mary", "a", "ans", "an", "ne", "pas", "croit", "que", "la", "le", "cette", "reine", "ville", "vieux",
    "vieille", "est", "elle", "nous", "ils", "ait", "soixante-cinq", "cinq", "est-ce", "un",
];
const OOV: &[&str] = &["Kraslava", "blorks", "glimped", "famous", "zyx", "Quibble", "wonderful", "xylophones"];
const GARBAGE: &[&str] = &["@@@", "#", "%$", "42x", "~", "…", "¿", "--", "(", ")", "&"];

/// A random sequence of lexicon words, unknown words and symbols.
pub fn fuzz_tokens(rng: &mut StdRng, language: &str, len: usize) -> Vec<String> {
    let lexicon = if language == "fra" { WORDS_FRA } else { WORDS_ENG };
    (0..len)
        .map(|_| {
            let pool = match rng.gen_range(0..10) {
                0..=5 => lexicon,
                6..=7 => OOV,
                _ => GARBAGE,
            };
            pool.choose(rng).unwrap().to_string()
        })
        .collect()
}

/// Problems with `spans` as a partition of the non-space characters of `text`.
pub fn span_partition_problems(text: &str, spans: &[ConfidenceSpan]) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut problems = Vec::new();
    let mut owner = vec![0usize; chars.len()];
    let mut prev_end = 0;
    for (i, s) in spans.iter().enumerate() {
        if s.start >= s.end || s.end > chars.len() {
            problems.push(format!("bad span {s:?} for {} chars", chars.len()));
            continue;
        }
        if i > 0 && s.start < prev_end {
            problems.push(format!("span {s:?} overlaps or precedes the previous one"));
        }
        prev_end = s.end;
        for o in &mut owner[s.start..s.end] {
            *o += 1;
        }
    }
    for (i, c) in chars.iter().enumerate() {
        if !c.is_whitespace() && owner[i] != 1 {
            problems.push(format!("char {i} ({c:?}) covered {} times", owner[i]));
        }
    }
    // every whitespace-delimited token lies inside a single span
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        while i < chars.len() && !chars[i].is_whitespace() {
            i += 1;
        }
        let holders = spans.iter().filter(|s| s.start < i && start < s.end).count();
        if holders != 1 {
            problems.push(format!("token at {start}..{i} touches {holders} spans"));
        }
    }
    problems
}

/// Cycle check by repeatedly removing nodes without incoming edges.
pub fn has_cycle(edges: &[(String, String)]) -> bool {
    let mut nodes: BTreeSet<&str> = BTreeSet::new();
    for (a, b) in edges {
        nodes.insert(a);
        nodes.insert(b);
    }
    let mut live: Vec<(&str, &str)> = edges.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    loop {
        let sources: Vec<&str> = nodes.iter().copied().filter(|n| !live.iter().any(|(_, b)| b == n)).collect();
        if sources.is_empty() {
            return !nodes.is_empty();
        }
        for s in sources {
            nodes.remove(s);
            live.retain(|(a, _)| *a != s);
        }
    }
}

pub mod random_grammar;

use lcnl::ast::serialize_tree;
use lcnl::pmcfg::{compile, parse, ParseError};

/// Compares the parser with exhaustive enumeration on one random grammar and
/// a handful of inputs. Returns a description of the first mismatch.
pub fn oracle_case(seed: u64, k: usize) -> Result<usize, String> {
    use rand::SeedableRng;
    let mut rng = StdRng::seed_from_u64(seed);
    let g = random_grammar::random_grammar(&mut rng, 8);
    let pg = compile(&g.sig, &g.conc).map_err(|e| format!("seed {seed}: {e}"))?;
    let mut inputs: Vec<Vec<String>> = Vec::new();
    let small = random_grammar::trees_up_to(&g.sig, "A", 5);
    for t in small.choose_multiple(&mut rng, 4) {
        let y = random_grammar::yield_of(&g, t);
        if y.len() <= 5 {
            inputs.push(y);
        }
    }
    for _ in 0..3 {
        let len = rng.gen_range(1..=5);
        inputs.push((0..len).map(|_| ["a", "b"].choose(&mut rng).unwrap().to_string()).collect());
    }
    let mut compared = 0;
    for input in inputs {
        let mut expected = random_grammar::brute_force(&g, &input);
        expected.truncate(k);
        let got = match parse(&pg, &input, k) {
            Ok(r) => r.trees.iter().map(|t| (serialize_tree(&t.tree), t.cost)).collect(),
            Err(ParseError::NoParse) => Vec::new(),
            Err(e) => return Err(format!("seed {seed}: {e}")),
        };
        if got != expected {
            return Err(format!(
                "seed {seed}, input {input:?}\n{}\n{}\nparser: {got:?}\noracle: {expected:?}",
                g.abstract_src, g.concrete_src
            ));
        }
        compared += 1;
    }
    Ok(compared)
}
