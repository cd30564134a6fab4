//! Demand-driven chart parsing with lazy k-best extraction.
//!
//! A goal asks for a nonterminal whose listed string components cover given
//! input ranges. Goals are expanded top-down and memoized, which yields an
//! acyclic hypergraph; derivations are then enumerated best-first per goal,
//! ordered by cost and, on ties, by canonical tree text.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::rc::Rc;

use thiserror::Error;

use crate::ast::{serialize_tree, CategoryId, Cost, Tree};

use super::{ArgSlot, Item, LiteralSpec, NtId, PProduction, ParsingGrammar};

#[derive(Clone, Debug)]
pub struct ParseOptions {
    /// Number of analyses to return.
    pub k: usize,
    /// Functions that may not appear in any analysis.
    pub blocked: HashSet<String>,
    /// Whether out-of-vocabulary guessers may fire.
    pub oov: bool,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            k: 5,
            blocked: HashSet::new(),
            oov: true,
        }
    }
}

impl ParseOptions {
    pub fn with_k(k: usize) -> Self {
        ParseOptions {
            k,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedTree {
    pub tree: Tree,
    pub cost: Cost,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ChartStats {
    /// Distinct satisfiable goals.
    pub goals: usize,
    /// Production applications linking goals.
    pub edges: usize,
    /// Distinct input ranges demanded of some goal.
    pub spans: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseResult {
    /// Ordered by cost, then by canonical tree text.
    pub trees: Vec<ParsedTree>,
    pub stats: ChartStats,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("no analysis covers the input")]
    NoParse,
    #[error("k must be at least 1")]
    InvalidK,
    #[error("unknown category `{0}`")]
    UnknownCategory(String),
    #[error("category `{0}` has no field `s : Str`")]
    NoStartField(String),
}

/// Parses `tokens` as the grammar's start category.
pub fn parse<T: AsRef<str>>(pg: &ParsingGrammar, tokens: &[T], k: usize) -> Result<ParseResult, ParseError> {
    parse_with(pg, tokens, pg.start(), &ParseOptions::with_k(k))
}

pub fn parse_with<T: AsRef<str>>(
    pg: &ParsingGrammar,
    tokens: &[T],
    category: &CategoryId,
    opts: &ParseOptions,
) -> Result<ParseResult, ParseError> {
    if opts.k == 0 {
        return Err(ParseError::InvalidK);
    }
    if !pg.has_category(category) {
        return Err(ParseError::UnknownCategory(category.to_string()));
    }
    let nts = pg.nonterminals_of(category);
    let labels = pg.component_labels(category);
    let Some(s) = labels.iter().position(|l| l == "s") else {
        return Err(ParseError::NoStartField(category.to_string()));
    };

    let tokens: Vec<&str> = tokens.iter().map(AsRef::as_ref).collect();
    let mut chart = Chart::new(pg, &tokens, opts);
    let whole = Demand {
        comp: s as u32,
        start: 0,
        end: tokens.len() as u32,
    };
    let mut roots = Vec::new();
    for &nt in nts {
        let key = GoalKey {
            nt,
            demands: vec![whole],
        };
        if let Some(g) = chart.expand(&key, 0).0 {
            roots.push(Edge {
                prod: ROOT,
                children: vec![Child::Goal(g)],
            });
        }
    }
    let stats = chart.stats();
    if roots.is_empty() {
        return Err(ParseError::NoParse);
    }
    chart.nodes.push(Node { edges: roots });
    let root = chart.nodes.len() - 1;

    let mut kb = KBest::new(&chart);
    let mut trees = Vec::new();
    for i in 0..opts.k {
        let Some(d) = kb.get(root, i) else { break };
        trees.push(ParsedTree {
            tree: (*d.tree).clone(),
            cost: d.cost,
        });
    }
    Ok(ParseResult { trees, stats })
}

const ROOT: usize = usize::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Demand {
    comp: u32,
    start: u32,
    end: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct GoalKey {
    nt: NtId,
    demands: Vec<Demand>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Child {
    Goal(usize),
    Lit(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Edge {
    prod: usize,
    children: Vec<Child>,
}

struct Node {
    edges: Vec<Edge>,
}

#[derive(Clone)]
struct Binding {
    nts: Vec<Vec<Demand>>,
    lits: Vec<Option<usize>>,
}

/// Depth recorded for goals that never touched an in-progress ancestor.
const CLEAN: usize = usize::MAX;

struct Chart<'a> {
    pg: &'a ParsingGrammar,
    tokens: &'a [&'a str],
    blocked: HashSet<usize>,
    oov: Vec<Vec<String>>,
    memo: HashMap<GoalKey, Option<usize>>,
    in_progress: HashMap<GoalKey, usize>,
    nodes: Vec<Node>,
    spans: HashSet<(u32, u32)>,
}

impl<'a> Chart<'a> {
    fn new(pg: &'a ParsingGrammar, tokens: &'a [&'a str], opts: &ParseOptions) -> Self {
        let blocked = pg
            .productions()
            .iter()
            .enumerate()
            .filter(|(_, p)| opts.blocked.contains(&p.fun))
            .map(|(i, _)| i)
            .collect();
        let oov = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| {
                if !opts.oov {
                    return Vec::new();
                }
                pg.guesser()
                    .hypotheses(t, i == 0, pg.in_vocabulary(t))
                    .into_iter()
                    .map(|h| h.fun)
                    .collect()
            })
            .collect();
        Chart {
            pg,
            tokens,
            blocked,
            oov,
            memo: HashMap::new(),
            in_progress: HashMap::new(),
            nodes: Vec::new(),
            spans: HashSet::new(),
        }
    }

    fn stats(&self) -> ChartStats {
        ChartStats {
            goals: self.nodes.len(),
            edges: self.nodes.iter().map(|n| n.edges.len()).sum(),
            spans: self.spans.len(),
        }
    }

    /// Returns the node for `key`, if satisfiable, and the depth of the
    /// shallowest in-progress goal the expansion ran into.
    fn expand(&mut self, key: &GoalKey, depth: usize) -> (Option<usize>, usize) {
        if let Some(&id) = self.memo.get(key) {
            return (id, CLEAN);
        }
        if let Some(&d) = self.in_progress.get(key) {
            // a goal may not be nested inside itself
            return (None, d);
        }
        for d in &key.demands {
            self.spans.insert((d.start, d.end));
        }
        self.in_progress.insert(key.clone(), depth);
        let mut taint = CLEAN;
        let mut edges = Vec::new();
        let mut seen = HashSet::new();
        let pg = self.pg;
        for &pi in pg.production_ids(key.nt) {
            let prod = &pg.productions()[pi];
            if self.blocked.contains(&pi) {
                continue;
            }
            for binding in self.match_production(prod, &key.demands) {
                let mut children = Vec::with_capacity(prod.rhs.len());
                let mut ok = true;
                for (j, slot) in prod.rhs.iter().enumerate() {
                    let child = match slot {
                        ArgSlot::Nt(n) => {
                            let mut demands = binding.nts[j].clone();
                            demands.sort();
                            demands.dedup();
                            let (id, t) = self.expand(&GoalKey { nt: *n, demands }, depth + 1);
                            taint = taint.min(t);
                            id.map(Child::Goal)
                        }
                        ArgSlot::Literal(LiteralSpec::Fixed(text)) => Some(Child::Lit(text.clone())),
                        ArgSlot::Literal(_) => binding.lits[j].map(|p| Child::Lit(self.tokens[p].to_string())),
                    };
                    match child {
                        Some(c) => children.push(c),
                        None => {
                            ok = false;
                            break;
                        }
                    }
                }
                if ok {
                    let edge = Edge { prod: pi, children };
                    if seen.insert(edge.clone()) {
                        edges.push(edge);
                    }
                }
            }
        }
        self.in_progress.remove(key);
        let id = if edges.is_empty() {
            None
        } else {
            self.nodes.push(Node { edges });
            Some(self.nodes.len() - 1)
        };
        if taint >= depth {
            self.memo.insert(key.clone(), id);
            (id, CLEAN)
        } else {
            (id, taint)
        }
    }

    fn match_production(&self, prod: &PProduction, demands: &[Demand]) -> Vec<Binding> {
        let mut out = Vec::new();
        let mut binding = Binding {
            nts: vec![Vec::new(); prod.rhs.len()],
            lits: vec![None; prod.rhs.len()],
        };
        if demands.is_empty() {
            out.push(binding);
            return out;
        }
        let suffix: Vec<Vec<usize>> = demands
            .iter()
            .map(|d| {
                let items = &prod.components[d.comp as usize];
                let mut s = vec![0; items.len() + 1];
                for i in (0..items.len()).rev() {
                    s[i] = (s[i + 1] + self.item_min(prod, &items[i])).min(usize::MAX / 4);
                }
                s
            })
            .collect();
        if demands
            .iter()
            .zip(&suffix)
            .any(|(d, s)| s[0] > (d.end - d.start) as usize)
        {
            return out;
        }
        self.match_rec(prod, demands, &suffix, 0, 0, demands[0].start as usize, &mut binding, &mut out);
        out
    }

    fn item_min(&self, prod: &PProduction, item: &Item) -> usize {
        match item {
            Item::Lit(_) => 1,
            Item::Arg(j, c) => match &prod.rhs[*j] {
                ArgSlot::Nt(n) => self.pg.min_len(*n, *c),
                ArgSlot::Literal(_) => 1,
            },
        }
    }

    fn literal_ok(&self, spec: &LiteralSpec, pos: usize) -> bool {
        let tok = self.tokens[pos];
        match spec {
            LiteralSpec::Fixed(_) => false,
            LiteralSpec::Digits { excluded } => {
                !tok.is_empty() && tok.bytes().all(|b| b.is_ascii_digit()) && !excluded.iter().any(|e| e == tok)
            }
            LiteralSpec::Oov(fun) => self.oov[pos].iter().any(|f| f == fun),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn match_rec(
        &self,
        prod: &PProduction,
        demands: &[Demand],
        suffix: &[Vec<usize>],
        d: usize,
        i: usize,
        pos: usize,
        b: &mut Binding,
        out: &mut Vec<Binding>,
    ) {
        let dm = demands[d];
        let end = dm.end as usize;
        let items = &prod.components[dm.comp as usize];
        if i == items.len() {
            if pos == end {
                if d + 1 == demands.len() {
                    out.push(b.clone());
                } else {
                    let next = demands[d + 1].start as usize;
                    self.match_rec(prod, demands, suffix, d + 1, 0, next, b, out);
                }
            }
            return;
        }
        let rest = suffix[d][i + 1];
        match &items[i] {
            Item::Lit(t) => {
                if pos < end && self.tokens[pos] == t {
                    self.match_rec(prod, demands, suffix, d, i + 1, pos + 1, b, out);
                }
            }
            Item::Arg(j, c) => match &prod.rhs[*j] {
                ArgSlot::Literal(spec) => {
                    if pos + 1 + rest > end || !self.literal_ok(spec, pos) {
                        return;
                    }
                    let prev = b.lits[*j];
                    if let Some(p) = prev {
                        if self.tokens[p] != self.tokens[pos] {
                            return;
                        }
                    } else {
                        b.lits[*j] = Some(pos);
                    }
                    self.match_rec(prod, demands, suffix, d, i + 1, pos + 1, b, out);
                    b.lits[*j] = prev;
                }
                ArgSlot::Nt(n) => {
                    let c32 = *c as u32;
                    let earlier = b.nts[*j].iter().find(|x| x.comp == c32).copied();
                    let (lo, hi) = match earlier {
                        // the same component must yield the same tokens everywhere
                        Some(e) => {
                            let len = (e.end - e.start) as usize;
                            let stop = pos + len;
                            if stop + rest > end
                                || self.tokens[e.start as usize..e.end as usize] != self.tokens[pos..stop]
                            {
                                return;
                            }
                            (stop, stop)
                        }
                        None => {
                            let min = self.pg.min_len(*n, *c);
                            if pos + min + rest > end {
                                return;
                            }
                            (pos + min, end - rest)
                        }
                    };
                    for stop in lo..=hi {
                        b.nts[*j].push(Demand {
                            comp: c32,
                            start: pos as u32,
                            end: stop as u32,
                        });
                        self.match_rec(prod, demands, suffix, d, i + 1, stop, b, out);
                        b.nts[*j].pop();
                    }
                }
            },
        }
    }
}

#[derive(Clone)]
struct Deriv {
    cost: Cost,
    ser: Rc<str>,
    tree: Rc<Tree>,
}

#[derive(PartialEq, Eq, PartialOrd, Ord)]
struct Cand {
    cost: Cost,
    ser: Rc<str>,
    edge: usize,
    ranks: Vec<usize>,
    tree: Rc<Tree>,
}

struct KBest<'c> {
    chart: &'c Chart<'c>,
    derivs: Vec<Vec<Deriv>>,
    heaps: Vec<BinaryHeap<Reverse<Cand>>>,
    seen: Vec<HashSet<(usize, Vec<usize>)>>,
    trees: Vec<HashSet<Rc<str>>>,
    started: Vec<bool>,
}

impl<'c> KBest<'c> {
    fn new(chart: &'c Chart<'c>) -> Self {
        let n = chart.nodes.len();
        KBest {
            chart,
            derivs: vec![Vec::new(); n],
            heaps: (0..n).map(|_| BinaryHeap::new()).collect(),
            seen: vec![HashSet::new(); n],
            trees: vec![HashSet::new(); n],
            started: vec![false; n],
        }
    }

    fn get(&mut self, g: usize, i: usize) -> Option<Deriv> {
        if !self.started[g] {
            self.started[g] = true;
            for e in 0..self.chart.nodes[g].edges.len() {
                let ranks = vec![0; self.chart.nodes[g].edges[e].children.len()];
                self.seen[g].insert((e, ranks.clone()));
                if let Some(c) = self.candidate(g, e, ranks) {
                    self.heaps[g].push(Reverse(c));
                }
            }
        }
        while self.derivs[g].len() <= i {
            let Reverse(c) = self.heaps[g].pop()?;
            let children = &self.chart.nodes[g].edges[c.edge].children;
            for p in 0..children.len() {
                if !matches!(children[p], Child::Goal(_)) {
                    continue;
                }
                let mut next = c.ranks.clone();
                next[p] += 1;
                if self.seen[g].insert((c.edge, next.clone())) {
                    if let Some(nc) = self.candidate(g, c.edge, next) {
                        self.heaps[g].push(Reverse(nc));
                    }
                }
            }
            if self.trees[g].insert(c.ser.clone()) {
                self.derivs[g].push(Deriv {
                    cost: c.cost,
                    ser: c.ser,
                    tree: c.tree,
                });
            }
        }
        Some(self.derivs[g][i].clone())
    }

    fn candidate(&mut self, g: usize, e: usize, ranks: Vec<usize>) -> Option<Cand> {
        let chart = self.chart;
        let edge = &chart.nodes[g].edges[e];
        if edge.prod == ROOT {
            let Child::Goal(c) = edge.children[0] else { return None };
            let d = self.get(c, ranks[0])?;
            return Some(Cand {
                cost: d.cost,
                ser: d.ser,
                edge: e,
                ranks,
                tree: d.tree,
            });
        }
        let prod = &chart.pg.productions()[edge.prod];
        let mut cost = prod.cost;
        let mut children = Vec::with_capacity(edge.children.len());
        for (child, &r) in edge.children.iter().zip(&ranks) {
            match child {
                Child::Goal(c) => {
                    let d = self.get(*c, r)?;
                    cost = cost + d.cost;
                    children.push((*d.tree).clone());
                }
                Child::Lit(s) => children.push(Tree::Lit(s.clone())),
            }
        }
        let tree = Tree::App {
            fun: prod.fun.clone(),
            children,
        };
        Some(Cand {
            cost,
            ser: serialize_tree(&tree).into(),
            edge: e,
            ranks,
            tree: Rc::new(tree),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::{parse_abstract, parse_concrete};
    use crate::pmcfg::compile;

    fn grammar(abs: &str, conc: &str) -> ParsingGrammar {
        let sig = parse_abstract(abs).unwrap();
        let conc = parse_concrete(conc, &sig).unwrap();
        compile(&sig, &conc).unwrap()
    }

    const AGREE_ABS: &str = r#"abstract A {
        flags startcat = S ;
        cat S ; NP ;
        fun pred : NP -> S ;
        fun they, she : NP [cost=0.5] ;
    }"#;

    const AGREE: &str = r#"concrete AE of A {
        param Number = Sg | Pl ;
        lincat S = { s : Str } ;
        lincat NP = { s : Str ; n : Number } ;
        lin pred np = { s = np.s ++ table { Sg => "sleeps" ; Pl => "sleep" } ! np.n } ;
        lin they = { s = "they" ; n = Pl } ;
        lin she = { s = "she" ; n = Sg } ;
    }"#;

    #[test]
    fn agreement_is_enforced() {
        let pg = grammar(AGREE_ABS, AGREE);
        let r = parse(&pg, &["she", "sleeps"], 5).unwrap();
        assert_eq!(r.trees.len(), 1);
        assert_eq!(r.trees[0].tree.to_string(), "(pred she)");
        assert_eq!(r.trees[0].cost.as_f64(), 1.5);
        assert_eq!(parse(&pg, &["she", "sleep"], 5), Err(ParseError::NoParse));
    }

    #[test]
    fn discontinuous_components() {
        let abs = r#"abstract Q {
            flags startcat = S ;
            cat S ; Cl ;
            fun decl, quest : Cl -> S ;
            fun old : Cl ;
        }"#;
        let conc = r#"concrete QE of Q {
            lincat S = { s : Str } ;
            lincat Cl = { subj : Str ; verb : Str ; rest : Str } ;
            lin decl c = { s = c.subj ++ c.verb ++ c.rest } ;
            lin quest c = { s = c.verb ++ c.subj ++ c.rest } ;
            lin old = { subj = "John" ; verb = "is" ; rest = "old" } ;
        }"#;
        let pg = grammar(abs, conc);
        let r = parse(&pg, &["is", "John", "old"], 5).unwrap();
        assert_eq!(r.trees[0].tree.to_string(), "(quest old)");
    }

    #[test]
    fn ambiguity_ranked_by_cost_then_text() {
        let abs = r#"abstract X {
            flags startcat = S ;
            cat S ; A ;
            fun s1 : A -> S ;
            fun s2 : A -> S ;
            fun a : A [cost=0] ;
            fun b : A [cost=2] ;
        }"#;
        let conc = r#"concrete XE of X {
            lincat S, A = { s : Str } ;
            lin s1 x = { s = x.s } ;
            lin s2 x = { s = x.s } ;
            lin a = { s = "w" } ;
            lin b = { s = "w" } ;
        }"#;
        let pg = grammar(abs, conc);
        let r = parse(&pg, &["w"], 10).unwrap();
        let got: Vec<String> = r.trees.iter().map(|t| t.tree.to_string()).collect();
        assert_eq!(got, ["(s1 a)", "(s2 a)", "(s1 b)", "(s2 b)"]);
        let r = parse(&pg, &["w"], 1).unwrap();
        assert_eq!(r.trees.len(), 1);
        assert_eq!(r.stats.goals, 2);
    }

    #[test]
    fn literal_arguments() {
        let abs = r#"abstract N {
            flags startcat = S ;
            cat S ; Numeral ;
            fun count : Numeral -> S ;
            fun mkNumeral : String -> Numeral ;
        }"#;
        let conc = r#"concrete NE of N {
            lincat S, Numeral = { s : Str } ;
            lin count n = { s = n.s ++ "years" } ;
            lin mkNumeral d = case d of { "5" => { s = "five" } ; _ => { s = d.s } } ;
        }"#;
        let pg = grammar(abs, conc);
        let r = parse(&pg, &["five", "years"], 5).unwrap();
        assert_eq!(r.trees[0].tree.to_string(), r#"(count (mkNumeral "5"))"#);
        let r = parse(&pg, &["70", "years"], 5).unwrap();
        assert_eq!(r.trees[0].tree.to_string(), r#"(count (mkNumeral "70"))"#);
        // "5" has its own spelling, so the digits do not parse
        assert_eq!(parse(&pg, &["5", "years"], 5), Err(ParseError::NoParse));
    }

    #[test]
    fn blocked_functions() {
        let pg = grammar(AGREE_ABS, AGREE);
        let opts = ParseOptions {
            blocked: ["she".to_string()].into(),
            ..Default::default()
        };
        assert_eq!(
            parse_with(&pg, &["she", "sleeps"], pg.start(), &opts),
            Err(ParseError::NoParse)
        );
        assert_eq!(parse(&pg, &["she"], 0), Err(ParseError::InvalidK));
    }
}
