//! Composition of a controlled-language grammar and a host grammar into one
//! layered grammar.
//!
//! The layered grammar has a fresh start category `S` with three ways in:
//! `UseCNL` (the controlled language), `UseHost` (the host grammar) and
//! `UseChunks`, a sequence of chunks that covers any input. Costs are set so
//! that a controlled-language analysis beats a host analysis, which beats
//! any chunk analysis.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::{AbstractSignature, CategoryId, Cost, FunDecl, LayerTag, SignatureBuilder, SignatureError};
use crate::grammar::{ConcreteGrammar, LinExpr, LinRule, LinType, ValidationReport};
use crate::pmcfg::{compile_with, CompileError, CompileOptions, OovConfig, ParsingGrammar};

pub const START: &str = "S";
pub const CHUNK: &str = "Chunk";
pub const LIST_CHUNK: &str = "ListChunk";
pub const UNKNOWN: &str = "Unknown";
pub const USE_CNL: &str = "UseCNL";
pub const USE_HOST: &str = "UseHost";
pub const USE_CHUNKS: &str = "UseChunks";
pub const CHUNK_CNL: &str = "ChunkCNL";
pub const ONE_CHUNK: &str = "OneChunk";
pub const CONS_CHUNK: &str = "ConsChunk";
pub const OOV_UNKNOWN: &str = "OovUnknown";
pub const CHUNK_UNKNOWN: &str = "ChunkUnknown";

/// Weights of the generated functions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct CostPolicy {
    pub use_cnl: f64,
    pub use_host: f64,
    pub per_chunk: f64,
    pub coercion: f64,
    /// Cost of reading one token as an unanalysed word.
    pub unknown: f64,
}

impl Default for CostPolicy {
    fn default() -> Self {
        CostPolicy {
            use_cnl: 0.1,
            use_host: 1.0,
            per_chunk: 10.0,
            coercion: 0.5,
            unknown: 6.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingConfig {
    pub cnl_start: CategoryId,
    pub host_start: CategoryId,
    pub chunk_categories: Vec<CategoryId>,
    pub coercions: Vec<(CategoryId, CategoryId)>,
    pub costs: CostPolicy,
    /// Whether to generate the catch-all `Unknown` chunk for arbitrary tokens.
    pub unknown_chunks: bool,
}

impl EmbeddingConfig {
    pub fn new(cnl_start: CategoryId, host_start: CategoryId) -> Self {
        EmbeddingConfig {
            cnl_start,
            host_start,
            chunk_categories: Vec::new(),
            coercions: Vec::new(),
            costs: CostPolicy::default(),
            unknown_chunks: true,
        }
    }
}

/// What produced a generated function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Generated {
    Marker,
    Chunk,
    ChunkList,
    Coercion,
    Unknown,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmbeddingError {
    #[error("category `{category}` has different lincats in the two grammars for `{language}`")]
    LincatClash { category: String, language: String },
    #[error("`{0}` is declared twice with different types")]
    NameClash(String),
    #[error("parameter type `{param}` is declared differently in the two grammars for `{language}`")]
    ParamClash { param: String, language: String },
    #[error("invalid cost policy: {0}")]
    InvalidCostPolicy(String),
    #[error("unknown category `{0}`")]
    UnknownCategory(String),
    #[error("language `{0}` is missing from one of the grammars")]
    MissingLanguage(String),
    #[error("coercions form a cycle: {}", .0.join(" -> "))]
    CoercionCycle(Vec<String>),
    #[error("cannot derive a lincat for coercion {from} -> {to} in `{language}`")]
    LincatIncompatible { from: String, to: String, language: String },
    #[error("category `{category}` has no field `s : Str` in `{language}`")]
    NoStartField { category: String, language: String },
    #[error("generated grammar for `{language}` is invalid: {report}")]
    Invalid { language: String, report: ValidationReport },
    #[error(transparent)]
    Signature(#[from] SignatureError),
}

/// One side of an embedding: a signature with its per-language concretes.
#[derive(Clone, Debug)]
pub struct GrammarPart {
    pub signature: AbstractSignature,
    pub concretes: BTreeMap<String, ConcreteGrammar>,
}

/// Checks the inequalities that make analyses rank CNL < host < chunks.
pub fn validate_cost_policy(costs: &CostPolicy) -> Result<(), EmbeddingError> {
    let all = [costs.use_cnl, costs.use_host, costs.per_chunk, costs.coercion, costs.unknown];
    if all.iter().any(|c| !c.is_finite() || *c < 0.0) {
        return Err(EmbeddingError::InvalidCostPolicy("all costs must be >= 0".into()));
    }
    if costs.use_cnl >= costs.use_host {
        return Err(EmbeddingError::InvalidCostPolicy("useCnl < useHost violated".into()));
    }
    if costs.per_chunk <= costs.use_host {
        return Err(EmbeddingError::InvalidCostPolicy("perChunk > useHost violated".into()));
    }
    Ok(())
}

fn cost(v: f64) -> Result<Cost, EmbeddingError> {
    Ok(Cost::from_f64(v)?)
}

fn cat(name: &str) -> CategoryId {
    CategoryId::new(name).expect("generated names are identifiers")
}

/// Name of the chunk function for `c`; the host start category gets `ChunkS`.
pub fn chunk_function_name(c: &CategoryId, host_start: &CategoryId) -> String {
    if c == host_start {
        "ChunkS".to_string()
    } else {
        format!("Chunk{c}")
    }
}

/// Name of the coercion function from `from` to `to`, like `np2person`.
pub fn coercion_name(from: &CategoryId, to: &CategoryId) -> String {
    format!("{}2{}", from.as_str().to_lowercase(), to.as_str().to_lowercase())
}

/// The layered grammar: merged signature, per-language concretes and
/// lazily compiled parsing grammars.
#[derive(Debug)]
pub struct LayeredGrammar {
    signature: AbstractSignature,
    concretes: BTreeMap<String, ConcreteGrammar>,
    generated: BTreeMap<String, Generated>,
    config: EmbeddingConfig,
    bridges: BTreeMap<String, ConcreteGrammar>,
    oov: BTreeMap<String, OovConfig>,
    parsers: BTreeMap<String, OnceLock<Result<Arc<ParsingGrammar>, CompileError>>>,
}

impl Clone for LayeredGrammar {
    fn clone(&self) -> Self {
        LayeredGrammar {
            signature: self.signature.clone(),
            concretes: self.concretes.clone(),
            generated: self.generated.clone(),
            config: self.config.clone(),
            bridges: self.bridges.clone(),
            oov: self.oov.clone(),
            parsers: fresh_parsers(&self.concretes),
        }
    }
}

fn fresh_parsers(
    concretes: &BTreeMap<String, ConcreteGrammar>,
) -> BTreeMap<String, OnceLock<Result<Arc<ParsingGrammar>, CompileError>>> {
    concretes.keys().map(|l| (l.clone(), OnceLock::new())).collect()
}

impl LayeredGrammar {
    pub fn signature(&self) -> &AbstractSignature {
        &self.signature
    }

    pub fn languages(&self) -> impl Iterator<Item = &str> {
        self.concretes.keys().map(String::as_str)
    }

    pub fn concrete(&self, language: &str) -> Option<&ConcreteGrammar> {
        self.concretes.get(language)
    }

    pub fn config(&self) -> &EmbeddingConfig {
        &self.config
    }

    /// How `fun` was generated, or `None` for functions of the input grammars.
    pub fn generated(&self, fun: &str) -> Option<Generated> {
        self.generated.get(fun).copied()
    }

    pub fn generated_functions(&self) -> impl Iterator<Item = (&str, Generated)> {
        self.generated.iter().map(|(f, g)| (f.as_str(), *g))
    }

    /// Whether `fun` wraps one chunk (including CNL and unknown-word chunks).
    pub fn is_chunk_function(&self, fun: &str) -> bool {
        self.signature
            .function(fun)
            .is_some_and(|d| d.result.as_str() == CHUNK && self.generated.contains_key(fun))
    }

    pub fn oov(&self, language: &str) -> Option<&OovConfig> {
        self.oov.get(language)
    }

    /// Sets the out-of-vocabulary guessers used when parsing `language`.
    pub fn set_oov(&mut self, language: &str, mut oov: OovConfig) {
        if !self.concretes.contains_key(language) {
            return;
        }
        if self.generated.contains_key(OOV_UNKNOWN) {
            oov.unknown = Some(OOV_UNKNOWN.to_string());
        }
        self.oov.insert(language.to_string(), oov);
        self.parsers.insert(language.to_string(), OnceLock::new());
    }

    /// The compiled parsing grammar for `language`, built on first use.
    pub fn parsing_grammar(&self, language: &str) -> Option<Result<Arc<ParsingGrammar>, CompileError>> {
        let cell = self.parsers.get(language)?;
        let conc = &self.concretes[language];
        Some(
            cell.get_or_init(|| {
                let opts = CompileOptions {
                    oov: self.oov.get(language).cloned().unwrap_or_default(),
                    ..Default::default()
                };
                compile_with(&self.signature, conc, &opts).map(Arc::new)
            })
            .clone(),
        )
    }
}

/// Builds the layered grammar. `bridges` holds per-language rule overrides
/// for generated functions; it may be empty.
pub fn embed(
    cnl: &GrammarPart,
    host: &GrammarPart,
    cfg: &EmbeddingConfig,
    bridges: &BTreeMap<String, ConcreteGrammar>,
) -> Result<LayeredGrammar, EmbeddingError> {
    validate_cost_policy(&cfg.costs)?;
    if !cnl.signature.has_category(&cfg.cnl_start) {
        return Err(EmbeddingError::UnknownCategory(cfg.cnl_start.to_string()));
    }
    if !host.signature.has_category(&cfg.host_start) {
        return Err(EmbeddingError::UnknownCategory(cfg.host_start.to_string()));
    }

    let mut b = SignatureBuilder::new("Layered");
    let mut cats = BTreeSet::new();
    for c in cnl.signature.categories().chain(host.signature.categories()) {
        if cats.insert(c.clone()) {
            b.category(c.clone())?;
        }
    }
    for d in cnl.signature.functions().chain(host.signature.functions()) {
        match host.signature.function(&d.name).or(cnl.signature.function(&d.name)) {
            Some(other) if other != d => return Err(EmbeddingError::NameClash(d.name.clone())),
            _ => {}
        }
        if !b.has_function(&d.name) {
            b.function(d.clone())?;
        }
    }
    for c in &cfg.chunk_categories {
        if !cats.contains(c) {
            return Err(EmbeddingError::UnknownCategory(c.to_string()));
        }
    }

    let mut generated = BTreeMap::new();
    let add_cat = |b: &mut SignatureBuilder, name: &str| -> Result<(), EmbeddingError> {
        if cats.contains(&cat(name)) {
            return Err(EmbeddingError::NameClash(name.to_string()));
        }
        b.category(cat(name))?;
        Ok(())
    };
    add_cat(&mut b, START)?;
    add_cat(&mut b, CHUNK)?;
    add_cat(&mut b, LIST_CHUNK)?;
    if cfg.unknown_chunks {
        add_cat(&mut b, UNKNOWN)?;
    }

    let costs = &cfg.costs;
    let mut decls = vec![
        (
            FunDecl::new(USE_CNL, vec![cfg.cnl_start.clone()], cat(START))
                .with_cost(cost(costs.use_cnl)?)
                .with_layer(LayerTag::Semantic),
            Generated::Marker,
        ),
        (
            FunDecl::new(USE_HOST, vec![cfg.host_start.clone()], cat(START))
                .with_cost(cost(costs.use_host)?)
                .with_layer(LayerTag::Syntactic),
            Generated::Marker,
        ),
    ];
    if !cfg.chunk_categories.is_empty() || cfg.unknown_chunks {
        for c in &cfg.chunk_categories {
            decls.push((
                FunDecl::new(chunk_function_name(c, &cfg.host_start), vec![c.clone()], cat(CHUNK))
                    .with_cost(cost(costs.per_chunk)?)
                    .with_layer(LayerTag::Word),
                Generated::Chunk,
            ));
        }
        decls.push((
            FunDecl::new(CHUNK_CNL, vec![cfg.cnl_start.clone()], cat(CHUNK))
                .with_cost(cost(costs.per_chunk)?)
                .with_layer(LayerTag::Semantic),
            Generated::Chunk,
        ));
        decls.push((
            FunDecl::new(ONE_CHUNK, vec![cat(CHUNK)], cat(LIST_CHUNK)).with_cost(Cost::ZERO),
            Generated::ChunkList,
        ));
        decls.push((
            FunDecl::new(CONS_CHUNK, vec![cat(CHUNK), cat(LIST_CHUNK)], cat(LIST_CHUNK)).with_cost(Cost::ZERO),
            Generated::ChunkList,
        ));
        decls.push((
            FunDecl::new(USE_CHUNKS, vec![cat(LIST_CHUNK)], cat(START))
                .with_cost(Cost::ZERO)
                .with_layer(LayerTag::Word),
            Generated::Marker,
        ));
        if cfg.unknown_chunks {
            decls.push((
                FunDecl::new(OOV_UNKNOWN, vec![CategoryId::string()], cat(UNKNOWN))
                    .with_cost(cost(costs.unknown)?)
                    .with_layer(LayerTag::Word),
                Generated::Unknown,
            ));
            decls.push((
                FunDecl::new(CHUNK_UNKNOWN, vec![cat(UNKNOWN)], cat(CHUNK))
                    .with_cost(cost(costs.per_chunk)?)
                    .with_layer(LayerTag::Word),
                Generated::Chunk,
            ));
        }
    }
    for (d, g) in decls {
        if b.has_function(&d.name) {
            return Err(EmbeddingError::NameClash(d.name.clone()));
        }
        generated.insert(d.name.clone(), g);
        b.function(d)?;
    }
    let signature = b.build(cat(START))?;

    let mut concretes = BTreeMap::new();
    for (lang, cc) in &cnl.concretes {
        let hc = host
            .concretes
            .get(lang)
            .ok_or_else(|| EmbeddingError::MissingLanguage(lang.clone()))?;
        let mut conc = merge_concretes(lang, cc, hc)?;
        for c in [START, CHUNK, LIST_CHUNK, UNKNOWN] {
            if signature.has_category(&cat(c)) {
                conc.set_lincat(cat(c), LinType::plain());
            }
        }
        for fun in generated.keys() {
            let decl = signature.function(fun).expect("generated function declared");
            let rule = generated_rule(decl, &conc, lang)?;
            conc.set_linrule(rule);
        }
        concretes.insert(lang.clone(), conc);
    }
    for lang in host.concretes.keys() {
        if !cnl.concretes.contains_key(lang) {
            return Err(EmbeddingError::MissingLanguage(lang.clone()));
        }
    }
    let mut lg = LayeredGrammar {
        signature,
        parsers: fresh_parsers(&concretes),
        concretes,
        generated,
        config: cfg.clone(),
        bridges: bridges.clone(),
        oov: BTreeMap::new(),
    };
    lg.apply_bridges()?;
    lg.validate()?;
    let languages: Vec<String> = lg.concretes.keys().cloned().collect();
    for l in languages {
        lg.set_oov(&l, OovConfig::default());
    }
    Ok(lg)
}

fn merge_concretes(lang: &str, cnl: &ConcreteGrammar, host: &ConcreteGrammar) -> Result<ConcreteGrammar, EmbeddingError> {
    let mut conc = ConcreteGrammar::new(format!("Layered_{lang}"), "Layered");
    for p in host.params().iter().chain(cnl.params()) {
        conc.add_param(p.clone()).map_err(|_| EmbeddingError::ParamClash {
            param: p.name.clone(),
            language: lang.to_string(),
        })?;
    }
    for (c, ty) in host.lincats().chain(cnl.lincats()) {
        if let Some(existing) = conc.lincat_ref(c) {
            if !existing.same_as(ty) {
                return Err(EmbeddingError::LincatClash {
                    category: c.to_string(),
                    language: lang.to_string(),
                });
            }
            continue;
        }
        conc.set_lincat(c.clone(), ty.clone());
    }
    for r in cnl.linrules().chain(host.linrules()) {
        conc.set_linrule(r.clone());
    }
    Ok(conc)
}

/// `x.s`, selecting the first value of every table level if `s` is a table.
fn start_string(arg: usize, ty: &LinType, conc: &ConcreteGrammar) -> Option<LinExpr> {
    let mut t = if matches!(ty, LinType::Str) {
        return Some(LinExpr::Arg(arg));
    } else {
        ty.field("s")?
    };
    let mut e = LinExpr::project(LinExpr::Arg(arg), "s");
    while let LinType::Table(p, v) = t {
        let first = conc.param_index().values(p)?.first()?.clone();
        e = LinExpr::select(e, LinExpr::Param(first));
        t = v;
    }
    matches!(t, LinType::Str).then_some(e)
}

fn record_s(e: LinExpr) -> LinExpr {
    LinExpr::Record(vec![("s".to_string(), e)])
}

fn generated_rule(decl: &FunDecl, conc: &ConcreteGrammar, lang: &str) -> Result<LinRule, EmbeddingError> {
    let names: Vec<String> = (0..decl.arity()).map(|i| format!("x{i}")).collect();
    let arg_s = |i: usize| -> Result<LinExpr, EmbeddingError> {
        let c = &decl.args[i];
        let ty = conc.lincat(c).ok_or_else(|| EmbeddingError::UnknownCategory(c.to_string()))?;
        start_string(i, &ty, conc).ok_or_else(|| EmbeddingError::NoStartField {
            category: c.to_string(),
            language: lang.to_string(),
        })
    };
    let body = if decl.name == CONS_CHUNK {
        record_s(LinExpr::concat(arg_s(0)?, arg_s(1)?))
    } else {
        record_s(arg_s(0)?)
    };
    Ok(LinRule {
        fun: decl.name.clone(),
        args: names,
        body,
        line: 0,
    })
}

impl LayeredGrammar {
    fn apply_bridges(&mut self) -> Result<(), EmbeddingError> {
        for (lang, bridge) in &self.bridges {
            let Some(conc) = self.concretes.get_mut(lang) else {
                return Err(EmbeddingError::MissingLanguage(lang.clone()));
            };
            for p in bridge.params() {
                conc.add_param(p.clone()).map_err(|_| EmbeddingError::ParamClash {
                    param: p.name.clone(),
                    language: lang.clone(),
                })?;
            }
            for r in bridge.linrules() {
                if self.signature.function(&r.fun).is_some() {
                    conc.set_linrule(r.clone());
                }
            }
        }
        Ok(())
    }

    fn validate(&mut self) -> Result<(), EmbeddingError> {
        for (lang, conc) in self.concretes.iter_mut() {
            conc.elaborate(&self.signature).map_err(|report| EmbeddingError::Invalid {
                language: lang.clone(),
                report,
            })?;
        }
        Ok(())
    }

    fn coercion_edges(&self) -> Vec<(CategoryId, CategoryId)> {
        self.generated
            .iter()
            .filter(|(_, g)| **g == Generated::Coercion)
            .filter_map(|(f, _)| self.signature.function(f))
            .map(|d| (d.args[0].clone(), d.result.clone()))
            .collect()
    }
}

/// A directed cycle among `edges`, as a closed path, if there is one.
pub fn find_cycle(edges: &[(CategoryId, CategoryId)]) -> Option<Vec<CategoryId>> {
    let mut succ: BTreeMap<&CategoryId, Vec<&CategoryId>> = BTreeMap::new();
    for (a, b) in edges {
        succ.entry(a).or_default().push(b);
        succ.entry(b).or_default();
    }
    for v in succ.values_mut() {
        v.sort();
        v.dedup();
    }
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    let mut mark: BTreeMap<&CategoryId, Mark> = succ.keys().map(|k| (*k, Mark::New)).collect();

    fn visit<'a>(
        v: &'a CategoryId,
        succ: &BTreeMap<&'a CategoryId, Vec<&'a CategoryId>>,
        mark: &mut BTreeMap<&'a CategoryId, Mark>,
        stack: &mut Vec<&'a CategoryId>,
    ) -> Option<Vec<CategoryId>> {
        mark.insert(v, Mark::Active);
        stack.push(v);
        for &w in &succ[v] {
            match mark[w] {
                Mark::Active => {
                    let i = stack.iter().position(|x| *x == w).expect("active nodes are on the stack");
                    let mut cycle: Vec<CategoryId> = stack[i..].iter().map(|c| (*c).clone()).collect();
                    cycle.push(w.clone());
                    return Some(cycle);
                }
                Mark::New => {
                    if let Some(c) = visit(w, succ, mark, stack) {
                        return Some(c);
                    }
                }
                Mark::Done => {}
            }
        }
        stack.pop();
        mark.insert(v, Mark::Done);
        None
    }

    let keys: Vec<&CategoryId> = succ.keys().copied().collect();
    for v in keys {
        if mark[v] == Mark::New {
            if let Some(c) = visit(v, &succ, &mut mark, &mut Vec::new()) {
                return Some(c);
            }
        }
    }
    None
}

/// Adds one coercion function per pair, rejecting cycles.
pub fn add_coercions(
    lg: &LayeredGrammar,
    pairs: &[(CategoryId, CategoryId)],
) -> Result<LayeredGrammar, EmbeddingError> {
    for (a, b) in pairs {
        for c in [a, b] {
            if !lg.signature.has_category(c) || c.is_string() {
                return Err(EmbeddingError::UnknownCategory(c.to_string()));
            }
        }
    }
    let mut edges = lg.coercion_edges();
    edges.extend(pairs.iter().cloned());
    if let Some(cycle) = find_cycle(&edges) {
        return Err(EmbeddingError::CoercionCycle(cycle.iter().map(|c| c.to_string()).collect()));
    }

    let mut b = SignatureBuilder::from_signature(&lg.signature);
    let mut out = lg.clone();
    let coercion_cost = cost(lg.config.costs.coercion)?;
    for (from, to) in pairs {
        let name = coercion_name(from, to);
        if b.has_function(&name) {
            return Err(EmbeddingError::NameClash(name));
        }
        b.function(FunDecl::new(&name, vec![from.clone()], to.clone()).with_cost(coercion_cost))?;
        out.generated.insert(name.clone(), Generated::Coercion);
        for (lang, conc) in out.concretes.iter_mut() {
            let bridged = lg.bridges.get(lang).and_then(|br| br.linrule(&name)).cloned();
            let rule = match bridged {
                Some(r) => r,
                None => {
                    let incompatible = || EmbeddingError::LincatIncompatible {
                        from: from.to_string(),
                        to: to.to_string(),
                        language: lang.clone(),
                    };
                    let ft = conc.lincat(from).ok_or_else(incompatible)?;
                    let tt = conc.lincat(to).ok_or_else(incompatible)?;
                    LinRule {
                        fun: name.clone(),
                        args: vec!["x".to_string()],
                        body: coercion_body(&ft, &tt).ok_or_else(incompatible)?,
                        line: 0,
                    }
                }
            };
            conc.set_linrule(rule);
        }
    }
    out.signature = b.build(lg.signature.start().clone())?;
    out.config.coercions.extend(pairs.iter().cloned());
    out.parsers = fresh_parsers(&out.concretes);
    out.validate()?;
    Ok(out)
}

/// Identity when the lincats agree, a field projection when the target's
/// fields are a subset of the source's.
fn coercion_body(from: &LinType, to: &LinType) -> Option<LinExpr> {
    if from.same_as(to) {
        return Some(LinExpr::Arg(0));
    }
    let LinType::Record(fields) = to else { return None };
    let mut out = Vec::new();
    for (n, t) in fields {
        if !from.field(n)?.same_as(t) {
            return None;
        }
        out.push((n.clone(), LinExpr::project(LinExpr::Arg(0), n)));
    }
    Some(LinExpr::Record(out))
}

impl fmt::Display for Generated {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Generated::Marker => "marker",
            Generated::Chunk => "chunk",
            Generated::ChunkList => "chunk list",
            Generated::Coercion => "coercion",
            Generated::Unknown => "unknown word",
        })
    }
}
