//! Parsing grammars: concrete syntax compiled into a parallel multiple
//! context-free grammar by instantiating every parameter, plus the chart
//! parser that inverts linearization.

mod oov;
mod parser;
mod tokenize;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::ast::{AbstractSignature, CategoryId, Cost, FunDecl};
use crate::grammar::eval::{eval, flatten, unflatten, Env, EvalError, LitChoice, Value};
use crate::grammar::{component_labels, param_slots, ConcreteGrammar, LinExpr, LinType};

pub use oov::{OovConfig, OovHypothesis};
pub use parser::{parse, parse_with, ChartStats, ParseError, ParseOptions, ParseResult, ParsedTree};
pub use tokenize::{tokenize, tokenize_with_offsets};

/// Default cap on the number of specialized productions.
pub const DEFAULT_PRODUCTION_LIMIT: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NtId(pub u32);

/// A category specialized to one value for each of its parameter slots.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PNonterminal {
    pub category: CategoryId,
    pub params: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Item {
    Lit(String),
    /// Component `.1` of argument `.0`.
    Arg(usize, usize),
}

/// How a `String` argument is matched against the input.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum LiteralSpec {
    /// A specific text selected by a `case` branch. It consumes no input.
    Fixed(String),
    /// One all-digit token, other than the texts with their own branch.
    Digits { excluded: Vec<String> },
    /// One token for which the out-of-vocabulary guesser proposes `fun`.
    Oov(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ArgSlot {
    Nt(NtId),
    Literal(LiteralSpec),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PProduction {
    pub lhs: NtId,
    pub fun: String,
    pub rhs: Vec<ArgSlot>,
    /// One item sequence per string component of the left-hand side.
    pub components: Vec<Vec<Item>>,
    pub cost: Cost,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CompileError {
    #[error("parameter instantiation exceeds {limit} productions")]
    ParamExplosion { limit: usize },
    #[error("no lincat for `{0}`")]
    MissingLincat(String),
    #[error("no lin rule for `{0}`")]
    MissingLinRule(String),
    #[error("start category `{0}` has no field `s : Str`")]
    NoStartField(String),
    #[error("evaluating `{fun}`: {source}")]
    Eval { fun: String, source: EvalError },
}

#[derive(Clone, Debug)]
pub struct CompileOptions {
    pub production_limit: usize,
    pub oov: OovConfig,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions {
            production_limit: DEFAULT_PRODUCTION_LIMIT,
            oov: OovConfig::default(),
        }
    }
}

/// The compiled form of one concrete grammar.
#[derive(Clone, Debug)]
pub struct ParsingGrammar {
    start: CategoryId,
    nonterminals: Vec<PNonterminal>,
    by_category: HashMap<CategoryId, Vec<NtId>>,
    component_labels: HashMap<CategoryId, Vec<String>>,
    productions: Vec<PProduction>,
    by_lhs: Vec<Vec<usize>>,
    vocabulary: HashSet<String>,
    min_len: Vec<Vec<usize>>,
    oov: oov::Guesser,
}

const UNREACHABLE_LEN: usize = usize::MAX / 4;

impl ParsingGrammar {
    pub fn start(&self) -> &CategoryId {
        &self.start
    }

    pub fn nonterminal(&self, id: NtId) -> &PNonterminal {
        &self.nonterminals[id.0 as usize]
    }

    pub fn nonterminals(&self) -> &[PNonterminal] {
        &self.nonterminals
    }

    pub fn nonterminals_of(&self, cat: &CategoryId) -> &[NtId] {
        self.by_category.get(cat).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn productions(&self) -> &[PProduction] {
        &self.productions
    }

    pub fn has_category(&self, cat: &CategoryId) -> bool {
        self.by_category.contains_key(cat)
    }

    pub(crate) fn production_ids(&self, lhs: NtId) -> &[usize] {
        &self.by_lhs[lhs.0 as usize]
    }

    pub fn productions_for(&self, lhs: NtId) -> impl Iterator<Item = &PProduction> {
        self.by_lhs[lhs.0 as usize].iter().map(|&i| &self.productions[i])
    }

    /// Labels of the string components of `cat`, like `s!Pos!Decl`.
    pub fn component_labels(&self, cat: &CategoryId) -> &[String] {
        self.component_labels.get(cat).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Every token written literally in some rule.
    pub fn vocabulary(&self) -> &HashSet<String> {
        &self.vocabulary
    }

    pub fn in_vocabulary(&self, token: &str) -> bool {
        self.vocabulary.contains(token)
    }

    /// Lexical hypotheses for a token the grammar may not know.
    pub fn oov_hypotheses(&self, token: &str, sentence_initial: bool) -> Vec<OovHypothesis> {
        self.oov.hypotheses(token, sentence_initial, self.in_vocabulary(token))
    }

    pub(crate) fn min_len(&self, nt: NtId, comp: usize) -> usize {
        self.min_len[nt.0 as usize].get(comp).copied().unwrap_or(UNREACHABLE_LEN)
    }

    pub(crate) fn guesser(&self) -> &oov::Guesser {
        &self.oov
    }
}

impl fmt::Display for PProduction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "N{} -> {}(", self.lhs.0, self.fun)?;
        for (i, a) in self.rhs.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            match a {
                ArgSlot::Nt(n) => write!(f, "N{}", n.0)?,
                ArgSlot::Literal(LiteralSpec::Fixed(s)) => write!(f, "{s:?}")?,
                ArgSlot::Literal(LiteralSpec::Digits { .. }) => f.write_str("<digits>")?,
                ArgSlot::Literal(LiteralSpec::Oov(_)) => f.write_str("<oov>")?,
            }
        }
        f.write_str(") [")?;
        for (i, comp) in self.components.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            let parts: Vec<String> = comp
                .iter()
                .map(|it| match it {
                    Item::Lit(t) => format!("{t:?}"),
                    Item::Arg(j, c) => format!("<{j},{c}>"),
                })
                .collect();
            f.write_str(&parts.join(" "))?;
        }
        f.write_str("]")
    }
}

/// Compiles with default options.
pub fn compile(sig: &AbstractSignature, conc: &ConcreteGrammar) -> Result<ParsingGrammar, CompileError> {
    compile_with(sig, conc, &CompileOptions::default())
}

pub fn compile_with(
    sig: &AbstractSignature,
    conc: &ConcreteGrammar,
    opts: &CompileOptions,
) -> Result<ParsingGrammar, CompileError> {
    let params = conc.param_index();
    let mut nonterminals = Vec::new();
    let mut nt_index: HashMap<PNonterminal, NtId> = HashMap::new();
    let mut by_category: HashMap<CategoryId, Vec<NtId>> = HashMap::new();
    let mut labels = HashMap::new();
    let mut lincats = HashMap::new();

    for cat in sig.categories() {
        let ty = conc
            .lincat(cat)
            .ok_or_else(|| CompileError::MissingLincat(cat.to_string()))?;
        let domains: Vec<usize> = param_slots(&ty, params)
            .iter()
            .map(|(_, p)| params.values(p).map_or(0, <[String]>::len))
            .collect();
        let mut ids = Vec::new();
        for assignment in assignments(&domains) {
            let nt = PNonterminal {
                category: cat.clone(),
                params: assignment,
            };
            let id = NtId(nonterminals.len() as u32);
            nt_index.insert(nt.clone(), id);
            nonterminals.push(nt);
            ids.push(id);
        }
        by_category.insert(cat.clone(), ids);
        labels.insert(cat.clone(), component_labels(&ty, params));
        lincats.insert(cat.clone(), ty);
    }
    let start_ty = &lincats[sig.start()];
    if !crate::linearize::has_start_field(start_ty) {
        return Err(CompileError::NoStartField(sig.start().to_string()));
    }

    let oov_funs: HashSet<&str> = opts.oov.functions().collect();
    let mut productions = Vec::new();
    for decl in sig.functions() {
        let rule = conc
            .linrule(&decl.name)
            .ok_or_else(|| CompileError::MissingLinRule(decl.name.clone()))?;
        let choices = arg_choices(decl, &rule.body, &by_category, oov_funs.contains(decl.name.as_str()));
        let combos: usize = choices.iter().map(Vec::len).product();
        if productions.len() + combos > opts.production_limit {
            return Err(CompileError::ParamExplosion {
                limit: opts.production_limit,
            });
        }
        let result_ty = &lincats[&decl.result];
        for combo in assignments(&choices.iter().map(Vec::len).collect::<Vec<_>>()) {
            let slots: Vec<&ArgSlot> = combo.iter().enumerate().map(|(j, &i)| &choices[j][i]).collect();
            if let Some(p) = specialize(decl, &rule.body, &slots, conc, &lincats, &nonterminals, result_ty)? {
                let lhs = nt_index[&p.0];
                productions.push(PProduction {
                    lhs,
                    fun: decl.name.clone(),
                    rhs: slots.into_iter().cloned().collect(),
                    components: p.1,
                    cost: decl.cost,
                });
            }
        }
    }

    let mut by_lhs = vec![Vec::new(); nonterminals.len()];
    let mut vocabulary = HashSet::new();
    for (i, p) in productions.iter().enumerate() {
        by_lhs[p.lhs.0 as usize].push(i);
        for comp in &p.components {
            for item in comp {
                if let Item::Lit(t) = item {
                    vocabulary.insert(t.clone());
                }
            }
        }
    }
    let min_len = min_lengths(&nonterminals, &labels, &productions);
    let guesser = oov::Guesser::new(&opts.oov, sig);
    Ok(ParsingGrammar {
        start: sig.start().clone(),
        nonterminals,
        by_category,
        component_labels: labels,
        productions,
        by_lhs,
        vocabulary,
        min_len,
        oov: guesser,
    })
}

/// All total assignments over the given domain sizes, in lexicographic order.
fn assignments(domains: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &d in domains {
        let mut next = Vec::with_capacity(out.len() * d);
        for prefix in &out {
            for v in 0..d {
                let mut a = prefix.clone();
                a.push(v);
                next.push(a);
            }
        }
        out = next;
    }
    out
}

fn arg_choices(
    decl: &FunDecl,
    body: &LinExpr,
    by_category: &HashMap<CategoryId, Vec<NtId>>,
    is_oov: bool,
) -> Vec<Vec<ArgSlot>> {
    decl.args
        .iter()
        .enumerate()
        .map(|(j, cat)| {
            if cat.is_string() {
                let mut keys = BTreeSet::new();
                case_keys(body, j, &mut keys);
                let excluded: Vec<String> = keys.iter().cloned().collect();
                let mut slots: Vec<ArgSlot> = keys.into_iter().map(|k| ArgSlot::Literal(LiteralSpec::Fixed(k))).collect();
                slots.push(ArgSlot::Literal(if is_oov {
                    LiteralSpec::Oov(decl.name.clone())
                } else {
                    LiteralSpec::Digits { excluded }
                }));
                slots
            } else {
                by_category
                    .get(cat)
                    .map(|ids| ids.iter().map(|&n| ArgSlot::Nt(n)).collect())
                    .unwrap_or_default()
            }
        })
        .collect()
}

fn case_keys(e: &LinExpr, arg: usize, out: &mut BTreeSet<String>) {
    match e {
        LinExpr::Str(_) | LinExpr::Arg(_) | LinExpr::Var(_) | LinExpr::Param(_) => {}
        LinExpr::Concat(a, b) | LinExpr::Select(a, b) => {
            case_keys(a, arg, out);
            case_keys(b, arg, out);
        }
        LinExpr::Project(a, _) => case_keys(a, arg, out),
        LinExpr::Table { branches, .. } => branches.iter().for_each(|(_, b)| case_keys(b, arg, out)),
        LinExpr::Record(fields) => fields.iter().for_each(|(_, b)| case_keys(b, arg, out)),
        LinExpr::LitCase { arg: a, branches, default } => {
            for (k, b) in branches {
                if *a == arg {
                    out.insert(k.clone());
                }
                case_keys(b, arg, out);
            }
            case_keys(default, arg, out);
        }
    }
}

type Specialized = (PNonterminal, Vec<Vec<Item>>);

/// Evaluates a rule for one choice of argument nonterminals. Returns `None`
/// when an unconstrained literal argument is never emitted, since such a
/// literal could not be recovered from the input.
fn specialize(
    decl: &FunDecl,
    body: &LinExpr,
    slots: &[&ArgSlot],
    conc: &ConcreteGrammar,
    lincats: &HashMap<CategoryId, LinType>,
    nonterminals: &[PNonterminal],
    result_ty: &LinType,
) -> Result<Option<Specialized>, CompileError> {
    let params = conc.param_index();
    let mut args = Vec::with_capacity(slots.len());
    let mut literals = Vec::with_capacity(slots.len());
    for (j, slot) in slots.iter().enumerate() {
        match slot {
            ArgSlot::Nt(id) => {
                let nt = &nonterminals[id.0 as usize];
                let ty = &lincats[&nt.category];
                let n = component_labels(ty, params).len();
                let strs: Vec<Vec<Item>> = (0..n).map(|c| vec![Item::Arg(j, c)]).collect();
                args.push(unflatten(ty, params, &strs, &nt.params));
                literals.push(None);
            }
            ArgSlot::Literal(LiteralSpec::Fixed(text)) => {
                let toks = text.split_whitespace().map(|t| Item::Lit(t.to_string())).collect();
                args.push(Value::Record(vec![("s".to_string(), Value::Str(toks))]));
                literals.push(Some(LitChoice::Known(text.clone())));
            }
            ArgSlot::Literal(_) => {
                args.push(Value::Record(vec![("s".to_string(), Value::Str(vec![Item::Arg(j, 0)]))]));
                literals.push(Some(LitChoice::Other));
            }
        }
    }
    let token = |t: &str| Item::Lit(t.to_string());
    let env = Env {
        params,
        args: &args,
        literals: &literals,
        token: &token,
    };
    let eval_err = |source| CompileError::Eval {
        fun: decl.name.clone(),
        source,
    };
    let value = eval(body, &env).map_err(eval_err)?;
    let (components, assignment) = flatten(&value, result_ty).map_err(eval_err)?;
    for (j, slot) in slots.iter().enumerate() {
        let open = matches!(slot, ArgSlot::Literal(LiteralSpec::Digits { .. } | LiteralSpec::Oov(_)));
        if open && !components.iter().flatten().any(|it| *it == Item::Arg(j, 0)) {
            return Ok(None);
        }
    }
    let lhs = PNonterminal {
        category: decl.result.clone(),
        params: assignment,
    };
    Ok(Some((lhs, components)))
}

/// Lower bounds on the token length of every component, by fixpoint.
fn min_lengths(
    nonterminals: &[PNonterminal],
    labels: &HashMap<CategoryId, Vec<String>>,
    productions: &[PProduction],
) -> Vec<Vec<usize>> {
    let mut min: Vec<Vec<usize>> = nonterminals
        .iter()
        .map(|nt| vec![UNREACHABLE_LEN; labels[&nt.category].len()])
        .collect();
    loop {
        let mut changed = false;
        for p in productions {
            for (c, items) in p.components.iter().enumerate() {
                let len = items
                    .iter()
                    .map(|it| match it {
                        Item::Lit(_) => 1,
                        Item::Arg(j, cc) => match &p.rhs[*j] {
                            ArgSlot::Nt(n) => min[n.0 as usize][*cc],
                            ArgSlot::Literal(_) => 1,
                        },
                    })
                    .fold(0usize, |a, b| (a + b).min(UNREACHABLE_LEN));
                let cur = &mut min[p.lhs.0 as usize][c];
                if len < *cur {
                    *cur = len;
                    changed = true;
                }
            }
        }
        if !changed {
            return min;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::{parse_abstract, parse_concrete};

    const ABS: &str = r#"abstract A {
        flags startcat = S ;
        cat S ; NP ; Person ;
        fun pred : NP -> S ;
        fun they, she : NP ;
        fun plain : Person -> S ;
        fun john : Person ;
    }"#;

    const CONC: &str = r#"concrete AE of A {
        param Number = Sg | Pl ;
        lincat S, Person = { s : Str } ;
        lincat NP = { s : Str ; n : Number } ;
        lin pred np = { s = np.s ++ table { Sg => "sleeps" ; Pl => "sleep" } ! np.n } ;
        lin they = { s = "they" ; n = Pl } ;
        lin she = { s = "she" ; n = Sg } ;
        lin plain p = { s = p.s ++ "exists" } ;
        lin john = { s = "John" } ;
    }"#;

    #[test]
    fn one_production_per_parameter_value() {
        let sig = parse_abstract(ABS).unwrap();
        let conc = parse_concrete(CONC, &sig).unwrap();
        let pg = compile(&sig, &conc).unwrap();
        let pred: Vec<&PProduction> = pg.productions().iter().filter(|p| p.fun == "pred").collect();
        assert_eq!(pred.len(), 2);
        assert_eq!(pg.productions().iter().filter(|p| p.fun == "plain").count(), 1);
        let sg = pred
            .iter()
            .find(|p| matches!(p.rhs[0], ArgSlot::Nt(n) if pg.nonterminal(n).params == vec![0]))
            .unwrap();
        assert_eq!(sg.components, vec![vec![Item::Arg(0, 0), Item::Lit("sleeps".into())]]);
    }

    #[test]
    fn production_cap() {
        let sig = parse_abstract(ABS).unwrap();
        let conc = parse_concrete(CONC, &sig).unwrap();
        let opts = CompileOptions {
            production_limit: 3,
            ..Default::default()
        };
        assert_eq!(
            compile_with(&sig, &conc, &opts).unwrap_err(),
            CompileError::ParamExplosion { limit: 3 }
        );
    }

    #[test]
    fn assignment_enumeration() {
        assert_eq!(assignments(&[2, 3]).len(), 6);
        assert_eq!(assignments(&[]), vec![Vec::<usize>::new()]);
        assert_eq!(assignments(&[0, 2]).len(), 0);
    }
}
