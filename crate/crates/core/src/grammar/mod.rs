//! The grammar-definition language.
//!
//! Abstract grammars declare categories and typed functions:
//!
//! ```text
//! abstract Age {
//!   flags startcat = Fact ;
//!   cat Person ; Numeral ; Fact ;
//!   fun aged : Person -> Numeral -> Fact [layer=cnl, cost=0.2] ;
//! }
//! ```
//!
//! Concrete grammars give every category a linearization type (`lincat`)
//! and every function a linearization rule (`lin`) built from string
//! literals, concatenation (`++`), records, finite parameter tables and
//! selection (`!`):
//!
//! ```text
//! concrete AgeEng of Age {
//!   param Number = Sg | Pl ;
//!   lincat Person = { s : Str ; n : Number } ;
//!   lin aged p n = { s = p.s ++ "is" ++ n.s ++ "years old" } ;
//! }
//! ```
//!
//! Parameter values start with an upper-case letter; table variables and
//! rule arguments start with a lower-case one. Comments run from `--` to the
//! end of the line.

mod check;
pub mod eval;
mod lexer;
mod parser;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use crate::ast::{AbstractSignature, CategoryId, SignatureError};

pub use check::{validate_concrete, ValidationIssue, ValidationReport};
pub use parser::{parse_abstract, parse_concrete, parse_concrete_unchecked};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GrammarError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("duplicate {kind} `{name}`")]
    DuplicateName { kind: &'static str, name: String },
    #[error("unknown category `{0}`")]
    UnknownCategory(String),
    #[error("cost must be non-negative, got {0}")]
    NegativeCost(f64),
    #[error("invalid grammar: {0}")]
    Signature(SignatureError),
    #[error("{0}")]
    Invalid(ValidationReport),
}

impl From<SignatureError> for GrammarError {
    fn from(e: SignatureError) -> Self {
        match e {
            SignatureError::DuplicateCategory(name) => GrammarError::DuplicateName {
                kind: "category",
                name,
            },
            SignatureError::DuplicateFunction(name) => GrammarError::DuplicateName {
                kind: "function",
                name,
            },
            SignatureError::UnknownCategory { category, .. } => GrammarError::UnknownCategory(category),
            SignatureError::UnknownStart(category) => GrammarError::UnknownCategory(category),
            SignatureError::NegativeCost(c) => GrammarError::NegativeCost(c),
            other => GrammarError::Signature(other),
        }
    }
}

/// A finite enumeration such as `Number = Sg | Pl`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamTypeDecl {
    pub name: String,
    pub values: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum LinType {
    Str,
    Param(String),
    Record(Vec<(String, LinType)>),
    Table(String, Box<LinType>),
}

impl LinType {
    pub fn record(fields: Vec<(&str, LinType)>) -> LinType {
        LinType::Record(fields.into_iter().map(|(n, t)| (n.to_string(), t)).collect())
    }

    /// `{ s : Str }`, the type of string literals and of every generated marker category.
    pub fn plain() -> LinType {
        LinType::record(vec![("s", LinType::Str)])
    }

    pub fn field(&self, name: &str) -> Option<&LinType> {
        match self {
            LinType::Record(fields) => fields.iter().find(|(n, _)| n == name).map(|(_, t)| t),
            _ => None,
        }
    }

    /// Structural equality that ignores record field order.
    pub fn same_as(&self, other: &LinType) -> bool {
        match (self, other) {
            (LinType::Str, LinType::Str) => true,
            (LinType::Param(a), LinType::Param(b)) => a == b,
            (LinType::Table(pa, va), LinType::Table(pb, vb)) => pa == pb && va.same_as(vb),
            (LinType::Record(fa), LinType::Record(fb)) => {
                fa.len() == fb.len()
                    && fa
                        .iter()
                        .all(|(n, t)| fb.iter().any(|(m, u)| n == m && t.same_as(u)))
            }
            _ => false,
        }
    }
}

impl fmt::Display for LinType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinType::Str => f.write_str("Str"),
            LinType::Param(p) => f.write_str(p),
            LinType::Table(p, v) => write!(f, "{p} => {v}"),
            LinType::Record(fields) => {
                f.write_str("{")?;
                for (i, (n, t)) in fields.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ;")?;
                    }
                    write!(f, " {n} : {t}")?;
                }
                f.write_str(" }")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Pattern {
    Value(String),
    Var(String),
    Wildcard,
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Value(v) | Pattern::Var(v) => f.write_str(v),
            Pattern::Wildcard => f.write_str("_"),
        }
    }
}

/// Linearization expressions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LinExpr {
    /// A sequence of tokens; `""` is the empty sequence.
    Str(Vec<String>),
    Concat(Box<LinExpr>, Box<LinExpr>),
    /// The linearization of rule argument `i`.
    Arg(usize),
    /// A variable bound by a table branch pattern.
    Var(String),
    Param(String),
    Project(Box<LinExpr>, String),
    Select(Box<LinExpr>, Box<LinExpr>),
    /// `key` is the parameter type, filled in during elaboration when the
    /// patterns alone do not determine it.
    Table {
        key: Option<String>,
        branches: Vec<(Pattern, LinExpr)>,
    },
    Record(Vec<(String, LinExpr)>),
    /// Case analysis on the text of a `String` argument.
    LitCase {
        arg: usize,
        branches: Vec<(String, LinExpr)>,
        default: Box<LinExpr>,
    },
}

impl LinExpr {
    pub fn concat(a: LinExpr, b: LinExpr) -> LinExpr {
        LinExpr::Concat(Box::new(a), Box::new(b))
    }

    pub fn project(e: LinExpr, field: &str) -> LinExpr {
        LinExpr::Project(Box::new(e), field.to_string())
    }

    pub fn select(e: LinExpr, key: LinExpr) -> LinExpr {
        LinExpr::Select(Box::new(e), Box::new(key))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinRule {
    pub fun: String,
    pub args: Vec<String>,
    pub body: LinExpr,
    pub line: usize,
}

/// Parameter values by name, with their owning type and position.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParamIndex {
    types: BTreeMap<String, Vec<String>>,
    owner: HashMap<String, (String, usize)>,
}

impl ParamIndex {
    pub fn values(&self, ty: &str) -> Option<&[String]> {
        self.types.get(ty).map(Vec::as_slice)
    }

    pub fn lookup(&self, value: &str) -> Option<(&str, usize)> {
        self.owner.get(value).map(|(t, i)| (t.as_str(), *i))
    }

    pub fn value_name(&self, ty: &str, idx: usize) -> Option<&str> {
        self.types.get(ty).and_then(|v| v.get(idx)).map(String::as_str)
    }

    pub fn contains_type(&self, ty: &str) -> bool {
        self.types.contains_key(ty)
    }
}

/// One language's linearization of an abstract signature.
#[derive(Clone, Debug, PartialEq)]
pub struct ConcreteGrammar {
    pub name: String,
    pub of: String,
    params: Vec<ParamTypeDecl>,
    index: ParamIndex,
    lincats: BTreeMap<CategoryId, LinType>,
    linrules: BTreeMap<String, LinRule>,
}

impl ConcreteGrammar {
    pub fn new(name: impl Into<String>, of: impl Into<String>) -> Self {
        ConcreteGrammar {
            name: name.into(),
            of: of.into(),
            params: Vec::new(),
            index: ParamIndex::default(),
            lincats: BTreeMap::new(),
            linrules: BTreeMap::new(),
        }
    }

    /// Adds a parameter type. Re-adding an identical declaration is a no-op.
    pub fn add_param(&mut self, decl: ParamTypeDecl) -> Result<(), GrammarError> {
        if let Some(existing) = self.params.iter().find(|p| p.name == decl.name) {
            if existing == &decl {
                return Ok(());
            }
            return Err(GrammarError::DuplicateName {
                kind: "parameter type",
                name: decl.name,
            });
        }
        for (i, v) in decl.values.iter().enumerate() {
            if self.index.owner.contains_key(v) {
                return Err(GrammarError::DuplicateName {
                    kind: "parameter value",
                    name: v.clone(),
                });
            }
            self.index.owner.insert(v.clone(), (decl.name.clone(), i));
        }
        self.index.types.insert(decl.name.clone(), decl.values.clone());
        self.params.push(decl);
        Ok(())
    }

    pub fn set_lincat(&mut self, cat: CategoryId, ty: LinType) {
        self.lincats.insert(cat, ty);
    }

    pub fn set_linrule(&mut self, rule: LinRule) {
        self.linrules.insert(rule.fun.clone(), rule);
    }

    pub fn params(&self) -> &[ParamTypeDecl] {
        &self.params
    }

    pub fn param_index(&self) -> &ParamIndex {
        &self.index
    }

    /// Lincat of `cat`; the built-in `String` category is `{ s : Str }`.
    pub fn lincat(&self, cat: &CategoryId) -> Option<LinType> {
        if cat.is_string() {
            return Some(LinType::plain());
        }
        self.lincats.get(cat).cloned()
    }

    pub fn lincat_ref(&self, cat: &CategoryId) -> Option<&LinType> {
        self.lincats.get(cat)
    }

    pub fn lincats(&self) -> impl Iterator<Item = (&CategoryId, &LinType)> {
        self.lincats.iter()
    }

    pub fn linrule(&self, fun: &str) -> Option<&LinRule> {
        self.linrules.get(fun)
    }

    pub fn linrules(&self) -> impl Iterator<Item = &LinRule> {
        self.linrules.values()
    }

    /// Validates against `sig` and annotates tables with their key types.
    /// Evaluation requires an elaborated grammar.
    pub fn elaborate(&mut self, sig: &AbstractSignature) -> Result<(), ValidationReport> {
        check::elaborate(self, sig)
    }
}

/// Str components of a lincat, as display labels like `s!Pos!Decl`, in
/// canonical depth-first order.
pub fn component_labels(ty: &LinType, params: &ParamIndex) -> Vec<String> {
    let mut out = Vec::new();
    collect_labels(ty, params, String::new(), &mut out, true);
    out
}

/// Parameter slots of a lincat: label and parameter type, depth-first.
pub fn param_slots(ty: &LinType, params: &ParamIndex) -> Vec<(String, String)> {
    let mut out = Vec::new();
    collect_params(ty, params, String::new(), &mut out);
    out
}

fn collect_labels(ty: &LinType, params: &ParamIndex, prefix: String, out: &mut Vec<String>, top: bool) {
    match ty {
        LinType::Str => out.push(if prefix.is_empty() { "s".to_string() } else { prefix }),
        LinType::Param(_) => {}
        LinType::Record(fields) => {
            for (n, t) in fields {
                let p = if top { n.clone() } else { format!("{prefix}.{n}") };
                collect_labels(t, params, p, out, false);
            }
        }
        LinType::Table(p, v) => {
            for value in params.values(p).unwrap_or(&[]) {
                collect_labels(v, params, format!("{prefix}!{value}"), out, false);
            }
        }
    }
}

fn collect_params(ty: &LinType, params: &ParamIndex, prefix: String, out: &mut Vec<(String, String)>) {
    match ty {
        LinType::Str => {}
        LinType::Param(p) => out.push((prefix, p.clone())),
        LinType::Record(fields) => {
            for (n, t) in fields {
                let p = if prefix.is_empty() { n.clone() } else { format!("{prefix}.{n}") };
                collect_params(t, params, p, out);
            }
        }
        LinType::Table(p, v) => {
            for value in params.values(p).unwrap_or(&[]) {
                collect_params(v, params, format!("{prefix}!{value}"), out);
            }
        }
    }
}
