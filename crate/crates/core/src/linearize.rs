//! Tree linearization with token provenance.

use std::ops::Range;

use thiserror::Error;

use crate::ast::{TreePath, TypedTree};
use crate::grammar::eval::{eval, Env, EvalError, LitChoice, Value};
use crate::grammar::{ConcreteGrammar, LinType};

/// A surface token together with the tree node whose rule emitted it.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProvToken {
    pub token: String,
    pub path: TreePath,
}

impl AsRef<str> for ProvToken {
    fn as_ref(&self) -> &str {
        &self.token
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinearizeError {
    #[error("no lin rule for `{0}`")]
    MissingLinRule(String),
    #[error("no lincat for `{0}`")]
    MissingLincat(String),
    #[error("category `{0}` has no start field `s : Str`")]
    NoStartField(String),
    #[error("evaluation failed at {path}: {source}")]
    Eval { path: TreePath, source: EvalError },
}

/// Evaluates the concrete-syntax value of every node bottom-up.
pub fn eval_lin(tree: &TypedTree, conc: &ConcreteGrammar) -> Result<Value<ProvToken>, LinearizeError> {
    eval_at(tree, conc, &TreePath::root())
}

fn eval_at(tree: &TypedTree, conc: &ConcreteGrammar, path: &TreePath) -> Result<Value<ProvToken>, LinearizeError> {
    let (fun, children) = match tree {
        TypedTree::Lit(s) => {
            let toks = s
                .split_whitespace()
                .map(|t| ProvToken {
                    token: t.to_string(),
                    path: path.clone(),
                })
                .collect();
            return Ok(Value::Record(vec![("s".to_string(), Value::Str(toks))]));
        }
        TypedTree::App { fun, children, .. } => (fun, children),
    };
    let rule = conc
        .linrule(fun)
        .ok_or_else(|| LinearizeError::MissingLinRule(fun.clone()))?;
    let mut args = Vec::with_capacity(children.len());
    let mut literals = Vec::with_capacity(children.len());
    for (i, c) in children.iter().enumerate() {
        args.push(eval_at(c, conc, &path.child(i))?);
        literals.push(match c {
            TypedTree::Lit(s) => Some(LitChoice::Known(s.clone())),
            TypedTree::App { .. } => None,
        });
    }
    let token = |t: &str| ProvToken {
        token: t.to_string(),
        path: path.clone(),
    };
    let env = Env {
        params: conc.param_index(),
        args: &args,
        literals: &literals,
        token: &token,
    };
    eval(&rule.body, &env).map_err(|source| LinearizeError::Eval {
        path: path.clone(),
        source,
    })
}

/// Whether a lincat has a usable start field.
pub fn has_start_field(ty: &LinType) -> bool {
    matches!(ty, LinType::Str) || matches!(ty.field("s"), Some(LinType::Str))
}

/// The token sequence of the start field `s`.
pub fn linearize(tree: &TypedTree, conc: &ConcreteGrammar) -> Result<Vec<ProvToken>, LinearizeError> {
    let cat = tree.category();
    let ty = conc
        .lincat(&cat)
        .ok_or_else(|| LinearizeError::MissingLincat(cat.to_string()))?;
    if !has_start_field(&ty) {
        return Err(LinearizeError::NoStartField(cat.to_string()));
    }
    match eval_lin(tree, conc)? {
        Value::Str(toks) => Ok(toks),
        v => match v.field("s") {
            Some(Value::Str(toks)) => Ok(toks.clone()),
            _ => Err(LinearizeError::NoStartField(cat.to_string())),
        },
    }
}

/// Convenience wrapper returning the surface string.
pub fn linearize_text(tree: &TypedTree, conc: &ConcreteGrammar) -> Result<String, LinearizeError> {
    Ok(detokenize(&linearize(tree, conc)?).text)
}

fn is_punctuation(token: &str) -> bool {
    matches!(token, "." | "?" | "!" | ",")
}

/// A joined string with one character range per input token.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Detokenized {
    pub text: String,
    /// Offsets count Unicode scalar values, not bytes.
    pub spans: Vec<Range<usize>>,
}

/// Joins tokens with single spaces, attaching `. ? ! ,` to the preceding token.
pub fn detokenize<T: AsRef<str>>(tokens: &[T]) -> Detokenized {
    let mut text = String::new();
    let mut spans = Vec::with_capacity(tokens.len());
    let mut len = 0;
    for (i, t) in tokens.iter().enumerate() {
        let t = t.as_ref();
        if i > 0 && !is_punctuation(t) {
            text.push(' ');
            len += 1;
        }
        let n = t.chars().count();
        text.push_str(t);
        spans.push(len..len + n);
        len += n;
    }
    Detokenized { text, spans }
}
