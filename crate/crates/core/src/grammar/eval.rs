//! Evaluation of linearization rules.
//!
//! The evaluator is generic over the token type `S` so the same code drives
//! plain linearization (tokens carrying provenance) and grammar compilation
//! (tokens that are either literals or references to argument components).

use thiserror::Error;

use super::{LinExpr, LinType, ParamIndex, Pattern};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Value<S> {
    Str(Vec<S>),
    /// Index of the value within its parameter type.
    Param(usize),
    Record(Vec<(String, Value<S>)>),
    /// One entry per value of the key type, in declaration order.
    Table(Vec<Value<S>>),
}

impl<S> Value<S> {
    pub fn field(&self, name: &str) -> Option<&Value<S>> {
        match self {
            Value::Record(fields) => fields.iter().find(|(n, _)| n == name).map(|(_, v)| v),
            _ => None,
        }
    }
}

/// What is known about the text of a `String` argument.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LitChoice {
    Known(String),
    /// Any text not matched by an explicit `case` branch.
    Other,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("malformed value: {0}")]
    Malformed(String),
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("unknown parameter value `{0}`")]
    UnknownParam(String),
    #[error("table without key type; elaborate the grammar first")]
    Unelaborated,
}

/// Inputs for evaluating one rule body.
pub struct Env<'a, S> {
    pub params: &'a ParamIndex,
    pub args: &'a [Value<S>],
    /// For each argument: the literal text if it is a `String` argument.
    pub literals: &'a [Option<LitChoice>],
    /// Turns a token written in the rule into an `S`.
    pub token: &'a dyn Fn(&str) -> S,
}

pub fn eval<S: Clone>(expr: &LinExpr, env: &Env<'_, S>) -> Result<Value<S>, EvalError> {
    let mut vars = Vec::new();
    eval_in(expr, env, &mut vars)
}

fn eval_in<S: Clone>(expr: &LinExpr, env: &Env<'_, S>, vars: &mut Vec<(String, usize)>) -> Result<Value<S>, EvalError> {
    match expr {
        LinExpr::Str(toks) => Ok(Value::Str(toks.iter().map(|t| (env.token)(t)).collect())),
        LinExpr::Concat(a, b) => {
            let (Value::Str(mut x), Value::Str(y)) = (eval_in(a, env, vars)?, eval_in(b, env, vars)?) else {
                return Err(EvalError::Malformed("concatenation of non-strings".into()));
            };
            x.extend(y);
            Ok(Value::Str(x))
        }
        LinExpr::Arg(i) => env
            .args
            .get(*i)
            .cloned()
            .ok_or_else(|| EvalError::Malformed(format!("argument {i} out of range"))),
        LinExpr::Var(v) => vars
            .iter()
            .rev()
            .find(|(n, _)| n == v)
            .map(|(_, i)| Value::Param(*i))
            .ok_or_else(|| EvalError::Unbound(v.clone())),
        LinExpr::Param(v) => env
            .params
            .lookup(v)
            .map(|(_, i)| Value::Param(i))
            .ok_or_else(|| EvalError::UnknownParam(v.clone())),
        LinExpr::Project(inner, field) => match eval_in(inner, env, vars)? {
            Value::Record(fields) => fields
                .into_iter()
                .find(|(n, _)| n == field)
                .map(|(_, v)| v)
                .ok_or_else(|| EvalError::Malformed(format!("missing field `{field}`"))),
            _ => Err(EvalError::Malformed(format!("projection `.{field}` from a non-record"))),
        },
        LinExpr::Select(table, key) => {
            let Value::Param(k) = eval_in(key, env, vars)? else {
                return Err(EvalError::Malformed("selector is not a parameter".into()));
            };
            if let LinExpr::Table { key: Some(ty), branches } = &**table {
                return eval_branch(ty, branches, k, env, vars);
            }
            match eval_in(table, env, vars)? {
                Value::Table(mut entries) if k < entries.len() => Ok(entries.swap_remove(k)),
                _ => Err(EvalError::Malformed("selection from a non-table".into())),
            }
        }
        LinExpr::Table { key, branches } => {
            let ty = key.as_deref().ok_or(EvalError::Unelaborated)?;
            let n = env.params.values(ty).map(<[String]>::len).unwrap_or(0);
            let entries = (0..n)
                .map(|k| eval_branch(ty, branches, k, env, vars))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Value::Table(entries))
        }
        LinExpr::Record(fields) => {
            let mut out = Vec::with_capacity(fields.len());
            for (n, e) in fields {
                out.push((n.clone(), eval_in(e, env, vars)?));
            }
            Ok(Value::Record(out))
        }
        LinExpr::LitCase { arg, branches, default } => {
            let body = match env.literals.get(*arg) {
                Some(Some(LitChoice::Known(text))) => {
                    branches.iter().find(|(k, _)| k == text).map(|(_, e)| e).unwrap_or(default)
                }
                Some(Some(LitChoice::Other)) => default,
                _ => return Err(EvalError::Malformed(format!("argument {arg} is not a string literal"))),
            };
            eval_in(body, env, vars)
        }
    }
}

fn eval_branch<S: Clone>(
    ty: &str,
    branches: &[(Pattern, LinExpr)],
    k: usize,
    env: &Env<'_, S>,
    vars: &mut Vec<(String, usize)>,
) -> Result<Value<S>, EvalError> {
    let name = env
        .params
        .value_name(ty, k)
        .ok_or_else(|| EvalError::Malformed(format!("{ty} has no value #{k}")))?;
    for (pat, body) in branches {
        match pat {
            Pattern::Value(v) if v == name => return eval_in(body, env, vars),
            Pattern::Wildcard => return eval_in(body, env, vars),
            Pattern::Var(v) => {
                vars.push((v.clone(), k));
                let r = eval_in(body, env, vars);
                vars.pop();
                return r;
            }
            Pattern::Value(_) => {}
        }
    }
    Err(EvalError::Malformed(format!("no branch for `{name}`")))
}

/// Splits a value of type `ty` into its string components and parameter
/// slots, in the order of [`super::component_labels`] and
/// [`super::param_slots`].
pub fn flatten<S: Clone>(value: &Value<S>, ty: &LinType) -> Result<(Vec<Vec<S>>, Vec<usize>), EvalError> {
    let mut strs = Vec::new();
    let mut slots = Vec::new();
    flatten_into(value, ty, &mut strs, &mut slots)?;
    Ok((strs, slots))
}

fn flatten_into<S: Clone>(
    value: &Value<S>,
    ty: &LinType,
    strs: &mut Vec<Vec<S>>,
    slots: &mut Vec<usize>,
) -> Result<(), EvalError> {
    match (value, ty) {
        (Value::Str(s), LinType::Str) => strs.push(s.clone()),
        (Value::Param(i), LinType::Param(_)) => slots.push(*i),
        (Value::Record(_), LinType::Record(fields)) => {
            for (n, t) in fields {
                let v = value
                    .field(n)
                    .ok_or_else(|| EvalError::Malformed(format!("missing field `{n}`")))?;
                flatten_into(v, t, strs, slots)?;
            }
        }
        (Value::Table(entries), LinType::Table(_, t)) => {
            for e in entries {
                flatten_into(e, t, strs, slots)?;
            }
        }
        _ => return Err(EvalError::Malformed(format!("value does not have type {ty}"))),
    }
    Ok(())
}

/// Inverse of [`flatten`].
pub fn unflatten<S: Clone>(ty: &LinType, params: &ParamIndex, strs: &[Vec<S>], slots: &[usize]) -> Value<S> {
    let (mut si, mut pi) = (0, 0);
    unflatten_from(ty, params, strs, slots, &mut si, &mut pi)
}

fn unflatten_from<S: Clone>(
    ty: &LinType,
    params: &ParamIndex,
    strs: &[Vec<S>],
    slots: &[usize],
    si: &mut usize,
    pi: &mut usize,
) -> Value<S> {
    match ty {
        LinType::Str => {
            *si += 1;
            Value::Str(strs[*si - 1].clone())
        }
        LinType::Param(_) => {
            *pi += 1;
            Value::Param(slots[*pi - 1])
        }
        LinType::Record(fields) => Value::Record(
            fields
                .iter()
                .map(|(n, t)| (n.clone(), unflatten_from(t, params, strs, slots, si, pi)))
                .collect(),
        ),
        LinType::Table(p, t) => {
            let n = params.values(p).map(<[String]>::len).unwrap_or(0);
            Value::Table((0..n).map(|_| unflatten_from(t, params, strs, slots, si, pi)).collect())
        }
    }
}

/// Number of string components and parameter slots in a lincat.
pub fn shape(ty: &LinType, params: &ParamIndex) -> (usize, usize) {
    match ty {
        LinType::Str => (1, 0),
        LinType::Param(_) => (0, 1),
        LinType::Record(fields) => fields.iter().fold((0, 0), |(a, b), (_, t)| {
            let (x, y) = shape(t, params);
            (a + x, b + y)
        }),
        LinType::Table(p, t) => {
            let n = params.values(p).map(<[String]>::len).unwrap_or(0);
            let (x, y) = shape(t, params);
            (n * x, n * y)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::{ConcreteGrammar, ParamTypeDecl};

    fn index() -> ParamIndex {
        let mut c = ConcreteGrammar::new("X", "Y");
        c.add_param(ParamTypeDecl {
            name: "Number".into(),
            values: vec!["Sg".into(), "Pl".into()],
        })
        .unwrap();
        c.param_index().clone()
    }

    fn s(x: &str) -> LinExpr {
        LinExpr::Str(x.split_whitespace().map(str::to_string).collect())
    }

    #[test]
    fn table_selection_and_concat() {
        let params = index();
        let table = LinExpr::Table {
            key: Some("Number".into()),
            branches: vec![(Pattern::Value("Sg".into()), s("sleeps")), (Pattern::Wildcard, s("sleep"))],
        };
        let body = LinExpr::concat(
            LinExpr::project(LinExpr::Arg(0), "s"),
            LinExpr::select(table, LinExpr::project(LinExpr::Arg(0), "n")),
        );
        let arg = Value::Record(vec![("s".into(), Value::Str(vec!["they".to_string()])), ("n".into(), Value::Param(1))]);
        let token = |t: &str| t.to_string();
        let env = Env {
            params: &params,
            args: std::slice::from_ref(&arg),
            literals: &[None],
            token: &token,
        };
        assert_eq!(eval(&body, &env).unwrap(), Value::Str(vec!["they".to_string(), "sleep".to_string()]));
    }

    #[test]
    fn literal_case() {
        let params = index();
        let body = LinExpr::LitCase {
            arg: 0,
            branches: vec![("1".into(), s("one"))],
            default: Box::new(LinExpr::project(LinExpr::Arg(0), "s")),
        };
        let arg = Value::Record(vec![("s".into(), Value::Str(vec!["7".to_string()]))]);
        let token = |t: &str| t.to_string();
        let mut env = Env {
            params: &params,
            args: std::slice::from_ref(&arg),
            literals: &[Some(LitChoice::Known("7".into()))],
            token: &token,
        };
        assert_eq!(eval(&body, &env).unwrap(), Value::Str(vec!["7".to_string()]));
        let one = [Some(LitChoice::Known("1".into()))];
        env.literals = &one;
        assert_eq!(eval(&body, &env).unwrap(), Value::Str(vec!["one".to_string()]));
    }

    #[test]
    fn flatten_round_trip() {
        let params = index();
        let ty = LinType::record(vec![
            ("s", LinType::Table("Number".into(), Box::new(LinType::Str))),
            ("n", LinType::Param("Number".into())),
        ]);
        let v: Value<u8> = Value::Record(vec![
            ("n".into(), Value::Param(1)),
            ("s".into(), Value::Table(vec![Value::Str(vec![1]), Value::Str(vec![2, 3])])),
        ]);
        let (strs, slots) = flatten(&v, &ty).unwrap();
        assert_eq!(strs, vec![vec![1], vec![2, 3]]);
        assert_eq!(slots, vec![1]);
        assert_eq!(shape(&ty, &params), (2, 1));
        let back = unflatten(&ty, &params, &strs, &slots);
        assert_eq!(flatten(&back, &ty).unwrap(), (strs, slots));
    }
}
