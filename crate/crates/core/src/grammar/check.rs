//! Static checking of concrete grammars against their abstract signature.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::ast::{AbstractSignature, CategoryId};

use super::{ConcreteGrammar, LinExpr, LinType, ParamIndex, Pattern};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ValidationIssue {
    #[error("concrete grammar is of `{got}`, expected `{expected}`")]
    AbstractMismatch { expected: String, got: String },
    #[error("category `{0}` has no lincat")]
    MissingLincat(String),
    #[error("lincat for undeclared category `{0}`")]
    ExtraLincat(String),
    #[error("function `{0}` has no lin rule")]
    MissingLinRule(String),
    #[error("lin rule for undeclared function `{0}`")]
    ExtraLinRule(String),
    #[error("lin rule `{function}` binds {got} arguments, the function takes {expected}")]
    ArityMismatch {
        function: String,
        expected: usize,
        got: usize,
    },
    #[error("unknown parameter type `{name}` in {context}")]
    UnknownParamType { context: String, name: String },
    #[error("unknown parameter value `{value}` in `{function}`")]
    UnknownParamValue { function: String, value: String },
    #[error("type error in `{function}` at {path}: expected {expected}, got {got}")]
    LinTypeError {
        function: String,
        path: String,
        expected: String,
        got: String,
    },
    #[error("table in `{function}` at {path} has no branch for `{value}`")]
    MissingBranch {
        function: String,
        path: String,
        value: String,
    },
    #[error("in `{function}` at {path}: {message}")]
    InvalidExpr {
        function: String,
        path: String,
        message: String,
    },
}

/// All problems found in one concrete grammar.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.issues.is_empty() {
            return f.write_str("no issues");
        }
        let parts: Vec<String> = self.issues.iter().map(|i| i.to_string()).collect();
        f.write_str(&parts.join("; "))
    }
}

impl std::error::Error for ValidationReport {}

/// Checks `conc` against `sig` without modifying it.
pub fn validate_concrete(conc: &ConcreteGrammar, sig: &AbstractSignature) -> ValidationReport {
    let mut copy = conc.clone();
    match check_and_annotate(&mut copy, sig) {
        Ok(()) => ValidationReport::default(),
        Err(r) => r,
    }
}

pub(super) fn elaborate(conc: &mut ConcreteGrammar, sig: &AbstractSignature) -> Result<(), ValidationReport> {
    check_and_annotate(conc, sig)
}

fn check_and_annotate(conc: &mut ConcreteGrammar, sig: &AbstractSignature) -> Result<(), ValidationReport> {
    let mut issues = Vec::new();
    if conc.of != sig.name() {
        issues.push(ValidationIssue::AbstractMismatch {
            expected: sig.name().to_string(),
            got: conc.of.clone(),
        });
    }
    for cat in sig.categories() {
        if conc.lincat_ref(cat).is_none() {
            issues.push(ValidationIssue::MissingLincat(cat.to_string()));
        }
    }
    for (cat, ty) in conc.lincats() {
        if !sig.has_category(cat) || cat.is_string() {
            issues.push(ValidationIssue::ExtraLincat(cat.to_string()));
        }
        check_lintype(ty, &conc.index, &format!("lincat {cat}"), &mut issues);
    }
    for f in sig.functions() {
        if conc.linrule(&f.name).is_none() {
            issues.push(ValidationIssue::MissingLinRule(f.name.clone()));
        }
    }
    let names: Vec<String> = conc.linrules.keys().cloned().collect();
    for name in names {
        let Some(decl) = sig.function(&name) else {
            issues.push(ValidationIssue::ExtraLinRule(name));
            continue;
        };
        let rule = &conc.linrules[&name];
        if rule.args.len() != decl.arity() {
            issues.push(ValidationIssue::ArityMismatch {
                function: name.clone(),
                expected: decl.arity(),
                got: rule.args.len(),
            });
            continue;
        }
        let arg_types: Option<Vec<LinType>> = decl.args.iter().map(|c| conc.lincat(c)).collect();
        let (Some(arg_types), Some(result)) = (arg_types, conc.lincat(&decl.result)) else {
            continue;
        };
        let mut body = rule.body.clone();
        let mut checker = Checker {
            function: &name,
            params: &conc.index,
            arg_types: &arg_types,
            arg_cats: &decl.args,
            vars: HashMap::new(),
            issues: &mut issues,
        };
        checker.check(&mut body, &result, "root");
        conc.linrules.get_mut(&name).expect("rule exists").body = body;
    }
    if issues.is_empty() {
        Ok(())
    } else {
        Err(ValidationReport { issues })
    }
}

fn check_lintype(ty: &LinType, params: &ParamIndex, context: &str, issues: &mut Vec<ValidationIssue>) {
    match ty {
        LinType::Str => {}
        LinType::Param(p) => {
            if !params.contains_type(p) {
                issues.push(ValidationIssue::UnknownParamType {
                    context: context.to_string(),
                    name: p.clone(),
                });
            }
        }
        LinType::Record(fields) => {
            for (_, t) in fields {
                check_lintype(t, params, context, issues);
            }
        }
        LinType::Table(p, v) => {
            check_lintype(&LinType::Param(p.clone()), params, context, issues);
            check_lintype(v, params, context, issues);
        }
    }
}

struct Checker<'a> {
    function: &'a str,
    params: &'a ParamIndex,
    arg_types: &'a [LinType],
    arg_cats: &'a [CategoryId],
    vars: HashMap<String, Vec<String>>,
    issues: &'a mut Vec<ValidationIssue>,
}

impl Checker<'_> {
    fn invalid(&mut self, path: &str, message: impl Into<String>) {
        self.issues.push(ValidationIssue::InvalidExpr {
            function: self.function.to_string(),
            path: path.to_string(),
            message: message.into(),
        });
    }

    fn mismatch(&mut self, path: &str, expected: &LinType, got: &LinType) {
        self.issues.push(ValidationIssue::LinTypeError {
            function: self.function.to_string(),
            path: path.to_string(),
            expected: expected.to_string(),
            got: got.to_string(),
        });
    }

    fn check(&mut self, e: &mut LinExpr, expected: &LinType, path: &str) {
        match (e, expected) {
            (LinExpr::Concat(a, b), LinType::Str) => {
                self.check(a, &LinType::Str, path);
                self.check(b, &LinType::Str, path);
            }
            (LinExpr::Record(fields), LinType::Record(tys)) => {
                for (name, ty) in tys {
                    let sub = field_path(path, name);
                    match fields.iter_mut().find(|(n, _)| n == name) {
                        Some((_, fe)) => self.check(fe, ty, &sub),
                        None => self.issues.push(ValidationIssue::LinTypeError {
                            function: self.function.to_string(),
                            path: sub,
                            expected: ty.to_string(),
                            got: "nothing".to_string(),
                        }),
                    }
                }
                for (name, _) in fields.iter() {
                    if !tys.iter().any(|(n, _)| n == name) {
                        let sub = field_path(path, name);
                        self.invalid(&sub, format!("field `{name}` is not part of {expected}"));
                    }
                }
            }
            (LinExpr::Table { key, branches }, LinType::Table(p, v)) => {
                *key = Some(p.clone());
                self.check_table(branches, p, v, path);
            }
            (LinExpr::LitCase { arg, branches, default }, _) => {
                self.check_lit_arg(*arg, path);
                for (_, b) in branches.iter_mut() {
                    self.check(b, expected, path);
                }
                self.check(default, expected, path);
            }
            (e, _) => {
                if let Some(got) = self.infer(e, path) {
                    if !got.same_as(expected) {
                        self.mismatch(path, expected, &got);
                    }
                }
            }
        }
    }

    fn check_lit_arg(&mut self, arg: usize, path: &str) {
        if !self.arg_cats.get(arg).is_some_and(CategoryId::is_string) {
            self.invalid(path, "`case` requires a String argument");
        }
    }

    fn check_table(&mut self, branches: &mut [(Pattern, LinExpr)], p: &str, v: &LinType, path: &str) {
        let Some(values) = self.params.values(p).map(<[String]>::to_vec) else {
            self.issues.push(ValidationIssue::UnknownParamType {
                context: format!("`{}`", self.function),
                name: p.to_string(),
            });
            return;
        };
        let mut covered = vec![false; values.len()];
        for (pat, body) in branches.iter_mut() {
            let sub = format!("{path}!{pat}");
            match pat {
                Pattern::Value(val) => match values.iter().position(|x| x == val) {
                    Some(i) => covered[i] = true,
                    None => {
                        if self.params.lookup(val).is_none() {
                            self.issues.push(ValidationIssue::UnknownParamValue {
                                function: self.function.to_string(),
                                value: val.clone(),
                            });
                        } else {
                            self.invalid(&sub, format!("`{val}` is not a value of {p}"));
                        }
                    }
                },
                Pattern::Var(_) | Pattern::Wildcard => covered.iter_mut().for_each(|c| *c = true),
            }
            if let Pattern::Var(name) = pat {
                let name = name.clone();
                self.vars.entry(name.clone()).or_default().push(p.to_string());
                self.check(body, v, &sub);
                self.vars.get_mut(&name).expect("pushed").pop();
            } else {
                self.check(body, v, &sub);
            }
        }
        for (i, c) in covered.iter().enumerate() {
            if !c {
                self.issues.push(ValidationIssue::MissingBranch {
                    function: self.function.to_string(),
                    path: path.to_string(),
                    value: values[i].clone(),
                });
            }
        }
    }

    /// Key type of a table literal, when its patterns determine one.
    fn pattern_key(&self, branches: &[(Pattern, LinExpr)]) -> Option<String> {
        branches.iter().find_map(|(p, _)| match p {
            Pattern::Value(v) => self.params.lookup(v).map(|(t, _)| t.to_string()),
            _ => None,
        })
    }

    fn infer(&mut self, e: &mut LinExpr, path: &str) -> Option<LinType> {
        match e {
            LinExpr::Str(_) => Some(LinType::Str),
            LinExpr::Concat(..) => {
                self.check(e, &LinType::Str, path);
                Some(LinType::Str)
            }
            LinExpr::Arg(i) => match self.arg_types.get(*i) {
                Some(t) => Some(t.clone()),
                None => {
                    self.invalid(path, format!("argument {i} out of range"));
                    None
                }
            },
            LinExpr::Var(v) => match self.vars.get(v.as_str()).and_then(|s| s.last()) {
                Some(t) => Some(LinType::Param(t.clone())),
                None => {
                    self.invalid(path, format!("unbound variable `{v}`"));
                    None
                }
            },
            LinExpr::Param(v) => match self.params.lookup(v) {
                Some((t, _)) => Some(LinType::Param(t.to_string())),
                None => {
                    self.issues.push(ValidationIssue::UnknownParamValue {
                        function: self.function.to_string(),
                        value: v.clone(),
                    });
                    None
                }
            },
            LinExpr::Project(inner, field) => {
                let t = self.infer(inner, path)?;
                match t.field(field) {
                    Some(ft) => Some(ft.clone()),
                    None => {
                        self.invalid(path, format!("no field `{field}` in {t}"));
                        None
                    }
                }
            }
            LinExpr::Select(table, key) => {
                let table_ty = match &**table {
                    LinExpr::Table { key: None, branches } => {
                        let kt = match self.pattern_key(branches) {
                            Some(k) => Some(k),
                            None => match self.infer(key, path)? {
                                LinType::Param(p) => Some(p),
                                other => {
                                    self.invalid(path, format!("selector has type {other}, expected a parameter"));
                                    return None;
                                }
                            },
                        };
                        let kt = kt?;
                        if let LinExpr::Table { key: k, branches } = &mut **table {
                            *k = Some(kt.clone());
                            let v = self.infer_branches(branches, &kt, path)?;
                            Some(LinType::Table(kt, Box::new(v)))
                        } else {
                            None
                        }
                    }
                    _ => self.infer(table, path),
                }?;
                match table_ty {
                    LinType::Table(p, v) => {
                        self.check(key, &LinType::Param(p), path);
                        Some(*v)
                    }
                    other => {
                        self.invalid(path, format!("selection from {other}, which is not a table"));
                        None
                    }
                }
            }
            LinExpr::Table { key, branches } => {
                let kt = match key.clone().or_else(|| self.pattern_key(branches)) {
                    Some(k) => k,
                    None => {
                        self.invalid(path, "cannot determine the parameter type of this table");
                        return None;
                    }
                };
                *key = Some(kt.clone());
                let v = self.infer_branches(branches, &kt, path)?;
                Some(LinType::Table(kt, Box::new(v)))
            }
            LinExpr::Record(fields) => {
                let mut out = Vec::new();
                for (n, fe) in fields.iter_mut() {
                    let sub = field_path(path, n);
                    out.push((n.clone(), self.infer(fe, &sub)?));
                }
                Some(LinType::Record(out))
            }
            LinExpr::LitCase { arg, branches, default } => {
                self.check_lit_arg(*arg, path);
                let t = self.infer(default, path)?;
                for (_, b) in branches.iter_mut() {
                    self.check(b, &t, path);
                }
                Some(t)
            }
        }
    }

    /// Infers the value type from the first branch, then checks the whole
    /// table against it.
    fn infer_branches(&mut self, branches: &mut [(Pattern, LinExpr)], key: &str, path: &str) -> Option<LinType> {
        let (pat, first) = branches.first_mut()?;
        let bound = if let Pattern::Var(n) = pat { Some(n.clone()) } else { None };
        if let Some(n) = &bound {
            self.vars.entry(n.clone()).or_default().push(key.to_string());
        }
        let v = self.infer(first, path);
        if let Some(n) = &bound {
            self.vars.get_mut(n).expect("pushed").pop();
        }
        let v = v?;
        self.check_table(branches, key, &v, path);
        Some(v)
    }
}

fn field_path(path: &str, field: &str) -> String {
    if path == "root" {
        field.to_string()
    } else {
        format!("{path}.{field}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::{parse_abstract, parse_concrete_unchecked};

    const ABS: &str = r#"abstract A {
        flags startcat = S ;
        cat S ; NP ; Numeral ;
        fun pred : NP -> S ;
        fun john : NP ;
        fun num : String -> Numeral ;
    }"#;

    fn report(conc: &str) -> ValidationReport {
        let sig = parse_abstract(ABS).unwrap();
        let c = parse_concrete_unchecked(conc).unwrap();
        validate_concrete(&c, &sig)
    }

    #[test]
    fn valid_grammar() {
        let r = report(
            r#"concrete AEng of A {
            param Number = Sg | Pl ;
            lincat S = { s : Str } ; NP = { s : Str ; n : Number } ; Numeral = { s : Str ; n : Number } ;
            lin pred np = { s = np.s ++ table { Sg => "sleeps" ; Pl => "sleep" } ! np.n } ;
            lin john = { s = "John" ; n = Sg } ;
            lin num d = case d of { "1" => { s = "one" ; n = Sg } ; _ => { s = d.s ; n = Pl } } ;
        }"#,
        );
        assert!(r.is_ok(), "{r}");
    }

    #[test]
    fn missing_pieces_are_all_reported() {
        let r = report(
            r#"concrete AEng of A {
            lincat S = { s : Str } ; NP = { s : Str } ;
            lin pred np = { s = np.s } ;
        }"#,
        );
        assert!(r.issues.contains(&ValidationIssue::MissingLincat("Numeral".into())));
        assert!(r.issues.contains(&ValidationIssue::MissingLinRule("john".into())));
        assert!(r.issues.contains(&ValidationIssue::MissingLinRule("num".into())));
    }

    #[test]
    fn type_error_names_rule_and_path() {
        let r = report(
            r#"concrete AEng of A {
            param Number = Sg | Pl ;
            lincat S = { s : Str } ; NP = { s : Str ; n : Number } ; Numeral = { s : Str } ;
            lin pred np = { s = np.n } ;
            lin john = { s = "John" ; n = Sg } ;
            lin num d = d ;
        }"#,
        );
        assert_eq!(
            r.issues,
            vec![ValidationIssue::LinTypeError {
                function: "pred".into(),
                path: "s".into(),
                expected: "Str".into(),
                got: "Number".into()
            }]
        );
    }

    #[test]
    fn incomplete_table() {
        let r = report(
            r#"concrete AEng of A {
            param Number = Sg | Pl ;
            lincat S = { s : Str } ; NP = { s : Number => Str } ; Numeral = { s : Str } ;
            lin pred np = { s = np.s ! Sg } ;
            lin john = { s = table { Sg => "John" } } ;
            lin num d = d ;
        }"#,
        );
        assert_eq!(
            r.issues,
            vec![ValidationIssue::MissingBranch {
                function: "john".into(),
                path: "s".into(),
                value: "Pl".into()
            }]
        );
    }

    #[test]
    fn elaboration_fills_table_keys() {
        let sig = parse_abstract(ABS).unwrap();
        let mut c = parse_concrete_unchecked(
            r#"concrete AEng of A {
            param Number = Sg | Pl ;
            lincat S = { s : Str } ; NP = { s : Number => Str ; n : Number } ; Numeral = { s : Str } ;
            lin pred np = { s = np.s ! np.n } ;
            lin john = { s = table { n => "John" } ; n = Sg } ;
            lin num d = d ;
        }"#,
        )
        .unwrap();
        c.elaborate(&sig).unwrap();
        let LinExpr::Record(fields) = &c.linrule("john").unwrap().body else { panic!() };
        assert!(matches!(&fields[0].1, LinExpr::Table { key: Some(k), .. } if k == "Number"));
    }
}
