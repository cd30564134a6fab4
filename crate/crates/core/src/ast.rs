//! Abstract syntax: categories, typed functions with costs and layer tags,
//! trees, type checking, tree costing and the canonical tree text format.
//!
//! The canonical text form is fully parenthesized prefix notation:
//! `(aged John (mkNumeral "65"))`. Nullary functions print bare, string
//! literals are double-quoted with `\"` and `\\` escapes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::iter::Sum;
use std::ops::Add;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use thiserror::Error;

/// Name of the built-in category whose values are string-literal leaves.
pub const STRING_CATEGORY: &str = "String";

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CategoryId(String);

impl CategoryId {
    pub fn new(name: impl Into<String>) -> Result<Self, SignatureError> {
        let name = name.into();
        if is_identifier(&name) {
            Ok(CategoryId(name))
        } else {
            Err(SignatureError::InvalidIdentifier(name))
        }
    }

    /// The built-in `String` category.
    pub fn string() -> Self {
        CategoryId(STRING_CATEGORY.to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_string(&self) -> bool {
        self.0 == STRING_CATEGORY
    }
}

impl fmt::Display for CategoryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for CategoryId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

/// Which confidence layer a function contributes to. `Neutral` functions
/// inherit the layer of their nearest tagged ancestor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum LayerTag {
    Semantic,
    Syntactic,
    Word,
    #[default]
    Neutral,
}

impl LayerTag {
    pub fn name(self) -> &'static str {
        match self {
            LayerTag::Semantic => "semantic",
            LayerTag::Syntactic => "syntactic",
            LayerTag::Word => "word",
            LayerTag::Neutral => "neutral",
        }
    }
}

impl FromStr for LayerTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "semantic" | "cnl" => Ok(LayerTag::Semantic),
            "syntactic" | "host" => Ok(LayerTag::Syntactic),
            "word" | "chunk" => Ok(LayerTag::Word),
            "neutral" => Ok(LayerTag::Neutral),
            other => Err(format!("unknown layer `{other}`")),
        }
    }
}

/// Non-negative additive weight, stored in fixed point (millionths) so that
/// sums are exact and independent of association order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cost(u64);

impl Cost {
    pub const ZERO: Cost = Cost(0);
    const SCALE: f64 = 1_000_000.0;

    pub fn from_f64(value: f64) -> Result<Cost, SignatureError> {
        if !value.is_finite() || value < 0.0 {
            return Err(SignatureError::NegativeCost(value));
        }
        Ok(Cost((value * Self::SCALE).round() as u64))
    }

    pub fn from_micros(units: u64) -> Cost {
        Cost(units)
    }

    pub fn micros(self) -> u64 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / Self::SCALE
    }
}

impl Add for Cost {
    type Output = Cost;
    fn add(self, rhs: Cost) -> Cost {
        Cost(self.0 + rhs.0)
    }
}

impl Sum for Cost {
    fn sum<I: Iterator<Item = Cost>>(iter: I) -> Cost {
        iter.fold(Cost::ZERO, Add::add)
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_f64())
    }
}

impl Serialize for Cost {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.as_f64())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunDecl {
    pub name: String,
    pub args: Vec<CategoryId>,
    pub result: CategoryId,
    pub cost: Cost,
    pub layer: LayerTag,
}

impl FunDecl {
    pub fn new(name: impl Into<String>, args: Vec<CategoryId>, result: CategoryId) -> FunDecl {
        FunDecl {
            name: name.into(),
            args,
            result,
            cost: Cost::from_micros(1_000_000),
            layer: LayerTag::Neutral,
        }
    }

    pub fn with_cost(mut self, cost: Cost) -> FunDecl {
        self.cost = cost;
        self
    }

    pub fn with_layer(mut self, layer: LayerTag) -> FunDecl {
        self.layer = layer;
        self
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }
}

impl fmt::Display for FunDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} :", self.name)?;
        for a in &self.args {
            write!(f, " {a} ->")?;
        }
        write!(f, " {}", self.result)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SignatureError {
    #[error("invalid identifier `{0}`")]
    InvalidIdentifier(String),
    #[error("duplicate category `{0}`")]
    DuplicateCategory(String),
    #[error("duplicate function `{0}`")]
    DuplicateFunction(String),
    #[error("function `{function}` refers to undeclared category `{category}`")]
    UnknownCategory { function: String, category: String },
    #[error("start category `{0}` is not declared")]
    UnknownStart(String),
    #[error("cost must be a non-negative number, got {0}")]
    NegativeCost(f64),
}

/// Accumulates categories and functions, then validates them into an
/// [`AbstractSignature`].
#[derive(Clone, Debug, Default)]
pub struct SignatureBuilder {
    name: String,
    categories: BTreeSet<CategoryId>,
    functions: BTreeMap<String, FunDecl>,
}

impl SignatureBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        SignatureBuilder {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn from_signature(sig: &AbstractSignature) -> Self {
        SignatureBuilder {
            name: sig.name.clone(),
            categories: sig.categories.clone(),
            functions: sig.functions.clone(),
        }
    }

    pub fn category(&mut self, cat: CategoryId) -> Result<&mut Self, SignatureError> {
        if cat.is_string() || !self.categories.insert(cat.clone()) {
            return Err(SignatureError::DuplicateCategory(cat.0));
        }
        Ok(self)
    }

    pub fn has_category(&self, cat: &CategoryId) -> bool {
        cat.is_string() || self.categories.contains(cat)
    }

    pub fn function(&mut self, decl: FunDecl) -> Result<&mut Self, SignatureError> {
        if !is_identifier(&decl.name) {
            return Err(SignatureError::InvalidIdentifier(decl.name));
        }
        if self.functions.contains_key(&decl.name) {
            return Err(SignatureError::DuplicateFunction(decl.name));
        }
        self.functions.insert(decl.name.clone(), decl);
        Ok(self)
    }

    pub fn has_function(&self, name: &str) -> bool {
        self.functions.contains_key(name)
    }

    pub fn build(self, start: CategoryId) -> Result<AbstractSignature, SignatureError> {
        if !self.categories.contains(&start) {
            return Err(SignatureError::UnknownStart(start.0));
        }
        for f in self.functions.values() {
            let result_ok = !f.result.is_string() && self.categories.contains(&f.result);
            if !result_ok {
                return Err(SignatureError::UnknownCategory {
                    function: f.name.clone(),
                    category: f.result.0.clone(),
                });
            }
            if let Some(bad) = f.args.iter().find(|a| !self.has_category(a)) {
                return Err(SignatureError::UnknownCategory {
                    function: f.name.clone(),
                    category: bad.0.clone(),
                });
            }
        }
        Ok(AbstractSignature {
            name: self.name,
            categories: self.categories,
            functions: self.functions,
            start,
        })
    }
}

/// The interlingua: categories, typed functions and a start category.
#[derive(Clone, Debug, PartialEq)]
pub struct AbstractSignature {
    name: String,
    categories: BTreeSet<CategoryId>,
    functions: BTreeMap<String, FunDecl>,
    start: CategoryId,
}

impl AbstractSignature {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn start(&self) -> &CategoryId {
        &self.start
    }

    pub fn categories(&self) -> impl Iterator<Item = &CategoryId> {
        self.categories.iter()
    }

    pub fn has_category(&self, cat: &CategoryId) -> bool {
        cat.is_string() || self.categories.contains(cat)
    }

    pub fn functions(&self) -> impl Iterator<Item = &FunDecl> {
        self.functions.values()
    }

    pub fn function(&self, name: &str) -> Option<&FunDecl> {
        self.functions.get(name)
    }

    pub fn category_count(&self) -> usize {
        self.categories.len()
    }

    pub fn function_count(&self) -> usize {
        self.functions.len()
    }

    /// Functions whose result is `cat`, in name order.
    pub fn producers<'a>(&'a self, cat: &'a CategoryId) -> impl Iterator<Item = &'a FunDecl> + 'a {
        self.functions.values().filter(move |f| &f.result == cat)
    }
}

/// Position of a node: the sequence of child indices from the root.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TreePath(pub Vec<usize>);

impl TreePath {
    pub fn root() -> Self {
        TreePath(Vec::new())
    }

    pub fn child(&self, i: usize) -> Self {
        let mut v = self.0.clone();
        v.push(i);
        TreePath(v)
    }

    pub fn parent(&self) -> Option<TreePath> {
        let mut v = self.0.clone();
        v.pop().map(|_| TreePath(v))
    }

    pub fn starts_with(&self, prefix: &TreePath) -> bool {
        self.0.starts_with(&prefix.0)
    }
}

impl fmt::Display for TreePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("root");
        }
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        f.write_str(&parts.join("."))
    }
}

/// An untyped function-application term.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tree {
    App { fun: String, children: Vec<Tree> },
    Lit(String),
}

impl Tree {
    pub fn leaf(fun: impl Into<String>) -> Tree {
        Tree::App {
            fun: fun.into(),
            children: Vec::new(),
        }
    }

    pub fn app(fun: impl Into<String>, children: Vec<Tree>) -> Tree {
        Tree::App {
            fun: fun.into(),
            children,
        }
    }

    pub fn lit(s: impl Into<String>) -> Tree {
        Tree::Lit(s.into())
    }

    pub fn fun(&self) -> Option<&str> {
        match self {
            Tree::App { fun, .. } => Some(fun),
            Tree::Lit(_) => None,
        }
    }

    pub fn children(&self) -> &[Tree] {
        match self {
            Tree::App { children, .. } => children,
            Tree::Lit(_) => &[],
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(Tree::size).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(Tree::depth).max().unwrap_or(0)
    }

    pub fn subtree(&self, path: &TreePath) -> Option<&Tree> {
        let mut t = self;
        for &i in &path.0 {
            t = t.children().get(i)?;
        }
        Some(t)
    }

    /// Whether any node applies `fun`.
    pub fn contains_fun(&self, fun: &str) -> bool {
        self.fun() == Some(fun) || self.children().iter().any(|c| c.contains_fun(fun))
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_tree(self))
    }
}

/// A tree annotated with the category of every node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TypedTree {
    App {
        fun: String,
        cat: CategoryId,
        children: Vec<TypedTree>,
    },
    Lit(String),
}

impl TypedTree {
    pub fn category(&self) -> CategoryId {
        match self {
            TypedTree::App { cat, .. } => cat.clone(),
            TypedTree::Lit(_) => CategoryId::string(),
        }
    }

    pub fn fun(&self) -> Option<&str> {
        match self {
            TypedTree::App { fun, .. } => Some(fun),
            TypedTree::Lit(_) => None,
        }
    }

    pub fn children(&self) -> &[TypedTree] {
        match self {
            TypedTree::App { children, .. } => children,
            TypedTree::Lit(_) => &[],
        }
    }

    pub fn subtree(&self, path: &TreePath) -> Option<&TypedTree> {
        let mut t = self;
        for &i in &path.0 {
            t = t.children().get(i)?;
        }
        Some(t)
    }

    pub fn to_tree(&self) -> Tree {
        match self {
            TypedTree::App { fun, children, .. } => Tree::App {
                fun: fun.clone(),
                children: children.iter().map(TypedTree::to_tree).collect(),
            },
            TypedTree::Lit(s) => Tree::Lit(s.clone()),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TypeError {
    #[error("unknown function `{name}` at {path}")]
    UnknownFunction { name: String, path: TreePath },
    #[error("arity mismatch at {path}: expected {expected} arguments, got {got}")]
    ArityMismatch {
        path: TreePath,
        expected: usize,
        got: usize,
    },
    #[error("category mismatch at {path}: expected {expected}, got {got}")]
    CategoryMismatch {
        path: TreePath,
        expected: CategoryId,
        got: CategoryId,
    },
}

/// Every typing failure found in one tree.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{}", .errors.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; "))]
pub struct TypeErrorReport {
    pub errors: Vec<TypeError>,
}

/// Type-checks `tree` against `sig`, annotating every node with its category.
pub fn check_tree(tree: &Tree, sig: &AbstractSignature) -> Result<TypedTree, TypeErrorReport> {
    let mut errors = Vec::new();
    let typed = check_node(tree, sig, &TreePath::root(), &mut errors);
    match typed {
        Some(t) if errors.is_empty() => Ok(t),
        _ => Err(TypeErrorReport { errors }),
    }
}

/// Checks a tree and additionally requires its root to have category `expected`.
pub fn check_tree_as(
    tree: &Tree,
    expected: &CategoryId,
    sig: &AbstractSignature,
) -> Result<TypedTree, TypeErrorReport> {
    let typed = check_tree(tree, sig)?;
    if &typed.category() != expected {
        return Err(TypeErrorReport {
            errors: vec![TypeError::CategoryMismatch {
                path: TreePath::root(),
                expected: expected.clone(),
                got: typed.category(),
            }],
        });
    }
    Ok(typed)
}

fn node_category(tree: &Tree, sig: &AbstractSignature) -> Option<CategoryId> {
    match tree {
        Tree::Lit(_) => Some(CategoryId::string()),
        Tree::App { fun, .. } => sig.function(fun).map(|f| f.result.clone()),
    }
}

fn check_node(
    tree: &Tree,
    sig: &AbstractSignature,
    path: &TreePath,
    errors: &mut Vec<TypeError>,
) -> Option<TypedTree> {
    let (fun, children) = match tree {
        Tree::Lit(s) => return Some(TypedTree::Lit(s.clone())),
        Tree::App { fun, children } => (fun, children),
    };
    let Some(decl) = sig.function(fun) else {
        errors.push(TypeError::UnknownFunction {
            name: fun.clone(),
            path: path.clone(),
        });
        // keep going so that problems below this node are reported too
        for (i, c) in children.iter().enumerate() {
            check_node(c, sig, &path.child(i), errors);
        }
        return None;
    };
    if decl.arity() != children.len() {
        errors.push(TypeError::ArityMismatch {
            path: path.clone(),
            expected: decl.arity(),
            got: children.len(),
        });
    }
    let mut typed_children = Vec::with_capacity(children.len());
    let mut ok = decl.arity() == children.len();
    for (i, child) in children.iter().enumerate() {
        let child_path = path.child(i);
        if let (Some(expected), Some(got)) = (decl.args.get(i), node_category(child, sig)) {
            if expected != &got {
                errors.push(TypeError::CategoryMismatch {
                    path: child_path.clone(),
                    expected: expected.clone(),
                    got,
                });
                ok = false;
            }
        }
        match check_node(child, sig, &child_path, errors) {
            Some(t) => typed_children.push(t),
            None => ok = false,
        }
    }
    ok.then(|| TypedTree::App {
        fun: fun.clone(),
        cat: decl.result.clone(),
        children: typed_children,
    })
}

/// Sum of function costs over all nodes. Literal leaves cost nothing.
pub fn tree_cost(tree: &TypedTree, sig: &AbstractSignature) -> Cost {
    match tree {
        TypedTree::Lit(_) => Cost::ZERO,
        TypedTree::App { fun, children, .. } => {
            let own = sig.function(fun).map(|f| f.cost).unwrap_or(Cost::ZERO);
            own + children.iter().map(|c| tree_cost(c, sig)).sum::<Cost>()
        }
    }
}

pub(crate) fn write_literal(out: &mut String, s: &str) {
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
}

/// Canonical text form of a tree.
pub fn serialize_tree(tree: &Tree) -> String {
    let mut out = String::new();
    write_tree(&mut out, tree);
    out
}

fn write_tree(out: &mut String, tree: &Tree) {
    match tree {
        Tree::Lit(s) => write_literal(out, s),
        Tree::App { fun, children } if children.is_empty() => out.push_str(fun),
        Tree::App { fun, children } => {
            out.push('(');
            out.push_str(fun);
            for c in children {
                out.push(' ');
                write_tree(out, c);
            }
            out.push(')');
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeParseError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error(transparent)]
    Type(#[from] TypeErrorReport),
}

/// Parses the canonical text form without consulting a signature.
pub fn parse_tree_text(text: &str) -> Result<Tree, TreeParseError> {
    let mut p = TreeReader { src: text, pos: 0 };
    p.skip_ws();
    let tree = p.tree()?;
    p.skip_ws();
    if p.pos != text.len() {
        return Err(p.error("trailing input"));
    }
    Ok(tree)
}

/// Parses the canonical text form and type-checks the result.
pub fn parse_tree(text: &str, sig: &AbstractSignature) -> Result<Tree, TreeParseError> {
    let tree = parse_tree_text(text)?;
    check_tree(&tree, sig)?;
    Ok(tree)
}

struct TreeReader<'a> {
    src: &'a str,
    pos: usize,
}

impl TreeReader<'_> {
    fn error(&self, message: &str) -> TreeParseError {
        TreeParseError::Syntax {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn ident(&mut self) -> Result<String, TreeParseError> {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                self.pos += 1;
            } else {
                break;
            }
        }
        let name = &self.src[start..self.pos];
        if !is_identifier(name) {
            self.pos = start;
            return Err(self.error("expected function name"));
        }
        Ok(name.to_string())
    }

    fn literal(&mut self) -> Result<String, TreeParseError> {
        let start = self.pos;
        self.pos += 1;
        let mut out = String::new();
        loop {
            match self.peek() {
                None => {
                    self.pos = start;
                    return Err(self.error("unterminated string literal"));
                }
                Some('"') => {
                    self.pos += 1;
                    return Ok(out);
                }
                Some('\\') => {
                    self.pos += 1;
                    match self.peek() {
                        Some(c @ ('"' | '\\')) => {
                            out.push(c);
                            self.pos += 1;
                        }
                        _ => return Err(self.error("invalid escape")),
                    }
                }
                Some(c) => {
                    out.push(c);
                    self.pos += c.len_utf8();
                }
            }
        }
    }

    fn tree(&mut self) -> Result<Tree, TreeParseError> {
        match self.peek() {
            Some('"') => Ok(Tree::Lit(self.literal()?)),
            Some('(') => {
                self.pos += 1;
                self.skip_ws();
                let fun = self.ident()?;
                let mut children = Vec::new();
                loop {
                    self.skip_ws();
                    match self.peek() {
                        Some(')') => {
                            self.pos += 1;
                            return Ok(Tree::App { fun, children });
                        }
                        None => return Err(self.error("missing `)`")),
                        _ => children.push(self.tree()?),
                    }
                }
            }
            Some(_) => Ok(Tree::leaf(self.ident()?)),
            None => Err(self.error("unexpected end of input")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cat(s: &str) -> CategoryId {
        CategoryId::new(s).unwrap()
    }

    fn demo_sig() -> AbstractSignature {
        let mut b = SignatureBuilder::new("Age");
        for c in ["Person", "Numeral", "Fact"] {
            b.category(cat(c)).unwrap();
        }
        b.function(FunDecl::new("aged", vec![cat("Person"), cat("Numeral")], cat("Fact")).with_cost(Cost::from_f64(0.2).unwrap()))
            .unwrap();
        b.function(FunDecl::new("John", vec![], cat("Person")).with_cost(Cost::ZERO)).unwrap();
        b.function(FunDecl::new("n65", vec![], cat("Numeral")).with_cost(Cost::ZERO)).unwrap();
        b.function(FunDecl::new("mkNumeral", vec![CategoryId::string()], cat("Numeral"))).unwrap();
        b.build(cat("Fact")).unwrap()
    }

    #[test]
    fn aged_is_a_fact() {
        let sig = demo_sig();
        let t = Tree::app("aged", vec![Tree::leaf("John"), Tree::leaf("n65")]);
        assert_eq!(check_tree(&t, &sig).unwrap().category(), cat("Fact"));
    }

    #[test]
    fn leaf_is_a_person() {
        let sig = demo_sig();
        assert_eq!(check_tree(&Tree::leaf("John"), &sig).unwrap().category(), cat("Person"));
    }

    #[test]
    fn wrong_argument_category_is_reported_at_the_child() {
        let sig = demo_sig();
        let t = Tree::app("aged", vec![Tree::leaf("John"), Tree::leaf("John")]);
        let report = check_tree(&t, &sig).unwrap_err();
        assert_eq!(
            report.errors,
            vec![TypeError::CategoryMismatch {
                path: TreePath(vec![1]),
                expected: cat("Numeral"),
                got: cat("Person"),
            }]
        );
    }

    #[test]
    fn report_lists_every_failure() {
        let sig = demo_sig();
        let t = Tree::app("aged", vec![Tree::leaf("Bob"), Tree::app("n65", vec![Tree::leaf("John")])]);
        let report = check_tree(&t, &sig).unwrap_err();
        assert!(report.errors.contains(&TypeError::UnknownFunction {
            name: "Bob".into(),
            path: TreePath(vec![0])
        }));
        assert!(report.errors.contains(&TypeError::ArityMismatch {
            path: TreePath(vec![1]),
            expected: 0,
            got: 1
        }));
    }

    #[test]
    fn literal_only_where_string_expected() {
        let sig = demo_sig();
        let ok = Tree::app("mkNumeral", vec![Tree::lit("65")]);
        assert!(check_tree(&ok, &sig).is_ok());
        let bad = Tree::app("aged", vec![Tree::lit("John"), Tree::leaf("n65")]);
        assert!(check_tree(&bad, &sig).is_err());
    }

    #[test]
    fn costs_are_additive() {
        let sig = demo_sig();
        let leaf = check_tree(&Tree::leaf("John"), &sig).unwrap();
        assert_eq!(tree_cost(&leaf, &sig).as_f64(), 0.0);
        let t = check_tree(&Tree::app("aged", vec![Tree::leaf("John"), Tree::leaf("n65")]), &sig).unwrap();
        assert_eq!(tree_cost(&t, &sig).as_f64(), 0.2);
    }

    #[test]
    fn negative_cost_rejected() {
        assert!(matches!(Cost::from_f64(-0.5), Err(SignatureError::NegativeCost(_))));
        assert!(Cost::from_f64(f64::NAN).is_err());
    }

    #[test]
    fn canonical_form() {
        let t = Tree::app("aged", vec![Tree::leaf("John"), Tree::leaf("n65")]);
        assert_eq!(serialize_tree(&t), "(aged John n65)");
        let n = parse_tree_text(r#"(mkNumeral "65")"#).unwrap();
        assert_eq!(n, Tree::app("mkNumeral", vec![Tree::lit("65")]));
        let esc = Tree::app("mkNumeral", vec![Tree::lit(r#"a"b\c"#)]);
        assert_eq!(parse_tree_text(&serialize_tree(&esc)).unwrap(), esc);
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        assert_eq!(
            parse_tree_text("(aged John"),
            Err(TreeParseError::Syntax {
                offset: 10,
                message: "missing `)`".into()
            })
        );
        assert!(matches!(parse_tree_text("(aged John) x"), Err(TreeParseError::Syntax { offset: 12, .. })));
        assert!(matches!(parse_tree_text(""), Err(TreeParseError::Syntax { offset: 0, .. })));
    }

    #[test]
    fn parse_tree_type_checks() {
        let sig = demo_sig();
        assert!(parse_tree("(aged John n65)", &sig).is_ok());
        assert!(matches!(parse_tree("(aged John John)", &sig), Err(TreeParseError::Type(_))));
    }

    #[test]
    fn builder_rejects_bad_signatures() {
        let mut b = SignatureBuilder::new("X");
        b.category(cat("S")).unwrap();
        b.function(FunDecl::new("UseCNL", vec![cat("S_CNL")], cat("S"))).unwrap();
        assert_eq!(
            b.build(cat("S")),
            Err(SignatureError::UnknownCategory {
                function: "UseCNL".into(),
                category: "S_CNL".into()
            })
        );
        let mut b = SignatureBuilder::new("X");
        b.category(cat("S")).unwrap();
        b.function(FunDecl::new("f", vec![], cat("S"))).unwrap();
        assert!(matches!(
            b.function(FunDecl::new("f", vec![], cat("S"))),
            Err(SignatureError::DuplicateFunction(_))
        ));
    }
}
