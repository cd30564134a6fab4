use crate::ast::{AbstractSignature, CategoryId, Cost, FunDecl, LayerTag, SignatureBuilder};

use super::lexer::{lex, Lexeme, Tok};
use super::{ConcreteGrammar, GrammarError, LinExpr, LinRule, LinType, ParamTypeDecl, Pattern};

const KEYWORDS: &[&str] = &[
    "abstract", "concrete", "of", "flags", "cat", "fun", "param", "lincat", "lin", "table", "case", "Str",
];

struct Parser {
    toks: Vec<Lexeme>,
    pos: usize,
}

type PResult<T> = Result<T, GrammarError>;

impl Parser {
    fn new(src: &str) -> PResult<Self> {
        Ok(Parser { toks: lex(src)?, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn line(&self) -> usize {
        self.toks[self.pos].line
    }

    fn error<T>(&self, message: impl Into<String>) -> PResult<T> {
        let l = &self.toks[self.pos];
        Err(GrammarError::Syntax {
            line: l.line,
            col: l.col,
            message: message.into(),
        })
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.error(format!("expected `{s}`, found {}", describe(self.peek())))
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == kw)
    }

    fn at_decl_boundary(&self) -> bool {
        match self.peek() {
            Tok::Ident(x) => KEYWORDS.contains(&x.as_str()),
            Tok::Sym("}") | Tok::Eof => true,
            _ => false,
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> PResult<()> {
        if self.is_keyword(kw) {
            self.advance();
            Ok(())
        } else {
            self.error(format!("expected `{kw}`, found {}", describe(self.peek())))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(x) if !KEYWORDS.contains(&x.as_str()) => {
                self.advance();
                Ok(x)
            }
            other => self.error(format!("expected identifier, found {}", describe(&other))),
        }
    }

    fn category(&mut self) -> PResult<CategoryId> {
        let name = self.ident()?;
        CategoryId::new(name).or_else(|e| self.error(e.to_string()))
    }

    fn ident_list(&mut self) -> PResult<Vec<String>> {
        let mut names = vec![self.ident()?];
        while self.eat_sym(",") {
            names.push(self.ident()?);
        }
        Ok(names)
    }

    fn expect_end(&mut self) -> PResult<()> {
        self.expect_sym("}")?;
        if !matches!(self.peek(), Tok::Eof) {
            return self.error("unexpected input after the closing `}`");
        }
        Ok(())
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(x) => format!("`{x}`"),
        Tok::Str(s) => format!("string \"{s}\""),
        Tok::Num(n) => format!("number {n}"),
        Tok::Sym(s) => format!("`{s}`"),
        Tok::Eof => "end of input".to_string(),
    }
}

/// Parses and validates an abstract grammar. Costs default to 1.0 and
/// layers to neutral.
pub fn parse_abstract(source: &str) -> Result<AbstractSignature, GrammarError> {
    let mut p = Parser::new(source)?;
    p.expect_keyword("abstract")?;
    let name = p.ident()?;
    p.expect_sym("{")?;
    let mut builder = SignatureBuilder::new(name);
    let mut start: Option<CategoryId> = None;
    let mut decls: Vec<FunDecl> = Vec::new();

    loop {
        if p.is_keyword("flags") {
            p.advance();
            while !p.at_decl_boundary() {
                let flag = p.ident()?;
                p.expect_sym("=")?;
                let value = p.category()?;
                if flag != "startcat" {
                    return p.error(format!("unknown flag `{flag}`"));
                }
                start = Some(value);
                p.expect_sym(";")?;
            }
        } else if p.is_keyword("cat") {
            p.advance();
            while !p.at_decl_boundary() {
                for name in p.ident_list()? {
                    let cat = CategoryId::new(&name).or_else(|e| p.error(e.to_string()))?;
                    if cat.is_string() {
                        return Err(GrammarError::DuplicateName {
                            kind: "category",
                            name,
                        });
                    }
                    builder.category(cat)?;
                }
                p.expect_sym(";")?;
            }
        } else if p.is_keyword("fun") {
            p.advance();
            while !p.at_decl_boundary() {
                let names = p.ident_list()?;
                p.expect_sym(":")?;
                let mut cats = vec![p.category()?];
                while p.eat_sym("->") {
                    cats.push(p.category()?);
                }
                let result = cats.pop().expect("at least one category");
                let (cost, layer) = if p.is_sym("[") { annotations(&mut p)? } else { (None, None) };
                p.expect_sym(";")?;
                for name in names {
                    let mut decl = FunDecl::new(name, cats.clone(), result.clone());
                    if let Some(c) = cost {
                        decl.cost = c;
                    }
                    if let Some(l) = layer {
                        decl.layer = l;
                    }
                    decls.push(decl);
                }
            }
        } else if p.is_sym("}") {
            break;
        } else {
            return p.error(format!("expected a declaration, found {}", describe(p.peek())));
        }
    }
    p.expect_end()?;
    for decl in decls {
        builder.function(decl)?;
    }
    let Some(start) = start else {
        return Err(GrammarError::Syntax {
            line: 1,
            col: 1,
            message: "missing `flags startcat = <Cat> ;`".into(),
        });
    };
    Ok(builder.build(start)?)
}

fn annotations(p: &mut Parser) -> PResult<(Option<Cost>, Option<LayerTag>)> {
    p.expect_sym("[")?;
    let (mut cost, mut layer) = (None, None);
    loop {
        let key = p.ident()?;
        p.expect_sym("=")?;
        match key.as_str() {
            "cost" => {
                let Tok::Num(value) = p.advance() else {
                    return p.error("expected a number after `cost=`");
                };
                cost = Some(Cost::from_f64(value).map_err(|_| GrammarError::NegativeCost(value))?);
            }
            "layer" => {
                let v = p.ident()?;
                layer = Some(v.parse::<LayerTag>().or_else(|e| p.error(e))?);
            }
            other => return p.error(format!("unknown annotation `{other}`")),
        }
        if !p.eat_sym(",") {
            break;
        }
    }
    p.expect_sym("]")?;
    Ok((cost, layer))
}

/// Parses a concrete grammar and validates it against `sig`.
pub fn parse_concrete(source: &str, sig: &AbstractSignature) -> Result<ConcreteGrammar, GrammarError> {
    let mut conc = parse_concrete_unchecked(source)?;
    conc.elaborate(sig).map_err(GrammarError::Invalid)?;
    Ok(conc)
}

/// Parses a concrete grammar without checking it against a signature.
/// Used for partial rule sets that are merged into a larger grammar.
pub fn parse_concrete_unchecked(source: &str) -> Result<ConcreteGrammar, GrammarError> {
    let mut p = Parser::new(source)?;
    p.expect_keyword("concrete")?;
    let name = p.ident()?;
    p.expect_keyword("of")?;
    let of = p.ident()?;
    p.expect_sym("{")?;
    let mut conc = ConcreteGrammar::new(name, of);
    let mut seen_lincats = std::collections::BTreeSet::new();

    loop {
        if p.is_keyword("param") {
            p.advance();
            while !p.at_decl_boundary() {
                let pname = p.ident()?;
                p.expect_sym("=")?;
                let mut values = vec![p.ident()?];
                while p.eat_sym("|") {
                    values.push(p.ident()?);
                }
                p.expect_sym(";")?;
                for v in &values {
                    if !v.starts_with(|c: char| c.is_ascii_uppercase()) {
                        return p.error(format!("parameter value `{v}` must start with an upper-case letter"));
                    }
                }
                let mut sorted = values.clone();
                sorted.sort();
                sorted.dedup();
                if sorted.len() != values.len() {
                    return Err(GrammarError::DuplicateName {
                        kind: "parameter value",
                        name: pname,
                    });
                }
                conc.add_param(ParamTypeDecl { name: pname, values })?;
            }
        } else if p.is_keyword("lincat") {
            p.advance();
            while !p.at_decl_boundary() {
                let cats = p.ident_list()?;
                p.expect_sym("=")?;
                let ty = lintype(&mut p)?;
                p.expect_sym(";")?;
                for c in cats {
                    let cat = CategoryId::new(&c).or_else(|e| p.error(e.to_string()))?;
                    if !seen_lincats.insert(cat.clone()) {
                        return Err(GrammarError::DuplicateName { kind: "lincat", name: c });
                    }
                    conc.set_lincat(cat, ty.clone());
                }
            }
        } else if p.is_keyword("lin") {
            p.advance();
            while !p.at_decl_boundary() {
                let line = p.line();
                let fun = p.ident()?;
                let mut args = Vec::new();
                while !p.is_sym("=") {
                    let a = p.ident()?;
                    if args.contains(&a) {
                        return p.error(format!("argument `{a}` bound twice"));
                    }
                    args.push(a);
                }
                p.expect_sym("=")?;
                let mut scope = Scope { args: &args, vars: Vec::new() };
                let body = expr(&mut p, &mut scope)?;
                p.expect_sym(";")?;
                if conc.linrule(&fun).is_some() {
                    return Err(GrammarError::DuplicateName { kind: "lin rule", name: fun });
                }
                conc.set_linrule(LinRule { fun, args, body, line });
            }
        } else if p.is_sym("}") {
            break;
        } else {
            return p.error(format!("expected a declaration, found {}", describe(p.peek())));
        }
    }
    p.expect_end()?;
    Ok(conc)
}

fn lintype(p: &mut Parser) -> PResult<LinType> {
    let left = if p.eat_sym("{") {
        let mut fields: Vec<(String, LinType)> = Vec::new();
        while !p.is_sym("}") {
            let names = p.ident_list()?;
            p.expect_sym(":")?;
            let ty = lintype(p)?;
            for n in names {
                if fields.iter().any(|(m, _)| *m == n) {
                    return p.error(format!("duplicate field `{n}`"));
                }
                fields.push((n, ty.clone()));
            }
            if !p.eat_sym(";") {
                break;
            }
        }
        p.expect_sym("}")?;
        LinType::Record(fields)
    } else if p.eat_sym("(") {
        let t = lintype(p)?;
        p.expect_sym(")")?;
        t
    } else if p.is_keyword("Str") {
        p.advance();
        LinType::Str
    } else {
        LinType::Param(p.ident()?)
    };
    if p.eat_sym("=>") {
        let LinType::Param(key) = left else {
            return p.error("a table key must be a parameter type");
        };
        let value = lintype(p)?;
        return Ok(LinType::Table(key, Box::new(value)));
    }
    Ok(left)
}

struct Scope<'a> {
    args: &'a [String],
    vars: Vec<String>,
}

fn is_value_name(s: &str) -> bool {
    s.starts_with(|c: char| c.is_ascii_uppercase())
}

fn expr(p: &mut Parser, scope: &mut Scope<'_>) -> PResult<LinExpr> {
    let left = selection(p, scope)?;
    if p.eat_sym("++") {
        let right = expr(p, scope)?;
        return Ok(LinExpr::concat(left, right));
    }
    Ok(left)
}

fn selection(p: &mut Parser, scope: &mut Scope<'_>) -> PResult<LinExpr> {
    let mut e = projection(p, scope)?;
    while p.eat_sym("!") {
        let key = projection(p, scope)?;
        e = LinExpr::select(e, key);
    }
    Ok(e)
}

fn projection(p: &mut Parser, scope: &mut Scope<'_>) -> PResult<LinExpr> {
    let mut e = atom(p, scope)?;
    while p.eat_sym(".") {
        let field = p.ident()?;
        e = LinExpr::project(e, &field);
    }
    Ok(e)
}

fn atom(p: &mut Parser, scope: &mut Scope<'_>) -> PResult<LinExpr> {
    match p.peek().clone() {
        Tok::Str(s) => {
            p.advance();
            Ok(LinExpr::Str(s.split_whitespace().map(str::to_string).collect()))
        }
        Tok::Sym("(") => {
            p.advance();
            let e = expr(p, scope)?;
            p.expect_sym(")")?;
            Ok(e)
        }
        Tok::Sym("{") => {
            p.advance();
            let mut fields: Vec<(String, LinExpr)> = Vec::new();
            while !p.is_sym("}") {
                let name = p.ident()?;
                p.expect_sym("=")?;
                let value = expr(p, scope)?;
                if fields.iter().any(|(n, _)| *n == name) {
                    return p.error(format!("duplicate field `{name}`"));
                }
                fields.push((name, value));
                if !p.eat_sym(";") {
                    break;
                }
            }
            p.expect_sym("}")?;
            Ok(LinExpr::Record(fields))
        }
        Tok::Ident(kw) if kw == "table" => {
            p.advance();
            p.expect_sym("{")?;
            let mut branches = Vec::new();
            while !p.is_sym("}") {
                let pattern = if p.eat_sym("_") {
                    Pattern::Wildcard
                } else {
                    let name = p.ident()?;
                    if is_value_name(&name) {
                        Pattern::Value(name)
                    } else {
                        Pattern::Var(name)
                    }
                };
                p.expect_sym("=>")?;
                let bound = match &pattern {
                    Pattern::Var(v) => {
                        scope.vars.push(v.clone());
                        true
                    }
                    _ => false,
                };
                let body = expr(p, scope);
                if bound {
                    scope.vars.pop();
                }
                branches.push((pattern, body?));
                if !p.eat_sym(";") {
                    break;
                }
            }
            p.expect_sym("}")?;
            if branches.is_empty() {
                return p.error("empty table");
            }
            Ok(LinExpr::Table { key: None, branches })
        }
        Tok::Ident(kw) if kw == "case" => {
            p.advance();
            let name = p.ident()?;
            let Some(arg) = scope.args.iter().position(|a| *a == name) else {
                return p.error(format!("`case` needs a rule argument, `{name}` is not one"));
            };
            p.expect_keyword("of")?;
            p.expect_sym("{")?;
            let mut branches = Vec::new();
            let mut default = None;
            while !p.is_sym("}") {
                if p.eat_sym("_") {
                    p.expect_sym("=>")?;
                    default = Some(expr(p, scope)?);
                } else {
                    let Tok::Str(key) = p.advance() else {
                        return p.error("expected a string literal pattern");
                    };
                    p.expect_sym("=>")?;
                    if default.is_some() {
                        return p.error("`_` must be the last case");
                    }
                    branches.push((key, expr(p, scope)?));
                }
                if !p.eat_sym(";") {
                    break;
                }
            }
            p.expect_sym("}")?;
            let Some(default) = default else {
                return p.error("`case` needs a final `_` branch");
            };
            Ok(LinExpr::LitCase {
                arg,
                branches,
                default: Box::new(default),
            })
        }
        Tok::Ident(name) if !KEYWORDS.contains(&name.as_str()) => {
            p.advance();
            if let Some(i) = scope.args.iter().position(|a| *a == name) {
                Ok(LinExpr::Arg(i))
            } else if scope.vars.contains(&name) {
                Ok(LinExpr::Var(name))
            } else if is_value_name(&name) {
                Ok(LinExpr::Param(name))
            } else {
                p.error(format!("unknown variable `{name}`"))
            }
        }
        other => p.error(format!("expected an expression, found {}", describe(&other))),
    }
}
