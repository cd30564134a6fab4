//! Small random grammars and a brute-force derivation enumerator.

use lcnl::ast::{check_tree, serialize_tree, tree_cost, AbstractSignature, Cost, Tree};
use lcnl::grammar::{parse_abstract, parse_concrete, ConcreteGrammar};
use lcnl::linearize::linearize;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

const CATS: [&str; 3] = ["A", "B", "C"];
const TOKENS: [&str; 2] = ["a", "b"];

pub struct RandomGrammar {
    pub abstract_src: String,
    pub concrete_src: String,
    pub sig: AbstractSignature,
    pub conc: ConcreteGrammar,
}

fn component(rng: &mut StdRng, args: &[&str]) -> String {
    let mut parts: Vec<String> = Vec::new();
    let b_args: Vec<usize> = (0..args.len()).filter(|&i| args[i] == "B").collect();
    for (i, c) in args.iter().enumerate() {
        parts.push(match *c {
            "C" => {
                let key = match (rng.gen_range(0..3), b_args.choose(rng)) {
                    (0, Some(j)) => format!("x{j}.n"),
                    (1, _) => "X".to_string(),
                    _ => "Y".to_string(),
                };
                format!("x{i}.s ! {key}")
            }
            _ => format!("x{i}.s"),
        });
    }
    for _ in 0..rng.gen_range(1..=2) {
        let at = rng.gen_range(0..=parts.len());
        parts.insert(at, format!("\"{}\"", TOKENS.choose(rng).unwrap()));
    }
    parts.shuffle(rng);
    parts.join(" ++ ")
}

/// At most `max_funs` functions over categories A (start), B and C. Every
/// rule uses each argument in every string it builds and adds at least one
/// token of its own, so a tree's yield is at least as long as the tree.
pub fn random_grammar(rng: &mut StdRng, max_funs: usize) -> RandomGrammar {
    let n = rng.gen_range(2..=max_funs);
    let mut funs = Vec::new();
    let mut lins = Vec::new();
    for f in 0..n {
        // the first function guarantees the start category has a producer
        let result = if f == 0 { "A" } else { CATS.choose(rng).unwrap() };
        let arity = rng.gen_range(0..=2);
        let args: Vec<&str> = (0..arity).map(|_| *CATS.choose(rng).unwrap()).collect();
        let cost = [0.5, 1.0, 1.5, 2.0].choose(rng).unwrap();
        let ty = if args.is_empty() {
            result.to_string()
        } else {
            format!("{} -> {result}", args.join(" -> "))
        };
        funs.push(format!("  fun f{f} : {ty} [cost={cost}] ;"));
        let body = match result {
            "B" => {
                let b_arg = (0..args.len()).find(|&i| args[i] == "B");
                let n = match b_arg {
                    Some(j) if rng.gen_bool(0.5) => format!("x{j}.n"),
                    _ => ["X", "Y"].choose(rng).unwrap().to_string(),
                };
                format!("{{ s = {} ; n = {n} }}", component(rng, &args))
            }
            "C" => format!(
                "{{ s = table {{ X => {} ; Y => {} }} }}",
                component(rng, &args),
                component(rng, &args)
            ),
            _ => format!("{{ s = {} }}", component(rng, &args)),
        };
        let vars: Vec<String> = (0..args.len()).map(|i| format!("x{i}")).collect();
        lins.push(format!("  lin f{f} {} = {body} ;", vars.join(" ")));
    }
    let abstract_src = format!(
        "abstract R {{\n  flags startcat = A ;\n  cat A ; B ; C ;\n{}\n}}\n",
        funs.join("\n")
    );
    let concrete_src = format!(
        "concrete RC of R {{\n  param N = X | Y ;\n  lincat A = {{ s : Str }} ;\n  lincat B = {{ s : Str ; n : N }} ;\n  lincat C = {{ s : N => Str }} ;\n{}\n}}\n",
        lins.join("\n")
    );
    let sig = parse_abstract(&abstract_src).expect("generated abstract parses");
    let conc = parse_concrete(&concrete_src, &sig).unwrap_or_else(|e| panic!("{e}\n{concrete_src}"));
    RandomGrammar {
        abstract_src,
        concrete_src,
        sig,
        conc,
    }
}

/// Every tree of `cat` with at most `max_size` nodes.
pub fn trees_up_to(sig: &AbstractSignature, cat: &str, max_size: usize) -> Vec<Tree> {
    if max_size == 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for f in sig.functions().filter(|f| f.result.as_str() == cat) {
        let mut partial: Vec<(Vec<Tree>, usize)> = vec![(Vec::new(), 1)];
        for a in &f.args {
            let mut next = Vec::new();
            for (kids, size) in &partial {
                for t in trees_up_to(sig, a.as_str(), max_size - size) {
                    let s = t.size();
                    let mut k = kids.clone();
                    k.push(t);
                    next.push((k, size + s));
                }
            }
            partial = next;
        }
        for (kids, _) in partial {
            out.push(Tree::app(f.name.clone(), kids));
        }
    }
    out
}

pub fn yield_of(g: &RandomGrammar, tree: &Tree) -> Vec<String> {
    let typed = check_tree(tree, &g.sig).unwrap();
    linearize(&typed, &g.conc).unwrap().into_iter().map(|t| t.token).collect()
}

/// All derivations of `tokens`, ordered by cost and then serialization.
pub fn brute_force(g: &RandomGrammar, tokens: &[String]) -> Vec<(String, Cost)> {
    let mut found: Vec<(Cost, String)> = trees_up_to(&g.sig, "A", tokens.len())
        .into_iter()
        .filter(|t| yield_of(g, t) == tokens)
        .map(|t| {
            let cost = tree_cost(&check_tree(&t, &g.sig).unwrap(), &g.sig);
            (cost, serialize_tree(&t))
        })
        .collect();
    found.sort();
    found.into_iter().map(|(c, s)| (s, c)).collect()
}
