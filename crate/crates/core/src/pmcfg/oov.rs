//! Lexical hypotheses for tokens outside the grammar's vocabulary.

use crate::ast::{AbstractSignature, CategoryId, Cost};

/// Which `String -> C` functions act as guessers.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OovConfig {
    /// Proposed for capitalized tokens that do not start the sentence.
    pub proper_name: Option<String>,
    /// `(suffix, function)`: proposed for unknown tokens with that ending.
    pub suffixes: Vec<(String, String)>,
    /// Proposed for every token, so that any input has some analysis.
    pub unknown: Option<String>,
}

impl OovConfig {
    pub fn functions(&self) -> impl Iterator<Item = &str> {
        self.proper_name
            .iter()
            .map(String::as_str)
            .chain(self.suffixes.iter().map(|(_, f)| f.as_str()))
            .chain(self.unknown.iter().map(String::as_str))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OovHypothesis {
    pub fun: String,
    pub category: CategoryId,
    pub cost: Cost,
}

#[derive(Clone, Debug, Default)]
pub(crate) struct Guesser {
    proper_name: Option<OovHypothesis>,
    suffixes: Vec<(String, OovHypothesis)>,
    unknown: Option<OovHypothesis>,
}

impl Guesser {
    pub(crate) fn new(cfg: &OovConfig, sig: &AbstractSignature) -> Guesser {
        let hyp = |fun: &str| {
            sig.function(fun).map(|d| OovHypothesis {
                fun: d.name.clone(),
                category: d.result.clone(),
                cost: d.cost,
            })
        };
        Guesser {
            proper_name: cfg.proper_name.as_deref().and_then(hyp),
            suffixes: cfg
                .suffixes
                .iter()
                .filter_map(|(s, f)| hyp(f).map(|h| (s.clone(), h)))
                .collect(),
            unknown: cfg.unknown.as_deref().and_then(hyp),
        }
    }

    pub(crate) fn hypotheses(&self, token: &str, sentence_initial: bool, in_vocabulary: bool) -> Vec<OovHypothesis> {
        let mut out = Vec::new();
        if !in_vocabulary && token.chars().any(char::is_alphabetic) {
            if let Some(h) = &self.proper_name {
                let capitalized = token.chars().next().is_some_and(char::is_uppercase);
                if capitalized && !sentence_initial {
                    out.push(h.clone());
                }
            }
            for (suffix, h) in &self.suffixes {
                let stem = token.strip_suffix(suffix.as_str()).unwrap_or("");
                if stem.chars().count() >= 2 && stem.chars().all(char::is_alphabetic) && !out.contains(h) {
                    out.push(h.clone());
                }
            }
        }
        if let Some(h) = &self.unknown {
            out.push(h.clone());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::parse_abstract;

    fn guesser() -> Guesser {
        let sig = parse_abstract(
            r#"abstract G {
                flags startcat = Unknown ;
                cat NP ; N ; V ; Unknown ;
                fun OovName : String -> NP [cost=3.0] ;
                fun GuessNPl : String -> N [cost=4.0] ;
                fun GuessV : String -> V [cost=4.0] ;
                fun OovUnknown : String -> Unknown [cost=6.0] ;
            }"#,
        )
        .unwrap();
        let cfg = OovConfig {
            proper_name: Some("OovName".into()),
            suffixes: vec![("s".into(), "GuessNPl".into()), ("ed".into(), "GuessV".into())],
            unknown: Some("OovUnknown".into()),
        };
        Guesser::new(&cfg, &sig)
    }

    fn funs(g: &Guesser, token: &str, initial: bool) -> Vec<String> {
        g.hypotheses(token, initial, false).into_iter().map(|h| h.fun).collect()
    }

    #[test]
    fn proper_name_mid_sentence() {
        let g = guesser();
        assert!(funs(&g, "Kraslava", false).contains(&"OovName".to_string()));
        assert!(!funs(&g, "Kraslava", true).contains(&"OovName".to_string()));
    }

    #[test]
    fn suffix_guesses() {
        let g = guesser();
        assert_eq!(funs(&g, "blorks", true), ["GuessNPl", "OovUnknown"]);
        assert_eq!(funs(&g, "glimped", true), ["GuessV", "OovUnknown"]);
        assert_eq!(g.hypotheses("blorks", true, false)[0].cost.as_f64(), 4.0);
    }

    #[test]
    fn garbage_is_only_unknown() {
        let g = guesser();
        assert_eq!(funs(&g, "@@@", false), ["OovUnknown"]);
        // known words still get the catch-all hypothesis
        assert_eq!(
            g.hypotheses("cities", false, true).into_iter().map(|h| h.fun).collect::<Vec<_>>(),
            ["OovUnknown"]
        );
    }
}
