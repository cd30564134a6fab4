//! Embeds a one-sentence controlled language into a tiny host grammar and
//! shows which layer wins for different inputs.

use std::collections::BTreeMap;

use lcnl::ast::{serialize_tree, CategoryId};
use lcnl::embedding::{embed, EmbeddingConfig, GrammarPart};
use lcnl::grammar::{parse_abstract, parse_concrete};
use lcnl::translate::{analyze, TranslateOptions};

const CNL: &str = r#"
abstract Alarm {
  flags startcat = Alert ;
  cat Alert ;
  fun fire : Alert [layer=semantic] ;
}
"#;
const CNL_ENG: &str = r#"
concrete AlarmEng of Alarm {
  lincat Alert = { s : Str } ;
  lin fire = { s = "the" ++ "building" ++ "is" ++ "on" ++ "fire" } ;
}
"#;

const HOST: &str = r#"
abstract Clause {
  flags startcat = Sent ;
  cat Sent ; Subj ; Pred ;
  fun sent : Subj -> Pred -> Sent [layer=syntactic] ;
  fun building, kitchen : Subj ;
  fun onFire, closed : Pred ;
}
"#;
const HOST_ENG: &str = r#"
concrete ClauseEng of Clause {
  lincat Sent, Subj, Pred = { s : Str } ;
  lin sent x y = { s = x.s ++ "is" ++ y.s } ;
  lin building = { s = "the" ++ "building" } ;
  lin kitchen = { s = "the" ++ "kitchen" } ;
  lin onFire = { s = "on" ++ "fire" } ;
  lin closed = { s = "closed" } ;
}
"#;

fn part(abs: &str, eng: &str) -> Result<GrammarPart, Box<dyn std::error::Error>> {
    let signature = parse_abstract(abs)?;
    let concrete = parse_concrete(eng, &signature)?;
    Ok(GrammarPart {
        signature,
        concretes: BTreeMap::from([("eng".to_string(), concrete)]),
    })
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = EmbeddingConfig::new(CategoryId::new("Alert")?, CategoryId::new("Sent")?);
    cfg.chunk_categories = vec![CategoryId::new("Subj")?, CategoryId::new("Pred")?];
    let lg = embed(&part(CNL, CNL_ENG)?, &part(HOST, HOST_ENG)?, &cfg, &BTreeMap::new())?;

    for (name, _) in lg.generated_functions() {
        println!("generated {name}");
    }
    let opts = TranslateOptions { k: 3, ..Default::default() };
    for text in ["the building is on fire", "the kitchen is on fire", "kitchen closed"] {
        let a = analyze(&lg, "eng", text, &opts)?;
        println!("{text}");
        for t in &a.trees {
            println!("  {:>5}  {}", t.cost.to_string(), serialize_tree(&t.tree));
        }
    }
    Ok(())
}
