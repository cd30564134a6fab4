//! Writes a small grammar in the grammar language, compiles it to a parsing
//! grammar and round-trips a sentence through it.

use lcnl::ast::{check_tree, serialize_tree};
use lcnl::grammar::{parse_abstract, parse_concrete};
use lcnl::linearize::linearize_text;
use lcnl::pmcfg::{compile, parse};

const ABSTRACT: &str = r#"
abstract Food {
  flags startcat = Comment ;
  cat Comment ; Item ; Kind ; Quality ;
  fun pred : Item -> Quality -> Comment ;
  fun this, these : Kind -> Item ;
  fun wine, fish : Kind ;
  fun very : Quality -> Quality [cost=1.5] ;
  fun good, warm : Quality ;
}
"#;

const ITALIAN: &str = r#"
concrete FoodIta of Food {
  param Number = Sg | Pl ;
  param Gender = Masc | Fem ;
  lincat Comment = { s : Str } ;
  lincat Item = { s : Str ; n : Number ; g : Gender } ;
  lincat Kind = { s : Number => Str ; g : Gender } ;
  lincat Quality = { s : Gender => Number => Str } ;
  lin pred item q = { s = item.s ++ table { Sg => "è" ; Pl => "sono" } ! item.n ++ q.s ! item.g ! item.n } ;
  lin this k = { s = table { Masc => "questo" ; Fem => "questa" } ! k.g ++ k.s ! Sg ; n = Sg ; g = k.g } ;
  lin these k = { s = table { Masc => "questi" ; Fem => "queste" } ! k.g ++ k.s ! Pl ; n = Pl ; g = k.g } ;
  lin wine = { s = table { Sg => "vino" ; Pl => "vini" } ; g = Masc } ;
  lin fish = { s = table { Sg => "pesce" ; Pl => "pesci" } ; g = Masc } ;
  lin very q = { s = table { g => table { n => "molto" ++ q.s ! g ! n } } } ;
  lin good = { s = table { Masc => table { Sg => "buono" ; Pl => "buoni" } ; Fem => table { Sg => "buona" ; Pl => "buone" } } } ;
  lin warm = { s = table { Masc => table { Sg => "caldo" ; Pl => "caldi" } ; Fem => table { Sg => "calda" ; Pl => "calde" } } } ;
}
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sig = parse_abstract(ABSTRACT)?;
    let ita = parse_concrete(ITALIAN, &sig)?;
    let pg = compile(&sig, &ita)?;
    println!("{} nonterminals, {} productions", pg.nonterminals().len(), pg.productions().len());

    let sentence = "questi vini sono molto buoni";
    let tokens: Vec<&str> = sentence.split_whitespace().collect();
    let result = parse(&pg, &tokens, 3)?;
    for t in &result.trees {
        let typed = check_tree(&t.tree, &sig)?;
        println!("{}  {}  -> {}", t.cost, serialize_tree(&t.tree), linearize_text(&typed, &ita)?);
    }
    Ok(())
}
