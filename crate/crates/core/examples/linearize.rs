//! Linearizes one abstract tree in every language of the demo pack.

use lcnl::ast::{check_tree, parse_tree};
use lcnl::linearize::linearize_text;
use lcnl::pack::load_pack;

const PACK: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../packs/demo");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let text = std::env::args()
        .nth(1)
        .unwrap_or_else(|| r#"(UseCNL (quest (aged Mary (mkNumeral "21"))))"#.into());
    let pack = load_pack(PACK)?;
    let sig = pack.grammar.signature();
    let tree = check_tree(&parse_tree(&text, sig)?, sig)?;
    for lang in pack.grammar.languages() {
        let conc = pack.grammar.concrete(lang).expect("listed language");
        println!("{lang}: {}", linearize_text(&tree, conc)?);
    }
    Ok(())
}
