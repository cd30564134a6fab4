//! Prints the k cheapest analyses of a sentence, with chart statistics.
//!
//!     cargo run --example parse_kbest -- "this old city" eng 8

use lcnl::ast::serialize_tree;
use lcnl::pack::load_pack;
use lcnl::translate::{analyze, TranslateOptions};

const PACK: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../packs/demo");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let text = args.next().unwrap_or_else(|| "this old city".into());
    let lang = args.next().unwrap_or_else(|| "eng".into());
    let k = args.next().map(|k| k.parse()).transpose()?.unwrap_or(8);

    let pack = load_pack(PACK)?;
    let opts = TranslateOptions { k, ..Default::default() };
    let a = analyze(&pack.grammar, &lang, &text, &opts)?;
    for (i, t) in a.trees.iter().enumerate() {
        println!("{:>2}. {:>6}  {}", i + 1, t.cost.to_string(), serialize_tree(&t.tree));
    }
    println!(
        "{} goals, {} edges, {} spans",
        a.stats.goals, a.stats.edges, a.stats.spans
    );
    Ok(())
}
