//! Shows how input outside both grammars falls back to chunks, and where
//! the chunk boundaries are.

use lcnl::pack::load_pack;
use lcnl::translate::{translate_with, TranslateOptions};

const PACK: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../packs/demo");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let pack = load_pack(PACK)?;
    let opts = TranslateOptions { k: 1, ..Default::default() };
    for text in ["this old city", "the queen old", "@@@ city", "well John is five years old", "Kraslava is famous"] {
        let r = translate_with(&pack.grammar, text, "eng", "fra", &opts)?;
        let chunks: Vec<String> = r
            .chunk_boundaries
            .iter()
            .map(|[a, b]| format!("[{}]", text.chars().skip(*a).take(b - a).collect::<String>()))
            .collect();
        println!("{text:<30} -> {:<30} {}", r.target, chunks.join(" "));
    }

    // without the chunk layer, the same inputs may have no analysis at all
    let strict = TranslateOptions { chunks: false, ..opts };
    match translate_with(&pack.grammar, "this old city", "eng", "fra", &strict) {
        Ok(r) => println!("strict: {}", r.target),
        Err(e) => println!("strict: {e}"),
    }
    Ok(())
}
