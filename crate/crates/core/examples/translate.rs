//! Translates a sentence with the demo pack and prints the layer of each
//! region of the output.
//!
//!     cargo run --example translate -- "John is sixty-five years old" eng fra

use lcnl::cli::render_spans;
use lcnl::pack::load_pack;
use lcnl::translate::translate;

const PACK: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../packs/demo");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let text = args
        .next()
        .unwrap_or_else(|| "John does not believe that the queen is sixty-five years old".into());
    let from = args.next().unwrap_or_else(|| "eng".into());
    let to = args.next().unwrap_or_else(|| "fra".into());

    let pack = load_pack(PACK)?;
    let r = translate(&pack.grammar, &text, &from, &to, 5)?;
    println!("{}", render_spans(&r.source, &r.source_spans, true));
    println!("{}", render_spans(&r.target, &r.spans, true));
    println!("tree: {}", r.tree);
    println!("cost: {}", r.cost);
    for s in &r.spans {
        let region: String = r.target.chars().skip(s.start).take(s.end - s.start).collect();
        println!("  {:<9} {region}", s.layer.name());
    }
    for a in &r.alternatives {
        println!("  alt {:>6}  {}", a.cost.to_string(), a.target);
    }
    Ok(())
}
