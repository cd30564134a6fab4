//! Serves the demo pack over HTTP.
//!
//!     cargo run --example serve -- 8080
//!     curl -s localhost:8080/v1/translate \
//!       -d '{"text":"this old city","from":"eng","to":"fra"}'

use std::net::SocketAddr;
use std::sync::Arc;

use lcnl::pack::load_pack;
use lcnl::service::serve;

const PACK: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../packs/demo");

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let port: u16 = std::env::args().nth(1).map(|p| p.parse()).transpose()?.unwrap_or(8080);
    let pack = load_pack(PACK)?;
    let addr = SocketAddr::from(([127, 0, 0, 1], port));
    println!("serving {} on http://{addr}", pack.manifest.name);
    serve(Arc::new(pack.grammar), addr).await?;
    Ok(())
}
