mod common;

use std::io::{Read, Write};
use std::net::{SocketAddr, TcpStream};
use std::sync::{Arc, OnceLock};
use std::thread;

use common::{demo, DEMO};
use lcnl::cli::run;
use lcnl::service::serve_on;

const FLAGSHIP: &str = "John does not believe that the queen is sixty-five years old";

/// One server for the whole test binary, on an ephemeral port.
fn server() -> SocketAddr {
    static ADDR: OnceLock<SocketAddr> = OnceLock::new();
    *ADDR.get_or_init(|| {
        let (tx, rx) = std::sync::mpsc::channel();
        thread::spawn(move || {
            let rt = tokio::runtime::Runtime::new().unwrap();
            rt.block_on(async {
                let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
                tx.send(listener.local_addr().unwrap()).unwrap();
                serve_on(Arc::new(demo().grammar.clone()), listener).await.unwrap();
            });
        });
        rx.recv().unwrap()
    })
}

fn request(method: &str, path: &str, body: &str) -> (u16, String) {
    let mut s = TcpStream::connect(server()).unwrap();
    write!(
        s,
        "{method} {path} HTTP/1.1\r\nHost: localhost\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    )
    .unwrap();
    let mut raw = String::new();
    s.read_to_string(&mut raw).unwrap();
    let status = raw[9..12].parse().unwrap();
    let (head, body) = raw.split_once("\r\n\r\n").unwrap();
    // tolerate chunked transfer encoding
    let body = if head.to_ascii_lowercase().contains("transfer-encoding: chunked") {
        let mut out = String::new();
        let mut rest = body;
        loop {
            let (size, tail) = rest.split_once("\r\n").unwrap();
            let n = usize::from_str_radix(size.trim(), 16).unwrap();
            if n == 0 {
                break;
            }
            out.push_str(&tail[..n]);
            rest = &tail[n + 2..];
        }
        out
    } else {
        body.to_string()
    };
    (status, body)
}

fn translate_body(text: &str, from: &str, to: &str) -> String {
    serde_json::json!({ "text": text, "from": from, "to": to }).to_string()
}

#[test]
fn health_and_languages() {
    assert_eq!(request("GET", "/v1/health", ""), (200, r#"{"status":"ok"}"#.to_string()));
    let (status, body) = request("GET", "/v1/languages", "");
    assert_eq!(status, 200);
    assert_eq!(body, r#"{"languages":["eng","fra"]}"#);
}

#[test]
fn translate_matches_cli_json() {
    let (status, body) = request("POST", "/v1/translate", &translate_body(FLAGSHIP, "eng", "fra"));
    assert_eq!(status, 200, "{body}");
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(
        ["lcnl", "translate", DEMO, FLAGSHIP, "--from", "eng", "--to", "fra", "--json"],
        &mut out,
        &mut err,
    );
    assert_eq!(code, 0);
    assert_eq!(String::from_utf8(out).unwrap().trim_end(), body);
}

#[test]
fn parse_endpoint() {
    let body = serde_json::json!({ "text": "this old city", "lang": "eng", "k": 3 }).to_string();
    let (status, body) = request("POST", "/v1/parse", &body);
    assert_eq!(status, 200);
    let v: serde_json::Value = serde_json::from_str(&body).unwrap();
    assert_eq!(v["trees"].as_array().unwrap().len(), 3);
    assert_eq!(v["trees"][0]["cost"], 15.0);
    assert!(v["stats"]["edges"].as_u64().unwrap() > 0);
}

#[test]
fn client_errors() {
    let cases = [
        ("/v1/translate", translate_body("John", "eng", "deu"), 400),
        ("/v1/translate", translate_body("   ", "eng", "fra"), 400),
        ("/v1/translate", translate_body(&"old ".repeat(3000), "eng", "fra"), 413),
        ("/v1/translate", "{not json".to_string(), 400),
        ("/v1/translate", r#"{"text":"John","from":"eng","to":"fra","k":0}"#.to_string(), 400),
        ("/v1/parse", r#"{"text":"John"}"#.to_string(), 400),
    ];
    for (path, body, expected) in cases {
        let (status, reply) = request("POST", path, &body);
        assert_eq!(status, expected, "{reply}");
        let v: serde_json::Value = serde_json::from_str(&reply).unwrap();
        assert!(v["error"].is_string(), "{reply}");
    }
}

#[test]
fn concurrent_requests_agree() {
    let texts = ["this old city", FLAGSHIP, "John is sixty-five years old", "zyx blorks city"];
    let expected: Vec<String> = texts
        .iter()
        .map(|t| request("POST", "/v1/translate", &translate_body(t, "eng", "fra")).1)
        .collect();
    let handles: Vec<_> = (0..16)
        .map(|i| {
            let text = texts[i % texts.len()];
            thread::spawn(move || request("POST", "/v1/translate", &translate_body(text, "eng", "fra")))
        })
        .collect();
    for (i, h) in handles.into_iter().enumerate() {
        let (status, body) = h.join().unwrap();
        assert_eq!(status, 200);
        assert_eq!(body, expected[i % texts.len()]);
    }
}
