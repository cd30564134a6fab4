mod common;

use std::fs;

use common::{demo, DEMO};
use lcnl::ast::{check_tree, parse_tree_text, serialize_tree};
use lcnl::embedding::EmbeddingError;
use lcnl::linearize::linearize_text;
use lcnl::pack::{load_pack, PackError};
use lcnl::translate::{analyze, translate, TranslateOptions};

fn rank1(lang: &str, text: &str) -> String {
    let a = analyze(&demo().grammar, lang, text, &TranslateOptions::default()).unwrap();
    serialize_tree(&a.trees[0].tree)
}

#[test]
fn shipped_pack_shape() {
    let pack = demo();
    assert_eq!(pack.languages(), ["eng", "fra"]);
    assert!(pack.corpus("cnl").len() >= 30);
    for name in ["host", "chunk", "golden"] {
        assert!(!pack.corpus(name).is_empty(), "{name}");
    }
}

#[test]
fn every_corpus_tree_linearizes_to_its_text() {
    let pack = demo();
    for name in ["cnl", "host", "chunk"] {
        for e in pack.corpus(name) {
            let tree = parse_tree_text(&e.expected).unwrap();
            let typed = check_tree(&tree, pack.grammar.signature()).unwrap();
            let text = linearize_text(&typed, pack.grammar.concrete(&e.language).unwrap()).unwrap();
            assert_eq!(text, e.text, "{name}:{}", e.line);
        }
    }
}

#[test]
fn every_corpus_sentence_parses_to_its_tree() {
    let pack = demo();
    for name in ["cnl", "host", "chunk"] {
        for e in pack.corpus(name) {
            assert_eq!(rank1(&e.language, &e.text), e.expected, "{name}:{}", e.line);
        }
    }
}

#[test]
fn golden_translations() {
    let pack = demo();
    for e in pack.corpus("golden") {
        let to = if e.language == "eng" { "fra" } else { "eng" };
        let r = translate(&pack.grammar, &e.text, &e.language, to, 5).unwrap();
        assert_eq!(r.target, e.expected, "golden:{}", e.line);
    }
}

#[test]
fn content_coverage() {
    let g = &demo().grammar;
    let lin = |lang: &str, tree: &str| {
        let t = check_tree(&parse_tree_text(tree).unwrap(), g.signature()).unwrap();
        linearize_text(&t, g.concrete(lang).unwrap()).unwrap()
    };
    // agreement of the copula with the subject
    let cop = |np: &str| format!("(UseHost (mkS positivePol (mkCl {np} (mkVPAP (mkAP old_A)))))");
    assert_eq!(lin("eng", &cop("i_NP")), "I am old");
    assert_eq!(lin("eng", &cop("you_NP")), "you are old");
    assert_eq!(lin("eng", &cop("she_NP")), "she is old");
    assert_eq!(lin("fra", &cop("she_NP")), "elle est vieille");
    // number agreement of the measure noun
    let aged = |n: &str| format!(r#"(UseCNL (assert (aged John (mkNumeral "{n}"))))"#);
    assert_eq!(lin("eng", &aged("1")), "John is one year old");
    assert_eq!(lin("eng", &aged("5")), "John is five years old");
    assert_eq!(lin("fra", &aged("1")), "John a un an");
    assert_eq!(lin("fra", &aged("65")), "John a soixante-cinq ans");
    // digits outside the table pass through
    assert_eq!(lin("fra", &aged("70")), "John a 70 ans");
    // the question is inverted in English
    assert_eq!(
        lin("eng", r#"(UseCNL (quest (aged Mary (mkNumeral "65"))))"#),
        "is Mary sixty-five years old"
    );
}

fn copy_pack(dst: &std::path::Path) {
    fs::create_dir_all(dst.join("corpus")).unwrap();
    for entry in fs::read_dir(DEMO).unwrap() {
        let p = entry.unwrap().path();
        if p.is_file() {
            fs::copy(&p, dst.join(p.file_name().unwrap())).unwrap();
        }
    }
}

fn scratch(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("lcnl-{name}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    dir
}

#[test]
fn seeded_lincat_clash_names_the_files() {
    let dir = scratch("clash");
    copy_pack(&dir);
    let path = dir.join("cnl_fra.lcg");
    let src = fs::read_to_string(&path).unwrap();
    let broken = src.replace(
        "lincat Numeral = { s : Str ; n : Number } ;",
        "lincat Numeral = { s : Str ; n : Number ; g : Gender } ;",
    );
    assert_ne!(src, broken);
    fs::write(&path, broken).unwrap();
    let err = load_pack(&dir).unwrap_err();
    let PackError::Embedding { files, source } = &err else { panic!("{err}") };
    assert_eq!(
        *source,
        EmbeddingError::LincatClash {
            category: "Numeral".into(),
            language: "fra".into()
        }
    );
    assert!(files.contains("cnl_fra.lcg"), "{err}");
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn grammar_errors_carry_file_and_line() {
    let dir = scratch("syntax");
    copy_pack(&dir);
    let path = dir.join("host_eng.lcg");
    let src = fs::read_to_string(&path).unwrap();
    fs::write(&path, src.replacen("lin mkAP a = { s = a.s } ;", "lin mkAP a = { s = a.s ;", 1)).unwrap();
    let msg = load_pack(&dir).unwrap_err().to_string();
    assert!(msg.contains("host_eng.lcg") && msg.contains("36:3"), "{msg}");
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn missing_manifest() {
    let dir = scratch("empty");
    fs::create_dir_all(&dir).unwrap();
    let err = load_pack(&dir).unwrap_err();
    assert!(matches!(err, PackError::MissingFile(ref p) if p.ends_with("manifest.json")));
    fs::remove_dir_all(&dir).unwrap();
}
