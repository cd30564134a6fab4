//! Grammar packs: a directory with `manifest.json`, grammar sources and
//! regression corpora.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::ast::CategoryId;
use crate::embedding::{add_coercions, embed, CostPolicy, EmbeddingConfig, EmbeddingError, GrammarPart, LayeredGrammar};
use crate::grammar::{parse_abstract, parse_concrete, parse_concrete_unchecked, ConcreteGrammar, GrammarError};
use crate::pmcfg::OovConfig;

pub const MANIFEST: &str = "manifest.json";

#[derive(Clone, Debug, Deserialize)]
pub struct LanguageEntry {
    pub id: String,
    /// Concrete syntax of the controlled language.
    pub cnl: String,
    /// Concrete syntax of the host grammar.
    pub host: String,
    /// Optional overrides for generated rules, such as coercions between
    /// categories whose lincats differ.
    #[serde(default)]
    pub bridge: Option<String>,
}

#[derive(Clone, Debug, Default, Deserialize)]
pub struct OovManifest {
    #[serde(default)]
    pub proper_name: Option<String>,
    /// Per language, `[suffix, function]` pairs.
    #[serde(default)]
    pub suffixes: BTreeMap<String, Vec<(String, String)>>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct Manifest {
    pub name: String,
    pub cnl_abstract: String,
    pub host_abstract: String,
    pub languages: Vec<LanguageEntry>,
    pub cnl_start: String,
    pub host_start: String,
    #[serde(default)]
    pub chunk_categories: Vec<String>,
    #[serde(default)]
    pub coercions: Vec<(String, String)>,
    #[serde(default)]
    pub costs: CostPolicy,
    #[serde(default = "yes")]
    pub unknown_chunks: bool,
    #[serde(default)]
    pub oov: OovManifest,
}

fn yes() -> bool {
    true
}

/// One line of a corpus file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusEntry {
    pub language: String,
    pub text: String,
    /// An expected tree or an expected translation, depending on the corpus.
    pub expected: String,
    pub line: usize,
}

#[derive(Debug, Error)]
pub enum PackError {
    #[error("missing file {}", .0.display())]
    MissingFile(PathBuf),
    #[error("{}: {source}", .path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", .path.display())]
    Manifest { path: PathBuf, source: serde_json::Error },
    #[error("{}: {source}", .path.display())]
    Grammar { path: PathBuf, source: GrammarError },
    #[error("{files}: {source}")]
    Embedding { files: String, source: EmbeddingError },
    #[error("{}:{line}: {message}", .path.display())]
    Corpus { path: PathBuf, line: usize, message: String },
    #[error("{}: invalid category name `{name}`", .path.display())]
    BadCategory { path: PathBuf, name: String },
}

#[derive(Clone, Debug)]
pub struct GrammarPack {
    pub dir: PathBuf,
    pub manifest: Manifest,
    pub grammar: LayeredGrammar,
    /// Corpora keyed by file stem (`cnl`, `host`, `chunk`, `golden`).
    pub corpora: BTreeMap<String, Vec<CorpusEntry>>,
}

impl GrammarPack {
    pub fn corpus(&self, name: &str) -> &[CorpusEntry] {
        self.corpora.get(name).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn languages(&self) -> Vec<String> {
        self.grammar.languages().map(str::to_string).collect()
    }
}

fn read(path: &Path) -> Result<String, PackError> {
    if !path.exists() {
        return Err(PackError::MissingFile(path.to_path_buf()));
    }
    fs::read_to_string(path).map_err(|source| PackError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn grammar_err(path: &Path) -> impl FnOnce(GrammarError) -> PackError + '_ {
    move |source| PackError::Grammar {
        path: path.to_path_buf(),
        source,
    }
}

pub fn read_manifest(dir: &Path) -> Result<Manifest, PackError> {
    let path = dir.join(MANIFEST);
    let text = read(&path)?;
    serde_json::from_str(&text).map_err(|source| PackError::Manifest { path, source })
}

/// Loads, validates and embeds a pack, and reads its corpora.
pub fn load_pack(dir: impl AsRef<Path>) -> Result<GrammarPack, PackError> {
    let dir = dir.as_ref();
    let manifest = read_manifest(dir)?;
    let manifest_path = dir.join(MANIFEST);
    let category = |name: &str| {
        CategoryId::new(name).map_err(|_| PackError::BadCategory {
            path: manifest_path.clone(),
            name: name.to_string(),
        })
    };

    let cnl_abs = dir.join(&manifest.cnl_abstract);
    let host_abs = dir.join(&manifest.host_abstract);
    let mut cnl = GrammarPart {
        signature: parse_abstract(&read(&cnl_abs)?).map_err(grammar_err(&cnl_abs))?,
        concretes: BTreeMap::new(),
    };
    let mut host = GrammarPart {
        signature: parse_abstract(&read(&host_abs)?).map_err(grammar_err(&host_abs))?,
        concretes: BTreeMap::new(),
    };
    let mut bridges: BTreeMap<String, ConcreteGrammar> = BTreeMap::new();
    let mut files: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for lang in &manifest.languages {
        let mut names = vec![lang.cnl.clone(), lang.host.clone()];
        let p = dir.join(&lang.cnl);
        cnl.concretes.insert(
            lang.id.clone(),
            parse_concrete(&read(&p)?, &cnl.signature).map_err(grammar_err(&p))?,
        );
        let p = dir.join(&lang.host);
        host.concretes.insert(
            lang.id.clone(),
            parse_concrete(&read(&p)?, &host.signature).map_err(grammar_err(&p))?,
        );
        if let Some(b) = &lang.bridge {
            let p = dir.join(b);
            bridges.insert(lang.id.clone(), parse_concrete_unchecked(&read(&p)?).map_err(grammar_err(&p))?);
            names.push(b.clone());
        }
        files.insert(lang.id.clone(), names);
    }

    let mut cfg = EmbeddingConfig::new(category(&manifest.cnl_start)?, category(&manifest.host_start)?);
    cfg.chunk_categories = manifest
        .chunk_categories
        .iter()
        .map(|c| category(c))
        .collect::<Result<_, _>>()?;
    cfg.costs = manifest.costs;
    cfg.unknown_chunks = manifest.unknown_chunks;
    let pairs = manifest
        .coercions
        .iter()
        .map(|(a, b)| Ok((category(a)?, category(b)?)))
        .collect::<Result<Vec<_>, PackError>>()?;

    let embedding_err = |source: EmbeddingError| {
        let language = match &source {
            EmbeddingError::LincatClash { language, .. }
            | EmbeddingError::ParamClash { language, .. }
            | EmbeddingError::LincatIncompatible { language, .. }
            | EmbeddingError::NoStartField { language, .. }
            | EmbeddingError::Invalid { language, .. } => Some(language.as_str()),
            _ => None,
        };
        let files = match language.and_then(|l| files.get(l)) {
            Some(f) => f.join(", "),
            None => MANIFEST.to_string(),
        };
        PackError::Embedding { files, source }
    };
    let lg = embed(&cnl, &host, &cfg, &bridges).map_err(embedding_err)?;
    let mut grammar = add_coercions(&lg, &pairs).map_err(embedding_err)?;
    for lang in &manifest.languages {
        grammar.set_oov(
            &lang.id,
            OovConfig {
                proper_name: manifest.oov.proper_name.clone(),
                suffixes: manifest.oov.suffixes.get(&lang.id).cloned().unwrap_or_default(),
                unknown: None,
            },
        );
    }

    let corpora = load_corpora(&dir.join("corpus"))?;
    Ok(GrammarPack {
        dir: dir.to_path_buf(),
        manifest,
        grammar,
        corpora,
    })
}

/// Reads every `*.tsv` file in `dir`; a missing directory means no corpora.
pub fn load_corpora(dir: &Path) -> Result<BTreeMap<String, Vec<CorpusEntry>>, PackError> {
    let mut out = BTreeMap::new();
    if !dir.is_dir() {
        return Ok(out);
    }
    let entries = fs::read_dir(dir).map_err(|source| PackError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "tsv"))
        .collect();
    paths.sort();
    for path in paths {
        let stem = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
        let entries = parse_corpus(&read(&path)?).map_err(|(line, message)| PackError::Corpus {
            path: path.clone(),
            line,
            message,
        })?;
        out.insert(stem, entries);
    }
    Ok(out)
}

/// Parses tab-separated `language, text, expected` lines. Blank lines and
/// lines starting with `#` are skipped.
pub fn parse_corpus(text: &str) -> Result<Vec<CorpusEntry>, (usize, String)> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        let [language, text, expected] = cols[..] else {
            return Err((i + 1, format!("expected 3 tab-separated columns, found {}", cols.len())));
        };
        out.push(CorpusEntry {
            language: language.trim().to_string(),
            text: text.trim().to_string(),
            expected: expected.trim().to_string(),
            line: i + 1,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_lines() {
        let c = parse_corpus("# comment\neng\tJohn is old\t(UseHost x)\n\nfra\ta\tb\n").unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].expected, "(UseHost x)");
        assert_eq!(c[1].line, 4);
        assert_eq!(parse_corpus("eng\tonly two").unwrap_err().0, 1);
    }

    #[test]
    fn missing_manifest_is_named() {
        let err = load_pack("/nonexistent/pack").unwrap_err();
        assert!(err.to_string().contains("manifest.json"), "{err}");
    }
}
