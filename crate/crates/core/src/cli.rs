//! The `lcnl` command line.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use crate::ast::{check_tree, parse_tree, serialize_tree};
use crate::linearize::linearize_text;
use crate::pack::{load_pack, GrammarPack};
use crate::service;
use crate::translate::{analyze, translate_with, ConfidenceSpan, Layer, TranslateError, TranslateOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PACK: i32 = 2;
pub const EXIT_NO_PARSE: i32 = 3;

pub const PACK_ENV: &str = "LCNL_PACK";

#[derive(Debug, Parser)]
#[command(name = "lcnl", version, about = "Translate through a controlled language embedded in a host grammar")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// `[PACK] INPUT`: the pack may be left out when `LCNL_PACK` is set.
#[derive(Debug, Args)]
struct PackAndInput {
    #[arg(value_name = "PACK] [INPUT", num_args = 1..=2, required = true)]
    items: Vec<String>,
}

#[derive(Debug, Args)]
struct PackOnly {
    #[arg(env = PACK_ENV, value_name = "PACK")]
    pack: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate a pack and print grammar statistics.
    Compile(PackOnly),
    /// Print the ranked analyses of a sentence.
    Parse {
        #[command(flatten)]
        input: PackAndInput,
        #[arg(long)]
        lang: String,
        #[arg(long, default_value_t = 5)]
        k: usize,
        /// Also print chart statistics.
        #[arg(long)]
        stats: bool,
        #[arg(long)]
        no_chunks: bool,
    },
    /// Linearize a tree such as `(UseCNL (assert (aged John (mkNumeral "65"))))`.
    Linearize {
        #[command(flatten)]
        input: PackAndInput,
        #[arg(long)]
        lang: String,
    },
    /// Translate one sentence.
    Translate {
        #[command(flatten)]
        input: PackAndInput,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long, default_value_t = 5)]
        k: usize,
        /// Print the full result as JSON.
        #[arg(long)]
        json: bool,
        /// Mark layers with `{G|..}`, `{Y|..}` and `{R|..}` instead of colours.
        #[arg(long)]
        no_color: bool,
        /// Disable the chunk layer; unparsable input then fails.
        #[arg(long)]
        no_chunks: bool,
        /// Include the tree of every alternative in the JSON output.
        #[arg(long)]
        full_trees: bool,
    },
    /// Translate a file with one sentence per line.
    Batch {
        #[command(flatten)]
        pack: PackOnly,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        #[arg(long = "out", value_name = "FILE")]
        output: PathBuf,
        #[arg(long)]
        no_chunks: bool,
    },
    /// Serve the JSON API.
    Serve {
        #[command(flatten)]
        pack: PackOnly,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
}

struct Failure {
    code: i32,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

impl From<TranslateError> for Failure {
    fn from(e: TranslateError) -> Self {
        let code = match e {
            TranslateError::NoParse => EXIT_NO_PARSE,
            TranslateError::Compile(_) => EXIT_PACK,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        usage(e.to_string())
    }
}

fn split_input(input: &PackAndInput) -> Result<(PathBuf, String), Failure> {
    match &input.items[..] {
        [pack, text] => Ok((PathBuf::from(pack), text.clone())),
        [text] => match std::env::var_os(PACK_ENV) {
            Some(p) => Ok((PathBuf::from(p), text.clone())),
            None => Err(usage(format!("no pack given and {PACK_ENV} is not set"))),
        },
        _ => Err(usage("expected a pack and an input")),
    }
}

fn open(path: &PathBuf) -> Result<GrammarPack, Failure> {
    load_pack(path).map_err(|e| Failure {
        code: EXIT_PACK,
        message: e.to_string(),
    })
}

fn check_language(pack: &GrammarPack, lang: &str) -> Result<(), Failure> {
    if pack.grammar.concrete(lang).is_none() {
        return Err(usage(format!("unknown language `{lang}`")));
    }
    Ok(())
}

/// Renders `text` with one marker per span. Characters outside spans are
/// copied unchanged.
pub fn render_spans(text: &str, spans: &[ConfidenceSpan], ansi: bool) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::new();
    let mut pos = 0;
    for s in spans {
        out.extend(&chars[pos.min(chars.len())..s.start.min(chars.len())]);
        let inner: String = chars[s.start.min(chars.len())..s.end.min(chars.len())].iter().collect();
        if ansi {
            let code = match s.layer {
                Layer::Semantic => "32",
                Layer::Syntactic => "33",
                Layer::Word | Layer::Unknown => "31",
            };
            out.push_str(&format!("\x1b[{code}m{inner}\x1b[0m"));
        } else {
            let tag = match s.layer {
                Layer::Semantic => 'G',
                Layer::Syntactic => 'Y',
                Layer::Word | Layer::Unknown => 'R',
            };
            out.push_str(&format!("{{{tag}|{inner}}}"));
        }
        pos = s.end;
    }
    out.extend(&chars[pos.min(chars.len())..]);
    out
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<i32, Failure> {
    match cli.command {
        Command::Compile(PackOnly { pack }) => {
            let pack = open(&pack)?;
            let sig = pack.grammar.signature();
            writeln!(out, "pack {}", pack.manifest.name)?;
            writeln!(out, "categories: {}", sig.category_count())?;
            writeln!(out, "functions: {}", sig.function_count())?;
            for lang in pack.languages() {
                let pg = pack.grammar.parsing_grammar(&lang).expect("language exists");
                let pg = pg.map_err(|e| Failure {
                    code: EXIT_PACK,
                    message: format!("{lang}: {e}"),
                })?;
                writeln!(
                    out,
                    "{lang}: {} nonterminals, {} productions",
                    pg.nonterminals().len(),
                    pg.productions().len()
                )?;
            }
            for (name, entries) in &pack.corpora {
                writeln!(out, "corpus {name}: {} entries", entries.len())?;
            }
            Ok(EXIT_OK)
        }
        Command::Parse {
            input,
            lang,
            k,
            stats,
            no_chunks,
        } => {
            let (pack, text) = split_input(&input)?;
            let pack = open(&pack)?;
            check_language(&pack, &lang)?;
            let opts = TranslateOptions {
                k,
                chunks: !no_chunks,
                ..Default::default()
            };
            let a = analyze(&pack.grammar, &lang, &text, &opts)?;
            for (i, t) in a.trees.iter().enumerate() {
                writeln!(out, "{}. {}\t{}", i + 1, t.cost.as_f64(), serialize_tree(&t.tree))?;
            }
            if stats {
                writeln!(
                    out,
                    "goals: {}, edges: {}, spans: {}",
                    a.stats.goals, a.stats.edges, a.stats.spans
                )?;
            }
            Ok(EXIT_OK)
        }
        Command::Linearize { input, lang } => {
            let (pack, text) = split_input(&input)?;
            let pack = open(&pack)?;
            check_language(&pack, &lang)?;
            let sig = pack.grammar.signature();
            let tree = parse_tree(&text, sig).map_err(|e| usage(e.to_string()))?;
            let typed = check_tree(&tree, sig).map_err(|e| usage(e.to_string()))?;
            let conc = pack.grammar.concrete(&lang).expect("checked above");
            let s = linearize_text(&typed, conc).map_err(|e| usage(e.to_string()))?;
            writeln!(out, "{s}")?;
            Ok(EXIT_OK)
        }
        Command::Translate {
            input,
            from,
            to,
            k,
            json,
            no_color,
            no_chunks,
            full_trees,
        } => {
            let (pack, text) = split_input(&input)?;
            let pack = open(&pack)?;
            check_language(&pack, &from)?;
            check_language(&pack, &to)?;
            let opts = TranslateOptions {
                k,
                chunks: !no_chunks,
                full_trees,
            };
            let r = translate_with(&pack.grammar, &text, &from, &to, &opts)?;
            if json {
                writeln!(out, "{}", service::translation_json(&r))?;
            } else {
                writeln!(out, "{}", render_spans(&r.target, &r.spans, !no_color))?;
            }
            Ok(EXIT_OK)
        }
        Command::Batch {
            pack,
            from,
            to,
            input,
            output,
            no_chunks,
        } => {
            let pack = open(&pack.pack)?;
            check_language(&pack, &from)?;
            check_language(&pack, &to)?;
            let text = fs::read_to_string(&input).map_err(|e| usage(format!("{}: {e}", input.display())))?;
            let opts = TranslateOptions {
                k: 1,
                chunks: !no_chunks,
                ..Default::default()
            };
            let mut lines = Vec::new();
            let mut code = EXIT_OK;
            for line in text.lines() {
                match translate_with(&pack.grammar, line, &from, &to, &opts) {
                    Ok(r) => lines.push(r.target),
                    Err(TranslateError::EmptyInput) => lines.push(String::new()),
                    Err(TranslateError::NoParse) => {
                        lines.push(String::new());
                        code = EXIT_NO_PARSE;
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            let mut body = lines.join("\n");
            body.push('\n');
            fs::write(&output, body).map_err(|e| usage(format!("{}: {e}", output.display())))?;
            Ok(code)
        }
        Command::Serve { pack, port, host } => {
            let pack = open(&pack.pack)?;
            let addr: SocketAddr = format!("{host}:{port}")
                .parse()
                .map_err(|e| usage(format!("bad address: {e}")))?;
            let rt = tokio::runtime::Runtime::new()?;
            writeln!(out, "listening on http://{addr}")?;
            out.flush()?;
            rt.block_on(service::serve(Arc::new(pack.grammar), addr))
                .map_err(|e| Failure {
                    code: EXIT_PACK,
                    message: e.to_string(),
                })?;
            Ok(EXIT_OK)
        }
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
