//! A layered grammar engine: a controlled natural language embedded in a
//! wide-coverage host grammar, with a chunking fallback that keeps parsing
//! total.

pub mod ast;
pub mod cli;
pub mod embedding;
pub mod grammar;
pub mod linearize;
pub mod pack;
pub mod pmcfg;
pub mod service;
pub mod translate;
