// SPDX-License-Identifier: Apache-2.0

//! Security asset identification for Verilog and SystemVerilog RTL.
//!
//! The pipeline runs over in-memory sources: parse, match signal names
//! against keyword fragments, classify signal behavior from syntax, filter
//! by IP-family rules, and refine candidates to top-level root signals.
//! File IO and the command line live in the `assetscan` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod ast;
pub mod classify;
pub mod config;
pub mod design;
pub mod eval;
pub mod expr;
pub mod keywords;
pub mod lexer;
pub mod matcher;
pub mod parser;
pub mod pipeline;
pub mod preprocess;
pub mod refine;
pub mod rules;
pub mod width;

pub use ast::{Diagnostic, Direction, ModuleDef, Severity, SignalDecl, SourceUnit, Width, WidthClass};
pub use classify::{Behavior, BehaviorClassification};
pub use config::{FamilyConfig, IpFamily, Objective};
pub use design::DesignDatabase;
pub use parser::parse_source;
pub use pipeline::{run_pipeline, AssetReport};
pub use preprocess::{IncludeResolver, NoIncludes};
