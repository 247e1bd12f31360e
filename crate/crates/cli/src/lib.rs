//! Config-driven front end for the driven oscillator toolkit.
//!
//! Each command reads a [`RunConfig`](config::RunConfig), writes its results
//! under the output directory together with the resolved config and a
//! `manifest.json`, and reports whether it succeeded.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod output;
pub mod validate;

use std::path::{Path, PathBuf};

use anyhow::Result;
use clap::ValueEnum;

use config::RunConfig;
use output::OutputDir;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Integrals,
    Transitions,
    Evolve,
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Integrals => "integrals",
            Command::Transitions => "transitions",
            Command::Evolve => "evolve",
            Command::Validate => "validate",
        }
    }
}

#[derive(Debug)]
pub struct Outcome {
    pub out_dir: PathBuf,
    pub manifest: PathBuf,
    /// False only when validation checks failed.
    pub passed: bool,
    pub summary: String,
}

/// Loads the config, applies `overrides` and `out`, runs `command`.
pub fn run(
    command: Command,
    config: Option<&Path>,
    out: Option<&Path>,
    overrides: &[String],
) -> Result<Outcome> {
    let (mut cfg, base) = RunConfig::load(config, overrides)?;
    if let Some(dir) = out {
        cfg.output.dir = dir.to_path_buf();
    }
    let resolved = cfg.resolve(&base)?;
    let root = resolved.config.output.dir.clone();
    let mut dir = OutputDir::create(&root, command.name(), &resolved.hash)?;
    dir.write_json(
        "config.json",
        &resolved.config.canonical()?,
        "resolved run configuration (output directory omitted)",
    )?;
    let (passed, summary) = match command {
        Command::Integrals => {
            commands::integrals(&resolved, &mut dir)?;
            (true, String::new())
        }
        Command::Transitions => {
            commands::transitions(&resolved, &mut dir)?;
            (true, String::new())
        }
        Command::Evolve => {
            commands::evolve_cmd(&resolved, &mut dir)?;
            (true, String::new())
        }
        Command::Validate => {
            let report = validate::run(&resolved);
            dir.write_json(
                "validation_report.json",
                &report,
                "validation checks and resolved conventions",
            )?;
            let text = report.to_text();
            dir.write_bytes(
                "validation_report.txt",
                text.as_bytes(),
                "validation report, plain text",
            )?;
            (report.passed, text)
        }
    };
    let manifest = dir.finish()?;
    Ok(Outcome {
        out_dir: root,
        manifest,
        passed,
        summary,
    })
}
