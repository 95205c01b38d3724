//! The `parse`, `analyze`, `trace` and `simplify` commands.
//!
//! Each command returns its exit code and standard output so it can be
//! tested without spawning a process.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value as Json};
use simplipy_core::machine::Outcome;
use simplipy_core::{parse_program, simplify, Analysis, Diagnostic, History, Machine};

pub mod exit {
    pub const OK: i32 = 0;
    pub const INVALID: i32 = 1;
    pub const IO: i32 = 2;
    pub const ERRORED: i32 = 3;
    pub const TRUNCATED: i32 = 4;
}

pub const DEFAULT_MAX_STEPS: usize = 10_000;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: io::Error },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
}

impl Output {
    fn json(code: i32, v: &Json) -> Output {
        let mut stdout = serde_json::to_string_pretty(v).expect("json renders");
        stdout.push('\n');
        Output { code, stdout }
    }

    fn text(code: i32, stdout: String) -> Output {
        Output { code, stdout }
    }
}

pub fn read_source(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

pub fn diagnostics_json(diags: &[Diagnostic]) -> Json {
    json!({ "diagnostics": diags })
}

pub fn parse(source: &str) -> Output {
    match parse_program(source) {
        Ok(p) => Output::json(exit::OK, &serde_json::to_value(&p).expect("program serializes")),
        Err(d) => Output::json(exit::INVALID, &diagnostics_json(&d)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CfgFormat {
    Dot,
    Json,
}

/// Which artifacts `analyze` prints. With none selected all are printed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AnalyzeFlags {
    pub scopes: bool,
    pub cfg: Option<CfgFormat>,
    pub ctf: bool,
    pub abstraction: bool,
}

pub fn analyze(source: &str, flags: AnalyzeFlags) -> Output {
    let program = match parse_program(source) {
        Ok(p) => p,
        Err(d) => return Output::json(exit::INVALID, &diagnostics_json(&d)),
    };
    let analysis = match Analysis::new(&program) {
        Ok(a) => a,
        Err(d) => return Output::json(exit::INVALID, &diagnostics_json(&d)),
    };
    let selected = [flags.scopes, flags.cfg.is_some(), flags.ctf, flags.abstraction]
        .iter()
        .filter(|b| **b)
        .count();
    let all = selected == 0;
    let cfg_format = flags.cfg.unwrap_or(CfgFormat::Json);
    let cfg = match cfg_format {
        CfgFormat::Dot => Json::String(analysis.cfg.to_dot()),
        CfgFormat::Json => serde_json::to_value(&analysis.cfg).expect("cfg serializes"),
    };
    if selected == 1 {
        if flags.cfg == Some(CfgFormat::Dot) {
            return Output::text(exit::OK, analysis.cfg.to_dot());
        }
        let v = if flags.scopes {
            serde_json::to_value(&analysis.scopes)
        } else if flags.ctf {
            serde_json::to_value(&analysis.control)
        } else if flags.abstraction {
            serde_json::to_value(&analysis.abstraction)
        } else {
            Ok(cfg)
        };
        return Output::json(exit::OK, &v.expect("artifact serializes"));
    }
    let mut out = Map::new();
    if all || flags.scopes {
        out.insert(
            "scopes".into(),
            serde_json::to_value(&analysis.scopes).expect("serializes"),
        );
    }
    if all || flags.cfg.is_some() {
        out.insert("cfg".into(), cfg);
    }
    if all || flags.ctf {
        out.insert(
            "ctf".into(),
            serde_json::to_value(&analysis.control).expect("serializes"),
        );
    }
    if all || flags.abstraction {
        out.insert(
            "abstraction".into(),
            serde_json::to_value(&analysis.abstraction).expect("serializes"),
        );
    }
    Output::json(exit::OK, &Json::Object(out))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceFormat {
    Json,
    Text,
}

pub fn trace(source: &str, max_steps: usize, format: TraceFormat) -> Output {
    let machine = match Machine::from_source(source) {
        Ok(m) => m,
        Err(d) => return Output::json(exit::INVALID, &diagnostics_json(&d)),
    };
    let mut history = History::new(machine);
    let code = match history.run(max_steps) {
        Outcome::Finished => exit::OK,
        Outcome::Errored => exit::ERRORED,
        Outcome::Truncated => exit::TRUNCATED,
    };
    match format {
        TraceFormat::Json => Output::json(code, &history.document().to_json()),
        TraceFormat::Text => Output::text(code, history.render_text()),
    }
}

pub fn simplify_source(source: &str) -> Output {
    let r = simplify(source);
    let code = if r.output.is_some() { exit::OK } else { exit::INVALID };
    Output::json(code, &serde_json::to_value(&r).expect("result serializes"))
}
