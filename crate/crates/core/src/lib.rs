//! The SimpliPy notional machine.
//!
//! SimpliPy is a line-oriented subset of Python in which every source line is
//! exactly one instruction and expressions never contain calls. This crate
//! provides the whole pipeline around that subset:
//!
//! - [`syntax`]: tokenizer and parser producing a line-indexed [`Program`].
//! - [`analysis`]: lexical blocks, the `next`/`true`/`false`/`err` control
//!   transfer functions, the structural abstraction and the control flow graph.
//! - [`machine`]: the small-step transition system over
//!   `(lexical map, lexical hierarchy, continuation)` states.
//! - [`trace`]: recorded execution histories with forward and backward stepping.
//! - [`simplifier`]: best-effort rewriting of ordinary Python into the subset.

pub mod analysis;
pub mod diagnostic;
pub mod machine;
pub mod simplifier;
pub mod syntax;
pub mod trace;

pub use analysis::{Analysis, BlockId, Category, Cfg, ControlMaps, ScopeInfo, Scopes};
pub use diagnostic::{Diagnostic, Severity};
pub use machine::{Context, EnvId, ErrorKind, Label, Machine, Outcome, Run, State, Status, Transition, Value};
pub use simplifier::{simplify, SimplifyResult};
pub use syntax::{parse_program, Exp, Instr, Location, Program, ProgramPoint};
pub use trace::{History, TraceDocument, TraceEntry};
