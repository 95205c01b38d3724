//! Command-line entry points and the debugger HTTP service.

pub mod commands;
pub mod service;
