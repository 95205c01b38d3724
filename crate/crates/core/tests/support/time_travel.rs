//! Cursor movement and replay checks over a recorded history.

use simplipy_core::trace::TraceDocument;
use simplipy_core::{History, Machine, State};

/// Walks the cursor across the whole history. At every position where a
/// forward step exists, advancing and stepping back must leave the observed
/// state unchanged, and so must stepping back and advancing again.
pub fn check_cursor(src: &str, max_entries: usize) -> Result<(), String> {
    let m = Machine::from_source(src).map_err(|d| format!("{d:?}"))?;
    let mut h = History::new(m.clone());
    h.run(max_entries);
    let total = h.total();
    h.reset();
    for c in 0..total {
        let here = h.state().canonical();
        if h.advance() && (!h.step_back() || h.cursor() != c || h.state().canonical() != here) {
            return Err(format!("step_back after advance at cursor {c} changed the state"));
        }
        if c > 0 {
            h.step_back();
            h.advance();
            if h.cursor() != c || h.state().canonical() != here {
                return Err(format!("advance after step_back at cursor {c} changed the state"));
            }
        }
        if c + 1 < total && !h.advance() {
            return Err(format!("could not advance past {c}"));
        }
    }
    Ok(())
}

/// Re-executes the history twice: once through a fresh `History`, and once
/// by deserializing each recorded snapshot and stepping it. Every snapshot
/// must come out byte-identical.
pub fn check_replay(src: &str, max_entries: usize) -> Result<(), String> {
    let m = Machine::from_source(src).map_err(|d| format!("{d:?}"))?;
    let mut first = History::new(m.clone());
    first.run(max_entries);
    let recorded = first.document().canonical();

    let mut second = History::new(m.clone());
    second.run(max_entries);
    if second.document().canonical() != recorded {
        return Err("fresh replay differs".into());
    }

    let doc: TraceDocument = serde_json::from_str(&recorded).map_err(|e| e.to_string())?;
    let snaps: Vec<String> = doc.entries.iter().map(|e| e.state.canonical()).collect();
    for (i, pair) in doc.entries.windows(2).enumerate() {
        let state: State = serde_json::from_str(&snaps[i]).map_err(|e| e.to_string())?;
        let t = m.step(&state);
        if t.state.canonical() != snaps[i + 1] || t.label != pair[1].label {
            return Err(format!("stepping snapshot {i} does not reproduce snapshot {}", i + 1));
        }
    }
    Ok(())
}
