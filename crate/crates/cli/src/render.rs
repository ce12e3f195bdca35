//! Text rendering of policy maps: per grid cell, the waiting time above an
//! arrow for the held action; walls as `##`.

use stmdp::gridworld::{GridSpec, StateIndexing};

use crate::document::PolicyDocument;

fn glyph(action: &str, unicode: bool) -> &'static str {
    match (action, unicode) {
        ("north", false) => "^",
        ("south", false) => "v",
        ("east", false) => ">",
        ("west", false) => "<",
        ("north", true) => "\u{2191}",
        ("south", true) => "\u{2193}",
        ("east", true) => "\u{2192}",
        ("west", true) => "\u{2190}",
        _ => "?",
    }
}

/// Renders the waiting-time and action maps over the grid, north row first,
/// followed by a line for the absorbing state.
pub fn render_policy(
    spec: &GridSpec,
    indexing: &StateIndexing,
    doc: &PolicyDocument,
    unicode: bool,
) -> String {
    let mut by_state: Vec<Option<&crate::document::PolicyRecord>> =
        vec![None; indexing.num_states()];
    for record in &doc.records {
        by_state[record.display - 1] = Some(record);
    }
    let mut out = String::new();
    for r in 0..spec.rows() {
        let mut tau_line = String::new();
        let mut act_line = String::new();
        for c in 0..spec.cols() {
            match indexing.state_at(r, c) {
                None => {
                    tau_line.push_str(" ##");
                    act_line.push_str(" ##");
                }
                Some(state) => {
                    let record = by_state[state].expect("document covers every state");
                    tau_line.push_str(&format!(" {:>2}", record.tau));
                    act_line.push_str(&format!("  {}", glyph(&record.action, unicode)));
                }
            }
        }
        out.push_str(tau_line.trim_end());
        out.push('\n');
        out.push_str(act_line.trim_end());
        out.push('\n');
    }
    let absorbing = by_state[indexing.absorbing_state()].expect("absorbing record");
    out.push_str(&format!(
        "absorbing state {}: tau {}, action {}\n",
        indexing.display_index(indexing.absorbing_state()).unwrap(),
        absorbing.tau,
        absorbing.action
    ));
    out.push_str(&format!(
        "start S = state {}, target T = state {}\n",
        indexing.display_index(indexing.start_state()).unwrap(),
        indexing.display_index(indexing.target_state()).unwrap()
    ));
    out
}
