use serde::{Deserialize, Serialize};

use crate::compare::{align, EditOp};

/// A run of lines with the same edit operation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hunk {
    pub op: EditOp,
    pub lines: Vec<String>,
}

/// Minimal LCS edit script from `a` to `b`, as runs.
pub fn line_diff(a: &[String], b: &[String]) -> Vec<Hunk> {
    let mut out: Vec<Hunk> = Vec::new();
    for step in align(a, b) {
        let (op, line) = match step {
            (Some(i), Some(_)) => (EditOp::Keep, &a[i]),
            (Some(i), None) => (EditOp::Delete, &a[i]),
            (None, Some(j)) => (EditOp::Insert, &b[j]),
            (None, None) => unreachable!(),
        };
        match out.last_mut() {
            Some(h) if h.op == op => h.lines.push(line.clone()),
            _ => out.push(Hunk {
                op,
                lines: vec![line.clone()],
            }),
        }
    }
    out
}

/// Replays an edit script against `a`. `None` if the script does not fit.
pub fn apply_script(a: &[String], script: &[Hunk]) -> Option<Vec<String>> {
    let mut out = Vec::new();
    let mut i = 0;
    for h in script {
        for l in &h.lines {
            match h.op {
                EditOp::Keep | EditOp::Delete => {
                    if a.get(i) != Some(l) {
                        return None;
                    }
                    i += 1;
                    if h.op == EditOp::Keep {
                        out.push(l.clone());
                    }
                }
                EditOp::Insert => out.push(l.clone()),
            }
        }
    }
    (i == a.len()).then_some(out)
}
