//! Built-in synthetic responders.

use alloc::string::String;
use alloc::vec::Vec;

use crate::task::{ModelResponse, TaskRecord, TaskType};

pub const ORACLE_MODEL: &str = "builtin/oracle";
pub const GREEDY_MODEL: &str = "builtin/greedy";

fn format_answer<I: IntoIterator<Item = S>, S: AsRef<str>>(tokens: I) -> String {
    let mut out = String::new();
    for t in tokens {
        out.push_str(t.as_ref());
        out.push_str(", ");
    }
    out.push_str("end");
    out
}

/// The expected answer: `c1, c2, ..., [label,] end`.
pub fn oracle_answer(task: &TaskRecord) -> String {
    if let Some(names) = &task.ground_truth.station_names {
        return format_answer(names);
    }
    let mut tokens: Vec<&str> = task.ground_truth.colors.iter().map(|c| c.name()).collect();
    if let Some(l) = task.expected_label() {
        tokens.push(l);
    }
    format_answer(tokens)
}

/// Indices into `task.dots` in greedy visiting order.
///
/// Starts at the `S` anchor and repeatedly moves to the nearest unvisited
/// dot, ties going to the lower index. Visits as many dots as the ground
/// truth has colors (all of them for swirls).
pub fn greedy_order(task: &TaskRecord) -> Vec<usize> {
    let Some(mut cur) = task.region("S") else {
        return Vec::new();
    };
    let want = task.ground_truth.colors.len().min(task.dots.len());
    let mut visited = alloc::vec![false; task.dots.len()];
    let mut order = Vec::with_capacity(want);
    while order.len() < want {
        let mut best: Option<(usize, f64)> = None;
        for (i, d) in task.dots.iter().enumerate() {
            if visited[i] {
                continue;
            }
            let dist = cur.dist(d.position());
            if best.is_none_or(|(_, b)| dist < b) {
                best = Some((i, dist));
            }
        }
        let (i, _) = best.expect("unvisited dot remains");
        visited[i] = true;
        order.push(i);
        cur = task.dots[i].position();
    }
    order
}

pub fn greedy_answer(task: &TaskRecord) -> String {
    let order = greedy_order(task);
    let mut tokens: Vec<String> = order.iter().map(|&i| task.dots[i].color.name().into()).collect();
    if task.task_type == TaskType::Circuit {
        let owner = order.last().and_then(|&i| task.dots[i].wire_id);
        let label = task
            .wires
            .iter()
            .flatten()
            .find(|w| Some(w.wire_id) == owner)
            .map(|w| w.component.clone());
        tokens.extend(label);
    }
    format_answer(tokens)
}

pub fn oracle_tracer(task: &TaskRecord, run: u32) -> ModelResponse {
    ModelResponse::answer(&task.task_id, run, ORACLE_MODEL, oracle_answer(task))
}

pub fn greedy_tracer(task: &TaskRecord, run: u32) -> ModelResponse {
    ModelResponse::answer(&task.task_id, run, GREEDY_MODEL, greedy_answer(task))
}
