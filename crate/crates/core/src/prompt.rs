//! Prompt templates.
//!
//! Placeholders are `{port_num}`, `{line_color}` and `{start_point}`. Any other
//! braces (such as `{component_label}` in the circuit output format) are
//! literal text.

use alloc::string::{String, ToString};
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::task::TaskRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptKind {
    SwirlStandard,
    SwirlInstructed,
    Circuit,
    Metro,
    Cable,
}

impl PromptKind {
    pub const ALL: [PromptKind; 5] = [
        PromptKind::SwirlStandard,
        PromptKind::SwirlInstructed,
        PromptKind::Circuit,
        PromptKind::Metro,
        PromptKind::Cable,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PromptKind::SwirlStandard => "swirl_standard",
            PromptKind::SwirlInstructed => "swirl_instructed",
            PromptKind::Circuit => "circuit",
            PromptKind::Metro => "metro",
            PromptKind::Cable => "cable",
        }
    }

    pub fn template(self) -> &'static str {
        match self {
            PromptKind::SwirlStandard => SWIRL_STANDARD,
            PromptKind::SwirlInstructed => SWIRL_INSTRUCTED,
            PromptKind::Circuit => CIRCUIT,
            PromptKind::Metro => METRO,
            PromptKind::Cable => CABLE,
        }
    }
}

impl fmt::Display for PromptKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PromptError {
    #[error("unknown prompt kind {0:?}")]
    UnknownKind(String),
    #[error("task {task} has no value for placeholder {{{placeholder}}}")]
    MissingValue { task: String, placeholder: &'static str },
}

impl FromStr for PromptKind {
    type Err = PromptError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PromptKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| PromptError::UnknownKind(s.into()))
    }
}

pub const SWIRL_STANDARD: &str = "Task: You must complete the sentence by listing the colors of the dots that satisfy the sentence's logic, in sequential order, and append 'end' at the very end. No explanations are allowed.

Visually tracing the path of the line from 'S' in the image, the sequence of colored dots on its path is strictly";

pub const SWIRL_INSTRUCTED: &str = "Task: Complete the sentence by listing the colors of the dots on the target line in sequential order, followed by \"end\". No explanations are allowed.

Instruction:
1. Start from the point labeled \"S\" and treat it as the current position.
2. Select the dot that is visibly connected to the current position by a continuous line; use this line connection as the sole criterion for selection.
3. Do not select a dot based on proximity or visual similarity to the path. For example, do not select a dot simply because it is close to the current position, or because it lies on a nearby parallel segment.
4. Move to the selected dot, treat it as the new current position, and repeat until the path ends.

Example:
Suppose the current position is \"S\", and you see a red dot connected to \"S\" by a continuous line, and a blue dot nearby but on a different path. Even if blue appears closer or lies in the same direction, you select red because it is connected by the line. You then move to red, find green connected to red by a continuous line, and select green. The output would be: red, green, ..., end.

Visually tracing the path of the line from \"S\" in the image, the sequence of colored dots on its path is strictly";

pub const CIRCUIT: &str = "Task: A wire is a series of connected, same colored lines that go from the center of a port, represented on the screen as a white square, to another port. Each wire only connects two ports, one at either end. You must complete the sentence by listing all the colors of the dots on that wire in sequential order, and then give the label of the component connected at the other end. Append 'end' at the very end. No explanations are allowed.

Output format: color1, color2, ..., colorN, {component_label}, end

Visually tracing the wire from port {port_num} on the breadboard, which is the gray rectangle with numbered ports, the sequence of colored dots on its wire is strictly";

pub const METRO: &str = "Task: You must complete the sentence by listing only station names as written in the image, in sequential order, and append 'end' at the very end. Do not include any non-station text.

Visually tracing the path of the {line_color} line from {start_point} in the image, the sequence of stations on its path is strictly";

pub const CABLE: &str = "Task: You must complete the sentence by listing the colors of the dots on the cable, in sequential order from one end of the cable to the other, and append 'end' at the very end. No explanations are allowed.

Visually tracing the cable from {start_point} in the image, the sequence of colored dots on its path is strictly";

const PLACEHOLDERS: [&str; 3] = ["port_num", "line_color", "start_point"];

fn placeholder_value(task: &TaskRecord, name: &str) -> Option<String> {
    let q = task.query.as_ref()?;
    match name {
        "port_num" => q.port_num.map(|p| p.to_string()),
        "line_color" => q.line_color.clone(),
        "start_point" => q.start_point.clone(),
        _ => None,
    }
}

/// Renders `kind` for `task`, substituting every placeholder the template uses.
pub fn build_prompt(task: &TaskRecord, kind: PromptKind) -> Result<String, PromptError> {
    let mut out = String::from(kind.template());
    for name in PLACEHOLDERS {
        let pattern = alloc::format!("{{{name}}}");
        if !out.contains(&pattern) {
            continue;
        }
        let value = placeholder_value(task, name).ok_or_else(|| PromptError::MissingValue {
            task: task.task_id.clone(),
            placeholder: name,
        })?;
        out = out.replace(&pattern, &value);
    }
    Ok(out)
}
