//! Serializable task records, manifests and model responses.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::circuit::CircuitScene;
use crate::condition::{ConditionKind, ConditionScene, MaskSpec};
use crate::geom::Point2D;
use crate::palette::Color;
use crate::prompt::{build_prompt, PromptError, PromptKind};
use crate::swirl::{LevelName, SwirlScene};

pub const MANIFEST_FORMAT: &str = "traceforge/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskType {
    Swirl,
    Circuit,
    Condition,
    External,
}

impl TaskType {
    pub fn as_str(self) -> &'static str {
        match self {
            TaskType::Swirl => "swirl",
            TaskType::Circuit => "circuit",
            TaskType::Condition => "condition",
            TaskType::External => "external",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Canvas {
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GroundTruth {
    pub colors: Vec<Color>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub component_label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub station_names: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DotRecord {
    pub color: Color,
    pub x: f64,
    pub y: f64,
    pub arc_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub turn_index: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wire_id: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path_id: Option<u32>,
}

impl DotRecord {
    pub fn position(&self) -> Point2D {
        Point2D::new(self.x, self.y)
    }

    fn at(color: Color, p: Point2D, arc_s: f64) -> Self {
        Self {
            color,
            x: p.x,
            y: p.y,
            arc_s,
            turn_index: None,
            theta: None,
            wire_id: None,
            path_id: None,
        }
    }
}

/// Values a prompt template may reference.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Query {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub port_num: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wire_id: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line_color: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_point: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireSummary {
    pub wire_id: u32,
    pub port: u32,
    pub component: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub task_id: String,
    pub task_type: TaskType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<LevelName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<ConditionKind>,
    pub image: String,
    pub prompt: String,
    pub prompt_kind: PromptKind,
    pub ground_truth: GroundTruth,
    /// Every dot in the image. Circuit tasks list all wires' dots, tagged
    /// with `wire_id`; condition tasks tag each dot with its `path_id`
    /// (0 for the queried path).
    pub dots: Vec<DotRecord>,
    /// Named anchors: `S` (and `E`) for swirls, probe regions for conditions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regions: Option<BTreeMap<String, Point2D>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<MaskSpec>,
    pub seed: u64,
    pub canvas: Canvas,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query: Option<Query>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wires: Option<Vec<WireSummary>>,
    /// Fields this version does not know about, kept for round trips.
    #[serde(flatten)]
    pub extra: BTreeMap<String, Value>,
}

impl TaskRecord {
    /// A blank external record, mostly useful for tests and custom tasks.
    pub fn empty(task_id: &str) -> Self {
        Self {
            task_id: task_id.into(),
            task_type: TaskType::External,
            level: None,
            condition: None,
            image: String::new(),
            prompt: String::new(),
            prompt_kind: PromptKind::SwirlStandard,
            ground_truth: GroundTruth::default(),
            dots: Vec::new(),
            regions: None,
            mask: None,
            seed: 0,
            canvas: Canvas { width: 0, height: 0 },
            query: None,
            wires: None,
            extra: BTreeMap::new(),
        }
    }

    pub fn region(&self, name: &str) -> Option<Point2D> {
        self.regions.as_ref()?.get(name).copied()
    }

    /// Dots of the queried path in ground-truth order.
    pub fn queried_dots(&self) -> Vec<&DotRecord> {
        match self.task_type {
            TaskType::Circuit => {
                let id = self.query.as_ref().and_then(|q| q.wire_id);
                self.dots.iter().filter(|d| d.wire_id == id).collect()
            }
            TaskType::Condition => self.dots.iter().filter(|d| d.path_id == Some(0)).collect(),
            _ => self.dots.iter().collect(),
        }
    }

    /// Answer tokens after the colors: the component label for circuits.
    pub fn expected_label(&self) -> Option<&str> {
        self.ground_truth.component_label.as_deref()
    }

    /// Component labels that may appear in an answer.
    pub fn labels(&self) -> Vec<String> {
        self.wires
            .as_ref()
            .map(|w| w.iter().map(|w| w.component.clone()).collect())
            .unwrap_or_default()
    }

    pub fn group_key(&self) -> String {
        match (self.level, self.condition, &self.mask) {
            (Some(l), _, _) => l.as_str().into(),
            (_, Some(k), Some(m)) => alloc::format!("{}/{}", k.as_str(), m.target.as_str()),
            (_, Some(k), None) => k.as_str().into(),
            _ => self.task_type.as_str().into(),
        }
    }

    fn finish(mut self, kind: PromptKind) -> Result<Self, PromptError> {
        self.prompt_kind = kind;
        self.prompt = build_prompt(&self, kind)?;
        Ok(self)
    }
}

pub fn swirl_task(scene: &SwirlScene, task_id: &str, kind: PromptKind) -> Result<TaskRecord, PromptError> {
    let mut t = TaskRecord::empty(task_id);
    t.task_type = TaskType::Swirl;
    t.level = Some(scene.level.name);
    t.image = alloc::format!("{task_id}.png");
    t.ground_truth.colors = scene.ground_truth();
    t.dots = scene
        .dots
        .iter()
        .map(|d| DotRecord {
            turn_index: Some(d.turn_index),
            theta: Some(d.theta),
            ..DotRecord::at(d.color, d.position, d.arc_s)
        })
        .collect();
    let mut regions = BTreeMap::new();
    regions.insert("S".into(), scene.start);
    regions.insert("E".into(), scene.end);
    regions.insert("center".into(), scene.spec.center);
    t.regions = Some(regions);
    t.seed = scene.seed;
    t.canvas = Canvas { width: scene.width, height: scene.height };
    t.finish(kind)
}

/// One task per wire, in port order. All tasks share the scene image.
pub fn circuit_tasks(scene: &CircuitScene, id_prefix: &str, image: &str) -> Result<Vec<TaskRecord>, PromptError> {
    let dots: Vec<DotRecord> = scene
        .wires
        .iter()
        .flat_map(|w| {
            w.dots.iter().map(move |d| DotRecord {
                wire_id: Some(w.id),
                ..DotRecord::at(d.color, d.position, d.arc_s)
            })
        })
        .collect();
    let summaries: Vec<WireSummary> = scene
        .wires
        .iter()
        .map(|w| WireSummary {
            wire_id: w.id,
            port: w.port_number,
            component: w.component_label.clone(),
        })
        .collect();
    let mut wires: Vec<_> = scene.wires.iter().collect();
    wires.sort_by_key(|w| w.port_number);
    wires
        .into_iter()
        .map(|w| {
            let mut t = TaskRecord::empty(&alloc::format!("{id_prefix}_port{:02}", w.port_number));
            t.task_type = TaskType::Circuit;
            t.image = image.into();
            t.ground_truth.colors = w.colors();
            t.ground_truth.component_label = Some(w.component_label.clone());
            t.dots = dots.clone();
            let mut regions = BTreeMap::new();
            regions.insert("S".into(), w.path.first());
            t.regions = Some(regions);
            t.seed = scene.seed;
            t.canvas = Canvas { width: scene.width, height: scene.height };
            t.query = Some(Query {
                port_num: Some(w.port_number),
                wire_id: Some(w.id),
                ..Query::default()
            });
            t.wires = Some(summaries.clone());
            t.finish(PromptKind::Circuit)
        })
        .collect()
}

pub fn condition_task(
    scene: &ConditionScene,
    task_id: &str,
    mask: Option<MaskSpec>,
) -> Result<TaskRecord, PromptError> {
    let mut t = TaskRecord::empty(task_id);
    t.task_type = TaskType::Condition;
    t.condition = Some(scene.kind);
    t.image = alloc::format!("{task_id}.png");
    t.ground_truth.colors = scene.ground_truth();
    let paths = core::iter::once(&scene.queried).chain(scene.distractors.iter());
    t.dots = paths
        .enumerate()
        .flat_map(|(i, p)| {
            p.dots.iter().map(move |d| DotRecord {
                path_id: Some(i as u32),
                ..DotRecord::at(d.color, d.position, d.arc_s)
            })
        })
        .collect();
    let mut regions: BTreeMap<String, Point2D> = scene.regions().into_iter().collect();
    regions.insert("S".into(), scene.queried.path.first());
    t.regions = Some(regions);
    t.mask = mask;
    t.seed = scene.seed;
    t.canvas = Canvas { width: scene.width, height: scene.height };
    t.finish(PromptKind::SwirlStandard)
}

/// Generator settings, echoed into the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub seed: u64,
    pub swirl_per_level: usize,
    pub swirl_prompt: PromptKind,
    /// Wires per circuit image; one image per entry.
    pub circuit_wires: Vec<usize>,
    pub condition_per_kind: usize,
    pub condition_masks: bool,
    pub patch_px: u32,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            swirl_per_level: 100,
            swirl_prompt: PromptKind::SwirlStandard,
            circuit_wires: crate::circuit::DEFAULT_WIRE_SCHEDULE.to_vec(),
            condition_per_kind: 50,
            condition_masks: true,
            patch_px: crate::condition::DEFAULT_PATCH_PX,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format: String,
    pub config: DatasetConfig,
    pub tasks: Vec<TaskRecord>,
    #[serde(flatten)]
    pub extra: BTreeMap<String, Value>,
}

impl DatasetManifest {
    pub fn new(config: DatasetConfig, tasks: Vec<TaskRecord>) -> Self {
        Self {
            format: MANIFEST_FORMAT.into(),
            config,
            tasks,
            extra: BTreeMap::new(),
        }
    }

    pub fn task(&self, id: &str) -> Option<&TaskRecord> {
        self.tasks.iter().find(|t| t.task_id == id)
    }

    /// First duplicated task id, if any.
    pub fn duplicate_id(&self) -> Option<&str> {
        let mut seen = alloc::collections::BTreeSet::new();
        self.tasks
            .iter()
            .find(|t| !seen.insert(t.task_id.as_str()))
            .map(|t| t.task_id.as_str())
    }
}

/// One model answer (or transport failure) for a `(task, run, model)` key.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ModelResponse {
    pub task_id: String,
    pub run: u32,
    pub model: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reasoning: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub completion_tokens: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reasoning_tokens: Option<u64>,
    pub latency_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ModelResponse {
    pub fn answer(task_id: &str, run: u32, model: &str, raw: String) -> Self {
        Self {
            task_id: task_id.into(),
            run,
            model: model.into(),
            raw: Some(raw),
            ..Self::default()
        }
    }

    pub fn key(&self) -> (String, u32, String) {
        (self.task_id.clone(), self.run, self.model.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::swirl::{gen_swirl, level_params};

    #[test]
    fn swirl_record_carries_ground_truth() {
        let s = gen_swirl(level_params(LevelName::Low), 1);
        let t = swirl_task(&s, "swirl_low_001", PromptKind::SwirlStandard).unwrap();
        assert_eq!(t.ground_truth.colors.len(), 8);
        assert_eq!(t.region("S"), Some(s.start));
        assert_eq!(t.image, "swirl_low_001.png");
        assert_eq!(t.group_key(), "Low");
    }

    #[test]
    fn unknown_fields_survive() {
        let s = gen_swirl(level_params(LevelName::Low), 1);
        let t = swirl_task(&s, "x", PromptKind::SwirlStandard).unwrap();
        let mut v = serde_json::to_value(&t).unwrap();
        v.as_object_mut().unwrap().insert("future".into(), Value::from(3));
        let back: TaskRecord = serde_json::from_value(v.clone()).unwrap();
        assert_eq!(back.extra.get("future"), Some(&Value::from(3)));
        assert_eq!(serde_json::to_value(&back).unwrap(), v);
    }
}
