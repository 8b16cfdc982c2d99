use std::collections::BTreeMap;

use traceforge_core::geom::Point2D;
use traceforge_core::probes::{
    aggregate_by_condition, aggregate_margin_curves, attn_margin_curve, attn_region_score, repr_margin_curve, Cell,
    MarginCurve, MarginKind, ProbeError, RegionDump, RegionSpec, Stack, TokenGrid, DUMP_SCHEMA,
};

fn region(name: &str, row: u32, col: u32) -> RegionSpec {
    RegionSpec { name: name.into(), center: Point2D::new(col as f64 * 16.0 + 8.0, row as f64 * 16.0 + 8.0), cells: vec![Cell::new(row, col)] }
}

fn vectors(red: [f64; 2], green: [f64; 2], dist: [f64; 2]) -> BTreeMap<String, Vec<f64>> {
    [("Red", red), ("Green", green), ("DistRed_1", dist)].into_iter().map(|(k, v)| (k.to_string(), v.to_vec())).collect()
}

/// Three one-cell regions, one vision block, one LLM layer.
fn tiny_dump() -> RegionDump {
    let mut attn = vec![vec![0.0; 3]; 3];
    attn[0][1] = 0.3;
    attn[0][2] = 0.1;
    RegionDump {
        schema: DUMP_SCHEMA.into(),
        model: "m".into(),
        image: "i.png".into(),
        condition: Some("SharedSegment".into()),
        patch_px: 16,
        grid_rows: 4,
        grid_cols: 4,
        vision_blocks: 1,
        llm_layers: 1,
        regions: vec![region("Red", 1, 1), region("Green", 1, 2), region("DistRed_1", 2, 1)],
        tokens: vec![Cell::new(1, 1), Cell::new(1, 2), Cell::new(2, 1)],
        attention_sub: vec![attn],
        hidden_vision: vec![vectors([1.0, 0.0], [2.0, 0.0], [0.0, 3.0])],
        vision_token_mean: vec![vec![0.0, 0.0]],
        hidden_llm: vec![vectors([1.0, 1.0], [1.0, 1.0], [1.0, 1.0])],
        llm_token_mean: vec![vec![1.0, 1.0]],
        overlapping_regions: false,
    }
}

#[test]
fn attention_margin_example() {
    let d = tiny_dump();
    d.validate().unwrap();
    assert_eq!(attn_region_score(&d, 0, "Red", "Green").unwrap(), 0.3);
    let c = attn_margin_curve(&d).unwrap();
    assert_eq!(c.kind, MarginKind::Attention);
    assert!((c.values[0].unwrap() - 0.2).abs() < 1e-12);
    assert_eq!(attn_region_score(&d, 1, "Red", "Green"), Err(ProbeError::LayerOutOfRange(1)));
}

#[test]
fn orthogonal_distractor_gives_unit_margin() {
    let d = tiny_dump();
    let v = repr_margin_curve(&d, Stack::Vision).unwrap();
    assert!((v.values[0].unwrap() - 1.0).abs() < 1e-12);
    // Every LLM vector equals the layer mean, so nothing is defined.
    assert_eq!(repr_margin_curve(&d, Stack::Llm).unwrap().values, vec![None]);
}

#[test]
fn region_sizes_at_interior_corner_and_edge() {
    let g = TokenGrid::new(16, 1024, 1024);
    assert_eq!((g.gw, g.gh), (64, 64));
    assert_eq!(g.region_token_set(Point2D::new(500.0, 500.0)).unwrap().len(), 9);
    assert_eq!(g.region_token_set(Point2D::new(1.0, 1.0)).unwrap().len(), 4);
    assert_eq!(g.region_token_set(Point2D::new(500.0, 1023.0)).unwrap().len(), 6);
    assert!(g.region_token_set(Point2D::new(1024.0, 3.0)).is_err());
    assert_eq!(g.flat_index(Cell::new(2, 3)), 131);
    let odd = TokenGrid::new(14, 100, 30);
    assert_eq!((odd.gw, odd.gh), (8, 3));
}

#[test]
fn validation_catches_shape_errors() {
    let mut d = tiny_dump();
    d.schema = "traceforge-dump/0".into();
    assert!(d.validate().is_err());
    let mut d = tiny_dump();
    d.attention_sub[0][1].pop();
    assert!(d.validate().is_err());
    let mut d = tiny_dump();
    d.attention_sub[0][2][0] = -0.5;
    assert!(d.validate().is_err());
    let mut d = tiny_dump();
    d.tokens.pop();
    assert!(d.validate().is_err());
    let mut d = tiny_dump();
    d.regions.retain(|r| r.name != "DistRed_1");
    assert_eq!(repr_margin_curve(&d, Stack::Vision), Err(ProbeError::NoDistractor));
    let mut d = tiny_dump();
    d.regions.retain(|r| r.name != "Green");
    assert_eq!(attn_margin_curve(&d), Err(ProbeError::MissingRegion("Green".into())));
}

#[test]
fn aggregation_skips_missing_values() {
    let c = |vals: Vec<Option<f64>>, cond: &str| MarginCurve {
        kind: MarginKind::Attention,
        counts: vec![1; vals.len()],
        values: vals,
        condition: Some(cond.into()),
    };
    let a = aggregate_margin_curves(&[c(vec![Some(1.0), None], "A"), c(vec![Some(3.0), None], "A")]).unwrap();
    assert_eq!(a.values, vec![Some(2.0), None]);
    assert_eq!(a.counts, vec![2, 0]);
    assert_eq!(aggregate_margin_curves(&[]), Err(ProbeError::EmptyGroup));
    let groups = aggregate_by_condition(&[c(vec![Some(1.0)], "A"), c(vec![Some(5.0)], "B"), c(vec![Some(2.0)], "B")]).unwrap();
    assert_eq!(groups["B"].values, vec![Some(3.5)]);
    assert_eq!(
        aggregate_by_condition(&[c(vec![Some(1.0)], "A"), c(vec![Some(1.0), None], "A")]),
        Err(ProbeError::Ragged("A".into()))
    );
}

#[test]
fn dump_json_round_trip() {
    let d = tiny_dump();
    let s = serde_json::to_string(&d).unwrap();
    let back: RegionDump = serde_json::from_str(&s).unwrap();
    assert_eq!(back, d);
}
