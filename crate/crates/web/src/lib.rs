//! Browser bindings: a planar shattered set with its witness ellipsoids, the
//! separation oracle on user-placed points, and Radon refutations of six
//! points. Every export returns a JSON string.

use ellipsoid_vc::lifting::Ellipsoid;
use ellipsoid_vc::realizability::{LabeledPointSet, Oracle, Realizability};
use ellipsoid_vc::shattering::{build_shatter_witness, find_unrealizable_labeling, RefutationKind};
use ellipsoid_vc::{PointSet, Tolerances};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Debug, Serialize)]
pub struct EllipseView {
    pub center: Vec<f64>,
    pub matrix: Vec<Vec<f64>>,
}

impl From<&Ellipsoid> for EllipseView {
    fn from(e: &Ellipsoid) -> Self {
        EllipseView { center: e.center().to_vec(), matrix: e.matrix().to_rows() }
    }
}

#[derive(Debug, Serialize)]
pub struct WitnessView {
    pub points: Vec<Vec<f64>>,
    pub delta: f64,
    /// Indexed by subset bitmask.
    pub ellipses: Vec<EllipseView>,
}

#[derive(Debug, Serialize)]
pub struct OracleView {
    pub realizable: bool,
    pub margin: f64,
    pub ellipse: Option<EllipseView>,
}

#[derive(Debug, Serialize)]
pub struct RefutationView {
    pub labeling: u64,
    pub kind: &'static str,
    pub margin: f64,
}

fn planar(points: &[f64]) -> Result<PointSet, String> {
    if !points.len().is_multiple_of(2) {
        return Err("expected an even number of coordinates".into());
    }
    PointSet::new(2, points.chunks(2).map(|c| c.to_vec()).collect()).map_err(|e| e.to_string())
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

pub fn witness_json(seed: u64) -> Result<String, String> {
    let w = build_shatter_witness(2, seed, &Tolerances::default()).map_err(|e| e.to_string())?;
    to_json(&WitnessView {
        points: w.points.points().to_vec(),
        delta: w.delta,
        ellipses: w.subsets.iter().map(|s| EllipseView::from(&s.ellipsoid)).collect(),
    })
}

pub fn oracle_json(points: &[f64], labels: u64) -> Result<String, String> {
    let l = LabeledPointSet::new(planar(points)?, labels).map_err(|e| e.to_string())?;
    let view = match Oracle::default().decide(&l).map_err(|e| e.to_string())? {
        Realizability::Realizable(c) => OracleView { realizable: true, margin: c.margin, ellipse: c.ellipsoid.as_ref().map(EllipseView::from) },
        r @ Realizability::Infeasible(_) => OracleView { realizable: false, margin: r.lp_margin(), ellipse: None },
    };
    to_json(&view)
}

pub fn refute_json(points: &[f64]) -> Result<String, String> {
    let c = find_unrealizable_labeling(&planar(points)?, &Tolerances::default()).map_err(|e| e.to_string())?;
    let kind = match c.kind {
        RefutationKind::Radon => "radon",
        RefutationKind::EqualProjection => "equal-projection",
    };
    to_json(&RefutationView { labeling: c.labeling, kind, margin: c.confirmation.lp_margin })
}

/// Five unit vectors and one witness ellipse per subset.
#[wasm_bindgen]
pub fn shatter_witness(seed: u32) -> Result<String, JsValue> {
    witness_json(seed as u64).map_err(|e| JsValue::from_str(&e))
}

/// `points` is a flat `[x0, y0, x1, y1, …]`; bit `i` of `labels` marks
/// point `i` as inside.
#[wasm_bindgen]
pub fn separate(points: &[f64], labels: u32) -> Result<String, JsValue> {
    oracle_json(points, labels as u64).map_err(|e| JsValue::from_str(&e))
}

/// Six planar points, flat; returns a labeling no ellipse cuts out.
#[wasm_bindgen]
pub fn refute(points: &[f64]) -> Result<String, JsValue> {
    refute_json(points).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn witness_view_has_all_subsets() {
        let v: serde_json::Value = serde_json::from_str(&witness_json(3).unwrap()).unwrap();
        assert_eq!(v["points"].as_array().unwrap().len(), 5);
        assert_eq!(v["ellipses"].as_array().unwrap().len(), 32);
    }

    #[test]
    fn oracle_on_square_diagonal() {
        let sq = [0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0];
        let v: serde_json::Value = serde_json::from_str(&oracle_json(&sq, 0b1001).unwrap()).unwrap();
        assert_eq!(v["realizable"], true);
        assert!(v["ellipse"]["matrix"].is_array());
        assert!(oracle_json(&sq[..7], 1).is_err());
    }

    #[test]
    fn refutes_six_points() {
        let pts = [0.1, 0.2, -0.7, 0.4, 0.5, -0.9, 0.8, 0.6, -0.3, -0.5, 0.0, 0.9];
        let v: serde_json::Value = serde_json::from_str(&refute_json(&pts).unwrap()).unwrap();
        assert!(v["margin"].as_f64().unwrap() <= 1e-7);
        assert!(refute_json(&pts[..10]).is_err());
    }
}
