use semiflow_web::{catalog_list, classify_text, portrait_text, trace_text};
use serde_json::Value;

#[test]
fn portrait_with_outlines() {
    let svg = portrait_text("@bfid-par", 8, 6, true).unwrap();
    assert_eq!(svg.matches("class=\"traj\"").count(), 6);
    assert_eq!(svg.matches("class=\"bfid\"").count(), 3);
    assert!(portrait_text("z+", 8, 6, false).unwrap_err().starts_with("syntax-error"));
}

#[test]
fn classify_quadrant() {
    let v: Value = serde_json::from_str(&classify_text("@quadrant").unwrap()).unwrap();
    assert_eq!(v["regime"], "tangential");
    assert_eq!(v["type"], "parabolic");
}

#[test]
fn trace_points() {
    let v: Value = serde_json::from_str(&trace_text("-(1-z)^2*i", 0.0, 0.0, 10.0).unwrap()).unwrap();
    let pts = v["points"].as_array().unwrap();
    let last = pts.last().unwrap();
    assert_eq!(last[0].as_f64().unwrap(), 10.0);
    assert!((last[1].as_f64().unwrap() - 100.0 / 101.0).abs() < 1e-9);
    assert!(trace_text("z^2-1", 2.0, 0.0, 1.0).unwrap_err().starts_with("not-in-disk"));
}

#[test]
fn catalog_ids() {
    let v: Value = serde_json::from_str(&catalog_list()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 12);
}
