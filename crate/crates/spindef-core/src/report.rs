//! Structured check records and deterministic report rendering.
//!
//! Reports serialize to pretty JSON with sorted object keys and to RFC 4180
//! CSV; both renderings are byte-stable for identical inputs, so reports
//! can be frozen and compared verbatim.

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::dirac_matter::PhysicalConstants;
use crate::linalg::{CMat2, CMat4, Mat4};
use crate::spin_algebra::constants;

/// Sample point a record refers to.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PointRef {
    pub index: usize,
    pub x: [f64; 4],
}

/// One named check outcome, optionally tied to a sample point.
#[derive(Debug, Clone, Serialize)]
pub struct Record {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<PointRef>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub values: Value,
}

impl Record {
    /// A residual measured against a tolerance.
    pub fn check(
        name: impl Into<String>,
        point: Option<PointRef>,
        residual: f64,
        tolerance: f64,
        values: Value,
    ) -> Record {
        Record {
            name: name.into(),
            point,
            residual: Some(residual),
            tolerance: Some(tolerance),
            pass: residual.is_finite() && residual <= tolerance,
            values,
        }
    }

    /// A residual recorded without a pass gate.
    pub fn informational(
        name: impl Into<String>,
        point: Option<PointRef>,
        residual: f64,
        values: Value,
    ) -> Record {
        Record {
            name: name.into(),
            point,
            residual: Some(residual),
            tolerance: None,
            pass: true,
            values,
        }
    }

    /// A structural pass/fail outcome with no residual.
    pub fn status(
        name: impl Into<String>,
        point: Option<PointRef>,
        pass: bool,
        values: Value,
    ) -> Record {
        Record {
            name: name.into(),
            point,
            residual: None,
            tolerance: None,
            pass,
            values,
        }
    }

    /// A check that could not be evaluated.
    pub fn failure(
        name: impl Into<String>,
        point: Option<PointRef>,
        message: impl AsRef<str>,
    ) -> Record {
        Record {
            name: name.into(),
            point,
            residual: None,
            tolerance: None,
            pass: false,
            values: json!({ "error": message.as_ref() }),
        }
    }
}

/// A full run over one scenario.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub scenario: String,
    pub seed: u64,
    pub tolerance_scale: f64,
    pub all_pass: bool,
    pub records: Vec<Record>,
}

impl Report {
    pub fn new(scenario: impl Into<String>, seed: u64, tolerance_scale: f64) -> Report {
        Report {
            scenario: scenario.into(),
            seed,
            tolerance_scale,
            all_pass: true,
            records: Vec::new(),
        }
    }

    pub fn push(&mut self, record: Record) {
        self.all_pass &= record.pass;
        self.records.push(record);
    }

    /// Names of the failing records, deduplicated, in report order.
    pub fn failing_names(&self) -> Vec<String> {
        let mut seen = std::collections::BTreeSet::new();
        let mut out = Vec::new();
        for r in &self.records {
            if !r.pass && seen.insert(r.name.clone()) {
                out.push(r.name.clone());
            }
        }
        out
    }

    /// Canonical record order: point-free records first by name, then by
    /// point index and name.
    pub fn sort_records(&mut self) {
        self.records.sort_by(|a, b| match (&a.point, &b.point) {
            (None, None) => a.name.cmp(&b.name),
            (None, Some(_)) => std::cmp::Ordering::Less,
            (Some(_), None) => std::cmp::Ordering::Greater,
            (Some(pa), Some(pb)) => pa.index.cmp(&pb.index).then_with(|| a.name.cmp(&b.name)),
        });
    }

    /// Pretty JSON with sorted keys and a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// RFC 4180 CSV with a fixed header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,point_index,x0,x1,x2,x3,residual,tolerance,pass,values\n");
        for r in &self.records {
            out.push_str(&csv_field(&r.name));
            out.push(',');
            match &r.point {
                Some(p) => {
                    out.push_str(&format!(
                        "{},{},{},{},{}",
                        p.index, p.x[0], p.x[1], p.x[2], p.x[3]
                    ));
                }
                None => out.push_str(",,,,"),
            }
            out.push(',');
            if let Some(res) = r.residual {
                out.push_str(&format!("{res:e}"));
            }
            out.push(',');
            if let Some(tol) = r.tolerance {
                out.push_str(&format!("{tol:e}"));
            }
            out.push(',');
            out.push_str(if r.pass { "true" } else { "false" });
            out.push(',');
            if !r.values.is_null() {
                out.push_str(&csv_field(
                    &serde_json::to_string(&r.values).expect("values serialize"),
                ));
            }
            out.push('\n');
        }
        out
    }
}

fn csv_field(raw: &str) -> String {
    if raw.contains(',') || raw.contains('"') || raw.contains('\n') {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw.to_owned()
    }
}

fn complex_entry(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn cmat2_json(m: &CMat2) -> Value {
    Value::Array(
        m.iter()
            .map(|row| Value::Array(row.iter().map(|&z| complex_entry(z)).collect()))
            .collect(),
    )
}

fn cmat4_json(m: &CMat4) -> Value {
    Value::Array(
        m.iter()
            .map(|row| Value::Array(row.iter().map(|&z| complex_entry(z)).collect()))
            .collect(),
    )
}

fn mat4_json(m: &Mat4) -> Value {
    json!(m)
}

fn physical_json(k: &PhysicalConstants) -> Value {
    json!({
        "hbar": k.hbar,
        "c": k.c,
        "gravitational": k.gravitational,
        "mass": k.mass,
        "einstein_coupling": k.einstein_coupling(),
    })
}

/// All constant tables and unit systems as deterministic JSON (complex
/// entries rendered as `[re, im]` pairs).
pub fn constants_json() -> String {
    let k = constants();
    let doc = json!({
        "metric": mat4_json(&k.metric),
        "metric_dual": mat4_json(&k.metric_dual),
        "spin_metric_2": cmat2_json(&k.d2),
        "spin_metric_2_dual": cmat2_json(&k.d2_dual),
        "spin_metric_4": cmat4_json(&k.d4),
        "spin_metric_4_dual": cmat4_json(&k.d4_dual),
        "chirality": cmat4_json(&k.chirality),
        "pairing": cmat4_json(&k.pairing),
        "pauli": Value::Array(k.pauli.iter().map(cmat2_json).collect()),
        "gamma": Value::Array(k.gamma.iter().map(cmat4_json).collect()),
        "physical": {
            "cgs-electron": physical_json(&PhysicalConstants::cgs_electron()),
            "natural": physical_json(&PhysicalConstants::natural()),
        },
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("constants serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_sorting_and_failures() {
        let mut r = Report::new("demo", 1, 1.0);
        r.push(Record::check(
            "b_check",
            Some(PointRef {
                index: 1,
                x: [0.0; 4],
            }),
            2.0,
            1.0,
            Value::Null,
        ));
        r.push(Record::status("a_global", None, true, Value::Null));
        r.push(Record::check(
            "a_check",
            Some(PointRef {
                index: 0,
                x: [0.0; 4],
            }),
            0.5,
            1.0,
            Value::Null,
        ));
        r.sort_records();
        assert!(!r.all_pass);
        assert_eq!(r.records[0].name, "a_global");
        assert_eq!(r.records[1].name, "a_check");
        assert_eq!(r.failing_names(), vec!["b_check".to_owned()]);
    }

    #[test]
    fn json_rendering_is_stable() {
        let mut r = Report::new("demo", 7, 1.0);
        r.push(Record::informational(
            "value_probe",
            None,
            1.25e-9,
            json!({"beta": 2.0, "alpha": 1.0}),
        ));
        let a = r.to_json();
        let b = r.to_json();
        assert_eq!(a, b);
        // Keys of value maps render sorted.
        let alpha = a.find("alpha").unwrap();
        let beta = a.find("beta").unwrap();
        assert!(alpha < beta);
        assert!(a.ends_with('\n'));
    }

    #[test]
    fn csv_escapes_embedded_quotes_and_commas() {
        let mut r = Report::new("demo", 0, 1.0);
        r.push(Record::failure("weird", None, "a \"b\", c"));
        let csv = r.to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "name,point_index,x0,x1,x2,x3,residual,tolerance,pass,values"
        );
        let row = lines.next().unwrap();
        assert!(row.starts_with("weird,,,,,,,,false,"));
        assert!(row.contains("\"{\"\"error\"\":\"\"a \\\"\"b\\\"\", c\"\"}\""));
    }

    #[test]
    fn constants_json_is_stable_and_complete() {
        let a = constants_json();
        assert_eq!(a, constants_json());
        for key in [
            "metric",
            "spin_metric_4",
            "chirality",
            "pairing",
            "pauli",
            "gamma",
            "einstein_coupling",
        ] {
            assert!(a.contains(key), "missing {key}");
        }
    }
}
