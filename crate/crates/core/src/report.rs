//! Machine-readable check records.

use serde::Serialize;

/// One measured quantity compared against its tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub quantity: String,
    pub value: f64,
    pub tolerance: f64,
    /// How `value` is compared with `tolerance`: "<=" or "<".
    pub relation: &'static str,
    pub mesh_id: String,
    pub resolution: Option<u32>,
    pub passed: bool,
}

impl Record {
    /// Passes when value ≤ tolerance (NaN fails).
    pub fn at_most(
        quantity: impl Into<String>,
        value: f64,
        tolerance: f64,
        mesh_id: impl Into<String>,
        resolution: Option<u32>,
    ) -> Self {
        Record {
            quantity: quantity.into(),
            value,
            tolerance,
            relation: "<=",
            mesh_id: mesh_id.into(),
            resolution,
            passed: value <= tolerance,
        }
    }

    /// Passes when value < limit strictly.
    pub fn below(
        quantity: impl Into<String>,
        value: f64,
        limit: f64,
        mesh_id: impl Into<String>,
        resolution: Option<u32>,
    ) -> Self {
        Record {
            quantity: quantity.into(),
            value,
            tolerance: limit,
            relation: "<",
            mesh_id: mesh_id.into(),
            resolution,
            passed: value < limit,
        }
    }
}

/// Records that failed.
pub fn failures(records: &[Record]) -> Vec<&Record> {
    records.iter().filter(|r| !r.passed).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comparisons() {
        assert!(Record::at_most("q", 1.0, 1.0, "m", None).passed);
        assert!(!Record::below("q", 0.0, 0.0, "m", None).passed);
        assert!(!Record::at_most("q", f64::NAN, 1.0, "m", Some(2)).passed);
        let r = [
            Record::at_most("a", 2.0, 1.0, "m", None),
            Record::below("b", -1.0, 0.0, "m", None),
        ];
        assert_eq!(failures(&r).len(), 1);
    }

    #[test]
    fn serialises_flat() {
        let json =
            serde_json::to_string(&Record::at_most("f", 0.5, 1.0, "sphere", Some(3))).unwrap();
        assert_eq!(
            json,
            r#"{"quantity":"f","value":0.5,"tolerance":1.0,"relation":"<=","mesh_id":"sphere","resolution":3,"passed":true}"#
        );
    }
}
