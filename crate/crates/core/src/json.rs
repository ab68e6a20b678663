//! Float formatting for JSON output: every number is written with 17
//! significant digits so that it parses back to the identical `f64`.

use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

/// Scientific notation with 17 significant digits.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn raw(v: f64) -> Result<Box<RawValue>, serde_json::Error> {
    RawValue::from_string(format_f64(v))
}

pub fn f64_17<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    let r = raw(*v).map_err(serde::ser::Error::custom)?;
    r.serialize(s)
}

pub fn vec_f64_17<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for &x in v {
        let r = raw(x).map_err(serde::ser::Error::custom)?;
        seq.serialize_element(&r)?;
    }
    seq.end()
}
