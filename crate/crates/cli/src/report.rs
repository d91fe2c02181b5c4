use std::collections::BTreeMap;

use cheq_core::linalg::{ComplexMatrix, C64};
use cheq_core::projective::ProjectivePoint;
use cheq_core::Tolerances;
use serde::Serialize;
use serde_json::{json, Value};

pub const VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ToleranceEcho {
    pub unitary: f64,
    pub rank: f64,
    pub null: f64,
    pub class: f64,
    pub fix: f64,
    pub eig: f64,
}

impl From<&Tolerances> for ToleranceEcho {
    fn from(t: &Tolerances) -> Self {
        Self {
            unitary: t.unitary,
            rank: t.rank,
            null: t.null,
            class: t.class,
            fix: t.fix,
            eig: t.eig,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub version: &'static str,
    pub command: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceEcho>,
    pub results: Value,
    /// Wall-clock seconds per phase, present only with `--timings`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<BTreeMap<String, f64>>,
}

impl RunReport {
    pub fn new(command: Vec<String>, tolerances: Option<&Tolerances>, results: Value) -> Self {
        Self {
            version: VERSION,
            command,
            tolerances: tolerances.map(ToleranceEcho::from),
            results,
            timings: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub fn complex(z: C64) -> Value {
    json!([z.re, z.im])
}

pub fn point(p: &ProjectivePoint) -> Value {
    Value::Array(p.rep().iter().map(|&z| complex(z)).collect())
}

pub fn matrix(m: &ComplexMatrix) -> Value {
    Value::Array(
        m.rows()
            .into_iter()
            .map(|r| Value::Array(r.into_iter().map(complex).collect()))
            .collect(),
    )
}

/// Records elapsed times per named phase.
#[derive(Debug, Default)]
pub struct Stopwatch {
    laps: BTreeMap<String, f64>,
}

impl Stopwatch {
    pub fn time<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let t0 = std::time::Instant::now();
        let out = f();
        self.laps
            .insert(name.to_string(), t0.elapsed().as_secs_f64());
        out
    }

    pub fn into_map(self) -> BTreeMap<String, f64> {
        self.laps
    }
}
