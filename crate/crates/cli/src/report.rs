use std::fmt::Write as _;

use senrec_core::{CoherenceElement, Decoded, Execution, Plan, ScaleRecord, Stage};
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct Element {
    pub label: String,
    /// Receiver pattern `N_R`; the column is always the receiver vacuum.
    pub row: String,
    pub stage: &'static str,
    pub value: [f64; 2],
}

#[derive(Debug, Serialize)]
pub struct Value {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl Value {
    pub fn from_decoded(d: &Decoded<f64>) -> Self {
        let (rows, cols) = match d {
            Decoded::Scalar(_) => (1, 1),
            Decoded::Vector(v) => (v.len(), 1),
            Decoded::Matrix(m) => (m.rows(), m.cols()),
        };
        Value {
            rows,
            cols,
            data: d.values().iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub operation: &'static str,
    pub engine: &'static str,
    pub scales: Vec<f64>,
    pub decode_constant: [f64; 2],
    pub extracted: Vec<Element>,
    pub result: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_deviation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub passed: Option<bool>,
    pub wall_time_ms: f64,
}

fn scale_list(s: &ScaleRecord<f64>) -> Vec<f64> {
    s.factors()
}

fn element(e: &CoherenceElement<f64>) -> Element {
    Element {
        label: e.label.to_string(),
        row: e.row.to_string(),
        stage: match e.stage {
            Stage::Receiver => "receiver",
            Stage::Transformed => "transformed",
        },
        value: [e.value.re, e.value.im],
    }
}

impl RunReport {
    pub fn new(plan: &Plan, run: &Execution<f64>) -> Self {
        let k = plan.decoding.constant();
        RunReport {
            operation: plan.operation.name(),
            engine: run.engine.name(),
            scales: scale_list(&plan.scale),
            decode_constant: [k.re, k.im],
            extracted: run.elements.iter().map(element).collect(),
            result: Value::from_decoded(&run.decoded),
            oracle: None,
            max_deviation: None,
            tolerance: None,
            passed: None,
            wall_time_ms: 0.0,
        }
    }

    pub fn verify(&mut self, run: &Execution<f64>, reference: &Decoded<f64>, tolerance: f64) {
        let dev = run.decoded.max_abs_diff(reference).unwrap_or(f64::INFINITY);
        self.oracle = Some(Value::from_decoded(reference));
        self.max_deviation = Some(dev);
        self.tolerance = Some(tolerance);
        self.passed = Some(dev <= tolerance);
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "operation: {}", self.operation);
        let _ = writeln!(out, "engine: {}", self.engine);
        let scales: Vec<String> = self.scales.iter().map(|s| s.to_string()).collect();
        let _ = writeln!(out, "input scales: {}", scales.join(", "));
        let _ = writeln!(out, "decode constant: {}", fmt_pair(self.decode_constant));
        let _ = writeln!(out, "extracted elements:");
        for e in &self.extracted {
            let rho = if e.stage == "transformed" { "ξ" } else { "ρ" };
            let zeros = "0".repeat(e.row.len());
            let _ = writeln!(
                out,
                "  {:<18} {rho}[{};{zeros}] = {}",
                e.label,
                e.row,
                fmt_pair(e.value)
            );
        }
        let _ = writeln!(out, "result:");
        write_value(&mut out, &self.result);
        if let Some(o) = &self.oracle {
            let _ = writeln!(out, "oracle:");
            write_value(&mut out, o);
        }
        if let (Some(dev), Some(tol), Some(ok)) = (self.max_deviation, self.tolerance, self.passed)
        {
            let verdict = if ok { "PASS" } else { "FAIL" };
            let _ = writeln!(
                out,
                "max deviation: {dev:.3e} (tolerance {tol:e}) {verdict}"
            );
        }
        let _ = writeln!(out, "wall time: {:.3} ms", self.wall_time_ms);
        out
    }
}

fn fmt_pair([re, im]: [f64; 2]) -> String {
    if im == 0.0 {
        format!("{re}")
    } else if im < 0.0 {
        format!("{re} - {}i", -im)
    } else {
        format!("{re} + {im}i")
    }
}

fn write_value(out: &mut String, v: &Value) {
    for i in 0..v.rows {
        let row: Vec<String> = (0..v.cols)
            .map(|j| fmt_pair(v.data[i * v.cols + j]))
            .collect();
        let _ = writeln!(out, "  [{}]", row.join(", "));
    }
}

/// Per-operation tally of the `selftest` command.
#[derive(Debug, Default, Serialize)]
pub struct SelfTestLine {
    pub operation: &'static str,
    pub instances: usize,
    pub failures: usize,
    pub max_deviation: f64,
}

#[derive(Debug, Serialize)]
pub struct SelfTestReport {
    pub seed: u64,
    pub engine: &'static str,
    pub tolerance: f64,
    pub operations: Vec<SelfTestLine>,
    pub passed: bool,
    pub wall_time_ms: f64,
}

impl SelfTestReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "selftest seed {} on the {} engine, tolerance {:e}",
            self.seed, self.engine, self.tolerance
        );
        for l in &self.operations {
            let _ = writeln!(
                out,
                "  {:<7} {:>4} instances, {} failures, max deviation {:.3e}",
                l.operation, l.instances, l.failures, l.max_deviation
            );
        }
        let _ = writeln!(out, "{}", if self.passed { "PASS" } else { "FAIL" });
        let _ = writeln!(out, "wall time: {:.3} ms", self.wall_time_ms);
        out
    }
}
