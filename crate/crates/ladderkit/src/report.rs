//! Table serialization: CSV and JSON shapes shared by the library and the
//! command-line front end. CSV uses `,` separators, `.` decimal points and
//! LF line endings; metadata rides in `#`-prefixed comment lines.

use serde::Serialize;

use crate::grid::LevelSequence;
use crate::oracle::{SpectrumReport, SpectrumRow};
use crate::weight::WeightLevel;

/// One `(n, value)` sample of a sequence.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SeqPoint {
    pub n: i64,
    pub value: f64,
}

/// Interior samples of a sequence as JSON-ready points.
pub fn sequence_points(x: &LevelSequence) -> Vec<SeqPoint> {
    x.grid()
        .interior()
        .map(|n| SeqPoint { n, value: x.value(n) })
        .collect()
}

/// CSV table `n,value` over the interior.
pub fn sequence_csv(x: &LevelSequence) -> String {
    let mut out = String::from("n,value\n");
    for n in x.grid().interior() {
        out.push_str(&format!("{},{}\n", n, x.value(n)));
    }
    out
}

/// One `(n, rho)` sample of a weight.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct WeightPoint {
    pub n: i64,
    pub rho: f64,
}

pub fn weight_points(w: &WeightLevel) -> Vec<WeightPoint> {
    w.grid()
        .interior()
        .map(|n| WeightPoint { n, rho: w.rho(n) })
        .collect()
}

/// CSV table `n,rho` with metadata comment lines first.
pub fn weight_csv(w: &WeightLevel, metadata: &[(String, String)]) -> String {
    let mut out = String::new();
    for (key, value) in metadata {
        out.push_str(&format!("# {key}={value}\n"));
    }
    out.push_str("n,rho\n");
    for n in w.grid().interior() {
        out.push_str(&format!("{},{}\n", n, w.rho(n)));
    }
    out
}

/// CSV table `n,P0,P1,...` over the interior.
pub fn polynomials_csv(polys: &[LevelSequence]) -> String {
    let mut out = String::from("n");
    for l in 0..polys.len() {
        out.push_str(&format!(",P{l}"));
    }
    out.push('\n');
    if let Some(first) = polys.first() {
        for n in first.grid().interior() {
            out.push_str(&n.to_string());
            for p in polys {
                out.push_str(&format!(",{}", p.value(n)));
            }
            out.push('\n');
        }
    }
    out
}

/// Polynomial values keyed by degree, JSON-ready.
#[derive(Clone, Debug, Serialize)]
pub struct PolynomialTable {
    pub level: usize,
    pub columns: Vec<Vec<SeqPoint>>,
}

pub fn polynomial_table(level: usize, polys: &[LevelSequence]) -> PolynomialTable {
    PolynomialTable {
        level,
        columns: polys.iter().map(sequence_points).collect(),
    }
}

/// Pairwise products of the generated polynomials with the boundary
/// residuals of the weight they were measured under.
#[derive(Clone, Debug, Serialize)]
pub struct GramReport {
    pub level: usize,
    pub boundary_left: f64,
    pub boundary_right: f64,
    pub max_offdiagonal_rel: f64,
    pub pass: bool,
    pub gram: Vec<Vec<f64>>,
}

/// CSV rows `p,alpha_p,nearest_oracle,abs_err`.
pub fn spectrum_csv(report: &SpectrumReport) -> String {
    let mut out = String::from("p,alpha_p,nearest_oracle,abs_err\n");
    for SpectrumRow {
        p,
        alpha_p,
        nearest_oracle,
        abs_err,
        ..
    } in &report.rows
    {
        out.push_str(&format!("{p},{alpha_p},{nearest_oracle},{abs_err}\n"));
    }
    out
}
