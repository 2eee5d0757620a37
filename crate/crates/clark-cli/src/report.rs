//! Machine-readable reports and measure serialization.
//!
//! Reports carry no timestamps or environment data, so identical
//! configuration and seed produce byte-identical output.

use clark_core::measures::{AcDensity, CircleMeasure, TorusMeasure};
use clark_core::numerics::shifted_circle_grid;
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub residual: Option<f64>,
    pub threshold: f64,
    pub pass: bool,
    pub skipped: bool,
}

impl Check {
    pub fn measured(name: &'static str, residual: f64, threshold: f64) -> Self {
        Check {
            name,
            residual: Some(residual),
            threshold,
            pass: residual < threshold,
            skipped: false,
        }
    }

    pub fn skipped(name: &'static str, threshold: f64) -> Self {
        Check {
            name,
            residual: None,
            threshold,
            pass: true,
            skipped: true,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: &'static str,
    pub config: RunConfig,
    pub checks: Vec<Check>,
    pub artifacts: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateDto>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateDto {
    pub representation: String,
    pub poisson_match_residual: f64,
    pub mass_residual: f64,
    pub exceptional: bool,
    pub accepted: bool,
}

impl From<&clark_core::clark::ClarkCertificate> for CertificateDto {
    fn from(cert: &clark_core::clark::ClarkCertificate) -> Self {
        CertificateDto {
            representation: cert.representation.to_string(),
            poisson_match_residual: cert.poisson_match_residual,
            mass_residual: cert.mass_residual,
            exceptional: cert.exceptional,
            accepted: cert.accepted(),
        }
    }
}

/// Fixed-width scientific formatting with 17 significant digits, used for all
/// floating-point CSV output.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn complex_pair(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn circle_to_json(c: &CircleMeasure, samples: usize) -> Value {
    match c {
        CircleMeasure::Lebesgue => json!({"variant": "lebesgue"}),
        CircleMeasure::Atom { position, weight } => json!({
            "variant": "atom",
            "position": complex_pair(*position),
            "weight": weight,
        }),
        CircleMeasure::AtomicSet(atoms) => json!({
            "variant": "atomic_set",
            "atoms": atoms
                .iter()
                .map(|(p, w)| json!({"position": complex_pair(*p), "weight": w}))
                .collect::<Vec<_>>(),
        }),
        CircleMeasure::Density(w) => {
            let table: Vec<Value> = shifted_circle_grid(samples)
                .into_iter()
                .map(|z| json!([z.arg(), w(z)]))
                .collect();
            json!({"variant": "density", "samples": table})
        }
    }
}

/// Variant tag plus parameters; graph branch tables go to CSV separately and
/// are referenced by artifact name.
pub fn measure_to_json(m: &TorusMeasure, graph_artifact: Option<&str>) -> Value {
    match m {
        TorusMeasure::Product(components) => json!({
            "variant": "product",
            "components": components
                .iter()
                .map(|c| circle_to_json(c, 512))
                .collect::<Vec<_>>(),
        }),
        TorusMeasure::Graph(g) => json!({
            "variant": "graph",
            "param_coord": g.param_coord,
            "nodes": g.nodes(),
            "branches": g.branches.len(),
            "excluded_nodes": g.excluded.len(),
            "discontinuity_flags": g.discontinuities.len(),
            "collision_flags": g.collisions.len(),
            "table": graph_artifact,
        }),
        TorusMeasure::AbsCont(AcDensity::Generic { dim, .. }) => json!({
            "variant": "abs_cont",
            "kind": "generic",
            "dim": dim,
        }),
        TorusMeasure::AbsCont(AcDensity::DiagonalPoisson { center_angle }) => json!({
            "variant": "abs_cont",
            "kind": "diagonal_poisson",
            "center_angle": center_angle,
        }),
        TorusMeasure::Atomic(atoms) => json!({
            "variant": "atomic",
            "atoms": atoms
                .iter()
                .map(|(p, w)| json!({
                    "position": p.coords().iter().map(|z| complex_pair(*z)).collect::<Vec<_>>(),
                    "weight": complex_pair(*w),
                }))
                .collect::<Vec<_>>(),
        }),
        TorusMeasure::Sum(parts) => json!({
            "variant": "sum",
            "parts": parts
                .iter()
                .map(|(c, part)| json!({
                    "coefficient": c,
                    "measure": measure_to_json(part, graph_artifact),
                }))
                .collect::<Vec<_>>(),
        }),
    }
}

/// Graph branch table: angle, branch index, branch angle, weight. Long graphs
/// are downsampled to about `rows` rows.
pub fn graph_to_csv(g: &clark_core::measures::GraphMeasure, rows: usize) -> String {
    let mut out = String::from("angle,branch,eta_angle,weight\n");
    let stride = (g.nodes() / rows.max(1)).max(1);
    for j in (0..g.nodes()).step_by(stride) {
        for (k, branch) in g.branches.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                fmt17(g.xi[j].arg()),
                k,
                fmt17(branch.eta[j].arg()),
                fmt17(branch.weights[j]),
            ));
        }
    }
    out
}

/// Rational map as coefficient grids, row-major by multi-degree with
/// real/imaginary pairs; the same schema `--phi <file.json>` accepts.
pub fn phi_to_json(map: &clark_core::RationalMap) -> Value {
    let poly = |p: &clark_core::rational::MultiPoly| -> Value {
        json!({
            "dims": p.dims(),
            "coeffs": p.coeffs().iter().map(|c| complex_pair(*c)).collect::<Vec<_>>(),
        })
    };
    json!({
        "n": map.n(),
        "numerator": poly(map.num()),
        "denominator": poly(map.den()),
    })
}

/// Per-degree density-scan rows across a parameter grid:
/// alpha in turns, degree, residual, condition estimate.
pub fn gram_reports_to_csv(reports: &[(f64, clark_core::model_space::GramReport)]) -> String {
    let mut out = String::from("alpha_turns,degree,residual,condition\n");
    for (turns, report) in reports {
        for row in &report.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                fmt17(*turns),
                row.degree,
                fmt17(row.residual),
                fmt17(row.condition),
            ));
        }
    }
    out
}
