//! Plot data for the 2×2 case, where `M` is a segment parametrized by `μ₁₁`.
//!
//! Every object is written as two columns holding the first row of its
//! matrices, `(μ₁₁, μ₁₂)`; the other entries follow from the margins.

use std::fmt::Write as _;

use ndarray::{array, Array2};
use surplus_id::market::barycenter;
use surplus_id::polytope::{self, contains};
use surplus_id::{Margins, Matching};

use crate::format::format_real;
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct GeometryEmission {
    /// Endpoints of `M`, at `μ₁₁ = max(0, p₁ + q₁ − 1)` and `μ₁₁ = min(p₁, q₁)`.
    pub segment: [Array2<f64>; 2],
    pub barycenter: Array2<f64>,
    pub mu_hat: Array2<f64>,
    pub mu_star: Option<Array2<f64>>,
    pub t_star: Option<f64>,
    /// From `p⊗q` to `μ*`.
    pub ray: Option<[Array2<f64>; 2]>,
}

fn point_on_segment(margins: &Margins, m11: f64) -> Array2<f64> {
    let (p, q) = (margins.p(), margins.q());
    array![[m11, p[0] - m11], [q[0] - m11, p[1] - q[0] + m11]]
}

pub fn emit(mu_hat: &Matching, tol: f64) -> Result<GeometryEmission, CliError> {
    let margins = mu_hat.margins();
    if margins.shape() != (2, 2) {
        return Err(CliError::Usage(format!(
            "geometry needs a 2×2 market, got {}×{}",
            margins.dx(),
            margins.dy()
        )));
    }
    let (p1, q1) = (margins.p()[0], margins.q()[0]);
    let segment = [
        point_on_segment(margins, (p1 + q1 - 1.0).max(0.0)),
        point_on_segment(margins, p1.min(q1)),
    ];
    let center = barycenter(margins).mu().clone();
    let gauge = match polytope::gauge(mu_hat) {
        Ok(g) => Some(g),
        Err(surplus_id::Error::RayUndefined) => None,
        Err(e) => return Err(e.into()),
    };
    let mu_star = gauge.as_ref().map(|g| g.mu_star.mu().clone());
    let emission = GeometryEmission {
        ray: mu_star.clone().map(|s| [center.clone(), s]),
        t_star: gauge.map(|g| g.t_star),
        segment,
        barycenter: center,
        mu_hat: mu_hat.mu().clone(),
        mu_star,
    };
    let mut points: Vec<&Array2<f64>> = emission.segment.iter().collect();
    points.extend([&emission.barycenter, &emission.mu_hat]);
    points.extend(emission.mu_star.iter());
    points.extend(emission.ray.iter().flatten());
    if let Some(bad) = points.iter().find(|a| !contains(a, margins, tol.max(1e-9))) {
        return Err(CliError::Domain(surplus_id::Error::Internal(format!(
            "emitted point {bad:?} is outside M"
        ))));
    }
    Ok(emission)
}

const OBJECTS: [&str; 5] = ["segment", "barycenter", "mu_hat", "mu_star", "ray"];

/// Whitespace-separated columns, one header line, two data rows. Objects with a
/// single point leave the second row as `NaN`.
pub fn render(e: &GeometryEmission) -> String {
    let columns: [Vec<&Array2<f64>>; 5] = [
        e.segment.iter().collect(),
        vec![&e.barycenter],
        vec![&e.mu_hat],
        e.mu_star.iter().collect(),
        e.ray.iter().flatten().collect(),
    ];
    let mut out = String::new();
    let header: Vec<String> = OBJECTS
        .iter()
        .flat_map(|o| [format!("{o}.mu11"), format!("{o}.mu12")])
        .collect();
    writeln!(out, "{}", header.join(" ")).unwrap();
    for row in 0..2 {
        let cells: Vec<String> = columns
            .iter()
            .flat_map(|pts| match pts.get(row) {
                Some(a) => [format_real(a[[0, 0]]), format_real(a[[0, 1]])],
                None => ["NaN".to_string(), "NaN".to_string()],
            })
            .collect();
        writeln!(out, "{}", cells.join(" ")).unwrap();
    }
    out
}
