//! Geometry of the transportation polytope `M(p, q)`.

use ndarray::{Array2, Axis};

use crate::error::{Error, Result};
use crate::market::{barycenter, margin_error, Margins, Matching, CLAMP_TOL, MASS_TOL};
use crate::tree;

/// Vertex enumeration is refused above this many cells.
pub const MAX_ENUMERATION_CELLS: usize = 16;

/// A matching is on the relative boundary when its smallest entry is at most this.
pub const BOUNDARY_TOL: f64 = 1e-12;

const VERTEX_DEDUP_TOL: f64 = 1e-9;

/// Dimension of the polytope, `(dx − 1)(dy − 1)`.
pub fn dimension(margins: &Margins) -> usize {
    (margins.dx() - 1) * (margins.dy() - 1)
}

/// Rank of the `(dx + dy) × dx·dy` margin-constraint matrix, by Gaussian elimination.
pub fn constraint_rank(dx: usize, dy: usize) -> usize {
    let cols = dx * dy;
    let mut a = Array2::<f64>::zeros((dx + dy, cols));
    for x in 0..dx {
        for y in 0..dy {
            a[[x, x * dy + y]] = 1.0;
            a[[dx + y, x * dy + y]] = 1.0;
        }
    }
    let mut rank = 0;
    for c in 0..cols {
        let pivot = (rank..a.nrows()).max_by(|&i, &j| a[[i, c]].abs().total_cmp(&a[[j, c]].abs()));
        let Some(pivot) = pivot else { break };
        if a[[pivot, c]].abs() < 1e-9 {
            continue;
        }
        for k in 0..cols {
            a.swap([rank, k], [pivot, k]);
        }
        for r in 0..a.nrows() {
            if r != rank {
                let factor = a[[r, c]] / a[[rank, c]];
                if factor != 0.0 {
                    for k in 0..cols {
                        a[[r, k]] -= factor * a[[rank, k]];
                    }
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Entrywise `μ ≥ −tol` and every margin constraint satisfied within `tol`.
pub fn contains(mu: &Array2<f64>, margins: &Margins, tol: f64) -> bool {
    if mu.dim() != margins.shape() {
        return false;
    }
    if mu.iter().any(|v| !v.is_finite() || *v < -tol) {
        return false;
    }
    let rows_ok = mu
        .sum_axis(Axis(1))
        .iter()
        .zip(margins.p().iter())
        .all(|(s, p)| (s - p).abs() <= tol);
    let cols_ok = mu
        .sum_axis(Axis(0))
        .iter()
        .zip(margins.q().iter())
        .all(|(s, q)| (s - q).abs() <= tol);
    rows_ok && cols_ok
}

/// All basic feasible solutions of `M(p, q)`, in the order their first
/// spanning-tree basis appears in lexicographic enumeration of cell subsets.
pub fn enumerate_vertices(margins: &Margins) -> Result<Vec<Matching>> {
    let (dx, dy) = margins.shape();
    let cells = dx * dy;
    if cells > MAX_ENUMERATION_CELLS {
        return Err(Error::InstanceTooLarge {
            cells,
            limit: MAX_ENUMERATION_CELLS,
        });
    }
    let k = dx + dy - 1;
    let mut vertices: Vec<Array2<f64>> = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    let mut basis = Vec::with_capacity(k);
    loop {
        basis.clear();
        basis.extend(idx.iter().map(|&c| (c / dy, c % dy)));
        if tree::is_spanning_tree(dx, dy, &basis) {
            let flows = tree::tree_solution(margins, &basis);
            let feasible = flows.iter().all(|&v| v >= -CLAMP_TOL);
            if feasible {
                let is_new = vertices.iter().all(|v| {
                    v.iter()
                        .zip(flows.iter())
                        .any(|(a, b)| (a - b).abs() > VERTEX_DEDUP_TOL)
                });
                if is_new {
                    vertices.push(flows);
                }
            }
        }
        // next k-combination of 0..cells in lexicographic order
        let Some(i) = (0..k).rev().find(|&i| idx[i] < cells - k + i) else {
            break;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
    vertices
        .into_iter()
        .map(|v| Matching::new(v, margins.clone()))
        .collect()
}

/// Where the ray from `p⊗q` through `μ̂` leaves the polytope.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeResult {
    pub t_star: f64,
    /// `p⊗q + t*(μ̂ − p⊗q)`, with binding cells set to exactly zero.
    pub mu_star: Matching,
    /// Cells where `mu_star` vanishes, in row-major order.
    pub binding_cells: Vec<(usize, usize)>,
}

/// Largest `t ≥ 1` with `p⊗q + t(μ̂ − p⊗q) ∈ M`.
///
/// The ray keeps both margins fixed, so only nonnegativity can bind and
/// `t* = min_{μ̂_xy < p_x q_y} p_x q_y / (p_x q_y − μ̂_xy)`.
pub fn gauge(mu_hat: &Matching) -> Result<GaugeResult> {
    let margins = mu_hat.margins();
    let center = barycenter(margins);
    let (c, m) = (center.mu(), mu_hat.mu());
    let deviation = c.iter().zip(m.iter()).fold(0.0f64, |d, (a, b)| d.max((a - b).abs()));
    if deviation <= BOUNDARY_TOL {
        return Err(Error::RayUndefined);
    }

    let ratios: Vec<((usize, usize), f64)> = c
        .indexed_iter()
        .filter_map(|(cell, &pq)| {
            let gap = pq - m[cell];
            (gap > 0.0).then(|| (cell, pq / gap))
        })
        .collect();
    let t_star = ratios
        .iter()
        .map(|&(_, r)| r)
        .fold(f64::INFINITY, f64::min);
    if !t_star.is_finite() {
        return Err(Error::Internal("no cell decreases along the gauge ray".into()));
    }
    // entries at the edge of the ratio tie get mass of order t*·1e-12·p_x q_y,
    // which is below the boundary tolerance
    let binding_cells: Vec<(usize, usize)> = ratios
        .iter()
        .filter(|&&(_, r)| r <= t_star * (1.0 + 1e-12))
        .map(|&(cell, _)| cell)
        .collect();

    let mut star = c + &((m - c) * t_star);
    for &cell in &binding_cells {
        star[cell] = 0.0;
    }
    // the ray scales any margin slack already present in μ̂
    let slack = MASS_TOL + margin_error(m, margins);
    let mu_star = Matching::with_tolerance(star, margins.clone(), slack * t_star.max(1.0))?;
    Ok(GaugeResult {
        t_star,
        mu_star,
        binding_cells,
    })
}

/// Relative-boundary test: some cell carries no mass.
pub fn is_boundary(mu: &Matching) -> bool {
    mu.min_entry() <= BOUNDARY_TOL
}
