//! The optimal assignment linear program `W₀(Φ) = max_{μ ∈ M} ⟨μ, Φ⟩`.
//!
//! Solved by a transportation simplex on spanning-tree bases of the complete
//! bipartite graph. Entering and leaving cells are chosen by lowest row-major
//! index (Bland's rule), so the result is a deterministic function of the input.

use std::collections::VecDeque;

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::market::{self, frobenius, inner_product, is_in_s, Margins, Matching, Surplus};
use crate::polytope::{self, MAX_ENUMERATION_CELLS};
use crate::tree;

/// Slack allowed when testing `⟨μ̂, Φ⟩ = W₀(Φ)`.
pub const ARGMAX_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    /// A vertex maximizer.
    pub mu_opt: Matching,
    /// `W₀(Φ)`.
    pub value: f64,
    pub dual_f: Array1<f64>,
    /// Normalized so that the last entry is zero.
    pub dual_g: Array1<f64>,
    /// Basis cells of the final spanning tree, row-major.
    pub basis: Vec<(usize, usize)>,
    pub pivots: usize,
}

impl LpSolution {
    /// `Σ p_x f_x + Σ q_y g_y`.
    pub fn dual_value(&self) -> f64 {
        let m = self.mu_opt.margins();
        m.p().dot(&self.dual_f) + m.q().dot(&self.dual_g)
    }

    pub fn duality_gap(&self) -> f64 {
        (self.value - self.dual_value()).abs()
    }

    /// `max_xy (Φ_xy − f_x − g_y)`, nonpositive up to rounding at an optimum.
    pub fn max_reduced_cost(&self, phi: &Surplus) -> f64 {
        phi.phi()
            .indexed_iter()
            .map(|((x, y), v)| v - self.dual_f[x] - self.dual_g[y])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest `|f_x + g_y − Φ_xy|` over cells carrying more than `1e-9` mass.
    pub fn complementary_slackness_error(&self, phi: &Surplus) -> f64 {
        self.mu_opt
            .mu()
            .indexed_iter()
            .filter(|(_, &m)| m > 1e-9)
            .map(|((x, y), _)| (self.dual_f[x] + self.dual_g[y] - phi.phi()[[x, y]]).abs())
            .fold(0.0, f64::max)
    }
}

fn northwest_corner(margins: &Margins) -> (Vec<(usize, usize)>, Array2<f64>) {
    let (dx, dy) = margins.shape();
    let mut supply = margins.p().to_vec();
    let mut demand = margins.q().to_vec();
    let mut basis = Vec::with_capacity(dx + dy - 1);
    let mut flow = Array2::zeros((dx, dy));
    let (mut i, mut j) = (0, 0);
    loop {
        let alloc = supply[i].min(demand[j]).max(0.0);
        basis.push((i, j));
        flow[[i, j]] = alloc;
        supply[i] -= alloc;
        demand[j] -= alloc;
        if i == dx - 1 && j == dy - 1 {
            break;
        }
        if i == dx - 1 {
            j += 1;
        } else if j == dy - 1 || supply[i] <= demand[j] {
            i += 1;
        } else {
            j += 1;
        }
    }
    (basis, flow)
}

fn adjacency(dx: usize, dy: usize, basis: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); dx + dy];
    for (e, &(x, y)) in basis.iter().enumerate() {
        adj[x].push(e);
        adj[dx + y].push(e);
    }
    adj
}

/// Potentials with `f_x + g_y = Φ_xy` on the basis and `g_{dy−1} = 0`.
fn potentials(phi: &Array2<f64>, basis: &[(usize, usize)]) -> (Array1<f64>, Array1<f64>) {
    let (dx, dy) = phi.dim();
    let adj = adjacency(dx, dy, basis);
    let mut f = Array1::zeros(dx);
    let mut g = Array1::zeros(dy);
    let mut seen = vec![false; dx + dy];
    let root = dx + dy - 1;
    seen[root] = true;
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        for &e in &adj[u] {
            let (x, y) = basis[e];
            if u < dx {
                if !seen[dx + y] {
                    g[y] = phi[[x, y]] - f[x];
                    seen[dx + y] = true;
                    queue.push_back(dx + y);
                }
            } else if !seen[x] {
                f[x] = phi[[x, y]] - g[y];
                seen[x] = true;
                queue.push_back(x);
            }
        }
    }
    (f, g)
}

/// Basis edges on the tree path from row node `x` to column node `y`,
/// starting with the edge incident to `x`.
fn tree_path(dx: usize, dy: usize, basis: &[(usize, usize)], x: usize, y: usize) -> Vec<usize> {
    let adj = adjacency(dx, dy, basis);
    let target = dx + y;
    let mut via: Vec<Option<usize>> = vec![None; dx + dy];
    let mut seen = vec![false; dx + dy];
    seen[target] = true;
    let mut queue = VecDeque::from([target]);
    while let Some(u) = queue.pop_front() {
        if u == x {
            break;
        }
        for &e in &adj[u] {
            let (ex, ey) = basis[e];
            let v = if u < dx { dx + ey } else { ex };
            if !seen[v] {
                seen[v] = true;
                via[v] = Some(e);
                queue.push_back(v);
            }
        }
    }
    let mut path = Vec::new();
    let mut u = x;
    while u != target {
        let e = via[u].expect("basis is a spanning tree");
        path.push(e);
        let (ex, ey) = basis[e];
        u = if u < dx { dx + ey } else { ex };
    }
    path
}

/// Solves `max_{μ ∈ M} ⟨μ, Φ⟩` and returns a vertex optimizer with dual certificates.
pub fn solve_w0(phi: &Surplus, margins: &Margins) -> Result<LpSolution> {
    market::check_shape(margins.shape(), phi.shape())?;
    let (dx, dy) = margins.shape();
    let c = phi.phi();
    let eps = (1e-12 * phi.max_abs()).min(1e-10);
    let max_pivots = 1000 * (dx * dy).max(10);

    let (mut basis, mut flow) = northwest_corner(margins);
    let mut in_basis = Array2::from_elem((dx, dy), false);
    for &cell in &basis {
        in_basis[cell] = true;
    }

    let mut pivots = 0;
    loop {
        let (f, g) = potentials(c, &basis);
        let entering = c
            .indexed_iter()
            .find(|&((x, y), &v)| !in_basis[[x, y]] && v - f[x] - g[y] > eps)
            .map(|(cell, _)| cell);
        let Some((ex, ey)) = entering else {
            break;
        };
        if pivots == max_pivots {
            return Err(Error::PivotLimit { pivots });
        }
        pivots += 1;

        let path = tree_path(dx, dy, &basis, ex, ey);
        // edges at even positions (0-based) lose flow around the cycle
        let leaving = path
            .iter()
            .step_by(2)
            .copied()
            .min_by(|&a, &b| {
                flow[basis[a]]
                    .total_cmp(&flow[basis[b]])
                    .then(basis[a].cmp(&basis[b]))
            })
            .expect("cycle has a decreasing edge");
        let theta = flow[basis[leaving]];
        for (k, &e) in path.iter().enumerate() {
            if k % 2 == 0 {
                flow[basis[e]] -= theta;
            } else {
                flow[basis[e]] += theta;
            }
        }
        flow[basis[leaving]] = 0.0;
        flow[[ex, ey]] = theta;
        in_basis[basis[leaving]] = false;
        in_basis[[ex, ey]] = true;
        basis[leaving] = (ex, ey);
    }

    basis.sort_unstable();
    let (dual_f, dual_g) = potentials(c, &basis);
    let exact = tree::tree_solution(margins, &basis);
    let value = frobenius(&exact, c);
    let mu_opt = Matching::new(exact, margins.clone())?;
    Ok(LpSolution {
        mu_opt,
        value,
        dual_f,
        dual_g,
        basis,
        pivots,
    })
}

/// `μ̂ ∈ argmax_{μ ∈ M} ⟨μ, Φ⟩`, i.e. `⟨μ̂, Φ⟩ ≥ W₀(Φ) − 1e-8`.
pub fn argmax_contains(phi: &Surplus, mu_hat: &Matching) -> Result<bool> {
    let value = solve_w0(phi, mu_hat.margins())?.value;
    Ok(inner_product(mu_hat, phi)? >= value - ARGMAX_TOL)
}

/// Whether some vertex of `M` is not optimal, decided by enumeration.
pub fn is_argmax_strict_subset_by_vertices(phi: &Surplus, margins: &Margins) -> Result<bool> {
    let vertices = polytope::enumerate_vertices(margins)?;
    let value = solve_w0(phi, margins)?.value;
    let mut worst = f64::INFINITY;
    for v in &vertices {
        worst = worst.min(inner_product(v, phi)?);
    }
    Ok(worst < value - ARGMAX_TOL)
}

/// `argmax_{μ ∈ M} ⟨μ, Φ⟩ ≠ M`. Enumerates vertices on small instances and
/// falls back to the separability test otherwise.
pub fn is_argmax_strict_subset(phi: &Surplus, margins: &Margins) -> Result<bool> {
    if margins.dx() * margins.dy() <= MAX_ENUMERATION_CELLS {
        is_argmax_strict_subset_by_vertices(phi, margins)
    } else {
        is_in_s(phi, margins)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn half() -> Margins {
        Margins::new(vec![0.5, 0.5], vec![0.5, 0.5]).unwrap()
    }

    fn assert_certified(sol: &LpSolution, phi: &Surplus) {
        assert!(sol.max_reduced_cost(phi) <= 1e-9);
        assert!(sol.complementary_slackness_error(phi) <= 1e-8);
        assert!(sol.duality_gap() <= 1e-8);
        assert_eq!(sol.dual_g[sol.dual_g.len() - 1], 0.0);
    }

    #[test]
    fn identity_surplus() {
        let phi = Surplus::new(array![[1.0, 0.0], [0.0, 1.0]]).unwrap();
        let sol = solve_w0(&phi, &half()).unwrap();
        assert_abs_diff_eq!(sol.value, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sol.mu_opt.mu(), &array![[0.5, 0.0], [0.0, 0.5]], epsilon = 1e-15);
        assert_certified(&sol, &phi);
    }

    #[test]
    fn zero_and_separable_surplus() {
        let zero = Surplus::zeros(3, 2);
        let m = Margins::new(vec![0.2, 0.3, 0.5], vec![0.6, 0.4]).unwrap();
        let sol = solve_w0(&zero, &m).unwrap();
        assert_eq!(sol.value, 0.0);
        assert_eq!(sol.pivots, 0);

        let sep = Surplus::separable(&[1.0, -2.0, 0.5], &[3.0, 4.0]).unwrap();
        let sol = solve_w0(&sep, &m).unwrap();
        let expected = 0.2 - 0.6 + 0.25 + 0.6 * 3.0 + 0.4 * 4.0;
        assert_abs_diff_eq!(sol.value, expected, epsilon = 1e-12);
        assert_certified(&sol, &sep);
        for v in polytope::enumerate_vertices(&m).unwrap() {
            assert!(argmax_contains(&sep, &v).unwrap());
        }
    }

    #[test]
    fn argmax_fixtures() {
        let phi = Surplus::new(array![[1.0, 0.0], [0.0, 1.0]]).unwrap();
        let diag = Matching::new(array![[0.5, 0.0], [0.0, 0.5]], half()).unwrap();
        let interior = Matching::new(array![[0.35, 0.15], [0.15, 0.35]], half()).unwrap();
        assert!(argmax_contains(&phi, &diag).unwrap());
        assert!(!argmax_contains(&phi, &interior).unwrap());
        assert!(argmax_contains(&Surplus::zeros(2, 2), &interior).unwrap());
    }

    #[test]
    fn strict_subset_fixtures() {
        let m = half();
        let phi = Surplus::new(array![[1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert!(is_argmax_strict_subset(&phi, &m).unwrap());
        let sep = Surplus::separable(&[1.0, 2.0], &[3.0, 4.0]).unwrap();
        assert!(!is_argmax_strict_subset(&sep, &m).unwrap());
        assert!(!is_argmax_strict_subset(&Surplus::zeros(2, 2), &m).unwrap());

        let big = Margins::uniform(5, 4).unwrap();
        assert!(matches!(
            is_argmax_strict_subset_by_vertices(&Surplus::zeros(5, 4), &big),
            Err(Error::InstanceTooLarge { .. })
        ));
        assert!(!is_argmax_strict_subset(&Surplus::zeros(5, 4), &big).unwrap());
    }

    #[test]
    fn degenerate_uniform_margins() {
        // uniform square margins make every basis degenerate
        let m = Margins::uniform(4, 4).unwrap();
        let phi = Surplus::new(Array2::from_shape_fn((4, 4), |(x, y)| {
            ((x * 7 + y * 3) % 5) as f64 - 2.0
        }))
        .unwrap();
        let sol = solve_w0(&phi, &m).unwrap();
        assert_certified(&sol, &phi);
        let brute = polytope::enumerate_vertices(&m)
            .unwrap()
            .iter()
            .map(|v| inner_product(v, &phi).unwrap())
            .fold(f64::NEG_INFINITY, f64::max);
        assert_abs_diff_eq!(sol.value, brute, epsilon = 1e-12);
    }

    #[test]
    fn rejects_shape_mismatch() {
        assert!(matches!(
            solve_w0(&Surplus::zeros(3, 2), &half()),
            Err(Error::ShapeMismatch { .. })
        ));
    }
}
