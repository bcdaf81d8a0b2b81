//! Spanning trees of the complete bipartite graph on row and column types.
//!
//! Nodes `0..dx` are rows, `dx..dx+dy` are columns. A basis of the
//! transportation polytope is a set of `dx + dy - 1` cells forming a
//! spanning tree, and its basic solution is found by peeling leaves.

use ndarray::Array2;

use crate::market::Margins;

pub(crate) fn is_spanning_tree(dx: usize, dy: usize, cells: &[(usize, usize)]) -> bool {
    let n = dx + dy;
    if cells.len() + 1 != n {
        return false;
    }
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut a: usize) -> usize {
        while parent[a] != a {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        a
    }
    for &(x, y) in cells {
        let (a, b) = (find(&mut parent, x), find(&mut parent, dx + y));
        if a == b {
            return false;
        }
        parent[a] = b;
    }
    true
}

/// Basic solution supported on a spanning tree. Nonbasic cells are exactly zero.
/// Entries may be negative when the basis is infeasible.
pub(crate) fn tree_solution(margins: &Margins, cells: &[(usize, usize)]) -> Array2<f64> {
    let (dx, dy) = margins.shape();
    let n = dx + dy;
    let mut remaining: Vec<f64> = margins.p().iter().chain(margins.q().iter()).copied().collect();
    let mut degree = vec![0usize; n];
    for &(x, y) in cells {
        degree[x] += 1;
        degree[dx + y] += 1;
    }
    let mut alive = vec![true; cells.len()];
    let mut flows = Array2::zeros((dx, dy));
    for _ in 0..cells.len() {
        // lowest-index leaf keeps the peeling order deterministic
        let leaf = match (0..n).find(|&u| degree[u] == 1) {
            Some(u) => u,
            None => break,
        };
        let e = (0..cells.len())
            .find(|&e| alive[e] && (cells[e].0 == leaf || dx + cells[e].1 == leaf))
            .expect("leaf has an incident edge");
        let (x, y) = cells[e];
        let other = if leaf == x { dx + y } else { x };
        let flow = remaining[leaf];
        flows[[x, y]] = flow;
        remaining[other] -= flow;
        remaining[leaf] = 0.0;
        alive[e] = false;
        degree[leaf] -= 1;
        degree[other] -= 1;
    }
    flows
}
