//! Random instance generators and independent oracles shared by the
//! integration suites.
#![allow(dead_code)]

use ndarray::Array2;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use surplus_id::entropy::{EntropyModel, GeneralizedEntropy};
use surplus_id::market::{barycenter, inner_product};
use surplus_id::polytope::{contains, enumerate_vertices};
use surplus_id::{Margins, Matching, Surplus, TypeValues};

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

fn normalized(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

pub fn random_margins(rng: &mut ChaCha8Rng, dx: usize, dy: usize) -> Margins {
    Margins::new(normalized(rng, dx), normalized(rng, dy)).unwrap()
}

pub fn random_surplus(rng: &mut ChaCha8Rng, dx: usize, dy: usize, scale: f64) -> Surplus {
    Surplus::new(Array2::from_shape_fn((dx, dy), |_| rng.random_range(-scale..scale))).unwrap()
}

fn mix(rng: &mut ChaCha8Rng, points: &[&Matching]) -> Array2<f64> {
    let w: Vec<f64> = (0..points.len()).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = w.iter().sum();
    let mut out = Array2::zeros(points[0].shape());
    for (p, wi) in points.iter().zip(&w) {
        out = out + p.mu() * (wi / s);
    }
    out
}

/// Strictly positive matching: barycenter blended with a random vertex mixture.
pub fn random_interior(rng: &mut ChaCha8Rng, margins: &Margins, vertices: &[Matching]) -> Matching {
    let refs: Vec<&Matching> = vertices.iter().collect();
    let mixture = mix(rng, &refs);
    let lambda = rng.random_range(0.05..0.95);
    let mu = barycenter(margins).mu() * (1.0 - lambda) + mixture * lambda;
    Matching::new(mu, margins.clone()).unwrap()
}

/// Matching with at least one empty cell: a mixture of the vertices that
/// vanish on a randomly chosen cell.
pub fn random_boundary(rng: &mut ChaCha8Rng, margins: &Margins, vertices: &[Matching]) -> Matching {
    let v = &vertices[rng.random_range(0..vertices.len())];
    let zeros: Vec<(usize, usize)> = v
        .mu()
        .indexed_iter()
        .filter(|(_, &m)| m == 0.0)
        .map(|(c, _)| c)
        .collect();
    let cell = zeros[rng.random_range(0..zeros.len())];
    let face: Vec<&Matching> = vertices.iter().filter(|w| w.mu()[cell] == 0.0).collect();
    let mut mu = mix(rng, &face);
    mu[cell] = 0.0;
    Matching::new(mu, margins.clone()).unwrap()
}

pub fn vertices(margins: &Margins) -> Vec<Matching> {
    enumerate_vertices(margins).unwrap()
}

/// `max` of `⟨v, Φ⟩` over the enumerated vertices.
pub fn brute_force_w0(phi: &Surplus, vertices: &[Matching]) -> f64 {
    vertices
        .iter()
        .map(|v| inner_product(v, phi).unwrap())
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Exit time of the ray `p⊗q + t(μ̂ − p⊗q)` from `M`, by bisection on a
/// feasibility test of the constraint system.
pub fn gauge_by_bisection(mu_hat: &Matching) -> f64 {
    let margins = mu_hat.margins();
    let center = barycenter(margins);
    let dir = mu_hat.mu() - center.mu();
    let feasible = |t: f64| {
        let point = center.mu() + &(&dir * t);
        contains(&point, margins, 1e-9) && point.iter().all(|&v| v >= 0.0)
    };
    let mut lo = 1.0;
    let mut hi = 2.0;
    while feasible(hi) {
        lo = hi;
        hi *= 2.0;
        assert!(hi < 1e15, "ray never leaves M");
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Generalized inverse of the step CDF with masses `w` on sorted `v`.
fn step_quantile(v: &[f64], w: &[f64], t: f64) -> f64 {
    let mut cum = 0.0;
    for (value, mass) in v.iter().zip(w) {
        cum += mass;
        if cum >= t {
            return *value;
        }
    }
    *v.last().unwrap()
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, eps: f64, whole: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let left = simpson(f, a, m);
    let right = simpson(f, m, b);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * eps {
        return left + right + (left + right - whole) / 15.0;
    }
    adaptive_simpson(f, a, m, eps / 2.0, left, depth - 1) + adaptive_simpson(f, m, b, eps / 2.0, right, depth - 1)
}

/// `∫₀¹ Q(t) t dt` by adaptive quadrature over 64 initial panels.
pub fn quantile_moment_quadrature(v: &[f64], w: &[f64]) -> f64 {
    let f = |t: f64| t * step_quantile(v, w, t);
    let panels = 64;
    (0..panels)
        .map(|k| {
            let (a, b) = (k as f64 / panels as f64, (k + 1) as f64 / panels as f64);
            adaptive_simpson(&f, a, b, 1e-12, simpson(&f, a, b), 48)
        })
        .sum()
}

/// Quantile entropy evaluated by quadrature of the conditional quantile functions.
pub fn quantile_entropy_quadrature(values: &TypeValues, mu: &Matching) -> f64 {
    let (p, q) = (mu.margins().p(), mu.margins().q());
    let m = mu.mu();
    let (dx, dy) = m.dim();
    let mut total = 0.0;
    for x in 0..dx {
        let w: Vec<f64> = (0..dy).map(|y| m[[x, y]] / p[x]).collect();
        total += p[x] * quantile_moment_quadrature(values.y_values(), &w);
    }
    for y in 0..dy {
        let w: Vec<f64> = (0..dx).map(|x| m[[x, y]] / q[y]).collect();
        total += q[y] * quantile_moment_quadrature(values.x_values(), &w);
    }
    total
}

/// Tangent direction `e_{0,0} + e_{x,y} − e_{0,y} − e_{x,0}`.
pub fn tangent_direction(shape: (usize, usize), x: usize, y: usize) -> Array2<f64> {
    let mut d = Array2::zeros(shape);
    d[[0, 0]] += 1.0;
    d[[x, y]] += 1.0;
    d[[0, y]] -= 1.0;
    d[[x, 0]] -= 1.0;
    d
}

/// Central finite difference of `I` along `dir`.
pub fn directional_fd(model: &EntropyModel, mu: &Matching, dir: &Array2<f64>, h: f64) -> f64 {
    let plus = Matching::new(mu.mu() + &(dir * h), mu.margins().clone()).unwrap();
    let minus = Matching::new(mu.mu() - &(dir * h), mu.margins().clone()).unwrap();
    (model.eval(&plus).unwrap() - model.eval(&minus).unwrap()) / (2.0 * h)
}

/// A gradient representative built only from finite differences: entry
/// `(x, y)` for `x, y ≥ 1` is the derivative along the anchored tangent
/// direction, row and column 0 are zero. It differs from `∇I` by a
/// separable term.
pub fn fd_gradient(model: &EntropyModel, mu: &Matching, h: f64) -> Surplus {
    let shape = mu.shape();
    let mut g = Array2::zeros(shape);
    for x in 1..shape.0 {
        for y in 1..shape.1 {
            g[[x, y]] = directional_fd(model, mu, &tangent_direction(shape, x, y), h);
        }
    }
    Surplus::new(g).unwrap()
}

pub fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b.iter()).fold(0.0, |m, (u, v)| m.max((u - v).abs()))
}

pub fn random_type_values(rng: &mut ChaCha8Rng, dx: usize, dy: usize) -> TypeValues {
    let mut inc = |n: usize| {
        let mut acc = rng.random_range(-1.0..1.0);
        (0..n)
            .map(|_| {
                acc += rng.random_range(0.1..1.0);
                acc
            })
            .collect::<Vec<f64>>()
    };
    let xs = inc(dx);
    let ys = inc(dy);
    TypeValues::new(xs, ys).unwrap()
}
