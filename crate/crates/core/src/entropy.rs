//! Generalized entropies `I(μ)` on the set of matchings, their gradients,
//! and the entropy-regularized forward problem `W_I(Φ) = max ⟨μ, Φ⟩ − I(μ)`.
//!
//! Three instances are provided:
//!
//! * [`EntropyModel::Shannon`]: `Σ μ_xy log μ_xy`, the logit case.
//! * [`EntropyModel::Gauge`]: `−t*(μ)`, minus the exit time of the ray from
//!   `p⊗q` through `μ`.
//! * [`EntropyModel::Quantile`]: `Σ_x p_x ∫ Q_{Y|X=x}(t) t dt + Σ_y q_y ∫ Q_{X|Y=y}(t) t dt`
//!   for real-valued types.
//!
//! New entropies plug in through [`GeneralizedEntropy`]. Only the Shannon
//! case has a forward solver.

use ndarray::{Array1, Array2, ArrayView1, Axis};

use crate::error::{Error, Result};
use crate::identify;
use crate::market::{frobenius, margin_error, Margins, Matching, Surplus, TypeValues};
use crate::polytope::{self, BOUNDARY_TOL};

/// Conditional masses at or below this make the quantile gradient a kink.
pub const KINK_TOL: f64 = 1e-9;

/// IPFP stops once the max L1 margin violation drops to this.
pub const IPFP_TOL: f64 = 1e-10;
pub const IPFP_MAX_ITERATIONS: usize = 10_000;

/// Above this `max |Φ|` the IPFP runs on log-potentials.
pub const LOG_DOMAIN_THRESHOLD: f64 = 30.0;

pub trait GeneralizedEntropy {
    fn eval(&self, mu: &Matching) -> Result<f64>;

    /// `∇I(μ)`, defined up to a separable term.
    fn grad(&self, mu: &Matching) -> Result<Surplus>;
}

#[derive(Debug, Clone, PartialEq)]
pub enum EntropyModel {
    Gauge,
    Shannon,
    Quantile(TypeValues),
}

impl EntropyModel {
    pub fn name(&self) -> &'static str {
        match self {
            EntropyModel::Gauge => "gauge",
            EntropyModel::Shannon => "shannon",
            EntropyModel::Quantile(_) => "quantile",
        }
    }
}

impl GeneralizedEntropy for EntropyModel {
    fn eval(&self, mu: &Matching) -> Result<f64> {
        match self {
            EntropyModel::Gauge => Ok(-polytope::gauge(mu)?.t_star),
            EntropyModel::Shannon => Ok(shannon(mu.mu())),
            EntropyModel::Quantile(values) => quantile(values, mu),
        }
    }

    fn grad(&self, mu: &Matching) -> Result<Surplus> {
        match self {
            EntropyModel::Gauge => Ok(identify::rationalize_gauge(mu)?.1.phi_raw),
            EntropyModel::Shannon => shannon_grad(mu),
            EntropyModel::Quantile(values) => quantile_grad(values, mu),
        }
    }
}

pub fn eval_entropy(model: &EntropyModel, mu: &Matching) -> Result<f64> {
    model.eval(mu)
}

pub fn grad_entropy(model: &EntropyModel, mu: &Matching) -> Result<Surplus> {
    model.grad(mu)
}

/// `I` extended by `+∞` outside `M(p, q)`.
pub fn eval_entropy_extended(model: &EntropyModel, mu: &Array2<f64>, margins: &Margins) -> Result<f64> {
    match Matching::new(mu.clone(), margins.clone()) {
        Ok(m) => model.eval(&m),
        Err(Error::ShapeMismatch { expected, found }) => Err(Error::ShapeMismatch { expected, found }),
        Err(_) => Ok(f64::INFINITY),
    }
}

fn shannon(mu: &Array2<f64>) -> f64 {
    mu.iter().map(|&m| if m > 0.0 { m * m.ln() } else { 0.0 }).sum()
}

fn interior_check(mu: &Matching) -> Result<()> {
    match mu.mu().indexed_iter().find(|(_, &v)| v <= BOUNDARY_TOL) {
        Some(((x, y), &value)) => Err(Error::BoundaryPoint { x, y, value }),
        None => Ok(()),
    }
}

fn shannon_grad(mu: &Matching) -> Result<Surplus> {
    interior_check(mu)?;
    Surplus::new(mu.mu().mapv(|m| 1.0 + m.ln()))
}

/// `∫₀¹ Q(t) t dt` for the step quantile function of masses `w` on sorted support `v`.
fn quantile_moment(v: &[f64], w: ArrayView1<f64>) -> f64 {
    let mut prev = 0.0;
    let mut total = 0.0;
    for (&value, &mass) in v.iter().zip(w.iter()) {
        let cum = prev + mass;
        total += value * (cum * cum - prev * prev) / 2.0;
        prev = cum;
    }
    total
}

/// `∂/∂w_j` of `quantile_moment`: `Σ_{k ≥ j} u_k (v_k − v_{k+1})` with `v_{K+1} = 0`.
fn quantile_moment_grad(v: &[f64], w: ArrayView1<f64>) -> Array1<f64> {
    let k = v.len();
    let mut cum = Vec::with_capacity(k);
    let mut acc = 0.0;
    for &mass in w.iter() {
        acc += mass;
        cum.push(acc);
    }
    let mut grad = Array1::zeros(k);
    let mut tail = 0.0;
    for j in (0..k).rev() {
        let next = if j + 1 < k { v[j + 1] } else { 0.0 };
        tail += cum[j] * (v[j] - next);
        grad[j] = tail;
    }
    grad
}

fn check_values(values: &TypeValues, mu: &Matching) -> Result<()> {
    let found = (values.x_values().len(), values.y_values().len());
    if found != mu.shape() {
        return Err(Error::ShapeMismatch {
            expected: mu.shape(),
            found,
        });
    }
    Ok(())
}

fn quantile(values: &TypeValues, mu: &Matching) -> Result<f64> {
    check_values(values, mu)?;
    let (p, q) = (mu.margins().p(), mu.margins().q());
    let m = mu.mu();
    let rows: f64 = m
        .outer_iter()
        .zip(p.iter())
        .map(|(row, &px)| px * quantile_moment(values.y_values(), (&row / px).view()))
        .sum();
    let cols: f64 = m
        .axis_iter(Axis(1))
        .zip(q.iter())
        .map(|(col, &qy)| qy * quantile_moment(values.x_values(), (&col / qy).view()))
        .sum();
    Ok(rows + cols)
}

fn quantile_grad(values: &TypeValues, mu: &Matching) -> Result<Surplus> {
    check_values(values, mu)?;
    interior_check(mu)?;
    let (p, q) = (mu.margins().p(), mu.margins().q());
    let m = mu.mu();
    for ((x, y), &v) in m.indexed_iter() {
        let conditional = (v / p[x]).min(v / q[y]);
        if conditional <= KINK_TOL {
            return Err(Error::KinkPoint {
                x,
                y,
                value: conditional,
            });
        }
    }
    let mut grad = Array2::zeros(m.dim());
    for (x, row) in m.outer_iter().enumerate() {
        let g = quantile_moment_grad(values.y_values(), (&row / p[x]).view());
        grad.row_mut(x).zip_mut_with(&g, |a, b| *a += b);
    }
    for (y, col) in m.axis_iter(Axis(1)).enumerate() {
        let g = quantile_moment_grad(values.x_values(), (&col / q[y]).view());
        grad.column_mut(y).zip_mut_with(&g, |a, b| *a += b);
    }
    Surplus::new(grad)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IpfpReport {
    pub mu: Matching,
    pub iterations: usize,
    /// Max of the row and column L1 margin violations after the last sweep.
    pub margin_error: f64,
    pub converged: bool,
    pub log_domain: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IpfpSettings {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for IpfpSettings {
    fn default() -> Self {
        Self {
            tolerance: IPFP_TOL,
            max_iterations: IPFP_MAX_ITERATIONS,
        }
    }
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Alternating row/column rescaling of `exp(Φ)`. Returns the final matrix,
/// the number of sweeps and the final margin error.
fn ipfp(phi: &Array2<f64>, margins: &Margins, settings: &IpfpSettings, log_domain: bool) -> (Array2<f64>, usize, f64) {
    let (dx, dy) = phi.dim();
    let (p, q) = (margins.p(), margins.q());
    let mut mu = Array2::zeros((dx, dy));
    let mut err = f64::INFINITY;
    let mut iterations = 0;
    if log_domain {
        let (log_p, log_q) = (p.mapv(f64::ln), q.mapv(f64::ln));
        let mut u = Array1::<f64>::zeros(dx);
        let mut v = Array1::<f64>::zeros(dy);
        while iterations < settings.max_iterations {
            iterations += 1;
            for x in 0..dx {
                u[x] = log_p[x] - log_sum_exp((0..dy).map(|y| phi[[x, y]] + v[y]));
            }
            for y in 0..dy {
                v[y] = log_q[y] - log_sum_exp((0..dx).map(|x| phi[[x, y]] + u[x]));
            }
            mu = Array2::from_shape_fn((dx, dy), |(x, y)| (phi[[x, y]] + u[x] + v[y]).exp());
            err = margin_error(&mu, margins);
            if err <= settings.tolerance {
                break;
            }
        }
    } else {
        let kernel = phi.mapv(f64::exp);
        let mut a = Array1::<f64>::ones(dx);
        let mut b = Array1::<f64>::ones(dy);
        while iterations < settings.max_iterations {
            iterations += 1;
            for x in 0..dx {
                let s: f64 = (0..dy).map(|y| kernel[[x, y]] * b[y]).sum();
                a[x] = p[x] / s;
            }
            for y in 0..dy {
                let s: f64 = (0..dx).map(|x| kernel[[x, y]] * a[x]).sum();
                b[y] = q[y] / s;
            }
            mu = Array2::from_shape_fn((dx, dy), |(x, y)| a[x] * kernel[[x, y]] * b[y]);
            err = margin_error(&mu, margins);
            if err <= settings.tolerance {
                break;
            }
        }
    }
    (mu, iterations, err)
}

/// Shannon forward problem `W_I(Φ) = max_{μ ∈ M} ⟨μ, Φ⟩ − Σ μ log μ`.
pub fn solve_w_entropy(phi: &Surplus, margins: &Margins) -> Result<(f64, IpfpReport)> {
    solve_w_entropy_with(phi, margins, &IpfpSettings::default())
}

pub fn solve_w_entropy_with(phi: &Surplus, margins: &Margins, settings: &IpfpSettings) -> Result<(f64, IpfpReport)> {
    crate::market::check_shape(margins.shape(), phi.shape())?;
    let log_domain = phi.max_abs() > LOG_DOMAIN_THRESHOLD;
    let (mu, iterations, margin_error) = ipfp(phi.phi(), margins, settings, log_domain);
    if margin_error.is_nan() || margin_error > settings.tolerance {
        return Err(Error::NoConvergence {
            iterations,
            margin_error,
        });
    }
    let value = frobenius(&mu, phi.phi()) - shannon(&mu);
    let mu = Matching::new(mu, margins.clone())?;
    Ok((
        value,
        IpfpReport {
            mu,
            iterations,
            margin_error,
            converged: true,
            log_domain,
        },
    ))
}
