//! Market primitives: margins, matchings, surpluses and the separable
//! decomposition that defines the admissible surplus class.

use ndarray::{Array1, Array2, Axis};

use crate::error::{Error, Result, Side};

/// Tolerance on `Σp = 1`, `Σq = 1` and on each margin constraint of a matching.
pub const MASS_TOL: f64 = 1e-9;

/// Negative entries above `-CLAMP_TOL` are clamped to zero.
pub const CLAMP_TOL: f64 = 1e-12;

/// A surplus belongs to the admissible class when its non-separable
/// residual has an entry larger than this in absolute value.
pub const SEPARABILITY_TOL: f64 = 1e-10;

/// Type distributions `p` over men's types and `q` over women's types.
#[derive(Debug, Clone, PartialEq)]
pub struct Margins {
    p: Array1<f64>,
    q: Array1<f64>,
}

fn validate_side(side: Side, v: &[f64]) -> Result<()> {
    if v.len() < 2 {
        return Err(Error::TooFewTypes { side, len: v.len() });
    }
    for (index, &value) in v.iter().enumerate() {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::NonPositiveMass { side, index, value });
        }
    }
    let sum: f64 = v.iter().sum();
    if (sum - 1.0).abs() > MASS_TOL {
        return Err(Error::MassNotNormalized { side, sum });
    }
    Ok(())
}

impl Margins {
    pub fn new(p: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        validate_side(Side::Rows, &p)?;
        validate_side(Side::Columns, &q)?;
        Ok(Self {
            p: Array1::from(p),
            q: Array1::from(q),
        })
    }

    /// Uniform margins over `dx` and `dy` types.
    pub fn uniform(dx: usize, dy: usize) -> Result<Self> {
        Self::new(vec![1.0 / dx as f64; dx], vec![1.0 / dy as f64; dy])
    }

    pub fn p(&self) -> &Array1<f64> {
        &self.p
    }

    pub fn q(&self) -> &Array1<f64> {
        &self.q
    }

    pub fn dx(&self) -> usize {
        self.p.len()
    }

    pub fn dy(&self) -> usize {
        self.q.len()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.dx(), self.dy())
    }
}

/// A point of the set of matchings: a nonnegative matrix whose rows sum to
/// `p` and whose columns sum to `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    mu: Array2<f64>,
    margins: Margins,
}

impl Matching {
    pub fn new(mu: Array2<f64>, margins: Margins) -> Result<Self> {
        Self::with_tolerance(mu, margins, MASS_TOL)
    }

    /// Like [`Matching::new`] but with a caller-chosen margin tolerance.
    /// Points produced by scaling a valid matching need this, since their
    /// margin rounding grows with the scale factor.
    pub fn with_tolerance(mut mu: Array2<f64>, margins: Margins, tol: f64) -> Result<Self> {
        check_shape(margins.shape(), mu.dim())?;
        for ((x, y), v) in mu.indexed_iter_mut() {
            if !v.is_finite() {
                return Err(Error::NonFinite { x, y });
            }
            if *v < 0.0 {
                if *v >= -CLAMP_TOL {
                    *v = 0.0;
                } else {
                    return Err(Error::NegativeEntry { x, y, value: *v });
                }
            }
        }
        for (index, (row, &expected)) in mu.outer_iter().zip(margins.p.iter()).enumerate() {
            let found = row.sum();
            if (found - expected).abs() > tol {
                return Err(Error::MarginViolation {
                    side: Side::Rows,
                    index,
                    expected,
                    found,
                });
            }
        }
        for (index, (col, &expected)) in mu.axis_iter(Axis(1)).zip(margins.q.iter()).enumerate() {
            let found = col.sum();
            if (found - expected).abs() > tol {
                return Err(Error::MarginViolation {
                    side: Side::Columns,
                    index,
                    expected,
                    found,
                });
            }
        }
        Ok(Self { mu, margins })
    }

    /// Builds a matching whose margins are read off the matrix itself.
    pub fn with_own_margins(mu: Array2<f64>) -> Result<Self> {
        let p = mu.sum_axis(Axis(1)).to_vec();
        let q = mu.sum_axis(Axis(0)).to_vec();
        for (side, v) in [(Side::Rows, &p), (Side::Columns, &q)] {
            if let Some(index) = v.iter().position(|&m| m <= 0.0) {
                return Err(Error::DegenerateSample { side, index });
            }
        }
        let margins = Margins::new(p, q)?;
        Self::new(mu, margins)
    }

    pub fn mu(&self) -> &Array2<f64> {
        &self.mu
    }

    pub fn margins(&self) -> &Margins {
        &self.margins
    }

    pub fn shape(&self) -> (usize, usize) {
        self.mu.dim()
    }

    pub fn min_entry(&self) -> f64 {
        self.mu.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn into_inner(self) -> (Array2<f64>, Margins) {
        (self.mu, self.margins)
    }
}

/// Joint surplus of each pair type. Entries may be negative.
#[derive(Debug, Clone, PartialEq)]
pub struct Surplus {
    phi: Array2<f64>,
}

impl Surplus {
    pub fn new(phi: Array2<f64>) -> Result<Self> {
        if let Some(((x, y), _)) = phi.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { x, y });
        }
        Ok(Self { phi })
    }

    pub fn zeros(dx: usize, dy: usize) -> Self {
        Self {
            phi: Array2::zeros((dx, dy)),
        }
    }

    /// The separable surplus `f_x + g_y`.
    pub fn separable(f: &[f64], g: &[f64]) -> Result<Self> {
        Self::new(Array2::from_shape_fn((f.len(), g.len()), |(x, y)| f[x] + g[y]))
    }

    pub fn phi(&self) -> &Array2<f64> {
        &self.phi
    }

    pub fn shape(&self) -> (usize, usize) {
        self.phi.dim()
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self {
            phi: &self.phi * t,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.phi.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.phi
    }
}

/// `Φ = f ⊕ g + residual`, with the residual centered under `p⊗q`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableParts {
    pub f: Array1<f64>,
    pub g: Array1<f64>,
    pub residual: Array2<f64>,
}

impl SeparableParts {
    pub fn reconstruct(&self) -> Array2<f64> {
        Array2::from_shape_fn(self.residual.dim(), |(x, y)| {
            self.f[x] + self.g[y] + self.residual[[x, y]]
        })
    }

    pub fn residual_max_abs(&self) -> f64 {
        self.residual.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Ordered real values attached to each type, used by the quantile entropy.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeValues {
    x_values: Vec<f64>,
    y_values: Vec<f64>,
}

impl TypeValues {
    pub fn new(x_values: Vec<f64>, y_values: Vec<f64>) -> Result<Self> {
        for (side, v) in [(Side::Rows, &x_values), (Side::Columns, &y_values)] {
            if let Some(i) = v.iter().position(|a| !a.is_finite()) {
                return Err(Error::NotStrictlyIncreasing { side, index: i });
            }
            if let Some(i) = v.windows(2).position(|w| w[1] <= w[0]) {
                return Err(Error::NotStrictlyIncreasing { side, index: i + 1 });
            }
        }
        Ok(Self { x_values, y_values })
    }

    pub fn x_values(&self) -> &[f64] {
        &self.x_values
    }

    pub fn y_values(&self) -> &[f64] {
        &self.y_values
    }
}

pub(crate) fn check_shape(expected: (usize, usize), found: (usize, usize)) -> Result<()> {
    if expected != found {
        return Err(Error::ShapeMismatch { expected, found });
    }
    Ok(())
}

/// `⟨μ, Φ⟩ = Σ_xy μ_xy Φ_xy`.
pub fn inner_product(mu: &Matching, phi: &Surplus) -> Result<f64> {
    check_shape(mu.shape(), phi.shape())?;
    Ok(frobenius(mu.mu(), phi.phi()))
}

pub(crate) fn frobenius(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(u, v)| u * v).sum()
}

/// Weighted double-centering: `f_x = Σ_y q_y Φ_xy − m/2`, `g_y = Σ_x p_x Φ_xy − m/2`
/// with `m = Σ_xy p_x q_y Φ_xy`.
pub fn decompose_separable(phi: &Surplus, margins: &Margins) -> Result<SeparableParts> {
    check_shape(margins.shape(), phi.shape())?;
    let phi = phi.phi();
    let row_means = phi.dot(margins.q());
    let col_means = margins.p().dot(phi);
    let grand = margins.p().dot(&row_means);
    let f = row_means.mapv(|v| v - 0.5 * grand);
    let g = col_means.mapv(|v| v - 0.5 * grand);
    let residual = Array2::from_shape_fn(phi.dim(), |(x, y)| phi[[x, y]] - f[x] - g[y]);
    Ok(SeparableParts { f, g, residual })
}

/// Membership in the admissible class: the surplus is not of the form `f_x + g_y`.
pub fn is_in_s(phi: &Surplus, margins: &Margins) -> Result<bool> {
    Ok(decompose_separable(phi, margins)?.residual_max_abs() > SEPARABILITY_TOL)
}

/// The independent matching `p⊗q`.
pub fn barycenter(margins: &Margins) -> Matching {
    let (p, q) = (margins.p(), margins.q());
    let mu = Array2::from_shape_fn(margins.shape(), |(x, y)| p[x] * q[y]);
    Matching {
        mu,
        margins: margins.clone(),
    }
}

/// Row-conditionals `μ_{y|x} = μ_xy / p_x` and column-conditionals `μ_{x|y} = μ_xy / q_y`.
pub fn conditionals(mu: &Matching) -> (Array2<f64>, Array2<f64>) {
    let (p, q) = (mu.margins().p(), mu.margins().q());
    let m = mu.mu();
    let rows = Array2::from_shape_fn(m.dim(), |(x, y)| m[[x, y]] / p[x]);
    let cols = Array2::from_shape_fn(m.dim(), |(x, y)| m[[x, y]] / q[y]);
    (rows, cols)
}

/// `Φ_xy + Φ_x'y' − Φ_xy' − Φ_x'y`, invariant under separable shifts.
pub fn cross_difference(phi: &Array2<f64>, (x, x2): (usize, usize), (y, y2): (usize, usize)) -> f64 {
    phi[[x, y]] + phi[[x2, y2]] - phi[[x, y2]] - phi[[x2, y]]
}

/// Largest L1 margin violation over rows and columns.
pub(crate) fn margin_error(mu: &Array2<f64>, margins: &Margins) -> f64 {
    let rows: f64 = mu
        .sum_axis(Axis(1))
        .iter()
        .zip(margins.p().iter())
        .map(|(a, b)| (a - b).abs())
        .sum();
    let cols: f64 = mu
        .sum_axis(Axis(0))
        .iter()
        .zip(margins.q().iter())
        .map(|(a, b)| (a - b).abs())
        .sum();
    rows.max(cols)
}
