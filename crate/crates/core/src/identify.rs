//! Rationalizability verdicts and surplus identification.

use std::collections::BTreeMap;

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::entropy::{self, EntropyModel, GeneralizedEntropy};
use crate::error::{Error, Result};
use crate::lp::{argmax_contains, solve_w0};
use crate::market::{
    barycenter, cross_difference, decompose_separable, frobenius, inner_product, is_in_s, Margins, Matching,
    Surplus,
};
use crate::polytope::{self, GaugeResult, BOUNDARY_TOL};

/// The three equivalent conditions, evaluated on a candidate witness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConditionChecks {
    /// `μ̂` lies on the relative boundary of `M`.
    pub boundary: bool,
    /// `μ̂ ∈ argmax ⟨·, Φ̂⟩` for the candidate witness.
    pub argmax: bool,
    /// The candidate witness is not separable.
    pub in_s: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RationalizabilityReport {
    pub rationalizable: bool,
    /// Present iff `rationalizable`.
    pub witness: Option<Surplus>,
    /// Gauge exit time, absent when `μ̂ = p⊗q`.
    pub t_star: Option<f64>,
    pub mu_star: Option<Matching>,
    pub checks: ConditionChecks,
    pub is_barycenter: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum IdentificationMethod {
    Entropy(EntropyModel),
    GaugeGeometric,
}

impl IdentificationMethod {
    pub fn name(&self) -> &'static str {
        match self {
            IdentificationMethod::Entropy(m) => m.name(),
            IdentificationMethod::GaugeGeometric => "gauge-geometric",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentifiedSurplus {
    pub phi_raw: Surplus,
    /// Non-separable residual of `phi_raw`, centered under `p⊗q`.
    pub phi_canonical: Surplus,
    pub method: IdentificationMethod,
    pub diagnostics: BTreeMap<String, f64>,
}

fn canonicalize(phi_raw: Surplus, margins: &Margins, method: IdentificationMethod) -> Result<IdentifiedSurplus> {
    let residual = decompose_separable(&phi_raw, margins)?.residual;
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("in_s".to_string(), f64::from(u8::from(is_in_s(&phi_raw, margins)?)));
    Ok(IdentifiedSurplus {
        phi_raw,
        phi_canonical: Surplus::new(residual)?,
        method,
        diagnostics,
    })
}

/// Zero-cell indicator: `−1` where `μ̂` vanishes, `0` elsewhere.
fn zero_cell_witness(mu_hat: &Matching) -> Surplus {
    Surplus::new(mu_hat.mu().mapv(|m| if m <= BOUNDARY_TOL { -1.0 } else { 0.0 }))
        .expect("indicator is finite")
}

fn is_barycenter(mu_hat: &Matching) -> bool {
    let center = barycenter(mu_hat.margins());
    center
        .mu()
        .iter()
        .zip(mu_hat.mu().iter())
        .all(|(a, b)| (a - b).abs() <= BOUNDARY_TOL)
}

/// Decides whether `μ̂` maximizes `⟨μ, Φ⟩` over `M` for some non-separable `Φ`.
///
/// The candidate witness is the negative indicator of the empty cells of
/// `μ̂`. It is checked against the LP and the separability test, and the
/// verdict must agree with the boundary test.
pub fn check_rationalizable(mu_hat: &Matching) -> Result<RationalizabilityReport> {
    let margins = mu_hat.margins();
    let boundary = polytope::is_boundary(mu_hat);
    let candidate = zero_cell_witness(mu_hat);
    let in_s = is_in_s(&candidate, margins)?;
    let argmax = argmax_contains(&candidate, mu_hat)?;
    let rationalizable = in_s && argmax;
    if rationalizable != boundary {
        return Err(Error::Internal(format!(
            "boundary test ({boundary}) disagrees with witness verification (in_s {in_s}, argmax {argmax})"
        )));
    }
    let centered = is_barycenter(mu_hat);
    let (t_star, mu_star) = if centered {
        (None, None)
    } else {
        let g = polytope::gauge(mu_hat)?;
        (Some(g.t_star), Some(g.mu_star))
    };
    Ok(RationalizabilityReport {
        rationalizable,
        witness: rationalizable.then_some(candidate),
        t_star,
        mu_star,
        checks: ConditionChecks {
            boundary,
            argmax,
            in_s,
        },
        is_barycenter: centered,
    })
}

/// Projects `μ̂` along the ray from `p⊗q` onto the boundary and returns the
/// supporting surplus.
///
/// `Φ*` is `−c` on the binding cells of `μ*` and zero elsewhere, with `c`
/// fixed by `⟨Φ*, μ̂ − p⊗q⟩ = 1`. The identified surplus is `t*·Φ*`.
pub fn rationalize_gauge(mu_hat: &Matching) -> Result<(GaugeResult, IdentifiedSurplus)> {
    let margins = mu_hat.margins();
    let g = polytope::gauge(mu_hat)?;
    let center = barycenter(margins);
    let direction = mu_hat.mu() - center.mu();

    let mut indicator = Array2::zeros(mu_hat.shape());
    for &cell in &g.binding_cells {
        indicator[cell] = 1.0;
    }
    let slope = frobenius(&indicator, &direction);
    if slope.is_nan() || slope >= 0.0 {
        return Err(Error::NormalizationDegenerate { value: slope });
    }
    let scale = -1.0 / slope;
    let phi_star = Surplus::new(indicator * -scale)?;
    if !argmax_contains(&phi_star, &g.mu_star)? {
        return Err(Error::Internal("μ* is not optimal for Φ*".into()));
    }
    let normalization = frobenius(phi_star.phi(), &direction);
    let w0 = solve_w0(&phi_star, margins)?.value;
    let support_value = inner_product(&g.mu_star, &phi_star)?;

    let phi_raw = phi_star.scaled(g.t_star);
    let mut identified = canonicalize(phi_raw, margins, IdentificationMethod::GaugeGeometric)?;
    let d = &mut identified.diagnostics;
    d.insert("t_star".into(), g.t_star);
    d.insert("scale".into(), scale);
    d.insert("normalization".into(), normalization);
    d.insert("w0_phi_star".into(), w0);
    d.insert("support_value".into(), support_value);
    d.insert("binding_cells".into(), g.binding_cells.len() as f64);
    Ok((g, identified))
}

/// Cross-differences anchored at `(0, 0)`: entry `(x, y)` is
/// `Φ_00 + Φ_xy − Φ_0y − Φ_x0`; row and column 0 are zero.
pub fn anchored_cross_differences(phi: &Array2<f64>) -> Array2<f64> {
    Array2::from_shape_fn(phi.dim(), |(x, y)| {
        if x == 0 || y == 0 {
            0.0
        } else {
            cross_difference(phi, (0, x), (0, y))
        }
    })
}

/// Max anchored cross-difference discrepancy between two surpluses.
pub fn cross_difference_error(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    let (ca, cb) = (anchored_cross_differences(a), anchored_cross_differences(b));
    ca.iter().zip(cb.iter()).fold(0.0, |m, (u, v)| m.max((u - v).abs()))
}

fn gradient_check(model: &EntropyModel, mu_hat: &Matching, grad: &Surplus) -> Result<f64> {
    let (dx, dy) = mu_hat.shape();
    let h = 1e-6f64.min(mu_hat.min_entry() / 4.0);
    let mut worst = 0.0f64;
    for x in 1..dx {
        for y in 1..dy {
            let mut dir = Array2::zeros((dx, dy));
            dir[[0, 0]] = 1.0;
            dir[[x, y]] = 1.0;
            dir[[0, y]] = -1.0;
            dir[[x, 0]] = -1.0;
            let plus = Matching::new(mu_hat.mu() + &(&dir * h), mu_hat.margins().clone())?;
            let minus = Matching::new(mu_hat.mu() - &(&dir * h), mu_hat.margins().clone())?;
            let fd = (model.eval(&plus)? - model.eval(&minus)?) / (2.0 * h);
            worst = worst.max((fd - frobenius(grad.phi(), &dir)).abs());
        }
    }
    Ok(worst)
}

/// `Φ̂ = ∇I(μ̂)`, reported raw and canonicalized.
pub fn identify_entropy(mu_hat: &Matching, model: &EntropyModel) -> Result<IdentifiedSurplus> {
    let margins = mu_hat.margins();
    if let EntropyModel::Gauge = model {
        let (_, mut identified) = rationalize_gauge(mu_hat)?;
        identified.method = IdentificationMethod::Entropy(EntropyModel::Gauge);
        return Ok(identified);
    }
    let raw = entropy::grad_entropy(model, mu_hat)?;
    let mut identified = canonicalize(raw, margins, IdentificationMethod::Entropy(model.clone()))?;
    match model {
        EntropyModel::Shannon => {
            let (dx, dy) = mu_hat.shape();
            let m = mu_hat.mu();
            for x in 0..dx {
                for x2 in x + 1..dx {
                    for y in 0..dy {
                        for y2 in y + 1..dy {
                            let closed = (m[[x, y]] * m[[x2, y2]] / (m[[x, y2]] * m[[x2, y]])).ln();
                            identified
                                .diagnostics
                                .insert(format!("cross_difference[{x},{x2};{y},{y2}]"), closed);
                        }
                    }
                }
            }
        }
        EntropyModel::Quantile(_) => {
            let err = gradient_check(model, mu_hat, &identified.phi_raw)?;
            identified.diagnostics.insert("gradient_check_error".into(), err);
        }
        EntropyModel::Gauge => unreachable!(),
    }
    Ok(identified)
}

/// A synthetic market: the logit equilibrium matching and a multinomial sample of it.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedMarket {
    pub mu_true: Matching,
    pub counts: Array2<u64>,
    pub households: u64,
    pub ipfp_iterations: usize,
}

impl SimulatedMarket {
    pub fn frequencies(&self) -> Array2<f64> {
        let n = self.households as f64;
        self.counts.mapv(|c| c as f64 / n)
    }

    /// The empirical matching with margins read from the sample. Fails when
    /// some type was never drawn.
    pub fn empirical(&self) -> Result<Matching> {
        Matching::with_own_margins(self.frequencies())
    }
}

/// Draws `households` pairs from the Shannon equilibrium of `(Φ, p, q)`.
/// Deterministic for a fixed seed.
pub fn simulate_market(phi: &Surplus, margins: &Margins, households: u64, seed: u64) -> Result<SimulatedMarket> {
    if households == 0 {
        return Err(Error::NoHouseholds);
    }
    let (_, report) = entropy::solve_w_entropy(phi, margins)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let probs = report.mu.mu();
    let cells = probs.len();
    let mut counts = Array2::zeros(probs.dim());
    let mut remaining = households;
    let mut mass_left = 1.0;
    for (k, (cell, &prob)) in probs.indexed_iter().enumerate() {
        if remaining == 0 {
            break;
        }
        let drawn = if k + 1 == cells {
            remaining
        } else {
            let share = (prob / mass_left).clamp(0.0, 1.0);
            Binomial::new(remaining, share)
                .map_err(|e| Error::Internal(format!("binomial: {e}")))?
                .sample(&mut rng)
        };
        counts[cell] = drawn;
        remaining -= drawn;
        mass_left -= prob;
    }
    Ok(SimulatedMarket {
        mu_true: report.mu,
        counts,
        households,
        ipfp_iterations: report.iterations,
    })
}
