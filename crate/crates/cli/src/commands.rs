use std::path::Path;

use surplus_id::entropy::EntropyModel;
use surplus_id::identify::{self, check_rationalizable, identify_entropy, simulate_market};
use surplus_id::lp::{is_argmax_strict_subset, solve_w0};
use surplus_id::market::{decompose_separable, is_in_s};

use crate::exit;
use crate::format::{to_json, to_rows, write_file, Market, MarketFile};
use crate::geometry;
use crate::report::*;
use crate::CliError;

/// What a command prints and the exit code it asks for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub exit_code: i32,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self {
            stdout,
            exit_code: exit::SUCCESS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum EntropyChoice {
    Shannon,
    Gauge,
    Quantile,
}

fn require<'a, T>(v: &'a Option<T>, what: &str) -> Result<&'a T, CliError> {
    v.as_ref()
        .ok_or_else(|| CliError::Usage(format!("the input file must provide `{what}`")))
}

pub fn cmd_solve(market: &Market) -> Result<Outcome, CliError> {
    let phi = require(&market.phi, "phi")?;
    let sol = solve_w0(phi, &market.margins)?;
    let in_s = is_in_s(phi, &market.margins)?;
    let strict = is_argmax_strict_subset(phi, &market.margins)?;
    let report = SolveReport {
        command: "solve".into(),
        value: sol.value,
        mu_opt: to_rows(sol.mu_opt.mu()),
        dual_f: sol.dual_f.to_vec(),
        dual_g: sol.dual_g.to_vec(),
        dual_value: sol.dual_value(),
        duality_gap: sol.duality_gap(),
        max_reduced_cost: sol.max_reduced_cost(phi),
        pivots: sol.pivots,
        in_s,
        argmax_is_entire_m: !strict,
        note: (!in_s).then(|| "argmax = entire M; Φ ∉ S".to_string()),
    };
    Ok(Outcome::ok(to_json(&report)))
}

pub fn cmd_check(market: &Market) -> Result<Outcome, CliError> {
    let mu = require(&market.mu, "mu")?;
    let r = check_rationalizable(mu)?;
    let note = if r.is_barycenter {
        "barycenter of M: strictly interior, never rationalizable"
    } else if r.rationalizable {
        "boundary point of M: rationalized by the witness"
    } else {
        "interior point of M: not rationalizable"
    };
    let report = CheckReport {
        command: "check".into(),
        rationalizable: r.rationalizable,
        witness: r.witness.as_ref().map(|w| to_rows(w.phi())),
        t_star: r.t_star,
        mu_star: r.mu_star.as_ref().map(|m| to_rows(m.mu())),
        checks: ChecksReport {
            boundary: r.checks.boundary,
            argmax: r.checks.argmax,
            in_s: r.checks.in_s,
        },
        note: note.into(),
    };
    Ok(Outcome {
        stdout: to_json(&report),
        exit_code: if r.rationalizable { exit::SUCCESS } else { exit::NEGATIVE },
    })
}

pub fn cmd_identify(market: &Market, entropy: EntropyChoice) -> Result<Outcome, CliError> {
    let mu = require(&market.mu, "mu")?;
    let model = match entropy {
        EntropyChoice::Shannon => EntropyModel::Shannon,
        EntropyChoice::Gauge => EntropyModel::Gauge,
        EntropyChoice::Quantile => EntropyModel::Quantile(
            market
                .values
                .clone()
                .ok_or_else(|| CliError::Usage("--entropy quantile needs x_values and y_values".into()))?,
        ),
    };
    let (id, gauge) = if let EntropyModel::Gauge = model {
        let (g, id) = identify::rationalize_gauge(mu)?;
        let section = GaugeSection {
            t_star: g.t_star,
            mu_star: to_rows(g.mu_star.mu()),
            binding_cells: g.binding_cells.iter().map(|&(x, y)| [x, y]).collect(),
        };
        (id, Some(section))
    } else {
        (identify_entropy(mu, &model)?, None)
    };
    let report = IdentifyReport {
        command: "identify".into(),
        entropy: id.method.name().into(),
        phi_raw: to_rows(id.phi_raw.phi()),
        phi_canonical: to_rows(id.phi_canonical.phi()),
        diagnostics: id.diagnostics,
        gauge,
    };
    Ok(Outcome::ok(to_json(&report)))
}

/// Arguments of the `simulate` command.
#[derive(Debug, Clone)]
pub struct SimulateArgs<'a> {
    pub households: u64,
    pub seed: u64,
    pub round_trip: bool,
    pub out_dir: &'a Path,
}

pub fn cmd_simulate(market: &Market, args: &SimulateArgs<'_>) -> Result<Outcome, CliError> {
    let phi = require(&market.phi, "phi")?;
    if args.households == 0 {
        return Err(CliError::Usage("--households must be at least 1".into()));
    }
    let sim = simulate_market(phi, &market.margins, args.households, args.seed)?;

    let mut truth = MarketFile::from_matching(&sim.mu_true);
    truth.phi = Some(to_rows(phi.phi()));
    let freq = sim.frequencies();
    let empirical_file = MarketFile {
        p: freq.sum_axis(ndarray::Axis(1)).to_vec(),
        q: freq.sum_axis(ndarray::Axis(0)).to_vec(),
        mu: Some(to_rows(&freq)),
        phi: None,
        x_values: None,
        y_values: None,
    };
    let true_path = args.out_dir.join("mu_true.json");
    let empirical_path = args.out_dir.join("mu_empirical.json");
    write_file(&true_path, &to_json(&truth))?;
    write_file(&empirical_path, &to_json(&empirical_file))?;

    let degenerate = freq.iter().any(|&v| v == 0.0);
    let round_trip = if args.round_trip && !degenerate {
        let id = identify_entropy(&sim.empirical()?, &EntropyModel::Shannon)?;
        let cross = identify::cross_difference_error(id.phi_raw.phi(), phi.phi());
        let ours = decompose_separable(&id.phi_raw, &market.margins)?.residual;
        let theirs = decompose_separable(phi, &market.margins)?.residual;
        let canonical = ours
            .iter()
            .zip(theirs.iter())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        Some(RoundTripReport {
            cross_difference_error: cross,
            canonical_error: canonical,
        })
    } else {
        None
    };
    let blocked = args.round_trip && degenerate;
    let report = SimulateReport {
        command: "simulate".into(),
        households: args.households,
        seed: args.seed,
        ipfp_iterations: sim.ipfp_iterations,
        mu_true_file: true_path.display().to_string(),
        mu_empirical_file: empirical_path.display().to_string(),
        empirical_degenerate: degenerate,
        round_trip,
        note: blocked.then(|| "empirical matching has empty cells; draw more households to identify".to_string()),
    };
    Ok(Outcome {
        stdout: to_json(&report),
        exit_code: if blocked { exit::NEGATIVE } else { exit::SUCCESS },
    })
}

pub fn cmd_geometry(market: &Market, tol: f64) -> Result<Outcome, CliError> {
    let mu = require(&market.mu, "mu")?;
    let emission = geometry::emit(mu, tol)?;
    Ok(Outcome::ok(geometry::render(&emission)))
}
