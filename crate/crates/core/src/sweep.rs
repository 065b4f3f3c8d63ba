//! Experiment orchestration over an `eps` sweep: one stage per rate, each
//! producing rate rows, fits, scalar checks and named text artifacts.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::attractor::{hausdorff, hausdorff_polyline, sample_attractor, AttractorSample, DensitySpec, EnergyMap};
use crate::case::EpsCase;
use crate::elliptic::{rate_load, shifted_diff_norm, solution_diff, solution_op_diff_norm};
use crate::equilibria::{continue_to_eps, find_all, find_all_limit, uniqueness_radius, Equilibrium, EquilibriumRecord};
use crate::error::Result;
use crate::fem::{nodal_mass, nodal_stiffness};
use crate::manifold::{
    attraction_rate, box_for, compute_graph, distance_to_graph, graph_diff, invariance_residual, split, GraphSpec,
};
use crate::model::{check_admissible, configured_profile, ProblemConfig, Violation};
use crate::ratefit::{RateModel, RateReport, RateRow};
use crate::semigroup::{time_one_diff, FlowConfig};
use crate::spectral::{eigenvalue_diff_ops, eigenvalues, gap_profile, liouville_length, GapRow};

/// Acceptance limits applied by the stages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    pub min_slope: f64,
    /// Allowed relative deviation of gap ratios from 1 for `i >= gap_from`.
    pub gap_rel: f64,
    pub gap_from: usize,
    pub gap_k: usize,
    pub margin: f64,
    /// Allowed max/min spread of `time_one_diff / tau_log`.
    pub ratio_spread: f64,
    pub invariance: f64,
    pub containment: f64,
    pub refinement_rel: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            min_slope: 0.85,
            gap_rel: 0.15,
            gap_from: 20,
            gap_k: 30,
            margin: 1e-3,
            ratio_spread: 10.0,
            invariance: 5e-3,
            containment: 1e-2,
            refinement_rel: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub eps_list: Vec<f64>,
    /// Mesh for the elliptic and spectral stages.
    pub n_static: usize,
    /// Mesh for equilibria and dynamics.
    pub n_dynamics: usize,
    pub flow: FlowConfig,
    pub density: DensitySpec,
    pub slow_dim: usize,
    /// Points drawn from each limit attractor sample as initial data.
    pub w0_samples: usize,
    pub seed: u64,
    /// Time step for the attraction-rate fit.
    pub attraction_dt: f64,
    pub thresholds: Thresholds,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            eps_list: default_eps_list(),
            n_static: 2048,
            n_dynamics: 1024,
            flow: FlowConfig::default(),
            density: DensitySpec::default(),
            slow_dim: 1,
            w0_samples: 12,
            seed: 0,
            attraction_dt: 5e-5,
            thresholds: Thresholds::default(),
        }
    }
}

/// `10^{-1 - k/2}` for `k = 0..5`.
pub fn default_eps_list() -> Vec<f64> {
    (0..5).map(|k| 10f64.powf(-1.0 - 0.5 * k as f64)).collect()
}

/// A scalar pass/fail verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit,
            pass: value <= limit,
        }
    }

    pub fn below(name: &str, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit,
            pass: value < limit,
        }
    }

    pub fn above(name: &str, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit,
            pass: value > limit,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Outcome {
    pub report: RateReport,
    pub checks: Vec<Check>,
    /// File name to contents.
    #[serde(skip)]
    pub artifacts: BTreeMap<String, String>,
}

impl Outcome {
    pub fn pass(&self) -> bool {
        self.report.fits.iter().all(|f| f.pass) && self.checks.iter().all(|c| c.pass)
    }

    pub fn merge(&mut self, other: Outcome) {
        self.report.extend(other.report);
        self.checks.extend(other.checks);
        self.artifacts.extend(other.artifacts);
    }

    fn fit(&mut self, name: &str, model: RateModel, min_slope: f64) -> Result<()> {
        self.report.fit(name, model, min_slope).map(|_| ())
    }
}

fn row(case: &EpsCase, quantity: &str, value: f64, dt: Option<f64>) -> RateRow {
    RateRow {
        eps: case.eps,
        tau: case.tau.tau,
        tau_log: case.tau.tau_log,
        p_dist: case.p_dist,
        quantity: quantity.into(),
        value,
        mesh_n: case.mesh_n(),
        dt,
    }
}

fn cases(config: &ProblemConfig, eps_list: &[f64], n: usize) -> Result<Vec<EpsCase>> {
    eps_list
        .par_iter()
        .map(|&eps| EpsCase::new(config, eps, n))
        .collect()
}

fn json<T: Serialize + ?Sized>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

/// Violations found at each `eps`.
pub type ViolationsByEps = Vec<(f64, Vec<Violation>)>;

/// Admissibility of the configured profile at every `eps` of the sweep.
pub fn check(config: &ProblemConfig, sweep: &SweepConfig) -> Result<(ViolationsByEps, Outcome)> {
    config.validate()?;
    let mut all = Vec::new();
    for &eps in &sweep.eps_list {
        let profile = configured_profile(config, eps)?;
        all.push((eps, check_admissible(&profile, config)));
    }
    let count = all.iter().map(|(_, v)| v.len()).sum::<usize>();
    let violations: Vec<_> = all
        .iter()
        .flat_map(|(eps, v)| v.iter().map(move |x| (eps, x)))
        .map(|(eps, v)| serde_json::json!({"eps": eps, "violation": v}))
        .collect();
    let mut out = Outcome::default();
    out.checks.push(Check::at_most("admissibility_violations", count as f64, 0.0));
    out.artifacts.insert("violations.json".into(), json(&violations));
    Ok((all, out))
}

/// Solution and resolvent distances against `tau`.
pub fn elliptic_rate(config: &ProblemConfig, sweep: &SweepConfig) -> Result<Outcome> {
    let cases = cases(config, &sweep.eps_list, sweep.n_static)?;
    let rows: Vec<Vec<RateRow>> = cases
        .par_iter()
        .map(|c| {
            Ok(vec![
                row(c, "solution_diff", solution_diff(c, &rate_load(c))?, None),
                row(c, "resolvent_diff", solution_op_diff_norm(c)?, None),
                row(c, "shifted_diff_mu1", shifted_diff_norm(c, 1.0)?, None),
                row(c, "shifted_diff_mu10", shifted_diff_norm(c, 10.0)?, None),
            ])
        })
        .collect::<Result<_>>()?;
    let mut out = Outcome::default();
    out.report.rows = rows.into_iter().flatten().collect();
    for q in ["solution_diff", "resolvent_diff", "shifted_diff_mu1", "shifted_diff_mu10"] {
        out.fit(q, RateModel::Tau, sweep.thresholds.min_slope)?;
    }
    out.artifacts.insert("elliptic_rate.csv".into(), out.report.rows_csv());
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumRow {
    pub eps: f64,
    pub i: usize,
    pub lambda_eps: f64,
    pub lambda_0: f64,
    pub diff: f64,
    pub tau: f64,
}

fn spectrum_csv(rows: &[SpectrumRow]) -> String {
    let mut s = String::from("eps,i,lambda_eps,lambda_0,diff,tau\n");
    for r in rows {
        s.push_str(&format!(
            "{:.17e},{},{:.17e},{:.17e},{:.17e},{:.17e}\n",
            r.eps, r.i, r.lambda_eps, r.lambda_0, r.diff, r.tau
        ));
    }
    s
}

fn gaps_csv(rows: &[GapRow]) -> String {
    let mut s = String::from("i,gap,model_ratio\n");
    for r in rows {
        s.push_str(&format!("{},{:.17e},{:.17e}\n", r.i, r.gap, r.model_ratio));
    }
    s
}

/// Gap profile of the `eps` operator at the middle of the sweep, checked
/// against the Liouville-length model for `i >= gap_from`.
fn gap_stage(config: &ProblemConfig, sweep: &SweepConfig, out: &mut Outcome) -> Result<()> {
    let mut sorted = sweep.eps_list.clone();
    sorted.sort_by(f64::total_cmp);
    let eps = sorted[sorted.len() / 2];
    let case = EpsCase::new(config, eps, sweep.n_static)?;
    let t = &sweep.thresholds;
    let l = liouville_length(&case.profile, false, 20_000);
    let gaps = gap_profile(&case.op_eps, l, t.gap_k)?;
    let worst = gaps
        .iter()
        .filter(|g| g.i >= t.gap_from)
        .map(|g| (g.model_ratio - 1.0).abs())
        .fold(0.0, f64::max);
    out.checks.push(Check::at_most("gap_ratio_deviation", worst, t.gap_rel));
    out.artifacts.insert("gaps.csv".into(), gaps_csv(&gaps));
    Ok(())
}

/// First ten eigenvalues of both operators per `eps`, and the gap profile.
pub fn spectrum(config: &ProblemConfig, sweep: &SweepConfig) -> Result<Outcome> {
    let cases = cases(config, &sweep.eps_list, sweep.n_static)?;
    let rows: Vec<Vec<SpectrumRow>> = cases
        .par_iter()
        .map(|c| {
            let le = eigenvalues(&c.op_eps, 10)?;
            let l0 = eigenvalues(&c.op_lim, 10)?;
            Ok((0..10)
                .map(|i| SpectrumRow {
                    eps: c.eps,
                    i,
                    lambda_eps: le[i],
                    lambda_0: l0[i],
                    diff: (le[i] - l0[i]).abs(),
                    tau: c.tau.tau,
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let rows: Vec<SpectrumRow> = rows.into_iter().flatten().collect();
    let mut out = Outcome::default();
    out.artifacts.insert("spectrum.csv".into(), spectrum_csv(&rows));
    gap_stage(config, sweep, &mut out)?;
    Ok(out)
}

/// `|lambda_i^eps - lambda_i^0|` for `i = 0, 1, 2` against `tau`.
pub fn eigen_rate(config: &ProblemConfig, sweep: &SweepConfig) -> Result<Outcome> {
    let cases = cases(config, &sweep.eps_list, sweep.n_static)?;
    let rows: Vec<Vec<(RateRow, SpectrumRow)>> = cases
        .par_iter()
        .map(|c| {
            let le = eigenvalues(&c.op_eps, 4)?;
            let l0 = eigenvalues(&c.op_lim, 4)?;
            (0..3)
                .map(|i| {
                    let diff = eigenvalue_diff_ops(&c.op_eps, &c.op_lim, i)?;
                    Ok((
                        row(c, &format!("eigenvalue_diff_{i}"), diff, None),
                        SpectrumRow {
                            eps: c.eps,
                            i,
                            lambda_eps: le[i],
                            lambda_0: l0[i],
                            diff,
                            tau: c.tau.tau,
                        },
                    ))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let (rate_rows, spec_rows): (Vec<_>, Vec<_>) = rows.into_iter().flatten().unzip();
    let mut out = Outcome::default();
    out.report.rows = rate_rows;
    for i in 0..3 {
        out.fit(&format!("eigenvalue_diff_{i}"), RateModel::Tau, sweep.thresholds.min_slope)?;
    }
    out.artifacts.insert("eigen_rate.csv".into(), out.report.rows_csv());
    out.artifacts.insert("spectrum.csv".into(), spectrum_csv(&spec_rows));
    gap_stage(config, sweep, &mut out)?;
    Ok(out)
}

/// Equilibria of both problems at one `eps`, matched by continuation.
pub struct EquilibriaCell {
    pub case: EpsCase,
    pub limit: Vec<Equilibrium>,
    /// Continuations of `limit`, index-matched.
    pub matched: Vec<Equilibrium>,
    /// Independent search on the `eps` problem.
    pub found: Vec<Equilibrium>,
    pub distance: f64,
}

pub fn equilibria_cells(config: &ProblemConfig, sweep: &SweepConfig) -> Result<Vec<EquilibriaCell>> {
    let f = &config.f;
    let cases = cases(config, &sweep.eps_list, sweep.n_dynamics)?;
    cases
        .into_par_iter()
        .map(|case| {
            let limit = find_all_limit(&case.op_lim, f)?;
            let delta = uniqueness_radius(&case.op_lim, &limit);
            let matched = limit
                .iter()
                .map(|e| continue_to_eps(&case, f, e, delta))
                .collect::<Result<Vec<_>>>()?;
            let found = find_all(&case.op_eps, f)?;
            let distance = matched
                .iter()
                .zip(&limit)
                .map(|(a, b)| case.cross_distance(&a.u, &b.u))
                .fold(0.0, f64::max);
            Ok(EquilibriaCell {
                case,
                limit,
                matched,
                found,
                distance,
            })
        })
        .collect()
}

#[derive(Serialize)]
struct EquilibriaDump {
    eps: f64,
    limit: Vec<EquilibriumRecord>,
    perturbed: Vec<EquilibriumRecord>,
}

pub fn equilibria_outcome(cells: &[&EquilibriaCell], sweep: &SweepConfig) -> Result<Outcome> {
    let mut out = Outcome::default();
    out.report.rows = cells
        .iter()
        .map(|c| row(&c.case, "equilibria_diff", c.distance, None))
        .collect();
    out.fit("equilibria_diff", RateModel::Tau, sweep.thresholds.min_slope)?;
    let counts: Vec<usize> = cells
        .iter()
        .flat_map(|c| [c.limit.len(), c.found.len()])
        .collect();
    let spread = counts.iter().max().unwrap_or(&0) - counts.iter().min().unwrap_or(&0);
    out.checks.push(Check::at_most("equilibria_count_spread", spread as f64, 0.0));
    let margin = cells
        .iter()
        .flat_map(|c| c.limit.iter().chain(&c.matched).chain(&c.found))
        .map(|e| e.margin)
        .fold(f64::INFINITY, f64::min);
    out.checks.push(Check::above("min_hyperbolicity_margin", margin, sweep.thresholds.margin));
    let dump: Vec<EquilibriaDump> = cells
        .iter()
        .map(|c| EquilibriaDump {
            eps: c.case.eps,
            limit: c.limit.iter().map(|e| e.record(&c.case.op_lim)).collect(),
            perturbed: c.matched.iter().map(|e| e.record(&c.case.op_eps)).collect(),
        })
        .collect();
    out.artifacts.insert("equilibria_rate.csv".into(), out.report.rows_csv());
    out.artifacts.insert("equilibria.json".into(), json(&dump));
    Ok(out)
}

pub fn equilibria_rate(config: &ProblemConfig, sweep: &SweepConfig) -> Result<Outcome> {
    let cells = equilibria_cells(config, sweep)?;
    equilibria_outcome(&cells.iter().collect::<Vec<_>>(), sweep)
}

/// Attractor samples of both problems at one `eps`.
pub struct AttractorCell {
    pub eq: EquilibriaCell,
    pub sample_eps: AttractorSample,
    pub sample_lim: AttractorSample,
    pub d_h: f64,
    pub d_h_polyline: f64,
    /// Same distance in the fixed `H^1` norm, independent of `eps`.
    pub d_h_h1: f64,
}

pub fn attractor_cells(config: &ProblemConfig, sweep: &SweepConfig) -> Result<Vec<AttractorCell>> {
    let f = &config.f;
    equilibria_cells(config, sweep)?
        .into_iter()
        .map(|eq| {
            let case = &eq.case;
            let sample_eps = sample_attractor(&case.op_eps, f, &eq.found, sweep.flow, &sweep.density)?;
            let sample_lim = sample_attractor(&case.op_lim, f, &eq.limit, sweep.flow, &sweep.density)?;
            let energy = EnergyMap::new(&case.op_eps.a)?;
            let ce = sample_eps.cloud(&case.op_eps, &energy);
            let cl = sample_lim.cloud(&case.op_lim, &energy);
            let h1 = nodal_stiffness(&case.mesh, |_| 1.0).combine(1.0, &nodal_mass(&case.mesh), 1.0);
            let h1 = EnergyMap::new(&h1)?;
            let d_h_h1 = hausdorff(&sample_eps.cloud(&case.op_eps, &h1), &sample_lim.cloud(&case.op_lim, &h1));
            Ok(AttractorCell {
                d_h: hausdorff(&ce, &cl),
                d_h_polyline: hausdorff_polyline(&ce, &cl),
                d_h_h1,
                eq,
                sample_eps,
                sample_lim,
            })
        })
        .collect()
}

#[derive(Serialize)]
struct AttractorSummary {
    eps: f64,
    tau: f64,
    d_h: f64,
    slope_fit: f64,
}

pub fn attractor_outcome(cells: &[AttractorCell], sweep: &SweepConfig, dump_clouds: bool) -> Result<Outcome> {
    let mut out = Outcome::default();
    for c in cells {
        out.report.rows.push(row(&c.eq.case, "hausdorff", c.d_h, Some(sweep.flow.dt)));
        out.report
            .rows
            .push(row(&c.eq.case, "hausdorff_polyline", c.d_h_polyline, Some(sweep.flow.dt)));
        out.report
            .rows
            .push(row(&c.eq.case, "hausdorff_h1", c.d_h_h1, Some(sweep.flow.dt)));
    }
    let slope = out
        .report
        .fit("hausdorff", RateModel::TauLog, sweep.thresholds.min_slope)?
        .slope;
    out.fit("hausdorff_polyline", RateModel::TauLog, sweep.thresholds.min_slope)?;
    out.fit("hausdorff_h1", RateModel::TauLog, 0.0)?;
    let summary: Vec<AttractorSummary> = cells
        .iter()
        .map(|c| AttractorSummary {
            eps: c.eq.case.eps,
            tau: c.eq.case.tau.tau,
            d_h: c.d_h,
            slope_fit: slope,
        })
        .collect();
    out.artifacts.insert("attractor_rate.csv".into(), out.report.rows_csv());
    out.artifacts.insert("attractor_summary.json".into(), json(&summary));
    if dump_clouds {
        for (k, c) in cells.iter().enumerate() {
            out.artifacts
                .insert(format!("attractor_eps_{k}.csv"), c.sample_eps.to_csv(&c.eq.case.op_eps));
            out.artifacts
                .insert(format!("attractor_limit_{k}.csv"), c.sample_lim.to_csv(&c.eq.case.op_lim));
        }
    }
    Ok(out)
}

/// Initial data for the semigroup comparison: the limit equilibria plus a
/// seeded subsample of the limit attractor sample.
pub fn initial_data(cell: &AttractorCell, sweep: &SweepConfig) -> Vec<Vec<f64>> {
    let pts: Vec<&[f64]> = cell
        .sample_lim
        .branches
        .iter()
        .flat_map(|b| b.points.iter().map(|p| p.as_slice()))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(sweep.seed);
    let mut picks: Vec<usize> = sample(&mut rng, pts.len(), sweep.w0_samples.min(pts.len())).into_vec();
    picks.sort_unstable();
    cell.sample_lim
        .equilibria
        .iter()
        .cloned()
        .chain(picks.into_iter().map(|i| pts[i].to_vec()))
        .collect()
}

/// `max_{w0} |T_eps(1) w0 - T_0(1) w0|` and the spread of its ratio to
/// `tau |log tau|`.
pub fn semigroup_outcome(cells: &[AttractorCell], config: &ProblemConfig, sweep: &SweepConfig) -> Result<Outcome> {
    let mut out = Outcome::default();
    for c in cells {
        let w0s = initial_data(c, sweep);
        let diffs = w0s
            .par_iter()
            .map(|w| time_one_diff(&c.eq.case, &config.f, w, sweep.flow))
            .collect::<Result<Vec<f64>>>()?;
        let value = diffs.into_iter().fold(0.0, f64::max);
        out.report
            .rows
            .push(row(&c.eq.case, "time_one_diff", value, Some(sweep.flow.dt)));
    }
    out.fit("time_one_diff", RateModel::TauLog, 0.0)?;
    let ratios: Vec<f64> = out.report.rows.iter().map(|r| r.value / r.tau_log).collect();
    let hi = ratios.iter().copied().fold(0.0, f64::max);
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    out.checks
        .push(Check::at_most("time_one_ratio_spread", spread, sweep.thresholds.ratio_spread));
    out.artifacts.insert("semigroup_rate.csv".into(), out.report.rows_csv());
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct ManifoldRow {
    pub eps: f64,
    pub beta: f64,
    pub gamma: f64,
    pub kappa_eps: f64,
    pub kappa_lim: f64,
    pub graph_diff: f64,
    pub invariance: f64,
    pub containment: f64,
}

/// Graphs of both problems per `eps`: contraction, invariance, attractor
/// containment, graph distance against `tau |log tau|`, grid refinement at
/// the smallest `eps`, and attraction rates at the sweep ends.
pub fn manifold_outcome(cells: &[AttractorCell], config: &ProblemConfig, sweep: &SweepConfig) -> Result<Outcome> {
    let f = &config.f;
    let t = &sweep.thresholds;
    let m = sweep.slow_dim;
    let mut out = Outcome::default();
    let mut table = Vec::new();
    let mut attraction = Vec::new();
    let last = cells.len().saturating_sub(1);
    let mut refinement = None;
    for (k, c) in cells.iter().enumerate() {
        let case = &c.eq.case;
        let se = split(&case.op_eps, m)?;
        let sl = split(&case.op_lim, m)?;
        let states: Vec<Vec<f64>> = c.eq.limit.iter().map(|e| e.u.clone()).collect();
        let spec = GraphSpec::new(box_for(&sl, &states, 0.5), m);
        let ge = compute_graph(&se, f, &spec)?;
        let gl = compute_graph(&sl, f, &spec)?;
        let diff = graph_diff(&se, &ge.graph, &sl, &gl.graph, spec.rho_core())?;
        let invariance = invariance_residual(&se, f, &ge.graph, spec.rho_core(), 0.5, sweep.flow)?;
        let containment = c
            .sample_eps
            .points()
            .par_iter()
            .map(|(u, _)| distance_to_graph(&se, &ge.graph, u))
            .reduce(|| 0.0, f64::max);
        out.report.rows.push(row(case, "graph_diff", diff, None));
        table.push(ManifoldRow {
            eps: case.eps,
            beta: se.beta,
            gamma: se.gamma,
            kappa_eps: ge.kappa,
            kappa_lim: gl.kappa,
            graph_diff: diff,
            invariance,
            containment,
        });
        if k == 0 || k == last {
            let eta = vec![0.3 * spec.rho_core(); m];
            let mut u0 = se.lift(&eta);
            u0.iter_mut().zip(ge.graph.eval(&eta)).for_each(|(a, b)| *a += b);
            for j in 1..6 {
                let b = se.basis(m + j - 1);
                u0.iter_mut().zip(&b).for_each(|(a, x)| *a += 0.02 * x / j as f64);
            }
            let fit = attraction_rate(
                &se,
                f,
                &ge.graph,
                &u0,
                2.0,
                1e3 * invariance.max(1e-8),
                FlowConfig::with_dt(sweep.attraction_dt),
            )?;
            attraction.push((case.eps, fit.rate, fit.gamma - fit.l_est));
        }
        if k == last {
            let fine = GraphSpec {
                resolution: 2 * spec.resolution - 1,
                ..spec
            };
            let ge2 = compute_graph(&se, f, &fine)?;
            let gl2 = compute_graph(&sl, f, &fine)?;
            let diff2 = graph_diff(&se, &ge2.graph, &sl, &gl2.graph, spec.rho_core())?;
            refinement = Some((diff2 - diff).abs() / diff.max(f64::MIN_POSITIVE));
        }
        if k == 0 {
            out.artifacts.insert("manifold_graph_eps.csv".into(), ge.graph.to_csv(&case.op_eps));
            out.artifacts.insert("manifold_graph_limit.csv".into(), gl.graph.to_csv(&case.op_lim));
        }
    }
    out.fit("graph_diff", RateModel::TauLog, t.min_slope)?;
    let kappa = table.iter().map(|r| r.kappa_eps.max(r.kappa_lim)).fold(0.0, f64::max);
    out.checks.push(Check::below("lp_contraction_kappa", kappa, 1.0));
    let inv = table.iter().map(|r| r.invariance).fold(0.0, f64::max);
    out.checks.push(Check::at_most("graph_invariance_residual", inv, t.invariance));
    let cont = table.iter().map(|r| r.containment).fold(0.0, f64::max);
    out.checks.push(Check::at_most("attractor_graph_distance", cont, t.containment));
    if let Some(rel) = refinement {
        out.checks.push(Check::below("graph_diff_refinement", rel, t.refinement_rel));
    }
    for (eps, rate, bound) in &attraction {
        out.checks.push(Check {
            name: format!("attraction_rate_eps_{eps:.3e}"),
            value: *rate,
            limit: *bound,
            pass: rate >= bound && *bound > 0.0,
        });
    }
    out.artifacts.insert("manifold_rate.csv".into(), out.report.rows_csv());
    out.artifacts.insert("manifold.json".into(), json(&table));
    Ok(out)
}

pub fn attractor_rate(config: &ProblemConfig, sweep: &SweepConfig) -> Result<Outcome> {
    attractor_outcome(&attractor_cells(config, sweep)?, sweep, false)
}

pub fn semigroup_rate(config: &ProblemConfig, sweep: &SweepConfig) -> Result<Outcome> {
    semigroup_outcome(&attractor_cells(config, sweep)?, config, sweep)
}

pub fn manifold_rate(config: &ProblemConfig, sweep: &SweepConfig) -> Result<Outcome> {
    manifold_outcome(&attractor_cells(config, sweep)?, config, sweep)
}

/// Every stage; the dynamics stages share one set of attractor samples.
pub fn all(config: &ProblemConfig, sweep: &SweepConfig) -> Result<Outcome> {
    let (_, mut out) = check(config, sweep)?;
    out.merge(spectrum(config, sweep)?);
    out.merge(elliptic_rate(config, sweep)?);
    out.merge(eigen_rate(config, sweep)?);
    let cells = attractor_cells(config, sweep)?;
    out.merge(equilibria_outcome(&cells.iter().map(|c| &c.eq).collect::<Vec<_>>(), sweep)?);
    out.merge(attractor_outcome(&cells, sweep, false)?);
    out.merge(semigroup_outcome(&cells, config, sweep)?);
    out.merge(manifold_outcome(&cells, config, sweep)?);
    dedupe_checks(&mut out);
    Ok(out)
}

fn dedupe_checks(out: &mut Outcome) {
    let mut seen = std::collections::HashSet::new();
    out.checks.retain(|c| seen.insert(c.name.clone()));
}
