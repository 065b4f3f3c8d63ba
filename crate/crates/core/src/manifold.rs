//! Lyapunov-Perron computation of the inertial-manifold graph over the slow
//! eigenspace, and distances between graphs.
//!
//! The slow vector field and the fast forcing are multiplied by a smooth
//! cutoff in the slow coordinates that equals one on the inner half of the
//! box and vanishes on its boundary, so backward slow trajectories that leave
//! the box no longer contribute to the integral.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::case::Embedding;
use crate::error::{Error, Result};
use crate::fem::DiscreteOperator;
use crate::linalg::{dense_pencil_eig, dot, SymTridiag, TridiagLu};
use crate::model::Nonlinearity;
use crate::nonlinear::load;
use crate::semigroup::{step_to, FlowConfig, Stepper};
use crate::spectral::spectral_projection;

/// Largest dof count accepted by the dense fast-mode decomposition.
pub const DENSE_LIMIT: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GraphSpec {
    /// Half-width of the slow-coordinate box.
    pub rho_box: f64,
    /// Grid nodes per slow axis.
    pub resolution: usize,
    /// Fraction of the box on which the cutoff equals one.
    pub core_fraction: f64,
    pub tol: f64,
    /// Sup bound `D` used for the horizon and checked on the result.
    pub sup_bound: f64,
    /// Lipschitz budget `Delta`.
    pub lipschitz_budget: f64,
    /// Time samples of the truncated integral.
    pub samples: usize,
    pub max_iter: usize,
    /// Without the cutoff a backward trajectory leaving the box is an error.
    pub cutoff: bool,
}

impl GraphSpec {
    pub fn new(rho_box: f64, m: usize) -> Self {
        let resolution = match m {
            1 => 41,
            2 => 21,
            _ => 11,
        };
        Self {
            rho_box,
            resolution,
            core_fraction: 0.5,
            tol: 1e-6,
            sup_bound: 1.0,
            lipschitz_budget: 1.0,
            samples: 64,
            max_iter: 100,
            cutoff: true,
        }
    }

    pub fn rho_core(&self) -> f64 {
        self.core_fraction * self.rho_box
    }

    /// Horizon with `exp(-gamma T) D <= tol / 10`.
    pub fn horizon(&self, gamma: f64) -> f64 {
        (10.0 * self.sup_bound / self.tol).ln().max(1.0) / gamma
    }

    /// Smooth box cutoff, a product of quintic smoothsteps per axis.
    pub fn cutoff_weight(&self, eta: &[f64]) -> f64 {
        if !self.cutoff {
            return 1.0;
        }
        let (lo, hi) = (self.rho_core(), self.rho_box);
        eta.iter()
            .map(|&v| {
                let r = v.abs();
                if r <= lo {
                    1.0
                } else if r >= hi {
                    0.0
                } else {
                    let t = (hi - r) / (hi - lo);
                    t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
                }
            })
            .product()
    }
}

/// Slow/fast splitting at the cut `m`, with the full modal basis of the
/// pencil `(A, M)` for the fast semigroup.
pub struct SpectralSplit<'a> {
    pub op: &'a DiscreteOperator,
    pub m: usize,
    /// All eigenvalues, ascending.
    pub values: DVector<f64>,
    /// `M`-orthonormal eigenvectors as columns.
    pub vectors: DMatrix<f64>,
    /// Largest slow eigenvalue.
    pub beta: f64,
    /// Smallest fast eigenvalue.
    pub gamma: f64,
    /// Bound of the fast semigroup in the energy norm (self-adjoint, so 1).
    pub big_m: f64,
    mass_lu: TridiagLu,
}

pub fn split(op: &DiscreteOperator, m: usize) -> Result<SpectralSplit<'_>> {
    if !(1..=3).contains(&m) {
        return Err(Error::Config(format!("slow dimension {m} outside 1..=3")));
    }
    let ndof = op.ndof();
    if ndof > DENSE_LIMIT {
        return Err(Error::OracleGuard { n: ndof, limit: DENSE_LIMIT });
    }
    let proj = spectral_projection(op, m)?;
    let l = op.mass.cholesky()?.to_dense();
    let (values, mut vectors) = dense_pencil_eig(&op.a.to_dense(), &l);
    let mass = &op.mass;
    for j in 0..ndof {
        let col: Vec<f64> = vectors.column(j).iter().copied().collect();
        let flip = if j < m {
            dot(&col, &mass.matvec(&proj.basis[j])) < 0.0
        } else {
            let mut c = col.clone();
            crate::linalg::fix_sign(&mut c);
            c != col
        };
        if flip {
            vectors.column_mut(j).neg_mut();
        }
    }
    Ok(SpectralSplit {
        op,
        m,
        beta: values[m - 1],
        gamma: values[m],
        big_m: 1.0,
        values,
        vectors,
        mass_lu: op.mass.lu()?,
    })
}

impl SpectralSplit<'_> {
    pub fn basis(&self, j: usize) -> Vec<f64> {
        self.vectors.column(j).iter().copied().collect()
    }

    /// Slow coordinates `Phi^T M u`.
    pub fn coords(&self, u: &[f64]) -> Vec<f64> {
        let mu = self.op.mass.matvec(u);
        (0..self.m)
            .map(|j| self.vectors.column(j).iter().zip(&mu).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn lift(&self, eta: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.op.ndof()];
        for (j, &c) in eta.iter().enumerate() {
            out.iter_mut()
                .zip(self.vectors.column(j).iter())
                .for_each(|(o, x)| *o += c * x);
        }
        out
    }

    /// Slow coordinates `H` and fast function `G` of `f(v + z)`.
    pub fn h_g(&self, f: &Nonlinearity, eta: &[f64], z: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut u = self.lift(eta);
        u.iter_mut().zip(z).for_each(|(a, b)| *a += b);
        let l = load(self.op, f, &u);
        let h: Vec<f64> = (0..self.m)
            .map(|j| self.vectors.column(j).iter().zip(&l).map(|(a, b)| a * b).sum())
            .collect();
        let mut g = self.mass_lu.solve(&l);
        let slow = self.lift(&h);
        g.iter_mut().zip(&slow).for_each(|(a, b)| *a -= b);
        (h, g)
    }

    fn energy(&self, u: &[f64]) -> f64 {
        self.op.a.form(u, u).max(0.0).sqrt()
    }
}

/// Fast component of the graph at the nodes of a uniform box grid.
#[derive(Debug, Clone)]
pub struct GraphFunction {
    pub m: usize,
    pub rho_box: f64,
    pub resolution: usize,
    pub values: Vec<Vec<f64>>,
    pub lipschitz_budget: f64,
    pub sup_bound: f64,
}

impl GraphFunction {
    pub fn zero(m: usize, ndof: usize, spec: &GraphSpec) -> Self {
        Self {
            m,
            rho_box: spec.rho_box,
            resolution: spec.resolution,
            values: vec![vec![0.0; ndof]; spec.resolution.pow(m as u32)],
            lipschitz_budget: spec.lipschitz_budget,
            sup_bound: spec.sup_bound,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn spacing(&self) -> f64 {
        2.0 * self.rho_box / (self.resolution - 1) as f64
    }

    fn multi_index(&self, mut k: usize) -> Vec<usize> {
        (0..self.m)
            .map(|_| {
                let i = k % self.resolution;
                k /= self.resolution;
                i
            })
            .collect()
    }

    pub fn node(&self, k: usize) -> Vec<f64> {
        let h = self.spacing();
        self.multi_index(k)
            .into_iter()
            .map(|i| -self.rho_box + i as f64 * h)
            .collect()
    }

    /// Multilinear interpolation, clamped to the box.
    pub fn eval(&self, eta: &[f64]) -> Vec<f64> {
        let h = self.spacing();
        let r = self.resolution;
        let mut base = Vec::with_capacity(self.m);
        let mut frac = Vec::with_capacity(self.m);
        for &v in eta {
            let x = ((v.clamp(-self.rho_box, self.rho_box) + self.rho_box) / h).min((r - 1) as f64);
            let i = (x.floor() as usize).min(r - 2);
            base.push(i);
            frac.push(x - i as f64);
        }
        let ndof = self.values[0].len();
        let mut out = vec![0.0; ndof];
        for corner in 0..(1usize << self.m) {
            let mut w = 1.0;
            let mut k = 0;
            let mut stride = 1;
            for d in 0..self.m {
                let up = (corner >> d) & 1;
                w *= if up == 1 { frac[d] } else { 1.0 - frac[d] };
                k += (base[d] + up) * stride;
                stride *= r;
            }
            if w != 0.0 {
                out.iter_mut().zip(&self.values[k]).for_each(|(o, v)| *o += w * v);
            }
        }
        out
    }

    pub fn sup_norm(&self, a: &SymTridiag) -> f64 {
        self.values
            .iter()
            .map(|v| a.form(v, v).max(0.0).sqrt())
            .fold(0.0, f64::max)
    }

    /// Largest energy-norm difference quotient between grid neighbours.
    pub fn lipschitz(&self, a: &SymTridiag) -> f64 {
        let h = self.spacing();
        let mut best = 0.0_f64;
        for k in 0..self.len() {
            let idx = self.multi_index(k);
            let mut stride = 1;
            for &i in idx.iter() {
                if i + 1 < self.resolution {
                    let d: Vec<f64> = self.values[k + stride]
                        .iter()
                        .zip(&self.values[k])
                        .map(|(p, q)| p - q)
                        .collect();
                    best = best.max(a.form(&d, &d).max(0.0).sqrt() / h);
                }
                stride *= self.resolution;
            }
        }
        best
    }

    /// Grid nodes inside the cube of half-width `radius`.
    pub fn nodes_within(&self, radius: f64) -> Vec<usize> {
        (0..self.len())
            .filter(|&k| self.node(k).iter().all(|v| v.abs() <= radius + 1e-12))
            .collect()
    }

    /// CSV dump: slow coordinates followed by fast nodal values.
    pub fn to_csv(&self, op: &DiscreteOperator) -> String {
        let mut out = String::new();
        let header: Vec<String> = (0..self.m)
            .map(|j| format!("eta{j}"))
            .chain((0..op.mesh.n_nodes()).map(|i| format!("z{i}")))
            .collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for k in 0..self.len() {
            let row: Vec<String> = self
                .node(k)
                .iter()
                .chain(op.embed(&self.values[k]).iter())
                .map(|v| format!("{v:.12e}"))
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Exact weights of `int e^{lambda r} g(r) dr` over `[-T, 0]` for `g`
/// piecewise linear on `samples` uniform intervals; row-major per mode.
fn modal_weights(values: &[f64], horizon: f64, samples: usize) -> Vec<f64> {
    let h = horizon / samples as f64;
    let mut w = vec![0.0; values.len() * (samples + 1)];
    for (k, &lam) in values.iter().enumerate() {
        let z = lam * h;
        let (phi1, phi2) = if z.abs() < 1e-4 {
            (1.0 - z / 2.0 + z * z / 6.0, 0.5 - z / 3.0 + z * z / 8.0)
        } else {
            let e = (-z).exp();
            ((1.0 - e) / z, (1.0 - (1.0 + z) * e) / (z * z))
        };
        let row = &mut w[k * (samples + 1)..(k + 1) * (samples + 1)];
        for i in 0..samples {
            let b = -horizon + (i + 1) as f64 * h;
            let scale = (lam * b).exp() * h;
            row[i] += scale * phi2;
            row[i + 1] += scale * (phi1 - phi2);
        }
    }
    w
}

/// One application of the Lyapunov-Perron map. Returns the new graph and the
/// largest node-wise energy change.
pub fn lp_iterate(
    split: &SpectralSplit,
    f: &Nonlinearity,
    s: &GraphFunction,
    spec: &GraphSpec,
    horizon: f64,
) -> Result<(GraphFunction, f64)> {
    let ndof = split.op.ndof();
    let m = split.m;
    let samples = spec.samples;
    let dr = horizon / samples as f64;
    let lambdas: Vec<f64> = (0..m).map(|j| split.values[j]).collect();

    let field = |eta: &[f64]| -> (Vec<f64>, Vec<f64>) {
        let w = spec.cutoff_weight(eta);
        let z = s.eval(eta);
        let mut u = split.lift(eta);
        u.iter_mut().zip(&z).for_each(|(a, b)| *a += b);
        let mut l = if w == 0.0 { vec![0.0; ndof] } else { load(split.op, f, &u) };
        l.iter_mut().for_each(|v| *v *= w);
        let h: Vec<f64> = (0..m)
            .map(|j| split.vectors.column(j).iter().zip(&l).map(|(a, b)| a * b).sum())
            .collect();
        let rhs = (0..m).map(|j| -lambdas[j] * eta[j] + h[j]).collect();
        (rhs, l)
    };

    // Per node: weighted loads at r_j = -T + j dr, j = samples..=0.
    let loads: Vec<Result<Vec<Vec<f64>>>> = (0..s.len())
        .into_par_iter()
        .map(|k| {
            let mut eta = s.node(k);
            let mut out = vec![vec![0.0; ndof]; samples + 1];
            for j in (0..=samples).rev() {
                let (k1, l) = field(&eta);
                out[j] = l;
                if j == 0 {
                    break;
                }
                let outside = eta.iter().any(|v| v.abs() > spec.rho_box);
                if outside {
                    if spec.cutoff {
                        break;
                    }
                    let reached = eta.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
                    return Err(Error::BoxEscape { reached, allowed: spec.rho_box });
                }
                let step = |e: &[f64], d: &[f64], c: f64| -> Vec<f64> {
                    e.iter().zip(d).map(|(a, b)| a - c * dr * b).collect()
                };
                let (k2, _) = field(&step(&eta, &k1, 0.5));
                let (k3, _) = field(&step(&eta, &k2, 0.5));
                let (k4, _) = field(&step(&eta, &k3, 1.0));
                for d in 0..m {
                    eta[d] -= dr / 6.0 * (k1[d] + 2.0 * k2[d] + 2.0 * k3[d] + k4[d]);
                }
                if eta.iter().any(|v| !v.is_finite()) {
                    return Err(Error::BoxEscape { reached: f64::INFINITY, allowed: spec.rho_box });
                }
            }
            Ok(out)
        })
        .collect();
    let loads = loads.into_iter().collect::<Result<Vec<_>>>()?;

    let nfast = ndof - m;
    let cols = s.len() * (samples + 1);
    let lmat = DMatrix::from_fn(ndof, cols, |i, c| loads[c / (samples + 1)][c % (samples + 1)][i]);
    let xf = split.vectors.columns(m, nfast);
    let coef = xf.transpose() * &lmat;
    let fast_values: Vec<f64> = (m..ndof).map(|k| split.values[k]).collect();
    let w = modal_weights(&fast_values, horizon, samples);
    let zeta = DMatrix::from_fn(nfast, s.len(), |k, node| {
        (0..=samples)
            .map(|j| w[k * (samples + 1) + j] * coef[(k, node * (samples + 1) + j)])
            .sum()
    });
    let z = xf * zeta;

    let mut next = s.clone();
    let mut change = 0.0_f64;
    for k in 0..s.len() {
        let v: Vec<f64> = z.column(k).iter().copied().collect();
        let d: Vec<f64> = v.iter().zip(&s.values[k]).map(|(a, b)| a - b).collect();
        change = change.max(split.energy(&d));
        next.values[k] = v;
    }
    Ok((next, change))
}

#[derive(Debug, Clone)]
pub struct ManifoldGraph {
    pub graph: GraphFunction,
    /// Largest ratio of successive changes.
    pub kappa: f64,
    pub changes: Vec<f64>,
    pub horizon: f64,
    pub sup: f64,
    pub lipschitz: f64,
}

/// Iterate the Lyapunov-Perron map from the zero graph until the change drops
/// below `spec.tol`.
pub fn compute_graph(split: &SpectralSplit, f: &Nonlinearity, spec: &GraphSpec) -> Result<ManifoldGraph> {
    if spec.resolution < 2 || spec.samples < 1 || spec.rho_box <= 0.0 || spec.tol <= 0.0 {
        return Err(Error::Config("graph grid needs resolution >= 2, samples >= 1, positive box and tol".into()));
    }
    let horizon = spec.horizon(split.gamma);
    let mut s = GraphFunction::zero(split.m, split.op.ndof(), spec);
    let mut changes: Vec<f64> = Vec::new();
    let mut kappa = 0.0_f64;
    for it in 0..spec.max_iter {
        let (next, change) = lp_iterate(split, f, &s, spec, horizon)?;
        if let Some(&prev) = changes.last() {
            if prev > 0.0 {
                let ratio = change / prev;
                kappa = kappa.max(ratio);
                if ratio >= 1.0 {
                    return Err(Error::NoContraction { kappa: ratio });
                }
            }
        }
        changes.push(change);
        s = next;
        if change <= spec.tol {
            let a = &split.op.a;
            let sup = s.sup_norm(a);
            let lipschitz = s.lipschitz(a);
            check_invariants(split, &s, sup, lipschitz, it + 1)?;
            return Ok(ManifoldGraph {
                graph: s,
                kappa,
                changes,
                horizon,
                sup,
                lipschitz,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: spec.max_iter,
        residual: changes.last().copied().unwrap_or(f64::NAN),
        last_iterate: Vec::new(),
    })
}

fn check_invariants(split: &SpectralSplit, s: &GraphFunction, sup: f64, lipschitz: f64, iterations: usize) -> Result<()> {
    let fail = |message: String| Err(Error::Numerical { message, iterations });
    if sup > s.sup_bound {
        return fail(format!("graph sup {sup:.3e} exceeds bound {:.3e}", s.sup_bound));
    }
    if lipschitz > s.lipschitz_budget {
        return fail(format!("graph Lipschitz constant {lipschitz:.3e} exceeds budget {:.3e}", s.lipschitz_budget));
    }
    let ortho = s
        .values
        .iter()
        .flat_map(|v| split.coords(v))
        .fold(0.0_f64, |a, c| a.max(c.abs()));
    if ortho > 1e-9 * sup.max(1.0) {
        return fail(format!("graph values leave the fast space: slow component {ortho:.3e}"));
    }
    Ok(())
}

/// Energy distance from `u` to the graph point over its slow coordinates.
pub fn distance_to_graph(split: &SpectralSplit, graph: &GraphFunction, u: &[f64]) -> f64 {
    let eta = split.coords(u);
    let mut d = split.lift(&eta);
    d.iter_mut().zip(graph.eval(&eta)).for_each(|(a, b)| *a += b);
    d.iter_mut().zip(u).for_each(|(a, b)| *a = b - *a);
    split.energy(&d)
}

/// Largest distance to the graph after flowing graph points inside the core
/// for time `t`.
pub fn invariance_residual(
    split: &SpectralSplit,
    f: &Nonlinearity,
    graph: &GraphFunction,
    radius: f64,
    t: f64,
    flow: FlowConfig,
) -> Result<f64> {
    let nodes = graph.nodes_within(radius);
    let dists: Vec<Result<f64>> = nodes
        .par_iter()
        .map(|&k| {
            let eta = graph.node(k);
            let mut u = split.lift(&eta);
            u.iter_mut().zip(&graph.values[k]).for_each(|(a, b)| *a += b);
            let u1 = step_to(split.op, f, &u, t, flow)?;
            Ok(distance_to_graph(split, graph, &u1))
        })
        .collect();
    dists.into_iter().try_fold(0.0_f64, |a, d| Ok(a.max(d?)))
}

#[derive(Debug, Clone, Serialize)]
pub struct AttractionFit {
    pub rate: f64,
    /// Largest `|f'|` met along the trajectory.
    pub l_est: f64,
    pub gamma: f64,
    pub samples: Vec<(f64, f64)>,
}

/// Decay rate of the distance to the graph along the trajectory from `u0`,
/// fitted over the stretch where the distance lies in `[floor, 0.1 d(0)]`.
pub fn attraction_rate(
    split: &SpectralSplit,
    f: &Nonlinearity,
    graph: &GraphFunction,
    u0: &[f64],
    t_end: f64,
    floor: f64,
    flow: FlowConfig,
) -> Result<AttractionFit> {
    let stepper = Stepper::new(split.op, f, flow)?;
    let mut samples = vec![(0.0, distance_to_graph(split, graph, u0))];
    let mut l_est = 0.0_f64;
    let mut track = |u: &[f64]| {
        for v in split.op.embed(u) {
            l_est = l_est.max(f.derivative(v).abs());
        }
    };
    track(u0);
    stepper.integrate(u0, t_end, |t, u| {
        track(u);
        let d = distance_to_graph(split, graph, u);
        samples.push((t, d));
        d < floor
    })?;
    let d0 = samples[0].1;
    let window: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(_, d)| *d <= 0.1 * d0 && *d >= floor)
        .map(|&(t, d)| (t, d.ln()))
        .collect();
    if window.len() < 3 {
        return Err(Error::Numerical {
            message: format!("only {} samples in the attraction fit window", window.len()),
            iterations: samples.len(),
        });
    }
    let n = window.len() as f64;
    let (st, sy) = window.iter().fold((0.0, 0.0), |(a, b), (t, y)| (a + t, b + y));
    let (mt, my) = (st / n, sy / n);
    let (num, den) = window
        .iter()
        .fold((0.0, 0.0), |(a, b), (t, y)| (a + (t - mt) * (y - my), b + (t - mt) * (t - mt)));
    Ok(AttractionFit {
        rate: -num / den,
        l_est,
        gamma: split.gamma,
        samples,
    })
}

/// `sup` over limit-grid nodes within `radius` of `|s_eps(eta_eps) - E s_0(eta)|`
/// in the energy norm of the target operator, where `eta_eps` are the slow
/// coordinates of the embedded limit slow point.
pub fn graph_diff(
    split_eps: &SpectralSplit,
    graph_eps: &GraphFunction,
    split_lim: &SpectralSplit,
    graph_lim: &GraphFunction,
    radius: f64,
) -> Result<f64> {
    let emb = Embedding::new(split_lim.op, split_eps.op)?;
    let m = split_lim.m;
    if split_eps.m != m {
        return Err(Error::Dimension { expected: m, got: split_eps.m });
    }
    for j in 0..m {
        let overlap = split_eps.coords(&emb.apply(&split_lim.basis(j)))[j];
        if overlap.abs() < 0.5 {
            return Err(Error::Alignment { mode: j, overlap });
        }
    }
    let mut best = 0.0_f64;
    for k in graph_lim.nodes_within(radius) {
        let eta = graph_lim.node(k);
        let eta_eps = split_eps.coords(&emb.apply(&split_lim.lift(&eta)));
        let se = graph_eps.eval(&eta_eps);
        let s0 = emb.apply(&graph_lim.values[k]);
        let d: Vec<f64> = se.iter().zip(&s0).map(|(a, b)| a - b).collect();
        best = best.max(split_eps.energy(&d));
    }
    Ok(best)
}

/// Half-width of a box whose core holds the given states' slow coordinates
/// with a 25% margin.
pub fn box_for(split: &SpectralSplit, states: &[Vec<f64>], core_fraction: f64) -> f64 {
    let extent = states
        .iter()
        .flat_map(|u| split.coords(u))
        .fold(0.0_f64, |a, c| a.max(c.abs()));
    1.25 * extent.max(0.1) / core_fraction
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_integrate_exponentials() {
        let lam = [0.0, 3.0, 1e6];
        let (t, s) = (0.7, 50);
        let w = modal_weights(&lam, t, s);
        for (k, &l) in lam.iter().enumerate() {
            let row = &w[k * (s + 1)..(k + 1) * (s + 1)];
            let constant: f64 = row.iter().sum();
            let exact = if l == 0.0 { t } else { (1.0 - (-l * t).exp()) / l };
            assert!((constant - exact).abs() < 1e-12 * exact.max(1.0), "{l}");
            let linear: f64 = row
                .iter()
                .enumerate()
                .map(|(j, w)| w * (-t + j as f64 * t / s as f64))
                .sum();
            let exact = if l == 0.0 {
                -t * t / 2.0
            } else {
                -1.0 / (l * l) + (-l * t).exp() * (1.0 + l * t) / (l * l)
            };
            assert!((linear - exact).abs() < 1e-12, "{l}: {linear} vs {exact}");
        }
    }

    #[test]
    fn cutoff_profile() {
        let spec = GraphSpec::new(2.0, 1);
        assert_eq!(spec.cutoff_weight(&[0.9]), 1.0);
        assert_eq!(spec.cutoff_weight(&[-2.0]), 0.0);
        let mid = spec.cutoff_weight(&[1.5]);
        assert!((mid - 0.5).abs() < 1e-14);
    }

    #[test]
    fn multilinear_reproduces_affine_data() {
        let spec = GraphSpec { resolution: 5, ..GraphSpec::new(1.0, 2) };
        let mut g = GraphFunction::zero(2, 2, &spec);
        for k in 0..g.len() {
            let e = g.node(k);
            g.values[k] = vec![1.0 + 2.0 * e[0] - e[1], e[0] * 0.5];
        }
        let v = g.eval(&[0.33, -0.71]);
        assert!((v[0] - (1.0 + 0.66 + 0.71)).abs() < 1e-14);
        assert!((v[1] - 0.165).abs() < 1e-14);
        let c = g.eval(&[5.0, 0.0]);
        assert!((c[0] - 3.0).abs() < 1e-14);
    }
}
