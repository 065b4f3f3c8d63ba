//! Attractor samples built from equilibria and their unstable manifolds, and
//! Hausdorff distances between samples in an energy norm.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fem::DiscreteOperator;
use crate::linalg::{max_abs, pencil_eigenpairs, BidiagCholesky, SymTridiag};
use crate::equilibria::{linearization, Equilibrium};
use crate::model::Nonlinearity;
use crate::semigroup::{FlowConfig, Stepper};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensitySpec {
    /// Points per heteroclinic after arclength resampling.
    pub per_branch: usize,
    /// Launch offset along each unstable eigenvector.
    pub launch: f64,
    /// Arrival radius around the target equilibrium.
    pub arrival: f64,
    pub t_max: f64,
    /// Energy spacing of the raw stored states.
    pub store_spacing: f64,
}

impl Default for DensitySpec {
    fn default() -> Self {
        Self {
            per_branch: 200,
            launch: 1e-4,
            arrival: 1e-5,
            t_max: 200.0,
            store_spacing: 1e-3,
        }
    }
}

/// One trajectory leaving an equilibrium along an unstable direction.
#[derive(Debug, Clone)]
pub struct Branch {
    pub source: usize,
    pub direction: usize,
    pub sign: f64,
    /// Equilibrium reached, if any.
    pub target: Option<usize>,
    pub points: Vec<Vec<f64>>,
    pub times: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Provenance {
    Equilibrium { index: usize },
    Trajectory { source: usize, direction: usize, sign: f64, time: f64 },
}

#[derive(Debug, Clone)]
pub struct AttractorSample {
    pub eps: Option<f64>,
    /// Coefficients in the sampling operator's space.
    pub equilibria: Vec<Vec<f64>>,
    pub branches: Vec<Branch>,
}

impl AttractorSample {
    pub fn points(&self) -> Vec<(&[f64], Provenance)> {
        let mut out: Vec<(&[f64], Provenance)> = self
            .equilibria
            .iter()
            .enumerate()
            .map(|(index, u)| (u.as_slice(), Provenance::Equilibrium { index }))
            .collect();
        for b in &self.branches {
            for (u, &time) in b.points.iter().zip(&b.times) {
                out.push((
                    u.as_slice(),
                    Provenance::Trajectory {
                        source: b.source,
                        direction: b.direction,
                        sign: b.sign,
                        time,
                    },
                ));
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.equilibria.len() + self.branches.iter().map(|b| b.points.len()).sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cloud of nodal vectors; every branch becomes a polyline from its
    /// source equilibrium through its samples to its target.
    pub fn cloud(&self, op: &DiscreteOperator, energy: &EnergyMap) -> Cloud {
        let mut points: Vec<Vec<f64>> = self.equilibria.iter().map(|u| energy.apply(&op.embed(u))).collect();
        let mut segments = Vec::new();
        for b in &self.branches {
            let mut prev = b.source;
            for u in &b.points {
                points.push(energy.apply(&op.embed(u)));
                let cur = points.len() - 1;
                segments.push((prev, cur));
                prev = cur;
            }
            if let Some(t) = b.target {
                segments.push((prev, t));
            }
        }
        Cloud { points, segments }
    }

    pub fn to_csv(&self, op: &DiscreteOperator) -> String {
        let mut s = String::from("kind,source,direction,sign,time,values\n");
        for (u, prov) in self.points() {
            let vals: Vec<String> = op.embed(u).iter().map(|v| format!("{v}")).collect();
            let head = match prov {
                Provenance::Equilibrium { index } => format!("equilibrium,{index},,,"),
                Provenance::Trajectory {
                    source,
                    direction,
                    sign,
                    time,
                } => format!("trajectory,{source},{direction},{sign},{time}"),
            };
            s.push_str(&format!("{head},{}\n", vals.join(" ")));
        }
        s
    }
}

/// `x -> L^T x` for the Cholesky factor of an energy matrix, so energy
/// distances become Euclidean distances.
#[derive(Debug, Clone)]
pub struct EnergyMap {
    chol: BidiagCholesky,
}

impl EnergyMap {
    pub fn new(w: &SymTridiag) -> Result<Self> {
        Ok(Self { chol: w.cholesky()? })
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.chol.upper_mul(x)
    }
}

/// Points in Euclidean coordinates plus the polyline segments joining them.
#[derive(Debug, Clone, Default)]
pub struct Cloud {
    pub points: Vec<Vec<f64>>,
    pub segments: Vec<(usize, usize)>,
}

impl Cloud {
    pub fn from_points(points: Vec<Vec<f64>>) -> Self {
        Self {
            points,
            segments: Vec::new(),
        }
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn segment_dist2(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let mut ab2 = 0.0;
    let mut ap_ab = 0.0;
    for i in 0..p.len() {
        let d = b[i] - a[i];
        ab2 += d * d;
        ap_ab += (p[i] - a[i]) * d;
    }
    let t = if ab2 > 0.0 { (ap_ab / ab2).clamp(0.0, 1.0) } else { 0.0 };
    p.iter()
        .zip(a.iter().zip(b))
        .map(|(x, (u, v))| {
            let q = u + t * (v - u);
            (x - q) * (x - q)
        })
        .sum()
}

/// Directed `sup_{a in A} inf_{b in B} |a - b|`. With `polyline`, `B`'s
/// segments count as part of `B`.
pub fn directed(a: &Cloud, b: &Cloud, polyline: bool) -> f64 {
    a.points
        .par_iter()
        .map(|p| {
            let mut best = b.points.iter().map(|q| dist2(p, q)).fold(f64::INFINITY, f64::min);
            if polyline {
                for &(i, j) in &b.segments {
                    best = best.min(segment_dist2(p, &b.points[i], &b.points[j]));
                }
            }
            best.sqrt()
        })
        .reduce(|| 0.0, f64::max)
}

/// `dist_H(A, B) + dist_H(B, A)` between point sets.
pub fn hausdorff(a: &Cloud, b: &Cloud) -> f64 {
    directed(a, b, false) + directed(b, a, false)
}

/// As `hausdorff`, but each directed term measures distance to the other
/// sample's polylines, removing the sampling-spacing floor.
pub fn hausdorff_polyline(a: &Cloud, b: &Cloud) -> f64 {
    directed(a, b, true) + directed(b, a, true)
}

fn resample(states: &[Vec<f64>], times: &[f64], lengths: &[f64], count: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let total = *lengths.last().unwrap_or(&0.0);
    if states.len() < 2 || total == 0.0 || count == 0 {
        return (states.to_vec(), times.to_vec());
    }
    let mut pts = Vec::with_capacity(count);
    let mut ts = Vec::with_capacity(count);
    let mut k = 0;
    for j in 1..=count {
        let s = total * j as f64 / (count + 1) as f64;
        while k + 2 < lengths.len() && lengths[k + 1] < s {
            k += 1;
        }
        let seg = lengths[k + 1] - lengths[k];
        let w = if seg > 0.0 { ((s - lengths[k]) / seg).clamp(0.0, 1.0) } else { 0.0 };
        pts.push(
            states[k]
                .iter()
                .zip(&states[k + 1])
                .map(|(a, b)| a + w * (b - a))
                .collect(),
        );
        ts.push(times[k] + w * (times[k + 1] - times[k]));
    }
    (pts, ts)
}

/// Unstable eigenvectors of the linearization at `u`.
pub fn unstable_directions(op: &DiscreteOperator, f: &Nonlinearity, eq: &Equilibrium) -> Result<Vec<Vec<f64>>> {
    if eq.morse_index == 0 {
        return Ok(Vec::new());
    }
    let j = linearization(op, f, &eq.u);
    let (_, vecs) = pencil_eigenpairs(&j, &op.mass, eq.morse_index)?;
    Ok(vecs)
}

/// Shoot along every unstable direction of every equilibrium and sample the
/// resulting connecting orbits uniformly in energy arclength.
pub fn sample_attractor(
    op: &DiscreteOperator,
    f: &Nonlinearity,
    equilibria: &[Equilibrium],
    flow: FlowConfig,
    density: &DensitySpec,
) -> Result<AttractorSample> {
    for (index, e) in equilibria.iter().enumerate() {
        if !e.is_hyperbolic() {
            return Err(Error::Hyperbolicity {
                index,
                margin: e.margin,
                mean: e.mean(),
            });
        }
    }
    let bound = 10.0 * f.cutoff_k;
    let energy = |d: &[f64]| op.a.form(d, d).max(0.0).sqrt();
    let stepper = Stepper::new(op, f, flow)?;
    let mut launches = Vec::new();
    for (source, e) in equilibria.iter().enumerate() {
        for (direction, v) in unstable_directions(op, f, e)?.into_iter().enumerate() {
            for sign in [1.0, -1.0] {
                launches.push((source, direction, sign, v.clone()));
            }
        }
    }
    let branches: Vec<Result<Branch>> = launches
        .into_par_iter()
        .map(|(source, direction, sign, v)| {
            let start: Vec<f64> = equilibria[source]
                .u
                .iter()
                .zip(&v)
                .map(|(a, b)| a + sign * density.launch * b)
                .collect();
            let mut states = vec![equilibria[source].u.clone(), start.clone()];
            let mut times = vec![0.0, 0.0];
            let mut lengths = vec![0.0, energy(&crate::linalg::sub(&start, &equilibria[source].u))];
            let mut target = None;
            let mut anomaly = None;
            stepper.integrate(&start, density.t_max, |t, u| {
                let norm = max_abs(u);
                if !norm.is_finite() || norm > bound {
                    anomaly = Some(format!("|u|_inf = {norm:.3e} at t = {t:.3}"));
                    return true;
                }
                let last = states.last().expect("nonempty");
                let step = energy(&crate::linalg::sub(u, last));
                if step >= density.store_spacing {
                    states.push(u.to_vec());
                    times.push(t);
                    lengths.push(lengths.last().unwrap() + step);
                }
                for (k, e) in equilibria.iter().enumerate() {
                    if k != source && energy(&crate::linalg::sub(u, &e.u)) <= density.arrival {
                        target = Some(k);
                        return true;
                    }
                }
                false
            })
            .and_then(|(t, u)| {
                if let Some(msg) = anomaly.take() {
                    return Err(Error::DynamicsAnomaly(msg));
                }
                let last = states.last().expect("nonempty");
                let step = energy(&crate::linalg::sub(&u, last));
                if step > 0.0 {
                    states.push(u.clone());
                    times.push(t);
                    lengths.push(lengths.last().unwrap() + step);
                }
                if let Some(k) = target {
                    let step = energy(&crate::linalg::sub(&equilibria[k].u, &u));
                    states.push(equilibria[k].u.clone());
                    times.push(t);
                    lengths.push(lengths.last().unwrap() + step);
                }
                Ok(())
            })?;
            let (points, times) = resample(&states, &times, &lengths, density.per_branch);
            Ok(Branch {
                source,
                direction,
                sign,
                target,
                points,
                times,
            })
        })
        .collect();
    let branches = branches.into_iter().collect::<Result<Vec<_>>>()?;
    let eps = match op.kind {
        crate::fem::OperatorKind::Perturbed { eps } => Some(eps),
        crate::fem::OperatorKind::Limit => None,
    };
    Ok(AttractorSample {
        eps,
        equilibria: equilibria.iter().map(|e| e.u.clone()).collect(),
        branches,
    })
}
