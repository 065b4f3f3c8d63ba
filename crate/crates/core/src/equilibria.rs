//! Stationary solutions of `A u = f(u)`: Newton's method, enumeration of the
//! limit equilibria, continuation into the perturbed problem and hyperbolicity.

use serde::Serialize;

use crate::case::EpsCase;
use crate::error::{Error, Result};
use crate::fem::{DiscreteOperator, OperatorKind};
use crate::linalg::{pencil_count_below, pencil_eigenvalues, SymTridiag};
use crate::model::Nonlinearity;
use crate::nonlinear::{load, load_and_jacobian};
use crate::spectral::eigenpairs;

/// Declared hyperbolicity margin.
pub const DELTA_HYP: f64 = 1e-3;
/// Number of constant seeds spread over `[-K, K]`.
pub const SEED_CONSTANTS: usize = 17;
pub const MAX_NEWTON: usize = 50;

#[derive(Debug, Clone)]
pub struct Equilibrium {
    /// Coefficients in the operator's own space.
    pub u: Vec<f64>,
    pub eps: Option<f64>,
    pub morse_index: usize,
    /// Leading eigenvalues of the linearization `A - f'(u)`.
    pub spectrum_head: Vec<f64>,
    pub margin: f64,
    pub residual: f64,
}

/// JSON record of an equilibrium with nodal values.
#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumRecord {
    pub eps: Option<f64>,
    pub values: Vec<f64>,
    pub morse_index: usize,
    pub margin: f64,
    pub residual: f64,
}

impl Equilibrium {
    pub fn record(&self, op: &DiscreteOperator) -> EquilibriumRecord {
        EquilibriumRecord {
            eps: self.eps,
            values: op.embed(&self.u),
            morse_index: self.morse_index,
            margin: self.margin,
            residual: self.residual,
        }
    }

    pub fn is_hyperbolic(&self) -> bool {
        self.margin > DELTA_HYP
    }

    /// Mean nodal value, used to order and name equilibria.
    pub fn mean(&self) -> f64 {
        self.u.iter().sum::<f64>() / self.u.len() as f64
    }
}

/// Residual `A u - L(u)` measured in the dual energy norm `(r^T A^{-1} r)^{1/2}`.
pub fn residual_norm(op: &DiscreteOperator, f: &Nonlinearity, u: &[f64]) -> Result<f64> {
    let r = residual_vector(op, f, u);
    let z = op.a.lu()?.solve(&r);
    Ok(crate::linalg::dot(&r, &z).max(0.0).sqrt())
}

fn residual_vector(op: &DiscreteOperator, f: &Nonlinearity, u: &[f64]) -> Vec<f64> {
    let au = op.a.matvec(u);
    let l = load(op, f, u);
    au.iter().zip(&l).map(|(a, b)| a - b).collect()
}

#[derive(Debug, Clone)]
pub struct Hyperbolicity {
    pub head: Vec<f64>,
    pub margin: f64,
    pub morse_index: usize,
}

/// Leading spectrum of the linearization at `u` and its distance from zero.
pub fn hyperbolicity(op: &DiscreteOperator, f: &Nonlinearity, u: &[f64]) -> Hyperbolicity {
    let (_, w) = load_and_jacobian(op, f, u);
    let j = op.a.combine(1.0, &w, -1.0);
    let morse_index = pencil_count_below(&j, &op.mass, 0.0);
    let count = (morse_index + 2).max(6).min(op.ndof());
    let head = pencil_eigenvalues(&j, &op.mass, count);
    let margin = head.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    Hyperbolicity {
        head: head.into_iter().take(count).collect(),
        margin,
        morse_index,
    }
}

/// Linearization `A - f'(u)` as a tridiagonal matrix.
pub fn linearization(op: &DiscreteOperator, f: &Nonlinearity, u: &[f64]) -> SymTridiag {
    let (_, w) = load_and_jacobian(op, f, u);
    op.a.combine(1.0, &w, -1.0)
}

/// Damped Newton iteration on `A u - L(u) = 0` with the exact Jacobian.
pub fn newton(op: &DiscreteOperator, f: &Nonlinearity, u_init: &[f64], tol: f64) -> Result<Equilibrium> {
    op.check_dim(u_init)?;
    if !(tol >= 1e-12) {
        return Err(Error::Precondition(format!("newton tolerance must be >= 1e-12, got {tol}")));
    }
    let a_lu = op.a.lu()?;
    let dual = |r: &[f64]| crate::linalg::dot(r, &a_lu.solve(r)).max(0.0).sqrt();
    let mut u = u_init.to_vec();
    let mut r = residual_vector(op, f, &u);
    let mut res = dual(&r);
    for it in 0..=MAX_NEWTON {
        if res <= tol {
            let h = hyperbolicity(op, f, &u);
            let eps = match op.kind {
                OperatorKind::Perturbed { eps } => Some(eps),
                OperatorKind::Limit => None,
            };
            return Ok(Equilibrium {
                u,
                eps,
                morse_index: h.morse_index,
                spectrum_head: h.head,
                margin: h.margin,
                residual: res,
            });
        }
        if it == MAX_NEWTON {
            break;
        }
        let j = linearization(op, f, &u);
        let du = match j.lu() {
            Ok(lu) => lu.solve(&r),
            Err(_) => {
                return Err(Error::NonConvergence {
                    iterations: it,
                    residual: res,
                    last_iterate: u,
                })
            }
        };
        let mut step = 1.0;
        loop {
            let trial: Vec<f64> = u.iter().zip(&du).map(|(a, d)| a - step * d).collect();
            let rt = residual_vector(op, f, &trial);
            let rest = dual(&rt);
            if rest < res || step < 1e-4 {
                u = trial;
                r = rt;
                res = rest;
                break;
            }
            step *= 0.5;
        }
    }
    Err(Error::NonConvergence {
        iterations: MAX_NEWTON,
        residual: res,
        last_iterate: u,
    })
}

/// Default Newton tolerance for equilibria.
pub const NEWTON_TOL: f64 = 1e-10;

/// All equilibria reachable from constant seeds on `[-K, K]` and their
/// `+-0.1 phi_1` perturbations, deduplicated at energy distance `1e-6`,
/// sorted by mean value.
pub fn find_all(op: &DiscreteOperator, f: &Nonlinearity) -> Result<Vec<Equilibrium>> {
    let k = f.cutoff_k;
    let phi1 = eigenpairs(op, 2)?.swap_remove(1).vector;
    let mut seeds = Vec::new();
    for i in 0..SEED_CONSTANTS {
        let c = -k + 2.0 * k * i as f64 / (SEED_CONSTANTS - 1) as f64;
        let base = vec![c; op.ndof()];
        seeds.push(base.clone());
        for s in [0.1, -0.1] {
            seeds.push(base.iter().zip(&phi1).map(|(b, p)| b + s * p).collect());
        }
    }
    let mut found: Vec<Equilibrium> = Vec::new();
    for seed in seeds {
        let Ok(eq) = newton(op, f, &seed, NEWTON_TOL) else {
            continue;
        };
        let dup = found.iter().any(|g| {
            let d: Vec<f64> = g.u.iter().zip(&eq.u).map(|(a, b)| a - b).collect();
            op.a.form(&d, &d).sqrt() <= 1e-6
        });
        if !dup {
            found.push(eq);
        }
    }
    found.sort_by(|a, b| a.mean().total_cmp(&b.mean()));
    Ok(found)
}

/// `find_all` on the limit operator, failing if a member is not hyperbolic.
pub fn find_all_limit(op_lim: &DiscreteOperator, f: &Nonlinearity) -> Result<Vec<Equilibrium>> {
    let set = find_all(op_lim, f)?;
    for (index, e) in set.iter().enumerate() {
        if !e.is_hyperbolic() {
            return Err(Error::Hyperbolicity {
                index,
                margin: e.margin,
                mean: e.mean(),
            });
        }
    }
    Ok(set)
}

/// Half the smallest pairwise energy distance within a set.
pub fn uniqueness_radius(op: &DiscreteOperator, set: &[Equilibrium]) -> f64 {
    let mut best = f64::INFINITY;
    for (i, a) in set.iter().enumerate() {
        for b in &set[i + 1..] {
            let d: Vec<f64> = a.u.iter().zip(&b.u).map(|(x, y)| x - y).collect();
            best = best.min(op.a.form(&d, &d).sqrt());
        }
    }
    0.5 * best
}

/// Newton on `A_eps` from the embedded limit equilibrium; the result must
/// stay within `delta` of the start.
pub fn continue_to_eps(case: &EpsCase, f: &Nonlinearity, eq0: &Equilibrium, delta: f64) -> Result<Equilibrium> {
    if !eq0.is_hyperbolic() {
        return Err(Error::Precondition(format!(
            "start equilibrium is not hyperbolic (margin {:.3e})",
            eq0.margin
        )));
    }
    let start = case.op_lim.embed(&eq0.u);
    let eq = newton(&case.op_eps, f, &start, NEWTON_TOL)?;
    let distance = case.cross_distance(&eq.u, &eq0.u);
    if distance > delta {
        return Err(Error::UniquenessViolation { distance, delta });
    }
    Ok(eq)
}
