//! Elliptic solves with `A_eps` and `A_0`, and the distances between the two
//! solution operators in the energy norm.

use std::f64::consts::PI;

use crate::case::{EpsCase, Embedding};
use crate::error::{Error, Result};
use crate::fem::{DiscreteOperator, OperatorKind};
use crate::linalg::{lanczos_largest, max_abs, SymTridiag};

/// Admissible relative algebraic residual of a solve.
pub const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct EllipticSolution {
    /// Coefficients in the operator's own space.
    pub u: Vec<f64>,
    pub residual: f64,
    pub kind: OperatorKind,
}

fn relative_residual(a: &SymTridiag, u: &[f64], b: &[f64]) -> f64 {
    let au = a.matvec(u);
    let r: f64 = au.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let scale = a.inf_norm() * max_abs(u) + max_abs(b);
    if scale == 0.0 {
        0.0
    } else {
        r / scale
    }
}

/// Solve `a u = b` by tridiagonal LU with one step of iterative refinement.
pub fn solve_matrix(a: &SymTridiag, b: &[f64]) -> Result<(Vec<f64>, f64)> {
    let lu = a.lu()?;
    let mut u = lu.solve(b);
    let mut res = relative_residual(a, &u, b);
    if res > RESIDUAL_TOL * 1e-2 {
        let au = a.matvec(&u);
        let r: Vec<f64> = b.iter().zip(&au).map(|(x, y)| x - y).collect();
        let du = lu.solve(&r);
        u.iter_mut().zip(&du).for_each(|(x, d)| *x += d);
        res = relative_residual(a, &u, b);
    }
    if !(res <= RESIDUAL_TOL) {
        return Err(Error::Singular(format!("relative residual {res:.3e} after refinement")));
    }
    Ok((u, res))
}

/// Solve `(mu M + A) u = load` for a load already in the operator's test space.
pub fn solve_shifted_load(op: &DiscreteOperator, mu: f64, load: &[f64]) -> Result<EllipticSolution> {
    op.check_dim(load)?;
    let a = if mu == 0.0 { op.a.clone() } else { op.a.combine(1.0, &op.mass, mu) };
    let (u, residual) = solve_matrix(&a, load)?;
    Ok(EllipticSolution {
        u,
        residual,
        kind: op.kind,
    })
}

pub fn solve_load(op: &DiscreteOperator, load: &[f64]) -> Result<EllipticSolution> {
    solve_shifted_load(op, 0.0, load)
}

/// Galerkin solution of `A u = g` for a nodal right-hand side; for the limit
/// operator the load is tested against the constrained space only.
pub fn solve(op: &DiscreteOperator, g: &[f64]) -> Result<EllipticSolution> {
    if g.len() != op.mesh.n_nodes() {
        return Err(Error::Dimension {
            expected: op.mesh.n_nodes(),
            got: g.len(),
        });
    }
    solve_load(op, &op.load_from_nodal(g))
}

fn check_limit_load(case: &EpsCase, g: &[f64]) -> Result<()> {
    if g.len() != case.mesh.n_nodes() {
        return Err(Error::Dimension {
            expected: case.mesh.n_nodes(),
            got: g.len(),
        });
    }
    case.op_lim.dofmap.restrict_values(g, 1e-12)?;
    let l2 = crate::fem::nodal_mass(&case.mesh).form(g, g).sqrt();
    if l2 > 1.0 + 1e-12 {
        return Err(Error::Precondition(format!("load has L2 norm {l2:.6} > 1")));
    }
    Ok(())
}

/// `|u^eps - u^0|` in the energy norm of `A_eps`, for a nodal load constant on `[x1, x2]`.
pub fn solution_diff(case: &EpsCase, g: &[f64]) -> Result<f64> {
    check_limit_load(case, g)?;
    let ue = solve(&case.op_eps, g)?;
    let u0 = solve(&case.op_lim, g)?;
    Ok(case.cross_distance(&ue.u, &u0.u))
}

/// Norm of `(mu + A_a)^{-1} - (mu + A_b)^{-1}` from the `L^2` ball of `b`'s
/// space into the energy space of `a` (`A_a` itself, without shift).
///
/// The square is the largest eigenvalue of `D^T A_a D` against the mass of
/// `b`, where `D g = (mu M_a + A_a)^{-1} M_a P g - P (mu M_b + A_b)^{-1} M_b g`
/// and `P` embeds `b`'s space into `a`'s.
pub fn op_diff_norm(op_a: &DiscreteOperator, op_b: &DiscreteOperator, mu: f64) -> Result<f64> {
    if !(mu >= 0.0) {
        return Err(Error::Precondition(format!("shift mu must be >= 0, got {mu}")));
    }
    let emb = Embedding::new(op_b, op_a)?;
    let shifted = |op: &DiscreteOperator| if mu == 0.0 { op.a.clone() } else { op.a.combine(1.0, &op.mass, mu) };
    let (sa, sb) = (shifted(op_a), shifted(op_b));
    let (lu_a, lu_b) = (sa.lu()?, sb.lu()?);
    let apply_d = |g: &[f64]| -> Vec<f64> {
        let pg = emb.apply(g);
        let ua = lu_a.solve(&op_a.mass.matvec(&pg));
        let ub = emb.apply(&lu_b.solve(&op_b.mass.matvec(g)));
        ua.iter().zip(&ub).map(|(x, y)| x - y).collect()
    };
    // D^T y = P^T M_a (mu M_a + A_a)^{-1} y - M_b (mu M_b + A_b)^{-1} P^T y
    let apply_dt = |y: &[f64]| -> Vec<f64> {
        let t1 = emb.apply_t(&op_a.mass.matvec(&lu_a.solve(y)));
        let t2 = op_b.mass.matvec(&lu_b.solve(&emb.apply_t(y)));
        t1.iter().zip(&t2).map(|(x, y)| x - y).collect()
    };
    let (value, _) = lanczos_largest(
        &op_b.mass,
        |g| apply_dt(&op_a.a.matvec(&apply_d(g))),
        400,
        1e-12,
    )?;
    Ok(value.sqrt())
}

/// Operator distance `|A_eps^{-1} - A_0^{-1}|` from constrained `L^2` into the energy space.
pub fn solution_op_diff_norm(case: &EpsCase) -> Result<f64> {
    op_diff_norm(&case.op_eps, &case.op_lim, 0.0)
}

pub fn shifted_diff_norm(case: &EpsCase, mu: f64) -> Result<f64> {
    op_diff_norm(&case.op_eps, &case.op_lim, mu)
}

/// Nodal function equal to `g` off `[x1, x2]` and to its mean on `[x1, x2]`,
/// scaled to unit `L^2` norm.
pub fn projected_load(case: &EpsCase, g: impl Fn(f64) -> f64) -> Vec<f64> {
    let mesh = &case.mesh;
    let ix = mesh.index;
    let mean: f64 = (ix.x1..ix.x2)
        .flat_map(|e| crate::fem::gauss_points(mesh.nodes[e], mesh.nodes[e + 1]))
        .map(|(x, w)| w * g(x))
        .sum::<f64>()
        / (mesh.x2 - mesh.x1);
    let mut v = mesh.interpolate(&g);
    for x in &mut v[ix.x1..=ix.x2] {
        *x = mean;
    }
    let l2 = crate::fem::nodal_mass(mesh).form(&v, &v).sqrt();
    if l2 > 0.0 {
        v.iter_mut().for_each(|x| *x /= l2);
    }
    v
}

/// Fixed deterministic test loads: the normalized constant and projected
/// cosines `cos(k pi x)`, `k = 1, 2, 3`.
pub fn standard_loads(case: &EpsCase) -> Vec<(String, Vec<f64>)> {
    let mut out = vec![("const".to_string(), projected_load(case, |_| 1.0))];
    for k in 1..=3 {
        let kf = k as f64;
        out.push((format!("cos{k}"), projected_load(case, move |x| (kf * PI * x).cos())));
    }
    out
}

/// Load used for the headline solution-distance sweep.
pub fn rate_load(case: &EpsCase) -> Vec<f64> {
    projected_load(case, |x| (PI * x).cos() + 0.5 * (2.0 * PI * x).cos())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Coef, Nonlinearity, ProblemConfig, ProfileKind, ProfileSpec};

    pub(crate) fn config(c: Coef) -> ProblemConfig {
        ProblemConfig {
            lambda: 1.0,
            c,
            m0: 0.5,
            x1: 0.3,
            x2: 0.7,
            eps0: 0.15,
            f: Nonlinearity::zero(),
            profile: ProfileSpec {
                kind: ProfileKind::Ramp,
                p0: Coef::Const(1.0),
                alpha: 1.0,
            },
        }
    }

    #[test]
    fn constants_solve_constant_load() {
        let cfg = config(Coef::Const(0.5));
        let case = EpsCase::new(&cfg, 0.05, 64).unwrap();
        for op in [&case.op_eps, &case.op_lim] {
            let g = vec![1.5; case.mesh.n_nodes()];
            let s = solve(op, &g).unwrap();
            assert!(s.u.iter().all(|v| (v - 1.0).abs() < 1e-12));
            assert!(s.residual <= RESIDUAL_TOL);
            let z = solve(op, &vec![0.0; case.mesh.n_nodes()]).unwrap();
            assert!(z.u.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn constant_load_gives_zero_difference() {
        let cfg = config(Coef::Const(0.5));
        let case = EpsCase::new(&cfg, 0.05, 64).unwrap();
        let g = projected_load(&case, |_| 1.0);
        assert!(solution_diff(&case, &g).unwrap() < 1e-12);
    }

    #[test]
    fn rejects_nonconstant_load() {
        let cfg = config(Coef::Const(0.0));
        let case = EpsCase::new(&cfg, 0.05, 64).unwrap();
        let g: Vec<f64> = case.mesh.nodes.iter().map(|x| 0.5 * x).collect();
        assert!(matches!(solution_diff(&case, &g), Err(Error::Precondition(_))));
    }

    #[test]
    fn identical_operators_have_zero_distance() {
        let cfg = config(Coef::Poly(vec![0.0, 1.0]));
        let case = EpsCase::new(&cfg, 0.05, 64).unwrap();
        for mu in [0.0, 1.0, 10.0] {
            assert_eq!(op_diff_norm(&case.op_lim, &case.op_lim, mu).unwrap(), 0.0);
            assert_eq!(op_diff_norm(&case.op_eps, &case.op_eps, mu).unwrap(), 0.0);
        }
        assert!(op_diff_norm(&case.op_eps, &case.op_lim, -1.0).is_err());
    }

    #[test]
    fn operator_norm_dominates_samples() {
        let cfg = config(Coef::Poly(vec![0.0, 1.0]));
        let case = EpsCase::new(&cfg, 0.05, 128).unwrap();
        let norm = solution_op_diff_norm(&case).unwrap();
        assert_eq!(norm, shifted_diff_norm(&case, 0.0).unwrap());
        for (_, g) in standard_loads(&case) {
            assert!(solution_diff(&case, &g).unwrap() <= norm * (1.0 + 1e-10));
        }
    }

    #[test]
    fn solve_is_linear() {
        let cfg = config(Coef::Poly(vec![0.0, 1.0]));
        let case = EpsCase::new(&cfg, 0.05, 128).unwrap();
        let g1 = case.mesh.interpolate(|x| (3.0 * x).sin());
        let g2 = case.mesh.interpolate(|x| x * x);
        let mix: Vec<f64> = g1.iter().zip(&g2).map(|(a, b)| 2.0 * a - 0.5 * b).collect();
        let (u1, u2, um) = (
            solve(&case.op_eps, &g1).unwrap().u,
            solve(&case.op_eps, &g2).unwrap().u,
            solve(&case.op_eps, &mix).unwrap().u,
        );
        for i in 0..um.len() {
            assert!((um[i] - (2.0 * u1[i] - 0.5 * u2[i])).abs() < 1e-10);
        }
    }
}
