//! Galerkin load `int f(u_h) phi_i` and its Jacobian `int f'(u_h) phi_i phi_j`.

use crate::fem::{gauss_points, DiscreteOperator};
use crate::linalg::SymTridiag;
use crate::model::Nonlinearity;

/// Nodal load vector and nodal Jacobian of `f` at the nodal function `u`.
pub fn nodal_load(nodes: &[f64], f: &Nonlinearity, u: &[f64], with_jacobian: bool) -> (Vec<f64>, Option<SymTridiag>) {
    let n = nodes.len();
    let mut load = vec![0.0; n];
    let mut jac = with_jacobian.then(|| SymTridiag::zeros(n));
    for e in 0..n - 1 {
        let (a, b) = (nodes[e], nodes[e + 1]);
        let h = b - a;
        let (ua, ub) = (u[e], u[e + 1]);
        for (x, w) in gauss_points(a, b) {
            let t = (x - a) / h;
            let (p0, p1) = (1.0 - t, t);
            let (fv, dv) = f.eval(ua * p0 + ub * p1);
            load[e] += w * fv * p0;
            load[e + 1] += w * fv * p1;
            if let Some(j) = jac.as_mut() {
                let c = w * dv;
                j.diag[e] += c * p0 * p0;
                j.diag[e + 1] += c * p1 * p1;
                j.off[e] += c * p0 * p1;
            }
        }
    }
    (load, jac)
}

/// Load in the operator's own coefficients.
pub fn load(op: &DiscreteOperator, f: &Nonlinearity, u: &[f64]) -> Vec<f64> {
    let nodal = op.embed(u);
    let (l, _) = nodal_load(&op.mesh.nodes, f, &nodal, false);
    op.dofmap.restrict_dual(&l)
}

/// Load and Jacobian in the operator's own coefficients.
pub fn load_and_jacobian(op: &DiscreteOperator, f: &Nonlinearity, u: &[f64]) -> (Vec<f64>, SymTridiag) {
    let nodal = op.embed(u);
    let (l, j) = nodal_load(&op.mesh.nodes, f, &nodal, true);
    let j = j.expect("requested");
    (op.dofmap.restrict_dual(&l), op.dofmap.reduce(&j))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobian_matches_finite_differences() {
        let nodes: Vec<f64> = (0..=20).map(|i| (i as f64 / 20.0).powf(1.3)).collect();
        let f = Nonlinearity::cubic(1.0, 1.0, 4.0);
        let u: Vec<f64> = nodes.iter().map(|x| 2.5 * (4.0 * x).sin()).collect();
        let (_, j) = nodal_load(&nodes, &f, &u, true);
        let j = j.unwrap();
        let dir: Vec<f64> = nodes.iter().map(|x| (7.0 * x).cos()).collect();
        let h = 1e-6;
        let up: Vec<f64> = u.iter().zip(&dir).map(|(a, d)| a + h * d).collect();
        let um: Vec<f64> = u.iter().zip(&dir).map(|(a, d)| a - h * d).collect();
        let (lp, _) = nodal_load(&nodes, &f, &up, false);
        let (lm, _) = nodal_load(&nodes, &f, &um, false);
        let jd = j.matvec(&dir);
        for i in 0..nodes.len() {
            let fd = (lp[i] - lm[i]) / (2.0 * h);
            assert!((fd - jd[i]).abs() < 1e-7, "{i}: {fd} vs {}", jd[i]);
        }
    }
}
