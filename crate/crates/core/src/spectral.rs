//! Generalized eigenpairs of `(A, M)`, gap profiles, eigenvalue distances and
//! spectral projections onto the lowest modes.

use serde::Serialize;

use crate::case::EpsCase;
use crate::error::{Error, Result};
use crate::fem::DiscreteOperator;
use crate::linalg::{dot, pencil_eigenpairs, pencil_eigenvalues, SymTridiag};
use crate::model::DiffusionProfile;

/// Absolute separation below which an eigenvalue is treated as multiple.
pub const SIMPLICITY_GAP: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub index: usize,
    pub value: f64,
    /// `M`-normalized coefficients in the operator's own space.
    pub vector: Vec<f64>,
    pub eps: Option<f64>,
}

fn eps_tag(op: &DiscreteOperator) -> Option<f64> {
    match op.kind {
        crate::fem::OperatorKind::Perturbed { eps } => Some(eps),
        crate::fem::OperatorKind::Limit => None,
    }
}

fn check_count(op: &DiscreteOperator, k: usize) -> Result<()> {
    if k == 0 || k > op.ndof() / 4 {
        return Err(Error::Precondition(format!(
            "requested {k} eigenpairs, accuracy guard allows 1..={}",
            op.ndof() / 4
        )));
    }
    Ok(())
}

/// Lowest `k` eigenvalues only.
pub fn eigenvalues(op: &DiscreteOperator, k: usize) -> Result<Vec<f64>> {
    check_count(op, k)?;
    Ok(pencil_eigenvalues(&op.a, &op.mass, k))
}

/// Lowest `k` eigenpairs, ascending, `M`-orthonormal.
pub fn eigenpairs(op: &DiscreteOperator, k: usize) -> Result<Vec<Eigenpair>> {
    check_count(op, k)?;
    let (values, vectors) = pencil_eigenpairs(&op.a, &op.mass, k)?;
    let eps = eps_tag(op);
    let pairs: Vec<Eigenpair> = values
        .into_iter()
        .zip(vectors)
        .enumerate()
        .map(|(index, (value, vector))| Eigenpair {
            index,
            value,
            vector,
            eps,
        })
        .collect();
    let worst = orthonormality_defect(&op.mass, &pairs);
    if worst > 1e-10 {
        return Err(Error::Numerical {
            message: format!("eigenvectors lost M-orthonormality ({worst:.3e})"),
            iterations: 0,
        });
    }
    Ok(pairs)
}

/// Largest deviation of `phi_i^T M phi_j` from the identity.
pub fn orthonormality_defect(mass: &SymTridiag, pairs: &[Eigenpair]) -> f64 {
    let mv: Vec<Vec<f64>> = pairs.iter().map(|p| mass.matvec(&p.vector)).collect();
    let mut worst = 0.0_f64;
    for (i, p) in pairs.iter().enumerate() {
        for (j, q) in mv.iter().enumerate().skip(i) {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot(&p.vector, q) - target).abs());
        }
    }
    worst
}

/// `l = int_0^1 p^{-1/2}` by composite Simpson on `points` intervals. For the
/// limit problem only `Omega_1` contributes.
pub fn liouville_length(profile: &DiffusionProfile, limit: bool, points: usize) -> f64 {
    let simpson = |a: f64, b: f64, n: usize, g: &dyn Fn(f64) -> f64| -> f64 {
        let n = n.max(2) & !1;
        let h = (b - a) / n as f64;
        let mut s = g(a) + g(b);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * g(a + i as f64 * h);
        }
        s * h / 3.0
    };
    if limit {
        let (x1, x2) = (profile.x1, profile.x2);
        let na = ((points as f64) * x1 / (x1 + 1.0 - x2)) as usize;
        let g = |x: f64| profile.p0_at(x).powf(-0.5);
        simpson(0.0, x1, na, &g) + simpson(x2, 1.0, points - na, &g)
    } else {
        simpson(0.0, 1.0, points, &|x| profile.eval(x).powf(-0.5))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GapRow {
    pub i: usize,
    pub gap: f64,
    pub model_ratio: f64,
}

/// Gaps `lambda_{i+1} - lambda_i` for `i < k` and their ratios to
/// `(2i + 1) pi^2 / l^2`.
pub fn gap_profile(op: &DiscreteOperator, l: f64, k: usize) -> Result<Vec<GapRow>> {
    if k < 5 {
        return Err(Error::Precondition(format!("gap profile needs k >= 5, got {k}")));
    }
    let lam = eigenvalues(op, k + 1)?;
    let pi2 = std::f64::consts::PI.powi(2);
    Ok((0..k)
        .map(|i| {
            let gap = lam[i + 1] - lam[i];
            let model = (2 * i + 1) as f64 * pi2 / (l * l);
            GapRow {
                i,
                gap,
                model_ratio: gap / model,
            }
        })
        .collect())
}

fn check_simple(lam: &[f64], i: usize) -> Result<()> {
    let mut gap = f64::INFINITY;
    if i > 0 {
        gap = gap.min(lam[i] - lam[i - 1]);
    }
    if i + 1 < lam.len() {
        gap = gap.min(lam[i + 1] - lam[i]);
    }
    if gap <= SIMPLICITY_GAP {
        return Err(Error::AmbiguousEigenvalue { index: i, gap });
    }
    Ok(())
}

/// `|lambda_i(a) - lambda_i(b)|` matched by sorted index.
pub fn eigenvalue_diff_ops(a: &DiscreteOperator, b: &DiscreteOperator, i: usize) -> Result<f64> {
    let la = eigenvalues(a, i + 2)?;
    let lb = eigenvalues(b, i + 2)?;
    check_simple(&la, i)?;
    check_simple(&lb, i)?;
    Ok((la[i] - lb[i]).abs())
}

pub fn eigenvalue_diff(case: &EpsCase, i: usize) -> Result<f64> {
    eigenvalue_diff_ops(&case.op_eps, &case.op_lim, i)
}

/// `M`-orthogonal projection onto the span of the lowest `m` eigenvectors.
#[derive(Debug, Clone)]
pub struct Projection {
    pub m: usize,
    pub basis: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    /// `lambda_m`, the first eigenvalue beyond the cut.
    pub next_value: f64,
    mass: SymTridiag,
}

impl Projection {
    /// Coordinates `phi_j^T M v`.
    pub fn coords(&self, v: &[f64]) -> Vec<f64> {
        let mv = self.mass.matvec(v);
        self.basis.iter().map(|b| dot(b, &mv)).collect()
    }

    pub fn from_coords(&self, eta: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.mass.dim()];
        for (b, &c) in self.basis.iter().zip(eta) {
            out.iter_mut().zip(b).for_each(|(o, x)| *o += c * x);
        }
        out
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.from_coords(&self.coords(v))
    }

    pub fn apply_complement(&self, v: &[f64]) -> Vec<f64> {
        let q = self.apply(v);
        v.iter().zip(&q).map(|(a, b)| a - b).collect()
    }

    pub fn mass(&self) -> &SymTridiag {
        &self.mass
    }
}

pub fn spectral_projection(op: &DiscreteOperator, m: usize) -> Result<Projection> {
    let pairs = eigenpairs(op, m + 1)?;
    let values: Vec<f64> = pairs.iter().map(|p| p.value).collect();
    if m == 0 || values[m - 1] >= values[m] - 1e-8 {
        let lo = m.saturating_sub(1);
        let gaps = values.windows(2).skip(lo.saturating_sub(2)).map(|w| w[1] - w[0]).collect();
        return Err(Error::CutSelection { m, gaps });
    }
    Ok(Projection {
        m,
        next_value: values[m],
        values: values[..m].to_vec(),
        basis: pairs.into_iter().take(m).map(|p| p.vector).collect(),
        mass: op.mass.clone(),
    })
}

/// Sine of the largest principal angle (in `L^2`) between two `M`-orthonormal
/// bases given as full-space nodal vectors.
pub fn max_subspace_sine(mass: &SymTridiag, a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let m = a.len();
    let mb: Vec<Vec<f64>> = b.iter().map(|v| mass.matvec(v)).collect();
    let c = nalgebra::DMatrix::from_fn(m, b.len(), |i, j| dot(&a[i], &mb[j]));
    let smin = c.singular_values().iter().copied().fold(f64::INFINITY, f64::min);
    (1.0 - smin.min(1.0).powi(2)).max(0.0).sqrt()
}

/// `|(Q_eps - Q_0) v|` in the energy norm of `A_eps` for a nodal `v`.
pub fn projection_diff(case: &EpsCase, q_eps: &Projection, q_lim: &Projection, v: &[f64]) -> f64 {
    let qe = q_eps.apply(v);
    let mv = case.op_eps.mass.matvec(v);
    let mut q0 = vec![0.0; v.len()];
    for b in &q_lim.basis {
        let be = case.op_lim.embed(b);
        let c = dot(&be, &mv);
        q0.iter_mut().zip(&be).for_each(|(o, x)| *o += c * x);
    }
    let d: Vec<f64> = qe.iter().zip(&q0).map(|(a, b)| a - b).collect();
    case.op_eps.a.form(&d, &d).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Coef, Nonlinearity, ProblemConfig, ProfileKind, ProfileSpec};

    fn const_case(p: f64, lambda: f64, n: usize) -> EpsCase {
        let cfg = ProblemConfig {
            lambda,
            c: Coef::Const(0.0),
            m0: 0.5 * lambda,
            x1: 0.3,
            x2: 0.7,
            eps0: 0.15,
            f: Nonlinearity::zero(),
            profile: ProfileSpec {
                kind: ProfileKind::CustomTable {
                    table: vec![(0.0, p), (1.0, p)],
                },
                p0: Coef::Const(p),
                alpha: 1.0,
            },
        };
        EpsCase::new(&cfg, 0.1, n).unwrap()
    }

    #[test]
    fn neumann_spectrum() {
        let case = const_case(1.0, 1.0, 1024);
        let pairs = eigenpairs(&case.op_eps, 10).unwrap();
        let pi2 = std::f64::consts::PI.powi(2);
        for (k, p) in pairs.iter().enumerate() {
            let exact = 1.0 + (k * k) as f64 * pi2;
            assert!((p.value - exact).abs() / exact < 5e-3, "k={k}");
        }
        // phi_1 ~ cos(pi x), sign fixed positive at x = 0
        let phi = &pairs[1].vector;
        let cos = case.mesh.interpolate(|x| (std::f64::consts::PI * x).cos() * 2f64.sqrt());
        let err = phi.iter().zip(&cos).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-3, "{err}");
    }

    #[test]
    fn scaled_diffusion_matches_liouville_length() {
        let case = const_case(4.0, 1e-9, 1024);
        let l = liouville_length(&case.profile, false, 10_000);
        assert!((l - 0.5).abs() < 1e-12);
        let lam = eigenvalues(&case.op_eps, 6).unwrap();
        let pi2 = std::f64::consts::PI.powi(2);
        for (k, v) in lam.iter().enumerate().skip(1) {
            let model = (k * k) as f64 * pi2 / (l * l);
            assert!((v - model).abs() / model < 5e-3);
        }
    }

    #[test]
    fn flat_gap_profile() {
        let case = const_case(1.0, 1e-9, 2048);
        let rows = gap_profile(&case.op_eps, 1.0, 10).unwrap();
        for r in &rows {
            assert!((r.model_ratio - 1.0).abs() < 5e-3, "{r:?}");
        }
        assert!(gap_profile(&case.op_eps, 1.0, 4).is_err());
    }

    #[test]
    fn identical_operators_zero_diff() {
        let case = const_case(1.0, 1.0, 256);
        assert_eq!(eigenvalue_diff_ops(&case.op_eps, &case.op_eps, 2).unwrap(), 0.0);
    }

    #[test]
    fn projection_is_idempotent() {
        let case = const_case(1.0, 1.0, 256);
        let q = spectral_projection(&case.op_eps, 3).unwrap();
        let v: Vec<f64> = (0..case.op_eps.ndof()).map(|i| (i as f64 * 0.37).sin()).collect();
        let qv = q.apply(&v);
        let qqv = q.apply(&qv);
        assert!(qv.iter().zip(&qqv).all(|(a, b)| (a - b).abs() < 1e-10));
        let q1 = spectral_projection(&case.op_eps, 1).unwrap();
        let c = q1.basis[0][0];
        assert!(q1.basis[0].iter().all(|v| (v - c).abs() < 1e-9));
        assert!(matches!(spectral_projection(&case.op_eps, 0), Err(Error::CutSelection { .. })));
    }

    #[test]
    fn guard_on_k() {
        let case = const_case(1.0, 1.0, 64);
        assert!(eigenpairs(&case.op_eps, case.op_eps.ndof()).is_err());
    }
}
