//! Time integration of `M u' + A u = L(u)` and the time-one distance between
//! the perturbed and limit flows.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::case::EpsCase;
use crate::error::{Error, Result};
use crate::fem::DiscreteOperator;
use crate::linalg::{dense_pencil_eig, max_abs, SymTridiag, TridiagLu};
use crate::model::Nonlinearity;
use crate::nonlinear::{load, load_and_jacobian};

/// Largest dimension accepted by the dense exponential oracle.
pub const ORACLE_LIMIT: usize = 512;
const MAX_HALVINGS: usize = 20;
const NEWTON_STEPS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    ImplicitEuler,
    ImexCn,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    pub dt: f64,
    pub scheme: Scheme,
    /// Newton acceptance: `|du|_inf <= tol (1 + |u|_inf)`.
    pub tol: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            scheme: Scheme::ImplicitEuler,
            tol: 1e-11,
        }
    }
}

impl FlowConfig {
    pub fn with_dt(dt: f64) -> Self {
        Self { dt, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::Precondition(format!("dt must be > 0, got {}", self.dt)));
        }
        Ok(())
    }
}

/// Stepping state shared across calls: factorizations that do not depend on `u`.
pub struct Stepper<'a> {
    op: &'a DiscreteOperator,
    f: &'a Nonlinearity,
    flow: FlowConfig,
    linear: bool,
    /// `M + dt A` (implicit Euler with `f = 0`) or `M + dt/2 A` (imex-cn).
    implicit_lu: Option<TridiagLu>,
    explicit: Option<SymTridiag>,
}

impl<'a> Stepper<'a> {
    pub fn new(op: &'a DiscreteOperator, f: &'a Nonlinearity, flow: FlowConfig) -> Result<Self> {
        flow.validate()?;
        let linear = f.is_zero();
        let (implicit_lu, explicit) = match flow.scheme {
            Scheme::ImexCn => (
                Some(op.mass.combine(1.0, &op.a, 0.5 * flow.dt).lu()?),
                Some(op.mass.combine(1.0, &op.a, -0.5 * flow.dt)),
            ),
            Scheme::ImplicitEuler if linear => (Some(op.mass.combine(1.0, &op.a, flow.dt).lu()?), None),
            Scheme::ImplicitEuler => (None, None),
        };
        Ok(Self {
            op,
            f,
            flow,
            linear,
            implicit_lu,
            explicit,
        })
    }

    /// One step of size `dt` with the configured scheme; `None` if Newton failed.
    fn try_step(&self, u: &[f64], dt: f64, full: bool) -> Result<Option<Vec<f64>>> {
        let op = self.op;
        match self.flow.scheme {
            Scheme::ImexCn => {
                let mut rhs = if full {
                    self.explicit.as_ref().expect("built").matvec(u)
                } else {
                    op.mass.combine(1.0, &op.a, -0.5 * dt).matvec(u)
                };
                if !self.linear {
                    let l = load(op, self.f, u);
                    rhs.iter_mut().zip(&l).for_each(|(r, x)| *r += dt * x);
                }
                let next = if full {
                    self.implicit_lu.as_ref().expect("built").solve(&rhs)
                } else {
                    op.mass.combine(1.0, &op.a, 0.5 * dt).lu()?.solve(&rhs)
                };
                Ok(Some(next))
            }
            Scheme::ImplicitEuler if self.linear => {
                let rhs = op.mass.matvec(u);
                let next = if full {
                    self.implicit_lu.as_ref().expect("built").solve(&rhs)
                } else {
                    op.mass.combine(1.0, &op.a, dt).lu()?.solve(&rhs)
                };
                Ok(Some(next))
            }
            Scheme::ImplicitEuler => {
                let mu = op.mass.matvec(u);
                let base = op.mass.combine(1.0, &op.a, dt);
                let mut v = u.to_vec();
                for _ in 0..NEWTON_STEPS {
                    let (l, w) = load_and_jacobian(op, self.f, &v);
                    let bv = base.matvec(&v);
                    let g: Vec<f64> = (0..v.len()).map(|i| bv[i] - dt * l[i] - mu[i]).collect();
                    let j = base.combine(1.0, &w, -dt);
                    let Ok(lu) = j.lu() else {
                        return Ok(None);
                    };
                    let du = lu.solve(&g);
                    v.iter_mut().zip(&du).for_each(|(a, d)| *a -= d);
                    let size = max_abs(&du);
                    if !size.is_finite() {
                        return Ok(None);
                    }
                    if size <= self.flow.tol * (1.0 + max_abs(&v)) {
                        return Ok(Some(v));
                    }
                }
                Ok(None)
            }
        }
    }

    /// Advance by `dt`, splitting the step on Newton failure.
    fn step(&self, u: &[f64], dt: f64, t: f64) -> Result<Vec<f64>> {
        let full = (dt - self.flow.dt).abs() <= 1e-15 * self.flow.dt;
        if let Some(v) = self.try_step(u, dt, full)? {
            return Ok(v);
        }
        let mut pieces = 2usize;
        for halvings in 1..=MAX_HALVINGS {
            let h = dt / pieces as f64;
            let mut v = u.to_vec();
            let mut ok = true;
            for _ in 0..pieces {
                match self.try_step(&v, h, false)? {
                    Some(next) => v = next,
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                return Ok(v);
            }
            if halvings == MAX_HALVINGS {
                break;
            }
            pieces *= 2;
        }
        Err(Error::Stiffness {
            halvings: MAX_HALVINGS + 1,
            t,
        })
    }

    /// Integrate from `u0` up to `t_end`, calling `observe(t, u)` after every
    /// step; integration stops early when it returns `true`. Returns the final
    /// time and state.
    pub fn integrate<F>(&self, u0: &[f64], t_end: f64, mut observe: F) -> Result<(f64, Vec<f64>)>
    where
        F: FnMut(f64, &[f64]) -> bool,
    {
        self.op.check_dim(u0)?;
        if !(t_end >= 0.0) {
            return Err(Error::Precondition(format!("t must be >= 0, got {t_end}")));
        }
        let dt = self.flow.dt;
        let steps = (t_end / dt - 1e-9).ceil().max(0.0) as usize;
        let mut u = u0.to_vec();
        let mut t = 0.0;
        for k in 0..steps {
            let h = if k + 1 == steps { t_end - t } else { dt };
            u = self.step(&u, h, t)?;
            t = if k + 1 == steps { t_end } else { t + h };
            if observe(t, &u) {
                break;
            }
        }
        Ok((t, u))
    }
}

/// `T(t) u0` by time stepping.
pub fn step_to(op: &DiscreteOperator, f: &Nonlinearity, u0: &[f64], t: f64, flow: FlowConfig) -> Result<Vec<f64>> {
    let stepper = Stepper::new(op, f, flow)?;
    Ok(stepper.integrate(u0, t, |_, _| false)?.1)
}

/// `e^{-t M^{-1} A} u0` by dense generalized eigendecomposition.
pub fn expm_oracle(op: &DiscreteOperator, u0: &[f64], t: f64) -> Result<Vec<f64>> {
    let n = op.ndof();
    if n > ORACLE_LIMIT {
        return Err(Error::OracleGuard { n, limit: ORACLE_LIMIT });
    }
    op.check_dim(u0)?;
    if t == 0.0 {
        return Ok(u0.to_vec());
    }
    let l = op.mass.cholesky()?.to_dense();
    let (values, x) = dense_pencil_eig(&op.a.to_dense(), &l);
    let mu0 = DVector::from_vec(op.mass.matvec(u0));
    let coeffs = x.transpose() * mu0;
    let scaled = DVector::from_iterator(n, coeffs.iter().zip(values.iter()).map(|(c, v)| c * (-v * t).exp()));
    let out: DMatrix<f64> = &x * DMatrix::from_column_slice(n, 1, scaled.as_slice());
    Ok(out.column(0).iter().copied().collect())
}

/// `|T_eps(1) w0 - T_0(1) w0|` in the `A_eps` energy norm for a constrained `w0`.
pub fn time_one_diff(case: &EpsCase, f: &Nonlinearity, w0: &[f64], flow: FlowConfig) -> Result<f64> {
    case.op_lim.check_dim(w0)?;
    let u0 = step_to(&case.op_lim, f, w0, 1.0, flow)?;
    let ue = step_to(&case.op_eps, f, &case.op_lim.embed(w0), 1.0, flow)?;
    Ok(case.cross_distance(&ue, &u0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Coef, ProblemConfig, ProfileKind, ProfileSpec};
    use crate::spectral::eigenpairs;

    fn case(n: usize, f: Nonlinearity) -> (EpsCase, Nonlinearity) {
        let cfg = ProblemConfig {
            lambda: 0.5,
            c: Coef::Const(0.0),
            m0: 0.2,
            x1: 0.3,
            x2: 0.7,
            eps0: 0.15,
            f: f.clone(),
            profile: ProfileSpec {
                kind: ProfileKind::Ramp,
                p0: Coef::Const(1.0),
                alpha: 1.0,
            },
        };
        (EpsCase::new(&cfg, 0.1, n).unwrap(), f)
    }

    fn energy_dist(op: &DiscreteOperator, a: &[f64], b: &[f64]) -> f64 {
        let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        op.energy_norm(&d).unwrap()
    }

    #[test]
    fn modal_decay() {
        let (c, f) = case(256, Nonlinearity::zero());
        let pairs = eigenpairs(&c.op_eps, 3).unwrap();
        let ie = FlowConfig::default();
        let cn = FlowConfig {
            scheme: Scheme::ImexCn,
            ..FlowConfig::default()
        };
        for (k, flow) in [(0, ie), (0, cn), (1, cn)] {
            let p = &pairs[k];
            let u = step_to(&c.op_eps, &f, &p.vector, 1.0, flow).unwrap();
            let exact: Vec<f64> = p.vector.iter().map(|v| v * (-p.value).exp()).collect();
            let rel = energy_dist(&c.op_eps, &u, &exact) / c.op_eps.energy_norm(&exact).unwrap();
            assert!(rel < 1e-2, "k={k} {flow:?}: {rel}");
        }
    }

    #[test]
    fn oracle_identity_and_modes() {
        let (c, _) = case(128, Nonlinearity::zero());
        let u0: Vec<f64> = (0..c.op_eps.ndof()).map(|i| (i as f64 * 0.1).sin()).collect();
        assert_eq!(expm_oracle(&c.op_eps, &u0, 0.0).unwrap(), u0);
        let pairs = eigenpairs(&c.op_eps, 4).unwrap();
        let p = &pairs[3];
        let u = expm_oracle(&c.op_eps, &p.vector, 0.01).unwrap();
        let err = u
            .iter()
            .zip(&p.vector)
            .map(|(a, b)| (a - b * (-p.value * 0.01).exp()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
        let (big, _) = case(1024, Nonlinearity::zero());
        assert!(matches!(
            expm_oracle(&big.op_eps, &vec![0.0; big.op_eps.ndof()], 1.0),
            Err(Error::OracleGuard { .. })
        ));
    }

    #[test]
    fn equilibrium_is_stationary() {
        let (c, f) = case(256, Nonlinearity::cubic(1.0, 1.0, 4.0));
        let eq = crate::equilibria::newton(&c.op_eps, &f, &vec![0.8; c.op_eps.ndof()], 1e-11).unwrap();
        let u = step_to(&c.op_eps, &f, &eq.u, 1.0, FlowConfig::default()).unwrap();
        assert!(max_abs(&crate::linalg::sub(&u, &eq.u)) < 1e-8);
    }

    #[test]
    fn limit_flow_stays_constrained() {
        let (c, f) = case(128, Nonlinearity::cubic(1.0, 1.0, 4.0));
        let w0: Vec<f64> = (0..c.op_lim.ndof()).map(|i| 0.5 * (i as f64 * 0.05).cos()).collect();
        let u = step_to(&c.op_lim, &f, &w0, 0.2, FlowConfig::default()).unwrap();
        let nodal = c.op_lim.embed(&u);
        let v = nodal[c.mesh.index.x1];
        assert!(c.mesh.omega0_nodes().all(|i| nodal[i] == v));
    }

    #[test]
    fn shared_constant_equilibrium_has_zero_time_one_diff() {
        let (c, f) = case(128, Nonlinearity::cubic(1.0, 1.0, 4.0));
        let w0 = vec![0.5f64.sqrt(); c.op_lim.ndof()];
        let d = time_one_diff(&c, &f, &w0, FlowConfig::default()).unwrap();
        assert!(d < 1e-9, "{d}");
    }

    #[test]
    fn rejects_bad_flow() {
        let (c, f) = case(64, Nonlinearity::zero());
        assert!(step_to(&c.op_eps, &f, &vec![0.0; c.op_eps.ndof()], 1.0, FlowConfig::with_dt(0.0)).is_err());
        assert!(step_to(&c.op_eps, &f, &vec![0.0; c.op_eps.ndof()], -1.0, FlowConfig::default()).is_err());
    }
}
