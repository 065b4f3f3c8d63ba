//! One point of an `eps` sweep: profile, shared mesh and both operators.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::{assemble, build_mesh, DofMap, Mesh, OperatorKind, DiscreteOperator};
use crate::model::{configured_profile, p_dist, DiffusionProfile, ProblemConfig, Tau};

#[derive(Debug, Clone)]
pub struct EpsCase {
    pub eps: f64,
    pub profile: DiffusionProfile,
    pub mesh: Arc<Mesh>,
    pub op_eps: DiscreteOperator,
    pub op_lim: DiscreteOperator,
    pub p_dist: f64,
    pub tau: Tau,
}

impl EpsCase {
    pub fn new(config: &ProblemConfig, eps: f64, n: usize) -> Result<Self> {
        let profile = configured_profile(config, eps)?;
        Self::with_profile(config, profile, n)
    }

    pub fn with_profile(config: &ProblemConfig, profile: DiffusionProfile, n: usize) -> Result<Self> {
        let mesh = Arc::new(build_mesh(config, &profile, n)?);
        let op_eps = assemble(&mesh, config, &profile, OperatorKind::Perturbed { eps: profile.eps })?;
        let op_lim = assemble(&mesh, config, &profile, OperatorKind::Limit)?;
        let p_dist = p_dist(&profile);
        Ok(Self {
            eps: profile.eps,
            tau: Tau::from_parts(p_dist, profile.eps),
            profile,
            mesh,
            op_eps,
            op_lim,
            p_dist,
        })
    }

    pub fn mesh_n(&self) -> usize {
        self.mesh.n_background
    }

    /// Energy-norm distance between a perturbed and an embedded limit function.
    pub fn cross_distance(&self, u_eps: &[f64], u_lim: &[f64]) -> f64 {
        let d: Vec<f64> = self
            .op_lim
            .embed(u_lim)
            .iter()
            .zip(u_eps)
            .map(|(b, a)| a - b)
            .collect();
        self.op_eps.a.form(&d, &d).max(0.0).sqrt()
    }
}

/// Inclusion of one discrete space into a larger one on the same mesh.
#[derive(Debug, Clone)]
pub struct Embedding {
    from: DofMap,
    to: DofMap,
}

impl Embedding {
    pub fn new(from: &DiscreteOperator, to: &DiscreteOperator) -> Result<Self> {
        if !Arc::ptr_eq(&from.mesh, &to.mesh) && *from.mesh != *to.mesh {
            return Err(Error::Precondition("operators live on different meshes".into()));
        }
        let ok = match (from.dofmap, to.dofmap) {
            (_, DofMap::Full { .. }) => true,
            (DofMap::Constrained { first: a, last: b, .. }, DofMap::Constrained { first: c, last: d, .. }) => {
                a <= c && d <= b
            }
            _ => false,
        };
        if !ok {
            return Err(Error::Precondition("source space is not contained in the target space".into()));
        }
        Ok(Self {
            from: from.dofmap,
            to: to.dofmap,
        })
    }

    pub fn apply(&self, c: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.to.ndof()];
        for i in 0..self.to.n_nodes() {
            out[self.to.dof_of(i)] = c[self.from.dof_of(i)];
        }
        out
    }

    /// Transpose of `apply`.
    pub fn apply_t(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.from.ndof()];
        let mut last = usize::MAX;
        for i in 0..self.to.n_nodes() {
            let j = self.to.dof_of(i);
            if j != last {
                out[self.from.dof_of(i)] += y[j];
                last = j;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dot;
    use crate::model::{Coef, Nonlinearity, ProfileKind, ProfileSpec};

    #[test]
    fn embedding_transpose_identity() {
        let cfg = ProblemConfig {
            lambda: 1.0,
            c: Coef::Const(0.0),
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
        };
        let case = EpsCase::new(&cfg, 0.05, 32).unwrap();
        let e = Embedding::new(&case.op_lim, &case.op_eps).unwrap();
        let c: Vec<f64> = (0..case.op_lim.ndof()).map(|i| (i as f64 * 0.7).sin()).collect();
        let y: Vec<f64> = (0..case.op_eps.ndof()).map(|i| (i as f64 * 0.3).cos()).collect();
        assert!((dot(&e.apply(&c), &y) - dot(&c, &e.apply_t(&y))).abs() < 1e-12);
        assert!(Embedding::new(&case.op_eps, &case.op_lim).is_err());
        let same = Embedding::new(&case.op_lim, &case.op_lim).unwrap();
        assert_eq!(same.apply(&c), c);
        assert_eq!(same.apply_t(&c), c);
    }
}
