//! Piecewise-linear finite elements on `[0, 1]` for the perturbed operator
//! `A_eps` and the constrained limit operator `A_0`.
//!
//! Every assembled matrix is symmetric tridiagonal. The limit operator lives
//! on the subspace of functions constant on `[x1, x2]`; its degrees of freedom
//! are the nodal values with all `[x1, x2]` nodes merged into one.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{lanczos_largest, pencil_count_below, SymTridiag};
use crate::model::{DiffusionProfile, ProblemConfig};

/// Smallest accepted number of background elements.
pub const MIN_ELEMENTS: usize = 8;

pub(crate) const GAUSS3: [(f64, f64); 3] = [
    (-0.774_596_669_241_483_4, 5.0 / 9.0),
    (0.0, 8.0 / 9.0),
    (0.774_596_669_241_483_4, 5.0 / 9.0),
];

/// Three-point Gauss rule on `[a, b]`, returning `(x, weight)` pairs.
pub(crate) fn gauss_points(a: f64, b: f64) -> [(f64, f64); 3] {
    let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
    GAUSS3.map(|(t, w)| (m + h * t, h * w))
}

/// Node indices of the geometric breakpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeshIndex {
    /// `x1 - eps`
    pub left_outer: usize,
    pub x1: usize,
    /// `x1 + eps`
    pub left_inner: usize,
    /// `x2 - eps`
    pub right_inner: usize,
    pub x2: usize,
    /// `x2 + eps`
    pub right_outer: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub nodes: Vec<f64>,
    /// Background resolution the mesh was built from.
    pub n_background: usize,
    pub eps: f64,
    pub x1: f64,
    pub x2: f64,
    pub index: MeshIndex,
}

impl Mesh {
    /// Number of elements.
    pub fn n(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn max_h(&self) -> f64 {
        self.nodes.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// Nodes of the closed interval `[x1, x2]`.
    pub fn omega0_nodes(&self) -> std::ops::RangeInclusive<usize> {
        self.index.x1..=self.index.x2
    }

    /// Nodes strictly inside `[x1, x2]`.
    pub fn omega0_interior(&self) -> std::ops::Range<usize> {
        self.index.x1 + 1..self.index.x2
    }

    pub fn in_omega1(&self, i: usize) -> bool {
        i <= self.index.x1 || i >= self.index.x2
    }

    /// Nodal interpolant of `g`.
    pub fn interpolate(&self, g: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|&x| g(x)).collect()
    }

    /// Two-column `x,u` CSV of a nodal function.
    pub fn to_csv(&self, u: &[f64]) -> String {
        let mut s = String::from("x,u\n");
        for (x, v) in self.nodes.iter().zip(u) {
            let _ = writeln!(s, "{x},{v}");
        }
        s
    }
}

fn find_node(nodes: &[f64], x: f64) -> Option<usize> {
    let i = nodes.partition_point(|&v| v < x - 1e-12);
    (i < nodes.len() && (nodes[i] - x).abs() <= 1e-12).then_some(i)
}

/// Uniform background mesh with `n` elements plus every breakpoint of the
/// profile and of the layer set. Background nodes within `h/4` of a breakpoint
/// are dropped, so the largest element is at most `5h/4`.
pub fn build_mesh(config: &ProblemConfig, profile: &DiffusionProfile, n: usize) -> Result<Mesh> {
    if n < MIN_ELEMENTS {
        return Err(Error::RefineRequest(format!("need at least {MIN_ELEMENTS} elements, got {n}")));
    }
    let (x1, x2, eps) = (config.x1, config.x2, profile.eps);
    let geometric = [0.0, x1 - eps, x1, x1 + eps, x2 - eps, x2, x2 + eps, 1.0];
    if geometric.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::RefineRequest(format!(
            "breakpoints out of order for eps = {eps}: {geometric:?}"
        )));
    }
    let mut bps: Vec<f64> = geometric.to_vec();
    bps.extend(profile.breakpoints().into_iter().filter(|x| (0.0..=1.0).contains(x)));
    bps.sort_by(f64::total_cmp);
    bps.dedup_by(|a, b| (*a - *b).abs() <= 1e-14);
    if let Some(w) = bps.windows(2).find(|w| w[1] - w[0] < 1e-10) {
        return Err(Error::RefineRequest(format!(
            "breakpoints {} and {} collide",
            w[0], w[1]
        )));
    }
    let h = 1.0 / n as f64;
    let mut nodes: Vec<f64> = (0..=n)
        .map(|i| i as f64 * h)
        .filter(|x| {
            let j = bps.partition_point(|b| b < x);
            let near = |k: usize| k < bps.len() && (bps[k] - x).abs() < 0.25 * h;
            !(near(j) || (j > 0 && near(j - 1)))
        })
        .collect();
    nodes.extend_from_slice(&bps);
    nodes.sort_by(f64::total_cmp);
    let idx = |x: f64| find_node(&nodes, x).expect("breakpoint inserted above");
    let index = MeshIndex {
        left_outer: idx(x1 - eps),
        x1: idx(x1),
        left_inner: idx(x1 + eps),
        right_inner: idx(x2 - eps),
        x2: idx(x2),
        right_outer: idx(x2 + eps),
    };
    Ok(Mesh {
        nodes,
        n_background: n,
        eps,
        x1,
        x2,
        index,
    })
}

/// Coefficient layout of a discrete space on a mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofMap {
    Full { n_nodes: usize },
    /// Nodes `first..=last` share one coefficient.
    Constrained { n_nodes: usize, first: usize, last: usize },
}

impl DofMap {
    pub fn ndof(&self) -> usize {
        match *self {
            DofMap::Full { n_nodes } => n_nodes,
            DofMap::Constrained { n_nodes, first, last } => n_nodes - (last - first),
        }
    }

    pub fn n_nodes(&self) -> usize {
        match *self {
            DofMap::Full { n_nodes } | DofMap::Constrained { n_nodes, .. } => n_nodes,
        }
    }

    /// Coefficient index of node `i`.
    pub fn dof_of(&self, i: usize) -> usize {
        match *self {
            DofMap::Full { .. } => i,
            DofMap::Constrained { first, last, .. } => {
                if i <= first {
                    i
                } else if i <= last {
                    first
                } else {
                    i - (last - first)
                }
            }
        }
    }

    /// Nodal values `B c`.
    pub fn expand(&self, c: &[f64]) -> Vec<f64> {
        (0..self.n_nodes()).map(|i| c[self.dof_of(i)]).collect()
    }

    /// `B^T v` for a nodal (dual) vector such as a load.
    pub fn restrict_dual(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.ndof()];
        for (i, x) in v.iter().enumerate() {
            out[self.dof_of(i)] += x;
        }
        out
    }

    /// Coefficients of a nodal function that already lies in the space.
    pub fn restrict_values(&self, u: &[f64], tol: f64) -> Result<Vec<f64>> {
        if u.len() != self.n_nodes() {
            return Err(Error::Dimension {
                expected: self.n_nodes(),
                got: u.len(),
            });
        }
        if let DofMap::Constrained { first, last, .. } = *self {
            let v = u[first];
            let scale = u.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
            if let Some(i) = (first..=last).find(|&i| (u[i] - v).abs() > tol * scale) {
                return Err(Error::Precondition(format!(
                    "function is not constant on [x1, x2]: node {i} differs by {:.3e}",
                    (u[i] - v).abs()
                )));
            }
        }
        let mut out = vec![0.0; self.ndof()];
        for (i, &x) in u.iter().enumerate() {
            out[self.dof_of(i)] = x;
        }
        Ok(out)
    }

    /// `B^T T B` for a nodal tridiagonal matrix.
    pub fn reduce(&self, t: &SymTridiag) -> SymTridiag {
        let DofMap::Constrained { first, last, .. } = *self else {
            return t.clone();
        };
        let nd = self.ndof();
        let mut out = SymTridiag::zeros(nd);
        for i in 0..t.dim() {
            out.diag[self.dof_of(i)] += t.diag[i];
        }
        for i in 0..t.dim() - 1 {
            let (a, b) = (self.dof_of(i), self.dof_of(i + 1));
            if a == b {
                out.diag[a] += 2.0 * t.off[i];
            } else {
                out.off[a] += t.off[i];
            }
        }
        debug_assert!(first <= last);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OperatorKind {
    Perturbed { eps: f64 },
    Limit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    Full,
    Constrained,
}

/// Nodal values tagged with the space they belong to.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub values: Vec<f64>,
    pub space: Space,
}

/// Assembled Galerkin matrices in the operator's own coefficients.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub kind: OperatorKind,
    pub mesh: Arc<Mesh>,
    pub dofmap: DofMap,
    /// From `int p u' v'`.
    pub stiffness: SymTridiag,
    /// From `int (lambda + c) u v`.
    pub reaction: SymTridiag,
    pub mass: SymTridiag,
    /// `stiffness + reaction`
    pub a: SymTridiag,
    /// Average of `c` over `(x1, x2)`.
    pub c_omega0: f64,
}

impl DiscreteOperator {
    pub fn ndof(&self) -> usize {
        self.dofmap.ndof()
    }

    pub fn space(&self) -> Space {
        match self.kind {
            OperatorKind::Perturbed { .. } => Space::Full,
            OperatorKind::Limit => Space::Constrained,
        }
    }

    pub fn is_limit(&self) -> bool {
        self.kind == OperatorKind::Limit
    }

    /// `(u^T A u)^{1/2}`, the discrete energy norm.
    pub fn energy_norm(&self, u: &[f64]) -> Result<f64> {
        self.check_dim(u)?;
        Ok(self.a.form(u, u).max(0.0).sqrt())
    }

    pub fn l2_norm(&self, u: &[f64]) -> Result<f64> {
        self.check_dim(u)?;
        Ok(self.mass.form(u, u).max(0.0).sqrt())
    }

    pub fn check_dim(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.ndof() {
            return Err(Error::Dimension {
                expected: self.ndof(),
                got: u.len(),
            });
        }
        Ok(())
    }

    pub fn embed(&self, c: &[f64]) -> Vec<f64> {
        self.dofmap.expand(c)
    }

    pub fn to_grid(&self, c: &[f64]) -> GridFunction {
        GridFunction {
            values: self.embed(c),
            space: self.space(),
        }
    }

    /// Galerkin load `int g phi_i` of a nodal function in this operator's test space.
    pub fn load_from_nodal(&self, g: &[f64]) -> Vec<f64> {
        self.dofmap.restrict_dual(&nodal_mass(&self.mesh).matvec(g))
    }

    /// Coordinate-format dump `row col value` of a matrix.
    pub fn coo_text(t: &SymTridiag) -> String {
        let mut s = String::new();
        for i in 0..t.dim() {
            if i > 0 {
                let _ = writeln!(s, "{} {} {}", i, i - 1, t.off[i - 1]);
            }
            let _ = writeln!(s, "{} {} {}", i, i, t.diag[i]);
            if i + 1 < t.dim() {
                let _ = writeln!(s, "{} {} {}", i, i + 1, t.off[i]);
            }
        }
        s
    }
}

/// Consistent P1 mass matrix on all nodes.
pub fn nodal_mass(mesh: &Mesh) -> SymTridiag {
    let n = mesh.n_nodes();
    let mut m = SymTridiag::zeros(n);
    for e in 0..n - 1 {
        let h = mesh.nodes[e + 1] - mesh.nodes[e];
        m.diag[e] += h / 3.0;
        m.diag[e + 1] += h / 3.0;
        m.off[e] += h / 6.0;
    }
    m
}

/// P1 stiffness `int w u' v'` on all nodes, with `w` integrated per element
/// by three-point Gauss (exact up to degree five).
pub fn nodal_stiffness(mesh: &Mesh, w: impl Fn(f64) -> f64) -> SymTridiag {
    let n = mesh.n_nodes();
    let mut s = SymTridiag::zeros(n);
    for e in 0..n - 1 {
        let (a, b) = (mesh.nodes[e], mesh.nodes[e + 1]);
        let h = b - a;
        let integral: f64 = gauss_points(a, b).iter().map(|&(x, wt)| wt * w(x)).sum();
        let k = integral / (h * h);
        s.diag[e] += k;
        s.diag[e + 1] += k;
        s.off[e] -= k;
    }
    s
}

/// P1 weighted mass `int w u v` on all nodes by three-point Gauss.
pub fn nodal_weighted_mass(mesh: &Mesh, w: impl Fn(f64) -> f64) -> SymTridiag {
    let n = mesh.n_nodes();
    let mut r = SymTridiag::zeros(n);
    for e in 0..n - 1 {
        let (a, b) = (mesh.nodes[e], mesh.nodes[e + 1]);
        let h = b - a;
        for (x, wt) in gauss_points(a, b) {
            let t = (x - a) / h;
            let (p0, p1) = (1.0 - t, t);
            let c = wt * w(x);
            r.diag[e] += c * p0 * p0;
            r.diag[e + 1] += c * p1 * p1;
            r.off[e] += c * p0 * p1;
        }
    }
    r
}

fn check_mesh_matches(mesh: &Mesh, profile: &DiffusionProfile) -> Result<()> {
    if (mesh.eps - profile.eps).abs() > 1e-15 * profile.eps.max(1.0) {
        return Err(Error::Precondition(format!(
            "mesh built for eps = {}, profile has eps = {}",
            mesh.eps, profile.eps
        )));
    }
    for x in profile.breakpoints().into_iter().filter(|x| (0.0..=1.0).contains(x)) {
        if find_node(&mesh.nodes, x).is_none() {
            return Err(Error::Precondition(format!("profile breakpoint {x} is not a mesh node")));
        }
    }
    Ok(())
}

/// Assemble `A_eps` (kind `Perturbed`) or the constrained `A_0` (kind `Limit`).
///
/// The limit stiffness uses `p0` on `Omega_1` and vanishes on `Omega_0`,
/// where the constrained functions are constant.
pub fn assemble(
    mesh: &Arc<Mesh>,
    config: &ProblemConfig,
    profile: &DiffusionProfile,
    kind: OperatorKind,
) -> Result<DiscreteOperator> {
    check_mesh_matches(mesh, profile)?;
    let n_nodes = mesh.n_nodes();
    let (x1, x2) = (mesh.x1, mesh.x2);
    let (s_full, dofmap) = match kind {
        OperatorKind::Perturbed { .. } => (
            nodal_stiffness(mesh, |x| profile.eval(x)),
            DofMap::Full { n_nodes },
        ),
        OperatorKind::Limit => (
            nodal_stiffness(mesh, |x| if x < x1 || x > x2 { profile.p0_at(x) } else { 0.0 }),
            DofMap::Constrained {
                n_nodes,
                first: mesh.index.x1,
                last: mesh.index.x2,
            },
        ),
    };
    let r_full = nodal_weighted_mass(mesh, |x| config.reaction(x));
    let m_full = nodal_mass(mesh);
    let stiffness = dofmap.reduce(&s_full);
    let reaction = dofmap.reduce(&r_full);
    let mass = dofmap.reduce(&m_full);
    let a = stiffness.combine(1.0, &reaction, 1.0);

    let c_integral: f64 = (mesh.index.x1..mesh.index.x2)
        .flat_map(|e| gauss_points(mesh.nodes[e], mesh.nodes[e + 1]))
        .map(|(x, w)| w * config.c.eval(x))
        .sum();
    let c_omega0 = c_integral / (x2 - x1);

    // A - m0 M must be positive definite up to rounding.
    let floor = config.m0 * (1.0 - 1e-8);
    if pencil_count_below(&a, &mass, floor) > 0 {
        return Err(Error::Assembly(format!(
            "smallest eigenvalue of (A, M) is below m0 = {}; check lambda + c >= m0",
            config.m0
        )));
    }
    Ok(DiscreteOperator {
        kind,
        mesh: Arc::clone(mesh),
        dofmap,
        stiffness,
        reaction,
        mass,
        a,
        c_omega0,
    })
}

/// Extension operator `E`: keeps `u` outside `[x1-eps, x2+eps]`, replaces it by
/// its `Omega_0` mean on `[x1, x2]` and interpolates linearly across the layers.
/// Input and output are nodal values.
pub fn extend_e(mesh: &Mesh, u: &[f64]) -> Vec<f64> {
    let ix = mesh.index;
    let block = &u[ix.x1..=ix.x2];
    let mean = if block.iter().all(|&v| v == block[0]) {
        block[0]
    } else {
        let integral: f64 = (ix.x1..ix.x2)
            .map(|e| 0.5 * (mesh.nodes[e + 1] - mesh.nodes[e]) * (u[e] + u[e + 1]))
            .sum();
        integral / (mesh.x2 - mesh.x1)
    };
    let mut out = u.to_vec();
    let (ul, ur) = (u[ix.left_outer], u[ix.right_outer]);
    let (xl, xr) = (mesh.nodes[ix.left_outer], mesh.nodes[ix.right_outer]);
    for i in ix.left_outer + 1..ix.x1 {
        let t = (mesh.nodes[i] - xl) / (mesh.x1 - xl);
        out[i] = ul + t * (mean - ul);
    }
    for v in &mut out[ix.x1..=ix.x2] {
        *v = mean;
    }
    for i in ix.x2 + 1..ix.right_outer {
        let t = (xr - mesh.nodes[i]) / (xr - mesh.x2);
        out[i] = ur + t * (mean - ur);
    }
    out
}

/// Largest generalized eigenvalue of the energy form against the `H^1` form:
/// the squared embedding constant of `H^1` into the energy space.
pub fn embedding_constant(op: &DiscreteOperator) -> Result<f64> {
    let h1 = nodal_stiffness(&op.mesh, |_| 1.0).combine(1.0, &nodal_mass(&op.mesh), 1.0);
    let h1 = op.dofmap.reduce(&h1);
    let (value, _) = lanczos_largest(&h1, |x| op.a.matvec(x), 300, 1e-10)?;
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pencil_eigenvalues;
    use crate::model::{make_profile, Coef, Nonlinearity, ProfileKind, ProfileSpec};

    fn config(lambda: f64, c: Coef) -> ProblemConfig {
        ProblemConfig {
            lambda,
            c,
            m0: 0.5,
            x1: 0.3,
            x2: 0.7,
            eps0: 0.15,
            f: Nonlinearity::cubic(1.0, 1.0, 4.0),
            profile: ProfileSpec {
                kind: ProfileKind::Ramp,
                p0: Coef::Const(1.0),
                alpha: 1.0,
            },
        }
    }

    fn unit_table() -> ProfileKind {
        ProfileKind::CustomTable {
            table: vec![(0.0, 1.0), (1.0, 1.0)],
        }
    }

    #[test]
    fn mesh_contains_breakpoints() {
        let cfg = config(1.0, Coef::Const(0.0));
        let p = make_profile(&cfg, &ProfileKind::Ramp, 0.1, &Coef::Const(1.0)).unwrap();
        let mesh = build_mesh(&cfg, &p, 10).unwrap();
        for x in [0.0, 0.2, 0.3, 0.4, 0.6, 0.7, 0.8, 1.0] {
            assert!(find_node(&mesh.nodes, x).is_some(), "missing {x}");
        }
        assert!(mesh.nodes.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn mesh_h_bound() {
        let cfg = config(1.0, Coef::Const(0.0));
        let p = make_profile(&cfg, &ProfileKind::Ramp, 0.01, &Coef::Const(1.0)).unwrap();
        let mesh = build_mesh(&cfg, &p, 1024).unwrap();
        assert!(mesh.max_h() <= 2.0 / 1024.0);
    }

    #[test]
    fn mesh_rejects_overlapping_layers() {
        let cfg = config(1.0, Coef::Const(0.0));
        let mut p = make_profile(&cfg, &ProfileKind::Ramp, 0.1, &Coef::Const(1.0)).unwrap();
        p.eps = 0.25;
        assert!(matches!(build_mesh(&cfg, &p, 64), Err(Error::RefineRequest(_))));
    }

    #[test]
    fn constant_has_unit_energy() {
        let cfg = config(1.0, Coef::Const(0.0));
        let p = make_profile(&cfg, &unit_table(), 0.1, &Coef::Const(1.0)).unwrap();
        let mesh = Arc::new(build_mesh(&cfg, &p, 64).unwrap());
        let op = assemble(&mesh, &cfg, &p, OperatorKind::Perturbed { eps: 0.1 }).unwrap();
        let one = vec![1.0; op.ndof()];
        let e = op.energy_norm(&one).unwrap();
        assert!((e - 1.0).abs() < 1e-10, "{e}");
        let lam = pencil_eigenvalues(&op.a, &op.mass, 1)[0];
        assert!((lam - 1.0).abs() < 1e-12);
        assert_eq!(op.energy_norm(&vec![0.0; op.ndof()]).unwrap(), 0.0);
        assert!(op.energy_norm(&[1.0]).is_err());
    }

    #[test]
    fn limit_average_of_c() {
        let cfg = config(1.0, Coef::Poly(vec![0.0, 1.0]));
        let p = make_profile(&cfg, &ProfileKind::Ramp, 0.05, &Coef::Const(1.0)).unwrap();
        let mesh = Arc::new(build_mesh(&cfg, &p, 64).unwrap());
        let op = assemble(&mesh, &cfg, &p, OperatorKind::Limit).unwrap();
        assert!((op.c_omega0 - 0.5).abs() < 1e-14);
        assert_eq!(op.ndof(), mesh.n_nodes() - (mesh.index.x2 - mesh.index.x1));
    }

    #[test]
    fn reduced_matrix_matches_dense_galerkin() {
        let cfg = config(1.0, Coef::Poly(vec![0.0, 1.0]));
        let p = make_profile(&cfg, &ProfileKind::Ramp, 0.1, &Coef::Const(1.0)).unwrap();
        let mesh = Arc::new(build_mesh(&cfg, &p, 16).unwrap());
        let full = nodal_weighted_mass(&mesh, |x| cfg.reaction(x)).to_dense();
        let op = assemble(&mesh, &cfg, &p, OperatorKind::Limit).unwrap();
        let nd = op.ndof();
        let mut b = nalgebra::DMatrix::zeros(mesh.n_nodes(), nd);
        for i in 0..mesh.n_nodes() {
            b[(i, op.dofmap.dof_of(i))] = 1.0;
        }
        let dense = b.transpose() * full * &b;
        let diff = (dense - op.reaction.to_dense()).abs().max();
        assert!(diff < 1e-14, "{diff}");
    }

    #[test]
    fn assembly_rejects_indefinite() {
        let mut cfg = config(-5.0, Coef::Const(0.0));
        cfg.m0 = 0.5;
        let p = DiffusionProfile {
            kind: unit_table(),
            eps: 0.1,
            x1: 0.3,
            x2: 0.7,
            p0: Coef::Const(1.0),
            offset: 0.0,
        };
        let mesh = Arc::new(build_mesh(&cfg, &p, 32).unwrap());
        assert!(matches!(
            assemble(&mesh, &cfg, &p, OperatorKind::Perturbed { eps: 0.1 }),
            Err(Error::Assembly(_))
        ));
    }

    #[test]
    fn extension_examples() {
        let cfg = config(1.0, Coef::Const(0.0));
        let p = make_profile(&cfg, &ProfileKind::Ramp, 0.05, &Coef::Const(1.0)).unwrap();
        let mesh = build_mesh(&cfg, &p, 128).unwrap();
        let c = vec![2.5; mesh.n_nodes()];
        assert_eq!(extend_e(&mesh, &c), c);
        let x = mesh.interpolate(|x| x);
        let ex = extend_e(&mesh, &x);
        for i in mesh.omega0_nodes() {
            assert!((ex[i] - 0.5).abs() < 1e-14);
        }
        assert_eq!(extend_e(&mesh, &ex), ex);
        for i in 0..=mesh.index.left_outer {
            assert_eq!(ex[i], x[i]);
        }
    }

    #[test]
    fn coo_dump_lists_all_entries() {
        let t = SymTridiag {
            diag: vec![2.0, 2.0, 2.0],
            off: vec![-1.0, -1.0],
        };
        assert_eq!(DiscreteOperator::coo_text(&t).lines().count(), 7);
    }
}
