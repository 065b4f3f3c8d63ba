//! Tridiagonal kernels and the small amount of dense linear algebra the
//! one-dimensional discretization needs.
//!
//! Every operator assembled on a 1D P1 mesh is a symmetric tridiagonal
//! matrix, including the constrained (lumped) limit operator once the
//! nodes of the closed large-diffusion interval are merged into a single
//! degree of freedom. Generalized symmetric eigenproblems `A x = lambda M x`
//! are solved by Sturm-count bisection on the pencil `A - sigma M` plus
//! inverse iteration; the dense routines exist for oracles and modal
//! exponentials.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix stored by diagonal and first off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn zeros(n: usize) -> Self {
        Self {
            diag: vec![0.0; n],
            off: vec![0.0; n.saturating_sub(1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        debug_assert_eq!(x.len(), n);
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = self.diag[i] * x[i];
            if i > 0 {
                s += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                s += self.off[i] * x[i + 1];
            }
            y[i] = s;
        }
        y
    }

    /// `x^T self y`
    pub fn form(&self, x: &[f64], y: &[f64]) -> f64 {
        let n = self.dim();
        let mut s = 0.0;
        for i in 0..n {
            s += x[i] * self.diag[i] * y[i];
        }
        for i in 0..n.saturating_sub(1) {
            s += self.off[i] * (x[i] * y[i + 1] + x[i + 1] * y[i]);
        }
        s
    }

    /// `a * self + b * other`
    pub fn combine(&self, a: f64, other: &SymTridiag, b: f64) -> SymTridiag {
        SymTridiag {
            diag: self
                .diag
                .iter()
                .zip(&other.diag)
                .map(|(x, y)| a * x + b * y)
                .collect(),
            off: self
                .off
                .iter()
                .zip(&other.off)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        }
    }

    pub fn scaled(&self, a: f64) -> SymTridiag {
        SymTridiag {
            diag: self.diag.iter().map(|x| a * x).collect(),
            off: self.off.iter().map(|x| a * x).collect(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            if i + 1 < n {
                m[(i, i + 1)] = self.off[i];
                m[(i + 1, i)] = self.off[i];
            }
        }
        m
    }

    pub fn inf_norm(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i].abs();
                if i > 0 {
                    s += self.off[i - 1].abs();
                }
                if i + 1 < n {
                    s += self.off[i].abs();
                }
                s
            })
            .fold(0.0, f64::max)
    }

    pub fn lu(&self) -> Result<TridiagLu> {
        TridiagLu::factor(self.off.clone(), self.diag.clone(), self.off.clone())
    }

    /// Cholesky factor `L` (lower bidiagonal) with `self = L L^T`.
    pub fn cholesky(&self) -> Result<BidiagCholesky> {
        BidiagCholesky::factor(self)
    }
}

/// LU factorization with partial pivoting of a general tridiagonal matrix
/// (the classic `gttrf` layout with a second super-diagonal for fill).
#[derive(Debug, Clone)]
pub struct TridiagLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    ipiv: Vec<usize>,
}

impl TridiagLu {
    pub fn factor(mut dl: Vec<f64>, mut d: Vec<f64>, mut du: Vec<f64>) -> Result<Self> {
        let n = d.len();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut ipiv: Vec<usize> = (0..n).collect();
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] != 0.0 {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                ipiv[i] = i + 1;
            }
        }
        if let Some(i) = d.iter().position(|&x| x == 0.0 || !x.is_finite()) {
            return Err(Error::Singular(format!("zero pivot at row {i} of {n}")));
        }
        Ok(Self {
            dl,
            d,
            du,
            du2,
            ipiv,
        })
    }

    pub fn dim(&self) -> usize {
        self.d.len()
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.dim();
        for i in 0..n.saturating_sub(1) {
            let ip = self.ipiv[i];
            let temp = b[2 * i + 1 - ip] - self.dl[i] * b[ip];
            b[i] = b[ip];
            b[i + 1] = temp;
        }
        if n == 0 {
            return;
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// Lower bidiagonal Cholesky factor of an SPD tridiagonal matrix.
#[derive(Debug, Clone)]
pub struct BidiagCholesky {
    pub diag: Vec<f64>,
    pub sub: Vec<f64>,
}

impl BidiagCholesky {
    fn factor(a: &SymTridiag) -> Result<Self> {
        let n = a.dim();
        let mut diag = vec![0.0; n];
        let mut sub = vec![0.0; n.saturating_sub(1)];
        for i in 0..n {
            let mut piv = a.diag[i];
            if i > 0 {
                piv -= sub[i - 1] * sub[i - 1];
            }
            if !(piv > 0.0) {
                return Err(Error::Singular(format!(
                    "matrix not positive definite at row {i} (pivot {piv:.3e})"
                )));
            }
            diag[i] = piv.sqrt();
            if i + 1 < n {
                sub[i] = a.off[i] / diag[i];
            }
        }
        Ok(Self { diag, sub })
    }

    /// `L^T x`; the Euclidean norm of the result is the `A`-norm of `x`.
    pub fn upper_mul(&self, x: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i + 1 < n {
                    s += self.sub[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.diag.len();
        let mut l = DMatrix::zeros(n, n);
        for i in 0..n {
            l[(i, i)] = self.diag[i];
            if i + 1 < n {
                l[(i + 1, i)] = self.sub[i];
            }
        }
        l
    }
}

/// Number of eigenvalues of the pencil `(a, b)` strictly below `sigma`
/// (`b` SPD), by Sylvester inertia of `a - sigma b`.
pub fn pencil_count_below(a: &SymTridiag, b: &SymTridiag, sigma: f64) -> usize {
    let n = a.dim();
    let mut count = 0;
    let mut d = 0.0_f64;
    for i in 0..n {
        let aii = a.diag[i] - sigma * b.diag[i];
        d = if i == 0 {
            aii
        } else {
            let e = a.off[i - 1] - sigma * b.off[i - 1];
            aii - e * e / d
        };
        if d == 0.0 {
            d = -f64::EPSILON * (aii.abs() + f64::MIN_POSITIVE);
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

fn bisect_index(a: &SymTridiag, b: &SymTridiag, j: usize, lo0: f64, hi0: f64) -> f64 {
    let (mut lo, mut hi) = (lo0, hi0);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
            break;
        }
        if pencil_count_below(a, b, mid) > j {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Bracket `[lo, hi]` with no eigenvalue below `lo` and at least `k` below `hi`.
fn spectral_bracket(a: &SymTridiag, b: &SymTridiag, k: usize) -> (f64, f64) {
    let scale = a.inf_norm().max(1.0) / b.inf_norm().max(f64::MIN_POSITIVE);
    let mut lo = -1.0;
    while pencil_count_below(a, b, lo) > 0 {
        lo *= 2.0;
        if lo < -1e3 * scale * 1e6 {
            break;
        }
    }
    let mut hi = 1.0_f64.max(scale * 1e-6);
    while pencil_count_below(a, b, hi) < k {
        hi *= 2.0;
        if hi > 1e12 * scale {
            break;
        }
    }
    (lo, hi)
}

/// Lowest `k` eigenvalues of the pencil `(a, b)`, ascending.
pub fn pencil_eigenvalues(a: &SymTridiag, b: &SymTridiag, k: usize) -> Vec<f64> {
    let k = k.min(a.dim());
    if k == 0 {
        return Vec::new();
    }
    let (lo, hi) = spectral_bracket(a, b, k);
    let mut out = Vec::with_capacity(k);
    let mut start = lo;
    for j in 0..k {
        let v = bisect_index(a, b, j, start, hi);
        out.push(v);
        // lower end for index j+1 must have at most j+1 eigenvalues below it
        start = if pencil_count_below(a, b, v) <= j + 1 { v } else { lo };
    }
    out
}

/// Lowest `k` eigenpairs of the pencil `(a, b)`. Vectors are `b`-orthonormal
/// and signed so that their first component is nonnegative.
pub fn pencil_eigenpairs(a: &SymTridiag, b: &SymTridiag, k: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let values = pencil_eigenvalues(a, b, k);
    let n = a.dim();
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(values.len());
    for (j, &lam) in values.iter().enumerate() {
        let mut shift = lam;
        let lu = loop {
            let shifted = a.combine(1.0, b, -shift);
            match shifted.lu() {
                Ok(lu) => break lu,
                Err(_) => shift += f64::EPSILON * lam.abs().max(1.0) * 16.0,
            }
        };
        // deterministic, generic start vector
        let mut x: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.5 * ((i as f64 + 1.0) * 0.618_033_988_75 * (j as f64 + 1.0)).sin())
            .collect();
        for _ in 0..4 {
            let rhs = b.matvec(&x);
            x = lu.solve(&rhs);
            orthogonalize(&mut x, &vectors, b);
            let nrm = b.form(&x, &x).sqrt();
            if !(nrm.is_finite() && nrm > 0.0) {
                return Err(Error::Numerical {
                    message: format!("inverse iteration breakdown at eigenvalue {j}"),
                    iterations: 4,
                });
            }
            x.iter_mut().for_each(|v| *v /= nrm);
        }
        orthogonalize(&mut x, &vectors, b);
        orthogonalize(&mut x, &vectors, b);
        let nrm = b.form(&x, &x).sqrt();
        x.iter_mut().for_each(|v| *v /= nrm);
        fix_sign(&mut x);
        let ax = a.matvec(&x);
        let bx = b.matvec(&x);
        let res = ax
            .iter()
            .zip(&bx)
            .map(|(p, q)| (p - lam * q).abs())
            .fold(0.0, f64::max);
        let scale = a.inf_norm().max(1.0);
        if res > 1e-6 * scale {
            return Err(Error::Numerical {
                message: format!("eigenpair {j} residual {res:.3e} too large"),
                iterations: 4,
            });
        }
        vectors.push(x);
    }
    Ok((values, vectors))
}

fn orthogonalize(x: &mut [f64], basis: &[Vec<f64>], b: &SymTridiag) {
    for q in basis {
        let bq = b.matvec(q);
        let c: f64 = x.iter().zip(&bq).map(|(p, r)| p * r).sum();
        x.iter_mut().zip(q).for_each(|(p, r)| *p -= c * r);
    }
}

pub(crate) fn fix_sign(x: &mut [f64]) {
    let scale = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if let Some(first) = x.iter().find(|v| v.abs() > 1e-8 * scale) {
        if *first < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
    }
}

/// Dense generalized symmetric eigendecomposition of `(a, b)` through the
/// Cholesky factor of `b`. Returns ascending values and `b`-orthonormal
/// eigenvectors as matrix columns.
pub fn dense_pencil_eig(a: &DMatrix<f64>, b_chol: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let l = b_chol;
    let x = l
        .solve_lower_triangular(a)
        .expect("nonsingular Cholesky factor");
    let c = l
        .solve_lower_triangular(&x.transpose())
        .expect("nonsingular Cholesky factor");
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let n = order.len();
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut y = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        y.set_column(col, &eig.eigenvectors.column(i));
    }
    let vectors = l
        .transpose()
        .solve_upper_triangular(&y)
        .expect("nonsingular Cholesky factor");
    (values, vectors)
}

/// Largest eigenvalue of `W^{-1} K` for symmetric PSD `K` (given as a
/// matrix-free product) and SPD tridiagonal `W`, by Lanczos in the
/// `W` inner product with full reorthogonalization.
pub fn lanczos_largest<F>(w: &SymTridiag, apply_k: F, max_iter: usize, rel_tol: f64) -> Result<(f64, usize)>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = w.dim();
    let w_lu = w.lu()?;
    let mut q: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.3 * ((i as f64 + 0.5) * 1.324_717_957).sin() + 0.2 * ((i as f64) * 0.137).cos())
        .collect();
    let nrm = w.form(&q, &q).sqrt();
    q.iter_mut().for_each(|v| *v /= nrm);

    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut last_theta = f64::NAN;
    let iters = max_iter.min(n);
    for j in 0..iters {
        let kq = apply_k(&q);
        let alpha: f64 = kq.iter().zip(&q).map(|(a, b)| a * b).sum();
        let mut r = w_lu.solve(&kq);
        basis.push(q.clone());
        alphas.push(alpha);
        for _ in 0..2 {
            for qi in &basis {
                let wqi = w.matvec(qi);
                let c: f64 = r.iter().zip(&wqi).map(|(a, b)| a * b).sum();
                r.iter_mut().zip(qi).for_each(|(a, b)| *a -= c * b);
            }
        }
        let beta = w.form(&r, &r).max(0.0).sqrt();

        let t = tridiag_dense(&alphas, &betas);
        let eig = SymmetricEigen::new(t);
        let (imax, theta) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        let last_comp = eig.eigenvectors[(j, imax)].abs();
        let resid = beta * last_comp;
        let scale = theta.abs().max(f64::MIN_POSITIVE);
        let converged = (resid <= rel_tol * scale && (theta - last_theta).abs() <= rel_tol * scale)
            || beta <= 1e-14 * scale
            || theta == 0.0 && beta == 0.0;
        if converged || j + 1 == iters {
            if !converged && j + 1 < n {
                return Err(Error::Numerical {
                    message: format!("lanczos did not converge (residual {resid:.3e})"),
                    iterations: j + 1,
                });
            }
            return Ok((theta.max(0.0), j + 1));
        }
        last_theta = theta;
        betas.push(beta);
        q = r.iter().map(|v| v / beta).collect();
    }
    Ok((last_theta.max(0.0), iters))
}

fn tridiag_dense(alphas: &[f64], betas: &[f64]) -> DMatrix<f64> {
    let k = alphas.len();
    let mut t = DMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alphas[i];
        if i + 1 < k {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    t
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn sub(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(b, v)| *b += a * v);
}

pub fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}
