//! Continuous problem data: the partition `0 < x1 < x2 < 1`, the diffusion
//! family `p_eps` with its outer limit `p0`, the reaction coefficient
//! `lambda + c(x)`, the nonlinearity `f` and the rate abscissa
//! `tau(eps) = (|p_eps - p0|_{L^inf(Omega_1)} + eps)^{1/2}`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of uniform sample points used for every sup-norm and pointwise check.
pub const SUP_GRID: usize = 10_000;

/// A coefficient function on `[0, 1]`, written `const:<v>` or `poly:[a0,a1,...]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Coef {
    Const(f64),
    Poly(Vec<f64>),
}

impl Coef {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Coef::Const(v) => *v,
            Coef::Poly(a) => a.iter().rev().fold(0.0, |acc, &c| acc * x + c),
        }
    }

    /// Polynomial degree (0 for constants); quadrature exactness depends on it.
    pub fn degree(&self) -> usize {
        match self {
            Coef::Const(_) => 0,
            Coef::Poly(a) => a.len().saturating_sub(1),
        }
    }
}

impl FromStr for Coef {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        if let Some(v) = s.strip_prefix("const:") {
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|e| format!("bad constant `{v}`: {e}"))?;
            return Ok(Coef::Const(v));
        }
        if let Some(body) = s.strip_prefix("poly:") {
            let coeffs: Vec<f64> = serde_json::from_str(body.trim())
                .map_err(|e| format!("bad polynomial `{body}`: {e}"))?;
            if coeffs.is_empty() {
                return Err("polynomial needs at least one coefficient".into());
            }
            return Ok(Coef::Poly(coeffs));
        }
        Err(format!("expected `const:<v>` or `poly:[...]`, got `{s}`"))
    }
}

impl TryFrom<String> for Coef {
    type Error = String;
    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse()
    }
}

impl From<Coef> for String {
    fn from(c: Coef) -> String {
        c.to_string()
    }
}

impl fmt::Display for Coef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coef::Const(v) => write!(f, "const:{v}"),
            Coef::Poly(a) => {
                let parts: Vec<String> = a.iter().map(|v| format!("{v}")).collect();
                write!(f, "poly:[{}]", parts.join(","))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// `f(u) = a u - b u^3`
    Cubic,
    /// `f(u) = a tanh(u) - b u`
    TanhSaturated,
    /// `f(u) = sum_k params[k] u^k`
    Custom,
}

/// Nonlinearity with a smooth cutoff: `f_K = f o chi`, where `chi` is the
/// identity on `[-K/2, K/2]` and saturates towards `+-K` beyond it, so
/// `f_K` is bounded and globally Lipschitz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Nonlinearity {
    pub family: Family,
    pub params: Vec<f64>,
    #[serde(rename = "cutoff_K")]
    pub cutoff_k: f64,
}

impl Nonlinearity {
    pub fn cubic(a: f64, b: f64, cutoff_k: f64) -> Self {
        Self {
            family: Family::Cubic,
            params: vec![a, b],
            cutoff_k,
        }
    }

    pub fn zero() -> Self {
        Self::cubic(0.0, 0.0, 4.0)
    }

    /// `f(u) = k u`, diagonal in any eigenbasis.
    pub fn linear(k: f64) -> Self {
        Self::cubic(k, 0.0, 4.0)
    }

    pub fn validate(&self) -> Result<()> {
        let need = match self.family {
            Family::Cubic | Family::TanhSaturated => 2,
            Family::Custom => 1,
        };
        if self.params.len() < need {
            return Err(Error::Config(format!(
                "f.params: family {:?} needs {need} parameters, got {}",
                self.family,
                self.params.len()
            )));
        }
        if !(self.cutoff_k > 0.0) {
            return Err(Error::Config(format!("f.cutoff_K must be > 0, got {}", self.cutoff_k)));
        }
        Ok(())
    }

    /// Raw `(f(u), f'(u))` without cutoff.
    pub fn raw(&self, u: f64) -> (f64, f64) {
        let p = &self.params;
        match self.family {
            Family::Cubic => (p[0] * u - p[1] * u * u * u, p[0] - 3.0 * p[1] * u * u),
            Family::TanhSaturated => {
                let t = u.tanh();
                (p[0] * t - p[1] * u, p[0] * (1.0 - t * t) - p[1])
            }
            Family::Custom => {
                let v = p.iter().rev().fold(0.0, |acc, &c| acc * u + c);
                let d = p
                    .iter()
                    .enumerate()
                    .skip(1)
                    .rev()
                    .fold(0.0, |acc, (k, &c)| acc * u + k as f64 * c);
                (v, d)
            }
        }
    }

    fn chi(&self, u: f64) -> (f64, f64) {
        let half = 0.5 * self.cutoff_k;
        let a = u.abs();
        if a <= half {
            return (u, 1.0);
        }
        let t = ((a - half) / half).tanh();
        (u.signum() * (half + half * t), 1.0 - t * t)
    }

    /// Cut-off `(f_K(u), f_K'(u))`.
    pub fn eval(&self, u: f64) -> (f64, f64) {
        let (c, dc) = self.chi(u);
        let (v, d) = self.raw(c);
        (v, d * dc)
    }

    pub fn value(&self, u: f64) -> f64 {
        self.eval(u).0
    }

    pub fn derivative(&self, u: f64) -> f64 {
        self.eval(u).1
    }

    pub fn is_zero(&self) -> bool {
        self.params.iter().all(|&p| p == 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum ProfileKind {
    /// `p0` on `Omega_1`, linear in `[x1, x1+eps]` and `[x2-eps, x2]`, `1/eps` in the core.
    Ramp,
    /// As `Ramp`, with `3t^2 - 2t^3` blending in the layers.
    SmoothRamp,
    /// As `Ramp`, with `p0 + eps^alpha` on `Omega_1`.
    OffsetRamp,
    /// Piecewise-linear table `(x, p)` covering `[0, 1]`.
    CustomTable { table: Vec<(f64, f64)> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSpec {
    #[serde(flatten)]
    pub kind: ProfileKind,
    pub p0: Coef,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
}

fn default_alpha() -> f64 {
    1.0
}

/// JSON problem descriptor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub lambda: f64,
    pub c: Coef,
    pub m0: f64,
    pub x1: f64,
    pub x2: f64,
    pub eps0: f64,
    pub f: Nonlinearity,
    pub profile: ProfileSpec,
}

impl ProblemConfig {
    /// `lambda + c(x)`
    pub fn reaction(&self, x: f64) -> f64 {
        self.lambda + self.c.eval(x)
    }

    /// Hard structural checks that must hold before any profile can be built.
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.x1 && self.x1 < self.x2 && self.x2 < 1.0) {
            return Err(Error::Config(format!(
                "need 0 < x1 < x2 < 1, got x1 = {}, x2 = {}",
                self.x1, self.x2
            )));
        }
        if !(self.eps0 > 0.0 && self.eps0 < 1.0) {
            return Err(Error::Config(format!("eps0 must lie in (0, 1), got {}", self.eps0)));
        }
        if !(self.m0 > 0.0) {
            return Err(Error::Config(format!("m0 must be > 0, got {}", self.m0)));
        }
        self.f.validate()
    }

    /// Largest admissible `eps` strictly below which layers fit in the domain.
    pub fn eps_bound(&self) -> f64 {
        self.x1.min(1.0 - self.x2).min(0.5 * (self.x2 - self.x1))
    }

    pub fn omega0_len(&self) -> f64 {
        self.x2 - self.x1
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionProfile {
    pub kind: ProfileKind,
    pub eps: f64,
    pub x1: f64,
    pub x2: f64,
    pub p0: Coef,
    /// Constant added to `p0` on `Omega_1` (`eps^alpha` for offset-ramp, else 0).
    pub offset: f64,
}

impl DiffusionProfile {
    /// Value `1/eps` enforced on `[x1+eps, x2-eps]`.
    pub fn core_floor(&self) -> f64 {
        1.0 / self.eps
    }

    pub fn in_omega1(&self, x: f64) -> bool {
        x <= self.x1 || x >= self.x2
    }

    /// The layer set `[x1-eps, x1] U [x2, x2+eps]` used by the extension operator.
    pub fn layer(&self) -> [(f64, f64); 2] {
        [(self.x1 - self.eps, self.x1), (self.x2, self.x2 + self.eps)]
    }

    pub fn p0_at(&self, x: f64) -> f64 {
        self.p0.eval(x)
    }

    pub fn eval(&self, x: f64) -> f64 {
        if let ProfileKind::CustomTable { table } = &self.kind {
            return table_eval(table, x);
        }
        let (x1, x2, eps) = (self.x1, self.x2, self.eps);
        if self.in_omega1(x) {
            return self.p0.eval(x) + self.offset;
        }
        let top = self.core_floor();
        let blend = |t: f64| -> f64 {
            match self.kind {
                ProfileKind::SmoothRamp => t * t * (3.0 - 2.0 * t),
                _ => t,
            }
        };
        if x < x1 + eps {
            let base = self.p0.eval(x1) + self.offset;
            base + (top - base) * blend((x - x1) / eps)
        } else if x > x2 - eps {
            let base = self.p0.eval(x2) + self.offset;
            base + (top - base) * blend((x2 - x) / eps)
        } else {
            top
        }
    }

    /// Points where `p_eps` may lose smoothness; all become mesh nodes.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            ProfileKind::CustomTable { table } => table.iter().map(|&(x, _)| x).collect(),
            _ => vec![self.x1, self.x1 + self.eps, self.x2 - self.eps, self.x2],
        }
    }

    /// True when `p_eps` is a polynomial of degree <= 3 between breakpoints.
    pub fn piecewise_cubic(&self) -> bool {
        matches!(self.kind, ProfileKind::CustomTable { .. }) || self.p0.degree() <= 3
    }
}

fn table_eval(table: &[(f64, f64)], x: f64) -> f64 {
    if x <= table[0].0 {
        return table[0].1;
    }
    for w in table.windows(2) {
        let ((xa, pa), (xb, pb)) = (w[0], w[1]);
        if x <= xb {
            let t = if xb > xa { (x - xa) / (xb - xa) } else { 1.0 };
            return pa + t * (pb - pa);
        }
    }
    table[table.len() - 1].1
}

/// Build `p_eps` for the configured profile family.
pub fn make_profile(config: &ProblemConfig, kind: &ProfileKind, eps: f64, p0: &Coef) -> Result<DiffusionProfile> {
    config.validate()?;
    if !(eps > 0.0) {
        return Err(Error::Config(format!("eps must be > 0, got {eps}")));
    }
    if eps > config.eps0 {
        return Err(Error::Config(format!("eps = {eps} exceeds eps0 = {}", config.eps0)));
    }
    let bound = config.eps_bound();
    if eps >= bound {
        let which = if bound == config.x1 {
            "x1"
        } else if bound == 1.0 - config.x2 {
            "1 - x2"
        } else {
            "(x2 - x1)/2"
        };
        return Err(Error::Config(format!(
            "eps = {eps} must be below min(x1, 1 - x2, (x2 - x1)/2) = {bound} (bound set by {which})"
        )));
    }
    if let ProfileKind::CustomTable { table } = kind {
        if table.len() < 2
            || table.windows(2).any(|w| !(w[1].0 > w[0].0))
            || table[0].0 > 0.0
            || table[table.len() - 1].0 < 1.0
        {
            return Err(Error::Config(
                "custom table must be strictly increasing in x and cover [0, 1]".into(),
            ));
        }
    }
    let offset = match kind {
        ProfileKind::OffsetRamp => eps.powf(config.profile.alpha),
        _ => 0.0,
    };
    Ok(DiffusionProfile {
        kind: kind.clone(),
        eps,
        x1: config.x1,
        x2: config.x2,
        p0: p0.clone(),
        offset,
    })
}

/// Profile for the family named in the configuration.
pub fn configured_profile(config: &ProblemConfig, eps: f64) -> Result<DiffusionProfile> {
    make_profile(config, &config.profile.kind, eps, &config.profile.p0)
}

/// Deterministic sample of `Omega_1 = [0,x1] U [x2,1]` with `SUP_GRID` points
/// split in proportion to the two pieces' lengths.
pub fn omega1_grid(x1: f64, x2: f64, total: usize) -> Vec<f64> {
    let (la, lb) = (x1, 1.0 - x2);
    let na = ((total as f64) * la / (la + lb)).round().max(2.0) as usize;
    let nb = total.saturating_sub(na).max(2);
    let mut pts: Vec<f64> = (0..na).map(|i| x1 * i as f64 / (na - 1) as f64).collect();
    pts.extend((0..nb).map(|i| x2 + (1.0 - x2) * i as f64 / (nb - 1) as f64));
    pts
}

pub fn p_dist_on(profile: &DiffusionProfile, points: usize) -> f64 {
    omega1_grid(profile.x1, profile.x2, points)
        .into_iter()
        .map(|x| (profile.eval(x) - profile.p0_at(x)).abs())
        .fold(0.0, f64::max)
}

/// `|p_eps - p0|_{L^inf(Omega_1)}` on the standard sampling grid.
pub fn p_dist(profile: &DiffusionProfile) -> f64 {
    p_dist_on(profile, SUP_GRID)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tau {
    pub tau: f64,
    /// `tau |log tau|` when `tau < 1`, otherwise `tau` itself.
    pub tau_log: f64,
    pub log_corrected: bool,
}

impl Tau {
    pub fn from_parts(p_dist: f64, eps: f64) -> Tau {
        let tau = (p_dist + eps).sqrt();
        if tau < 1.0 {
            Tau {
                tau,
                tau_log: tau * tau.ln().abs(),
                log_corrected: true,
            }
        } else {
            Tau {
                tau,
                tau_log: tau,
                log_corrected: false,
            }
        }
    }
}

pub fn tau(profile: &DiffusionProfile) -> Tau {
    Tau::from_parts(p_dist(profile), profile.eps)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub inequality: String,
    pub worst_x: f64,
    pub value: f64,
    pub bound: f64,
}

fn uniform_grid(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| a + (b - a) * i as f64 / (n - 1) as f64)
}

/// Every violated inequality of the problem data on the sampling grid.
pub fn check_admissible(profile: &DiffusionProfile, config: &ProblemConfig) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |name: &str, x: f64, value: f64, bound: f64| {
        out.push(Violation {
            inequality: name.to_string(),
            worst_x: x,
            value,
            bound,
        })
    };

    if !(0.0 < config.x1 && config.x1 < config.x2 && config.x2 < 1.0) {
        push("0 < x1 < x2 < 1", config.x1, config.x2, 0.0);
    }
    if !(config.m0 > 0.0) {
        push("m0 > 0", 0.0, config.m0, 0.0);
    }
    if !(profile.eps > 0.0 && profile.eps <= config.eps0) {
        push("0 < eps <= eps0", 0.0, profile.eps, config.eps0);
    }
    if profile.eps >= config.eps_bound() {
        push("eps < min(x1, 1-x2, (x2-x1)/2)", 0.0, profile.eps, config.eps_bound());
    }

    let worst_min = |it: &mut dyn Iterator<Item = f64>, g: &dyn Fn(f64) -> f64| -> (f64, f64) {
        it.map(|x| (x, g(x)))
            .fold((0.0, f64::INFINITY), |acc, (x, v)| if v < acc.1 { (x, v) } else { acc })
    };

    let (x, v) = worst_min(&mut uniform_grid(0.0, 1.0, SUP_GRID), &|x| config.reaction(x));
    if v < config.m0 {
        push("lambda + c(x) >= m0", x, v, config.m0);
    }

    let (a, b) = (config.x1 + profile.eps, config.x2 - profile.eps);
    if a < b {
        let (x, v) = worst_min(&mut uniform_grid(a, b, SUP_GRID), &|x| profile.eval(x) - profile.core_floor());
        if v < -1e-12 * profile.core_floor() {
            push("p_eps >= 1/eps on [x1+eps, x2-eps]", x, v + profile.core_floor(), profile.core_floor());
        }
    }

    let (x, v) = worst_min(&mut uniform_grid(0.0, 1.0, SUP_GRID), &|x| profile.eval(x));
    if v < config.m0 {
        push("p_eps >= m0 on [0,1]", x, v, config.m0);
    }
    let (x, v) = worst_min(
        &mut omega1_grid(config.x1, config.x2, SUP_GRID).into_iter(),
        &|x| profile.p0_at(x),
    );
    if v < config.m0 {
        push("p0 >= m0 on Omega_1", x, v, config.m0);
    }

    let k = config.f.cutoff_k;
    for u in [k, -k] {
        let ratio = config.f.raw(u).0 / u;
        if !(ratio < 0.0) {
            push("limsup f(u)/u < 0 (checked at +-K)", u, ratio, 0.0);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn base_config() -> ProblemConfig {
        ProblemConfig {
            lambda: 1.0,
            c: Coef::Const(0.0),
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

    #[test]
    fn coef_parsing() {
        assert_eq!("const:2.5".parse::<Coef>().unwrap(), Coef::Const(2.5));
        assert_eq!("poly:[1, 0, 1]".parse::<Coef>().unwrap(), Coef::Poly(vec![1.0, 0.0, 1.0]));
        assert!("exp:1".parse::<Coef>().is_err());
        assert!("poly:[]".parse::<Coef>().is_err());
        let c = Coef::Poly(vec![1.0, 0.0, 1.0]);
        assert!((c.eval(0.5) - 1.25).abs() < 1e-15);
    }

    #[test]
    fn ramp_values() {
        let cfg = base_config();
        let p = make_profile(&cfg, &ProfileKind::Ramp, 0.1, &Coef::Const(1.0)).unwrap();
        assert!((p.eval(0.5) - 10.0).abs() < 1e-12);
        assert!((p.eval(0.1) - 1.0).abs() < 1e-12);
        assert!((p.eval(0.35) - 5.5).abs() < 1e-12);
        assert!((p.eval(0.65) - 5.5).abs() < 1e-12);
    }

    #[test]
    fn ramp_floor_small_eps() {
        let cfg = base_config();
        let p = make_profile(&cfg, &ProfileKind::Ramp, 0.01, &Coef::Const(1.0)).unwrap();
        for x in uniform_grid(0.31, 0.69, 1000) {
            assert!(p.eval(x) >= 100.0 - 1e-9);
        }
    }

    #[test]
    fn smooth_ramp_is_admissible() {
        let cfg = base_config();
        let p = make_profile(&cfg, &ProfileKind::SmoothRamp, 0.05, &"poly:[1,0,1]".parse().unwrap()).unwrap();
        assert_eq!(check_admissible(&p, &cfg), vec![]);
    }

    #[test]
    fn eps_out_of_range_names_bound() {
        let mut cfg = base_config();
        cfg.eps0 = 0.5;
        let err = make_profile(&cfg, &ProfileKind::Ramp, 0.25, &Coef::Const(1.0)).unwrap_err();
        assert!(err.to_string().contains("(x2 - x1)/2"), "{err}");
        let err = make_profile(&base_config(), &ProfileKind::Ramp, 0.2, &Coef::Const(1.0)).unwrap_err();
        assert!(err.to_string().contains("eps0"), "{err}");
    }

    #[test]
    fn p_dist_cases() {
        let cfg = base_config();
        let p = make_profile(&cfg, &ProfileKind::Ramp, 0.05, &Coef::Const(1.0)).unwrap();
        assert_eq!(p_dist(&p), 0.0);
        let p = make_profile(&cfg, &ProfileKind::OffsetRamp, 0.05, &Coef::Const(1.0)).unwrap();
        assert!((p_dist(&p) - 0.05).abs() < 1e-12);
        let p = make_profile(&cfg, &ProfileKind::SmoothRamp, 0.05, &"poly:[1,0,1]".parse().unwrap()).unwrap();
        assert!((p_dist(&p) - p_dist_on(&p, 100_000)).abs() < 1e-6);
    }

    #[test]
    fn tau_arithmetic() {
        let t = Tau::from_parts(0.0, 0.01);
        assert!((t.tau - 0.1).abs() < 1e-15);
        assert!((t.tau_log - 0.230_258_509_3).abs() < 1e-9);
        assert!((Tau::from_parts(0.03, 0.01).tau - 0.2).abs() < 1e-15);
        let t = Tau::from_parts(1.5, 0.01);
        assert!(!t.log_corrected);
        assert_eq!(t.tau_log, t.tau);
    }

    #[test]
    fn tau_strictly_decreasing_in_eps() {
        let cfg = base_config();
        for kind in [ProfileKind::Ramp, ProfileKind::SmoothRamp, ProfileKind::OffsetRamp] {
            let taus: Vec<f64> = (1..=20)
                .map(|i| {
                    let eps = cfg.eps0 * i as f64 / 20.0;
                    tau(&make_profile(&cfg, &kind, eps, &Coef::Const(1.0)).unwrap()).tau
                })
                .collect();
            assert!(taus.windows(2).all(|w| w[0] < w[1]), "{kind:?}");
        }
    }

    #[test]
    fn builtin_profiles_always_admissible() {
        let cfg = base_config();
        for kind in [ProfileKind::Ramp, ProfileKind::SmoothRamp, ProfileKind::OffsetRamp] {
            for i in 1..=10 {
                let eps = cfg.eps0 * i as f64 / 10.0;
                let p = make_profile(&cfg, &kind, eps, &"poly:[1,0.5]".parse().unwrap()).unwrap();
                assert_eq!(check_admissible(&p, &cfg), vec![], "{kind:?} eps={eps}");
            }
        }
    }

    #[test]
    fn floor_violation_is_reported() {
        let cfg = base_config();
        let table = vec![(0.0, 1.0), (1.0, 1.0)];
        let p = make_profile(&cfg, &ProfileKind::CustomTable { table }, 0.01, &Coef::Const(1.0)).unwrap();
        let v = check_admissible(&p, &cfg);
        assert_eq!(v.len(), 1, "{v:?}");
        assert!(v[0].inequality.contains("1/eps"));
    }

    #[test]
    fn m0_violation_is_reported() {
        let mut cfg = base_config();
        cfg.lambda = 0.0;
        let p = make_profile(&cfg, &ProfileKind::Ramp, 0.05, &Coef::Const(1.0)).unwrap();
        let v = check_admissible(&p, &cfg);
        assert_eq!(v.len(), 1);
        assert!(v[0].inequality.contains("m0"));
    }

    #[test]
    fn cutoff_preserves_inner_range_and_bounds_f() {
        let f = Nonlinearity::cubic(1.0, 1.0, 4.0);
        for i in 0..100 {
            let u = -2.0 + 4.0 * i as f64 / 99.0;
            assert_eq!(f.eval(u), f.raw(u));
        }
        let big = (0..200).map(|i| f.value(-50.0 + i as f64 * 0.5).abs()).fold(0.0, f64::max);
        assert!(big <= 60.0 + 1e-9);
        // derivative consistency of the cut-off map
        for u in [2.5, -3.1, 7.0] {
            let h = 1e-6;
            let fd = (f.value(u + h) - f.value(u - h)) / (2.0 * h);
            assert!((fd - f.derivative(u)).abs() < 1e-5);
        }
    }

    #[test]
    fn json_round_trip() {
        let cfg = base_config();
        let text = serde_json::to_string(&cfg).unwrap();
        assert!(text.contains("\"cutoff_K\""));
        assert_eq!(ProblemConfig::from_json(&text).unwrap(), cfg);
    }
}
