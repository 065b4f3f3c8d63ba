//! Log-log regression of measured distances against the model rates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_FIT_ROWS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateModel {
    Tau,
    TauLog,
}

/// One measured value at one `eps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub eps: f64,
    pub tau: f64,
    pub tau_log: f64,
    pub p_dist: f64,
    pub quantity: String,
    pub value: f64,
    pub mesh_n: usize,
    pub dt: Option<f64>,
}

impl RateRow {
    pub fn abscissa(&self, model: RateModel) -> f64 {
        match model {
            RateModel::Tau => self.tau,
            RateModel::TauLog => self.tau_log,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Least squares of `log value` against `log tau` (or `log tau_log`). Rows
/// with nonpositive values are left out; fewer than four remaining rows is
/// an error listing the excluded row indices.
pub fn fit_rate(rows: &[RateRow], model: RateModel) -> Result<LineFit> {
    let excluded: Vec<usize> = rows
        .iter()
        .enumerate()
        .filter(|(_, r)| !(r.value > 0.0 && r.abscissa(model) > 0.0))
        .map(|(i, _)| i)
        .collect();
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.value > 0.0 && r.abscissa(model) > 0.0)
        .map(|r| (r.abscissa(model).ln(), r.value.ln()))
        .collect();
    if pts.len() < MIN_FIT_ROWS {
        return Err(Error::FitRejected {
            reason: format!("{} positive rows, need {MIN_FIT_ROWS}", pts.len()),
            excluded,
        });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::FitRejected {
            reason: "all abscissae coincide".into(),
            excluded,
        });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).min(1.0) };
    Ok(LineFit { slope, intercept, r2 })
}

/// Fit of one quantity with its acceptance verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantityFit {
    pub quantity: String,
    pub model: RateModel,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub rows: usize,
    /// Rows with nonpositive values, reported instead of fitted.
    pub excluded: Vec<usize>,
    pub min_slope: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct RateReport {
    pub rows: Vec<RateRow>,
    pub fits: Vec<QuantityFit>,
}

impl RateReport {
    pub fn quantity(&self, name: &str) -> Vec<RateRow> {
        self.rows.iter().filter(|r| r.quantity == name).cloned().collect()
    }

    /// Fit `name` and record a one-sided verdict `slope >= min_slope`.
    pub fn fit(&mut self, name: &str, model: RateModel, min_slope: f64) -> Result<&QuantityFit> {
        let rows = self.quantity(name);
        let line = fit_rate(&rows, model)?;
        let excluded = rows
            .iter()
            .enumerate()
            .filter(|(_, r)| r.value <= 0.0)
            .map(|(i, _)| i)
            .collect();
        self.fits.push(QuantityFit {
            quantity: name.to_string(),
            model,
            slope: line.slope,
            intercept: line.intercept,
            r2: line.r2,
            rows: rows.len(),
            excluded,
            min_slope,
            pass: line.slope >= min_slope,
        });
        Ok(self.fits.last().expect("just pushed"))
    }

    pub fn extend(&mut self, other: RateReport) {
        self.rows.extend(other.rows);
        self.fits.extend(other.fits);
    }

    pub fn rows_csv(&self) -> String {
        rows_csv(&self.rows)
    }
}

/// `eps,tau,tau_log,p_dist,quantity,value,mesh_n,dt`
pub fn rows_csv(rows: &[RateRow]) -> String {
    let mut out = String::from("eps,tau,tau_log,p_dist,quantity,value,mesh_n,dt\n");
    for r in rows {
        let dt = r.dt.map(|d| format!("{d:e}")).unwrap_or_default();
        out.push_str(&format!(
            "{:.17e},{:.17e},{:.17e},{:.17e},{},{:.17e},{},{}\n",
            r.eps, r.tau, r.tau_log, r.p_dist, r.quantity, r.value, r.mesh_n, dt
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(values: impl Fn(f64) -> f64) -> Vec<RateRow> {
        [0.3, 0.2, 0.1, 0.05, 0.02]
            .iter()
            .map(|&tau: &f64| RateRow {
                eps: tau * tau,
                tau,
                tau_log: tau * tau.ln().abs(),
                p_dist: 0.0,
                quantity: "q".into(),
                value: values(tau),
                mesh_n: 64,
                dt: None,
            })
            .collect()
    }

    #[test]
    fn exact_power_laws() {
        let fit = fit_rate(&rows(|t| t), RateModel::Tau).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-12);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
        let fit = fit_rate(&rows(|t| 3.0 * t * t), RateModel::Tau).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn zeros_are_excluded_then_rejected() {
        let mut r = rows(|t| t);
        r[1].value = 0.0;
        let fit = fit_rate(&r, RateModel::Tau).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-12);
        r[3].value = -1.0;
        match fit_rate(&r, RateModel::Tau) {
            Err(Error::FitRejected { excluded, .. }) => assert_eq!(excluded, vec![1, 3]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn report_verdict_is_one_sided() {
        let mut rep = RateReport { rows: rows(|t| t * t), fits: vec![] };
        assert!(rep.fit("q", RateModel::Tau, 0.85).unwrap().pass);
        let mut rep = RateReport { rows: rows(|t| t.sqrt()), fits: vec![] };
        assert!(!rep.fit("q", RateModel::Tau, 0.85).unwrap().pass);
    }
}
