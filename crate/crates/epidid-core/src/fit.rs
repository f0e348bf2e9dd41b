//! Weighted least squares with cluster-robust variance.
//!
//! Coefficients minimize `sum_i w_i (y_i - x_i' b)^2`, solved through an
//! orthogonal factorization of the sqrt-weight-scaled design. The clustered
//! covariance is the CR1 sandwich
//!
//! ```text
//! (X'WX)^-1 [ sum_g (X_g' W_g u_g)(X_g' W_g u_g)' ] (X'WX)^-1
//! ```
//!
//! scaled by `(G / (G - 1)) * ((N - 1) / (N - K))`, with residuals `u` on
//! the original (unscaled) response scale.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::design::DesignMatrix;
use crate::error::{Error, Result};
use crate::linalg;
use crate::math;
use crate::series::OutcomeKind;
use crate::tdist::t_quantile;

/// A fitted model.
#[derive(Debug, Clone)]
pub struct FitResult {
    /// Retained coefficient names and estimates, in design column order.
    pub coefficients: Vec<(String, f64)>,
    /// CR1 clustered covariance over the retained coefficients.
    pub vcov_clustered: Option<Vec<Vec<f64>>>,
    /// Residuals on the original response scale.
    pub residuals: Vec<f64>,
    pub n_obs: usize,
    pub n_params: usize,
    pub n_clusters: usize,
    pub adjusted_r2: Option<f64>,
    pub horizon_d: Option<i32>,
    pub outcome_kind: Option<OutcomeKind>,
}

impl FitResult {
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.coefficients.iter().position(|(n, _)| n == name)
    }

    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.coefficients
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, b)| *b)
    }

    /// Clustered standard error of a named coefficient.
    pub fn se(&self, name: &str) -> Option<f64> {
        let i = self.index_of(name)?;
        let v = self.vcov_clustered.as_ref()?;
        Some(math::sqrt(if v[i][i] > 0.0 { v[i][i] } else { 0.0 }))
    }

    /// Point estimate and 95% CI of the interaction coefficient, with the
    /// t distribution on `n_clusters - 1` degrees of freedom.
    pub fn interaction_effect(&self) -> Result<HorizonEffect> {
        let beta3 = self
            .coefficient("x:p")
            .ok_or_else(|| Error::CoefficientMissing {
                column: String::from("x:p"),
            })?;
        let se = self.se("x:p").ok_or_else(|| Error::CoefficientMissing {
            column: String::from("x:p"),
        })?;
        let df = self.n_clusters.saturating_sub(1).max(1);
        let t = t_quantile(0.975, df as f64);
        Ok(HorizonEffect {
            beta3,
            se,
            ci_low: beta3 - t * se,
            ci_high: beta3 + t * se,
            df,
        })
    }
}

/// Interaction estimate with its clustered confidence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HorizonEffect {
    pub beta3: f64,
    pub se: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub df: usize,
}

fn scaled_columns(design: &DesignMatrix) -> (Vec<Vec<f64>>, Vec<f64>) {
    let sw: Vec<f64> = design.weights.iter().map(|w| math::sqrt(*w)).collect();
    let cols = design
        .columns
        .iter()
        .map(|c| c.values.iter().zip(&sw).map(|(v, s)| v * s).collect())
        .collect();
    let y = design
        .response
        .iter()
        .zip(&sw)
        .map(|(v, s)| v * s)
        .collect();
    (cols, y)
}

/// Solve the weighted least squares problem on a pruned design.
///
/// The clustered covariance and adjusted R² are attached separately; see
/// [`cluster_vcov`], [`adjusted_r2`] and the composed [`fit_model`].
pub fn fit_wls(design: &DesignMatrix) -> Result<FitResult> {
    let (cols, ys) = scaled_columns(design);
    let qr = linalg::qr_prune(&cols, design.collinearity_tol);
    if let Some(&j) = qr.dropped.first() {
        return Err(Error::RankDeficient {
            column: design.columns[j].name.clone(),
        });
    }
    let beta = qr.solve(&ys);
    let n = design.n_obs();
    let mut residuals = Vec::with_capacity(n);
    for i in 0..n {
        let mut fitted = 0.0;
        for (j, c) in design.columns.iter().enumerate() {
            fitted += c.values[i] * beta[j];
        }
        residuals.push(design.response[i] - fitted);
    }
    let mut clusters: Vec<&str> = design.cluster_ids.iter().map(|s| s.as_str()).collect();
    clusters.sort_unstable();
    clusters.dedup();
    Ok(FitResult {
        coefficients: design
            .columns
            .iter()
            .zip(&beta)
            .map(|(c, b)| (c.name.clone(), *b))
            .collect(),
        vcov_clustered: None,
        residuals,
        n_obs: n,
        n_params: design.n_params(),
        n_clusters: clusters.len(),
        adjusted_r2: None,
        horizon_d: design.horizon_d,
        outcome_kind: design.outcome_kind,
    })
}

/// CR1 cluster-robust covariance of a fitted model.
pub fn cluster_vcov(fit: &FitResult, design: &DesignMatrix) -> Result<Vec<Vec<f64>>> {
    let g = fit.n_clusters;
    if g < 2 {
        return Err(Error::SingleCluster);
    }
    let n = fit.n_obs;
    let k = fit.n_params;
    if n <= k {
        return Err(Error::DegreesOfFreedom {
            n_obs: n,
            n_params: k,
        });
    }
    let (cols, _) = scaled_columns(design);
    let qr = linalg::qr_prune(&cols, design.collinearity_tol);
    let bread = qr.rtr_inverse();

    // Per-cluster scores s_g = sum_{i in g} w_i * u_i * x_i.
    let mut scores: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for i in 0..n {
        let s = scores
            .entry(design.cluster_ids[i].as_str())
            .or_insert_with(|| vec![0.0; k]);
        let wu = design.weights[i] * fit.residuals[i];
        for (j, c) in design.columns.iter().enumerate() {
            s[j] += wu * c.values[i];
        }
    }
    let mut meat = vec![vec![0.0; k]; k];
    for s in scores.values() {
        for a in 0..k {
            for b in a..k {
                let v = s[a] * s[b];
                meat[a][b] += v;
                if a != b {
                    meat[b][a] += v;
                }
            }
        }
    }
    let correction = (g as f64 / (g as f64 - 1.0)) * ((n as f64 - 1.0) / (n as f64 - k as f64));
    let mut vcov = linalg::sandwich(&bread, &meat);
    for row in vcov.iter_mut() {
        for v in row.iter_mut() {
            *v *= correction;
        }
    }
    Ok(vcov)
}

/// Adjusted weighted R²: `1 - (1 - R²_w) (N - 1) / (N - K)`.
pub fn adjusted_r2(fit: &FitResult, design: &DesignMatrix) -> Result<f64> {
    let n = fit.n_obs;
    let k = fit.n_params;
    if n <= k {
        return Err(Error::DegreesOfFreedom {
            n_obs: n,
            n_params: k,
        });
    }
    let w_total: f64 = design.weights.iter().sum();
    let y_mean: f64 = design
        .response
        .iter()
        .zip(&design.weights)
        .map(|(y, w)| w * y)
        .sum::<f64>()
        / w_total;
    let tss: f64 = design
        .response
        .iter()
        .zip(&design.weights)
        .map(|(y, w)| w * (y - y_mean) * (y - y_mean))
        .sum();
    let rss: f64 = fit
        .residuals
        .iter()
        .zip(&design.weights)
        .map(|(u, w)| w * u * u)
        .sum();
    let r2 = if tss > 0.0 {
        1.0 - rss / tss
    } else if rss <= 1e-300 {
        1.0
    } else {
        0.0
    };
    Ok(1.0 - (1.0 - r2) * (n as f64 - 1.0) / ((n - k) as f64))
}

/// Fit, attach the clustered covariance and the adjusted R².
pub fn fit_model(design: &DesignMatrix) -> Result<FitResult> {
    let mut fit = fit_wls(design)?;
    fit.vcov_clustered = Some(cluster_vcov(&fit, design)?);
    fit.adjusted_r2 = Some(adjusted_r2(&fit, design)?);
    Ok(fit)
}

/// A coefficient mapped to percentage-change space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PercentEffect {
    pub pct: f64,
    pub pct_low: f64,
    pub pct_high: f64,
}

/// `exp(beta) - 1` with a t-based 95% interval mapped through the same
/// transform. `df` is the t distribution's degrees of freedom.
pub fn percent_effect(beta: f64, se: f64, df: usize) -> PercentEffect {
    assert!(se >= 0.0, "standard error must be non-negative");
    assert!(df >= 1, "degrees of freedom must be at least 1");
    let t = t_quantile(0.975, df as f64);
    PercentEffect {
        pct: math::exp(beta) - 1.0,
        pct_low: math::exp(beta - t * se) - 1.0,
        pct_high: math::exp(beta + t * se) - 1.0,
    }
}
