//! Regression design construction with deterministic collinearity pruning.
//!
//! Columns are emitted in a fixed priority order and pruned greedily: a
//! column exactly collinear (to `collinearity_tol`, relative to its own
//! norm, under the weighted inner product) with the columns retained before
//! it is moved to `dropped_columns`. The priority order is
//!
//! 1. intercept
//! 2. cohort fixed effects (stratum or per-group indicators, ascending,
//!    smallest level omitted as the reference)
//! 3. `x` (treated), `p` (period), `x:p` (interaction)
//! 4. `dlog_tests` (when requested)
//! 5. date indicators (ascending, earliest omitted as the reference)
//!
//! so indicator blocks can never absorb the coefficients of interest, and
//! among indicators the later-emitted column always loses. With per-group
//! fixed effects the group block saturates the treated/control split, so
//! `x` itself is the column the pruner removes; the stratum default leaves
//! `x` identified.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::groups::GroupId;
use crate::linalg;
use crate::panel::PanelDataset;
use crate::series::OutcomeKind;

/// Which fixed effects implement the cohort intercepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FeMode {
    /// One effect per stratum (treated cohort and its matched control rows).
    #[default]
    Stratum,
    /// One effect per county group; absorbs the treated indicator.
    PerGroup,
}

/// Options controlling design construction.
#[derive(Debug, Clone)]
pub struct DesignOptions {
    pub include_tests: bool,
    pub fe_mode: FeMode,
    /// Relative tolerance on the weighted projection residual.
    pub collinearity_tol: f64,
}

impl Default for DesignOptions {
    fn default() -> Self {
        DesignOptions {
            include_tests: true,
            fe_mode: FeMode::Stratum,
            collinearity_tol: 1e-10,
        }
    }
}

/// A named regressor.
#[derive(Debug, Clone)]
pub struct DesignColumn {
    pub name: String,
    pub values: Vec<f64>,
}

/// A pruned, full-rank weighted design.
#[derive(Debug, Clone)]
pub struct DesignMatrix {
    pub response: Vec<f64>,
    /// Retained regressors, in emission order.
    pub columns: Vec<DesignColumn>,
    pub weights: Vec<f64>,
    pub cluster_ids: Vec<String>,
    /// Names removed for exact collinearity, in emission order.
    pub dropped_columns: Vec<String>,
    /// Indicator levels omitted a priori as references.
    pub reference_levels: Vec<String>,
    /// Number of columns emitted before pruning.
    pub n_emitted: usize,
    pub collinearity_tol: f64,
    pub horizon_d: Option<i32>,
    pub outcome_kind: Option<OutcomeKind>,
}

impl DesignMatrix {
    pub fn n_obs(&self) -> usize {
        self.response.len()
    }

    pub fn n_params(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, name: &str) -> Option<&DesignColumn> {
        self.columns.iter().find(|c| c.name == name)
    }

    /// Assemble a design from raw parts, pruning collinear columns.
    ///
    /// Used directly by tests and by callers with hand-built regressors;
    /// `build_design` is the panel-facing front end.
    pub fn from_parts(
        columns: Vec<DesignColumn>,
        response: Vec<f64>,
        weights: Vec<f64>,
        cluster_ids: Vec<String>,
        collinearity_tol: f64,
    ) -> Result<DesignMatrix> {
        let n = response.len();
        assert!(n > 0, "design needs at least one row");
        assert!(
            weights.len() == n && cluster_ids.len() == n,
            "row vectors must align"
        );
        for c in &columns {
            assert!(c.values.len() == n, "column {} length mismatch", c.name);
        }
        let n_emitted = columns.len();
        let sw: Vec<f64> = weights.iter().map(|w| crate::math::sqrt(*w)).collect();
        let scaled: Vec<Vec<f64>> = columns
            .iter()
            .map(|c| c.values.iter().zip(&sw).map(|(v, s)| v * s).collect())
            .collect();
        let qr = linalg::qr_prune(&scaled, collinearity_tol);
        let dropped_columns: Vec<String> = qr
            .dropped
            .iter()
            .map(|&j| columns[j].name.clone())
            .collect();
        let kept_set = qr.kept;
        let mut retained = Vec::with_capacity(kept_set.len());
        for (j, col) in columns.into_iter().enumerate() {
            if kept_set.contains(&j) {
                retained.push(col);
            }
        }
        Ok(DesignMatrix {
            response,
            columns: retained,
            weights,
            cluster_ids,
            dropped_columns,
            reference_levels: Vec::new(),
            n_emitted,
            collinearity_tol,
            horizon_d: None,
            outcome_kind: None,
        })
    }
}

/// Build the regression design for an assembled panel.
pub fn build_design(panel: &PanelDataset, opts: &DesignOptions) -> Result<DesignMatrix> {
    let rows = &panel.rows;
    let n = rows.len();
    debug_assert!(n > 0, "assemble_panel never yields an empty panel");

    let mut columns: Vec<DesignColumn> = Vec::new();
    let mut references: Vec<String> = Vec::new();
    let ones = alloc::vec![1.0; n];
    columns.push(DesignColumn {
        name: "intercept".to_string(),
        values: ones,
    });

    match opts.fe_mode {
        FeMode::Stratum => {
            let mut strata: Vec<_> = rows.iter().map(|r| r.stratum_id).collect();
            strata.sort();
            strata.dedup();
            for (i, s) in strata.iter().enumerate() {
                if i == 0 {
                    references.push(format!("stratum:{s}"));
                    continue;
                }
                columns.push(DesignColumn {
                    name: format!("stratum:{s}"),
                    values: rows
                        .iter()
                        .map(|r| if r.stratum_id == *s { 1.0 } else { 0.0 })
                        .collect(),
                });
            }
        }
        FeMode::PerGroup => {
            let mut gids: Vec<GroupId> = rows.iter().map(|r| r.group_id).collect();
            gids.sort();
            gids.dedup();
            for (i, g) in gids.iter().enumerate() {
                if i == 0 {
                    references.push(format!("group:{g}"));
                    continue;
                }
                columns.push(DesignColumn {
                    name: format!("group:{g}"),
                    values: rows
                        .iter()
                        .map(|r| if r.group_id == *g { 1.0 } else { 0.0 })
                        .collect(),
                });
            }
        }
    }

    columns.push(DesignColumn {
        name: "x".to_string(),
        values: rows.iter().map(|r| r.treated_x as f64).collect(),
    });
    columns.push(DesignColumn {
        name: "p".to_string(),
        values: rows.iter().map(|r| r.period_p as f64).collect(),
    });
    columns.push(DesignColumn {
        name: "x:p".to_string(),
        values: rows
            .iter()
            .map(|r| (r.treated_x * r.period_p) as f64)
            .collect(),
    });

    if opts.include_tests {
        let mut values = Vec::with_capacity(n);
        for r in rows {
            values.push(r.dlog_tests.ok_or(Error::MissingTestsCovariate)?);
        }
        columns.push(DesignColumn {
            name: "dlog_tests".to_string(),
            values,
        });
    }

    let mut dates: Vec<_> = rows.iter().map(|r| r.date).collect();
    dates.sort();
    dates.dedup();
    for (i, dt) in dates.iter().enumerate() {
        if i == 0 {
            references.push(format!("date:{dt}"));
            continue;
        }
        columns.push(DesignColumn {
            name: format!("date:{dt}"),
            values: rows
                .iter()
                .map(|r| if r.date == *dt { 1.0 } else { 0.0 })
                .collect(),
        });
    }

    let response = rows.iter().map(|r| r.outcome_dy).collect();
    let weights = rows.iter().map(|r| r.weight).collect();
    let cluster_ids = rows.iter().map(|r| r.cluster_id.to_string()).collect();
    let mut design = DesignMatrix::from_parts(
        columns,
        response,
        weights,
        cluster_ids,
        opts.collinearity_tol,
    )?;
    design.reference_levels = references;
    design.horizon_d = Some(panel.horizon_d);
    design.outcome_kind = Some(panel.outcome_kind);
    Ok(design)
}
