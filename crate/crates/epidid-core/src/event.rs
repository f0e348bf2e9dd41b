//! Event-study sweep: one interaction estimate per horizon.
//!
//! Negative horizons put the "post" observation before the order date, so
//! their estimates act as placebos; an identification failure at some `d`
//! (insufficient coverage, degenerate design) is recorded as a gap rather
//! than failing the sweep.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::design::{build_design, DesignOptions};
use crate::error::{Error, Result};
use crate::fit::{fit_model, percent_effect};
use crate::panel::PanelDataset;

/// One fitted horizon of the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct EventStudyPoint {
    /// Days between the order date and the post observation.
    pub d: i32,
    pub beta3: f64,
    pub se: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub pct: f64,
    pub pct_low: f64,
    pub pct_high: f64,
}

/// A horizon that could not be fitted, with the reason.
#[derive(Debug, Clone, PartialEq)]
pub struct EventStudyGap {
    pub d: i32,
    pub reason: String,
}

/// The full sweep.
#[derive(Debug, Clone)]
pub struct EventStudy {
    pub points: Vec<EventStudyPoint>,
    pub gaps: Vec<EventStudyGap>,
}

/// Fit the interaction coefficient at every horizon in `[d_min, d_max]`,
/// excluding the degenerate `d = 0`.
///
/// `build_panel` supplies the panel for each horizon; confidence intervals
/// use the t distribution with (clusters - 1) degrees of freedom.
pub fn event_study<F>(
    mut build_panel: F,
    d_min: i32,
    d_max: i32,
    opts: &DesignOptions,
) -> Result<EventStudy>
where
    F: FnMut(i32) -> Result<PanelDataset>,
{
    let mut points = Vec::new();
    let mut gaps = Vec::new();
    for d in d_min..=d_max {
        if d == 0 {
            continue;
        }
        match fit_horizon(&mut build_panel, d, opts) {
            Ok(point) => points.push(point),
            Err(e) => gaps.push(EventStudyGap {
                d,
                reason: e.to_string(),
            }),
        }
    }
    if points.is_empty() {
        return Err(Error::AllHorizonsInfeasible);
    }
    Ok(EventStudy { points, gaps })
}

fn fit_horizon<F>(build_panel: &mut F, d: i32, opts: &DesignOptions) -> Result<EventStudyPoint>
where
    F: FnMut(i32) -> Result<PanelDataset>,
{
    let panel = build_panel(d)?;
    let design = build_design(&panel, opts)?;
    let fit = fit_model(&design)?;
    let effect = fit.interaction_effect()?;
    let pe = percent_effect(effect.beta3, effect.se, effect.df);
    Ok(EventStudyPoint {
        d,
        beta3: effect.beta3,
        se: effect.se,
        ci_low: effect.ci_low,
        ci_high: effect.ci_high,
        pct: pe.pct,
        pct_low: pe.pct_low,
        pct_high: pe.pct_high,
    })
}
