//! Closed-form large-N reference `(L^2 / (4 D ln N))^m` and trend reports for
//! its invariance claims: the limit is the same regardless of drift,
//! reactivity, or the order k, so quadrature/reference ratios for any such
//! variant should drift toward 1 as N grows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moments::{extreme_moment, MomentQuery};
use crate::survival::SurvivalModel;

/// Inputs of the asymptotic formula. Deliberately has no `k`, drift, or
/// reactivity parameter: the limit does not depend on them.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AsymptoticSpec {
    /// Effective (geodesic) source-to-target length.
    #[serde(rename = "L")]
    pub effective_length: f64,
    #[serde(rename = "D")]
    pub diffusivity: f64,
    /// Moment power m.
    #[serde(rename = "m", default = "default_power")]
    pub power: u32,
}

fn default_power() -> u32 {
    1
}

/// `(L^2 / (4 D ln N))^m` for N >= 2.
pub fn extreme_moment_asymptotic(spec: &AsymptoticSpec, n: u64) -> Result<f64> {
    if !(spec.effective_length > 0.0) {
        return Err(Error::Domain("effective length must be positive".into()));
    }
    if !(spec.diffusivity > 0.0) {
        return Err(Error::Domain("diffusivity must be positive".into()));
    }
    if n <= 1 {
        return Err(Error::Domain(format!("need N >= 2 (ln N > 0), got {n}")));
    }
    let base = spec.effective_length * spec.effective_length
        / (4.0 * spec.diffusivity * (n as f64).ln());
    Ok(base.powi(spec.power as i32))
}

/// One (variant, N) entry of an invariance report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InvarianceRow {
    pub variant: String,
    pub n: u64,
    /// extreme_moment(variant) / extreme_moment(base) at this N.
    pub ratio: f64,
    pub abs_err_est: f64,
}

#[derive(Debug, Clone)]
pub struct InvarianceReport {
    pub rows: Vec<InvarianceRow>,
    /// Per variant: does |ratio - 1| shrink monotonically over the last three
    /// grid points and end below 0.5?
    pub approaching_one: Vec<(String, bool)>,
}

/// Moment ratios of each variant against a base model over an N grid.
///
/// All models must share the same L and D for the ratios to be meaningful;
/// that is the caller's contract. Defective variants (outward drift) need a
/// `t_cap` in `q_defaults`.
pub fn invariance_report(
    base: &SurvivalModel,
    variants: &[(String, SurvivalModel)],
    n_grid: &[u64],
    q_defaults: &MomentQuery,
) -> Result<InvarianceReport> {
    if n_grid.is_empty() {
        return Err(Error::Config("empty N grid".into()));
    }
    let mut base_vals = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let q = MomentQuery { n_searchers: n, ..*q_defaults };
        base_vals.push(extreme_moment(base, &q)?);
    }
    let mut rows = Vec::new();
    let mut approaching_one = Vec::new();
    for (label, model) in variants {
        let mut deviations = Vec::with_capacity(n_grid.len());
        for (i, &n) in n_grid.iter().enumerate() {
            let q = MomentQuery { n_searchers: n, ..*q_defaults };
            let r = extreme_moment(model, &q)?;
            let ratio = r.value / base_vals[i].value;
            if !ratio.is_finite() {
                return Err(Error::NonIntegrable(format!(
                    "non-finite ratio for variant {label} at N={n}"
                )));
            }
            deviations.push((ratio - 1.0).abs());
            rows.push(InvarianceRow {
                variant: label.clone(),
                n,
                ratio,
                abs_err_est: r.abs_error_estimate / base_vals[i].value,
            });
        }
        let m = deviations.len();
        let trending = if m >= 3 {
            deviations[m - 3] >= deviations[m - 2] && deviations[m - 2] >= deviations[m - 1]
        } else {
            true
        };
        approaching_one.push((label.clone(), trending && deviations[m - 1] < 0.5));
    }
    Ok(InvarianceReport { rows, approaching_one })
}

/// CSV schema: `variant,N,ratio,abs_err_est`.
pub fn write_invariance_csv<W: std::io::Write>(rows: &[InvarianceRow], mut w: W) -> Result<()> {
    writeln!(w, "variant,N,ratio,abs_err_est")?;
    for r in rows {
        writeln!(w, "{},{},{},{}", r.variant, r.n, r.ratio, r.abs_err_est)?;
    }
    Ok(())
}
