//! Exact and empirical survival probabilities `S(t) = P(tau > t)`.
//!
//! Each exact variant provides three evaluation paths that stay accurate
//! across the extreme short-time regime where `1 - S(t)` can be as small as
//! `exp(-L^2/(4 D t))`:
//!
//! * [`SurvivalModel::survival`] — direct value, relative accuracy ~1e-12
//!   away from underflow;
//! * [`SurvivalModel::log_one_minus_survival`] — `ln(1 - S(t))`, valid even
//!   when `S` is within 1e-300 of 1 (asymptotics of erfc, never `1 - S` by
//!   subtraction);
//! * [`SurvivalModel::log_survival`] — `ln S(t)`, valid when `S` underflows.
//!
//! The short-time log-limit diagnostic fits `-t ln(1 - S(t)) = C + c1 t ln t
//! + c2 t` and recovers the constant governing extreme first-passage moments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{erf, erfc, erfcx, erfcx_diff, ln_1m_exp, ln_erfc, ln_sum_exp};

/// Tagged family of survival functions.
///
/// JSON form uses the field names `L`, `D`, `b`, `kappa`, `l`, e.g.
/// `{"variant": "HalfLinePartial", "L": 1.0, "D": 1.0, "kappa": 10.0}`.
/// Empirical models are not JSON-serialized; they round-trip through a
/// `t,censored` CSV instead (see [`EmpiricalSurvival`]).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "variant")]
pub enum SurvivalModel {
    /// Absorbing origin on the half-line, start at distance `L`:
    /// `S(t) = erf(L / sqrt(4 D t))`.
    HalfLine {
        #[serde(rename = "L")]
        length: f64,
        #[serde(rename = "D")]
        diffusivity: f64,
    },
    /// Drifted half-line (inverse-Gaussian first-passage law). `b > 0`
    /// points away from the target at the origin:
    /// `1 - S(t) = erfc((L+bt)/sqrt(4Dt))/2 + exp(-bL/D) erfc((L-bt)/sqrt(4Dt))/2`.
    HalfLineDrift {
        #[serde(rename = "L")]
        length: f64,
        #[serde(rename = "D")]
        diffusivity: f64,
        #[serde(rename = "b")]
        drift: f64,
    },
    /// Partially absorbing origin with reactivity `kappa`:
    /// `S_k(t) = S(t) + exp(-L^2/(4Dt)) erfcx((2 kappa t + L)/sqrt(4Dt))`,
    /// the erfcx form keeping the product finite for all arguments.
    HalfLinePartial {
        #[serde(rename = "L")]
        length: f64,
        #[serde(rename = "D")]
        diffusivity: f64,
        #[serde(rename = "kappa")]
        reactivity: f64,
    },
    /// Escape from the interval `(-2l, 2l)` started at the center.
    IntervalEscape {
        #[serde(rename = "l")]
        quarter_width: f64,
        #[serde(rename = "D")]
        diffusivity: f64,
    },
    /// Right-continuous step survival from samples.
    #[serde(skip)]
    Empirical(EmpiricalSurvival),
}

impl SurvivalModel {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64, name: &str| -> Result<()> {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
            Ok(())
        };
        match self {
            SurvivalModel::HalfLine { length, diffusivity } => {
                pos(*length, "L")?;
                pos(*diffusivity, "D")
            }
            SurvivalModel::HalfLineDrift { length, diffusivity, drift } => {
                pos(*length, "L")?;
                pos(*diffusivity, "D")?;
                if !drift.is_finite() {
                    return Err(Error::Domain("b must be finite".into()));
                }
                Ok(())
            }
            SurvivalModel::HalfLinePartial { length, diffusivity, reactivity } => {
                pos(*length, "L")?;
                pos(*diffusivity, "D")?;
                pos(*reactivity, "kappa")
            }
            SurvivalModel::IntervalEscape { quarter_width, diffusivity } => {
                pos(*quarter_width, "l")?;
                pos(*diffusivity, "D")
            }
            SurvivalModel::Empirical(e) => {
                if e.n_total == 0 {
                    return Err(Error::EmptySamples);
                }
                Ok(())
            }
        }
    }

    /// `S(t)` for `t >= 0`.
    pub fn survival(&self, t: f64) -> Result<f64> {
        self.validate()?;
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("t must be >= 0, got {t}")));
        }
        if t == 0.0 {
            return Ok(match self {
                SurvivalModel::Empirical(e) => e.survival(0.0),
                _ => 1.0,
            });
        }
        Ok(match self {
            SurvivalModel::HalfLine { length, diffusivity } => {
                erf(length / (4.0 * diffusivity * t).sqrt())
            }
            SurvivalModel::HalfLineDrift { length, diffusivity, drift } => {
                drift_survival(*length, *diffusivity, *drift, t)
            }
            SurvivalModel::HalfLinePartial { length, diffusivity, reactivity } => {
                let u = length / (4.0 * diffusivity * t).sqrt();
                let w = u + reactivity * (t / diffusivity).sqrt();
                erf(u) + (-u * u).exp() * erfcx(w)
            }
            SurvivalModel::IntervalEscape { quarter_width, diffusivity } => {
                interval_survival(*quarter_width, *diffusivity, t)
            }
            SurvivalModel::Empirical(e) => e.survival(t),
        })
    }

    /// `ln(1 - S(t))` for `t > 0`, accurate deep into the short-time tail.
    pub fn log_one_minus_survival(&self, t: f64) -> Result<f64> {
        self.validate()?;
        if !(t > 0.0) {
            return Err(Error::Domain(format!("t must be > 0, got {t}")));
        }
        Ok(match self {
            SurvivalModel::HalfLine { length, diffusivity } => {
                ln_erfc(length / (4.0 * diffusivity * t).sqrt())
            }
            SurvivalModel::HalfLineDrift { length, diffusivity, drift } => {
                drift_log_one_minus(*length, *diffusivity, *drift, t)
            }
            SurvivalModel::HalfLinePartial { length, diffusivity, reactivity } => {
                // 1 - S_k = exp(-u^2) (erfcx(u) - erfcx(w)), w = u + kappa sqrt(t/D)
                let u = length / (4.0 * diffusivity * t).sqrt();
                let w = u + reactivity * (t / diffusivity).sqrt();
                -u * u + erfcx_diff(u, w).ln()
            }
            SurvivalModel::IntervalEscape { quarter_width, diffusivity } => {
                interval_log_one_minus(*quarter_width, *diffusivity, t)
            }
            SurvivalModel::Empirical(e) => {
                let s = e.survival(t);
                if s >= 1.0 {
                    f64::NEG_INFINITY
                } else {
                    (1.0 - s).ln()
                }
            }
        })
    }

    /// `ln S(t)` for `t >= 0`, accurate when `S` itself would underflow.
    pub fn log_survival(&self, t: f64) -> Result<f64> {
        self.validate()?;
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("t must be >= 0, got {t}")));
        }
        if t == 0.0 {
            return Ok(match self {
                SurvivalModel::Empirical(e) => e.survival(0.0).ln(),
                _ => 0.0,
            });
        }
        Ok(match self {
            SurvivalModel::HalfLine { length, diffusivity } => {
                let u = length / (4.0 * diffusivity * t).sqrt();
                if u >= 4.0 {
                    ln_1m_exp(ln_erfc(u))
                } else {
                    erf(u).ln()
                }
            }
            SurvivalModel::HalfLineDrift { length, diffusivity, drift } => {
                drift_log_survival(*length, *diffusivity, *drift, t)
            }
            SurvivalModel::HalfLinePartial { length, diffusivity, reactivity } => {
                let u = length / (4.0 * diffusivity * t).sqrt();
                let w = u + reactivity * (t / diffusivity).sqrt();
                if u >= 4.0 {
                    ln_1m_exp(-u * u + erfcx_diff(u, w).ln())
                } else {
                    (erf(u) + (-u * u).exp() * erfcx(w)).ln()
                }
            }
            SurvivalModel::IntervalEscape { quarter_width, diffusivity } => {
                interval_log_survival(*quarter_width, *diffusivity, t)
            }
            SurvivalModel::Empirical(e) => e.survival(t).ln(),
        })
    }

    /// Least-squares estimate of `C = -lim_{t->0} t ln(1 - S(t))` from
    /// `g(t) = -t ln(1-S(t))` on a log-spaced grid, using the exact small-t
    /// structure `g(t) = C + c1 t ln t + c2 t`.
    pub fn short_time_log_limit(
        &self,
        t_min: f64,
        t_max: f64,
        points: usize,
        max_residual: f64,
    ) -> Result<ShortTimeFit> {
        if !(t_min > 0.0) || !(t_max > t_min) {
            return Err(Error::Domain(format!(
                "need 0 < t_min < t_max, got ({t_min}, {t_max})"
            )));
        }
        if points < 4 {
            return Err(Error::Domain("need at least 4 fit points".into()));
        }
        let ratio = (t_max / t_min).ln() / (points - 1) as f64;
        // normal equations for basis {1, t ln t, t}
        let mut ata = [[0.0f64; 3]; 3];
        let mut atg = [0.0f64; 3];
        let mut gs = Vec::with_capacity(points);
        for i in 0..points {
            let t = t_min * ((i as f64) * ratio).exp();
            let g = -t * self.log_one_minus_survival(t)?;
            let basis = [1.0, t * t.ln(), t];
            for r in 0..3 {
                for c in 0..3 {
                    ata[r][c] += basis[r] * basis[c];
                }
                atg[r] += basis[r] * g;
            }
            gs.push((t, g));
        }
        let coeffs = solve3(ata, atg)
            .ok_or_else(|| Error::Config("singular normal equations in short-time fit".into()))?;
        let mut ss = 0.0;
        for &(t, g) in &gs {
            let fit = coeffs[0] + coeffs[1] * t * t.ln() + coeffs[2] * t;
            ss += (g - fit) * (g - fit);
        }
        let residual = (ss / points as f64).sqrt();
        if residual > max_residual {
            return Err(Error::FitFailure { residual, threshold: max_residual });
        }
        Ok(ShortTimeFit { c: coeffs[0], residual })
    }

    pub fn to_json(&self) -> Result<String> {
        if matches!(self, SurvivalModel::Empirical(_)) {
            return Err(Error::Config(
                "empirical models serialize to CSV, not JSON".into(),
            ));
        }
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: SurvivalModel = serde_json::from_str(s)?;
        m.validate()?;
        Ok(m)
    }
}

/// Result of [`SurvivalModel::short_time_log_limit`].
#[derive(Debug, Clone, Copy)]
pub struct ShortTimeFit {
    /// Estimated limit constant `C`.
    pub c: f64,
    /// Root-mean-square fit residual.
    pub residual: f64,
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let mut piv = col;
        for r in col + 1..3 {
            if a[r][col].abs() > a[piv][col].abs() {
                piv = r;
            }
        }
        if a[piv][col] == 0.0 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..3 {
            let f = a[r][col] / a[col][col];
            for c in col..3 {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let mut s = b[r];
        for c in r + 1..3 {
            s -= a[r][c] * x[c];
        }
        x[r] = s / a[r][r];
    }
    Some(x)
}

// --- drifted half-line -----------------------------------------------------

fn drift_pieces(length: f64, diffusivity: f64, drift: f64, t: f64) -> (f64, f64, f64) {
    let s = (4.0 * diffusivity * t).sqrt();
    let z1 = (length + drift * t) / s;
    let z2 = (length - drift * t) / s;
    (z1, z2, -drift * length / diffusivity)
}

fn drift_one_minus(length: f64, diffusivity: f64, drift: f64, t: f64) -> f64 {
    let (z1, z2, le) = drift_pieces(length, diffusivity, drift, t);
    0.5 * erfc(z1) + 0.5 * le.exp() * erfc(z2)
}

fn drift_survival(length: f64, diffusivity: f64, drift: f64, t: f64) -> f64 {
    let q = drift_one_minus(length, diffusivity, drift, t);
    if q < 0.5 {
        1.0 - q
    } else {
        drift_log_survival(length, diffusivity, drift, t).exp()
    }
}

fn drift_log_one_minus(length: f64, diffusivity: f64, drift: f64, t: f64) -> f64 {
    let (z1, z2, le) = drift_pieces(length, diffusivity, drift, t);
    let ln2 = std::f64::consts::LN_2;
    ln_sum_exp(&[ln_erfc(z1) - ln2, le + ln_erfc(z2) - ln2])
}

fn drift_log_survival(length: f64, diffusivity: f64, drift: f64, t: f64) -> f64 {
    let q = drift_one_minus(length, diffusivity, drift, t);
    if q < 0.5 {
        (-q).ln_1p()
    } else {
        // S = erfc(-z1)/2 - exp(-bL/D) erfc(z2)/2, both terms small when the
        // hit probability is nearly exhausted (drift toward the target).
        let (z1, z2, le) = drift_pieces(length, diffusivity, drift, t);
        let ln2 = std::f64::consts::LN_2;
        let a = ln_erfc(-z1) - ln2;
        let b = le + ln_erfc(z2) - ln2;
        a + ln_1m_exp(b - a)
    }
}

// --- interval escape ---------------------------------------------------------

// Branch point between the image (short-time) and eigenfunction (long-time)
// representations, in units of theta = D t / l^2. Both sides agree to ~1e-14
// here; the continuity test pins 1e-10.
const INTERVAL_THETA_SPLIT: f64 = 0.5;

fn interval_one_minus_short(v: f64) -> f64 {
    // 1 - S = 2 [erfc(v) - erfc(3v) + erfc(5v) - ...], v = l / sqrt(D t)
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 0..8u32 {
        let arg = (2 * j + 1) as f64 * v;
        let term = erfc(arg);
        sum += sign * term;
        if term < 1e-18 * sum.abs() || term == 0.0 {
            break;
        }
        sign = -sign;
    }
    2.0 * sum
}

fn interval_spectral(theta: f64) -> f64 {
    // S = (4/pi) sum (-1)^n/(2n+1) exp(-(2n+1)^2 pi^2 theta / 16)
    let base = std::f64::consts::PI * std::f64::consts::PI * theta / 16.0;
    let mut sum = 0.0;
    let mut sign = 1.0;
    for n in 0..200u32 {
        let m = (2 * n + 1) as f64;
        let term = (-(m * m) * base).exp() / m;
        sum += sign * term;
        if term < 1e-18 * sum.abs() {
            break;
        }
        sign = -sign;
    }
    4.0 / std::f64::consts::PI * sum
}

fn interval_survival(l: f64, d: f64, t: f64) -> f64 {
    let theta = d * t / (l * l);
    if theta < INTERVAL_THETA_SPLIT {
        let v = 1.0 / theta.sqrt();
        1.0 - interval_one_minus_short(v)
    } else {
        interval_spectral(theta)
    }
}

fn interval_log_one_minus(l: f64, d: f64, t: f64) -> f64 {
    let theta = d * t / (l * l);
    if theta < INTERVAL_THETA_SPLIT {
        let v = 1.0 / theta.sqrt();
        // factor erfc(v) out of the alternating image sum
        let l0 = ln_erfc(v);
        let mut corr = 0.0;
        let mut sign = -1.0;
        for j in 1..8u32 {
            let r = (ln_erfc((2 * j + 1) as f64 * v) - l0).exp();
            if r == 0.0 {
                break;
            }
            corr += sign * r;
            sign = -sign;
        }
        std::f64::consts::LN_2 + l0 + corr.ln_1p()
    } else {
        (-interval_spectral(theta)).ln_1p()
    }
}

fn interval_log_survival(l: f64, d: f64, t: f64) -> f64 {
    let theta = d * t / (l * l);
    if theta < INTERVAL_THETA_SPLIT {
        ln_1m_exp(interval_log_one_minus(l, d, t))
    } else {
        // ln S = ln(4/pi) - lambda_0 t + ln(1 - e^{-8 base}/3 + e^{-24 base}/5 - ...)
        let base = std::f64::consts::PI * std::f64::consts::PI * theta / 16.0;
        let mut corr = 0.0;
        let mut sign = -1.0;
        for n in 1..200u32 {
            let m = (2 * n + 1) as f64;
            let term = (-(m * m - 1.0) * base).exp() / m;
            if term < 1e-18 {
                break;
            }
            corr += sign * term;
            sign = -sign;
        }
        (4.0 / std::f64::consts::PI).ln() - base + corr.ln_1p()
    }
}

// --- empirical ---------------------------------------------------------------

/// Step-function survival estimate from (possibly right-censored) samples.
///
/// `S_hat(t) = (#uncensored samples > t + #censored samples) / n`: a censored
/// observation at the cutoff is known only to exceed it, so it counts as
/// "greater" for every `t`, making the estimator upper-biased beyond the
/// cutoff (recorded in the metadata).
#[derive(Debug, Clone)]
pub struct EmpiricalSurvival {
    /// Sorted uncensored sample times.
    times: Vec<f64>,
    n_total: usize,
    n_censored: usize,
    cutoff: Option<f64>,
}

impl EmpiricalSurvival {
    pub fn new(mut times: Vec<f64>, censored: Vec<bool>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::EmptySamples);
        }
        if times.len() != censored.len() {
            return Err(Error::Config("times/censored length mismatch".into()));
        }
        if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::Domain("sample times must be finite and >= 0".into()));
        }
        let n_total = times.len();
        let mut cutoff: Option<f64> = None;
        let mut uncensored = Vec::with_capacity(n_total);
        for (i, t) in times.drain(..).enumerate() {
            if censored[i] {
                cutoff = Some(cutoff.map_or(t, |c: f64| c.max(t)));
            } else {
                uncensored.push(t);
            }
        }
        uncensored.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(Self {
            n_censored: n_total - uncensored.len(),
            times: uncensored,
            n_total,
            cutoff,
        })
    }

    /// Right-continuous `S_hat(t)`.
    pub fn survival(&self, t: f64) -> f64 {
        let gt = self.times.len() - self.times.partition_point(|&x| x <= t);
        (gt + self.n_censored) as f64 / self.n_total as f64
    }

    pub fn n_total(&self) -> usize {
        self.n_total
    }

    pub fn n_censored(&self) -> usize {
        self.n_censored
    }

    pub fn cutoff(&self) -> Option<f64> {
        self.cutoff
    }

    /// Sorted uncensored times.
    pub fn uncensored_times(&self) -> &[f64] {
        &self.times
    }

    pub fn to_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,censored")?;
        for t in &self.times {
            writeln!(w, "{t},0")?;
        }
        if let Some(c) = self.cutoff {
            for _ in 0..self.n_censored {
                writeln!(w, "{c},1")?;
            }
        }
        Ok(())
    }

    /// Reads a `t,censored` CSV (extra columns ignored, so sample-set CSVs
    /// from the Monte Carlo module parse too).
    pub fn from_csv<R: std::io::BufRead>(r: R) -> Result<Self> {
        let mut times = Vec::new();
        let mut censored = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if lineno == 0 && line.starts_with('t') {
                continue;
            }
            let mut parts = line.split(',');
            let t: f64 = parts
                .next()
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::Config(format!("bad CSV line {}", lineno + 1)))?;
            let c = match parts.next().map(|s| s.trim()) {
                Some("1") | Some("true") => true,
                Some("0") | Some("false") | None | Some("") => false,
                Some(other) => {
                    return Err(Error::Config(format!(
                        "bad censored flag {other:?} on line {}",
                        lineno + 1
                    )))
                }
            };
            times.push(t);
            censored.push(c);
        }
        Self::new(times, censored)
    }
}

/// Builds the `Empirical` survival variant from a Monte Carlo sample set.
pub fn empirical_survival(samples: &crate::montecarlo::FptSampleSet) -> Result<SurvivalModel> {
    let emp = EmpiricalSurvival::new(samples.times().to_vec(), samples.censored().to_vec())?;
    Ok(SurvivalModel::Empirical(emp))
}

/// Exact inverse-transform sampler for the half-line law: maps a uniform
/// variate `u` in (0, 1) to a time whose survival is `erf(L/sqrt(4 D tau))`.
pub fn halfline_inverse_transform(u: f64, length: f64, diffusivity: f64) -> f64 {
    let z = crate::special::erf_inv(u);
    length * length / (4.0 * diffusivity * z * z)
}
