//! Log-domain quadrature of extreme first-passage moments.
//!
//! The m-th moment of the k-th fastest of N searchers is
//! `E[(T_{k,N})^m] = int_0^inf P(T_{k,N} > t^{1/m}) dt` with
//! `P(T_{k,N} > t) = sum_{j<k} C(N,j) (1-S(t))^j S(t)^{N-j}`.
//! Everything is evaluated in the log domain (log-binomials via ln-gamma,
//! log-sum-exp), so N up to 10^10 is routine: the integrand transitions from
//! ~1 to ~0 within about a decade of the crossover time `t*` where
//! `N (1 - S(t*)) ~ k`, which is located first by bisection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::special::{ln_1m_exp, ln_choose, ln_sum_exp};
use crate::survival::{EmpiricalSurvival, SurvivalModel};

/// One extreme-moment request: N searchers, order k, moment power m.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MomentQuery {
    /// Number of searchers (up to ~10^10).
    #[serde(rename = "N")]
    pub n_searchers: u64,
    /// Order statistic: 1 = fastest.
    #[serde(rename = "k")]
    pub order: u64,
    /// Moment power m >= 1.
    #[serde(rename = "m")]
    pub power: u32,
    /// Relative quadrature tolerance.
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    /// Optional integration cutoff in the time variable; the result is then
    /// the capped integral `int_0^{cap^m}` (needed for defective laws such as
    /// outward drift, whose uncapped moments are infinite).
    #[serde(default)]
    pub t_cap: Option<f64>,
}

fn default_rel_tol() -> f64 {
    1e-8
}

impl MomentQuery {
    pub fn new(n_searchers: u64, order: u64, power: u32) -> Self {
        MomentQuery { n_searchers, order, power, rel_tol: default_rel_tol(), t_cap: None }
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_t_cap(mut self, t_cap: f64) -> Self {
        self.t_cap = Some(t_cap);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_searchers < 1 {
            return Err(Error::Domain("N must be >= 1".into()));
        }
        if self.order < 1 || self.order > self.n_searchers {
            return Err(Error::Domain(format!(
                "need 1 <= k <= N, got k={} N={}",
                self.order, self.n_searchers
            )));
        }
        if self.power < 1 {
            return Err(Error::Domain("m must be >= 1".into()));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol <= 1e-2) {
            return Err(Error::Domain(format!(
                "rel_tol must be in (0, 1e-2], got {}",
                self.rel_tol
            )));
        }
        let small_side = self.order.min(self.n_searchers - self.order + 1);
        if small_side > 1_000_000 {
            return Err(Error::Domain(
                "order-statistic sum needs min(k, N-k+1) <= 1e6".into(),
            ));
        }
        if let Some(c) = self.t_cap {
            if !(c > 0.0) {
                return Err(Error::Domain("t_cap must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Quadrature output with its error accounting.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub panels_used: usize,
    /// Bound on the integral mass beyond the last panel (or, when `t_cap`
    /// truncated the integral, the one-more-cap-length bound at the cap).
    pub tail_mass_bound: f64,
}

/// `ln P(T_{k,N} > t)` from `ln S(t)` and `ln(1 - S(t))`.
///
/// Exact reduction for k = 1 (`N ln S`); otherwise a log-sum-exp over the
/// binomial terms, using the complement sum when `k` is closer to `N` so the
/// term count is always `min(k, N-k+1)`.
pub fn log_order_stat_survival(log_s: f64, log_one_minus_s: f64, n: u64, k: u64) -> f64 {
    debug_assert!(log_s <= 0.0 || log_s.is_nan());
    debug_assert!(log_one_minus_s <= 0.0 || log_one_minus_s.is_nan());
    debug_assert!(k >= 1 && k <= n);
    let nf = n as f64;
    if k == 1 {
        return nf * log_s;
    }
    let weight = |j: u64| -> f64 {
        // ln C(N,j) + j ln(1-S) + (N-j) ln S, with 0 * (-inf) treated as 0
        let mut w = ln_choose(nf, j.min(n - j));
        if j > 0 {
            w += j as f64 * log_one_minus_s;
        }
        if j < n {
            w += (nf - j as f64) * log_s;
        }
        w
    };
    if k - 1 <= 1_000_000 {
        // all terms positive: never any cancellation
        let terms: Vec<f64> = (0..k).map(weight).collect();
        ln_sum_exp(&terms)
    } else {
        // huge k: complement sum over the short side (loses ~eps/P of
        // relative accuracy when P is tiny, acceptable for far-tail queries)
        let terms: Vec<f64> = (k..=n).map(weight).collect();
        let tail = ln_sum_exp(&terms);
        if tail >= 0.0 {
            f64::NEG_INFINITY
        } else {
            ln_1m_exp(tail)
        }
    }
}

/// `E[(T_{k,N})^m]` by adaptive log-spaced quadrature.
///
/// Splits `[0, inf)` into a left edge where the integrand is still ~1, a
/// doubling panel sequence through the crossover, and a certified geometric
/// tail. Fails with [`Error::NonIntegrable`] when no integrable tail exists
/// and with [`Error::CensoredTail`] when an empirical model's cutoff hides
/// more order-statistic mass than `10 * rel_tol`.
pub fn extreme_moment(model: &SurvivalModel, q: &MomentQuery) -> Result<QuadratureResult> {
    q.validate()?;
    model.validate()?;
    if let SurvivalModel::Empirical(e) = model {
        return empirical_moment(e, q);
    }
    if let SurvivalModel::HalfLineDrift { length, diffusivity, drift } = model {
        // Outward drift leaves a positive never-hit probability, so every
        // uncapped moment is infinite.
        if *drift > 0.0 && q.t_cap.is_none() {
            return Err(Error::NonIntegrable(format!(
                "drift away from the target leaves never-hit probability \
                 exp(-bL/D) = {:.3e}; moments are infinite (use t_cap for the \
                 capped integral)",
                (-drift * length / diffusivity).exp()
            )));
        }
    }

    let n = q.n_searchers;
    let k = q.order;
    let m = q.power;
    let integrand = |t: f64| -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        let tau = if m == 1 { t } else { t.powf(1.0 / m as f64) };
        let ls = model.log_survival(tau).expect("validated model");
        let l1ms = model.log_one_minus_survival(tau).expect("validated model");
        log_order_stat_survival(ls, l1ms, n, k).exp()
    };

    let upper = q.t_cap.map(|c| c.powi(m as i32));

    // 1. crossover where 1 - S(t*) = k / (N + 1)
    let y_star = (k as f64 / (n as f64 + 1.0)).ln();
    let t_star = locate_crossover(model, y_star)?;
    let a0 = match t_star {
        Some(ts) => ts.powi(m as i32),
        None => match upper {
            // survival never drops low enough for the k-th arrival: the
            // integrand stays near a positive constant
            Some(u) => u,
            None => {
                return Err(Error::NonIntegrable(
                    "1 - S(t) never reaches k/(N+1); the k-th fastest time is \
                     infinite with positive probability"
                        .into(),
                ))
            }
        },
    };

    // 2. left edge: shrink until the integrand is 1 within 0.01 * rel_tol
    let mut a = a0.min(upper.unwrap_or(f64::INFINITY));
    let mut fa = integrand(a);
    let target = 1.0 - 0.01 * q.rel_tol;
    let mut guard = 0;
    while fa < target && guard < 500 && a > 1e-300 {
        a *= 0.25;
        fa = integrand(a);
        guard += 1;
    }
    let mut value = a * fa;
    let mut err = a * (1.0 - fa).max(0.0);

    if let Some(u) = upper {
        if u <= a {
            // whole cap below the left edge: integrand is ~1 on [0, u]
            let fu = integrand(u);
            return Ok(QuadratureResult {
                value: u * fu,
                abs_error_estimate: u * (1.0 - fu).max(0.0) + fu * u,
                panels_used: 0,
                tail_mass_bound: fu * u,
            });
        }
    }

    // 3. doubling panels with a certified geometric tail
    let mut panels = 0usize;
    let mut b = a;
    let mut f_at_b = fa;
    let tail_mass_bound;
    let mut plateau_run = 0usize;
    loop {
        let mut b_next = b * 2.0;
        let mut clipped = false;
        if let Some(u) = upper {
            if b_next >= u {
                b_next = u;
                clipped = true;
            }
        }
        let (pv, pe) = adaptive_simpson(&integrand, b, b_next, q.rel_tol * 1e-3, value);
        value += pv;
        err += pe;
        panels += 1;
        let f_next = integrand(b_next);
        if clipped {
            // truncated by contract; report the one-more-cap-length bound
            tail_mass_bound = f_next * b_next;
            err += tail_mass_bound;
            return Ok(QuadratureResult {
                value,
                abs_error_estimate: err,
                panels_used: panels,
                tail_mass_bound,
            });
        }
        let rho = if f_at_b > 0.0 { f_next / f_at_b } else { 0.0 };
        b = b_next;
        f_at_b = f_next;
        if f_next == 0.0 {
            tail_mass_bound = 0.0;
            break;
        }
        let two_rho = 2.0 * rho;
        if two_rho < 0.98 {
            plateau_run = 0;
            let bound = b * f_next / (1.0 - two_rho);
            if bound <= 0.1 * q.rel_tol * value {
                tail_mass_bound = bound;
                break;
            }
        } else if b > 16.0 * a0 {
            // no decay well past the crossover
            plateau_run += 1;
            if plateau_run > 12 {
                return Err(Error::NonIntegrable(format!(
                    "survival tail decays too slowly for N={n}, k={k} \
                     (doubling ratio {rho:.4} at t^m = {b:.3e})"
                )));
            }
        }
        if b > 1e250 || panels > 4000 {
            return Err(Error::NonIntegrable(format!(
                "no integrable tail found by t^m = {b:.3e} ({panels} panels)"
            )));
        }
    }
    err += tail_mass_bound;
    Ok(QuadratureResult { value, abs_error_estimate: err, panels_used: panels, tail_mass_bound })
}

/// Relative deviation of the quadrature from the asymptotic reference
/// `(L^2/(4 D ln N))^m`: `|quad - asym| / quad`.
pub fn relative_error(
    model: &SurvivalModel,
    q: &MomentQuery,
    length: f64,
    diffusivity: f64,
) -> Result<f64> {
    let quad = extreme_moment(model, q)?;
    let spec = crate::asymptotics::AsymptoticSpec {
        effective_length: length,
        diffusivity,
        power: q.power,
    };
    let asym = crate::asymptotics::extreme_moment_asymptotic(&spec, q.n_searchers)?;
    Ok((quad.value - asym).abs() / quad.value)
}

/// One row of the reactivity sweep.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Fig3Row {
    /// Reactivity (`f64::INFINITY` encodes the perfectly absorbing target).
    pub kappa: f64,
    pub n: u64,
    pub k: u64,
    pub m: u32,
    pub quad: f64,
    pub asymptote: f64,
    pub rel_error: f64,
    pub abs_err_est: f64,
}

/// Sweeps the relative error of the asymptotic formula over reactivities and
/// searcher counts at L = D = 1, k = m = 1. Rows are evaluated in parallel
/// and returned in deterministic (kappa-major) order.
pub fn fig3_sweep(kappas: &[f64], n_grid: &[u64], rel_tol: f64) -> Result<Vec<Fig3Row>> {
    let combos: Vec<(f64, u64)> = kappas
        .iter()
        .flat_map(|&k| n_grid.iter().map(move |&n| (k, n)))
        .collect();
    let rows = exec::map_indexed(combos.len(), |i| -> Result<Fig3Row> {
        let (kappa, n) = combos[i];
        let model = if kappa.is_infinite() {
            SurvivalModel::HalfLine { length: 1.0, diffusivity: 1.0 }
        } else {
            SurvivalModel::HalfLinePartial { length: 1.0, diffusivity: 1.0, reactivity: kappa }
        };
        let q = MomentQuery::new(n, 1, 1).with_rel_tol(rel_tol);
        let quad = extreme_moment(&model, &q)?;
        let asym = 1.0 / (4.0 * (n as f64).ln());
        Ok(Fig3Row {
            kappa,
            n,
            k: 1,
            m: 1,
            quad: quad.value,
            asymptote: asym,
            rel_error: (quad.value - asym).abs() / quad.value,
            abs_err_est: quad.abs_error_estimate,
        })
    });
    rows.into_iter().collect()
}

/// CSV schema: `kappa,N,k,m,quad,asymptote,rel_error,abs_err_est`;
/// infinite reactivity is written as the literal `inf`.
pub fn write_fig3_csv<W: std::io::Write>(rows: &[Fig3Row], mut w: W) -> Result<()> {
    writeln!(w, "kappa,N,k,m,quad,asymptote,rel_error,abs_err_est")?;
    for r in rows {
        let kappa = if r.kappa.is_infinite() { "inf".to_string() } else { format!("{}", r.kappa) };
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            kappa, r.n, r.k, r.m, r.quad, r.asymptote, r.rel_error, r.abs_err_est
        )?;
    }
    Ok(())
}

// --- internals ---------------------------------------------------------------

fn model_time_scale(model: &SurvivalModel) -> f64 {
    match model {
        SurvivalModel::HalfLine { length, diffusivity }
        | SurvivalModel::HalfLineDrift { length, diffusivity, .. }
        | SurvivalModel::HalfLinePartial { length, diffusivity, .. } => {
            length * length / (4.0 * diffusivity)
        }
        SurvivalModel::IntervalEscape { quarter_width, diffusivity } => {
            quarter_width * quarter_width / diffusivity
        }
        SurvivalModel::Empirical(_) => 1.0,
    }
}

/// Bisection on the monotone map `t -> ln(1 - S(t))` for the crossover where
/// `1 - S = k/(N+1)`. Returns `None` when the target level is never reached
/// (defective survival).
fn locate_crossover(model: &SurvivalModel, y_star: f64) -> Result<Option<f64>> {
    let h = |t: f64| -> f64 { model.log_one_minus_survival(t).expect("validated") - y_star };
    let scale = model_time_scale(model);
    let mut lo = scale;
    let mut hi = scale;
    let mut guard = 0;
    while h(lo) > 0.0 {
        lo *= 0.1;
        guard += 1;
        if lo < 1e-300 || guard > 400 {
            // 1 - S already above the level at any representable t
            return Ok(Some(lo));
        }
    }
    guard = 0;
    while h(hi) < 0.0 {
        hi *= 10.0;
        guard += 1;
        if hi > 1e300 || guard > 400 {
            return Ok(None);
        }
    }
    for _ in 0..120 {
        let mid = (lo.ln() + hi.ln()).mul_add(0.5, 0.0).exp();
        if h(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo < 1.0 + 1e-6 {
            break;
        }
    }
    Ok(Some((lo.ln() + hi.ln()).mul_add(0.5, 0.0).exp()))
}

fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    rel: f64,
    accumulated: f64,
) -> (f64, f64) {
    let fa = f(a);
    let fb = f(b);
    let mid = 0.5 * (a + b);
    let fm = f(mid);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    // tolerance relative to whichever is larger: the running integral or this
    // panel's own coarse estimate (near-flat tiny panels terminate at once)
    let eps = rel * accumulated.max(whole.abs()).max(1e-300);
    simpson_rec(f, a, b, fa, fm, fb, whole, eps, 24)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
) -> (f64, f64) {
    let mid = 0.5 * (a + b);
    let lm = 0.5 * (a + mid);
    let rm = 0.5 * (mid + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (mid - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - mid) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * eps {
        (left + right + delta / 15.0, delta.abs() / 15.0)
    } else {
        let (lv, le) = simpson_rec(f, a, mid, fa, flm, fm, left, eps / 2.0, depth - 1);
        let (rv, re) = simpson_rec(f, mid, b, fm, frm, fb, right, eps / 2.0, depth - 1);
        (lv + rv, le + re)
    }
}

/// Exact piecewise-constant integral for empirical step survival.
fn empirical_moment(e: &EmpiricalSurvival, q: &MomentQuery) -> Result<QuadratureResult> {
    let n = q.n_searchers;
    let k = q.order;
    let mi = q.power as i32;
    let p_of = |s: f64| -> f64 {
        if s >= 1.0 {
            return 1.0;
        }
        if s <= 0.0 {
            return 0.0;
        }
        log_order_stat_survival(s.ln(), (1.0 - s).ln(), n, k).exp()
    };
    let mut knots: Vec<f64> = e.uncensored_times().to_vec();
    if let Some(c) = e.cutoff() {
        knots.push(c);
        knots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    }
    knots.dedup();
    let mut value = 0.0;
    let mut prev = 0.0f64;
    let mut p_prev = 1.0f64;
    for &kt in &knots {
        value += p_prev * (kt.powi(mi) - prev.powi(mi));
        p_prev = p_of(e.survival(kt));
        prev = kt;
    }
    let tail_mass_bound = if p_prev > 0.0 {
        if p_prev >= 10.0 * q.rel_tol {
            return Err(Error::CensoredTail(format!(
                "order-statistic survival at the censoring cutoff is {p_prev:.3e} \
                 (>= 10 * rel_tol = {:.3e})",
                10.0 * q.rel_tol
            )));
        }
        p_prev * prev.powi(mi)
    } else {
        0.0
    };
    Ok(QuadratureResult {
        value,
        abs_error_estimate: tail_mass_bound,
        panels_used: knots.len(),
        tail_mass_bound,
    })
}
