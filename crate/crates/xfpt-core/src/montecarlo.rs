//! Euler–Maruyama simulation of `dX = b(X) dt + sqrt(2D) sigma(X) dW` on a
//! [`MetricField`] domain with reflecting outer boundaries and obstacles and
//! a perfectly or partially absorbing target region.
//!
//! Each step is a straight segment; the segment is walked through the cell
//! grid exactly, so target crossings are detected mid-step and the hit time
//! is linearly interpolated (removing the O(dt) bias that would otherwise
//! dominate extreme statistics). Obstacle or outer-boundary crossings reflect
//! specularly about the violated cell face, up to 8 face events per step,
//! after which the Gaussian increment is redrawn.
//!
//! Samples use counter-based RNG streams derived from `(seed, sample index)`,
//! so parallel and sequential runs produce bit-identical output.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::geodesic::{self, MetricField, RegionSpec, Tensor2};
use crate::moments::{self, MomentQuery};
use crate::survival::EmpiricalSurvival;

/// Drift field `b(x)` (velocity units).
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum DriftSpec {
    #[default]
    None,
    Constant {
        bx: f64,
        by: f64,
    },
    /// Row-major `[bx, by]` per cell.
    PerCell {
        values: Vec<[f64; 2]>,
    },
}

/// Time stepping and seeding for one simulation run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DynamicsSpec {
    #[serde(default)]
    pub drift: DriftSpec,
    pub dt: f64,
    pub max_time: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_seed() -> u64 {
    42
}

impl DynamicsSpec {
    pub fn new(dt: f64, max_time: f64, seed: u64) -> Self {
        DynamicsSpec { drift: DriftSpec::None, dt, max_time, seed }
    }

    pub fn validate(&self, field: &MetricField) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::Config("dt must be positive".into()));
        }
        if !(self.max_time >= self.dt) {
            return Err(Error::Config("max_time must be >= dt".into()));
        }
        if let DriftSpec::PerCell { values } = &self.drift {
            if values.len() != field.nx() * field.ny() {
                return Err(Error::Config("per-cell drift length mismatch".into()));
            }
        }
        let step = (2.0 * field.diffusivity() * field.max_eigenvalue() * self.dt).sqrt();
        if step > field.h() {
            log::warn!(
                "rms step {step:.3e} exceeds the cell size {:.3e}; reduce dt",
                field.h()
            );
        }
        Ok(())
    }
}

/// First-passage-time samples with censoring flags and hit positions,
/// sorted by time.
#[derive(Debug, Clone)]
pub struct FptSampleSet {
    times: Vec<f64>,
    censored: Vec<bool>,
    hits: Vec<[f64; 2]>,
    pub seed: u64,
    pub dt: f64,
    pub max_time: f64,
    pub kappa: f64,
    pub scheme: &'static str,
    /// Total target-boundary contacts across all samples (absorption-rate
    /// diagnostics for partially absorbing targets).
    pub target_contacts: u64,
    pub n_absorbed: u64,
}

impl FptSampleSet {
    pub fn times(&self) -> &[f64] {
        &self.times
    }
    pub fn censored(&self) -> &[bool] {
        &self.censored
    }
    pub fn hits(&self) -> &[[f64; 2]] {
        &self.hits
    }
    pub fn len(&self) -> usize {
        self.times.len()
    }
    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
    pub fn n_censored(&self) -> usize {
        self.censored.iter().filter(|&&c| c).count()
    }

    /// CSV schema `t,censored,hit_x,hit_y`; censored rows leave the hit
    /// columns empty.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,censored,hit_x,hit_y")?;
        for i in 0..self.times.len() {
            if self.censored[i] {
                writeln!(w, "{},1,,", self.times[i])?;
            } else {
                writeln!(w, "{},0,{},{}", self.times[i], self.hits[i][0], self.hits[i][1])?;
            }
        }
        Ok(())
    }

    /// Run manifest (seed, stepping, counts, input hash).
    pub fn manifest(&self, field_hash: &str) -> RunManifest {
        RunManifest {
            scheme: self.scheme,
            seed: self.seed,
            dt: self.dt,
            max_time: self.max_time,
            kappa: if self.kappa.is_infinite() { "inf".into() } else { format!("{}", self.kappa) },
            n_samples: self.times.len(),
            n_censored: self.n_censored(),
            target_contacts: self.target_contacts,
            field_hash: field_hash.to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub scheme: &'static str,
    pub seed: u64,
    pub dt: f64,
    pub max_time: f64,
    pub kappa: String,
    pub n_samples: usize,
    pub n_censored: usize,
    pub target_contacts: u64,
    pub field_hash: String,
}

#[derive(Clone, Copy, PartialEq)]
enum CellKind {
    Free,
    Blocked,
    Target,
}

enum StartDist {
    Point([f64; 2], (usize, usize)),
    Cells(Vec<u32>),
}

struct Engine {
    kind: Vec<CellKind>,
    /// Per-cell noise coefficients `sqrt(2 D dt) * sqrt_spd(a)`.
    step_sigma: Vec<[f64; 3]>,
    /// Per-cell drift displacement `b dt`, or None when drift-free.
    drift_dt: Option<Vec<[f64; 2]>>,
    start: StartDist,
    dt: f64,
    max_time: f64,
    /// Absorption probability per target contact; >= 1 means perfect.
    p_abs: f64,
    h: f64,
    nx: i64,
    ny: i64,
}

struct RawSample {
    time: f64,
    censored: bool,
    hit: [f64; 2],
    contacts: u64,
}

enum Traverse {
    Moved([f64; 2], (i64, i64)),
    Absorbed { frac: f64, point: [f64; 2] },
    Redraw,
}

impl Engine {
    fn new(
        field: &MetricField,
        regions: &RegionSpec,
        dyn_spec: &DynamicsSpec,
        kappa: f64,
    ) -> Result<Self> {
        field.validate_default()?;
        dyn_spec.validate(field)?;
        if !(kappa > 0.0) {
            return Err(Error::Domain("kappa must be positive (or infinite)".into()));
        }
        let p_abs = if kappa.is_infinite() {
            2.0
        } else {
            let p = kappa * (std::f64::consts::PI * dyn_spec.dt / field.diffusivity()).sqrt();
            if p > 0.5 {
                return Err(Error::Config(format!(
                    "absorption probability per contact {p:.3} > 0.5; decrease dt \
                     for reactivity kappa = {kappa}"
                )));
            }
            p
        };
        let masks = regions.rasterize(field)?;
        let n = field.nx() * field.ny();
        let mut kind = vec![CellKind::Free; n];
        for i in 0..n {
            let (ix, iy) = (i % field.nx(), i / field.nx());
            if field.is_obstacle(ix, iy) {
                kind[i] = CellKind::Blocked;
            } else if masks.target_mask[i] {
                kind[i] = CellKind::Target;
            }
        }
        let sqrt_2ddt = (2.0 * field.diffusivity() * dyn_spec.dt).sqrt();
        let step_sigma: Vec<[f64; 3]> = field
            .tensors()
            .iter()
            .map(|t| {
                let s = t.sqrt_spd();
                [sqrt_2ddt * s.a11, sqrt_2ddt * s.a12, sqrt_2ddt * s.a22]
            })
            .collect();
        let drift_dt = match &dyn_spec.drift {
            DriftSpec::None => None,
            DriftSpec::Constant { bx, by } => {
                Some(vec![[bx * dyn_spec.dt, by * dyn_spec.dt]; n])
            }
            DriftSpec::PerCell { values } => Some(
                values
                    .iter()
                    .map(|[bx, by]| [bx * dyn_spec.dt, by * dyn_spec.dt])
                    .collect(),
            ),
        };
        let start = if masks.source_cells.len() == 1 {
            let c = masks.source_cells[0] as usize;
            let (ix, iy) = (c % field.nx(), c / field.nx());
            let (x, y) = field.center(ix, iy);
            StartDist::Point([x, y], (ix, iy))
        } else {
            StartDist::Cells(masks.source_cells.clone())
        };
        Ok(Engine {
            kind,
            step_sigma,
            drift_dt,
            start,
            dt: dyn_spec.dt,
            max_time: dyn_spec.max_time,
            p_abs,
            h: field.h(),
            nx: field.nx() as i64,
            ny: field.ny() as i64,
        })
    }

    fn cell_index(&self, cx: i64, cy: i64) -> usize {
        (cy * self.nx + cx) as usize
    }

    fn draw_start(&self, rng: &mut ChaCha8Rng) -> ([f64; 2], (i64, i64)) {
        match &self.start {
            StartDist::Point(p, (ix, iy)) => (*p, (*ix as i64, *iy as i64)),
            StartDist::Cells(cells) => {
                let c = cells[rng.gen_range(0..cells.len())] as usize;
                let ix = (c % self.nx as usize) as i64;
                let iy = (c / self.nx as usize) as i64;
                let ux: f64 = rng.gen::<f64>() - 0.5;
                let uy: f64 = rng.gen::<f64>() - 0.5;
                let x = (ix as f64 + 0.5 + ux * 0.999) * self.h;
                let y = (iy as f64 + 0.5 + uy * 0.999) * self.h;
                ([x, y], (ix, iy))
            }
        }
    }

    fn run_sample<R: Recorder>(&self, sample_idx: u64, seed: u64, rec: &mut R) -> RawSample {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(sample_idx.wrapping_add(1));
        let (mut pos, (mut cx, mut cy)) = self.draw_start(&mut rng);
        let mut t = 0.0f64;
        let mut contacts = 0u64;
        let mut step: u64 = 0;
        let mut idx = self.cell_index(cx, cy);
        let mut x_lo = cx as f64 * self.h;
        let mut x_hi = x_lo + self.h;
        let mut y_lo = cy as f64 * self.h;
        let mut y_hi = y_lo + self.h;
        while t < self.max_time {
            rec.record(step, t, pos);
            let z1: f64 = rng.sample(StandardNormal);
            let z2: f64 = rng.sample(StandardNormal);
            let sc = &self.step_sigma[idx];
            let mut dx = sc[0] * z1 + sc[1] * z2;
            let mut dy = sc[1] * z1 + sc[2] * z2;
            if let Some(bdt) = &self.drift_dt {
                dx += bdt[idx][0];
                dy += bdt[idx][1];
            }
            let nxf = pos[0] + dx;
            let nyf = pos[1] + dy;
            if nxf >= x_lo && nxf < x_hi && nyf >= y_lo && nyf < y_hi {
                // segment stays inside one convex cell: no events possible
                pos = [nxf, nyf];
                t += self.dt;
                step += 1;
                continue;
            }
            match self.traverse(pos, (cx, cy), [dx, dy], &mut rng, &mut contacts) {
                Traverse::Moved(p, c) => {
                    pos = p;
                    (cx, cy) = c;
                    idx = self.cell_index(cx, cy);
                    x_lo = cx as f64 * self.h;
                    x_hi = x_lo + self.h;
                    y_lo = cy as f64 * self.h;
                    y_hi = y_lo + self.h;
                    t += self.dt;
                    step += 1;
                }
                Traverse::Absorbed { frac, point } => {
                    let t_hit = t + frac * self.dt;
                    rec.record(step + 1, t_hit, point);
                    if t_hit <= self.max_time {
                        return RawSample { time: t_hit, censored: false, hit: point, contacts };
                    }
                    return RawSample {
                        time: self.max_time,
                        censored: true,
                        hit: [f64::NAN, f64::NAN],
                        contacts,
                    };
                }
                Traverse::Redraw => {}
            }
        }
        rec.record(step, self.max_time, pos);
        RawSample { time: self.max_time, censored: true, hit: [f64::NAN, f64::NAN], contacts }
    }

    /// Walks one Euler step segment through the grid, handling reflections
    /// and target contacts at their exact crossing points.
    fn traverse(
        &self,
        start: [f64; 2],
        cell: (i64, i64),
        d: [f64; 2],
        rng: &mut ChaCha8Rng,
        contacts: &mut u64,
    ) -> Traverse {
        let mut p = start;
        let (mut cx, mut cy) = cell;
        let mut rem = d;
        let total_len = (d[0] * d[0] + d[1] * d[1]).sqrt();
        if total_len == 0.0 {
            return Traverse::Moved(p, (cx, cy));
        }
        let mut done_len = 0.0f64;
        let mut face_events = 0u32;
        for _ in 0..256 {
            let x_lo = cx as f64 * self.h;
            let x_hi = x_lo + self.h;
            let y_lo = cy as f64 * self.h;
            let y_hi = y_lo + self.h;
            let tx = if rem[0] > 0.0 {
                ((x_hi - p[0]) / rem[0]).max(0.0)
            } else if rem[0] < 0.0 {
                ((x_lo - p[0]) / rem[0]).max(0.0)
            } else {
                f64::INFINITY
            };
            let ty = if rem[1] > 0.0 {
                ((y_hi - p[1]) / rem[1]).max(0.0)
            } else if rem[1] < 0.0 {
                ((y_lo - p[1]) / rem[1]).max(0.0)
            } else {
                f64::INFINITY
            };
            let (u, x_axis) = if tx <= ty { (tx, true) } else { (ty, false) };
            if u >= 1.0 {
                return Traverse::Moved([p[0] + rem[0], p[1] + rem[1]], (cx, cy));
            }
            // crossing point, snapped exactly onto the violated face
            let rem_len = (rem[0] * rem[0] + rem[1] * rem[1]).sqrt();
            let mut cross = [p[0] + u * rem[0], p[1] + u * rem[1]];
            let (ncx, ncy) = if x_axis {
                cross[0] = if rem[0] > 0.0 { x_hi } else { x_lo };
                (if rem[0] > 0.0 { cx + 1 } else { cx - 1 }, cy)
            } else {
                cross[1] = if rem[1] > 0.0 { y_hi } else { y_lo };
                (cx, if rem[1] > 0.0 { cy + 1 } else { cy - 1 })
            };
            let seg_len = u * rem_len;
            let next_kind = if ncx < 0 || ncy < 0 || ncx >= self.nx || ncy >= self.ny {
                CellKind::Blocked
            } else {
                self.kind[self.cell_index(ncx, ncy)]
            };
            match next_kind {
                CellKind::Free => {
                    p = cross;
                    rem = [(1.0 - u) * rem[0], (1.0 - u) * rem[1]];
                    done_len += seg_len;
                    cx = ncx;
                    cy = ncy;
                }
                CellKind::Target => {
                    *contacts += 1;
                    let absorb = self.p_abs >= 1.0 || rng.gen::<f64>() < self.p_abs;
                    if absorb {
                        let frac = ((done_len + seg_len) / total_len).min(1.0);
                        return Traverse::Absorbed { frac, point: cross };
                    }
                    p = cross;
                    rem = [(1.0 - u) * rem[0], (1.0 - u) * rem[1]];
                    if x_axis {
                        rem[0] = -rem[0];
                    } else {
                        rem[1] = -rem[1];
                    }
                    done_len += seg_len;
                    face_events += 1;
                    if face_events > 8 {
                        return Traverse::Redraw;
                    }
                }
                CellKind::Blocked => {
                    p = cross;
                    rem = [(1.0 - u) * rem[0], (1.0 - u) * rem[1]];
                    if x_axis {
                        rem[0] = -rem[0];
                    } else {
                        rem[1] = -rem[1];
                    }
                    done_len += seg_len;
                    face_events += 1;
                    if face_events > 8 {
                        return Traverse::Redraw;
                    }
                }
            }
        }
        Traverse::Redraw
    }
}

trait Recorder {
    fn record(&mut self, step: u64, t: f64, pos: [f64; 2]);
}

struct NoRecord;

impl Recorder for NoRecord {
    #[inline(always)]
    fn record(&mut self, _: u64, _: f64, _: [f64; 2]) {}
}

struct StrideRecord {
    stride: u64,
    out: Vec<[f64; 3]>,
}

impl Recorder for StrideRecord {
    fn record(&mut self, step: u64, t: f64, pos: [f64; 2]) {
        if step % self.stride == 0 || t >= 0.0 && step == u64::MAX {
            self.out.push([t, pos[0], pos[1]]);
        }
    }
}

/// Simulates `n_samples` independent first-passage times.
///
/// `kappa` is the target reactivity: `f64::INFINITY` absorbs on first
/// contact, finite values absorb with probability
/// `p_abs = kappa sqrt(pi dt / D)` per contact (the first-order Robin-rule
/// discretization; an error is raised if that exceeds 0.5).
pub fn simulate_fpt(
    field: &MetricField,
    regions: &RegionSpec,
    dyn_spec: &DynamicsSpec,
    kappa: f64,
    n_samples: usize,
) -> Result<FptSampleSet> {
    if n_samples == 0 {
        return Err(Error::Config("n_samples must be positive".into()));
    }
    let engine = Engine::new(field, regions, dyn_spec, kappa)?;
    let seed = dyn_spec.seed;
    let raw: Vec<RawSample> = exec::map_indexed(n_samples, |i| {
        engine.run_sample(i as u64, seed, &mut NoRecord)
    });
    let mut order: Vec<usize> = (0..n_samples).collect();
    order.sort_by(|&a, &b| {
        raw[a]
            .time
            .partial_cmp(&raw[b].time)
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut times = Vec::with_capacity(n_samples);
    let mut censored = Vec::with_capacity(n_samples);
    let mut hits = Vec::with_capacity(n_samples);
    let mut contacts = 0u64;
    let mut absorbed = 0u64;
    for &i in &order {
        times.push(raw[i].time);
        censored.push(raw[i].censored);
        hits.push(raw[i].hit);
        contacts += raw[i].contacts;
        if !raw[i].censored {
            absorbed += 1;
        }
    }
    Ok(FptSampleSet {
        times,
        censored,
        hits,
        seed,
        dt: dyn_spec.dt,
        max_time: dyn_spec.max_time,
        kappa,
        scheme: "euler-maruyama",
        target_contacts: contacts,
        n_absorbed: absorbed,
    })
}

/// Plug-in extreme-moment estimate with a bootstrap standard error.
#[derive(Debug, Clone, Copy)]
pub struct MomentEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_bootstrap: usize,
}

/// Estimates `E[(T_{k,N})^m]` from samples via the empirical-survival
/// plug-in integral (`N` may exceed the sample count), with a seeded
/// nonparametric bootstrap for the standard error.
pub fn estimate_extreme_moment(
    samples: &FptSampleSet,
    q: &MomentQuery,
) -> Result<MomentEstimate> {
    estimate_extreme_moment_with(samples, q, 200)
}

pub fn estimate_extreme_moment_with(
    samples: &FptSampleSet,
    q: &MomentQuery,
    n_bootstrap: usize,
) -> Result<MomentEstimate> {
    let emp = EmpiricalSurvival::new(samples.times().to_vec(), samples.censored().to_vec())?;
    let model = crate::survival::SurvivalModel::Empirical(emp);
    let point = moments::extreme_moment(&model, q)?;
    let n = samples.len();
    let boot_seed = samples.seed ^ 0x9E37_79B9_7F4A_7C15;
    let values = exec::map_indexed(n_bootstrap, |rep| -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(boot_seed);
        rng.set_stream(rep as u64 + 1);
        let mut times = Vec::with_capacity(n);
        let mut cens = Vec::with_capacity(n);
        for _ in 0..n {
            let j = rng.gen_range(0..n);
            times.push(samples.times()[j]);
            cens.push(samples.censored()[j]);
        }
        let emp = EmpiricalSurvival::new(times, cens)?;
        let m = crate::survival::SurvivalModel::Empirical(emp);
        Ok(moments::extreme_moment(&m, q)?.value)
    });
    let mut boot = Vec::with_capacity(n_bootstrap);
    for v in values {
        boot.push(v?);
    }
    let mean = boot.iter().sum::<f64>() / boot.len() as f64;
    let var = boot.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
        / (boot.len().saturating_sub(1)).max(1) as f64;
    Ok(MomentEstimate { value: point.value, std_error: var.sqrt(), n_bootstrap })
}

/// Recorded trajectories plus which one arrived first.
#[derive(Debug, Clone)]
pub struct TraceResult {
    /// One polyline per path, rows `[t, x, y]`.
    pub paths: Vec<Vec<[f64; 3]>>,
    pub times: Vec<f64>,
    pub censored: Vec<bool>,
    /// Index of the fastest absorbed path, if any.
    pub fastest: Option<usize>,
    /// Maximum local-metric distance of the fastest path from the geodesic
    /// solver's optimal polyline.
    pub max_metric_deviation: Option<f64>,
}

/// Records `n_paths` full trajectories (every `record_stride`-th step).
pub fn trajectory_trace(
    field: &MetricField,
    regions: &RegionSpec,
    dyn_spec: &DynamicsSpec,
    kappa: f64,
    n_paths: usize,
    record_stride: u64,
) -> Result<TraceResult> {
    if n_paths == 0 || record_stride == 0 {
        return Err(Error::Config("n_paths and record_stride must be positive".into()));
    }
    let engine = Engine::new(field, regions, dyn_spec, kappa)?;
    let seed = dyn_spec.seed;
    let runs: Vec<(Vec<[f64; 3]>, f64, bool)> = exec::map_indexed(n_paths, |i| {
        let mut rec = StrideRecord { stride: record_stride, out: Vec::new() };
        let s = engine.run_sample(i as u64, seed, &mut rec);
        (rec.out, s.time, s.censored)
    });
    let mut paths = Vec::with_capacity(n_paths);
    let mut times = Vec::with_capacity(n_paths);
    let mut censored = Vec::with_capacity(n_paths);
    for (p, t, c) in runs {
        paths.push(p);
        times.push(t);
        censored.push(c);
    }
    let fastest = times
        .iter()
        .enumerate()
        .filter(|(i, _)| !censored[*i])
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i);
    let max_metric_deviation = match fastest {
        Some(fi) => {
            let geo = geodesic::geodesic_distance(field, regions)?;
            if geo.reachable {
                let mut worst = 0.0f64;
                for rec in &paths[fi] {
                    let p = [rec[1], rec[2]];
                    let mut best = f64::INFINITY;
                    for q in &geo.path {
                        let (pc, qc) = match (field.cell_of(p[0], p[1]), field.cell_of(q[0], q[1]))
                        {
                            (Some(a), Some(b)) => (a, b),
                            _ => continue,
                        };
                        let t_avg = mean_tensor(field.tensor(pc.0, pc.1), field.tensor(qc.0, qc.1));
                        let d = t_avg.metric_norm(p[0] - q[0], p[1] - q[1]);
                        best = best.min(d);
                    }
                    worst = worst.max(best);
                }
                Some(worst)
            } else {
                None
            }
        }
        None => None,
    };
    Ok(TraceResult { paths, times, censored, fastest, max_metric_deviation })
}

fn mean_tensor(a: Tensor2, b: Tensor2) -> Tensor2 {
    Tensor2 {
        a11: 0.5 * (a.a11 + b.a11),
        a12: 0.5 * (a.a12 + b.a12),
        a22: 0.5 * (a.a22 + b.a22),
    }
}

/// Trajectory CSV: `path_id,step,t,x,y`.
pub fn write_trajectories_csv<W: std::io::Write>(trace: &TraceResult, mut w: W) -> Result<()> {
    writeln!(w, "path_id,step,t,x,y")?;
    for (id, path) in trace.paths.iter().enumerate() {
        for (step, row) in path.iter().enumerate() {
            writeln!(w, "{id},{step},{},{},{}", row[0], row[1], row[2])?;
        }
    }
    Ok(())
}
