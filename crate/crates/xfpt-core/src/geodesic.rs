//! Shortest-path lengths on a 2-D grid under the Riemannian metric given by
//! the inverse diffusivity tensor `a^{-1}(x)`, with reflecting obstacles.
//!
//! Paths are penalized through regions of slow diffusion: a segment `dx`
//! costs `sqrt(dx^T a^{-1} dx)`, which reduces to Euclidean length where `a`
//! is the identity. The solver is multi-source Dijkstra over a k-neighbor
//! stencil (default order 2 = 16 neighbors; higher orders shrink the angular
//! discretization error), which is exact on the graph and handles anisotropy
//! because each edge evaluates the local quadratic form directly.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::asymptotics::AsymptoticSpec;
use crate::error::{Error, Result};

/// Symmetric 2x2 diffusivity tensor `[[a11, a12], [a12, a22]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tensor2 {
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
}

impl Tensor2 {
    pub const IDENTITY: Tensor2 = Tensor2 { a11: 1.0, a12: 0.0, a22: 1.0 };

    pub fn isotropic(a: f64) -> Self {
        Tensor2 { a11: a, a12: 0.0, a22: a }
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a12
    }

    /// Eigenvalues, ascending.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let tr = self.a11 + self.a22;
        let disc = ((self.a11 - self.a22) * (self.a11 - self.a22)
            + 4.0 * self.a12 * self.a12)
            .sqrt();
        (0.5 * (tr - disc), 0.5 * (tr + disc))
    }

    /// Principal (symmetric positive-definite) square root.
    pub fn sqrt_spd(&self) -> Tensor2 {
        let s = self.det().sqrt();
        let u = (self.a11 + self.a22 + 2.0 * s).sqrt();
        Tensor2 { a11: (self.a11 + s) / u, a12: self.a12 / u, a22: (self.a22 + s) / u }
    }

    /// `sqrt(d^T a^{-1} d)` for a displacement `d = (dx, dy)`.
    pub fn metric_norm(&self, dx: f64, dy: f64) -> f64 {
        let det = self.det();
        ((dx * dx * self.a22 - 2.0 * dx * dy * self.a12 + dy * dy * self.a11) / det).sqrt()
    }

    fn mean(&self, other: &Tensor2) -> Tensor2 {
        Tensor2 {
            a11: 0.5 * (self.a11 + other.a11),
            a12: 0.5 * (self.a12 + other.a12),
            a22: 0.5 * (self.a22 + other.a22),
        }
    }
}

/// Grid of diffusivity tensors with an obstacle mask.
///
/// Cell `(ix, iy)` covers `[ix h, (ix+1) h) x [iy h, (iy+1) h)`; all physical
/// queries use the cell centers.
#[derive(Debug, Clone)]
pub struct MetricField {
    nx: usize,
    ny: usize,
    h: f64,
    diffusivity: f64,
    tensors: Vec<Tensor2>,
    obstacles: Vec<bool>,
}

impl MetricField {
    pub fn uniform(nx: usize, ny: usize, h: f64, diffusivity: f64, tensor: Tensor2) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::Config("grid dimensions must be positive".into()));
        }
        if !(h > 0.0) || !(diffusivity > 0.0) {
            return Err(Error::Domain("h and D must be positive".into()));
        }
        Ok(MetricField {
            nx,
            ny,
            h,
            diffusivity,
            tensors: vec![tensor; nx * ny],
            obstacles: vec![false; nx * ny],
        })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn diffusivity(&self) -> f64 {
        self.diffusivity
    }
    pub fn width(&self) -> f64 {
        self.nx as f64 * self.h
    }
    pub fn height(&self) -> f64 {
        self.ny as f64 * self.h
    }

    pub fn idx(&self, ix: usize, iy: usize) -> usize {
        debug_assert!(ix < self.nx && iy < self.ny);
        iy * self.nx + ix
    }

    pub fn tensor(&self, ix: usize, iy: usize) -> Tensor2 {
        self.tensors[self.idx(ix, iy)]
    }

    pub fn tensors(&self) -> &[Tensor2] {
        &self.tensors
    }

    pub fn set_tensor(&mut self, ix: usize, iy: usize, t: Tensor2) {
        let i = self.idx(ix, iy);
        self.tensors[i] = t;
    }

    /// Applies a tensor to every cell whose center satisfies `pred(x, y)`.
    pub fn set_tensor_where<F: Fn(f64, f64) -> bool>(&mut self, pred: F, t: Tensor2) {
        for iy in 0..self.ny {
            for ix in 0..self.nx {
                let (x, y) = self.center(ix, iy);
                if pred(x, y) {
                    self.tensors[iy * self.nx + ix] = t;
                }
            }
        }
    }

    pub fn is_obstacle(&self, ix: usize, iy: usize) -> bool {
        self.obstacles[self.idx(ix, iy)]
    }

    pub fn set_obstacle(&mut self, ix: usize, iy: usize, blocked: bool) {
        let i = self.idx(ix, iy);
        self.obstacles[i] = blocked;
    }

    pub fn set_obstacle_where<F: Fn(f64, f64) -> bool>(&mut self, pred: F) {
        for iy in 0..self.ny {
            for ix in 0..self.nx {
                let (x, y) = self.center(ix, iy);
                if pred(x, y) {
                    self.obstacles[iy * self.nx + ix] = true;
                }
            }
        }
    }

    pub fn center(&self, ix: usize, iy: usize) -> (f64, f64) {
        ((ix as f64 + 0.5) * self.h, (iy as f64 + 0.5) * self.h)
    }

    /// Cell containing a physical point, or None outside the grid.
    pub fn cell_of(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        if x < 0.0 || y < 0.0 {
            return None;
        }
        let ix = (x / self.h) as usize;
        let iy = (y / self.h) as usize;
        if ix >= self.nx || iy >= self.ny {
            return None;
        }
        Some((ix, iy))
    }

    /// Checks symmetry-positive-definiteness with eigenvalues inside
    /// `[eig_lo, eig_hi]` for every non-obstacle cell.
    pub fn validate(&self, eig_lo: f64, eig_hi: f64) -> Result<()> {
        if !(eig_lo > 0.0 && eig_hi >= eig_lo) {
            return Err(Error::Config("need 0 < eig_lo <= eig_hi".into()));
        }
        for iy in 0..self.ny {
            for ix in 0..self.nx {
                if self.obstacles[iy * self.nx + ix] {
                    continue;
                }
                let t = self.tensors[iy * self.nx + ix];
                let (lo, hi) = t.eigenvalues();
                if !(lo >= eig_lo && hi <= eig_hi) {
                    return Err(Error::Domain(format!(
                        "tensor at ({ix},{iy}) has eigenvalues ({lo:.3e}, {hi:.3e}) \
                         outside [{eig_lo:.3e}, {eig_hi:.3e}]"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn validate_default(&self) -> Result<()> {
        self.validate(1e-9, 1e9)
    }

    /// Largest tensor eigenvalue over non-obstacle cells.
    pub fn max_eigenvalue(&self) -> f64 {
        let mut m: f64 = 0.0;
        for (i, t) in self.tensors.iter().enumerate() {
            if !self.obstacles[i] {
                m = m.max(t.eigenvalues().1);
            }
        }
        m
    }
}

/// Geometric primitive rasterized to cells by the center-inside rule.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum RegionPrimitive {
    Disk { cx: f64, cy: f64, r: f64 },
    Rect { x0: f64, y0: f64, x1: f64, y1: f64 },
    Point { x: f64, y: f64 },
    Cells { cells: Vec<[usize; 2]> },
}

impl RegionPrimitive {
    fn contains_center(&self, x: f64, y: f64) -> bool {
        match self {
            RegionPrimitive::Disk { cx, cy, r } => {
                (x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r
            }
            RegionPrimitive::Rect { x0, y0, x1, y1 } => {
                x >= *x0 && x <= *x1 && y >= *y0 && y <= *y1
            }
            RegionPrimitive::Point { .. } | RegionPrimitive::Cells { .. } => false,
        }
    }
}

/// Source set U0 and target set UT.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionSpec {
    pub sources: Vec<RegionPrimitive>,
    pub targets: Vec<RegionPrimitive>,
}

/// Rasterized regions.
#[derive(Debug, Clone)]
pub struct RegionMasks {
    pub source_mask: Vec<bool>,
    pub target_mask: Vec<bool>,
    pub source_cells: Vec<u32>,
    pub target_cells: Vec<u32>,
}

impl RegionSpec {
    pub fn rasterize(&self, field: &MetricField) -> Result<RegionMasks> {
        let source_mask = rasterize_primitives(&self.sources, field, "source")?;
        let target_mask = rasterize_primitives(&self.targets, field, "target")?;
        let mut source_cells = Vec::new();
        let mut target_cells = Vec::new();
        for i in 0..source_mask.len() {
            if source_mask[i] && target_mask[i] {
                return Err(Error::Config(
                    "source and target regions intersect (U0 and UT must be disjoint)".into(),
                ));
            }
            if source_mask[i] {
                source_cells.push(i as u32);
            }
            if target_mask[i] {
                target_cells.push(i as u32);
            }
        }
        if source_cells.is_empty() {
            return Err(Error::Config("source region rasterizes to no cells".into()));
        }
        if target_cells.is_empty() {
            return Err(Error::Config("target region rasterizes to no cells".into()));
        }
        Ok(RegionMasks { source_mask, target_mask, source_cells, target_cells })
    }
}

fn rasterize_primitives(
    prims: &[RegionPrimitive],
    field: &MetricField,
    what: &str,
) -> Result<Vec<bool>> {
    let mut mask = vec![false; field.nx * field.ny];
    let mut mark = |ix: usize, iy: usize| -> Result<()> {
        if field.is_obstacle(ix, iy) {
            return Err(Error::Config(format!(
                "{what} region intersects an obstacle cell at ({ix},{iy})"
            )));
        }
        mask[iy * field.nx + ix] = true;
        Ok(())
    };
    for p in prims {
        match p {
            RegionPrimitive::Point { x, y } => {
                let (ix, iy) = field.cell_of(*x, *y).ok_or_else(|| {
                    Error::Config(format!("{what} point ({x},{y}) lies outside the grid"))
                })?;
                mark(ix, iy)?;
            }
            RegionPrimitive::Cells { cells } => {
                for &[ix, iy] in cells {
                    if ix >= field.nx || iy >= field.ny {
                        return Err(Error::Config(format!(
                            "{what} cell ({ix},{iy}) outside the grid"
                        )));
                    }
                    mark(ix, iy)?;
                }
            }
            _ => {
                for iy in 0..field.ny {
                    for ix in 0..field.nx {
                        let (x, y) = field.center(ix, iy);
                        if p.contains_center(x, y) {
                            mark(ix, iy)?;
                        }
                    }
                }
            }
        }
    }
    Ok(mask)
}

/// Solver metadata attached to every geodesic result.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolverMeta {
    pub neighborhood_order: u32,
    pub relaxation_passes: u32,
    pub nodes_expanded: usize,
}

/// Shortest metric length with one realizing polyline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeodesicResult {
    /// `f64::INFINITY` when unreachable.
    pub length: f64,
    pub reachable: bool,
    /// Cell-center polyline from a source cell to the nearest target cell
    /// (physical units); empty when unreachable.
    pub path: Vec<[f64; 2]>,
    pub meta: SolverMeta,
}

#[derive(PartialEq)]
struct HeapEntry {
    cost: f64,
    node: u32,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on cost, ties broken by node id for determinism
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All coprime offsets with Chebyshev radius <= order.
pub fn stencil_offsets(order: u32) -> Vec<(i32, i32)> {
    let r = order as i32;
    let mut out = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            if dx == 0 && dy == 0 {
                continue;
            }
            if gcd(dx.unsigned_abs(), dy.unsigned_abs()) == 1 {
                out.push((dx, dy));
            }
        }
    }
    out
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Multi-source, multi-target Dijkstra with the default 16-neighbor stencil.
pub fn geodesic_distance(field: &MetricField, regions: &RegionSpec) -> Result<GeodesicResult> {
    geodesic_distance_with_order(field, regions, 2)
}

/// Same with an explicit stencil order (2 -> 16 neighbors, 3 -> 32, 4 -> 48).
pub fn geodesic_distance_with_order(
    field: &MetricField,
    regions: &RegionSpec,
    order: u32,
) -> Result<GeodesicResult> {
    if order == 0 || order > 8 {
        return Err(Error::Config("stencil order must be in 1..=8".into()));
    }
    let masks = regions.rasterize(field)?;
    let n = field.nx * field.ny;
    let offsets = stencil_offsets(order);
    let mut dist = vec![f64::INFINITY; n];
    let mut parent = vec![u32::MAX; n];
    let mut heap = BinaryHeap::with_capacity(masks.source_cells.len() * 2);
    for &s in &masks.source_cells {
        dist[s as usize] = 0.0;
        heap.push(HeapEntry { cost: 0.0, node: s });
    }
    let mut expanded = 0usize;
    let mut found: Option<u32> = None;
    while let Some(HeapEntry { cost, node }) = heap.pop() {
        if cost > dist[node as usize] {
            continue;
        }
        if masks.target_mask[node as usize] {
            found = Some(node);
            break;
        }
        expanded += 1;
        let ix = (node as usize % field.nx) as i32;
        let iy = (node as usize / field.nx) as i32;
        for &(dx, dy) in &offsets {
            let jx = ix + dx;
            let jy = iy + dy;
            if jx < 0 || jy < 0 || jx >= field.nx as i32 || jy >= field.ny as i32 {
                continue;
            }
            let to = (jy as usize * field.nx + jx as usize) as u32;
            if field.obstacles[to as usize] {
                continue;
            }
            let (x0, y0) = field.center(ix as usize, iy as usize);
            let (x1, y1) = field.center(jx as usize, jy as usize);
            let w = match segment_cost(field, [x0, y0], [x1, y1]) {
                SegmentCost::Cost(w) => w,
                _ => continue,
            };
            let next = cost + w;
            if next < dist[to as usize] {
                dist[to as usize] = next;
                parent[to as usize] = node;
                heap.push(HeapEntry { cost: next, node: to });
            }
        }
    }
    let meta = SolverMeta { neighborhood_order: order, relaxation_passes: 1, nodes_expanded: expanded };
    match found {
        None => Ok(GeodesicResult { length: f64::INFINITY, reachable: false, path: Vec::new(), meta }),
        Some(end) => {
            let mut cells = vec![end];
            let mut cur = end;
            while parent[cur as usize] != u32::MAX {
                cur = parent[cur as usize];
                cells.push(cur);
            }
            cells.reverse();
            let path = cells
                .iter()
                .map(|&c| {
                    let (x, y) =
                        field.center(c as usize % field.nx, c as usize / field.nx);
                    [x, y]
                })
                .collect();
            Ok(GeodesicResult { length: dist[end as usize], reachable: true, path, meta })
        }
    }
}

enum SegmentCost {
    Cost(f64),
    Obstacle(f64, f64),
    Outside(f64, f64),
}

/// Metric cost of the straight segment `p0 -> p1`, integrated cell by cell:
/// the segment is split at every grid line it crosses and each piece is
/// priced with the tensor of the cell containing its midpoint. Long stencil
/// moves therefore pay full price through every slow cell they traverse
/// (pricing an edge by its endpoint cells alone lets paths clip high-contrast
/// corners at a discount), and any piece inside an obstacle cell blocks.
fn segment_cost(field: &MetricField, p0: [f64; 2], p1: [f64; 2]) -> SegmentCost {
    let dx = p1[0] - p0[0];
    let dy = p1[1] - p0[1];
    let mut cuts: Vec<f64> = vec![0.0, 1.0];
    for (d, c0) in [(dx, p0[0]), (dy, p0[1])] {
        if d != 0.0 {
            let (lo, hi) = if d > 0.0 { (c0, c0 + d) } else { (c0 + d, c0) };
            let k_lo = (lo / field.h).floor() as i64 + 1;
            let k_hi = (hi / field.h).ceil() as i64 - 1;
            for k in k_lo..=k_hi {
                let s = (k as f64 * field.h - c0) / d;
                if s > 0.0 && s < 1.0 {
                    cuts.push(s);
                }
            }
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut total = 0.0;
    for pair in cuts.windows(2) {
        let ds = pair[1] - pair[0];
        if ds <= 0.0 {
            continue;
        }
        let smid = 0.5 * (pair[0] + pair[1]);
        let mx = p0[0] + smid * dx;
        let my = p0[1] + smid * dy;
        match field.cell_of(mx, my) {
            None => return SegmentCost::Outside(mx, my),
            Some((cx, cy)) => {
                if field.is_obstacle(cx, cy) {
                    return SegmentCost::Obstacle(mx, my);
                }
                total += field.tensor(cx, cy).metric_norm(dx * ds, dy * ds);
            }
        }
    }
    SegmentCost::Cost(total)
}

/// Metric length of an arbitrary polyline: every segment is integrated cell
/// by cell (midpoint rule within each crossed cell), the same rule the
/// solver uses for edge weights, so solver paths re-measure to the solver
/// length exactly. Additive under concatenation.
pub fn path_length(field: &MetricField, polyline: &[[f64; 2]]) -> Result<f64> {
    let mut total = 0.0;
    for seg in polyline.windows(2) {
        match segment_cost(field, seg[0], seg[1]) {
            SegmentCost::Cost(w) => total += w,
            SegmentCost::Obstacle(x, y) => return Err(Error::ObstacleCrossing { x, y }),
            SegmentCost::Outside(x, y) => {
                return Err(Error::Domain(format!("point ({x},{y}) outside the grid")))
            }
        }
    }
    // endpoints themselves must be inside the grid too
    for p in polyline {
        if field.cell_of(p[0], p[1]).is_none() {
            return Err(Error::Domain(format!("point ({},{}) outside the grid", p[0], p[1])));
        }
    }
    Ok(total)
}

/// Packages a geodesic length with the field's diffusivity for the
/// asymptotic formula. Unreachable targets are an error here, never a silent
/// infinite length.
pub fn effective_length_for_asymptotics(
    field: &MetricField,
    regions: &RegionSpec,
) -> Result<AsymptoticSpec> {
    effective_length_with_order(field, regions, 2)
}

pub fn effective_length_with_order(
    field: &MetricField,
    regions: &RegionSpec,
    order: u32,
) -> Result<AsymptoticSpec> {
    let g = geodesic_distance_with_order(field, regions, order)?;
    if !g.reachable {
        return Err(Error::Unreachable(
            "obstacles disconnect the source region from every target".into(),
        ));
    }
    Ok(AsymptoticSpec { effective_length: g.length, diffusivity: field.diffusivity(), power: 1 })
}

/// Path CSV: `x,y` rows in physical units.
pub fn write_path_csv<W: std::io::Write>(path: &[[f64; 2]], mut w: W) -> Result<()> {
    writeln!(w, "x,y")?;
    for p in path {
        writeln!(w, "{},{}", p[0], p[1])?;
    }
    Ok(())
}

// --- field/region JSON file --------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TensorsRepr {
    /// Single `[a11, a12, a22]` broadcast to every cell.
    Uniform([f64; 3]),
    /// Row-major list, one `[a11, a12, a22]` per cell.
    PerCell(Vec<[f64; 3]>),
}

/// On-disk schema for a field plus its regions:
/// `{"nx", "ny", "h", "D", "tensors", "obstacles", "sources", "targets"}`.
/// `obstacles` is run-length encoded as alternating run lengths over the
/// row-major mask, starting with a non-obstacle run (empty = no obstacles).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldFile {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    #[serde(rename = "D")]
    pub diffusivity: f64,
    pub tensors: TensorsRepr,
    #[serde(default)]
    pub obstacles: Vec<usize>,
    pub sources: Vec<RegionPrimitive>,
    pub targets: Vec<RegionPrimitive>,
}

impl FieldFile {
    pub fn build(&self) -> Result<(MetricField, RegionSpec)> {
        let n = self.nx * self.ny;
        let tensors = match &self.tensors {
            TensorsRepr::Uniform([a11, a12, a22]) => {
                vec![Tensor2 { a11: *a11, a12: *a12, a22: *a22 }; n]
            }
            TensorsRepr::PerCell(v) => {
                if v.len() != n {
                    return Err(Error::Config(format!(
                        "tensors has {} entries, grid has {n}",
                        v.len()
                    )));
                }
                v.iter().map(|[a11, a12, a22]| Tensor2 { a11: *a11, a12: *a12, a22: *a22 }).collect()
            }
        };
        let obstacles = rle_decode(&self.obstacles, n)?;
        if !(self.h > 0.0) || !(self.diffusivity > 0.0) {
            return Err(Error::Domain("h and D must be positive".into()));
        }
        let field = MetricField {
            nx: self.nx,
            ny: self.ny,
            h: self.h,
            diffusivity: self.diffusivity,
            tensors,
            obstacles,
        };
        field.validate_default()?;
        let regions =
            RegionSpec { sources: self.sources.clone(), targets: self.targets.clone() };
        regions.rasterize(&field)?;
        Ok((field, regions))
    }

    pub fn from_parts(field: &MetricField, regions: &RegionSpec) -> FieldFile {
        let uniform = field.tensors.windows(2).all(|w| w[0] == w[1]);
        let tensors = if uniform {
            let t = field.tensors[0];
            TensorsRepr::Uniform([t.a11, t.a12, t.a22])
        } else {
            TensorsRepr::PerCell(field.tensors.iter().map(|t| [t.a11, t.a12, t.a22]).collect())
        };
        FieldFile {
            nx: field.nx,
            ny: field.ny,
            h: field.h,
            diffusivity: field.diffusivity,
            tensors,
            obstacles: rle_encode(&field.obstacles),
            sources: regions.sources.clone(),
            targets: regions.targets.clone(),
        }
    }

    pub fn from_json(s: &str) -> Result<FieldFile> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

fn rle_encode(mask: &[bool]) -> Vec<usize> {
    let mut runs = Vec::new();
    let mut current = false;
    let mut len = 0usize;
    for &b in mask {
        if b == current {
            len += 1;
        } else {
            runs.push(len);
            current = b;
            len = 1;
        }
    }
    runs.push(len);
    if runs == [mask.len()] && !current {
        // no obstacles at all
        return Vec::new();
    }
    runs
}

fn rle_decode(runs: &[usize], n: usize) -> Result<Vec<bool>> {
    if runs.is_empty() {
        return Ok(vec![false; n]);
    }
    let total: usize = runs.iter().sum();
    if total != n {
        return Err(Error::Config(format!(
            "obstacle run lengths sum to {total}, grid has {n} cells"
        )));
    }
    let mut mask = Vec::with_capacity(n);
    let mut value = false;
    for &r in runs {
        mask.extend(std::iter::repeat(value).take(r));
        value = !value;
    }
    Ok(mask)
}
