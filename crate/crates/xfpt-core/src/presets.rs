//! Ready-made benchmark fields.
//!
//! These are the geometries the validation suite and the CLI reproductions
//! use: a thin absorbing-wall strip whose first-passage law is the exact
//! half-line formula, a two-band field with a slow region the geodesic must
//! detour around, and a disk obstacle with a known tangent-arc detour length.

use crate::geodesic::{FieldFile, MetricField, RegionPrimitive, RegionSpec, Tensor2};

/// Cell size used by the strip benchmarks; `start_distance / STRIP_H + 0.5`
/// must land on an integer so the start point is exactly a cell center.
pub const STRIP_H: f64 = 0.08;

/// Long thin strip with an absorbing left wall (the whole first cell
/// column) and a point source at exactly `start_distance` from it. With
/// isotropic unit tensors, reflecting top/bottom/right walls and a strip
/// long enough for the horizon of interest, the first-passage law is the
/// half-line survival `erf(L / sqrt(4 D t))` in the x coordinate.
pub fn strip_field(
    n_cols: usize,
    n_rows: usize,
    start_distance: f64,
    diffusivity: f64,
) -> (MetricField, RegionSpec) {
    let h = STRIP_H;
    let field = MetricField::uniform(n_cols, n_rows, h, diffusivity, Tensor2::IDENTITY)
        .expect("valid strip grid");
    let col = start_distance / h + 0.5;
    assert!(
        (col - col.round()).abs() < 1e-9,
        "start_distance {start_distance} does not align with the strip grid"
    );
    let x0 = (col.round() + 0.5) * h;
    let y_mid = 0.5 * n_rows as f64 * h;
    let regions = RegionSpec {
        sources: vec![RegionPrimitive::Point { x: x0, y: y_mid }],
        targets: vec![RegionPrimitive::Rect {
            x0: 0.0,
            y0: 0.0,
            x1: h,
            y1: n_rows as f64 * h,
        }],
    };
    (field, regions)
}

/// Two-band field: unit tensors everywhere except a slow block
/// (`a = 0.01 I`) spanning `x in [0.45, 0.55], y in [0, 0.7]`. The shortest
/// metric path from the source to the target disk detours over the block
/// through fast cells only.
pub fn two_band_field() -> (MetricField, RegionSpec) {
    let n = 200;
    let mut field =
        MetricField::uniform(n, n, 1.0 / n as f64, 1.0, Tensor2::IDENTITY).expect("valid grid");
    field.set_tensor_where(
        |x, y| (0.45..0.55).contains(&x) && y < 0.7,
        Tensor2::isotropic(SLOW_BAND_FACTOR),
    );
    let regions = RegionSpec {
        sources: vec![RegionPrimitive::Point { x: 0.2, y: 0.2 }],
        targets: vec![RegionPrimitive::Disk { cx: 0.8, cy: 0.2, r: 0.05 }],
    };
    (field, regions)
}

/// Diffusivity factor of the slow band in [`two_band_field`].
pub const SLOW_BAND_FACTOR: f64 = 0.01;

/// Corners of the slow block the continuum detour rounds.
pub const TWO_BAND_CORNERS: [[f64; 2]; 2] = [[0.45, 0.7], [0.55, 0.7]];

/// Unit square with a reflecting disk obstacle between a source point and a
/// target point; the continuum geodesic is the tangent-tangent-arc detour.
pub fn disk_obstacle_field() -> (MetricField, RegionSpec) {
    let n = 200;
    let mut field =
        MetricField::uniform(n, n, 1.0 / n as f64, 1.0, Tensor2::IDENTITY).expect("valid grid");
    field.set_obstacle_where(|x, y| {
        let dx = x - DISK_CENTER[0];
        let dy = y - DISK_CENTER[1];
        dx * dx + dy * dy <= DISK_RADIUS * DISK_RADIUS
    });
    let regions = RegionSpec {
        sources: vec![RegionPrimitive::Point { x: 0.15, y: 0.5 }],
        targets: vec![RegionPrimitive::Point { x: 0.85, y: 0.5 }],
    };
    (field, regions)
}

pub const DISK_CENTER: [f64; 2] = [0.5, 0.5];
pub const DISK_RADIUS: f64 = 0.15;

/// Continuum shortest path from `a` to `b` around a disk obstacle at `o`
/// with radius `r`: two tangent segments plus the connecting arc. Falls back
/// to the straight segment when the disk does not block it.
pub fn tangent_arc_length(a: [f64; 2], b: [f64; 2], o: [f64; 2], r: f64) -> f64 {
    let da = ((a[0] - o[0]).powi(2) + (a[1] - o[1]).powi(2)).sqrt();
    let db = ((b[0] - o[0]).powi(2) + (b[1] - o[1]).powi(2)).sqrt();
    let dab = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
    // angle at o between the directions to a and b
    let cos_alpha = ((a[0] - o[0]) * (b[0] - o[0]) + (a[1] - o[1]) * (b[1] - o[1])) / (da * db);
    let alpha = cos_alpha.clamp(-1.0, 1.0).acos();
    let arc = alpha - (r / da).clamp(-1.0, 1.0).acos() - (r / db).clamp(-1.0, 1.0).acos();
    if arc <= 0.0 {
        return dab;
    }
    (da * da - r * r).sqrt() + (db * db - r * r).sqrt() + r * arc
}

/// Named presets for the CLI (`--field preset:<name>`).
pub fn preset_field_file(name: &str) -> Option<FieldFile> {
    let (field, regions) = match name {
        "strip" => strip_field(125, 4, 1.0, 1.0),
        "two-band" => two_band_field(),
        "disk-obstacle" => disk_obstacle_field(),
        _ => return None,
    };
    Some(FieldFile::from_parts(&field, &regions))
}
