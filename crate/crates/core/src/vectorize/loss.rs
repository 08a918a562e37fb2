//! The optimization objective: a segmentation-guided weighted color loss
//! plus a self-intersection penalty on control-point configurations.

use crate::error::{Error, Result};
use crate::geometry::{flatten, ClosedPath, PixelWindow, Point, FLATTEN_TOLERANCE};
use crate::grid::Grid;
use crate::raster::RasterImage;
use crate::render::{render, SceneGrads, VectorScene};

/// Loss hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossConfig {
    /// Floor weight for focused pixels; balances contour emphasis against
    /// interior color fidelity.
    pub alpha_s: f64,
    /// Saturation radius of the contour-distance weight, in pixels.
    pub tau: f64,
    /// Weight of the self-intersection penalty.
    pub lambda_xing: f64,
    /// Residual error norm below which pixels are ignored by segmentation.
    pub epsilon_seg: f64,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            alpha_s: 0.6,
            tau: 10.0,
            lambda_xing: 0.05,
            epsilon_seg: 0.1,
        }
    }
}

/// Scalar loss values of one iteration plus the pixel weight field used.
#[derive(Debug, Clone, PartialEq)]
pub struct LossReport {
    pub l_sg: f64,
    pub l_xing: f64,
    pub total: f64,
    pub weight_field: Vec<f64>,
}

/// Normalized contour-proximity weight: `relu(tau - d)` per pixel over the
/// distance `d` to the nearest contour of `paths`, normalized to sum to 1.
pub fn udf_weight(
    paths: &[&ClosedPath],
    width: usize,
    height: usize,
    tau: f64,
) -> Result<Vec<f64>> {
    if paths.is_empty() {
        return Err(Error::NoPaths);
    }
    assert!(tau > 0.0, "tau must be positive");
    let polys: Vec<_> = paths.iter().map(|p| flatten(p, FLATTEN_TOLERANCE)).collect();
    let mut dist = vec![f64::INFINITY; width * height];
    crate::geometry::stamp_band_distances(
        &polys,
        PixelWindow::full(width, height),
        tau,
        &mut dist,
        None,
    );
    let mut sum = 0.0;
    let mut weights = vec![0.0; width * height];
    for (w_out, &d) in weights.iter_mut().zip(&dist) {
        if d < tau {
            *w_out = tau - d;
            sum += *w_out;
        }
    }
    if sum <= 0.0 {
        return Err(Error::ZeroWeightField);
    }
    for w_out in &mut weights {
        *w_out /= sum;
    }
    Ok(weights)
}

/// Union over paths of (pixels covered by the path) ∩ (pixels of the segment
/// the path was seeded from). `seed_masks` runs parallel to `scene.paths`.
pub fn focused_set(scene: &VectorScene, seed_masks: &[Grid<bool>]) -> Grid<bool> {
    let (w, h) = (scene.width, scene.height);
    let mut focused = Grid::filled(w, h, false);
    for (path, seed) in scene.paths.iter().zip(seed_masks) {
        let poly = flatten(&path.shape, FLATTEN_TOLERANCE);
        let inside = crate::geometry::scanline_fill(&poly, PixelWindow::full(w, h));
        for y in 0..h {
            for x in 0..w {
                if inside[y * w + x] && seed.at(x, y) {
                    focused.set(x, y, true);
                }
            }
        }
    }
    focused
}

/// Segmentation-guided pixel weight: focused pixels get `max(d', alpha_s)`,
/// the rest are damped to `d' * (1 - alpha_s)`.
pub fn sg_weight(udf: &[f64], focused: &Grid<bool>, alpha_s: f64) -> Vec<f64> {
    debug_assert!((0.0..=1.0).contains(&alpha_s));
    let w = focused.width();
    udf.iter()
        .enumerate()
        .map(|(i, &d)| {
            if focused.at(i % w, i / w) {
                d.max(alpha_s)
            } else {
                d * (1.0 - alpha_s)
            }
        })
        .collect()
}

/// Weighted squared color error, summed over pixels, averaged over the three
/// RGB channels.
pub fn sg_loss(target: &RasterImage, rendered: &RasterImage, weights: &[f64]) -> Result<f64> {
    if !target.same_size(rendered) {
        return Err(Error::DimensionMismatch(
            target.width(),
            target.height(),
            rendered.width(),
            rendered.height(),
        ));
    }
    debug_assert_eq!(weights.len(), target.width() * target.height());
    let mut sum = 0.0;
    for (i, (pt, pr)) in target
        .data()
        .chunks_exact(4)
        .zip(rendered.data().chunks_exact(4))
        .enumerate()
    {
        let mut channel_sum = 0.0;
        for c in 0..3 {
            let d = pt[c] - pr[c];
            channel_sum += d * d;
        }
        sum += weights[i] * channel_sum;
    }
    Ok(sum / 3.0)
}

/// Per-segment self-intersection term from the control-point configuration.
///
/// With `D1 = [AB x BC > 0]` and `D2 = (AB x CD) / (|AB| |CD|)`, the term is
/// `D1 * relu(-D2) + (1 - D1) * relu(D2)`; degenerate zero-length AB or CD
/// contributes 0.
fn xing_term(a: Point, b: Point, c: Point, d: Point) -> f64 {
    let ab = b.sub(a);
    let bc = c.sub(b);
    let cd = d.sub(c);
    let na = ab.norm();
    let nd = cd.norm();
    if na == 0.0 || nd == 0.0 {
        return 0.0;
    }
    let d1 = ab.cross(bc) > 0.0;
    let d2 = ab.cross(cd) / (na * nd);
    if d1 {
        (-d2).max(0.0)
    } else {
        d2.max(0.0)
    }
}

/// Mean self-intersection penalty over every cubic segment of every path.
pub fn xing_loss(scene: &VectorScene) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    for path in &scene.paths {
        for seg in path.shape.segments() {
            sum += xing_term(seg.a, seg.b, seg.c, seg.d);
            count += 1;
        }
    }
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// [`xing_loss`] plus its gradient with respect to every control point.
pub(crate) fn xing_loss_with_grads(scene: &VectorScene) -> (f64, SceneGrads) {
    let mut grads = SceneGrads::zeros(scene);
    let count: usize = scene.paths.iter().map(|p| p.shape.segment_count()).sum();
    if count == 0 {
        return (0.0, grads);
    }
    let inv = 1.0 / count as f64;
    let mut sum = 0.0;
    for (pi, path) in scene.paths.iter().enumerate() {
        for k in 0..path.shape.segment_count() {
            let seg = path.shape.segment(k);
            let (a, b, c, d) = (seg.a, seg.b, seg.c, seg.d);
            let ab = b.sub(a);
            let bc = c.sub(b);
            let cd = d.sub(c);
            let na = ab.norm();
            let nd = cd.norm();
            if na == 0.0 || nd == 0.0 {
                continue;
            }
            let d1 = ab.cross(bc) > 0.0;
            let cross = ab.cross(cd);
            let d2 = cross / (na * nd);
            let (term, dterm_dd2) = if d1 {
                ((-d2).max(0.0), if d2 < 0.0 { -1.0 } else { 0.0 })
            } else {
                (d2.max(0.0), if d2 > 0.0 { 1.0 } else { 0.0 })
            };
            sum += term;
            if dterm_dd2 == 0.0 {
                continue;
            }
            // D2 = cross / (na * nd):
            // dD2 = dcross/(na*nd) - D2 * (dna/na + dnd/nd).
            let scale = dterm_dd2 * inv;
            let inv_nand = 1.0 / (na * nd);
            // dcross/d{A,B,C,D}: cross = (Bx-Ax)(Dy-Cy) - (By-Ay)(Dx-Cx).
            let dcross = [
                Point::new(-(d.y - c.y), d.x - c.x), // dA
                Point::new(d.y - c.y, -(d.x - c.x)), // dB
                Point::new(b.y - a.y, -(b.x - a.x)), // dC
                Point::new(-(b.y - a.y), b.x - a.x), // dD
            ];
            // d|AB|/dA = -AB/|AB|, d|AB|/dB = AB/|AB|; likewise for CD.
            let dna_da = ab.scale(-1.0 / na);
            let dna_db = ab.scale(1.0 / na);
            let dnd_dc = cd.scale(-1.0 / nd);
            let dnd_dd = cd.scale(1.0 / nd);

            let idx = path.shape.segment_point_indices(k);
            let pg = &mut grads.paths[pi];
            let mut add = |slot: usize, dcross_p: Point, dna_p: Point, dnd_p: Point| {
                let g = Point::new(
                    dcross_p.x * inv_nand - d2 * (dna_p.x / na + dnd_p.x / nd),
                    dcross_p.y * inv_nand - d2 * (dna_p.y / na + dnd_p.y / nd),
                );
                pg.points[idx[slot]].x += scale * g.x;
                pg.points[idx[slot]].y += scale * g.y;
            };
            add(0, dcross[0], dna_da, Point::default());
            add(1, dcross[1], dna_db, Point::default());
            add(2, dcross[2], Point::default(), dnd_dc);
            add(3, dcross[3], Point::default(), dnd_dd);
        }
    }
    (sum * inv, grads)
}

/// Evaluate the full objective for a scene against a target.
///
/// Renders the scene, applies the segmentation-guided weight built from the
/// given focused set and contour weight, and combines with the Xing penalty:
/// `total = l_sg + lambda * l_xing`.
pub fn total_loss(
    target: &RasterImage,
    scene: &VectorScene,
    cfg: &LossConfig,
    focused: &Grid<bool>,
    udf: &[f64],
) -> Result<LossReport> {
    let rendered = render(scene);
    let weights = sg_weight(udf, focused, cfg.alpha_s);
    let l_sg = sg_loss(target, &rendered, &weights)?;
    let l_xing = xing_loss(scene);
    Ok(LossReport {
        l_sg,
        l_xing,
        total: l_sg + cfg.lambda_xing * l_xing,
        weight_field: weights,
    })
}
