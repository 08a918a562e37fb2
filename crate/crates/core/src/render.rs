//! Differentiable soft-coverage rasterizer.
//!
//! Scenes are ordered lists of radial-gradient-filled closed Bézier paths
//! composited back-to-front over an opaque background with the straight-alpha
//! "over" operator. Coverage is a smoothstep of signed distance to the path
//! contour over a 1 px band, which makes every rendered pixel a piecewise-C1
//! function of the scene parameters; [`render_backward`] returns exact
//! reverse-mode gradients of `sum(loss_grad * image)` with respect to every
//! control point and fill parameter.

use crate::error::{Error, Result};
use crate::geometry::{
    bernstein, flatten, stamp_band_distances, ClosedPath, NearestEdge, PixelWindow, Point,
    Polyline, FLATTEN_TOLERANCE,
};
use crate::raster::{RasterImage, Rgb, Rgba};

/// Width of the anti-aliasing band: coverage ramps from 1 to 0 across
/// `[-COVERAGE_BAND/2, +COVERAGE_BAND/2]` of signed contour distance.
pub const COVERAGE_BAND: f64 = 1.0;

/// Minimum gradient radius enforced after each optimizer step.
pub const MIN_GRADIENT_RADIUS: f64 = 0.5;

/// A two-stop radial gradient in user (pixel) space.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGradient {
    pub center: Point,
    pub radius: f64,
    /// Color at offset 0%.
    pub stop0: Rgba,
    /// Color at offset 100%; pad extension beyond.
    pub stop1: Rgba,
}

impl RadialGradient {
    /// Flat fill: both stops the same color.
    pub fn solid(center: Point, radius: f64, color: Rgba) -> Self {
        Self {
            center,
            radius,
            stop0: color,
            stop1: color,
        }
    }

    /// Clamp radius and stop channels back into their valid ranges.
    pub fn clamp_valid(&mut self) {
        self.radius = self.radius.max(MIN_GRADIENT_RADIUS);
        for stop in [&mut self.stop0, &mut self.stop1] {
            stop.r = stop.r.clamp(0.0, 1.0);
            stop.g = stop.g.clamp(0.0, 1.0);
            stop.b = stop.b.clamp(0.0, 1.0);
            stop.a = stop.a.clamp(0.0, 1.0);
        }
    }
}

/// Evaluate a radial gradient at a point: linear interpolation between the
/// stops by `t = clamp(|p - center| / radius, 0, 1)` per channel.
pub fn eval_gradient(fill: &RadialGradient, p: Point) -> Rgba {
    let t = (p.dist(fill.center) / fill.radius).clamp(0.0, 1.0);
    let s0 = fill.stop0;
    let s1 = fill.stop1;
    Rgba::new(
        s0.r + (s1.r - s0.r) * t,
        s0.g + (s1.g - s0.g) * t,
        s0.b + (s1.b - s0.b) * t,
        s0.a + (s1.a - s0.a) * t,
    )
}

/// One optimizable unit: a closed path plus its radial fill.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientPath {
    pub shape: ClosedPath,
    pub fill: RadialGradient,
    /// Label of the segmentation region this path was initialized from.
    pub seed_region: u32,
}

/// An ordered scene: later paths composite over earlier ones.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorScene {
    pub width: usize,
    pub height: usize,
    pub background: Rgb,
    pub paths: Vec<GradientPath>,
}

impl VectorScene {
    pub fn new(width: usize, height: usize, background: Rgb) -> Self {
        Self {
            width,
            height,
            background,
            paths: Vec::new(),
        }
    }
}

/// Smoothstep coverage ramp over signed distance: 1 well inside, 0 well
/// outside, 0.5 on the contour.
#[inline]
pub fn coverage_ramp(signed_dist: f64) -> f64 {
    let half = COVERAGE_BAND / 2.0;
    if signed_dist <= -half {
        1.0
    } else if signed_dist >= half {
        0.0
    } else {
        let u = (signed_dist + half) / COVERAGE_BAND;
        1.0 - u * u * (3.0 - 2.0 * u)
    }
}

/// Derivative of [`coverage_ramp`] with respect to signed distance.
#[inline]
fn coverage_ramp_deriv(signed_dist: f64) -> f64 {
    let half = COVERAGE_BAND / 2.0;
    if signed_dist.abs() >= half {
        0.0
    } else {
        let u = (signed_dist + half) / COVERAGE_BAND;
        -(6.0 * u - 6.0 * u * u) / COVERAGE_BAND
    }
}

/// Anti-aliased coverage of a pixel center by a path.
pub fn coverage(path: &ClosedPath, p: Point) -> f64 {
    let poly = flatten(path, FLATTEN_TOLERANCE);
    let n = poly.len();
    let mut d = f64::INFINITY;
    for e in 0..n {
        let (de, _) = crate::geometry::point_segment_distance(
            p,
            poly.vertices[e].pos,
            poly.vertices[(e + 1) % n].pos,
        );
        d = d.min(de);
    }
    let inside = crate::geometry::winding_number(&poly, p) != 0;
    coverage_ramp(if inside { -d } else { d })
}

/// Inclusive pixel rectangle, possibly empty.
#[derive(Debug, Clone, Copy)]
struct PixelRect {
    x0: usize,
    y0: usize,
    x1: usize,
    y1: usize,
    empty: bool,
}

impl PixelRect {
    fn from_bounds(min: Point, max: Point, pad: f64, width: usize, height: usize) -> Self {
        let x0f = min.x - pad - 0.5;
        let y0f = min.y - pad - 0.5;
        let x1f = max.x + pad - 0.5;
        let y1f = max.y + pad - 0.5;
        if x1f < 0.0 || y1f < 0.0 || x0f > (width - 1) as f64 || y0f > (height - 1) as f64 {
            return Self {
                x0: 0,
                y0: 0,
                x1: 0,
                y1: 0,
                empty: true,
            };
        }
        Self {
            x0: x0f.max(0.0).floor() as usize,
            y0: y0f.max(0.0).floor() as usize,
            x1: (x1f.ceil() as usize).min(width - 1),
            y1: (y1f.ceil() as usize).min(height - 1),
            empty: false,
        }
    }

    fn width(&self) -> usize {
        if self.empty {
            0
        } else {
            self.x1 - self.x0 + 1
        }
    }

    fn height(&self) -> usize {
        if self.empty {
            0
        } else {
            self.y1 - self.y0 + 1
        }
    }
}

/// Per-path raster data kept from the forward pass for the backward pass.
struct PathRaster {
    rect: PixelRect,
    poly: Polyline,
    /// Coverage per pixel of `rect`, row-major.
    cov: Vec<f64>,
    /// Signed distance and nearest-edge info for pixels inside the AA band.
    band: Vec<(u32, NearestEdge, f64)>,
    /// Composite under this path (the "destination" it blended over),
    /// RGB per pixel of `rect`.
    prefix: Vec<[f64; 3]>,
}

struct RenderAccum {
    image: RasterImage,
    rasters: Vec<PathRaster>,
}

/// Rasterize one path: coverage plus band info for gradient flow.
fn rasterize_path(shape: &ClosedPath, width: usize, height: usize) -> PathRaster {
    let poly = flatten(shape, FLATTEN_TOLERANCE);
    let (min, max) = poly.bounds();
    let rect = PixelRect::from_bounds(min, max, COVERAGE_BAND / 2.0 + 1.0, width, height);
    if rect.empty {
        return PathRaster {
            rect,
            poly,
            cov: Vec::new(),
            band: Vec::new(),
            prefix: Vec::new(),
        };
    }
    let w = rect.width();
    let h = rect.height();
    let win = PixelWindow {
        x0: rect.x0,
        y0: rect.y0,
        w,
        h,
    };

    let inside = crate::geometry::scanline_fill(&poly, win);

    // Exact distances near the contour; COVERAGE_BAND/2 plus margin so every
    // pixel with fractional coverage is captured.
    let band_radius = COVERAGE_BAND / 2.0 + 1e-9;
    let mut dist = vec![f64::INFINITY; w * h];
    let mut nearest = vec![
        NearestEdge {
            path: 0,
            edge: 0,
            t: 0.0,
            dist: f64::INFINITY,
        };
        w * h
    ];
    stamp_band_distances(
        std::slice::from_ref(&poly),
        win,
        band_radius,
        &mut dist,
        Some(&mut nearest),
    );

    let mut cov = vec![0.0; w * h];
    let mut band = Vec::new();
    for li in 0..w * h {
        let is_in = inside[li];
        let d = dist[li];
        if d.is_finite() {
            let sd = if is_in { -d } else { d };
            cov[li] = coverage_ramp(sd);
            band.push((li as u32, nearest[li], sd));
        } else {
            cov[li] = if is_in { 1.0 } else { 0.0 };
        }
    }

    PathRaster {
        rect,
        poly,
        cov,
        band,
        prefix: Vec::new(),
    }
}

fn render_accum(scene: &VectorScene) -> RenderAccum {
    let (width, height) = (scene.width, scene.height);
    let mut rgb: Vec<[f64; 3]> = vec![
        [
            scene.background.r,
            scene.background.g,
            scene.background.b
        ];
        width * height
    ];
    let mut rasters = Vec::with_capacity(scene.paths.len());
    for path in &scene.paths {
        let mut pr = rasterize_path(&path.shape, width, height);
        if !pr.rect.empty {
            let w = pr.rect.width();
            let h = pr.rect.height();
            pr.prefix = vec![[0.0; 3]; w * h];
            for ry in 0..h {
                for rx in 0..w {
                    let gx = pr.rect.x0 + rx;
                    let gy = pr.rect.y0 + ry;
                    let li = ry * w + rx;
                    let gi = gy * width + gx;
                    pr.prefix[li] = rgb[gi];
                    let cv = pr.cov[li];
                    if cv == 0.0 {
                        continue;
                    }
                    let p = Point::new(gx as f64 + 0.5, gy as f64 + 0.5);
                    let c = eval_gradient(&path.fill, p);
                    let a = c.a * cv;
                    let dst = rgb[gi];
                    rgb[gi] = [
                        a * c.r + (1.0 - a) * dst[0],
                        a * c.g + (1.0 - a) * dst[1],
                        a * c.b + (1.0 - a) * dst[2],
                    ];
                }
            }
        }
        rasters.push(pr);
    }

    let mut data = Vec::with_capacity(width * height * 4);
    for px in &rgb {
        data.extend_from_slice(&[px[0], px[1], px[2], 1.0]);
    }
    RenderAccum {
        image: RasterImage::from_data(width, height, data),
        rasters,
    }
}

/// Forward-render a scene to an opaque RGBA image.
pub fn render(scene: &VectorScene) -> RasterImage {
    render_accum(scene).image
}

/// Gradients of a scalar objective with respect to one path's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct PathGrads {
    /// d/d(control point coordinates), same layout as `ClosedPath::points`.
    pub points: Vec<Point>,
    pub center: Point,
    pub radius: f64,
    pub stop0: [f64; 4],
    pub stop1: [f64; 4],
}

impl PathGrads {
    pub fn zeros(n_points: usize) -> Self {
        Self {
            points: vec![Point::default(); n_points],
            center: Point::default(),
            radius: 0.0,
            stop0: [0.0; 4],
            stop1: [0.0; 4],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.points.iter().all(|p| p.x == 0.0 && p.y == 0.0)
            && self.center.x == 0.0
            && self.center.y == 0.0
            && self.radius == 0.0
            && self.stop0.iter().all(|&v| v == 0.0)
            && self.stop1.iter().all(|&v| v == 0.0)
    }
}

/// Gradients for every path of a scene, in scene order.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneGrads {
    pub paths: Vec<PathGrads>,
}

impl SceneGrads {
    pub fn zeros(scene: &VectorScene) -> Self {
        Self {
            paths: scene
                .paths
                .iter()
                .map(|p| PathGrads::zeros(p.shape.points().len()))
                .collect(),
        }
    }

    /// Accumulate `other` scaled by `k`.
    pub fn add_scaled(&mut self, other: &SceneGrads, k: f64) {
        for (dst, src) in self.paths.iter_mut().zip(&other.paths) {
            for (dp, sp) in dst.points.iter_mut().zip(&src.points) {
                dp.x += k * sp.x;
                dp.y += k * sp.y;
            }
            dst.center.x += k * src.center.x;
            dst.center.y += k * src.center.y;
            dst.radius += k * src.radius;
            for c in 0..4 {
                dst.stop0[c] += k * src.stop0[c];
                dst.stop1[c] += k * src.stop1[c];
            }
        }
    }
}

/// Reverse-mode gradients of `L = sum_pixels loss_grad . render(scene).rgb`
/// with respect to every scene parameter.
///
/// `loss_grad` is an `H x W x 3` row-major field of dL/d(pixel rgb).
pub fn render_backward(scene: &VectorScene, loss_grad: &[f64]) -> Result<SceneGrads> {
    if loss_grad.len() != scene.width * scene.height * 3 {
        return Err(Error::DimensionMismatch(
            scene.width,
            scene.height,
            loss_grad.len() / 3 / scene.height.max(1),
            scene.height,
        ));
    }
    let accum = render_accum(scene);
    Ok(backward_from_accum(scene, &accum, loss_grad))
}

fn backward_from_accum(scene: &VectorScene, accum: &RenderAccum, loss_grad: &[f64]) -> SceneGrads {
    let width = scene.width;
    let mut grads = SceneGrads::zeros(scene);
    // Running dL/d(composite) as we walk paths top-down.
    let mut upstream: Vec<[f64; 3]> = loss_grad
        .chunks_exact(3)
        .map(|c| [c[0], c[1], c[2]])
        .collect();

    for k in (0..scene.paths.len()).rev() {
        let path = &scene.paths[k];
        let pr = &accum.rasters[k];
        if pr.rect.empty {
            continue;
        }
        let w = pr.rect.width();
        let h = pr.rect.height();
        let pg = &mut grads.paths[k];

        // dL/d(coverage) per rect pixel, filled while walking pixels.
        let mut cov_grad = vec![0.0; w * h];

        for ry in 0..h {
            for rx in 0..w {
                let li = ry * w + rx;
                let cv = pr.cov[li];
                // Zero coverage means no color contribution and, since the
                // ramp derivative vanishes outside the open band, no
                // geometry gradient either.
                if cv == 0.0 {
                    continue;
                }
                let gx = pr.rect.x0 + rx;
                let gy = pr.rect.y0 + ry;
                let gi = gy * width + gx;
                let gu = upstream[gi];
                let p = Point::new(gx as f64 + 0.5, gy as f64 + 0.5);

                let c = eval_gradient(&path.fill, p);
                let a = c.a * cv;
                let dst = pr.prefix[li];

                // d L / d a through out = a*c + (1-a)*dst.
                let dl_da =
                    gu[0] * (c.r - dst[0]) + gu[1] * (c.g - dst[1]) + gu[2] * (c.b - dst[2]);
                let dl_dc = [gu[0] * a, gu[1] * a, gu[2] * a, dl_da * cv];
                cov_grad[li] = dl_da * c.a;

                // Fill parameters.
                let rvec = p.sub(path.fill.center);
                let r = rvec.norm();
                let t_raw = r / path.fill.radius;
                let t = t_raw.clamp(0.0, 1.0);
                let mut dl_dt = 0.0;
                for ch in 0..4 {
                    pg.stop0[ch] += dl_dc[ch] * (1.0 - t);
                    pg.stop1[ch] += dl_dc[ch] * t;
                    dl_dt +=
                        dl_dc[ch] * (path.fill.stop1.channel(ch) - path.fill.stop0.channel(ch));
                }
                if t_raw > 0.0 && t_raw < 1.0 && r > 0.0 {
                    let dl_dr = dl_dt / path.fill.radius;
                    pg.radius += dl_dt * (-r / (path.fill.radius * path.fill.radius));
                    let dir = rvec.scale(1.0 / r);
                    pg.center.x += dl_dr * (-dir.x);
                    pg.center.y += dl_dr * (-dir.y);
                }

                // Pass the remaining sensitivity to what lies underneath.
                upstream[gi] = [gu[0] * (1.0 - a), gu[1] * (1.0 - a), gu[2] * (1.0 - a)];
            }
        }

        // Chain signed-distance gradients through the nearest edge onto the
        // polyline vertices, then through Bernstein weights onto control
        // points.
        let n_poly = pr.poly.len();
        let mut vert_grads = vec![Point::default(); n_poly];
        for &(li, near, sd) in &pr.band {
            let dl_dsd = cov_grad[li as usize] * coverage_ramp_deriv(sd);
            if dl_dsd == 0.0 {
                continue;
            }
            let d = near.dist;
            if !(d > 0.0) {
                continue; // pixel exactly on the contour: gradient undefined
            }
            let sign = if sd < 0.0 { -1.0 } else { 1.0 };
            let dl_dd = dl_dsd * sign;
            let rx = li as usize % w;
            let ry = li as usize / w;
            let p = Point::new(
                (pr.rect.x0 + rx) as f64 + 0.5,
                (pr.rect.y0 + ry) as f64 + 0.5,
            );
            let e = near.edge as usize;
            let va = pr.poly.vertices[e].pos;
            let vb = pr.poly.vertices[(e + 1) % n_poly].pos;
            let q = va.add(vb.sub(va).scale(near.t));
            // d d / d q = -(p - q) / d; the projection parameter is an
            // arg-min so its sensitivity vanishes (envelope condition).
            let dir = p.sub(q).scale(-1.0 / d);
            let ga = dir.scale(dl_dd * (1.0 - near.t));
            let gb = dir.scale(dl_dd * near.t);
            vert_grads[e] = vert_grads[e].add(ga);
            let e2 = (e + 1) % n_poly;
            vert_grads[e2] = vert_grads[e2].add(gb);
        }

        for (vi, vg) in vert_grads.iter().enumerate() {
            if vg.x == 0.0 && vg.y == 0.0 {
                continue;
            }
            let v = pr.poly.vertices[vi];
            let idx = path.shape.segment_point_indices(v.segment as usize);
            let wts = bernstein(v.t);
            for j in 0..4 {
                pg.points[idx[j]].x += wts[j] * vg.x;
                pg.points[idx[j]].y += wts[j] * vg.y;
            }
        }
    }

    grads
}

/// Forward render plus backward pass in one call, sharing the forward work.
///
/// Returns the rendered image and `dL/d(params)` for
/// `L = sum loss_grad . image` where `loss_grad` is produced from the image
/// by `make_loss_grad`.
pub fn render_with_backward(
    scene: &VectorScene,
    make_loss_grad: impl FnOnce(&RasterImage) -> Vec<f64>,
) -> (RasterImage, SceneGrads) {
    let accum = render_accum(scene);
    let loss_grad = make_loss_grad(&accum.image);
    debug_assert_eq!(loss_grad.len(), scene.width * scene.height * 3);
    let grads = backward_from_accum(scene, &accum, &loss_grad);
    (accum.image, grads)
}
