//! Region selection and path initialization.
//!
//! New paths start as a four-segment Bézier circle at the chosen region's
//! center of mass, with a radial gradient whose diameter is the geometric
//! mean of the region's bounding box, clipped to `[0.2, 1.0]` of the canvas
//! extent, and both stops set to the target color under the center.

use crate::geometry::{ClosedPath, Point};
use crate::grid::Grid;
use crate::raster::RasterImage;
use crate::render::{GradientPath, RadialGradient};
use crate::segment::{PixelRect, RegionStats, SegmentationMap};

/// Candidate seed regions: a label per pixel (-1 where no candidate) and the
/// per-region statistics. The gradient-aware segmentation labels every
/// pixel; the color-bin fallback only labels pixels still in error.
#[derive(Debug, Clone)]
pub struct SeedRegions {
    pub labels: Grid<i64>,
    pub regions: Vec<RegionStats>,
}

impl From<&SegmentationMap> for SeedRegions {
    fn from(map: &SegmentationMap) -> Self {
        let mut labels = Grid::filled(map.width(), map.height(), 0i64);
        for (x, y, &l) in map.labels.iter() {
            labels.set(x, y, l as i64);
        }
        Self {
            labels,
            regions: map.regions.clone(),
        }
    }
}

impl SeedRegions {
    pub fn mask_of(&self, label: u32) -> Grid<bool> {
        let mut mask = Grid::filled(self.labels.width(), self.labels.height(), false);
        for (x, y, &l) in self.labels.iter() {
            if l == label as i64 {
                mask.set(x, y, true);
            }
        }
        mask
    }
}

/// The `n` regions with the largest accumulated squared error, descending.
/// Regions with zero score are never returned, so fewer than `n` results
/// signals approaching convergence; ties break by label for determinism.
pub fn select_top_regions(regions: &[RegionStats], n: usize) -> Vec<RegionStats> {
    let mut order: Vec<&RegionStats> = regions.iter().filter(|r| r.score > 0.0).collect();
    order.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.label.cmp(&b.label)));
    order.into_iter().take(n).cloned().collect()
}

/// [`select_top_regions`] over a full segmentation map.
pub fn select_regions(map: &SegmentationMap, n: usize) -> Vec<RegionStats> {
    select_top_regions(&map.regions, n)
}

/// Gradient diameter in pixels: geometric mean of the region's bounding box
/// extents, clipped to `[0.2, 1.0]` of the smaller canvas side.
fn gradient_diameter(bbox: &PixelRect, width: usize, height: usize) -> f64 {
    let bw = (bbox.x_max - bbox.x_min + 1) as f64;
    let bh = (bbox.y_max - bbox.y_min + 1) as f64;
    let extent = width.min(height) as f64;
    ((bw * bh).sqrt() / extent).clamp(0.2, 1.0) * extent
}

/// Initialize one gradient path from a seed region.
pub fn init_path(
    region: &RegionStats,
    target: &RasterImage,
    width: usize,
    height: usize,
) -> GradientPath {
    // Region centroids are means of pixel indices; pixel centers sit at +0.5.
    let center = Point::new(region.centroid.x + 0.5, region.centroid.y + 0.5);
    let radius = 0.5 * gradient_diameter(&region.bbox, width, height);

    let px = (region.centroid.x.round() as i64).clamp(0, width as i64 - 1) as usize;
    let py = (region.centroid.y.round() as i64).clamp(0, height as i64 - 1) as usize;
    let mut color = target.pixel(px, py);
    color.a = 1.0;

    GradientPath {
        shape: ClosedPath::circle(center, radius),
        fill: RadialGradient::solid(center, radius, color),
        seed_region: region.label,
    }
}

/// LIVE-style component seeding for the no-segmentation-guidance ablation:
/// pixels still in error are bucketed by the l2 length of their target color
/// into `bins` levels, and 4-connected runs of the same bucket become
/// candidate regions scored by accumulated squared error.
pub fn color_bin_components(
    target: &RasterImage,
    current: &RasterImage,
    epsilon: f64,
    bins: usize,
) -> SeedRegions {
    let (w, h) = (target.width(), target.height());
    let mut labels: Grid<i64> = Grid::filled(w, h, -1);
    let bin_of = |x: usize, y: usize| -> usize {
        let p = target.pixel(x, y);
        let len = (p.r * p.r + p.g * p.g + p.b * p.b).sqrt() / 3.0f64.sqrt();
        ((len * bins as f64) as usize).min(bins - 1)
    };
    let eligible = |x: usize, y: usize| -> bool {
        let t = target.pixel(x, y);
        let c = current.pixel(x, y);
        let d = [t.r - c.r, t.g - c.g, t.b - c.b];
        (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt() > epsilon
    };

    let mut regions: Vec<RegionStats> = Vec::new();
    let mut queue = Vec::new();
    for sy in 0..h {
        for sx in 0..w {
            if labels.at(sx, sy) >= 0 || !eligible(sx, sy) {
                continue;
            }
            let label = regions.len() as u32;
            let bin = bin_of(sx, sy);
            let mut stats = RegionStats {
                label,
                area: 0,
                bbox: PixelRect {
                    x_min: sx as u32,
                    y_min: sy as u32,
                    x_max: sx as u32,
                    y_max: sy as u32,
                },
                centroid: Point::default(),
                score: 0.0,
            };
            queue.clear();
            queue.push((sx, sy));
            labels.set(sx, sy, label as i64);
            let mut head = 0;
            while head < queue.len() {
                let (x, y) = queue[head];
                head += 1;
                stats.area += 1;
                stats.bbox.x_min = stats.bbox.x_min.min(x as u32);
                stats.bbox.y_min = stats.bbox.y_min.min(y as u32);
                stats.bbox.x_max = stats.bbox.x_max.max(x as u32);
                stats.bbox.y_max = stats.bbox.y_max.max(y as u32);
                stats.centroid.x += x as f64;
                stats.centroid.y += y as f64;
                let t = target.pixel(x, y);
                let c = current.pixel(x, y);
                let d = [t.r - c.r, t.g - c.g, t.b - c.b];
                stats.score += d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
                for (dx, dy) in [(0i64, -1i64), (-1, 0), (1, 0), (0, 1)] {
                    let nx = x as i64 + dx;
                    let ny = y as i64 + dy;
                    if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let (nx, ny) = (nx as usize, ny as usize);
                    if labels.at(nx, ny) < 0 && eligible(nx, ny) && bin_of(nx, ny) == bin {
                        labels.set(nx, ny, label as i64);
                        queue.push((nx, ny));
                    }
                }
            }
            stats.centroid.x /= stats.area as f64;
            stats.centroid.y /= stats.area as f64;
            regions.push(stats);
        }
    }
    SeedRegions { labels, regions }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::{Rgb, Rgba};
    use crate::render::eval_gradient;

    fn region(label: u32, score: f64) -> RegionStats {
        RegionStats {
            label,
            area: 1,
            bbox: PixelRect {
                x_min: 0,
                y_min: 0,
                x_max: 0,
                y_max: 0,
            },
            centroid: Point::default(),
            score,
        }
    }

    #[test]
    fn selection_orders_by_score() {
        let regions = vec![region(0, 5.0), region(1, 3.0), region(2, 9.0)];
        let top = select_top_regions(&regions, 1);
        assert_eq!(top.len(), 1);
        assert_eq!(top[0].label, 2);

        let top2 = select_top_regions(&regions, 2);
        assert_eq!(
            top2.iter().map(|r| r.label).collect::<Vec<_>>(),
            vec![2, 0]
        );
    }

    #[test]
    fn selection_skips_zero_scores() {
        let regions = vec![region(0, 0.0), region(1, 0.0), region(2, 0.0)];
        assert!(select_top_regions(&regions, 3).is_empty());
        let regions = vec![region(0, 0.0), region(1, 2.0)];
        assert_eq!(select_top_regions(&regions, 3).len(), 1);
    }

    #[test]
    fn gradient_diameter_clips() {
        // Region bbox 0.2W x 0.2H on a square canvas: lower clip boundary.
        let bbox = PixelRect {
            x_min: 0,
            y_min: 0,
            x_max: 19,
            y_max: 19,
        };
        assert!((gradient_diameter(&bbox, 100, 100) - 20.0).abs() < 1e-9);

        // Tiny region still clips up to 0.2 * min(W, H).
        let tiny = PixelRect {
            x_min: 5,
            y_min: 5,
            x_max: 6,
            y_max: 6,
        };
        assert!((gradient_diameter(&tiny, 100, 100) - 20.0).abs() < 1e-9);

        // Full-canvas region clips to min(W, H).
        let full = PixelRect {
            x_min: 0,
            y_min: 0,
            x_max: 99,
            y_max: 79,
        };
        assert!((gradient_diameter(&full, 100, 80) - 80.0).abs() < 1e-9);
    }

    #[test]
    fn init_path_is_flat_colored_disc() {
        let mut target = RasterImage::filled(32, 32, Rgba::opaque(Rgb::WHITE));
        target.set_pixel(16, 16, Rgba::new(0.2, 0.6, 0.9, 1.0));
        let reg = RegionStats {
            label: 7,
            area: 100,
            bbox: PixelRect {
                x_min: 10,
                y_min: 10,
                x_max: 21,
                y_max: 21,
            },
            centroid: Point::new(16.0, 16.0),
            score: 1.0,
        };
        let path = init_path(&reg, &target, 32, 32);
        assert_eq!(path.seed_region, 7);
        assert_eq!(path.fill.stop0, path.fill.stop1);
        assert_eq!(path.fill.stop0, Rgba::new(0.2, 0.6, 0.9, 1.0));
        // Equal stops: the gradient is constant everywhere.
        let c = eval_gradient(&path.fill, Point::new(3.0, 29.0));
        assert_eq!(c, path.fill.stop0);
        // Fill center matches the shape center at the region centroid.
        assert_eq!(path.fill.center, Point::new(16.5, 16.5));
        assert_eq!(path.shape.segment_count(), 4);
    }

    #[test]
    fn color_bins_split_distinct_colors() {
        // Left half dark, right half bright, over a matching-left current:
        // only the right half is eligible, one component.
        let mut target = RasterImage::filled(8, 4, Rgba::new(0.1, 0.1, 0.1, 1.0));
        for y in 0..4 {
            for x in 4..8 {
                target.set_pixel(x, y, Rgba::new(0.9, 0.9, 0.9, 1.0));
            }
        }
        let current = RasterImage::filled(8, 4, Rgba::new(0.1, 0.1, 0.1, 1.0));
        let seeds = color_bin_components(&target, &current, 0.1, 200);
        assert_eq!(seeds.regions.len(), 1);
        assert_eq!(seeds.regions[0].area, 16);
        assert_eq!(seeds.labels.at(0, 0), -1);
        assert_eq!(seeds.labels.at(5, 1), 0);
    }
}
