//! Gradient-aware segmentation of the residual image.
//!
//! The residual between target and render is masked by a per-pixel error
//! threshold, run through a discrete Laplacian to highlight fill boundaries,
//! binarized with Otsu's method, closed morphologically, and partitioned by a
//! marker-based watershed. Per-region accumulated squared error then drives
//! path initialization order.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::grid::Grid;
use crate::raster::RasterImage;

/// Default error norm below which pixels are excluded from the residual.
pub const DEFAULT_EPSILON: f64 = 0.1;

/// Inclusive pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PixelRect {
    pub x_min: u32,
    pub y_min: u32,
    pub x_max: u32,
    pub y_max: u32,
}

/// Aggregate statistics for one segmentation region.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionStats {
    pub label: u32,
    pub area: usize,
    pub bbox: PixelRect,
    /// Center of mass of member pixel indices.
    pub centroid: Point,
    /// Accumulated squared RGB error over member pixels.
    pub score: f64,
}

/// A dense labeling of the canvas: every pixel carries exactly one label in
/// `0..regions.len()`, and every label occurs.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationMap {
    pub labels: Grid<u32>,
    pub regions: Vec<RegionStats>,
}

impl SegmentationMap {
    pub fn width(&self) -> usize {
        self.labels.width()
    }

    pub fn height(&self) -> usize {
        self.labels.height()
    }

    /// Boolean membership mask of one region.
    pub fn region_mask(&self, label: u32) -> Grid<bool> {
        let mut mask = Grid::filled(self.width(), self.height(), false);
        for (x, y, &l) in self.labels.iter() {
            if l == label {
                mask.set(x, y, true);
            }
        }
        mask
    }
}

/// Signed RGB residual `(target - current)`, zeroed where the per-pixel
/// l2 error over RGB is at most `epsilon`.
pub fn masked_residual(
    target: &RasterImage,
    current: &RasterImage,
    epsilon: f64,
) -> Result<Grid<[f64; 3]>> {
    if !target.same_size(current) {
        return Err(Error::DimensionMismatch(
            target.width(),
            target.height(),
            current.width(),
            current.height(),
        ));
    }
    let (w, h) = (target.width(), target.height());
    let mut out = Grid::filled(w, h, [0.0; 3]);
    for y in 0..h {
        for x in 0..w {
            let t = target.pixel(x, y);
            let c = current.pixel(x, y);
            let d = [t.r - c.r, t.g - c.g, t.b - c.b];
            let norm = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            if norm > epsilon {
                out.set(x, y, d);
            }
        }
    }
    Ok(out)
}

/// Discrete Laplacian response of a 3-channel field, collapsed to one
/// channel by summing absolute per-channel responses.
///
/// Borders are zero-padded. The kernel is the 8-neighbor Laplacian
/// `[[1,1,1],[1,-8,1],[1,1,1]]`.
pub fn laplacian_response(residual: &Grid<[f64; 3]>) -> Result<Grid<f64>> {
    let (w, h) = (residual.width(), residual.height());
    if w < 3 || h < 3 {
        return Err(Error::ImageTooSmall {
            width: w,
            height: h,
            min: 3,
        });
    }
    let mut out = Grid::filled(w, h, 0.0);
    for y in 0..h {
        for x in 0..w {
            let mut acc = [0.0f64; 3];
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let nx = x as i64 + dx;
                    let ny = y as i64 + dy;
                    if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let k = if dx == 0 && dy == 0 { -8.0 } else { 1.0 };
                    let v = residual.at(nx as usize, ny as usize);
                    for c in 0..3 {
                        acc[c] += k * v[c];
                    }
                }
            }
            out.set(x, y, acc[0].abs() + acc[1].abs() + acc[2].abs());
        }
    }
    Ok(out)
}

/// Otsu's threshold over a 256-bin histogram of `[min, max]`.
///
/// Returns the bin edge maximizing between-class variance; ties break toward
/// the lower threshold. Errors if the field is constant.
pub fn otsu_threshold(field: &[f64]) -> Result<f64> {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &v in field {
        min = min.min(v);
        max = max.max(v);
    }
    if !(max > min) {
        return Err(Error::ConstantField);
    }

    const BINS: usize = 256;
    let delta = (max - min) / BINS as f64;
    let mut count = [0u64; BINS];
    let mut sum = [0.0f64; BINS];
    for &v in field {
        let b = (((v - min) / delta) as usize).min(BINS - 1);
        count[b] += 1;
        sum[b] += v;
    }
    let total_count: u64 = count.iter().sum();
    let total_sum: f64 = sum.iter().sum();

    let mut best_k = 0usize;
    let mut best_var = f64::NEG_INFINITY;
    let mut c0 = 0u64;
    let mut s0 = 0.0f64;
    for k in 0..BINS {
        c0 += count[k];
        s0 += sum[k];
        let c1 = total_count - c0;
        if c0 == 0 || c1 == 0 {
            continue;
        }
        let m0 = s0 / c0 as f64;
        let m1 = (total_sum - s0) / c1 as f64;
        let var = c0 as f64 * c1 as f64 * (m0 - m1) * (m0 - m1);
        if var > best_var {
            best_var = var;
            best_k = k;
        }
    }
    Ok(min + (best_k + 1) as f64 * delta)
}

/// `field > threshold`, then one morphological closing pass (3x3 square
/// dilation followed by erosion). Out-of-bounds neighbors are ignored by
/// both operators, so solid blocks touching the border survive unchanged.
pub fn binarize_and_close(field: &Grid<f64>, threshold: f64) -> Grid<bool> {
    let (w, h) = (field.width(), field.height());
    let mut mask = Grid::filled(w, h, false);
    for (x, y, &v) in field.iter() {
        if v > threshold {
            mask.set(x, y, true);
        }
    }
    let dilated = morph3x3(&mask, true);
    morph3x3(&dilated, false)
}

/// 3x3 square dilation (`dilate = true`) or erosion, ignoring out-of-bounds
/// neighbors.
fn morph3x3(mask: &Grid<bool>, dilate: bool) -> Grid<bool> {
    let (w, h) = (mask.width(), mask.height());
    let mut out = Grid::filled(w, h, false);
    for y in 0..h {
        for x in 0..w {
            let mut any = false;
            let mut all = true;
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let nx = x as i64 + dx;
                    let ny = y as i64 + dy;
                    if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let v = mask.at(nx as usize, ny as usize);
                    any |= v;
                    all &= v;
                }
            }
            out.set(x, y, if dilate { any } else { all });
        }
    }
    out
}

/// Exact squared Euclidean distance transform: for every pixel, the squared
/// distance to the nearest `true` pixel of `features`. Integer-valued, so
/// plateau comparisons are exact.
fn squared_edt(features: &Grid<bool>) -> Grid<i64> {
    let (w, h) = (features.width(), features.height());
    let inf = ((w + h) as i64 + 1).pow(2);

    // Vertical pass: 1D distance along each column.
    let mut vert = Grid::filled(w, h, inf);
    for x in 0..w {
        let mut d = inf;
        for y in 0..h {
            d = if features.at(x, y) {
                0
            } else {
                (d + 1).min(inf)
            };
            vert.set(x, y, d);
        }
        let mut d = inf;
        for y in (0..h).rev() {
            d = if features.at(x, y) {
                0
            } else {
                (d + 1).min(inf)
            };
            if d < vert.at(x, y) {
                vert.set(x, y, d);
            }
        }
    }

    // Horizontal pass: lower envelope of parabolas rooted at (v, vert^2).
    let mut out = Grid::filled(w, h, inf);
    let mut roots = vec![0usize; w];
    let mut bounds = vec![0.0f64; w + 1];
    for y in 0..h {
        let g: Vec<i64> = (0..w)
            .map(|x| {
                let d = vert.at(x, y);
                if d >= inf {
                    inf
                } else {
                    d * d
                }
            })
            .collect();
        let mut k = 0usize;
        roots[0] = 0;
        bounds[0] = f64::NEG_INFINITY;
        bounds[1] = f64::INFINITY;
        for q in 1..w {
            if g[q] >= inf {
                continue;
            }
            loop {
                let p = roots[k];
                // Intersection of parabolas rooted at p and q.
                let s = if g[p] >= inf {
                    f64::NEG_INFINITY
                } else {
                    ((g[q] - g[p]) as f64 + (q * q - p * p) as f64) / (2.0 * (q - p) as f64)
                };
                if s <= bounds[k] {
                    if k == 0 {
                        roots[0] = q;
                        bounds[1] = f64::INFINITY;
                        break;
                    }
                    k -= 1;
                } else {
                    k += 1;
                    roots[k] = q;
                    bounds[k] = s;
                    bounds[k + 1] = f64::INFINITY;
                    break;
                }
            }
        }
        let mut k = 0usize;
        for x in 0..w {
            while bounds[k + 1] < x as f64 {
                k += 1;
            }
            let v = roots[k];
            let dv = g[v];
            out.set(
                x,
                y,
                if dv >= inf {
                    inf
                } else {
                    (x as i64 - v as i64).pow(2) + dv
                },
            );
        }
    }
    out
}

const NEIGHBORS8: [(i64, i64); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

/// Marker-based watershed over a boolean ridge mask.
///
/// Markers are the regional maxima of the distance transform of the non-edge
/// pixels (maxima closer than 3 px are merged); basins are flooded with
/// 4-connectivity in order of decreasing distance, so edge pixels are
/// absorbed into adjacent basins and the result is a complete partition with
/// dense labels.
pub fn watershed_segment(edge_mask: &Grid<bool>) -> SegmentationMap {
    let (w, h) = (edge_mask.width(), edge_mask.height());
    let any_edge = edge_mask.data().iter().any(|&v| v);
    if !any_edge {
        return single_region_map(w, h);
    }
    let dist = squared_edt(edge_mask);

    // Regional maxima: 8-connected equal-value plateaus with no strictly
    // greater neighbor. Edge pixels (distance 0) never qualify while any
    // positive distance exists next to them; an all-edge mask degenerates to
    // a single region.
    let mut marker: Grid<i64> = Grid::filled(w, h, -1);
    let mut n_markers = 0i64;
    let mut plateau = Vec::new();
    let mut visited = Grid::filled(w, h, false);
    for sy in 0..h {
        for sx in 0..w {
            if visited.at(sx, sy) || edge_mask.at(sx, sy) {
                continue;
            }
            let value = dist.at(sx, sy);
            plateau.clear();
            plateau.push((sx, sy));
            visited.set(sx, sy, true);
            let mut is_max = true;
            let mut head = 0usize;
            while head < plateau.len() {
                let (x, y) = plateau[head];
                head += 1;
                for (dx, dy) in NEIGHBORS8 {
                    let nx = x as i64 + dx;
                    let ny = y as i64 + dy;
                    if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let (nx, ny) = (nx as usize, ny as usize);
                    let nv = dist.at(nx, ny);
                    if nv > value {
                        is_max = false;
                    } else if nv == value && !visited.at(nx, ny) {
                        visited.set(nx, ny, true);
                        plateau.push((nx, ny));
                    }
                }
            }
            if is_max {
                for &(x, y) in &plateau {
                    marker.set(x, y, n_markers);
                }
                n_markers += 1;
            }
        }
    }
    if n_markers == 0 {
        return single_region_map(w, h);
    }

    // Merge markers whose pixels come within 3 px of each other.
    let mut parent: Vec<usize> = (0..n_markers as usize).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        let mut c = i;
        while parent[c] != r {
            let next = parent[c];
            parent[c] = r;
            c = next;
        }
        r
    }
    for y in 0..h {
        for x in 0..w {
            let m = marker.at(x, y);
            if m < 0 {
                continue;
            }
            for dy in -3i64..=3 {
                for dx in -3i64..=3 {
                    if dx * dx + dy * dy > 9 {
                        continue;
                    }
                    let nx = x as i64 + dx;
                    let ny = y as i64 + dy;
                    if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let o = marker.at(nx as usize, ny as usize);
                    if o >= 0 && o != m {
                        let (a, b) = (find(&mut parent, m as usize), find(&mut parent, o as usize));
                        if a != b {
                            parent[a.max(b)] = a.min(b);
                        }
                    }
                }
            }
        }
    }
    // Dense relabeling of merged roots in scan order of first occurrence.
    let mut root_label: Vec<i64> = vec![-1; n_markers as usize];
    let mut n_regions = 0u32;
    let mut labels: Grid<u32> = Grid::filled(w, h, u32::MAX);
    let mut heap: BinaryHeap<Reverse<(i64, u64, u32, u32)>> = BinaryHeap::new();
    let mut seq = 0u64;
    for y in 0..h {
        for x in 0..w {
            let m = marker.at(x, y);
            if m < 0 {
                continue;
            }
            let root = find(&mut parent, m as usize);
            if root_label[root] < 0 {
                root_label[root] = n_regions as i64;
                n_regions += 1;
            }
            labels.set(x, y, root_label[root] as u32);
            heap.push(Reverse((-dist.at(x, y), seq, x as u32, y as u32)));
            seq += 1;
        }
    }

    // Priority flood: highest distance first, 4-connectivity, deterministic
    // FIFO tie-break via the sequence number.
    while let Some(Reverse((_, _, x, y))) = heap.pop() {
        let label = labels.at(x as usize, y as usize);
        for (dx, dy) in [(0i64, -1i64), (-1, 0), (1, 0), (0, 1)] {
            let nx = x as i64 + dx;
            let ny = y as i64 + dy;
            if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                continue;
            }
            let (nx, ny) = (nx as usize, ny as usize);
            if labels.at(nx, ny) != u32::MAX {
                continue;
            }
            labels.set(nx, ny, label);
            heap.push(Reverse((-dist.at(nx, ny), seq, nx as u32, ny as u32)));
            seq += 1;
        }
    }

    let regions = collect_region_stats(&labels, n_regions);
    SegmentationMap { labels, regions }
}

fn single_region_map(w: usize, h: usize) -> SegmentationMap {
    let labels = Grid::filled(w, h, 0u32);
    let regions = collect_region_stats(&labels, 1);
    SegmentationMap { labels, regions }
}

fn collect_region_stats(labels: &Grid<u32>, n_regions: u32) -> Vec<RegionStats> {
    let mut stats: Vec<RegionStats> = (0..n_regions)
        .map(|label| RegionStats {
            label,
            area: 0,
            bbox: PixelRect {
                x_min: u32::MAX,
                y_min: u32::MAX,
                x_max: 0,
                y_max: 0,
            },
            centroid: Point::default(),
            score: 0.0,
        })
        .collect();
    for (x, y, &l) in labels.iter() {
        let s = &mut stats[l as usize];
        s.area += 1;
        s.bbox.x_min = s.bbox.x_min.min(x as u32);
        s.bbox.y_min = s.bbox.y_min.min(y as u32);
        s.bbox.x_max = s.bbox.x_max.max(x as u32);
        s.bbox.y_max = s.bbox.y_max.max(y as u32);
        s.centroid.x += x as f64;
        s.centroid.y += y as f64;
    }
    for s in &mut stats {
        debug_assert!(s.area > 0, "label {} unused", s.label);
        s.centroid.x /= s.area as f64;
        s.centroid.y /= s.area as f64;
    }
    stats
}

/// Fill per-region accumulated squared RGB error (and refresh the geometric
/// stats) from a target/current image pair.
pub fn score_regions(
    map: &SegmentationMap,
    target: &RasterImage,
    current: &RasterImage,
) -> Result<SegmentationMap> {
    if !target.same_size(current)
        || target.width() != map.width()
        || target.height() != map.height()
    {
        return Err(Error::DimensionMismatch(
            target.width(),
            target.height(),
            map.width(),
            map.height(),
        ));
    }
    let mut regions = collect_region_stats(&map.labels, map.regions.len() as u32);
    for (x, y, &l) in map.labels.iter() {
        let t = target.pixel(x, y);
        let c = current.pixel(x, y);
        let d = [t.r - c.r, t.g - c.g, t.b - c.b];
        regions[l as usize].score += d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
    }
    Ok(SegmentationMap {
        labels: map.labels.clone(),
        regions,
    })
}

/// Intermediate products of one segmentation run, for inspection dumps.
pub struct SegmentationStages {
    pub residual: Grid<[f64; 3]>,
    pub response: Grid<f64>,
    pub threshold: Option<f64>,
    pub binary: Option<Grid<bool>>,
    pub closed: Option<Grid<bool>>,
    pub map: SegmentationMap,
}

/// Run the full per-epoch segmentation of the masked residual and score the
/// regions.
///
/// A perfectly fitted image (all-zero masked residual) yields a single
/// region with score forced to 0, which signals convergence upstream.
pub fn segment_residual(
    target: &RasterImage,
    current: &RasterImage,
    epsilon: f64,
) -> Result<SegmentationMap> {
    Ok(segment_residual_stages(target, current, epsilon)?.map)
}

/// Like [`segment_residual`] but keeping every intermediate stage.
pub fn segment_residual_stages(
    target: &RasterImage,
    current: &RasterImage,
    epsilon: f64,
) -> Result<SegmentationStages> {
    let residual = masked_residual(target, current, epsilon)?;
    let all_zero = residual.data().iter().all(|v| *v == [0.0; 3]);
    let response = laplacian_response(&residual)?;
    if all_zero {
        // Perfect fit: single region, zero score.
        let map = single_region_map(target.width(), target.height());
        return Ok(SegmentationStages {
            residual,
            response,
            threshold: None,
            binary: None,
            closed: None,
            map,
        });
    }
    match otsu_threshold(response.data()) {
        Ok(threshold) => {
            let binary = {
                let mut m = Grid::filled(response.width(), response.height(), false);
                for (x, y, &v) in response.iter() {
                    if v > threshold {
                        m.set(x, y, true);
                    }
                }
                m
            };
            let closed = binarize_and_close(&response, threshold);
            let map = watershed_segment(&closed);
            let map = score_regions(&map, target, current)?;
            Ok(SegmentationStages {
                residual,
                response,
                threshold: Some(threshold),
                binary: Some(binary),
                closed: Some(closed),
                map,
            })
        }
        Err(Error::ConstantField) => {
            // Nonzero residual whose Laplacian is constant: no separable
            // boundary, treat the canvas as one region and score it.
            let map = single_region_map(target.width(), target.height());
            let map = score_regions(&map, target, current)?;
            Ok(SegmentationStages {
                residual,
                response,
                threshold: None,
                binary: None,
                closed: None,
                map,
            })
        }
        Err(e) => Err(e),
    }
}
