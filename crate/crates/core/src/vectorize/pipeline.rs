//! The progressive vectorization loop.
//!
//! Each epoch renders the current scene, segments the masked residual,
//! seeds new paths in the highest-error regions, and then optimizes every
//! path jointly for a fixed number of iterations.

use crate::error::{Error, Result};
use crate::geometry::ClosedPath;
use crate::grid::Grid;
use crate::raster::{composite_over_background, mse, psnr_from_mse, RasterImage, Rgb};
use crate::render::{render, render_with_backward, VectorScene};
use crate::segment::segment_residual;
use crate::vectorize::init::{init_path, select_top_regions, SeedRegions};
use crate::vectorize::loss::{
    focused_set, sg_loss, sg_weight, udf_weight, xing_loss_with_grads, LossConfig,
};
use crate::vectorize::optim::{AdamConfig, AdamOptimizer};
use crate::vectorize::schedule::EpochSchedule;

/// Number of color-length buckets used by the no-guidance seeding fallback.
pub const COLOR_BINS: usize = 200;

/// Pipeline-level configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub loss: LossConfig,
    pub optimizer: AdamConfig,
    /// Disable gradient fills: both stops stay tied to one RGBA per path.
    pub no_gradient: bool,
    /// Disable segmentation guidance: color-bin component seeding plus the
    /// raw contour weight instead of the segmentation-guided weight.
    pub no_seg_guidance: bool,
    /// Focused-set refresh period, in iterations.
    pub coverage_refresh: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            loss: LossConfig::default(),
            optimizer: AdamConfig::default(),
            no_gradient: false,
            no_seg_guidance: false,
            coverage_refresh: 10,
        }
    }
}

/// Scalar log of one optimization iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationLog {
    pub epoch: usize,
    pub iteration: usize,
    pub n_paths: usize,
    pub l_sg: f64,
    pub l_xing: f64,
    pub total: f64,
    pub mse: f64,
    pub psnr: f64,
}

/// Summary of one epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochReport {
    pub epoch: usize,
    pub paths_added: usize,
    pub n_paths: usize,
    pub mse: f64,
    pub psnr: f64,
    /// Set when segmentation found no region left with positive score.
    pub refinement_only: bool,
    pub iterations: Vec<IterationLog>,
}

/// Progressive vectorization state.
pub struct Pipeline {
    target: RasterImage,
    scene: VectorScene,
    cfg: PipelineConfig,
    optimizer: AdamOptimizer,
    /// Frozen seed-region membership per path, captured at init.
    seed_masks: Vec<Grid<bool>>,
    /// Indices of the paths appended by the current epoch.
    epoch_paths: Vec<usize>,
    epoch: usize,
    zero_score_epochs: usize,
}

impl Pipeline {
    /// Start a pipeline for a target image. Transparent targets are
    /// flattened over `background`, which is also the scene's base color.
    pub fn new(target: &RasterImage, background: Rgb, cfg: PipelineConfig) -> Self {
        let flattened = composite_over_background(target, background);
        let scene = VectorScene::new(flattened.width(), flattened.height(), background);
        let optimizer = AdamOptimizer::new(cfg.optimizer);
        Self {
            target: flattened,
            scene,
            cfg,
            optimizer,
            seed_masks: Vec::new(),
            epoch_paths: Vec::new(),
            epoch: 0,
            zero_score_epochs: 0,
        }
    }

    pub fn scene(&self) -> &VectorScene {
        &self.scene
    }

    pub fn target(&self) -> &RasterImage {
        &self.target
    }

    pub fn n_paths(&self) -> usize {
        self.scene.paths.len()
    }

    /// True after two consecutive epochs found nothing left to fit.
    pub fn converged(&self) -> bool {
        self.zero_score_epochs >= 2
    }

    /// Candidate seed regions for the next epoch.
    fn seed_regions(&self, current: &RasterImage) -> Result<SeedRegions> {
        if self.cfg.no_seg_guidance {
            Ok(crate::vectorize::init::color_bin_components(
                &self.target,
                current,
                self.cfg.loss.epsilon_seg,
                COLOR_BINS,
            ))
        } else {
            let map = segment_residual(&self.target, current, self.cfg.loss.epsilon_seg)?;
            Ok(SeedRegions::from(&map))
        }
    }

    /// Run one epoch: segment, append up to `n_new` paths, optimize all
    /// paths for `iterations` steps.
    pub fn run_epoch(&mut self, n_new: usize, iterations: usize) -> Result<EpochReport> {
        self.epoch += 1;
        let epoch = self.epoch;
        let current = render(&self.scene);

        let seeds = self
            .seed_regions(&current)
            .map_err(|e| pipeline_err(epoch, 0, e))?;
        let selected = select_top_regions(&seeds.regions, n_new);
        let refinement_only = selected.is_empty();
        if refinement_only {
            self.zero_score_epochs += 1;
        } else {
            self.zero_score_epochs = 0;
        }

        self.epoch_paths.clear();
        for region in &selected {
            let path = init_path(region, &self.target, self.scene.width, self.scene.height);
            self.epoch_paths.push(self.scene.paths.len());
            self.seed_masks.push(seeds.mask_of(region.label));
            self.scene.paths.push(path);
        }
        self.optimizer.ensure_paths(&self.scene);

        let mut iterations_log = Vec::with_capacity(iterations);
        if !self.scene.paths.is_empty() {
            let mut focused = Grid::filled(self.scene.width, self.scene.height, false);
            for iter in 0..iterations {
                if !self.cfg.no_seg_guidance && iter % self.cfg.coverage_refresh == 0 {
                    focused = focused_set(&self.scene, &self.seed_masks);
                }
                let log = self
                    .optimize_step(epoch, iter, &focused)
                    .map_err(|e| pipeline_err(epoch, iter, e))?;
                iterations_log.push(log);
            }
        }

        let final_render = render(&self.scene);
        let final_mse = mse(&self.target, &final_render)?;
        Ok(EpochReport {
            epoch,
            paths_added: selected.len(),
            n_paths: self.scene.paths.len(),
            mse: final_mse,
            psnr: psnr_from_mse(final_mse),
            refinement_only,
            iterations: iterations_log,
        })
    }

    /// One optimization iteration over all paths.
    fn optimize_step(
        &mut self,
        epoch: usize,
        iteration: usize,
        focused: &Grid<bool>,
    ) -> Result<IterationLog> {
        // Contour weight follows the paths added this epoch; once an epoch
        // appends nothing (pure refinement) every contour participates.
        let udf_shapes: Vec<&ClosedPath> = if self.epoch_paths.is_empty() {
            self.scene.paths.iter().map(|p| &p.shape).collect()
        } else {
            self.epoch_paths
                .iter()
                .map(|&i| &self.scene.paths[i].shape)
                .collect()
        };
        let udf = udf_weight(
            &udf_shapes,
            self.scene.width,
            self.scene.height,
            self.cfg.loss.tau,
        )?;
        let weights = if self.cfg.no_seg_guidance {
            udf
        } else {
            sg_weight(&udf, focused, self.cfg.loss.alpha_s)
        };

        let target = &self.target;
        let (image, mut grads) = render_with_backward(&self.scene, |img| {
            // d l_sg / d pixel = (2/3) w (render - target) per channel.
            let mut lg = vec![0.0; img.width() * img.height() * 3];
            for (i, (pt, pr)) in target
                .data()
                .chunks_exact(4)
                .zip(img.data().chunks_exact(4))
                .enumerate()
            {
                let w = weights[i] * (2.0 / 3.0);
                for c in 0..3 {
                    lg[i * 3 + c] = w * (pr[c] - pt[c]);
                }
            }
            lg
        });

        let l_sg = sg_loss(&self.target, &image, &weights)?;
        let (l_xing, xing_grads) = xing_loss_with_grads(&self.scene);
        grads.add_scaled(&xing_grads, self.cfg.loss.lambda_xing);

        if self.cfg.no_gradient {
            // Solid fill: both stops carry one RGBA, so their gradients sum.
            for pg in &mut grads.paths {
                for c in 0..4 {
                    pg.stop0[c] += pg.stop1[c];
                    pg.stop1[c] = 0.0;
                }
            }
        }

        self.optimizer.step(&mut self.scene, &grads)?;

        if self.cfg.no_gradient {
            for path in &mut self.scene.paths {
                path.fill.stop1 = path.fill.stop0;
            }
        }

        let m = mse(&self.target, &image)?;
        Ok(IterationLog {
            epoch,
            iteration,
            n_paths: self.scene.paths.len(),
            l_sg,
            l_xing,
            total: l_sg + self.cfg.loss.lambda_xing * l_xing,
            mse: m,
            psnr: psnr_from_mse(m),
        })
    }

    /// Run a whole schedule, stopping early once converged. `on_epoch` sees
    /// each report as it completes (for snapshots and logging).
    pub fn run(
        &mut self,
        schedule: &EpochSchedule,
        mut on_epoch: impl FnMut(&Pipeline, &EpochReport),
    ) -> Result<Vec<EpochReport>> {
        let mut reports = Vec::new();
        for &n_new in &schedule.paths_per_epoch {
            let report = self.run_epoch(n_new, schedule.iterations_per_epoch)?;
            on_epoch(self, &report);
            reports.push(report);
            if self.converged() {
                break;
            }
        }
        Ok(reports)
    }
}

fn pipeline_err(epoch: usize, iteration: usize, e: Error) -> Error {
    match e {
        e @ Error::Pipeline { .. } => e,
        other => Error::Pipeline {
            epoch,
            iteration,
            message: other.to_string(),
        },
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::geometry::Point;
    use crate::raster::Rgba;
    use crate::render::{GradientPath, RadialGradient};
    use crate::vectorize::schedule::EpochSchedule;

    pub(super) fn gradient_target(w: usize, h: usize) -> RasterImage {
        // One radial blob on white, rendered by the scene renderer itself.
        let mut scene = VectorScene::new(w, h, Rgb::WHITE);
        scene.paths.push(GradientPath {
            shape: ClosedPath::circle(Point::new(w as f64 / 2.0, h as f64 / 2.0), w as f64 / 4.0),
            fill: RadialGradient {
                center: Point::new(w as f64 / 2.0, h as f64 / 2.0),
                radius: w as f64 / 4.0,
                stop0: Rgba::new(0.9, 0.2, 0.1, 1.0),
                stop1: Rgba::new(0.2, 0.1, 0.8, 1.0),
            },
            seed_region: 0,
        });
        render(&scene)
    }

    #[test]
    fn epoch_on_uniform_target_adds_path_and_descends() {
        let target = RasterImage::filled(32, 32, Rgba::new(0.2, 0.5, 0.8, 1.0));
        let blank_mse = mse(
            &target,
            &RasterImage::filled(32, 32, Rgba::opaque(Rgb::WHITE)),
        )
        .unwrap();
        let mut pipe = Pipeline::new(&target, Rgb::WHITE, PipelineConfig::default());
        let report = pipe.run_epoch(1, 40).unwrap();
        assert_eq!(report.paths_added, 1);
        assert_eq!(report.n_paths, 1);
        assert!(
            report.mse < blank_mse,
            "mse {} not below blank {}",
            report.mse,
            blank_mse
        );
    }

    #[test]
    fn epoch_on_perfect_scene_flags_refinement() {
        let target = RasterImage::filled(24, 24, Rgba::opaque(Rgb::WHITE));
        let mut pipe = Pipeline::new(&target, Rgb::WHITE, PipelineConfig::default());
        let report = pipe.run_epoch(1, 5).unwrap();
        assert!(report.refinement_only);
        assert_eq!(report.n_paths, 0);
        assert!(!pipe.converged());
        let report = pipe.run_epoch(1, 5).unwrap();
        assert!(report.refinement_only);
        assert!(pipe.converged());
    }

    #[test]
    fn path_count_is_append_only_across_epochs() {
        let target = gradient_target(32, 32);
        let mut pipe = Pipeline::new(&target, Rgb::WHITE, PipelineConfig::default());
        let schedule = EpochSchedule::new(vec![1, 1, 2], 15).unwrap();
        let reports = pipe.run(&schedule, |_, _| {}).unwrap();
        let mut prev = 0usize;
        for r in &reports {
            assert!(r.n_paths >= prev, "path count decreased");
            prev = r.n_paths;
        }
        // First path keeps its index: seed colors at init are stable and the
        // first path was seeded first.
        assert!(pipe.n_paths() >= 1);
    }

    #[test]
    fn loss_identity_holds_every_iteration() {
        let target = gradient_target(32, 32);
        let mut pipe = Pipeline::new(&target, Rgb::WHITE, PipelineConfig::default());
        let report = pipe.run_epoch(1, 25).unwrap();
        for log in &report.iterations {
            let expect = log.l_sg + pipe.cfg.loss.lambda_xing * log.l_xing;
            assert_eq!(log.total, expect);
        }
    }

    #[test]
    fn end_to_end_descent_on_gradient_blob() {
        let target = gradient_target(48, 48);
        let mut pipe = Pipeline::new(&target, Rgb::WHITE, PipelineConfig::default());
        let schedule = EpochSchedule::new(vec![1, 1], 120).unwrap();
        let reports = pipe.run(&schedule, |_, _| {}).unwrap();
        let first_iter_mse = reports[0].iterations[0].mse;
        let final_mse = reports.last().unwrap().mse;
        assert!(
            final_mse < first_iter_mse,
            "no descent: {final_mse} vs {first_iter_mse}"
        );
    }

    #[test]
    fn ablation_modes_stay_structural() {
        let target = gradient_target(32, 32);
        let cfg = PipelineConfig {
            no_gradient: true,
            no_seg_guidance: true,
            ..PipelineConfig::default()
        };
        let mut pipe = Pipeline::new(&target, Rgb::WHITE, cfg);
        let report = pipe.run_epoch(2, 30).unwrap();
        assert!(report.n_paths >= 1);
        for path in &pipe.scene().paths {
            assert_eq!(
                path.fill.stop0, path.fill.stop1,
                "solid-fill mode must keep stops tied"
            );
        }
    }
}
