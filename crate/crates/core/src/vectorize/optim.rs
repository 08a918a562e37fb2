//! Adam over scene parameters, with separate learning rates for control
//! points and fill parameters.

use crate::error::{Error, Result};
use crate::render::{PathGrads, SceneGrads, VectorScene};

/// Optimizer hyperparameters. Control points step at `lr_points`, gradient
/// fill parameters (center, radius, stops) at `lr_fill`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr_points: f64,
    pub lr_fill: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr_points: 1.0,
            lr_fill: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// First/second moments and step count for one path's parameters. Paths
/// joining in later epochs start with fresh moments and their own step
/// count, while existing paths keep accumulated state.
#[derive(Debug, Clone)]
struct PathState {
    step: u64,
    m: PathGrads,
    v: PathGrads,
}

#[derive(Debug, Clone)]
pub struct AdamOptimizer {
    cfg: AdamConfig,
    states: Vec<PathState>,
}

impl AdamOptimizer {
    pub fn new(cfg: AdamConfig) -> Self {
        Self {
            cfg,
            states: Vec::new(),
        }
    }

    /// Create fresh state for paths appended since the last call.
    pub fn ensure_paths(&mut self, scene: &VectorScene) {
        while self.states.len() < scene.paths.len() {
            let n = scene.paths[self.states.len()].shape.points().len();
            self.states.push(PathState {
                step: 0,
                m: PathGrads::zeros(n),
                v: PathGrads::zeros(n),
            });
        }
    }

    /// One Adam step over every path; radius and stop colors are clamped
    /// back to their valid ranges afterwards.
    pub fn step(&mut self, scene: &mut VectorScene, grads: &SceneGrads) -> Result<()> {
        self.ensure_paths(scene);
        let cfg = self.cfg;
        for (pi, ((path, pg), state)) in scene
            .paths
            .iter_mut()
            .zip(&grads.paths)
            .zip(&mut self.states)
            .enumerate()
        {
            state.step += 1;
            let t = state.step;
            let bc1 = 1.0 - cfg.beta1.powi(t as i32);
            let bc2 = 1.0 - cfg.beta2.powi(t as i32);

            let update = |value: &mut f64, grad: f64, m: &mut f64, v: &mut f64, lr: f64, name: &dyn Fn() -> String| -> Result<()> {
                if !grad.is_finite() {
                    return Err(Error::NonFiniteGradient(name()));
                }
                *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * grad;
                *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * grad * grad;
                let m_hat = *m / bc1;
                let v_hat = *v / bc2;
                *value -= lr * m_hat / (v_hat.sqrt() + cfg.epsilon);
                Ok(())
            };

            let points = path.shape.points_mut();
            for (i, p) in points.iter_mut().enumerate() {
                update(
                    &mut p.x,
                    pg.points[i].x,
                    &mut state.m.points[i].x,
                    &mut state.v.points[i].x,
                    cfg.lr_points,
                    &|| format!("path {pi} point {i} x"),
                )?;
                update(
                    &mut p.y,
                    pg.points[i].y,
                    &mut state.m.points[i].y,
                    &mut state.v.points[i].y,
                    cfg.lr_points,
                    &|| format!("path {pi} point {i} y"),
                )?;
            }

            let fill = &mut path.fill;
            update(
                &mut fill.center.x,
                pg.center.x,
                &mut state.m.center.x,
                &mut state.v.center.x,
                cfg.lr_fill,
                &|| format!("path {pi} gradient center x"),
            )?;
            update(
                &mut fill.center.y,
                pg.center.y,
                &mut state.m.center.y,
                &mut state.v.center.y,
                cfg.lr_fill,
                &|| format!("path {pi} gradient center y"),
            )?;
            update(
                &mut fill.radius,
                pg.radius,
                &mut state.m.radius,
                &mut state.v.radius,
                cfg.lr_fill,
                &|| format!("path {pi} gradient radius"),
            )?;
            for c in 0..4 {
                let ch = ["r", "g", "b", "a"][c];
                let (s0, s1) = (&mut fill.stop0, &mut fill.stop1);
                let slot0: &mut f64 = match c {
                    0 => &mut s0.r,
                    1 => &mut s0.g,
                    2 => &mut s0.b,
                    _ => &mut s0.a,
                };
                update(
                    slot0,
                    pg.stop0[c],
                    &mut state.m.stop0[c],
                    &mut state.v.stop0[c],
                    cfg.lr_fill,
                    &|| format!("path {pi} stop0.{ch}"),
                )?;
                let slot1: &mut f64 = match c {
                    0 => &mut s1.r,
                    1 => &mut s1.g,
                    2 => &mut s1.b,
                    _ => &mut s1.a,
                };
                update(
                    slot1,
                    pg.stop1[c],
                    &mut state.m.stop1[c],
                    &mut state.v.stop1[c],
                    cfg.lr_fill,
                    &|| format!("path {pi} stop1.{ch}"),
                )?;
            }
            fill.clamp_valid();
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ClosedPath, Point};
    use crate::raster::{Rgb, Rgba};
    use crate::render::{GradientPath, RadialGradient};

    fn scene_with_disc() -> VectorScene {
        let mut scene = VectorScene::new(32, 32, Rgb::WHITE);
        scene.paths.push(GradientPath {
            shape: ClosedPath::circle(Point::new(16.0, 16.0), 8.0),
            fill: RadialGradient::solid(
                Point::new(16.0, 16.0),
                8.0,
                Rgba::new(0.5, 0.5, 0.5, 1.0),
            ),
            seed_region: 0,
        });
        scene
    }

    #[test]
    fn zero_gradients_leave_parameters_unchanged() {
        let mut scene = scene_with_disc();
        let before = scene.clone();
        let grads = SceneGrads::zeros(&scene);
        let mut opt = AdamOptimizer::new(AdamConfig::default());
        for _ in 0..5 {
            opt.step(&mut scene, &grads).unwrap();
        }
        assert_eq!(scene, before);
    }

    #[test]
    fn first_step_magnitude_is_learning_rate() {
        let mut scene = scene_with_disc();
        let x0 = scene.paths[0].shape.points()[0].x;
        let mut grads = SceneGrads::zeros(&scene);
        grads.paths[0].points[0].x = 0.37; // any positive gradient
        let mut opt = AdamOptimizer::new(AdamConfig::default());
        opt.step(&mut scene, &grads).unwrap();
        let moved = x0 - scene.paths[0].shape.points()[0].x;
        // Bias-corrected first step is lr * g / (|g| + eps) = lr * sign(g).
        assert!((moved - 1.0).abs() < 1e-6, "moved {moved}");
    }

    #[test]
    fn fill_group_uses_small_rate() {
        let mut scene = scene_with_disc();
        let r0 = scene.paths[0].fill.stop0.r;
        let mut grads = SceneGrads::zeros(&scene);
        grads.paths[0].stop0[0] = -2.0;
        let mut opt = AdamOptimizer::new(AdamConfig::default());
        opt.step(&mut scene, &grads).unwrap();
        let moved = scene.paths[0].fill.stop0.r - r0;
        assert!((moved - 0.01).abs() < 1e-7, "moved {moved}");
    }

    #[test]
    fn stops_clamp_to_unit_range() {
        let mut scene = scene_with_disc();
        scene.paths[0].fill.stop0.r = 0.999;
        let mut grads = SceneGrads::zeros(&scene);
        grads.paths[0].stop0[0] = -5.0; // pushes the value up
        let mut opt = AdamOptimizer::new(AdamConfig::default());
        for _ in 0..3 {
            opt.step(&mut scene, &grads).unwrap();
        }
        assert_eq!(scene.paths[0].fill.stop0.r, 1.0);
    }

    #[test]
    fn radius_clamps_to_minimum() {
        let mut scene = scene_with_disc();
        scene.paths[0].fill.radius = 0.52;
        let mut grads = SceneGrads::zeros(&scene);
        grads.paths[0].radius = 5.0;
        let mut opt = AdamOptimizer::new(AdamConfig::default());
        for _ in 0..10 {
            opt.step(&mut scene, &grads).unwrap();
        }
        assert_eq!(scene.paths[0].fill.radius, 0.5);
    }

    #[test]
    fn non_finite_gradient_names_parameter() {
        let mut scene = scene_with_disc();
        let mut grads = SceneGrads::zeros(&scene);
        grads.paths[0].radius = f64::NAN;
        let mut opt = AdamOptimizer::new(AdamConfig::default());
        let err = opt.step(&mut scene, &grads).unwrap_err();
        match err {
            Error::NonFiniteGradient(name) => {
                assert!(name.contains("radius"), "got {name}");
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn late_paths_get_fresh_moments() {
        let mut scene = scene_with_disc();
        let mut opt = AdamOptimizer::new(AdamConfig::default());
        let mut grads = SceneGrads::zeros(&scene);
        grads.paths[0].points[0].x = 1.0;
        for _ in 0..7 {
            opt.step(&mut scene, &grads).unwrap();
        }
        // Append a second path; its first step must behave like step 1.
        scene.paths.push(scene.paths[0].clone());
        opt.ensure_paths(&scene);
        let mut grads = SceneGrads::zeros(&scene);
        grads.paths[1].points[0].x = 0.5;
        let x0 = scene.paths[1].shape.points()[0].x;
        opt.step(&mut scene, &grads).unwrap();
        let moved = x0 - scene.paths[1].shape.points()[0].x;
        assert!((moved - 1.0).abs() < 1e-6, "fresh path moved {moved}");
    }
}
