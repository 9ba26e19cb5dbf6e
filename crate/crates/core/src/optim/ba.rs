use nalgebra::{DMatrix, DVector, Vector2, Vector3, Vector6};

use crate::geometry::{CameraIntrinsics, Pose};

use super::pose::EstimateOptions;
use super::residual::{
    line_residual, line_residual_jacobians, point_residual, point_residual_jacobians,
    LineObservation, PointObservation,
};
use super::{IterationTrace, OptimError};

/// A map point observed from a window pose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaPointObs {
    pub pose_idx: usize,
    pub point_idx: usize,
    pub pixel: Vector2<f64>,
}

/// A map line observed from a window pose; endpoint order matches the
/// stored line landmark.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaLineObs {
    pub pose_idx: usize,
    pub line_idx: usize,
    pub start_obs: Vector2<f64>,
    pub end_obs: Vector2<f64>,
}

/// Joint pose / landmark problem over a window of keyframes.
///
/// `fixed_poses` marks gauge anchors excluded from the update. Landmarks
/// observed fewer than two times are held fixed, as are poses without any
/// observation.
#[derive(Debug, Clone, Default)]
pub struct WindowProblem {
    pub poses: Vec<Pose>,
    pub fixed_poses: Vec<bool>,
    pub points: Vec<Vector3<f64>>,
    /// Line landmarks as free endpoint pairs (start, end).
    pub lines: Vec<(Vector3<f64>, Vector3<f64>)>,
    pub point_obs: Vec<BaPointObs>,
    pub line_obs: Vec<BaLineObs>,
}

impl WindowProblem {
    fn validate(&self) -> Result<(), OptimError> {
        if self.poses.len() < 2 {
            return Err(OptimError::WindowTooSmall {
                poses: self.poses.len(),
            });
        }
        if !self.fixed_poses.iter().any(|&fixed| fixed) {
            return Err(OptimError::NoAnchor);
        }
        for obs in &self.point_obs {
            if obs.pose_idx >= self.poses.len() {
                return Err(OptimError::DanglingObservation {
                    kind: "pose",
                    index: obs.pose_idx,
                });
            }
            if obs.point_idx >= self.points.len() {
                return Err(OptimError::DanglingObservation {
                    kind: "point",
                    index: obs.point_idx,
                });
            }
        }
        for obs in &self.line_obs {
            if obs.pose_idx >= self.poses.len() {
                return Err(OptimError::DanglingObservation {
                    kind: "pose",
                    index: obs.pose_idx,
                });
            }
            if obs.line_idx >= self.lines.len() {
                return Err(OptimError::DanglingObservation {
                    kind: "line",
                    index: obs.line_idx,
                });
            }
        }
        Ok(())
    }
}

/// Optimization statistics, including the residual-type counters that back
/// the hierarchical-optimization contract (global refinement must evaluate
/// zero line residuals).
#[derive(Debug, Clone)]
pub struct BaStats {
    pub iterations: usize,
    pub initial_cost: f64,
    pub final_cost: f64,
    pub converged: bool,
    pub point_residual_evals: usize,
    pub line_residual_evals: usize,
    pub invalid_observations: usize,
    pub trace: Vec<IterationTrace>,
}

/// Variable layout: free poses (6 dof), then free points (3), then free
/// line endpoints (6).
struct Layout {
    pose_offset: Vec<Option<usize>>,
    point_offset: Vec<Option<usize>>,
    line_offset: Vec<Option<usize>>,
    n_params: usize,
}

fn build_layout(problem: &WindowProblem, include_lines: bool) -> Layout {
    let mut pose_obs_count = vec![0usize; problem.poses.len()];
    let mut point_obs_count = vec![0usize; problem.points.len()];
    let mut line_obs_count = vec![0usize; problem.lines.len()];
    for obs in &problem.point_obs {
        pose_obs_count[obs.pose_idx] += 1;
        point_obs_count[obs.point_idx] += 1;
    }
    if include_lines {
        for obs in &problem.line_obs {
            pose_obs_count[obs.pose_idx] += 1;
            line_obs_count[obs.line_idx] += 1;
        }
    }

    let mut next = 0;
    let pose_offset = problem
        .poses
        .iter()
        .enumerate()
        .map(|(i, _)| {
            let fixed = problem.fixed_poses.get(i).copied().unwrap_or(false);
            (!fixed && pose_obs_count[i] > 0).then(|| {
                let offset = next;
                next += 6;
                offset
            })
        })
        .collect();
    let point_offset = point_obs_count
        .iter()
        .map(|&count| {
            (count >= 2).then(|| {
                let offset = next;
                next += 3;
                offset
            })
        })
        .collect();
    let line_offset = line_obs_count
        .iter()
        .map(|&count| {
            (include_lines && count >= 2).then(|| {
                let offset = next;
                next += 6;
                offset
            })
        })
        .collect();
    Layout {
        pose_offset,
        point_offset,
        line_offset,
        n_params: next,
    }
}

#[derive(Clone)]
struct State {
    poses: Vec<Pose>,
    points: Vec<Vector3<f64>>,
    lines: Vec<(Vector3<f64>, Vector3<f64>)>,
}

impl State {
    fn stepped(&self, layout: &Layout, delta: &DVector<f64>) -> State {
        let mut next = self.clone();
        for (i, offset) in layout.pose_offset.iter().enumerate() {
            if let Some(o) = offset {
                let d = Vector6::new(
                    delta[*o],
                    delta[*o + 1],
                    delta[*o + 2],
                    delta[*o + 3],
                    delta[*o + 4],
                    delta[*o + 5],
                );
                next.poses[i] = self.poses[i].retract(&d);
            }
        }
        for (i, offset) in layout.point_offset.iter().enumerate() {
            if let Some(o) = offset {
                next.points[i] += Vector3::new(delta[*o], delta[*o + 1], delta[*o + 2]);
            }
        }
        for (i, offset) in layout.line_offset.iter().enumerate() {
            if let Some(o) = offset {
                next.lines[i].0 += Vector3::new(delta[*o], delta[*o + 1], delta[*o + 2]);
                next.lines[i].1 += Vector3::new(delta[*o + 3], delta[*o + 4], delta[*o + 5]);
            }
        }
        next
    }
}

struct Engine<'a> {
    intrinsics: &'a CameraIntrinsics,
    problem: &'a WindowProblem,
    opts: &'a EstimateOptions,
    include_lines: bool,
    point_evals: usize,
    line_evals: usize,
    invalid: usize,
}

impl Engine<'_> {
    fn cost(&mut self, state: &State) -> f64 {
        let mut cost = 0.0;
        for obs in &self.problem.point_obs {
            self.point_evals += 1;
            let observation = PointObservation {
                pixel: obs.pixel,
                world: state.points[obs.point_idx],
            };
            match point_residual(self.intrinsics, &state.poses[obs.pose_idx], &observation) {
                Ok(r) => cost += self.opts.point_kernel.evaluate(r.norm_squared()),
                Err(_) => self.invalid += 1,
            }
        }
        if self.include_lines {
            for obs in &self.problem.line_obs {
                self.line_evals += 1;
                let (start_world, end_world) = state.lines[obs.line_idx];
                let observation = LineObservation {
                    start_obs: obs.start_obs,
                    end_obs: obs.end_obs,
                    start_world,
                    end_world,
                };
                match line_residual(self.intrinsics, &state.poses[obs.pose_idx], &observation) {
                    Ok(r) => {
                        cost += self.opts.line_weight
                            * self.opts.line_kernel.evaluate(r.norm_squared())
                    }
                    Err(_) => self.invalid += 1,
                }
            }
        }
        cost
    }

    fn normal_equations(
        &mut self,
        state: &State,
        layout: &Layout,
    ) -> (DMatrix<f64>, DVector<f64>) {
        let n = layout.n_params;
        let mut hessian = DMatrix::zeros(n, n);
        let mut gradient = DVector::zeros(n);

        let mut add_block =
            |hessian: &mut DMatrix<f64>,
             gradient: &mut DVector<f64>,
             blocks: &[(Option<usize>, DMatrix<f64>)],
             residual: &DVector<f64>,
             weight: f64| {
                for (offset_a, jac_a) in blocks {
                    let Some(a) = offset_a else { continue };
                    gradient
                        .rows_mut(*a, jac_a.ncols())
                        .axpy(weight, &(jac_a.transpose() * residual), 1.0);
                    for (offset_b, jac_b) in blocks {
                        let Some(b) = offset_b else { continue };
                        let contribution = jac_a.transpose() * jac_b * weight;
                        hessian
                            .view_mut((*a, *b), (jac_a.ncols(), jac_b.ncols()))
                            .zip_apply(&contribution, |h, c| *h += c);
                    }
                }
            };

        for obs in &self.problem.point_obs {
            self.point_evals += 1;
            let pose = &state.poses[obs.pose_idx];
            let world = state.points[obs.point_idx];
            let observation = PointObservation {
                pixel: obs.pixel,
                world,
            };
            let Ok(r) = point_residual(self.intrinsics, pose, &observation) else {
                continue;
            };
            let Ok((j_pose, j_world)) = point_residual_jacobians(self.intrinsics, pose, &world)
            else {
                continue;
            };
            let weight = self.opts.point_kernel.weight(r.norm_squared());
            let blocks = [
                (
                    layout.pose_offset[obs.pose_idx],
                    DMatrix::from_iterator(2, 6, j_pose.iter().copied()),
                ),
                (
                    layout.point_offset[obs.point_idx],
                    DMatrix::from_iterator(2, 3, j_world.iter().copied()),
                ),
            ];
            let residual = DVector::from_column_slice(&[r.x, r.y]);
            add_block(&mut hessian, &mut gradient, &blocks, &residual, weight);
        }

        if self.include_lines {
            for obs in &self.problem.line_obs {
                self.line_evals += 1;
                let pose = &state.poses[obs.pose_idx];
                let (start_world, end_world) = state.lines[obs.line_idx];
                let observation = LineObservation {
                    start_obs: obs.start_obs,
                    end_obs: obs.end_obs,
                    start_world,
                    end_world,
                };
                let Ok(r4) = line_residual(self.intrinsics, pose, &observation) else {
                    continue;
                };
                let Ok(((j_pose_s, j_world_s), (j_pose_e, j_world_e))) =
                    line_residual_jacobians(self.intrinsics, pose, &observation)
                else {
                    continue;
                };
                let weight =
                    self.opts.line_weight * self.opts.line_kernel.weight(r4.norm_squared());

                // Endpoint residuals are independent rows; the line landmark
                // block stacks (start, end) into 6 columns.
                let mut j_line_s = DMatrix::zeros(2, 6);
                j_line_s
                    .view_mut((0, 0), (2, 3))
                    .copy_from(&j_world_s);
                let mut j_line_e = DMatrix::zeros(2, 6);
                j_line_e
                    .view_mut((0, 3), (2, 3))
                    .copy_from(&j_world_e);

                let start_blocks = [
                    (
                        layout.pose_offset[obs.pose_idx],
                        DMatrix::from_iterator(2, 6, j_pose_s.iter().copied()),
                    ),
                    (layout.line_offset[obs.line_idx], j_line_s),
                ];
                let r_s = DVector::from_column_slice(&[r4[0], r4[1]]);
                add_block(&mut hessian, &mut gradient, &start_blocks, &r_s, weight);

                let end_blocks = [
                    (
                        layout.pose_offset[obs.pose_idx],
                        DMatrix::from_iterator(2, 6, j_pose_e.iter().copied()),
                    ),
                    (layout.line_offset[obs.line_idx], j_line_e),
                ];
                let r_e = DVector::from_column_slice(&[r4[2], r4[3]]);
                add_block(&mut hessian, &mut gradient, &end_blocks, &r_e, weight);
            }
        }
        (hessian, gradient)
    }
}

fn run(
    intrinsics: &CameraIntrinsics,
    problem: &mut WindowProblem,
    opts: &EstimateOptions,
    include_lines: bool,
) -> Result<BaStats, OptimError> {
    problem.validate()?;
    let layout = build_layout(problem, include_lines);
    let mut engine = Engine {
        intrinsics,
        problem,
        opts,
        include_lines,
        point_evals: 0,
        line_evals: 0,
        invalid: 0,
    };
    let mut state = State {
        poses: problem.poses.clone(),
        points: problem.points.clone(),
        lines: problem.lines.clone(),
    };

    let initial_cost = engine.cost(&state);
    let mut current_cost = initial_cost;
    let mut lambda = opts.lambda_init;
    let mut converged = layout.n_params == 0;
    let mut trace = Vec::new();
    let mut iterations = 0;

    if layout.n_params > 0 {
        for iteration in 0..opts.max_iters {
            iterations = iteration + 1;
            let (hessian, gradient) = engine.normal_equations(&state, &layout);
            let mut damped = hessian;
            for i in 0..layout.n_params {
                let diag = damped[(i, i)];
                damped[(i, i)] = diag + lambda * diag.max(1e-12);
            }
            let Some(step) = damped.lu().solve(&(-&gradient)) else {
                lambda *= 10.0;
                trace.push(IterationTrace {
                    iteration,
                    cost: current_cost,
                    lambda,
                    step_norm: 0.0,
                    accepted: false,
                });
                continue;
            };
            let step_norm = step.norm();
            let candidate = state.stepped(&layout, &step);
            let candidate_cost = engine.cost(&candidate);
            if candidate_cost <= current_cost {
                state = candidate;
                current_cost = candidate_cost;
                lambda = (lambda * 0.1).max(1e-12);
                trace.push(IterationTrace {
                    iteration,
                    cost: current_cost,
                    lambda,
                    step_norm,
                    accepted: true,
                });
                if step_norm < opts.tol {
                    converged = true;
                    break;
                }
            } else {
                lambda *= 10.0;
                trace.push(IterationTrace {
                    iteration,
                    cost: current_cost,
                    lambda,
                    step_norm,
                    accepted: false,
                });
            }
        }
    }

    let (point_evals, line_evals, invalid) =
        (engine.point_evals, engine.line_evals, engine.invalid);
    problem.poses = state.poses;
    problem.points = state.points;
    if include_lines {
        problem.lines = state.lines;
    }

    Ok(BaStats {
        iterations,
        initial_cost,
        final_cost: current_cost,
        converged,
        point_residual_evals: point_evals,
        line_residual_evals: line_evals,
        invalid_observations: invalid,
        trace,
    })
}

/// Sliding-window bundle adjustment over poses, point landmarks and line
/// landmarks (free endpoints). The anchor poses marked in `fixed_poses`
/// are excluded from the update; landmarks with fewer than two observations
/// are held fixed. The accepted-step cost sequence is non-increasing.
pub fn local_bundle_adjust(
    intrinsics: &CameraIntrinsics,
    problem: &mut WindowProblem,
    opts: &EstimateOptions,
) -> Result<BaStats, OptimError> {
    run(intrinsics, problem, opts, true)
}

/// Full-trajectory refinement over poses and point landmarks only.
///
/// Line landmarks and line observations present in the problem are ignored
/// by contract; `BaStats::line_residual_evals` stays 0, which the test
/// suites assert. The first pose is forced to be the gauge anchor.
pub fn global_refine(
    intrinsics: &CameraIntrinsics,
    problem: &mut WindowProblem,
    opts: &EstimateOptions,
) -> Result<BaStats, OptimError> {
    if problem.fixed_poses.len() != problem.poses.len() {
        problem.fixed_poses = vec![false; problem.poses.len()];
    }
    if let Some(first) = problem.fixed_poses.first_mut() {
        *first = true;
    }
    let stats = run(intrinsics, problem, opts, false)?;
    debug_assert_eq!(stats.line_residual_evals, 0);
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::project;
    use crate::optim::RobustKernel;
    use nalgebra::Rotation3;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn k() -> CameraIntrinsics {
        CameraIntrinsics::new(500.0, 500.0, 320.0, 240.0, 640.0, 480.0).unwrap()
    }

    fn window_poses(n: usize) -> Vec<Pose> {
        (0..n)
            .map(|i| {
                let s = i as f64;
                Pose::new(
                    Rotation3::from_scaled_axis(Vector3::new(0.01 * s, -0.012 * s, 0.008 * s)),
                    Vector3::new(0.06 * s, 0.02 * s, -0.03 * s),
                )
            })
            .collect()
    }

    /// Noise-free fully-observed problem: every pose sees every landmark.
    fn build_problem(
        rng: &mut ChaCha8Rng,
        n_poses: usize,
        n_points: usize,
        n_lines: usize,
        pixel_sigma: f64,
    ) -> (WindowProblem, Vec<Pose>) {
        let truth = window_poses(n_poses);
        let points: Vec<Vector3<f64>> = (0..n_points)
            .map(|_| {
                Vector3::new(
                    rng.random_range(-0.8..0.8),
                    rng.random_range(-0.6..0.6),
                    rng.random_range(1.5..3.5),
                )
            })
            .collect();
        let lines: Vec<(Vector3<f64>, Vector3<f64>)> = (0..n_lines)
            .map(|_| {
                let s = Vector3::new(
                    rng.random_range(-0.8..0.4),
                    rng.random_range(-0.6..0.4),
                    rng.random_range(1.5..3.0),
                );
                (s, s + Vector3::new(0.6, 0.25, 0.2))
            })
            .collect();
        let mut problem = WindowProblem {
            poses: truth.clone(),
            fixed_poses: std::iter::once(true)
                .chain(std::iter::repeat(false))
                .take(n_poses)
                .collect(),
            points: points.clone(),
            lines: lines.clone(),
            point_obs: Vec::new(),
            line_obs: Vec::new(),
        };
        let mut noise = |rng: &mut ChaCha8Rng| {
            if pixel_sigma > 0.0 {
                let n1: f64 = StandardNormal.sample(rng);
                let n2: f64 = StandardNormal.sample(rng);
                Vector2::new(n1 * pixel_sigma, n2 * pixel_sigma)
            } else {
                Vector2::zeros()
            }
        };
        for (pose_idx, pose) in truth.iter().enumerate() {
            for (point_idx, world) in points.iter().enumerate() {
                if let Ok(pixel) = project(&k(), pose, world) {
                    problem.point_obs.push(BaPointObs {
                        pose_idx,
                        point_idx,
                        pixel: pixel + noise(rng),
                    });
                }
            }
            for (line_idx, (s, e)) in lines.iter().enumerate() {
                if let (Ok(ps), Ok(pe)) = (project(&k(), pose, s), project(&k(), pose, e)) {
                    problem.line_obs.push(BaLineObs {
                        pose_idx,
                        line_idx,
                        start_obs: ps + noise(rng),
                        end_obs: pe + noise(rng),
                    });
                }
            }
        }
        (problem, truth)
    }

    fn perturb_poses(problem: &mut WindowProblem, rng: &mut ChaCha8Rng, magnitude: f64) {
        for (i, pose) in problem.poses.iter_mut().enumerate() {
            if problem.fixed_poses[i] {
                continue;
            }
            let mut delta = Vector6::zeros();
            for j in 0..6 {
                delta[j] = rng.random_range(-1.0..1.0);
            }
            delta *= magnitude / delta.norm();
            *pose = pose.retract(&delta);
        }
    }

    fn max_pose_error(poses: &[Pose], truth: &[Pose]) -> f64 {
        poses
            .iter()
            .zip(truth)
            .map(|(a, b)| {
                let diff = a.compose(&b.inverse());
                diff.rotation.angle().max(diff.translation.norm())
            })
            .fold(0.0, f64::max)
    }

    fn quiet_opts() -> EstimateOptions {
        EstimateOptions {
            max_iters: 50,
            ..EstimateOptions::default()
        }
    }

    #[test]
    fn noise_free_window_recovers_poses() {
        let mut rng = ChaCha8Rng::seed_from_u64(91);
        let (mut problem, truth) = build_problem(&mut rng, 3, 40, 6, 0.0);
        perturb_poses(&mut problem, &mut rng, 0.02);
        let anchor_before = problem.poses[0];
        let stats = local_bundle_adjust(&k(), &mut problem, &quiet_opts()).unwrap();
        assert!(stats.final_cost <= stats.initial_cost);
        let err = max_pose_error(&problem.poses, &truth);
        assert!(err < 1e-6, "pose error after BA: {err}");
        // Anchor must be untouched, bit for bit.
        assert_eq!(problem.poses[0], anchor_before);
    }

    #[test]
    fn lines_help_on_point_starved_windows() {
        let mut with_errors = Vec::new();
        let mut without_errors = Vec::new();
        for seed in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
            let (problem, truth) = build_problem(&mut rng, 3, 5, 8, 0.4);
            let mut with_lines = problem.clone();
            let mut without_lines = problem.clone();
            without_lines.line_obs.clear();
            without_lines.lines.clear();
            let mut perturb_rng = ChaCha8Rng::seed_from_u64(2000 + seed);
            perturb_poses(&mut with_lines, &mut perturb_rng, 0.015);
            let mut perturb_rng = ChaCha8Rng::seed_from_u64(2000 + seed);
            perturb_poses(&mut without_lines, &mut perturb_rng, 0.015);
            local_bundle_adjust(&k(), &mut with_lines, &quiet_opts()).unwrap();
            local_bundle_adjust(&k(), &mut without_lines, &quiet_opts()).unwrap();
            with_errors.push(max_pose_error(&with_lines.poses, &truth));
            without_errors.push(max_pose_error(&without_lines.poses, &truth));
        }
        with_errors.sort_by(|a, b| a.partial_cmp(b).unwrap());
        without_errors.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let with_median = with_errors[with_errors.len() / 2];
        let without_median = without_errors[without_errors.len() / 2];
        assert!(
            with_median <= without_median,
            "lines should not hurt: with {with_median}, without {without_median}"
        );
    }

    #[test]
    fn global_refine_never_touches_lines() {
        let mut rng = ChaCha8Rng::seed_from_u64(92);
        let (mut problem, _) = build_problem(&mut rng, 4, 30, 5, 0.3);
        let lines_before = problem.lines.clone();
        perturb_poses(&mut problem, &mut rng, 0.01);
        let stats = global_refine(&k(), &mut problem, &quiet_opts()).unwrap();
        assert_eq!(stats.line_residual_evals, 0);
        assert!(stats.point_residual_evals > 0);
        assert_eq!(problem.lines, lines_before);
        assert!(stats.final_cost <= stats.initial_cost);
    }

    #[test]
    fn global_refine_is_identity_on_noise_free_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(93);
        let (mut problem, truth) = build_problem(&mut rng, 4, 30, 0, 0.0);
        global_refine(&k(), &mut problem, &quiet_opts()).unwrap();
        let err = max_pose_error(&problem.poses, &truth);
        assert!(err < 1e-9, "noise-free trajectory moved by {err}");
    }

    #[test]
    fn under_observed_landmarks_are_held_fixed() {
        let mut rng = ChaCha8Rng::seed_from_u64(94);
        let (mut problem, _) = build_problem(&mut rng, 3, 10, 0, 0.0);
        // Add a landmark observed exactly once; it must not move.
        let lonely = Vector3::new(0.1, 0.1, 2.0);
        problem.points.push(lonely);
        problem.point_obs.push(BaPointObs {
            pose_idx: 1,
            point_idx: problem.points.len() - 1,
            pixel: Vector2::new(111.0, 222.0), // wildly inconsistent on purpose
        });
        perturb_poses(&mut problem, &mut rng, 0.01);
        local_bundle_adjust(&k(), &mut problem, &quiet_opts()).unwrap();
        assert_eq!(*problem.points.last().unwrap(), lonely);
    }

    #[test]
    fn window_of_one_pose_is_rejected() {
        let mut problem = WindowProblem {
            poses: vec![Pose::identity()],
            fixed_poses: vec![true],
            ..WindowProblem::default()
        };
        let err = local_bundle_adjust(&k(), &mut problem, &quiet_opts()).unwrap_err();
        assert_eq!(err, OptimError::WindowTooSmall { poses: 1 });
    }

    #[test]
    fn kernels_agree_on_noise_free_problems() {
        let mut rng = ChaCha8Rng::seed_from_u64(95);
        let (problem, _) = build_problem(&mut rng, 3, 25, 4, 0.0);
        let mut with_huber = problem.clone();
        let mut plain = problem;
        let mut perturb_rng = ChaCha8Rng::seed_from_u64(96);
        perturb_poses(&mut with_huber, &mut perturb_rng, 0.01);
        let mut perturb_rng = ChaCha8Rng::seed_from_u64(96);
        perturb_poses(&mut plain, &mut perturb_rng, 0.01);
        local_bundle_adjust(&k(), &mut with_huber, &quiet_opts()).unwrap();
        let squared = EstimateOptions {
            point_kernel: RobustKernel::Squared,
            line_kernel: RobustKernel::Squared,
            ..quiet_opts()
        };
        local_bundle_adjust(&k(), &mut plain, &squared).unwrap();
        let drift = max_pose_error(&with_huber.poses, &plain.poses);
        assert!(drift < 1e-9, "kernel choice changed the optimum by {drift}");
    }
}
