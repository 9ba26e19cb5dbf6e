//! Two-stage dynamic feature removal.
//!
//! Stage 1 removes features inside predefined dynamic-region rectangles
//! (detector boxes, or simulator ground truth standing in for them).
//! Stage 2 removes surviving features whose matched observations violate the
//! epipolar constraint of the frame pair. Points are tested directly; lines
//! vote with their five sample points and are removed when three or more
//! samples fail a stage.

use nalgebra::{Matrix3, Vector2};

use crate::geometry::{epipolar_line, point_line_distance};
use crate::lines::Line2D;

/// Default epipolar distance threshold in pixels.
pub const DEFAULT_EPIPOLAR_THRESHOLD: f64 = 1.0;

/// Number of sample-point violations at which a whole line is removed.
pub const LINE_VOTES_TO_REMOVE: usize = 3;

/// Axis-aligned pixel rectangle; containment is boundary-inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaskRect {
    pub u_min: f64,
    pub v_min: f64,
    pub u_max: f64,
    pub v_max: f64,
}

impl MaskRect {
    pub fn new(u_min: f64, v_min: f64, u_max: f64, v_max: f64) -> Self {
        Self {
            u_min,
            v_min,
            u_max,
            v_max,
        }
    }

    pub fn contains(&self, pixel: &Vector2<f64>) -> bool {
        pixel.x >= self.u_min
            && pixel.x <= self.u_max
            && pixel.y >= self.v_min
            && pixel.y <= self.v_max
    }
}

/// Predefined dynamic object regions for one frame.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DynamicMask {
    pub regions: Vec<MaskRect>,
}

impl DynamicMask {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn contains(&self, pixel: &Vector2<f64>) -> bool {
        self.regions.iter().any(|r| r.contains(pixel))
    }
}

/// Index partition produced by a filter stage (or a composition of stages).
/// The three sets are pairwise disjoint and cover the input index range.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FilterOutcome {
    pub retained: Vec<usize>,
    pub removed_by_mask: Vec<usize>,
    pub removed_by_epipolar: Vec<usize>,
}

impl FilterOutcome {
    pub fn assert_partitions(&self, n: usize) {
        let mut all: Vec<usize> = self
            .retained
            .iter()
            .chain(&self.removed_by_mask)
            .chain(&self.removed_by_epipolar)
            .copied()
            .collect();
        all.sort_unstable();
        assert_eq!(all, (0..n).collect::<Vec<_>>(), "outcome must partition 0..{n}");
    }
}

/// Stage 1 for points: a point is removed iff it lies inside any rectangle.
pub fn mask_filter_points(points: &[Vector2<f64>], mask: &DynamicMask) -> FilterOutcome {
    let mut outcome = FilterOutcome::default();
    for (idx, p) in points.iter().enumerate() {
        if mask.contains(p) {
            outcome.removed_by_mask.push(idx);
        } else {
            outcome.retained.push(idx);
        }
    }
    outcome
}

/// Stage 1 for lines: a line is removed iff three or more of its five
/// sample points lie inside the mask.
pub fn mask_filter_lines(lines: &[Line2D], mask: &DynamicMask) -> FilterOutcome {
    let mut outcome = FilterOutcome::default();
    for (idx, line) in lines.iter().enumerate() {
        let inside = line.samples().iter().filter(|s| mask.contains(s)).count();
        if inside >= LINE_VOTES_TO_REMOVE {
            outcome.removed_by_mask.push(idx);
        } else {
            outcome.retained.push(idx);
        }
    }
    outcome
}

/// Stage 2 for points: each matched pair `(x_i, x_j)` is tested against the
/// epipolar line of `x_i` in frame j; removal is strict (`d > d_th`).
///
/// A pair whose first pixel sits exactly on the epipole has a null epipolar
/// line; the bilinear constraint is trivially satisfied there, so the pair
/// is retained.
pub fn epipolar_filter_points(
    matches: &[(Vector2<f64>, Vector2<f64>)],
    fundamental: &Matrix3<f64>,
    d_th: f64,
) -> FilterOutcome {
    let mut outcome = FilterOutcome::default();
    for (idx, (x_i, x_j)) in matches.iter().enumerate() {
        let violates = match epipolar_line(fundamental, x_i) {
            Ok(line) => point_line_distance(&line, x_j) > d_th,
            Err(_) => false,
        };
        if violates {
            outcome.removed_by_epipolar.push(idx);
        } else {
            outcome.retained.push(idx);
        }
    }
    outcome
}

/// Stage 2 for lines: sample k of the line in frame j is tested against the
/// epipolar line of sample k in frame i (samples correspond parameter-wise
/// after endpoint canonicalization); three or more violations remove the
/// line.
pub fn epipolar_filter_lines(
    line_matches: &[(Line2D, Line2D)],
    fundamental: &Matrix3<f64>,
    d_th: f64,
) -> FilterOutcome {
    let mut outcome = FilterOutcome::default();
    for (idx, (line_i, line_j)) in line_matches.iter().enumerate() {
        let violations = line_i
            .samples()
            .iter()
            .zip(line_j.samples())
            .filter(|(s_i, s_j)| match epipolar_line(fundamental, s_i) {
                Ok(line) => point_line_distance(&line, s_j) > d_th,
                Err(_) => false,
            })
            .count();
        if violations >= LINE_VOTES_TO_REMOVE {
            outcome.removed_by_epipolar.push(idx);
        } else {
            outcome.retained.push(idx);
        }
    }
    outcome
}

/// Matched features of a frame pair, as seen in the current frame (j) with
/// their counterparts in the reference frame (i).
#[derive(Debug, Clone, Default)]
pub struct RemovalInput {
    pub point_matches: Vec<(Vector2<f64>, Vector2<f64>)>,
    pub line_matches: Vec<(Line2D, Line2D)>,
}

/// Combined outcome of both stages for one frame pair.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RemovalResult {
    pub points: FilterOutcome,
    pub lines: FilterOutcome,
}

impl RemovalResult {
    pub fn retained_points(&self) -> &[usize] {
        &self.points.retained
    }

    pub fn retained_lines(&self) -> &[usize] {
        &self.lines.retained
    }
}

/// Run both removal stages in order: masks first, then epipolar constraints
/// on the survivors. When `fundamental` is `None` (degenerate baseline) the
/// epipolar stage is skipped and only mask removal applies.
pub fn run_removal(
    input: &RemovalInput,
    mask: &DynamicMask,
    fundamental: Option<&Matrix3<f64>>,
    d_th: f64,
) -> RemovalResult {
    let current_points: Vec<Vector2<f64>> =
        input.point_matches.iter().map(|(_, x_j)| *x_j).collect();
    let current_lines: Vec<Line2D> = input.line_matches.iter().map(|(_, l_j)| *l_j).collect();

    let mut points = mask_filter_points(&current_points, mask);
    let mut lines = mask_filter_lines(&current_lines, mask);

    if let Some(f) = fundamental {
        let survivors = std::mem::take(&mut points.retained);
        let survivor_pairs: Vec<_> = survivors.iter().map(|&i| input.point_matches[i]).collect();
        let stage2 = epipolar_filter_points(&survivor_pairs, f, d_th);
        points.retained = stage2.retained.iter().map(|&i| survivors[i]).collect();
        points
            .removed_by_epipolar
            .extend(stage2.removed_by_epipolar.iter().map(|&i| survivors[i]));

        let survivors = std::mem::take(&mut lines.retained);
        let survivor_pairs: Vec<_> = survivors.iter().map(|&i| input.line_matches[i]).collect();
        let stage2 = epipolar_filter_lines(&survivor_pairs, f, d_th);
        lines.retained = stage2.retained.iter().map(|&i| survivors[i]).collect();
        lines
            .removed_by_epipolar
            .extend(stage2.removed_by_epipolar.iter().map(|&i| survivors[i]));
    }

    RemovalResult { points, lines }
}
