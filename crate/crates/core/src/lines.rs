//! Line-segment features: five-sample representation, lightweight
//! descriptors, descriptor matching with a ratio test, projection of 3D map
//! lines and windowed search-projection association.
//!
//! A segment is carried as its start, two quarter points, midpoint and end.
//! Interior points are always derived from the endpoints — they exist for
//! the dynamic-removal sample votes, not as independent state.

use std::f64::consts::PI;

use nalgebra::{Vector2, Vector3};
use thiserror::Error;

use crate::geometry::{project, CameraIntrinsics, GeometryError, Pose};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LineError {
    #[error("segment endpoints are closer than 1 px")]
    DegenerateSegment,
    #[error("all line samples are behind the camera")]
    BehindCamera(#[from] GeometryError),
    #[error("a subset of line samples is behind the camera")]
    PartiallyBehindCamera,
}

/// 3D line with five sample points; interior points are affine combinations
/// of the endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line3D {
    pub start: Vector3<f64>,
    pub quarter1: Vector3<f64>,
    pub mid: Vector3<f64>,
    pub quarter2: Vector3<f64>,
    pub end: Vector3<f64>,
}

impl Line3D {
    pub fn from_endpoints(start: Vector3<f64>, end: Vector3<f64>) -> Self {
        Self {
            start,
            quarter1: 0.75 * start + 0.25 * end,
            mid: 0.5 * (start + end),
            quarter2: 0.25 * start + 0.75 * end,
            end,
        }
    }

    /// Endpoint-canonicalized construction (lexicographic order), for
    /// undirected lines whose detector output order is arbitrary.
    pub fn canonical(a: Vector3<f64>, b: Vector3<f64>) -> Self {
        let (start, end) = if lex_le3(&a, &b) { (a, b) } else { (b, a) };
        Self::from_endpoints(start, end)
    }

    pub fn samples(&self) -> [Vector3<f64>; 5] {
        [self.start, self.quarter1, self.mid, self.quarter2, self.end]
    }

    pub fn length(&self) -> f64 {
        (self.end - self.start).norm()
    }
}

/// 2D line segment with five sample points (pixels).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line2D {
    pub start: Vector2<f64>,
    pub quarter1: Vector2<f64>,
    pub mid: Vector2<f64>,
    pub quarter2: Vector2<f64>,
    pub end: Vector2<f64>,
}

impl Line2D {
    /// Five points at parameters {0, ¼, ½, ¾, 1}; direction preserved.
    pub fn from_endpoints(start: Vector2<f64>, end: Vector2<f64>) -> Result<Self, LineError> {
        if (end - start).norm() < 1.0 {
            return Err(LineError::DegenerateSegment);
        }
        Ok(Self {
            start,
            quarter1: 0.75 * start + 0.25 * end,
            mid: 0.5 * (start + end),
            quarter2: 0.25 * start + 0.75 * end,
            end,
        })
    }

    /// Endpoint-canonicalized construction (lexicographic order).
    pub fn canonical(a: Vector2<f64>, b: Vector2<f64>) -> Result<Self, LineError> {
        let (start, end) = if lex_le2(&a, &b) { (a, b) } else { (b, a) };
        Self::from_endpoints(start, end)
    }

    fn from_samples(samples: [Vector2<f64>; 5]) -> Self {
        Self {
            start: samples[0],
            quarter1: samples[1],
            mid: samples[2],
            quarter2: samples[3],
            end: samples[4],
        }
    }

    pub fn samples(&self) -> [Vector2<f64>; 5] {
        [self.start, self.quarter1, self.mid, self.quarter2, self.end]
    }

    pub fn length(&self) -> f64 {
        (self.end - self.start).norm()
    }

    pub fn reversed(&self) -> Self {
        Self {
            start: self.end,
            quarter1: self.quarter2,
            mid: self.mid,
            quarter2: self.quarter1,
            end: self.start,
        }
    }
}

fn lex_le2(a: &Vector2<f64>, b: &Vector2<f64>) -> bool {
    (a.x, a.y) <= (b.x, b.y)
}

fn lex_le3(a: &Vector3<f64>, b: &Vector3<f64>) -> bool {
    (a.x, a.y, a.z) <= (b.x, b.y, b.z)
}

/// Sample a segment at parameters {0, ¼, ½, ¾, 1}, direction preserved.
pub fn sample_line(start: Vector2<f64>, end: Vector2<f64>) -> Result<Line2D, LineError> {
    Line2D::from_endpoints(start, end)
}

/// Length, undirected angle and edge-strength response of a segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineDescriptor {
    /// Segment length in pixels (> 0).
    pub length: f64,
    /// Direction angle folded into [0, π).
    pub angle: f64,
    /// Edge-strength response (>= 0); supplied by the detector or simulator.
    pub response: f64,
}

/// Build the descriptor of an observed segment. The angle is folded modulo π
/// so a segment and its reversal describe identically.
pub fn make_descriptor(line: &Line2D, response: f64) -> LineDescriptor {
    let dir = line.end - line.start;
    let mut angle = dir.y.atan2(dir.x);
    if angle < 0.0 {
        angle += PI;
    }
    if angle >= PI {
        angle -= PI;
    }
    LineDescriptor {
        length: line.length(),
        angle,
        response,
    }
}

/// Relative weights of the three descriptor components. Each component is
/// normalized to a [0, 1] scale before weighting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchWeights {
    pub length: f64,
    pub angle: f64,
    pub response: f64,
}

impl Default for MatchWeights {
    fn default() -> Self {
        Self {
            length: 1.0,
            angle: 1.0,
            response: 1.0,
        }
    }
}

/// Symmetric matching distance combining length, angle and response
/// differences, each normalized to [0, 1] scale.
pub fn descriptor_distance(a: &LineDescriptor, b: &LineDescriptor) -> f64 {
    descriptor_distance_weighted(a, b, &MatchWeights::default())
}

pub fn descriptor_distance_weighted(
    a: &LineDescriptor,
    b: &LineDescriptor,
    weights: &MatchWeights,
) -> f64 {
    let length_term = (a.length - b.length).abs() / a.length.max(b.length);
    let delta = (a.angle - b.angle).rem_euclid(PI);
    let angle_term = delta.min(PI - delta) / (PI / 2.0);
    let response_term = (a.response - b.response).abs() / a.response.max(b.response).max(1.0);
    weights.length * length_term + weights.angle * angle_term + weights.response * response_term
}

/// Accepted association between two line sets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineMatch {
    pub index_i: usize,
    pub index_j: usize,
    pub distance: f64,
}

/// Nearest-neighbour descriptor matching with an absolute threshold, a ratio
/// test against the second-nearest candidate, and mutual-best filtering so
/// the result is one-to-one.
pub fn match_lines(
    set_i: &[LineDescriptor],
    set_j: &[LineDescriptor],
    max_dist: f64,
    ratio: f64,
) -> Vec<LineMatch> {
    assert!(max_dist > 0.0, "max_dist must be positive");
    assert!(ratio > 0.0 && ratio <= 1.0, "ratio must be in (0, 1]");
    mutual_best_matches(set_i.len(), set_j.len(), max_dist, ratio, |i, j| {
        Some(descriptor_distance(&set_i[i], &set_j[j]))
    })
}

/// Generic mutual-best matcher over a candidate predicate. `dist` returns
/// `None` for pairs outside the candidate set.
fn mutual_best_matches(
    n_i: usize,
    n_j: usize,
    max_dist: f64,
    ratio: f64,
    dist: impl Fn(usize, usize) -> Option<f64>,
) -> Vec<LineMatch> {
    let nearest_two = |candidates: &mut dyn Iterator<Item = (usize, f64)>| {
        let mut best: Option<(usize, f64)> = None;
        let mut second: Option<f64> = None;
        for (idx, d) in candidates {
            match best {
                Some((_, bd)) if d >= bd => {
                    if second.map_or(true, |s| d < s) {
                        second = Some(d);
                    }
                }
                _ => {
                    if let Some((_, bd)) = best {
                        second = Some(second.map_or(bd, |s| s.min(bd)));
                    }
                    best = Some((idx, d));
                }
            }
        }
        (best, second)
    };

    // Query side: nearest + ratio test.
    let mut forward: Vec<Option<(usize, f64)>> = vec![None; n_i];
    for i in 0..n_i {
        let mut it = (0..n_j).filter_map(|j| dist(i, j).map(|d| (j, d)));
        let (best, second) = nearest_two(&mut it);
        if let Some((j, d)) = best {
            let passes_ratio = second.map_or(true, |s| d < ratio * s);
            if d < max_dist && passes_ratio {
                forward[i] = Some((j, d));
            }
        }
    }

    // Train side: plain nearest, for the mutual-best check.
    let mut backward: Vec<Option<usize>> = vec![None; n_j];
    for j in 0..n_j {
        let mut it = (0..n_i).filter_map(|i| dist(i, j).map(|d| (i, d)));
        let (best, _) = nearest_two(&mut it);
        backward[j] = best.map(|(i, _)| i);
    }

    (0..n_i)
        .filter_map(|i| {
            let (j, d) = forward[i]?;
            (backward[j] == Some(i)).then_some(LineMatch {
                index_i: i,
                index_j: j,
                distance: d,
            })
        })
        .collect()
}

/// Project a 3D line's five samples onto the image plane.
///
/// The projected interior points are the true projections of the 3D interior
/// samples; under perspective they are collinear with the projected endpoints
/// but not, in general, at the same affine parameters.
pub fn project_line(
    intrinsics: &CameraIntrinsics,
    t_cw: &Pose,
    line: &Line3D,
) -> Result<Line2D, LineError> {
    let mut projected = [Vector2::zeros(); 5];
    let mut behind = 0;
    for (slot, sample) in projected.iter_mut().zip(line.samples()) {
        match project(intrinsics, t_cw, &sample) {
            Ok(pixel) => *slot = pixel,
            Err(GeometryError::NonPositiveDepth { .. }) => behind += 1,
            Err(other) => return Err(LineError::BehindCamera(other)),
        }
    }
    match behind {
        0 => Ok(Line2D::from_samples(projected)),
        5 => Err(LineError::BehindCamera(GeometryError::NonPositiveDepth {
            z: 0.0,
        })),
        _ => Err(LineError::PartiallyBehindCamera),
    }
}

/// Associate 3D map lines with current-frame observations: each map line is
/// projected, frame lines whose midpoints fall inside the search window are
/// candidates, and candidates are matched by descriptor distance with the
/// same threshold / ratio / mutual-best rules as [`match_lines`].
///
/// `index_i` of each returned match indexes `map_lines`, `index_j` indexes
/// `frame_lines`.
pub fn search_projection_match(
    map_lines: &[(Line3D, LineDescriptor)],
    frame_lines: &[(Line2D, LineDescriptor)],
    intrinsics: &CameraIntrinsics,
    t_cw: &Pose,
    window: f64,
    max_dist: f64,
    ratio: f64,
) -> Vec<LineMatch> {
    assert!(window > 0.0, "search window must be positive");
    let projected_mids: Vec<Option<Vector2<f64>>> = map_lines
        .iter()
        .map(|(line, _)| project_line(intrinsics, t_cw, line).ok().map(|l| l.mid))
        .collect();

    mutual_best_matches(map_lines.len(), frame_lines.len(), max_dist, ratio, |i, j| {
        let mid = projected_mids[i]?;
        ((frame_lines[j].0.mid - mid).norm() <= window)
            .then(|| descriptor_distance(&map_lines[i].1, &frame_lines[j].1))
    })
}
