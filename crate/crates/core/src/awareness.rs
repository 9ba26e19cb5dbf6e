//! Per-frame point-feature sufficiency scoring and the Point vs Point-Line
//! mode decision.
//!
//! The frame is partitioned into a fixed grid (3×3 by default). Each cell
//! contributes an abundance term `c_i / c_base` and a distribution term
//! `1 / (1 + sqrt(σ_i²))`, where σ_i² is the spatial variance of the cell's
//! points in cell-normalized coordinates. Cells with fewer than two points
//! carry no defined spread and contribute only the abundance term, so an
//! empty frame scores 0 rather than 1.

use nalgebra::Vector2;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AwarenessError {
    #[error("image has zero width or height")]
    EmptyImage,
    #[error("calibration requires at least one frame")]
    EmptyCalibrationSet,
    #[error("calibration produced a non-positive threshold ({th}); frames carry no usable features")]
    DegenerateCalibration { th: f64 },
}

/// Per-cell counts and spatial variances of retained static points.
#[derive(Debug, Clone, PartialEq)]
pub struct GridStats {
    pub grid_rows: usize,
    pub grid_cols: usize,
    /// Retained points per cell, row-major.
    pub cell_count: Vec<usize>,
    /// Sum of per-axis population variances in cell-normalized coordinates;
    /// zero for cells with fewer than two points.
    pub cell_variance: Vec<f64>,
}

impl GridStats {
    pub fn num_cells(&self) -> usize {
        self.grid_rows * self.grid_cols
    }

    pub fn total_points(&self) -> usize {
        self.cell_count.iter().sum()
    }

    pub fn mean_cell_count(&self) -> f64 {
        self.total_points() as f64 / self.num_cells() as f64
    }
}

/// Parameters of the sufficiency decision, normally produced by [`calibrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AwarenessConfig {
    /// Base feature count per cell.
    pub c_base: usize,
    /// Classification threshold on the quality score.
    pub th: f64,
    pub grid_rows: usize,
    pub grid_cols: usize,
}

/// Per-frame decision: are point features alone sufficient?
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SceneMode {
    Point,
    PointLine,
}

/// Assign points to grid cells and compute per-cell spatial statistics.
///
/// Each point lands in exactly one cell by floor division of its pixel
/// coordinates; coordinates exactly on the far border clamp into the last
/// cell. Variances are computed in cell-normalized coordinates so cell size
/// does not change the score's scale.
pub fn grid_partition(
    width: f64,
    height: f64,
    points: &[Vector2<f64>],
    rows: usize,
    cols: usize,
) -> Result<GridStats, AwarenessError> {
    assert!(rows >= 1 && cols >= 1, "grid must have at least one cell");
    if width <= 0.0 || height <= 0.0 {
        return Err(AwarenessError::EmptyImage);
    }
    let cell_w = width / cols as f64;
    let cell_h = height / rows as f64;
    let mut cells: Vec<Vec<Vector2<f64>>> = vec![Vec::new(); rows * cols];
    for p in points {
        let col = ((p.x / cell_w).floor() as usize).min(cols - 1);
        let row = ((p.y / cell_h).floor() as usize).min(rows - 1);
        let normalized = Vector2::new(
            (p.x - col as f64 * cell_w) / cell_w,
            (p.y - row as f64 * cell_h) / cell_h,
        );
        cells[row * cols + col].push(normalized);
    }

    let cell_count: Vec<usize> = cells.iter().map(Vec::len).collect();
    let cell_variance: Vec<f64> = cells
        .iter()
        .map(|pts| {
            if pts.len() < 2 {
                return 0.0;
            }
            population_variance(pts.iter().map(|p| p.x))
                + population_variance(pts.iter().map(|p| p.y))
        })
        .collect();

    Ok(GridStats {
        grid_rows: rows,
        grid_cols: cols,
        cell_count,
        cell_variance,
    })
}

fn population_variance(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n
}

/// Quality score combining abundance and spread of the retained points.
pub fn feature_quality(stats: &GridStats, c_base: usize) -> f64 {
    assert!(c_base >= 1, "c_base must be at least 1");
    let g = stats.num_cells() as f64;
    let mut sum = 0.0;
    for (count, variance) in stats.cell_count.iter().zip(&stats.cell_variance) {
        sum += *count as f64 / c_base as f64;
        if *count >= 2 {
            sum += 1.0 / (1.0 + variance.sqrt());
        }
    }
    sum / g
}

/// Threshold decision: point features suffice iff `q >= th` (inclusive).
pub fn decide_mode(q: f64, th: f64) -> SceneMode {
    assert!(th > 0.0, "threshold must be positive");
    if q >= th {
        SceneMode::Point
    } else {
        SceneMode::PointLine
    }
}

/// Derive `c_base` and `th` from stable frames, both taken at the minimum
/// over the set so the classification stays conservative. `c_base` is the
/// floored minimum mean cell count (at least 1), and `th` is the minimum
/// quality score evaluated with that `c_base`.
pub fn calibrate(stable_frames: &[GridStats]) -> Result<AwarenessConfig, AwarenessError> {
    let first = stable_frames
        .first()
        .ok_or(AwarenessError::EmptyCalibrationSet)?;
    let min_mean = stable_frames
        .iter()
        .map(GridStats::mean_cell_count)
        .fold(f64::INFINITY, f64::min);
    let c_base = (min_mean.floor() as usize).max(1);
    let th = stable_frames
        .iter()
        .map(|frame| feature_quality(frame, c_base))
        .fold(f64::INFINITY, f64::min);
    if !(th > 0.0) {
        return Err(AwarenessError::DegenerateCalibration { th });
    }
    Ok(AwarenessConfig {
        c_base,
        th,
        grid_rows: first.grid_rows,
        grid_cols: first.grid_cols,
    })
}
