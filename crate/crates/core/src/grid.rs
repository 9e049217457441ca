//! Uniform space-time grids and the values of fields sampled on them.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{Rectangle, SpaceTimeField};

/// Uniform grid with `n_x` interior spatial points and `n_t` interior time
/// levels; the boundary columns and the initial/terminal levels are included
/// in the point set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpaceTimeGrid {
    pub rect: Rectangle,
    pub n_x: usize,
    pub n_t: usize,
}

impl SpaceTimeGrid {
    pub fn new(rect: Rectangle, n_x: usize, n_t: usize) -> Result<Self> {
        if n_x == 0 || n_t == 0 {
            return Err(Error::GridMismatch(format!("interior counts must be positive, got {n_x}x{n_t}")));
        }
        Ok(Self { rect, n_x, n_t })
    }

    /// Grid with `points_x x points_t` points in total, boundaries included.
    pub fn with_points(rect: Rectangle, points_x: usize, points_t: usize) -> Result<Self> {
        if points_x < 3 || points_t < 3 {
            return Err(Error::GridMismatch(format!(
                "need at least 3 points per axis, got {points_x}x{points_t}"
            )));
        }
        Self::new(rect, points_x - 2, points_t - 2)
    }

    /// Spatial step.
    pub fn h(&self) -> f64 {
        self.rect.width() / (self.n_x + 1) as f64
    }

    /// Time step.
    pub fn k(&self) -> f64 {
        self.rect.t_final / (self.n_t + 1) as f64
    }

    pub fn points_x(&self) -> usize {
        self.n_x + 2
    }

    pub fn points_t(&self) -> usize {
        self.n_t + 2
    }

    pub fn len(&self) -> usize {
        self.points_x() * self.points_t()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x(&self, i: usize) -> f64 {
        if i == self.n_x + 1 {
            self.rect.b
        } else {
            self.rect.a + i as f64 * self.h()
        }
    }

    pub fn t(&self, k: usize) -> f64 {
        if k == self.n_t + 1 {
            self.rect.t_final
        } else {
            k as f64 * self.k()
        }
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.points_x()).map(|i| self.x(i)).collect()
    }

    pub fn ts(&self) -> Vec<f64> {
        (0..self.points_t()).map(|k| self.t(k)).collect()
    }

    /// Flat index of point `(x_i, t_k)`, time-major.
    pub fn index(&self, i: usize, k: usize) -> usize {
        k * self.points_x() + i
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ErrorNorms {
    pub linf: f64,
    pub l2: f64,
}

/// Values of a scalar function on every point of a [`SpaceTimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    grid: SpaceTimeGrid,
    values: Vec<f64>,
}

impl GridField {
    pub fn new(grid: SpaceTimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: SpaceTimeGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for k in 0..grid.points_t() {
            let t = grid.t(k);
            for i in 0..grid.points_x() {
                values.push(f(grid.x(i), t));
            }
        }
        Self { grid, values }
    }

    pub fn sample(grid: SpaceTimeGrid, field: &dyn SpaceTimeField) -> Self {
        Self::from_fn(grid, |x, t| field.value(x, t))
    }

    pub fn grid(&self) -> &SpaceTimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, i: usize, k: usize) -> f64 {
        self.values[self.grid.index(i, k)]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map(&self, other: &GridField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("fields live on different grids".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { grid: self.grid, values })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Trapezoidal-rule integral over the rectangle.
    pub fn integrate(&self) -> f64 {
        let g = &self.grid;
        let (px, pt) = (g.points_x(), g.points_t());
        let mut total = 0.0;
        for k in 0..pt {
            let wt = if k == 0 || k == pt - 1 { 0.5 } else { 1.0 };
            let row = &self.values[k * px..(k + 1) * px];
            let s: f64 = row
                .iter()
                .enumerate()
                .map(|(i, v)| if i == 0 || i == px - 1 { 0.5 * v } else { *v })
                .sum();
            total += wt * s;
        }
        total * g.h() * g.k()
    }

    /// Trapezoidal-rule L2 norm.
    pub fn l2(&self) -> f64 {
        self.map(|v| v * v).integrate().max(0.0).sqrt()
    }

    pub fn norms(&self) -> ErrorNorms {
        ErrorNorms { linf: self.max_abs(), l2: self.l2() }
    }
}

/// Error of a sampled field against an exact function over the grid points.
pub fn error_vs_exact(field: &GridField, exact: &dyn Fn(f64, f64) -> f64) -> ErrorNorms {
    let exact_values = GridField::from_fn(*field.grid(), exact);
    field
        .zip_map(&exact_values, |a, b| a - b)
        .expect("same grid by construction")
        .norms()
}
