//! Uniform rectangular grid and scalar fields on it.
//!
//! Points include the boundary: `nx` points span `[0, lx]` so the spacing is
//! `lx/(nx-1)`. Values are stored row-major with x fastest, i.e. entry
//! `(i, j)` lives at `j*nx + i`. Evolved states (vorticity, streamfunction)
//! keep an exactly-zero boundary ring — homogeneous Dirichlet conditions.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid<T> {
    pub nx: usize,
    pub ny: usize,
    pub lx: T,
    pub ly: T,
}

impl<T: Real> Grid<T> {
    pub fn new(nx: usize, ny: usize, lx: T, ly: T) -> Result<Self> {
        if nx < 3 || ny < 3 {
            return Err(Error::GridTooSmall { nx, ny });
        }
        if lx <= T::zero() || ly <= T::zero() {
            return Err(Error::BadExtents { lx: lx.as_f64(), ly: ly.as_f64() });
        }
        Ok(Grid { nx, ny, lx, ly })
    }

    /// Number of points, boundary included.
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn hx(&self) -> T {
        self.lx / T::of_usize(self.nx - 1)
    }

    pub fn hy(&self) -> T {
        self.ly / T::of_usize(self.ny - 1)
    }

    pub fn x(&self, i: usize) -> T {
        T::of_usize(i) * self.hx()
    }

    pub fn y(&self, j: usize) -> T {
        T::of_usize(j) * self.hy()
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// True when `(i, j)` is strictly inside the boundary ring.
    pub fn is_interior(&self, i: usize, j: usize) -> bool {
        i >= 1 && i + 1 < self.nx && j >= 1 && j + 1 < self.ny
    }

    pub fn same_as(&self, other: &Grid<T>) -> Result<()> {
        if self.nx != other.nx || self.ny != other.ny {
            return Err(Error::GridMismatch {
                left_nx: self.nx,
                left_ny: self.ny,
                right_nx: other.nx,
                right_ny: other.ny,
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Field<T> {
    grid: Grid<T>,
    values: Vec<T>,
}

impl<T: Real> Field<T> {
    pub fn zeros(grid: Grid<T>) -> Self {
        Field { grid, values: vec![T::zero(); grid.len()] }
    }

    pub fn from_values(grid: Grid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ValueCount { expected: grid.len(), got: values.len() });
        }
        Ok(Field { grid, values })
    }

    /// Evaluates `f(x, y)` at every grid point, boundary included.
    pub fn from_fn(grid: Grid<T>, f: impl Fn(T, T) -> T) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.ny {
            let y = grid.y(j);
            for i in 0..grid.nx {
                values.push(f(grid.x(i), y));
            }
        }
        Field { grid, values }
    }

    /// Evaluates `f(x, y)` on the interior and zeroes the boundary ring.
    pub fn from_interior_fn(grid: Grid<T>, f: impl Fn(T, T) -> T) -> Self {
        let mut field = Self::zeros(grid);
        for j in 1..grid.ny - 1 {
            let y = grid.y(j);
            for i in 1..grid.nx - 1 {
                field.values[grid.idx(i, j)] = f(grid.x(i), y);
            }
        }
        field
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[j * self.grid.nx + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.values[j * self.grid.nx + i] = v;
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn norm_l2(&self) -> T {
        self.values.iter().map(|v| *v * *v).sum::<T>().sqrt()
    }

    pub fn dot(&self, other: &Field<T>) -> T {
        debug_assert_eq!(self.values.len(), other.values.len());
        self.values.iter().zip(&other.values).map(|(a, b)| *a * *b).sum()
    }

    /// `self + c * other`, allocating the result.
    pub fn add_scaled(&self, c: T, other: &Field<T>) -> Field<T> {
        debug_assert_eq!(self.values.len(), other.values.len());
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| *a + c * *b)
            .collect();
        Field { grid: self.grid, values }
    }

    /// In-place `self += c * other`.
    pub fn axpy(&mut self, c: T, other: &Field<T>) {
        debug_assert_eq!(self.values.len(), other.values.len());
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a = *a + c * *b;
        }
    }

    pub fn scale(&mut self, c: T) {
        for v in &mut self.values {
            *v = *v * c;
        }
    }

    pub fn boundary_is_zero(&self) -> bool {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        for i in 0..nx {
            if self.get(i, 0) != T::zero() || self.get(i, ny - 1) != T::zero() {
                return false;
            }
        }
        for j in 0..ny {
            if self.get(0, j) != T::zero() || self.get(nx - 1, j) != T::zero() {
                return false;
            }
        }
        true
    }

    pub fn zero_boundary(&mut self) {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        for i in 0..nx {
            let bottom = self.grid.idx(i, 0);
            let top = self.grid.idx(i, ny - 1);
            self.values[bottom] = T::zero();
            self.values[top] = T::zero();
        }
        for j in 0..ny {
            let left = self.grid.idx(0, j);
            let right = self.grid.idx(nx - 1, j);
            self.values[left] = T::zero();
            self.values[right] = T::zero();
        }
    }
}
