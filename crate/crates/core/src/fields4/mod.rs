//! Periodic grid on the unit 4-torus, k-form and vector fields, pointwise
//! exterior algebra and spectral differentiation.
//!
//! Coordinates live in `[0,1)^4` with the Euclidean background metric, volume
//! form `dx1^dx2^dx3^dx4` and the standard orientation. Storage is
//! component-major: a field holds one contiguous block per component, blocks in
//! lexicographic multi-index order, and inside a block the point index runs
//! with x1 slowest and x4 fastest.

mod exterior;
mod spectral;

pub use exterior::{
    basis_one_form, component_means, interior, integrate, norm_sq_pointwise, sd_split,
    star_background, wedge, COMP_COUNT,
};
pub use spectral::{
    covariant_derivative, dealias_23, exterior_d, grad_0form, lie_derivative,
};
pub(crate) use exterior::{interior_point, star_point, wedge_point};
pub(crate) use spectral::{engine_for, frequency};

use crate::error::{Error, Result};
use crate::par;
use std::ops::{Add, Mul, Neg, Sub};

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Uniform periodic lattice with `n` points per axis over `[0,1)^4`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Grid4 {
    n: usize,
}

impl Grid4 {
    /// `n` must be even and at least 4 so the Nyquist mode is unambiguous.
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 || n % 2 != 0 {
            return Err(Error::InvalidGridSize(n));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn points(&self) -> usize {
        self.n * self.n * self.n * self.n
    }

    /// Stride of axis `a` in the flat point index (x1 slowest, x4 fastest).
    pub fn stride(&self, axis: usize) -> usize {
        debug_assert!(axis < 4);
        self.n.pow(3 - axis as u32)
    }

    pub fn index(&self, ijkl: [usize; 4]) -> usize {
        ((ijkl[0] * self.n + ijkl[1]) * self.n + ijkl[2]) * self.n + ijkl[3]
    }

    pub fn coords(&self, idx: usize) -> [f64; 4] {
        let n = self.n;
        let h = self.spacing();
        let i4 = idx % n;
        let i3 = (idx / n) % n;
        let i2 = (idx / (n * n)) % n;
        let i1 = idx / (n * n * n);
        [i1 as f64 * h, i2 as f64 * h, i3 as f64 * h, i4 as f64 * h]
    }
}

/// Field of k-form coefficients on a [`Grid4`].
///
/// Degree k has C(4,k) real components per point (1, 4, 6, 4, 1); the
/// component order for degree 2 is 12, 13, 14, 23, 24, 34.
#[derive(Clone, Debug)]
pub struct KForm {
    grid: Grid4,
    degree: usize,
    data: Vec<f64>,
}

impl KForm {
    pub fn zeros(grid: Grid4, degree: usize) -> Self {
        assert!(degree <= 4, "degree > 4");
        Self {
            grid,
            degree,
            data: vec![0.0; COMP_COUNT[degree] * grid.points()],
        }
    }

    /// Spatially constant form with the given component values.
    pub fn constant(grid: Grid4, degree: usize, comps: &[f64]) -> Self {
        assert!(degree <= 4, "degree > 4");
        assert_eq!(comps.len(), COMP_COUNT[degree]);
        let np = grid.points();
        let mut form = Self::zeros(grid, degree);
        for (c, &v) in comps.iter().enumerate() {
            form.data[c * np..(c + 1) * np].fill(v);
        }
        form
    }

    /// Build a form by evaluating `f(coords, component)` at every point.
    pub fn from_fn<F>(grid: Grid4, degree: usize, f: F) -> Self
    where
        F: Fn([f64; 4], usize) -> f64 + Sync,
    {
        let np = grid.points();
        let mut form = Self::zeros(grid, degree);
        for c in 0..COMP_COUNT[degree] {
            let slice = &mut form.data[c * np..(c + 1) * np];
            par::fill_chunks(slice, |off, chunk| {
                for (j, v) in chunk.iter_mut().enumerate() {
                    *v = f(grid.coords(off + j), c);
                }
            });
        }
        form
    }

    /// Add `amp * sin(2 pi k.x + phase)` to component `comp`.
    pub fn add_mode(&mut self, comp: usize, k: [i32; 4], amp: f64, phase: f64) {
        let grid = self.grid;
        let slice = self.comp_mut(comp);
        par::fill_chunks(slice, |off, chunk| {
            for (j, v) in chunk.iter_mut().enumerate() {
                let x = grid.coords(off + j);
                let arg = TWO_PI
                    * (k[0] as f64 * x[0]
                        + k[1] as f64 * x[1]
                        + k[2] as f64 * x[2]
                        + k[3] as f64 * x[3])
                    + phase;
                *v += amp * arg.sin();
            }
        });
    }

    pub fn grid(&self) -> Grid4 {
        self.grid
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_comps(&self) -> usize {
        COMP_COUNT[self.degree]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn comp(&self, c: usize) -> &[f64] {
        let np = self.grid.points();
        &self.data[c * np..(c + 1) * np]
    }

    pub fn comp_mut(&mut self, c: usize) -> &mut [f64] {
        let np = self.grid.points();
        &mut self.data[c * np..(c + 1) * np]
    }

    /// Component values at one point, in multi-index order.
    pub fn at(&self, idx: usize) -> Vec<f64> {
        let np = self.grid.points();
        (0..self.n_comps()).map(|c| self.data[c * np + idx]).collect()
    }

    pub fn linf(&self) -> f64 {
        par::max_abs(&self.data)
    }

    /// L2 norm under the background metric: sqrt(int |a|^2 dvol).
    pub fn l2_norm(&self) -> f64 {
        (par::dot(&self.data, &self.data) / self.grid.points() as f64).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: f64, other: &KForm) {
        assert_compatible(self, other);
        par::axpy(&mut self.data, s, &other.data);
    }

    pub fn scaled(&self, s: f64) -> KForm {
        let mut out = self.clone();
        par::fill_chunks(&mut out.data, |off, chunk| {
            for (j, v) in chunk.iter_mut().enumerate() {
                *v = s * self.data[off + j];
            }
        });
        out
    }

    /// Multiply every component pointwise by the scalar field `s`.
    pub fn scale_pointwise(&self, s: &KForm) -> KForm {
        assert_eq!(s.degree, 0, "scale field must have degree 0");
        assert_eq!(self.grid, s.grid, "grid mismatch");
        let np = self.grid.points();
        let mut out = self.clone();
        for c in 0..self.n_comps() {
            let src = self.comp(c);
            let dst = &mut out.data[c * np..(c + 1) * np];
            par::fill_chunks(dst, |off, chunk| {
                for (j, v) in chunk.iter_mut().enumerate() {
                    *v = src[off + j] * s.data[off + j];
                }
            });
        }
        out
    }
}

fn assert_compatible(a: &KForm, b: &KForm) {
    assert_eq!(a.grid, b.grid, "grid mismatch");
    assert_eq!(a.degree, b.degree, "degree mismatch");
}

impl Add for &KForm {
    type Output = KForm;
    fn add(self, rhs: &KForm) -> KForm {
        let mut out = self.clone();
        out.axpy(1.0, rhs);
        out
    }
}

impl Sub for &KForm {
    type Output = KForm;
    fn sub(self, rhs: &KForm) -> KForm {
        let mut out = self.clone();
        out.axpy(-1.0, rhs);
        out
    }
}

impl Mul<f64> for &KForm {
    type Output = KForm;
    fn mul(self, s: f64) -> KForm {
        self.scaled(s)
    }
}

impl Neg for &KForm {
    type Output = KForm;
    fn neg(self) -> KForm {
        self.scaled(-1.0)
    }
}

/// Field of tangent vectors, 4 components per point.
#[derive(Clone, Debug)]
pub struct VectorField {
    grid: Grid4,
    data: Vec<f64>,
}

impl VectorField {
    pub fn zeros(grid: Grid4) -> Self {
        Self {
            grid,
            data: vec![0.0; 4 * grid.points()],
        }
    }

    pub fn from_fn<F>(grid: Grid4, f: F) -> Self
    where
        F: Fn([f64; 4], usize) -> f64 + Sync,
    {
        let np = grid.points();
        let mut vf = Self::zeros(grid);
        for c in 0..4 {
            let slice = &mut vf.data[c * np..(c + 1) * np];
            par::fill_chunks(slice, |off, chunk| {
                for (j, v) in chunk.iter_mut().enumerate() {
                    *v = f(grid.coords(off + j), c);
                }
            });
        }
        vf
    }

    pub fn grid(&self) -> Grid4 {
        self.grid
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn comp(&self, c: usize) -> &[f64] {
        let np = self.grid.points();
        &self.data[c * np..(c + 1) * np]
    }

    pub fn comp_mut(&mut self, c: usize) -> &mut [f64] {
        let np = self.grid.points();
        &mut self.data[c * np..(c + 1) * np]
    }

    pub fn at(&self, idx: usize) -> [f64; 4] {
        let np = self.grid.points();
        [
            self.data[idx],
            self.data[np + idx],
            self.data[2 * np + idx],
            self.data[3 * np + idx],
        ]
    }

    pub fn linf(&self) -> f64 {
        par::max_abs(&self.data)
    }

    pub fn l2_norm(&self) -> f64 {
        (par::dot(&self.data, &self.data) / self.grid.points() as f64).sqrt()
    }

    pub fn axpy(&mut self, s: f64, other: &VectorField) {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        par::axpy(&mut self.data, s, &other.data);
    }

    pub fn scaled(&self, s: f64) -> VectorField {
        let mut out = self.clone();
        for v in out.data.iter_mut() {
            *v *= s;
        }
        out
    }

    /// 1-form g(X, .) of the Euclidean background metric.
    pub fn flat(&self) -> KForm {
        let mut out = KForm::zeros(self.grid, 1);
        out.data.copy_from_slice(&self.data);
        out
    }
}

impl Add for &VectorField {
    type Output = VectorField;
    fn add(self, rhs: &VectorField) -> VectorField {
        let mut out = self.clone();
        out.axpy(1.0, rhs);
        out
    }
}

impl Sub for &VectorField {
    type Output = VectorField;
    fn sub(self, rhs: &VectorField) -> VectorField {
        let mut out = self.clone();
        out.axpy(-1.0, rhs);
        out
    }
}

/// L2 inner product int <a,b> dvol of two forms of equal degree.
pub fn l2_inner(a: &KForm, b: &KForm) -> f64 {
    assert_compatible(a, b);
    par::dot(a.data(), b.data()) / a.grid().points() as f64
}

/// Standard commutator bracket [X,Y] = (X.d)Y - (Y.d)X.
pub fn bracket_std(x: &VectorField, y: &VectorField) -> VectorField {
    let mut out = covariant_derivative(x, y);
    out.axpy(-1.0, &covariant_derivative(y, x));
    out
}

/// The constant harmonic symplectic form dx1^dx2 + dx3^dx4.
pub fn omega_std(grid: Grid4) -> KForm {
    KForm::constant(grid, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0])
}

/// The background volume form dx1^dx2^dx3^dx4.
pub fn dvol(grid: Grid4) -> KForm {
    KForm::constant(grid, 4, &[1.0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn grid_requires_even_n_at_least_4() {
        assert!(Grid4::new(3).is_err());
        assert!(Grid4::new(6).is_ok());
        assert!(Grid4::new(7).is_err());
        assert!(Grid4::new(2).is_err());
    }

    #[test]
    fn component_counts() {
        let grid = Grid4::new(4).unwrap();
        for (k, &c) in COMP_COUNT.iter().enumerate() {
            assert_eq!(KForm::zeros(grid, k).n_comps(), c);
        }
    }

    #[test]
    fn index_layout_x4_fastest() {
        let grid = Grid4::new(4).unwrap();
        assert_eq!(grid.index([0, 0, 0, 1]), 1);
        assert_eq!(grid.index([1, 0, 0, 0]), 64);
        assert_eq!(grid.stride(0), 64);
        assert_eq!(grid.stride(3), 1);
        let idx = grid.index([1, 2, 3, 0]);
        assert_eq!(grid.coords(idx), [0.25, 0.5, 0.75, 0.0]);
    }

    #[test]
    fn mode_and_norms() {
        let grid = Grid4::new(8).unwrap();
        let mut f = KForm::zeros(grid, 0);
        f.add_mode(0, [1, 0, 0, 0], 2.0, 0.0);
        assert_abs_diff_eq!(f.linf(), 2.0, epsilon = 1e-12);
        // int 4 sin^2 = 2
        assert_abs_diff_eq!(f.l2_norm(), 2.0_f64.sqrt(), epsilon = 1e-12);
    }
}
