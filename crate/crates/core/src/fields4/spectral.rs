//! FFT-based differentiation on the periodic grid.
//!
//! Derivatives are exact for band-limited data, so d.d = 0, Stokes and the
//! Leibniz rules hold to round-off. The Nyquist mode is zeroed in first
//! derivatives (the grid constructor enforces even n for this reason).

use super::exterior::{d_entries, COMP_COUNT};
use super::{Grid4, KForm, VectorField, TWO_PI};
use crate::error::{Error, Result};
use crate::par;
use num_complex::Complex64;
use once_cell::sync::Lazy;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

pub(crate) struct SpectralEngine {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// First-derivative multipliers 2 pi k, Nyquist zeroed.
    dk: Vec<f64>,
}

static ENGINES: Lazy<Mutex<HashMap<usize, Arc<SpectralEngine>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

pub(crate) fn engine_for(grid: Grid4) -> Arc<SpectralEngine> {
    let mut cache = ENGINES.lock().unwrap();
    cache
        .entry(grid.n())
        .or_insert_with(|| {
            let n = grid.n();
            let mut planner = FftPlanner::new();
            let fwd = planner.plan_fft_forward(n);
            let inv = planner.plan_fft_inverse(n);
            let dk = (0..n)
                .map(|j| {
                    if j == n / 2 {
                        0.0
                    } else if j <= n / 2 {
                        TWO_PI * j as f64
                    } else {
                        TWO_PI * (j as f64 - n as f64)
                    }
                })
                .collect();
            Arc::new(SpectralEngine { n, fwd, inv, dk })
        })
        .clone()
}

/// Integer frequency of FFT bin `j` on an n-point axis.
pub(crate) fn frequency(j: usize, n: usize) -> i64 {
    if j <= n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

impl SpectralEngine {
    fn scratch(&self) -> Vec<Complex64> {
        let len = self
            .fwd
            .get_inplace_scratch_len()
            .max(self.inv.get_inplace_scratch_len());
        vec![Complex64::new(0.0, 0.0); len]
    }

    /// Partial derivative of a scalar field along `axis`.
    pub fn derivative_axis(&self, grid: Grid4, src: &[f64], axis: usize, out: &mut [f64]) {
        debug_assert_eq!(src.len(), grid.points());
        let n = self.n;
        let stride = grid.stride(axis);
        let bases = line_bases(grid, axis);
        let lines = par::map_indexed(bases.len(), |li| {
            let base = bases[li];
            let mut buf: Vec<Complex64> = (0..n)
                .map(|t| Complex64::new(src[base + t * stride], 0.0))
                .collect();
            let mut scratch = self.scratch();
            self.fwd.process_with_scratch(&mut buf, &mut scratch);
            for (j, v) in buf.iter_mut().enumerate() {
                *v *= Complex64::new(0.0, self.dk[j]);
            }
            self.inv.process_with_scratch(&mut buf, &mut scratch);
            let scale = 1.0 / n as f64;
            buf.iter().map(|v| v.re * scale).collect::<Vec<f64>>()
        });
        for (li, line) in lines.iter().enumerate() {
            let base = bases[li];
            for (t, &v) in line.iter().enumerate() {
                out[base + t * stride] = v;
            }
        }
    }

    /// Full 4-D forward transform of a scalar field (unnormalized).
    pub fn fft4(&self, grid: Grid4, src: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> =
            src.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        for axis in 0..4 {
            self.transform_axis(grid, &mut buf, axis, true);
        }
        buf
    }

    /// Inverse of [`fft4`], returning the real part with 1/n^4 normalization.
    pub fn ifft4_real(&self, grid: Grid4, mut buf: Vec<Complex64>) -> Vec<f64> {
        for axis in 0..4 {
            self.transform_axis(grid, &mut buf, axis, false);
        }
        let scale = 1.0 / grid.points() as f64;
        buf.iter().map(|v| v.re * scale).collect()
    }

    fn transform_axis(&self, grid: Grid4, buf: &mut [Complex64], axis: usize, forward: bool) {
        let n = self.n;
        let stride = grid.stride(axis);
        let fft = if forward { &self.fwd } else { &self.inv };
        let bases = line_bases(grid, axis);
        let lines = par::map_indexed(bases.len(), |li| {
            let base = bases[li];
            let mut line: Vec<Complex64> = (0..n).map(|t| buf[base + t * stride]).collect();
            let mut scratch = self.scratch();
            fft.process_with_scratch(&mut line, &mut scratch);
            line
        });
        for (li, line) in lines.iter().enumerate() {
            let base = bases[li];
            for (t, &v) in line.iter().enumerate() {
                buf[base + t * stride] = v;
            }
        }
    }
}

fn line_bases(grid: Grid4, axis: usize) -> Vec<usize> {
    let n = grid.n();
    let stride = grid.stride(axis);
    (0..grid.points())
        .filter(|idx| (idx / stride) % n == 0)
        .collect()
}

/// Exterior derivative, computed spectrally. Raises the degree by one.
pub fn exterior_d(a: &KForm) -> Result<KForm> {
    if a.degree() >= 4 {
        return Err(Error::InvalidDegree {
            op: "exterior_d",
            degree: a.degree(),
        });
    }
    let grid = a.grid();
    let engine = engine_for(grid);
    let np = grid.points();
    let mut out = KForm::zeros(grid, a.degree() + 1);
    let mut deriv = vec![0.0; np];
    for (out_c, axis, in_c, sign) in d_entries(a.degree()) {
        engine.derivative_axis(grid, a.comp(in_c), axis, &mut deriv);
        let dst = &mut out.data_mut()[out_c * np..(out_c + 1) * np];
        par::axpy(dst, sign, &deriv);
    }
    Ok(out)
}

/// Gradient 1-form df of a scalar field.
pub fn grad_0form(f: &KForm) -> KForm {
    assert_eq!(f.degree(), 0, "grad_0form expects a 0-form");
    exterior_d(f).expect("degree 0 is differentiable")
}

/// Lie derivative via Cartan's formula d iota(X) + iota(X) d.
pub fn lie_derivative(x: &VectorField, a: &KForm) -> KForm {
    use super::exterior::interior;
    match a.degree() {
        0 => {
            let da = exterior_d(a).expect("degree 0");
            interior(x, &da).expect("degree 1")
        }
        4 => {
            let ia = interior(x, a).expect("degree 4");
            exterior_d(&ia).expect("degree 3")
        }
        _ => {
            let ia = interior(x, a).expect("degree >= 1");
            let mut out = exterior_d(&ia).expect("degree <= 2");
            let da = exterior_d(a).expect("degree <= 3");
            out.axpy(1.0, &interior(x, &da).expect("degree >= 1"));
            out
        }
    }
}

/// Covariant derivative (X . d)Y of the flat background connection.
pub fn covariant_derivative(x: &VectorField, y: &VectorField) -> VectorField {
    let grid = x.grid();
    assert_eq!(grid, y.grid(), "grid mismatch");
    let engine = engine_for(grid);
    let np = grid.points();
    let mut out = VectorField::zeros(grid);
    let mut deriv = vec![0.0; np];
    for nu in 0..4 {
        for mu in 0..4 {
            engine.derivative_axis(grid, y.comp(nu), mu, &mut deriv);
            let dst = &mut out.data_mut()[nu * np..(nu + 1) * np];
            par::fma_pointwise(dst, 1.0, x.comp(mu), &deriv);
        }
    }
    out
}

/// 2/3-rule spectral truncation: zero every mode with |k| > n/3 on any axis.
pub fn dealias_23(a: &KForm) -> KForm {
    let grid = a.grid();
    let engine = engine_for(grid);
    let n = grid.n();
    let cutoff = (n / 3) as i64;
    let mut out = KForm::zeros(grid, a.degree());
    for c in 0..COMP_COUNT[a.degree()] {
        let mut coeffs = engine.fft4(grid, a.comp(c));
        for (idx, v) in coeffs.iter_mut().enumerate() {
            let i4 = idx % n;
            let i3 = (idx / n) % n;
            let i2 = (idx / (n * n)) % n;
            let i1 = idx / (n * n * n);
            let keep = frequency(i1, n).abs() <= cutoff
                && frequency(i2, n).abs() <= cutoff
                && frequency(i3, n).abs() <= cutoff
                && frequency(i4, n).abs() <= cutoff;
            if !keep {
                *v = Complex64::new(0.0, 0.0);
            }
        }
        let real = engine.ifft4_real(grid, coeffs);
        out.comp_mut(c).copy_from_slice(&real);
    }
    out
}
