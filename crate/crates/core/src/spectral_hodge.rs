//! Exact Hodge-theoretic solvers for the flat background metric: Laplacian
//! inversion, Hodge decomposition, primitives of exact forms and harmonic
//! projections.
//!
//! On the flat torus the harmonic forms are the constant ones, so the
//! harmonic projection is a componentwise mean and everything else is a
//! Fourier-multiplier solve.

use crate::error::{Error, Result};
use crate::fields4::{component_means, exterior_d, star_background, KForm};
use crate::par;

/// Default infinity-norm tolerance for exactness checks.
pub const DEFAULT_EXACTNESS_TOL: f64 = 1e-10;

/// Orthogonal splitting a = exact + coexact + harmonic.
#[derive(Clone, Debug)]
pub struct HodgeDecomposition {
    pub exact_part: KForm,
    pub coexact_part: KForm,
    pub harmonic_part: KForm,
}

/// Residuals backing an exactness decision.
#[derive(Clone, Copy, Debug)]
pub struct ExactnessReport {
    pub exact: bool,
    pub d_residual: f64,
    pub harmonic_residual: f64,
}

/// Codifferential delta = -*d* (valid on every degree in dimension four).
pub fn codifferential(a: &KForm) -> Result<KForm> {
    if a.degree() == 0 {
        return Err(Error::InvalidDegree {
            op: "codifferential",
            degree: 0,
        });
    }
    let inner = exterior_d(&star_background(a))?;
    Ok(star_background(&inner).scaled(-1.0))
}

/// Apply the inverse Hodge Laplacian (d delta + delta d)^{-1} componentwise.
///
/// The zero mode is annihilated, so input and output are both mean-free per
/// component. In Fourier space this divides by 4 pi^2 |k|^2.
pub(crate) fn inv_hodge_laplacian(a: &KForm) -> KForm {
    let grid = a.grid();
    let engine = crate::fields4::engine_for(grid);
    let n = grid.n();
    let mut out = KForm::zeros(grid, a.degree());
    for c in 0..a.n_comps() {
        let mut coeffs = engine.fft4(grid, a.comp(c));
        for (idx, v) in coeffs.iter_mut().enumerate() {
            let i4 = idx % n;
            let i3 = (idx / n) % n;
            let i2 = (idx / (n * n)) % n;
            let i1 = idx / (n * n * n);
            let k1 = crate::fields4::frequency(i1, n) as f64;
            let k2 = crate::fields4::frequency(i2, n) as f64;
            let k3 = crate::fields4::frequency(i3, n) as f64;
            let k4 = crate::fields4::frequency(i4, n) as f64;
            let ksq = k1 * k1 + k2 * k2 + k3 * k3 + k4 * k4;
            if ksq == 0.0 {
                *v = num_complex::Complex64::new(0.0, 0.0);
            } else {
                let lam = crate::fields4::TWO_PI * crate::fields4::TWO_PI * ksq;
                *v /= lam;
            }
        }
        let real = engine.ifft4_real(grid, coeffs);
        out.comp_mut(c).copy_from_slice(&real);
    }
    out
}

/// Solve the background Laplacian sum_i d^2/dx_i^2 p = f for mean-zero p.
pub fn solve_laplace(f: &KForm) -> Result<KForm> {
    assert_eq!(f.degree(), 0, "solve_laplace expects a 0-form");
    let mean = par::sum(f.comp(0)) / f.grid().points() as f64;
    if mean.abs() > 1e-12 {
        return Err(Error::NotInLaplaceRange { mean });
    }
    // The Hodge Laplacian is minus the coordinate Laplacian on functions.
    Ok(inv_hodge_laplacian(f).scaled(-1.0))
}

/// Componentwise mean: the harmonic part of a form on the flat torus.
pub fn harmonic_part(a: &KForm) -> KForm {
    KForm::constant(a.grid(), a.degree(), &component_means(a))
}

/// Check whether `a` lies in the image of d, with the residuals that decided.
pub fn is_exact(a: &KForm, tol: f64) -> ExactnessReport {
    assert!(a.degree() >= 1, "exactness needs degree >= 1");
    let d_residual = if a.degree() == 4 {
        0.0
    } else {
        exterior_d(a).expect("degree <= 3").linf()
    };
    let harmonic_residual = par::max_abs(&component_means(a));
    ExactnessReport {
        exact: d_residual <= tol && harmonic_residual <= tol,
        d_residual,
        harmonic_residual,
    }
}

/// Background-coexact, harmonic-free primitive of an exact form:
/// the unique lambda with d lambda = rh, delta lambda = 0, zero mean.
pub fn primitive_of_exact(rh: &KForm) -> Result<KForm> {
    primitive_of_exact_tol(rh, DEFAULT_EXACTNESS_TOL)
}

pub fn primitive_of_exact_tol(rh: &KForm, tol: f64) -> Result<KForm> {
    assert!(rh.degree() >= 1, "primitive needs degree >= 1");
    let report = is_exact(rh, tol);
    if !report.exact {
        let reason = if report.d_residual > tol {
            "not closed"
        } else {
            "nonzero harmonic part"
        };
        return Err(Error::NotExact {
            reason,
            d_residual: report.d_residual,
            harmonic_residual: report.harmonic_residual,
        });
    }
    codifferential(&inv_hodge_laplacian(rh))
}

/// Orthogonal Hodge decomposition with respect to the background metric.
pub fn hodge_decompose(a: &KForm) -> HodgeDecomposition {
    let grid = a.grid();
    let harmonic = harmonic_part(a);
    let mut fluct = a.clone();
    fluct.axpy(-1.0, &harmonic);
    let pot = inv_hodge_laplacian(&fluct);
    let exact_part = if a.degree() == 0 {
        KForm::zeros(grid, 0)
    } else {
        exterior_d(&codifferential(&pot).expect("degree >= 1")).expect("degree - 1 <= 3")
    };
    let coexact_part = if a.degree() == 4 {
        KForm::zeros(grid, 4)
    } else {
        codifferential(&exterior_d(&pot).expect("degree <= 3")).expect("degree + 1 >= 1")
    };
    HodgeDecomposition {
        exact_part,
        coexact_part,
        harmonic_part: harmonic,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields4::{l2_inner, omega_std, Grid4, TWO_PI};
    use approx::assert_abs_diff_eq;

    fn grid() -> Grid4 {
        Grid4::new(8).unwrap()
    }

    #[test]
    fn laplace_sine_mode() {
        let g = grid();
        let mut f = KForm::zeros(g, 0);
        f.add_mode(0, [1, 0, 0, 0], 1.0, 0.0);
        let p = solve_laplace(&f).unwrap();
        let expected = f.scaled(-1.0 / (TWO_PI * TWO_PI));
        assert!((&p - &expected).linf() <= 1e-13);
    }

    #[test]
    fn laplace_zero_and_kernel() {
        let g = grid();
        let z = KForm::zeros(g, 0);
        assert_abs_diff_eq!(solve_laplace(&z).unwrap().linf(), 0.0);
        let c = KForm::constant(g, 0, &[1.0]);
        assert!(matches!(
            solve_laplace(&c),
            Err(Error::NotInLaplaceRange { .. })
        ));
    }

    #[test]
    fn primitive_of_sinusoidal_exact_form() {
        let g = grid();
        // rh = d(sin(2 pi x1) dx2)
        let mut pot = KForm::zeros(g, 1);
        pot.add_mode(1, [1, 0, 0, 0], 1.0, 0.0);
        let rh = exterior_d(&pot).unwrap();
        let lam = primitive_of_exact(&rh).unwrap();
        assert!((&exterior_d(&lam).unwrap() - &rh).linf() <= 1e-11);
        assert!(codifferential(&lam).unwrap().linf() <= 1e-11);
        assert!(par::max_abs(&component_means(&lam)) <= 1e-13);
        // here the coexact gauge-fixed primitive is the potential itself
        assert!((&lam - &pot).linf() <= 1e-11);
    }

    #[test]
    fn primitive_of_zero_and_harmonic_obstruction() {
        let g = grid();
        let z = KForm::zeros(g, 2);
        assert_abs_diff_eq!(primitive_of_exact(&z).unwrap().linf(), 0.0);
        let harmonic = KForm::constant(g, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        match primitive_of_exact(&harmonic) {
            Err(Error::NotExact { reason, .. }) => assert_eq!(reason, "nonzero harmonic part"),
            other => panic!("expected harmonic obstruction, got {other:?}"),
        }
    }

    #[test]
    fn primitive_rejects_non_closed() {
        let g = grid();
        let mut w = KForm::zeros(g, 2);
        w.add_mode(3, [1, 0, 0, 0], 1.0, 0.0); // sin(2 pi x1) dx2^dx3 is not closed
        match primitive_of_exact(&w) {
            Err(Error::NotExact { reason, .. }) => assert_eq!(reason, "not closed"),
            other => panic!("expected closedness failure, got {other:?}"),
        }
    }

    #[test]
    fn harmonic_part_examples() {
        let g = grid();
        let mut a = omega_std(g);
        a.add_mode(0, [1, 0, 0, 0], 2.0 * std::f64::consts::PI, 0.5);
        let h = harmonic_part(&a);
        assert!((&h - &omega_std(g)).linf() <= 1e-13);
        // idempotent on constants
        assert!((&harmonic_part(&h) - &h).linf() <= 1e-13);
        // mean-zero input maps to zero
        let mut mz = KForm::zeros(g, 1);
        mz.add_mode(2, [0, 1, 0, 0], 1.0, 0.0);
        assert!(harmonic_part(&mz).linf() <= 1e-14);
    }

    #[test]
    fn is_exact_examples() {
        let g = grid();
        let mut pot = KForm::zeros(g, 1);
        pot.add_mode(0, [0, 0, 1, 0], 0.7, 0.1);
        pot.add_mode(3, [1, 0, 0, 0], 0.4, 0.9);
        let d = exterior_d(&pot).unwrap();
        assert!(is_exact(&d, DEFAULT_EXACTNESS_TOL).exact);

        let c3 = KForm::constant(g, 3, &[0.0, 1.0, 0.0, 0.0]);
        assert!(!is_exact(&c3, DEFAULT_EXACTNESS_TOL).exact);

        // sin(2 pi x1) dx1 = d(-cos(2 pi x1)/2 pi) is closed and mean-zero
        let mut a = KForm::zeros(g, 1);
        a.add_mode(0, [1, 0, 0, 0], 1.0, 0.0);
        assert!(is_exact(&a, DEFAULT_EXACTNESS_TOL).exact);
    }

    #[test]
    fn decomposition_reassembles_and_is_orthogonal() {
        let g = grid();
        let mut a = KForm::zeros(g, 2);
        a.add_mode(0, [1, 0, 0, 0], 0.8, 0.3);
        a.add_mode(2, [0, 1, 0, -1], 0.5, 1.2);
        a.add_mode(5, [0, 0, 1, 0], 0.6, 0.0);
        a.axpy(1.0, &omega_std(g));
        let h = hodge_decompose(&a);
        let mut sum = h.exact_part.clone();
        sum.axpy(1.0, &h.coexact_part);
        sum.axpy(1.0, &h.harmonic_part);
        assert!((&sum - &a).linf() <= 1e-11);
        assert!(l2_inner(&h.exact_part, &h.coexact_part).abs() <= 1e-11);
        assert!(l2_inner(&h.exact_part, &h.harmonic_part).abs() <= 1e-11);
        assert!(l2_inner(&h.coexact_part, &h.harmonic_part).abs() <= 1e-11);
    }

    #[test]
    fn primitive_inverts_d_on_coexact_one_forms() {
        let g = grid();
        // build a coexact harmonic-free 1-form as delta of a random 2-form
        let mut w = KForm::zeros(g, 2);
        w.add_mode(1, [1, 0, 0, 0], 0.9, 0.2);
        w.add_mode(4, [0, 1, 1, 0], 0.5, 0.7);
        let a = codifferential(&w).unwrap();
        let back = primitive_of_exact(&exterior_d(&a).unwrap()).unwrap();
        assert!((&back - &a).linf() <= 1e-10);
    }
}
