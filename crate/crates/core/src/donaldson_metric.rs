//! The Donaldson metric on exact 2-forms, the associated-vector-field solver
//! and the Levi-Civita connection.
//!
//! A tangent vector rhohat at a state rho is stored through its gauge-fixed
//! primitive lambda: d lambda = rhohat with *^rho lambda exact, equivalently
//! lambda = -iota(X) rho for the associated field X. The gauge solve is posed
//! in the scalar unknown f plus four harmonic coefficients h via
//! lambda = lambda0 + df + h, which exposes a symmetric positive definite
//! operator solved by conjugate gradients preconditioned with the inverse of
//! the background Laplacian.

use crate::error::{Error, Result};
use crate::fields4::{
    basis_one_form, component_means, covariant_derivative, exterior_d, grad_0form, integrate,
    interior, wedge, KForm, VectorField,
};
use crate::par;
use crate::rho_geometry::SymplecticState;
use crate::spectral_hodge;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preconditioner {
    None,
    BackgroundLaplacian,
}

#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    pub rel_tol: f64,
    pub max_iter: usize,
    pub preconditioner: Preconditioner,
    /// Infinity-norm tolerance for the exactness precondition on rhohat.
    pub exactness_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_iter: 2000,
            preconditioner: Preconditioner::BackgroundLaplacian,
            exactness_tol: 1e-8,
        }
    }
}

/// Convergence data and the residuals of both defining equations after a solve.
#[derive(Clone, Copy, Debug)]
pub struct SolveReport {
    pub iterations: usize,
    pub rel_residual: f64,
    /// |-d iota(X) rho - rhohat|_inf
    pub eq_residual: f64,
    /// |d(*^rho lambda)|_inf
    pub gauge_d_residual: f64,
    /// |harmonic part of *^rho lambda|_inf
    pub gauge_harmonic_residual: f64,
}

impl SolveReport {
    pub fn max_residual(&self) -> f64 {
        self.eq_residual
            .max(self.gauge_d_residual)
            .max(self.gauge_harmonic_residual)
    }
}

/// The scalar-plus-harmonic parametrization of the gauge solve; kept so later
/// solves on nearby states can warm-start.
#[derive(Clone, Debug)]
pub struct GaugeData {
    pub f: KForm,
    pub h: [f64; 4],
}

/// An exact 2-form with its gauge-fixed primitive and associated vector field.
#[derive(Clone, Debug)]
pub struct TangentVector {
    pub rhohat: KForm,
    pub lambda: KForm,
    pub x: VectorField,
    pub report: SolveReport,
    pub gauge: GaugeData,
    state_token: u64,
}

impl TangentVector {
    pub fn state_token(&self) -> u64 {
        self.state_token
    }
}

/// Solve Eq. system: -d iota(X) rho = rhohat with *^rho iota(X) rho exact.
pub fn associated_vector_field(
    state: &SymplecticState,
    rhohat: &KForm,
    opts: &SolverOptions,
) -> Result<TangentVector> {
    associated_vector_field_with_guess(state, rhohat, opts, None)
}

pub fn associated_vector_field_with_guess(
    state: &SymplecticState,
    rhohat: &KForm,
    opts: &SolverOptions,
    guess: Option<&GaugeData>,
) -> Result<TangentVector> {
    assert_eq!(rhohat.degree(), 2, "tangent vectors are 2-forms");
    if rhohat.grid() != state.grid() {
        return Err(Error::GridMismatch(rhohat.grid().n(), state.grid().n()));
    }
    if opts.rel_tol <= 0.0 {
        return Err(Error::InvalidOption("rel_tol must be positive"));
    }
    let report = spectral_hodge::is_exact(rhohat, opts.exactness_tol);
    if !report.exact {
        return Err(Error::NotExact {
            reason: if report.d_residual > opts.exactness_tol {
                "not closed"
            } else {
                "nonzero harmonic part"
            },
            d_residual: report.d_residual,
            harmonic_residual: report.harmonic_residual,
        });
    }

    let lambda0 = spectral_hodge::primitive_of_exact_tol(rhohat, opts.exactness_tol)?;
    let grid = state.grid();

    // right-hand side: demand d(*^rho lambda) = 0 and zero pairing against the
    // four constant 1-forms, with lambda = lambda0 + df + h
    let beta0 = state.star_rho_1(&lambda0);
    let rhs_h = pairing_vector(&beta0);
    let b = GaugeVec {
        f: density_of_d(&beta0),
        h: [-rhs_h[0], -rhs_h[1], -rhs_h[2], -rhs_h[3]],
    };

    let x0 = match guess {
        Some(g) => GaugeVec {
            f: g.f.clone(),
            h: g.h,
        },
        None => GaugeVec {
            f: KForm::zeros(grid, 0),
            h: [0.0; 4],
        },
    };

    let scale = rhohat.l2_norm();
    let (sol, iterations, rel_residual) = pcg(state, b, x0, opts, scale)?;

    let mut lambda = lambda0;
    lambda.axpy(1.0, &grad_0form(&sol.f));
    for c in 0..4 {
        lambda.axpy(sol.h[c], &basis_one_form(grid, c));
    }

    let x = state.rho_contract(&lambda.scaled(-1.0));
    let eq = exterior_d(&interior(&x, state.rho())?)?;
    let mut eq_res = eq;
    eq_res.axpy(1.0, rhohat); // -d iota(X) rho - rhohat = -(d iota(X) rho + rhohat)... check sign below
    let eq_residual = {
        // want -d iota(X) rho = rhohat, i.e. d iota(X) rho + rhohat = 0
        eq_res.linf()
    };
    let beta = state.star_rho_1(&lambda);
    let gauge_d_residual = density_of_d(&beta).linf();
    let gauge_harmonic_residual = par::max_abs(&component_means(&beta));

    Ok(TangentVector {
        rhohat: rhohat.clone(),
        lambda,
        x,
        report: SolveReport {
            iterations,
            rel_residual,
            eq_residual,
            gauge_d_residual,
            gauge_harmonic_residual,
        },
        gauge: GaugeData { f: sol.f, h: sol.h },
        state_token: state.token(),
    })
}

/// Package an exact 2-form whose gauge-fixed primitive is already known in
/// closed form (no elliptic solve). Used by the energy gradient.
pub(crate) fn tangent_from_primitive(
    state: &SymplecticState,
    rhohat: KForm,
    lambda: KForm,
) -> TangentVector {
    let x = state.rho_contract(&lambda.scaled(-1.0));
    let mut eq = exterior_d(&interior(&x, state.rho()).expect("degree 2"))
        .expect("degree 1");
    eq.axpy(1.0, &rhohat);
    let beta = state.star_rho_1(&lambda);
    let report = SolveReport {
        iterations: 0,
        rel_residual: 0.0,
        eq_residual: eq.linf(),
        gauge_d_residual: density_of_d(&beta).linf(),
        gauge_harmonic_residual: par::max_abs(&component_means(&beta)),
    };
    let gauge = GaugeData {
        f: KForm::zeros(state.grid(), 0),
        h: [0.0; 4],
    };
    TangentVector {
        rhohat,
        lambda,
        x,
        report,
        gauge,
        state_token: state.token(),
    }
}

/// Donaldson inner product <a, b> = int lambda_a ^ *^rho lambda_b.
pub fn inner(state: &SymplecticState, a: &TangentVector, b: &TangentVector) -> Result<f64> {
    if a.state_token != state.token() || b.state_token != state.token() {
        return Err(Error::StateMismatch);
    }
    Ok(integrate(&wedge(&a.lambda, &state.star_rho_1(&b.lambda))?))
}

/// The norm ||a||_rho = sqrt(<a, a>).
pub fn norm(state: &SymplecticState, a: &TangentVector) -> Result<f64> {
    Ok(inner(state, a, a)?.max(0.0).sqrt())
}

/// Christoffel term of the Levi-Civita connection:
/// (d iota(Y) rhohat + d iota(X) sigmahat - d iota(grad_Y X + grad_X Y) rho)/2
/// with X, Y the associated fields of a, b. Symmetric and exact.
pub fn christoffel(
    state: &SymplecticState,
    a: &TangentVector,
    b: &TangentVector,
) -> Result<KForm> {
    if a.state_token != state.token() || b.state_token != state.token() {
        return Err(Error::StateMismatch);
    }
    let x = &a.x;
    let y = &b.x;
    let mut out = exterior_d(&interior(y, &a.rhohat)?)?;
    out.axpy(1.0, &exterior_d(&interior(x, &b.rhohat)?)?);
    let mut nabla = covariant_derivative(y, x);
    nabla.axpy(1.0, &covariant_derivative(x, y));
    out.axpy(-1.0, &exterior_d(&interior(&nabla, state.rho())?)?);
    Ok(out.scaled(0.5))
}

/// Which published formula evaluates the covariant derivative along a path.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DerivativeMethod {
    /// Central difference of sigmahat plus the Christoffel term.
    ChristoffelCorrected,
    /// -d iota(Yhat + grad_X Y) rho with Yhat the central difference of the
    /// associated fields of sigmahat along the path.
    AdvectedPrimitive,
}

/// Samples of a path at t = -delta, 0, +delta.
pub struct PathSamples {
    pub delta: f64,
    pub rho: [KForm; 3],
    pub sigma_hat: [KForm; 3],
}

/// Covariant derivative of the path sigmahat_t along the path rho_t at t = 0.
/// The two methods agree to O(delta^2) plus solver tolerance.
pub fn covariant_derivative_along_path(
    samples: &PathSamples,
    method: DerivativeMethod,
    opts: &SolverOptions,
) -> Result<KForm> {
    let grid = samples.rho[1].grid();
    for w in samples.rho.iter().chain(samples.sigma_hat.iter()) {
        if w.grid() != grid {
            return Err(Error::GridMismatch(w.grid().n(), grid.n()));
        }
    }
    let delta = samples.delta;
    let state0 = SymplecticState::new(samples.rho[1].clone())?;
    let rhohat = (&samples.rho[2] - &samples.rho[0]).scaled(0.5 / delta);
    let a = associated_vector_field(&state0, &rhohat, opts)?;
    let b = associated_vector_field(&state0, &samples.sigma_hat[1], opts)?;

    match method {
        DerivativeMethod::ChristoffelCorrected => {
            let mut out = (&samples.sigma_hat[2] - &samples.sigma_hat[0]).scaled(0.5 / delta);
            out.axpy(1.0, &christoffel(&state0, &a, &b)?);
            Ok(out)
        }
        DerivativeMethod::AdvectedPrimitive => {
            let state_m = SymplecticState::new(samples.rho[0].clone())?;
            let state_p = SymplecticState::new(samples.rho[2].clone())?;
            let warm = Some(&b.gauge);
            let y_m = associated_vector_field_with_guess(
                &state_m,
                &samples.sigma_hat[0],
                opts,
                warm,
            )?;
            let y_p = associated_vector_field_with_guess(
                &state_p,
                &samples.sigma_hat[2],
                opts,
                warm,
            )?;
            let mut adv = (&y_p.x - &y_m.x).scaled(0.5 / delta);
            adv.axpy(1.0, &covariant_derivative(&a.x, &b.x));
            Ok(exterior_d(&interior(&adv, state0.rho())?)?.scaled(-1.0))
        }
    }
}

/// Density (single component) of d beta for a 3-form beta.
fn density_of_d(beta: &KForm) -> KForm {
    let d = exterior_d(beta).expect("degree 3");
    let mut out = KForm::zeros(beta.grid(), 0);
    out.comp_mut(0).copy_from_slice(d.comp(0));
    out
}

/// Pairing of a 3-form against the four constant 1-forms:
/// v_mu = int dx^mu ^ beta.
fn pairing_vector(beta: &KForm) -> [f64; 4] {
    let np = beta.grid().points() as f64;
    let mut out = [0.0; 4];
    let mut basis = [0.0; 4];
    let mut prod = [0.0; 1];
    for (mu, o) in out.iter_mut().enumerate() {
        basis.fill(0.0);
        basis[mu] = 1.0;
        // dx^mu ^ dx^J is nonzero for exactly one 3-form component
        for c in 0..4 {
            let mut unit = [0.0; 4];
            unit[c] = 1.0;
            crate::fields4::wedge_point(1, 3, &basis, &unit, &mut prod);
            if prod[0] != 0.0 {
                *o += prod[0] * par::sum(beta.comp(c)) / np;
            }
        }
    }
    out
}

struct GaugeVec {
    f: KForm,
    h: [f64; 4],
}

impl GaugeVec {
    fn axpy(&mut self, s: f64, other: &GaugeVec) {
        self.f.axpy(s, &other.f);
        for c in 0..4 {
            self.h[c] += s * other.h[c];
        }
    }

    fn dot(&self, other: &GaugeVec) -> f64 {
        let np = self.f.grid().points() as f64;
        par::dot(self.f.data(), other.f.data()) / np
            + self
                .h
                .iter()
                .zip(&other.h)
                .map(|(a, b)| a * b)
                .sum::<f64>()
    }
}

/// T(f, h) = (-density(d *^rho (df + h)), pairing(*^rho (df + h))).
/// Symmetric positive definite on mean-zero f plus constants.
fn apply_operator(state: &SymplecticState, v: &GaugeVec) -> GaugeVec {
    let grid = state.grid();
    let mut alpha = grad_0form(&v.f);
    for c in 0..4 {
        if v.h[c] != 0.0 {
            alpha.axpy(v.h[c], &basis_one_form(grid, c));
        }
    }
    let beta = state.star_rho_1(&alpha);
    GaugeVec {
        f: density_of_d(&beta).scaled(-1.0),
        h: pairing_vector(&beta),
    }
}

fn apply_preconditioner(v: &GaugeVec, pc: Preconditioner) -> GaugeVec {
    match pc {
        Preconditioner::None => GaugeVec {
            f: v.f.clone(),
            h: v.h,
        },
        Preconditioner::BackgroundLaplacian => GaugeVec {
            // leading term of the f block is minus the background Laplacian
            f: spectral_hodge::inv_hodge_laplacian(&v.f),
            h: v.h,
        },
    }
}

fn pcg(
    state: &SymplecticState,
    b: GaugeVec,
    x0: GaugeVec,
    opts: &SolverOptions,
    scale: f64,
) -> Result<(GaugeVec, usize, f64)> {
    // round-off floor: a right-hand side this small means the ungauged
    // primitive already satisfies both side conditions
    let floor = 1e-13 * scale.max(f64::MIN_POSITIVE);
    // convergence is judged on the plain residual norm, which controls the
    // reported gauge residuals directly; the preconditioned norm only steers
    // the search directions
    let b_norm = b.dot(&b).max(0.0).sqrt();
    if b_norm <= floor {
        return Ok((
            GaugeVec {
                f: KForm::zeros(state.grid(), 0),
                h: [0.0; 4],
            },
            0,
            0.0,
        ));
    }
    let target = (opts.rel_tol * b_norm).max(floor);

    let mut x = x0;
    let mut r = b;
    r.axpy(-1.0, &apply_operator(state, &x));
    let mut z = apply_preconditioner(&r, opts.preconditioner);
    let mut rz = r.dot(&z);
    let mut rel = r.dot(&r).max(0.0).sqrt() / b_norm;
    if rel * b_norm <= target {
        return Ok((x, 0, rel));
    }
    let mut p = GaugeVec {
        f: z.f.clone(),
        h: z.h,
    };

    for iter in 1..=opts.max_iter {
        let ap = apply_operator(state, &p);
        let pap = p.dot(&ap);
        if pap <= 0.0 {
            return Err(Error::SolverDiverged {
                iterations: iter,
                residual: rel,
            });
        }
        let alpha = rz / pap;
        x.axpy(alpha, &p);
        r.axpy(-alpha, &ap);
        z = apply_preconditioner(&r, opts.preconditioner);
        let rz_new = r.dot(&z);
        rel = r.dot(&r).max(0.0).sqrt() / b_norm;
        if rel * b_norm <= target {
            return Ok((x, iter, rel));
        }
        let beta = rz_new / rz;
        let mut p_new = GaugeVec {
            f: z.f.clone(),
            h: z.h,
        };
        p_new.axpy(beta, &p);
        p = p_new;
        rz = rz_new;
    }

    Err(Error::SolverDiverged {
        iterations: opts.max_iter,
        residual: rel,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields4::{omega_std, Grid4, TWO_PI};
    use approx::assert_abs_diff_eq;

    fn grid() -> Grid4 {
        Grid4::new(8).unwrap()
    }

    fn perturbed_state(g: Grid4, amp: f64) -> SymplecticState {
        let mut pot = KForm::zeros(g, 1);
        pot.add_mode(1, [1, 0, 0, 0], amp, 0.0);
        pot.add_mode(2, [0, 1, 0, 0], 0.7 * amp, 0.9);
        pot.add_mode(0, [0, 0, 1, 1], 0.4 * amp, 0.3);
        let mut rho = omega_std(g);
        rho.axpy(1.0, &exterior_d(&pot).unwrap());
        SymplecticState::new(rho).unwrap()
    }

    fn exact_form(g: Grid4, seedish: usize, amp: f64) -> KForm {
        let mut pot = KForm::zeros(g, 1);
        pot.add_mode(seedish % 4, [1, 0, 0, 0], amp, 0.2 * seedish as f64);
        pot.add_mode((seedish + 1) % 4, [0, 1, 0, -1], 0.8 * amp, 0.5);
        pot.add_mode((seedish + 2) % 4, [0, 0, 1, 0], 0.6 * amp, 1.0);
        exterior_d(&pot).unwrap()
    }

    #[test]
    fn closed_form_solution_at_omega_std() {
        let g = grid();
        let state = SymplecticState::new(omega_std(g)).unwrap();
        let mut rhohat = KForm::zeros(g, 2);
        rhohat.add_mode(0, [1, 0, 0, 0], TWO_PI, std::f64::consts::FRAC_PI_2); // 2 pi cos(2 pi x1) dx1^dx2
        let opts = SolverOptions::default();
        let tv = associated_vector_field(&state, &rhohat, &opts).unwrap();

        let expected_x = VectorField::from_fn(g, |p, c| {
            if c == 0 {
                -(TWO_PI * p[0]).sin()
            } else {
                0.0
            }
        });
        assert!((&tv.x - &expected_x).linf() <= 1e-10);
        // gauge unknowns vanish for this datum
        assert!(tv.gauge.f.linf() <= 1e-10);
        assert!(par::max_abs(&tv.gauge.h) <= 1e-10);
        assert!(tv.report.max_residual() <= 1e-10);
    }

    #[test]
    fn zero_input_gives_zero() {
        let g = grid();
        let state = perturbed_state(g, 0.04);
        let tv =
            associated_vector_field(&state, &KForm::zeros(g, 2), &SolverOptions::default())
                .unwrap();
        assert_abs_diff_eq!(tv.x.linf(), 0.0);
        assert_abs_diff_eq!(tv.lambda.linf(), 0.0);
        assert_eq!(tv.report.iterations, 0);
    }

    #[test]
    fn rejects_non_exact_input() {
        let g = grid();
        let state = perturbed_state(g, 0.04);
        let harmonic = KForm::constant(g, 2, &[0.3, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(matches!(
            associated_vector_field(&state, &harmonic, &SolverOptions::default()),
            Err(Error::NotExact { .. })
        ));
    }

    #[test]
    fn residuals_after_solve_on_generic_state() {
        let g = grid();
        let state = perturbed_state(g, 0.04);
        let rhohat = exact_form(g, 1, 0.3);
        let tv = associated_vector_field(&state, &rhohat, &SolverOptions::default()).unwrap();
        assert!(
            tv.report.eq_residual <= 1e-9,
            "eq residual {}",
            tv.report.eq_residual
        );
        assert!(
            tv.report.gauge_d_residual <= 1e-9,
            "gauge d residual {}",
            tv.report.gauge_d_residual
        );
        assert!(
            tv.report.gauge_harmonic_residual <= 1e-9,
            "gauge harmonic residual {}",
            tv.report.gauge_harmonic_residual
        );
    }

    #[test]
    fn uniqueness_from_different_initial_guesses() {
        let g = grid();
        let state = perturbed_state(g, 0.04);
        let rhohat = exact_form(g, 2, 0.25);
        let opts = SolverOptions::default();
        let a = associated_vector_field(&state, &rhohat, &opts).unwrap();

        let mut f_guess = KForm::zeros(g, 0);
        f_guess.add_mode(0, [1, 1, 0, 0], 0.4, 0.7);
        let guess = GaugeData {
            f: f_guess,
            h: [0.3, -0.2, 0.1, 0.05],
        };
        let b = associated_vector_field_with_guess(&state, &rhohat, &opts, Some(&guess)).unwrap();
        assert!((&a.x - &b.x).linf() <= 10.0 * opts.rel_tol);
    }

    #[test]
    fn inner_product_symmetry_and_positivity() {
        let g = grid();
        let state = perturbed_state(g, 0.04);
        let opts = SolverOptions::default();
        let a = associated_vector_field(&state, &exact_form(g, 0, 0.3), &opts).unwrap();
        let b = associated_vector_field(&state, &exact_form(g, 3, 0.2), &opts).unwrap();
        let ab = inner(&state, &a, &b).unwrap();
        let ba = inner(&state, &b, &a).unwrap();
        assert!((ab - ba).abs() <= 1e-10 * ab.abs().max(1.0));
        assert!(inner(&state, &a, &a).unwrap() > 0.0);
    }

    #[test]
    fn inner_rejects_foreign_tangent() {
        let g = grid();
        let state1 = perturbed_state(g, 0.04);
        let state2 = perturbed_state(g, 0.045);
        let a = associated_vector_field(&state1, &exact_form(g, 0, 0.2), &SolverOptions::default())
            .unwrap();
        let b = associated_vector_field(&state2, &exact_form(g, 0, 0.2), &SolverOptions::default())
            .unwrap();
        assert!(matches!(
            inner(&state1, &a, &b),
            Err(Error::StateMismatch)
        ));
    }

    #[test]
    fn metric_equals_background_pairing_of_fields() {
        // <-d iota(X) rho, -d iota(Y) rho> = int g(X, Y) dvol_rho
        let g = grid();
        let state = perturbed_state(g, 0.04);
        let opts = SolverOptions::default();
        let a = associated_vector_field(&state, &exact_form(g, 1, 0.25), &opts).unwrap();
        let b = associated_vector_field(&state, &exact_form(g, 2, 0.2), &opts).unwrap();
        let lhs = inner(&state, &a, &b).unwrap();
        let mut gxy = KForm::zeros(g, 0);
        for c in 0..4 {
            par::fma_pointwise(gxy.comp_mut(0), 1.0, a.x.comp(c), b.x.comp(c));
        }
        let rhs = crate::fields4::l2_inner(&gxy, state.u());
        assert!(
            (lhs - rhs).abs() <= 1e-8 * lhs.abs().max(1.0),
            "lhs {lhs} rhs {rhs}"
        );
    }

    #[test]
    fn christoffel_symmetry_and_linearity() {
        let g = grid();
        let state = perturbed_state(g, 0.04);
        let opts = SolverOptions::default();
        let a = associated_vector_field(&state, &exact_form(g, 0, 0.3), &opts).unwrap();
        let b = associated_vector_field(&state, &exact_form(g, 1, 0.22), &opts).unwrap();
        let ab = christoffel(&state, &a, &b).unwrap();
        let ba = christoffel(&state, &b, &a).unwrap();
        assert!((&ab - &ba).linf() <= 1e-10);

        let zero =
            associated_vector_field(&state, &KForm::zeros(g, 2), &opts).unwrap();
        let z = christoffel(&state, &zero, &b).unwrap();
        assert!(z.linf() <= 1e-12);
        // output is exact
        assert!(spectral_hodge::is_exact(&ab, 1e-9).exact);
    }

    #[test]
    fn christoffel_term_by_term_oracle_at_omega_std() {
        // rhohat = 2 pi cos(2 pi x1) dx1^dx2, X = -sin(2 pi x1) d/dx1.
        // Gamma(a, a) = d iota(X) rhohat - d iota(grad_X X) rho
        //            = -8 pi^2 cos(4 pi x1) dx1^dx2.
        let g = grid();
        let state = SymplecticState::new(omega_std(g)).unwrap();
        let mut rhohat = KForm::zeros(g, 2);
        rhohat.add_mode(0, [1, 0, 0, 0], TWO_PI, std::f64::consts::FRAC_PI_2);
        let opts = SolverOptions::default();
        let a = associated_vector_field(&state, &rhohat, &opts).unwrap();
        let got = christoffel(&state, &a, &a).unwrap();

        let expected = KForm::from_fn(g, 2, |p, c| {
            if c == 0 {
                -8.0 * std::f64::consts::PI * std::f64::consts::PI * (2.0 * TWO_PI * p[0]).cos()
            } else {
                0.0
            }
        });
        assert!(
            (&got - &expected).linf() <= 1e-8,
            "christoffel oracle residual {}",
            (&got - &expected).linf()
        );
    }

    #[test]
    fn path_derivative_trivial_cases() {
        let g = grid();
        let state = perturbed_state(g, 0.04);
        let opts = SolverOptions::default();
        let sig = exact_form(g, 1, 0.18);
        let delta = 1e-3;

        // constant path and constant sigma: velocity is zero, so the result is
        // christoffel(0, sigma) = 0
        let samples = PathSamples {
            delta,
            rho: [state.rho().clone(), state.rho().clone(), state.rho().clone()],
            sigma_hat: [sig.clone(), sig.clone(), sig.clone()],
        };
        let a = covariant_derivative_along_path(
            &samples,
            DerivativeMethod::ChristoffelCorrected,
            &opts,
        )
        .unwrap();
        assert!(a.linf() <= 1e-9, "constant path: {}", a.linf());

        // sigma identically zero along a moving path: both methods return zero
        let mut pot = KForm::zeros(g, 1);
        pot.add_mode(1, [1, 0, 0, 0], 0.05, 0.4);
        let bump = exterior_d(&pot).unwrap();
        let mut rho_m = state.rho().clone();
        rho_m.axpy(-delta, &bump);
        let mut rho_p = state.rho().clone();
        rho_p.axpy(delta, &bump);
        let z = KForm::zeros(g, 2);
        let samples = PathSamples {
            delta,
            rho: [rho_m, state.rho().clone(), rho_p],
            sigma_hat: [z.clone(), z.clone(), z.clone()],
        };
        for method in [
            DerivativeMethod::ChristoffelCorrected,
            DerivativeMethod::AdvectedPrimitive,
        ] {
            let out = covariant_derivative_along_path(&samples, method, &opts).unwrap();
            assert!(out.linf() <= 1e-9, "zero sigma path: {}", out.linf());
        }
    }
}
