//! The energy functional on symplectic forms, its Theta-forms, gradient,
//! gradient vector field, Hessian operator and Hessian quadratic form.
//!
//! E(rho) = int |rho^+|^2 / u dvol, using the pointwise identity
//! |rho^+|^2 - |rho^-|^2 = 2u. The gradient with respect to the Donaldson
//! metric is -d *^rho d Theta with Theta = *(rho/u) - |rho/u|^2 rho / 2
//! (background star and norm); its associated vector field needs no elliptic
//! solve. Wherever a formula applies *^rho to a 3-form, the genuine Hodge
//! star is minus the pointwise inverse stored by the state (that inverse
//! composes with the 1-form star to +id, while a Riemannian star in four
//! dimensions squares to -id on odd degrees).

use crate::donaldson_metric::{tangent_from_primitive, TangentVector};
use crate::error::{Error, Result};
use crate::fields4::{
    covariant_derivative, exterior_d, grad_0form, integrate, interior, norm_sq_pointwise,
    sd_split, star_background, wedge, KForm, VectorField,
};
use crate::par;
use crate::rho_geometry::SymplecticState;

/// Energy value together with the gradient data at a state.
#[derive(Clone, Debug)]
pub struct EnergyReport {
    pub value: f64,
    pub theta: KForm,
    pub grad: KForm,
    pub x_grad: VectorField,
    pub grad_norm: f64,
}

/// Hessian data for one tangent direction.
#[derive(Clone, Debug)]
pub struct HessianReport {
    pub operator_value: KForm,
    pub form_value: f64,
    pub theta_hat: KForm,
}

/// The vector field of the gradient with the residuals of its two defining
/// equations: iota(X) rho = *^rho d Theta and d Theta = rho ^ g(X, .).
#[derive(Clone, Debug)]
pub struct XGradEnergy {
    pub x: VectorField,
    pub star_residual: f64,
    pub wedge_residual: f64,
}

/// E(rho) = int |rho^+|^2 / u dvol >= 2, with equality iff rho is self-dual.
pub fn energy(state: &SymplecticState) -> f64 {
    let (plus, _) = sd_split(state.rho());
    let nsq = norm_sq_pointwise(&plus);
    let u = state.u().comp(0);
    let n = nsq.comp(0);
    let partial: Vec<f64> = (0..n.len()).map(|p| n[p] / u[p]).collect();
    par::sum(&partial) / state.grid().points() as f64
}

/// Theta = *(rho/u) - |rho/u|^2 rho / 2, pointwise in rho.
pub fn theta(state: &SymplecticState) -> KForm {
    let inv_u = reciprocal(state.u());
    let rho_u = state.rho().scale_pointwise(&inv_u);
    let mut out = star_background(&rho_u);
    let half_nsq = norm_sq_pointwise(&rho_u).scaled(0.5);
    out.axpy(-1.0, &state.rho().scale_pointwise(&half_nsq));
    out
}

/// Linearization of Theta in the direction rhohat:
/// (rhohat + *^rho rhohat)/u - |rho^+/u|^2 rhohat.
pub fn theta_hat(state: &SymplecticState, rhohat: &KForm) -> KForm {
    assert_eq!(rhohat.degree(), 2, "theta_hat expects a 2-form");
    let inv_u = reciprocal(state.u());
    let mut s = rhohat.clone();
    s.axpy(1.0, &state.star_rho_2(rhohat));
    let mut out = s.scale_pointwise(&inv_u);
    out.axpy(-1.0, &rhohat.scale_pointwise(&plus_norm_over_u_sq(state)));
    out
}

/// Gradient of the energy: -d *^rho d Theta, packaged with its gauge-fixed
/// primitive and associated vector field (no elliptic solve is needed).
pub fn grad_energy(state: &SymplecticState) -> TangentVector {
    let dtheta = exterior_d(&theta(state)).expect("Theta is a 2-form");
    // lambda = -(*^rho d Theta) with the genuine 3-form star = -star_rho_3
    let lambda = state.star_rho_3(&dtheta);
    let grad = exterior_d(&lambda).expect("lambda is a 1-form");
    tangent_from_primitive(state, grad, lambda)
}

/// Associated vector field of the gradient via iota(X) rho = *^rho d Theta,
/// solved pointwise; both defining residuals are reported.
pub fn x_grad_energy(state: &SymplecticState) -> XGradEnergy {
    let dtheta = exterior_d(&theta(state)).expect("Theta is a 2-form");
    let star_dtheta = state.star_rho_3(&dtheta).scaled(-1.0);
    let x = state.rho_contract(&star_dtheta);

    let mut r1 = interior(&x, state.rho()).expect("degree 2");
    r1.axpy(-1.0, &star_dtheta);
    let mut r2 = wedge(state.rho(), &x.flat()).expect("2 + 1 = 3");
    r2.axpy(-1.0, &dtheta);
    XGradEnergy {
        x,
        star_residual: r1.linf(),
        wedge_residual: r2.linf(),
    }
}

/// Energy, Theta, gradient, gradient field and gradient norm in one pass.
pub fn energy_report(state: &SymplecticState) -> EnergyReport {
    let value = energy(state);
    let th = theta(state);
    let grad = grad_energy(state);
    let grad_norm = crate::donaldson_metric::norm(state, &grad)
        .expect("gradient belongs to this state");
    let xg = x_grad_energy(state);
    EnergyReport {
        value,
        theta: th,
        grad: grad.rhohat,
        x_grad: xg.x,
        grad_norm,
    }
}

/// Hessian operator applied to a solved tangent vector:
/// -d *^rho d Thetahat + d *^rho (rhohat ^ g(X_grad, .)) - d iota(grad_X X_grad) rho.
pub fn hessian_operator(state: &SymplecticState, a: &TangentVector) -> Result<KForm> {
    if a.state_token() != state.token() {
        return Err(Error::StateMismatch);
    }
    let th_hat = theta_hat(state, &a.rhohat);
    let d_th_hat = exterior_d(&th_hat)?;
    // -d *^rho (3-form) = +d star_rho_3
    let mut out = exterior_d(&state.star_rho_3(&d_th_hat))?;

    let xg = x_grad_energy(state).x;
    let pairing = wedge(&a.rhohat, &xg.flat())?;
    // +d *^rho (3-form) = -d star_rho_3
    out.axpy(-1.0, &exterior_d(&state.star_rho_3(&pairing))?);

    let transport = covariant_derivative(&a.x, &xg);
    out.axpy(-1.0, &exterior_d(&interior(&transport, state.rho())?)?);
    Ok(out)
}

/// Hessian quadratic form:
/// int Thetahat ^ rhohat + int (iota(X) rhohat - iota(grad_X X) rho) ^ *^rho iota(X_grad) rho.
pub fn hessian_form(state: &SymplecticState, a: &TangentVector) -> Result<f64> {
    if a.state_token() != state.token() {
        return Err(Error::StateMismatch);
    }
    let th_hat = theta_hat(state, &a.rhohat);
    let first = integrate(&wedge(&th_hat, &a.rhohat)?);

    let xg = x_grad_energy(state).x;
    let weight = state.star_rho_1(&interior(&xg, state.rho())?);
    let mut pair = interior(&a.x, &a.rhohat)?;
    let nabla_xx = covariant_derivative(&a.x, &a.x);
    pair.axpy(-1.0, &interior(&nabla_xx, state.rho())?);
    let second = integrate(&wedge(&pair, &weight)?);
    Ok(first + second)
}

pub fn hessian_report(state: &SymplecticState, a: &TangentVector) -> Result<HessianReport> {
    Ok(HessianReport {
        operator_value: hessian_operator(state, a)?,
        form_value: hessian_form(state, a)?,
        theta_hat: theta_hat(state, &a.rhohat),
    })
}

/// Split of the leading Hessian term -d *^rho d Thetahat into the three terms
/// of its product-rule expansion (valid for closed rhohat):
/// -d *^rho (ds/u) + d *^rho ((du/u^2) ^ s) + d *^rho (d|rho^+/u|^2 ^ rhohat),
/// where s = rhohat + *^rho rhohat. Returns (direct evaluation, [t1, t2, t3]).
pub fn hessian_leading_term_split(
    state: &SymplecticState,
    rhohat: &KForm,
) -> (KForm, [KForm; 3]) {
    let th_hat = theta_hat(state, rhohat);
    let total = exterior_d(&state.star_rho_3(&exterior_d(&th_hat).expect("2-form")))
        .expect("1-form");

    let inv_u = reciprocal(state.u());
    let mut s = rhohat.clone();
    s.axpy(1.0, &state.star_rho_2(rhohat));

    let ds_over_u = exterior_d(&s).expect("2-form").scale_pointwise(&inv_u);
    let t1 = exterior_d(&state.star_rho_3(&ds_over_u)).expect("1-form");

    let inv_u_sq = inv_u.scale_pointwise(&inv_u);
    let du_u2 = grad_0form(state.u()).scale_pointwise(&inv_u_sq);
    let t2 = exterior_d(&state.star_rho_3(&wedge(&du_u2, &s).expect("1 + 2 = 3")))
        .expect("1-form")
        .scaled(-1.0);

    let dq = grad_0form(&plus_norm_over_u_sq(state));
    let t3 = exterior_d(&state.star_rho_3(&wedge(&dq, rhohat).expect("1 + 2 = 3")))
        .expect("1-form")
        .scaled(-1.0);

    (total, [t1, t2, t3])
}

/// |rho^+ / u|^2 as a scalar field.
fn plus_norm_over_u_sq(state: &SymplecticState) -> KForm {
    let (plus, _) = sd_split(state.rho());
    let nsq = norm_sq_pointwise(&plus);
    let inv_u = reciprocal(state.u());
    nsq.scale_pointwise(&inv_u).scale_pointwise(&inv_u)
}

fn reciprocal(f: &KForm) -> KForm {
    assert_eq!(f.degree(), 0);
    let mut out = KForm::zeros(f.grid(), 0);
    let src = f.comp(0);
    par::fill_chunks(out.comp_mut(0), |off, chunk| {
        for (j, v) in chunk.iter_mut().enumerate() {
            *v = 1.0 / src[off + j];
        }
    });
    out
}
