//! The flat hyperKahler triple on the 4-torus and the specializations of the
//! energy gradient and Hessian it affords.
//!
//! omega_1 = dx1^dx2 + dx3^dx4, omega_2 = dx1^dx3 + dx4^dx2,
//! omega_3 = dx1^dx4 + dx2^dx3, with complex structures J_i fixed by
//! g = omega_i(., J_i .), which pins the quaternion orientation J_1 J_2 = J_3.
//! Hamiltonian convention: iota(X_K) rho = dK.

use crate::donaldson_metric::TangentVector;
use crate::error::{Error, Result};
use crate::fields4::{
    covariant_derivative, exterior_d, grad_0form, interior, wedge, Grid4, KForm, VectorField,
};
use crate::mat4::{self, Mat4};
use crate::par;
use crate::rho_geometry::{two_form_matrix, SymplecticState};

/// The three parallel self-dual symplectic forms and complex structures.
pub struct HKStructure {
    grid: Grid4,
    omega: [KForm; 3],
    omega_comps: [[f64; 6]; 3],
    j: [Mat4; 3],
}

/// Component vectors (order 12, 13, 14, 23, 24, 34) of the triple.
pub const OMEGA_COMPS: [[f64; 6]; 3] = [
    [1.0, 0.0, 0.0, 0.0, 0.0, 1.0],
    [0.0, 1.0, 0.0, 0.0, -1.0, 0.0],
    [0.0, 0.0, 1.0, 1.0, 0.0, 0.0],
];

impl HKStructure {
    pub fn new(grid: Grid4) -> Self {
        let omega = [
            KForm::constant(grid, 2, &OMEGA_COMPS[0]),
            KForm::constant(grid, 2, &OMEGA_COMPS[1]),
            KForm::constant(grid, 2, &OMEGA_COMPS[2]),
        ];
        // g = omega_i(., J_i .) forces J_i = Omega_i^{-1} = -Omega_i
        let j = [
            neg(two_form_matrix(&OMEGA_COMPS[0])),
            neg(two_form_matrix(&OMEGA_COMPS[1])),
            neg(two_form_matrix(&OMEGA_COMPS[2])),
        ];
        Self {
            grid,
            omega,
            omega_comps: OMEGA_COMPS,
            j,
        }
    }

    pub fn grid(&self) -> Grid4 {
        self.grid
    }

    pub fn omega(&self, i: usize) -> &KForm {
        &self.omega[i]
    }

    pub fn j_matrix(&self, i: usize) -> &Mat4 {
        &self.j[i]
    }

    /// Apply the constant complex structure J_i to a vector field.
    pub fn apply_j(&self, i: usize, v: &VectorField) -> VectorField {
        apply_const_mat(&self.j[i], v)
    }

    /// omega_i(X, Y) as a scalar field.
    pub fn omega_pairing(&self, i: usize, x: &VectorField, y: &VectorField) -> KForm {
        let om = two_form_matrix(&self.omega_comps[i]);
        let np = self.grid.points();
        let mut out = KForm::zeros(self.grid, 0);
        let xd = x.data();
        let yd = y.data();
        par::fill_chunks(out.comp_mut(0), |off, chunk| {
            for (jj, v) in chunk.iter_mut().enumerate() {
                let p = off + jj;
                let xv = [xd[p], xd[np + p], xd[2 * np + p], xd[3 * np + p]];
                let yv = [yd[p], yd[np + p], yd[2 * np + p], yd[3 * np + p]];
                let oy = mat4::matvec(&om, &yv);
                *v = xv[0] * oy[0] + xv[1] * oy[1] + xv[2] * oy[2] + xv[3] * oy[3];
            }
        });
        out
    }
}

fn neg(m: Mat4) -> Mat4 {
    let mut out = m;
    for row in out.iter_mut() {
        for v in row.iter_mut() {
            *v = -*v;
        }
    }
    out
}

fn apply_const_mat(m: &Mat4, v: &VectorField) -> VectorField {
    let np = v.grid().points();
    let mut out = VectorField::zeros(v.grid());
    for c in 0..4 {
        let dst = out.comp_mut(c);
        let row = m[c];
        par::fill_chunks(dst, |off, chunk| {
            for (j, o) in chunk.iter_mut().enumerate() {
                let p = off + j;
                *o = row[0] * v.data()[p]
                    + row[1] * v.data()[np + p]
                    + row[2] * v.data()[2 * np + p]
                    + row[3] * v.data()[3 * np + p];
            }
        });
    }
    out
}

/// Moment-map coordinates K_i = omega_i ^ rho / dvol_rho.
pub fn k_functions(state: &SymplecticState) -> [KForm; 3] {
    let hk = HKStructure::new(state.grid());
    let u = state.u().comp(0);
    std::array::from_fn(|i| {
        let q = wedge(hk.omega(i), state.rho()).expect("2 + 2 = 4");
        let mut out = KForm::zeros(state.grid(), 0);
        let qd = q.comp(0);
        par::fill_chunks(out.comp_mut(0), |off, chunk| {
            for (j, v) in chunk.iter_mut().enumerate() {
                *v = qd[off + j] / u[off + j];
            }
        });
        out
    })
}

/// Hamiltonian vector field of K: the unique X with iota(X) rho = dK.
pub fn hamiltonian_vector_field(state: &SymplecticState, k: &KForm) -> VectorField {
    assert_eq!(k.degree(), 0, "Hamiltonians are 0-forms");
    state.rho_contract(&grad_0form(k))
}

/// Gradient vector field via the hyperKahler identity -sum_i J_i X_{K_i}.
pub fn x_grad_energy_hk(state: &SymplecticState) -> VectorField {
    let hk = HKStructure::new(state.grid());
    let ks = k_functions(state);
    let mut out = VectorField::zeros(state.grid());
    for i in 0..3 {
        let xk = hamiltonian_vector_field(state, &ks[i]);
        out.axpy(-1.0, &hk.apply_j(i, &xk));
    }
    out
}

/// Gradient via the hyperKahler identity d sum_i (dK_i compose J_i^rho),
/// where rho(J_i^rho ., .) = rho(., J_i .).
pub fn grad_energy_hk(state: &SymplecticState) -> KForm {
    let hk = HKStructure::new(state.grid());
    let ks = k_functions(state);
    let grid = state.grid();
    let np = grid.points();
    let inv_t = state.rho_inv_t();

    let mut eta = KForm::zeros(grid, 1);
    for i in 0..3 {
        let dk = grad_0form(&ks[i]);
        let j_t = mat4::transpose(hk.j_matrix(i));
        // (dK o J^rho)_nu = sum_mu dK_mu (J^rho)[mu][nu],
        // J^rho = P^{-1} J^T P with P the matrix of rho
        for c in 0..4 {
            let dst = eta.comp_mut(c);
            par::fill_chunks(dst, |off, chunk| {
                for (jj, v) in chunk.iter_mut().enumerate() {
                    let p = off + jj;
                    let pmat = two_form_matrix(&state.rho().at(p));
                    let pinv = neg(inv_t[p]); // (P^T)^{-1} = -P^{-1}
                    let jrho = mat4::matmul(&mat4::matmul(&pinv, &j_t), &pmat);
                    let dkv = [
                        dk.data()[p],
                        dk.data()[np + p],
                        dk.data()[2 * np + p],
                        dk.data()[3 * np + p],
                    ];
                    let mut acc = 0.0;
                    for mu in 0..4 {
                        acc += dkv[mu] * jrho[mu][c];
                    }
                    *v += acc;
                }
            });
        }
    }
    exterior_d(&eta).expect("1-form")
}

/// Linearized moment maps Khat_i = omega_i^rho ^ rhohat / dvol_rho with
/// omega_i^rho = omega_i - K_i rho; equals the t-derivative of K_i along
/// rho + t rhohat.
pub fn k_hat(state: &SymplecticState, rhohat: &KForm) -> [KForm; 3] {
    assert_eq!(rhohat.degree(), 2);
    let hk = HKStructure::new(state.grid());
    let ks = k_functions(state);
    let u = state.u().comp(0);
    std::array::from_fn(|i| {
        let mut omega_rho = hk.omega(i).clone();
        omega_rho.axpy(-1.0, &state.rho().scale_pointwise(&ks[i]));
        let q = wedge(&omega_rho, rhohat).expect("2 + 2 = 4");
        let mut out = KForm::zeros(state.grid(), 0);
        let qd = q.comp(0);
        par::fill_chunks(out.comp_mut(0), |off, chunk| {
            for (j, v) in chunk.iter_mut().enumerate() {
                *v = qd[off + j] / u[off + j];
            }
        });
        out
    })
}

/// Integrand fields of the hyperKahler Hessian:
/// Hhat_i = (d iota(X) omega_i) ^ rho / dvol_rho.
pub fn h_hat(state: &SymplecticState, x: &VectorField) -> [KForm; 3] {
    let hk = HKStructure::new(state.grid());
    let u = state.u().comp(0);
    std::array::from_fn(|i| {
        let dix = exterior_d(&interior(x, hk.omega(i)).expect("degree 2")).expect("degree 1");
        let q = wedge(&dix, state.rho()).expect("2 + 2 = 4");
        let mut out = KForm::zeros(state.grid(), 0);
        let qd = q.comp(0);
        par::fill_chunks(out.comp_mut(0), |off, chunk| {
            for (j, v) in chunk.iter_mut().enumerate() {
                *v = qd[off + j] / u[off + j];
            }
        });
        out
    })
}

/// Hessian quadratic form in the hyperKahler presentation:
/// int sum_i (Hhat_i^2 + omega_i(X, grad_{X_{K_i}} X)) dvol_rho.
pub fn hessian_form_hk(state: &SymplecticState, a: &TangentVector) -> Result<f64> {
    if a.state_token() != state.token() {
        return Err(Error::StateMismatch);
    }
    let hk = HKStructure::new(state.grid());
    let ks = k_functions(state);
    let hh = h_hat(state, &a.x);
    let mut integrand = KForm::zeros(state.grid(), 0);
    for i in 0..3 {
        par::fma_pointwise(integrand.comp_mut(0), 1.0, hh[i].comp(0), hh[i].comp(0));
        let xk = hamiltonian_vector_field(state, &ks[i]);
        let transported = covariant_derivative(&xk, &a.x);
        let pairing = hk.omega_pairing(i, &a.x, &transported);
        integrand.axpy(1.0, &pairing);
    }
    Ok(crate::fields4::l2_inner(&integrand, state.u()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::donaldson_metric::{associated_vector_field, SolverOptions};
    use crate::energy;
    use crate::fields4::{
        dvol, integrate, lie_derivative, omega_std, sd_split, star_background, TWO_PI,
    };
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
        SymplecticState::new(rho).expect("valid")
    }

    fn exact_direction(g: Grid4, shift: usize, amp: f64) -> KForm {
        let mut pot = KForm::zeros(g, 1);
        pot.add_mode(shift % 4, [1, 0, 0, 0], amp, 0.1 + shift as f64);
        pot.add_mode((shift + 2) % 4, [0, 1, 1, 0], 0.7 * amp, 0.8);
        exterior_d(&pot).unwrap()
    }

    #[test]
    fn quaternionic_relations() {
        let hk = HKStructure::new(grid());
        for i in 0..3 {
            let j2 = mat4::matmul(hk.j_matrix(i), hk.j_matrix(i));
            for r in 0..4 {
                for c in 0..4 {
                    let expect = if r == c { -1.0 } else { 0.0 };
                    assert_abs_diff_eq!(j2[r][c], expect);
                }
            }
        }
        let j1j2 = mat4::matmul(hk.j_matrix(0), hk.j_matrix(1));
        for r in 0..4 {
            for c in 0..4 {
                assert_abs_diff_eq!(j1j2[r][c], hk.j_matrix(2)[r][c]);
            }
        }
    }

    #[test]
    fn triple_wedge_and_self_duality() {
        let g = grid();
        let hk = HKStructure::new(g);
        for i in 0..3 {
            for j in 0..3 {
                let w = wedge(hk.omega(i), hk.omega(j)).unwrap();
                let expect = if i == j { 2.0 } else { 0.0 };
                assert_abs_diff_eq!(integrate(&w), expect, epsilon = 1e-14);
                assert_abs_diff_eq!(
                    (&w - &dvol(g).scaled(expect)).linf(),
                    0.0,
                    epsilon = 1e-14
                );
            }
            let sw = star_background(hk.omega(i));
            assert_abs_diff_eq!((&sw - hk.omega(i)).linf(), 0.0);
        }
    }

    #[test]
    fn omega_pairing_matches_metric_of_j() {
        // omega_i(., .) = g(J_i ., .), i.e. Omega_i = J_i^T
        let hk = HKStructure::new(grid());
        for i in 0..3 {
            let om = two_form_matrix(&OMEGA_COMPS[i]);
            let jt = mat4::transpose(hk.j_matrix(i));
            for r in 0..4 {
                for c in 0..4 {
                    assert_abs_diff_eq!(om[r][c], jt[r][c]);
                }
            }
        }
    }

    #[test]
    fn triple_spans_self_dual_forms() {
        // w^+ = sum_i <w, omega_i> omega_i / 2 pointwise for any 2-form
        let g = grid();
        let hk = HKStructure::new(g);
        let w = KForm::from_fn(g, 2, |p, c| (TWO_PI * p[(c + 1) % 4]).sin() + 0.2 * c as f64);
        let (plus, _) = sd_split(&w);
        let mut recon = KForm::zeros(g, 2);
        for i in 0..3 {
            let mut coeff = KForm::zeros(g, 0);
            for c in 0..6 {
                par::fma_pointwise(coeff.comp_mut(0), 0.5, w.comp(c), hk.omega(i).comp(c));
            }
            recon.axpy(1.0, &hk.omega(i).scale_pointwise(&coeff));
        }
        assert!((&recon - &plus).linf() <= 1e-13);
    }

    #[test]
    fn k_functions_at_omega_one() {
        let g = grid();
        let state = SymplecticState::new(omega_std(g)).unwrap();
        let ks = k_functions(&state);
        assert_abs_diff_eq!(ks[0].comp(0)[0], 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(ks[1].linf(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(ks[2].linf(), 0.0, epsilon = 1e-14);
        // sum of squares equals 4
        let total: f64 = (0..3).map(|i| ks[i].comp(0)[0].powi(2)).sum();
        assert_abs_diff_eq!(total, 4.0, epsilon = 1e-13);

        // scaling oracle: omega_i ^ (c omega_1) scales as c, dvol_rho as c^2
        let c = 1.6;
        let scaled = SymplecticState::new(omega_std(g).scaled(c)).unwrap();
        let ks = k_functions(&scaled);
        assert_abs_diff_eq!(ks[0].comp(0)[0], 2.0 / c, epsilon = 1e-13);
        assert_abs_diff_eq!(ks[1].linf(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn hamiltonian_field_examples() {
        let g = grid();
        let state = SymplecticState::new(omega_std(g)).unwrap();

        let constant = KForm::constant(g, 0, &[3.0]);
        assert!(hamiltonian_vector_field(&state, &constant).linf() <= 1e-13);

        // K = sin(2 pi x1): iota(X) omega_std = 2 pi cos(2 pi x1) dx1
        // forces X = -2 pi cos(2 pi x1) d/dx2
        let mut k = KForm::zeros(g, 0);
        k.add_mode(0, [1, 0, 0, 0], 1.0, 0.0);
        let x = hamiltonian_vector_field(&state, &k);
        let expected = VectorField::from_fn(g, |p, c| {
            if c == 1 {
                -TWO_PI * (TWO_PI * p[0]).cos()
            } else {
                0.0
            }
        });
        assert!((&x - &expected).linf() <= 1e-11);

        // defining residual and symplectic invariance on a generic state
        let state = perturbed_state(g, 0.05);
        let mut k = KForm::zeros(g, 0);
        k.add_mode(0, [0, 1, 0, 0], 0.8, 0.3);
        k.add_mode(0, [1, 0, 1, 0], 0.5, 1.1);
        let x = hamiltonian_vector_field(&state, &k);
        let mut res = interior(&x, state.rho()).unwrap();
        res.axpy(-1.0, &grad_0form(&k));
        assert!(res.linf() <= 1e-11);
        assert!(lie_derivative(&x, state.rho()).linf() <= 1e-10);
        // d iota(X_K) rho = d dK = 0
        let dix = exterior_d(&interior(&x, state.rho()).unwrap()).unwrap();
        assert!(dix.linf() <= 1e-10);
    }

    #[test]
    fn x_grad_matches_generic_formula() {
        let g = grid();
        // constant rho: all K_i constant, so the field vanishes
        let state = SymplecticState::new(omega_std(g)).unwrap();
        assert!(x_grad_energy_hk(&state).linf() <= 1e-12);

        // n = 16 keeps the aliasing of the two evaluation routes below the
        // 1e-9 agreement target (the defect decays spectrally in n)
        let state = perturbed_state(Grid4::new(16).unwrap(), 0.01);
        let via_hk = x_grad_energy_hk(&state);
        let generic = energy::x_grad_energy(&state).x;
        let scale = generic.l2_norm().max(1e-300);
        let rel = (&via_hk - &generic).l2_norm() / scale;
        assert!(rel <= 1e-9, "relative mismatch {rel}");
    }

    #[test]
    fn grad_matches_generic_formula() {
        let g = grid();
        let state = SymplecticState::new(omega_std(g)).unwrap();
        assert!(grad_energy_hk(&state).linf() <= 1e-12);

        let state = perturbed_state(Grid4::new(16).unwrap(), 0.01);
        let via_hk = grad_energy_hk(&state);
        let generic = energy::grad_energy(&state).rhohat;
        let rel = (&via_hk - &generic).l2_norm() / generic.l2_norm().max(1e-300);
        assert!(rel <= 1e-9, "relative mismatch {rel}");
        // exact by construction
        assert!(crate::spectral_hodge::is_exact(&via_hk, 1e-10).exact);
    }

    #[test]
    fn x_grad_pinned_snapshot() {
        // regression anchor for the convention stack: value pinned from the
        // first verified run at this exact state
        let g = grid();
        let mut pot = KForm::zeros(g, 1);
        pot.add_mode(1, [1, 0, 0, 0], 0.05, 0.0);
        let mut rho = omega_std(g);
        rho.axpy(1.0, &exterior_d(&pot).unwrap());
        let state = SymplecticState::new(rho).unwrap();
        let x = x_grad_energy_hk(&state);
        let norm = x.l2_norm();
        assert_abs_diff_eq!(norm, PINNED_XGRAD_NORM, epsilon = 1e-10);
    }

    // pinned after the hk-vs-generic cross-check first passed
    const PINNED_XGRAD_NORM: f64 = 1.824_686_139_707_316_9;

    #[test]
    fn k_hat_matches_time_derivative_of_k() {
        let g = grid();
        let state = perturbed_state(g, 0.04);
        let rhohat = exact_direction(g, 1, 0.3);
        let khat = k_hat(&state, &rhohat);

        let t = 1e-3;
        let k_at = |t: f64| {
            let mut r = state.rho().clone();
            r.axpy(t, &rhohat);
            k_functions(&SymplecticState::new(r).unwrap())
        };
        let kp = k_at(t);
        let km = k_at(-t);
        let mut max_e1 = 0.0_f64;
        for i in 0..3 {
            let mut diff = kp[i].clone();
            diff.axpy(-1.0, &km[i]);
            let fd = diff.scaled(0.5 / t);
            max_e1 = max_e1.max((&fd - &khat[i]).linf());
        }
        let kp2 = k_at(t / 2.0);
        let km2 = k_at(-t / 2.0);
        let mut max_e2 = 0.0_f64;
        for i in 0..3 {
            let mut diff = kp2[i].clone();
            diff.axpy(-1.0, &km2[i]);
            let fd = diff.scaled(1.0 / t);
            max_e2 = max_e2.max((&fd - &khat[i]).linf());
        }
        assert!(max_e1 <= 1e-4, "FD error {max_e1}");
        let ratio = max_e1 / max_e2.max(1e-300);
        assert!(
            (2.5..6.0).contains(&ratio),
            "Richardson ratio {ratio} ({max_e1:.3e} vs {max_e2:.3e})"
        );
    }

    #[test]
    fn theta_hat_pairing_identity() {
        // int Thetahat ^ rhohat = int sum_i (Khat_i^2 dvol_rho - K_i^2 rhohat^rhohat / 2)
        let g = grid();
        let state = perturbed_state(g, 0.05);
        let rhohat = exact_direction(g, 0, 0.35);
        let lhs = integrate(
            &wedge(&energy::theta_hat(&state, &rhohat), &rhohat).unwrap(),
        );

        let ks = k_functions(&state);
        let khat = k_hat(&state, &rhohat);
        let rr = wedge(&rhohat, &rhohat).unwrap();
        let mut integrand = KForm::zeros(g, 0);
        for i in 0..3 {
            // Khat_i^2 u
            let mut sq = KForm::zeros(g, 0);
            par::fma_pointwise(sq.comp_mut(0), 1.0, khat[i].comp(0), khat[i].comp(0));
            integrand.axpy(1.0, &sq.scale_pointwise(state.u()));
            // - K_i^2 (rhohat ^ rhohat density) / 2
            let mut ksq = KForm::zeros(g, 0);
            par::fma_pointwise(ksq.comp_mut(0), 1.0, ks[i].comp(0), ks[i].comp(0));
            let mut term = KForm::zeros(g, 0);
            par::fma_pointwise(term.comp_mut(0), -0.5, ksq.comp(0), rr.comp(0));
            integrand.axpy(1.0, &term);
        }
        let rhs = par::sum(integrand.comp(0)) / g.points() as f64;
        assert!(
            (lhs - rhs).abs() <= 1e-9,
            "pairing identity residual {}",
            (lhs - rhs).abs()
        );
    }

    #[test]
    fn hessian_form_hk_matches_generic() {
        let g = grid();
        let state = perturbed_state(g, 0.02);
        let rhohat = exact_direction(g, 2, 0.3);
        let opts = SolverOptions::default();
        let a = associated_vector_field(&state, &rhohat, &opts).unwrap();

        let generic = energy::hessian_form(&state, &a).unwrap();
        let hk = hessian_form_hk(&state, &a).unwrap();
        let rel = ((hk - generic) / generic.abs().max(1e-300)).abs();
        assert!(rel <= 1e-6, "hk {hk} vs generic {generic}, rel {rel}");
    }

    #[test]
    fn hessian_form_hk_trivial_and_flat_cases() {
        let g = grid();
        let flat = SymplecticState::new(omega_std(g)).unwrap();
        let opts = SolverOptions::default();
        let zero = associated_vector_field(&flat, &KForm::zeros(g, 2), &opts).unwrap();
        assert_abs_diff_eq!(hessian_form_hk(&flat, &zero).unwrap(), 0.0);

        let rhohat = exact_direction(g, 1, 0.3);
        let a = associated_vector_field(&flat, &rhohat, &opts).unwrap();
        let (_, minus) = sd_split(&rhohat);
        let expected = 2.0 * crate::fields4::l2_inner(&minus, &minus);
        let got = hessian_form_hk(&flat, &a).unwrap();
        let rel = ((got - expected) / expected).abs();
        assert!(rel <= 1e-8, "relative error {rel}");
    }
}
