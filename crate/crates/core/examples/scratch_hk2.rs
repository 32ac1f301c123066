use dgf4_core::donaldson_metric::{associated_vector_field, SolverOptions};
use dgf4_core::energy;
use dgf4_core::fields4::{exterior_d, omega_std, Grid4, KForm};
use dgf4_core::hyperkahler;
use dgf4_core::rho_geometry::SymplecticState;

fn state_from_modes(g: Grid4, amp: f64) -> SymplecticState {
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

fn main() {
    let opts = SolverOptions::default();
    for (n, amp) in [(8usize, 0.05), (8, 0.02), (8, 0.01), (16, 0.02)] {
        let g = Grid4::new(n).unwrap();
        let state = state_from_modes(g, amp);
        let rhohat = exact_direction(g, 2, 0.3);
        let a = associated_vector_field(&state, &rhohat, &opts).unwrap();
        let generic = energy::hessian_form(&state, &a).unwrap();
        let hk = hyperkahler::hessian_form_hk(&state, &a).unwrap();
        let rel = ((hk - generic) / generic.abs().max(1e-300)).abs();
        println!(
            "n={n} amp={amp}: generic={generic:.8e} hk={hk:.8e} rel={rel:.3e} iters={}",
            a.report.iterations
        );
    }
    // snapshot state for the pinned test
    let g = Grid4::new(8).unwrap();
    let mut pot = KForm::zeros(g, 1);
    pot.add_mode(1, [1, 0, 0, 0], 0.05, 0.0);
    let mut rho = omega_std(g);
    rho.axpy(1.0, &exterior_d(&pot).unwrap());
    let state = SymplecticState::new(rho).unwrap();
    let x = hyperkahler::x_grad_energy_hk(&state);
    println!("pinned x_grad_hk l2 norm = {:.17e}", x.l2_norm());
    let gen = energy::x_grad_energy(&state).x;
    println!("generic same-state norm  = {:.17e}", gen.l2_norm());
}
