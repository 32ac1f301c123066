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

fn main() {
    for n in [8usize, 16] {
        let g = Grid4::new(n).unwrap();
        for amp in [0.05, 0.025, 0.0125] {
            let state = state_from_modes(g, amp);
            let hk_x = hyperkahler::x_grad_energy_hk(&state);
            let gen_x = energy::x_grad_energy(&state).x;
            let rel_x = (&hk_x - &gen_x).l2_norm() / gen_x.l2_norm().max(1e-300);
            let hk_g = hyperkahler::grad_energy_hk(&state);
            let gen_g = energy::grad_energy(&state).rhohat;
            let rel_g = (&hk_g - &gen_g).l2_norm() / gen_g.l2_norm().max(1e-300);
            println!("n={n} amp={amp}: x rel={rel_x:.3e}  grad rel={rel_g:.3e}");
        }
    }
}
