use dgf4_core::donaldson_metric::{associated_vector_field, inner, SolverOptions};
use dgf4_core::energy;
use dgf4_core::fields4::{exterior_d, omega_std, Grid4, KForm};
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
    for n in [8usize, 16] {
        let g = Grid4::new(n).unwrap();
        for amp in [0.04, 0.02, 0.01, 0.005] {
            let state = state_from_modes(g, amp);
            let rhohat = exact_direction(g, 0, 0.3);
            let opts = SolverOptions::default();
            let a = associated_vector_field(&state, &rhohat, &opts).unwrap();
            let form = energy::hessian_form(&state, &a).unwrap();
            let op = energy::hessian_operator(&state, &a).unwrap();
            let op_tv = associated_vector_field(&state, &op, &opts).unwrap();
            let paired = inner(&state, &op_tv, &a).unwrap();
            let rel = ((paired - form) / form.abs().max(1e-300)).abs();

            let (total, [t1, t2, t3]) = energy::hessian_leading_term_split(&state, &rhohat);
            let mut sum = t1;
            sum.axpy(1.0, &t2);
            sum.axpy(1.0, &t3);
            let split_abs = (&sum - &total).linf();
            let split_rel = split_abs / total.linf().max(1e-300);
            println!(
                "n={n} amp={amp}: form={form:.6e} op-form rel={rel:.3e}  split abs={split_abs:.3e} rel={split_rel:.3e} total_linf={:.3e}",
                total.linf()
            );
        }
    }
}
