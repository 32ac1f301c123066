use dgf4_core::checks::{random_exact_2form, random_state, seeded_rng};
use dgf4_core::donaldson_metric::{associated_vector_field, inner, norm, SolverOptions};
use dgf4_core::dynamics::{integrate_geodesic, GeodesicState, IntegrationOptions, Termination};
use dgf4_core::energy;
use dgf4_core::fields4::{omega_std, Grid4, KForm, TWO_PI};
use dgf4_core::hyperkahler;
use dgf4_core::rho_geometry::SymplecticState;
use std::time::Instant;

fn main() {
    // geodesic speed drift: floor vs temporal
    for (n, vamp) in [(8usize, 0.1), (8, 0.05), (12, 0.1)] {
        let g = Grid4::new(n).unwrap();
        let mut rhodot = KForm::zeros(g, 2);
        rhodot.add_mode(0, [1, 0, 0, 0], vamp * TWO_PI, std::f64::consts::FRAC_PI_2);
        let initial = GeodesicState { rho: omega_std(g), rhodot, t: 0.0 };
        let opts = SolverOptions::default();
        let int_opts = IntegrationOptions { solver: opts, dealias: false, ..Default::default() };
        let t0 = Instant::now();
        let drift_of = |h: f64| {
            let steps = (1.0 / h).round() as usize;
            let out = integrate_geodesic(&initial, h, steps, &int_opts).unwrap();
            if out.termination != Termination::Completed {
                return f64::NAN;
            }
            let s0 = {
                let state = SymplecticState::new(initial.rho.clone()).unwrap();
                let v = associated_vector_field(&state, &initial.rhodot, &opts).unwrap();
                norm(&state, &v).unwrap()
            };
            out.records.iter().map(|r| (r.speed.unwrap() - s0).abs()).fold(0.0_f64, f64::max)
        };
        let d1 = drift_of(1e-2);
        let d2 = drift_of(5e-3);
        println!("n={n} vamp={vamp}: drift(1e-2)={d1:.3e} drift(5e-3)={d2:.3e} ratio={:.2} [{:.0?}]",
                 d1 / d2, t0.elapsed());
    }

    // hessian symmetry + op-vs-form floor at small amplitude, n=8
    let g = Grid4::new(8).unwrap();
    let opts = SolverOptions::default();
    for amp in [0.01, 0.005] {
        let mut rng = seeded_rng(77);
        let state = random_state(g, &mut rng, amp);
        let rhohat = random_exact_2form(g, &mut rng, 2, 0.3, 1);
        let sigma = random_exact_2form(g, &mut rng, 2, 0.3, 1);
        let a = associated_vector_field(&state, &rhohat, &opts).unwrap();
        let b = associated_vector_field(&state, &sigma, &opts).unwrap();
        let ha = energy::hessian_operator(&state, &a).unwrap();
        let hb = energy::hessian_operator(&state, &b).unwrap();
        let ha_tv = associated_vector_field(&state, &ha, &opts).unwrap();
        let hb_tv = associated_vector_field(&state, &hb, &opts).unwrap();
        let hab = inner(&state, &ha_tv, &b).unwrap();
        let ahb = inner(&state, &a, &hb_tv).unwrap();
        let form = energy::hessian_form(&state, &a).unwrap();
        let paired = inner(&state, &ha_tv, &a).unwrap();
        let hk = hyperkahler::hessian_form_hk(&state, &a).unwrap();
        println!(
            "n=8 amp={amp}: sym rel={:.3e} opform rel={:.3e} hk rel={:.3e}",
            ((hab - ahb) / hab.abs().max(1e-300)).abs(),
            ((paired - form) / form.abs().max(1e-300)).abs(),
            ((hk - form) / form.abs().max(1e-300)).abs()
        );
    }

    // hk gradient crosschecks at tiny amplitude, n=8
    for amp in [3e-4, 1.5e-4] {
        let mut rng = seeded_rng(99);
        let state = random_state(g, &mut rng, amp);
        let xg = energy::x_grad_energy(&state);
        let hk_x = hyperkahler::x_grad_energy_hk(&state);
        let rel_x = (&hk_x - &xg.x).l2_norm() / xg.x.l2_norm().max(1e-300);
        let grad = energy::grad_energy(&state).rhohat;
        let hk_g = hyperkahler::grad_energy_hk(&state);
        let rel_g = (&hk_g - &grad).l2_norm() / grad.l2_norm().max(1e-300);
        println!("n=8 amp={amp}: hk x rel={rel_x:.3e} hk grad rel={rel_g:.3e}");
    }
}
