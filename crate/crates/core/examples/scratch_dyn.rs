use dgf4_core::checks::{random_kform, seeded_rng};
use dgf4_core::donaldson_metric::{
    associated_vector_field, covariant_derivative_along_path, norm, DerivativeMethod,
    PathSamples, SolverOptions,
};
use dgf4_core::dynamics::{integrate_geodesic, GeodesicState, IntegrationOptions, Termination};
use dgf4_core::fields4::{exterior_d, omega_std, Grid4, KForm, TWO_PI};
use dgf4_core::rho_geometry::SymplecticState;
use std::time::Instant;

fn main() {
    // connection A/B discrepancy scaling
    let g = Grid4::new(8).unwrap();
    let mut rng = seeded_rng(4242);
    let alpha: Vec<KForm> = (0..3).map(|i| random_kform(g, 1, &mut rng, 2, if i == 0 { 0.03 } else { 0.05 }, 1)).collect();
    let beta: Vec<KForm> = (0..3).map(|_| random_kform(g, 1, &mut rng, 2, 0.1, 1)).collect();
    let rho_at = |t: f64| {
        let mut pot = alpha[0].clone();
        pot.axpy(t, &alpha[1]);
        pot.axpy(t * t, &alpha[2]);
        let mut r = omega_std(g);
        r.axpy(1.0, &exterior_d(&pot).unwrap());
        r
    };
    let sig_at = |t: f64| {
        let mut pot = beta[0].clone();
        pot.axpy(t, &beta[1]);
        pot.axpy(t * t, &beta[2]);
        exterior_d(&pot).unwrap()
    };
    for rel_tol in [1e-10, 1e-12] {
        let opts = SolverOptions { rel_tol, ..Default::default() };
        for delta in [4e-3, 2e-3, 1e-3, 5e-4] {
            let samples = PathSamples {
                delta,
                rho: [rho_at(-delta), rho_at(0.0), rho_at(delta)],
                sigma_hat: [sig_at(-delta), sig_at(0.0), sig_at(delta)],
            };
            let va = covariant_derivative_along_path(&samples, DerivativeMethod::ChristoffelCorrected, &opts).unwrap();
            let vb = covariant_derivative_along_path(&samples, DerivativeMethod::AdvectedPrimitive, &opts).unwrap();
            println!("rel_tol={rel_tol:.0e} delta={delta:.1e}: |A-B| = {:.6e}", (&va - &vb).linf());
        }
    }

    // geodesic speed drift floors
    for (n, vamp, dt, span) in [
        (8usize, 0.3, 1e-2, 1.0),
        (8, 0.1, 1e-2, 1.0),
        (8, 0.05, 1e-2, 1.0),
        (8, 0.1, 2e-2, 1.0),
    ] {
        let g = Grid4::new(n).unwrap();
        let mut rhodot = KForm::zeros(g, 2);
        rhodot.add_mode(0, [1, 0, 0, 0], vamp * TWO_PI, std::f64::consts::FRAC_PI_2);
        let initial = GeodesicState { rho: omega_std(g), rhodot, t: 0.0 };
        let opts = SolverOptions::default();
        let int_opts = IntegrationOptions { solver: opts, dealias: false, ..Default::default() };
        let t0 = Instant::now();
        let drift_of = |h: f64| {
            let steps = (span / h).round() as usize;
            let out = integrate_geodesic(&initial, h, steps, &int_opts).unwrap();
            assert!(matches!(out.termination, Termination::Completed));
            let s0 = {
                let state = SymplecticState::new(initial.rho.clone()).unwrap();
                let v = associated_vector_field(&state, &initial.rhodot, &opts).unwrap();
                norm(&state, &v).unwrap()
            };
            out.records.iter().map(|r| (r.speed.unwrap() - s0).abs()).fold(0.0_f64, f64::max)
        };
        let d1 = drift_of(dt);
        let d2 = drift_of(dt / 2.0);
        println!(
            "n={n} vamp={vamp} dt={dt:.0e}: drift={d1:.3e} half={d2:.3e} ratio={:.2} ({:.1?})",
            d1 / d2.max(1e-300),
            t0.elapsed()
        );
    }
}
