use dgf4_core::checks::{random_kform, seeded_rng};
use dgf4_core::donaldson_metric::{
    covariant_derivative_along_path, DerivativeMethod, PathSamples, SolverOptions,
};
use dgf4_core::dynamics::{integrate_geodesic, GeodesicState, IntegrationOptions, Termination};
use dgf4_core::fields4::{exterior_d, omega_std, Grid4, KForm, TWO_PI};

fn main() {
    let g = Grid4::new(8).unwrap();

    // time-reversal error order in dt (pure temporal observable)
    let mut rhodot = KForm::zeros(g, 2);
    rhodot.add_mode(0, [1, 0, 0, 0], 0.3 * TWO_PI, std::f64::consts::FRAC_PI_2);
    rhodot.add_mode(3, [0, 1, 0, 0], 0.2 * TWO_PI, 0.4);
    let initial = GeodesicState { rho: omega_std(g), rhodot, t: 0.0 };
    let opts = SolverOptions { rel_tol: 1e-12, ..Default::default() };
    let int_opts = IntegrationOptions { solver: opts, dealias: false, ..Default::default() };
    let span = 0.25;
    let rev = |h: f64| {
        let steps = (span / h).round() as usize;
        let fwd = integrate_geodesic(&initial, h, steps, &int_opts).unwrap();
        assert_eq!(fwd.termination, Termination::Completed);
        let back = integrate_geodesic(&fwd.final_state, -h, steps, &int_opts).unwrap();
        assert_eq!(back.termination, Termination::Completed);
        (&back.final_state.rho - &initial.rho)
            .linf()
            .max((&back.final_state.rhodot - &initial.rhodot).linf())
    };
    let r1 = rev(2e-2);
    let r2 = rev(1e-2);
    println!("reversal(2e-2)={r1:.3e} reversal(1e-2)={r2:.3e} ratio={:.2}", r1 / r2);

    // A/B Richardson on omega_std-centered cubic paths
    let mut rng = seeded_rng(515);
    let alpha: Vec<KForm> = (0..4).map(|i| random_kform(g, 1, &mut rng, 2, if i == 0 { 0.0 } else { 0.08 }, 1)).collect();
    let beta: Vec<KForm> = (0..4).map(|_| random_kform(g, 1, &mut rng, 2, 0.15, 1)).collect();
    let cubic = |c: &[KForm], t: f64| {
        let mut pot = c[0].clone();
        pot.axpy(t, &c[1]);
        pot.axpy(t * t, &c[2]);
        pot.axpy(t * t * t, &c[3]);
        pot
    };
    let rho_at = |t: f64| {
        let mut r = omega_std(g);
        r.axpy(1.0, &exterior_d(&cubic(&alpha, t)).unwrap());
        r
    };
    let sig_at = |t: f64| exterior_d(&cubic(&beta, t)).unwrap();
    let solver = SolverOptions { rel_tol: 1e-12, ..Default::default() };
    let disc = |delta: f64| {
        let samples = PathSamples {
            delta,
            rho: [rho_at(-delta), rho_at(0.0), rho_at(delta)],
            sigma_hat: [sig_at(-delta), sig_at(0.0), sig_at(delta)],
        };
        let va = covariant_derivative_along_path(&samples, DerivativeMethod::ChristoffelCorrected, &solver).unwrap();
        let vb = covariant_derivative_along_path(&samples, DerivativeMethod::AdvectedPrimitive, &solver).unwrap();
        (&va - &vb).linf()
    };
    for delta in [2e-3, 1e-3, 5e-4] {
        println!("centered cubic path: delta={delta:.0e} |A-B|={:.4e}", disc(delta));
    }
    let d1 = disc(1e-3);
    let d2 = disc(5e-4);
    println!("richardson ratio at 1e-3 -> 5e-4: {:.3}", d1 / d2);
}
