use dgf4_core::checks::{random_kform, seeded_rng};
use dgf4_core::donaldson_metric::{
    covariant_derivative_along_path, DerivativeMethod, PathSamples, SolverOptions,
};
use dgf4_core::fields4::{exterior_d, omega_std, Grid4, KForm};

fn main() {
    for (n, amp_state, amp_sig) in [(8usize, 0.05, 0.1), (16, 0.05, 0.1), (8, 0.01, 0.02), (16, 0.01, 0.02)] {
        let g = Grid4::new(n).unwrap();
        let mut rng = seeded_rng(4242);
        let alpha: Vec<KForm> = (0..3)
            .map(|i| random_kform(g, 1, &mut rng, 2, if i == 0 { 0.6 * amp_state } else { amp_state }, 1))
            .collect();
        let beta: Vec<KForm> = (0..3).map(|_| random_kform(g, 1, &mut rng, 2, amp_sig, 1)).collect();
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
        let opts = SolverOptions { rel_tol: 1e-12, ..Default::default() };
        for delta in [2e-3, 1e-3] {
            let samples = PathSamples {
                delta,
                rho: [rho_at(-delta), rho_at(0.0), rho_at(delta)],
                sigma_hat: [sig_at(-delta), sig_at(0.0), sig_at(delta)],
            };
            let va = covariant_derivative_along_path(&samples, DerivativeMethod::ChristoffelCorrected, &opts).unwrap();
            let vb = covariant_derivative_along_path(&samples, DerivativeMethod::AdvectedPrimitive, &opts).unwrap();
            println!(
                "n={n} amps=({amp_state},{amp_sig}) delta={delta:.0e}: |A-B|={:.3e}  |A|={:.3e}",
                (&va - &vb).linf(),
                va.linf()
            );
        }
    }
}
