//! Time integration on the space of symplectic forms: geodesics of the
//! Donaldson metric and the negative gradient flow of the energy, with
//! conservation and monotonicity diagnostics.
//!
//! Both integrators are classical RK4. Geodesics run at a fixed step; every
//! stage performs a fresh associated-field solve warm-started from the
//! previous stage. The gradient flow needs no elliptic solve and carries an
//! energy-monotonicity guard that halves the step on any increase.

use crate::donaldson_metric::{
    associated_vector_field_with_guess, norm, GaugeData, SolverOptions, TangentVector,
};
use crate::energy;
use crate::error::{Error, Result};
use crate::fields4::{
    covariant_derivative, dealias_23, exterior_d, interior, omega_std, KForm,
};
use crate::rho_geometry::{StateOptions, SymplecticState};
use crate::spectral_hodge::harmonic_part;

/// Position and velocity of a geodesic at one instant.
#[derive(Clone, Debug)]
pub struct GeodesicState {
    pub rho: KForm,
    pub rhodot: KForm,
    pub t: f64,
}

/// Per-step diagnostics shared by both flows.
#[derive(Clone, Copy, Debug)]
pub struct FlowRecord {
    pub step: usize,
    pub t: f64,
    pub energy: f64,
    pub grad_norm: f64,
    pub min_u: f64,
    /// ||rhodot||_rho; None for gradient-flow runs.
    pub speed: Option<f64>,
    pub solver_iters: usize,
    pub max_residual: f64,
}

/// Why a run stopped.
#[derive(Clone, Debug, PartialEq)]
pub enum Termination {
    Completed,
    /// min u dropped to the floor: the trajectory left the space of
    /// positively oriented symplectic forms. Carries the failing step.
    LeftDomain { step: usize },
    /// The monotonicity guard exhausted its retries.
    StepSizeCollapse { step: usize },
}

/// Records plus the final state of a geodesic run.
pub struct GeodesicOutcome {
    pub records: Vec<FlowRecord>,
    pub final_state: GeodesicState,
    pub termination: Termination,
}

/// Records plus the final form of a gradient-flow run.
pub struct FlowOutcome {
    pub records: Vec<FlowRecord>,
    pub final_rho: KForm,
    pub termination: Termination,
    pub rejections: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct IntegrationOptions {
    pub solver: SolverOptions,
    pub state: StateOptions,
    /// 2/3-rule truncation of each stage derivative; keep on for long runs,
    /// off when measuring conservation orders.
    pub dealias: bool,
    /// Gradient flow only: maximum step halvings before giving up.
    pub max_rejects: usize,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        Self {
            solver: SolverOptions::default(),
            state: StateOptions::default(),
            dealias: true,
            max_rejects: 30,
        }
    }
}

/// Right-hand side of the geodesic equation:
/// d iota(X) d iota(X) rho + d iota(grad_X X) rho, X associated to rhodot.
pub fn geodesic_rhs(state: &SymplecticState, velocity: &TangentVector) -> Result<KForm> {
    if velocity.state_token() != state.token() {
        return Err(Error::StateMismatch);
    }
    let x = &velocity.x;
    let inner1 = exterior_d(&interior(x, state.rho())?)?;
    let mut rhs = exterior_d(&interior(x, &inner1)?)?;
    let nabla = covariant_derivative(x, x);
    rhs.axpy(1.0, &exterior_d(&interior(&nabla, state.rho())?)?);
    Ok(rhs)
}

struct StageEval {
    d_rho: KForm,
    d_rhodot: KForm,
    iters: usize,
    residual: f64,
    gauge: GaugeData,
}

fn geodesic_stage(
    rho: &KForm,
    rhodot: &KForm,
    opts: &IntegrationOptions,
    warm: Option<&GaugeData>,
) -> Result<StageEval> {
    let state = SymplecticState::with_options(rho.clone(), opts.state)?;
    let velocity = associated_vector_field_with_guess(&state, rhodot, &opts.solver, warm)?;
    let mut accel = geodesic_rhs(&state, &velocity)?;
    if opts.dealias {
        accel = dealias_23(&accel);
    }
    Ok(StageEval {
        d_rho: rhodot.clone(),
        d_rhodot: accel,
        iters: velocity.report.iterations,
        residual: velocity.report.max_residual(),
        gauge: velocity.gauge,
    })
}

/// RK4 integration of the geodesic equation from `initial`.
///
/// Emits one record per step; stops early with partial output when a stage
/// leaves the admissible set.
pub fn integrate_geodesic(
    initial: &GeodesicState,
    dt: f64,
    steps: usize,
    opts: &IntegrationOptions,
) -> Result<GeodesicOutcome> {
    if !dt.is_finite() || dt == 0.0 {
        return Err(Error::InvalidOption("dt must be nonzero and finite"));
    }
    let mut rho = initial.rho.clone();
    let mut rhodot = initial.rhodot.clone();
    let mut t = initial.t;
    let mut records = Vec::with_capacity(steps);
    let mut warm: Option<GaugeData> = None;

    for step in 1..=steps {
        let staged = (|| -> Result<[StageEval; 4]> {
            let k1 = geodesic_stage(&rho, &rhodot, opts, warm.as_ref())?;
            let (r2, v2) = nudged(&rho, &rhodot, &k1, 0.5 * dt);
            let k2 = geodesic_stage(&r2, &v2, opts, Some(&k1.gauge))?;
            let (r3, v3) = nudged(&rho, &rhodot, &k2, 0.5 * dt);
            let k3 = geodesic_stage(&r3, &v3, opts, Some(&k2.gauge))?;
            let (r4, v4) = nudged(&rho, &rhodot, &k3, dt);
            let k4 = geodesic_stage(&r4, &v4, opts, Some(&k3.gauge))?;
            Ok([k1, k2, k3, k4])
        })();
        let ks = match staged {
            Ok(ks) => ks,
            Err(Error::Degenerate { .. }) => {
                return Ok(GeodesicOutcome {
                    records,
                    final_state: GeodesicState { rho, rhodot, t },
                    termination: Termination::LeftDomain { step },
                })
            }
            Err(e) => return Err(e),
        };

        let mut iters = 0;
        let mut residual = 0.0_f64;
        for k in &ks {
            iters += k.iters;
            residual = residual.max(k.residual);
        }
        let sixth = dt / 6.0;
        for (w, k) in [(1.0, &ks[0]), (2.0, &ks[1]), (2.0, &ks[2]), (1.0, &ks[3])] {
            rho.axpy(w * sixth, &k.d_rho);
            rhodot.axpy(w * sixth, &k.d_rhodot);
        }
        t += dt;

        let state = match SymplecticState::with_options(rho.clone(), opts.state) {
            Ok(s) => s,
            Err(Error::Degenerate { .. }) => {
                return Ok(GeodesicOutcome {
                    records,
                    final_state: GeodesicState { rho, rhodot, t },
                    termination: Termination::LeftDomain { step },
                });
            }
            Err(e) => return Err(e),
        };
        let last_gauge = ks.into_iter().next_back().map(|k| k.gauge);
        let velocity = associated_vector_field_with_guess(
            &state,
            &rhodot,
            &opts.solver,
            last_gauge.as_ref(),
        )?;
        iters += velocity.report.iterations;
        residual = residual.max(velocity.report.max_residual());
        let speed = norm(&state, &velocity)?;
        let report = energy::energy_report(&state);
        records.push(FlowRecord {
            step,
            t,
            energy: report.value,
            grad_norm: report.grad_norm,
            min_u: state.min_u(),
            speed: Some(speed),
            solver_iters: iters,
            max_residual: residual,
        });
        warm = Some(velocity.gauge);
    }

    Ok(GeodesicOutcome {
        records,
        final_state: GeodesicState { rho, rhodot, t },
        termination: Termination::Completed,
    })
}

fn nudged(rho: &KForm, rhodot: &KForm, k: &StageEval, h: f64) -> (KForm, KForm) {
    let mut r = rho.clone();
    r.axpy(h, &k.d_rho);
    let mut v = rhodot.clone();
    v.axpy(h, &k.d_rhodot);
    (r, v)
}

/// Negative-gradient-flow right-hand side d *^rho d Theta (no solve).
fn flow_rhs(rho: &KForm, opts: &IntegrationOptions) -> Result<KForm> {
    let state = SymplecticState::with_options(rho.clone(), opts.state)?;
    let grad = energy::grad_energy(&state);
    let mut rhs = grad.rhohat.scaled(-1.0);
    if opts.dealias {
        rhs = dealias_23(&rhs);
    }
    Ok(rhs)
}

fn try_flow_step(rho: &KForm, dt: f64, opts: &IntegrationOptions) -> Result<KForm> {
    let k1 = flow_rhs(rho, opts)?;
    let mut r2 = rho.clone();
    r2.axpy(0.5 * dt, &k1);
    let k2 = flow_rhs(&r2, opts)?;
    let mut r3 = rho.clone();
    r3.axpy(0.5 * dt, &k2);
    let k3 = flow_rhs(&r3, opts)?;
    let mut r4 = rho.clone();
    r4.axpy(dt, &k3);
    let k4 = flow_rhs(&r4, opts)?;
    let mut out = rho.clone();
    let sixth = dt / 6.0;
    out.axpy(sixth, &k1);
    out.axpy(2.0 * sixth, &k2);
    out.axpy(2.0 * sixth, &k3);
    out.axpy(sixth, &k4);
    Ok(out)
}

/// Explicit negative gradient flow with an energy-monotonicity guard.
///
/// A step is accepted only if the energy does not increase; otherwise the
/// step is halved and retried (the reduced step is kept for the remainder of
/// the run). Emits one record per accepted step.
pub fn gradient_flow(
    initial: &SymplecticState,
    dt: f64,
    steps: usize,
    opts: &IntegrationOptions,
) -> Result<FlowOutcome> {
    if !dt.is_finite() || dt <= 0.0 {
        return Err(Error::InvalidOption("dt must be positive"));
    }
    let mut rho = initial.rho().clone();
    let mut h = dt;
    let mut t = 0.0;
    let mut records = Vec::with_capacity(steps);
    let mut rejections = 0usize;
    let mut current_energy = energy::energy(initial);
    let class = omega_std(initial.grid());

    for step in 1..=steps {
        let mut accepted = false;
        for _ in 0..=opts.max_rejects {
            let candidate = match try_flow_step(&rho, h, opts) {
                Ok(c) => c,
                Err(Error::Degenerate { .. }) => {
                    rejections += 1;
                    h *= 0.5;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let state = match SymplecticState::with_options(candidate.clone(), opts.state) {
                Ok(s) => s,
                Err(Error::Degenerate { .. }) => {
                    rejections += 1;
                    h *= 0.5;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let e_new = energy::energy(&state);
            if e_new > current_energy {
                rejections += 1;
                h *= 0.5;
                continue;
            }

            rho = candidate;
            t += h;
            current_energy = e_new;
            let report = energy::energy_report(&state);
            let mut drift = harmonic_part(&rho);
            drift.axpy(-1.0, &class);
            records.push(FlowRecord {
                step,
                t,
                energy: e_new,
                grad_norm: report.grad_norm,
                min_u: state.min_u(),
                speed: None,
                solver_iters: 0,
                max_residual: drift.linf(),
            });
            accepted = true;
            break;
        }
        if !accepted {
            return Ok(FlowOutcome {
                records,
                final_rho: rho,
                termination: Termination::StepSizeCollapse { step },
                rejections,
            });
        }
    }

    Ok(FlowOutcome {
        records,
        final_rho: rho,
        termination: Termination::Completed,
        rejections,
    })
}
