//! Norm ordering, Dirichlet unitarity, error monotonicity under step
//! halving, per-step u/v agreement and energy drift orders.

use std::f64::consts::PI;
use std::sync::Arc;

use gpsplit_core::integrators::{DiagnosticsSpec, FormKind};
use gpsplit_core::ops::norm;
use gpsplit_core::{
    energy_gl, error_norm, evolve, fit_order, flow_a, make_grid, soliton_solution, uv_equivalence_check, Background,
    BoundaryKind, Complex64, Field, FlowState, Grid, LinearPropagator, NormKind, PhysParams, Potential, Scheme,
    SchemeConfig,
};
use proptest::prelude::*;

fn dirichlet(l: f64, n: usize) -> Arc<Grid> {
    Arc::new(make_grid(1, l, n, BoundaryKind::Dirichlet).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn x2_dominates_its_parts(
        m in prop::collection::vec((-4i32..=4, -4i32..=4, -1.0f64..1.0, -1.0f64..1.0), 1..6),
    ) {
        let g = Arc::new(make_grid(2, 2.0, 16, BoundaryKind::Periodic).unwrap());
        let f = Field::from_fn(g, |x, y| {
            m.iter().fold(Complex64::new(0.0, 0.0), |z, &(p, q, re, im)| {
                z + Complex64::new(re, im) * Complex64::from_polar(1.0, PI * (p as f64 * x + q as f64 * y) / 2.0)
            })
        });
        let x2 = norm(&f, NormKind::X2, None).unwrap();
        for kind in [NormKind::Linf, NormKind::H1, NormKind::H2] {
            prop_assert!(x2 >= norm(&f, kind, None).unwrap());
        }
    }

    #[test]
    fn dirichlet_free_flow_preserves_sine_part(
        amps in prop::collection::vec((-0.5f64..0.5, -0.5f64..0.5), 1..5),
        tau in 0.0f64..1.0,
        c in -1.2f64..1.2,
    ) {
        let g = dirichlet(10.0, 127);
        let bg = Background::dark_soliton(c).unwrap();
        let p = PhysParams::default();
        let mut prop = LinearPropagator::new(g.clone(), &p, Some(bg.limits())).unwrap();
        let ramp = prop.ramp().to_vec();
        let u = Field::from_fn(g.clone(), |x, _| {
            let mut z = bg.limits().ramp(x, 10.0);
            for (k, &(re, im)) in amps.iter().enumerate() {
                z += Complex64::new(re, im) * ((k + 1) as f64 * PI * (x + 10.0) / 20.0).sin();
            }
            z
        });
        let sine_norm = |f: &Field| -> f64 {
            let s: f64 = f.values().iter().zip(&ramp).map(|(a, r)| (a - r).norm_sqr()).sum();
            (s * g.spacing()).sqrt()
        };
        let before = sine_norm(&u);
        let mut s = FlowState::u_form(u, 0.0);
        flow_a(&mut s, tau, &mut prop).unwrap();
        let after = sine_norm(s.primary());
        prop_assert!((after - before).abs() <= 1e-12 * before.max(1.0));
    }
}

#[test]
fn soliton_error_decreases_when_step_halves() {
    let c = 1.3;
    let g = dirichlet(60.0, 511);
    let bg = Background::dark_soliton(c).unwrap();
    let phi = soliton_solution(c, 0.0, &g).unwrap();
    let p = PhysParams::default();
    let exact = soliton_solution(c, 0.4, &g).unwrap();
    for scheme in [Scheme::Lie, Scheme::Strang] {
        let mut prop = LinearPropagator::new(g.clone(), &p, Some(bg.limits())).unwrap();
        let errors: Vec<f64> = [4e-2, 2e-2, 1e-2, 5e-3]
            .iter()
            .map(|&tau| {
                let mut cfg = SchemeConfig::new(scheme, tau, 0.4);
                cfg.cadence = usize::MAX;
                let traj = evolve(
                    FlowState::u_form(phi.clone(), 0.0),
                    &cfg,
                    &mut prop,
                    &Potential::Zero,
                    &p,
                    &mut DiagnosticsSpec { skip_norms: true, ..Default::default() },
                    None,
                )
                .unwrap();
                error_norm(&traj.final_state.physical(), &exact, NormKind::X2).unwrap()
            })
            .collect();
        assert!(errors.windows(2).all(|w| w[1] < w[0]), "{scheme:?}: {errors:?}");
    }
}

#[test]
fn u_and_v_forms_agree_at_every_recorded_step() {
    let c = 0.8;
    let g = dirichlet(40.0, 511);
    let bg = Background::dark_soliton(c).unwrap();
    let phi = gpsplit_core::eval_background(&bg, &g).unwrap();
    let u0 = Field::from_fn(g.clone(), |x, _| bg.value(x, 0.0) - 0.4 * (-x * x).exp());
    let p = PhysParams::default();
    let mut prop = LinearPropagator::new(g.clone(), &p, Some(bg.limits())).unwrap();
    for scheme in [Scheme::Lie, Scheme::Strang] {
        let record = |form: FormKind, prop: &mut LinearPropagator| {
            let state = match form {
                FormKind::U => FlowState::u_form(u0.clone(), 0.0),
                FormKind::V => FlowState::v_form(u0.sub(&phi).unwrap(), phi.clone(), 0.0).unwrap(),
            };
            let mut cfg = SchemeConfig::new(scheme, 1e-2, 0.5);
            cfg.form = form;
            cfg.cadence = 5;
            let mut states = Vec::new();
            let mut obs = |_: usize, s: &FlowState, _: &gpsplit_core::DiagRow| {
                states.push(s.clone());
                Ok(())
            };
            evolve(state, &cfg, prop, &Potential::Zero, &p, &mut DiagnosticsSpec::default(), Some(&mut obs)).unwrap();
            states
        };
        let su = record(FormKind::U, &mut prop);
        let sv = record(FormKind::V, &mut prop);
        assert_eq!(su.len(), 11);
        assert_eq!(su.len(), sv.len());
        for (a, b) in su.iter().zip(&sv) {
            let gap = uv_equivalence_check(a, b).unwrap();
            assert!(gap <= 1e-11 * a.physical().max_abs(), "{scheme:?} t={}: {gap:e}", a.t);
        }
    }
}

#[test]
fn energy_drift_orders_with_static_potential() {
    let g = Arc::new(make_grid(1, 8.0, 128, BoundaryKind::Periodic).unwrap());
    let p = PhysParams::default();
    let pot = Potential::StaticGaussian { v0: -2.0, gamma: 1.0, center: [0.0, 0.0] };
    let u0 = Field::from_fn(g.clone(), |x, _| Complex64::new(1.0 - 0.3 * (-x * x).exp(), 0.2 * (-(x - 1.0).powi(2)).exp()));
    let e0 = energy_gl(&u0, &pot, 0.0, &p, None);
    let taus = [4e-2, 2e-2, 1e-2, 5e-3];
    for (scheme, order) in [(Scheme::Lie, 1.0), (Scheme::Strang, 2.0)] {
        let mut prop = LinearPropagator::new(g.clone(), &p, None).unwrap();
        let drifts: Vec<f64> = taus
            .iter()
            .map(|&tau| {
                let traj = evolve(
                    FlowState::u_form(u0.clone(), 0.0),
                    &SchemeConfig::new(scheme, tau, 1.0),
                    &mut prop,
                    &pot,
                    &p,
                    &mut DiagnosticsSpec { skip_norms: true, ..Default::default() },
                    None,
                )
                .unwrap();
                traj.rows.iter().map(|r| (r.energy - e0).abs()).fold(0.0, f64::max)
            })
            .collect();
        let slope = fit_order(&taus, &drifts).unwrap();
        assert!(slope >= order - 0.1, "{scheme:?}: slope {slope} from {drifts:?}");
    }
}
