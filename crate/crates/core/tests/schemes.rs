mod common;

use adaptsync_core::coupling::{generate_small_world_weighted, SmallWorldParams};
use adaptsync_core::dynamics::{MonotoneMap, network_drift};
use adaptsync_core::oscillators::chua_field;
use adaptsync_core::{
    AugmentedState, DynamicsMatrix, InnerCoupling, MonotoneCoupling, OscillatorModel, Scheme,
    SchemeConfig, SchemeKind, TimeVaryingCoupling,
};
use common::{scheme_of, tanh_g};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_state(len: usize, spread: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-spread..spread)).collect()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn kronecker_free_terms_match_explicit_products() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let lorenz = OscillatorModel::from_name("lorenz").unwrap();
    for n in 3..=5 {
        let a = generate_small_world_weighted(
            SmallWorldParams { mean_degree: 2, ..SmallWorldParams::new(n) },
            n as u64,
        )
        .unwrap();
        let gamma = vec![1.0, 0.25, 3.0];
        let scheme = Scheme::new(
            SchemeConfig::new(SchemeKind::LinearKnown, DynamicsMatrix::Constant(a.clone()))
                .gamma(InnerCoupling::new(gamma.clone()).unwrap())
                .alpha(0.8),
        )
        .unwrap();
        let big_a = a.entries().kronecker(&DMatrix::from_diagonal(&DVector::from_vec(gamma)));
        let big_xi = DMatrix::from_diagonal(&DVector::from_column_slice(a.xi().as_slice()))
            .kronecker(&DMatrix::<f64>::identity(3, 3));
        for _ in 0..20 {
            let x = random_state(3 * n, 5.0, &mut rng);
            let xv = DVector::from_column_slice(&x);
            let expected = &big_a * &xv;
            let mut got = vec![0.0; 3 * n];
            scheme.coupling_term(&x, 3, 0.0, &mut got).unwrap();
            for k in 0..3 * n {
                assert!(close(got[k], expected[k], 1e-12));
            }
            let rate = -0.4 * xv.dot(&(&big_xi * &big_a * &xv));
            assert!(close(scheme.adaptation_rate(&x, 3, 0.0).unwrap(), rate, 1e-12));

            let d = scheme.augmented_rhs(&lorenz, &AugmentedState { x: x.clone(), c: 1.3 }, 0.0).unwrap();
            let mut drift = vec![0.0; 3 * n];
            network_drift(&lorenz, &x, 0.0, &mut drift).unwrap();
            for k in 0..3 * n {
                assert!(close(d.x[k], drift[k] + 1.3 * expected[k], 1e-12));
            }
        }

        // Asymmetric nonlinear coupling, adapting with B = (A + Aᵀ)/2.
        let g = tanh_g();
        let nl = Scheme::new(
            SchemeConfig::new(SchemeKind::NonlinearKnown, DynamicsMatrix::Constant(a.clone()))
                .nonlinearity(g.clone())
                .allow_asymmetric(true),
        )
        .unwrap();
        let eye = DMatrix::<f64>::identity(3, 3);
        let big_a = a.entries().kronecker(&eye);
        let big_b = ((a.entries() + a.entries().transpose()) * 0.5).kronecker(&eye);
        for _ in 0..20 {
            let x = random_state(3 * n, 5.0, &mut rng);
            let gx = DVector::from_iterator(3 * n, x.iter().map(|v| v + v.tanh()));
            let expected = &big_a * &gx;
            let mut got = vec![0.0; 3 * n];
            nl.coupling_term(&x, 3, 0.0, &mut got).unwrap();
            for k in 0..3 * n {
                assert!(close(got[k], expected[k], 1e-12));
            }
            let rate = -0.5 * DVector::from_column_slice(&x).dot(&(&big_b * &gx));
            assert!(close(nl.adaptation_rate(&x, 3, 0.0).unwrap(), rate, 1e-12));
        }
    }
}

#[test]
fn unknown_matrix_rate_matches_explicit_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let scheme = scheme_of(SchemeKind::LinearUnknown, 5, 4);
    let law = scheme.adaptation_matrix().unwrap().kronecker(&DMatrix::<f64>::identity(3, 3));
    for _ in 0..50 {
        let x = random_state(15, 3.0, &mut rng);
        let xv = DVector::from_column_slice(&x);
        let expected = -0.5 * scheme.alpha() * xv.dot(&(&law * &xv));
        assert!(close(scheme.adaptation_rate(&x, 3, 0.0).unwrap(), expected, 1e-12));
    }
}

#[test]
fn identity_nonlinearity_reduces_to_linear_scheme() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let sym = generate_small_world_weighted(
        SmallWorldParams { symmetric: true, ..SmallWorldParams::new(9) },
        2,
    )
    .unwrap();
    let linear =
        Scheme::new(SchemeConfig::new(SchemeKind::LinearKnown, DynamicsMatrix::Constant(sym.clone())))
            .unwrap();
    let nonlinear = Scheme::new(
        SchemeConfig::new(SchemeKind::NonlinearKnown, DynamicsMatrix::Constant(sym))
            .nonlinearity(MonotoneCoupling::uniform(MonotoneMap::Identity)),
    )
    .unwrap();
    let chen = OscillatorModel::from_name("chen").unwrap();
    for _ in 0..100 {
        let state = AugmentedState { x: random_state(27, 20.0, &mut rng), c: rng.random_range(0.0..10.0) };
        let a = linear.augmented_rhs(&chen, &state, 0.0).unwrap();
        let b = nonlinear.augmented_rhs(&chen, &state, 0.0).unwrap();
        for k in 0..27 {
            assert!(close(a.x[k], b.x[k], 1e-12));
        }
        // ξ = 1/N on a symmetric matrix, and the nonlinear law carries no Ξ.
        assert!(close(b.c, 9.0 * a.c, 1e-12), "{} vs {}", b.c, a.c);
    }
}

#[test]
fn adaptation_rate_is_nonnegative_for_every_kind() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for kind in SchemeKind::ALL {
        let scheme = scheme_of(kind, 10, 5);
        for _ in 0..1000 {
            let x = random_state(30, 25.0, &mut rng);
            let t = rng.random_range(0.0..50.0);
            let rate = scheme.adaptation_rate(&x, 3, t).unwrap();
            assert!(rate >= -1e-12, "{kind}: {rate}");
        }
    }
}

#[test]
fn linear_rates_ignore_common_translation() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let kinds = [
        SchemeKind::LinearKnown,
        SchemeKind::LinearUnknown,
        SchemeKind::LinearTimeVarying,
        SchemeKind::LinearDominated,
    ];
    for kind in kinds {
        let scheme = scheme_of(kind, 8, 6);
        for _ in 0..100 {
            let x = random_state(24, 5.0, &mut rng);
            let v = random_state(3, 100.0, &mut rng);
            let shifted: Vec<f64> = x.iter().enumerate().map(|(k, a)| a + v[k % 3]).collect();
            let t = rng.random_range(0.0..10.0);
            let a = scheme.adaptation_rate(&x, 3, t).unwrap();
            let b = scheme.adaptation_rate(&shifted, 3, t).unwrap();
            assert!(close(a, b, 1e-10), "{kind}: {a} vs {b}");
        }
    }
}

#[test]
fn manifold_is_invariant_for_every_kind() {
    let node = [0.4, -1.2, 7.5];
    let x: Vec<f64> = node.iter().copied().cycle().take(30).collect();
    let lorenz = OscillatorModel::from_name("lorenz").unwrap();
    for kind in SchemeKind::ALL {
        let scheme = scheme_of(kind, 10, 5);
        let mut term = vec![1.0; 30];
        scheme.coupling_term(&x, 3, 2.5, &mut term).unwrap();
        assert!(term.iter().all(|v| *v == 0.0), "{kind}");
        assert_eq!(scheme.adaptation_rate(&x, 3, 2.5).unwrap(), 0.0, "{kind}");
        let d = scheme.augmented_rhs(&lorenz, &AugmentedState::new(x.clone()), 2.5).unwrap();
        let mut drift = vec![0.0; 30];
        network_drift(&lorenz, &x, 2.5, &mut drift).unwrap();
        assert_eq!(d.x, drift);
        assert_eq!(d.c, 0.0);
    }
}

#[test]
fn triad_chua_rhs_matches_hand_assembly() {
    let p = [1.0, 1.0, 2.0];
    let tv = TimeVaryingCoupling::circulant_triad(p).unwrap();
    let scheme = Scheme::new(
        SchemeConfig::new(SchemeKind::LinearTimeVarying, DynamicsMatrix::TimeVarying(tv)).alpha(0.6),
    )
    .unwrap();
    let chua = OscillatorModel::from_name("chua").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let xi = {
        let w: Vec<f64> = p.iter().map(|v| 1.0 / v).collect();
        let s: f64 = w.iter().sum();
        w.into_iter().map(|v| v / s).collect::<Vec<_>>()
    };
    for _ in 0..25 {
        let t: f64 = rng.random_range(0.0..20.0);
        let c = rng.random_range(0.0..3.0);
        let x = random_state(9, 2.0, &mut rng);
        let (s, co) = (t.sin(), t.cos());
        let m = [
            [-5.0 - s - co, 3.0 + s, 2.0 + co],
            [2.0 + co, -5.0 - s - co, 3.0 + s],
            [3.0 + s, 2.0 + co, -5.0 - s - co],
        ];
        let mut expected = [0.0; 9];
        let mut form = 0.0;
        for i in 0..3 {
            let f = chua_field([x[3 * i], x[3 * i + 1], x[3 * i + 2]]);
            for k in 0..3 {
                let coupling: f64 = (0..3).map(|j| p[i] * m[i][j] * x[3 * j + k]).sum();
                expected[3 * i + k] = f[k] + c * coupling;
                form += xi[i] * x[3 * i + k] * coupling;
            }
        }
        let d = scheme.augmented_rhs(&chua, &AugmentedState { x: x.clone(), c }, t).unwrap();
        for k in 0..9 {
            assert!(close(d.x[k], expected[k], 1e-12), "t = {t}, k = {k}");
        }
        assert!(close(d.c, -0.3 * form, 1e-10));
    }
}

#[test]
fn invalid_pairings_are_rejected() {
    let a = generate_small_world_weighted(SmallWorldParams::new(6), 1).unwrap();
    assert!(!a.is_symmetric());
    let nonlinear = SchemeConfig::new(SchemeKind::NonlinearKnown, DynamicsMatrix::Constant(a.clone()))
        .nonlinearity(tanh_g());
    assert!(Scheme::new(nonlinear.clone()).is_err());
    assert!(Scheme::new(nonlinear.allow_asymmetric(true)).is_ok());
    assert!(Scheme::new(SchemeConfig::new(SchemeKind::LinearUnknown, DynamicsMatrix::Constant(a.clone()))).is_err());
    assert!(Scheme::new(
        SchemeConfig::new(SchemeKind::LinearUnknown, DynamicsMatrix::Constant(a.clone())).adaptation(a.clone())
    )
    .is_err());
    let triad = TimeVaryingCoupling::circulant_triad([1.0, 1.0, 1.0]).unwrap();
    assert!(Scheme::new(SchemeConfig::new(SchemeKind::LinearKnown, DynamicsMatrix::TimeVarying(triad))).is_err());
    assert!(Scheme::new(SchemeConfig::new(SchemeKind::LinearKnown, DynamicsMatrix::Constant(a)).alpha(-1.0)).is_err());
}
