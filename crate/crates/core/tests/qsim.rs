mod common;

use std::f64::consts::FRAC_PI_4;

use netsdp::qsim::{
    bsm, lossy_povm, p22_family, random_bilocal, random_biquantum, random_biquantum_model,
    swap_distribution, LineArities, Operator, SwapConfig,
};
use proptest::prelude::*;

fn stated_config(eta: f64) -> SwapConfig {
    SwapConfig {
        theta_ab: FRAC_PI_4,
        theta_bc: FRAC_PI_4,
        alpha0: FRAC_PI_4,
        alpha1: FRAC_PI_4,
        eta_a: eta,
        eta_c: eta,
    }
}

fn swap_config() -> impl Strategy<Value = SwapConfig> {
    (
        0.0..=FRAC_PI_4,
        0.0..=FRAC_PI_4,
        -3.2..3.2f64,
        -3.2..3.2f64,
        0.0..=1.0f64,
        0.0..=1.0f64,
    )
        .prop_map(
            |(theta_ab, theta_bc, alpha0, alpha1, eta_a, eta_c)| SwapConfig {
                theta_ab,
                theta_bc,
                alpha0,
                alpha1,
                eta_a,
                eta_c,
            },
        )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn swap_matches_dense_oracle(cfg in swap_config()) {
        let p = swap_distribution(&cfg).unwrap();
        prop_assert!(common::max_diff(&p, &common::dense_distribution(&cfg.model())) < 1e-14);
        prop_assert!(p.normalization_error() < 1e-12);
        prop_assert!(p.no_signaling_violation() < 1e-9);
        prop_assert!(p.factorization_violation(&[0], &[2]) <= 1e-10);
    }

    #[test]
    fn povm_completeness(alpha in -4.0..4.0f64, eta in 0.0..=1.0f64, sign in prop_oneof![Just(-1.0), Just(1.0)]) {
        let sum = lossy_povm(alpha, sign, eta).iter().fold(Operator::zeros(2, 2), |a, e| a + e);
        prop_assert!((sum - Operator::identity(2, 2)).norm() <= 1e-14);
    }

    #[test]
    fn p22_is_affine(v in 0.0..=1.0f64, w in 0.0..=1.0f64) {
        let mixed = p22_family(1.0).mix(&p22_family(0.0), v).unwrap();
        prop_assert!(common::max_diff(&mixed, &p22_family(v)) < 1e-15);
        let lam = 0.3;
        let combo = p22_family(v).mix(&p22_family(w), lam).unwrap();
        prop_assert!(common::max_diff(&combo, &p22_family(lam * v + (1.0 - lam) * w)) < 1e-15);
    }
}

#[test]
fn bell_outcomes_are_uniform_for_maximal_entanglement() {
    for alphas in [(0.0, 0.0), (0.3, 1.2), (FRAC_PI_4, -FRAC_PI_4)] {
        let cfg = SwapConfig {
            alpha0: alphas.0,
            alpha1: alphas.1,
            ..stated_config(1.0)
        };
        let p = swap_distribution(&cfg).unwrap();
        for b in 0..4 {
            let pb: f64 = (0..3)
                .flat_map(|a| (0..3).map(move |c| (a, c)))
                .map(|(a, c)| p.get(&[0, 0, 1], &[a, b, c]))
                .sum();
            assert!((pb - 0.25).abs() < 1e-14);
        }
    }
}

#[test]
fn measurements_have_the_stated_form() {
    // A_x = [Z − (−1)^x X]/√2 and C_z = [Z + (−1)^z X]/√2
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let m = stated_config(1.0).model();
    let observable = |povm: &Vec<Operator>| (&povm[0] - &povm[1]).map(|z| z.re);
    let expect = |xs: f64| nalgebra::DMatrix::from_row_slice(2, 2, &[s, xs * s, xs * s, -s]);
    assert!((observable(&m.a[0]) - expect(-1.0)).norm() < 1e-15);
    assert!((observable(&m.a[1]) - expect(1.0)).norm() < 1e-15);
    assert!((observable(&m.c[0]) - expect(1.0)).norm() < 1e-15);
    assert!((observable(&m.c[1]) - expect(-1.0)).norm() < 1e-15);
    // α1 = −π/4 collapses A_0 and A_1
    let lit = SwapConfig {
        alpha1: -FRAC_PI_4,
        ..stated_config(1.0)
    }
    .model();
    assert!((observable(&lit.a[0]) - observable(&lit.a[1])).norm() < 1e-15);
}

#[test]
fn frozen_swap_probability() {
    let p = swap_distribution(&stated_config(1.0)).unwrap();
    let oracle = common::dense_distribution(&stated_config(1.0).model());
    let v = p.get(&[0, 0, 0], &[0, 0, 0]);
    assert!((v - oracle.get(&[0, 0, 0], &[0, 0, 0])).abs() < 1e-15);
    // p(b=φ+) = 1/4; given φ+, p(00) = (1 + ⟨A0⊗C0⟩)/4 and the Bloch vectors
    // (−1, 0, 1)/√2, (1, 0, 1)/√2 give ⟨A0⊗C0⟩ = 0
    assert!((v - 0.0625).abs() < 1e-14, "p(000|00) = {v}");
}

#[test]
fn lossy_outcomes_carry_the_failure_mass() {
    let p = swap_distribution(&SwapConfig {
        eta_a: 0.0,
        eta_c: 0.0,
        ..stated_config(1.0)
    })
    .unwrap();
    for x in 0..2 {
        for z in 0..2 {
            for b in 0..4 {
                assert!((p.get(&[x, 0, z], &[2, b, 2]) - 0.25).abs() < 1e-14);
            }
        }
    }
}

#[test]
fn bsm_projector_action() {
    let phi = &bsm()[0];
    let s = 0.5;
    // Π_0 |00⟩ = (|00⟩ + |11⟩)/2
    assert!((phi[(0, 0)].re - s).abs() < 1e-15 && (phi[(3, 0)].re - s).abs() < 1e-15);
    assert!(phi[(1, 0)].norm() + phi[(2, 0)].norm() < 1e-15);
}

#[test]
fn biquantum_matches_dense_oracle_and_factorizes() {
    for seed in 0..20 {
        let model = random_biquantum_model(seed);
        let p = model.distribution();
        assert!(common::max_diff(&p, &common::dense_distribution(&model)) < 1e-14);
        assert!(p.normalization_error() < 1e-12);
        assert!(p.no_signaling_violation() < 1e-9);
        assert!(p.factorization_violation(&[0], &[2]) < 1e-10);
        assert_eq!(p, random_biquantum(seed));
    }
}

#[test]
fn product_sources_give_product_distributions() {
    let mut model = random_biquantum_model(3);
    let up = |n| {
        let mut v = nalgebra::DVector::zeros(n);
        v[0] = netsdp::qsim::C64::new(1.0, 0.0);
        v
    };
    model.psi_ab = up(4);
    model.psi_bc = up(4);
    let p = model.distribution();
    assert!(p.factorization_violation(&[0], &[2]) < 1e-14);
    assert!(p.factorization_violation(&[0], &[1, 2]) < 1e-14);
}

#[test]
fn bilocal_samples() {
    for seed in 0..50 {
        for ar in [LineArities::binary(), LineArities::swap()] {
            let p = random_bilocal(seed, ar);
            assert!(p.normalization_error() < 1e-12);
            assert!(p.no_signaling_violation() < 1e-12);
            assert!(p.factorization_violation(&[0], &[2]) < 1e-12);
        }
    }
}

#[test]
fn seeded_regression_values() {
    let p = random_bilocal(42, LineArities::binary());
    let q = random_bilocal(42, LineArities::binary());
    assert_eq!(p, q);
    assert_ne!(p, random_bilocal(43, LineArities::binary()));
    let r = random_biquantum(42);
    assert_eq!(r, random_biquantum(42));
    assert_ne!(r, random_biquantum(43));
}
