use proptest::prelude::*;

use plateau_core::pauli::{Pauli, PauliString};
use plateau_core::qgan::{
    extract_coefficients, forward, init_discriminator, verify_weight_bound, BiasInit,
    CoefficientTargets, DiscriminatorSpec, OutputActivation, DEFAULT_QGAN_CAP,
};

fn parity(mask: u64, x: u64) -> f64 {
    if (mask & x).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    // The diagonal observable reproduces D(x) on every basis state.
    #[test]
    fn coefficients_reconstruct_the_output(
        n in 1usize..=6,
        layers in 0usize..=3,
        width in 1usize..=8,
        gamma in 0.0f64..=1.0,
        minmax in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let output = if minmax { OutputActivation::MinMax } else { OutputActivation::Wasserstein };
        let mut spec = DiscriminatorSpec::scaled(n, layers, width, gamma, output);
        spec.bias_init = BiasInit::Gaussian { std: 0.3 };
        let params = init_discriminator(&spec, seed).unwrap();
        let h = extract_coefficients(&params, &spec, &CoefficientTargets::UpToWeight(n), DEFAULT_QGAN_CAP).unwrap();
        for x in 0..1u64 << n {
            let recon: f64 = h.terms().iter().map(|(c, p)| c * parity(p.z_mask(), x)).sum();
            let d = forward(&params, &spec, x).unwrap().value;
            prop_assert!((recon - d).abs() < 1e-9);
        }
    }
}

#[test]
fn scaled_networks_have_a_depth_independent_reduced_bound() {
    for layers in 0..5 {
        for width in [8, 64] {
            for output in [OutputActivation::MinMax, OutputActivation::Wasserstein] {
                let spec = DiscriminatorSpec::scaled(5, layers, width, 0.2, output);
                assert!((spec.sigma_out_sq() - 4.0).abs() < 1e-12);
                assert!((spec.reduced_bound() - 0.25).abs() < 1e-12);
                assert!(spec.weight_bound() >= spec.reduced_bound() - 1e-12);
            }
        }
    }
}

#[test]
fn linear_networks_hit_the_closed_form() {
    // With γ = 1 and no bias D is linear in the bits, c_{Z_q} = −a_q / 2 with
    // a = w_out W_L ⋯ W_1, and E[c²] = σ_out² ∏ m_l σ_l² / 4 = 4^L.
    for layers in 0..=2 {
        let spec = DiscriminatorSpec::scaled(3, layers, 16, 1.0, OutputActivation::Wasserstein);
        let alpha = PauliString::single(3, 1, Pauli::Z).unwrap();
        let r = verify_weight_bound(&spec, 20_000, &alpha, 5).unwrap();
        let expected = 4f64.powi(layers as i32);
        assert!(
            (r.empirical - expected).abs() < 4.0 * r.stderr,
            "L = {layers}: {} ± {} vs {expected}",
            r.empirical,
            r.stderr
        );
        assert!(r.pass);
    }
}
