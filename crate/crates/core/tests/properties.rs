use std::f64::consts::PI;

use ndarray::Array1;
use parity_core::angle::parse_angle;
use parity_core::metrology::{phase_shifter, Bs1, Interferometer, InterferometerSpec};
use parity_core::projectors::{beam_splitter, mu_conjugation, mu_fock, BsParams, ProjectorMethod};
use parity_core::quadrature::{gauss2d_closed, gauss2d_general_closed};
use parity_core::states::{coherent_state, hermite_mn, StateSpec};
use parity_core::tensor::{expectation, ModeIndexer, OperatorMatrix, Space, TwoModeState};
use parity_core::C64;
use proptest::prelude::*;

fn angle() -> impl Strategy<Value = f64> {
    -PI..PI
}

fn complex(bound: f64) -> impl Strategy<Value = C64> {
    (-bound..bound, -bound..bound).prop_map(|(re, im)| C64::new(re, im))
}

fn normalized_state(d: usize) -> impl Strategy<Value = TwoModeState> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), d * d).prop_filter_map(
        "zero vector",
        move |v| {
            let amps: Array1<C64> = v.into_iter().map(|(re, im)| C64::new(re, im)).collect();
            let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            (norm > 1e-3)
                .then(|| TwoModeState::from_amplitudes(d, amps.mapv(|z| z / norm)).unwrap())
        },
    )
}

fn sector_leak(m: &OperatorMatrix) -> f64 {
    let ix = ModeIndexer::new(m.cutoff()).unwrap();
    let mut worst = 0.0_f64;
    for r in 0..ix.dim() {
        for c in 0..ix.dim() {
            if ix.total(r) != ix.total(c) {
                worst = worst.max(m.get(r, c).norm());
            }
        }
    }
    worst
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn beam_splitter_is_unitary_and_conserves_photons(theta in 0.0..PI, phi in angle(), d in 2usize..10) {
        let u = beam_splitter(BsParams::new(theta, phi).unwrap(), d).unwrap();
        prop_assert!(u.unitarity_residual() < 1e-10);
        prop_assert_eq!(sector_leak(&u), 0.0);
    }

    #[test]
    fn conjugated_parity_is_hermitian(theta in 0.0..PI, phi in angle(), d in 2usize..9) {
        let mu = mu_conjugation(BsParams::new(theta, phi).unwrap(), d).unwrap();
        prop_assert!(mu.hermiticity_residual() < 1e-10);
    }

    #[test]
    fn mu_fock_is_a_hermitian_involution(phi in angle(), d in 1usize..10) {
        let m = mu_fock(phi, d).unwrap();
        let sq = m.matmul(&m).unwrap();
        prop_assert!(sq.max_abs_diff(&OperatorMatrix::identity(d, Space::TwoMode).unwrap()).unwrap() < 1e-14);
        prop_assert!(m.hermiticity_residual() < 1e-15);
    }

    #[test]
    fn balanced_conjugation_equals_fock_sum(phi in angle(), d in 2usize..9) {
        let conj = mu_conjugation(BsParams::balanced(phi).unwrap(), d).unwrap();
        let fock = mu_fock(phi, d).unwrap();
        let diff = parity_core::projectors::compare_projectors(&conj, &fock, d - 1).unwrap();
        prop_assert!(diff < 1e-10, "diff {diff:e}");
    }

    #[test]
    fn phase_shifters_compose(a in angle(), b in angle(), d in 1usize..8) {
        let ab = phase_shifter(a, d).unwrap().matmul(&phase_shifter(b, d).unwrap()).unwrap();
        let direct = phase_shifter(a + b, d).unwrap();
        prop_assert!(ab.max_abs_diff(&direct).unwrap() < 1e-12);
    }

    #[test]
    fn projector_expectation_is_real_and_bounded(psi in normalized_state(4), phi in angle(), theta in 0.0..PI) {
        for m in [mu_fock(phi, 4).unwrap(), mu_conjugation(BsParams::new(theta, phi).unwrap(), 4).unwrap()] {
            let v = expectation(&psi, &m).unwrap();
            prop_assert!(v.im.abs() < 1e-12);
            prop_assert!(v.re.abs() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn sweep_signal_is_bounded(photons in 0usize..6, z in complex(0.7), r in 0.0..0.4f64, phi in angle()) {
        for (input, bs1) in [
            (StateSpec::Noon { photons }, Bs1::None),
            (StateSpec::CoherentSqueezed { z, r }, Bs1::SymmetricI),
        ] {
            let spec = InterferometerSpec {
                input,
                bs1,
                phase: phi,
                detection: ProjectorMethod::Fock { phi: -PI / 2.0 },
                cutoff: 20,
                grid: None,
            };
            let s = Interferometer::prepare(&spec).unwrap().signal(phi).unwrap();
            prop_assert!(s.imaginary_residual < 1e-8);
            prop_assert!(s.value.abs() <= 1.0 + 1e-8);
        }
    }

    #[test]
    fn hermite_swap_symmetry(m in 0usize..12, n in 0usize..12, x in complex(2.0), y in complex(2.0)) {
        // H_{m,n}(x, y) = H_{n,m}(y, x)
        let a = hermite_mn(m, n, x, y).unwrap();
        let b = hermite_mn(n, m, y, x).unwrap();
        prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
    }

    #[test]
    fn coherent_states_are_normalized(alpha in complex(1.4)) {
        let psi = coherent_state(alpha, 40).unwrap();
        prop_assert!((psi.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn general_gaussian_reduces_to_plain(re in -2.0..-0.5f64, im in -1.0..1.0f64, xi in complex(1.0), eta in complex(1.0)) {
        let zeta = C64::new(re, im);
        let zero = C64::new(0.0, 0.0);
        let a = gauss2d_general_closed(zeta, xi, eta, zero, zero).unwrap();
        let b = gauss2d_closed(zeta, xi, eta).unwrap();
        prop_assert!((a - b).norm() <= 1e-12 * b.norm());
    }

    #[test]
    fn operator_json_round_trips(phi in angle(), d in 1usize..5) {
        let m = mu_fock(phi, d).unwrap();
        let text = serde_json::to_string(&m).unwrap();
        let back: OperatorMatrix = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, m);
    }

    #[test]
    fn state_specs_round_trip(m in 0usize..9, n in 0usize..9, z in complex(3.0), r in 0.0..1.0f64) {
        for spec in [
            StateSpec::Fock { m, n },
            StateSpec::Noon { photons: m },
            StateSpec::Coherent { alpha: z },
            StateSpec::SqueezedVacuum { r },
            StateSpec::CoherentSqueezed { z, r },
        ] {
            prop_assert_eq!(spec.to_string().parse::<StateSpec>().unwrap(), spec);
        }
    }

    #[test]
    fn projector_tags_round_trip(theta in 0.0..PI, phi in angle()) {
        for method in [
            ProjectorMethod::Conjugation(BsParams::new(theta, phi).unwrap()),
            ProjectorMethod::Fock { phi },
            ProjectorMethod::FockEta,
            ProjectorMethod::XiQuadrature,
            ProjectorMethod::Parity,
        ] {
            prop_assert_eq!(method.to_string().parse::<ProjectorMethod>().unwrap(), method);
        }
    }

    #[test]
    fn decimal_angles_parse_exactly(x in -10.0..10.0f64) {
        prop_assert_eq!(parse_angle(&format!("{x:?}")).unwrap(), x);
    }
}
