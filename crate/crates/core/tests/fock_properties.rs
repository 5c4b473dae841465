use approx::assert_abs_diff_eq;
use hybrid_teleport::optics::displacement_matrix;
use hybrid_teleport::*;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Random normalized two-mode state with support up to `cutoff` per mode.
fn two_mode_state(cutoff: usize) -> impl Strategy<Value = FockState> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), (cutoff + 1) * (cutoff + 1)).prop_map(move |v| {
        let entries = v.into_iter().enumerate().map(|(k, (re, im))| {
            (vec![k / (cutoff + 1), k % (cutoff + 1)], c(re, im))
        });
        FockState::from_amplitudes(vec![cutoff, cutoff], entries)
            .unwrap()
            .normalized()
            .unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn beam_splitter_preserves_norm_and_inverts(s in two_mode_state(3), t in 0.05f64..1.0) {
        let bs = BeamSplitter::new(t, 0, 1).unwrap();
        let out = apply_beam_splitter(&s, &bs).unwrap();
        prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
        let back = apply_beam_splitter(&out, &bs.inverse()).unwrap();
        prop_assert!((state_fidelity(&back, &s).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn beam_splitter_conserves_photon_number(s in two_mode_state(3), t in 0.05f64..1.0) {
        let out = apply_beam_splitter(&s, &BeamSplitter::new(t, 0, 1).unwrap()).unwrap();
        let mean = |x: &FockState| x.iter().map(|(k, a)| (k[0] + k[1]) as f64 * a.norm_sqr()).sum::<f64>();
        prop_assert!((mean(&out) - mean(&s)).abs() < 1e-10);
    }

    #[test]
    fn displacement_round_trip(s in two_mode_state(2), re in -0.6f64..0.6, im in -0.6f64..0.6) {
        let a = c(re, im);
        let padded = s.with_cutoff(1, 40).unwrap();
        let d = apply_displacement(&padded, 1, a).unwrap();
        prop_assert!((d.norm_sqr() - 1.0).abs() < 1e-10);
        let back = apply_displacement(&d, 1, -a).unwrap();
        prop_assert!((state_fidelity(&back, &s).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn complete_measurement_sums_to_one(s in two_mode_state(3)) {
        let total: f64 = (0..=3)
            .map(|n| s.project(&[(0, Projector::Number(n))]).unwrap().probability)
            .sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        let parity = s.project(&[(1, Projector::ParityEven)]).unwrap().probability
            + s.project(&[(1, Projector::ParityOdd)]).unwrap().probability;
        prop_assert!((parity - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reduced_density_is_a_state(s in two_mode_state(3)) {
        let rho = s.reduced_density(&[1]).unwrap();
        prop_assert!((rho.trace().re - 1.0).abs() < 1e-12);
        prop_assert!(rho.hermiticity_error() < 1e-12);
        prop_assert!(rho.eigenvalues().iter().all(|&l| l > -1e-12));
        prop_assert!(rho.validate(1e-10).is_ok());
    }

    #[test]
    fn tensor_norm_is_multiplicative(a in two_mode_state(2), b in two_mode_state(1)) {
        let t = tensor(&a.scaled(c(0.5, 0.0)), &b.scaled(c(0.0, 2.0)));
        prop_assert!((t.norm_sqr() - 1.0).abs() < 1e-12);
        prop_assert_eq!(t.mode_count(), 4);
    }

    #[test]
    fn permutation_round_trip(s in two_mode_state(2)) {
        let p = s.permute_modes(&[1, 0]).unwrap();
        let back = p.permute_modes(&[1, 0]).unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn projector_strings_round_trip(n in 0usize..40, b in 0.01f64..3.0) {
        for text in [format!("n:{n}"), format!("scs-even:{b}"), format!("scs-odd:{b}")] {
            prop_assert!(text.parse::<Projector>().is_ok());
        }
    }
}

#[test]
fn displacement_matrix_is_unitary_on_low_block() {
    let d = displacement_matrix(c(0.4, -0.2), 40);
    let prod = d.adjoint() * &d;
    for i in 0..20 {
        for j in 0..20 {
            let want = if i == j { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(prod[(i, j)].re, want, epsilon = 1e-10);
            assert_abs_diff_eq!(prod[(i, j)].im, 0.0, epsilon = 1e-10);
        }
    }
}

#[test]
fn insufficient_cutoff_is_reported() {
    let s = FockState::basis(vec![5], &[5]).unwrap();
    assert!(matches!(
        apply_displacement(&s, 0, c(0.1, 0.0)),
        Err(Error::InsufficientCutoff { .. })
    ));
}

#[test]
fn unknown_projector_is_rejected() {
    assert!(matches!("banana".parse::<Projector>(), Err(Error::UnknownProjector(_))));
}

#[test]
fn projecting_onto_empty_support_gives_no_state() {
    let s = FockState::basis(vec![2, 2], &[1, 0]).unwrap();
    let r = s.project(&[(0, Projector::Number(2))]).unwrap();
    assert_eq!(r.probability, 0.0);
    assert!(r.post_state.is_none());
}

#[test]
fn apd_split_is_complete() {
    let s = coherent_state(c(0.7, 0.0), 20).unwrap();
    let off = s.project(&[(0, Projector::ApdOff)]).unwrap().probability;
    let on = s.project(&[(0, Projector::ApdOn)]).unwrap().probability;
    assert_abs_diff_eq!(off, (-0.49f64).exp(), epsilon = 1e-12);
    assert_abs_diff_eq!(off + on, 1.0, epsilon = 1e-12);
}
