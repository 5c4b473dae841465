use approx::assert_abs_diff_eq;
use hybrid_teleport::displaced::scs_norm;
use hybrid_teleport::optics::apply_dual_rail_gate;
use hybrid_teleport::protocol::{
    alpha_from_beta, beta_from_alpha, fock_joint_probability, ideal_joint_probability, modulated_target,
};
use hybrid_teleport::*;
use proptest::prelude::*;

const CUT: usize = 24;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn qubit_strategy() -> impl Strategy<Value = Qubit> {
    (0.0f64..std::f64::consts::FRAC_PI_2, 0.0f64..std::f64::consts::TAU)
        .prop_map(|(th, ph)| Qubit::single_rail(c(th.cos(), 0.0), Complex64::from_polar(th.sin(), ph)))
}

fn displaced_qubit(q: &Qubit, a: Complex64) -> FockState {
    let s0 = displaced_number_state(0, a, CUT).unwrap().scaled(q.a0);
    let s1 = displaced_number_state(1, a, CUT).unwrap().scaled(q.a1);
    s0.add(&s1).unwrap()
}

/// The same state written over the cats `E = N+(|β> + |-β>)`, `O = N-(|-β> - |β>)`:
/// `(E/(2N+)) (|01>D(α) + |10>D(-α))|φ> + (O/(2N-)) (|01>D(α) - |10>D(-α))|φ>`, over √2.
fn regrouped_omega(q: &Qubit, alpha: f64, beta: f64) -> FockState {
    let even = scs_state(Parity::Even, beta, CUT).unwrap();
    let odd = scs_state(Parity::Odd, beta, CUT).unwrap();
    let r0 = Qubit::dual_rail(c(1.0, 0.0), c(0.0, 0.0)).to_fock();
    let r1 = Qubit::dual_rail(c(0.0, 0.0), c(1.0, 0.0)).to_fock();
    let dp = displaced_qubit(q, c(alpha, 0.0));
    let dm = displaced_qubit(q, c(-alpha, 0.0));
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let ne = scs_norm(Parity::Even, beta);
    let no = scs_norm(Parity::Odd, beta);
    let term = |cat: &FockState, s01: f64, s10: f64| {
        let a = tensor(&tensor(cat, &dp), &r0).scaled(c(s01, 0.0));
        let b = tensor(&tensor(cat, &dm), &r1).scaled(c(s10, 0.0));
        a.add(&b).unwrap()
    };
    term(&even, 1.0, 1.0)
        .scaled(c(h / (2.0 * ne), 0.0))
        .add(&term(&odd, 1.0, -1.0).scaled(c(h / (2.0 * no), 0.0)))
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ideal_pipeline_matches_closed_forms(q in qubit_strategy(), alpha in 0.02f64..0.5) {
        let beta = 0.3;
        let state = omega_apply(&q, alpha, beta, CUT).unwrap();
        let m = alice_measure(&state, MeasurementModel::IdealParity, 8).unwrap();
        for rec in &m.outcomes {
            let closed = ideal_joint_probability(rec.j, rec.n, alpha, beta, &q);
            prop_assert!((rec.probability - closed).abs() < 1e-9);
            let target = modulated_target(&q, rec.n, alpha).unwrap();
            prop_assert!(1.0 - bob_correct(rec).unwrap().fidelity(&target) < 1e-10);
            prop_assert_eq!(rec.message_bits, (rec.j, (rec.n % 2) as u8));
        }
        prop_assert!((m.total_probability() + m.residual - 1.0).abs() < 1e-12);
    }

    // The corrected relative phase is that of A_n a1/a0; A_n is real for real α,
    // so the phase is kept exactly when A_n > 0 and shifted by π when A_n < 0.
    #[test]
    fn corrected_phase_follows_modulation(q in qubit_strategy(), alpha in 0.02f64..0.5) {
        prop_assume!(q.a0.norm() > 1e-3 && q.a1.norm() > 1e-3);
        let state = omega_apply(&q, alpha, 0.3, CUT).unwrap();
        let m = alice_measure(&state, MeasurementModel::IdealParity, 4).unwrap();
        for rec in &m.outcomes {
            let bob = bob_correct(rec).unwrap();
            let a_n = modulation_factor(rec.n, c(alpha, 0.0)).unwrap();
            let want = (a_n * q.a1 / q.a0).arg();
            let got = (bob.a1 / bob.a0).arg();
            let d = (got - want).rem_euclid(std::f64::consts::TAU);
            prop_assert!(d.min(std::f64::consts::TAU - d) < 1e-10);
        }
    }

    #[test]
    fn omega_regroups_over_cats(q in qubit_strategy(), alpha in 0.02f64..0.5, beta in 0.1f64..1.0) {
        let direct = omega_apply(&q, alpha, beta, CUT).unwrap();
        let regrouped = regrouped_omega(&q, alpha, beta);
        let diff = direct.add(&regrouped.scaled(c(-1.0, 0.0))).unwrap();
        prop_assert!(diff.norm() < 1e-10);
    }

    #[test]
    fn beta_alpha_round_trip(beta in 0.01f64..2.0, t in 0.5f64..0.9999) {
        let a = alpha_from_beta(beta, t);
        prop_assert!((beta_from_alpha(a, t).unwrap() - beta).abs() < 1e-10 * beta.max(1.0));
    }

    #[test]
    fn distributions_normalize(alpha in 0.01f64..0.8, a1 in 0.0f64..1.0) {
        for r in [
            direct_success_probs(alpha, a1, 40).unwrap(),
            am_success_probs(0, alpha, a1, 40).unwrap(),
            am_success_probs(1, alpha, a1, 40).unwrap(),
        ] {
            prop_assert!((r.total() - 1.0).abs() < 1e-9);
            prop_assert!(r.values.iter().all(|&p| (0.0..=1.0).contains(&p)));
        }
    }

    #[test]
    fn fidelity_is_one_without_reflection(q in qubit_strategy(), alpha in 0.0f64..0.8) {
        prop_assert!((approximation_fidelity(alpha, 1.0, &q).unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn channel_basics() {
    let ch = build_channel(0.3, CUT).unwrap();
    assert_abs_diff_eq!(ch.state.norm_sqr(), 1.0, epsilon = 1e-10);
    assert_abs_diff_eq!(ch.coherent_overlap().unwrap().re, (-0.18f64).exp(), epsilon = 1e-10);
    for (k, _) in ch.state.iter() {
        assert_eq!(k[1] + k[2], 1);
    }
}

#[test]
fn large_cats_give_one_ebit() {
    let ch = build_channel(3.0, 40).unwrap();
    assert_abs_diff_eq!(ch.entanglement_entropy_bits().unwrap(), 1.0, epsilon = 1e-3);
}

#[test]
fn vacuum_input_without_displacement_is_a_product() {
    let q = Qubit::single_rail(c(1.0, 0.0), c(0.0, 0.0));
    let s = omega_apply(&q, 0.0, 0.3, CUT).unwrap();
    let ch = build_channel(0.3, CUT).unwrap();
    let want = tensor(&ch.state, &FockState::vacuum(vec![CUT])).permute_modes(&[0, 3, 1, 2]).unwrap();
    assert_abs_diff_eq!(state_fidelity(&s, &want).unwrap(), 1.0, epsilon = 1e-12);
}

#[test]
fn exact_mixing_without_reflection_is_a_product() {
    let q = Qubit::single_rail(c(0.6, 0.0), c(0.0, 0.8));
    let ch = build_channel(0.3, CUT).unwrap();
    let s = alice_mix_exact(&ch, &q, 1.0).unwrap();
    let want = tensor(&ch.state, &q.to_fock()).permute_modes(&[0, 3, 1, 2]).unwrap();
    assert_abs_diff_eq!(state_fidelity(&s, &want).unwrap(), 1.0, epsilon = 1e-12);
}

#[test]
fn exact_mixing_tracks_the_ideal_map() {
    let t = 0.99f64.sqrt();
    let alpha = alpha_from_beta(0.3, t);
    assert_abs_diff_eq!(alpha, 0.03, epsilon = 1e-12);
    let ch = build_channel(0.3, CUT).unwrap();
    let q = Qubit::single_rail(c(0.5f64.sqrt(), 0.0), c(0.0, 0.5f64.sqrt()));
    let exact = alice_mix_exact(&ch, &q, t).unwrap();
    assert_abs_diff_eq!(exact.norm_sqr(), 1.0, epsilon = 1e-10);
    let ideal = omega_apply(&q, alpha, 0.3, CUT).unwrap();
    let simulated = state_fidelity(&exact, &ideal).unwrap();
    let closed = approximation_fidelity(alpha, t, &q).unwrap();
    assert!(simulated >= 0.99 && closed >= 0.99);
    assert_abs_diff_eq!(simulated, closed, epsilon = 1e-3);
}

#[test]
fn fock_and_apd_readouts_of_the_exact_circuit() {
    let t = 0.99f64.sqrt();
    let alpha = alpha_from_beta(0.3, t);
    let ch = build_channel(0.3, CUT).unwrap();
    let q = Qubit::single_rail(c(0.5f64.sqrt(), 0.0), c(0.5f64.sqrt(), 0.0));
    let exact = alice_mix_exact(&ch, &q, t).unwrap();
    let fock = alice_measure(&exact, MeasurementModel::FockBasis, 6).unwrap();
    assert!(fock.residual.abs() < 1e-9);
    let low: f64 = fock
        .outcomes
        .iter()
        .filter(|r| r.mode1_count.unwrap() <= 1 && r.n <= 1)
        .map(|r| r.probability)
        .sum();
    // The coherent mode alone leaves Poisson(β²) weight e^{-0.09}(1.09) ≈ 0.9962
    // on {0, 1}, so the four low outcomes carry about 0.9946.
    assert!((0.994..0.996).contains(&low), "low-order weight {low}");
    for rec in &fock.outcomes {
        let closed = fock_joint_probability(rec.mode1_count.unwrap(), rec.n, alpha, 0.3, &q);
        assert_abs_diff_eq!(rec.probability, closed, epsilon = 1e-2);
    }
    let apd = alice_measure(&exact, MeasurementModel::ApdPair, 1).unwrap();
    assert_abs_diff_eq!(apd.total_probability(), 1.0, epsilon = 1e-9);
    for rec in &apd.outcomes {
        let k = rec.mode1_count.map_or(rec.j as usize, |k| k);
        let f = fock.outcomes.iter().find(|r| r.mode1_count == Some(k) && r.n == rec.n).unwrap();
        assert_abs_diff_eq!(rec.probability, f.probability, epsilon = 5e-3);
    }
}

#[test]
fn bob_states_before_correction() {
    let alpha = 0.2;
    let q = Qubit::single_rail(c(0.8, 0.0), c(0.0, 0.6));
    let s = omega_apply(&q, alpha, 0.3, CUT).unwrap();
    let m = alice_measure(&s, MeasurementModel::IdealParity, 3).unwrap();
    let a0 = modulation_factor(0, c(alpha, 0.0)).unwrap();
    let want = Qubit::dual_rail(q.a0 + a0 * q.a1, q.a0 - a0 * q.a1);
    assert_abs_diff_eq!(m.find(0, 0).unwrap().bob_state.fidelity(&want), 1.0, epsilon = 1e-12);
    let psi0 = modulated_target(&q, 0, alpha).unwrap();
    let psi1 = modulated_target(&q, 1, alpha).unwrap();
    for (j, n, target) in [(0, 0, psi0), (1, 0, psi0), (0, 1, psi1), (1, 1, psi1)] {
        let got = bob_correct(m.find(j, n).unwrap()).unwrap();
        assert_abs_diff_eq!(got.fidelity(&target), 1.0, epsilon = 1e-10);
    }
    assert!(m.outcomes.iter().all(|r| (r.bob_purity - 1.0).abs() < 1e-10));
}

#[test]
fn modulated_inputs_come_back_on_their_outcome() {
    let q = Qubit::single_rail(c(0.8, 0.0), Complex64::from_polar(0.6, 1.1));
    for k in 0..2 {
        let am = prepare_am_qubit(&q, k, 0.2).unwrap();
        let s = omega_apply(&am, 0.2, 0.3, CUT).unwrap();
        let m = alice_measure(&s, MeasurementModel::IdealParity, 2).unwrap();
        for j in 0..2 {
            let got = bob_correct(m.find(j, k).unwrap()).unwrap();
            assert_abs_diff_eq!(got.fidelity(&q.with_basis(Basis::DualRail)), 1.0, epsilon = 1e-10);
        }
    }
    let zero = Qubit::single_rail(c(1.0, 0.0), c(0.0, 0.0));
    assert_eq!(prepare_am_qubit(&zero, 0, 0.2).unwrap(), zero);
}

#[test]
fn direct_distribution_at_basis_input() {
    let alpha = 0.1;
    let r = direct_success_probs(alpha, 0.0, 20).unwrap();
    let e = (-alpha * alpha).exp();
    assert_abs_diff_eq!(r.get(0), e, epsilon = 1e-14);
    assert_abs_diff_eq!(r.get(1), e * alpha * alpha, epsilon = 1e-14);
    let q = Qubit::single_rail(c(1.0, 0.0), c(0.0, 0.0));
    let s = omega_apply(&q, alpha, 0.3, CUT).unwrap();
    let m = alice_measure(&s, MeasurementModel::IdealParity, 1).unwrap();
    for n in 0..2 {
        let p: f64 = m.outcomes.iter().filter(|o| o.n == n).map(|o| o.probability).sum();
        assert_abs_diff_eq!(p, r.get(n), epsilon = 1e-12);
    }
}

#[test]
fn dominance_at_small_alpha() {
    let r = direct_success_probs(0.03, 0.5f64.sqrt(), 30).unwrap();
    assert!(r.get(0) + r.get(1) >= 0.9982);
    assert_abs_diff_eq!(am_success_probs(0, 0.2, 0.0, 30).unwrap().get(0), (-0.04f64).exp(), epsilon = 1e-14);
}

#[test]
fn mod_zero_crossover_sits_near_alpha() {
    // P_00 falls through 1/2 where |a1| ≈ |A_0| = α, here 0.196 at α = 0.2.
    let above = |a1: f64| am_success_probs(0, 0.2, a1, 30).unwrap().get(0) > 0.5;
    assert!(above(0.19));
    assert!(!above(0.2));
    let p11 = |a1: f64| am_success_probs(1, 0.2, a1, 30).unwrap().get(1) > 0.5;
    assert!(!p11(0.9));
    assert!(p11(0.99));
}

#[test]
fn unknown_model_is_rejected() {
    assert!(matches!("homodyne".parse::<MeasurementModel>(), Err(Error::UnknownModel(_))));
    let s = FockState::vacuum(vec![1, 1]);
    assert!(alice_measure(&s, MeasurementModel::IdealParity, 1).is_err());
}

#[test]
fn hadamard_on_fock_register_matches_qubit_map() {
    let q = Qubit::dual_rail(c(0.6, 0.0), c(0.0, 0.8));
    let s = apply_dual_rail_gate(&q.to_fock(), 0, 1, &DualRailGate::hadamard()).unwrap();
    let want = dual_rail_apply(&q, &DualRailGate::hadamard()).unwrap();
    assert_abs_diff_eq!(Qubit::from_dual_rail_state(&s).unwrap().fidelity(&want), 1.0, epsilon = 1e-14);
}
