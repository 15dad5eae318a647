//! Reference values from independent high-precision evaluation and
//! independent numerical routes.

mod common;

use std::f64::consts::PI;

use trap_tail::asympt::{
    chi, complex_gamma, f_asymptotic, f_series, g_eval, mellin_f_star, oscillation_spectrum, residue_at_chi,
    sandwich_constants, theorem_ratio,
};
use trap_tail::model::{
    conditioned_up_prob, excursion_count_mean, expected_excursion, expected_excursion_fixed, free_walk_return_mgf,
    reach_far_end_prob, return_before_zero_prob, second_moment_finite, FreeWalkReturn,
};
use trap_tail::{make_params, Complex64, Error, Moment, WalkKind};

fn close(x: f64, y: f64, rel: f64) -> bool {
    (x - y).abs() <= rel * y.abs()
}

#[test]
fn quadrature_self_test() {
    let v = common::integrate(|x| Complex64::new(x.sin(), 0.0), 0.0, PI, 1e-15);
    assert!((v.re - 2.0).abs() < 1e-14);
    let w = common::integrate(|x| Complex64::new(0.0, x).exp(), 0.0, 2.0 * PI, 1e-15);
    assert!(w.norm() < 1e-14);
    let g = common::integrate_real(|x| (-x * x).exp(), -10.0, 10.0, 1e-15);
    assert!((g - PI.sqrt()).abs() < 1e-14);
}

#[test]
fn gamma_reference_values() {
    let g = |re: f64, im: f64| complex_gamma(Complex64::new(re, im)).unwrap();
    assert!((g(1.0, 0.0) - 1.0).norm() < 1e-14);
    assert!((g(5.0, 0.0) - 24.0).norm() < 24.0 * 1e-13);
    assert!((g(0.5, 0.0).re - PI.sqrt()).abs() < 1e-13);
    assert!(close(g(1.0, 1.0).norm(), 0.521_564_046_864_939_8, 1e-12));
    let identity = (PI / PI.sinh()).sqrt();
    assert!(close(g(1.0, 1.0).norm(), identity, 1e-12));
    assert!(matches!(complex_gamma(Complex64::new(-2.0, 0.0)), Err(Error::Pole(_))));
}

#[test]
fn spectrum_reference_values() {
    let p = make_params(0.5f64, 2.0).unwrap();
    let s = oscillation_spectrum(&p, 10).unwrap();
    assert!(close(s.prefactor(), std::f64::consts::LOG2_E, 1e-13));
    let m = s.modes();
    assert!(close(m[0].c, 9.884_441_351_314_019e-6, 1e-10));
    assert!((m[0].d - -0.872_710_998_908_159_3).abs() < 1e-10);
    assert!(close(m[1].c, 9.154_236_370_885_704e-12, 1e-9));
    assert!((m[1].d - -2.517_023_417_884_907).abs() < 1e-9);
    let y = 2.0 * PI / 2f64.ln();
    let c1 = 2.0 * (PI * y / (PI * y).sinh()).sqrt();
    assert!(close(m[0].c, c1, 1e-10));
    assert!(m.iter().all(|x| x.d > -PI && x.d <= PI));
    assert!(s.bracket_positive());

    let b = 10.0;
    let p = make_params(10f64.powf(-1.5), b).unwrap();
    let s = oscillation_spectrum(&p, 3).unwrap();
    assert!((s.rho() - 1.5).abs() < 1e-14);
    assert!(close(s.modes()[0].c, 0.215_867_495_652_899_76, 1e-10));
    assert!((s.modes()[0].d - 1.415_458_652_727_493_7).abs() < 1e-10);

    let k1 = chi(&make_params(0.5f64, 2.0).unwrap(), 1);
    assert!((k1.re - 1.0).abs() < 1e-15 && (k1.im - y).abs() < 1e-13);
}

#[test]
fn g_and_harmonic_sum_reference_values() {
    let p = make_params(0.5f64, 2.0).unwrap();
    assert!(close(g_eval(&p, 1.0, 10).unwrap(), 1.442_704_206_673_724, 1e-13));
    assert!(close(g_eval(&p, 123.4, 0).unwrap(), std::f64::consts::LOG2_E, 1e-13));
    let (c1, c2) = sandwich_constants(&p);
    assert!(close(c2, 1.442_704_206_673_724, 1e-13));
    assert!(close(c1, 0.5 * (-1f64).exp() / 2.0, 1e-15));
    let f = f_series(&p, 1000.0, 1e-16).unwrap();
    assert!(close(f.value, 7.213_531_630_991_525e-4, 1e-13));
    assert!((f_series(&p, 0.0, 1e-16).unwrap().value - 1.0).abs() < 1e-15);
    assert!(close(f_asymptotic(&p, 1000.0, 10).unwrap(), f.value, 1e-6));
    let pure = f_asymptotic(&p, 1000.0, 0).unwrap();
    assert!(close(pure, 0.5 / 2f64.ln() / 1000.0, 1e-14));
    assert!(f_asymptotic(&p, 1.0, 10).is_err());
}

#[test]
fn theorem_ratio_identity() {
    let p = make_params(0.5f64, 2.0).unwrap();
    let t = 5000.0;
    let manufactured = g_eval(&p, t / 4.0, 10).unwrap() / t;
    assert!((theorem_ratio(&p, t, manufactured).unwrap() - 1.0).abs() < 1e-14);
    assert!(theorem_ratio(&p, t, 0.0).is_err());
}

#[test]
fn mellin_reference_values() {
    let p = make_params(0.25f64, 2.0).unwrap();
    let v = mellin_f_star(&p, Complex64::new(1.0, 0.0)).unwrap();
    assert!(v.in_strip && (v.value.re - 1.5).abs() < 1e-14);
    let half = make_params(0.5f64, 2.0).unwrap();
    assert!(matches!(
        mellin_f_star(&half, Complex64::new(1.0, 0.0)),
        Err(Error::Pole(_))
    ));
    assert!(!mellin_f_star(&half, Complex64::new(1.5, 0.0)).unwrap().in_strip);
    let r0 = residue_at_chi(&half, 0).unwrap();
    assert!(r0.im == 0.0 && close(r0.re, -0.5 / 2f64.ln(), 1e-14));
}

#[test]
fn residue_limit_probe() {
    for (a, b) in [(0.5, 2.0), (0.25, 2.0), (0.3, 3.0)] {
        let p = make_params(a, b).unwrap();
        for k in [0i64, 1, -1, 2] {
            let centre = chi(&p, k);
            let residue = residue_at_chi(&p, k).unwrap();
            let delta = 1e-5;
            let mut mean = Complex64::new(0.0, 0.0);
            for j in 0..4 {
                let h = Complex64::from_polar(delta, j as f64 * PI / 2.0);
                let probe = h * mellin_f_star(&p, centre + h).unwrap().value;
                // a single direction carries the O(δ) Laurent term
                assert!((probe - residue).norm() <= 1e-4 * residue.norm());
                mean += probe / 4.0;
            }
            let rel = (mean - residue).norm() / residue.norm();
            assert!(rel < 1e-6, "α={a}, β={b}, k={k}: {rel:e}");
        }
    }
}

#[test]
fn inverse_mellin_line_recovers_the_harmonic_sum() {
    let p = make_params(0.5f64, 2.0).unwrap();
    let rho = p.rho();
    let f_star = |z: Complex64| mellin_f_star(&p, z).unwrap().value;
    for t in [5.0, 50.0, 400.0] {
        let inside = common::inverse_mellin_line(f_star, 0.5 * rho, t, 70.0);
        let series = f_series(&p, t, 1e-16).unwrap().value;
        assert!(
            (inside - series).abs() < 1e-11 * series.max(1e-3),
            "t={t}: {inside} vs {series}"
        );

        // shifting the line past the poles on re z = ρ picks up their residues
        let outside = common::inverse_mellin_line(f_star, rho + 0.5, t, 70.0);
        let poles = f_asymptotic(&p, t.max(2.0), 10).unwrap();
        assert!((inside - outside - poles).abs() < 1e-11 * series.max(1e-3), "t={t}");
    }
}

#[test]
fn enumeration_oracle_matches_closed_forms() {
    // B: return to k before 0, starting one step below k
    let pmf = common::enumerate_return_pmf(3, 1, 2, 40);
    let p_two = common::to_f64(&pmf[2]);
    assert!((p_two - 0.25).abs() < 1e-15);
    let b: f64 = return_before_zero_prob(3.0f64, 2).unwrap();
    assert!((b - 0.75).abs() < 1e-15);
}

#[test]
fn documented_model_examples() {
    let p = make_params(0.5f64, 2.0).unwrap();
    assert_eq!(p.rho(), 1.0);
    assert_eq!(make_params(0.25f64, 2.0).unwrap().rho(), 2.0);
    assert!(matches!(make_params(0.5f64, 1.0), Err(Error::Domain(_))));

    assert_eq!(expected_excursion_fixed(2.0f64, 0).unwrap(), 0.0);
    assert_eq!(expected_excursion_fixed(2.0f64, 1).unwrap(), 2.0);
    assert_eq!(expected_excursion_fixed(2.0f64, 3).unwrap(), 14.0);

    let q = make_params(0.3f64, 2.0).unwrap();
    assert!(matches!(expected_excursion(&q), Moment::Finite(x) if (x - 1.5).abs() < 1e-14));
    assert!(matches!(expected_excursion(&p), Moment::Infinite));
    assert!(!second_moment_finite(&q));

    assert_eq!(reach_far_end_prob(2.0f64, 1).unwrap(), 1.0);
    assert!((reach_far_end_prob(2.0f64, 2).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    assert!(reach_far_end_prob(2.0f64, 0).is_err());
    assert_eq!(return_before_zero_prob(2.0f64, 1).unwrap(), 0.0);
    assert!((return_before_zero_prob(2.0f64, 2).unwrap() - 2.0 / 3.0).abs() < 1e-15);

    assert_eq!(excursion_count_mean(&p, Some(2)).unwrap().finite(), Some(2.0));
    assert_eq!(excursion_count_mean(&p, Some(1)).unwrap().finite(), Some(0.0));
    let mix = excursion_count_mean(&q, None).unwrap().finite().unwrap();
    assert!((mix - 0.45).abs() < 1e-14);

    assert!((free_walk_return_mgf(2.0f64, 0.0).unwrap() - 1.0).abs() < 1e-15);
    let w = FreeWalkReturn::new(2.0).unwrap();
    assert_eq!((w.mean(), w.variance()), (4.0, 24.0));
    let edge = (3.0 / (2.0 * 2f64.sqrt())).ln();
    assert!((w.mgf(edge).unwrap() - 1.5).abs() < 1e-7);
    assert!(w.mgf(edge + 1e-6).is_err());

    assert_eq!(
        conditioned_up_prob(WalkKind::ConditionedToZero { k: 5 }, 2.0f64, 4).unwrap(),
        0.0
    );
    assert!((conditioned_up_prob(WalkKind::ConditionedToK { k: 6 }, 1.7f64, 1).unwrap() - 1.0).abs() < 1e-15);
    assert!((conditioned_up_prob(WalkKind::ConditionedToK { k: 3 }, 2.0f64, 2).unwrap() - 7.0 / 9.0).abs() < 1e-15);
    assert!(conditioned_up_prob(WalkKind::ConditionedToK { k: 3 }, 2.0f64, 3).is_err());
}
