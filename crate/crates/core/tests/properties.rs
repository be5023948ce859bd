//! Property-based invariants across randomly drawn parameters.

mod common;

use common::{basis, rule};
use proptest::prelude::*;
use ultrasphere_core::certificates;
use ultrasphere_core::functionals::{self, Exponent};
use ultrasphere_core::measure::{Dim, NodalFn};
use ultrasphere_core::spectral::SpectralFn;

fn poly_values(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rule_mass_and_symmetry(d in 1.0f64..10.0, n in 8usize..48) {
        let r = rule(d, n);
        let sum: f64 = r.weights().iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-14);
        for i in 0..n {
            prop_assert_eq!(r.nodes()[i], -r.nodes()[n - 1 - i]);
            prop_assert_eq!(r.weights()[i], r.weights()[n - 1 - i]);
        }
    }

    #[test]
    fn norms_are_monotone_in_p(
        d in 1.0f64..6.0,
        a in -0.5f64..0.5,
        b in -0.5f64..0.5,
        p1 in 1.0f64..8.0,
        dp in 0.01f64..4.0,
    ) {
        let r = rule(d, 48);
        let f = NodalFn::from_fn(&r, |x| 1.0 + a * x + b * x * x);
        let n1 = f.norm(p1).unwrap();
        let n2 = f.norm(p1 + dp).unwrap();
        prop_assert!(n1 <= n2 + 1e-12, "{} > {}", n1, n2);
    }

    #[test]
    fn quotient_is_scale_invariant(
        d in 1.0f64..5.0,
        p in 1.0f64..6.0,
        c in prop::sample::select(vec![0.1f64, 7.0, -2.0, 0.013]),
        a in 0.05f64..0.4,
    ) {
        prop_assume!((p - 2.0).abs() > 1e-3);
        let (r, bs) = basis(d, 48, 16);
        let f = NodalFn::from_fn(&r, |x| 1.0 + a * x + 0.1 * a * x * x);
        let exp = Exponent::new(p, Dim::new(d).unwrap()).unwrap();
        let q1 = functionals::quotient_qp(&bs, &f, &exp).unwrap();
        let q2 = functionals::quotient_qp(&bs, &f.map(|v| c * v), &exp).unwrap();
        prop_assert!((q1 - q2).abs() < 1e-11 * q1.abs().max(1.0));
    }

    #[test]
    fn transform_round_trip(
        d in 1.0f64..6.0,
        coeffs in prop::collection::vec(-1.0f64..1.0, 1..8),
    ) {
        let (r, bs) = basis(d, 48, 16);
        let f = NodalFn::from_fn(&r, |x| poly_values(&coeffs, x));
        let hat = bs.to_spectral(&f).unwrap();
        let back = bs.to_nodal(&hat).unwrap();
        for (u, v) in f.values().iter().zip(back.values()) {
            prop_assert!((u - v).abs() < 1e-10);
        }
    }

    #[test]
    fn heat_semigroup_composes(
        d in 1.0f64..6.0,
        t1 in 0.0f64..1.0,
        t2 in 0.0f64..1.0,
    ) {
        let hat = SpectralFn::new(Dim::new(d).unwrap(), vec![1.0, 0.5, -0.25, 0.125, 0.1]);
        let a = hat.heat(t1).unwrap().heat(t2).unwrap();
        let b = hat.heat(t1 + t2).unwrap();
        for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
            prop_assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn discriminant_paths_agree(
        p in 1.0f64..8.0,
        d in 1.0f64..6.0,
        beta in prop::sample::select(vec![-2.0f64, -0.5, 0.3, 1.0, 2.5]),
    ) {
        prop_assume!((p - 2.0).abs() > 1e-6);
        let report = certificates::discriminant(p, Dim::new(d).unwrap(), beta).unwrap();
        let via_quadratic = report.big_a * beta * beta + report.big_b * beta + 1.0;
        let scale = report.delta.abs().max(1.0);
        prop_assert!((report.delta - via_quadratic).abs() <= 1e-12 * scale);
    }

    #[test]
    fn sos_split_reconstructs_h(
        d in prop::sample::select(vec![2.0f64, 3.0, 5.0]),
        a in -0.3f64..0.3,
        b in -0.2f64..0.2,
    ) {
        let (r, bs) = basis(d, 64, 20);
        let two_sharp = certificates::two_sharp(Dim::new(d).unwrap());
        let p = Exponent::new(0.9 * two_sharp.min(12.0), Dim::new(d).unwrap()).unwrap();
        let f = NodalFn::from_fn(&r, |x| 1.0 + a * x + b * x * x);
        let h = certificates::pointwise_h(&bs, &f, &p).unwrap();
        let sos = certificates::sos_check(&bs, &f, &p).unwrap();
        for (x, y) in h.values().iter().zip(sos.values()) {
            prop_assert!((x - y).abs() < 1e-9);
            prop_assert!(*x >= -1e-10);
        }
    }

    #[test]
    fn beckner_chain_scales_quadratically(
        d in prop::sample::select(vec![2.0f64, 3.0]),
        p in 1.05f64..1.95,
        c in 0.5f64..3.0,
    ) {
        let (r, bs) = basis(d, 48, 16);
        let u = NodalFn::from_fn(&r, |x| 1.0 + 0.05 * x);
        let r1 = ultrasphere_core::flows::beckner_chain_check(&bs, &u, p).unwrap();
        let r2 =
            ultrasphere_core::flows::beckner_chain_check(&bs, &u.map(|v| c * v), p).unwrap();
        prop_assert!(r1.holds(1e-10) && r2.holds(1e-10));
        let s = c * c;
        prop_assert!((r2.interpolation - s * r1.interpolation).abs() < 1e-9 * s);
        prop_assert!((r2.semigroup - s * r1.semigroup).abs() < 1e-9 * s);
        prop_assert!((r2.dirichlet - s * r1.dirichlet).abs() < 1e-9 * s);
    }
}
