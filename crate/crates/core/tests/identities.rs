//! Structural identities of the ultraspherical operator, checked on random
//! polynomial data: the commutation relation, the two integration-by-parts
//! identities behind the rigidity argument, and the Poincare reading of
//! the p = 1 endpoint.

mod common;

use common::{basis, dot, random_positive_poly};
use ultrasphere_core::functionals::{self, Exponent};
use ultrasphere_core::measure::{Dim, NodalFn};
use ultrasphere_core::rng::SplitMix64;
use ultrasphere_core::spectral::eigenvalue;

#[test]
fn commutation_relation() {
    // (Lu)' - L u' = -2x u'' - d u'
    for &d in &[1.0, 2.0, 3.0, 5.0] {
        let (rule, b) = basis(d, 64, 20);
        let mut rng = SplitMix64::new(31);
        for _ in 0..10 {
            let u = random_positive_poly(&b, &mut rng, 0.4, 0.05);
            let hat = b.to_spectral(&u).unwrap();
            let lu_prime = b.derivative(&b.apply_l(&u).unwrap()).unwrap();
            let l_uprime = b.apply_l(&b.derivative_of(&hat)).unwrap();
            let u1 = b.derivative_of(&hat);
            let u2 = b.second_derivative_of(&hat);
            for i in 0..rule.len() {
                let x = rule.nodes()[i];
                let lhs = lu_prime.values()[i] - l_uprime.values()[i];
                let rhs = -2.0 * x * u2.values()[i] - d * u1.values()[i];
                assert!((lhs - rhs).abs() < 1e-9, "d={d}, node {i}: {lhs} vs {rhs}");
            }
        }
    }
}

#[test]
fn second_order_identity() {
    // int (Lu)^2 = int |u''|^2 nu^2 + d int |u'|^2 nu
    for &d in &[1.5, 2.0, 3.0, 5.0] {
        let (rule, b) = basis(d, 64, 20);
        let mut rng = SplitMix64::new(32);
        for _ in 0..10 {
            let u = random_positive_poly(&b, &mut rng, 0.4, 0.05);
            let hat = b.to_spectral(&u).unwrap();
            let lhs: f64 = hat
                .coeffs()
                .iter()
                .enumerate()
                .map(|(k, &a)| {
                    let l = eigenvalue(k, rule.d());
                    l * l * a * a
                })
                .sum();
            let u1 = b.derivative_of(&hat);
            let u2 = b.second_derivative_of(&hat);
            let mut rhs = 0.0;
            for i in 0..rule.len() {
                let x = rule.nodes()[i];
                let nu = 1.0 - x * x;
                rhs += rule.weights()[i]
                    * (u2.values()[i] * u2.values()[i] * nu * nu
                        + d * u1.values()[i] * u1.values()[i] * nu);
            }
            assert!(
                (lhs - rhs).abs() <= 1e-9 * lhs.abs().max(1.0),
                "d={d}: {lhs} vs {rhs}"
            );
        }
    }
}

#[test]
fn mixed_integration_by_parts_identity() {
    // <(u'^2/u) nu, Lu> = d/(d+2) int u'^4/u^2 nu^2
    //                     - 2 (d-1)/(d+2) int u'^2 u''/u nu^2
    for &d in &[2.0, 3.0, 5.0] {
        let (rule, b) = basis(d, 64, 20);
        let mut rng = SplitMix64::new(33);
        for _ in 0..10 {
            let u = random_positive_poly(&b, &mut rng, 0.4, 0.5);
            let hat = b.to_spectral(&u).unwrap();
            let u1 = b.derivative_of(&hat);
            let u2 = b.second_derivative_of(&hat);
            let lu = b.apply_l(&u).unwrap();
            let (mut lhs, mut t1, mut t2) = (0.0, 0.0, 0.0);
            for i in 0..rule.len() {
                let x = rule.nodes()[i];
                let nu = 1.0 - x * x;
                let w = rule.weights()[i];
                let s = u1.values()[i] * u1.values()[i] / u.values()[i];
                lhs += w * s * nu * lu.values()[i];
                t1 += w * s * s * nu * nu;
                t2 += w * s * u2.values()[i] * nu * nu;
            }
            let rhs = d / (d + 2.0) * t1 - 2.0 * (d - 1.0) / (d + 2.0) * t2;
            assert!(
                (lhs - rhs).abs() <= 1e-8 * lhs.abs().max(1e-3),
                "d={d}: {lhs} vs {rhs}"
            );
        }
    }
}

#[test]
fn eigen_residual_through_the_differential_route() {
    // nu c_k'' - d x c_k' = -k(d+k-1) c_k at every node
    for &d in &[1.0, 2.0, 3.0, 5.0] {
        let (rule, b) = basis(d, 64, 20);
        for k in 0..=20 {
            let ck = b.mode(k).unwrap();
            let l_diff = b.apply_l_differential(&ck).unwrap();
            let lam = eigenvalue(k, rule.d());
            for (&a, &c) in l_diff.values().iter().zip(ck.values()) {
                assert!(
                    (a + lam * c).abs() < 1e-9,
                    "d={d} k={k}: residual {}",
                    (a + lam * c).abs()
                );
            }
        }
    }
}

#[test]
fn quotient_sampling_never_dips_below_one() {
    // spot check of the sharp-constant sampling on a reduced grid; the
    // full 200-function corpus runs in the acceptance suite
    for &d in &[2.0, 3.0] {
        let (_, b) = basis(d, 64, 20);
        let mut rng = SplitMix64::new(34);
        for &p in &[1.0, 1.5, 3.0, 4.0] {
            let exp = Exponent::new(p, Dim::new(d).unwrap()).unwrap();
            for _ in 0..50 {
                let f = random_positive_poly(&b, &mut rng, 0.3, 0.05);
                let q = functionals::quotient_qp(&b, &f, &exp).unwrap();
                assert!(q >= 1.0 - 1e-9, "d={d} p={p}: quotient {q}");
            }
        }
    }
}

#[test]
fn p_one_is_the_poincare_ratio() {
    // Q_1 evaluated on a shifted sign-changing function reproduces
    // int |v'|^2 nu dnu / (d * variance), independently of the shift
    for &d in &[2.0, 3.0] {
        let (rule, b) = basis(d, 64, 20);
        let v = NodalFn::from_fn(&rule, |x| x - 0.4 * x * x + 0.3);
        let dir = functionals::dirichlet(&b, &v).unwrap();
        let mean = v.integrate();
        let var = dot(&rule, v.values(), v.values()) - mean * mean;
        let poincare = dir / (d * var);

        let exp = Exponent::new(1.0, Dim::new(d).unwrap()).unwrap();
        for &c in &[2.0, 5.0, 11.0] {
            let shifted = v.map(|t| t + c);
            let q = functionals::quotient_qp(&b, &shifted, &exp).unwrap();
            assert!(
                (q - poincare).abs() < 1e-8,
                "d={d} shift {c}: {q} vs {poincare}"
            );
        }
        assert!(poincare >= 1.0 - 1e-12);
    }
}

#[test]
fn heat_flow_conserves_mass_exactly() {
    let (rule, b) = basis(3.0, 64, 16);
    let f = NodalFn::from_fn(&rule, |x| 1.0 + 0.4 * x + 0.2 * x * x);
    let hat = b.to_spectral(&f).unwrap();
    for &t in &[0.01, 0.5, 3.0] {
        let evolved = hat.heat(t).unwrap();
        assert_eq!(evolved.coeffs()[0].to_bits(), hat.coeffs()[0].to_bits());
    }
}
