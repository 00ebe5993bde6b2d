use num_complex::Complex64;
use proptest::prelude::*;
use rug::ops::Pow;
use rug::Integer;

use zsig_core::cache::{format_line, parse_line};
use zsig_core::classifier::{check_consistency, classify};
use zsig_core::divisibility::{ord_profile, zsigmondy_set};
use zsig_core::mandelbrot::{
    chain_rule_multiplier, default_tol, iterate_with_derivative, periodic_cycles,
};
use zsig_core::orbit::numerator_residues;
use zsig_core::parse::parse_rational;
use zsig_core::{Orbit, Parameter};

fn infinite_param() -> impl Strategy<Value = Parameter> {
    (2u32..=5, 1i64..=30, -40i64..=40)
        .prop_filter_map("finite orbit", |(d, b, a)| Parameter::infinite(a, b, d).ok())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn recurrence_and_coprimality(p in infinite_param()) {
        let o = Orbit::new(p.clone()).extend(7).unwrap();
        let (a, b, d) = (p.a().clone(), p.b().clone(), p.d());
        prop_assert_eq!(o.numerator(1).unwrap(), &a);
        for n in 1..7u32 {
            let an = o.numerator(n).unwrap();
            prop_assert_eq!(Integer::from(an.gcd_ref(&b)), 1);
            let e = d.pow(n) - 1;
            let next = Integer::from(an.pow(d)) + Integer::from(&a * Integer::from((&b).pow(e)));
            prop_assert_eq!(o.numerator(n + 1).unwrap(), &next);
        }
    }

    #[test]
    fn residues_match_exact_terms(p in infinite_param(), m in 2u64..1_000_000_007) {
        let o = Orbit::new(p.clone()).extend(6).unwrap();
        let mi = Integer::from(m);
        let res = numerator_residues(&p, &mi, 6);
        for n in 1..=6u32 {
            let want = o.numerator(n).unwrap().clone().div_rem_euc(mi.clone()).1;
            prop_assert_eq!(&res[n as usize - 1], &want);
        }
    }

    #[test]
    fn rigid_pattern(p in infinite_param(), i in 0usize..60) {
        let primes = [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71,
            73, 79, 83, 89, 97, 101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163,
            167, 173, 179, 181, 191, 193, 197, 199, 211, 223, 227, 229, 233, 239, 241, 251, 257,
            263, 269, 271, 277, 281];
        let q = primes[i];
        prop_assume!(!p.b().is_divisible_u(q as u32));
        let prof = ord_profile(&Orbit::new(p), q, 10).unwrap();
        prop_assert!(prof.rigid);
        if let Some(k) = prof.entry_index {
            for (j, &o) in prof.ords.iter().enumerate() {
                let n = j as u32 + 1;
                prop_assert_eq!(o, if n % k == 0 { prof.entry_ord } else { 0 });
            }
        }
    }

    #[test]
    fn classifier_agrees_outside_window(p in infinite_param()) {
        prop_assume!(!p.in_recurrent_window());
        let z = zsigmondy_set(&Orbit::new(p.clone()), 8).unwrap();
        prop_assert!(check_consistency(&classify(&p), &z, 8).is_ok());
    }

    #[test]
    fn rational_text_round_trip(a in any::<i64>(), b in 1i64..i64::MAX) {
        let s = format!("{a}/{b}");
        let q = parse_rational(&s).unwrap();
        prop_assert_eq!(parse_rational(&q.to_string()).unwrap(), q);
    }

    #[test]
    fn cache_line_round_trip(p in infinite_param(), n in 1u32..6) {
        let o = Orbit::new(p.clone()).extend(n).unwrap();
        let line = format_line(&p, n, o.numerator(n).unwrap());
        let e = parse_line(&line).unwrap();
        prop_assert_eq!(&e.numerator, o.numerator(n).unwrap());
        prop_assert_eq!((e.a, e.b, e.d, e.n), (p.a().clone(), p.b().clone(), p.d(), n));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn periodic_points_complete(re in -2.0f64..0.5, im in -1.2f64..1.2, n in 1u32..=8) {
        let c = Complex64::new(re, im);
        let cycles = periodic_cycles(c, n, default_tol(n)).unwrap();
        let total: usize = cycles.iter().map(|cy| cy.minimal_period as usize * cy.multiplicity).sum();
        prop_assert_eq!(total, 1usize << n);
        let trap = 0.5 + (0.25 + c.norm()).sqrt();
        for cy in &cycles {
            prop_assert!(n % cy.minimal_period == 0);
            prop_assert_eq!(cy.points.len() as u32, cy.minimal_period);
            for z in &cy.points {
                prop_assert!(z.norm() <= trap * (1.0 + 1e-9));
            }
            let (_, dz) = iterate_with_derivative(c, cy.point, n);
            let chain = chain_rule_multiplier(c, cy.point, n);
            prop_assert!((dz - chain).norm() <= 1e-9 * (1.0 + dz.norm()));
        }
    }
}
