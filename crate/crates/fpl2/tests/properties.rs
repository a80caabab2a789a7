use std::f64::consts::PI;

use fpl2::bethe::{eigenvalue_t, RootSet};
use fpl2::cft_scaling::{central_charge_forms, conformal_weight, CoulombCharge};
use fpl2::couplings::CouplingSet;
use fpl2::tensor_kernel::{decode_1, digits, encode_1, undigits};
use fpl2::C64;
use proptest::prelude::*;

proptest! {
    #[test]
    fn coupling_relations(n in -2.0f64..2.0, branch in 0u8..8) {
        let c = CouplingSet::from_n(n, branch).unwrap();
        prop_assert!((2.0 * c.gamma.cos() - n).abs() < 1e-12);
        prop_assert!((c.q + C64::from_polar(1.0, -c.gamma)).norm() < 1e-12);
        prop_assert!((c.a + c.a.inv() - n).norm() < 1e-12);
        prop_assert!((-c.q - c.q.inv() - n).norm() < 1e-12);
        prop_assert!((c.omega.powi(4) + c.omega.powi(-4) - n).norm() < 1e-12);
        prop_assert!((c.c_pref - (c.q.inv() - c.q)).norm() < 1e-15);
    }

    #[test]
    fn index_codec_round_trip(states in proptest::collection::vec(1u8..=4, 1..6)) {
        let idx = encode_1(&states).unwrap();
        prop_assert_eq!(decode_1(idx, states.len()).unwrap(), states.clone());
        let ds = digits(idx - 1, states.len());
        prop_assert_eq!(undigits(&ds), idx - 1);
    }

    #[test]
    fn c_forms_agree(g in 0.0f64..3.0) {
        let (a, b) = central_charge_forms(g).unwrap();
        prop_assert!((a - b).abs() <= 1e-14 * b.abs().max(1.0));
    }

    #[test]
    fn magnetic_weight_is_nonnegative(m in proptest::array::uniform3(-3i32..=3), g in 0.0f64..3.0) {
        let ch = CoulombCharge::new([0.0; 3], m.map(f64::from), g);
        prop_assert!(conformal_weight(&ch, g).unwrap() >= -1e-15);
    }

    #[test]
    fn eigenvalue_is_a_perfect_square(
        g in 0.2f64..1.4,
        ys in proptest::collection::vec(-1.0f64..1.0, 3),
    ) {
        let rs = RootSet::new(
            [vec![C64::new(-0.5, ys[0])], vec![C64::new(0.0, ys[1])], vec![C64::new(0.5, ys[2])]],
            g,
            1,
        );
        let ev = eigenvalue_t(&rs).unwrap();
        prop_assert!((ev.t - ev.t_square).norm() <= 1e-9 * ev.t.norm().max(1.0));
        let s = g.sin().powi(4);
        prop_assert!((ev.t_fund * ev.t_conj / s - ev.t).norm() <= 1e-9 * ev.t.norm().max(1.0));
    }

    #[test]
    fn gamma_range_is_enforced(g in 3.2f64..10.0) {
        prop_assert!(CouplingSet::from_gamma(g, 0).is_err());
        prop_assert!(CouplingSet::from_gamma(PI - 1e-9, 0).is_ok());
    }
}
