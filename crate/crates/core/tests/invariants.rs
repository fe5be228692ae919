use std::sync::Arc;

use proptest::prelude::*;
use transparent_pairs::io::{decode_pgm, encode_pgm, field_from_json, field_hash, field_to_json};
use transparent_pairs::lie3::{bracket, ell, ell_inv, hat, so3_exp, vee, Mat3, Vec3};
use transparent_pairs::random::{random_real_field, FieldRng};
use transparent_pairs::torus::TorusMetric;

fn vec3() -> impl Strategy<Value = Vec3> {
    (-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64).prop_map(|(a, b, c)| Vec3::new(a, b, c))
}

proptest! {
    #[test]
    fn hat_turns_cross_product_into_bracket(u in vec3(), v in vec3()) {
        let lhs = hat(&u.cross(&v)).0;
        let rhs = bracket(&hat(&u).0, &hat(&v).0);
        prop_assert!((lhs - rhs).norm() <= 1e-13 * (1.0 + u.norm() * v.norm()));
        prop_assert!((vee(&hat(&u).0) - u).norm() == 0.0);
    }

    #[test]
    fn jacobi_identity(u in vec3(), v in vec3(), w in vec3()) {
        let (a, b, c) = (hat(&u).0, hat(&v).0, hat(&w).0);
        let j = bracket(&a, &bracket(&b, &c)) + bracket(&b, &bracket(&c, &a)) + bracket(&c, &bracket(&a, &b));
        prop_assert!(j.norm() <= 1e-12 * (1.0 + u.norm() * v.norm() * w.norm()));
    }

    #[test]
    fn spin_map_is_a_bracket_isomorphism(u in vec3(), v in vec3()) {
        let (g, h) = (hat(&u), hat(&v));
        let lhs = ell(&g.bracket(&h)).0;
        let rhs = ell(&g).bracket(&ell(&h)).0;
        prop_assert!((lhs - rhs).norm() <= 1e-13 * (1.0 + u.norm() * v.norm()));
        prop_assert!((ell_inv(&ell(&g)).0 - g.0).norm() <= 1e-14 * (1.0 + u.norm()));
    }

    #[test]
    fn exponential_is_a_rotation(u in vec3(), t in -5.0..5.0f64) {
        let r = so3_exp(&hat(&u), t).0;
        prop_assert!((r.transpose() * r - Mat3::identity()).norm() <= 1e-13);
        prop_assert!((r.determinant() - 1.0).abs() <= 1e-13);
        prop_assert!((r * u - u).norm() <= 1e-12 * (1.0 + u.norm()));
    }

    #[test]
    fn pgm_round_trip_is_within_half_a_step(values in prop::collection::vec(-1e3..1e3f64, 12), sixteen in any::<bool>()) {
        let (bytes, scale) = encode_pgm(&values, 4, 3, sixteen).unwrap();
        let (w, h, maxval, px) = decode_pgm(&bytes).unwrap();
        prop_assert_eq!((w, h, maxval), (4, 3, scale.maxval));
        for (v, p) in values.iter().zip(&px) {
            prop_assert!((scale.value(*p) - v).abs() <= 0.5 * scale.step() * (1.0 + 1e-9) + 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn field_json_round_trip_is_exact(seed in any::<u64>(), degree in 0usize..3) {
        let m = Arc::new(TorusMetric::flat(16, 16, 1.0, 1.0).unwrap());
        let f = random_real_field(&m, &mut FieldRng::seed(seed), degree, 3);
        let text = field_to_json(&f).unwrap();
        let g = field_from_json(&text).unwrap();
        prop_assert_eq!(g.degree(), f.degree());
        for (m, v) in f.modes() {
            prop_assert_eq!(g.mode(m).unwrap(), v);
        }
        prop_assert_eq!(field_to_json(&g).unwrap(), text);
        prop_assert_eq!(field_hash(&g).unwrap(), field_hash(&f).unwrap());
    }
}
