use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use anglebisect::engine::{refine, InitialShape, RefinementRun, Retention};
use anglebisect::geometry::{aspect_ratio, aspect_ratio_trig, bisect, Point2, ProcedureKind, TriangleNode};
use anglebisect::symbolic::{form_sum, jacobsthal, upsilon_angles, AngleForm, BaseAngles};
use anglebisect::verify::random_valid_base;
use anglebisect::DyadicRational;

fn dyadic() -> impl Strategy<Value = DyadicRational> {
    (any::<i64>(), 0u32..80).prop_map(|(n, k)| DyadicRational::new(n, k))
}

fn base() -> impl Strategy<Value = BaseAngles> {
    any::<u64>().prop_map(|seed| random_valid_base(&mut ChaCha8Rng::seed_from_u64(seed)))
}

fn triangle() -> impl Strategy<Value = TriangleNode> {
    prop::array::uniform6(-10.0f64..10.0)
        .prop_filter_map("degenerate", |c| {
            TriangleNode::from_vertices([Point2::new(c[0], c[1]), Point2::new(c[2], c[3]), Point2::new(c[4], c[5])]).ok()
        })
}

fn unit() -> AngleForm {
    let one = DyadicRational::one();
    AngleForm::new(one.clone(), one.clone(), one)
}

proptest! {
    #[test]
    fn dyadic_matches_rationals(a in dyadic(), b in dyadic()) {
        prop_assert_eq!((&a + &b).to_rational(), a.to_rational() + b.to_rational());
        prop_assert_eq!((&a - &b).to_rational(), a.to_rational() - b.to_rational());
        prop_assert_eq!(a.cmp(&b), a.to_rational().cmp(&b.to_rational()));
        prop_assert_eq!(&a + &b, &b + &a);
    }

    #[test]
    fn dyadic_halving_is_exact(a in dyadic()) {
        let h = a.halve();
        prop_assert_eq!(&h + &h, a.clone());
        prop_assert_eq!(h.to_rational() * BigRational::from_integer(BigInt::from(2)), a.to_rational());
    }

    #[test]
    fn jacobsthal_identity(n in 0u32..300) {
        prop_assert_eq!(jacobsthal(n) + jacobsthal(n + 1), BigInt::from(1) << n);
    }

    #[test]
    fn upsilon_forms_sum_to_the_triangle(n in 1u32..200) {
        let (theta, phi) = upsilon_angles(n);
        prop_assert_eq!(form_sum(&[theta, phi, AngleForm::gamma()]), unit());
    }

    #[test]
    fn base_angles_round_trip(b in base()) {
        let parsed: BaseAngles = b.to_string().parse().unwrap();
        prop_assert_eq!(&parsed, &b);
        let [x, y, z] = b.angles();
        prop_assert_eq!(x + y + z, BigRational::from_integer(180.into()));
    }

    #[test]
    fn exact_forms_stay_consistent_along_random_paths(b in base(), path in prop::collection::vec(any::<bool>(), 1..24)) {
        let mut node = TriangleNode::from_base(&b, 1.0, true).unwrap();
        for right in path {
            let (l, r) = bisect(&node, ProcedureKind::LargestAngle).unwrap();
            node = if right { r } else { l };
            let exact = node.exact().unwrap();
            prop_assert_eq!(form_sum(&exact.forms), unit());
            prop_assert!(exact.forms.iter().all(AngleForm::is_non_negative));
            let measured = node.measured_angles_deg();
            for (form, m) in exact.forms.iter().zip(measured) {
                prop_assert!((b.unscale_f64(&b.scaled_value(form)) - m).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn bisection_conserves_area(t in triangle(), k in 0usize..3) {
        let kind = ProcedureKind::ALL[k];
        if let Ok((l, r)) = bisect(&t, kind) {
            prop_assert!(((l.area() + r.area()) - t.area()).abs() <= 1e-9 * t.area());
            prop_assert_eq!(l.lineage().index(), 0);
            prop_assert_eq!(r.lineage().index(), 1);
        }
    }

    #[test]
    fn aspect_ratio_range_and_identity(t in triangle()) {
        let r = aspect_ratio(&t).unwrap();
        prop_assert!((0.5 - 1e-12..1.0).contains(&r));
        prop_assert!((r - aspect_ratio_trig(&t).unwrap()).abs() <= 1e-12 * r.max(1.0));
    }

    #[test]
    fn min_angle_theorem_small_depth(b in base()) {
        let run = RefinementRun::new(InitialShape::Angles(b.clone()), ProcedureKind::LargestAngle, 6);
        let stats = refine(&run).unwrap().stats;
        let [alpha, _, gamma] = b.angles();
        let expected = gamma.clone().min(alpha / BigRational::from_integer(2.into()));
        for s in &stats[1..] {
            prop_assert_eq!(s.min_angle.exact().unwrap(), &expected);
        }
    }

    #[test]
    fn lineage_indexes_generation_order(b in base(), k in 0usize..3) {
        let run = RefinementRun::new(InitialShape::Angles(b), ProcedureKind::ALL[k], 5)
            .with_retention(Retention::FullTree);
        let result = refine(&run).unwrap();
        for (n, level) in result.tree.unwrap().iter().enumerate() {
            prop_assert_eq!(level.len(), 1 << n);
            for (i, t) in level.iter().enumerate() {
                prop_assert_eq!(t.lineage().index(), i as u64);
                prop_assert_eq!(t.generation(), n as u32);
            }
        }
    }
}
