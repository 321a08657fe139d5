//! Property tests over randomly generated functions and metrics. Everything
//! here is exact rational arithmetic, so assertions are equalities, not
//! tolerances.

use num_traits::{Signed, Zero};
use proptest::prelude::*;

use treecone::tree::{four_point_defect, geodesic_point, DiscreteFunction, Knot, PlFunction};
use treecone::{
    discrete_from_json, discrete_to_json, discretize, embed_discrete, homogenize,
    homogenize_pairwise_check, make_sample_plan, pl_from_json, pl_to_json, rat, Rational,
};

fn slope() -> impl Strategy<Value = Rational> {
    (-8i64..=8, 1i64..=4).prop_map(|(n, d)| rat(n, d))
}

fn length() -> impl Strategy<Value = Rational> {
    (1i64..=8, 1i64..=4).prop_map(|(n, d)| rat(n, d))
}

fn pl_function() -> impl Strategy<Value = PlFunction> {
    prop::collection::vec((slope(), length()), 0..5).prop_map(|segments| {
        segments.into_iter().fold(PlFunction::zero(), |f, (s, l)| {
            f.concat(&PlFunction::linear(s, l).unwrap())
        })
    })
}

fn discrete_function() -> impl Strategy<Value = DiscreteFunction> {
    let values = (-4i64..=4).prop_filter("support values are nonzero", |v| *v != 0);
    (2i64..=16, prop::collection::btree_map(1i64..16, values, 0..4)).prop_map(|(quarters, sup)| {
        let rho = rat(quarters, 4);
        let knots = sup
            .into_iter()
            .map(|(j, v)| Knot::new(&rho * rat(j, 16), rat(v, 2)))
            .collect();
        DiscreteFunction::new(rho, knots).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn distance_is_a_metric(f in pl_function(), g in pl_function(), h in pl_function()) {
        let fg = f.distance(&g);
        prop_assert_eq!(&fg, &g.distance(&f));
        prop_assert!(fg >= Rational::zero());
        prop_assert_eq!(fg.is_zero(), f == g);
        prop_assert!(f.distance(&f).is_zero());
        prop_assert!(fg <= f.distance(&h) + h.distance(&g));
    }

    #[test]
    fn segregation_moment_is_symmetric_and_bounded(f in pl_function(), g in pl_function()) {
        let s = f.segregation(&g).moment;
        prop_assert_eq!(&s, &g.segregation(&f).moment);
        prop_assert!(s >= Rational::zero());
        prop_assert!(&s <= f.rho().min(g.rho()));
        prop_assert_eq!(f.distance(&g), f.rho() + g.rho() - rat(2, 1) * &s);
    }

    #[test]
    fn four_point_defect_is_nonpositive(
        f1 in pl_function(),
        f2 in pl_function(),
        f3 in pl_function(),
        f4 in pl_function(),
    ) {
        prop_assert!(four_point_defect(&f1, &f2, &f3, &f4) <= Rational::zero());
        prop_assert!(four_point_defect(&f1, &f3, &f2, &f4) <= Rational::zero());
        prop_assert!(four_point_defect(&f1, &f4, &f2, &f3) <= Rational::zero());
    }

    #[test]
    fn geodesic_hits_endpoints_and_is_isometric(
        f in pl_function(),
        g in pl_function(),
        a in 0i64..=32,
        b in 0i64..=32,
    ) {
        let d = f.distance(&g);
        prop_assert_eq!(geodesic_point(&f, &g, &Rational::zero()).unwrap(), f.clone());
        prop_assert_eq!(geodesic_point(&f, &g, &d).unwrap(), g.clone());
        let x = &d * rat(a, 32);
        let y = &d * rat(b, 32);
        let px = geodesic_point(&f, &g, &x).unwrap();
        let py = geodesic_point(&f, &g, &y).unwrap();
        prop_assert_eq!(px.distance(&py), (&x - &y).abs());
    }

    #[test]
    fn homogenization_is_an_isometry(
        f0 in pl_function(),
        f in pl_function(),
        g in pl_function(),
    ) {
        prop_assert!(homogenize_pairwise_check(&f0, &f, &g).is_zero());
        prop_assert_eq!(homogenize(&f0, &f0), PlFunction::zero());
    }

    #[test]
    fn discrete_embedding_preserves_distances(
        g1 in discrete_function(),
        g2 in discrete_function(),
    ) {
        prop_assert_eq!(
            embed_discrete(&g1).distance(&embed_discrete(&g2)),
            g1.distance(&g2)
        );
    }

    #[test]
    fn sampled_discretization_shifts_distance_by_less_than_the_window(
        f in pl_function(),
        g in pl_function(),
        stage in 1u32..=3,
    ) {
        prop_assume!(f != g);
        let plan = make_sample_plan(&[f.clone(), g.clone()], stage).unwrap();
        let d_d = discretize(&f, &plan).distance(&discretize(&g, &plan));
        let shift = (d_d - f.distance(&g)).abs();
        prop_assert!(shift < rat(1, 1i64 << stage));
    }

    #[test]
    fn pl_json_round_trips(f in pl_function()) {
        prop_assert_eq!(pl_from_json(&pl_to_json(&f)).unwrap(), f);
    }

    #[test]
    fn discrete_json_round_trips(g in discrete_function()) {
        prop_assert_eq!(discrete_from_json(&discrete_to_json(&g)).unwrap(), g);
    }

    #[test]
    fn concat_extends_exactly(f in pl_function(), g in pl_function()) {
        let joined = f.concat(&g);
        prop_assert_eq!(joined.rho().clone(), f.rho() + g.rho());
        prop_assert_eq!(
            joined.evaluate(joined.rho()).unwrap(),
            f.evaluate(f.rho()).unwrap() + g.evaluate(g.rho()).unwrap()
        );
        // an extension agrees on all of the shorter domain
        prop_assert_eq!(f.segregation(&joined).moment, f.rho().clone());
        prop_assert_eq!(f.distance(&joined), g.rho().clone());
    }
}
