//! The base-point-moving self-isometry of the function tree.
//!
//! `homogenize(f0, f)` sends `f` to a function at distance `d(f0, f)` from
//! the zero-length root, and does so isometrically in `f`: every pairwise
//! distance is preserved exactly. With `a` the segregation moment of
//! `(f0, f)`, the image is
//!
//! ```text
//! zero on [0, rho0 - a]  followed by  Ladder(suffix of f at a)
//! ```
//!
//! so the base's leftover tail `[a, rho0]` becomes a run of zeros and the
//! departure tail of `f` is glued on after it. A plain glue would not be
//! injective: tails that begin with slope 0 would extend the zero run and
//! collide with images of base prefixes. The ladder repairs this. Writing
//! `s_n = (2^n - 1)/2^n` for the dyadic slope chain `0 = s_0 < s_1 < ... ->
//! 1`, a tail starting with slope `s_n` gets `t * 2^-(n+1)` added, moving
//! its initial slope to exactly `s_{n+1}`; all other tails pass through
//! unchanged. The map on initial slopes stays injective (the chain shifts
//! into itself, everything else is fixed), no output tail begins with slope
//! 0, and adding a shared linear function never changes a segregation
//! moment, so distances survive.

use crate::scalar::{cmp, Scalar};
use crate::tree::PlFunction;
use std::cmp::Ordering;

/// `(2^n - 1) / 2^n`, the n-th slope of the dyadic chain climbing to 1.
pub fn g_slope<T: Scalar>(n: u32) -> T {
    let mut pow = T::one();
    let two = T::one() + T::one();
    for _ in 0..n {
        pow = pow * two.clone();
    }
    (pow.clone() - T::one()) / pow
}

/// Linear function of slope [`g_slope`]`(n)` on `[0, length]`. `n = 0`
/// gives the constant zero.
pub fn g_function<T: Scalar>(n: u32, length: T) -> Result<PlFunction<T>, crate::tree::FunctionError> {
    PlFunction::linear(g_slope(n), length)
}

/// `Some(n)` when `slope == (2^n - 1) / 2^n` exactly.
///
/// Doubles the residual `1 - slope` until it reaches or overshoots 1;
/// hitting 1 exactly after n doublings identifies `slope = g_slope(n)`.
fn ladder_index<T: Scalar>(slope: &T) -> Option<u32> {
    let one = T::one();
    if cmp(slope, &T::zero()) == Ordering::Less || cmp(slope, &one) != Ordering::Less {
        return None;
    }
    let two = one.clone() + one.clone();
    let mut residual = one.clone() - slope.clone();
    let mut n = 0u32;
    loop {
        match cmp(&residual, &one) {
            Ordering::Equal => return Some(n),
            Ordering::Greater => return None,
            Ordering::Less => {
                residual = residual * two.clone();
                n += 1;
            }
        }
    }
}

/// Shifts a tail whose first slope sits on the dyadic chain one rung up.
fn ladder<T: Scalar>(tail: &PlFunction<T>) -> PlFunction<T> {
    let Some(first) = tail.initial_slope() else {
        return tail.clone();
    };
    match ladder_index(&first) {
        Some(n) => {
            // g_slope(n+1) - g_slope(n) = 2^-(n+1).
            let mut step = T::one();
            let two = T::one() + T::one();
            for _ in 0..(n + 1) {
                step = step / two.clone();
            }
            tail.add_linear(&step)
        }
        None => tail.clone(),
    }
}

/// Image of `f` under the isometry taking `f0` to the root.
pub fn homogenize<T: Scalar>(f0: &PlFunction<T>, f: &PlFunction<T>) -> PlFunction<T> {
    let a = f0.segregation(f).moment;
    let zeros_len = f0.rho().clone() - a.clone();
    let zeros = PlFunction::linear(T::zero(), zeros_len).expect("moment bounded by rho");
    let tail = f.suffix_at(&a).expect("moment bounded by rho");
    zeros.concat(&ladder(&tail))
}

/// `|d(homogenize(f0, f), homogenize(f0, g)) - d(f, g)|`; zero witnesses
/// that the isometry preserved this pair.
pub fn homogenize_pairwise_check<T: Scalar>(
    f0: &PlFunction<T>,
    f: &PlFunction<T>,
    g: &PlFunction<T>,
) -> T {
    let hf = homogenize(f0, f);
    let hg = homogenize(f0, g);
    (hf.distance(&hg) - f.distance(g)).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{rat, Rational};

    fn pl(pairs: &[(i64, i64)]) -> PlFunction<Rational> {
        PlFunction::from_pairs(
            pairs
                .iter()
                .map(|&(t, v)| (Rational::from_integer(t.into()), Rational::from_integer(v.into()))),
        )
        .unwrap()
    }

    #[test]
    fn g_slopes() {
        assert_eq!(g_slope::<Rational>(0), rat(0, 1));
        assert_eq!(g_slope::<Rational>(1), rat(1, 2));
        assert_eq!(g_slope::<Rational>(2), rat(3, 4));
        assert_eq!(g_slope::<Rational>(3), rat(7, 8));
    }

    #[test]
    fn g_functions_segregate_at_zero() {
        let len = rat(2, 1);
        let g1 = g_function(1, len.clone()).unwrap();
        assert_eq!(
            g1,
            PlFunction::from_pairs(vec![(rat(0, 1), rat(0, 1)), (rat(2, 1), rat(1, 1))]).unwrap()
        );
        for m in 0..4u32 {
            for n in 0..4u32 {
                if m != n {
                    let gm = g_function::<Rational>(m, len.clone()).unwrap();
                    let gn = g_function(n, len.clone()).unwrap();
                    assert_eq!(gm.segregation(&gn).moment, rat(0, 1));
                }
            }
        }
    }

    #[test]
    fn ladder_index_detection() {
        assert_eq!(ladder_index(&rat(0, 1)), Some(0));
        assert_eq!(ladder_index(&rat(1, 2)), Some(1));
        assert_eq!(ladder_index(&rat(3, 4)), Some(2));
        assert_eq!(ladder_index(&rat(7, 8)), Some(3));
        assert_eq!(ladder_index(&rat(1, 1)), None);
        assert_eq!(ladder_index(&rat(2, 1)), None);
        assert_eq!(ladder_index(&rat(2, 3)), None);
        assert_eq!(ladder_index(&rat(-1, 2)), None);
        assert_eq!(ladder_index(&rat(5, 8)), None);
    }

    #[test]
    fn base_maps_to_root() {
        let f0 = pl(&[(0, 0), (1, 1), (3, -2)]);
        assert_eq!(homogenize(&f0, &f0), PlFunction::zero());
    }

    #[test]
    fn branching_departure_is_shifted_past_the_zero_run() {
        // Base is the identity on [0, 2]; f leaves at 0 with slope 2.
        let f0 = pl(&[(0, 0), (2, 2)]);
        let f = pl(&[(0, 0), (1, 2)]);
        let image = homogenize(&f0, &f);
        assert_eq!(
            image,
            PlFunction::from_pairs(vec![
                (rat(0, 1), rat(0, 1)),
                (rat(2, 1), rat(0, 1)),
                (rat(3, 1), rat(2, 1)),
            ])
            .unwrap()
        );
        assert_eq!(image.rho(), &f0.distance(&f));
    }

    #[test]
    fn extension_by_non_chain_slope_passes_through() {
        let f0 = pl(&[(0, 0), (1, 1)]);
        let f = pl(&[(0, 0), (2, 2)]);
        // Tail is slope 1, not on the dyadic chain.
        assert_eq!(
            homogenize(&f0, &f),
            PlFunction::from_pairs(vec![(rat(0, 1), rat(0, 1)), (rat(1, 1), rat(1, 1))]).unwrap()
        );
    }

    #[test]
    fn constant_extension_climbs_to_the_first_rung() {
        let f0 = pl(&[(0, 0), (1, 1)]);
        let f = pl(&[(0, 0), (1, 1), (2, 1)]);
        // Tail is constant zero, slope g_0; the ladder lifts it to t/2.
        assert_eq!(
            homogenize(&f0, &f),
            PlFunction::from_pairs(vec![(rat(0, 1), rat(0, 1)), (rat(1, 1), rat(1, 2))]).unwrap()
        );
    }

    #[test]
    fn image_length_equals_distance_to_base() {
        let f0 = pl(&[(0, 0), (2, 2), (3, 1)]);
        for f in [
            pl(&[(0, 0), (1, 1), (2, 4)]),
            pl(&[(0, 0), (4, 4)]),
            PlFunction::zero(),
            f0.clone(),
        ] {
            assert_eq!(homogenize(&f0, &f).rho(), &f0.distance(&f));
        }
    }

    #[test]
    fn chain_slope_departures_stay_isometric() {
        // f departs the base's interior at moment 1 with a constant tail; g
        // is a bare prefix of the base ending below that moment. A glue
        // without the ladder would send f to the all-zero function of
        // length 3/2, colliding with the image of the length-1/2 prefix and
        // shrinking this pair's distance from 3/4 to 1/4.
        let f0 = pl(&[(0, 0), (2, 2)]);
        let f = PlFunction::from_pairs(vec![
            (rat(0, 1), rat(0, 1)),
            (rat(1, 1), rat(1, 1)),
            (rat(3, 2), rat(1, 1)),
        ])
        .unwrap();
        let g = f0.restrict_prefix(&rat(3, 4)).unwrap();
        assert_eq!(f.distance(&g), rat(3, 4));
        assert_eq!(homogenize_pairwise_check(&f0, &f, &g), rat(0, 1));
        assert_eq!(
            homogenize(&f0, &f).distance(&homogenize(&f0, &g)),
            rat(3, 4)
        );
    }

    #[test]
    fn full_dyadic_extensions_stay_isometric() {
        // f, g, h all extend the base: two chain slopes and one slope past
        // the chain. Rung shifts must keep all three images distinct; in
        // particular f's lifted tail (1/2 -> 3/4) must not land on g's
        // unlifted start, nor may any lift reach h's slope 5/4.
        let f0 = pl(&[(0, 0), (1, 1)]);
        let f = f0.concat(&PlFunction::linear(rat(1, 2), rat(1, 1)).unwrap());
        let g = f0.concat(&PlFunction::linear(rat(3, 4), rat(1, 1)).unwrap());
        let h = f0.concat(&PlFunction::linear(rat(5, 4), rat(1, 1)).unwrap());
        for (x, y) in [(&f, &g), (&f, &h), (&g, &h)] {
            assert_eq!(homogenize_pairwise_check(&f0, x, y), rat(0, 1));
            assert_ne!(homogenize(&f0, x), homogenize(&f0, y));
        }
    }

    #[test]
    fn pairwise_check_on_mixed_triples() {
        let f0 = pl(&[(0, 0), (2, 2), (4, 0)]);
        let fns = [
            PlFunction::zero(),
            f0.clone(),
            f0.restrict_prefix(&rat(3, 1)).unwrap(),
            f0.concat(&PlFunction::linear(rat(1, 2), rat(2, 1)).unwrap()),
            f0.concat(&PlFunction::linear(rat(0, 1), rat(1, 1)).unwrap()),
            pl(&[(0, 0), (1, -1), (2, 0)]),
            pl(&[(0, 0), (3, 3)]),
        ];
        for f in &fns {
            for g in &fns {
                assert_eq!(homogenize_pairwise_check(&f0, f, g), rat(0, 1));
            }
        }
    }
}
