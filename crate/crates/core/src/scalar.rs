//! Scalar abstraction shared by the geometric core.

use std::cmp::Ordering;
use std::fmt;

use num_traits::{Num, Signed};

/// Numbers the tree machinery can work over: ordered field operations,
/// sign queries, printing. Satisfied by `BigRational`, `f64`, `f32`.
///
/// `PartialOrd` rather than `Ord` so floats qualify; the crate never feeds
/// NaN into comparisons and panics if one shows up.
pub trait Scalar: Num + Signed + PartialOrd + Clone + fmt::Debug + fmt::Display {}

impl<T> Scalar for T where T: Num + Signed + PartialOrd + Clone + fmt::Debug + fmt::Display {}

/// Total comparison for scalars. Panics on incomparable values (NaN).
pub(crate) fn cmp<T: Scalar>(a: &T, b: &T) -> Ordering {
    a.partial_cmp(b).expect("scalar comparison failed: NaN?")
}

/// `max` via [`cmp`].
pub(crate) fn max<T: Scalar>(a: T, b: T) -> T {
    if cmp(&a, &b) == Ordering::Less {
        b
    } else {
        a
    }
}

/// `min` via [`cmp`].
pub(crate) fn min<T: Scalar>(a: T, b: T) -> T {
    if cmp(&a, &b) == Ordering::Greater {
        b
    } else {
        a
    }
}
