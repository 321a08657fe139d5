//! Piecewise-linear functions under the segregation metric, and their
//! discrete (finite-support) counterparts.
//!
//! A [`PlFunction`] is a continuous map `[0, rho] -> R` with `f(0) = 0`,
//! stored as breakpoints. Representations are normalized (first knot at the
//! origin, strictly increasing times, no collinear interior knot), so two
//! values compare equal exactly when they are the same function. Over an
//! exact scalar every derived quantity (segregation moment, distance,
//! geodesic point) is exact.
//!
//! The segregation distance walks back along the first function to the last
//! moment the two agree, then forward along the second:
//!
//! ```text
//! d(f1, f2) = (rho1 - s) + (rho2 - s)
//! ```
//!
//! where `s` is the supremum of times `t` with `f1 = f2` on `[0, t)`. This
//! makes the space a real tree: between any two points there is a unique
//! geodesic, obtained by shrinking the first function down to the common
//! prefix and growing it back out into the second.

use std::cmp::Ordering;

use thiserror::Error;

use crate::scalar::{cmp, max, min, Scalar};
use crate::Rational;

#[derive(Debug, Error)]
pub enum FunctionError {
    #[error("a function needs at least the origin breakpoint")]
    Empty,
    #[error("first breakpoint must be (0, 0)")]
    FirstNotOrigin,
    #[error("breakpoint times must be strictly increasing (violated at index {index})")]
    TimesNotIncreasing { index: usize },
    #[error("argument {value} outside domain [0, {rho}]")]
    OutOfDomain { value: String, rho: String },
    #[error("geodesic parameter outside [0, d(f1, f2)]")]
    OutsideGeodesicRange,
    #[error("support point {index} outside the open interval (0, rho)")]
    SupportOutOfRange { index: usize },
    #[error("support value {index} is zero; omit the point instead")]
    ZeroSupportValue { index: usize },
    #[error("rho must be nonnegative")]
    NegativeLength,
}

/// One breakpoint of a piecewise-linear function.
#[derive(Clone, Debug, PartialEq)]
pub struct Knot<T> {
    pub time: T,
    pub value: T,
}

impl<T> Knot<T> {
    pub fn new(time: T, value: T) -> Self {
        Knot { time, value }
    }
}

/// Interior knot lying on the segment through its neighbours carries no
/// information. Cross-multiplied so it stays division-free.
fn collinear<T: Scalar>(a: &Knot<T>, b: &Knot<T>, c: &Knot<T>) -> bool {
    let left = (b.value.clone() - a.value.clone()) * (c.time.clone() - b.time.clone());
    let right = (c.value.clone() - b.value.clone()) * (b.time.clone() - a.time.clone());
    left == right
}

/// Continuous piecewise-linear `f : [0, rho] -> R` with `f(0) = 0`.
///
/// The breakpoint list is kept normalized, which makes `==` coincide with
/// pointwise equality of functions.
#[derive(Clone, Debug, PartialEq)]
pub struct PlFunction<T = Rational> {
    knots: Vec<Knot<T>>,
}

/// How two functions relate at their segregation moment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SegRelation {
    /// Same function.
    Identical,
    /// The first strictly extends the second.
    FirstExtendsSecond,
    /// The second strictly extends the first.
    SecondExtendsFirst,
    /// Both continue past the moment with different slopes.
    Branch,
}

/// Segregation moment `s` plus how the pair separates there.
#[derive(Clone, Debug, PartialEq)]
pub struct Segregation<T> {
    pub moment: T,
    pub relation: SegRelation,
}

impl<T: Scalar> PlFunction<T> {
    /// Builds a function from its breakpoints, validating and normalizing.
    pub fn new(knots: Vec<Knot<T>>) -> Result<Self, FunctionError> {
        let first = knots.first().ok_or(FunctionError::Empty)?;
        if !first.time.is_zero() || !first.value.is_zero() {
            return Err(FunctionError::FirstNotOrigin);
        }
        for i in 1..knots.len() {
            if cmp(&knots[i - 1].time, &knots[i].time) != Ordering::Less {
                return Err(FunctionError::TimesNotIncreasing { index: i });
            }
        }
        Ok(PlFunction {
            knots: Self::normalize(knots),
        })
    }

    pub fn from_pairs<I>(pairs: I) -> Result<Self, FunctionError>
    where
        I: IntoIterator<Item = (T, T)>,
    {
        Self::new(pairs.into_iter().map(|(t, v)| Knot::new(t, v)).collect())
    }

    /// The zero-length function, root of the tree.
    pub fn zero() -> Self {
        PlFunction {
            knots: vec![Knot::new(T::zero(), T::zero())],
        }
    }

    /// `t -> slope * t` on `[0, length]`.
    pub fn linear(slope: T, length: T) -> Result<Self, FunctionError> {
        match cmp(&length, &T::zero()) {
            Ordering::Less => Err(FunctionError::NegativeLength),
            Ordering::Equal => Ok(Self::zero()),
            Ordering::Greater => Ok(PlFunction {
                knots: vec![
                    Knot::new(T::zero(), T::zero()),
                    Knot::new(length.clone(), slope * length),
                ],
            }),
        }
    }

    /// Collinearity against original neighbours is exactly the
    /// slope-in == slope-out test, which removing other redundant knots
    /// cannot change, so one pass suffices.
    fn normalize(knots: Vec<Knot<T>>) -> Vec<Knot<T>> {
        if knots.len() < 3 {
            return knots;
        }
        let mut keep = Vec::with_capacity(knots.len());
        keep.push(knots[0].clone());
        for i in 1..knots.len() - 1 {
            if !collinear(&knots[i - 1], &knots[i], &knots[i + 1]) {
                keep.push(knots[i].clone());
            }
        }
        keep.push(knots[knots.len() - 1].clone());
        keep
    }

    /// Right endpoint of the domain.
    pub fn rho(&self) -> &T {
        &self.knots.last().expect("normalized function is nonempty").time
    }

    pub fn breakpoints(&self) -> &[Knot<T>] {
        &self.knots
    }

    /// Value at the end of the domain.
    pub fn end_value(&self) -> &T {
        &self.knots.last().expect("normalized function is nonempty").value
    }

    pub fn evaluate(&self, t: &T) -> Result<T, FunctionError> {
        if cmp(t, &T::zero()) == Ordering::Less || cmp(t, self.rho()) == Ordering::Greater {
            return Err(FunctionError::OutOfDomain {
                value: t.to_string(),
                rho: self.rho().to_string(),
            });
        }
        // Index of the last knot with time <= t.
        let i = self.knots.partition_point(|k| cmp(&k.time, t) != Ordering::Greater) - 1;
        let a = &self.knots[i];
        if &a.time == t {
            return Ok(a.value.clone());
        }
        let b = &self.knots[i + 1];
        let dv = b.value.clone() - a.value.clone();
        let dt = b.time.clone() - a.time.clone();
        Ok(a.value.clone() + dv * (t.clone() - a.time.clone()) / dt)
    }

    /// Restriction to `[0, len]`.
    ///
    /// Truncating the final segment cannot create a collinear interior knot,
    /// so the result is normalized as built.
    pub fn restrict_prefix(&self, len: &T) -> Result<Self, FunctionError> {
        let end = self.evaluate(len)?;
        let mut knots: Vec<Knot<T>> = self
            .knots
            .iter()
            .take_while(|k| cmp(&k.time, len) == Ordering::Less)
            .cloned()
            .collect();
        knots.push(Knot::new(len.clone(), end));
        Ok(PlFunction { knots })
    }

    /// The tail `u -> f(from + u) - f(from)` on `[0, rho - from]`, itself a
    /// valid function (starts at the origin).
    pub fn suffix_at(&self, from: &T) -> Result<Self, FunctionError> {
        let base = self.evaluate(from)?;
        let mut knots = vec![Knot::new(T::zero(), T::zero())];
        for k in &self.knots {
            if cmp(&k.time, from) == Ordering::Greater {
                knots.push(Knot::new(
                    k.time.clone() - from.clone(),
                    k.value.clone() - base.clone(),
                ));
            }
        }
        Ok(PlFunction { knots })
    }

    /// `self` on `[0, rho]` continued by `suffix` translated to start where
    /// `self` ends. Renormalizes: the junction can be collinear.
    pub fn concat(&self, suffix: &Self) -> Self {
        let t0 = self.rho().clone();
        let v0 = self.end_value().clone();
        let mut knots = self.knots.clone();
        for k in suffix.knots.iter().skip(1) {
            knots.push(Knot::new(t0.clone() + k.time.clone(), v0.clone() + k.value.clone()));
        }
        PlFunction {
            knots: Self::normalize(knots),
        }
    }

    /// `t -> f(t) + slope * t`. Preserves normalization: both neighbour
    /// slopes at a knot shift by the same amount.
    pub fn add_linear(&self, slope: &T) -> Self {
        PlFunction {
            knots: self
                .knots
                .iter()
                .map(|k| Knot::new(k.time.clone(), k.value.clone() + slope.clone() * k.time.clone()))
                .collect(),
        }
    }

    /// Slope of the first segment, `None` for the zero-length function.
    pub fn initial_slope(&self) -> Option<T> {
        let b = self.knots.get(1)?;
        let a = &self.knots[0];
        Some((b.value.clone() - a.value.clone()) / (b.time.clone() - a.time.clone()))
    }

    /// Segregation moment of the pair and the way they part.
    ///
    /// Walks both breakpoint lists in lockstep comparing slopes on the
    /// current common segment; slope equality is tested cross-multiplied.
    /// Values never need comparing: agreement of slopes on `[0, cur)` plus
    /// continuity pins the values at `cur`.
    pub fn segregation(&self, other: &Self) -> Segregation<T> {
        let min_rho = min(self.rho().clone(), other.rho().clone());
        let mut cur = T::zero();
        let mut i = 0;
        let mut j = 0;
        while cmp(&cur, &min_rho) == Ordering::Less {
            while cmp(&self.knots[i + 1].time, &cur) != Ordering::Greater {
                i += 1;
            }
            while cmp(&other.knots[j + 1].time, &cur) != Ordering::Greater {
                j += 1;
            }
            let da = self.knots[i + 1].value.clone() - self.knots[i].value.clone();
            let ta = self.knots[i + 1].time.clone() - self.knots[i].time.clone();
            let db = other.knots[j + 1].value.clone() - other.knots[j].value.clone();
            let tb = other.knots[j + 1].time.clone() - other.knots[j].time.clone();
            if da * tb != db * ta {
                return Segregation {
                    moment: cur,
                    relation: SegRelation::Branch,
                };
            }
            cur = min(
                self.knots[i + 1].time.clone(),
                other.knots[j + 1].time.clone(),
            );
        }
        let relation = match cmp(self.rho(), other.rho()) {
            Ordering::Equal => SegRelation::Identical,
            Ordering::Less => SegRelation::SecondExtendsFirst,
            Ordering::Greater => SegRelation::FirstExtendsSecond,
        };
        Segregation {
            moment: min_rho,
            relation,
        }
    }

    /// Segregation distance `(rho1 - s) + (rho2 - s)`.
    pub fn distance(&self, other: &Self) -> T {
        let s = self.segregation(other).moment;
        self.rho().clone() - s.clone() + other.rho().clone() - s
    }
}

/// Point at arc length `x` along the geodesic from `f1` to `f2`.
///
/// The path first shrinks `f1` back to the common prefix at `s`, then grows
/// out along `f2`:
///
/// * `x in [0, rho1 - s]`: `f1` restricted to `[0, rho1 - x]`
/// * `x in [rho1 - s, d]`: `f2` restricted to `[0, x + 2s - rho1]`
pub fn geodesic_point<T: Scalar>(
    f1: &PlFunction<T>,
    f2: &PlFunction<T>,
    x: &T,
) -> Result<PlFunction<T>, FunctionError> {
    let s = f1.segregation(f2).moment;
    let d = f1.rho().clone() - s.clone() + f2.rho().clone() - s.clone();
    if cmp(x, &T::zero()) == Ordering::Less || cmp(x, &d) == Ordering::Greater {
        return Err(FunctionError::OutsideGeodesicRange);
    }
    let descent = f1.rho().clone() - s.clone();
    if cmp(x, &descent) != Ordering::Greater {
        f1.restrict_prefix(&(f1.rho().clone() - x.clone()))
    } else {
        let len = x.clone() + s.clone() + s - f1.rho().clone();
        f2.restrict_prefix(&len)
    }
}

/// `d12 + d34 - max(d13 + d24, d14 + d23)`, nonpositive exactly when the
/// quadruple satisfies the four-point condition with `(1,2 | 3,4)` as the
/// split pairing.
pub fn four_point_defect<T: Scalar>(
    f1: &PlFunction<T>,
    f2: &PlFunction<T>,
    f3: &PlFunction<T>,
    f4: &PlFunction<T>,
) -> T {
    let d12 = f1.distance(f2);
    let d34 = f3.distance(f4);
    let d13 = f1.distance(f3);
    let d24 = f2.distance(f4);
    let d14 = f1.distance(f4);
    let d23 = f2.distance(f3);
    d12 + d34 - max(d13 + d24, d14 + d23)
}

/// Finitely supported `f : [0, rho) -> R`: zero everywhere except at the
/// listed support times. Same segregation metric, with the moment capped at
/// the shorter domain.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteFunction<T = Rational> {
    rho: T,
    support: Vec<Knot<T>>,
}

impl<T: Scalar> DiscreteFunction<T> {
    /// Support times must be strictly increasing inside the open interval
    /// `(0, rho)` and carry nonzero values.
    pub fn new(rho: T, support: Vec<Knot<T>>) -> Result<Self, FunctionError> {
        if cmp(&rho, &T::zero()) == Ordering::Less {
            return Err(FunctionError::NegativeLength);
        }
        for (index, k) in support.iter().enumerate() {
            if cmp(&k.time, &T::zero()) != Ordering::Greater
                || cmp(&k.time, &rho) != Ordering::Less
            {
                return Err(FunctionError::SupportOutOfRange { index });
            }
            if k.value.is_zero() {
                return Err(FunctionError::ZeroSupportValue { index });
            }
            if index > 0 && cmp(&support[index - 1].time, &k.time) != Ordering::Less {
                return Err(FunctionError::TimesNotIncreasing { index });
            }
        }
        Ok(DiscreteFunction { rho, support })
    }

    pub fn zero(rho: T) -> Result<Self, FunctionError> {
        Self::new(rho, Vec::new())
    }

    pub fn rho(&self) -> &T {
        &self.rho
    }

    pub fn support(&self) -> &[Knot<T>] {
        &self.support
    }

    /// Value at `t`; the domain is half-open, `t = rho` is already outside.
    pub fn value_at(&self, t: &T) -> Result<T, FunctionError> {
        if cmp(t, &T::zero()) == Ordering::Less || cmp(t, &self.rho) != Ordering::Less {
            return Err(FunctionError::OutOfDomain {
                value: t.to_string(),
                rho: self.rho.to_string(),
            });
        }
        Ok(self
            .support
            .iter()
            .find(|k| &k.time == t)
            .map(|k| k.value.clone())
            .unwrap_or_else(T::zero))
    }

    /// First time the two assignments differ, capped at the shorter domain.
    pub fn segregation_moment(&self, other: &Self) -> T {
        let min_rho = min(self.rho.clone(), other.rho.clone());
        let mut i = 0;
        let mut j = 0;
        while i < self.support.len() || j < other.support.len() {
            let ti = self.support.get(i).map(|k| &k.time);
            let tj = other.support.get(j).map(|k| &k.time);
            let (t, va, vb) = match (ti, tj) {
                (Some(a), Some(b)) => match cmp(a, b) {
                    Ordering::Less => {
                        let t = a.clone();
                        i += 1;
                        (t, self.support[i - 1].value.clone(), T::zero())
                    }
                    Ordering::Greater => {
                        let t = b.clone();
                        j += 1;
                        (t, T::zero(), other.support[j - 1].value.clone())
                    }
                    Ordering::Equal => {
                        let t = a.clone();
                        i += 1;
                        j += 1;
                        (
                            t,
                            self.support[i - 1].value.clone(),
                            other.support[j - 1].value.clone(),
                        )
                    }
                },
                (Some(a), None) => {
                    let t = a.clone();
                    i += 1;
                    (t, self.support[i - 1].value.clone(), T::zero())
                }
                (None, Some(b)) => {
                    let t = b.clone();
                    j += 1;
                    (t, T::zero(), other.support[j - 1].value.clone())
                }
                (None, None) => break,
            };
            if cmp(&t, &min_rho) != Ordering::Less {
                break;
            }
            if va != vb {
                return t;
            }
        }
        min_rho
    }

    pub fn distance(&self, other: &Self) -> T {
        let s = self.segregation_moment(other);
        self.rho.clone() - s.clone() + other.rho.clone() - s
    }
}
