//! Seeded random generators for functions, point configurations, and finite
//! tree metrics. Everything runs off a ChaCha stream so a seed pins the
//! whole draw sequence on every platform.
//!
//! Pools are small rationals on purpose: segregation moments, Gromov
//! products, and slope ladders then stay exactly representable and cheap.

use std::f64::consts::PI;

use num_traits::Zero;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::embedding::TreeMetric;
use crate::hyperbolic::{PolarPoint, DIRECT_RHO_SUM_LIMIT};
use crate::tree::{DiscreteFunction, Knot, PlFunction};
use crate::{rat, Rational};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// slope pool includes the dyadic ladder values 0, 1/2, 3/4, 7/8 so the
// homogeneity isometry's interesting branch gets exercised
const SLOPES: &[(i64, i64)] = &[
    (0, 1),
    (1, 2),
    (-1, 2),
    (3, 4),
    (7, 8),
    (1, 1),
    (-1, 1),
    (2, 1),
    (-2, 1),
    (-3, 2),
];
const LENGTHS: &[(i64, i64)] = &[
    (1, 4),
    (1, 3),
    (1, 2),
    (2, 3),
    (3, 4),
    (1, 1),
    (3, 2),
    (2, 1),
];
const VALUES: &[(i64, i64)] = &[
    (1, 2),
    (-1, 2),
    (1, 1),
    (-1, 1),
    (3, 4),
    (-3, 4),
    (2, 1),
    (1, 4),
];

fn pick(rng: &mut ChaCha8Rng, pool: &[(i64, i64)]) -> Rational {
    let (n, d) = pool[rng.gen_range(0..pool.len())];
    rat(n, d)
}

fn segment(rng: &mut ChaCha8Rng) -> PlFunction {
    let slope = pick(rng, SLOPES);
    let length = pick(rng, LENGTHS);
    PlFunction::linear(slope, length).unwrap()
}

/// Random piecewise-linear function with up to `max_segments` pieces,
/// possibly the zero function.
pub fn pl_function(rng: &mut ChaCha8Rng, max_segments: usize) -> PlFunction {
    let n = rng.gen_range(0..=max_segments);
    let mut f = PlFunction::zero();
    for _ in 0..n {
        f = f.concat(&segment(rng));
    }
    f
}

/// `n` pairwise distinct functions, resampling collisions away.
pub fn distinct_pl_functions(
    rng: &mut ChaCha8Rng,
    n: usize,
    max_segments: usize,
) -> Vec<PlFunction> {
    let mut out: Vec<PlFunction> = Vec::with_capacity(n);
    while out.len() < n {
        let f = pl_function(rng, max_segments);
        if !out.contains(&f) {
            out.push(f);
        }
    }
    out
}

/// Triple for homogeneity checks: mixes independent draws with extension
/// chains sharing long prefixes, the stress case for the slope ladder.
pub fn homogeneity_triple(rng: &mut ChaCha8Rng) -> (PlFunction, PlFunction, PlFunction) {
    match rng.gen_range(0..4u8) {
        0 => (
            pl_function(rng, 4),
            pl_function(rng, 4),
            pl_function(rng, 4),
        ),
        1 => {
            let f0 = pl_function(rng, 3);
            let f = f0.concat(&segment(rng));
            let g = f.concat(&segment(rng));
            (f0, f, g)
        }
        2 => {
            let f0 = pl_function(rng, 3);
            let f = f0.concat(&segment(rng));
            let g = f0.concat(&segment(rng));
            (f0, f, g)
        }
        _ => {
            let f = pl_function(rng, 3);
            let f0 = f.concat(&segment(rng));
            (f0, f, pl_function(rng, 4))
        }
    }
}

/// Uniform dyadic rational `j/64` in `[0, 1]`.
pub fn unit_rational(rng: &mut ChaCha8Rng) -> Rational {
    rat(rng.gen_range(0..=64), 64)
}

/// Random finite-support function: dyadic support times strictly inside
/// `(0, rho)`, values from the nonzero pool.
pub fn discrete_function(rng: &mut ChaCha8Rng) -> DiscreteFunction {
    let rho = rat(rng.gen_range(8..=64), 16);
    let n = rng.gen_range(0..=4usize);
    let mut ticks: Vec<i64> = Vec::new();
    while ticks.len() < n {
        let t = rng.gen_range(1..16i64);
        if !ticks.contains(&t) {
            ticks.push(t);
        }
    }
    ticks.sort_unstable();
    let support = ticks
        .into_iter()
        .map(|j| Knot::new(&rho * rat(j, 16), pick(rng, VALUES)))
        .collect();
    DiscreteFunction::new(rho, support).unwrap()
}

// first-difference coefficient gaps bounded away from 0 and from 2: at
// gap 2 the witness angle difference degenerates (2 sin(c e^{-s/eps} / 2)
// loses its leading term) and the convergence order test has nothing to fit
const GAPS: &[(i64, i64)] = &[
    (1, 4),
    (-1, 4),
    (1, 2),
    (-1, 2),
    (3, 4),
    (-3, 4),
    (1, 1),
    (-1, 1),
    (5, 4),
    (-5, 4),
    (3, 2),
    (-3, 2),
    (7, 4),
    (-7, 4),
];

/// Pair of finite-support functions sharing a prefix and then branching
/// with a controlled first coefficient gap, the regime where the scaled
/// witness distance converges at clean first order.
pub fn branching_discrete_pair(rng: &mut ChaCha8Rng) -> (DiscreteFunction, DiscreteFunction) {
    let mut sup1 = Vec::new();
    let mut sup2 = Vec::new();
    let mut t = Rational::zero();
    for _ in 0..rng.gen_range(0..=2usize) {
        t += rat(rng.gen_range(1..=2), 4);
        let v = pick(rng, VALUES);
        sup1.push(Knot::new(t.clone(), v.clone()));
        sup2.push(Knot::new(t.clone(), v));
    }
    t += rat(rng.gen_range(1..=2), 4);
    let gap = pick(rng, GAPS);
    let (v1, v2) = loop {
        let v2 = pick(rng, VALUES);
        let v1 = &gap + &v2;
        if !v1.is_zero() {
            break (v1, v2);
        }
    };
    sup1.push(Knot::new(t.clone(), v1));
    sup2.push(Knot::new(t.clone(), v2));
    // independent single-knot tails keep the branch term dominant
    let mut finish = |sup: &mut Vec<Knot<Rational>>| {
        let mut end = t.clone();
        if rng.gen_bool(0.5) {
            end += rat(rng.gen_range(1..=2), 4);
            sup.push(Knot::new(end.clone(), pick(rng, VALUES)));
        }
        end + rat(rng.gen_range(1..=2), 4)
    };
    let rho1 = finish(&mut sup1);
    let rho2 = finish(&mut sup2);
    (
        DiscreteFunction::new(rho1, sup1).unwrap(),
        DiscreteFunction::new(rho2, sup2).unwrap(),
    )
}

const WEIGHTS: &[(i64, i64)] = &[
    (1, 4),
    (1, 2),
    (3, 4),
    (1, 1),
    (5, 4),
    (3, 2),
    (2, 1),
    (3, 1),
];

/// Exact distance matrix of a random edge-weighted tree on `n` vertices.
/// The generator is its own oracle: entries are sums of weights along the
/// unique paths, so the four-point condition holds by construction.
pub fn tree_metric(rng: &mut ChaCha8Rng, n: usize) -> TreeMetric {
    assert!(n >= 1);
    let mut rows = vec![vec![Rational::zero(); n]; n];
    for i in 1..n {
        let parent = rng.gen_range(0..i);
        let w = pick(rng, WEIGHTS);
        for j in 0..i {
            let d = &rows[parent][j] + &w;
            rows[i][j] = d.clone();
            rows[j][i] = d;
        }
    }
    TreeMetric::from_rows(rows).expect("path-length matrix is a tree metric")
}

/// Polar pair inside the window where f64 disk coordinates still resolve
/// distances to 1e-12 relative: moderate radii, angles separated by at
/// least 0.05.
pub fn moderate_polar_pair(rng: &mut ChaCha8Rng) -> (PolarPoint, PolarPoint) {
    // rho cap 10: disk coordinates lose ~e^rho * eps of 1 - r^2 to rounding,
    // which at rho 12 already grazes the 1e-12 agreement target.
    let rho1 = rng.gen_range(1e-3..10.0);
    let rho2 = rng.gen_range(1e-3..10.0);
    let phi1 = rng.gen_range(-PI..PI);
    let sep = rng.gen_range(0.05..PI);
    let phi2 = if rng.gen_bool(0.5) {
        phi1 + sep
    } else {
        phi1 - sep
    };
    (
        PolarPoint::new(rho1, phi1).unwrap(),
        PolarPoint::new(rho2, phi2).unwrap(),
    )
}

/// Single moderate polar point, for triple draws.
pub fn moderate_polar_point(rng: &mut ChaCha8Rng) -> PolarPoint {
    PolarPoint::new(rng.gen_range(1e-3..8.0), rng.gen_range(-PI..PI)).unwrap()
}

/// Polar pair in the regime where the direct distance path is admissible:
/// rho sum safely under the overflow cutoff, arbitrary angles.
pub fn overlap_polar_pair(rng: &mut ChaCha8Rng) -> (PolarPoint, PolarPoint) {
    let rho1 = rng.gen_range(0.0..200.0);
    let rho2 = rng.gen_range(0.0..(DIRECT_RHO_SUM_LIMIT - rho1).min(200.0));
    (
        PolarPoint::new(rho1, rng.gen_range(-PI..PI)).unwrap(),
        PolarPoint::new(rho2, rng.gen_range(-PI..PI)).unwrap(),
    )
}
