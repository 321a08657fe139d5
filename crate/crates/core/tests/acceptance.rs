//! End-to-end acceptance runs: each test exercises one certified claim at
//! its stated tolerance and prints a one-line summary.

use std::time::Instant;

use num_traits::{Signed, Zero};
use rand::Rng;

use treecone::hyperbolic::{ConvergenceReport, EpsilonSchedule};
use treecone::sampling;
use treecone::selftest::{self, Inject};
use treecone::tree::{four_point_defect, geodesic_point, PlFunction};
use treecone::{
    brush, completion_stages, discrete_from_json, discrete_to_json, disk_distance, embed_discrete,
    homogenize, homogenize_pairwise_check, pl_from_json, pl_to_json, polar_distance,
    polar_distance_logdomain, rat, rho_to_r, run_all_stages, verify_embedding, CauchyChain,
    Rational, SlopeSchedule,
};

fn rat_f64(x: &Rational) -> f64 {
    num_traits::ToPrimitive::to_f64(x).unwrap()
}

#[test]
fn criterion_01_metric_axioms() {
    let mut rng = sampling::rng(101);
    for _ in 0..1000 {
        let f = sampling::pl_function(&mut rng, 5);
        let g = sampling::pl_function(&mut rng, 5);
        let h = sampling::pl_function(&mut rng, 5);
        let fg = f.distance(&g);
        assert_eq!(fg, g.distance(&f));
        assert!(fg >= Rational::zero());
        assert_eq!(fg.is_zero(), f == g);
        assert!(f.distance(&f).is_zero());
        assert!(fg <= f.distance(&h) + h.distance(&g));
    }
    println!("PASS criterion 1: metric axioms hold exactly on 1000 random triples");
}

#[test]
fn criterion_02_geodesic_isometry() {
    let mut rng = sampling::rng(102);
    for _ in 0..500 {
        let f = sampling::pl_function(&mut rng, 5);
        let g = sampling::pl_function(&mut rng, 5);
        let d = f.distance(&g);
        let x = &d * sampling::unit_rational(&mut rng);
        let y = &d * sampling::unit_rational(&mut rng);
        let px = geodesic_point(&f, &g, &x).unwrap();
        let py = geodesic_point(&f, &g, &y).unwrap();
        assert_eq!(px.distance(&py), (&x - &y).abs());
    }
    println!("PASS criterion 2: geodesic parameterization is an exact isometry on 500 draws");
}

#[test]
fn criterion_03_four_point_condition() {
    let mut rng = sampling::rng(103);
    for _ in 0..1000 {
        let f1 = sampling::pl_function(&mut rng, 4);
        let f2 = sampling::pl_function(&mut rng, 4);
        let f3 = sampling::pl_function(&mut rng, 4);
        let f4 = sampling::pl_function(&mut rng, 4);
        // all three pairings of the quadruple
        assert!(four_point_defect(&f1, &f2, &f3, &f4) <= Rational::zero());
        assert!(four_point_defect(&f1, &f3, &f2, &f4) <= Rational::zero());
        assert!(four_point_defect(&f1, &f4, &f2, &f3) <= Rational::zero());
    }
    println!("PASS criterion 3: four-point defect nonpositive on 1000 quadruples, all pairings");
}

#[test]
fn criterion_04_brush_embedding() {
    let mut rng = sampling::rng(104);
    let mut slowest = 0.0f64;
    for _ in 0..100 {
        let n = rng.gen_range(1..=64);
        let metric = sampling::tree_metric(&mut rng, n);
        let started = Instant::now();
        let fns = brush(&metric, &SlopeSchedule::naturals(n.saturating_sub(1))).unwrap();
        let worst = verify_embedding(&metric, &fns).unwrap();
        let elapsed = started.elapsed().as_secs_f64();
        slowest = slowest.max(elapsed);
        assert!(worst.is_zero());
        assert!(elapsed < 1.0, "tree with n={n} took {elapsed:.3}s");
        if n == 1 {
            assert_eq!(fns, vec![PlFunction::zero()]);
        }
    }
    println!(
        "PASS criterion 4: 100 brushed tree metrics embed exactly, slowest {slowest:.3}s (< 1s)"
    );
}

#[test]
fn criterion_05_homogeneity() {
    let mut rng = sampling::rng(105);
    for _ in 0..1000 {
        let (f0, f, g) = sampling::homogeneity_triple(&mut rng);
        assert!(homogenize_pairwise_check(&f0, &f, &g).is_zero());
        assert_eq!(homogenize(&f0, &f0), PlFunction::zero());
    }
    println!("PASS criterion 5: homogeneity isometry exact on 1000 triples with extension chains");
}

#[test]
fn criterion_06_discrete_embedding() {
    let mut rng = sampling::rng(106);
    for _ in 0..500 {
        let g1 = sampling::discrete_function(&mut rng);
        let g2 = sampling::discrete_function(&mut rng);
        assert_eq!(
            embed_discrete(&g1).distance(&embed_discrete(&g2)),
            g1.distance(&g2)
        );
    }
    println!("PASS criterion 6: discrete-to-continuous embedding preserves 500 pair distances exactly");
}

#[test]
fn criterion_07_hyperbolic_oracles() {
    let mut rng = sampling::rng(107);
    let mut worst_disk = 0.0f64;
    for _ in 0..10_000 {
        let (p, q) = sampling::moderate_polar_pair(&mut rng);
        let dp = polar_distance(&p, &q).unwrap();
        let x1 = num_complex::Complex64::from_polar(rho_to_r(p.rho()), p.phi());
        let x2 = num_complex::Complex64::from_polar(rho_to_r(q.rho()), q.phi());
        let dd = disk_distance(x1, x2).unwrap();
        let rel = (dp - dd).abs() / dd;
        worst_disk = worst_disk.max(rel);
    }
    assert!(worst_disk <= 1e-12, "disk vs polar relative error {worst_disk:e}");

    let mut worst_overlap = 0.0f64;
    for _ in 0..10_000 {
        let (p, q) = sampling::overlap_polar_pair(&mut rng);
        let direct = polar_distance(&p, &q).unwrap();
        let logged = polar_distance_logdomain(&p, &q);
        let rel = (direct - logged).abs() / direct.max(1e-300);
        worst_overlap = worst_overlap.max(rel);
    }
    assert!(worst_overlap <= 1e-9, "path overlap relative error {worst_overlap:e}");
    println!(
        "PASS criterion 7: polar vs disk within 1e-12 ({worst_disk:.2e}) and log vs direct within 1e-9 ({worst_overlap:.2e}) on 10000 pairs each"
    );
}

#[test]
fn criterion_08_witness_convergence() {
    let mut rng = sampling::rng(108);
    let schedule = EpsilonSchedule::dyadic(4, 20);
    let mut worst_final = 0.0f64;
    let mut worst_order = f64::INFINITY;
    for _ in 0..50 {
        let (g1, g2) = sampling::branching_discrete_pair(&mut rng);
        let report = ConvergenceReport::from_pair(&g1, &g2, &schedule);
        assert!(report.non_increasing_after(4), "error grew after burn-in");
        let final_error = report.final_error();
        assert!(final_error <= 1e-3, "final error {final_error:e}");
        let order = report.fitted_order();
        assert!(order >= 0.8, "fitted order {order}");
        worst_final = worst_final.max(final_error);
        worst_order = worst_order.min(order);
    }
    println!(
        "PASS criterion 8: 50 convergence runs non-increasing after burn-in, final error <= {worst_final:.2e}, order >= {worst_order:.3}"
    );
}

#[test]
fn criterion_09_stage_envelope() {
    let mut rng = sampling::rng(109);
    let schedule = EpsilonSchedule::dyadic(1, 60);
    for _ in 0..20 {
        let n = rng.gen_range(2..=5);
        let fs = sampling::distinct_pl_functions(&mut rng, n, 4);
        let records = run_all_stages(&fs, 8, &schedule).unwrap();
        assert_eq!(records.len(), 8);
        for record in &records {
            let bound = rat_f64(&record.bound);
            for pair in &record.pairs {
                assert!(
                    pair.err_vs_s < bound,
                    "stage {} pair ({},{}) error {:e} vs bound {bound:e}",
                    record.stage,
                    pair.k1,
                    pair.k2,
                    pair.err_vs_s
                );
            }
        }
    }
    println!("PASS criterion 9: stage errors stay under 1/2^(N-1) for 20 random sets, N = 1..8");
}

#[test]
fn criterion_10_cauchy_completion() {
    let chain = CauchyChain::dyadic_zigzag();
    for k in 0..20u32 {
        for m in (k + 1)..=20 {
            let want = rat(1, 1 << k) - rat(1, 1 << m);
            assert_eq!(chain.distance(k, m), want);
            assert_eq!(chain.function(k).distance(&chain.function(m)), want);
        }
    }
    let chains = [
        CauchyChain::dyadic_zigzag(),
        CauchyChain::new(PlFunction::zero(), rat(2, 1)).unwrap(),
    ];
    let records = completion_stages(&chains, 6, &EpsilonSchedule::dyadic(1, 60)).unwrap();
    for record in &records {
        let bound = rat_f64(&record.bound);
        for pair in &record.pairs {
            assert!(pair.error < bound, "round {} error {:e}", record.stage, pair.error);
        }
    }
    println!(
        "PASS criterion 10: chain distances exact for k < m <= 20; completion envelope holds for r = 1..6"
    );
}

#[test]
fn criterion_11_round_trip_and_determinism() {
    let mut rng = sampling::rng(111);
    for _ in 0..250 {
        let f = sampling::pl_function(&mut rng, 5);
        assert_eq!(pl_from_json(&pl_to_json(&f)).unwrap(), f);
        let g = sampling::discrete_function(&mut rng);
        assert_eq!(discrete_from_json(&discrete_to_json(&g)).unwrap(), g);
    }
    let (report1, ok1) = selftest::run(0, Inject::None);
    let (report2, ok2) = selftest::run(0, Inject::None);
    assert!(ok1 && ok2);
    assert_eq!(report1.into_bytes(), report2.into_bytes());
    println!(
        "PASS criterion 11: 500 serialization round trips exact; repeated selftest byte-identical"
    );
}
