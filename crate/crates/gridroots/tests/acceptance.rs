//! Acceptance suite. One test per criterion, numbered; each prints its own
//! pass/fail line through the harness.

mod common;

use std::time::Instant;

use gridroots::classify::{self, REAL_TOL};
use gridroots::eliminant;
use gridroots::monodromy::{self, MonodromyConfig, ParamFamily, Slice};
use gridroots::net::{Bus, Line};
use gridroots::survey::{self, SurveyConfig};
use gridroots::track::{self, LinearHomotopy, PathStatus};
use gridroots::{bezout_bound, complex_bound, HomotopyConfig, PowerSystem};
use num_bigint::BigUint;

use common::{fourbus, witness, QUARTIC_DESC, SEXTIC_DESC, WITNESS_B, WITNESS_REAL};

fn solve(ps: &PowerSystem, seed: u64) -> gridroots::track::SolutionSet {
    let sys = ps.build_system().unwrap();
    track::solve_all(&sys, &HomotopyConfig::from_seed(seed)).unwrap()
}

#[test]
fn c01_witness_counts_and_coordinates() {
    let t0 = Instant::now();
    let ps = witness();
    let ss = solve(&ps, 0);
    let cls = classify::split_real(&ss, REAL_TOL).unwrap();
    let elapsed = t0.elapsed();

    assert_eq!(ss.solutions.len(), 20, "distinct complex solutions");
    assert!(ss.multiplicities.iter().all(|&m| m == 1));
    assert_eq!(cls.real.len(), 16, "real solutions");
    let (trivial, _) = classify::split_trivial(&ps, &cls.real);
    assert_eq!(trivial.len(), 8, "trivial solutions");

    // row <-> solution bijection within 1e-4
    let mut used = [false; 16];
    for row in &WITNESS_REAL {
        let hits: Vec<usize> = cls
            .real
            .iter()
            .enumerate()
            .filter(|(_, s)| s.iter().zip(row).all(|(a, b)| (a - b).abs() <= 1e-4))
            .map(|(i, _)| i)
            .collect();
        assert_eq!(hits.len(), 1, "row {row:?} must match exactly one solution");
        assert!(!used[hits[0]], "solution claimed twice");
        used[hits[0]] = true;
    }
    assert!(used.iter().all(|&u| u));
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
}

#[test]
fn c02_sextic_coefficients_and_counts() {
    let ps = witness();
    let ss = solve(&ps, 0);
    let direct = classify::split_real(&ss, REAL_TOL).unwrap().real.len();
    let rep = eliminant::count_real_via_eliminant(&ps, &ss).unwrap();

    let coeffs = rep.poly.coeffs_f64_descending();
    assert_eq!(coeffs.len(), SEXTIC_DESC.len());
    for (got, want) in coeffs.iter().zip(&SEXTIC_DESC) {
        assert!(
            (got - want).abs() <= 5e-5,
            "coefficient {got} vs {want}"
        );
    }
    assert_eq!(rep.counts.descartes_max, 4);
    assert_eq!(rep.counts.sturm_positive, 4);
    assert_eq!(rep.real_count, 16);
    assert_eq!(rep.real_count, direct);
}

#[test]
fn c03_open_line_quartic() {
    let mut b = WITNESS_B;
    b[0] = 0.0;
    let ps = fourbus(b);
    let ss = solve(&ps, 0);
    assert_eq!(ss.solutions.len(), 16, "complex solutions with b12 = 0");
    assert!(ss.multiplicities.iter().all(|&m| m == 1));

    let rep = eliminant::count_real_via_eliminant(&ps, &ss).unwrap();
    let coeffs = rep.poly.coeffs_f64_descending();
    assert_eq!(coeffs.len(), QUARTIC_DESC.len());
    for (got, want) in coeffs.iter().zip(&QUARTIC_DESC) {
        assert!(
            (got - want).abs() <= 5e-4,
            "coefficient {got} vs {want}"
        );
    }
    assert_eq!(rep.counts.sturm_positive, 4, "all quartic roots positive");
    assert_eq!(rep.real_count, 16);
    assert_eq!(
        classify::split_real(&ss, REAL_TOL).unwrap().real.len(),
        16
    );
}

#[test]
fn c04_paths_lost_as_coupling_vanishes() {
    let ps = witness();
    let ss = solve(&ps, 0);
    let mut current = ss.solutions.clone();
    let cfg = HomotopyConfig::from_seed(0);

    let with_b12 = |scale: f64| {
        let mut b = WITNESS_B;
        b[0] *= scale;
        fourbus(b).build_system().unwrap()
    };

    let scales = [1.0, 0.75, 0.5, 0.25, 0.0];
    let mut survivors = vec![current.len()];
    let mut lost = Vec::new();
    for leg in scales.windows(2) {
        let hom = LinearHomotopy::segment(with_b12(leg[0]), with_b12(leg[1])).unwrap();
        let results = track::track_many(&hom, &current, &cfg);
        current = results
            .iter()
            .filter_map(|r| r.endpoint.clone())
            .collect();
        survivors.push(current.len());
        lost.extend(
            results
                .into_iter()
                .filter(|r| r.status == PathStatus::Diverged),
        );
    }

    assert_eq!(survivors, vec![20, 20, 20, 20, 16]);
    assert_eq!(lost.len(), 4, "paths diverging on the final leg");
    let open = fourbus({
        let mut b = WITNESS_B;
        b[0] = 0.0;
        b
    })
    .build_system()
    .unwrap();
    for path in &lost {
        let diag = track::classify_divergence(&open, path).unwrap();
        assert!(
            diag.max_top_residual < 1e-6,
            "top-form residual {}",
            diag.max_top_residual
        );
        assert!(diag.nonreal_at_infinity, "direction must be nonreal");
    }
}

#[test]
fn c05_permutation_group_orders() {
    let t0 = Instant::now();
    for seed in 0..3u64 {
        let fam = ParamFamily::new(witness(), Slice::ZeroInjection).unwrap();
        let g = monodromy::generate_group(&fam, &MonodromyConfig::from_seed(seed)).unwrap();
        assert_eq!(g.order, BigUint::from(46_080u32), "seed {seed}");
        assert_eq!(g.fixed_points.len(), 8, "seed {seed}");
        assert_eq!(g.blocks.len(), 6, "seed {seed}");
        assert!(g.blocks.iter().all(|b| b.len() == 2));
    }
    assert!(t0.elapsed().as_secs() < 600);

    let t1 = Instant::now();
    let factorial20: BigUint = (1u32..=20).map(BigUint::from).product();
    for seed in 0..3u64 {
        let fam = ParamFamily::new(witness(), Slice::Full).unwrap();
        let g = monodromy::generate_group(&fam, &MonodromyConfig::from_seed(seed)).unwrap();
        assert_eq!(g.order, factorial20, "seed {seed}");
    }
    assert!(t1.elapsed().as_secs() < 600);
}

#[test]
fn c06_solution_count_bounds() {
    assert_eq!(complex_bound(2), 2);
    assert_eq!(complex_bound(3), 6);
    assert_eq!(complex_bound(4), 20);
    assert_eq!(bezout_bound(2), 4);
    assert_eq!(bezout_bound(3), 16);
    assert_eq!(bezout_bound(4), 64);
}

#[test]
fn c07_survey_five_thousand() {
    let t0 = Instant::now();
    let res = survey::run_survey(&SurveyConfig::new(5000, 0)).unwrap();
    let elapsed = t0.elapsed();

    assert_eq!(res.failures, 0);
    assert!(res.max_real <= 16);
    for k in res.histogram.keys() {
        assert!([8, 10, 12, 14, 16].contains(k), "real count {k}");
    }
    let sixteen = *res.histogram.get(&16).unwrap_or(&0);
    let rate = sixteen as f64 / 5000.0;
    assert!(
        (0.002..=0.02).contains(&rate),
        "16-real rate {rate} from {sixteen} instances"
    );
    assert!(elapsed.as_secs() < 900, "took {elapsed:?}");
}

/// Full-size rate check; several hours of tracking.
#[test]
#[ignore]
fn c07_survey_hundred_thousand() {
    let res = survey::run_survey(&SurveyConfig::new(100_000, 0)).unwrap();
    let sixteen = *res.histogram.get(&16).unwrap_or(&0);
    let rate = sixteen as f64 / 100_000.0;
    assert!(
        (0.006..=0.009).contains(&rate),
        "16-real rate {rate} from {sixteen} instances"
    );
}

#[test]
fn c08_counting_oracles_agree() {
    let cfg = SurveyConfig::new(200, 8);
    for i in 0..cfg.n_instances {
        let (b, gammas) = survey::instance_parameters(&cfg, i);
        let cs = survey::certified_solve(&cfg, b, &gammas)
            .unwrap_or_else(|e| panic!("instance {i}: {e}"));

        assert_eq!(cs.ss.total_paths, 64, "instance {i}");
        assert!(cs.ss.conservation_holds(), "instance {i}");
        classify::check_conjugate_closure(&cs.ss).unwrap();
        let cls = classify::split_real(&cs.ss, REAL_TOL).unwrap();
        classify::check_symmetry(&cls.real).unwrap();

        let rep = eliminant::count_real_via_eliminant(&cs.ps, &cs.ss)
            .unwrap_or_else(|e| panic!("instance {i}: {e}"));
        assert_eq!(rep.real_count, cs.n_real, "instance {i}");

        // validates per-solution residuals and lossless power balance
        let records = classify::build_records(&cs.ps, &cs.ss, REAL_TOL)
            .unwrap_or_else(|e| panic!("instance {i}: {e}"));
        assert_eq!(records.len(), cs.ss.solutions.len());
    }
}

#[test]
fn c09_two_bus_closed_form() {
    let two_bus = |b12: f64, p2: f64| {
        let buses = vec![Bus::slack(1, 1.0), Bus::pv(2, 1.0, p2)];
        let lines = vec![Line {
            from: 1,
            to: 2,
            b: b12,
            g: 0.0,
        }];
        PowerSystem::new(buses, lines).unwrap()
    };
    let mut rng = gridroots::rng::rng_for(9, 1);
    let draw_b12 = |rng: &mut _| {
        let mag = 0.5 + 2.5 * gridroots::rng::unit_uniform(rng);
        if gridroots::rng::unit_uniform(rng) < 0.5 {
            -mag
        } else {
            mag
        }
    };

    for case in 0..50 {
        let b12 = draw_b12(&mut rng);
        let r = 1.8 * gridroots::rng::unit_uniform(&mut rng) - 0.9;
        let ps = two_bus(b12, r * b12);
        let ss = solve(&ps, case);
        assert_eq!(ss.solutions.len(), 2);
        let cls = classify::split_real(&ss, REAL_TOL).unwrap();
        assert_eq!(cls.real.len(), 2, "case {case}: b12 {b12} r {r}");
        let vd = (1.0 - r * r).sqrt();
        for sign in [1.0, -1.0] {
            let hit = cls.real.iter().any(|s| {
                (s[0] - sign * vd).abs() <= 1e-9 && (s[1] - r).abs() <= 1e-9
            });
            assert!(hit, "case {case}: missing ({}, {r})", sign * vd);
        }
    }

    for case in 0..50 {
        let b12 = draw_b12(&mut rng);
        let mut r = 1.05 + 0.95 * gridroots::rng::unit_uniform(&mut rng);
        if gridroots::rng::unit_uniform(&mut rng) < 0.5 {
            r = -r;
        }
        let ps = two_bus(b12, r * b12);
        let ss = solve(&ps, case);
        assert_eq!(ss.solutions.len(), 2);
        let cls = classify::split_real(&ss, REAL_TOL).unwrap();
        assert_eq!(cls.real.len(), 0, "case {case}: b12 {b12} r {r}");
        assert_eq!(cls.nonreal_idx.len(), 2);
        classify::check_conjugate_closure(&ss).unwrap();
    }
}

#[test]
fn c10_seeded_runs_are_byte_identical() {
    let ps = witness();
    let solve_json = || {
        let ss = solve(&ps, 42);
        let records = classify::build_records(&ps, &ss, REAL_TOL).unwrap();
        classify::solutions_to_json(&ss, &records)
    };
    assert_eq!(solve_json(), solve_json());

    let survey_pair = |workers: Option<usize>| {
        let mut cfg = SurveyConfig::new(200, 7);
        cfg.workers = workers;
        let res = survey::run_survey(&cfg).unwrap();
        (res.to_csv(), res.to_json_summary())
    };
    let first = survey_pair(None);
    assert_eq!(first, survey_pair(None));
    assert_eq!(first, survey_pair(Some(2)));
}
