use gridroots::monodromy::{generate_group, MonodromyConfig, ParamFamily, Slice};
use gridroots::{solve_all, HomotopyConfig, PowerSystem};

#[test]
fn four_bus_witness_counts() {
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/data/fourbus16.json"
    ))
    .unwrap();
    let ps = PowerSystem::from_json(&text).unwrap();
    let sys = ps.build_system().unwrap();
    assert_eq!(sys.total_degree_product().unwrap(), 64);
    let t0 = std::time::Instant::now();
    let ss = solve_all(&sys, &HomotopyConfig::from_seed(42)).unwrap();
    let dt = t0.elapsed();
    eprintln!(
        "finite {} distinct {} diverged {} failed {} in {:?}",
        ss.finite_paths,
        ss.len(),
        ss.diverged_count,
        ss.failed_count,
        dt
    );
    for (s, m) in ss.solutions.iter().zip(&ss.multiplicities) {
        eprintln!(
            "mult {m} res {:e} [{}]",
            ss.residuals[ss.solutions.iter().position(|x| std::ptr::eq(x, s)).unwrap()],
            s.iter()
                .map(|z| format!("{:.5}{:+.5}i", z.re, z.im))
                .collect::<Vec<_>>()
                .join(", ")
        );
    }
    assert!(ss.conservation_holds());
    assert_eq!(ss.failed_count, 0);
    assert_eq!(ss.len(), 20);
    assert_eq!(ss.diverged_count, 44);
}

#[test]
fn four_bus_group_order() {
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/data/fourbus16.json"
    ))
    .unwrap();
    let ps = PowerSystem::from_json(&text).unwrap();
    let fam = ParamFamily::new(ps, Slice::ZeroInjection).unwrap();
    let t0 = std::time::Instant::now();
    let g = generate_group(&fam, &MonodromyConfig::from_seed(7)).unwrap();
    eprintln!(
        "order {} gens {} fixed {:?} blocks {} used {} rejected {} in {:?}",
        g.order,
        g.generators.len(),
        g.fixed_points,
        g.blocks.len(),
        g.loops_used,
        g.loops_rejected,
        t0.elapsed()
    );
    assert_eq!(g.order.to_string(), "46080");
    assert_eq!(g.fixed_points.len(), 8);
    assert_eq!(g.blocks.len(), 6);
}

#[test]
fn survey_timing_probe() {
    let cfg = gridroots::survey::SurveyConfig::new(500, 2026);
    let t0 = std::time::Instant::now();
    let res = gridroots::survey::run_survey(&cfg).unwrap();
    eprintln!(
        "500 instances in {:?}; histogram {:?} failures {}",
        t0.elapsed(),
        res.histogram,
        res.failures
    );
}

#[test]
fn four_bus_full_slice_group_order() {
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/data/fourbus16.json"
    ))
    .unwrap();
    let ps = PowerSystem::from_json(&text).unwrap();
    let fam = ParamFamily::new(ps, Slice::Full).unwrap();
    let t0 = std::time::Instant::now();
    let g = generate_group(&fam, &MonodromyConfig::from_seed(7)).unwrap();
    eprintln!(
        "order {} gens {} fixed {:?} blocks {} used {} rejected {} in {:?}",
        g.order,
        g.generators.len(),
        g.fixed_points,
        g.blocks.len(),
        g.loops_used,
        g.loops_rejected,
        t0.elapsed()
    );
    assert_eq!(g.order.to_string(), "2432902008176640000");
    assert!(g.fixed_points.is_empty());
    assert!(g.blocks.is_empty());
}
