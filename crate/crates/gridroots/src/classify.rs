//! Real/nonreal and trivial/nonconstant partitioning of solution sets,
//! structural checks, and solution table output.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::net::PowerSystem;
use crate::track::SolutionSet;

/// A coordinate is treated as real when every imaginary part is below this.
pub const REAL_TOL: f64 = 1e-8;
/// Trivial solutions match the sign-pattern values to this tolerance.
pub const TRIVIAL_TOL: f64 = 1e-9;
const AMBIGUOUS_FACTOR: f64 = 10.0;
const SYMMETRY_TOL: f64 = 1e-8;
const CONJUGATE_TOL: f64 = 1e-6;
const VERIFY_RESIDUAL: f64 = 1e-7;
const BALANCE_TOL: f64 = 1e-9;

/// Outcome of the real/nonreal split. Indices refer to the canonical order
/// of the originating [`SolutionSet`].
#[derive(Debug, Clone)]
pub struct Classified {
    /// Real solutions with imaginary parts zeroed, interleaved
    /// (vd, vq) per non-slack bus.
    pub real: Vec<Vec<f64>>,
    pub real_idx: Vec<usize>,
    pub nonreal_idx: Vec<usize>,
    /// Largest imaginary part within a factor of 10 above the threshold.
    /// The strict rule counts these as nonreal; they are surfaced so a
    /// caller can flag the instance instead of trusting the count.
    pub ambiguous_idx: Vec<usize>,
}

/// Splits by the largest imaginary magnitude per solution. The nonreal
/// count must come out even (conjugate pairs); anything else means the
/// solve itself went wrong.
pub fn split_real(ss: &SolutionSet, real_tol: f64) -> Result<Classified> {
    let mut out = Classified {
        real: Vec::new(),
        real_idx: Vec::new(),
        nonreal_idx: Vec::new(),
        ambiguous_idx: Vec::new(),
    };
    for (i, sol) in ss.solutions.iter().enumerate() {
        let imax = sol.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        if imax < real_tol {
            out.real.push(sol.iter().map(|z| z.re).collect());
            out.real_idx.push(i);
        } else {
            out.nonreal_idx.push(i);
            if imax < AMBIGUOUS_FACTOR * real_tol {
                out.ambiguous_idx.push(i);
            }
        }
    }
    if out.nonreal_idx.len() % 2 != 0 {
        return Err(Error::StructuralViolation(format!(
            "{} nonreal solutions cannot form conjugate pairs",
            out.nonreal_idx.len()
        )));
    }
    Ok(out)
}

/// Splits real solutions into the sign-pattern ones (every vq zero, every
/// vd at +-vm) and the rest. Returns index lists into `real`.
pub fn split_trivial(ps: &PowerSystem, real: &[Vec<f64>]) -> (Vec<usize>, Vec<usize>) {
    let vms: Vec<f64> = ps
        .non_slack_ids()
        .iter()
        .map(|&id| ps.bus(id).vm.unwrap_or(f64::NAN))
        .collect();
    let mut trivial = Vec::new();
    let mut nonconstant = Vec::new();
    for (i, sol) in real.iter().enumerate() {
        let is_trivial = vms.iter().enumerate().all(|(k, &vm)| {
            let vd = sol[2 * k];
            let vq = sol[2 * k + 1];
            vq.abs() < TRIVIAL_TOL && (vd.abs() - vm).abs() < TRIVIAL_TOL
        });
        if is_trivial {
            trivial.push(i);
        } else {
            nonconstant.push(i);
        }
    }
    (trivial, nonconstant)
}

/// Every real solution must appear again with all vq negated; solutions
/// with vq = 0 are their own mirror.
pub fn check_symmetry(real: &[Vec<f64>]) -> Result<()> {
    for sol in real {
        let mirror: Vec<f64> = sol
            .iter()
            .enumerate()
            .map(|(j, v)| if j % 2 == 1 { -v } else { *v })
            .collect();
        let found = real.iter().any(|s| {
            s.iter()
                .zip(&mirror)
                .all(|(a, b)| (a - b).abs() < SYMMETRY_TOL)
        });
        if !found {
            return Err(Error::StructuralViolation(format!(
                "vq-mirror of {sol:?} missing from the real solution list"
            )));
        }
    }
    Ok(())
}

/// The full solution list of a real-coefficient system must be closed
/// under complex conjugation.
pub fn check_conjugate_closure(ss: &SolutionSet) -> Result<()> {
    for sol in &ss.solutions {
        let found = ss.solutions.iter().any(|s| {
            s.iter()
                .zip(sol)
                .all(|(a, b)| (a - b.conj()).norm() < CONJUGATE_TOL)
        });
        if !found {
            return Err(Error::StructuralViolation(
                "solution set not closed under conjugation".into(),
            ));
        }
    }
    Ok(())
}

/// One row of the solution table. `vd`/`vq` hold real parts; the JSON
/// output keeps the full complex values. Output quantities (`q_out`,
/// `slack_p`) are recovered for real solutions only.
#[derive(Debug, Clone, Serialize)]
pub struct SolutionRecord {
    pub sol_id: usize,
    pub vd: Vec<f64>,
    pub vq: Vec<f64>,
    pub is_real: bool,
    pub is_trivial: bool,
    pub ambiguous: bool,
    pub multiplicity: usize,
    pub singular: bool,
    pub residual: f64,
    /// Reactive injection per bus (slack included, index id-1).
    pub q_out: Option<Vec<f64>>,
    pub slack_p: Option<f64>,
}

/// Builds the per-solution records and re-verifies each real solution
/// against a freshly built system: residual, recovered injections, and
/// (for lossless networks) active power balance.
pub fn build_records(
    ps: &PowerSystem,
    ss: &SolutionSet,
    real_tol: f64,
) -> Result<Vec<SolutionRecord>> {
    let sys = ps.build_system()?;
    let cls = split_real(ss, real_tol)?;
    let (trivial, _) = split_trivial(ps, &cls.real);
    let trivial_set: std::collections::HashSet<usize> =
        trivial.iter().map(|&k| cls.real_idx[k]).collect();
    let real_set: std::collections::HashSet<usize> = cls.real_idx.iter().copied().collect();
    let ambiguous_set: std::collections::HashSet<usize> =
        cls.ambiguous_idx.iter().copied().collect();
    let slack = ps.slack_id();
    let slack_vm = ps.bus(slack).vm.expect("slack carries a magnitude");
    let order = ps.non_slack_ids();

    let mut records = Vec::with_capacity(ss.solutions.len());
    for (i, sol) in ss.solutions.iter().enumerate() {
        let res = sys
            .evaluate(sol)?
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        // big-coordinate solutions cannot beat the evaluation noise floor
        let bound = VERIFY_RESIDUAL.max(32.0 * f64::EPSILON * sys.eval_abs_max(sol));
        if res > bound {
            return Err(Error::VerificationFailed(format!(
                "solution {} re-evaluates to residual {res:e}",
                i + 1
            )));
        }
        let is_real = real_set.contains(&i);
        let is_trivial = trivial_set.contains(&i);
        // a certified sign-pattern solution is known exactly; snapping makes
        // the table clean and the recovered injections exact
        let mut vd: Vec<f64> = (0..order.len()).map(|k| sol[2 * k].re).collect();
        let mut vq: Vec<f64> = (0..order.len()).map(|k| sol[2 * k + 1].re).collect();
        if is_trivial {
            for (k, &id) in order.iter().enumerate() {
                let vm = ps.bus(id).vm.expect("trivial implies PV");
                vd[k] = vm.copysign(vd[k]);
                vq[k] = 0.0;
            }
        }
        let (q_out, slack_p) = if is_real {
            let mut vd_full = vec![0.0; ps.n()];
            let mut vq_full = vec![0.0; ps.n()];
            vd_full[slack - 1] = slack_vm;
            for (k, &id) in order.iter().enumerate() {
                vd_full[id - 1] = vd[k];
                vq_full[id - 1] = vq[k];
            }
            let q = ps.recover_q(&vd_full, &vq_full);
            let p = ps.recover_p(&vd_full, &vq_full);
            if ps.is_lossless() {
                let total: f64 = p.iter().sum();
                if total.abs() > BALANCE_TOL {
                    return Err(Error::VerificationFailed(format!(
                        "lossless network with net active power {total:e} at solution {}",
                        i + 1
                    )));
                }
            }
            (Some(q), Some(p[slack - 1]))
        } else {
            (None, None)
        };
        records.push(SolutionRecord {
            sol_id: i + 1,
            vd,
            vq,
            is_real,
            is_trivial,
            ambiguous: ambiguous_set.contains(&i),
            multiplicity: ss.multiplicities[i],
            singular: ss.singular[i],
            residual: ss.residuals[i],
            q_out,
            slack_p,
        });
    }
    Ok(records)
}

/// CSV table, one row per solution in canonical order. vd/vq columns hold
/// real parts; the imaginary parts of nonreal rows live in the JSON output.
pub fn records_to_csv(ps: &PowerSystem, records: &[SolutionRecord]) -> String {
    let mut out = String::from("sol_id");
    for id in ps.non_slack_ids() {
        out.push_str(&format!(",vd{id},vq{id}"));
    }
    out.push_str(",is_real,is_trivial,residual\n");
    for r in records {
        out.push_str(&r.sol_id.to_string());
        for (vd, vq) in r.vd.iter().zip(&r.vq) {
            out.push_str(&format!(",{vd},{vq}"));
        }
        out.push_str(&format!(",{},{},{}\n", r.is_real, r.is_trivial, r.residual));
    }
    out
}

#[derive(Serialize)]
struct JsonSolution<'a> {
    #[serde(flatten)]
    record: &'a SolutionRecord,
    values: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    gamma: [f64; 2],
    total_paths: usize,
    finite_paths: usize,
    diverged: usize,
    failed: usize,
    n_solutions: usize,
    n_real: usize,
    n_trivial: usize,
    solutions: Vec<JsonSolution<'a>>,
}

/// JSON report with the full complex coordinates of every solution.
pub fn solutions_to_json(ss: &SolutionSet, records: &[SolutionRecord]) -> String {
    let report = JsonReport {
        gamma: [ss.gamma.re, ss.gamma.im],
        total_paths: ss.total_paths,
        finite_paths: ss.finite_paths,
        diverged: ss.diverged_count,
        failed: ss.failed_count,
        n_solutions: ss.solutions.len(),
        n_real: records.iter().filter(|r| r.is_real).count(),
        n_trivial: records.iter().filter(|r| r.is_trivial).count(),
        solutions: records
            .iter()
            .zip(&ss.solutions)
            .map(|(record, sol)| JsonSolution {
                record,
                values: sol.iter().map(|z| [z.re, z.im]).collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&report).expect("report serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{Bus, Line};
    use crate::track::{solve_all, HomotopyConfig};

    fn two_bus(p: f64) -> PowerSystem {
        PowerSystem::new(
            vec![Bus::slack(1, 1.0), Bus::pv(2, 1.0, p)],
            vec![Line {
                from: 1,
                to: 2,
                b: 1.0,
                g: 0.0,
            }],
        )
        .unwrap()
    }

    fn solve(ps: &PowerSystem, seed: u64) -> SolutionSet {
        solve_all(&ps.build_system().unwrap(), &HomotopyConfig::from_seed(seed)).unwrap()
    }

    #[test]
    fn feasible_two_bus_is_all_real() {
        let ps = two_bus(0.5);
        let ss = solve(&ps, 7);
        let cls = split_real(&ss, REAL_TOL).unwrap();
        assert_eq!(cls.real.len(), 2);
        assert!(cls.nonreal_idx.is_empty());
        assert!(cls.ambiguous_idx.is_empty());
        let (trivial, rest) = split_trivial(&ps, &cls.real);
        assert!(trivial.is_empty());
        assert_eq!(rest.len(), 2);
        check_symmetry(&cls.real).unwrap_err();
        // vq = 0.5 on both: mirrors are absent by design of this instance
    }

    #[test]
    fn infeasible_two_bus_is_conjugate_nonreal() {
        let ps = two_bus(2.0);
        let ss = solve(&ps, 7);
        let cls = split_real(&ss, REAL_TOL).unwrap();
        assert!(cls.real.is_empty());
        assert_eq!(cls.nonreal_idx.len(), 2);
        check_conjugate_closure(&ss).unwrap();
    }

    #[test]
    fn witness_instance_counts_and_structure() {
        let text = std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/data/fourbus16.json"
        ))
        .unwrap();
        let ps = PowerSystem::from_json(&text).unwrap();
        let ss = solve(&ps, 42);
        let cls = split_real(&ss, REAL_TOL).unwrap();
        assert_eq!(cls.real.len(), 16);
        assert_eq!(cls.nonreal_idx.len(), 4);
        assert!(cls.ambiguous_idx.is_empty());
        let (trivial, nonconstant) = split_trivial(&ps, &cls.real);
        assert_eq!(trivial.len(), 8);
        assert_eq!(nonconstant.len(), 8);
        check_symmetry(&cls.real).unwrap();
        check_conjugate_closure(&ss).unwrap();
        let records = build_records(&ps, &ss, REAL_TOL).unwrap();
        assert_eq!(records.len(), 20);
        for r in &records {
            if r.is_trivial {
                // no current flows in a sign-pattern state
                assert_eq!(r.slack_p, Some(0.0));
            }
            if r.is_real {
                assert!(r.q_out.is_some());
            } else {
                assert!(r.q_out.is_none());
            }
        }
    }

    #[test]
    fn csv_shape_for_four_bus() {
        let text = std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/data/fourbus16.json"
        ))
        .unwrap();
        let ps = PowerSystem::from_json(&text).unwrap();
        let ss = solve(&ps, 42);
        let records = build_records(&ps, &ss, REAL_TOL).unwrap();
        let csv = records_to_csv(&ps, &records);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "sol_id,vd2,vq2,vd3,vq3,vd4,vq4,is_real,is_trivial,residual"
        );
        assert_eq!(lines.count(), 20);
        let json = solutions_to_json(&ss, &records);
        assert!(json.contains("\"n_real\": 16"));
        assert!(json.contains("\"n_trivial\": 8"));
    }

    #[test]
    fn borderline_imaginary_parts_are_surfaced() {
        use num_complex::Complex64;
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let ss = SolutionSet {
            solutions: vec![
                vec![c(1.0, 5e-8), c(0.5, 0.0)],
                vec![c(1.0, -5e-8), c(0.5, 0.0)],
            ],
            multiplicities: vec![1, 1],
            singular: vec![false, false],
            residuals: vec![0.0, 0.0],
            finite_paths: 2,
            diverged_count: 0,
            failed_count: 0,
            total_paths: 2,
            diverged: vec![],
            gamma: c(1.0, 0.0),
        };
        let cls = split_real(&ss, REAL_TOL).unwrap();
        assert!(cls.real.is_empty());
        assert_eq!(cls.nonreal_idx.len(), 2);
        assert_eq!(cls.ambiguous_idx.len(), 2);
    }

    #[test]
    fn odd_nonreal_count_is_rejected() {
        use num_complex::Complex64;
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let ss = SolutionSet {
            solutions: vec![vec![c(1.0, 1e-3), c(0.5, 0.0)]],
            multiplicities: vec![1],
            singular: vec![false],
            residuals: vec![0.0],
            finite_paths: 1,
            diverged_count: 0,
            failed_count: 0,
            total_paths: 1,
            diverged: vec![],
            gamma: c(1.0, 0.0),
        };
        assert!(matches!(
            split_real(&ss, REAL_TOL),
            Err(Error::StructuralViolation(_))
        ));
    }

    #[test]
    fn missing_mirror_is_a_violation() {
        let real = vec![vec![0.9, 0.3, 0.1, -0.2]];
        assert!(matches!(
            check_symmetry(&real),
            Err(Error::StructuralViolation(_))
        ));
        let with_mirror = vec![vec![0.9, 0.3, 0.1, -0.2], vec![0.9, -0.3, 0.1, 0.2]];
        check_symmetry(&with_mirror).unwrap();
    }
}
