//! Monodromy group of the solution set as the network parameters move
//! around loops.
//!
//! Each loop is a closed polygon in complex parameter space. Every base
//! solution is tracked along the straight segments; where it lands back in
//! the base list defines a permutation. Accumulated permutations generate
//! the group, whose order is computed exactly by a stabilizer chain.

use num_bigint::BigUint;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::net::{self, PowerSystem};
use crate::perm::{self, Perm, StabChain};
use crate::rng;
use crate::track::{self, HomotopyConfig, LinearHomotopy, PathStatus, SolutionSet};

/// Which parameters are free to move.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slice {
    /// The line susceptances only; injections pinned at zero.
    ZeroInjection,
    /// Susceptances plus the non-slack active injections.
    Full,
}

/// A lossless PV network viewed as a family of polynomial systems over
/// its parameters.
#[derive(Debug, Clone)]
pub struct ParamFamily {
    ps: PowerSystem,
    slice: Slice,
}

impl ParamFamily {
    pub fn new(ps: PowerSystem, slice: Slice) -> Result<ParamFamily> {
        match slice {
            Slice::ZeroInjection => {
                if !ps.is_zero_injection_unit_pv() {
                    return Err(Error::Unsupported(
                        "zero-injection slice needs a lossless unit-magnitude PV network \
                         with zero injections"
                            .into(),
                    ));
                }
            }
            Slice::Full => {
                if !(ps.is_pv_only() && ps.is_lossless()) {
                    return Err(Error::Unsupported(
                        "parameter family covers lossless PV networks".into(),
                    ));
                }
            }
        }
        Ok(ParamFamily { ps, slice })
    }

    pub fn network(&self) -> &PowerSystem {
        &self.ps
    }

    pub fn slice(&self) -> Slice {
        self.slice
    }

    pub fn dim(&self) -> usize {
        match self.slice {
            Slice::ZeroInjection => self.ps.lines().len(),
            Slice::Full => self.ps.lines().len() + self.ps.n() - 1,
        }
    }

    /// Parameter vector of the stored network: susceptances in line order,
    /// then (full slice) active injections in non-slack bus order.
    pub fn base_params(&self) -> Vec<Complex64> {
        let mut p: Vec<Complex64> = self
            .ps
            .lines()
            .iter()
            .map(|l| Complex64::new(l.b, 0.0))
            .collect();
        if self.slice == Slice::Full {
            for id in self.ps.non_slack_ids() {
                p.push(Complex64::new(self.ps.bus(id).p.unwrap_or(0.0), 0.0));
            }
        }
        p
    }

    /// The polynomial system at an arbitrary (complex) parameter point.
    /// Coefficients are affine in these parameters, which is what makes
    /// straight-segment parameter homotopies exact.
    pub fn instantiate(&self, params: &[Complex64]) -> Result<crate::poly::PolySystem> {
        if params.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: params.len(),
            });
        }
        let n = self.ps.n();
        let nl = self.ps.lines().len();
        let bmat = net::b_matrix_from_values(&self.ps, &params[..nl]);
        let gmat = vec![Complex64::ZERO; n * n];
        let mut p = vec![Complex64::ZERO; n];
        if self.slice == Slice::Full {
            for (k, id) in self.ps.non_slack_ids().into_iter().enumerate() {
                p[id - 1] = params[nl + k];
            }
        }
        let q = vec![Complex64::ZERO; n];
        net::assemble(&self.ps, &bmat, &gmat, &p, &q)
    }
}

/// Closed polygonal loop in parameter space.
#[derive(Debug, Clone)]
pub struct ParamLoop {
    waypoints: Vec<Vec<Complex64>>,
}

impl ParamLoop {
    /// Triangle base -> base+d1 -> base+d2 -> base.
    pub fn triangle(base: &[Complex64], d1: &[Complex64], d2: &[Complex64]) -> ParamLoop {
        let add = |d: &[Complex64]| -> Vec<Complex64> {
            base.iter().zip(d).map(|(b, x)| b + x).collect()
        };
        ParamLoop {
            waypoints: vec![base.to_vec(), add(d1), add(d2), base.to_vec()],
        }
    }

    pub fn identity(base: &[Complex64]) -> ParamLoop {
        ParamLoop {
            waypoints: vec![base.to_vec(), base.to_vec()],
        }
    }

    pub fn waypoints(&self) -> &[Vec<Complex64>] {
        &self.waypoints
    }
}

#[derive(Debug, Clone)]
pub struct MonodromyConfig {
    pub tracker: HomotopyConfig,
    pub seed: u64,
    /// Expected offset magnitude as a fraction of the base parameter norm.
    pub loop_scale: f64,
    /// Consecutive accepted loops without group growth before stopping.
    pub budget: usize,
    /// Hard cap on sampled loops.
    pub max_loops: usize,
}

impl MonodromyConfig {
    pub fn from_seed(seed: u64) -> MonodromyConfig {
        MonodromyConfig {
            tracker: HomotopyConfig::from_seed(seed),
            seed,
            // comparable to the base parameters themselves: timid loops
            // circle few discriminant strata and can stall in a subgroup
            loop_scale: 1.0,
            budget: 25,
            max_loops: 1000,
        }
    }
}

const MATCH_TOL: f64 = 1e-6;
const BLOCK_TOL: f64 = 1e-8;

fn dist_inf(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Tracks every solution around the loop and reads off the permutation:
/// entry i is the base index where solution i lands. Any tracking failure,
/// divergence, or ambiguous endpoint match rejects the loop.
pub fn track_loop(
    fam: &ParamFamily,
    solutions: &[Vec<Complex64>],
    lp: &ParamLoop,
    cfg: &MonodromyConfig,
) -> Result<Perm> {
    let way = lp.waypoints();
    if way.len() < 2 || dist_inf(&way[0], &way[way.len() - 1]) > 0.0 {
        return Err(Error::LoopRejected("loop is not closed".into()));
    }
    let mut current: Vec<Vec<Complex64>> = solutions.to_vec();
    for seg in way.windows(2) {
        let from = fam.instantiate(&seg[0])?;
        let to = fam.instantiate(&seg[1])?;
        let hom = LinearHomotopy::segment(from, to)?;
        let results = track::track_many(&hom, &current, &cfg.tracker);
        for (k, r) in results.into_iter().enumerate() {
            match r.status {
                PathStatus::Finite => current[k] = r.endpoint.expect("finite endpoint"),
                other => {
                    return Err(Error::LoopRejected(format!(
                        "solution {k} ended {other} at t={:.3e} on a segment",
                        r.last_t
                    )))
                }
            }
        }
    }
    let mut mapping = vec![usize::MAX; solutions.len()];
    let mut taken = vec![false; solutions.len()];
    for (i, end) in current.iter().enumerate() {
        let mut best = usize::MAX;
        let mut best_d = MATCH_TOL;
        for (j, s) in solutions.iter().enumerate() {
            let d = dist_inf(end, s);
            if d < best_d {
                best_d = d;
                best = j;
            }
        }
        if best == usize::MAX {
            return Err(Error::LoopRejected(format!(
                "endpoint {i} matches no base solution"
            )));
        }
        if taken[best] {
            return Err(Error::LoopRejected(format!(
                "two endpoints landed on base solution {best}"
            )));
        }
        taken[best] = true;
        mapping[i] = best;
    }
    Perm::from_map(mapping)
}

#[derive(Debug, Clone)]
pub struct MonodromyGroup {
    pub generators: Vec<Perm>,
    pub order: BigUint,
    /// 0-based indices into the base solution list.
    pub fixed_points: Vec<usize>,
    /// Verified invariant partition (pairs), empty when none exists.
    pub blocks: Vec<Vec<usize>>,
    pub loops_used: usize,
    pub loops_rejected: usize,
    pub n_solutions: usize,
}

#[derive(Serialize)]
struct GroupJson {
    order: String,
    fixed_points: Vec<usize>,
    blocks: Vec<Vec<usize>>,
    loops_used: usize,
    loops_rejected: usize,
}

impl MonodromyGroup {
    /// JSON report; solution indices are 1-based to match solve output.
    pub fn to_json(&self) -> String {
        let dto = GroupJson {
            order: self.order.to_string(),
            fixed_points: self.fixed_points.iter().map(|&i| i + 1).collect(),
            blocks: self
                .blocks
                .iter()
                .map(|b| b.iter().map(|&i| i + 1).collect())
                .collect(),
            loops_used: self.loops_used,
            loops_rejected: self.loops_rejected,
        };
        serde_json::to_string_pretty(&dto).expect("report serializes")
    }
}

/// Candidate 2-blocks from the vq-negation pairing of the base solutions;
/// kept only if every generator maps blocks to blocks.
fn paired_blocks(solutions: &[Vec<Complex64>], gens: &[Perm]) -> Vec<Vec<usize>> {
    let mirror = |s: &[Complex64]| -> Vec<Complex64> {
        s.iter()
            .enumerate()
            .map(|(j, v)| if j % 2 == 1 { -v } else { *v })
            .collect()
    };
    let mut blocks = Vec::new();
    let mut used = vec![false; solutions.len()];
    for i in 0..solutions.len() {
        if used[i] {
            continue;
        }
        let m = mirror(&solutions[i]);
        if dist_inf(&m, &solutions[i]) < BLOCK_TOL {
            used[i] = true;
            continue;
        }
        if let Some(j) = (i + 1..solutions.len())
            .find(|&j| !used[j] && dist_inf(&m, &solutions[j]) < BLOCK_TOL)
        {
            used[i] = true;
            used[j] = true;
            blocks.push(vec![i, j]);
        } else {
            used[i] = true;
        }
    }
    if !blocks.is_empty() && perm::preserves_partition(gens, &blocks) {
        blocks
    } else {
        Vec::new()
    }
}

/// Samples triangular loops until `budget` consecutive accepted loops stop
/// growing the group. The base must solve cleanly with distinct regular
/// solutions; chronic loop rejection flags it as non-generic.
pub fn generate_group(fam: &ParamFamily, cfg: &MonodromyConfig) -> Result<MonodromyGroup> {
    let base_sys = fam.instantiate(&fam.base_params())?;
    let ss: SolutionSet = track::solve_all(&base_sys, &cfg.tracker)?;
    if ss.failed_count > 0 {
        return Err(Error::NonGenericBase(format!(
            "{} paths failed at the base point",
            ss.failed_count
        )));
    }
    if ss.solutions.is_empty() || ss.multiplicities.iter().any(|&m| m > 1) {
        return Err(Error::NonGenericBase(
            "base solutions are not distinct and regular".into(),
        ));
    }
    let m = ss.solutions.len();
    let base = fam.base_params();
    let dim = base.len();
    let norm2 = base.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let coord_scale = cfg.loop_scale * norm2 / ((2 * dim) as f64).sqrt();
    let mut rng = rng::rng_for(cfg.seed, u64::MAX);

    let mut gens: Vec<Perm> = Vec::new();
    let mut order = BigUint::from(1u32);
    let mut stall = 0usize;
    let mut used = 0usize;
    let mut rejected = 0usize;
    let mut attempts = 0usize;
    while stall < cfg.budget {
        if attempts >= cfg.max_loops {
            return Err(Error::MonodromyStalled);
        }
        attempts += 1;
        let draw = |rng: &mut _| -> Vec<Complex64> {
            (0..dim)
                .map(|_| rng::gauss_complex(rng) * coord_scale)
                .collect()
        };
        let d1 = draw(&mut rng);
        let d2 = draw(&mut rng);
        let lp = ParamLoop::triangle(&base, &d1, &d2);
        match track_loop(fam, &ss.solutions, &lp, cfg) {
            Ok(p) => {
                used += 1;
                if p.is_identity() {
                    stall += 1;
                    continue;
                }
                let mut candidate = gens.clone();
                candidate.push(p);
                let new_order = StabChain::new(&candidate, m).order();
                if new_order > order {
                    order = new_order;
                    gens = candidate;
                    stall = 0;
                } else {
                    stall += 1;
                }
            }
            Err(Error::LoopRejected(_)) => {
                rejected += 1;
                if attempts >= 30 && 10 * rejected > 9 * attempts {
                    return Err(Error::NonGenericBase(format!(
                        "{rejected} of {attempts} loops rejected"
                    )));
                }
            }
            Err(e) => return Err(e),
        }
    }
    let fixed_points = perm::orbits(&gens, m)
        .into_iter()
        .filter(|o| o.len() == 1)
        .map(|o| o[0])
        .collect();
    let blocks = paired_blocks(&ss.solutions, &gens);
    Ok(MonodromyGroup {
        order,
        fixed_points,
        blocks,
        loops_used: used,
        loops_rejected: rejected,
        n_solutions: m,
        generators: gens,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn witness() -> PowerSystem {
        let text = std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/data/fourbus16.json"
        ))
        .unwrap();
        PowerSystem::from_json(&text).unwrap()
    }

    #[test]
    fn instantiate_matches_direct_build() {
        let ps = witness();
        let fam = ParamFamily::new(ps.clone(), Slice::ZeroInjection).unwrap();
        let sys = fam.instantiate(&fam.base_params()).unwrap();
        let direct = ps.build_system().unwrap();
        // same polynomials up to term order, which is canonical
        assert_eq!(sys, direct);
    }

    #[test]
    fn identity_loop_is_identity() {
        let ps = witness();
        let fam = ParamFamily::new(ps, Slice::ZeroInjection).unwrap();
        let cfg = MonodromyConfig::from_seed(3);
        let sys = fam.instantiate(&fam.base_params()).unwrap();
        let ss = track::solve_all(&sys, &cfg.tracker).unwrap();
        let lp = ParamLoop::identity(&fam.base_params());
        let p = track_loop(&fam, &ss.solutions, &lp, &cfg).unwrap();
        assert!(p.is_identity());
    }

    #[test]
    fn sampled_loop_fixes_sign_patterns_and_blocks() {
        let ps = witness();
        let fam = ParamFamily::new(ps.clone(), Slice::ZeroInjection).unwrap();
        let cfg = MonodromyConfig::from_seed(5);
        let sys = fam.instantiate(&fam.base_params()).unwrap();
        let ss = track::solve_all(&sys, &cfg.tracker).unwrap();
        let base = fam.base_params();
        let dim = base.len();
        let norm2 = base.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let s = cfg.loop_scale * norm2 / ((2 * dim) as f64).sqrt();
        let mut rng = rng::rng_for(cfg.seed, u64::MAX);
        let mut accepted = None;
        for _ in 0..20 {
            let d1: Vec<Complex64> = (0..dim).map(|_| rng::gauss_complex(&mut rng) * s).collect();
            let d2: Vec<Complex64> = (0..dim).map(|_| rng::gauss_complex(&mut rng) * s).collect();
            let lp = ParamLoop::triangle(&base, &d1, &d2);
            if let Ok(p) = track_loop(&fam, &ss.solutions, &lp, &cfg) {
                if !p.is_identity() {
                    accepted = Some(p);
                    break;
                }
            }
        }
        let p = accepted.expect("a nontrivial loop within 20 tries");
        // sign-pattern solutions are parameter-independent
        for (i, sol) in ss.solutions.iter().enumerate() {
            let trivial = sol
                .iter()
                .enumerate()
                .all(|(j, v)| if j % 2 == 1 { v.norm() < 1e-9 } else { (v.norm() - 1.0).abs() < 1e-9 });
            if trivial {
                assert_eq!(p.apply(i), i, "trivial solution {i} moved");
            }
        }
        let blocks = paired_blocks(&ss.solutions, &[p]);
        assert_eq!(blocks.len(), 6, "vq-pairing must survive one loop");
    }
}
