//! Monte-Carlo survey of real-solution counts over random four-bus
//! networks: six susceptances drawn i.i.d. normal per instance, zero
//! injections, unit magnitudes.
//!
//! Instance i draws from RNG stream i+1 of the survey seed (six
//! susceptances, then the tracking gammas), so results are independent of
//! how instances are scheduled across workers. Worker count comes from
//! `SurveyConfig::workers`, the GRIDROOTS_WORKERS env var, or the rayon
//! default, in that order.
//!
//! Solution counts are multiplicity-weighted: an instance close to a fold
//! has two real solutions the tracker cannot separate, and counting the
//! merged point twice is what keeps the real count even there.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use num_complex::Complex64;
use serde::Serialize;

use crate::classify::{self, REAL_TOL};
use crate::eliminant;
use crate::error::{Error, Result};
use crate::net::{Bus, Line, PowerSystem};
use crate::rng;
use crate::track::SolutionSet;
use crate::track::{self, HomotopyConfig};

/// Parameter vectors kept per real-count bin in the summary.
pub const WITNESS_CAP: usize = 10;
/// Every this-many-th instance gets the independent eliminant recount.
const CHECK_EVERY: usize = 100;
/// Gammas tried per instance before it counts as failed.
const GAMMA_ATTEMPTS: usize = 4;

/// Line ends in column order b12, b13, b14, b23, b24, b34.
const LINE_ENDS: [(usize, usize); 6] = [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)];

#[derive(Debug, Clone)]
pub struct SurveyConfig {
    pub n_instances: usize,
    pub sigma: f64,
    pub mean: f64,
    pub seed: u64,
    /// Active injections at buses 2, 3, 4. Empty means zero, which keeps
    /// instances inside the stratum the eliminant recount can handle.
    pub injections: Vec<f64>,
    pub workers: Option<usize>,
}

impl SurveyConfig {
    pub fn new(n_instances: usize, seed: u64) -> SurveyConfig {
        SurveyConfig {
            n_instances,
            sigma: 8.0,
            mean: 0.0,
            seed,
            injections: Vec::new(),
            workers: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_instances == 0 {
            return Err(Error::Config("survey needs at least one instance".into()));
        }
        if !(self.sigma > 0.0) {
            return Err(Error::Config("sigma must be positive".into()));
        }
        if !(self.injections.is_empty() || self.injections.len() == 3) {
            return Err(Error::Config(
                "injections cover buses 2, 3, 4 or are omitted".into(),
            ));
        }
        Ok(())
    }

    fn zero_injection(&self) -> bool {
        self.injections.iter().all(|&p| p == 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceStatus {
    /// Solved, classified, and (when sampled) recounted consistently.
    Ok,
    /// Paths failed after retry, or the solution set broke a structural check.
    Failed,
    /// The eliminant recount disagreed with the direct classification.
    Mismatch,
}

impl fmt::Display for InstanceStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InstanceStatus::Ok => "ok",
            InstanceStatus::Failed => "failed",
            InstanceStatus::Mismatch => "mismatch",
        })
    }
}

/// One CSV row. Counts are whatever stage was reached: a failed solve
/// reports zeros, a mismatch keeps the direct classification counts.
#[derive(Debug, Clone)]
pub struct InstanceRow {
    pub index: usize,
    pub b: [f64; 6],
    pub n_complex: usize,
    pub n_real: usize,
    pub n_trivial: usize,
    pub status: InstanceStatus,
}

/// The susceptances and candidate tracking gammas of instance `index`:
/// stream `index + 1`, six Gaussians, then the unit complexes.
pub fn instance_parameters(cfg: &SurveyConfig, index: usize) -> ([f64; 6], Vec<Complex64>) {
    let mut r = rng::rng_for(cfg.seed, index as u64 + 1);
    let mut b = [0.0; 6];
    for v in &mut b {
        *v = cfg.mean + cfg.sigma * rng::gauss(&mut r);
    }
    let gammas = (0..GAMMA_ATTEMPTS).map(|_| rng::unit_complex(&mut r)).collect();
    (b, gammas)
}

fn instance_network(b: &[f64; 6], injections: &[f64]) -> Result<PowerSystem> {
    let inj = |k: usize| injections.get(k).copied().unwrap_or(0.0);
    let buses = vec![
        Bus::slack(1, 1.0),
        Bus::pv(2, 1.0, inj(0)),
        Bus::pv(3, 1.0, inj(1)),
        Bus::pv(4, 1.0, inj(2)),
    ];
    let lines = LINE_ENDS
        .iter()
        .zip(b)
        .map(|(&(from, to), &b)| Line { from, to, b, g: 0.0 })
        .collect();
    PowerSystem::new(buses, lines)
}

/// A solve that passed the structural certificate, with its
/// multiplicity-weighted counts.
#[derive(Debug, Clone)]
pub struct CertifiedSolve {
    pub ps: PowerSystem,
    pub ss: SolutionSet,
    pub n_complex: usize,
    pub n_real: usize,
    pub n_trivial: usize,
}

/// Solves one instance, trying each gamma in turn until a solve passes the
/// structural certificate: no failed paths, conservation, even conjugate
/// pairing, even multiplicity-weighted real count, and the vq-negation
/// mirror present for every real solution.
pub fn certified_solve(
    cfg: &SurveyConfig,
    b: [f64; 6],
    gammas: &[Complex64],
) -> Result<CertifiedSolve> {
    let ps = instance_network(&b, &cfg.injections)?;
    let sys = ps.build_system()?;
    let mut tracker = HomotopyConfig::from_seed(cfg.seed);
    for &gamma in gammas {
        tracker.gamma = gamma;
        let Ok(ss) = track::solve_once(&sys, &tracker) else {
            continue;
        };
        if ss.failed_count > 0 || !ss.conservation_holds() {
            continue;
        }
        // a repeated endpoint is either a genuine fold or two paths that
        // crossed mid-track; a generic instance separates under another
        // gamma, a true fold keeps failing and surfaces as an error
        if ss.multiplicities.iter().any(|&m| m > 1) {
            continue;
        }
        let Ok(cls) = classify::split_real(&ss, REAL_TOL) else {
            continue;
        };
        let weight = |idx: &[usize]| idx.iter().map(|&i| ss.multiplicities[i]).sum::<usize>();
        let n_real = weight(&cls.real_idx);
        let n_trivial = {
            let (trivial, _) = classify::split_trivial(&ps, &cls.real);
            let ids: Vec<usize> = trivial.iter().map(|&k| cls.real_idx[k]).collect();
            weight(&ids)
        };
        if n_real % 2 != 0 || classify::check_symmetry(&cls.real).is_err() {
            continue;
        }
        let n_complex = ss.finite_paths;
        return Ok(CertifiedSolve {
            ps,
            ss,
            n_complex,
            n_real,
            n_trivial,
        });
    }
    Err(Error::VerificationFailed(
        "no tracked solve passed the structural certificate".into(),
    ))
}

/// Classifies one instance for the survey. `recount` adds the eliminant
/// cross-check, which only applies to zero-injection instances.
pub fn evaluate_instance(
    cfg: &SurveyConfig,
    index: usize,
    b: [f64; 6],
    gammas: &[Complex64],
    recount: bool,
) -> InstanceRow {
    let mut row = InstanceRow {
        index,
        b,
        n_complex: 0,
        n_real: 0,
        n_trivial: 0,
        status: InstanceStatus::Failed,
    };
    let Ok(cs) = certified_solve(cfg, b, gammas) else {
        return row;
    };
    row.n_complex = cs.n_complex;
    row.n_real = cs.n_real;
    row.n_trivial = cs.n_trivial;
    row.status = InstanceStatus::Ok;
    if recount && cfg.zero_injection() {
        match eliminant::count_real_via_eliminant(&cs.ps, &cs.ss) {
            Ok(_) => {}
            // no usable coordinate at this parameter point; not a disagreement
            Err(Error::NonGenericCoordinate { .. }) => {}
            Err(_) => row.status = InstanceStatus::Mismatch,
        }
    }
    row
}

fn run_rows(cfg: &SurveyConfig) -> Vec<InstanceRow> {
    let one = |i: usize| {
        let (b, gammas) = instance_parameters(cfg, i);
        evaluate_instance(cfg, i, b, &gammas, i % CHECK_EVERY == 0)
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let work = || (0..cfg.n_instances).into_par_iter().map(one).collect();
        let workers = cfg.workers.or_else(|| {
            std::env::var("GRIDROOTS_WORKERS")
                .ok()
                .and_then(|s| s.parse().ok())
        });
        match workers {
            Some(w) => rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .expect("worker pool")
                .install(work),
            None => work(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    (0..cfg.n_instances).map(one).collect()
}

#[derive(Debug, Clone)]
pub struct SurveyResult {
    pub config: SurveyConfig,
    pub rows: Vec<InstanceRow>,
    /// real count -> instances, ok instances only
    pub histogram: BTreeMap<usize, usize>,
    /// real count -> first few parameter vectors that produced it
    pub witnesses: BTreeMap<usize, Vec<[f64; 6]>>,
    pub max_real: usize,
    pub failures: usize,
}

impl SurveyResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "instance,seed_offset,b12,b13,b14,b23,b24,b34,n_complex,n_real,n_trivial,status\n",
        );
        for r in &self.rows {
            write!(out, "{},{}", r.index, r.index as u64 + 1).unwrap();
            for v in r.b {
                write!(out, ",{v}").unwrap();
            }
            writeln!(
                out,
                ",{},{},{},{}",
                r.n_complex, r.n_real, r.n_trivial, r.status
            )
            .unwrap();
        }
        out
    }

    pub fn to_json_summary(&self) -> String {
        #[derive(Serialize)]
        struct Summary<'a> {
            n_instances: usize,
            sigma: f64,
            mean: f64,
            seed: u64,
            failures: usize,
            max_real: usize,
            histogram: &'a BTreeMap<usize, usize>,
            witnesses: &'a BTreeMap<usize, Vec<[f64; 6]>>,
        }
        serde_json::to_string_pretty(&Summary {
            n_instances: self.config.n_instances,
            sigma: self.config.sigma,
            mean: self.config.mean,
            seed: self.config.seed,
            failures: self.failures,
            max_real: self.max_real,
            histogram: &self.histogram,
            witnesses: &self.witnesses,
        })
        .expect("summary serializes")
    }
}

/// Runs every instance and aggregates. Only ok instances enter the
/// histogram; failed and mismatched ones are counted in `failures`, so
/// histogram total + failures == n_instances.
pub fn run_survey(cfg: &SurveyConfig) -> Result<SurveyResult> {
    cfg.validate()?;
    let rows = run_rows(cfg);
    let mut histogram = BTreeMap::new();
    let mut witnesses: BTreeMap<usize, Vec<[f64; 6]>> = BTreeMap::new();
    let mut max_real = 0;
    let mut failures = 0;
    for r in &rows {
        if r.status == InstanceStatus::Ok {
            *histogram.entry(r.n_real).or_insert(0usize) += 1;
            max_real = max_real.max(r.n_real);
            let w = witnesses.entry(r.n_real).or_default();
            if w.len() < WITNESS_CAP {
                w.push(r.b);
            }
        } else {
            failures += 1;
        }
    }
    Ok(SurveyResult {
        config: cfg.clone(),
        rows,
        histogram,
        witnesses,
        max_real,
        failures,
    })
}
