//! Homotopy continuation path tracking.
//!
//! Tracks every solution of a start system to the target system along
//! H(x,t) = gamma*t*g(x) + (1-t)*f(x), t from 1 to 0, with an adaptive
//! RK4 predictor on the Davidenko ODE dx/dt = -H_x^{-1} H_t and a Newton
//! corrector. The same machinery tracks straight parameter segments (gamma
//! = 1, g and f two instances of one family), which is exact when
//! coefficients are affine in the parameters, and complex-t arcs for the
//! endgame's circular loops.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg;
use crate::poly::{Poly, PolySystem};
use crate::rng;

/// Tracking controls. `gamma` is drawn from `seed` unless set explicitly;
/// step sizes are in units of t.
#[derive(Debug, Clone)]
pub struct HomotopyConfig {
    pub gamma: Complex64,
    pub step_init: f64,
    pub step_min: f64,
    pub step_max: f64,
    pub corrector_tol: f64,
    pub corrector_max_iters: usize,
    pub divergence_radius: f64,
    pub endgame_start_t: f64,
    pub dedup_tol: f64,
    pub seed: u64,
}

impl HomotopyConfig {
    pub fn from_seed(seed: u64) -> HomotopyConfig {
        let mut rng = rng::rng_for(seed, 0);
        HomotopyConfig {
            gamma: rng::unit_complex(&mut rng),
            step_init: 0.05,
            step_min: 1e-9,
            step_max: 0.2,
            corrector_tol: 1e-10,
            corrector_max_iters: 3,
            divergence_radius: 1e6,
            endgame_start_t: 0.1,
            dedup_tol: 1e-6,
            seed,
        }
    }

    /// The gamma used when a solve must be retried: the next draw from the
    /// same stream that produced the initial one.
    pub fn retry_gamma(&self) -> Complex64 {
        let mut rng = rng::rng_for(self.seed, 0);
        let _ = rng::unit_complex(&mut rng);
        rng::unit_complex(&mut rng)
    }

    pub fn validate(&self) -> Result<()> {
        let ok_steps = 0.0 < self.step_min
            && self.step_min <= self.step_init
            && self.step_init <= self.step_max
            && self.step_max < 1.0;
        if !ok_steps {
            return Err(Error::Config(
                "require 0 < step_min <= step_init <= step_max < 1".into(),
            ));
        }
        if !(self.divergence_radius > 1.0) {
            return Err(Error::Config("divergence_radius must exceed 1".into()));
        }
        if !(self.endgame_start_t > 0.0 && self.endgame_start_t < 1.0) {
            return Err(Error::Config("endgame_start_t must lie in (0,1)".into()));
        }
        if !(self.corrector_tol > 0.0) || self.corrector_max_iters == 0 {
            return Err(Error::Config("corrector settings must be positive".into()));
        }
        if !(self.dedup_tol > 0.0) {
            return Err(Error::Config("dedup_tol must be positive".into()));
        }
        if (self.gamma.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::Config("gamma must have unit modulus".into()));
        }
        Ok(())
    }
}

impl Default for HomotopyConfig {
    fn default() -> Self {
        HomotopyConfig::from_seed(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathStatus {
    Finite,
    Diverged,
    Failed,
}

impl std::fmt::Display for PathStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PathStatus::Finite => "finite",
            PathStatus::Diverged => "diverged",
            PathStatus::Failed => "failed",
        })
    }
}

#[derive(Debug, Clone)]
pub struct PathResult {
    pub status: PathStatus,
    /// Populated for finite paths only.
    pub endpoint: Option<Vec<Complex64>>,
    /// Final iterate regardless of status; for diverged paths this is the
    /// material for the at-infinity direction.
    pub last_point: Vec<Complex64>,
    pub last_t: f64,
    pub steps: usize,
    pub final_residual: f64,
}

/// H(x,t) = gamma*t*start(x) + (1-t)*target(x).
#[derive(Debug, Clone)]
pub struct LinearHomotopy {
    start: PolySystem,
    target: PolySystem,
    gamma: Complex64,
    n: usize,
    /// max total degree across both systems; residual scales like
    /// ||x||^deg_scale far from the origin
    deg_scale: i32,
}

impl LinearHomotopy {
    pub fn gamma_trick(start: PolySystem, target: PolySystem, gamma: Complex64) -> Result<Self> {
        if start.nvars() != target.nvars() {
            return Err(Error::DimensionMismatch {
                expected: target.nvars(),
                got: start.nvars(),
            });
        }
        let n = target.nvars();
        let deg_scale = start
            .degrees()
            .iter()
            .chain(target.degrees().iter())
            .copied()
            .max()
            .unwrap_or(1)
            .max(1) as i32;
        Ok(LinearHomotopy {
            start,
            target,
            gamma,
            n,
            deg_scale,
        })
    }

    /// Straight parameter segment: at t=1 the system is `from`, at t=0 it is
    /// `to`. Exact whenever coefficients are affine in the parameters.
    pub fn segment(from: PolySystem, to: PolySystem) -> Result<Self> {
        LinearHomotopy::gamma_trick(from, to, Complex64::new(1.0, 0.0))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn target(&self) -> &PolySystem {
        &self.target
    }

    /// One pass producing H, H_t, and the Jacobian H_x at (x, t).
    fn eval(&self, x: &[Complex64], t: Complex64, ws: &mut Workspace) {
        let n = self.n;
        let gt = self.gamma * t;
        let mt = Complex64::new(1.0, 0.0) - t;
        for i in 0..n {
            let g = self.start.polys()[i].eval_grad(x, &mut ws.grad_a);
            let f = self.target.polys()[i].eval_grad(x, &mut ws.grad_b);
            ws.h[i] = gt * g + mt * f;
            ws.ht[i] = self.gamma * g - f;
            for j in 0..n {
                ws.jac[i * n + j] = gt * ws.grad_a[j] + mt * ws.grad_b[j];
            }
        }
    }
}

struct Workspace {
    h: Vec<Complex64>,
    ht: Vec<Complex64>,
    grad_a: Vec<Complex64>,
    grad_b: Vec<Complex64>,
    jac: Vec<Complex64>,
    piv: Vec<usize>,
    k: [Vec<Complex64>; 4],
    xs: Vec<Complex64>,
}

impl Workspace {
    fn new(n: usize) -> Workspace {
        let z = vec![Complex64::ZERO; n];
        Workspace {
            h: z.clone(),
            ht: z.clone(),
            grad_a: z.clone(),
            grad_b: z.clone(),
            jac: vec![Complex64::ZERO; n * n],
            piv: vec![0; n],
            k: [z.clone(), z.clone(), z.clone(), z.clone()],
            xs: z,
        }
    }
}

fn norm_inf_vec(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn all_finite(x: &[Complex64]) -> bool {
    x.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// dx/ds for the segment t(s) = t0 + s*dt; writes into `out`.
fn velocity(
    hom: &LinearHomotopy,
    x: &[Complex64],
    t: Complex64,
    dt: Complex64,
    ws: &mut Workspace,
    out_idx: usize,
) -> bool {
    hom.eval(x, t, ws);
    if linalg::lu_factor(&mut ws.jac, hom.n, &mut ws.piv).is_err() {
        return false;
    }
    for i in 0..hom.n {
        ws.k[out_idx][i] = -(ws.ht[i] * dt);
    }
    let (head, tail) = ws.k.split_at_mut(out_idx);
    let target = &mut tail[0];
    let _ = head;
    linalg::lu_solve(&ws.jac, hom.n, &ws.piv, target);
    all_finite(target)
}

/// Newton iteration at fixed t. Residual acceptance is relative to
/// max(1, ||x||)^deg so that correction remains meaningful on the way to
/// infinity; the final endpoint acceptance uses an absolute bound instead.
fn correct(
    hom: &LinearHomotopy,
    x: &mut [Complex64],
    t: Complex64,
    tol: f64,
    max_iters: usize,
    ws: &mut Workspace,
) -> Option<f64> {
    let n = hom.n;
    for _ in 0..=max_iters {
        hom.eval(x, t, ws);
        let res = norm_inf_vec(&ws.h);
        if !res.is_finite() {
            return None;
        }
        let scale = norm_inf_vec(x).max(1.0).powi(hom.deg_scale);
        if res < tol * scale {
            return Some(res);
        }
        if linalg::lu_factor(&mut ws.jac, n, &mut ws.piv).is_err() {
            return None;
        }
        for i in 0..n {
            ws.h[i] = -ws.h[i];
        }
        let rhs = std::mem::take(&mut ws.h);
        let mut rhs = rhs;
        linalg::lu_solve(&ws.jac, n, &ws.piv, &mut rhs);
        for i in 0..n {
            x[i] += rhs[i];
        }
        ws.h = rhs;
        if !all_finite(x) {
            return None;
        }
    }
    hom.eval(x, t, ws);
    let res = norm_inf_vec(&ws.h);
    let scale = norm_inf_vec(x).max(1.0).powi(hom.deg_scale);
    (res.is_finite() && res < tol * scale).then_some(res)
}

/// Newton against the target system alone (t = 0). The acceptance bound is
/// `tol` or the f64 cancellation floor of evaluating at the iterate,
/// whichever is larger: a solution with big coordinates can never reach a
/// small absolute residual. Keeps iterating past the bound while the
/// residual still improves so that multiple roots, where convergence is
/// only linear, land close enough to the exact point for deduplication.
fn polish_at_target(
    hom: &LinearHomotopy,
    x: &mut [Complex64],
    tol: f64,
    max_iters: usize,
    ws: &mut Workspace,
) -> Option<f64> {
    let n = hom.n;
    let mut best_res = f64::INFINITY;
    let mut best_x = x.to_vec();
    let mut hit = false;
    let mut stagnant = 0usize;
    for _ in 0..max_iters {
        hom.eval(x, Complex64::ZERO, ws);
        let res = norm_inf_vec(&ws.h);
        if !res.is_finite() || !all_finite(x) {
            break;
        }
        if res < best_res {
            if res > best_res * 0.5 {
                stagnant += 1;
            } else {
                stagnant = 0;
            }
            best_res = res;
            best_x.copy_from_slice(x);
        } else {
            stagnant += 1;
        }
        let bound = tol.max(NOISE_FACTOR * hom.target.eval_abs_max(x));
        if res < bound {
            hit = true;
        }
        if hit && (stagnant >= 2 || res < 1e-15) {
            break;
        }
        if linalg::lu_factor(&mut ws.jac, n, &mut ws.piv).is_err() {
            break;
        }
        for i in 0..n {
            ws.h[i] = -ws.h[i];
        }
        let mut rhs = std::mem::take(&mut ws.h);
        linalg::lu_solve(&ws.jac, n, &ws.piv, &mut rhs);
        for i in 0..n {
            x[i] += rhs[i];
        }
        ws.h = rhs;
    }
    x.copy_from_slice(&best_x);
    let bound = tol.max(NOISE_FACTOR * hom.target.eval_abs_max(&best_x));
    (hit || best_res < bound).then_some(best_res)
}

enum SegmentEnd {
    Reached,
    Diverged { t: f64 },
    Failed { t: f64 },
}

/// Adaptive RK4 + Newton along the straight segment from t0 to t1 (complex
/// endpoints allowed). Mutates x; accumulates accepted steps into `steps`.
fn track_segment(
    hom: &LinearHomotopy,
    x: &mut [Complex64],
    t0: Complex64,
    t1: Complex64,
    cfg: &HomotopyConfig,
    ws: &mut Workspace,
    steps: &mut usize,
) -> SegmentEnd {
    let dt = t1 - t0;
    let seg_len = dt.norm();
    if seg_len == 0.0 {
        return SegmentEnd::Reached;
    }
    let t_at = |s: f64| t0 + dt * s;
    let real_t = |s: f64| t_at(s).norm();
    let mut s = 0.0f64;
    let mut h = (cfg.step_init / seg_len).min(1.0);
    let h_min = cfg.step_min / seg_len;
    let h_max = (cfg.step_max / seg_len).min(1.0);
    let mut consec = 0usize;
    let mut attempts = 0usize;
    let n = hom.n;
    while s < 1.0 {
        attempts += 1;
        if attempts > 100_000 {
            return SegmentEnd::Failed { t: real_t(s) };
        }
        let hs = h.min(1.0 - s);
        // classical RK4 on dx/ds
        let ok = 'stages: {
            if !velocity(hom, x, t_at(s), dt, ws, 0) {
                break 'stages false;
            }
            for i in 0..n {
                ws.xs[i] = x[i] + ws.k[0][i] * (hs / 2.0);
            }
            let xs = std::mem::take(&mut ws.xs);
            let ok = velocity(hom, &xs, t_at(s + hs / 2.0), dt, ws, 1);
            ws.xs = xs;
            if !ok {
                break 'stages false;
            }
            for i in 0..n {
                ws.xs[i] = x[i] + ws.k[1][i] * (hs / 2.0);
            }
            let xs = std::mem::take(&mut ws.xs);
            let ok = velocity(hom, &xs, t_at(s + hs / 2.0), dt, ws, 2);
            ws.xs = xs;
            if !ok {
                break 'stages false;
            }
            for i in 0..n {
                ws.xs[i] = x[i] + ws.k[2][i] * hs;
            }
            let xs = std::mem::take(&mut ws.xs);
            let ok = velocity(hom, &xs, t_at(s + hs), dt, ws, 3);
            ws.xs = xs;
            ok
        };
        let mut accepted = false;
        if ok {
            for i in 0..n {
                ws.xs[i] = x[i]
                    + (ws.k[0][i] + (ws.k[1][i] + ws.k[2][i]) * 2.0 + ws.k[3][i]) * (hs / 6.0);
            }
            if all_finite(&ws.xs) {
                let pred_disp = dist_inf(&ws.xs, x);
                ws.k[0].copy_from_slice(&ws.xs);
                let mut xc = std::mem::take(&mut ws.xs);
                let corrected = correct(
                    hom,
                    &mut xc,
                    t_at(s + hs),
                    cfg.corrector_tol,
                    cfg.corrector_max_iters,
                    ws,
                );
                if corrected.is_some() {
                    // a corrector that moves farther than half the predicted
                    // step has likely slid into a neighboring path's basin
                    let corr_disp = dist_inf(&xc, &ws.k[0]);
                    if corr_disp <= 0.5 * pred_disp + 1e-10 * (1.0 + norm_inf_vec(&xc)) {
                        x.copy_from_slice(&xc);
                        accepted = true;
                    }
                }
                ws.xs = xc;
            }
        }
        if accepted {
            s += hs;
            *steps += 1;
            consec += 1;
            if consec >= 5 {
                h = (h * 1.5).min(h_max);
                consec = 0;
            }
            let nx = norm_inf_vec(x);
            if nx > cfg.divergence_radius {
                return SegmentEnd::Diverged { t: real_t(s) };
            }
        } else {
            consec = 0;
            h /= 2.0;
            if h < h_min {
                return SegmentEnd::Failed { t: real_t(s) };
            }
            // far past the radius nothing is ambiguous; stop fighting
            if norm_inf_vec(x) > 100.0 * cfg.divergence_radius {
                return SegmentEnd::Diverged { t: real_t(s) };
            }
        }
    }
    SegmentEnd::Reached
}

// endgame shape: geometric t-halving with endpoint jumps, then circular
// loops as a last resort
const JUMP_START_T: f64 = 1e-4;
const JUMP_AGREE: f64 = 1e-8;
const ENDPOINT_TOL: f64 = 1e-11;
const POLISH_ITERS: usize = 40;
const T_FLOOR: f64 = 1e-40;
const CAUCHY_CHORDS: usize = 16;
const CAUCHY_MAX_CYCLES: usize = 8;
// paths escaping like t^(-1/m) with large m never reach the divergence
// radius before the t floor; persistent norm growth across halvings is the
// tell (a converging path has a finite limit and must flatten out)
const GROWTH_MIN_NORM: f64 = 1e2;
const GROWTH_RATIO: f64 = 1.02;
const GROWTH_STREAK: usize = 20;
const GROWTH_TOTAL: f64 = 10.0;
// multiple of f64 epsilon on the absolute-value evaluation; covers the
// term-summation rounding of one system evaluation with headroom
const NOISE_FACTOR: f64 = 32.0 * f64::EPSILON;

/// Attempts the Cauchy integral endgame on a circle of radius `t_c`:
/// track around |t| = t_c until the loop closes, average the samples, then
/// polish against the target. Used for endpoints Newton cannot reach.
fn cauchy_endgame(
    hom: &LinearHomotopy,
    x0: &[Complex64],
    t_c: f64,
    cfg: &HomotopyConfig,
    ws: &mut Workspace,
    steps: &mut usize,
) -> Option<(Vec<Complex64>, f64)> {
    let n = hom.n;
    let mut cur = x0.to_vec();
    let loop_start = x0.to_vec();
    let mut acc = vec![Complex64::ZERO; n];
    let mut count = 0usize;
    for _cycle in 0..CAUCHY_MAX_CYCLES {
        for j in 0..CAUCHY_CHORDS {
            let a = std::f64::consts::TAU * j as f64 / CAUCHY_CHORDS as f64;
            let b = std::f64::consts::TAU * (j + 1) as f64 / CAUCHY_CHORDS as f64;
            let ta = Complex64::from_polar(t_c, a);
            let tb = Complex64::from_polar(t_c, b);
            match track_segment(hom, &mut cur, ta, tb, cfg, ws, steps) {
                SegmentEnd::Reached => {}
                _ => return None,
            }
            for i in 0..n {
                acc[i] += cur[i];
            }
            count += 1;
        }
        let dist = cur
            .iter()
            .zip(&loop_start)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        if dist < 1e-8 * (1.0 + norm_inf_vec(&loop_start)) {
            let mut mean: Vec<Complex64> =
                acc.iter().map(|z| z / count as f64).collect();
            let res = polish_at_target(hom, &mut mean, ENDPOINT_TOL, POLISH_ITERS, ws)?;
            return Some((mean, res));
        }
    }
    None
}

/// Tracks one path of the homotopy from its start point at t=1 to t=0.
pub fn track_path(hom: &LinearHomotopy, start: &[Complex64], cfg: &HomotopyConfig) -> PathResult {
    let mut ws = Workspace::new(hom.n);
    let mut x = start.to_vec();
    let mut steps = 0usize;
    let one = Complex64::new(1.0, 0.0);
    let t_end = Complex64::new(cfg.endgame_start_t, 0.0);

    let fail = |x: Vec<Complex64>, t: f64, steps: usize, ws: &mut Workspace, hom: &LinearHomotopy| {
        hom.eval(&x, Complex64::new(t, 0.0), ws);
        PathResult {
            status: PathStatus::Failed,
            endpoint: None,
            last_point: x,
            last_t: t,
            steps,
            final_residual: norm_inf_vec(&ws.h),
        }
    };
    let diverge = |x: Vec<Complex64>, t: f64, steps: usize, ws: &mut Workspace, hom: &LinearHomotopy| {
        hom.eval(&x, Complex64::new(t, 0.0), ws);
        PathResult {
            status: PathStatus::Diverged,
            endpoint: None,
            last_point: x,
            last_t: t,
            steps,
            final_residual: norm_inf_vec(&ws.h),
        }
    };

    match track_segment(hom, &mut x, one, t_end, cfg, &mut ws, &mut steps) {
        SegmentEnd::Reached => {}
        SegmentEnd::Diverged { t } => return diverge(x, t, steps, &mut ws, hom),
        SegmentEnd::Failed { t } => return fail(x, t, steps, &mut ws, hom),
    }

    // geometric descent with endpoint jumps once t is small; a jump is
    // trusted only when the displacement is small compared to the current
    // iterate (a diverging path would have to leap across the whole space)
    // and two consecutive jumps land on the same point
    let mut t_k = cfg.endgame_start_t;
    let mut prev_jump: Option<(Vec<Complex64>, f64)> = None;
    let entry_norm = norm_inf_vec(&x);
    let mut nx_prev = entry_norm;
    let mut growth_streak = 0usize;
    let mut suspect_escape = false;
    while t_k > T_FLOOR {
        if t_k <= JUMP_START_T {
            let mut cand = x.clone();
            if let Some(res) = polish_at_target(hom, &mut cand, ENDPOINT_TOL, POLISH_ITERS, &mut ws)
            {
                let disp = dist_inf(&cand, &x);
                // big endpoints are approached slowly and sit a few percent
                // away for many halvings; an escaping iterate that collapses
                // onto an unrelated root moves by its whole norm, so half
                // the norm still separates the two
                let nx_here = norm_inf_vec(&x);
                let guard = if nx_here > GROWTH_MIN_NORM { 0.5 } else { 0.02 };
                if disp < guard * (1.0 + nx_here) {
                    if let Some((prev, prev_disp)) = &prev_jump {
                        let agree = dist_inf(&cand, prev);
                        // both tolerances relative to the iterate scale: at
                        // big coordinates noise-limited Newton results differ
                        // by more than any absolute amount. The displacement
                        // must not grow between consecutive jumps: an iterate
                        // escaping past a finite attractor polishes onto the
                        // same point while its distance to it keeps climbing.
                        let scale = 1.0 + norm_inf_vec(&cand);
                        if agree < JUMP_AGREE * scale
                            && disp <= 1.05 * prev_disp + JUMP_AGREE * scale
                        {
                            return PathResult {
                                status: PathStatus::Finite,
                                endpoint: Some(cand.clone()),
                                last_point: cand,
                                last_t: 0.0,
                                steps,
                                final_residual: res,
                            };
                        }
                    }
                    prev_jump = Some((cand, disp));
                } else {
                    prev_jump = None;
                }
            } else {
                prev_jump = None;
            }
        }
        let t_next = t_k / 2.0;
        match track_segment(
            hom,
            &mut x,
            Complex64::new(t_k, 0.0),
            Complex64::new(t_next, 0.0),
            cfg,
            &mut ws,
            &mut steps,
        ) {
            SegmentEnd::Reached => {
                t_k = t_next;
                let nx = norm_inf_vec(&x);
                if !suspect_escape && nx > GROWTH_MIN_NORM && nx > nx_prev * GROWTH_RATIO {
                    growth_streak += 1;
                    if growth_streak >= GROWTH_STREAK {
                        // classification deferred, jumps keep running: a
                        // fast escape still crosses the radius with a clean
                        // direction, a slow one is settled at the floor, and
                        // a slow approach to a big finite endpoint is still
                        // claimed by the jump test
                        suspect_escape = true;
                    }
                } else if !suspect_escape {
                    growth_streak = 0;
                }
                nx_prev = nx;
            }
            SegmentEnd::Diverged { t } => return diverge(x, t, steps, &mut ws, hom),
            SegmentEnd::Failed { t } => {
                let nx = norm_inf_vec(&x);
                if suspect_escape
                    || (nx > GROWTH_MIN_NORM && nx > GROWTH_TOTAL * (1.0 + entry_norm))
                {
                    return diverge(x, t, steps, &mut ws, hom);
                }
                // suspected singular endpoint: circular endgame at this radius
                if let Some((end, res)) =
                    cauchy_endgame(hom, &x, t_k, cfg, &mut ws, &mut steps)
                {
                    return PathResult {
                        status: PathStatus::Finite,
                        endpoint: Some(end.clone()),
                        last_point: end,
                        last_t: 0.0,
                        steps,
                        final_residual: res,
                    };
                }
                return fail(x, t, steps, &mut ws, hom);
            }
        }
    }
    // never converged: a norm that kept climbing since the endgame began
    // marks a slow escape; otherwise try the circle once at the floor
    let nx = norm_inf_vec(&x);
    if suspect_escape || (nx > GROWTH_MIN_NORM && nx > GROWTH_TOTAL * (1.0 + entry_norm)) {
        return diverge(x, t_k, steps, &mut ws, hom);
    }
    if let Some((end, res)) = cauchy_endgame(hom, &x, t_k * 2.0, cfg, &mut ws, &mut steps) {
        return PathResult {
            status: PathStatus::Finite,
            endpoint: Some(end.clone()),
            last_point: end,
            last_t: 0.0,
            steps,
            final_residual: res,
        };
    }
    fail(x, t_k, steps, &mut ws, hom)
}

/// Total-degree start system g_i = x_i^D - 1 at the uniform degree
/// D = max row degree, with its full set of roots-of-unity start points,
/// ordered little-endian in the degree radix. The uniform degree keeps the
/// path count at the generic Bezout number of the family even when a
/// particular instance degenerates some row to lower degree; surplus paths
/// simply diverge.
pub fn start_system(sys: &PolySystem, _gamma: Complex64) -> Result<(PolySystem, Vec<Vec<Complex64>>)> {
    let n = sys.nvars();
    let mut dmax = 0i64;
    for (i, p) in sys.polys().iter().enumerate() {
        let d = p.degree();
        if d < 1 {
            return Err(Error::ZeroDegree(i));
        }
        dmax = dmax.max(d);
    }
    let degrees = vec![dmax as usize; n];
    let total: usize = degrees.iter().try_fold(1usize, |acc, &d| {
        acc.checked_mul(d).filter(|&v| v <= 1_000_000)
    }).ok_or_else(|| Error::Config("start system has too many paths".into()))?;
    let one = Complex64::new(1.0, 0.0);
    let mut polys = Vec::with_capacity(n);
    for (j, &d) in degrees.iter().enumerate() {
        let mut e = vec![0u32; n];
        e[j] = d as u32;
        polys.push(Poly::new(n, vec![(one, e), (-one, vec![0; n])])?);
    }
    let g = PolySystem::new(n, polys)?;
    let mut starts = Vec::with_capacity(total);
    let mut counter = vec![0usize; n];
    for _ in 0..total {
        let pt: Vec<Complex64> = counter
            .iter()
            .zip(&degrees)
            .map(|(&k, &d)| Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / d as f64))
            .collect();
        starts.push(pt);
        for j in 0..n {
            counter[j] += 1;
            if counter[j] < degrees[j] {
                break;
            }
            counter[j] = 0;
        }
    }
    Ok((g, starts))
}

/// Tracks every start point; order of results matches order of starts.
pub fn track_many(
    hom: &LinearHomotopy,
    starts: &[Vec<Complex64>],
    cfg: &HomotopyConfig,
) -> Vec<PathResult> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        starts
            .par_iter()
            .map(|s| track_path(hom, s, cfg))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        starts.iter().map(|s| track_path(hom, s, cfg)).collect()
    }
}

/// Deduplicated finite endpoints plus the path bookkeeping.
#[derive(Debug, Clone)]
pub struct SolutionSet {
    /// Canonically ordered distinct solutions.
    pub solutions: Vec<Vec<Complex64>>,
    /// Paths that landed on each solution; > 1 marks a multiple root.
    pub multiplicities: Vec<usize>,
    /// Jacobian condition number beyond 1e12 at the solution.
    pub singular: Vec<bool>,
    /// Infinity-norm residual of each stored solution.
    pub residuals: Vec<f64>,
    /// Finite endpoints before deduplication.
    pub finite_paths: usize,
    pub diverged_count: usize,
    pub failed_count: usize,
    pub total_paths: usize,
    /// Full records of the diverged paths, for at-infinity analysis.
    pub diverged: Vec<PathResult>,
    pub gamma: Complex64,
}

impl SolutionSet {
    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    pub fn conservation_holds(&self) -> bool {
        self.finite_paths + self.diverged_count + self.failed_count == self.total_paths
    }
}

const SINGULAR_COND: f64 = 1e12;

fn canonical_cmp(a: &[Complex64], b: &[Complex64]) -> std::cmp::Ordering {
    use std::cmp::Ordering;
    let key = |z: f64| (z * 1e8).round() as i64;
    for (x, y) in a.iter().zip(b) {
        match key(x.re).cmp(&key(y.re)) {
            Ordering::Equal => {}
            o => return o,
        }
        match key(x.im).cmp(&key(y.im)) {
            Ordering::Equal => {}
            o => return o,
        }
    }
    for (x, y) in a.iter().zip(b) {
        match x.re.total_cmp(&y.re) {
            Ordering::Equal => {}
            o => return o,
        }
        match x.im.total_cmp(&y.im) {
            Ordering::Equal => {}
            o => return o,
        }
    }
    Ordering::Equal
}

fn dist_inf(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn assemble_solution_set(
    sys: &PolySystem,
    hom: &LinearHomotopy,
    results: Vec<PathResult>,
    cfg: &HomotopyConfig,
) -> SolutionSet {
    let total = results.len();
    let mut ws = Workspace::new(sys.nvars());
    let mut finite: Vec<(Vec<Complex64>, f64)> = Vec::new();
    let mut diverged = Vec::new();
    let mut failed = 0usize;
    for r in results {
        match r.status {
            PathStatus::Finite => {
                let mut x = r.endpoint.expect("finite paths carry endpoints");
                let res = polish_at_target(hom, &mut x, ENDPOINT_TOL, POLISH_ITERS, &mut ws)
                    .unwrap_or(r.final_residual);
                finite.push((x, res));
            }
            PathStatus::Diverged => diverged.push(r),
            PathStatus::Failed => failed += 1,
        }
    }
    let finite_paths = finite.len();
    finite.sort_by(|a, b| canonical_cmp(&a.0, &b.0));
    let mut solutions: Vec<Vec<Complex64>> = Vec::new();
    let mut multiplicities: Vec<usize> = Vec::new();
    let mut residuals: Vec<f64> = Vec::new();
    for (x, res) in finite {
        match solutions
            .iter()
            .position(|s| dist_inf(s, &x) <= cfg.dedup_tol)
        {
            Some(i) => {
                multiplicities[i] += 1;
                residuals[i] = residuals[i].min(res);
            }
            None => {
                solutions.push(x);
                multiplicities.push(1);
                residuals.push(res);
            }
        }
    }
    // several paths on one point certify a multiple root even when the
    // condition number misses it (a 1x1 Jacobian always has cond 1)
    let singular = solutions
        .iter()
        .zip(&multiplicities)
        .map(|(x, &m)| {
            if m > 1 {
                return true;
            }
            let jac = crate::poly::jacobian_at(sys, x).expect("dimensions agree");
            linalg::cond_inf(&jac, sys.nvars()) > SINGULAR_COND
        })
        .collect();
    SolutionSet {
        solutions,
        multiplicities,
        singular,
        residuals,
        finite_paths,
        diverged_count: diverged.len(),
        failed_count: failed,
        total_paths: total,
        diverged,
        gamma: hom.gamma,
    }
}

/// Tracks all total-degree paths to the target with the configured gamma
/// and aggregates endpoints. No retry.
pub fn solve_once(sys: &PolySystem, cfg: &HomotopyConfig) -> Result<SolutionSet> {
    cfg.validate()?;
    let (g, starts) = start_system(sys, cfg.gamma)?;
    let hom = LinearHomotopy::gamma_trick(g, sys.clone(), cfg.gamma)?;
    let results = track_many(&hom, &starts, cfg);
    Ok(assemble_solution_set(sys, &hom, results, cfg))
}

/// [`solve_once`], but when any path fails the whole solve is retried with
/// a fresh gamma and the better outcome is kept.
pub fn solve_all(sys: &PolySystem, cfg: &HomotopyConfig) -> Result<SolutionSet> {
    let first = solve_once(sys, cfg)?;
    if first.failed_count == 0 {
        return Ok(first);
    }
    let mut retry_cfg = cfg.clone();
    retry_cfg.gamma = cfg.retry_gamma();
    let second = solve_once(sys, &retry_cfg)?;
    Ok(if second.failed_count < first.failed_count {
        second
    } else {
        first
    })
}

/// What a diverged path looks like at infinity.
#[derive(Debug, Clone)]
pub struct DivergenceDiagnosis {
    /// Last iterate scaled to unit 2-norm.
    pub direction: Vec<Complex64>,
    /// Per-equation magnitude of the top-degree forms at the direction.
    pub top_residuals: Vec<f64>,
    pub max_top_residual: f64,
    /// No phase rotation makes the direction a real vector: the at-infinity
    /// solution cannot come from a real solution leaving the affine chart.
    pub nonreal_at_infinity: bool,
}

/// Analyzes a diverged path against the target system's top-degree forms.
pub fn classify_divergence(sys: &PolySystem, path: &PathResult) -> Result<DivergenceDiagnosis> {
    if path.status != PathStatus::Diverged {
        return Err(Error::NotDiverged);
    }
    let norm2 = path
        .last_point
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt();
    if norm2 == 0.0 {
        return Err(Error::NotDiverged);
    }
    let direction: Vec<Complex64> = path.last_point.iter().map(|z| z / norm2).collect();
    let top = sys.top_form();
    let top_residuals: Vec<f64> = top
        .evaluate(&direction)?
        .iter()
        .map(|z| z.norm())
        .collect();
    let max_top_residual = top_residuals.iter().copied().fold(0.0, f64::max);
    // sum of squares has modulus 1 exactly when all coordinates share a
    // common phase, i.e. when some rotation e^{i phi} x is real
    let sq_sum: Complex64 = direction.iter().map(|z| z * z).sum();
    let nonreal_at_infinity = 1.0 - sq_sum.norm() > 1e-3;
    Ok(DivergenceDiagnosis {
        direction,
        top_residuals,
        max_top_residual,
        nonreal_at_infinity,
    })
}
