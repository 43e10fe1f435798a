//! Power network model and its polynomial system.
//!
//! Buses are classified slack, PV, or PQ. The slack bus is pinned to
//! V_d = vm, V_q = 0 and eliminated, so a network with n buses yields a
//! square system in 2(n-1) unknowns ordered (V_d, V_q) per non-slack bus by
//! ascending bus id: for a four-bus network with slack 1 that is
//! (V_d2, V_q2, V_d3, V_q3, V_d4, V_q4).
//!
//! Sign conventions: the susceptance matrix has B_ik = b_ik off-diagonal and
//! B_ii = -sum_k b_ik, so that in polar form P_i = sum_k vm_i vm_k b_ik
//! sin(th_i - th_k). This is NOT the textbook bus-admittance convention; it
//! is the one under which the reference solution tables for this system
//! family hold verbatim. Conductance uses the standard G_ii = +sum g_ik,
//! G_ik = -g_ik so that losses are nonnegative.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{Poly, PolySystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BusKind {
    Slack,
    Pv,
    Pq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bus {
    pub id: usize,
    pub kind: BusKind,
    /// Voltage magnitude, slack and PV only.
    pub vm: Option<f64>,
    /// Active injection, PV and PQ only.
    pub p: Option<f64>,
    /// Reactive injection, PQ only.
    pub q: Option<f64>,
}

impl Bus {
    pub fn slack(id: usize, vm: f64) -> Bus {
        Bus {
            id,
            kind: BusKind::Slack,
            vm: Some(vm),
            p: None,
            q: None,
        }
    }

    pub fn pv(id: usize, vm: f64, p: f64) -> Bus {
        Bus {
            id,
            kind: BusKind::Pv,
            vm: Some(vm),
            p: Some(p),
            q: None,
        }
    }

    pub fn pq(id: usize, p: f64, q: f64) -> Bus {
        Bus {
            id,
            kind: BusKind::Pq,
            vm: None,
            p: Some(p),
            q: Some(q),
        }
    }
}

/// Transmission line on an unordered bus pair. `b = 0` means no coupling but
/// keeps the pair reserved.
#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    pub from: usize,
    pub to: usize,
    pub b: f64,
    pub g: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerSystem {
    buses: Vec<Bus>,
    lines: Vec<Line>,
    slack: usize,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    buses: Vec<RawBus>,
    lines: Vec<RawLine>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawBus {
    id: usize,
    #[serde(rename = "type")]
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    vm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    q: Option<f64>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawLine {
    from: usize,
    to: usize,
    b: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    g: Option<f64>,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidNetwork(msg.into())
}

impl PowerSystem {
    pub fn new(mut buses: Vec<Bus>, lines: Vec<Line>) -> Result<PowerSystem> {
        if buses.is_empty() {
            return Err(invalid("system has no buses"));
        }
        buses.sort_by_key(|b| b.id);
        let n = buses.len();
        for (i, b) in buses.iter().enumerate() {
            if b.id != i + 1 {
                return Err(invalid(format!(
                    "bus ids must be contiguous 1..{n}, found {}",
                    b.id
                )));
            }
        }
        let mut slack = None;
        for b in &buses {
            match b.kind {
                BusKind::Slack => {
                    if slack.replace(b.id).is_some() {
                        return Err(invalid("more than one slack bus"));
                    }
                    if b.p.is_some() || b.q.is_some() {
                        return Err(invalid(format!("slack bus {} must not set p or q", b.id)));
                    }
                }
                BusKind::Pv => {
                    if b.p.is_none() {
                        return Err(invalid(format!("pv bus {} missing p", b.id)));
                    }
                    if b.q.is_some() {
                        return Err(invalid(format!("pv bus {} must not set q", b.id)));
                    }
                }
                BusKind::Pq => {
                    if b.p.is_none() || b.q.is_none() {
                        return Err(invalid(format!("pq bus {} needs both p and q", b.id)));
                    }
                    if b.vm.is_some() {
                        return Err(invalid(format!("pq bus {} must not set vm", b.id)));
                    }
                }
            }
            match (b.kind, b.vm) {
                (BusKind::Slack | BusKind::Pv, None) => {
                    return Err(invalid(format!("bus {} missing vm", b.id)))
                }
                (BusKind::Slack | BusKind::Pv, Some(vm)) if !(vm > 0.0) || !vm.is_finite() => {
                    return Err(invalid(format!("bus {} has nonpositive vm", b.id)))
                }
                _ => {}
            }
            for v in [b.p, b.q].into_iter().flatten() {
                if !v.is_finite() {
                    return Err(invalid(format!("bus {} has non-finite injection", b.id)));
                }
            }
        }
        let slack = slack.ok_or_else(|| invalid("no slack bus"))?;
        let mut seen: BTreeMap<(usize, usize), ()> = BTreeMap::new();
        for l in &lines {
            if l.from == l.to {
                return Err(invalid(format!("self line at bus {}", l.from)));
            }
            if l.from < 1 || l.from > n || l.to < 1 || l.to > n {
                return Err(invalid(format!("line {}-{} references unknown bus", l.from, l.to)));
            }
            if !l.b.is_finite() || !l.g.is_finite() {
                return Err(invalid(format!("line {}-{} has non-finite parameter", l.from, l.to)));
            }
            if l.g < 0.0 {
                return Err(invalid(format!("line {}-{} has negative conductance", l.from, l.to)));
            }
            let key = (l.from.min(l.to), l.from.max(l.to));
            if seen.insert(key, ()).is_some() {
                return Err(invalid(format!("duplicate line {}-{}", key.0, key.1)));
            }
        }
        Ok(PowerSystem { buses, lines, slack })
    }

    pub fn from_json(text: &str) -> Result<PowerSystem> {
        let raw: RawSystem = serde_json::from_str(text)?;
        let mut buses = Vec::with_capacity(raw.buses.len());
        for rb in raw.buses {
            let kind = match rb.kind.as_str() {
                "slack" => BusKind::Slack,
                "pv" => BusKind::Pv,
                "pq" => BusKind::Pq,
                other => return Err(invalid(format!("unknown bus type {other:?}"))),
            };
            buses.push(Bus {
                id: rb.id,
                kind,
                vm: rb.vm,
                p: rb.p,
                q: rb.q,
            });
        }
        let lines = raw
            .lines
            .into_iter()
            .map(|rl| Line {
                from: rl.from,
                to: rl.to,
                b: rl.b,
                g: rl.g.unwrap_or(0.0),
            })
            .collect();
        PowerSystem::new(buses, lines)
    }

    pub fn to_json(&self) -> String {
        let raw = RawSystem {
            buses: self
                .buses
                .iter()
                .map(|b| RawBus {
                    id: b.id,
                    kind: match b.kind {
                        BusKind::Slack => "slack".into(),
                        BusKind::Pv => "pv".into(),
                        BusKind::Pq => "pq".into(),
                    },
                    vm: b.vm,
                    p: b.p,
                    q: b.q,
                })
                .collect(),
            lines: self
                .lines
                .iter()
                .map(|l| RawLine {
                    from: l.from,
                    to: l.to,
                    b: l.b,
                    g: (l.g != 0.0).then_some(l.g),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&raw).expect("raw system serializes")
    }

    pub fn n(&self) -> usize {
        self.buses.len()
    }

    pub fn buses(&self) -> &[Bus] {
        &self.buses
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub fn slack_id(&self) -> usize {
        self.slack
    }

    pub fn bus(&self, id: usize) -> &Bus {
        &self.buses[id - 1]
    }

    /// Non-slack bus ids in ascending order; defines the variable layout.
    pub fn non_slack_ids(&self) -> Vec<usize> {
        (1..=self.n()).filter(|&id| id != self.slack).collect()
    }

    pub fn nvars(&self) -> usize {
        2 * (self.n() - 1)
    }

    pub fn is_lossless(&self) -> bool {
        self.lines.iter().all(|l| l.g == 0.0)
    }

    pub fn is_pv_only(&self) -> bool {
        self.buses.iter().all(|b| b.kind != BusKind::Pq)
    }

    fn zero_injection(&self) -> bool {
        self.buses
            .iter()
            .all(|b| b.p.unwrap_or(0.0) == 0.0 && b.q.unwrap_or(0.0) == 0.0)
    }

    pub fn is_zero_injection_unit_pv(&self) -> bool {
        self.is_pv_only()
            && self.is_lossless()
            && self.zero_injection()
            && self.buses.iter().all(|b| b.vm == Some(1.0))
    }

    /// Susceptance matrix with B_ik = b_ik and row sums zero.
    pub fn b_matrix(&self) -> Vec<f64> {
        let n = self.n();
        let mut m = vec![0.0; n * n];
        for l in &self.lines {
            let (i, k) = (l.from - 1, l.to - 1);
            m[i * n + k] += l.b;
            m[k * n + i] += l.b;
            m[i * n + i] -= l.b;
            m[k * n + k] -= l.b;
        }
        m
    }

    /// Conductance matrix, standard convention.
    pub fn g_matrix(&self) -> Vec<f64> {
        let n = self.n();
        let mut m = vec![0.0; n * n];
        for l in &self.lines {
            let (i, k) = (l.from - 1, l.to - 1);
            m[i * n + k] -= l.g;
            m[k * n + i] -= l.g;
            m[i * n + i] += l.g;
            m[k * n + k] += l.g;
        }
        m
    }

    /// Builds the square polynomial system with the slack eliminated.
    ///
    /// Per non-slack bus, equations appear in bus order as:
    /// active-power residual, then magnitude residual (PV) or reactive-power
    /// residual (PQ).
    pub fn build_system(&self) -> Result<PolySystem> {
        let n = self.n();
        if n < 2 {
            return Err(invalid("need at least two buses to build a system"));
        }
        let lift = |v: &[f64]| -> Vec<Complex64> {
            v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
        };
        let p: Vec<Complex64> = self
            .buses
            .iter()
            .map(|b| Complex64::new(b.p.unwrap_or(0.0), 0.0))
            .collect();
        let q: Vec<Complex64> = self
            .buses
            .iter()
            .map(|b| Complex64::new(b.q.unwrap_or(0.0), 0.0))
            .collect();
        assemble(self, &lift(&self.b_matrix()), &lift(&self.g_matrix()), &p, &q)
    }

    /// Rescales to unit voltage magnitudes with b̂_ik = vm_i vm_k b_ik; the
    /// polar active-power injections are unchanged as functions of the
    /// angles. Requires a lossless slack/PV network, where that identity
    /// holds.
    pub fn normalize_vm(&self) -> Result<PowerSystem> {
        if !self.is_pv_only() {
            return Err(Error::Unsupported(
                "normalize_vm requires a slack/PV system".into(),
            ));
        }
        if !self.is_lossless() {
            return Err(Error::Unsupported(
                "normalize_vm requires a lossless system".into(),
            ));
        }
        let vm = |id: usize| self.bus(id).vm.expect("pv/slack bus has vm");
        let buses = self
            .buses
            .iter()
            .map(|b| Bus {
                vm: Some(1.0),
                ..b.clone()
            })
            .collect();
        let lines = self
            .lines
            .iter()
            .map(|l| Line {
                b: vm(l.from) * vm(l.to) * l.b,
                ..l.clone()
            })
            .collect();
        PowerSystem::new(buses, lines)
    }

    /// Generic bound on the number of isolated complex solutions for the
    /// lossless PV class: C(2n-2, n-1).
    pub fn complex_bound(&self) -> u128 {
        complex_bound(self.n())
    }

    /// Total-degree (Bezout) bound 2^(2n-2).
    pub fn bezout_bound(&self) -> u128 {
        bezout_bound(self.n())
    }

    /// Active injections at every bus computed from a full rectangular
    /// voltage assignment (slack included, index = id - 1).
    pub fn recover_p(&self, vd: &[f64], vq: &[f64]) -> Vec<f64> {
        let n = self.n();
        let bm = self.b_matrix();
        let gm = self.g_matrix();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|k| {
                        gm[i * n + k] * (vd[i] * vd[k] + vq[i] * vq[k])
                            + bm[i * n + k] * (vq[i] * vd[k] - vd[i] * vq[k])
                    })
                    .sum()
            })
            .collect()
    }

    /// Reactive injections at every bus from a full voltage assignment.
    pub fn recover_q(&self, vd: &[f64], vq: &[f64]) -> Vec<f64> {
        let n = self.n();
        let bm = self.b_matrix();
        let gm = self.g_matrix();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|k| {
                        gm[i * n + k] * (vq[i] * vd[k] - vd[i] * vq[k])
                            - bm[i * n + k] * (vd[i] * vd[k] + vq[i] * vq[k])
                    })
                    .sum()
            })
            .collect()
    }

    /// Active power flowing from `from` into each line, one value per stored
    /// line. Antisymmetric in the endpoints for lossless lines.
    pub fn line_active_flows(&self, vd: &[f64], vq: &[f64]) -> Vec<f64> {
        self.lines
            .iter()
            .map(|l| {
                let (i, k) = (l.from - 1, l.to - 1);
                l.g * (vd[i] * vd[i] + vq[i] * vq[i] - vd[i] * vd[k] - vq[i] * vq[k])
                    + l.b * (vq[i] * vd[k] - vd[i] * vq[k])
            })
            .collect()
    }

    /// Polar active injections P_i(theta) for slack/PV systems, one angle
    /// per bus.
    pub fn polar_p(&self, theta: &[f64]) -> Result<Vec<f64>> {
        if !self.is_pv_only() {
            return Err(Error::Unsupported("polar form requires slack/PV".into()));
        }
        if theta.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: theta.len(),
            });
        }
        let n = self.n();
        let bm = self.b_matrix();
        let gm = self.g_matrix();
        let vm: Vec<f64> = self.buses.iter().map(|b| b.vm.unwrap()).collect();
        Ok((0..n)
            .map(|i| {
                (0..n)
                    .map(|k| {
                        let d = theta[i] - theta[k];
                        vm[i] * vm[k] * (gm[i * n + k] * d.cos() + bm[i * n + k] * d.sin())
                    })
                    .sum()
            })
            .collect())
    }

    /// Full rectangular voltages from per-bus angles (slack/PV).
    pub fn voltages_from_angles(&self, theta: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let vm: Vec<f64> = self.buses.iter().map(|b| b.vm.unwrap_or(1.0)).collect();
        let vd = theta.iter().zip(&vm).map(|(t, v)| v * t.cos()).collect();
        let vq = theta.iter().zip(&vm).map(|(t, v)| v * t.sin()).collect();
        (vd, vq)
    }
}

/// Symmetric susceptance matrix (row sums zero) from per-line complex
/// values, ordered as in `ps.lines()`. Supports parameter continuation with
/// complex line values.
pub(crate) fn b_matrix_from_values(ps: &PowerSystem, values: &[Complex64]) -> Vec<Complex64> {
    let n = ps.n();
    let mut m = vec![Complex64::new(0.0, 0.0); n * n];
    for (l, &v) in ps.lines().iter().zip(values) {
        let (i, k) = (l.from - 1, l.to - 1);
        m[i * n + k] += v;
        m[k * n + i] += v;
        m[i * n + i] -= v;
        m[k * n + k] -= v;
    }
    m
}

/// Core assembly over complex matrices and injections; `bmat`/`gmat` are
/// full n-by-n including diagonals, `p`/`q` are per bus (unused entries
/// ignored). Shared by the real builder and parameter continuation.
pub(crate) fn assemble(
    ps: &PowerSystem,
    bmat: &[Complex64],
    gmat: &[Complex64],
    p: &[Complex64],
    q: &[Complex64],
) -> Result<PolySystem> {
    let n = ps.n();
    let nv = 2 * (n - 1);
    let order = ps.non_slack_ids();
    // bus id -> (vd var index, vq var index); slack maps to None
    let var_of: Vec<Option<(usize, usize)>> = (1..=n)
        .map(|id| {
            order
                .iter()
                .position(|&x| x == id)
                .map(|j| (2 * j, 2 * j + 1))
        })
        .collect();
    let slack_vm = Complex64::new(ps.bus(ps.slack_id()).vm.expect("slack has vm"), 0.0);
    let one = Complex64::new(1.0, 0.0);

    let mut polys = Vec::with_capacity(nv);
    for &i in &order {
        let bi = ps.bus(i);
        let (di, qi) = var_of[i - 1].unwrap();
        let mono = |coeff: Complex64, idx: &[(usize, u32)]| {
            let mut e = vec![0u32; nv];
            for &(j, k) in idx {
                e[j] += k;
            }
            (coeff, e)
        };
        // active power: sum_k G*(dd+qq) + B*(qd-dq) - P_i, slack substituted
        // as V_dk = slack_vm, V_qk = 0
        let mut active: Vec<(Complex64, Vec<u32>)> = Vec::new();
        for k in 1..=n {
            let g = gmat[(i - 1) * n + (k - 1)];
            let b = bmat[(i - 1) * n + (k - 1)];
            match var_of[k - 1] {
                Some((dk, qk)) => {
                    if g != Complex64::ZERO {
                        active.push(mono(g, &[(di, 1), (dk, 1)]));
                        active.push(mono(g, &[(qi, 1), (qk, 1)]));
                    }
                    if b != Complex64::ZERO {
                        active.push(mono(b, &[(qi, 1), (dk, 1)]));
                        active.push(mono(-b, &[(di, 1), (qk, 1)]));
                    }
                }
                None => {
                    if g != Complex64::ZERO {
                        active.push(mono(g * slack_vm, &[(di, 1)]));
                    }
                    if b != Complex64::ZERO {
                        active.push(mono(b * slack_vm, &[(qi, 1)]));
                    }
                }
            }
        }
        active.push(mono(-p[i - 1], &[]));
        polys.push(Poly::new(nv, active)?);

        match bi.kind {
            BusKind::Pv => {
                let vm = bi.vm.expect("pv bus has vm");
                let mag = vec![
                    mono(one, &[(di, 2)]),
                    mono(one, &[(qi, 2)]),
                    mono(Complex64::new(-vm * vm, 0.0), &[]),
                ];
                polys.push(Poly::new(nv, mag)?);
            }
            BusKind::Pq => {
                // reactive power: sum_k G*(qd-dq) - B*(dd+qq) - Q_i
                let mut reactive: Vec<(Complex64, Vec<u32>)> = Vec::new();
                for k in 1..=n {
                    let g = gmat[(i - 1) * n + (k - 1)];
                    let b = bmat[(i - 1) * n + (k - 1)];
                    match var_of[k - 1] {
                        Some((dk, qk)) => {
                            if g != Complex64::ZERO {
                                reactive.push(mono(g, &[(qi, 1), (dk, 1)]));
                                reactive.push(mono(-g, &[(di, 1), (qk, 1)]));
                            }
                            if b != Complex64::ZERO {
                                reactive.push(mono(-b, &[(di, 1), (dk, 1)]));
                                reactive.push(mono(-b, &[(qi, 1), (qk, 1)]));
                            }
                        }
                        None => {
                            if g != Complex64::ZERO {
                                reactive.push(mono(g * slack_vm, &[(qi, 1)]));
                            }
                            if b != Complex64::ZERO {
                                reactive.push(mono(-b * slack_vm, &[(di, 1)]));
                            }
                        }
                    }
                }
                reactive.push(mono(-q[i - 1], &[]));
                polys.push(Poly::new(nv, reactive)?);
            }
            BusKind::Slack => unreachable!("slack excluded from order"),
        }
    }
    PolySystem::new(nv, polys)
}

/// C(2n-2, n-1): generic solution count ceiling for lossless PV networks.
pub fn complex_bound(n: usize) -> u128 {
    binomial(2 * n as u128 - 2, n as u128 - 1)
}

/// Total-degree bound 2^(2n-2).
pub fn bezout_bound(n: usize) -> u128 {
    1u128 << (2 * n - 2)
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}
