//! Univariate eliminant of the nonconstant solutions and exact real-root
//! counting.
//!
//! The squared vq coordinate of one representative per +-vq pair gives a
//! monic polynomial r(x) built by Vieta expansion over exact rationals.
//! Positive-root counts from Descartes' rule and Sturm chains then recover
//! the system's real-solution count as (sign-pattern count) + 2 * (positive
//! roots of r).

use num_complex::Complex64;
use num_traits::Signed;

use crate::error::{Error, Result};
use crate::exact::{rat_from_f64, rat_one, rat_to_f64, rat_zero, CRat, Rat};
use crate::net::PowerSystem;
use crate::track::SolutionSet;

const PAIR_TOL: f64 = 1e-8;
const COEFF_IMAG_TOL: f64 = 1e-8;
const DISTINCT_TOL: f64 = 1e-10;
const DISTINCT_REL: f64 = 1e-7;
const ROOT_RESIDUAL_FACTOR: f64 = 1e-6;
const UNIT_ROOT_SLACK: f64 = 1e-9;

/// Real univariate polynomial, coefficients ascending, exact rational
/// arithmetic throughout. Trailing zero coefficients are trimmed.
#[derive(Debug, Clone, PartialEq)]
pub struct UniPoly {
    coeffs: Vec<Rat>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<Rat>) -> UniPoly {
        while coeffs.last().map(|c| c == &rat_zero()).unwrap_or(false) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn from_f64_descending(c: &[f64]) -> UniPoly {
        UniPoly::new(c.iter().rev().map(|&x| rat_from_f64(x)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports -1.
    pub fn degree(&self) -> i64 {
        self.coeffs.len() as i64 - 1
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn coeffs_f64_descending(&self) -> Vec<f64> {
        self.coeffs.iter().rev().map(rat_to_f64).collect()
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last().map(|c| c == &rat_one()).unwrap_or(false)
    }

    pub fn monic(&self) -> UniPoly {
        match self.coeffs.last() {
            None => self.clone(),
            Some(lead) => UniPoly::new(self.coeffs.iter().map(|c| c / lead).collect()),
        }
    }

    pub fn eval_rat(&self, x: &Rat) -> Rat {
        let mut acc = rat_zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_c64(&self, x: Complex64) -> Complex64 {
        let mut acc = Complex64::ZERO;
        for c in self.coeffs.iter().rev() {
            acc = acc * x + Complex64::new(rat_to_f64(c), 0.0);
        }
        acc
    }

    pub fn derivative(&self) -> UniPoly {
        if self.coeffs.len() <= 1 {
            return UniPoly::new(vec![]);
        }
        UniPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * Rat::from_integer(k.into()))
                .collect(),
        )
    }

    /// Euclidean remainder self mod d; d must be nonzero.
    fn rem(&self, d: &UniPoly) -> UniPoly {
        assert!(!d.is_zero());
        let mut r = self.coeffs.clone();
        let dd = d.coeffs.len();
        let lead = d.coeffs.last().unwrap();
        while r.len() >= dd {
            let q = r.last().unwrap() / lead;
            let shift = r.len() - dd;
            for (k, c) in d.coeffs.iter().enumerate() {
                let v = &r[shift + k] - &(c * &q);
                r[shift + k] = v;
            }
            // leading entry cancels exactly
            r.pop();
            while r.last().map(|c| c == &rat_zero()).unwrap_or(false) {
                r.pop();
            }
        }
        UniPoly::new(r)
    }

    /// Monic greatest common divisor with `other`.
    pub fn gcd(&self, other: &UniPoly) -> UniPoly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Exact quotient; panics unless `d` divides self.
    fn div_exact(&self, d: &UniPoly) -> UniPoly {
        assert!(!d.is_zero());
        let mut r = self.coeffs.clone();
        let dd = d.coeffs.len();
        let lead = d.coeffs.last().unwrap();
        let mut q = vec![rat_zero(); r.len().saturating_sub(dd) + 1];
        while r.len() >= dd {
            let c = r.last().unwrap() / lead;
            let shift = r.len() - dd;
            q[shift] = c.clone();
            for (k, dc) in d.coeffs.iter().enumerate() {
                let v = &r[shift + k] - &(dc * &c);
                r[shift + k] = v;
            }
            r.pop();
            while r.last().map(|c| c == &rat_zero()).unwrap_or(false) {
                r.pop();
            }
        }
        assert!(r.is_empty(), "division was not exact");
        UniPoly::new(q)
    }

    /// Descending-power display with fixed decimals, in the compact
    /// x^6+13.4913x^5-... style.
    pub fn format_descending(&self, decimals: usize) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        let deg = self.degree();
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            let v = rat_to_f64(c);
            if v == 0.0 && k as i64 != deg {
                continue;
            }
            let mag = format!("{:.*}", decimals, v.abs());
            let sign = if v < 0.0 { "-" } else { "+" };
            let power = match k {
                0 => String::new(),
                1 => "x".to_string(),
                _ => format!("x^{k}"),
            };
            if out.is_empty() {
                if v < 0.0 {
                    out.push('-');
                }
            } else {
                out.push_str(sign);
            }
            let one = format!("{:.*}", decimals, 1.0);
            if mag == one && k > 0 {
                out.push_str(&power);
            } else {
                out.push_str(&mag);
                out.push_str(&power);
            }
        }
        out
    }
}

/// Monic polynomial with the given exact roots, expanded incrementally.
/// Errors when the accumulated coefficients keep an imaginary residue
/// above tolerance, which signals a wrong pairing upstream.
fn poly_from_roots(roots: &[CRat]) -> Result<UniPoly> {
    let mut coeffs: Vec<CRat> = vec![CRat::one()];
    for r in roots {
        let mut next = vec![CRat::zero(); coeffs.len() + 1];
        for (k, c) in coeffs.iter().enumerate() {
            next[k + 1] = next[k + 1].add(c);
            next[k] = next[k].sub(&r.mul(c));
        }
        coeffs = next;
    }
    let imag_max = coeffs
        .iter()
        .map(|c| rat_to_f64(&c.im).abs())
        .fold(0.0, f64::max);
    // relative to the coefficient scale: conjugate input pairs only cancel
    // up to the noise of the tracked values they came from
    let re_scale = coeffs
        .iter()
        .map(|c| rat_to_f64(&c.re).abs())
        .fold(1.0, f64::max);
    if imag_max >= COEFF_IMAG_TOL * re_scale {
        return Err(Error::ImaginaryResidue(imag_max));
    }
    Ok(UniPoly::new(coeffs.into_iter().map(|c| c.re).collect()))
}

/// Builds the monic eliminant from the nonconstant solutions: pairs them
/// by +-value in coordinate `coord_index`, squares one representative per
/// pair, and expands the product of (x - square).
pub fn build_eliminant(nonconstant: &[Vec<Complex64>], coord_index: usize) -> Result<UniPoly> {
    if nonconstant.len() % 2 != 0 {
        return Err(Error::NonGenericCoordinate {
            coord: coord_index,
            reason: format!("{} solutions cannot pair up", nonconstant.len()),
        });
    }
    let values: Vec<Complex64> = nonconstant
        .iter()
        .map(|s| {
            s.get(coord_index).copied().ok_or(Error::DimensionMismatch {
                expected: coord_index + 1,
                got: s.len(),
            })
        })
        .collect::<Result<_>>()?;
    let mut used = vec![false; values.len()];
    let mut reps: Vec<Complex64> = Vec::with_capacity(values.len() / 2);
    for j in 0..values.len() {
        if used[j] {
            continue;
        }
        used[j] = true;
        // relative tolerance: large coordinates carry proportionally
        // large tracking noise
        let partner = (0..values.len()).find(|&k| {
            !used[k]
                && (values[k] + values[j]).norm()
                    < PAIR_TOL * (1.0 + values[k].norm().max(values[j].norm()))
        });
        match partner {
            Some(k) => {
                used[k] = true;
                reps.push(values[j]);
            }
            None => {
                return Err(Error::NonGenericCoordinate {
                    coord: coord_index,
                    reason: format!("no -v partner for value {}", values[j]),
                })
            }
        }
    }
    let roots: Vec<CRat> = reps
        .iter()
        .map(|v| {
            let r = CRat::from_c64(*v);
            r.mul(&r)
        })
        .collect();
    poly_from_roots(&roots)
}

fn sign_of(x: &Rat) -> i8 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

fn variations(signs: impl Iterator<Item = i8>) -> usize {
    let mut last = 0i8;
    let mut count = 0;
    for s in signs {
        if s == 0 {
            continue;
        }
        if last != 0 && s != last {
            count += 1;
        }
        last = s;
    }
    count
}

/// Number of sign changes in the coefficient sequence, zeros skipped:
/// an upper bound (matching parity) on the positive-root count.
pub fn descartes(p: &UniPoly) -> usize {
    variations(p.coeffs.iter().map(sign_of))
}

/// Sturm chain of a squarefree polynomial.
fn sturm_chain(p: &UniPoly) -> Vec<UniPoly> {
    let mut chain = vec![p.clone(), p.derivative()];
    loop {
        let k = chain.len();
        if chain[k - 1].is_zero() || chain[k - 1].degree() == 0 {
            break;
        }
        let r = chain[k - 2].rem(&chain[k - 1]);
        if r.is_zero() {
            break;
        }
        chain.push(UniPoly::new(r.coeffs.iter().map(|c| -c).collect()));
    }
    chain
}

fn variations_at(chain: &[UniPoly], x: &Rat) -> usize {
    variations(chain.iter().map(|p| sign_of(&p.eval_rat(x))))
}

fn variations_at_pos_inf(chain: &[UniPoly]) -> usize {
    variations(
        chain
            .iter()
            .map(|p| p.coeffs.last().map(sign_of).unwrap_or(0)),
    )
}

fn variations_at_neg_inf(chain: &[UniPoly]) -> usize {
    variations(chain.iter().map(|p| {
        let s = p.coeffs.last().map(sign_of).unwrap_or(0);
        if p.degree() % 2 != 0 {
            -s
        } else {
            s
        }
    }))
}

/// Squarefree part (multiple roots deflated) plus whether deflation
/// happened; counts below are of distinct roots.
fn squarefree(p: &UniPoly) -> (UniPoly, bool) {
    let g = p.gcd(&p.derivative());
    if g.degree() <= 0 {
        (p.clone(), false)
    } else {
        (p.div_exact(&g), true)
    }
}

/// Strips roots at x = 0 (they are neither positive nor negative).
fn strip_zero_roots(p: &UniPoly) -> UniPoly {
    let k = p
        .coeffs
        .iter()
        .position(|c| c != &rat_zero())
        .unwrap_or(p.coeffs.len());
    UniPoly::new(p.coeffs[k..].to_vec())
}

/// Exact count of distinct roots in (a, +infinity).
pub fn count_roots_above(p: &UniPoly, a: &Rat) -> Result<usize> {
    if p.is_zero() {
        return Err(Error::Config("zero polynomial has no root count".into()));
    }
    let (sf, _) = squarefree(p);
    let sf = strip_zero_roots(&sf);
    if sf.degree() <= 0 {
        return Ok(0);
    }
    if sf.eval_rat(a) == rat_zero() {
        // nudge below: a is itself a root and must not be counted
        let eps = rat_from_f64(1e-30);
        return count_roots_above(&sf, &(a + eps));
    }
    let chain = sturm_chain(&sf);
    Ok(variations_at(&chain, a) - variations_at_pos_inf(&chain))
}

/// Exact count of distinct roots in (0, +infinity).
pub fn sturm_positive(p: &UniPoly) -> Result<usize> {
    count_roots_above(p, &rat_zero())
}

/// Exact count of distinct roots in (-infinity, 0).
pub fn sturm_negative(p: &UniPoly) -> Result<usize> {
    if p.is_zero() {
        return Err(Error::Config("zero polynomial has no root count".into()));
    }
    let (sf, _) = squarefree(p);
    let sf = strip_zero_roots(&sf);
    if sf.degree() <= 0 {
        return Ok(0);
    }
    let chain = sturm_chain(&sf);
    Ok(variations_at_neg_inf(&chain) - variations_at(&chain, &rat_zero()))
}

#[derive(Debug, Clone, Copy)]
pub struct RootCount {
    pub descartes_max: usize,
    pub sturm_positive: usize,
    pub sturm_negative: usize,
    /// Descartes bound respected with matching parity.
    pub agrees: bool,
}

pub fn root_count(p: &UniPoly) -> Result<RootCount> {
    let d = descartes(p);
    let sp = sturm_positive(p)?;
    let sn = sturm_negative(p)?;
    Ok(RootCount {
        descartes_max: d,
        sturm_positive: sp,
        sturm_negative: sn,
        agrees: sp <= d && (d - sp) % 2 == 0,
    })
}

/// Everything the eliminant route produces for one instance.
#[derive(Debug, Clone)]
pub struct EliminantReport {
    pub poly: UniPoly,
    /// Variable index the pairing used (vq of the highest bus first).
    pub coord_index: usize,
    pub counts: RootCount,
    pub trivial_count: usize,
    pub real_count: usize,
    /// Multiple eliminant roots were deflated before counting.
    pub deflated: bool,
}

fn is_sign_pattern(ps: &PowerSystem, sol: &[Complex64]) -> bool {
    ps.non_slack_ids().iter().enumerate().all(|(k, &id)| {
        let vm = ps.bus(id).vm.unwrap_or(f64::NAN);
        let vd = sol[2 * k];
        let vq = sol[2 * k + 1];
        let on_vm = (vd - Complex64::new(vm, 0.0)).norm() < 1e-9
            || (vd + Complex64::new(vm, 0.0)).norm() < 1e-9;
        vq.norm() < 1e-9 && on_vm
    })
}

/// Counts real solutions through the eliminant and cross-checks the direct
/// classification; a disagreement is surfaced as a structural violation.
/// vq coordinates are tried from the highest bus downward until one is
/// generic (pairs cleanly with distinct squares).
pub fn count_real_via_eliminant(ps: &PowerSystem, ss: &SolutionSet) -> Result<EliminantReport> {
    if !ps.is_zero_injection_unit_pv() {
        return Err(Error::Unsupported(
            "eliminant counting requires a zero-injection unit-magnitude PV network".into(),
        ));
    }
    let nonconstant: Vec<Vec<Complex64>> = ss
        .solutions
        .iter()
        .filter(|s| !is_sign_pattern(ps, s))
        .cloned()
        .collect();
    let trivial_count = ss.solutions.len() - nonconstant.len();

    // vq indices in variable order, highest bus first
    let nv = ps.nvars();
    let candidates: Vec<usize> = (0..nv / 2).map(|k| nv - 1 - 2 * k).collect();
    let mut last_err = None;
    for &coord in &candidates {
        let poly = match build_eliminant(&nonconstant, coord) {
            Ok(p) => p,
            Err(e) => {
                last_err = Some(e);
                continue;
            }
        };
        // distinct squares: Sturm chains count distinct roots, so repeats
        // would silently undercount; fall to the next coordinate instead.
        // The tolerance is relative because a mirror pair's two squares
        // only agree up to the tracked accuracy of possibly large values.
        let squares: Vec<Complex64> = {
            let mut v: Vec<Complex64> = Vec::new();
            for s in &nonconstant {
                let sq = s[coord] * s[coord];
                let near = |w: &Complex64| {
                    (w - sq).norm() <= DISTINCT_TOL.max(DISTINCT_REL * w.norm().max(sq.norm()))
                };
                if !v.iter().any(near) {
                    v.push(sq);
                }
            }
            v
        };
        if 2 * squares.len() != nonconstant.len() {
            last_err = Some(Error::NonGenericCoordinate {
                coord,
                reason: "squared values collide".into(),
            });
            continue;
        }
        let desc = poly.coeffs_f64_descending();
        for sq in &squares {
            let r = poly.eval_c64(*sq).norm();
            // noise floor of evaluating near a root: |coeffs| Horner at |x|
            let scale = desc.iter().fold(0.0f64, |a, &c| a * sq.norm() + c.abs());
            if r > ROOT_RESIDUAL_FACTOR * scale.max(1.0) {
                return Err(Error::StructuralViolation(format!(
                    "eliminant residual {r:e} at squared coordinate {sq}"
                )));
            }
        }
        let (_, deflated) = squarefree(&poly);
        let counts = root_count(&poly)?;
        // |vq| <= vm forces every positive root into (0, 1]
        let above_unit = count_roots_above(&poly, &(rat_one() + rat_from_f64(UNIT_ROOT_SLACK)))?;
        if above_unit != 0 {
            return Err(Error::StructuralViolation(format!(
                "{above_unit} eliminant roots exceed the magnitude bound"
            )));
        }
        let real_count = trivial_count + 2 * counts.sturm_positive;
        let direct = crate::classify::split_real(ss, crate::classify::REAL_TOL)?
            .real
            .len();
        if real_count != direct {
            return Err(Error::StructuralViolation(format!(
                "eliminant count {real_count} != direct count {direct}"
            )));
        }
        return Ok(EliminantReport {
            poly,
            coord_index: coord,
            counts,
            trivial_count,
            real_count,
            deflated,
        });
    }
    Err(last_err.unwrap_or(Error::NonGenericCoordinate {
        coord: nv.saturating_sub(1),
        reason: "no vq coordinate available".into(),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn cubed_binomial_from_repeated_pairs() {
        // three +-1 pairs in coordinate 0 -> (x - 1)^3
        let sols: Vec<Vec<Complex64>> = [1.0, -1.0, 1.0, -1.0, 1.0, -1.0]
            .iter()
            .map(|&v| vec![c(v, 0.0)])
            .collect();
        let p = build_eliminant(&sols, 0).unwrap();
        let want: Vec<f64> = vec![1.0, -3.0, 3.0, -1.0];
        assert_eq!(p.coeffs_f64_descending(), want);
        assert!(p.is_monic());
    }

    #[test]
    fn unpaired_value_is_rejected() {
        let sols: Vec<Vec<Complex64>> = vec![vec![c(1.0, 0.0)], vec![c(0.7, 0.0)]];
        assert!(matches!(
            build_eliminant(&sols, 0),
            Err(Error::NonGenericCoordinate { .. })
        ));
    }

    #[test]
    fn imaginary_residue_is_rejected() {
        // pair (v, -v) with v^2 far from real: coefficients keep imag parts
        let v = c(0.6, 0.4);
        let sols = vec![vec![v], vec![-v]];
        assert!(matches!(
            build_eliminant(&sols, 0),
            Err(Error::ImaginaryResidue(_))
        ));
    }

    #[test]
    fn conjugate_pairs_cancel_imaginary_parts() {
        // (v, -v, conj v, -conj v): squares v^2 and conj(v)^2 multiply to a
        // real quadratic
        let v = c(0.6, 0.4);
        let sols = vec![vec![v], vec![-v], vec![v.conj()], vec![-v.conj()]];
        let p = build_eliminant(&sols, 0).unwrap();
        assert_eq!(p.degree(), 2);
        let r = p.eval_c64(v * v).norm();
        assert!(r < 1e-12, "{r}");
    }

    #[test]
    fn descartes_examples() {
        // x^2 + 1
        let p = UniPoly::from_f64_descending(&[1.0, 0.0, 1.0]);
        assert_eq!(descartes(&p), 0);
        let sextic = UniPoly::from_f64_descending(&[
            1.0, 13.4913, 136.2685, -144.4123, 18.9004, -0.5871, 0.0017,
        ]);
        assert_eq!(descartes(&sextic), 4);
        let quartic = UniPoly::from_f64_descending(&[1.0, -1.438, 0.611, -0.070, 0.002]);
        assert_eq!(descartes(&quartic), 4);
    }

    #[test]
    fn sturm_counts_known_roots() {
        // (x-1)(x-2)(x+3) = x^3 - 7x + 6
        let p = UniPoly::from_f64_descending(&[1.0, 0.0, -7.0, 6.0]);
        assert_eq!(sturm_positive(&p).unwrap(), 2);
        assert_eq!(sturm_negative(&p).unwrap(), 1);
        let rc = root_count(&p).unwrap();
        assert!(rc.agrees);
    }

    #[test]
    fn multiple_roots_count_once() {
        // (x-1)^2 (x-2)
        let p = UniPoly::from_f64_descending(&[1.0, -4.0, 5.0, -2.0]);
        assert_eq!(sturm_positive(&p).unwrap(), 2);
    }

    #[test]
    fn roots_at_zero_are_excluded() {
        // x^2 (x - 3)
        let p = UniPoly::from_f64_descending(&[1.0, -3.0, 0.0, 0.0]);
        assert_eq!(sturm_positive(&p).unwrap(), 1);
        assert_eq!(sturm_negative(&p).unwrap(), 0);
    }

    #[test]
    fn paper_polynomials_have_four_positive_roots() {
        let sextic = UniPoly::from_f64_descending(&[
            1.0, 13.4913, 136.2685, -144.4123, 18.9004, -0.5871, 0.0017,
        ]);
        assert_eq!(sturm_positive(&sextic).unwrap(), 4);
        let quartic = UniPoly::from_f64_descending(&[1.0, -1.438, 0.611, -0.070, 0.002]);
        assert_eq!(sturm_positive(&quartic).unwrap(), 4);
    }

    #[test]
    fn format_matches_compact_style() {
        let p = UniPoly::from_f64_descending(&[1.0, 13.4913, -0.5871]);
        assert_eq!(p.format_descending(4), "x^2+13.4913x-0.5871");
    }

    #[test]
    fn witness_instance_count() {
        use crate::track::{solve_all, HomotopyConfig};
        let text = std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/data/fourbus16.json"
        ))
        .unwrap();
        let ps = PowerSystem::from_json(&text).unwrap();
        let ss = solve_all(&ps.build_system().unwrap(), &HomotopyConfig::from_seed(42)).unwrap();
        let report = count_real_via_eliminant(&ps, &ss).unwrap();
        assert_eq!(report.trivial_count, 8);
        assert_eq!(report.counts.sturm_positive, 4);
        assert_eq!(report.real_count, 16);
        assert_eq!(report.poly.degree(), 6);
        assert!(!report.deflated);
        let got = report.poly.coeffs_f64_descending();
        let want = [1.0, 13.4913, 136.2685, -144.4123, 18.9004, -0.5871, 0.0017];
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 5e-5, "coefficient {g} vs {w}");
        }
    }
}
