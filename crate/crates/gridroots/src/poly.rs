//! Sparse multivariate polynomials over complex coefficients.
//!
//! Polynomials are stored as canonical term lists: terms sorted by exponent
//! vector, duplicate exponents merged, and coefficients below [`MERGE_EPS`]
//! dropped. Construction from any term order yields the same value, which
//! keeps downstream hashing, comparison, and evaluation deterministic.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Coefficients with magnitude below this after merging are dropped.
pub const MERGE_EPS: f64 = 1e-14;

/// A single monomial `coeff * prod x_j^(exponents[j])`.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coeff: Complex64,
    pub exponents: Vec<u32>,
}

impl Term {
    pub fn total_degree(&self) -> u32 {
        self.exponents.iter().sum()
    }
}

/// Multivariate polynomial in canonical merged form.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    nvars: usize,
    terms: Vec<Term>,
}

impl Poly {
    /// Builds a polynomial from raw terms, merging and sorting.
    pub fn new(nvars: usize, terms: Vec<(Complex64, Vec<u32>)>) -> Result<Self> {
        for (_, e) in &terms {
            if e.len() != nvars {
                return Err(Error::DimensionMismatch {
                    expected: nvars,
                    got: e.len(),
                });
            }
        }
        let mut terms: Vec<Term> = terms
            .into_iter()
            .map(|(coeff, exponents)| Term { coeff, exponents })
            .collect();
        terms.sort_by(|a, b| a.exponents.cmp(&b.exponents));
        let mut merged: Vec<Term> = Vec::with_capacity(terms.len());
        for t in terms {
            match merged.last_mut() {
                Some(last) if last.exponents == t.exponents => last.coeff += t.coeff,
                _ => merged.push(t),
            }
        }
        merged.retain(|t| t.coeff.norm() >= MERGE_EPS);
        Ok(Poly {
            nvars,
            terms: merged,
        })
    }

    pub fn zero(nvars: usize) -> Self {
        Poly {
            nvars,
            terms: Vec::new(),
        }
    }

    pub fn constant(nvars: usize, value: Complex64) -> Self {
        Poly::new(nvars, vec![(value, vec![0; nvars])]).expect("constant term has correct arity")
    }

    /// The monomial `x_j`.
    pub fn var(nvars: usize, j: usize) -> Self {
        assert!(j < nvars, "variable index out of range");
        let mut e = vec![0u32; nvars];
        e[j] = 1;
        Poly::new(nvars, vec![(Complex64::new(1.0, 0.0), e)]).expect("monomial arity")
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Maximum total degree; the zero polynomial reports -1.
    pub fn degree(&self) -> i64 {
        self.terms
            .iter()
            .map(|t| t.total_degree() as i64)
            .max()
            .unwrap_or(-1)
    }

    /// Term-by-term evaluation (no Horner reordering).
    pub fn eval(&self, point: &[Complex64]) -> Complex64 {
        debug_assert_eq!(point.len(), self.nvars);
        let mut acc = Complex64::new(0.0, 0.0);
        for t in &self.terms {
            let mut m = t.coeff;
            for (x, &e) in point.iter().zip(&t.exponents) {
                for _ in 0..e {
                    m *= x;
                }
            }
            acc += m;
        }
        acc
    }

    /// Value and all partial derivatives in one sweep over the terms;
    /// `grad` is overwritten. Cheaper than `nvars` separate `diff` evals
    /// inside the tracker's inner loop.
    pub fn eval_grad(&self, point: &[Complex64], grad: &mut [Complex64]) -> Complex64 {
        debug_assert_eq!(point.len(), self.nvars);
        debug_assert_eq!(grad.len(), self.nvars);
        grad.fill(Complex64::new(0.0, 0.0));
        let mut acc = Complex64::new(0.0, 0.0);
        for t in &self.terms {
            let mut m = t.coeff;
            for (x, &e) in point.iter().zip(&t.exponents) {
                for _ in 0..e {
                    m *= x;
                }
            }
            acc += m;
            for (j, &e) in t.exponents.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let mut d = t.coeff * e as f64;
                for (k, (x, &ek)) in point.iter().zip(&t.exponents).enumerate() {
                    let reps = if k == j { ek - 1 } else { ek };
                    for _ in 0..reps {
                        d *= x;
                    }
                }
                grad[j] += d;
            }
        }
        acc
    }

    /// Evaluation of the absolute-value polynomial: every coefficient and
    /// coordinate replaced by its magnitude. Bounds the cancellation noise
    /// of `eval` at the same point.
    pub fn eval_abs(&self, point: &[Complex64]) -> f64 {
        debug_assert_eq!(point.len(), self.nvars);
        let mut acc = 0.0f64;
        for t in &self.terms {
            let mut m = t.coeff.norm();
            for (x, &e) in point.iter().zip(&t.exponents) {
                for _ in 0..e {
                    m *= x.norm();
                }
            }
            acc += m;
        }
        acc
    }

    /// Partial derivative with respect to variable `j`.
    pub fn diff(&self, j: usize) -> Poly {
        assert!(j < self.nvars, "variable index out of range");
        let terms = self
            .terms
            .iter()
            .filter(|t| t.exponents[j] > 0)
            .map(|t| {
                let mut e = t.exponents.clone();
                let k = e[j];
                e[j] = k - 1;
                (t.coeff * k as f64, e)
            })
            .collect();
        Poly::new(self.nvars, terms).expect("derivative preserves arity")
    }

    /// Terms of maximal total degree only; zero maps to zero.
    pub fn top_form(&self) -> Poly {
        let d = self.degree();
        if d < 0 {
            return Poly::zero(self.nvars);
        }
        let terms = self
            .terms
            .iter()
            .filter(|t| t.total_degree() as i64 == d)
            .map(|t| (t.coeff, t.exponents.clone()))
            .collect();
        Poly::new(self.nvars, terms).expect("top form preserves arity")
    }

    pub fn add(&self, other: &Poly) -> Poly {
        assert_eq!(self.nvars, other.nvars);
        let terms = self
            .terms
            .iter()
            .chain(&other.terms)
            .map(|t| (t.coeff, t.exponents.clone()))
            .collect();
        Poly::new(self.nvars, terms).expect("add preserves arity")
    }

    pub fn scale(&self, k: Complex64) -> Poly {
        let terms = self
            .terms
            .iter()
            .map(|t| (t.coeff * k, t.exponents.clone()))
            .collect();
        Poly::new(self.nvars, terms).expect("scale preserves arity")
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        assert_eq!(self.nvars, other.nvars);
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let e: Vec<u32> = a
                    .exponents
                    .iter()
                    .zip(&b.exponents)
                    .map(|(x, y)| x + y)
                    .collect();
                terms.push((a.coeff * b.coeff, e));
            }
        }
        Poly::new(self.nvars, terms).expect("mul preserves arity")
    }
}

/// A square system of polynomials: one equation per variable.
#[derive(Debug, Clone, PartialEq)]
pub struct PolySystem {
    nvars: usize,
    polys: Vec<Poly>,
}

impl PolySystem {
    pub fn new(nvars: usize, polys: Vec<Poly>) -> Result<Self> {
        if polys.len() != nvars {
            return Err(Error::DimensionMismatch {
                expected: nvars,
                got: polys.len(),
            });
        }
        for p in &polys {
            if p.nvars() != nvars {
                return Err(Error::DimensionMismatch {
                    expected: nvars,
                    got: p.nvars(),
                });
            }
        }
        Ok(PolySystem { nvars, polys })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn polys(&self) -> &[Poly] {
        &self.polys
    }

    /// Evaluates every equation at `point`.
    pub fn evaluate(&self, point: &[Complex64]) -> Result<Vec<Complex64>> {
        if point.len() != self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                got: point.len(),
            });
        }
        Ok(self.polys.iter().map(|p| p.eval(point)).collect())
    }

    /// Largest per-equation absolute-value evaluation; the scale against
    /// which a residual at `point` is distinguishable from rounding.
    pub fn eval_abs_max(&self, point: &[Complex64]) -> f64 {
        self.polys
            .iter()
            .map(|p| p.eval_abs(point))
            .fold(0.0, f64::max)
    }

    /// Jacobian as a row-major matrix of polynomials: entry (i, j) is
    /// `d f_i / d x_j` in canonical form.
    pub fn jacobian(&self) -> Vec<Vec<Poly>> {
        self.polys
            .iter()
            .map(|p| (0..self.nvars).map(|j| p.diff(j)).collect())
            .collect()
    }

    /// The system of top-degree forms, equation by equation.
    pub fn top_form(&self) -> PolySystem {
        PolySystem {
            nvars: self.nvars,
            polys: self.polys.iter().map(|p| p.top_form()).collect(),
        }
    }

    pub fn degrees(&self) -> Vec<i64> {
        self.polys.iter().map(|p| p.degree()).collect()
    }

    /// Product of the total degrees; the path count of a total-degree start
    /// system. Errors when any equation has degree < 1.
    pub fn total_degree_product(&self) -> Result<u128> {
        let mut prod: u128 = 1;
        for (i, p) in self.polys.iter().enumerate() {
            let d = p.degree();
            if d < 1 {
                return Err(Error::ZeroDegree(i));
            }
            prod = prod.saturating_mul(d as u128);
        }
        Ok(prod)
    }
}

/// Jacobian values of a system at a point, row-major.
pub fn jacobian_at(sys: &PolySystem, point: &[Complex64]) -> Result<Vec<Complex64>> {
    if point.len() != sys.nvars() {
        return Err(Error::DimensionMismatch {
            expected: sys.nvars(),
            got: point.len(),
        });
    }
    let n = sys.nvars();
    let jac = sys.jacobian();
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for (i, row) in jac.iter().enumerate() {
        for (j, p) in row.iter().enumerate() {
            out[i * n + j] = p.eval(point);
        }
    }
    Ok(out)
}
