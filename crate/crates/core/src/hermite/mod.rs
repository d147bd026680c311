//! Exact polynomial algebra in the probabilists' Hermite basis.
//!
//! Polynomials carry arbitrary-precision rational coefficients in either the
//! Hermite basis ([`HermitePoly`], coefficient `k` multiplies `H_k`) or the
//! power basis ([`MonomialPoly`]). The Hermite polynomials are the
//! probabilists' ones, orthogonal for the standard normal weight with
//! `E[H_j(Z) H_k(Z)] = δ_jk · k!`; the physicists' normalization would
//! silently break every product and moment formula in this crate, so the
//! convention is fixed here once and for all.
//!
//! Zero tests are exact rational comparisons, never tolerance-based.

pub mod parse;

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Maximum representable degree. Composition multiplies degrees and the
/// integer coefficients grow factorially, so anything past this point is
/// refused instead of silently producing thousand-digit rationals.
pub const DEGREE_CAP: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("polynomial degree {degree} exceeds the degree cap {cap}")]
    DegreeCapExceeded { degree: usize, cap: usize },
}

fn check_degree(degree: usize) -> Result<(), AlgebraError> {
    if degree > DEGREE_CAP {
        Err(AlgebraError::DegreeCapExceeded {
            degree,
            cap: DEGREE_CAP,
        })
    } else {
        Ok(())
    }
}

fn trim(mut coeffs: Vec<BigRational>) -> Vec<BigRational> {
    while coeffs.last().is_some_and(|c| c.is_zero()) {
        coeffs.pop();
    }
    coeffs
}

pub(crate) fn factorial(n: usize) -> BigInt {
    let mut acc = BigInt::one();
    for i in 2..=n {
        acc *= i;
    }
    acc
}

pub(crate) fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 1..=k {
        acc = acc * (n - k + i) / i; // exact at every step
    }
    acc
}

/// Polynomial expanded in the probabilists' Hermite basis: coefficient `k`
/// multiplies `H_k`. The highest stored coefficient is nonzero unless the
/// polynomial is identically zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HermitePoly {
    coeffs: Vec<BigRational>,
}

/// Polynomial in the power basis `x^k`, same trimming invariant as
/// [`HermitePoly`]. Used as the composition workhorse and for float export.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialPoly {
    coeffs: Vec<BigRational>,
}

impl HermitePoly {
    pub fn new(coeffs: Vec<BigRational>) -> Result<Self, AlgebraError> {
        let coeffs = trim(coeffs);
        check_degree(coeffs.len().saturating_sub(1))?;
        Ok(Self { coeffs })
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: BigRational) -> Self {
        Self {
            coeffs: trim(vec![c]),
        }
    }

    /// The basis polynomial `H_k`.
    pub fn basis(k: usize) -> Result<Self, AlgebraError> {
        check_degree(k)?;
        let mut coeffs = vec![BigRational::zero(); k + 1];
        coeffs[k] = BigRational::one();
        Ok(Self { coeffs })
    }

    /// Convenience constructor from integer Hermite coefficients
    /// (index `k` holds the coefficient of `H_k`).
    pub fn from_integer_coeffs(coeffs: &[i64]) -> Result<Self, AlgebraError> {
        Self::new(
            coeffs
                .iter()
                .map(|&c| BigRational::from_integer(c.into()))
                .collect(),
        )
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> BigRational {
        self.coeffs
            .get(k)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    /// Index of the highest nonzero coefficient; 0 for constants and zero.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Hermite rank: the smallest `k ≥ 1` with a nonzero coefficient.
    /// Constants (including zero) have no rank.
    pub fn rank(&self) -> Option<usize> {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .find(|(_, c)| !c.is_zero())
            .map(|(k, _)| k)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![BigRational::zero(); n];
        for (k, c) in self.coeffs.iter().enumerate() {
            out[k] += c;
        }
        for (k, c) in other.coeffs.iter().enumerate() {
            out[k] += c;
        }
        Self { coeffs: trim(out) }
    }

    pub fn scale(&self, factor: &BigRational) -> Self {
        Self {
            coeffs: trim(self.coeffs.iter().map(|c| c * factor).collect()),
        }
    }

    /// Exact power-basis representation of the same polynomial function,
    /// built from the recurrence `H_{k+1}(x) = x·H_k(x) − k·H_{k−1}(x)`.
    pub fn to_monomial(&self) -> MonomialPoly {
        let n = self.coeffs.len();
        let mut acc = vec![BigRational::zero(); n.max(1)];
        // rolling power-basis forms of H_{k−1} and H_k
        let mut prev: Vec<BigRational> = Vec::new();
        let mut cur: Vec<BigRational> = vec![BigRational::one()];
        for (k, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                for (i, h) in cur.iter().enumerate() {
                    acc[i] += c * h;
                }
            }
            if k + 1 < n {
                let mut next = vec![BigRational::zero(); cur.len() + 1];
                for (i, h) in cur.iter().enumerate() {
                    next[i + 1] += h;
                }
                for (i, h) in prev.iter().enumerate() {
                    next[i] -= h * BigInt::from(k);
                }
                prev = std::mem::replace(&mut cur, next);
            }
        }
        MonomialPoly { coeffs: trim(acc) }
    }

    /// Exact Hermite expansion of the pointwise product, by the
    /// linearization `H_j·H_k = Σ_r r!·C(j,r)·C(k,r)·H_{j+k−2r}`.
    pub fn multiply(&self, other: &Self) -> Result<Self, AlgebraError> {
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero());
        }
        let degree = self.degree() + other.degree();
        check_degree(degree)?;
        let mut out = vec![BigRational::zero(); degree + 1];
        for (j, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (k, b) in other.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let ab = a * b;
                for r in 0..=j.min(k) {
                    let w = factorial(r) * binomial(j, r) * binomial(k, r);
                    out[j + k - 2 * r] += &ab * BigRational::from_integer(w);
                }
            }
        }
        Ok(Self { coeffs: trim(out) })
    }

    /// Exact first two moments of `p(Z)` for standard normal `Z`:
    /// mean `c_0` and variance `Σ_{k≥1} c_k²·k!` by Hermite orthogonality.
    pub fn gaussian_moments(&self) -> (BigRational, BigRational) {
        let mean = self.coeff(0);
        let mut variance = BigRational::zero();
        for (k, c) in self.coeffs.iter().enumerate().skip(1) {
            if !c.is_zero() {
                variance += c * c * BigRational::from_integer(factorial(k));
            }
        }
        (mean, variance)
    }
}

impl MonomialPoly {
    pub fn new(coeffs: Vec<BigRational>) -> Result<Self, AlgebraError> {
        let coeffs = trim(coeffs);
        check_degree(coeffs.len().saturating_sub(1))?;
        Ok(Self { coeffs })
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: BigRational) -> Self {
        Self {
            coeffs: trim(vec![c]),
        }
    }

    /// The monomial `x^k`.
    pub fn power(k: usize) -> Result<Self, AlgebraError> {
        check_degree(k)?;
        let mut coeffs = vec![BigRational::zero(); k + 1];
        coeffs[k] = BigRational::one();
        Ok(Self { coeffs })
    }

    pub fn from_integer_coeffs(coeffs: &[i64]) -> Result<Self, AlgebraError> {
        Self::new(
            coeffs
                .iter()
                .map(|&c| BigRational::from_integer(c.into()))
                .collect(),
        )
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> BigRational {
        self.coeffs
            .get(k)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![BigRational::zero(); n];
        for (k, c) in self.coeffs.iter().enumerate() {
            out[k] += c;
        }
        for (k, c) in other.coeffs.iter().enumerate() {
            out[k] += c;
        }
        Self { coeffs: trim(out) }
    }

    pub fn mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero());
        }
        let degree = self.degree() + other.degree();
        check_degree(degree)?;
        let mut out = vec![BigRational::zero(); degree + 1];
        for (j, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (k, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    out[j + k] += a * b;
                }
            }
        }
        Ok(Self { coeffs: trim(out) })
    }

    /// Exact Hermite-basis representation, via repeated use of
    /// `x·H_k = H_{k+1} + k·H_{k−1}` on a rolling expansion of `x^j`.
    pub fn to_hermite(&self) -> HermitePoly {
        let n = self.coeffs.len();
        let mut acc = vec![BigRational::zero(); n.max(1)];
        // rolling Hermite-basis form of x^j
        let mut cur: Vec<BigRational> = vec![BigRational::one()];
        for (j, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                for (k, h) in cur.iter().enumerate() {
                    acc[k] += c * h;
                }
            }
            if j + 1 < n {
                let mut next = vec![BigRational::zero(); cur.len() + 1];
                for (k, h) in cur.iter().enumerate() {
                    if h.is_zero() {
                        continue;
                    }
                    next[k + 1] += h;
                    if k >= 1 {
                        next[k - 1] += h * BigInt::from(k);
                    }
                }
                cur = next;
            }
        }
        HermitePoly { coeffs: trim(acc) }
    }

    /// Coefficients rounded to `f64`, ascending powers. The only sanctioned
    /// crossing from exact rationals into floating point.
    pub fn coeffs_f64(&self) -> Vec<f64> {
        self.coeffs
            .iter()
            .map(|c| {
                c.to_f64().unwrap_or(if c.is_negative() {
                    f64::NEG_INFINITY
                } else {
                    f64::INFINITY
                })
            })
            .collect()
    }
}

/// Exact Hermite expansion of `Q∘P` with `Q` in the power basis and `P` in
/// the Hermite basis. Converts `P` to the power basis, composes there by
/// Horner evaluation over polynomials, and converts back; general
/// compositions have no closed-form linearization.
pub fn compose(q: &MonomialPoly, p: &HermitePoly) -> Result<HermitePoly, AlgebraError> {
    if q.is_zero() {
        return Ok(HermitePoly::zero());
    }
    if !q.is_constant() && !p.is_constant() {
        check_degree(q.degree() * p.degree())?;
    }
    let pm = p.to_monomial();
    let mut acc = MonomialPoly::constant(q.coeff(q.degree()));
    for j in (0..q.degree()).rev() {
        acc = acc.mul(&pm)?;
        acc = acc.add(&MonomialPoly::constant(q.coeff(j)));
    }
    Ok(acc.to_hermite())
}

/// Closed-form expansion of `H_m²`:
/// `H_m² = Σ_{k=0}^{m} k!·C(m,k)²·H_{2m−2k}`, evaluated directly from the
/// displayed sum as an independent cross-check of [`HermitePoly::multiply`].
pub fn square_hm(m: usize) -> Result<HermitePoly, AlgebraError> {
    assert!(m >= 1, "square_hm requires m >= 1");
    check_degree(2 * m)?;
    let mut coeffs = vec![BigRational::zero(); 2 * m + 1];
    for k in 0..=m {
        let b = binomial(m, k);
        coeffs[2 * m - 2 * k] += BigRational::from_integer(factorial(k) * &b * &b);
    }
    Ok(HermitePoly {
        coeffs: trim(coeffs),
    })
}

/// Closed-form expansion of `H_m³`:
/// `H_m³ = Σ_{k1} Σ_{k2 ≤ min(2m−2k1, m)} k1!·k2!·C(m,k1)²·C(2m−2k1,k2)·C(m,k2)·H_{3m−2k1−2k2}`.
pub fn cube_hm(m: usize) -> Result<HermitePoly, AlgebraError> {
    assert!(m >= 1, "cube_hm requires m >= 1");
    check_degree(3 * m)?;
    let mut coeffs = vec![BigRational::zero(); 3 * m + 1];
    for k1 in 0..=m {
        let b1 = binomial(m, k1);
        for k2 in 0..=(2 * m - 2 * k1).min(m) {
            let w = factorial(k1)
                * factorial(k2)
                * &b1
                * &b1
                * binomial(2 * m - 2 * k1, k2)
                * binomial(m, k2);
            coeffs[3 * m - 2 * k1 - 2 * k2] += BigRational::from_integer(w);
        }
    }
    Ok(HermitePoly {
        coeffs: trim(coeffs),
    })
}

fn fmt_terms(
    f: &mut fmt::Formatter<'_>,
    coeffs: &[BigRational],
    atom: impl Fn(usize) -> String,
) -> fmt::Result {
    if coeffs.is_empty() {
        return write!(f, "0");
    }
    let mut first = true;
    for (k, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let mag = c.abs();
        if first {
            if c.is_negative() {
                write!(f, "-")?;
            }
            first = false;
        } else if c.is_negative() {
            write!(f, " - ")?;
        } else {
            write!(f, " + ")?;
        }
        let a = atom(k);
        if a.is_empty() {
            write!(f, "{mag}")?;
        } else if mag.is_one() {
            write!(f, "{a}")?;
        } else {
            write!(f, "{mag}*{a}")?;
        }
    }
    if first {
        write!(f, "0")?;
    }
    Ok(())
}

impl fmt::Display for HermitePoly {
    /// Grammar-compatible rendering, e.g. `1 + 2*H2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_terms(f, &self.coeffs, |k| {
            if k == 0 {
                String::new()
            } else {
                format!("H{k}")
            }
        })
    }
}

impl fmt::Display for MonomialPoly {
    /// Grammar-compatible rendering, e.g. `x^3 - 3*x`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_terms(f, &self.coeffs, |k| match k {
            0 => String::new(),
            1 => "x".to_string(),
            _ => format!("x^{k}"),
        })
    }
}
