//! Self-contained oracles for cross-checking the exact algebra: closed-form
//! Hermite coefficients, Gaussian moments by double factorial, naive
//! power-basis multiplication, and moment projection onto the Hermite basis.
//! Everything here is independent of the library's conversion and product
//! routines.
#![allow(dead_code)] // each test binary uses its own subset

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;

use subgauss::hermite::{HermitePoly, MonomialPoly};

pub fn big(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

fn factorial_int(n: usize) -> BigInt {
    (2..=n).fold(BigInt::one(), |acc, i| acc * i)
}

/// `E[Z^s]` for standard normal `Z`: `(s−1)!!` for even `s`, zero for odd.
pub fn gaussian_moment(s: usize) -> BigInt {
    if s % 2 == 1 {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    let mut i = s as i64 - 1;
    while i > 1 {
        acc *= i;
        i -= 2;
    }
    acc
}

/// Power-basis coefficients of `H_k` from the explicit sum
/// `H_k(x) = k! Σ_j (−1)^j / (j! (k−2j)! 2^j) · x^{k−2j}`.
pub fn hermite_closed_form(k: usize) -> Vec<BigRational> {
    let mut coeffs = vec![BigRational::zero(); k + 1];
    let k_fact = factorial_int(k);
    for j in 0..=k / 2 {
        let denom = factorial_int(j) * factorial_int(k - 2 * j) * BigInt::from(2u32).pow(j as u32);
        let mut term = BigRational::new(k_fact.clone(), denom);
        if j % 2 == 1 {
            term = -term;
        }
        coeffs[k - 2 * j] = term;
    }
    coeffs
}

/// Schoolbook convolution in the power basis.
pub fn naive_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// `E[p(Z)]` for `p` in the power basis.
pub fn expectation(power_coeffs: &[BigRational]) -> BigRational {
    power_coeffs
        .iter()
        .enumerate()
        .map(|(s, c)| c * BigRational::from_integer(gaussian_moment(s)))
        .sum()
}

/// Hermite coefficient `c_k = E[p(Z)·H_k(Z)] / k!` by moment projection.
pub fn project_hermite_coeff(power_coeffs: &[BigRational], k: usize) -> BigRational {
    let product = naive_mul(power_coeffs, &hermite_closed_form(k));
    expectation(&product) / BigRational::from_integer(factorial_int(k))
}

pub fn random_rational<R: Rng>(rng: &mut R) -> BigRational {
    let numer = rng.random_range(-50i64..=50);
    let denom = rng.random_range(1i64..=10);
    BigRational::new(numer.into(), denom.into())
}

/// Random nonconstant polynomial in the Hermite basis, degree ≤ `max_degree`.
pub fn random_hermite<R: Rng>(rng: &mut R, max_degree: usize) -> HermitePoly {
    loop {
        let degree = rng.random_range(1..=max_degree);
        let coeffs: Vec<BigRational> = (0..=degree).map(|_| random_rational(rng)).collect();
        let p = HermitePoly::new(coeffs).unwrap();
        if !p.is_constant() {
            return p;
        }
    }
}

/// Random nonconstant polynomial in the power basis, degree ≤ `max_degree`.
pub fn random_monomial<R: Rng>(rng: &mut R, max_degree: usize) -> MonomialPoly {
    loop {
        let degree = rng.random_range(1..=max_degree);
        let coeffs: Vec<BigRational> = (0..=degree).map(|_| random_rational(rng)).collect();
        let p = MonomialPoly::new(coeffs).unwrap();
        if !p.is_constant() {
            return p;
        }
    }
}
