//! Derivatives of the heat Gaussian `H(y) = e^{-|y|^2/4} / (4 pi)`.
//!
//! `H` factorises into one-dimensional Gaussians, and
//! `d^k/dy^k e^{-y^2/4} = p_k(y) e^{-y^2/4}` with
//! `p_{k+1} = p_k' - (y/2) p_k`. The coefficients of `p_k` are dyadic
//! rationals, so the recurrence is exact in binary floating point.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Highest total derivative order supported.
pub const MAX_DERIVATIVE_ORDER: u32 = 12;

fn hermite_table() -> &'static [Vec<f64>] {
    static TABLE: OnceLock<Vec<Vec<f64>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = vec![vec![1.0]];
        for k in 0..MAX_DERIVATIVE_ORDER as usize {
            let p = &table[k];
            let mut next = vec![0.0; p.len() + 1];
            for (i, &c) in p.iter().enumerate() {
                if i > 0 {
                    next[i - 1] += i as f64 * c;
                }
                next[i + 1] -= 0.5 * c;
            }
            table.push(next);
        }
        table
    })
}

fn poly_eval(coeffs: &[f64], y: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * y + c)
}

/// `H(y) = e^{-|y|^2/4} / (4 pi)`.
pub fn heat_gaussian(y: [f64; 2]) -> f64 {
    (-(y[0] * y[0] + y[1] * y[1]) / 4.0).exp() / (4.0 * PI)
}

/// `d^{k1}/dy1^{k1} d^{k2}/dy2^{k2} H(y)`, exact polynomial times Gaussian.
pub fn gaussian_derivative(k1: u32, k2: u32, y: [f64; 2]) -> Result<f64> {
    if k1 + k2 > MAX_DERIVATIVE_ORDER {
        return Err(Error::Range {
            name: "k1 + k2",
            value: (k1 + k2) as f64,
            limit: "k1 + k2 <= 12",
        });
    }
    Ok(derivative_unchecked(k1, k2, y))
}

pub(crate) fn derivative_unchecked(k1: u32, k2: u32, y: [f64; 2]) -> f64 {
    let table = hermite_table();
    poly_eval(&table[k1 as usize], y[0]) * poly_eval(&table[k2 as usize], y[1]) * heat_gaussian(y)
}

/// A constant-coefficient differential operator `sum c_{k1,k2} d1^{k1} d2^{k2}`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiffOperator {
    terms: BTreeMap<(u32, u32), f64>,
}

impl DiffOperator {
    pub fn identity() -> Self {
        Self::monomial(0, 0, 1.0)
    }

    pub fn monomial(k1: u32, k2: u32, coeff: f64) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert((k1, k2), coeff);
        Self { terms }
    }

    /// `d1^2 + d2^2`
    pub fn laplacian() -> Self {
        Self::monomial(2, 0, 1.0).add(&Self::monomial(0, 2, 1.0))
    }

    /// `d1^k + d2^k`
    pub fn axis_sum(k: u32) -> Self {
        Self::monomial(k, 0, 1.0).add(&Self::monomial(0, k, 1.0))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        for (&k, &c) in &other.terms {
            *terms.entry(k).or_insert(0.0) += c;
        }
        Self { terms }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            terms: self.terms.iter().map(|(&k, &c)| (k, c * s)).collect(),
        }
    }

    /// Operator composition (the operators commute).
    pub fn compose(&self, other: &Self) -> Self {
        let mut terms = BTreeMap::new();
        for (&(a1, a2), &ca) in &self.terms {
            for (&(b1, b2), &cb) in &other.terms {
                *terms.entry((a1 + b1, a2 + b2)).or_insert(0.0) += ca * cb;
            }
        }
        Self { terms }
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::identity(), |acc, _| acc.compose(self))
    }

    pub fn order(&self) -> u32 {
        self.terms.keys().map(|&(a, b)| a + b).max().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), f64)> + '_ {
        self.terms.iter().map(|(&k, &c)| (k, c))
    }

    /// Applies the operator to `H` at `y`.
    pub fn apply_to_gaussian(&self, y: [f64; 2]) -> Result<f64> {
        if self.order() > MAX_DERIVATIVE_ORDER {
            return Err(Error::Range {
                name: "operator order",
                value: self.order() as f64,
                limit: "order <= 12",
            });
        }
        let table = hermite_table();
        let g = heat_gaussian(y);
        let mut acc = 0.0;
        for (&(k1, k2), &c) in &self.terms {
            acc += c * poly_eval(&table[k1 as usize], y[0]) * poly_eval(&table[k2 as usize], y[1]);
        }
        Ok(acc * g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_at_origin() {
        let v = gaussian_derivative(0, 0, [0.0, 0.0]).unwrap();
        assert_eq!(v, 1.0 / (4.0 * PI));
        assert!((v - 0.079_577_47).abs() < 1e-8);
        for (k1, k2) in [(1, 0), (0, 1), (3, 2), (5, 0), (2, 7)] {
            assert_eq!(gaussian_derivative(k1, k2, [0.0, 0.0]).unwrap(), 0.0);
        }
    }

    #[test]
    fn order_cap() {
        assert!(gaussian_derivative(6, 6, [0.1, 0.2]).is_ok());
        assert!(matches!(
            gaussian_derivative(7, 6, [0.1, 0.2]),
            Err(Error::Range { .. })
        ));
    }

    #[test]
    fn fourth_derivative_against_finite_differences() {
        // central fourth difference, swept over the step size
        let y = [1.0, 1.0];
        let exact = gaussian_derivative(4, 0, y).unwrap();
        let f = |x: f64| heat_gaussian([x, y[1]]);
        let mut best = f64::INFINITY;
        for h in [0.02, 0.01, 0.005] {
            let fd = (f(y[0] + 2.0 * h) - 4.0 * f(y[0] + h) + 6.0 * f(y[0]) - 4.0 * f(y[0] - h)
                + f(y[0] - 2.0 * h))
                / h.powi(4);
            best = best.min((fd - exact).abs());
        }
        assert!(best < 1e-6, "{best}");
    }

    #[test]
    fn laplacian_identity() {
        for &y in &[[0.0, 0.0], [0.3, -1.2], [2.5, 1.5], [-4.0, 3.0]] {
            let lap = DiffOperator::laplacian().apply_to_gaussian(y).unwrap();
            let r2 = y[0] * y[0] + y[1] * y[1];
            assert!((lap - (r2 / 4.0 - 1.0) * heat_gaussian(y)).abs() < 1e-12);
        }
    }

    #[test]
    fn composition_expands_square() {
        let sq = DiffOperator::axis_sum(4).pow(2);
        let terms: Vec<_> = sq.terms().collect();
        assert_eq!(terms, vec![((0, 8), 1.0), ((4, 4), 2.0), ((8, 0), 1.0)]);
    }
}
