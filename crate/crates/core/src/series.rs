//! Truncated formal power series with exact coefficients.

use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{int, ExactScalar};

/// `sum_{n=0}^{order} coeffs[n] x^n`, with everything above `order` discarded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedSeries {
    coeffs: Vec<ExactScalar>,
}

impl TruncatedSeries {
    /// Series through `x^order`; missing coefficients are zero, extra ones dropped.
    pub fn new(mut coeffs: Vec<ExactScalar>, order: usize) -> Self {
        coeffs.resize(order + 1, ExactScalar::zero());
        Self { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Self::new(Vec::new(), order)
    }

    pub fn one(order: usize) -> Self {
        Self::new(vec![ExactScalar::one()], order)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, n: usize) -> &ExactScalar {
        &self.coeffs[n]
    }

    pub fn coeffs(&self) -> &[ExactScalar] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<ExactScalar> {
        self.coeffs
    }

    fn common_order(&self, other: &Self) -> usize {
        self.order().min(other.order())
    }

    /// `exp(self)`; requires a zero constant term.
    ///
    /// With `E = exp(S)`, `E' = S' E` gives
    /// `(n+1) e_{n+1} = sum_{k=0}^{n} (k+1) s_{k+1} e_{n-k}`.
    pub fn exp(&self) -> Result<Self> {
        if !self.coeffs[0].is_zero() {
            return Err(Error::InvalidConfig(
                "exp of a series with nonzero constant term is not rational".into(),
            ));
        }
        let order = self.order();
        let deriv: Vec<ExactScalar> = (1..=order).map(|k| int(k as i64) * &self.coeffs[k]).collect();
        let mut e = Vec::with_capacity(order + 1);
        e.push(ExactScalar::one());
        for n in 0..order {
            let mut acc = ExactScalar::zero();
            for k in 0..=n {
                if !deriv[k].is_zero() {
                    acc += &deriv[k] * &e[n - k];
                }
            }
            e.push(acc / int(n as i64 + 1));
        }
        Ok(Self { coeffs: e })
    }

    /// Multiplicative inverse: `b_0 = 1/s_0`, `b_n = -(sum_{k=1}^{n} s_k b_{n-k}) / s_0`.
    pub fn inverse(&self) -> Result<Self> {
        let s0 = &self.coeffs[0];
        if s0.is_zero() {
            return Err(Error::NotInvertible);
        }
        let order = self.order();
        let mut b: Vec<ExactScalar> = Vec::with_capacity(order + 1);
        b.push(s0.recip());
        for n in 1..=order {
            let mut acc = ExactScalar::zero();
            for k in 1..=n {
                if !self.coeffs[k].is_zero() {
                    acc += &self.coeffs[k] * &b[n - k];
                }
            }
            b.push(-acc / s0);
        }
        Ok(Self { coeffs: b })
    }
}

impl Add for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn add(self, rhs: Self) -> TruncatedSeries {
        let order = self.common_order(rhs);
        TruncatedSeries {
            coeffs: (0..=order).map(|n| &self.coeffs[n] + &rhs.coeffs[n]).collect(),
        }
    }
}

impl Sub for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn sub(self, rhs: Self) -> TruncatedSeries {
        let order = self.common_order(rhs);
        TruncatedSeries {
            coeffs: (0..=order).map(|n| &self.coeffs[n] - &rhs.coeffs[n]).collect(),
        }
    }
}

impl Neg for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn neg(self) -> TruncatedSeries {
        TruncatedSeries {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Mul for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn mul(self, rhs: Self) -> TruncatedSeries {
        let order = self.common_order(rhs);
        let mut out = vec![ExactScalar::zero(); order + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(order + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate().take(order + 1 - i) {
                out[i + j] += a * b;
            }
        }
        TruncatedSeries { coeffs: out }
    }
}
