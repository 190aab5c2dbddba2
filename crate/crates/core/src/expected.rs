//! Expected determinants `a_n = E(det G_n)` and permanents `p_n = E(perm G_n)`.
//!
//! Three independent routes are provided for each sequence:
//!
//! * the trace recursions
//!   `a_{n+1} = sum_j C(n,j) (-1)^j j! a_{n-j} t_{j+1}` and the unsigned
//!   analogue for `p`;
//! * closed forms in the characteristic coefficients of `M`:
//!   `a_n = n! c_n` and `p_n = n! [x^n] (1 - c_1 x + c_2 x^2 - ...)^{-1}`;
//! * exponential generating functions
//!   `sum a_n x^n/n! = exp(t_1 x - t_2 x^2/2 + ...)` and the all-plus
//!   version for `p`.
//!
//! All arithmetic is exact, so the routes must agree to the last bit.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ExactMatrix;
use crate::models::MomentMatrix;
use crate::scalar::{binomial, factorial, falling_factorial, int, ExactScalar};
use crate::series::TruncatedSeries;
use crate::traces::TraceSequence;

/// Sign-adjusted characteristic coefficients `c_0..c_t`:
/// `det(lambda I - M) = sum_i (-1)^i c_i lambda^{t-i}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharCoeffs {
    values: Vec<ExactScalar>,
}

impl CharCoeffs {
    pub fn new(values: Vec<ExactScalar>) -> Result<Self> {
        match values.first() {
            Some(c0) if c0.is_one() => Ok(Self { values }),
            _ => Err(Error::InvalidConfig("characteristic coefficients must start with c_0 = 1".into())),
        }
    }

    pub fn values(&self) -> &[ExactScalar] {
        &self.values
    }

    /// Size `t` of the source matrix.
    pub fn degree(&self) -> usize {
        self.values.len() - 1
    }

    /// `c_n`, zero past the degree.
    pub fn get(&self, n: usize) -> ExactScalar {
        self.values.get(n).cloned().unwrap_or_else(ExactScalar::zero)
    }
}

/// Faddeev-LeVerrier over the rationals, returning sign-adjusted coefficients.
///
/// `B_1 = I`, `q_k = -trace(M B_k)/k`, `B_{k+1} = M B_k + q_k I`; the
/// monic coefficients `q_k` relate to the sign-adjusted ones by
/// `c_k = (-1)^k q_k`.
pub(crate) fn faddeev_leverrier(m: &ExactMatrix) -> Vec<ExactScalar> {
    assert!(m.is_square(), "characteristic polynomial of a non-square matrix");
    let t = m.rows();
    let mut coeffs = Vec::with_capacity(t + 1);
    coeffs.push(ExactScalar::one());
    let mut b = ExactMatrix::identity(t);
    for k in 1..=t {
        let mb = m.mul(&b).expect("square");
        let q = -mb.trace() / int(k as i64);
        coeffs.push(if k % 2 == 0 { q.clone() } else { -q.clone() });
        if k < t {
            b = mb;
            for i in 0..t {
                b[(i, i)] += &q;
            }
        }
    }
    coeffs
}

pub fn char_coeffs(m: &MomentMatrix) -> CharCoeffs {
    CharCoeffs {
        values: faddeev_leverrier(m.matrix()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Determinant,
    Permanent,
}

impl Kind {
    pub fn label(self) -> &'static str {
        match self {
            Kind::Determinant => "det",
            Kind::Permanent => "perm",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathKind {
    Recursion,
    CharClosedForm,
    Egf,
}

impl fmt::Display for PathKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PathKind::Recursion => "recursion",
            PathKind::CharClosedForm => "char",
            PathKind::Egf => "egf",
        })
    }
}

/// `values[n]` for `n = 0..=N`, tagged with what it is and how it was computed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpectedSequence {
    pub kind: Kind,
    pub path: PathKind,
    pub values: Vec<ExactScalar>,
}

impl ExpectedSequence {
    pub fn get(&self, n: usize) -> Option<&ExactScalar> {
        self.values.get(n)
    }

    pub fn max_index(&self) -> usize {
        self.values.len() - 1
    }
}

fn require_traces(t: &TraceSequence, count: usize) -> Result<()> {
    if t.len() < count {
        return Err(Error::SequenceTooShort {
            needed: count,
            available: t.len(),
        });
    }
    Ok(())
}

fn recursion(t: &TraceSequence, count: usize, signed: bool) -> Result<Vec<ExactScalar>> {
    require_traces(t, count)?;
    let mut values: Vec<ExactScalar> = Vec::with_capacity(count + 1);
    values.push(ExactScalar::one());
    for n in 0..count {
        let mut acc = ExactScalar::zero();
        for j in 0..=n {
            let prev = &values[n - j];
            if prev.is_zero() {
                continue;
            }
            let weight = ExactScalar::from_integer(falling_factorial(n, j));
            let term = weight * prev * t.get(j + 1);
            if signed && j % 2 == 1 {
                acc -= term;
            } else {
                acc += term;
            }
        }
        values.push(acc);
    }
    Ok(values)
}

pub fn expected_det_recursion(t: &TraceSequence, count: usize) -> Result<ExpectedSequence> {
    Ok(ExpectedSequence {
        kind: Kind::Determinant,
        path: PathKind::Recursion,
        values: recursion(t, count, true)?,
    })
}

pub fn expected_perm_recursion(t: &TraceSequence, count: usize) -> Result<ExpectedSequence> {
    Ok(ExpectedSequence {
        kind: Kind::Permanent,
        path: PathKind::Recursion,
        values: recursion(t, count, false)?,
    })
}

/// `n! c_n`; zero once `n` exceeds the matrix size.
pub fn expected_det_from_char(c: &CharCoeffs, n: usize) -> ExactScalar {
    ExactScalar::from_integer(factorial(n)) * c.get(n)
}

/// `a_0..a_N` via [`expected_det_from_char`].
pub fn expected_det_sequence_from_char(c: &CharCoeffs, count: usize) -> ExpectedSequence {
    ExpectedSequence {
        kind: Kind::Determinant,
        path: PathKind::CharClosedForm,
        values: (0..=count).map(|n| expected_det_from_char(c, n)).collect(),
    }
}

fn scale_by_factorials(series: TruncatedSeries) -> Vec<ExactScalar> {
    let mut fact = BigInt::one();
    series
        .into_coeffs()
        .into_iter()
        .enumerate()
        .map(|(n, coeff)| {
            if n > 0 {
                fact *= n;
            }
            coeff * ExactScalar::from_integer(fact.clone())
        })
        .collect()
}

pub fn expected_perm_from_char(c: &CharCoeffs, count: usize) -> Result<ExpectedSequence> {
    let alternating = (0..=c.degree())
        .map(|i| if i % 2 == 0 { c.get(i) } else { -c.get(i) })
        .collect();
    let inverse = TruncatedSeries::new(alternating, count).inverse()?;
    Ok(ExpectedSequence {
        kind: Kind::Permanent,
        path: PathKind::CharClosedForm,
        values: scale_by_factorials(inverse),
    })
}

/// `n! [x^n] exp(sum_i w_i x^i / i)` for weights `w_1..w_N`.
fn egf_expand(weights: impl Iterator<Item = ExactScalar>, count: usize) -> Vec<ExactScalar> {
    let mut log = vec![ExactScalar::zero()];
    log.extend(weights.enumerate().map(|(k, w)| w / int(k as i64 + 1)));
    let series = TruncatedSeries::new(log, count)
        .exp()
        .expect("constant term is zero by construction");
    scale_by_factorials(series)
}

fn alternate(k: usize, x: &ExactScalar) -> ExactScalar {
    if k % 2 == 1 {
        x.clone()
    } else {
        -x.clone()
    }
}

pub fn egf_expand_det(t: &TraceSequence, count: usize) -> Result<ExpectedSequence> {
    require_traces(t, count)?;
    let weights = (1..=count).map(|k| alternate(k, t.get(k)));
    Ok(ExpectedSequence {
        kind: Kind::Determinant,
        path: PathKind::Egf,
        values: egf_expand(weights, count),
    })
}

pub fn egf_expand_perm(t: &TraceSequence, count: usize) -> Result<ExpectedSequence> {
    require_traces(t, count)?;
    let weights = (1..=count).map(|k| t.get(k).clone());
    Ok(ExpectedSequence {
        kind: Kind::Permanent,
        path: PathKind::Egf,
        values: egf_expand(weights, count),
    })
}

/// `P_n(X_1..X_n) = sum_{sigma in S_n} prod_i X_i^{N_i(sigma)}`, where
/// `N_i` counts the i-cycles of `sigma`. With `signed`, `X_i` is replaced
/// by `(-1)^{i-1} X_i`.
pub fn weighted_cycle_sum(weights: &[ExactScalar], n: usize, signed: bool) -> Result<ExactScalar> {
    if n > weights.len() {
        return Err(Error::SequenceTooShort {
            needed: n,
            available: weights.len(),
        });
    }
    let w = weights[..n].iter().enumerate().map(|(k, x)| {
        if signed {
            alternate(k + 1, x)
        } else {
            x.clone()
        }
    });
    Ok(egf_expand(w, n).pop().expect("series has n+1 terms"))
}

/// `E(b_i)` or `E(d_i)` for the size-`n` Gram matrix: `C(n,i) * seq[i]`.
pub fn expected_coefficient(n: usize, i: usize, seq: &ExpectedSequence) -> Result<ExactScalar> {
    if i > n {
        return Err(Error::IndexOutOfRange { index: i, max: n });
    }
    let value = seq.get(i).ok_or(Error::IndexOutOfRange {
        index: i,
        max: seq.max_index(),
    })?;
    Ok(ExactScalar::from_integer(binomial(n, i)) * value)
}

/// All three routes for one kind, in the order recursion, char, egf.
pub fn all_paths(m: &MomentMatrix, kind: Kind, count: usize) -> Result<[ExpectedSequence; 3]> {
    let traces = crate::traces::traces_by_power(m, count.max(1));
    let c = char_coeffs(m);
    Ok(match kind {
        Kind::Determinant => [
            expected_det_recursion(&traces, count)?,
            expected_det_sequence_from_char(&c, count),
            egf_expand_det(&traces, count)?,
        ],
        Kind::Permanent => [
            expected_perm_recursion(&traces, count)?,
            expected_perm_from_char(&c, count)?,
            egf_expand_perm(&traces, count)?,
        ],
    })
}
