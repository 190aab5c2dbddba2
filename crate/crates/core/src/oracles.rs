//! Brute-force references: Leibniz expansions, Ryser's permanent,
//! Bareiss elimination, and exhaustive enumeration of expectations.
//!
//! Every routine here is exact. Exponential-cost routines refuse to run
//! past their [`OracleLimits`] instead of approximating.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::expected::{faddeev_leverrier, Kind};
use crate::matrix::ExactMatrix;
use crate::models::DiscreteVectorDistribution;
use crate::scalar::{binomial, lcm_of_denominators, ExactScalar};

/// Work limits for the exponential-cost oracles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleLimits {
    /// Largest `n` for the `n!`-term Leibniz expansions.
    pub expansion_max_n: usize,
    /// Largest `n` for Ryser's `2^n` subset sum.
    pub ryser_max_n: usize,
    /// Largest number of atom tuples enumerated by [`brute_force_expectation`].
    pub brute_force_max_tuples: u64,
    /// Largest sample size accepted by [`brute_force_expectation`].
    pub brute_force_max_n: usize,
    /// Budget for `sum_{i <= maxIndex} C(n,i) 2^i i^2` in [`permanental_poly_coeffs`].
    pub perm_poly_max_ops: u64,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self {
            expansion_max_n: 9,
            ryser_max_n: 28,
            brute_force_max_tuples: 1_000_000,
            brute_force_max_n: 8,
            perm_poly_max_ops: 100_000_000,
        }
    }
}

fn require_square(m: &ExactMatrix, what: &str) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "{what} needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}

/// `A^T A`: the matrix of column dot products.
pub fn gram(a: &ExactMatrix) -> ExactMatrix {
    let n = a.cols();
    let mut g = ExactMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let dot: ExactScalar = (0..a.rows()).map(|k| &a[(k, i)] * &a[(k, j)]).sum();
            if i != j {
                g[(j, i)] = dot.clone();
            }
            g[(i, j)] = dot;
        }
    }
    g
}

/// Calls `visit(perm, odd)` for every permutation of `0..n` (Heap's algorithm).
fn for_each_permutation(n: usize, mut visit: impl FnMut(&[usize], bool)) {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut counters = vec![0usize; n];
    let mut odd = false;
    visit(&perm, odd);
    let mut i = 1;
    while i < n {
        if counters[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(counters[i], i);
            }
            odd = !odd;
            visit(&perm, odd);
            counters[i] += 1;
            i = 1;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
}

fn leibniz(m: &ExactMatrix, signed: bool) -> ExactScalar {
    let mut total = ExactScalar::zero();
    for_each_permutation(m.rows(), |perm, odd| {
        let mut term = ExactScalar::one();
        for (i, &j) in perm.iter().enumerate() {
            let entry = &m[(i, j)];
            if entry.is_zero() {
                return;
            }
            term *= entry;
        }
        if signed && odd {
            total -= term;
        } else {
            total += term;
        }
    });
    total
}

impl OracleLimits {
    fn check_expansion(&self, m: &ExactMatrix, what: &str) -> Result<()> {
        require_square(m, what)?;
        if m.rows() > self.expansion_max_n {
            return Err(Error::GuardExceeded(format!(
                "{what}: n = {} exceeds expansion limit {}",
                m.rows(),
                self.expansion_max_n
            )));
        }
        Ok(())
    }

    /// Signed Leibniz sum over `S_n`.
    pub fn det_expansion(&self, m: &ExactMatrix) -> Result<ExactScalar> {
        self.check_expansion(m, "det_expansion")?;
        Ok(leibniz(m, true))
    }

    /// Unsigned Leibniz sum over `S_n`.
    pub fn perm_expansion(&self, m: &ExactMatrix) -> Result<ExactScalar> {
        self.check_expansion(m, "perm_expansion")?;
        Ok(leibniz(m, false))
    }

    /// Ryser's formula `perm(M) = (-1)^n sum_S (-1)^{|S|} prod_i sum_{j in S} m_ij`,
    /// visiting column subsets in Gray-code order so each step adds or
    /// removes one column from the running row sums.
    pub fn perm_ryser(&self, m: &ExactMatrix) -> Result<ExactScalar> {
        require_square(m, "perm_ryser")?;
        let n = m.rows();
        if n > self.ryser_max_n {
            return Err(Error::GuardExceeded(format!(
                "perm_ryser: n = {n} exceeds limit {}",
                self.ryser_max_n
            )));
        }
        Ok(ryser(m))
    }

    pub fn brute_force_expectation(
        &self,
        dist: &DiscreteVectorDistribution,
        n: usize,
        kind: Kind,
    ) -> Result<ExactScalar> {
        let atoms = dist.atoms();
        if n > self.brute_force_max_n {
            return Err(Error::GuardExceeded(format!(
                "brute_force_expectation: n = {n} exceeds limit {}",
                self.brute_force_max_n
            )));
        }
        let tuples = (atoms.len() as u64).checked_pow(n as u32);
        if tuples.is_none_or(|k| k > self.brute_force_max_tuples) {
            return Err(Error::GuardExceeded(format!(
                "brute_force_expectation: {}^{n} tuples exceeds limit {}",
                atoms.len(),
                self.brute_force_max_tuples
            )));
        }
        if n == 0 {
            return Ok(ExactScalar::one());
        }
        let k = atoms.len();
        let dots: Vec<ExactScalar> = (0..k * k)
            .map(|ab| {
                let (a, b) = (ab / k, ab % k);
                atoms[a].vector.iter().zip(&atoms[b].vector).map(|(x, y)| x * y).sum()
            })
            .collect();
        let mut idx = vec![0usize; n];
        let mut total = ExactScalar::zero();
        loop {
            let weight: ExactScalar = idx.iter().map(|&a| &atoms[a].prob).product();
            if !weight.is_zero() {
                let g = ExactMatrix::from_fn(n, n, |i, j| dots[idx[i] * k + idx[j]].clone());
                let value = match kind {
                    Kind::Determinant => det_bareiss(&g)?,
                    Kind::Permanent => ryser(&g),
                };
                total += weight * value;
            }
            // odometer increment
            let mut pos = 0;
            loop {
                if pos == n {
                    return Ok(total);
                }
                idx[pos] += 1;
                if idx[pos] < k {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
        }
    }

    /// `d_0..d_maxIndex` of `perm(lambda I - G) = d_0 lambda^n - d_1 lambda^{n-1} + ...`,
    /// each `d_i` being the sum of permanents of all `i x i` principal submatrices.
    pub fn permanental_poly_coeffs(&self, g: &ExactMatrix, max_index: usize) -> Result<Vec<ExactScalar>> {
        require_square(g, "permanental_poly_coeffs")?;
        let n = g.rows();
        if max_index > n {
            return Err(Error::IndexOutOfRange { index: max_index, max: n });
        }
        permanental_budget(n, max_index, self.perm_poly_max_ops)?;
        let mut out = Vec::with_capacity(max_index + 1);
        out.push(ExactScalar::one());
        for i in 1..=max_index {
            let mut acc = ExactScalar::zero();
            for_each_subset(n, i, |idx| acc += ryser(&g.principal(idx)));
            out.push(acc);
        }
        Ok(out)
    }
}

/// Fails with the first `(n, i)` at which the cumulative Ryser cost passes `budget`.
pub fn permanental_budget(n: usize, max_index: usize, budget: u64) -> Result<u64> {
    let mut spent: u64 = 0;
    for i in 1..=max_index {
        let cost = binomial(n, i) * (BigInt::one() << i) * BigInt::from(i * i);
        let next = BigInt::from(spent) + cost;
        if next > BigInt::from(budget) {
            return Err(Error::GuardExceeded(format!(
                "permanental coefficients at (n = {n}, i = {i}) exceed op budget {budget}"
            )));
        }
        spent = u64::try_from(next).expect("bounded by budget");
    }
    Ok(spent)
}

/// Calls `visit` with every sorted `k`-subset of `0..n`.
pub(crate) fn for_each_subset(n: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        visit(&idx);
        let Some(pos) = (0..k).rev().find(|&p| idx[p] < n - k + p) else {
            return;
        };
        idx[pos] += 1;
        for q in pos + 1..k {
            idx[q] = idx[q - 1] + 1;
        }
    }
}

fn ryser(m: &ExactMatrix) -> ExactScalar {
    let n = m.rows();
    if n == 0 {
        return ExactScalar::one();
    }
    let mut row_sums = vec![ExactScalar::zero(); n];
    let mut total = ExactScalar::zero();
    let mut gray: u64 = 0;
    for step in 1..(1u64 << n) {
        let col = step.trailing_zeros() as usize;
        gray ^= 1 << col;
        let adding = gray & (1 << col) != 0;
        for (i, sum) in row_sums.iter_mut().enumerate() {
            let entry = &m[(i, col)];
            if adding {
                *sum += entry;
            } else {
                *sum -= entry;
            }
        }
        if row_sums.iter().any(Zero::is_zero) {
            continue;
        }
        let product: ExactScalar = row_sums.iter().product();
        if (n - gray.count_ones() as usize).is_multiple_of(2) {
            total += product;
        } else {
            total -= product;
        }
    }
    total
}

/// Determinant by Bareiss fraction-free elimination.
///
/// Rows are first cleared of denominators, so elimination runs over the
/// integers; each step divides exactly by the previous pivot.
pub fn det_bareiss(m: &ExactMatrix) -> Result<ExactScalar> {
    require_square(m, "det_bareiss")?;
    let n = m.rows();
    let mut scale = BigInt::one();
    let mut a: Vec<Vec<BigInt>> = (0..n)
        .map(|i| {
            let row = m.row(i);
            let l = lcm_of_denominators(row);
            scale *= &l;
            row.iter().map(|x| x.numer() * (&l / x.denom())).collect()
        })
        .collect();
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n {
        let Some(p) = (k..n).find(|&r| !a[r][k].is_zero()) else {
            return Ok(ExactScalar::zero());
        };
        if p != k {
            a.swap(p, k);
            negate = !negate;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &a[k][k] * &a[i][j] - &a[i][k] * &a[k][j];
                let (q, r) = num.div_rem(&prev);
                debug_assert!(r.is_zero(), "Bareiss division must be exact");
                a[i][j] = q;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    let det_int = if n == 0 { BigInt::one() } else { prev };
    let det = ExactScalar::new(det_int, scale);
    Ok(if negate { -det } else { det })
}

/// `b_0..b_n` of `det(lambda I - G) = b_0 lambda^n - b_1 lambda^{n-1} + ...`, exact.
pub fn char_poly_coeffs_of_gram(g: &ExactMatrix) -> Result<Vec<ExactScalar>> {
    require_square(g, "char_poly_coeffs_of_gram")?;
    Ok(faddeev_leverrier(g))
}

pub fn det_expansion(m: &ExactMatrix) -> Result<ExactScalar> {
    OracleLimits::default().det_expansion(m)
}

pub fn perm_expansion(m: &ExactMatrix) -> Result<ExactScalar> {
    OracleLimits::default().perm_expansion(m)
}

pub fn perm_ryser(m: &ExactMatrix) -> Result<ExactScalar> {
    OracleLimits::default().perm_ryser(m)
}

pub fn brute_force_expectation(dist: &DiscreteVectorDistribution, n: usize, kind: Kind) -> Result<ExactScalar> {
    OracleLimits::default().brute_force_expectation(dist, n, kind)
}

pub fn permanental_poly_coeffs(g: &ExactMatrix, max_index: usize) -> Result<Vec<ExactScalar>> {
    OracleLimits::default().permanental_poly_coeffs(g, max_index)
}

/// Whether every diagonal entry is nonnegative.
pub fn has_nonnegative_diagonal(m: &ExactMatrix) -> bool {
    (0..m.rows().min(m.cols())).all(|i| !m[(i, i)].is_negative())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Atom;
    use crate::scalar::{factorial, int, ratio};
    use proptest::prelude::*;

    fn mat(rows: &[&[i64]]) -> ExactMatrix {
        ExactMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect()).unwrap()
    }

    #[test]
    fn gram_examples() {
        assert_eq!(gram(&ExactMatrix::identity(2)), ExactMatrix::identity(2));
        let g = gram(&mat(&[&[1, 2], &[3, 4]]));
        assert_eq!(g, mat(&[&[10, 14], &[14, 20]]));
        let dup = gram(&mat(&[&[1, 1, 2], &[5, 5, -1]]));
        assert!(det_bareiss(&dup).unwrap().is_zero());
        assert!(dup.is_symmetric() && has_nonnegative_diagonal(&dup));
    }

    #[test]
    fn expansion_examples() {
        for n in 0..=5 {
            assert_eq!(det_expansion(&ExactMatrix::identity(n)).unwrap(), int(1));
            assert_eq!(perm_expansion(&ExactMatrix::identity(n)).unwrap(), int(1));
            let ones = ExactMatrix::filled(n, n, int(1));
            assert_eq!(perm_expansion(&ones).unwrap(), ExactScalar::from_integer(factorial(n)));
        }
        let m = ExactMatrix::from_rows(vec![vec![ratio(1, 2), int(3)], vec![int(-2), ratio(5, 3)]]).unwrap();
        assert_eq!(det_expansion(&m).unwrap(), ratio(5, 6) + int(6));
        assert_eq!(perm_expansion(&mat(&[&[1, 2], &[3, 4]])).unwrap(), int(10));
        assert!(matches!(
            det_expansion(&ExactMatrix::identity(10)),
            Err(Error::GuardExceeded(_))
        ));
        assert!(matches!(perm_expansion(&ExactMatrix::zeros(2, 3)), Err(Error::Dimension(_))));
    }

    #[test]
    fn ryser_examples() {
        assert_eq!(perm_ryser(&ExactMatrix::identity(4)).unwrap(), int(1));
        assert_eq!(perm_ryser(&ExactMatrix::filled(6, 6, int(1))).unwrap(), int(720));
        assert_eq!(perm_ryser(&ExactMatrix::zeros(0, 0)).unwrap(), int(1));
        let tight = OracleLimits {
            ryser_max_n: 3,
            ..OracleLimits::default()
        };
        assert!(matches!(tight.perm_ryser(&ExactMatrix::identity(4)), Err(Error::GuardExceeded(_))));
    }

    #[test]
    fn bareiss_examples() {
        assert_eq!(det_bareiss(&ExactMatrix::identity(5)).unwrap(), int(1));
        let swapped = mat(&[&[0, 1, 0], &[1, 0, 0], &[0, 0, 1]]);
        assert_eq!(det_bareiss(&swapped).unwrap(), int(-1));
        assert_eq!(det_bareiss(&mat(&[&[1, 2], &[2, 4]])).unwrap(), int(0));
        assert_eq!(det_bareiss(&ExactMatrix::zeros(0, 0)).unwrap(), int(1));
    }

    #[test]
    fn brute_force_examples() {
        let split = DiscreteVectorDistribution::new(
            2,
            vec![
                Atom { vector: vec![int(1), int(0)], prob: ratio(1, 2) },
                Atom { vector: vec![int(0), int(1)], prob: ratio(1, 2) },
            ],
        )
        .unwrap();
        assert_eq!(brute_force_expectation(&split, 0, Kind::Determinant).unwrap(), int(1));
        assert_eq!(brute_force_expectation(&split, 2, Kind::Determinant).unwrap(), ratio(1, 2));
        let single = DiscreteVectorDistribution::new(
            2,
            vec![Atom { vector: vec![int(2), int(-1)], prob: int(1) }],
        )
        .unwrap();
        assert!(brute_force_expectation(&single, 2, Kind::Determinant).unwrap().is_zero());
        assert_eq!(brute_force_expectation(&single, 2, Kind::Permanent).unwrap(), int(50));
        assert!(matches!(
            brute_force_expectation(&split, 9, Kind::Permanent),
            Err(Error::GuardExceeded(_))
        ));
        let tight = OracleLimits {
            brute_force_max_tuples: 16,
            ..OracleLimits::default()
        };
        assert!(tight.brute_force_expectation(&split, 4, Kind::Permanent).is_ok());
        assert!(tight.brute_force_expectation(&split, 5, Kind::Permanent).is_err());
    }

    #[test]
    fn char_poly_examples() {
        assert_eq!(
            char_poly_coeffs_of_gram(&ExactMatrix::identity(3)).unwrap(),
            vec![int(1), int(3), int(3), int(1)]
        );
        assert_eq!(
            char_poly_coeffs_of_gram(&mat(&[&[2, 0], &[0, 3]])).unwrap(),
            vec![int(1), int(5), int(6)]
        );
        let a = mat(&[&[1, 2, 0, 3, 1], &[0, 1, 4, 1, 2]]);
        let b = char_poly_coeffs_of_gram(&gram(&a)).unwrap();
        assert!(b[3..].iter().all(Zero::is_zero));
        assert!(!b[2].is_zero());
    }

    #[test]
    fn char_poly_is_sum_of_principal_minors() {
        let a = mat(&[&[1, 2, 0, 3], &[0, 1, 4, 1], &[2, -1, 1, 1]]);
        let g = gram(&a);
        let b = char_poly_coeffs_of_gram(&g).unwrap();
        for (i, bi) in b.iter().enumerate() {
            let mut acc = ExactScalar::zero();
            for_each_subset(4, i, |idx| acc += det_expansion(&g.principal(idx)).unwrap());
            assert_eq!(*bi, acc, "b_{i}");
        }
    }

    #[test]
    fn permanental_coefficient_basics() {
        let a = mat(&[&[1, 0, 2], &[3, 1, 1]]);
        let g = gram(&a);
        let d = permanental_poly_coeffs(&g, 3).unwrap();
        assert_eq!(d[0], int(1));
        assert_eq!(d[1], g.trace());
        // hand expansion: 2x2 principal permanents g00 g11 + g01^2 etc.
        let pair = |i: usize, j: usize| &g[(i, i)] * &g[(j, j)] + &g[(i, j)] * &g[(j, i)];
        assert_eq!(d[2], pair(0, 1) + pair(0, 2) + pair(1, 2));
        assert_eq!(d[3], perm_expansion(&g).unwrap());
        assert!(matches!(permanental_poly_coeffs(&g, 4), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn permanental_budget_names_offender() {
        let tight = OracleLimits {
            perm_poly_max_ops: 1000,
            ..OracleLimits::default()
        };
        let err = tight
            .permanental_poly_coeffs(&ExactMatrix::identity(12), 4)
            .unwrap_err();
        match err {
            Error::GuardExceeded(msg) => assert!(msg.contains("n = 12, i = 2"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    /// Solve the Vandermonde system for the coefficients of a degree-n polynomial
    /// from its values at x = 0..=n (Newton divided differences, exact).
    fn interpolate(values: &[ExactScalar]) -> Vec<ExactScalar> {
        let n = values.len();
        let mut dd = values.to_vec();
        for level in 1..n {
            for i in (level..n).rev() {
                dd[i] = (&dd[i] - &dd[i - 1]) / int(level as i64);
            }
        }
        // expand Newton form sum dd[k] prod_{j<k} (x - j) into monomial coefficients
        let mut coeffs = vec![ExactScalar::zero(); n];
        let mut basis = vec![int(1)];
        for (k, c) in dd.iter().enumerate() {
            for (p, b) in basis.iter().enumerate() {
                coeffs[p] += c * b;
            }
            let mut next = vec![ExactScalar::zero(); basis.len() + 1];
            for (p, b) in basis.iter().enumerate() {
                next[p + 1] += b;
                next[p] -= b * int(k as i64);
            }
            basis = next;
        }
        coeffs
    }

    #[test]
    fn permanental_coefficients_match_polynomial_extraction() {
        let shapes: [&[&[i64]]; 3] = [
            &[&[1, 2, 0], &[0, 1, 3]],
            &[&[2, 1, 0, 1], &[1, 1, 2, 0], &[0, 3, 1, 1]],
            &[&[1, 0, 2, 1, 1], &[1, 1, 0, 2, 3]],
        ];
        for rows in shapes {
            let g = gram(&mat(rows));
            let n = g.rows();
            let samples: Vec<ExactScalar> = (0..=n)
                .map(|x| {
                    let shifted = ExactMatrix::from_fn(n, n, |i, j| {
                        let base = -g[(i, j)].clone();
                        if i == j { base + int(x as i64) } else { base }
                    });
                    perm_expansion(&shifted).unwrap()
                })
                .collect();
            let poly = interpolate(&samples);
            let d = permanental_poly_coeffs(&g, n).unwrap();
            for i in 0..=n {
                let coeff = &poly[n - i];
                let signed = if i % 2 == 0 { coeff.clone() } else { -coeff.clone() };
                assert_eq!(d[i], signed, "d_{i} for n = {n}");
            }
        }
    }

    #[test]
    fn subsets_enumerated_once() {
        let mut seen = Vec::new();
        for_each_subset(5, 3, |s| seen.push(s.to_vec()));
        assert_eq!(seen.len(), 10);
        assert_eq!(seen[0], vec![0, 1, 2]);
        assert_eq!(seen[9], vec![2, 3, 4]);
        let mut empty = 0;
        for_each_subset(4, 0, |_| empty += 1);
        assert_eq!(empty, 1);
    }

    fn rational_matrix(max_n: usize) -> impl Strategy<Value = ExactMatrix> {
        (1..=max_n).prop_flat_map(|n| {
            prop::collection::vec((-7i64..=7, 1i64..=3), n * n).prop_map(move |raw| {
                ExactMatrix::from_fn(n, n, |i, j| {
                    let (a, b) = raw[i * n + j];
                    ratio(a, b)
                })
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn bareiss_matches_leibniz(m in rational_matrix(6)) {
            prop_assert_eq!(det_bareiss(&m).unwrap(), det_expansion(&m).unwrap());
        }

        #[test]
        fn ryser_matches_leibniz(m in rational_matrix(6)) {
            prop_assert_eq!(perm_ryser(&m).unwrap(), perm_expansion(&m).unwrap());
        }

        #[test]
        fn gram_is_symmetric(rows in 1usize..4, cols in 1usize..6, raw in prop::collection::vec(-9i64..=9, 24)) {
            let a = ExactMatrix::from_fn(rows, cols, |i, j| int(raw[i * 6 + j]));
            let g = gram(&a);
            prop_assert!(g.is_symmetric());
            prop_assert!(has_nonnegative_diagonal(&g));
        }
    }
}
