//! Power traces `t_n = trace(M^n)` of the moment matrix.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::expected::CharCoeffs;
use crate::models::MomentMatrix;
use crate::scalar::{int, serde_rational_vec, ExactScalar};

/// `t_1..t_N`, stored 1-indexed: `get(1)` is the trace of `M`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceSequence {
    #[serde(rename = "t", with = "serde_rational_vec")]
    values: Vec<ExactScalar>,
}

impl TraceSequence {
    pub fn new(values: Vec<ExactScalar>) -> Self {
        Self { values }
    }

    /// Constant sequence `t_n = value` for `n = 1..=len`.
    pub fn constant(value: ExactScalar, len: usize) -> Self {
        Self::new(vec![value; len])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `t_n` for `1 <= n <= len`.
    pub fn get(&self, n: usize) -> &ExactScalar {
        assert!(n >= 1, "trace sequence is 1-indexed");
        &self.values[n - 1]
    }

    pub fn values(&self) -> &[ExactScalar] {
        &self.values
    }
}

/// Iterated exact products `P_1 = M`, `P_{n+1} = P_n M`.
pub fn traces_by_power(m: &MomentMatrix, count: usize) -> TraceSequence {
    let base = m.matrix();
    let mut values = Vec::with_capacity(count);
    let mut power = base.clone();
    for n in 1..=count {
        values.push(power.trace());
        if n < count {
            power = power.mul(base).expect("square matrix");
        }
    }
    TraceSequence::new(values)
}

/// Newton's identities: power sums from elementary symmetric functions.
///
/// `t_n = sum_{k=1}^{min(n-1,t)} (-1)^{k-1} c_k t_{n-k} + (-1)^{n-1} n c_n`,
/// where the last term is present only for `n <= t`.
pub fn traces_from_char_coeffs(c: &CharCoeffs, count: usize) -> TraceSequence {
    let coeffs = c.values();
    let t = coeffs.len() - 1;
    let mut values: Vec<ExactScalar> = Vec::with_capacity(count);
    for n in 1..=count {
        let mut acc = ExactScalar::zero();
        for k in 1..=t.min(n - 1) {
            let term = &coeffs[k] * &values[n - k - 1];
            if k % 2 == 1 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        if n <= t {
            let term = int(n as i64) * &coeffs[n];
            if n % 2 == 1 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        values.push(acc);
    }
    TraceSequence::new(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expected::char_coeffs;
    use crate::matrix::ExactMatrix;
    use crate::models::{moment_matrix_multinomial, MultinomialCountModel};
    use crate::scalar::{parse_rational, ratio};
    use num_traits::Signed;
    use proptest::prelude::*;

    const REFERENCE_TRACES: [&str; 7] = [
        "565/16",
        "210825/256",
        "93917125/4096",
        "42581180625/65536",
        "19338382478125/1048576",
        "8784040432265625/16777216",
        "3990026079685703125/268435456",
    ];

    #[test]
    fn reference_trace_table() {
        let m = moment_matrix_multinomial(&MultinomialCountModel::reference());
        let traces = traces_by_power(&m, 7);
        let expected: Vec<ExactScalar> = REFERENCE_TRACES.iter().map(|s| parse_rational(s).unwrap()).collect();
        assert_eq!(traces.values(), &expected[..]);
        assert_eq!(traces_from_char_coeffs(&char_coeffs(&m), 7), traces);
    }

    #[test]
    fn identity_traces() {
        let m = MomentMatrix::new(ExactMatrix::identity(3)).unwrap();
        assert_eq!(traces_by_power(&m, 5), TraceSequence::constant(int(3), 5));
        assert_eq!(traces_from_char_coeffs(&char_coeffs(&m), 5), TraceSequence::constant(int(3), 5));
    }

    #[test]
    fn small_hand_example() {
        let m = MomentMatrix::new(
            ExactMatrix::from_rows(vec![vec![int(3), ratio(1, 3)], vec![ratio(1, 3), ratio(1, 3)]]).unwrap(),
        )
        .unwrap();
        let t = traces_by_power(&m, 2);
        assert_eq!(t.get(1), &ratio(10, 3));
        assert_eq!(t.get(2), &ratio(84, 9));
    }

    #[test]
    fn one_by_one_newton() {
        let c = CharCoeffs::new(vec![int(1), ratio(2, 3)]).unwrap();
        let t = traces_from_char_coeffs(&c, 6);
        for n in 1..=6 {
            assert_eq!(t.get(n), &num_traits::Pow::pow(ratio(2, 3), n as u32));
        }
    }

    fn symmetric(t: usize, entries: &[(i64, i64)]) -> MomentMatrix {
        let mut m = ExactMatrix::zeros(t, t);
        let mut k = 0;
        for i in 0..t {
            for j in i..t {
                let v = ratio(entries[k].0, entries[k].1);
                let v = if i == j { v.abs() } else { v };
                m[(j, i)] = v.clone();
                m[(i, j)] = v;
                k += 1;
            }
        }
        MomentMatrix::new(m).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn power_and_newton_paths_agree(
            t in 1usize..=5,
            count in 1usize..=10,
            entries in prop::collection::vec((-9i64..=9, 1i64..=5), 15),
        ) {
            let m = symmetric(t, &entries);
            let by_power = traces_by_power(&m, count);
            prop_assert_eq!(by_power.get(1), &m.matrix().trace());
            prop_assert_eq!(traces_from_char_coeffs(&char_coeffs(&m), count), by_power);
        }
    }
}
