//! A sequence that is eventually periodic modulo every prime power yet
//! encodes an arbitrary bit stream: `a_n` is the CRT solution in
//! `{1, ..., p_1^n ··· p_n^n}` of `a_n ≡ b_k (mod p_k^n)` for `k ≤ n`.
//!
//! With a non-computable bit stream `(m, n) ↦ a_n mod m` is not computable;
//! here the bits come from computable stand-ins so the arithmetic can be
//! exercised.

use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::modarith::{crt_solve_big, primes, ArithError};

/// Largest `n` evaluated unless configured otherwise.
pub const DEFAULT_MAX_N: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdversaryError {
    #[error("sequence indices start at 1")]
    ZeroIndex,
    #[error("n = {n} exceeds the precision budget (max {max})")]
    BudgetExceeded { n: usize, max: usize },
    #[error("unknown bit source {0:?} (expected alternating, thue-morse or list:b1,b2,...)")]
    UnknownSource(String),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// A deterministic bit stream `b_1, b_2, ...`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BitSource {
    /// `1, 0, 1, 0, ...` (`b_i = i mod 2`).
    Alternating,
    /// `0, 1, 1, 0, 1, 0, 0, 1, ...` (`b_i` = parity of the bits of `i - 1`).
    ThueMorse,
    /// Explicit prefix, zero afterwards.
    List(Vec<u8>),
}

impl BitSource {
    pub fn bit(&self, i: usize) -> u8 {
        assert!(i >= 1, "bit sources are 1-indexed");
        match self {
            BitSource::Alternating => (i % 2) as u8,
            BitSource::ThueMorse => ((i - 1).count_ones() % 2) as u8,
            BitSource::List(bits) => bits.get(i - 1).copied().unwrap_or(0),
        }
    }
}

impl FromStr for BitSource {
    type Err = AdversaryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "alternating" => Ok(BitSource::Alternating),
            "thue-morse" => Ok(BitSource::ThueMorse),
            _ => {
                let list = s
                    .strip_prefix("list:")
                    .ok_or_else(|| AdversaryError::UnknownSource(s.to_string()))?;
                list.split(',')
                    .filter(|t| !t.trim().is_empty())
                    .map(|t| match t.trim() {
                        "0" => Ok(0),
                        "1" => Ok(1),
                        _ => Err(AdversaryError::UnknownSource(s.to_string())),
                    })
                    .collect::<Result<Vec<u8>, _>>()
                    .map(BitSource::List)
            }
        }
    }
}

impl fmt::Display for BitSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BitSource::Alternating => f.write_str("alternating"),
            BitSource::ThueMorse => f.write_str("thue-morse"),
            BitSource::List(bits) => {
                let parts: Vec<String> = bits.iter().map(u8::to_string).collect();
                write!(f, "list:{}", parts.join(","))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Adversary {
    bits: BitSource,
    max_n: usize,
}

impl Adversary {
    pub fn new(bits: BitSource) -> Self {
        Self {
            bits,
            max_n: DEFAULT_MAX_N,
        }
    }

    pub fn with_max_n(mut self, max_n: usize) -> Self {
        self.max_n = max_n;
        self
    }

    pub fn bits(&self) -> &BitSource {
        &self.bits
    }

    fn check(&self, n: usize) -> Result<(), AdversaryError> {
        if n == 0 {
            return Err(AdversaryError::ZeroIndex);
        }
        if n > self.max_n {
            return Err(AdversaryError::BudgetExceeded { n, max: self.max_n });
        }
        Ok(())
    }

    /// The term `a_n`, in `{1, ..., ∏_{k≤n} p_k^n}`.
    pub fn term(&self, n: usize) -> Result<BigUint, AdversaryError> {
        self.check(n)?;
        let congruences: Vec<(BigUint, BigUint)> = primes(n)
            .into_iter()
            .enumerate()
            .map(|(k, p)| {
                (
                    BigUint::from(self.bits.bit(k + 1)),
                    BigUint::from(p).pow(n as u32),
                )
            })
            .collect();
        let (value, modulus) = crt_solve_big(&congruences)?;
        Ok(if value.is_zero() { modulus } else { value })
    }

    /// `a_n mod p_i^j` for each `n` in the range, flagged against `b_i`.
    pub fn verify_stabilization(
        &self,
        i: usize,
        j: usize,
        range: RangeInclusive<usize>,
    ) -> Result<Vec<StabilizationRow>, AdversaryError> {
        if i == 0 || j == 0 {
            return Err(AdversaryError::ZeroIndex);
        }
        let p = *primes(i).last().expect("i >= 1");
        let modulus = BigUint::from(p).pow(j as u32);
        let expected = self.bits.bit(i);
        let mut rows = Vec::new();
        for n in range {
            if n == 0 {
                continue;
            }
            let residue = self.term(n)? % &modulus;
            let applies = n >= i.max(j);
            let matches = residue.to_u64() == Some(expected as u64);
            rows.push(StabilizationRow {
                n,
                prime: p,
                exponent: j,
                residue,
                expected,
                applies,
                matches,
            });
        }
        Ok(rows)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilizationRow {
    pub n: usize,
    pub prime: u64,
    pub exponent: usize,
    pub residue: BigUint,
    pub expected: u8,
    /// `n ≥ max(i, j)`, where the residue is forced to equal `b_i`.
    pub applies: bool,
    pub matches: bool,
}

impl StabilizationRow {
    pub fn violated(&self) -> bool {
        self.applies && !self.matches
    }
}
