//! Eventually periodic residue sequences and constant-size lookup.
//!
//! A sequence `a_1, a_2, ...` reduced modulo `m` is stored as its first
//! `N + r` values, where `a_{n+r} = a_n` for every `n > N`. Any index,
//! however large, is answered by reducing `n - N - 1` modulo the period.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::modarith::Residue;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PeriodicError {
    #[error("modulus must be at least 1")]
    ZeroModulus,
    #[error("period must be at least 1")]
    ZeroPeriod,
    #[error("sequence indices start at 1")]
    ZeroIndex,
    #[error("prefix of length {len} is too short to certify preperiod {preperiod} with period {period}")]
    PrefixTooShort {
        len: usize,
        preperiod: usize,
        period: usize,
    },
    #[error("prefix contradicts the certificate at index {index}")]
    CertificateViolated { index: usize },
    #[error("table has {actual} entries, expected {expected}")]
    TableLength { expected: usize, actual: usize },
    #[error("table entry {index} is {value}, not below modulus {modulus}")]
    OutOfRange { index: usize, value: u64, modulus: u64 },
    #[error("period {period} is not minimal (shift {smaller} also works)")]
    PeriodNotMinimal { period: usize, smaller: usize },
    #[error("preperiod {preperiod} is not minimal")]
    PreperiodNotMinimal { preperiod: usize },
    #[error("malformed serialization: {0}")]
    Malformed(String),
}

/// Caller-supplied promise that `a_{n+period} = a_n` for all `n > preperiod`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CycleCertificate {
    pub preperiod: usize,
    pub period: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EventuallyPeriodic {
    modulus: u64,
    preperiod: usize,
    period: usize,
    table: Vec<u64>,
}

impl EventuallyPeriodic {
    /// Validates every invariant, including minimality of `(N, r)`.
    pub fn new(
        modulus: u64,
        preperiod: usize,
        period: usize,
        table: Vec<u64>,
    ) -> Result<Self, PeriodicError> {
        if modulus == 0 {
            return Err(PeriodicError::ZeroModulus);
        }
        if period == 0 {
            return Err(PeriodicError::ZeroPeriod);
        }
        if table.len() != preperiod + period {
            return Err(PeriodicError::TableLength {
                expected: preperiod + period,
                actual: table.len(),
            });
        }
        if let Some((i, &v)) = table.iter().enumerate().find(|(_, &v)| v >= modulus) {
            return Err(PeriodicError::OutOfRange {
                index: i + 1,
                value: v,
                modulus,
            });
        }
        let cycle = &table[preperiod..];
        if let Some(smaller) = (1..period).find(|&s| cyclic_shift_invariant(cycle, s)) {
            return Err(PeriodicError::PeriodNotMinimal { period, smaller });
        }
        if preperiod > 0 && table[preperiod - 1] == table[preperiod - 1 + period] {
            return Err(PeriodicError::PreperiodNotMinimal { preperiod });
        }
        Ok(Self {
            modulus,
            preperiod,
            period,
            table,
        })
    }

    /// Canonicalizes a certified prefix to the minimal `(N, r)`.
    pub fn normalize(
        modulus: u64,
        prefix: &[u64],
        certificate: CycleCertificate,
    ) -> Result<Self, PeriodicError> {
        if modulus == 0 {
            return Err(PeriodicError::ZeroModulus);
        }
        let CycleCertificate { preperiod, period } = certificate;
        if period == 0 {
            return Err(PeriodicError::ZeroPeriod);
        }
        if prefix.len() < preperiod + period {
            return Err(PeriodicError::PrefixTooShort {
                len: prefix.len(),
                preperiod,
                period,
            });
        }
        let values: Vec<u64> = prefix.iter().map(|v| v % modulus).collect();
        // every overlap the prefix offers must agree with the certificate
        for i in preperiod..values.len() - period {
            if values[i] != values[i + period] {
                return Err(PeriodicError::CertificateViolated { index: i + 1 });
            }
        }

        let cycle = &values[preperiod..preperiod + period];
        let r = (1..=period)
            .filter(|s| period % s == 0)
            .find(|&s| cyclic_shift_invariant(cycle, s))
            .expect("the full period always qualifies");

        let mut n = preperiod;
        while n > 0 && values[n - 1] == values[n - 1 + r] {
            n -= 1;
        }
        Ok(Self {
            modulus,
            preperiod: n,
            period: r,
            table: values[..n + r].to_vec(),
        })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn preperiod(&self) -> usize {
        self.preperiod
    }

    pub fn period(&self) -> usize {
        self.period
    }

    /// `a_1, ..., a_{N+r}` reduced modulo `m`.
    pub fn table(&self) -> &[u64] {
        &self.table
    }

    /// `a_n mod m` for 1-based `n` of any size.
    pub fn lookup(&self, n: &BigUint) -> Result<Residue, PeriodicError> {
        let Some(small) = n.to_u64() else {
            let offset = n - (self.preperiod as u64 + 1);
            let i = (offset % self.period as u64).to_usize().expect("below period");
            return Ok(self.residue(self.table[self.preperiod + i]));
        };
        self.lookup_u64(small)
    }

    pub fn lookup_u64(&self, n: u64) -> Result<Residue, PeriodicError> {
        if n == 0 {
            return Err(PeriodicError::ZeroIndex);
        }
        let head = (self.preperiod + self.period) as u64;
        let value = if n <= head {
            self.table[(n - 1) as usize]
        } else {
            let i = (n - self.preperiod as u64 - 1) % self.period as u64;
            self.table[self.preperiod + i as usize]
        };
        Ok(self.residue(value))
    }

    fn residue(&self, value: u64) -> Residue {
        Residue::new(value as i128, self.modulus).expect("nonzero modulus")
    }
}

fn cyclic_shift_invariant(cycle: &[u64], shift: usize) -> bool {
    let len = cycle.len();
    (0..len).all(|i| cycle[i] == cycle[(i + shift) % len])
}

impl fmt::Display for EventuallyPeriodic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {} {}", self.modulus, self.preperiod, self.period)?;
        let mut first = true;
        for v in &self.table {
            if !first {
                f.write_str(" ")?;
            }
            write!(f, "{v}")?;
            first = false;
        }
        Ok(())
    }
}

impl FromStr for EventuallyPeriodic {
    type Err = PeriodicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut lines = s.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| PeriodicError::Malformed("missing header line".into()))?;
        let head: Vec<&str> = header.split_whitespace().collect();
        if head.len() != 3 {
            return Err(PeriodicError::Malformed(format!(
                "header needs `m N r`, got {header:?}"
            )));
        }
        let num = |t: &str| {
            t.parse::<u64>()
                .map_err(|_| PeriodicError::Malformed(format!("not an integer: {t:?}")))
        };
        let modulus = num(head[0])?;
        let preperiod = num(head[1])? as usize;
        let period = num(head[2])? as usize;
        let table = match lines.next() {
            Some(l) => l.split_whitespace().map(num).collect::<Result<Vec<_>, _>>()?,
            None => Vec::new(),
        };
        if lines.next().is_some() {
            return Err(PeriodicError::Malformed("trailing content".into()));
        }
        Self::new(modulus, preperiod, period, table)
    }
}
