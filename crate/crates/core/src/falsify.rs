//! Refuting claimed sequence values by residues.
//!
//! A claimed `a_n = b` is refuted when `b mod m` differs from the model's
//! `a_n mod m` for some tested `m`. Agreement for every tested modulus
//! proves nothing.

use std::fmt;
use std::path::{Path, PathBuf};

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use rayon::prelude::*;
use thiserror::Error;

use crate::modarith::reduce_bigint;
use crate::prs::{DetectConfig, Evaluator, PolyRecurrence, PrsError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FalsifyError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: index {found} does not exceed the previous index {previous}")]
    NotIncreasing {
        line: usize,
        previous: BigUint,
        found: BigUint,
    },
    #[error("line {line}: indices start at 1")]
    ZeroIndex { line: usize },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("moduli must be positive, got {0}")]
    BadModulus(u64),
    #[error("no moduli given")]
    NoModuli,
    #[error(transparent)]
    Prs(#[from] PrsError),
}

/// Claimed values `(n, a_n)` with strictly increasing `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceFile {
    entries: Vec<(BigUint, BigInt)>,
    source: Option<PathBuf>,
}

impl SequenceFile {
    pub fn new(entries: Vec<(BigUint, BigInt)>) -> Result<Self, FalsifyError> {
        for (i, (n, _)) in entries.iter().enumerate() {
            if n.is_zero() {
                return Err(FalsifyError::ZeroIndex { line: i + 1 });
            }
            if i > 0 && entries[i - 1].0 >= *n {
                return Err(FalsifyError::NotIncreasing {
                    line: i + 1,
                    previous: entries[i - 1].0.clone(),
                    found: n.clone(),
                });
            }
        }
        Ok(Self { entries, source: None })
    }

    pub fn entries(&self) -> &[(BigUint, BigInt)] {
        &self.entries
    }

    pub fn source(&self) -> Option<&Path> {
        self.source.as_deref()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl fmt::Display for SequenceFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, v) in &self.entries {
            writeln!(f, "{n} {v}")?;
        }
        Ok(())
    }
}

/// Parses `n value` lines; blank lines and `#` comments are skipped.
pub fn ingest_bfile(text: &str) -> Result<SequenceFile, FalsifyError> {
    let mut entries: Vec<(BigUint, BigInt)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let mut fields = body.split_whitespace();
        let (Some(n), Some(v), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(FalsifyError::Malformed {
                line,
                message: format!("expected `n value`, found {body:?}"),
            });
        };
        let n: BigUint = n.parse().map_err(|_| FalsifyError::Malformed {
            line,
            message: format!("bad index {n:?}"),
        })?;
        let v: BigInt = v.parse().map_err(|_| FalsifyError::Malformed {
            line,
            message: format!("bad value {v:?}"),
        })?;
        if n.is_zero() {
            return Err(FalsifyError::ZeroIndex { line });
        }
        if let Some((prev, _)) = entries.last() {
            if *prev >= n {
                return Err(FalsifyError::NotIncreasing {
                    line,
                    previous: prev.clone(),
                    found: n,
                });
            }
        }
        entries.push((n, v));
    }
    Ok(SequenceFile { entries, source: None })
}

pub fn read_bfile(path: &Path) -> Result<SequenceFile, FalsifyError> {
    let text = std::fs::read_to_string(path).map_err(|e| FalsifyError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let mut seq = ingest_bfile(&text)?;
    seq.source = Some(path.to_path_buf());
    Ok(seq)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub n: BigUint,
    pub modulus: u64,
    pub expected: u64,
    pub claimed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Falsified,
    Consistent,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Falsified => "FALSIFIED",
            Verdict::Consistent => "CONSISTENT",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FalsificationReport {
    pub mismatches: Vec<Mismatch>,
    pub moduli: Vec<u64>,
    pub entries: usize,
}

impl FalsificationReport {
    pub fn verdict(&self) -> Verdict {
        if self.mismatches.is_empty() {
            Verdict::Consistent
        } else {
            Verdict::Falsified
        }
    }
}

impl fmt::Display for FalsificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for m in &self.mismatches {
            writeln!(
                f,
                "MISMATCH n={} m={} expected={} got={}",
                m.n, m.modulus, m.expected, m.claimed
            )?;
        }
        writeln!(f, "verdict: {}", self.verdict())?;
        if self.verdict() == Verdict::Consistent {
            writeln!(
                f,
                "note: no tested modulus refutes the {} entries; this does not verify them",
                self.entries
            )?;
        }
        Ok(())
    }
}

/// Compares every entry against the model modulo every `m`. Mismatches are
/// ordered by `(n, m)`.
pub fn falsify(seq: &SequenceFile, model: &Evaluator, moduli: &[u64]) -> Result<FalsificationReport, FalsifyError> {
    if moduli.is_empty() {
        return Err(FalsifyError::NoModuli);
    }
    if let Some(&bad) = moduli.iter().find(|&&m| m == 0) {
        return Err(FalsifyError::BadModulus(bad));
    }
    let mut moduli = moduli.to_vec();
    moduli.sort_unstable();
    moduli.dedup();
    let per_modulus: Vec<Result<Vec<Mismatch>, FalsifyError>> = moduli
        .par_iter()
        .map(|&m| {
            let compiled = model.compiled(m)?;
            let mut out = Vec::new();
            for (n, claimed) in &seq.entries {
                let expected = compiled.lookup(n).map_err(PrsError::from)?.value();
                let claimed = reduce_bigint(claimed, m);
                if expected != claimed {
                    out.push(Mismatch {
                        n: n.clone(),
                        modulus: m,
                        expected,
                        claimed,
                    });
                }
            }
            Ok(out)
        })
        .collect();
    let mut mismatches = Vec::new();
    for part in per_modulus {
        mismatches.extend(part?);
    }
    mismatches.sort_by(|a, b| (&a.n, a.modulus).cmp(&(&b.n, b.modulus)));
    Ok(FalsificationReport {
        mismatches,
        moduli,
        entries: seq.len(),
    })
}

pub fn falsify_prs(seq: &SequenceFile, model: &PolyRecurrence, moduli: &[u64]) -> Result<FalsificationReport, FalsifyError> {
    falsify(seq, &Evaluator::new(model.clone(), DetectConfig::default()), moduli)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prs::catalog;
    use proptest::prelude::*;

    fn bfile(prs: &PolyRecurrence, count: u64) -> SequenceFile {
        let values = prs.exact_scalars(count, 1).unwrap();
        let entries = values
            .into_iter()
            .enumerate()
            .map(|(i, v)| (BigUint::from(i + 1), v))
            .collect();
        SequenceFile::new(entries).unwrap()
    }

    #[test]
    fn ingest_examples() {
        assert_eq!(ingest_bfile("1 1\n2 1\n3 2").unwrap().len(), 3);
        assert_eq!(ingest_bfile("# comment\n1 1").unwrap().len(), 1);
        assert!(matches!(
            ingest_bfile("2 5\n1 3"),
            Err(FalsifyError::NotIncreasing { line: 2, .. })
        ));
        assert_eq!(ingest_bfile("0 1"), Err(FalsifyError::ZeroIndex { line: 1 }));
        assert!(matches!(ingest_bfile("1"), Err(FalsifyError::Malformed { line: 1, .. })));
        assert!(matches!(ingest_bfile("\n1 2 3"), Err(FalsifyError::Malformed { line: 2, .. })));
        assert!(matches!(ingest_bfile("1 x"), Err(FalsifyError::Malformed { .. })));
        let neg = ingest_bfile("1 -7\n").unwrap();
        assert_eq!(neg.entries()[0].1, BigInt::from(-7));
    }

    #[test]
    fn corrupted_telephone_entry() {
        let tel = catalog::telephone();
        let mut seq = bfile(&tel, 10);
        seq.entries[4].1 += 1;
        let report = falsify_prs(&seq, &tel, &[2]).unwrap();
        assert_eq!(
            report.mismatches,
            vec![Mismatch {
                n: BigUint::from(5u32),
                modulus: 2,
                expected: 0,
                claimed: 1
            }]
        );
        assert_eq!(report.to_string(), "MISMATCH n=5 m=2 expected=0 got=1\nverdict: FALSIFIED\n");
    }

    #[test]
    fn clean_fibonacci_is_consistent() {
        let fib = catalog::fibonacci();
        let moduli: Vec<u64> = (2..=16).collect();
        let report = falsify_prs(&bfile(&fib, 50), &fib, &moduli).unwrap();
        assert_eq!(report.verdict(), Verdict::Consistent);
        assert!(report.to_string().contains("does not verify"));
    }

    #[test]
    fn negative_claims_wrap() {
        let fib = catalog::fibonacci();
        let seq = ingest_bfile("1 -1\n2 1\n").unwrap();
        let report = falsify_prs(&seq, &fib, &[2]).unwrap();
        assert_eq!(report.verdict(), Verdict::Consistent);
        let report = falsify_prs(&seq, &fib, &[3]).unwrap();
        assert_eq!(report.mismatches[0].claimed, 2);
    }

    #[test]
    fn bad_moduli() {
        let fib = catalog::fibonacci();
        let seq = ingest_bfile("1 1").unwrap();
        assert_eq!(falsify_prs(&seq, &fib, &[]), Err(FalsifyError::NoModuli));
        assert_eq!(falsify_prs(&seq, &fib, &[0, 2]), Err(FalsifyError::BadModulus(0)));
        assert_eq!(falsify_prs(&seq, &fib, &[1]).unwrap().verdict(), Verdict::Consistent);
    }

    #[test]
    fn huge_indices() {
        let fib = catalog::fibonacci();
        // F_(10^18) is odd since 3 does not divide 10^18.
        let seq = ingest_bfile("1000000000000000000 2").unwrap();
        let report = falsify_prs(&seq, &fib, &[2]).unwrap();
        assert_eq!(report.verdict(), Verdict::Falsified);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn detection_matches_divisibility(index in 0usize..30, delta in 1u64..=1 << 20) {
            let tel = catalog::telephone();
            let mut seq = bfile(&tel, 30);
            let clean = falsify_prs(&seq, &tel, &(2..=64).collect::<Vec<_>>()).unwrap();
            prop_assert_eq!(clean.verdict(), Verdict::Consistent);
            seq.entries[index].1 += delta;
            let report = falsify_prs(&seq, &tel, &(2..=64).collect::<Vec<_>>()).unwrap();
            let detectable = (2..=64u64).any(|m| delta % m != 0);
            prop_assert_eq!(report.verdict() == Verdict::Falsified, detectable);
            prop_assert!(report.mismatches.iter().all(|m| m.expected != m.claimed));
        }
    }
}
