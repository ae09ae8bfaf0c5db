//! Polynomial recurrence systems.
//!
//! A system of dimension `k` and depth `c` produces vectors `a_n ∈ Z^k`:
//! the first `c` are given, every later coordinate is an integer polynomial
//! in the `c·k` coordinates of the preceding `c` vectors. The scalar
//! sequence is read off one coordinate (the first, unless overridden).
//!
//! Reduced modulo `m` the window of the last `c` vectors lives in a finite
//! set of size `m^{kc}`, so the reduced sequence is eventually periodic and
//! any `a_n mod m` is answered by one cycle detection plus a table lookup.

mod detect;
mod parse;

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Pow, Signed, Zero};
use thiserror::Error;

pub use detect::{
    detect, eval_mod, DetectConfig, Detection, DiskCache, Evaluator, ModState, ModStepper,
};
pub use parse::parse_spec;

use crate::periodic::PeriodicError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PrsError {
    #[error("line {line}, column {col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("line {line}: {what} index {index} out of range 1..={bound}")]
    IndexOutOfRange {
        line: usize,
        what: &'static str,
        index: usize,
        bound: usize,
    },
    #[error("expected {expected} init lines, found {found}")]
    WrongInitCount { expected: usize, found: usize },
    #[error("initial vector {index} has width {found}, expected {expected}")]
    WrongInitWidth {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("no update rule for coordinate {0}")]
    MissingUpdate(usize),
    #[error("line {line}: duplicate rule for coordinate {coord}")]
    DuplicateUpdate { line: usize, coord: usize },
    #[error("dimension and depth must both be at least 1")]
    EmptyShape,
    #[error("variable a[{lag}][{coord}] outside depth {depth} / dimension {dim}")]
    BadVariable {
        lag: usize,
        coord: usize,
        depth: usize,
        dim: usize,
    },
    #[error("coordinate {coord} outside dimension {dim}")]
    BadCoordinate { coord: usize, dim: usize },
    #[error("modulus must be at least 1")]
    ZeroModulus,
    #[error("index n must be at least 1")]
    ZeroIndex,
    #[error("step budget of {0} exhausted before the state sequence repeated")]
    BudgetExceeded(u64),
    #[error(transparent)]
    Periodic(#[from] PeriodicError),
}

/// `a[lag][coord]`: coordinate `coord` of `a_{n-lag}`, both 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub lag: usize,
    pub coord: usize,
}

/// Sorted `(variable, exponent)` pairs with positive exponents.
pub type Exponents = Vec<(Var, u32)>;

/// Sparse integer polynomial; zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Polynomial {
    terms: BTreeMap<Exponents, BigInt>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        let mut p = Self::zero();
        p.add_term(Vec::new(), c.into());
        p
    }

    pub fn var(v: Var) -> Self {
        let mut p = Self::zero();
        p.add_term(vec![(v, 1)], BigInt::one());
        p
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &BigInt)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn variables(&self) -> impl Iterator<Item = Var> + '_ {
        self.terms.keys().flat_map(|e| e.iter().map(|&(v, _)| v))
    }

    fn add_term(&mut self, exps: Exponents, coeff: BigInt) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            Entry::Vacant(slot) => {
                slot.insert(coeff);
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += coeff;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                out.add_term(merge_exponents(ea, eb), ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, exp: u32) -> Self {
        let mut acc = Self::constant(1);
        let mut base = self.clone();
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Exact evaluation; `lookup` maps each variable to its value.
    pub fn eval<'a>(&self, lookup: impl Fn(Var) -> &'a BigInt) -> BigInt {
        let mut total = BigInt::zero();
        for (exps, coeff) in &self.terms {
            let mut term = coeff.clone();
            for &(v, e) in exps {
                term *= Pow::pow(lookup(v), e);
            }
            total += term;
        }
        total
    }
}

fn merge_exponents(a: &Exponents, b: &Exponents) -> Exponents {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push((a[i].0, a[i].1 + b[j].1));
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a[{}][{}]", self.lag, self.coord)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (exps, coeff)) in self.terms.iter().enumerate() {
            let negative = coeff.is_negative();
            match (i, negative) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let magnitude = coeff.abs();
            let mut factors: Vec<String> = Vec::new();
            if exps.is_empty() || !magnitude.is_one() {
                factors.push(magnitude.to_string());
            }
            for &(v, e) in exps {
                if e == 1 {
                    factors.push(v.to_string());
                } else {
                    factors.push(format!("{v}^{e}"));
                }
            }
            f.write_str(&factors.join("*"))?;
        }
        Ok(())
    }
}

/// A vector-valued recurrence of dimension `k` and depth `c`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PolyRecurrence {
    dim: usize,
    depth: usize,
    init: Vec<Vec<BigInt>>,
    next: Vec<Polynomial>,
}

impl PolyRecurrence {
    pub fn new(
        dim: usize,
        depth: usize,
        init: Vec<Vec<BigInt>>,
        next: Vec<Polynomial>,
    ) -> Result<Self, PrsError> {
        if dim == 0 || depth == 0 {
            return Err(PrsError::EmptyShape);
        }
        if init.len() != depth {
            return Err(PrsError::WrongInitCount {
                expected: depth,
                found: init.len(),
            });
        }
        for (i, v) in init.iter().enumerate() {
            if v.len() != dim {
                return Err(PrsError::WrongInitWidth {
                    index: i + 1,
                    expected: dim,
                    found: v.len(),
                });
            }
        }
        if next.len() != dim {
            return Err(PrsError::MissingUpdate(next.len() + 1));
        }
        for p in &next {
            for v in p.variables() {
                if v.lag == 0 || v.lag > depth || v.coord == 0 || v.coord > dim {
                    return Err(PrsError::BadVariable {
                        lag: v.lag,
                        coord: v.coord,
                        depth,
                        dim,
                    });
                }
            }
        }
        Ok(Self {
            dim,
            depth,
            init,
            next,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn initial(&self) -> &[Vec<BigInt>] {
        &self.init
    }

    pub fn updates(&self) -> &[Polynomial] {
        &self.next
    }

    /// The exact vector `a_n` (1-based).
    pub fn iterate_exact(&self, n: u64) -> Result<Vec<BigInt>, PrsError> {
        Ok(self.exact_prefix(n)?.pop().expect("n >= 1"))
    }

    /// `a_1, ..., a_n` exactly.
    pub fn exact_prefix(&self, n: u64) -> Result<Vec<Vec<BigInt>>, PrsError> {
        if n == 0 {
            return Err(PrsError::ZeroIndex);
        }
        let mut out: Vec<Vec<BigInt>> = self.init.iter().take(n as usize).cloned().collect();
        let mut window: VecDeque<Vec<BigInt>> = self.init.iter().cloned().collect();
        for _ in self.depth as u64..n {
            let next = self.exact_step(&window);
            window.pop_front();
            window.push_back(next.clone());
            out.push(next);
        }
        Ok(out)
    }

    fn exact_step(&self, window: &VecDeque<Vec<BigInt>>) -> Vec<BigInt> {
        let c = self.depth;
        self.next
            .iter()
            .map(|p| p.eval(|v| &window[c - v.lag][v.coord - 1]))
            .collect()
    }

    /// Scalar projection `a_n[coord]` for `n = 1..=count`.
    pub fn exact_scalars(&self, count: u64, coord: usize) -> Result<Vec<BigInt>, PrsError> {
        if coord == 0 || coord > self.dim {
            return Err(PrsError::BadCoordinate { coord, dim: self.dim });
        }
        if count == 0 {
            return Ok(Vec::new());
        }
        Ok(self
            .exact_prefix(count)?
            .into_iter()
            .map(|mut v| v.swap_remove(coord - 1))
            .collect())
    }
}

impl fmt::Display for PolyRecurrence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "dim {}", self.dim)?;
        writeln!(f, "depth {}", self.depth)?;
        for v in &self.init {
            if self.dim == 1 {
                writeln!(f, "init {}", v[0])?;
            } else {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                writeln!(f, "init ({})", parts.join(","))?;
            }
        }
        for (i, p) in self.next.iter().enumerate() {
            writeln!(f, "next[{}] = {}", i + 1, p)?;
        }
        Ok(())
    }
}

/// Recurrences used throughout the tests and the command line.
pub mod catalog {
    use super::{parse_spec, PolyRecurrence};

    pub const FIBONACCI: &str = "\
# Fibonacci numbers F_1 = F_2 = 1
dim 1
depth 2
init 1
init 1
next[1] = a[1][1] + a[2][1]
";

    /// Telephone numbers T(n) = T(n-1) + (n-1) T(n-2); the second
    /// coordinate carries the index n.
    pub const TELEPHONE: &str = "\
# telephone numbers (involutions), coordinate 2 counts n
dim 2
depth 2
init (1,1)
init (2,2)
next[1] = a[1][1] + a[1][2]*a[2][1]
next[2] = a[1][2] + 1
";

    pub fn fibonacci() -> PolyRecurrence {
        parse_spec(FIBONACCI).expect("catalog entry parses")
    }

    pub fn telephone() -> PolyRecurrence {
        parse_spec(TELEPHONE).expect("catalog entry parses")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn telephone_oracle(n: usize) -> Vec<BigInt> {
        // T(1) = 1, T(2) = 2, T(n) = T(n-1) + (n-1) T(n-2)
        let mut t = vec![BigInt::zero(), BigInt::one(), BigInt::from(2)];
        for i in 3..=n {
            let next = &t[i - 1] + BigInt::from(i - 1) * &t[i - 2];
            t.push(next);
        }
        t[1..=n].to_vec()
    }

    #[test]
    fn exact_examples() {
        let fib = catalog::fibonacci();
        assert_eq!(fib.iterate_exact(10).unwrap(), vec![BigInt::from(55)]);
        let tel = catalog::telephone();
        assert_eq!(tel.iterate_exact(5).unwrap(), vec![BigInt::from(26), BigInt::from(5)]);
        assert_eq!(tel.iterate_exact(1).unwrap(), tel.initial()[0]);
        assert_eq!(tel.iterate_exact(2).unwrap(), tel.initial()[1]);
        assert_eq!(tel.iterate_exact(0), Err(PrsError::ZeroIndex));
    }

    #[test]
    fn telephone_matches_its_recurrence() {
        let tel = catalog::telephone();
        assert_eq!(tel.exact_scalars(300, 1).unwrap(), telephone_oracle(300));
        let counter: Vec<BigInt> = (1..=300).map(BigInt::from).collect();
        assert_eq!(tel.exact_scalars(300, 2).unwrap(), counter);
    }

    #[test]
    fn polynomial_algebra() {
        let x = Polynomial::var(Var { lag: 1, coord: 1 });
        let y = Polynomial::var(Var { lag: 2, coord: 1 });
        let sq = x.add(&y).pow(2);
        let expanded = x.mul(&x).add(&x.mul(&y).mul(&Polynomial::constant(2))).add(&y.mul(&y));
        assert_eq!(sq, expanded);
        assert!(x.sub(&x).is_zero());
        assert_eq!(Polynomial::constant(0), Polynomial::zero());
        assert_eq!(sq.to_string(), "2*a[1][1]*a[2][1] + a[1][1]^2 + a[2][1]^2");
        assert_eq!(Polynomial::constant(-3).add(&x.neg()).to_string(), "-3 - a[1][1]");
    }

    #[test]
    fn constructor_validates_shape() {
        let one = || vec![BigInt::one()];
        let x = Polynomial::var(Var { lag: 3, coord: 1 });
        assert!(matches!(
            PolyRecurrence::new(1, 2, vec![one(), one()], vec![x]),
            Err(PrsError::BadVariable { lag: 3, .. })
        ));
        assert!(matches!(
            PolyRecurrence::new(1, 2, vec![one()], vec![Polynomial::zero()]),
            Err(PrsError::WrongInitCount { expected: 2, found: 1 })
        ));
        assert!(matches!(PolyRecurrence::new(0, 1, vec![], vec![]), Err(PrsError::EmptyShape)));
    }
}
