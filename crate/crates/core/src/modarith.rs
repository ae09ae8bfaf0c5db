//! Exact modular arithmetic: residues, trial-division factorization,
//! Chinese remainder solving and small prime enumeration.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("modulus must be at least 1")]
    ZeroModulus,
    #[error("cannot factor 0")]
    FactorZero,
    #[error("moduli {left_modulus} (#{left}) and {right_modulus} (#{right}) are not coprime")]
    NotCoprime {
        left: usize,
        right: usize,
        left_modulus: BigUint,
        right_modulus: BigUint,
    },
    #[error("no congruences given")]
    EmptySystem,
    #[error("combined modulus does not fit in 64 bits")]
    Overflow,
    #[error("prime index must be at least 1")]
    ZeroPrimeIndex,
}

/// A value in `[0, modulus)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Residue {
    value: u64,
    modulus: u64,
}

impl Residue {
    /// Wraps `value` into `[0, modulus)`.
    pub fn new(value: i128, modulus: u64) -> Result<Self, ArithError> {
        if modulus == 0 {
            return Err(ArithError::ZeroModulus);
        }
        let value = value.rem_euclid(modulus as i128) as u64;
        Ok(Self { value, modulus })
    }

    pub fn from_bigint(value: &BigInt, modulus: u64) -> Result<Self, ArithError> {
        if modulus == 0 {
            return Err(ArithError::ZeroModulus);
        }
        Ok(Self {
            value: reduce_bigint(value, modulus),
            modulus,
        })
    }

    pub fn from_biguint(value: &BigUint, modulus: u64) -> Result<Self, ArithError> {
        if modulus == 0 {
            return Err(ArithError::ZeroModulus);
        }
        Ok(Self {
            value: reduce_biguint(value, modulus),
            modulus,
        })
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}", self.value, self.modulus)
    }
}

/// Sign-normalized reduction of an arbitrary-precision integer.
pub fn reduce_bigint(value: &BigInt, modulus: u64) -> u64 {
    let m = BigInt::from(modulus);
    value.mod_floor(&m).to_u64().expect("reduced value below u64 modulus")
}

pub fn reduce_biguint(value: &BigUint, modulus: u64) -> u64 {
    (value % modulus).to_u64().expect("reduced value below u64 modulus")
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

#[inline]
pub fn add_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 + b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Prime-power decomposition, primes ascending.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PrimePowerFactorization {
    factors: Vec<(u64, u32)>,
}

impl PrimePowerFactorization {
    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    /// The prime-power parts `p^e`.
    pub fn parts(&self) -> Vec<u64> {
        self.factors.iter().map(|&(p, e)| p.pow(e)).collect()
    }

    pub fn product(&self) -> u128 {
        self.factors
            .iter()
            .map(|&(p, e)| (p as u128).pow(e))
            .product()
    }
}

pub fn factorize(m: u64) -> Result<PrimePowerFactorization, ArithError> {
    if m == 0 {
        return Err(ArithError::FactorZero);
    }
    let mut rest = m;
    let mut factors = Vec::new();
    let mut push = |p: u64, rest: &mut u64| {
        let mut e = 0;
        while rest.is_multiple_of(p) {
            *rest /= p;
            e += 1;
        }
        if e > 0 {
            factors.push((p, e));
        }
    };
    push(2, &mut rest);
    push(3, &mut rest);
    // 6k ± 1 wheel
    let mut p: u64 = 5;
    while p.saturating_mul(p) <= rest {
        push(p, &mut rest);
        push(p + 2, &mut rest);
        p += 6;
    }
    if rest > 1 {
        factors.push((rest, 1));
    }
    Ok(PrimePowerFactorization { factors })
}

pub fn is_prime(n: u64) -> bool {
    match factorize(n) {
        Ok(f) => f.factors == [(n, 1)],
        Err(_) => false,
    }
}

/// Solves a system of congruences with pairwise coprime moduli.
pub fn crt_solve(congruences: &[Residue]) -> Result<Residue, ArithError> {
    let big: Vec<(BigUint, BigUint)> = congruences
        .iter()
        .map(|r| (BigUint::from(r.value), BigUint::from(r.modulus)))
        .collect();
    let (value, modulus) = crt_solve_big(&big)?;
    let modulus = modulus.to_u64().ok_or(ArithError::Overflow)?;
    Ok(Residue {
        value: value.to_u64().expect("value below modulus"),
        modulus,
    })
}

/// Arbitrary-precision CRT over `(residue, modulus)` pairs. Returns the
/// unique solution in `[0, product)` together with the product.
pub fn crt_solve_big(congruences: &[(BigUint, BigUint)]) -> Result<(BigUint, BigUint), ArithError> {
    if congruences.is_empty() {
        return Err(ArithError::EmptySystem);
    }
    if congruences.iter().any(|(_, m)| m.is_zero()) {
        return Err(ArithError::ZeroModulus);
    }
    for i in 0..congruences.len() {
        for j in i + 1..congruences.len() {
            if !congruences[i].1.gcd(&congruences[j].1).is_one() {
                return Err(ArithError::NotCoprime {
                    left: i,
                    right: j,
                    left_modulus: congruences[i].1.clone(),
                    right_modulus: congruences[j].1.clone(),
                });
            }
        }
    }

    let mut value = BigInt::zero();
    let mut modulus = BigInt::one();
    for (r, m) in congruences {
        let r = BigInt::from(r.clone()) % BigInt::from(m.clone());
        let m = BigInt::from(m.clone());
        // value + modulus * k ≡ r (mod m)
        let ext = modulus.extended_gcd(&m);
        let inv = ext.x.mod_floor(&m);
        let k = ((&r - &value) * inv).mod_floor(&m);
        value += &modulus * k;
        modulus *= &m;
        value = value.mod_floor(&modulus);
    }
    debug_assert!(!value.is_negative());
    Ok((value.to_biguint().unwrap(), modulus.to_biguint().unwrap()))
}

/// The `i`-th prime, 1-indexed (`nth_prime(1) == 2`).
pub fn nth_prime(i: usize) -> Result<u64, ArithError> {
    if i == 0 {
        return Err(ArithError::ZeroPrimeIndex);
    }
    Ok(primes(i)[i - 1])
}

/// The first `count` primes.
pub fn primes(count: usize) -> Vec<u64> {
    if count == 0 {
        return Vec::new();
    }
    // n (ln n + ln ln n) bounds p_n for n ≥ 6
    let n = count as f64;
    let mut limit = if count < 6 {
        15
    } else {
        (n * (n.ln() + n.ln().ln())).ceil() as usize + 1
    };
    loop {
        let found = sieve(limit);
        if found.len() >= count {
            return found.into_iter().take(count).collect();
        }
        limit *= 2;
    }
}

fn sieve(limit: usize) -> Vec<u64> {
    let mut composite = vec![false; limit + 1];
    let mut out = Vec::new();
    for p in 2..=limit {
        if composite[p] {
            continue;
        }
        out.push(p as u64);
        let mut q = p * p;
        while q <= limit {
            composite[q] = true;
            q += p;
        }
    }
    out
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

pub fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * i)
}
