//! Density functions `d_C(n)`: the number of labeled members on `[n]`.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::{EnumConfig, Enumeration, Property, PropertySpec, StructureError, Vocabulary};
use crate::modarith::{factorial, Residue};

pub fn density(spec: &PropertySpec, n: usize, cfg: EnumConfig) -> Result<BigUint, StructureError> {
    let cfg = cfg.with_degree_bound(spec.implied_degree_bound());
    let e = Enumeration::new(std::sync::Arc::clone(spec.vocab()), n, cfg)?;
    let count = e.count_where(|s| spec.holds(s).expect("enumerated in the spec's vocabulary"))?;
    Ok(BigUint::from(count))
}

pub fn density_mod(spec: &PropertySpec, n: usize, m: u64, cfg: EnumConfig) -> Result<Residue, StructureError> {
    let count = density(spec, n, cfg)?;
    Ok(Residue::from_biguint(&count, m)?)
}

/// Independent closed forms for a few registry entries.
pub fn closed_form_density(spec: &PropertySpec, n: usize) -> Option<BigUint> {
    let graph = spec.vocab().is_graph();
    match spec.property() {
        Property::All if graph => Some(BigUint::one() << (n * n.saturating_sub(1) / 2)),
        Property::All if **spec.vocab() == Vocabulary::ternary() => Some(BigUint::one() << (n * n * n)),
        Property::Cycles | Property::CyclesExactly(1) if graph => Some(if n >= 3 {
            factorial(n as u64 - 1) / 2u32
        } else {
            BigUint::zero()
        }),
        Property::MaxDegree(0) if graph => Some(BigUint::one()),
        Property::MaxDegree(1) if graph => {
            let (mut prev, mut cur) = (BigUint::one(), BigUint::one());
            for k in 2..=n {
                let next = &cur + &prev * BigUint::from(k - 1);
                prev = std::mem::replace(&mut cur, next);
            }
            Some(cur)
        }
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensitySource {
    Enumerated,
    ClosedForm,
}

impl fmt::Display for DensitySource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DensitySource::Enumerated => "enumerated",
            DensitySource::ClosedForm => "closed-form",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DensityValue {
    Exact(BigUint),
    Residue(Residue),
}

impl fmt::Display for DensityValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DensityValue::Exact(v) => write!(f, "{v}"),
            DensityValue::Residue(r) => write!(f, "{}", r.value()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DensityRow {
    pub n: usize,
    pub value: DensityValue,
    pub source: DensitySource,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DensityTable {
    pub property: String,
    pub modulus: Option<u64>,
    pub rows: Vec<DensityRow>,
}

impl DensityTable {
    pub fn exact(&self, n: usize) -> Option<&BigUint> {
        self.rows.iter().find(|r| r.n == n).and_then(|r| match &r.value {
            DensityValue::Exact(v) => Some(v),
            DensityValue::Residue(_) => None,
        })
    }

    /// The row for `n` reduced mod `m`; `None` if absent or if the row only
    /// holds a residue modulo something `m` does not divide.
    pub fn residue(&self, n: usize, m: u64) -> Option<Residue> {
        let row = self.rows.iter().find(|r| r.n == n)?;
        match &row.value {
            DensityValue::Exact(v) => Residue::from_biguint(v, m).ok(),
            DensityValue::Residue(r) if m > 0 && r.modulus() % m == 0 => Residue::new(r.value() as i128, m).ok(),
            DensityValue::Residue(_) => None,
        }
    }
}

impl fmt::Display for DensityTable {
    /// One `n value` line per row.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.rows {
            writeln!(f, "{} {}", row.n, row.value)?;
        }
        Ok(())
    }
}

/// Densities for `n` in `range`, enumerating up to `enumerate_max` and
/// using a closed form beyond it.
pub fn density_table(
    spec: &PropertySpec,
    range: std::ops::RangeInclusive<usize>,
    modulus: Option<u64>,
    enumerate_max: usize,
    cfg: EnumConfig,
) -> Result<DensityTable, StructureError> {
    let mut rows = Vec::new();
    for n in range {
        let (exact, source) = if n <= enumerate_max {
            (density(spec, n, cfg)?, DensitySource::Enumerated)
        } else {
            let v = closed_form_density(spec, n).ok_or_else(|| StructureError::NoClosedForm(spec.to_string()))?;
            (v, DensitySource::ClosedForm)
        };
        let value = match modulus {
            Some(m) => DensityValue::Residue(Residue::from_biguint(&exact, m)?),
            None => DensityValue::Exact(exact),
        };
        rows.push(DensityRow { n, value, source });
    }
    Ok(DensityTable {
        property: spec.to_string(),
        modulus,
        rows,
    })
}
