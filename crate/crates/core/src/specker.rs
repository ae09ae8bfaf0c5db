//! Orbit divisibility and the stride-`C` modular recurrence for densities
//! of degree-bounded properties.
//!
//! With `C = m * d!`, every count `d_D(n)` of a DU-equivalence block `D` is
//! congruent mod `m` to a fixed linear combination of the block counts at
//! `C * floor((n - 1) / C)`. The coefficient from block `E` into `D` counts
//! structures `B` on `((n - 1) mod C) + 1` elements with `B ⊔ rep(E)` in `D`.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::ops::RangeInclusive;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use thiserror::Error;

use crate::du::{du_submatrix, group_columns, permutations, DuError, WitnessSet};
use crate::modarith::{binomial, factorial, Residue};
use crate::structures::{
    density_table, DensitySource, EnumConfig, Enumeration, PropertySpec, RelStructure, StructureError,
};

/// Largest moved set for which orbits are enumerated.
pub const MAX_ORBIT_SUBSET: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpeckerError {
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Du(#[from] DuError),
    #[error("moved set has {size} elements, orbit enumeration allows at most {max}")]
    OrbitBudget { size: usize, max: usize },
    #[error("element {element} is not in the universe [1, {n}] or is repeated")]
    BadSubset { element: usize, n: usize },
    #[error("vertex {0} lies inside the moved set")]
    VertexInSubset(usize),
    #[error("vertex {0} has no neighbours in the moved set; the divisibility check needs at least one")]
    NoNeighbors(usize),
    #[error("modulus must be at least 1")]
    ZeroModulus,
    #[error("stride m * d! = {m} * {d}! does not fit in 64 bits")]
    StrideOverflow { m: u64, d: usize },
    #[error("{m} does not divide binom({n}, {k})")]
    Divisibility { m: u64, n: u64, k: u64 },
    #[error("structure {0} matches no block of the witness set; add witnesses")]
    Unclassified(String),
    #[error("no structure of degree above {0} exists in this vocabulary, so no sink probe")]
    NoSinkProbe(usize),
    #[error("modulus {table} of the table differs from the recurrence modulus {params}")]
    ModulusMismatch { table: u64, params: u64 },
    #[error("no block counts for n = {0}")]
    MissingDensity(usize),
    #[error("property {0} does not certify both connectivity and a degree bound")]
    NotCertified(String),
}

fn check_subset(s: &RelStructure, subset: &[usize]) -> Result<(), SpeckerError> {
    for (i, &x) in subset.iter().enumerate() {
        if x == 0 || x > s.n() || subset[..i].contains(&x) {
            return Err(SpeckerError::BadSubset { element: x, n: s.n() });
        }
    }
    if subset.len() > MAX_ORBIT_SUBSET {
        return Err(SpeckerError::OrbitBudget {
            size: subset.len(),
            max: MAX_ORBIT_SUBSET,
        });
    }
    Ok(())
}

/// Images of `s` under every permutation of `subset` fixing the rest.
fn images<'a>(s: &'a RelStructure, subset: &'a [usize]) -> impl Iterator<Item = RelStructure> + 'a {
    permutations(subset.len()).into_iter().map(move |p| {
        let mut full: Vec<usize> = (1..=s.n()).collect();
        for (i, &x) in subset.iter().enumerate() {
            full[x - 1] = subset[p[i] - 1];
        }
        s.permuted(&full)
    })
}

/// `|Orb(s)|` under the permutations of `subset` that fix everything else.
pub fn orbit_size(s: &RelStructure, subset: &[usize]) -> Result<u64, SpeckerError> {
    check_subset(s, subset)?;
    Ok(images(s, subset).collect::<HashSet<_>>().len() as u64)
}

/// `|subset|! / |Stab(s)|`, the orbit-stabilizer count.
pub fn orbit_size_by_stabilizer(s: &RelStructure, subset: &[usize]) -> Result<u64, SpeckerError> {
    check_subset(s, subset)?;
    let stab = images(s, subset).filter(|t| t == s).count() as u64;
    let total = factorial(subset.len() as u64).to_u64().expect("8! fits");
    Ok(total / stab)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DvlmCheck {
    pub neighbors: usize,
    pub binomial: BigUint,
    pub orbit: u64,
    pub divides: bool,
}

/// Whether `binom(|A'|, d')` divides the orbit size, `d'` being the number
/// of Gaifman neighbours of `v` inside `A'`.
pub fn check_dvlm(s: &RelStructure, subset: &[usize], v: usize) -> Result<DvlmCheck, SpeckerError> {
    check_subset(s, subset)?;
    if v == 0 || v > s.n() {
        return Err(SpeckerError::BadSubset { element: v, n: s.n() });
    }
    if subset.contains(&v) {
        return Err(SpeckerError::VertexInSubset(v));
    }
    let g = s.gaifman();
    let neighbors = subset.iter().filter(|&&a| g.adjacent(v, a)).count();
    if neighbors == 0 {
        return Err(SpeckerError::NoNeighbors(v));
    }
    let orbit = orbit_size(s, subset)?;
    let binomial = binomial(subset.len() as u64, neighbors as u64);
    let divides = (BigUint::from(orbit) % &binomial).is_zero();
    Ok(DvlmCheck {
        neighbors,
        binomial,
        orbit,
        divides,
    })
}

/// A random graph on `2..=max_n` vertices with a moved set and an outside
/// vertex that has at least one neighbour in it.
pub fn random_dvlm_instance(rng: &mut impl Rng, max_n: usize) -> (RelStructure, Vec<usize>, usize) {
    assert!(max_n >= 2, "need room for a moved set and an outside vertex");
    loop {
        let n = rng.random_range(2..=max_n);
        let mut edges = Vec::new();
        for a in 1..=n {
            for b in a + 1..=n {
                if rng.random_bool(0.5) {
                    edges.push((a, b));
                }
            }
        }
        let g = RelStructure::graph(n, &edges).expect("valid edges");
        let v = rng.random_range(1..=n);
        let subset: Vec<usize> = (1..=n)
            .filter(|&x| x != v && rng.random_bool(0.6))
            .take(MAX_ORBIT_SUBSET)
            .collect();
        let gaif = g.gaifman();
        if subset.iter().any(|&a| gaif.adjacent(v, a)) {
            return (g, subset, v);
        }
    }
}

/// The stride `C = m * d!` and its divisibility guarantee.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RecurrenceParams {
    m: u64,
    d: usize,
    c: u64,
}

impl RecurrenceParams {
    /// Checks `m | binom(t C, d')` for `1 <= t <= t_max`, `0 < d' <= d`.
    pub fn new(m: u64, d: usize, t_max: u64) -> Result<Self, SpeckerError> {
        if m == 0 {
            return Err(SpeckerError::ZeroModulus);
        }
        let c = factorial(d as u64)
            .to_u64()
            .and_then(|f| f.checked_mul(m))
            .ok_or(SpeckerError::StrideOverflow { m, d })?;
        for t in 1..=t_max {
            for dp in 1..=d as u64 {
                let n = t * c;
                if !(binomial(n, dp) % m).is_zero() {
                    return Err(SpeckerError::Divisibility { m, n, k: dp });
                }
            }
        }
        Ok(Self { m, d, c })
    }

    pub fn modulus(&self) -> u64 {
        self.m
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn stride(&self) -> u64 {
        self.c
    }

    /// `t(n) = floor((n - 1) / C)`, with `t(0) = 0`.
    pub fn t(&self, n: usize) -> usize {
        n.saturating_sub(1) / self.c as usize
    }

    /// `C * t(n)`.
    pub fn base(&self, n: usize) -> usize {
        self.t(n) * self.c as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    /// Witness indices.
    pub members: Vec<usize>,
    /// Member with the smallest universe.
    pub representative: usize,
    pub fingerprint: Vec<bool>,
}

/// DU-equivalence blocks of `p ∧ max-degree:d` over a witness set, with
/// block 0 the sink, and block counts mod `m` per universe size.
#[derive(Debug, Clone)]
pub struct EquivalenceTable {
    spec: PropertySpec,
    d: usize,
    m: u64,
    witnesses: WitnessSet,
    blocks: Vec<Block>,
    counts: BTreeMap<usize, Vec<u64>>,
}

/// A structure whose first element has `d + 1` neighbours.
fn sink_probe(spec: &PropertySpec, d: usize) -> Result<RelStructure, SpeckerError> {
    let vocab = spec.vocab();
    let sym = vocab
        .symbols()
        .iter()
        .position(|s| s.arity >= 2)
        .ok_or(SpeckerError::NoSinkProbe(d))?;
    let arity = vocab.symbols()[sym].arity;
    let mut s = RelStructure::empty(Arc::clone(vocab), d + 2)?;
    for j in 2..=d + 2 {
        let mut t = vec![j; arity];
        t[0] = 1;
        s.insert(sym, &t)?;
    }
    Ok(s)
}

impl EquivalenceTable {
    pub fn spec(&self) -> &PropertySpec {
        &self.spec
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn modulus(&self) -> u64 {
        self.m
    }

    pub fn witnesses(&self) -> &WitnessSet {
        &self.witnesses
    }

    /// Block 0 is the sink.
    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn representative(&self, block: usize) -> &RelStructure {
        &self.witnesses.structures()[self.blocks[block].representative]
    }

    /// Counts mod `m` of each block on `[n]`; the sink entry is always 0.
    pub fn counts(&self, n: usize) -> Option<&[u64]> {
        self.counts.get(&n).map(Vec::as_slice)
    }

    pub fn count_rows(&self) -> &BTreeMap<usize, Vec<u64>> {
        &self.counts
    }

    pub fn classify(&self, s: &RelStructure) -> Result<usize, SpeckerError> {
        if s.gaifman().max_degree() > self.d {
            return Ok(0);
        }
        let mut fp = Vec::with_capacity(self.witnesses.len());
        for w in self.witnesses.structures() {
            fp.push(self.spec.holds(&w.disjoint_union(s)?)?);
        }
        self.blocks
            .iter()
            .position(|b| b.fingerprint == fp)
            .ok_or_else(|| SpeckerError::Unclassified(s.to_string()))
    }

    fn count(&mut self, n: usize, cfg: EnumConfig) -> Result<(), SpeckerError> {
        let cfg = cfg.with_degree_bound(Some(self.d));
        let e = Enumeration::new(Arc::clone(self.spec.vocab()), n, cfg)?;
        let mut tally = vec![0u64; self.blocks.len()];
        let mut failure = None;
        e.for_each(|s| match self.classify(s) {
            Ok(b) => tally[b] = (tally[b] + 1) % self.m,
            Err(err) => {
                failure.get_or_insert(err);
            }
        })?;
        if let Some(err) = failure {
            return Err(err);
        }
        tally[0] = 0;
        self.counts.insert(n, tally);
        Ok(())
    }
}

pub fn equiv_table(
    p: &PropertySpec,
    d: usize,
    m: u64,
    witnesses: &WitnessSet,
    range: RangeInclusive<usize>,
    cfg: EnumConfig,
) -> Result<EquivalenceTable, SpeckerError> {
    if m == 0 {
        return Err(SpeckerError::ZeroModulus);
    }
    let spec = p.with_max_degree(d);
    let probe = sink_probe(p, d)?;
    let mut items = witnesses.structures().to_vec();
    if !items.contains(&probe) {
        items.push(probe.clone());
    }
    let probe_index = items.iter().position(|s| *s == probe).expect("present");
    let witnesses = WitnessSet::new(Arc::clone(p.vocab()), items)?;
    let matrix = du_submatrix(&spec, &witnesses, cfg.jobs)?;
    let mut groups = group_columns(&matrix);
    let sink_at = groups.iter().position(|g| g.contains(&probe_index)).expect("probe grouped");
    let sink = groups.remove(sink_at);
    groups.insert(0, sink);
    let items = witnesses.structures();
    let blocks = groups
        .into_iter()
        .map(|members| {
            let representative = *members.iter().min_by_key(|&&i| (items[i].n(), i)).expect("nonempty");
            Block {
                fingerprint: matrix.column(members[0]),
                members,
                representative,
            }
        })
        .collect();
    let mut table = EquivalenceTable {
        spec,
        d,
        m,
        witnesses,
        blocks,
        counts: BTreeMap::new(),
    };
    for n in range {
        table.count(n, cfg)?;
    }
    Ok(table)
}

/// Coefficients `a[r][D][E]` for residue class `r = n mod C`, over the
/// non-sink blocks (index 0 of each vector is the sink and stays 0).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModularRecurrence {
    m: u64,
    c: u64,
    coeffs: Vec<Vec<Vec<u64>>>,
}

impl ModularRecurrence {
    pub fn modulus(&self) -> u64 {
        self.m
    }

    pub fn stride(&self) -> u64 {
        self.c
    }

    pub fn coefficient(&self, residue_class: usize, target: usize, source: usize) -> Residue {
        Residue::new(self.coeffs[residue_class][target][source] as i128, self.m).expect("m >= 1")
    }

    pub fn block_count(&self) -> usize {
        self.coeffs.first().map_or(0, Vec::len)
    }
}

impl fmt::Display for ModularRecurrence {
    /// `a[r][D<i>][D<j>] = v` for the non-sink blocks.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (r, rows) in self.coeffs.iter().enumerate() {
            for (t, row) in rows.iter().enumerate().skip(1) {
                for (s, v) in row.iter().enumerate().skip(1) {
                    writeln!(f, "a[{r}][D{t}][D{s}] = {v}")?;
                }
            }
        }
        Ok(())
    }
}

pub fn extract_recurrence(
    table: &EquivalenceTable,
    params: &RecurrenceParams,
    cfg: EnumConfig,
) -> Result<ModularRecurrence, SpeckerError> {
    if table.m != params.m {
        return Err(SpeckerError::ModulusMismatch {
            table: table.m,
            params: params.m,
        });
    }
    let c = params.c as usize;
    let k = table.blocks.len();
    let mut coeffs = vec![vec![vec![0u64; k]; k]; c];
    let cfg = cfg.with_degree_bound(Some(table.d));
    for size in 1..=c {
        let r = size % c;
        let e = Enumeration::new(Arc::clone(table.spec.vocab()), size, cfg)?;
        let mut failure = None;
        e.for_each(|b| {
            for source in 1..k {
                let joined = match b.disjoint_union(table.representative(source)) {
                    Ok(j) => j,
                    Err(err) => {
                        failure.get_or_insert(err.into());
                        continue;
                    }
                };
                match table.classify(&joined) {
                    Ok(0) => {}
                    Ok(target) => {
                        let cell = &mut coeffs[r][target][source];
                        *cell = (*cell + 1) % params.m;
                    }
                    Err(err) => {
                        failure.get_or_insert(err);
                    }
                }
            }
        })?;
        if let Some(err) = failure {
            return Err(err);
        }
    }
    Ok(ModularRecurrence {
        m: params.m,
        c: params.c,
        coeffs,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Residual {
    pub block: usize,
    pub n: usize,
    pub lhs: u64,
    pub rhs: u64,
    pub residual: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecurrenceReport {
    pub rows: Vec<Residual>,
}

impl RecurrenceReport {
    pub fn verified(&self) -> bool {
        self.rows.iter().all(|r| r.residual == 0)
    }
}

impl fmt::Display for RecurrenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rows {
            writeln!(
                f,
                "D{} n={} lhs={} rhs={} residual={}",
                r.block, r.n, r.lhs, r.rhs, r.residual
            )?;
        }
        Ok(())
    }
}

/// Residuals `d_D(n) - sum_E a[n mod C][D][E] d_E(C t(n))` mod `m`.
pub fn verify_recurrence(
    rec: &ModularRecurrence,
    table: &EquivalenceTable,
    params: &RecurrenceParams,
    range: RangeInclusive<usize>,
) -> Result<RecurrenceReport, SpeckerError> {
    let m = params.m;
    let mut rows = Vec::new();
    for n in range.filter(|&n| n >= 1) {
        let base = params.base(n);
        let now = table.counts(n).ok_or(SpeckerError::MissingDensity(n))?;
        let then = table.counts(base).ok_or(SpeckerError::MissingDensity(base))?;
        let r = n % params.c as usize;
        for target in 1..table.blocks.len() {
            let rhs = (1..table.blocks.len()).fold(0u64, |acc, source| {
                (acc + rec.coeffs[r][target][source] * then[source]) % m
            });
            let lhs = now[target];
            rows.push(Residual {
                block: target,
                n,
                lhs,
                rhs,
                residual: (lhs + m - rhs) % m,
            });
        }
    }
    Ok(RecurrenceReport { rows })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VanishingReport {
    pub modulus: u64,
    pub rows: Vec<(usize, u64, DensitySource)>,
    /// First `n` from which every tested residue is 0.
    pub vanishes_from: Option<usize>,
}

impl fmt::Display for VanishingReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, r, source) in &self.rows {
            writeln!(f, "{n} {r} {source}")?;
        }
        match self.vanishes_from {
            Some(n0) => writeln!(f, "vanishes from n={n0} (mod {})", self.modulus),
            None => writeln!(f, "no vanishing observed (mod {})", self.modulus),
        }
    }
}

/// Scans `d_p(n) mod m` over `range` for a connected, degree-bounded `p`,
/// enumerating up to `enumerate_max` and using closed forms beyond.
pub fn check_ultimate_vanishing(
    p: &PropertySpec,
    m: u64,
    range: RangeInclusive<usize>,
    enumerate_max: usize,
    cfg: EnumConfig,
) -> Result<VanishingReport, SpeckerError> {
    if m == 0 {
        return Err(SpeckerError::ZeroModulus);
    }
    if !p.certifies_connected() || p.implied_degree_bound().is_none() {
        return Err(SpeckerError::NotCertified(p.to_string()));
    }
    let table = density_table(p, range, Some(m), enumerate_max, cfg)?;
    let rows: Vec<(usize, u64, DensitySource)> = table
        .rows
        .iter()
        .map(|r| (r.n, table.residue(r.n, m).expect("row present").value(), r.source))
        .collect();
    let mut vanishes_from = None;
    for (n, r, _) in rows.iter().rev() {
        if *r != 0 {
            break;
        }
        vanishes_from = Some(*n);
    }
    Ok(VanishingReport {
        modulus: m,
        rows,
        vanishes_from,
    })
}

/// Whether an orbit size divides `|A'|!`, as Lagrange requires.
pub fn divides_group_order(orbit: u64, subset_len: usize) -> bool {
    let order = factorial(subset_len as u64).to_u64().expect("small");
    orbit != 0 && order.is_multiple_of(orbit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::parse_graph;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn g(s: &str) -> RelStructure {
        parse_graph(s).unwrap()
    }

    fn spec(s: &str) -> PropertySpec {
        PropertySpec::parse(s).unwrap()
    }

    fn witnesses(lits: &[&str]) -> WitnessSet {
        let items = lits.iter().map(|l| g(l)).collect();
        WitnessSet::new(Arc::new(crate::structures::Vocabulary::graph()), items).unwrap()
    }

    #[test]
    fn orbit_examples() {
        let edge14 = g("4:1-4");
        assert_eq!(orbit_size(&edge14, &[1, 2, 3]).unwrap(), 3);
        assert_eq!(orbit_size(&g("C5"), &[]).unwrap(), 1);
        assert_eq!(orbit_size(&g("5"), &[1, 2, 3, 4, 5]).unwrap(), 1);
        assert_eq!(orbit_size(&g("C4"), &[1, 2, 3, 4]).unwrap(), 3);
        assert!(matches!(
            orbit_size(&g("9"), &[1, 2, 3, 4, 5, 6, 7, 8, 9]),
            Err(SpeckerError::OrbitBudget { size: 9, .. })
        ));
        assert!(orbit_size(&g("3"), &[1, 1]).is_err());
    }

    #[test]
    fn dvlm_examples() {
        let c = check_dvlm(&g("4:1-4"), &[1, 2, 3], 4).unwrap();
        assert_eq!((c.neighbors, c.binomial.clone(), c.divides), (1, BigUint::from(3u32), true));
        let c = check_dvlm(&g("4:1-4,2-4"), &[1, 2, 3], 4).unwrap();
        assert_eq!((c.neighbors, c.orbit, c.divides), (2, 3, true));
        assert_eq!(check_dvlm(&g("4:1-2"), &[1, 2, 3], 4), Err(SpeckerError::NoNeighbors(4)));
        assert_eq!(check_dvlm(&g("4:1-2"), &[1, 2, 3], 2), Err(SpeckerError::VertexInSubset(2)));
    }

    #[test]
    fn dvlm_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..150 {
            let (s, subset, v) = random_dvlm_instance(&mut rng, 7);
            let c = check_dvlm(&s, &subset, v).unwrap();
            assert!(c.divides, "{s} {subset:?} {v}");
            assert_eq!(c.orbit, orbit_size_by_stabilizer(&s, &subset).unwrap());
            assert!(divides_group_order(c.orbit, subset.len()));
        }
    }

    #[test]
    fn orbits_partition_invariant_families() {
        let all = Enumeration::new(Arc::new(crate::structures::Vocabulary::graph()), 4, EnumConfig::default())
            .unwrap()
            .collect()
            .unwrap();
        for subset in [vec![1, 2], vec![1, 2, 3], vec![2, 3, 4], vec![1, 2, 3, 4]] {
            let mut seen = HashSet::new();
            let mut total = 0;
            for s in &all {
                if seen.contains(s) {
                    continue;
                }
                total += orbit_size(s, &subset).unwrap();
                seen.extend(images(s, &subset));
            }
            assert_eq!(total, 64);
        }
    }

    #[test]
    fn params_divisibility_grid() {
        for m in 1..=4 {
            for d in 0..=3 {
                let p = RecurrenceParams::new(m, d, 5).unwrap();
                assert_eq!(p.stride(), m * (1..=d as u64).product::<u64>());
            }
        }
        let p = RecurrenceParams::new(2, 1, 5).unwrap();
        assert_eq!((p.t(1), p.t(2), p.t(3), p.base(5)), (0, 0, 1, 4));
        assert_eq!(RecurrenceParams::new(0, 1, 1), Err(SpeckerError::ZeroModulus));
    }

    #[test]
    fn table_for_all_graphs() {
        let t = equiv_table(&spec("all"), 1, 2, &witnesses(&["empty", "1", "K2", "P3"]), 0..=7, EnumConfig::default())
            .unwrap();
        assert_eq!(t.blocks().len(), 2);
        let members: Vec<String> = t.blocks()[1].members.iter().map(|&i| t.witnesses().labels()[i].clone()).collect();
        assert_eq!(members, vec!["empty", "1", "2:1-2"]);
        let tel = [1u64, 1, 2, 4, 10, 26, 76, 232];
        for (n, v) in tel.iter().enumerate() {
            assert_eq!(t.counts(n).unwrap()[1], v % 2, "n={n}");
        }
        #[allow(clippy::reversed_empty_ranges)]
        let empty = equiv_table(&spec("all"), 1, 2, &witnesses(&["empty"]), 1..=0, EnumConfig::default()).unwrap();
        assert!(empty.count_rows().is_empty());
    }

    #[test]
    fn table_for_connected() {
        let t = equiv_table(
            &spec("connected"),
            2,
            2,
            &witnesses(&["empty", "1", "C3", "P3", "C4"]),
            0..=4,
            EnumConfig::default(),
        )
        .unwrap();
        assert!(t.blocks().len() >= 2);
        assert_eq!(t.classify(&g("1+1")).unwrap(), 0);
        assert_eq!(t.classify(&g("K4")).unwrap(), 0);
    }

    #[test]
    fn recurrence_for_matchings() {
        let params = RecurrenceParams::new(2, 1, 5).unwrap();
        let t = equiv_table(&spec("max-degree:1"), 1, 2, &witnesses(&["empty", "1", "K2"]), 0..=10, EnumConfig::default())
            .unwrap();
        assert_eq!(t.blocks().len(), 2);
        let rec = extract_recurrence(&t, &params, EnumConfig::default()).unwrap();
        assert_eq!(rec.coefficient(0, 1, 1).value(), 0);
        assert_eq!(rec.coefficient(1, 1, 1).value(), 1);
        let report = verify_recurrence(&rec, &t, &params, 3..=10).unwrap();
        assert_eq!(report.rows.len(), 8);
        assert!(report.verified(), "{report}");
        let first = verify_recurrence(&rec, &t, &params, 1..=2).unwrap();
        assert!(first.verified());
        assert_eq!(
            verify_recurrence(&rec, &t, &params, 11..=11),
            Err(SpeckerError::MissingDensity(11))
        );
    }

    #[test]
    fn trivial_modulus_gives_zero_coefficients() {
        let params = RecurrenceParams::new(1, 1, 3).unwrap();
        let t = equiv_table(&spec("max-degree:1"), 1, 1, &witnesses(&["empty", "K2"]), 0..=3, EnumConfig::default())
            .unwrap();
        let rec = extract_recurrence(&t, &params, EnumConfig::default()).unwrap();
        assert!(rec.to_string().lines().all(|l| l.ends_with("= 0")));
        assert!(verify_recurrence(&rec, &t, &params, 1..=3).unwrap().verified());
    }

    #[test]
    fn recurrence_for_cycles_and_connected() {
        for (p, d, m, lits) in [
            ("cycles", 2, 2, vec!["empty", "1", "K2", "P3", "C3", "C4", "2"]),
            ("connected", 2, 2, vec!["empty", "1", "C3", "P3", "C4"]),
            ("max-degree:1", 1, 3, vec!["empty", "K2"]),
        ] {
            let params = RecurrenceParams::new(m, d, 5).unwrap();
            let t = equiv_table(&spec(p), d, m, &witnesses(&lits), 0..=8, EnumConfig::default()).unwrap();
            let rec = extract_recurrence(&t, &params, EnumConfig::default()).unwrap();
            let report = verify_recurrence(&rec, &t, &params, 1..=8).unwrap();
            assert!(report.verified(), "{p}\n{report}");
        }
    }

    #[test]
    fn vanishing_examples() {
        let cyc = spec("cycles");
        let r2 = check_ultimate_vanishing(&cyc, 2, 1..=15, 7, EnumConfig::default()).unwrap();
        assert_eq!(r2.vanishes_from, Some(5));
        let r3 = check_ultimate_vanishing(&cyc, 3, 1..=15, 7, EnumConfig::default()).unwrap();
        assert_eq!(r3.vanishes_from, Some(4));
        let r1 = check_ultimate_vanishing(&cyc, 1, 1..=10, 7, EnumConfig::default()).unwrap();
        assert_eq!(r1.vanishes_from, Some(1));
        assert!(matches!(
            check_ultimate_vanishing(&spec("max-degree:2"), 2, 1..=5, 5, EnumConfig::default()),
            Err(SpeckerError::NotCertified(_))
        ));
    }
}
