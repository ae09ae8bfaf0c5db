//! Labeled structure enumeration.
//!
//! Every potential tuple (a "slot") is decided in a fixed order: relations
//! in vocabulary order, tuples lexicographically, symmetric pairs once as
//! `a <= b`. Shard `s` of `2^b` fixes slot `i < b` to bit `i` of `s`.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use num_bigint::BigUint;
use rayon::prelude::*;

use super::{RelStructure, StructureError, Vocabulary, MAX_UNIVERSE};

/// Default cap on the number of structures one enumeration may produce.
pub const DEFAULT_BUDGET: u64 = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumConfig {
    pub budget: u64,
    pub degree_bound: Option<usize>,
    pub jobs: usize,
}

impl Default for EnumConfig {
    fn default() -> Self {
        Self {
            budget: DEFAULT_BUDGET,
            degree_bound: None,
            jobs: 1,
        }
    }
}

impl EnumConfig {
    pub fn with_degree_bound(mut self, d: Option<usize>) -> Self {
        self.degree_bound = match (self.degree_bound, d) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        self
    }
}

#[derive(Debug, Clone)]
struct Slot {
    sym: usize,
    tuple: Vec<usize>,
    /// Distinct unordered Gaifman pairs the tuple creates, 0-based.
    pairs: Vec<(usize, usize)>,
}

#[derive(Debug, Clone)]
pub struct Enumeration {
    vocab: Arc<Vocabulary>,
    n: usize,
    slots: Vec<Slot>,
    cfg: EnumConfig,
}

struct Walk<'a, F> {
    slots: &'a [Slot],
    bound: Option<usize>,
    s: RelStructure,
    mult: Vec<u32>,
    deg: Vec<usize>,
    n: usize,
    emitted: &'a AtomicU64,
    budget: u64,
    visit: F,
}

impl<F: FnMut(&RelStructure)> Walk<'_, F> {
    /// Adds the slot's pairs; false (with nothing changed) if a degree
    /// would exceed the bound.
    fn include(&mut self, i: usize) -> bool {
        let slot = &self.slots[i];
        if let Some(d) = self.bound {
            let mut extra = vec![0usize; 0];
            for &(a, b) in &slot.pairs {
                if self.mult[a * self.n + b] == 0 {
                    extra.push(a);
                    extra.push(b);
                }
            }
            for &v in &extra {
                let bump = extra.iter().filter(|&&u| u == v).count();
                if self.deg[v] + bump > d {
                    return false;
                }
            }
        }
        for &(a, b) in &slot.pairs {
            let k = a * self.n + b;
            if self.mult[k] == 0 {
                self.deg[a] += 1;
                self.deg[b] += 1;
            }
            self.mult[k] += 1;
        }
        let (sym, tuple) = (slot.sym, slot.tuple.clone());
        self.s.insert(sym, &tuple).expect("slots are valid tuples");
        true
    }

    fn exclude(&mut self, i: usize) {
        let slot = &self.slots[i];
        for &(a, b) in &slot.pairs {
            let k = a * self.n + b;
            self.mult[k] -= 1;
            if self.mult[k] == 0 {
                self.deg[a] -= 1;
                self.deg[b] -= 1;
            }
        }
        self.s.remove(slot.sym, &slot.tuple);
    }

    fn run(&mut self, i: usize) -> Result<(), StructureError> {
        if i == self.slots.len() {
            let total = self.emitted.fetch_add(1, Ordering::Relaxed) + 1;
            if total > self.budget {
                return Err(StructureError::BudgetExceeded {
                    estimate: format!("more than {}", self.budget),
                    budget: self.budget,
                });
            }
            (self.visit)(&self.s);
            return Ok(());
        }
        self.run(i + 1)?;
        if self.include(i) {
            self.run(i + 1)?;
            self.exclude(i);
        }
        Ok(())
    }
}

impl Enumeration {
    pub fn new(vocab: Arc<Vocabulary>, n: usize, cfg: EnumConfig) -> Result<Self, StructureError> {
        if n > MAX_UNIVERSE {
            return Err(StructureError::TooLarge(n));
        }
        let mut slots = Vec::new();
        for (sym, s) in vocab.symbols().iter().enumerate() {
            let total = n.pow(s.arity as u32);
            for mut index in 0..total {
                let mut tuple = vec![0; s.arity];
                for x in tuple.iter_mut().rev() {
                    *x = index % n + 1;
                    index /= n;
                }
                if s.symmetric && tuple[0] > tuple[1] {
                    continue;
                }
                if s.irreflexive && tuple[0] == tuple[1] {
                    continue;
                }
                let mut pairs = Vec::new();
                for (i, &a) in tuple.iter().enumerate() {
                    for &b in &tuple[i + 1..] {
                        if a != b {
                            let p = (a.min(b) - 1, a.max(b) - 1);
                            if !pairs.contains(&p) {
                                pairs.push(p);
                            }
                        }
                    }
                }
                slots.push(Slot { sym, tuple, pairs });
            }
        }
        let out = Self {
            vocab,
            n,
            slots,
            cfg,
        };
        if cfg.degree_bound.is_none() && out.estimate() > BigUint::from(cfg.budget) {
            return Err(StructureError::BudgetExceeded {
                estimate: out.estimate().to_string(),
                budget: cfg.budget,
            });
        }
        Ok(out)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn slot_count(&self) -> usize {
        self.slots.len()
    }

    /// Size of the unpruned stream, `2^slots`.
    pub fn estimate(&self) -> BigUint {
        BigUint::from(1u8) << self.slots.len()
    }

    fn walk_shard(
        &self,
        bits: usize,
        shard: u64,
        emitted: &AtomicU64,
        visit: impl FnMut(&RelStructure),
    ) -> Result<(), StructureError> {
        let mut w = Walk {
            slots: &self.slots,
            bound: self.cfg.degree_bound,
            s: RelStructure::empty(Arc::clone(&self.vocab), self.n)?,
            mult: vec![0; self.n * self.n],
            deg: vec![0; self.n],
            n: self.n,
            emitted,
            budget: self.cfg.budget,
            visit,
        };
        for i in 0..bits {
            if shard >> i & 1 == 1 && !w.include(i) {
                return Ok(());
            }
        }
        w.run(bits)
    }

    /// Visits every structure once, in canonical order.
    pub fn for_each(&self, visit: impl FnMut(&RelStructure)) -> Result<u64, StructureError> {
        let emitted = AtomicU64::new(0);
        self.walk_shard(0, 0, &emitted, visit)?;
        Ok(emitted.into_inner())
    }

    pub fn collect(&self) -> Result<Vec<RelStructure>, StructureError> {
        let mut out = Vec::new();
        self.for_each(|s| out.push(s.clone()))?;
        Ok(out)
    }

    fn shard_bits(&self) -> usize {
        if self.cfg.jobs <= 1 {
            return 0;
        }
        let want = (usize::BITS - (self.cfg.jobs - 1).leading_zeros()) as usize + 3;
        want.min(self.slots.len())
    }

    /// Folds every structure into per-shard accumulators and merges them in
    /// shard order, so the result does not depend on `jobs`.
    pub fn fold<A, F, M>(&self, init: impl Fn() -> A + Sync, step: F, merge: M) -> Result<A, StructureError>
    where
        A: Send,
        F: Fn(&mut A, &RelStructure) + Sync,
        M: Fn(A, A) -> A,
    {
        let bits = self.shard_bits();
        let emitted = AtomicU64::new(0);
        let run = |shard: u64| -> Result<A, StructureError> {
            let mut acc = init();
            self.walk_shard(bits, shard, &emitted, |s| step(&mut acc, s))?;
            Ok(acc)
        };
        let parts: Vec<Result<A, StructureError>> = if bits == 0 {
            vec![run(0)]
        } else {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(self.cfg.jobs)
                .build()
                .expect("thread pool");
            pool.install(|| (0..1u64 << bits).into_par_iter().map(run).collect())
        };
        let mut acc = init();
        for p in parts {
            acc = merge(acc, p?);
        }
        Ok(acc)
    }

    pub fn count_where(&self, pred: impl Fn(&RelStructure) -> bool + Sync) -> Result<u64, StructureError> {
        self.fold(|| 0u64, |c, s| *c += pred(s) as u64, |a, b| a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn graphs(n: usize, cfg: EnumConfig) -> Enumeration {
        Enumeration::new(Arc::new(Vocabulary::graph()), n, cfg).unwrap()
    }

    #[test]
    fn counts() {
        assert_eq!(graphs(3, EnumConfig::default()).for_each(|_| {}).unwrap(), 8);
        let t = Enumeration::new(Arc::new(Vocabulary::ternary()), 1, EnumConfig::default()).unwrap();
        assert_eq!(t.for_each(|_| {}).unwrap(), 2);
        let pruned = EnumConfig::default().with_degree_bound(Some(1));
        assert_eq!(graphs(4, pruned).for_each(|_| {}).unwrap(), 10);
        assert_eq!(graphs(0, EnumConfig::default()).for_each(|_| {}).unwrap(), 1);
        let d = Enumeration::new(Arc::new(Vocabulary::digraph()), 2, EnumConfig::default()).unwrap();
        assert_eq!(d.slot_count(), 4);
    }

    #[test]
    fn pruning_matches_filter() {
        for n in 0..=6 {
            for d in 0..=3 {
                let all = graphs(n, EnumConfig::default());
                let filtered = all.count_where(|s| s.gaifman().max_degree() <= d).unwrap();
                let pruned = graphs(n, EnumConfig::default().with_degree_bound(Some(d)));
                assert_eq!(pruned.for_each(|_| {}).unwrap(), filtered, "n={n} d={d}");
            }
        }
        let t = Enumeration::new(
            Arc::new(Vocabulary::ternary()),
            2,
            EnumConfig::default().with_degree_bound(Some(0)),
        )
        .unwrap();
        // Only constant tuples avoid creating an edge.
        assert_eq!(t.for_each(|_| {}).unwrap(), 4);
    }

    #[test]
    fn each_structure_once() {
        let mut seen = HashSet::new();
        let e = graphs(5, EnumConfig::default());
        e.for_each(|s| assert!(seen.insert(s.clone()))).unwrap();
        assert_eq!(seen.len(), 1024);
    }

    #[test]
    fn sharding_is_transparent() {
        for jobs in [1, 2, 3, 8] {
            let cfg = EnumConfig {
                jobs,
                ..EnumConfig::default()
            };
            assert_eq!(graphs(6, cfg).count_where(|s| s.is_connected()).unwrap(), 26704);
            let pruned = cfg.with_degree_bound(Some(2));
            assert_eq!(graphs(5, pruned).count_where(|_| true).unwrap(), graphs(5, EnumConfig::default()).count_where(|s| s.gaifman().max_degree() <= 2).unwrap());
        }
    }

    #[test]
    fn budget() {
        let err = Enumeration::new(Arc::new(Vocabulary::graph()), 12, EnumConfig::default())
            .err()
            .unwrap();
        assert_eq!(
            err,
            StructureError::BudgetExceeded {
                estimate: (BigUint::from(1u8) << 66usize).to_string(),
                budget: DEFAULT_BUDGET
            }
        );
        let tight = EnumConfig {
            budget: 5,
            degree_bound: Some(1),
            jobs: 1,
        };
        assert!(matches!(graphs(4, tight).for_each(|_| {}), Err(StructureError::BudgetExceeded { .. })));
    }
}
