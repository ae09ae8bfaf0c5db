//! Finite labeled relational structures on `[n] = {1, ..., n}`.
//!
//! Relations are stored as bitsets over the `n^arity` tuple positions in
//! lexicographic order. Symmetric binary relations always hold both
//! orientations of a pair; irreflexive ones never hold `(a, a)`.

mod density;
mod enumerate;
mod gaifman;
mod literal;
mod property;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub use density::{
    closed_form_density, density, density_mod, density_table, DensityRow, DensitySource,
    DensityTable, DensityValue,
};
pub use enumerate::{EnumConfig, Enumeration, DEFAULT_BUDGET};
pub use gaifman::GaifmanGraph;
pub use literal::{parse_graph, parse_structure};
pub use property::{LengthSet, Property, PropertySpec};

/// Universes are capped so Gaifman adjacency fits a machine word.
pub const MAX_UNIVERSE: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("vocabulary mismatch: expected {expected}, got {found}")]
    VocabularyMismatch { expected: String, found: String },
    #[error("invalid vocabulary: {0}")]
    BadVocabulary(String),
    #[error("element {element} outside universe [1, {n}]")]
    OutOfUniverse { element: usize, n: usize },
    #[error("tuple has {found} entries, symbol {symbol} has arity {arity}")]
    Arity {
        symbol: String,
        arity: usize,
        found: usize,
    },
    #[error("loop ({0},{0}) in irreflexive relation {1}")]
    Loop(usize, String),
    #[error("universe of size {0} exceeds the supported maximum {MAX_UNIVERSE}")]
    TooLarge(usize),
    #[error("enumeration of about {estimate} structures exceeds the budget of {budget}")]
    BudgetExceeded { estimate: String, budget: u64 },
    #[error("cannot parse structure literal {literal:?}: {reason}")]
    Literal { literal: String, reason: String },
    #[error("cannot parse property {spec:?}: {reason}")]
    Property { spec: String, reason: String },
    #[error("no closed form known for {0}; enumeration limit exceeded")]
    NoClosedForm(String),
    #[error(transparent)]
    Arith(#[from] crate::modarith::ArithError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Symbol {
    pub name: String,
    pub arity: usize,
    pub symmetric: bool,
    pub irreflexive: bool,
}

impl Symbol {
    pub fn new(name: impl Into<String>, arity: usize) -> Self {
        Self {
            name: name.into(),
            arity,
            symmetric: false,
            irreflexive: false,
        }
    }

    pub fn symmetric(mut self) -> Self {
        self.symmetric = true;
        self
    }

    pub fn irreflexive(mut self) -> Self {
        self.irreflexive = true;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Vocabulary {
    symbols: Vec<Symbol>,
}

impl Vocabulary {
    pub fn new(symbols: Vec<Symbol>) -> Result<Self, StructureError> {
        for (i, s) in symbols.iter().enumerate() {
            if s.arity == 0 {
                return Err(StructureError::BadVocabulary(format!("{} has arity 0", s.name)));
            }
            if (s.symmetric || s.irreflexive) && s.arity != 2 {
                return Err(StructureError::BadVocabulary(format!(
                    "flags on non-binary symbol {}",
                    s.name
                )));
            }
            if symbols[..i].iter().any(|t| t.name == s.name) {
                return Err(StructureError::BadVocabulary(format!("duplicate symbol {}", s.name)));
            }
        }
        Ok(Self { symbols })
    }

    /// Simple graphs: one symmetric irreflexive binary symbol.
    pub fn graph() -> Self {
        Self {
            symbols: vec![Symbol::new("E", 2).symmetric().irreflexive()],
        }
    }

    /// Directed graphs with loops allowed.
    pub fn digraph() -> Self {
        Self {
            symbols: vec![Symbol::new("R", 2)],
        }
    }

    pub fn ternary() -> Self {
        Self {
            symbols: vec![Symbol::new("B", 3)],
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "graph" => Some(Self::graph()),
            "digraph" => Some(Self::digraph()),
            "ternary" => Some(Self::ternary()),
            _ => None,
        }
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn max_arity(&self) -> usize {
        self.symbols.iter().map(|s| s.arity).max().unwrap_or(0)
    }

    pub fn is_graph(&self) -> bool {
        *self == Self::graph()
    }

    pub fn name(&self) -> String {
        if self.is_graph() {
            return "graph".into();
        }
        if *self == Self::digraph() {
            return "digraph".into();
        }
        if *self == Self::ternary() {
            return "ternary".into();
        }
        let parts: Vec<String> = self
            .symbols
            .iter()
            .map(|s| format!("{}/{}", s.name, s.arity))
            .collect();
        parts.join(",")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Bits {
    words: Vec<u64>,
}

impl Bits {
    fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
        }
    }

    #[inline]
    fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    fn clear(&mut self, i: usize) {
        self.words[i / 64] &= !(1 << (i % 64));
    }

    fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &word)| {
            let mut rest = word;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let b = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(w * 64 + b)
            })
        })
    }

    fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }
}

/// A structure `([n], R_1, ..., R_s)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RelStructure {
    vocab: Arc<Vocabulary>,
    n: usize,
    rels: Vec<Bits>,
}

impl RelStructure {
    pub fn empty(vocab: Arc<Vocabulary>, n: usize) -> Result<Self, StructureError> {
        if n > MAX_UNIVERSE {
            return Err(StructureError::TooLarge(n));
        }
        let rels = vocab
            .symbols
            .iter()
            .map(|s| Bits::zeros(n.pow(s.arity as u32)))
            .collect();
        Ok(Self { vocab, n, rels })
    }

    /// A simple graph from an edge list.
    pub fn graph(n: usize, edges: &[(usize, usize)]) -> Result<Self, StructureError> {
        let mut g = Self::empty(Arc::new(Vocabulary::graph()), n)?;
        for &(a, b) in edges {
            g.insert(0, &[a, b])?;
        }
        Ok(g)
    }

    pub fn cycle(n: usize) -> Self {
        let edges: Vec<(usize, usize)> = (1..=n).map(|i| (i, i % n + 1)).collect();
        Self::graph(n, &edges).expect("valid cycle")
    }

    pub fn complete(n: usize) -> Self {
        let edges: Vec<(usize, usize)> = (1..=n)
            .flat_map(|a| (a + 1..=n).map(move |b| (a, b)))
            .collect();
        Self::graph(n, &edges).expect("valid clique")
    }

    /// Path on `n` vertices.
    pub fn path(n: usize) -> Self {
        let edges: Vec<(usize, usize)> = (1..n).map(|i| (i, i + 1)).collect();
        Self::graph(n, &edges).expect("valid path")
    }

    /// Star `K_{1,leaves}` with centre 1.
    pub fn star(leaves: usize) -> Self {
        let edges: Vec<(usize, usize)> = (2..=leaves + 1).map(|i| (1, i)).collect();
        Self::graph(leaves + 1, &edges).expect("valid star")
    }

    pub fn edgeless(n: usize) -> Self {
        Self::graph(n, &[]).expect("valid edgeless graph")
    }

    pub fn vocab(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_empty_relationally(&self) -> bool {
        self.rels.iter().all(Bits::is_empty)
    }

    fn index(&self, tuple: &[usize]) -> usize {
        tuple.iter().fold(0, |acc, &x| acc * self.n + (x - 1))
    }

    fn decode(&self, mut index: usize, arity: usize) -> Vec<usize> {
        let mut out = vec![0; arity];
        for slot in out.iter_mut().rev() {
            *slot = index % self.n + 1;
            index /= self.n;
        }
        out
    }

    fn check_tuple(&self, sym: usize, tuple: &[usize]) -> Result<(), StructureError> {
        let s = &self.vocab.symbols[sym];
        if tuple.len() != s.arity {
            return Err(StructureError::Arity {
                symbol: s.name.clone(),
                arity: s.arity,
                found: tuple.len(),
            });
        }
        if let Some(&bad) = tuple.iter().find(|&&x| x == 0 || x > self.n) {
            return Err(StructureError::OutOfUniverse {
                element: bad,
                n: self.n,
            });
        }
        Ok(())
    }

    pub fn contains(&self, sym: usize, tuple: &[usize]) -> bool {
        self.check_tuple(sym, tuple).is_ok() && self.rels[sym].get(self.index(tuple))
    }

    /// Adds a tuple, closing symmetric relations under reversal.
    pub fn insert(&mut self, sym: usize, tuple: &[usize]) -> Result<(), StructureError> {
        self.check_tuple(sym, tuple)?;
        let s = &self.vocab.symbols[sym];
        if s.irreflexive && tuple[0] == tuple[1] {
            return Err(StructureError::Loop(tuple[0], s.name.clone()));
        }
        let i = self.index(tuple);
        self.rels[sym].set(i);
        if s.symmetric {
            let j = self.index(&[tuple[1], tuple[0]]);
            self.rels[sym].set(j);
        }
        Ok(())
    }

    pub(crate) fn remove(&mut self, sym: usize, tuple: &[usize]) {
        let i = self.index(tuple);
        self.rels[sym].clear(i);
        if self.vocab.symbols[sym].symmetric {
            let j = self.index(&[tuple[1], tuple[0]]);
            self.rels[sym].clear(j);
        }
    }

    /// All tuples of one relation in lexicographic order.
    pub fn tuples(&self, sym: usize) -> impl Iterator<Item = Vec<usize>> + '_ {
        let arity = self.vocab.symbols[sym].arity;
        self.rels[sym].ones().map(move |i| self.decode(i, arity))
    }

    /// Undirected edges `a < b` of a binary relation.
    pub fn edges(&self, sym: usize) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = self
            .tuples(sym)
            .filter(|t| t.len() == 2 && t[0] != t[1])
            .map(|t| (t[0].min(t[1]), t[0].max(t[1])))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Relabels element `x` as `perm[x - 1]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.n, "permutation must cover the universe");
        let mut out = Self::empty(Arc::clone(&self.vocab), self.n).expect("same size");
        for sym in 0..self.rels.len() {
            for t in self.tuples(sym) {
                let image: Vec<usize> = t.iter().map(|&x| perm[x - 1]).collect();
                let i = out.index(&image);
                out.rels[sym].set(i);
            }
        }
        out
    }

    /// The disjoint union, with `other`'s elements shifted past `self`'s.
    pub fn disjoint_union(&self, other: &Self) -> Result<Self, StructureError> {
        if self.vocab != other.vocab {
            return Err(StructureError::VocabularyMismatch {
                expected: self.vocab.name(),
                found: other.vocab.name(),
            });
        }
        let n = self.n + other.n;
        let mut out = Self::empty(Arc::clone(&self.vocab), n)?;
        for sym in 0..self.rels.len() {
            for t in self.tuples(sym) {
                let i = out.index(&t);
                out.rels[sym].set(i);
            }
            for t in other.tuples(sym) {
                let shifted: Vec<usize> = t.iter().map(|&x| x + self.n).collect();
                let i = out.index(&shifted);
                out.rels[sym].set(i);
            }
        }
        Ok(out)
    }

    pub fn gaifman(&self) -> GaifmanGraph {
        GaifmanGraph::of(self)
    }

    pub fn is_connected(&self) -> bool {
        self.gaifman().is_connected()
    }

    pub(crate) fn same_vocab(&self, vocab: &Vocabulary) -> Result<(), StructureError> {
        if *self.vocab == *vocab {
            Ok(())
        } else {
            Err(StructureError::VocabularyMismatch {
                expected: vocab.name(),
                found: self.vocab.name(),
            })
        }
    }
}

impl fmt::Display for RelStructure {
    /// Literal form accepted by [`parse_structure`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.n == 0 {
            return f.write_str("empty");
        }
        let mut parts: Vec<String> = Vec::new();
        let named = self.vocab.symbols.len() > 1;
        for (sym, s) in self.vocab.symbols.iter().enumerate() {
            if s.arity == 2 && s.symmetric && !named {
                let mut pairs: Vec<(usize, usize)> = self
                    .tuples(sym)
                    .filter(|t| t[0] <= t[1])
                    .map(|t| (t[0], t[1]))
                    .collect();
                pairs.sort_unstable();
                parts.extend(pairs.iter().map(|(a, b)| format!("{a}-{b}")));
            } else {
                for t in self.tuples(sym) {
                    if s.symmetric && t[0] > t[1] {
                        continue;
                    }
                    let body: Vec<String> = t.iter().map(usize::to_string).collect();
                    let prefix = if named { s.name.as_str() } else { "" };
                    parts.push(format!("{prefix}({})", body.join(",")));
                }
            }
        }
        if parts.is_empty() {
            write!(f, "{}", self.n)
        } else {
            write!(f, "{}:{}", self.n, parts.join(","))
        }
    }
}
