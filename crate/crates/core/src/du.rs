//! Disjoint-union and substitution matrices over GF(2).
//!
//! The true matrices are infinite; everything here works on finite witness
//! sets, so a computed rank is a lower bound for the true rank.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::structures::{
    parse_structure, EnumConfig, Enumeration, PropertySpec, RelStructure, StructureError, Vocabulary,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DuError {
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error("line {line}: {message}")]
    WitnessFile { line: usize, message: String },
    #[error("witness {0} is listed twice")]
    DuplicateWitness(String),
    #[error("substitution needs arity at most 2, symbol {symbol} has arity {arity}")]
    ArityTooLarge { symbol: String, arity: usize },
    #[error("distinguished point {point} outside universe [1, {n}]")]
    PointOutOfRange { point: usize, n: usize },
    #[error("cannot parse pointed structure {0:?} (expected LITERAL@k or LITERAL@out)")]
    BadPointed(String),
    #[error("isomorphism reduction limited to universes of size {max}, got {n}")]
    TooLargeForCanonicalForm { n: usize, max: usize },
}

/// Dense 0/1 matrix with labeled rows and columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gf2Matrix {
    row_labels: Vec<String>,
    col_labels: Vec<String>,
    rows: Vec<Vec<u64>>,
}

impl Gf2Matrix {
    pub fn zeros(row_labels: Vec<String>, col_labels: Vec<String>) -> Self {
        let words = col_labels.len().div_ceil(64);
        let rows = vec![vec![0; words]; row_labels.len()];
        Self {
            row_labels,
            col_labels,
            rows,
        }
    }

    pub fn from_rows(bits: &[Vec<bool>]) -> Self {
        let cols = bits.first().map_or(0, Vec::len);
        assert!(bits.iter().all(|r| r.len() == cols), "rows must have equal length");
        let mut m = Self::zeros(
            (1..=bits.len()).map(|i| i.to_string()).collect(),
            (1..=cols).map(|j| j.to_string()).collect(),
        );
        for (i, row) in bits.iter().enumerate() {
            for (j, &b) in row.iter().enumerate() {
                m.set(i, j, b);
            }
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.col_labels.len()
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i][j / 64] >> (j % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        let bit = 1u64 << (j % 64);
        if value {
            self.rows[i][j / 64] |= bit;
        } else {
            self.rows[i][j / 64] &= !bit;
        }
    }

    pub fn row_bits(&self, i: usize) -> Vec<bool> {
        (0..self.ncols()).map(|j| self.get(i, j)).collect()
    }

    pub fn column(&self, j: usize) -> Vec<bool> {
        (0..self.nrows()).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.col_labels.clone(), self.row_labels.clone());
        for i in 0..self.nrows() {
            for j in 0..self.ncols() {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// Rank over GF(2) by XOR elimination.
    pub fn rank(&self) -> usize {
        let mut rows = self.rows.clone();
        let mut rank = 0;
        for col in 0..self.ncols() {
            let (w, bit) = (col / 64, 1u64 << (col % 64));
            let Some(p) = (rank..rows.len()).find(|&r| rows[r][w] & bit != 0) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && row[w] & bit != 0 {
                    for (x, y) in row.iter_mut().zip(&pivot) {
                        *x ^= y;
                    }
                }
            }
            rank += 1;
        }
        rank
    }
}

pub fn gf2_rank(m: &Gf2Matrix) -> usize {
    m.rank()
}

impl fmt::Display for Gf2Matrix {
    /// Column legend, then one aligned row per line.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (j, label) in self.col_labels.iter().enumerate() {
            writeln!(f, "col {}: {label}", j + 1)?;
        }
        let width = self.row_labels.iter().map(String::len).max().unwrap_or(0);
        for (i, label) in self.row_labels.iter().enumerate() {
            let cells: Vec<&str> = (0..self.ncols())
                .map(|j| if self.get(i, j) { "1" } else { "0" })
                .collect();
            writeln!(f, "{label:<width$} | {}", cells.join(" "))?;
        }
        Ok(())
    }
}

/// Distinct labeled structures over one vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessSet {
    vocab: Arc<Vocabulary>,
    items: Vec<RelStructure>,
}

impl WitnessSet {
    pub fn new(vocab: Arc<Vocabulary>, items: Vec<RelStructure>) -> Result<Self, DuError> {
        for (i, s) in items.iter().enumerate() {
            s.disjoint_union(&RelStructure::empty(Arc::clone(&vocab), 0)?)?;
            if items[..i].contains(s) {
                return Err(DuError::DuplicateWitness(s.to_string()));
            }
        }
        Ok(Self { vocab, items })
    }

    /// Parses literals from `text`, one per line, skipping blanks and `#`.
    pub fn parse(vocab: Arc<Vocabulary>, text: &str) -> Result<Self, DuError> {
        let mut items: Vec<RelStructure> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let s = parse_structure(&vocab, line).map_err(|e| DuError::WitnessFile {
                line: i + 1,
                message: e.to_string(),
            })?;
            if items.contains(&s) {
                return Err(DuError::WitnessFile {
                    line: i + 1,
                    message: format!("duplicate witness {s}"),
                });
            }
            items.push(s);
        }
        Ok(Self { vocab, items })
    }

    /// One structure per isomorphism class on `0..=max_n` elements, smallest
    /// universes first.
    pub fn generate(vocab: Arc<Vocabulary>, max_n: usize, cfg: EnumConfig) -> Result<Self, DuError> {
        const MAX: usize = 6;
        if max_n > MAX {
            return Err(DuError::TooLargeForCanonicalForm { n: max_n, max: MAX });
        }
        let mut items = Vec::new();
        for n in 0..=max_n {
            let perms = permutations(n);
            let mut seen: HashSet<Vec<Vec<usize>>> = HashSet::new();
            Enumeration::new(Arc::clone(&vocab), n, cfg)?.for_each(|s| {
                let key = perms.iter().map(|p| tuple_key(&s.permuted(p))).min().expect("n! >= 1");
                if seen.insert(key) {
                    items.push(s.clone());
                }
            })?;
        }
        Ok(Self { vocab, items })
    }

    pub fn vocab(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    pub fn structures(&self) -> &[RelStructure] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn labels(&self) -> Vec<String> {
        self.items.iter().map(RelStructure::to_string).collect()
    }
}

fn tuple_key(s: &RelStructure) -> Vec<Vec<usize>> {
    let mut key = Vec::new();
    for sym in 0..s.vocab().symbols().len() {
        for t in s.tuples(sym) {
            let mut row = vec![sym];
            row.extend(t);
            key.push(row);
        }
    }
    key
}

/// All permutations of `[1, n]` in lexicographic order.
pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut current: Vec<usize> = (1..=n).collect();
    let mut out = vec![current.clone()];
    loop {
        let Some(i) = (1..current.len()).rev().find(|&i| current[i - 1] < current[i]) else {
            return out;
        };
        let j = (i..current.len()).rev().find(|&j| current[j] > current[i - 1]).expect("pivot");
        current.swap(i - 1, j);
        current[i..].reverse();
        out.push(current.clone());
    }
}

fn fill(
    rows: Vec<String>,
    cols: Vec<String>,
    jobs: usize,
    cell: impl Fn(usize, usize) -> Result<bool, DuError> + Sync,
) -> Result<Gf2Matrix, DuError> {
    let (r, c) = (rows.len(), cols.len());
    let compute = |k: usize| cell(k / c.max(1), k % c.max(1));
    let bits: Vec<Result<bool, DuError>> = if jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().expect("thread pool");
        pool.install(|| (0..r * c).into_par_iter().map(compute).collect())
    } else {
        (0..r * c).map(compute).collect()
    };
    let mut m = Gf2Matrix::zeros(rows, cols);
    for (k, b) in bits.into_iter().enumerate() {
        m.set(k / c, k % c, b?);
    }
    Ok(m)
}

/// Entry `(i, j)` is `holds(p, w_i ⊔ w_j)`.
pub fn du_submatrix(p: &PropertySpec, w: &WitnessSet, jobs: usize) -> Result<Gf2Matrix, DuError> {
    let items = w.structures();
    fill(w.labels(), w.labels(), jobs, |i, j| {
        Ok(p.holds(&items[i].disjoint_union(&items[j])?)?)
    })
}

/// Witness indices grouped by identical DU columns, in order of first
/// appearance. Refining `w` can only split blocks.
pub fn du_equiv_classes(p: &PropertySpec, w: &WitnessSet, jobs: usize) -> Result<Vec<Vec<usize>>, DuError> {
    let m = du_submatrix(p, w, jobs)?;
    Ok(group_columns(&m))
}

pub(crate) fn group_columns(m: &Gf2Matrix) -> Vec<Vec<usize>> {
    let mut blocks: Vec<(Vec<bool>, Vec<usize>)> = Vec::new();
    for j in 0..m.ncols() {
        let col = m.column(j);
        match blocks.iter_mut().find(|(c, _)| *c == col) {
            Some((_, members)) => members.push(j),
            None => blocks.push((col, vec![j])),
        }
    }
    blocks.into_iter().map(|(_, members)| members).collect()
}

/// A structure with a distinguished element, or with the point outside.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointedStructure {
    structure: RelStructure,
    point: Option<usize>,
}

impl PointedStructure {
    pub fn new(structure: RelStructure, point: Option<usize>) -> Result<Self, DuError> {
        if let Some(p) = point {
            if p == 0 || p > structure.n() {
                return Err(DuError::PointOutOfRange {
                    point: p,
                    n: structure.n(),
                });
            }
        }
        Ok(Self { structure, point })
    }

    pub fn outside(structure: RelStructure) -> Self {
        Self { structure, point: None }
    }

    /// `LITERAL@k` or `LITERAL@out`.
    pub fn parse(vocab: &Arc<Vocabulary>, text: &str) -> Result<Self, DuError> {
        let (lit, point) = text
            .trim()
            .rsplit_once('@')
            .ok_or_else(|| DuError::BadPointed(text.to_string()))?;
        let s = parse_structure(vocab, lit)?;
        match point.trim() {
            "out" => Ok(Self::outside(s)),
            k => {
                let k = k.parse().map_err(|_| DuError::BadPointed(text.to_string()))?;
                Self::new(s, Some(k))
            }
        }
    }

    pub fn structure(&self) -> &RelStructure {
        &self.structure
    }

    pub fn point(&self) -> Option<usize> {
        self.point
    }
}

impl fmt::Display for PointedStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.point {
            Some(p) => write!(f, "{}@{p}", self.structure),
            None => write!(f, "{}@out", self.structure),
        }
    }
}

/// Replaces the distinguished point of `pa` by a copy of `b`, linking every
/// binary neighbour of the point to every element of `b`. Both orientations
/// of a binary symbol are replicated; unary facts and loops on the point
/// are dropped. With the point outside this is the disjoint union.
pub fn subst_compose(pa: &PointedStructure, b: &RelStructure) -> Result<RelStructure, DuError> {
    let a = &pa.structure;
    if let Some(s) = a.vocab().symbols().iter().find(|s| s.arity > 2) {
        return Err(DuError::ArityTooLarge {
            symbol: s.name.clone(),
            arity: s.arity,
        });
    }
    let Some(p) = pa.point else {
        return Ok(a.disjoint_union(b)?);
    };
    // Validates the shared vocabulary.
    a.disjoint_union(&RelStructure::empty(Arc::clone(b.vocab()), 0)?)?;
    let kept = a.n() - 1;
    let map = |x: usize| if x < p { x } else { x - 1 };
    let mut out = RelStructure::empty(Arc::clone(a.vocab()), kept + b.n())?;
    let block: Vec<usize> = (kept + 1..=kept + b.n()).collect();
    for sym in 0..a.vocab().symbols().len() {
        for t in a.tuples(sym) {
            match t.as_slice() {
                [x] if *x != p => out.insert(sym, &[map(*x)])?,
                [x, y] if *x != p && *y != p => out.insert(sym, &[map(*x), map(*y)])?,
                [x, y] if *x != p && *y == p => {
                    for &v in &block {
                        out.insert(sym, &[map(*x), v])?;
                    }
                }
                [x, y] if *x == p && *y != p => {
                    for &v in &block {
                        out.insert(sym, &[v, map(*y)])?;
                    }
                }
                _ => {}
            }
        }
        for t in b.tuples(sym) {
            let shifted: Vec<usize> = t.iter().map(|&x| x + kept).collect();
            out.insert(sym, &shifted)?;
        }
    }
    Ok(out)
}

/// Entry `(i, j)` is `holds(p, subst(rows_i, cols_j))`.
pub fn subst_submatrix(
    p: &PropertySpec,
    rows: &[PointedStructure],
    cols: &WitnessSet,
    jobs: usize,
) -> Result<Gf2Matrix, DuError> {
    let items = cols.structures();
    let labels: Vec<String> = rows.iter().map(PointedStructure::to_string).collect();
    fill(labels, cols.labels(), jobs, |i, j| {
        Ok(p.holds(&subst_compose(&rows[i], &items[j])?)?)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::parse_graph;
    use proptest::prelude::*;

    fn spec(s: &str) -> PropertySpec {
        PropertySpec::parse(s).unwrap()
    }

    fn ws(lits: &[&str]) -> WitnessSet {
        let items = lits.iter().map(|l| parse_graph(l).unwrap()).collect();
        WitnessSet::new(Arc::new(Vocabulary::graph()), items).unwrap()
    }

    fn bits(m: &Gf2Matrix) -> Vec<Vec<u8>> {
        (0..m.nrows())
            .map(|i| m.row_bits(i).into_iter().map(u8::from).collect())
            .collect()
    }

    #[test]
    fn du_examples() {
        let m = du_submatrix(&spec("cycles"), &ws(&["empty", "C3"]), 1).unwrap();
        assert_eq!(bits(&m), vec![vec![0, 1], vec![1, 0]]);
        let m = du_submatrix(&spec("cycles-exactly:2"), &ws(&["empty", "C3", "C3+C3"]), 1).unwrap();
        assert_eq!(bits(&m), vec![vec![0, 0, 1], vec![0, 1, 0], vec![1, 0, 0]]);
        assert_eq!(m.rank(), 3);
        let m = du_submatrix(&spec("connected"), &ws(&["empty", "C3", "C4"]), 2).unwrap();
        assert_eq!(bits(&m), vec![vec![0, 1, 1], vec![1, 0, 0], vec![1, 0, 0]]);
        assert_eq!(m.rank(), 2);
    }

    #[test]
    fn rank_examples() {
        let id = Gf2Matrix::from_rows(&(0..3).map(|i| (0..3).map(|j| i == j).collect()).collect::<Vec<_>>());
        assert_eq!(id.rank(), 3);
        assert_eq!(Gf2Matrix::from_rows(&vec![vec![true; 4]; 4]).rank(), 1);
        assert_eq!(Gf2Matrix::from_rows(&[]).rank(), 0);
        let wide: Vec<Vec<bool>> = (0..2).map(|i| (0..130).map(|j| j % 65 == i).collect()).collect();
        assert_eq!(Gf2Matrix::from_rows(&wide).rank(), 2);
    }

    #[test]
    fn equivalence_examples() {
        let blocks = du_equiv_classes(&spec("max-degree:1"), &ws(&["empty", "K2", "P3"]), 1).unwrap();
        assert_eq!(blocks, vec![vec![0, 1], vec![2]]);
        let blocks = du_equiv_classes(&spec("connected"), &ws(&["C3", "C4"]), 1).unwrap();
        assert_eq!(blocks, vec![vec![0, 1]]);
        let blocks = du_equiv_classes(&spec("cycles"), &ws(&["C5"]), 1).unwrap();
        assert_eq!(blocks.len(), 1);
    }

    #[test]
    fn subst_examples() {
        let v = Arc::new(Vocabulary::graph());
        let b = parse_graph("P3").unwrap();
        let a = parse_graph("C4").unwrap();
        assert_eq!(
            subst_compose(&PointedStructure::outside(a.clone()), &b).unwrap(),
            a.disjoint_union(&b).unwrap()
        );
        let single = PointedStructure::new(parse_graph("1").unwrap(), Some(1)).unwrap();
        assert_eq!(subst_compose(&single, &b).unwrap(), b);
        let edge = PointedStructure::new(parse_graph("2:1-2").unwrap(), Some(2)).unwrap();
        let got = subst_compose(&edge, &parse_graph("2").unwrap()).unwrap();
        assert_eq!(got, parse_graph("3:1-2,1-3").unwrap());
        assert_eq!(PointedStructure::parse(&v, "2:1-2@2").unwrap(), edge);
        assert!(PointedStructure::parse(&v, "2:1-2@3").is_err());
        assert!(PointedStructure::parse(&v, "2:1-2").is_err());
        let t = Arc::new(Vocabulary::ternary());
        let tp = PointedStructure::new(RelStructure::empty(Arc::clone(&t), 1).unwrap(), Some(1)).unwrap();
        assert!(matches!(
            subst_compose(&tp, &RelStructure::empty(t, 1).unwrap()),
            Err(DuError::ArityTooLarge { .. })
        ));
    }

    #[test]
    fn subst_directed_orientations() {
        let v = Arc::new(Vocabulary::digraph());
        let a = PointedStructure::parse(&v, "3:(1,3),(3,2),(3,3)@3").unwrap();
        let b = parse_structure(&v, "2:(1,2)").unwrap();
        let got = subst_compose(&a, &b).unwrap();
        let want = parse_structure(&v, "4:(1,3),(1,4),(3,2),(4,2),(3,4)").unwrap();
        assert_eq!(got, want);
    }

    #[test]
    fn subst_rank_connected() {
        let v = Arc::new(Vocabulary::graph());
        let rows: Vec<PointedStructure> = ["empty@out", "2:1-2@1", "1@1", "2@1"]
            .iter()
            .map(|r| PointedStructure::parse(&v, r).unwrap())
            .collect();
        let m = subst_submatrix(&spec("connected"), &rows, &ws(&["C3", "C3+C3", "1"]), 1).unwrap();
        assert_eq!(bits(&m)[0], vec![1, 0, 1]);
        assert_eq!(m.rank(), 2);
        let one = subst_submatrix(&spec("connected"), &rows[..1], &ws(&["C3"]), 1).unwrap();
        assert_eq!((one.nrows(), one.ncols()), (1, 1));
    }

    #[test]
    fn witness_files() {
        let v = Arc::new(Vocabulary::graph());
        let w = WitnessSet::parse(Arc::clone(&v), "# comment\nempty\n\nC3\n3:1-2\n").unwrap();
        assert_eq!(w.labels(), vec!["empty", "3:1-2,1-3,2-3", "3:1-2"]);
        assert_eq!(
            WitnessSet::parse(Arc::clone(&v), "C3\nK3\n"),
            Err(DuError::WitnessFile {
                line: 2,
                message: "duplicate witness 3:1-2,1-3,2-3".into()
            })
        );
        assert!(matches!(
            WitnessSet::parse(v, "C3\nbogus\n"),
            Err(DuError::WitnessFile { line: 2, .. })
        ));
    }

    #[test]
    fn generated_witnesses_are_iso_classes() {
        let w = WitnessSet::generate(Arc::new(Vocabulary::graph()), 4, EnumConfig::default()).unwrap();
        // 1 + 1 + 2 + 4 + 11 unlabeled graphs on 0..=4 vertices.
        assert_eq!(w.len(), 19);
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(permutations(0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn display_grid() {
        let m = du_submatrix(&spec("connected"), &ws(&["empty", "C3"]), 1).unwrap();
        assert_eq!(
            m.to_string(),
            "col 1: empty\ncol 2: 3:1-2,1-3,2-3\nempty         | 0 1\n3:1-2,1-3,2-3 | 1 0\n"
        );
    }

    fn span_size(rows: &[Vec<bool>]) -> usize {
        let mut span = HashSet::new();
        for mask in 0u32..1 << rows.len() {
            let mut acc = vec![false; rows.first().map_or(0, Vec::len)];
            for (i, r) in rows.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    for (a, b) in acc.iter_mut().zip(r) {
                        *a ^= b;
                    }
                }
            }
            span.insert(acc);
        }
        span.len()
    }

    proptest! {
        #[test]
        fn rank_matches_span_count(rows in (1usize..7, 1usize..9).prop_flat_map(|(r, c)| {
            proptest::collection::vec(proptest::collection::vec(any::<bool>(), c), r)
        })) {
            let m = Gf2Matrix::from_rows(&rows);
            prop_assert_eq!(1usize << m.rank(), span_size(&rows));
            prop_assert_eq!(m.rank(), m.transpose().rank());
            prop_assert!(m.rank() <= m.nrows().min(m.ncols()));
        }

        #[test]
        fn du_matrix_symmetric_and_monotone(picks in proptest::collection::btree_set(0usize..12, 1..7)) {
            let pool = ["empty", "1", "K2", "P3", "C3", "C4", "K4", "S3", "C3+K2", "C5", "P4", "2"];
            let lits: Vec<&str> = picks.iter().map(|&i| pool[i]).collect();
            for p in ["connected", "max-degree:2", "forbid-sub:K3", "cycles"] {
                let m = du_submatrix(&spec(p), &ws(&lits), 1).unwrap();
                for i in 0..m.nrows() {
                    for j in 0..m.ncols() {
                        prop_assert_eq!(m.get(i, j), m.get(j, i));
                    }
                }
                let smaller = du_submatrix(&spec(p), &ws(&lits[..lits.len() - 1]), 1);
                if let Ok(s) = smaller {
                    prop_assert!(s.rank() <= m.rank());
                }
            }
        }
    }
}
