//! Decidable, isomorphism-closed properties.
//!
//! Text forms: `all`, `connected`, `max-degree:D`, `forbid-sub:H`,
//! `forbid-ind:H`, `cycles`, `cycles-exactly:K`, `cycles-restricted:A`
//! (`even`, `odd`, `>=K` or `L1/L2/...`), `two-equal-cliques`,
//! `ternary-space`, `group-table`, `and(P,Q)`. The vocabulary-agnostic
//! entries (`all`, `connected`, `max-degree`) default to graphs and take
//! a suffix `@ternary` or `@digraph`; inside `and` they adopt the other
//! side's vocabulary.

use std::fmt;
use std::sync::Arc;

use super::{parse_graph, GaifmanGraph, RelStructure, StructureError, Vocabulary};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LengthSet {
    Even,
    Odd,
    AtLeast(usize),
    List(Vec<usize>),
}

impl LengthSet {
    pub fn contains(&self, k: usize) -> bool {
        match self {
            LengthSet::Even => k.is_multiple_of(2),
            LengthSet::Odd => k % 2 == 1,
            LengthSet::AtLeast(m) => k >= *m,
            LengthSet::List(ks) => ks.contains(&k),
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "even" => Some(LengthSet::Even),
            "odd" => Some(LengthSet::Odd),
            _ => {
                if let Some(m) = s.strip_prefix(">=") {
                    return m.parse().ok().map(LengthSet::AtLeast);
                }
                let ks: Option<Vec<usize>> = s.split('/').map(|k| k.parse().ok()).collect();
                ks.filter(|v| !v.is_empty()).map(LengthSet::List)
            }
        }
    }
}

impl fmt::Display for LengthSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LengthSet::Even => f.write_str("even"),
            LengthSet::Odd => f.write_str("odd"),
            LengthSet::AtLeast(m) => write!(f, ">={m}"),
            LengthSet::List(ks) => {
                let parts: Vec<String> = ks.iter().map(usize::to_string).collect();
                f.write_str(&parts.join("/"))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Property {
    All,
    Connected,
    MaxDegree(usize),
    ForbidSub(RelStructure),
    ForbidInd(RelStructure),
    /// A single cycle on at least three vertices.
    Cycles,
    /// Disjoint union of exactly `k` cycles.
    CyclesExactly(usize),
    CyclesRestricted(LengthSet),
    TwoEqualCliques,
    TernarySpace,
    /// Ternary relation `T(a, b, c)` read as `a * b = c` of a group.
    GroupTable,
    And(Box<Property>, Box<Property>),
}

impl Property {
    fn holds(&self, s: &RelStructure, g: &GaifmanGraph) -> bool {
        match self {
            Property::All => true,
            Property::Connected => g.is_connected(),
            Property::MaxDegree(d) => g.max_degree() <= *d,
            Property::ForbidSub(h) => !contains_subgraph(g, &h.gaifman(), false),
            Property::ForbidInd(h) => !contains_subgraph(g, &h.gaifman(), true),
            Property::Cycles => s.n() >= 3 && is_cycle_union(g) && g.is_connected(),
            Property::CyclesExactly(k) => is_cycle_union(g) && g.components().len() == *k,
            Property::CyclesRestricted(a) => {
                s.n() >= 3 && is_cycle_union(g) && g.is_connected() && a.contains(s.n())
            }
            Property::TwoEqualCliques => {
                let comps = g.components();
                comps.len() == 2
                    && comps[0].count_ones() == comps[1].count_ones()
                    && comps.iter().all(|&c| is_clique(g, c))
            }
            Property::TernarySpace => is_ternary_space(s),
            Property::GroupTable => is_group_table(s),
            Property::And(p, q) => p.holds(s, g) && q.holds(s, g),
        }
    }

    pub fn implied_degree_bound(&self) -> Option<usize> {
        match self {
            Property::MaxDegree(d) => Some(*d),
            Property::Cycles | Property::CyclesExactly(_) | Property::CyclesRestricted(_) => Some(2),
            Property::And(p, q) => match (p.implied_degree_bound(), q.implied_degree_bound()) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            },
            _ => None,
        }
    }

    /// Every member is G-connected.
    pub fn certifies_connected(&self) -> bool {
        match self {
            Property::Connected | Property::Cycles | Property::CyclesRestricted(_) => true,
            Property::CyclesExactly(k) => *k == 1,
            Property::And(p, q) => p.certifies_connected() || q.certifies_connected(),
            _ => false,
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Property::All => f.write_str("all"),
            Property::Connected => f.write_str("connected"),
            Property::MaxDegree(d) => write!(f, "max-degree:{d}"),
            Property::ForbidSub(h) => write!(f, "forbid-sub:{h}"),
            Property::ForbidInd(h) => write!(f, "forbid-ind:{h}"),
            Property::Cycles => f.write_str("cycles"),
            Property::CyclesExactly(k) => write!(f, "cycles-exactly:{k}"),
            Property::CyclesRestricted(a) => write!(f, "cycles-restricted:{a}"),
            Property::TwoEqualCliques => f.write_str("two-equal-cliques"),
            Property::TernarySpace => f.write_str("ternary-space"),
            Property::GroupTable => f.write_str("group-table"),
            Property::And(p, q) => write!(f, "and({p},{q})"),
        }
    }
}

/// A property together with the vocabulary it is evaluated over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertySpec {
    property: Property,
    vocab: Arc<Vocabulary>,
}

impl PropertySpec {
    pub fn new(property: Property, vocab: Arc<Vocabulary>) -> Self {
        Self { property, vocab }
    }

    pub fn graph(property: Property) -> Self {
        Self::new(property, Arc::new(Vocabulary::graph()))
    }

    pub fn parse(text: &str) -> Result<Self, StructureError> {
        let (property, vocab) = parse_property(text.trim())?;
        let vocab = vocab.unwrap_or_else(|| Arc::new(Vocabulary::graph()));
        Ok(Self { property, vocab })
    }

    pub fn property(&self) -> &Property {
        &self.property
    }

    pub fn vocab(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    pub fn holds(&self, s: &RelStructure) -> Result<bool, StructureError> {
        s.same_vocab(&self.vocab)?;
        Ok(self.property.holds(s, &s.gaifman()))
    }

    pub fn implied_degree_bound(&self) -> Option<usize> {
        self.property.implied_degree_bound()
    }

    pub fn certifies_connected(&self) -> bool {
        self.property.certifies_connected()
    }

    /// `self ∧ max-degree:d`.
    pub fn with_max_degree(&self, d: usize) -> Self {
        Self {
            property: Property::And(Box::new(self.property.clone()), Box::new(Property::MaxDegree(d))),
            vocab: Arc::clone(&self.vocab),
        }
    }
}

impl fmt::Display for PropertySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.property)?;
        let generic = matches!(
            self.property,
            Property::All | Property::Connected | Property::MaxDegree(_) | Property::And(..)
        );
        if generic && !self.vocab.is_graph() {
            write!(f, "@{}", self.vocab.name())?;
        }
        Ok(())
    }
}

type Parsed = (Property, Option<Arc<Vocabulary>>);

fn prop_err(spec: &str, reason: impl Into<String>) -> StructureError {
    StructureError::Property {
        spec: spec.to_string(),
        reason: reason.into(),
    }
}

fn parse_property(text: &str) -> Result<Parsed, StructureError> {
    if let Some(inner) = text.strip_prefix("and(") {
        let (body, suffix) = match inner.rfind(')') {
            Some(i) => (&inner[..i], &inner[i + 1..]),
            None => return Err(prop_err(text, "unterminated and(")),
        };
        let forced = parse_suffix(text, suffix)?;
        let pieces: Vec<&str> = split_top_level(body);
        for k in 1..pieces.len() {
            let left = pieces[..k].join(",");
            let right = pieces[k..].join(",");
            if let (Ok(p), Ok(q)) = (parse_property(left.trim()), parse_property(right.trim())) {
                let vocab = unify(text, [p.1, q.1, forced])?;
                return Ok((Property::And(Box::new(p.0), Box::new(q.0)), vocab));
            }
        }
        return Err(prop_err(text, "expected and(P,Q) with two valid properties"));
    }
    let (head, suffix) = match text.rsplit_once('@') {
        Some((h, v)) => (h, Some(v)),
        None => (text, None),
    };
    let forced = match suffix {
        Some(v) => Some(Arc::new(
            Vocabulary::by_name(v).ok_or_else(|| prop_err(text, format!("unknown vocabulary {v:?}")))?,
        )),
        None => None,
    };
    let (name, arg) = match head.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (head, None),
    };
    let graph = Some(Arc::new(Vocabulary::graph()));
    let ternary = Some(Arc::new(Vocabulary::ternary()));
    let need = |a: Option<&str>| -> Result<String, StructureError> {
        a.map(str::to_string)
            .ok_or_else(|| prop_err(text, format!("{name} needs a parameter")))
    };
    let number = |a: &str| a.parse::<usize>().map_err(|_| prop_err(text, format!("bad number {a:?}")));
    let graph_arg = |a: &str| {
        parse_graph(a).map_err(|e| prop_err(text, e.to_string()))
    };
    let (prop, vocab) = match (name, arg) {
        ("all", None) => (Property::All, None),
        ("connected", None) => (Property::Connected, None),
        ("max-degree", a) => (Property::MaxDegree(number(&need(a)?)?), None),
        ("forbid-sub", a) => (Property::ForbidSub(graph_arg(&need(a)?)?), graph),
        ("forbid-ind", a) => (Property::ForbidInd(graph_arg(&need(a)?)?), graph),
        ("cycles", None) => (Property::Cycles, graph),
        ("cycles-exactly", a) => (Property::CyclesExactly(number(&need(a)?)?), graph),
        ("cycles-restricted", a) => {
            let a = need(a)?;
            let set = LengthSet::parse(&a).ok_or_else(|| prop_err(text, format!("bad length set {a:?}")))?;
            (Property::CyclesRestricted(set), graph)
        }
        ("two-equal-cliques", None) => (Property::TwoEqualCliques, graph),
        ("ternary-space", None) => (Property::TernarySpace, ternary),
        ("group-table", None) => (Property::GroupTable, ternary),
        _ => return Err(prop_err(text, "unknown property")),
    };
    if vocab.is_some() && forced.is_some() && vocab != forced {
        return Err(prop_err(text, "property does not accept that vocabulary"));
    }
    Ok((prop, vocab.or(forced)))
}

fn parse_suffix(text: &str, suffix: &str) -> Result<Option<Arc<Vocabulary>>, StructureError> {
    if suffix.is_empty() {
        return Ok(None);
    }
    let name = suffix
        .strip_prefix('@')
        .ok_or_else(|| prop_err(text, format!("trailing text {suffix:?}")))?;
    Vocabulary::by_name(name)
        .map(|v| Some(Arc::new(v)))
        .ok_or_else(|| prop_err(text, format!("unknown vocabulary {name:?}")))
}

fn unify(text: &str, vocabs: [Option<Arc<Vocabulary>>; 3]) -> Result<Option<Arc<Vocabulary>>, StructureError> {
    let mut out: Option<Arc<Vocabulary>> = None;
    for v in vocabs.into_iter().flatten() {
        match &out {
            Some(o) if *o != v => return Err(prop_err(text, "conjuncts use different vocabularies")),
            _ => out = Some(v),
        }
    }
    Ok(out)
}

fn split_top_level(body: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in body.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&body[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&body[start..]);
    out
}

fn is_cycle_union(g: &GaifmanGraph) -> bool {
    g.degrees().iter().all(|&d| d == 2)
}

fn is_clique(g: &GaifmanGraph, comp: u64) -> bool {
    let size = comp.count_ones();
    (0..g.n())
        .filter(|v| comp >> v & 1 == 1)
        .all(|v| g.neighbor_mask(v + 1).count_ones() + 1 == size)
}

/// Is there an injective map `H → G` carrying edges to edges (and, when
/// induced, non-edges to non-edges)?
fn contains_subgraph(g: &GaifmanGraph, h: &GaifmanGraph, induced: bool) -> bool {
    fn extend(g: &GaifmanGraph, h: &GaifmanGraph, induced: bool, map: &mut Vec<usize>, used: u64) -> bool {
        let i = map.len();
        if i == h.n() {
            return true;
        }
        for v in 0..g.n() {
            if used >> v & 1 == 1 {
                continue;
            }
            let ok = map.iter().enumerate().all(|(j, &w)| {
                let need = h.adjacent(i + 1, j + 1);
                let have = g.adjacent(v + 1, w + 1);
                if induced {
                    need == have
                } else {
                    !need || have
                }
            });
            if ok {
                map.push(v);
                if extend(g, h, induced, map, used | 1 << v) {
                    return true;
                }
                map.pop();
            }
        }
        false
    }
    h.n() <= g.n() && extend(g, h, induced, &mut Vec::with_capacity(h.n()), 0)
}

fn ternary_relation(s: &RelStructure) -> Option<Vec<bool>> {
    let syms = s.vocab().symbols();
    if syms.len() != 1 || syms[0].arity != 3 {
        return None;
    }
    let n = s.n();
    let mut rel = vec![false; n * n * n];
    for t in s.tuples(0) {
        rel[((t[0] - 1) * n + t[1] - 1) * n + t[2] - 1] = true;
    }
    Some(rel)
}

fn is_ternary_space(s: &RelStructure) -> bool {
    let Some(rel) = ternary_relation(s) else { return false };
    let n = s.n();
    let b = |a: usize, x: usize, c: usize| rel[(a * n + x) * n + c];
    for a in 0..n {
        for x in 0..n {
            for c in 0..n {
                if !b(a, x, c) {
                    continue;
                }
                if !b(c, x, a) || (b(a, c, x) && x != c) {
                    return false;
                }
                for d in 0..n {
                    if b(a, c, d) && !(b(x, c, d) && b(a, x, d)) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

fn is_group_table(s: &RelStructure) -> bool {
    let Some(rel) = ternary_relation(s) else { return false };
    let n = s.n();
    if n == 0 {
        return false;
    }
    let mut op = vec![0usize; n * n];
    for a in 0..n {
        for b in 0..n {
            let mut image = (0..n).filter(|&c| rel[(a * n + b) * n + c]);
            match (image.next(), image.next()) {
                (Some(c), None) => op[a * n + b] = c,
                _ => return false,
            }
        }
    }
    group_axioms(n, &op)
}

/// Associativity, a two-sided identity and two-sided inverses.
pub(crate) fn group_axioms(n: usize, op: &[usize]) -> bool {
    let m = |a: usize, b: usize| op[a * n + b];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if m(m(a, b), c) != m(a, m(b, c)) {
                    return false;
                }
            }
        }
    }
    let Some(e) = (0..n).find(|&e| (0..n).all(|x| m(e, x) == x && m(x, e) == x)) else {
        return false;
    };
    (0..n).all(|a| (0..n).any(|b| m(a, b) == e && m(b, a) == e))
}
