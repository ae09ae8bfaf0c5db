//! Structure literals.
//!
//! ```text
//! literal := term ('+' term)*          disjoint union, left to right
//! term    := 'empty' | named | N | N ':' items
//! named   := K<n> | C<n> | P<n> | E<n> | S<k>   (graphs only)
//! items   := item (',' item)*
//! item    := a '-' b | [Name] '(' x (',' x)* ')'
//! ```
//!
//! `a-b` names a tuple of the sole binary symbol; `Name(...)` selects a
//! symbol explicitly and may be omitted when the vocabulary has one symbol.

use std::sync::Arc;

use super::{RelStructure, StructureError, Vocabulary};

pub fn parse_graph(text: &str) -> Result<RelStructure, StructureError> {
    parse_structure(&Arc::new(Vocabulary::graph()), text)
}

pub fn parse_structure(vocab: &Arc<Vocabulary>, text: &str) -> Result<RelStructure, StructureError> {
    let err = |reason: &str| StructureError::Literal {
        literal: text.to_string(),
        reason: reason.to_string(),
    };
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(err("empty literal"));
    }
    let mut acc: Option<RelStructure> = None;
    for part in trimmed.split('+') {
        let term = parse_term(vocab, part.trim()).map_err(|e| match e {
            StructureError::Literal { reason, .. } => err(&reason),
            other => other,
        })?;
        acc = Some(match acc {
            None => term,
            Some(a) => a.disjoint_union(&term)?,
        });
    }
    Ok(acc.expect("at least one term"))
}

fn literal_err(term: &str, reason: impl Into<String>) -> StructureError {
    StructureError::Literal {
        literal: term.to_string(),
        reason: reason.into(),
    }
}

fn parse_term(vocab: &Arc<Vocabulary>, term: &str) -> Result<RelStructure, StructureError> {
    if term == "empty" {
        return RelStructure::empty(Arc::clone(vocab), 0);
    }
    if let Some(s) = parse_named(term)? {
        s.same_vocab(vocab)
            .map_err(|_| literal_err(term, "named graphs need the graph vocabulary"))?;
        return Ok(s);
    }
    let (head, body) = match term.split_once(':') {
        Some((h, b)) => (h.trim(), Some(b.trim())),
        None => (term, None),
    };
    let n: usize = head
        .parse()
        .map_err(|_| literal_err(term, format!("expected universe size, found {head:?}")))?;
    let mut s = RelStructure::empty(Arc::clone(vocab), n)?;
    let Some(body) = body else { return Ok(s) };
    for item in split_items(body).map_err(|r| literal_err(term, r))? {
        let (sym, tuple) = parse_item(vocab, &item).map_err(|r| literal_err(term, r))?;
        s.insert(sym, &tuple)?;
    }
    Ok(s)
}

fn parse_named(term: &str) -> Result<Option<RelStructure>, StructureError> {
    let mut chars = term.chars();
    let Some(kind) = chars.next() else { return Ok(None) };
    let rest = chars.as_str();
    if !"KCPES".contains(kind) || rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
        return Ok(None);
    }
    let k: usize = rest.parse().map_err(|_| literal_err(term, "size too large"))?;
    let size = if kind == 'S' { k + 1 } else { k };
    if size > super::MAX_UNIVERSE {
        return Err(StructureError::TooLarge(size));
    }
    Ok(Some(match kind {
        'K' => RelStructure::complete(k),
        'C' if k < 3 => return Err(literal_err(term, "cycles need at least 3 vertices")),
        'C' => RelStructure::cycle(k),
        'P' => RelStructure::path(k),
        'E' => RelStructure::edgeless(k),
        _ => RelStructure::star(k),
    }))
}

fn split_items(body: &str) -> Result<Vec<String>, String> {
    let mut items = Vec::new();
    let mut depth = 0usize;
    let mut current = String::new();
    for c in body.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.checked_sub(1).ok_or("unbalanced ')'")?,
            ',' if depth == 0 => {
                items.push(std::mem::take(&mut current));
                continue;
            }
            _ => {}
        }
        current.push(c);
    }
    if depth != 0 {
        return Err("unbalanced '('".into());
    }
    items.push(current);
    let items: Vec<String> = items.into_iter().map(|s| s.trim().to_string()).collect();
    if items.len() == 1 && items[0].is_empty() {
        return Ok(Vec::new());
    }
    if items.iter().any(String::is_empty) {
        return Err("empty tuple entry".into());
    }
    Ok(items)
}

fn parse_item(vocab: &Vocabulary, item: &str) -> Result<(usize, Vec<usize>), String> {
    let number = |s: &str| -> Result<usize, String> {
        s.trim().parse().map_err(|_| format!("bad element {:?}", s.trim()))
    };
    if let Some(open) = item.find('(') {
        let name = item[..open].trim();
        let inner = item[open + 1..]
            .strip_suffix(')')
            .ok_or_else(|| format!("unterminated tuple {item:?}"))?;
        let sym = if name.is_empty() {
            sole_symbol(vocab)?
        } else {
            vocab
                .symbols()
                .iter()
                .position(|s| s.name == name)
                .ok_or_else(|| format!("unknown symbol {name:?}"))?
        };
        let tuple = inner.split(',').map(number).collect::<Result<Vec<_>, _>>()?;
        return Ok((sym, tuple));
    }
    let (a, b) = item
        .split_once('-')
        .ok_or_else(|| format!("expected a-b or (..), found {item:?}"))?;
    let sym = sole_symbol(vocab)?;
    if vocab.symbols()[sym].arity != 2 {
        return Err("a-b edges need a binary symbol".into());
    }
    Ok((sym, vec![number(a)?, number(b)?]))
}

fn sole_symbol(vocab: &Vocabulary) -> Result<usize, String> {
    if vocab.symbols().len() == 1 {
        Ok(0)
    } else {
        Err("symbol name required for this vocabulary".into())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_literals() {
        let k3 = parse_graph("3:1-2,2-3,1-3").unwrap();
        assert_eq!(k3, RelStructure::complete(3));
        assert_eq!(parse_graph("K3").unwrap(), k3);
        assert_eq!(parse_graph("C3").unwrap(), k3);
        assert_eq!(parse_graph("4").unwrap(), RelStructure::edgeless(4));
        assert_eq!(parse_graph("4:").unwrap(), RelStructure::edgeless(4));
        assert_eq!(parse_graph("empty").unwrap().n(), 0);
        let two = parse_graph("C3+C3").unwrap();
        assert_eq!(two.n(), 6);
        assert!(!two.is_connected());
        assert_eq!(parse_graph("S2").unwrap(), parse_graph("P3").unwrap().permuted(&[2, 1, 3]));
    }

    #[test]
    fn ternary_literals() {
        let v = Arc::new(Vocabulary::ternary());
        let s = parse_structure(&v, "3:(1,2,3),(2,1,3)").unwrap();
        assert_eq!(s.tuples(0).count(), 2);
        assert!(parse_structure(&v, "3:(1,2)").is_err());
        assert!(parse_structure(&v, "3:1-2").is_err());
        assert!(parse_structure(&v, "K3").is_err());
    }

    #[test]
    fn rejects_malformed() {
        for bad in ["", "x", "3:1-4", "3:1-1", "3:1-2,", "3:(1,2", "C2", "2:1_2"] {
            assert!(parse_graph(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn display_round_trips() {
        let v = Arc::new(Vocabulary::ternary());
        for (vocab, text) in [
            (Arc::new(Vocabulary::graph()), "C3+P4+E2"),
            (Arc::new(Vocabulary::graph()), "empty"),
            (v, "3:(1,2,3),(3,3,1)"),
            (Arc::new(Vocabulary::digraph()), "2:(1,1),(2,1)"),
        ] {
            let s = parse_structure(&vocab, text).unwrap();
            let again = parse_structure(&vocab, &s.to_string()).unwrap();
            assert_eq!(s, again, "{text} -> {s}");
        }
        assert_eq!(parse_graph("P3").unwrap().to_string(), "3:1-2,2-3");
    }
}
