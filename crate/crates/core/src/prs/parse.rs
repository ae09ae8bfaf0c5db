//! Line-oriented recurrence documents.
//!
//! ```text
//! dim 2
//! depth 2
//! init (1,1)
//! init (2,2)
//! next[1] = a[1][1] + a[1][2]*a[2][1]
//! next[2] = a[1][2] + 1
//! ```
//!
//! Expressions: `expr := product (('+'|'-') product)*`,
//! `product := signed ('*' signed)*`, `signed := ('+'|'-') signed | power`,
//! `power := primary ('^' UINT)*`, `primary := INT | a[j][i] | '(' expr ')'`.

use num_bigint::{BigInt, BigUint};
use num_traits::ToPrimitive;

use super::{PolyRecurrence, Polynomial, PrsError, Var};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigUint),
    Ident(String),
    LBracket,
    RBracket,
    LParen,
    RParen,
    Comma,
    Plus,
    Minus,
    Star,
    Caret,
    Eq,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    col: usize,
}

fn syntax(line: usize, col: usize, message: impl Into<String>) -> PrsError {
    PrsError::Syntax {
        line,
        col,
        message: message.into(),
    }
}

fn tokenize(line_no: usize, text: &str) -> Result<Vec<Spanned>, PrsError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            let value = digits.parse::<BigUint>().expect("ascii digits");
            out.push(Spanned { tok: Tok::Int(value), col });
            continue;
        }
        if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Spanned {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                col,
            });
            continue;
        }
        let tok = match c {
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '^' => Tok::Caret,
            '=' => Tok::Eq,
            other => return Err(syntax(line_no, col, format!("unexpected character {other:?}"))),
        };
        out.push(Spanned { tok, col });
        i += 1;
    }
    Ok(out)
}

struct Cursor<'a> {
    line: usize,
    toks: &'a [Spanned],
    pos: usize,
    end_col: usize,
}

impl<'a> Cursor<'a> {
    fn new(line: usize, toks: &'a [Spanned], end_col: usize) -> Self {
        Self {
            line,
            toks,
            pos: 0,
            end_col,
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |s| s.col)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|s| s.tok.clone());
        self.pos += 1;
        t
    }

    fn error(&self, message: impl Into<String>) -> PrsError {
        syntax(self.line, self.col(), message)
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), PrsError> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    fn uint(&mut self, what: &str) -> Result<BigUint, PrsError> {
        match self.peek() {
            Some(Tok::Int(v)) => {
                let v = v.clone();
                self.pos += 1;
                Ok(v)
            }
            _ => Err(self.error(format!("expected {what}"))),
        }
    }

    fn small(&mut self, what: &str) -> Result<usize, PrsError> {
        let col = self.col();
        let v = self.uint(what)?;
        v.to_usize()
            .ok_or_else(|| syntax(self.line, col, format!("{what} too large")))
    }

    fn signed_int(&mut self) -> Result<BigInt, PrsError> {
        let negative = match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                true
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                false
            }
            _ => false,
        };
        let v = BigInt::from(self.uint("integer")?);
        Ok(if negative { -v } else { v })
    }

    fn finish(&self) -> Result<(), PrsError> {
        if self.pos < self.toks.len() {
            Err(self.error("unexpected trailing input"))
        } else {
            Ok(())
        }
    }

    fn expr(&mut self, shape: Shape) -> Result<Polynomial, PrsError> {
        let mut acc = self.product(shape)?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = acc.add(&self.product(shape)?);
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = acc.sub(&self.product(shape)?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn product(&mut self, shape: Shape) -> Result<Polynomial, PrsError> {
        let mut acc = self.signed(shape)?;
        while self.peek() == Some(&Tok::Star) {
            self.pos += 1;
            acc = acc.mul(&self.signed(shape)?);
        }
        Ok(acc)
    }

    fn signed(&mut self, shape: Shape) -> Result<Polynomial, PrsError> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(self.signed(shape)?.neg())
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.signed(shape)
            }
            _ => self.power(shape),
        }
    }

    fn power(&mut self, shape: Shape) -> Result<Polynomial, PrsError> {
        let mut acc = self.primary(shape)?;
        while self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            let col = self.col();
            let e = self.uint("nonnegative integer exponent")?;
            let e = e
                .to_u32()
                .ok_or_else(|| syntax(self.line, col, "exponent too large"))?;
            acc = acc.pow(e);
        }
        Ok(acc)
    }

    fn primary(&mut self, shape: Shape) -> Result<Polynomial, PrsError> {
        match self.peek().cloned() {
            Some(Tok::Int(v)) => {
                self.pos += 1;
                Ok(Polynomial::constant(BigInt::from(v)))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.expr(shape)?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            Some(Tok::Ident(name)) if name == "a" => {
                self.pos += 1;
                self.expect(Tok::LBracket, "'[' after variable name")?;
                let lag = self.small("lag")?;
                self.expect(Tok::RBracket, "']'")?;
                self.expect(Tok::LBracket, "'[' before coordinate")?;
                let coord = self.small("coordinate")?;
                self.expect(Tok::RBracket, "']'")?;
                if lag == 0 || lag > shape.depth {
                    return Err(PrsError::IndexOutOfRange {
                        line: self.line,
                        what: "lag",
                        index: lag,
                        bound: shape.depth,
                    });
                }
                if coord == 0 || coord > shape.dim {
                    return Err(PrsError::IndexOutOfRange {
                        line: self.line,
                        what: "coordinate",
                        index: coord,
                        bound: shape.dim,
                    });
                }
                Ok(Polynomial::var(Var { lag, coord }))
            }
            Some(Tok::Ident(name)) => Err(self.error(format!("unknown identifier {name:?}"))),
            Some(_) => Err(self.error("expected a number, variable or '('")),
            None => Err(self.error("unexpected end of line")),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Shape {
    dim: usize,
    depth: usize,
}

/// Parses a recurrence document.
pub fn parse_spec(text: &str) -> Result<PolyRecurrence, PrsError> {
    let mut dim: Option<usize> = None;
    let mut depth: Option<usize> = None;
    let mut init: Vec<Vec<BigInt>> = Vec::new();
    let mut next: Vec<Option<Polynomial>> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let toks = tokenize(line_no, content)?;
        if toks.is_empty() {
            continue;
        }
        let mut cur = Cursor::new(line_no, &toks, content.chars().count() + 1);
        let keyword = match cur.bump() {
            Some(Tok::Ident(k)) => k,
            _ => return Err(syntax(line_no, toks[0].col, "expected a keyword")),
        };
        let shape = |cur: &Cursor| match (dim, depth) {
            (Some(dim), Some(depth)) => Ok(Shape { dim, depth }),
            _ => Err(syntax(cur.line, 1, "`dim` and `depth` must come first")),
        };
        match keyword.as_str() {
            "dim" | "depth" => {
                let slot = if keyword == "dim" { &mut dim } else { &mut depth };
                if slot.is_some() {
                    return Err(syntax(line_no, 1, format!("`{keyword}` given twice")));
                }
                let col = cur.col();
                let v = cur.small(&keyword)?;
                if v == 0 {
                    return Err(syntax(line_no, col, format!("`{keyword}` must be at least 1")));
                }
                cur.finish()?;
                *slot = Some(v);
                if keyword == "dim" {
                    next = vec![None; v];
                }
            }
            "init" => {
                let shape = shape(&cur)?;
                let mut values = Vec::new();
                if cur.peek() == Some(&Tok::LParen) {
                    cur.bump();
                    values.push(cur.signed_int()?);
                    while cur.peek() == Some(&Tok::Comma) {
                        cur.bump();
                        values.push(cur.signed_int()?);
                    }
                    cur.expect(Tok::RParen, "')'")?;
                } else if shape.dim == 1 {
                    values.push(cur.signed_int()?);
                } else {
                    return Err(cur.error("expected '(' for a vector of width > 1"));
                }
                cur.finish()?;
                if values.len() != shape.dim {
                    return Err(PrsError::WrongInitWidth {
                        index: init.len() + 1,
                        expected: shape.dim,
                        found: values.len(),
                    });
                }
                if init.len() == shape.depth {
                    return Err(PrsError::WrongInitCount {
                        expected: shape.depth,
                        found: init.len() + 1,
                    });
                }
                init.push(values);
            }
            "next" => {
                let shape = shape(&cur)?;
                cur.expect(Tok::LBracket, "'['")?;
                let coord = cur.small("coordinate")?;
                cur.expect(Tok::RBracket, "']'")?;
                if coord == 0 || coord > shape.dim {
                    return Err(PrsError::IndexOutOfRange {
                        line: line_no,
                        what: "update",
                        index: coord,
                        bound: shape.dim,
                    });
                }
                cur.expect(Tok::Eq, "'='")?;
                let poly = cur.expr(shape)?;
                cur.finish()?;
                if next[coord - 1].is_some() {
                    return Err(PrsError::DuplicateUpdate {
                        line: line_no,
                        coord,
                    });
                }
                next[coord - 1] = Some(poly);
            }
            other => {
                return Err(syntax(line_no, toks[0].col, format!("unknown keyword {other:?}")));
            }
        }
    }

    let (Some(dim), Some(depth)) = (dim, depth) else {
        return Err(syntax(text.lines().count().max(1), 1, "missing `dim` or `depth`"));
    };
    if init.len() != depth {
        return Err(PrsError::WrongInitCount {
            expected: depth,
            found: init.len(),
        });
    }
    let next = next
        .into_iter()
        .enumerate()
        .map(|(i, p)| p.ok_or(PrsError::MissingUpdate(i + 1)))
        .collect::<Result<Vec<_>, _>>()?;
    PolyRecurrence::new(dim, depth, init, next)
}
