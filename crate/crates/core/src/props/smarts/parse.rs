use crate::chem::element;

use super::SmartsError;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum AtomPrim {
    Any,
    Aliphatic,
    Aromatic,
    /// Element with an aromaticity requirement when written as a symbol.
    Element { z: u8, aromatic: Option<bool> },
    Isotope(u16),
    /// Total hydrogens, neighbours included.
    TotalH(u32),
    /// Hydrogens not present as graph atoms; `None` means at least one.
    ImplicitH(Option<u32>),
    Degree(u32),
    Connectivity(u32),
    Valence(u32),
    RingCount(Option<u32>),
    RingSize(Option<u32>),
    RingConnectivity(Option<u32>),
    Charge(i32),
    Recursive(Box<Pattern>),
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Expr<P> {
    Prim(P),
    Not(Box<Expr<P>>),
    And(Vec<Expr<P>>),
    Or(Vec<Expr<P>>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum BondPrim {
    /// No bond symbol written: single or aromatic.
    Implicit,
    Any,
    Single,
    Double,
    Triple,
    Aromatic,
    Ring,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct PatternBond {
    pub a: usize,
    pub b: usize,
    pub expr: Expr<BondPrim>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Pattern {
    pub atoms: Vec<Expr<AtomPrim>>,
    pub bonds: Vec<PatternBond>,
}

pub(crate) fn parse(text: &str) -> Result<Pattern, SmartsError> {
    let mut p = Parser { src: text.as_bytes(), text, pos: 0, offset: 0 };
    let pat = p.pattern()?;
    if p.pos != p.src.len() {
        return Err(p.invalid("trailing characters"));
    }
    Ok(pat)
}

struct Parser<'a> {
    src: &'a [u8],
    text: &'a str,
    pos: usize,
    /// Position of `src` inside the outermost pattern, for error messages.
    offset: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn invalid(&self, reason: &str) -> SmartsError {
        SmartsError::Invalid { position: self.offset + self.pos, reason: reason.to_string() }
    }

    fn unsupported(&self, feature: &str) -> SmartsError {
        SmartsError::UnsupportedSmartsFeature { feature: feature.to_string(), position: self.offset + self.pos }
    }

    fn number(&mut self) -> Option<u32> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        (self.pos > start).then(|| self.text[start..self.pos].parse().ok()).flatten()
    }

    fn pattern(&mut self) -> Result<Pattern, SmartsError> {
        let mut atoms = Vec::new();
        let mut bonds: Vec<PatternBond> = Vec::new();
        let mut prev: Option<usize> = None;
        let mut stack: Vec<Option<usize>> = Vec::new();
        let mut open: std::collections::BTreeMap<u32, (usize, Option<Expr<BondPrim>>)> = Default::default();
        let mut pending: Option<Expr<BondPrim>> = None;
        if self.src.is_empty() {
            return Err(self.invalid("empty pattern"));
        }
        while let Some(c) = self.peek() {
            match c {
                b'(' => {
                    if prev.is_none() || pending.is_some() {
                        return Err(self.invalid("branch without a preceding atom"));
                    }
                    stack.push(prev);
                    self.pos += 1;
                }
                b')' => {
                    let Some(p) = stack.pop() else { return Err(self.invalid("unmatched ')'")) };
                    if pending.is_some() {
                        return Err(self.invalid("bond before ')'"));
                    }
                    prev = p;
                    self.pos += 1;
                }
                b'.' => {
                    if pending.is_some() || !stack.is_empty() {
                        return Err(self.invalid("misplaced '.'"));
                    }
                    prev = None;
                    self.pos += 1;
                }
                b'0'..=b'9' | b'%' => {
                    let Some(a) = prev else { return Err(self.invalid("ring closure before any atom")) };
                    let label = if c == b'%' {
                        self.pos += 1;
                        let start = self.pos;
                        if self.src.len() < start + 2 || !self.src[start..start + 2].iter().all(u8::is_ascii_digit) {
                            return Err(self.invalid("'%' needs two digits"));
                        }
                        self.pos += 2;
                        self.text[start..start + 2].parse().unwrap()
                    } else {
                        self.pos += 1;
                        (c - b'0') as u32
                    };
                    let here = pending.take();
                    match open.remove(&label) {
                        Some((b, first)) => {
                            if b == a {
                                return Err(self.invalid("ring closure onto the same atom"));
                            }
                            let expr = here.or(first).unwrap_or(Expr::Prim(BondPrim::Implicit));
                            bonds.push(PatternBond { a: b, b: a, expr });
                        }
                        None => {
                            open.insert(label, (a, here));
                        }
                    }
                }
                b'-' | b'=' | b'#' | b':' | b'~' | b'@' | b'!' | b'/' | b'\\' => {
                    if prev.is_none() || pending.is_some() {
                        return Err(self.invalid("bond without a preceding atom"));
                    }
                    pending = Some(self.bond_expr()?);
                }
                b'>' => return Err(self.unsupported("reaction SMARTS")),
                _ => {
                    let atom = self.atom()?;
                    atoms.push(atom);
                    let idx = atoms.len() - 1;
                    if let Some(p) = prev {
                        let expr = pending.take().unwrap_or(Expr::Prim(BondPrim::Implicit));
                        bonds.push(PatternBond { a: p, b: idx, expr });
                    } else if pending.is_some() {
                        return Err(self.invalid("bond without a preceding atom"));
                    }
                    prev = Some(idx);
                }
            }
        }
        if !stack.is_empty() {
            return Err(self.invalid("unclosed branch"));
        }
        if let Some((label, _)) = open.iter().next() {
            return Err(self.invalid(&format!("unclosed ring {label}")));
        }
        if pending.is_some() {
            return Err(self.invalid("dangling bond"));
        }
        if atoms.is_empty() {
            return Err(self.invalid("pattern has no atoms"));
        }
        Ok(Pattern { atoms, bonds })
    }

    fn bond_expr(&mut self) -> Result<Expr<BondPrim>, SmartsError> {
        // precedence: ! > & (and implicit juxtaposition) > , > ;
        let mut low = Vec::new();
        loop {
            let mut ors = Vec::new();
            loop {
                let mut ands = Vec::new();
                loop {
                    let mut negate = false;
                    while self.peek() == Some(b'!') {
                        negate = !negate;
                        self.pos += 1;
                    }
                    let prim = match self.peek() {
                        Some(b'-') => BondPrim::Single,
                        Some(b'/') | Some(b'\\') => BondPrim::Single,
                        Some(b'=') => BondPrim::Double,
                        Some(b'#') => BondPrim::Triple,
                        Some(b':') => BondPrim::Aromatic,
                        Some(b'~') => BondPrim::Any,
                        Some(b'@') => BondPrim::Ring,
                        _ => return Err(self.invalid("expected a bond primitive")),
                    };
                    self.pos += 1;
                    let e = Expr::Prim(prim);
                    ands.push(if negate { Expr::Not(Box::new(e)) } else { e });
                    match self.peek() {
                        Some(b'&') => self.pos += 1,
                        Some(b'-' | b'/' | b'\\' | b'=' | b'#' | b':' | b'~' | b'@' | b'!') => {}
                        _ => break,
                    }
                }
                ors.push(collapse(ands, Expr::And));
                if self.peek() == Some(b',') {
                    self.pos += 1;
                } else {
                    break;
                }
            }
            low.push(collapse(ors, Expr::Or));
            if self.peek() == Some(b';') {
                self.pos += 1;
            } else {
                break;
            }
        }
        Ok(collapse(low, Expr::And))
    }

    fn atom(&mut self) -> Result<Expr<AtomPrim>, SmartsError> {
        let c = self.peek().unwrap();
        if c == b'[' {
            self.pos += 1;
            let e = self.bracket_expr()?;
            if self.peek() != Some(b']') {
                return Err(self.invalid("unterminated bracket atom"));
            }
            self.pos += 1;
            return Ok(e);
        }
        let rest = &self.text[self.pos..];
        let (prim, len) = if rest.starts_with("Cl") {
            (AtomPrim::Element { z: 17, aromatic: Some(false) }, 2)
        } else if rest.starts_with("Br") {
            (AtomPrim::Element { z: 35, aromatic: Some(false) }, 2)
        } else {
            let prim = match c {
                b'*' => AtomPrim::Any,
                b'A' => AtomPrim::Aliphatic,
                b'a' => AtomPrim::Aromatic,
                b'B' => AtomPrim::Element { z: 5, aromatic: Some(false) },
                b'C' => AtomPrim::Element { z: 6, aromatic: Some(false) },
                b'N' => AtomPrim::Element { z: 7, aromatic: Some(false) },
                b'O' => AtomPrim::Element { z: 8, aromatic: Some(false) },
                b'P' => AtomPrim::Element { z: 15, aromatic: Some(false) },
                b'S' => AtomPrim::Element { z: 16, aromatic: Some(false) },
                b'F' => AtomPrim::Element { z: 9, aromatic: Some(false) },
                b'I' => AtomPrim::Element { z: 53, aromatic: Some(false) },
                b'b' => AtomPrim::Element { z: 5, aromatic: Some(true) },
                b'c' => AtomPrim::Element { z: 6, aromatic: Some(true) },
                b'n' => AtomPrim::Element { z: 7, aromatic: Some(true) },
                b'o' => AtomPrim::Element { z: 8, aromatic: Some(true) },
                b'p' => AtomPrim::Element { z: 15, aromatic: Some(true) },
                b's' => AtomPrim::Element { z: 16, aromatic: Some(true) },
                _ => return Err(self.invalid(&format!("unexpected character '{}'", c as char))),
            };
            (prim, 1)
        };
        self.pos += len;
        Ok(Expr::Prim(prim))
    }

    fn bracket_expr(&mut self) -> Result<Expr<AtomPrim>, SmartsError> {
        let mut low = Vec::new();
        loop {
            let mut ors = Vec::new();
            loop {
                let mut ands = Vec::new();
                let mut first = true;
                loop {
                    let mut negate = false;
                    while self.peek() == Some(b'!') {
                        negate = !negate;
                        self.pos += 1;
                    }
                    let e = self.atom_primitive(first)?;
                    first = false;
                    ands.push(if negate { Expr::Not(Box::new(e)) } else { e });
                    match self.peek() {
                        Some(b'&') => self.pos += 1,
                        Some(b',' | b';' | b']') | None => break,
                        Some(b':') => {
                            // atom map number: accepted and ignored
                            self.pos += 1;
                            if self.number().is_none() {
                                return Err(self.invalid("atom map needs a number"));
                            }
                            break;
                        }
                        _ => {}
                    }
                }
                ors.push(collapse(ands, Expr::And));
                if self.peek() == Some(b',') {
                    self.pos += 1;
                } else {
                    break;
                }
            }
            low.push(collapse(ors, Expr::Or));
            if self.peek() == Some(b';') {
                self.pos += 1;
            } else {
                break;
            }
        }
        Ok(collapse(low, Expr::And))
    }

    fn atom_primitive(&mut self, first: bool) -> Result<Expr<AtomPrim>, SmartsError> {
        let Some(c) = self.peek() else { return Err(self.invalid("unterminated bracket atom")) };
        let prim = match c {
            b'0'..=b'9' => {
                let n = self.number().unwrap();
                AtomPrim::Isotope(n as u16)
            }
            b'*' => {
                self.pos += 1;
                AtomPrim::Any
            }
            b'#' => {
                self.pos += 1;
                let n = self.number().ok_or_else(|| self.invalid("'#' needs an atomic number"))?;
                if n == 0 || n > 118 {
                    return Err(self.invalid("atomic number out of range"));
                }
                AtomPrim::Element { z: n as u8, aromatic: None }
            }
            b'+' | b'-' => {
                let sign = if c == b'+' { 1 } else { -1 };
                self.pos += 1;
                let mut mag = 1;
                if let Some(n) = self.number() {
                    mag = n as i32;
                } else {
                    while self.peek() == Some(c) {
                        mag += 1;
                        self.pos += 1;
                    }
                }
                AtomPrim::Charge(sign * mag)
            }
            b'$' => {
                self.pos += 1;
                if self.peek() != Some(b'(') {
                    return Err(self.invalid("'$' must be followed by '('"));
                }
                self.pos += 1;
                let start = self.pos;
                let mut depth = 1;
                while depth > 0 {
                    match self.peek() {
                        Some(b'(') => depth += 1,
                        Some(b')') => depth -= 1,
                        None => return Err(self.invalid("unterminated recursive SMARTS")),
                        _ => {}
                    }
                    self.pos += 1;
                }
                let body = &self.text[start..self.pos - 1];
                let mut inner = Parser { src: body.as_bytes(), text: body, pos: 0, offset: self.offset + start };
                let pat = inner.pattern()?;
                if inner.pos != body.len() {
                    return Err(inner.invalid("trailing characters in recursive SMARTS"));
                }
                AtomPrim::Recursive(Box::new(pat))
            }
            b'@' => return Err(self.unsupported("chirality")),
            b'^' => return Err(self.unsupported("hybridization")),
            b'{' => return Err(self.unsupported("range query")),
            b'a' if !self.text[self.pos..].starts_with("as") => {
                self.pos += 1;
                AtomPrim::Aromatic
            }
            b'A' if !self.two_letter_element() => {
                self.pos += 1;
                AtomPrim::Aliphatic
            }
            b'H' if self.hydrogen_atom(first) => {
                self.pos += 1;
                AtomPrim::Element { z: 1, aromatic: None }
            }
            b'H' if !self.two_letter_element() => {
                self.pos += 1;
                AtomPrim::TotalH(self.number().unwrap_or(1))
            }
            b'h' => {
                self.pos += 1;
                AtomPrim::ImplicitH(self.number())
            }
            b'D' if !self.two_letter_element() => {
                self.pos += 1;
                AtomPrim::Degree(self.number().unwrap_or(1))
            }
            b'X' if !self.two_letter_element() => {
                self.pos += 1;
                AtomPrim::Connectivity(self.number().unwrap_or(1))
            }
            b'v' => {
                self.pos += 1;
                AtomPrim::Valence(self.number().unwrap_or(1))
            }
            b'R' if !self.two_letter_element() => {
                self.pos += 1;
                AtomPrim::RingCount(self.number())
            }
            b'r' => {
                self.pos += 1;
                AtomPrim::RingSize(self.number())
            }
            b'x' => {
                self.pos += 1;
                AtomPrim::RingConnectivity(self.number())
            }
            b'z' => return Err(self.unsupported("heteroatom-neighbour count")),
            b'Z' if !self.two_letter_element() => return Err(self.unsupported("heteroatom-neighbour count")),
            b'c' | b'n' | b'o' | b's' | b'p' | b'b' => {
                let rest = &self.text[self.pos..];
                let (z, len) = if rest.starts_with("se") {
                    (34, 2)
                } else if rest.starts_with("te") {
                    (52, 2)
                } else {
                    let z = match c {
                        b'c' => 6,
                        b'n' => 7,
                        b'o' => 8,
                        b's' => 16,
                        b'p' => 15,
                        _ => 5,
                    };
                    (z, 1)
                };
                self.pos += len;
                AtomPrim::Element { z, aromatic: Some(true) }
            }
            b'a' => {
                // "as": aromatic arsenic
                self.pos += 2;
                AtomPrim::Element { z: 33, aromatic: Some(true) }
            }
            b'A'..=b'Z' => {
                let (z, len) = self.element_symbol().ok_or_else(|| self.invalid("unknown element symbol"))?;
                self.pos += len;
                AtomPrim::Element { z, aromatic: Some(false) }
            }
            _ => return Err(self.invalid(&format!("unexpected character '{}' in bracket atom", c as char))),
        };
        Ok(Expr::Prim(prim))
    }

    fn element_symbol(&self) -> Option<(u8, usize)> {
        let rest = &self.text[self.pos..];
        if rest.len() >= 2 && rest.as_bytes()[1].is_ascii_lowercase() {
            if let Some(z) = element::atomic_number(&rest[..2]) {
                return Some((z, 2));
            }
        }
        element::atomic_number(&rest[..1]).map(|z| (z, 1))
    }

    fn two_letter_element(&self) -> bool {
        self.element_symbol().is_some_and(|(_, len)| len == 2)
    }

    /// `[H]`, `[H+]`, `[2H]`: a hydrogen atom rather than an H-count primitive.
    fn hydrogen_atom(&self, first: bool) -> bool {
        let next = self.src.get(self.pos + 1).copied();
        let prev = self.pos.checked_sub(1).map(|i| self.src[i]);
        let leading = first || prev.is_some_and(|p| p.is_ascii_digit());
        leading && matches!(next, Some(b']') | Some(b'+') | Some(b'-') | Some(b':'))
    }
}

fn collapse<P>(mut items: Vec<Expr<P>>, wrap: fn(Vec<Expr<P>>) -> Expr<P>) -> Expr<P> {
    if items.len() == 1 {
        items.pop().unwrap()
    } else {
        wrap(items)
    }
}
