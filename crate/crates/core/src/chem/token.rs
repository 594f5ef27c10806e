//! SMILES lexer. Every token keeps its source text so the lexemes of a
//! string concatenate back to the input.

use super::element;
use super::error::ChemError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomSpec {
    pub element: u8,
    pub aromatic: bool,
    pub bracket: bool,
    pub isotope: Option<u16>,
    /// Hydrogen count written inside a bracket atom.
    pub hcount: u8,
    pub charge: i8,
    /// Stereo mark such as `@` or `@@`; kept verbatim, not interpreted.
    pub chirality: Option<String>,
    pub atom_class: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BondSymbol {
    Single,
    Double,
    Triple,
    Aromatic,
    Up,
    Down,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Atom(AtomSpec),
    Bond(BondSymbol),
    RingClosure(u32),
    BranchOpen,
    BranchClose,
    Dot,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    /// Byte offset of the token in the input.
    pub position: usize,
}

pub fn tokenize_smiles(s: &str) -> Result<Vec<Token>, ChemError> {
    let chars: Vec<(usize, char)> = s.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let text_of = |from: usize, to: usize| -> String {
        let a = chars[from].0;
        let b = if to < chars.len() { chars[to].0 } else { s.len() };
        s[a..b].to_string()
    };
    while i < chars.len() {
        let (pos, c) = chars[i];
        let next = chars.get(i + 1).map(|x| x.1);
        let (kind, len) = match c {
            '(' => (TokenKind::BranchOpen, 1),
            ')' => (TokenKind::BranchClose, 1),
            '.' => (TokenKind::Dot, 1),
            '-' => (TokenKind::Bond(BondSymbol::Single), 1),
            '=' => (TokenKind::Bond(BondSymbol::Double), 1),
            '#' => (TokenKind::Bond(BondSymbol::Triple), 1),
            ':' => (TokenKind::Bond(BondSymbol::Aromatic), 1),
            '/' => (TokenKind::Bond(BondSymbol::Up), 1),
            '\\' => (TokenKind::Bond(BondSymbol::Down), 1),
            '0'..='9' => (TokenKind::RingClosure(c.to_digit(10).unwrap()), 1),
            '%' => {
                let d1 = chars.get(i + 1).and_then(|x| x.1.to_digit(10));
                let d2 = chars.get(i + 2).and_then(|x| x.1.to_digit(10));
                match (d1, d2) {
                    (Some(a), Some(b)) => (TokenKind::RingClosure(a * 10 + b), 3),
                    _ => return Err(ChemError::IllegalCharacter { position: pos, ch: c }),
                }
            }
            '[' => {
                let close = chars[i..].iter().position(|x| x.1 == ']');
                let Some(rel) = close else {
                    return Err(ChemError::UnterminatedBracket { position: pos });
                };
                let inner: String = chars[i + 1..i + rel].iter().map(|x| x.1).collect();
                (TokenKind::Atom(parse_bracket(&inner, pos)?), rel + 1)
            }
            'C' if next == Some('l') => (organic(17, false), 2),
            'B' if next == Some('r') => (organic(35, false), 2),
            'B' => (organic(5, false), 1),
            'C' => (organic(6, false), 1),
            'N' => (organic(7, false), 1),
            'O' => (organic(8, false), 1),
            'P' => (organic(15, false), 1),
            'S' => (organic(16, false), 1),
            'F' => (organic(9, false), 1),
            'I' => (organic(53, false), 1),
            'b' => (organic(5, true), 1),
            'c' => (organic(6, true), 1),
            'n' => (organic(7, true), 1),
            'o' => (organic(8, true), 1),
            'p' => (organic(15, true), 1),
            's' => (organic(16, true), 1),
            _ => return Err(ChemError::IllegalCharacter { position: pos, ch: c }),
        };
        out.push(Token { kind, text: text_of(i, i + len), position: pos });
        i += len;
    }
    Ok(out)
}

fn organic(z: u8, aromatic: bool) -> TokenKind {
    TokenKind::Atom(AtomSpec {
        element: z,
        aromatic,
        bracket: false,
        isotope: None,
        hcount: 0,
        charge: 0,
        chirality: None,
        atom_class: None,
    })
}

fn parse_bracket(inner: &str, position: usize) -> Result<AtomSpec, ChemError> {
    let bad = |reason: &str| ChemError::InvalidBracketAtom { position, reason: reason.to_string() };
    let b = inner.as_bytes();
    let mut i = 0;
    let digits = |i: &mut usize| -> Option<u32> {
        let start = *i;
        while *i < b.len() && b[*i].is_ascii_digit() {
            *i += 1;
        }
        if *i == start {
            None
        } else {
            inner[start..*i].parse().ok()
        }
    };
    let isotope = match digits(&mut i) {
        Some(v) if v == 0 || v > u16::MAX as u32 => return Err(bad("isotope out of range")),
        v => v.map(|v| v as u16),
    };
    if i >= b.len() {
        return Err(bad("missing element symbol"));
    }
    let (element, aromatic) = {
        let two = inner.get(i..i + 2);
        let one = &inner[i..i + 1];
        if let Some(t @ ("se" | "as" | "te")) = two {
            i += 2;
            (element::atomic_number(&capitalize(t)).unwrap(), true)
        } else if let Some(z) = match one {
            "b" => Some(5),
            "c" => Some(6),
            "n" => Some(7),
            "o" => Some(8),
            "p" => Some(15),
            "s" => Some(16),
            _ => None,
        } {
            i += 1;
            (z, true)
        } else if b[i].is_ascii_uppercase() {
            if let Some(z) = two.filter(|t| t.as_bytes()[1].is_ascii_lowercase()).and_then(element::atomic_number) {
                i += 2;
                (z, false)
            } else if let Some(z) = element::atomic_number(one) {
                i += 1;
                (z, false)
            } else {
                return Err(bad("unknown element"));
            }
        } else {
            return Err(bad("unknown element"));
        }
    };
    let mut chirality = None;
    if i < b.len() && b[i] == b'@' {
        let start = i;
        i += 1;
        if i < b.len() && b[i] == b'@' {
            i += 1;
        } else if let Some("TH" | "AL" | "SP" | "TB" | "OH") = inner.get(i..i + 2) {
            i += 2;
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
        }
        chirality = Some(inner[start..i].to_string());
    }
    let mut hcount = 0u8;
    if i < b.len() && b[i] == b'H' {
        i += 1;
        hcount = match digits(&mut i) {
            Some(v) if v > 9 => return Err(bad("hydrogen count out of range")),
            Some(v) => v as u8,
            None => 1,
        };
    }
    let mut charge = 0i32;
    if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
        let sign = if b[i] == b'+' { 1 } else { -1 };
        let sym = b[i];
        i += 1;
        if let Some(v) = digits(&mut i) {
            charge = sign * v as i32;
        } else {
            charge = sign;
            while i < b.len() && b[i] == sym {
                charge += sign;
                i += 1;
            }
        }
        if charge.abs() > 15 {
            return Err(bad("charge out of range"));
        }
    }
    let mut atom_class = None;
    if i < b.len() && b[i] == b':' {
        i += 1;
        atom_class = Some(digits(&mut i).ok_or_else(|| bad("missing atom class"))?);
    }
    if i != b.len() {
        return Err(bad(&format!("unexpected {:?}", &inner[i..])));
    }
    Ok(AtomSpec { element, aromatic, bracket: true, isotope, hcount, charge: charge as i8, chirality, atom_class })
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_ascii_uppercase().to_string() + c.as_str(),
        None => String::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lexemes(s: &str) -> Vec<String> {
        tokenize_smiles(s).unwrap().into_iter().map(|t| t.text).collect()
    }

    #[test]
    fn lexemes_follow_smiles_grammar() {
        assert_eq!(lexemes("C[C@H](N)C(=O)O"), ["C", "[C@H]", "(", "N", ")", "C", "(", "=", "O", ")", "O"]);
        assert_eq!(lexemes("ClCBr"), ["Cl", "C", "Br"]);
        assert_eq!(lexemes("c1cc%12ccc1"), ["c", "1", "c", "c", "%12", "c", "c", "c", "1"]);
    }

    #[test]
    fn bracket_fields() {
        let t = tokenize_smiles("[13CH3-:7]").unwrap();
        let TokenKind::Atom(a) = &t[0].kind else { panic!() };
        assert_eq!((a.element, a.isotope, a.hcount, a.charge, a.atom_class), (6, Some(13), 3, -1, Some(7)));
        let t = tokenize_smiles("[Fe++]").unwrap();
        let TokenKind::Atom(a) = &t[0].kind else { panic!() };
        assert_eq!(a.charge, 2);
        let t = tokenize_smiles("[se]").unwrap();
        let TokenKind::Atom(a) = &t[0].kind else { panic!() };
        assert!(a.aromatic && a.element == 34);
    }

    #[test]
    fn errors_carry_positions() {
        assert_eq!(tokenize_smiles("C$C"), Err(ChemError::IllegalCharacter { position: 1, ch: '$' }));
        assert_eq!(tokenize_smiles("CC[NH"), Err(ChemError::UnterminatedBracket { position: 2 }));
        assert!(matches!(tokenize_smiles("C[Xx]"), Err(ChemError::InvalidBracketAtom { position: 1, .. })));
    }
}
