//! Just enough SMILES to count atoms: organic-subset and bracket atoms,
//! bonds, branches, ring closures, and dot-disconnected parts. No
//! stereochemistry checks and no aromaticity perception.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SmilesError {
    #[error("empty SMILES")]
    Empty,
    #[error("unexpected {0:?} at byte {1}")]
    Unexpected(char, usize),
    #[error("unclosed bracket atom at byte {0}")]
    UnclosedBracket(usize),
    #[error("unbalanced branch at byte {0}")]
    UnbalancedBranch(usize),
    #[error("ring bond {0} never closed")]
    OpenRing(u32),
}

struct Atom {
    symbol: String,
    aromatic: bool,
    /// `Some` for bracket atoms, which carry their hydrogens explicitly.
    explicit_h: Option<u32>,
    /// Bond order sum, doubled so aromatic bonds stay integral.
    bonds2: u32,
}

const ORGANIC: [&str; 10] = ["Cl", "Br", "B", "C", "N", "O", "P", "S", "F", "I"];
const AROMATIC: [&str; 6] = ["b", "c", "n", "o", "p", "s"];

fn default_valences(sym: &str) -> &'static [u32] {
    match sym {
        "B" => &[3],
        "C" => &[4],
        "N" | "P" => &[3, 5],
        "O" => &[2],
        "S" => &[2, 4, 6],
        _ => &[1],
    }
}

fn implicit_h(a: &Atom) -> u32 {
    if let Some(h) = a.explicit_h {
        return h;
    }
    // aromatic atoms spend one unit on the delocalized system
    let used = a.bonds2.div_ceil(2);
    let vals = default_valences(&a.symbol);
    let target = vals.iter().copied().find(|v| *v >= used).unwrap_or(used);
    target - used
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn parse(s: &str) -> Result<Vec<Atom>, SmilesError> {
    if s.is_empty() {
        return Err(SmilesError::Empty);
    }
    let b = s.as_bytes();
    let mut atoms: Vec<Atom> = Vec::new();
    let mut prev: Option<usize> = None;
    let mut stack: Vec<Option<usize>> = Vec::new();
    let mut rings: BTreeMap<u32, (usize, u32)> = BTreeMap::new();
    let mut bond: Option<u32> = None;
    let mut i = 0;
    let order2 = |bond: Option<u32>, a: &Atom, c: &Atom| match bond {
        Some(o) => o,
        None if a.aromatic && c.aromatic => 3,
        None => 2,
    };
    while i < b.len() {
        let ch = b[i] as char;
        let start = i;
        let new_atom = match ch {
            '(' => {
                if prev.is_none() {
                    return Err(SmilesError::UnbalancedBranch(i));
                }
                stack.push(prev);
                i += 1;
                continue;
            }
            ')' => {
                prev = stack.pop().ok_or(SmilesError::UnbalancedBranch(i))?;
                i += 1;
                continue;
            }
            '-' | '/' | '\\' => Some(2),
            '=' => Some(4),
            '#' => Some(6),
            '$' => Some(8),
            ':' => Some(3),
            '.' => {
                prev = None;
                i += 1;
                continue;
            }
            _ => None,
        };
        if let Some(o) = new_atom {
            if bond.is_some() || prev.is_none() {
                return Err(SmilesError::Unexpected(ch, i));
            }
            bond = Some(o);
            i += 1;
            continue;
        }
        if ch.is_ascii_digit() || ch == '%' {
            let (num, len) = if ch == '%' {
                let d = b.get(i + 1..i + 3).filter(|d| d.iter().all(u8::is_ascii_digit));
                let d = d.ok_or(SmilesError::Unexpected('%', i))?;
                (u32::from(d[0] - b'0') * 10 + u32::from(d[1] - b'0'), 3)
            } else {
                (u32::from(b[i] - b'0'), 1)
            };
            let cur = prev.ok_or(SmilesError::Unexpected(ch, i))?;
            if let Some((other, o)) = rings.remove(&num) {
                let o = bond.or(Some(o).filter(|o| *o != 0));
                let o2 = order2(o, &atoms[cur], &atoms[other]);
                atoms[cur].bonds2 += o2;
                atoms[other].bonds2 += o2;
            } else {
                rings.insert(num, (cur, bond.unwrap_or(0)));
            }
            bond = None;
            i += len;
            continue;
        }
        let atom = if ch == '[' {
            let end = s[i..].find(']').ok_or(SmilesError::UnclosedBracket(i))? + i;
            let atom = bracket_atom(&s[i + 1..end]).ok_or(SmilesError::Unexpected('[', i))?;
            i = end + 1;
            atom
        } else {
            let rest = &s[i..];
            let sym = ORGANIC
                .iter()
                .chain(AROMATIC.iter())
                .find(|p| rest.starts_with(**p))
                .ok_or(SmilesError::Unexpected(rest.chars().next().unwrap_or(ch), start))?;
            i += sym.len();
            Atom {
                symbol: capitalize(sym),
                aromatic: sym.chars().all(|c| c.is_ascii_lowercase()),
                explicit_h: None,
                bonds2: 0,
            }
        };
        atoms.push(atom);
        let cur = atoms.len() - 1;
        if let Some(p) = prev {
            let o2 = order2(bond, &atoms[p], &atoms[cur]);
            atoms[p].bonds2 += o2;
            atoms[cur].bonds2 += o2;
        } else if bond.is_some() {
            return Err(SmilesError::Unexpected(ch, start));
        }
        bond = None;
        prev = Some(cur);
    }
    if let Some((&n, _)) = rings.iter().next() {
        return Err(SmilesError::OpenRing(n));
    }
    if !stack.is_empty() {
        return Err(SmilesError::UnbalancedBranch(s.len()));
    }
    if bond.is_some() || atoms.is_empty() {
        return Err(SmilesError::Unexpected(s.chars().last().unwrap_or(' '), s.len()));
    }
    Ok(atoms)
}

/// `[13CH3+]`-style atom: isotope, symbol, chirality, H count, charge, class.
fn bracket_atom(body: &str) -> Option<Atom> {
    let rest = body.trim_start_matches(|c: char| c.is_ascii_digit());
    let mut chars = rest.char_indices().peekable();
    let (_, first) = chars.next()?;
    if !first.is_ascii_alphabetic() {
        return None;
    }
    let mut end = first.len_utf8();
    if first.is_ascii_uppercase() {
        if let Some(&(j, c)) = chars.peek() {
            if c.is_ascii_lowercase() && c != 'H' {
                end = j + 1;
            }
        }
    }
    let sym = &rest[..end];
    let mut tail = &rest[end..];
    tail = tail.trim_start_matches('@');
    let mut h = 0;
    if let Some(t) = tail.strip_prefix('H') {
        let digits = t.len() - t.trim_start_matches(|c: char| c.is_ascii_digit()).len();
        h = if digits == 0 { 1 } else { t[..digits].parse().ok()? };
        tail = &t[digits..];
    }
    let ok = tail.chars().all(|c| matches!(c, '+' | '-' | ':') || c.is_ascii_digit());
    if !ok || sym.len() > 2 {
        return None;
    }
    Some(Atom {
        symbol: capitalize(sym),
        aromatic: sym.chars().all(|c| c.is_ascii_lowercase()),
        explicit_h: Some(h),
        bonds2: 0,
    })
}

/// Element counts, hydrogens included.
pub fn element_counts(s: &str) -> Result<BTreeMap<String, u32>, SmilesError> {
    let atoms = parse(s)?;
    let mut counts = BTreeMap::new();
    for a in &atoms {
        *counts.entry(a.symbol.clone()).or_insert(0) += 1;
        let h = implicit_h(a);
        if h > 0 {
            *counts.entry(String::from("H")).or_insert(0) += h;
        }
    }
    Ok(counts)
}

pub fn is_smiles(s: &str) -> bool {
    parse(s).is_ok()
}

/// Hill-order formula: C, then H, then the rest alphabetically; without
/// carbon, everything alphabetically.
pub fn hill_formula(s: &str) -> Result<String, SmilesError> {
    let mut counts = element_counts(s)?;
    let mut out = String::new();
    let mut put = |sym: &str, n: u32| {
        out.push_str(sym);
        if n > 1 {
            let _ = write!(out, "{n}");
        }
    };
    if let Some(c) = counts.remove("C") {
        put("C", c);
        if let Some(h) = counts.remove("H") {
            put("H", h);
        }
    }
    for (sym, n) in &counts {
        put(sym, *n);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formulas() {
        let cases = [
            ("C", "CH4"),
            ("CCO", "C2H6O"),
            ("c1ccccc1", "C6H6"),
            ("c1ccncc1", "C5H5N"),
            ("CC(=O)O", "C2H4O2"),
            ("O=C=O", "CO2"),
            ("[Na+].[Cl-]", "ClNa"),
            ("C1CC1", "C3H6"),
            ("[nH]1cccc1", "C4H5N"),
            ("CS(=O)(=O)C", "C2H6O2S"),
            ("N#N", "N2"),
            ("O", "H2O"),
            ("C%10CC%10", "C3H6"),
            ("[13CH4]", "CH4"),
            ("BrCCl", "CH2BrCl"),
        ];
        for (smi, f) in cases {
            assert_eq!(hill_formula(smi).unwrap(), f, "{smi}");
        }
    }

    #[test]
    fn rejects() {
        for bad in ["", "K2CO3", "THF", "C(", "C)", "C1CC", "=C", "C=", "[C", "NaBH4", "Pd/C", "H2"] {
            assert!(!is_smiles(bad), "{bad}");
        }
    }
}
