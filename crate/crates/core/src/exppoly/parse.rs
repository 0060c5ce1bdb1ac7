use super::{CPoly, DataAtom, ExpPolyError, ExpPolynomial, ExponentKey};
use crate::C64;

pub(super) fn parse_dump(n: usize, text: &str) -> Result<ExpPolynomial, ExpPolyError> {
    let mut out = ExpPolynomial::zero(n);
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let err = |reason: &str| ExpPolyError::Parse {
            line: idx + 1,
            reason: reason.to_string(),
        };
        let set = between(line, "Y={", "}").ok_or_else(|| err("missing Y"))?;
        let mut ys = Vec::new();
        for part in set.split(',').filter(|p| !p.is_empty()) {
            let y: usize = part.parse().map_err(|_| err("bad index"))?;
            if y >= n {
                return Err(err("index out of range"));
            }
            ys.push(y);
        }
        let key = ExponentKey::from_elements(n, &ys);
        let atom_text = between(line, "atom=<", ">").ok_or_else(|| err("missing atom"))?;
        let atom = parse_atom(atom_text).ok_or_else(|| err("bad atom"))?;
        let poly_text = line
            .split_once("poly=")
            .map(|(_, r)| r)
            .ok_or_else(|| err("missing poly"))?;
        let poly = parse_poly(poly_text).ok_or_else(|| err("bad poly"))?;
        out = out.try_add(&ExpPolynomial::term(key, atom, poly))?;
    }
    Ok(out)
}

fn between<'a>(s: &'a str, open: &str, close: &str) -> Option<&'a str> {
    let start = s.find(open)? + open.len();
    let end = s[start..].find(close)? + start;
    Some(&s[start..end])
}

fn parse_atom(s: &str) -> Option<DataAtom> {
    if s == "none" {
        return Some(DataAtom::None);
    }
    let (name, rest) = s.split_once('(')?;
    let k: usize = rest.strip_suffix(')')?.parse().ok()?;
    match name {
        "q0" => Some(DataAtom::Q0(k)),
        "qT" => Some(DataAtom::QT(k)),
        "h" => Some(DataAtom::H(k)),
        _ => None,
    }
}

fn parse_poly(s: &str) -> Option<CPoly> {
    let inner = s.trim().strip_prefix('[')?.strip_suffix(']')?;
    let mut coeffs = Vec::new();
    for pair in inner.split(')').filter(|p| !p.trim().is_empty()) {
        let pair = pair.trim_start_matches(',').trim_start_matches('(');
        let (re, im) = pair.split_once(',')?;
        coeffs.push(C64::new(re.parse().ok()?, im.parse().ok()?));
    }
    Some(CPoly::from_coeffs(coeffs))
}
