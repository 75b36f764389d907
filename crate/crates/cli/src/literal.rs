//! Scalar and matrix literals: `a+bi` decimals and exact phase tokens `ph(p/q)`.

use num_rational::Rational64;
use serde::Deserialize;
use uhf_core::algebra::{ComplexMatrix, ExactMatrix, Phase, UnitaryMatrix, C64};

/// A matrix entry as written in a document.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Int(i64),
    Float(f64),
    Text(String),
}

/// Parsed entry; exact phases stay exact.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Entry {
    Zero,
    Phase(Phase),
    Complex(C64),
}

impl Entry {
    pub fn value(&self) -> C64 {
        match self {
            Entry::Zero => C64::new(0.0, 0.0),
            Entry::Phase(p) => p.to_complex(),
            Entry::Complex(z) => *z,
        }
    }
}

fn parse_ratio(s: &str) -> Result<Rational64, String> {
    let t = s.trim();
    let bad = || format!("bad phase '{t}'");
    match t.split_once('/') {
        Some((p, q)) => {
            let p: i64 = p.trim().parse().map_err(|_| bad())?;
            let q: i64 = q.trim().parse().map_err(|_| bad())?;
            if q == 0 {
                return Err(bad());
            }
            Ok(Rational64::new(p, q))
        }
        None => Ok(Rational64::from_integer(t.parse().map_err(|_| bad())?)),
    }
}

/// Position of the sign separating real and imaginary parts, if any.
fn split_point(s: &str) -> Option<usize> {
    let b = s.as_bytes();
    (1..b.len()).rev().find(|&i| (b[i] == b'+' || b[i] == b'-') && !matches!(b[i - 1], b'e' | b'E'))
}

fn parse_float(s: &str) -> Result<f64, String> {
    s.parse::<f64>().map_err(|_| format!("bad number '{s}'"))
}

fn parse_imag(s: &str) -> Result<f64, String> {
    match s {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        _ => parse_float(s),
    }
}

pub fn parse_entry(s: &str) -> Result<Entry, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if let Some(inner) = t.strip_prefix("ph(").and_then(|r| r.strip_suffix(')')) {
        return Ok(Entry::Phase(Phase::rational(parse_ratio(inner)?)));
    }
    if t.is_empty() {
        return Err("empty entry".into());
    }
    let z = match t.strip_suffix('i') {
        Some(body) => match split_point(body) {
            Some(k) => C64::new(parse_float(&body[..k])?, parse_imag(&body[k..])?),
            None => C64::new(0.0, parse_imag(body)?),
        },
        None => C64::new(parse_float(&t)?, 0.0),
    };
    Ok(classify(z))
}

/// `±1` and `±i` written as decimals become exact phases.
fn classify(z: C64) -> Entry {
    if z == C64::new(0.0, 0.0) {
        return Entry::Zero;
    }
    for (w, p) in [(C64::new(1.0, 0.0), 0), (C64::new(0.0, 1.0), 1), (C64::new(-1.0, 0.0), 2), (C64::new(0.0, -1.0), 3)] {
        if z == w {
            return Entry::Phase(Phase::exact(p, 4));
        }
    }
    Entry::Complex(z)
}

pub fn scalar_entry(x: &Scalar) -> Result<Entry, String> {
    match x {
        Scalar::Int(i) => Ok(classify(C64::new(*i as f64, 0.0))),
        Scalar::Float(f) => Ok(classify(C64::new(*f, 0.0))),
        Scalar::Text(s) => parse_entry(s),
    }
}

/// Unitary from rows of entries; monomial matrices of exact phases stay exact.
pub fn unitary_literal(rows: &[Vec<Scalar>]) -> Result<UnitaryMatrix, String> {
    let n = rows.len();
    if n == 0 {
        return Err("empty matrix".into());
    }
    let mut entries = Vec::with_capacity(n);
    for (i, r) in rows.iter().enumerate() {
        if r.len() != n {
            return Err(format!("row {i} has {} entries, expected {n}", r.len()));
        }
        entries.push(r.iter().map(scalar_entry).collect::<Result<Vec<_>, _>>()?);
    }
    if let Some(u) = monomial(&entries) {
        return Ok(u);
    }
    let m = ComplexMatrix::from_fn(n, n, |i, j| entries[i][j].value());
    UnitaryMatrix::new(m).map_err(|e| e.to_string())
}

fn monomial(entries: &[Vec<Entry>]) -> Option<UnitaryMatrix> {
    let n = entries.len();
    let mut perm = vec![usize::MAX; n];
    let mut phases = vec![Phase::ONE; n];
    for (i, row) in entries.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            match e {
                Entry::Zero => {}
                Entry::Phase(p) if p.is_exact() && perm[j] == usize::MAX => {
                    perm[j] = i;
                    phases[j] = *p;
                }
                _ => return None,
            }
        }
    }
    if perm.contains(&usize::MAX) {
        return None;
    }
    let mut seen = vec![false; n];
    for &p in &perm {
        if std::mem::replace(&mut seen[p], true) {
            return None;
        }
    }
    UnitaryMatrix::from_exact(ExactMatrix::monomial(&perm, &phases)?).ok()
}

/// Diagonal unitary from a list of entries, each of modulus one.
pub fn diagonal_literal(entries: &[Scalar]) -> Result<UnitaryMatrix, String> {
    let mut phases = Vec::with_capacity(entries.len());
    for x in entries {
        let p = match scalar_entry(x)? {
            Entry::Phase(p) => p,
            Entry::Complex(z) if (z.norm() - 1.0).abs() < 1e-12 => Phase::of_complex(z),
            _ => return Err(format!("diagonal entry {x:?} does not have modulus one")),
        };
        phases.push(p);
    }
    if phases.is_empty() {
        return Err("empty diagonal".into());
    }
    Ok(UnitaryMatrix::diagonal(&phases))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entries() {
        assert_eq!(parse_entry("ph(1/2)").unwrap(), Entry::Phase(Phase::exact(1, 2)));
        assert_eq!(parse_entry("-1").unwrap(), Entry::Phase(Phase::exact(1, 2)));
        assert_eq!(parse_entry("0").unwrap(), Entry::Zero);
        assert_eq!(parse_entry("0.5-0.25i").unwrap(), Entry::Complex(C64::new(0.5, -0.25)));
        assert_eq!(parse_entry("-i").unwrap(), Entry::Phase(Phase::exact(3, 4)));
        assert_eq!(parse_entry("1e-3+2i").unwrap(), Entry::Complex(C64::new(1e-3, 2.0)));
        assert_eq!(parse_entry("2.5i").unwrap(), Entry::Complex(C64::new(0.0, 2.5)));
        assert!(parse_entry("ph(1/0)").is_err());
        assert!(parse_entry("abc").is_err());
    }

    #[test]
    fn monomial_is_exact() {
        let rows = vec![
            vec![Scalar::Int(0), Scalar::Text("ph(1/3)".into())],
            vec![Scalar::Int(1), Scalar::Int(0)],
        ];
        let u = unitary_literal(&rows).unwrap();
        assert!(u.exact().is_some());
        assert_eq!(u.matrix()[(0, 1)], Phase::exact(1, 3).to_complex());
    }

    #[test]
    fn dense_hadamard() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let rows = vec![vec![Scalar::Float(h), Scalar::Float(h)], vec![Scalar::Float(h), Scalar::Float(-h)]];
        assert!(unitary_literal(&rows).unwrap().exact().is_none());
        let bad = vec![vec![Scalar::Int(1), Scalar::Int(1)], vec![Scalar::Int(0), Scalar::Int(1)]];
        assert!(unitary_literal(&bad).is_err());
    }
}
