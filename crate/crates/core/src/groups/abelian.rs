use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

/// A real parameter: exact rational, square root of an integer, or a plain float.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Real {
    Rational(Rational64),
    Sqrt(u64),
    Float(f64),
}

impl Real {
    pub fn value(&self) -> f64 {
        match self {
            Real::Rational(r) => r.to_f64().unwrap_or(f64::NAN),
            Real::Sqrt(k) => (*k as f64).sqrt(),
            Real::Float(x) => *x,
        }
    }

    pub fn as_rational(&self) -> Option<Rational64> {
        match self {
            Real::Rational(r) => Some(*r),
            Real::Sqrt(k) => {
                let s = (*k as f64).sqrt().round() as u64;
                (s * s == *k).then(|| Rational64::from_integer(s as i64))
            }
            Real::Float(_) => None,
        }
    }

    /// True only when irrationality is certain (square root of a non-square).
    pub fn is_known_irrational(&self) -> bool {
        matches!(self, Real::Sqrt(_)) && self.as_rational().is_none()
    }

    /// Parse `p/q`, an integer, `sqrtK`, `sqrt(K)` or a decimal.
    pub fn parse(s: &str) -> Result<Real> {
        let t = s.trim();
        let bad = || Error::InvalidArgument(format!("cannot parse real number '{t}'"));
        if let Some(rest) = t.strip_prefix("sqrt") {
            let k = rest.trim_start_matches('(').trim_end_matches(')').trim();
            return k.parse::<u64>().map(Real::Sqrt).map_err(|_| bad());
        }
        if let Some((p, q)) = t.split_once('/') {
            let p: i64 = p.trim().parse().map_err(|_| bad())?;
            let q: i64 = q.trim().parse().map_err(|_| bad())?;
            if q == 0 {
                return Err(bad());
            }
            return Ok(Real::Rational(Rational64::new(p, q)));
        }
        if let Ok(i) = t.parse::<i64>() {
            return Ok(Real::Rational(Rational64::from_integer(i)));
        }
        t.parse::<f64>().map(Real::Float).map_err(|_| bad())
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Real::Rational(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Real::Rational(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Real::Sqrt(k) => write!(f, "sqrt{k}"),
            Real::Float(x) => write!(f, "{x}"),
        }
    }
}

/// Element of a direct sum of copies of `Q ⊕ Q/Z`, indexed by coordinate.
///
/// Each coordinate holds `(q, r)` with `q` rational and `r` in `[0, 1)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AbelianElement {
    coords: BTreeMap<usize, (Rational64, Rational64)>,
}

fn wrap(r: Rational64) -> Rational64 {
    r - r.floor()
}

impl AbelianElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn coordinate(c: usize, q: Rational64, r: Rational64) -> Self {
        let mut e = Self::default();
        e.set(c, q, wrap(r));
        e
    }

    fn set(&mut self, c: usize, q: Rational64, r: Rational64) {
        if q.is_zero() && r.is_zero() {
            self.coords.remove(&c);
        } else {
            self.coords.insert(c, (q, r));
        }
    }

    pub fn coords(&self) -> &BTreeMap<usize, (Rational64, Rational64)> {
        &self.coords
    }

    pub fn get(&self, c: usize) -> (Rational64, Rational64) {
        self.coords.get(&c).copied().unwrap_or((Rational64::zero(), Rational64::zero()))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&c, &(q, r)) in &other.coords {
            let (q0, r0) = out.get(c);
            out.set(c, q0 + q, wrap(r0 + r));
        }
        out
    }

    pub fn times(&self, k: i64) -> Self {
        let mut out = Self::default();
        let k = Rational64::from_integer(k);
        for (&c, &(q, r)) in &self.coords {
            out.set(c, q * k, wrap(r * k));
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.coords.is_empty()
    }

    /// `None` for infinite order.
    pub fn order(&self) -> Option<u64> {
        let mut k: i64 = 1;
        for &(q, r) in self.coords.values() {
            if !q.is_zero() {
                return None;
            }
            k = k.lcm(r.denom());
        }
        Some(k as u64)
    }
}

/// Generator of a presented abelian group.
#[derive(Clone, Debug, PartialEq)]
pub struct Generator {
    pub order: Option<u64>,
    pub frame: AbelianElement,
    /// Flow angle used for the rational-coordinate part; defaults to the action's choice.
    pub theta: Option<Real>,
}

/// Countable abelian group presented by generators embedded in `⊕(Q ⊕ Q/Z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AbelianGroup {
    generators: Vec<Generator>,
}

impl AbelianGroup {
    pub fn new(generators: Vec<Generator>) -> Result<Self> {
        for (i, g) in generators.iter().enumerate() {
            if g.frame.order() != g.order {
                return Err(Error::InvalidGroup(format!("generator {i} has inconsistent order")));
            }
            if g.order == Some(0) {
                return Err(Error::InvalidGroup("order must be positive".into()));
            }
        }
        Ok(AbelianGroup { generators })
    }

    /// Generators of the given orders (`None` for infinite), each on its own coordinate.
    pub fn from_orders(orders: &[Option<u64>]) -> Result<Self> {
        let gens = orders
            .iter()
            .enumerate()
            .map(|(c, o)| {
                let frame = match o {
                    Some(k) if *k > 0 => AbelianElement::coordinate(c, Rational64::zero(), Rational64::new(1, *k as i64)),
                    Some(_) => AbelianElement::zero(),
                    None => AbelianElement::coordinate(c, Rational64::from_integer(1), Rational64::zero()),
                };
                Generator { order: *o, frame, theta: None }
            })
            .collect();
        Self::new(gens)
    }

    pub fn with_theta(mut self, i: usize, theta: Real) -> Self {
        self.generators[i].theta = Some(theta);
        self
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn frame_of(&self, exps: &[i64]) -> Result<AbelianElement> {
        if exps.len() != self.rank() {
            return Err(Error::UnknownElement(format!("expected {} exponents, found {}", self.rank(), exps.len())));
        }
        Ok(self.generators.iter().zip(exps).fold(AbelianElement::zero(), |acc, (g, &e)| acc.add(&g.frame.times(e))))
    }

    /// All elements when the group is finite, as exponent vectors in lexicographic order.
    pub fn finite_elements(&self) -> Option<Vec<Vec<i64>>> {
        let orders: Option<Vec<u64>> = self.generators.iter().map(|g| g.order).collect();
        let orders = orders?;
        let mut out: Vec<Vec<i64>> = vec![vec![]];
        for &k in &orders {
            out = out.into_iter().flat_map(|v| (0..k as i64).map(move |e| [v.clone(), vec![e]].concat())).collect();
        }
        // drop duplicates that name the same element
        let mut seen: Vec<AbelianElement> = Vec::new();
        let mut uniq = Vec::new();
        for v in out {
            let f = self.frame_of(&v).ok()?;
            if !seen.contains(&f) {
                seen.push(f);
                uniq.push(v);
            }
        }
        Some(uniq)
    }

    /// Coordinates used by some generator, with the part (`false` = Q, `true` = Q/Z) that is nonzero.
    pub fn slots(&self) -> Vec<(usize, bool)> {
        let mut out = std::collections::BTreeSet::new();
        for g in &self.generators {
            for (&c, &(q, r)) in g.frame.coords() {
                if !q.is_zero() {
                    out.insert((c, false));
                }
                if !r.is_zero() {
                    out.insert((c, true));
                }
            }
        }
        out.into_iter().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders_from_frames() {
        let g = AbelianGroup::from_orders(&[Some(2), Some(3), None]).unwrap();
        assert_eq!(g.frame_of(&[1, 1, 0]).unwrap().order(), Some(6));
        assert_eq!(g.frame_of(&[2, 3, 0]).unwrap(), AbelianElement::zero());
        assert_eq!(g.frame_of(&[0, 0, 2]).unwrap().order(), None);
        assert_eq!(g.slots(), vec![(0, true), (1, true), (2, false)]);
    }

    #[test]
    fn finite_enumeration() {
        let g = AbelianGroup::from_orders(&[Some(2), Some(3)]).unwrap();
        assert_eq!(g.finite_elements().unwrap().len(), 6);
        assert!(AbelianGroup::from_orders(&[None]).unwrap().finite_elements().is_none());
    }

    #[test]
    fn parse_reals() {
        assert_eq!(Real::parse("sqrt2").unwrap(), Real::Sqrt(2));
        assert!(Real::parse("sqrt(4)").unwrap().as_rational().is_some());
        assert_eq!(Real::parse("1/3").unwrap(), Real::Rational(Rational64::new(1, 3)));
        assert!(Real::Sqrt(2).is_known_irrational());
        assert!(!Real::Sqrt(9).is_known_irrational());
        assert!(Real::parse("x").is_err());
    }
}
