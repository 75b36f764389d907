use std::fmt;

use num_integer::Integer;

use super::abelian::{AbelianElement, AbelianGroup};
use super::finite::FiniteGroup;
use crate::error::{Error, Result};

/// Countable discrete group at the level of detail the actions need.
#[derive(Clone, Debug, PartialEq)]
pub enum GroupSpec {
    FiniteTable(FiniteGroup),
    AbelianPresented(AbelianGroup),
    DirectSum(Vec<GroupSpec>),
}

/// Group element; the variant must match the group's.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Element {
    Index(usize),
    Exponents(Vec<i64>),
    Tuple(Vec<Element>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Order {
    Finite(u64),
    Infinite,
}

impl Order {
    pub fn finite(&self) -> Option<u64> {
        match self {
            Order::Finite(k) => Some(*k),
            Order::Infinite => None,
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Finite(k) => write!(f, "{k}"),
            Order::Infinite => write!(f, "inf"),
        }
    }
}

fn mismatch(g: &GroupSpec, e: &Element) -> Error {
    Error::UnknownElement(format!("{e:?} is not an element of a {} group", g.kind()))
}

impl GroupSpec {
    pub fn cyclic(n: usize) -> Self {
        GroupSpec::FiniteTable(FiniteGroup::cyclic(n))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            GroupSpec::FiniteTable(_) => "finite",
            GroupSpec::AbelianPresented(_) => "abelian",
            GroupSpec::DirectSum(_) => "direct-sum",
        }
    }

    pub fn identity(&self) -> Element {
        match self {
            GroupSpec::FiniteTable(g) => Element::Index(g.identity()),
            GroupSpec::AbelianPresented(a) => Element::Exponents(vec![0; a.rank()]),
            GroupSpec::DirectSum(parts) => Element::Tuple(parts.iter().map(|p| p.identity()).collect()),
        }
    }

    pub fn validate(&self, e: &Element) -> Result<()> {
        match (self, e) {
            (GroupSpec::FiniteTable(g), Element::Index(i)) if *i < g.order() => Ok(()),
            (GroupSpec::AbelianPresented(a), Element::Exponents(v)) if v.len() == a.rank() => Ok(()),
            (GroupSpec::DirectSum(parts), Element::Tuple(xs)) if parts.len() == xs.len() => {
                parts.iter().zip(xs).try_for_each(|(p, x)| p.validate(x))
            }
            _ => Err(mismatch(self, e)),
        }
    }

    pub fn mul(&self, a: &Element, b: &Element) -> Result<Element> {
        self.validate(a)?;
        self.validate(b)?;
        Ok(match (self, a, b) {
            (GroupSpec::FiniteTable(g), Element::Index(x), Element::Index(y)) => Element::Index(g.mul(*x, *y)),
            (GroupSpec::AbelianPresented(_), Element::Exponents(x), Element::Exponents(y)) => {
                Element::Exponents(x.iter().zip(y).map(|(p, q)| p + q).collect())
            }
            (GroupSpec::DirectSum(parts), Element::Tuple(x), Element::Tuple(y)) => Element::Tuple(
                parts.iter().zip(x.iter().zip(y)).map(|(p, (u, v))| p.mul(u, v)).collect::<Result<_>>()?,
            ),
            _ => unreachable!("validated"),
        })
    }

    pub fn inv(&self, a: &Element) -> Result<Element> {
        self.validate(a)?;
        Ok(match (self, a) {
            (GroupSpec::FiniteTable(g), Element::Index(x)) => Element::Index(g.inv(*x)),
            (GroupSpec::AbelianPresented(_), Element::Exponents(x)) => Element::Exponents(x.iter().map(|p| -p).collect()),
            (GroupSpec::DirectSum(parts), Element::Tuple(x)) => {
                Element::Tuple(parts.iter().zip(x).map(|(p, u)| p.inv(u)).collect::<Result<_>>()?)
            }
            _ => unreachable!("validated"),
        })
    }

    pub fn pow(&self, a: &Element, k: i64) -> Result<Element> {
        self.validate(a)?;
        Ok(match (self, a) {
            (GroupSpec::FiniteTable(g), Element::Index(x)) => Element::Index(g.pow(*x, k)),
            (GroupSpec::AbelianPresented(_), Element::Exponents(x)) => Element::Exponents(x.iter().map(|p| p * k).collect()),
            (GroupSpec::DirectSum(parts), Element::Tuple(x)) => {
                Element::Tuple(parts.iter().zip(x).map(|(p, u)| p.pow(u, k)).collect::<Result<_>>()?)
            }
            _ => unreachable!("validated"),
        })
    }

    /// Image of an abelian element in `⊕(Q ⊕ Q/Z)`.
    pub fn frame(&self, a: &Element) -> Result<AbelianElement> {
        match (self, a) {
            (GroupSpec::AbelianPresented(g), Element::Exponents(x)) => g.frame_of(x),
            _ => Err(mismatch(self, a)),
        }
    }

    pub fn equal(&self, a: &Element, b: &Element) -> Result<bool> {
        self.validate(a)?;
        self.validate(b)?;
        Ok(match (self, a, b) {
            (GroupSpec::FiniteTable(_), _, _) => a == b,
            (GroupSpec::AbelianPresented(g), Element::Exponents(x), Element::Exponents(y)) => g.frame_of(x)? == g.frame_of(y)?,
            (GroupSpec::DirectSum(parts), Element::Tuple(x), Element::Tuple(y)) => {
                let mut all = true;
                for (p, (u, v)) in parts.iter().zip(x.iter().zip(y)) {
                    all &= p.equal(u, v)?;
                }
                all
            }
            _ => unreachable!("validated"),
        })
    }

    pub fn is_identity(&self, a: &Element) -> Result<bool> {
        self.equal(a, &self.identity())
    }

    pub fn order_of(&self, a: &Element) -> Result<Order> {
        self.validate(a)?;
        Ok(match (self, a) {
            (GroupSpec::FiniteTable(g), Element::Index(x)) => Order::Finite(g.element_order(*x) as u64),
            (GroupSpec::AbelianPresented(g), Element::Exponents(x)) => match g.frame_of(x)?.order() {
                Some(k) => Order::Finite(k),
                None => Order::Infinite,
            },
            (GroupSpec::DirectSum(parts), Element::Tuple(x)) => {
                let mut k: u64 = 1;
                for (p, u) in parts.iter().zip(x) {
                    match p.order_of(u)? {
                        Order::Finite(m) => k = k.lcm(&m),
                        Order::Infinite => return Ok(Order::Infinite),
                    }
                }
                Order::Finite(k)
            }
            _ => unreachable!("validated"),
        })
    }

    /// Group order, `None` when infinite.
    pub fn order(&self) -> Option<usize> {
        self.finite_elements().map(|v| v.len())
    }

    pub fn finite_elements(&self) -> Option<Vec<Element>> {
        match self {
            GroupSpec::FiniteTable(g) => Some((0..g.order()).map(Element::Index).collect()),
            GroupSpec::AbelianPresented(a) => a.finite_elements().map(|v| v.into_iter().map(Element::Exponents).collect()),
            GroupSpec::DirectSum(parts) => {
                let mut out: Vec<Vec<Element>> = vec![vec![]];
                for p in parts {
                    let els = p.finite_elements()?;
                    out = out.into_iter().flat_map(|v| els.iter().map(move |e| [v.clone(), vec![e.clone()]].concat())).collect();
                }
                Some(out.into_iter().map(Element::Tuple).collect())
            }
        }
    }

    /// Generating set: table groups list every element; others list their generators.
    pub fn generators(&self) -> Vec<Element> {
        match self {
            GroupSpec::FiniteTable(g) => (0..g.order()).filter(|&x| x != g.identity()).map(Element::Index).collect(),
            GroupSpec::AbelianPresented(a) => (0..a.rank())
                .map(|i| {
                    let mut v = vec![0; a.rank()];
                    v[i] = 1;
                    Element::Exponents(v)
                })
                .collect(),
            GroupSpec::DirectSum(parts) => {
                let id: Vec<Element> = parts.iter().map(|p| p.identity()).collect();
                let mut out = Vec::new();
                for (i, p) in parts.iter().enumerate() {
                    for g in p.generators() {
                        let mut t = id.clone();
                        t[i] = g;
                        out.push(Element::Tuple(t));
                    }
                }
                out
            }
        }
    }

    pub fn is_abelian(&self) -> bool {
        match self {
            GroupSpec::FiniteTable(g) => g.is_abelian(),
            GroupSpec::AbelianPresented(_) => true,
            GroupSpec::DirectSum(parts) => parts.iter().all(|p| p.is_abelian()),
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.order() == Some(1)
    }

    /// Finite model: a table group whose element `i` is `elements[i]`.
    pub fn finite_model(&self) -> Option<(FiniteGroup, Vec<Element>)> {
        if let GroupSpec::FiniteTable(g) = self {
            return Some((g.clone(), (0..g.order()).map(Element::Index).collect()));
        }
        let els = self.finite_elements()?;
        let find = |x: &Element| els.iter().position(|y| self.equal(x, y).unwrap_or(false));
        let mut table = Vec::with_capacity(els.len());
        for a in &els {
            let mut row = Vec::with_capacity(els.len());
            for b in &els {
                row.push(find(&self.mul(a, b).ok()?)?);
            }
            table.push(row);
        }
        let names = els.iter().map(|e| self.format_element(e)).collect();
        let g = FiniteGroup::from_table(table).ok()?.with_names(names).ok()?;
        Some((g, els))
    }

    /// Parse an element: an index or element name for table groups,
    /// comma-separated exponents for presented groups, `|`-separated parts for sums.
    pub fn parse_element(&self, s: &str) -> Result<Element> {
        let t = s.trim().trim_start_matches('(').trim_end_matches(')');
        let bad = || Error::UnknownElement(s.to_string());
        let e = match self {
            GroupSpec::FiniteTable(g) => match g.index_of_name(t) {
                Some(i) => Element::Index(i),
                None => Element::Index(t.parse().map_err(|_| bad())?),
            },
            GroupSpec::AbelianPresented(_) => Element::Exponents(
                t.split(',').map(|x| x.trim().parse::<i64>().map_err(|_| bad())).collect::<Result<_>>()?,
            ),
            GroupSpec::DirectSum(parts) => {
                let pieces: Vec<&str> = t.split('|').collect();
                if pieces.len() != parts.len() {
                    return Err(bad());
                }
                Element::Tuple(parts.iter().zip(pieces).map(|(p, x)| p.parse_element(x)).collect::<Result<_>>()?)
            }
        };
        self.validate(&e)?;
        Ok(e)
    }

    pub fn format_element(&self, e: &Element) -> String {
        match (self, e) {
            (GroupSpec::FiniteTable(g), Element::Index(i)) if *i < g.order() => g.name(*i).to_string(),
            (GroupSpec::DirectSum(parts), Element::Tuple(xs)) => {
                parts.iter().zip(xs).map(|(p, x)| p.format_element(x)).collect::<Vec<_>>().join("|")
            }
            (_, Element::Index(i)) => i.to_string(),
            (_, Element::Exponents(v)) => v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","),
            (_, Element::Tuple(xs)) => xs.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join("|"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direct_sum_orders() {
        let g = GroupSpec::DirectSum(vec![GroupSpec::cyclic(2), GroupSpec::cyclic(3)]);
        let x = g.parse_element("1|1").unwrap();
        assert_eq!(g.order_of(&x).unwrap(), Order::Finite(6));
        assert_eq!(g.order(), Some(6));
        assert_eq!(g.generators().len(), 3);
        let (fg, els) = g.finite_model().unwrap();
        assert!(fg.is_abelian());
        assert_eq!(els.len(), 6);
    }

    #[test]
    fn presented_equality_uses_frames() {
        let g = GroupSpec::AbelianPresented(AbelianGroup::from_orders(&[Some(2), None]).unwrap());
        let a = g.parse_element("2,0").unwrap();
        assert!(g.is_identity(&a).unwrap());
        assert_eq!(g.order_of(&g.parse_element("0,1").unwrap()).unwrap(), Order::Infinite);
        assert!(g.parse_element("1").is_err());
    }
}
