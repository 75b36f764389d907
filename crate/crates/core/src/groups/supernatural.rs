use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_integer::Integer;
use serde::Serialize;

use crate::error::{Error, Result};

/// Prime factorization as `(p, exponent)` pairs.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Set of primes carrying infinite multiplicity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum PrimeSet {
    Finite(BTreeSet<u64>),
    /// All primes except the listed ones.
    Cofinite(BTreeSet<u64>),
}

impl PrimeSet {
    pub fn contains(&self, p: u64) -> bool {
        match self {
            PrimeSet::Finite(s) => s.contains(&p),
            PrimeSet::Cofinite(ex) => !ex.contains(&p),
        }
    }

    fn union(&self, other: &PrimeSet) -> PrimeSet {
        match (self, other) {
            (PrimeSet::Finite(a), PrimeSet::Finite(b)) => PrimeSet::Finite(a.union(b).copied().collect()),
            (PrimeSet::Finite(a), PrimeSet::Cofinite(b)) | (PrimeSet::Cofinite(b), PrimeSet::Finite(a)) => {
                PrimeSet::Cofinite(b.difference(a).copied().collect())
            }
            (PrimeSet::Cofinite(a), PrimeSet::Cofinite(b)) => PrimeSet::Cofinite(a.intersection(b).copied().collect()),
        }
    }
}

/// Formal product `∏ p^{n_p}` with `n_p` in `{0, 1, ..., ∞}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SupernaturalNumber {
    finite: BTreeMap<u64, u32>,
    infinite: PrimeSet,
    /// Computed from a finite prefix only; such values cannot be compared.
    prefix_only: bool,
}

impl SupernaturalNumber {
    pub fn one() -> Self {
        SupernaturalNumber { finite: BTreeMap::new(), infinite: PrimeSet::Finite(BTreeSet::new()), prefix_only: false }
    }

    pub fn universal() -> Self {
        SupernaturalNumber { finite: BTreeMap::new(), infinite: PrimeSet::Cofinite(BTreeSet::new()), prefix_only: false }
    }

    pub fn of_integer(n: u64) -> Self {
        let mut s = Self::one();
        s.multiply_integer(n);
        s
    }

    pub fn infinite_powers(primes: impl IntoIterator<Item = u64>) -> Self {
        SupernaturalNumber {
            finite: BTreeMap::new(),
            infinite: PrimeSet::Finite(primes.into_iter().collect()),
            prefix_only: false,
        }
    }

    pub fn multiply_integer(&mut self, n: u64) {
        for (p, e) in factorize(n) {
            if !self.infinite.contains(p) {
                *self.finite.entry(p).or_insert(0) += e;
            }
        }
    }

    pub fn multiply(&self, other: &Self) -> Self {
        let infinite = self.infinite.union(&other.infinite);
        let mut finite = BTreeMap::new();
        for (&p, &e) in self.finite.iter().chain(other.finite.iter()) {
            if !infinite.contains(p) {
                *finite.entry(p).or_insert(0) += e;
            }
        }
        SupernaturalNumber { finite, infinite, prefix_only: self.prefix_only || other.prefix_only }
    }

    pub fn is_prefix_only(&self) -> bool {
        self.prefix_only
    }

    pub fn infinite_primes(&self) -> &PrimeSet {
        &self.infinite
    }

    /// Multiplicity of `p`; `None` means infinite.
    pub fn multiplicity(&self, p: u64) -> Option<u32> {
        if self.infinite.contains(p) {
            None
        } else {
            Some(self.finite.get(&p).copied().unwrap_or(0))
        }
    }
}

impl fmt::Display for SupernaturalNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<(u64, String)> = self.finite.iter().map(|(p, e)| (*p, format!("{p}^{e}"))).collect();
        match &self.infinite {
            PrimeSet::Finite(s) => parts.extend(s.iter().map(|p| (*p, format!("{p}^inf")))),
            PrimeSet::Cofinite(ex) if ex.is_empty() => parts.push((u64::MAX, "p^inf for all p".into())),
            PrimeSet::Cofinite(ex) => parts.push((
                u64::MAX,
                format!("p^inf for p not in {{{}}}", ex.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(",")),
            )),
        }
        parts.sort();
        let body = if parts.is_empty() { "1".to_string() } else { parts.into_iter().map(|x| x.1).collect::<Vec<_>>().join(" * ") };
        if self.prefix_only {
            write!(f, "{body} (prefix only)")
        } else {
            write!(f, "{body}")
        }
    }
}

/// Whether two supernatural numbers agree (the UHF algebras are isomorphic).
pub fn same_type(a: &SupernaturalNumber, b: &SupernaturalNumber) -> Result<bool> {
    if a.prefix_only || b.prefix_only {
        return Err(Error::PrefixOnly);
    }
    Ok(a == b)
}

/// Consecutive blocks: explicit lengths first, then a repeating tail.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlockPartition {
    pub explicit: Vec<usize>,
    pub tail: Vec<usize>,
}

impl BlockPartition {
    pub fn new(explicit: Vec<usize>, tail: Vec<usize>) -> Result<Self> {
        if explicit.iter().chain(&tail).any(|&l| l == 0) {
            return Err(Error::InvalidPartition("empty block".into()));
        }
        let tail = if tail.is_empty() { vec![1] } else { tail };
        Ok(BlockPartition { explicit, tail })
    }

    pub fn singletons() -> Self {
        BlockPartition { explicit: vec![], tail: vec![1] }
    }

    pub fn len_of(&self, j: usize) -> usize {
        if j < self.explicit.len() {
            self.explicit[j]
        } else {
            self.tail[(j - self.explicit.len()) % self.tail.len()]
        }
    }

    /// Source range `[start, end)` covered by block `j`.
    pub fn range(&self, j: usize) -> (usize, usize) {
        let start: usize = (0..j).map(|i| self.len_of(i)).sum();
        (start, start + self.len_of(j))
    }
}

/// Sequence of matrix sizes `(n_1, n_2, ...)`, each at least 2.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum FactorSequence {
    /// Finitely many factors only.
    Prefix(Vec<u64>),
    Pattern { prefix: Vec<u64>, period: Vec<u64> },
    /// `(2, 3, 4, ...)`.
    Universal,
    /// Round-robin merge.
    Interleave(Vec<FactorSequence>),
    Regrouped { source: Box<FactorSequence>, partition: BlockPartition },
    Subsequence { source: Box<FactorSequence>, offset: usize, stride: usize },
    /// Entrywise product.
    Product(Vec<FactorSequence>),
}

impl FactorSequence {
    pub fn periodic(period: Vec<u64>) -> Self {
        FactorSequence::Pattern { prefix: vec![], period }
    }

    pub fn constant(n: u64) -> Self {
        Self::periodic(vec![n])
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            FactorSequence::Prefix(v) => check_sizes(v),
            FactorSequence::Pattern { prefix, period } => {
                check_sizes(prefix)?;
                if period.is_empty() {
                    return Err(Error::InvalidSequence("empty period".into()));
                }
                check_sizes(period)
            }
            FactorSequence::Universal => Ok(()),
            FactorSequence::Interleave(v) | FactorSequence::Product(v) => {
                if v.is_empty() {
                    return Err(Error::InvalidSequence("no components".into()));
                }
                v.iter().try_for_each(|s| s.validate())
            }
            FactorSequence::Regrouped { source, .. } => source.validate(),
            FactorSequence::Subsequence { source, stride, .. } => {
                if *stride == 0 {
                    return Err(Error::InvalidSequence("zero stride".into()));
                }
                source.validate()
            }
        }
    }

    /// Number of factors, `None` when infinite.
    pub fn len(&self) -> Option<usize> {
        match self {
            FactorSequence::Prefix(v) => Some(v.len()),
            FactorSequence::Pattern { .. } | FactorSequence::Universal => None,
            FactorSequence::Interleave(v) => {
                let lens: Option<Vec<usize>> = v.iter().map(|s| s.len()).collect();
                lens.map(|l| {
                    // round-robin stops at the first exhausted component
                    let m = *l.iter().min().unwrap();
                    m * l.len() + l.iter().take_while(|&&x| x > m).count()
                })
            }
            FactorSequence::Product(v) => v.iter().filter_map(|s| s.len()).min(),
            FactorSequence::Regrouped { source, partition } => source.len().map(|n| {
                let mut j = 0;
                while partition.range(j).1 <= n {
                    j += 1;
                }
                j
            }),
            FactorSequence::Subsequence { source, offset, stride } => {
                source.len().map(|n| if n > *offset { (n - offset).div_ceil(*stride) } else { 0 })
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    /// Size of factor `l` (0-based).
    pub fn size(&self, l: usize) -> Result<u64> {
        if let Some(n) = self.len() {
            if l >= n {
                return Err(Error::StageExhausted { requested: l + 1, available: n });
            }
        }
        match self {
            FactorSequence::Prefix(v) => Ok(v[l]),
            FactorSequence::Pattern { prefix, period } => {
                Ok(if l < prefix.len() { prefix[l] } else { period[(l - prefix.len()) % period.len()] })
            }
            FactorSequence::Universal => Ok(l as u64 + 2),
            FactorSequence::Interleave(v) => v[l % v.len()].size(l / v.len()),
            FactorSequence::Product(v) => {
                v.iter().try_fold(1u64, |acc, s| acc.checked_mul(s.size(l)?).ok_or_else(overflow))
            }
            FactorSequence::Regrouped { source, partition } => {
                let (a, b) = partition.range(l);
                (a..b).try_fold(1u64, |acc, i| acc.checked_mul(source.size(i)?).ok_or_else(overflow))
            }
            FactorSequence::Subsequence { source, offset, stride } => source.size(offset + l * stride),
        }
    }

    /// First `n` sizes.
    pub fn prefix(&self, n: usize) -> Result<Vec<u64>> {
        (0..n).map(|l| self.size(l)).collect()
    }
}

fn overflow() -> Error {
    Error::InvalidSequence("factor size overflows u64".into())
}

fn check_sizes(v: &[u64]) -> Result<()> {
    match v.iter().find(|&&n| n < 2) {
        Some(n) => Err(Error::InvalidSequence(format!("factor size {n} is below 2"))),
        None => Ok(()),
    }
}

/// Supernatural number `∏ n_l` of a factor sequence.
pub fn supernatural_of(seq: &FactorSequence) -> Result<SupernaturalNumber> {
    seq.validate()?;
    match seq {
        FactorSequence::Prefix(v) => {
            let mut s = SupernaturalNumber::one();
            for &n in v {
                s.multiply_integer(n);
            }
            s.prefix_only = true;
            Ok(s)
        }
        FactorSequence::Pattern { prefix, period } => {
            let primes: BTreeSet<u64> = period.iter().flat_map(|&n| factorize(n).into_iter().map(|x| x.0)).collect();
            let mut s = SupernaturalNumber::infinite_powers(primes);
            for &n in prefix {
                s.multiply_integer(n);
            }
            Ok(s)
        }
        FactorSequence::Universal => Ok(SupernaturalNumber::universal()),
        FactorSequence::Interleave(v) => {
            v.iter().try_fold(SupernaturalNumber::one(), |acc, s| Ok(acc.multiply(&supernatural_of(s)?)))
        }
        FactorSequence::Product(v) => {
            if v.iter().any(|s| s.len().is_some()) {
                // a finite component truncates the product
                let n = seq.len().unwrap_or(0);
                return supernatural_of(&FactorSequence::Prefix(seq.prefix(n)?));
            }
            v.iter().try_fold(SupernaturalNumber::one(), |acc, s| Ok(acc.multiply(&supernatural_of(s)?)))
        }
        FactorSequence::Regrouped { source, .. } => match source.len() {
            Some(_) => {
                let n = seq.len().unwrap_or(0);
                supernatural_of(&FactorSequence::Prefix(seq.prefix(n)?))
            }
            None => supernatural_of(source),
        },
        FactorSequence::Subsequence { source, offset, stride } => subsequence_supernatural(source, *offset, *stride),
    }
}

fn subsequence_supernatural(source: &FactorSequence, offset: usize, stride: usize) -> Result<SupernaturalNumber> {
    if let Some(n) = source.len() {
        let picked: Vec<u64> = (offset..n).step_by(stride).map(|i| source.size(i)).collect::<Result<_>>()?;
        return supernatural_of(&FactorSequence::Prefix(picked));
    }
    match source {
        FactorSequence::Pattern { prefix, period } => {
            let p = period.len();
            let mut s = SupernaturalNumber::one();
            let mut idx = offset;
            while idx < prefix.len() {
                s.multiply_integer(prefix[idx]);
                idx += stride;
            }
            // residues of the period hit infinitely often
            let hit: BTreeSet<usize> = (0..p).map(|m| (idx - prefix.len() + m * stride) % p).collect();
            let primes: BTreeSet<u64> =
                hit.iter().flat_map(|&r| factorize(period[r]).into_iter().map(|x| x.0)).collect();
            Ok(s.multiply(&SupernaturalNumber::infinite_powers(primes)))
        }
        FactorSequence::Universal => {
            // sizes offset + 2 + m * stride: p divides infinitely many iff p ∤ stride or p | offset + 2
            let a = offset as u64 + 2;
            let excluded: BTreeSet<u64> =
                factorize(stride as u64).into_iter().map(|x| x.0).filter(|&p| a % p != 0).collect();
            Ok(SupernaturalNumber { finite: BTreeMap::new(), infinite: PrimeSet::Cofinite(excluded), prefix_only: false })
        }
        FactorSequence::Interleave(v) => {
            let c = v.len();
            // component i is visited along an arithmetic progression when i ≡ offset mod gcd
            let g = stride.gcd(&c);
            let mut s = SupernaturalNumber::one();
            for (i, comp) in v.iter().enumerate() {
                if i % g != offset % g {
                    continue;
                }
                let first = (0..c).map(|m| offset + m * stride).find(|&x| x % c == i).unwrap();
                s = s.multiply(&subsequence_supernatural(comp, first / c, stride / g)?);
            }
            Ok(s)
        }
        FactorSequence::Subsequence { source: inner, offset: o2, stride: s2 } => {
            subsequence_supernatural(inner, o2 + offset * s2, stride * s2)
        }
        _ => Err(Error::InvalidSequence("subsequence of this sequence kind is not supported".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pattern_types() {
        let a = supernatural_of(&FactorSequence::Pattern { prefix: vec![2], period: vec![3] }).unwrap();
        assert_eq!(a.multiplicity(2), Some(1));
        assert_eq!(a.multiplicity(3), None);
        let b = supernatural_of(&FactorSequence::periodic(vec![9])).unwrap();
        let c = supernatural_of(&FactorSequence::periodic(vec![3])).unwrap();
        assert!(same_type(&b, &c).unwrap());
        assert!(!same_type(&a, &c).unwrap());
    }

    #[test]
    fn prefix_only_cannot_compare() {
        let a = supernatural_of(&FactorSequence::Prefix(vec![2, 2, 3])).unwrap();
        assert!(matches!(same_type(&a, &a), Err(Error::PrefixOnly)));
        assert_eq!(a.multiplicity(2), Some(2));
    }

    #[test]
    fn universal_subsequences() {
        let u = supernatural_of(&FactorSequence::Universal).unwrap();
        assert_eq!(u.multiplicity(101), None);
        // 2, 4, 6, ... still has every prime infinitely often
        let even = FactorSequence::Subsequence { source: Box::new(FactorSequence::Universal), offset: 0, stride: 2 };
        assert_eq!(supernatural_of(&even).unwrap(), u);
        // 3, 5, 7, ... misses 2
        let odd = FactorSequence::Subsequence { source: Box::new(FactorSequence::Universal), offset: 1, stride: 2 };
        assert_eq!(supernatural_of(&odd).unwrap().multiplicity(2), Some(0));
    }

    #[test]
    fn interleave_multiplies() {
        let s = FactorSequence::Interleave(vec![FactorSequence::constant(2), FactorSequence::constant(3)]);
        assert_eq!(s.prefix(4).unwrap(), vec![2, 3, 2, 3]);
        let t = supernatural_of(&s).unwrap();
        assert_eq!(t, SupernaturalNumber::infinite_powers([2, 3]));
        let sub = FactorSequence::Subsequence { source: Box::new(s), offset: 1, stride: 2 };
        assert_eq!(supernatural_of(&sub).unwrap(), SupernaturalNumber::infinite_powers([3]));
    }

    #[test]
    fn regrouping_preserves_type() {
        let s = FactorSequence::constant(3);
        let r = FactorSequence::Regrouped { source: Box::new(s.clone()), partition: BlockPartition::new(vec![2, 1], vec![3]).unwrap() };
        assert_eq!(r.prefix(3).unwrap(), vec![9, 3, 27]);
        assert_eq!(supernatural_of(&r).unwrap(), supernatural_of(&s).unwrap());
    }
}
