use std::collections::{BTreeSet, VecDeque};

use crate::error::{Error, Result};

/// Finite group given by a validated multiplication table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    table: Vec<Vec<usize>>,
    identity: usize,
    inverses: Vec<usize>,
    names: Vec<String>,
}

impl FiniteGroup {
    /// Validate closure, identity, inverses and associativity.
    pub fn from_table(table: Vec<Vec<usize>>) -> Result<Self> {
        let m = table.len();
        if m == 0 {
            return Err(Error::InvalidGroup("empty table".into()));
        }
        for (i, row) in table.iter().enumerate() {
            if row.len() != m {
                return Err(Error::InvalidGroup(format!("row {i} has length {}", row.len())));
            }
            if let Some(&x) = row.iter().find(|&&x| x >= m) {
                return Err(Error::InvalidGroup(format!("entry {x} out of range")));
            }
        }
        let identity = (0..m)
            .find(|&e| (0..m).all(|a| table[e][a] == a && table[a][e] == a))
            .ok_or_else(|| Error::InvalidGroup("no identity".into()))?;
        let mut inverses = vec![0; m];
        for a in 0..m {
            inverses[a] = (0..m)
                .find(|&b| table[a][b] == identity && table[b][a] == identity)
                .ok_or_else(|| Error::InvalidGroup(format!("element {a} has no inverse")))?;
        }
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(Error::InvalidGroup(format!("not associative at ({a}, {b}, {c})")));
                    }
                }
            }
        }
        let names = (0..m).map(|i| i.to_string()).collect();
        Ok(FiniteGroup { table, identity, inverses, names })
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.order() {
            return Err(Error::InvalidArgument("wrong number of element names".into()));
        }
        self.names = names;
        Ok(self)
    }

    pub fn name(&self, g: usize) -> &str {
        &self.names[g]
    }

    pub fn index_of_name(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn cyclic(n: usize) -> Self {
        let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        Self::from_table(table).expect("cyclic table")
    }

    /// Symmetric group on `n` points; elements are permutations in lexicographic order
    /// and `a*b` is `a` after `b`.
    pub fn symmetric(n: usize) -> Self {
        let perms = permutations(n);
        let index = |p: &Vec<usize>| perms.iter().position(|q| q == p).unwrap();
        let table = perms
            .iter()
            .map(|a| perms.iter().map(|b| index(&b.iter().map(|&x| a[x]).collect())).collect())
            .collect();
        let names = perms.iter().map(|p| format!("[{}]", p.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))).collect();
        Self::from_table(table).expect("symmetric table").with_names(names).unwrap()
    }

    /// Dihedral group of order `2n`; element `r^a s^b` has index `a + n b`.
    pub fn dihedral(n: usize) -> Self {
        let m = 2 * n;
        let mul = |x: usize, y: usize| {
            let (a1, b1) = (x % n, x / n);
            let (a2, b2) = (y % n, y / n);
            let a = if b1 == 0 { (a1 + a2) % n } else { (a1 + n - a2) % n };
            a + n * ((b1 + b2) % 2)
        };
        let table = (0..m).map(|x| (0..m).map(|y| mul(x, y)).collect()).collect();
        Self::from_table(table).expect("dihedral table")
    }

    pub fn direct_product(&self, other: &Self) -> Self {
        let (m, k) = (self.order(), other.order());
        let table = (0..m * k)
            .map(|x| (0..m * k).map(|y| self.mul(x / k, y / k) * k + other.mul(x % k, y % k)).collect())
            .collect();
        Self::from_table(table).expect("product table")
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverses[a]
    }

    pub fn pow(&self, a: usize, e: i64) -> usize {
        let base = if e < 0 { self.inv(a) } else { a };
        let mut out = self.identity;
        for _ in 0..e.unsigned_abs() {
            out = self.mul(out, base);
        }
        out
    }

    pub fn contains(&self, a: usize) -> bool {
        a < self.order()
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order()).all(|a| (0..a).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    /// `g h g^{-1}`.
    pub fn conj(&self, g: usize, h: usize) -> usize {
        self.mul(self.mul(g, h), self.inv(g))
    }

    pub fn is_subgroup(&self, h: &[usize]) -> bool {
        let set: BTreeSet<usize> = h.iter().copied().collect();
        !set.is_empty()
            && set.iter().all(|&a| a < self.order())
            && set.contains(&self.identity)
            && set.iter().all(|&a| set.iter().all(|&b| set.contains(&self.mul(a, self.inv(b)))))
    }

    fn require_subgroup(&self, h: &[usize]) -> Result<Vec<usize>> {
        if !self.is_subgroup(h) {
            return Err(Error::NotSubgroup(format!("{h:?}")));
        }
        let set: BTreeSet<usize> = h.iter().copied().collect();
        Ok(set.into_iter().collect())
    }

    /// Sorted subgroup generated by `gens`.
    pub fn generated(&self, gens: &[usize]) -> Vec<usize> {
        let mut seen = BTreeSet::from([self.identity]);
        let mut queue = VecDeque::from([self.identity]);
        while let Some(x) = queue.pop_front() {
            for &g in gens {
                let y = self.mul(x, g);
                if seen.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        seen.into_iter().collect()
    }

    pub fn is_normal(&self, h: &[usize]) -> bool {
        let set: BTreeSet<usize> = h.iter().copied().collect();
        (0..self.order()).all(|g| set.iter().all(|&x| set.contains(&self.conj(g, x))))
    }

    pub fn conjugacy_classes(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.order()];
        let mut out = Vec::new();
        for a in 0..self.order() {
            if seen[a] {
                continue;
            }
            let class: BTreeSet<usize> = (0..self.order()).map(|g| self.conj(g, a)).collect();
            for &c in &class {
                seen[c] = true;
            }
            out.push(class.into_iter().collect());
        }
        out
    }

    /// Left cosets `gH`, each listed as sorted elements; the first entry is the least-index representative.
    pub fn left_cosets(&self, h: &[usize]) -> Result<Vec<Vec<usize>>> {
        let h = self.require_subgroup(h)?;
        let mut seen = vec![false; self.order()];
        let mut out = Vec::new();
        for g in 0..self.order() {
            if seen[g] {
                continue;
            }
            let mut coset: Vec<usize> = h.iter().map(|&x| self.mul(g, x)).collect();
            coset.sort_unstable();
            for &c in &coset {
                seen[c] = true;
            }
            out.push(coset);
        }
        Ok(out)
    }

    /// Group structure on the sorted subgroup `h`; element `i` of the result is `h[i]`.
    pub fn subgroup_table(&self, h: &[usize]) -> Result<FiniteGroup> {
        let h = self.require_subgroup(h)?;
        let pos = |x: usize| h.iter().position(|&y| y == x).unwrap();
        let table = h.iter().map(|&a| h.iter().map(|&b| pos(self.mul(a, b))).collect()).collect();
        let names = h.iter().map(|&a| self.names[a].clone()).collect();
        FiniteGroup::from_table(table)?.with_names(names)
    }

    /// Quotient by a normal subgroup, with the projection map.
    pub fn quotient(&self, n: &[usize]) -> Result<(FiniteGroup, Vec<usize>)> {
        let n = self.require_subgroup(n)?;
        if !self.is_normal(&n) {
            return Err(Error::NotSubgroup("subgroup is not normal".into()));
        }
        let cosets = self.left_cosets(&n)?;
        let mut map = vec![0; self.order()];
        for (i, c) in cosets.iter().enumerate() {
            for &x in c {
                map[x] = i;
            }
        }
        let table = cosets.iter().map(|a| cosets.iter().map(|b| map[self.mul(a[0], b[0])]).collect()).collect();
        Ok((FiniteGroup::from_table(table)?, map))
    }

    /// Whether `map` from `self` into `target` respects multiplication.
    pub fn is_homomorphism(&self, target: &FiniteGroup, map: &[usize]) -> bool {
        map.len() == self.order()
            && map.iter().all(|&x| x < target.order())
            && (0..self.order()).all(|a| (0..self.order()).all(|b| map[self.mul(a, b)] == target.mul(map[a], map[b])))
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        out.push(p.clone());
        // next lexicographic permutation
        let Some(i) = (0..n - 1).rev().find(|&i| p[i] < p[i + 1]) else { break };
        let j = (i + 1..n).rev().find(|&j| p[j] > p[i]).unwrap();
        p.swap(i, j);
        p[i + 1..].reverse();
    }
    out
}

/// Largest normal subgroup of `g` contained in `h`: the intersection of all conjugates.
pub fn normal_core(g: &FiniteGroup, h: &[usize]) -> Result<Vec<usize>> {
    let h = g.require_subgroup(h)?;
    let set: BTreeSet<usize> = h.iter().copied().collect();
    Ok(h.into_iter().filter(|&x| (0..g.order()).all(|k| set.contains(&g.conj(g.inv(k), x)))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_group_structure() {
        let s3 = FiniteGroup::symmetric(3);
        assert_eq!(s3.order(), 6);
        assert!(!s3.is_abelian());
        assert_eq!(s3.conjugacy_classes().len(), 3);
        let orders: Vec<usize> = (0..6).map(|g| s3.element_order(g)).collect();
        assert_eq!(orders.iter().filter(|&&o| o == 3).count(), 2);
    }

    #[test]
    fn cores() {
        let s3 = FiniteGroup::symmetric(3);
        let t = s3.generated(&[1]);
        assert_eq!(t.len(), 2);
        assert_eq!(normal_core(&s3, &t).unwrap(), vec![0]);
        let a3: Vec<usize> = (0..6).filter(|&g| s3.element_order(g) != 2).collect();
        assert_eq!(normal_core(&s3, &a3).unwrap(), a3);
        let z4 = FiniteGroup::cyclic(4);
        assert_eq!(normal_core(&z4, &[0, 2]).unwrap(), vec![0, 2]);
    }

    #[test]
    fn quotient_map_is_homomorphism() {
        let s3 = FiniteGroup::symmetric(3);
        let a3: Vec<usize> = (0..6).filter(|&g| s3.element_order(g) != 2).collect();
        let (q, map) = s3.quotient(&a3).unwrap();
        assert_eq!(q.order(), 2);
        assert!(s3.is_homomorphism(&q, &map));
    }

    #[test]
    fn bad_tables_rejected() {
        assert!(FiniteGroup::from_table(vec![vec![0, 1], vec![1, 1]]).is_err());
        assert!(FiniteGroup::from_table(vec![vec![0, 1], vec![1, 2]]).is_err());
    }

    #[test]
    fn dihedral_and_products() {
        let d4 = FiniteGroup::dihedral(4);
        assert_eq!(d4.order(), 8);
        assert!(!d4.is_abelian());
        let z6 = FiniteGroup::cyclic(2).direct_product(&FiniteGroup::cyclic(3));
        assert!(z6.is_abelian());
        assert!((0..6).any(|g| z6.element_order(g) == 6));
    }
}
