use std::sync::Arc;

use crate::algebra::{check_dense, Phase, UnitaryMatrix, C64, MAX_EXACT_DIM, ONE};
use crate::error::{Error, Result};
use crate::groups::{check_homomorphism, Element, FiniteGroup, GroupSpec};

/// How a pulled-back factor reads its element from the outer group.
#[derive(Clone, Debug)]
pub enum ElementMap {
    /// Component `i` of a direct sum.
    Component(usize),
    /// Table map between finite table groups.
    Table(Arc<Vec<usize>>),
    /// Element `x` goes to the index of the listed element equal to `x`.
    Enumerate(Arc<Vec<Element>>),
    /// Index `i` of a table group goes to the listed element `i`.
    Lookup(Arc<Vec<Element>>),
}

impl ElementMap {
    fn apply(&self, outer: &GroupSpec, g: &Element) -> Result<Element> {
        match (self, g) {
            (ElementMap::Component(i), Element::Tuple(xs)) => {
                xs.get(*i).cloned().ok_or_else(|| Error::UnknownElement(format!("{g:?}")))
            }
            (ElementMap::Table(map), Element::Index(x)) => {
                map.get(*x).map(|&y| Element::Index(y)).ok_or_else(|| Error::UnknownElement(format!("{g:?}")))
            }
            (ElementMap::Enumerate(list), _) => {
                for (i, e) in list.iter().enumerate() {
                    if outer.equal(e, g)? {
                        return Ok(Element::Index(i));
                    }
                }
                Err(Error::UnknownElement(outer.format_element(g)))
            }
            (ElementMap::Lookup(list), Element::Index(i)) => {
                list.get(*i).cloned().ok_or_else(|| Error::UnknownElement(format!("{g:?}")))
            }
            _ => Err(Error::UnknownElement(format!("{g:?}"))),
        }
    }
}

/// Images of every group element in one tensor factor, kept structured until needed.
#[derive(Clone, Debug)]
pub enum FactorImages {
    Identity(usize),
    /// Finite table group, one unitary per element index.
    Table(Arc<Vec<UnitaryMatrix>>),
    /// Presented abelian group, one commuting unitary per generator.
    Generators(Arc<Vec<UnitaryMatrix>>),
    /// Presented abelian group acting diagonally: `phases[i][p]` for generator `i` at position `p`.
    DiagonalGenerators(Arc<Vec<Vec<Phase>>>),
    Kron(Vec<FactorImages>),
    /// `diag(U ⊗ 1_copies, 1_remainder)`.
    Corner { inner: Box<FactorImages>, copies: usize, remainder: usize },
    /// Compression to coordinates that every image leaves invariant.
    Select { inner: Box<FactorImages>, indices: Arc<Vec<usize>> },
    /// Factor of another group composed with a homomorphism into it.
    Pullback { inner: Box<FactorImages>, map: ElementMap, inner_group: Arc<GroupSpec> },
}

fn wrong(g: &Element) -> Error {
    Error::UnknownElement(format!("{g:?} does not fit this factor"))
}

impl FactorImages {
    pub fn dim(&self) -> usize {
        match self {
            FactorImages::Identity(n) => *n,
            FactorImages::Table(v) | FactorImages::Generators(v) => v.first().map_or(1, |u| u.dim()),
            FactorImages::DiagonalGenerators(p) => p.first().map_or(1, |v| v.len()),
            FactorImages::Kron(v) => v.iter().map(|f| f.dim()).product(),
            FactorImages::Corner { inner, copies, remainder } => inner.dim() * copies + remainder,
            FactorImages::Select { indices, .. } => indices.len(),
            FactorImages::Pullback { inner, .. } => inner.dim(),
        }
    }

    /// Dense image of `g`.
    pub fn image(&self, group: &GroupSpec, g: &Element) -> Result<UnitaryMatrix> {
        if self.dim() > MAX_EXACT_DIM {
            return Err(Error::DimensionTooLarge { dim: self.dim(), limit: MAX_EXACT_DIM });
        }
        match self {
            FactorImages::Identity(n) => Ok(UnitaryMatrix::identity(*n)),
            FactorImages::Table(v) => match g {
                Element::Index(i) if *i < v.len() => Ok(v[*i].clone()),
                _ => Err(wrong(g)),
            },
            FactorImages::Generators(v) => match g {
                Element::Exponents(e) if e.len() == v.len() => {
                    let mut out = UnitaryMatrix::identity(self.dim());
                    for (u, &k) in v.iter().zip(e) {
                        if k != 0 {
                            out = out.mul(&u.pow(k)?)?;
                        }
                    }
                    Ok(out)
                }
                _ => Err(wrong(g)),
            },
            FactorImages::DiagonalGenerators(_) => {
                let ph = self.diagonal(group, g)?.expect("diagonal by construction");
                if !ph.iter().all(|p| p.is_exact()) {
                    check_dense(ph.len())?;
                }
                Ok(UnitaryMatrix::diagonal(&ph))
            }
            FactorImages::Kron(v) => {
                let mut out = UnitaryMatrix::identity(1);
                for f in v {
                    out = out.kron(&f.image(group, g)?)?;
                }
                Ok(out)
            }
            FactorImages::Corner { inner, copies, remainder } => inner.image(group, g)?.corner(*copies, *remainder),
            FactorImages::Select { inner, indices } => {
                if let Some(ph) = inner.diagonal(group, g)? {
                    return Ok(UnitaryMatrix::diagonal(&indices.iter().map(|&i| ph[i]).collect::<Vec<_>>()));
                }
                inner.image(group, g)?.compress(indices)
            }
            FactorImages::Pullback { inner, map, inner_group } => inner.image(inner_group, &map.apply(group, g)?),
        }
    }

    /// Diagonal phases of the image of `g`, or `None` when not structurally diagonal.
    pub fn diagonal(&self, group: &GroupSpec, g: &Element) -> Result<Option<Vec<Phase>>> {
        Ok(match self {
            FactorImages::Identity(n) => Some(vec![Phase::ONE; *n]),
            FactorImages::Table(v) => match g {
                Element::Index(i) if *i < v.len() => v[*i].diagonal_phases(),
                _ => return Err(wrong(g)),
            },
            FactorImages::Generators(v) => match g {
                Element::Exponents(e) if e.len() == v.len() => {
                    let mut acc = vec![Phase::ONE; self.dim()];
                    for (u, &k) in v.iter().zip(e) {
                        if k == 0 {
                            continue;
                        }
                        let Some(ph) = u.diagonal_phases() else { return Ok(None) };
                        for (a, p) in acc.iter_mut().zip(ph) {
                            *a = a.add(&p.times(k));
                        }
                    }
                    Some(acc)
                }
                _ => return Err(wrong(g)),
            },
            FactorImages::DiagonalGenerators(p) => match g {
                Element::Exponents(e) if e.len() == p.len() => {
                    let mut acc = vec![Phase::ONE; self.dim()];
                    for (ph, &k) in p.iter().zip(e) {
                        if k == 0 {
                            continue;
                        }
                        for (a, x) in acc.iter_mut().zip(ph) {
                            *a = a.add(&x.times(k));
                        }
                    }
                    Some(acc)
                }
                _ => return Err(wrong(g)),
            },
            FactorImages::Kron(v) => {
                let mut acc = vec![Phase::ONE];
                for f in v {
                    let Some(ph) = f.diagonal(group, g)? else { return Ok(None) };
                    acc = acc.iter().flat_map(|a| ph.iter().map(move |b| a.add(b))).collect();
                }
                Some(acc)
            }
            FactorImages::Corner { inner, copies, remainder } => inner.diagonal(group, g)?.map(|ph| {
                let mut out: Vec<Phase> = ph.iter().flat_map(|p| std::iter::repeat_n(*p, *copies)).collect();
                out.extend(std::iter::repeat_n(Phase::ONE, *remainder));
                out
            }),
            FactorImages::Select { inner, indices } => {
                inner.diagonal(group, g)?.map(|ph| indices.iter().map(|&i| ph[i]).collect())
            }
            FactorImages::Pullback { inner, map, inner_group } => inner.diagonal(inner_group, &map.apply(group, g)?)?,
        })
    }

    /// Normalized trace of the image of `g`, computed without materializing tensor products.
    pub fn normalized_trace(&self, group: &GroupSpec, g: &Element) -> Result<C64> {
        match self {
            FactorImages::Identity(_) => Ok(ONE),
            FactorImages::Kron(v) => v.iter().try_fold(ONE, |acc, f| Ok(acc * f.normalized_trace(group, g)?)),
            FactorImages::Corner { inner, copies, remainder } => {
                let s = (inner.dim() * copies) as f64;
                let t = inner.normalized_trace(group, g)?;
                Ok((t * s + *remainder as f64) / (s + *remainder as f64))
            }
            FactorImages::Pullback { inner, map, inner_group } => inner.normalized_trace(inner_group, &map.apply(group, g)?),
            FactorImages::DiagonalGenerators(_) | FactorImages::Select { .. } => {
                if let Some(ph) = self.diagonal(group, g)? {
                    let s: C64 = ph.iter().map(|p| p.to_complex()).sum();
                    return Ok(s / ph.len() as f64);
                }
                Ok(self.image(group, g)?.normalized_trace())
            }
            FactorImages::Table(_) | FactorImages::Generators(_) => Ok(self.image(group, g)?.normalized_trace()),
        }
    }

    /// Check that this factor is a homomorphism on `group`.
    pub fn verify(&self, group: &GroupSpec) -> Result<()> {
        match (self, group) {
            (FactorImages::Identity(_), _) => Ok(()),
            (FactorImages::Table(v), GroupSpec::FiniteTable(g)) => {
                if v.len() != g.order() {
                    return Err(Error::DimensionMismatch { expected: g.order(), found: v.len() });
                }
                check_homomorphism(g, v)
            }
            (FactorImages::Generators(_) | FactorImages::DiagonalGenerators(_), GroupSpec::AbelianPresented(a)) => {
                let gens = group.generators();
                if gens.len() != a.rank() {
                    return Err(Error::InvalidGroup("generator count mismatch".into()));
                }
                let us: Vec<UnitaryMatrix> = if let FactorImages::Generators(v) = self {
                    if v.len() != a.rank() {
                        return Err(Error::DimensionMismatch { expected: a.rank(), found: v.len() });
                    }
                    v.to_vec()
                } else {
                    Vec::new()
                };
                for (i, (x, gen)) in gens.iter().zip(a.generators()).enumerate() {
                    if let Some(k) = gen.order {
                        let ok = match self.diagonal(group, &group.pow(x, k as i64)?)? {
                            Some(ph) => ph.iter().all(|p| p.distance(&Phase::ONE) <= 1e-12),
                            None => self.image(group, &group.pow(x, k as i64)?)?.matrix().approx_eq(
                                UnitaryMatrix::identity(self.dim()).matrix(),
                                1e-9,
                            ),
                        };
                        if !ok {
                            return Err(Error::NotHomomorphism(format!("generator {i} image does not have order {k}")));
                        }
                    }
                }
                for i in 0..us.len() {
                    for j in 0..i {
                        let ab = us[i].mul(&us[j])?;
                        let ba = us[j].mul(&us[i])?;
                        if !ab.matrix().approx_eq(ba.matrix(), 1e-9) {
                            return Err(Error::NotHomomorphism(format!("generators {j} and {i} do not commute")));
                        }
                    }
                }
                Ok(())
            }
            (FactorImages::Kron(v), _) => v.iter().try_for_each(|f| f.verify(group)),
            (FactorImages::Corner { inner, .. }, _) => inner.verify(group),
            (FactorImages::Select { inner, .. }, _) => inner.verify(group),
            (FactorImages::Pullback { inner, .. }, _) => inner.verify_pullback(group, self),
            _ => Err(Error::IncompatibleGroups(format!("factor kind does not fit a {} group", group.kind()))),
        }
    }

    fn verify_pullback(&self, outer: &GroupSpec, whole: &FactorImages) -> Result<()> {
        let FactorImages::Pullback { inner_group, .. } = whole else { unreachable!() };
        self.verify(inner_group)?;
        // the composite is a homomorphism when the map is; spot-check on finite groups
        if let Some(els) = outer.finite_elements() {
            if els.len() <= 64 && whole.dim() <= 64 {
                for a in &els {
                    for b in &els {
                        let ab = whole.image(outer, &outer.mul(a, b)?)?;
                        let prod = whole.image(outer, a)?.mul(&whole.image(outer, b)?)?;
                        if !ab.matrix().approx_eq(prod.matrix(), 1e-9) {
                            return Err(Error::NotHomomorphism("pulled-back factor".into()));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Factor images for every element of a finite group, as a table.
pub fn table_images(g: &FiniteGroup, f: impl Fn(usize) -> UnitaryMatrix) -> FactorImages {
    FactorImages::Table(Arc::new((0..g.order()).map(f).collect()))
}
