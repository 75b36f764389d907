use std::fmt;

use crate::actions::{evaluate, ProductAction};
use crate::algebra::{ComplexMatrix, UnitaryMatrix, C64, ONE};
use crate::error::{Error, Result};
use crate::groups::{check_homomorphism, regular_representation, Element, FiniteGroup, GroupSpec};

/// Covariance and multiplicativity tolerance.
pub const CROSSED_TOL: f64 = 1e-10;

/// Stage `m` of the crossed product: `M_N ⋊ G` with `α_g = Ad U_g`.
///
/// The regular covariant representation acts on `C^{|G|} ⊗ C^N` by
/// `π(x) = Σ_h e_{hh} ⊗ α_{h^{-1}}(x)` and `u_g = λ(g) ⊗ 1`. Since `α` is inner,
/// the stage is also `M_N ⊗ C*(G)` through `x ↦ x ⊗ 1`, `u_g ↦ U_g ⊗ λ(g)`; the
/// connecting maps use that picture.
#[derive(Clone, Debug)]
pub struct CrossedStage {
    pub stage: usize,
    group: FiniteGroup,
    images: Vec<UnitaryMatrix>,
    lambda: Vec<ComplexMatrix>,
}

fn table_group(g: &GroupSpec) -> Result<&FiniteGroup> {
    match g {
        GroupSpec::FiniteTable(t) => Ok(t),
        _ => Err(Error::InvalidGroup("crossed products need a group given by its table".into())),
    }
}

impl CrossedStage {
    /// Stage `m` of `a`; stage 0 is `C*(G)`.
    pub fn of_action(a: &ProductAction, m: usize) -> Result<Self> {
        let g = table_group(a.group())?.clone();
        let images = (0..g.order()).map(|x| Ok(evaluate(a, &Element::Index(x), m)?.unitary)).collect::<Result<Vec<_>>>()?;
        Self::from_images(&g, m, images)
    }

    /// Stage with the given images `U_g`, which must form a representation.
    pub fn from_images(group: &FiniteGroup, stage: usize, images: Vec<UnitaryMatrix>) -> Result<Self> {
        check_homomorphism(group, &images)?;
        let lambda = regular_representation(group).images().iter().map(|u| u.matrix().clone()).collect();
        Ok(CrossedStage { stage, group: group.clone(), images, lambda })
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn images(&self) -> &[UnitaryMatrix] {
        &self.images
    }

    /// `N`, the matrix size of the stage algebra.
    pub fn dim(&self) -> usize {
        self.images[0].dim()
    }

    /// `N·|G|`.
    pub fn ambient_dim(&self) -> usize {
        self.dim() * self.group.order()
    }

    pub fn alpha(&self, g: usize, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.images[g].conjugate(x)
    }

    /// `π(x)` in the regular covariant representation.
    pub fn pi(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        let n = self.group.order();
        let mut blocks = Vec::with_capacity(n);
        for h in 0..n {
            blocks.push(self.alpha(self.group.inv(h), x)?);
        }
        Ok(ComplexMatrix::direct_sum(&blocks.iter().collect::<Vec<_>>()))
    }

    /// `u_g = λ(g) ⊗ 1` in the regular covariant representation.
    pub fn u(&self, g: usize) -> ComplexMatrix {
        self.lambda[g].kron(&ComplexMatrix::identity(self.dim()))
    }

    /// `x ⊗ 1` in `M_N ⊗ C*(G)`.
    pub fn embed_algebra(&self, x: &ComplexMatrix) -> ComplexMatrix {
        x.kron(&ComplexMatrix::identity(self.group.order()))
    }

    /// Image of the canonical unitary `u_g` in `M_N ⊗ C*(G)`: `U_g ⊗ λ(g)`.
    pub fn embed_unitary(&self, g: usize) -> ComplexMatrix {
        self.images[g].matrix().kron(&self.lambda[g])
    }

    /// Image of a generator in `M_N ⊗ C*(G)`.
    pub fn generator(&self, x: &CrossedGenerator) -> Result<ComplexMatrix> {
        match *x {
            CrossedGenerator::Unit(i, j) => {
                let n = self.dim();
                if i >= n || j >= n {
                    return Err(Error::InvalidArgument(format!("matrix unit ({i}, {j}) outside M_{n}")));
                }
                let mut e = ComplexMatrix::zeros(n, n);
                e[(i, j)] = ONE;
                Ok(self.embed_algebra(&e))
            }
            CrossedGenerator::Group(g) => {
                if g >= self.group.order() {
                    return Err(Error::UnknownElement(g.to_string()));
                }
                Ok(self.embed_unitary(g))
            }
        }
    }

    /// Coefficients `x_g` of `a = Σ_g x_g ⊗ λ(g)`, read from the column of the identity.
    pub fn coefficients(&self, a: &ComplexMatrix) -> Result<Vec<ComplexMatrix>> {
        let (n, k) = (self.dim(), self.group.order());
        if a.dim() != n * k {
            return Err(Error::DimensionMismatch { expected: n * k, found: a.dim() });
        }
        let e = self.group.identity();
        Ok((0..k).map(|g| ComplexMatrix::from_fn(n, n, |r, c| a[(r * k + g, c * k + e)])).collect())
    }
}

/// Generator of a crossed-product stage: a matrix unit `e_ij` or a canonical unitary `u_g`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CrossedGenerator {
    Unit(usize, usize),
    Group(usize),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CovarianceReport {
    pub stage: usize,
    /// `max ‖u_g π(e_ij) u_g* − π(α_g(e_ij))‖` over elements and matrix units.
    pub defect: f64,
    /// Largest `‖u_g u_h − u_{gh}‖`.
    pub representation_defect: f64,
    pub pass: bool,
}

impl fmt::Display for CovarianceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "stage {}: covariance defect {:.3e}, representation defect {:.3e}: {}",
            self.stage,
            self.defect,
            self.representation_defect,
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

/// Check `u_g π(x) u_g* = π(α_g(x))` on every element and matrix unit.
pub fn verify_covariance(stage: &CrossedStage) -> Result<CovarianceReport> {
    let (n, k) = (stage.dim(), stage.group.order());
    let us: Vec<ComplexMatrix> = (0..k).map(|g| stage.u(g)).collect();
    let mut defect: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let mut e = ComplexMatrix::zeros(n, n);
            e[(i, j)] = ONE;
            let p = stage.pi(&e)?;
            for (g, u) in us.iter().enumerate() {
                let lhs = u.conjugate(&p)?;
                let rhs = stage.pi(&stage.alpha(g, &e)?)?;
                defect = defect.max((&lhs - &rhs).op_norm()?);
            }
        }
    }
    let mut representation_defect: f64 = 0.0;
    for g in 0..k {
        for h in 0..k {
            let d = &(&us[g] * &us[h]) - &us[stage.group.mul(g, h)];
            representation_defect = representation_defect.max(d.max_abs());
        }
    }
    let pass = defect <= CROSSED_TOL && representation_defect <= CROSSED_TOL;
    Ok(CovarianceReport { stage: stage.stage, defect, representation_defect, pass })
}

/// `Φ_m : M_N ⊗ C*(G) → M_N ⊗ M_n ⊗ C*(G)`, `x ⊗ u_g ↦ ((x ⊗ 1) g_{m+1}) ⊗ u_g`.
#[derive(Clone, Debug)]
pub struct ConnectingMap {
    pub source: CrossedStage,
    pub target: CrossedStage,
    factor: Vec<UnitaryMatrix>,
}

/// Connecting map from `stage` along the next factor images `g ↦ g_{m+1}`.
pub fn connecting_map(stage: &CrossedStage, g_images: &[UnitaryMatrix]) -> Result<ConnectingMap> {
    check_homomorphism(&stage.group, g_images)
        .map_err(|e| Error::NotHomomorphism(format!("next factor images: {e}")))?;
    let images = stage.images.iter().zip(g_images).map(|(u, v)| u.kron(v)).collect::<Result<Vec<_>>>()?;
    let target = CrossedStage::from_images(&stage.group, stage.stage + 1, images)?;
    Ok(ConnectingMap { source: stage.clone(), target, factor: g_images.to_vec() })
}

impl ConnectingMap {
    pub fn factor_dim(&self) -> usize {
        self.factor[0].dim()
    }

    /// `Φ_m(a)` for `a` in `M_N ⊗ C*(G)`.
    pub fn apply(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        let coeffs = self.source.coefficients(a)?;
        let one = ComplexMatrix::identity(self.source.dim());
        let mut out = ComplexMatrix::zeros(self.target.ambient_dim(), self.target.ambient_dim());
        for (g, x) in coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            let moved = &x.kron(&ComplexMatrix::identity(self.factor_dim())) * &one.kron(self.factor[g].matrix());
            out = &out + &moved.kron(&self.source.lambda[g]);
        }
        Ok(out)
    }

    /// Largest `‖Φ(w_1 ⋯ w_r) − Φ(w_1) ⋯ Φ(w_r)‖` over the words.
    pub fn multiplicativity_defect(&self, words: &[Vec<CrossedGenerator>]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for w in words {
            let n = self.source.ambient_dim();
            let mut prod = ComplexMatrix::identity(n);
            let mut image = ComplexMatrix::identity(self.target.ambient_dim());
            for x in w {
                let a = self.source.generator(x)?;
                image = &image * &self.apply(&a)?;
                prod = &prod * &a;
            }
            worst = worst.max((&self.apply(&prod)? - &image).op_norm()?);
        }
        Ok(worst)
    }

    /// `|‖Φ(a)‖ − ‖a‖|` in operator norm, a spot check of injectivity.
    pub fn norm_defect(&self, a: &ComplexMatrix) -> Result<f64> {
        Ok((self.apply(a)?.op_norm()? - a.op_norm()?).abs())
    }
}

/// Normalized trace of each element's image.
pub(crate) fn normalized_traces(images: &[UnitaryMatrix]) -> Vec<C64> {
    images.iter().map(|u| u.normalized_trace()).collect()
}
