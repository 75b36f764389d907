//! Action-spec documents: one group, one factor pattern, one action, and task tables.

use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use num_rational::Rational64;
use serde::Deserialize;
use toml::Spanned;
use uhf_core::actions::{
    abelian_action, explicit_action, flow_action, identity_action, map_embed_action, regular_action, tensor_power,
    FactorImages, ProductAction,
};
use uhf_core::crossed::control_action;
use uhf_core::groups::{AbelianGroup, Element, FactorSequence, FiniteGroup, GroupSpec, Real};

use crate::literal::{diagonal_literal, unitary_literal, Scalar};

/// Input error, located in the document when possible.
#[derive(Debug)]
pub struct InputError {
    pub message: String,
    pub location: Option<(usize, usize)>,
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.location {
            Some((line, col)) => write!(f, "line {line}, column {col}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for InputError {}

impl InputError {
    pub fn plain(message: impl Into<String>) -> Self {
        InputError { message: message.into(), location: None }
    }
}

/// 1-based line and column of a byte offset.
pub fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

/// Source text used to place errors raised after parsing.
pub struct Located<'a> {
    src: &'a str,
}

impl Located<'_> {
    pub fn err(&self, span: Range<usize>, message: impl Into<String>) -> InputError {
        InputError { message: message.into(), location: Some(line_col(self.src, span.start)) }
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum OrderValue {
    Finite(u64),
    Named(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupBlock {
    pub cyclic: Option<usize>,
    pub symmetric: Option<usize>,
    pub dihedral: Option<usize>,
    /// Multiplication table, `table[a][b] = ab`, identity at index 0.
    pub table: Option<Vec<Vec<usize>>>,
    pub names: Option<Vec<String>>,
    /// Generator orders of a presented abelian group; `"inf"` for infinite order.
    pub abelian: Option<Vec<OrderValue>>,
    /// Direct sum of the listed groups.
    pub sum: Option<Vec<GroupBlock>>,
    /// Direct product of finite tables, kept as one table.
    pub product: Option<Vec<GroupBlock>>,
}

#[derive(Debug, Default, Deserialize, Clone)]
#[serde(deny_unknown_fields)]
pub struct FactorsBlock {
    #[serde(default)]
    pub prefix: Vec<u64>,
    #[serde(default)]
    pub period: Vec<u64>,
    #[serde(default)]
    pub universal: bool,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorSpec {
    /// One matrix per element (table groups) or per generator (presented groups).
    pub images: Option<Vec<Vec<Vec<Scalar>>>>,
    /// Diagonals, indexed the same way as `images`.
    pub diagonal: Option<Vec<Vec<Scalar>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionBlock {
    pub kind: String,
    pub theta: Option<String>,
    pub r: Option<Vec<String>>,
    pub copies: Option<usize>,
    pub depth: Option<usize>,
    #[serde(default)]
    pub prefix: Vec<FactorSpec>,
    #[serde(default)]
    pub period: Vec<FactorSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluateTask {
    pub element: Spanned<String>,
    pub stage: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TowerTask {
    pub element: Spanned<String>,
    pub k: Option<u64>,
    pub stage: usize,
    pub length: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyTask {
    pub element: Spanned<String>,
    pub k: Option<u64>,
    pub l_max: usize,
    pub epsilon_base: Option<f64>,
    pub epsilon: Option<Vec<f64>>,
    pub max_block_factors: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessTask {
    pub n_max: usize,
    pub theta: Option<String>,
    pub r: Option<String>,
    pub window: Option<usize>,
    pub threshold: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpUpTask {
    pub element: Spanned<String>,
    pub k: Option<u64>,
    pub l_max: usize,
    pub target: FactorsBlock,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutDownTask {
    pub element: Spanned<String>,
    pub k: Option<u64>,
    pub l_max: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubgroupTask {
    pub subgroup: Spanned<Vec<String>>,
    pub stages: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstructTask {
    #[serde(default = "default_mode")]
    pub mode: String,
    pub target: Option<FactorsBlock>,
    pub copies: Option<usize>,
    pub l_max: usize,
    pub theta: Option<String>,
}

fn default_mode() -> String {
    "strongly-outer".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossedTask {
    pub stage: usize,
    #[serde(default = "default_words")]
    pub words: usize,
    #[serde(default = "default_word_length")]
    pub word_length: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_words() -> usize {
    200
}

fn default_word_length() -> usize {
    4
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimplexTask {
    pub depth: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    pub group: Spanned<GroupBlock>,
    pub factors: Option<Spanned<FactorsBlock>>,
    pub action: Option<Spanned<ActionBlock>>,
    pub output: Option<String>,
    pub evaluate: Option<EvaluateTask>,
    pub tower: Option<TowerTask>,
    pub certify: Option<CertifyTask>,
    pub witness: Option<WitnessTask>,
    #[serde(rename = "bump-up")]
    pub bump_up: Option<BumpUpTask>,
    #[serde(rename = "cut-down")]
    pub cut_down: Option<CutDownTask>,
    pub induce: Option<SubgroupTask>,
    pub extend: Option<SubgroupTask>,
    pub construct: Option<ConstructTask>,
    pub crossed: Option<CrossedTask>,
    pub simplex: Option<SimplexTask>,
}

/// A parsed document with its resolved group.
pub struct Loaded {
    pub source: String,
    pub doc: Document,
    pub group: GroupSpec,
}

pub fn load(source: String) -> Result<Loaded, InputError> {
    let doc: Document = toml::from_str(&source).map_err(|e| InputError {
        message: e.message().to_string(),
        location: e.span().map(|s| line_col(&source, s.start)),
    })?;
    let at = Located { src: &source };
    let group = build_group(doc.group.get_ref()).map_err(|m| at.err(doc.group.span(), m))?;
    Ok(Loaded { source, doc, group })
}

fn finite_of(b: &GroupBlock) -> Result<FiniteGroup, String> {
    match build_group(b)? {
        GroupSpec::FiniteTable(g) => Ok(g),
        _ => Err("products need finite table groups".into()),
    }
}

pub fn build_group(b: &GroupBlock) -> Result<GroupSpec, String> {
    let set = [
        b.cyclic.is_some(),
        b.symmetric.is_some(),
        b.dihedral.is_some(),
        b.table.is_some(),
        b.abelian.is_some(),
        b.sum.is_some(),
        b.product.is_some(),
    ];
    if set.iter().filter(|&&x| x).count() != 1 {
        return Err("group needs exactly one of cyclic, symmetric, dihedral, table, abelian, sum, product".into());
    }
    if b.names.is_some() && b.table.is_none() {
        return Err("names only apply to a table".into());
    }
    let positive = |n: usize, what: &str| if n == 0 { Err(format!("{what} needs a positive size")) } else { Ok(n) };
    let g = if let Some(n) = b.cyclic {
        GroupSpec::FiniteTable(FiniteGroup::cyclic(positive(n, "cyclic")?))
    } else if let Some(n) = b.symmetric {
        if !(1..=6).contains(&n) {
            return Err("symmetric groups are supported on 1 to 6 points".into());
        }
        GroupSpec::FiniteTable(FiniteGroup::symmetric(n))
    } else if let Some(n) = b.dihedral {
        GroupSpec::FiniteTable(FiniteGroup::dihedral(positive(n, "dihedral")?))
    } else if let Some(t) = &b.table {
        let mut g = FiniteGroup::from_table(t.clone()).map_err(|e| e.to_string())?;
        if let Some(names) = &b.names {
            g = g.with_names(names.clone()).map_err(|e| e.to_string())?;
        }
        GroupSpec::FiniteTable(g)
    } else if let Some(orders) = &b.abelian {
        let orders = orders
            .iter()
            .map(|o| match o {
                OrderValue::Finite(0) => Err("generator order must be positive".to_string()),
                OrderValue::Finite(k) => Ok(Some(*k)),
                OrderValue::Named(s) if s == "inf" || s == "infinite" => Ok(None),
                OrderValue::Named(s) => Err(format!("unknown order '{s}'")),
            })
            .collect::<Result<Vec<_>, _>>()?;
        GroupSpec::AbelianPresented(AbelianGroup::from_orders(&orders).map_err(|e| e.to_string())?)
    } else if let Some(parts) = &b.sum {
        GroupSpec::DirectSum(parts.iter().map(build_group).collect::<Result<_, _>>()?)
    } else {
        let parts = b.product.as_ref().expect("one kind is set");
        let mut it = parts.iter();
        let first = finite_of(it.next().ok_or("empty product")?)?;
        GroupSpec::FiniteTable(it.try_fold(first, |acc, p| Ok::<_, String>(acc.direct_product(&finite_of(p)?)))?)
    };
    Ok(g)
}

pub fn build_factors(b: &FactorsBlock) -> Result<FactorSequence, String> {
    let seq = if b.universal {
        if !b.prefix.is_empty() || !b.period.is_empty() {
            return Err("universal excludes prefix and period".into());
        }
        FactorSequence::Universal
    } else if b.period.is_empty() {
        FactorSequence::Prefix(b.prefix.clone())
    } else {
        FactorSequence::Pattern { prefix: b.prefix.clone(), period: b.period.clone() }
    };
    seq.validate().map_err(|e| e.to_string())?;
    Ok(seq)
}

pub fn parse_real(s: &str) -> Result<Real, String> {
    Real::parse(s).map_err(|e| e.to_string())
}

fn parse_rational(s: &str) -> Result<Rational64, String> {
    match parse_real(s)? {
        Real::Rational(r) => Ok(r),
        _ => Err(format!("'{s}' is not rational")),
    }
}

fn factor_images(group: &GroupSpec, f: &FactorSpec) -> Result<FactorImages, String> {
    let units = match (&f.images, &f.diagonal) {
        (Some(m), None) => m.iter().map(|rows| unitary_literal(rows)).collect::<Result<Vec<_>, _>>()?,
        (None, Some(d)) => d.iter().map(|e| diagonal_literal(e)).collect::<Result<Vec<_>, _>>()?,
        _ => return Err("a factor needs exactly one of images, diagonal".into()),
    };
    let want = match group {
        GroupSpec::FiniteTable(g) => g.order(),
        GroupSpec::AbelianPresented(a) => a.rank(),
        GroupSpec::DirectSum(_) => return Err("explicit factors need a table or a presented abelian group".into()),
    };
    if units.len() != want {
        return Err(format!("factor lists {} unitaries, the group needs {want}", units.len()));
    }
    Ok(match group {
        GroupSpec::FiniteTable(_) => FactorImages::Table(Arc::new(units)),
        _ => FactorImages::Generators(Arc::new(units)),
    })
}

/// Build the action block's action for `group`.
pub fn build_action(group: &GroupSpec, b: &ActionBlock, factors: Option<&FactorSequence>) -> Result<ProductAction, String> {
    let theta = b.theta.as_deref().map(parse_real).transpose()?.unwrap_or(Real::Sqrt(2));
    let finite = || match group {
        GroupSpec::FiniteTable(g) => Ok(g),
        _ => Err(format!("action '{}' needs a finite table group", b.kind)),
    };
    let a = match b.kind.as_str() {
        "identity" => {
            let f = factors.ok_or("identity action needs a factors block")?;
            identity_action(group.clone(), f.clone()).map_err(|e| e.to_string())?
        }
        "regular" => regular_action(finite()?),
        "map-embed" => map_embed_action(finite()?),
        "flow" => {
            let r = b.r.as_ref().ok_or("flow action needs r")?;
            let r = r.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>, _>>()?;
            flow_action(group, theta, r).map_err(|e| e.to_string())?
        }
        "abelian" => abelian_action(group, theta).map_err(|e| e.to_string())?,
        "explicit" => {
            let prefix = b.prefix.iter().map(|f| factor_images(group, f)).collect::<Result<Vec<_>, _>>()?;
            let period = b.period.iter().map(|f| factor_images(group, f)).collect::<Result<Vec<_>, _>>()?;
            explicit_action(group.clone(), prefix, period).map_err(|e| e.to_string())?
        }
        "control" => {
            if *group != GroupSpec::cyclic(2) {
                return Err("control action is defined for cyclic = 2".into());
            }
            control_action(b.depth.ok_or("control action needs depth")?).map_err(|e| e.to_string())?
        }
        other => return Err(format!("unknown action kind '{other}'")),
    };
    let a = match b.copies {
        Some(0) => return Err("copies must be positive".into()),
        Some(c) if c > 1 => tensor_power(&a, c).map_err(|e| e.to_string())?,
        _ => a,
    };
    if let (Some(f), "regular" | "map-embed" | "flow" | "abelian" | "explicit") = (factors, b.kind.as_str()) {
        check_factors(a.factors(), f)?;
    }
    Ok(a)
}

/// A declared factor pattern must agree with the action's on the first factors.
fn check_factors(have: &FactorSequence, declared: &FactorSequence) -> Result<(), String> {
    let n = [have.len(), declared.len()].into_iter().flatten().min().unwrap_or(16).min(16);
    if have.len().is_some() != declared.len().is_some() {
        return Err("declared factors and action differ in length".into());
    }
    let a = have.prefix(n).map_err(|e| e.to_string())?;
    let b = declared.prefix(n).map_err(|e| e.to_string())?;
    if a != b {
        return Err(format!("declared factors {b:?} do not match the action's {a:?}"));
    }
    Ok(())
}

impl Loaded {
    pub fn located(&self) -> Located<'_> {
        Located { src: &self.source }
    }

    pub fn factors(&self) -> Result<Option<FactorSequence>, InputError> {
        match &self.doc.factors {
            Some(f) => build_factors(f.get_ref()).map(Some).map_err(|m| self.located().err(f.span(), m)),
            None => Ok(None),
        }
    }

    fn action_block(&self) -> Result<&Spanned<ActionBlock>, InputError> {
        self.doc.action.as_ref().ok_or_else(|| InputError::plain("document has no action block"))
    }

    /// The document's action on its group.
    pub fn action(&self) -> Result<ProductAction, InputError> {
        let b = self.action_block()?;
        let f = self.factors()?;
        build_action(&self.group, b.get_ref(), f.as_ref()).map_err(|m| self.located().err(b.span(), m))
    }

    /// The action block applied to the subgroup table of `h` instead.
    pub fn subgroup_action(&self, sub: &FiniteGroup) -> Result<ProductAction, InputError> {
        let b = self.action_block()?;
        build_action(&GroupSpec::FiniteTable(sub.clone()), b.get_ref(), None).map_err(|m| self.located().err(b.span(), m))
    }

    pub fn element(&self, s: &Spanned<String>) -> Result<Element, InputError> {
        self.group.parse_element(s.get_ref()).map_err(|e| self.located().err(s.span(), e.to_string()))
    }

    /// Sorted indices of a subgroup given by element names or indices.
    pub fn subgroup(&self, s: &Spanned<Vec<String>>) -> Result<(FiniteGroup, Vec<usize>), InputError> {
        let err = |m: String| self.located().err(s.span(), m);
        let GroupSpec::FiniteTable(g) = &self.group else {
            return Err(err("subgroups need a finite table group".into()));
        };
        let mut h = Vec::with_capacity(s.get_ref().len());
        for x in s.get_ref() {
            match self.group.parse_element(x).map_err(|e| err(e.to_string()))? {
                Element::Index(i) => h.push(i),
                _ => unreachable!("table groups use indices"),
            }
        }
        h.sort_unstable();
        h.dedup();
        if !g.is_subgroup(&h) {
            return Err(err(format!("{:?} is not a subgroup", s.get_ref())));
        }
        Ok((g.clone(), h))
    }
}
