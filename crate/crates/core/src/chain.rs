//! Parameterized families of arc families over products of intervals and
//! triangles, the generator families behind the BV and Gerstenhaber
//! operations, and exact checks of their face identities.

use num_traits::{One, Signed, Zero};

use crate::arc::{
    dot, unit, Arc, ArcCombinatorics, EndpointRef, ProjectiveArcFamily, WeightedArcFamily,
};
use crate::error::{Error, Result};
use crate::glue::compose_projective;
use crate::rational::{format_q, q, qi, Q};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DomainFactor {
    /// `s` in `[0, 1]`.
    Interval,
    /// `(s, t)` with `s, t >= 0` and `s + t <= 1`.
    Triangle,
}

impl DomainFactor {
    pub fn dim(self) -> usize {
        match self {
            DomainFactor::Interval => 1,
            DomainFactor::Triangle => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ParamDomain {
    pub factors: Vec<DomainFactor>,
}

impl ParamDomain {
    pub fn point() -> Self {
        ParamDomain { factors: vec![] }
    }

    pub fn interval() -> Self {
        ParamDomain { factors: vec![DomainFactor::Interval] }
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim()).sum()
    }

    /// Coordinate offset of each factor.
    fn offsets(&self) -> Vec<usize> {
        self.factors
            .iter()
            .scan(0, |acc, f| {
                let o = *acc;
                *acc += f.dim();
                Some(o)
            })
            .collect()
    }

    pub fn contains(&self, p: &[Q]) -> bool {
        if p.len() != self.dim() {
            return false;
        }
        let mut k = 0;
        for f in &self.factors {
            let ok = match f {
                DomainFactor::Interval => !p[k].is_negative() && p[k] <= Q::one(),
                DomainFactor::Triangle => {
                    !p[k].is_negative() && !p[k + 1].is_negative() && &p[k] + &p[k + 1] <= Q::one()
                }
            };
            if !ok {
                return false;
            }
            k += f.dim();
        }
        true
    }

    pub fn product(&self, other: &ParamDomain) -> ParamDomain {
        ParamDomain { factors: self.factors.iter().chain(&other.factors).copied().collect() }
    }
}

/// `constant + coeffs · p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Affine {
    pub constant: Q,
    pub coeffs: Vec<Q>,
}

impl Affine {
    pub fn constant(c: Q, dim: usize) -> Self {
        Affine { constant: c, coeffs: vec![Q::zero(); dim] }
    }

    /// `c + Σ terms`, each term a coordinate index and coefficient.
    pub fn linear(c: Q, dim: usize, terms: &[(usize, Q)]) -> Self {
        let mut a = Affine::constant(c, dim);
        for (k, x) in terms {
            a.coeffs[*k] += x;
        }
        a
    }

    pub fn eval(&self, p: &[Q]) -> Q {
        self.coeffs.iter().zip(p).fold(self.constant.clone(), |acc, (c, x)| acc + c * x)
    }

    /// `self ∘ map`, where `map` sends new coordinates to old ones.
    fn compose(&self, map: &[Affine]) -> Affine {
        let dim = map.first().map_or(0, |m| m.coeffs.len());
        let mut out = Affine::constant(self.constant.clone(), dim);
        for (c, m) in self.coeffs.iter().zip(map) {
            out.constant += c * &m.constant;
            for (o, x) in out.coeffs.iter_mut().zip(&m.coeffs) {
                *o += c * x;
            }
        }
        out
    }
}

/// A polyhedral piece `{p : each bound(p) >= 0}` carrying one combinatorial
/// type with affine weights.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cell {
    pub bounds: Vec<Affine>,
    pub comb: ArcCombinatorics,
    pub weights: Vec<Affine>,
}

impl Cell {
    fn contains(&self, p: &[Q]) -> bool {
        self.bounds.iter().all(|b| !b.eval(p).is_negative())
    }

    fn restricted(&self, map: &[Affine]) -> Cell {
        Cell {
            bounds: self.bounds.iter().map(|b| b.compose(map)).collect(),
            comb: self.comb.clone(),
            weights: self.weights.iter().map(|w| w.compose(map)).collect(),
        }
    }

    /// The same cell after relabeling boundaries; arcs are renumbered by
    /// the relabeled family, so weights follow their arcs.
    fn relabeled(&self, sigma: &[usize]) -> Result<Cell> {
        let markers: Vec<Q> = (1..=self.weights.len()).map(|k| qi(k as i64)).collect();
        let f = WeightedArcFamily { comb: self.comb.clone(), weights: markers }.relabel(sigma)?;
        let weights =
            f.weights.iter().map(|m| self.weights[m.numer().try_into().unwrap_or(1usize) - 1].clone()).collect();
        Ok(Cell { bounds: self.bounds.clone(), comb: f.comb, weights })
    }
}

/// A facet of one factor of a domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Facet {
    /// `s = 0` or `s = 1` on an interval factor.
    IntervalEnd { factor: usize, at_one: bool },
    /// `s = 0`, `t = 0` or `s + t = 1` on a triangle factor.
    TriangleEdge { factor: usize, edge: TriangleEdge },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriangleEdge {
    /// `s = 0`, parameterized by `t`.
    S0,
    /// `t = 0`, parameterized by `s`.
    T0,
    /// `s + t = 1`, parameterized by `s`.
    Hypotenuse,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CellwiseFamily {
    Cells { domain: ParamDomain, cells: Vec<Cell> },
    /// Pointwise composition; parameters of `outer` come first.
    Composite { outer: Box<CellwiseFamily>, slot: usize, inner: Box<CellwiseFamily> },
    Relabeled { family: Box<CellwiseFamily>, sigma: Vec<usize> },
}

impl CellwiseFamily {
    pub fn domain(&self) -> ParamDomain {
        match self {
            CellwiseFamily::Cells { domain, .. } => domain.clone(),
            CellwiseFamily::Composite { outer, inner, .. } => outer.domain().product(&inner.domain()),
            CellwiseFamily::Relabeled { family, .. } => family.domain(),
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            CellwiseFamily::Cells { cells, .. } => cells[0].comb.counts.len() - 1,
            CellwiseFamily::Composite { outer, inner, .. } => outer.arity() + inner.arity() - 1,
            CellwiseFamily::Relabeled { family, .. } => family.arity(),
        }
    }

    pub fn relabel(&self, sigma: &[usize]) -> CellwiseFamily {
        CellwiseFamily::Relabeled { family: Box::new(self.clone()), sigma: sigma.to_vec() }
    }

    /// A constant family at one point.
    pub fn point(f: &WeightedArcFamily) -> CellwiseFamily {
        CellwiseFamily::Cells {
            domain: ParamDomain::point(),
            cells: vec![Cell {
                bounds: vec![],
                comb: f.comb.clone(),
                weights: f.weights.iter().map(|w| Affine::constant(w.clone(), 0)).collect(),
            }],
        }
    }
}

/// Names of the generator families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generator {
    One,
    Delta,
    Dot,
    Star,
    /// The `n`-ary operation whose global zero runs once around lobe 1.
    DeltaN(usize),
}

impl std::str::FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one" => Ok(Generator::One),
            "delta" => Ok(Generator::Delta),
            "dot" => Ok(Generator::Dot),
            "star" => Ok(Generator::Star),
            _ => s
                .strip_prefix("delta_")
                .and_then(|k| k.parse().ok())
                .filter(|k| *k >= 1)
                .map(Generator::DeltaN)
                .ok_or_else(|| Error::Unsupported(format!("unknown generator {s:?}"))),
        }
    }
}

/// A linear tree read off its boundary-0 sequence: each entry is an input
/// boundary and a weight; every input's ends keep the boundary-0 order.
fn linear_tree_comb(n: usize, seq: &[usize]) -> ArcCombinatorics {
    tree_comb(n, seq, |_, k| k)
}

/// A tree from its boundary-0 sequence, with the window order at each
/// input boundary given by `slot(input, k)` for that input's `k`-th end
/// (0-based) in boundary-0 order.
fn tree_comb(n: usize, seq: &[usize], slot: impl Fn(usize, usize) -> usize) -> ArcCombinatorics {
    let mut counts = vec![0; n + 1];
    counts[0] = seq.len();
    let mut arcs = Vec::new();
    for (j, &b) in seq.iter().enumerate() {
        let k = counts[b];
        counts[b] += 1;
        arcs.push((j, b, k));
    }
    let arcs: Vec<Arc> = arcs
        .into_iter()
        .map(|(j, b, k)| Arc::new(EndpointRef::new(0, j + 1), EndpointRef::new(b, slot(b, k) + 1)))
        .collect();
    let weights = vec![Q::one(); arcs.len()];
    WeightedArcFamily::planar_disks(n + 1, counts, arcs, weights).expect("tree data is well formed").comb
}

/// Reorders cell weights given in boundary-0 sequence order into the
/// canonical arc order of `comb`.
fn by_arc(comb: &ArcCombinatorics, weights_in_seq: Vec<Affine>) -> Vec<Affine> {
    let mut out = vec![None; comb.arcs.len()];
    for (a, arc) in comb.arcs.iter().enumerate() {
        let zero = arc.ends.iter().find(|e| e.boundary == 0).expect("tree arc meets 0");
        out[a] = Some(weights_in_seq[zero.slot - 1].clone());
    }
    out.into_iter().map(|w| w.expect("every arc weighted")).collect()
}

fn unit_interval_bounds() -> Vec<Affine> {
    vec![Affine::linear(Q::zero(), 1, &[(0, Q::one())]), Affine::linear(Q::one(), 1, &[(0, -Q::one())])]
}

fn interval_family(comb: ArcCombinatorics, weights_in_seq: Vec<Affine>) -> CellwiseFamily {
    let weights = by_arc(&comb, weights_in_seq);
    CellwiseFamily::Cells {
        domain: ParamDomain::interval(),
        cells: vec![Cell { bounds: unit_interval_bounds(), comb, weights }],
    }
}

fn s_() -> Affine {
    Affine::linear(Q::zero(), 1, &[(0, Q::one())])
}

fn one_minus_s() -> Affine {
    Affine::linear(Q::one(), 1, &[(0, -Q::one())])
}

pub fn make_generator(g: Generator) -> CellwiseFamily {
    match g {
        Generator::One => CellwiseFamily::point(&unit(Q::one())),
        Generator::Dot => CellwiseFamily::point(&dot(Q::one(), Q::one())),
        Generator::Delta => delta_n(1),
        Generator::DeltaN(n) => delta_n(n),
        Generator::Star => {
            // lobe 2 travels once around lobe 1
            let comb = linear_tree_comb(2, &[1, 2, 1]);
            interval_family(comb, vec![one_minus_s(), Affine::constant(Q::one(), 1), s_()])
        }
    }
}

/// The global zero travels once around lobe 1 while lobes `2..=n` stay
/// attached at lobe 1's local zero.
fn delta_n(n: usize) -> CellwiseFamily {
    let n = n.max(1);
    let mut seq = vec![1];
    seq.extend(2..=n);
    seq.push(1);
    // the last piece of lobe 1 starts at its local zero
    let comb = tree_comb(n, &seq, |b, k| if b == 1 { 1 - k } else { k });
    let mut w = vec![s_()];
    w.extend((2..=n).map(|_| Affine::constant(Q::one(), 1)));
    w.push(one_minus_s());
    interval_family(comb, w)
}

/// The `n`-fold product point: arcs `0-k` of weight 1 in order `1..=n`.
pub fn product_n(n: usize) -> WeightedArcFamily {
    let seq: Vec<usize> = (1..=n).collect();
    let comb = linear_tree_comb(n, &seq);
    WeightedArcFamily { weights: vec![Q::one(); comb.arcs.len()], comb }
}

/// Evaluates, drops zero-weight arcs, validates and projectivizes.
pub fn eval_family(f: &CellwiseFamily, p: &[Q]) -> Result<ProjectiveArcFamily> {
    let domain = f.domain();
    if !domain.contains(p) {
        return Err(Error::OutsideDomain(format!(
            "({}) is not in a domain of dimension {}",
            p.iter().map(format_q).collect::<Vec<_>>().join(", "),
            domain.dim()
        )));
    }
    eval_inner(f, p)
}

fn eval_inner(f: &CellwiseFamily, p: &[Q]) -> Result<ProjectiveArcFamily> {
    match f {
        CellwiseFamily::Cells { cells, .. } => {
            let cell = cells
                .iter()
                .find(|c| c.contains(p))
                .ok_or_else(|| Error::OutsideDomain("no cell contains the point".into()))?;
            let weights: Vec<Q> = cell.weights.iter().map(|w| w.eval(p)).collect();
            if let Some(w) = weights.iter().find(|w| w.is_negative()) {
                return Err(Error::NegativeWeight(format_q(w)));
            }
            let g = WeightedArcFamily { comb: cell.comb.clone(), weights }.drop_zero_weights()?;
            g.ensure_valid()?;
            if g.total().is_zero() {
                return Err(Error::Invalid("every weight vanishes".into()));
            }
            Ok(g.projective())
        }
        CellwiseFamily::Composite { outer, slot, inner } => {
            let d = outer.domain().dim();
            let a = eval_inner(outer, &p[..d])?;
            let b = eval_inner(inner, &p[d..])?;
            compose_projective(&a, *slot, &b)
        }
        CellwiseFamily::Relabeled { family, sigma } => eval_inner(family, p)?.relabel(sigma),
    }
}

pub fn compose_families(f: &CellwiseFamily, i: usize, g: &CellwiseFamily) -> Result<CellwiseFamily> {
    if i == 0 || i > f.arity() {
        return Err(Error::Arity(format!("slot {i} of a family of arity {}", f.arity())));
    }
    Ok(CellwiseFamily::Composite { outer: Box::new(f.clone()), slot: i, inner: Box::new(g.clone()) })
}

/// Affine embedding of a facet's coordinates into the factor's.
fn facet_map(factor: DomainFactor, facet: Facet) -> Result<(Vec<DomainFactor>, Vec<Affine>)> {
    let c = |x: i64, d: usize| Affine::constant(qi(x), d);
    let v = |d: usize, k: usize, sign: i64, x: i64| Affine::linear(qi(x), d, &[(k, qi(sign))]);
    match (factor, facet) {
        (DomainFactor::Interval, Facet::IntervalEnd { at_one, .. }) => {
            Ok((vec![], vec![c(i64::from(at_one), 0)]))
        }
        (DomainFactor::Triangle, Facet::TriangleEdge { edge, .. }) => {
            let map = match edge {
                TriangleEdge::S0 => vec![c(0, 1), v(1, 0, 1, 0)],
                TriangleEdge::T0 => vec![v(1, 0, 1, 0), c(0, 1)],
                TriangleEdge::Hypotenuse => vec![v(1, 0, 1, 0), v(1, 0, -1, 1)],
            };
            Ok((vec![DomainFactor::Interval], map))
        }
        _ => Err(Error::InvalidFacet(format!("{facet:?} does not fit a {factor:?} factor"))),
    }
}

fn facet_factor(facet: Facet) -> usize {
    match facet {
        Facet::IntervalEnd { factor, .. } | Facet::TriangleEdge { factor, .. } => factor,
    }
}

fn with_factor(facet: Facet, factor: usize) -> Facet {
    match facet {
        Facet::IntervalEnd { at_one, .. } => Facet::IntervalEnd { factor, at_one },
        Facet::TriangleEdge { edge, .. } => Facet::TriangleEdge { factor, edge },
    }
}

/// Restriction to a facet; the facet's factor is replaced by its own
/// parameters (none for an interval end, one for a triangle edge).
pub fn face(f: &CellwiseFamily, facet: Facet) -> Result<CellwiseFamily> {
    let domain = f.domain();
    let k = facet_factor(facet);
    if k >= domain.factors.len() {
        return Err(Error::InvalidFacet(format!("factor {k} of {}", domain.factors.len())));
    }
    match f {
        CellwiseFamily::Cells { domain, cells } => {
            let (replacement, local) = facet_map(domain.factors[k], facet)?;
            let offsets = domain.offsets();
            let new_factors: Vec<DomainFactor> = domain.factors[..k]
                .iter()
                .copied()
                .chain(replacement.iter().copied())
                .chain(domain.factors[k + 1..].iter().copied())
                .collect();
            let new_domain = ParamDomain { factors: new_factors };
            let nd = new_domain.dim();
            let before = offsets[k];
            let rd: usize = replacement.iter().map(|r| r.dim()).sum();
            let old_dim = domain.dim();
            let fd = domain.factors[k].dim();
            let mut map: Vec<Affine> = Vec::with_capacity(old_dim);
            for j in 0..old_dim {
                if j < before {
                    map.push(Affine::linear(Q::zero(), nd, &[(j, Q::one())]));
                } else if j < before + fd {
                    let l = &local[j - before];
                    let mut a = Affine::constant(l.constant.clone(), nd);
                    for (r, x) in l.coeffs.iter().enumerate() {
                        a.coeffs[before + r] += x;
                    }
                    map.push(a);
                } else {
                    map.push(Affine::linear(Q::zero(), nd, &[(j - fd + rd, Q::one())]));
                }
            }
            let cells = cells.iter().map(|c| c.restricted(&map)).collect();
            Ok(CellwiseFamily::Cells { domain: new_domain, cells })
        }
        CellwiseFamily::Composite { outer, slot, inner } => {
            let no = outer.domain().factors.len();
            if k < no {
                Ok(CellwiseFamily::Composite {
                    outer: Box::new(face(outer, facet)?),
                    slot: *slot,
                    inner: inner.clone(),
                })
            } else {
                Ok(CellwiseFamily::Composite {
                    outer: outer.clone(),
                    slot: *slot,
                    inner: Box::new(face(inner, with_factor(facet, k - no))?),
                })
            }
        }
        CellwiseFamily::Relabeled { family, sigma } => {
            Ok(CellwiseFamily::Relabeled { family: Box::new(face(family, facet)?), sigma: sigma.clone() })
        }
    }
}

/// Relabels the cells of a family once, keeping affine weights.
pub fn relabel_cells(f: &CellwiseFamily, sigma: &[usize]) -> Result<CellwiseFamily> {
    match f {
        CellwiseFamily::Cells { domain, cells } => Ok(CellwiseFamily::Cells {
            domain: domain.clone(),
            cells: cells.iter().map(|c| c.relabeled(sigma)).collect::<Result<_>>()?,
        }),
        _ => Err(Error::Unsupported("only cellwise families relabel cell by cell".into())),
    }
}

/// Concatenates two interval families: the first on `[0, 1/2]`, the second
/// on `[1/2, 1]`, each at double speed.
pub fn concatenate(f: &CellwiseFamily, g: &CellwiseFamily) -> Result<CellwiseFamily> {
    let (CellwiseFamily::Cells { domain: d1, cells: c1 }, CellwiseFamily::Cells { domain: d2, cells: c2 }) = (f, g)
    else {
        return Err(Error::Unsupported("concatenation needs cellwise families".into()));
    };
    if *d1 != ParamDomain::interval() || *d2 != ParamDomain::interval() {
        return Err(Error::Unsupported("concatenation needs interval families".into()));
    }
    let first = [Affine::linear(Q::zero(), 1, &[(0, qi(2))])];
    let second = [Affine::linear(-Q::one(), 1, &[(0, qi(2))])];
    let mut cells: Vec<Cell> = c1.iter().map(|c| c.restricted(&first)).collect();
    cells.extend(c2.iter().map(|c| c.restricted(&second)));
    Ok(CellwiseFamily::Cells { domain: ParamDomain::interval(), cells })
}

/// The bracket loop: star followed by star with its inputs swapped.
pub fn bracket() -> Result<CellwiseFamily> {
    let star = make_generator(Generator::Star);
    concatenate(&star, &relabel_cells(&star, &[0, 2, 1])?)
}

/// Rescales the arcs at every input so each input has total width 1; on
/// Chinese trees this is a straight-line homotopy inside one cell.
pub fn normalize_inputs(f: &WeightedArcFamily) -> Result<ProjectiveArcFamily> {
    if !crate::arc::chinese_tree_incidence(f) {
        return Err(Error::NotATree("normalization needs every arc to meet boundary 0 once".into()));
    }
    let n = f.comb.counts.len();
    let totals: Vec<Q> = (0..n).map(|b| f.total_weight(b)).collect::<Result<_>>()?;
    let mut g = f.clone();
    for (arc, w) in g.comb.arcs.iter().zip(g.weights.iter_mut()) {
        let b = if arc.ends[0].boundary == 0 { arc.ends[1].boundary } else { arc.ends[0].boundary };
        *w = &*w / &totals[b];
    }
    Ok(g.projective())
}

/// The two-parameter family over the unit square whose edges are
/// `δ(a,b,c)` (t = 0), `δ(a,b)c` (t = 1), `b δ(a,c)` (s = 0) and `δ(a)bc`
/// (s = 1), with inputs a, b, c on boundaries 1, 2, 3.
pub fn bv_square() -> CellwiseFamily {
    let d = 2;
    let aff = |c: i64, s: i64, t: i64| Affine::linear(qi(c), d, &[(0, qi(s)), (1, qi(t))]);
    let square = [aff(0, 1, 0), aff(1, -1, 0), aff(0, 0, 1), aff(1, 0, -1)];
    let lower: Vec<Affine> = square.iter().cloned().chain([aff(1, -1, -1)]).collect();
    let upper: Vec<Affine> = square.iter().cloned().chain([aff(-1, 1, 1)]).collect();
    // s + t <= 1: lobe 1 pieces s, t, 1 - s - t; the last starts at its local zero
    let lower_comb = tree_comb(3, &[1, 2, 1, 3, 1], |b, k| if b == 1 { [1, 2, 0][k] } else { k });
    let lower_w = vec![aff(0, 1, 0), aff(1, 0, 0), aff(0, 0, 1), aff(1, 0, 0), aff(1, -1, -1)];
    // s + t >= 1: lobe 1 pieces s + t - 1, 1 - t, 1 - s; the second starts at it
    let upper_comb = tree_comb(3, &[1, 1, 2, 1, 3], |b, k| if b == 1 { [2, 0, 1][k] } else { k });
    let upper_w = vec![aff(-1, 1, 1), aff(1, 0, -1), aff(1, 0, 0), aff(1, -1, 0), aff(1, 0, 0)];
    CellwiseFamily::Cells {
        domain: ParamDomain { factors: vec![DomainFactor::Interval, DomainFactor::Interval] },
        cells: vec![
            Cell { bounds: lower, weights: by_arc(&lower_comb, lower_w), comb: lower_comb },
            Cell { bounds: upper, weights: by_arc(&upper_comb, upper_w), comb: upper_comb },
        ],
    }
}

/// The homotopy from `δ(a₁, a₂⋯aₙ)` (h = 0) to `δ(a₁,…,aₙ)` (h = 1) that
/// scales the bands missing boundary 1 to weight 1. Parameters `(h, u)`.
pub fn delta_scaling(n: usize) -> CellwiseFamily {
    let d = 2;
    let mut seq = vec![1];
    seq.extend(2..=n);
    seq.push(1);
    let comb = tree_comb(n, &seq, |b, k| if b == 1 { 1 - k } else { k });
    let rest = q(1, n as i64 - 1);
    let grow = Affine::linear(rest.clone(), d, &[(0, Q::one() - &rest)]);
    let mut w = vec![Affine::linear(Q::zero(), d, &[(1, Q::one())])];
    w.extend((2..=n).map(|_| grow.clone()));
    w.push(Affine::linear(Q::one(), d, &[(1, -Q::one())]));
    let aff = |c: i64, k: usize, x: i64| Affine::linear(qi(c), d, &[(k, qi(x))]);
    CellwiseFamily::Cells {
        domain: ParamDomain { factors: vec![DomainFactor::Interval, DomainFactor::Interval] },
        cells: vec![Cell {
            bounds: vec![aff(0, 0, 1), aff(1, 0, -1), aff(0, 1, 1), aff(1, 1, -1)],
            weights: by_arc(&comb, w),
            comb,
        }],
    }
}

/// A signed sum of families; `Δ = -δ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chain {
    pub terms: Vec<(i64, CellwiseFamily)>,
}

impl Chain {
    pub fn bv_operator() -> Chain {
        Chain { terms: vec![(-1, make_generator(Generator::Delta))] }
    }

    /// Boundary of a chain of interval families as a signed list of points.
    pub fn boundary_points(&self) -> Result<Vec<(i64, ProjectiveArcFamily)>> {
        let mut out = Vec::new();
        for (c, f) in &self.terms {
            if f.domain() != ParamDomain::interval() {
                return Err(Error::Unsupported("boundary of a non-interval family".into()));
            }
            out.push((*c, eval_family(f, &[Q::one()])?));
            out.push((-*c, eval_family(f, &[Q::zero()])?));
        }
        Ok(out)
    }
}

/// Outcome of one group of face identities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractReport {
    pub name: &'static str,
    pub checks: usize,
    pub failures: Vec<String>,
}

impl ContractReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

pub const CONTRACTS: [&str; 5] = ["star-faces", "bracket", "cyclic-delta", "delta-scaling", "bv-square"];

struct Tally {
    name: &'static str,
    checks: usize,
    failures: Vec<String>,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Tally { name, checks: 0, failures: vec![] }
    }

    fn eq(&mut self, what: impl Into<String>, lhs: Result<ProjectiveArcFamily>, rhs: Result<ProjectiveArcFamily>) {
        self.checks += 1;
        match (lhs, rhs) {
            (Ok(a), Ok(b)) if a == b => {}
            (Ok(_), Ok(_)) => self.failures.push(format!("{}: families differ", what.into())),
            (Err(e), _) | (_, Err(e)) => self.failures.push(format!("{}: {e}", what.into())),
        }
    }

    fn done(self) -> ContractReport {
        ContractReport { name: self.name, checks: self.checks, failures: self.failures }
    }
}

fn samples() -> Vec<Q> {
    vec![qi(0), q(1, 4), q(1, 3), q(1, 2), q(2, 3), q(3, 4), qi(1)]
}

fn normalized(r: Result<ProjectiveArcFamily>) -> Result<ProjectiveArcFamily> {
    normalize_inputs(r?.weighted())
}

pub fn check_face_contracts(name: Option<&str>) -> Result<Vec<ContractReport>> {
    if let Some(n) = name {
        if !CONTRACTS.contains(&n) {
            return Err(Error::Unsupported(format!("unknown identity {n:?}")));
        }
    }
    let wanted = |n: &str| name.is_none_or(|x| x == n);
    let mut out = Vec::new();
    let swap = [0, 2, 1];
    let dot_p = dot(Q::one(), Q::one()).projective();
    let star = make_generator(Generator::Star);
    if wanted("star-faces") {
        let mut t = Tally::new("star-faces");
        let at0 = Facet::IntervalEnd { factor: 0, at_one: false };
        let at1 = Facet::IntervalEnd { factor: 0, at_one: true };
        t.eq("star(0) = dot", face(&star, at0).and_then(|f| eval_family(&f, &[])), Ok(dot_p.clone()));
        t.eq("star(1) = swapped dot", face(&star, at1).and_then(|f| eval_family(&f, &[])), dot_p.relabel(&swap));
        // d(star) = τ·dot - dot as signed points
        let bd = Chain { terms: vec![(1, star.clone())] }.boundary_points()?;
        t.checks += 1;
        if bd != vec![(1, dot_p.relabel(&swap)?), (-1, dot_p.clone())] {
            t.failures.push("boundary of star is not the commutator".into());
        }
        let delta = make_generator(Generator::Delta);
        for at_one in [false, true] {
            let f = face(&delta, Facet::IntervalEnd { factor: 0, at_one })?;
            t.eq(format!("delta face {at_one} = one"), eval_family(&f, &[]), Ok(unit(Q::one()).projective()));
        }
        out.push(t.done());
    }
    if wanted("bracket") {
        let mut t = Tally::new("bracket");
        let br = bracket()?;
        for s in samples() {
            let half = q(1, 2);
            let expected = if s <= half {
                eval_family(&star, &[&s * qi(2)])
            } else {
                eval_family(&star, &[&s * qi(2) - qi(1)]).and_then(|f| f.relabel(&swap))
            };
            t.eq(format!("bracket({})", format_q(&s)), eval_family(&br, std::slice::from_ref(&s)), expected);
        }
        t.eq("bracket closes up", eval_family(&br, &[qi(0)]), eval_family(&br, &[qi(1)]));
        t.eq(
            "bracket is continuous at 1/2",
            eval_family(&star, &[qi(1)]),
            eval_family(&star, &[qi(0)]).and_then(|f| f.relabel(&swap)),
        );
        out.push(t.done());
    }
    if wanted("cyclic-delta") {
        let mut t = Tally::new("cyclic-delta");
        let delta = make_generator(Generator::Delta);
        for n in 2..=3usize {
            let lhs = compose_families(&delta, 1, &CellwiseFamily::point(&product_n(n)))?;
            let dn = make_generator(Generator::DeltaN(n));
            for s in samples() {
                // on [k/n, (k+1)/n] the zero runs around lobe n - k
                let ns = &s * qi(n as i64);
                let k = (ns.floor().to_integer().try_into().unwrap_or(0usize)).min(n - 1);
                let u = &ns - qi(k as i64);
                let j = (n - 1 - k) % n;
                let sigma: Vec<usize> =
                    std::iter::once(0).chain((1..=n).map(|b| (b - 1 + j) % n + 1)).collect();
                t.eq(
                    format!("delta(a1..a{n}) at {}", format_q(&s)),
                    eval_family(&lhs, std::slice::from_ref(&s)),
                    eval_family(&dn, &[u]).and_then(|f| f.relabel(&sigma)),
                );
            }
        }
        out.push(t.done());
    }
    if wanted("delta-scaling") {
        let mut t = Tally::new("delta-scaling");
        for n in 3..=4usize {
            let h = delta_scaling(n);
            let start = face(&h, Facet::IntervalEnd { factor: 0, at_one: false })?;
            let end = face(&h, Facet::IntervalEnd { factor: 0, at_one: true })?;
            let split = compose_families(
                &make_generator(Generator::DeltaN(2)),
                2,
                &CellwiseFamily::point(&product_n(n - 1)),
            )?;
            let dn = make_generator(Generator::DeltaN(n));
            for u in samples() {
                let p = std::slice::from_ref(&u);
                t.eq(format!("h=0, n={n}, u={}", format_q(&u)), eval_family(&start, p), eval_family(&split, p));
                t.eq(format!("h=1, n={n}, u={}", format_q(&u)), eval_family(&end, p), eval_family(&dn, p));
                for hv in samples() {
                    t.checks += 1;
                    if let Err(e) = eval_family(&h, &[hv, u.clone()]) {
                        t.failures.push(format!("homotopy leaves the operad: {e}"));
                    }
                }
            }
        }
        out.push(t.done());
    }
    if wanted("bv-square") {
        let mut t = Tally::new("bv-square");
        let sq = bv_square();
        let delta = make_generator(Generator::Delta);
        let d2 = make_generator(Generator::DeltaN(2));
        let d3 = make_generator(Generator::DeltaN(3));
        let dot_f = CellwiseFamily::point(&dot(Q::one(), Q::one()));
        // δ(a,b)c: δ₂ inserted in the first factor of a product with c
        let dab_c = compose_families(&dot_f, 1, &d2)?;
        // b δ(a,c): product of b with δ₂(a,c), relabeled to inputs a=1, b=2, c=3
        let b_dac = compose_families(&dot_f, 2, &d2)?.relabel(&[0, 2, 1, 3]);
        let da_bc = compose_families(&CellwiseFamily::point(&product_n(3)), 1, &delta)?;
        let edges: [(&str, Facet, &CellwiseFamily); 4] = [
            ("t=0 is delta(a,b,c)", Facet::IntervalEnd { factor: 1, at_one: false }, &d3),
            ("t=1 is delta(a,b)c", Facet::IntervalEnd { factor: 1, at_one: true }, &dab_c),
            ("s=0 is b delta(a,c)", Facet::IntervalEnd { factor: 0, at_one: false }, &b_dac),
            ("s=1 is delta(a)bc", Facet::IntervalEnd { factor: 0, at_one: true }, &da_bc),
        ];
        for (label, facet, expected) in edges {
            let e = face(&sq, facet)?;
            for u in samples() {
                let p = std::slice::from_ref(&u);
                t.eq(format!("{label} at {}", format_q(&u)), normalized(eval_family(&e, p)), normalized(eval_family(expected, p)));
            }
        }
        for s in samples() {
            for tt in samples() {
                t.checks += 1;
                if let Err(e) = eval_family(&sq, &[s.clone(), tt.clone()]) {
                    t.failures.push(format!("square at ({}, {}): {e}", format_q(&s), format_q(&tt)));
                }
            }
        }
        out.push(t.done());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arc::delta_point;

    #[test]
    fn delta_examples() {
        let d = make_generator(Generator::Delta);
        assert_eq!(eval_family(&d, &[qi(0)]).unwrap(), unit(qi(1)).projective());
        assert_eq!(eval_family(&d, &[qi(1)]).unwrap(), unit(qi(1)).projective());
        assert_eq!(eval_family(&d, &[q(1, 2)]).unwrap(), delta_point(q(1, 2)).projective());
        assert_eq!(eval_family(&make_generator(Generator::Dot), &[]).unwrap(), dot(qi(1), qi(1)).projective());
        assert!(matches!(eval_family(&d, &[qi(2)]), Err(Error::OutsideDomain(_))));
        assert_eq!(Chain::bv_operator().terms[0].0, -1);
    }

    #[test]
    fn generators_are_valid_inside() {
        for g in [Generator::Star, Generator::DeltaN(2), Generator::DeltaN(3), Generator::DeltaN(4)] {
            let f = make_generator(g);
            for s in samples() {
                eval_family(&f, &[s]).unwrap();
            }
        }
    }

    #[test]
    fn unit_composition_is_pointwise_identity() {
        let one = make_generator(Generator::One);
        let star = make_generator(Generator::Star);
        let c = compose_families(&one, 1, &star).unwrap();
        for s in samples() {
            assert_eq!(eval_family(&c, std::slice::from_ref(&s)).unwrap(), eval_family(&star, &[s]).unwrap());
        }
    }

    #[test]
    fn faces_of_products() {
        let star = make_generator(Generator::Star);
        let c = compose_families(&star, 2, &star).unwrap();
        let f = face(&c, Facet::IntervalEnd { factor: 1, at_one: false }).unwrap();
        let expected = compose_families(&star, 2, &face(&star, Facet::IntervalEnd { factor: 0, at_one: false }).unwrap()).unwrap();
        for s in samples() {
            assert_eq!(eval_family(&f, std::slice::from_ref(&s)).unwrap(), eval_family(&expected, &[s]).unwrap());
        }
        assert!(matches!(face(&star, Facet::IntervalEnd { factor: 3, at_one: true }), Err(Error::InvalidFacet(_))));
    }

    /// Lobe 3 attached at perimeter time `p` of star(t), lobes of length 1.
    fn star_with_lobe(t: &Q, p: &Q) -> ProjectiveArcFamily {
        let one = Q::one();
        let (a, b) = (&one - t, t.clone());
        let seq: Vec<(usize, Q)> = if *p <= a {
            vec![(1, p.clone()), (3, one.clone()), (1, &a - p), (2, one.clone()), (1, b)]
        } else if *p <= &a + &one {
            vec![(1, a.clone()), (2, p - &a), (3, one.clone()), (2, &a + &one - p), (1, b)]
        } else {
            vec![(1, a.clone()), (2, one.clone()), (1, p - &a - &one), (3, one.clone()), (1, qi(2) - p)]
        };
        linear(&seq)
    }

    fn linear(seq: &[(usize, Q)]) -> ProjectiveArcFamily {
        let kept: Vec<&(usize, Q)> = seq.iter().filter(|(_, w)| !w.is_zero()).collect();
        let order: Vec<usize> = kept.iter().map(|(b, _)| *b).collect();
        let comb = linear_tree_comb(3, &order);
        let w: Vec<Affine> = kept.iter().map(|(_, w)| Affine::constant(w.clone(), 0)).collect();
        let weights = by_arc(&comb, w).iter().map(|a| a.constant.clone()).collect();
        crate::glue::merge_parallel(&WeightedArcFamily { comb, weights }).unwrap().0.projective()
    }

    #[test]
    fn iterated_star_normal_forms() {
        let star = make_generator(Generator::Star);
        let first = compose_families(&star, 1, &star).unwrap();
        let second = compose_families(&star, 2, &star).unwrap();
        for s in samples() {
            for t in samples() {
                let got = normalize_inputs(eval_family(&first, &[s.clone(), t.clone()]).unwrap().weighted()).unwrap();
                assert_eq!(got, star_with_lobe(&t, &(qi(2) - qi(2) * &s)), "s={s} t={t}");
                let got = normalize_inputs(eval_family(&second, &[s.clone(), t.clone()]).unwrap().weighted()).unwrap();
                let expected = linear(&[(1, qi(1) - &s), (2, qi(1) - &t), (3, qi(1)), (2, t.clone()), (1, s.clone())]);
                assert_eq!(got, expected, "s={s} t={t}");
            }
        }
    }

    #[test]
    fn all_face_contracts_pass() {
        for r in check_face_contracts(None).unwrap() {
            assert!(r.passed(), "{}: {:?}", r.name, r.failures);
            assert!(r.checks > 0);
        }
    }
}
