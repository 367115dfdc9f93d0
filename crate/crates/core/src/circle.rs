//! Operads on tuples of circle angles, their homology and the presentation
//! of the cyclic one by generators and relations.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::random::{random_fraction, random_input_permutation, rng};
use crate::rational::{format_q, frac, is_integer, q, qi, to_i64, Q};

/// Local linear composition parameters: entries outside the inserted block
/// get `γ θᵢ + δ θ′₀`, entries inside get `α θᵢ + β θ′₀`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CompositionSpec {
    pub alpha: Q,
    pub beta: Q,
    pub gamma: Q,
    pub delta: Q,
}

impl CompositionSpec {
    pub fn new(alpha: Q, beta: Q, gamma: Q, delta: Q) -> Self {
        CompositionSpec { alpha, beta, gamma, delta }
    }

    pub fn ints(a: i64, b: i64, c: i64, d: i64) -> Self {
        CompositionSpec::new(qi(a), qi(b), qi(c), qi(d))
    }

    /// Membership in the three families that give operads.
    pub fn is_expected_operad(&self) -> bool {
        let (z, o) = (Q::zero(), Q::one());
        self.gamma == z
            && ((self.alpha == z && self.beta == z && self.delta == z)
                || (self.alpha == o && self.delta == o && self.beta == z)
                || (self.alpha == o && self.delta == z))
    }
}

impl std::fmt::Display for CompositionSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "(alpha={}, beta={}, gamma={}, delta={})",
            format_q(&self.alpha),
            format_q(&self.beta),
            format_q(&self.gamma),
            format_q(&self.delta)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CircleOperad {
    /// `(S¹)ⁿ`, angles shifted by the inserted slot.
    D,
    /// `(S¹)ⁿ⁺¹`, the inner zero angle and the slot angle are forgotten.
    Q,
    /// The cyclic unital operad on `(S¹)ⁿ⁺¹`.
    Bi,
    /// The family with `θ′₀` entering the block scaled by `λ`.
    Rd(Q),
    General(CompositionSpec),
}

impl CircleOperad {
    pub fn spec(&self) -> Option<CompositionSpec> {
        match self {
            CircleOperad::D => None,
            CircleOperad::Q => Some(CompositionSpec::ints(0, 0, 0, 0)),
            CircleOperad::Bi => Some(CompositionSpec::ints(1, 0, 0, 1)),
            CircleOperad::Rd(l) => Some(CompositionSpec::new(Q::one(), l.clone(), Q::zero(), Q::zero())),
            CircleOperad::General(s) => Some(s.clone()),
        }
    }

    /// Tuple index of input label 1.
    fn base(&self) -> usize {
        usize::from(self.spec().is_some())
    }

    /// Number of inputs of a tuple of length `len`.
    pub fn arity_of(&self, len: usize) -> Result<usize> {
        let b = self.base();
        len.checked_sub(b).ok_or_else(|| Error::Arity("a tuple needs its zero angle".into()))
    }

    pub fn name(&self) -> String {
        match self {
            CircleOperad::D => "d".into(),
            CircleOperad::Q => "q".into(),
            CircleOperad::Bi => "bi".into(),
            CircleOperad::Rd(l) => format!("rd({})", format_q(l)),
            CircleOperad::General(s) => format!("general{s}"),
        }
    }
}

impl std::str::FromStr for CircleOperad {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "d" => Ok(CircleOperad::D),
            "q" => Ok(CircleOperad::Q),
            "bi" => Ok(CircleOperad::Bi),
            _ => s
                .strip_prefix("rd(")
                .and_then(|r| r.strip_suffix(')'))
                .or_else(|| s.strip_prefix("rd:"))
                .and_then(|l| crate::rational::parse_q(l).ok())
                .map(CircleOperad::Rd)
                .ok_or_else(|| Error::Unsupported(format!("unknown circle operad {s:?}"))),
        }
    }
}

pub fn reduce(x: &[Q]) -> Vec<Q> {
    x.iter().map(frac).collect()
}

pub fn compose_angles(op: &CircleOperad, x: &[Q], i: usize, y: &[Q]) -> Result<Vec<Q>> {
    let n = op.arity_of(x.len())?;
    op.arity_of(y.len())?;
    if i == 0 || i > n {
        return Err(Error::Arity(format!("slot {i} of a tuple with {n} inputs")));
    }
    let (x, y) = (reduce(x), reduce(y));
    let Some(s) = op.spec() else {
        let ti = &x[i - 1];
        let mut out: Vec<Q> = x[..i - 1].to_vec();
        out.extend(y.iter().map(|t| t + ti));
        out.extend_from_slice(&x[i..]);
        return Ok(reduce(&out));
    };
    let (ti, t0) = (&x[i], &y[0]);
    let outside = &s.gamma * ti + &s.delta * t0;
    let inside = &s.alpha * ti + &s.beta * t0;
    let mut out: Vec<Q> = x[..i].iter().map(|t| t + &outside).collect();
    out.extend(y[1..].iter().map(|t| t + &inside));
    out.extend(x[i + 1..].iter().map(|t| t + &outside));
    Ok(reduce(&out))
}

/// Right action of a permutation of the inputs (`sigma[0] = 0`): the
/// angle of input `b` moves to input `sigma[b]`.
pub fn act(op: &CircleOperad, x: &[Q], sigma: &[usize]) -> Result<Vec<Q>> {
    let n = op.arity_of(x.len())?;
    if sigma.len() != n + 1 || sigma[0] != 0 {
        return Err(Error::NotAPermutation(n + 1));
    }
    let b = op.base();
    let mut out = x.to_vec();
    for k in 1..=n {
        out[sigma[k] - 1 + b] = x[k - 1 + b].clone();
    }
    Ok(out)
}

/// The long cycle `(0 1 ⋯ n)` on a tuple with a zero angle.
pub fn long_cycle(x: &[Q]) -> Vec<Q> {
    let mut out = x.to_vec();
    out.rotate_right(1);
    out
}

/// Where each input label of `x ∘ᵢ y` goes when `x` is permuted by `sigma`
/// and `y` by `tau` before composing.
pub fn block_permutation(sigma: &[usize], i: usize, tau: &[usize]) -> Vec<usize> {
    let (n, m) = (sigma.len() - 1, tau.len() - 1);
    let target = |b: usize| if b < sigma[i] { b } else { b + m - 1 };
    let mut out = vec![0; n + m];
    for b in 1..=n {
        if b == i {
            continue;
        }
        let old = if b < i { b } else { b + m - 1 };
        out[old] = target(sigma[b]);
    }
    for p in 1..=m {
        out[i + p - 1] = sigma[i] + tau[p] - 1;
    }
    out
}

/// A witness that a composition law fails.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub law: String,
    pub tuples: Vec<Vec<Q>>,
    pub slots: Vec<usize>,
    pub lhs: Vec<Q>,
    pub rhs: Vec<Q>,
}

fn random_tuple(r: &mut impl Rng, len: usize) -> Vec<Q> {
    (0..len).map(|_| random_fraction(r, 12)).collect()
}

fn witness(law: &str, tuples: &[&[Q]], slots: &[usize], lhs: Vec<Q>, rhs: Vec<Q>) -> Option<Counterexample> {
    (lhs != rhs).then(|| Counterexample {
        law: law.into(),
        tuples: tuples.iter().map(|t| t.to_vec()).collect(),
        slots: slots.to_vec(),
        lhs,
        rhs,
    })
}

/// Runs both associativity patterns and equivariance on random tuples and
/// returns the first failure.
pub fn check_operad_laws(op: &CircleOperad, seed: u64, trials: usize) -> Result<Option<Counterexample>> {
    let mut r = rng(seed);
    let b = op.base();
    for _ in 0..trials {
        let (n, m, l) = (r.gen_range(1..=3), r.gen_range(1..=3), r.gen_range(1..=3));
        let (x, y, z) = (random_tuple(&mut r, n + b), random_tuple(&mut r, m + b), random_tuple(&mut r, l + b));
        let i = r.gen_range(1..=n);
        let j = r.gen_range(1..=m);
        let lhs = compose_angles(op, &compose_angles(op, &x, i, &y)?, i + j - 1, &z)?;
        let rhs = compose_angles(op, &x, i, &compose_angles(op, &y, j, &z)?)?;
        if let Some(c) = witness("sequential", &[&x, &y, &z], &[i, j], lhs, rhs) {
            return Ok(Some(c));
        }
        if n >= 2 {
            let i = r.gen_range(1..n);
            let j = r.gen_range(i + 1..=n);
            let lhs = compose_angles(op, &compose_angles(op, &x, i, &y)?, j + m - 1, &z)?;
            let rhs = compose_angles(op, &compose_angles(op, &x, j, &z)?, i, &y)?;
            if let Some(c) = witness("parallel", &[&x, &y, &z], &[i, j], lhs, rhs) {
                return Ok(Some(c));
            }
        }
        let sigma = random_input_permutation(&mut r, n + 1);
        let tau = random_input_permutation(&mut r, m + 1);
        let lhs = compose_angles(op, &act(op, &x, &sigma)?, sigma[i], &act(op, &y, &tau)?)?;
        let rhs = act(op, &compose_angles(op, &x, i, &y)?, &block_permutation(&sigma, i, &tau))?;
        if let Some(c) = witness("equivariance", &[&x, &y], &[i], lhs, rhs) {
            return Ok(Some(c));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub survivors: Vec<CompositionSpec>,
    pub excluded: Vec<(CompositionSpec, Counterexample)>,
}

/// Grid values `k/D` for `0 <= k < D`, plus 1.
pub fn grid_values(denominator: i64) -> Vec<Q> {
    let mut v: Vec<Q> = (0..denominator).map(|k| q(k, denominator)).collect();
    v.push(Q::one());
    v
}

pub fn classify_parameters(denominator: i64, trials: usize, seed: u64) -> Result<Classification> {
    if denominator < 2 {
        return Err(Error::Unsupported("grid denominator must be at least 2".into()));
    }
    let grid = grid_values(denominator);
    let mut out = Classification { survivors: vec![], excluded: vec![] };
    for a in &grid {
        for b in &grid {
            for c in &grid {
                for d in &grid {
                    let spec = CompositionSpec::new(a.clone(), b.clone(), c.clone(), d.clone());
                    match check_operad_laws(&CircleOperad::General(spec.clone()), seed, trials)? {
                        None => out.survivors.push(spec),
                        Some(w) => out.excluded.push((spec, w)),
                    }
                }
            }
        }
    }
    Ok(out)
}

/// An integer combination of wedge monomials in `e₀, …, e_{len-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExtClass {
    pub len: usize,
    /// Strictly increasing index lists with nonzero coefficients.
    pub terms: BTreeMap<Vec<usize>, i64>,
}

impl ExtClass {
    pub fn zero(len: usize) -> Self {
        ExtClass { len, terms: BTreeMap::new() }
    }

    /// The basis element with bit vector `bits`.
    pub fn basis(bits: &[u8]) -> Self {
        let idx = bits.iter().enumerate().filter(|(_, b)| **b != 0).map(|(k, _)| k).collect();
        let mut c = ExtClass::zero(bits.len());
        c.terms.insert(idx, 1);
        c
    }

    pub fn add_term(&mut self, idx: Vec<usize>, coeff: i64) {
        let e = self.terms.entry(idx).or_insert(0);
        *e += coeff;
        if *e == 0 {
            self.terms.retain(|_, c| *c != 0);
        }
    }

    pub fn plus(&self, other: &ExtClass) -> ExtClass {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), *c);
        }
        out
    }

    pub fn scaled(&self, s: i64) -> ExtClass {
        let mut out = ExtClass::zero(self.len);
        for (k, c) in &self.terms {
            out.add_term(k.clone(), c * s);
        }
        out
    }

    pub fn minus(&self, other: &ExtClass) -> ExtClass {
        self.plus(&other.scaled(-1))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        let mut d = self.terms.keys().map(Vec::len);
        let first = d.next()?;
        d.all(|x| x == first).then_some(first)
    }

    /// Terms as (coefficient, bit vector).
    pub fn monomials(&self) -> Vec<(i64, Vec<u8>)> {
        self.terms
            .iter()
            .map(|(k, c)| {
                let mut bits = vec![0u8; self.len];
                for &i in k {
                    bits[i] = 1;
                }
                (*c, bits)
            })
            .collect()
    }

    /// All basis elements of `len` generators.
    pub fn all_basis(len: usize) -> Vec<ExtClass> {
        (0..1u32 << len).map(|mask| ExtClass::basis(&(0..len).map(|k| ((mask >> k) & 1) as u8).collect::<Vec<_>>())).collect()
    }
}

impl std::fmt::Display for ExtClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .monomials()
            .into_iter()
            .map(|(c, b)| {
                let v: Vec<String> = b.iter().map(u8::to_string).collect();
                format!("{c}({})", v.join(","))
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Wedge of integer vectors, expanded in the monomial basis.
fn wedge(len: usize, vectors: &[Vec<i64>]) -> BTreeMap<Vec<usize>, i64> {
    let mut acc: BTreeMap<Vec<usize>, i64> = BTreeMap::from([(vec![], 1)]);
    for v in vectors {
        let mut next = BTreeMap::new();
        for (set, c) in &acc {
            for (r, &x) in v.iter().enumerate().take(len) {
                if x == 0 || set.contains(&r) {
                    continue;
                }
                let above = set.iter().filter(|&&s| s > r).count();
                let sign = if above % 2 == 0 { 1 } else { -1 };
                let mut s = set.clone();
                s.push(r);
                s.sort_unstable();
                *next.entry(s).or_insert(0) += sign * c * x;
            }
        }
        next.retain(|_, c| *c != 0);
        acc = next;
    }
    acc
}

fn int_param(x: &Q) -> Result<i64> {
    if !is_integer(x) {
        return Err(Error::NonIntegerParameter(format_q(x)));
    }
    to_i64(x).ok_or_else(|| Error::NonIntegerParameter(format_q(x)))
}

/// Linear part of `∘ₖ` on tuples of lengths `lx` and `ly`: one row per
/// output angle, columns for `x` then `y`.
pub fn composition_matrix(op: &CircleOperad, lx: usize, k: usize, ly: usize) -> Result<Vec<Vec<i64>>> {
    let n = op.arity_of(lx)?;
    op.arity_of(ly)?;
    if k == 0 || k > n {
        return Err(Error::Arity(format!("slot {k} of a tuple with {n} inputs")));
    }
    let b = op.base();
    let rows = lx + ly - 1 - b;
    let mut m = vec![vec![0i64; lx + ly]; rows];
    let ki = k - 1 + b;
    let (a, bb, c, d) = match op.spec() {
        Some(s) => (int_param(&s.alpha)?, int_param(&s.beta)?, int_param(&s.gamma)?, int_param(&s.delta)?),
        None => (1, 0, 0, 0),
    };
    let m_in = ly - b;
    for l in 0..lx {
        if l == ki {
            continue;
        }
        let row = if l < ki { l } else { l + m_in - 1 };
        m[row][l] += 1;
        m[row][ki] += c;
        if b == 1 {
            m[row][lx] += d;
        }
    }
    for p in 0..m_in {
        let row = ki + p;
        m[row][lx + b + p] += 1;
        m[row][ki] += a;
        if b == 1 {
            m[row][lx] += bb;
        }
    }
    Ok(m)
}

/// Induced map on torus homology: cross product (left factor first), then
/// exterior powers of the composition matrix.
pub fn homology_compose(op: &CircleOperad, x: &ExtClass, k: usize, y: &ExtClass) -> Result<ExtClass> {
    let m = composition_matrix(op, x.len, k, y.len)?;
    let col = |j: usize| m.iter().map(|row| row[j]).collect::<Vec<i64>>();
    let mut out = ExtClass::zero(m.len());
    for (s, a) in &x.terms {
        for (t, b) in &y.terms {
            let vectors: Vec<Vec<i64>> = s.iter().map(|&j| col(j)).chain(t.iter().map(|&j| col(x.len + j))).collect();
            for (idx, c) in wedge(m.len(), &vectors) {
                out.add_term(idx, a * b * c);
            }
        }
    }
    Ok(out)
}

/// Homology action of an input permutation.
pub fn permute_class(op: &CircleOperad, x: &ExtClass, sigma: &[usize]) -> Result<ExtClass> {
    let n = op.arity_of(x.len)?;
    if sigma.len() != n + 1 || sigma[0] != 0 {
        return Err(Error::NotAPermutation(n + 1));
    }
    let b = op.base();
    let image = |j: usize| if j < b { j } else { sigma[j - b + 1] - 1 + b };
    let mut out = ExtClass::zero(x.len);
    for (s, c) in &x.terms {
        let vectors: Vec<Vec<i64>> = s
            .iter()
            .map(|&j| {
                let mut v = vec![0; x.len];
                v[image(j)] = 1;
                v
            })
            .collect();
        for (idx, w) in wedge(x.len, &vectors) {
            out.add_term(idx, c * w);
        }
    }
    Ok(out)
}

/// Sign of the permutation sorting `seq`, or 0 on a repeated entry.
fn sort_sign(seq: &[usize]) -> i64 {
    let mut sign = 1;
    for a in 0..seq.len() {
        for b in a + 1..seq.len() {
            match seq[a].cmp(&seq[b]) {
                std::cmp::Ordering::Equal => return 0,
                std::cmp::Ordering::Greater => sign = -sign,
                std::cmp::Ordering::Less => {}
            }
        }
    }
    sign
}

/// The case-by-case closed formula for `∘ₖ` on basis elements of the
/// homology of the cyclic operad, signs from reordering the wedge factors
/// (those of `α` first, then those of `β`).
pub fn bi_closed_formula(alpha: &[u8], k: usize, beta: &[u8]) -> ExtClass {
    let (n, m) = (alpha.len() - 1, beta.len() - 1);
    let pos = |l: usize| if l < k { l } else { l + m - 1 };
    let mut out = ExtClass::zero(n + m);
    // The inserted-block index receiving e_k, when α_k = 1.
    let block: Vec<Option<usize>> = if alpha[k] == 1 { (1..=m).map(|p| Some(k + p - 1)).collect() } else { vec![None] };
    // The index receiving e′₀, when β₀ = 1.
    let outer: Vec<Option<usize>> =
        if beta[0] == 1 { (0..=n).filter(|&l| l != k).map(|l| Some(pos(l))).collect() } else { vec![None] };
    for bk in &block {
        for b0 in &outer {
            let mut seq = Vec::new();
            for l in 0..=n {
                if alpha[l] == 1 {
                    seq.push(if l == k { bk.expect("block index chosen") } else { pos(l) });
                }
            }
            if let Some(t) = b0 {
                seq.push(*t);
            }
            for p in 1..=m {
                if beta[p] == 1 {
                    seq.push(k + p - 1);
                }
            }
            let sign = sort_sign(&seq);
            if sign != 0 {
                let mut idx = seq;
                idx.sort_unstable();
                out.add_term(idx, sign);
            }
        }
    }
    out
}

/// Generators of the free operads presenting the homology of `d` and of
/// the cyclic operad; `Right` is `∂` for `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gen {
    Left,
    Right,
    Mu,
}

impl Gen {
    pub fn arity(self) -> usize {
        match self {
            Gen::Mu => 2,
            _ => 1,
        }
    }

    pub fn degree(self) -> usize {
        match self {
            Gen::Mu => 0,
            _ => 1,
        }
    }
}

/// A planar tree of generators; leaves are inputs numbered left to right.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FreeTerm {
    Leaf,
    Node(Gen, Vec<FreeTerm>),
}

impl FreeTerm {
    pub fn node(g: Gen, children: Vec<FreeTerm>) -> Self {
        debug_assert_eq!(children.len(), g.arity());
        FreeTerm::Node(g, children)
    }

    pub fn unary(g: Gen, child: FreeTerm) -> Self {
        FreeTerm::Node(g, vec![child])
    }

    pub fn mu(a: FreeTerm, b: FreeTerm) -> Self {
        FreeTerm::Node(Gen::Mu, vec![a, b])
    }

    pub fn arity(&self) -> usize {
        match self {
            FreeTerm::Leaf => 1,
            FreeTerm::Node(_, cs) => cs.iter().map(FreeTerm::arity).sum(),
        }
    }

    pub fn degree(&self) -> usize {
        match self {
            FreeTerm::Leaf => 0,
            FreeTerm::Node(g, cs) => g.degree() + cs.iter().map(FreeTerm::degree).sum::<usize>(),
        }
    }

    fn well_formed(&self) -> bool {
        match self {
            FreeTerm::Leaf => true,
            FreeTerm::Node(g, cs) => cs.len() == g.arity() && cs.iter().all(FreeTerm::well_formed),
        }
    }

    /// `self ∘ᵢ other`: the `i`-th leaf replaced by `other`.
    pub fn compose(&self, i: usize, other: &FreeTerm) -> FreeTerm {
        fn go(t: &FreeTerm, i: &mut usize, other: &FreeTerm) -> FreeTerm {
            match t {
                FreeTerm::Leaf => {
                    *i -= 1;
                    if *i == 0 {
                        other.clone()
                    } else {
                        FreeTerm::Leaf
                    }
                }
                FreeTerm::Node(g, cs) => FreeTerm::Node(*g, cs.iter().map(|c| go(c, i, other)).collect()),
            }
        }
        let mut k = i;
        go(self, &mut k, other)
    }
}

impl std::fmt::Display for FreeTerm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FreeTerm::Leaf => write!(f, "id"),
            FreeTerm::Node(g, cs) => {
                let name = match g {
                    Gen::Left => "dl",
                    Gen::Right => "dr",
                    Gen::Mu => "mu",
                };
                let inner: Vec<String> = cs.iter().map(ToString::to_string).collect();
                write!(f, "{name}({})", inner.join(", "))
            }
        }
    }
}

/// Integer combination of tree monomials.
pub type Combination = BTreeMap<FreeTerm, i64>;

fn single(t: FreeTerm) -> Combination {
    BTreeMap::from([(t, 1)])
}

fn add_into(acc: &mut Combination, t: FreeTerm, c: i64) {
    let e = acc.entry(t.clone()).or_insert(0);
    *e += c;
    if *e == 0 {
        acc.remove(&t);
    }
}

/// Which homology operad is presented.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Presented {
    D,
    Bi,
}

impl Presented {
    pub fn operad(self) -> CircleOperad {
        match self {
            Presented::D => CircleOperad::D,
            Presented::Bi => CircleOperad::Bi,
        }
    }

    pub fn generators(self) -> Vec<Gen> {
        match self {
            Presented::D => vec![Gen::Right, Gen::Mu],
            Presented::Bi => vec![Gen::Left, Gen::Right, Gen::Mu],
        }
    }

    fn generator_class(self, g: Gen) -> Result<ExtClass> {
        match (self, g) {
            (Presented::D, Gen::Right) => Ok(ExtClass::basis(&[1])),
            (Presented::D, Gen::Mu) => Ok(ExtClass::basis(&[0, 0])),
            (Presented::Bi, Gen::Left) => Ok(ExtClass::basis(&[1, 0])),
            (Presented::Bi, Gen::Right) => Ok(ExtClass::basis(&[0, 1])),
            (Presented::Bi, Gen::Mu) => Ok(ExtClass::basis(&[0, 0, 0])),
            (Presented::D, Gen::Left) => Err(Error::Unsupported("d has a single differential".into())),
        }
    }

    fn identity(self) -> ExtClass {
        match self {
            Presented::D => ExtClass::basis(&[0]),
            Presented::Bi => ExtClass::basis(&[0, 0]),
        }
    }

    /// The defining relations, as arity-one and arity-two combinations.
    pub fn relations(self) -> Vec<(&'static str, Combination)> {
        use FreeTerm::Leaf;
        let l = |t: FreeTerm| FreeTerm::unary(Gen::Left, t);
        let r = |t: FreeTerm| FreeTerm::unary(Gen::Right, t);
        let mu = FreeTerm::mu;
        let comb = |terms: Vec<(i64, FreeTerm)>| {
            let mut c = Combination::new();
            for (k, t) in terms {
                add_into(&mut c, t, k);
            }
            c
        };
        let mut out = vec![
            ("dr dr", comb(vec![(1, r(r(Leaf)))])),
            ("dr mu - mu(dr, id) - mu(id, dr)", comb(vec![(1, r(mu(Leaf, Leaf))), (-1, mu(r(Leaf), Leaf)), (-1, mu(Leaf, r(Leaf)))])),
            ("mu(mu, id) - mu(id, mu)", comb(vec![(1, mu(mu(Leaf, Leaf), Leaf)), (-1, mu(Leaf, mu(Leaf, Leaf)))])),
        ];
        if self == Presented::Bi {
            out.push(("dl dl", comb(vec![(1, l(l(Leaf)))])));
            out.push(("dl dr + dr dl", comb(vec![(1, l(r(Leaf))), (1, r(l(Leaf)))])));
            out.push((
                "mu(dl, id) - dl mu - mu(id, dr)",
                comb(vec![(1, mu(l(Leaf), Leaf)), (-1, l(mu(Leaf, Leaf))), (-1, mu(Leaf, r(Leaf)))]),
            ));
        }
        out
    }
}

/// Evaluates a tree in homology, inserting children left to right.
pub fn psi_term(p: Presented, t: &FreeTerm) -> Result<ExtClass> {
    match t {
        FreeTerm::Leaf => Ok(p.identity()),
        FreeTerm::Node(g, cs) => {
            let op = p.operad();
            let mut acc = p.generator_class(*g)?;
            let mut slot = 1;
            for c in cs {
                acc = homology_compose(&op, &acc, slot, &psi_term(p, c)?)?;
                slot += c.arity();
            }
            Ok(acc)
        }
    }
}

pub fn psi(p: Presented, c: &Combination) -> Result<ExtClass> {
    let mut acc: Option<ExtClass> = None;
    for (t, k) in c {
        let v = psi_term(p, t)?.scaled(*k);
        acc = Some(match acc {
            None => v,
            Some(a) => a.plus(&v),
        });
    }
    Ok(acc.unwrap_or_else(|| ExtClass::zero(0)))
}

/// `dl^{α₀} μ⁽ⁿ⁾(dr^{α₁}, …, dr^{αₙ})`, with `μ⁽ⁿ⁾` the left comb.
pub fn gamma(p: Presented, bits: &[u8]) -> Result<FreeTerm> {
    let (b, has_left) = match p {
        Presented::D => (0, false),
        Presented::Bi => (1, true),
    };
    let inputs = &bits[b.min(bits.len())..];
    if inputs.is_empty() {
        return Err(Error::Arity("no inputs".into()));
    }
    let leaf = |a: u8| if a == 1 { FreeTerm::unary(Gen::Right, FreeTerm::Leaf) } else { FreeTerm::Leaf };
    let mut t = leaf(inputs[0]);
    for &a in &inputs[1..] {
        t = FreeTerm::mu(t, leaf(a));
    }
    if has_left && bits[0] == 1 {
        t = FreeTerm::unary(Gen::Left, t);
    }
    Ok(t)
}

/// Where to look for the next rewrite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Innermost,
    Outermost,
}

fn sign(d: usize) -> i64 {
    if d.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// One rule application at the root, if any applies.
fn rewrite_root(p: Presented, t: &FreeTerm) -> Option<Vec<(i64, FreeTerm)>> {
    use FreeTerm::Node;
    let l = |t: FreeTerm| FreeTerm::unary(Gen::Left, t);
    let r = |t: FreeTerm| FreeTerm::unary(Gen::Right, t);
    let mu = FreeTerm::mu;
    let Node(g, cs) = t else { return None };
    match (g, cs.as_slice()) {
        (Gen::Left, [Node(Gen::Left, _)]) | (Gen::Right, [Node(Gen::Right, _)]) => Some(vec![]),
        (Gen::Right, [Node(Gen::Left, x)]) => Some(vec![(-1, l(r(x[0].clone())))]),
        (Gen::Right, [Node(Gen::Mu, xy)]) => {
            let (x, y) = (&xy[0], &xy[1]);
            Some(vec![(1, mu(r(x.clone()), y.clone())), (sign(x.degree()), mu(x.clone(), r(y.clone())))])
        }
        (Gen::Mu, [x, Node(Gen::Mu, yz)]) => Some(vec![(1, mu(mu(x.clone(), yz[0].clone()), yz[1].clone()))]),
        (Gen::Mu, [Node(Gen::Left, x), y]) if p == Presented::Bi => {
            let x = &x[0];
            Some(vec![(1, l(mu(x.clone(), y.clone()))), (sign(x.degree()), mu(x.clone(), r(y.clone())))])
        }
        (Gen::Mu, [x, Node(Gen::Left, y)]) if p == Presented::Bi => {
            let y = &y[0];
            let s = sign(x.degree());
            Some(vec![(s, l(mu(x.clone(), y.clone()))), (s, mu(r(x.clone()), y.clone()))])
        }
        _ => None,
    }
}

/// One rewrite anywhere in `t`, following `strategy`.
fn rewrite_once(p: Presented, t: &FreeTerm, strategy: Strategy) -> Option<Vec<(i64, FreeTerm)>> {
    if strategy == Strategy::Outermost {
        if let Some(r) = rewrite_root(p, t) {
            return Some(r);
        }
    }
    if let FreeTerm::Node(g, cs) = t {
        for (k, c) in cs.iter().enumerate() {
            if let Some(sub) = rewrite_once(p, c, strategy) {
                return Some(
                    sub.into_iter()
                        .map(|(coef, s)| {
                            let mut cs2 = cs.clone();
                            cs2[k] = s;
                            (coef, FreeTerm::Node(*g, cs2))
                        })
                        .collect(),
                );
            }
        }
    }
    if strategy == Strategy::Innermost {
        return rewrite_root(p, t);
    }
    None
}

const MAX_REWRITES: usize = 100_000;

/// Rewrites with the relations until every term is of the form
/// `dl^a μ⁽ⁿ⁾(dr^{b₁}, …)`.
pub fn normal_form_with(p: Presented, c: &Combination, strategy: Strategy) -> Result<Combination> {
    let mut todo: Vec<(FreeTerm, i64)> = c.iter().map(|(t, k)| (t.clone(), *k)).collect();
    let mut done = Combination::new();
    let mut steps = 0;
    while let Some((t, k)) = todo.pop() {
        if !t.well_formed() {
            return Err(Error::Invalid(format!("malformed term {t}")));
        }
        if p == Presented::D && contains_left(&t) {
            return Err(Error::Unsupported("d has a single differential".into()));
        }
        match rewrite_once(p, &t, strategy) {
            None => add_into(&mut done, t, k),
            Some(parts) => {
                steps += 1;
                if steps > MAX_REWRITES {
                    return Err(Error::Internal("rewriting did not terminate".into()));
                }
                todo.extend(parts.into_iter().map(|(s, u)| (u, s * k)));
            }
        }
    }
    Ok(done)
}

fn contains_left(t: &FreeTerm) -> bool {
    match t {
        FreeTerm::Leaf => false,
        FreeTerm::Node(g, cs) => *g == Gen::Left || cs.iter().any(contains_left),
    }
}

pub fn normal_form(p: Presented, t: &FreeTerm) -> Result<Combination> {
    normal_form_with(p, &single(t.clone()), Strategy::Innermost)
}

/// `γ ∘ ψ` on a combination: the normal form read back from homology.
pub fn gamma_of_class(p: Presented, x: &ExtClass) -> Result<Combination> {
    let mut out = Combination::new();
    for (c, bits) in x.monomials() {
        add_into(&mut out, gamma(p, &bits)?, c);
    }
    Ok(out)
}

/// Every tree with at most `nodes` generators and arity at most `max_arity`.
pub fn enumerate_terms(p: Presented, nodes: usize, max_arity: usize) -> Vec<FreeTerm> {
    fn go(gens: &[Gen], nodes: usize, max_arity: usize) -> Vec<FreeTerm> {
        let mut out = vec![FreeTerm::Leaf];
        if nodes == 0 {
            return out;
        }
        for &g in gens {
            if g.arity() == 1 {
                for c in go(gens, nodes - 1, max_arity) {
                    out.push(FreeTerm::unary(g, c));
                }
            } else {
                for k in 0..nodes {
                    let left = go(gens, k, max_arity);
                    let right = go(gens, nodes - 1 - k, max_arity);
                    for a in &left {
                        for b in &right {
                            if a.arity() + b.arity() <= max_arity {
                                out.push(FreeTerm::mu(a.clone(), b.clone()));
                            }
                        }
                    }
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }
    go(&p.generators(), nodes, max_arity)
}

/// Outcome of the algebra relation checks for one operad.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationReport {
    pub operad: String,
    pub checks: Vec<(String, bool)>,
}

impl RelationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|(_, ok)| *ok)
    }
}

pub fn algebra_relations_check(op: &CircleOperad) -> Result<RelationReport> {
    let c = |x: &ExtClass, k: usize, y: &ExtClass| homology_compose(op, x, k, y);
    let mut checks = Vec::new();
    let mut rel = |name: &str, lhs: ExtClass, rhs: ExtClass| checks.push((name.to_string(), lhs == rhs));
    match op {
        CircleOperad::D => {
            let d = ExtClass::basis(&[1]);
            let mu = ExtClass::basis(&[0, 0]);
            rel("dd = 0", c(&d, 1, &d)?, ExtClass::zero(1));
            rel("d(ab) = d(a)b + a d(b)", c(&d, 1, &mu)?, c(&mu, 1, &d)?.plus(&c(&mu, 2, &d)?));
            rel("associative", c(&mu, 1, &mu)?, c(&mu, 2, &mu)?);
            rel("commutative", permute_class(op, &mu, &[0, 2, 1])?, mu.clone());
        }
        CircleOperad::General(_) => return Err(Error::Unsupported("no named classes for a general composition".into())),
        _ => {
            let delta = ExtClass::basis(&[0, 0]);
            let dl = ExtClass::basis(&[1, 0]);
            let dr = ExtClass::basis(&[0, 1]);
            let mu = ExtClass::basis(&[0, 0, 0]);
            let zero1 = ExtClass::zero(2);
            rel("associative", c(&mu, 1, &mu)?, c(&mu, 2, &mu)?);
            rel("commutative", permute_class(op, &mu, &[0, 2, 1])?, mu.clone());
            rel("dr dr = 0", c(&dr, 1, &dr)?, zero1.clone());
            if *op != CircleOperad::Q {
                rel("dr(ab) = dr(a)b + a dr(b)", c(&dr, 1, &mu)?, c(&mu, 1, &dr)?.plus(&c(&mu, 2, &dr)?));
            }
            match op {
                CircleOperad::Bi => {
                    rel("dl dl = 0", c(&dl, 1, &dl)?, zero1.clone());
                    rel("dl dr + dr dl = 0", c(&dl, 1, &dr)?.plus(&c(&dr, 1, &dl)?), zero1.clone());
                    rel(
                        "dl(a)b = dl(ab) + a dr(b)",
                        c(&mu, 1, &dl)?,
                        c(&dl, 1, &mu)?.plus(&c(&mu, 2, &dr)?),
                    );
                    rel("unit", c(&delta, 1, &mu)?, mu.clone());
                }
                CircleOperad::Q | CircleOperad::Rd(_) => {
                    let lambda = match op {
                        CircleOperad::Rd(l) => Some(int_param(l)?),
                        _ => None,
                    };
                    rel("Delta Delta = Delta", c(&delta, 1, &delta)?, delta.clone());
                    rel("Delta dr = dr", c(&delta, 1, &dr)?, dr.clone());
                    rel("dl Delta = dl", c(&dl, 1, &delta)?, dl.clone());
                    rel("Delta(ab) = ab", c(&delta, 1, &mu)?, mu.clone());
                    rel("Delta(a)b = ab", c(&mu, 1, &delta)?, mu.clone());
                    rel("a Delta(b) = ab", c(&mu, 2, &delta)?, mu.clone());
                    match lambda {
                        None => {
                            rel("Delta dl = 0", c(&delta, 1, &dl)?, zero1.clone());
                            rel("dr Delta = 0", c(&dr, 1, &delta)?, zero1.clone());
                            rel("dr dl = 0", c(&dr, 1, &dl)?, zero1.clone());
                        }
                        Some(l) => {
                            rel("dr Delta = dr", c(&dr, 1, &delta)?, dr.clone());
                            rel("Delta dl = lambda dr", c(&delta, 1, &dl)?, dr.scaled(l));
                        }
                    }
                }
                _ => unreachable!(),
            }
        }
    }
    Ok(RelationReport { operad: op.name(), checks })
}

/// The closed formula for the cyclic operad against the matrix mechanism
/// on all basis pairs up to the given arity, plus the two pinned vectors.
pub fn homology_formula_check(max_arity: usize) -> Result<RelationReport> {
    let bi = CircleOperad::Bi;
    let mut checks = Vec::new();
    let mut mismatches = 0;
    let mut pairs = 0;
    for n in 1..=max_arity {
        for m in 1..=max_arity {
            for x in ExtClass::all_basis(n + 1) {
                for y in ExtClass::all_basis(m + 1) {
                    let (a, b) = (&x.monomials()[0].1, &y.monomials()[0].1);
                    for k in 1..=n {
                        pairs += 1;
                        if homology_compose(&bi, &x, k, &y)? != bi_closed_formula(a, k, b) {
                            mismatches += 1;
                        }
                    }
                }
            }
        }
    }
    checks.push((format!("closed formula on {pairs} compositions"), mismatches == 0));
    let v = homology_compose(&bi, &ExtClass::basis(&[0, 0, 0]), 1, &ExtClass::basis(&[1, 0]))?;
    checks.push(("(0,0,0) o1 (1,0)".into(), v == ExtClass::basis(&[1, 0, 0]).plus(&ExtClass::basis(&[0, 0, 1]))));
    let v = homology_compose(&bi, &ExtClass::basis(&[1, 0]), 1, &ExtClass::basis(&[0, 0, 0]))?;
    checks.push(("(1,0) o1 (0,0,0)".into(), v == ExtClass::basis(&[1, 0, 0])));
    Ok(RelationReport { operad: bi.name(), checks })
}

/// Relations die under psi, psi inverts gamma on bases with at most three
/// inputs, and gamma inverts psi on generators.
pub fn presentation_check(p: Presented) -> Result<RelationReport> {
    let mut checks = Vec::new();
    for (name, r) in p.relations() {
        checks.push((format!("psi({name}) = 0"), psi(p, &r)?.is_zero()));
    }
    let b = usize::from(p == Presented::Bi);
    let mut ok = true;
    for n in 1..=3 {
        for x in ExtClass::all_basis(n + b) {
            ok &= psi_term(p, &gamma(p, &x.monomials()[0].1)?)? == x;
        }
    }
    checks.push(("psi gamma = id".into(), ok));
    for g in p.generators() {
        let t = FreeTerm::node(g, vec![FreeTerm::Leaf; g.arity()]);
        checks.push((format!("gamma psi({t}) = {t}"), gamma_of_class(p, &psi_term(p, &t)?)? == single(t)));
    }
    Ok(RelationReport { operad: p.operad().name(), checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qs(v: &[(i64, i64)]) -> Vec<Q> {
        v.iter().map(|(a, b)| q(*a, *b)).collect()
    }

    #[test]
    fn angle_examples() {
        assert_eq!(compose_angles(&CircleOperad::D, &qs(&[(1, 2)]), 1, &qs(&[(1, 3)])).unwrap(), qs(&[(5, 6)]));
        let mut r = rng(3);
        for _ in 0..50 {
            let n = r.gen_range(1..=3);
            let x = random_tuple(&mut r, n + 1);
            let unit = vec![qi(0), qi(0)];
            for i in 1..=n {
                assert_eq!(compose_angles(&CircleOperad::Bi, &x, i, &unit).unwrap(), x);
            }
            assert_eq!(compose_angles(&CircleOperad::Bi, &unit, 1, &x).unwrap(), x);
            let ly = r.gen_range(2..=4);
            let y = random_tuple(&mut r, ly);
            let lhs = long_cycle(&compose_angles(&CircleOperad::Bi, &x, n, &y).unwrap());
            let rhs = compose_angles(&CircleOperad::Bi, &long_cycle(&y), 1, &long_cycle(&x)).unwrap();
            assert_eq!(lhs, rhs);
        }
        assert!(compose_angles(&CircleOperad::Bi, &qs(&[(0, 1)]), 1, &qs(&[(0, 1)])).is_err());
    }

    #[test]
    fn named_operads_satisfy_laws() {
        for op in [CircleOperad::D, CircleOperad::Q, CircleOperad::Bi, CircleOperad::Rd(qi(2)), CircleOperad::Rd(q(1, 3))] {
            assert_eq!(check_operad_laws(&op, 11, 300).unwrap(), None, "{}", op.name());
        }
    }

    #[test]
    fn classification_examples() {
        let survives = |s: CompositionSpec| check_operad_laws(&CircleOperad::General(s), 5, 60).unwrap().is_none();
        assert!(survives(CompositionSpec::ints(1, 0, 0, 1)));
        assert!(survives(CompositionSpec::ints(0, 0, 0, 0)));
        assert!(!survives(CompositionSpec::ints(1, 0, 1, 0)));
    }

    #[test]
    fn grid_two_classification() {
        let c = classify_parameters(2, 40, 1).unwrap();
        for s in &c.survivors {
            assert!(s.is_expected_operad(), "unexpected survivor {s}");
        }
        for (s, w) in &c.excluded {
            assert!(!s.is_expected_operad(), "{s} rejected by {w:?}");
        }
        assert_eq!(c.survivors.len(), 5);
        assert_eq!(c.survivors.len() + c.excluded.len(), 81);
    }

    #[test]
    fn proof_vectors() {
        let bi = CircleOperad::Bi;
        let got = homology_compose(&bi, &ExtClass::basis(&[0, 0, 0]), 1, &ExtClass::basis(&[1, 0])).unwrap();
        assert_eq!(got, ExtClass::basis(&[1, 0, 0]).plus(&ExtClass::basis(&[0, 0, 1])));
        let got = homology_compose(&bi, &ExtClass::basis(&[1, 0]), 1, &ExtClass::basis(&[0, 0, 0])).unwrap();
        assert_eq!(got, ExtClass::basis(&[1, 0, 0]));
        let d = CircleOperad::D;
        let got = homology_compose(&d, &ExtClass::basis(&[0, 0]), 1, &ExtClass::basis(&[0, 0])).unwrap();
        assert_eq!(got, ExtClass::basis(&[0, 0, 0]));
        assert!(matches!(
            homology_compose(&CircleOperad::Rd(q(1, 2)), &ExtClass::basis(&[0, 0]), 1, &ExtClass::basis(&[0, 0])),
            Err(Error::NonIntegerParameter(_))
        ));
    }

    #[test]
    fn closed_formula_matches_on_small_bases() {
        for n in 1..=3 {
            for m in 1..=3 {
                for x in ExtClass::all_basis(n + 1) {
                    for y in ExtClass::all_basis(m + 1) {
                        let (a, b) = (&x.monomials()[0].1, &y.monomials()[0].1);
                        for k in 1..=n {
                            let got = homology_compose(&CircleOperad::Bi, &x, k, &y).unwrap();
                            assert_eq!(got, bi_closed_formula(a, k, b), "{a:?} o{k} {b:?}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn homology_is_associative_with_koszul_signs() {
        for op in [CircleOperad::D, CircleOperad::Bi, CircleOperad::Q, CircleOperad::Rd(qi(1))] {
            let b = op.base();
            for (n, m, l) in [(2, 1, 2), (2, 2, 1), (3, 2, 2)] {
                for x in ExtClass::all_basis(n + b) {
                    for y in ExtClass::all_basis(m + b) {
                        for z in ExtClass::all_basis(l + b) {
                            let h = |a: &ExtClass, k, c: &ExtClass| homology_compose(&op, a, k, c).unwrap();
                            for i in 1..=n {
                                for j in 1..=m {
                                    assert_eq!(h(&h(&x, i, &y), i + j - 1, &z), h(&x, i, &h(&y, j, &z)));
                                }
                                for j in i + 1..=n {
                                    let s = sign(y.degree().unwrap() * z.degree().unwrap());
                                    assert_eq!(h(&h(&x, i, &y), j + m - 1, &z), h(&h(&x, j, &z), i, &y).scaled(s));
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn d_embeds() {
        let mut r = rng(9);
        for target in [CircleOperad::Bi, CircleOperad::Rd(qi(2))] {
            for _ in 0..50 {
                let (n, m) = (r.gen_range(1..=3), r.gen_range(1..=3));
                let (x, y) = (random_tuple(&mut r, n), random_tuple(&mut r, m));
                let i = r.gen_range(1..=n);
                let lift = |t: &[Q]| std::iter::once(qi(0)).chain(t.iter().cloned()).collect::<Vec<_>>();
                let down = compose_angles(&CircleOperad::D, &x, i, &y).unwrap();
                assert_eq!(lift(&down), compose_angles(&target, &lift(&x), i, &lift(&y)).unwrap());
            }
            let lift = |c: &ExtClass| {
                let mut out = ExtClass::zero(c.len + 1);
                for (k, v) in &c.terms {
                    out.add_term(k.iter().map(|i| i + 1).collect(), *v);
                }
                out
            };
            for x in ExtClass::all_basis(2) {
                for y in ExtClass::all_basis(3) {
                    for i in 1..=2 {
                        let down = homology_compose(&CircleOperad::D, &x, i, &y).unwrap();
                        assert_eq!(lift(&down), homology_compose(&target, &lift(&x), i, &lift(&y)).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn presentation() {
        for p in [Presented::D, Presented::Bi] {
            for (name, r) in p.relations() {
                assert!(psi(p, &r).unwrap().is_zero(), "{name}");
            }
            let b = usize::from(p == Presented::Bi);
            for n in 1..=3 {
                for x in ExtClass::all_basis(n + b) {
                    let g = gamma(p, &x.monomials()[0].1).unwrap();
                    assert_eq!(psi_term(p, &g).unwrap(), x);
                }
            }
            for g in p.generators() {
                let t = FreeTerm::node(g, vec![FreeTerm::Leaf; g.arity()]);
                assert_eq!(gamma_of_class(p, &psi_term(p, &t).unwrap()).unwrap(), single(t));
            }
        }
        let l = FreeTerm::unary(Gen::Left, FreeTerm::mu(FreeTerm::Leaf, FreeTerm::unary(Gen::Right, FreeTerm::Leaf)));
        assert_eq!(gamma(Presented::Bi, &[1, 0, 1]).unwrap(), l);
    }

    #[test]
    fn rewriting_is_confluent_and_sound() {
        for p in [Presented::D, Presented::Bi] {
            let terms = enumerate_terms(p, 4, 4);
            assert!(terms.len() > 50);
            for t in terms {
                let inner = normal_form_with(p, &single(t.clone()), Strategy::Innermost).unwrap();
                let outer = normal_form_with(p, &single(t.clone()), Strategy::Outermost).unwrap();
                assert_eq!(inner, outer, "{t}");
                let x = psi_term(p, &t).unwrap();
                assert_eq!(gamma_of_class(p, &x).unwrap(), inner, "{t}");
            }
        }
    }

    #[test]
    fn relation_reports() {
        for op in [CircleOperad::D, CircleOperad::Q, CircleOperad::Bi, CircleOperad::Rd(qi(0)), CircleOperad::Rd(qi(1)), CircleOperad::Rd(qi(2))] {
            let r = algebra_relations_check(&op).unwrap();
            assert!(r.passed(), "{r:?}");
        }
    }
}
