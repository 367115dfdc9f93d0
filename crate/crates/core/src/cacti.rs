//! Cacti: tree-like configurations of parameterized circles with a global
//! zero, their gluing and their framing into arc families.
//!
//! Lobes are labeled `1..=n`. Positions on a lobe are arclength from its
//! local zero in the lobe's own direction, so every lobe's local zero sits
//! at position 0. Intersection points carry the cyclic order in which the
//! perimeter passes from one lobe to the next.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};
use rand::Rng;

use crate::arc::{Arc, EndpointRef, WeightedArcFamily};
use crate::error::{Error, Result};
use crate::random::{random_fraction, random_weight};
use crate::rational::{format_q, rem_euclid, Q};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Lobe {
    pub circumference: Q,
    /// `(position, point id)` sorted by position.
    pub points: Vec<(Q, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cactus {
    pub lobes: Vec<Lobe>,
    /// For each intersection point, the lobes through it in perimeter order:
    /// arriving on a lobe, the perimeter continues on the next one.
    pub junctions: BTreeMap<usize, Vec<usize>>,
    /// Lobe label and position of the global zero.
    pub global_zero: (usize, Q),
}

/// One piece of the perimeter: it runs along `lobe` from `start` for `length`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubArc {
    pub lobe: usize,
    pub start: Q,
    pub length: Q,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GlueMode {
    /// Scale the inserted cactus to the lobe.
    Right,
    /// Scale the receiving cactus so the lobe matches the inserted perimeter.
    Left,
    /// Scale each cactus by the other's relevant length.
    Symmetric,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidCactus(msg.into())
}

impl Lobe {
    pub fn new(circumference: Q) -> Self {
        Lobe { circumference, points: Vec::new() }
    }

    fn position_of(&self, point: usize) -> Option<&Q> {
        self.points.iter().find(|(_, p)| *p == point).map(|(x, _)| x)
    }

    fn point_at(&self, x: &Q) -> Option<usize> {
        self.points.iter().find(|(y, _)| y == x).map(|(_, p)| *p)
    }
}

impl Cactus {
    /// The one-lobe cactus of the given length.
    pub fn single(length: Q) -> Self {
        Cactus { lobes: vec![Lobe::new(length)], junctions: BTreeMap::new(), global_zero: (1, Q::zero()) }
    }

    pub fn arity(&self) -> usize {
        self.lobes.len()
    }

    pub fn lobe(&self, label: usize) -> &Lobe {
        &self.lobes[label - 1]
    }

    pub fn total_length(&self) -> Q {
        self.lobes.iter().fold(Q::zero(), |acc, l| acc + &l.circumference)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.lobes.len();
        if n == 0 {
            return Err(bad("no lobes"));
        }
        let mut seen: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
        for (k, lobe) in self.lobes.iter().enumerate() {
            let label = k + 1;
            if !lobe.circumference.is_positive() {
                return Err(bad(format!("lobe {label} has non-positive length")));
            }
            for w in lobe.points.windows(2) {
                if w[0].0 >= w[1].0 {
                    return Err(bad(format!("positions on lobe {label} are not strictly increasing")));
                }
            }
            for (x, p) in &lobe.points {
                if x.is_negative() || *x >= lobe.circumference {
                    return Err(bad(format!("position {} outside lobe {label}", format_q(x))));
                }
                if !seen.entry(*p).or_default().insert(label) {
                    return Err(bad(format!("lobe {label} passes point {p} twice")));
                }
            }
        }
        for (p, order) in &self.junctions {
            let set: BTreeSet<usize> = order.iter().copied().collect();
            if order.len() < 2 || set.len() != order.len() {
                return Err(bad(format!("point {p} needs at least two distinct lobes")));
            }
            if seen.get(p) != Some(&set) {
                return Err(bad(format!("lobes at point {p} disagree with its order")));
            }
        }
        if let Some(p) = seen.keys().find(|p| !self.junctions.contains_key(p)) {
            return Err(bad(format!("point {p} has no junction order")));
        }
        // lobes and points form a tree
        let edges: usize = self.junctions.values().map(|o| o.len()).sum();
        if edges + 1 != n + self.junctions.len() || !self.connected() {
            return Err(bad("lobes and intersection points do not form a tree"));
        }
        let (gl, gx) = &self.global_zero;
        if *gl == 0 || *gl > n {
            return Err(bad(format!("global zero on missing lobe {gl}")));
        }
        if gx.is_negative() || *gx >= self.lobe(*gl).circumference {
            return Err(bad("global zero outside its lobe"));
        }
        let total: Q = self.walk()?.iter().fold(Q::zero(), |acc, s| acc + &s.length);
        if total != self.total_length() {
            return Err(bad("perimeter does not cover every lobe once"));
        }
        Ok(())
    }

    fn connected(&self) -> bool {
        let n = self.lobes.len();
        let mut reached = vec![false; n + 1];
        let mut stack = vec![1];
        reached[1] = true;
        while let Some(l) = stack.pop() {
            for (_, p) in &self.lobe(l).points {
                for &m in &self.junctions[p] {
                    if !reached[m] {
                        reached[m] = true;
                        stack.push(m);
                    }
                }
            }
        }
        reached[1..].iter().all(|r| *r)
    }

    fn breakpoints(&self, label: usize) -> Vec<Q> {
        let lobe = self.lobe(label);
        let mut b: BTreeSet<Q> = lobe.points.iter().map(|(x, _)| x.clone()).collect();
        b.insert(Q::zero());
        if self.global_zero.0 == label {
            b.insert(self.global_zero.1.clone());
        }
        b.into_iter().collect()
    }

    fn next_lobe(&self, point: usize, from: usize) -> usize {
        let order = &self.junctions[&point];
        let k = order.iter().position(|&l| l == from).expect("lobe lies on the point");
        order[(k + 1) % order.len()]
    }

    fn walk(&self) -> Result<Vec<SubArc>> {
        let total = self.total_length();
        let start = self.global_zero.clone();
        let (mut lobe, mut x) = start.clone();
        let mut out = Vec::new();
        let mut covered = Q::zero();
        loop {
            let r = &self.lobe(lobe).circumference;
            let bps = self.breakpoints(lobe);
            let next = bps.iter().find(|b| **b > x).cloned().unwrap_or_else(|| &bps[0] + r);
            let length = &next - &x;
            covered += &length;
            if covered > total {
                return Err(bad("perimeter does not close up"));
            }
            out.push(SubArc { lobe, start: x.clone(), length });
            let y = rem_euclid(&next, r);
            match self.lobe(lobe).point_at(&y) {
                Some(p) => {
                    let l2 = self.next_lobe(p, lobe);
                    x = self.lobe(l2).position_of(p).expect("point on lobe").clone();
                    lobe = l2;
                }
                None => x = y,
            }
            if (lobe, &x) == (start.0, &start.1) {
                return Ok(out);
            }
        }
    }

    /// The perimeter from the global zero, cut at intersection points, local
    /// zeros and the global zero.
    pub fn perimeter(&self) -> Result<Vec<SubArc>> {
        self.validate()?;
        self.walk()
    }

    /// Each lobe's first perimeter entry point.
    fn entry_points(&self) -> Result<Vec<Q>> {
        let per = self.perimeter()?;
        let mut first: Vec<Option<Q>> = vec![None; self.arity()];
        for s in &per {
            first[s.lobe - 1].get_or_insert_with(|| s.start.clone());
        }
        Ok(first.into_iter().map(|x| x.expect("every lobe is visited")).collect())
    }

    /// Local zeros sit at the first perimeter entry point of each lobe.
    pub fn is_spineless(&self) -> Result<bool> {
        Ok(self.entry_points()?.iter().all(|x| x.is_zero()))
    }

    /// Moves every local zero to the lobe's first perimeter entry point.
    pub fn spineless(&self) -> Result<Cactus> {
        let entries = self.entry_points()?;
        let mut c = self.clone();
        for (lobe, e) in c.lobes.iter_mut().zip(&entries) {
            for (x, _) in lobe.points.iter_mut() {
                *x = rem_euclid(&(&*x - e), &lobe.circumference);
            }
            lobe.points.sort();
        }
        let gl = c.global_zero.0;
        c.global_zero.1 = rem_euclid(&(&c.global_zero.1 - &entries[gl - 1]), &c.lobe(gl).circumference);
        Ok(c.canonical())
    }

    pub fn scaled(&self, factor: &Q) -> Cactus {
        let mut c = self.clone();
        for lobe in c.lobes.iter_mut() {
            lobe.circumference *= factor;
            for (x, _) in lobe.points.iter_mut() {
                *x *= factor;
            }
        }
        c.global_zero.1 *= factor;
        c
    }

    /// Point ids renumbered in order of first appearance along lobes 1..n,
    /// junction orders rotated to start at their least lobe.
    pub fn canonical(&self) -> Cactus {
        let mut rename: BTreeMap<usize, usize> = BTreeMap::new();
        for lobe in &self.lobes {
            for (_, p) in &lobe.points {
                let next = rename.len();
                rename.entry(*p).or_insert(next);
            }
        }
        let lobes = self
            .lobes
            .iter()
            .map(|l| Lobe {
                circumference: l.circumference.clone(),
                points: l.points.iter().map(|(x, p)| (x.clone(), rename[p])).collect(),
            })
            .collect();
        let junctions = self
            .junctions
            .iter()
            .filter_map(|(p, order)| {
                let id = *rename.get(p)?;
                let k = order.iter().enumerate().min_by_key(|(_, l)| **l).map(|(k, _)| k)?;
                let mut o = order.clone();
                o.rotate_left(k);
                Some((id, o))
            })
            .collect();
        Cactus { lobes, junctions, global_zero: self.global_zero.clone() }
    }
}

/// Where a perimeter time lands on a cactus.
enum Location {
    /// A point of one lobe only.
    Lobe(usize, Q),
    /// The passage through intersection `point` from `arriving` to `departing`.
    Passage { point: usize, arriving: usize, departing: usize },
}

fn locate(c: &Cactus, per: &[SubArc], t: &Q) -> Location {
    let mut start = Q::zero();
    for (s, sub) in per.iter().enumerate() {
        let end = &start + &sub.length;
        if *t < end {
            let r = &c.lobe(sub.lobe).circumference;
            if *t > start {
                return Location::Lobe(sub.lobe, rem_euclid(&(&sub.start + (t - &start)), r));
            }
            let prev = &per[(s + per.len() - 1) % per.len()];
            if prev.lobe == sub.lobe {
                return Location::Lobe(sub.lobe, sub.start.clone());
            }
            let pr = &c.lobe(prev.lobe).circumference;
            let at = rem_euclid(&(&prev.start + &prev.length), pr);
            let point = c.lobe(prev.lobe).point_at(&at).expect("lobe change happens at a point");
            return Location::Passage { point, arriving: prev.lobe, departing: sub.lobe };
        }
        start = end;
    }
    unreachable!("time lies within the perimeter")
}

/// Inserts `inner` along lobe `i` of `outer`, lobe positions measured from
/// the lobe's local zero matching perimeter time of `inner`.
pub fn glue_cacti(outer: &Cactus, i: usize, inner: &Cactus, mode: GlueMode) -> Result<Cactus> {
    outer.validate()?;
    inner.validate()?;
    let n1 = outer.arity();
    let n2 = inner.arity();
    if i == 0 || i > n1 {
        return Err(Error::Arity(format!("lobe {i} does not exist in a cactus of arity {n1}")));
    }
    let ri = outer.lobe(i).circumference.clone();
    let p2 = inner.total_length();
    let (fa, fb) = match mode {
        GlueMode::Right => (Q::from_integer(1.into()), &ri / &p2),
        GlueMode::Left => (&p2 / &ri, Q::from_integer(1.into())),
        GlueMode::Symmetric => (p2.clone(), ri.clone()),
    };
    let a = outer.scaled(&fa);
    let b = inner.scaled(&fb);
    let per = b.walk()?;
    let out1 = |j: usize| if j < i { j } else { j + n2 - 1 };
    let out2 = |k: usize| i + k - 1;
    // fresh ids: inner points keep theirs shifted past the outer ones
    let shift = a.junctions.keys().max().map_or(0, |m| m + 1);
    let mut lobes: Vec<Lobe> = vec![Lobe::new(Q::zero()); n1 + n2 - 1];
    let mut junctions: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (k, lobe) in b.lobes.iter().enumerate() {
        lobes[out2(k + 1) - 1] = Lobe {
            circumference: lobe.circumference.clone(),
            points: lobe.points.iter().map(|(x, p)| (x.clone(), p + shift)).collect(),
        };
    }
    for (p, order) in &b.junctions {
        junctions.insert(p + shift, order.iter().map(|&k| out2(k)).collect());
    }
    for (j, lobe) in a.lobes.iter().enumerate() {
        if j + 1 != i {
            lobes[out1(j + 1) - 1] = lobe.clone();
        }
    }
    let lobe_i = a.lobe(i);
    for (p, order) in &a.junctions {
        let k = order.iter().position(|&l| l == i);
        let Some(k) = k else {
            junctions.insert(*p, order.iter().map(|&l| out1(l)).collect());
            continue;
        };
        let others: Vec<usize> = (1..order.len()).map(|d| out1(order[(k + d) % order.len()])).collect();
        let t = lobe_i.position_of(*p).expect("point on lobe i");
        match locate(&b, &per, t) {
            Location::Lobe(l, x) => {
                let target = &mut lobes[out2(l) - 1];
                target.points.push((x, *p));
                target.points.sort();
                junctions.insert(*p, std::iter::once(out2(l)).chain(others).collect());
            }
            Location::Passage { point, arriving, .. } => {
                // the outer point merges into the inner one
                let ord = junctions.get_mut(&(point + shift)).expect("inner junction");
                let at = ord.iter().position(|&l| l == out2(arriving)).expect("arriving lobe");
                for (d, l) in others.into_iter().enumerate() {
                    ord.insert(at + 1 + d, l);
                }
                for l in order.iter().filter(|&&l| l != i) {
                    for (_, q) in lobes[out1(*l) - 1].points.iter_mut() {
                        if q == p {
                            *q = point + shift;
                        }
                    }
                }
            }
        }
    }
    let (gl, gx) = &a.global_zero;
    let global_zero = if *gl != i {
        (out1(*gl), gx.clone())
    } else {
        match locate(&b, &per, gx) {
            Location::Lobe(l, x) => (out2(l), x),
            Location::Passage { point, departing, .. } => {
                (out2(departing), b.lobe(departing).position_of(point).expect("point").clone())
            }
        }
    };
    let c = Cactus { lobes, junctions, global_zero }.canonical();
    c.validate()?;
    Ok(c)
}

/// Frames a cactus: one arc per perimeter piece from the outer circle to its
/// lobe, weighted by the piece's length.
pub fn frame(c: &Cactus) -> Result<WeightedArcFamily> {
    let per = c.perimeter()?;
    let n = c.arity();
    let mut on_lobe: Vec<Vec<(Q, usize)>> = vec![Vec::new(); n + 1];
    for (s, sub) in per.iter().enumerate() {
        on_lobe[sub.lobe].push((sub.start.clone(), s));
    }
    let mut counts = vec![per.len()];
    let mut arcs = vec![Arc::new(EndpointRef::new(0, 1), EndpointRef::new(0, 1)); per.len()];
    for (lobe, subs) in on_lobe.iter_mut().enumerate().skip(1) {
        subs.sort();
        counts.push(subs.len());
        for (slot, (_, s)) in subs.iter().enumerate() {
            arcs[*s] = Arc::new(EndpointRef::new(0, s + 1), EndpointRef::new(lobe, slot + 1));
        }
    }
    let weights = per.into_iter().map(|s| s.length).collect();
    WeightedArcFamily::planar_disks(n + 1, counts, arcs, weights)
}

/// A random valid cactus with `n` lobes; spineless if requested.
pub fn random_cactus(rng: &mut impl Rng, n: usize, spineless: bool) -> Cactus {
    let n = n.max(1);
    let mut c = Cactus::single(random_weight(rng));
    let mut next_id = 0;
    for k in 2..=n {
        c.lobes.push(Lobe::new(random_weight(rng)));
        let j = rng.gen_range(1..k);
        let existing: Vec<usize> = c.lobe(j).points.iter().map(|(_, p)| *p).collect();
        let x_new = random_fraction(rng, 6) * &c.lobe(k).circumference;
        if !existing.is_empty() && rng.gen_bool(0.3) {
            let p = existing[rng.gen_range(0..existing.len())];
            let order = c.junctions.get_mut(&p).expect("junction");
            let at = rng.gen_range(0..=order.len());
            order.insert(at, k);
            c.lobes[k - 1].points.push((x_new, p));
            continue;
        }
        let x_old = loop {
            let x = random_fraction(rng, 8) * &c.lobe(j).circumference;
            if c.lobe(j).point_at(&x).is_none() {
                break x;
            }
        };
        let p = next_id;
        next_id += 1;
        c.lobes[j - 1].points.push((x_old, p));
        c.lobes[j - 1].points.sort();
        c.lobes[k - 1].points.push((x_new, p));
        c.junctions.insert(p, vec![j, k]);
    }
    let gl = rng.gen_range(1..=n);
    let lobe = c.lobe(gl);
    let gx = if !lobe.points.is_empty() && rng.gen_bool(0.3) {
        lobe.points[rng.gen_range(0..lobe.points.len())].0.clone()
    } else {
        random_fraction(rng, 6) * &lobe.circumference
    };
    c.global_zero = (gl, gx);
    let c = c.canonical();
    if spineless {
        c.spineless().expect("generated cactus is valid")
    } else {
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arc::{dot, membership, unit, Predicate};
    use crate::glue::compose_weighted;
    use crate::random::rng;
    use crate::rational::{q, qi};

    fn two_lobes(r1: Q, r2: Q, p1: Q, p2: Q, gz: Q) -> Cactus {
        Cactus {
            lobes: vec![Lobe { circumference: r1, points: vec![(p1, 0)] }, Lobe {
                circumference: r2,
                points: vec![(p2, 0)],
            }],
            junctions: BTreeMap::from([(0, vec![1, 2])]),
            global_zero: (1, gz),
        }
    }

    #[test]
    fn perimeter_examples() {
        let one = Cactus::single(qi(3));
        assert_eq!(one.perimeter().unwrap(), vec![SubArc { lobe: 1, start: qi(0), length: qi(3) }]);

        let c = two_lobes(qi(2), qi(3), qi(0), qi(0), qi(0));
        let per = c.perimeter().unwrap();
        assert_eq!(per.iter().map(|s| (s.lobe, s.length.clone())).collect::<Vec<_>>(), vec![
            (1, qi(2)),
            (2, qi(3))
        ]);
        assert!(c.is_spineless().unwrap());

        // global zero opposite the point, lobe 2 with its spine away from it
        let c = two_lobes(qi(2), qi(3), qi(0), q(3, 2), qi(1));
        let per = c.perimeter().unwrap();
        assert_eq!(per.len(), 4);
        let total = per.iter().fold(Q::zero(), |a, s| a + &s.length);
        assert_eq!(total, qi(5));
        assert!(!c.is_spineless().unwrap());
    }

    #[test]
    fn invalid_cacti_rejected() {
        let mut c = two_lobes(qi(2), qi(3), qi(0), qi(0), qi(0));
        c.junctions.insert(0, vec![1]);
        assert!(c.validate().is_err());
        let mut c = two_lobes(qi(2), qi(3), qi(0), qi(0), qi(0));
        c.global_zero = (3, qi(0));
        assert!(c.validate().is_err());
        // a second point between the same two lobes closes a cycle
        let mut c = two_lobes(qi(2), qi(3), qi(0), qi(0), qi(0));
        c.lobes[0].points.push((qi(1), 1));
        c.lobes[1].points.push((qi(1), 1));
        c.junctions.insert(1, vec![1, 2]);
        assert!(c.validate().is_err());
    }

    #[test]
    fn frame_examples() {
        assert!(frame(&Cactus::single(q(5, 2))).unwrap().equals(&unit(q(5, 2))));
        let c = two_lobes(qi(2), qi(3), qi(0), qi(0), qi(0));
        assert!(frame(&c).unwrap().equals(&dot(qi(2), qi(3))));
    }

    #[test]
    fn frame_lands_in_trees() {
        let mut r = rng(11);
        for t in 0..60 {
            let spineless = t % 2 == 0;
            let c = random_cactus(&mut r, 1 + t % 4, spineless);
            let f = frame(&c).unwrap();
            assert!(f.is_valid(), "{c:?} {:?}", f.validate());
            assert!(membership(&f, &Predicate::Trees));
            if spineless {
                assert!(membership(&f, &Predicate::LinearTrees), "{c:?}");
            }
        }
    }

    #[test]
    fn gluing_modes_and_unit() {
        let one = Cactus::single(qi(1));
        let c = two_lobes(qi(2), qi(3), qi(0), q(3, 2), qi(1));
        let g = glue_cacti(&one, 1, &one, GlueMode::Symmetric).unwrap();
        assert_eq!(g.arity(), 1);
        let mut r = rng(5);
        for _ in 0..20 {
            let a = random_cactus(&mut r, 3, false);
            let b = random_cactus(&mut r, 2, false);
            let sym = glue_cacti(&a, 2, &b, GlueMode::Symmetric).unwrap();
            let right = glue_cacti(&a, 2, &b, GlueMode::Right).unwrap();
            let left = glue_cacti(&a, 2, &b, GlueMode::Left).unwrap();
            let ratio = sym.total_length() / right.total_length();
            assert_eq!(right.scaled(&ratio), sym);
            let ratio = sym.total_length() / left.total_length();
            assert_eq!(left.scaled(&ratio), sym);
        }
        let g = glue_cacti(&c, 1, &one, GlueMode::Right).unwrap();
        assert_eq!(g, c.canonical());
    }

    #[test]
    fn frame_intertwines_gluing() {
        let mut r = rng(23);
        for t in 0..60 {
            let a = random_cactus(&mut r, 1 + t % 3, t % 3 == 0);
            let b = random_cactus(&mut r, 1 + (t / 3) % 3, t % 2 == 0);
            let i = r.gen_range(1..=a.arity());
            let g = glue_cacti(&a, i, &b, GlueMode::Symmetric).unwrap();
            let lhs = frame(&g).unwrap();
            let rhs = compose_weighted(&frame(&a).unwrap(), i, &frame(&b).unwrap()).unwrap();
            assert!(lhs.equals(&rhs), "{a:?}\n{b:?}\n{i}");
        }
    }
}
