//! Circle configurations: the quotient of the boundary circles of a family
//! by its bands, and the family rebuilt from a planar configuration.
//!
//! Circle `b` has circumference equal to the total band width at boundary
//! `b`, its basepoint at coordinate 0 and coordinates running in window
//! order.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use crate::arc::{
    classify_disk, derive_regions, Arc, EndpointRef, Region, SurfaceSig, UnionFind, WeightedArcFamily,
};
use crate::cacti::Cactus;
use crate::error::{Error, Result};
use crate::rational::{format_q, rem_euclid, Q};

/// Identifies `[a_start, a_start + length)` on circle `a` with an interval
/// of circle `b`, both read modulo the circumferences. When `aligned`, the
/// point `a_start + u` meets `b_start + u`; otherwise it meets
/// `b_start + length - u`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Identification {
    pub a: usize,
    pub a_start: Q,
    pub b: usize,
    pub b_start: Q,
    pub length: Q,
    pub aligned: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CircleConfiguration {
    pub circumferences: Vec<Q>,
    pub identifications: Vec<Identification>,
    /// Endpoint classes where three or more circle points meet.
    pub multiple_points: Vec<Vec<(usize, Q)>>,
}

impl Identification {
    fn swapped(&self) -> Identification {
        Identification {
            a: self.b,
            a_start: self.b_start.clone(),
            b: self.a,
            b_start: self.a_start.clone(),
            length: self.length.clone(),
            aligned: self.aligned,
        }
    }

    fn ends(&self, m: &[Q]) -> [((usize, Q), (usize, Q)); 2] {
        let a0 = (self.a, rem_euclid(&self.a_start, &m[self.a]));
        let a1 = (self.a, rem_euclid(&(&self.a_start + &self.length), &m[self.a]));
        let b0 = (self.b, rem_euclid(&self.b_start, &m[self.b]));
        let b1 = (self.b, rem_euclid(&(&self.b_start + &self.length), &m[self.b]));
        if self.aligned {
            [(a0, b0), (a1, b1)]
        } else {
            [(a0, b1), (a1, b0)]
        }
    }
}

fn congruent(x: &Q, y: &Q, m: &Q) -> bool {
    rem_euclid(&(x - y), m).is_zero()
}

/// `j` continues `i` on both circles.
fn continues(i: &Identification, j: &Identification, m: &[Q]) -> bool {
    if (i.a, i.b, i.aligned) != (j.a, j.b, j.aligned) {
        return false;
    }
    if !congruent(&j.a_start, &(&i.a_start + &i.length), &m[i.a]) {
        return false;
    }
    if i.aligned {
        congruent(&j.b_start, &(&i.b_start + &i.length), &m[i.b])
    } else {
        congruent(&(&j.b_start + &j.length), &i.b_start, &m[i.b])
    }
}

impl CircleConfiguration {
    /// Merges identifications that continue each other, reduces coordinates
    /// and sorts, so equal configurations compare equal.
    pub fn normalized(circumferences: Vec<Q>, identifications: Vec<Identification>) -> Self {
        let m = &circumferences;
        let mut ids: Vec<Identification> = identifications;
        'merge: loop {
            for x in 0..ids.len() {
                for y in 0..ids.len() {
                    if x == y {
                        continue;
                    }
                    for j in [ids[y].clone(), ids[y].swapped()] {
                        let i = &ids[x];
                        if continues(i, &j, m) {
                            let merged = Identification {
                                a: i.a,
                                a_start: i.a_start.clone(),
                                b: i.b,
                                b_start: if i.aligned { i.b_start.clone() } else { j.b_start.clone() },
                                length: &i.length + &j.length,
                                aligned: i.aligned,
                            };
                            let (hi, lo) = if x > y { (x, y) } else { (y, x) };
                            ids.remove(hi);
                            ids.remove(lo);
                            ids.push(merged);
                            continue 'merge;
                        }
                    }
                }
            }
            break;
        }
        let mut ids: Vec<Identification> = ids
            .into_iter()
            .map(|mut id| {
                id.a_start = rem_euclid(&id.a_start, &m[id.a]);
                id.b_start = rem_euclid(&id.b_start, &m[id.b]);
                // a full turn on both circles has no preferred start
                if id.length == m[id.a] && id.length == m[id.b] {
                    let shift = id.a_start.clone();
                    id.a_start = Q::zero();
                    id.b_start = if id.aligned {
                        rem_euclid(&(&id.b_start - &shift), &m[id.b])
                    } else {
                        rem_euclid(&(&id.b_start + &shift), &m[id.b])
                    };
                }
                let s = id.swapped();
                if (s.a, &s.a_start, s.b, &s.b_start) < (id.a, &id.a_start, id.b, &id.b_start)
                    && !(id.length == m[id.a] && id.length == m[id.b])
                {
                    s
                } else {
                    id
                }
            })
            .collect();
        ids.sort();
        let multiple_points = multiple_points(m, &ids);
        CircleConfiguration { circumferences, identifications: ids, multiple_points }
    }

    pub fn circle_count(&self) -> usize {
        self.circumferences.len()
    }

    /// Every circle is covered exactly once by interval ends.
    pub fn validate(&self) -> Result<()> {
        let m = &self.circumferences;
        let mut cover: Vec<Vec<(Q, Q)>> = vec![Vec::new(); m.len()];
        for id in &self.identifications {
            for (c, s) in [(id.a, &id.a_start), (id.b, &id.b_start)] {
                if c >= m.len() {
                    return Err(Error::BoundaryOutOfRange { index: c, count: m.len() });
                }
                if !id.length.is_positive() || id.length > m[c] {
                    return Err(Error::Invalid(format!(
                        "interval of length {} on circle {c}",
                        format_q(&id.length)
                    )));
                }
                cover[c].push((rem_euclid(s, &m[c]), id.length.clone()));
            }
        }
        for (c, ivs) in cover.iter_mut().enumerate() {
            ivs.sort();
            let total = ivs.iter().fold(Q::zero(), |acc, (_, l)| acc + l);
            if total != m[c] {
                return Err(Error::Invalid(format!("circle {c} is not covered exactly once")));
            }
            for w in ivs.windows(2) {
                if &w[0].0 + &w[0].1 > w[1].0 {
                    return Err(Error::Invalid(format!("intervals overlap on circle {c}")));
                }
            }
        }
        Ok(())
    }
}

fn multiple_points(m: &[Q], ids: &[Identification]) -> Vec<Vec<(usize, Q)>> {
    let mut index: BTreeMap<(usize, Q), usize> = BTreeMap::new();
    let mut pairs = Vec::new();
    for id in ids {
        for (p, q) in id.ends(m) {
            let n = index.len();
            let x = *index.entry(p).or_insert(n);
            let n = index.len();
            let y = *index.entry(q).or_insert(n);
            pairs.push((x, y));
        }
    }
    let mut uf = UnionFind::new(index.len());
    for (x, y) in pairs {
        uf.union(x, y);
    }
    let mut classes: BTreeMap<usize, Vec<(usize, Q)>> = BTreeMap::new();
    for (p, k) in &index {
        classes.entry(uf.find(*k)).or_default().push(p.clone());
    }
    let mut out: Vec<Vec<(usize, Q)>> = classes.into_values().filter(|c| c.len() >= 3).collect();
    out.sort();
    out
}

/// Window positions of every arc end.
fn end_positions(f: &WeightedArcFamily) -> BTreeMap<EndpointRef, Q> {
    let mut pos = BTreeMap::new();
    for b in 0..f.comb.counts.len() {
        let mut x = Q::zero();
        for (e, w) in f.end_interval(b) {
            pos.insert(e, x.clone());
            x += w;
        }
    }
    pos
}

/// The quotient of the boundary circles by the bands.
pub fn loop_of(f: &WeightedArcFamily) -> Result<CircleConfiguration> {
    f.ensure_valid()?;
    if let Some(b) = f.comb.counts.iter().position(|&c| c == 0) {
        return Err(Error::NotExhaustive(b));
    }
    let circumferences: Vec<Q> =
        (0..f.comb.counts.len()).map(|b| f.total_weight(b)).collect::<Result<_>>()?;
    let pos = end_positions(f);
    let ids = f
        .comb
        .arcs
        .iter()
        .zip(&f.weights)
        .map(|(arc, w)| Identification {
            a: arc.ends[0].boundary,
            a_start: pos[&arc.ends[0]].clone(),
            b: arc.ends[1].boundary,
            b_start: pos[&arc.ends[1]].clone(),
            length: w.clone(),
            aligned: !arc.flips(),
        })
        .collect();
    Ok(CircleConfiguration::normalized(circumferences, ids))
}

/// A cactus as a configuration: circle 0 is the perimeter, circle `i` lobe `i`.
pub fn cactus_configuration(c: &Cactus) -> Result<CircleConfiguration> {
    let per = c.perimeter()?;
    let mut circumferences = vec![c.total_length()];
    circumferences.extend(c.lobes.iter().map(|l| l.circumference.clone()));
    let mut t = Q::zero();
    let mut ids = Vec::new();
    for s in per {
        ids.push(Identification {
            a: 0,
            a_start: t.clone(),
            b: s.lobe,
            b_start: s.start,
            length: s.length.clone(),
            aligned: true,
        });
        t += s.length;
    }
    Ok(CircleConfiguration::normalized(circumferences, ids))
}

/// Circle 0 maps onto the whole quotient, meeting every other circle and
/// never itself.
pub fn in_loop(f: &WeightedArcFamily) -> bool {
    match loop_of(f) {
        Ok(k) => k.identifications.iter().all(|id| (id.a == 0) != (id.b == 0)),
        Err(_) => false,
    }
}

/// The family whose bands realize the configuration, with interval positions
/// as embedding data. Regions are disks; a disk that would make its arc
/// boundary parallel gets a puncture instead.
pub fn section_of(k: &CircleConfiguration) -> Result<WeightedArcFamily> {
    k.validate()?;
    let m = &k.circumferences;
    // cut every band where it crosses a basepoint
    let mut pieces: Vec<Identification> = Vec::new();
    for id in &k.identifications {
        let mut cuts = vec![Q::zero(), id.length.clone()];
        let from_a = rem_euclid(&-&id.a_start, &m[id.a]);
        let from_b = if id.aligned {
            rem_euclid(&-&id.b_start, &m[id.b])
        } else {
            rem_euclid(&(&id.b_start + &id.length), &m[id.b])
        };
        for t in [from_a, from_b] {
            if t.is_positive() && t < id.length {
                cuts.push(t);
            }
        }
        cuts.sort();
        cuts.dedup();
        for w in cuts.windows(2) {
            let (t0, t1) = (&w[0], &w[1]);
            let b_start = if id.aligned { &id.b_start + t0 } else { &id.b_start + &id.length - t1 };
            pieces.push(Identification {
                a: id.a,
                a_start: rem_euclid(&(&id.a_start + t0), &m[id.a]),
                b: id.b,
                b_start: rem_euclid(&b_start, &m[id.b]),
                length: t1 - t0,
                aligned: id.aligned,
            });
        }
    }
    let mut on_circle: Vec<Vec<(Q, usize, usize)>> = vec![Vec::new(); m.len()];
    for (p, id) in pieces.iter().enumerate() {
        on_circle[id.a].push((id.a_start.clone(), p, 0));
        on_circle[id.b].push((id.b_start.clone(), p, 1));
    }
    let mut slot: BTreeMap<(usize, usize), EndpointRef> = BTreeMap::new();
    let mut counts = Vec::new();
    for (c, ends) in on_circle.iter_mut().enumerate() {
        ends.sort();
        counts.push(ends.len());
        for (s, (_, p, side)) in ends.iter().enumerate() {
            slot.insert((*p, *side), EndpointRef::new(c, s + 1));
        }
    }
    let mut arcs = Vec::new();
    for (p, id) in pieces.iter().enumerate() {
        let arc = Arc::new(slot[&(p, 0)], slot[&(p, 1)]);
        if arc.flips() == id.aligned {
            return Err(Error::NotPlanar(format!(
                "band between circles {} and {} has the wrong orientation",
                id.a, id.b
            )));
        }
        arcs.push(arc);
    }
    let cycles = derive_regions(&counts, &arcs)?;
    let regions: Vec<Region> = cycles
        .into_iter()
        .map(|c| {
            let disk = Region { genus: 0, punctures: 0, cycles: vec![c] };
            let punctures = u32::from(classify_disk(&disk).is_some());
            Region { punctures, ..disk }
        })
        .collect();
    let punctures: u32 = regions.iter().map(|r| r.punctures).sum();
    let chi: i64 = regions.iter().map(|r| r.euler_characteristic()).sum::<i64>() - arcs.len() as i64;
    let twice_genus = 2 - chi - m.len() as i64 - punctures as i64;
    if twice_genus != 0 {
        return Err(Error::NotPlanar(format!("the bands span a surface of Euler characteristic {chi}")));
    }
    let weights = pieces.into_iter().map(|p| p.length).collect();
    let f = WeightedArcFamily::from_parts(
        SurfaceSig::new(0, punctures, m.len()),
        counts,
        arcs,
        weights,
        regions,
    );
    f.ensure_valid()?;
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arc::{delta_point, dot, membership, unit, Predicate};
    use crate::cacti::{frame, random_cactus};
    use crate::random::{random_family, rng, Bounds};
    use crate::rational::{q, qi};

    #[test]
    fn unit_and_delta_loops() {
        let k = loop_of(&unit(qi(1))).unwrap();
        assert_eq!(k.identifications.len(), 1);
        assert_eq!(k.identifications[0].length, qi(1));
        assert!(section_of(&k).unwrap().equals(&unit(qi(1))));
        // the crossed pair is a single rotated identification
        let d = delta_point(q(1, 3));
        let k = loop_of(&d).unwrap();
        assert_eq!(k.identifications.len(), 1);
        assert!(section_of(&k).unwrap().equals(&d));
    }

    #[test]
    fn dot_and_cross_incidence() {
        assert!(in_loop(&dot(qi(1), qi(2))));
        let mut r = rng(3);
        let b = Bounds::planar(4, 6);
        let mut non_tree = 0;
        for _ in 0..200 {
            let f = crate::random::random_family_with(&mut r, &b).unwrap();
            assert_eq!(in_loop(&f), membership(&f, &Predicate::ChineseTrees));
            non_tree += usize::from(!in_loop(&f));
        }
        assert!(non_tree > 0);
    }

    #[test]
    fn loop_of_frame_is_cactus() {
        let mut r = rng(9);
        for t in 0..40 {
            let c = random_cactus(&mut r, 1 + t % 4, t % 2 == 0);
            let f = frame(&c).unwrap();
            assert_eq!(loop_of(&f).unwrap(), cactus_configuration(&c).unwrap());
        }
    }

    #[test]
    fn section_inverts_loop_on_trees() {
        let mut checked = 0;
        for seed in 0..200 {
            let f = random_family(seed, &Bounds::planar(4, 6)).unwrap();
            if !membership(&f, &Predicate::Trees) {
                continue;
            }
            let k = loop_of(&f).unwrap();
            let g = section_of(&k).unwrap();
            assert!(g.equals(&f), "{f:?}");
            assert_eq!(loop_of(&g).unwrap(), k);
            checked += 1;
        }
        assert!(checked >= 10, "{checked}");
    }

    #[test]
    fn boundary_parallel_band_gets_puncture() {
        // circle 0 of length 4: [0,1) folds onto [1,2), the rest meets circle 1
        let k = CircleConfiguration::normalized(vec![qi(4), qi(2)], vec![
            Identification { a: 0, a_start: qi(0), b: 0, b_start: qi(1), length: qi(1), aligned: false },
            Identification { a: 0, a_start: qi(2), b: 1, b_start: qi(0), length: qi(2), aligned: true },
        ]);
        let f = section_of(&k).unwrap();
        assert_eq!(f.sig().punctures, 1);
        assert_eq!(loop_of(&f).unwrap(), k);
    }

    #[test]
    fn orientation_mismatch_is_not_planar() {
        let k = CircleConfiguration::normalized(vec![qi(1), qi(1)], vec![Identification {
            a: 0,
            a_start: qi(0),
            b: 1,
            b_start: qi(0),
            length: qi(1),
            aligned: false,
        }]);
        assert!(matches!(section_of(&k), Err(Error::NotPlanar(_))));
    }
}
