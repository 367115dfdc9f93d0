//! Combinatorial model of weighted arc families in bounded surfaces.
//!
//! A family is stored as the window order of arc endpoints on every
//! boundary, the matching of endpoints into arcs, and the complementary
//! regions with their genus and puncture counts. Boundary 0 is read in the
//! orientation induced by the surface; boundaries `1..=n` are read in the
//! opposite sense, so that gluing an input boundary to an output boundary
//! identifies window positions directly.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{format_q, Q};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SurfaceSig {
    pub genus: u32,
    pub punctures: u32,
    pub boundaries: usize,
}

impl SurfaceSig {
    pub fn new(genus: u32, punctures: u32, boundaries: usize) -> Self {
        SurfaceSig { genus, punctures, boundaries }
    }

    pub fn planar(boundaries: usize) -> Self {
        SurfaceSig::new(0, 0, boundaries)
    }

    pub fn euler_characteristic(&self) -> i64 {
        2 - 2 * self.genus as i64 - self.boundaries as i64 - self.punctures as i64
    }

    /// `6g - 7 + 4r + 2s`, the dimension of the arc complex.
    pub fn dimension(&self) -> i64 {
        6 * self.genus as i64 - 7 + 4 * self.boundaries as i64 + 2 * self.punctures as i64
    }

    pub fn is_admissible(&self) -> bool {
        self.boundaries >= 1 && self.dimension() >= 0
    }
}

/// An arc endpoint: boundary index and 1-based slot in that window's order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EndpointRef {
    pub boundary: usize,
    pub slot: usize,
}

impl EndpointRef {
    pub fn new(boundary: usize, slot: usize) -> Self {
        EndpointRef { boundary, slot }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Hand {
    Left,
    Right,
}

/// One side of a complementary region's boundary cycle.
///
/// Arc sides are taken relative to the arc oriented from its smaller to its
/// larger endpoint. Gap `k` of a boundary lies between slots `k` and `k + 1`;
/// gap 0 is the segment through the window complement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Arc { arc: usize, hand: Hand },
    Segment { boundary: usize, gap: usize },
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Arc { arc, hand: Hand::Left } => write!(f, "a{arc}L"),
            Side::Arc { arc, hand: Hand::Right } => write!(f, "a{arc}R"),
            Side::Segment { boundary, gap } => write!(f, "b{boundary}g{gap}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Arc {
    pub ends: [EndpointRef; 2],
}

impl Arc {
    /// Builds an arc with its ends in canonical order.
    pub fn new(a: EndpointRef, b: EndpointRef) -> Self {
        if a <= b {
            Arc { ends: [a, b] }
        } else {
            Arc { ends: [b, a] }
        }
    }

    /// Whether leaf order reverses between the two ends in slot coordinates.
    pub fn flips(&self) -> bool {
        reversed(self.ends[0].boundary) == reversed(self.ends[1].boundary)
    }

    pub fn touches(&self, boundary: usize) -> bool {
        self.ends.iter().any(|e| e.boundary == boundary)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Region {
    pub genus: u32,
    pub punctures: u32,
    pub cycles: Vec<Vec<Side>>,
}

impl Region {
    pub fn euler_characteristic(&self) -> i64 {
        2 - 2 * self.genus as i64 - self.cycles.len() as i64 - self.punctures as i64
    }

    pub fn is_disk(&self) -> bool {
        self.genus == 0 && self.punctures == 0 && self.cycles.len() == 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ArcCombinatorics {
    pub sig: SurfaceSig,
    pub counts: Vec<usize>,
    pub arcs: Vec<Arc>,
    pub regions: Vec<Region>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WeightedArcFamily {
    pub comb: ArcCombinatorics,
    pub weights: Vec<Q>,
}

/// A weighted family normalized to total weight 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProjectiveArcFamily(WeightedArcFamily);

/// Slot order on boundaries `>= 1` runs against the induced orientation.
pub fn reversed(boundary: usize) -> bool {
    boundary != 0
}

/// Gap entered when leaving `slot` in the induced direction.
fn gap_after(boundary: usize, slot: usize, count: usize) -> usize {
    if reversed(boundary) {
        slot - 1
    } else {
        slot % count
    }
}

/// Endpoint reached when walking `gap` in the induced direction.
fn slot_after_gap(boundary: usize, gap: usize, count: usize) -> usize {
    if reversed(boundary) {
        if gap == 0 {
            count
        } else {
            gap
        }
    } else {
        gap + 1
    }
}

/// Map from endpoint to (arc index, end index).
pub(crate) fn endpoint_index(
    counts: &[usize],
    arcs: &[Arc],
) -> Result<HashMap<EndpointRef, (usize, usize)>> {
    let mut map = HashMap::new();
    for (a, arc) in arcs.iter().enumerate() {
        if arc.ends[0] == arc.ends[1] {
            return Err(Error::MalformedMatching(format!("arc {a} has equal ends")));
        }
        for (k, e) in arc.ends.iter().enumerate() {
            if e.boundary >= counts.len() {
                return Err(Error::MalformedMatching(format!(
                    "arc {a} ends on boundary {} of {}",
                    e.boundary,
                    counts.len()
                )));
            }
            if e.slot == 0 || e.slot > counts[e.boundary] {
                return Err(Error::MalformedMatching(format!(
                    "arc {a} uses slot {} on boundary {} with {} endpoints",
                    e.slot, e.boundary, counts[e.boundary]
                )));
            }
            if map.insert(*e, (a, k)).is_some() {
                return Err(Error::MalformedMatching(format!(
                    "endpoint ({}, {}) used twice",
                    e.boundary, e.slot
                )));
            }
        }
    }
    let total: usize = counts.iter().sum();
    if map.len() != total {
        return Err(Error::MalformedMatching(format!(
            "{} endpoints declared but {} matched",
            total,
            map.len()
        )));
    }
    Ok(map)
}

/// Rotates a cycle so that its least side comes first.
pub(crate) fn rotate_min(cycle: &mut Vec<Side>) {
    if let Some((pos, _)) = cycle.iter().enumerate().min_by_key(|(_, s)| **s) {
        cycle.rotate_left(pos);
    }
}

/// Boundary cycles of the complement of the arcs, by deterministic traversal.
///
/// Walking a cycle keeps the region on the left: a boundary segment is
/// followed in the induced direction to the next endpoint, then the arc at
/// that endpoint is followed to its far end, where the walk leaves onto the
/// next segment.
pub fn derive_regions(counts: &[usize], arcs: &[Arc]) -> Result<Vec<Vec<Side>>> {
    let index = endpoint_index(counts, arcs)?;
    let mut cycles = Vec::new();
    let mut seen: BTreeSet<(usize, usize)> = BTreeSet::new();
    for (b, &c) in counts.iter().enumerate() {
        if c == 0 {
            cycles.push(vec![Side::Segment { boundary: b, gap: 0 }]);
            continue;
        }
        for g in 0..c {
            if seen.contains(&(b, g)) {
                continue;
            }
            let mut cycle = Vec::new();
            let (mut cb, mut cg) = (b, g);
            loop {
                if !seen.insert((cb, cg)) {
                    break;
                }
                cycle.push(Side::Segment { boundary: cb, gap: cg });
                let slot = slot_after_gap(cb, cg, counts[cb]);
                let (a, k) = index[&EndpointRef::new(cb, slot)];
                let hand = if k == 0 { Hand::Left } else { Hand::Right };
                cycle.push(Side::Arc { arc: a, hand });
                let far = arcs[a].ends[1 - k];
                cb = far.boundary;
                cg = gap_after(far.boundary, far.slot, counts[far.boundary]);
            }
            rotate_min(&mut cycle);
            cycles.push(cycle);
        }
    }
    cycles.sort();
    Ok(cycles)
}

/// The endpoint at which a traversal passes from `from` into `to`, together
/// with whether the corner lies before the endpoint in slot order.
pub(crate) fn corner_between(arcs: &[Arc], from: Side, to: Side) -> Option<(EndpointRef, bool)> {
    match (from, to) {
        (Side::Segment { .. }, Side::Arc { arc, hand }) => {
            let e = if hand == Hand::Left { arcs[arc].ends[0] } else { arcs[arc].ends[1] };
            // the segment precedes the endpoint in the induced direction
            Some((e, !reversed(e.boundary)))
        }
        (Side::Arc { arc, hand }, Side::Segment { .. }) => {
            let e = if hand == Hand::Left { arcs[arc].ends[1] } else { arcs[arc].ends[0] };
            Some((e, reversed(e.boundary)))
        }
        _ => None,
    }
}

/// How the genus of a rebuilt region is determined.
#[derive(Debug, Clone, Copy)]
pub(crate) enum RegionSpec {
    Fixed { genus: u32, punctures: u32 },
    /// Genus is solved from the Euler characteristic once the number of
    /// boundary cycles is known.
    Euler { chi: i64, punctures: u32 },
}

/// Re-derives boundary cycles from `arcs` and groups them into regions, using
/// `region_of` to send each segment to an index into `specs`. Specs that
/// receive no cycle are dropped.
pub(crate) fn rebuild(
    sig: SurfaceSig,
    counts: Vec<usize>,
    arcs: Vec<Arc>,
    weights: Vec<Q>,
    specs: &[RegionSpec],
    region_of: impl FnMut(usize, usize) -> usize,
) -> Result<WeightedArcFamily> {
    Ok(assemble(sig, counts, arcs, weights, specs, region_of)?.canonical())
}

/// As [`rebuild`] but keeps the given arc numbering; regions are listed in
/// increasing spec index.
pub(crate) fn assemble(
    sig: SurfaceSig,
    counts: Vec<usize>,
    arcs: Vec<Arc>,
    weights: Vec<Q>,
    specs: &[RegionSpec],
    mut region_of: impl FnMut(usize, usize) -> usize,
) -> Result<WeightedArcFamily> {
    let cycles = derive_regions(&counts, &arcs)?;
    let mut grouped: BTreeMap<usize, Vec<Vec<Side>>> = BTreeMap::new();
    for cycle in cycles {
        let mut target: Option<usize> = None;
        for s in &cycle {
            if let Side::Segment { boundary, gap } = *s {
                let r = region_of(boundary, gap);
                match target {
                    None => target = Some(r),
                    Some(t) if t != r => {
                        return Err(Error::Internal(format!(
                            "cycle {cycle:?} spans regions {t} and {r}"
                        )))
                    }
                    _ => {}
                }
            }
        }
        let t = target.ok_or_else(|| Error::Internal("cycle without segments".into()))?;
        grouped.entry(t).or_default().push(cycle);
    }
    let mut regions = Vec::new();
    for (r, cycles) in grouped {
        let (genus, punctures) = match specs[r] {
            RegionSpec::Fixed { genus, punctures } => (genus, punctures),
            RegionSpec::Euler { chi, punctures } => {
                let twice = 2 - chi - cycles.len() as i64 - punctures as i64;
                if twice < 0 || twice % 2 != 0 {
                    return Err(Error::Internal(format!(
                        "region with chi {chi}, {} cycles, {punctures} punctures has no genus",
                        cycles.len()
                    )));
                }
                ((twice / 2) as u32, punctures)
            }
        };
        regions.push(Region { genus, punctures, cycles });
    }
    Ok(WeightedArcFamily { comb: ArcCombinatorics { sig, counts, arcs, regions }, weights })
}

/// A failed invariant, with the witnesses that break it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: &'static str,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.detail)
    }
}

fn violation(kind: &'static str, detail: impl Into<String>) -> Violation {
    Violation { kind, detail: detail.into() }
}

/// The region-shape test behind both essentiality and parallelism.
fn disk_kind(region: &Region) -> Option<DiskKind> {
    if !region.is_disk() {
        return None;
    }
    let cycle = &region.cycles[0];
    let nonzero_segments = cycle.iter().all(|s| match s {
        Side::Segment { gap, .. } => *gap != 0,
        _ => true,
    });
    if !nonzero_segments {
        return None;
    }
    let arcs: Vec<usize> = cycle
        .iter()
        .filter_map(|s| match s {
            Side::Arc { arc, .. } => Some(*arc),
            _ => None,
        })
        .collect();
    match (cycle.len(), arcs.as_slice()) {
        (2, [a]) => Some(DiskKind::Monogon(*a)),
        (4, [a, b]) if a != b => Some(DiskKind::Bigon(*a, *b)),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum DiskKind {
    Monogon(usize),
    Bigon(usize, usize),
}

pub(crate) fn classify_disk(region: &Region) -> Option<DiskKind> {
    disk_kind(region)
}

impl ArcCombinatorics {
    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn boundary_count(&self) -> usize {
        self.counts.len()
    }

    /// Checks every structural invariant; weights are checked by the caller.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let sig = self.sig;
        if sig.boundaries < 1 {
            out.push(violation("surface", "at least one boundary is required"));
        }
        if sig.dimension() < 0 {
            out.push(violation("surface", format!("6g-7+4r+2s = {} < 0", sig.dimension())));
        }
        if self.counts.len() != sig.boundaries {
            out.push(violation(
                "endpoint counts",
                format!("{} counts for {} boundaries", self.counts.len(), sig.boundaries),
            ));
            return out;
        }
        let derived = match derive_regions(&self.counts, &self.arcs) {
            Ok(c) => c,
            Err(e) => {
                out.push(violation("matching", e.to_string()));
                return out;
            }
        };
        let mut declared: Vec<Vec<Side>> = Vec::new();
        for r in &self.regions {
            for c in &r.cycles {
                let mut c = c.clone();
                rotate_min(&mut c);
                declared.push(c);
            }
        }
        declared.sort();
        if declared != derived {
            out.push(violation(
                "region cycles",
                "declared region cycles differ from the traversal of the matching",
            ));
            return out;
        }
        if self.regions.iter().any(|r| r.cycles.is_empty()) {
            out.push(violation("region cycles", "a region has no boundary cycle"));
        }
        let chi_sum: i64 = self.regions.iter().map(Region::euler_characteristic).sum();
        let expected = sig.euler_characteristic() + self.arcs.len() as i64;
        if chi_sum != expected {
            out.push(violation(
                "euler identity",
                format!("regions sum to {chi_sum}, surface and arcs give {expected}"),
            ));
        }
        let punct: u32 = self.regions.iter().map(|r| r.punctures).sum();
        if punct != sig.punctures {
            out.push(violation(
                "puncture count",
                format!("regions carry {punct} punctures, surface has {}", sig.punctures),
            ));
        }
        // connectivity across arcs
        let mut side_region: HashMap<Side, usize> = HashMap::new();
        for (ri, r) in self.regions.iter().enumerate() {
            for c in &r.cycles {
                for s in c {
                    side_region.insert(*s, ri);
                }
            }
        }
        let mut uf = UnionFind::new(self.regions.len());
        for a in 0..self.arcs.len() {
            let l = side_region[&Side::Arc { arc: a, hand: Hand::Left }];
            let r = side_region[&Side::Arc { arc: a, hand: Hand::Right }];
            uf.union(l, r);
        }
        if self.regions.len() > 1 {
            let root = uf.find(0);
            if (1..self.regions.len()).any(|i| uf.find(i) != root) {
                out.push(violation("connectivity", "region adjacency graph is disconnected"));
            }
        }
        for r in &self.regions {
            match disk_kind(r) {
                Some(DiskKind::Monogon(a)) => out.push(violation(
                    "inessential arc",
                    format!("arc {a} cuts off an unpunctured disk with the boundary"),
                )),
                Some(DiskKind::Bigon(a, b)) => {
                    out.push(violation("parallel arcs", format!("arcs {a} and {b} are parallel")))
                }
                None => {}
            }
        }
        out
    }

    /// Number of arc ends on `boundary`.
    pub fn met(&self, boundary: usize) -> bool {
        self.counts.get(boundary).copied().unwrap_or(0) > 0
    }

    pub fn is_exhaustive(&self) -> bool {
        self.counts.iter().all(|&c| c > 0)
    }

    /// Arcs cutting off an unpunctured disk whose boundary segment is the
    /// window complement. Such arcs are allowed, but a rotation of their
    /// boundary turns them inessential, so gluing at that boundary can fail.
    pub fn window_loops(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for r in &self.regions {
            if !r.is_disk() || r.cycles[0].len() != 2 {
                continue;
            }
            if let [Side::Arc { arc, .. }, Side::Segment { boundary, gap: 0 }] = r.cycles[0][..] {
                out.push((arc, boundary));
            }
        }
        out
    }
}

pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut y = x;
        while self.parent[y] != r {
            let next = self.parent[y];
            self.parent[y] = r;
            y = next;
        }
        r
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

impl WeightedArcFamily {
    /// Builds a family from arcs and region topology given per cycle-owner.
    ///
    /// `regions` lists `(genus, punctures, cycles)`; cycles may be given in
    /// any rotation. The result is canonicalized but not validated.
    pub fn from_parts(
        sig: SurfaceSig,
        counts: Vec<usize>,
        arcs: Vec<Arc>,
        weights: Vec<Q>,
        regions: Vec<Region>,
    ) -> Self {
        WeightedArcFamily { comb: ArcCombinatorics { sig, counts, arcs, regions }, weights }
            .canonical()
    }

    /// Builds a family whose complement is a single region topology per
    /// traversal cycle: all regions are taken as unpunctured disks except
    /// that cycles are grouped by `group`, which assigns each derived cycle
    /// (by index in traversal order) a region id with the given genus and
    /// punctures. Intended for hand-built examples.
    pub fn with_grouping(
        sig: SurfaceSig,
        counts: Vec<usize>,
        arcs: Vec<Arc>,
        weights: Vec<Q>,
        group: impl Fn(&[Side]) -> (usize, u32, u32),
    ) -> Result<Self> {
        let cycles = derive_regions(&counts, &arcs)?;
        let mut by_id: BTreeMap<usize, Region> = BTreeMap::new();
        for c in cycles {
            let (id, g, s) = group(&c);
            let entry = by_id.entry(id).or_insert(Region { genus: g, punctures: s, cycles: vec![] });
            entry.cycles.push(c);
        }
        Ok(Self::from_parts(sig, counts, arcs, weights, by_id.into_values().collect()))
    }

    /// Planar family whose regions are all unpunctured disks except that
    /// cycles sharing a region are not merged; works whenever every traversal
    /// cycle bounds its own disk (for example every tree).
    pub fn planar_disks(
        boundaries: usize,
        counts: Vec<usize>,
        arcs: Vec<Arc>,
        weights: Vec<Q>,
    ) -> Result<Self> {
        let cycles = derive_regions(&counts, &arcs)?;
        let regions = cycles
            .into_iter()
            .map(|c| Region { genus: 0, punctures: 0, cycles: vec![c] })
            .collect();
        Ok(Self::from_parts(SurfaceSig::planar(boundaries), counts, arcs, weights, regions))
    }

    pub fn sig(&self) -> SurfaceSig {
        self.comb.sig
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.comb.arcs
    }

    /// Violations of every invariant, including positivity of weights.
    pub fn validate(&self) -> std::result::Result<(), Vec<Violation>> {
        let mut v = Vec::new();
        if self.weights.len() != self.comb.arcs.len() {
            v.push(violation(
                "weights",
                format!("{} weights for {} arcs", self.weights.len(), self.comb.arcs.len()),
            ));
        }
        for (i, w) in self.weights.iter().enumerate() {
            if !w.is_positive() {
                v.push(violation("weights", format!("weight {} of arc {i} is not positive", format_q(w))));
            }
        }
        v.extend(self.comb.violations());
        if v.is_empty() {
            Ok(())
        } else {
            Err(v)
        }
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_ok()
    }

    pub fn ensure_valid(&self) -> Result<()> {
        self.validate().map_err(|v| {
            Error::Invalid(v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; "))
        })
    }

    /// Sum of weights of arc ends on `boundary`; an arc with both ends there
    /// counts twice.
    pub fn total_weight(&self, boundary: usize) -> Result<Q> {
        if boundary >= self.comb.counts.len() {
            return Err(Error::BoundaryOutOfRange { index: boundary, count: self.comb.counts.len() });
        }
        let mut t = Q::zero();
        for (arc, w) in self.comb.arcs.iter().zip(&self.weights) {
            for e in &arc.ends {
                if e.boundary == boundary {
                    t += w;
                }
            }
        }
        Ok(t)
    }

    pub fn total(&self) -> Q {
        self.weights.iter().fold(Q::zero(), |acc, w| acc + w)
    }

    /// Arc ends on `boundary` in window order, each with its band width.
    pub fn end_interval(&self, boundary: usize) -> Vec<(EndpointRef, Q)> {
        let mut ends: Vec<(EndpointRef, Q)> = Vec::new();
        for (arc, w) in self.comb.arcs.iter().zip(&self.weights) {
            for e in &arc.ends {
                if e.boundary == boundary {
                    ends.push((*e, w.clone()));
                }
            }
        }
        ends.sort_by_key(|(e, _)| e.slot);
        ends
    }

    /// Arc index and end index at each endpoint.
    pub fn endpoint_map(&self) -> HashMap<EndpointRef, (usize, usize)> {
        endpoint_index(&self.comb.counts, &self.comb.arcs).expect("family has a valid matching")
    }

    pub fn scaled(&self, factor: &Q) -> WeightedArcFamily {
        WeightedArcFamily {
            comb: self.comb.clone(),
            weights: self.weights.iter().map(|w| w * factor).collect(),
        }
    }

    /// Canonical representative: arcs sorted by least endpoint, cycles
    /// rotated to their least side and sorted, regions sorted.
    pub fn canonical(&self) -> WeightedArcFamily {
        let mut order: Vec<usize> = (0..self.comb.arcs.len()).collect();
        order.sort_by_key(|&i| Arc::new(self.comb.arcs[i].ends[0], self.comb.arcs[i].ends[1]));
        let mut renumber = vec![0usize; order.len()];
        for (new, &old) in order.iter().enumerate() {
            renumber[old] = new;
        }
        let arcs: Vec<Arc> = order
            .iter()
            .map(|&i| Arc::new(self.comb.arcs[i].ends[0], self.comb.arcs[i].ends[1]))
            .collect();
        let weights: Vec<Q> = order.iter().map(|&i| self.weights[i].clone()).collect();
        let flipped: Vec<bool> = order
            .iter()
            .map(|&i| self.comb.arcs[i].ends[0] > self.comb.arcs[i].ends[1])
            .collect();
        let mut regions: Vec<Region> = self
            .comb
            .regions
            .iter()
            .map(|r| {
                let mut cycles: Vec<Vec<Side>> = r
                    .cycles
                    .iter()
                    .map(|c| {
                        let mut c: Vec<Side> = c
                            .iter()
                            .map(|s| match *s {
                                Side::Arc { arc, hand } => {
                                    let new = renumber[arc];
                                    let hand = if flipped[new] {
                                        match hand {
                                            Hand::Left => Hand::Right,
                                            Hand::Right => Hand::Left,
                                        }
                                    } else {
                                        hand
                                    };
                                    Side::Arc { arc: new, hand }
                                }
                                seg => seg,
                            })
                            .collect();
                        rotate_min(&mut c);
                        c
                    })
                    .collect();
                cycles.sort();
                Region { genus: r.genus, punctures: r.punctures, cycles }
            })
            .collect();
        regions.sort_by(|a, b| a.cycles[..].cmp(&b.cycles[..]).then(a.cmp(b)));
        WeightedArcFamily {
            comb: ArcCombinatorics {
                sig: self.comb.sig,
                counts: self.comb.counts.clone(),
                arcs,
                regions,
            },
            weights,
        }
    }

    pub fn equals(&self, other: &WeightedArcFamily) -> bool {
        self.canonical() == other.canonical()
    }

    pub fn projective(&self) -> ProjectiveArcFamily {
        ProjectiveArcFamily::from_weighted(self)
    }

    /// Region containing a given side.
    pub fn region_of_side(&self, side: Side) -> Option<usize> {
        self.comb
            .regions
            .iter()
            .position(|r| r.cycles.iter().any(|c| c.contains(&side)))
    }

    /// Applies a boundary relabeling `sigma` (old label `b` becomes
    /// `sigma[b]`). When label 0 moves, the two boundaries that change between
    /// the output and input reading direction have their window order
    /// reversed.
    pub fn relabel(&self, sigma: &[usize]) -> Result<WeightedArcFamily> {
        let n = self.comb.counts.len();
        if sigma.len() != n {
            return Err(Error::NotAPermutation(n));
        }
        let mut seen = vec![false; n];
        for &s in sigma {
            if s >= n || seen[s] {
                return Err(Error::NotAPermutation(n));
            }
            seen[s] = true;
        }
        let counts_old = &self.comb.counts;
        // reversal needed when the reading direction class changes
        let flip = |b: usize| reversed(b) != reversed(sigma[b]);
        let map_end = |e: EndpointRef| {
            let c = counts_old[e.boundary];
            let slot = if flip(e.boundary) { c + 1 - e.slot } else { e.slot };
            EndpointRef::new(sigma[e.boundary], slot)
        };
        let mut counts = vec![0; n];
        for b in 0..n {
            counts[sigma[b]] = counts_old[b];
        }
        let arcs: Vec<Arc> = self
            .comb
            .arcs
            .iter()
            .map(|a| Arc::new(map_end(a.ends[0]), map_end(a.ends[1])))
            .collect();
        let mut inv = vec![0; n];
        for b in 0..n {
            inv[sigma[b]] = b;
        }
        let seg_region = self.segment_regions();
        let specs: Vec<RegionSpec> = self
            .comb
            .regions
            .iter()
            .map(|r| RegionSpec::Fixed { genus: r.genus, punctures: r.punctures })
            .collect();
        rebuild(self.comb.sig, counts, arcs, self.weights.clone(), &specs, |nb, ng| {
            let ob = inv[nb];
            let c = counts_old[ob];
            let og = if flip(ob) && c > 0 { (c - ng) % c } else { ng };
            seg_region[&(ob, og)]
        })
    }

    /// Deletes the marked arcs; the regions on both sides of a deleted arc
    /// merge.
    pub fn without_arcs(&self, remove: &[bool]) -> Result<WeightedArcFamily> {
        let k = self.comb.arcs.len();
        if remove.len() != k {
            return Err(Error::Invalid(format!("{} flags for {k} arcs", remove.len())));
        }
        let sides = self.side_regions();
        let mut uf = UnionFind::new(self.comb.regions.len());
        for a in (0..k).filter(|&a| remove[a]) {
            uf.union(sides[&Side::Arc { arc: a, hand: Hand::Left }], sides[&Side::Arc { arc: a, hand: Hand::Right }]);
        }
        let mut chi: BTreeMap<usize, (i64, u32)> = BTreeMap::new();
        for (r, region) in self.comb.regions.iter().enumerate() {
            let e = chi.entry(uf.find(r)).or_insert((0, 0));
            e.0 += region.euler_characteristic();
            e.1 += region.punctures;
        }
        for a in (0..k).filter(|&a| remove[a]) {
            chi.get_mut(&uf.find(sides[&Side::Arc { arc: a, hand: Hand::Left }])).expect("class").0 -= 1;
        }
        let class_index: BTreeMap<usize, usize> = chi.keys().enumerate().map(|(i, c)| (*c, i)).collect();
        let specs: Vec<RegionSpec> =
            chi.values().map(|&(chi, punctures)| RegionSpec::Euler { chi, punctures }).collect();
        let emap = self.endpoint_map();
        let seg = self.segment_regions();
        let n = self.comb.counts.len();
        let mut counts = vec![0; n];
        let mut new_slot: HashMap<EndpointRef, EndpointRef> = HashMap::new();
        let mut gap_class: HashMap<(usize, usize), usize> = HashMap::new();
        for b in 0..n {
            let c = self.comb.counts[b];
            let kept: Vec<usize> = (1..=c).filter(|&s| !remove[emap[&EndpointRef::new(b, s)].0]).collect();
            for (t, &s) in kept.iter().enumerate() {
                new_slot.insert(EndpointRef::new(b, s), EndpointRef::new(b, t + 1));
                // gap after slot s in slot order keeps its region class
                gap_class.insert((b, (t + 1) % kept.len()), class_index[&uf.find(seg[&(b, s % c)])]);
            }
            if kept.is_empty() {
                gap_class.insert((b, 0), class_index[&uf.find(seg[&(b, 0)])]);
            }
            counts[b] = kept.len();
        }
        let mut arcs = Vec::new();
        let mut weights = Vec::new();
        for a in (0..k).filter(|&a| !remove[a]) {
            let arc = self.comb.arcs[a];
            arcs.push(Arc::new(new_slot[&arc.ends[0]], new_slot[&arc.ends[1]]));
            weights.push(self.weights[a].clone());
        }
        rebuild(self.comb.sig, counts, arcs, weights, &specs, |b, g| gap_class[&(b, g)])
    }

    /// Deletes every arc of weight zero.
    pub fn drop_zero_weights(&self) -> Result<WeightedArcFamily> {
        let remove: Vec<bool> = self.weights.iter().map(|w| w.is_zero()).collect();
        if remove.iter().any(|r| *r) {
            self.without_arcs(&remove)
        } else {
            Ok(self.clone())
        }
    }

    /// Region index of every boundary segment.
    pub(crate) fn segment_regions(&self) -> HashMap<(usize, usize), usize> {
        let mut m = HashMap::new();
        for (ri, r) in self.comb.regions.iter().enumerate() {
            for c in &r.cycles {
                for s in c {
                    if let Side::Segment { boundary, gap } = *s {
                        m.insert((boundary, gap), ri);
                    }
                }
            }
        }
        m
    }

    /// Side to region index.
    pub(crate) fn side_regions(&self) -> HashMap<Side, usize> {
        let mut m = HashMap::new();
        for (ri, r) in self.comb.regions.iter().enumerate() {
            for c in &r.cycles {
                for s in c {
                    m.insert(*s, ri);
                }
            }
        }
        m
    }

    /// Boundaries met by each arc, as an unordered pair.
    pub fn incidences(&self) -> Vec<(usize, usize)> {
        self.comb
            .arcs
            .iter()
            .map(|a| {
                let (x, y) = (a.ends[0].boundary, a.ends[1].boundary);
                (x.min(y), x.max(y))
            })
            .collect()
    }
}

impl ProjectiveArcFamily {
    pub fn from_weighted(f: &WeightedArcFamily) -> Self {
        let total = f.total();
        let inner = if total.is_zero() || total.is_one() {
            f.canonical()
        } else {
            f.scaled(&(Q::one() / total)).canonical()
        };
        ProjectiveArcFamily(inner)
    }

    pub fn weighted(&self) -> &WeightedArcFamily {
        &self.0
    }

    pub fn into_weighted(self) -> WeightedArcFamily {
        self.0
    }

    pub fn relabel(&self, sigma: &[usize]) -> Result<ProjectiveArcFamily> {
        Ok(ProjectiveArcFamily(self.0.relabel(sigma)?))
    }
}

/// Boundary membership predicates on families.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Predicate {
    Exhaustive,
    /// Arcs may join `i` and `j` only if `allowed[i][j]`; boundary `k` must be
    /// met exactly when `required[k]`.
    Incidence { allowed: Vec<Vec<bool>>, required: Vec<bool> },
    Trees,
    LinearTrees,
    ChineseTrees,
    CyclicChineseTrees,
}

/// For a Chinese tree, the boundary-0 slots of the arcs at each boundary
/// `i >= 1`, listed in boundary `i`'s window order.
fn blocks_at_zero(f: &WeightedArcFamily) -> Vec<Vec<usize>> {
    let n = f.comb.counts.len();
    let mut blocks = vec![Vec::new(); n];
    let mut pairs: Vec<(EndpointRef, usize)> = Vec::new();
    for a in &f.comb.arcs {
        let (z, other) = if a.ends[0].boundary == 0 { (a.ends[0], a.ends[1]) } else { (a.ends[1], a.ends[0]) };
        pairs.push((other, z.slot));
    }
    pairs.sort();
    for (other, zslot) in pairs {
        blocks[other.boundary].push(zslot);
    }
    blocks
}

/// Some rotation of `seq` is increasing: the ends keep their cyclic order.
fn is_cyclic_run(seq: &[usize]) -> bool {
    let descents = (0..seq.len()).filter(|&k| seq[(k + 1) % seq.len()] < seq[k]).count();
    descents <= 1
}

/// The ends keep their linear order.
fn is_linear_run(seq: &[usize]) -> bool {
    seq.windows(2).all(|w| w[0] < w[1])
}

pub fn chinese_tree_incidence(f: &WeightedArcFamily) -> bool {
    f.comb.is_exhaustive()
        && f.comb.arcs.iter().all(|a| {
            let (x, y) = (a.ends[0].boundary, a.ends[1].boundary);
            (x == 0) != (y == 0)
        })
}

pub fn membership(f: &WeightedArcFamily, predicate: &Predicate) -> bool {
    match predicate {
        Predicate::Exhaustive => f.comb.is_exhaustive(),
        Predicate::Incidence { allowed, required } => {
            let n = f.comb.counts.len();
            if allowed.len() != n || required.len() != n {
                return false;
            }
            f.incidences().iter().all(|&(i, j)| allowed[i][j] || allowed[j][i])
                && (0..n).all(|k| f.comb.met(k) == required[k])
        }
        Predicate::ChineseTrees => chinese_tree_incidence(f),
        Predicate::Trees => {
            chinese_tree_incidence(f) && f.comb.sig.genus == 0 && f.comb.sig.punctures == 0
        }
        Predicate::CyclicChineseTrees => {
            chinese_tree_incidence(f) && {
                blocks_at_zero(f).iter().skip(1).all(|b| is_cyclic_run(b))
            }
        }
        Predicate::LinearTrees => {
            membership(f, &Predicate::Trees)
                && blocks_at_zero(f).iter().skip(1).all(|b| is_linear_run(b))
        }
    }
}

/// Linear-order blocks used by linear normalization.
pub(crate) fn zero_blocks(f: &WeightedArcFamily) -> Vec<Vec<usize>> {
    blocks_at_zero(f)
}

/// The unit: one arc across the cylinder.
pub fn unit(weight: Q) -> WeightedArcFamily {
    WeightedArcFamily::planar_disks(
        2,
        vec![1, 1],
        vec![Arc::new(EndpointRef::new(0, 1), EndpointRef::new(1, 1))],
        vec![weight],
    )
    .expect("unit is well formed")
}

/// Two crossing arcs on the cylinder with weights `(s, 1 - s)`; the arc
/// leaving slot 1 of boundary 0 carries `s`.
pub fn delta_point(s: Q) -> WeightedArcFamily {
    let t = Q::one() - &s;
    WeightedArcFamily::planar_disks(
        2,
        vec![2, 2],
        vec![
            Arc::new(EndpointRef::new(0, 1), EndpointRef::new(1, 2)),
            Arc::new(EndpointRef::new(0, 2), EndpointRef::new(1, 1)),
        ],
        vec![s, t],
    )
    .expect("delta is well formed")
}

/// Arcs 0-1 and 0-2 on the pair of pants, window order `(a1, a2)` at 0.
pub fn dot(w1: Q, w2: Q) -> WeightedArcFamily {
    WeightedArcFamily::planar_disks(
        3,
        vec![2, 1, 1],
        vec![
            Arc::new(EndpointRef::new(0, 1), EndpointRef::new(1, 1)),
            Arc::new(EndpointRef::new(0, 2), EndpointRef::new(2, 1)),
        ],
        vec![w1, w2],
    )
    .expect("dot is well formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn e(b: usize, s: usize) -> EndpointRef {
        EndpointRef::new(b, s)
    }

    #[test]
    fn unit_is_valid_single_disk() {
        let u = unit(qi(1));
        assert!(u.is_valid(), "{:?}", u.validate());
        assert_eq!(u.comb.regions.len(), 1);
        assert_eq!(u.comb.regions[0].cycles[0].len(), 4);
    }

    #[test]
    fn straight_pair_is_parallel() {
        let f = WeightedArcFamily::planar_disks(
            2,
            vec![2, 2],
            vec![Arc::new(e(0, 1), e(1, 1)), Arc::new(e(0, 2), e(1, 2))],
            vec![qi(1), qi(1)],
        )
        .unwrap();
        let v = f.validate().unwrap_err();
        assert!(v.iter().any(|x| x.kind == "parallel arcs"), "{v:?}");
    }

    #[test]
    fn delta_regions_each_hold_one_window_gap() {
        let d = delta_point(q(1, 3));
        assert!(d.is_valid(), "{:?}", d.validate());
        let cycles = derive_regions(&d.comb.counts, &d.comb.arcs).unwrap();
        assert_eq!(cycles.len(), 2);
        for c in &cycles {
            assert_eq!(c.len(), 4);
            let zeros = c
                .iter()
                .filter(|s| matches!(s, Side::Segment { gap: 0, .. }))
                .count();
            assert_eq!(zeros, 1);
        }
    }

    #[test]
    fn empty_arc_list_gives_boundary_circles() {
        let cycles = derive_regions(&[0, 0, 0], &[]).unwrap();
        assert_eq!(cycles.len(), 3);
        assert!(cycles.iter().all(|c| c.len() == 1));
    }

    #[test]
    fn malformed_matching_rejected() {
        let r = derive_regions(&[2, 1], &[Arc::new(e(0, 1), e(1, 1))]);
        assert!(matches!(r, Err(Error::MalformedMatching(_))));
        let r = derive_regions(&[1, 1], &[Arc::new(e(0, 1), e(1, 2))]);
        assert!(r.is_err());
    }

    #[test]
    fn puncture_count_violation() {
        let mut u = unit(qi(1));
        u.comb.regions[0].punctures = 1;
        let v = u.validate().unwrap_err();
        assert!(v.iter().any(|x| x.kind == "puncture count"));
    }

    #[test]
    fn total_weight_counts_both_ends() {
        // arc with both ends on boundary 0 around a puncture
        let f = WeightedArcFamily::with_grouping(
            SurfaceSig::new(0, 2, 1),
            vec![2],
            vec![Arc::new(e(0, 1), e(0, 2))],
            vec![q(3, 2)],
            |c| {
                let has_zero = c.iter().any(|s| matches!(s, Side::Segment { gap: 0, .. }));
                if has_zero { (0, 0, 1) } else { (1, 0, 1) }
            },
        )
        .unwrap();
        assert!(f.is_valid(), "{:?}", f.validate());
        assert_eq!(f.total_weight(0).unwrap(), qi(3));
        assert!(f.total_weight(1).is_err());
        assert_eq!(delta_point(q(1, 3)).total_weight(1).unwrap(), qi(1));
    }

    #[test]
    fn monogon_without_puncture_is_inessential() {
        let f = WeightedArcFamily::planar_disks(
            1,
            vec![2],
            vec![Arc::new(e(0, 1), e(0, 2))],
            vec![qi(1)],
        );
        // sig (0,0,1) is below the admissible dimension as well
        let f = f.unwrap();
        let v = f.validate().unwrap_err();
        assert!(v.iter().any(|x| x.kind == "inessential arc"));
    }

    #[test]
    fn end_intervals() {
        let d = delta_point(q(1, 4));
        let ends = d.end_interval(0);
        assert_eq!(ends, vec![(e(0, 1), q(1, 4)), (e(0, 2), q(3, 4))]);
        assert_eq!(unit(qi(1)).end_interval(1), vec![(e(1, 1), qi(1))]);
        let mut f = dot(qi(1), qi(1));
        f.comb.counts.push(0);
        assert!(f.end_interval(3).is_empty());
    }

    #[test]
    fn relabel_dot_swaps_inputs() {
        let d = dot(qi(1), qi(2));
        let r = d.relabel(&[0, 2, 1]).unwrap();
        assert!(r.is_valid());
        // window order at 0 preserved: slot 1 now runs to boundary 2
        let a0 = r.arcs().iter().position(|a| a.ends[0] == e(0, 1)).unwrap();
        assert_eq!(r.arcs()[a0].ends[1], e(2, 1));
        assert_eq!(r.weights[a0], qi(1));
        let back = r.relabel(&[0, 2, 1]).unwrap();
        assert!(back.equals(&d));
        assert!(d.relabel(&[0, 1, 2]).unwrap().equals(&d));
        assert!(d.relabel(&[0, 0, 1]).is_err());
    }

    #[test]
    fn relabel_moving_zero_round_trips() {
        let d = delta_point(q(1, 3));
        let r = d.relabel(&[1, 0]).unwrap();
        assert!(r.is_valid(), "{:?}", r.validate());
        assert!(r.relabel(&[1, 0]).unwrap().equals(&d));
    }

    #[test]
    fn canonical_equality() {
        let f = dot(qi(1), qi(2));
        let mut arcs = f.comb.arcs.clone();
        arcs.reverse();
        let g = WeightedArcFamily::planar_disks(3, f.comb.counts.clone(), arcs, vec![qi(2), qi(1)])
            .unwrap();
        assert!(f.equals(&g));
        assert_eq!(f.canonical(), f.canonical().canonical());
        assert_eq!(dot(qi(2), qi(4)).projective(), dot(qi(1), qi(2)).projective());
        assert_ne!(delta_point(q(1, 3)).projective(), delta_point(q(2, 3)).projective());
    }

    #[test]
    fn membership_examples() {
        let d = dot(qi(1), qi(1));
        assert!(membership(&d, &Predicate::Trees));
        assert!(membership(&d, &Predicate::LinearTrees));
        let del = delta_point(q(1, 2));
        assert!(membership(&del, &Predicate::Exhaustive));
        assert!(membership(&del, &Predicate::Trees));
        assert!(!membership(&del, &Predicate::LinearTrees));
        assert!(membership(&del, &Predicate::CyclicChineseTrees));
        // an arc 1-2 on the pair of pants
        let f = WeightedArcFamily::planar_disks(
            3,
            vec![1, 2, 1],
            vec![Arc::new(e(0, 1), e(1, 1)), Arc::new(e(1, 2), e(2, 1))],
            vec![qi(1), qi(1)],
        )
        .unwrap();
        assert!(f.is_valid(), "{:?}", f.validate());
        assert!(!membership(&f, &Predicate::Trees));
        assert!(!membership(&f, &Predicate::ChineseTrees));
        let all = vec![vec![true; 3]; 3];
        assert!(membership(&f, &Predicate::Incidence { allowed: all, required: vec![true; 3] }));
    }
}
