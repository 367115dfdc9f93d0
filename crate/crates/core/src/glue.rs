//! Operadic gluing of weighted arc families.
//!
//! Boundary `i` of the outer family and boundary 0 of the inner family are
//! identified as measured circles. Bands are cut so that their footprints
//! match cell for cell, the leaves are traced through the glued circle, and
//! the complementary regions of the result are recovered from an Euler
//! characteristic count over the pieces that meet.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::arc::{
    assemble, classify_disk, corner_between, rebuild, Arc, DiskKind, EndpointRef,
    ProjectiveArcFamily, Region, RegionSpec, Side, SurfaceSig, UnionFind, WeightedArcFamily,
};
use crate::error::{Error, Result};
use crate::rational::{format_q, lcm_denominators, rem_euclid, Q};

/// A measured circle cut into labeled cells, starting at the window start.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CirclePartition {
    pub circumference: Q,
    pub cells: Vec<(usize, Q)>,
}

impl CirclePartition {
    pub fn new(cells: Vec<(usize, Q)>) -> Self {
        let circumference = cells.iter().fold(Q::zero(), |a, (_, w)| a + w);
        CirclePartition { circumference, cells }
    }

    /// Start position of every cell.
    pub fn starts(&self) -> Vec<Q> {
        let mut pos = Q::zero();
        let mut out = Vec::with_capacity(self.cells.len());
        for (_, w) in &self.cells {
            out.push(pos.clone());
            pos += w;
        }
        out
    }

    fn cell_at(&self, x: &Q) -> usize {
        let starts = self.starts();
        match starts.binary_search(x) {
            Ok(k) => k,
            Err(k) => k - 1,
        }
    }
}

/// Common refinement of `p` and `q` rotated by `offset`: position `x` of `p`
/// meets position `x - offset` of `q`. Sub-cells are listed from `p`'s start.
pub fn band_refinement(
    p: &CirclePartition,
    q: &CirclePartition,
    offset: &Q,
) -> Result<Vec<(usize, usize, Q)>> {
    if p.circumference != q.circumference {
        return Err(Error::CircumferenceMismatch(
            format_q(&p.circumference),
            format_q(&q.circumference),
        ));
    }
    let m = &p.circumference;
    if offset.is_negative() || offset >= m {
        return Err(Error::OffsetOutOfRange(format_q(offset)));
    }
    let mut cuts: BTreeSet<Q> = p.starts().into_iter().collect();
    for s in q.starts() {
        cuts.insert(rem_euclid(&(s + offset), m));
    }
    let cuts: Vec<Q> = cuts.into_iter().collect();
    let mut out = Vec::with_capacity(cuts.len());
    for (k, x) in cuts.iter().enumerate() {
        let next = cuts.get(k + 1).unwrap_or(m);
        let y = rem_euclid(&(x - offset), m);
        out.push((p.cells[p.cell_at(x)].0, q.cells[q.cell_at(&y)].0, next - x));
    }
    Ok(out)
}

/// Which input a band came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Factor {
    Outer,
    Inner,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BandId {
    pub factor: Factor,
    pub arc: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BandKind {
    Arc { from: EndpointRef, to: EndpointRef },
    Closed,
}

/// A maximal family of leaves crossing the same input bands in order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TracedBand {
    pub kind: BandKind,
    pub itinerary: Vec<BandId>,
    pub width: Q,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GlueReport {
    pub closed_bands: usize,
    pub closed_width: Q,
    pub merged_arcs: usize,
    pub bands: Vec<TracedBand>,
}

/// A family whose bands have been cut into parallel copies.
struct Split {
    fam: WeightedArcFamily,
    /// Original arc of each copy.
    origin: Vec<usize>,
    /// Original endpoint of each copy endpoint.
    source_end: HashMap<EndpointRef, EndpointRef>,
}

/// Cuts every arc `a` at the reference-coordinate points `cuts[a]`, measured
/// from the end `ends[0]`. Copies become new arcs; the strips between
/// neighbouring copies become unpunctured disks.
fn split(f: &WeightedArcFamily, cuts: &[BTreeSet<Q>]) -> Result<Split> {
    let arcs = &f.comb.arcs;
    let mut pieces: Vec<Vec<Q>> = Vec::with_capacity(arcs.len());
    for (a, w) in f.weights.iter().enumerate() {
        let mut prev = Q::zero();
        let mut widths = Vec::new();
        for u in cuts[a].iter().filter(|u| u.is_positive() && *u < w) {
            widths.push(u - &prev);
            prev = u.clone();
        }
        widths.push(w - prev);
        pieces.push(widths);
    }
    let mut base = Vec::with_capacity(arcs.len());
    let mut total = 0;
    for p in &pieces {
        base.push(total);
        total += p.len();
    }
    let nreg = f.comb.regions.len();
    let thin = |a: usize, k: usize| nreg + base[a] + k;
    let index = f.endpoint_map();
    let seg_region = f.segment_regions();
    let n = f.comb.counts.len();
    let mut counts = vec![0usize; n];
    let mut ends: Vec<[Option<EndpointRef>; 2]> = vec![[None, None]; total];
    let mut gap_label: HashMap<(usize, usize), usize> = HashMap::new();
    let mut source_end = HashMap::new();
    for b in 0..n {
        let c = f.comb.counts[b];
        if c == 0 {
            gap_label.insert((b, 0), seg_region[&(b, 0)]);
            continue;
        }
        let mut slot = 0;
        let mut after: Vec<usize> = Vec::new();
        for s in 1..=c {
            let (a, end) = index[&EndpointRef::new(b, s)];
            let kn = pieces[a].len();
            let order: Vec<usize> = if end == 0 || !arcs[a].flips() {
                (0..kn).collect()
            } else {
                (0..kn).rev().collect()
            };
            for (t, &k) in order.iter().enumerate() {
                slot += 1;
                ends[base[a] + k][end] = Some(EndpointRef::new(b, slot));
                source_end.insert(EndpointRef::new(b, slot), EndpointRef::new(b, s));
                if t + 1 < kn {
                    after.push(thin(a, k.min(order[t + 1])));
                } else {
                    after.push(seg_region[&(b, s % c)]);
                }
            }
        }
        counts[b] = slot;
        for g in 0..slot {
            let label = if g == 0 { after[slot - 1] } else { after[g - 1] };
            gap_label.insert((b, g), label);
        }
    }
    let mut new_arcs = Vec::with_capacity(total);
    let mut weights = Vec::with_capacity(total);
    let mut origin = Vec::with_capacity(total);
    for (a, p) in pieces.iter().enumerate() {
        for (k, w) in p.iter().enumerate() {
            let [x, y] = ends[base[a] + k];
            let (x, y) = (x.expect("copy end placed"), y.expect("copy end placed"));
            // copies keep the orientation of their source arc
            new_arcs.push(Arc { ends: [x, y] });
            weights.push(w.clone());
            origin.push(a);
        }
    }
    let mut specs: Vec<RegionSpec> = f
        .comb
        .regions
        .iter()
        .map(|r| RegionSpec::Fixed { genus: r.genus, punctures: r.punctures })
        .collect();
    specs.extend(std::iter::repeat_n(RegionSpec::Fixed { genus: 0, punctures: 0 }, total));
    let fam = assemble(f.comb.sig, counts, new_arcs, weights, &specs, |b, g| gap_label[&(b, g)])?;
    Ok(Split { fam, origin, source_end })
}

/// Slot-order position of every endpoint on `boundary` as `(start, width)`.
fn positions(f: &WeightedArcFamily, boundary: usize) -> Vec<(EndpointRef, Q, Q)> {
    let mut pos = Q::zero();
    let mut out = Vec::new();
    for (e, w) in f.end_interval(boundary) {
        out.push((e, pos.clone(), w.clone()));
        pos += w;
    }
    out
}

/// Reference-coordinate cut of arc `arc` for a circle point `x` inside the
/// footprint `[start, start + w)` at end `end`.
fn reference_cut(arc: &Arc, end: usize, start: &Q, w: &Q, x: &Q) -> Q {
    let v = x - start;
    if end == 1 && arc.flips() {
        w - v
    } else {
        v
    }
}

fn output_boundary(factor: Factor, b: usize, i: usize, inner_inputs: usize) -> usize {
    match factor {
        Factor::Outer if b < i => b,
        Factor::Outer => b + inner_inputs - 1,
        Factor::Inner => i + b - 1,
    }
}

fn check_inputs(
    alpha: &WeightedArcFamily,
    i: usize,
    beta: &WeightedArcFamily,
) -> Result<()> {
    alpha.ensure_valid()?;
    beta.ensure_valid()?;
    let m = alpha.comb.counts.len();
    if i == 0 || i >= m {
        return Err(Error::BoundaryOutOfRange { index: i, count: m });
    }
    if !alpha.comb.met(i) {
        return Err(Error::NotExhaustive(i));
    }
    if !beta.comb.met(0) {
        return Err(Error::EmptyOutputBoundary);
    }
    Ok(())
}

/// Glues boundary `i` of `alpha` to boundary 0 of `beta`; position `x` on
/// boundary `i` meets position `x - offset` on boundary 0.
pub fn glue_matched(
    alpha: &WeightedArcFamily,
    i: usize,
    beta: &WeightedArcFamily,
    offset: &Q,
) -> Result<WeightedArcFamily> {
    Ok(glue_with_report(alpha, i, beta, offset)?.0)
}

pub fn glue_with_report(
    alpha: &WeightedArcFamily,
    i: usize,
    beta: &WeightedArcFamily,
    offset: &Q,
) -> Result<(WeightedArcFamily, GlueReport)> {
    check_inputs(alpha, i, beta)?;
    let alpha = alpha.canonical();
    let beta = beta.canonical();
    let m = alpha.total_weight(i)?;
    let m0 = beta.total_weight(0)?;
    if m != m0 {
        return Err(Error::TotalsMismatch { left: format_q(&m), right: format_q(&m0) });
    }
    if offset.is_negative() || *offset >= m {
        return Err(Error::OffsetOutOfRange(format_q(offset)));
    }
    let pa = positions(&alpha, i);
    let pb = positions(&beta, 0);
    let mut marks: BTreeSet<Q> = pa.iter().map(|(_, s, _)| s.clone()).collect();
    for (_, s, _) in &pb {
        marks.insert(rem_euclid(&(s + offset), &m));
    }
    // close the cut set under the leaf maps of bands returning to the glued circle
    let mut reflections: Vec<(Q, Q, Q, bool)> = Vec::new();
    let emap_a = alpha.endpoint_map();
    let emap_b = beta.endpoint_map();
    let self_bands = |pos: &[(EndpointRef, Q, Q)],
                      emap: &HashMap<EndpointRef, (usize, usize)>,
                      fam: &WeightedArcFamily,
                      b: usize| {
        let mut out = Vec::new();
        for a in 0..fam.comb.arcs.len() {
            let arc = fam.comb.arcs[a];
            if arc.ends[0].boundary == b && arc.ends[1].boundary == b {
                let p: Vec<&Q> = pos
                    .iter()
                    .filter(|(e, _, _)| emap[e].0 == a)
                    .map(|(_, s, _)| s)
                    .collect();
                out.push((p[0].clone(), p[1].clone(), fam.weights[a].clone()));
            }
        }
        out
    };
    for (p1, p2, w) in self_bands(&pa, &emap_a, &alpha, i) {
        reflections.push((p1, p2, w, false));
    }
    for (p1, p2, w) in self_bands(&pb, &emap_b, &beta, 0) {
        reflections.push((p1, p2, w, true));
    }
    let mut work: Vec<Q> = marks.iter().cloned().collect();
    while let Some(x) = work.pop() {
        for (p1, p2, w, inner) in &reflections {
            let y = if *inner { rem_euclid(&(&x - offset), &m) } else { x.clone() };
            let inside = |p: &Q| *p < y && y < p + w;
            if !(inside(p1) || inside(p2)) {
                continue;
            }
            let r = p1 + p2 + w - &y;
            let r = if *inner { rem_euclid(&(r + offset), &m) } else { r };
            if marks.insert(r.clone()) {
                work.push(r);
            }
        }
    }
    let mut cuts_a = vec![BTreeSet::new(); alpha.comb.arcs.len()];
    for (e, s, w) in &pa {
        let (a, end) = emap_a[e];
        for x in marks.range(s.clone()..(s + w)) {
            cuts_a[a].insert(reference_cut(&alpha.comb.arcs[a], end, s, w, x));
        }
    }
    let mut cuts_b = vec![BTreeSet::new(); beta.comb.arcs.len()];
    for (e, s, w) in &pb {
        let (a, end) = emap_b[e];
        for x in &marks {
            let y = rem_euclid(&(x - offset), &m);
            if *s < y && y < s + w {
                cuts_b[a].insert(reference_cut(&beta.comb.arcs[a], end, s, w, &y));
            }
        }
    }
    let sa = split(&alpha, &cuts_a)?;
    let sb = split(&beta, &cuts_b)?;
    let starts: Vec<Q> = positions(&sa.fam, i).into_iter().map(|(_, s, _)| s).collect();
    let rot = starts
        .binary_search(offset)
        .map_err(|_| Error::Internal("offset is not a cut point".into()))?;
    glue_aligned(&sa, i, &sb, rot)
}

/// Glues two split families whose cells at the glued circle correspond one
/// to one: outer slot `j` meets inner slot `j - rot` (cyclically).
fn glue_aligned(
    sa: &Split,
    i: usize,
    sb: &Split,
    rot: usize,
) -> Result<(WeightedArcFamily, GlueReport)> {
    let fa = &sa.fam;
    let fb = &sb.fam;
    let big_m = fa.comb.counts[i];
    if fb.comb.counts[0] != big_m {
        return Err(Error::Internal("cell counts differ after cutting".into()));
    }
    let wa: Vec<Q> = fa.end_interval(i).into_iter().map(|(_, w)| w).collect();
    let wb: Vec<Q> = fb.end_interval(0).into_iter().map(|(_, w)| w).collect();
    for j in 0..big_m {
        if wa[j] != wb[(j + big_m - rot) % big_m] {
            return Err(Error::Internal("cell widths differ after cutting".into()));
        }
    }
    let to_inner = |j: usize| (j - 1 + big_m - rot) % big_m + 1;
    let to_outer = |j: usize| (j - 1 + rot) % big_m + 1;
    let sys = [fa, fb];
    let glued = |f: Factor, e: EndpointRef| match f {
        Factor::Outer => e.boundary == i,
        Factor::Inner => e.boundary == 0,
    };
    let partner = |f: Factor, e: EndpointRef| match f {
        Factor::Outer => (Factor::Inner, EndpointRef::new(0, to_inner(e.slot))),
        Factor::Inner => (Factor::Outer, EndpointRef::new(i, to_outer(e.slot))),
    };
    let fidx = |f: Factor| match f {
        Factor::Outer => 0,
        Factor::Inner => 1,
    };
    let emaps = [fa.endpoint_map(), fb.endpoint_map()];
    let origins = [&sa.origin, &sb.origin];
    let sources = [&sa.source_end, &sb.source_end];
    let inner_inputs = fb.comb.counts.len() - 1;
    let out_end = |f: Factor, e: EndpointRef| {
        EndpointRef::new(output_boundary(f, e.boundary, i, inner_inputs), e.slot)
    };
    let mut visited = [vec![false; fa.comb.arcs.len()], vec![false; fb.comb.arcs.len()]];
    let mut out_arcs = Vec::new();
    let mut out_weights = Vec::new();
    let mut bands: BTreeMap<(BandKind, Vec<BandId>), Q> = BTreeMap::new();
    let mut closed: Vec<Vec<(Factor, usize)>> = Vec::new();
    // open strands, started from each surviving endpoint
    for f in [Factor::Outer, Factor::Inner] {
        for a in 0..sys[fidx(f)].comb.arcs.len() {
            for end in 0..2 {
                let start = sys[fidx(f)].comb.arcs[a].ends[end];
                if visited[fidx(f)][a] || glued(f, start) {
                    continue;
                }
                let (mut cf, mut ca, mut cend) = (f, a, end);
                let width = sys[fidx(f)].weights[a].clone();
                let mut path = Vec::new();
                let stop = loop {
                    visited[fidx(cf)][ca] = true;
                    path.push(BandId { factor: cf, arc: origins[fidx(cf)][ca] });
                    if sys[fidx(cf)].weights[ca] != width {
                        return Err(Error::Internal("strand width changes".into()));
                    }
                    let far = sys[fidx(cf)].comb.arcs[ca].ends[1 - cend];
                    if !glued(cf, far) {
                        break (cf, far);
                    }
                    let (nf, ne) = partner(cf, far);
                    let (na, nend) = emaps[fidx(nf)][&ne];
                    cf = nf;
                    ca = na;
                    cend = nend;
                };
                out_arcs.push(Arc::new(out_end(f, start), out_end(stop.0, stop.1)));
                out_weights.push(width.clone());
                let from = out_end(f, sources[fidx(f)][&start]);
                let to = out_end(stop.0, sources[fidx(stop.0)][&stop.1]);
                let mut rev = path.clone();
                rev.reverse();
                let key = if (from, &path) <= (to, &rev) {
                    (BandKind::Arc { from, to }, path)
                } else {
                    (BandKind::Arc { from: to, to: from }, rev)
                };
                *bands.entry(key).or_insert_with(Q::zero) += width;
            }
        }
    }
    let mut closed_width = Q::zero();
    for a in 0..fa.comb.arcs.len() {
        if visited[0][a] {
            continue;
        }
        let width = fa.weights[a].clone();
        let mut cycle = Vec::new();
        let (mut cf, mut ca, mut cend) = (Factor::Outer, a, 0usize);
        loop {
            if visited[fidx(cf)][ca] {
                break;
            }
            visited[fidx(cf)][ca] = true;
            cycle.push((cf, ca));
            let far = sys[fidx(cf)].comb.arcs[ca].ends[1 - cend];
            let (nf, ne) = partner(cf, far);
            let (na, nend) = emaps[fidx(nf)][&ne];
            cf = nf;
            ca = na;
            cend = nend;
        }
        let ids: Vec<BandId> =
            cycle.iter().map(|&(f, a)| BandId { factor: f, arc: origins[fidx(f)][a] }).collect();
        *bands.entry((BandKind::Closed, canonical_cycle(&ids))).or_insert_with(Q::zero) +=
            width.clone();
        closed_width += width;
        closed.push(cycle);
    }
    if visited[1].iter().any(|v| !v) {
        return Err(Error::Internal("inner band left untraced".into()));
    }

    // pieces: outer regions, then inner regions
    let ra = fa.comb.regions.len();
    let piece = |f: Factor, r: usize| match f {
        Factor::Outer => r,
        Factor::Inner => ra + r,
    };
    let all_regions: Vec<(Factor, &Region)> = fa
        .comb
        .regions
        .iter()
        .map(|r| (Factor::Outer, r))
        .chain(fb.comb.regions.iter().map(|r| (Factor::Inner, r)))
        .collect();
    let seg = [fa.segment_regions(), fb.segment_regions()];
    let sides = [fa.side_regions(), fb.side_regions()];
    let mut uf = UnionFind::new(all_regions.len());
    for g in 0..big_m {
        let h = (g + big_m - rot) % big_m;
        uf.union(
            piece(Factor::Outer, seg[0][&(i, g)]),
            piece(Factor::Inner, seg[1][&(0, h)]),
        );
    }
    for cycle in &closed {
        for &(f, a) in cycle {
            let l = sides[fidx(f)][&Side::Arc { arc: a, hand: crate::arc::Hand::Left }];
            let r = sides[fidx(f)][&Side::Arc { arc: a, hand: crate::arc::Hand::Right }];
            uf.union(piece(f, l), piece(f, r));
        }
    }
    // corners, identified across the glued circle
    let mut corner_ids: HashMap<(Factor, EndpointRef, bool), usize> = HashMap::new();
    let mut corner_piece: Vec<usize> = Vec::new();
    let mut chi: HashMap<usize, i64> = HashMap::new();
    let mut punct: HashMap<usize, u32> = HashMap::new();
    let mut edges: HashMap<usize, i64> = HashMap::new();
    let mut virtual_vertices: HashMap<usize, i64> = HashMap::new();
    for (p, (f, r)) in all_regions.iter().enumerate() {
        let root = uf.find(p);
        *chi.entry(root).or_default() += r.euler_characteristic();
        *punct.entry(root).or_default() += r.punctures;
        let arcs = &sys[fidx(*f)].comb.arcs;
        for c in &r.cycles {
            *edges.entry(root).or_default() += c.len() as i64;
            if c.len() == 1 {
                *virtual_vertices.entry(root).or_default() += 1;
                continue;
            }
            for t in 0..c.len() {
                let (from, to) = (c[t], c[(t + 1) % c.len()]);
                let (e, before) = corner_between(arcs, from, to)
                    .ok_or_else(|| Error::Internal("cycle does not alternate".into()))?;
                let n = corner_ids.len();
                corner_ids.entry((*f, e, before)).or_insert_with(|| {
                    corner_piece.push(root);
                    n
                });
            }
        }
    }
    for g in 0..big_m {
        let root = uf.find(piece(Factor::Outer, seg[0][&(i, g)]));
        *edges.entry(root).or_default() -= 1;
    }
    let mut cuf = UnionFind::new(corner_ids.len());
    let closed_set: BTreeSet<(Factor, usize)> = closed.iter().flatten().copied().collect();
    for (p, (_, _)) in all_regions.iter().enumerate() {
        let _ = p;
    }
    for j in 1..=big_m {
        let e = EndpointRef::new(i, j);
        let (_, pe) = partner(Factor::Outer, e);
        for before in [true, false] {
            let x = corner_ids[&(Factor::Outer, e, before)];
            let y = corner_ids[&(Factor::Inner, pe, before)];
            cuf.union(x, y);
        }
        let (a, _) = emaps[0][&e];
        if closed_set.contains(&(Factor::Outer, a)) {
            let x = corner_ids[&(Factor::Outer, e, true)];
            let y = corner_ids[&(Factor::Outer, e, false)];
            cuf.union(x, y);
        }
    }
    for (f, a) in &closed_set {
        let r = uf.find(piece(*f, sides[fidx(*f)][&Side::Arc { arc: *a, hand: crate::arc::Hand::Left }]));
        *edges.entry(r).or_default() -= 1;
    }
    let mut vertices: HashMap<usize, i64> = HashMap::new();
    let mut seen_roots = BTreeSet::new();
    for c in 0..corner_piece.len() {
        let root = cuf.find(c);
        if seen_roots.insert(root) {
            *vertices.entry(corner_piece[root]).or_default() += 1;
        }
    }
    let mut region_ids: BTreeMap<usize, usize> = BTreeMap::new();
    let mut specs = Vec::new();
    for p in 0..all_regions.len() {
        let root = uf.find(p);
        if region_ids.contains_key(&root) {
            continue;
        }
        region_ids.insert(root, specs.len());
        let x = chi[&root] - edges.get(&root).copied().unwrap_or(0)
            + vertices.get(&root).copied().unwrap_or(0)
            + virtual_vertices.get(&root).copied().unwrap_or(0);
        specs.push(RegionSpec::Euler { chi: x, punctures: punct[&root] });
    }

    let (sig_a, sig_b) = (fa.comb.sig, fb.comb.sig);
    let sig = SurfaceSig::new(
        sig_a.genus + sig_b.genus,
        sig_a.punctures + sig_b.punctures,
        sig_a.boundaries + sig_b.boundaries - 2,
    );
    let mut counts = vec![0usize; sig.boundaries];
    let mut seg_source: HashMap<usize, (Factor, usize)> = HashMap::new();
    for (b, &c) in fa.comb.counts.iter().enumerate() {
        if b != i {
            let o = output_boundary(Factor::Outer, b, i, inner_inputs);
            counts[o] = c;
            seg_source.insert(o, (Factor::Outer, b));
        }
    }
    for (b, &c) in fb.comb.counts.iter().enumerate().skip(1) {
        let o = output_boundary(Factor::Inner, b, i, inner_inputs);
        counts[o] = c;
        seg_source.insert(o, (Factor::Inner, b));
    }
    let mut uf_final = uf;
    let glued_fam = rebuild(sig, counts, out_arcs, out_weights, &specs, |ob, g| {
        let (f, b) = seg_source[&ob];
        let p = piece(f, seg[fidx(f)][&(b, g)]);
        region_ids[&uf_final.find(p)]
    })?;
    let (merged_fam, merged) = merge_parallel(&glued_fam)?;
    check_essential(&merged_fam)?;
    let report = GlueReport {
        closed_bands: closed.len(),
        closed_width,
        merged_arcs: merged,
        bands: bands
            .into_iter()
            .map(|((kind, itinerary), width)| TracedBand { kind, itinerary, width })
            .collect(),
    };
    Ok((merged_fam, report))
}

/// Least rotation of a cyclic itinerary read in either direction.
fn canonical_cycle(ids: &[BandId]) -> Vec<BandId> {
    let mut best: Option<Vec<BandId>> = None;
    let mut rev = ids.to_vec();
    rev.reverse();
    for seq in [ids.to_vec(), rev] {
        for r in 0..seq.len() {
            let mut c = seq.clone();
            c.rotate_left(r);
            if best.as_ref().is_none_or(|b| c < *b) {
                best = Some(c);
            }
        }
    }
    best.unwrap_or_default()
}

/// Merges every class of mutually parallel arcs into one arc carrying the
/// summed weight. Returns the merged family and the number of arcs removed.
pub fn merge_parallel(f: &WeightedArcFamily) -> Result<(WeightedArcFamily, usize)> {
    let mut cur = f.canonical();
    let mut removed = 0;
    loop {
        let k = cur.comb.arcs.len();
        let mut uf = UnionFind::new(k);
        let mut collapsed = BTreeSet::new();
        for (r, region) in cur.comb.regions.iter().enumerate() {
            if let Some(DiskKind::Bigon(a, b)) = classify_disk(region) {
                uf.union(a, b);
                collapsed.insert(r);
            }
        }
        if collapsed.is_empty() {
            return Ok((cur, removed));
        }
        let mut weights: Vec<Q> = vec![Q::zero(); k];
        for a in 0..k {
            let r = uf.find(a);
            weights[r] += &cur.weights[a];
        }
        let kept: Vec<bool> = (0..k).map(|a| uf.find(a) == a).collect();
        removed += kept.iter().filter(|x| !**x).count();
        let emap = cur.endpoint_map();
        let seg = cur.segment_regions();
        let n = cur.comb.counts.len();
        let mut counts = vec![0; n];
        let mut new_slot: HashMap<EndpointRef, EndpointRef> = HashMap::new();
        let mut gap_region: HashMap<(usize, usize), usize> = HashMap::new();
        for b in 0..n {
            let c = cur.comb.counts[b];
            let surviving: Vec<usize> =
                (1..=c).filter(|&s| kept[emap[&EndpointRef::new(b, s)].0]).collect();
            for (t, &s) in surviving.iter().enumerate() {
                new_slot.insert(EndpointRef::new(b, s), EndpointRef::new(b, t + 1));
            }
            counts[b] = surviving.len();
            if surviving.is_empty() {
                gap_region.insert((b, 0), seg[&(b, 0)]);
                continue;
            }
            let kk = surviving.len();
            for t in 0..kk {
                // old gaps following surviving slot t, up to the next surviving slot
                let first = surviving[t];
                let last = if t + 1 < kk { surviving[t + 1] } else { c + surviving[0] };
                let mut pick: Option<usize> = None;
                for j in first..last {
                    let r = seg[&(b, j % c)];
                    if collapsed.contains(&r) {
                        continue;
                    }
                    match pick {
                        None => pick = Some(r),
                        Some(p) if p != r => {
                            return Err(Error::Internal("merged gap spans two regions".into()))
                        }
                        _ => {}
                    }
                }
                let r = pick.ok_or_else(|| Error::Internal("merged gap has no region".into()))?;
                let new_gap = if t + 1 < kk { t + 1 } else { 0 };
                gap_region.insert((b, new_gap), r);
            }
        }
        let mut arcs = Vec::new();
        let mut ws = Vec::new();
        for a in 0..k {
            if kept[a] {
                let arc = cur.comb.arcs[a];
                arcs.push(Arc::new(new_slot[&arc.ends[0]], new_slot[&arc.ends[1]]));
                ws.push(weights[a].clone());
            }
        }
        let specs: Vec<RegionSpec> = cur
            .comb
            .regions
            .iter()
            .map(|r| RegionSpec::Fixed { genus: r.genus, punctures: r.punctures })
            .collect();
        cur = rebuild(cur.comb.sig, counts, arcs, ws, &specs, |b, g| gap_region[&(b, g)])?;
    }
}

fn check_essential(f: &WeightedArcFamily) -> Result<()> {
    for region in &f.comb.regions {
        if let Some(DiskKind::Monogon(a)) = classify_disk(region) {
            return Err(Error::InessentialOutput { arc: a, boundary: f.comb.arcs[a].ends[0].boundary });
        }
    }
    Ok(())
}

fn require_exhaustive(f: &WeightedArcFamily) -> Result<()> {
    match f.comb.counts.iter().position(|&c| c == 0) {
        Some(b) => Err(Error::NotExhaustive(b)),
        None => Ok(()),
    }
}

/// Rescales `alpha` by the inner total at 0 and `beta` by the outer total at
/// `i` so the glued circles agree, then glues.
pub fn compose_weighted(
    alpha: &WeightedArcFamily,
    i: usize,
    beta: &WeightedArcFamily,
) -> Result<WeightedArcFamily> {
    Ok(compose_weighted_with_report(alpha, i, beta, &Q::zero())?.0)
}

/// Composition with a twist: `offset` is a fraction in `[0, 1)` of the
/// common glued circumference.
pub fn compose_weighted_with_report(
    alpha: &WeightedArcFamily,
    i: usize,
    beta: &WeightedArcFamily,
    offset_fraction: &Q,
) -> Result<(WeightedArcFamily, GlueReport)> {
    require_exhaustive(alpha)?;
    require_exhaustive(beta)?;
    rescaled_glue(alpha, i, beta, offset_fraction)
}

fn rescaled_glue(
    alpha: &WeightedArcFamily,
    i: usize,
    beta: &WeightedArcFamily,
    offset_fraction: &Q,
) -> Result<(WeightedArcFamily, GlueReport)> {
    if i == 0 || i >= alpha.comb.counts.len() {
        return Err(Error::BoundaryOutOfRange { index: i, count: alpha.comb.counts.len() });
    }
    let rho0 = beta.total_weight(0)?;
    let rhoi = alpha.total_weight(i)?;
    if rho0.is_zero() {
        return Err(Error::EmptyOutputBoundary);
    }
    if rhoi.is_zero() {
        return Err(Error::NotExhaustive(i));
    }
    let a = alpha.scaled(&rho0);
    let b = beta.scaled(&rhoi);
    let circumference = &rho0 * &rhoi;
    glue_with_report(&a, i, &b, &(offset_fraction * circumference))
}

pub fn compose_projective(
    alpha: &ProjectiveArcFamily,
    i: usize,
    beta: &ProjectiveArcFamily,
) -> Result<ProjectiveArcFamily> {
    compose_projective_twisted(alpha, i, beta, &Q::zero())
}

/// Projective composition whose glued circles are rotated against each other
/// by `offset_fraction` of a full turn.
pub fn compose_projective_twisted(
    alpha: &ProjectiveArcFamily,
    i: usize,
    beta: &ProjectiveArcFamily,
    offset_fraction: &Q,
) -> Result<ProjectiveArcFamily> {
    let (f, _) =
        compose_weighted_with_report(alpha.weighted(), i, beta.weighted(), offset_fraction)?;
    Ok(f.projective())
}

/// Composition that tolerates an outer family missing boundary `i`: the
/// inner surface is then attached without arcs.
pub fn relaxed_compose(
    alpha: &ProjectiveArcFamily,
    i: usize,
    beta: &ProjectiveArcFamily,
) -> Result<ProjectiveArcFamily> {
    let a = alpha.weighted();
    let b = beta.weighted();
    if !b.comb.met(0) {
        return Err(Error::EmptyOutputBoundary);
    }
    if i == 0 || i >= a.comb.counts.len() {
        return Err(Error::BoundaryOutOfRange { index: i, count: a.comb.counts.len() });
    }
    if a.comb.met(i) {
        return Ok(rescaled_glue(a, i, b, &Q::zero())?.0.projective());
    }
    let inner_inputs = b.comb.counts.len() - 1;
    let sig_b = b.comb.sig;
    let sig = SurfaceSig::new(
        a.comb.sig.genus + sig_b.genus,
        a.comb.sig.punctures + sig_b.punctures,
        a.comb.sig.boundaries + sig_b.boundaries - 2,
    );
    let relabel = |e: EndpointRef| {
        EndpointRef::new(output_boundary(Factor::Outer, e.boundary, i, inner_inputs), e.slot)
    };
    let arcs: Vec<Arc> =
        a.comb.arcs.iter().map(|x| Arc::new(relabel(x.ends[0]), relabel(x.ends[1]))).collect();
    let mut counts = vec![0usize; sig.boundaries];
    for (bd, &c) in a.comb.counts.iter().enumerate() {
        if bd != i {
            counts[output_boundary(Factor::Outer, bd, i, inner_inputs)] = c;
        }
    }
    let seg = a.segment_regions();
    let host = seg[&(i, 0)];
    let specs: Vec<RegionSpec> = a
        .comb
        .regions
        .iter()
        .enumerate()
        .map(|(r, reg)| {
            if r == host {
                RegionSpec::Fixed {
                    genus: reg.genus + sig_b.genus,
                    punctures: reg.punctures + sig_b.punctures,
                }
            } else {
                RegionSpec::Fixed { genus: reg.genus, punctures: reg.punctures }
            }
        })
        .collect();
    let mut source: HashMap<usize, usize> = HashMap::new();
    for bd in 0..a.comb.counts.len() {
        if bd != i {
            source.insert(output_boundary(Factor::Outer, bd, i, inner_inputs), bd);
        }
    }
    let f = rebuild(sig, counts, arcs, a.weights.clone(), &specs, |ob, g| match source.get(&ob) {
        Some(&bd) => seg[&(bd, g)],
        None => host,
    })?;
    Ok(f.projective())
}

/// Independent gluing: every band of both families is cut into strips of
/// width `1/D`, where `D` clears all denominators, and the strips are glued
/// and merged back.
pub fn oracle_glue(
    alpha: &WeightedArcFamily,
    i: usize,
    beta: &WeightedArcFamily,
    offset: &Q,
) -> Result<WeightedArcFamily> {
    check_inputs(alpha, i, beta)?;
    let alpha = alpha.canonical();
    let beta = beta.canonical();
    let m = alpha.total_weight(i)?;
    if m != beta.total_weight(0)? {
        return Err(Error::TotalsMismatch {
            left: format_q(&m),
            right: format_q(&beta.total_weight(0)?),
        });
    }
    if offset.is_negative() || *offset >= m {
        return Err(Error::OffsetOutOfRange(format_q(offset)));
    }
    let d = grid(&alpha, &beta, offset);
    let step = Q::new(BigInt::one(), d);
    let strips = |f: &WeightedArcFamily| -> Vec<BTreeSet<Q>> {
        f.weights
            .iter()
            .map(|w| {
                let mut cuts = BTreeSet::new();
                let mut u = step.clone();
                while u < *w {
                    cuts.insert(u.clone());
                    u += &step;
                }
                cuts
            })
            .collect()
    };
    let sa = split(&alpha, &strips(&alpha))?;
    let sb = split(&beta, &strips(&beta))?;
    let rot = (offset / &step).to_integer();
    let rot: usize = rot.try_into().map_err(|_| Error::Internal("offset too large".into()))?;
    Ok(glue_aligned(&sa, i, &sb, rot)?.0)
}

fn grid(alpha: &WeightedArcFamily, beta: &WeightedArcFamily, offset: &Q) -> BigInt {
    lcm_denominators(alpha.weights.iter().chain(beta.weights.iter()).chain(std::iter::once(offset)))
}

/// Traces strips of width `1/D` one at a time as a permutation walk and
/// groups them by itinerary. Independent of the band cutting in
/// [`glue_with_report`].
pub fn strip_walk(
    alpha: &WeightedArcFamily,
    i: usize,
    beta: &WeightedArcFamily,
    offset: &Q,
) -> Result<Vec<TracedBand>> {
    check_inputs(alpha, i, beta)?;
    let alpha = alpha.canonical();
    let beta = beta.canonical();
    let m = alpha.total_weight(i)?;
    let d = grid(&alpha, &beta, offset);
    let to_units = |x: &Q| -> i64 {
        let v = (x * Q::from_integer(d.clone())).to_integer();
        i64::try_from(v).expect("strip count fits in i64")
    };
    let total = to_units(&m);
    let off = to_units(offset);
    let fams = [&alpha, &beta];
    let glued_b = [i, 0];
    // strip at unit position p of the glued boundary -> (arc, end, strip index)
    let mut at: [HashMap<i64, (usize, usize, i64)>; 2] = [HashMap::new(), HashMap::new()];
    for s in 0..2 {
        let f = fams[s];
        let emap = f.endpoint_map();
        for (e, start, w) in positions(f, glued_b[s]) {
            let (a, end) = emap[&e];
            let (p0, wu) = (to_units(&start), to_units(&w));
            for v in 0..wu {
                let t = if end == 1 && f.comb.arcs[a].flips() { wu - 1 - v } else { v };
                at[s].insert(p0 + v, (a, end, t));
            }
        }
    }
    let pos_of = |s: usize, a: usize, end: usize, t: i64| -> Option<i64> {
        let f = fams[s];
        let e = f.comb.arcs[a].ends[end];
        if e.boundary != glued_b[s] {
            return None;
        }
        let wu = to_units(&f.weights[a]);
        let start = positions(f, glued_b[s])
            .into_iter()
            .find(|(x, _, _)| *x == e)
            .map(|(_, s, _)| to_units(&s))
            .expect("endpoint on glued boundary");
        let v = if end == 1 && f.comb.arcs[a].flips() { wu - 1 - t } else { t };
        Some(start + v)
    };
    let inner_inputs = beta.comb.counts.len() - 1;
    let factor = [Factor::Outer, Factor::Inner];
    let mut done: BTreeSet<(usize, usize, i64)> = BTreeSet::new();
    let mut bands: BTreeMap<(BandKind, Vec<BandId>), i64> = BTreeMap::new();
    let walk = |s0: usize, a0: usize, end0: usize, t0: i64, done: &mut BTreeSet<(usize, usize, i64)>| {
        let (mut s, mut a, mut end, t) = (s0, a0, end0, t0);
        let mut t = t;
        let mut path = Vec::new();
        loop {
            if !done.insert((s, a, t)) {
                return (path, None);
            }
            path.push(BandId { factor: factor[s], arc: a });
            let far = 1 - end;
            match pos_of(s, a, far, t) {
                None => {
                    let e = fams[s].comb.arcs[a].ends[far];
                    return (path, Some((s, e)));
                }
                Some(p) => {
                    let (ns, np) = if s == 0 {
                        (1, (p - off).rem_euclid(total))
                    } else {
                        (0, (p + off).rem_euclid(total))
                    };
                    let (na, nend, nt) = at[ns][&np];
                    s = ns;
                    a = na;
                    end = nend;
                    t = nt;
                }
            }
        }
    };
    let out_end = |s: usize, e: EndpointRef| {
        EndpointRef::new(output_boundary(factor[s], e.boundary, i, inner_inputs), e.slot)
    };
    for s in 0..2 {
        let f = fams[s];
        for (a, arc) in f.comb.arcs.iter().enumerate() {
            for end in 0..2 {
                if arc.ends[end].boundary == glued_b[s] {
                    continue;
                }
                let wu = to_units(&f.weights[a]);
                for t in 0..wu {
                    if done.contains(&(s, a, t)) {
                        continue;
                    }
                    let (path, stop) = walk(s, a, end, t, &mut done);
                    let (ls, le) = stop.expect("open strip ends on a surviving boundary");
                    let from = out_end(s, arc.ends[end]);
                    let to = out_end(ls, le);
                    let mut rev = path.clone();
                    rev.reverse();
                    let key = if (from, &path) <= (to, &rev) {
                        (BandKind::Arc { from, to }, path)
                    } else {
                        (BandKind::Arc { from: to, to: from }, rev)
                    };
                    *bands.entry(key).or_default() += 1;
                }
            }
        }
    }
    for (a, _) in alpha.comb.arcs.iter().enumerate() {
        let wu = to_units(&alpha.weights[a]);
        for t in 0..wu {
            if done.contains(&(0, a, t)) {
                continue;
            }
            let (path, stop) = walk(0, a, 0, t, &mut done);
            debug_assert!(stop.is_none());
            *bands.entry((BandKind::Closed, canonical_cycle(&path))).or_default() += 1;
        }
    }
    let step = Q::new(BigInt::one(), d);
    Ok(bands
        .into_iter()
        .map(|((kind, itinerary), n)| TracedBand { kind, itinerary, width: &step * Q::from_integer(n.into()) })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arc::{delta_point, dot, unit};
    use crate::rational::{q, qi};

    fn halves() -> (CirclePartition, CirclePartition) {
        (
            CirclePartition::new(vec![(0, q(1, 2)), (1, q(1, 2))]),
            CirclePartition::new(vec![(2, q(1, 2)), (3, q(1, 2))]),
        )
    }

    #[test]
    fn refinement_aligned_and_rotated() {
        let (p, qq) = halves();
        assert_eq!(
            band_refinement(&p, &qq, &qi(0)).unwrap(),
            vec![(0, 2, q(1, 2)), (1, 3, q(1, 2))]
        );
        assert_eq!(
            band_refinement(&p, &qq, &q(1, 4)).unwrap(),
            vec![(0, 3, q(1, 4)), (0, 2, q(1, 4)), (1, 2, q(1, 4)), (1, 3, q(1, 4))]
        );
        let one = CirclePartition::new(vec![(0, qi(1))]);
        let other = CirclePartition::new(vec![(5, qi(1))]);
        assert_eq!(band_refinement(&one, &other, &qi(0)).unwrap(), vec![(0, 5, qi(1))]);
        let big = CirclePartition::new(vec![(0, qi(2))]);
        assert!(matches!(band_refinement(&one, &big, &qi(0)), Err(Error::CircumferenceMismatch(..))));
        assert!(matches!(band_refinement(&p, &qq, &qi(1)), Err(Error::OffsetOutOfRange(_))));
    }

    #[test]
    fn unit_glue_is_identity() {
        let d = dot(qi(1), qi(2));
        for i in 1..=2 {
            let w = d.total_weight(i).unwrap();
            let out = glue_matched(&d, i, &unit(w), &qi(0)).unwrap();
            assert!(out.equals(&d), "{out:?}");
        }
        let out = glue_matched(&unit(qi(3)), 1, &d.scaled(&q(1, 1)), &qi(0)).unwrap();
        assert!(out.equals(&d));
    }

    #[test]
    fn crossed_pairs_compose_to_unit() {
        let h = delta_point(q(1, 2));
        let (out, report) = glue_with_report(&h, 1, &h, &qi(0)).unwrap();
        assert!(out.equals(&unit(qi(1))), "{out:?}");
        assert_eq!(report.merged_arcs, 1);
        assert_eq!(report.closed_bands, 0);
        assert_eq!(report.bands.len(), 2);
    }

    #[test]
    fn delta_composition_regression() {
        let out = compose_projective(&delta_point(q(1, 3)).projective(), 1, &delta_point(q(1, 2)).projective())
            .unwrap();
        let f = out.weighted();
        assert!(f.is_valid(), "{:?}", f.validate());
        let oracle = oracle_glue(&delta_point(q(1, 3)), 1, &delta_point(q(1, 2)), &qi(0)).unwrap();
        assert!(oracle.projective() == out);
        // shift by 1/3 then 1/2 on the cylinder: a crossed pair of weights 1/6, 5/6
        assert_eq!(*f, delta_point(q(5, 6)).canonical());
    }

    #[test]
    fn glue_checks_totals_and_offsets() {
        let d = delta_point(q(1, 3));
        assert!(matches!(glue_matched(&d, 1, &unit(qi(2)), &qi(0)), Err(Error::TotalsMismatch { .. })));
        assert!(matches!(glue_matched(&d, 1, &unit(qi(1)), &qi(1)), Err(Error::OffsetOutOfRange(_))));
        assert!(glue_matched(&d, 2, &unit(qi(1)), &qi(0)).is_err());
    }

    #[test]
    fn offset_glue_matches_oracle_and_strips() {
        let a = dot(q(1, 3), q(2, 3));
        let b = delta_point(q(1, 4)).scaled(&q(1, 3));
        for off in [qi(0), q(1, 12), q(1, 4)] {
            let (g, report) = glue_with_report(&a, 1, &b, &off).unwrap();
            let o = oracle_glue(&a, 1, &b, &off).unwrap();
            assert!(g.is_valid(), "{:?}", g.validate());
            assert_eq!(g, o);
            assert_eq!(report.bands, strip_walk(&a, 1, &b, &off).unwrap(), "offset {off}");
        }
    }

    #[test]
    fn relaxed_rules() {
        let d = dot(qi(1), qi(1)).projective();
        let u = unit(qi(1)).projective();
        assert_eq!(relaxed_compose(&d, 1, &u).unwrap(), compose_projective(&d, 1, &u).unwrap());
        let mut missing = unit(qi(1));
        missing.comb.counts = vec![0, 1];
        assert!(matches!(relaxed_compose(&d, 1, &missing.projective()), Err(Error::EmptyOutputBoundary)));
    }
}
