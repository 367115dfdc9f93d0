//! Seeded random generation of valid families and related test data.

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arc::{derive_regions, Arc, EndpointRef, Region, SurfaceSig, WeightedArcFamily};
use crate::error::{Error, Result};
use crate::rational::{q, Q};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Bounds {
    pub max_genus: u32,
    pub max_punctures: u32,
    pub min_boundaries: usize,
    pub max_boundaries: usize,
    pub max_arcs: usize,
    pub exhaustive: bool,
    /// Allow arcs that only enclose a window complement.
    pub window_loops: bool,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            max_genus: 0,
            max_punctures: 0,
            min_boundaries: 1,
            max_boundaries: 4,
            max_arcs: 6,
            exhaustive: true,
            window_loops: false,
        }
    }
}

impl Bounds {
    pub fn planar(max_boundaries: usize, max_arcs: usize) -> Self {
        Bounds { max_boundaries, max_arcs, ..Bounds::default() }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A positive reduced fraction with small numerator and denominator.
pub fn random_weight(rng: &mut impl Rng) -> Q {
    let den = rng.gen_range(1..=6);
    let num = rng.gen_range(1..=2 * den);
    q(num, den)
}

const RETRIES: usize = 20_000;

pub fn random_family(seed: u64, bounds: &Bounds) -> Result<WeightedArcFamily> {
    let mut r = rng(seed);
    random_family_with(&mut r, bounds)
}

pub fn random_family_with(rng: &mut impl Rng, bounds: &Bounds) -> Result<WeightedArcFamily> {
    if bounds.min_boundaries < 1 || bounds.min_boundaries > bounds.max_boundaries {
        return Err(Error::Unsatisfiable("boundary range is empty".into()));
    }
    if bounds.exhaustive && 2 * bounds.max_arcs < bounds.min_boundaries {
        return Err(Error::Unsatisfiable(format!(
            "{} arcs cannot meet {} boundaries",
            bounds.max_arcs, bounds.min_boundaries
        )));
    }
    for _ in 0..RETRIES {
        if let Some(f) = attempt(rng, bounds) {
            return Ok(f);
        }
    }
    Err(Error::Unsatisfiable(format!("no valid family found in {RETRIES} attempts")))
}

fn attempt(rng: &mut impl Rng, b: &Bounds) -> Option<WeightedArcFamily> {
    let boundaries = rng.gen_range(b.min_boundaries..=b.max_boundaries);
    let genus = rng.gen_range(0..=b.max_genus);
    let punctures = rng.gen_range(0..=b.max_punctures);
    let sig = SurfaceSig::new(genus, punctures, boundaries);
    if !sig.is_admissible() {
        return None;
    }
    let min_arcs = if b.exhaustive { boundaries.div_ceil(2) } else { 0 };
    if min_arcs > b.max_arcs {
        return None;
    }
    let k = rng.gen_range(min_arcs.max(1).min(b.max_arcs)..=b.max_arcs);
    let mut counts = vec![0usize; boundaries];
    if b.exhaustive {
        counts.iter_mut().for_each(|c| *c = 1);
        for _ in boundaries..2 * k {
            counts[rng.gen_range(0..boundaries)] += 1;
        }
    } else {
        for _ in 0..2 * k {
            counts[rng.gen_range(0..boundaries)] += 1;
        }
    }
    let mut ends: Vec<EndpointRef> = Vec::new();
    for (bd, &c) in counts.iter().enumerate() {
        for s in 1..=c {
            ends.push(EndpointRef::new(bd, s));
        }
    }
    ends.shuffle(rng);
    let arcs: Vec<Arc> = ends.chunks(2).map(|p| Arc::new(p[0], p[1])).collect();
    let cycles = derive_regions(&counts, &arcs).ok()?;
    let euler = sig.euler_characteristic() + k as i64;
    let c = cycles.len() as i64;
    // choose a region count R with total genus (2R - C - s - euler) / 2 >= 0
    let options: Vec<i64> = (1..=c)
        .filter(|&rr| {
            let t = 2 * rr - c - punctures as i64 - euler;
            t >= 0 && t % 2 == 0 && t / 2 <= genus as i64 + 2
        })
        .collect();
    let regions_n = *options.choose(rng)? as usize;
    let total_genus = ((2 * regions_n as i64 - c - punctures as i64 - euler) / 2) as u32;
    // every region gets at least one cycle
    let mut order: Vec<usize> = (0..cycles.len()).collect();
    order.shuffle(rng);
    let mut owner = vec![0usize; cycles.len()];
    for (t, &cy) in order.iter().enumerate() {
        owner[cy] = if t < regions_n { t } else { rng.gen_range(0..regions_n) };
    }
    let mut regions: Vec<Region> =
        (0..regions_n).map(|_| Region { genus: 0, punctures: 0, cycles: vec![] }).collect();
    for (cy, cycle) in cycles.into_iter().enumerate() {
        regions[owner[cy]].cycles.push(cycle);
    }
    for _ in 0..total_genus {
        let t = rng.gen_range(0..regions_n);
        regions[t].genus += 1;
    }
    for _ in 0..punctures {
        let t = rng.gen_range(0..regions_n);
        regions[t].punctures += 1;
    }
    let weights: Vec<Q> = (0..k).map(|_| random_weight(rng)).collect();
    let f = WeightedArcFamily::from_parts(sig, counts, arcs, weights, regions);
    if f.is_valid()
        && (!b.exhaustive || f.comb.is_exhaustive())
        && (b.window_loops || f.comb.window_loops().is_empty())
        && !f.total().is_zero()
    {
        Some(f)
    } else {
        None
    }
}

/// A random permutation of `0..n`.
pub fn random_permutation(rng: &mut impl Rng, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// A random permutation of `0..n` fixing 0.
pub fn random_input_permutation(rng: &mut impl Rng, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (1..n).collect();
    p.shuffle(rng);
    std::iter::once(0).chain(p).collect()
}

/// A random fraction in `[0, 1)` with denominator at most `max_den`.
pub fn random_fraction(rng: &mut impl Rng, max_den: i64) -> Q {
    let den = rng.gen_range(1..=max_den);
    q(rng.gen_range(0..den), den)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_valid() {
        let b = Bounds::planar(4, 6);
        for seed in 0..50 {
            let f = random_family(seed, &b).unwrap();
            assert!(f.is_valid(), "{:?}", f.validate());
            assert!(f.comb.is_exhaustive());
            assert_eq!(f, random_family(seed, &b).unwrap());
        }
    }

    #[test]
    fn punctured_and_higher_genus() {
        let b = Bounds { max_genus: 1, max_punctures: 2, max_arcs: 5, ..Bounds::default() };
        let mut seen_genus = false;
        for seed in 0..60 {
            let f = random_family(seed, &b).unwrap();
            assert!(f.is_valid(), "{:?}", f.validate());
            seen_genus |= f.sig().genus > 0;
        }
        assert!(seen_genus);
    }

    #[test]
    fn unsatisfiable_bounds() {
        let b = Bounds { max_arcs: 0, ..Bounds::default() };
        assert!(matches!(random_family(1, &b), Err(Error::Unsatisfiable(_))));
    }
}
