//! Every tree is a linear tree with a twist applied at each input boundary.

use num_traits::{One, Zero};

use crate::arc::{
    delta_point, membership, unit, zero_blocks, Arc, EndpointRef, Predicate, ProjectiveArcFamily,
    WeightedArcFamily,
};
use crate::error::{Error, Result};
use crate::glue::{compose_projective, merge_parallel};
use crate::rational::Q;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearForm {
    /// One cylinder element per input boundary `1..=n`.
    pub twists: Vec<ProjectiveArcFamily>,
    pub linear: ProjectiveArcFamily,
}

/// Moves the window start of `boundary` forward by `r` slots.
fn rotate_window(f: &WeightedArcFamily, boundary: usize, r: usize) -> Result<WeightedArcFamily> {
    let c = f.comb.counts[boundary];
    let turn = |e: EndpointRef| {
        if e.boundary == boundary {
            EndpointRef::new(boundary, (e.slot + c - 1 - r) % c + 1)
        } else {
            e
        }
    };
    let arcs = f.comb.arcs.iter().map(|a| Arc::new(turn(a.ends[0]), turn(a.ends[1]))).collect();
    WeightedArcFamily::planar_disks(f.comb.counts.len(), f.comb.counts.clone(), arcs, f.weights.clone())
}

/// Splits a tree into a linear tree and one twist per input boundary.
pub fn linear_normalize(f: &WeightedArcFamily) -> Result<LinearForm> {
    if !membership(f, &Predicate::Trees) {
        return Err(Error::NotATree("arcs must all join boundary 0 to an input, with g = s = 0".into()));
    }
    let blocks = zero_blocks(f);
    let n = f.comb.counts.len();
    let mut cur = f.clone();
    let mut twists = Vec::new();
    for (b, seq) in blocks.iter().enumerate().skip(1) {
        let r = (0..seq.len()).min_by_key(|&k| seq[k]).unwrap_or(0);
        if r == 0 {
            twists.push(unit(Q::one()).projective());
            continue;
        }
        let widths: Vec<Q> = f.end_interval(b).into_iter().map(|(_, w)| w).collect();
        let total = widths.iter().fold(Q::zero(), |a, w| a + w);
        let moved = widths[r..].iter().fold(Q::zero(), |a, w| a + w);
        twists.push(delta_point(moved / total).projective());
        cur = rotate_window(&cur, b, r)?;
    }
    let (linear, _) = merge_parallel(&cur)?;
    debug_assert_eq!(twists.len(), n - 1);
    Ok(LinearForm { twists, linear: linear.projective() })
}

/// Composes the linear part with its twists.
pub fn recompose(form: &LinearForm) -> Result<ProjectiveArcFamily> {
    let mut acc = form.linear.clone();
    for (k, t) in form.twists.iter().enumerate() {
        acc = compose_projective(&acc, k + 1, t)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arc::dot;
    use crate::random::{random_family, Bounds};
    use crate::rational::{q, qi};

    #[test]
    fn linear_input_has_identity_twists() {
        let form = linear_normalize(&dot(qi(1), qi(2))).unwrap();
        assert!(form.twists.iter().all(|t| *t == unit(qi(1)).projective()));
        assert_eq!(form.linear, dot(qi(1), qi(2)).projective());
    }

    #[test]
    fn crossed_pair_is_a_twisted_unit() {
        let d = delta_point(q(1, 4));
        let form = linear_normalize(&d).unwrap();
        assert_eq!(form.linear, unit(qi(1)).projective());
        assert_eq!(form.twists[0], d.projective());
        assert_eq!(recompose(&form).unwrap(), d.projective());
    }

    #[test]
    fn round_trip_on_random_trees() {
        let mut checked = 0;
        let mut twisted = 0;
        for seed in 0..400 {
            let f = random_family(seed, &Bounds::planar(4, 6)).unwrap();
            if !membership(&f, &Predicate::Trees) {
                assert!(matches!(linear_normalize(&f), Err(Error::NotATree(_))));
                continue;
            }
            let form = linear_normalize(&f).unwrap();
            assert!(membership(form.linear.weighted(), &Predicate::LinearTrees));
            assert_eq!(recompose(&form).unwrap(), f.projective(), "{f:?}");
            twisted += usize::from(form.twists.iter().any(|t| t.weighted().comb.arcs.len() == 2));
            checked += 1;
        }
        assert!(checked >= 50 && twisted > 0, "{checked} {twisted}");
    }
}
