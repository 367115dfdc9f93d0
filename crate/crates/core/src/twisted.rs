//! Arc families carrying one angle per boundary, composed either as plain
//! products with a circle operad or with the inner zero angle rotating the
//! gluing.

use num_traits::Zero;
use rand::Rng;

use crate::arc::ProjectiveArcFamily;
use crate::circle::{act, compose_angles, long_cycle, CircleOperad};
use crate::error::{Error, Result};
use crate::glue::{compose_projective, compose_projective_twisted};
use crate::random::{random_family_with, random_fraction, Bounds};
use crate::rational::{frac, Q};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TwistedElement {
    pub fam: ProjectiveArcFamily,
    pub angles: Vec<Q>,
}

/// Which composition the angles follow.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TwistKind {
    /// Angles on the inputs only, composed as in `d`.
    DArc,
    /// Angles on all boundaries, composed in the cyclic operad.
    BiDArc,
    /// Angles on all boundaries; the inner zero angle rotates the gluing.
    Twisted { lambda: Q },
}

impl TwistKind {
    fn operad(&self) -> CircleOperad {
        match self {
            TwistKind::DArc => CircleOperad::D,
            TwistKind::BiDArc => CircleOperad::Bi,
            TwistKind::Twisted { lambda } => CircleOperad::Rd(lambda.clone()),
        }
    }

    fn angle_count(&self, boundaries: usize) -> usize {
        match self {
            TwistKind::DArc => boundaries - 1,
            _ => boundaries,
        }
    }
}

impl TwistedElement {
    pub fn new(fam: ProjectiveArcFamily, angles: Vec<Q>) -> Result<Self> {
        let f = fam.weighted();
        f.ensure_valid()?;
        if let Some(b) = f.comb.counts.iter().position(|&c| c == 0) {
            return Err(Error::NotExhaustive(b));
        }
        Ok(TwistedElement { fam, angles: angles.iter().map(frac).collect() })
    }

    pub fn arity(&self) -> usize {
        self.fam.weighted().comb.counts.len() - 1
    }

    fn check(&self, kind: &TwistKind) -> Result<()> {
        let want = kind.angle_count(self.arity() + 1);
        if self.angles.len() != want {
            return Err(Error::Arity(format!("{} angles for {want} slots", self.angles.len())));
        }
        Ok(())
    }

    /// Forgets the angles.
    pub fn untwisted(&self) -> &ProjectiveArcFamily {
        &self.fam
    }
}

pub fn compose_darc(x: &TwistedElement, i: usize, y: &TwistedElement) -> Result<TwistedElement> {
    compose_product(&TwistKind::DArc, x, i, y)
}

pub fn compose_bidarc(x: &TwistedElement, i: usize, y: &TwistedElement) -> Result<TwistedElement> {
    compose_product(&TwistKind::BiDArc, x, i, y)
}

fn compose_product(kind: &TwistKind, x: &TwistedElement, i: usize, y: &TwistedElement) -> Result<TwistedElement> {
    x.check(kind)?;
    y.check(kind)?;
    Ok(TwistedElement {
        fam: compose_projective(&x.fam, i, &y.fam)?,
        angles: compose_angles(&kind.operad(), &x.angles, i, &y.angles)?,
    })
}

/// The inner family is rotated by `-θ′₀` of a turn before gluing; the
/// angles compose with the zero angle of the inner element scaled by
/// `lambda` in the inserted block.
pub fn compose_twisted(x: &TwistedElement, i: usize, y: &TwistedElement, lambda: &Q) -> Result<TwistedElement> {
    let kind = TwistKind::Twisted { lambda: lambda.clone() };
    x.check(&kind)?;
    y.check(&kind)?;
    let turn = frac(&-&y.angles[0]);
    Ok(TwistedElement {
        fam: compose_projective_twisted(&x.fam, i, &y.fam, &turn)?,
        angles: compose_angles(&kind.operad(), &x.angles, i, &y.angles)?,
    })
}

pub fn compose(kind: &TwistKind, x: &TwistedElement, i: usize, y: &TwistedElement) -> Result<TwistedElement> {
    match kind {
        TwistKind::Twisted { lambda } => compose_twisted(x, i, y, lambda),
        _ => compose_product(kind, x, i, y),
    }
}

/// Input permutation acting on both parts.
pub fn relabel(kind: &TwistKind, x: &TwistedElement, sigma: &[usize]) -> Result<TwistedElement> {
    x.check(kind)?;
    Ok(TwistedElement { fam: x.fam.relabel(sigma)?, angles: act(&kind.operad(), &x.angles, sigma)? })
}

/// The long cycle `(0 1 ⋯ n)` on an element with angles on every boundary.
pub fn rotate(x: &TwistedElement) -> Result<TwistedElement> {
    let n = x.arity();
    let cycle: Vec<usize> = (0..=n).map(|j| (j + 1) % (n + 1)).collect();
    Ok(TwistedElement { fam: x.fam.relabel(&cycle)?, angles: long_cycle(&x.angles) })
}

pub fn random_twisted(rng: &mut impl Rng, bounds: &Bounds, kind: &TwistKind) -> Result<TwistedElement> {
    let f = random_family_with(rng, bounds)?;
    let k = kind.angle_count(f.comb.counts.len());
    let angles = (0..k).map(|_| random_fraction(rng, 8)).collect();
    TwistedElement::new(f.projective(), angles)
}

/// Whether every angle vanishes.
pub fn is_untwisted(x: &TwistedElement) -> bool {
    x.angles.iter().all(Zero::is_zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arc::{delta_point, unit};
    use crate::glue::glue_matched;
    use crate::random::{random_input_permutation, rng};
    use crate::rational::{q, qi};

    fn bounds() -> Bounds {
        Bounds { min_boundaries: 2, ..Bounds::planar(3, 4) }
    }

    #[test]
    fn zero_inner_angle_is_untwisted() {
        let mut r = rng(2);
        for _ in 0..40 {
            let kind = TwistKind::Twisted { lambda: qi(1) };
            let x = random_twisted(&mut r, &bounds(), &kind).unwrap();
            let mut y = random_twisted(&mut r, &bounds(), &kind).unwrap();
            y.angles[0] = qi(0);
            let i = r.gen_range(1..=x.arity());
            let got = compose_twisted(&x, i, &y, &qi(1)).unwrap();
            assert_eq!(got.fam, compose_projective(&x.fam, i, &y.fam).unwrap());
        }
    }

    #[test]
    fn rotated_unit_into_delta() {
        let x = TwistedElement::new(delta_point(q(1, 2)).projective(), vec![qi(0), qi(0)]).unwrap();
        let y = TwistedElement::new(unit(qi(1)).projective(), vec![q(1, 4), qi(0)]).unwrap();
        let got = compose_twisted(&x, 1, &y, &qi(1)).unwrap();
        let c = qi(1);
        let expected = glue_matched(x.fam.weighted(), 1, &unit(c.clone()), &(q(3, 4) * c)).unwrap();
        assert_eq!(got.fam, expected.projective());
        // pinned direction of the rotation
        assert_eq!(got.fam, delta_point(q(1, 4)).projective());
        assert_eq!(got.angles, vec![qi(0), q(1, 4)]);
    }

    #[test]
    fn products_and_units() {
        let mut r = rng(4);
        for _ in 0..30 {
            let x = random_twisted(&mut r, &bounds(), &TwistKind::BiDArc).unwrap();
            let u = TwistedElement::new(unit(qi(1)).projective(), vec![qi(0), qi(0)]).unwrap();
            for i in 1..=x.arity() {
                assert_eq!(compose_bidarc(&x, i, &u).unwrap(), x);
            }
            assert_eq!(compose_bidarc(&u, 1, &x).unwrap(), x);
            let y = random_twisted(&mut r, &bounds(), &TwistKind::BiDArc).unwrap();
            let n = x.arity();
            let lhs = rotate(&compose_bidarc(&x, n, &y).unwrap()).unwrap();
            let rhs = compose_bidarc(&rotate(&y).unwrap(), 1, &rotate(&x).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
            let dx = random_twisted(&mut r, &bounds(), &TwistKind::DArc).unwrap();
            let dy = random_twisted(&mut r, &bounds(), &TwistKind::DArc).unwrap();
            let c = compose_darc(&dx, 1, &dy).unwrap();
            assert_eq!(c.fam, compose_projective(&dx.fam, 1, &dy.fam).unwrap());
            assert_eq!(c.angles, compose_angles(&CircleOperad::D, &dx.angles, 1, &dy.angles).unwrap());
        }
    }

    #[test]
    fn twisted_laws_for_several_lambdas() {
        for lambda in [qi(0), qi(1), qi(2)] {
            let kind = TwistKind::Twisted { lambda: lambda.clone() };
            let mut r = rng(8);
            for t in 0..30 {
                let x = random_twisted(&mut r, &bounds(), &kind).unwrap();
                let y = random_twisted(&mut r, &bounds(), &kind).unwrap();
                let z = random_twisted(&mut r, &bounds(), &kind).unwrap();
                let (n, m) = (x.arity(), y.arity());
                let i = r.gen_range(1..=n);
                let j = r.gen_range(1..=m);
                let c = |a: &TwistedElement, k, b: &TwistedElement| compose_twisted(a, k, b, &lambda).unwrap();
                assert_eq!(c(&c(&x, i, &y), i + j - 1, &z), c(&x, i, &c(&y, j, &z)), "trial {t}");
                let sigma = random_input_permutation(&mut r, n + 1);
                let tau = random_input_permutation(&mut r, m + 1);
                let lhs = c(&relabel(&kind, &x, &sigma).unwrap(), sigma[i], &relabel(&kind, &y, &tau).unwrap());
                let block = crate::circle::block_permutation(&sigma, i, &tau);
                assert_eq!(lhs, relabel(&kind, &c(&x, i, &y), &block).unwrap(), "trial {t}");
            }
        }
    }
}
