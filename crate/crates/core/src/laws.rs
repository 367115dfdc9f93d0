//! Seeded randomized law suites shared by the command line and the tests.
//! Each suite counts its checks and records every failing trial.

use std::str::FromStr;

use rand::Rng;

use crate::arc::{membership, unit, chinese_tree_incidence, Predicate, ProjectiveArcFamily, WeightedArcFamily};
use crate::cacti::{frame, glue_cacti, random_cactus, GlueMode};
use crate::circle::block_permutation;
use crate::error::{Error, Result};
use crate::glue::{compose_projective, compose_weighted, glue_with_report, oracle_glue, strip_walk};
use crate::loops::{cactus_configuration, in_loop, loop_of};
use crate::random::{random_family_with, random_fraction, random_input_permutation, rng, Bounds};
use crate::rational::qi;
use crate::twisted::{compose_twisted, TwistedElement, random_twisted, relabel, TwistKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Arc,
    Darc,
    Cyclic,
    Cacti,
    Twisted,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Arc, Suite::Darc, Suite::Cyclic, Suite::Cacti, Suite::Twisted];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Arc => "arc",
            Suite::Darc => "darc",
            Suite::Cyclic => "cyclic",
            Suite::Cacti => "cacti",
            Suite::Twisted => "twisted",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Unsupported(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, Default)]
pub struct LawReport {
    pub suite: String,
    pub trials: usize,
    pub checks: usize,
    pub failures: Vec<String>,
}

impl LawReport {
    fn new(name: &str, trials: usize) -> Self {
        LawReport { suite: name.into(), trials, ..Default::default() }
    }

    fn check(&mut self, trial: usize, law: &str, ok: Result<bool>) {
        self.checks += 1;
        match ok {
            Ok(true) => {}
            Ok(false) => self.failures.push(format!("trial {trial}: {law}")),
            Err(e) => self.failures.push(format!("trial {trial}: {law}: {e}")),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn run_suite(suite: Suite, trials: usize, seed: u64) -> Result<LawReport> {
    match suite {
        Suite::Arc => arc_laws(trials, seed),
        Suite::Darc => darc_laws(trials, seed),
        Suite::Cyclic => cyclic_laws(trials, seed),
        Suite::Cacti => cacti_laws(trials, seed),
        Suite::Twisted => twisted_laws(trials, seed),
    }
}

/// Exhaustive planar families with at most four boundaries and six arcs.
pub fn planar_bounds() -> Bounds {
    Bounds::planar(4, 6)
}

fn surface_bounds() -> Bounds {
    Bounds { max_genus: 1, max_punctures: 1, max_boundaries: 3, max_arcs: 5, ..Bounds::default() }
}

fn arity(f: &ProjectiveArcFamily) -> usize {
    f.weighted().comb.counts.len() - 1
}

fn long_cycle(n: usize) -> Vec<usize> {
    (0..=n).map(|j| (j + 1) % (n + 1)).collect()
}

/// Associativity in both nesting patterns, both unit laws and
/// equivariance of projective composition.
pub fn arc_laws(trials: usize, seed: u64) -> Result<LawReport> {
    let mut rep = LawReport::new("arc", trials);
    let mut r = rng(seed);
    let b = Bounds { min_boundaries: 2, ..planar_bounds() };
    let u = unit(qi(1)).projective();
    for t in 0..trials {
        let x = random_family_with(&mut r, &b)?.projective();
        let y = random_family_with(&mut r, &b)?.projective();
        let z = random_family_with(&mut r, &planar_bounds())?.projective();
        let (m, n) = (arity(&x), arity(&y));
        let i = r.gen_range(1..=m);
        let j = r.gen_range(1..=n);
        let c = compose_projective;
        rep.check(t, "sequential associativity", (|| Ok(c(&c(&x, i, &y)?, i + j - 1, &z)? == c(&x, i, &c(&y, j, &z)?)?))());
        if m >= 2 {
            let mut k = r.gen_range(1..=m);
            while k == i {
                k = r.gen_range(1..=m);
            }
            let (lo, hi, a, b) = if i < k { (i, k, &y, &z) } else { (k, i, &z, &y) };
            rep.check(
                t,
                "parallel associativity",
                (|| Ok(c(&c(&x, hi, b)?, lo, a)? == c(&c(&x, lo, a)?, hi + arity(a) - 1, b)?))(),
            );
        }
        rep.check(t, "right unit", Ok((1..=m).all(|k| c(&x, k, &u).as_ref() == Ok(&x))));
        rep.check(t, "left unit", c(&u, 1, &x).map(|v| v == x));
        let sigma = random_input_permutation(&mut r, m + 1);
        let tau = random_input_permutation(&mut r, n + 1);
        let rho = block_permutation(&sigma, i, &tau);
        rep.check(
            t,
            "equivariance",
            (|| Ok(c(&x.relabel(&sigma)?, sigma[i], &y.relabel(&tau)?)? == c(&x, i, &y)?.relabel(&rho)?))(),
        );
    }
    Ok(rep)
}

/// The long cycle identity on pairs of projective families.
pub fn cyclic_laws(trials: usize, seed: u64) -> Result<LawReport> {
    let mut rep = LawReport::new("cyclic", trials);
    let mut r = rng(seed);
    let b = Bounds { min_boundaries: 2, ..planar_bounds() };
    for t in 0..trials {
        let bounds = if t % 4 == 3 { Bounds { min_boundaries: 2, ..surface_bounds() } } else { b };
        let x = random_family_with(&mut r, &bounds)?.projective();
        let y = random_family_with(&mut r, &bounds)?.projective();
        let (m, n) = (arity(&x), arity(&y));
        rep.check(
            t,
            "long cycle",
            (|| {
                let lhs = compose_projective(&x, m, &y)?.relabel(&long_cycle(m + n - 1))?;
                let rhs = compose_projective(&y.relabel(&long_cycle(n))?, 1, &x.relabel(&long_cycle(m))?)?;
                Ok(lhs == rhs)
            })(),
        );
    }
    Ok(rep)
}

/// Weighted composition: projectivization is a morphism, the gluing
/// agrees with the strip-walk oracle at random offsets, and signatures add.
pub fn darc_laws(trials: usize, seed: u64) -> Result<LawReport> {
    let mut rep = LawReport::new("darc", trials);
    let mut r = rng(seed);
    for t in 0..trials {
        let bounds = if t % 3 == 2 { surface_bounds() } else { planar_bounds() };
        let bounds = Bounds { min_boundaries: 2, ..bounds };
        let a = random_family_with(&mut r, &bounds)?;
        let b = random_family_with(&mut r, &bounds)?;
        let i = r.gen_range(1..=a.comb.counts.len() - 1);
        rep.check(
            t,
            "projectivization",
            (|| Ok(compose_weighted(&a, i, &b)?.projective() == compose_projective(&a.projective(), i, &b.projective())?))(),
        );
        let (rho0, rhoi) = (b.total_weight(0)?, a.total_weight(i)?);
        let (sa, sb) = (a.scaled(&rho0), b.scaled(&rhoi));
        let offset = random_fraction(&mut r, 6) * (&rho0 * &rhoi);
        rep.check(
            t,
            "oracle",
            (|| {
                let (g, report) = glue_with_report(&sa, i, &sb, &offset)?;
                Ok(g == oracle_glue(&sa, i, &sb, &offset)? && report.bands == strip_walk(&sa, i, &sb, &offset)?)
            })(),
        );
        rep.check(t, "signature", compose_weighted(&a, i, &b).map(|g| signature_adds(&a, &b, &g)));
    }
    Ok(rep)
}

pub fn signature_adds(a: &WeightedArcFamily, b: &WeightedArcFamily, g: &WeightedArcFamily) -> bool {
    let (sa, sb, sg) = (a.sig(), b.sig(), g.sig());
    sg.genus == sa.genus + sb.genus
        && sg.punctures == sa.punctures + sb.punctures
        && sg.boundaries == sa.boundaries + sb.boundaries - 2
}

/// Loop inverts framing, framing intertwines symmetric gluing with
/// weighted composition, and framed cacti land in the tree suboperads.
pub fn cacti_laws(trials: usize, seed: u64) -> Result<LawReport> {
    let mut rep = LawReport::new("cacti", trials);
    let mut r = rng(seed);
    for t in 0..trials {
        let spineless = t % 2 == 0;
        let (nc, nd, sd) = (r.gen_range(1..=4), r.gen_range(1..=4), r.gen_bool(0.5));
        let c = random_cactus(&mut r, nc, spineless);
        let d = random_cactus(&mut r, nd, sd);
        rep.check(t, "loop of frame", (|| Ok(loop_of(&frame(&c)?)? == cactus_configuration(&c)?))());
        let i = r.gen_range(1..=c.arity());
        rep.check(
            t,
            "frame intertwines gluing",
            (|| Ok(frame(&glue_cacti(&c, i, &d, GlueMode::Symmetric)?)?.equals(&compose_weighted(&frame(&c)?, i, &frame(&d)?)?)))(),
        );
        let want = if spineless { Predicate::LinearTrees } else { Predicate::Trees };
        rep.check(t, "frame lands in trees", frame(&c).map(|f| membership(&f, &want)));
    }
    Ok(rep)
}

/// Agreement of the loop predicate with the incidence predicate.
pub fn loop_incidence(trials: usize, seed: u64) -> Result<LawReport> {
    let mut rep = LawReport::new("loop", trials);
    let mut r = rng(seed);
    for t in 0..trials {
        let bounds = match t % 3 {
            0 => planar_bounds(),
            1 => Bounds::planar(3, 4),
            _ => surface_bounds(),
        };
        let f = random_family_with(&mut r, &bounds)?;
        rep.check(t, "loop equals incidence", Ok(in_loop(&f) == chinese_tree_incidence(&f)));
    }
    Ok(rep)
}

/// Twisted composition with the default parameter: associativity,
/// equivariance, and the untwisted case.
pub fn twisted_laws(trials: usize, seed: u64) -> Result<LawReport> {
    twisted_laws_with(trials, seed, &qi(1))
}

pub fn twisted_laws_with(trials: usize, seed: u64, lambda: &crate::Q) -> Result<LawReport> {
    let mut rep = LawReport::new("twisted", trials);
    let mut r = rng(seed);
    let kind = TwistKind::Twisted { lambda: lambda.clone() };
    let b = Bounds { min_boundaries: 2, ..Bounds::planar(3, 5) };
    for t in 0..trials {
        let x = random_twisted(&mut r, &b, &kind)?;
        let y = random_twisted(&mut r, &b, &kind)?;
        let z = random_twisted(&mut r, &b, &kind)?;
        let (n, m) = (x.arity(), y.arity());
        let i = r.gen_range(1..=n);
        let j = r.gen_range(1..=m);
        let c = |p: &TwistedElement, k, q: &TwistedElement| compose_twisted(p, k, q, lambda);
        rep.check(t, "associativity", (|| Ok(c(&c(&x, i, &y)?, i + j - 1, &z)? == c(&x, i, &c(&y, j, &z)?)?))());
        let sigma = random_input_permutation(&mut r, n + 1);
        let tau = random_input_permutation(&mut r, m + 1);
        rep.check(
            t,
            "equivariance",
            (|| {
                let lhs = c(&relabel(&kind, &x, &sigma)?, sigma[i], &relabel(&kind, &y, &tau)?)?;
                Ok(lhs == relabel(&kind, &c(&x, i, &y)?, &block_permutation(&sigma, i, &tau))?)
            })(),
        );
        let mut flat = y.clone();
        flat.angles[0] = qi(0);
        rep.check(t, "zero angle untwists", (|| Ok(c(&x, i, &flat)?.fam == compose_projective(&x.fam, i, &flat.fam)?))());
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suites_pass() {
        for s in Suite::ALL {
            let rep = run_suite(s, 12, 3).unwrap();
            assert!(rep.passed(), "{s:?}: {:?}", rep.failures);
            assert!(rep.checks >= 12);
        }
        assert!(loop_incidence(30, 1).unwrap().passed());
    }
}
