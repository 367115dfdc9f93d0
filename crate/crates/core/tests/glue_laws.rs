use arcop::arc::unit;
use arcop::glue::{compose_projective, compose_weighted, glue_with_report, oracle_glue, strip_walk};
use arcop::random::{random_family_with, random_fraction, rng, Bounds};
use arcop::rational::qi;
use rand::Rng;

fn planar() -> Bounds {
    Bounds::planar(4, 5)
}

fn surfaces() -> Bounds {
    Bounds { max_genus: 1, max_punctures: 1, max_boundaries: 3, max_arcs: 4, ..Bounds::default() }
}

#[test]
fn associativity_both_patterns() {
    for (bounds, trials) in [(planar(), 80), (surfaces(), 40)] {
        let mut r = rng(11);
        for t in 0..trials {
            let a = random_family_with(&mut r, &bounds).unwrap();
            let b = random_family_with(&mut r, &bounds).unwrap();
            let c = random_family_with(&mut r, &bounds).unwrap();
            let (pa, pb, pc) = (a.projective(), b.projective(), c.projective());
            let m = a.comb.counts.len() - 1;
            let n = b.comb.counts.len() - 1;
            if m == 0 {
                continue;
            }
            let i = r.gen_range(1..=m);
            if n >= 1 {
                let j = r.gen_range(1..=n);
                let left = compose_projective(&compose_projective(&pa, i, &pb).unwrap(), i + j - 1, &pc).unwrap();
                let right = compose_projective(&pa, i, &compose_projective(&pb, j, &pc).unwrap()).unwrap();
                assert_eq!(left, right, "trial {t} nested");
                let wl = compose_weighted(&compose_weighted(&a, i, &b).unwrap(), i + j - 1, &c).unwrap();
                let wr = compose_weighted(&a, i, &compose_weighted(&b, j, &c).unwrap()).unwrap();
                assert!(wl.equals(&wr), "trial {t} weighted");
            }
            if m >= 2 {
                let mut k = r.gen_range(1..=m);
                while k == i {
                    k = r.gen_range(1..=m);
                }
                let (lo, hi) = (i.min(k), i.max(k));
                let (x, y) = if lo == i { (&pb, &pc) } else { (&pc, &pb) };
                let ny = y.weighted().comb.counts.len() - 1;
                let _ = ny;
                let nlo = x.weighted().comb.counts.len() - 1;
                let left = compose_projective(&compose_projective(&pa, hi, y).unwrap(), lo, x).unwrap();
                let right = compose_projective(&compose_projective(&pa, lo, x).unwrap(), hi + nlo - 1, y).unwrap();
                assert_eq!(left, right, "trial {t} parallel");
            }
        }
    }
}

#[test]
fn oracle_and_units_and_signature() {
    for (bounds, trials) in [(planar(), 80), (surfaces(), 40)] {
        let mut r = rng(5);
        for t in 0..trials {
            let a = random_family_with(&mut r, &bounds).unwrap();
            let b = random_family_with(&mut r, &bounds).unwrap();
            let m = a.comb.counts.len() - 1;
            if m == 0 {
                continue;
            }
            let i = r.gen_range(1..=m);
            let rho0 = b.total_weight(0).unwrap();
            let rhoi = a.total_weight(i).unwrap();
            let (sa, sb) = (a.scaled(&rho0), b.scaled(&rhoi));
            let off = random_fraction(&mut r, 4) * (&rho0 * &rhoi);
            let (g, rep) = glue_with_report(&sa, i, &sb, &off).unwrap();
            assert!(g.is_valid(), "trial {t}: {:?}", g.validate());
            let o = oracle_glue(&sa, i, &sb, &off).unwrap();
            assert_eq!(g, o, "trial {t} oracle");
            assert_eq!(rep.bands, strip_walk(&sa, i, &sb, &off).unwrap(), "trial {t} strips");
            let sig = g.sig();
            assert_eq!(sig.genus, a.sig().genus + b.sig().genus);
            assert_eq!(sig.punctures, a.sig().punctures + b.sig().punctures);
            assert_eq!(sig.boundaries, a.sig().boundaries + b.sig().boundaries - 2);
            let pa = a.projective();
            let u = unit(qi(1)).projective();
            assert_eq!(compose_projective(&pa, i, &u).unwrap(), pa);
            assert_eq!(compose_projective(&u, 1, &pa).unwrap(), pa);
        }
    }
}

fn long_cycle(k: usize) -> Vec<usize> {
    (0..=k).map(|j| (j + 1) % (k + 1)).collect()
}

#[test]
fn cyclicity_long_cycle() {
    use arcop::random::Bounds;
    for bounds in [planar(), surfaces()] {
        let mut r = rng(21);
        for t in 0..40 {
            let a = random_family_with(&mut r, &bounds).unwrap().projective();
            let b = random_family_with(&mut r, &Bounds { min_boundaries: 2, ..bounds }).unwrap().projective();
            let m = a.weighted().comb.counts.len() - 1;
            let n = b.weighted().comb.counts.len() - 1;
            if m == 0 {
                continue;
            }
            let left = compose_projective(&a, m, &b).unwrap().relabel(&long_cycle(m + n - 1)).unwrap();
            let right = compose_projective(
                &b.relabel(&long_cycle(n)).unwrap(),
                1,
                &a.relabel(&long_cycle(m)).unwrap(),
            )
            .unwrap();
            assert_eq!(left, right, "trial {t}");
        }
    }
}

#[test]
fn equivariance() {
    use arcop::random::random_input_permutation;
    let mut r = rng(3);
    for t in 0..60 {
        let a = random_family_with(&mut r, &planar()).unwrap().projective();
        let b = random_family_with(&mut r, &planar()).unwrap().projective();
        let m = a.weighted().comb.counts.len() - 1;
        let n = b.weighted().comb.counts.len() - 1;
        if m == 0 {
            continue;
        }
        let i = r.gen_range(1..=m);
        let sigma = random_input_permutation(&mut r, m + 1);
        let tau = random_input_permutation(&mut r, n + 1);
        let i2 = sigma[i];
        let out = |b_: usize, i_: usize| if b_ < i_ { b_ } else { b_ + n - 1 };
        let mut rho = vec![0; m + n];
        for bb in 0..=m {
            if bb != i {
                rho[out(bb, i)] = out(sigma[bb], i2);
            }
        }
        for k in 1..=n {
            rho[i + k - 1] = i2 + tau[k] - 1;
        }
        let left = compose_projective(&a, i, &b).unwrap().relabel(&rho).unwrap();
        let right = compose_projective(&a.relabel(&sigma).unwrap(), i2, &b.relabel(&tau).unwrap()).unwrap();
        assert_eq!(left, right, "trial {t}");
    }
}
