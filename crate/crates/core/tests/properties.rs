use arcop::arc::{unit, WeightedArcFamily};
use arcop::circle::{act, compose_angles, CircleOperad};
use arcop::glue::compose_projective;
use arcop::io::{decode, encode};
use arcop::random::{random_family, Bounds};
use arcop::rational::{format_q, parse_q, q, qi};
use arcop::render::{render_circle, render_interval};
use proptest::prelude::*;

fn bounds() -> Bounds {
    Bounds { max_genus: 1, max_punctures: 1, ..Bounds::planar(4, 6) }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_families_are_valid_and_exhaustive(seed in any::<u64>()) {
        let f = random_family(seed, &bounds()).unwrap();
        prop_assert!(f.is_valid());
        prop_assert!(f.comb.is_exhaustive());
        prop_assert_eq!(random_family(seed, &bounds()).unwrap(), f);
    }

    #[test]
    fn encoding_is_canonical(seed in any::<u64>()) {
        let f = random_family(seed, &bounds()).unwrap();
        let text = encode(&f);
        let back: WeightedArcFamily = decode(&text).unwrap();
        prop_assert!(back.equals(&f));
        prop_assert_eq!(encode(&back), text);
        prop_assert_eq!(encode(&f.canonical()), encode(&f));
    }

    #[test]
    fn rationals_print_reduced(n in -500i64..500, d in 1i64..500) {
        let x = q(n, d);
        let s = format_q(&x);
        prop_assert_eq!(parse_q(&s).unwrap(), x);
        let doubled = format!("{}/{}", 2 * n, 2 * d);
        prop_assert!(parse_q(&doubled).is_err());
    }

    #[test]
    fn unit_is_neutral(seed in any::<u64>()) {
        let f = random_family(seed, &Bounds { min_boundaries: 2, ..Bounds::planar(4, 6) }).unwrap().projective();
        let u = unit(qi(1)).projective();
        prop_assert_eq!(compose_projective(&u, 1, &f).unwrap(), f.clone());
        prop_assert_eq!(compose_projective(&f, 1, &u).unwrap(), f);
    }

    #[test]
    fn angles_stay_reduced(xs in prop::collection::vec((0i64..12, 1i64..12), 3), ys in prop::collection::vec((0i64..12, 1i64..12), 2)) {
        let x: Vec<_> = xs.iter().map(|&(n, d)| q(n % d, d)).collect();
        let y: Vec<_> = ys.iter().map(|&(n, d)| q(n % d, d)).collect();
        for op in [CircleOperad::D, CircleOperad::Bi, CircleOperad::Q, CircleOperad::Rd(qi(1))] {
            let (x, y) = if op == CircleOperad::D { (&x[1..], &y[1..]) } else { (&x[..], &y[..]) };
            let z = compose_angles(&op, x, 1, y).unwrap();
            prop_assert!(z.iter().all(|a| *a >= qi(0) && *a < qi(1)));
            let id: Vec<usize> = (0..=z.len()).collect();
            if op != CircleOperad::D {
                prop_assert_eq!(act(&op, &z, &id[..z.len()]).unwrap(), z);
            }
        }
    }

    #[test]
    fn rendering_is_deterministic(seed in any::<u64>()) {
        let f = random_family(seed, &bounds()).unwrap();
        prop_assert_eq!(render_interval(&f), render_interval(&f.clone()));
        prop_assert_eq!(render_circle(&f), render_circle(&decode::<WeightedArcFamily>(&encode(&f)).unwrap()));
    }
}

#[test]
fn ten_thousand_seeds_are_valid() {
    for seed in 0..10_000 {
        let f = random_family(seed, &bounds()).unwrap();
        assert!(f.is_valid() && f.comb.is_exhaustive(), "seed {seed}");
    }
}
