//! End-to-end acceptance checks. Runs as a plain binary so each criterion
//! prints exactly one line; exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::Instant;

use arcop::chain::{check_face_contracts, CONTRACTS};
use arcop::circle::{
    algebra_relations_check, classify_parameters, grid_values, homology_formula_check, presentation_check,
    CircleOperad, CompositionSpec, Presented,
};
use arcop::laws::{arc_laws, cacti_laws, cyclic_laws, darc_laws, loop_incidence, twisted_laws, LawReport};
use arcop::rational::qi;
use arcop::Result;

type Verdict = Result<(bool, String)>;

fn law(r: LawReport) -> Verdict {
    Ok((r.passed(), format!("{} checks over {} trials, failures {:?}", r.checks, r.trials, r.failures)))
}

/// Only the failures of one law in a multi-law report count.
fn only(r: &LawReport, name: &str) -> (bool, String) {
    let bad: Vec<&String> = r.failures.iter().filter(|f| f.contains(name)).collect();
    (bad.is_empty(), format!("{} trials, {} {name} failures {bad:?}", r.trials, bad.len()))
}

fn arc_cp() -> Verdict {
    law(arc_laws(200, 7)?)
}

fn cyclicity() -> Verdict {
    law(cyclic_laws(100, 11)?)
}

/// One weighted suite run covers the three weighted criteria.
fn darc() -> Result<&'static LawReport> {
    static RUN: OnceLock<Result<LawReport>> = OnceLock::new();
    RUN.get_or_init(|| darc_laws(100, 13)).as_ref().map_err(Clone::clone)
}

fn projectivization() -> Verdict {
    Ok(only(darc()?, "projectivization"))
}

fn oracle() -> Verdict {
    Ok(only(darc()?, "oracle"))
}

fn signature() -> Verdict {
    Ok(only(darc()?, "signature"))
}

fn cacti() -> Verdict {
    law(cacti_laws(100, 23)?)
}

fn loop_is_chinese_trees() -> Verdict {
    law(loop_incidence(500, 29)?)
}

fn face_contracts() -> Verdict {
    let reps = check_face_contracts(None)?;
    let names: Vec<&str> = reps.iter().map(|r| r.name).collect();
    let checks: usize = reps.iter().map(|r| r.checks).sum();
    let failures: Vec<&String> = reps.iter().flat_map(|r| &r.failures).collect();
    Ok((names == CONTRACTS && failures.is_empty(), format!("{} groups, {checks} checks, failures {failures:?}", names.len())))
}

fn homology_vectors() -> Verdict {
    let r = homology_formula_check(3)?;
    Ok((r.passed(), format!("{:?}", r.checks)))
}

fn presentation() -> Verdict {
    let mut ok = true;
    let mut detail = Vec::new();
    for p in [Presented::D, Presented::Bi] {
        let r = presentation_check(p)?;
        ok &= r.passed();
        detail.push(format!("{}: {} checks{}", r.operad, r.checks.len(), if r.passed() { "" } else { " FAILED" }));
    }
    Ok((ok, detail.join(", ")))
}

fn classification() -> Verdict {
    let c = classify_parameters(2, 300, 31)?;
    let grid = grid_values(2);
    let mut expected = Vec::new();
    for a in &grid {
        for b in &grid {
            for g in &grid {
                for d in &grid {
                    let s = CompositionSpec::new(a.clone(), b.clone(), g.clone(), d.clone());
                    if s.is_expected_operad() {
                        expected.push(s);
                    }
                }
            }
        }
    }
    let witnessed = c.excluded.iter().all(|(_, w)| w.lhs != w.rhs);
    let total = c.survivors.len() + c.excluded.len();
    let ok = c.survivors == expected && witnessed && total == grid.len().pow(4);
    let names: Vec<String> = c.survivors.iter().map(ToString::to_string).collect();
    Ok((ok, format!("{} survivors {names:?}, {} excluded with counterexamples", c.survivors.len(), c.excluded.len())))
}

fn twisted() -> Verdict {
    law(twisted_laws(100, 37)?)
}

fn algebra_relations() -> Verdict {
    let ops = [
        CircleOperad::D,
        CircleOperad::Q,
        CircleOperad::Bi,
        CircleOperad::Rd(qi(0)),
        CircleOperad::Rd(qi(1)),
        CircleOperad::Rd(qi(2)),
    ];
    let mut ok = true;
    let mut detail = Vec::new();
    for op in &ops {
        let r = algebra_relations_check(op)?;
        let lambda_rule = r.checks.iter().any(|(n, _)| n == "Delta dl = lambda dr");
        ok &= r.passed() && (lambda_rule || !matches!(op, CircleOperad::Rd(_)));
        detail.push(format!("{} {}/{}", r.operad, r.checks.iter().filter(|c| c.1).count(), r.checks.len()));
    }
    Ok((ok, detail.join(", ")))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 13] = [
        ("arc_cp operad laws", arc_cp),
        ("cyclicity", cyclicity),
        ("projectivization morphism", projectivization),
        ("gluing oracle", oracle),
        ("signature arithmetic", signature),
        ("cacti correspondence", cacti),
        ("loop equals chinese trees", loop_is_chinese_trees),
        ("bv face contracts", face_contracts),
        ("circle homology vectors", homology_vectors),
        ("presentation", presentation),
        ("classification", classification),
        ("twisted operad", twisted),
        ("algebra relations", algebra_relations),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = run().unwrap_or_else(|e| (false, format!("error: {e}")));
        let status = if ok { "PASS" } else { "FAIL" };
        println!("acceptance {:>2} {status} {name} ({:.2?}): {detail}", k + 1, start.elapsed());
        failed += usize::from(!ok);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
