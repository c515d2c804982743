mod common;

use quandle_bilinear::catalog::Catalog;
use quandle_bilinear::coloring::{count_beads, enumerate_xcolorings, Engine};
use quandle_bilinear::invariant::{
    compare, compute_counts, compute_invariant, counting_invariant, Comparison, InvariantPolynomial,
};

fn catalog() -> Catalog {
    Catalog::new(quandle_bilinear::catalog::BUNDLED_CATALOG)
}

#[test]
fn every_link_matches_both_tables() {
    let c = catalog();
    let q = c.quandle("kei3").unwrap();
    for table in c.expected_tables().unwrap() {
        let form = c.form(&table.form, &q).unwrap();
        for name in c.list().unwrap() {
            let entry = c.load(&name).unwrap();
            let got = compute_invariant(entry.diagram(), &q, &form, Engine::Propagate).unwrap();
            let want: InvariantPolynomial = table.lookup(&name).unwrap().parse().unwrap();
            assert_eq!(got, want, "{name} with form {}", table.form);
            assert_eq!(got.to_string(), table.lookup(&name).unwrap());
        }
    }
}

#[test]
fn counting_invariant_matches_brute_force_and_u_equals_one() {
    let c = catalog();
    let q = c.quandle("kei3").unwrap();
    for name in c.list().unwrap() {
        let e = c.load(&name).unwrap();
        let n = counting_invariant(e.diagram(), &q);
        assert_eq!(n, common::brute_colorings(e.diagram(), &q), "{name}");
        for exp in &e.expected {
            assert_eq!(exp.polynomial.evaluate_at_one(), n, "{name}");
        }
    }
    assert_eq!(counting_invariant(c.load("L6a4").unwrap().diagram(), &q), 27);
}

#[test]
fn engines_agree_with_an_independent_bead_counter() {
    let c = catalog();
    let q = c.quandle("kei3").unwrap();
    for id in ["swap12", "swap12-33", "zero"] {
        let form = c.form(id, &q).unwrap();
        let raw = c.form_array(id).unwrap();
        for name in ["L2a1", "L4a1", "L5a1", "L6a4"] {
            let d = c.load(name).unwrap().file.diagram;
            for f in enumerate_xcolorings(&d, &q) {
                let slow = common::brute_beads(&d, &raw, f.colors());
                for engine in [Engine::Oracle, Engine::Propagate] {
                    assert_eq!(count_beads(&d, &q, &form, &f, engine, 0).unwrap().count, slow, "{name} {id} {engine}");
                }
            }
        }
    }
}

#[test]
fn zero_form_gives_one_free_bead_per_component() {
    let c = catalog();
    let q = c.quandle("kei3").unwrap();
    let zero = c.form("zero", &q).unwrap();
    for name in c.list().unwrap() {
        let d = c.load(&name).unwrap().file.diagram;
        let exponent = 4u64.pow(d.components().len() as u32);
        let p = compute_invariant(&d, &q, &zero, Engine::Propagate).unwrap();
        assert_eq!(p.terms(), vec![(exponent, counting_invariant(&d, &q))], "{name}");
    }
}

#[test]
fn proper_enhancement_examples() {
    let c = catalog();
    let q = c.quandle("kei3").unwrap();
    let form = c.form("swap12", &q).unwrap();
    let phi = |n: &str| compute_invariant(c.load(n).unwrap().diagram(), &q, &form, Engine::Propagate).unwrap();
    let (l6a3, l2a1) = (phi("L6a3"), phi("L2a1"));
    assert_eq!(l6a3.evaluate_at_one(), l2a1.evaluate_at_one());
    assert_eq!(compare(&l6a3, &l2a1), Comparison::Distinguished);
    let row = ["L7a2", "L7a3", "L7n1", "L7n2"].map(phi);
    assert!(row.iter().all(|p| compare(p, &row[0]) == Comparison::Equal));
    assert_eq!(row[0].to_string(), "2u^40 + 7u^16");
}

#[test]
fn reversing_components_does_not_change_these_values() {
    // Over F_2 with an involutory quandle the sign of a crossing is invisible.
    let c = catalog();
    let q = c.quandle("kei3").unwrap();
    assert!(q.is_kei());
    let form = c.form("swap12-33", &q).unwrap();
    for name in ["L2a1", "L6a4", "L6n1", "L7a7"] {
        let d = c.load(name).unwrap().file.diagram;
        let base = compute_invariant(&d, &q, &form, Engine::Propagate).unwrap();
        for i in 0..d.components().len() {
            let r = d.reverse_component(i);
            assert_eq!(compute_invariant(&r, &q, &form, Engine::Propagate).unwrap(), base, "{name} component {i}");
        }
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let c = catalog();
    let q = c.quandle("kei3").unwrap();
    let form = c.form("swap12", &q).unwrap();
    let d = c.load("L6a4").unwrap().file.diagram;
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| compute_counts(&d, &q, &form, Engine::Propagate).unwrap())
    };
    let one = run(1);
    for threads in [2, 3, 8] {
        assert_eq!(run(threads), one);
    }
}
