mod common;

use proptest::prelude::*;
use quandle_bilinear::catalog::Catalog;
use quandle_bilinear::coloring::Engine;
use quandle_bilinear::diagram::{LinkDiagram, Sign};
use quandle_bilinear::forms::BilinearForm;
use quandle_bilinear::invariant::{compute_invariant, InvariantPolynomial};
use quandle_bilinear::quandle::Quandle;

fn catalog() -> Catalog {
    Catalog::new(quandle_bilinear::catalog::BUNDLED_CATALOG)
}

fn fixtures() -> Vec<(Quandle, BilinearForm)> {
    let c = catalog();
    let q = c.quandle("kei3").unwrap();
    let sq = c.quandle("symplectic-f2").unwrap();
    vec![
        (q.clone(), c.form("swap12", &q).unwrap()),
        (q.clone(), c.form("swap12-33", &q).unwrap()),
        (sq.clone(), c.form("constant-symplectic", &sq).unwrap()),
    ]
}

fn phi(d: &LinkDiagram, q: &Quandle, f: &BilinearForm) -> InvariantPolynomial {
    compute_invariant(d, q, f, Engine::Propagate).unwrap()
}

#[test]
fn hand_built_variants_match_their_base() {
    let c = catalog();
    let cases = [
        (c.load("L2a1").unwrap().file.diagram, vec!["L2a1-r1", "L2a1-r2"]),
        (c.variant("unknot").unwrap().diagram, vec!["unknot-r1", "unknot-r1-negative", "unknot-r2"]),
        (c.variant("trefoil").unwrap().diagram, vec!["trefoil-r1", "trefoil-r2"]),
    ];
    for (q, f) in fixtures() {
        for (base, variants) in &cases {
            let want = phi(base, &q, &f);
            for v in variants {
                let d = c.variant(v).unwrap().diagram;
                assert_eq!(phi(&d, &q, &f), want, "{v}");
            }
        }
    }
}

#[test]
fn trefoil_is_told_apart_from_the_unknot() {
    let c = catalog();
    let sq = c.quandle("symplectic-f2").unwrap();
    let f = c.form("constant-symplectic", &sq).unwrap();
    let t = phi(&c.variant("trefoil").unwrap().diagram, &sq, &f);
    let u = phi(&c.variant("unknot").unwrap().diagram, &sq, &f);
    assert_ne!(t, u);
}

#[derive(Debug, Clone)]
enum Move {
    Kink { arc: usize, sign: bool, over_first: bool },
    Pass { over: usize, under: usize, sign: bool },
}

fn apply(d: &LinkDiagram, m: &Move) -> LinkDiagram {
    let n = d.arc_count();
    let sign = |s: bool| if s { Sign::Positive } else { Sign::Negative };
    match *m {
        Move::Kink { arc, sign: s, over_first } => common::add_kink(d, arc % n, sign(s), over_first),
        Move::Pass { over, under, sign: s } => {
            let (o, u) = (over % n, under % n);
            if o == u {
                d.clone()
            } else {
                common::add_r2(d, o, u, sign(s))
            }
        }
    }
}

fn moves() -> impl Strategy<Value = Vec<Move>> {
    let one = prop_oneof![
        (any::<usize>(), any::<bool>(), any::<bool>()).prop_map(|(arc, sign, over_first)| Move::Kink {
            arc,
            sign,
            over_first
        }),
        (any::<usize>(), any::<usize>(), any::<bool>()).prop_map(|(over, under, sign)| Move::Pass {
            over,
            under,
            sign
        }),
    ];
    proptest::collection::vec(one, 1..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]
    #[test]
    fn random_first_and_second_moves_preserve_the_polynomial(link in 0usize..18, ms in moves()) {
        let c = catalog();
        let names = c.list().unwrap();
        let base = c.load(&names[link]).unwrap().file.diagram;
        let mut d = base.clone();
        for m in &ms {
            d = apply(&d, m);
        }
        for (q, f) in fixtures() {
            prop_assert_eq!(phi(&d, &q, &f), phi(&base, &q, &f));
        }
    }
}
