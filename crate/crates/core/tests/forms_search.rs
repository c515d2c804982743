mod common;

use quandle_bilinear::catalog::Catalog;
use quandle_bilinear::field::{FMatrix, PrimeField, VectorSpace};
use quandle_bilinear::forms::{search_forms, validate_form, FormArray, FormError, SearchConfig, SearchMode};
use quandle_bilinear::quandle::symplectic_quandle;

fn catalog() -> Catalog {
    Catalog::new(quandle_bilinear::catalog::BUNDLED_CATALOG)
}

fn f2_squared() -> VectorSpace {
    VectorSpace::new(PrimeField::new(2).unwrap(), 2).unwrap()
}

fn flip(a: &FormArray, x: usize, y: usize, i: usize, j: usize) -> FormArray {
    let f = a.space().field();
    let b = a.block(x, y);
    let rows: Vec<Vec<i64>> = (0..2)
        .map(|r| (0..2).map(|c| (b.get(r, c).value() as i64 + i64::from(r == i && c == j)) % 2).collect())
        .collect();
    let mut out = a.clone();
    out.set_block(x, y, FMatrix::new(f, &rows).unwrap()).unwrap();
    out
}

#[test]
fn fixture_forms_pass_both_checkers() {
    let c = catalog();
    let q = c.quandle("kei3").unwrap();
    for id in ["swap12", "swap12-33", "zero"] {
        let a = c.form_array(id).unwrap();
        assert!(common::naive_form_valid(&q, &a), "{id}");
        assert!(validate_form(&q, a).is_ok(), "{id}");
    }
    let sq = c.quandle("symplectic-f2").unwrap();
    let a = c.form_array("constant-symplectic").unwrap();
    assert!(common::naive_form_valid(&sq, &a));
    assert!(validate_form(&sq, a).is_ok());
}

#[test]
fn symplectic_fixture_matches_constructor() {
    let f2 = PrimeField::new(2).unwrap();
    let omega = FMatrix::new(f2, &[vec![0, 1], vec![1, 0]]).unwrap();
    let built = symplectic_quandle(&f2_squared(), &omega).unwrap();
    assert_eq!(catalog().quandle("symplectic-f2").unwrap(), built);
}

#[test]
fn single_bit_mutations_agree_with_the_naive_checker() {
    let c = catalog();
    let q = c.quandle("kei3").unwrap();
    let base = c.form_array("swap12").unwrap();
    let mut detected = 0;
    for x in 0..3 {
        for y in 0..3 {
            for i in 0..2 {
                for j in 0..2 {
                    let m = flip(&base, x, y, i, j);
                    let fast = validate_form(&q, m.clone());
                    assert_eq!(fast.is_ok(), common::naive_form_valid(&q, &m), "block ({x},{y}) entry ({i},{j})");
                    if let Err(FormError::Violations(r)) = fast {
                        assert!(r.total > 0 && !r.witnesses.is_empty());
                        detected += 1;
                    }
                }
            }
        }
    }
    assert!(detected >= 33, "only {detected} of 36 mutations detected");
}

#[test]
fn search_matches_naive_enumeration() {
    let c = catalog();
    let q = c.quandle("kei3").unwrap();
    let cfg = SearchConfig { allow_large: true, ..SearchConfig::new(f2_squared()) };
    let found: Vec<FormArray> = search_forms(&q, &cfg).unwrap().forms.into_iter().map(|f| f.array().clone()).collect();
    let mut naive = common::naive_search(&q, f2_squared());
    let mut sorted = found.clone();
    let key = |a: &FormArray| a.to_text();
    sorted.sort_by_key(key);
    naive.sort_by_key(key);
    assert_eq!(sorted, naive);
    assert_eq!(found.len(), 7);
    for id in ["swap12", "swap12-33", "zero"] {
        assert!(found.contains(&c.form_array(id).unwrap()), "{id}");
    }
}

#[test]
fn search_modes_restrict_the_result() {
    let c = catalog();
    let q = c.quandle("kei3").unwrap();
    let all = search_forms(&q, &SearchConfig { allow_large: true, ..SearchConfig::new(f2_squared()) }).unwrap().forms;
    for mode in [SearchMode::AlternatingOnly, SearchMode::ConstantDiagonal] {
        let cfg = SearchConfig { mode, allow_large: true, ..SearchConfig::new(f2_squared()) };
        let some = search_forms(&q, &cfg).unwrap().forms;
        assert!(some.iter().all(|f| all.contains(f)), "{mode}");
        if mode == SearchMode::ConstantDiagonal {
            assert!(some.iter().all(|f| (1..3).all(|x| f.array().block(x, x) == f.array().block(0, 0))));
        }
        if mode == SearchMode::AlternatingOnly {
            assert!(some.iter().all(|f| (0..3).all(|x| (0..3).all(|y| f.array().block(x, y).is_alternating()))));
        }
    }
}

#[test]
fn large_searches_need_opt_in() {
    let q = catalog().quandle("kei3").unwrap();
    let err = search_forms(&q, &SearchConfig::new(f2_squared())).unwrap_err();
    assert!(matches!(err, FormError::SearchTooLarge { .. }));
}
