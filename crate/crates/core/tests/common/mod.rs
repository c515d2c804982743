//! Slow reference implementations shared by the integration tests. They use
//! only vector arithmetic from the public API, never the index tables the
//! library runs on.

#![allow(dead_code)]

use quandle_bilinear::diagram::{ArcId, Crossing, LinkDiagram, Sign};
use quandle_bilinear::field::{bilinear_eval, scalar_mul, vec_add, FMatrix, FVector, FieldElem, VectorSpace};
use quandle_bilinear::forms::FormArray;
use quandle_bilinear::quandle::Quandle;

fn br(a: &FormArray, x: usize, y: usize, u: &FVector, v: &FVector) -> FieldElem {
    bilinear_eval(a.block(x, y), u, v).unwrap()
}

/// `u + s v`
fn axpy(u: &FVector, s: FieldElem, v: &FVector) -> FVector {
    vec_add(u, &scalar_mul(s, v).unwrap()).unwrap()
}

/// Checks the three axioms directly. `assigned(x, y)` marks which blocks to
/// consider; instances touching an unassigned block are skipped.
pub fn axioms_hold(q: &Quandle, a: &FormArray, assigned: &dyn Fn(usize, usize) -> bool) -> bool {
    let m = q.order();
    let vs: Vec<FVector> = a.space().iter().collect();
    for x in 0..m {
        if assigned(x, x) && vs.iter().any(|u| !br(a, x, x, u, u).is_zero()) {
            return false;
        }
    }
    for x in 0..m {
        for y in 0..m {
            for z in 0..m {
                let (xz, yz, xy) = (q.op(x, z), q.op(y, z), q.op(x, y));
                let two = [(x, y), (x, z), (y, z), (xz, yz)].iter().all(|&(i, j)| assigned(i, j));
                let three = [(x, y), (x, z), (y, z), (xy, z)].iter().all(|&(i, j)| assigned(i, j));
                for u in &vs {
                    for v in &vs {
                        for w in &vs {
                            let uv = br(a, x, y, u, v);
                            if two {
                                let u2 = axpy(u, br(a, x, z, u, w), w);
                                let v2 = axpy(v, br(a, y, z, v, w), w);
                                if uv != br(a, xz, yz, &u2, &v2) {
                                    return false;
                                }
                            }
                            if three {
                                let lhs = br(a, xy, z, u, w) + uv * br(a, xy, z, v, w);
                                let rhs = br(a, x, z, u, w) + uv * br(a, y, z, v, w);
                                if lhs != rhs {
                                    return false;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    true
}

pub fn naive_form_valid(q: &Quandle, a: &FormArray) -> bool {
    axioms_hold(q, a, &|_, _| true)
}

/// Every valid form, by row-major backtracking with a full recheck at each step.
pub fn naive_search(q: &Quandle, space: VectorSpace) -> Vec<FormArray> {
    let m = q.order();
    let matrices = space.all_matrices().unwrap();
    let mut out = Vec::new();
    let mut current = FormArray::zero(m, space);
    fn rec(q: &Quandle, m: usize, k: usize, mats: &[FMatrix], cur: &mut FormArray, out: &mut Vec<FormArray>) {
        if k == m * m {
            out.push(cur.clone());
            return;
        }
        for mx in mats {
            cur.set_block(k / m, k % m, mx.clone()).unwrap();
            if axioms_hold(q, cur, &|x, y| x * m + y <= k) {
                rec(q, m, k + 1, mats, cur, out);
            }
        }
    }
    rec(q, m, 0, &matrices, &mut current, &mut out);
    out
}

fn act(q: &Quandle, sign: Sign, x: usize, y: usize) -> usize {
    match sign {
        Sign::Positive => q.op(x, y),
        Sign::Negative => q.inv_op(x, y),
    }
}

/// Number of colorings by trying every assignment.
pub fn brute_colorings(d: &LinkDiagram, q: &Quandle) -> u64 {
    let m = q.order();
    let n = d.arc_count();
    let mut colors = vec![0usize; n];
    let mut count = 0;
    loop {
        if d.crossings().iter().all(|c| colors[c.under_out] == act(q, c.sign, colors[c.under_in], colors[c.over])) {
            count += 1;
        }
        let mut k = 0;
        loop {
            if k == n {
                return count;
            }
            colors[k] += 1;
            if colors[k] < m {
                break;
            }
            colors[k] = 0;
            k += 1;
        }
    }
}

/// Bead colorings of a colored diagram by trying every vector assignment.
pub fn brute_beads(d: &LinkDiagram, form: &FormArray, colors: &[usize]) -> u64 {
    let vs: Vec<FVector> = form.space().iter().collect();
    let n = d.arc_count();
    let mut idx = vec![0usize; n];
    let mut count = 0;
    loop {
        let ok = d.crossings().iter().all(|c| {
            let (u, o) = (&vs[idx[c.under_in]], &vs[idx[c.over]]);
            let s = br(form, colors[c.under_in], colors[c.over], u, o);
            let s = if c.sign == Sign::Positive { s } else { -s };
            axpy(u, s, o) == vs[idx[c.under_out]]
        });
        if ok {
            count += 1;
        }
        let mut k = 0;
        loop {
            if k == n {
                return count;
            }
            idx[k] += 1;
            if idx[k] < vs.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

fn rebuild(d: &LinkDiagram, arcs: usize, crossings: Vec<Crossing>, components: Vec<Vec<ArcId>>) -> LinkDiagram {
    LinkDiagram::new(d.name(), arcs, crossings, components).expect("move keeps the diagram valid")
}

fn insert_after(components: &mut [Vec<ArcId>], arc: ArcId, new: &[ArcId]) {
    for comp in components.iter_mut() {
        if let Some(i) = comp.iter().position(|&a| a == arc) {
            for (k, &n) in new.iter().enumerate() {
                comp.insert(i + 1 + k, n);
            }
            return;
        }
    }
}

/// Adds a kink at the end of `arc`. With `over_first` the strand passes over
/// before going under; otherwise the new arc is the over-strand.
pub fn add_kink(d: &LinkDiagram, arc: ArcId, sign: Sign, over_first: bool) -> LinkDiagram {
    let mut crossings = d.crossings().to_vec();
    let mut components = d.components().to_vec();
    let Some(end) = crossings.iter().position(|c| c.under_in == arc) else {
        // A crossingless loop stays a single arc.
        crossings.push(Crossing { sign, under_in: arc, over: arc, under_out: arc });
        return rebuild(d, d.arc_count(), crossings, components);
    };
    let new = d.arc_count();
    crossings[end].under_in = new;
    let over = if over_first { arc } else { new };
    crossings.push(Crossing { sign, under_in: arc, over, under_out: new });
    insert_after(&mut components, arc, &[new]);
    rebuild(d, new + 1, crossings, components)
}

/// Pushes arc `over` across the start of arc `under`, adding a canceling pair
/// whose first crossing has sign `sign`.
pub fn add_r2(d: &LinkDiagram, over: ArcId, under: ArcId, sign: Sign) -> LinkDiagram {
    assert_ne!(over, under);
    let mut crossings = d.crossings().to_vec();
    let mut components = d.components().to_vec();
    let n1 = d.arc_count();
    if !crossings.iter().any(|c| c.under_in == under) {
        crossings.push(Crossing { sign, under_in: under, over, under_out: n1 });
        crossings.push(Crossing { sign: sign.flipped(), under_in: n1, over, under_out: under });
        insert_after(&mut components, under, &[n1]);
        return rebuild(d, n1 + 1, crossings, components);
    }
    let n2 = n1 + 1;
    // Everything after the start of `under` now lies on n2.
    for c in crossings.iter_mut() {
        if c.under_in == under {
            c.under_in = n2;
        }
        if c.over == under {
            c.over = n2;
        }
    }
    crossings.push(Crossing { sign, under_in: under, over, under_out: n1 });
    crossings.push(Crossing { sign: sign.flipped(), under_in: n1, over, under_out: n2 });
    insert_after(&mut components, under, &[n1, n2]);
    rebuild(d, n2 + 1, crossings, components)
}
