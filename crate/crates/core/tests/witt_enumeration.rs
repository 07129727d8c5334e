//! Witt rings of small finite fields, recomputed by counting isotropic
//! vectors: a diagonal form of rank 2k is hyperbolic iff it has
//! q^{2k-1} + q^k - q^{k-1} zeros, and f, g are Witt equivalent iff f ⊥ -g
//! is hyperbolic.

use std::sync::Arc;

use mwk_core::fields::{FieldCtx, FieldElem, FiniteField};
use mwk_core::quad_forms::{witt_equal, FormClass};

fn zeros(k: &FiniteField, diag: &[u32]) -> u64 {
    let q = k.size();
    let squares: Vec<u32> = (0..q).map(|x| k.mul(x, x)).collect();
    let mut count = 0;
    let mut idx = vec![0u32; diag.len()];
    loop {
        let mut s = 0;
        for (a, &i) in diag.iter().zip(&idx) {
            s = k.add(s, k.mul(*a, squares[i as usize]));
        }
        if s == 0 {
            count += 1;
        }
        let mut j = 0;
        loop {
            if j == idx.len() {
                return count;
            }
            idx[j] += 1;
            if idx[j] < q {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}

fn hyperbolic(k: &FiniteField, diag: &[u32]) -> bool {
    if diag.is_empty() {
        return true;
    }
    if diag.len() % 2 == 1 {
        return false;
    }
    let q = k.size() as u64;
    let m = diag.len() as u32 / 2;
    zeros(k, diag) == q.pow(2 * m - 1) + q.pow(m) - q.pow(m - 1)
}

fn oracle_equal(k: &FiniteField, f: &[u32], g: &[u32]) -> bool {
    let mut d = f.to_vec();
    d.extend(g.iter().map(|&x| k.neg(x)));
    hyperbolic(k, &d)
}

fn forms_up_to(k: &FiniteField, max_rank: usize) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    let mut layer = vec![vec![]];
    for _ in 0..max_rank {
        let mut next = Vec::new();
        for f in &layer {
            let start = f.last().copied().unwrap_or(1);
            for a in start..k.size() {
                let mut g: Vec<u32> = f.clone();
                g.push(a);
                next.push(g);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

fn form(ctx: &FieldCtx, d: &[u32]) -> FormClass {
    FormClass::new(ctx, d.iter().map(|&a| FieldElem::Finite(a)).collect()).unwrap()
}

fn witt_classes(k: &Arc<FiniteField>) -> Vec<Vec<u32>> {
    let mut reps: Vec<Vec<u32>> = Vec::new();
    for f in forms_up_to(k, 2) {
        if !reps.iter().any(|r| oracle_equal(k, r, &f)) {
            reps.push(f);
        }
    }
    reps
}

fn order_of(k: &FiniteField, f: &[u32]) -> usize {
    (1..=8).find(|&m| hyperbolic(k, &f.repeat(m))).unwrap()
}

#[test]
fn witt_ring_of_f3() {
    let k = FiniteField::prime(3).unwrap();
    assert_eq!(witt_classes(&k).len(), 4);
    assert_eq!(order_of(&k, &[1]), 4);
    let ctx = FieldCtx::Finite(k.clone());
    assert!(witt_equal(&form(&ctx, &[1, 1, 1, 1]), &FormClass::zero(&ctx)).unwrap());
    assert!(witt_equal(&form(&ctx, &[1, 2]), &form(&ctx, &[2, 1])).unwrap());
}

#[test]
fn witt_ring_of_f5() {
    let k = FiniteField::prime(5).unwrap();
    assert_eq!(witt_classes(&k).len(), 4);
    for a in 1..5 {
        assert!(order_of(&k, &[a]) <= 2);
    }
    let ctx = FieldCtx::Finite(k.clone());
    assert!(witt_equal(&form(&ctx, &[1, 1]), &FormClass::zero(&ctx)).unwrap());
}

#[test]
fn witt_equality_matches_isotropy_counts() {
    for q in [3u32, 5, 7, 9] {
        let k = FiniteField::of_order(q).unwrap();
        let ctx = FieldCtx::Finite(k.clone());
        let forms = forms_up_to(&k, 2);
        for f in &forms {
            for g in &forms {
                let ours = witt_equal(&form(&ctx, f), &form(&ctx, g)).unwrap();
                assert_eq!(ours, oracle_equal(&k, f, g), "q={q} {f:?} vs {g:?}");
            }
        }
    }
}
