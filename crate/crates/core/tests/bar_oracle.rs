//! Hochschild cohomology of k⟨x,y⟩/(x², y² − xy) from the unnormalized bar
//! complex, with a hand-written multiplication table and arithmetic mod a
//! large prime, compared against the normalized computation.

use std::collections::HashMap;

use koszulkit_core::catalog;
use koszulkit_core::hochschild::Bar;
use koszulkit_core::koszul::Kind;

const P: i64 = 1_000_003;

// basis 1, x, y, xy, yx, xyx
const WEIGHT: [usize; 6] = [0, 1, 1, 2, 2, 3];

fn mul(a: usize, b: usize) -> Option<usize> {
    match (a, b) {
        (0, b) => Some(b),
        (a, 0) => Some(a),
        (1, 2) | (2, 2) => Some(3),
        (2, 1) => Some(4),
        (1, 4) | (2, 4) | (3, 1) => Some(5),
        _ => None,
    }
}

fn tuples(n: usize) -> Vec<Vec<usize>> {
    (0..n).fold(vec![vec![]], |acc, _| {
        acc.into_iter()
            .flat_map(|t| {
                (0..6).map(move |g| {
                    let mut u = t.clone();
                    u.push(g);
                    u
                })
            })
            .collect()
    })
}

fn cochains(n: usize, shift: i64) -> Vec<(Vec<usize>, usize)> {
    let mut out = Vec::new();
    for t in tuples(n) {
        let w: usize = t.iter().map(|&g| WEIGHT[g]).sum();
        for (o, &wo) in WEIGHT.iter().enumerate() {
            if w as i64 + shift == wo as i64 {
                out.push((t.clone(), o));
            }
        }
    }
    out
}

fn coboundary(n: usize, shift: i64) -> (usize, Vec<HashMap<usize, i64>>) {
    let src = cochains(n, shift);
    let index: HashMap<_, _> = cochains(n + 1, shift).into_iter().enumerate().map(|(i, e)| (e, i)).collect();
    let mut cols = Vec::new();
    for (t, o) in &src {
        let mut col: HashMap<usize, i64> = HashMap::new();
        let mut add = |u: Vec<usize>, out: usize, c: i64| {
            if let Some(&i) = index.get(&(u, out)) {
                *col.entry(i).or_default() += c;
            }
        };
        let last_sign = if (n + 1).is_multiple_of(2) { 1 } else { -1 };
        for a in 0..6 {
            if let Some(k) = mul(a, *o) {
                let mut u = vec![a];
                u.extend(t);
                add(u, k, 1);
            }
            if let Some(k) = mul(*o, a) {
                let mut u = t.clone();
                u.push(a);
                add(u, k, last_sign);
            }
        }
        for i in 1..=n {
            let sign = if i % 2 == 0 { 1 } else { -1 };
            for g in 0..6 {
                for h in 0..6 {
                    if mul(g, h) == Some(t[i - 1]) {
                        let mut u = t[..i - 1].to_vec();
                        u.push(g);
                        u.push(h);
                        u.extend(&t[i..]);
                        add(u, *o, sign);
                    }
                }
            }
        }
        cols.push(col);
    }
    (src.len(), cols)
}

fn inv(a: i64) -> i64 {
    let (mut r, mut base, mut e) = (1i64, a.rem_euclid(P), P - 2);
    while e > 0 {
        if e & 1 == 1 {
            r = r * base % P;
        }
        base = base * base % P;
        e >>= 1;
    }
    r
}

fn rank(cols: &[HashMap<usize, i64>]) -> usize {
    let mut pivots: HashMap<usize, HashMap<usize, i64>> = HashMap::new();
    for c in cols {
        let mut v: HashMap<usize, i64> =
            c.iter().map(|(&k, &x)| (k, x.rem_euclid(P))).filter(|&(_, x)| x != 0).collect();
        while let Some(&lead) = v.keys().max() {
            match pivots.get(&lead) {
                Some(row) => {
                    let f = v[&lead] * inv(row[&lead]) % P;
                    for (&k, &x) in row {
                        let e = v.entry(k).or_default();
                        *e = (*e - f * x).rem_euclid(P);
                        if *e == 0 {
                            v.remove(&k);
                        }
                    }
                }
                None => {
                    pivots.insert(lead, v);
                    break;
                }
            }
        }
    }
    pivots.len()
}

fn oracle_hh(n: usize) -> Vec<(i64, usize)> {
    let mut out = Vec::new();
    for shift in -(3 * n as i64)..=3 {
        let (dim, d_out) = coboundary(n, shift);
        if dim == 0 {
            continue;
        }
        let (_, d_in) = coboundary(n - 1, shift);
        let h = dim - rank(&d_out) - rank(&d_in);
        if h > 0 {
            out.push((shift, h));
        }
    }
    out
}

#[test]
fn normalized_and_unnormalized_agree() {
    let a = catalog::example(6);
    let bar = Bar::new(&a).unwrap();
    for n in 1..=3 {
        let expected = oracle_hh(n);
        assert_eq!(bar.hh(Kind::Cochain, n).unwrap().graded_dims(), expected, "HH^{n}");
    }
}
