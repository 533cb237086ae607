#![allow(dead_code)]

use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use padic_darboux::padic::{int, rat};
use padic_darboux::{KForm, MultiSeries, Rational, VectorField};

/// Exponents, numerator, denominator and a power of p.
pub type RawTerm = (Vec<u32>, i64, i64, i32);

pub fn raw_terms(nvars: usize, max_exp: u32, max_terms: usize) -> impl Strategy<Value = Vec<RawTerm>> {
    prop::collection::vec(
        (prop::collection::vec(0..=max_exp, nvars), -9i64..=9, 1i64..=4, -1i32..=1),
        0..=max_terms,
    )
}

pub fn primes() -> impl Strategy<Value = u64> {
    prop::sample::select(vec![2u64, 3, 5])
}

pub fn p_power(p: u64, k: i32) -> Rational {
    let base = int(p as i64);
    if k >= 0 {
        (0..k).fold(Rational::one(), |acc, _| acc * &base)
    } else {
        (0..-k).fold(Rational::one(), |acc, _| acc / &base)
    }
}

/// Series in the template's space; terms below `min_degree` are dropped.
pub fn build(template: &MultiSeries, p: u64, raw: &[RawTerm], min_degree: u32) -> MultiSeries {
    template.from_terms_like(
        raw.iter()
            .filter(|(e, ..)| e.iter().sum::<u32>() >= min_degree)
            .map(|(e, n, d, k)| (e.clone(), rat(*n, *d) * p_power(p, *k))),
    )
}

pub fn subsets(dim: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, dim: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..dim {
            cur.push(i);
            go(i + 1, dim, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, dim, k, &mut Vec::new(), &mut out);
    out
}

/// A `k`-form whose coefficient on the `i`-th basis subset comes from `raw[i]`.
pub fn build_form(template: &MultiSeries, dim: usize, k: usize, p: u64, raw: &[Vec<RawTerm>]) -> KForm {
    let mut form = KForm::zero(template, dim, k).unwrap();
    for (s, r) in subsets(dim, k).into_iter().zip(raw) {
        form.add_term(s, build(template, p, r, 0)).unwrap();
    }
    form
}

pub fn build_field(template: &MultiSeries, p: u64, raw: &[Vec<RawTerm>]) -> VectorField {
    VectorField::new(raw.iter().map(|r| build(template, p, r, 0)).collect()).unwrap()
}

/// Identity plus a perturbation of degree 1 to 3.
pub fn build_map(template: &MultiSeries, p: u64, raw: &[Vec<RawTerm>]) -> Vec<MultiSeries> {
    raw.iter()
        .enumerate()
        .map(|(i, r)| {
            let low: Vec<RawTerm> = r.iter().filter(|(e, ..)| e.iter().sum::<u32>() <= 3).cloned().collect();
            &template.local_var_like(i) + &build(template, p, &low, 1)
        })
        .collect()
}

pub fn compose_maps(outer: &[MultiSeries], inner: &[MultiSeries]) -> Vec<MultiSeries> {
    outer.iter().map(|f| f.compose(inner).unwrap()).collect()
}

/// Equality after truncating both forms to the smaller order.
pub fn forms_agree(a: &KForm, b: &KForm) -> bool {
    let order = a.order().min(b.order());
    a.truncate(order).same_terms(&b.truncate(order))
}

pub fn series_agree(a: &MultiSeries, b: &MultiSeries) -> bool {
    let order = a.order().min(b.order());
    a.clone().truncate(order).same_terms(&b.clone().truncate(order))
}

pub fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    let n: i64 = rng.gen_range(-20..=20);
    let d: i64 = rng.gen_range(1..=6);
    rat(n, d)
}

/// Random invertible skew matrix of even size `n`.
pub fn random_skew(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<Rational>> {
    loop {
        let mut m = vec![vec![Rational::zero(); n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let v = random_rational(rng);
                m[i][j] = v.clone();
                m[j][i] = -v;
            }
        }
        if !padic_darboux::linalg::det(&m).is_zero() {
            return m;
        }
    }
}
