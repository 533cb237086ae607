mod common;

use common::*;
use num_traits::{One, Zero};
use padic_darboux::padic::{int, rat};
use padic_darboux::solver::{self, IvpProblem};
use padic_darboux::{Context, Error, MultiSeries, Rational};
use proptest::prelude::*;

fn xy(order: u32) -> MultiSeries {
    MultiSeries::new(["x", "y"], order).unwrap()
}

/// y²/(1 - x) truncated at `order`.
fn worked_rhs(order: u32) -> MultiSeries {
    let t = xy(order);
    t.from_terms_like((0..order - 1).map(|m| (vec![m, 2], int(1))))
}

/// Coefficients of 1/(1/y0 + log(1 - x)) by direct power-series division.
fn closed_form(y0: &Rational, n: usize) -> Vec<Rational> {
    let mut d = vec![Rational::one() / y0];
    d.extend((1..=n as i64).map(|k| rat(-1, k)));
    let mut a = vec![Rational::zero(); n + 1];
    for k in 0..=n {
        let mut s = if k == 0 { Rational::one() } else { Rational::zero() };
        for i in 1..=k {
            s -= &d[i] * &a[k - i];
        }
        a[k] = s / &d[0];
    }
    a
}

#[test]
fn concrete_solution_matches_closed_form() {
    for y0 in [int(5), int(1), rat(2, 3), int(-7)] {
        let prob = IvpProblem::concrete(vec![worked_rhs(14)], vec![y0.clone()]);
        let sol = solver::ivp_solve(&prob, 12).unwrap();
        for (k, a) in closed_form(&y0, 12).iter().enumerate() {
            assert_eq!(&sol.y[0].coeff(&[k as u32]), a, "y0 = {y0}, k = {k}");
        }
    }
}

#[test]
fn symbolic_specializes_to_concrete() {
    let order = 11;
    let sym = solver::ivp_solve(&IvpProblem::symbolic(vec![worked_rhs(order + 2)]), order).unwrap();
    for y0 in [int(3), rat(-1, 2), int(10)] {
        let conc = solver::ivp_solve(&IvpProblem::concrete(vec![worked_rhs(order + 2)], vec![y0.clone()]), order).unwrap();
        // a_j has y0-degree j + 1, so it is complete while 2j + 1 ≤ order
        for j in (0..=order).filter(|j| 2 * j < order) {
            let coeff = sym.coefficient(0, j);
            assert_eq!(coeff.evaluate(&[int(0), y0.clone()]).unwrap(), conc.y[0].coeff(&[j]), "j = {j}");
        }
    }
}

#[test]
fn systems_match_componentwise_solutions() {
    // y1' = y1², y2' = x y2² decouple
    let t = MultiSeries::new(["x", "y1", "y2"], 10).unwrap();
    let f1 = &t.local_var_like(1) * &t.local_var_like(1);
    let f2 = &t.local_var_like(0) * &(&t.local_var_like(2) * &t.local_var_like(2));
    let sol = solver::ivp_solve(&IvpProblem::concrete(vec![f1, f2], vec![int(2), int(3)]), 9).unwrap();
    for k in 0..=9u32 {
        assert_eq!(sol.y[0].coeff(&[k]), int(2).pow(k as i32 + 1));
    }
    // y2 = 1/(1/3 - x²/2)
    let inv = MultiSeries::univariate("x", &[rat(1, 3), int(0), rat(-1, 2)], 9).inverse().unwrap();
    for k in 0..=9u32 {
        assert_eq!(sol.y[1].coeff(&[k]), inv.coeff(&[k]), "k = {k}");
    }
}

#[test]
fn bound_certificate_and_negative_controls() {
    let ctx = Context::with_prime(5).unwrap();
    let prob = IvpProblem::concrete(vec![worked_rhs(14)], vec![int(5)]).certified();
    let sol = solver::ivp_solve(&prob, 12).unwrap();
    let cert = solver::check_bound(&sol, -1, &ctx);
    assert!(cert.passed());
    assert_eq!(cert.verified_through, Some(12));
    for j in [3u32, 7, 11] {
        let mut bad = sol.clone();
        let a = bad.y[0].coeff(&[j]);
        bad.y[0].add_term(vec![j], &a * rat(1, 5u32.pow(4) as i64) - &a + rat(1, 5u32.pow(4) as i64));
        let cert = solver::check_bound(&bad, -1, &ctx);
        assert_eq!(cert.first_violation.map(|c| c.index), Some(j as u64));
    }
}

#[test]
fn linear_term_breaks_hypothesis() {
    let t = xy(6);
    let f = &t.local_var_like(1) + &(&t.local_var_like(1) * &t.local_var_like(1));
    let err = solver::ivp_solve(&IvpProblem::concrete(vec![f], vec![int(0)]).certified(), 6).unwrap_err();
    assert!(matches!(err.root(), Error::Hypothesis(_)));
}

#[test]
fn newton_polygon_of_known_roots() {
    // Π (1 - p^k x) has roots p^-k with |root| = p^k
    let ctx = Context::with_prime(3).unwrap();
    let ks = [2i32, -1, 0, 1];
    let mut poly = vec![Rational::one()];
    for k in ks {
        let c = -p_power(3, k);
        let mut next = vec![Rational::zero(); poly.len() + 1];
        for (i, a) in poly.iter().enumerate() {
            next[i] += a;
            next[i + 1] += a * &c;
        }
        poly = next;
    }
    let np = solver::newton_polygon(&poly, &ctx).unwrap();
    let mut abs: Vec<Rational> = Vec::new();
    for s in &np.segments {
        for _ in 0..s.length {
            abs.push(-s.root_valuation());
        }
    }
    abs.sort();
    assert_eq!(abs, vec![int(-1), int(0), int(1), int(2)]);
    assert_eq!(solver::min_root_abs(&poly, &ctx).unwrap(), Some(int(-1)));
}

#[test]
fn decay_examples() {
    let ctx = Context::with_prime(5).unwrap();
    let s = solver::rational_expand_univariate("x", &[int(1)], &[int(1), int(0), int(1)], 20).unwrap();
    assert!(solver::check_decay(&s, &int(0), &ctx).unwrap().passed());
    assert!(!solver::check_decay(&s, &int(1), &ctx).unwrap().passed());
    // root of 1 - 25x has norm p^2
    let s = solver::rational_expand_univariate("x", &[int(1)], &[int(1), int(-25)], 20).unwrap();
    let rho = solver::min_root_abs(&[int(1), int(-25)], &ctx).unwrap().unwrap();
    assert_eq!(rho, int(2));
    assert!(solver::check_decay(&s, &rho, &ctx).unwrap().passed());
    assert!(!solver::check_decay(&s, &int(3), &ctx).unwrap().passed());
    assert!(solver::rational_expand_univariate("x", &[int(1)], &[int(0), int(1)], 5).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn expansion_times_denominator_is_numerator(
        p in primes(),
        num in prop::collection::vec(-9i64..=9, 1..4),
        den in prop::collection::vec(-9i64..=9, 1..4),
        lead in 1i64..=9,
    ) {
        let mut den: Vec<Rational> = den.into_iter().map(int).collect();
        den[0] = int(lead);
        let num: Vec<Rational> = num.into_iter().map(int).collect();
        let s = solver::rational_expand_univariate("x", &num, &den, 15).unwrap();
        let back = &s * &MultiSeries::univariate("x", &den, 15);
        prop_assert!(back.same_terms(&MultiSeries::univariate("x", &num, 15)));
        // decay at the Newton-polygon bound holds for every prime
        let ctx = Context::with_prime(p).unwrap();
        let rho = solver::min_root_abs(&den, &ctx).unwrap().unwrap_or_else(|| int(0));
        if num.len() == 1 {
            prop_assert!(solver::check_decay(&s, &rho, &ctx).unwrap().passed());
        }
    }

    #[test]
    fn solutions_satisfy_the_ode(p in primes(), raw in raw_terms(2, 3, 5), y0 in -6i64..=6) {
        // right-hand sides of y-degree ≥ 2 keep the certified hypothesis
        let t = xy(8);
        let f = t.from_terms_like(
            raw.iter()
                .filter(|(e, ..)| e[1] >= 2)
                .map(|(e, n, d, k)| (e.clone(), rat(*n, *d) * p_power(p, *k))),
        );
        let prob = IvpProblem::concrete(vec![f], vec![int(y0)]).certified();
        let sol = solver::ivp_solve(&prob, 8).unwrap();
        for r in solver::ode_residual(&prob, &sol).unwrap() {
            prop_assert!(r.is_zero());
        }
    }
}
