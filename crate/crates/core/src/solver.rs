//! Power-series initial value problems and rational-function expansion.
//!
//! [`ivp_solve`] computes the Taylor solution of `dy/dx = f(x, y)` degree by
//! degree, either for concrete initial values or with the initial values as
//! formal variables. [`rational_expand`] expands a quotient of polynomials by
//! the reciprocal recurrence, and [`newton_polygon`] bounds the roots of the
//! denominator p-adically.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::certificate::{Certificate, Check, Level};
use crate::error::{Error, Result};
use crate::padic::{Context, Rational, Valuation};
use crate::series::MultiSeries;

/// Initial condition `y(x0) = v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Initial {
    Concrete(Vec<Rational>),
    /// Initial values become formal variables with these names.
    Symbolic(Vec<String>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Plain,
    /// Requires `f` to have no terms of y-degree 0 or 1 at the initial point.
    Certified,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IvpProblem {
    /// Right-hand sides, each in the variables `(x, y_1, …, y_l)`.
    pub f: Vec<MultiSeries>,
    pub initial: Initial,
    pub x0: Rational,
    pub mode: Mode,
}

impl IvpProblem {
    pub fn concrete(f: Vec<MultiSeries>, y0: Vec<Rational>) -> IvpProblem {
        IvpProblem {
            f,
            initial: Initial::Concrete(y0),
            x0: Rational::zero(),
            mode: Mode::Plain,
        }
    }

    /// Symbolic initial values named `<y>0` after each dependent variable.
    pub fn symbolic(f: Vec<MultiSeries>) -> IvpProblem {
        let names = f
            .first()
            .map(|g| g.vars()[1..].iter().map(|v| format!("{v}0")).collect())
            .unwrap_or_default();
        IvpProblem {
            f,
            initial: Initial::Symbolic(names),
            x0: Rational::zero(),
            mode: Mode::Plain,
        }
    }

    pub fn certified(mut self) -> IvpProblem {
        self.mode = Mode::Certified;
        self
    }

    pub fn at(mut self, x0: Rational) -> IvpProblem {
        self.x0 = x0;
        self
    }

    pub fn dim(&self) -> usize {
        self.f.len()
    }

    fn validate(&self) -> Result<()> {
        let l = self.dim();
        let Some(first) = self.f.first() else {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        };
        if first.nvars() != l + 1 {
            return Err(Error::DimensionMismatch {
                expected: l + 1,
                found: first.nvars(),
            });
        }
        if self.f.iter().any(|g| !g.same_space(first)) {
            return Err(Error::Incompatible("right-hand sides in different spaces".into()));
        }
        let n_init = match &self.initial {
            Initial::Concrete(v) => v.len(),
            Initial::Symbolic(names) => names.len(),
        };
        if n_init != l {
            return Err(Error::DimensionMismatch {
                expected: l,
                found: n_init,
            });
        }
        Ok(())
    }

    /// The point `(x0, v)`, where `v` is the stored y-center of `f`.
    fn base_point(&self) -> Vec<Rational> {
        let mut pt = vec![self.x0.clone()];
        pt.extend(self.f[0].center()[1..].iter().cloned());
        pt
    }

    /// Right-hand sides re-expanded about `(x0, v)`.
    pub fn recentered(&self) -> Result<Vec<MultiSeries>> {
        self.validate()?;
        let pt = self.base_point();
        if self.f[0].center() == pt.as_slice() {
            return Ok(self.f.clone());
        }
        self.f.iter().map(|g| g.recenter(&pt)).collect()
    }

    /// Checks that `f` has no terms of y-degree 0 or 1 about `(x0, v)`.
    pub fn check_hypothesis(&self) -> Result<()> {
        for (i, g) in self.recentered()?.iter().enumerate() {
            if let Some((e, c)) = g.terms().find(|(e, _)| e[1..].iter().sum::<u32>() <= 1) {
                return Err(Error::Hypothesis(format!(
                    "f_{} has a term of y-degree {} (exponents {:?}, coefficient {})",
                    i + 1,
                    e[1..].iter().sum::<u32>(),
                    e,
                    crate::padic::format_rational(c)
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IvpSolution {
    /// Solution components, series in `x` or in `(x, y0_1, …, y0_l)`.
    pub y: Vec<MultiSeries>,
    pub symbolic: bool,
    /// The ball center `v` of the problem.
    pub center: Vec<Rational>,
    pub notes: Vec<String>,
}

impl IvpSolution {
    /// Coefficient `a_{ij}` of `(x - x0)^j` in component `i`, as a series in
    /// the initial-value variables (a constant in concrete mode).
    pub fn coefficient(&self, i: usize, j: u32) -> MultiSeries {
        self.y[i].coefficient_in(0, j)
    }

    pub fn order(&self) -> u32 {
        self.y.iter().map(MultiSeries::order).min().unwrap_or(0)
    }
}

/// Solves `dy/dx = f(x, y)` through total degree `order`.
pub fn ivp_solve(prob: &IvpProblem, order: u32) -> Result<IvpSolution> {
    prob.validate()?;
    if prob.mode == Mode::Certified {
        prob.check_hypothesis()?;
    }
    let l = prob.dim();
    let f0 = &prob.f[0];
    let pt = prob.base_point();
    let mut notes = Vec::new();
    let x_cap = f0.caps()[0];

    let (f, template, symbolic) = match &prob.initial {
        Initial::Concrete(v) => {
            let rigorous = f0.center()[0] == prob.x0 && f0.center()[1..] == v[..];
            let n = if rigorous { order.min(f0.order() + 1) } else { order };
            let mut t = MultiSeries::new([f0.vars()[0].clone()], n)?.with_center(vec![prob.x0.clone()])?;
            if let Some(c) = x_cap {
                t = t.with_cap(&f0.vars()[0], c + 1)?;
            }
            if !rigorous {
                notes.push("right-hand side used as an exact polynomial away from its center".into());
            }
            (prob.f.clone(), t, false)
        }
        Initial::Symbolic(names) => {
            let f: Vec<MultiSeries> = if f0.center()[0] == prob.x0 {
                prob.f.clone()
            } else {
                notes.push("right-hand side re-expanded in x as an exact polynomial".into());
                prob.recentered()?
            };
            let mut vars = vec![f0.vars()[0].clone()];
            vars.extend(names.iter().cloned());
            let mut t = MultiSeries::new(vars, order.min(f[0].order() + 1))?.with_center(pt.clone())?;
            if let Some(c) = x_cap {
                t = t.with_cap(&f0.vars()[0], c + 1)?;
            }
            (f, t, true)
        }
    };

    let x = template.var_like(0);
    let mut y: Vec<MultiSeries> = match &prob.initial {
        Initial::Concrete(v) => v.iter().map(|c| template.constant_like(c.clone())).collect(),
        Initial::Symbolic(_) => (0..l).map(|i| template.var_like(i + 1)).collect(),
    };
    let steps = match template.caps()[0] {
        Some(c) => template.order().min(c),
        None => template.order(),
    };
    for k in 0..steps {
        let mut subs = vec![x.clone()];
        subs.extend(y.iter().cloned());
        let mut next = Vec::with_capacity(l);
        for (fi, yi) in f.iter().zip(&y) {
            let fk = if symbolic || rigorous_at(fi, &subs) {
                fi.compose(&subs)?
            } else {
                fi.compose_polynomial(&subs)?
            };
            let scale = Rational::new(BigInt::one(), BigInt::from(k + 1));
            let a = fk.coefficient_in(0, k).scalar_mul(&scale);
            let mut yi = yi.clone();
            for (e, c) in a.terms() {
                let mut e2 = e.clone();
                e2[0] = k + 1;
                yi.add_term(e2, c.clone());
            }
            next.push(yi);
        }
        y = next;
    }
    Ok(IvpSolution {
        y,
        symbolic,
        center: pt[1..].to_vec(),
        notes,
    })
}

/// Whether the substitution has no constant offset from the center of `f`.
fn rigorous_at(f: &MultiSeries, subs: &[MultiSeries]) -> bool {
    f.center().iter().zip(subs).all(|(c, s)| s.constant_term() == *c)
}

/// `f(x, y(x)) - y'(x)` for each component; zero through order − 1 for an
/// exact solution.
pub fn ode_residual(prob: &IvpProblem, sol: &IvpSolution) -> Result<Vec<MultiSeries>> {
    let template = sol.y[0].zero_like();
    let mut subs = vec![template.var_like(0)];
    subs.extend(sol.y.iter().cloned());
    prob.f
        .iter()
        .zip(&sol.y)
        .map(|(fi, yi)| {
            let fx = if sol.symbolic || rigorous_at(fi, &subs) {
                fi.compose(&subs)?
            } else {
                fi.compose_polynomial(&subs)?
            };
            let d = yi.partial_derivative(0);
            let n = fx.order().min(d.order());
            fx.truncate(n).checked_sub(&d.truncate(n))
        })
        .collect()
}

/// `C_s` for each total y-degree `s`, as valuations (+∞ where empty).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CsTable {
    pub values: Vec<Valuation>,
}

pub fn cs_table(prob: &IvpProblem, ctx: &Context) -> Result<CsTable> {
    let f = prob.recentered()?;
    let n = f[0].order() as usize;
    let mut values = vec![Valuation::Infinity; n + 1];
    for g in &f {
        for (e, c) in g.terms() {
            let s = e[1..].iter().sum::<u32>() as usize;
            values[s] = values[s].min(ctx.valuation(c));
        }
    }
    Ok(CsTable { values })
}

/// Largest `e ≤ 0` with `p^(e(s-1)) C_s ≤ 1` for `2 ≤ s ≤ order`.
///
/// Returns the exponent and a certificate listing one check per `s`.
pub fn admissible_radius(prob: &IvpProblem, ctx: &Context) -> Result<(i64, Certificate)> {
    prob.check_hypothesis()?;
    let table = cs_table(prob, ctx)?;
    let mut e: i64 = 0;
    for (s, v) in table.values.iter().enumerate().skip(2) {
        if let Valuation::Finite(m) = v {
            e = e.min(m.div_euclid(s as i64 - 1));
        }
    }
    let checks = table
        .values
        .iter()
        .enumerate()
        .skip(2)
        .map(|(s, v)| {
            // r^(s-1) C_s ≤ 1  ⇔  v_p(C_s) - e(s-1) ≥ 0
            let observed = match v {
                Valuation::Finite(m) => Valuation::Finite(m - e * (s as i64 - 1)),
                Valuation::Infinity => Valuation::Infinity,
            };
            Check::new(s as u64, None, Level::from(observed), Level::from(Valuation::Finite(0)))
        })
        .collect();
    let mut cert = Certificate::from_checks("admissible-radius", checks)
        .with_note(format!("radius p^{e}"))
        .with_note(format!(
            "C_s computed from the truncated right-hand side; s > {} unverified",
            table.values.len() - 1
        ));
    cert.sequence = table.values.iter().map(|v| Level::from(*v)).collect();
    Ok((e, cert))
}

/// Verifies `|a_ij|_p ≤ p^e / |j!|_p` for every stored coefficient, with
/// `a_i0` measured from the ball center `v`.
pub fn check_bound(sol: &IvpSolution, radius_exponent: i64, ctx: &Context) -> Certificate {
    let mut checks = Vec::new();
    for (i, yi) in sol.y.iter().enumerate() {
        for j in 0..=yi.order() {
            let mut a = yi.coefficient_in(0, j);
            if j == 0 {
                a.add_term(vec![0; a.nvars()], -sol.center[i].clone());
            }
            let observed = a.max_abs_valuation(ctx);
            let required = Valuation::Finite(-radius_exponent - ctx.factorial_valuation(j as u64));
            checks.push(Check::new(j as u64, Some(i), observed.into(), required.into()));
        }
    }
    checks.sort_by_key(|c| (c.index, c.component));
    Certificate::from_checks("coefficient-bound", checks).with_note(format!("radius p^{radius_exponent}"))
}

/// Expands `num / den` in `var` by the reciprocal recurrence
/// `a_0 b_0 = 1`, `a_k = -b_0^{-1} Σ_{i≥1} b_i a_{k-i}`; the `b_i` may be
/// series in the remaining variables.
pub fn rational_expand(num: &MultiSeries, den: &MultiSeries, var: &str, order: u32) -> Result<MultiSeries> {
    if !num.same_space(den) {
        return Err(Error::Incompatible("numerator and denominator in different spaces".into()));
    }
    let v = den.var_index(var)?;
    let template = den.zero_like().truncate(order).truncate_like(num);
    let n = template.order();
    let in_template = |s: MultiSeries| template.from_terms_like(s.terms().map(|(e, c)| (e.clone(), c.clone())));
    let b: Vec<MultiSeries> = (0..=n).map(|i| in_template(den.coefficient_in(v, i))).collect();
    if b[0].constant_term().is_zero() {
        return Err(Error::ZeroConstantTerm("denominator".into()));
    }
    let b0_inv = b[0].inverse()?;
    let mut a: Vec<MultiSeries> = vec![b0_inv.clone()];
    let mut recip = b0_inv.clone();
    for k in 1..=n {
        let mut acc = template.zero_like();
        for i in 1..=k as usize {
            if !b[i].is_zero() {
                acc = &acc + &(&b[i] * &a[k as usize - i]);
            }
        }
        let ak = -(&b0_inv * &acc);
        recip = &recip + &ak.shift_in(v, k);
        a.push(ak);
    }
    Ok(&recip * &num.truncate_like(&template))
}

/// Univariate `num/den` with rational coefficients (lowest degree first).
pub fn rational_expand_univariate(var: &str, num: &[Rational], den: &[Rational], order: u32) -> Result<MultiSeries> {
    let n = MultiSeries::univariate(var, num, order);
    let d = MultiSeries::univariate(var, den, order);
    rational_expand(&n, &d, var, order)
}

/// One edge of a Newton polygon: slope and horizontal length.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Segment {
    #[serde(serialize_with = "ser_rational")]
    pub slope: Rational,
    pub length: u32,
}

fn ser_rational<S: serde::Serializer>(x: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&crate::padic::format_rational(x))
}

impl Segment {
    /// Valuation shared by the `length` roots on this edge.
    pub fn root_valuation(&self) -> Rational {
        -self.slope.clone()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NewtonPolygon {
    pub segments: Vec<Segment>,
    /// Multiplicity of the root `0`.
    pub zero_roots: u32,
}

/// Lower convex hull of `(i, v_p(b_i))` over the nonzero coefficients.
pub fn newton_polygon(poly: &[Rational], ctx: &Context) -> Result<NewtonPolygon> {
    let pts: Vec<(i64, i64)> = poly
        .iter()
        .enumerate()
        .filter_map(|(i, c)| ctx.valuation(c).finite().map(|v| (i as i64, v)))
        .collect();
    if pts.is_empty() {
        return Err(Error::ZeroPolynomial);
    }
    let mut hull: Vec<(i64, i64)> = Vec::new();
    for &pt in &pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // drop b unless it lies strictly below the segment a → pt
            let cross = (b.0 - a.0) * (pt.1 - a.1) - (b.1 - a.1) * (pt.0 - a.0);
            if cross <= 0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    let segments = hull
        .windows(2)
        .map(|w| Segment {
            slope: Rational::new(BigInt::from(w[1].1 - w[0].1), BigInt::from(w[1].0 - w[0].0)),
            length: (w[1].0 - w[0].0) as u32,
        })
        .collect();
    Ok(NewtonPolygon {
        segments,
        zero_roots: pts[0].0 as u32,
    })
}

/// Exponent `ρ` with `p^ρ` the smallest absolute value of a root;
/// `None` when the polynomial is a nonzero constant.
pub fn min_root_abs(poly: &[Rational], ctx: &Context) -> Result<Option<Rational>> {
    let np = newton_polygon(poly, ctx)?;
    if np.zero_roots > 0 {
        return Err(Error::ZeroConstantTerm("polynomial has a root at 0".into()));
    }
    Ok(np
        .segments
        .iter()
        .map(Segment::root_valuation)
        .max()
        .map(|v| -v))
}

/// Verifies `|a_k|_p ≤ |a_0|_p / p^(ρk)` for a univariate series.
pub fn check_decay(series: &MultiSeries, rho: &Rational, ctx: &Context) -> Result<Certificate> {
    if series.nvars() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: series.nvars(),
        });
    }
    let v0 = Level::from(ctx.valuation(&series.coeff(&[0])));
    let checks = (0..=series.order())
        .map(|k| {
            let required = match &v0.0 {
                Some(v) => Level::finite(v + rho * Rational::from_integer(k.into())),
                None => Level::INFINITY,
            };
            Check::new(k as u64, None, ctx.valuation(&series.coeff(&[k])).into(), required)
        })
        .collect();
    Ok(Certificate::from_checks("decay-bound", checks)
        .with_note(format!("R = p^{}", crate::padic::format_rational(rho))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::{int, rat};

    fn xy(order: u32) -> MultiSeries {
        MultiSeries::new(["x", "y"], order).unwrap()
    }

    /// y^2/(1-x) = Σ_m x^m y^2
    fn worked_rhs(order: u32) -> MultiSeries {
        let t = xy(order);
        t.from_terms_like((0..order.saturating_sub(1)).map(|m| (vec![m, 2], int(1))))
    }

    #[test]
    fn worked_example_symbolic() {
        let prob = IvpProblem::symbolic(vec![worked_rhs(8)]).certified();
        let sol = ivp_solve(&prob, 8).unwrap();
        let s = sol.y[0].zero_like();
        let y0 = |k: u32| s.monomial_like(vec![0, k], int(1));
        assert!(sol.coefficient(0, 0).same_terms(&y0(1)));
        assert!(sol.coefficient(0, 1).same_terms(&y0(2)));
        let a2 = &y0(2).scalar_mul(&rat(1, 2)) + &y0(3);
        assert!(sol.coefficient(0, 2).same_terms(&a2));
        let a3 = &(&y0(2).scalar_mul(&rat(1, 3)) + &y0(3)) + &y0(4);
        assert!(sol.coefficient(0, 3).truncate(5).same_terms(&a3));
        for r in ode_residual(&prob, &sol).unwrap() {
            assert!(r.is_zero());
        }
    }

    #[test]
    fn zero_rhs_is_constant() {
        let f = xy(6);
        let sol = ivp_solve(&IvpProblem::concrete(vec![f.clone()], vec![int(3)]), 6).unwrap();
        assert!(sol.y[0].same_terms(&sol.y[0].constant_like(int(3))));
        let sol = ivp_solve(&IvpProblem::symbolic(vec![f]), 6).unwrap();
        assert!(sol.y[0].same_terms(&sol.y[0].var_like(1)));
    }

    #[test]
    fn hypothesis_checked() {
        let t = xy(4);
        let lin = t.local_var_like(1);
        let prob = IvpProblem::symbolic(vec![lin.clone()]).certified();
        assert!(matches!(ivp_solve(&prob, 4), Err(Error::Hypothesis(_))));
        assert!(ivp_solve(&IvpProblem::symbolic(vec![lin]), 4).is_ok());
        // y^2 about the ball center y = 0 is fine, about y = 1 it gains a linear term
        let sq = &t.local_var_like(1) * &t.local_var_like(1);
        assert!(IvpProblem::concrete(vec![sq.clone()], vec![int(1)]).certified().check_hypothesis().is_ok());
        let shifted = sq.recenter(&[int(0), int(1)]).unwrap();
        assert!(IvpProblem::concrete(vec![shifted], vec![int(1)]).certified().check_hypothesis().is_err());
    }

    #[test]
    fn radius_examples() {
        let ctx = Context::with_prime(5).unwrap();
        let t = xy(4);
        let sq = &t.local_var_like(1) * &t.local_var_like(1);
        let prob = IvpProblem::concrete(vec![sq.clone()], vec![int(0)]);
        assert_eq!(admissible_radius(&prob, &ctx).unwrap().0, 0);
        let prob = IvpProblem::concrete(vec![sq.scalar_mul(&rat(1, 5))], vec![int(0)]);
        let (e, cert) = admissible_radius(&prob, &ctx).unwrap();
        assert_eq!(e, -1);
        assert!(cert.passed());
        let prob = IvpProblem::concrete(vec![t.zero_like()], vec![int(0)]);
        assert_eq!(admissible_radius(&prob, &ctx).unwrap().0, 0);
    }

    #[test]
    fn bound_and_negative_control() {
        let ctx = Context::with_prime(5).unwrap();
        let prob = IvpProblem::concrete(vec![worked_rhs(14)], vec![int(5)]).certified();
        let sol = ivp_solve(&prob, 12).unwrap();
        assert!(check_bound(&sol, -1, &ctx).passed());
        let mut bad = sol.clone();
        let a2 = bad.y[0].coeff(&[2]);
        bad.y[0].add_term(vec![2], &a2 * rat(1, 125) - &a2);
        let cert = check_bound(&bad, -1, &ctx);
        assert!(!cert.passed());
        assert_eq!(cert.first_violation.unwrap().index, 2);
    }

    #[test]
    fn rational_examples() {
        let s = rational_expand_univariate("x", &[int(1)], &[int(1), int(0), int(1)], 10).unwrap();
        for k in 0..=10u32 {
            let expect = if k % 2 == 1 {
                int(0)
            } else if k % 4 == 0 {
                int(1)
            } else {
                int(-1)
            };
            assert_eq!(s.coeff(&[k]), expect);
        }
        let s = rational_expand_univariate("x", &[int(1), int(1)], &[int(1), int(-1)], 6).unwrap();
        assert_eq!(s.coeff(&[0]), int(1));
        assert!((1..=6).all(|k| s.coeff(&[k]) == int(2)));
        assert_eq!(
            rational_expand_univariate("x", &[int(1)], &[int(0), int(1)], 4),
            Err(Error::ZeroConstantTerm("denominator".into()))
        );
    }

    #[test]
    fn rational_with_series_coefficients() {
        // 1/(1 + s - t s) with s = x, compared against the series inverse
        let t = MultiSeries::new(["t", "x"], 7).unwrap();
        let x = t.local_var_like(1);
        let den = &(&t.one_like() + &x) - &(&t.local_var_like(0) * &x);
        let got = rational_expand(&t.one_like(), &den, "t", 7).unwrap();
        assert!(got.same_terms(&den.inverse().unwrap()));
    }

    #[test]
    fn newton_examples() {
        let ctx = Context::with_prime(5).unwrap();
        assert_eq!(min_root_abs(&[int(1), int(0), int(1)], &ctx).unwrap(), Some(int(0)));
        assert_eq!(min_root_abs(&[int(1), rat(1, 5)], &ctx).unwrap(), Some(int(-1)));
        let np = newton_polygon(&[int(5), int(1)], &ctx).unwrap();
        assert_eq!(np.segments, vec![Segment { slope: int(-1), length: 1 }]);
        assert_eq!(newton_polygon(&[int(0)], &ctx), Err(Error::ZeroPolynomial));
        let np = newton_polygon(&[int(0), int(0), int(1)], &ctx).unwrap();
        assert_eq!(np.zero_roots, 2);
        assert_eq!(min_root_abs(&[int(7)], &ctx).unwrap(), None);
    }

    #[test]
    fn decay_examples() {
        let ctx = Context::with_prime(5).unwrap();
        let s = rational_expand_univariate("x", &[int(1)], &[int(1), int(0), int(1)], 20).unwrap();
        assert!(check_decay(&s, &int(0), &ctx).unwrap().passed());
        let g = rational_expand_univariate("x", &[int(1)], &[int(1), int(-5)], 10).unwrap();
        assert!(check_decay(&g, &int(1), &ctx).unwrap().passed());
        assert!(!check_decay(&g, &int(2), &ctx).unwrap().passed());
        let c = MultiSeries::univariate("x", &[int(3)], 5);
        assert!(check_decay(&c, &int(4), &ctx).unwrap().passed());
    }

    proptest::proptest! {
        #[test]
        fn expansion_inverts_denominator(den in proptest::collection::vec(-9i64..=9, 1..5), lead in 1i64..=9) {
            let mut den: Vec<Rational> = den.into_iter().map(int).collect();
            den[0] = int(lead);
            let s = rational_expand_univariate("x", &[int(1)], &den, 12).unwrap();
            let back = &s * &MultiSeries::univariate("x", &den, 12);
            proptest::prop_assert!(back.same_terms(&back.one_like()));
        }

        #[test]
        fn newton_polygon_covers_the_degree(coeffs in proptest::collection::vec(-30i64..=30, 2..7)) {
            let ctx = Context::with_prime(3).unwrap();
            let poly: Vec<Rational> = coeffs.into_iter().map(int).collect();
            if let Ok(np) = newton_polygon(&poly, &ctx) {
                let deg = poly.iter().rposition(|c| !c.is_zero()).unwrap();
                let covered: usize = np.segments.iter().map(|s| s.length as usize).sum::<usize>() + np.zero_roots as usize;
                proptest::prop_assert_eq!(covered, deg);
            }
        }
    }
}
