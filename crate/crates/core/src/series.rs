//! Truncated sparse multivariate power series over the rationals.
//!
//! A [`MultiSeries`] stores `Σ a_I (x - c)^I` for exponent vectors `I` with
//! total degree at most `order`, optionally with a per-variable degree cap.
//! Both truncations are by a monomial ideal, so every ring operation on the
//! stored representatives is exact in the quotient. Coefficients above the
//! truncation are unknown, not zero, and every operation reports the order
//! up to which its output is exact.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::certificate::{Certificate, Check, Level, Verdict};
use crate::error::{Error, Result};
use crate::padic::{format_rational, Context, Rational, Valuation};

pub type Exponents = Vec<u32>;

fn total_degree(e: &[u32]) -> u32 {
    e.iter().sum()
}

fn min_cap(a: Option<u32>, b: Option<u32>) -> Option<u32> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiSeries {
    vars: Arc<[String]>,
    center: Arc<[Rational]>,
    order: u32,
    caps: Vec<Option<u32>>,
    terms: BTreeMap<Exponents, Rational>,
}

impl MultiSeries {
    /// The zero series in `vars`, centered at the origin.
    pub fn new<I, S>(vars: I, order: u32) -> Result<MultiSeries>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let vars: Vec<String> = vars.into_iter().map(Into::into).collect();
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].contains(v) {
                return Err(Error::DuplicateVariable(v.clone()));
            }
        }
        let n = vars.len();
        Ok(MultiSeries {
            vars: vars.into(),
            center: vec![Rational::zero(); n].into(),
            order,
            caps: vec![None; n],
            terms: BTreeMap::new(),
        })
    }

    /// Reinterprets the stored coefficients as an expansion about `center`.
    pub fn with_center(mut self, center: Vec<Rational>) -> Result<MultiSeries> {
        if center.len() != self.nvars() {
            return Err(Error::DimensionMismatch {
                expected: self.nvars(),
                found: center.len(),
            });
        }
        self.center = center.into();
        Ok(self)
    }

    /// Adds a degree cap on one variable; terms above it are dropped.
    pub fn with_cap(mut self, var: &str, cap: u32) -> Result<MultiSeries> {
        let i = self.var_index(var)?;
        self.caps[i] = min_cap(self.caps[i], Some(cap));
        self.retain_kept();
        Ok(self)
    }

    /// Lowers the truncation order (never raises it).
    pub fn truncate(mut self, order: u32) -> MultiSeries {
        self.order = self.order.min(order);
        self.retain_kept();
        self
    }

    /// Truncates to the tighter of this and `other`'s order and caps.
    pub fn truncate_like(&self, other: &MultiSeries) -> MultiSeries {
        let mut out = self.clone();
        out.order = out.order.min(other.order);
        for (a, b) in out.caps.iter_mut().zip(&other.caps) {
            *a = min_cap(*a, *b);
        }
        out.retain_kept();
        out
    }

    fn retain_kept(&mut self) {
        let (order, caps) = (self.order, self.caps.clone());
        self.terms.retain(|e, _| keeps(order, &caps, e));
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn center(&self) -> &[Rational] {
        &self.center
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn caps(&self) -> &[Option<u32>] {
        &self.caps
    }

    pub fn var_index(&self, name: &str) -> Result<usize> {
        self.vars
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn keeps(&self, e: &[u32]) -> bool {
        keeps(self.order, &self.caps, e)
    }

    pub fn same_space(&self, other: &MultiSeries) -> bool {
        (Arc::ptr_eq(&self.vars, &other.vars) || self.vars == other.vars)
            && (Arc::ptr_eq(&self.center, &other.center) || self.center == other.center)
    }

    pub fn zero_like(&self) -> MultiSeries {
        MultiSeries {
            vars: self.vars.clone(),
            center: self.center.clone(),
            order: self.order,
            caps: self.caps.clone(),
            terms: BTreeMap::new(),
        }
    }

    /// Zero series in the same space with the given order, which may exceed
    /// this series' order.
    pub fn zero_with_order(&self, order: u32) -> MultiSeries {
        let mut s = self.zero_like();
        s.order = order;
        s
    }

    pub fn constant_like(&self, c: Rational) -> MultiSeries {
        let mut s = self.zero_like();
        s.add_term(vec![0; self.nvars()], c);
        s
    }

    pub fn one_like(&self) -> MultiSeries {
        self.constant_like(Rational::one())
    }

    /// `c * (x - center)^e` in this series' space.
    pub fn monomial_like(&self, e: Exponents, c: Rational) -> MultiSeries {
        let mut s = self.zero_like();
        s.add_term(e, c);
        s
    }

    /// The local coordinate `x_i - c_i`.
    pub fn local_var_like(&self, i: usize) -> MultiSeries {
        let mut e = vec![0; self.nvars()];
        e[i] = 1;
        self.monomial_like(e, Rational::one())
    }

    /// The coordinate function `x_i`, i.e. `c_i + (x_i - c_i)`.
    pub fn var_like(&self, i: usize) -> MultiSeries {
        let mut s = self.local_var_like(i);
        s.add_term(vec![0; self.nvars()], self.center[i].clone());
        s
    }

    pub fn from_terms_like<I>(&self, terms: I) -> MultiSeries
    where
        I: IntoIterator<Item = (Exponents, Rational)>,
    {
        let mut s = self.zero_like();
        for (e, c) in terms {
            s.add_term(e, c);
        }
        s
    }

    /// Univariate series `Σ coeffs[k] x^k` about 0.
    pub fn univariate(var: &str, coeffs: &[Rational], order: u32) -> MultiSeries {
        let base = MultiSeries::new([var], order).expect("single variable");
        base.from_terms_like(
            coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| (vec![k as u32], c.clone())),
        )
    }

    /// Adds `c` to the coefficient at `e`; silently drops truncated exponents.
    pub fn add_term(&mut self, e: Exponents, c: Rational) {
        assert_eq!(e.len(), self.nvars(), "exponent length mismatch");
        if c.is_zero() || !self.keeps(&e) {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn coeff(&self, e: &[u32]) -> Rational {
        self.terms.get(e).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.coeff(&vec![0; self.nvars()])
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Lowest total degree of a stored term.
    pub fn min_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| total_degree(e)).min()
    }

    /// Lowest degree in the given subset of variables over all stored terms.
    pub fn min_degree_in(&self, vars: &[usize]) -> Option<u32> {
        self.terms
            .keys()
            .map(|e| vars.iter().map(|&i| e[i]).sum())
            .min()
    }

    /// Highest total degree of a stored term.
    pub fn max_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| total_degree(e)).max()
    }

    pub fn filter_terms<F>(&self, mut keep: F) -> MultiSeries
    where
        F: FnMut(&[u32], &Rational) -> bool,
    {
        let mut s = self.zero_like();
        s.terms = self
            .terms
            .iter()
            .filter(|(e, c)| keep(e, c))
            .map(|(e, c)| (e.clone(), c.clone()))
            .collect();
        s
    }

    /// Same stored coefficients, ignoring order and caps.
    pub fn same_terms(&self, other: &MultiSeries) -> bool {
        self.terms == other.terms
    }

    /// Smallest coefficient valuation, i.e. the largest `|a_I|_p`.
    pub fn max_abs_valuation(&self, ctx: &Context) -> Valuation {
        self.terms
            .values()
            .map(|c| ctx.valuation(c))
            .min()
            .unwrap_or(Valuation::Infinity)
    }

    fn joined(&self, other: &MultiSeries) -> Result<(u32, Vec<Option<u32>>)> {
        if self.vars != other.vars {
            return Err(Error::Incompatible(format!(
                "variables {:?} vs {:?}",
                self.vars, other.vars
            )));
        }
        if self.center != other.center {
            return Err(Error::Incompatible("center mismatch".into()));
        }
        let caps = self
            .caps
            .iter()
            .zip(&other.caps)
            .map(|(&a, &b)| min_cap(a, b))
            .collect();
        Ok((self.order.min(other.order), caps))
    }

    fn with_shape(&self, order: u32, caps: Vec<Option<u32>>) -> MultiSeries {
        MultiSeries {
            vars: self.vars.clone(),
            center: self.center.clone(),
            order,
            caps,
            terms: BTreeMap::new(),
        }
    }

    pub fn checked_add(&self, other: &MultiSeries) -> Result<MultiSeries> {
        let (order, caps) = self.joined(other)?;
        let mut out = self.with_shape(order, caps);
        for (e, c) in self.terms.iter().chain(other.terms.iter()) {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &MultiSeries) -> Result<MultiSeries> {
        self.checked_add(&other.neg_ref())
    }

    fn neg_ref(&self) -> MultiSeries {
        let mut out = self.zero_like();
        out.terms = self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect();
        out
    }

    pub fn scalar_mul(&self, k: &Rational) -> MultiSeries {
        let mut out = self.zero_like();
        if !k.is_zero() {
            out.terms = self.terms.iter().map(|(e, c)| (e.clone(), c * k)).collect();
        }
        out
    }

    /// Product truncated to the smaller order and the tighter caps.
    pub fn checked_mul(&self, other: &MultiSeries) -> Result<MultiSeries> {
        let (order, caps) = self.joined(other)?;
        let mut out = self.with_shape(order, caps);
        if self.is_zero() || other.is_zero() {
            return Ok(out);
        }
        let mut buckets: Vec<Vec<(&Exponents, &Rational)>> = vec![Vec::new(); order as usize + 1];
        for (e, c) in &other.terms {
            let d = total_degree(e);
            if d <= order {
                buckets[d as usize].push((e, c));
            }
        }
        let mut acc: HashMap<Exponents, Rational> = HashMap::new();
        for (ea, ca) in &self.terms {
            let da = total_degree(ea);
            if da > order {
                continue;
            }
            for bucket in &buckets[..=(order - da) as usize] {
                for (eb, cb) in bucket {
                    let e: Exponents = ea.iter().zip(eb.iter()).map(|(a, b)| a + b).collect();
                    if !caps_ok(&out.caps, &e) {
                        continue;
                    }
                    let prod = ca * *cb;
                    match acc.get_mut(&e) {
                        Some(v) => *v += prod,
                        None => {
                            acc.insert(e, prod);
                        }
                    }
                }
            }
        }
        out.terms = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        Ok(out)
    }

    pub fn pow(&self, k: u32) -> MultiSeries {
        let mut acc = self.one_like();
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Multiplicative inverse up to the truncation order.
    pub fn inverse(&self) -> Result<MultiSeries> {
        let c0 = self.constant_term();
        if c0.is_zero() {
            return Err(Error::ZeroConstantTerm("series inverse".into()));
        }
        let inv0 = c0.recip();
        let mut h = self.scalar_mul(&inv0);
        h.add_term(vec![0; self.nvars()], -Rational::one());
        // 1/(1+h) = 1 - h(1 - h(1 - ...)); each pass fixes one more degree.
        let one = self.one_like();
        let mut r = one.clone();
        for _ in 0..self.order {
            r = &one - &(&h * &r);
        }
        Ok(r.scalar_mul(&inv0))
    }

    /// Substitutes `x_j := g[j]` with truncated-series semantics.
    ///
    /// Each `g[j] - center_j` must have zero constant term, so that terms of
    /// `self` above its truncation cannot reach the retained window. The
    /// result lives in the space of the `g`; its order is the smallest of the
    /// `g` orders and `self.order`. A cap on `x_j` carries over to variable
    /// `w` when `g[j]` is exactly the coordinate `w`, and otherwise limits
    /// the result's total order.
    pub fn compose(&self, g: &[MultiSeries]) -> Result<MultiSeries> {
        let subs = self.prepare_substitution(g)?;
        for (j, s) in subs.iter().enumerate() {
            if !s.constant_term().is_zero() {
                return Err(Error::NonzeroConstantTerm(j));
            }
        }
        let mut target = target_space(g);
        target.order = target.order.min(self.order);
        for (j, cap) in self.caps.iter().enumerate() {
            let Some(cap) = *cap else { continue };
            match pure_variable(&subs[j]) {
                Some(w) => target.caps[w] = min_cap(target.caps[w], Some(cap)),
                None => target.order = target.order.min(cap),
            }
        }
        let subs: Vec<MultiSeries> = subs
            .into_iter()
            .map(|s| s.reshaped(target.order, &target.caps))
            .collect();
        Ok(self.horner(&subs, &target))
    }

    /// Substitution treating `self` as an exact polynomial; constant terms
    /// in `g` are allowed. Exact for the stored representative only.
    pub fn compose_polynomial(&self, g: &[MultiSeries]) -> Result<MultiSeries> {
        let subs = self.prepare_substitution(g)?;
        let target = target_space(g);
        Ok(self.horner(&subs, &target))
    }

    fn prepare_substitution(&self, g: &[MultiSeries]) -> Result<Vec<MultiSeries>> {
        if g.len() != self.nvars() {
            return Err(Error::DimensionMismatch {
                expected: self.nvars(),
                found: g.len(),
            });
        }
        if g.is_empty() {
            return Err(Error::Incompatible("empty substitution".into()));
        }
        for gi in &g[1..] {
            if !gi.same_space(&g[0]) {
                return Err(Error::Incompatible("substituted series live in different spaces".into()));
            }
        }
        Ok(g.iter()
            .zip(self.center.iter())
            .map(|(gi, c)| {
                let mut s = gi.clone();
                s.add_term(vec![0; gi.nvars()], -c);
                s
            })
            .collect())
    }

    fn reshaped(mut self, order: u32, caps: &[Option<u32>]) -> MultiSeries {
        self.order = order;
        self.caps = caps.to_vec();
        self.retain_kept();
        self
    }

    fn horner(&self, subs: &[MultiSeries], target: &MultiSeries) -> MultiSeries {
        let terms: Vec<(&Exponents, &Rational)> = self.terms.iter().collect();
        let mut powers: Vec<Vec<MultiSeries>> = vec![Vec::new(); subs.len()];
        horner_rec(&terms, 0, subs, target, &mut powers)
    }

    pub fn partial_derivative(&self, var: usize) -> MultiSeries {
        let mut out = self.zero_like();
        out.order = self.order.saturating_sub(1);
        if let Some(c) = out.caps[var] {
            out.caps[var] = Some(c.saturating_sub(1));
        }
        for (e, c) in &self.terms {
            if e[var] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[var] -= 1;
            out.add_term(e2, c * Rational::from_integer(BigInt::from(e[var])));
        }
        out
    }

    pub fn partial_derivative_by(&self, name: &str) -> Result<MultiSeries> {
        Ok(self.partial_derivative(self.var_index(name)?))
    }

    /// Coefficient of `(x_var - c)^k`, as a series in the same space with
    /// that variable's exponent set to zero.
    pub fn coefficient_in(&self, var: usize, k: u32) -> MultiSeries {
        let mut out = self.zero_like();
        out.order = self.order.saturating_sub(k);
        for (e, c) in &self.terms {
            if e[var] == k {
                let mut e2 = e.clone();
                e2[var] = 0;
                out.add_term(e2, c.clone());
            }
        }
        out
    }

    /// Multiplies by `(x_var - c)^k`; the known order grows by `k`.
    pub fn shift_in(&self, var: usize, k: u32) -> MultiSeries {
        let mut out = self.zero_with_order(self.order + k);
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            e2[var] += k;
            out.add_term(e2, c.clone());
        }
        out
    }

    /// Taylor re-expansion of the stored polynomial about `new_center`.
    pub fn recenter(&self, new_center: &[Rational]) -> Result<MultiSeries> {
        let target = self.zero_like().with_center(new_center.to_vec())?;
        let g: Vec<MultiSeries> = (0..self.nvars()).map(|i| target.var_like(i)).collect();
        let mut out = self.compose_polynomial(&g)?;
        out.order = self.order;
        out.caps = self.caps.clone();
        out.retain_kept();
        Ok(out)
    }

    /// Exact value of the stored polynomial at `point`.
    pub fn evaluate(&self, point: &[Rational]) -> Result<Rational> {
        if point.len() != self.nvars() {
            return Err(Error::DimensionMismatch {
                expected: self.nvars(),
                found: point.len(),
            });
        }
        let shifted: Vec<Rational> = point.iter().zip(self.center.iter()).map(|(x, c)| x - c).collect();
        let mut acc = Rational::zero();
        for (e, c) in &self.terms {
            let mut m = c.clone();
            for (x, &k) in shifted.iter().zip(e) {
                if k > 0 {
                    m *= num_traits::pow(x.clone(), k as usize);
                }
            }
            acc += m;
        }
        Ok(acc)
    }

    /// Re-expresses this series in a larger variable set, matched by name.
    ///
    /// The target supplies the variable list, center, order and caps; shared
    /// variables must agree on the center coordinate.
    pub fn embed(&self, target: &MultiSeries) -> Result<MultiSeries> {
        let mut map = Vec::with_capacity(self.nvars());
        for (i, v) in self.vars.iter().enumerate() {
            let j = target.var_index(v)?;
            if target.center[j] != self.center[i] {
                return Err(Error::Incompatible(format!("center of `{v}` differs")));
            }
            map.push(j);
        }
        let mut out = target.zero_like();
        out.order = out.order.min(self.order);
        for (i, &j) in map.iter().enumerate() {
            out.caps[j] = min_cap(out.caps[j], self.caps[i]);
        }
        for (e, c) in &self.terms {
            let mut e2 = vec![0; target.nvars()];
            for (i, &j) in map.iter().enumerate() {
                e2[j] = e[i];
            }
            out.add_term(e2, c.clone());
        }
        Ok(out)
    }

    /// Per-degree supremum `C_k = max |a_I|_p` over total degree `k`.
    pub fn coeff_sup(&self, ctx: &Context) -> CoeffSup {
        let mut values = vec![Valuation::Infinity; self.order as usize + 1];
        for (e, c) in &self.terms {
            let k = total_degree(e) as usize;
            values[k] = values[k].min(ctx.valuation(c));
        }
        CoeffSup { values }
    }

    /// Evidence for or against convergence on the ball of radius `p^e`.
    ///
    /// Looks at the valuations of `C_k r^k` for `1 ≤ k ≤ order`. The verdict
    /// is CONSISTENT when the largest term in the upper half of the window
    /// is strictly smaller than the largest term in the lower half, and
    /// DIVERGENCE-WITNESS otherwise, naming the upper-half index attaining
    /// the maximum. Nothing is claimed about degrees beyond the window.
    pub fn converges_on_ball(&self, radius_exponent: i64, ctx: &Context) -> Certificate {
        let sup = self.coeff_sup(ctx);
        let scaled: Vec<Valuation> = sup
            .values
            .iter()
            .enumerate()
            .map(|(k, v)| *v + (-(k as i64) * radius_exponent))
            .collect();
        let order = self.order as usize;
        let sequence: Vec<Level> = scaled.iter().map(|v| Level::from(*v)).collect();
        let window_note = format!("verdict at truncation order {order}; tail beyond it unverified");
        if order < 2 {
            let mut cert = Certificate::from_checks("convergence-on-ball", Vec::new())
                .with_note(window_note)
                .with_note("window too short to observe decay");
            cert.verdict = Verdict::Consistent;
            cert.sequence = sequence;
            return cert;
        }
        let half = order / 2;
        let lower = scaled[1..=half].iter().copied().min().unwrap_or(Valuation::Infinity);
        let mut checks = Vec::new();
        for (k, v) in scaled.iter().enumerate().skip(half + 1) {
            // strictly smaller absolute value: valuation at least lower + 1
            checks.push(Check::new(k as u64, None, Level::from(*v), Level::from(lower + 1)));
        }
        let witness = checks
            .iter()
            .filter(|c| !c.holds)
            .min_by(|a, b| a.observed.cmp(&b.observed).then(a.index.cmp(&b.index)))
            .cloned();
        let mut cert = Certificate::from_checks("convergence-on-ball", checks).with_note(window_note);
        cert.verdict = if witness.is_some() {
            Verdict::DivergenceWitness
        } else {
            Verdict::Consistent
        };
        cert.first_violation = witness;
        cert.sequence = sequence;
        cert
    }

    /// `exp(x) = Σ x^j / j!` in one variable.
    pub fn exp_series(var: &str, order: u32) -> MultiSeries {
        let mut coeffs = Vec::with_capacity(order as usize + 1);
        let mut fact = BigInt::one();
        for j in 0..=order {
            if j > 0 {
                fact *= BigInt::from(j);
            }
            coeffs.push(Rational::new(BigInt::one(), fact.clone()));
        }
        MultiSeries::univariate(var, &coeffs, order)
    }

    /// `log(1+x) = Σ_{j≥1} (-1)^(j+1) x^j / j` in one variable.
    pub fn log1p_series(var: &str, order: u32) -> MultiSeries {
        let coeffs: Vec<Rational> = (0..=order as i64)
            .map(|j| match j {
                0 => Rational::zero(),
                _ if j % 2 == 1 => Rational::new(BigInt::one(), BigInt::from(j)),
                _ => Rational::new(-BigInt::one(), BigInt::from(j)),
            })
            .collect();
        MultiSeries::univariate(var, &coeffs, order)
    }
}

fn keeps(order: u32, caps: &[Option<u32>], e: &[u32]) -> bool {
    total_degree(e) <= order && caps_ok(caps, e)
}

fn caps_ok(caps: &[Option<u32>], e: &[u32]) -> bool {
    caps.iter().zip(e).all(|(c, &k)| c.is_none_or(|c| k <= c))
}

fn target_space(g: &[MultiSeries]) -> MultiSeries {
    let mut t = g[0].zero_like();
    for gi in &g[1..] {
        t.order = t.order.min(gi.order);
        for (a, b) in t.caps.iter_mut().zip(&gi.caps) {
            *a = min_cap(*a, *b);
        }
    }
    t
}

/// If `s` is exactly one local coordinate, its index.
fn pure_variable(s: &MultiSeries) -> Option<usize> {
    if s.terms.len() != 1 {
        return None;
    }
    let (e, c) = s.terms.iter().next()?;
    if !c.is_one() || total_degree(e) != 1 {
        return None;
    }
    e.iter().position(|&k| k == 1)
}

fn horner_rec(
    terms: &[(&Exponents, &Rational)],
    var: usize,
    subs: &[MultiSeries],
    target: &MultiSeries,
    powers: &mut [Vec<MultiSeries>],
) -> MultiSeries {
    if terms.is_empty() {
        return target.zero_like();
    }
    if var == subs.len() {
        let c: Rational = terms.iter().map(|(_, c)| (*c).clone()).sum();
        return target.constant_like(c);
    }
    // Terms are sorted lexicographically, so equal prefixes are contiguous
    // and their `var` exponents ascend.
    let mut groups: Vec<(u32, &[(&Exponents, &Rational)])> = Vec::new();
    let mut start = 0;
    for i in 1..=terms.len() {
        if i == terms.len() || terms[i].0[var] != terms[start].0[var] {
            groups.push((terms[start].0[var], &terms[start..i]));
            start = i;
        }
    }
    let mut acc = target.zero_like();
    let mut prev: Option<u32> = None;
    for (deg, group) in groups.into_iter().rev() {
        let inner = horner_rec(group, var + 1, subs, target, powers);
        acc = match prev {
            None => inner,
            Some(p) => &(&acc * &power_of(subs, var, p - deg, target, powers)) + &inner,
        };
        prev = Some(deg);
    }
    match prev {
        Some(p) if p > 0 => &acc * &power_of(subs, var, p, target, powers),
        _ => acc,
    }
}

fn power_of(
    subs: &[MultiSeries],
    var: usize,
    k: u32,
    target: &MultiSeries,
    powers: &mut [Vec<MultiSeries>],
) -> MultiSeries {
    let cache = &mut powers[var];
    if cache.is_empty() {
        cache.push(target.one_like());
    }
    while cache.len() <= k as usize {
        let next = &cache[cache.len() - 1] * &subs[var];
        cache.push(next);
    }
    cache[k as usize].clone()
}

/// `C_0 … C_D` as valuations; `Infinity` marks an all-zero degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoeffSup {
    pub values: Vec<Valuation>,
}

impl CoeffSup {
    /// The suprema as absolute-value exponents (`None` for zero markers).
    pub fn abs_exponents(&self) -> Vec<Option<i64>> {
        self.values.iter().map(|v| v.abs_exponent()).collect()
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait<&MultiSeries> for &MultiSeries {
            type Output = MultiSeries;

            /// Panics if the operands live in different spaces.
            fn $method(self, rhs: &MultiSeries) -> MultiSeries {
                self.$checked(rhs).expect("incompatible series operands")
            }
        }

        impl $trait<MultiSeries> for MultiSeries {
            type Output = MultiSeries;

            fn $method(self, rhs: MultiSeries) -> MultiSeries {
                (&self).$checked(&rhs).expect("incompatible series operands")
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);

impl Neg for &MultiSeries {
    type Output = MultiSeries;

    fn neg(self) -> MultiSeries {
        self.neg_ref()
    }
}

impl Neg for MultiSeries {
    type Output = MultiSeries;

    fn neg(self) -> MultiSeries {
        self.neg_ref()
    }
}

impl fmt::Display for MultiSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0 + O({})", self.order + 1);
        }
        let mut first = true;
        let mut by_degree: Vec<(&Exponents, &Rational)> = self.terms.iter().collect();
        by_degree.sort_by_key(|(e, _)| total_degree(e));
        for (e, c) in by_degree {
            let neg = c.is_negative();
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            first = false;
            let mag = c.abs();
            let mono: Vec<String> = e
                .iter()
                .zip(self.vars.iter())
                .filter(|(k, _)| **k > 0)
                .map(|(k, v)| if *k == 1 { v.clone() } else { format!("{v}^{k}") })
                .collect();
            if mono.is_empty() {
                f.write_str(&format_rational(&mag))?;
            } else if mag.is_one() {
                f.write_str(&mono.join("*"))?;
            } else {
                write!(f, "{}*{}", format_rational(&mag), mono.join("*"))?;
            }
        }
        write!(f, " + O({})", self.order + 1)
    }
}
