//! Differential forms and vector fields in a single chart.
//!
//! Coefficients are [`MultiSeries`]. The first `dim` variables of the
//! coefficient space are the chart coordinates `x_1 … x_dim`; any further
//! variables (such as a time parameter `t`) are parameters that `d`, `ι` and
//! pullbacks treat as constants. A k-form is stored on strictly increasing
//! index subsets `S`, one coefficient series per subset.
//!
//! Matrix convention for 2-forms: `M_ij = a_{ij}` for `i < j` and
//! `M_ji = -a_{ij}`, so that `ι_X ω` is the covector `-M X`.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::{self, QMatrix};
use crate::padic::{Context, Rational, Valuation};
use crate::series::MultiSeries;

pub type Subset = Vec<usize>;

/// Sorts `idx` in place and returns the permutation sign, or `None` when an
/// index repeats.
fn canonicalize(idx: &mut [usize]) -> Option<bool> {
    let mut negative = false;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            negative = !negative;
            j -= 1;
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(negative)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KForm {
    dim: usize,
    degree: usize,
    template: MultiSeries,
    terms: BTreeMap<Subset, MultiSeries>,
}

impl KForm {
    pub fn zero(template: &MultiSeries, dim: usize, degree: usize) -> Result<KForm> {
        if dim > template.nvars() {
            return Err(Error::DimensionMismatch {
                expected: template.nvars(),
                found: dim,
            });
        }
        if degree > dim {
            return Err(Error::InvalidDegree(degree));
        }
        Ok(KForm {
            dim,
            degree,
            template: template.zero_like(),
            terms: BTreeMap::new(),
        })
    }

    /// The function `f` as a 0-form on the first `dim` coordinates.
    pub fn function(f: MultiSeries, dim: usize) -> Result<KForm> {
        let mut out = KForm::zero(&f, dim, 0)?;
        out.add_term(Vec::new(), f)?;
        Ok(out)
    }

    /// `dx_{i_1} ∧ … ∧ dx_{i_k}` with unit coefficient.
    pub fn basis(template: &MultiSeries, dim: usize, subset: &[usize]) -> Result<KForm> {
        let mut out = KForm::zero(template, dim, subset.len())?;
        out.add_term(subset.to_vec(), template.one_like())?;
        Ok(out)
    }

    /// `Σ_i dx_{2i} ∧ dx_{2i+1}` on `dim` coordinates ordered `(x1, y1, x2, y2, …)`.
    pub fn standard_symplectic(template: &MultiSeries, dim: usize) -> Result<KForm> {
        if !dim.is_multiple_of(2) {
            return Err(Error::InvalidDegree(dim));
        }
        let mut out = KForm::zero(template, dim, 2)?;
        for i in (0..dim).step_by(2) {
            out.add_term(vec![i, i + 1], template.one_like())?;
        }
        Ok(out)
    }

    /// Adds `coeff · dx_S`; `subset` need not be sorted.
    pub fn add_term(&mut self, subset: Subset, coeff: MultiSeries) -> Result<()> {
        if subset.len() != self.degree {
            return Err(Error::InvalidDegree(subset.len()));
        }
        if subset.iter().any(|&i| i >= self.dim) {
            return Err(Error::Incompatible(format!("index out of range in {subset:?}")));
        }
        if !coeff.same_space(&self.template) {
            return Err(Error::Incompatible("coefficient space differs from form".into()));
        }
        let mut subset = subset;
        let Some(negative) = canonicalize(&mut subset) else {
            return Ok(());
        };
        let coeff = if negative { -coeff } else { coeff };
        if coeff.order() < self.template.order()
            || coeff.caps().iter().zip(self.template.caps()).any(|(a, b)| a.is_some() && (b.is_none() || a < b))
        {
            self.template = self.template.truncate_like(&coeff);
            for c in self.terms.values_mut() {
                *c = c.truncate_like(&coeff);
            }
            self.terms.retain(|_, c| !c.is_zero());
        }
        let coeff = coeff.truncate_like(&self.template);
        let sum = match self.terms.remove(&subset) {
            Some(old) => &old + &coeff,
            None => coeff,
        };
        if !sum.is_zero() {
            self.terms.insert(subset, sum);
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn order(&self) -> u32 {
        self.template.order()
    }

    /// A zero series in the coefficient space.
    pub fn template(&self) -> &MultiSeries {
        &self.template
    }

    pub fn coordinates(&self) -> &[String] {
        &self.template.vars()[..self.dim]
    }

    pub fn coefficient(&self, subset: &[usize]) -> MultiSeries {
        self.terms
            .get(subset)
            .cloned()
            .unwrap_or_else(|| self.template.zero_like())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Subset, &MultiSeries)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Same nonzero coefficients, ignoring truncation metadata.
    pub fn same_terms(&self, other: &KForm) -> bool {
        self.degree == other.degree
            && self.terms.len() == other.terms.len()
            && self
                .terms
                .iter()
                .all(|(s, c)| other.terms.get(s).is_some_and(|d| c.same_terms(d)))
    }

    /// Largest `|coefficient|_p` over all terms, as a valuation.
    pub fn max_abs_valuation(&self, ctx: &Context) -> Valuation {
        self.terms
            .values()
            .map(|c| c.max_abs_valuation(ctx))
            .min()
            .unwrap_or(Valuation::Infinity)
    }

    pub fn nonzero_terms(&self) -> usize {
        self.terms.values().map(MultiSeries::len).sum()
    }

    fn check_compatible(&self, other: &KForm) -> Result<()> {
        if self.dim != other.dim || !self.template.same_space(&other.template) {
            return Err(Error::Incompatible("forms live in different spaces".into()));
        }
        Ok(())
    }

    fn empty_like(&self, degree: usize) -> KForm {
        KForm {
            dim: self.dim,
            degree,
            template: self.template.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn checked_add(&self, other: &KForm) -> Result<KForm> {
        self.check_compatible(other)?;
        if self.degree != other.degree {
            return Err(Error::Incompatible(format!(
                "degrees {} and {}",
                self.degree, other.degree
            )));
        }
        let mut out = self.clone();
        if other.is_zero() {
            out.template = out.template.truncate_like(&other.template);
            for c in out.terms.values_mut() {
                *c = c.truncate_like(&other.template);
            }
            out.terms.retain(|_, c| !c.is_zero());
        }
        for (s, c) in &other.terms {
            out.add_term(s.clone(), c.clone())?;
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &KForm) -> Result<KForm> {
        self.checked_add(&other.neg())
    }

    pub fn neg(&self) -> KForm {
        self.map_coefficients(|c| -c)
    }

    pub fn scale(&self, k: &Rational) -> KForm {
        self.map_coefficients(|c| c.scalar_mul(k))
    }

    /// `f · a` for a function `f` in the coefficient space.
    pub fn mul_function(&self, f: &MultiSeries) -> Result<KForm> {
        if !f.same_space(&self.template) {
            return Err(Error::Incompatible("function space differs from form".into()));
        }
        let mut out = self.empty_like(self.degree);
        out.template = out.template.truncate_like(f);
        for (s, c) in &self.terms {
            out.add_term(s.clone(), c * f)?;
        }
        Ok(out)
    }

    pub fn map_coefficients<F>(&self, f: F) -> KForm
    where
        F: Fn(&MultiSeries) -> MultiSeries,
    {
        let mut out = self.empty_like(self.degree);
        for (s, c) in &self.terms {
            let c2 = f(c);
            if !c2.is_zero() {
                out.terms.insert(s.clone(), c2);
            }
        }
        out
    }

    pub fn truncate(&self, order: u32) -> KForm {
        let mut out = self.map_coefficients(|c| c.clone().truncate(order));
        out.template = out.template.truncate(order);
        out
    }

    /// Moves the coefficients into a larger space; the target's first `dim`
    /// variables must be this form's coordinates, in order.
    pub fn embed(&self, target: &MultiSeries) -> Result<KForm> {
        if target.vars().len() < self.dim || target.vars()[..self.dim] != *self.coordinates() {
            return Err(Error::Incompatible("embedding must keep the coordinates first".into()));
        }
        let mut out = KForm::zero(&self.template.embed(target)?, self.dim, self.degree)?;
        for (s, c) in &self.terms {
            out.add_term(s.clone(), c.embed(target)?)?;
        }
        Ok(out)
    }

    pub fn wedge(&self, other: &KForm) -> Result<KForm> {
        self.check_compatible(other)?;
        if self.degree + other.degree > self.dim {
            return Ok(self.empty_like(self.dim.min(self.degree + other.degree)));
        }
        let mut out = self.empty_like(self.degree + other.degree);
        out.template = out.template.truncate_like(&other.template);
        for (s, a) in &self.terms {
            for (t, b) in &other.terms {
                let mut idx: Subset = s.iter().chain(t.iter()).copied().collect();
                if canonicalize(&mut idx).is_none() {
                    continue;
                }
                let mut joined = s.clone();
                joined.extend(t);
                out.add_term(joined, a * b)?;
            }
        }
        Ok(out)
    }

    /// Exterior derivative in the chart coordinates; order drops by one.
    pub fn exterior_d(&self) -> KForm {
        let degree = (self.degree + 1).min(self.dim);
        let mut out = self.empty_like(degree);
        out.template = self.template.partial_derivative(0).zero_like();
        if self.degree == self.dim {
            return out;
        }
        for (s, a) in &self.terms {
            for i in 0..self.dim {
                if s.contains(&i) {
                    continue;
                }
                let da = a.partial_derivative(i);
                if da.is_zero() {
                    continue;
                }
                let mut idx = vec![i];
                idx.extend(s);
                out.add_term(idx, da).expect("same space");
            }
        }
        out
    }

    /// Interior product `ι_X`, inserting `X` into the first slot.
    pub fn contract(&self, x: &VectorField) -> Result<KForm> {
        if self.degree == 0 {
            return Err(Error::InvalidDegree(0));
        }
        x.check_against(self)?;
        let mut out = self.empty_like(self.degree - 1);
        out.template = out.template.truncate_like(&x.template());
        for (s, a) in &self.terms {
            for (r, &i) in s.iter().enumerate() {
                let c = &x.components[i] * a;
                let c = if r % 2 == 1 { -c } else { c };
                let rest: Subset = s.iter().copied().filter(|&j| j != i).collect();
                out.add_term(rest, c)?;
            }
        }
        Ok(out)
    }

    /// `L_X a = ι_X da + d ι_X a`.
    pub fn lie_derivative(&self, x: &VectorField) -> Result<KForm> {
        x.check_against(self)?;
        let first = if self.degree == self.dim {
            self.empty_like(self.degree)
        } else {
            self.exterior_d().contract(x)?
        };
        if self.degree == 0 {
            return Ok(first);
        }
        first.checked_add(&self.contract(x)?.exterior_d())
    }

    /// Pullback along `x_i = map[i](u)`.
    ///
    /// The map components live in the source space, whose first
    /// `source_dim` variables are the source coordinates. Parameter
    /// variables of this form (those after the coordinates) must appear by
    /// name in the source space and are substituted by themselves.
    pub fn pullback(&self, map: &[MultiSeries], source_dim: usize) -> Result<KForm> {
        if map.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: map.len(),
            });
        }
        let source = map
            .first()
            .ok_or_else(|| Error::Incompatible("empty map".into()))?
            .zero_like();
        let mut subs: Vec<MultiSeries> = map.to_vec();
        for name in &self.template.vars()[self.dim..] {
            subs.push(source.var_like(source.var_index(name)?));
        }
        let jac: Vec<KForm> = map
            .iter()
            .map(|m| KForm::function(m.clone(), source_dim).map(|f| f.exterior_d()))
            .collect::<Result<_>>()?;
        let mut out: Option<KForm> = None;
        for (s, a) in &self.terms {
            let coeff = a.compose(&subs)?;
            let mut piece = KForm::function(coeff, source_dim)?;
            for &i in s {
                piece = piece.wedge(&jac[i].conformed(&piece)?)?;
            }
            out = Some(match out {
                None => piece,
                Some(acc) => acc.conformed(&piece)?.checked_add(&piece.conformed(&acc)?)?,
            });
        }
        match out {
            Some(f) => Ok(f),
            None => {
                let mut z = KForm::zero(&source, source_dim, self.degree)?;
                let composed_order = self.template.compose(&subs)?.order();
                let d_order = if self.degree > 0 {
                    source.order().saturating_sub(1)
                } else {
                    source.order()
                };
                z.template = z.template.truncate(composed_order.min(d_order));
                Ok(z)
            }
        }
    }

    /// Pullback along the linear change `x = c + P (u - c)` of the chart
    /// coordinates, keeping the truncation order.
    pub fn pullback_linear(&self, p: &QMatrix) -> Result<KForm> {
        let n = self.dim;
        if p.len() != n || p.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: p.len(),
            });
        }
        let t = &self.template;
        let mut subs = Vec::with_capacity(t.nvars());
        for (i, row) in p.iter().enumerate() {
            let mut s = t.constant_like(t.center()[i].clone());
            for (j, c) in row.iter().enumerate() {
                if !c.is_zero() {
                    s = &s + &t.local_var_like(j).scalar_mul(c);
                }
            }
            subs.push(s);
        }
        subs.extend((n..t.nvars()).map(|i| t.var_like(i)));
        let mut dx = Vec::with_capacity(n);
        for row in p {
            let mut f = KForm::zero(t, n, 1)?;
            for (j, c) in row.iter().enumerate() {
                f.add_term(vec![j], t.constant_like(c.clone()))?;
            }
            dx.push(f);
        }
        let mut out = self.empty_like(self.degree);
        for (s, a) in &self.terms {
            let mut piece = KForm::function(a.compose(&subs)?, n)?;
            for &i in s {
                piece = piece.wedge(&dx[i])?;
            }
            out = out.checked_add(&piece)?;
        }
        Ok(out)
    }

    /// Same form truncated to be compatible with `other`'s order and caps.
    fn conformed(&self, other: &KForm) -> Result<KForm> {
        if !self.template.same_space(&other.template) {
            return Err(Error::Incompatible("forms live in different spaces".into()));
        }
        let mut out = self.map_coefficients(|c| c.truncate_like(&other.template));
        out.template = self.template.truncate_like(&other.template);
        Ok(out)
    }

    pub fn two_form_matrix(&self) -> Result<FormMatrix> {
        if self.degree != 2 {
            return Err(Error::InvalidDegree(self.degree));
        }
        let n = self.dim;
        let z = self.template.zero_like();
        let mut entries = vec![vec![z; n]; n];
        for (s, a) in &self.terms {
            entries[s[0]][s[1]] = a.clone();
            entries[s[1]][s[0]] = -a;
        }
        Ok(FormMatrix {
            entries,
            skew: true,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorField {
    pub components: Vec<MultiSeries>,
}

impl VectorField {
    pub fn new(components: Vec<MultiSeries>) -> Result<VectorField> {
        if let Some(first) = components.first() {
            if components.iter().any(|c| !c.same_space(first)) {
                return Err(Error::Incompatible("field components in different spaces".into()));
            }
            if components.len() > first.nvars() {
                return Err(Error::DimensionMismatch {
                    expected: first.nvars(),
                    found: components.len(),
                });
            }
        }
        Ok(VectorField { components })
    }

    pub fn zero(template: &MultiSeries, dim: usize) -> VectorField {
        VectorField {
            components: vec![template.zero_like(); dim],
        }
    }

    /// `∂/∂x_i` as a constant field.
    pub fn coordinate(template: &MultiSeries, dim: usize, i: usize) -> VectorField {
        let mut f = VectorField::zero(template, dim);
        f.components[i] = template.one_like();
        f
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn template(&self) -> MultiSeries {
        let mut t = self.components[0].zero_like();
        for c in &self.components[1..] {
            t = t.truncate_like(c);
        }
        t
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(MultiSeries::is_zero)
    }

    fn check_against(&self, form: &KForm) -> Result<()> {
        if self.dim() != form.dim {
            return Err(Error::DimensionMismatch {
                expected: form.dim,
                found: self.dim(),
            });
        }
        if !self.components[0].same_space(&form.template) {
            return Err(Error::Incompatible("field and form live in different spaces".into()));
        }
        Ok(())
    }

    /// Directional derivative `X(f) = Σ X_i ∂_i f`.
    pub fn apply(&self, f: &MultiSeries) -> Result<MultiSeries> {
        let mut acc = f.partial_derivative(0).zero_like().truncate_like(&self.template());
        for (i, xi) in self.components.iter().enumerate() {
            acc = acc.checked_add(&xi.checked_mul(&f.partial_derivative(i))?)?;
        }
        Ok(acc)
    }

    pub fn map_components<F>(&self, f: F) -> VectorField
    where
        F: Fn(&MultiSeries) -> MultiSeries,
    {
        VectorField {
            components: self.components.iter().map(f).collect(),
        }
    }

    pub fn same_terms(&self, other: &VectorField) -> bool {
        self.components.len() == other.components.len()
            && self
                .components
                .iter()
                .zip(&other.components)
                .all(|(a, b)| a.same_terms(b))
    }

    pub fn max_abs_valuation(&self, ctx: &Context) -> Valuation {
        self.components
            .iter()
            .map(|c| c.max_abs_valuation(ctx))
            .min()
            .unwrap_or(Valuation::Infinity)
    }
}

/// Square matrix of series, the coordinate view of a 2-form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormMatrix {
    pub entries: Vec<Vec<MultiSeries>>,
    pub skew: bool,
}

impl FormMatrix {
    /// Checks skew-symmetry before setting the flag.
    pub fn new_skew(entries: Vec<Vec<MultiSeries>>) -> Result<FormMatrix> {
        let n = entries.len();
        if entries.iter().any(|r| r.len() != n) {
            return Err(Error::NotSkew);
        }
        for i in 0..n {
            if !entries[i][i].is_zero() {
                return Err(Error::NotSkew);
            }
            for j in 0..i {
                if !(&entries[i][j] + &entries[j][i]).is_zero() {
                    return Err(Error::NotSkew);
                }
            }
        }
        Ok(FormMatrix {
            entries,
            skew: true,
        })
    }

    pub fn general(entries: Vec<Vec<MultiSeries>>) -> FormMatrix {
        FormMatrix {
            entries,
            skew: false,
        }
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    /// Inverse of [`KForm::two_form_matrix`].
    pub fn to_two_form(&self) -> Result<KForm> {
        if !self.skew {
            return Err(Error::NotSkew);
        }
        let n = self.size();
        let template = self.entries[0][0].zero_like();
        let mut out = KForm::zero(&template, n, 2)?;
        for i in 0..n {
            for j in i + 1..n {
                out.add_term(vec![i, j], self.entries[i][j].clone())?;
            }
        }
        Ok(out)
    }

    pub fn constant_part(&self) -> QMatrix {
        self.entries
            .iter()
            .map(|r| r.iter().map(MultiSeries::constant_term).collect())
            .collect()
    }

    pub fn mul_vec(&self, v: &[MultiSeries]) -> Vec<MultiSeries> {
        self.entries
            .iter()
            .map(|row| {
                let mut acc = row[0].zero_like().truncate_like(&v[0]);
                for (a, b) in row.iter().zip(v) {
                    acc = &acc + &(a * b);
                }
                acc
            })
            .collect()
    }

    pub fn mul(&self, other: &FormMatrix) -> FormMatrix {
        let n = self.size();
        let entries = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let mut acc = self.entries[i][0].zero_like().truncate_like(&other.entries[0][j]);
                        for k in 0..n {
                            acc = &acc + &(&self.entries[i][k] * &other.entries[k][j]);
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        FormMatrix::general(entries)
    }

    pub fn add(&self, other: &FormMatrix) -> FormMatrix {
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(r, s)| r.iter().zip(s).map(|(a, b)| a + b).collect())
            .collect();
        FormMatrix {
            entries,
            skew: self.skew && other.skew,
        }
    }

    /// Entrywise product with a scalar series.
    pub fn scale_by(&self, f: &MultiSeries) -> FormMatrix {
        FormMatrix {
            entries: self
                .entries
                .iter()
                .map(|r| r.iter().map(|a| a * f).collect())
                .collect(),
            skew: self.skew,
        }
    }

    fn from_constant(m: &QMatrix, template: &MultiSeries) -> FormMatrix {
        FormMatrix::general(
            m.iter()
                .map(|r| r.iter().map(|x| template.constant_like(x.clone())).collect())
                .collect(),
        )
    }

    /// Inverse over the truncated series ring, expanding about the constant
    /// part: `N^{-1} = Σ_k (-E)^k N_0^{-1}` with `E = N_0^{-1}(N - N_0)`.
    pub fn inverse(&self) -> Result<FormMatrix> {
        let n = self.size();
        let template = self.entries[0][0].zero_like();
        let n0 = self.constant_part();
        let n0_inv = linalg::inverse(&n0)?;
        let n0_inv_m = FormMatrix::from_constant(&n0_inv, &template);
        let minus_n0 = FormMatrix::from_constant(&linalg::scale(&n0, &-Rational::one()), &template);
        let e = n0_inv_m.mul(&self.add(&minus_n0));
        let id = FormMatrix::from_constant(&linalg::identity(n), &template);
        let mut r = id.clone();
        for _ in 0..template.order() {
            let er = e.mul(&r);
            r = id.add(&er.scale_by(&template.constant_like(-Rational::one())));
        }
        Ok(r.mul(&n0_inv_m))
    }
}

impl Default for FormMatrix {
    fn default() -> Self {
        FormMatrix {
            entries: Vec::new(),
            skew: true,
        }
    }
}

/// Zero check helper used by residual tables.
pub fn is_zero_rational(x: &Rational) -> bool {
    x.is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::int;

    fn xy(order: u32) -> MultiSeries {
        MultiSeries::new(["x", "y"], order).unwrap()
    }

    fn dx(t: &MultiSeries) -> KForm {
        KForm::basis(t, 2, &[0]).unwrap()
    }

    fn dy(t: &MultiSeries) -> KForm {
        KForm::basis(t, 2, &[1]).unwrap()
    }

    #[test]
    fn wedge_examples() {
        let t = xy(4);
        let w = dx(&t).wedge(&dy(&t)).unwrap();
        assert!(w.same_terms(&KForm::basis(&t, 2, &[0, 1]).unwrap()));
        assert!(dx(&t).wedge(&dx(&t)).unwrap().is_zero());
        let x = t.local_var_like(0);
        let y = t.local_var_like(1);
        let a = dy(&t).mul_function(&x).unwrap();
        let b = dx(&t).mul_function(&y).unwrap();
        let w = a.wedge(&b).unwrap();
        assert_eq!(w.coefficient(&[0, 1]), -(&x * &y));
    }

    #[test]
    fn d_examples() {
        let t = xy(4);
        let x = t.local_var_like(0);
        let a = dy(&t).mul_function(&x).unwrap();
        let da = a.exterior_d();
        assert_eq!(da.degree(), 2);
        assert!(da.coefficient(&[0, 1]).same_terms(&t.one_like()));
        assert_eq!(da.order(), 3);
    }

    #[test]
    fn contract_examples() {
        let t = xy(4);
        let w = KForm::basis(&t, 2, &[0, 1]).unwrap();
        let dxdy_x = w.contract(&VectorField::coordinate(&t, 2, 0)).unwrap();
        assert!(dxdy_x.same_terms(&dy(&t)));
        assert_eq!(KForm::function(t.one_like(), 2).unwrap().contract(&VectorField::zero(&t, 2)), Err(Error::InvalidDegree(0)));

        let c = int(7);
        let radial = VectorField::new(vec![t.var_like(0), t.var_like(1)]).unwrap();
        let got = w.scale(&c).contract(&radial).unwrap();
        let expected = dy(&t)
            .mul_function(&t.var_like(0))
            .unwrap()
            .checked_sub(&dx(&t).mul_function(&t.var_like(1)).unwrap())
            .unwrap()
            .scale(&c);
        assert!(got.same_terms(&expected));
    }

    #[test]
    fn lie_examples() {
        let t = xy(4);
        let x = t.local_var_like(0);
        let a = KForm::basis(&t, 2, &[0, 1]).unwrap().mul_function(&x).unwrap();
        let l = a.lie_derivative(&VectorField::coordinate(&t, 2, 0)).unwrap();
        assert!(l.same_terms(&KForm::basis(&t, 2, &[0, 1]).unwrap()));
        let const_form = dx(&t).scale(&int(3));
        let field = VectorField::new(vec![t.constant_like(int(2)), t.constant_like(int(-1))]).unwrap();
        assert!(const_form.lie_derivative(&field).unwrap().is_zero());
    }

    #[test]
    fn matrix_round_trip_and_contract_convention() {
        let t = xy(3);
        let w = KForm::basis(&t, 2, &[0, 1]).unwrap();
        let m = w.two_form_matrix().unwrap();
        assert!(m.entries[0][1].same_terms(&t.one_like()));
        assert!(m.entries[1][0].same_terms(&-t.one_like()));
        assert!(m.to_two_form().unwrap().same_terms(&w));
        let z = KForm::zero(&t, 2, 2).unwrap();
        assert!(z.two_form_matrix().unwrap().entries.iter().flatten().all(MultiSeries::is_zero));

        let bad = FormMatrix::new_skew(vec![vec![t.zero_like(), t.one_like()], vec![t.one_like(), t.zero_like()]]);
        assert_eq!(bad, Err(Error::NotSkew));
        assert_eq!(FormMatrix::general(m.entries.clone()).to_two_form(), Err(Error::NotSkew));
    }

    #[test]
    fn pullback_identity_and_linear() {
        let t = xy(4);
        let f = &t.one_like() + &(&t.local_var_like(0) * &t.local_var_like(1));
        let w = KForm::basis(&t, 2, &[0, 1]).unwrap().mul_function(&f).unwrap();
        let id = vec![t.var_like(0), t.var_like(1)];
        let pb = w.pullback(&id, 2).unwrap();
        assert!(pb.same_terms(&w));

        let src = MultiSeries::new(["u", "v"], 4).unwrap();
        let (u, v) = (src.local_var_like(0), src.local_var_like(1));
        // x = 2u + 3v, y = u - v, det = -5
        let map = vec![&u.scalar_mul(&int(2)) + &v.scalar_mul(&int(3)), &u - &v];
        let pb = KForm::basis(&t, 2, &[0, 1]).unwrap().pullback(&map, 2).unwrap();
        assert!(pb.coefficient(&[0, 1]).same_terms(&src.constant_like(int(-5))));
    }

    #[test]
    fn linear_pullback_matches_general() {
        let t = xy(4);
        let f = &t.one_like() + &(&t.local_var_like(0) * &t.local_var_like(0));
        let w = KForm::basis(&t, 2, &[0, 1]).unwrap().mul_function(&f).unwrap();
        let p = vec![vec![int(2), int(1)], vec![int(0), int(3)]];
        let lin = w.pullback_linear(&p).unwrap();
        assert_eq!(lin.order(), 4);
        let map = vec![
            &t.local_var_like(0).scalar_mul(&int(2)) + &t.local_var_like(1),
            t.local_var_like(1).scalar_mul(&int(3)),
        ];
        let general = w.pullback(&map, 2).unwrap();
        assert!(lin.truncate(general.order()).same_terms(&general));
        let m = w.two_form_matrix().unwrap().constant_part();
        let pm = lin.two_form_matrix().unwrap().constant_part();
        assert_eq!(pm, linalg::mul(&linalg::transpose(&p), &linalg::mul(&m, &p)));
    }

    #[test]
    fn matrix_inverse_neumann() {
        let t = xy(5);
        let x = t.local_var_like(0);
        let m = FormMatrix::general(vec![
            vec![&t.one_like() + &x, t.constant_like(int(2))],
            vec![x.clone(), &t.constant_like(int(3)) - &(&x * &x)],
        ]);
        let inv = m.inverse().unwrap();
        let prod = m.mul(&inv);
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { t.one_like() } else { t.zero_like() };
                assert!(prod.entries[i][j].same_terms(&expect));
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn contraction_is_antisymmetric(a in proptest::collection::vec(-5i64..=5, 3), b in proptest::collection::vec(-5i64..=5, 2)) {
            // ι_X ι_X ω = 0 for a 2-form on three coordinates
            let t = MultiSeries::new(["x", "y", "z"], 4).unwrap();
            let mut w = KForm::zero(&t, 3, 2).unwrap();
            for (s, c) in [[0, 1], [0, 2], [1, 2]].iter().zip(&a) {
                w.add_term(s.to_vec(), &t.constant_like(int(*c)) + &t.local_var_like(2)).unwrap();
            }
            let x = VectorField::new(vec![t.constant_like(int(b[0])), t.local_var_like(0), t.constant_like(int(b[1]))]).unwrap();
            proptest::prop_assert!(w.contract(&x).unwrap().contract(&x).unwrap().is_zero());
        }
    }
}
