//! JSON interchange documents for series, forms, fields and reports.
//!
//! Integers are written as decimal strings so that their size is unbounded.
//! Term lists follow the sorted storage order, so identical objects always
//! serialize to identical bytes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::certificate::Certificate;
use crate::darboux::{DarbouxReport, Residual};
use crate::error::{Error, Result};
use crate::exterior::{KForm, VectorField};
use crate::linalg::QMatrix;
use crate::padic::{format_rational, parse_rational, Context, Rational};
use crate::salerno::SalernoReport;
use crate::series::MultiSeries;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermDoc {
    pub exponents: Vec<u32>,
    pub numerator: String,
    pub denominator: String,
}

impl TermDoc {
    fn from_term(e: &[u32], c: &Rational) -> TermDoc {
        TermDoc {
            exponents: e.to_vec(),
            numerator: c.numer().to_string(),
            denominator: c.denom().to_string(),
        }
    }

    fn value(&self) -> Result<Rational> {
        parse_rational(&format!("{}/{}", self.numerator, self.denominator))
    }
}

/// Shape shared by every series in a document.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceDoc {
    pub vars: Vec<String>,
    pub order: u32,
    pub center: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub caps: BTreeMap<String, u32>,
}

impl SpaceDoc {
    pub fn of(s: &MultiSeries) -> SpaceDoc {
        SpaceDoc {
            vars: s.vars().to_vec(),
            order: s.order(),
            center: s.center().iter().map(format_rational).collect(),
            caps: s
                .vars()
                .iter()
                .zip(s.caps())
                .filter_map(|(v, c)| c.map(|c| (v.clone(), c)))
                .collect(),
        }
    }

    pub fn template(&self) -> Result<MultiSeries> {
        let center = if self.center.is_empty() {
            vec![Rational::from_integer(0.into()); self.vars.len()]
        } else {
            self.center.iter().map(|c| parse_rational(c)).collect::<Result<_>>()?
        };
        let mut s = MultiSeries::new(self.vars.clone(), self.order)?.with_center(center)?;
        for (v, c) in &self.caps {
            s = s.with_cap(v, *c)?;
        }
        Ok(s)
    }

    fn series(&self, template: &MultiSeries, terms: &[TermDoc]) -> Result<MultiSeries> {
        let mut s = template.zero_like();
        for t in terms {
            if t.exponents.len() != self.vars.len() {
                return Err(Error::DimensionMismatch {
                    expected: self.vars.len(),
                    found: t.exponents.len(),
                });
            }
            s.add_term(t.exponents.clone(), t.value()?);
        }
        Ok(s)
    }
}

fn terms_of(s: &MultiSeries) -> Vec<TermDoc> {
    s.terms().map(|(e, c)| TermDoc::from_term(e, c)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
    #[serde(flatten)]
    pub space: SpaceDoc,
    pub terms: Vec<TermDoc>,
}

impl SeriesDoc {
    pub fn from_series(s: &MultiSeries, p: Option<u64>) -> SeriesDoc {
        SeriesDoc {
            p,
            space: SpaceDoc::of(s),
            terms: terms_of(s),
        }
    }

    pub fn to_series(&self) -> Result<MultiSeries> {
        let t = self.space.template()?;
        self.space.series(&t, &self.terms)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormTermDoc {
    pub subset: Vec<usize>,
    pub series: Vec<TermDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
    #[serde(flatten)]
    pub space: SpaceDoc,
    /// Number of chart coordinates; defaults to all variables.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    pub degree: usize,
    pub terms: Vec<FormTermDoc>,
}

impl FormDoc {
    pub fn from_form(f: &KForm, p: Option<u64>) -> FormDoc {
        let t = f.template();
        FormDoc {
            p,
            space: SpaceDoc::of(t),
            dim: (f.dim() != t.nvars()).then_some(f.dim()),
            degree: f.degree(),
            terms: f
                .terms()
                .map(|(s, c)| FormTermDoc {
                    subset: s.clone(),
                    series: terms_of(c),
                })
                .collect(),
        }
    }

    pub fn to_form(&self) -> Result<KForm> {
        let t = self.space.template()?;
        let dim = self.dim.unwrap_or(self.space.vars.len());
        let mut f = KForm::zero(&t, dim, self.degree)?;
        for term in &self.terms {
            f.add_term(term.subset.clone(), self.space.series(&t, &term.series)?)?;
        }
        Ok(f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldDoc {
    #[serde(flatten)]
    pub space: SpaceDoc,
    pub components: Vec<Vec<TermDoc>>,
}

impl FieldDoc {
    pub fn from_field(x: &VectorField) -> FieldDoc {
        FieldDoc {
            space: SpaceDoc::of(&x.template()),
            components: x.components.iter().map(terms_of).collect(),
        }
    }

    pub fn to_field(&self) -> Result<VectorField> {
        let t = self.space.template()?;
        VectorField::new(
            self.components
                .iter()
                .map(|c| self.space.series(&t, c))
                .collect::<Result<_>>()?,
        )
    }
}

fn matrix_doc(m: &QMatrix) -> Vec<Vec<String>> {
    m.iter().map(|r| r.iter().map(format_rational).collect()).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunDoc {
    pub p: u64,
    pub order: u32,
    pub t_order: u32,
}

impl RunDoc {
    pub fn of(ctx: &Context) -> RunDoc {
        RunDoc {
            p: ctx.p(),
            order: ctx.order(),
            t_order: ctx.t_order(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DarbouxReportDoc {
    pub succeeded: bool,
    pub run: RunDoc,
    pub residuals: Vec<Residual>,
    pub t_evidence: Certificate,
    pub constancy: Certificate,
    pub normalization: Vec<Vec<String>>,
    pub omega1: FormDoc,
    pub alpha: FormDoc,
    pub beta: FormDoc,
    pub beta2: FormDoc,
    pub field: FieldDoc,
    pub flow: Vec<SeriesDoc>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl DarbouxReportDoc {
    pub fn new(r: &DarbouxReport, ctx: &Context) -> DarbouxReportDoc {
        let p = Some(ctx.p());
        DarbouxReportDoc {
            succeeded: r.succeeded(),
            run: RunDoc::of(ctx),
            residuals: r.residuals.clone(),
            t_evidence: r.t_evidence.clone(),
            constancy: r.constancy.clone(),
            normalization: matrix_doc(&r.normalization),
            omega1: FormDoc::from_form(&r.omega1, p),
            alpha: FormDoc::from_form(&r.alpha, p),
            beta: FormDoc::from_form(&r.beta, p),
            beta2: FormDoc::from_form(&r.beta2, p),
            field: FieldDoc::from_field(&r.field),
            flow: r.flow.iter().map(|s| SeriesDoc::from_series(s, p)).collect(),
            notes: r.notes.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SalernoReportDoc {
    pub succeeded: bool,
    pub nu: String,
    pub pairs: usize,
    pub identities: Vec<Residual>,
    pub printed_variant: Vec<Residual>,
    pub field_matches_closed_form: Vec<bool>,
    pub pipeline: DarbouxReportDoc,
}

impl SalernoReportDoc {
    pub fn new(r: &SalernoReport, ctx: &Context) -> SalernoReportDoc {
        SalernoReportDoc {
            succeeded: r.succeeded(),
            nu: format_rational(&r.params.nu),
            pairs: r.params.pairs,
            identities: r.identities.clone(),
            printed_variant: r.printed.clone(),
            field_matches_closed_form: r.field_matches_closed_form.clone(),
            pipeline: DarbouxReportDoc::new(&r.pipelines[0], ctx),
        }
    }
}

/// Initial condition record of an IVP problem file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialDoc {
    Values(Vec<String>),
    Symbolic(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosedFormDoc {
    /// The solution is the reciprocal of this series.
    pub reciprocal_of: Vec<SeriesDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IvpProblemDoc {
    pub rhs: Vec<SeriesDoc>,
    pub initial: InitialDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<String>,
    #[serde(default)]
    pub certified: bool,
    /// Radius exponent for the coefficient bound; computed when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius_exponent: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<ClosedFormDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalProblemDoc {
    pub var: String,
    pub numerator: Vec<String>,
    pub denominator: Vec<String>,
}

pub fn parse_rationals(v: &[String]) -> Result<Vec<Rational>> {
    v.iter().map(|s| parse_rational(s)).collect()
}

pub fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents always serialize");
    s.push('\n');
    s
}
