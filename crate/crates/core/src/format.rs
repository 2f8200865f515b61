//! The textual record format shared by the library and the CLI.
//!
//! One JSON object per record, whitespace separated:
//!
//! ```text
//! {"n": 1, "terms": [{"gens": ["z1", "zb1"], "re": "1/2", "im": "0"}]}
//! ```
//!
//! `re` and `im` are exact rationals (`"p/q"`) or decimals (string or JSON
//! number); a missing part is zero. A record with no terms needs an explicit
//! `"degree"`. Polynomial coefficients replace `re`/`im` by a `poly` list of
//! monomials `{"vars": {"z1": 2, "zb2": 1}, "re": .., "im": ..}`. Metric
//! blocks are `{"n": 1, "metric": [["1", "0", …], …]}` over the real basis
//! `x_1, y_1, x_2, y_2, …`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bridge::QHermForm;
use crate::calculus::PolyForm;
use crate::form::Form;
use crate::poly::{Monomial, Poly, Var};
use crate::scalar::{format_rational, parse_rational, rational_to_f64, CRational, Rational};
use crate::space::ModelSpace;

/// A parse failure, located at the start of the offending record or at the
/// JSON syntax error.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}, column {column}: {message}")]
pub struct FormatError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum Num {
    Text(String),
    Number(serde_json::Number),
}

impl Num {
    fn to_rational(&self) -> Result<Rational, String> {
        let s = match self {
            Num::Text(s) => s.clone(),
            Num::Number(n) => n.to_string(),
        };
        parse_rational(&s).ok_or_else(|| format!("`{s}` is not a rational or decimal number"))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MonoRecord {
    #[serde(default)]
    vars: BTreeMap<String, u16>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    re: Option<Num>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    im: Option<Num>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermRecord {
    gens: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    re: Option<Num>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    im: Option<Num>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    poly: Option<Vec<MonoRecord>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    degree: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    terms: Option<Vec<TermRecord>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    metric: Option<Vec<Vec<Num>>>,
}

/// A parsed record.
#[derive(Clone, Debug, PartialEq)]
pub enum Parsed {
    Form(Form),
    PolyForm(PolyForm),
    Metric(QHermForm<Rational>),
}

fn parse_complex(re: &Option<Num>, im: &Option<Num>) -> Result<CRational, String> {
    let re = re.as_ref().map(Num::to_rational).transpose()?.unwrap_or_else(Rational::zero);
    let im = im.as_ref().map(Num::to_rational).transpose()?.unwrap_or_else(Rational::zero);
    Ok(CRational::new(re, im))
}

fn parse_var(space: &ModelSpace, name: &str) -> Result<Var, String> {
    let g = space.parse_name(name).map_err(|e| e.to_string())?;
    let k = space.coordinate(g);
    Ok(if space.is_holomorphic(g) { Var::z(k) } else { Var::zb(k) })
}

fn convert(rec: Record) -> Result<Parsed, String> {
    let space = ModelSpace::new(rec.n).map_err(|e| e.to_string())?;
    if let Some(rows) = rec.metric {
        if rec.terms.is_some() {
            return Err("a record holds either `terms` or `metric`, not both".into());
        }
        let m = rows
            .iter()
            .map(|r| r.iter().map(Num::to_rational).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        return QHermForm::from_rows(space, m).map(Parsed::Metric).map_err(|e| e.to_string());
    }
    let terms = rec.terms.unwrap_or_default();
    let degree = match (rec.degree, terms.first()) {
        (Some(d), _) => d,
        (None, Some(t)) => t.gens.len(),
        (None, None) => return Err("a record without terms needs `degree`".into()),
    };
    let is_poly = terms.iter().any(|t| t.poly.is_some());
    let mut exact: Form = Form::zero(space, degree);
    let mut poly: PolyForm = Form::zero(space, degree);
    for t in &terms {
        if t.gens.len() != degree {
            return Err(format!("term {:?} has degree {}, expected {degree}", t.gens, t.gens.len()));
        }
        let gens = t
            .gens
            .iter()
            .map(|g| space.parse_name(g).map_err(|e| e.to_string()))
            .collect::<Result<Vec<_>, _>>()?;
        if is_poly {
            let mut p = Poly::default();
            if t.re.is_some() || t.im.is_some() {
                p.add_term(Monomial::one(), parse_complex(&t.re, &t.im)?);
            }
            for m in t.poly.iter().flatten() {
                let mut vars: BTreeMap<Var, u16> = BTreeMap::new();
                for (name, e) in &m.vars {
                    if *e > 0 {
                        *vars.entry(parse_var(&space, name)?).or_insert(0) += e;
                    }
                }
                p.add_term(Monomial(vars.into_iter().collect()), parse_complex(&m.re, &m.im)?);
            }
            let f = Form::term(space, &gens, p);
            if f.is_zero() {
                return Err(format!("term {:?} repeats a generator", t.gens));
            }
            poly = &poly + &f;
        } else {
            let f = Form::term(space, &gens, parse_complex(&t.re, &t.im)?);
            if f.is_zero() && !parse_complex(&t.re, &t.im)?.is_zero() {
                return Err(format!("term {:?} repeats a generator", t.gens));
            }
            exact = &exact + &f;
        }
    }
    Ok(if is_poly { Parsed::PolyForm(poly) } else { Parsed::Form(exact) })
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.len(), |p| before.len() - p - 1) + 1;
    (line, column)
}

/// Parses every record in `text`. Lines starting with `#` are comments.
pub fn parse_records(text: &str) -> Result<Vec<Parsed>, FormatError> {
    // blank out comment lines so offsets stay meaningful
    let cleaned: String = text
        .split_inclusive('\n')
        .map(|l| {
            if l.trim_start().starts_with('#') {
                l.chars().map(|c| if c == '\n' { '\n' } else { ' ' }).collect()
            } else {
                l.to_string()
            }
        })
        .collect();
    let mut stream = serde_json::Deserializer::from_str(&cleaned).into_iter::<Record>();
    let mut out = Vec::new();
    loop {
        let start = stream.byte_offset();
        let skip = cleaned[start..].len() - cleaned[start..].trim_start().len();
        match stream.next() {
            None => break,
            Some(Err(e)) => {
                return Err(FormatError { line: e.line(), column: e.column(), message: e.to_string() });
            }
            Some(Ok(rec)) => match convert(rec) {
                Ok(p) => out.push(p),
                Err(message) => {
                    let (line, column) = line_col(&cleaned, start + skip);
                    return Err(FormatError { line, column, message });
                }
            },
        }
    }
    Ok(out)
}

/// Parses records and keeps only exact constant-coefficient forms.
pub fn parse_forms(text: &str) -> Result<Vec<Form>, FormatError> {
    parse_records(text)?
        .into_iter()
        .enumerate()
        .map(|(i, p)| match p {
            Parsed::Form(f) => Ok(f),
            _ => Err(FormatError { line: 0, column: 0, message: format!("record {} is not a constant-coefficient form", i + 1) }),
        })
        .collect()
}

fn num_exact(r: &Rational) -> Num {
    Num::Text(format_rational(r))
}

fn split_complex(c: &CRational) -> (Option<Num>, Option<Num>) {
    let re = num_exact(&c.re);
    let im = (!c.im.is_zero()).then(|| num_exact(&c.im));
    (Some(re), im)
}

/// Serializes an exact form as one record.
pub fn form_to_record(f: &Form) -> String {
    let space = f.space();
    let terms = f
        .terms()
        .map(|(b, c)| {
            let (re, im) = split_complex(c);
            TermRecord { gens: b.generators().map(|g| space.name(g)).collect(), re, im, poly: None }
        })
        .collect();
    let rec = Record { n: space.n(), degree: Some(f.degree()), terms: Some(terms), metric: None };
    serde_json::to_string(&rec).expect("records serialize")
}

/// Serializes a floating form; numbers are written with round-trip precision.
pub fn float_form_to_record(f: &Form<Complex64>) -> String {
    let space = f.space();
    let terms = f
        .terms()
        .map(|(b, c)| TermRecord {
            gens: b.generators().map(|g| space.name(g)).collect(),
            re: Some(Num::Text(format!("{:?}", c.re))),
            im: (c.im != 0.0).then(|| Num::Text(format!("{:?}", c.im))),
            poly: None,
        })
        .collect();
    let rec = Record { n: space.n(), degree: Some(f.degree()), terms: Some(terms), metric: None };
    serde_json::to_string(&rec).expect("records serialize")
}

/// Serializes a polynomial-coefficient form.
pub fn poly_form_to_record(f: &PolyForm) -> String {
    let space = f.space();
    let terms = f
        .terms()
        .map(|(b, p)| {
            let poly = p
                .terms()
                .map(|(m, c)| {
                    let (re, im) = split_complex(c);
                    let vars = m
                        .0
                        .iter()
                        .map(|(v, e)| {
                            let name = if v.is_bar() { format!("zb{}", v.coordinate() + 1) } else { format!("z{}", v.coordinate() + 1) };
                            (name, *e)
                        })
                        .collect();
                    MonoRecord { vars, re, im }
                })
                .collect();
            TermRecord { gens: b.generators().map(|g| space.name(g)).collect(), re: None, im: None, poly: Some(poly) }
        })
        .collect();
    let rec = Record { n: space.n(), degree: Some(f.degree()), terms: Some(terms), metric: None };
    serde_json::to_string(&rec).expect("records serialize")
}

/// Serializes an exact metric block.
pub fn metric_to_record(g: &QHermForm<Rational>) -> String {
    let rows = g.rows().into_iter().map(|r| r.iter().map(num_exact).collect()).collect();
    let rec = Record { n: g.space().n(), degree: None, terms: None, metric: Some(rows) };
    serde_json::to_string(&rec).expect("records serialize")
}

/// Converts an exact form to floating coefficients.
pub fn to_float(f: &Form) -> Form<Complex64> {
    f.map_coeffs(|c| Complex64::new(rational_to_f64(&c.re), rational_to_f64(&c.im)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{cint, rat};

    #[test]
    fn exact_round_trip() {
        let s = ModelSpace::new(2).unwrap();
        let f: Form = &(&Form::dz(s, 1) ^ &Form::dzb(s, 3)).scale(&CRational::new(rat(-7, 3), rat(1, 11)))
            + &(&Form::dz(s, 2) ^ &Form::dz(s, 4)).scale(&cint(5, 0));
        let text = form_to_record(&f);
        let back = parse_forms(&text).unwrap();
        assert_eq!(back, vec![f.clone()]);
        assert_eq!(form_to_record(&back[0]), text);
    }

    #[test]
    fn decimals_and_numbers() {
        let recs = parse_forms(r#"{"n":1,"terms":[{"gens":["z1"],"re":0.25,"im":"-1/2"}]}"#).unwrap();
        let s = ModelSpace::new(1).unwrap();
        assert_eq!(recs[0], Form::dz(s, 1).scale(&CRational::new(rat(1, 4), rat(-1, 2))));
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse_records("{\"n\":1,\"terms\":[]}\n\n  {\"n\":1,\"terms\":[{\"gens\":[\"q1\"]}]}").unwrap_err();
        assert_eq!((err.line, err.column), (1, 1));
        let err = parse_records("{\"n\":1,\"degree\":0,\"terms\":[]}\n\n  {\"n\":1,\"terms\":[{\"gens\":[\"q1\"]}]}").unwrap_err();
        assert_eq!((err.line, err.column), (3, 3));
        assert!(err.message.contains("q1"));
        let err = parse_records("{\"n\":1,\n \"terms\": [ oops ]}").unwrap_err();
        assert_eq!(err.line, 2);
    }

    #[test]
    fn comments_are_skipped() {
        let recs = parse_records("# Ω on n = 1\n{\"n\":1,\"terms\":[{\"gens\":[\"z1\",\"z2\"],\"re\":\"1\"}]}\n").unwrap();
        assert_eq!(recs.len(), 1);
    }

    #[test]
    fn poly_round_trip() {
        let s = ModelSpace::new(1).unwrap();
        let f: PolyForm = Form::dz(s, 1).scale(&(Poly::z(0) * Poly::zb(1) + Poly::constant(cint(0, 3))));
        let text = poly_form_to_record(&f);
        match &parse_records(&text).unwrap()[0] {
            Parsed::PolyForm(g) => assert_eq!(*g, f),
            other => panic!("{other:?}"),
        }
    }
}
