//! Parsing of tensors, forms and decompositions with diagnostics that name
//! the offending field.
//!
//! The scalar encoding decides the field of a decomposition: `"n/d"` strings
//! (or integers) are rational, `{"re","im"}` objects are Gaussian rationals,
//! `[re, im]` pairs are approximate. Mixed input is lifted to the widest
//! field present.

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::forms::{
    AnyDecomposition, BinaryForm, Decomposition, LinearForm, PSTensor, RankOneTerm,
};
use crate::scalars::{ApproxComplex, FieldTag, GaussianRational, Rational, Scalar};

fn parse_err(field: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse {
        field: field.into(),
        message: message.into(),
    }
}

fn document(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| parse_err("<document>", e.to_string()))
}

fn member<'a>(v: &'a Value, key: &str, path: &str) -> Result<&'a Value> {
    let obj = v
        .as_object()
        .ok_or_else(|| parse_err(path_or_root(path), "expected an object"))?;
    obj.get(key)
        .ok_or_else(|| parse_err(join(path, key), "missing"))
}

fn path_or_root(path: &str) -> String {
    if path.is_empty() {
        "<document>".into()
    } else {
        path.into()
    }
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.into()
    } else {
        format!("{path}.{key}")
    }
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array()
        .ok_or_else(|| parse_err(path, "expected an array"))
}

fn multidegree(v: &Value, path: &str) -> Result<Vec<usize>> {
    let field = join(path, "multidegree");
    let items = array(member(v, "multidegree", path)?, &field)?;
    if items.is_empty() {
        return Err(parse_err(field, "must be nonempty"));
    }
    items
        .iter()
        .enumerate()
        .map(|(i, d)| match d.as_u64() {
            Some(d) if (1..=64).contains(&d) => Ok(d as usize),
            _ => Err(parse_err(
                format!("{field}[{i}]"),
                format!("expected an integer in 1..=64, got {d}"),
            )),
        })
        .collect()
}

fn rational(v: &Value, field: &str) -> Result<Rational> {
    match v {
        Value::String(s) => s.parse().map_err(|e: String| parse_err(field, e)),
        Value::Number(n) => n.as_i64().map(Rational::from).ok_or_else(|| {
            parse_err(
                field,
                "numbers must be integers; write fractions as \"n/d\"",
            )
        }),
        other => Err(parse_err(
            field,
            format!("expected a rational, got {other}"),
        )),
    }
}

fn scalar_tier(v: &Value) -> FieldTag {
    match v {
        Value::Array(_) => FieldTag::Approx,
        Value::Object(_) => FieldTag::Gaussian,
        _ => FieldTag::Rational,
    }
}

fn gaussian(v: &Value, field: &str) -> Result<GaussianRational> {
    match v {
        Value::Object(_) => Ok(GaussianRational::new(
            rational(member(v, "re", field)?, &join(field, "re"))?,
            rational(member(v, "im", field)?, &join(field, "im"))?,
        )),
        _ => rational(v, field).map(GaussianRational::from),
    }
}

fn approx(v: &Value, field: &str) -> Result<ApproxComplex> {
    match v {
        Value::Array(pair) => {
            if pair.len() != 2 {
                return Err(parse_err(field, "expected [re, im]"));
            }
            let part = |i: usize| {
                pair[i]
                    .as_f64()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| parse_err(format!("{field}[{i}]"), "expected a finite number"))
            };
            Ok(ApproxComplex::new(part(0)?, part(1)?))
        }
        _ => gaussian(v, field).map(|g| g.to_approx()),
    }
}

trait FromJson: Sized {
    fn from_json(v: &Value, field: &str) -> Result<Self>;
}

impl FromJson for Rational {
    fn from_json(v: &Value, field: &str) -> Result<Self> {
        rational(v, field)
    }
}

impl FromJson for GaussianRational {
    fn from_json(v: &Value, field: &str) -> Result<Self> {
        gaussian(v, field)
    }
}

impl FromJson for ApproxComplex {
    fn from_json(v: &Value, field: &str) -> Result<Self> {
        approx(v, field)
    }
}

/// Parses `{"multidegree": [...], "coeffs": [...]}` over ℚ.
pub fn parse_tensor(text: &str) -> Result<PSTensor<Rational>> {
    tensor_from_value(&document(text)?)
}

fn tensor_from_value(v: &Value) -> Result<PSTensor<Rational>> {
    let ds = multidegree(v, "")?;
    let items = array(member(v, "coeffs", "")?, "coeffs")?;
    let expected = crate::forms::tensor_size(&ds);
    if items.len() != expected {
        return Err(parse_err(
            "coeffs",
            format!(
                "expected {expected} entries for multidegree {ds:?}, got {}",
                items.len()
            ),
        ));
    }
    let coeffs = items
        .iter()
        .enumerate()
        .map(|(i, c)| rational(c, &format!("coeffs[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    PSTensor::from_coeffs(&ds, coeffs)
}

/// Parses a binary form given either as `{"coeffs": [...]}`, as a bare
/// array, or as a one-factor tensor.
pub fn parse_form(text: &str) -> Result<BinaryForm<Rational>> {
    let v = document(text)?;
    let (items, field) = match &v {
        Value::Array(items) => (items, ""),
        Value::Object(obj) if obj.contains_key("multidegree") => {
            let t = tensor_from_value(&v)?;
            return t
                .as_form()
                .ok_or_else(|| parse_err("multidegree", "a binary form has exactly one factor"));
        }
        _ => (array(member(&v, "coeffs", "")?, "coeffs")?, "coeffs"),
    };
    form_from_items(items, field)
}

fn form_from_items(items: &[Value], field: &str) -> Result<BinaryForm<Rational>> {
    if items.len() < 2 {
        return Err(parse_err(
            path_or_root(field),
            "a form of degree ≥ 1 needs at least two coefficients",
        ));
    }
    let coeffs = items
        .iter()
        .enumerate()
        .map(|(i, c)| rational(c, &format!("{field}[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    BinaryForm::new(coeffs)
}

/// Parses a comma-separated coefficient list such as `0,1,0,0` or `1/2,-3`.
pub fn parse_coeff_list(text: &str) -> Result<BinaryForm<Rational>> {
    let coeffs = text
        .split(',')
        .enumerate()
        .map(|(i, s)| {
            s.trim()
                .parse::<Rational>()
                .map_err(|e| parse_err(format!("coeffs[{i}]"), e))
        })
        .collect::<Result<Vec<_>>>()?;
    if coeffs.len() < 2 {
        return Err(parse_err(
            "coeffs",
            "a form of degree ≥ 1 needs at least two coefficients",
        ));
    }
    BinaryForm::new(coeffs)
}

/// Parses a comma-separated multidegree such as `3,3`.
pub fn parse_multidegree_list(text: &str, field: &str) -> Result<Vec<usize>> {
    let ds = text
        .split(',')
        .enumerate()
        .map(|(i, s)| match s.trim().parse::<usize>() {
            Ok(d) if (1..=64).contains(&d) => Ok(d),
            _ => Err(parse_err(
                format!("{field}[{i}]"),
                format!("expected an integer in 1..=64, got {:?}", s.trim()),
            )),
        })
        .collect::<Result<Vec<_>>>()?;
    if ds.is_empty() {
        return Err(parse_err(field, "must be nonempty"));
    }
    Ok(ds)
}

/// Parses a decomposition, choosing the field from the scalar encoding.
pub fn parse_decomposition(text: &str) -> Result<AnyDecomposition> {
    decomposition_from_value(&document(text)?)
}

pub fn decomposition_from_value(v: &Value) -> Result<AnyDecomposition> {
    let ds = multidegree(v, "")?;
    let terms = array(member(v, "terms", "")?, "terms")?;
    let mut tier = FieldTag::Rational;
    for (t, term) in terms.iter().enumerate() {
        let path = format!("terms[{t}]");
        tier = tier.max(scalar_tier(member(term, "weight", &path)?));
        let vectors = array(member(term, "vectors", &path)?, &join(&path, "vectors"))?;
        for vec in vectors {
            if let Value::Array(pair) = vec {
                for c in pair {
                    tier = tier.max(scalar_tier(c));
                }
            }
        }
    }
    Ok(match tier {
        FieldTag::Rational => AnyDecomposition::Rational(typed_decomposition(&ds, terms)?),
        FieldTag::Gaussian => AnyDecomposition::Gaussian(typed_decomposition(&ds, terms)?),
        FieldTag::Approx => AnyDecomposition::Approx(typed_decomposition(&ds, terms)?),
    })
}

fn typed_decomposition<F: Scalar + FromJson>(
    ds: &[usize],
    terms: &[Value],
) -> Result<Decomposition<F>> {
    let parsed = terms
        .iter()
        .enumerate()
        .map(|(t, term)| {
            let path = format!("terms[{t}]");
            let weight = F::from_json(member(term, "weight", &path)?, &join(&path, "weight"))?;
            let vpath = join(&path, "vectors");
            let vectors = array(member(term, "vectors", &path)?, &vpath)?;
            if vectors.len() != ds.len() {
                return Err(parse_err(
                    vpath,
                    format!("expected {} vectors, got {}", ds.len(), vectors.len()),
                ));
            }
            let vectors = vectors
                .iter()
                .enumerate()
                .map(|(i, vec)| {
                    let field = format!("{vpath}[{i}]");
                    match vec.as_array().map(Vec::as_slice) {
                        Some([a, b]) => Ok(LinearForm::new(
                            F::from_json(a, &format!("{field}[0]"))?,
                            F::from_json(b, &format!("{field}[1]"))?,
                        )),
                        _ => Err(parse_err(field, "expected [a, b]")),
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(RankOneTerm::new(weight, vectors))
        })
        .collect::<Result<Vec<_>>>()?;
    Decomposition::new(ds.to_vec(), parsed)
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("values serialize");
    s.push('\n');
    s
}
