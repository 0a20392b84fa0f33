//! JSON file formats for functions and hypergraphs.
//!
//! A function file is either
//! `{"n": 3, "repr": "truth_table", "values": [...]}` with `2^n` entries in
//! ascending mask order, or `{"n": 3, "repr": "y_poly", "coeffs": [{"set": [0, 2], "c": 1.5}]}`.
//! Numbers may be JSON numbers or decimal strings; rational mode writes
//! every value as its exact decimal expansion.

use serde::{Deserialize, Serialize};

use crate::cube::exact::{dyadic_to_decimal, from_f64, parse_decimal};
use crate::cube::{Basis, SubsetPoly, TruthTable};
use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::subset::Subset;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum Number {
    Float(f64),
    Text(String),
}

impl Number {
    fn value(&self) -> Result<f64> {
        let v = match self {
            Number::Float(x) => *x,
            Number::Text(s) => {
                let r = parse_decimal(s)?;
                num_traits::ToPrimitive::to_f64(&r).ok_or(Error::NonFinite("decimal value"))?
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite("function value"))
        }
    }

    fn encode(x: f64, rational: bool) -> Result<Number> {
        if rational {
            let text = dyadic_to_decimal(&from_f64(x)?).expect("finite floats are dyadic");
            Ok(Number::Text(text))
        } else {
            Ok(Number::Float(x))
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCoeff {
    set: Vec<usize>,
    c: Number,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFunction {
    n: usize,
    repr: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    values: Option<Vec<Number>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    coeffs: Option<Vec<RawCoeff>>,
}

/// A function as stored on disk.
#[derive(Clone, Debug, PartialEq)]
pub enum FunctionRepr {
    TruthTable(TruthTable),
    YPoly(SubsetPoly),
}

impl FunctionRepr {
    pub fn n(&self) -> usize {
        match self {
            FunctionRepr::TruthTable(t) => t.n(),
            FunctionRepr::YPoly(p) => p.n(),
        }
    }

    /// y-expansion of the function.
    pub fn to_poly(&self) -> SubsetPoly {
        match self {
            FunctionRepr::TruthTable(t) => t.y_expand(),
            FunctionRepr::YPoly(p) => p.clone(),
        }
    }
}

pub fn function_from_json(text: &str) -> Result<FunctionRepr> {
    let raw: RawFunction = serde_json::from_str(text).map_err(|e| Error::Malformed(format!("function file: {e}")))?;
    match (raw.repr.as_str(), raw.values, raw.coeffs) {
        ("truth_table", Some(values), None) => {
            if raw.n >= usize::BITS as usize || values.len() != 1usize << raw.n {
                return Err(Error::Malformed(format!(
                    "truth table for n = {} needs 2^n entries, found {}",
                    raw.n,
                    values.len()
                )));
            }
            let v = values.iter().map(Number::value).collect::<Result<Vec<_>>>()?;
            Ok(FunctionRepr::TruthTable(TruthTable::new(raw.n, v)?))
        }
        ("y_poly", None, Some(coeffs)) => {
            let mut poly = SubsetPoly::new(raw.n, Basis::Y)?;
            let mut seen = std::collections::BTreeSet::new();
            for c in &coeffs {
                let set = Subset::from_indices(raw.n, c.set.iter().copied())?;
                if !seen.insert(set) {
                    return Err(Error::Malformed(format!("coefficient {set} listed twice")));
                }
                poly.add_term(set, c.c.value()?);
            }
            Ok(FunctionRepr::YPoly(poly))
        }
        (repr, _, _) => Err(Error::Malformed(format!(
            "repr {repr:?} must be \"truth_table\" with \"values\" or \"y_poly\" with \"coeffs\""
        ))),
    }
}

pub fn function_to_json(f: &FunctionRepr, rational: bool) -> Result<String> {
    let raw = match f {
        FunctionRepr::TruthTable(t) => RawFunction {
            n: t.n(),
            repr: "truth_table".into(),
            values: Some(t.values().iter().map(|&x| Number::encode(x, rational)).collect::<Result<_>>()?),
            coeffs: None,
        },
        FunctionRepr::YPoly(p) => {
            let p = if p.basis() == Basis::Y { p.clone() } else { p.to_basis(Basis::Y)? };
            RawFunction {
                n: p.n(),
                repr: "y_poly".into(),
                values: None,
                coeffs: Some(
                    p.iter()
                        .map(|(s, c)| {
                            Ok(RawCoeff {
                                set: s.indices().collect(),
                                c: Number::encode(c, rational)?,
                            })
                        })
                        .collect::<Result<_>>()?,
                ),
            }
        }
    };
    Ok(serde_json::to_string_pretty(&raw)?)
}

pub fn hypergraph_from_json(text: &str) -> Result<Hypergraph> {
    serde_json::from_str(text).map_err(|e| Error::Malformed(format!("hypergraph file: {e}")))
}

pub fn hypergraph_to_json(h: &Hypergraph) -> Result<String> {
    Ok(serde_json::to_string_pretty(h)?)
}
