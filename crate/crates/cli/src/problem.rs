//! Problem files and realizations in JSON.
//!
//! Complex numbers are `[re, im]` pairs and matrices are row-major nested
//! arrays of them. Parse errors carry a JSON pointer to the offending field.

use num_complex::Complex64;
use serde_json::{json, Map, Value};

use whindex::blaschke::{blaschke_realization, diagonal_symbol_factors};
use whindex::linalg::CMatrix;
use whindex::{BlaschkeSpec, Flavor, Realization, SymbolPair};

/// Largest accepted `|power|` in a `diagonal_powers` problem.
pub const MAX_POWER: i64 = 512;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{pointer}: {message}")]
pub struct ParseError {
    /// JSON pointer, `""` for the document root.
    pub pointer: String,
    pub message: String,
}

fn fail<T>(pointer: &str, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { pointer: pointer.to_string(), message: message.into() })
}

fn child(pointer: &str, key: impl std::fmt::Display) -> String {
    format!("{pointer}/{key}")
}

#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    DiagonalPowers(Vec<i32>),
    ScalarBlaschkePair { phi: BlaschkeSpec, m: BlaschkeSpec },
    RealizationPair { v: Realization, w: Realization },
}

impl Problem {
    pub fn parse_str(text: &str) -> Result<Self, ParseError> {
        let value: Value = serde_json::from_str(text).or_else(|e| fail("", format!("malformed JSON: {e}")))?;
        Self::from_value(&value)
    }

    pub fn from_value(value: &Value) -> Result<Self, ParseError> {
        let obj = object(value, "")?;
        let kind = obj.get("kind").ok_or_else(|| ParseError { pointer: "/kind".into(), message: "missing".into() })?;
        match kind.as_str() {
            Some("diagonal_powers") => {
                let list = array(field(obj, "", "powers")?, "/powers")?;
                if list.is_empty() {
                    return fail("/powers", "needs at least one power");
                }
                let powers = list
                    .iter()
                    .enumerate()
                    .map(|(k, p)| {
                        let at = child("/powers", k);
                        match p.as_i64() {
                            Some(x) if x.abs() <= MAX_POWER => Ok(x as i32),
                            Some(_) => fail(&at, format!("|power| exceeds {MAX_POWER}")),
                            None => fail(&at, "expected an integer"),
                        }
                    })
                    .collect::<Result<_, _>>()?;
                Ok(Problem::DiagonalPowers(powers))
            }
            Some("scalar_blaschke_pair") => Ok(Problem::ScalarBlaschkePair {
                phi: blaschke(field(obj, "", "phi")?, "/phi")?,
                m: blaschke(field(obj, "", "m")?, "/m")?,
            }),
            Some("realization_pair") => {
                let v = realization(field(obj, "", "v")?, "/v")?;
                let w = realization(field(obj, "", "w")?, "/w")?;
                for (r, at) in [(&v, "/v/flavor"), (&w, "/w/flavor")] {
                    if r.flavor() != Flavor::Continuous {
                        return fail(at, "factors must be continuous");
                    }
                }
                if v.io_dim() != w.io_dim() {
                    return fail("/w/d", format!("size {} differs from /v/d size {}", w.io_dim(), v.io_dim()));
                }
                Ok(Problem::RealizationPair { v, w })
            }
            _ => fail("/kind", "expected \"diagonal_powers\", \"scalar_blaschke_pair\" or \"realization_pair\""),
        }
    }

    /// The factor pair `(V, W)` of the symbol `R = V W*`.
    pub fn symbol_pair(&self) -> whindex::Result<SymbolPair> {
        match self {
            Problem::DiagonalPowers(powers) => diagonal_symbol_factors(powers),
            Problem::ScalarBlaschkePair { phi, m } => {
                SymbolPair::new(blaschke_realization(phi)?, blaschke_realization(m)?)
            }
            Problem::RealizationPair { v, w } => SymbolPair::new(v.clone(), w.clone()),
        }
    }

    pub fn to_value(&self) -> Value {
        match self {
            Problem::DiagonalPowers(powers) => json!({"kind": "diagonal_powers", "powers": powers}),
            Problem::ScalarBlaschkePair { phi, m } => {
                json!({"kind": "scalar_blaschke_pair", "phi": blaschke_value(phi), "m": blaschke_value(m)})
            }
            Problem::RealizationPair { v, w } => {
                json!({"kind": "realization_pair", "v": realization_value(v), "w": realization_value(w)})
            }
        }
    }
}

fn object<'a>(value: &'a Value, pointer: &str) -> Result<&'a Map<String, Value>, ParseError> {
    value.as_object().map_or_else(|| fail(pointer, "expected an object"), Ok)
}

fn array<'a>(value: &'a Value, pointer: &str) -> Result<&'a Vec<Value>, ParseError> {
    value.as_array().map_or_else(|| fail(pointer, "expected an array"), Ok)
}

fn field<'a>(obj: &'a Map<String, Value>, pointer: &str, key: &str) -> Result<&'a Value, ParseError> {
    obj.get(key).map_or_else(|| fail(&child(pointer, key), "missing"), Ok)
}

pub fn complex(value: &Value, pointer: &str) -> Result<Complex64, ParseError> {
    let pair = array(value, pointer)?;
    if pair.len() != 2 {
        return fail(pointer, "expected [re, im]");
    }
    let part = |k: usize| pair[k].as_f64().map_or_else(|| fail(&child(pointer, k), "expected a number"), Ok);
    Ok(Complex64::new(part(0)?, part(1)?))
}

/// Matrix of known shape; an empty array stands for zero rows.
pub fn matrix(value: &Value, pointer: &str, shape: (usize, usize)) -> Result<CMatrix, ParseError> {
    let rows = array(value, pointer)?;
    let (r, c) = shape;
    if rows.len() != r {
        return fail(pointer, format!("expected {r} rows, found {}", rows.len()));
    }
    let mut out = CMatrix::zeros(r, c);
    for (i, row) in rows.iter().enumerate() {
        let at = child(pointer, i);
        let entries = array(row, &at)?;
        if entries.len() != c {
            return fail(&at, format!("expected {c} columns, found {}", entries.len()));
        }
        for (j, x) in entries.iter().enumerate() {
            out[(i, j)] = complex(x, &child(&at, j))?;
        }
    }
    Ok(out)
}

/// Square matrix whose size is read from the data.
fn square(value: &Value, pointer: &str) -> Result<CMatrix, ParseError> {
    let n = array(value, pointer)?.len();
    matrix(value, pointer, (n, n))
}

pub fn realization(value: &Value, pointer: &str) -> Result<Realization, ParseError> {
    let obj = object(value, pointer)?;
    let flavor = match field(obj, pointer, "flavor")?.as_str() {
        Some("continuous") => Flavor::Continuous,
        Some("discrete") => Flavor::Discrete,
        _ => return fail(&child(pointer, "flavor"), "expected \"continuous\" or \"discrete\""),
    };
    let a = square(field(obj, pointer, "a")?, &child(pointer, "a"))?;
    let d = square(field(obj, pointer, "d")?, &child(pointer, "d"))?;
    if d.nrows() == 0 {
        return fail(&child(pointer, "d"), "must be at least 1x1");
    }
    let (n, m) = (a.nrows(), d.nrows());
    let b = matrix(field(obj, pointer, "b")?, &child(pointer, "b"), (n, m))?;
    let c = matrix(field(obj, pointer, "c")?, &child(pointer, "c"), (m, n))?;
    for (mat, key) in [(&a, "a"), (&b, "b"), (&c, "c"), (&d, "d")] {
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return fail(&child(pointer, key), "entries must be finite");
        }
    }
    Realization::new(a, b, c, d, flavor).or_else(|e| fail(pointer, e.to_string()))
}

/// Accepts a bare realization or `{"realization": ...}`.
pub fn realization_document(value: &Value) -> Result<Realization, ParseError> {
    match value.get("realization") {
        Some(inner) if value.get("flavor").is_none() => realization(inner, "/realization"),
        _ => realization(value, ""),
    }
}

fn blaschke(value: &Value, pointer: &str) -> Result<BlaschkeSpec, ParseError> {
    let obj = object(value, pointer)?;
    let rho = complex(field(obj, pointer, "rho")?, &child(pointer, "rho"))?;
    let poles_at = child(pointer, "poles");
    let poles = array(field(obj, pointer, "poles")?, &poles_at)?
        .iter()
        .enumerate()
        .map(|(k, p)| complex(p, &child(&poles_at, k)))
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(k) = poles.iter().position(|p| !(p.re < 0.0)) {
        return fail(&child(&poles_at, k), "pole must have negative real part");
    }
    BlaschkeSpec::new(rho, poles).or_else(|e| fail(&child(pointer, "rho"), e.to_string()))
}

pub fn complex_value(z: Complex64) -> Value {
    json!([z.re, z.im])
}

pub fn matrix_value(m: &CMatrix) -> Value {
    Value::Array(
        (0..m.nrows()).map(|i| Value::Array((0..m.ncols()).map(|j| complex_value(m[(i, j)])).collect())).collect(),
    )
}

pub fn realization_value(r: &Realization) -> Value {
    let flavor = match r.flavor() {
        Flavor::Continuous => "continuous",
        Flavor::Discrete => "discrete",
    };
    json!({
        "flavor": flavor,
        "a": matrix_value(r.a()),
        "b": matrix_value(r.b()),
        "c": matrix_value(r.c()),
        "d": matrix_value(r.d()),
    })
}

pub fn blaschke_value(spec: &BlaschkeSpec) -> Value {
    json!({
        "rho": complex_value(spec.rho()),
        "poles": spec.poles().iter().map(|&p| complex_value(p)).collect::<Vec<_>>(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pointer_of(text: &str) -> String {
        Problem::parse_str(text).unwrap_err().pointer
    }

    #[test]
    fn diagonal() {
        let p = Problem::parse_str(r#"{"kind":"diagonal_powers","powers":[-4,-2,0,3,5]}"#).unwrap();
        assert_eq!(p, Problem::DiagonalPowers(vec![-4, -2, 0, 3, 5]));
        assert_eq!(pointer_of(r#"{"kind":"diagonal_powers","powers":[1,"x"]}"#), "/powers/1");
        assert_eq!(pointer_of(r#"{"kind":"diagonal_powers","powers":[]}"#), "/powers");
        assert_eq!(pointer_of(r#"{"kind":"diagonal_powers"}"#), "/powers");
        assert_eq!(pointer_of(r#"{"kind":"nope"}"#), "/kind");
        assert_eq!(pointer_of(r#"[1]"#), "");
        assert_eq!(pointer_of(r#"{"kind":"#), "");
    }

    #[test]
    fn scalar_pair() {
        let text = r#"{"kind":"scalar_blaschke_pair","phi":{"rho":[1,0],"poles":[[-1,0]]},
                       "m":{"rho":[1,0],"poles":[[-1,0],[-2,0]]}}"#;
        let Problem::ScalarBlaschkePair { phi, m } = Problem::parse_str(text).unwrap() else { panic!() };
        assert_eq!((phi.degree(), m.degree()), (1, 2));
        let bad = text.replace("[-2,0]", "[2,0]");
        assert_eq!(pointer_of(&bad), "/m/poles/1");
        let bad = text.replacen("[1,0]", "[2,0]", 1);
        assert_eq!(pointer_of(&bad), "/phi/rho");
    }

    #[test]
    fn realization_round_trip() {
        let r = whindex::blaschke::zeta_power_realization(2).unwrap();
        let pair = Problem::RealizationPair { v: r.clone(), w: r };
        let back = Problem::from_value(&pair.to_value()).unwrap();
        assert_eq!(back, pair);
    }

    #[test]
    fn realization_shapes() {
        let base = json!({"kind":"realization_pair",
            "v":{"flavor":"continuous","a":[[[-1,0]]],"b":[[[1.4142135623730951,0]]],"c":[[[1.4142135623730951,0]]],"d":[[[-1,0]]]},
            "w":{"flavor":"continuous","a":[],"b":[],"c":[[]],"d":[[[1,0]]]}});
        assert!(Problem::from_value(&base).is_ok());
        let mut bad = base.clone();
        bad["v"]["b"] = json!([[[1, 0], [0, 0]]]);
        assert_eq!(Problem::from_value(&bad).unwrap_err().pointer, "/v/b/0");
        let mut bad = base.clone();
        bad["w"]["flavor"] = json!("discrete");
        assert_eq!(Problem::from_value(&bad).unwrap_err().pointer, "/w/flavor");
        let mut bad = base;
        bad["v"]["c"][0][0] = json!([1]);
        assert_eq!(Problem::from_value(&bad).unwrap_err().pointer, "/v/c/0/0");
    }

    #[test]
    fn wrapped_realization() {
        let r = whindex::blaschke::zeta_power_realization(1).unwrap();
        let bare = realization_value(&r);
        assert_eq!(realization_document(&bare).unwrap(), r);
        assert_eq!(realization_document(&json!({"realization": bare})).unwrap(), r);
    }
}
