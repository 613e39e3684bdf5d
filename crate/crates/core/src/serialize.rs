//! Structured-text encodings.
//!
//! Complex numbers are written as `["re", "im"]` with both parts in
//! shortest round-trip exponent form, so that files are bit-exact on reload.
//! Readers also accept plain JSON numbers.

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Deserialize)]
#[serde(untagged)]
enum Part {
    Text(String),
    Num(f64),
}

impl Part {
    fn value<E: serde::de::Error>(self) -> Result<f64, E> {
        match self {
            Part::Num(v) => Ok(v),
            Part::Text(s) => match s.trim() {
                "inf" | "+inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "NaN" | "nan" => Ok(f64::NAN),
                t => t.parse::<f64>().map_err(|e| E::custom(format!("'{s}': {e}"))),
            },
        }
    }
}

pub fn encode(z: Complex64) -> [String; 2] {
    [format!("{:e}", z.re), format!("{:e}", z.im)]
}

pub fn encode_real(v: f64) -> String {
    format!("{v:e}")
}

fn decode<'de, D: Deserializer<'de>>(pair: (Part, Part)) -> Result<Complex64, D::Error> {
    Ok(Complex64::new(pair.0.value()?, pair.1.value()?))
}

pub mod complex {
    use super::*;

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        encode(*z).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let pair = <(Part, Part)>::deserialize(d)?;
        decode::<D>(pair)
    }
}

pub mod complex_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|z| encode(*z)).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        let raw = Vec::<(Part, Part)>::deserialize(d)?;
        raw.into_iter().map(decode::<D>).collect()
    }
}

/// Row-major complex matrices as nested arrays.
pub mod complex_matrix {
    use super::*;
    use nalgebra::DMatrix;

    pub fn serialize<S: Serializer>(m: &DMatrix<Complex64>, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[String; 2]>> = (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| encode(m[(i, j)])).collect())
            .collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<Complex64>, D::Error> {
        let raw = Vec::<Vec<(Part, Part)>>::deserialize(d)?;
        let nrows = raw.len();
        let ncols = raw.first().map(|r| r.len()).unwrap_or(0);
        if raw.iter().any(|r| r.len() != ncols) {
            return Err(D::Error::custom("ragged matrix"));
        }
        let mut data = Vec::with_capacity(nrows * ncols);
        for row in raw {
            for pair in row {
                data.push(decode::<D>(pair)?);
            }
        }
        Ok(DMatrix::from_row_slice(nrows, ncols, &data))
    }
}

/// Dense complex matrix as JSON value, for ad-hoc reports.
pub fn matrix_value(m: &nalgebra::DMatrix<Complex64>) -> serde_json::Value {
    serde_json::Value::Array(
        (0..m.nrows())
            .map(|i| serde_json::Value::Array((0..m.ncols()).map(|j| serde_json::json!(encode(m[(i, j)]))).collect()))
            .collect(),
    )
}

/// Inverse of [`matrix_value`].
pub fn decode_matrix(v: &serde_json::Value) -> serde_json::Result<nalgebra::DMatrix<Complex64>> {
    complex_matrix::deserialize(v)
}

pub fn vector_value(v: &[Complex64]) -> serde_json::Value {
    serde_json::Value::Array(v.iter().map(|z| serde_json::json!(encode(*z))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[derive(Serialize, Deserialize, PartialEq, Debug)]
    struct Holder {
        #[serde(with = "complex")]
        z: Complex64,
        #[serde(with = "complex_vec")]
        v: Vec<Complex64>,
        #[serde(with = "complex_matrix")]
        m: DMatrix<Complex64>,
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let h = Holder {
            z: Complex64::new(0.1 + 0.2, -1.0 / 3.0),
            v: vec![Complex64::new(1e-300, 5e300), Complex64::new(-0.0, 2.5)],
            m: DMatrix::from_row_slice(
                1,
                2,
                &[Complex64::new(std::f64::consts::PI, 1.0), Complex64::new(0.0, -7.0)],
            ),
        };
        let text = serde_json::to_string(&h).unwrap();
        let back: Holder = serde_json::from_str(&text).unwrap();
        assert_eq!(back, h);
        assert_eq!(back.v[1].re.to_bits(), (-0.0f64).to_bits());
    }

    #[test]
    fn numeric_parts_are_accepted() {
        #[derive(Deserialize)]
        struct Z {
            #[serde(with = "complex")]
            z: Complex64,
        }
        let z: Z = serde_json::from_str(r#"{"z": [1.5, "-2e0"]}"#).unwrap();
        assert_eq!(z.z, Complex64::new(1.5, -2.0));
    }
}
