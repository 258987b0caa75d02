//! Serde helpers for extended reals. JSON has no infinities, so non-finite
//! values are written as the strings `"inf"`, `"-inf"` and `"nan"`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::scalar::Scalar;

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Repr {
    Num(f64),
    Tag(String),
}

fn to_repr<T: Scalar>(x: T) -> Repr {
    if x.is_finite() {
        Repr::Num(x.to_f64_lossy())
    } else if x.is_nan() {
        Repr::Tag("nan".into())
    } else if x > T::zero() {
        Repr::Tag("inf".into())
    } else {
        Repr::Tag("-inf".into())
    }
}

fn from_repr<T: Scalar, E: serde::de::Error>(r: Repr) -> Result<T, E> {
    match r {
        Repr::Num(x) => T::from_f64(x).ok_or_else(|| E::custom("value out of range")),
        Repr::Tag(s) => match s.as_str() {
            "inf" => Ok(T::infinity()),
            "-inf" => Ok(T::neg_infinity()),
            "nan" => Ok(T::nan()),
            other => Err(E::custom(format!("unexpected extended real {other:?}"))),
        },
    }
}

pub mod ext_real {
    use super::*;

    pub fn serialize<T: Scalar, S: Serializer>(x: &T, s: S) -> Result<S::Ok, S::Error> {
        to_repr(*x).serialize(s)
    }

    pub fn deserialize<'de, T: Scalar, D: Deserializer<'de>>(d: D) -> Result<T, D::Error> {
        from_repr(Repr::deserialize(d)?)
    }
}

pub mod ext_real_vec {
    use super::*;

    pub fn serialize<T: Scalar, S: Serializer>(xs: &[T], s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<Repr> = xs.iter().map(|&x| to_repr(x)).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, T: Scalar, D: Deserializer<'de>>(d: D) -> Result<Vec<T>, D::Error> {
        Vec::<Repr>::deserialize(d)?
            .into_iter()
            .map(from_repr::<T, D::Error>)
            .collect()
    }
}

pub mod ext_real_opt {
    use super::*;

    pub fn serialize<T: Scalar, S: Serializer>(x: &Option<T>, s: S) -> Result<S::Ok, S::Error> {
        x.map(to_repr).serialize(s)
    }

    pub fn deserialize<'de, T: Scalar, D: Deserializer<'de>>(d: D) -> Result<Option<T>, D::Error> {
        Option::<Repr>::deserialize(d)?.map(from_repr).transpose()
    }
}

#[cfg(test)]
mod tests {
    use serde::{Deserialize, Serialize};

    #[derive(Serialize, Deserialize, PartialEq, Debug)]
    struct Probe {
        #[serde(with = "super::ext_real")]
        x: f64,
        #[serde(with = "super::ext_real_vec")]
        xs: Vec<f64>,
    }

    #[test]
    fn infinities_survive_json() {
        let p = Probe {
            x: f64::INFINITY,
            xs: vec![1.5, f64::NEG_INFINITY],
        };
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"x":"inf","xs":[1.5,"-inf"]}"#);
        assert_eq!(serde_json::from_str::<Probe>(&s).unwrap(), p);
    }
}
