//! Complex numbers as `{"re": .., "im": ..}` objects in JSON.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::C64;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Obj {
    re: f64,
    im: f64,
}

pub fn serialize<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
    Obj { re: z.re, im: z.im }.serialize(s)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
    let o = Obj::deserialize(d)?;
    Ok(C64::new(o.re, o.im))
}

/// The same encoding for a list.
pub mod vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|z| Obj { re: z.re, im: z.im }))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
        Ok(Vec::<Obj>::deserialize(d)?.into_iter().map(|o| C64::new(o.re, o.im)).collect())
    }
}
