//! JSON records: one object per key, coefficients as strings.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::coeff::Coeff;
use super::key::{Phase, TrigKey};
use super::scalar::ScalarField;
use super::state::StateVector;
use super::vector::VectorField;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScalarRecord {
    m1: i32,
    m2: i32,
    hphase: Phase,
    p: u32,
    zphase: Phase,
    c: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VectorRecord {
    m1: i32,
    m2: i32,
    hphase: Phase,
    p: u32,
    zphase: Phase,
    c1: String,
    c2: String,
}

fn checked_key<E: serde::de::Error>(m1: i32, m2: i32, hphase: Phase, p: u32, zphase: Phase) -> Result<TrigKey, E> {
    let k = TrigKey { m1, m2, hphase, p, zphase };
    if k.is_canonical() {
        Ok(k)
    } else {
        Err(E::custom(format!("non-canonical key {k:?}")))
    }
}

impl<T: Coeff> Serialize for ScalarField<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let recs: Vec<ScalarRecord> = self
            .iter()
            .map(|(k, c)| ScalarRecord { m1: k.m1, m2: k.m2, hphase: k.hphase, p: k.p, zphase: k.zphase, c: c.to_repr() })
            .collect();
        recs.serialize(s)
    }
}

impl<'de, T: Coeff> Deserialize<'de> for ScalarField<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let recs = Vec::<ScalarRecord>::deserialize(d)?;
        let mut f = ScalarField::zero();
        for r in recs {
            let k = checked_key::<D::Error>(r.m1, r.m2, r.hphase, r.p, r.zphase)?;
            let c = T::parse_repr(&r.c).map_err(D::Error::custom)?;
            f.add_term(k, c);
        }
        Ok(f)
    }
}

impl<T: Coeff> Serialize for VectorField<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let recs: Vec<VectorRecord> = self
            .pairs()
            .into_iter()
            .map(|(k, [a, b])| VectorRecord {
                m1: k.m1,
                m2: k.m2,
                hphase: k.hphase,
                p: k.p,
                zphase: k.zphase,
                c1: a.to_repr(),
                c2: b.to_repr(),
            })
            .collect();
        recs.serialize(s)
    }
}

impl<'de, T: Coeff> Deserialize<'de> for VectorField<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let recs = Vec::<VectorRecord>::deserialize(d)?;
        let mut f = VectorField::zero();
        for r in recs {
            let k = checked_key::<D::Error>(r.m1, r.m2, r.hphase, r.p, r.zphase)?;
            let a = T::parse_repr(&r.c1).map_err(D::Error::custom)?;
            let b = T::parse_repr(&r.c2).map_err(D::Error::custom)?;
            f.add_term(k, [a, b]);
        }
        Ok(f)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateRecord<T: Coeff> {
    #[serde(bound = "")]
    v: VectorField<T>,
    #[serde(bound = "")]
    theta: ScalarField<T>,
}

impl<T: Coeff> Serialize for StateVector<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        StateRecord { v: self.v.clone(), theta: self.theta.clone() }.serialize(s)
    }
}

impl<'de, T: Coeff> Deserialize<'de> for StateVector<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = StateRecord::<T>::deserialize(d)?;
        Ok(StateVector { v: r.v, theta: r.theta })
    }
}
