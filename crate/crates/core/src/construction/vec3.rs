//! Small 3-vector algebra over [`RealEnclosure`] components, used for cap
//! centers, plane normals, and disk geometry.

use serde::{Deserialize, Serialize};

use crate::lattice::IntVec3;
use crate::numerics::{sqrt, Dyadic, NumError, RealEnclosure};

/// A 3-vector with certified-interval components.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EncVec3(pub [RealEnclosure; 3]);

impl EncVec3 {
    pub fn from_int(v: &IntVec3, bits: u32) -> Self {
        EncVec3([
            RealEnclosure::from_bigint(&v.m0, bits),
            RealEnclosure::from_bigint(&v.m1, bits),
            RealEnclosure::from_bigint(&v.m2, bits),
        ])
    }

    pub fn bits(&self) -> u32 {
        self.0[0].bits()
    }

    pub fn with_bits(&self, bits: u32) -> Self {
        EncVec3([
            self.0[0].with_bits(bits),
            self.0[1].with_bits(bits),
            self.0[2].with_bits(bits),
        ])
    }

    pub fn add(&self, o: &EncVec3) -> EncVec3 {
        EncVec3([
            self.0[0].add(&o.0[0]),
            self.0[1].add(&o.0[1]),
            self.0[2].add(&o.0[2]),
        ])
    }

    pub fn sub(&self, o: &EncVec3) -> EncVec3 {
        EncVec3([
            self.0[0].sub(&o.0[0]),
            self.0[1].sub(&o.0[1]),
            self.0[2].sub(&o.0[2]),
        ])
    }

    pub fn neg(&self) -> EncVec3 {
        EncVec3([self.0[0].neg(), self.0[1].neg(), self.0[2].neg()])
    }

    pub fn scale(&self, k: &RealEnclosure) -> EncVec3 {
        EncVec3([self.0[0].mul(k), self.0[1].mul(k), self.0[2].mul(k)])
    }

    pub fn dot(&self, o: &EncVec3) -> RealEnclosure {
        self.0[0]
            .mul(&o.0[0])
            .add(&self.0[1].mul(&o.0[1]))
            .add(&self.0[2].mul(&o.0[2]))
    }

    pub fn dot_int(&self, v: &IntVec3) -> RealEnclosure {
        let bits = self.bits();
        self.dot(&EncVec3::from_int(v, bits))
    }

    pub fn cross(&self, o: &EncVec3) -> EncVec3 {
        let [a0, a1, a2] = &self.0;
        let [b0, b1, b2] = &o.0;
        EncVec3([
            a1.mul(b2).sub(&a2.mul(b1)),
            a2.mul(b0).sub(&a0.mul(b2)),
            a0.mul(b1).sub(&a1.mul(b0)),
        ])
    }

    pub fn norm_sq(&self) -> RealEnclosure {
        self.dot(self)
    }

    pub fn norm(&self) -> Result<RealEnclosure, NumError> {
        sqrt(&self.norm_sq())
    }

    /// Normalize to unit length; errors when the norm enclosure straddles 0.
    pub fn unit(&self) -> Result<EncVec3, NumError> {
        let n = self.norm()?;
        let inv = n.recip()?;
        Ok(self.scale(&inv))
    }

    pub fn dist_sq(&self, o: &EncVec3) -> RealEnclosure {
        self.sub(o).norm_sq()
    }

    pub fn mid(&self) -> [Dyadic; 3] {
        [
            self.0[0].midpoint(),
            self.0[1].midpoint(),
            self.0[2].midpoint(),
        ]
    }
}

/// Exact dyadic 3-vector dot product.
pub fn dy_dot(a: &[Dyadic; 3], b: &[Dyadic; 3]) -> Dyadic {
    a[0].mul(&b[0]).add(&a[1].mul(&b[1])).add(&a[2].mul(&b[2]))
}

/// Exact dyadic distance squared.
pub fn dy_dist_sq(a: &[Dyadic; 3], b: &[Dyadic; 3]) -> Dyadic {
    let d = [a[0].sub(&b[0]), a[1].sub(&b[1]), a[2].sub(&b[2])];
    dy_dot(&d, &d)
}

/// Dyadic components of an integer vector.
pub fn dy_of_int(v: &IntVec3) -> [Dyadic; 3] {
    [
        Dyadic::from_bigint(v.m0.clone()),
        Dyadic::from_bigint(v.m1.clone()),
        Dyadic::from_bigint(v.m2.clone()),
    ]
}
