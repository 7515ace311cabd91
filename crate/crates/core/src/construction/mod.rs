//! The inductive construction: nested spherical caps, the vector sequence
//! **m**_ν, and certified enclosures of the limit pair (α₁, α₂).

mod step;
mod vec3;

pub use step::{
    candidate_search, layer_and_disk, step, update_cap, CapUpdate, DiskContext, SearchDiagnostics,
};
pub use vec3::EncVec3;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::AlgebraicConstants;
use crate::lattice::{serde_bigint, IntVec2, IntVec3, LatticeError};
use crate::numerics::{sqrt_int, Dyadic, NumError, RealEnclosure};

#[derive(Debug, Error)]
pub enum ConstructError {
    #[error("inadmissible profile: {0}")]
    InadmissibleProfile(String),
    #[error("candidate search exhausted: {0}")]
    SearchExhausted(String),
    #[error("cap certificate failed: {0}")]
    CapCertificateFailed(String),
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("malformed state: {0}")]
    MalformedState(String),
    #[error(transparent)]
    Numeric(#[from] NumError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// The power-of-two exponents steering every inequality of the construction.
///
/// `start_norm_log2` pins the bootstrap target norm for M₁; admissibility
/// requires the growth law to hold from that norm upward, which the paper
/// guarantees with its own constants and which scaled profiles must check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParameterProfile {
    pub label: String,
    pub e_zeta: u32,
    pub e_gap: u32,
    #[serde(rename = "e_H")]
    pub e_h: u32,
    #[serde(rename = "e_M1")]
    pub e_m1: u32,
    pub e_disk: u32,
    /// Angle threshold as an exact rational num/den (radians).
    pub angle_threshold_num: u32,
    pub angle_threshold_den: u32,
    pub start_norm_log2: u32,
}

impl ParameterProfile {
    pub fn scaled() -> Self {
        ParameterProfile {
            label: "scaled".into(),
            e_zeta: 3,
            e_gap: 3,
            e_h: 3,
            e_m1: 24,
            e_disk: 4,
            angle_threshold_num: 1,
            angle_threshold_den: 4,
            start_norm_log2: 21,
        }
    }

    pub fn paper() -> Self {
        ParameterProfile {
            label: "paper".into(),
            e_zeta: 5,
            e_gap: 10,
            e_h: 9,
            e_m1: 100,
            e_disk: 10,
            angle_threshold_num: 1,
            angle_threshold_den: 4,
            start_norm_log2: 54,
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "scaled" => Some(Self::scaled()),
            "paper" => Some(Self::paper()),
            _ => None,
        }
    }

    pub fn angle_threshold(&self, bits: u32) -> RealEnclosure {
        RealEnclosure::from_ratio(
            &BigInt::from(self.angle_threshold_num),
            &BigInt::from(self.angle_threshold_den),
            bits,
        )
    }

    /// Admissibility: every exponent positive, the bootstrap norm within the
    /// M₁ cap, and the growth law M^{στ−1}/2^{e_H} ≥ 2^{e_gap+1}·M at the
    /// bootstrap norm (hence at every larger norm, as στ − 2 > 0).
    pub fn check_admissible(&self, consts: &AlgebraicConstants) -> Result<(), ConstructError> {
        for (name, v) in [
            ("e_zeta", self.e_zeta),
            ("e_gap", self.e_gap),
            ("e_H", self.e_h),
            ("e_M1", self.e_m1),
            ("e_disk", self.e_disk),
        ] {
            if v < 1 {
                return Err(ConstructError::InadmissibleProfile(format!(
                    "{name} must be ≥ 1, got {v}"
                )));
            }
        }
        if self.angle_threshold_num == 0 || self.angle_threshold_den == 0 {
            return Err(ConstructError::InadmissibleProfile(
                "angle threshold must be a positive rational".into(),
            ));
        }
        if self.start_norm_log2 > self.e_m1 {
            return Err(ConstructError::InadmissibleProfile(format!(
                "start norm 2^{} exceeds the M₁ cap 2^{}",
                self.start_norm_log2, self.e_m1
            )));
        }
        // (στ − 2) · start_norm_log2 ≥ e_H + e_gap + 1
        let bits = 128;
        let st2 = consts
            .st_minus_1()
            .sub(&RealEnclosure::from_int(1, bits))
            .with_bits(bits);
        let lhs = st2.mul(&RealEnclosure::from_int(self.start_norm_log2 as i64, bits));
        let rhs = RealEnclosure::from_int((self.e_h + self.e_gap + 1) as i64, bits);
        if !lhs.definitely_gt(&rhs) {
            return Err(ConstructError::InadmissibleProfile(format!(
                "growth law fails at the start norm: (στ−2)·{} = [{}, {}] ≤ e_H+e_gap+1 = {}",
                self.start_norm_log2,
                lhs.lo(),
                lhs.hi(),
                self.e_h + self.e_gap + 1
            )));
        }
        Ok(())
    }
}

mod serde_dyadic {
    use crate::numerics::Dyadic;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Dyadic, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_decimal_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Dyadic, D::Error> {
        let raw = String::deserialize(d)?;
        Dyadic::from_decimal_str(&raw).map_err(|e| D::Error::custom(format!("bad dyadic: {e:?}")))
    }
}

mod serde_m_array {
    use crate::lattice::IntVec3;
    use num_bigint::BigInt;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};
    use std::str::FromStr;

    pub fn serialize<S: Serializer>(v: &IntVec3, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(3))?;
        for c in [&v.m0, &v.m1, &v.m2] {
            seq.serialize_element(&c.to_string())?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<IntVec3, D::Error> {
        let raw: [String; 3] = Deserialize::deserialize(d)?;
        let parse = |s: &str| BigInt::from_str(s).map_err(|e| D::Error::custom(e.to_string()));
        Ok(IntVec3 {
            m0: parse(&raw[0])?,
            m1: parse(&raw[1])?,
            m2: parse(&raw[2])?,
        })
    }
}

mod serde_opt_bigint {
    use num_bigint::BigInt;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};
    use std::str::FromStr;

    pub fn serialize<S: Serializer>(v: &Option<BigInt>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) => s.serialize_some(&x.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigInt>, D::Error> {
        let raw: Option<String> = Deserialize::deserialize(d)?;
        raw.map(|s| BigInt::from_str(&s).map_err(|e| D::Error::custom(e.to_string())))
            .transpose()
    }
}

/// Closed metric ball on the unit sphere.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SphericalCap {
    pub center: EncVec3,
    #[serde(with = "serde_dyadic")]
    pub radius: Dyadic,
}

/// Geometry of one inductive step: the objects used to locate **m**_{ν+1}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepGeometry {
    /// Unit normal of span(**m**_ν, **m**_{ν+1}).
    pub xi: EncVec3,
    /// Integer normal of the great circle ℓ_ν⁰ (the vector **m**_ν itself).
    pub plane0: IntVec3,
    /// Slab half-level 1/(2·M_{ν+1}^ω).
    pub slab_level: RealEnclosure,
    /// Cylinder radius 1/(M_{ν+1}^ω · M_ν).
    pub cylinder_radius: RealEnclosure,
    #[serde(with = "serde_bigint")]
    pub mu_star: BigInt,
    /// Center of the search disk inside the affine layer.
    pub w_center: EncVec3,
    /// Disk radius H_ν / 2^{e_disk}.
    pub disk_radius: RealEnclosure,
}

/// One step record: the vector, its derived norms, and the covolumes that
/// become available once the following vector exists.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepRecord {
    #[serde(with = "serde_m_array")]
    pub m: IntVec3,
    /// M_ν = |m̄_ν|.
    #[serde(rename = "M")]
    pub m_norm: RealEnclosure,
    /// H_ν = M_ν^{στ−1}/2^{e_H}.
    #[serde(rename = "H")]
    pub h: RealEnclosure,
    /// ζ_ν enclosure, valid for every point of B_{ν+1} (set with step ν+1).
    pub zeta: Option<RealEnclosure>,
    /// D_ν = covolume of Λ_ν = ⟨m̄_ν, m̄_{ν+1}⟩ (set with step ν+1).
    #[serde(rename = "D", with = "serde_opt_bigint", default)]
    pub cov_d: Option<BigInt>,
    /// d_ν = |**m**_ν × **m**_{ν+1}| (set with step ν+1).
    #[serde(rename = "d")]
    pub d_sub: Option<RealEnclosure>,
    /// Geometry used to find **m**_{ν+1} (absent for the bootstrap step).
    pub geometry: Option<StepGeometry>,
}

/// Full serializable state of the construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstructionState {
    pub profile: ParameterProfile,
    pub seed: u64,
    pub steps: Vec<StepRecord>,
    pub cap: SphericalCap,
}

/// Algebraic constants at the default certificate precision.
pub fn default_constants() -> Result<AlgebraicConstants, NumError> {
    AlgebraicConstants::derive(256)
}

/// Working precision for a step whose next norm squared has the given bit
/// length: at least (ω+1)·log₂ M_{ν+1} + 64, over-approximated as
/// 2·bitlen(M²) + 128.
pub(crate) fn working_bits(norm_sq_bits: u64) -> u32 {
    (2 * norm_sq_bits as u32).max(64) + 128
}

impl ConstructionState {
    /// Initial state: **m**₀ = (1, 1, −1) and the cap B₀ of radius 2⁻⁶
    /// centered at the unit vector η₀ with x₀ = 3/4 and **m**₀·η₀ = 2⁻⁸.
    pub fn init(profile: ParameterProfile, seed: u64) -> Result<Self, ConstructError> {
        let consts = default_constants()?;
        profile.check_admissible(&consts)?;

        let bits = 320u32;
        // x₀ = 3/4; x₁ − x₂ = 2⁻⁸ − 3/4; x₁² + x₂² = 7/16
        let x0 = RealEnclosure::exact(Dyadic::new(BigInt::from(3), -2), bits);
        let s = RealEnclosure::exact(Dyadic::new(BigInt::from(-191), -8), bits);
        // x₁ + x₂ = sqrt(2·7/16 − s²)
        let seven_eighths = RealEnclosure::exact(Dyadic::new(BigInt::from(7), -3), bits);
        let p = crate::numerics::sqrt(&seven_eighths.sub(&s.mul(&s)))?;
        let x1 = p.add(&s).mul_pow2(-1);
        let x2 = p.sub(&s).mul_pow2(-1);
        let center = EncVec3([x0, x1, x2]);

        // sanity: unit center and positive, small m₀·η₀
        if !center.norm_sq().contains_dyadic(&Dyadic::one()) {
            return Err(ConstructError::CapCertificateFailed(
                "initial center is not unit".into(),
            ));
        }
        let m0 = IntVec3::new(1, 1, -1);
        let zeta_dir = center.dot_int(&m0);
        if !zeta_dir.contains_dyadic(&Dyadic::pow2(-8)) {
            return Err(ConstructError::CapCertificateFailed(
                "initial slab offset is off target".into(),
            ));
        }
        // condition (iv) for m̄₀ = (1, −1)
        let m0_cut = m0.cutten();
        if !crate::lattice::opposite_signs(&m0_cut) {
            return Err(ConstructError::CapCertificateFailed(
                "initial sign condition fails".into(),
            ));
        }
        let thr = profile.angle_threshold(96);
        for axis in [IntVec2::new(1, 0), IntVec2::new(0, 1)] {
            if !crate::lattice::angle_at_least(&m0_cut, &axis, &thr)? {
                return Err(ConstructError::CapCertificateFailed(
                    "initial axis angle fails".into(),
                ));
            }
        }

        let m_norm = sqrt_int(&m0_cut.norm_sq(), bits);
        let h = step::h_of(&m_norm, &profile, &consts)?;
        Ok(ConstructionState {
            profile,
            seed,
            steps: vec![StepRecord {
                m: m0,
                m_norm,
                h,
                zeta: None,
                cov_d: None,
                d_sub: None,
                geometry: None,
            }],
            cap: SphericalCap {
                center,
                radius: Dyadic::pow2(-6),
            },
        })
    }

    /// Structural validation of invariants re-checkable without re-running
    /// the search: base vector, unit cap center, positive radius, norms
    /// matching vectors, strictly growing norms.
    pub fn validate(&self) -> Result<(), ConstructError> {
        if self.steps.is_empty() {
            return Err(ConstructError::MalformedState("no steps".into()));
        }
        if self.steps[0].m != IntVec3::new(1, 1, -1) {
            return Err(ConstructError::MalformedState(
                "steps[0].m must be (1, 1, -1)".into(),
            ));
        }
        if !self.cap.radius.is_positive() {
            return Err(ConstructError::MalformedState(
                "cap radius must be positive".into(),
            ));
        }
        if !self.cap.center.norm_sq().contains_dyadic(&Dyadic::one()) {
            return Err(ConstructError::MalformedState(
                "cap center is off the unit sphere".into(),
            ));
        }
        for (i, st) in self.steps.iter().enumerate() {
            let cut_sq = st.m.cutten().norm_sq();
            if !st
                .m_norm
                .mul(&st.m_norm)
                .contains_dyadic(&Dyadic::from_bigint(cut_sq.clone()))
            {
                return Err(ConstructError::MalformedState(format!(
                    "recorded norm M_{i} does not match its vector"
                )));
            }
            if i > 0 {
                let prev_sq = self.steps[i - 1].m.cutten().norm_sq();
                if cut_sq <= prev_sq {
                    return Err(ConstructError::MalformedState(format!(
                        "norms do not grow at step {i}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Number of completed inductive steps beyond the base vector.
    pub fn last_index(&self) -> usize {
        self.steps.len() - 1
    }

    /// Certified intervals for (α₁, α₂), valid for every point of the cap.
    pub fn alpha_enclosure(&self, bits: u32) -> Result<(RealEnclosure, RealEnclosure), NumError> {
        let r = &self.cap.radius;
        let c = self.cap.center.with_bits(bits);
        // component ranges over the cap: center ± radius (|x - η| ≤ r bounds
        // each coordinate difference by r)
        let range = |i: usize| {
            RealEnclosure::new(c.0[i].lo().sub(r), c.0[i].hi().add(r), bits)
        };
        let x0 = range(0);
        Ok((range(1).div(&x0)?, range(2).div(&x0)?))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("state serializes");
        s.push('\n');
        s
    }

    pub fn from_json(raw: &str) -> Result<Self, ConstructError> {
        let state: ConstructionState = serde_json::from_str(raw)
            .map_err(|e| ConstructError::MalformedState(format!("deserialize: {e}")))?;
        state.validate()?;
        Ok(state)
    }

    /// Run `count` inductive steps in place.
    pub fn run_steps(&mut self, count: usize) -> Result<(), ConstructError> {
        for _ in 0..count {
            step::step(self)?;
        }
        Ok(())
    }
}

/// Convenience: init + run.
pub fn run(
    profile: ParameterProfile,
    steps: usize,
    seed: u64,
) -> Result<ConstructionState, ConstructError> {
    let mut state = ConstructionState::init(profile, seed)?;
    state.run_steps(steps)?;
    Ok(state)
}
