//! Independent re-verification of a serialized construction state: exact
//! condition checking, brute-force oracles for the dependent and
//! independent vector bounds, segment coverage, and the full
//! positive-quadrant scan.
//!
//! Nothing here trusts the enclosures stored in the state: every
//! certificate is re-derived from the raw integer vectors, the profile,
//! and the final cap.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::constants::AlgebraicConstants;
use crate::construction::{ConstructionState, ParameterProfile};
use crate::lattice::{
    angle_at_least, covolume2, det3, is_complete_pair, is_primitive, IntVec3,
};
use crate::numerics::{pow, sqrt_int, Dyadic, NumError, RealEnclosure};
use crate::parallel;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("malformed state: {0}")]
    Malformed(String),
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("enclosure too wide: {0}")]
    EnclosureTooWide(String),
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error(transparent)]
    Numeric(#[from] NumError),
}

/// Outcome of one named certificate.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionOutcome {
    pub pass: bool,
    /// Present exactly when `pass` is false; describes the first failure.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl ConditionOutcome {
    fn ok() -> Self {
        ConditionOutcome {
            pass: true,
            witness: None,
        }
    }
    fn fail(witness: impl Into<String>) -> Self {
        ConditionOutcome {
            pass: false,
            witness: Some(witness.into()),
        }
    }
    fn from_bool(pass: bool, witness: impl Into<String>) -> Self {
        if pass {
            Self::ok()
        } else {
            Self::fail(witness)
        }
    }
}

/// Certificates of one step, keyed by condition name (stable order).
#[derive(Debug, Clone, Serialize)]
pub struct StepConditions {
    pub nu: usize,
    pub entries: BTreeMap<String, ConditionOutcome>,
}

/// Power-of-two constants re-derived from the profile by re-running the
/// dependent-vector inequality chain, standing in for the headline 2^{−300}.
#[derive(Debug, Clone, Serialize)]
pub struct DerivedConstants {
    pub profile: String,
    /// Angle-based planar covolume constant: D ≥ M M′/2⁵, so the layer
    /// spacing argument loses 2^6 (the extra 2 from max → Euclidean norm).
    pub a_angle: u32,
    /// log₂ of the dependent-vector floor: |ζ(m)| ≥ 2^{floor} · M^{−σ}.
    pub lemma2_floor_log2: i64,
    /// Same floor reused for the full quadrant scan (the independent-vector
    /// bound M^{−σ} is weaker than 2^{floor}·M^{−σ} never, so the minimum
    /// over both lemma paths is the dependent-vector floor).
    pub scan_floor_log2: i64,
    /// Whether the profile's exponents make consecutive segments chain
    /// (needs roughly e_H ≥ 3 + 3σ).
    pub coverage_chains: bool,
    /// Human-readable derivation, one inequality per line.
    pub chain: Vec<String>,
}

/// Full re-verification report.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub steps: Vec<StepConditions>,
    pub overall: bool,
    pub derived: DerivedConstants,
}

impl ConditionReport {
    pub fn first_failure(&self) -> Option<(usize, &str, &str)> {
        for sc in &self.steps {
            for (name, out) in &sc.entries {
                if !out.pass {
                    return Some((
                        sc.nu,
                        name.as_str(),
                        out.witness.as_deref().unwrap_or(""),
                    ));
                }
            }
        }
        None
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization");
        s.push('\n');
        s
    }
}

/// Re-run the dependent-vector constant chain with the profile's exponents.
///
/// With A = 6 (planar covolume + max-vs-norm), z = e_ζ, h = e_H:
///   max(m₁,m₂) ≥ |μ| M_{ν+1}/2^A,
///   |ζ(m)| ≥ |μ| / (2^{A+z+1} M_ν M_{ν+1}^τ)
///          ≥ |μ| 2^{−(A+z+1)−h/(στ−1)} M_{ν+1}^{−σ}
///          ≥ |μ|^{1+σ} 2^{−(A+z+1)−h/(στ−1)−Aσ} M^{−σ}.
pub fn derived_constants(profile: &ParameterProfile) -> Result<DerivedConstants, VerifyError> {
    let consts = AlgebraicConstants::derive(256)?;
    let a: u32 = 6;
    let z = profile.e_zeta;
    let h = profile.e_h;
    let bits = 256;
    let st1 = consts.st_minus_1();
    let h_term = RealEnclosure::from_int(h as i64, bits).div(&st1)?;
    let a_sigma = RealEnclosure::from_int(a as i64, bits).mul(&consts.sigma);
    let total = RealEnclosure::from_int((a + z + 1) as i64, bits)
        .add(&h_term)
        .add(&a_sigma);
    // exponent E = ceil(A + z + 1 + h/(στ−1) + Aσ); floor is 2^{−E}
    let e_ceil = {
        let hi = total.hi();
        let f = hi.floor_int();
        let back = Dyadic::from_bigint(f.clone());
        if &back == hi {
            f
        } else {
            f + BigInt::one()
        }
    };
    let e_i64 = i64::try_from(&e_ceil)
        .map_err(|_| VerifyError::Malformed("floor exponent out of range".into()))?;
    // coverage chaining: (3 − e_H)/σ ≤ −3, i.e. e_H ≥ 3 + 3σ
    let three = RealEnclosure::from_int(3, bits);
    let need = three.add(&three.mul(&consts.sigma));
    let coverage_chains = RealEnclosure::from_int(h as i64, bits).definitely_gt(&need)
        || RealEnclosure::from_int(h as i64, bits).lo() >= need.hi();
    let chain = vec![
        format!("A = 6: max(m1,m2) >= |mu| M'/2^6 (planar covolume >= MM'/2^5 from the 1/4-radian angle)"),
        format!(
            "|zeta(m)| >= |mu| / (2^{} M M'^tau) (slab floor 2^-{} and gap absorb the zeta' term)",
            a + z + 1,
            z
        ),
        format!(
            "M <= (2^{} M')^(1/(st-1)) turns the bound into |mu| 2^(-{}-{}/(st-1)) M'^-sigma",
            h,
            a + z + 1,
            h
        ),
        format!(
            "combining with max(m1,m2) >= |mu| M'/2^6: floor = 2^-{} * M^-sigma",
            e_i64
        ),
    ];
    Ok(DerivedConstants {
        profile: profile.label.clone(),
        a_angle: a,
        lemma2_floor_log2: -e_i64,
        scan_floor_log2: -e_i64,
        coverage_chains,
        chain,
    })
}

pub fn verify_bits(state: &ConstructionState) -> u32 {
    let last = state
        .steps
        .last()
        .map(|s| s.m.cutten().norm_sq().bits())
        .unwrap_or(64);
    ((2 * last + 128).max(192) as u32).min(1 << 16)
}

/// ζ(m) over the cap: (m·x)/x₀ for x ranging over the cap.
fn zeta_over_cap(
    state: &ConstructionState,
    m: &IntVec3,
    bits: u32,
) -> Result<RealEnclosure, VerifyError> {
    let center = state.cap.center.with_bits(bits);
    let num_mid = center.dot_int(m);
    let m_norm = sqrt_int(&m.norm_sq(), bits);
    let spread = m_norm.mul(&RealEnclosure::exact(state.cap.radius.clone(), bits));
    let num = RealEnclosure::new(
        num_mid.lo().sub(spread.hi()),
        num_mid.hi().add(spread.hi()),
        bits,
    );
    let x0 = &center.0[0];
    let x0_range = RealEnclosure::new(
        x0.lo().sub(&state.cap.radius),
        x0.hi().add(&state.cap.radius),
        bits,
    );
    Ok(num.div(&x0_range)?)
}

/// M^{−ω} enclosure from the exact squared norm.
fn inv_pow_omega(
    norm_sq: &BigInt,
    consts: &AlgebraicConstants,
    bits: u32,
) -> Result<RealEnclosure, VerifyError> {
    let half_omega = consts.omega.mul_pow2(-1).neg();
    Ok(pow(&RealEnclosure::from_bigint(norm_sq, bits), &half_omega)?)
}

/// Re-derive every Fundamental-Lemma certificate from the raw vectors and
/// the final cap.
pub fn check_conditions(state: &ConstructionState) -> Result<ConditionReport, VerifyError> {
    if state.steps.is_empty() {
        return Err(VerifyError::Malformed("no steps".into()));
    }
    let m0 = &state.steps[0].m;
    if !(m0.m0 == BigInt::one() && m0.m1 == BigInt::one() && m0.m2 == -BigInt::one()) {
        return Err(VerifyError::Malformed(
            "step 0 must carry the seed vector (1, 1, -1)".into(),
        ));
    }
    let bits = verify_bits(state);
    let consts = AlgebraicConstants::derive(bits.max(256))?;
    let derived = derived_constants(&state.profile)?;
    let thr = state.profile.angle_threshold(bits.min(4096));
    let n = state.steps.len();
    let mut steps = Vec::new();

    for nu in 0..n {
        let mut entries: BTreeMap<String, ConditionOutcome> = BTreeMap::new();
        let m = &state.steps[nu].m;
        let cut = m.cutten();

        // (iv) signs and axis angles, every ν
        entries.insert(
            "iv_signs".into(),
            ConditionOutcome::from_bool(
                crate::lattice::opposite_signs(&cut),
                format!("m1*m2 >= 0 for step {nu}"),
            ),
        );
        let e1 = crate::lattice::IntVec2::new(1, 0);
        let e2 = crate::lattice::IntVec2::new(0, 1);
        let ax = angle_at_least(&cut, &e1, &thr).map_err(num_from_lattice)?
            && angle_at_least(&cut, &e2, &thr).map_err(num_from_lattice)?;
        entries.insert(
            "iv_axis_angle".into(),
            ConditionOutcome::from_bool(ax, format!("axis angle below 1/4 rad at step {nu}")),
        );

        if nu + 1 < n {
            let m_next = &state.steps[nu + 1].m;
            let cut_next = m_next.cutten();
            let m_sq = cut.norm_sq();
            let next_sq = cut_next.norm_sq();

            // (i) primitivity and completeness of ⟨m_ν, m_{ν+1}⟩
            let prim = is_primitive(m).map_err(num_from_lattice)?
                && is_primitive(m_next).map_err(num_from_lattice)?;
            let complete = prim && is_complete_pair(m, m_next).map_err(num_from_lattice)?;
            entries.insert(
                "i_complete".into(),
                ConditionOutcome::from_bool(
                    complete,
                    format!("pair ({nu}, {}) not primitive/complete", nu + 1),
                ),
            );
            if nu >= 1 {
                let indep = !det3(&state.steps[nu - 1].m, m, m_next).is_zero();
                entries.insert(
                    "i_triple_independent".into(),
                    ConditionOutcome::from_bool(
                        indep,
                        format!("triple ({}, {nu}, {}) dependent", nu - 1, nu + 1),
                    ),
                );
            }

            // (ii) ζ_ν window against M_{ν+1}
            let zeta = zeta_over_cap(state, m, bits)?;
            let win_hi = inv_pow_omega(&next_sq, &consts, bits)?;
            let win_lo = win_hi.mul_pow2(-(state.profile.e_zeta as i64));
            let in_window = zeta.lo() >= win_lo.hi() && zeta.hi() <= win_hi.lo();
            entries.insert(
                "ii_zeta_window".into(),
                ConditionOutcome::from_bool(
                    in_window,
                    format!(
                        "zeta_{nu} in [{}, {}] not inside [2^-{} M^-omega, M^-omega]",
                        zeta.lo().to_decimal_string(),
                        zeta.hi().to_decimal_string(),
                        state.profile.e_zeta
                    ),
                ),
            );

            // (iii) growth gap (exact in ℤ via squares)
            if nu >= 1 {
                let gap_ok = &next_sq >= &(&m_sq << (2 * state.profile.e_gap as u64));
                entries.insert(
                    "iii_gap".into(),
                    ConditionOutcome::from_bool(
                        gap_ok,
                        format!("M_{} < 2^{} M_{nu}", nu + 1, state.profile.e_gap),
                    ),
                );
                // (iii) H window: H_ν ≤ M_{ν+1} ≤ 2H_ν
                let m_norm = sqrt_int(&m_sq, bits);
                let h = pow(&m_norm, &consts.st_minus_1())?
                    .mul_pow2(-(state.profile.e_h as i64));
                let h_sq = h.mul(&h);
                let next_dy = Dyadic::from_bigint(next_sq.clone());
                let window = h_sq.hi() <= &next_dy && next_dy <= h_sq.mul_pow2(2).lo().clone();
                entries.insert(
                    "iii_h_window".into(),
                    ConditionOutcome::from_bool(
                        window,
                        format!("M_{} outside [H_{nu}, 2H_{nu}]", nu + 1),
                    ),
                );
            } else {
                // ν = 0: the bootstrap scale rule replaces the H window
                let bound = BigInt::one() << (2 * state.profile.e_m1 as u64);
                entries.insert(
                    "iii_m1_bound".into(),
                    ConditionOutcome::from_bool(
                        next_sq <= bound,
                        format!("M_1 > 2^{}", state.profile.e_m1),
                    ),
                );
            }

            // (v) pair angle
            let pa = angle_at_least(&cut, &cut_next, &thr).map_err(num_from_lattice)?;
            entries.insert(
                "v_pair_angle".into(),
                ConditionOutcome::from_bool(
                    pa,
                    format!("angle(m_{nu}, m_{}) below 1/4 rad", nu + 1),
                ),
            );

            // planar covolume: M M′/2⁵ ≤ D ≤ M M′
            let d_plane = covolume2(&cut, &cut_next);
            let d2 = &d_plane * &d_plane;
            let mm = &m_sq * &next_sq;
            entries.insert(
                "vol_plane".into(),
                ConditionOutcome::from_bool(
                    &d2 <= &mm && (&d2 << 10u64) >= mm.clone(),
                    format!("D_{nu} outside [MM'/2^5, MM']"),
                ),
            );
            // spatial covolume: M M′/2⁵ ≤ d ≤ 2²·M M′ (x₀ components push d
            // above the planar bound by a bounded factor)
            let d_sub_sq = m.cross(m_next).norm_sq();
            entries.insert(
                "vol_sub".into(),
                ConditionOutcome::from_bool(
                    d_sub_sq <= (&mm << 4u64) && (&d_sub_sq << 10u64) >= mm,
                    format!("d_{nu} outside [MM'/2^5, 4MM']"),
                ),
            );
        }
        steps.push(StepConditions { nu, entries });
    }

    let overall = steps.iter().all(|s| s.entries.values().all(|o| o.pass));
    Ok(ConditionReport {
        steps,
        overall,
        derived,
    })
}

fn num_from_lattice(e: crate::lattice::LatticeError) -> VerifyError {
    VerifyError::Malformed(format!("lattice predicate failed: {e}"))
}

/// Outcome of the independent-vector bound for one test vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Lemma1Outcome {
    Holds,
    NotApplicable(String),
    Fails(String),
}

/// Check |ζ(m)| ≥ M^{−σ} for m independent of (m_ν, m_{ν+1}) with M in the
/// segment I_ν.
pub fn lemma1_bound_check(
    state: &ConstructionState,
    nu: usize,
    m: &IntVec3,
) -> Result<Lemma1Outcome, VerifyError> {
    if nu + 1 >= state.steps.len() {
        return Err(VerifyError::Malformed(format!(
            "lemma path needs steps {nu} and {}",
            nu + 1
        )));
    }
    if m.is_zero() {
        return Ok(Lemma1Outcome::NotApplicable("zero vector".into()));
    }
    if det3(m, &state.steps[nu].m, &state.steps[nu + 1].m).is_zero() {
        return Ok(Lemma1Outcome::NotApplicable("dependent triple".into()));
    }
    let mut bits = verify_bits(state).max(256);
    for _ in 0..6 {
        let consts = AlgebraicConstants::derive(bits)?;
        let seg = segment(state, nu, bits, &consts)?;
        let m_norm = sqrt_int(&m.cutten().norm_sq(), bits);
        if m_norm.hi() < seg.lo.lo() || m_norm.lo() > seg.hi.hi() {
            return Ok(Lemma1Outcome::NotApplicable("height outside segment".into()));
        }
        if !(m_norm.lo() >= seg.lo.hi() && m_norm.hi() <= seg.hi.lo()) {
            return Ok(Lemma1Outcome::NotApplicable(
                "height not certainly inside segment".into(),
            ));
        }
        let (a1, a2) = state
            .alpha_enclosure(bits)
            .map_err(VerifyError::Numeric)?;
        let zeta = RealEnclosure::from_bigint(&m.m0, bits)
            .add(&RealEnclosure::from_bigint(&m.m1, bits).mul(&a1))
            .add(&RealEnclosure::from_bigint(&m.m2, bits).mul(&a2))
            .abs();
        let floor = pow(&m_norm, &consts.sigma.neg())?;
        if zeta.lo() >= floor.hi() {
            return Ok(Lemma1Outcome::Holds);
        }
        if zeta.hi() < floor.lo() {
            return Ok(Lemma1Outcome::Fails(format!(
                "|zeta| <= {} < M^-sigma >= {}",
                zeta.hi().to_decimal_string(),
                floor.lo().to_decimal_string()
            )));
        }
        bits *= 2;
    }
    Err(VerifyError::PrecisionExhausted(format!(
        "lemma-1 comparison undecided at {bits} bits"
    )))
}

/// [`lemma1_bound_check`] over many vectors, hoisting the constants, the
/// segment, and the α enclosure out of the loop. A vector whose |ζ| beats
/// the worst-case floor over the whole segment (attained at the segment's
/// left end, since M^{−σ} decreases in M) is accepted without a per-vector
/// power; the rare remainder falls back to the single-vector escalation.
pub fn lemma1_bound_check_batch(
    state: &ConstructionState,
    nu: usize,
    ms: &[IntVec3],
) -> Result<Vec<Lemma1Outcome>, VerifyError> {
    if nu + 1 >= state.steps.len() {
        return Err(VerifyError::Malformed(format!(
            "lemma path needs steps {nu} and {}",
            nu + 1
        )));
    }
    let bits = verify_bits(state).max(256);
    let consts = AlgebraicConstants::derive(bits)?;
    let seg = segment(state, nu, bits, &consts)?;
    let (a1, a2) = state.alpha_enclosure(bits).map_err(VerifyError::Numeric)?;
    let floor_cap = pow(&seg.lo, &consts.sigma.neg())?;
    let m_nu = &state.steps[nu].m;
    let m_next = &state.steps[nu + 1].m;

    let mut out = Vec::with_capacity(ms.len());
    for m in ms {
        if m.is_zero() {
            out.push(Lemma1Outcome::NotApplicable("zero vector".into()));
            continue;
        }
        if det3(m, m_nu, m_next).is_zero() {
            out.push(Lemma1Outcome::NotApplicable("dependent triple".into()));
            continue;
        }
        let m_norm = sqrt_int(&m.cutten().norm_sq(), bits);
        if m_norm.hi() < seg.lo.lo() || m_norm.lo() > seg.hi.hi() {
            out.push(Lemma1Outcome::NotApplicable("height outside segment".into()));
            continue;
        }
        if !(m_norm.lo() >= seg.lo.hi() && m_norm.hi() <= seg.hi.lo()) {
            out.push(Lemma1Outcome::NotApplicable(
                "height not certainly inside segment".into(),
            ));
            continue;
        }
        let zeta = RealEnclosure::from_bigint(&m.m0, bits)
            .add(&RealEnclosure::from_bigint(&m.m1, bits).mul(&a1))
            .add(&RealEnclosure::from_bigint(&m.m2, bits).mul(&a2))
            .abs();
        if zeta.lo() >= floor_cap.hi() {
            out.push(Lemma1Outcome::Holds);
            continue;
        }
        out.push(lemma1_bound_check(state, nu, m)?);
    }
    Ok(out)
}

/// Segment I_ν = [(4 M_ν M_{ν+1})^{1/σ}, M_{ν+1}^τ / 8].
#[derive(Debug, Clone, Serialize)]
pub struct SegmentNu {
    pub nu: usize,
    pub lo: RealEnclosure,
    pub hi: RealEnclosure,
}

fn segment(
    state: &ConstructionState,
    nu: usize,
    bits: u32,
    consts: &AlgebraicConstants,
) -> Result<SegmentNu, VerifyError> {
    let m_sq = state.steps[nu].m.cutten().norm_sq();
    let next_sq = state.steps[nu + 1].m.cutten().norm_sq();
    let prod = RealEnclosure::from_bigint(&(&m_sq * &next_sq), bits);
    // (4 (M M')): (16 M² M'²)^{1/2} then ^{1/σ} — do it in one shot:
    // (2^4 M² M'²)^{1/(2·…)}; exponent 1/σ applied to 4MM' = (16 M²M'²)^{1/2}
    let inv_sigma = consts.sigma.recip()?;
    let half_inv_sigma = inv_sigma.mul_pow2(-1);
    let lo = pow(&prod.mul_pow2(4), &half_inv_sigma)?;
    let half_tau = consts.tau.mul_pow2(-1);
    let hi = pow(&RealEnclosure::from_bigint(&next_sq, bits), &half_tau)?.mul_pow2(-3);
    Ok(SegmentNu { nu, lo, hi })
}

/// Coverage report for the constructed prefix.
#[derive(Debug, Clone, Serialize)]
pub struct CoverageReport {
    pub segments: Vec<SegmentNu>,
    /// Certified lo < hi inside each segment.
    pub segments_ordered: bool,
    /// gaps[k] describes a certified break between segments k and k+1:
    /// (hi(I_k), lo(I_{k+1})) with hi < lo.
    pub gaps: Vec<(usize, Dyadic, Dyadic)>,
    /// Largest height H such that [from_height, H] is covered by the union
    /// of the prefix's segments starting at `from_height` (None when the
    /// first segment already starts above `from_height`).
    pub covered_up_to: Option<Dyadic>,
    pub from_height: Dyadic,
}

/// Compute all segments, check the §-style chaining inequality between
/// consecutive ones, and report honest gaps.
pub fn coverage_check(
    state: &ConstructionState,
    from_height: &Dyadic,
) -> Result<CoverageReport, VerifyError> {
    if state.steps.len() < 2 {
        return Err(VerifyError::Malformed("coverage needs at least 2 steps".into()));
    }
    let bits = verify_bits(state).max(256);
    let consts = AlgebraicConstants::derive(bits)?;
    let mut segments = Vec::new();
    for nu in 0..state.steps.len() - 1 {
        segments.push(segment(state, nu, bits, &consts)?);
    }
    let segments_ordered = segments
        .iter()
        .all(|s| s.lo.hi() < s.hi.lo());
    let mut gaps = Vec::new();
    for k in 0..segments.len().saturating_sub(1) {
        let chained = segments[k + 1].lo.hi() <= segments[k].hi.lo();
        if !chained && segments[k + 1].lo.lo() > segments[k].hi.hi() {
            gaps.push((
                k,
                segments[k].hi.hi().clone(),
                segments[k + 1].lo.lo().clone(),
            ));
        } else if !chained {
            // cannot certify either way; treat as a gap with the raw bounds
            gaps.push((
                k,
                segments[k].hi.lo().clone(),
                segments[k + 1].lo.hi().clone(),
            ));
        }
    }
    // walk the prefix from from_height
    let mut covered_up_to: Option<Dyadic> = None;
    for s in &segments {
        let reach = covered_up_to.clone().unwrap_or_else(|| from_height.clone());
        if s.lo.hi() <= &reach {
            let hi = s.hi.lo().clone();
            if covered_up_to.as_ref().map_or(true, |c| hi > *c) {
                covered_up_to = Some(hi);
            }
        }
    }
    Ok(CoverageReport {
        segments,
        segments_ordered,
        gaps,
        covered_up_to,
        from_height: from_height.clone(),
    })
}

/// One record of the positive-quadrant scan.
#[derive(Debug, Clone, Serialize)]
pub struct ScanRecord {
    pub m1: u64,
    pub m2: u64,
    pub height: u64,
    pub form_value: RealEnclosure,
    pub normalized: RealEnclosure,
}

impl ScanRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.m1,
            self.m2,
            self.height,
            self.form_value.lo().to_decimal_string(),
            self.form_value.hi().to_decimal_string(),
            self.normalized.lo().to_decimal_string(),
            self.normalized.hi().to_decimal_string()
        )
    }
}

pub const SCAN_CSV_HEADER: &str = "m1,m2,height,form_lo,form_hi,normalized_lo,normalized_hi";

/// Result of the full quadrant scan.
#[derive(Debug, Clone, Serialize)]
pub struct ScanOutcome {
    pub min_normalized: ScanRecord,
    /// Exact records strictly below the floor (expected empty).
    pub below_floor: Vec<ScanRecord>,
}

/// Scan all (m₁, m₂) with 0 ≤ m₁, m₂ ≤ height_max, (0,0) excluded.
///
/// A double-precision screen flags candidates near the floor or near the
/// running minimum; every flagged pair is re-evaluated with exact interval
/// arithmetic, so the screen can only cost extra work, never correctness.
pub fn theorem_scan(
    alpha: (&RealEnclosure, &RealEnclosure),
    height_max: u64,
    sigma_prime: &RealEnclosure,
    constant_floor: Option<&RealEnclosure>,
    threads: Option<usize>,
) -> Result<ScanOutcome, VerifyError> {
    if height_max < 1 {
        return Err(VerifyError::Malformed("height_max must be >= 1".into()));
    }
    let (a1, a2) = alpha;
    let width_bound = a1.width().max(a2.width());
    let hm = Dyadic::from_bigint(BigInt::from(height_max));
    if width_bound.mul(&hm) >= Dyadic::pow2(-8) {
        return Err(VerifyError::EnclosureTooWide(format!(
            "alpha width {} too wide for height {height_max}",
            width_bound.to_decimal_string()
        )));
    }
    let a1f = a1.to_f64_mid();
    let a2f = a2.to_f64_mid();
    let sig = sigma_prime.to_f64_mid();
    let floor_f = constant_floor.map(|c| c.to_f64_mid()).unwrap_or(0.0);
    // h^σ' per height, hoisted out of the quadratic loop
    let h_pow: Vec<f64> = (0..=height_max).map(|h| (h as f64).powf(sig)).collect();

    // per-row double-precision pass: collect flagged pairs
    let flagged: Vec<(u64, u64)> = parallel::rows_collect(0..=height_max, threads, |m1| {
        let mut out = Vec::new();
        let mut row_best = f64::INFINITY;
        let base = m1 as f64 * a1f;
        for m2 in 0..=height_max {
            if m1 == 0 && m2 == 0 {
                continue;
            }
            let v = base + m2 as f64 * a2f;
            let form = (v - v.round()).abs();
            let hp = h_pow[m1.max(m2) as usize];
            let normalized = form * hp;
            // conservative screen: the absolute f64 error of `form` is a
            // few ulps of |v| ≤ 4·10⁵, so hp·2^{-30} dominates it; flag
            // anything within a 4× band of the floor or near the row
            // minimum
            if normalized < 4.0 * floor_f + hp * 2.0_f64.powi(-30) {
                out.push((m1, m2));
            } else if normalized < row_best * 1.01 + hp * 2.0_f64.powi(-29) {
                row_best = normalized.min(row_best);
                out.push((m1, m2));
            }
        }
        out
    });

    // second double-precision pass: of the flagged pairs only those that
    // can plausibly be the global minimum or sit inside the floor band
    // need exact arithmetic; the per-pair margin hp·2^{-29} again
    // dominates the f64 evaluation error
    let norm_f = |m1: u64, m2: u64| {
        let v = m1 as f64 * a1f + m2 as f64 * a2f;
        (v - v.round()).abs() * h_pow[m1.max(m2) as usize]
    };
    let gmin = flagged
        .iter()
        .map(|&(m1, m2)| norm_f(m1, m2))
        .fold(f64::INFINITY, f64::min);
    let flagged: Vec<(u64, u64)> = flagged
        .into_iter()
        .filter(|&(m1, m2)| {
            let hp = h_pow[m1.max(m2) as usize];
            let n = norm_f(m1, m2);
            n <= gmin + hp * 2.0_f64.powi(-29) || n < 4.0 * floor_f + hp * 2.0_f64.powi(-30)
        })
        .collect();

    // exact re-evaluation of every surviving pair
    let bits = a1.bits();
    let mut min_rec: Option<(Dyadic, u64, u64, ScanRecord)> = None;
    let mut below = Vec::new();
    for (m1, m2) in flagged {
        let rec = exact_record(a1, a2, sigma_prime, m1, m2, bits)?;
        if let Some(floor) = constant_floor {
            if rec.normalized.hi() < floor.lo() {
                below.push(rec.clone());
            } else if !(rec.normalized.lo() >= floor.hi()) && rec.normalized.lo() < floor.lo() {
                return Err(VerifyError::EnclosureTooWide(format!(
                    "record ({m1},{m2}) straddles the floor"
                )));
            }
        }
        let key = rec.normalized.lo().clone();
        let better = match &min_rec {
            None => true,
            Some((k, bm1, bm2, _)) => {
                (key.clone(), m1, m2) < (k.clone(), *bm1, *bm2)
            }
        };
        if better {
            min_rec = Some((key, m1, m2, rec));
        }
    }
    below.sort_by_key(|r| (r.m1, r.m2));
    let min_normalized = min_rec
        .map(|(_, _, _, r)| r)
        .ok_or_else(|| VerifyError::Malformed("scan produced no records".into()))?;
    Ok(ScanOutcome {
        min_normalized,
        below_floor: below,
    })
}

fn exact_record(
    a1: &RealEnclosure,
    a2: &RealEnclosure,
    sigma_prime: &RealEnclosure,
    m1: u64,
    m2: u64,
    bits: u32,
) -> Result<ScanRecord, VerifyError> {
    let v = RealEnclosure::from_int(m1 as i64, bits)
        .mul(a1)
        .add(&RealEnclosure::from_int(m2 as i64, bits).mul(a2));
    let form = v.nearest_int_dist().map_err(|e| {
        VerifyError::EnclosureTooWide(format!("({m1},{m2}): {e}"))
    })?;
    let height = m1.max(m2);
    let h_pow = pow(
        &RealEnclosure::from_int(height as i64, bits),
        sigma_prime,
    )?;
    let normalized = form.mul(&h_pow);
    Ok(ScanRecord {
        m1,
        m2,
        height,
        form_value: form,
        normalized,
    })
}

/// A violation found by the dependent-vector enumeration.
#[derive(Debug, Clone, Serialize)]
pub struct Lemma2Violation {
    pub lambda: i64,
    pub mu: i64,
    pub reason: String,
}

/// Report of the dependent-vector enumeration on the pair (ν, ν+1).
#[derive(Debug, Clone, Serialize)]
pub struct Lemma2Report {
    pub nu: usize,
    pub checked: u64,
    pub kept: u64,
    pub mu_zero_kept: u64,
    pub violations: Vec<Lemma2Violation>,
}

/// Enumerate m = λ m_ν + μ m_{ν+1} over |λ| ≤ lambda_range, |μ| ≤ mu_range,
/// keep the positive-quadrant vectors, and check the profile-derived floor
/// plus the intermediate layer-distance inequality.
pub fn lemma2_enumerate(
    state: &ConstructionState,
    nu: usize,
    lambda_range: i64,
    mu_range: i64,
    threads: Option<usize>,
) -> Result<Lemma2Report, VerifyError> {
    if nu + 1 >= state.steps.len() {
        return Err(VerifyError::Malformed(format!(
            "lemma path needs steps {nu} and {}",
            nu + 1
        )));
    }
    let derived = derived_constants(&state.profile)?;
    let bits = verify_bits(state).max(320);
    let consts = AlgebraicConstants::derive(bits)?;
    let (a1, a2) = state.alpha_enclosure(bits).map_err(VerifyError::Numeric)?;
    let m_nu = state.steps[nu].m.clone();
    let m_next = state.steps[nu + 1].m.clone();
    let d_plane = covolume2(&m_nu.cutten(), &m_next.cutten());
    let m_nu_sq = m_nu.cutten().norm_sq();
    let floor_c = Dyadic::pow2(derived.lemma2_floor_log2);

    // precompute ζ_ν, ζ_{ν+1} and the f64 midpoints
    let zeta_of = |m: &IntVec3| -> RealEnclosure {
        RealEnclosure::from_bigint(&m.m0, bits)
            .add(&RealEnclosure::from_bigint(&m.m1, bits).mul(&a1))
            .add(&RealEnclosure::from_bigint(&m.m2, bits).mul(&a2))
    };
    let z_nu = zeta_of(&m_nu);
    let z_next = zeta_of(&m_next);
    let z_nu_f = z_nu.to_f64_mid();
    let z_next_f = z_next.to_f64_mid();
    let sig_f = consts.sigma.to_f64_mid();
    let floor_f = floor_c.to_f64();
    let c1f: f64 = m_nu.cutten().m1.to_string().parse().unwrap_or(0.0);
    let c2f: f64 = m_nu.cutten().m2.to_string().parse().unwrap_or(0.0);
    let n1f: f64 = m_next.cutten().m1.to_string().parse().unwrap_or(0.0);
    let n2f: f64 = m_next.cutten().m2.to_string().parse().unwrap_or(0.0);

    #[derive(Default)]
    struct Row {
        checked: u64,
        kept: u64,
        mu_zero_kept: u64,
        flags: Vec<(i64, i64)>,
    }
    let rows: Vec<Row> = parallel::rows_collect(0..=(2 * mu_range as u64), threads, |r| {
        let mu = r as i64 - mu_range;
        let mut row = Row::default();
        for lam in -lambda_range..=lambda_range {
            if lam == 0 && mu == 0 {
                continue;
            }
            row.checked += 1;
            let v1 = lam as f64 * c1f + mu as f64 * n1f;
            let v2 = lam as f64 * c2f + mu as f64 * n2f;
            if v1 < 0.0 || v2 < 0.0 {
                continue;
            }
            row.kept += 1;
            if mu == 0 {
                row.mu_zero_kept += 1;
                row.flags.push((lam, mu));
                continue;
            }
            // f64 screen of |ζ| ≥ floor·M^{−σ}; flag anything within 4×
            let zf = (lam as f64 * z_nu_f + mu as f64 * z_next_f).abs();
            let hf = v1.max(v2).max(1.0);
            if zf * hf.powf(sig_f) < 4.0 * floor_f {
                row.flags.push((lam, mu));
            }
        }
        vec![row]
    });

    let mut checked = 0;
    let mut kept = 0;
    let mut mu_zero_kept = 0;
    let mut violations = Vec::new();
    for row in &rows {
        checked += row.checked;
        kept += row.kept;
        mu_zero_kept += row.mu_zero_kept;
    }
    for row in rows {
        for (lam, mu) in row.flags {
            let m = m_nu
                .scale(&BigInt::from(lam))
                .add(&m_next.scale(&BigInt::from(mu)));
            let cut = m.cutten();
            if cut.m1.is_negative() || cut.m2.is_negative() {
                continue; // f64 sign screen was conservative
            }
            if mu == 0 {
                if !cut.is_zero() {
                    violations.push(Lemma2Violation {
                        lambda: lam,
                        mu,
                        reason: "non-zero positive-quadrant vector on the mu = 0 line".into(),
                    });
                }
                continue;
            }
            // intermediate inequality: max(m1,m2) ≥ |μ| D_ν / (2 M_ν),
            // exact in ℤ via squares
            let mx = cut.m1.clone().max(cut.m2.clone());
            let lhs = (&mx * &mx) << 2u64;
            let mu_big = BigInt::from(mu.abs());
            let rhs_num = (&mu_big * &mu_big) * (&d_plane * &d_plane);
            if &lhs * &m_nu_sq < rhs_num {
                violations.push(Lemma2Violation {
                    lambda: lam,
                    mu,
                    reason: "layer-distance inequality max(m1,m2) >= |mu| D/(2M) fails".into(),
                });
                continue;
            }
            // exact floor check
            let zeta = z_nu
                .mul(&RealEnclosure::from_int(lam, bits))
                .add(&z_next.mul(&RealEnclosure::from_int(mu, bits)))
                .abs();
            let m_norm = sqrt_int(&cut.norm_sq(), bits);
            let floor = pow(&m_norm, &consts.sigma.neg())?
                .mul(&RealEnclosure::exact(floor_c.clone(), bits));
            if zeta.hi() < floor.lo() {
                violations.push(Lemma2Violation {
                    lambda: lam,
                    mu,
                    reason: format!(
                        "|zeta| = {} below floor {}",
                        zeta.hi().to_decimal_string(),
                        floor.lo().to_decimal_string()
                    ),
                });
            } else if zeta.lo() < floor.hi() && zeta.hi() >= floor.lo() && zeta.lo() < floor.lo()
            {
                // undecided at this precision: report as a violation rather
                // than silently passing
                violations.push(Lemma2Violation {
                    lambda: lam,
                    mu,
                    reason: "floor comparison undecided".into(),
                });
            }
        }
    }
    violations.sort_by_key(|v| (v.mu, v.lambda));
    Ok(Lemma2Report {
        nu,
        checked,
        kept,
        mu_zero_kept,
        violations,
    })
}

/// True iff no non-zero (m₀, m₁, m₂) with all |coefficients| ≤ bound has
/// m₀ + m₁α₁ + m₂α₂ = 0 (certified: the enclosure of every candidate value
/// excludes zero).
pub fn independence_check(
    alpha: (&RealEnclosure, &RealEnclosure),
    coeff_bound: i64,
) -> Result<bool, VerifyError> {
    if coeff_bound == 0 {
        return Ok(true);
    }
    let (a1, a2) = alpha;
    let bound_dy = Dyadic::from_int(8 * coeff_bound);
    if a1.width().mul(&bound_dy) >= Dyadic::one()
        || a2.width().mul(&bound_dy) >= Dyadic::one()
    {
        return Err(VerifyError::EnclosureTooWide(
            "alpha width too large for the coefficient bound".into(),
        ));
    }
    let bits = a1.bits();
    for m1 in -coeff_bound..=coeff_bound {
        for m2 in -coeff_bound..=coeff_bound {
            let v = RealEnclosure::from_int(m1, bits)
                .mul(a1)
                .add(&RealEnclosure::from_int(m2, bits).mul(a2));
            // the only integer m₀ that could cancel v is -round(v)
            let m0 = -v.midpoint().round_int();
            if m0.abs() > BigInt::from(coeff_bound) {
                continue;
            }
            if m0.is_zero() && m1 == 0 && m2 == 0 {
                continue;
            }
            let total = v.add(&RealEnclosure::from_bigint(&m0, bits));
            if total.contains_zero() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Deterministic pseudo-random independent vectors with height certified
/// inside the segment I_ν (for the brute-force oracle suite).
pub fn sample_segment_vectors(
    state: &ConstructionState,
    nu: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<IntVec3>, VerifyError> {
    if nu + 1 >= state.steps.len() {
        return Err(VerifyError::Malformed("segment needs two steps".into()));
    }
    let bits = verify_bits(state).max(256);
    let consts = AlgebraicConstants::derive(bits)?;
    let seg = segment(state, nu, bits, &consts)?;
    // sample heights in the certified-interior dyadic range
    let lo_f = seg.lo.hi().to_f64();
    let hi_f = seg.hi.lo().to_f64();
    if !(lo_f.is_finite() && hi_f.is_finite() && lo_f < hi_f) {
        return Err(VerifyError::EnclosureTooWide(
            "segment endpoints not separable in double precision".into(),
        ));
    }
    let mut out = Vec::with_capacity(count);
    let mut x = seed ^ 0x9e37_79b9_7f4a_7c15;
    let mut next_u64 = move || {
        // xorshift64*
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        x.wrapping_mul(0x2545_f491_4f6c_dd1d)
    };
    let m_nu = &state.steps[nu].m;
    let m_next = &state.steps[nu + 1].m;
    while out.len() < count {
        let u = (next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        // log-uniform height target inside the open segment
        let target = (lo_f.ln() + u * (hi_f.ln() - lo_f.ln())).exp();
        let ang = (next_u64() >> 11) as f64 / (1u64 << 53) as f64 * std::f64::consts::TAU;
        let m1 = (target * ang.cos()).round();
        let m2 = (target * ang.sin()).round();
        if m1 == 0.0 && m2 == 0.0 {
            continue;
        }
        let m0 = (next_u64() % 7) as i64 - 3;
        let cand = IntVec3::from_bigints(
            BigInt::from(m0),
            BigInt::from(m1 as i64),
            BigInt::from(m2 as i64),
        );
        if det3(&cand, m_nu, m_next).is_zero() {
            continue;
        }
        // certify the height inside the segment
        let m_norm = sqrt_int(&cand.cutten().norm_sq(), bits);
        if !(m_norm.lo() >= seg.lo.hi() && m_norm.hi() <= seg.hi.lo()) {
            continue;
        }
        out.push(cand);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::run;

    fn scaled_state(steps: usize) -> ConstructionState {
        run(ParameterProfile::scaled(), steps, 0).expect("construction")
    }

    #[test]
    fn derived_constants_scaled_and_paper() {
        let d = derived_constants(&ParameterProfile::scaled()).unwrap();
        // A+z+1 = 10, e_H/(στ−1) ≈ 2.15, Aσ ≈ 11.68 → ceil ≈ 24
        assert_eq!(d.lemma2_floor_log2, -24);
        assert!(!d.coverage_chains);
        let p = derived_constants(&ParameterProfile::paper()).unwrap();
        // A+z+1 = 12, 9/(στ−1) ≈ 6.45, Aσ ≈ 11.68 → ceil ≈ 31
        assert_eq!(p.lemma2_floor_log2, -31);
        assert!(p.coverage_chains);
    }

    #[test]
    fn conditions_pass_on_constructed_state() {
        let st = scaled_state(4);
        let report = check_conditions(&st).unwrap();
        assert!(report.overall, "failure: {:?}", report.first_failure());
    }

    #[test]
    fn conditions_pass_after_round_trip() {
        let st = scaled_state(3);
        let st2 = ConstructionState::from_json(&st.to_json()).unwrap();
        assert!(check_conditions(&st2).unwrap().overall);
    }

    #[test]
    fn planted_doubling_breaks_completeness() {
        let mut st = scaled_state(3);
        let two = BigInt::from(2);
        st.steps[2].m = st.steps[2].m.scale(&two);
        let report = check_conditions(&st);
        // the doubled vector is either caught structurally or fails (i)
        match report {
            Ok(r) => {
                assert!(!r.overall);
                let (_, name, _) = r.first_failure().unwrap();
                assert!(name.starts_with("i_") || name.starts_with("iii"));
            }
            Err(_) => {}
        }
    }

    #[test]
    fn planted_axis_vector_breaks_angle() {
        let mut st = scaled_state(3);
        let last = st.steps.len() - 1;
        // replace the final vector by an (M, 1)-direction impostor with a
        // similar height: hugs the first axis
        let m_sq = st.steps[last].m.cutten().norm_sq();
        let m_approx = m_sq.sqrt();
        st.steps[last].m = IntVec3::from_bigints(
            st.steps[last].m.m0.clone(),
            m_approx,
            BigInt::one(),
        );
        let report = check_conditions(&st).unwrap();
        assert!(!report.overall);
        let bad: Vec<_> = report
            .steps
            .iter()
            .flat_map(|s| s.entries.iter())
            .filter(|(_, o)| !o.pass)
            .map(|(n, _)| n.clone())
            .collect();
        assert!(
            bad.iter().any(|n| n.contains("axis") || n.contains("signs")),
            "failed: {bad:?}"
        );
    }

    #[test]
    fn lemma1_dependent_vectors_not_applicable() {
        let st = scaled_state(3);
        let m_nu = st.steps[1].m.clone();
        let m_sum = st.steps[1].m.add(&st.steps[2].m);
        assert!(matches!(
            lemma1_bound_check(&st, 1, &m_nu).unwrap(),
            Lemma1Outcome::NotApplicable(_)
        ));
        assert!(matches!(
            lemma1_bound_check(&st, 1, &m_sum).unwrap(),
            Lemma1Outcome::NotApplicable(_)
        ));
    }

    #[test]
    fn lemma1_holds_on_sampled_vectors() {
        let st = scaled_state(4);
        let samples = sample_segment_vectors(&st, 2, 100, 7).unwrap();
        for m in samples {
            match lemma1_bound_check(&st, 2, &m).unwrap() {
                Lemma1Outcome::Holds | Lemma1Outcome::NotApplicable(_) => {}
                Lemma1Outcome::Fails(w) => panic!("lemma-1 failed for {m:?}: {w}"),
            }
        }
    }

    #[test]
    fn lemma2_no_violations_small_range() {
        let st = scaled_state(4);
        // the norm ratio M_3/M_2 is ~600, so positive-quadrant combinations
        // need |λ| of that order before any (λ, μ≠0) survives the signs
        let report = lemma2_enumerate(&st, 2, 1000, 5, None).unwrap();
        assert_eq!(report.mu_zero_kept, 0, "mu = 0 sign exclusion");
        assert!(report.violations.is_empty(), "{:?}", report.violations);
        assert!(report.kept > 0);
    }

    #[test]
    fn coverage_reports_segments_and_gaps() {
        let st = scaled_state(5);
        let report = coverage_check(&st, &Dyadic::from_int(1 << 20)).unwrap();
        assert!(report.segments_ordered);
        // the scaled profile's e_H = 3 < 3 + 3σ cannot chain: gaps expected
        assert!(!report.gaps.is_empty());
    }

    #[test]
    fn theorem_scan_tiny_heights() {
        let bits = 256;
        let st = scaled_state(3);
        let (a1, a2) = st.alpha_enclosure(bits).unwrap();
        let consts = AlgebraicConstants::derive(bits).unwrap();
        let out = theorem_scan((&a1, &a2), 1, &consts.sigma, None, None).unwrap();
        // candidates (0,1), (1,0), (1,1): the minimum is among them
        assert!(out.min_normalized.height == 1);
        assert!(out.below_floor.is_empty());
    }

    #[test]
    fn theorem_scan_monotone_in_height() {
        let bits = 256;
        let st = scaled_state(3);
        let (a1, a2) = st.alpha_enclosure(bits).unwrap();
        let consts = AlgebraicConstants::derive(bits).unwrap();
        let m100 = theorem_scan((&a1, &a2), 100, &consts.sigma, None, None)
            .unwrap()
            .min_normalized;
        let m1000 = theorem_scan((&a1, &a2), 1000, &consts.sigma, None, None)
            .unwrap()
            .min_normalized;
        assert!(m1000.normalized.lo() <= m100.normalized.lo());
    }

    #[test]
    fn scan_rational_degenerate_case() {
        let bits = 192;
        let half = RealEnclosure::from_ratio(&BigInt::one(), &BigInt::from(2), bits);
        let consts = AlgebraicConstants::derive(bits).unwrap();
        let out = theorem_scan((&half, &half), 1, &consts.sigma, None, None).unwrap();
        // (1,1): 1/2 + 1/2 = 1 → form 0, the unique zero at height 1
        assert_eq!(out.min_normalized.m1, 1);
        assert_eq!(out.min_normalized.m2, 1);
        assert!(out.min_normalized.form_value.hi().is_zero());
    }

    #[test]
    fn independence_of_constructed_alpha() {
        let st = scaled_state(4);
        let (a1, a2) = st.alpha_enclosure(512).unwrap();
        assert!(independence_check((&a1, &a2), 100).unwrap());
    }

    #[test]
    fn independence_rejects_rationals() {
        let bits = 256;
        let third = RealEnclosure::from_ratio(&BigInt::one(), &BigInt::from(3), bits);
        let seventh = RealEnclosure::from_ratio(&BigInt::one(), &BigInt::from(7), bits);
        assert!(!independence_check((&third, &seventh), 21).unwrap());
        assert!(independence_check((&third, &seventh), 0).unwrap());
    }
}
