//! One inductive step: layer selection in the sublattice, disk search for
//! the next vector, exact filtering, and the certified cap update.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::vec3::{dy_dist_sq, dy_dot, dy_of_int, EncVec3};
use super::{
    working_bits, ConstructError, ConstructionState, SphericalCap, StepGeometry, StepRecord,
};
use crate::constants::AlgebraicConstants;
use crate::lattice::{
    angle_at_least, complete_to_basis_near, covolume2, is_complete_pair, is_primitive, IntVec2,
    IntVec3,
};
use crate::numerics::{pow, sqrt, sqrt_int, Dir, Dyadic, RealEnclosure};

/// Why a candidate was rejected; the step reports per-reason counts when
/// the search exhausts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Reject {
    NotPrimitive,
    NotComplete,
    GapTooSmall,
    NormWindow,
    SameSigns,
    AxisAngle,
    PairAngle,
    CovolumePlane,
    CovolumeSub,
    Cap,
}

/// Rejection tallies for diagnostics.
#[derive(Debug, Default, Clone)]
pub struct SearchDiagnostics {
    counts: Vec<(String, usize)>,
}

impl SearchDiagnostics {
    fn bump(&mut self, label: &str) {
        if let Some(e) = self.counts.iter_mut().find(|(l, _)| l == label) {
            e.1 += 1;
        } else {
            self.counts.push((label.to_string(), 1));
        }
    }

    pub fn summary(&self) -> String {
        if self.counts.is_empty() {
            return "no candidates found in disk".into();
        }
        let mut parts: Vec<String> = self
            .counts
            .iter()
            .map(|(l, c)| format!("{l}: {c}"))
            .collect();
        parts.sort();
        parts.join(", ")
    }
}

fn reject_label(r: Reject) -> &'static str {
    match r {
        Reject::NotPrimitive => "not primitive",
        Reject::NotComplete => "incomplete pair",
        Reject::GapTooSmall => "growth gap",
        Reject::NormWindow => "H-window",
        Reject::SameSigns => "sign condition",
        Reject::AxisAngle => "axis angle",
        Reject::PairAngle => "pair angle",
        Reject::CovolumePlane => "plane covolume",
        Reject::CovolumeSub => "sublattice covolume",
        Reject::Cap => "cap certificate",
    }
}

/// H = M^{στ−1} / 2^{e_H}.
pub(crate) fn h_of(
    m_norm: &RealEnclosure,
    profile: &super::ParameterProfile,
    consts: &AlgebraicConstants,
) -> Result<RealEnclosure, ConstructError> {
    let bits = m_norm.bits();
    let e = consts.st_minus_1().with_bits(bits);
    Ok(pow(m_norm, &e)?.mul_pow2(-(profile.e_h as i64)))
}

/// M^{−ω}.
fn inv_pow_omega(
    m_norm: &RealEnclosure,
    consts: &AlgebraicConstants,
) -> Result<RealEnclosure, ConstructError> {
    let bits = m_norm.bits();
    let omega = consts.omega.with_bits(bits);
    Ok(pow(m_norm, &omega)?.recip()?)
}

/// Successful cap update bundle.
pub struct CapUpdate {
    pub cap: SphericalCap,
    /// ζ_ν enclosure valid on the whole new cap.
    pub zeta: RealEnclosure,
    /// M_{ν+1} = |m̄_{ν+1}|.
    pub m_next_norm: RealEnclosure,
    /// Unit normal of span(**m**_ν, **m**_{ν+1}).
    pub xi: EncVec3,
    pub slab_level: RealEnclosure,
    pub cylinder_radius: RealEnclosure,
}

/// Internal search context produced by [`layer_and_disk`].
pub struct DiskContext {
    pub geometry: StepGeometry,
    pub bits: u32,
    h: RealEnclosure,
}

/// Build the layer index μ*, the disk center w_ν and the disk radius for
/// the current step (requires at least two recorded vectors).
pub fn layer_and_disk(state: &ConstructionState) -> Result<DiskContext, ConstructError> {
    let nu = state.last_index();
    if nu < 1 {
        return Err(ConstructError::DegenerateGeometry(
            "layer machinery needs two vectors; the bootstrap handles step one".into(),
        ));
    }
    let m_prev = &state.steps[nu - 1].m;
    let m_cur = &state.steps[nu].m;

    // size the working precision from a coarse H estimate
    let coarse_consts = AlgebraicConstants::derive(256)?;
    let m_cur_norm_coarse = sqrt_int(&m_cur.cutten().norm_sq(), 256);
    let h_coarse = h_of(&m_cur_norm_coarse, &state.profile, &coarse_consts)?;
    let h_log2 = h_coarse.hi().log2_floor().max(1) as u64;
    let bits = working_bits(2 * (h_log2 + 2));
    let consts = AlgebraicConstants::derive(bits.max(256))?;

    let m_cur_norm = sqrt_int(&m_cur.cutten().norm_sq(), bits);
    let h = h_of(&m_cur_norm, &state.profile, &consts)?;

    let cr = m_prev.cross(m_cur);

    let eta = state.cap.center.with_bits(bits);
    let u = EncVec3::from_int(m_prev, bits).cross(&eta).unit().map_err(|_| {
        ConstructError::DegenerateGeometry("cap center is parallel to the previous vector".into())
    })?;
    let nu_n = eta.cross(&u).unit()?;
    let denom = nu_n.dot_int(&cr);
    if denom.contains_zero() {
        return Err(ConstructError::DegenerateGeometry(
            "tangent plane normal is parallel to the layer plane".into(),
        ));
    }
    // layer-1 normal point: the affine layer at index μ meets {w·η = 0} in
    // a line μ·base + t·ℓ with ℓ = η × (layer normal)
    let base = nu_n.scale(&denom.recip()?);
    let ell = eta
        .cross(&EncVec3::from_int(&cr, bits).unit()?)
        .unit()
        .map_err(|_| {
            ConstructError::DegenerateGeometry("cap center is normal to the layer plane".into())
        })?;

    // Joint (μ, t) placement. The paper's normal point at the rounded layer
    // index lands in the Eq.-(8) annulus only when the real-valued index is
    // already close to an integer; at desk scale it is a small number with
    // large rounding error, so instead search layer indices 1..=8 and slide
    // along each layer line, minimising the angular deviation of the cutten
    // center from the m̄_{ν−1} line subject to |w̄| ∈ [17/16·H, 31/16·H].
    // Direction inheritance keeps the axis/pair angle conditions stable.
    let div_bits = (bits / 2).max(160);
    let bm = base.mid();
    let lm = ell.mid();
    let prev_cut = m_prev.cutten();
    let pm1 = Dyadic::from_bigint(prev_cut.m1.clone());
    let pm2 = Dyadic::from_bigint(prev_cut.m2.clone());
    let hm = h.midpoint();
    let hm_sq = hm.mul(&hm);
    let lo_sq = hm_sq.mul(&Dyadic::new(BigInt::from(1156), -10));
    let hi_sq = hm_sq.mul(&Dyadic::new(BigInt::from(3844), -10));
    // annulus radius samples 9/8, 5/4, 11/8, 3/2, 13/8, 7/4, 15/8 (×H)
    let radius_sq_targets: Vec<Dyadic> = [81i64, 100, 121, 144, 169, 196, 225]
        .iter()
        .map(|n| hm_sq.mul(&Dyadic::new(BigInt::from(*n), -6)))
        .collect();
    let a2 = lm[1].mul(&lm[1]).add(&lm[2].mul(&lm[2]));
    let lb = lm[1].mul(&pm2).sub(&lm[2].mul(&pm1));
    // Adapt the layer range to the norm of the layer-1 crossing point: the
    // layer-μ crossing sits at exactly μ times that norm, so aim the range
    // at the integers whose multiple lands inside the annulus.
    let mut mus: Vec<i64> = (1..=8).collect();
    if !lb.is_zero() {
        let t1 = bm[1]
            .mul(&pm2)
            .sub(&bm[2].mul(&pm1))
            .neg()
            .div(&lb, div_bits, Dir::Down);
        let c1 = bm[1].add(&t1.mul(&lm[1]));
        let c2 = bm[2].add(&t1.mul(&lm[2]));
        let n1r = (c1.mul(&c1).add(&c2.mul(&c2)).to_f64() / hm_sq.to_f64()).sqrt();
        if n1r.is_finite() && n1r > 1e-9 {
            let lo = ((1.07 / n1r).floor() as i64).max(1);
            let hi = ((1.93 / n1r).ceil() as i64).min(lo + 63);
            for mu in lo..=hi {
                if !mus.contains(&mu) {
                    mus.push(mu);
                }
            }
        }
    }
    let mut best: Option<(Dyadic, i64, Dyadic)> = None;
    for mu in mus {
        let mud = Dyadic::from_int(mu);
        let p1 = bm[1].mul(&mud);
        let p2 = bm[2].mul(&mud);
        let mut ts: Vec<Dyadic> = Vec::new();
        // exact-direction crossing: cross(p̄ + t·ℓ̄, m̄_{ν−1}) = 0
        if !lb.is_zero() {
            let b0 = p1.mul(&pm2).sub(&p2.mul(&pm1));
            ts.push(b0.neg().div(&lb, div_bits, Dir::Down));
        }
        // annulus radius roots: |p̄ + t·ℓ̄|² = r²  for each sampled r
        let bq = p1.mul(&lm[1]).add(&p2.mul(&lm[2]));
        let c00 = p1.mul(&p1).add(&p2.mul(&p2));
        for r_sq in &radius_sq_targets {
            let cq = c00.sub(r_sq);
            let disc = bq.mul(&bq).sub(&a2.mul(&cq));
            if disc.is_positive() {
                let root =
                    Dyadic::from_bigint(disc.mul_pow2(64).floor_int().sqrt()).mul_pow2(-32);
                ts.push(bq.neg().add(&root).div(&a2, div_bits, Dir::Down));
                ts.push(bq.neg().sub(&root).div(&a2, div_bits, Dir::Down));
            }
        }
        for t in ts {
            let c1 = p1.add(&t.mul(&lm[1]));
            let c2 = p2.add(&t.mul(&lm[2]));
            let n2 = c1.mul(&c1).add(&c2.mul(&c2));
            if n2 < lo_sq || n2 > hi_sq {
                continue;
            }
            let cross = c1.mul(&pm2).sub(&c2.mul(&pm1));
            let dev_sq = cross.mul(&cross).div(&n2, div_bits, Dir::Up);
            let key = (dev_sq, mu, t);
            if best.as_ref().is_none_or(|b| key < *b) {
                best = Some(key);
            }
        }
    }
    let (_, mu_chosen, t_star) = best.ok_or_else(|| {
        ConstructError::DegenerateGeometry(
            "no layer line placement reaches the norm annulus".into(),
        )
    })?;
    let mu_star = BigInt::from(mu_chosen);
    let w_center = base
        .scale(&RealEnclosure::from_bigint(&mu_star, bits))
        .add(&ell.scale(&RealEnclosure::exact(t_star, bits)));
    let disk_radius = h.mul_pow2(-(state.profile.e_disk as i64));

    // provisional slab data sized with the upper norm bound 2H (finalized
    // with the true M_{ν+1} when a candidate is accepted)
    let inv_2h_omega = inv_pow_omega(&h.mul_pow2(1), &consts)?;
    let geometry = StepGeometry {
        xi: EncVec3::from_int(&cr, bits).unit()?,
        plane0: m_cur.clone(),
        slab_level: inv_2h_omega.mul_pow2(-1),
        cylinder_radius: inv_2h_omega.div(&m_cur_norm)?,
        mu_star,
        w_center,
        disk_radius,
    };
    Ok(DiskContext {
        geometry,
        bits,
        h,
    })
}

/// Enumerate layer lattice points inside the disk that also admit a cap
/// update (the thin band |c·η| ≤ |c|·r_ν/2), pre-filtered for completeness,
/// sorted nearest-first to the disk center with lexicographic tie-break.
pub fn candidate_search(
    state: &ConstructionState,
    ctx: &DiskContext,
) -> Result<Vec<IntVec3>, ConstructError> {
    let nu = state.last_index();
    let m_prev = &state.steps[nu - 1].m;
    let m_cur = &state.steps[nu].m;
    let bits = ctx.bits;
    let geom = &ctx.geometry;

    let n = complete_to_basis_near(m_prev, m_cur, &BigInt::zero(), &BigInt::zero())?;
    let base = n.scale(&geom.mu_star);

    let eta = state.cap.center.with_bits(bits);
    let eta_mid = eta.mid();
    let w_mid = geom.w_center.mid();
    let base_dy = dy_of_int(&base);
    let prev_dy = dy_of_int(m_prev);
    let cur_dy = dy_of_int(m_cur);

    // band parameters: c·η = base·η + a·(m_prev·η), independent of b since
    // m_cur ⊥ η by cap construction
    let sp = dy_dot(&prev_dy, &eta_mid);
    if sp.is_zero() {
        return Err(ConstructError::DegenerateGeometry(
            "previous slab level vanished".into(),
        ));
    }
    let div_bits = (bits / 2).max(160);
    let bdot = dy_dot(&base_dy, &eta_mid);
    let a_band = bdot.neg().div(&sp, div_bits, Dir::Down).round_int();
    let band_val = ctx.h.lo().mul(&state.cap.radius).mul_pow2(-1);
    let mut ka = band_val.div(&sp.abs(), div_bits, Dir::Down).floor_int();
    if ka < BigInt::from(2) {
        ka = BigInt::from(2);
    }

    // least-squares center for closeness (exact Gram arithmetic)
    let g11 = m_prev.dot(m_prev);
    let g12 = m_prev.dot(m_cur);
    let g22 = m_cur.dot(m_cur);
    let det = &g11 * &g22 - &g12 * &g12;
    let rem0 = [
        w_mid[0].sub(&base_dy[0]),
        w_mid[1].sub(&base_dy[1]),
        w_mid[2].sub(&base_dy[2]),
    ];
    let rhs1 = dy_dot(&rem0, &prev_dy);
    let rhs2 = dy_dot(&rem0, &cur_dy);
    let a_near_num = rhs1
        .mul(&Dyadic::from_bigint(g22.clone()))
        .sub(&rhs2.mul(&Dyadic::from_bigint(g12.clone())));
    let a_near = a_near_num
        .div(&Dyadic::from_bigint(det), div_bits, Dir::Down)
        .round_int();

    // iterate a outward from the closeness optimum, clamped to the band
    let lo_a = &a_band - &ka;
    let hi_a = &a_band + &ka;
    let a_center = a_near.clamp(lo_a.clone(), hi_a.clone());

    let disk_r2_lo = {
        let d2 = geom.disk_radius.mul(&geom.disk_radius);
        d2.lo().clone()
    };
    let radius_enc = RealEnclosure::exact(state.cap.radius.clone(), bits);
    let g22_dy = Dyadic::from_bigint(g22.clone());

    let mut found: Vec<(Dyadic, IntVec3)> = Vec::new();
    let max_a_steps = 512usize;
    'outer: for k in 0..max_a_steps {
        let offsets: &[i64] = if k == 0 { &[0] } else { &[k as i64, -(k as i64)] };
        for off in offsets {
            let a = &a_center + BigInt::from(*off);
            if a < lo_a || a > hi_a {
                continue;
            }
            // optimal b for this a
            let pa = base.add(&m_prev.scale(&a));
            let pa_dy = dy_of_int(&pa);
            let rem = [
                w_mid[0].sub(&pa_dy[0]),
                w_mid[1].sub(&pa_dy[1]),
                w_mid[2].sub(&pa_dy[2]),
            ];
            let b0 = dy_dot(&rem, &cur_dy)
                .div(&g22_dy, div_bits, Dir::Down)
                .round_int();
            for db in -2i64..=2 {
                let b = &b0 + BigInt::from(db);
                let c = pa.add(&m_cur.scale(&b));
                if c.is_zero() {
                    continue;
                }
                // certified disk membership
                let c_enc = EncVec3::from_int(&c, bits);
                let dist2 = c_enc.dist_sq(&geom.w_center);
                if dist2.hi() > &disk_r2_lo {
                    continue;
                }
                // certified band: (c·η)² ≤ |c|²·r²/4
                let ceta = c_enc.dot(&eta);
                let lhs = ceta.mul(&ceta);
                let rhs = RealEnclosure::from_bigint(&c.norm_sq(), bits)
                    .mul(&radius_enc)
                    .mul(&radius_enc)
                    .mul_pow2(-2);
                if lhs.hi() > rhs.lo() {
                    continue;
                }
                if !is_complete_pair(m_cur, &c).unwrap_or(false) {
                    continue;
                }
                let c_dy = dy_of_int(&c);
                let key = dy_dist_sq(&c_dy, &w_mid);
                found.push((key, c));
                if found.len() >= 48 {
                    break 'outer;
                }
            }
        }
    }

    found.sort_by(|(ka_, ca), (kb, cb)| {
        ka_.cmp(kb)
            .then_with(|| (&ca.m0, &ca.m1, &ca.m2).cmp(&(&cb.m0, &cb.m1, &cb.m2)))
    });
    Ok(found.into_iter().map(|(_, c)| c).collect())
}

/// Certified cap update for a chosen next vector: a new center orthogonal
/// to the vector, placed mid-slab, with all Eq.-window and nesting
/// certificates checked exactly.
pub fn update_cap(
    state: &ConstructionState,
    chosen: &IntVec3,
) -> Result<CapUpdate, ConstructError> {
    let cut_sq = chosen.cutten().norm_sq();
    let bits = working_bits(cut_sq.bits());
    let consts = AlgebraicConstants::derive(bits.max(256))?;
    let profile = &state.profile;
    let m_prev = &state.steps[state.last_index()].m;

    let m_next_norm = sqrt_int(&cut_sq, bits);
    let inv_omega = inv_pow_omega(&m_next_norm, &consts)?;
    // slab target s = 9/16 · M_{ν+1}^{−ω}; window [1/2, 5/8]·M^{−ω}
    let s = inv_omega
        .mul(&RealEnclosure::from_int(9, bits))
        .mul_pow2(-4);
    let window_lo = inv_omega.mul_pow2(-1);
    let window_hi = inv_omega
        .mul(&RealEnclosure::from_int(5, bits))
        .mul_pow2(-3);

    let eta_old = state.cap.center.with_bits(bits);
    let c_enc = EncVec3::from_int(chosen, bits);
    let c_norm = sqrt_int(&chosen.norm_sq(), bits);
    let c_hat = c_enc.scale(&c_norm.recip()?);

    // u1 = unit(chosen × m_ν), oriented toward the old center
    let xi_int = chosen.cross(m_prev);
    let mut u1 = EncVec3::from_int(&xi_int, bits).unit().map_err(|_| {
        ConstructError::DegenerateGeometry("chosen vector is parallel to m_ν".into())
    })?;
    let align = eta_old.dot(&u1);
    if align.contains_zero() {
        return Err(ConstructError::DegenerateGeometry(
            "new great circle is orthogonal to the cap center".into(),
        ));
    }
    if align.hi().is_negative() {
        u1 = u1.neg();
    }
    let u2 = c_hat.cross(&u1).unit()?;
    let a_slope = u2.dot_int(m_prev);
    if a_slope.contains_zero() {
        return Err(ConstructError::DegenerateGeometry(
            "slab direction degenerate on the new great circle".into(),
        ));
    }
    let q = s.div(&a_slope)?;
    if !q.abs().definitely_lt(&RealEnclosure::from_int(1, bits).mul_pow2(-1)) {
        return Err(ConstructError::CapCertificateFailed(
            "slab offset is not small on the new great circle".into(),
        ));
    }
    let one = RealEnclosure::from_int(1, bits);
    let cosq = sqrt(&one.sub(&q.mul(&q)))?;
    let eta_new = u1.scale(&cosq).add(&u2.scale(&q));

    // radius r_{ν+1} = 1/(2⁶ · M_{ν+1}^ω · M_ν)
    let m_prev_norm = sqrt_int(&m_prev.cutten().norm_sq(), bits);
    let r_enc = inv_omega.div(&m_prev_norm)?.mul_pow2(-6);
    let radius = r_enc.lo().round(64, Dir::Down);
    if !radius.is_positive() {
        return Err(ConstructError::CapCertificateFailed(
            "new radius rounded to zero".into(),
        ));
    }

    // certificate: unit center
    if !eta_new.norm_sq().contains_dyadic(&Dyadic::one()) {
        return Err(ConstructError::CapCertificateFailed(
            "new center is off the unit sphere".into(),
        ));
    }
    // certificate: orthogonality to the chosen vector within interval width
    let ortho = eta_new.dot_int(chosen).abs();
    let ortho_budget = c_norm.lo().mul(&radius).mul_pow2(-8);
    if ortho.hi() > &ortho_budget {
        return Err(ConstructError::CapCertificateFailed(
            "new center is not orthogonal to the chosen vector".into(),
        ));
    }
    // certificate: the whole new cap sits inside the slab window
    let m_prev_full = sqrt_int(&m_prev.norm_sq(), bits);
    let spread = m_prev_full.mul(&RealEnclosure::exact(radius.clone(), bits));
    let slab_val = eta_new.dot_int(m_prev);
    let cap_lo = slab_val.sub(&spread);
    let cap_hi = slab_val.add(&spread);
    if !(window_lo.hi() < cap_lo.lo() && cap_hi.hi() < window_hi.lo()) {
        return Err(ConstructError::CapCertificateFailed(format!(
            "slab window violated: m·cap = [{}, {}] vs window [{}, {}]",
            cap_lo.lo(),
            cap_hi.hi(),
            window_lo.hi(),
            window_hi.lo()
        )));
    }
    // certificate: x₀ stays within [23/32, 25/32] over the new cap
    let x0_lo = eta_new.0[0].lo().sub(&radius);
    let x0_hi = eta_new.0[0].hi().add(&radius);
    let x0_min = Dyadic::new(BigInt::from(23), -5);
    let x0_max = Dyadic::new(BigInt::from(25), -5);
    if x0_lo < x0_min || x0_hi > x0_max {
        return Err(ConstructError::CapCertificateFailed(
            "x₀ range drifted out of its bracket".into(),
        ));
    }
    // ζ_ν = (m_ν·x)/x₀ over the new cap, certified inside the Eq.-(6) window
    let zeta = RealEnclosure::new(
        cap_lo.lo().div(&x0_max, bits, Dir::Down),
        cap_hi.hi().div(&x0_min, bits, Dir::Up),
        bits,
    );
    let zeta_window_lo = inv_omega.mul_pow2(-(profile.e_zeta as i64));
    if !(zeta_window_lo.hi() < zeta.lo() && zeta.hi() < inv_omega.lo()) {
        return Err(ConstructError::CapCertificateFailed(format!(
            "ζ window violated: ζ = [{}, {}] vs [{}, {}]",
            zeta.lo(),
            zeta.hi(),
            zeta_window_lo.hi(),
            inv_omega.lo()
        )));
    }
    if !zeta.lo().is_positive() {
        return Err(ConstructError::CapCertificateFailed(
            "ζ lower endpoint not positive".into(),
        ));
    }
    // certificate: strict nesting B_{ν+1} ⊂ B_ν
    let dist = sqrt(&eta_new.dist_sq(&eta_old))?;
    if !(dist.hi().add(&radius) < state.cap.radius) {
        return Err(ConstructError::CapCertificateFailed(format!(
            "nesting violated: center distance {} + new radius {} vs old radius {}",
            dist.hi(),
            radius,
            state.cap.radius
        )));
    }
    // certificate: radius contraction by at least 2^{e_gap}
    if radius > state.cap.radius.mul_pow2(-(profile.e_gap as i64)) {
        return Err(ConstructError::CapCertificateFailed(
            "radius contraction below the growth gap".into(),
        ));
    }

    let slab_level = inv_omega.mul_pow2(-1);
    let cylinder_radius = inv_omega.div(&m_prev_norm)?;
    Ok(CapUpdate {
        cap: SphericalCap {
            center: eta_new,
            radius,
        },
        zeta,
        m_next_norm,
        xi: u1,
        slab_level,
        cylinder_radius,
    })
}

/// Exact filter battery shared by the bootstrap and the general step.
fn filter_candidate(
    state: &ConstructionState,
    c: &IntVec3,
    check_h_window: bool,
    h: Option<&RealEnclosure>,
) -> Result<(), Reject> {
    let profile = &state.profile;
    let m_cur = &state.steps[state.last_index()].m;
    let cut = c.cutten();
    let cut_sq = cut.norm_sq();
    let prev_cut_sq = m_cur.cutten().norm_sq();

    if !is_primitive(c).map_err(|_| Reject::NotPrimitive)? {
        return Err(Reject::NotPrimitive);
    }
    if !is_complete_pair(m_cur, c).map_err(|_| Reject::NotComplete)? {
        return Err(Reject::NotComplete);
    }
    // M_{ν+1} ≥ 2^{e_gap} · M_ν, exactly
    if cut_sq.clone() < (&prev_cut_sq << (2 * profile.e_gap as u64)) {
        return Err(Reject::GapTooSmall);
    }
    if check_h_window {
        let h = h.expect("H provided for the general step");
        let h2 = h.mul(h);
        let cut_dy = Dyadic::from_bigint(cut_sq.clone());
        // H² ≤ M_{ν+1}² ≤ 4H², via definite enclosure comparison
        if !(h2.hi() <= &cut_dy && cut_dy <= h2.mul_pow2(2).lo().clone()) {
            return Err(Reject::NormWindow);
        }
    } else {
        // bootstrap: M₁ ≤ 2^{e_M1}
        if cut_sq.bits() > 2 * profile.e_m1 as u64 + 1
            || cut_sq > (BigInt::one() << (2 * profile.e_m1 as u64))
        {
            return Err(Reject::NormWindow);
        }
    }
    if !crate::lattice::opposite_signs(&cut) {
        return Err(Reject::SameSigns);
    }
    let thr = profile.angle_threshold(96);
    for axis in [IntVec2::new(1, 0), IntVec2::new(0, 1)] {
        if !angle_at_least(&cut, &axis, &thr).map_err(|_| Reject::AxisAngle)? {
            return Err(Reject::AxisAngle);
        }
    }
    if !angle_at_least(&cut, &m_cur.cutten(), &thr).map_err(|_| Reject::PairAngle)? {
        return Err(Reject::PairAngle);
    }
    // Eq. (10)/(11): M M'/2⁵ ≤ D ≤ M M', exactly via squares
    let d_plane = covolume2(&m_cur.cutten(), &cut);
    let d2 = &d_plane * &d_plane;
    let mm = &prev_cut_sq * &cut_sq;
    if !(&d2 <= &mm && (&d2 << 10u64) >= mm) {
        return Err(Reject::CovolumePlane);
    }
    // Spatial covolume d = |m × m'|: M M'/2⁵ ≤ d ≤ 2²·M M', exactly via
    // squares. The upper bound is "trivial" only for the planar covolume D;
    // the full vectors carry an x₀ component of size up to ~1.3·M, so d can
    // exceed M M' by a bounded factor, absorbed here as 2².
    let d_sub_sq = m_cur.cross(c).norm_sq();
    let mm2 = &prev_cut_sq * &cut_sq;
    if !(d_sub_sq <= (&mm2 << 4u64) && (&d_sub_sq << 10u64) >= mm2) {
        return Err(Reject::CovolumeSub);
    }
    Ok(())
}

/// Canonical orientation: m₂ > 0 (the pair ±m spans the same lattice; the
/// positive-m₂ representative keeps the slab target positive).
fn orient(c: IntVec3) -> IntVec3 {
    if c.m2.is_negative() {
        c.neg()
    } else {
        c
    }
}

fn accept(
    state: &mut ConstructionState,
    chosen: IntVec3,
    upd: CapUpdate,
    geometry: Option<StepGeometry>,
) -> Result<(), ConstructError> {
    let nu = state.last_index();
    let consts = AlgebraicConstants::derive(upd.m_next_norm.bits().max(256))?;
    let h_next = h_of(&upd.m_next_norm, &state.profile, &consts)?;
    let bits = upd.m_next_norm.bits();

    let m_cur = state.steps[nu].m.clone();
    state.steps[nu].zeta = Some(upd.zeta);
    state.steps[nu].cov_d = Some(covolume2(&m_cur.cutten(), &chosen.cutten()));
    state.steps[nu].d_sub = Some(sqrt_int(&m_cur.cross(&chosen).norm_sq(), bits));
    state.steps[nu].geometry = geometry.map(|mut g| {
        g.xi = upd.xi;
        g.slab_level = upd.slab_level;
        g.cylinder_radius = upd.cylinder_radius;
        g
    });
    state.steps.push(StepRecord {
        m: chosen,
        m_norm: upd.m_next_norm,
        h: h_next,
        zeta: None,
        cov_d: None,
        d_sub: None,
        geometry: None,
    });
    state.cap = upd.cap;
    Ok(())
}

/// The bootstrap 0 → 1: direct annulus search near a fixed direction, no
/// layer machinery (every condition involving ℒ_{ν−1} is vacuous).
fn bootstrap(state: &mut ConstructionState) -> Result<(), ConstructError> {
    let target = 1u128 << state.profile.start_norm_log2;
    // base direction (−29, 72): within 0.1° of 112°, clear of both axes and
    // the m̄₀ line by more than the angle threshold
    let dir_norm = (6025f64).sqrt();
    let k = ((target as f64) / dir_norm).round() as i128;
    let base1 = -29i128 * k;
    let base2 = 72i128 * k;

    let eta_mid = state.cap.center.mid();
    let mut diag = SearchDiagnostics::default();
    let mut tried = 0usize;

    for ring in 0..64i64 {
        for di in -ring..=ring {
            for dj in -ring..=ring {
                if di.abs().max(dj.abs()) != ring {
                    continue;
                }
                let c1 = BigInt::from(base1 + di as i128);
                let c2 = BigInt::from(base2 + dj as i128);
                // m₀ chosen to cancel the projection onto the cap center
                let num = Dyadic::from_bigint(c1.clone())
                    .mul(&eta_mid[1])
                    .add(&Dyadic::from_bigint(c2.clone()).mul(&eta_mid[2]))
                    .neg();
                let m0 = num.div(&eta_mid[0], 160, Dir::Down).round_int();
                let cand = orient(IntVec3::from_bigints(m0, c1, c2));
                tried += 1;
                match filter_candidate(state, &cand, false, None) {
                    Ok(()) => {}
                    Err(r) => {
                        diag.bump(reject_label(r));
                        continue;
                    }
                }
                match update_cap(state, &cand) {
                    Ok(upd) => return accept(state, cand, upd, None),
                    Err(ConstructError::CapCertificateFailed(_))
                    | Err(ConstructError::DegenerateGeometry(_)) => {
                        diag.bump(reject_label(Reject::Cap));
                        continue;
                    }
                    Err(e) => return Err(e),
                }
            }
        }
    }
    Err(ConstructError::SearchExhausted(format!(
        "bootstrap tried {tried} candidates; rejections: {}",
        diag.summary()
    )))
}

/// One inductive step appended in place.
pub fn step(state: &mut ConstructionState) -> Result<(), ConstructError> {
    state.validate()?;
    if state.last_index() == 0 {
        return bootstrap(state);
    }
    let ctx = layer_and_disk(state)?;
    let candidates = candidate_search(state, &ctx)?;
    let mut diag = SearchDiagnostics::default();
    let total = candidates.len();
    for cand in candidates {
        let cand = orient(cand);
        match filter_candidate(state, &cand, true, Some(&ctx.h)) {
            Ok(()) => {}
            Err(r) => {
                diag.bump(reject_label(r));
                continue;
            }
        }
        match update_cap(state, &cand) {
            Ok(upd) => {
                return accept(state, cand, upd, Some(ctx.geometry));
            }
            Err(ConstructError::CapCertificateFailed(_))
            | Err(ConstructError::DegenerateGeometry(_)) => {
                diag.bump(reject_label(Reject::Cap));
                continue;
            }
            Err(e) => return Err(e),
        }
    }
    Err(ConstructError::SearchExhausted(format!(
        "disk search yielded {total} candidates, all rejected: {}",
        diag.summary()
    )))
}
