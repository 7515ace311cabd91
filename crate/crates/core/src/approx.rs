//! Empirical explorer for the positive-approximation side.
//!
//! `positive_records` walks the positive quadrant x₁, x₂ ≥ 1 in height
//! order and returns the running-minimum sequence of ‖x₁α₁ + x₂α₂‖:
//! exhaustively up to a threshold height, and above it by a lattice
//! acceleration that only combines previously good vectors. Accelerated
//! candidates are always re-checked exactly, so the acceleration can miss
//! a record but never fabricate one. No asymptotic claim is decided here;
//! the module reports trends only.

use num_bigint::BigInt;
use serde::Serialize;

use crate::constants::golden_ratio;
use crate::numerics::RealEnclosure;
use crate::numerics::{ln, pow};
use crate::parallel;
use crate::verify::VerifyError;

/// Exhaustive enumeration covers all heights up to this value; larger
/// heights are explored by the accelerated search.
pub const EXHAUSTIVE_THRESHOLD: u64 = 10_000;

/// Hard cap on the number of accelerated candidates (visited vectors).
const ACCEL_CANDIDATE_CAP: usize = 400_000;

/// One running-minimum record of the positive-quadrant form.
#[derive(Debug, Clone, Serialize)]
pub struct ApproxRecord {
    pub x1: u64,
    pub x2: u64,
    pub height: u64,
    pub form_value: RealEnclosure,
    /// −ln(form)/ln(height); zero when the height is 1 or the form value
    /// is not separated from zero (rational degenerate inputs).
    pub exponent: RealEnclosure,
    /// form · height^φ, the Theorem-A normalization.
    pub product_phi: RealEnclosure,
}

impl ApproxRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.x1,
            self.x2,
            self.height,
            self.form_value.lo().to_decimal_string(),
            self.form_value.hi().to_decimal_string(),
            self.exponent.lo().to_decimal_string(),
            self.exponent.hi().to_decimal_string(),
            self.product_phi.lo().to_decimal_string(),
            self.product_phi.hi().to_decimal_string()
        )
    }
}

pub const APPROX_CSV_HEADER: &str =
    "x1,x2,height,form_lo,form_hi,exponent_lo,exponent_hi,product_phi_lo,product_phi_hi";

/// Summary statistics over a record sequence.
#[derive(Debug, Clone, Serialize)]
pub struct ExponentSummary {
    /// The exponent enclosure of the record whose lower bound is largest.
    pub best_exponent: RealEnclosure,
    /// The φ-normalized products in record order.
    pub product_phi_trend: Vec<RealEnclosure>,
}

/// Running-minimum records of ‖x₁α₁ + x₂α₂‖ over x₁, x₂ ≥ 1 with
/// max(x₁, x₂) ≤ height_max, exhaustive below [`EXHAUSTIVE_THRESHOLD`].
pub fn positive_records(
    alpha: (&RealEnclosure, &RealEnclosure),
    height_max: u64,
    threads: Option<usize>,
) -> Result<Vec<ApproxRecord>, VerifyError> {
    positive_records_with_threshold(alpha, height_max, EXHAUSTIVE_THRESHOLD, threads)
}

/// As [`positive_records`] with an explicit exhaustive/accelerated
/// cross-over height (exposed so the two phases can be compared on ranges
/// where both are feasible).
pub fn positive_records_with_threshold(
    alpha: (&RealEnclosure, &RealEnclosure),
    height_max: u64,
    threshold: u64,
    threads: Option<usize>,
) -> Result<Vec<ApproxRecord>, VerifyError> {
    if height_max < 1 {
        return Err(VerifyError::Malformed("height_max must be >= 1".into()));
    }
    let (a1, a2) = alpha;
    let width_bound = a1.width().max(a2.width());
    let hm_dy = crate::numerics::Dyadic::from_bigint(BigInt::from(height_max));
    if width_bound.mul(&hm_dy) >= crate::numerics::Dyadic::pow2(-8) {
        return Err(VerifyError::EnclosureTooWide(format!(
            "alpha width {} too wide for height {height_max}",
            width_bound.to_decimal_string()
        )));
    }
    let bits = a1.bits();
    let phi = golden_ratio(bits);
    let a1f = a1.to_f64_mid();
    let a2f = a2.to_f64_mid();

    // --- exhaustive phase: per-height stripes, f64 screen, exact re-check
    let exh_max = height_max.min(threshold);
    // Absolute f64 error of x1*a1f + x2*a2f is a few ulps of |v| ≤ 4·h;
    // 1e-9 dominates it for every height this phase can reach.
    const SCREEN_MARGIN: f64 = 1e-9;
    struct RowOut {
        h: u64,
        row_min: f64,
        flagged: Vec<(u64, u64)>,
    }
    let rows: Vec<RowOut> = parallel::rows_collect(1..=exh_max, threads, |h| {
        let mut row_min = f64::INFINITY;
        let mut flagged = Vec::new();
        let mut consider = |x1: u64, x2: u64| {
            let v = x1 as f64 * a1f + x2 as f64 * a2f;
            let f = (v - v.round()).abs();
            if f < row_min + SCREEN_MARGIN {
                row_min = row_min.min(f);
                flagged.push((x1, x2));
            }
        };
        for x2 in 1..=h {
            consider(h, x2);
        }
        for x1 in 1..h {
            consider(x1, h);
        }
        // second pass drops pairs that a later, smaller minimum obsoleted
        flagged.retain(|&(x1, x2)| {
            let v = x1 as f64 * a1f + x2 as f64 * a2f;
            (v - v.round()).abs() < row_min + SCREEN_MARGIN
        });
        vec![RowOut { h, row_min, flagged }]
    });

    let mut entries: Vec<RawRecord> = Vec::new();
    let mut best: Option<RealEnclosure> = None;
    let mut best_f = f64::INFINITY;
    for row in &rows {
        if row.row_min > best_f + SCREEN_MARGIN {
            continue;
        }
        if let Some(rec) = best_of_row(a1, a2, &row.flagged, row.h, bits, &best)? {
            best_f = rec.form_value.hi().to_f64();
            best = Some(rec.form_value.clone());
            entries.push(rec);
        }
    }

    // --- accelerated phase above the threshold: rounds of candidate
    // generation from the current record list, each candidate evaluated
    // exactly; a final merged running-minimum pass selects the records
    if height_max > exh_max && !entries.is_empty() {
        let mut seen: std::collections::BTreeSet<(u64, u64)> =
            entries.iter().map(|r| (r.x1, r.x2)).collect();
        for _round in 0..8 {
            let cur = running_min(&entries);
            let pts: Vec<(u64, u64)> = cur.iter().map(|r| (r.x1, r.x2)).collect();
            // double-precision record envelope: a candidate is worth an
            // exact evaluation only if it comes near the running minimum
            // at its height (generous absolute margin for f64 error)
            let env: Vec<(u64, f64)> = cur
                .iter()
                .map(|r| (r.height, r.form_value.hi().to_f64()))
                .collect();
            let env_at = |h: u64| -> f64 {
                match env.binary_search_by_key(&h, |e| e.0) {
                    Ok(i) => env[i].1,
                    Err(0) => f64::INFINITY,
                    Err(i) => env[i - 1].1,
                }
            };
            let cands = accelerated_candidates(a1f, a2f, &pts, exh_max, height_max);
            let mut grew = false;
            for (x1, x2) in cands {
                let v = x1 as f64 * a1f + x2 as f64 * a2f;
                if (v - v.round()).abs() >= env_at(x1.max(x2)) + 1e-9 {
                    continue;
                }
                if !seen.insert((x1, x2)) {
                    continue;
                }
                let form = exact_form(a1, a2, x1, x2, bits)?;
                entries.push(RawRecord {
                    x1,
                    x2,
                    height: x1.max(x2),
                    form_value: form,
                });
                grew = true;
            }
            if !grew {
                break;
            }
        }
        entries = running_min(&entries);
    }
    entries
        .into_iter()
        .map(|raw| finish_record(raw, &phi, bits))
        .collect()
}

/// The strict running-minimum subsequence of the evaluated vectors,
/// ordered by height with the deterministic (form, x1, x2) tie-break.
fn running_min(entries: &[RawRecord]) -> Vec<RawRecord> {
    let mut sorted: Vec<&RawRecord> = entries.iter().collect();
    sorted.sort_by(|a, b| {
        (a.height, a.form_value.lo(), a.x1, a.x2).cmp(&(b.height, b.form_value.lo(), b.x1, b.x2))
    });
    let mut out: Vec<RawRecord> = Vec::new();
    for r in sorted {
        let qualifies = match out.last() {
            None => true,
            Some(b) => r.form_value.hi() < b.form_value.lo(),
        };
        if qualifies {
            out.push(r.clone());
        }
    }
    out
}

/// An exactly evaluated vector, before the exponent and φ-product fields
/// are filled in.
#[derive(Clone)]
struct RawRecord {
    x1: u64,
    x2: u64,
    height: u64,
    form_value: RealEnclosure,
}

fn exact_form(
    a1: &RealEnclosure,
    a2: &RealEnclosure,
    x1: u64,
    x2: u64,
    bits: u32,
) -> Result<RealEnclosure, VerifyError> {
    let v = RealEnclosure::from_bigint(&BigInt::from(x1), bits)
        .mul(a1)
        .add(&RealEnclosure::from_bigint(&BigInt::from(x2), bits).mul(a2));
    v.nearest_int_dist()
        .map_err(|e| VerifyError::EnclosureTooWide(format!("({x1},{x2}): {e}")))
}

/// Exact evaluation of the flagged pairs of one height; returns the row
/// minimum when it is certified strictly below `best`.
fn best_of_row(
    a1: &RealEnclosure,
    a2: &RealEnclosure,
    flagged: &[(u64, u64)],
    h: u64,
    bits: u32,
    best: &Option<RealEnclosure>,
) -> Result<Option<RawRecord>, VerifyError> {
    let mut row_best: Option<(crate::numerics::Dyadic, u64, u64, RealEnclosure)> = None;
    for &(x1, x2) in flagged {
        let form = exact_form(a1, a2, x1, x2, bits)?;
        let key = (form.lo().clone(), x1, x2);
        if row_best
            .as_ref()
            .is_none_or(|(k, b1, b2, _)| (key.0.clone(), key.1, key.2) < (k.clone(), *b1, *b2))
        {
            row_best = Some((key.0, x1, x2, form));
        }
    }
    let Some((_, x1, x2, form)) = row_best else {
        return Ok(None);
    };
    // strict-record test: certified below every previous record
    match best {
        Some(b) if !(form.hi() < b.lo()) => Ok(None),
        _ => Ok(Some(RawRecord {
            x1,
            x2,
            height: h,
            form_value: form,
        })),
    }
}

fn finish_record(
    raw: RawRecord,
    phi: &RealEnclosure,
    bits: u32,
) -> Result<ApproxRecord, VerifyError> {
    let h_enc = RealEnclosure::from_bigint(&BigInt::from(raw.height), bits);
    let h_phi = pow(&h_enc, phi)?;
    let product_phi = raw.form_value.mul(&h_phi);
    let exponent = if raw.height <= 1 || raw.form_value.lo().is_zero() {
        RealEnclosure::from_int(0, bits)
    } else {
        ln(&raw.form_value)?.neg().div(&ln(&h_enc)?)?
    };
    Ok(ApproxRecord {
        x1: raw.x1,
        x2: raw.x2,
        height: raw.height,
        form_value: raw.form_value,
        exponent,
        product_phi,
    })
}

/// Candidate generation above the exhaustive threshold.
///
/// Generators are the small-residual lattice steps observed below the
/// threshold — the difference vectors of previous records (which may have
/// one negative coordinate) and the record vectors themselves. Starting
/// from the exhaustive records, the walk repeatedly adds generators while
/// the residual of the linear form shrinks and the vector stays in the
/// positive quadrant. Every candidate is re-checked exactly by the caller,
/// so this phase can only miss records, never fabricate one.
fn accelerated_candidates(
    a1f: f64,
    a2f: f64,
    records: &[(u64, u64)],
    exh_max: u64,
    height_max: u64,
) -> Vec<(u64, u64)> {
    let res = |x1: i64, x2: i64| -> f64 {
        let v = x1 as f64 * a1f + x2 as f64 * a2f;
        v - v.round()
    };
    let pts: Vec<(i64, i64)> = records.iter().map(|&(a, b)| (a as i64, b as i64)).collect();
    // generator pool: consecutive record differences over the whole list
    // (the per-family step vectors), pairwise differences among the most
    // recent records (the family-to-family jumps), and the records
    // themselves — ranked by how small a residual they carry
    let mut gens: Vec<(i64, i64)> = Vec::new();
    for w in pts.windows(2) {
        gens.push((w[1].0 - w[0].0, w[1].1 - w[0].1));
    }
    let tail = &pts[pts.len().saturating_sub(40)..];
    for (i, &a) in tail.iter().enumerate() {
        gens.push(a);
        for &b in &tail[i + 1..] {
            gens.push((b.0 - a.0, b.1 - a.1));
        }
    }
    gens.retain(|&(g1, g2)| g1 != 0 || g2 != 0);
    gens.sort();
    gens.dedup();
    gens.sort_by(|a, b| {
        res(a.0, a.1)
            .abs()
            .total_cmp(&res(b.0, b.1).abs())
    });
    gens.truncate(128);

    let mut visited: std::collections::BTreeSet<(i64, i64)> = std::collections::BTreeSet::new();
    let mut frontier: Vec<(i64, i64)> = Vec::new();
    let mut out = Vec::new();
    // pairwise record sums seed the jumps to new record families (a sum
    // often has a worse residual than its parents, which the improvement
    // walk below would never step through)
    let sum_tail = &pts[pts.len().saturating_sub(60)..];
    for (i, &a) in sum_tail.iter().enumerate() {
        for &b in &sum_tail[i..] {
            let s = (a.0 + b.0, a.1 + b.1);
            if s.0.max(s.1) as u64 <= height_max && visited.insert(s) {
                if s.0.max(s.1) as u64 > exh_max {
                    out.push((s.0 as u64, s.1 as u64));
                }
                frontier.push(s);
            }
        }
    }
    // records go on top of the stack so the walk explores every known
    // family before spending its candidate budget on the sum seeds
    frontier.extend(pts.iter().copied());
    while let Some((u1, u2)) = frontier.pop() {
        if visited.len() >= ACCEL_CANDIDATE_CAP {
            break;
        }
        let ru = res(u1, u2).abs();
        for &(g1, g2) in &gens {
            let n = (u1 + g1, u2 + g2);
            if n.0 < 1 || n.1 < 1 || n.0.max(n.1) as u64 > height_max {
                continue;
            }
            // allow plateau steps: consecutive family members can differ
            // by less than double precision resolves, and exact re-checking
            // downstream makes over-exploration harmless
            if res(n.0, n.1).abs() >= ru + 1e-11 {
                continue;
            }
            if visited.insert(n) {
                if n.0.max(n.1) as u64 > exh_max {
                    out.push((n.0 as u64, n.1 as u64));
                }
                frontier.push(n);
            }
        }
    }
    out
}

/// Best exponent over the records plus the φ-normalized product trend.
pub fn exponent_summary(records: &[ApproxRecord]) -> Result<ExponentSummary, VerifyError> {
    if records.is_empty() {
        return Err(VerifyError::EmptyInput("no approximation records".into()));
    }
    let best = records
        .iter()
        .max_by(|a, b| a.exponent.lo().cmp(b.exponent.lo()))
        .expect("non-empty by the guard above");
    Ok(ExponentSummary {
        best_exponent: best.exponent.clone(),
        product_phi_trend: records.iter().map(|r| r.product_phi.clone()).collect(),
    })
}
