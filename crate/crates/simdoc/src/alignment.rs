//! Adapted Smith-Waterman alignment over abstract token sequences.
//!
//! Differences from the classical algorithm: the final score is the
//! corner cell `v(m,n)` rather than the table maximum (a `max_cell` mode
//! exposes the classical variant), and every edit score is compensated
//! by a discounted token similarity, `G_op + f * sim(x, y)`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimDocError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignmentParams {
    pub match_gain: f64,
    pub gap_insert: f64,
    pub gap_delete: f64,
    pub gap_substitute: f64,
    pub discount_factor: f64,
}

impl AlignmentParams {
    /// Per-level init reported alongside the tuning experiment:
    /// f=1, M=1, G_ins=-0.5, G_del=-0.5, G_sub=-1.
    pub fn reference_init() -> Self {
        AlignmentParams {
            match_gain: 1.0,
            gap_insert: -0.5,
            gap_delete: -0.5,
            gap_substitute: -1.0,
            discount_factor: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.match_gain < 0.0 {
            return Err(SimDocError::Config("match_gain must be >= 0".into()));
        }
        if self.gap_insert > 0.0 || self.gap_delete > 0.0 || self.gap_substitute > 0.0 {
            return Err(SimDocError::Config("gap penalties must be <= 0".into()));
        }
        if !(0.0..=1.0).contains(&self.discount_factor) {
            return Err(SimDocError::Config("discount_factor must be in [0,1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AlignmentMode {
    /// Report the corner cell v(m,n).
    #[default]
    Corner,
    /// Report the table maximum, as in classical Smith-Waterman.
    MaxCell,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EditOp {
    Ins,
    Del,
    Sub,
}

/// Edit score `G_op + f * sim(x, y)`; the compensation applies to all
/// three edit operations.
pub fn op_score(sim_xy: f64, op: EditOp, params: &AlignmentParams) -> f64 {
    let gap = match op {
        EditOp::Ins => params.gap_insert,
        EditOp::Del => params.gap_delete,
        EditOp::Sub => params.gap_substitute,
    };
    gap + params.discount_factor * sim_xy
}

/// Fills the DP table over `seq_a` (rows) and `seq_b` (columns) and
/// returns the raw score. Two-row rolling storage; tokens compare with
/// `eq` and mismatches consult `sim`.
pub fn align_with_mode<T, E, S>(
    seq_a: &[T],
    seq_b: &[T],
    params: &AlignmentParams,
    mode: AlignmentMode,
    mut eq: E,
    mut sim: S,
) -> f64
where
    E: FnMut(&T, &T) -> bool,
    S: FnMut(&T, &T) -> f64,
{
    let n = seq_b.len();
    let mut prev = vec![0.0f64; n + 1];
    let mut curr = vec![0.0f64; n + 1];
    let mut best = 0.0f64;
    for a in seq_a {
        for (y, b) in seq_b.iter().enumerate() {
            let cell = if eq(a, b) {
                (prev[y] + params.match_gain).max(0.0)
            } else {
                let s = sim(a, b);
                let del = prev[y + 1] + op_score(s, EditOp::Del, params);
                let ins = curr[y] + op_score(s, EditOp::Ins, params);
                let sub = prev[y] + op_score(s, EditOp::Sub, params);
                del.max(ins).max(sub).max(0.0)
            };
            curr[y + 1] = cell;
            if cell > best {
                best = cell;
            }
        }
        std::mem::swap(&mut prev, &mut curr);
        curr[0] = 0.0;
    }
    match mode {
        AlignmentMode::Corner => prev[n],
        AlignmentMode::MaxCell => best,
    }
}

pub fn align<T, E, S>(seq_a: &[T], seq_b: &[T], params: &AlignmentParams, eq: E, sim: S) -> f64
where
    E: FnMut(&T, &T) -> bool,
    S: FnMut(&T, &T) -> f64,
{
    align_with_mode(seq_a, seq_b, params, AlignmentMode::Corner, eq, sim)
}

/// Triangular normalizer: sum of 1..=max(m,n).
pub fn normalizer(m: usize, n: usize) -> f64 {
    let l = m.max(n) as f64;
    l * (l + 1.0) / 2.0
}

/// Raw score divided by the triangular sum of the longer length; both
/// sequences empty gives 0.
pub fn normalized_alignment<T, E, S>(
    seq_a: &[T],
    seq_b: &[T],
    params: &AlignmentParams,
    mode: AlignmentMode,
    eq: E,
    sim: S,
) -> f64
where
    E: FnMut(&T, &T) -> bool,
    S: FnMut(&T, &T) -> f64,
{
    if seq_a.is_empty() && seq_b.is_empty() {
        return 0.0;
    }
    align_with_mode(seq_a, seq_b, params, mode, eq, sim) / normalizer(seq_a.len(), seq_b.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(m: f64, g: (f64, f64, f64), f: f64) -> AlignmentParams {
        AlignmentParams {
            match_gain: m,
            gap_insert: g.0,
            gap_delete: g.1,
            gap_substitute: g.2,
            discount_factor: f,
        }
    }

    fn align_ids(a: &[u32], b: &[u32], p: &AlignmentParams, sim: f64) -> f64 {
        align(a, b, p, |x, y| x == y, |_, _| sim)
    }

    /// Naive exponential evaluation of the same recurrence, used as the
    /// independent oracle.
    pub(crate) fn naive_align<T: PartialEq>(
        a: &[T],
        b: &[T],
        x: usize,
        y: usize,
        p: &AlignmentParams,
        sim: &dyn Fn(&T, &T) -> f64,
    ) -> f64 {
        if x == 0 || y == 0 {
            return 0.0;
        }
        let (ta, tb) = (&a[x - 1], &b[y - 1]);
        if ta == tb {
            (naive_align(a, b, x - 1, y - 1, p, sim) + p.match_gain).max(0.0)
        } else {
            let s = sim(ta, tb);
            let del = naive_align(a, b, x - 1, y, p, sim) + op_score(s, EditOp::Del, p);
            let ins = naive_align(a, b, x, y - 1, p, sim) + op_score(s, EditOp::Ins, p);
            let sub = naive_align(a, b, x - 1, y - 1, p, sim) + op_score(s, EditOp::Sub, p);
            del.max(ins).max(sub).max(0.0)
        }
    }

    #[test]
    fn op_score_examples() {
        let p = params(1.0, (-0.5, -0.5, -1.0), 0.0);
        assert_eq!(op_score(0.9, EditOp::Sub, &p), -1.0);
        let p = params(1.0, (-0.5, -0.5, -1.0), 0.8);
        assert!((op_score(0.75, EditOp::Sub, &p) - (-0.4)).abs() < 1e-12);
        let p = params(1.0, (-0.5, -0.5, -1.0), 1.0);
        assert!((op_score(1.0, EditOp::Del, &p) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn empty_sequence_scores_zero() {
        let p = params(1.0, (-0.5, -0.5, -1.0), 0.0);
        assert_eq!(align_ids(&[1, 2, 3], &[], &p, 0.0), 0.0);
        assert_eq!(align_ids(&[], &[1, 2], &p, 0.0), 0.0);
    }

    #[test]
    fn identical_sequences_accumulate_match_gain() {
        let p = params(1.0, (-0.5, -0.5, -1.0), 0.0);
        assert!((align_ids(&[1, 2, 3], &[1, 2, 3], &p, 0.0) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn hand_filled_table() {
        // v(1,1)=1, v(1,2)=v(2,1)=0.5, v(2,2)=0
        let p = params(1.0, (-0.5, -0.5, -1.0), 0.0);
        assert_eq!(align_ids(&[1, 2], &[1, 3], &p, 0.0), 0.0);
        assert_eq!(
            normalized_alignment(&[1, 2], &[1, 3], &p, AlignmentMode::Corner, |x, y| x == y, |_, _| 0.0),
            0.0
        );
    }

    #[test]
    fn normalized_self_alignment() {
        let p = params(1.0, (-0.5, -0.5, -1.0), 0.0);
        let v = normalized_alignment(
            &[1, 2, 3],
            &[1, 2, 3],
            &p,
            AlignmentMode::Corner,
            |x, y| x == y,
            |_, _| 0.0,
        );
        assert!((v - 0.5).abs() < 1e-12);
        // closed form 2M/(m+1)
        for m in 1..=10u32 {
            let seq: Vec<u32> = (0..m).collect();
            let v = normalized_alignment(
                &seq,
                &seq,
                &p,
                AlignmentMode::Corner,
                |x, y| x == y,
                |_, _| 0.0,
            );
            assert!((v - 2.0 / (m as f64 + 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn both_empty_normalized_is_zero() {
        let p = params(1.0, (-0.5, -0.5, -1.0), 0.0);
        let v: f64 = normalized_alignment(
            &[] as &[u32],
            &[],
            &p,
            AlignmentMode::Corner,
            |x: &u32, y| x == y,
            |_, _| 0.0,
        );
        assert_eq!(v, 0.0);
    }

    #[test]
    fn max_cell_mode_at_least_corner() {
        let p = params(1.0, (-0.5, -0.5, -1.0), 0.0);
        let a = [1u32, 2, 3, 9];
        let b = [1u32, 2, 3, 7];
        let corner = align_with_mode(&a, &b, &p, AlignmentMode::Corner, |x, y| x == y, |_, _| 0.0);
        let max = align_with_mode(&a, &b, &p, AlignmentMode::MaxCell, |x, y| x == y, |_, _| 0.0);
        assert!(max >= corner);
        assert!((max - 3.0).abs() < 1e-12);
    }

    #[test]
    fn validate_rejects_bad_params() {
        assert!(params(-1.0, (-0.5, -0.5, -1.0), 0.5).validate().is_err());
        assert!(params(1.0, (0.5, -0.5, -1.0), 0.5).validate().is_err());
        assert!(params(1.0, (-0.5, -0.5, -1.0), 1.5).validate().is_err());
        assert!(params(1.0, (-0.5, -0.5, -1.0), 0.5).validate().is_ok());
    }

    proptest! {
        #[test]
        fn matches_naive_oracle(
            a in proptest::collection::vec(0u32..4, 0..6),
            b in proptest::collection::vec(0u32..4, 0..6),
            m in 0.5f64..2.0,
            gi in -2.0f64..0.0,
            gd in -2.0f64..0.0,
            gs in -2.0f64..0.0,
            f in 0.0f64..1.0,
        ) {
            let p = params(m, (gi, gd, gs), f);
            let sim = |x: &u32, y: &u32| ((x + y) as f64 % 7.0) / 7.0;
            let fast = align(&a, &b, &p, |x, y| x == y, sim);
            let slow = naive_align(&a, &b, a.len(), b.len(), &p, &sim);
            prop_assert!((fast - slow).abs() < 1e-9);
        }

        #[test]
        fn symmetric_when_gaps_equal(
            a in proptest::collection::vec(0u32..4, 0..8),
            b in proptest::collection::vec(0u32..4, 0..8),
            m in 0.5f64..2.0,
            g in -2.0f64..0.0,
            gs in -2.0f64..0.0,
            f in 0.0f64..1.0,
        ) {
            let p = params(m, (g, g, gs), f);
            let sim = |x: &u32, y: &u32| ((x * y) as f64 % 5.0) / 5.0;
            let ab = align(&a, &b, &p, |x, y| x == y, sim);
            let ba = align(&b, &a, &p, |x, y| x == y, sim);
            prop_assert!((ab - ba).abs() < 1e-9);
        }

        #[test]
        fn score_bounded_by_match_gain_ceiling(
            a in proptest::collection::vec(0u32..4, 0..8),
            b in proptest::collection::vec(0u32..4, 0..8),
        ) {
            // max op score (G + f) <= M here, so v(m,n) <= M * min(m,n)
            let p = params(1.0, (-0.5, -0.5, -1.0), 0.5);
            let v = align(&a, &b, &p, |x, y| x == y, |_, _| 1.0);
            prop_assert!(v <= 1.0 * a.len().min(b.len()) as f64 + 1e-9);
            prop_assert!(v >= 0.0);
        }

        #[test]
        fn monotone_in_discount_factor(
            a in proptest::collection::vec(0u32..4, 0..8),
            b in proptest::collection::vec(0u32..4, 0..8),
            f1 in 0.0f64..1.0,
            f2 in 0.0f64..1.0,
        ) {
            let (lo, hi) = if f1 <= f2 { (f1, f2) } else { (f2, f1) };
            let sim = |x: &u32, y: &u32| ((x + 2 * y) as f64 % 5.0) / 5.0;
            let p_lo = params(1.0, (-0.5, -0.5, -1.0), lo);
            let p_hi = params(1.0, (-0.5, -0.5, -1.0), hi);
            let v_lo = align(&a, &b, &p_lo, |x, y| x == y, sim);
            let v_hi = align(&a, &b, &p_hi, |x, y| x == y, sim);
            prop_assert!(v_hi >= v_lo - 1e-9);
        }
    }
}
