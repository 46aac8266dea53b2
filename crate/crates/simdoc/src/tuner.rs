//! Derivative-free search over the 10 alignment parameters (5 per
//! level). Triplet accuracy is piecewise constant, so the search is
//! iterated coordinate descent with a shrinking step schedule and
//! seeded random restarts rather than a literal gradient method.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::alignment::AlignmentParams;
use crate::document_scorer::SimDocConfig;
use crate::error::{Result, SimDocError};

/// Sentence-level block then document-level block, each ordered
/// (match_gain, gap_insert, gap_delete, gap_substitute, discount).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamVector(pub [f64; 10]);

const BOUNDS: [(f64, f64); 5] = [
    (0.0, 3.0),  // match_gain
    (-3.0, 0.0), // gap_insert
    (-3.0, 0.0), // gap_delete
    (-3.0, 0.0), // gap_substitute
    (0.0, 1.0),  // discount factor
];

impl ParamVector {
    pub fn reference_init() -> Self {
        let p = AlignmentParams::reference_init();
        let block = [
            p.match_gain,
            p.gap_insert,
            p.gap_delete,
            p.gap_substitute,
            p.discount_factor,
        ];
        let mut v = [0.0; 10];
        v[..5].copy_from_slice(&block);
        v[5..].copy_from_slice(&block);
        ParamVector(v)
    }

    pub fn clamp_to_bounds(mut self) -> Self {
        for (i, x) in self.0.iter_mut().enumerate() {
            let (lo, hi) = BOUNDS[i % 5];
            *x = x.clamp(lo, hi);
        }
        self
    }

    fn block(&self, offset: usize) -> AlignmentParams {
        AlignmentParams {
            match_gain: self.0[offset],
            gap_insert: self.0[offset + 1],
            gap_delete: self.0[offset + 2],
            gap_substitute: self.0[offset + 3],
            discount_factor: self.0[offset + 4],
        }
    }

    pub fn to_config(&self, base: &SimDocConfig) -> SimDocConfig {
        SimDocConfig {
            sentence_params: self.block(0),
            document_params: self.block(5),
            ..base.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.block(0).validate()?;
        self.block(5).validate()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TuneConfig {
    /// Step sizes tried in order; each pass over the coordinates uses
    /// the current step until no coordinate improves.
    pub step_schedule: Vec<f64>,
    pub max_evaluations: usize,
    pub rng_seed: u64,
    pub random_restarts: usize,
}

impl Default for TuneConfig {
    fn default() -> Self {
        TuneConfig {
            step_schedule: vec![0.5, 0.25, 0.1, 0.05],
            max_evaluations: 500,
            rng_seed: 17,
            random_restarts: 3,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TuneResult {
    pub best_params: ParamVector,
    pub best_accuracy: f64,
    pub init_accuracy: f64,
    pub evaluations: usize,
    /// Best-so-far accuracy after each objective evaluation;
    /// non-decreasing by construction.
    pub best_so_far: Vec<f64>,
}

/// Maximizes `objective` (triplet accuracy on the train split) starting
/// from `init`. Never returns parameters worse than `init`.
pub fn tune<F>(init: ParamVector, config: &TuneConfig, mut objective: F) -> Result<TuneResult>
where
    F: FnMut(&ParamVector) -> Result<f64>,
{
    if config.max_evaluations < 1 {
        return Err(SimDocError::Config("max_evaluations must be >= 1".into()));
    }
    let init = init.clamp_to_bounds();
    init.validate()?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut evals = 0usize;
    let mut best_so_far = Vec::new();

    let mut best = init;
    let mut best_acc = objective(&best)?;
    let init_acc = best_acc;
    evals += 1;
    best_so_far.push(best_acc);

    let eval = |p: &ParamVector,
                    evals: &mut usize,
                    best_so_far: &mut Vec<f64>,
                    best_acc: f64,
                    objective: &mut F|
     -> Result<Option<f64>> {
        if *evals >= config.max_evaluations {
            return Ok(None);
        }
        let acc = objective(p)?;
        *evals += 1;
        best_so_far.push(best_acc.max(acc));
        Ok(Some(acc))
    };

    'outer: for restart in 0..=config.random_restarts {
        // first pass descends from the incumbent; later passes restart
        // from a random point in bounds while keeping the global best
        let mut current = if restart == 0 {
            best
        } else {
            let mut v = [0.0; 10];
            for (i, x) in v.iter_mut().enumerate() {
                let (lo, hi) = BOUNDS[i % 5];
                *x = rng.gen_range(lo..=hi);
            }
            ParamVector(v)
        };
        let mut current_acc = if restart == 0 {
            best_acc
        } else {
            match eval(&current, &mut evals, &mut best_so_far, best_acc, &mut objective)? {
                Some(a) => a,
                None => break 'outer,
            }
        };
        if current_acc > best_acc {
            best_acc = current_acc;
            best = current;
        }

        for &step in &config.step_schedule {
            loop {
                let mut improved = false;
                for coord in 0..10 {
                    for dir in [1.0, -1.0] {
                        let mut cand = current;
                        cand.0[coord] += dir * step;
                        cand = cand.clamp_to_bounds();
                        if cand == current {
                            continue;
                        }
                        match eval(&cand, &mut evals, &mut best_so_far, best_acc, &mut objective)? {
                            Some(acc) => {
                                if acc > current_acc {
                                    current = cand;
                                    current_acc = acc;
                                    improved = true;
                                    if acc > best_acc {
                                        best_acc = acc;
                                        best = cand;
                                    }
                                }
                            }
                            None => break 'outer,
                        }
                    }
                }
                if !improved {
                    break;
                }
            }
        }
    }

    Ok(TuneResult {
        best_params: best,
        best_accuracy: best_acc,
        init_accuracy: init_acc,
        evaluations: evals,
        best_so_far,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_init_returns_init() {
        let init = ParamVector::reference_init();
        let result = tune(init, &TuneConfig::default(), |_| Ok(1.0)).unwrap();
        assert_eq!(result.best_params, init);
        assert_eq!(result.best_accuracy, 1.0);
    }

    #[test]
    fn never_worse_than_init() {
        let init = ParamVector::reference_init();
        // objective punishes any move away from init
        let result = tune(init, &TuneConfig::default(), |p| {
            Ok(if *p == init { 0.7 } else { 0.1 })
        })
        .unwrap();
        assert_eq!(result.best_accuracy, 0.7);
        assert_eq!(result.best_params, init);
    }

    #[test]
    fn finds_improvement_along_coordinate() {
        let init = ParamVector::reference_init();
        // reward lowering the sentence-level discount factor to 0
        let result = tune(init, &TuneConfig::default(), |p| Ok(1.0 - p.0[4]))
            .unwrap();
        assert!(result.best_accuracy > result.init_accuracy);
        assert!(result.best_params.0[4] < 0.5);
    }

    #[test]
    fn best_so_far_is_monotone() {
        let init = ParamVector::reference_init();
        let mut calls = 0usize;
        let result = tune(init, &TuneConfig::default(), |p| {
            calls += 1;
            Ok(((p.0[0] * 37.0 + p.0[9] * 13.0 + calls as f64 * 0.001).sin() + 1.0) / 2.0)
        })
        .unwrap();
        for pair in result.best_so_far.windows(2) {
            assert!(pair[1] >= pair[0]);
        }
        assert!(result.evaluations <= TuneConfig::default().max_evaluations);
    }

    #[test]
    fn deterministic_under_seed() {
        let init = ParamVector::reference_init();
        let objective = |p: &ParamVector| Ok((p.0[0] - p.0[4]).abs() / 3.0);
        let a = tune(init, &TuneConfig::default(), objective).unwrap();
        let b = tune(init, &TuneConfig::default(), objective).unwrap();
        assert_eq!(a.best_params, b.best_params);
        assert_eq!(a.best_so_far, b.best_so_far);
    }

    #[test]
    fn evaluated_params_stay_in_bounds() {
        let init = ParamVector::reference_init();
        tune(init, &TuneConfig::default(), |p| {
            p.validate().unwrap();
            for (i, x) in p.0.iter().enumerate() {
                let (lo, hi) = BOUNDS[i % 5];
                assert!(*x >= lo && *x <= hi);
            }
            Ok(0.5)
        })
        .unwrap();
    }

    #[test]
    fn error_propagates() {
        let init = ParamVector::reference_init();
        let err = tune(init, &TuneConfig::default(), |_| {
            Err(SimDocError::Data("triplet trip3 failed".into()))
        })
        .unwrap_err();
        assert!(err.to_string().contains("trip3"));
    }
}
