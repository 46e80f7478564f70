use crate::error::check_dim;
use crate::{Error, Result};

/// Candidate thresholds: midpoints of consecutive distinct predictions
/// clipped to `[-1, 1]`, plus both endpoints; sorted and deduplicated.
pub fn threshold_candidates(predictions: &[f64]) -> Vec<f64> {
    let mut p: Vec<f64> = predictions.to_vec();
    p.sort_unstable_by(f64::total_cmp);
    p.dedup();
    let mut out: Vec<f64> = p.windows(2).map(|w| (0.5 * (w[0] + w[1])).clamp(-1.0, 1.0)).collect();
    out.push(-1.0);
    out.push(1.0);
    out.sort_unstable_by(f64::total_cmp);
    out.dedup();
    out
}

/// Weighted error of `sign(p - t)` (with `sign(0) = +1`) at every candidate.
fn sweep(predictions: &[f64], labels: &[i8], weights: &[f64], cands: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..predictions.len()).collect();
    order.sort_unstable_by(|&a, &b| predictions[a].total_cmp(&predictions[b]));
    // start with t below everything: all predicted +1, errors are the -1 labels
    let mut err: f64 = labels.iter().zip(weights).filter(|(y, _)| **y < 0).map(|(_, w)| w).sum();
    let mut k = 0;
    cands
        .iter()
        .map(|&t| {
            while k < order.len() && predictions[order[k]] < t {
                let j = order[k];
                err += if labels[j] > 0 { weights[j] } else { -weights[j] };
                k += 1;
            }
            err
        })
        .collect()
}

pub fn select_threshold(predictions: &[f64], labels: &[i8]) -> Result<f64> {
    select_threshold_weighted(predictions, labels, &vec![1.0; labels.len()])
}

/// Threshold minimizing the weighted 0/1 error; ties go to the smallest `t`.
pub fn select_threshold_weighted(predictions: &[f64], labels: &[i8], weights: &[f64]) -> Result<f64> {
    check_dim(predictions.len(), labels.len())?;
    check_dim(predictions.len(), weights.len())?;
    if predictions.is_empty() {
        return Err(Error::Empty("threshold selection needs predictions"));
    }
    let cands = threshold_candidates(predictions);
    let errs = sweep(predictions, labels, weights, &cands);
    let mut best = 0;
    for (i, e) in errs.iter().enumerate() {
        if *e < errs[best] - 1e-12 {
            best = i;
        }
    }
    Ok(cands[best])
}

/// Fraction of `sign(p - t)` that disagree with the labels.
pub fn threshold_error(predictions: &[f64], labels: &[i8], t: f64) -> f64 {
    let wrong = predictions
        .iter()
        .zip(labels)
        .filter(|(p, y)| crate::hypercube::sign(**p - t) != **y)
        .count();
    wrong as f64 / predictions.len().max(1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable_predictions() {
        let p = [-0.8, -0.5, -0.2, 0.3, 0.6];
        let y = [-1, -1, -1, 1, 1];
        let t = select_threshold(&p, &y).unwrap();
        assert_eq!(threshold_error(&p, &y, t), 0.0);
        assert!((t - 0.05).abs() < 1e-15);
    }

    #[test]
    fn all_positive_picks_minus_one() {
        let p = [0.1, -0.3, 0.7];
        assert_eq!(select_threshold(&p, &[1, 1, 1]).unwrap(), -1.0);
        assert_eq!(select_threshold(&p, &[-1, -1, -1]).unwrap(), 1.0);
    }

    #[test]
    fn boundary_equal_prediction_is_positive() {
        // p == t predicts +1
        assert_eq!(threshold_error(&[0.25], &[1], 0.25), 0.0);
    }

    #[test]
    fn weighted_matches_repetition() {
        let p = [0.2, -0.1, 0.4, 0.0];
        let y = [1, -1, -1, 1];
        let w = [3.0, 1.0, 2.0, 1.0];
        let mut pr = Vec::new();
        let mut yr = Vec::new();
        for i in 0..4 {
            for _ in 0..w[i] as usize {
                pr.push(p[i]);
                yr.push(y[i]);
            }
        }
        assert_eq!(select_threshold_weighted(&p, &y, &w).unwrap(), select_threshold(&pr, &yr).unwrap());
    }

    #[test]
    fn empty_is_rejected() {
        assert!(select_threshold(&[], &[]).is_err());
    }
}
