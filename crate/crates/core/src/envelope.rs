//! Envelopes of sampled oscillatory signals.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Rabi period `π/(|α|² + μ)^{1/2}` in λt units.
pub fn rabi_period(alpha: f64, mu: f64) -> f64 {
    std::f64::consts::PI / (alpha * alpha + mu).sqrt()
}

/// `max |x_j|` over samples with `|t_j − t_i| ≤ window/2`, for every `i`.
///
/// `times` must be strictly increasing.
pub fn sliding_envelope(times: &[f64], values: &[f64], window: f64) -> Result<Vec<f64>> {
    if times.len() != values.len() {
        return Err(Error::InvalidParameter("times and values differ in length".into()));
    }
    if !(window > 0.0 && window.is_finite()) {
        return Err(Error::InvalidParameter(format!("window must be positive, got {window}")));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("times must be strictly increasing".into()));
    }
    let half = 0.5 * window;
    let n = times.len();
    let mut out = Vec::with_capacity(n);
    // Monotone deque of indices with decreasing |x|.
    let mut dq: VecDeque<usize> = VecDeque::new();
    let mut hi = 0;
    for i in 0..n {
        while hi < n && times[hi] <= times[i] + half {
            let a = values[hi].abs();
            while dq.back().is_some_and(|&j| values[j].abs() <= a) {
                dq.pop_back();
            }
            dq.push_back(hi);
            hi += 1;
        }
        while dq.front().is_some_and(|&j| times[j] < times[i] - half) {
            dq.pop_front();
        }
        out.push(values[*dq.front().expect("window contains sample i")].abs());
    }
    Ok(out)
}

/// Index of the largest element (first on ties).
pub fn argmax(values: &[f64]) -> Option<usize> {
    values
        .iter()
        .enumerate()
        .fold(None, |best: Option<(usize, f64)>, (i, &v)| match best {
            Some((_, b)) if b >= v => best,
            _ => Some((i, v)),
        })
        .map(|(i, _)| i)
}

/// Index of the smallest element (first on ties).
pub fn argmin(values: &[f64]) -> Option<usize> {
    values
        .iter()
        .enumerate()
        .fold(None, |best: Option<(usize, f64)>, (i, &v)| match best {
            Some((_, b)) if b <= v => best,
            _ => Some((i, v)),
        })
        .map(|(i, _)| i)
}

/// `n` evenly spaced points on `[start, stop]`, endpoints exact.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let h = (stop - start) / (n - 1) as f64;
            (0..n).map(|j| if j == n - 1 { stop } else { start + j as f64 * h }).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_matches_brute_force() {
        let t = linspace(0.0, 10.0, 301);
        let x: Vec<f64> = t.iter().map(|t| (3.0 * t).sin() * (-0.1 * t).exp()).collect();
        let env = sliding_envelope(&t, &x, 1.3).unwrap();
        for i in 0..t.len() {
            let brute = (0..t.len()).filter(|&j| (t[j] - t[i]).abs() <= 0.65).map(|j| x[j].abs()).fold(0.0, f64::max);
            assert_eq!(env[i], brute);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(sliding_envelope(&[0.0, 1.0], &[1.0], 1.0).is_err());
        assert!(sliding_envelope(&[0.0, 0.0], &[1.0, 1.0], 1.0).is_err());
        assert!(sliding_envelope(&[0.0, 1.0], &[1.0, 1.0], 0.0).is_err());
    }

    #[test]
    fn extrema_and_grid() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0, 2.0]), Some(1));
        assert_eq!(argmin(&[1.0, 0.5, 0.5, 2.0]), Some(1));
        assert_eq!(argmax(&[]), None);
        let g = linspace(0.01, 45.0, 500);
        assert_eq!(g.len(), 500);
        assert_eq!(g[0], 0.01);
        assert_eq!(g[499], 45.0);
    }
}
