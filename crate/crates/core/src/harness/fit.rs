use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FitError {
    #[error("need at least two distinct feature values")]
    Degenerate,
}

/// `y ≈ slope·x + intercept` minimizing the largest absolute residual.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual_max: f64,
}

impl AffineFit {
    pub fn at(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }

    /// Zero residual: the points lie on one line.
    pub fn is_exact(&self) -> bool {
        self.residual_max.abs() < 1e-9
    }
}

fn spread(points: &[(f64, f64)], slope: f64) -> (f64, f64) {
    points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(x, y)| {
            let r = y - slope * x;
            (lo.min(r), hi.max(r))
        })
}

/// Minimax line through `points`. The optimum's slope is the slope of a
/// pair of points, and for a fixed slope the best intercept centres the
/// residual range; both are searched exhaustively over the per-`x`
/// extremes.
pub fn fit_affine(points: &[(f64, f64)]) -> Result<AffineFit, FitError> {
    let mut xs: Vec<(f64, f64, f64)> = Vec::new();
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (x, y) in sorted {
        match xs.last_mut() {
            Some((lx, lo, hi)) if *lx == x => {
                *lo = lo.min(y);
                *hi = hi.max(y);
            }
            _ => xs.push((x, y, y)),
        }
    }
    if xs.len() < 2 {
        return Err(FitError::Degenerate);
    }
    let ext: Vec<(f64, f64)> = xs.iter().flat_map(|&(x, lo, hi)| [(x, lo), (x, hi)]).collect();
    let mut best: Option<AffineFit> = None;
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            for &yi in &[xs[i].1, xs[i].2] {
                for &yj in &[xs[j].1, xs[j].2] {
                    let slope = (yj - yi) / (xs[j].0 - xs[i].0);
                    let (lo, hi) = spread(&ext, slope);
                    let fit = AffineFit {
                        slope,
                        intercept: (lo + hi) / 2.0,
                        residual_max: (hi - lo) / 2.0,
                    };
                    if best.is_none_or(|b| fit.residual_max < b.residual_max - 1e-12) {
                        best = Some(fit);
                    }
                }
            }
        }
    }
    Ok(best.expect("at least one pair"))
}

/// `y ≤ a·f₀ + b·f₁ + c` with nonnegative integers, `a, b ≤ max_coeff`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UpperFit {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    /// Sum of `bound - y` over the points.
    pub slack: u64,
}

impl UpperFit {
    pub fn at(&self, f: [u64; 2]) -> u64 {
        self.a * f[0] + self.b * f[1] + self.c
    }
}

/// The dominating bound of least total slack; ties go to smaller `a`, then
/// smaller `b`. Every point satisfies it by construction.
pub fn fit_upper(points: &[([u64; 2], u64)], max_coeff: u64) -> Option<UpperFit> {
    let mut best: Option<UpperFit> = None;
    for a in 0..=max_coeff {
        for b in 0..=max_coeff {
            let lin = |f: [u64; 2]| a * f[0] + b * f[1];
            let c = points.iter().map(|&(f, y)| y.saturating_sub(lin(f))).max()?;
            let slack = points.iter().map(|&(f, y)| lin(f) + c - y).sum();
            if best.is_none_or(|bf| slack < bf.slack) {
                best = Some(UpperFit { a, b, c, slack });
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let pts: Vec<(f64, f64)> = (0..10).map(|x| (x as f64, 15.0 * x as f64 + 8.0)).collect();
        let f = fit_affine(&pts).unwrap();
        assert_eq!((f.slope, f.intercept), (15.0, 8.0));
        assert!(f.is_exact());
    }

    #[test]
    fn constant_table_has_zero_slope() {
        let pts = [(0.0, 4.0), (1.0, 4.0), (5.0, 4.0)];
        let f = fit_affine(&pts).unwrap();
        assert_eq!(f.slope, 0.0);
        assert!(f.is_exact());
    }

    #[test]
    fn minimax_residual() {
        // two values at x=0 force a residual of at least 1
        let pts = [(0.0, 0.0), (0.0, 2.0), (1.0, 1.0), (2.0, 2.0)];
        let f = fit_affine(&pts).unwrap();
        assert!((f.residual_max - 1.0).abs() < 1e-9);
        for &(x, y) in &pts {
            assert!((f.at(x) - y).abs() <= f.residual_max + 1e-9);
        }
    }

    #[test]
    fn single_feature_value_is_degenerate() {
        assert_eq!(fit_affine(&[(1.0, 2.0), (1.0, 3.0)]), Err(FitError::Degenerate));
    }

    #[test]
    fn upper_fit_recovers_exact_bound() {
        let pts: Vec<([u64; 2], u64)> = (0..6)
            .flat_map(|x| (0..6).map(move |y| ([x, y], 3 * x + 2 * y + 7)))
            .collect();
        let f = fit_upper(&pts, 10).unwrap();
        assert_eq!((f.a, f.b, f.c, f.slack), (3, 2, 7, 0));
        assert!(fit_upper(&[], 3).is_none());
    }
}
