//! Small Monte Carlo summaries.

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
    /// Number of independent units the standard error is based on.
    pub samples: usize,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self {
            mean: value,
            std_err: 0.0,
            samples: 1,
        }
    }

    /// `(mean - target) / std_err`; `None` when the error is zero.
    pub fn z_score(&self, target: f64) -> Option<f64> {
        (self.std_err > 0.0).then(|| (self.mean - target) / self.std_err)
    }
}

/// Running count, sum and sum of squares.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Summary {
    pub count: usize,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Summary {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(&mut self, other: &Summary) {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            f64::NAN
        } else {
            self.sum / self.count as f64
        }
    }

    /// Unbiased sample variance (0 for fewer than two samples).
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        let m = self.sum / n;
        ((self.sum_sq - n * m * m) / (n - 1.0)).max(0.0)
    }

    pub fn estimate(&self) -> Estimate {
        Estimate {
            mean: self.mean(),
            std_err: (self.variance() / self.count.max(1) as f64).sqrt(),
            samples: self.count,
        }
    }
}

impl FromIterator<f64> for Summary {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Summary::default();
        for x in iter {
            s.push(x);
        }
        s
    }
}

/// Mean and standard error of i.i.d. samples.
pub fn mean_se(values: &[f64]) -> Estimate {
    values.iter().copied().collect::<Summary>().estimate()
}

/// Two-stage estimate: replicates nested within independent groups
/// (forwarding runs within graphs).
///
/// The point estimate is the mean of the group means. With two or more
/// groups the variance of that mean is estimated from the spread of the
/// group means, which carries both the between-group and the
/// within-group component. A single group falls back to the within-group
/// spread.
pub fn two_level(groups: &[Vec<f64>]) -> Estimate {
    let means: Vec<f64> = groups
        .iter()
        .filter(|g| !g.is_empty())
        .map(|g| g.iter().sum::<f64>() / g.len() as f64)
        .collect();
    match means.len() {
        0 => Estimate {
            mean: f64::NAN,
            std_err: f64::NAN,
            samples: 0,
        },
        1 => {
            let g = groups.iter().find(|g| !g.is_empty()).unwrap();
            mean_se(g)
        }
        _ => mean_se(&means),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_basics() {
        let s: Summary = [1.0, 2.0, 3.0, 4.0].into_iter().collect();
        assert_eq!(s.mean(), 2.5);
        assert!((s.variance() - 5.0 / 3.0).abs() < 1e-12);
        let e = s.estimate();
        assert!((e.std_err - (5.0f64 / 12.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn merge_matches_sequential() {
        let a: Summary = [1.0, 5.0].into_iter().collect();
        let b: Summary = [2.0, 7.0, 9.0].into_iter().collect();
        let mut m = a;
        m.merge(&b);
        let all: Summary = [1.0, 5.0, 2.0, 7.0, 9.0].into_iter().collect();
        assert_eq!(m.count, all.count);
        assert!((m.mean() - all.mean()).abs() < 1e-12);
        assert!((m.variance() - all.variance()).abs() < 1e-12);
    }

    #[test]
    fn two_level_uses_group_means() {
        let e = two_level(&[vec![1.0, 3.0], vec![5.0, 7.0]]);
        assert_eq!(e.mean, 4.0);
        // group means 2 and 6: sd = 2√2, se = 2
        assert!((e.std_err - 2.0).abs() < 1e-12);
        assert_eq!(e.samples, 2);
        let single = two_level(&[vec![1.0, 3.0]]);
        assert_eq!(single.mean, 2.0);
        assert!((single.std_err - 1.0).abs() < 1e-12);
    }

    #[test]
    fn z_scores() {
        let e = Estimate { mean: 3.0, std_err: 0.5, samples: 4 };
        assert_eq!(e.z_score(2.0), Some(2.0));
        assert_eq!(Estimate::exact(1.0).z_score(0.0), None);
    }
}
