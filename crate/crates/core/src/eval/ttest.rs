use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};

/// Result of a two-tailed paired t-test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTest {
    pub n: usize,
    pub mean_diff: f64,
    pub t: f64,
    pub p_two_tailed: f64,
    /// All differences equal but nonzero: `t` is infinite and `p` is 0.
    pub degenerate_variance: bool,
}

impl TTest {
    pub fn significant_at(&self, alpha: f64) -> bool {
        self.p_two_tailed < alpha
    }

    pub fn significant_at_95(&self) -> bool {
        self.significant_at(0.05)
    }
}

/// Two-tailed Student t tail probability `P(|T| >= |t|)` with `df` degrees of freedom.
pub fn student_t_two_tailed(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    beta_reg(df / 2.0, 0.5, df / (df + t * t))
}

/// Paired t-test on `a - b` with the sample (n - 1) standard deviation.
pub fn paired_ttest(a: &[f64], b: &[f64]) -> Result<TTest> {
    if a.len() != b.len() {
        return Err(Error::Invalid(format!(
            "paired t-test needs equal lengths, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::Invalid(format!("paired t-test needs n >= 2, got {n}")));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = diffs.iter().sum::<f64>() / n as f64;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    if sd == 0.0 {
        return Ok(if mean == 0.0 {
            TTest {
                n,
                mean_diff: 0.0,
                t: 0.0,
                p_two_tailed: 1.0,
                degenerate_variance: false,
            }
        } else {
            TTest {
                n,
                mean_diff: mean,
                t: f64::INFINITY.copysign(mean),
                p_two_tailed: 0.0,
                degenerate_variance: true,
            }
        });
    }
    let t = mean / (sd / (n as f64).sqrt());
    Ok(TTest {
        n,
        mean_diff: mean,
        t,
        p_two_tailed: student_t_two_tailed(t, (n - 1) as f64),
        degenerate_variance: false,
    })
}
