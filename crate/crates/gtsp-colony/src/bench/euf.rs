//! Expected-utility scoring of percentage deviations.
//!
//! For deviations x_1..x_np the score fits a gamma-style model through
//! the sample mean and (population) variance:
//!
//!   b = s^2 / x_bar,  c = (x_bar / s)^2,
//!   euf = 500 - 100 * (1 - 0.05 * b)^(-c)
//!
//! Higher is better; an algorithm that always hits the reference exactly
//! scores 400. The two degenerate cases (all deviations zero, or all
//! equal) take that limit value and are flagged.

use super::BenchError;

pub const EUF_GAMMA: f64 = 500.0;
pub const EUF_BETA: f64 = 100.0;
pub const EUF_T: f64 = 0.05;

/// Expected-utility statistics of one algorithm over a problem set.
#[derive(Debug, Clone, PartialEq)]
pub struct EufStats {
    pub algorithm: String,
    /// Mean percentage deviation.
    pub x_bar: f64,
    /// Population variance of the deviations.
    pub s2: f64,
    pub b_hat: f64,
    pub c_hat: f64,
    pub euf: f64,
    /// Set when the variance (or every deviation) is zero and the score
    /// is the 400 limit by convention.
    pub degenerate: bool,
    /// Assigned by [`rank_algorithms`]; 1 is best.
    pub rank: Option<usize>,
}

/// Computes the expected-utility statistics for one algorithm's
/// deviations.
pub fn expected_utility(algorithm: &str, deviations: &[f64]) -> Result<EufStats, BenchError> {
    if deviations.is_empty() {
        return Err(BenchError::EmptyDeviations);
    }
    let np = deviations.len() as f64;
    let x_bar = deviations.iter().sum::<f64>() / np;
    let s2 = deviations.iter().map(|x| (x - x_bar) * (x - x_bar)).sum::<f64>() / np;

    if s2 == 0.0 {
        // All deviations equal; with x_bar = 0 this is the all-optimal
        // case. Either way the score degenerates to gamma - beta.
        return Ok(EufStats {
            algorithm: algorithm.to_string(),
            x_bar,
            s2,
            b_hat: 0.0,
            c_hat: if x_bar == 0.0 { 0.0 } else { f64::INFINITY },
            euf: EUF_GAMMA - EUF_BETA,
            degenerate: true,
            rank: None,
        });
    }
    if x_bar == 0.0 {
        return Err(BenchError::EufDomain {
            x_bar,
            s2,
            why: "zero mean with nonzero variance".into(),
        });
    }

    let b_hat = s2 / x_bar;
    let c_hat = (x_bar * x_bar) / s2;
    let base = 1.0 - b_hat * EUF_T;
    if base <= 0.0 {
        return Err(BenchError::EufDomain {
            x_bar,
            s2,
            why: format!("1 - b*t = {base} is not positive"),
        });
    }
    Ok(EufStats {
        algorithm: algorithm.to_string(),
        x_bar,
        s2,
        b_hat,
        c_hat,
        euf: EUF_GAMMA - EUF_BETA * base.powf(-c_hat),
        degenerate: false,
        rank: None,
    })
}

/// Orders by descending score (ties to the lower mean deviation) and
/// assigns ranks starting at 1.
pub fn rank_algorithms(mut stats: Vec<EufStats>) -> Vec<EufStats> {
    stats.sort_by(|a, b| {
        b.euf
            .partial_cmp(&a.euf)
            .unwrap()
            .then(a.x_bar.partial_cmp(&b.x_bar).unwrap())
    });
    for (i, s) in stats.iter_mut().enumerate() {
        s.rank = Some(i + 1);
    }
    stats
}
