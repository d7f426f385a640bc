//! Small binomial helpers shared by the statistical checks.

/// Standard error of a binomial proportion with success probability `p`
/// over `n` trials.
pub fn binomial_stderr(p: f64, n: u64) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    libm::sqrt(p * (1.0 - p) / n as f64)
}

/// `|k/n − p|` measured in binomial standard errors. A zero-variance
/// expectation yields 0 on an exact match and infinity otherwise.
pub fn binomial_z(successes: u64, n: u64, p: f64) -> f64 {
    let observed = successes as f64 / n as f64;
    let se = binomial_stderr(p, n);
    let diff = (observed - p).abs();
    if se == 0.0 {
        return if diff == 0.0 { 0.0 } else { f64::INFINITY };
    }
    diff / se
}

/// Whether `successes / n` is within `k` binomial standard errors of `p`.
pub fn within_sigmas(successes: u64, n: u64, p: f64, k: f64) -> bool {
    n > 0 && binomial_z(successes, n, p) <= k
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z_scores() {
        assert_eq!(binomial_z(50, 100, 0.5), 0.0);
        assert!((binomial_z(60, 100, 0.5) - 2.0).abs() < 1e-12);
        assert_eq!(binomial_z(0, 100, 0.0), 0.0);
        assert_eq!(binomial_z(1, 100, 0.0), f64::INFINITY);
        assert!(!within_sigmas(0, 0, 0.5, 4.0));
    }
}
