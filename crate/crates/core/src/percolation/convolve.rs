use statrs::function::factorial::ln_binomial;

/// Width of the binomial window in standard deviations on each side.
const WINDOW_SIGMAS: f64 = 8.0;

/// Normalised binomial weights `P(K = k)` for `K ~ Bin(m, p)`, truncated to
/// the central window where they are not negligible.
#[derive(Debug, Clone, PartialEq)]
pub struct BinomialWindow {
    pub start: usize,
    pub weights: Vec<f64>,
}

impl BinomialWindow {
    pub fn new(m: usize, p: f64) -> Self {
        if p <= 0.0 {
            return Self {
                start: 0,
                weights: vec![1.0],
            };
        }
        if p >= 1.0 {
            return Self {
                start: m,
                weights: vec![1.0],
            };
        }
        let mf = m as f64;
        let mean = mf * p;
        let sigma = (mf * p * (1.0 - p)).sqrt();
        let lo = (mean - WINDOW_SIGMAS * sigma - 2.0).floor().max(0.0) as usize;
        let hi = ((mean + WINDOW_SIGMAS * sigma + 2.0).ceil() as usize).min(m);
        let (lp, lq) = (p.ln(), (-p).ln_1p());
        let log_pmf =
            |k: usize| ln_binomial(m as u64, k as u64) + k as f64 * lp + (mf - k as f64) * lq;
        let mode = ((mf + 1.0) * p).floor().clamp(lo as f64, hi as f64) as usize;
        let top = log_pmf(mode);
        let mut weights: Vec<f64> = (lo..=hi).map(|k| (log_pmf(k) - top).exp()).collect();
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        Self { start: lo, weights }
    }

    pub fn end(&self) -> usize {
        self.start + self.weights.len()
    }

    /// `sum_k w_k x_k` over the window.
    pub fn apply(&self, xs: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(&xs[self.start..self.end()])
            .map(|(w, x)| w * x)
            .sum()
    }

    /// `P(K >= k)` under the truncated distribution.
    pub fn tail(&self, k: usize) -> f64 {
        if k <= self.start {
            1.0
        } else if k >= self.end() {
            0.0
        } else {
            self.weights[k - self.start..].iter().sum()
        }
    }

    /// Tail probabilities `P(K >= start + i)` for every position of the window.
    pub fn tails(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.weights.len()];
        let mut acc = 0.0;
        for i in (0..self.weights.len()).rev() {
            acc += self.weights[i];
            out[i] = acc;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{Binomial, DiscreteCDF};

    #[test]
    fn weights_sum_to_one() {
        for &(m, p) in &[(10, 0.3), (1000, 0.5), (50_000, 0.9999), (7, 0.01)] {
            let w = BinomialWindow::new(m, p);
            let s: f64 = w.weights.iter().sum();
            assert!((s - 1.0).abs() < 1e-9);
            assert!(w.end() <= m + 1);
        }
    }

    #[test]
    fn tail_matches_reference() {
        let (m, p) = (400, 0.37);
        let w = BinomialWindow::new(m, p);
        let b = Binomial::new(p, m as u64).unwrap();
        for k in [100usize, 140, 148, 160, 200] {
            let exact = b.sf(k as u64 - 1);
            assert!((w.tail(k) - exact).abs() < 1e-12, "k = {k}");
        }
    }

    #[test]
    fn degenerate_ends() {
        assert_eq!(
            BinomialWindow::new(5, 0.0).apply(&[3.0, 0.0, 0.0, 0.0, 0.0, 9.0]),
            3.0
        );
        assert_eq!(
            BinomialWindow::new(5, 1.0).apply(&[3.0, 0.0, 0.0, 0.0, 0.0, 9.0]),
            9.0
        );
    }
}
