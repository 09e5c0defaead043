use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Truncated power series in ε with rational coefficients sharing one
/// denominator: `θ = (Σ_k coefficients[k] ε^k) / denominator + O(ε^(order+1))`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpsilonPolynomial {
    coefficients: Vec<i64>,
    denominator: i64,
    order: usize,
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a as i64
}

impl EpsilonPolynomial {
    /// Builds a polynomial, reducing the common denominator.
    pub fn new(mut coefficients: Vec<i64>, denominator: i64, order: usize) -> Result<Self> {
        if denominator <= 0 {
            return Err(Error::Domain("series denominator must be positive".into()));
        }
        coefficients.resize(order + 1, 0);
        let g = coefficients.iter().fold(denominator, |g, &c| gcd(g, c));
        Ok(Self {
            coefficients: coefficients.iter().map(|c| c / g).collect(),
            denominator: denominator / g,
            order,
        })
    }

    /// Integer series `1 - Σ c ε^k` from `(k, c)` pairs, as tables list them.
    pub fn one_minus(terms: &[(usize, i64)], order: usize) -> Self {
        let mut c = vec![0i64; order + 1];
        c[0] = 1;
        for &(k, v) in terms {
            if k <= order {
                c[k] -= v;
            }
        }
        Self {
            coefficients: c,
            denominator: 1,
            order,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn denominator(&self) -> i64 {
        self.denominator
    }

    /// Numerators indexed by power of ε.
    pub fn numerators(&self) -> &[i64] {
        &self.coefficients
    }

    /// Coefficient of ε^k as a float.
    pub fn coefficient(&self, k: usize) -> f64 {
        self.coefficients.get(k).copied().unwrap_or(0) as f64 / self.denominator as f64
    }

    /// Coefficient of ε^k if it is an integer.
    pub fn integer_coefficient(&self, k: usize) -> Option<i64> {
        let c = self.coefficients.get(k).copied().unwrap_or(0);
        (c % self.denominator == 0).then(|| c / self.denominator)
    }

    /// Lowest power above the constant term with a non-zero coefficient.
    pub fn leading_power(&self) -> Option<usize> {
        (1..=self.order).find(|&k| self.coefficients[k] != 0)
    }

    /// Value at ε.
    pub fn eval_epsilon(&self, eps: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.coefficients.iter().rev() {
            acc = acc * eps + c as f64;
        }
        acc / self.denominator as f64
    }

    /// `1 - θ` at ε, summed without the constant term for precision.
    pub fn deficit_epsilon(&self, eps: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.coefficients[1..].iter().rev() {
            acc = acc * eps + c as f64;
        }
        let one = (self.denominator - self.coefficients[0]) as f64;
        (one - acc * eps) / self.denominator as f64
    }

    /// Printed as `1 - e^4 - 4*e^6 + 4*e^7`.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        let den = self.denominator;
        for (k, &c) in self.coefficients.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let mag = c.unsigned_abs();
            let g = gcd(mag as i64, den) as u64;
            let (num, d) = (mag / g, den as u64 / g);
            let value = if d == 1 {
                num.to_string()
            } else {
                format!("{num}/{d}")
            };
            if out.is_empty() {
                if c < 0 {
                    out.push('-');
                }
            } else {
                out.push_str(if c < 0 { " - " } else { " + " });
            }
            if k == 0 {
                out.push_str(&value);
            } else if value == "1" {
                out.push_str(&format!("e^{k}"));
            } else {
                out.push_str(&format!("{value}*e^{k}"));
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }

    /// `self - other`, truncated at the smaller order.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        let order = self.order.min(other.order);
        let mut c = Vec::with_capacity(order + 1);
        for k in 0..=order {
            let a = self.coefficients[k].checked_mul(other.denominator);
            let b = other.coefficients[k].checked_mul(self.denominator);
            let v = a
                .zip(b)
                .and_then(|(a, b)| a.checked_sub(b))
                .ok_or_else(|| Error::Enumeration("series coefficient overflow".into()))?;
            c.push(v);
        }
        let den = self
            .denominator
            .checked_mul(other.denominator)
            .ok_or_else(|| Error::Enumeration("series coefficient overflow".into()))?;
        Self::new(c, den, order)
    }

    /// The same series cut at a lower order.
    pub fn truncate(&self, order: usize) -> Self {
        let order = order.min(self.order);
        Self::new(
            self.coefficients[..=order].to_vec(),
            self.denominator,
            order,
        )
        .expect("denominator already positive")
    }
}

impl fmt::Display for EpsilonPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

/// θ at occupation probability `p`, using `ε = 1 - p`.
pub fn eval_series(poly: &EpsilonPolynomial, p: f64) -> f64 {
    poly.eval_epsilon(1.0 - p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_forms() {
        let p = EpsilonPolynomial::one_minus(&[(6, 1), (10, 9)], 10);
        assert_eq!(p.canonical(), "1 - e^6 - 9*e^10");
        let q = EpsilonPolynomial::new(vec![2, 0, -1, 3], 2, 3).unwrap();
        assert_eq!(q.canonical(), "1 - 1/2*e^2 + 3/2*e^3");
        assert_eq!(
            EpsilonPolynomial::new(vec![], 1, 2).unwrap().canonical(),
            "0"
        );
    }

    #[test]
    fn reduces_denominator() {
        let p = EpsilonPolynomial::new(vec![4, 0, -8], 4, 2).unwrap();
        assert_eq!(p.denominator(), 1);
        assert_eq!(p.integer_coefficient(2), Some(-2));
    }

    #[test]
    fn evaluation() {
        let sq = EpsilonPolynomial::one_minus(&[(4, 1), (6, 4)], 6);
        assert!((eval_series(&sq, 0.9) - 0.999896).abs() < 1e-15);
        assert_eq!(eval_series(&sq, 1.0), 1.0);
        let tri = EpsilonPolynomial::one_minus(&[(6, 1), (12, 2)], 12);
        let e: f64 = 0.05;
        assert!((eval_series(&tri, 0.95) - (1.0 - e.powi(6) - 2.0 * e.powi(12))).abs() < 1e-15);
        assert!((tri.deficit_epsilon(e) - (e.powi(6) + 2.0 * e.powi(12))).abs() < 1e-22);
    }

    #[test]
    fn json_shape() {
        let p = EpsilonPolynomial::one_minus(&[(3, 1), (4, 3)], 4);
        let v = serde_json::to_value(&p).unwrap();
        assert_eq!(v["coefficients"], serde_json::json!([1, 0, 0, -1, -3]));
        assert_eq!(v["denominator"], 1);
    }
}
