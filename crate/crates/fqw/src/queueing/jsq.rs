use crate::error::{FqwError, Result};
use crate::poly::rat_to_f64;
use num_rational::BigRational;
use num_traits::Signed;
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct JsqBranchPoints {
    /// 4αβ/(s² − 4αλ), exact.
    #[serde(with = "super::rational_serde")]
    pub x_ab: BigRational,
    /// 4αβ/(s² − 4βλ), exact.
    #[serde(with = "super::rational_serde")]
    pub x_ba: BigRational,
    pub y1_ab: f64,
    pub y2_ab: f64,
    pub y1_ba: f64,
    pub y2_ba: f64,
}

impl JsqBranchPoints {
    pub fn x_ab_f64(&self) -> f64 {
        rat_to_f64(&self.x_ab)
    }

    pub fn x_ba_f64(&self) -> f64 {
        rat_to_f64(&self.x_ba)
    }
}

/// Nonzero branch points of the two JSQ kernels (α,β) and (β,α).
pub fn jsq_branch_points(alpha: &BigRational, beta: &BigRational, lambda: &BigRational) -> Result<JsqBranchPoints> {
    if !alpha.is_positive() || !beta.is_positive() || !lambda.is_positive() {
        return Err(FqwError::Domain("JSQ rates must be positive".into()));
    }
    let s = alpha + beta + lambda;
    let s2 = &s * &s;
    let four = BigRational::from_integer(4.into());
    let den_ab = &s2 - &four * alpha * lambda;
    let den_ba = &s2 - &four * beta * lambda;
    if !den_ab.is_positive() || !den_ba.is_positive() {
        return Err(FqwError::Domain("s^2 <= 4 alpha lambda or 4 beta lambda".into()));
    }
    let num = &four * alpha * beta;
    let (a, b, l, sf) = (rat_to_f64(alpha), rat_to_f64(beta), rat_to_f64(lambda), rat_to_f64(&s));
    let (ra, rb) = (2.0 * (a * l).sqrt(), 2.0 * (b * l).sqrt());
    Ok(JsqBranchPoints {
        x_ab: &num / den_ab,
        x_ba: num / den_ba,
        y1_ab: b / (sf + ra),
        y2_ab: b / (sf - ra),
        y1_ba: a / (sf + rb),
        y2_ba: a / (sf - rb),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat;

    #[test]
    fn worked_example() {
        let bp = jsq_branch_points(&rat(1, 1), &rat(2, 1), &rat(1, 1)).unwrap();
        assert_eq!(bp.x_ab, rat(2, 3));
        assert!(bp.x_ab < bp.x_ba);
        // λ = α puts y₂ exactly on the unit circle
        assert_eq!(bp.y2_ab, 1.0);
        let bp = jsq_branch_points(&rat(1, 1), &rat(2, 1), &rat(1, 2)).unwrap();
        assert!(0.0 < bp.y1_ab && bp.y1_ab < bp.y2_ab && bp.y2_ab < 1.0);
    }
}
