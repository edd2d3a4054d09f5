//! Queueing models on the quarter plane: ergodicity criteria, the coupled
//! processors integral, JSQ branch points and a uniformized CTMC simulator.

mod coupled;
mod jsq;
mod sim;

pub use coupled::{coupled_f0, coupled_f0_oracle, k_theta, k_theta_residual};
pub use jsq::{jsq_branch_points, JsqBranchPoints};
pub use sim::{
    simulate_ctmc, stability_probe, CtmcEstimate, Functional, SimConfig, StabilityReport,
    STABILITY_DRIFT_THRESHOLD,
};

use crate::error::{FqwError, Result};
use crate::kernel::{build_kernel, KernelForm};
use crate::poly::rat_to_f64;
use crate::stepset::{parse_rational, WeightedStepSet};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;

/// Rationals travel as "a/b" strings; numbers are read through their
/// decimal text so 0.1 means 1/10.
pub mod rational_serde {
    use super::*;

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Text(String),
        Number(serde_json::Number),
    }

    pub fn serialize<S: Serializer>(v: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigRational, D::Error> {
        let text = match Raw::deserialize(d)? {
            Raw::Text(t) => t,
            Raw::Number(n) => n.to_string(),
        };
        parse_rational(text.trim()).map_err(serde::de::Error::custom)
    }
}

/// Bivariate Laurent polynomial with exact coefficients.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BiPoly(pub BTreeMap<(i32, i32), BigRational>);

impl BiPoly {
    pub fn add_term(&mut self, i: i32, j: i32, c: BigRational) {
        let e = self.0.entry((i, j)).or_insert_with(BigRational::zero);
        *e += c;
        if e.is_zero() {
            self.0.remove(&(i, j));
        }
    }

    pub fn eval(&self, x: &BigRational, y: &BigRational) -> BigRational {
        self.0
            .iter()
            .map(|(&(i, j), c)| c * pow_i(x, i) * pow_i(y, j))
            .sum()
    }

    /// (∂/∂x, ∂/∂y) at (1, 1).
    pub fn gradient_at_one(&self) -> (BigRational, BigRational) {
        let mut gx = BigRational::zero();
        let mut gy = BigRational::zero();
        for (&(i, j), c) in &self.0 {
            gx += c * BigRational::from_integer(i.into());
            gy += c * BigRational::from_integer(j.into());
        }
        (gx, gy)
    }
}

fn pow_i(v: &BigRational, k: i32) -> BigRational {
    if k >= 0 {
        num_traits::pow(v.clone(), k as usize)
    } else {
        num_traits::pow(v.recip(), (-k) as usize)
    }
}

/// Interior walk plus the two boundary generating functions: `q` acts on
/// the horizontal axis (y = 0), `q_tilde` on the vertical axis (x = 0).
#[derive(Clone, Debug)]
pub struct ErgodicityModel {
    pub interior: WeightedStepSet,
    pub kernel: KernelForm,
    pub q: BiPoly,
    pub q_tilde: BiPoly,
}

impl ErgodicityModel {
    pub fn new(interior: WeightedStepSet, q: BiPoly, q_tilde: BiPoly) -> Result<Self> {
        let one = BigRational::one();
        for (name, p) in [("q", &q), ("q_tilde", &q_tilde)] {
            if !p.eval(&one, &one).is_zero() {
                return Err(FqwError::Domain(format!("{name}(1,1) != 0")));
            }
        }
        let kernel = build_kernel(&interior, None)?;
        Ok(ErgodicityModel {
            interior,
            kernel,
            q,
            q_tilde,
        })
    }
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct ErgodicityFlags {
    pub delta: u8,
    pub delta_tilde: u8,
    pub ergodic: bool,
}

/// Returns (root at 1 is the small one, derivative of Y₀ at 1) for the
/// quadratic in the second coordinate. `up`/`down` are the total weights of
/// steps moving that coordinate up/down, `mx`/`my` the drifts.
fn branch_at_one(up: &BigRational, down: &BigRational, mx: &BigRational, my: &BigRational) -> Result<(bool, Option<BigRational>)> {
    // Q(1, y) ∝ (y − 1)(up·y − down): roots 1 and down/up.
    if up == down {
        return Err(FqwError::ZeroDrift(
            "zero-drift boundary case, criterion inapplicable: 1 is a branch point".into(),
        ));
    }
    let at_one = up.is_zero() || down > up;
    // On Q = 0 near (1,1): Q_x + Q_y Y' = 0 with Q_x = mx, Q_y = my.
    let deriv = if at_one { Some(-mx / my) } else { None };
    Ok((at_one, deriv))
}

/// The ergodicity test for a walk with two reflecting boundaries:
/// δ + δ̃ = 1{X₀(1) = 1, Y₀(1) = 1} + 1.
pub fn ergodicity_flags(m: &ErgodicityModel) -> Result<ErgodicityFlags> {
    let (mx, my) = m.interior.drift();
    let mut up_y = BigRational::zero();
    let mut down_y = BigRational::zero();
    let mut up_x = BigRational::zero();
    let mut down_x = BigRational::zero();
    for (&(i, j), w) in m.interior.iter() {
        match j {
            1 => up_y += w,
            -1 => down_y += w,
            _ => {}
        }
        match i {
            1 => up_x += w,
            -1 => down_x += w,
            _ => {}
        }
    }
    let (y_one, y_deriv) = branch_at_one(&up_y, &down_y, &mx, &my)?;
    let (x_one, x_deriv) = branch_at_one(&up_x, &down_x, &my, &mx)?;
    let sign_flag = |d: BigRational, which: &str| -> Result<u8> {
        if d.is_zero() {
            return Err(FqwError::Degenerate(format!("d{which}/d at 1 vanishes")));
        }
        Ok(u8::from(d.is_negative()))
    };
    let delta = match y_deriv {
        Some(yd) => {
            let (qx, qy) = m.q.gradient_at_one();
            sign_flag(qx + qy * yd, "q")?
        }
        None => 0,
    };
    let delta_tilde = match x_deriv {
        Some(xd) => {
            let (qx, qy) = m.q_tilde.gradient_at_one();
            sign_flag(qy + qx * xd, "q_tilde")?
        }
        None => 0,
    };
    let rhs = u8::from(x_one && y_one) + 1;
    Ok(ErgodicityFlags {
        delta,
        delta_tilde,
        ergodic: delta + delta_tilde == rhs,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CoupledParams {
    #[serde(with = "rational_serde")]
    pub lambda1: BigRational,
    #[serde(with = "rational_serde")]
    pub lambda2: BigRational,
    #[serde(with = "rational_serde")]
    pub mu1: BigRational,
    #[serde(with = "rational_serde")]
    pub mu2: BigRational,
    #[serde(with = "rational_serde")]
    pub mu1_star: BigRational,
    #[serde(with = "rational_serde")]
    pub mu2_star: BigRational,
}

impl CoupledParams {
    /// Head-of-line processor sharing: μ₁ = ξμ₁*, μ₂ = (1−ξ)μ₂*.
    pub fn processor_sharing(
        lambda1: BigRational,
        lambda2: BigRational,
        mu1_star: BigRational,
        mu2_star: BigRational,
        xi: BigRational,
    ) -> Result<Self> {
        if xi.is_negative() || xi > BigRational::one() {
            return Err(FqwError::Domain(format!("xi = {xi} outside [0, 1]")));
        }
        let mu1 = &xi * &mu1_star;
        let mu2 = (BigRational::one() - &xi) * &mu2_star;
        let p = CoupledParams {
            lambda1,
            lambda2,
            mu1,
            mu2,
            mu1_star,
            mu2_star,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [&self.lambda1, &self.lambda2, &self.mu1, &self.mu2, &self.mu1_star, &self.mu2_star];
        if all.iter().any(|v| v.is_negative()) {
            return Err(FqwError::Domain("coupled rates must be nonnegative".into()));
        }
        if self.mu1_star.is_zero() || self.mu2_star.is_zero() {
            return Err(FqwError::Domain("boundary service rates must be positive".into()));
        }
        Ok(())
    }

    pub fn p(&self) -> BigRational {
        &self.mu1 - &self.mu1_star
    }

    pub fn q(&self) -> BigRational {
        &self.mu2 - &self.mu2_star
    }

    /// pq = μ₁μ₂.
    pub fn is_processor_sharing(&self) -> bool {
        self.p() * self.q() == &self.mu1 * &self.mu2
    }

    /// ξ recovered from μ₁ = ξμ₁*.
    pub fn xi(&self) -> BigRational {
        &self.mu1 / &self.mu1_star
    }

    pub fn ergodicity_model(&self) -> Result<ErgodicityModel> {
        let interior = WeightedStepSet::from_rates(&[
            ((1, 0), self.lambda1.clone()),
            ((0, 1), self.lambda2.clone()),
            ((-1, 0), self.mu1.clone()),
            ((0, -1), self.mu2.clone()),
        ])?;
        let (l1, l2) = (&self.lambda1, &self.lambda2);
        // q = x[λ₁(x−1) + λ₂(y−1) + μ₁*(1/x − 1)]
        let mut q = BiPoly::default();
        q.add_term(2, 0, l1.clone());
        q.add_term(1, 1, l2.clone());
        q.add_term(0, 0, self.mu1_star.clone());
        q.add_term(1, 0, -(l1 + l2 + &self.mu1_star));
        // q̃ = y[λ₁(x−1) + λ₂(y−1) + μ₂*(1/y − 1)]
        let mut qt = BiPoly::default();
        qt.add_term(1, 1, l1.clone());
        qt.add_term(0, 2, l2.clone());
        qt.add_term(0, 0, self.mu2_star.clone());
        qt.add_term(0, 1, -(l1 + l2 + &self.mu2_star));
        ErgodicityModel::new(interior, q, qt)
    }

    /// F(0,0) under processor sharing: 1 − λ₁/μ₁* − λ₂/μ₂*.
    pub fn empty_probability(&self) -> f64 {
        1.0 - rat_to_f64(&(&self.lambda1 / &self.mu1_star)) - rat_to_f64(&(&self.lambda2 / &self.mu2_star))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct JsqParams {
    #[serde(with = "rational_serde")]
    pub alpha: BigRational,
    #[serde(with = "rational_serde")]
    pub beta: BigRational,
    #[serde(with = "rational_serde")]
    pub lambda: BigRational,
    /// Probability that a tie sends the arrival to queue 1.
    #[serde(with = "rational_serde", default = "half")]
    pub pi1: BigRational,
}

fn half() -> BigRational {
    BigRational::new(1.into(), 2.into())
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct AlternatingParams {
    #[serde(with = "rational_serde")]
    pub lambda1: BigRational,
    #[serde(with = "rational_serde")]
    pub lambda2: BigRational,
    #[serde(with = "rational_serde")]
    pub mu1: BigRational,
    #[serde(with = "rational_serde")]
    pub mu2: BigRational,
    #[serde(with = "rational_serde")]
    pub xi1: BigRational,
    #[serde(with = "rational_serde")]
    pub xi2: BigRational,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum QueueModel {
    Coupled(CoupledParams),
    Jsq(JsqParams),
    Alternating(AlternatingParams),
}

impl QueueModel {
    pub fn name(&self) -> &'static str {
        match self {
            QueueModel::Coupled(_) => "coupled",
            QueueModel::Jsq(_) => "jsq",
            QueueModel::Alternating(_) => "alternating",
        }
    }

    /// Coupled processors use the two-boundary criterion; JSQ and the
    /// alternating server use their load conditions λ < α+β and ρ₁+ρ₂ < 1.
    pub fn is_ergodic(&self) -> Result<bool> {
        match self {
            QueueModel::Coupled(p) => {
                p.validate()?;
                Ok(ergodicity_flags(&p.ergodicity_model()?)?.ergodic)
            }
            QueueModel::Jsq(p) => Ok(p.lambda < &p.alpha + &p.beta),
            QueueModel::Alternating(p) => {
                if p.mu1.is_zero() || p.mu2.is_zero() {
                    return Err(FqwError::Domain("service rates must be positive".into()));
                }
                Ok(&p.lambda1 / &p.mu1 + &p.lambda2 / &p.mu2 < BigRational::one())
            }
        }
    }
}
