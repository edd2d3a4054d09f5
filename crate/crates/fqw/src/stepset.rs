//! Step sets, their textual grammar, and the census of quarter-plane models.

use crate::error::{FqwError, Result};
use crate::poly::rat;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// A small step (i, j) with i, j in {-1, 0, 1}. Tuple order is the fixed
/// step ordering used everywhere for determinism.
pub type Step = (i8, i8);

pub const ALL_STEPS: [Step; 8] = [
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, -1),
    (0, 1),
    (1, -1),
    (1, 0),
    (1, 1),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Counting,
    Probabilistic,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WeightedStepSet {
    weights: BTreeMap<Step, BigRational>,
    mode: Mode,
}

impl WeightedStepSet {
    pub fn counting(steps: &[Step]) -> Result<Self> {
        let mut weights = BTreeMap::new();
        for &s in steps {
            check_step(s)?;
            if weights.insert(s, BigRational::one()).is_some() {
                return Err(FqwError::InvalidStepSet(format!("duplicate step {s:?}")));
            }
        }
        Self::validated(weights, Mode::Counting)
    }

    pub fn probabilistic(steps: &[(Step, BigRational)]) -> Result<Self> {
        let mut weights = BTreeMap::new();
        for (s, w) in steps {
            check_step(*s)?;
            if weights.insert(*s, w.clone()).is_some() {
                return Err(FqwError::InvalidStepSet(format!("duplicate step {s:?}")));
            }
        }
        Self::validated(weights, Mode::Probabilistic)
    }

    /// Probabilistic set from nonnegative rates, normalized to sum 1.
    /// Zero rates are dropped.
    pub fn from_rates(rates: &[(Step, BigRational)]) -> Result<Self> {
        let total: BigRational = rates.iter().map(|(_, r)| r.clone()).sum();
        if !total.is_positive() {
            return Err(FqwError::InvalidStepSet("rates sum to zero".into()));
        }
        let steps: Vec<(Step, BigRational)> = rates
            .iter()
            .filter(|(_, r)| !r.is_zero())
            .map(|(s, r)| (*s, r / &total))
            .collect();
        Self::probabilistic(&steps)
    }

    fn validated(weights: BTreeMap<Step, BigRational>, mode: Mode) -> Result<Self> {
        if weights.is_empty() {
            return Err(FqwError::InvalidStepSet("empty step set".into()));
        }
        if weights.values().any(|w| w.is_negative()) {
            return Err(FqwError::InvalidStepSet("negative weight".into()));
        }
        if mode == Mode::Probabilistic {
            let s: BigRational = weights.values().cloned().sum();
            if !s.is_one() {
                return Err(FqwError::InvalidStepSet(format!(
                    "probabilistic weights sum to {s}, expected 1"
                )));
            }
        }
        Ok(WeightedStepSet { weights, mode })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn contains(&self, s: Step) -> bool {
        self.weights.contains_key(&s)
    }

    pub fn weight(&self, s: Step) -> BigRational {
        self.weights.get(&s).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Steps in the fixed ordering.
    pub fn steps(&self) -> Vec<Step> {
        self.weights.keys().copied().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Step, &BigRational)> {
        self.weights.iter()
    }

    /// Diagonal reflection (i, j) -> (j, i).
    pub fn reflect(&self) -> Self {
        WeightedStepSet {
            weights: self.weights.iter().map(|(&(i, j), w)| ((j, i), w.clone())).collect(),
            mode: self.mode,
        }
    }

    /// Mean step (drift) in exact arithmetic, weights as given.
    pub fn drift(&self) -> (BigRational, BigRational) {
        let mut dx = BigRational::zero();
        let mut dy = BigRational::zero();
        for (&(i, j), w) in &self.weights {
            dx += w * rat(i as i64, 1);
            dy += w * rat(j as i64, 1);
        }
        (dx, dy)
    }

    /// Bit k set iff step ALL_STEPS[k] is present.
    pub fn mask(&self) -> u8 {
        ALL_STEPS
            .iter()
            .enumerate()
            .filter(|(_, s)| self.contains(**s))
            .fold(0, |m, (k, _)| m | (1 << k))
    }

    /// Compact textual form accepted by [`parse_stepset`].
    pub fn to_spec(&self) -> String {
        self.weights
            .iter()
            .map(|(&s, w)| match self.mode {
                Mode::Counting => step_name(s).to_string(),
                Mode::Probabilistic => format!("({},{}):{}", s.0, s.1, w),
            })
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl fmt::Display for WeightedStepSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_spec())
    }
}

fn check_step(s: Step) -> Result<()> {
    if !(-1..=1).contains(&s.0) || !(-1..=1).contains(&s.1) || s == (0, 0) {
        return Err(FqwError::InvalidStepSet(format!(
            "step {s:?} is not a small nonzero step"
        )));
    }
    Ok(())
}

pub fn step_name(s: Step) -> &'static str {
    match s {
        (0, 1) => "N",
        (0, -1) => "S",
        (1, 0) => "E",
        (-1, 0) => "W",
        (1, 1) => "NE",
        (-1, 1) => "NW",
        (1, -1) => "SE",
        (-1, -1) => "SW",
        _ => "?",
    }
}

fn named_step(t: &str) -> Option<Step> {
    Some(match t {
        "N" => (0, 1),
        "S" => (0, -1),
        "E" => (1, 0),
        "W" => (-1, 0),
        "NE" => (1, 1),
        "NW" => (-1, 1),
        "SE" => (1, -1),
        "SW" => (-1, -1),
        _ => return None,
    })
}

/// Parse "a/b", an integer, or a decimal like "0.125" exactly.
pub fn parse_rational(t: &str) -> Result<BigRational> {
    let bad = || FqwError::Parse(format!("malformed weight '{t}'"));
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.parse().map_err(|_| bad())?;
        let d: BigInt = d.parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (neg, body) = match t.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, t),
    };
    let (ip, fp) = body.split_once('.').unwrap_or((body, ""));
    if ip.is_empty() && fp.is_empty()
        || !ip.chars().all(|c| c.is_ascii_digit())
        || !fp.chars().all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let digits = format!("{ip}{fp}");
    let n: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().map_err(|_| bad())? };
    let d = num_traits::pow(BigInt::from(10), fp.len());
    let r = BigRational::new(n, d);
    Ok(if neg { -r } else { r })
}

fn split_tokens(spec: &str) -> Result<Vec<String>> {
    let s: String = spec.chars().filter(|c| !c.is_whitespace()).collect();
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut depth = 0;
    for ch in s.chars() {
        match ch {
            '(' => {
                depth += 1;
                cur.push(ch);
            }
            ')' => {
                if depth == 0 {
                    return Err(FqwError::Parse("unbalanced ')'".into()));
                }
                depth -= 1;
                cur.push(ch);
            }
            ',' if depth == 0 => out.push(std::mem::take(&mut cur)),
            _ => cur.push(ch),
        }
    }
    if depth != 0 {
        return Err(FqwError::Parse("unbalanced '('".into()));
    }
    out.push(cur);
    if out.iter().any(|t| t.is_empty()) {
        return Err(FqwError::Parse("empty token".into()));
    }
    Ok(out)
}

fn parse_step_token(t: &str) -> Result<Step> {
    if let Some(s) = named_step(t) {
        return Ok(s);
    }
    let inner = t
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| FqwError::Parse(format!("malformed token '{t}'")))?;
    let (a, b) = inner
        .split_once(',')
        .ok_or_else(|| FqwError::Parse(format!("malformed token '{t}'")))?;
    let i: i64 = a.parse().map_err(|_| FqwError::Parse(format!("malformed token '{t}'")))?;
    let j: i64 = b.parse().map_err(|_| FqwError::Parse(format!("malformed token '{t}'")))?;
    if !(-1..=1).contains(&i) || !(-1..=1).contains(&j) || (i, j) == (0, 0) {
        return Err(FqwError::InvalidStepSet(format!("step ({i},{j}) outside the small steps")));
    }
    Ok((i as i8, j as i8))
}

/// Parse the step-set grammar: comma-separated `N|S|E|W|NE|NW|SE|SW`,
/// `(i,j)` or `(i,j):w` tokens. Weighted input is probabilistic and must
/// sum to 1; either every token carries a weight or none does.
pub fn parse_stepset(spec: &str) -> Result<WeightedStepSet> {
    let mut plain = Vec::new();
    let mut weighted = Vec::new();
    for tok in split_tokens(spec)? {
        match tok.rsplit_once(':') {
            Some((st, w)) => weighted.push((parse_step_token(st)?, parse_rational(w)?)),
            None => plain.push(parse_step_token(&tok)?),
        }
    }
    match (plain.is_empty(), weighted.is_empty()) {
        (false, true) => WeightedStepSet::counting(&plain),
        (true, false) => WeightedStepSet::probabilistic(&weighted),
        _ => Err(FqwError::Parse("mixed weighted and unweighted tokens".into())),
    }
}

fn order_key(ws: &WeightedStepSet) -> Vec<usize> {
    ws.steps()
        .iter()
        .map(|s| ALL_STEPS.iter().position(|t| t == s).unwrap())
        .collect()
}

/// Lexicographically least of `ws` and its diagonal reflection.
pub fn canonicalize(ws: &WeightedStepSet) -> WeightedStepSet {
    let r = ws.reflect();
    if order_key(&r) < order_key(ws) {
        r
    } else {
        ws.clone()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelClass {
    pub id: usize,
    pub representative: WeightedStepSet,
    pub symmetric_twin: Option<WeightedStepSet>,
}

/// Filter for genuinely two-constraint models.
pub fn is_census_candidate(ws: &WeightedStepSet) -> bool {
    let s = ws.steps();
    let any = |f: &dyn Fn(&Step) -> bool| s.iter().any(f);
    let all = |f: &dyn Fn(&Step) -> bool| s.iter().all(f);
    // (a) a positivity constraint never binds
    if !any(&|&(i, _)| i == -1) || !any(&|&(_, j)| j == -1) {
        return false;
    }
    // (b) confined to a closed half-plane: walks die, live on a line, or
    // one constraint implies the other
    if all(&|&(i, _)| i <= 0) || all(&|&(_, j)| j <= 0) || all(&|&(i, j)| i + j <= 0) {
        return false;
    }
    if all(&|&(i, j)| i <= j) || all(&|&(i, j)| j <= i) {
        return false;
    }
    true
}

/// The census of non-equivalent small-step models, in a deterministic order
/// (by the sorted step-index sequence of the representative).
pub fn enumerate_models() -> Vec<ModelClass> {
    let mut reps: BTreeMap<Vec<usize>, WeightedStepSet> = BTreeMap::new();
    for mask in 1u16..256 {
        let steps: Vec<Step> = (0..8).filter(|k| mask >> k & 1 == 1).map(|k| ALL_STEPS[k]).collect();
        let ws = WeightedStepSet::counting(&steps).expect("valid subset");
        if !is_census_candidate(&ws) {
            continue;
        }
        let c = canonicalize(&ws);
        reps.insert(order_key(&c), c);
    }
    reps.into_values()
        .enumerate()
        .map(|(k, rep)| {
            let twin = rep.reflect();
            ModelClass {
                id: k + 1,
                symmetric_twin: (twin != rep).then_some(twin),
                representative: rep,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_named_and_pairs() {
        let a = parse_stepset("N,E,S,W").unwrap();
        assert_eq!(a.steps(), vec![(-1, 0), (0, -1), (0, 1), (1, 0)]);
        assert_eq!(a.mode(), Mode::Counting);
        let b = parse_stepset(" (1,1), (-1,0) ,(0,-1)").unwrap();
        assert_eq!(b.len(), 3);
        let c = parse_stepset("(1,0):1/2,(-1,0):0.5").unwrap();
        assert_eq!(c.mode(), Mode::Probabilistic);
        assert_eq!(c.weight((1, 0)), rat(1, 2));
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_stepset("N,Q"), Err(FqwError::Parse(_))));
        assert!(matches!(parse_stepset("(2,0)"), Err(FqwError::InvalidStepSet(_))));
        assert!(matches!(parse_stepset("N,N"), Err(FqwError::InvalidStepSet(_))));
        assert!(parse_stepset("(1,0):1/2,(-1,0):1/3").is_err());
        assert!(parse_stepset("(0,0)").is_err());
        assert!(parse_stepset("N,(1,0):1").is_err());
    }

    #[test]
    fn decimal_weights_are_exact() {
        assert_eq!(parse_rational("0.125").unwrap(), rat(1, 8));
        assert_eq!(parse_rational("3").unwrap(), rat(3, 1));
        assert_eq!(parse_rational("-2/4").unwrap(), rat(-1, 2));
        assert!(parse_rational("1.2.3").is_err());
    }

    #[test]
    fn canonical_forms() {
        let t = WeightedStepSet::counting(&[(1, 0), (0, 1), (-1, -1)]).unwrap();
        assert_eq!(canonicalize(&t), t);
        let e = WeightedStepSet::counting(&[(1, 0)]).unwrap();
        let n = WeightedStepSet::counting(&[(0, 1)]).unwrap();
        assert_eq!(canonicalize(&e), canonicalize(&n));
    }

    #[test]
    fn census_size_and_membership() {
        let m = enumerate_models();
        assert_eq!(m.len(), 79);
        let full = WeightedStepSet::counting(&ALL_STEPS).unwrap();
        assert!(m.iter().any(|c| c.representative == full));
        let ne = WeightedStepSet::counting(&[(1, 1)]).unwrap();
        assert!(!is_census_candidate(&ne));
        let self_sym = m.iter().filter(|c| c.symmetric_twin.is_none()).count();
        assert_eq!(2 * m.len() - self_sym, 138);
    }
}
