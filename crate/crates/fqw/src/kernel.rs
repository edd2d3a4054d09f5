//! Kernel of a small-step walk as a quadratic in one variable, its
//! discriminant, branch points, genus, and the two algebraic branches.

use crate::error::{FqwError, Result};
use crate::poly::{rat, Poly};
use crate::roots::roots_with_multiplicity;
use crate::stepset::{Mode, WeightedStepSet};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// a(x) y² + b(x) y + c(x)
    YQuadratic,
    /// ã(y) x² + b̃(y) x + c̃(y)
    XQuadratic,
}

/// Counting kernel xy[Σ x^i y^j − 1/z] or probabilistic kernel
/// xy[1 − Σ p_ij x^i y^j], collected in the quadratic variable.
///
/// In counting mode without a value for z the middle coefficient is kept
/// as `b_core − t·x` with t = 1/z formal.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelForm {
    pub a: Poly,
    pub c: Poly,
    b_core: Poly,
    pub orientation: Orientation,
    pub source: WeightedStepSet,
    pub z_value: Option<BigRational>,
}

/// Σ over steps with second coordinate `j` of w · v^{first + 1}, where
/// (first, second) follow the orientation.
fn row_poly(ws: &WeightedStepSet, j: i8, orient: Orientation) -> Poly {
    let mut c = vec![BigRational::zero(); 3];
    for (&(si, sj), w) in ws.iter() {
        let (free, quad) = match orient {
            Orientation::YQuadratic => (si, sj),
            Orientation::XQuadratic => (sj, si),
        };
        if quad == j {
            c[(free + 1) as usize] += w;
        }
    }
    Poly::new(c)
}

pub fn build_kernel(ws: &WeightedStepSet, z: Option<BigRational>) -> Result<KernelForm> {
    build_kernel_oriented(ws, z, Orientation::YQuadratic)
}

pub fn build_kernel_oriented(
    ws: &WeightedStepSet,
    z: Option<BigRational>,
    orientation: Orientation,
) -> Result<KernelForm> {
    if let Some(zv) = &z {
        if zv.is_zero() {
            return Err(FqwError::Domain("z must be nonzero".into()));
        }
    }
    let up = row_poly(ws, 1, orientation);
    let mid = row_poly(ws, 0, orientation);
    let down = row_poly(ws, -1, orientation);
    let k = match ws.mode() {
        Mode::Counting => KernelForm {
            a: up,
            b_core: mid,
            c: down,
            orientation,
            source: ws.clone(),
            z_value: z,
        },
        Mode::Probabilistic => KernelForm {
            a: -&up,
            b_core: &Poly::x() - &mid,
            c: -&down,
            orientation,
            source: ws.clone(),
            z_value: None,
        },
    };
    if k.a.is_zero() && k.c.is_zero() && k.b_core.is_zero() && k.is_formal() {
        return Err(FqwError::Degenerate("kernel identically zero".into()));
    }
    Ok(k)
}

impl KernelForm {
    /// Counting kernel with no value for z.
    pub fn is_formal(&self) -> bool {
        self.source.mode() == Mode::Counting && self.z_value.is_none()
    }

    /// The z-free part of the middle coefficient.
    pub fn b_core(&self) -> &Poly {
        &self.b_core
    }

    pub fn b(&self) -> Result<Poly> {
        match (self.source.mode(), &self.z_value) {
            (Mode::Probabilistic, _) => Ok(self.b_core.clone()),
            (Mode::Counting, Some(z)) => Ok(&self.b_core - &Poly::monomial(1, z.recip())),
            (Mode::Counting, None) => Err(FqwError::Domain(
                "coefficient b depends on the formal parameter z".into(),
            )),
        }
    }

    pub fn with_z(&self, z: BigRational) -> Result<KernelForm> {
        build_kernel_oriented(&self.source, Some(z), self.orientation)
    }

    /// The same kernel collected in the other variable.
    pub fn swapped(&self) -> KernelForm {
        let o = match self.orientation {
            Orientation::YQuadratic => Orientation::XQuadratic,
            Orientation::XQuadratic => Orientation::YQuadratic,
        };
        build_kernel_oriented(&self.source, self.z_value.clone(), o).expect("already valid")
    }

    /// Q(u, v) with u the coefficient variable and v the quadratic one.
    pub fn eval(&self, u: &BigRational, v: &BigRational) -> Result<BigRational> {
        Ok(self.a.eval(u) * v * v + self.b()?.eval(u) * v + self.c.eval(u))
    }

    /// Exact Vieta sum and product of the two roots at a rational point.
    pub fn vieta_exact(&self, u: &BigRational) -> Result<(BigRational, BigRational)> {
        let a = self.a.eval(u);
        if a.is_zero() {
            return Err(FqwError::Degenerate(format!("a({u}) = 0")));
        }
        Ok((-self.b()?.eval(u) / &a, self.c.eval(u) / &a))
    }
}

pub fn discriminant(k: &KernelForm) -> Result<Poly> {
    let b = k.b()?;
    Ok(&(&b * &b) - &(&k.a * &k.c).scale(&rat(4, 1)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchRoot {
    pub re: f64,
    pub im: f64,
    pub multiplicity: usize,
    pub at_infinity: bool,
}

impl BranchRoot {
    pub fn value(&self) -> Option<Complex64> {
        (!self.at_infinity).then(|| Complex64::new(self.re, self.im))
    }

    pub fn is_real(&self) -> bool {
        !self.at_infinity && self.im == 0.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchPointReport {
    /// Distinct zeros of D: real ones ascending, then complex ones, then
    /// the point at infinity if deg D < 4.
    pub roots: Vec<BranchRoot>,
    pub inside_unit_disc: Vec<BranchRoot>,
    pub discriminant: String,
}

impl BranchPointReport {
    /// The four branch points with repetition, in report order; `None` is
    /// the point at infinity.
    pub fn expanded(&self) -> Vec<Option<Complex64>> {
        self.roots
            .iter()
            .flat_map(|r| std::iter::repeat_n(r.value(), r.multiplicity))
            .collect()
    }

    pub fn all_real(&self) -> bool {
        self.roots.iter().all(|r| r.is_real())
    }
}

fn root_order(a: &BranchRoot, b: &BranchRoot) -> Ordering {
    let rank = |r: &BranchRoot| {
        if r.at_infinity {
            2
        } else if r.im == 0.0 {
            0
        } else {
            1
        }
    };
    rank(a)
        .cmp(&rank(b))
        .then(a.re.partial_cmp(&b.re).unwrap_or(Ordering::Equal))
        .then(a.im.partial_cmp(&b.im).unwrap_or(Ordering::Equal))
}

pub fn branch_points(k: &KernelForm) -> Result<BranchPointReport> {
    branch_points_tol(k, 1e-9)
}

pub fn branch_points_tol(k: &KernelForm, tol: f64) -> Result<BranchPointReport> {
    let d = discriminant(k)?;
    let Some(deg) = d.degree() else {
        return Err(FqwError::Reducible("discriminant vanishes identically".into()));
    };
    let mut roots: Vec<BranchRoot> = roots_with_multiplicity(&d, tol)?
        .into_iter()
        .map(|(z, m)| BranchRoot {
            re: z.re,
            im: z.im,
            multiplicity: m,
            at_infinity: false,
        })
        .collect();
    if deg < 4 {
        roots.push(BranchRoot {
            re: 0.0,
            im: 0.0,
            multiplicity: 4 - deg,
            at_infinity: true,
        });
    }
    roots.sort_by(root_order);
    let inside_unit_disc = roots
        .iter()
        .filter(|r| !r.at_infinity && r.re.hypot(r.im) <= 1.0 + 1e-12)
        .cloned()
        .collect();
    Ok(BranchPointReport {
        roots,
        inside_unit_disc,
        discriminant: d.to_string(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenusReport {
    pub genus: u8,
    pub case: Option<u8>,
}

/// Root multiplicities of a discriminant at the points that matter for the
/// genus-0 case split.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiplicityPattern {
    pub at_zero: usize,
    pub at_one: usize,
    pub at_infinity: usize,
    /// Largest multiplicity of any finite root.
    pub max_finite: usize,
    /// Some finite nonzero root has multiplicity ≥ 2.
    pub multiple_nonzero: bool,
}

impl MultiplicityPattern {
    pub fn of(d: &Poly) -> Self {
        let dec = d.squarefree_decomposition();
        let x = Poly::x();
        let mut at_one = 0;
        let mut multiple_nonzero = false;
        for (f, k) in &dec {
            if f.eval(&BigRational::one()).is_zero() {
                at_one = *k;
            }
            if *k >= 2 && f.monic() != x {
                multiple_nonzero = true;
            }
        }
        MultiplicityPattern {
            at_zero: d.valuation(),
            at_one,
            at_infinity: 4 - d.degree().unwrap_or(4).min(4),
            max_finite: dec.iter().map(|(_, k)| *k).max().unwrap_or(0),
            multiple_nonzero,
        }
    }

    fn is_singular(&self) -> bool {
        self.max_finite >= 2 || self.at_infinity >= 2
    }
}

impl std::fmt::Display for MultiplicityPattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{{zero: {}, one: {}, infinity: {}, max_finite: {}}}",
            self.at_zero, self.at_one, self.at_infinity, self.max_finite
        )
    }
}

/// Exact irreducibility test of a y² + b y + c over C[x, y].
pub fn check_irreducible(k: &KernelForm) -> Result<()> {
    let b = k.b()?;
    let content = k.a.gcd(&b).gcd(&k.c);
    if content.degree().unwrap_or(0) > 0 {
        return Err(FqwError::Reducible(format!("common factor {content}")));
    }
    if k.a.is_zero() {
        if k.c.is_zero() {
            return Err(FqwError::Reducible("kernel is y · b(x)".into()));
        }
        return Ok(());
    }
    let d = discriminant(k)?;
    if d.is_zero() || d.is_square_up_to_constant() {
        return Err(FqwError::Reducible(format!("discriminant {d} is a square")));
    }
    Ok(())
}

pub fn genus(k: &KernelForm) -> Result<GenusReport> {
    check_irreducible(k)?;
    let (ky, kx) = match k.orientation {
        Orientation::YQuadratic => (k.clone(), k.swapped()),
        Orientation::XQuadratic => (k.swapped(), k.clone()),
    };
    let px = MultiplicityPattern::of(&discriminant(&ky)?);
    let py = MultiplicityPattern::of(&discriminant(&kx)?);
    if !px.is_singular() && !py.is_singular() {
        return Ok(GenusReport { genus: 1, case: None });
    }
    let case = if px.at_zero >= 2 && py.at_infinity >= 2 {
        1
    } else if py.at_zero >= 2 && px.at_infinity >= 2 {
        2
    } else if px.at_infinity >= 2 && py.at_infinity >= 2 {
        3
    } else if px.at_zero >= 2 && py.at_zero >= 2 {
        4
    } else if (px.at_one >= 2 && py.at_one >= 2) || (px.multiple_nonzero && py.multiple_nonzero) {
        5
    } else {
        return Err(FqwError::NoGenusCase(format!("x: {px}, y: {py}")));
    };
    Ok(GenusReport {
        genus: 0,
        case: Some(case),
    })
}

fn lex_cmp(a: &Complex64, b: &Complex64) -> Ordering {
    (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap_or(Ordering::Equal)
}

/// The two roots Y0, Y1 of the kernel at `u`, with |Y0| ≤ |Y1|; ties are
/// broken by lexicographic (re, im).
pub fn eval_branches(k: &KernelForm, u: Complex64) -> Result<(Complex64, Complex64)> {
    let a = k.a.eval_c64(u);
    let b = k.b()?.eval_c64(u);
    let c = k.c.eval_c64(u);
    if a == Complex64::zero() {
        let finite = if b == Complex64::zero() { Complex64::new(f64::NAN, f64::NAN) } else { -c / b };
        return Err(FqwError::Degenerate(format!(
            "a({u}) = 0: single finite root {finite}, other branch at infinity"
        )));
    }
    let sq = (b * b - 4.0 * a * c).sqrt();
    let big = if (b.conj() * sq).re >= 0.0 { b + sq } else { b - sq };
    let q = -0.5 * big;
    let (r1, r2) = if q == Complex64::zero() {
        (Complex64::zero(), Complex64::zero())
    } else {
        (q / a, c / q)
    };
    let ord = r1
        .norm()
        .partial_cmp(&r2.norm())
        .unwrap_or(Ordering::Equal)
        .then_with(|| lex_cmp(&r1, &r2));
    Ok(if ord == Ordering::Greater { (r2, r1) } else { (r1, r2) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stepset::parse_stepset;

    fn simple() -> WeightedStepSet {
        parse_stepset("N,E,S,W").unwrap()
    }

    #[test]
    fn simple_walk_coefficients() {
        let k = build_kernel(&simple(), None).unwrap();
        assert_eq!(k.a, Poly::from_ints(&[0, 1]));
        assert_eq!(k.c, Poly::from_ints(&[0, 1]));
        assert_eq!(k.b_core, Poly::from_ints(&[1, 0, 1]));
        assert!(k.b().is_err());
        let k5 = k.with_z(rat(1, 5)).unwrap();
        assert_eq!(k5.b().unwrap(), Poly::from_ints(&[1, -5, 1]));
    }

    #[test]
    fn missing_south_steps_give_zero_c() {
        let k = build_kernel(&parse_stepset("N,E,W").unwrap(), Some(rat(1, 3))).unwrap();
        assert!(k.c.is_zero());
        let d = discriminant(&k).unwrap();
        assert!(d.is_square_up_to_constant());
        assert!(matches!(genus(&k), Err(FqwError::Reducible(_))));
    }

    #[test]
    fn simple_walk_discriminant_and_branch_points() {
        let k = build_kernel(&simple(), Some(rat(1, 5))).unwrap();
        let d = discriminant(&k).unwrap();
        let b = Poly::from_ints(&[1, -5, 1]);
        assert_eq!(d, &(&b * &b) - &Poly::from_ints(&[0, 0, 4]));
        let r = branch_points(&k).unwrap();
        let xs: Vec<f64> = r.roots.iter().map(|r| r.re).collect();
        let expect = [0.1459, 0.3820, 2.6180, 6.8541];
        for (x, e) in xs.iter().zip(expect) {
            assert!((x - e).abs() < 1e-4);
        }
        assert_eq!(r.inside_unit_disc.len(), 2);
        assert_eq!(genus(&k).unwrap(), GenusReport { genus: 1, case: None });
    }

    #[test]
    fn simple_walk_merge_at_quarter() {
        let k = build_kernel(&simple(), Some(rat(1, 4))).unwrap();
        let r = branch_points(&k).unwrap();
        let double: Vec<_> = r.roots.iter().filter(|r| r.multiplicity == 2).collect();
        assert_eq!(double.len(), 1);
        assert_eq!(double[0].re, 1.0);
        assert_eq!(genus(&k).unwrap(), GenusReport { genus: 0, case: Some(5) });
    }

    #[test]
    fn zero_drift_kreweras_is_case_5() {
        let ws = parse_stepset("(1,1):1/3,(-1,0):1/3,(0,-1):1/3").unwrap();
        let k = build_kernel(&ws, None).unwrap();
        let d = discriminant(&k).unwrap();
        assert!(d.eval(&BigRational::one()).is_zero());
        assert_eq!(genus(&k).unwrap(), GenusReport { genus: 0, case: Some(5) });
    }

    #[test]
    fn uniform_all_eight_expansion() {
        let ws = parse_stepset(
            "(-1,-1):1/8,(-1,0):1/8,(-1,1):1/8,(0,-1):1/8,(0,1):1/8,(1,-1):1/8,(1,0):1/8,(1,1):1/8",
        )
        .unwrap();
        let k = build_kernel(&ws, None).unwrap();
        for (x, y) in [(rat(2, 3), rat(-5, 7)), (rat(3, 1), rat(1, 9))] {
            let mut s = BigRational::zero();
            for (&(i, j), w) in ws.iter() {
                s += w * num_traits::pow(x.clone(), (i + 1) as usize) * num_traits::pow(y.clone(), (j + 1) as usize);
            }
            let brute = &x * &y - s;
            assert_eq!(k.eval(&x, &y).unwrap(), brute);
        }
    }

    #[test]
    fn branches_satisfy_vieta_and_order() {
        let k = build_kernel(&simple(), Some(rat(1, 5))).unwrap();
        for t in 0..16 {
            let x = Complex64::from_polar(1.0, t as f64 * 0.39);
            let (y0, y1) = eval_branches(&k, x).unwrap();
            let a = k.a.eval_c64(x);
            let b = k.b().unwrap().eval_c64(x);
            let c = k.c.eval_c64(x);
            assert!((y0 + y1 + b / a).norm() < 1e-12 * (b / a).norm().max(1.0));
            assert!((y0 * y1 - c / a).norm() < 1e-12 * (c / a).norm().max(1.0));
            assert!(y0.norm() <= y1.norm());
            assert!(y0.norm() <= 1.0);
        }
    }

    #[test]
    fn orientation_swap_preserves_genus() {
        let ws = parse_stepset("N,SE,W,S").unwrap();
        for z in [rat(1, 7), rat(1, 3)] {
            let k = build_kernel(&ws, Some(z)).unwrap();
            assert_eq!(genus(&k).unwrap(), genus(&k.swapped()).unwrap());
        }
    }
}
