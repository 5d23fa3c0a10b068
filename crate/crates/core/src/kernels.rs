//! Positive-definite kernels, Gram matrices and box domains.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::SymMatrix;

/// Half-integer Matérn smoothness values with closed-form kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MaternNu {
    Half,
    ThreeHalves,
    FiveHalves,
    SevenHalves,
}

impl MaternNu {
    pub fn from_f64(nu: f64) -> Result<Self> {
        const TOL: f64 = 1e-12;
        match nu {
            v if (v - 0.5).abs() < TOL => Ok(MaternNu::Half),
            v if (v - 1.5).abs() < TOL => Ok(MaternNu::ThreeHalves),
            v if (v - 2.5).abs() < TOL => Ok(MaternNu::FiveHalves),
            v if (v - 3.5).abs() < TOL => Ok(MaternNu::SevenHalves),
            _ => Err(Error::UnsupportedParameter(format!(
                "Matern nu = {nu} (supported: 0.5, 1.5, 2.5, 3.5)"
            ))),
        }
    }

    pub fn value(self) -> f64 {
        match self {
            MaternNu::Half => 0.5,
            MaternNu::ThreeHalves => 1.5,
            MaternNu::FiveHalves => 2.5,
            MaternNu::SevenHalves => 3.5,
        }
    }

    /// Polynomial factor p(s) in `p(s)·exp(-s)`, with `s = sqrt(2 nu) r / rho`.
    fn poly(self, s: f64) -> f64 {
        match self {
            MaternNu::Half => 1.0,
            MaternNu::ThreeHalves => 1.0 + s,
            MaternNu::FiveHalves => 1.0 + s + s * s / 3.0,
            MaternNu::SevenHalves => 1.0 + s + 0.4 * s * s + s * s * s / 15.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum KernelSpec {
    /// `exp(-|x-y|^2 / lengthscale^2)`.
    Se { lengthscale: f64 },
    /// `variance · p(s) · exp(-s)`, `s = sqrt(2 nu) |x-y| / rho`.
    Matern {
        nu: MaternNu,
        rho: f64,
        variance: f64,
    },
    /// `(x^T y)^2`.
    Quadratic,
}

impl KernelSpec {
    pub fn se(lengthscale: f64) -> Result<Self> {
        positive("lengthscale", lengthscale)?;
        Ok(KernelSpec::Se { lengthscale })
    }

    pub fn matern(nu: f64, rho: f64, variance: f64) -> Result<Self> {
        let nu = MaternNu::from_f64(nu)?;
        positive("rho", rho)?;
        positive("variance", variance)?;
        Ok(KernelSpec::Matern { nu, rho, variance })
    }

    pub fn quadratic() -> Self {
        KernelSpec::Quadratic
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelSpec::Se { .. } => "se",
            KernelSpec::Matern { .. } => "matern",
            KernelSpec::Quadratic => "quadratic",
        }
    }

    pub fn is_stationary(&self) -> bool {
        !matches!(self, KernelSpec::Quadratic)
    }

    /// Smoothness parameter, if the kernel has one.
    pub fn nu(&self) -> Option<f64> {
        match self {
            KernelSpec::Matern { nu, .. } => Some(nu.value()),
            _ => None,
        }
    }

    /// Evaluate `k(x, y)`.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_dim(x.len(), y.len())?;
        Ok(self.eval_unchecked(x, y))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            KernelSpec::Se { lengthscale } => {
                let r2 = sq_dist(x, y);
                (-r2 / (lengthscale * lengthscale)).exp()
            }
            KernelSpec::Matern { nu, rho, variance } => {
                let r = sq_dist(x, y).sqrt();
                let s = (2.0 * nu.value()).sqrt() * r / rho;
                variance * nu.poly(s) * (-s).exp()
            }
            KernelSpec::Quadratic => {
                let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
                dot * dot
            }
        }
    }

    /// Stationary kernels as a function of distance; `None` for Quadratic.
    pub fn radial(&self, r: f64) -> Option<f64> {
        match *self {
            KernelSpec::Se { lengthscale } => Some((-(r * r) / (lengthscale * lengthscale)).exp()),
            KernelSpec::Matern { nu, rho, variance } => {
                let s = (2.0 * nu.value()).sqrt() * r.abs() / rho;
                Some(variance * nu.poly(s) * (-s).exp())
            }
            KernelSpec::Quadratic => None,
        }
    }

    /// `k(x, x)`.
    pub fn diag(&self, x: &[f64]) -> f64 {
        match *self {
            KernelSpec::Se { .. } => 1.0,
            KernelSpec::Matern { variance, .. } => variance,
            KernelSpec::Quadratic => {
                let n2: f64 = x.iter().map(|a| a * a).sum();
                n2 * n2
            }
        }
    }

    /// `sup k(x, y)` over the box. Exact for every supported variant: for
    /// Quadratic, Cauchy-Schwarz puts the supremum at the corner of largest norm.
    pub fn sup_on(&self, domain: &BoxDomain) -> f64 {
        match *self {
            KernelSpec::Se { .. } => 1.0,
            KernelSpec::Matern { variance, .. } => variance,
            KernelSpec::Quadratic => {
                let far: f64 = domain
                    .lower
                    .iter()
                    .zip(&domain.upper)
                    .map(|(l, u)| l.abs().max(u.abs()).powi(2))
                    .sum();
                far * far
            }
        }
    }

    /// Whether `k(x, y) <= 1` holds on the whole box.
    pub fn bounded_by_one_on(&self, domain: &BoxDomain) -> bool {
        self.sup_on(domain) <= 1.0 + 1e-12
    }

    /// Gram matrix `K[i][j] = k(x_i, x_j)`, each unordered pair computed once.
    pub fn gram(&self, points: &[Vec<f64>]) -> Result<SymMatrix> {
        let n = points.len();
        if let Some(first) = points.first() {
            for p in points {
                check_dim(first.len(), p.len())?;
            }
        }
        let mut k = SymMatrix::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                k.set_sym(i, j, self.eval_unchecked(&points[i], &points[j]));
            }
        }
        Ok(k)
    }

    /// Cross-covariance vector `[k(x_1, x), ..., k(x_t, x)]`.
    pub fn cross(&self, points: &[Vec<f64>], x: &[f64]) -> Result<Vec<f64>> {
        points.iter().map(|p| self.eval(p, x)).collect()
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be positive, got {v}"
        )))
    }
}

pub(crate) fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Axis-aligned box `[lower, upper]` in `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::InvalidParameter(
                "domain dimension must be >= 1".into(),
            ));
        }
        check_dim(lower.len(), upper.len())?;
        for (i, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !(l.is_finite() && u.is_finite() && l < u) {
                return Err(Error::InvalidParameter(format!(
                    "domain coordinate {i}: lower {l} must be < upper {u}"
                )));
            }
        }
        Ok(BoxDomain { lower, upper })
    }

    /// `[lo, hi]^d`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn unit(dim: usize) -> Result<Self> {
        Self::cube(dim, 0.0, 1.0)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| 0.5 * (l + u))
            .collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, u))| v.is_finite() && *v >= *l && *v <= *u)
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for (v, (l, u)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *v = v.clamp(*l, *u);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn se_examples() {
        let k = KernelSpec::se(1.0).unwrap();
        assert_eq!(k.eval(&[0.0], &[0.0]).unwrap(), 1.0);
        assert_relative_eq!(
            k.eval(&[0.0], &[1.0]).unwrap(),
            (-1.0f64).exp(),
            epsilon = 1e-15
        );
        assert_relative_eq!(k.eval(&[0.0], &[1.0]).unwrap(), 0.3678794, epsilon = 1e-7);
    }

    #[test]
    fn matern_52_at_unit_distance() {
        let k = KernelSpec::matern(2.5, 1.0, 1.0).unwrap();
        let s5 = 5f64.sqrt();
        let expected = (1.0 + s5 + 5.0 / 3.0) * (-s5).exp();
        assert_relative_eq!(k.eval(&[0.0], &[1.0]).unwrap(), expected, epsilon = 1e-15);
    }

    #[test]
    fn quadratic_example() {
        let k = KernelSpec::quadratic();
        assert_eq!(k.eval(&[1.0, 1.0], &[1.0, 0.0]).unwrap(), 1.0);
    }

    #[test]
    fn errors() {
        let k = KernelSpec::se(1.0).unwrap();
        assert!(matches!(
            k.eval(&[0.0], &[0.0, 1.0]),
            Err(Error::Dimension { .. })
        ));
        assert!(matches!(
            KernelSpec::matern(1.0, 1.0, 1.0),
            Err(Error::UnsupportedParameter(_))
        ));
        assert!(KernelSpec::se(0.0).is_err());
        assert!(KernelSpec::matern(2.5, -1.0, 1.0).is_err());
        assert!(BoxDomain::new(vec![1.0], vec![0.0]).is_err());
        assert!(BoxDomain::new(vec![], vec![]).is_err());
    }

    #[test]
    fn gram_and_cross_examples() {
        let k = KernelSpec::se(1.0).unwrap();
        let g = k.gram(&[vec![0.0]]).unwrap();
        assert_eq!(g.get(0, 0), 1.0);
        let pts = vec![vec![0.0], vec![1.0]];
        let g = k.gram(&pts).unwrap();
        let e1 = (-1.0f64).exp();
        assert_eq!(g.get(0, 1), e1);
        assert_eq!(g.get(1, 0), e1);
        assert_eq!(g.get(1, 1), 1.0);
        assert_eq!(k.cross(&[vec![0.0]], &[0.0]).unwrap(), vec![1.0]);
        assert_eq!(k.cross(&pts, &[0.0]).unwrap(), vec![1.0, e1]);
        assert!(k.cross(&pts, &[0.0, 0.0]).is_err());
        assert!(k.gram(&[vec![0.0], vec![0.0, 1.0]]).is_err());
    }

    #[test]
    fn cross_matches_augmented_gram_column() {
        let k = KernelSpec::matern(1.5, 0.7, 0.9).unwrap();
        let pts = vec![vec![0.1, 0.2], vec![0.5, 0.9], vec![0.3, 0.3]];
        let x = vec![0.8, 0.1];
        let c = k.cross(&pts, &x).unwrap();
        let mut aug = pts.clone();
        aug.push(x);
        let g = k.gram(&aug).unwrap();
        for (i, ci) in c.iter().enumerate() {
            assert_eq!(*ci, g.get(i, 3));
        }
    }

    #[test]
    fn quadratic_conformance_flag() {
        let small = BoxDomain::cube(2, -0.5, 0.5).unwrap();
        let large = BoxDomain::cube(2, -1.0, 1.0).unwrap();
        let q = KernelSpec::quadratic();
        assert!(q.bounded_by_one_on(&small));
        assert!(!q.bounded_by_one_on(&large));
        assert_eq!(q.sup_on(&large), 4.0);
        assert!(KernelSpec::se(0.3).unwrap().bounded_by_one_on(&large));
    }

    fn any_kernel() -> impl Strategy<Value = KernelSpec> {
        prop_oneof![
            (0.1f64..3.0).prop_map(|l| KernelSpec::se(l).unwrap()),
            (0usize..4, 0.1f64..3.0, 0.1f64..1.0).prop_map(|(i, rho, var)| {
                KernelSpec::matern([0.5, 1.5, 2.5, 3.5][i], rho, var).unwrap()
            }),
        ]
    }

    proptest! {
        #[test]
        fn symmetric(k in any_kernel(), x in prop::collection::vec(-2.0f64..2.0, 3),
                     y in prop::collection::vec(-2.0f64..2.0, 3)) {
            prop_assert_eq!(k.eval(&x, &y).unwrap(), k.eval(&y, &x).unwrap());
            let q = KernelSpec::quadratic();
            prop_assert_eq!(q.eval(&x, &y).unwrap(), q.eval(&y, &x).unwrap());
        }

        #[test]
        fn stationary_and_bounded(k in any_kernel(), x in prop::collection::vec(0.0f64..1.0, 2),
                                  y in prop::collection::vec(0.0f64..1.0, 2),
                                  shift in prop::collection::vec(-5.0f64..5.0, 2)) {
            let xs: Vec<f64> = x.iter().zip(&shift).map(|(a, b)| a + b).collect();
            let ys: Vec<f64> = y.iter().zip(&shift).map(|(a, b)| a + b).collect();
            let v = k.eval(&x, &y).unwrap();
            prop_assert!((v - k.eval(&xs, &ys).unwrap()).abs() <= 1e-12);
            prop_assert!(v > 0.0 && v <= 1.0);
            prop_assert_eq!(k.eval(&x, &x).unwrap(), k.diag(&x));
        }

        #[test]
        fn matern_half_is_exponential(r in 0.0f64..10.0, rho in 0.1f64..3.0, var in 0.1f64..2.0) {
            let k = KernelSpec::matern(0.5, rho, var).unwrap();
            let v = k.eval(&[0.0], &[r]).unwrap();
            prop_assert!((v - var * (-r / rho).exp()).abs() <= 1e-14);
        }
    }
}
