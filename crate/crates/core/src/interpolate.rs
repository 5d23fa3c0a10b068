//! Noiseless GP interpolation in the RKHS.
//!
//! A [`Posterior`] is the minimum-norm interpolant of a [`Design`] together
//! with its power function `sigma_t`. Given an RKHS-norm budget `R`, the
//! pair yields certified envelopes `m_t(x) ± sigma_t(x)·sqrt(R² - |m_t|²)`
//! that contain every ball function consistent with the data.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::kernels::{sq_dist, BoxDomain, KernelSpec};
use crate::linalg::{dot, Cholesky};

/// Relative slack on `R²` before a norm certificate counts as over budget.
pub const NORM_BUDGET_SLACK: f64 = 1e-6;
/// Negative round-off tolerated in variances and norm certificates.
pub const ROUNDOFF_FLOOR: f64 = 1e-10;
/// Minimum separation between interpolation knots.
pub const KNOT_SEPARATION: f64 = 1e-9;
/// Default cap on lattice sizes.
pub const DEFAULT_GRID_CAP: usize = 1_000_000;
/// Attempts before rejection sampling gives up.
pub const REJECTION_CAP: usize = 1000;

/// Sample points with their observed values.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Design {
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
}

impl Design {
    pub fn new(points: Vec<Vec<f64>>, values: Vec<f64>) -> Result<Self> {
        if points.len() != values.len() {
            return Err(Error::InvalidParameter(format!(
                "design has {} points but {} values",
                points.len(),
                values.len()
            )));
        }
        if let Some(first) = points.first() {
            for p in &points {
                check_dim(first.len(), p.len())?;
            }
        }
        Ok(Design { points, values })
    }

    /// Design restricted to a box; rejects points outside it.
    pub fn new_in(domain: &BoxDomain, points: Vec<Vec<f64>>, values: Vec<f64>) -> Result<Self> {
        for p in &points {
            check_dim(domain.dim(), p.len())?;
            if !domain.contains(p) {
                return Err(Error::InvalidParameter(format!(
                    "design point {p:?} outside domain"
                )));
            }
        }
        Self::new(points, values)
    }

    /// All observations zero.
    pub fn zeros(points: Vec<Vec<f64>>) -> Result<Self> {
        let n = points.len();
        Self::new(points, vec![0.0; n])
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn push(&mut self, x: Vec<f64>, y: f64) -> Result<()> {
        if let Some(first) = self.points.first() {
            check_dim(first.len(), x.len())?;
        }
        self.points.push(x);
        self.values.push(y);
        Ok(())
    }
}

/// Fitted noiseless interpolant.
#[derive(Debug, Clone)]
pub struct Posterior {
    kernel: KernelSpec,
    design: Design,
    chol: Cholesky,
    alpha: Vec<f64>,
    // L^{-1} y. Mean and norm go through this rather than alpha, whose
    // entries blow up on near-singular Gram matrices.
    whitened: Vec<f64>,
    norm_sq: f64,
}

impl Posterior {
    /// Fit and check the norm certificate `f_X^T K^{-1} f_X <= R²`.
    pub fn fit(kernel: KernelSpec, design: Design, r: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "R must be positive, got {r}"
            )));
        }
        let post = Self::fit_unbounded(kernel, design)?;
        post.check_budget(r)?;
        Ok(post)
    }

    /// Fit without a norm budget.
    pub fn fit_unbounded(kernel: KernelSpec, design: Design) -> Result<Self> {
        let gram = kernel.gram(design.points())?;
        let chol = Cholesky::factor_with_ladder(&gram)?;
        let whitened = chol.forward(design.values());
        let alpha = chol.backward(&whitened);
        let norm_sq = dot(&whitened, &whitened);
        Ok(Posterior {
            kernel,
            design,
            chol,
            alpha,
            whitened,
            norm_sq,
        })
    }

    fn check_budget(&self, r: f64) -> Result<()> {
        let budget = r * r;
        if self.norm_sq > budget * (1.0 + NORM_BUDGET_SLACK) {
            return Err(Error::NormBudgetExceeded {
                norm_sq: self.norm_sq,
                budget,
            });
        }
        Ok(())
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn design(&self) -> &Design {
        &self.design
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// Squared RKHS norm of the minimum-norm interpolant.
    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    pub fn jitter_used(&self) -> f64 {
        self.chol.jitter()
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        match self.design.points().first() {
            Some(p) => check_dim(p.len(), x.len()),
            None => Ok(()),
        }
    }

    /// Posterior mean `m_t(x)`; zero for an empty design.
    pub fn mean(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        let v = self.chol.forward(&self.cross(x));
        Ok(dot(&v, &self.whitened))
    }

    /// Power function `sigma_t(x)`; `sqrt(k(x,x))` for an empty design.
    pub fn std(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        let v = self.chol.forward(&self.cross(x));
        self.std_from_whitened(x, &v)
    }

    /// `(m_t(x), sigma_t(x))` sharing one cross-covariance evaluation.
    pub fn mean_std(&self, x: &[f64]) -> Result<(f64, f64)> {
        self.check_point(x)?;
        let v = self.chol.forward(&self.cross(x));
        Ok((dot(&v, &self.whitened), self.std_from_whitened(x, &v)?))
    }

    fn cross(&self, x: &[f64]) -> Vec<f64> {
        self.design
            .points()
            .iter()
            .map(|p| self.kernel.eval_unchecked(p, x))
            .collect()
    }

    fn std_from_whitened(&self, x: &[f64], v: &[f64]) -> Result<f64> {
        let var = self.kernel.diag(x) - dot(v, v);
        if var < 0.0 {
            if var < -ROUNDOFF_FLOOR {
                return Err(Error::IllConditioned(format!(
                    "posterior variance {var:.3e} at {x:?}"
                )));
            }
            return Ok(0.0);
        }
        Ok(var.sqrt())
    }

    /// Radius `sqrt(R² - |m_t|²)` of the consistent part of the ball.
    pub fn residual_radius(&self, r: f64) -> Result<f64> {
        self.check_budget(r)?;
        Ok((r * r - self.norm_sq).max(0.0).sqrt())
    }

    /// Certified envelope `(lower, upper)` at `x`.
    pub fn envelope(&self, r: f64, x: &[f64]) -> Result<(f64, f64)> {
        let radius = self.residual_radius(r)?;
        let (m, s) = self.mean_std(x)?;
        Ok((m - s * radius, m + s * radius))
    }

    /// `K^{-1} K_{X x}`, the weights that reproduce `x` from the design.
    pub fn representer_weights(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        Ok(self.chol.solve(&self.cross(x)))
    }

    /// The posterior mean as an explicit RKHS function.
    pub fn mean_function(&self) -> RkhsFunction {
        RkhsFunction {
            kernel: self.kernel,
            centers: self.design.points().to_vec(),
            weights: self.alpha.clone(),
            norm: self.norm_sq.sqrt(),
        }
    }
}

/// Finite kernel expansion `f(x) = sum_i w_i k(c_i, x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RkhsFunction {
    kernel: KernelSpec,
    centers: Vec<Vec<f64>>,
    weights: Vec<f64>,
    norm: f64,
}

impl RkhsFunction {
    /// The norm is always recomputed from the Gram matrix of the centers.
    pub fn new(kernel: KernelSpec, centers: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if centers.len() != weights.len() {
            return Err(Error::InvalidParameter(format!(
                "{} centers but {} weights",
                centers.len(),
                weights.len()
            )));
        }
        let gram = kernel.gram(&centers)?;
        let norm = gram.quad_form(&weights).max(0.0).sqrt();
        Ok(RkhsFunction {
            kernel,
            centers,
            weights,
            norm,
        })
    }

    pub fn zero(kernel: KernelSpec) -> Self {
        RkhsFunction {
            kernel,
            centers: Vec::new(),
            weights: Vec::new(),
            norm: 0.0,
        }
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if let Some(c) = self.centers.first() {
            check_dim(c.len(), x.len())?;
        }
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        self.centers
            .iter()
            .zip(&self.weights)
            .map(|(c, w)| w * self.kernel.eval_unchecked(c, x))
            .sum()
    }

    /// `a·self + b·other` over the union of centers (same kernel required).
    pub fn combine(&self, a: f64, other: &RkhsFunction, b: f64) -> Result<RkhsFunction> {
        if self.kernel != other.kernel {
            return Err(Error::InvalidParameter(
                "cannot combine functions of different kernels".into(),
            ));
        }
        let mut centers = self.centers.clone();
        centers.extend(other.centers.iter().cloned());
        let mut weights: Vec<f64> = self.weights.iter().map(|w| a * w).collect();
        weights.extend(other.weights.iter().map(|w| b * w));
        RkhsFunction::new(self.kernel, centers, weights)
    }

    pub fn scaled(&self, s: f64) -> RkhsFunction {
        RkhsFunction {
            kernel: self.kernel,
            centers: self.centers.clone(),
            weights: self.weights.iter().map(|w| s * w).collect(),
            norm: self.norm * s.abs(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parse and recompute the norm from the stored expansion.
    pub fn from_json(s: &str) -> Result<Self> {
        let raw: RkhsFunction = serde_json::from_str(s)?;
        RkhsFunction::new(raw.kernel, raw.centers, raw.weights)
    }
}

/// Minimum-norm interpolant of `(knots, values)`.
pub fn min_norm_interpolant(
    kernel: KernelSpec,
    knots: Vec<Vec<f64>>,
    values: &[f64],
) -> Result<RkhsFunction> {
    for i in 0..knots.len() {
        for j in 0..i {
            if sq_dist(&knots[i], &knots[j]).sqrt() < KNOT_SEPARATION {
                return Err(Error::IllConditioned(format!(
                    "knots {j} and {i} are closer than {KNOT_SEPARATION:e}"
                )));
            }
        }
    }
    let design = Design::new(knots, values.to_vec())?;
    let post = Posterior::fit_unbounded(kernel, design)?;
    Ok(post.mean_function())
}

/// How `sample_rkhs` enforces the norm budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleMode {
    /// Redraw until the norm is within `R`.
    Reject,
    /// Scale the draw to norm `u·R`, `u ~ U(0, 1]`.
    Rescale,
}

impl SampleMode {
    pub fn name(self) -> &'static str {
        match self {
            SampleMode::Reject => "reject",
            SampleMode::Rescale => "rescale",
        }
    }
}

impl std::str::FromStr for SampleMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reject" => Ok(SampleMode::Reject),
            "rescale" => Ok(SampleMode::Rescale),
            other => Err(Error::Config(format!("unknown sampling mode '{other}'"))),
        }
    }
}

/// A random ball function and how many draws it took.
#[derive(Debug, Clone)]
pub struct BallSample {
    pub function: RkhsFunction,
    pub attempts: usize,
    pub mode: SampleMode,
}

/// Draw a random function from the RKHS ball of radius `r`: uniform knots,
/// GP-marginal values on them, minimum-norm interpolation.
pub fn sample_rkhs(
    kernel: KernelSpec,
    domain: &BoxDomain,
    n_knots: usize,
    r: f64,
    seed: u64,
    mode: SampleMode,
) -> Result<BallSample> {
    if n_knots == 0 {
        return Err(Error::InvalidParameter("n_knots must be >= 1".into()));
    }
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "R must be positive, got {r}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_attempts = match mode {
        SampleMode::Reject => REJECTION_CAP,
        SampleMode::Rescale => 1,
    };
    for attempt in 1..=max_attempts {
        let knots: Vec<Vec<f64>> = (0..n_knots)
            .map(|_| {
                domain
                    .lower()
                    .iter()
                    .zip(domain.upper())
                    .map(|(l, u)| l + (u - l) * rng.random::<f64>())
                    .collect()
            })
            .collect();
        let gram = kernel.gram(&knots)?;
        let chol = Cholesky::factor_with_ladder(&gram)?;
        let z: Vec<f64> = (0..n_knots).map(|_| rng.sample(StandardNormal)).collect();
        let values = lower_times(&chol, &z);
        let f = min_norm_interpolant(kernel, knots, &values)?;
        match mode {
            SampleMode::Reject => {
                if f.norm() <= r {
                    return Ok(BallSample {
                        function: f,
                        attempts: attempt,
                        mode,
                    });
                }
            }
            SampleMode::Rescale => {
                let u = 1.0 - rng.random::<f64>();
                let f = if f.norm() > 0.0 {
                    let rescaled: Vec<f64> =
                        f.weights().iter().map(|w| w * u * r / f.norm()).collect();
                    RkhsFunction::new(kernel, f.centers().to_vec(), rescaled)?
                } else {
                    f
                };
                return Ok(BallSample {
                    function: f,
                    attempts: attempt,
                    mode,
                });
            }
        }
    }
    Err(Error::RejectionBudgetExhausted {
        attempts: REJECTION_CAP,
    })
}

/// `L z`: a draw from `N(0, L L^T)` when `z` is standard normal.
fn lower_times(chol: &Cholesky, z: &[f64]) -> Vec<f64> {
    (0..z.len())
        .map(|i| dot(chol.lower_row(i), &z[..=i]))
        .collect()
}

/// The lattice `lower + (k/N)·(upper - lower)`, `k in {0..N-1}^d`, in
/// lexicographic order with the first coordinate most significant.
pub fn grid(domain: &BoxDomain, points_per_dim: usize, cap: usize) -> Result<Vec<Vec<f64>>> {
    let count = lattice_size(domain.dim(), points_per_dim, cap)?;
    Ok((0..count)
        .map(|i| lattice_point(domain, points_per_dim, i))
        .collect())
}

pub(crate) fn lattice_size(dim: usize, points_per_dim: usize, cap: usize) -> Result<usize> {
    if points_per_dim == 0 {
        return Err(Error::InvalidParameter(
            "points per dimension must be >= 1".into(),
        ));
    }
    let requested = (points_per_dim as u128)
        .checked_pow(dim as u32)
        .unwrap_or(u128::MAX);
    if requested > cap as u128 {
        return Err(Error::SizeOverflow { requested, cap });
    }
    Ok(requested as usize)
}

/// The `index`-th lattice point (0-based) in lexicographic order.
pub fn lattice_point(domain: &BoxDomain, points_per_dim: usize, index: usize) -> Vec<f64> {
    let d = domain.dim();
    let mut digits = vec![0usize; d];
    let mut rest = index;
    for k in (0..d).rev() {
        digits[k] = rest % points_per_dim;
        rest /= points_per_dim;
    }
    digits
        .iter()
        .zip(domain.lower().iter().zip(domain.upper()))
        .map(|(&k, (l, u))| l + (k as f64 / points_per_dim as f64) * (u - l))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn se1() -> KernelSpec {
        KernelSpec::se(1.0).unwrap()
    }

    #[test]
    fn fit_zero_data() {
        for k in [se1(), KernelSpec::matern(2.5, 1.0, 1.0).unwrap()] {
            let d = Design::new(vec![vec![0.0]], vec![0.0]).unwrap();
            let p = Posterior::fit(k, d, 1.0).unwrap();
            assert_eq!(p.alpha(), &[0.0]);
            assert_eq!(p.norm_sq(), 0.0);
            assert_eq!(p.mean(&[3.0]).unwrap(), 0.0);
        }
    }

    #[test]
    fn fit_single_point() {
        let d = Design::new(vec![vec![0.0]], vec![1.0]).unwrap();
        let p = Posterior::fit(se1(), d, 2.0).unwrap();
        assert_relative_eq!(p.alpha()[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(p.norm_sq(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(p.mean(&[1.0]).unwrap(), (-1.0f64).exp(), epsilon = 1e-15);
        let e2 = (-2.0f64).exp();
        assert_relative_eq!(p.std(&[1.0]).unwrap(), (1.0 - e2).sqrt(), epsilon = 1e-14);
        assert_relative_eq!(p.std(&[1.0]).unwrap(), 0.9298, epsilon = 1e-4);
    }

    #[test]
    fn fit_two_points_against_2x2_solve() {
        // K = [[1, a], [a, 1]] with a = e^-1; K^{-1} [1, 0] = [1, -a] / (1 - a²).
        let a = (-1.0f64).exp();
        let det = 1.0 - a * a;
        let d = Design::new(vec![vec![0.0], vec![1.0]], vec![1.0, 0.0]).unwrap();
        let p = Posterior::fit(se1(), d, 2.0).unwrap();
        assert_relative_eq!(p.alpha()[0], 1.0 / det, epsilon = 1e-13);
        assert_relative_eq!(p.alpha()[1], -a / det, epsilon = 1e-13);
        assert_relative_eq!(p.norm_sq(), 1.0 / det, epsilon = 1e-13);
        assert_relative_eq!(p.norm_sq(), 1.1565, epsilon = 1e-4);
    }

    #[test]
    fn norm_budget_exceeded() {
        let d = Design::new(vec![vec![0.0]], vec![2.0]).unwrap();
        let err = Posterior::fit(se1(), d, 1.0).unwrap_err();
        assert!(matches!(err, Error::NormBudgetExceeded { .. }));
    }

    #[test]
    fn empty_design_convention() {
        let k = KernelSpec::matern(2.5, 1.0, 0.64).unwrap();
        let p = Posterior::fit(k, Design::empty(), 1.0).unwrap();
        assert_eq!(p.mean(&[0.3]).unwrap(), 0.0);
        assert_relative_eq!(p.std(&[0.3]).unwrap(), 0.8, epsilon = 1e-15);
        assert_eq!(p.norm_sq(), 0.0);
    }

    #[test]
    fn envelope_examples() {
        let d = Design::new(vec![vec![0.0], vec![0.7]], vec![0.3, -0.2]).unwrap();
        let p = Posterior::fit(se1(), d, 1.0).unwrap();
        let (lo, hi) = p.envelope(1.0, &[0.7]).unwrap();
        assert!((lo + 0.2).abs() < 1e-6 && (hi + 0.2).abs() < 1e-6);
        // Collapse the radius by choosing R = |m_t|.
        let r = p.norm_sq().sqrt();
        let (lo, hi) = p.envelope(r, &[2.0]).unwrap();
        let m = p.mean(&[2.0]).unwrap();
        assert!((lo - m).abs() < 1e-7 && (hi - m).abs() < 1e-7);
        assert!(matches!(
            p.envelope(0.5 * r, &[2.0]),
            Err(Error::NormBudgetExceeded { .. })
        ));
    }

    #[test]
    fn dimension_errors() {
        let d = Design::new(vec![vec![0.0, 0.0]], vec![1.0]).unwrap();
        let p = Posterior::fit(se1(), d, 2.0).unwrap();
        assert!(matches!(p.mean(&[0.0]), Err(Error::Dimension { .. })));
        assert!(matches!(
            p.std(&[0.0, 1.0, 2.0]),
            Err(Error::Dimension { .. })
        ));
        assert!(Design::new(vec![vec![0.0]], vec![]).is_err());
    }

    #[test]
    fn min_norm_interpolant_examples() {
        let f = min_norm_interpolant(se1(), vec![vec![0.0]], &[1.0]).unwrap();
        assert_relative_eq!(f.weights()[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(f.norm(), 1.0, epsilon = 1e-15);
        let z = min_norm_interpolant(se1(), vec![vec![0.0], vec![1.0]], &[0.0, 0.0]).unwrap();
        assert_eq!(z.norm(), 0.0);
        assert_eq!(z.eval(&[0.4]).unwrap(), 0.0);
        let dup = min_norm_interpolant(se1(), vec![vec![0.0], vec![1e-12]], &[0.0, 1.0]);
        assert!(matches!(dup, Err(Error::IllConditioned(_))));
    }

    #[test]
    fn rkhs_function_json_round_trip() {
        let k = KernelSpec::matern(2.5, 0.5, 1.0).unwrap();
        let f = RkhsFunction::new(
            k,
            vec![vec![0.1, 0.2], vec![0.7, 0.4]],
            vec![(0.1f64 + 0.2) / 3.0, -1.0000364829652961],
        )
        .unwrap();
        let g = RkhsFunction::from_json(&f.to_json().unwrap()).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn sample_rkhs_is_deterministic_and_bounded() {
        let k = KernelSpec::matern(2.5, 0.5, 1.0).unwrap();
        let dom = BoxDomain::unit(2).unwrap();
        let a = sample_rkhs(k, &dom, 8, 1.0, 42, SampleMode::Rescale).unwrap();
        let b = sample_rkhs(k, &dom, 8, 1.0, 42, SampleMode::Rescale).unwrap();
        assert_eq!(a.function, b.function);
        let one = KernelSpec::se(0.5).unwrap();
        for seed in 0..100 {
            for mode in [SampleMode::Reject, SampleMode::Rescale] {
                let s = sample_rkhs(one, &dom, 1, 1.0, seed, mode).unwrap();
                assert!(s.function.norm() <= 1.0 + 1e-6);
                for c in s.function.centers() {
                    assert!(dom.contains(c));
                }
            }
            let s = sample_rkhs(k, &dom, 6, 1.0, seed, SampleMode::Rescale).unwrap();
            assert!(s.function.norm() <= 1.0 + 1e-6);
        }
    }

    #[test]
    fn rejection_budget_exhausted() {
        // 200 knots: norm² ~ chi²(200), essentially never below 1.
        let k = KernelSpec::matern(0.5, 0.05, 1.0).unwrap();
        let dom = BoxDomain::unit(1).unwrap();
        let err = sample_rkhs(k, &dom, 200, 1.0, 7, SampleMode::Reject).unwrap_err();
        assert!(matches!(
            err,
            Error::RejectionBudgetExhausted { attempts: 1000 }
        ));
    }

    #[test]
    fn grid_examples() {
        let d1 = BoxDomain::unit(1).unwrap();
        assert_eq!(
            grid(&d1, 2, DEFAULT_GRID_CAP).unwrap(),
            vec![vec![0.0], vec![0.5]]
        );
        let d2 = BoxDomain::unit(2).unwrap();
        assert_eq!(
            grid(&d2, 2, DEFAULT_GRID_CAP).unwrap(),
            vec![
                vec![0.0, 0.0],
                vec![0.0, 0.5],
                vec![0.5, 0.0],
                vec![0.5, 0.5]
            ]
        );
        for d in 1..4 {
            for n in 1..5 {
                let dom = BoxDomain::unit(d).unwrap();
                assert_eq!(
                    grid(&dom, n, DEFAULT_GRID_CAP).unwrap().len(),
                    n.pow(d as u32)
                );
            }
        }
        let d3 = BoxDomain::unit(3).unwrap();
        assert!(matches!(
            grid(&d3, 101, DEFAULT_GRID_CAP),
            Err(Error::SizeOverflow { .. })
        ));
        assert!(grid(&d1, 0, DEFAULT_GRID_CAP).is_err());
    }
}
