//! Deterministic optimization policies and the regret runner.
//!
//! A policy maps the observation history (a [`Design`]) to the next query
//! point. Every policy here is a pure function of its history; acquisition
//! maximization goes through [`crate::search`] so replays are bit-identical.

use serde::Serialize;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::interpolate::{
    lattice_point, lattice_size, Design, Posterior, RkhsFunction, DEFAULT_GRID_CAP,
};
use crate::kernels::{BoxDomain, KernelSpec};
use crate::search::{self, SearchConfig};

/// Below this posterior std, EI falls back to `max(0, y* - m)`.
pub const EI_SIGMA_FLOOR: f64 = 1e-12;

/// How the first query is chosen when the history is empty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum FirstPoint {
    Center,
    Fixed(Vec<f64>),
    /// Let the acquisition decide (a constant surface returns the lower corner).
    Acquisition,
}

/// Shared configuration for model-based policies.
#[derive(Debug, Clone)]
pub struct PolicyContext {
    pub kernel: KernelSpec,
    pub domain: BoxDomain,
    pub r: f64,
    pub search: SearchConfig,
    pub first_point: FirstPoint,
}

impl PolicyContext {
    pub fn new(kernel: KernelSpec, domain: BoxDomain, r: f64) -> Self {
        PolicyContext {
            kernel,
            domain,
            r,
            search: SearchConfig::default(),
            first_point: FirstPoint::Center,
        }
    }

    fn first(&self) -> Option<Vec<f64>> {
        match &self.first_point {
            FirstPoint::Center => Some(self.domain.center()),
            FirstPoint::Fixed(x) => Some(x.clone()),
            FirstPoint::Acquisition => None,
        }
    }
}

/// A deterministic optimization policy.
pub trait Policy: Send + Sync {
    fn id(&self) -> String;
    fn domain(&self) -> &BoxDomain;
    /// Next query given every observation so far.
    fn next(&self, history: &Design) -> Result<Vec<f64>>;
    /// Final recommendation.
    fn report(&self, history: &Design) -> Result<Vec<f64>>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LcbVariant {
    /// `m_t - beta·sigma_t`.
    Plain,
    /// The certified lower envelope `m_t - sigma_t·sqrt(R² - |m_t|²)`.
    Certified,
}

/// Minimizer of the LCB acquisition.
pub fn next_lcb(
    history: &Design,
    kernel: KernelSpec,
    r: f64,
    beta: f64,
    variant: LcbVariant,
    domain: &BoxDomain,
    search: &SearchConfig,
) -> Result<Vec<f64>> {
    let (post, weight) = match variant {
        LcbVariant::Plain => (Posterior::fit_unbounded(kernel, history.clone())?, beta),
        LcbVariant::Certified => {
            let post = Posterior::fit(kernel, history.clone(), r)?;
            let radius = post.residual_radius(r)?;
            (post, radius)
        }
    };
    let best = search::minimize(
        |x| {
            let (m, s) = post.mean_std(x)?;
            Ok(m - weight * s)
        },
        domain,
        search,
    )?;
    Ok(best.x)
}

fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Noiseless expected improvement for minimization.
pub fn expected_improvement(mean: f64, std: f64, best: f64) -> f64 {
    let gap = best - mean;
    if std <= EI_SIGMA_FLOOR {
        return gap.max(0.0);
    }
    let z = gap / std;
    (gap * std_normal_cdf(z) + std * std_normal_pdf(z)).max(0.0)
}

/// Maximizer of expected improvement; requires a non-empty history.
pub fn next_ei(
    history: &Design,
    kernel: KernelSpec,
    domain: &BoxDomain,
    search: &SearchConfig,
) -> Result<Vec<f64>> {
    let best = history
        .values()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if !best.is_finite() {
        return Err(Error::InvalidParameter(
            "expected improvement needs a non-empty history".into(),
        ));
    }
    let post = Posterior::fit_unbounded(kernel, history.clone())?;
    let r = search::maximize(
        |x| {
            let (m, s) = post.mean_std(x)?;
            Ok(expected_improvement(m, s, best))
        },
        domain,
        search,
    )?;
    Ok(r.x)
}

/// The `t`-th (1-based) point of the `N^d` lattice.
pub fn next_grid(t: usize, points_per_dim: usize, domain: &BoxDomain) -> Result<Vec<f64>> {
    let size = lattice_size(domain.dim(), points_per_dim, DEFAULT_GRID_CAP)?;
    if t == 0 || t > size {
        return Err(Error::SizeOverflow {
            requested: t as u128,
            cap: size,
        });
    }
    Ok(lattice_point(domain, points_per_dim, t - 1))
}

/// Minimizer of the certified lower envelope.
pub fn report_grid(
    history: &Design,
    kernel: KernelSpec,
    r: f64,
    domain: &BoxDomain,
    search: &SearchConfig,
) -> Result<Vec<f64>> {
    let post = Posterior::fit(kernel, history.clone(), r)?;
    let radius = post.residual_radius(r)?;
    let best = search::minimize(
        |x| {
            let (m, s) = post.mean_std(x)?;
            Ok(m - radius * s)
        },
        domain,
        search,
    )?;
    Ok(best.x)
}

fn best_observed(history: &Design, domain: &BoxDomain) -> Vec<f64> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in history.values().iter().enumerate() {
        if best.map_or(true, |(_, b)| *v < b) {
            best = Some((i, *v));
        }
    }
    match best {
        Some((i, _)) => history.points()[i].clone(),
        None => domain.center(),
    }
}

#[derive(Debug, Clone)]
pub struct LcbPolicy {
    pub ctx: PolicyContext,
    pub beta: f64,
    pub variant: LcbVariant,
}

impl Policy for LcbPolicy {
    fn id(&self) -> String {
        match self.variant {
            LcbVariant::Plain => format!("lcb(beta={})", self.beta),
            LcbVariant::Certified => "lcb(certified)".to_string(),
        }
    }

    fn domain(&self) -> &BoxDomain {
        &self.ctx.domain
    }

    fn next(&self, history: &Design) -> Result<Vec<f64>> {
        if history.is_empty() {
            if let Some(x) = self.ctx.first() {
                return Ok(x);
            }
        }
        let c = &self.ctx;
        next_lcb(
            history,
            c.kernel,
            c.r,
            self.beta,
            self.variant,
            &c.domain,
            &c.search,
        )
    }

    fn report(&self, history: &Design) -> Result<Vec<f64>> {
        Ok(best_observed(history, &self.ctx.domain))
    }
}

#[derive(Debug, Clone)]
pub struct EiPolicy {
    pub ctx: PolicyContext,
}

impl Policy for EiPolicy {
    fn id(&self) -> String {
        "ei".to_string()
    }

    fn domain(&self) -> &BoxDomain {
        &self.ctx.domain
    }

    fn next(&self, history: &Design) -> Result<Vec<f64>> {
        if history.is_empty() {
            return Ok(self
                .ctx
                .first()
                .unwrap_or_else(|| self.ctx.domain.lower().to_vec()));
        }
        let c = &self.ctx;
        next_ei(history, c.kernel, &c.domain, &c.search)
    }

    fn report(&self, history: &Design) -> Result<Vec<f64>> {
        Ok(best_observed(history, &self.ctx.domain))
    }
}

/// Non-adaptive lattice search with the certified report rule.
#[derive(Debug, Clone)]
pub struct GridPolicy {
    pub ctx: PolicyContext,
    pub points_per_dim: usize,
}

impl GridPolicy {
    /// Smallest lattice with at least `budget` points.
    pub fn for_budget(ctx: PolicyContext, budget: usize) -> Self {
        let d = ctx.domain.dim() as u32;
        let mut n = 1usize;
        while n.pow(d) < budget {
            n += 1;
        }
        GridPolicy {
            ctx,
            points_per_dim: n,
        }
    }
}

impl Policy for GridPolicy {
    fn id(&self) -> String {
        format!("grid(N={})", self.points_per_dim)
    }

    fn domain(&self) -> &BoxDomain {
        &self.ctx.domain
    }

    fn next(&self, history: &Design) -> Result<Vec<f64>> {
        next_grid(history.len() + 1, self.points_per_dim, &self.ctx.domain)
    }

    fn report(&self, history: &Design) -> Result<Vec<f64>> {
        let c = &self.ctx;
        report_grid(history, c.kernel, c.r, &c.domain, &c.search)
    }
}

/// Reference minimum of a test function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundTruth {
    pub min_value: f64,
    pub argmin: Vec<f64>,
}

/// Brute-force minimum on a grid four times finer than `search`, then polish.
pub fn ground_truth(
    f: &RkhsFunction,
    domain: &BoxDomain,
    search: &SearchConfig,
) -> Result<GroundTruth> {
    let fine = search.refined(domain.dim(), 4);
    let r = search::minimize(|x| f.eval(x), domain, &fine)?;
    Ok(GroundTruth {
        min_value: r.value,
        argmin: r.x,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceStep {
    pub t: usize,
    pub x: Vec<f64>,
    pub value: f64,
    pub simple_regret: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretTrace {
    pub policy_id: String,
    pub steps: Vec<TraceStep>,
    pub reported_point: Vec<f64>,
    pub reported_value: f64,
    /// `f(reported) - min f`, paid as one extra evaluation.
    pub reported_regret: f64,
    /// Minimum used for regret: the oracle value, lowered to any better
    /// observed value so regrets stay nonnegative.
    pub min_value: f64,
}

impl RegretTrace {
    pub fn final_regret(&self) -> f64 {
        self.steps.last().map_or(f64::NAN, |s| s.simple_regret)
    }
}

/// Run `policy` for `budget` noiseless evaluations of `f`.
pub fn run_policy(
    policy: &dyn Policy,
    f: &RkhsFunction,
    budget: usize,
    truth: &GroundTruth,
) -> Result<RegretTrace> {
    let domain = policy.domain().clone();
    let mut history = Design::empty();
    for t in 1..=budget {
        let x = policy.next(&history)?;
        if !domain.contains(&x) {
            return Err(Error::PolicyViolation(format!(
                "{} emitted {x:?} at step {t}, outside the domain",
                policy.id()
            )));
        }
        let y = f.eval(&x)?;
        history.push(x, y)?;
    }
    let reported_point = policy.report(&history)?;
    if !domain.contains(&reported_point) {
        return Err(Error::PolicyViolation(format!(
            "{} reported {reported_point:?}, outside the domain",
            policy.id()
        )));
    }
    let reported_value = f.eval(&reported_point)?;

    let observed_min = history
        .values()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let min_value = truth.min_value.min(observed_min).min(reported_value);

    let mut running = f64::INFINITY;
    let steps = history
        .points()
        .iter()
        .zip(history.values())
        .enumerate()
        .map(|(i, (x, &y))| {
            running = running.min(y);
            TraceStep {
                t: i + 1,
                x: x.clone(),
                value: y,
                simple_regret: running - min_value,
            }
        })
        .collect();
    Ok(RegretTrace {
        policy_id: policy.id(),
        steps,
        reported_point,
        reported_value,
        reported_regret: reported_value - min_value,
        min_value,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CumulativeStep {
    pub t: usize,
    pub x: Vec<f64>,
    pub value: f64,
    pub instant_regret: f64,
    pub cumulative_regret: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CumulativeTrace {
    pub points_per_dim: usize,
    pub phase1_len: usize,
    pub steps: Vec<CumulativeStep>,
    pub min_value: f64,
}

impl CumulativeTrace {
    pub fn total(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.cumulative_regret)
    }
}

/// Phase-1 lattice resolution: `N^d ≈ (log T)^d` for SE and
/// `N^d ≈ T^{d/(d+nu)}` for Matérn, kept below `T`.
pub fn two_phase_resolution(kernel: &KernelSpec, dim: usize, horizon: usize) -> Result<usize> {
    let t = horizon as f64;
    let mut n = match kernel {
        KernelSpec::Se { .. } => t.ln().ceil() as usize,
        KernelSpec::Matern { nu, .. } => t.powf(1.0 / (dim as f64 + nu.value())).ceil() as usize,
        KernelSpec::Quadratic => {
            return Err(Error::UnsupportedParameter(
                "two-phase schedule needs an SE or Matern kernel".into(),
            ))
        }
    };
    n = n.max(1);
    while n > 1 && (n as u128).pow(dim as u32) >= horizon as u128 {
        n -= 1;
    }
    Ok(n)
}

/// Lattice exploration for `phase1_len` steps, then the certified report
/// point of the phase-1 data for every remaining step.
#[derive(Debug, Clone)]
pub struct TwoPhasePolicy {
    pub ctx: PolicyContext,
    pub points_per_dim: usize,
    pub phase1_len: usize,
}

impl TwoPhasePolicy {
    pub fn for_horizon(ctx: PolicyContext, horizon: usize) -> Result<Self> {
        let n = two_phase_resolution(&ctx.kernel, ctx.domain.dim(), horizon)?;
        let phase1_len = lattice_size(ctx.domain.dim(), n, DEFAULT_GRID_CAP)?;
        Ok(TwoPhasePolicy {
            ctx,
            points_per_dim: n,
            phase1_len,
        })
    }

    fn commit_point(&self, history: &Design) -> Result<Vec<f64>> {
        let n = self.phase1_len.min(history.len());
        let phase1 = Design::new(
            history.points()[..n].to_vec(),
            history.values()[..n].to_vec(),
        )?;
        let c = &self.ctx;
        report_grid(&phase1, c.kernel, c.r, &c.domain, &c.search)
    }
}

impl Policy for TwoPhasePolicy {
    fn id(&self) -> String {
        format!("two_phase(N={})", self.points_per_dim)
    }

    fn domain(&self) -> &BoxDomain {
        &self.ctx.domain
    }

    fn next(&self, history: &Design) -> Result<Vec<f64>> {
        let t = history.len() + 1;
        if t <= self.phase1_len {
            next_grid(t, self.points_per_dim, &self.ctx.domain)
        } else {
            self.commit_point(history)
        }
    }

    fn report(&self, history: &Design) -> Result<Vec<f64>> {
        self.commit_point(history)
    }
}

/// Explore on a lattice, then commit to the certified report point; returns
/// per-step cumulative regret.
pub fn two_phase(
    kernel: KernelSpec,
    domain: &BoxDomain,
    r: f64,
    horizon: usize,
    f: &RkhsFunction,
    truth: &GroundTruth,
    search: &SearchConfig,
) -> Result<CumulativeTrace> {
    if horizon < 2 {
        return Err(Error::InvalidParameter(
            "two-phase horizon must be >= 2".into(),
        ));
    }
    let mut ctx = PolicyContext::new(kernel, domain.clone(), r);
    ctx.search = search.clone();
    let policy = TwoPhasePolicy::for_horizon(ctx, horizon)?;
    let mut history = Design::empty();
    let mut commit: Option<(Vec<f64>, f64)> = None;
    for t in 1..=horizon {
        let (x, y) = if t <= policy.phase1_len {
            let x = policy.next(&history)?;
            let y = f.eval(&x)?;
            (x, y)
        } else {
            // The committed point never changes; compute it once.
            if commit.is_none() {
                let x = policy.next(&history)?;
                let y = f.eval(&x)?;
                commit = Some((x, y));
            }
            commit.clone().expect("set above")
        };
        history.push(x, y)?;
    }

    let min_value = history
        .values()
        .iter()
        .copied()
        .fold(truth.min_value, f64::min);
    let mut cumulative = 0.0;
    let steps = history
        .points()
        .iter()
        .zip(history.values())
        .enumerate()
        .map(|(i, (x, &value))| {
            let instant_regret = value - min_value;
            cumulative += instant_regret;
            CumulativeStep {
                t: i + 1,
                x: x.clone(),
                value,
                instant_regret,
                cumulative_regret: cumulative,
            }
        })
        .collect();
    Ok(CumulativeTrace {
        points_per_dim: policy.points_per_dim,
        phase1_len: policy.phase1_len,
        steps,
        min_value,
    })
}

/// Policy selection as named in experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum PolicyKind {
    Lcb {
        beta: f64,
        variant: LcbVariant,
    },
    Ei,
    /// Lattice resolution; `None` sizes it to the budget.
    Grid {
        points_per_dim: Option<usize>,
    },
    TwoPhase,
}

impl PolicyKind {
    pub fn name(&self) -> &'static str {
        match self {
            PolicyKind::Lcb { .. } => "lcb",
            PolicyKind::Ei => "ei",
            PolicyKind::Grid { .. } => "grid",
            PolicyKind::TwoPhase => "two_phase",
        }
    }

    pub fn build(&self, ctx: PolicyContext, budget: usize) -> Result<Box<dyn Policy>> {
        Ok(match self {
            PolicyKind::Lcb { beta, variant } => Box::new(LcbPolicy {
                ctx,
                beta: *beta,
                variant: *variant,
            }),
            PolicyKind::Ei => Box::new(EiPolicy { ctx }),
            PolicyKind::Grid {
                points_per_dim: Some(n),
            } => Box::new(GridPolicy {
                ctx,
                points_per_dim: *n,
            }),
            PolicyKind::Grid {
                points_per_dim: None,
            } => Box::new(GridPolicy::for_budget(ctx, budget.max(1))),
            PolicyKind::TwoPhase => Box::new(TwoPhasePolicy::for_horizon(ctx, budget.max(2))?),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx1() -> PolicyContext {
        let mut c = PolicyContext::new(
            KernelSpec::matern(2.5, 0.3, 1.0).unwrap(),
            BoxDomain::unit(1).unwrap(),
            1.0,
        );
        c.search = SearchConfig::with_resolution(101);
        c
    }

    #[test]
    fn lcb_empty_history_constant_surface() {
        let c = ctx1();
        let x = next_lcb(
            &Design::empty(),
            c.kernel,
            1.0,
            1.0,
            LcbVariant::Plain,
            &c.domain,
            &c.search,
        )
        .unwrap();
        assert_eq!(x, vec![0.0]);
    }

    #[test]
    fn lcb_zero_history_maximizes_sigma() {
        let c = ctx1();
        let h = Design::zeros(vec![vec![0.0], vec![0.4]]).unwrap();
        let x = next_lcb(
            &h,
            c.kernel,
            1.0,
            1.0,
            LcbVariant::Plain,
            &c.domain,
            &c.search,
        )
        .unwrap();
        let post = Posterior::fit_unbounded(c.kernel, h.clone()).unwrap();
        let best = search::maximize(|z| post.std(z), &c.domain, &c.search).unwrap();
        assert_eq!(x, best.x);
        assert_eq!(x, vec![1.0]);
    }

    #[test]
    fn certified_lcb_with_collapsed_envelope_minimizes_mean() {
        let c = ctx1();
        let h = Design::new(vec![vec![0.2], vec![0.8]], vec![0.3, -0.4]).unwrap();
        let post = Posterior::fit_unbounded(c.kernel, h.clone()).unwrap();
        let r = post.norm_sq().sqrt();
        let x = next_lcb(
            &h,
            c.kernel,
            r,
            1.0,
            LcbVariant::Certified,
            &c.domain,
            &c.search,
        )
        .unwrap();
        let m = search::minimize(|z| post.mean(z), &c.domain, &c.search).unwrap();
        assert_eq!(x, m.x);
        let err = next_lcb(
            &h,
            c.kernel,
            0.5 * r,
            1.0,
            LcbVariant::Certified,
            &c.domain,
            &c.search,
        );
        assert!(matches!(err, Err(Error::NormBudgetExceeded { .. })));
    }

    #[test]
    fn ei_closed_form_cases() {
        assert_eq!(expected_improvement(0.5, 0.0, 0.5), 0.0);
        assert!((expected_improvement(0.2, 0.0, 0.5) - 0.3).abs() < 1e-15);
        let s = 0.37;
        let v = expected_improvement(1.0, s, 1.0);
        assert!((v - s / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-15);
        assert!(expected_improvement(5.0, 0.1, 0.0) >= 0.0);
    }

    #[test]
    fn ei_vanishes_at_sampled_points() {
        let c = ctx1();
        let h = Design::new(vec![vec![0.1], vec![0.5], vec![0.9]], vec![0.2, -0.1, 0.4]).unwrap();
        let post = Posterior::fit_unbounded(c.kernel, h.clone()).unwrap();
        for x in h.points() {
            let (m, s) = post.mean_std(x).unwrap();
            assert!(expected_improvement(m, s, -0.1) < 1e-7);
        }
        assert!(next_ei(&Design::empty(), c.kernel, &c.domain, &c.search).is_err());
    }

    #[test]
    fn grid_next_and_report() {
        let dom = BoxDomain::unit(1).unwrap();
        assert_eq!(next_grid(1, 4, &dom).unwrap(), vec![0.0]);
        assert_eq!(next_grid(4, 4, &dom).unwrap(), vec![0.75]);
        assert!(matches!(
            next_grid(5, 4, &dom),
            Err(Error::SizeOverflow { .. })
        ));

        let c = ctx1();
        let h = Design::zeros(vec![vec![0.0], vec![0.25], vec![0.5], vec![0.75]]).unwrap();
        let x = report_grid(&h, c.kernel, 1.0, &c.domain, &c.search).unwrap();
        let post = Posterior::fit_unbounded(c.kernel, h).unwrap();
        let best = search::maximize(|z| post.std(z), &c.domain, &c.search).unwrap();
        assert_eq!(x, best.x);
    }

    #[test]
    fn zero_function_has_zero_regret() {
        let c = ctx1();
        let f = RkhsFunction::zero(c.kernel);
        let truth = GroundTruth {
            min_value: 0.0,
            argmin: vec![0.0],
        };
        let lcb = LcbPolicy {
            ctx: c.clone(),
            beta: 1.0,
            variant: LcbVariant::Plain,
        };
        let tr = run_policy(&lcb, &f, 5, &truth).unwrap();
        assert!(tr.steps.iter().all(|s| s.simple_regret == 0.0));
        let cum = two_phase(c.kernel, &c.domain, 1.0, 16, &f, &truth, &c.search).unwrap();
        assert_eq!(cum.total(), 0.0);
    }

    struct Escaping(BoxDomain);

    impl Policy for Escaping {
        fn id(&self) -> String {
            "escaping".into()
        }
        fn domain(&self) -> &BoxDomain {
            &self.0
        }
        fn next(&self, _: &Design) -> Result<Vec<f64>> {
            Ok(vec![2.0])
        }
        fn report(&self, _: &Design) -> Result<Vec<f64>> {
            Ok(vec![0.0])
        }
    }

    #[test]
    fn out_of_domain_is_a_violation() {
        let c = ctx1();
        let f = RkhsFunction::zero(c.kernel);
        let truth = GroundTruth {
            min_value: 0.0,
            argmin: vec![0.0],
        };
        let err = run_policy(&Escaping(c.domain.clone()), &f, 3, &truth).unwrap_err();
        assert!(matches!(err, Error::PolicyViolation(_)));
    }

    #[test]
    fn two_phase_resolution_rules() {
        let se = KernelSpec::se(0.5).unwrap();
        assert_eq!(two_phase_resolution(&se, 1, 64).unwrap(), 5);
        assert_eq!(two_phase_resolution(&se, 1, 256).unwrap(), 6);
        let m = KernelSpec::matern(2.5, 0.5, 1.0).unwrap();
        // 100^(1/3.5) = 3.73 -> 4
        assert_eq!(two_phase_resolution(&m, 1, 100).unwrap(), 4);
        assert!(two_phase_resolution(&KernelSpec::quadratic(), 1, 10).is_err());
    }
}
