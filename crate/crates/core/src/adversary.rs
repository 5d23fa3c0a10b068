//! Adversarial functions against deterministic policies.
//!
//! Feeding a policy zeros produces its zero sequence. Any ball function that
//! vanishes on that sequence is indistinguishable from `f ≡ 0` to the policy,
//! and the lowest such value at `x` is `-R·sigma_t(x)` (optimal recovery).
//! The curve `R·max_x sigma_t(x)` is therefore the policy's worst-case simple
//! regret, and [`certify_theorem1`] checks it against the metric-entropy
//! lower bound.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::interpolate::{Design, Posterior, RkhsFunction};
use crate::kernels::{BoxDomain, KernelSpec};
use crate::policies::Policy;
use crate::search::{self, SearchConfig};

/// `sigma_t(x_target)` at or below this cannot carry a witness.
pub const DEGENERATE_SIGMA: f64 = 1e-8;
/// Slack on the certificate threshold.
pub const CERTIFICATE_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroSequence {
    pub policy_id: String,
    pub points: Vec<Vec<f64>>,
}

/// The queries `policy` makes when every observation is 0.
pub fn zero_sequence(policy: &dyn Policy, budget: usize) -> Result<ZeroSequence> {
    let mut history = Design::empty();
    for t in 1..=budget {
        let x = policy.next(&history)?;
        if !policy.domain().contains(&x) {
            return Err(Error::PolicyViolation(format!(
                "{} emitted {x:?} at step {t}, outside the domain",
                policy.id()
            )));
        }
        history.push(x, 0.0)?;
    }
    Ok(ZeroSequence {
        policy_id: policy.id(),
        points: history.points().to_vec(),
    })
}

/// Minimum of `s(x)` over ball functions vanishing on the design: `-R·sigma_t(x)`.
pub fn adversarial_value(post_zero: &Posterior, r: f64, x: &[f64]) -> Result<f64> {
    Ok(-r * post_zero.std(x)?)
}

/// The ball function attaining [`adversarial_value`] at `x_target`:
/// `s*(·) = -(R/sigma)·(k(x_target,·) - K_{·X} K^{-1} K_{X x_target})`.
pub fn adversarial_witness(
    post_zero: &Posterior,
    r: f64,
    x_target: &[f64],
) -> Result<RkhsFunction> {
    let sigma = post_zero.std(x_target)?;
    if sigma <= DEGENERATE_SIGMA {
        return Err(Error::TargetDegenerate { sigma });
    }
    let coef = post_zero.representer_weights(x_target)?;
    let scale = r / sigma;
    let mut centers = post_zero.design().points().to_vec();
    centers.push(x_target.to_vec());
    let mut weights: Vec<f64> = coef.iter().map(|c| scale * c).collect();
    weights.push(-scale);
    RkhsFunction::new(*post_zero.kernel(), centers, weights)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRecord {
    pub t: usize,
    /// `-R·max_x sigma_t(x)`.
    pub worst_value: f64,
    pub adversarial_regret: f64,
    pub argmax: Vec<f64>,
    pub jitter_used: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdversarialCurve {
    pub policy_id: String,
    pub records: Vec<CurveRecord>,
    pub search_resolution: usize,
    pub polish_iters: usize,
}

impl AdversarialCurve {
    pub fn at(&self, t: usize) -> Option<&CurveRecord> {
        self.records.iter().find(|r| r.t == t)
    }
}

/// Worst-case regret `R·max_x sigma_t(x)` after each prefix of `points`
/// (including `t = 0`).
pub fn adversarial_curve_for_points(
    policy_id: &str,
    points: &[Vec<f64>],
    kernel: KernelSpec,
    domain: &BoxDomain,
    r: f64,
    search: &SearchConfig,
) -> Result<AdversarialCurve> {
    let records = (0..=points.len())
        .into_par_iter()
        .map(|t| {
            let post = Posterior::fit(kernel, Design::zeros(points[..t].to_vec())?, r)?;
            let best = search::maximize(|x| post.std(x), domain, search)?;
            Ok(CurveRecord {
                t,
                worst_value: -r * best.value,
                adversarial_regret: r * best.value,
                argmax: best.x,
                jitter_used: post.jitter_used(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AdversarialCurve {
        policy_id: policy_id.to_string(),
        records,
        search_resolution: search.resolution(domain.dim()),
        polish_iters: search.polish_iters,
    })
}

/// Adversarial regret curve of `policy` for steps `0..=budget`.
pub fn adversarial_regret_curve(
    policy: &dyn Policy,
    budget: usize,
    kernel: KernelSpec,
    domain: &BoxDomain,
    r: f64,
    search: &SearchConfig,
) -> Result<AdversarialCurve> {
    let zs = zero_sequence(policy, budget)?;
    adversarial_curve_for_points(&zs.policy_id, &zs.points, kernel, domain, r, search)
}

/// Largest step count guaranteed to leave regret above `3/2·eps`:
/// `floor(log_covering / (4·log(R/eps)))`, valid for `eps < R/4`.
pub fn lower_bound_steps(log_covering: f64, r: f64, eps: f64) -> Result<usize> {
    if !(eps > 0.0) || !(r > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need R > 0 and eps > 0, got R={r}, eps={eps}"
        )));
    }
    if eps >= r / 4.0 {
        return Err(Error::OutOfRegime {
            eps,
            limit: r / 4.0,
        });
    }
    if !(log_covering >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "log covering number must be >= 0, got {log_covering}"
        )));
    }
    Ok((log_covering / (4.0 * (r / eps).ln())).floor() as usize)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateReport {
    pub policy_id: String,
    pub eps: f64,
    pub packing_count: usize,
    pub t_star: usize,
    pub adversarial_regret: f64,
    /// `3/2·eps`.
    pub threshold: f64,
    pub pass: bool,
}

impl CertificateReport {
    pub fn verdict(&self) -> &'static str {
        if self.pass {
            "PASS"
        } else {
            "FAIL"
        }
    }
}

/// Check that `policy` still has adversarial regret `>= 3/2·eps` after
/// `t*` steps, where `t*` comes from the packing count at `8·eps`
/// (a lower estimate of the covering number at `4·eps`).
pub fn certify_theorem1(
    policy: &dyn Policy,
    kernel: KernelSpec,
    domain: &BoxDomain,
    r: f64,
    eps: f64,
    packing_count_at_8eps: usize,
    search: &SearchConfig,
) -> Result<CertificateReport> {
    if packing_count_at_8eps == 0 {
        return Err(Error::InvalidParameter("packing count must be >= 1".into()));
    }
    let t_star = lower_bound_steps((packing_count_at_8eps as f64).ln(), r, eps)?;
    let curve = adversarial_regret_curve(policy, t_star, kernel, domain, r, search)?;
    let adversarial_regret = curve
        .at(t_star)
        .map(|c| c.adversarial_regret)
        .unwrap_or(f64::NAN);
    let threshold = 1.5 * eps;
    Ok(CertificateReport {
        policy_id: policy.id(),
        eps,
        packing_count: packing_count_at_8eps,
        t_star,
        adversarial_regret,
        threshold,
        pass: adversarial_regret >= threshold - CERTIFICATE_SLACK,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policies::{FirstPoint, GridPolicy, LcbPolicy, LcbVariant, PolicyContext};

    fn wide_matern_ctx() -> PolicyContext {
        let mut c = PolicyContext::new(
            KernelSpec::matern(2.5, 1.0, 1.0).unwrap(),
            BoxDomain::cube(1, -10.0, 10.0).unwrap(),
            1.0,
        );
        c.first_point = FirstPoint::Fixed(vec![0.0]);
        c
    }

    #[test]
    fn lower_bound_steps_examples() {
        assert_eq!(lower_bound_steps(40.0, 100.0, 1.0).unwrap(), 2);
        assert_eq!(lower_bound_steps(0.0, 1.0, 0.1).unwrap(), 0);
        let x = (1.0f64 / 0.05).ln();
        assert_eq!(lower_bound_steps(8.0 * x, 1.0, 0.05).unwrap(), 2);
        assert!(matches!(
            lower_bound_steps(1.0, 1.0, 0.25),
            Err(Error::OutOfRegime { .. })
        ));
    }

    #[test]
    fn grid_zero_sequence_is_grid_order() {
        let c = wide_matern_ctx();
        let g = GridPolicy {
            ctx: c.clone(),
            points_per_dim: 4,
        };
        let zs = zero_sequence(&g, 4).unwrap();
        assert_eq!(
            zs.points,
            vec![vec![-10.0], vec![-5.0], vec![0.0], vec![5.0]]
        );
    }

    #[test]
    fn adversarial_value_examples() {
        let c = wide_matern_ctx();
        let post = Posterior::fit(c.kernel, Design::zeros(vec![vec![0.0]]).unwrap(), 1.0).unwrap();
        assert_eq!(adversarial_value(&post, 1.0, &[0.0]).unwrap(), 0.0);
        let v = adversarial_value(&post, 1.0, &[10.0]).unwrap();
        assert!((v + 1.0).abs() < 1e-6);
        let v2 = adversarial_value(&post, 2.0, &[3.0]).unwrap();
        assert_eq!(v2, 2.0 * adversarial_value(&post, 1.0, &[3.0]).unwrap());
    }

    #[test]
    fn witness_degenerate_target() {
        let c = wide_matern_ctx();
        let post = Posterior::fit(c.kernel, Design::zeros(vec![vec![0.0]]).unwrap(), 1.0).unwrap();
        assert!(matches!(
            adversarial_witness(&post, 1.0, &[0.0]),
            Err(Error::TargetDegenerate { .. })
        ));
    }

    #[test]
    fn curve_starts_at_r_with_one_sample() {
        let mut c = wide_matern_ctx();
        c.search = SearchConfig::with_resolution(201);
        let lcb = LcbPolicy {
            ctx: c.clone(),
            beta: 1.0,
            variant: LcbVariant::Plain,
        };
        let curve = adversarial_regret_curve(&lcb, 3, c.kernel, &c.domain, 1.0, &c.search).unwrap();
        assert_eq!(curve.records.len(), 4);
        assert!((curve.records[0].adversarial_regret - 1.0).abs() < 1e-15);
        assert!((curve.records[1].adversarial_regret - 1.0).abs() < 1e-6);
        for w in curve.records.windows(2) {
            assert!(w[1].adversarial_regret <= w[0].adversarial_regret + 1e-8);
        }
    }

    #[test]
    fn certificate_trivial_packing() {
        let c = wide_matern_ctx();
        let g = GridPolicy {
            ctx: c.clone(),
            points_per_dim: 4,
        };
        let rep = certify_theorem1(&g, c.kernel, &c.domain, 1.0, 0.1, 1, &c.search).unwrap();
        assert_eq!(rep.t_star, 0);
        assert!(rep.pass);
        assert!(matches!(
            certify_theorem1(&g, c.kernel, &c.domain, 1.0, 0.3, 5, &c.search),
            Err(Error::OutOfRegime { .. })
        ));
    }
}
