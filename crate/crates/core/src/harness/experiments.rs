//! The experiment commands. Each one resolves typed parameters from a
//! [`Config`], computes its results, and renders them as in-memory
//! [`Artifact`]s; nothing touches the filesystem until the run is complete.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::analysis::{doubling_decrements, loglog_slope, mean_std};
use super::config::{Config, Resolver};
use super::output::{fmt_point, Artifact, Cell, Format, Table};
use super::svg::{Band, Plot, Series, PALETTE};
use crate::adversary::{
    adversarial_regret_curve, adversarial_witness, certify_theorem1, zero_sequence,
    CertificateReport,
};
use crate::entropy::{entropy_report, CandidateConfig, CandidateStrategy, EntropyReport};
use crate::error::{Error, Result};
use crate::interpolate::{grid, sample_rkhs, Design, Posterior, SampleMode, DEFAULT_GRID_CAP};
use crate::kernels::{BoxDomain, KernelSpec};
use crate::policies::{ground_truth, run_policy, FirstPoint, PolicyContext, PolicyKind};
use crate::search::{self, search_point, SearchConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    DemoAdversarial,
    RegretCompare,
    RateFit,
    LowerBoundCheck,
    QuadraticRecovery,
    EntropyEstimate,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::DemoAdversarial,
        Command::RegretCompare,
        Command::RateFit,
        Command::LowerBoundCheck,
        Command::QuadraticRecovery,
        Command::EntropyEstimate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::DemoAdversarial => "demo-adversarial",
            Command::RegretCompare => "regret-compare",
            Command::RateFit => "rate-fit",
            Command::LowerBoundCheck => "lower-bound-check",
            Command::QuadraticRecovery => "quadratic-recovery",
            Command::EntropyEstimate => "entropy-estimate",
        }
    }
}

impl std::str::FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown command '{s}'")))
    }
}

/// Everything a command produced, ready to be written.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub command: Command,
    pub config: BTreeMap<String, String>,
    pub artifacts: Vec<Artifact>,
    pub notes: Vec<String>,
}

pub fn run(command: Command, config: &Config, format: Format) -> Result<RunOutput> {
    let mut res = Resolver::new(config);
    // Accepted (and echoed) by every command, even deterministic ones.
    res.value("seed", 0u64)?;
    let (artifacts, notes) = match command {
        Command::DemoAdversarial => {
            let p = DemoParams::resolve(&mut res)?;
            (render_demo(&p, &demo_adversarial(&p)?, format)?, vec![])
        }
        Command::RegretCompare => {
            let p = RegretParams::resolve(&mut res)?;
            let note = format!(
                "desk scale: {} instances, budget {}; the original study used 100 instances \
                 and about 15 hours on a 64-core machine",
                p.instances, p.budget
            );
            (render_regret(&p, &regret_compare(&p)?, format)?, vec![note])
        }
        Command::RateFit => {
            let p = RateParams::resolve(&mut res)?;
            (render_rate(&p, &rate_fit(&p)?, format)?, vec![])
        }
        Command::LowerBoundCheck => {
            let p = CheckParams::resolve(&mut res)?;
            let (report, certs) = lower_bound_check(&p)?;
            let note = format!(
                "packing counts are an {} over {} candidates",
                report.label, report.candidate_count
            );
            (render_check(&report, &certs, format)?, vec![note])
        }
        Command::QuadraticRecovery => {
            let p = QuadParams::resolve(&mut res)?;
            let q = quadratic_recovery(&p)?;
            let mut notes = vec![];
            if !q.enough_samples {
                notes.push(format!(
                    "only {} samples for {} quadratic coefficients; recovery is not expected to be exact",
                    p.samples.len(),
                    q.coefficients
                ));
            }
            (render_quadratic(&q, format)?, notes)
        }
        Command::EntropyEstimate => {
            let p = EntropyParams::resolve(&mut res)?;
            let report = entropy_report(p.kernel, &p.domain, p.r, &p.eps, &p.candidates, p.seed)?;
            (render_entropy(&report, format)?, vec![])
        }
    };
    Ok(RunOutput {
        command,
        config: res.finish()?,
        artifacts,
        notes,
    })
}

fn policy_list(res: &mut Resolver, key: &str, default: &[&str]) -> Result<Vec<PolicyKind>> {
    let names = res.list(
        key,
        &default.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
    )?;
    if names.is_empty() {
        return Err(Error::Config(format!("{key} is empty")));
    }
    names.iter().map(|n| res.policy_kind(n)).collect()
}

fn candidate_config(res: &mut Resolver) -> Result<CandidateConfig> {
    let d = CandidateConfig::default();
    let strategy: String = res.value("entropy.strategy", "mixed".to_string())?;
    let eval: usize = res.value("entropy.eval_points", 0)?;
    Ok(CandidateConfig {
        strategy: strategy.parse::<CandidateStrategy>()?,
        count: res.value("entropy.count", d.count)?,
        n_knots: res.value("entropy.n_knots", d.n_knots)?,
        eval_points_per_dim: (eval > 0).then_some(eval),
        include_zero: res.value("entropy.include_zero", d.include_zero)?,
    })
}

fn positive_r(res: &mut Resolver) -> Result<f64> {
    let r = res.value("R", 1.0)?;
    if !(r > 0.0) {
        return Err(Error::Config(format!("R must be positive, got {r}")));
    }
    Ok(r)
}

// ---------------------------------------------------------------- demo

#[derive(Debug, Clone)]
pub struct DemoParams {
    pub kernel: KernelSpec,
    pub domain: BoxDomain,
    pub r: f64,
    pub first_point: FirstPoint,
    pub snapshots: Vec<usize>,
    pub policies: Vec<PolicyKind>,
    pub search: SearchConfig,
    pub plot_points: usize,
}

impl DemoParams {
    pub fn resolve(res: &mut Resolver) -> Result<Self> {
        let kernel = res.kernel("kernel", KernelSpec::matern(2.5, 1.0, 1.0)?)?;
        let domain = res.domain(1, -10.0, 10.0)?;
        if domain.dim() != 1 {
            return Err(Error::Config(format!(
                "demo-adversarial needs a 1-d domain, got d = {}",
                domain.dim()
            )));
        }
        let r = positive_r(res)?;
        let first_point = res.first_point(&FirstPoint::Fixed(vec![0.0]))?;
        let mut snapshots = res.list("demo.snapshots", &[1usize, 3, 6, 10])?;
        snapshots.sort_unstable();
        snapshots.dedup();
        if snapshots.first() == Some(&0) || snapshots.is_empty() {
            return Err(Error::Config(
                "demo.snapshots must be positive step counts".into(),
            ));
        }
        let policies = policy_list(res, "demo.policies", &["lcb", "ei"])?;
        let search = res.search(&SearchConfig::default(), 1)?;
        let plot_points = res.value("demo.plot_points", 1001usize)?;
        if plot_points < 2 {
            return Err(Error::Config("demo.plot_points must be >= 2".into()));
        }
        Ok(DemoParams {
            kernel,
            domain,
            r,
            first_point,
            snapshots,
            policies,
            search,
            plot_points,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DemoSnapshot {
    pub policy: String,
    pub t: usize,
    pub queries: Vec<f64>,
    pub x: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub witness: Vec<f64>,
    /// Where the witness attains `-R·max sigma_t`; `None` when the design
    /// already pins every point.
    pub target: Option<f64>,
    pub adversarial_regret: f64,
}

pub fn demo_adversarial(p: &DemoParams) -> Result<Vec<DemoSnapshot>> {
    let horizon = *p.snapshots.last().expect("validated non-empty");
    let xs: Vec<f64> = (0..p.plot_points)
        .map(|i| search_point(&p.domain, p.plot_points, i)[0])
        .collect();
    let mut out = Vec::new();
    for kind in &p.policies {
        let mut ctx = PolicyContext::new(p.kernel, p.domain.clone(), p.r);
        ctx.search = p.search.clone();
        ctx.first_point = p.first_point.clone();
        let policy = kind.build(ctx, horizon)?;
        let zs = zero_sequence(policy.as_ref(), horizon)?;
        let snaps = p
            .snapshots
            .par_iter()
            .map(|&t| {
                let pts = zs.points[..t].to_vec();
                let post = Posterior::fit(p.kernel, Design::zeros(pts.clone())?, p.r)?;
                let best = search::maximize(|x| post.std(x), &p.domain, &p.search)?;
                let witness = match adversarial_witness(&post, p.r, &best.x) {
                    Ok(w) => Some(w),
                    Err(Error::TargetDegenerate { .. }) => None,
                    Err(e) => return Err(e),
                };
                let mut lower = Vec::with_capacity(xs.len());
                let mut upper = Vec::with_capacity(xs.len());
                let mut wv = Vec::with_capacity(xs.len());
                for &x in &xs {
                    let (lo, hi) = post.envelope(p.r, &[x])?;
                    lower.push(lo);
                    upper.push(hi);
                    wv.push(match &witness {
                        Some(w) => w.eval(&[x])?,
                        None => 0.0,
                    });
                }
                Ok(DemoSnapshot {
                    policy: kind.name().to_string(),
                    t,
                    queries: pts.iter().map(|q| q[0]).collect(),
                    x: xs.clone(),
                    lower,
                    upper,
                    witness: wv,
                    target: witness.as_ref().map(|_| best.x[0]),
                    adversarial_regret: p.r * best.value,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        out.extend(snaps);
    }
    Ok(out)
}

fn render_demo(p: &DemoParams, snaps: &[DemoSnapshot], format: Format) -> Result<Vec<Artifact>> {
    let mut arts = Vec::new();
    let mut summary = Table::new(
        "demo_summary",
        &[
            "policy",
            "t",
            "last_query",
            "witness_target",
            "witness_min",
            "adversarial_regret",
            "max_width",
        ],
    );
    for s in snaps {
        let mut t = Table::new(
            &format!("demo_{}_t{}", s.policy, s.t),
            &["x", "lower", "upper", "witness"],
        );
        for i in 0..s.x.len() {
            t.push(vec![
                s.x[i].into(),
                s.lower[i].into(),
                s.upper[i].into(),
                s.witness[i].into(),
            ]);
        }
        arts.push(t.encode(format)?);
        let max_width = s
            .lower
            .iter()
            .zip(&s.upper)
            .map(|(l, u)| u - l)
            .fold(0.0, f64::max);
        summary.push(vec![
            s.policy.as_str().into(),
            s.t.into(),
            (*s.queries.last().expect("t >= 1")).into(),
            s.target.map_or(Cell::Text(String::new()), Cell::Num),
            s.witness
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min)
                .into(),
            s.adversarial_regret.into(),
            max_width.into(),
        ]);
    }
    arts.push(summary.encode(format)?);
    for kind in &p.policies {
        let name = kind.name();
        let mut plot = Plot::new(
            &format!(
                "Adversarial functions for {name} (R = {})",
                super::output::fmt_num(p.r)
            ),
            "x",
            "value",
        );
        for (i, s) in snaps.iter().filter(|s| s.policy == name).enumerate() {
            let color = PALETTE[i % PALETTE.len()].to_string();
            plot.bands.push(Band {
                label: format!("envelope t={}", s.t),
                x: s.x.clone(),
                lower: s.lower.clone(),
                upper: s.upper.clone(),
                color: color.clone(),
            });
            plot.series.push(Series {
                label: format!("witness t={}", s.t),
                x: s.x.clone(),
                y: s.witness.clone(),
                color,
                dashed: false,
            });
            if Some(&s.t) == p.snapshots.last() {
                plot.markers = s.queries.iter().map(|&q| (q, 0.0)).collect();
            }
        }
        arts.push(Artifact::text(&format!("demo_{name}.svg"), plot.render()));
    }
    Ok(arts)
}

// ---------------------------------------------------------------- regret

#[derive(Debug, Clone)]
pub struct RegretParams {
    pub kernels: Vec<KernelSpec>,
    pub domain: BoxDomain,
    pub r: f64,
    pub budget: usize,
    pub instances: usize,
    pub n_knots: usize,
    pub mode: SampleMode,
    pub policies: Vec<PolicyKind>,
    pub first_point: FirstPoint,
    pub search: SearchConfig,
    pub seed: u64,
}

impl RegretParams {
    pub fn resolve(res: &mut Resolver) -> Result<Self> {
        let names = res.list("regret.kernels", &["matern".to_string(), "se".to_string()])?;
        let kernels = names
            .iter()
            .map(|n| {
                let default = match n.as_str() {
                    "matern" => Some(KernelSpec::matern(2.5, 0.5, 1.0)?),
                    "se" => Some(KernelSpec::se(0.5)?),
                    _ => None,
                };
                res.kernel_named(&format!("kernel.{n}"), n, default)
            })
            .collect::<Result<Vec<_>>>()?;
        if kernels.is_empty() {
            return Err(Error::Config("regret.kernels is empty".into()));
        }
        let domain = res.domain(3, 0.0, 1.0)?;
        let r = positive_r(res)?;
        let budget = res.value("budget", 40usize)?;
        let instances = res.value("sampling.instances", 20usize)?;
        if instances < 2 {
            return Err(Error::Config("sampling.instances must be >= 2".into()));
        }
        if budget == 0 {
            return Err(Error::Config("budget must be >= 1".into()));
        }
        let n_knots = res.value("sampling.n_knots", 20usize)?;
        let mode = res.sample_mode(SampleMode::Rescale)?;
        let policies = policy_list(res, "regret.policies", &["lcb", "ei"])?;
        let first_point = res.first_point(&FirstPoint::Center)?;
        let search = res.search(&SearchConfig::default(), domain.dim())?;
        let seed = res.value("seed", 0u64)?;
        Ok(RegretParams {
            kernels,
            domain,
            r,
            budget,
            instances,
            n_knots,
            mode,
            policies,
            first_point,
            search,
            seed,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RegretCurve {
    pub kernel: String,
    pub policy: String,
    /// Index `t - 1` holds step `t`.
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub adversarial: Vec<f64>,
    /// Simple regret per instance and step.
    pub per_instance: Vec<Vec<f64>>,
}

pub fn regret_compare(p: &RegretParams) -> Result<Vec<RegretCurve>> {
    let mut out = Vec::new();
    for &kernel in &p.kernels {
        let problems = (0..p.instances)
            .into_par_iter()
            .map(|i| {
                let f = sample_rkhs(
                    kernel,
                    &p.domain,
                    p.n_knots,
                    p.r,
                    p.seed.wrapping_add(i as u64),
                    p.mode,
                )?
                .function;
                let truth = ground_truth(&f, &p.domain, &p.search)?;
                Ok((f, truth))
            })
            .collect::<Result<Vec<_>>>()?;
        for kind in &p.policies {
            let mut ctx = PolicyContext::new(kernel, p.domain.clone(), p.r);
            ctx.search = p.search.clone();
            ctx.first_point = p.first_point.clone();
            let policy = kind.build(ctx, p.budget)?;
            let per_instance = problems
                .par_iter()
                .map(|(f, truth)| {
                    let trace = run_policy(policy.as_ref(), f, p.budget, truth)?;
                    Ok(trace
                        .steps
                        .iter()
                        .map(|s| s.simple_regret)
                        .collect::<Vec<f64>>())
                })
                .collect::<Result<Vec<_>>>()?;
            let curve = adversarial_regret_curve(
                policy.as_ref(),
                p.budget,
                kernel,
                &p.domain,
                p.r,
                &p.search,
            )?;
            let (mean, std): (Vec<f64>, Vec<f64>) = (0..p.budget)
                .map(|t| mean_std(&per_instance.iter().map(|row| row[t]).collect::<Vec<_>>()))
                .unzip();
            let adversarial = (1..=p.budget)
                .map(|t| curve.at(t).map_or(f64::NAN, |c| c.adversarial_regret))
                .collect();
            out.push(RegretCurve {
                kernel: kernel.name().to_string(),
                policy: kind.name().to_string(),
                mean,
                std,
                adversarial,
                per_instance,
            });
        }
    }
    Ok(out)
}

fn render_regret(
    p: &RegretParams,
    curves: &[RegretCurve],
    format: Format,
) -> Result<Vec<Artifact>> {
    let mut summary = Table::new(
        "regret_compare",
        &["kernel", "policy", "t", "mean", "std", "adversarial"],
    );
    let mut inst = Table::new(
        "regret_instances",
        &["kernel", "policy", "instance", "seed", "t", "simple_regret"],
    );
    for c in curves {
        for t in 0..c.mean.len() {
            summary.push(vec![
                c.kernel.as_str().into(),
                c.policy.as_str().into(),
                (t + 1).into(),
                c.mean[t].into(),
                c.std[t].into(),
                c.adversarial[t].into(),
            ]);
        }
        for (i, row) in c.per_instance.iter().enumerate() {
            for (t, v) in row.iter().enumerate() {
                inst.push(vec![
                    c.kernel.as_str().into(),
                    c.policy.as_str().into(),
                    i.into(),
                    Cell::Int(p.seed.wrapping_add(i as u64) as i64),
                    (t + 1).into(),
                    (*v).into(),
                ]);
            }
        }
    }
    let mut arts = vec![summary.encode(format)?, inst.encode(format)?];
    for kernel in &p.kernels {
        let name = kernel.name();
        let mut plot = Plot::new(
            &format!("Average vs adversarial simple regret ({name})"),
            "step t",
            "simple regret",
        );
        for (i, c) in curves.iter().filter(|c| c.kernel == name).enumerate() {
            let color = PALETTE[i % PALETTE.len()].to_string();
            let ts: Vec<f64> = (1..=c.mean.len()).map(|t| t as f64).collect();
            plot.bands.push(Band {
                label: format!("{} mean ± std", c.policy),
                x: ts.clone(),
                lower: c.mean.iter().zip(&c.std).map(|(m, s)| m - s).collect(),
                upper: c.mean.iter().zip(&c.std).map(|(m, s)| m + s).collect(),
                color: color.clone(),
            });
            plot.series.push(Series {
                label: format!("{} mean", c.policy),
                x: ts.clone(),
                y: c.mean.clone(),
                color: color.clone(),
                dashed: false,
            });
            plot.series.push(Series {
                label: format!("{} adversarial", c.policy),
                x: ts,
                y: c.adversarial.clone(),
                color,
                dashed: true,
            });
        }
        arts.push(Artifact::text(&format!("regret_{name}.svg"), plot.render()));
    }
    Ok(arts)
}

// ---------------------------------------------------------------- rates

#[derive(Debug, Clone)]
pub struct RateParams {
    pub kernel: KernelSpec,
    pub domain: BoxDomain,
    pub r: f64,
    pub grid_sizes: Vec<usize>,
    pub search: SearchConfig,
}

impl RateParams {
    pub fn resolve(res: &mut Resolver) -> Result<Self> {
        let kernel = res.kernel("kernel", KernelSpec::matern(2.5, 1.0, 1.0)?)?;
        let domain = res.domain(1, 0.0, 1.0)?;
        if !(1..=2).contains(&domain.dim()) {
            return Err(Error::Config(format!(
                "rate-fit supports d = 1 or 2, got {}",
                domain.dim()
            )));
        }
        let r = positive_r(res)?;
        let default_sizes: &[usize] = match kernel {
            KernelSpec::Se { .. } => &[4, 6, 8, 12, 16],
            _ => &[8, 16, 32, 64],
        };
        let grid_sizes = res.list("rate.grid_sizes", default_sizes)?;
        if grid_sizes.is_empty()
            || grid_sizes[0] == 0
            || grid_sizes.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::Config(
                "rate.grid_sizes must be positive and strictly increasing".into(),
            ));
        }
        let search = res.search(&SearchConfig::default(), domain.dim())?;
        Ok(RateParams {
            kernel,
            domain,
            r,
            grid_sizes,
            search,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum RateStatus {
    Ok,
    /// `max sigma` is at or below `10·sqrt(jitter_used)`.
    Floor,
    IllConditioned,
}

impl RateStatus {
    fn name(&self) -> &'static str {
        match self {
            RateStatus::Ok => "ok",
            RateStatus::Floor => "floor",
            RateStatus::IllConditioned => "ill_conditioned",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RateRow {
    pub n: usize,
    pub t: usize,
    pub max_sigma: f64,
    /// `2R·max sigma`.
    pub bound: f64,
    pub jitter_used: f64,
    pub floor: f64,
    pub status: RateStatus,
}

#[derive(Debug, Clone, Serialize)]
pub struct RateFit {
    pub rows: Vec<RateRow>,
    /// Log-log slope of `max sigma` against `N` over rows above the floor.
    pub slope: Option<f64>,
    /// `(N, ln maxσ(N) - ln maxσ(2N))` for pairs above the floor.
    pub decrements: Vec<(usize, f64)>,
    pub accelerating: bool,
}

pub fn rate_fit(p: &RateParams) -> Result<RateFit> {
    let rows = p
        .grid_sizes
        .par_iter()
        .map(|&n| {
            let pts = grid(&p.domain, n, DEFAULT_GRID_CAP)?;
            let t = pts.len();
            let post = match Posterior::fit(p.kernel, Design::zeros(pts)?, p.r) {
                Ok(post) => post,
                Err(Error::IllConditioned(_)) => {
                    return Ok(RateRow {
                        n,
                        t,
                        max_sigma: f64::NAN,
                        bound: f64::NAN,
                        jitter_used: f64::NAN,
                        floor: f64::NAN,
                        status: RateStatus::IllConditioned,
                    })
                }
                Err(e) => return Err(e),
            };
            let best = search::maximize(|x| post.std(x), &p.domain, &p.search)?;
            let jitter = post.jitter_used();
            let floor = 10.0 * jitter.sqrt();
            Ok(RateRow {
                n,
                t,
                max_sigma: best.value,
                bound: 2.0 * p.r * best.value,
                jitter_used: jitter,
                floor,
                status: if best.value <= floor {
                    RateStatus::Floor
                } else {
                    RateStatus::Ok
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let ok: Vec<&RateRow> = rows.iter().filter(|r| r.status == RateStatus::Ok).collect();
    let xs: Vec<f64> = ok.iter().map(|r| r.n as f64).collect();
    let ys: Vec<f64> = ok.iter().map(|r| r.max_sigma).collect();
    let slope = loglog_slope(&xs, &ys);
    let sizes: Vec<usize> = ok.iter().map(|r| r.n).collect();
    let decrements = doubling_decrements(&sizes, &ys);
    let accelerating = decrements.len() >= 2 && decrements.windows(2).all(|w| w[1].1 > w[0].1);
    Ok(RateFit {
        rows,
        slope,
        decrements,
        accelerating,
    })
}

fn render_rate(p: &RateParams, fit: &RateFit, format: Format) -> Result<Vec<Artifact>> {
    let mut t = Table::new(
        "rate_fit",
        &[
            "N",
            "t",
            "max_sigma",
            "bound",
            "jitter_used",
            "floor",
            "status",
        ],
    );
    for r in &fit.rows {
        t.push(vec![
            r.n.into(),
            r.t.into(),
            r.max_sigma.into(),
            r.bound.into(),
            r.jitter_used.into(),
            r.floor.into(),
            r.status.name().into(),
        ]);
    }
    let mut s = Table::new("rate_summary", &["kernel", "statistic", "value"]);
    let kname = p.kernel.name();
    s.push(vec![
        kname.into(),
        "loglog_slope".into(),
        fit.slope.unwrap_or(f64::NAN).into(),
    ]);
    if let Some(nu) = p.kernel.nu() {
        s.push(vec![
            kname.into(),
            "reference_slope".into(),
            (-nu / p.domain.dim() as f64).into(),
        ]);
    }
    for (n, d) in &fit.decrements {
        s.push(vec![
            kname.into(),
            format!("doubling_decrement_N{n}").into(),
            (*d).into(),
        ]);
    }
    s.push(vec![
        kname.into(),
        "accelerating".into(),
        Cell::Int(fit.accelerating as i64),
    ]);

    let ok: Vec<&RateRow> = fit
        .rows
        .iter()
        .filter(|r| r.max_sigma.is_finite() && r.max_sigma > 0.0)
        .collect();
    let mut plot = Plot::new(
        &format!("Worst-case posterior std on a uniform grid ({kname})"),
        "ln N",
        "ln max sigma",
    );
    plot.series.push(Series {
        label: "ln max sigma".into(),
        x: ok.iter().map(|r| (r.n as f64).ln()).collect(),
        y: ok.iter().map(|r| r.max_sigma.ln()).collect(),
        color: PALETTE[0].into(),
        dashed: false,
    });
    plot.markers = ok
        .iter()
        .map(|r| ((r.n as f64).ln(), r.max_sigma.ln()))
        .collect();
    Ok(vec![
        t.encode(format)?,
        s.encode(format)?,
        Artifact::text("rate_fit.svg", plot.render()),
    ])
}

// ---------------------------------------------------------------- certificate

#[derive(Debug, Clone)]
pub struct CheckParams {
    pub kernel: KernelSpec,
    pub domain: BoxDomain,
    pub r: f64,
    pub eps: Vec<f64>,
    pub policies: Vec<PolicyKind>,
    pub first_point: FirstPoint,
    pub search: SearchConfig,
    pub candidates: CandidateConfig,
    pub seed: u64,
}

impl CheckParams {
    pub fn resolve(res: &mut Resolver) -> Result<Self> {
        let kernel = res.kernel("kernel", KernelSpec::matern(2.5, 1.0, 1.0)?)?;
        let domain = res.domain(1, 0.0, 1.0)?;
        let r = positive_r(res)?;
        let eps = res.list("check.eps", &[0.2, 0.1, 0.05])?;
        let policies = policy_list(res, "check.policies", &["grid", "lcb", "ei"])?;
        let first_point = res.first_point(&FirstPoint::Center)?;
        let search = res.search(&SearchConfig::default(), domain.dim())?;
        let candidates = candidate_config(res)?;
        let seed = res.value("seed", 0u64)?;
        Ok(CheckParams {
            kernel,
            domain,
            r,
            eps,
            policies,
            first_point,
            search,
            candidates,
            seed,
        })
    }
}

pub fn lower_bound_check(p: &CheckParams) -> Result<(EntropyReport, Vec<CertificateReport>)> {
    let report = entropy_report(p.kernel, &p.domain, p.r, &p.eps, &p.candidates, p.seed)?;
    let jobs: Vec<(&PolicyKind, usize)> = p
        .policies
        .iter()
        .flat_map(|k| (0..report.rows.len()).map(move |i| (k, i)))
        .collect();
    let certs = jobs
        .par_iter()
        .map(|&(kind, i)| {
            let row = &report.rows[i];
            let mut ctx = PolicyContext::new(p.kernel, p.domain.clone(), p.r);
            ctx.search = p.search.clone();
            ctx.first_point = p.first_point.clone();
            let policy = kind.build(ctx, row.lower_bound_steps)?;
            certify_theorem1(
                policy.as_ref(),
                p.kernel,
                &p.domain,
                p.r,
                row.eps,
                row.packing_count,
                &p.search,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((report, certs))
}

fn render_check(
    report: &EntropyReport,
    certs: &[CertificateReport],
    format: Format,
) -> Result<Vec<Artifact>> {
    let mut t = Table::new(
        "lower_bound_check",
        &[
            "policy",
            "eps",
            "packing_count",
            "t_star",
            "adversarial_regret",
            "threshold",
            "verdict",
        ],
    );
    for c in certs {
        t.push(vec![
            c.policy_id.as_str().into(),
            c.eps.into(),
            c.packing_count.into(),
            c.t_star.into(),
            c.adversarial_regret.into(),
            c.threshold.into(),
            c.verdict().into(),
        ]);
    }
    Ok(vec![
        t.encode(format)?,
        entropy_table(report).encode(format)?,
    ])
}

// ---------------------------------------------------------------- quadratic

#[derive(Debug, Clone)]
pub struct QuadParams {
    pub domain: BoxDomain,
    pub matrix: Vec<Vec<f64>>,
    pub samples: Vec<Vec<f64>>,
    pub search: SearchConfig,
}

impl QuadParams {
    pub fn resolve(res: &mut Resolver) -> Result<Self> {
        let domain = res.domain(2, -1.0, 1.0)?;
        let d = domain.dim();
        let identity: Vec<Vec<f64>> = (0..d)
            .map(|i| (0..d).map(|j| (i == j) as u8 as f64).collect())
            .collect();
        let matrix = res.matrix("quadratic.matrix", &identity)?;
        if matrix.len() != d || matrix.iter().any(|row| row.len() != d) {
            return Err(Error::Config(format!("quadratic.matrix must be {d}x{d}")));
        }
        if (0..d).any(|i| (0..i).any(|j| matrix[i][j] != matrix[j][i])) {
            return Err(Error::Config("quadratic.matrix must be symmetric".into()));
        }
        let default_samples: Vec<Vec<f64>> = if d == 2 {
            vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]
        } else {
            // Generic: e_i and e_i + e_j.
            let mut s = Vec::new();
            for i in 0..d {
                for j in i..d {
                    let mut x = vec![0.0; d];
                    x[i] = 1.0;
                    x[j] = 1.0;
                    s.push(x);
                }
            }
            s
        };
        let samples = res.matrix("quadratic.samples", &default_samples)?;
        if samples.is_empty() || samples.iter().any(|x| x.len() != d) {
            return Err(Error::Config(format!(
                "quadratic.samples must be non-empty points of dimension {d}"
            )));
        }
        let search = res.search(&SearchConfig::default(), d)?;
        Ok(QuadParams {
            domain,
            matrix,
            samples,
            search,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct QuadraticRecovery {
    /// `sum_i alpha_i x_i x_i^T`, the matrix of the recovered quadratic form.
    pub recovered_matrix: Vec<Vec<f64>>,
    pub matrix_error: f64,
    pub recovered_min: f64,
    pub recovered_argmin: Vec<f64>,
    pub true_min: f64,
    pub error: f64,
    pub coefficients: usize,
    pub enough_samples: bool,
    /// Whether `k(x,x) <= 1` holds on the domain.
    pub kernel_bounded_by_one: bool,
}

fn quad_form(a: &[Vec<f64>], x: &[f64]) -> f64 {
    a.iter()
        .zip(x)
        .map(|(row, xi)| xi * row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
        .sum()
}

pub fn quadratic_recovery(p: &QuadParams) -> Result<QuadraticRecovery> {
    let d = p.domain.dim();
    let kernel = KernelSpec::quadratic();
    let values: Vec<f64> = p.samples.iter().map(|x| quad_form(&p.matrix, x)).collect();
    let design = Design::new_in(&p.domain, p.samples.clone(), values)?;
    let post = Posterior::fit_unbounded(kernel, design)?;
    if post.jitter_used() > 0.0 {
        return Err(Error::IllConditioned(format!(
            "quadratic samples are not generic (Gram matrix needed jitter {:e})",
            post.jitter_used()
        )));
    }
    let mut rec = vec![vec![0.0; d]; d];
    for (x, a) in p.samples.iter().zip(post.alpha()) {
        for i in 0..d {
            for j in 0..d {
                rec[i][j] += a * x[i] * x[j];
            }
        }
    }
    let matrix_error = rec
        .iter()
        .flatten()
        .zip(p.matrix.iter().flatten())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let recovered = search::minimize(|x| post.mean(x), &p.domain, &p.search)?;
    let truth = search::minimize(|x| Ok(quad_form(&p.matrix, x)), &p.domain, &p.search)?;
    let coefficients = d * (d + 1) / 2;
    Ok(QuadraticRecovery {
        recovered_matrix: rec,
        matrix_error,
        recovered_min: recovered.value,
        recovered_argmin: recovered.x,
        true_min: truth.value,
        error: (recovered.value - truth.value).abs(),
        coefficients,
        enough_samples: p.samples.len() >= coefficients,
        kernel_bounded_by_one: kernel.bounded_by_one_on(&p.domain),
    })
}

fn render_quadratic(q: &QuadraticRecovery, format: Format) -> Result<Vec<Artifact>> {
    let mut t = Table::new(
        "quadratic_recovery",
        &[
            "recovered_min",
            "true_min",
            "error",
            "recovered_argmin",
            "matrix_error",
            "coefficients",
            "enough_samples",
            "kernel_bounded_by_one",
        ],
    );
    t.push(vec![
        q.recovered_min.into(),
        q.true_min.into(),
        q.error.into(),
        fmt_point(&q.recovered_argmin).into(),
        q.matrix_error.into(),
        q.coefficients.into(),
        Cell::Int(q.enough_samples as i64),
        Cell::Int(q.kernel_bounded_by_one as i64),
    ]);
    Ok(vec![t.encode(format)?])
}

// ---------------------------------------------------------------- entropy

#[derive(Debug, Clone)]
pub struct EntropyParams {
    pub kernel: KernelSpec,
    pub domain: BoxDomain,
    pub r: f64,
    pub eps: Vec<f64>,
    pub candidates: CandidateConfig,
    pub seed: u64,
}

impl EntropyParams {
    pub fn resolve(res: &mut Resolver) -> Result<Self> {
        let kernel = res.kernel("kernel", KernelSpec::matern(2.5, 1.0, 1.0)?)?;
        let domain = res.domain(1, 0.0, 1.0)?;
        let r = positive_r(res)?;
        let eps = res.list("entropy.eps", &[0.2, 0.1, 0.05])?;
        let candidates = candidate_config(res)?;
        let seed = res.value("seed", 0u64)?;
        Ok(EntropyParams {
            kernel,
            domain,
            r,
            eps,
            candidates,
            seed,
        })
    }
}

fn entropy_table(report: &EntropyReport) -> Table {
    let mut t = Table::new(
        "entropy",
        &[
            "eps",
            "packing_eps",
            "packing_count",
            "log_packing",
            "lower_bound_steps",
        ],
    );
    for r in &report.rows {
        t.push(vec![
            r.eps.into(),
            r.packing_eps.into(),
            r.packing_count.into(),
            r.log_packing.into(),
            r.lower_bound_steps.into(),
        ]);
    }
    t
}

fn render_entropy(report: &EntropyReport, format: Format) -> Result<Vec<Artifact>> {
    let mut arts = vec![entropy_table(report).encode(format)?];
    arts.push(Artifact::json("entropy_report.json", report)?);
    Ok(arts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> Config {
        Config::parse(text).unwrap()
    }

    #[test]
    fn demo_rejects_2d() {
        let c = cfg("domain.dim = 2");
        assert!(matches!(
            run(Command::DemoAdversarial, &c, Format::Csv),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn quadratic_default_is_exact() {
        let out = run(Command::QuadraticRecovery, &cfg(""), Format::Csv).unwrap();
        let text = String::from_utf8(out.artifacts[0].bytes.clone()).unwrap();
        assert!(text.starts_with("recovered_min,true_min,error"));
        let p = QuadParams::resolve(&mut Resolver::new(&cfg(""))).unwrap();
        let q = quadratic_recovery(&p).unwrap();
        assert!(q.error <= 1e-8);
        assert!(q.matrix_error <= 1e-10);
        assert!(!q.kernel_bounded_by_one);
    }

    #[test]
    fn quadratic_zero_matrix_and_degenerate_samples() {
        let p =
            QuadParams::resolve(&mut Resolver::new(&cfg("quadratic.matrix = 0,0;0,0"))).unwrap();
        let q = quadratic_recovery(&p).unwrap();
        assert_eq!(q.recovered_min, 0.0);
        assert_eq!(q.matrix_error, 0.0);
        let p = QuadParams::resolve(&mut Resolver::new(&cfg(
            "quadratic.samples = 1,0;0.5,0;0,1",
        )))
        .unwrap();
        assert!(matches!(
            quadratic_recovery(&p),
            Err(Error::IllConditioned(_))
        ));
    }

    #[test]
    fn rate_fit_validates_sizes() {
        let c = cfg("rate.grid_sizes = 8, 4");
        assert!(RateParams::resolve(&mut Resolver::new(&c)).is_err());
        let c = cfg("domain.dim = 3");
        assert!(RateParams::resolve(&mut Resolver::new(&c)).is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let c = cfg("kernel.lenghtscale = 1");
        assert!(matches!(
            run(Command::QuadraticRecovery, &c, Format::Csv),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn command_names_round_trip() {
        for c in Command::ALL {
            assert_eq!(c.name().parse::<Command>().unwrap(), c);
        }
    }
}
