//! Empirical packing numbers of the RKHS ball restricted to the domain.
//!
//! Candidate ball functions are tabulated on an evaluation grid and packed
//! greedily in the grid sup-norm. Grid sup-distances under-estimate true sup
//! distances and the candidates are a subset of the ball, so every count is
//! a certified lower estimate of the packing number. Nothing here claims an
//! upper bound.

use serde::Serialize;

use crate::adversary::lower_bound_steps;
use crate::error::{Error, Result};
use crate::interpolate::{sample_rkhs, RkhsFunction, SampleMode, NORM_BUDGET_SLACK};
use crate::kernels::{BoxDomain, KernelSpec};
use crate::search::search_point;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Provenance {
    Zero,
    Translate {
        center: Vec<f64>,
        sign: f64,
    },
    Interpolant {
        seed: u64,
        n_knots: usize,
        norm: f64,
    },
    /// Supplied directly as tabulated values.
    External,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CandidateStrategy {
    Translates,
    Interpolants,
    Mixed,
}

impl std::str::FromStr for CandidateStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "translates" => Ok(CandidateStrategy::Translates),
            "interpolants" => Ok(CandidateStrategy::Interpolants),
            "mixed" => Ok(CandidateStrategy::Mixed),
            other => Err(Error::Config(format!(
                "unknown candidate strategy '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateConfig {
    pub strategy: CandidateStrategy,
    pub count: usize,
    /// Knots per random interpolant.
    pub n_knots: usize,
    /// Evaluation grid points per dimension; `None` picks 512 (d=1), 64 (d=2), 16 beyond.
    pub eval_points_per_dim: Option<usize>,
    pub include_zero: bool,
}

impl Default for CandidateConfig {
    fn default() -> Self {
        CandidateConfig {
            strategy: CandidateStrategy::Mixed,
            count: 200,
            n_knots: 8,
            eval_points_per_dim: None,
            include_zero: true,
        }
    }
}

impl CandidateConfig {
    pub fn eval_resolution(&self, dim: usize) -> usize {
        self.eval_points_per_dim.unwrap_or(match dim {
            1 => 512,
            2 => 64,
            _ => 16,
        })
    }
}

/// Candidate functions tabulated on a common grid.
#[derive(Debug, Clone, Serialize)]
pub struct FunctionTable {
    pub eval_grid: Vec<Vec<f64>>,
    pub rows: Vec<Vec<f64>>,
    pub norms: Vec<f64>,
    pub provenance: Vec<Provenance>,
}

impl FunctionTable {
    /// Table from explicit rows on an explicit grid.
    pub fn from_rows(
        eval_grid: Vec<Vec<f64>>,
        rows: Vec<Vec<f64>>,
        norms: Vec<f64>,
    ) -> Result<Self> {
        if rows.len() != norms.len() || rows.iter().any(|r| r.len() != eval_grid.len()) {
            return Err(Error::InvalidParameter(
                "rows must match the grid and the norm list".into(),
            ));
        }
        let provenance = vec![Provenance::External; rows.len()];
        Ok(FunctionTable {
            eval_grid,
            rows,
            norms,
            provenance,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Max-over-grid distance between rows `i` and `j`.
    pub fn sup_distance(&self, i: usize, j: usize) -> f64 {
        self.rows[i]
            .iter()
            .zip(&self.rows[j])
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    fn push(&mut self, f: &RkhsFunction, r: f64, provenance: Provenance) -> Result<()> {
        if f.norm() > r * (1.0 + NORM_BUDGET_SLACK) {
            return Err(Error::NormBudgetExceeded {
                norm_sq: f.norm() * f.norm(),
                budget: r * r,
            });
        }
        let row = self.eval_grid.iter().map(|x| f.eval_unchecked(x)).collect();
        self.rows.push(row);
        self.norms.push(f.norm());
        self.provenance.push(provenance);
        Ok(())
    }
}

/// Tabulate candidate members of the ball of radius `r`.
pub fn candidate_ball_functions(
    kernel: KernelSpec,
    domain: &BoxDomain,
    r: f64,
    config: &CandidateConfig,
    seed: u64,
) -> Result<FunctionTable> {
    if config.count == 0 {
        return Err(Error::InvalidParameter(
            "candidate count must be >= 1".into(),
        ));
    }
    let d = domain.dim();
    let m = config.eval_resolution(d);
    let grid_size =
        m.checked_pow(d as u32)
            .filter(|n| *n <= 4_000_000)
            .ok_or(Error::SizeOverflow {
                requested: (m as u128).saturating_pow(d as u32),
                cap: 4_000_000,
            })?;
    let eval_grid = (0..grid_size).map(|i| search_point(domain, m, i)).collect();
    let mut table = FunctionTable {
        eval_grid,
        rows: Vec::new(),
        norms: Vec::new(),
        provenance: Vec::new(),
    };

    if config.include_zero {
        table.push(&RkhsFunction::zero(kernel), r, Provenance::Zero)?;
    }
    let (n_translates, n_interp) = match config.strategy {
        CandidateStrategy::Translates => (config.count, 0),
        CandidateStrategy::Interpolants => (0, config.count),
        CandidateStrategy::Mixed => (config.count.div_ceil(2), config.count / 2),
    };

    if n_translates > 0 {
        let n_centers = n_translates.div_ceil(2);
        let mut per_dim = 1usize;
        while per_dim.pow(d as u32) < n_centers {
            per_dim += 1;
        }
        let mut emitted = 0;
        'outer: for i in 0..per_dim.pow(d as u32) {
            let c = search_point(domain, per_dim, i);
            let scale = r / kernel.diag(&c).sqrt();
            for sign in [1.0, -1.0] {
                if emitted == n_translates {
                    break 'outer;
                }
                let f = RkhsFunction::new(kernel, vec![c.clone()], vec![sign * scale])?;
                table.push(
                    &f,
                    r,
                    Provenance::Translate {
                        center: c.clone(),
                        sign,
                    },
                )?;
                emitted += 1;
            }
        }
    }
    for i in 0..n_interp {
        let s = seed.wrapping_add(i as u64);
        let sample = sample_rkhs(kernel, domain, config.n_knots, r, s, SampleMode::Rescale)?;
        let norm = sample.function.norm();
        table.push(
            &sample.function,
            r,
            Provenance::Interpolant {
                seed: s,
                n_knots: config.n_knots,
                norm,
            },
        )?;
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PackingEstimate {
    pub eps: f64,
    pub count: usize,
    pub selected_indices: Vec<usize>,
    pub grid_resolution: usize,
    pub candidate_count: usize,
}

/// Greedy eps-packing scanning rows by descending norm, then insertion order.
pub fn greedy_packing(table: &FunctionTable, eps: f64) -> Result<PackingEstimate> {
    let mut order: Vec<usize> = (0..table.len()).collect();
    order.sort_by(|&a, &b| table.norms[b].total_cmp(&table.norms[a]));
    greedy_packing_in_order(table, eps, &order)
}

/// Greedy eps-packing with an explicit scan order.
pub fn greedy_packing_in_order(
    table: &FunctionTable,
    eps: f64,
    order: &[usize],
) -> Result<PackingEstimate> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "eps must be positive, got {eps}"
        )));
    }
    let mut kept: Vec<usize> = Vec::new();
    for &i in order {
        if kept.iter().all(|&j| table.sup_distance(i, j) > eps) {
            kept.push(i);
        }
    }
    Ok(PackingEstimate {
        eps,
        count: kept.len(),
        selected_indices: kept,
        grid_resolution: table.eval_grid.len(),
        candidate_count: table.len(),
    })
}

/// Re-check that the selected rows are pairwise more than `eps` apart.
pub fn verify_packing(table: &FunctionTable, est: &PackingEstimate) -> bool {
    let s = &est.selected_indices;
    (0..s.len()).all(|a| (0..a).all(|b| table.sup_distance(s[a], s[b]) > est.eps))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RateFamily {
    SeLower,
    SeUpper,
    MaternLower,
    MaternUpper,
}

impl std::str::FromStr for RateFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "se_lower" => Ok(RateFamily::SeLower),
            "se_upper" => Ok(RateFamily::SeUpper),
            "matern_lower" => Ok(RateFamily::MaternLower),
            "matern_upper" => Ok(RateFamily::MaternUpper),
            other => Err(Error::Config(format!("unknown rate family '{other}'"))),
        }
    }
}

/// Step-count rate shapes (no constants):
/// SE `log(R/eps)^{d/2-1}` / `log(R/eps)^d`,
/// Matérn `(R/eps)^{d/(nu+d/2)} / log(R/eps)` / `(R/eps)^{d/nu}`.
pub fn rate_theoretical(family: RateFamily, r: f64, eps: f64, d: usize, nu: f64) -> Result<f64> {
    if !(eps > 0.0) || eps >= r {
        return Err(Error::OutOfRegime { eps, limit: r });
    }
    let ratio = r / eps;
    let log = ratio.ln();
    let d = d as f64;
    let matern = matches!(family, RateFamily::MaternLower | RateFamily::MaternUpper);
    if matern && !(nu > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "nu must be positive, got {nu}"
        )));
    }
    Ok(match family {
        RateFamily::SeLower => log.powf(d / 2.0 - 1.0),
        RateFamily::SeUpper => log.powf(d),
        RateFamily::MaternLower => ratio.powf(d / (nu + d / 2.0)) / log,
        RateFamily::MaternUpper => ratio.powf(d / nu),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyRow {
    pub eps: f64,
    pub packing_eps: f64,
    pub packing_count: usize,
    pub log_packing: f64,
    pub lower_bound_steps: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct EntropyReport {
    pub label: &'static str,
    pub rows: Vec<EntropyRow>,
    pub candidate_count: usize,
    pub grid_resolution: usize,
    pub provenance: Vec<Provenance>,
}

/// Packing counts at `8·eps` for each `eps`, on one shared candidate table.
pub fn entropy_report(
    kernel: KernelSpec,
    domain: &BoxDomain,
    r: f64,
    eps_list: &[f64],
    config: &CandidateConfig,
    seed: u64,
) -> Result<EntropyReport> {
    for &eps in eps_list {
        if !(eps > 0.0) || eps >= r / 4.0 {
            return Err(Error::OutOfRegime {
                eps,
                limit: r / 4.0,
            });
        }
    }
    let table = candidate_ball_functions(kernel, domain, r, config, seed)?;
    let rows = eps_list
        .iter()
        .map(|&eps| {
            let est = greedy_packing(&table, 8.0 * eps)?;
            let log_packing = (est.count as f64).ln();
            Ok(EntropyRow {
                eps,
                packing_eps: 8.0 * eps,
                packing_count: est.count,
                log_packing,
                lower_bound_steps: lower_bound_steps(log_packing, r, eps)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EntropyReport {
        label: "empirical lower estimate",
        rows,
        candidate_count: table.len(),
        grid_resolution: table.eval_grid.len(),
        provenance: table.provenance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table_of(rows: Vec<Vec<f64>>) -> FunctionTable {
        let m = rows[0].len();
        let grid = (0..m).map(|i| vec![i as f64]).collect();
        let norms = vec![1.0; rows.len()];
        FunctionTable::from_rows(grid, rows, norms).unwrap()
    }

    #[test]
    fn packing_definition_example() {
        // d(0,1) = 0.5, d(0,2) = 0.3, d(1,2) = 0.5 (as a sup over one coordinate pair).
        let t = table_of(vec![vec![0.0, 0.0], vec![0.5, 0.0], vec![0.3, 0.0]]);
        assert!((t.sup_distance(0, 1) - 0.5).abs() < 1e-15);
        assert!((t.sup_distance(0, 2) - 0.3).abs() < 1e-15);
        let est = greedy_packing(&t, 0.4).unwrap();
        assert_eq!(est.count, 2);
        assert!(verify_packing(&t, &est));
        let big = greedy_packing(&t, 10.0).unwrap();
        assert_eq!(big.count, 1);
        assert!(greedy_packing(&t, 0.0).is_err());
    }

    #[test]
    fn single_translate_row() {
        let k = KernelSpec::se(0.5).unwrap();
        let dom = BoxDomain::unit(1).unwrap();
        let cfg = CandidateConfig {
            strategy: CandidateStrategy::Translates,
            count: 1,
            eval_points_per_dim: Some(11),
            include_zero: true,
            ..Default::default()
        };
        let t = candidate_ball_functions(k, &dom, 2.0, &cfg, 0).unwrap();
        assert_eq!(t.len(), 2);
        let c = match &t.provenance[1] {
            Provenance::Translate { center, .. } => center.clone(),
            p => panic!("unexpected {p:?}"),
        };
        assert_eq!(c, vec![0.5]);
        for (x, v) in t.eval_grid.iter().zip(&t.rows[1]) {
            let expected = 2.0 * (-(x[0] - 0.5f64).powi(2) / 0.25).exp();
            assert!((v - expected).abs() < 1e-14);
        }
        assert!((t.norms[1] - 2.0).abs() < 1e-12);
        assert!((t.sup_distance(0, 1) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rate_examples() {
        assert_eq!(
            rate_theoretical(RateFamily::SeLower, 1.0, 0.01, 2, 0.0).unwrap(),
            1.0
        );
        assert!(
            (rate_theoretical(RateFamily::MaternUpper, 1.0, 0.1, 1, 1.0).unwrap() - 10.0).abs()
                < 1e-12
        );
        let e = std::f64::consts::E;
        let v = rate_theoretical(RateFamily::MaternLower, e, 1.0, 2, 1.0).unwrap();
        assert!((v - e).abs() < 1e-12);
        assert!(matches!(
            rate_theoretical(RateFamily::SeUpper, 1.0, 1.0, 1, 0.0),
            Err(Error::OutOfRegime { .. })
        ));
    }

    #[test]
    fn report_rejects_coarse_eps() {
        let k = KernelSpec::matern(2.5, 1.0, 1.0).unwrap();
        let dom = BoxDomain::unit(1).unwrap();
        let err = entropy_report(k, &dom, 1.0, &[0.3], &CandidateConfig::default(), 0);
        assert!(matches!(err, Err(Error::OutOfRegime { .. })));
    }
}
