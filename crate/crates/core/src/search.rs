//! Deterministic acquisition search: dense grid, then coordinate-wise
//! golden-section polish around the best grid point.
//!
//! Ties on the grid resolve to the lowest lexicographic index, and the polish
//! only moves on strict improvement, so the result is a pure function of the
//! objective and the configuration.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::BoxDomain;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Grid points per dimension; `None` picks the default for the dimension.
    pub points_per_dim: Option<usize>,
    pub polish_iters: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            points_per_dim: None,
            polish_iters: 20,
        }
    }
}

impl SearchConfig {
    pub fn with_resolution(points_per_dim: usize) -> Self {
        SearchConfig {
            points_per_dim: Some(points_per_dim),
            ..Default::default()
        }
    }

    /// 401 for d=1, 101 for d=2, 41 for d=3, 11 beyond.
    pub fn resolution(&self, dim: usize) -> usize {
        self.points_per_dim.unwrap_or(match dim {
            1 => 401,
            2 => 101,
            3 => 41,
            _ => 11,
        })
    }

    /// A configuration `factor` times finer, used for ground-truth minima.
    pub fn refined(&self, dim: usize, factor: usize) -> Self {
        SearchConfig {
            points_per_dim: Some((self.resolution(dim) - 1) * factor + 1),
            polish_iters: self.polish_iters,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub x: Vec<f64>,
    pub value: f64,
    /// Lexicographic index of the best grid point before polishing.
    pub grid_index: usize,
}

/// The inclusive search lattice: `n` evenly spaced values per coordinate
/// including both box endpoints (`n = 1` uses the center).
pub fn search_point(domain: &BoxDomain, n: usize, index: usize) -> Vec<f64> {
    let d = domain.dim();
    let mut digits = vec![0usize; d];
    let mut rest = index;
    for k in (0..d).rev() {
        digits[k] = rest % n;
        rest /= n;
    }
    digits
        .iter()
        .zip(domain.lower().iter().zip(domain.upper()))
        .map(|(&k, (l, u))| {
            if n == 1 {
                0.5 * (l + u)
            } else {
                l + (u - l) * (k as f64 / (n - 1) as f64)
            }
        })
        .collect()
}

const SEARCH_CAP: usize = 5_000_000;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Minimize `objective` over the box.
pub fn minimize<F>(objective: F, domain: &BoxDomain, config: &SearchConfig) -> Result<SearchResult>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let d = domain.dim();
    let n = config.resolution(d).max(1);
    let count = (n as u128).checked_pow(d as u32).unwrap_or(u128::MAX);
    if count > SEARCH_CAP as u128 {
        return Err(Error::SizeOverflow {
            requested: count,
            cap: SEARCH_CAP,
        });
    }
    let count = count as usize;

    let values: Vec<f64> = (0..count)
        .into_par_iter()
        .with_min_len(256)
        .map(|i| objective(&search_point(domain, n, i)))
        .collect::<Result<_>>()?;

    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] || (values[best].is_nan() && !v.is_nan()) {
            best = i;
        }
    }
    let mut x = search_point(domain, n, best);
    let mut value = values[best];

    if config.polish_iters > 0 && n > 1 {
        for k in 0..d {
            let (lo_b, hi_b) = (domain.lower()[k], domain.upper()[k]);
            let h = (hi_b - lo_b) / (n - 1) as f64;
            let mut a = (x[k] - h).max(lo_b);
            let mut b = (x[k] + h).min(hi_b);
            let mut probe = x.clone();
            let mut eval_at = |t: f64| -> Result<f64> {
                probe[k] = t;
                objective(&probe)
            };
            let mut c = b - INV_PHI * (b - a);
            let mut e = a + INV_PHI * (b - a);
            let mut fc = eval_at(c)?;
            let mut fe = eval_at(e)?;
            for _ in 0..config.polish_iters {
                if fc < fe {
                    b = e;
                    e = c;
                    fe = fc;
                    c = b - INV_PHI * (b - a);
                    fc = eval_at(c)?;
                } else {
                    a = c;
                    c = e;
                    fc = fe;
                    e = a + INV_PHI * (b - a);
                    fe = eval_at(e)?;
                }
            }
            let (t, ft) = if fc < fe { (c, fc) } else { (e, fe) };
            if ft < value {
                x[k] = t;
                value = ft;
            }
        }
    }
    Ok(SearchResult {
        x,
        value,
        grid_index: best,
    })
}

/// Maximize `objective`; the returned `value` is the maximum.
pub fn maximize<F>(objective: F, domain: &BoxDomain, config: &SearchConfig) -> Result<SearchResult>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let mut r = minimize(|x| objective(x).map(|v| -v), domain, config)?;
    r.value = -r.value;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_interior_minimum_beyond_grid() {
        let dom = BoxDomain::unit(2).unwrap();
        let cfg = SearchConfig::with_resolution(11);
        let r = minimize(
            |x| Ok((x[0] - 0.333).powi(2) + (x[1] - 0.777).powi(2)),
            &dom,
            &cfg,
        )
        .unwrap();
        assert!((r.x[0] - 0.333).abs() < 1e-3);
        assert!((r.x[1] - 0.777).abs() < 1e-3);
    }

    #[test]
    fn constant_objective_returns_first_grid_point() {
        let dom = BoxDomain::new(vec![-1.0, 2.0], vec![1.0, 3.0]).unwrap();
        let r = minimize(|_| Ok(-1.0), &dom, &SearchConfig::default()).unwrap();
        assert_eq!(r.grid_index, 0);
        assert_eq!(r.x, vec![-1.0, 2.0]);
    }

    #[test]
    fn maximize_boundary() {
        let dom = BoxDomain::cube(1, -10.0, 10.0).unwrap();
        let r = maximize(|x| Ok(x[0].abs()), &dom, &SearchConfig::default()).unwrap();
        assert_eq!(r.x, vec![-10.0]);
        assert_eq!(r.value, 10.0);
    }

    #[test]
    fn search_lattice_includes_endpoints() {
        let dom = BoxDomain::unit(1).unwrap();
        assert_eq!(search_point(&dom, 5, 0), vec![0.0]);
        assert_eq!(search_point(&dom, 5, 4), vec![1.0]);
        assert_eq!(SearchConfig::default().resolution(3), 41);
        assert_eq!(SearchConfig::default().refined(1, 4).resolution(1), 1601);
    }
}
