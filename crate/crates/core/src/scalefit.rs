//! Scaling models and their fits: Amdahl with an overhead offset, Gustafson, and the
//! linear/constant decomposition of MPI time shares. Also weak-scaling problem sizing.
//!
//! Amdahl:    `s(p) = 1 / ((1 - a) + a / p) + b`
//! Gustafson: `s(p) = (1 - a) + a * p`
//! MPI:       `t_LB / t_TOT = a * p + b`, `t_Com / t_TOT = c`

use serde::Serialize;

use crate::error::{Error, Result};

/// Lower clamp for the Amdahl parallel fraction during fitting.
pub const AMDAHL_A_MIN: f64 = 1e-6;

/// Iteration ceiling for the nonlinear fit.
pub const MAX_ITERATIONS: usize = 500;

/// Doubles stored per lattice cell by the LBC code.
pub const DOUBLES_PER_CELL: u64 = 41;

/// Residual weighting used by the speedup fits.
///
/// `Relative` divides each residual by the observed speedup, the maximum-likelihood
/// choice when run-to-run noise is multiplicative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    Uniform,
    #[default]
    Relative,
}

impl Weighting {
    fn weights(self, points: &[(f64, f64)]) -> Result<Vec<f64>> {
        match self {
            Weighting::Uniform => Ok(vec![1.0; points.len()]),
            Weighting::Relative => points
                .iter()
                .map(|&(p, s)| {
                    if s != 0.0 {
                        Ok(1.0 / (s * s))
                    } else {
                        Err(Error::InvalidData(format!(
                            "relative weighting needs non-zero speedups, got s=0 at p={p}"
                        )))
                    }
                })
                .collect(),
        }
    }
}

fn check_a_amdahl(a: f64) -> Result<()> {
    if a > 0.0 && a <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "Amdahl a must lie in (0, 1], got {a}"
        )))
    }
}

fn check_p(p: f64) -> Result<()> {
    if p >= 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "unit count must be >= 1, got {p}"
        )))
    }
}

fn amdahl_denominator(a: f64, p: f64) -> f64 {
    // equal to (1 - a) + a / p, written so that p = 1 gives exactly 1
    1.0 - a * (1.0 - 1.0 / p)
}

pub fn eval_amdahl(a: f64, b: f64, p: f64) -> Result<f64> {
    check_a_amdahl(a)?;
    check_p(p)?;
    Ok(1.0 / amdahl_denominator(a, p) + b)
}

pub fn eval_gustafson(a: f64, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&a) {
        return Err(Error::InvalidParameter(format!(
            "Gustafson a must lie in [0, 1], got {a}"
        )));
    }
    check_p(p)?;
    Ok(1.0 + a * (p - 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AmdahlFit {
    pub a: f64,
    pub b: f64,
    pub sigma_a: f64,
    pub sigma_b: f64,
    /// Unweighted sum of squared speedup residuals.
    pub residual: f64,
    pub iterations: usize,
    pub weighting: Weighting,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GustafsonFit {
    pub a: f64,
    pub sigma_a: f64,
    /// Unweighted sum of squared speedup residuals.
    pub residual: f64,
    pub weighting: Weighting,
}

fn validate_points(points: &[(f64, f64)], needed: usize) -> Result<()> {
    for &(p, s) in points {
        check_p(p)?;
        if !s.is_finite() {
            return Err(Error::InvalidData(format!("non-finite speedup at p={p}")));
        }
    }
    let mut ps: Vec<f64> = points.iter().map(|&(p, _)| p).collect();
    ps.sort_by(f64::total_cmp);
    ps.dedup();
    if ps.len() < needed {
        return Err(Error::Underdetermined {
            needed,
            got: ps.len(),
        });
    }
    Ok(())
}

fn weighted_chi2(points: &[(f64, f64)], w: &[f64], a: f64, b: f64) -> f64 {
    points
        .iter()
        .zip(w)
        .map(|(&(p, s), wi)| {
            let r = s - (1.0 / amdahl_denominator(a, p) + b);
            wi * r * r
        })
        .sum()
}

/// Normal-equation pieces `J^T W J` and `J^T W r` at `(a, b)`.
fn normal_equations(points: &[(f64, f64)], w: &[f64], a: f64, b: f64) -> ([[f64; 2]; 2], [f64; 2]) {
    let mut h = [[0.0; 2]; 2];
    let mut g = [0.0; 2];
    for (&(p, s), &wi) in points.iter().zip(w) {
        let d = amdahl_denominator(a, p);
        let r = s - (1.0 / d + b);
        let ja = (1.0 - 1.0 / p) / (d * d);
        let jb = 1.0;
        h[0][0] += wi * ja * ja;
        h[0][1] += wi * ja * jb;
        h[1][1] += wi * jb * jb;
        g[0] += wi * ja * r;
        g[1] += wi * jb * r;
    }
    h[1][0] = h[0][1];
    (h, g)
}

fn solve2(m: [[f64; 2]; 2], v: [f64; 2]) -> Option<[f64; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    Some([
        (v[0] * m[1][1] - v[1] * m[0][1]) / det,
        (m[0][0] * v[1] - m[1][0] * v[0]) / det,
    ])
}

fn invert2(m: [[f64; 2]; 2]) -> Option<[[f64; 2]; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    Some([
        [m[1][1] / det, -m[0][1] / det],
        [-m[1][0] / det, m[0][0] / det],
    ])
}

/// Fit Amdahl's law with overhead by damped Gauss-Newton from `a = 0.9, b = 0`.
pub fn fit_amdahl(points: &[(f64, f64)]) -> Result<AmdahlFit> {
    fit_amdahl_weighted(points, Weighting::default())
}

pub fn fit_amdahl_weighted(points: &[(f64, f64)], weighting: Weighting) -> Result<AmdahlFit> {
    validate_points(points, 3)?;
    let w = weighting.weights(points)?;
    let (mut a, mut b) = (0.9, 0.0);
    let mut chi2 = weighted_chi2(points, &w, a, b);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let (h, g) = normal_equations(points, &w, a, b);
        let damped = [
            [h[0][0] * (1.0 + lambda), h[0][1]],
            [h[1][0], h[1][1] * (1.0 + lambda)],
        ];
        let Some(step) = solve2(damped, g) else {
            lambda *= 10.0;
            if lambda > 1e20 {
                break;
            }
            continue;
        };
        let a_new = (a + step[0]).clamp(AMDAHL_A_MIN, 1.0);
        let b_new = b + step[1];
        let chi2_new = weighted_chi2(points, &w, a_new, b_new);
        let moved = (a_new - a).abs() + (b_new - b).abs();
        if chi2_new <= chi2 {
            a = a_new;
            b = b_new;
            chi2 = chi2_new;
            lambda = (lambda / 10.0).max(1e-12);
            if moved <= 1e-14 * (1.0 + a.abs() + b.abs()) {
                converged = true;
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e16 {
                // no downhill step left at any damping: a stationary point
                converged = true;
                break;
            }
        }
    }
    if !converged || !a.is_finite() || !b.is_finite() {
        return Err(Error::Convergence {
            iterations,
            best_a: a,
            best_b: b,
        });
    }
    let dof = points.len().saturating_sub(2).max(1) as f64;
    let (h, _) = normal_equations(points, &w, a, b);
    let scale = chi2 / dof;
    let (sigma_a, sigma_b) = invert2(h)
        .map(|c| {
            (
                (c[0][0] * scale).max(0.0).sqrt(),
                (c[1][1] * scale).max(0.0).sqrt(),
            )
        })
        .unwrap_or((f64::INFINITY, f64::INFINITY));
    let residual = points
        .iter()
        .map(|&(p, s)| (s - (1.0 / amdahl_denominator(a, p) + b)).powi(2))
        .sum();
    Ok(AmdahlFit {
        a,
        b,
        sigma_a,
        sigma_b,
        residual,
        iterations,
        weighting,
    })
}

/// Fit Gustafson's law by weighted linear least squares on `s - 1 = a (p - 1)`.
pub fn fit_gustafson(points: &[(f64, f64)]) -> Result<GustafsonFit> {
    fit_gustafson_weighted(points, Weighting::default())
}

pub fn fit_gustafson_weighted(points: &[(f64, f64)], weighting: Weighting) -> Result<GustafsonFit> {
    validate_points(points, 2)?;
    let w = weighting.weights(points)?;
    let sxx: f64 = points
        .iter()
        .zip(&w)
        .map(|(&(p, _), wi)| wi * (p - 1.0).powi(2))
        .sum();
    let sxy: f64 = points
        .iter()
        .zip(&w)
        .map(|(&(p, s), wi)| wi * (p - 1.0) * (s - 1.0))
        .sum();
    let a = (sxy / sxx).clamp(0.0, 1.0);
    let chi2: f64 = points
        .iter()
        .zip(&w)
        .map(|(&(p, s), wi)| wi * (s - 1.0 - a * (p - 1.0)).powi(2))
        .sum();
    let dof = points.len().saturating_sub(1).max(1) as f64;
    let sigma_a = (chi2 / dof / sxx).sqrt();
    let residual = points
        .iter()
        .map(|&(p, s)| (s - 1.0 - a * (p - 1.0)).powi(2))
        .sum();
    Ok(GustafsonFit {
        a,
        sigma_a,
        residual,
        weighting,
    })
}

/// Decomposition of total run time into computation, communication and
/// load-balance (waiting) parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeDecomposition {
    pub cal: f64,
    pub com: f64,
    pub lb: f64,
}

impl TimeDecomposition {
    pub fn new(cal: f64, com: f64, lb: f64) -> Result<Self> {
        for (name, v) in [("t_cal", cal), ("t_com", com), ("t_lb", lb)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidData(format!("{name} must be >= 0, got {v}")));
            }
        }
        if cal + com + lb <= 0.0 {
            return Err(Error::InvalidData("total time is zero".into()));
        }
        Ok(TimeDecomposition { cal, com, lb })
    }

    pub fn total(&self) -> f64 {
        self.cal + self.com + self.lb
    }

    pub fn mpi(&self) -> f64 {
        self.com + self.lb
    }

    /// Shares of the total as fractions `(cal, com, lb)`.
    pub fn shares(&self) -> (f64, f64, f64) {
        let t = self.total();
        (self.cal / t, self.com / t, self.lb / t)
    }
}

/// Observed shares at one unit count, in percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SharePoint {
    pub p: f64,
    pub lb_pct: f64,
    pub com_pct: f64,
}

impl SharePoint {
    pub fn from_decomposition(p: f64, t: &TimeDecomposition) -> Self {
        let (_, com, lb) = t.shares();
        SharePoint {
            p,
            lb_pct: lb * 100.0,
            com_pct: com * 100.0,
        }
    }
}

/// Load-balance line and communication constant. Held as fractions; accessors
/// present percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MpiShareFit {
    a: f64,
    b: f64,
    c: f64,
    sigma_a: f64,
    sigma_b: f64,
    sigma_c: f64,
}

impl MpiShareFit {
    /// Build from percent values, e.g. a published parameter row.
    pub fn from_percent(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(c >= 0.0) || !a.is_finite() || !b.is_finite() || !c.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "invalid share parameters a={a}, b={b}, c={c}"
            )));
        }
        Ok(MpiShareFit {
            a: a / 100.0,
            b: b / 100.0,
            c: c / 100.0,
            sigma_a: 0.0,
            sigma_b: 0.0,
            sigma_c: 0.0,
        })
    }

    /// Slope of the load-balance share, percent per unit.
    pub fn a(&self) -> f64 {
        self.a * 100.0
    }

    /// Intercept of the load-balance share, percent.
    pub fn b(&self) -> f64 {
        self.b * 100.0
    }

    /// Constant communication share, percent.
    pub fn c(&self) -> f64 {
        self.c * 100.0
    }

    pub fn sigma_a(&self) -> f64 {
        self.sigma_a * 100.0
    }

    pub fn sigma_b(&self) -> f64 {
        self.sigma_b * 100.0
    }

    pub fn sigma_c(&self) -> f64 {
        self.sigma_c * 100.0
    }

    /// Modelled load-balance share at `p`, percent.
    pub fn lb_share(&self, p: f64) -> f64 {
        self.a() * p + self.b()
    }

    /// Modelled total MPI share at `p`, percent.
    pub fn mpi_share(&self, p: f64) -> f64 {
        self.lb_share(p) + self.c()
    }
}

/// Fit the load-balance line by ordinary least squares and the communication share
/// as the sample mean with its standard error. Inputs are percent.
pub fn fit_mpi_shares(points: &[SharePoint]) -> Result<MpiShareFit> {
    for sp in points {
        for (name, v) in [("load-balance", sp.lb_pct), ("communication", sp.com_pct)] {
            if !(0.0..=100.0).contains(&v) {
                return Err(Error::InvalidData(format!(
                    "{name} share {v}% at p={} outside [0, 100]",
                    sp.p
                )));
            }
        }
        if sp.lb_pct + sp.com_pct > 100.0 * (1.0 + 1e-12) {
            return Err(Error::InvalidData(format!(
                "shares sum to {}% at p={}",
                sp.lb_pct + sp.com_pct,
                sp.p
            )));
        }
    }
    if points.len() < 3 {
        return Err(Error::Underdetermined {
            needed: 3,
            got: points.len(),
        });
    }
    let n = points.len() as f64;
    let x: Vec<f64> = points.iter().map(|s| s.p).collect();
    let y: Vec<f64> = points.iter().map(|s| s.lb_pct / 100.0).collect();
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|xi| (xi - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Underdetermined { needed: 2, got: 1 });
    }
    let sxy: f64 = x.iter().zip(&y).map(|(xi, yi)| (xi - mx) * (yi - my)).sum();
    let a = sxy / sxx;
    let b = my - a * mx;
    let rss: f64 = x
        .iter()
        .zip(&y)
        .map(|(xi, yi)| (yi - a * xi - b).powi(2))
        .sum();
    let s2 = rss / (n - 2.0);
    let sigma_a = (s2 / sxx).sqrt();
    let sigma_b = (s2 * (1.0 / n + mx * mx / sxx)).sqrt();

    let com: Vec<f64> = points.iter().map(|s| s.com_pct / 100.0).collect();
    let c = com.iter().sum::<f64>() / n;
    let var_c = com.iter().map(|v| (v - c).powi(2)).sum::<f64>() / (n - 1.0);
    let sigma_c = (var_c / n).sqrt();

    for &p in &x {
        let lb = a * p + b;
        if !(-1e-12..=1.0 + 1e-12).contains(&lb) {
            return Err(Error::InvalidData(format!(
                "fitted load-balance share {}% at p={p} outside [0, 100]",
                lb * 100.0
            )));
        }
    }
    Ok(MpiShareFit {
        a,
        b,
        c,
        sigma_a,
        sigma_b,
        sigma_c,
    })
}

/// Which share expression must reach the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriticalDefinition {
    /// `a p + b`
    LbOnly,
    /// `a p + b + c`
    LbPlusCom,
}

impl CriticalDefinition {
    pub fn label(self) -> &'static str {
        match self {
            CriticalDefinition::LbOnly => "lb-only",
            CriticalDefinition::LbPlusCom => "lb+com",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CriticalPoint {
    At { units: f64 },
    NoCriticalPoint,
}

/// Unit count at which the chosen share reaches `threshold_pct`.
pub fn critical_units(
    fit: &MpiShareFit,
    definition: CriticalDefinition,
    threshold_pct: f64,
) -> CriticalPoint {
    let a = fit.a();
    if !(a > 0.0) {
        return CriticalPoint::NoCriticalPoint;
    }
    let offset = match definition {
        CriticalDefinition::LbOnly => fit.b(),
        CriticalDefinition::LbPlusCom => fit.b() + fit.c(),
    };
    CriticalPoint::At {
        units: (threshold_pct - offset) / a,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum ScalingModel {
    Amdahl { a: f64, b: f64 },
    Gustafson { a: f64 },
}

impl ScalingModel {
    pub fn eval(&self, p: f64) -> Result<f64> {
        match *self {
            ScalingModel::Amdahl { a, b } => eval_amdahl(a, b, p),
            ScalingModel::Gustafson { a } => eval_gustafson(a, p),
        }
    }
}

impl From<&AmdahlFit> for ScalingModel {
    fn from(f: &AmdahlFit) -> Self {
        ScalingModel::Amdahl { a: f.a, b: f.b }
    }
}

impl From<&GustafsonFit> for ScalingModel {
    fn from(f: &GustafsonFit) -> Self {
        ScalingModel::Gustafson { a: f.a }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProjectionPoint {
    pub p: f64,
    pub speedup: f64,
    pub efficiency: f64,
}

/// Evaluate a model over unit counts, sorted ascending.
pub fn project(model: &ScalingModel, p_list: &[f64]) -> Result<Vec<ProjectionPoint>> {
    let mut ps = p_list.to_vec();
    ps.sort_by(f64::total_cmp);
    ps.dedup();
    ps.into_iter()
        .map(|p| {
            let speedup = model.eval(p)?;
            Ok(ProjectionPoint {
                p,
                speedup,
                efficiency: speedup / p,
            })
        })
        .collect()
}

/// Powers of two from 1 up to and including the first power `>= max`.
pub fn power_of_two_grid(max: f64) -> Vec<f64> {
    let mut out = vec![1.0];
    let mut p = 1.0;
    while p < max {
        p *= 2.0;
        out.push(p);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WeakScalingSize {
    pub global: [u64; 3],
    pub cells: u64,
    pub memory_bytes: u64,
}

impl WeakScalingSize {
    pub fn memory_gib(&self) -> f64 {
        self.memory_bytes as f64 / (1u64 << 30) as f64
    }
}

/// Global grid from per-unit cells and a rank decomposition; memory assumes
/// [`DOUBLES_PER_CELL`] doubles per cell.
pub fn weak_scaling_size(per_unit: [u64; 3], decomposition: [u64; 3]) -> Result<WeakScalingSize> {
    if per_unit.iter().chain(&decomposition).any(|&v| v == 0) {
        return Err(Error::InvalidParameter(format!(
            "all dimensions must be >= 1, got {per_unit:?} x {decomposition:?}"
        )));
    }
    let overflow = || Error::InvalidParameter("problem size overflows 64 bits".into());
    let mut global = [0u64; 3];
    for k in 0..3 {
        global[k] = per_unit[k]
            .checked_mul(decomposition[k])
            .ok_or_else(overflow)?;
    }
    let cells = global
        .iter()
        .try_fold(1u64, |acc, &g| acc.checked_mul(g))
        .ok_or_else(overflow)?;
    let memory_bytes = cells
        .checked_mul(DOUBLES_PER_CELL * 8)
        .ok_or_else(overflow)?;
    Ok(WeakScalingSize {
        global,
        cells,
        memory_bytes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn amdahl_examples() {
        assert_eq!(eval_amdahl(1.0, 0.0, 8.0).unwrap(), 8.0);
        assert_relative_eq!(
            eval_amdahl(0.96, -0.685, 16.0).unwrap(),
            9.315,
            max_relative = 1e-12
        );
        assert_eq!(eval_amdahl(0.7, 0.25, 1.0).unwrap(), 1.25);
        assert!(eval_amdahl(0.0, 0.0, 2.0).is_err());
        assert!(eval_amdahl(1.1, 0.0, 2.0).is_err());
        assert!(eval_amdahl(0.5, 0.0, 0.5).is_err());
    }

    #[test]
    fn gustafson_examples() {
        assert_relative_eq!(
            eval_gustafson(0.817, 16.0).unwrap(),
            13.255,
            max_relative = 1e-12
        );
        assert_eq!(eval_gustafson(0.3, 1.0).unwrap(), 1.0);
        assert!(eval_gustafson(-0.1, 2.0).is_err());
    }

    #[test]
    fn linear_speedup_fits_to_one() {
        let pts: Vec<_> = [1.0, 2.0, 4.0, 8.0, 16.0].iter().map(|&p| (p, p)).collect();
        let f = fit_amdahl(&pts).unwrap();
        assert_relative_eq!(f.a, 1.0, epsilon = 1e-9);
        assert!(f.b.abs() < 1e-9);
        let g = fit_gustafson(&pts).unwrap();
        assert_eq!(g.a, 1.0);
        let flat: Vec<_> = [1.0, 2.0, 4.0].iter().map(|&p| (p, 1.0)).collect();
        assert_eq!(fit_gustafson(&flat).unwrap().a, 0.0);
    }

    #[test]
    fn too_few_points() {
        assert_eq!(
            fit_amdahl(&[(1.0, 1.0), (2.0, 1.9)]).unwrap_err().kind(),
            "underdetermined"
        );
        assert_eq!(
            fit_amdahl(&[(1.0, 1.0), (2.0, 1.9), (2.0, 1.8)])
                .unwrap_err()
                .kind(),
            "underdetermined"
        );
        assert_eq!(
            fit_gustafson(&[(4.0, 3.0)]).unwrap_err().kind(),
            "underdetermined"
        );
    }

    #[test]
    fn critical_examples() {
        let f = MpiShareFit::from_percent(1.26, 3.86, 19.59).unwrap();
        let CriticalPoint::At { units } = critical_units(&f, CriticalDefinition::LbOnly, 100.0)
        else {
            panic!()
        };
        assert!((units - 76.3).abs() < 0.1);
        let CriticalPoint::At { units } = critical_units(&f, CriticalDefinition::LbPlusCom, 100.0)
        else {
            panic!()
        };
        assert!((units - 60.7).abs() < 0.1);
        let flat = MpiShareFit::from_percent(0.0, 3.86, 19.59).unwrap();
        assert_eq!(
            critical_units(&flat, CriticalDefinition::LbOnly, 100.0),
            CriticalPoint::NoCriticalPoint
        );
    }

    #[test]
    fn mpi_share_guards() {
        let two = [
            SharePoint {
                p: 1.0,
                lb_pct: 5.0,
                com_pct: 10.0,
            },
            SharePoint {
                p: 2.0,
                lb_pct: 6.0,
                com_pct: 10.0,
            },
        ];
        assert_eq!(fit_mpi_shares(&two).unwrap_err().kind(), "underdetermined");
        let over = [
            SharePoint {
                p: 1.0,
                lb_pct: 60.0,
                com_pct: 50.0,
            },
            SharePoint {
                p: 2.0,
                lb_pct: 6.0,
                com_pct: 10.0,
            },
            SharePoint {
                p: 3.0,
                lb_pct: 7.0,
                com_pct: 10.0,
            },
        ];
        assert_eq!(fit_mpi_shares(&over).unwrap_err().kind(), "invalid-data");
        let constant: Vec<_> = (1..=5)
            .map(|p| SharePoint {
                p: p as f64,
                lb_pct: 12.5,
                com_pct: 3.0,
            })
            .collect();
        let f = fit_mpi_shares(&constant).unwrap();
        assert!(f.a().abs() < 1e-12);
        assert_relative_eq!(f.b(), 12.5, max_relative = 1e-12);
        assert_eq!(f.sigma_c(), 0.0);
    }

    #[test]
    fn decomposition_shares() {
        let t = TimeDecomposition::new(7.0, 2.0, 1.0).unwrap();
        let (cal, com, lb) = t.shares();
        assert_relative_eq!(cal + com + lb, 1.0, epsilon = 1e-15);
        assert_eq!(t.mpi(), 3.0);
        let sp = SharePoint::from_decomposition(4.0, &t);
        assert_relative_eq!(sp.lb_pct, 10.0, max_relative = 1e-12);
        assert!(TimeDecomposition::new(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn projection_examples() {
        let ideal = project(&ScalingModel::Amdahl { a: 1.0, b: 0.0 }, &[1.0, 4.0, 64.0]).unwrap();
        assert!(ideal.iter().all(|pt| pt.efficiency == 1.0));
        let g = project(&ScalingModel::Gustafson { a: 0.817 }, &[16.0]).unwrap();
        assert_relative_eq!(g[0].efficiency, 0.828, epsilon = 5e-4);
        let one = project(&ScalingModel::Amdahl { a: 0.9, b: -0.3 }, &[1.0]).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].speedup, 0.7);
        assert_eq!(
            power_of_two_grid(20.0),
            vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0]
        );
    }

    #[test]
    fn lbc_sizes() {
        let dib = weak_scaling_size([256, 256, 32], [2, 2, 16]).unwrap();
        assert_eq!(dib.global, [512, 512, 512]);
        assert_relative_eq!(dib.memory_gib(), 41.0, max_relative = 0.02);
        let mn4 = weak_scaling_size([256, 256, 32], [2, 2, 12]).unwrap();
        assert_eq!(mn4.global, [512, 512, 384]);
        assert_relative_eq!(mn4.memory_gib(), 31.0, max_relative = 0.02);
        let same = weak_scaling_size([7, 9, 11], [1, 1, 1]).unwrap();
        assert_eq!(same.global, [7, 9, 11]);
        assert!(weak_scaling_size([0, 1, 1], [1, 1, 1]).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn amdahl_monotone_and_bounded(a in 1e-3f64..1.0, b in -2.0f64..2.0, p in 1.0f64..1e6, dp in 0.0f64..1e3) {
                let s1 = eval_amdahl(a, b, p).unwrap();
                let s2 = eval_amdahl(a, b, p + dp).unwrap();
                prop_assert!(s2 >= s1);
                prop_assert!(s1 <= 1.0 / (1.0 - a) + b);
            }

            #[test]
            fn gustafson_identity_at_one(a in 0.0f64..=1.0) {
                prop_assert_eq!(eval_gustafson(a, 1.0).unwrap(), 1.0);
            }

            #[test]
            fn gustafson_noiseless_recovery(a in 0.0f64..=1.0, n in 2usize..10) {
                let pts: Vec<_> = (0..n).map(|k| {
                    let p = 2f64.powi(k as i32);
                    (p, eval_gustafson(a, p).unwrap())
                }).collect();
                let f = fit_gustafson(&pts).unwrap();
                prop_assert!((f.a - a).abs() <= 1e-9);
            }

            #[test]
            fn amdahl_noiseless_recovery(a in 0.5f64..0.999, b in -1.5f64..1.0) {
                let pts: Vec<_> = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0]
                    .iter()
                    .map(|&p| (p, eval_amdahl(a, b, p).unwrap()))
                    .collect();
                prop_assume!(pts.iter().all(|&(_, s)| s != 0.0));
                let f = fit_amdahl(&pts).unwrap();
                prop_assert!((f.a - a).abs() <= 1e-6, "a {} vs {}", f.a, a);
                prop_assert!((f.b - b).abs() <= 1e-6, "b {} vs {}", f.b, b);
            }
        }
    }
}
