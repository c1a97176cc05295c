use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use super::FitResult;
use crate::error::{Error, Result};

/// Feasible region of a parameter, enforced by reparameterization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    Free,
    /// θ = exp(u)
    Positive,
    /// θ = lo + (hi - lo)(1 + sin u)/2, both ends attainable.
    Interval {
        lo: f64,
        hi: f64,
    },
}

impl Bound {
    fn to_physical(self, u: f64) -> f64 {
        match self {
            Bound::Free => u,
            Bound::Positive => u.exp(),
            Bound::Interval { lo, hi } => lo + (hi - lo) * 0.5 * (1.0 + u.sin()),
        }
    }

    fn to_internal(self, theta: f64) -> f64 {
        match self {
            Bound::Free => theta,
            Bound::Positive => theta.ln(),
            Bound::Interval { lo, hi } => (2.0 * (theta - lo) / (hi - lo) - 1.0).clamp(-1.0, 1.0).asin(),
        }
    }

    /// dθ/du
    fn derivative(self, u: f64) -> f64 {
        match self {
            Bound::Free => 1.0,
            Bound::Positive => u.exp(),
            Bound::Interval { lo, hi } => (hi - lo) * 0.5 * u.cos(),
        }
    }

    fn contains(self, theta: f64) -> bool {
        match self {
            Bound::Free => theta.is_finite(),
            Bound::Positive => theta > 0.0 && theta.is_finite(),
            Bound::Interval { lo, hi } => theta >= lo && theta <= hi,
        }
    }

    /// Which end, if any, the value sits on.
    fn pinned(self, theta: f64) -> Option<&'static str> {
        match self {
            Bound::Interval { lo, hi } => {
                let tol = 1e-7 * (hi - lo);
                if theta - lo <= tol {
                    Some("lower")
                } else if hi - theta <= tol {
                    Some("upper")
                } else {
                    None
                }
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamSpec {
    pub name: String,
    pub init: f64,
    pub bound: Bound,
    pub fixed: bool,
}

impl ParamSpec {
    pub fn new(name: &str, init: f64, bound: Bound) -> Self {
        Self { name: name.to_owned(), init, bound, fixed: false }
    }

    pub fn fixed(name: &str, value: f64) -> Self {
        Self { name: name.to_owned(), init: value, bound: Bound::Free, fixed: true }
    }
}

/// Abscissae, ordinates and weights (inverse variances).
#[derive(Debug, Clone, Copy)]
pub struct CurveData<'a> {
    pub x: &'a [f64],
    pub y: &'a [f64],
    pub w: &'a [f64],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Relative chi-square change that counts as converged.
    pub ftol: f64,
    /// Relative step size that counts as converged.
    pub xtol: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self { max_iterations: 1000, ftol: 1e-14, xtol: 1e-11 }
    }
}

struct Problem<'a, F> {
    model: F,
    data: CurveData<'a>,
    specs: &'a [ParamSpec],
    free: Vec<usize>,
}

impl<F: Fn(f64, &[f64]) -> f64> Problem<'_, F> {
    fn physical(&self, u: &[f64]) -> Vec<f64> {
        let mut theta: Vec<f64> = self.specs.iter().map(|s| s.init).collect();
        for (k, &i) in self.free.iter().enumerate() {
            theta[i] = self.specs[i].bound.to_physical(u[k]);
        }
        theta
    }

    fn residuals(&self, u: &[f64]) -> DVector<f64> {
        let theta = self.physical(u);
        let d = self.data;
        DVector::from_iterator(
            d.x.len(),
            d.x.iter().zip(d.y).zip(d.w).map(|((&x, &y), &w)| w.sqrt() * ((self.model)(x, &theta) - y)),
        )
    }

    /// Central-difference Jacobian of the residuals w.r.t. the internal parameters.
    fn jacobian(&self, u: &[f64]) -> DMatrix<f64> {
        let n = self.data.x.len();
        let mut j = DMatrix::zeros(n, u.len());
        let mut up = u.to_vec();
        for k in 0..u.len() {
            let h = 1e-6 * u[k].abs().max(1e-3);
            up[k] = u[k] + h;
            let rp = self.residuals(&up);
            up[k] = u[k] - h;
            let rm = self.residuals(&up);
            up[k] = u[k];
            j.set_column(k, &((rp - rm) / (2.0 * h)));
        }
        j
    }

    /// Jacobian w.r.t. the physical values of the listed parameters, by the
    /// chain rule through the transform.
    fn physical_jacobian(&self, u: &[f64], which: &[usize]) -> DMatrix<f64> {
        let ju = self.jacobian(u);
        let mut j = DMatrix::zeros(ju.nrows(), which.len());
        for (k, &i) in which.iter().enumerate() {
            let col = self.free.iter().position(|&f| f == i).expect("active parameters are free");
            let scaled = ju.column(col) / self.specs[i].bound.derivative(u[col]);
            if scaled.iter().all(|v| v.is_finite()) {
                j.set_column(k, &scaled);
            }
            // otherwise the transform has collapsed; a zero column flags the parameter
        }
        j
    }
}

/// Minimizes `Σ w (model(x, θ) - y)²` by Levenberg–Marquardt damped
/// Gauss–Newton steps in a transformed space that enforces the bounds.
///
/// Uncertainties come from the inverse weighted normal matrix in the
/// physical parameters at the optimum, scaled by the reduced chi-square.
/// Parameters that end on an interval bound are reported with zero
/// uncertainty and a warning.
pub fn damped_least_squares<F>(
    model: F,
    data: CurveData<'_>,
    specs: &[ParamSpec],
    options: LmOptions,
) -> Result<FitResult>
where
    F: Fn(f64, &[f64]) -> f64,
{
    let n = data.x.len();
    if data.y.len() != n || data.w.len() != n {
        return Err(Error::domain("x, y and weight arrays differ in length"));
    }
    let free: Vec<usize> = (0..specs.len()).filter(|&i| !specs[i].fixed).collect();
    if n < free.len() || free.is_empty() {
        return Err(Error::InsufficientData(format!("{n} points for {} free parameters", free.len())));
    }
    for s in specs {
        if !s.fixed && !s.bound.contains(s.init) {
            return Err(Error::domain(format!("initial value {} of {} violates its bound", s.init, s.name)));
        }
    }
    if data.w.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
        return Err(Error::domain("weights must be finite and >= 0"));
    }
    let problem = Problem { model, data, specs, free: free.clone() };
    let mut u: Vec<f64> = free.iter().map(|&i| specs[i].bound.to_internal(specs[i].init)).collect();
    let mut r = problem.residuals(&u);
    let mut chi2 = r.norm_squared();
    if !chi2.is_finite() {
        return Err(Error::domain("initial residual is not finite"));
    }

    let mut mu = 1e-3;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < options.max_iterations {
        iterations += 1;
        let j = problem.jacobian(&u);
        let a = j.transpose() * &j;
        let g = j.transpose() * &r;
        if g.amax() <= 1e-300 || chi2 == 0.0 {
            converged = true;
            break;
        }
        let mut accepted = false;
        while mu < 1e20 {
            let mut damped = a.clone();
            for k in 0..u.len() {
                damped[(k, k)] += mu * a[(k, k)].max(1e-12);
            }
            let Some(step) = damped.cholesky().map(|c| c.solve(&(-&g))) else {
                mu *= 10.0;
                continue;
            };
            let trial: Vec<f64> = u.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let r_trial = problem.residuals(&trial);
            let chi2_trial = r_trial.norm_squared();
            if chi2_trial.is_finite() && chi2_trial <= chi2 {
                let decrease = chi2 - chi2_trial;
                let step_norm = step.norm();
                let u_norm = DVector::from_column_slice(&u).norm();
                u = trial;
                r = r_trial;
                chi2 = chi2_trial;
                mu = (mu / 3.0).max(1e-15);
                accepted = true;
                if decrease <= options.ftol * chi2.max(f64::MIN_POSITIVE) && step_norm <= 1e-6 * (u_norm + 1e-6)
                    || step_norm <= options.xtol * (u_norm + options.xtol)
                {
                    converged = true;
                }
                break;
            }
            mu *= 4.0;
        }
        if converged {
            break;
        }
        if !accepted {
            // no downhill step exists at any damping: a (numerical) minimum
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NotConverged { iterations, chi_square: chi2 });
    }

    let theta = problem.physical(&u);
    let mut warnings = Vec::new();
    let mut active = Vec::new();
    for &i in &free {
        match specs[i].bound.pinned(theta[i]) {
            Some(side) => warnings.push(format!("{} pinned at its {side} bound ({})", specs[i].name, theta[i])),
            None => active.push(i),
        }
    }
    let dof = (n - free.len()).max(1) as f64;
    let reduced = chi2 / dof;
    let mut covariance = vec![vec![0.0; active.len()]; active.len()];
    if !active.is_empty() {
        let jp = problem.physical_jacobian(&u, &active);
        check_identifiable(&jp, &active.iter().map(|&i| specs[i].name.as_str()).collect::<Vec<_>>())?;
        let normal = jp.transpose() * &jp;
        let inv = normal.clone().try_inverse().ok_or_else(|| Error::NonIdentifiable {
            directions: active.iter().map(|&i| specs[i].name.clone()).collect(),
        })?;
        for a in 0..active.len() {
            for b in 0..active.len() {
                covariance[a][b] = inv[(a, b)] * reduced;
            }
        }
    }

    let mut parameters = BTreeMap::new();
    let mut uncertainties = BTreeMap::new();
    for (i, s) in specs.iter().enumerate() {
        parameters.insert(s.name.clone(), theta[i]);
        let sigma = active.iter().position(|&k| k == i).map(|k| covariance[k][k].max(0.0).sqrt()).unwrap_or(0.0);
        uncertainties.insert(s.name.clone(), sigma);
    }
    Ok(FitResult {
        parameters,
        uncertainties,
        derived: BTreeMap::new(),
        reduced_chi_square: reduced,
        window: None,
        iterations,
        converged,
        covariance,
        covariance_order: active.iter().map(|&i| specs[i].name.clone()).collect(),
        warnings,
    })
}

/// Rejects Jacobians with (numerically) dependent columns.
fn check_identifiable(j: &DMatrix<f64>, names: &[&str]) -> Result<()> {
    let mut scaled = j.clone();
    for mut col in scaled.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col /= norm;
        }
    }
    let svd = scaled.svd(false, true);
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let smax = svd.singular_values.max();
    let mut directions = Vec::new();
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if !(s > 1e-9 * smax) {
            let row = v_t.row(k);
            let involved: Vec<&str> =
                names.iter().enumerate().filter(|(c, _)| row[*c].abs() > 0.3).map(|(_, n)| *n).collect();
            directions.push(involved.join("+"));
        }
    }
    if directions.is_empty() {
        Ok(())
    } else {
        Err(Error::NonIdentifiable { directions })
    }
}
