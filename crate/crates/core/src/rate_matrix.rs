//! Three-level rate matrix and the second-order correlation function.
//!
//! Populations evolve as `dp/dt = -M p` with
//!
//! ```text
//!     | r12 + r13   -r21   -r31       |
//! M = | -r12         r21   -r32       |
//!     | -r13         0      r31 + r32 |
//! ```
//!
//! The eigenvalues are `λ1 ≥ λ2 ≥ λ3 = 0`; `λ1` sets the antibunching dip
//! and `λ2` the decay of the bunching shoulder.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative gap below which `λ1` and `λ2` are considered degenerate.
pub const DEGENERATE_EIGEN_TOL: f64 = 1e-9;

/// Transition rates of the three-level system (ns⁻¹).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateSet {
    /// Excitation |1⟩→|2⟩.
    pub r12: f64,
    /// Emission |2⟩→|1⟩.
    pub r21: f64,
    /// Excitation |1⟩→|3⟩.
    pub r13: f64,
    /// Decay |3⟩→|1⟩.
    pub r31: f64,
    /// Trapping |3⟩→|2⟩.
    pub r32: f64,
}

impl RateSet {
    pub fn new(r12: f64, r21: f64, r13: f64, r31: f64, r32: f64) -> Result<Self> {
        let r = Self { r12, r21, r13, r31, r32 };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in self.named() {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::domain(format!("{name} must be a finite rate >= 0, got {v}")));
            }
        }
        if !(self.r21 > 0.0) {
            return Err(Error::domain("r21 must be > 0 (the emission channel must exist)"));
        }
        Ok(())
    }

    pub fn named(&self) -> [(&'static str, f64); 5] {
        [("r12", self.r12), ("r21", self.r21), ("r13", self.r13), ("r31", self.r31), ("r32", self.r32)]
    }

    fn trace(&self) -> f64 {
        self.r12 + self.r13 + self.r21 + self.r31 + self.r32
    }

    /// Sum of the principal 2×2 minors of `M`, equal to `λ1 λ2`.
    fn minor_sum(&self) -> f64 {
        let Self { r12, r21, r13, r31, r32 } = *self;
        r13 * r21 + r12 * r31 + r12 * r32 + r21 * r31 + r21 * r32 + r13 * r32
    }

    /// True when level |3⟩ is disconnected from the rest of the system.
    fn level3_isolated(&self) -> bool {
        self.r13 == 0.0 && self.r31 + self.r32 == 0.0
    }
}

/// Eigenvalues plus expansion weights `p_i(t) = Σ_j a[i][j] exp(-λ_j t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenDecomposition {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    /// `a[i][j]`: level `i`, mode `j`.
    pub a: [[f64; 3]; 3],
}

impl EigenDecomposition {
    pub fn populations(&self, t: f64) -> [f64; 3] {
        let e = [(-self.lambda1 * t).exp(), (-self.lambda2 * t).exp(), (-self.lambda3 * t).exp()];
        std::array::from_fn(|i| self.a[i][0] * e[0] + self.a[i][1] * e[1] + self.a[i][2] * e[2])
    }
}

/// Parameters of the approximate correlation function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct G2Params {
    pub lambda1: f64,
    pub lambda2: f64,
    /// Bunching amplitude.
    pub a: f64,
}

impl G2Params {
    pub fn new(lambda1: f64, lambda2: f64, a: f64) -> Result<Self> {
        if !(lambda2 > 0.0) || !(lambda1 > lambda2) || !lambda1.is_finite() {
            return Err(Error::domain(format!(
                "require lambda1 > lambda2 > 0, got lambda1 = {lambda1}, lambda2 = {lambda2}"
            )));
        }
        if !(a >= 0.0) || !a.is_finite() {
            return Err(Error::domain(format!("bunching amplitude must be >= 0, got {a}")));
        }
        Ok(Self { lambda1, lambda2, a })
    }
}

pub fn build_rate_matrix(rates: &RateSet) -> Matrix3<f64> {
    let RateSet { r12, r21, r13, r31, r32 } = *rates;
    Matrix3::new(r12 + r13, -r21, -r31, -r12, r21, -r32, -r13, 0.0, r32 + r31)
}

/// Closed-form eigenvalues `(λ1, λ2, 0)` with `λ1 ≥ λ2`.
///
/// `λ1` is the `+` root; `λ2` is taken from the product identity
/// `λ1 λ2 = Σ minors`, which is the same root without the cancellation
/// of the `-` branch when `λ2 ≪ λ1`.
pub fn exact_eigenvalues(rates: &RateSet) -> Result<(f64, f64, f64)> {
    rates.validate()?;
    let RateSet { r12, r21, r13, r31, r32 } = *rates;
    let s = r12 + r13 + r21 - r32 - r31;
    let disc = s * s - 4.0 * r13 * r21 + 4.0 * r13 * r31;
    if disc < 0.0 {
        return Err(Error::ComplexEigenvalues { discriminant: disc });
    }
    let lambda1 = 0.5 * (rates.trace() + disc.sqrt());
    let lambda2 = if lambda1 > 0.0 { rates.minor_sum() / lambda1 } else { 0.0 };
    Ok((lambda1, lambda2, 0.0))
}

/// Low-rate approximation for small `r13`, `r31`, `r32`.
pub fn approx_eigenvalues(rates: &RateSet) -> Result<(f64, f64, f64)> {
    rates.validate()?;
    let RateSet { r12, r21, r13, r31, r32 } = *rates;
    Ok((r12 + r21, r32 + r31 + r21 * r13 / (r12 + r21), 0.0))
}

/// Long-time occupancies reached from the ground state.
///
/// `p2` is the cofactor expression
/// `(r12 r32 + r13 r32 + r12 r31) / (r13 r21 + r12 r31 + r12 r32 + r21 r31 + r21 r32 + r13 r32)`.
/// When |3⟩ is isolated (`r13 = r31 + r32 = 0`) the two-level limit is returned.
pub fn steady_state(rates: &RateSet) -> Result<[f64; 3]> {
    rates.validate()?;
    let RateSet { r12, r21, r13, r31, r32 } = *rates;
    if r12 == 0.0 && r13 == 0.0 {
        return Err(Error::DegenerateSteadyState(
            "all excitation rates are zero; the system stays in the ground state".into(),
        ));
    }
    if rates.level3_isolated() {
        let p2 = r12 / (r12 + r21);
        return Ok([1.0 - p2, p2, 0.0]);
    }
    let denom = rates.minor_sum();
    let p2 = (r12 * r32 + r13 * r32 + r12 * r31) / denom;
    let p3 = r13 * r21 / denom;
    Ok([1.0 - p2 - p3, p2, p3])
}

/// Low-rate coefficients `(a21, a22, a23)` of `p2(t)` for `p(0) = (1, 0, 0)`.
///
/// The denominator of `a22`/`a23` omits the `r13 r32` term present in
/// the exact steady state; this mirrors the published approximation.
pub fn approx_coefficients(rates: &RateSet) -> Result<(f64, f64, f64)> {
    rates.validate()?;
    let RateSet { r12, r21, r13, r31, r32 } = *rates;
    let fast = r12 / (r12 + r21);
    let num = r12 * r32 + r13 * r32 + r12 * r31;
    let den = r13 * r21 + r12 * r31 + r12 * r32 + r21 * r31 + r21 * r32;
    let a23 = if num == 0.0 { 0.0 } else { num / den };
    Ok((-fast, fast - a23, a23))
}

/// Full eigen-expansion of the populations for initial condition `p0`.
///
/// The weights solve the 3×3 Vandermonde system matching `p`, `ṗ` and
/// `p̈` at `t = 0`.
pub fn eigen_decomposition(rates: &RateSet, p0: [f64; 3]) -> Result<EigenDecomposition> {
    let (lambda1, lambda2, lambda3) = exact_eigenvalues(rates)?;
    if lambda1 - lambda2 <= DEGENERATE_EIGEN_TOL * lambda1 || lambda2 <= DEGENERATE_EIGEN_TOL * lambda1 {
        return Err(Error::DegenerateEigenvalues { lambda1, lambda2 });
    }
    let m = build_rate_matrix(rates);
    let p = Vector3::from(p0);
    let d1 = -(m * p);
    let d2 = m * (m * p);
    let v = Matrix3::new(
        1.0,
        1.0,
        1.0,
        -lambda1,
        -lambda2,
        -lambda3,
        lambda1 * lambda1,
        lambda2 * lambda2,
        lambda3 * lambda3,
    );
    let lu = v.lu();
    let mut a = [[0.0; 3]; 3];
    for i in 0..3 {
        let rhs = Vector3::new(p[i], d1[i], d2[i]);
        let sol = lu.solve(&rhs).ok_or(Error::DegenerateEigenvalues { lambda1, lambda2 })?;
        a[i] = [sol[0], sol[1], sol[2]];
    }
    Ok(EigenDecomposition { lambda1, lambda2, lambda3, a })
}

/// Exact correlation function `p2(t)/p2(∞)` after an emission event.
#[derive(Debug, Clone, Copy)]
pub struct G2Exact {
    kind: G2ExactKind,
}

#[derive(Debug, Clone, Copy)]
enum G2ExactKind {
    /// |3⟩ unreachable from the ground state: two-level antibunching.
    TwoLevel {
        lambda1: f64,
    },
    Full {
        lambda1: f64,
        lambda2: f64,
        c1: f64,
        c2: f64,
    },
}

impl G2Exact {
    pub fn new(rates: &RateSet) -> Result<Self> {
        let p_inf = steady_state(rates)?;
        if rates.r13 == 0.0 {
            return Ok(Self { kind: G2ExactKind::TwoLevel { lambda1: rates.r12 + rates.r21 } });
        }
        if !(p_inf[1] > 0.0) {
            return Err(Error::DegenerateSteadyState("level 2 is empty in steady state; g2 is undefined".into()));
        }
        let dec = eigen_decomposition(rates, [1.0, 0.0, 0.0])?;
        let [c1, c2, _] = dec.a[1];
        Ok(Self {
            kind: G2ExactKind::Full {
                lambda1: dec.lambda1,
                lambda2: dec.lambda2,
                c1: c1 / p_inf[1],
                c2: c2 / p_inf[1],
            },
        })
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::domain(format!("g2_exact requires t >= 0, got {t}")));
        }
        Ok(match self.kind {
            G2ExactKind::TwoLevel { lambda1 } => -(-lambda1 * t).exp_m1(),
            G2ExactKind::Full { lambda1, lambda2, c1, c2 } => {
                1.0 + c1 * (-lambda1 * t).exp() + c2 * (-lambda2 * t).exp()
            }
        })
    }

    /// Mean of the curve over `[lo, hi]` (both ≥ 0), in closed form.
    pub fn bin_average(&self, lo: f64, hi: f64) -> Result<f64> {
        if !(lo >= 0.0) || !(hi > lo) {
            return Err(Error::domain(format!("invalid averaging interval [{lo}, {hi}]")));
        }
        let w = hi - lo;
        let mean_exp = |l: f64| ((-l * lo).exp() - (-l * hi).exp()) / (l * w);
        Ok(match self.kind {
            G2ExactKind::TwoLevel { lambda1 } => 1.0 - mean_exp(lambda1),
            G2ExactKind::Full { lambda1, lambda2, c1, c2 } => 1.0 + c1 * mean_exp(lambda1) + c2 * mean_exp(lambda2),
        })
    }
}

pub fn g2_exact(t: f64, rates: &RateSet) -> Result<f64> {
    G2Exact::new(rates)?.eval(t)
}

/// Approximate correlation `1 - (1+a) e^(-λ1|t|) + a e^(-λ2|t|)`.
pub fn g2_approx(t: f64, params: &G2Params) -> f64 {
    let t = t.abs();
    let (e1, e2) = ((-params.lambda1 * t).exp(), (-params.lambda2 * t).exp());
    // grouped so that t = 0 cancels exactly
    -(-params.lambda1 * t).exp_m1() - params.a * (e1 - e2)
}

/// Mean of `g2_approx` over the lag interval `[lo, hi]`, which may straddle zero.
pub fn g2_approx_bin_average(lo: f64, hi: f64, params: &G2Params) -> f64 {
    if !(hi > lo) {
        return g2_approx(lo, params);
    }
    // antiderivative of exp(-λ|t|)
    let prim = |l: f64, x: f64| x.signum() * -(-l * x.abs()).exp_m1() / l;
    let mean = |l: f64| (prim(l, hi) - prim(l, lo)) / (hi - lo);
    let m1 = mean(params.lambda1);
    1.0 - m1 - params.a * (m1 - mean(params.lambda2))
}

pub fn g2_params_from_rates(rates: &RateSet) -> Result<G2Params> {
    rates.validate()?;
    let RateSet { r12, r21, r13, r31, r32 } = *rates;
    let deshelve = r31 + r32;
    if deshelve == 0.0 {
        return Err(Error::NoDeshelving);
    }
    Ok(G2Params {
        lambda1: r12 + r21,
        lambda2: deshelve + r21 * r13 / (r12 + r21),
        a: r21 * r13 / (deshelve * (r12 + r21)),
    })
}
