//! Laplace functionals and success probabilities of the PPP model.
//!
//! Every interference functional has the form `exp(−2πλ r² T(c, α, a))`
//! with the scale-free integral
//!
//! ```text
//! T(c, α, a) = ∫_a^∞ c v / (v^α + c) dv,   v = x / r,
//! ```
//!
//! which this module evaluates by adaptive quadrature for any `α > 2`.
//! Outer integrals over a PPP distance `d` use `u = πλ_B d²`, which turns the
//! nearest- and second-nearest-distance weights into `e^(−u)` and `u e^(−u)`.
//! Noise is not part of the model; probabilities are SIR based.

use std::f64::consts::PI;

use rayon::prelude::*;
use thiserror::Error;

use crate::params::{DirectionSelection, SystemParams};
use crate::quadrature::{integrate, try_integrate, QuadratureError, Tolerance};
use crate::scenario::Direction;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticError {
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("closed forms need alpha = 4, got {0}")]
    UnsupportedAlpha(f64),
    #[error("link distance must be positive, got {0}")]
    InvalidRadius(f64),
    #[error("invalid quadrature settings: {0}")]
    InvalidSpec(&'static str),
}

/// Densities of active interferers seen by a typical link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfererDensities {
    /// Active DL BSs, 1/km².
    pub lambda_psi: f64,
    /// Active UL MSs, 1/km².
    pub lambda_phi: f64,
}

/// `λ^ψ = (δ − δ²/2) λ_B`, `λ^φ = (1 − δ²)/2 · λ_B`.
pub fn interferer_densities(delta: f64, lambda_b: f64) -> InterfererDensities {
    debug_assert!((0.0..=1.0).contains(&delta));
    InterfererDensities {
        lambda_psi: (delta - 0.5 * delta * delta) * lambda_b,
        lambda_phi: 0.5 * (1.0 - delta * delta) * lambda_b,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Relative tolerance of inner integrals.
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Relative tolerance of the outer integral over the link distance.
    pub outer_rel_tol: f64,
    /// Distance integrals stop at `tail_multiplier / √(πλ_B)`.
    pub tail_multiplier: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            outer_rel_tol: 1e-8,
            tail_multiplier: 6.0,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<(), AnalyticError> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.rel_tol) || !positive(self.outer_rel_tol) {
            return Err(AnalyticError::InvalidSpec(
                "relative tolerances must be > 0",
            ));
        }
        if !positive(self.abs_tol) {
            return Err(AnalyticError::InvalidSpec("absolute tolerance must be > 0"));
        }
        if !positive(self.tail_multiplier) {
            return Err(AnalyticError::InvalidSpec("tail multiplier must be > 0"));
        }
        Ok(())
    }

    fn inner(&self) -> Tolerance {
        Tolerance::new(self.abs_tol, self.rel_tol)
    }

    fn outer(&self) -> Tolerance {
        Tolerance::new(self.abs_tol, self.outer_rel_tol)
    }

    /// Upper limit of `u = πλ_B d²`.
    fn u_max(&self) -> f64 {
        self.tail_multiplier * self.tail_multiplier
    }
}

/// `T(c, α, a) = ∫_a^∞ c v / (v^α + c) dv` by quadrature.
///
/// The part beyond `max(a, 1)` is mapped onto `(0, 1]` with `v = a/w`.
pub fn interference_integral(
    c: f64,
    alpha: f64,
    a: f64,
    quad: &QuadratureSpec,
) -> Result<f64, QuadratureError> {
    if c == 0.0 {
        return Ok(0.0);
    }
    let tol = quad.inner();
    let mut head = 0.0;
    let start = if a < 1.0 {
        head = integrate(|v| c * v / (v.powf(alpha) + c), a, 1.0, tol)?.value;
        1.0
    } else {
        a
    };
    let sa = start.powf(alpha);
    let s2 = start * start;
    let tail = integrate(
        |w| c * s2 * w.powf(alpha - 3.0) / (sa + c * w.powf(alpha)),
        0.0,
        1.0,
        tol,
    )?
    .value;
    Ok(head + tail)
}

/// `T(c, 4, a) = (√c/2)(π/2 − atan(a²/√c))`.
fn interference_integral_alpha4(c: f64, a: f64) -> f64 {
    if c == 0.0 {
        return 0.0;
    }
    let sc = c.sqrt();
    0.5 * sc * (0.5 * PI - (a * a / sc).atan())
}

fn check_radius(r: f64) -> Result<(), AnalyticError> {
    if r.is_finite() && r > 0.0 {
        Ok(())
    } else {
        Err(AnalyticError::InvalidRadius(r))
    }
}

/// `exp(−2πλ r² T(c, α, 1))`: interferers no closer than the link distance.
fn exclusion_functional(
    r: f64,
    lambda: f64,
    c: f64,
    alpha: f64,
    quad: &QuadratureSpec,
) -> Result<f64, AnalyticError> {
    check_radius(r)?;
    if lambda == 0.0 || c == 0.0 {
        return Ok(1.0);
    }
    let t = interference_integral(c, alpha, 1.0, quad)?;
    Ok((-2.0 * PI * lambda * r * r * t).exp())
}

/// DL-BS interference at a typical UL BS, averaged over the distance `t` to
/// the nearest interfering DL BS (second-nearest BS distance).
pub fn laplace_ul_psi(
    r: f64,
    params: &SystemParams,
    densities: &InterfererDensities,
    quad: &QuadratureSpec,
) -> Result<f64, AnalyticError> {
    check_radius(r)?;
    let k = params.p_b / params.p_m * params.beta_u;
    if densities.lambda_psi == 0.0 || k == 0.0 {
        return Ok(1.0);
    }
    let scale = 2.0 * PI * densities.lambda_psi * r * r;
    let pl = PI * params.lambda_b;
    let alpha = params.alpha;
    let integrand = |u: f64| -> Result<f64, AnalyticError> {
        let t = (u / pl).sqrt();
        let inner = if alpha == 4.0 {
            interference_integral_alpha4(k, t / r)
        } else {
            interference_integral(k, alpha, t / r, quad)?
        };
        Ok((-scale * inner).exp() * u * (-u).exp())
    };
    let v = try_integrate(integrand, 0.0, quad.u_max(), quad.inner())?.value;
    Ok(v.clamp(0.0, 1.0))
}

/// UL-MS interference at a typical UL BS; interferers lie beyond `r`.
pub fn laplace_ul_phi(
    r: f64,
    params: &SystemParams,
    densities: &InterfererDensities,
    quad: &QuadratureSpec,
) -> Result<f64, AnalyticError> {
    exclusion_functional(r, densities.lambda_phi, params.beta_u, params.alpha, quad)
}

/// DL-BS interference at a typical DL MS, by quadrature for any `α`.
pub fn laplace_dl_psi(
    r: f64,
    params: &SystemParams,
    densities: &InterfererDensities,
    quad: &QuadratureSpec,
) -> Result<f64, AnalyticError> {
    exclusion_functional(r, densities.lambda_psi, params.beta_d, params.alpha, quad)
}

/// UL-MS interference at a typical DL MS, by quadrature for any `α`.
pub fn laplace_dl_phi(
    r: f64,
    params: &SystemParams,
    densities: &InterfererDensities,
    quad: &QuadratureSpec,
) -> Result<f64, AnalyticError> {
    exclusion_functional(
        r,
        densities.lambda_phi,
        params.p_m / params.p_b * params.beta_d,
        params.alpha,
        quad,
    )
}

fn closed_form(r: f64, lambda: f64, c: f64, alpha: f64) -> Result<f64, AnalyticError> {
    if alpha != 4.0 {
        return Err(AnalyticError::UnsupportedAlpha(alpha));
    }
    let sc = c.sqrt();
    Ok((-PI * lambda * sc * r * r * sc.atan()).exp())
}

/// `exp(−πλ^ψ √β_D r² atan √β_D)`, valid for `α = 4`.
pub fn closed_form_dl_psi(
    r: f64,
    params: &SystemParams,
    densities: &InterfererDensities,
) -> Result<f64, AnalyticError> {
    closed_form(r, densities.lambda_psi, params.beta_d, params.alpha)
}

/// Same as [`closed_form_dl_psi`] with `β_D` scaled by `P_M/P_B`.
pub fn closed_form_dl_phi(
    r: f64,
    params: &SystemParams,
    densities: &InterfererDensities,
) -> Result<f64, AnalyticError> {
    closed_form(
        r,
        densities.lambda_phi,
        params.p_m / params.p_b * params.beta_d,
        params.alpha,
    )
}

/// How [`success_dl_with`] evaluates the DL functionals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DlRoute {
    /// Closed forms when `α = 4`, quadrature otherwise.
    #[default]
    Auto,
    ClosedForm,
    Quadrature,
}

/// `∫ f(r) 2πλ_B r e^(−πλ_B r²) dr` over the truncated range.
fn average_over_link_distance<F>(
    params: &SystemParams,
    quad: &QuadratureSpec,
    mut f: F,
) -> Result<f64, AnalyticError>
where
    F: FnMut(f64) -> Result<f64, AnalyticError>,
{
    quad.validate()?;
    let pl = PI * params.lambda_b;
    let v = try_integrate(
        |u: f64| Ok::<_, AnalyticError>(f((u / pl).sqrt())? * (-u).exp()),
        0.0,
        quad.u_max(),
        quad.outer(),
    )?
    .value;
    Ok(v.clamp(0.0, 1.0))
}

pub fn success_ul_with_densities(
    params: &SystemParams,
    densities: &InterfererDensities,
    quad: &QuadratureSpec,
) -> Result<f64, AnalyticError> {
    average_over_link_distance(params, quad, |r| {
        Ok(laplace_ul_psi(r, params, densities, quad)?
            * laplace_ul_phi(r, params, densities, quad)?)
    })
}

/// UL success probability of a typical user under CoMP2flex.
pub fn success_ul(params: &SystemParams, quad: &QuadratureSpec) -> Result<f64, AnalyticError> {
    success_ul_with_densities(
        params,
        &interferer_densities(params.delta, params.lambda_b),
        quad,
    )
}

pub fn success_dl_with(
    params: &SystemParams,
    densities: &InterfererDensities,
    quad: &QuadratureSpec,
    route: DlRoute,
) -> Result<f64, AnalyticError> {
    let closed = match route {
        DlRoute::Auto => params.alpha == 4.0,
        DlRoute::ClosedForm => true,
        DlRoute::Quadrature => false,
    };
    average_over_link_distance(params, quad, |r| {
        if closed {
            Ok(closed_form_dl_psi(r, params, densities)?
                * closed_form_dl_phi(r, params, densities)?)
        } else {
            Ok(laplace_dl_psi(r, params, densities, quad)?
                * laplace_dl_phi(r, params, densities, quad)?)
        }
    })
}

/// DL success probability of a typical user under CoMP2flex.
pub fn success_dl(params: &SystemParams, quad: &QuadratureSpec) -> Result<f64, AnalyticError> {
    success_dl_with(
        params,
        &interferer_densities(params.delta, params.lambda_b),
        quad,
        DlRoute::Auto,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticPoint {
    pub direction: Direction,
    pub beta_db: f64,
    pub p_success: f64,
}

/// Success probability over a threshold grid; `β_U = β_D = β` at each point.
/// UL rows come before DL rows.
pub fn analytic_curve(
    params: &SystemParams,
    beta_db: &[f64],
    directions: DirectionSelection,
    quad: &QuadratureSpec,
) -> Result<Vec<AnalyticPoint>, AnalyticError> {
    let jobs: Vec<(Direction, f64)> = Direction::ALL
        .into_iter()
        .filter(|&d| directions.includes(d))
        .flat_map(|d| beta_db.iter().map(move |&b| (d, b)))
        .collect();
    jobs.par_iter()
        .map(|&(direction, b)| {
            let beta = crate::params::db_to_linear(b);
            let p = SystemParams {
                beta_u: beta,
                beta_d: beta,
                ..params.clone()
            };
            let p_success = match direction {
                Direction::Uplink => success_ul(&p, quad)?,
                Direction::Downlink => success_dl(&p, quad)?,
            };
            Ok(AnalyticPoint {
                direction,
                beta_db: b,
                p_success,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{db_to_linear, default_paper_params};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Exp1, Gamma, Poisson};

    fn q() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    fn with_beta(beta: f64) -> SystemParams {
        SystemParams {
            beta_u: beta,
            beta_d: beta,
            ..default_paper_params()
        }
    }

    #[test]
    fn density_examples() {
        let d = interferer_densities(0.5, 0.02);
        assert!((d.lambda_psi - 0.0075).abs() < 1e-15);
        assert!((d.lambda_phi - 0.0075).abs() < 1e-15);
        assert_eq!(
            interferer_densities(0.0, 0.02),
            InterfererDensities {
                lambda_psi: 0.0,
                lambda_phi: 0.01
            }
        );
        assert_eq!(
            interferer_densities(1.0, 0.02),
            InterfererDensities {
                lambda_psi: 0.01,
                lambda_phi: 0.0
            }
        );
    }

    proptest! {
        #[test]
        fn density_identity(delta in 0.0f64..=1.0, lambda in 1e-4f64..1.0) {
            let d = interferer_densities(delta, lambda);
            let expect = (0.5 + delta - delta * delta) * lambda;
            prop_assert!((d.lambda_psi + d.lambda_phi - expect).abs() <= 1e-14 * lambda);
            prop_assert!(d.lambda_psi >= 0.0 && d.lambda_phi >= 0.0);
            prop_assert!(d.lambda_psi <= lambda && d.lambda_phi <= lambda);
            prop_assert!(d.lambda_psi + d.lambda_phi <= lambda * (1.0 + 1e-15));
        }
    }

    #[test]
    fn inner_integral_matches_alpha4_antiderivative() {
        for &c in &[1e-3, 0.1, 1.0, 10.0, 1600.0] {
            for &a in &[1e-3, 0.3, 1.0, 2.0, 17.0] {
                let num = interference_integral(c, 4.0, a, &q()).unwrap();
                let exact = interference_integral_alpha4(c, a);
                assert!(rel(num, exact) < 1e-9, "c={c} a={a}: {num} vs {exact}");
            }
        }
    }

    #[test]
    fn inner_integral_matches_series_for_general_alpha() {
        // For c < 1: T(c, α, 1) = Σ_k (−1)^k c^(k+1) / (α(k+1) − 2).
        for &(c, alpha) in &[(0.5, 3.5), (0.2, 2.5), (0.9, 5.0)] {
            let series: f64 = (0..400)
                .map(|k| {
                    let k1 = (k + 1) as f64;
                    (-1f64).powi(k) * f64::powf(c, k1) / (alpha * k1 - 2.0)
                })
                .sum();
            let num = interference_integral(c, alpha, 1.0, &q()).unwrap();
            assert!(
                rel(num, series) < 1e-8,
                "c={c} α={alpha}: {num} vs {series}"
            );
        }
    }

    #[test]
    fn empty_interferer_sets_give_one_exactly() {
        let p = default_paper_params();
        let none = InterfererDensities {
            lambda_psi: 0.0,
            lambda_phi: 0.0,
        };
        for r in [0.3, 2.0, 9.0] {
            assert_eq!(laplace_ul_psi(r, &p, &none, &q()).unwrap(), 1.0);
            assert_eq!(laplace_ul_phi(r, &p, &none, &q()).unwrap(), 1.0);
            assert_eq!(laplace_dl_psi(r, &p, &none, &q()).unwrap(), 1.0);
            assert_eq!(laplace_dl_phi(r, &p, &none, &q()).unwrap(), 1.0);
        }
    }

    #[test]
    fn vanishing_threshold_limits() {
        let p = with_beta(1e-14);
        let d = interferer_densities(0.5, p.lambda_b);
        assert!((laplace_ul_psi(2.0, &p, &d, &q()).unwrap() - 1.0).abs() < 1e-6);
        assert!((success_ul(&p, &q()).unwrap() - 1.0).abs() < 1e-6);
        assert!((success_dl(&p, &q()).unwrap() - 1.0).abs() < 1e-6);
        let tiny_mobile = SystemParams {
            p_m: 1e-300,
            ..default_paper_params()
        };
        assert!((laplace_dl_phi(2.0, &tiny_mobile, &d, &q()).unwrap() - 1.0).abs() < 1e-12);
        assert!(closed_form_dl_phi(0.0, &p, &d).unwrap() == 1.0);
    }

    #[test]
    fn ul_phi_matches_arctan_form() {
        for &beta in &[0.1, 1.0, 10.0] {
            let p = with_beta(beta);
            let d = interferer_densities(0.5, p.lambda_b);
            for &r in &[0.5, 1.0, 2.0, 5.0] {
                let exact = (-PI * d.lambda_phi * beta.sqrt() * r * r * beta.sqrt().atan()).exp();
                let v = laplace_ul_phi(r, &p, &d, &q()).unwrap();
                assert!(rel(v, exact) < 1e-8, "{v} vs {exact}");
            }
        }
        let d = InterfererDensities {
            lambda_psi: 0.0,
            lambda_phi: 1.0 / PI,
        };
        let v = laplace_ul_phi(1.0, &with_beta(1.0), &d, &q()).unwrap();
        assert!(rel(v, (-PI / 4.0).exp()) < 1e-10);
    }

    #[test]
    fn dl_closed_forms_match_quadrature() {
        for &beta in &[0.1, 1.0, 10.0] {
            let p = with_beta(beta);
            let d = interferer_densities(0.5, p.lambda_b);
            for &r in &[0.5, 1.0, 2.0, 5.0] {
                let a = closed_form_dl_psi(r, &p, &d).unwrap();
                let b = laplace_dl_psi(r, &p, &d, &q()).unwrap();
                assert!(rel(b, a) < 1e-8, "psi r={r} β={beta}");
                let a = closed_form_dl_phi(r, &p, &d).unwrap();
                let b = laplace_dl_phi(r, &p, &d, &q()).unwrap();
                assert!(rel(b, a) < 1e-8, "phi r={r} β={beta}");
            }
        }
    }

    #[test]
    fn closed_form_examples() {
        let p = with_beta(1.0);
        let d = InterfererDensities {
            lambda_psi: 0.0075,
            lambda_phi: 0.0075,
        };
        let v = closed_form_dl_psi(2.0, &p, &d).unwrap();
        assert!(rel(v, (-0.0075 * PI * PI).exp()) < 1e-14);
        assert_eq!(closed_form_dl_psi(0.0, &p, &d).unwrap(), 1.0);
        let equal = SystemParams {
            p_m: p.p_b,
            ..p.clone()
        };
        assert_eq!(
            closed_form_dl_phi(1.7, &equal, &d).unwrap(),
            closed_form_dl_psi(1.7, &equal, &d).unwrap()
        );
        let bad = SystemParams { alpha: 3.5, ..p };
        assert_eq!(
            closed_form_dl_psi(1.0, &bad, &d),
            Err(AnalyticError::UnsupportedAlpha(3.5))
        );
        assert_eq!(
            closed_form_dl_phi(1.0, &bad, &d),
            Err(AnalyticError::UnsupportedAlpha(3.5))
        );
    }

    #[test]
    fn success_dl_matches_rational_closed_form() {
        // With α = 4 the outer integral of exp(−A·u) e^(−u) is 1/(1 + A).
        for b in [-15.0, -5.0, 0.0, 5.0, 15.0] {
            let p = with_beta(db_to_linear(b));
            let d = interferer_densities(p.delta, p.lambda_b);
            let j = |c: f64| 0.5 * c.sqrt() * c.sqrt().atan();
            let expect = p.lambda_b
                / (p.lambda_b
                    + 2.0 * d.lambda_psi * j(p.beta_d)
                    + 2.0 * d.lambda_phi * j(p.p_m / p.p_b * p.beta_d));
            let got = success_dl(&p, &q()).unwrap();
            assert!(rel(got, expect) < 1e-8, "β={b}: {got} vs {expect}");
        }
    }

    #[test]
    fn dl_routes_agree() {
        for b in [-15.0, -10.0, -5.0, 0.0, 5.0, 10.0, 15.0] {
            let p = with_beta(db_to_linear(b));
            let d = interferer_densities(p.delta, p.lambda_b);
            let closed = success_dl_with(&p, &d, &q(), DlRoute::ClosedForm).unwrap();
            let quad = success_dl_with(&p, &d, &q(), DlRoute::Quadrature).unwrap();
            assert!(rel(quad, closed) < 1e-6, "β={b}");
        }
    }

    #[test]
    fn success_is_decreasing_in_threshold() {
        let mut last_ul = f64::INFINITY;
        let mut last_dl = f64::INFINITY;
        for b in [-15.0, -10.0, -5.0, 0.0, 5.0, 10.0, 15.0] {
            let p = with_beta(db_to_linear(b));
            let ul = success_ul(&p, &q()).unwrap();
            let dl = success_dl(&p, &q()).unwrap();
            assert!((0.0..=1.0).contains(&ul) && (0.0..=1.0).contains(&dl));
            assert!(ul < last_ul && dl < last_dl, "β={b}");
            last_ul = ul;
            last_dl = dl;
        }
    }

    #[test]
    fn success_is_non_increasing_in_densities() {
        let p = with_beta(1.0);
        let grid = [0.0, 0.003, 0.0075, 0.012];
        for &psi in &grid {
            let mut last_ul = f64::INFINITY;
            let mut last_dl = f64::INFINITY;
            for &phi in &grid {
                let d = InterfererDensities {
                    lambda_psi: psi,
                    lambda_phi: phi,
                };
                let ul = success_ul_with_densities(&p, &d, &q()).unwrap();
                let dl = success_dl_with(&p, &d, &q(), DlRoute::Auto).unwrap();
                assert!(ul <= last_ul + 1e-12 && dl <= last_dl + 1e-12);
                last_ul = ul;
                last_dl = dl;
            }
        }
        for &phi in &grid {
            let mut last = f64::INFINITY;
            for &psi in &grid {
                let d = InterfererDensities {
                    lambda_psi: psi,
                    lambda_phi: phi,
                };
                let ul = success_ul_with_densities(&p, &d, &q()).unwrap();
                assert!(ul <= last + 1e-12);
                last = ul;
            }
        }
    }

    #[test]
    fn general_alpha_functionals_are_valid_and_monotone() {
        let p = SystemParams {
            alpha: 3.5,
            ..with_beta(1.0)
        };
        let d = interferer_densities(0.5, p.lambda_b);
        let mut last = 1.0;
        for r in [0.5, 1.0, 2.0, 4.0, 8.0] {
            let v = laplace_dl_psi(r, &p, &d, &q()).unwrap();
            assert!(v > 0.0 && v <= 1.0 && v < last);
            last = v;
            let u = laplace_ul_psi(r, &p, &d, &q()).unwrap();
            assert!(u > 0.0 && u <= 1.0);
        }
        let ul = success_ul(&p, &q()).unwrap();
        let dl = success_dl(&p, &q()).unwrap();
        assert!((0.0..=1.0).contains(&ul) && (0.0..=1.0).contains(&dl));
        // Auto falls back to quadrature when α ≠ 4.
        assert_eq!(
            dl,
            success_dl_with(&p, &d, &q(), DlRoute::Quadrature).unwrap()
        );
    }

    #[test]
    fn ul_psi_matches_shot_noise_monte_carlo() {
        // Sample the second-nearest distance t, a PPP of DL BSs beyond t and
        // Exp(1) gains; average exp(−s I). Interferers beyond R are folded in
        // through their exact mean contribution.
        let p = default_paper_params();
        let d = interferer_densities(p.delta, p.lambda_b);
        let r = 2.0;
        let k = p.p_b / p.p_m * p.beta_u;
        let radius: f64 = 200.0;
        let beyond =
            (-2.0 * PI * d.lambda_psi * r * r * interference_integral_alpha4(k, radius / r)).exp();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let gamma = Gamma::new(2.0, 1.0).unwrap();
        let n = 100_000;
        let (mut sum, mut sum2) = (0.0, 0.0);
        for _ in 0..n {
            let t = (gamma.sample(&mut rng) / (PI * p.lambda_b)).sqrt();
            let mut exponent = 0.0;
            if t < radius {
                let area = PI * (radius * radius - t * t);
                let count = Poisson::new(d.lambda_psi * area).unwrap().sample(&mut rng) as usize;
                for _ in 0..count {
                    let x2 = t * t + rng.random::<f64>() * (radius * radius - t * t);
                    let g: f64 = Exp1.sample(&mut rng);
                    exponent += k * r.powi(4) * g / (x2 * x2);
                }
            }
            let v = (-exponent).exp() * if t < radius { beyond } else { 1.0 };
            sum += v;
            sum2 += v * v;
        }
        let mean = sum / n as f64;
        let se = ((sum2 / n as f64 - mean * mean) / n as f64).sqrt();
        let analytic = laplace_ul_psi(r, &p, &d, &q()).unwrap();
        assert!(
            (analytic - mean).abs() < 3.0 * se,
            "analytic {analytic}, mc {mean} ± {se}"
        );
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = default_paper_params();
        let d = interferer_densities(0.5, p.lambda_b);
        assert_eq!(
            laplace_dl_psi(0.0, &p, &d, &q()),
            Err(AnalyticError::InvalidRadius(0.0))
        );
        assert!(matches!(
            laplace_ul_psi(-1.0, &p, &d, &q()),
            Err(AnalyticError::InvalidRadius(_))
        ));
        let bad = QuadratureSpec {
            rel_tol: 0.0,
            ..q()
        };
        assert!(matches!(
            success_dl(&p, &bad),
            Err(AnalyticError::InvalidSpec(_))
        ));
    }

    #[test]
    fn curve_orders_ul_before_dl() {
        let p = default_paper_params();
        let pts = analytic_curve(&p, &[-5.0, 5.0], DirectionSelection::Both, &q()).unwrap();
        let got: Vec<_> = pts.iter().map(|x| (x.direction, x.beta_db)).collect();
        assert_eq!(
            got,
            vec![
                (Direction::Uplink, -5.0),
                (Direction::Uplink, 5.0),
                (Direction::Downlink, -5.0),
                (Direction::Downlink, 5.0)
            ]
        );
        assert_eq!(
            analytic_curve(&p, &[0.0], DirectionSelection::Dl, &q())
                .unwrap()
                .len(),
            1
        );
    }
}
