//! Stability constants, classification, admissible stepsizes and bound
//! envelopes.
//!
//! For a problem with bounds `(α, β_j, γ₁, γ₂_j)` write `B = Σ β_j` and
//! `G₂ = Σ γ₂_j`. The derived quantities are
//!
//! ```text
//! c     = 2α + 2B + (γ₁ + G₂)²          contraction constant
//! σ     = 2α + B + γ₁G₂ + γ₁²           present-state dissipation rate
//! ϱ     = B + γ₁G₂ + G₂²                delayed-argument feedback weight
//! α₀    = σ,  ν = ϱ/|σ|   (σ < 0)       asymptotic-decay certificate
//! ```
//!
//! and `c = σ + ϱ` identically. `c ≤ 0` makes coupled mean-square deviations
//! non-expanding for every stepsize; `c < 0` (equivalently `α₀ < 0, ν < 1`)
//! drives them to zero in blocks of geometric decay. For several delays the
//! sums above aggregate conservatively and reduce to the single-delay
//! formulas at `r = 1`.

mod eigen;
mod nodes;

pub use eigen::{hermitian_part, max_eigenvalue_hermitian};
pub use nodes::{node_sequence, NodeSequence};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{CoefficientSet, ComplexMatrix};

/// Margin keeping `(α + B)·h < 1` strict when capping stepsizes.
const SOLVABILITY_MARGIN: f64 = 1e-6;

/// `c = 2α + 2Σβ_j + (γ₁ + Σγ₂_j)²`. For one delay this expands to
/// `2α + 2β + γ₁² + 2γ₁γ₂ + γ₂²`.
pub fn contraction_constant(coeffs: &CoefficientSet) -> f64 {
    let g = coeffs.gamma1 + coeffs.gamma2_sum();
    2.0 * coeffs.alpha + 2.0 * coeffs.beta_sum() + g * g
}

/// `(σ, ϱ)` with `σ = 2α + B + γ₁G₂ + γ₁²` and `ϱ = B + γ₁G₂ + G₂²`.
pub fn sigma_rho(coeffs: &CoefficientSet) -> (f64, f64) {
    let b = coeffs.beta_sum();
    let g1 = coeffs.gamma1;
    let g2 = coeffs.gamma2_sum();
    let sigma = 2.0 * coeffs.alpha + b + g1 * g2 + g1 * g1;
    let rho = b + g1 * g2 + g2 * g2;
    (sigma, rho)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticCertificate {
    pub alpha0: f64,
    /// `ϱ/|σ|`; undefined when `σ ≥ 0` (the hypothesis already failed).
    pub nu: Option<f64>,
    pub ok: bool,
}

/// Decay certificate: `ok` iff `α₀ < 0` and `ν < 1` (strictly).
pub fn asymptotic_certificate(coeffs: &CoefficientSet) -> AsymptoticCertificate {
    let (sigma, rho) = sigma_rho(coeffs);
    if sigma < 0.0 {
        let nu = rho / sigma.abs();
        AsymptoticCertificate {
            alpha0: sigma,
            nu: Some(nu),
            ok: nu < 1.0,
        }
    } else {
        AsymptoticCertificate {
            alpha0: sigma,
            nu: None,
            ok: false,
        }
    }
}

/// `C_μ = ν + (1-ν)·e^{α₀·μ}`, the per-block decay factor; lies in `(0, 1)`
/// whenever `α₀ < 0`, `ν < 1` and `μ > 0`.
pub fn block_decay_factor(alpha0: f64, nu: f64, mu: f64) -> f64 {
    nu + (1.0 - nu) * (alpha0 * mu).exp()
}

/// Per-stepsize constants of the drift-implicit scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteConstants {
    pub h: f64,
    /// `(1 + hγ₁² + 2hγ₁G₂ + hG₂²)/(1 - 2hα - 2hB)` — the candidate ratio
    /// when the newest node attains the running maximum.
    pub ratio_a: f64,
    /// `(1 + hB + hγ₁² + 2hγ₁G₂ + hG₂²)/(1 - 2hα - hB)` — the candidate
    /// ratio when an earlier node or the initial data attains it.
    pub ratio_b: f64,
    /// One-step growth ratio of the nodal mean-square deviation:
    /// `max(ratio_a, ratio_b)`.
    pub c1: f64,
    /// Exponential envelope rate `c₁/h`.
    pub c_tilde: f64,
    /// Blockwise decay ratio — the same max expression; `< 1` iff `c < 0`.
    pub c2: f64,
    /// Whether the implicit step equation is uniquely solvable: `(α + B)h < 1`.
    pub solvable: bool,
}

/// Computes the per-stepsize constants; errors if a denominator is not
/// positive (possible only when `c > 0` and `h·c` is too large).
pub fn discrete_constants(coeffs: &CoefficientSet, h: f64) -> Result<DiscreteConstants> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Parameter(format!("stepsize must be positive, got {h}")));
    }
    let alpha = coeffs.alpha;
    let b = coeffs.beta_sum();
    let g1 = coeffs.gamma1;
    let g2 = coeffs.gamma2_sum();
    let gg = g1 * g1 + 2.0 * g1 * g2 + g2 * g2;

    let den1 = 1.0 - 2.0 * h * alpha - 2.0 * h * b;
    let den2 = 1.0 - 2.0 * h * alpha - h * b;
    if den1 <= 0.0 {
        return Err(Error::Stepsize {
            h,
            reason: format!("denominator 1 - 2hα - 2hβ = {den1} must be positive"),
        });
    }
    if den2 <= 0.0 {
        return Err(Error::Stepsize {
            h,
            reason: format!("denominator 1 - 2hα - hβ = {den2} must be positive"),
        });
    }
    let ratio_a = (1.0 + h * gg) / den1;
    let ratio_b = (1.0 + h * b + h * gg) / den2;
    let c1 = ratio_a.max(ratio_b);
    Ok(DiscreteConstants {
        h,
        ratio_a,
        ratio_b,
        c1,
        c_tilde: c1 / h,
        c2: c1,
        solvable: (alpha + b) * h < 1.0,
    })
}

/// Largest admissible stepsize: the growth cap `h·c ≤ c0` when `c > 0`
/// (no constraint otherwise), intersected with the solvability cap
/// `(α + B)·h < 1` when `α + B > 0`.
pub fn max_stepsize(coeffs: &CoefficientSet, c0: f64) -> Result<f64> {
    if !(0.0 < c0 && c0 < 1.0) {
        return Err(Error::Parameter(format!("c0 must lie in (0, 1), got {c0}")));
    }
    let c = contraction_constant(coeffs);
    let ab = coeffs.alpha + coeffs.beta_sum();
    let solvability_cap = if ab > 0.0 {
        (1.0 - SOLVABILITY_MARGIN) / ab
    } else {
        f64::INFINITY
    };
    if c <= 0.0 {
        Ok(solvability_cap)
    } else {
        Ok((c0 / c).min(solvability_cap))
    }
}

/// Envelope for `E|x(t) - y(t)|²` over a finite window: `e^{c·Δt}·D0` when
/// `c > 0`, constant `D0` otherwise. `elapsed = t - a`, `d0` the worst
/// initial mean-square deviation.
pub fn envelope_analytic(c: f64, d0: f64, elapsed: f64) -> f64 {
    if c > 0.0 {
        (c * elapsed).exp() * d0
    } else {
        d0
    }
}

/// Discrete counterpart with rate `c̃ = c₁/h`.
pub fn envelope_discrete(c: f64, c_tilde: f64, d0: f64, elapsed: f64) -> f64 {
    if c > 0.0 {
        (c_tilde * elapsed).exp() * d0
    } else {
        d0
    }
}

/// Strength ordering of what the certificate establishes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum StabilityClass {
    Uncertified,
    /// Bounded growth `e^{c(t-a)}` of coupled deviations (`c > 0`).
    StableInMeanSquare,
    /// Deviations never exceed the initial one (`c ≤ 0`), any stepsize.
    Contractive,
    /// Deviations decay to zero blockwise (`α₀ < 0` and `ν < 1`).
    AsymptoticallyContractive,
}

impl StabilityClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            StabilityClass::Uncertified => "uncertified",
            StabilityClass::StableInMeanSquare => "stable_in_mean_square",
            StabilityClass::Contractive => "contractive",
            StabilityClass::AsymptoticallyContractive => "asymptotically_contractive",
        }
    }
}

#[derive(Debug, Clone)]
pub struct StabilityCertificate {
    pub c: f64,
    pub sigma: f64,
    pub rho: f64,
    pub alpha0: f64,
    pub nu: Option<f64>,
    pub classification: StabilityClass,
    /// Block decay factor for the chosen `mu`, when asymptotic decay holds.
    pub c_mu: Option<f64>,
    pub mu: f64,
    pub h_max: f64,
    pub stepsizes: Vec<DiscreteConstants>,
}

impl StabilityCertificate {
    pub fn stable_in_mean_square(&self) -> bool {
        self.classification >= StabilityClass::StableInMeanSquare
    }

    pub fn contractive(&self) -> bool {
        self.classification >= StabilityClass::Contractive
    }

    pub fn asymptotically_contractive(&self) -> bool {
        self.classification >= StabilityClass::AsymptoticallyContractive
    }
}

/// Computes every derived constant plus per-stepsize records for the given
/// candidate stepsizes.
pub fn certify(
    coeffs: &CoefficientSet,
    c0: f64,
    mu: f64,
    stepsizes: &[f64],
) -> Result<StabilityCertificate> {
    if mu <= 0.0 || !mu.is_finite() {
        return Err(Error::Parameter(format!("mu must be positive, got {mu}")));
    }
    let c = contraction_constant(coeffs);
    let (sigma, rho) = sigma_rho(coeffs);
    let asym = asymptotic_certificate(coeffs);
    let classification = if !c.is_finite() {
        StabilityClass::Uncertified
    } else if asym.ok {
        StabilityClass::AsymptoticallyContractive
    } else if c <= 0.0 {
        StabilityClass::Contractive
    } else {
        StabilityClass::StableInMeanSquare
    };
    let c_mu = match (asym.ok, asym.nu) {
        (true, Some(nu)) => Some(block_decay_factor(asym.alpha0, nu, mu)),
        _ => None,
    };
    let h_max = max_stepsize(coeffs, c0)?;
    let stepsizes = stepsizes
        .iter()
        .map(|&h| discrete_constants(coeffs, h))
        .collect::<Result<Vec<_>>>()?;
    Ok(StabilityCertificate {
        c,
        sigma,
        rho,
        alpha0: asym.alpha0,
        nu: asym.nu,
        classification,
        c_mu,
        mu,
        h_max,
        stepsizes,
    })
}

/// Coefficient bounds of the linear family
/// `dx = (A₁x + Σ A₂ⱼ·x(t-τⱼ) + F)dt + (B₁x + Σ B₂ⱼ·x(t-τⱼ) + G)dw`:
/// `α` is the largest eigenvalue of the Hermitian part `(A₁* + A₁)/2`, the
/// rest are Frobenius norms.
pub fn linear_coefficient_bounds(
    a1: &ComplexMatrix,
    a2: &[ComplexMatrix],
    b1: &ComplexMatrix,
    b2: &[ComplexMatrix],
) -> Result<CoefficientSet> {
    let d = a1.rows();
    let square = |m: &ComplexMatrix| m.rows() == d && m.cols() == d;
    if !square(a1) || !square(b1) || a2.iter().any(|m| !square(m)) || b2.iter().any(|m| !square(m))
    {
        return Err(Error::Parameter(
            "linear coefficient matrices must all be square of equal dimension".into(),
        ));
    }
    if a2.len() != b2.len() || a2.is_empty() {
        return Err(Error::Parameter(
            "need one A2 and one B2 block per delay (>= 1)".into(),
        ));
    }
    let alpha = max_eigenvalue_hermitian(&hermitian_part(a1))?;
    CoefficientSet::new(
        alpha,
        a2.iter().map(ComplexMatrix::trace_norm).collect(),
        b1.trace_norm(),
        b2.iter().map(ComplexMatrix::trace_norm).collect(),
    )
}

/// Scalar mean-square stability test for the constant-coefficient linear
/// equation: `Re A₁ + |A₂| + ½(|B₁| + |B₂|)² < 0`.
pub fn scalar_linear_ms_stable(a1: Complex64, a2: Complex64, b1: Complex64, b2: Complex64) -> bool {
    let s = b1.norm() + b2.norm();
    a1.re + a2.norm() + 0.5 * s * s < 0.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn coeffs(alpha: f64, beta: f64, g1: f64, g2: f64) -> CoefficientSet {
        CoefficientSet::single(alpha, beta, g1, g2).unwrap()
    }

    #[test]
    fn contraction_constant_hand_values() {
        assert_relative_eq!(
            contraction_constant(&coeffs(-4.0, 1.0, 0.5, 0.5)),
            -5.0,
            max_relative = 1e-15
        );
        assert_eq!(contraction_constant(&coeffs(0.0, 0.0, 0.0, 0.0)), 0.0);
        assert_relative_eq!(
            contraction_constant(&coeffs(-2.0, 0.5, 0.5, 0.5)),
            -2.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn sigma_rho_hand_values() {
        let (s, r) = sigma_rho(&coeffs(-4.0, 1.0, 0.5, 0.5));
        assert_relative_eq!(s, -6.5, max_relative = 1e-15);
        assert_relative_eq!(r, 1.5, max_relative = 1e-15);
        assert_eq!(sigma_rho(&coeffs(0.0, 0.0, 0.0, 0.0)), (0.0, 0.0));
        let (s, r) = sigma_rho(&coeffs(-1.0, 0.0, 1.0, 0.0));
        assert_relative_eq!(s, -1.0);
        assert_relative_eq!(r, 0.0);
    }

    #[test]
    fn sigma_plus_rho_equals_c() {
        let sets = [
            coeffs(-4.0, 1.0, 0.5, 0.5),
            coeffs(0.3, 0.2, 0.1, 0.7),
            coeffs(-0.5, 0.0, 1.0, 1.0),
        ];
        for c in &sets {
            let (s, r) = sigma_rho(c);
            assert_relative_eq!(s + r, contraction_constant(c), max_relative = 1e-14);
        }
    }

    #[test]
    fn asymptotic_certificate_hand_values() {
        let a = asymptotic_certificate(&coeffs(-4.0, 1.0, 0.5, 0.5));
        assert_relative_eq!(a.alpha0, -6.5);
        assert_relative_eq!(a.nu.unwrap(), 1.5 / 6.5, max_relative = 1e-15);
        assert!(a.ok);

        let a = asymptotic_certificate(&coeffs(0.0, 0.0, 0.0, 0.0));
        assert!(!a.ok);
        assert!(a.nu.is_none());

        // boundary ν = 1 is excluded
        let a = asymptotic_certificate(&coeffs(-1.0, 1.0, 0.0, 0.0));
        assert_relative_eq!(a.alpha0, -1.0);
        assert_relative_eq!(a.nu.unwrap(), 1.0);
        assert!(!a.ok);
    }

    #[test]
    fn block_decay_factor_in_unit_interval() {
        let a = asymptotic_certificate(&coeffs(-4.0, 1.0, 0.5, 0.5));
        for mu in [0.01, 1.0, 100.0] {
            let c_mu = block_decay_factor(a.alpha0, a.nu.unwrap(), mu);
            assert!(c_mu > 0.0 && c_mu < 1.0, "C_mu = {c_mu} at mu = {mu}");
        }
    }

    #[test]
    fn discrete_constants_hand_values() {
        let d = discrete_constants(&coeffs(-4.0, 1.0, 0.5, 0.5), 0.1).unwrap();
        assert_relative_eq!(d.ratio_a, 0.6875, max_relative = 1e-15); // 1.1/1.6
        assert_relative_eq!(d.ratio_b, 1.2 / 1.7, max_relative = 1e-15);
        assert_relative_eq!(d.c1, 1.2 / 1.7, max_relative = 1e-15);
        assert_relative_eq!(d.c2, 1.2 / 1.7, max_relative = 1e-15);
        assert_relative_eq!(d.c_tilde, 1.2 / 1.7 / 0.1, max_relative = 1e-15);
        assert!(d.solvable);

        let d = discrete_constants(&coeffs(0.0, 0.0, 0.0, 0.0), 0.37).unwrap();
        assert_eq!(d.c1, 1.0);
        assert_eq!(d.c2, 1.0);
        assert_relative_eq!(d.c_tilde, 1.0 / 0.37);
        assert!(d.solvable);

        let d = discrete_constants(&coeffs(5.0, 6.0, 0.0, 0.0), 0.01).unwrap();
        assert!(d.solvable); // (5+6)*0.01 = 0.11 < 1
        let d = discrete_constants(&coeffs(5.0, 6.0, 0.0, 0.0), 0.1);
        // (5+6)*0.1 = 1.1 >= 1: still computable (denominators negative -> error)
        match d {
            Err(Error::Stepsize { .. }) => {}
            Ok(d) => assert!(!d.solvable),
            Err(e) => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn max_stepsize_hand_values() {
        // c = -5, alpha+beta = -3: unconstrained
        assert_eq!(max_stepsize(&coeffs(-4.0, 1.0, 0.5, 0.5), 0.5).unwrap(), f64::INFINITY);
        // c = 2 (alpha = 0.25, beta = 0.25, gammas such that c = 2)...
        // simplest: alpha=0.25, beta=0.25, g1=g2=0.5 -> c = 0.5+0.5+1 = 2, ab = 0.5
        let c = coeffs(0.25, 0.25, 0.5, 0.5);
        assert_relative_eq!(contraction_constant(&c), 2.0);
        assert_relative_eq!(max_stepsize(&c, 0.5).unwrap(), 0.25);
        // c = 0 exactly: any stepsize
        let c = coeffs(-0.5, 0.5, 0.0, 0.0);
        assert_eq!(contraction_constant(&c), 0.0);
        assert_eq!(max_stepsize(&c, 0.5).unwrap(), f64::INFINITY);
        assert!(max_stepsize(&c, 1.5).is_err());
    }

    #[test]
    fn envelopes() {
        assert_eq!(envelope_analytic(-5.0, 0.25, 3.7), 0.25);
        assert_relative_eq!(
            envelope_analytic(2.0, 1.0, 1.0),
            std::f64::consts::E * std::f64::consts::E,
            max_relative = 1e-15
        );
        assert_eq!(envelope_analytic(2.0, 0.0, 10.0), 0.0);
        assert_eq!(envelope_discrete(-1.0, 123.0, 0.25, 9.0), 0.25);
        assert_relative_eq!(envelope_discrete(2.0, 3.0, 1.0, 1.0), 3.0f64.exp());
    }

    #[test]
    fn certify_classifies() {
        let cert = certify(&coeffs(-4.0, 1.0, 0.5, 0.5), 0.5, 1.0, &[0.1]).unwrap();
        assert_eq!(cert.classification, StabilityClass::AsymptoticallyContractive);
        assert!(cert.contractive() && cert.stable_in_mean_square());
        assert!(cert.c_mu.unwrap() > 0.0 && cert.c_mu.unwrap() < 1.0);

        let cert = certify(&coeffs(0.0, 0.0, 0.0, 0.0), 0.5, 1.0, &[]).unwrap();
        assert_eq!(cert.classification, StabilityClass::Contractive);
        assert!(!cert.asymptotically_contractive());

        let cert = certify(&coeffs(1.0, 0.0, 0.0, 0.0), 0.5, 1.0, &[]).unwrap();
        assert_eq!(cert.classification, StabilityClass::StableInMeanSquare);
        assert_relative_eq!(cert.c, 2.0);
        assert_relative_eq!(cert.h_max, 0.25);
    }

    #[test]
    fn linear_bounds_scalar_and_diagonal() {
        let scalar = |v: f64| ComplexMatrix::scalar(Complex64::new(v, 0.0));
        let c = linear_coefficient_bounds(
            &scalar(-4.0),
            &[scalar(1.0)],
            &scalar(0.5),
            &[scalar(0.5)],
        )
        .unwrap();
        assert_relative_eq!(c.alpha, -4.0, max_relative = 1e-12);
        assert_relative_eq!(c.beta[0], 1.0);
        assert_relative_eq!(c.gamma1, 0.5);
        assert_relative_eq!(c.gamma2[0], 0.5);

        let diag = ComplexMatrix::from_real_rows(&[&[-1.0, 0.0], &[0.0, -3.0]]);
        let zero = ComplexMatrix::zeros(2, 2);
        let c = linear_coefficient_bounds(&diag, &[zero.clone()], &zero.clone(), &[zero.clone()])
            .unwrap();
        assert_relative_eq!(c.alpha, -1.0, max_relative = 1e-12);

        let c = linear_coefficient_bounds(&zero, &[zero.clone()], &zero.clone(), &[zero.clone()])
            .unwrap();
        assert_eq!(c.alpha, 0.0);
        assert_eq!(c.beta[0], 0.0);

        // dimension mismatch
        let bad = ComplexMatrix::zeros(1, 1);
        assert!(linear_coefficient_bounds(&diag, &[bad.clone()], &bad.clone(), &[bad]).is_err());
    }

    #[test]
    fn scalar_criterion_hand_values() {
        let z = |re: f64| Complex64::new(re, 0.0);
        assert!(scalar_linear_ms_stable(z(-4.0), z(1.0), z(0.5), z(0.5)));
        assert!(!scalar_linear_ms_stable(z(0.0), z(0.0), z(0.0), z(0.0)));
        assert!(!scalar_linear_ms_stable(z(-1.0), z(1.0), z(0.0), z(0.0)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        // The scalar stability test and c < 0 from the matrix-derived bounds
        // are the same inequality: 2·Re A₁ + 2|A₂| + (|B₁|+|B₂|)² = 2·(lhs).
        #[test]
        fn scalar_criterion_matches_contraction_sign(
            a1re in -3.0f64..3.0, a1im in -3.0f64..3.0,
            a2re in -3.0f64..3.0, a2im in -3.0f64..3.0,
            b1re in -2.0f64..2.0, b1im in -2.0f64..2.0,
            b2re in -2.0f64..2.0, b2im in -2.0f64..2.0,
        ) {
            let a1 = Complex64::new(a1re, a1im);
            let a2 = Complex64::new(a2re, a2im);
            let b1 = Complex64::new(b1re, b1im);
            let b2 = Complex64::new(b2re, b2im);
            let coeffs = linear_coefficient_bounds(
                &ComplexMatrix::scalar(a1),
                &[ComplexMatrix::scalar(a2)],
                &ComplexMatrix::scalar(b1),
                &[ComplexMatrix::scalar(b2)],
            ).unwrap();
            let c = contraction_constant(&coeffs);
            // guard the knife-edge c == 0 against roundoff disagreements
            prop_assume!(c.abs() > 1e-12);
            prop_assert_eq!(scalar_linear_ms_stable(a1, a2, b1, b2), c < 0.0);
        }

        // c <= 0 keeps the one-step ratio at or below 1 for every stepsize;
        // strictly below when c < 0.
        #[test]
        fn growth_ratio_bounded_by_one(
            alpha in -6.0f64..0.0,
            beta in 0.0f64..2.0,
            g1 in 0.0f64..1.5,
            g2 in 0.0f64..1.5,
            h_exp in -3.0f64..3.0,
        ) {
            let coeffs = CoefficientSet::single(alpha, beta, g1, g2).unwrap();
            let c = contraction_constant(&coeffs);
            prop_assume!(c <= 0.0);
            let h = 10f64.powf(h_exp);
            let d = discrete_constants(&coeffs, h).unwrap();
            prop_assert!(d.c2 <= 1.0 + 1e-14, "c2 = {} at h = {h}", d.c2);
            if c < -1e-12 {
                prop_assert!(d.c2 < 1.0, "c2 = {} should be < 1 for c = {c}", d.c2);
            }
        }
    }
}
