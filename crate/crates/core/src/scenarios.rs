//! Built-in ensembles with known answers.
//!
//! * [`adhoc_ensemble`]: a pair of rank-2 qutrit states whose Helstrom and
//!   accessible-information optima are known to ten digits.
//! * The tomographic key-distribution scenario: a noisy singlet shared by
//!   Alice and Bob whose purification is held by Eve as two ancilla qubits.
//!   Qubits are numbered 1 (Alice), 2 (Bob), 3 and 4 (ancilla) and stored
//!   in that order as tensor factors; the singlet is `(|01⟩ − |10⟩)/√2`.

use num_complex::Complex64;

use crate::ensemble::{Ensemble, Povm};
use crate::error::{Error, Result};
use crate::linalg::{pauli, Axis, CMatrix, CVector, HermMatrix};

/// Noise level at and above which the analytic eavesdropping measurement is
/// no longer optimal.
pub const SEPARABLE_THRESHOLD: f64 = 2.0 / 3.0;

/// Printed alongside results in the separable regime.
pub const SEPARABLE_NOTE: &str = "separable regime (epsilon >= 2/3): the source state can be \
blended from product states, giving Eve 1/3 bit; the analytic POVM is not optimal here";

/// The two 3×3 states of the ad-hoc example, priors 1/2 each.
pub fn adhoc_ensemble() -> Ensemble {
    let rho1 = HermMatrix::from_real_rows(&[&[0.0, 0.0, 0.0], &[0.0, 5.0, 2.0], &[0.0, 2.0, 10.0]])
        .expect("literal is Hermitian")
        .scale(1.0 / 30.0);
    let rho2 = HermMatrix::from_real_rows(&[&[5.0, 2.0, 0.0], &[2.0, 25.0, 0.0], &[0.0, 0.0, 0.0]])
        .expect("literal is Hermitian")
        .scale(1.0 / 60.0);
    Ensemble::new(vec![rho1, rho2])
        .expect("literal ensemble is valid")
        .with_label("adhoc")
}

/// Projectors onto the nonnegative and negative eigenspaces of `ρ₁ − ρ₂`.
/// Zero eigenvalues go to the first projector.
pub fn helstrom_projectors(e: &Ensemble) -> Result<Povm> {
    if e.len() != 2 {
        return Err(Error::ShapeMismatch(format!(
            "helstrom projectors need J = 2, got J = {}",
            e.len()
        )));
    }
    let diff = e.states()[0].sub(&e.states()[1]);
    let (values, vectors) = diff.eigen();
    let dim = e.dim();
    let mut first = CMatrix::zeros(dim, dim);
    let mut second = CMatrix::zeros(dim, dim);
    for (i, v) in values.iter().enumerate() {
        let col = vectors.column(i);
        let proj = col * col.adjoint();
        if *v >= -1e-14 {
            first += proj;
        } else {
            second += proj;
        }
    }
    Povm::new(vec![
        HermMatrix::hermitian_part(&first),
        HermMatrix::hermitian_part(&second),
    ])
}

fn check_epsilon(eps: f64) -> Result<()> {
    if (0.0..=1.0).contains(&eps) {
        Ok(())
    } else {
        Err(Error::Range(format!(
            "noise parameter {eps} outside [0, 1]"
        )))
    }
}

/// Amplitudes of the purification `a|ψ₁₂ψ₃₄⟩ + b|ψ₁₃ψ₂₄⟩`.
///
/// Both amplitudes are real with `b = √ε` and `2a + b = √(4 − 3ε)`, which
/// makes `ε̄ = (2a + b) b* = √(4ε − 3ε²)` nonnegative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseParameters {
    pub epsilon: f64,
    pub a: Complex64,
    pub b: Complex64,
    pub eps_bar: f64,
}

impl NoiseParameters {
    pub fn new(epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        let b = epsilon.sqrt();
        let a = ((4.0 - 3.0 * epsilon).sqrt() - b) / 2.0;
        Ok(NoiseParameters {
            epsilon,
            a: Complex64::new(a, 0.0),
            b: Complex64::new(b, 0.0),
            eps_bar: eps_bar(epsilon),
        })
    }
}

fn eps_bar(eps: f64) -> f64 {
    (4.0 * eps - 3.0 * eps * eps).max(0.0).sqrt()
}

/// Product of singlets on the given qubit pairs of a four-qubit register
/// (0-based qubit indices).
fn singlet_pairs(pairs: [(usize, usize); 2]) -> CVector {
    let amp = std::f64::consts::FRAC_1_SQRT_2;
    CVector::from_fn(16, |index, _| {
        let bit = |q: usize| (index >> (3 - q)) & 1;
        let mut value = 1.0;
        for (i, j) in pairs {
            if bit(i) == bit(j) {
                return Complex64::new(0.0, 0.0);
            }
            value *= if bit(i) == 0 { amp } else { -amp };
        }
        Complex64::new(value, 0.0)
    })
}

/// Two-qubit singlet `(|01⟩ − |10⟩)/√2`.
pub fn singlet() -> CVector {
    let amp = std::f64::consts::FRAC_1_SQRT_2;
    CVector::from_vec(vec![
        Complex64::new(0.0, 0.0),
        Complex64::new(amp, 0.0),
        Complex64::new(-amp, 0.0),
        Complex64::new(0.0, 0.0),
    ])
}

/// `(1 − ε)|ψ⟩⟨ψ| + ε/4`: the singlet with unbiased noise.
pub fn source_state(eps: f64) -> Result<HermMatrix> {
    check_epsilon(eps)?;
    Ok(HermMatrix::projector(&singlet())
        .scale(1.0 - eps)
        .add(&HermMatrix::identity(4).scale(eps / 4.0)))
}

/// Four-qubit pure state whose reduction to qubits 1, 2 is
/// [`source_state`].
pub fn psi_state(eps: f64) -> Result<CVector> {
    let params = NoiseParameters::new(eps)?;
    Ok(singlet_pairs([(0, 1), (2, 3)]) * params.a + singlet_pairs([(0, 2), (1, 3)]) * params.b)
}

fn ancilla_paulis(axis: Axis) -> (HermMatrix, HermMatrix) {
    (
        pauli(axis, 0, 2).expect("qubit in range"),
        pauli(axis, 1, 2).expect("qubit in range"),
    )
}

/// `σ⃗⁽³⁾·σ⃗⁽⁴⁾` on the two ancilla qubits.
fn ancilla_dot() -> CMatrix {
    Axis::ALL.iter().fold(CMatrix::zeros(4, 4), |acc, &axis| {
        let (s3, s4) = ancilla_paulis(axis);
        acc + s3.matrix() * s4.matrix()
    })
}

/// Outcome labels in the order used by [`tomographic_sextet`] and
/// [`analytic_eve_povm`].
pub const SEXTET_LABELS: [&str; 6] = ["x+", "x-", "y+", "y-", "z+", "z-"];

fn signed_axes() -> impl Iterator<Item = (Axis, f64)> {
    Axis::ALL
        .into_iter()
        .flat_map(|axis| [(axis, 1.0), (axis, -1.0)])
}

/// Eve's conditional ancilla states `ρ_{ζ±}`, one per outcome of Alice's
/// six-outcome Pauli measurement, ordered as [`SEXTET_LABELS`].
pub fn tomographic_sextet(eps: f64) -> Result<Ensemble> {
    check_epsilon(eps)?;
    let bar = eps_bar(eps);
    let dot = ancilla_dot();
    let id = CMatrix::identity(4, 4);
    let states = signed_axes()
        .map(|(axis, sign)| {
            let (s3, s4) = ancilla_paulis(axis);
            let m = &id
                - s3.matrix().scale(sign * 0.5 * (eps + bar))
                - s4.matrix().scale(sign * 0.5 * (eps - bar))
                - dot.scale(1.0 - eps);
            HermMatrix::hermitian_part(&m.scale(1.0 / 24.0))
        })
        .collect();
    Ok(Ensemble::new(states)?.with_label("tomographic"))
}

/// Eve's six-outcome rank-1 measurement, independent of the noise level.
pub fn analytic_eve_povm() -> Povm {
    let dot = ancilla_dot();
    let id = CMatrix::identity(4, 4);
    let half_sqrt3 = 3f64.sqrt() / 2.0;
    let members = signed_axes()
        .map(|(axis, sign)| {
            let (s3, s4) = ancilla_paulis(axis);
            let m = &id
                - (s3.matrix() - s4.matrix()).scale(sign * half_sqrt3)
                - (s3.matrix() * s4.matrix()).scale(1.5)
                + dot.scale(0.5);
            HermMatrix::hermitian_part(&m.scale(1.0 / 6.0))
        })
        .collect();
    Povm::new(members).expect("analytic POVM is complete")
}

fn x_log2_x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

fn alice_bob_bits(eps: f64) -> f64 {
    (x_log2_x(eps) + x_log2_x(2.0 - eps)) / 6.0
}

/// Alice–Bob mutual information in bits.
pub fn i_alice_bob(eps: f64) -> Result<f64> {
    check_epsilon(eps)?;
    Ok(alice_bob_bits(eps))
}

/// Eve's information together with a flag for the separable regime.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EveInformation {
    pub bits: f64,
    /// `ε ≥ 2/3`: the value is that of the analytic POVM, which is not
    /// Eve's best strategy there.
    pub separable_regime: bool,
}

/// Eve's accessible information in bits from the analytic POVM:
/// the Alice–Bob formula evaluated at `1 − √(3/4)·ε̄`.
pub fn i_alice_eve(eps: f64) -> Result<EveInformation> {
    check_epsilon(eps)?;
    let argument = (1.0 - (0.75f64).sqrt() * eps_bar(eps)).max(0.0);
    let separable_regime = eps >= SEPARABLE_THRESHOLD - 1e-15;
    if separable_regime {
        log::warn!("{SEPARABLE_NOTE}");
    }
    Ok(EveInformation {
        bits: alice_bob_bits(argument),
        separable_regime,
    })
}

/// Noise level where Eve's and Bob's information coincide:
/// `(5/2 + √3)^{-1}`.
pub fn critical_epsilon() -> f64 {
    1.0 / (2.5 + 3f64.sqrt())
}
