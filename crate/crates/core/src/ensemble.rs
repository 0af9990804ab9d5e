//! Ensembles, POVMs, joint probability tables and the information
//! functionals evaluated on them.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{inv_sqrt, max_abs_diff, trace_product, CMatrix, HermMatrix, PSD_TOL};

/// Accepted deviation of `tr Σρ_j` from 1 before rescaling kicks in.
const TRACE_TOL: f64 = 1e-10;
/// Largest trace deviation that is silently repaired by rescaling.
const TRACE_RESCALE_LIMIT: f64 = 1e-6;
const COMPLETENESS_TOL: f64 = 1e-10;
const NEGATIVE_PROBABILITY_TOL: f64 = 1e-12;
/// Members with trace at or below this are dropped when merging.
pub const DEAD_MEMBER_TRACE: f64 = 1e-12;
/// Default tolerance on the cross-product equivalence test.
pub const EQUIVALENCE_TOL: f64 = 1e-8;
/// `p log p` terms with `p` at or below this contribute nothing.
const ZERO_PROBABILITY: f64 = 1e-300;

/// Ordered list of subnormalized states `ρ_j` whose sum has unit trace.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    states: Vec<HermMatrix>,
    label: Option<String>,
}

impl Ensemble {
    /// Validates the states. A total trace within 1e-6 of one is rescaled
    /// (with a warning); anything further off is rejected.
    pub fn new(states: Vec<HermMatrix>) -> Result<Self> {
        if states.len() < 2 {
            return Err(Error::TooFewStates(states.len()));
        }
        let dim = states[0].dim();
        if let Some(bad) = states.iter().find(|s| s.dim() != dim) {
            return Err(Error::DimensionMismatch(format!(
                "state of dimension {} in an ensemble of dimension {}",
                bad.dim(),
                dim
            )));
        }
        for (index, s) in states.iter().enumerate() {
            let min_eigenvalue = s.min_eigenvalue();
            if min_eigenvalue < -PSD_TOL {
                return Err(Error::NotPositive {
                    index,
                    min_eigenvalue,
                });
            }
        }
        let trace: f64 = states.iter().map(HermMatrix::trace).sum();
        let deviation = (trace - 1.0).abs();
        let states = if deviation <= TRACE_TOL {
            states
        } else if deviation <= TRACE_RESCALE_LIMIT {
            log::warn!("ensemble trace {trace} rescaled to 1");
            states.iter().map(|s| s.scale(1.0 / trace)).collect()
        } else {
            return Err(Error::TraceNotUnity { trace });
        };
        Ok(Ensemble {
            states,
            label: None,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn states(&self) -> &[HermMatrix] {
        &self.states
    }

    /// Number of states `J`.
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    /// Prior probabilities `tr ρ_j`.
    pub fn priors(&self) -> Vec<f64> {
        self.states.iter().map(HermMatrix::trace).collect()
    }

    /// The total state `ρ = Σ_j ρ_j`.
    pub fn total_state(&self) -> HermMatrix {
        self.states
            .iter()
            .skip(1)
            .fold(self.states[0].clone(), |acc, s| acc.add(s))
    }
}

/// Positive operators summing to the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    members: Vec<HermMatrix>,
}

impl Povm {
    /// Validates positivity and completeness (tolerance 1e-10).
    pub fn new(members: Vec<HermMatrix>) -> Result<Self> {
        let dim = Self::common_dim(&members)?;
        for (index, m) in members.iter().enumerate() {
            let min_eigenvalue = m.min_eigenvalue();
            if min_eigenvalue < -PSD_TOL {
                return Err(Error::NotPositive {
                    index,
                    min_eigenvalue,
                });
            }
        }
        let deviation = completeness_deviation(&members, dim);
        if deviation > COMPLETENESS_TOL {
            return Err(Error::Incomplete { deviation });
        }
        Ok(Povm { members })
    }

    /// Normalizes arbitrary positive operators to a POVM by conjugating each
    /// with `S^{-1/2}`, `S` being their sum.
    pub fn from_unnormalized(members: Vec<HermMatrix>) -> Result<Self> {
        Self::common_dim(&members)?;
        let s = sum_members(&members);
        let x = inv_sqrt(&s)?;
        Povm::new(members.iter().map(|m| m.sandwich(&x)).collect())
    }

    /// Maximally ignorant POVM `Π_k = c_k · 1`, with weights normalized to
    /// unit sum.
    pub fn ignorant(dim: usize, weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if weights.is_empty() || weights.iter().any(|&w| w < 0.0) || total <= 0.0 {
            return Err(Error::Range(
                "ignorant POVM weights must be nonnegative with a positive sum".into(),
            ));
        }
        Povm::new(
            weights
                .iter()
                .map(|w| HermMatrix::identity(dim).scale(w / total))
                .collect(),
        )
    }

    fn common_dim(members: &[HermMatrix]) -> Result<usize> {
        let first = members.first().ok_or(Error::EmptyPovm)?;
        let dim = first.dim();
        if let Some(bad) = members.iter().find(|m| m.dim() != dim) {
            return Err(Error::DimensionMismatch(format!(
                "member of dimension {} in a POVM of dimension {}",
                bad.dim(),
                dim
            )));
        }
        Ok(dim)
    }

    pub fn members(&self) -> &[HermMatrix] {
        &self.members
    }

    pub fn into_members(self) -> Vec<HermMatrix> {
        self.members
    }

    /// Number of members `K`.
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.members[0].dim()
    }

    /// Max entry of `|Σ_k Π_k − 1|`.
    pub fn completeness_deviation(&self) -> f64 {
        completeness_deviation(&self.members, self.dim())
    }

    /// Smallest eigenvalue over all members.
    pub fn min_eigenvalue(&self) -> f64 {
        self.members
            .iter()
            .map(HermMatrix::min_eigenvalue)
            .fold(f64::INFINITY, f64::min)
    }
}

fn sum_members(members: &[HermMatrix]) -> HermMatrix {
    members
        .iter()
        .skip(1)
        .fold(members[0].clone(), |acc, m| acc.add(m))
}

fn completeness_deviation(members: &[HermMatrix], dim: usize) -> f64 {
    max_abs_diff(sum_members(members).matrix(), &CMatrix::identity(dim, dim))
}

/// The `J × K` table `p_jk` with its marginals.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution {
    p: DMatrix<f64>,
    row_marginals: Vec<f64>,
    col_marginals: Vec<f64>,
}

impl JointDistribution {
    /// Wraps a table of nonnegative entries summing to one.
    pub fn from_table(p: DMatrix<f64>) -> Result<Self> {
        if let Some((idx, &value)) = p
            .iter()
            .enumerate()
            .find(|(_, &v)| v < 0.0 || !v.is_finite())
        {
            // column-major storage
            return Err(Error::NegativeProbability {
                j: idx % p.nrows(),
                k: idx / p.nrows(),
                value,
            });
        }
        let total = p.sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::Range(format!(
                "joint probabilities sum to {total}, expected 1"
            )));
        }
        let row_marginals = p.row_iter().map(|r| r.sum()).collect();
        let col_marginals = p.column_iter().map(|c| c.sum()).collect();
        Ok(JointDistribution {
            p,
            row_marginals,
            col_marginals,
        })
    }

    pub fn table(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.p[(j, k)]
    }

    /// `J`
    pub fn rows(&self) -> usize {
        self.p.nrows()
    }

    /// `K`
    pub fn cols(&self) -> usize {
        self.p.ncols()
    }

    /// `p_{j·}`
    pub fn row_marginals(&self) -> &[f64] {
        &self.row_marginals
    }

    /// `p_{·k}`
    pub fn col_marginals(&self) -> &[f64] {
        &self.col_marginals
    }
}

/// `p_jk = tr(ρ_j Π_k)`. Values down to −1e-12 are clamped to zero; anything
/// more negative means the POVM is corrupted.
pub fn joint_probabilities(e: &Ensemble, m: &Povm) -> Result<JointDistribution> {
    if e.dim() != m.dim() {
        return Err(Error::DimensionMismatch(format!(
            "ensemble dimension {} vs POVM dimension {}",
            e.dim(),
            m.dim()
        )));
    }
    let mut p = DMatrix::zeros(e.len(), m.len());
    for (j, rho) in e.states().iter().enumerate() {
        for (k, pi) in m.members().iter().enumerate() {
            let value = trace_product(rho, pi).re;
            if value < -NEGATIVE_PROBABILITY_TOL {
                return Err(Error::NegativeProbability { j, k, value });
            }
            p[(j, k)] = value.max(0.0);
        }
    }
    let row_marginals = p.row_iter().map(|r| r.sum()).collect();
    let col_marginals = p.column_iter().map(|c| c.sum()).collect();
    Ok(JointDistribution {
        p,
        row_marginals,
        col_marginals,
    })
}

/// Logarithm base for reporting information values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum LogBase {
    #[default]
    Nat,
    Bit,
}

impl LogBase {
    /// Converts a value in nats into this base.
    pub fn from_nats(self, nats: f64) -> f64 {
        match self {
            LogBase::Nat => nats,
            LogBase::Bit => nats / std::f64::consts::LN_2,
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            LogBase::Nat => "nats",
            LogBase::Bit => "bits",
        }
    }
}

/// `I = Σ p_jk log(p_jk / (p_{j·} p_{·k}))` with `0 · log 0 = 0`.
pub fn mutual_information(d: &JointDistribution, base: LogBase) -> f64 {
    let mut nats = 0.0;
    for j in 0..d.rows() {
        for k in 0..d.cols() {
            let p = d.get(j, k);
            if p <= ZERO_PROBABILITY {
                continue;
            }
            nats += p * (p / (d.row_marginals[j] * d.col_marginals[k])).ln();
        }
    }
    base.from_nats(nats)
}

/// `Σ_j p_jj`; needs a square table.
pub fn success_rate(d: &JointDistribution) -> Result<f64> {
    if d.rows() != d.cols() {
        return Err(Error::ShapeMismatch(format!(
            "success rate needs J = K, got J = {}, K = {}",
            d.rows(),
            d.cols()
        )));
    }
    Ok((0..d.rows()).map(|j| d.get(j, j)).sum())
}

/// `K` positive operators `A_k†A_k` from i.i.d. complex Gaussian `A_k`.
/// Deterministic in `seed`.
pub fn random_positive_operators(dim: usize, count: usize, seed: u64) -> Vec<HermMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let a = CMatrix::from_fn(dim, dim, |_, _| {
                Complex64::new(
                    StandardNormal.sample(&mut rng),
                    StandardNormal.sample(&mut rng),
                )
            });
            HermMatrix::hermitian_part(&(a.adjoint() * a))
        })
        .collect()
}

/// Random `K`-member POVM on a `dim`-dimensional space.
pub fn random_povm(dim: usize, k: usize, seed: u64) -> Result<Povm> {
    if dim == 0 || k == 0 {
        return Err(Error::Range(format!(
            "random POVM needs dim >= 1 and K >= 1, got dim = {dim}, K = {k}"
        )));
    }
    Povm::from_unnormalized(random_positive_operators(dim, k, seed))
}

/// Convex blend `(1 − fraction)·m + fraction·random_povm(dim, K, seed)`.
pub fn perturb_ignorant(m: &Povm, fraction: f64, seed: u64) -> Result<Povm> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::Range(format!(
            "blend fraction {fraction} outside [0, 1]"
        )));
    }
    let noise = random_povm(m.dim(), m.len(), seed)?;
    let members = m
        .members()
        .iter()
        .zip(noise.members())
        .map(|(a, b)| a.scale(1.0 - fraction).add(&b.scale(fraction)))
        .collect();
    Povm::new(members)
}

/// True when columns `k1` and `k2` of the table are proportional:
/// `|p_{j k1} p_{j' k2} − p_{j' k1} p_{j k2}| ≤ tol` for all `j, j'`.
pub fn columns_equivalent(d: &JointDistribution, k1: usize, k2: usize, tol: f64) -> bool {
    let rows = d.rows();
    (0..rows).all(|j| {
        (0..rows)
            .all(|jp| (d.get(j, k1) * d.get(jp, k2) - d.get(jp, k1) * d.get(j, k2)).abs() <= tol)
    })
}

/// Sums equivalent members into one and drops members of negligible trace.
///
/// Members are grouped greedily in order: each member joins the first
/// earlier group whose representative it is equivalent to.
pub fn merge_equivalent(m: &Povm, d: &JointDistribution, tol: f64) -> Result<Povm> {
    if d.cols() != m.len() {
        return Err(Error::ShapeMismatch(format!(
            "table has {} columns, POVM has {} members",
            d.cols(),
            m.len()
        )));
    }
    let live: Vec<usize> = (0..m.len())
        .filter(|&k| m.members()[k].trace() > DEAD_MEMBER_TRACE)
        .collect();
    let mut groups: Vec<(usize, HermMatrix)> = Vec::new();
    for &k in &live {
        let member = &m.members()[k];
        match groups
            .iter_mut()
            .find(|(rep, _)| columns_equivalent(d, *rep, k, tol))
        {
            Some((_, sum)) => *sum = sum.add(member),
            None => groups.push((k, member.clone())),
        }
    }
    let members: Vec<HermMatrix> = groups.into_iter().map(|(_, s)| s).collect();
    if members.len() == live.len() && live.len() == m.len() {
        return Ok(m.clone());
    }
    Povm::from_unnormalized(members)
}
