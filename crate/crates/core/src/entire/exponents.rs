use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponents `(p, q)` in dimension `N`, with the dual and Sobolev exponents
/// derived from them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "ExponentRecord", try_from = "ExponentRecord")]
pub struct ExponentPair {
    pub p: f64,
    pub q: f64,
    pub dim: usize,
    pub alpha: f64,
    pub beta: f64,
    /// `+inf` when `Np - 2(p+1) <= 0`.
    pub alpha_star: f64,
    /// `+inf` when `Nq - 2(q+1) <= 0`.
    pub beta_star: f64,
    pub hc_holds: bool,
}

/// Serialized form: the derived exponents are recomputed on load.
#[derive(Serialize, Deserialize)]
struct ExponentRecord {
    p: f64,
    q: f64,
    dim: usize,
}

impl From<ExponentPair> for ExponentRecord {
    fn from(e: ExponentPair) -> Self {
        Self { p: e.p, q: e.q, dim: e.dim }
    }
}

impl TryFrom<ExponentRecord> for ExponentPair {
    type Error = Error;

    fn try_from(r: ExponentRecord) -> Result<Self> {
        ExponentPair::new(r.p, r.q, r.dim)
    }
}

fn sobolev_star(n: f64, e: f64) -> f64 {
    let den = n * e - 2.0 * (e + 1.0);
    if den <= 0.0 {
        f64::INFINITY
    } else {
        n * (e + 1.0) / den
    }
}

impl ExponentPair {
    pub fn new(p: f64, q: f64, dim: usize) -> Result<Self> {
        if !(p > 1.0 && q > 1.0 && p.is_finite() && q.is_finite()) {
            return Err(Error::InvalidInput(format!("exponents must exceed 1 (p = {p}, q = {q})")));
        }
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be at least 1".into()));
        }
        let n = dim as f64;
        let (lhs, rhs) = Self::hyperbola_sides(p, q, dim);
        Ok(Self {
            p,
            q,
            dim,
            alpha: (p + 1.0) / p,
            beta: (q + 1.0) / q,
            alpha_star: sobolev_star(n, p),
            beta_star: sobolev_star(n, q),
            hc_holds: lhs > rhs,
        })
    }

    fn hyperbola_sides(p: f64, q: f64, dim: usize) -> (f64, f64) {
        let n = dim as f64;
        (1.0 / (p + 1.0) + 1.0 / (q + 1.0), (n - 2.0) / n)
    }

    /// `(1/(p+1) + 1/(q+1), (N-2)/N)`.
    pub fn hyperbola(&self) -> (f64, f64) {
        Self::hyperbola_sides(self.p, self.q, self.dim)
    }

    pub fn require_hc(&self) -> Result<()> {
        if self.hc_holds {
            return Ok(());
        }
        let (lhs, rhs) = self.hyperbola();
        Err(Error::HyperbolaViolated { p: self.p, q: self.q, dim: self.dim, lhs, rhs })
    }

    pub fn is_symmetric(&self) -> bool {
        self.p == self.q
    }

    /// The same pair with `p` and `q` exchanged.
    pub fn swapped(&self) -> Self {
        Self::new(self.q, self.p, self.dim).expect("swapping keeps validity")
    }

    /// Energy weights `(1/2 - 1/(p+1), 1/2 - 1/(q+1))`.
    pub fn energy_weights(&self) -> (f64, f64) {
        (0.5 - 1.0 / (self.p + 1.0), 0.5 - 1.0 / (self.q + 1.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BootstrapTag {
    /// A denominator reached zero: the integrability exponent is unbounded.
    Unbounded,
    MaxIter,
    /// `alpha*` or `beta*` is already infinite.
    ImmediateRegularity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bootstrap {
    /// `(p_n, q_n)` for `n = 1, 2, ...`.
    pub steps: Vec<(f64, f64)>,
    pub tag: BootstrapTag,
    /// Strictly increasing in both components over all recorded steps.
    pub increasing: bool,
    /// Last `q_n` when the iteration ran out of steps.
    pub limit_estimate: Option<f64>,
    /// Closed-form fixed point `N(pq-1)/(2p+2)`.
    pub fixed_point: f64,
    /// Fixed point located by running the inverse map from `q_1`.
    pub backward_limit: Option<f64>,
}

pub fn fixed_point_q0(e: &ExponentPair) -> f64 {
    e.dim as f64 * (e.p * e.q - 1.0) / (2.0 * e.p + 2.0)
}

/// Runs `p_{n+1} = N q_n / (N q - 2 q_n)`, `q_{n+1} = N p_{n+1} / (N p - 2 p_{n+1})`
/// from `(p_1, q_1) = (beta*, alpha*)`.
pub fn bootstrap_exponents(e: &ExponentPair, n_max: usize) -> Result<Bootstrap> {
    if e.alpha_star.is_infinite() || e.beta_star.is_infinite() {
        return Err(Error::InvalidExponents);
    }
    let n = e.dim as f64;
    let mut steps = vec![(e.beta_star, e.alpha_star)];
    let mut tag = BootstrapTag::MaxIter;
    while steps.len() < n_max {
        let (_, qn) = *steps.last().unwrap();
        let den_p = n * e.q - 2.0 * qn;
        if den_p <= 0.0 {
            tag = BootstrapTag::Unbounded;
            break;
        }
        let p_next = n * qn / den_p;
        let den_q = n * e.p - 2.0 * p_next;
        if den_q <= 0.0 {
            steps.push((p_next, f64::INFINITY));
            tag = BootstrapTag::Unbounded;
            break;
        }
        steps.push((p_next, n * p_next / den_q));
    }
    let increasing = steps.windows(2).all(|w| w[1].0 > w[0].0 && w[1].1 > w[0].1);
    let limit_estimate = (tag == BootstrapTag::MaxIter).then(|| steps.last().unwrap().1);
    let backward_limit = (tag == BootstrapTag::MaxIter).then(|| backward_fixed_point(e, n_max));
    Ok(Bootstrap {
        steps,
        tag,
        increasing,
        limit_estimate,
        fixed_point: fixed_point_q0(e),
        backward_limit,
    })
}

/// Iterates the inverse recursion from `q_1`; the forward fixed point is
/// attracting for it.
fn backward_fixed_point(e: &ExponentPair, n_max: usize) -> f64 {
    let n = e.dim as f64;
    let mut q = e.alpha_star;
    for _ in 0..n_max.max(1) * 10 {
        let p_next = n * e.p * q / (n + 2.0 * q);
        let q_prev = n * e.q * p_next / (n + 2.0 * p_next);
        if (q_prev - q).abs() <= 1e-15 * q.abs() {
            return q_prev;
        }
        q = q_prev;
    }
    q
}

/// Bootstrap classification that folds the immediate case into a tag.
pub fn regularity_tag(e: &ExponentPair, n_max: usize) -> BootstrapTag {
    match bootstrap_exponents(e, n_max) {
        Ok(b) => b.tag,
        Err(_) => BootstrapTag::ImmediateRegularity,
    }
}
