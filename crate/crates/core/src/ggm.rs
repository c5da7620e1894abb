//! Gaussian graphical model evidence.
//!
//! Observations are zero-mean Gaussian vectors whose precision matrix is
//! Markov with respect to the graph. With a conjugate Wishart prior on
//! each clique's precision block, the block's covariance integrates out to
//! a closed-form log marginal `log_rho`; the posterior over junction trees
//! factorizes clique-by-clique, so move acceptance ratios reduce to four
//! `log_rho` terms.
//!
//! Convention (pinned by the one-dimensional quadrature oracle in the
//! tests): with scale matrix `Q` and degrees of freedom `delta`, a clique
//! `C` of size `k` scores
//!
//! ```text
//! log_rho(C) = -(n k / 2) ln pi
//!              + b ln|Q_C| - a ln|Q_C + S_C|
//!              + ln Gamma_k(a) - ln Gamma_k(b)
//! ```
//!
//! where `S` is the raw scatter matrix (sum of outer products), `b =
//! (delta + k - 1)/2` and `a = (delta + n + k - 1)/2`.

use crate::graph::Graph;
use crate::junction_tree::JunctionTree;
use crate::perturbation::MoveProposal;
use crate::prior::CliqueSeparatorLaw;
use crate::vertex_set::VertexSet;
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use std::collections::HashMap;
use std::sync::RwLock;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GgmError {
    #[error("parameter out of domain: {0}")]
    Domain(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("malformed data: {0}")]
    Format(String),
}

/// Log of the multivariate gamma function `Gamma_k(a)`.
pub fn log_multigamma(k: usize, a: f64) -> Result<f64, GgmError> {
    if k == 0 {
        return Ok(0.0);
    }
    if a <= (k as f64 - 1.0) / 2.0 {
        return Err(GgmError::Domain(format!(
            "multivariate gamma needs a > (k-1)/2, got a={a}, k={k}"
        )));
    }
    let mut sum = (k * (k - 1)) as f64 / 4.0 * std::f64::consts::PI.ln();
    for j in 1..=k {
        sum += statrs::function::gamma::ln_gamma(a + (1.0 - j as f64) / 2.0);
    }
    Ok(sum)
}

/// Data, prior scale and degrees of freedom; immutable after construction,
/// with an internally synchronized per-clique score cache.
pub struct GaussianEvidence {
    n: usize,
    p: usize,
    /// Raw scatter `sum_i y_i y_i^T`.
    scatter: DMatrix<f64>,
    q: DMatrix<f64>,
    delta: f64,
    cache: RwLock<HashMap<VertexSet, f64>>,
}

impl GaussianEvidence {
    /// Builds evidence from an `n x p` data matrix (rows are observations).
    pub fn from_data(data: &DMatrix<f64>, q: DMatrix<f64>, delta: f64) -> Result<Self, GgmError> {
        let (n, p) = data.shape();
        if q.nrows() != p || q.ncols() != p {
            return Err(GgmError::Shape(format!(
                "scale matrix is {}x{}, data has p={p}",
                q.nrows(),
                q.ncols()
            )));
        }
        Self::validate_params(&q, delta)?;
        let scatter = data.transpose() * data;
        Ok(GaussianEvidence {
            n,
            p,
            scatter,
            q,
            delta,
            cache: RwLock::new(HashMap::new()),
        })
    }

    /// Identity scale and `delta = 5`, the default hyperparameters.
    pub fn from_data_default(data: &DMatrix<f64>) -> Result<Self, GgmError> {
        let p = data.ncols();
        Self::from_data(data, DMatrix::identity(p, p), 5.0)
    }

    /// No observations: every score is zero and likelihood ratios vanish,
    /// leaving a prior-only chain.
    pub fn prior_only(p: usize) -> Self {
        GaussianEvidence {
            n: 0,
            p,
            scatter: DMatrix::zeros(p, p),
            q: DMatrix::identity(p, p),
            delta: 5.0,
            cache: RwLock::new(HashMap::new()),
        }
    }

    fn validate_params(q: &DMatrix<f64>, delta: f64) -> Result<(), GgmError> {
        if delta <= 0.0 {
            return Err(GgmError::Domain(format!(
                "degrees of freedom must be positive, got {delta}"
            )));
        }
        if (q - q.transpose()).amax() > 1e-10 {
            return Err(GgmError::Domain("scale matrix is not symmetric".into()));
        }
        if q.clone().cholesky().is_none() {
            return Err(GgmError::Domain(
                "scale matrix is not positive definite".into(),
            ));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    fn submatrix(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(idx.len(), idx.len(), |r, c| m[(idx[r], idx[c])])
    }

    fn log_det_chol(m: DMatrix<f64>) -> Result<f64, GgmError> {
        let chol = m
            .cholesky()
            .ok_or_else(|| GgmError::Numerical("submatrix factorization failed".into()))?;
        Ok(2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>())
    }

    /// Log marginal likelihood of the data restricted to clique `c`;
    /// zero on the empty set.
    pub fn log_rho(&self, c: &VertexSet) -> Result<f64, GgmError> {
        if c.is_empty() {
            return Ok(0.0);
        }
        if let Some(&hit) = self.cache.read().expect("cache lock").get(c) {
            return Ok(hit);
        }
        let idx = c.to_vec();
        if *idx.last().unwrap() >= self.p {
            return Err(GgmError::Shape(format!(
                "clique member out of range for p={}",
                self.p
            )));
        }
        let k = idx.len();
        let b = (self.delta + k as f64 - 1.0) / 2.0;
        let a = b + self.n as f64 / 2.0;
        let q_c = Self::submatrix(&self.q, &idx);
        let mut post = Self::submatrix(&self.scatter, &idx);
        post += &q_c;
        let value = -(self.n as f64 * k as f64 / 2.0) * std::f64::consts::PI.ln()
            + b * Self::log_det_chol(q_c)?
            - a * Self::log_det_chol(post)?
            + log_multigamma(k, a)?
            - log_multigamma(k, b)?;
        if !value.is_finite() {
            return Err(GgmError::Numerical("non-finite clique score".into()));
        }
        self.cache
            .write()
            .expect("cache lock")
            .insert(c.clone(), value);
        Ok(value)
    }

    /// Log likelihood ratio of a move: updated clique and separator
    /// against their current counterparts. Dimension counts balance, so
    /// all constants cancel.
    pub fn log_likelihood_ratio(&self, m: &MoveProposal) -> Result<f64, GgmError> {
        Ok(self.log_rho(&m.clique_after)? + self.log_rho(&m.sep_before)?
            - self.log_rho(&m.sep_after)?
            - self.log_rho(&m.clique_before)?)
    }

    /// Full log score of a junction tree under a factorization law:
    /// clique terms minus separator terms, both weighted by the prior.
    pub fn total_log_score(
        &self,
        law: &CliqueSeparatorLaw,
        t: &JunctionTree,
    ) -> Result<f64, GgmError> {
        let mut total = 0.0;
        for i in 0..t.node_count() {
            total += law.log_phi(t.clique(i)) + self.log_rho(t.clique(i))?;
        }
        for (a, b) in t.tree_edges() {
            let sep = t.separator(a, b);
            total -= law.log_psi(&sep) + self.log_rho(&sep)?;
        }
        Ok(total)
    }
}

impl std::fmt::Debug for GaussianEvidence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "GaussianEvidence(n={}, p={}, delta={})",
            self.n, self.p, self.delta
        )
    }
}

/// Intraclass covariance pattern: unit-free variance on the diagonal and
/// a single correlation on graph edges.
#[derive(Debug, Clone, Copy)]
pub struct IntraclassSpec {
    pub sigma2: f64,
    pub rho: f64,
}

/// Samples `n` zero-mean Gaussian vectors whose covariance is the unique
/// positive definite completion of the intraclass pattern on `g`: diagonal
/// `sigma2`, `sigma2 * rho` on edges, and precision zero off the graph.
///
/// The precision is assembled clique-by-clique: inverses of the specified
/// clique blocks, minus inverses of the separator blocks.
pub fn simulate_intraclass(
    g: &Graph,
    spec: IntraclassSpec,
    n: usize,
    rng: &mut impl Rng,
) -> Result<DMatrix<f64>, GgmError> {
    let theta = intraclass_precision(g, spec)?;
    let p = g.p();
    let cov = theta
        .clone()
        .cholesky()
        .ok_or_else(|| GgmError::Numerical("completed precision not PD".into()))?
        .inverse();
    let l = cov
        .cholesky()
        .ok_or_else(|| GgmError::Numerical("completed covariance not PD".into()))?
        .l();
    let z = DMatrix::from_fn(n, p, |_, _| rng.sample::<f64, _>(StandardNormal));
    Ok(z * l.transpose())
}

/// The completed precision matrix of the intraclass model on `g`.
pub fn intraclass_precision(g: &Graph, spec: IntraclassSpec) -> Result<DMatrix<f64>, GgmError> {
    if spec.sigma2 <= 0.0 {
        return Err(GgmError::Domain(format!(
            "variance must be positive, got {}",
            spec.sigma2
        )));
    }
    let tree = g
        .mcs_clique_tree()
        .map_err(|_| GgmError::Domain("graph is not decomposable".into()))?;
    let max_clique = (0..tree.node_count())
        .map(|i| tree.clique(i).len())
        .max()
        .unwrap_or(1);
    if max_clique >= 2 {
        let lo = -1.0 / (max_clique as f64 - 1.0);
        if spec.rho <= lo || spec.rho >= 1.0 {
            return Err(GgmError::Domain(format!(
                "correlation {} outside ({lo}, 1) for clique size {max_clique}",
                spec.rho
            )));
        }
    }
    let p = g.p();
    let block = |idx: &[usize]| {
        DMatrix::from_fn(idx.len(), idx.len(), |r, c| {
            if r == c {
                spec.sigma2
            } else {
                spec.sigma2 * spec.rho
            }
        })
    };
    let mut theta = DMatrix::zeros(p, p);
    let mut add_inverse = |idx: &[usize], sign: f64| -> Result<(), GgmError> {
        if idx.is_empty() {
            return Ok(());
        }
        let inv = block(idx)
            .cholesky()
            .ok_or_else(|| GgmError::Numerical("intraclass block not PD".into()))?
            .inverse();
        for (r, &i) in idx.iter().enumerate() {
            for (c, &j) in idx.iter().enumerate() {
                theta[(i, j)] += sign * inv[(r, c)];
            }
        }
        Ok(())
    };
    for i in 0..tree.node_count() {
        add_inverse(&tree.clique(i).to_vec(), 1.0)?;
    }
    for (a, b) in tree.tree_edges() {
        add_inverse(&tree.separator(a, b).to_vec(), -1.0)?;
    }
    Ok(theta)
}

/// Reads an `n x p` CSV of decimal floats, one observation per row.
/// Column order defines the vertex indexing.
pub fn read_data_csv(content: &str, skip_header: bool) -> Result<DMatrix<f64>, GgmError> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in content
        .lines()
        .skip(usize::from(skip_header))
        .enumerate()
    {
        if line.trim().is_empty() {
            continue;
        }
        let row: Result<Vec<f64>, _> = line
            .split(',')
            .map(|cell| cell.trim().parse::<f64>())
            .collect();
        let row = row.map_err(|e| GgmError::Format(format!("row {}: {e}", lineno + 1)))?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(GgmError::Format(format!(
                    "row {} has {} columns, expected {}",
                    lineno + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(GgmError::Format("no data rows".into()));
    }
    let p = rows[0].len();
    Ok(DMatrix::from_fn(rows.len(), p, |r, c| rows[r][c]))
}

pub fn write_data_csv(data: &DMatrix<f64>) -> String {
    let mut s = String::new();
    for r in 0..data.nrows() {
        for c in 0..data.ncols() {
            if c > 0 {
                s.push(',');
            }
            s.push_str(&format!("{}", data[(r, c)]));
        }
        s.push('\n');
    }
    s
}
