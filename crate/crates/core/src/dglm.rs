//! Block-wise DGLM filtering.
//!
//! Within a block the state is static: each observation is absorbed with a
//! linear Bayes update and the posterior becomes the next prior unchanged.
//! Between blocks (and before the first one) the evolution `theta' = G theta
//! + omega` is applied, with the evolution variance set by a discount factor.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::ef_models::{ConjugateHyper, GuideMoments, ObservationModel};
use crate::error::{domain, Error, Result};
use crate::partition::Partition;

/// Dense square matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    dim: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scaled_identity(dim, 1.0)
    }

    pub fn scaled_identity(dim: usize, s: f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = s;
        }
        m
    }

    pub fn scalar(v: f64) -> Self {
        Self { dim: 1, data: vec![v] }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Dimension(format!("matrix rows must all have length {dim}")));
        }
        Ok(Self {
            dim,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.dim.max(1)).map(<[f64]>::to_vec).collect()
    }

    fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.dim).all(|i| (0..i).all(|j| (self.get(i, j) - self.get(j, i)).abs() <= tol))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        if self.dim == 1 {
            return self.data[0];
        }
        let m = DMatrix::from_row_slice(self.dim, self.dim, &self.data);
        SymmetricEigen::new(m)
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// `G X G'` into `out`.
    fn sandwich(g: &Matrix, x: &Matrix, out: &mut Matrix, tmp: &mut Vec<f64>) {
        let d = g.dim;
        if d == 1 {
            out.data[0] = g.data[0] * x.data[0] * g.data[0];
            return;
        }
        tmp.clear();
        tmp.resize(d * d, 0.0);
        for i in 0..d {
            for j in 0..d {
                tmp[i * d + j] = (0..d).map(|k| g.get(i, k) * x.get(k, j)).sum();
            }
        }
        for i in 0..d {
            for j in 0..d {
                let v = (0..d).map(|k| tmp[i * d + k] * g.get(j, k)).sum();
                out.set(i, j, v);
            }
        }
    }

    fn symmetrize(&mut self) {
        let d = self.dim;
        for i in 0..d {
            for j in 0..i {
                let v = 0.5 * (self.get(i, j) + self.get(j, i));
                self.set(i, j, v);
                self.set(j, i, v);
            }
        }
    }

    /// Floors tiny negative eigenvalues (within 1e-10) at zero.
    fn floor_eigenvalues(&mut self) {
        let d = self.dim;
        if d == 1 {
            if self.data[0] < 0.0 && self.data[0] > -1e-10 {
                self.data[0] = 0.0;
            }
            return;
        }
        let eig = SymmetricEigen::new(DMatrix::from_row_slice(d, d, &self.data));
        let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        if min < 0.0 && min > -1e-10 {
            let vals = eig.eigenvalues.map(|v| v.max(0.0));
            let rebuilt = &eig.eigenvectors * DMatrix::from_diagonal(&vals) * eig.eigenvectors.transpose();
            for i in 0..d {
                for j in 0..d {
                    self.set(i, j, rebuilt[(i, j)]);
                }
            }
            self.symmetrize();
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateMoments {
    pub m: Vec<f64>,
    pub c: Matrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorMoments {
    pub a: Vec<f64>,
    pub r: Matrix,
}

/// Regression vectors `F_t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Regressors {
    Constant(Vec<f64>),
    PerObservation(Vec<Vec<f64>>),
}

impl Regressors {
    #[inline]
    pub fn at(&self, t: usize) -> &[f64] {
        match self {
            Regressors::Constant(f) => f,
            Regressors::PerObservation(fs) => &fs[t],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub regressors: Regressors,
    pub evolution: Matrix,
    pub m0: Vec<f64>,
    pub c0: Matrix,
    pub delta: f64,
    /// Apply evolution (with discount noise) before the first block.
    pub evolve_first_block: bool,
}

impl ModelSpec {
    /// Scalar local-level model: `lambda_t = f * theta`, `G = g`.
    pub fn local_level(f: f64, g: f64, m0: f64, c0: f64, delta: f64) -> Self {
        Self {
            regressors: Regressors::Constant(vec![f]),
            evolution: Matrix::scalar(g),
            m0: vec![m0],
            c0: Matrix::scalar(c0),
            delta,
            evolve_first_block: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.m0.len()
    }

    pub fn with_delta(&self, delta: f64) -> Self {
        Self { delta, ..self.clone() }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let d = self.dim();
        if d == 0 {
            return Err(Error::Dimension("state dimension must be at least 1".into()));
        }
        if self.evolution.dim() != d || self.c0.dim() != d {
            return Err(Error::Dimension(format!(
                "G is {0}x{0} and C00 is {1}x{1}, expected {d}x{d}",
                self.evolution.dim(),
                self.c0.dim()
            )));
        }
        match &self.regressors {
            Regressors::Constant(f) if f.len() != d => {
                return Err(Error::Dimension(format!("F has length {}, expected {d}", f.len())))
            }
            Regressors::PerObservation(fs) => {
                if fs.len() < n {
                    return Err(Error::Dimension(format!(
                        "{} regressor rows for {n} observations",
                        fs.len()
                    )));
                }
                if fs.iter().any(|f| f.len() != d) {
                    return Err(Error::Dimension(format!("every regressor row must have length {d}")));
                }
                if fs.iter().flatten().any(|v| !v.is_finite()) {
                    return domain("regressors must be finite");
                }
            }
            Regressors::Constant(f) if f.iter().any(|v| !v.is_finite()) => return domain("F must be finite"),
            _ => {}
        }
        if !self.evolution.is_finite() || !self.c0.is_finite() || self.m0.iter().any(|v| !v.is_finite()) {
            return domain("G, m00 and C00 must be finite");
        }
        if !self.c0.is_symmetric(1e-12) || self.c0.min_eigenvalue() < -1e-10 {
            return domain("C00 must be symmetric positive semi-definite");
        }
        check_delta(self.delta)
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta <= 1.0 {
        Ok(())
    } else {
        domain(format!("discount factor must lie in (0, 1], got {delta}"))
    }
}

/// Discount evolution variance `W = (1 - delta)/delta * G C G'`.
pub fn discount_w(c: &Matrix, g: &Matrix, delta: f64) -> Result<Matrix> {
    check_delta(delta)?;
    if c.dim() != g.dim() {
        return Err(Error::Dimension("C and G differ in dimension".into()));
    }
    let mut out = Matrix::zeros(c.dim());
    Matrix::sandwich(g, c, &mut out, &mut Vec::new());
    let k = (1.0 - delta) / delta;
    out.data.iter_mut().for_each(|v| *v *= k);
    Ok(out)
}

/// Prior moments for the next block: `a = G m`, `R = G C G' + W`.
pub fn evolve(s: &StateMoments, g: &Matrix, w: &Matrix) -> Result<PriorMoments> {
    let d = s.m.len();
    if g.dim() != d || w.dim() != d || s.c.dim() != d {
        return Err(Error::Dimension("state, G and W must share one dimension".into()));
    }
    let a = (0..d).map(|i| (0..d).map(|k| g.get(i, k) * s.m[k]).sum()).collect();
    let mut r = Matrix::zeros(d);
    Matrix::sandwich(g, &s.c, &mut r, &mut Vec::new());
    r.data.iter_mut().zip(&w.data).for_each(|(x, w)| *x += w);
    r.symmetrize();
    Ok(PriorMoments { a, r })
}

/// Moments of the linear predictor `lambda = F' theta`: `f = F'a`, `q = F'RF`.
pub fn predictor_moments(p: &PriorMoments, f_vec: &[f64]) -> Result<(f64, f64)> {
    let d = p.a.len();
    if f_vec.len() != d {
        return Err(Error::Dimension(format!("F has length {}, expected {d}", f_vec.len())));
    }
    let f = dot(f_vec, &p.a);
    let q = quad_form(&p.r, f_vec);
    if !(q > 0.0) {
        return Err(Error::DegeneratePrior(q));
    }
    Ok((f, q))
}

/// Linear Bayes update of the state given the guide moments.
pub fn lbe_update(p: &PriorMoments, f_vec: &[f64], f: f64, q: f64, f_star: f64, q_star: f64) -> Result<StateMoments> {
    if !(q > 0.0) {
        return Err(Error::DegeneratePrior(q));
    }
    let mut s = StateMoments {
        m: p.a.clone(),
        c: p.r.clone(),
    };
    let mut rf = vec![0.0; p.a.len()];
    lbe_in_place(&mut s, f_vec, f, q, f_star, q_star, &mut rf);
    Ok(s)
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn quad_form(r: &Matrix, f: &[f64]) -> f64 {
    let d = f.len();
    if d == 1 {
        return f[0] * r.data[0] * f[0];
    }
    (0..d)
        .map(|i| f[i] * (0..d).map(|j| r.get(i, j) * f[j]).sum::<f64>())
        .sum()
}

/// In-place version: `s` holds (a, R) on entry and (m, C) on exit.
#[inline]
fn lbe_in_place(s: &mut StateMoments, f_vec: &[f64], f: f64, q: f64, f_star: f64, q_star: f64, rf: &mut [f64]) {
    let d = s.m.len();
    if d == 1 {
        let r = s.c.data[0];
        let rf0 = r * f_vec[0];
        s.m[0] += rf0 * (f_star - f) / q;
        s.c.data[0] = r - rf0 * rf0 * (1.0 - q_star / q) / q;
        s.c.floor_eigenvalues();
        return;
    }
    for (i, slot) in rf.iter_mut().enumerate().take(d) {
        *slot = (0..d).map(|j| s.c.get(i, j) * f_vec[j]).sum();
    }
    let gain = (f_star - f) / q;
    let shrink = (1.0 - q_star / q) / q;
    for i in 0..d {
        s.m[i] += rf[i] * gain;
        for j in 0..d {
            let v = s.c.get(i, j) - rf[i] * rf[j] * shrink;
            s.c.set(i, j, v);
        }
    }
    s.c.symmetrize();
    s.c.floor_eigenvalues();
}

/// Per-observation filter output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObsRecord {
    pub guide: GuideMoments,
    /// Guide prior used for the one-step predictive of this observation.
    pub hyper: ConjugateHyper,
    pub log_pred: f64,
    pub m: Vec<f64>,
    pub c: Matrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterResult {
    pub per_obs: Vec<ObsRecord>,
    pub per_block: Vec<f64>,
    pub total_log_pred: f64,
}

/// Stateful stepper shared by the full forward pass and the Gibbs sampler.
#[derive(Debug, Clone)]
pub struct Filter<'a> {
    y: &'a [f64],
    model: &'a ObservationModel,
    spec: &'a ModelSpec,
    inflate: f64,
    tmp: Vec<f64>,
    scratch: Matrix,
    rf: Vec<f64>,
}

impl<'a> Filter<'a> {
    /// Builds a filter; validates the series support and the model spec.
    pub fn new(y: &'a [f64], model: &'a ObservationModel, spec: &'a ModelSpec) -> Result<Self> {
        model.check_series(y)?;
        spec.validate(y.len())?;
        Ok(Self::new_unchecked(y, model, spec))
    }

    pub(crate) fn new_unchecked(y: &'a [f64], model: &'a ObservationModel, spec: &'a ModelSpec) -> Self {
        let d = spec.dim();
        Self {
            y,
            model,
            spec,
            inflate: 1.0 / spec.delta,
            tmp: Vec::with_capacity(d * d),
            scratch: Matrix::zeros(d),
            rf: vec![0.0; d],
        }
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn spec(&self) -> &ModelSpec {
        self.spec
    }

    pub fn initial_state(&self) -> StateMoments {
        StateMoments {
            m: self.spec.m0.clone(),
            c: self.spec.c0.clone(),
        }
    }

    /// Discounted evolution in place: `a = G m`, `R = G C G' / delta`.
    #[inline]
    pub fn evolve_in_place(&mut self, s: &mut StateMoments) {
        let g = &self.spec.evolution;
        let d = g.dim();
        if d == 1 {
            let gv = g.data[0];
            s.m[0] *= gv;
            s.c.data[0] = gv * s.c.data[0] * gv * self.inflate;
            return;
        }
        let a: Vec<f64> = (0..d).map(|i| (0..d).map(|k| g.get(i, k) * s.m[k]).sum()).collect();
        s.m.copy_from_slice(&a);
        Matrix::sandwich(g, &s.c, &mut self.scratch, &mut self.tmp);
        for (dst, src) in s.c.data.iter_mut().zip(&self.scratch.data) {
            *dst = src * self.inflate;
        }
        s.c.symmetrize();
    }

    /// Processes observation `t`; `starts_block` applies evolution first.
    /// Returns the one-step log predictive of `y[t]`.
    #[inline]
    pub fn step(&mut self, s: &mut StateMoments, t: usize, starts_block: bool) -> Result<f64> {
        if starts_block && (t > 0 || self.spec.evolve_first_block) {
            self.evolve_in_place(s);
        }
        let fv = self.spec.regressors.at(t);
        let f = dot(fv, &s.m);
        let q = quad_form(&s.c, fv);
        if !(q > 0.0) || !q.is_finite() {
            return Err(Error::DegeneratePrior(q));
        }
        let h = self.model.elicit_hyper(f, q)?;
        let y = self.y[t];
        let (f_star, q_star) = self.model.posterior_guide(h, y)?;
        let lp = self.model.log_predictive(h, y);
        lbe_in_place(s, fv, f, q, f_star, q_star, &mut self.rf);
        Ok(lp)
    }

    /// Like [`Filter::step`] but also returns the guide moments and hyperparameters.
    pub fn step_recorded(&mut self, s: &mut StateMoments, t: usize, starts_block: bool) -> Result<ObsRecord> {
        if starts_block && (t > 0 || self.spec.evolve_first_block) {
            self.evolve_in_place(s);
        }
        let fv = self.spec.regressors.at(t);
        let prior = PriorMoments {
            a: s.m.clone(),
            r: s.c.clone(),
        };
        let (f, q) = predictor_moments(&prior, fv)?;
        let hyper = self.model.elicit_hyper(f, q)?;
        let y = self.y[t];
        let (f_star, q_star) = self.model.posterior_guide(hyper, y)?;
        let log_pred = self.model.log_predictive(hyper, y);
        lbe_in_place(s, fv, f, q, f_star, q_star, &mut self.rf);
        Ok(ObsRecord {
            guide: GuideMoments { f, q, f_star, q_star },
            hyper,
            log_pred,
            m: s.m.clone(),
            c: s.c.clone(),
        })
    }

    /// Total log predictive for observations `from..n`, starting from `s`,
    /// where `breaks_before(t)` says whether a new block starts at `t`.
    pub fn run_from(
        &mut self,
        s: &mut StateMoments,
        from: usize,
        mut starts_block: impl FnMut(usize) -> bool,
    ) -> Result<f64> {
        let mut total = 0.0;
        for t in from..self.y.len() {
            total += self.step(s, t, starts_block(t))?;
        }
        Ok(total)
    }

    /// Total log predictive of the whole series under `partition`.
    pub fn total_log_pred(&mut self, partition: &Partition) -> Result<f64> {
        let mut s = self.initial_state();
        let starts = partition.block_starts();
        self.run_from(&mut s, 0, |t| starts[t])
    }
}

/// Full forward pass over a partition.
pub fn filter_partition(
    y: &[f64],
    model: &ObservationModel,
    spec: &ModelSpec,
    partition: &Partition,
) -> Result<FilterResult> {
    if partition.n() != y.len() {
        return Err(Error::InvalidPartition(format!(
            "partition covers {} observations but the series has {}",
            partition.n(),
            y.len()
        )));
    }
    let mut filter = Filter::new(y, model, spec)?;
    let mut s = filter.initial_state();
    let mut per_obs = Vec::with_capacity(y.len());
    let mut per_block = Vec::with_capacity(partition.num_blocks());
    for (start, end) in partition.blocks() {
        let mut block = 0.0;
        for t in start..end {
            let rec = filter.step_recorded(&mut s, t, t == start)?;
            block += rec.log_pred;
            per_obs.push(rec);
        }
        per_block.push(block);
    }
    let total_log_pred = per_block.iter().sum();
    Ok(FilterResult {
        per_obs,
        per_block,
        total_log_pred,
    })
}
