//! L2-regularised logistic-regression probes on standardised features.
//!
//! The objective is the mean log-loss plus `‖w‖² / (2·C·n)` (the bias is not
//! penalised), minimised by Newton-CG with an Armijo line search until the
//! gradient's max-norm drops below the tolerance.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::dump::RepresentationRecord;
use super::seeded_hash;

pub const C_GRID: [f64; 5] = [0.01, 0.1, 1.0, 10.0, 100.0];

#[derive(Debug, Error, PartialEq)]
pub enum ProbeError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("training set has a single class")]
    SingleClassTrainingSet,
    #[error("vector of length {found}, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("optimizer did not converge for C={c} (gradient norm {grad_norm:e} after {iterations} iterations)")]
    ConvergenceFailure { c: f64, grad_norm: f64, iterations: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub seed: u64,
    pub folds: usize,
    pub grid: Vec<f64>,
    pub tolerance: f64,
    pub max_iter: usize,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            seed: 0,
            folds: 5,
            grid: C_GRID.to_vec(),
            tolerance: 1e-8,
            max_iter: 200,
        }
    }
}

/// One training example. `group` keeps records of one problem in one fold.
#[derive(Clone, Copy, Debug)]
pub struct ProbeSample<'a> {
    pub group: &'a str,
    pub x: &'a [f32],
    pub y: bool,
}

impl<'a> From<&'a RepresentationRecord> for ProbeSample<'a> {
    fn from(r: &'a RepresentationRecord) -> Self {
        ProbeSample {
            group: &r.problem_id,
            x: &r.vector,
            y: r.label.is_positive(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvPoint {
    pub c: f64,
    pub accuracy: f64,
    pub folds_used: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub c: f64,
    pub cv: Vec<CvPoint>,
    pub folds: usize,
    pub seed: u64,
    pub iterations: usize,
}

impl Probe {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn decision(&self, x: &[f32]) -> f64 {
        let mut z = self.bias;
        for j in 0..self.weights.len() {
            z += self.weights[j] * ((x[j] as f64 - self.mean[j]) / self.scale[j]);
        }
        z
    }

    pub fn predict_proba(&self, x: &[f32]) -> f64 {
        sigmoid(self.decision(x))
    }

    /// Probability exactly 0.5 predicts the negative class.
    pub fn predict(&self, x: &[f32]) -> bool {
        self.predict_proba(x) > 0.5
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// log(1 + e^z)
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

struct Standardizer {
    mean: Vec<f64>,
    scale: Vec<f64>,
}

impl Standardizer {
    /// Population mean and standard deviation; a constant feature keeps its
    /// value as the mean and gets scale 1.
    fn fit(samples: &[ProbeSample], idx: &[usize], d: usize) -> Standardizer {
        let n = idx.len() as f64;
        let mut mean = vec![0.0; d];
        let mut scale = vec![1.0; d];
        for j in 0..d {
            let first = samples[idx[0]].x[j] as f64;
            if idx.iter().all(|&i| samples[i].x[j] as f64 == first) {
                mean[j] = first;
                continue;
            }
            let m = idx.iter().map(|&i| samples[i].x[j] as f64).sum::<f64>() / n;
            let var = idx.iter().map(|&i| (samples[i].x[j] as f64 - m).powi(2)).sum::<f64>() / n;
            mean[j] = m;
            let s = var.sqrt();
            scale[j] = if s > 0.0 && s.is_finite() { s } else { 1.0 };
        }
        Standardizer { mean, scale }
    }

    fn matrix(&self, samples: &[ProbeSample], idx: &[usize]) -> Vec<f64> {
        let d = self.mean.len();
        let mut x = Vec::with_capacity(idx.len() * d);
        for &i in idx {
            for j in 0..d {
                x.push((samples[i].x[j] as f64 - self.mean[j]) / self.scale[j]);
            }
        }
        x
    }
}

struct Problem<'a> {
    x: &'a [f64],
    y: Vec<f64>,
    n: usize,
    d: usize,
    lambda: f64,
}

impl Problem<'_> {
    fn margins(&self, theta: &[f64]) -> Vec<f64> {
        let (w, b) = theta.split_at(self.d);
        (0..self.n)
            .map(|i| b[0] + self.x[i * self.d..(i + 1) * self.d].iter().zip(w).map(|(a, c)| a * c).sum::<f64>())
            .collect()
    }

    fn value(&self, theta: &[f64]) -> f64 {
        let z = self.margins(theta);
        let loss: f64 = z.iter().zip(&self.y).map(|(&z, &y)| softplus(z) - y * z).sum();
        let w2: f64 = theta[..self.d].iter().map(|w| w * w).sum();
        loss / self.n as f64 + 0.5 * self.lambda * w2
    }

    fn gradient(&self, theta: &[f64], p: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.d + 1];
        for i in 0..self.n {
            let r = p[i] - self.y[i];
            let row = &self.x[i * self.d..(i + 1) * self.d];
            for j in 0..self.d {
                g[j] += r * row[j];
            }
            g[self.d] += r;
        }
        let n = self.n as f64;
        for j in 0..self.d {
            g[j] = g[j] / n + self.lambda * theta[j];
        }
        g[self.d] /= n;
        g
    }

    fn hess_vec(&self, s: &[f64], v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.d + 1];
        for i in 0..self.n {
            let row = &self.x[i * self.d..(i + 1) * self.d];
            let u = v[self.d] + row.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
            let su = s[i] * u;
            for j in 0..self.d {
                out[j] += su * row[j];
            }
            out[self.d] += su;
        }
        let n = self.n as f64;
        for j in 0..self.d {
            out[j] = out[j] / n + self.lambda * v[j];
        }
        out[self.d] /= n;
        out
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Approximately solves `H x = -g` by conjugate gradients.
fn cg_direction(pb: &Problem, s: &[f64], g: &[f64]) -> Vec<f64> {
    let m = g.len();
    let gnorm = dot(g, g).sqrt();
    let tol = gnorm.sqrt().min(0.5) * gnorm;
    let mut x = vec![0.0; m];
    let mut r: Vec<f64> = g.iter().map(|v| -v).collect();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    for _ in 0..(20 * m).max(50) {
        if rr.sqrt() <= tol {
            break;
        }
        let hp = pb.hess_vec(s, &p);
        let php = dot(&p, &hp);
        if php <= 0.0 {
            break;
        }
        let alpha = rr / php;
        for k in 0..m {
            x[k] += alpha * p[k];
            r[k] -= alpha * hp[k];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for k in 0..m {
            p[k] = r[k] + beta * p[k];
        }
    }
    if x.iter().all(|v| *v == 0.0) {
        return g.iter().map(|v| -v).collect();
    }
    x
}

fn fit_logreg(x: &[f64], y: &[bool], d: usize, c: f64, cfg: &ProbeConfig) -> Result<(Vec<f64>, usize), ProbeError> {
    let n = y.len();
    let pb = Problem {
        x,
        y: y.iter().map(|&b| b as u8 as f64).collect(),
        n,
        d,
        lambda: 1.0 / (c * n as f64),
    };
    let mut theta = vec![0.0; d + 1];
    let mut f = pb.value(&theta);
    let mut grad_norm = f64::INFINITY;
    let mut iterations = 0;
    for it in 0..cfg.max_iter {
        iterations = it + 1;
        let z = pb.margins(&theta);
        let p: Vec<f64> = z.iter().map(|&z| sigmoid(z)).collect();
        let g = pb.gradient(&theta, &p);
        grad_norm = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if grad_norm <= cfg.tolerance {
            return Ok((theta, it));
        }
        let s: Vec<f64> = p.iter().map(|p| p * (1.0 - p)).collect();
        let dir = cg_direction(&pb, &s, &g);
        let slope = dot(&g, &dir);
        let slack = 1e-12 * f.abs().max(1.0);
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<f64> = theta.iter().zip(&dir).map(|(t, d)| t + alpha * d).collect();
            let ft = pb.value(&trial);
            if ft <= f + 1e-4 * alpha * slope + slack {
                theta = trial;
                f = ft;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Err(ProbeError::ConvergenceFailure {
        c,
        grad_norm,
        iterations,
    })
}

fn check(samples: &[ProbeSample]) -> Result<usize, ProbeError> {
    let first = samples.first().ok_or(ProbeError::EmptyTrainingSet)?;
    let d = first.x.len();
    if let Some(s) = samples.iter().find(|s| s.x.len() != d) {
        return Err(ProbeError::DimensionMismatch {
            expected: d,
            found: s.x.len(),
        });
    }
    if samples.iter().all(|s| s.y == first.y) {
        return Err(ProbeError::SingleClassTrainingSet);
    }
    Ok(d)
}

fn fit_on(samples: &[ProbeSample], idx: &[usize], d: usize, c: f64, cfg: &ProbeConfig) -> Result<(Standardizer, Vec<f64>, usize), ProbeError> {
    let st = Standardizer::fit(samples, idx, d);
    let x = st.matrix(samples, idx);
    let y: Vec<bool> = idx.iter().map(|&i| samples[i].y).collect();
    let (theta, iters) = fit_logreg(&x, &y, d, c, cfg)?;
    Ok((st, theta, iters))
}

fn assemble(st: Standardizer, theta: Vec<f64>, d: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>, f64) {
    let bias = theta[d];
    let mut w = theta;
    w.truncate(d);
    (st.mean, st.scale, w, bias)
}

/// Fold of a problem id: a pure function of the id and the seed.
pub fn fold_of(group: &str, seed: u64, folds: usize) -> usize {
    (seeded_hash(group, seed) % folds as u64) as usize
}

/// Chooses C by grouped k-fold CV (mean fold accuracy, ties to the smaller
/// C), then refits on all samples. Folds whose training part lacks a class
/// are skipped; with no usable fold the grid's middle value is used.
pub fn train_probe(samples: &[ProbeSample], cfg: &ProbeConfig) -> Result<Probe, ProbeError> {
    let d = check(samples)?;
    let fold: Vec<usize> = samples.iter().map(|s| fold_of(s.group, cfg.seed, cfg.folds)).collect();
    let mut cv = Vec::with_capacity(cfg.grid.len());
    for &c in &cfg.grid {
        let mut accs = Vec::new();
        for k in 0..cfg.folds {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..samples.len()).partition(|&i| fold[i] == k);
            if test.is_empty() || train.is_empty() {
                continue;
            }
            if train.iter().all(|&i| samples[i].y == samples[train[0]].y) {
                continue;
            }
            let (st, theta, _) = fit_on(samples, &train, d, c, cfg)?;
            let (mean, scale, weights, bias) = assemble(st, theta, d);
            let p = Probe {
                mean,
                scale,
                weights,
                bias,
                c,
                cv: vec![],
                folds: cfg.folds,
                seed: cfg.seed,
                iterations: 0,
            };
            let correct = test.iter().filter(|&&i| p.predict(samples[i].x) == samples[i].y).count();
            accs.push(correct as f64 / test.len() as f64);
        }
        cv.push(CvPoint {
            c,
            accuracy: if accs.is_empty() { f64::NAN } else { accs.iter().sum::<f64>() / accs.len() as f64 },
            folds_used: accs.len(),
        });
    }
    let mut best: Option<&CvPoint> = None;
    for pt in &cv {
        if pt.folds_used > 0 && best.is_none_or(|b| pt.accuracy > b.accuracy) {
            best = Some(pt);
        }
    }
    let c = best.map_or(cfg.grid[cfg.grid.len() / 2], |b| b.c);
    let all: Vec<usize> = (0..samples.len()).collect();
    let (st, theta, iterations) = fit_on(samples, &all, d, c, cfg)?;
    let (mean, scale, weights, bias) = assemble(st, theta, d);
    Ok(Probe {
        mean,
        scale,
        weights,
        bias,
        c,
        cv,
        folds: cfg.folds,
        seed: cfg.seed,
        iterations,
    })
}
