//! Uniform projection lottery.
//!
//! Finds weights `p` over candidates whose mean `ĉ = Σ p_c c` minimizes
//! `KL(μ ‖ x)` over the candidate convex hull, where μ is the uniform vector.
//! Equivalently `ĉ` minimizes `f(x) = −Σ μⁱ ln xⁱ`, and the Frank-Wolfe gap at
//! `x` is `max_c Σ μⁱ cⁱ / xⁱ − 1`, which is exactly how far `x` is from the
//! first-order condition `Σ μⁱ vⁱ / xⁱ ≤ 1` for all hull points `v`. That
//! condition gives `v · ĉ ≥ 1/d` for every `v` in the hull.
//!
//! Coordinates where every candidate is zero are dropped first and μ is made
//! uniform over the rest.
//!
//! Away-step Frank-Wolfe does most of the work. Its last digits can take
//! longer than the iteration budget, so a run that ends above tolerance is
//! finished by Newton steps on the face Frank-Wolfe has identified.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{dot, CandidateSet, Lottery, VoterSet};

pub const DEFAULT_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_MAX_ITERATIONS: usize = 10_000;

const SPARSIFY_BELOW: f64 = 1e-12;
const SNAP_TO_CANDIDATE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionResult {
    pub lottery: Lottery,
    /// `ĉ`, the lottery-weighted candidate mean.
    pub point: Vec<f64>,
    #[serde(rename = "kl")]
    pub kl_value: f64,
    #[serde(rename = "gap")]
    pub fw_gap: f64,
    pub iterations: usize,
    /// Coordinates on which some candidate is positive.
    pub support: Vec<usize>,
}

impl ProjectionResult {
    /// `max_c Σ_{i∈support} μⁱ cⁱ / ĉⁱ`, which is at most `1 + tolerance` at a
    /// converged point.
    pub fn first_order_value(&self, candidates: &CandidateSet) -> f64 {
        let mu = 1.0 / self.support.len() as f64;
        candidates
            .vectors()
            .iter()
            .map(|c| self.support.iter().map(|&i| mu * c[i] / self.point[i]).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

struct Workspace<'a> {
    candidates: &'a CandidateSet,
    support: Vec<usize>,
    mu: f64,
}

impl Workspace<'_> {
    fn mean(&self, p: &[f64]) -> Vec<f64> {
        self.candidates.combine(p)
    }

    fn kl(&self, x: &[f64]) -> f64 {
        self.support
            .iter()
            .map(|&i| self.mu * (self.mu / x[i]).ln())
            .sum()
    }

    /// `∇f(x) · c` for every candidate.
    fn vertex_gradients(&self, x: &[f64]) -> Vec<f64> {
        self.candidates
            .vectors()
            .iter()
            .map(|c| -self.support.iter().map(|&i| self.mu * c[i] / x[i]).sum::<f64>())
            .collect()
    }

    /// Minimizes `f(x + γ dx)` over `γ ∈ [0, γ_max]` by bisection on the
    /// derivative.
    fn line_search(&self, x: &[f64], dx: &[f64], gamma_max: f64) -> f64 {
        let slope = |g: f64| -> f64 {
            let mut s = 0.0;
            for &i in &self.support {
                let xi = x[i] + g * dx[i];
                if xi <= 0.0 {
                    return f64::INFINITY;
                }
                s -= self.mu * dx[i] / xi;
            }
            s
        };
        if slope(gamma_max) <= 0.0 {
            return gamma_max;
        }
        let (mut lo, mut hi) = (0.0, gamma_max);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if slope(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-16 * gamma_max.max(1e-300) {
                break;
            }
        }
        lo
    }
}

pub fn uproj(candidates: &CandidateSet, tolerance: f64, max_iterations: usize) -> Result<ProjectionResult> {
    run(candidates, tolerance, max_iterations, None)
}

/// [`uproj`] with default tolerance and iteration cap.
pub fn uproj_default(candidates: &CandidateSet) -> Result<ProjectionResult> {
    uproj(candidates, DEFAULT_TOLERANCE, DEFAULT_MAX_ITERATIONS)
}

/// Also returns the KL value after every iteration.
pub fn uproj_trace(
    candidates: &CandidateSet,
    tolerance: f64,
    max_iterations: usize,
) -> Result<(ProjectionResult, Vec<f64>)> {
    let mut trace = Vec::new();
    let r = run(candidates, tolerance, max_iterations, Some(&mut trace))?;
    Ok((r, trace))
}

fn run(
    candidates: &CandidateSet,
    tolerance: f64,
    max_iterations: usize,
    mut trace: Option<&mut Vec<f64>>,
) -> Result<ProjectionResult> {
    if candidates.is_empty() {
        return Err(Error::InvalidArgument("no candidates".into()));
    }
    let (m, d) = (candidates.len(), candidates.dim());
    let support: Vec<usize> = (0..d)
        .filter(|&i| candidates.vectors().iter().any(|c| c[i] > 0.0))
        .collect();
    let ws = Workspace {
        candidates,
        mu: 1.0 / support.len() as f64,
        support,
    };

    let mut p = vec![1.0 / m as f64; m];
    let mut x = ws.mean(&p);
    let mut gap = f64::INFINITY;
    let mut iterations = 0;
    if let Some(t) = trace.as_deref_mut() {
        t.push(ws.kl(&x));
    }
    while iterations < max_iterations {
        let g = ws.vertex_gradients(&x);
        // ∇f(x)·x = −1 on the support, so the FW gap is −1 − min_c g_c.
        let fw = argmin(&g);
        gap = -1.0 - g[fw];
        if gap <= tolerance {
            break;
        }
        let away = (0..m)
            .filter(|&c| p[c] > 0.0)
            .max_by(|&a, &b| g[a].total_cmp(&g[b]).then(b.cmp(&a)))
            .expect("lottery has support");
        let away_gap = g[away] + 1.0;

        let (dir, gamma_max) = if gap >= away_gap || p[away] >= 1.0 {
            let mut dir: Vec<f64> = p.iter().map(|w| -w).collect();
            dir[fw] += 1.0;
            (dir, 1.0)
        } else {
            let mut dir = p.clone();
            dir[away] -= 1.0;
            (dir, p[away] / (1.0 - p[away]))
        };
        let dx = ws.mean(&dir);
        let gamma = ws.line_search(&x, &dx, gamma_max);
        if gamma <= 0.0 {
            // No progress possible at working precision.
            break;
        }
        for (w, dw) in p.iter_mut().zip(&dir) {
            *w = (*w + gamma * dw).max(0.0);
        }
        if gamma == gamma_max && gap < away_gap {
            p[away] = 0.0;
        }
        let s: f64 = p.iter().sum();
        p.iter_mut().for_each(|w| *w /= s);
        let next = ws.mean(&p);
        if next == x {
            break;
        }
        x = next;
        iterations += 1;
        if let Some(t) = trace.as_deref_mut() {
            t.push(ws.kl(&x));
        }
    }

    if gap > tolerance {
        let q = refine_on_face(&ws, &p, tolerance);
        let y = ws.mean(&q);
        let g = ws.vertex_gradients(&y);
        let refined = -1.0 - g[argmin(&g)];
        if refined < gap {
            p = q;
            x = y;
            gap = refined;
            if let Some(t) = trace.as_deref_mut() {
                let kl = ws.kl(&x);
                if t.last().is_none_or(|&last| kl <= last) {
                    t.push(kl);
                }
            }
        }
    }

    for w in p.iter_mut() {
        if *w < SPARSIFY_BELOW {
            *w = 0.0;
        }
    }
    let s: f64 = p.iter().sum();
    p.iter_mut().for_each(|w| *w /= s);
    x = ws.mean(&p);

    if let Some(c) = (0..m).find(|&c| {
        candidates
            .vector(c)
            .iter()
            .zip(&x)
            .all(|(a, b)| (a - b).abs() <= SNAP_TO_CANDIDATE)
    }) {
        p = vec![0.0; m];
        p[c] = 1.0;
        x = candidates.vector(c).to_vec();
    }

    let g = ws.vertex_gradients(&x);
    let final_gap = -1.0 - g[argmin(&g)];
    gap = if final_gap.is_finite() { final_gap } else { gap };
    let result = ProjectionResult {
        lottery: Lottery::new(p)?,
        kl_value: ws.kl(&x),
        point: x,
        fw_gap: gap,
        iterations,
        support: ws.support,
    };
    if result.fw_gap > tolerance {
        return Err(Error::ProjectionStalled(Box::new(result)));
    }
    Ok(result)
}

/// Active-set Newton method on the lottery weights, started from `start`.
///
/// Newton steps are taken on the face spanned by the current support; a
/// support weight that hits zero leaves it and, once the face is optimal, the
/// most improving outside candidate enters. Stops early, returning the
/// current weights, when no step makes progress.
fn refine_on_face(ws: &Workspace<'_>, start: &[f64], tolerance: f64) -> Vec<f64> {
    let m = start.len();
    let mut p = start.to_vec();
    for _ in 0..500 {
        let x = ws.mean(&p);
        let g = ws.vertex_gradients(&x);
        let best = argmin(&g);
        if -1.0 - g[best] <= 0.1 * tolerance {
            return p;
        }
        let mut active: Vec<usize> = (0..m).filter(|&c| p[c] > 0.0).collect();
        let spread = active.iter().map(|&c| g[c]).fold(f64::NEG_INFINITY, f64::max)
            - active.iter().map(|&c| g[c]).fold(f64::INFINITY, f64::min);
        if spread <= 0.01 * tolerance && !active.contains(&best) {
            active.push(best);
        }

        // Hessian of f restricted to the face: H_ab = Σ_i μ c_a,i c_b,i / x_i².
        let k = active.len();
        let mut h = vec![0.0; k * k];
        for (r, &a) in active.iter().enumerate() {
            for (s, &b) in active.iter().enumerate().skip(r) {
                let ca = ws.candidates.vector(a);
                let cb = ws.candidates.vector(b);
                let v: f64 = ws.support.iter().map(|&i| ws.mu * ca[i] * cb[i] / (x[i] * x[i])).sum();
                h[r * k + s] = v;
                h[s * k + r] = v;
            }
        }
        // Candidates on the face can be affinely dependent; a small ridge keeps
        // the factorization well defined without moving the optimum.
        let ridge = 1e-12 * (0..k).map(|r| h[r * k + r]).fold(0.0, f64::max);
        for r in 0..k {
            h[r * k + r] += ridge;
        }
        let mut a_vec: Vec<f64> = active.iter().map(|&c| g[c]).collect();
        let mut b_vec = vec![1.0; k];
        let mut factor = h.clone();
        if !cholesky_factor(&mut factor, k) {
            return p;
        }
        cholesky_apply(&factor, k, &mut a_vec);
        cholesky_apply(&factor, k, &mut b_vec);
        // Newton direction subject to Σ δ = 0.
        let nu = a_vec.iter().sum::<f64>() / b_vec.iter().sum::<f64>();
        let delta: Vec<f64> = a_vec.iter().zip(&b_vec).map(|(a, b)| nu * b - a).collect();

        let mut gamma_max = 1.0;
        let mut blocking = None;
        for (r, &c) in active.iter().enumerate() {
            if delta[r] < 0.0 && p[c] / -delta[r] < gamma_max {
                gamma_max = p[c] / -delta[r];
                blocking = Some(c);
            }
        }
        let mut dir = vec![0.0; m];
        for (r, &c) in active.iter().enumerate() {
            dir[c] = delta[r];
        }
        let dx = ws.mean(&dir);
        let gamma = ws.line_search(&x, &dx, gamma_max);
        if gamma <= 0.0 && blocking.is_none() {
            return p;
        }
        for c in 0..m {
            p[c] = (p[c] + gamma * dir[c]).max(0.0);
        }
        if gamma == gamma_max {
            if let Some(c) = blocking {
                p[c] = 0.0;
            }
        }
        let total: f64 = p.iter().sum();
        p.iter_mut().for_each(|w| *w /= total);
    }
    p
}

/// In-place Cholesky factorization of a symmetric positive definite
/// row-major `n × n` matrix; the factor is left in the lower triangle.
fn cholesky_factor(a: &mut [f64], n: usize) -> bool {
    for j in 0..n {
        let mut diag = a[j * n + j];
        for k in 0..j {
            diag -= a[j * n + k] * a[j * n + k];
        }
        if !(diag > 0.0) {
            return false;
        }
        let diag = diag.sqrt();
        a[j * n + j] = diag;
        for i in j + 1..n {
            let mut v = a[i * n + j];
            for k in 0..j {
                v -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = v / diag;
        }
    }
    true
}

/// Overwrites `b` with `A⁻¹ b` given the factor from [`cholesky_factor`].
fn cholesky_apply(l: &[f64], n: usize, b: &mut [f64]) {
    for i in 0..n {
        let mut v = b[i];
        for k in 0..i {
            v -= l[i * n + k] * b[k];
        }
        b[i] = v / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut v = b[i];
        for k in i + 1..n {
            v -= l[k * n + i] * b[k];
        }
        b[i] = v / l[i * n + i];
    }
}

fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x < v[best] {
            best = i;
        }
    }
    best
}

/// `min_v v · ĉ`; at least `1/d − tolerance` whenever the voters lie in the
/// candidate hull.
pub fn uproj_welfare_floor(result: &ProjectionResult, voters: &VoterSet) -> f64 {
    voters
        .vectors()
        .iter()
        .map(|v| dot(v, &result.point))
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn basis_projects_to_center() {
        for d in 1..8 {
            let r = uproj_default(&CandidateSet::basis(d)).unwrap();
            for &p in r.lottery.probabilities() {
                assert_abs_diff_eq!(p, 1.0 / d as f64, epsilon = 1e-12);
            }
            for &x in &r.point {
                assert_abs_diff_eq!(x, 1.0 / d as f64, epsilon = 1e-12);
            }
            assert_abs_diff_eq!(r.kl_value, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn segment_optimum_at_endpoint() {
        // Oracle: grid search over the segment t·(1,0) + (1−t)·(0.5,0.5).
        let best_t = (0..=10_000)
            .map(|k| k as f64 / 10_000.0)
            .min_by(|a, b| {
                let f = |t: f64| {
                    let x1 = t + (1.0 - t) * 0.5;
                    -0.5 * x1.ln() - 0.5 * (1.0 - x1).ln()
                };
                f(*a).total_cmp(&f(*b))
            })
            .unwrap();
        assert_eq!(best_t, 0.0);

        let c = CandidateSet::new(vec![vec![1.0, 0.0], vec![0.5, 0.5]]).unwrap();
        let r = uproj_default(&c).unwrap();
        assert_eq!(r.lottery.probabilities(), &[0.0, 1.0]);
        assert_abs_diff_eq!(r.point[0], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn center_candidate_gets_point_mass() {
        let t = 1.0 / 3.0;
        let c = CandidateSet::new(vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![t, t, t],
        ])
        .unwrap();
        let r = uproj_default(&c).unwrap();
        assert_eq!(r.lottery.probabilities(), &[0.0, 0.0, 0.0, 1.0]);
        assert_abs_diff_eq!(r.kl_value, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_coordinates_are_dropped() {
        let c = CandidateSet::new(vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap();
        let r = uproj_default(&c).unwrap();
        assert_eq!(r.support, vec![0, 1]);
        assert_abs_diff_eq!(r.point[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(r.point[2], 0.0);
    }

    #[test]
    fn kl_trace_is_nonincreasing() {
        let c = CandidateSet::new(vec![
            vec![0.7, 0.2, 0.1],
            vec![0.1, 0.1, 0.8],
            vec![0.3, 0.6, 0.1],
            vec![0.5, 0.5, 0.0],
        ])
        .unwrap();
        let (_, trace) = uproj_trace(&c, 1e-10, 10_000).unwrap();
        assert!(trace.windows(2).all(|w| w[1] <= w[0] + 1e-15));
    }

    #[test]
    fn welfare_floor_on_basis() {
        let c = CandidateSet::basis(3);
        let r = uproj_default(&c).unwrap();
        let voters = VoterSet::new(vec![vec![0.2, 0.3, 0.5], vec![1.0, 0.0, 0.0]]).unwrap();
        assert_abs_diff_eq!(uproj_welfare_floor(&r, &voters), 1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn newton_finishes_a_capped_run() {
        let c = CandidateSet::new(vec![
            vec![0.9, 0.05, 0.05],
            vec![0.5, 0.4, 0.1],
            vec![0.6, 0.1, 0.3],
        ])
        .unwrap();
        let r = uproj(&c, 1e-12, 1).unwrap();
        assert_eq!(r.iterations, 1);
        assert!(r.fw_gap <= 1e-12);
        let full = uproj(&c, 1e-12, DEFAULT_MAX_ITERATIONS).unwrap();
        for (a, b) in r.point.iter().zip(&full.point) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}
