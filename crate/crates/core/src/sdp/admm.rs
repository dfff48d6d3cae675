use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use super::residuals::report;
use super::{parity_polytope, BlockSdpProblem, DualCertificate, SdpSolution, SolveStatus};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    /// Bound on primal residual, dual residual and relative gap.
    pub tol: f64,
    pub max_iters: usize,
    /// Over-relaxation factor in `(0, 2)`.
    pub alpha: f64,
    /// Initial penalty; `None` picks one from the cost scale.
    pub rho: Option<f64>,
    /// Project PSD blocks on the rayon pool. Results are identical either way.
    pub parallel: bool,
    /// Iterations between convergence checks.
    pub check_every: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { tol: 1e-6, max_iters: 5000, alpha: 1.6, rho: None, parallel: false, check_every: 10 }
    }
}

/// Operator splitting between
///
/// * an affine block holding `(X, f)` with unit diagonals and the couplings
///   enforced exactly, solved in closed form entry by entry, and
/// * a separable block of projections: each `X_k` onto the PSD cone, each
///   check's copy of `f` onto its parity polytope, and a box copy of `f`,
///
/// with over-relaxation and residual-balancing penalty updates. The solver
/// stops once the independent [`residuals`](super::residuals) report meets
/// `tol`; otherwise it returns the last iterate with status `MaxIter`.
pub fn solve(problem: &BlockSdpProblem, settings: &SolverSettings) -> Result<SdpSolution> {
    if settings.tol.is_nan() || settings.tol <= 0.0 {
        return Err(Error::InvalidParameter("solver tolerance must be positive".into()));
    }
    if !(settings.alpha > 0.0 && settings.alpha < 2.0) {
        return Err(Error::InvalidParameter("over-relaxation must lie in (0, 2)".into()));
    }
    let mut state = State::new(problem, settings);
    let check_every = settings.check_every.max(1);
    let mut iterations = 0;
    let mut best: Option<SdpSolution> = None;
    while iterations < settings.max_iters {
        iterations += 1;
        let (r_prim, r_dual) = state.step(problem, settings);
        let due = iterations % check_every == 0 || iterations == settings.max_iters;
        if due && r_prim <= settings.tol {
            let candidate = state.solution(problem, iterations);
            if candidate.residuals.within(settings.tol) {
                return Ok(SdpSolution { status: SolveStatus::Converged, ..candidate });
            }
        }
        if iterations % (5 * check_every) == 0 {
            state.rebalance(r_prim, r_dual);
        }
        if iterations == settings.max_iters {
            best = Some(state.solution(problem, iterations));
        }
    }
    Ok(best.unwrap_or_else(|| state.solution(problem, iterations)))
}

struct State {
    rho: f64,
    x: Vec<DMatrix<f64>>,
    z: Vec<DMatrix<f64>>,
    u: Vec<DMatrix<f64>>,
    f: Vec<f64>,
    g: Vec<Vec<f64>>,
    w: Vec<Vec<f64>>,
    h: Vec<f64>,
    uh: Vec<f64>,
    /// For each variable, `(check, position)` of every check copy.
    memberships: Vec<Vec<(usize, usize)>>,
}

impl State {
    fn new(problem: &BlockSdpProblem, settings: &SolverSettings) -> Self {
        let n = problem.n_vars();
        let checks = problem.fs().checks();
        let mut memberships = vec![Vec::new(); n];
        for (m, vars) in checks.iter().enumerate() {
            for (j, &v) in vars.iter().enumerate() {
                memberships[v].push((m, j));
            }
        }
        let rho = settings.rho.unwrap_or_else(|| {
            let scale: f64 = problem.costs().iter().map(|c| c.norm()).sum::<f64>() / problem.n_blocks().max(1) as f64;
            scale.max(1e-2)
        });
        let ident: Vec<DMatrix<f64>> =
            problem.costs().iter().map(|c| DMatrix::identity(c.nrows(), c.ncols())).collect();
        let zeros: Vec<DMatrix<f64>> = problem.costs().iter().map(|c| DMatrix::zeros(c.nrows(), c.ncols())).collect();
        Self {
            rho,
            x: ident.clone(),
            z: ident,
            u: zeros,
            f: vec![0.5; n],
            g: checks.iter().map(|c| vec![0.5; c.len()]).collect(),
            w: checks.iter().map(|c| vec![0.0; c.len()]).collect(),
            h: vec![0.5; n],
            uh: vec![0.0; n],
            memberships,
        }
    }

    fn step(&mut self, problem: &BlockSdpProblem, settings: &SolverSettings) -> (f64, f64) {
        let rho = self.rho;
        let alpha = settings.alpha;

        // Affine block: free entries, unit diagonal, then coupled entries with f.
        for ((x, z), (u, c)) in self.x.iter_mut().zip(&self.z).zip(self.u.iter().zip(problem.costs())) {
            let d = x.nrows();
            for j in 0..d {
                for i in 0..d {
                    x[(i, j)] = if i == j { 1.0 } else { z[(i, j)] - u[(i, j)] - c[(i, j)] / rho };
                }
            }
        }
        for v in 0..problem.n_vars() {
            let cp = problem.coupling_of(v);
            let last = self.x[cp.block].nrows() - 1;
            let a = self.z[cp.block][(cp.row, last)] - self.u[cp.block][(cp.row, last)];
            let c_entry = problem.costs()[cp.block][(cp.row, last)];
            let copies: f64 = self.memberships[v].iter().map(|&(m, j)| self.g[m][j] - self.w[m][j]).sum();
            let numer =
                4.0 * c_entry - problem.linear()[v] + 4.0 * rho * (1.0 - a) + rho * (copies + self.h[v] - self.uh[v]);
            let denom = rho * (9.0 + self.memberships[v].len() as f64);
            let fv = numer / denom;
            self.f[v] = fv;
            let xv = 1.0 - 2.0 * fv;
            let x = &mut self.x[cp.block];
            x[(cp.row, last)] = xv;
            x[(last, cp.row)] = xv;
        }

        // Projection block with over-relaxation, then dual ascent.
        let mut r_prim: f64 = 0.0;
        let mut r_dual: f64 = 0.0;
        let project_block = |(x, (z, u)): (&DMatrix<f64>, (&mut DMatrix<f64>, &mut DMatrix<f64>))| -> (f64, f64) {
            let relaxed = x * alpha + &*z * (1.0 - alpha);
            let z_old = std::mem::replace(z, project_psd(&relaxed + &*u));
            *u += &relaxed - &*z;
            ((x - &*z).amax(), (&*z - z_old).amax())
        };
        let per_block: Vec<(f64, f64)> = if settings.parallel {
            self.x.par_iter().zip(self.z.par_iter_mut().zip(self.u.par_iter_mut())).map(project_block).collect()
        } else {
            self.x.iter().zip(self.z.iter_mut().zip(self.u.iter_mut())).map(project_block).collect()
        };
        for (p, d) in per_block {
            r_prim = r_prim.max(p);
            r_dual = r_dual.max(d);
        }

        let mut buf = Vec::new();
        let mut proj = Vec::new();
        for ((vars, g), w) in problem.fs().checks().iter().zip(self.g.iter_mut()).zip(self.w.iter_mut()) {
            buf.clear();
            buf.extend(vars.iter().zip(g.iter()).map(|(&v, &gj)| alpha * self.f[v] + (1.0 - alpha) * gj));
            proj.clear();
            proj.extend(buf.iter().zip(w.iter()).map(|(b, wj)| b + wj));
            let mut out = vec![0.0; vars.len()];
            parity_polytope::project(&proj, &mut out);
            for j in 0..vars.len() {
                r_prim = r_prim.max((self.f[vars[j]] - out[j]).abs());
                r_dual = r_dual.max((out[j] - g[j]).abs());
                w[j] += buf[j] - out[j];
                g[j] = out[j];
            }
        }
        for v in 0..problem.n_vars() {
            let relaxed = alpha * self.f[v] + (1.0 - alpha) * self.h[v];
            let hv = (relaxed + self.uh[v]).clamp(0.0, 1.0);
            r_prim = r_prim.max((self.f[v] - hv).abs());
            r_dual = r_dual.max((hv - self.h[v]).abs());
            self.uh[v] += relaxed - hv;
            self.h[v] = hv;
        }
        (r_prim, rho * r_dual)
    }

    fn rebalance(&mut self, r_prim: f64, r_dual: f64) {
        let factor = if r_prim > 10.0 * r_dual {
            2.0
        } else if r_dual > 10.0 * r_prim {
            0.5
        } else {
            return;
        };
        self.rho *= factor;
        self.u.iter_mut().for_each(|u| *u /= factor);
        self.w.iter_mut().flatten().for_each(|w| *w /= factor);
        self.uh.iter_mut().for_each(|u| *u /= factor);
    }

    fn solution(&self, problem: &BlockSdpProblem, iterations: usize) -> SdpSolution {
        let rho = self.rho;
        let duals = DualCertificate {
            psd: self.u.iter().map(|u| u * -rho).collect(),
            checks: self.w.iter().map(|w| w.iter().map(|x| -rho * x).collect()).collect(),
            boxes: self.uh.iter().map(|x| -rho * x).collect(),
        };
        let f: Vec<f64> = self.f.iter().map(|v| v.clamp(0.0, 1.0)).collect();
        let residuals = report(problem, &self.z, &f, &duals);
        SdpSolution {
            blocks: self.z.clone(),
            f,
            objective: residuals.objective,
            residuals,
            iterations,
            status: SolveStatus::MaxIter,
            duals,
        }
    }
}

/// Nearest PSD matrix in Frobenius norm.
pub(crate) fn project_psd(m: DMatrix<f64>) -> DMatrix<f64> {
    let d = m.nrows();
    let eig = SymmetricEigen::new(m);
    let mut out = DMatrix::zeros(d, d);
    for (idx, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda > 0.0 {
            let v = eig.eigenvectors.column(idx);
            out.ger(lambda, &v, &v, 1.0);
        }
    }
    out
}
