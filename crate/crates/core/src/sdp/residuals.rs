use nalgebra::DMatrix;

use super::{parity_polytope, BlockSdpProblem, DualCertificate, SdpSolution};

/// Feasibility and optimality measures of a candidate solution.
///
/// Primal entries are absolute (infinity norm). `dual` is the most negative
/// eigenvalue of the dual slack implied by the multipliers, relative to
/// `1 + max |C|`; `gap` is `|objective - dual_bound| / (1 + |objective| + |dual_bound|)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ResidualReport {
    pub diagonal: f64,
    pub coupling: f64,
    pub fs: f64,
    pub box_violation: f64,
    pub psd: f64,
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
    pub objective: f64,
    pub dual_bound: f64,
}

impl ResidualReport {
    pub fn max(&self) -> f64 {
        self.primal.max(self.dual).max(self.gap)
    }

    pub fn within(&self, tol: f64) -> bool {
        self.max() <= tol
    }
}

fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

/// Recomputes every residual of `solution` from the problem data alone.
pub fn residuals(problem: &BlockSdpProblem, solution: &SdpSolution) -> ResidualReport {
    report(problem, &solution.blocks, &solution.f, &solution.duals)
}

pub(crate) fn report(
    problem: &BlockSdpProblem,
    blocks: &[DMatrix<f64>],
    f: &[f64],
    duals: &DualCertificate,
) -> ResidualReport {
    let diagonal = blocks
        .iter()
        .flat_map(|x| x.diagonal().iter().map(|&d| (d - 1.0).abs()).collect::<Vec<_>>())
        .fold(0.0, f64::max);
    let coupling = problem
        .couplings()
        .iter()
        .map(|c| {
            let x = &blocks[c.block];
            let last = x.nrows() - 1;
            let target = 1.0 - 2.0 * f[c.var];
            (x[(c.row, last)] - target).abs().max((x[(last, c.row)] - target).abs())
        })
        .fold(0.0, f64::max);
    let fs = problem.fs().max_violation(f);
    let box_violation = f.iter().map(|&v| (-v).max(v - 1.0).max(0.0)).fold(0.0, f64::max);
    let psd = blocks.iter().map(|x| (-min_eigenvalue(x)).max(0.0)).fold(0.0, f64::max);
    let primal = diagonal.max(coupling).max(fs).max(box_violation).max(psd);

    let (bound, slack_neg) = bound_and_slack(problem, duals);
    let scale = 1.0 + problem.costs().iter().map(|c| c.amax()).fold(0.0, f64::max);
    let objective = problem.objective(blocks, f);
    ResidualReport {
        diagonal,
        coupling,
        fs,
        box_violation,
        psd,
        primal,
        dual: slack_neg / scale,
        gap: (objective - bound).abs() / (1.0 + objective.abs() + bound.abs()),
        objective,
        dual_bound: bound,
    }
}

/// Lagrangian lower bound on the optimal value, valid for any multipliers.
///
/// Diagonal multipliers and coupling multipliers are read off the PSD slacks
/// `S_k` (they match `C_k - S_k` on the diagonal and on the coupled entries).
/// The remaining dual function is minimized in closed form: the block term
/// over `{X PSD, tr X = d}` gives `d * lambda_min`, `f` over the box, and each
/// check copy over its parity polytope.
pub fn dual_bound(problem: &BlockSdpProblem, duals: &DualCertificate) -> f64 {
    bound_and_slack(problem, duals).0
}

fn bound_and_slack(problem: &BlockSdpProblem, duals: &DualCertificate) -> (f64, f64) {
    let mut total = 0.0;
    let mut slack: Vec<DMatrix<f64>> = problem.costs().to_vec();
    for (r, s) in slack.iter_mut().zip(&duals.psd) {
        for i in 0..r.nrows() {
            total += r[(i, i)] - s[(i, i)];
            r[(i, i)] = s[(i, i)];
        }
    }
    let mut f_coef = problem.linear().to_vec();
    for c in problem.couplings() {
        let s = &duals.psd[c.block];
        let last = s.nrows() - 1;
        let cost = problem.costs()[c.block][(c.row, last)];
        let mu = 2.0 * (s[(c.row, last)] - cost);
        total -= mu;
        f_coef[c.var] += 2.0 * mu;
        let r = &mut slack[c.block];
        r[(c.row, last)] = s[(c.row, last)];
        r[(last, c.row)] = s[(c.row, last)];
    }
    let mut most_negative: f64 = 0.0;
    for r in &slack {
        let lmin = min_eigenvalue(r);
        total += r.nrows() as f64 * lmin;
        most_negative = most_negative.max(-lmin);
    }
    for (vars, nu) in problem.fs().checks().iter().zip(&duals.checks) {
        for (&v, &x) in vars.iter().zip(nu) {
            f_coef[v] -= x;
        }
        total += parity_polytope::min_linear(nu);
    }
    for (v, coef) in f_coef.iter_mut().enumerate() {
        let nu_box = duals.boxes.get(v).copied().unwrap_or(0.0);
        *coef -= nu_box;
        total += nu_box.min(0.0) + coef.min(0.0);
    }
    (total, most_negative)
}
