use super::ParityCheckMatrix;

/// Messages entering the tanh rule are clamped to this magnitude.
pub const SPA_LLR_CLAMP: f64 = 30.0;
const TANH_PRODUCT_LIMIT: f64 = 1.0 - 1e-12;

/// Flooding log-domain sum-product decoder with the exact tanh check rule.
#[derive(Debug, Clone)]
pub struct SpaDecoder {
    n: usize,
    check_edges: Vec<std::ops::Range<usize>>,
    edge_var: Vec<usize>,
    var_edges: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpaOutput {
    /// Posterior minus the input prior.
    pub extrinsic: Vec<f64>,
    pub posterior: Vec<f64>,
    pub hard_bits: Vec<u8>,
    pub parity_ok: bool,
    pub iterations: usize,
}

impl SpaDecoder {
    pub fn new(h: &ParityCheckMatrix) -> Self {
        let mut check_edges = Vec::with_capacity(h.m());
        let mut edge_var = Vec::with_capacity(h.edge_count());
        let mut var_edges = vec![Vec::new(); h.n()];
        for row in h.checks() {
            let start = edge_var.len();
            for &v in row {
                var_edges[v].push(edge_var.len());
                edge_var.push(v);
            }
            check_edges.push(start..edge_var.len());
        }
        Self { n: h.n(), check_edges, edge_var, var_edges }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Decodes prior LLRs (positive favors bit 0). Stops as soon as the hard
    /// decision satisfies every check, or after `max_iters` iterations.
    pub fn decode(&self, prior: &[f64], max_iters: usize) -> SpaOutput {
        assert_eq!(prior.len(), self.n, "prior length must equal n");
        let max_iters = max_iters.max(1);
        let mut v2c: Vec<f64> = self.edge_var.iter().map(|&v| prior[v]).collect();
        let mut c2v = vec![0.0; v2c.len()];
        let mut posterior = prior.to_vec();
        let mut hard_bits = vec![0u8; self.n];
        let mut parity_ok = false;
        let mut iterations = 0;
        let mut t = Vec::new();

        while iterations < max_iters {
            iterations += 1;
            for range in &self.check_edges {
                t.clear();
                t.extend(v2c[range.clone()].iter().map(|&l| (0.5 * l.clamp(-SPA_LLR_CLAMP, SPA_LLR_CLAMP)).tanh()));
                // Leave-one-out products via a forward pass and a backward pass.
                let mut fwd = 1.0;
                for (j, e) in range.clone().enumerate() {
                    c2v[e] = fwd;
                    fwd *= t[j];
                }
                let mut bwd = 1.0;
                for (j, e) in range.clone().enumerate().rev() {
                    let p = (c2v[e] * bwd).clamp(-TANH_PRODUCT_LIMIT, TANH_PRODUCT_LIMIT);
                    c2v[e] = 2.0 * p.atanh();
                    bwd *= t[j];
                }
            }
            for (v, edges) in self.var_edges.iter().enumerate() {
                posterior[v] = prior[v] + edges.iter().map(|&e| c2v[e]).sum::<f64>();
                hard_bits[v] = u8::from(posterior[v] < 0.0);
            }
            parity_ok = self
                .check_edges
                .iter()
                .all(|range| range.clone().fold(0u8, |acc, e| acc ^ hard_bits[self.edge_var[e]]) == 0);
            if parity_ok {
                break;
            }
            for (e, &v) in self.edge_var.iter().enumerate() {
                v2c[e] = posterior[v] - c2v[e];
            }
        }

        let extrinsic = posterior.iter().zip(prior).map(|(p, a)| p - a).collect();
        SpaOutput { extrinsic, posterior, hard_bits, parity_ok, iterations }
    }
}
