//! Composite Gauss–Legendre rules on graded panels.

use gauss_quad::GaussLegendre;

/// Nodes and weights of a 1-D rule.
#[derive(Debug, Clone, Default)]
pub struct Rule1d {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule1d {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Reference nodes/weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let rule = GaussLegendre::new(n).expect("at least two nodes");
    let mut pairs: Vec<(f64, f64)> = rule.into_node_weight_pairs();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    pairs.into_iter().unzip()
}

/// Composite rule with `per_panel` nodes on each interval between consecutive
/// `breaks` (which must be increasing).
pub fn composite(breaks: &[f64], per_panel: usize) -> Rule1d {
    let (x, w) = gauss_legendre(per_panel);
    let mut rule = Rule1d::default();
    for win in breaks.windows(2) {
        let (a, b) = (win[0], win[1]);
        if b <= a {
            continue;
        }
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (xi, wi) in x.iter().zip(&w) {
            rule.nodes.push(mid + half * xi);
            rule.weights.push(half * wi);
        }
    }
    rule
}

/// Breakpoints on `[a, b]` refined geometrically toward `a` with ratio
/// `ratio` down to a width of `min_width`.
pub fn graded_toward_left(a: f64, b: f64, ratio: f64, min_width: f64) -> Vec<f64> {
    let mut pts = vec![b];
    let mut w = b - a;
    loop {
        w *= ratio;
        if w < min_width {
            break;
        }
        pts.push(a + w);
    }
    pts.push(a);
    pts.reverse();
    pts
}
