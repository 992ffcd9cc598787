//! Lagrange shape functions of degree m on the reference triangle.
//!
//! Local node order: the three vertices, then `m - 1` nodes on each local edge
//! (edge 0 = v0->v1, 1 = v1->v2, 2 = v2->v0, listed from the first vertex to the
//! second), then the interior nodes.

/// Monomial exponents `(p, q)` for `x^p y^q` with `p + q <= m`.
fn monomials(m: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for total in 0..=m {
        for q in 0..=total {
            out.push((total - q, q));
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct LagrangeBasis {
    degree: usize,
    monomials: Vec<(usize, usize)>,
    /// `coeffs[i * n + k]`: coefficient of monomial `k` in shape function `i`.
    coeffs: Vec<f64>,
    /// Barycentric coordinates (times m) of each local node.
    nodes: Vec<[usize; 3]>,
}

impl LagrangeBasis {
    pub fn new(degree: usize) -> Self {
        assert!(degree >= 1, "Lagrange degree must be at least 1");
        let m = degree;
        let mut nodes = vec![[m, 0, 0], [0, m, 0], [0, 0, m]];
        for s in 1..m {
            nodes.push([m - s, s, 0]);
        }
        for s in 1..m {
            nodes.push([0, m - s, s]);
        }
        for s in 1..m {
            nodes.push([s, 0, m - s]);
        }
        for i1 in 1..m {
            for i2 in 1..m {
                if i1 + i2 < m {
                    nodes.push([m - i1 - i2, i1, i2]);
                }
            }
        }
        let monomials = monomials(m);
        let n = monomials.len();
        debug_assert_eq!(nodes.len(), n);

        // Vandermonde V[node][mono]; shape function coefficients are the columns of V^{-1}.
        let mut v = vec![0.0; n * n];
        for (r, node) in nodes.iter().enumerate() {
            let (x, y) = (node[1] as f64 / m as f64, node[2] as f64 / m as f64);
            for (c, &(p, q)) in monomials.iter().enumerate() {
                v[r * n + c] = x.powi(p as i32) * y.powi(q as i32);
            }
        }
        let inv = invert(&v, n);
        // inv[mono][node] -> coeffs[node][mono]
        let mut coeffs = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                coeffs[i * n + k] = inv[k * n + i];
            }
        }
        Self { degree, monomials, coeffs, nodes }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Reference coordinates of local node `i`.
    pub fn node(&self, i: usize) -> [f64; 2] {
        let m = self.degree as f64;
        [self.nodes[i][1] as f64 / m, self.nodes[i][2] as f64 / m]
    }

    /// Barycentric node coordinates of local node `i`.
    pub fn node_barycentric(&self, i: usize) -> [f64; 3] {
        let m = self.degree as f64;
        let b = self.nodes[i];
        [b[0] as f64 / m, b[1] as f64 / m, b[2] as f64 / m]
    }

    /// Basis values at `x` with reference derivatives up to second order (Hessians as `[xx, xy, yy]`).
    pub fn eval(&self, x: [f64; 2]) -> BasisValues {
        let n = self.len();
        let mut mono = vec![[0.0; 6]; n];
        for (k, &(p, q)) in self.monomials.iter().enumerate() {
            let xp = |e: usize| if e == 0 { 1.0 } else { x[0].powi(e as i32) };
            let yp = |e: usize| if e == 0 { 1.0 } else { x[1].powi(e as i32) };
            let (pf, qf) = (p as f64, q as f64);
            let val = xp(p) * yp(q);
            let dx = if p >= 1 { pf * xp(p - 1) * yp(q) } else { 0.0 };
            let dy = if q >= 1 { qf * xp(p) * yp(q - 1) } else { 0.0 };
            let dxx = if p >= 2 { pf * (pf - 1.0) * xp(p - 2) * yp(q) } else { 0.0 };
            let dxy = if p >= 1 && q >= 1 { pf * qf * xp(p - 1) * yp(q - 1) } else { 0.0 };
            let dyy = if q >= 2 { qf * (qf - 1.0) * xp(p) * yp(q - 2) } else { 0.0 };
            mono[k] = [val, dx, dy, dxx, dxy, dyy];
        }
        let mut out = BasisValues {
            values: vec![0.0; n],
            grads: vec![[0.0; 2]; n],
            hessians: vec![[0.0; 3]; n],
        };
        for i in 0..n {
            let row = &self.coeffs[i * n..(i + 1) * n];
            let mut acc = [0.0; 6];
            for (c, m) in row.iter().zip(&mono) {
                for t in 0..6 {
                    acc[t] += c * m[t];
                }
            }
            out.values[i] = acc[0];
            out.grads[i] = [acc[1], acc[2]];
            out.hessians[i] = [acc[3], acc[4], acc[5]];
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct BasisValues {
    pub values: Vec<f64>,
    pub grads: Vec<[f64; 2]>,
    pub hessians: Vec<[f64; 3]>,
}

/// Dense inverse by Gauss-Jordan elimination with partial pivoting.
fn invert(a: &[f64], n: usize) -> Vec<f64> {
    let mut m = a.to_vec();
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&r, &s| m[r * n + col].abs().total_cmp(&m[s * n + col].abs()))
            .unwrap();
        if piv != col {
            for k in 0..n {
                m.swap(piv * n + k, col * n + k);
                inv.swap(piv * n + k, col * n + k);
            }
        }
        let d = m[col * n + col];
        assert!(d.abs() > 1e-14, "singular Vandermonde matrix");
        for k in 0..n {
            m[col * n + k] /= d;
            inv[col * n + k] /= d;
        }
        for r in 0..n {
            if r != col {
                let f = m[r * n + col];
                if f != 0.0 {
                    for k in 0..n {
                        m[r * n + k] -= f * m[col * n + k];
                        inv[r * n + k] -= f * inv[col * n + k];
                    }
                }
            }
        }
    }
    inv
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronecker_property_and_partition_of_unity() {
        for m in 1..=5 {
            let b = LagrangeBasis::new(m);
            assert_eq!(b.len(), (m + 1) * (m + 2) / 2);
            for j in 0..b.len() {
                let v = b.eval(b.node(j));
                for i in 0..b.len() {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((v.values[i] - expect).abs() < 1e-11, "m={m} i={i} j={j}");
                }
            }
            let v = b.eval([0.21, 0.33]);
            let sum: f64 = v.values.iter().sum();
            let gsum = v.grads.iter().fold([0.0, 0.0], |a, g| [a[0] + g[0], a[1] + g[1]]);
            assert!((sum - 1.0).abs() < 1e-12);
            assert!(gsum[0].abs() < 1e-10 && gsum[1].abs() < 1e-10);
        }
    }

    #[test]
    fn p1_gradients() {
        let b = LagrangeBasis::new(1);
        let v = b.eval([0.3, 0.3]);
        assert_eq!(v.grads, vec![[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]]);
        assert!(v.hessians.iter().all(|h| h.iter().all(|&x| x == 0.0)));
    }

    #[test]
    fn reproduces_quadratic_hessian() {
        // Interpolate f = x^2 + 3xy - y^2 exactly with m = 2 and check the Hessian.
        let b = LagrangeBasis::new(2);
        let f = |p: [f64; 2]| p[0] * p[0] + 3.0 * p[0] * p[1] - p[1] * p[1];
        let v = b.eval([0.2, 0.5]);
        let mut h = [0.0; 3];
        for i in 0..b.len() {
            let fi = f(b.node(i));
            for t in 0..3 {
                h[t] += fi * v.hessians[i][t];
            }
        }
        assert!((h[0] - 2.0).abs() < 1e-12 && (h[1] - 3.0).abs() < 1e-12 && (h[2] + 2.0).abs() < 1e-12);
    }
}
