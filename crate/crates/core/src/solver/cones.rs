//! Per-cone operations for the interior-point method: Nesterov–Todd scaling,
//! Jordan products and step-to-boundary computations.

use super::{Cone, ConeKind};

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Block {
    Free { start: usize, len: usize },
    NonNeg { start: usize, len: usize },
    Soc { start: usize, len: usize },
}

impl Block {
    pub fn range(&self) -> std::ops::Range<usize> {
        match *self {
            Block::Free { start, len } | Block::NonNeg { start, len } | Block::Soc { start, len } => {
                start..start + len
            }
        }
    }
}

pub(crate) fn blocks(cones: &[Cone]) -> Vec<Block> {
    let mut start = 0;
    cones
        .iter()
        .filter(|c| c.size > 0)
        .map(|c| {
            let b = match c.kind {
                ConeKind::Free => Block::Free { start, len: c.size },
                ConeKind::NonNeg => Block::NonNeg { start, len: c.size },
                ConeKind::SecondOrder => Block::Soc { start, len: c.size },
            };
            start += c.size;
            b
        })
        .collect()
}

/// Barrier degree of the cone product.
pub(crate) fn degree(blocks: &[Block]) -> usize {
    blocks
        .iter()
        .map(|b| match *b {
            Block::Free { .. } => 0,
            Block::NonNeg { len, .. } => len,
            Block::Soc { .. } => 1,
        })
        .sum()
}

fn soc_det(v: &[f64]) -> f64 {
    let t = &v[1..];
    v[0] * v[0] - t.iter().map(|x| x * x).sum::<f64>()
}

/// Inner product restricted to the non-free blocks.
pub(crate) fn cone_dot(blocks: &[Block], u: &[f64], v: &[f64]) -> f64 {
    blocks
        .iter()
        .filter(|b| !matches!(b, Block::Free { .. }))
        .map(|b| {
            let r = b.range();
            crate::linalg::dot(&u[r.clone()], &v[r])
        })
        .sum()
}

/// Largest `s` such that `v - s e` is on the cone boundary, taken over all
/// blocks (i.e. minus the smallest "eigenvalue").
pub(crate) fn max_neg_eig(blocks: &[Block], v: &[f64]) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for b in blocks {
        match *b {
            Block::Free { .. } => {}
            Block::NonNeg { .. } => {
                for x in &v[b.range()] {
                    worst = worst.max(-x);
                }
            }
            Block::Soc { .. } => {
                let s = &v[b.range()];
                let nt = crate::linalg::norm2(&s[1..]);
                worst = worst.max(nt - s[0]);
            }
        }
    }
    worst
}

/// `v += alpha * e` on every non-free block.
pub(crate) fn add_identity(blocks: &[Block], v: &mut [f64], alpha: f64) {
    for b in blocks {
        match *b {
            Block::Free { .. } => {}
            Block::NonNeg { .. } => v[b.range()].iter_mut().for_each(|x| *x += alpha),
            Block::Soc { start, .. } => v[start] += alpha,
        }
    }
}

pub(crate) fn identity(blocks: &[Block], n: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    add_identity(blocks, &mut e, 1.0);
    e
}

/// Jordan product `u ∘ v` on non-free blocks (zero on free blocks).
pub(crate) fn jordan(blocks: &[Block], u: &[f64], v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; u.len()];
    for b in blocks {
        match *b {
            Block::Free { .. } => {}
            Block::NonNeg { .. } => {
                for i in b.range() {
                    out[i] = u[i] * v[i];
                }
            }
            Block::Soc { start, len } => {
                let (u0, v0) = (u[start], v[start]);
                out[start] = crate::linalg::dot(&u[start..start + len], &v[start..start + len]);
                for i in start + 1..start + len {
                    out[i] = u0 * v[i] + v0 * u[i];
                }
            }
        }
    }
    out
}

/// Solves `u ∘ x = v` for `x` on non-free blocks (zero on free blocks).
pub(crate) fn jordan_div(blocks: &[Block], u: &[f64], v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; u.len()];
    for b in blocks {
        match *b {
            Block::Free { .. } => {}
            Block::NonNeg { .. } => {
                for i in b.range() {
                    out[i] = v[i] / u[i];
                }
            }
            Block::Soc { start, len } => {
                let us = &u[start..start + len];
                let vs = &v[start..start + len];
                let det = soc_det(us);
                let u1v1: f64 = crate::linalg::dot(&us[1..], &vs[1..]);
                let x0 = (us[0] * vs[0] - u1v1) / det;
                out[start] = x0;
                for k in 1..len {
                    out[start + k] = (vs[k] - x0 * us[k]) / us[0];
                }
            }
        }
    }
    out
}

/// Largest step `alpha` keeping `u + alpha du` in the cone (may be infinite).
pub(crate) fn max_step(blocks: &[Block], u: &[f64], du: &[f64]) -> f64 {
    let mut alpha = f64::INFINITY;
    for b in blocks {
        match *b {
            Block::Free { .. } => {}
            Block::NonNeg { .. } => {
                for i in b.range() {
                    if du[i] < 0.0 {
                        alpha = alpha.min(-u[i] / du[i]);
                    }
                }
            }
            Block::Soc { start, len } => {
                let us = &u[start..start + len];
                let ds = &du[start..start + len];
                alpha = alpha.min(soc_step(us, ds));
            }
        }
    }
    alpha.max(0.0)
}

fn soc_step(u: &[f64], d: &[f64]) -> f64 {
    // det(u + a d) = A a^2 + 2 B a + C with C > 0
    let a = soc_det(d);
    let b = u[0] * d[0] - crate::linalg::dot(&u[1..], &d[1..]);
    let c = soc_det(u).max(0.0);
    let mut best = f64::INFINITY;
    if a.abs() <= 1e-300 {
        if b < 0.0 {
            best = -c / (2.0 * b);
        }
    } else {
        let disc = b * b - a * c;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            let q = -(b + b.signum() * sq);
            let roots = [if a != 0.0 { q / a } else { f64::INFINITY }, if q != 0.0 { c / q } else { f64::INFINITY }];
            for r in roots {
                if r > 0.0 && r.is_finite() {
                    best = best.min(r);
                }
            }
        }
    }
    // guard against the branch where the leading component turns negative
    if d[0] < 0.0 {
        best = best.min(-u[0] / d[0]);
    }
    best
}

#[derive(Debug, Clone)]
enum BlockScaling {
    Free,
    NonNeg(Vec<f64>),
    Soc { eta: f64, w: Vec<f64> },
}

/// Nesterov–Todd scaling `W` with `W z = W⁻¹ x = λ`.
#[derive(Debug, Clone)]
pub(crate) struct NtScaling {
    blocks: Vec<Block>,
    data: Vec<BlockScaling>,
}

impl NtScaling {
    /// Returns the scaling and `λ`, or `None` if an iterate left the cone
    /// interior.
    pub fn compute(blocks: &[Block], x: &[f64], z: &[f64]) -> Option<(Self, Vec<f64>)> {
        let mut lambda = vec![0.0; x.len()];
        let mut data = Vec::with_capacity(blocks.len());
        for b in blocks {
            match *b {
                Block::Free { .. } => data.push(BlockScaling::Free),
                Block::NonNeg { .. } => {
                    let mut w = Vec::with_capacity(b.range().len());
                    for i in b.range() {
                        if !(x[i] > 0.0 && z[i] > 0.0) {
                            return None;
                        }
                        w.push((x[i] / z[i]).sqrt());
                        lambda[i] = (x[i] * z[i]).sqrt();
                    }
                    data.push(BlockScaling::NonNeg(w));
                }
                Block::Soc { start, len } => {
                    let xs = &x[start..start + len];
                    let zs = &z[start..start + len];
                    let (dx, dz) = (soc_det(xs), soc_det(zs));
                    if !(dx > 0.0 && dz > 0.0 && xs[0] > 0.0 && zs[0] > 0.0) {
                        return None;
                    }
                    let (sx, sz) = (dx.sqrt(), dz.sqrt());
                    let xb: Vec<f64> = xs.iter().map(|v| v / sx).collect();
                    let zb: Vec<f64> = zs.iter().map(|v| v / sz).collect();
                    let gamma = ((1.0 + crate::linalg::dot(&xb, &zb)) / 2.0).sqrt();
                    let mut w = vec![0.0; len];
                    w[0] = (xb[0] + zb[0]) / (2.0 * gamma);
                    for k in 1..len {
                        w[k] = (xb[k] - zb[k]) / (2.0 * gamma);
                    }
                    // re-normalize so that det(w) = 1 exactly
                    let t2: f64 = w[1..].iter().map(|v| v * v).sum();
                    w[0] = (1.0 + t2).sqrt();
                    let eta = (dx / dz).sqrt().sqrt();
                    let bs = BlockScaling::Soc { eta, w };
                    let lz = apply_block(&bs, zs, false);
                    lambda[start..start + len].copy_from_slice(&lz);
                    data.push(bs);
                }
            }
        }
        Some((
            Self {
                blocks: blocks.to_vec(),
                data,
            },
            lambda,
        ))
    }

    /// `W v` on non-free blocks, zero on free blocks.
    pub fn apply_w(&self, v: &[f64]) -> Vec<f64> {
        self.apply(v, false)
    }

    /// `W⁻¹ v` on non-free blocks, zero on free blocks.
    pub fn apply_winv(&self, v: &[f64]) -> Vec<f64> {
        self.apply(v, true)
    }

    fn apply(&self, v: &[f64], inverse: bool) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for (b, s) in self.blocks.iter().zip(&self.data) {
            if matches!(b, Block::Free { .. }) {
                continue;
            }
            let r = b.range();
            let o = apply_block(s, &v[r.clone()], inverse);
            out[r].copy_from_slice(&o);
        }
        out
    }

    /// Upper-triangular entries of `W⁻²` block by block, in the order
    /// produced by [`kkt_cone_pattern`]. Free blocks contribute zeros.
    pub fn winv2_values(&self, out: &mut Vec<f64>) {
        out.clear();
        for (b, s) in self.blocks.iter().zip(&self.data) {
            match (b, s) {
                (Block::Free { len, .. }, _) => out.extend(std::iter::repeat_n(0.0, *len)),
                (Block::NonNeg { .. }, BlockScaling::NonNeg(w)) => {
                    out.extend(w.iter().map(|wi| 1.0 / (wi * wi)));
                }
                (Block::Soc { len, .. }, BlockScaling::Soc { eta, w }) => {
                    // W⁻² = (2 ŵŵᵀ - J) / η², ŵ = (w0, -w1)
                    let e2 = eta * eta;
                    for j in 0..*len {
                        for i in 0..=j {
                            let wi = if i == 0 { w[0] } else { -w[i] };
                            let wj = if j == 0 { w[0] } else { -w[j] };
                            let mut v = 2.0 * wi * wj;
                            if i == j {
                                v += if i == 0 { -1.0 } else { 1.0 };
                            }
                            out.push(v / e2);
                        }
                    }
                }
                _ => unreachable!("scaling does not match block"),
            }
        }
    }
}

fn apply_block(s: &BlockScaling, v: &[f64], inverse: bool) -> Vec<f64> {
    match s {
        BlockScaling::Free => vec![0.0; v.len()],
        BlockScaling::NonNeg(w) => v
            .iter()
            .zip(w)
            .map(|(vi, wi)| if inverse { vi / wi } else { vi * wi })
            .collect(),
        BlockScaling::Soc { eta, w } => {
            let sgn = if inverse { -1.0 } else { 1.0 };
            let scale = if inverse { 1.0 / eta } else { *eta };
            let w1v1 = crate::linalg::dot(&w[1..], &v[1..]);
            let mut out = vec![0.0; v.len()];
            out[0] = scale * (w[0] * v[0] + sgn * w1v1);
            let coef = sgn * v[0] + w1v1 / (1.0 + w[0]);
            for k in 1..v.len() {
                out[k] = scale * (v[k] + coef * w[k]);
            }
            out
        }
    }
}

/// Upper-triangular `(row, col)` coordinates of the cone blocks of the KKT
/// matrix (diagonal for free/nonnegative blocks, dense for second-order).
pub(crate) fn kkt_cone_pattern(blocks: &[Block]) -> Vec<(usize, usize)> {
    let mut p = Vec::new();
    for b in blocks {
        match *b {
            Block::Free { .. } | Block::NonNeg { .. } => p.extend(b.range().map(|i| (i, i))),
            Block::Soc { start, len } => {
                for j in 0..len {
                    for i in 0..=j {
                        p.push((start + i, start + j));
                    }
                }
            }
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    fn soc_blocks() -> Vec<Block> {
        vec![Block::NonNeg { start: 0, len: 2 }, Block::Soc { start: 2, len: 3 }]
    }

    #[test]
    fn nt_scaling_maps_both_iterates_to_lambda() {
        let bl = soc_blocks();
        let x = [1.0, 2.0, 3.0, 1.0, -0.5];
        let z = [0.5, 4.0, 2.0, -0.3, 1.2];
        let (nt, lambda) = NtScaling::compute(&bl, &x, &z).unwrap();
        let wz = nt.apply_w(&z);
        let wix = nt.apply_winv(&x);
        for i in 0..5 {
            assert!((wz[i] - lambda[i]).abs() < 1e-12, "Wz {i}");
            assert!((wix[i] - lambda[i]).abs() < 1e-12, "W⁻¹x {i}");
        }
        // W⁻² assembled densely matches applying W⁻¹ twice
        let mut vals = Vec::new();
        nt.winv2_values(&mut vals);
        let pat = kkt_cone_pattern(&bl);
        let v = [0.3, -1.0, 0.7, 0.2, -0.4];
        let mut dense = vec![0.0; 5];
        for (&(i, j), a) in pat.iter().zip(&vals) {
            dense[i] += a * v[j];
            if i != j {
                dense[j] += a * v[i];
            }
        }
        let twice = nt.apply_winv(&nt.apply_winv(&v));
        for i in 0..5 {
            assert!((dense[i] - twice[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn jordan_division_inverts_product() {
        let bl = soc_blocks();
        let u = [1.0, 2.0, 3.0, 1.0, -0.5];
        let v = [0.2, -1.0, 0.4, 0.5, 0.1];
        let x = jordan_div(&bl, &u, &v);
        let back = jordan(&bl, &u, &x);
        for i in 0..5 {
            assert!((back[i] - v[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn step_to_boundary() {
        let bl = vec![Block::Soc { start: 0, len: 2 }];
        // (1, 0) + a (0, 1) leaves the cone at a = 1
        assert!((max_step(&bl, &[1.0, 0.0], &[0.0, 1.0]) - 1.0).abs() < 1e-14);
        assert!(max_step(&bl, &[1.0, 0.0], &[1.0, 0.0]).is_infinite());
        let nn = vec![Block::NonNeg { start: 0, len: 2 }];
        assert!((max_step(&nn, &[1.0, 2.0], &[-2.0, 1.0]) - 0.5).abs() < 1e-14);
    }
}
