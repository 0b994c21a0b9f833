//! Reference implementations used only by tests. They share no code with
//! the library beyond its public types.

#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};

/// Symplectic form on `modes` modes, ordering `(x1, p1, x2, p2, ...)`.
pub fn omega(modes: usize) -> DMatrix<f64> {
    let mut w = DMatrix::zeros(2 * modes, 2 * modes);
    for m in 0..modes {
        w[(2 * m, 2 * m + 1)] = 1.0;
        w[(2 * m + 1, 2 * m)] = -1.0;
    }
    w
}

fn sqrt_psd(g: &DMatrix<f64>) -> DMatrix<f64> {
    let e = SymmetricEigen::new(g.clone());
    let s = DMatrix::from_diagonal(&e.eigenvalues.map(|v| v.max(0.0).sqrt()));
    &e.eigenvectors * s * e.eigenvectors.transpose()
}

/// Symplectic eigenvalues in descending order: square roots of the
/// eigenvalues of `K^T K`, `K = g^{1/2} Omega g^{1/2}`, each counted once.
pub fn symplectic_eigenvalues(g: &DMatrix<f64>) -> Vec<f64> {
    let modes = g.nrows() / 2;
    let r = sqrt_psd(g);
    let k = &r * omega(modes) * &r;
    let m = k.transpose() * &k;
    let m = (&m + m.transpose()) * 0.5;
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().map(|v| v.max(0.0).sqrt()).collect();
    ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
    ev.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect()
}

fn g_entropy(nu: f64) -> f64 {
    let x = (nu - 1.0) / 2.0;
    if x <= 1e-15 {
        return 0.0;
    }
    (x + 1.0) * (x + 1.0).log2() - x * x.log2()
}

pub fn von_neumann(g: &DMatrix<f64>) -> f64 {
    symplectic_eigenvalues(g).into_iter().map(g_entropy).sum()
}

/// Two-mode squeezed vacuum of variance `v` on modes `(a, b)` of an
/// `n`-mode covariance matrix.
fn place_epr(g: &mut DMatrix<f64>, a: usize, b: usize, v: f64, t: f64, vb: f64) {
    let c = (t * (v * v - 1.0)).sqrt();
    g[(2 * a, 2 * a)] = v;
    g[(2 * a + 1, 2 * a + 1)] = v;
    g[(2 * b, 2 * b)] = vb;
    g[(2 * b + 1, 2 * b + 1)] = vb;
    g[(2 * a, 2 * b)] = c;
    g[(2 * b, 2 * a)] = c;
    g[(2 * a + 1, 2 * b + 1)] = -c;
    g[(2 * b + 1, 2 * a + 1)] = -c;
}

/// Removes mode `m` after homodyne detection of its `x` quadrature.
fn homodyne_x(g: &DMatrix<f64>, m: usize) -> DMatrix<f64> {
    let n = g.nrows();
    let keep: Vec<usize> = (0..n).filter(|&i| i / 2 != m).collect();
    let gx = g[(2 * m, 2 * m)];
    DMatrix::from_fn(keep.len(), keep.len(), |i, j| {
        let (a, b) = (keep[i], keep[j]);
        g[(a, b)] - g[(a, 2 * m)] * g[(b, 2 * m)] / gx
    })
}

/// Holevo bound `chi(B:E)` from explicit covariance matrices: entangling
/// cloner on `(A, B)`, detector inefficiency as a beam splitter mixing `B`
/// with one half of an EPR pair `(F, G)` whose variance reproduces `vel`,
/// then homodyne detection of `B`.
pub fn holevo_oracle(va: f64, t: f64, xi: f64, eta: f64, vel: f64) -> f64 {
    let v = va + 1.0;
    let chi_line = 1.0 / t - 1.0 + xi;
    let mut ab = DMatrix::zeros(4, 4);
    place_epr(&mut ab, 0, 1, v, t, t * (v + chi_line));
    let s_e = von_neumann(&ab);

    // modes: 0 = A, 1 = B, 2 = F, 3 = G
    let w = if eta < 1.0 { 1.0 + vel / (1.0 - eta) } else { 1.0 };
    let mut full = DMatrix::zeros(8, 8);
    full.view_mut((0, 0), (4, 4)).copy_from(&ab);
    let mut fg = DMatrix::zeros(4, 4);
    place_epr(&mut fg, 0, 1, w, 1.0, w);
    full.view_mut((4, 4), (4, 4)).copy_from(&fg);

    let (se, ce) = (eta.sqrt(), (1.0 - eta).sqrt());
    let mut s = DMatrix::identity(8, 8);
    for q in 0..2 {
        let (b, f) = (2 + q, 4 + q);
        s[(b, b)] = se;
        s[(b, f)] = ce;
        s[(f, b)] = -ce;
        s[(f, f)] = se;
    }
    let after = &s * full * s.transpose();
    let cond = homodyne_x(&after, 1);
    (s_e - von_neumann(&cond)).max(0.0)
}

/// Bitwise MAP decisions and exact posterior LLRs for a code with `k`
/// information bits and output symbols `x_j = xor_{i in sets[j]} u_i`, from
/// channel LLRs `llrs` (positive favours 0).
pub fn bitwise_map(k: usize, sets: &[Vec<u32>], llrs: &[f64]) -> (Vec<u8>, Vec<f64>) {
    let mut log_p = Vec::with_capacity(1 << k);
    for m in 0..(1u32 << k) {
        let mut lp = 0.0;
        for (set, &l) in sets.iter().zip(llrs) {
            let bit = set.iter().fold(0, |a, &i| a ^ ((m >> i) & 1));
            // log P(obs | bit) up to a bit-independent constant
            lp += if bit == 0 { 0.5 * l } else { -0.5 * l };
        }
        log_p.push(lp);
    }
    let lse = |v: &mut dyn Iterator<Item = f64>| {
        let v: Vec<f64> = v.collect();
        let mx = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        mx + v.iter().map(|x| (x - mx).exp()).sum::<f64>().ln()
    };
    let mut post = Vec::with_capacity(k);
    for i in 0..k {
        let zero = lse(&mut (0..1u32 << k).filter(|m| (m >> i) & 1 == 0).map(|m| log_p[m as usize]));
        let one = lse(&mut (0..1u32 << k).filter(|m| (m >> i) & 1 == 1).map(|m| log_p[m as usize]));
        post.push(zero - one);
    }
    (post.iter().map(|&l| u8::from(l < 0.0)).collect(), post)
}

/// Upper tail of the chi-square distribution with `dof` degrees of freedom.
pub fn chi_square_p_value(stat: f64, dof: f64) -> f64 {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    1.0 - ChiSquared::new(dof).unwrap().cdf(stat)
}

/// Pearson statistic of observed counts against equal expected counts.
pub fn pearson_uniform(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    let e = n as f64 / counts.len() as f64;
    counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum()
}
