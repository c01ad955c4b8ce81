use nalgebra::DMatrix;
use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// An operator of the form `Σ_m w_m |m + shift⟩⟨m|` on a truncated Fock space.
///
/// Every Kraus operator of the loss/amplifier decomposition, every phase
/// rotation and every function of `n̂` has this shape, and so do their
/// products. Weights whose target falls outside `[0, dim)` are stored as zero.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderOp {
    dim: usize,
    shift: isize,
    weights: Vec<Complex64>,
}

impl LadderOp {
    pub fn from_fn(dim: usize, shift: isize, mut f: impl FnMut(usize) -> Complex64) -> Self {
        let weights = (0..dim)
            .map(|m| if in_range(m, shift, dim) { f(m) } else { ZERO })
            .collect();
        Self {
            dim,
            shift,
            weights,
        }
    }

    pub fn diagonal(dim: usize, f: impl FnMut(usize) -> Complex64) -> Self {
        Self::from_fn(dim, 0, f)
    }

    pub fn real_diagonal(dim: usize, mut f: impl FnMut(usize) -> f64) -> Self {
        Self::from_fn(dim, 0, |m| Complex64::new(f(m), 0.0))
    }

    /// `e^{iφ n̂}`.
    pub fn phase(dim: usize, phi: f64) -> Self {
        Self::diagonal(dim, |m| Complex64::from_polar(1.0, phi * m as f64))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shift(&self) -> isize {
        self.shift
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    #[inline]
    pub fn target(&self, m: usize) -> Option<usize> {
        let t = m as isize + self.shift;
        (t >= 0 && (t as usize) < self.dim).then_some(t as usize)
    }

    pub fn scaled(mut self, s: Complex64) -> Self {
        self.weights.iter_mut().for_each(|w| *w *= s);
        self
    }

    /// `self · inner`.
    pub fn compose(&self, inner: &LadderOp) -> LadderOp {
        assert_eq!(self.dim, inner.dim, "dimension mismatch");
        let mut weights = vec![ZERO; self.dim];
        for (m, w) in weights.iter_mut().enumerate() {
            let wi = inner.weights[m];
            if wi == ZERO {
                continue;
            }
            if let Some(mid) = inner.target(m) {
                *w = self.weights[mid] * wi;
            }
        }
        LadderOp {
            dim: self.dim,
            shift: self.shift + inner.shift,
            weights,
        }
    }

    pub fn adjoint(&self) -> LadderOp {
        let mut weights = vec![ZERO; self.dim];
        for (m, w) in self.weights.iter().enumerate() {
            if let Some(t) = self.target(m) {
                weights[t] = w.conj();
            }
        }
        LadderOp {
            dim: self.dim,
            shift: -self.shift,
            weights,
        }
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut out = DMatrix::zeros(self.dim, self.dim);
        for (m, w) in self.weights.iter().enumerate() {
            if let Some(t) = self.target(m) {
                out[(t, m)] = *w;
            }
        }
        out
    }

    /// Restricts the operator to sources `< keep`, zeroing the rest.
    pub fn truncate_sources(mut self, keep: usize) -> Self {
        for w in self.weights.iter_mut().skip(keep) {
            *w = ZERO;
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.weights.iter().all(|w| *w == ZERO)
    }
}

#[inline]
fn in_range(m: usize, shift: isize, dim: usize) -> bool {
    let t = m as isize + shift;
    t >= 0 && (t as usize) < dim
}

/// Index layout of an `n_modes`-mode density matrix with `dim` levels per
/// mode; mode 0 is the most significant digit.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ModeLayout {
    pub dim: usize,
    pub n_modes: usize,
}

impl ModeLayout {
    pub fn total(&self) -> usize {
        self.dim.pow(self.n_modes as u32)
    }

    /// Stride of `mode` and the number/stride of the spectator index.
    fn strides(&self, mode: usize) -> (usize, usize, usize) {
        match (self.n_modes, mode) {
            (1, 0) => (1, 1, 0),
            (2, 0) => (self.dim, self.dim, 1),
            (2, 1) => (1, self.dim, self.dim),
            _ => panic!("unsupported mode {mode} of {}", self.n_modes),
        }
    }

    /// `out += (K ⊗ 1) ρ (K ⊗ 1)†` with `K` acting on `mode`.
    pub fn conjugate_add(
        &self,
        op: &LadderOp,
        rho: &DMatrix<Complex64>,
        out: &mut DMatrix<Complex64>,
        mode: usize,
    ) {
        debug_assert_eq!(op.dim(), self.dim);
        let (s_loc, n_other, s_other) = self.strides(mode);
        let active: Vec<(usize, usize, Complex64)> = op
            .weights()
            .iter()
            .enumerate()
            .filter(|(_, w)| **w != ZERO)
            .filter_map(|(m, w)| op.target(m).map(|t| (m, t, *w)))
            .collect();
        for &(mc, tc, wc) in &active {
            let wc = wc.conj();
            for oc in 0..n_other {
                let src_c = mc * s_loc + oc * s_other;
                let dst_c = tc * s_loc + oc * s_other;
                for &(mr, tr, wr) in &active {
                    let f = wr * wc;
                    for or in 0..n_other {
                        let src_r = mr * s_loc + or * s_other;
                        let dst_r = tr * s_loc + or * s_other;
                        out[(dst_r, dst_c)] += f * rho[(src_r, src_c)];
                    }
                }
            }
        }
    }

    /// `(K ⊗ 1) ρ (K ⊗ 1)†` for a diagonal (shift-0) `K`, in place.
    pub fn conjugate_diagonal_in_place(
        &self,
        op: &LadderOp,
        rho: &mut DMatrix<Complex64>,
        mode: usize,
    ) {
        debug_assert_eq!(op.shift(), 0);
        let (s_loc, n_other, s_other) = self.strides(mode);
        let local = |idx: usize| (idx / s_loc) % self.dim;
        let _ = (n_other, s_other);
        let n = self.total();
        let w = op.weights();
        for c in 0..n {
            let wc = w[local(c)].conj();
            for r in 0..n {
                rho[(r, c)] *= w[local(r)] * wc;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn lowering(dim: usize) -> LadderOp {
        LadderOp::from_fn(dim, -1, |m| c((m as f64).sqrt()))
    }

    fn raising(dim: usize) -> LadderOp {
        LadderOp::from_fn(dim, 1, |m| c(((m + 1) as f64).sqrt()))
    }

    #[test]
    fn compose_matches_dense_product() {
        let a = lowering(7);
        let ad = raising(7);
        let ph = LadderOp::phase(7, 0.4);
        let prod = ph.compose(&ad).compose(&a).compose(&a);
        let dense = ph.to_dense() * ad.to_dense() * a.to_dense() * a.to_dense();
        assert!((prod.to_dense() - dense).norm() < 1e-13);
        assert_eq!(prod.shift(), -1);
    }

    #[test]
    fn adjoint_matches_dense() {
        let op = raising(6).compose(&LadderOp::phase(6, 1.3));
        assert!((op.adjoint().to_dense() - op.to_dense().adjoint()).norm() < 1e-15);
        assert_eq!(raising(6).adjoint(), lowering(6));
    }

    #[test]
    fn number_operator_from_ladder() {
        let n = raising(5).compose(&lowering(5));
        for (m, w) in n.weights().iter().enumerate() {
            assert!((w.re - m as f64).abs() < 1e-14);
        }
    }

    #[test]
    fn conjugate_add_single_mode_matches_dense() {
        let dim = 5;
        let op = raising(dim)
            .compose(&LadderOp::phase(dim, 0.7))
            .scaled(Complex64::new(0.3, -0.2));
        let rho = DMatrix::from_fn(dim, dim, |i, j| {
            Complex64::new((i + 2 * j) as f64, i as f64 - j as f64)
        });
        let mut out = DMatrix::zeros(dim, dim);
        ModeLayout { dim, n_modes: 1 }.conjugate_add(&op, &rho, &mut out, 0);
        let k = op.to_dense();
        let expected = &k * &rho * k.adjoint();
        assert!((out - expected).norm() < 1e-12);
    }

    #[test]
    fn conjugate_add_two_modes_matches_kron() {
        let dim = 3;
        let op = lowering(dim).compose(&LadderOp::phase(dim, 0.9));
        let n = dim * dim;
        let rho = DMatrix::from_fn(n, n, |i, j| {
            Complex64::new((i * 3 + j) as f64 * 0.1, (i as f64 - j as f64) * 0.05)
        });
        let id = DMatrix::<Complex64>::identity(dim, dim);
        let layout = ModeLayout { dim, n_modes: 2 };
        for mode in 0..2 {
            let k = if mode == 0 {
                op.to_dense().kronecker(&id)
            } else {
                id.kronecker(&op.to_dense())
            };
            let mut out = DMatrix::zeros(n, n);
            layout.conjugate_add(&op, &rho, &mut out, mode);
            let expected = &k * &rho * k.adjoint();
            assert!((out - expected).norm() < 1e-12, "mode {mode}");

            let ph = LadderOp::phase(dim, 0.3);
            let kp = if mode == 0 {
                ph.to_dense().kronecker(&id)
            } else {
                id.kronecker(&ph.to_dense())
            };
            let mut inplace = rho.clone();
            layout.conjugate_diagonal_in_place(&ph, &mut inplace, mode);
            assert!((inplace - &kp * &rho * kp.adjoint()).norm() < 1e-12);
        }
    }
}
