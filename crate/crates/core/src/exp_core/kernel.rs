//! Inner loops for `Σ_n a_n e(n·x + n²·q)` over blocks of nodes.
//!
//! Characters are advanced by the exact recurrence
//! `e(ψ_{n+1}) = e(ψ_n)·r_n`, `r_{n+1} = r_n·e(2q)`, and reseeded from
//! `sin_cos` every `RESEED` terms so rounding never accumulates far.

use std::f64::consts::TAU;

/// Width of one vector of lanes.
const W: usize = 8;
/// Independent vectors advanced together; enough to hide the latency of
/// the recurrence.
const V: usize = 2;
pub(crate) const LANES: usize = W * V;
/// Nodes per Gram work group; the character table of a group stays in
/// cache between the forward and the adjoint pass.
pub(crate) const GROUP: usize = 4 * LANES;
const RESEED: usize = 256;

/// Eight lanes of `f64`. Uses AVX-512 registers directly when the build
/// target has them; otherwise plain arrays left to the auto-vectorizer.
#[cfg(target_feature = "avx512f")]
mod lanes {
    use std::arch::x86_64::*;
    use std::ops::{Add, Mul, Neg, Sub};
    
    #[derive(Clone, Copy)]
    pub(super) struct F(__m512d);

    impl Default for F {
        #[inline(always)]
        fn default() -> Self {
            F::splat(0.0)
        }
    }

    impl F {
        #[inline(always)]
        pub(super) fn splat(v: f64) -> Self {
            // SAFETY: the module is only compiled with avx512f enabled.
            F(unsafe { _mm512_set1_pd(v) })
        }
        #[inline(always)]
        pub(super) fn from_array(a: [f64; 8]) -> Self {
            F(unsafe { _mm512_loadu_pd(a.as_ptr()) })
        }
        #[inline(always)]
        pub(super) fn to_array(self) -> [f64; 8] {
            let mut a = [0.0; 8];
            unsafe { _mm512_storeu_pd(a.as_mut_ptr(), self.0) };
            a
        }
        #[inline(always)]
        pub(super) fn load(s: &[f64]) -> Self {
            assert!(s.len() >= 8);
            F(unsafe { _mm512_loadu_pd(s.as_ptr()) })
        }
        #[inline(always)]
        pub(super) fn store(self, s: &mut [f64]) {
            assert!(s.len() >= 8);
            unsafe { _mm512_storeu_pd(s.as_mut_ptr(), self.0) }
        }
        /// `self·b + c`.
        #[inline(always)]
        pub(super) fn mul_add(self, b: F, c: F) -> F {
            F(unsafe { _mm512_fmadd_pd(self.0, b.0, c.0) })
        }
        #[inline(always)]
        pub(super) fn sum(self) -> f64 {
            self.to_array().iter().sum()
        }
    }

    impl Add for F {
        type Output = F;
        #[inline(always)]
        fn add(self, b: F) -> F {
            F(unsafe { _mm512_add_pd(self.0, b.0) })
        }
    }
    impl Sub for F {
        type Output = F;
        #[inline(always)]
        fn sub(self, b: F) -> F {
            F(unsafe { _mm512_sub_pd(self.0, b.0) })
        }
    }
    impl Mul for F {
        type Output = F;
        #[inline(always)]
        fn mul(self, b: F) -> F {
            F(unsafe { _mm512_mul_pd(self.0, b.0) })
        }
    }
    impl Neg for F {
        type Output = F;
        #[inline(always)]
        fn neg(self) -> F {
            F::splat(0.0) - self
        }
    }
}

#[cfg(not(target_feature = "avx512f"))]
mod lanes {
    use super::fma;
    use std::ops::{Add, Mul, Neg, Sub};
    
    #[derive(Clone, Copy, Default)]
    pub(super) struct F([f64; 8]);

    impl F {
        #[inline(always)]
        pub(super) fn splat(v: f64) -> Self {
            F([v; 8])
        }
        #[inline(always)]
        pub(super) fn from_array(a: [f64; 8]) -> Self {
            F(a)
        }
        #[inline(always)]
        pub(super) fn to_array(self) -> [f64; 8] {
            self.0
        }
        #[inline(always)]
        pub(super) fn load(s: &[f64]) -> Self {
            let mut o = [0.0; 8];
            o.copy_from_slice(&s[..8]);
            F(o)
        }
        #[inline(always)]
        pub(super) fn store(self, s: &mut [f64]) {
            s[..8].copy_from_slice(&self.0);
        }
        #[inline(always)]
        pub(super) fn mul_add(self, b: F, c: F) -> F {
            let mut o = [0.0; 8];
            for l in 0..8 {
                o[l] = fma(self.0[l], b.0[l], c.0[l]);
            }
            F(o)
        }
        #[inline(always)]
        pub(super) fn sum(self) -> f64 {
            self.0.iter().sum()
        }
    }

    macro_rules! lanewise {
        ($tr:ident, $f:ident, $op:tt) => {
            impl $tr for F {
                type Output = F;
                #[inline(always)]
                fn $f(self, b: F) -> F {
                    let mut o = [0.0; 8];
                    for l in 0..8 {
                        o[l] = self.0[l] $op b.0[l];
                    }
                    F(o)
                }
            }
        };
    }
    lanewise!(Add, add, +);
    lanewise!(Sub, sub, -);
    lanewise!(Mul, mul, *);

    impl Neg for F {
        type Output = F;
        #[inline(always)]
        fn neg(self) -> F {
            F::splat(0.0) - self
        }
    }
}

use lanes::F;

#[cfg_attr(target_feature = "avx512f", allow(dead_code))]
#[inline(always)]
fn fma(a: f64, b: f64, c: f64) -> f64 {
    #[cfg(target_feature = "fma")]
    {
        a.mul_add(b, c)
    }
    #[cfg(not(target_feature = "fma"))]
    {
        a * b + c
    }
}

#[inline(always)]
fn frac(z: f64) -> f64 {
    z - z.round()
}

#[inline(always)]
fn cis(cycles: f64) -> (f64, f64) {
    let (s, c) = (TAU * frac(cycles)).sin_cos();
    (c, s)
}

/// `(ar + i·ai)·(br + i·bi)`.
#[inline(always)]
fn cmul(ar: F, ai: F, br: F, bi: F) -> (F, F) {
    (ar.mul_add(br, -(ai * bi)), ar.mul_add(bi, ai * br))
}

/// Recurrence state for `LANES` nodes: current character `t`, ratio `r`,
/// ratio step `w`.
struct Chirp {
    tr: [F; V],
    ti: [F; V],
    rr: [F; V],
    ri: [F; V],
    wr: [F; V],
    wi: [F; V],
}

fn fill(f: impl Fn(usize) -> (f64, f64)) -> ([F; V], [F; V]) {
    let mut re = [F::default(); V];
    let mut im = [F::default(); V];
    for v in 0..V {
        let mut r = [0.0; W];
        let mut i = [0.0; W];
        for l in 0..W {
            (r[l], i[l]) = f(v * W + l);
        }
        re[v] = F::from_array(r);
        im[v] = F::from_array(i);
    }
    (re, im)
}

impl Chirp {
    fn new(x: &[f64], q: &[f64], n: i64) -> Self {
        let (wr, wi) = fill(|i| cis(2.0 * q[i]));
        let mut c = Chirp { tr: wr, ti: wi, rr: wr, ri: wi, wr, wi };
        c.reseed(x, q, n);
        c
    }

    fn reseed(&mut self, x: &[f64], q: &[f64], n: i64) {
        let nf = n as f64;
        (self.tr, self.ti) = fill(|i| cis(frac(nf * x[i]) + frac(nf * nf * q[i])));
        (self.rr, self.ri) = fill(|i| cis(x[i] + frac((2.0 * nf + 1.0) * q[i])));
    }

    #[inline(always)]
    fn advance(&mut self) {
        for v in 0..V {
            (self.tr[v], self.ti[v]) = cmul(self.tr[v], self.ti[v], self.rr[v], self.ri[v]);
            (self.rr[v], self.ri[v]) = cmul(self.rr[v], self.ri[v], self.wr[v], self.wi[v]);
        }
    }
}

/// Runs the recurrence over `j ∈ [0, len)`, calling `body(j, chirp)` before
/// each advance.
#[inline(always)]
fn sweep(x: &[f64], q: &[f64], lo: i64, len: usize, mut body: impl FnMut(usize, &Chirp)) {
    let mut c = Chirp::new(x, q, lo);
    let mut start = 0;
    while start < len {
        if start > 0 {
            c.reseed(x, q, lo + start as i64);
        }
        let end = (start + RESEED).min(len);
        for j in start..end {
            body(j, &c);
            c.advance();
        }
        start = end;
    }
}

/// `S(x_l) = Σ_j a_{lo+j} e((lo+j)·x_l + (lo+j)²·q_l)` for one block of
/// `LANES` nodes.
pub(crate) fn sum_block(
    x: &[f64],
    q: &[f64],
    lo: i64,
    a_re: &[f64],
    a_im: &[f64],
) -> ([f64; LANES], [f64; LANES]) {
    let mut sr = [F::default(); V];
    let mut si = [F::default(); V];
    sweep(x, q, lo, a_re.len(), |j, c| {
        let (ar, ai) = (F::splat(a_re[j]), F::splat(a_im[j]));
        for v in 0..V {
            sr[v] = ar.mul_add(c.tr[v], (-ai).mul_add(c.ti[v], sr[v]));
            si[v] = ar.mul_add(c.ti[v], ai.mul_add(c.tr[v], si[v]));
        }
    });
    let mut out_r = [0.0; LANES];
    let mut out_i = [0.0; LANES];
    for v in 0..V {
        sr[v].store(&mut out_r[v * W..]);
        si[v].store(&mut out_i[v * W..]);
    }
    (out_r, out_i)
}

/// Scratch space for `gram_group`: characters stored block-major,
/// `[block][j][re lanes | im lanes]`, so the forward pass writes
/// sequentially.
pub(crate) struct GramScratch {
    table: Vec<f64>,
    len: usize,
}

impl GramScratch {
    pub(crate) fn new(len: usize) -> Self {
        GramScratch { table: vec![0.0; 2 * len * GROUP], len }
    }

    #[inline(always)]
    fn cell(&self, blk: usize, j: usize) -> usize {
        2 * LANES * (blk * self.len + j)
    }
}

/// One group of `GROUP` nodes of the Gram operator:
/// `out_m += Σ_i w_i·S(x_i)·conj(e(ψ(x_i, m)))` with `S` as in `sum_block`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn gram_group(
    x: &[f64],
    q: &[f64],
    w: &[f64],
    lo: i64,
    a_re: &[f64],
    a_im: &[f64],
    scratch: &mut GramScratch,
    out_re: &mut [f64],
    out_im: &mut [f64],
) {
    let len = a_re.len();
    const BLOCKS: usize = GROUP / LANES;
    let mut cr = [[F::default(); V]; BLOCKS];
    let mut ci = [[F::default(); V]; BLOCKS];
    for blk in 0..BLOCKS {
        let off = blk * LANES;
        let xb = &x[off..off + LANES];
        let qb = &q[off..off + LANES];
        let mut sr = [F::default(); V];
        let mut si = [F::default(); V];
        let table = &mut scratch.table;
        let base = 2 * LANES * blk * len;
        sweep(xb, qb, lo, len, |j, c| {
            let (ar, ai) = (F::splat(a_re[j]), F::splat(a_im[j]));
            let cell = &mut table[base + 2 * LANES * j..base + 2 * LANES * (j + 1)];
            for v in 0..V {
                c.tr[v].store(&mut cell[v * W..]);
                c.ti[v].store(&mut cell[LANES + v * W..]);
                sr[v] = ar.mul_add(c.tr[v], (-ai).mul_add(c.ti[v], sr[v]));
                si[v] = ar.mul_add(c.ti[v], ai.mul_add(c.tr[v], si[v]));
            }
        });
        for v in 0..V {
            let wv = F::load(&w[off + v * W..]);
            cr[blk][v] = wv * sr[v];
            ci[blk][v] = wv * si[v];
        }
    }
    for j in 0..len {
        let mut pr = F::default();
        let mut pi = F::default();
        for blk in 0..BLOCKS {
            let c0 = scratch.cell(blk, j);
            let cell = &scratch.table[c0..c0 + 2 * LANES];
            for v in 0..V {
                let er = F::load(&cell[v * W..]);
                let ei = F::load(&cell[LANES + v * W..]);
                pr = cr[blk][v].mul_add(er, ci[blk][v].mul_add(ei, pr));
                pi = ci[blk][v].mul_add(er, (-cr[blk][v]).mul_add(ei, pi));
            }
        }
        out_re[j] += pr.sum();
        out_im[j] += pi.sum();
    }
}

/// Characters `e(ψ(x_l, lo+j))` for one block of `LANES` nodes, node-major:
/// entry `(l, j)` at `l·len + j`.
pub(crate) fn character_block(
    x: &[f64],
    q: &[f64],
    lo: i64,
    len: usize,
    out_re: &mut [f64],
    out_im: &mut [f64],
) {
    sweep(x, q, lo, len, |j, c| {
        for v in 0..V {
            let (tr, ti) = (c.tr[v].to_array(), c.ti[v].to_array());
            for l in 0..W {
                let node = v * W + l;
                out_re[node * len + j] = tr[l];
                out_im[node * len + j] = ti[l];
            }
        }
    });
}
