//! Slater-determinant (fermionic Gaussian state) algebra.
//!
//! A determinant is a pair of complex M x N_sigma orbital-coefficient
//! matrices plus a real log-norm accumulator: QR stabilization keeps the
//! columns orthonormal and moves the accumulated scale into the log, so
//! overlaps stay well-conditioned over long imaginary-time propagations.

mod mean_field;

pub use mean_field::{mean_field_ground_state, MeanFieldOptions, MeanFieldResult};

use crate::hamiltonians::Hamiltonian;
use crate::linalg::expm;
use crate::{AfqmcError, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct SlaterDeterminant {
    pub phi_up: DMatrix<Complex64>,
    pub phi_dn: DMatrix<Complex64>,
    /// Real log of the positive scale factored out by reorthonormalization.
    pub log_scale: f64,
}

impl SlaterDeterminant {
    pub fn new(phi_up: DMatrix<Complex64>, phi_dn: DMatrix<Complex64>) -> Self {
        assert_eq!(phi_up.nrows(), phi_dn.nrows(), "spin sectors share the orbital space");
        SlaterDeterminant {
            phi_up,
            phi_dn,
            log_scale: 0.0,
        }
    }

    /// Occupation determinant: unit-vector columns at the listed orbitals.
    pub fn from_occupations(l: usize, up: &[usize], dn: &[usize]) -> Self {
        let mk = |occ: &[usize]| {
            let mut m = DMatrix::<Complex64>::zeros(l, occ.len());
            for (c, &r) in occ.iter().enumerate() {
                m[(r, c)] = Complex64::ONE;
            }
            m
        };
        SlaterDeterminant::new(mk(up), mk(dn))
    }

    /// Occupation determinant from bitstrings (ascending orbital order).
    pub fn from_bits(l: usize, up: u64, dn: u64) -> Self {
        let unpack = |mut s: u64| {
            let mut v = Vec::new();
            while s != 0 {
                v.push(s.trailing_zeros() as usize);
                s &= s - 1;
            }
            v
        };
        SlaterDeterminant::from_occupations(l, &unpack(up), &unpack(dn))
    }

    pub fn n_orbitals(&self) -> usize {
        self.phi_up.nrows()
    }

    pub fn n_up(&self) -> usize {
        self.phi_up.ncols()
    }

    pub fn n_dn(&self) -> usize {
        self.phi_dn.ncols()
    }

    pub fn shape_matches(&self, other: &SlaterDeterminant) -> bool {
        self.n_orbitals() == other.n_orbitals()
            && self.n_up() == other.n_up()
            && self.n_dn() == other.n_dn()
    }
}

/// <bra|ket> = exp(log scales) * prod_sigma det(phi_bra^H phi_ket).
pub fn overlap(bra: &SlaterDeterminant, ket: &SlaterDeterminant) -> Complex64 {
    assert!(bra.shape_matches(ket), "overlap needs matching shapes");
    let s_up = bra.phi_up.adjoint() * &ket.phi_up;
    let s_dn = bra.phi_dn.adjoint() * &ket.phi_dn;
    let det = s_up.lu().determinant() * s_dn.lu().determinant();
    det * (bra.log_scale + ket.log_scale).exp()
}

/// Mixed Green's function per spin: G = Phi_w (Phi_T^H Phi_w)^{-1} Phi_T^H.
/// Idempotent with trace N_sigma; errors on singular trial-walker overlap.
pub fn greens_function(
    trial: &SlaterDeterminant,
    walker: &SlaterDeterminant,
) -> Result<[DMatrix<Complex64>; 2]> {
    if !trial.shape_matches(walker) {
        return Err(AfqmcError::Dimension("Green's function needs matching shapes".into()));
    }
    let one = |t: &DMatrix<Complex64>, w: &DMatrix<Complex64>| -> Result<DMatrix<Complex64>> {
        let tadj = t.adjoint();
        let s = &tadj * w;
        let inv = s
            .clone()
            .try_inverse()
            .ok_or_else(|| AfqmcError::Numerical("singular trial-walker overlap".into()))?;
        Ok(w * inv * tadj)
    };
    Ok([
        one(&trial.phi_up, &walker.phi_up)?,
        one(&trial.phi_dn, &walker.phi_dn)?,
    ])
}

/// Mixed expectation value of the Hamiltonian from per-spin Green's
/// functions: core + sum_s tr(h G_s) + 1/2 sum_g [tr(L_g G)^2 - exchange].
/// Returns (one-body, two-body) parts; add the core separately.
pub fn energy_from_greens(
    ham: &Hamiltonian,
    g_up: &DMatrix<Complex64>,
    g_dn: &DMatrix<Complex64>,
) -> (Complex64, Complex64) {
    let m = ham.n_orbitals();
    let mut one = Complex64::ZERO;
    for p in 0..m {
        for q in 0..m {
            let h = ham.one_body[(p, q)];
            if h != 0.0 {
                one += (g_up[(q, p)] + g_dn[(q, p)]) * h;
            }
        }
    }
    let mut two = Complex64::ZERO;
    for f in &ham.factors {
        let c = f.trace_with(g_up) + f.trace_with(g_dn);
        two += 0.5 * (c * c - f.exchange_trace(g_up) - f.exchange_trace(g_dn));
    }
    (one, two)
}

/// A precomputed one-body propagator exp(A), applied per spin. Computing
/// the exponential once per distinct generator is the contract; callers
/// that reuse a generator hold on to the propagator.
#[derive(Debug, Clone)]
pub struct OneBodyPropagator {
    exp_up: DMatrix<Complex64>,
    exp_dn: DMatrix<Complex64>,
}

impl OneBodyPropagator {
    /// Same generator for both spins.
    pub fn new(a: &DMatrix<Complex64>) -> Self {
        let e = expm(a);
        OneBodyPropagator {
            exp_up: e.clone(),
            exp_dn: e,
        }
    }

    pub fn unrestricted(a_up: &DMatrix<Complex64>, a_dn: &DMatrix<Complex64>) -> Self {
        OneBodyPropagator {
            exp_up: expm(a_up),
            exp_dn: expm(a_dn),
        }
    }

    pub fn apply(&self, det: &mut SlaterDeterminant) {
        det.phi_up = &self.exp_up * &det.phi_up;
        det.phi_dn = &self.exp_dn * &det.phi_dn;
    }
}

/// Apply exp(A) to a determinant, recomputing the exponential. Prefer
/// [`OneBodyPropagator`] in loops.
pub fn apply_one_body(a: &DMatrix<Complex64>, det: &SlaterDeterminant) -> SlaterDeterminant {
    let mut out = det.clone();
    OneBodyPropagator::new(a).apply(&mut out);
    out
}

/// QR-reorthonormalize both spin sectors in place, moving |det R| into the
/// log-norm accumulator. The embedded state is unchanged up to that
/// positive scale. Errors on rank deficiency.
pub fn reorthonormalize(det: &mut SlaterDeterminant) -> Result<()> {
    for phi in [&mut det.phi_up, &mut det.phi_dn] {
        if phi.ncols() == 0 {
            continue;
        }
        let qr = phi.clone().qr();
        let mut q = qr.q();
        let r = qr.r();
        let mut log_abs = 0.0;
        for c in 0..r.nrows() {
            let rcc = r[(c, c)];
            let mag = rcc.norm();
            if mag < 1e-300 {
                return Err(AfqmcError::Numerical(
                    "rank-deficient determinant in reorthonormalization".into(),
                ));
            }
            log_abs += mag.ln();
            // Rotate the column phase so the implicit R has a positive
            // diagonal; keeps the accumulator real.
            let phase = rcc / mag;
            for rr in 0..q.nrows() {
                q[(rr, c)] *= phase;
            }
        }
        *phi = q;
        det.log_scale += log_abs;
    }
    Ok(())
}

/// Random orthonormal determinant for tests and property checks.
#[cfg(test)]
pub(crate) fn random_determinant(
    rng: &mut rand_chacha::ChaCha8Rng,
    l: usize,
    n_up: usize,
    n_dn: usize,
) -> SlaterDeterminant {
    use rand::Rng;
    let mut mk = |n: usize| {
        DMatrix::from_fn(l, n, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    };
    let up = mk(n_up);
    let dn = mk(n_dn);
    let mut det = SlaterDeterminant::new(up, dn);
    reorthonormalize(&mut det).unwrap();
    det.log_scale = 0.0;
    det
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonians::{build_hubbard_chain, Boundary, HubbardChainParams};
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_det(rng: &mut ChaCha8Rng, l: usize, n_up: usize, n_dn: usize) -> SlaterDeterminant {
        random_determinant(rng, l, n_up, n_dn)
    }

    #[test]
    fn self_overlap_of_orthonormal_det_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let det = random_det(&mut rng, 5, 2, 3);
        let o = overlap(&det, &det);
        assert_relative_eq!(o.re, 1.0, epsilon = 1e-12);
        assert_relative_eq!(o.im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn disjoint_occupations_are_orthogonal() {
        let a = SlaterDeterminant::from_occupations(4, &[0, 1], &[]);
        let b = SlaterDeterminant::from_occupations(4, &[0, 2], &[]);
        assert_eq!(overlap(&a, &b).norm(), 0.0);
    }

    #[test]
    fn greens_function_is_idempotent_projector_with_trace_n() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let trial = random_det(&mut rng, 6, 3, 2);
        let walker = random_det(&mut rng, 6, 3, 2);
        let [g_up, g_dn] = greens_function(&trial, &walker).unwrap();
        for (g, n) in [(&g_up, 3usize), (&g_dn, 2usize)] {
            let gg = g * g;
            let diff = (&gg - g).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(diff < 1e-10, "idempotency defect {diff}");
            let tr: Complex64 = (0..6).map(|i| g[(i, i)]).sum();
            assert_relative_eq!(tr.re, n as f64, epsilon = 1e-10);
            assert_relative_eq!(tr.im, 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn identity_trial_gives_occupied_projector() {
        let det = SlaterDeterminant::from_occupations(4, &[0, 2], &[1]);
        let [g_up, g_dn] = greens_function(&det, &det).unwrap();
        for i in 0..4 {
            let expect_up = if i == 0 || i == 2 { 1.0 } else { 0.0 };
            let expect_dn = if i == 1 { 1.0 } else { 0.0 };
            assert_relative_eq!(g_up[(i, i)].re, expect_up, epsilon = 1e-14);
            assert_relative_eq!(g_dn[(i, i)].re, expect_dn, epsilon = 1e-14);
        }
    }

    #[test]
    fn zero_generator_is_identity_propagation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let det = random_det(&mut rng, 4, 2, 2);
        let a = DMatrix::<Complex64>::zeros(4, 4);
        let out = apply_one_body(&a, &det);
        let diff = (&out.phi_up - &det.phi_up)
            .iter()
            .chain((&out.phi_dn - &det.phi_dn).iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-14);
    }

    #[test]
    fn antihermitian_generator_preserves_overlap_magnitude() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let det = random_det(&mut rng, 4, 2, 1);
        let mut a = DMatrix::<Complex64>::zeros(4, 4);
        for i in 0..4 {
            for j in 0..4 {
                let z = Complex64::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
                a[(i, j)] += z;
                a[(j, i)] -= z.conj();
            }
        }
        let out = apply_one_body(&a, &det);
        assert_relative_eq!(overlap(&out, &out).norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn reorthonormalization_tracks_column_scaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let det = random_det(&mut rng, 5, 2, 2);
        let mut scaled = det.clone();
        scaled.phi_up *= Complex64::new(2.0, 0.0);
        scaled.phi_dn *= Complex64::new(2.0, 0.0);
        reorthonormalize(&mut scaled).unwrap();
        // Four columns scaled by 2: accumulator gains 4 ln 2.
        assert_relative_eq!(scaled.log_scale, 4.0 * 2.0f64.ln(), epsilon = 1e-10);
        // Already orthonormal: accumulator unchanged.
        let mut again = scaled.clone();
        reorthonormalize(&mut again).unwrap();
        assert_relative_eq!(again.log_scale, scaled.log_scale, epsilon = 1e-12);
        // Overlap with the original still matches up to the recorded scale.
        let o = overlap(&det, &scaled);
        assert_relative_eq!(o.re, overlap(&det, &det).re, epsilon = 1e-10);
    }

    #[test]
    fn free_fermion_imaginary_time_converges_to_ground_state() {
        let ham = build_hubbard_chain(HubbardChainParams {
            t_x: 1.0,
            t_xx: 0.0,
            t_xxx: 0.0,
            u: 0.0,
            l: 6,
            boundary: Boundary::Open,
        })
        .unwrap();
        let a = crate::linalg::to_complex(&(-0.2 * ham.one_body.clone()));
        let prop = OneBodyPropagator::new(&a);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut det = random_det(&mut rng, 6, 3, 3);
        let mut last = f64::INFINITY;
        for step in 0..400 {
            prop.apply(&mut det);
            if step % 5 == 4 {
                reorthonormalize(&mut det).unwrap();
                let [g_up, g_dn] = greens_function(&det, &det).unwrap();
                let (one, two) = energy_from_greens(&ham, &g_up, &g_dn);
                let e = (one + two).re;
                assert!(e <= last + 1e-10, "energy rose: {last} -> {e}");
                last = e;
            }
        }
        // Sum of the three lowest orbital energies, both spins.
        let eig = ham.one_body.clone().symmetric_eigen();
        let mut orb: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
        orb.sort_by(f64::total_cmp);
        let e0: f64 = 2.0 * (orb[0] + orb[1] + orb[2]);
        assert!((last - e0).abs() < 1e-8, "{last} vs {e0}");
    }
}
