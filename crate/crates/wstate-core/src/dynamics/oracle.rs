//! Exact piecewise propagator used to cross-check the Runge–Kutta
//! integrators.
//!
//! The span is cut into uniform slices; on each slice the drive is frozen at
//! its midpoint value and the exact matrix exponential of the frozen
//! generator is applied — a spectral exponential of the Hamiltonian for the
//! closed system, a Padé exponential of the full Liouvillian (acting on the
//! flattened density matrix) for the open system. The result converges to the
//! true solution as the slice count grows, through a code path disjoint from
//! the Runge–Kutta engines.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::dynamics::{DensityTrajectory, LindbladRhs, Trajectory};
use crate::error::{Error, Result};
use crate::linalg::{adjoint, eigh_hermitian, expm, kron};
use crate::model::{build_hamiltonian, PulseSpec, SystemParams};

/// The Liouvillian of `dρ/dt = −i[H,ρ] + Σ_k ½(2L_kρL_k† − L_k†L_kρ − ρL_k†L_k)`
/// as a d²×d² matrix acting on the row-major flattened ρ.
pub fn liouvillian_matrix(h: &Array2<C64>, jumps: &[Array2<C64>]) -> Array2<C64> {
    let dim = h.nrows();
    let eye = Array2::<C64>::eye(dim);
    let minus_i = C64::new(0.0, -1.0);
    // vec(AXB) = (A ⊗ Bᵀ)·vec(X) for row-major flattening.
    let mut liou = (kron(h, &eye) - kron(&eye, &h.t().to_owned())).mapv(|v| v * minus_i);
    for l in jumps {
        let ld_l = adjoint(l).dot(l);
        let feed = kron(l, &l.mapv(|v| v.conj()));
        let drain = kron(&ld_l, &eye) + kron(&eye, &ld_l.t().to_owned());
        liou = liou + feed - drain.mapv(|v| v * C64::new(0.5, 0.0));
    }
    liou
}

fn slice_grid(t_span: (f64, f64), n_slices: usize) -> Result<(f64, Vec<f64>)> {
    let (t0, t1) = t_span;
    if n_slices < 1 {
        return Err(Error::InvalidParams {
            field: "n_slices",
            reason: "at least one slice is required".into(),
        });
    }
    if !(t0.is_finite() && t1.is_finite()) || t1 <= t0 {
        return Err(Error::InvalidParams {
            field: "t_span",
            reason: format!("need finite t0 < t1, got ({t0}, {t1})"),
        });
    }
    let dt = (t1 - t0) / n_slices as f64;
    let times = (0..=n_slices).map(|k| t0 + k as f64 * dt).collect();
    Ok((dt, times))
}

/// Closed-system oracle: exact spectral propagation of the frozen
/// Hamiltonian, slice by slice. Records the state at every slice boundary.
pub fn propagate_state_oracle(
    params: &SystemParams,
    pulse: &PulseSpec,
    initial: &Array1<C64>,
    t_span: (f64, f64),
    n_slices: usize,
) -> Result<Trajectory> {
    pulse.validate()?;
    let dim = params.closed_dim();
    if initial.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: initial.len(),
        });
    }
    let (dt, times) = slice_grid(t_span, n_slices)?;
    let mut psi = initial.clone();
    let mut states = Vec::with_capacity(n_slices + 1);
    states.push(psi.clone());
    for k in 0..n_slices {
        let t_mid = t_span.0 + (k as f64 + 0.5) * dt;
        let h = build_hamiltonian(params, pulse.value(t_mid), false);
        let (vals, vecs) = eigh_hermitian(&h)?;
        let mut coeffs = adjoint(&vecs).dot(&psi);
        for (c, lambda) in coeffs.iter_mut().zip(vals.iter()) {
            *c *= C64::new(0.0, -lambda * dt).exp();
        }
        psi = vecs.dot(&coeffs);
        states.push(psi.clone());
    }
    let pulse_values = times.iter().map(|&t| pulse.value(t)).collect();
    Ok(Trajectory {
        times,
        states,
        pulse_values,
    })
}

/// Open-system oracle: exact Padé exponential of the frozen Liouvillian,
/// slice by slice. Records the density matrix at every slice boundary.
pub fn propagate_density_oracle(
    params: &SystemParams,
    pulse: &PulseSpec,
    initial: &Array2<C64>,
    t_span: (f64, f64),
    n_slices: usize,
) -> Result<DensityTrajectory> {
    pulse.validate()?;
    let dim = params.open_dim();
    if initial.dim() != (dim, dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: initial.nrows(),
        });
    }
    let (dt, times) = slice_grid(t_span, n_slices)?;
    let jumps = LindbladRhs::new(params);
    let mut rho_vec = initial
        .to_owned()
        .into_shape_with_order(dim * dim)
        .expect("density matrix is contiguous");
    let mut rhos = Vec::with_capacity(n_slices + 1);
    rhos.push(initial.clone());
    let dt_c = C64::new(dt, 0.0);
    for k in 0..n_slices {
        let t_mid = t_span.0 + (k as f64 + 0.5) * dt;
        let h = build_hamiltonian(params, pulse.value(t_mid), true);
        let generator = liouvillian_matrix(&h, jumps.jumps()).mapv(|v| v * dt_c);
        let propagator = expm(&generator)?;
        rho_vec = propagator.dot(&rho_vec);
        rhos.push(
            rho_vec
                .clone()
                .into_shape_with_order((dim, dim))
                .expect("flattened density matrix is contiguous"),
        );
    }
    let pulse_values = times.iter().map(|&t| pulse.value(t)).collect();
    Ok(DensityTrajectory {
        times,
        rhos,
        pulse_values,
    })
}
