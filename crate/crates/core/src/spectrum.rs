//! Single-particle diagonalization, orbital filling, and the correlation
//! kernel.

use ndarray::{s, Array1, Array2};

use crate::error::{Error, Result};
use crate::model::HoppingMatrix;
use crate::{la, C64};

/// Orbitals with energy below `-DEGENERACY_TOL` count as negative-energy;
/// orbitals within `±DEGENERACY_TOL` of zero sit at the Fermi level.
pub const DEGENERACY_TOL: f64 = 1e-12;

const RESIDUAL_TOL: f64 = 1e-10;

/// Eigenbasis of a hopping matrix: unitary `U` (columns are orbitals) and
/// ascending energies.
#[derive(Debug, Clone)]
pub struct OrbitalBasis {
    u: Array2<C64>,
    energies: Array1<f64>,
}

impl OrbitalBasis {
    pub fn u(&self) -> &Array2<C64> {
        &self.u
    }

    pub fn energies(&self) -> &Array1<f64> {
        &self.energies
    }

    pub fn n_sites(&self) -> usize {
        self.u.nrows()
    }
}

/// Which orbitals fill the ground state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FillingRule {
    /// Occupy the `M` lowest orbitals.
    FixedCount(usize),
    /// Occupy every orbital with energy below `-`[`DEGENERACY_TOL`]; exact
    /// zero modes are excluded and flagged.
    NegativeEnergy,
}

/// The `N×M` block of occupied orbital columns.
#[derive(Debug, Clone)]
pub struct OccupiedOrbitals {
    u_occ: Array2<C64>,
    degeneracy_warning: Option<String>,
}

impl OccupiedOrbitals {
    /// Wrap an explicit orthonormal column block (columns must satisfy
    /// `U†U = 1` to 1e-10). Used when the orbitals come from somewhere other
    /// than [`diagonalize`], e.g. analytic plane waves.
    pub fn from_matrix(u_occ: Array2<C64>) -> Result<Self> {
        let m = u_occ.ncols();
        if m > u_occ.nrows() {
            return Err(Error::InvalidSize(format!(
                "more occupied orbitals ({m}) than sites ({})",
                u_occ.nrows()
            )));
        }
        let gram = la::dagger(&u_occ).dot(&u_occ);
        let dev = la::max_abs_diff(&gram, &la::eye(m));
        if dev > 1e-10 {
            return Err(Error::NumericalContract(format!(
                "occupied orbitals not orthonormal (deviation {dev:.3e})"
            )));
        }
        Ok(Self { u_occ, degeneracy_warning: None })
    }

    pub fn u_occ(&self) -> &Array2<C64> {
        &self.u_occ
    }

    /// Particle number.
    pub fn m(&self) -> usize {
        self.u_occ.ncols()
    }

    pub fn n_sites(&self) -> usize {
        self.u_occ.nrows()
    }

    /// Set when the filling rule hit a degeneracy at the Fermi level.
    pub fn degeneracy_warning(&self) -> Option<&str> {
        self.degeneracy_warning.as_deref()
    }
}

/// Full eigendecomposition of the hopping matrix.
///
/// Energies come out ascending (ties keep the solver's deterministic order);
/// both the residual `‖hU - U diag(ε)‖_max` and the unitarity defect are
/// checked against 1e-10.
pub fn diagonalize(h: &HoppingMatrix) -> Result<OrbitalBasis> {
    let (energies, u) = la::eigh_ascending(h.matrix())?;
    let n = h.n_sites();

    let mut hu = h.matrix().dot(&u);
    for (k, mut col) in hu.columns_mut().into_iter().enumerate() {
        let e = C64::new(energies[k], 0.0);
        col.zip_mut_with(&u.column(k), |a, b| *a -= e * b);
    }
    let residual = la::max_abs(&hu);
    if residual > RESIDUAL_TOL {
        return Err(Error::NumericalContract(format!(
            "eigendecomposition residual {residual:.3e} exceeds {RESIDUAL_TOL:.0e}"
        )));
    }
    let unitarity = la::max_abs_diff(&la::dagger(&u).dot(&u), &la::eye(n));
    if unitarity > RESIDUAL_TOL {
        return Err(Error::NumericalContract(format!(
            "eigenvector unitarity defect {unitarity:.3e} exceeds {RESIDUAL_TOL:.0e}"
        )));
    }
    Ok(OrbitalBasis { u, energies })
}

/// Select the occupied orbitals under `rule`.
///
/// Degeneracies at the Fermi level are resolved by ascending eigenindex and
/// reported through [`OccupiedOrbitals::degeneracy_warning`].
pub fn select_occupied(basis: &OrbitalBasis, rule: FillingRule) -> Result<OccupiedOrbitals> {
    let n = basis.n_sites();
    let e = basis.energies();
    let (m, warning) = match rule {
        FillingRule::FixedCount(m) => {
            if m > n {
                return Err(Error::InvalidParameter(format!(
                    "fixed-count filling M={m} exceeds N={n}"
                )));
            }
            let warning = if m > 0 && m < n && (e[m] - e[m - 1]).abs() <= DEGENERACY_TOL {
                Some(format!(
                    "degenerate Fermi level at energy {:.6e}; occupation resolved by eigenindex",
                    e[m - 1]
                ))
            } else {
                None
            };
            (m, warning)
        }
        FillingRule::NegativeEnergy => {
            let m = e.iter().filter(|&&x| x < -DEGENERACY_TOL).count();
            let zero_modes = e.iter().filter(|&&x| x.abs() <= DEGENERACY_TOL).count();
            let warning = (zero_modes > 0).then(|| {
                format!("{zero_modes} zero-energy mode(s) at the Fermi level excluded")
            });
            (m, warning)
        }
    };
    let u_occ = basis.u().slice(s![.., ..m]).to_owned();
    let mut occ = OccupiedOrbitals::from_matrix(u_occ)?;
    occ.degeneracy_warning = warning;
    Ok(occ)
}

/// Projector `K = U_occ U_occ†` onto the occupied orbitals. Restricting `K`
/// to a region shares its nonzero spectrum with the region's overlap matrix
/// (both are Gram matrices of the same orbital block).
pub fn correlation_kernel(occ: &OccupiedOrbitals) -> Array2<C64> {
    la::hermitize(&occ.u_occ().dot(&la::dagger(occ.u_occ())))
}
