//! Overlap matrices, mode spectra, and closed-form entanglement measures.
//!
//! The overlap matrix of region `R` is the Gram matrix of the occupied
//! orbitals restricted to `R`:
//!
//! ```text
//! [M_R]_{αβ} = Σ_{i∈R} U*_{iα} U_{iβ}
//! ```
//!
//! For a bipartition, `M_A + M_B = 1` and both share one modal eigenbasis;
//! the eigenvalues `P_γ ∈ [0, 1]` are the probabilities of finding mode `γ`
//! in region `A`. Every pure-state bipartite entanglement measure reduces to
//! a sum of single-mode terms over `{P_γ}`; in particular the logarithmic
//! negativity under the untwisted fermionic partial transpose is
//!
//! ```text
//! E = Σ_γ ln[1 + 2√(P_γ(1-P_γ))]
//! ```
//!
//! A tripartite analogue built from co-diagonal eigenvalues of `M_A1`,
//! `M_A2`, `M_B` is provided as well; it is exact only when the three
//! matrices commute, which [`simultaneity_check`] probes. Mixed-state
//! consumers must treat the tripartite value as heuristic whenever the check
//! fails.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::model::RegionPartition;
use crate::spectrum::OccupiedOrbitals;
use crate::{la, C64};

/// Eigenvalues within this window outside `[0, 1]` are clamped as roundoff.
pub const CLAMP_TOL: f64 = 1e-10;
/// Eigenvalues beyond this window are a contract violation, not roundoff.
pub const RANGE_TOL: f64 = 1e-8;

/// Hermitian `M×M` overlap matrix of one region.
#[derive(Debug, Clone)]
pub struct OverlapMatrix {
    matrix: Array2<C64>,
    region: String,
}

impl OverlapMatrix {
    /// Wrap an explicitly built overlap matrix (must be Hermitian to 1e-12).
    pub fn from_matrix(matrix: Array2<C64>, region: &str) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::InvalidSize(format!(
                "overlap matrix must be square, got {:?}",
                matrix.dim()
            )));
        }
        let dev = la::hermiticity_violation(&matrix);
        if dev > 1e-12 {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Self { matrix, region: region.to_string() })
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn region(&self) -> &str {
        &self.region
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Overlap eigenvalues, ascending and clamped to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSpectrum {
    p: Vec<f64>,
}

impl ModeSpectrum {
    /// Validate and clamp raw eigenvalues (ascending order is restored).
    pub fn from_values(mut p: Vec<f64>) -> Result<Self> {
        for v in &mut p {
            *v = clamp_unit(*v)?;
        }
        p.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        Ok(Self { p })
    }

    pub fn values(&self) -> &[f64] {
        &self.p
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }
}

/// Co-indexed tripartite mode occupations: `PA1_γ + PA2_γ + PB_γ = 1`.
#[derive(Debug, Clone)]
pub struct TriModeSpectrum {
    pa1: Vec<f64>,
    pa2: Vec<f64>,
    pb: Vec<f64>,
}

impl TriModeSpectrum {
    pub fn new(pa1: Vec<f64>, pa2: Vec<f64>, pb: Vec<f64>) -> Result<Self> {
        if pa1.len() != pa2.len() || pa1.len() != pb.len() {
            return Err(Error::DimensionMismatch(format!(
                "tripartite spectra lengths differ: {}, {}, {}",
                pa1.len(),
                pa2.len(),
                pb.len()
            )));
        }
        let mut out = Self { pa1, pa2, pb };
        for v in out
            .pa1
            .iter_mut()
            .chain(out.pa2.iter_mut())
            .chain(out.pb.iter_mut())
        {
            *v = clamp_unit(*v)?;
        }
        for g in 0..out.pa1.len() {
            let s = out.pa1[g] + out.pa2[g] + out.pb[g];
            if (s - 1.0).abs() > 1e-10 {
                return Err(Error::NumericalContract(format!(
                    "tripartite occupations of mode {g} sum to {s}, not 1"
                )));
            }
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.pa1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pa1.is_empty()
    }

    pub fn pa1(&self) -> &[f64] {
        &self.pa1
    }

    pub fn pa2(&self) -> &[f64] {
        &self.pa2
    }

    pub fn pb(&self) -> &[f64] {
        &self.pb
    }
}

/// Occupations this close to 0 or 1 are snapped onto the endpoint. Entanglement
/// weights have infinite slope at the endpoints (f ~ 2√P), so the ±1e-16
/// roundoff of a structurally-zero eigenvalue would otherwise surface as a
/// √ε ≈ 1e-8 error in every measure built on the spectrum.
pub const SNAP_TOL: f64 = 1e-12;

fn clamp_unit(v: f64) -> Result<f64> {
    if !v.is_finite() || v < -RANGE_TOL || v > 1.0 + RANGE_TOL {
        return Err(Error::NumericalContract(format!(
            "mode occupation {v} outside [-{RANGE_TOL:.0e}, 1+{RANGE_TOL:.0e}]"
        )));
    }
    if v.abs() <= SNAP_TOL {
        return Ok(0.0);
    }
    if (1.0 - v).abs() <= SNAP_TOL {
        return Ok(1.0);
    }
    Ok(v.clamp(0.0, 1.0))
}

/// Gram matrix of the occupied orbitals restricted to `region`.
pub fn overlap_matrix(
    occ: &OccupiedOrbitals,
    part: &RegionPartition,
    region: &str,
) -> Result<OverlapMatrix> {
    if part.n_sites() != occ.n_sites() {
        return Err(Error::DimensionMismatch(format!(
            "partition covers {} sites, orbitals have {}",
            part.n_sites(),
            occ.n_sites()
        )));
    }
    let sites = part.sites_in(region)?;
    let m = occ.m();
    let u = occ.u_occ();
    let mut block = Array2::<C64>::zeros((sites.len(), m));
    for (r, &s) in sites.iter().enumerate() {
        block.row_mut(r).assign(&u.row(s));
    }
    let gram = la::hermitize(&la::dagger(&block).dot(&block));
    Ok(OverlapMatrix { matrix: gram, region: region.to_string() })
}

/// Eigenvalues (ascending, clamped) and the modal unitary `𝒰` of an overlap
/// matrix. For a bipartition the same `𝒰` diagonalizes the partner matrix
/// with eigenvalues `1 - P_γ`.
pub fn mode_spectrum(m: &OverlapMatrix) -> Result<(ModeSpectrum, Array2<C64>)> {
    let (w, u) = la::eigh_ascending(m.matrix())?;
    let p = ModeSpectrum::from_values(w.to_vec())?;
    Ok((p, u))
}

/// Co-indexed tripartite occupations from the three overlap matrices.
///
/// The matching eigenbasis is taken from `M_A1 + √2·M_A2` (the irrational
/// weight separates modes with distinct occupation pairs); in the commuting
/// case this reproduces the simultaneous eigenvalues exactly, including the
/// empty-B limit. When the matrices do not commute the result is the
/// diagonal part in that basis and the closed-form negativity built on it is
/// not exact — callers should attach [`simultaneity_check`].
pub fn tri_mode_spectrum(
    ma1: &OverlapMatrix,
    ma2: &OverlapMatrix,
    mb: &OverlapMatrix,
) -> Result<TriModeSpectrum> {
    let m = ma1.dim();
    if ma2.dim() != m || mb.dim() != m {
        return Err(Error::DimensionMismatch(format!(
            "overlap matrices differ in size: {}, {}, {}",
            m,
            ma2.dim(),
            mb.dim()
        )));
    }
    let mix = ma1.matrix() + &(ma2.matrix() * C64::new(std::f64::consts::SQRT_2, 0.0));
    let (_, basis) = la::eigh_ascending(&la::hermitize(&mix))?;
    let diag = |mat: &Array2<C64>| -> Vec<f64> {
        let rot = la::dagger(&basis).dot(mat).dot(&basis);
        (0..m).map(|k| rot[[k, k]].re).collect()
    };
    TriModeSpectrum::new(diag(ma1.matrix()), diag(ma2.matrix()), diag(mb.matrix()))
}

/// Logarithmic negativity of a pure-state bipartition:
/// `E = Σ_γ ln[1 + 2√(P_γ(1-P_γ))]`.
pub fn bipartite_negativity(p: &ModeSpectrum) -> f64 {
    p.values()
        .iter()
        .map(|&x| (1.0 + 2.0 * (x * (1.0 - x)).max(0.0).sqrt()).ln())
        .sum()
}

/// Von Neumann (`n = 1`) or Rényi (`n ≥ 2`) entanglement entropy of the mode
/// spectrum.
pub fn bipartite_entropy(p: &ModeSpectrum, order: u32) -> Result<f64> {
    match order {
        0 => Err(Error::InvalidParameter("entropy order must be >= 1".into())),
        1 => Ok(p
            .values()
            .iter()
            .map(|&x| {
                let mut s = 0.0;
                if x > 0.0 {
                    s -= x * x.ln();
                }
                if x < 1.0 {
                    s -= (1.0 - x) * (1.0 - x).ln();
                }
                s
            })
            .sum()),
        n => {
            let ni = n as i32;
            let sum: f64 = p
                .values()
                .iter()
                .map(|&x| (x.powi(ni) + (1.0 - x).powi(ni)).ln())
                .sum();
            Ok(sum / (1.0 - n as f64))
        }
    }
}

/// Closed-form tripartite logarithmic negativity from co-diagonal mode
/// occupations (transpose on `A2`, `B` traced out):
///
/// ```text
/// E = Σ_γ ln[ P_{A1} + P_{A2} + √(½(P_B² + 2P_{A1}P_{A2} + P_B·s))
///                              + √(½(P_B² + 2P_{A1}P_{A2} - P_B·s)) ],
/// s = √(P_B² + 4P_{A1}P_{A2})
/// ```
///
/// Exact for commuting overlap matrices (and reduces to
/// [`bipartite_negativity`] when all `P_B = 0`); otherwise heuristic.
pub fn tripartite_negativity(tri: &TriModeSpectrum) -> Result<f64> {
    let mut total = 0.0;
    for g in 0..tri.len() {
        let (p1, p2, pb) = (tri.pa1[g], tri.pa2[g], tri.pb[g]);
        let q = p1 * p2;
        let s = (pb * pb + 4.0 * q).max(0.0).sqrt();
        let r_plus = 0.5 * (pb * pb + 2.0 * q + pb * s);
        let mut r_minus = 0.5 * (pb * pb + 2.0 * q - pb * s);
        if r_minus < -1e-12 {
            return Err(Error::NumericalContract(format!(
                "negative radicand {r_minus:.3e} in tripartite mode {g}"
            )));
        }
        r_minus = r_minus.max(0.0);
        total += (p1 + p2 + r_plus.sqrt() + r_minus.sqrt()).ln();
    }
    Ok(total)
}

/// Commutator check for simultaneous diagonalizability of the three
/// tripartite overlap matrices.
#[derive(Debug, Clone, Copy)]
pub struct SimultaneityCheck {
    pub simultaneous: bool,
    /// Max-norms of `[M_A1, M_A2]`, `[M_A1, M_B]`, `[M_A2, M_B]`.
    pub commutator_norms: [f64; 3],
}

pub fn simultaneity_check(
    ma1: &OverlapMatrix,
    ma2: &OverlapMatrix,
    mb: &OverlapMatrix,
    tol: f64,
) -> Result<SimultaneityCheck> {
    let m = ma1.dim();
    if ma2.dim() != m || mb.dim() != m {
        return Err(Error::DimensionMismatch(
            "overlap matrices differ in size".into(),
        ));
    }
    let comm = |x: &Array2<C64>, y: &Array2<C64>| -> f64 {
        la::max_abs(&(x.dot(y) - y.dot(x)))
    };
    let norms = [
        comm(ma1.matrix(), ma2.matrix()),
        comm(ma1.matrix(), mb.matrix()),
        comm(ma2.matrix(), mb.matrix()),
    ];
    Ok(SimultaneityCheck {
        simultaneous: norms.iter().all(|&n| n <= tol),
        commutator_norms: norms,
    })
}

/// All `2^M` eigenvalues of `⊗_γ diag(1-P_γ, P_γ)` — the reduced-density-
/// matrix spectrum the mode spectrum predicts for region `A`.
pub fn partial_trace_spectrum(p: &ModeSpectrum) -> Result<Vec<f64>> {
    product_expand(p.len(), |g| [1.0 - p.values()[g], p.values()[g]])
}

/// All `4^M` eigenvalues of the per-mode uPT blocks
/// `{1-P_γ, P_γ, +i√(P_γ(1-P_γ)), -i√(P_γ(1-P_γ))}` tensored together — the
/// partially transposed spectrum the mode spectrum predicts.
pub fn upt_product_spectrum(p: &ModeSpectrum) -> Result<Vec<C64>> {
    if 2 * p.len() > 26 {
        return Err(Error::Capacity(format!(
            "uPT product spectrum of {} modes has 4^{} entries",
            p.len(),
            p.len()
        )));
    }
    let mut out = vec![C64::new(1.0, 0.0)];
    for &x in p.values() {
        let a = (x * (1.0 - x)).max(0.0).sqrt();
        let factors = [
            C64::new(1.0 - x, 0.0),
            C64::new(x, 0.0),
            C64::new(0.0, a),
            C64::new(0.0, -a),
        ];
        let mut next = Vec::with_capacity(out.len() * 4);
        for v in &out {
            for f in &factors {
                next.push(v * f);
            }
        }
        out = next;
    }
    Ok(out)
}

fn product_expand<F: Fn(usize) -> [f64; 2]>(m: usize, factors: F) -> Result<Vec<f64>> {
    if m > 26 {
        return Err(Error::Capacity(format!(
            "product spectrum of {m} modes has 2^{m} entries"
        )));
    }
    let mut out = vec![1.0f64];
    for g in 0..m {
        let [f0, f1] = factors(g);
        let mut next = Vec::with_capacity(out.len() * 2);
        for v in &out {
            next.push(v * f0);
            next.push(v * f1);
        }
        out = next;
    }
    Ok(out)
}
