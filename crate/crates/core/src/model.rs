//! Lattice models and region partitions.
//!
//! Builders for the single-particle hopping matrices of a periodic chain, a
//! periodic honeycomb lattice, and a seeded random Hermitian hopping model,
//! plus the [`RegionPartition`] bookkeeping that assigns every site to a
//! named region (A/B bipartitions, A1/A2/B tripartitions, corner regions).

use ndarray::Array2;
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::{la, C64};

/// Elementwise tolerance for the Hermiticity invariant of a hopping matrix.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// N×N complex Hermitian single-particle Hamiltonian, in units of the
/// hopping amplitude.
#[derive(Debug, Clone)]
pub struct HoppingMatrix {
    n_sites: usize,
    matrix: Array2<C64>,
}

impl HoppingMatrix {
    /// Validates Hermiticity (elementwise, to [`HERMITICITY_TOL`]) and
    /// finiteness of every entry.
    pub fn new(matrix: Array2<C64>) -> Result<Self> {
        let (r, c) = matrix.dim();
        if r != c || r == 0 {
            return Err(Error::InvalidSize(format!(
                "hopping matrix must be square and nonempty, got {r}x{c}"
            )));
        }
        for ((i, j), z) in matrix.indexed_iter() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite(i, j));
            }
        }
        let dev = la::hermiticity_violation(&matrix);
        if dev > HERMITICITY_TOL {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Self { n_sites: r, matrix })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }
}

/// Assignment of every site to exactly one named region.
///
/// Sites are positional indices `0..n_sites`; regions are declared by name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionPartition {
    regions: Vec<String>,
    assignment: Vec<usize>,
}

impl RegionPartition {
    pub fn new(regions: Vec<String>, assignment: Vec<usize>) -> Result<Self> {
        if regions.is_empty() {
            return Err(Error::Geometry("no regions declared".into()));
        }
        for (i, r) in regions.iter().enumerate() {
            if regions[..i].contains(r) {
                return Err(Error::Geometry(format!("duplicate region name `{r}`")));
            }
        }
        if let Some(&bad) = assignment.iter().find(|&&k| k >= regions.len()) {
            return Err(Error::Geometry(format!(
                "site assigned to undeclared region index {bad}"
            )));
        }
        Ok(Self { regions, assignment })
    }

    /// Two regions `A` (the listed sites) and `B` (the rest).
    pub fn bipartition(n_sites: usize, a_sites: &[usize]) -> Result<Self> {
        Self::from_site_lists(n_sites, &[("A", a_sites)], "B")
    }

    /// Three regions `A1`, `A2` (listed sites, disjoint) and `B` (the rest).
    pub fn tripartition(n_sites: usize, a1: &[usize], a2: &[usize]) -> Result<Self> {
        Self::from_site_lists(n_sites, &[("A1", a1), ("A2", a2)], "B")
    }

    /// Named site lists plus a catch-all region for the remainder.
    pub fn from_site_lists(
        n_sites: usize,
        named: &[(&str, &[usize])],
        rest: &str,
    ) -> Result<Self> {
        let mut regions: Vec<String> = named.iter().map(|(n, _)| n.to_string()).collect();
        regions.push(rest.to_string());
        let rest_idx = regions.len() - 1;
        let mut assignment = vec![rest_idx; n_sites];
        let mut seen = vec![false; n_sites];
        for (k, (name, sites)) in named.iter().enumerate() {
            for &s in sites.iter() {
                if s >= n_sites {
                    return Err(Error::Geometry(format!(
                        "site {s} out of range for {n_sites} sites"
                    )));
                }
                if seen[s] {
                    return Err(Error::Geometry(format!(
                        "site {s} assigned to more than one region (second: `{name}`)"
                    )));
                }
                seen[s] = true;
                assignment[s] = k;
            }
        }
        Self::new(regions, assignment)
    }

    pub fn n_sites(&self) -> usize {
        self.assignment.len()
    }

    pub fn region_names(&self) -> &[String] {
        &self.regions
    }

    pub fn contains_region(&self, tag: &str) -> bool {
        self.regions.iter().any(|r| r == tag)
    }

    /// Sites carrying `tag`, in ascending site order.
    pub fn sites_in(&self, tag: &str) -> Result<Vec<usize>> {
        let idx = self
            .regions
            .iter()
            .position(|r| r == tag)
            .ok_or_else(|| Error::UnknownRegion(tag.to_string()))?;
        Ok(self
            .assignment
            .iter()
            .enumerate()
            .filter(|(_, &a)| a == idx)
            .map(|(s, _)| s)
            .collect())
    }

    /// Errors unless every listed region holds at least one site.
    pub fn require_nonempty(&self, tags: &[&str]) -> Result<()> {
        for tag in tags {
            if self.sites_in(tag)?.is_empty() {
                return Err(Error::Geometry(format!("region `{tag}` is empty")));
            }
        }
        Ok(())
    }

    /// Merge several regions into one, keeping all other labels.
    pub fn merge(&self, tags: &[&str], merged: &str) -> Result<Self> {
        let mut old_to_new = Vec::with_capacity(self.regions.len());
        let mut regions = Vec::new();
        let mut merged_idx = None;
        for (i, r) in self.regions.iter().enumerate() {
            if tags.contains(&r.as_str()) {
                let idx = *merged_idx.get_or_insert_with(|| {
                    regions.push(merged.to_string());
                    regions.len() - 1
                });
                old_to_new.push(idx);
            } else {
                regions.push(r.clone());
                old_to_new.push(regions.len() - 1);
            }
            let _ = i;
        }
        for tag in tags {
            if !self.contains_region(tag) {
                return Err(Error::UnknownRegion(tag.to_string()));
            }
        }
        let assignment = self.assignment.iter().map(|&a| old_to_new[a]).collect();
        Self::new(regions, assignment)
    }

    /// Partition induced on a subset of sites (positional re-indexing).
    pub fn restrict(&self, sites: &[usize]) -> Result<Self> {
        let mut assignment = Vec::with_capacity(sites.len());
        for &s in sites {
            if s >= self.n_sites() {
                return Err(Error::Geometry(format!("site {s} out of range")));
            }
            assignment.push(self.assignment[s]);
        }
        Self::new(self.regions.clone(), assignment)
    }
}

/// Seeded random Hermitian hopping model: `h = (T + T†)/2` with the entries
/// of `T = T1 + iT2` drawn i.i.d. uniform on `[-range, range]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomModelSpec {
    pub n_sites: usize,
    pub seed: u64,
    pub range: f64,
}

impl RandomModelSpec {
    pub fn new(n_sites: usize, seed: u64, range: f64) -> Result<Self> {
        if n_sites == 0 {
            return Err(Error::InvalidSize("n_sites must be positive".into()));
        }
        if !(range > 0.0) || !range.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "range must be positive and finite, got {range}"
            )));
        }
        Ok(Self { n_sites, seed, range })
    }
}

/// Periodic or open chain: `h_ii = -mu`, `h_{i,i±1} = -t`, wraparound bond
/// iff `pbc`. For `l = 2` with periodic boundaries the two bonds between the
/// sites add up.
pub fn build_chain(l: usize, t: f64, mu: f64, pbc: bool) -> Result<HoppingMatrix> {
    if l < 2 {
        return Err(Error::InvalidSize(format!("chain needs l >= 2, got {l}")));
    }
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("hopping t must be > 0, got {t}")));
    }
    let mut h = Array2::<C64>::zeros((l, l));
    for i in 0..l {
        h[[i, i]] = C64::new(-mu, 0.0);
    }
    let hop = C64::new(-t, 0.0);
    for i in 0..l - 1 {
        h[[i, i + 1]] += hop;
        h[[i + 1, i]] += hop;
    }
    if pbc {
        h[[l - 1, 0]] += hop;
        h[[0, l - 1]] += hop;
    }
    HoppingMatrix::new(h)
}

/// Cell/sublattice bookkeeping for the periodic honeycomb lattice.
///
/// Cells form an `l × l` rhombus spanned by lattice vectors `a1 = (1, 0)` and
/// `a2 = (1/2, √3/2)`; each cell holds sublattice sites 0 and 1 with site 1
/// displaced along a bond. Coordinates are output metadata only — the
/// Hamiltonian is fixed by the bond topology.
#[derive(Debug, Clone, Copy)]
pub struct HoneycombGeometry {
    cells: usize,
}

impl HoneycombGeometry {
    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn n_sites(&self) -> usize {
        2 * self.cells * self.cells
    }

    /// Global site index of `(cell_x, cell_y, sublattice)`.
    pub fn site_index(&self, x: usize, y: usize, s: usize) -> usize {
        debug_assert!(x < self.cells && y < self.cells && s < 2);
        2 * (x * self.cells + y) + s
    }

    /// Inverse of [`Self::site_index`].
    pub fn site_cell(&self, i: usize) -> (usize, usize, usize) {
        let s = i % 2;
        let cell = i / 2;
        (cell / self.cells, cell % self.cells, s)
    }

    /// Real-space position in units of the lattice constant.
    pub fn position(&self, i: usize) -> (f64, f64) {
        let (x, y, s) = self.site_cell(i);
        let sqrt3 = 3.0f64.sqrt();
        let (mut px, mut py) = (x as f64 + 0.5 * y as f64, sqrt3 / 2.0 * y as f64);
        if s == 1 {
            px += 0.5;
            py += sqrt3 / 6.0;
        }
        (px, py)
    }
}

/// Periodic honeycomb lattice with `l × l` two-site unit cells: every site
/// has exactly three `-t` bonds and on-site energy `-mu`.
///
/// Requires `l ≥ 3` and `l` divisible by 3 so that the corner region of
/// [`corner_region`] is well defined.
pub fn build_honeycomb(l: usize, t: f64, mu: f64) -> Result<(HoppingMatrix, HoneycombGeometry)> {
    if l < 3 || l % 3 != 0 {
        return Err(Error::Geometry(format!(
            "honeycomb needs l >= 3 divisible by 3 (corner region of l/3 cells), got {l}"
        )));
    }
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("hopping t must be > 0, got {t}")));
    }
    let geom = HoneycombGeometry { cells: l };
    let n = geom.n_sites();
    let mut h = Array2::<C64>::zeros((n, n));
    for i in 0..n {
        h[[i, i]] = C64::new(-mu, 0.0);
    }
    let hop = C64::new(-t, 0.0);
    for x in 0..l {
        for y in 0..l {
            let a = geom.site_index(x, y, 0);
            // The three sublattice-1 neighbors of sublattice-0 site (x, y).
            let neighbors = [
                geom.site_index(x, y, 1),
                geom.site_index((x + l - 1) % l, y, 1),
                geom.site_index(x, (y + l - 1) % l, 1),
            ];
            for b in neighbors {
                h[[a, b]] += hop;
                h[[b, a]] += hop;
            }
        }
    }
    Ok((HoppingMatrix::new(h)?, geom))
}

/// Rhombic corner region of the `l × l` honeycomb: all sites (both
/// sublattices) of the cells `{(x, y): x < corner, y < corner}` are labeled
/// `A`, the remainder `B`. Requires `corner = l/3`, giving `|A| = 2·corner²`.
pub fn corner_region(l: usize, corner: usize) -> Result<RegionPartition> {
    if l % 3 != 0 || corner != l / 3 {
        return Err(Error::Geometry(format!(
            "corner region needs corner = l/3, got l={l}, corner={corner}"
        )));
    }
    let geom = HoneycombGeometry { cells: l };
    let a_sites: Vec<usize> = (0..geom.n_sites())
        .filter(|&i| {
            let (x, y, _) = geom.site_cell(i);
            x < corner && y < corner
        })
        .collect();
    RegionPartition::bipartition(geom.n_sites(), &a_sites)
}

/// Random Hermitian hopping matrix per [`RandomModelSpec`].
///
/// Exactly Hermitian by construction (each conjugate pair is built from one
/// rounded value) and byte-identical for identical specs.
pub fn build_random_hopping(spec: &RandomModelSpec) -> HoppingMatrix {
    let n = spec.n_sites;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let dist = Uniform::new_inclusive(-spec.range, spec.range);
    // Draw T = T1 + iT2 in row-major order, both parts per entry.
    let mut t = Array2::<C64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let re = dist.sample(&mut rng);
            let im = dist.sample(&mut rng);
            t[[i, j]] = C64::new(re, im);
        }
    }
    let mut h = Array2::<C64>::zeros((n, n));
    for i in 0..n {
        h[[i, i]] = C64::new(t[[i, i]].re, 0.0);
        for j in (i + 1)..n {
            let v = 0.5 * (t[[i, j]] + t[[j, i]].conj());
            h[[i, j]] = v;
            h[[j, i]] = v.conj();
        }
    }
    HoppingMatrix::new(h).expect("symmetrized matrix is Hermitian by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray_linalg::Eig;

    #[test]
    fn chain_l4_pbc_layout() {
        let h = build_chain(4, 1.0, 1.0, true).unwrap();
        let m = h.matrix();
        for i in 0..4 {
            assert_eq!(m[[i, i]], C64::new(-1.0, 0.0));
        }
        for i in 0..3 {
            assert_eq!(m[[i, i + 1]], C64::new(-1.0, 0.0));
            assert_eq!(m[[i + 1, i]], C64::new(-1.0, 0.0));
        }
        assert_eq!(m[[0, 3]], C64::new(-1.0, 0.0));
        assert_eq!(m[[3, 0]], C64::new(-1.0, 0.0));
        assert_eq!(m[[0, 2]], C64::new(0.0, 0.0));
    }

    #[test]
    fn chain_l2_open_spectrum() {
        let h = build_chain(2, 1.0, 0.0, false).unwrap();
        let mut w = crate::la::eigh_ascending(h.matrix()).unwrap().0.to_vec();
        w.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((w[0] + 1.0).abs() < 1e-12);
        assert!((w[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chain_dispersion_l12() {
        // Periodic chain spectrum must match -mu - 2t cos(2πk/L) as a multiset.
        let (l, t, mu) = (12usize, 1.0, 1.0);
        let h = build_chain(l, t, mu, true).unwrap();
        let w = crate::la::eigh_ascending(h.matrix()).unwrap().0;
        let mut expect: Vec<f64> = (0..l)
            .map(|k| -mu - 2.0 * t * (2.0 * std::f64::consts::PI * k as f64 / l as f64).cos())
            .collect();
        expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in w.iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn chain_rejects_short() {
        assert!(matches!(build_chain(1, 1.0, 0.0, false), Err(Error::InvalidSize(_))));
    }

    #[test]
    fn honeycomb_coordination_three() {
        let (h, _) = build_honeycomb(3, 1.0, 0.0).unwrap();
        for i in 0..h.n_sites() {
            let row = h.matrix().row(i);
            let bonds = row
                .iter()
                .enumerate()
                .filter(|(j, z)| *j != i && z.norm() > 0.0)
                .count();
            assert_eq!(bonds, 3, "site {i}");
            for (j, z) in row.iter().enumerate() {
                if j != i && z.norm() > 0.0 {
                    assert_eq!(*z, C64::new(-1.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn honeycomb_particle_hole_symmetric_at_mu0() {
        let (h, _) = build_honeycomb(3, 1.0, 0.0).unwrap();
        let w = crate::la::eigh_ascending(h.matrix()).unwrap().0;
        let n = w.len();
        for k in 0..n / 2 {
            assert!((w[k] + w[n - 1 - k]).abs() < 1e-10);
        }
    }

    #[test]
    fn honeycomb_l6_trace() {
        let (h, geom) = build_honeycomb(6, 1.0, 1.0).unwrap();
        assert_eq!(geom.n_sites(), 72);
        let tr: C64 = (0..72).map(|i| h.matrix()[[i, i]]).sum();
        assert!((tr.re + 72.0).abs() < 1e-12);
        assert_eq!(tr.im, 0.0);
    }

    #[test]
    fn honeycomb_rejects_bad_l() {
        assert!(build_honeycomb(4, 1.0, 0.0).is_err());
        assert!(build_honeycomb(2, 1.0, 0.0).is_err());
    }

    #[test]
    fn corner_region_counts() {
        let p = corner_region(3, 1).unwrap();
        assert_eq!(p.sites_in("A").unwrap().len(), 2);

        let p = corner_region(6, 2).unwrap();
        assert_eq!(p.sites_in("A").unwrap().len(), 8);
        assert_eq!(p.sites_in("B").unwrap().len(), 64);

        let p = corner_region(9, 3).unwrap();
        let a = p.sites_in("A").unwrap();
        let b = p.sites_in("B").unwrap();
        assert_eq!(a.len() + b.len(), 162);
        let mut all: Vec<usize> = a.into_iter().chain(b).collect();
        all.sort_unstable();
        assert_eq!(all, (0..162).collect::<Vec<_>>());

        assert!(corner_region(6, 3).is_err());
    }

    #[test]
    fn random_hopping_exactly_hermitian_and_deterministic() {
        let spec = RandomModelSpec::new(12, 7, 1.0).unwrap();
        let h1 = build_random_hopping(&spec);
        let h2 = build_random_hopping(&spec);
        assert_eq!(h1.matrix(), h2.matrix());
        for i in 0..12 {
            for j in 0..12 {
                assert_eq!(h1.matrix()[[i, j]], h1.matrix()[[j, i]].conj());
            }
        }
        let other = build_random_hopping(&RandomModelSpec::new(12, 8, 1.0).unwrap());
        assert_ne!(h1.matrix(), other.matrix());
    }

    #[test]
    fn random_hopping_real_spectrum_under_general_solver() {
        let spec = RandomModelSpec::new(12, 7, 1.0).unwrap();
        let h = build_random_hopping(&spec);
        let (ev, _) = h.matrix().eig().unwrap();
        for z in ev.iter() {
            assert!(z.im.abs() < 1e-12);
        }
    }

    #[test]
    fn partition_bookkeeping() {
        let p = RegionPartition::tripartition(6, &[0, 1], &[3]).unwrap();
        assert_eq!(p.sites_in("A1").unwrap(), vec![0, 1]);
        assert_eq!(p.sites_in("A2").unwrap(), vec![3]);
        assert_eq!(p.sites_in("B").unwrap(), vec![2, 4, 5]);
        assert!(p.sites_in("C").is_err());
        assert!(RegionPartition::tripartition(6, &[0, 1], &[1]).is_err());

        let merged = p.merge(&["A1", "A2"], "A").unwrap();
        assert_eq!(merged.sites_in("A").unwrap(), vec![0, 1, 3]);
        assert_eq!(merged.sites_in("B").unwrap(), vec![2, 4, 5]);

        let restricted = p.restrict(&[0, 1, 3]).unwrap();
        assert_eq!(restricted.sites_in("A1").unwrap(), vec![0, 1]);
        assert_eq!(restricted.sites_in("A2").unwrap(), vec![2]);
        assert!(restricted.sites_in("B").unwrap().is_empty());
    }

    #[test]
    fn partition_covers_all_sites_once() {
        let p = RegionPartition::bipartition(8, &[1, 3, 5]).unwrap();
        let total: usize = p
            .region_names()
            .to_vec()
            .iter()
            .map(|r| p.sites_in(r).unwrap().len())
            .sum();
        assert_eq!(total, 8);
    }
}
