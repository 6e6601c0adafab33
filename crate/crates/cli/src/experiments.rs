//! Experiment implementations. Every experiment is deterministic given its
//! config (sweep points run in parallel but are assembled in sweep order).

use rayon::prelude::*;

use ffent_core::asymptotic::{
    chain_prediction, correction_term, leading_term, leading_term_chord, leading_term_toeplitz,
    AsymptoticParams, WeightFunction,
};
use ffent_core::fock::{
    density_operator, ground_state_expansion, log_negativity_exact, partial_trace,
    reduced_spectrum, upt, TransposeFlavor,
};
use ffent_core::greens::{bpt_upper_bound, restrict_kernel, upt_negativity_gaussian};
use ffent_core::model::{
    build_chain, build_honeycomb, build_random_hopping, corner_region, HoppingMatrix,
    RandomModelSpec, RegionPartition,
};
use ffent_core::overlap::{
    bipartite_negativity, mode_spectrum, overlap_matrix, partial_trace_spectrum,
    simultaneity_check, tri_mode_spectrum, tripartite_negativity, upt_product_spectrum,
};
use ffent_core::spectral::{multiset_deviation, padded_sorted_deviation, sort_complex};
use ffent_core::spectrum::{
    correlation_kernel, diagonalize, select_occupied, OccupiedOrbitals,
};

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::report::{EntanglementReport, Measure, Method, ReportRow};
use crate::{CliError, Result};

/// Tolerance for declaring three overlap matrices simultaneously
/// diagonalizable in the tripartite audit.
pub const SIMULTANEITY_TOL: f64 = 1e-10;

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<EntanglementReport> {
    cfg.validate()?;
    let mut report = EntanglementReport::new(cfg.experiment.name(), cfg.echo());
    match cfg.experiment {
        ExperimentKind::ChainScan => chain_scan(cfg, &mut report)?,
        ExperimentKind::HoneycombScan => honeycomb_scan(cfg, &mut report)?,
        ExperimentKind::VerifyPartialTrace => verify_partial_trace(cfg, &mut report)?,
        ExperimentKind::VerifyUpt => verify_upt(cfg, &mut report)?,
        ExperimentKind::TripartiteAudit => tripartite_audit(cfg, &mut report)?,
        ExperimentKind::AsymptoticCompare => asymptotic_compare(cfg, &mut report)?,
    }
    Ok(report)
}

fn occupied_for(cfg: &ExperimentConfig, h: &HoppingMatrix) -> Result<OccupiedOrbitals> {
    let basis = diagonalize(h)?;
    Ok(select_occupied(&basis, cfg.filling.rule())?)
}

fn warnings_of(occ: &OccupiedOrbitals) -> Vec<String> {
    occ.degeneracy_warning()
        .map(|w| vec![format!("degeneracy: {w}")])
        .unwrap_or_default()
}

fn chain_negativity(occ: &OccupiedOrbitals, a_sites: &[usize]) -> Result<f64> {
    let part = RegionPartition::bipartition(occ.n_sites(), a_sites)?;
    let ma = overlap_matrix(occ, &part, "A")?;
    let (p, _) = mode_spectrum(&ma)?;
    Ok(bipartite_negativity(&p))
}

fn chain_scan(cfg: &ExperimentConfig, report: &mut EntanglementReport) -> Result<()> {
    let h = build_chain(cfg.l_total, cfg.t, cfg.mu, cfg.pbc)?;
    let occ = occupied_for(cfg, &h)?;
    let warnings = warnings_of(&occ);
    let weight = WeightFunction::Negativity;

    let points: Vec<usize> = (cfg.l_min..=cfg.l_max).step_by(cfg.l_step).collect();
    let m_occ = occ.m();
    let rows: Vec<Result<Vec<ReportRow>>> = points
        .par_iter()
        .map(|&l| -> Result<Vec<ReportRow>> {
            let e = chain_negativity(&occ, &(0..l).collect::<Vec<_>>())?;
            let params = AsymptoticParams::new(cfg.l_total, l)?;
            let pred = chain_prediction(&params, m_occ, &weight)?;
            let mu_t = cfg.mu / cfg.t;
            Ok(vec![
                ReportRow::new(Method::Overlap, Measure::E, "A", e)
                    .sizes(cfg.l_total as u64, l as u64)
                    .mu_over_t(mu_t)
                    .warn_all(&warnings),
                ReportRow::new(Method::Asymptotic, Measure::E, "finite-ring+correction", pred)
                    .sizes(cfg.l_total as u64, l as u64)
                    .mu_over_t(mu_t),
            ])
        })
        .collect();
    for r in rows {
        report.rows.extend(r?);
    }
    Ok(())
}

fn honeycomb_scan(cfg: &ExperimentConfig, report: &mut EntanglementReport) -> Result<()> {
    let mut points: Vec<(usize, f64)> = Vec::new();
    for &mu in &cfg.mu_values {
        for &l in &cfg.l_values {
            points.push((l, mu));
        }
    }
    let rows: Vec<Result<ReportRow>> = points
        .par_iter()
        .map(|&(l, mu)| -> Result<ReportRow> {
            let (h, _geom) = build_honeycomb(l, cfg.t, mu)?;
            let basis = diagonalize(&h)?;
            let occ = select_occupied(&basis, cfg.filling.rule())?;
            let part = corner_region(l, l / 3)?;
            let ma = overlap_matrix(&occ, &part, "A")?;
            let (p, _) = mode_spectrum(&ma)?;
            let e = bipartite_negativity(&p);
            Ok(ReportRow::new(Method::Overlap, Measure::E, "corner", e)
                .sizes(l as u64, (l / 3) as u64)
                .mu_over_t(mu / cfg.t)
                .warn_all(&warnings_of(&occ)))
        })
        .collect();
    for r in rows {
        report.rows.push(r?);
    }
    Ok(())
}

fn verify_partial_trace(cfg: &ExperimentConfig, report: &mut EntanglementReport) -> Result<()> {
    let n = cfg.n_sites;
    let h = build_chain(n, cfg.t, cfg.mu, true)?;
    let occ = occupied_for(cfg, &h)?;
    let warnings = warnings_of(&occ);
    let rho = density_operator(&ground_state_expansion(&occ)?);

    let mut geometries: Vec<(&str, Vec<usize>)> = Vec::new();
    if cfg.geometry == "adjacent" || cfg.geometry == "both" {
        geometries.push(("adjacent", (0..n / 2).collect()));
    }
    if cfg.geometry == "disjoint" || cfg.geometry == "both" {
        // A1, B1, A2, B2 in sequence: keep the first and third quarters.
        let q = n / 4;
        geometries.push((
            "disjoint",
            (0..q).chain(2 * q..3 * q).collect(),
        ));
    }
    for (name, a_sites) in geometries {
        let part = RegionPartition::bipartition(n, &a_sites)?;
        let rho_a = partial_trace(&rho, &part, "A")?;
        let fock_spec: Vec<f64> = reduced_spectrum(&rho_a)?.iter().map(|z| z.re).collect();
        let ma = overlap_matrix(&occ, &part, "A")?;
        let (p, _) = mode_spectrum(&ma)?;
        let overlap_spec = partial_trace_spectrum(&p)?;
        let dev = padded_sorted_deviation(&fock_spec, &overlap_spec);
        report.rows.push(
            ReportRow::new(Method::Fock, Measure::Dev, name, dev)
                .system(n as u64)
                .mu_over_t(cfg.mu / cfg.t)
                .warn_all(&warnings),
        );
    }
    Ok(())
}

fn verify_upt(cfg: &ExperimentConfig, report: &mut EntanglementReport) -> Result<()> {
    let n = cfg.n_sites;
    let rows: Vec<Result<ReportRow>> = cfg
        .seeds
        .par_iter()
        .map(|&seed| -> Result<ReportRow> {
            let spec = RandomModelSpec::new(n, seed, cfg.range)?;
            let h = build_random_hopping(&spec);
            let basis = diagonalize(&h)?;
            // Half filling keeps the mode-product and Fock spectra the same
            // size (4^(N/2) = 2^N), so the multisets compare directly.
            let occ = select_occupied(
                &basis,
                ffent_core::spectrum::FillingRule::FixedCount(n / 2),
            )?;
            let rho = density_operator(&ground_state_expansion(&occ)?);
            let part = RegionPartition::bipartition(n, &(0..n / 2).collect::<Vec<_>>())?;
            let transposed = upt(&rho, &part, "B")?;
            let fock_spec = reduced_spectrum(&transposed)?;

            let ma = overlap_matrix(&occ, &part, "A")?;
            let (p, _) = mode_spectrum(&ma)?;
            let mut products = upt_product_spectrum(&p)?;
            sort_complex(&mut products);
            let dev = multiset_deviation(&fock_spec, &products)?;
            Ok(ReportRow::new(Method::Fock, Measure::Dev, "even-bipartition", dev)
                .system(n as u64)
                .seed(seed))
        })
        .collect();
    for r in rows {
        report.rows.push(r?);
    }
    Ok(())
}

fn tripartite_audit(cfg: &ExperimentConfig, report: &mut EntanglementReport) -> Result<()> {
    let n = cfg.n_sites;
    let h = match cfg.model.as_str() {
        "chain" => build_chain(n, cfg.t, cfg.mu, true)?,
        "random" => {
            let seed = cfg.seeds.first().copied().unwrap_or(0);
            build_random_hopping(&RandomModelSpec::new(n, seed, cfg.range)?)
        }
        other => return Err(CliError::Config(format!("unknown model `{other}`"))),
    };
    let occ = occupied_for(cfg, &h)?;
    let mut warnings = warnings_of(&occ);
    let mu_t = cfg.mu / cfg.t;

    let a1 = cfg.a1.sites();
    let a2 = cfg.a2.sites();
    let part = RegionPartition::tripartition(n, &a1, &a2)?;

    // Overlap route: co-diagonal mode occupations and the closed form.
    let ma1 = overlap_matrix(&occ, &part, "A1")?;
    let ma2 = overlap_matrix(&occ, &part, "A2")?;
    let mb = overlap_matrix(&occ, &part, "B")?;
    let check = simultaneity_check(&ma1, &ma2, &mb, SIMULTANEITY_TOL)?;
    let sim_warning = if check.simultaneous {
        "simultaneity: ok".to_string()
    } else {
        format!(
            "simultaneity: failed comm_norms=[{:.3e} {:.3e} {:.3e}]",
            check.commutator_norms[0], check.commutator_norms[1], check.commutator_norms[2]
        )
    };
    warnings.push(sim_warning);
    let tri = tri_mode_spectrum(&ma1, &ma2, &mb)?;
    let e_tri = tripartite_negativity(&tri)?;
    report.rows.push(
        ReportRow::new(Method::Overlap, Measure::E, "A1A2|upt-closed-form", e_tri)
            .system(n as u64)
            .mu_over_t(mu_t)
            .warn_all(&warnings),
    );

    // Green's-function route.
    let kernel = correlation_kernel(&occ);
    let rk = restrict_kernel(&kernel, &part, "A1", "A2")?;
    let e_greens = upt_negativity_gaussian(&rk)?;
    let bound = bpt_upper_bound(&rk)?;
    report.rows.push(
        ReportRow::new(Method::Greens, Measure::E, "A1A2|upt", e_greens)
            .system(n as u64)
            .mu_over_t(mu_t)
            .warn_all(&warnings),
    );

    // Exact Fock oracle.
    let rho = density_operator(&ground_state_expansion(&occ)?);
    let merged = part.merge(&["A1", "A2"], "A")?;
    let rho_a = partial_trace(&rho, &merged, "A")?;
    let kept_sites: Vec<usize> = a1.iter().chain(a2.iter()).copied().collect();
    let kept = part.restrict(&kept_sites)?;
    let e_upt = log_negativity_exact(&rho_a, &kept, "A2", TransposeFlavor::Untwisted)?;
    let e_bpt = log_negativity_exact(&rho_a, &kept, "A2", TransposeFlavor::Bosonic)?;
    report.rows.push(
        ReportRow::new(Method::Fock, Measure::E, "A1A2|upt", e_upt)
            .system(n as u64)
            .mu_over_t(mu_t)
            .warn_all(&warnings),
    );
    report.rows.push(
        ReportRow::new(Method::Fock, Measure::E, "A1A2|bpt", e_bpt)
            .system(n as u64)
            .mu_over_t(mu_t)
            .warn_all(&warnings),
    );
    report.rows.push(
        ReportRow::new(Method::Greens, Measure::E, "A1A2|bpt-bound", bound)
            .system(n as u64)
            .mu_over_t(mu_t)
            .warn_all(&warnings),
    );
    Ok(())
}

fn asymptotic_compare(cfg: &ExperimentConfig, report: &mut EntanglementReport) -> Result<()> {
    let h = build_chain(cfg.l_total, cfg.t, cfg.mu, true)?;
    let occ = occupied_for(cfg, &h)?;
    let warnings = warnings_of(&occ);
    let mu_t = cfg.mu / cfg.t;

    let e = chain_negativity(&occ, &(0..cfg.l_sub).collect::<Vec<_>>())?;
    report.rows.push(
        ReportRow::new(Method::Overlap, Measure::E, "A", e)
            .sizes(cfg.l_total as u64, cfg.l_sub as u64)
            .mu_over_t(mu_t)
            .warn_all(&warnings),
    );

    let weight = WeightFunction::Negativity;
    let params = AsymptoticParams::new(cfg.l_total, cfg.l_sub)?;
    let correction = correction_term(&weight)?;
    let variants: [(&str, f64); 5] = [
        ("leading_lnL", leading_term(&params, &weight)?),
        (
            "leading_lnM",
            leading_term_toeplitz(&params, occ.m(), &weight)?,
        ),
        ("leading_chord", leading_term_chord(&params, &weight)?),
        (
            "chord+correction",
            leading_term_chord(&params, &weight)? + correction,
        ),
        (
            "finite-ring+correction",
            chain_prediction(&params, occ.m(), &weight)?,
        ),
    ];
    for (region, value) in variants {
        report.rows.push(
            ReportRow::new(Method::Asymptotic, Measure::E, region, value)
                .sizes(cfg.l_total as u64, cfg.l_sub as u64)
                .mu_over_t(mu_t),
        );
    }
    Ok(())
}
