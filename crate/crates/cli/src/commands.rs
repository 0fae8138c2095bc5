use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, TAU};
use std::path::PathBuf;

use anyhow::{Context, Result};
use hybridtp::circuit::{
    sample_shots, simulate_statevector, table3_experiment, table3_phis, table3_thetas, QubitCircuit, Table3Row,
};
use hybridtp::fock::{cat_normalization, PartialTrace};
use hybridtp::hybrid::{
    build_resource, build_resource_squeezed, overlap_x2, phase_coefficients, Encoding, ResourceSpec,
};
use hybridtp::measurement::{
    build_quasi_bell, quadrature_expectation_xxx, quadrature_exact, quadrature_law, BellOutcome,
};
use hybridtp::protocol::{
    fidelity_first_order_closed, fidelity_second_order_closed, fidelity_second_order_numeric,
    run_cqt_cv_first_order, run_cqt_dv, Correction,
};
use hybridtp::wigner::{cat_amplitude_from_squeezing, resource_projection_wigner, COutcome, GridSpec, StateClass};
use hybridtp::{Mode, MultiModeState64, Parity, DEFAULT_CUTOFF};
use num_complex::Complex64;
use serde::Serialize;

use crate::config::{config_error, Format, Relation, Settings};
use crate::output::{emit, fmt17, to_csv, to_json};

const DEFAULT_ALPHA_FIRST_ORDER: f64 = 0.05;
const DEFAULT_ALPHA: f64 = 1.0;
const DEFAULT_STEPS: usize = 17;
const DEFAULT_SHOTS: u64 = 8192;

fn write_out(s: &Settings, bytes: &[u8]) -> Result<()> {
    emit(s.output.as_deref(), bytes)
        .with_context(|| format!("cannot write {}", s.output.as_ref().map_or("stdout".into(), |p| p.display().to_string())))
}

fn c2(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn linspace(min: f64, max: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![min],
        _ => (0..n).map(|i| min + (max - min) * i as f64 / (n - 1) as f64).collect(),
    }
}

// ---------------------------------------------------------------- fidelity

#[derive(Debug, Serialize)]
struct SweepRow {
    phi: f64,
    #[serde(rename = "thetaB")]
    theta_b: f64,
    #[serde(rename = "thetaC")]
    theta_c: f64,
    #[serde(rename = "F_closed_first")]
    f_closed_first: f64,
    #[serde(rename = "F_numeric_first")]
    f_numeric_first: Option<f64>,
    #[serde(rename = "F_closed_second")]
    f_closed_second: f64,
}

#[derive(Debug, Serialize)]
struct SweepReport {
    alpha: f64,
    cutoff: usize,
    relation: Relation,
    theta_d: f64,
    f_closed_first_min: f64,
    f_closed_first_max: f64,
    rows: Vec<SweepRow>,
}

pub fn fidelity_sweep(s: &Settings) -> Result<()> {
    let steps = s.steps.unwrap_or(DEFAULT_STEPS);
    let axis = linspace(s.range_min.unwrap_or(0.0), s.range_max.unwrap_or(TAU), steps);
    if axis.is_empty() {
        return Err(config_error("empty sweep grid: steps must be at least 1"));
    }
    let alpha = s.alpha.unwrap_or(DEFAULT_ALPHA_FIRST_ORDER);
    let cutoff = s.cutoff.unwrap_or(DEFAULT_CUTOFF);
    let relation = s.relation.unwrap_or_default();
    let theta_d = s.theta_d.unwrap_or(0.0);
    let mut rows = Vec::new();
    for &phi in &axis {
        for &tb in &axis {
            let tcs = match relation {
                Relation::Equal => vec![tb],
                Relation::Quadrature => vec![tb - FRAC_PI_2],
                Relation::Grid => axis.clone(),
            };
            for tc in tcs {
                let numeric = if s.skip_numeric {
                    None
                } else {
                    Some(run_cqt_cv_first_order(phi, tb, tc, theta_d, alpha, cutoff)?.fidelity)
                };
                rows.push(SweepRow {
                    phi,
                    theta_b: tb,
                    theta_c: tc,
                    f_closed_first: fidelity_first_order_closed(phi, tb, tc),
                    f_numeric_first: numeric,
                    f_closed_second: fidelity_second_order_closed(phi, tb),
                });
            }
        }
    }
    let (lo, hi) = rows
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.f_closed_first), hi.max(r.f_closed_first)));
    let bytes = match s.format() {
        Format::Json => to_json(&SweepReport {
            alpha,
            cutoff,
            relation,
            theta_d,
            f_closed_first_min: lo,
            f_closed_first_max: hi,
            rows,
        })?,
        Format::Csv => {
            let cells: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        fmt17(r.phi),
                        fmt17(r.theta_b),
                        fmt17(r.theta_c),
                        fmt17(r.f_closed_first),
                        r.f_numeric_first.map(fmt17).unwrap_or_default(),
                        fmt17(r.f_closed_second),
                    ]
                })
                .collect();
            to_csv(&["phi", "thetaB", "thetaC", "F_closed_first", "F_numeric_first", "F_closed_second"], &cells)?
        }
    };
    write_out(s, &bytes)
}

// ------------------------------------------------------------------ wigner

#[derive(Debug, Serialize)]
struct ResourceDescription {
    kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    zeta: Option<f64>,
    cutoff: usize,
    theta_b: f64,
    theta_c: f64,
    theta_d: f64,
}

fn resource_from_settings(s: &Settings) -> Result<(MultiModeState64, ResourceDescription)> {
    let cutoff = s.cutoff.unwrap_or(DEFAULT_CUTOFF);
    let (tb, tc, td) = (s.theta_b.unwrap_or(0.0), s.theta_c.unwrap_or(0.0), s.theta_d.unwrap_or(0.0));
    if let Some(zeta) = s.zeta {
        if s.alpha.is_some() {
            return Err(config_error("alpha and zeta select different resources; give only one"));
        }
        if s.encoding == Some(Encoding::Qubit) {
            return Err(config_error("the squeezed resource is Fock-encoded"));
        }
        let r = build_resource_squeezed(zeta, cutoff, (tb, tc, td))?;
        let d = ResourceDescription { kind: "squeezed", alpha: None, zeta: Some(zeta), cutoff, theta_b: tb, theta_c: tc, theta_d: td };
        return Ok((r, d));
    }
    let alpha = s.alpha.unwrap_or(DEFAULT_ALPHA);
    let encoding = s.encoding.unwrap_or_default();
    let spec = ResourceSpec::new(alpha, encoding, cutoff).with_phases(tb, tc, td);
    let r = build_resource(&spec)?;
    let kind = match encoding {
        Encoding::Fock => "coherent",
        Encoding::Qubit => "qubit",
    };
    Ok((r, ResourceDescription { kind, alpha: Some(alpha), zeta: None, cutoff, theta_b: tb, theta_c: tc, theta_d: td }))
}

#[derive(Debug, Serialize)]
struct ClassificationReport {
    class: StateClass,
    fidelity: f64,
    coherent_amplitude: [f64; 2],
    coherent_fidelity: f64,
    even_amplitude: f64,
    even_fidelity: f64,
    odd_amplitude: f64,
    odd_fidelity: f64,
}

#[derive(Debug, Serialize)]
struct WignerMeta {
    c_outcome: COutcome,
    d_outcome: usize,
    probability: f64,
    resource: ResourceDescription,
    grid: GridSpec<f64>,
    integral: f64,
    min: f64,
    max: f64,
    classification: ClassificationReport,
}

#[derive(Debug, Serialize)]
struct WignerJson<'a> {
    meta: &'a WignerMeta,
    q: Vec<f64>,
    p: Vec<f64>,
    /// `w[i][j] = W(q_i, p_j)`
    w: Vec<Vec<f64>>,
}

/// `out.csv` → `out.meta.json`
pub fn sidecar_path(p: &std::path::Path) -> PathBuf {
    p.with_extension("meta.json")
}

pub fn wigner_grid(s: &Settings) -> Result<()> {
    let mut spec = GridSpec::<f64>::default();
    let g = &s.grid;
    spec.q_min = g.q_min.unwrap_or(spec.q_min);
    spec.q_max = g.q_max.unwrap_or(spec.q_max);
    spec.p_min = g.p_min.unwrap_or(spec.p_min);
    spec.p_max = g.p_max.unwrap_or(spec.p_max);
    spec.points = g.points.unwrap_or(spec.points);
    spec.validate()?;
    let format = s.format();
    if format == Format::Csv && s.output.is_none() {
        return Err(config_error("CSV output needs --output (metadata goes to a sidecar file)"));
    }
    let c: COutcome = s.c_outcome.as_deref().unwrap_or("0").parse()?;
    let d = s.d_outcome.unwrap_or(0);
    let (resource, description) = resource_from_settings(s)?;
    if description.kind == "qubit" {
        return Err(config_error("wigner-grid needs a Fock-encoded resource"));
    }
    let pw = resource_projection_wigner(&resource, c, d, spec)?;
    let cl = pw.classification;
    let meta = WignerMeta {
        c_outcome: c,
        d_outcome: d,
        probability: pw.probability,
        resource: description,
        grid: spec,
        integral: pw.grid.integral(),
        min: pw.grid.min(),
        max: pw.grid.max(),
        classification: ClassificationReport {
            class: cl.class,
            fidelity: cl.fidelity,
            coherent_amplitude: c2(cl.coherent_amplitude),
            coherent_fidelity: cl.coherent_fidelity,
            even_amplitude: cl.even_amplitude,
            even_fidelity: cl.even_fidelity,
            odd_amplitude: cl.odd_amplitude,
            odd_fidelity: cl.odd_fidelity,
        },
    };
    let qs: Vec<f64> = (0..spec.points).map(|i| spec.q(i)).collect();
    let ps: Vec<f64> = (0..spec.points).map(|j| spec.p(j)).collect();
    match format {
        Format::Json => {
            let w = pw.grid.values.outer_iter().map(|row| row.to_vec()).collect();
            write_out(s, &to_json(&WignerJson { meta: &meta, q: qs, p: ps, w })?)
        }
        Format::Csv => {
            let mut cells = Vec::with_capacity(spec.points * spec.points);
            for (i, q) in qs.iter().enumerate() {
                for (j, p) in ps.iter().enumerate() {
                    cells.push(vec![fmt17(*q), fmt17(*p), fmt17(pw.grid.values[[i, j]])]);
                }
            }
            let csv = to_csv(&["q", "p", "W"], &cells)?;
            let meta_bytes = to_json(&meta)?;
            let out = s.output.as_deref().expect("checked above");
            write_out(s, &csv)?;
            let side = sidecar_path(out);
            emit(Some(&side), &meta_bytes).with_context(|| format!("cannot write {}", side.display()))
        }
    }
}

// ---------------------------------------------------------------- protocol

#[derive(Debug, Serialize)]
struct BranchRow {
    bell: BellOutcome,
    count: u8,
    correction: Correction,
    probability: f64,
    fidelity: f64,
}

#[derive(Debug, Serialize)]
struct SecondOrderReport {
    fidelity_closed: f64,
    fidelity_numeric: f64,
}

#[derive(Debug, Serialize)]
struct CvReport {
    alpha: f64,
    cutoff: usize,
    phi: f64,
    theta_b: f64,
    theta_c: f64,
    theta_d: f64,
    click_probability: f64,
    fidelity_numeric: f64,
    fidelity_closed: f64,
    higher_order_deviation: f64,
    /// `[[re, im]; 4]` row-major
    rho_c: Vec<[f64; 2]>,
    second_order: SecondOrderReport,
}

#[derive(Debug, Serialize)]
struct ProtocolReport {
    x: [f64; 2],
    y: [f64; 2],
    probability_sum: f64,
    branches: Vec<BranchRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    first_order: Option<CvReport>,
}

pub fn protocol_run(s: &Settings) -> Result<()> {
    if s.encoding == Some(Encoding::Fock) {
        return Err(config_error("the eight-branch table is evaluated in qubit encoding"));
    }
    let explicit = s.x.is_some() || s.y.is_some();
    if explicit && s.phi.is_some() {
        return Err(config_error("give either x/y coefficients or phi, not both"));
    }
    let (x, y) = if explicit {
        (s.x.unwrap_or_default(), s.y.unwrap_or_default())
    } else {
        phase_coefficients(s.phi.unwrap_or(0.0))
    };
    let norm = x.norm_sqr() + y.norm_sqr();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(config_error(format!("target needs |x|^2 + |y|^2 = 1, got {norm}")));
    }
    let outcomes = run_cqt_dv(x, y)?;
    let branches: Vec<BranchRow> = outcomes
        .iter()
        .map(|o| BranchRow { bell: o.bell, count: o.count, correction: o.correction, probability: o.probability, fidelity: o.fidelity })
        .collect();
    let probability_sum = branches.iter().map(|b| b.probability).sum();
    let first_order = match s.alpha {
        Some(alpha) if !explicit => {
            let phi = s.phi.unwrap_or(0.0);
            let (tb, tc, td) = (s.theta_b.unwrap_or(0.0), s.theta_c.unwrap_or(0.0), s.theta_d.unwrap_or(0.0));
            let cutoff = s.cutoff.unwrap_or(DEFAULT_CUTOFF);
            let r = run_cqt_cv_first_order(phi, tb, tc, td, alpha, cutoff)?;
            Some(CvReport {
                alpha,
                cutoff,
                phi,
                theta_b: tb,
                theta_c: tc,
                theta_d: td,
                click_probability: r.click_probability,
                fidelity_numeric: r.fidelity,
                fidelity_closed: fidelity_first_order_closed(phi, tb, tc),
                higher_order_deviation: r.higher_order_deviation,
                rho_c: r.rho_c.matrix().iter().map(|z| c2(*z)).collect(),
                second_order: SecondOrderReport {
                    fidelity_closed: fidelity_second_order_closed(phi, tb),
                    fidelity_numeric: fidelity_second_order_numeric(phi, tb, tc, td, alpha)?,
                },
            })
        }
        Some(_) => return Err(config_error("the first-order pipeline needs a phase target (phi), not x/y")),
        None => None,
    };
    let bytes = match s.format() {
        Format::Json => to_json(&ProtocolReport { x: c2(x), y: c2(y), probability_sum, branches, first_order })?,
        Format::Csv => {
            let cells: Vec<Vec<String>> = branches
                .iter()
                .map(|b| vec![b.bell.to_string(), b.count.to_string(), b.correction.to_string(), fmt17(b.probability), fmt17(b.fidelity)])
                .collect();
            to_csv(&["bell", "count", "correction", "probability", "fidelity"], &cells)?
        }
    };
    write_out(s, &bytes)
}

// ----------------------------------------------------------------- circuit

#[derive(Debug, Serialize)]
struct Table3Report {
    shots: u64,
    seed: u64,
    rows: Vec<Table3Row>,
}

#[derive(Debug, Serialize)]
struct CustomCircuitReport {
    circuit: QubitCircuit,
    shots: u64,
    seed: u64,
    counts: BTreeMap<String, u64>,
    probabilities: BTreeMap<String, f64>,
}

pub fn circuit_run(s: &Settings) -> Result<()> {
    let shots = s.shots.unwrap_or(DEFAULT_SHOTS);
    let seed = s.seed.unwrap_or(0);
    if let Some(path) = &s.circuit {
        if s.phis.is_some() {
            return Err(config_error("phis applies to the built-in experiment, not a circuit file"));
        }
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error(format!("cannot read circuit {}: {e}", path.display())))?;
        let circuit: QubitCircuit = serde_json::from_str(&text)
            .map_err(|e| config_error(format!("invalid circuit {}: {e}", path.display())))?;
        let record = sample_shots(&circuit, shots, seed)?;
        let state = simulate_statevector::<f64>(&circuit)?;
        let width = circuit.qubits.len();
        let probabilities = state
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(i, a)| (format!("{i:0width$b}"), a.norm_sqr()))
            .collect::<BTreeMap<_, _>>();
        let bytes = match s.format() {
            Format::Json => to_json(&CustomCircuitReport { circuit, shots, seed, counts: record.counts, probabilities })?,
            Format::Csv => {
                let cells: Vec<Vec<String>> = probabilities
                    .iter()
                    .map(|(k, p)| vec![k.clone(), record.counts.get(k).copied().unwrap_or(0).to_string(), fmt17(*p)])
                    .collect();
                to_csv(&["bitstring", "count", "probability"], &cells)?
            }
        };
        return write_out(s, &bytes);
    }
    let phis = s.phis.clone().unwrap_or_else(table3_phis);
    if phis.is_empty() {
        return Err(config_error("empty phi list"));
    }
    let rows = table3_experiment(&phis, shots, seed)?;
    let bytes = match s.format() {
        Format::Json => to_json(&Table3Report { shots, seed, rows })?,
        Format::Csv => {
            let cells: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    let (tb, tc, td) = table3_thetas(r.phi);
                    let off = Complex64::new(r.rho_c[2][0], r.rho_c[2][1]);
                    vec![
                        fmt17(r.phi),
                        fmt17(tb),
                        fmt17(tc),
                        fmt17(td),
                        fmt17(r.exact[0]),
                        fmt17(r.exact[1]),
                        fmt17(r.sampled[0]),
                        fmt17(r.sampled[1]),
                        fmt17(off.norm()),
                        fmt17(r.coherence_phase),
                        r.shots.to_string(),
                        r.seed.to_string(),
                    ]
                })
                .collect();
            to_csv(
                &[
                    "phi", "thetaB", "thetaC", "thetaD", "exact_0", "exact_1", "sampled_0", "sampled_1",
                    "coherence_abs", "coherence_phase", "shots", "seed",
                ],
                &cells,
            )?
        }
    };
    write_out(s, &bytes)
}

// ---------------------------------------------------------------- resource

#[derive(Debug, Serialize)]
struct QuadratureReport {
    numeric: f64,
    law: Option<f64>,
    exact: Option<f64>,
}

#[derive(Debug, Serialize)]
struct ResourceReport {
    resource: ResourceDescription,
    norm: f64,
    dims: Vec<usize>,
    marginal_c: Vec<f64>,
    marginal_d: Vec<f64>,
    photon_distribution_b: Vec<f64>,
    mean_photons_b: f64,
    purity_b: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    coherent_overlap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cat_normalizations: Option<BTreeMap<&'static str, f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    quasi_bell_norms: Option<BTreeMap<String, f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cat_amplitudes: Option<[f64; 2]>,
    quadrature_xxx: QuadratureReport,
}

pub fn resource_info(s: &Settings) -> Result<()> {
    if s.format() == Format::Csv {
        return Err(config_error("resource-info writes JSON only"));
    }
    let (r, d) = resource_from_settings(s)?;
    let rho_b = r.partial_trace(&[Mode::B])?;
    let dist: Vec<f64> = rho_b.matrix().diag().iter().map(|z| z.re).collect();
    let mean = dist.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
    let (law, exact, overlap, cats, bell) = match d.alpha {
        Some(alpha) => {
            let set = build_quasi_bell(alpha, s.encoding.unwrap_or_default(), d.cutoff)?;
            let norms = BellOutcome::ALL.iter().map(|b| (b.to_string(), set.raw_norm_sqr(*b))).collect();
            let cats = BTreeMap::from([
                ("even", cat_normalization(alpha, Parity::Even)),
                ("odd", cat_normalization(alpha, Parity::Odd)),
            ]);
            let fock = d.kind == "coherent";
            (
                Some(quadrature_law(alpha, d.theta_b, d.theta_c, d.theta_d)),
                fock.then(|| quadrature_exact(alpha, d.theta_b, d.theta_c, d.theta_d)),
                Some(overlap_x2(alpha)),
                Some(cats),
                Some(norms),
            )
        }
        None => (None, None, None, None, None),
    };
    let cat_amplitudes = match d.zeta {
        Some(z) => {
            let (even, odd) = cat_amplitude_from_squeezing(z)?;
            Some([even, odd])
        }
        None => None,
    };
    let report = ResourceReport {
        norm: r.norm_sqr(),
        dims: r.dims().to_vec(),
        marginal_c: r.marginal(Mode::C)?,
        marginal_d: r.marginal(Mode::D)?,
        photon_distribution_b: dist,
        mean_photons_b: mean,
        purity_b: rho_b.purity(),
        coherent_overlap: overlap,
        cat_normalizations: cats,
        quasi_bell_norms: bell,
        cat_amplitudes,
        quadrature_xxx: QuadratureReport { numeric: quadrature_expectation_xxx(&r)?, law, exact },
        resource: d,
    };
    write_out(s, &to_json(&report)?)
}
