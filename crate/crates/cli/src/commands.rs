//! Subcommand implementations. Every command returns the process exit
//! code: 0 success, 1 validation/check failure, 2 usage error, 3 search
//! convergence failure.

use std::path::{Path, PathBuf};

use serde_json::Value;

use sicore_core::io::{self, PVectorFile, SicFile};
use sicore_core::rep::{check_validity, probs_to_state, repair_p_vector, state_to_probs, ProbVector};
use sicore_core::sic::{
    find_sic_fiducial, orbit, triple_products, verify_sic as verify_projectors, SicError,
    SicSearchConfig, SicStructure,
};
use sicore_core::urgleichung::{conditional_matrix, generalized_predict, ltp_predict};
use sicore_core::{born_probabilities, Povm, ToleranceSet};

use crate::output::{envelope, float, floats, print_json};
use crate::Emit;

/// Deviation bound under which a stored SIC is accepted for conversions
/// and checks.
const SIC_ACCEPT_TOL: f64 = 1e-8;
/// Allowed drift of a stored fiducial's norm from 1.
const NORM_TOL: f64 = 1e-9;

pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<io::FileError> for Failure {
    fn from(e: io::FileError) -> Self {
        Failure::invalid(e.to_string())
    }
}

fn resolve_ref(base: &Path, reference: &str) -> PathBuf {
    base.parent()
        .map(|dir| dir.join(reference))
        .unwrap_or_else(|| PathBuf::from(reference))
}

fn load_sic_structure(path: &Path) -> Result<SicStructure, Failure> {
    let file = io::load_sic_file(path)?;
    let fiducial = file.fiducial(&path.display().to_string())?;
    let sic = SicStructure::from_fiducial(fiducial, SIC_ACCEPT_TOL);
    if !sic.is_verified() {
        return Err(Failure::invalid(format!(
            "{}: orbit deviation {:.3e} exceeds {SIC_ACCEPT_TOL:.1e}; not a usable SIC",
            path.display(),
            sic.max_deviation()
        )));
    }
    Ok(sic)
}

pub fn find_sic(
    d: usize,
    seed: u64,
    restarts: usize,
    tol: f64,
    out: &Path,
    emit: Emit,
) -> Result<u8, Failure> {
    let mut config = SicSearchConfig::new(d);
    config.seed = seed;
    config.max_restarts = restarts;
    config.target_deviation = tol;

    match find_sic_fiducial(&config) {
        Ok((fiducial, diag)) => {
            let sic = SicStructure::from_fiducial(fiducial, tol);
            io::save_sic_file(out, &SicFile::new(sic.fiducial(), sic.max_deviation()))?;
            match emit {
                Emit::Json => {
                    let mut map = envelope("find-sic");
                    map.insert("d".into(), d.into());
                    map.insert("seed".into(), seed.into());
                    map.insert("converged".into(), true.into());
                    map.insert("max_deviation".into(), float(sic.max_deviation()));
                    map.insert(
                        "frame_potential".into(),
                        float(diag.final_frame_potential),
                    );
                    map.insert("restarts_used".into(), diag.restarts_used.into());
                    map.insert("best_restart".into(), diag.best_restart.into());
                    map.insert(
                        "iterations".into(),
                        diag.iterations[diag.best_restart].into(),
                    );
                    map.insert("out".into(), out.display().to_string().into());
                    print_json(map);
                }
                Emit::Text => {
                    println!(
                        "found SIC in d={d}: deviation {:.3e} (target {tol:.1e}), \
                         frame potential {:.15}, restart {} of {} after {} iterations",
                        sic.max_deviation(),
                        diag.final_frame_potential,
                        diag.best_restart,
                        diag.restarts_used,
                        diag.iterations[diag.best_restart]
                    );
                    println!("wrote {}", out.display());
                }
            }
            Ok(0)
        }
        Err(SicError::ConvergenceFailure {
            best_deviation,
            diagnostics,
            ..
        }) => {
            match emit {
                Emit::Json => {
                    let mut map = envelope("find-sic");
                    map.insert("d".into(), d.into());
                    map.insert("seed".into(), seed.into());
                    map.insert("converged".into(), false.into());
                    map.insert("best_deviation".into(), float(best_deviation));
                    map.insert("restarts_used".into(), diagnostics.restarts_used.into());
                    print_json(map);
                }
                Emit::Text => {
                    println!(
                        "no SIC found in d={d} within {} restarts: best deviation {:.3e} \
                         (target {tol:.1e})",
                        diagnostics.restarts_used, best_deviation
                    );
                }
            }
            Ok(3)
        }
        Err(e) => Err(Failure::usage(e.to_string())),
    }
}

pub fn verify_sic(input: &Path, tol: f64, emit: Emit) -> Result<u8, Failure> {
    let file = io::load_sic_file(input)?;
    let (fiducial, norm_deviation) = file.fiducial_renormalized(&input.display().to_string())?;
    let projectors = orbit(&fiducial);
    let report = verify_projectors(&projectors, tol).map_err(|e| Failure::invalid(e.to_string()))?;
    let passed = report.passed && norm_deviation <= NORM_TOL;

    match emit {
        Emit::Json => {
            let mut map = envelope("verify-sic");
            map.insert("d".into(), report.dim.into());
            map.insert("file".into(), input.display().to_string().into());
            map.insert("declared_max_deviation".into(), float(file.max_deviation));
            map.insert(
                "max_pairwise_deviation".into(),
                float(report.max_pairwise_deviation),
            );
            map.insert(
                "mean_pairwise_deviation".into(),
                float(report.mean_pairwise_deviation),
            );
            map.insert("sum_deviation".into(), float(report.sum_deviation));
            map.insert("fiducial_norm_deviation".into(), float(norm_deviation));
            map.insert("tol".into(), float(tol));
            map.insert("passed".into(), passed.into());
            print_json(map);
        }
        Emit::Text => {
            println!("{report}");
            if norm_deviation > NORM_TOL {
                println!(
                    "fiducial norm off by {norm_deviation:.3e} (renormalized before checking)"
                );
            }
            println!("{}", if passed { "pass" } else { "FAIL" });
        }
    }
    Ok(if passed { 0 } else { 1 })
}

pub fn rho_to_p(sic_path: &Path, rho_path: &Path, out: &Path, emit: Emit) -> Result<u8, Failure> {
    let sic = load_sic_structure(sic_path)?;
    let rho = io::load_density(rho_path, &ToleranceSet::default())?;
    let p = state_to_probs(&rho, &sic).map_err(|e| Failure::invalid(e.to_string()))?;
    io::save_p_vector_file(
        out,
        &PVectorFile {
            d: sic.dim(),
            sic_ref: sic_path.display().to_string(),
            p: p.entries().to_vec(),
        },
    )?;
    match emit {
        Emit::Json => {
            let mut map = envelope("rho2p");
            map.insert("d".into(), sic.dim().into());
            map.insert("p".into(), floats(p.entries()));
            map.insert("max_entry".into(), float(p.max_entry()));
            map.insert("bound".into(), float(1.0 / sic.dim() as f64));
            map.insert("out".into(), out.display().to_string().into());
            print_json(map);
        }
        Emit::Text => {
            println!(
                "P(H_i) written to {}: max entry {:.6} (bound 1/d = {:.6})",
                out.display(),
                p.max_entry(),
                1.0 / sic.dim() as f64
            );
        }
    }
    Ok(0)
}

fn resolve_sic_for_p(
    sic_flag: Option<&Path>,
    p_path: &Path,
    p_file: &PVectorFile,
) -> Result<SicStructure, Failure> {
    match sic_flag {
        Some(path) => load_sic_structure(path),
        None => load_sic_structure(&resolve_ref(p_path, &p_file.sic_ref)),
    }
}

pub fn p_to_rho(
    sic_flag: Option<&Path>,
    p_path: &Path,
    out: &Path,
    emit: Emit,
) -> Result<u8, Failure> {
    let p_file = io::load_p_vector_file(p_path)?;
    let p = p_file.prob_vector(&p_path.display().to_string())?;
    let sic = resolve_sic_for_p(sic_flag, p_path, &p_file)?;
    let candidate = probs_to_state(&p, &sic).map_err(|e| Failure::invalid(e.to_string()))?;
    let min_eig = candidate.min_eigenvalue();
    let quantum = min_eig >= -ToleranceSet::default().psd;
    let kind = if quantum { "density" } else { "hermitian" };
    io::save_hermitian(out, &candidate, kind)?;
    match emit {
        Emit::Json => {
            let mut map = envelope("p2rho");
            map.insert("d".into(), sic.dim().into());
            map.insert("min_eigenvalue".into(), float(min_eig));
            map.insert("trace".into(), float(candidate.trace_re()));
            map.insert("is_quantum".into(), quantum.into());
            map.insert("kind".into(), kind.into());
            map.insert("out".into(), out.display().to_string().into());
            print_json(map);
        }
        Emit::Text => {
            println!(
                "reconstruction written to {} as `{kind}`: min eigenvalue {min_eig:.3e}",
                out.display()
            );
            if !quantum {
                println!("input lies outside the quantum region (consider `sicore repair`)");
            }
        }
    }
    Ok(if quantum { 0 } else { 1 })
}

pub fn repair(
    sic_flag: Option<&Path>,
    p_path: &Path,
    out: &Path,
    emit: Emit,
) -> Result<u8, Failure> {
    let p_file = io::load_p_vector_file(p_path)?;
    let p = p_file.prob_vector(&p_path.display().to_string())?;
    let sic = resolve_sic_for_p(sic_flag, p_path, &p_file)?;
    let repaired = repair_p_vector(&p, &sic).map_err(|e| Failure::invalid(e.to_string()))?;
    let max_change = repaired.max_diff(&p);
    io::save_p_vector_file(
        out,
        &PVectorFile {
            d: sic.dim(),
            sic_ref: p_file.sic_ref.clone(),
            p: repaired.entries().to_vec(),
        },
    )?;
    match emit {
        Emit::Json => {
            let mut map = envelope("repair");
            map.insert("d".into(), sic.dim().into());
            map.insert("max_change".into(), float(max_change));
            map.insert("changed".into(), (max_change > 1e-12).into());
            map.insert("out".into(), out.display().to_string().into());
            print_json(map);
        }
        Emit::Text => {
            println!(
                "repaired vector written to {}: moved by {max_change:.3e} (max entry change)",
                out.display()
            );
        }
    }
    Ok(0)
}

pub struct CheckArgs {
    pub request: Option<PathBuf>,
    pub sic: Option<PathBuf>,
    pub rho: Option<PathBuf>,
    pub p: Option<PathBuf>,
    pub povm: Option<PathBuf>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub tol: f64,
}

struct CheckInputs {
    sic: SicStructure,
    povm: Povm,
    p: ProbVector,
    /// What the prediction is compared against, and where it came from.
    q_direct: ProbVector,
    q_source: &'static str,
    alpha: Option<f64>,
    beta: Option<f64>,
}

fn gather_check_inputs(args: &CheckArgs) -> Result<CheckInputs, Failure> {
    let tol = ToleranceSet::default();
    if let Some(request_path) = &args.request {
        let request = io::load_check_request(request_path)?;
        let sic = load_sic_structure(&resolve_ref(request_path, &request.sic_ref))?;
        let povm = io::load_povm(&resolve_ref(request_path, &request.povm_ref), &tol)?;
        let (p, rho) = match (&request.p, &request.rho_ref) {
            (Some(entries), None) => (
                ProbVector::new(entries.clone()).map_err(|e| Failure::invalid(e.to_string()))?,
                None,
            ),
            (None, Some(rho_ref)) => {
                let rho = io::load_density(&resolve_ref(request_path, rho_ref), &tol)?;
                let p = state_to_probs(&rho, &sic).map_err(|e| Failure::invalid(e.to_string()))?;
                (p, Some(rho))
            }
            _ => {
                return Err(Failure::usage(
                    "check request needs exactly one of `p` or `rho_ref`",
                ))
            }
        };
        let (q_direct, q_source) = match (&request.q_claimed, &rho) {
            (Some(q), _) => (
                ProbVector::new(q.clone()).map_err(|e| Failure::invalid(e.to_string()))?,
                "claimed",
            ),
            (None, Some(rho)) => (
                born_probabilities(rho, &povm).map_err(|e| Failure::invalid(e.to_string()))?,
                "born",
            ),
            (None, None) => {
                return Err(Failure::usage(
                    "check request with `p` needs `q_claimed` to compare against",
                ))
            }
        };
        Ok(CheckInputs {
            sic,
            povm,
            p,
            q_direct,
            q_source,
            alpha: args.alpha.or(request.alpha),
            beta: args.beta.or(request.beta),
        })
    } else {
        let (Some(sic_path), Some(povm_path)) = (&args.sic, &args.povm) else {
            return Err(Failure::usage(
                "check needs --request, or --sic with --povm and a state",
            ));
        };
        let sic = load_sic_structure(sic_path)?;
        let povm = io::load_povm(povm_path, &tol)?;
        match (&args.rho, &args.p) {
            (Some(rho_path), None) => {
                let rho = io::load_density(rho_path, &tol)?;
                let p = state_to_probs(&rho, &sic).map_err(|e| Failure::invalid(e.to_string()))?;
                let q = born_probabilities(&rho, &povm)
                    .map_err(|e| Failure::invalid(e.to_string()))?;
                Ok(CheckInputs {
                    sic,
                    povm,
                    p,
                    q_direct: q,
                    q_source: "born",
                    alpha: args.alpha,
                    beta: args.beta,
                })
            }
            (None, Some(_)) => Err(Failure::usage(
                "check with --p needs a --request file carrying q_claimed",
            )),
            _ => Err(Failure::usage("check needs exactly one of --rho or --p")),
        }
    }
}

pub fn check(args: CheckArgs, emit: Emit) -> Result<u8, Failure> {
    let inputs = gather_check_inputs(&args)?;
    let d = inputs.sic.dim() as f64;
    let alpha = inputs.alpha.unwrap_or(d + 1.0);
    let beta = inputs.beta.unwrap_or(1.0 / d);

    let cond = conditional_matrix(&inputs.sic, &inputs.povm)
        .map_err(|e| Failure::invalid(e.to_string()))?;
    let q_predicted = generalized_predict(&inputs.p, &cond, alpha, beta)
        .map_err(|e| Failure::invalid(e.to_string()))?;
    let q_ltp = ltp_predict(&inputs.p, &cond).map_err(|e| Failure::invalid(e.to_string()))?;

    if inputs.q_direct.len() != q_predicted.len() {
        return Err(Failure::invalid(format!(
            "claimed distribution has {} entries, measurement has {} outcomes",
            inputs.q_direct.len(),
            q_predicted.len()
        )));
    }
    let mut residual_max: f64 = 0.0;
    let mut residual_l1 = 0.0;
    for (direct, predicted) in inputs.q_direct.entries().iter().zip(&q_predicted) {
        let gap = (direct - predicted).abs();
        residual_max = residual_max.max(gap);
        residual_l1 += gap;
    }
    let deformation = q_predicted
        .iter()
        .zip(q_ltp.entries())
        .map(|(u, l)| (u - l).abs())
        .fold(0.0, f64::max);
    let passed = residual_max <= args.tol;

    match emit {
        Emit::Json => {
            let mut map = envelope("check");
            map.insert("d".into(), inputs.sic.dim().into());
            map.insert("alpha".into(), float(alpha));
            map.insert("beta".into(), float(beta));
            map.insert("q_predicted".into(), floats(&q_predicted));
            map.insert("q_direct".into(), floats(inputs.q_direct.entries()));
            map.insert("q_source".into(), inputs.q_source.into());
            map.insert("residual_max".into(), float(residual_max));
            map.insert("residual_l1".into(), float(residual_l1));
            map.insert("deformation".into(), float(deformation));
            map.insert("tol".into(), float(args.tol));
            map.insert("passed".into(), Value::Bool(passed));
            print_json(map);
        }
        Emit::Text => {
            println!(
                "urgleichung check (alpha = {alpha}, beta = {beta}, against {}):",
                inputs.q_source
            );
            println!("  residual max {residual_max:.3e}, l1 {residual_l1:.3e} (tol {:.1e})", args.tol);
            println!("  deformation vs total probability {deformation:.3e}");
            println!("  {}", if passed { "pass" } else { "FAIL" });
        }
    }
    Ok(if passed { 0 } else { 1 })
}

pub fn report(
    sic_path: &Path,
    rho_path: Option<&Path>,
    p_path: Option<&Path>,
    povm_path: Option<&Path>,
) -> Result<u8, Failure> {
    let tol = ToleranceSet::default();
    let file = io::load_sic_file(sic_path)?;
    let fiducial = file.fiducial(&sic_path.display().to_string())?;
    let sic = SicStructure::from_fiducial(fiducial, SIC_ACCEPT_TOL);
    let verification = verify_projectors(sic.projectors(), SIC_ACCEPT_TOL)
        .map_err(|e| Failure::invalid(e.to_string()))?;

    println!("SIC {}", sic_path.display());
    println!("  dimension            {}", sic.dim());
    println!("  elements             {}", sic.dim() * sic.dim());
    println!("  declared deviation   {:.3e}", file.max_deviation);
    println!(
        "  measured deviation   {:.3e} (max), {:.3e} (mean)",
        verification.max_pairwise_deviation, verification.mean_pairwise_deviation
    );
    println!("  effect sum deviation {:.3e}", verification.sum_deviation);
    println!(
        "  verified             {}",
        if sic.is_verified() { "yes" } else { "NO" }
    );

    let mut all_good = sic.is_verified();

    let state = match (rho_path, p_path) {
        (Some(path), None) => {
            let rho = io::load_density(path, &tol)?;
            let p = state_to_probs(&rho, &sic).map_err(|e| Failure::invalid(e.to_string()))?;
            Some((p, Some(rho), path))
        }
        (None, Some(path)) => {
            let p_file = io::load_p_vector_file(path)?;
            let p = p_file.prob_vector(&path.display().to_string())?;
            Some((p, None, path))
        }
        (None, None) => None,
        _ => unreachable!("clap forbids --rho with --p"),
    };

    if let Some((p, rho, path)) = &state {
        let d = sic.dim() as f64;
        let triples = triple_products(&sic).map_err(|e| Failure::invalid(e.to_string()))?;
        let validity = check_validity(p, &sic, &triples).map_err(|e| Failure::invalid(e.to_string()))?;
        println!("State {}", path.display());
        println!("  entries              {}", p.len());
        println!(
            "  max P(H_i)           {:.9} (bound 1/d = {:.9})",
            p.max_entry(),
            1.0 / d
        );
        println!(
            "  quadratic value      {:.9} (pure: {:.9})",
            validity.quadratic_value,
            2.0 / (d * (d + 1.0))
        );
        println!(
            "  cubic value          {:.9} (pure: {:.9})",
            validity.cubic_value,
            (d + 7.0) / (d + 1.0).powi(3)
        );
        println!(
            "  min eigenvalue       {:.3e}",
            validity.reconstructed_min_eigenvalue
        );
        println!(
            "  quantum              {}   pure  {}",
            if validity.is_quantum { "yes" } else { "NO" },
            if validity.is_pure { "yes" } else { "no" }
        );
        if !validity.is_quantum {
            all_good = false;
        }

        if let Some(povm_path) = povm_path {
            let povm = io::load_povm(povm_path, &tol)?;
            let cond = conditional_matrix(&sic, &povm)
                .map_err(|e| Failure::invalid(e.to_string()))?;
            let q_pred = generalized_predict(p, &cond, d + 1.0, 1.0 / d)
                .map_err(|e| Failure::invalid(e.to_string()))?;
            let q_ltp = ltp_predict(p, &cond).map_err(|e| Failure::invalid(e.to_string()))?;
            let deformation = q_pred
                .iter()
                .zip(q_ltp.entries())
                .map(|(u, l)| (u - l).abs())
                .fold(0.0, f64::max);
            println!("Measurement {}", povm_path.display());
            println!("  outcomes             {}", povm.len());
            if let Some(rho) = rho {
                let born = born_probabilities(rho, &povm)
                    .map_err(|e| Failure::invalid(e.to_string()))?;
                let residual = born
                    .entries()
                    .iter()
                    .zip(&q_pred)
                    .map(|(b, q)| (b - q).abs())
                    .fold(0.0, f64::max);
                println!("  urgleichung vs Born  {residual:.3e}");
                if residual > 1e-9 {
                    all_good = false;
                }
            }
            println!("  deformation vs LTP   {deformation:.3e}");
        }
    } else if povm_path.is_some() {
        return Err(Failure::usage("report with --povm needs --rho or --p"));
    }

    Ok(if all_good { 0 } else { 1 })
}
