//! The four commands. Each builds the configured chain, applies any
//! configured fault, runs its checks against the configured tolerances,
//! writes its artifact, and says whether every check passed.

use std::path::Path;

use serde::Serialize;

use ladderkit::{
    compare_spectra, compose_hamiltonian, generate_polynomials, hypergeometric_form,
    max_offdiagonal_rel, polynomial_gram, realize_matrix, report, solve_chain_eigens,
    verify_chain, BoundaryReport, ChainSpec, ChainTolerances, ChainVerification, Error, Grid,
    HypergeometricForm, OperatorSide, SpectrumReport,
};

use crate::config::{ChainConfig, ConfigError, OutputFormat};
use crate::output::{emit, sibling, to_pretty_json};

pub struct Invocation<'a> {
    pub config: &'a ChainConfig,
    pub out: Option<&'a Path>,
    pub format: OutputFormat,
    pub rng_seed: u64,
}

fn lib_err(e: Error) -> ConfigError {
    ConfigError(e.to_string())
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    schema: &'a str,
    command: &'a str,
    family: &'a str,
    grid: Grid,
    levels: usize,
    trials: usize,
    rng_seed: u64,
    tolerances: ChainTolerances,
    verification: ChainVerification,
}

/// Chain-wide verification: coupling conditions, adjointness, boundary
/// certificates, factorized-form agreement. JSON report regardless of the
/// table format.
pub fn cmd_verify(inv: &Invocation) -> Result<bool, ConfigError> {
    let chain = inv.config.build_with_fault()?;
    let verification = verify_chain(&chain, inv.config.trials, inv.rng_seed).map_err(lib_err)?;
    let pass = verification.pass;
    let report = VerifyReport {
        schema: crate::config::SCHEMA,
        command: "verify",
        family: inv.config.family.name(),
        grid: chain.grid(),
        levels: chain.top_level(),
        trials: inv.config.trials,
        rng_seed: inv.rng_seed,
        tolerances: chain.tolerances(),
        verification,
    };
    emit(inv.out, &to_pretty_json(&report)?)?;
    Ok(pass)
}

#[derive(Serialize)]
struct SpectrumOut<'a> {
    schema: &'a str,
    command: &'a str,
    family: &'a str,
    grid: Grid,
    level: usize,
    boundary: BoundaryReport,
    asymmetry: f64,
    min_oracle: f64,
    alpha_level: f64,
    oracle: Vec<f64>,
    spectrum: SpectrumReport,
    pass: bool,
    failures: Vec<String>,
}

/// Ladder eigenvalues against the symmetrized-matrix spectrum.
pub fn cmd_spectrum(inv: &Invocation, level: Option<usize>) -> Result<bool, ConfigError> {
    let chain = inv.config.build_with_fault()?;
    let k = level.unwrap_or(chain.top_level());
    if k > chain.top_level() {
        return Err(ConfigError(format!(
            "--level {k} out of range 0..={}",
            chain.top_level()
        )));
    }
    let tol = chain.tolerances();
    let boundary = chain.weight(k).boundary(chain.level_data(k).b(), tol.boundary);
    let h = compose_hamiltonian(&chain, k, OperatorSide::Lower).map_err(lib_err)?;
    let mut failures = Vec::new();
    let realized = match realize_matrix(&h, chain.weight(k), tol.condition) {
        Ok(r) => r,
        Err(e @ Error::Asymmetry { .. }) => {
            failures.push(e.to_string());
            let report = serde_json::json!({
                "schema": crate::config::SCHEMA,
                "command": "spectrum",
                "family": inv.config.family.name(),
                "level": k,
                "pass": false,
                "failures": failures,
            });
            emit(inv.out, &format!("{:#}\n", report))?;
            return Ok(false);
        }
        Err(e) => return Err(lib_err(e)),
    };
    let ladder = match solve_chain_eigens(&chain, k) {
        Ok(l) => l,
        Err(e @ Error::EigenResidual { .. }) => {
            failures.push(e.to_string());
            let report = serde_json::json!({
                "schema": crate::config::SCHEMA,
                "command": "spectrum",
                "family": inv.config.family.name(),
                "level": k,
                "pass": false,
                "failures": failures,
            });
            emit(inv.out, &format!("{:#}\n", report))?;
            return Ok(false);
        }
        Err(e) => return Err(lib_err(e)),
    };
    let oracle = realized.matrix.eigenvalues().map_err(lib_err)?;
    let spectrum = compare_spectra(&ladder.pairs, &oracle, &realized.matrix, chain.weight(k), tol.spectrum);
    let min_oracle = oracle[0];
    let alpha_level = chain.alpha_at(k);
    if !spectrum.pass {
        for row in spectrum.rows.iter().filter(|r| r.abs_err > tol.spectrum) {
            failures.push(format!(
                "spectrum at p = {}: distance {:.3e} exceeds {:.3e}",
                row.p, row.abs_err, tol.spectrum
            ));
        }
    }
    if min_oracle < alpha_level - 1e-8 {
        failures.push(format!(
            "min oracle eigenvalue {min_oracle:.6e} below the factorized floor {alpha_level:.6e}"
        ));
    }
    let pass = failures.is_empty();
    match inv.format {
        OutputFormat::Csv => emit(inv.out, &report::spectrum_csv(&spectrum))?,
        OutputFormat::Json => {
            let out = SpectrumOut {
                schema: crate::config::SCHEMA,
                command: "spectrum",
                family: inv.config.family.name(),
                grid: chain.grid(),
                level: k,
                boundary,
                asymmetry: realized.asymmetry,
                min_oracle,
                alpha_level,
                oracle,
                spectrum,
                pass,
                failures: failures.clone(),
            };
            emit(inv.out, &to_pretty_json(&out)?)?;
        }
    }
    Ok(pass)
}

#[derive(Serialize)]
struct FormRow {
    l: usize,
    sigma: [f64; 3],
    tau: [f64; 2],
    lambda: f64,
    lambda_from_index_rule: f64,
}

#[derive(Serialize)]
struct PolyReport<'a> {
    schema: &'a str,
    command: &'a str,
    family: &'a str,
    grid: Grid,
    level: usize,
    degree: usize,
    forms: Vec<FormRow>,
    gram: report::GramReport,
    max_equation_residual: f64,
    pass: bool,
    failures: Vec<String>,
}

fn equation_residual(chain: &ChainSpec, form: &HypergeometricForm, p: &ladderkit::LevelSequence) -> f64 {
    let g = chain.grid();
    let scale = p.max_abs_interior().max(f64::MIN_POSITIVE);
    let mut worst: f64 = 0.0;
    for n in (g.left() + 1)..=(g.right() - 1) {
        let x = n as f64;
        let sigma = form.sigma[0] + form.sigma[1] * x + form.sigma[2] * x * x;
        let tau = form.tau[0] + form.tau[1] * x;
        let ddp = p.value(n + 1) - 2.0 * p.value(n) + p.value(n - 1);
        let dp = p.value(n + 1) - p.value(n);
        worst = worst.max((sigma * ddp + tau * dp + form.lambda * p.value(n)).abs() / scale);
    }
    worst
}

/// Polynomial table, pairwise-product report and standard forms.
pub fn cmd_poly(inv: &Invocation, level: Option<usize>, degree: Option<usize>) -> Result<bool, ConfigError> {
    if !inv.config.family.supports_polynomials() {
        return Err(ConfigError(format!(
            "family {:?} does not generate polynomial ladders; use a level-shift family",
            inv.config.family.name()
        )));
    }
    let chain = inv.config.build_with_fault()?;
    let k = level.unwrap_or(chain.top_level());
    if k > chain.top_level() {
        return Err(ConfigError(format!(
            "--level {k} out of range 0..={}",
            chain.top_level()
        )));
    }
    let capacity = chain.grid().interior_len() - 1;
    let lmax = degree.unwrap_or_else(|| 6usize.min(capacity));
    let tol = chain.tolerances();
    let polys = generate_polynomials(&chain, k, lmax).map_err(lib_err)?;
    let boundary = chain.weight(k).boundary(chain.level_data(k).b(), tol.boundary);
    let gram_values = polynomial_gram(&chain, k, &polys).map_err(lib_err)?;
    let off = max_offdiagonal_rel(&gram_values);
    let mut failures = Vec::new();
    if off > tol.eigen {
        failures.push(format!(
            "orthogonality: off-diagonal {off:.3e} exceeds {:.3e}",
            tol.eigen
        ));
    }
    let mut forms = Vec::with_capacity(lmax + 1);
    let mut worst_eq: f64 = 0.0;
    for (l, p) in polys.iter().enumerate() {
        let form = hypergeometric_form(&chain, k, l).map_err(lib_err)?;
        let residual = equation_residual(&chain, &form, p);
        if residual > tol.eigen {
            failures.push(format!(
                "difference equation at degree {l}: residual {residual:.3e} exceeds {:.3e}",
                tol.eigen
            ));
        }
        worst_eq = worst_eq.max(residual);
        forms.push(FormRow {
            l,
            sigma: form.sigma,
            tau: form.tau,
            lambda: form.lambda,
            lambda_from_index_rule: form.index_rule_lambda(),
        });
    }
    let pass = failures.is_empty();
    let gram = report::GramReport {
        level: k,
        boundary_left: boundary.left,
        boundary_right: boundary.right,
        max_offdiagonal_rel: off,
        pass,
        gram: gram_values,
    };
    let poly_report = PolyReport {
        schema: crate::config::SCHEMA,
        command: "poly",
        family: inv.config.family.name(),
        grid: chain.grid(),
        level: k,
        degree: lmax,
        forms,
        gram,
        max_equation_residual: worst_eq,
        pass,
        failures,
    };
    match inv.format {
        OutputFormat::Csv => emit(inv.out, &report::polynomials_csv(&polys))?,
        OutputFormat::Json => {
            let table = report::polynomial_table(k, &polys);
            emit(inv.out, &to_pretty_json(&table)?)?;
        }
    }
    if let Some(path) = inv.out {
        crate::output::write_atomic(&sibling(path, "report.json"), &to_pretty_json(&poly_report)?)?;
    }
    Ok(pass)
}

#[derive(Serialize)]
struct ConsistencyRow {
    level: usize,
    max_relative_deviation: f64,
}

#[derive(Serialize)]
struct WeightReport<'a> {
    schema: &'a str,
    command: &'a str,
    family: &'a str,
    grid: Grid,
    level: usize,
    normalized: bool,
    pearson_residual: f64,
    pearson_scale: f64,
    boundary: BoundaryReport,
    descent: Vec<ConsistencyRow>,
    pass: bool,
    failures: Vec<String>,
    rows: Vec<report::WeightPoint>,
}

/// Weight table for one level, with the recursion defect and the boundary
/// residuals in the metadata, plus the level-descent consistency checks.
pub fn cmd_weight(inv: &Invocation, level: Option<usize>) -> Result<bool, ConfigError> {
    let chain = inv.config.build_with_fault()?;
    let k = level.unwrap_or(chain.top_level());
    if k > chain.top_level() {
        return Err(ConfigError(format!(
            "--level {k} out of range 0..={}",
            chain.top_level()
        )));
    }
    let tol = chain.tolerances();
    let g = chain.grid();
    let mut failures = Vec::new();
    let mut descent = Vec::new();
    for j in 1..=chain.top_level() {
        match chain.weight(j).descend(chain.level_data(j).c()) {
            Ok(recomputed) => {
                let stored = chain.weight(j - 1);
                let ratio = recomputed.rho(g.left()) / stored.rho(g.left());
                let scale = g.interior().map(|n| recomputed.rho(n)).fold(f64::MIN_POSITIVE, f64::max);
                let mut worst: f64 = 0.0;
                for n in g.interior() {
                    worst = worst.max((recomputed.rho(n) - ratio * stored.rho(n)).abs() / scale);
                }
                descent.push(ConsistencyRow {
                    level: j,
                    max_relative_deviation: worst,
                });
                if worst > tol.consistency {
                    failures.push(format!(
                        "descent at level {j}: deviation {worst:.3e} exceeds {:.3e}",
                        tol.consistency
                    ));
                }
            }
            Err(e) => {
                failures.push(format!("descent at level {j}: {e}"));
            }
        }
    }
    let weight = if inv.config.normalize_weight {
        chain.weight(k).normalized()
    } else {
        chain.weight(k).clone()
    };
    let data = chain.level_data(k);
    let (pearson_residual, pearson_scale) = weight.pearson_residual(data.b(), data.c());
    let boundary = weight.boundary(data.b(), tol.boundary);
    let pass = failures.is_empty();
    match inv.format {
        OutputFormat::Csv => {
            let metadata = vec![
                ("level".to_string(), k.to_string()),
                ("normalized".to_string(), inv.config.normalize_weight.to_string()),
                ("pearson_residual".to_string(), format!("{pearson_residual:e}")),
                ("boundary_left".to_string(), format!("{:e}", boundary.left)),
                ("boundary_right".to_string(), format!("{:e}", boundary.right)),
                ("pass".to_string(), pass.to_string()),
            ];
            emit(inv.out, &report::weight_csv(&weight, &metadata))?;
        }
        OutputFormat::Json => {
            let out = WeightReport {
                schema: crate::config::SCHEMA,
                command: "weight",
                family: inv.config.family.name(),
                grid: g,
                level: k,
                normalized: inv.config.normalize_weight,
                pearson_residual,
                pearson_scale,
                boundary,
                descent,
                pass,
                failures: failures.clone(),
                rows: report::weight_points(&weight),
            };
            emit(inv.out, &to_pretty_json(&out)?)?;
        }
    }
    Ok(pass)
}
