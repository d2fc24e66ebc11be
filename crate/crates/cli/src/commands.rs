use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use curves_modulus::{p_modulus_with_threshold, Curve, CurveFamily};
use hausdorff_content::{content, CoverForm};
use mapping_numbers::{
    asymptotic_fields, fmt_float, FieldParams, MappingFile, RadonWeight, SampledMapping, Selection,
};
use regularity_certify::certify;
use scenarios::{generate, reproduce, Params, ScenarioName};
use serde::Serialize;
use space_core::MetricMeasureSpace;

use crate::config::{
    validate_certify, validate_fields, validate_hausdorff, validate_modulus, Inputs, RunConfig,
};
use crate::error::{input, parameter, CliError};

/// What a finished command tells the process: text for stdout and whether
/// the verdict passed.
pub struct Outcome {
    pub summary: String,
    pub pass: bool,
}

impl Outcome {
    fn ok(summary: String) -> Self {
        Self {
            summary,
            pass: true,
        }
    }
}

/// Writes through a temporary sibling so a failed run leaves nothing behind.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| input(format!("{}: {e}", dir.display())))?;
        }
    }
    let tmp = path.with_extension("partial");
    std::fs::write(&tmp, bytes).map_err(|e| input(format!("{}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn to_json(value: &impl Serialize) -> Result<String, CliError> {
    serde_json::to_string_pretty(value).map_err(parameter)
}

fn required<'a>(path: &'a Option<PathBuf>, what: &str) -> Result<&'a Path, CliError> {
    path.as_deref()
        .ok_or_else(|| CliError::Input(format!("no {what} file given")))
}

fn load_space(path: &Path) -> Result<Arc<MetricMeasureSpace>, CliError> {
    space_core::io::load(path)
        .map(Arc::new)
        .map_err(|e| input(format!("{}: {e}", path.display())))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn load_mapping(inputs: &Inputs) -> Result<SampledMapping, CliError> {
    let domain = load_space(required(&inputs.domain, "domain")?)?;
    let target = load_space(required(&inputs.target, "target")?)?;
    let path = required(&inputs.mapping, "mapping")?;
    let file: MappingFile = read_json(path)?;
    file.into_mapping(domain, target)
        .map_err(|e| input(format!("{}: {e}", path.display())))
}

fn load_weight(inputs: &Inputs, domain: &MetricMeasureSpace) -> Result<RadonWeight, CliError> {
    let weight = match &inputs.weight {
        Some(path) => read_json::<RadonWeight>(path)?,
        None => RadonWeight::base(),
    };
    weight
        .masses(domain)
        .map_err(|e| input(format!("weight: {e}")))?;
    Ok(weight)
}

/// CSV columns: `point, x1..xn`, one value column per requested kind in
/// request order, then `<kind>_spread, <kind>_growth, <kind>_diverging` per
/// kind.
pub fn fields(config: &RunConfig) -> Result<Outcome, CliError> {
    let section = &config.fields;
    validate_fields(section)?;
    let kinds = section.parsed_kinds()?;
    let mapping = load_mapping(&config.input)?;
    let weight = load_weight(&config.input, mapping.domain())?;
    let mut params = FieldParams::weighted(weight, section.spread);
    if let Some(q) = section.q {
        params = params.with_exponent(q);
    }
    let schedule = mapping_numbers::RadiusSchedule::new(section.radii.clone(), section.tail)
        .map_err(parameter)?;
    let selection = if section.stride > 1 {
        Selection::InteriorStride(section.stride)
    } else {
        Selection::Interior
    };
    let computed = asymptotic_fields(&mapping, &kinds, &schedule, &params, &selection)
        .map_err(parameter)?;

    let domain = mapping.domain();
    let mut csv = String::new();
    let mut header = vec!["point".to_string()];
    header.extend((1..=domain.dim()).map(|k| format!("x{k}")));
    header.extend(kinds.iter().map(|k| k.name().to_string()));
    for k in &kinds {
        header.extend(["spread", "growth", "diverging"].map(|d| format!("{}_{d}", k.name())));
    }
    writeln!(csv, "{}", header.join(",")).unwrap();
    let points = &computed[0].points;
    for (pos, &p) in points.iter().enumerate() {
        let mut row = vec![p.to_string()];
        row.extend(domain.point(p).iter().map(|&v| fmt_float(v)));
        row.extend(computed.iter().map(|f| fmt_float(f.values[pos])));
        for f in &computed {
            row.push(fmt_float(f.spread[pos]));
            row.push(fmt_float(f.growth[pos]));
            row.push(f.diverging[pos].to_string());
        }
        writeln!(csv, "{}", row.join(",")).unwrap();
    }
    let path = config.output_dir().join("fields.csv");
    write_atomic(&path, csv.as_bytes())?;

    let mut summary = format!("{} points -> {}\n", points.len(), path.display());
    for f in &computed {
        writeln!(
            summary,
            "{:<16} max {}  diverging {}",
            f.kind.name(),
            fmt_float(f.max_value()),
            f.diverging_count()
        )
        .unwrap();
    }
    Ok(Outcome::ok(summary))
}

#[derive(Serialize)]
struct ModulusOutput<'a> {
    p: f64,
    curves: usize,
    generator: &'a str,
    value: f64,
    feasible_value: f64,
    dual_bound: f64,
    residual: f64,
    converged: bool,
    iterations: usize,
    density: String,
}

pub fn modulus(config: &RunConfig) -> Result<Outcome, CliError> {
    let section = &config.modulus;
    validate_modulus(section)?;
    let domain = load_space(required(&config.input.domain, "domain")?)?;
    let family = match (&section.curves, section.axis) {
        (Some(path), _) => {
            let lists: Vec<Vec<usize>> = read_json(path)?;
            let mut curves = Vec::with_capacity(lists.len());
            for v in lists {
                curves.push(
                    Curve::new(&domain, v).map_err(|e| input(format!("{}: {e}", path.display())))?,
                );
            }
            CurveFamily::explicit(curves)
        }
        (None, Some(axis)) => CurveFamily::axis_lines(&domain, axis).map_err(parameter)?,
        (None, None) => unreachable!("validated"),
    };
    let report =
        p_modulus_with_threshold(&domain, &family, section.p, section.threshold, &section.budget())
            .map_err(parameter)?;

    let out = config.output_dir();
    let density_path = out.join("density.csv");
    let mut csv = String::new();
    let mut header = vec!["point".to_string()];
    header.extend((1..=domain.dim()).map(|k| format!("x{k}")));
    header.push("rho".into());
    writeln!(csv, "{}", header.join(",")).unwrap();
    for (i, &rho) in report.density.iter().enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(domain.point(i).iter().map(|&v| fmt_float(v)));
        row.push(fmt_float(rho));
        writeln!(csv, "{}", row.join(",")).unwrap();
    }
    let output = ModulusOutput {
        p: report.p,
        curves: family.len(),
        generator: &family.generator,
        value: report.value,
        feasible_value: report.feasible_value,
        dual_bound: report.dual_bound,
        residual: report.residual,
        converged: report.converged,
        iterations: report.iterations,
        density: density_path.display().to_string(),
    };
    write_atomic(&density_path, csv.as_bytes())?;
    write_atomic(&out.join("modulus.json"), to_json(&output)?.as_bytes())?;

    let mut summary = String::new();
    if family.is_empty() {
        eprintln!("warning: the curve family is empty, its modulus is 0");
    }
    writeln!(
        summary,
        "Mod_{} of {} curves: {} (feasible {}, lower bound {}, residual {})",
        report.p,
        family.len(),
        fmt_float(report.value),
        fmt_float(report.feasible_value),
        fmt_float(report.dual_bound),
        fmt_float(report.residual)
    )
    .unwrap();
    writeln!(summary, "density -> {}", density_path.display()).unwrap();
    if !report.converged {
        print!("{summary}");
        return Err(CliError::Budget(format!(
            "stopped after {} iterations; best feasible value {}",
            report.iterations,
            fmt_float(report.feasible_value)
        )));
    }
    Ok(Outcome::ok(summary))
}

pub fn hausdorff(config: &RunConfig) -> Result<Outcome, CliError> {
    let section = &config.hausdorff;
    validate_hausdorff(section)?;
    let domain = load_space(required(&config.input.domain, "domain")?)?;
    let set: Vec<usize> = match (&section.set, &section.lo, &section.hi) {
        (Some(path), _, _) => read_json(path)?,
        (None, Some(lo), Some(hi)) => {
            if lo.len() != domain.dim() || hi.len() != domain.dim() {
                return Err(CliError::Parameter(format!(
                    "box of dimension {} in a space of dimension {}",
                    lo.len(),
                    domain.dim()
                )));
            }
            (0..domain.len())
                .filter(|&i| {
                    let x = domain.point(i);
                    (0..x.len()).all(|k| x[k] >= lo[k] && x[k] <= hi[k])
                })
                .collect()
        }
        _ => unreachable!("validated"),
    };
    let form = match (section.codimension, section.dimension) {
        (Some(p), None) => CoverForm::Codimension { p },
        (None, Some(s)) => CoverForm::Dimension { s },
        _ => unreachable!("validated"),
    };
    let cap = section.cap.unwrap_or(2.0 * domain.trusted_floor());
    let estimate = content(&domain, &set, form, cap, section.effort).map_err(parameter)?;
    let path = config.output_dir().join("content.json");
    write_atomic(&path, to_json(&estimate)?.as_bytes())?;
    Ok(Outcome::ok(format!(
        "{} points, {} balls: content {} (lower bound {}) -> {}\n",
        set.len(),
        estimate.cover.balls.len(),
        fmt_float(estimate.estimate),
        fmt_float(estimate.lower_bound),
        path.display()
    )))
}

pub fn certify_cmd(config: &RunConfig) -> Result<Outcome, CliError> {
    let mut run = config.certify.clone();
    if let Some(seed) = config.seed {
        run.seed = seed;
    }
    validate_certify(&run)?;
    let mapping = load_mapping(&config.input)?;
    let weight = load_weight(&config.input, mapping.domain())?;
    let cert = certify(&mapping, &weight, &run).map_err(parameter)?;
    let path = config.output_dir().join("certificate.json");
    write_atomic(&path, cert.to_json().map_err(parameter)?.as_bytes())?;
    let mut summary = cert.summary();
    writeln!(summary, "certificate -> {}", path.display()).unwrap();
    Ok(Outcome {
        summary,
        pass: cert.verdict.pass,
    })
}

pub fn reproduce_cmd(
    name: &str,
    params: Option<&Path>,
    out: Option<&Path>,
) -> Result<Outcome, CliError> {
    let name: ScenarioName = name.parse().map_err(input)?;
    let params = load_params(params)?;
    let scenario = generate(name, &params).map_err(parameter)?;
    let report = reproduce(&scenario).map_err(parameter)?;
    if let Some(dir) = out {
        write_atomic(&dir.join("report.json"), to_json(&report)?.as_bytes())?;
    }
    let mut summary = String::new();
    for c in &report.checks {
        writeln!(
            summary,
            "{:<5} {:<58} {:>24}  {:?}",
            if c.pass { "ok" } else { "FAIL" },
            c.label,
            fmt_float(c.measured),
            c.comparator
        )
        .unwrap();
    }
    writeln!(
        summary,
        "{}: {}",
        name,
        if report.pass { "all expectations met" } else { "expectations not met" }
    )
    .unwrap();
    Ok(Outcome {
        summary,
        pass: report.pass,
    })
}

pub fn generate_cmd(name: &str, params: Option<&Path>, out: &Path) -> Result<Outcome, CliError> {
    let name: ScenarioName = name.parse().map_err(input)?;
    let params = load_params(params)?;
    let scenario = generate(name, &params).map_err(parameter)?;
    let paths = scenario.write_assets(out).map_err(input)?;
    let mut summary = format!(
        "{}: {} domain points, {} target points\n",
        name,
        scenario.domain().len(),
        scenario.mapping.target().len()
    );
    for p in paths {
        writeln!(summary, "  {}", p.display()).unwrap();
    }
    Ok(Outcome::ok(summary))
}

/// Scenario parameters from a TOML or JSON file.
fn load_params(path: Option<&Path>) -> Result<Params, CliError> {
    let Some(path) = path else {
        return Ok(Params::default());
    };
    let text =
        std::fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
    let parsed = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| e.to_string())
    } else {
        toml::from_str(&text).map_err(|e| e.to_string())
    };
    parsed.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}
