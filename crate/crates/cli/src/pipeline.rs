use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use jostfit::fitting::{multistart, param_report, seeded_start, FitProblem, FitResult, FittedModel, ModelKind, ScalePolicy};
use jostfit::oracle::{cross_sections_on, exact_resonances, generate_dataset, CrossSectionDataset, IntegrationSettings};
use jostfit::poles::{resonances_to_csv, Resonance};

use crate::config::{config_err, read_ground_truth, RunConfig};
use crate::NotConverged;

/// Rotation angle used for exact resonance searches; wide enough for the
/// broadest rows (Γ ≈ 6) while keeping `f_in` well conditioned.
const EXACT_ROTATION: f64 = 0.7;

/// Total-cross-section insert around the sharp resonance, per model.
const TOTAL_INSERT: (f64, f64) = (1.7802, 1.7808);
const TOTAL_INSERT_RMATRIX: (f64, f64) = (1.7797, 1.7808);
/// ℓ = 0 partial-cross-section insert.
const PARTIAL_INSERT: (f64, f64) = (1.780, 1.781);

pub fn model_name(m: ModelKind) -> &'static str {
    match m {
        ModelKind::Jost => "jost",
        ModelKind::Rmatrix => "rmatrix",
        ModelKind::JostTaylor => "jost_taylor",
    }
}

fn dataset_path(cfg: &RunConfig) -> PathBuf {
    cfg.output_dir.join("dataset.csv")
}

fn fit_path(cfg: &RunConfig) -> PathBuf {
    cfg.output_dir.join(format!("fit_{}.json", model_name(cfg.fit.model)))
}

fn resonances_path(cfg: &RunConfig) -> PathBuf {
    cfg.output_dir.join(format!("resonances_{}.csv", model_name(cfg.fit.model)))
}

fn exact_path(cfg: &RunConfig) -> PathBuf {
    cfg.output_dir.join("exact_resonances.csv")
}

/// Fails with a message naming the stage that produces `path`.
fn require(path: &Path, stage: &str) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(config_err(format!("missing {}; run `{stage}` first", path.display())))
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn generate(cfg: &RunConfig) -> Result<()> {
    let d = &cfg.dataset;
    let ds = generate_dataset(&cfg.potential, d.e_min, d.e_max, d.n_points, d.l_max, d.delta, d.grid)?;
    let path = dataset_path(cfg);
    ds.write(&path)?;
    println!("generate: {} points in [{}, {}] → {}", ds.points.len(), d.e_min, d.e_max, path.display());
    Ok(())
}

fn load_dataset(cfg: &RunConfig) -> Result<CrossSectionDataset> {
    let path = dataset_path(cfg);
    require(&path, "generate")?;
    Ok(CrossSectionDataset::read(&path)?)
}

fn load_fit(cfg: &RunConfig) -> Result<FitResult> {
    let path = fit_path(cfg);
    require(&path, if cfg.fit.model == ModelKind::Rmatrix { "rfit" } else { "fit" })?;
    let text = fs::read_to_string(&path)?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn fit(cfg: &RunConfig) -> Result<std::result::Result<(), NotConverged>> {
    let ds = load_dataset(cfg)?;
    let model = cfg.fit.model;
    let problem = FitProblem::new(ds, cfg.potential, cfg.waves(model)?)?;
    let center = match model {
        ModelKind::Rmatrix => cfg.fit.rmatrix.iter().flat_map(|w| w.gammas.iter().copied()).collect(),
        _ => seeded_start(&problem, cfg.fit.seed_width)?,
    };
    let policy = ScalePolicy::Around { center, half_width: cfg.fit.half_width };
    let result = multistart(&problem, cfg.fit.n_starts, &policy, cfg.fit.seed, &cfg.minimize_options())?;

    let name = model_name(model);
    write(&fit_path(cfg), &serde_json::to_string_pretty(&result)?)?;
    let table = param_report(&result);
    write(&cfg.output_dir.join(format!("params_{name}.txt")), &table.to_text())?;
    write(&cfg.output_dir.join(format!("params_{name}.csv")), &table.to_csv())?;
    println!(
        "fit[{name}]: {} parameters, χ² = {:.6e}, {} evaluations, converged = {}",
        problem.n_params(),
        result.chi2,
        result.n_evaluations,
        result.converged
    );
    Ok(if result.converged { Ok(()) } else { Err(NotConverged) })
}

pub fn poles(cfg: &RunConfig) -> Result<()> {
    let result = load_fit(cfg)?;
    let fitted = &result.fitted;
    let mut found = Vec::new();
    let mut exact = Vec::new();
    for rc in &cfg.poles.regions {
        let region = cfg.region(rc)?;
        let waves: Vec<u32> = match rc.l {
            Some(l) => vec![l],
            None => (0..=fitted.l_max()).collect(),
        };
        for l in waves {
            found.extend(fitted.resonances(&cfg.potential, l, &region)?);
            if cfg.poles.exact {
                let settings = IntegrationSettings::rotated(EXACT_ROTATION);
                exact.extend(exact_resonances(&cfg.potential, l, &region, &settings)?);
            }
        }
    }
    let found = dedup(found);
    write(&resonances_path(cfg), &resonances_to_csv(&found))?;
    write(&resonances_path(cfg).with_extension("json"), &serde_json::to_string_pretty(&found)?)?;
    println!("poles[{}]: {} resonances → {}", model_name(cfg.fit.model), found.len(), resonances_path(cfg).display());
    if cfg.poles.exact {
        let exact = dedup(exact);
        write(&exact_path(cfg), &resonances_to_csv(&exact))?;
        println!("poles[exact]: {} resonances → {}", exact.len(), exact_path(cfg).display());
    }
    Ok(())
}

/// Sorts by (ℓ, E_r) and drops repeats found by overlapping regions.
fn dedup(mut list: Vec<Resonance>) -> Vec<Resonance> {
    list.sort_by(|a, b| a.l.cmp(&b.l).then(a.e_r.total_cmp(&b.e_r)));
    list.dedup_by(|a, b| a.l == b.l && (a.energy() - b.energy()).norm() <= 1e-9 * (1.0 + b.energy().norm()));
    list
}

fn read_resonances(path: &Path) -> Result<Vec<Resonance>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(serde_json::from_str(&text)?)
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![0.5 * (a + b)];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// Exact and fitted cross sections on `energies`: per energy, partial waves and total.
fn curves(cfg: &RunConfig, fitted: &FittedModel, energies: &[f64]) -> Result<Vec<CurvePoint>> {
    let exact = cross_sections_on(&cfg.potential, energies, fitted.l_max())?;
    energies
        .iter()
        .zip(exact)
        .map(|(&e, ex)| {
            let fit = fitted.sigma(&cfg.potential, e)?;
            Ok(CurvePoint { energy: e, exact: ex, fit })
        })
        .collect()
}

struct CurvePoint {
    energy: f64,
    exact: (Vec<f64>, f64),
    fit: (Vec<f64>, f64),
}

/// `E,sigma_exact,sigma_fit` for the total (`l = None`) or one partial wave.
fn curve_csv(points: &[CurvePoint], l: Option<usize>) -> String {
    let mut s = String::from("E,sigma_exact,sigma_fit\n");
    for p in points {
        let (a, b) = match l {
            None => (p.exact.1, p.fit.1),
            Some(l) => (p.exact.0[l], p.fit.0[l]),
        };
        let _ = writeln!(s, "{:?},{:?},{:?}", p.energy, a, b);
    }
    s
}

pub fn report(cfg: &RunConfig) -> Result<()> {
    let ds = load_dataset(cfg)?;
    let result = load_fit(cfg)?;
    require(&resonances_path(cfg), "poles")?;
    let found = read_resonances(&resonances_path(cfg).with_extension("json"))?;
    let fitted = &result.fitted;
    let name = model_name(cfg.fit.model);
    let dir = cfg.output_dir.join("report");
    fs::create_dir_all(&dir)?;

    let (lo, hi) = (cfg.dataset.e_min, cfg.dataset.e_max);
    let main = curves(cfg, fitted, &linspace(lo, hi, cfg.report.curve_points))?;
    write(&dir.join(format!("fig_total_{name}.csv")), &curve_csv(&main, None))?;
    for l in 0..=fitted.l_max() as usize {
        write(&dir.join(format!("fig_l{l}_{name}.csv")), &curve_csv(&main, Some(l)))?;
    }
    let total_window = if cfg.fit.model == ModelKind::Rmatrix { TOTAL_INSERT_RMATRIX } else { TOTAL_INSERT };
    let insert = curves(cfg, fitted, &linspace(total_window.0, total_window.1, cfg.report.insert_points))?;
    write(&dir.join(format!("fig_total_{name}_insert.csv")), &curve_csv(&insert, None))?;
    let insert0 = curves(cfg, fitted, &linspace(PARTIAL_INSERT.0, PARTIAL_INSERT.1, cfg.report.insert_points))?;
    write(&dir.join(format!("fig_l0_{name}_insert.csv")), &curve_csv(&insert0, Some(0)))?;

    let mut s = String::new();
    let _ = writeln!(s, "model: {name}");
    let _ = writeln!(s, "data points: {}", ds.points.len());
    let _ = writeln!(s, "chi2: {:.6e}", result.chi2);
    let _ = writeln!(s, "evaluations: {}", result.n_evaluations);
    let _ = writeln!(s, "converged: {}", result.converged);
    let worst = main.iter().map(|p| ((p.fit.1 - p.exact.1) / p.exact.1).abs()).fold(0.0, f64::max);
    let _ = writeln!(s, "max relative deviation of sigma_total on [{lo}, {hi}]: {worst:.3e}");
    let _ = writeln!(s, "\nparameters:\n{}", param_report(&result).to_text());
    let _ = writeln!(s, "fitted resonances:");
    for r in &found {
        let _ = writeln!(s, "  l={} E_r={:.9} Gamma={:.6e}", r.l, r.e_r, r.gamma);
    }
    if exact_path(cfg).exists() {
        let _ = writeln!(s, "exact resonances: see {}", exact_path(cfg).display());
    }
    let mut all_pass = true;
    if let Some(gt) = &cfg.report.ground_truth {
        let _ = writeln!(s, "\nground truth comparison ({}):", gt.display());
        for row in read_ground_truth(gt)? {
            let best = found
                .iter()
                .filter(|r| r.l == row.l)
                .min_by(|a, b| (a.e_r - row.e_r).abs().total_cmp(&(b.e_r - row.e_r).abs()));
            let (pass, got) = match best {
                Some(r) => {
                    let ok = (r.e_r - row.e_r).abs() <= row.tol_e_r
                        && ((r.gamma - row.gamma) / row.gamma).abs() <= row.tol_gamma_rel;
                    (ok, format!("E_r={:.9} Gamma={:.6e}", r.e_r, r.gamma))
                }
                None => (false, "no resonance found".to_string()),
            };
            all_pass &= pass;
            let _ = writeln!(
                s,
                "  [{}] l={} want E_r={}±{} Gamma={}±{}% got {}",
                if pass { "PASS" } else { "FAIL" },
                row.l,
                row.e_r,
                row.tol_e_r,
                row.gamma,
                row.tol_gamma_rel * 100.0,
                got
            );
        }
    }
    write(&dir.join(format!("summary_{name}.txt")), &s)?;
    print!("{s}");
    if !all_pass {
        println!("report: some ground-truth rows were not reproduced");
    }
    Ok(())
}
