use std::fs;
use std::io::Write;
use std::path::Path;

use gtkit::design::{optimal_bernoulli_p, optimal_column_weight, DesignKind, DesignSpec};
use gtkit::oracle::{verify_suite, VerifyConfig};
use gtkit::theory::{self, bayes_bound, chebyshev_bound, snr_aggregate, MomentSet};
use gtkit::{run_sweep, run_tests, sample_defective_set, Algorithm, DesignMatrix, OutcomeVector, SimConfig};

use crate::plot::{emit_plot, Metric, PlotSpec};
use crate::{CliError, CliResult, DecodeArgs, DesignArgs, FGridArgs, PlotArgs, SimulateArgs, SnrArgs, VerifyArgs};

pub fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))
}

pub fn write_output(path: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::Io(format!("cannot write to stdout: {e}"))),
    }
}

fn with_newline(mut s: String) -> Vec<u8> {
    s.push('\n');
    s.into_bytes()
}

pub fn design(a: &DesignArgs) -> CliResult<()> {
    let kind: DesignKind = a.kind.parse()?;
    let spec = match kind {
        DesignKind::Bernoulli => {
            let p = match (a.p, a.k) {
                (Some(p), _) => p,
                (None, Some(k)) => optimal_bernoulli_p(k)?,
                (None, None) => return Err(CliError::Param("bernoulli design needs --p or --k".into())),
            };
            DesignSpec::bernoulli(a.n_items, a.n_tests, p, a.seed)
        }
        DesignKind::ConstantColumn | DesignKind::NearConstantColumn => {
            let l = match (a.column_weight, a.k) {
                (Some(l), _) => l,
                (None, Some(k)) => optimal_column_weight(a.n_tests, k)?,
                (None, None) => return Err(CliError::Param(format!("{kind} design needs --L or --k"))),
            };
            if kind == DesignKind::ConstantColumn {
                DesignSpec::constant_column(a.n_items, a.n_tests, l, a.seed)
            } else {
                DesignSpec::near_constant_column(a.n_items, a.n_tests, l, a.seed)
            }
        }
        DesignKind::Explicit => return Err(CliError::Param("explicit designs are read, not generated".into())),
    };
    let matrix = spec.generate()?;
    write_output(a.output.as_deref(), &with_newline(matrix.to_json()?))?;

    if let (Some(path), Some(k)) = (&a.defectives_out, a.k) {
        let truth = sample_defective_set(a.n_items, k, gtkit::seed::derive_seed(a.seed, &[1]))?;
        let json = serde_json::to_string(&truth).map_err(gtkit::Error::from)?;
        write_output(Some(path), &with_newline(json))?;
        if let Some(out) = &a.outcomes_out {
            let y = run_tests(&matrix, &truth)?;
            write_output(Some(out), &with_newline(y.to_json()?))?;
        }
    }
    Ok(())
}

pub fn decode(a: &DecodeArgs) -> CliResult<()> {
    let matrix = DesignMatrix::from_json(&read_file(&a.design)?)?;
    let outcomes = OutcomeVector::from_json(&read_file(&a.outcomes)?)?;
    let algo: Algorithm = a.algo.parse()?;
    let mut result = algo.decode(&matrix, &outcomes, a.alpha)?;
    if !a.trace {
        result.trace = None;
    }
    let json = serde_json::to_string_pretty(&result).map_err(gtkit::Error::from)?;
    write_output(a.output.as_deref(), &with_newline(json))
}

pub fn simulate(a: &SimulateArgs) -> CliResult<()> {
    let text = read_file(&a.config)?;
    let mut value: serde_json::Value = serde_json::from_str(&text).map_err(gtkit::Error::from)?;
    let obj = value
        .as_object_mut()
        .ok_or_else(|| CliError::Param("config must be a JSON object".into()))?;
    if let Some(seed) = a.seed {
        obj.insert("master_seed".into(), seed.into());
    } else if !obj.contains_key("master_seed") {
        return Err(CliError::Param(
            "simulate needs --seed or `master_seed` in the config".into(),
        ));
    }
    let config: SimConfig = serde_json::from_value(value).map_err(gtkit::Error::from)?;
    let sweep = run_sweep(&config)?;
    write_output(a.output.as_deref(), sweep.to_csv_string()?.as_bytes())
}

fn print_moments(label: &str, m: &MomentSet<f64>) {
    println!("{label}:");
    println!("  mu_D     = {:.12}", m.mu_d);
    println!("  nu_D     = {:.12}", m.nu_d);
    println!("  mu_ND    = {:.12}", m.mu_nd);
    println!("  nu_ND    = {:.12}", m.nu_nd);
    println!("  delta_mu = {:.12}", m.delta_mu);
    println!("  sigma^2  = {:.12}", m.sigma2);
}

pub fn theory_snr(a: &SnrArgs) -> CliResult<()> {
    let p = match a.p {
        Some(p) => p,
        None => optimal_bernoulli_p(a.k)?,
    };
    let w = theory::weighted_moments(a.n_items, a.k, p)?;
    let u = theory::unweighted_moments(a.k, p)?;
    println!(
        "N = {}, k = {}, p = {p:.12}, q = {:.12}",
        a.n_items,
        a.k,
        theory::coverage_prob(a.k, p)
    );
    println!("SNR_W = {:.6}", w.snr_per);
    println!("SNR_U = {:.6}", u.snr_per);
    print_moments("weighted", &w);
    print_moments("unweighted", &u);
    if let Some(t) = a.n_tests {
        for (label, snr) in [("W", w.snr_per), ("U", u.snr_per)] {
            let agg = snr_aggregate(snr, t);
            let cheb = chebyshev_bound(agg).map_or_else(|_| "n/a".to_string(), |b| format!("{b:.6e}"));
            println!(
                "T = {t}: SNR_T_{label} = {agg:.6}, chebyshev = {cheb}, bayes = {:.6e}",
                bayes_bound(agg)
            );
        }
    }
    Ok(())
}

pub fn theory_f(a: &FGridArgs) -> CliResult<()> {
    if a.k_max == 0 || a.n_span == 0 {
        return Err(CliError::Param("--k-max and --n-span must be >= 1".into()));
    }
    let rows = theory::f_grid::<f64>(a.k_max, a.n_span)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &rows {
        w.serialize(row).map_err(gtkit::Error::from)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    write_output(a.output.as_deref(), &bytes)
}

pub fn verify(a: &VerifyArgs) -> CliResult<()> {
    let cfg = VerifyConfig {
        n_max: a.n_max,
        identity_n_max: a.identity_n_max,
        identity_k_max: a.identity_k_max,
    };
    let reports = verify_suite(&cfg)?;
    let mut failed = Vec::new();
    for r in &reports {
        println!(
            "{:<32} {} cases={:<6} worst={:.3e} tol={:.0e} ({:?})",
            r.name,
            if r.passed() { "PASS" } else { "FAIL" },
            r.cases,
            r.worst_deviation,
            r.tolerance,
            r.tolerance_kind
        );
        if !r.passed() {
            failed.push(r.name.clone());
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verify(failed.join(", ")))
    }
}

pub fn plot(a: &PlotArgs) -> CliResult<()> {
    let zoom = match a.zoom.as_deref() {
        None => None,
        Some(&[lo, hi]) => Some((lo, hi)),
        Some(_) => return Err(CliError::Param("--zoom takes two values".into())),
    };
    let spec = PlotSpec {
        input: a.input.clone(),
        metric: a.metric.parse::<Metric>()?,
        overlay_counting_bound: a.overlay_bound,
        zoom,
        smooth: a.smooth,
        output: a.output.clone(),
    };
    emit_plot(&spec)
}
