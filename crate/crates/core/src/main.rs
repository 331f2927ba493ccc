use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use spraysim::economics::{breakeven_volume, cost_table, parse_params, CostGrid, CostParams};
use spraysim::field_io::save_field;
use spraysim::field_io::synth::generate_fields;
use spraysim::report::fig13;
use spraysim::report::manifest::{execute, RunManifest};
use spraysim::report::{payback_csv, render_svg};

/// Overrides the output directory of every subcommand.
const OUT_ENV: &str = "SPRAYSIM_OUT";

#[derive(Parser)]
#[command(name = "spraysim", version, about = "Field coverage planning and sprayer section control simulation")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Plan and simulate every field of a manifest, writing tables and maps.
    Run {
        manifest: PathBuf,
        /// Economics parameters used for economics.csv.
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// Write synthetic field files and a manifest listing them.
    GenFields {
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "fields")]
        out: PathBuf,
    },
    /// Grid versus polygon overlap filtering on a small serpentine.
    Fig13 {
        #[arg(long, value_delimiter = ',', default_values_t = [0.5, 0.25, 0.125])]
        dg: Vec<f64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Payback table for a grid of savings, prices, areas and chemical costs.
    Economics {
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

/// Failure class: bad input gives exit code 2, anything later exit code 1.
enum Failure {
    Usage(anyhow::Error),
    Run(anyhow::Error),
}

fn out_dir(default: &Path) -> PathBuf {
    std::env::var_os(OUT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| default.to_path_buf())
}

fn load_params(path: Option<&Path>) -> Result<(CostParams, CostGrid)> {
    let Some(path) = path else {
        return Ok((CostParams::default(), CostGrid::default()));
    };
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_params(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write(dir: &Path, name: &str, body: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_run(manifest: &Path, params: Option<&Path>) -> Result<(), Failure> {
    let m = RunManifest::load(manifest).map_err(|e| Failure::Usage(e.into()))?;
    let (econ, _) = load_params(params).map_err(Failure::Usage)?;
    let out = out_dir(&m.output_dir);
    let summary = execute(&m, &out, &econ).map_err(|e| Failure::Run(e.into()))?;
    for r in &summary.results {
        for s in &r.setups {
            println!(
                "{} {} {:?}: S={:.2} l gap={:.2} m2 overlap={:.2} m2 L={:.1} m",
                r.field_id,
                s.method,
                s.mode,
                s.metrics.s,
                s.metrics.gap_area,
                s.metrics.overlap_area,
                s.metrics.path_length
            );
        }
    }
    println!("wrote {} files to {}", summary.written.len(), out.display());
    if summary.failures.is_empty() {
        return Ok(());
    }
    for (path, msg) in &summary.failures {
        eprintln!("field {} failed: {msg}", path.display());
    }
    Err(Failure::Run(anyhow::anyhow!(
        "{} of {} fields failed",
        summary.failures.len(),
        m.fields.len()
    )))
}

fn cmd_gen_fields(n: usize, seed: u64, out: &Path) -> Result<()> {
    let out = out_dir(out);
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let mut names = Vec::new();
    for (kind, field) in generate_fields(n, seed) {
        let name = format!("{}.json", field.id);
        save_field(&field, &out.join(&name))?;
        println!("{name}: {kind:?}, {:.2} ha", field.area_ha);
        names.push(PathBuf::from(name));
    }
    let manifest = RunManifest {
        fields: names,
        config: None,
        output_dir: PathBuf::from("results"),
        setups: Vec::new(),
        seed,
    };
    write(&out, "manifest.json", &serde_json::to_string_pretty(&manifest)?)
}

fn cmd_fig13(dg: &[f64], out: &Path) -> Result<(), Failure> {
    if let Some(d) = dg.iter().find(|d| !(d.is_finite() && **d > 0.0)) {
        return Err(Failure::Usage(anyhow::anyhow!("d_G must be positive, got {d}")));
    }
    let run = || -> Result<()> {
        let out = out_dir(out);
        fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
        let variants = fig13::run_all(dg);
        let field = fig13::scenario_field();
        let plan = fig13::scenario_plan();
        for v in &variants {
            let svg = render_svg(&fig13::variant_map(v), &field, Some(&plan), fig13::scenario_s_ref());
            write(&out, &format!("fig13_{}.svg", v.filter.label()), &svg)?;
        }
        let csv = fig13::variants_csv(&variants);
        print!("{csv}");
        write(&out, "fig13.csv", &csv)
    };
    run().map_err(Failure::Run)
}

fn cmd_economics(params: Option<&Path>, out: &Path) -> Result<(), Failure> {
    let (p, grid) = load_params(params).map_err(Failure::Usage)?;
    let run = || -> Result<()> {
        let out = out_dir(out);
        fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
        match breakeven_volume(&p) {
            Ok(v) => println!("break-even volume: {v:.0} l"),
            Err(e) => println!("break-even volume: {e}"),
        }
        write(&out, "payback.csv", &payback_csv(&cost_table(&grid, &p)))
    };
    run().map_err(Failure::Run)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let res = match cli.cmd {
        Cmd::Run { manifest, params } => cmd_run(&manifest, params.as_deref()),
        Cmd::GenFields { n: 0, .. } => Err(Failure::Usage(anyhow::anyhow!("need at least one field"))),
        Cmd::GenFields { n, seed, out } => cmd_gen_fields(n, seed, &out).map_err(Failure::Run),
        Cmd::Fig13 { dg, out } => cmd_fig13(&dg, &out),
        Cmd::Economics { params, out } => cmd_economics(params.as_deref(), &out),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
