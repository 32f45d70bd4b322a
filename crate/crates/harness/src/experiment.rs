//! Runs every section of a configuration and writes its artifacts.

use std::path::{Path, PathBuf};

use crate::complexity::{complexity_report, ComplexityReport};
use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::plot::{complexity_chart, emit_chart, sweep_chart, PlotKind};
use crate::report::{csv_string, iteration_csv_string, meta_json, write_file};
use crate::sweep::{run_sweep, SweepResult};

#[derive(Debug)]
pub struct ExperimentOutputs {
    pub sweep: Option<SweepResult>,
    pub complexity: Option<ComplexityReport>,
    /// Written files, relative to the output directory.
    pub files: Vec<String>,
}

pub fn run_experiment(cfg: &ExperimentConfig, threads: Option<usize>, out_dir: &Path) -> Result<ExperimentOutputs> {
    if cfg.sweep.is_none() && cfg.complexity.is_none() {
        return Err(HarnessError::Config(
            "nothing to run: add a [sweep] or [complexity] section".into(),
        ));
    }
    let prefix = &cfg.output.plot_prefix;
    let mut files = Vec::new();
    let mut write = |name: String, contents: &str| -> Result<()> {
        write_file(&out_dir.join(&name), contents)?;
        files.push(name);
        Ok(())
    };

    let complexity = cfg
        .complexity
        .as_ref()
        .map(complexity_report)
        .transpose()?;
    if let Some(report) = &complexity {
        write(format!("{prefix}_complexity.csv"), &report.csv())?;
        if cfg.output.plots {
            write(
                format!("{prefix}_{}.svg", PlotKind::Complexity.suffix()),
                &complexity_chart(report).to_svg(),
            )?;
        }
    }

    let sweep = if cfg.sweep.is_some() {
        let result = run_sweep(cfg, threads)?;
        write(cfg.output.csv.clone(), &csv_string(&result))?;
        if cfg.output.per_iteration {
            write(format!("{prefix}_iterations.csv"), &iteration_csv_string(&result))?;
        }
        if cfg.output.plots {
            let mut kinds = vec![PlotKind::Rmse, PlotKind::Resolution];
            if cfg.output.per_iteration {
                kinds.push(PlotKind::PerIteration);
            }
            for kind in kinds {
                write(format!("{prefix}_{}.svg", kind.suffix()), &sweep_chart(&result, kind)?.to_svg())?;
            }
        }
        Some(result)
    } else {
        None
    };

    if let Some(result) = &sweep {
        let name = format!("{prefix}_meta.json");
        let mut listed = files.clone();
        listed.push(name.clone());
        write_file(&out_dir.join(&name), &meta_json(result, &listed))?;
        files = listed;
    }
    Ok(ExperimentOutputs {
        sweep,
        complexity,
        files,
    })
}

/// Writes a complexity table and chart outside of a configuration file.
pub fn write_complexity(report: &ComplexityReport, out_dir: &Path, prefix: &str) -> Result<Vec<PathBuf>> {
    let csv = out_dir.join(format!("{prefix}.csv"));
    let svg = out_dir.join(format!("{prefix}.svg"));
    write_file(&csv, &report.csv())?;
    emit_chart(&complexity_chart(report), &svg)?;
    Ok(vec![csv, svg])
}
