//! Analysis dispatch and artifact writing.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use mhtlab_core::equilibria::interior_points_dimensional;
use mhtlab_core::{
    basin_map, boundary_equilibria, collapse_threshold, equilibria_dimensional, hopf_locus,
    integrate, interior_equilibria, nondimensionalize, region_map, vector_field, AttractorKind,
    CollapseOptions, DetectBudget, DimensionalParams, EquilibriumReport, Frame, GridSpec,
    HopfOptions, IntegrateOptions, ModelVariant, NonDimParams, ProbeOptions, RegionTag, State,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{Analysis, ConfigError, Format, RunConfig};
use crate::svg::{cell_map, LinePlot, Marker, Series, PALETTE};

pub const SCHEMA_VERSION: u32 = 1;

/// Top-level JSON result document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub schema_version: u32,
    pub variant: ModelVariant,
    pub params_dimensional: DimensionalParams,
    pub params_nondimensional: Option<NonDimParams>,
    pub analysis: String,
    pub results: Value,
    pub diagnostics: Vec<String>,
}

impl Document {
    /// Parses a document and checks it against the current schema.
    pub fn parse(text: &str) -> Result<Self> {
        let doc: Document =
            serde_json::from_str(text).context("result document does not match the schema")?;
        if doc.schema_version != SCHEMA_VERSION {
            anyhow::bail!(
                "schema_version {} is not the supported version {SCHEMA_VERSION}",
                doc.schema_version
            );
        }
        doc.params_dimensional.validate()?;
        doc.analysis
            .parse::<Analysis>()
            .map_err(|e| anyhow::anyhow!("analysis `{}`: {e}", doc.analysis))?;
        Ok(doc)
    }
}

/// What a run produced.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub files: Vec<PathBuf>,
}

struct Output<'a> {
    dir: &'a Path,
    formats: &'a [Format],
    artifacts: Artifacts,
}

impl Output<'_> {
    fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.artifacts.files.push(path);
        Ok(())
    }
}

fn csv_row(fields: &[String]) -> String {
    let mut s = fields.join(",");
    s.push('\n');
    s
}

fn enum_name<T: Serialize>(x: &T) -> String {
    match serde_json::to_value(x) {
        Ok(Value::String(s)) => s,
        other => format!("{other:?}"),
    }
}

/// Runs `analysis` for `cfg`, writing artifacts into `dir`.
pub fn run(
    cfg: &RunConfig,
    analysis: Analysis,
    dir: &Path,
    formats: &[Format],
) -> Result<Artifacts> {
    if let Some(a) = cfg.analysis {
        if a != analysis {
            return Err(ConfigError::Domain {
                key: "analysis".into(),
                reason: format!(
                    "config asks for `{}` but the command line asks for `{}`",
                    a.name(),
                    analysis.name()
                ),
            }
            .into());
        }
    }
    fs::create_dir_all(dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    let mut out = Output {
        dir,
        formats,
        artifacts: Artifacts::default(),
    };
    let p = cfg.params;
    let np = if cfg.variant.has_allee() && p.m != 0.0 || cfg.variant.has_alt_food() {
        nondimensionalize(&p).ok()
    } else {
        None
    };
    let mut diagnostics = Vec::new();
    let results = match analysis {
        Analysis::Simulate => simulate(cfg, &mut out, &mut diagnostics)?,
        Analysis::Equilibria => equilibria(cfg, np.as_ref(), &mut out)?,
        Analysis::Hopf => hopf(cfg, &mut out, &mut diagnostics)?,
        Analysis::Collapse => collapse(cfg, &mut diagnostics)?,
        Analysis::RegionMap => regions(cfg, &mut out, &mut diagnostics)?,
        Analysis::Basin => basins(cfg, &mut out, &mut diagnostics)?,
    };
    if out.wants(Format::Json) {
        let doc = Document {
            schema_version: SCHEMA_VERSION,
            variant: cfg.variant,
            params_dimensional: p,
            params_nondimensional: np,
            analysis: analysis.name().into(),
            results,
            diagnostics,
        };
        let mut text = serde_json::to_string_pretty(&doc)?;
        text.push('\n');
        out.write(&format!("{}.json", analysis.name()), &text)?;
    }
    Ok(out.artifacts)
}

fn simulate(cfg: &RunConfig, out: &mut Output, diagnostics: &mut Vec<String>) -> Result<Value> {
    let opts = IntegrateOptions {
        tolerances: cfg.tolerances,
        sample_dt: (cfg.simulate.sample_dt > 0.0).then_some(cfg.simulate.sample_dt),
        frame: cfg.simulate.frame,
        ..Default::default()
    };
    let p = &cfg.params;
    let mut runs = Vec::new();
    let mut trajectories = Vec::new();
    for (i, &ic) in cfg.simulate.initial.iter().enumerate() {
        let traj = integrate(cfg.variant, p, ic, cfg.simulate.t_end, &opts)
            .with_context(|| format!("simulate.ic #{}: ({}, {})", i + 1, ic.prey, ic.predator))?;
        if out.wants(Format::Csv) {
            let mut csv = String::from("time,prey,predator,frame\n");
            for (t, x) in &traj.samples {
                csv.push_str(&csv_row(&[
                    t.to_string(),
                    x.prey.to_string(),
                    x.predator.to_string(),
                    x.frame.name().into(),
                ]));
            }
            out.write(&format!("trajectory_{}.csv", i + 1), &csv)?;
        }
        if traj.stats.min_component < 0.0 {
            diagnostics.push(format!(
                "trajectory {}: smallest raw component {:e} (clamped)",
                i + 1,
                traj.stats.min_component
            ));
        }
        runs.push(json!({
            "initial": ic,
            "final": traj.last().1,
            "final_time": traj.last().0,
            "events": traj.events,
            "stats": traj.stats,
            "samples": traj.samples.len(),
        }));
        trajectories.push(traj);
    }
    if out.wants(Format::Svg) {
        for log_y in [false, true] {
            let mut plot = LinePlot {
                title: format!(
                    "{} time series{}",
                    cfg.variant.name(),
                    if log_y { " (log scale)" } else { "" }
                ),
                x_label: "time".into(),
                y_label: "density".into(),
                log_y,
                ..Default::default()
            };
            for (i, traj) in trajectories.iter().enumerate() {
                let color = PALETTE[i % PALETTE.len()];
                for (dashed, name, pick) in [(false, "prey", 0usize), (true, "predator", 1)] {
                    plot.series.push(Series {
                        name: format!("{name} #{}", i + 1),
                        color: color.into(),
                        points: traj
                            .samples
                            .iter()
                            .map(|(t, x)| (*t, x.as_array()[pick]))
                            .collect(),
                        dashed,
                    });
                }
            }
            let name = if log_y {
                "timeseries_log.svg"
            } else {
                "timeseries.svg"
            };
            out.write(name, &plot.render())?;
        }
        let mut plot = phase_portrait(cfg)?;
        for (i, traj) in trajectories.iter().enumerate() {
            plot.series.push(Series {
                name: format!("orbit #{}", i + 1),
                color: PALETTE[(i + 2) % PALETTE.len()].into(),
                points: traj
                    .samples
                    .iter()
                    .map(|(_, x)| {
                        let d = x.to_frame(Frame::Dimensional, p);
                        (d.prey, d.predator)
                    })
                    .collect(),
                dashed: false,
            });
        }
        out.write("phase.svg", &plot.render())?;
    }
    Ok(json!({ "trajectories": runs }))
}

/// Nullclines and equilibria in the dimensional frame.
fn phase_portrait(cfg: &RunConfig) -> Result<LinePlot> {
    let (v, p) = (cfg.variant, &cfg.params);
    let c = p.effective_c(v);
    let pmax = 1.1 * (p.n * p.k + c);
    let grid: Vec<f64> = (1..=400).map(|i| p.k * i as f64 / 400.0).collect();
    // The prey equation is affine in P: dN/dt = f0(N) + P (f1(N) - f0(N)).
    let prey_null: Vec<(f64, f64)> = grid
        .iter()
        .map(|&n| {
            let f0 = vector_field(v, State::dimensional(n, 0.0), p)
                .map(|x| x.0)
                .unwrap_or(f64::NAN);
            let f1 = vector_field(v, State::dimensional(n, 1.0), p)
                .map(|x| x.0)
                .unwrap_or(f64::NAN);
            let pn = f0 / (f0 - f1);
            (n, if pn >= 0.0 { pn } else { f64::NAN })
        })
        .collect();
    let mut plot = LinePlot {
        title: format!("{} phase portrait", v.name()),
        x_label: "prey N".into(),
        y_label: "predator P".into(),
        x_range: Some((0.0, p.k)),
        y_range: Some((0.0, pmax)),
        ..Default::default()
    };
    plot.series.push(Series {
        name: "prey nullcline".into(),
        color: PALETTE[0].into(),
        points: prey_null,
        dashed: true,
    });
    plot.series.push(Series {
        name: "predator nullcline".into(),
        color: PALETTE[1].into(),
        points: vec![(0.0, c), (p.k, p.n * p.k + c)],
        dashed: true,
    });
    for r in equilibria_dimensional(v, p)? {
        plot.markers.push(Marker {
            label: format!("{} ({})", enum_name(&r.numeric_class), r.location.prey),
            x: r.location.prey,
            y: r.location.predator,
            filled: r.numeric_class == mhtlab_core::NumericClass::Attractor,
        });
    }
    Ok(plot)
}

fn equilibria_rows(reports: &[EquilibriumReport], csv: &mut String) {
    for r in reports {
        csv.push_str(&csv_row(&[
            enum_name(&r.kind),
            r.location.prey.to_string(),
            r.location.predator.to_string(),
            r.location.frame.name().into(),
            enum_name(&r.numeric_class),
            enum_name(&r.lemma_class),
        ]));
    }
}

fn equilibria(cfg: &RunConfig, np: Option<&NonDimParams>, out: &mut Output) -> Result<Value> {
    let (v, p) = (cfg.variant, &cfg.params);
    let dimensional = equilibria_dimensional(v, p)?;
    let mut csv = String::from("kind,prey,predator,frame,numeric_class,lemma_class\n");
    equilibria_rows(&dimensional, &mut csv);
    let mut results = json!({ "dimensional": dimensional });
    if let (true, Some(np)) = (v.has_allee() && p.m != 0.0, np) {
        let mut rescaled = boundary_equilibria(v, np)?;
        rescaled.extend(interior_equilibria(v, np)?);
        equilibria_rows(&rescaled, &mut csv);
        results["rescaled"] = serde_json::to_value(&rescaled)?;
    }
    if out.wants(Format::Csv) {
        out.write("equilibria.csv", &csv)?;
    }
    if out.wants(Format::Svg) {
        out.write("phase.svg", &phase_portrait(cfg)?.render())?;
    }
    Ok(results)
}

fn hopf(cfg: &RunConfig, out: &mut Output, diagnostics: &mut Vec<String>) -> Result<Value> {
    let opts = HopfOptions {
        steps: cfg.hopf.steps,
        branch: cfg.hopf.branch,
        ..Default::default()
    };
    let locus = hopf_locus(
        cfg.variant,
        &cfg.params,
        (cfg.hopf.q_min, cfg.hopf.q_max),
        &opts,
    )?;
    if let Some(t) = &locus.terminus {
        diagnostics.push(format!("locus ended: {t}"));
    }
    if locus.points.is_empty() {
        diagnostics.push("no Hopf point in the requested range".into());
    }
    if out.wants(Format::Csv) {
        let mut csv = String::from("q,s,u_star,residual,det\n");
        for h in &locus.points {
            csv.push_str(&csv_row(&[
                h.q.to_string(),
                h.s.to_string(),
                h.u_star.to_string(),
                h.residual.to_string(),
                h.det_at.to_string(),
            ]));
        }
        out.write("hopf.csv", &csv)?;
    }
    if out.wants(Format::Svg) {
        let mut plot = LinePlot {
            title: format!("{} Hopf locus", cfg.variant.name()),
            x_label: "q".into(),
            y_label: "s".into(),
            ..Default::default()
        };
        let segments = locus
            .points
            .iter()
            .map(|h| h.segment)
            .max()
            .map_or(0, |m| m + 1);
        for seg in 0..segments {
            plot.series.push(Series {
                name: format!("segment {}", seg + 1),
                color: PALETTE[seg % PALETTE.len()].into(),
                points: locus
                    .points
                    .iter()
                    .filter(|h| h.segment == seg)
                    .map(|h| (h.q, h.s))
                    .collect(),
                dashed: false,
            });
        }
        out.write("hopf.svg", &plot.render())?;
    }
    Ok(serde_json::to_value(&locus)?)
}

fn collapse(cfg: &RunConfig, diagnostics: &mut Vec<String>) -> Result<Value> {
    let opts = CollapseOptions {
        q_min: cfg.collapse.q_min,
        q_max: cfg.collapse.q_max,
        grid: cfg.collapse.grid,
    };
    let found = collapse_threshold(cfg.variant, &cfg.params, &opts)?;
    if found.is_none() {
        diagnostics.push(format!(
            "no fold between q = {} and q = {}",
            cfg.collapse.q_min, cfg.collapse.q_max
        ));
    }
    Ok(json!({ "threshold": found }))
}

fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

fn regions(cfg: &RunConfig, out: &mut Output, diagnostics: &mut Vec<String>) -> Result<Value> {
    let r = &cfg.region;
    let q_axis = axis(r.q_min, r.q_max, r.nq);
    let s_axis = axis(r.s_min, r.s_max, r.ns);
    let mut opts = ProbeOptions::default();
    opts.budget.t_max = r.t_max;
    opts.budget.tolerances = cfg.tolerances;
    let map = region_map(cfg.variant, &cfg.params, &q_axis, &s_axis, &opts)?;
    let uncertain = map.iter().filter(|c| c.uncertain).count();
    if uncertain > 0 {
        diagnostics.push(format!("{uncertain} of {} cells uncertain", map.len()));
    }
    if out.wants(Format::Csv) {
        let mut csv = String::from("q,s,label,uncertain\n");
        for c in &map {
            csv.push_str(&csv_row(&[
                c.q.to_string(),
                c.s.to_string(),
                c.label.tag.name().into(),
                c.uncertain.to_string(),
            ]));
        }
        out.write("region_map.csv", &csv)?;
    }
    if out.wants(Format::Svg) {
        let colors = [
            "#9be29b", "#2e8b2e", "#4a7fd4", "#a0a0a0", "#c83232", "#f0a0a0", "#8b5a2b", "#d8b58c",
        ];
        let legend: Vec<(String, String)> = RegionTag::ALL
            .iter()
            .zip(colors)
            .map(|(t, c)| (t.name().to_string(), c.to_string()))
            .collect();
        let cells: Vec<usize> = map
            .iter()
            .map(|c| {
                RegionTag::ALL
                    .iter()
                    .position(|&t| t == c.label.tag)
                    .unwrap_or(usize::MAX)
            })
            .collect();
        let title = format!("{} regions", cfg.variant.name());
        out.write(
            "region_map.svg",
            &cell_map(&title, "q", "s", &q_axis, &s_axis, &cells, &legend),
        )?;
    }
    Ok(json!({ "q_axis": q_axis, "s_axis": s_axis, "cells": map }))
}

const KINDS: [AttractorKind; 5] = [
    AttractorKind::InteriorPoint,
    AttractorKind::InteriorCycle,
    AttractorKind::Origin,
    AttractorKind::PreyExtinctPoint,
    AttractorKind::Undetermined,
];

fn basins(cfg: &RunConfig, out: &mut Output, diagnostics: &mut Vec<String>) -> Result<Value> {
    let b = &cfg.basin;
    let spec = GridSpec {
        nx: b.nx,
        ny: b.ny,
        prey_max: (b.prey_max > 0.0).then_some(b.prey_max),
        predator_max: (b.predator_max > 0.0).then_some(b.predator_max),
    };
    let budget = DetectBudget {
        t_max: b.t_max,
        tolerances: cfg.tolerances,
        ..Default::default()
    };
    let grid = basin_map(cfg.variant, &cfg.params, &spec, &budget)?;
    let frac = grid.undetermined_fraction();
    if frac > 0.0 {
        diagnostics.push(format!("{:.2}% of cells undetermined", 100.0 * frac));
    }
    let nx = grid.prey_axis.len();
    if out.wants(Format::Csv) {
        let mut csv = String::from("prey,predator,label\n");
        for (idx, k) in grid.cells.iter().enumerate() {
            csv.push_str(&csv_row(&[
                grid.prey_axis[idx % nx].to_string(),
                grid.predator_axis[idx / nx].to_string(),
                k.name().into(),
            ]));
        }
        out.write("basin.csv", &csv)?;
    }
    if out.wants(Format::Svg) {
        let colors = ["#2e8b2e", "#4a7fd4", "#c83232", "#8b5a2b", "#d0d0d0"];
        let legend: Vec<(String, String)> = KINDS
            .iter()
            .zip(colors)
            .map(|(k, c)| (k.name().to_string(), c.to_string()))
            .collect();
        let cells: Vec<usize> = grid
            .cells
            .iter()
            .map(|k| KINDS.iter().position(|x| x == k).unwrap_or(usize::MAX))
            .collect();
        let title = format!("{} basins", cfg.variant.name());
        out.write(
            "basin.svg",
            &cell_map(
                &title,
                "prey N",
                "predator P",
                &grid.prey_axis,
                &grid.predator_axis,
                &cells,
                &legend,
            ),
        )?;
    }
    let counts: serde_json::Map<String, Value> = KINDS
        .iter()
        .map(|&k| (k.name().to_string(), json!(grid.count(k))))
        .collect();
    let interior = interior_points_dimensional(cfg.variant, &cfg.params)?;
    Ok(json!({
        "prey_axis": grid.prey_axis,
        "predator_axis": grid.predator_axis,
        "counts": counts,
        "interior_equilibria": interior,
        "labels": grid.cells.iter().map(|k| k.name()).collect::<Vec<_>>(),
    }))
}
