//! Residual-versus-epoch charts: one series per (algorithm, problem), the mean
//! over seeds on a shared epoch grid with a min–max band.

use std::path::Path;

use super::csv_io::{read_csv, RunTrace};
use crate::error::{Error, Result};

const GRID_POINTS: usize = 200;
/// Zero residuals are drawn at this floor on the log axis.
const RESIDUAL_FLOOR: f64 = 1e-16;

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub epochs: Vec<f64>,
    pub mean: Vec<f64>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

fn interpolate(points: &[(f64, f64)], x: f64) -> f64 {
    let idx = points.partition_point(|p| p.0 <= x);
    if idx == 0 {
        return points[0].1;
    }
    if idx == points.len() {
        return points[idx - 1].1;
    }
    let (x0, y0) = points[idx - 1];
    let (x1, y1) = points[idx];
    if x1 == x0 {
        y1
    } else {
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }
}

/// Groups runs by (algorithm, problem) in order of first appearance and
/// averages each group on the epoch range covered by all its runs.
pub fn aggregate(runs: &[RunTrace]) -> Vec<Series> {
    let mut groups: Vec<((String, String), Vec<&RunTrace>)> = Vec::new();
    for run in runs.iter().filter(|r| !r.records.is_empty()) {
        let key = (run.algorithm.clone(), run.problem.clone());
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, members)) => members.push(run),
            None => groups.push((key, vec![run])),
        }
    }
    groups
        .into_iter()
        .map(|((algorithm, problem), members)| {
            let curves: Vec<Vec<(f64, f64)>> =
                members.iter().map(|r| r.records.iter().map(|x| (x.oracle_epochs, x.residual)).collect()).collect();
            let lo = curves.iter().map(|c| c[0].0).fold(f64::NEG_INFINITY, f64::max);
            let hi = curves.iter().map(|c| c[c.len() - 1].0).fold(f64::INFINITY, f64::min);
            let epochs: Vec<f64> = if hi > lo {
                (0..GRID_POINTS).map(|k| lo + (hi - lo) * k as f64 / (GRID_POINTS - 1) as f64).collect()
            } else {
                vec![lo.max(hi)]
            };
            let mut mean = Vec::with_capacity(epochs.len());
            let mut min = Vec::with_capacity(epochs.len());
            let mut max = Vec::with_capacity(epochs.len());
            for &x in &epochs {
                let ys: Vec<f64> = curves.iter().map(|c| interpolate(c, x)).collect();
                mean.push(ys.iter().sum::<f64>() / ys.len() as f64);
                min.push(ys.iter().cloned().fold(f64::INFINITY, f64::min));
                max.push(ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
            }
            Series { label: format!("{algorithm} / {problem}"), epochs, mean, min, max }
        })
        .collect()
}

pub fn render_svg(series: &[Series], out: &Path) -> Result<()> {
    use plotters::prelude::*;

    if series.is_empty() {
        return Err(Error::InvalidArgument("nothing to plot".into()));
    }
    let plot_err = |e: &dyn std::fmt::Display| Error::Plot(e.to_string());
    let x_max = series.iter().flat_map(|s| s.epochs.iter().cloned()).fold(0.0, f64::max).max(1e-9);
    let floor = |y: f64| y.max(RESIDUAL_FLOOR);
    let ys = series.iter().flat_map(|s| s.min.iter().chain(&s.max)).cloned().map(floor);
    let (y_min, y_max) = ys.fold((f64::INFINITY, 0.0f64), |(a, b), y| (a.min(y), b.max(y)));
    let (y_min, y_max) = (y_min / 2.0, (y_max * 2.0).max(y_min * 4.0));

    let root = SVGBackend::new(out, (900, 560)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| plot_err(&e))?;
    let mut chart = ChartBuilder::on(&root)
        .caption("residual vs oracle epochs", ("sans-serif", 22))
        .margin(16)
        .x_label_area_size(44)
        .y_label_area_size(72)
        .build_cartesian_2d(0.0..x_max * 1.02, (y_min..y_max).log_scale())
        .map_err(|e| plot_err(&e))?;
    chart
        .configure_mesh()
        .x_desc("epochs")
        .y_desc("residual")
        .y_label_formatter(&|y| format!("{y:.0e}"))
        .draw()
        .map_err(|e| plot_err(&e))?;

    for (idx, s) in series.iter().enumerate() {
        let color = Palette99::pick(idx).to_rgba();
        if s.epochs.len() == 1 {
            chart
                .draw_series(std::iter::once(Circle::new((s.epochs[0], floor(s.mean[0])), 4, color.filled())))
                .map_err(|e| plot_err(&e))?
                .label(s.label.clone())
                .legend(move |(x, y)| Circle::new((x + 10, y), 4, color.filled()));
            continue;
        }
        let band: Vec<(f64, f64)> = s
            .epochs
            .iter()
            .zip(&s.max)
            .map(|(&x, &y)| (x, floor(y)))
            .chain(s.epochs.iter().zip(&s.min).rev().map(|(&x, &y)| (x, floor(y))))
            .collect();
        chart.draw_series(std::iter::once(Polygon::new(band, color.mix(0.18).filled()))).map_err(|e| plot_err(&e))?;
        chart
            .draw_series(LineSeries::new(
                s.epochs.iter().zip(&s.mean).map(|(&x, &y)| (x, floor(y))),
                color.stroke_width(2),
            ))
            .map_err(|e| plot_err(&e))?
            .label(s.label.clone())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color.stroke_width(2)));
    }
    chart
        .configure_series_labels()
        .position(SeriesLabelPosition::UpperRight)
        .background_style(WHITE.mix(0.85))
        .border_style(BLACK)
        .draw()
        .map_err(|e| plot_err(&e))?;
    root.present().map_err(|e| plot_err(&e))?;
    Ok(())
}

/// Reads every CSV, aggregates all runs together and writes an SVG chart.
pub fn emit_plot<P: AsRef<Path>>(csv_paths: &[P], out: &Path) -> Result<Vec<Series>> {
    let mut runs = Vec::new();
    for path in csv_paths {
        runs.extend(read_csv(path.as_ref())?);
    }
    let series = aggregate(&runs);
    render_svg(&series, out)?;
    Ok(series)
}
