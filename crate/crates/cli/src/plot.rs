//! SVG line plots from CSV files.

use std::path::{Path, PathBuf};

use plotters::prelude::*;

use crate::error::{CliError, CliResult};
use crate::output::Table;

#[derive(Debug, Clone)]
pub struct PlotRequest {
    pub inputs: Vec<PathBuf>,
    pub output: PathBuf,
    pub x: String,
    pub y: String,
}

type Series = (String, Vec<(f64, f64)>);

fn load_series(path: &Path, x: &str, y: &str) -> CliResult<Series> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let table = Table::parse(&text).map_err(|m| CliError::config(format!("{}: {m}", path.display())))?;
    let col = |name: &str| table.column(name).ok_or_else(|| CliError::config(format!("{}: no column {name:?}", path.display())));
    let points = col(x)?.into_iter().zip(col(y)?).filter_map(|(a, b)| Some((a?, b?))).collect();
    let label = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok((label, points))
}

fn bounds(series: &[Series]) -> ((f64, f64), (f64, f64)) {
    let pts = series.iter().flat_map(|s| s.1.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let pad = |a: f64, b: f64| if b > a { (a, b) } else { (a - 0.5, a + 0.5) };
    (pad(x0, x1), pad(y0, y1))
}

/// Draws column `y` against column `x` for every input file.
pub fn plot(req: &PlotRequest) -> CliResult<()> {
    let series = req.inputs.iter().map(|p| load_series(p, &req.x, &req.y)).collect::<CliResult<Vec<_>>>()?;
    if series.iter().all(|s| s.1.is_empty()) {
        return Err(CliError::config("nothing to plot: all selected columns are blank"));
    }
    let ((x0, x1), (y0, y1)) = bounds(&series);
    let draw = || -> Result<(), Box<dyn std::error::Error>> {
        let root = SVGBackend::new(&req.output, (900, 600)).into_drawing_area();
        root.fill(&WHITE)?;
        let mut chart = ChartBuilder::on(&root).margin(20).x_label_area_size(40).y_label_area_size(60).build_cartesian_2d(x0..x1, y0..y1)?;
        chart.configure_mesh().x_desc(req.x.as_str()).y_desc(req.y.as_str()).draw()?;
        for (k, (label, pts)) in series.iter().enumerate() {
            let color = Palette99::pick(k).to_rgba();
            chart
                .draw_series(LineSeries::new(pts.iter().copied(), color.stroke_width(2)))?
                .label(label.as_str())
                .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color.stroke_width(2)));
        }
        chart.configure_series_labels().background_style(WHITE.mix(0.8)).border_style(BLACK).draw()?;
        root.present()?;
        Ok(())
    };
    draw().map_err(|e| CliError::runtime(format!("plotting {}: {e}", req.output.display())))
}
