use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use plotters::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{io_error, Result};

use super::output::curve_rounds;
use super::ExperimentResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlotFormat {
    #[default]
    Svg,
    Png,
}

impl PlotFormat {
    pub fn extension(self) -> &'static str {
        match self {
            PlotFormat::Svg => "svg",
            PlotFormat::Png => "png",
        }
    }
}

const PALETTE: [RGBColor; 6] = [
    RGBColor(214, 39, 40),
    RGBColor(31, 119, 180),
    RGBColor(44, 160, 44),
    RGBColor(255, 127, 14),
    RGBColor(148, 103, 189),
    RGBColor(140, 86, 75),
];

const FONT_CANDIDATES: [&str; 4] = [
    "/usr/share/fonts/truetype/dejavu/DejaVuSans.ttf",
    "/usr/share/fonts/TTF/DejaVuSans.ttf",
    "/usr/share/fonts/dejavu/DejaVuSans.ttf",
    "/Library/Fonts/Arial.ttf",
];

/// Registers a sans-serif font once per process. `DORAL_FONT` overrides the
/// search path.
fn ensure_font() -> std::result::Result<(), String> {
    static FONT: OnceLock<std::result::Result<(), String>> = OnceLock::new();
    FONT.get_or_init(|| {
        let custom = std::env::var("DORAL_FONT").ok();
        let paths = custom.iter().map(String::as_str).chain(FONT_CANDIDATES);
        for path in paths {
            if let Ok(bytes) = std::fs::read(path) {
                let bytes: &'static [u8] = Box::leak(bytes.into_boxed_slice());
                if plotters::style::register_font("sans-serif", FontStyle::Normal, bytes).is_ok() {
                    return Ok(());
                }
            }
        }
        Err("no usable TrueType font found; set DORAL_FONT to a .ttf file".into())
    })
    .clone()
}

/// Points drawn for one series: the same rounds and values as `curves.csv`.
pub fn series_points(mean: &[f64], stride: usize) -> Vec<(f64, f64)> {
    curve_rounds(mean.len(), stride)
        .into_iter()
        .map(|t| (t as f64, mean[t]))
        .collect()
}

fn draw<DB: DrawingBackend>(
    root: DrawingArea<DB, plotters::coord::Shift>,
    res: &ExperimentResult,
) -> std::result::Result<(), String>
where
    DB::ErrorType: 'static,
{
    root.fill(&WHITE).map_err(|e| e.to_string())?;
    let stride = res.config.curve_stride;
    let series: Vec<(String, Vec<(f64, f64)>)> = res
        .policies
        .iter()
        .map(|p| (p.label.clone(), series_points(&p.curve.mean_reward, stride)))
        .collect();
    let x_max = series
        .iter()
        .flat_map(|(_, s)| s.iter().map(|p| p.0))
        .fold(1.0, f64::max);
    let y_max = series
        .iter()
        .flat_map(|(_, s)| s.iter().map(|p| p.1))
        .fold(1e-9, f64::max);
    let y_min = series
        .iter()
        .flat_map(|(_, s)| s.iter().map(|p| p.1))
        .fold(0.0, f64::min);
    let mut chart = ChartBuilder::on(&root)
        .caption(&res.scenario, ("sans-serif", 24))
        .margin(16)
        .x_label_area_size(40)
        .y_label_area_size(64)
        .build_cartesian_2d(0.0..x_max, y_min..y_max * 1.05)
        .map_err(|e| e.to_string())?;
    chart
        .configure_mesh()
        .x_desc("round")
        .y_desc("cumulative reward")
        .draw()
        .map_err(|e| e.to_string())?;
    for (k, (label, pts)) in series.into_iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        chart
            .draw_series(LineSeries::new(pts, color.stroke_width(2)))
            .map_err(|e| e.to_string())?
            .label(label)
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color.stroke_width(2)));
    }
    chart
        .configure_series_labels()
        .position(SeriesLabelPosition::UpperLeft)
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(|e| e.to_string())?;
    root.present().map_err(|e| e.to_string())
}

/// Writes one `<scenario>.<ext>` cumulative-reward chart per result.
pub fn render_plots(results: &[ExperimentResult], dir: &Path, format: PlotFormat) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    if !results.is_empty() {
        ensure_font().map_err(|e| io_error(dir, e))?;
    }
    let mut out = Vec::with_capacity(results.len());
    for res in results {
        let path = dir.join(format!("{}.{}", res.scenario, format.extension()));
        let size = (960, 600);
        let drawn = match format {
            PlotFormat::Svg => draw(SVGBackend::new(&path, size).into_drawing_area(), res),
            PlotFormat::Png => draw(BitMapBackend::new(&path, size).into_drawing_area(), res),
        };
        drawn.map_err(|e| io_error(&path, e))?;
        out.push(path);
    }
    Ok(out)
}
