//! Construction and propagation timings for large glyph counts.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::mapping::{BindOptions, VisualChannel};
use crate::model::{DataAttribute, DataTable, DataValue, GlyphTemplate, RowFilter, Scene};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub glyphs: usize,
    pub template: String,
    pub runs: usize,
    pub construction_median_s: f64,
    pub propagation_median_s: f64,
    pub construction_s: Vec<f64>,
    pub propagation_s: Vec<f64>,
}

pub fn median(samples: &[f64]) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / 2.0
    }
}

pub fn table(n: usize) -> Result<DataTable> {
    let rows = (0..n).map(|i| vec![DataValue::Number((i % 100) as f64 + 1.0)]).collect();
    DataTable::new(vec![DataAttribute::quantitative("value", 1.0, 100.0)?], rows)
}

/// Instantiates one glyph per row and binds `value` to `length_y`.
pub fn construct(table: DataTable, template: &GlyphTemplate) -> Result<Scene> {
    let mut scene = Scene::new(table);
    scene.add_template(template.clone())?;
    scene.instantiate_glyphs(&RowFilter::All, &template.id)?;
    scene.bind("value", VisualChannel::LengthY, BindOptions::default())?;
    Ok(scene)
}

/// One warm-up pass, then `runs` timed passes of construction and of a
/// rescale over every glyph.
pub fn run(n: usize, template: &GlyphTemplate, runs: usize) -> Result<BenchReport> {
    let data = table(n)?;
    let mut construction = Vec::with_capacity(runs);
    let mut propagation = Vec::with_capacity(runs);
    for pass in 0..=runs {
        let input = data.clone();
        let start = Instant::now();
        let mut scene = construct(input, template)?;
        let built = start.elapsed();
        let start = Instant::now();
        scene.rescale("value", VisualChannel::LengthY, 1.5)?;
        let propagated = start.elapsed();
        if pass > 0 {
            construction.push(secs(built));
            propagation.push(secs(propagated));
        }
    }
    Ok(BenchReport {
        glyphs: n,
        template: template.id.clone(),
        runs,
        construction_median_s: median(&construction),
        propagation_median_s: median(&propagation),
        construction_s: construction,
        propagation_s: propagation,
    })
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}
