//! Sweep CSV to SVG line chart.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use gtkit::sim::moving_average;

use crate::commands::{read_file, write_output};
use crate::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    SuccessProb,
    MeanFn,
    MeanFp,
    Jaccard,
    F1,
    Delta,
}

impl Metric {
    /// CSV column holding the metric; `delta` is derived from `mean_misclassified`.
    pub fn column(self) -> &'static str {
        match self {
            Metric::SuccessProb => "success_prob",
            Metric::MeanFn => "mean_fn",
            Metric::MeanFp => "mean_fp",
            Metric::Jaccard => "mean_jaccard",
            Metric::F1 => "mean_f1",
            Metric::Delta => "mean_misclassified",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Metric::SuccessProb => "success probability",
            Metric::MeanFn => "mean false negatives",
            Metric::MeanFp => "mean false positives",
            Metric::Jaccard => "mean Jaccard index",
            Metric::F1 => "mean F1 score",
            Metric::Delta => "Delta(T) = M_SCOMP - M_W-SCOMP",
        }
    }

    fn is_probability(self) -> bool {
        matches!(self, Metric::SuccessProb | Metric::Jaccard | Metric::F1)
    }
}

impl FromStr for Metric {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        Ok(match s {
            "success_prob" => Metric::SuccessProb,
            "mean_fn" => Metric::MeanFn,
            "mean_fp" => Metric::MeanFp,
            "jaccard" | "mean_jaccard" => Metric::Jaccard,
            "f1" | "mean_f1" => Metric::F1,
            "delta" => Metric::Delta,
            other => {
                return Err(CliError::Param(format!(
                    "unknown metric `{other}` (expected success_prob, mean_fn, mean_fp, jaccard, f1 or delta)"
                )))
            }
        })
    }
}

#[derive(Clone, Debug)]
pub struct PlotSpec {
    pub input: PathBuf,
    pub metric: Metric,
    pub overlay_counting_bound: bool,
    pub zoom: Option<(usize, usize)>,
    pub smooth: Option<usize>,
    pub output: PathBuf,
}

type Series = Vec<(usize, f64)>;

struct Table {
    headers: csv::StringRecord,
    records: Vec<csv::StringRecord>,
}

impl Table {
    fn parse(text: &str) -> CliResult<Self> {
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| CliError::Param(format!("malformed CSV: {e}")))?
            .clone();
        let records = reader
            .records()
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Param(format!("malformed CSV: {e}")))?;
        Ok(Table { headers, records })
    }

    fn column(&self, name: &str) -> CliResult<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Param(format!("missing column `{name}`")))
    }

    fn number<T: FromStr>(&self, row: usize, col: usize) -> CliResult<T> {
        let raw = &self.records[row][col];
        raw.parse().map_err(|_| {
            CliError::Param(format!(
                "row {}: column `{}` holds `{raw}`, not a number",
                row + 1,
                &self.headers[col]
            ))
        })
    }
}

/// Series keyed by label, in order of first appearance.
fn collect_series(table: &Table, metric: Metric) -> CliResult<Vec<(String, Series)>> {
    let t_col = table.column("T")?;
    let algo_col = table.column("algorithm")?;
    let y_col = table.column(metric.column())?;
    let design_col = table.column("design").ok();
    let designs: Vec<&str> = match design_col {
        Some(c) => {
            let mut seen: Vec<&str> = Vec::new();
            for r in &table.records {
                if !seen.contains(&&r[c]) {
                    seen.push(&r[c]);
                }
            }
            seen
        }
        None => Vec::new(),
    };
    let multi_design = designs.len() > 1;

    let mut order: Vec<String> = Vec::new();
    let mut by_label: BTreeMap<String, BTreeMap<usize, f64>> = BTreeMap::new();
    for (row, r) in table.records.iter().enumerate() {
        let algo = &r[algo_col];
        let design = design_col.map(|c| &r[c]).unwrap_or("");
        let label = if multi_design {
            format!("{design}/{algo}")
        } else {
            algo.to_string()
        };
        if !by_label.contains_key(&label) {
            order.push(label.clone());
        }
        let t: usize = table.number(row, t_col)?;
        let y: f64 = table.number(row, y_col)?;
        by_label.entry(label).or_default().insert(t, y);
    }

    if metric != Metric::Delta {
        return Ok(order
            .into_iter()
            .map(|label| {
                let points = by_label[&label].iter().map(|(&t, &y)| (t, y)).collect();
                (label, points)
            })
            .collect());
    }

    let design_keys: Vec<String> = if multi_design {
        designs.iter().map(|d| format!("{d}/")).collect()
    } else {
        vec![String::new()]
    };
    let mut out = Vec::new();
    for prefix in design_keys {
        let get = |algo: &str| {
            by_label
                .get(&format!("{prefix}{algo}"))
                .ok_or_else(|| CliError::Param(format!("delta needs `{algo}` rows in the CSV")))
        };
        let (s, w) = (get("scomp")?, get("wscomp")?);
        let points: Series = s
            .iter()
            .filter_map(|(t, ms)| w.get(t).map(|mw| (*t, ms - mw)))
            .collect();
        out.push((format!("{prefix}delta"), points));
    }
    Ok(out)
}

fn counting_bound_series(table: &Table) -> CliResult<Series> {
    let t_col = table.column("T")?;
    let b_col = table.column("counting_bound")?;
    let mut points = BTreeMap::new();
    for row in 0..table.records.len() {
        let t: usize = table.number(row, t_col)?;
        let b: f64 = table.number(row, b_col)?;
        points.entry(t).or_insert(b);
    }
    Ok(points.into_iter().collect())
}

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - TOP - BOTTOM)
    }

    fn points(&self, s: &Series) -> String {
        s.iter()
            .map(|&(t, y)| format!("{:.2},{:.2}", self.px(t as f64), self.py(y)))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Renders the chart described by `spec` from CSV text.
pub fn render(csv_text: &str, spec: &PlotSpec) -> CliResult<String> {
    let table = Table::parse(csv_text)?;
    if table.records.is_empty() {
        return Err(CliError::Param("CSV has no data rows".into()));
    }
    let mut series = collect_series(&table, spec.metric)?;
    let mut bound = if spec.overlay_counting_bound {
        if spec.metric != Metric::SuccessProb {
            return Err(CliError::Param(
                "the counting-bound overlay applies to success_prob only".into(),
            ));
        }
        Some(counting_bound_series(&table)?)
    } else {
        None
    };
    if let Some(w) = spec.smooth.filter(|&w| w > 1) {
        for (_, s) in &mut series {
            *s = moving_average(s, w);
        }
    }

    let all_t = series.iter().flat_map(|(_, s)| s.iter().map(|&(t, _)| t));
    let (t_min, t_max) = all_t.fold((usize::MAX, 0), |(lo, hi), t| (lo.min(t), hi.max(t)));
    if t_min > t_max {
        return Err(CliError::Param("no data points to plot".into()));
    }
    let (x_lo, x_hi) = match spec.zoom {
        Some((lo, hi)) => {
            if lo > hi || lo < t_min || hi > t_max {
                return Err(CliError::Param(format!(
                    "zoom range [{lo}, {hi}] is not within the data range [{t_min}, {t_max}]"
                )));
            }
            (lo, hi)
        }
        None => (t_min, t_max),
    };
    let keep = |s: &mut Series| s.retain(|&(t, _)| (x_lo..=x_hi).contains(&t));
    for (_, s) in &mut series {
        keep(s);
    }
    if let Some(b) = &mut bound {
        keep(b);
    }

    let ys = series.iter().flat_map(|(_, s)| s.iter().map(|&(_, y)| y));
    let (y_min, y_max) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), y| (lo.min(y), hi.max(y)));
    let y_range = if spec.metric.is_probability() {
        (0.0, 1.0)
    } else {
        let lo = y_min.min(0.0);
        let hi = if y_max > lo {
            y_max + 0.05 * (y_max - lo)
        } else {
            lo + 1.0
        };
        (lo, hi)
    };
    let x_range = if x_hi > x_lo {
        (x_lo as f64, x_hi as f64)
    } else {
        (x_lo as f64 - 1.0, x_hi as f64 + 1.0)
    };
    let frame = Frame { x: x_range, y: y_range };

    let mut svg = String::new();
    let w = &mut svg;
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(w, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        w,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="14">{} vs T</text>"#,
        (LEFT + WIDTH - RIGHT) / 2.0,
        escape(spec.metric.label())
    );

    // axes and ticks
    let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, HEIGHT - BOTTOM, TOP);
    let _ = writeln!(w, r#"<g class="axes" stroke="black" stroke-width="1">"#);
    let _ = writeln!(w, r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y0:.2}"/>"#);
    let _ = writeln!(w, r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x0:.2}" y2="{y1:.2}"/>"#);
    let _ = writeln!(w, "</g>");
    for i in 0..=5 {
        let f = i as f64 / 5.0;
        let xv = frame.x.0 + f * (frame.x.1 - frame.x.0);
        let yv = frame.y.0 + f * (frame.y.1 - frame.y.0);
        let (px, py) = (frame.px(xv), frame.py(yv));
        let _ = writeln!(
            w,
            r#"<line x1="{px:.2}" y1="{y0:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/>"#,
            y0 + 5.0
        );
        let _ = writeln!(
            w,
            r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            y0 + 18.0,
            tick_label(xv)
        );
        let _ = writeln!(
            w,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{x0:.2}" y2="{py:.2}" stroke="black"/>"#,
            x0 - 5.0
        );
        let _ = writeln!(
            w,
            r##"<line x1="{x0:.2}" y1="{py:.2}" x2="{x1:.2}" y2="{py:.2}" stroke="#dddddd"/>"##
        );
        let _ = writeln!(
            w,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 8.0,
            py + 4.0,
            tick_label(yv)
        );
    }
    let _ = writeln!(
        w,
        r#"<text class="x-label" x="{:.2}" y="{:.2}" text-anchor="middle">T (number of tests)</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 18.0
    );
    let _ = writeln!(
        w,
        r#"<text class="y-label" transform="translate(18 {:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
        (y0 + y1) / 2.0,
        escape(spec.metric.label())
    );

    for (i, (label, s)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(w, r#"<g class="series" data-label="{}">"#, escape(label));
        let _ = writeln!(
            w,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            frame.points(s)
        );
        for &(t, y) in s {
            let _ = writeln!(
                w,
                r#"<circle class="marker" cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                frame.px(t as f64),
                frame.py(y)
            );
        }
        let _ = writeln!(w, "</g>");
    }
    if let Some(b) = &bound {
        let clipped: Series = b.iter().map(|&(t, v)| (t, v.min(frame.y.1))).collect();
        let _ = writeln!(
            w,
            r#"<polyline class="counting-bound" fill="none" stroke="black" stroke-width="1.5" stroke-dasharray="6 4" points="{}"/>"#,
            frame.points(&clipped)
        );
    }

    // legend
    let lx = WIDTH - RIGHT + 20.0;
    let mut entries: Vec<(String, String, bool)> = series
        .iter()
        .enumerate()
        .map(|(i, (label, _))| (label.clone(), PALETTE[i % PALETTE.len()].to_string(), false))
        .collect();
    if bound.is_some() {
        entries.push(("counting bound".into(), "black".into(), true));
    }
    for (i, (label, color, dashed)) in entries.iter().enumerate() {
        let ly = TOP + 10.0 + 20.0 * i as f64;
        let dash = if *dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            w,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"{dash}/>"#,
            lx + 24.0
        );
        let _ = writeln!(
            w,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 30.0,
            ly + 4.0,
            escape(label)
        );
    }
    let _ = writeln!(w, "</svg>");
    Ok(svg)
}

pub fn emit_plot(spec: &PlotSpec) -> CliResult<()> {
    let text = read_file(&spec.input)?;
    let svg = render(&text, spec)?;
    write_output(Some(&spec.output), svg.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "design,algorithm,N,k,T,alpha,n_trials,master_seed,success_prob,mean_fn,mean_fp,mean_jaccard,mean_f1,mean_misclassified,counting_bound";

    fn csv(rows: &[(&str, usize, f64, f64)]) -> String {
        let mut s = format!("{HEADER}\n");
        for &(algo, t, succ, m) in rows {
            s += &format!("bernoulli,{algo},50,3,{t},1.0,10,1,{succ},0,{m},1,1,{m},0.5\n");
        }
        s
    }

    fn spec(metric: Metric, overlay: bool) -> PlotSpec {
        PlotSpec {
            input: PathBuf::new(),
            metric,
            overlay_counting_bound: overlay,
            zoom: None,
            smooth: None,
            output: PathBuf::new(),
        }
    }

    #[test]
    fn single_point_gives_one_marker_per_series() {
        let text = csv(&[("comp", 10, 0.1, 1.0), ("dd", 10, 0.2, 1.0)]);
        let svg = render(&text, &spec(Metric::SuccessProb, false)).unwrap();
        assert_eq!(svg.matches(r#"class="marker""#).count(), 2);
        assert_eq!(svg.matches(r#"<g class="series""#).count(), 2);
    }

    #[test]
    fn overlay_draws_exactly_one_dashed_polyline() {
        let text = csv(&[("comp", 10, 0.1, 1.0), ("comp", 20, 0.4, 1.0)]);
        let svg = render(&text, &spec(Metric::SuccessProb, true)).unwrap();
        let dashed = svg
            .lines()
            .filter(|l| l.starts_with("<polyline") && l.contains("stroke-dasharray"))
            .count();
        assert_eq!(dashed, 1);
        let plain = render(&text, &spec(Metric::SuccessProb, false)).unwrap();
        assert!(!plain.contains("stroke-dasharray"));
    }

    #[test]
    fn missing_column_is_named() {
        let text = "algorithm,T\ncomp,10\n";
        let err = render(text, &spec(Metric::MeanFp, false)).unwrap_err();
        assert!(err.to_string().contains("mean_fp"), "{err}");
    }

    #[test]
    fn delta_series_and_missing_algorithm() {
        let text = csv(&[
            ("scomp", 10, 0.1, 3.0),
            ("wscomp", 10, 0.1, 2.5),
            ("scomp", 20, 0.1, 1.0),
            ("wscomp", 20, 0.1, 1.0),
        ]);
        let svg = render(&text, &spec(Metric::Delta, false)).unwrap();
        assert_eq!(svg.matches(r#"class="marker""#).count(), 2);
        assert!(svg.contains(r#"data-label="delta""#));
        let only_scomp = csv(&[("scomp", 10, 0.1, 3.0)]);
        assert!(render(&only_scomp, &spec(Metric::Delta, false)).is_err());
    }

    #[test]
    fn zoom_filters_and_validates() {
        let text = csv(&[("comp", 10, 0.1, 1.0), ("comp", 20, 0.2, 1.0), ("comp", 30, 0.3, 1.0)]);
        let mut s = spec(Metric::SuccessProb, false);
        s.zoom = Some((10, 20));
        assert_eq!(render(&text, &s).unwrap().matches(r#"class="marker""#).count(), 2);
        s.zoom = Some((5, 20));
        assert!(render(&text, &s).is_err());
        s.zoom = Some((25, 20));
        assert!(render(&text, &s).is_err());
    }

    #[test]
    fn rendering_is_deterministic() {
        let text = csv(&[("comp", 10, 0.1, 1.0), ("wscomp", 10, 0.3, 1.0), ("comp", 20, 0.2, 1.0)]);
        let s = spec(Metric::SuccessProb, true);
        assert_eq!(render(&text, &s).unwrap(), render(&text, &s).unwrap());
    }

    #[test]
    fn metric_names() {
        assert_eq!("f1".parse::<Metric>().unwrap(), Metric::F1);
        assert_eq!("jaccard".parse::<Metric>().unwrap().column(), "mean_jaccard");
        assert!("recall".parse::<Metric>().is_err());
    }
}
