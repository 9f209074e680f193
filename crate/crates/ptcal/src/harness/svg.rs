//! Native SVG line/scatter plots; no plotting dependency.
//!
//! Coordinates are formatted with fixed precision so identical plots render
//! to identical bytes.

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 560.0;
const MARGIN_LEFT: f64 = 78.0;
const MARGIN_RIGHT: f64 = 30.0;
const MARGIN_TOP: f64 = 46.0;
const MARGIN_BOTTOM: f64 = 58.0;
const TICKS: usize = 5;

/// One plotted data set: connected polyline, point markers, or both.
#[derive(Debug, Clone)]
pub struct Series {
    pub points: Vec<(f64, f64)>,
    pub color: String,
    pub line: bool,
    pub marker_radius: f64,
}

impl Series {
    pub fn scatter(points: Vec<(f64, f64)>, color: impl Into<String>) -> Self {
        Self {
            points,
            color: color.into(),
            line: false,
            marker_radius: 2.4,
        }
    }

    pub fn line(points: Vec<(f64, f64)>, color: impl Into<String>) -> Self {
        Self {
            points,
            color: color.into(),
            line: true,
            marker_radius: 2.0,
        }
    }
}

/// An X-shaped reference marker (used for ground-truth locations).
#[derive(Debug, Clone)]
pub struct CrossMarker {
    pub x: f64,
    pub y: f64,
    pub color: String,
}

#[derive(Debug, Clone)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    pub crosses: Vec<CrossMarker>,
}

impl Plot {
    pub fn new(
        title: impl Into<String>,
        x_label: impl Into<String>,
        y_label: impl Into<String>,
    ) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            series: Vec::new(),
            crosses: Vec::new(),
        }
    }

    pub fn with_series(mut self, series: Series) -> Self {
        self.series.push(series);
        self
    }

    pub fn with_cross(mut self, x: f64, y: f64, color: impl Into<String>) -> Self {
        self.crosses.push(CrossMarker {
            x,
            y,
            color: color.into(),
        });
        self
    }

    pub fn render(&self) -> String {
        let (x_min, x_max) = padded_range(self.data_range(|p| p.0));
        let (y_min, y_max) = padded_range(self.data_range(|p| p.1));
        let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        let to_px = |x: f64| MARGIN_LEFT + (x - x_min) / (x_max - x_min) * plot_w;
        let to_py = |y: f64| MARGIN_TOP + plot_h - (y - y_min) / (y_max - y_min) * plot_h;

        let mut svg = String::new();
        svg.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
        ));
        svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{}</text>\n",
            WIDTH / 2.0,
            escape(&self.title)
        ));

        // Axes box.
        svg.push_str(&format!(
            "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"#444\" stroke-width=\"1\"/>\n",
            MARGIN_LEFT, MARGIN_TOP, plot_w, plot_h
        ));

        // Ticks and grid.
        for i in 0..=TICKS {
            let f = i as f64 / TICKS as f64;
            let x_value = x_min + f * (x_max - x_min);
            let y_value = y_min + f * (y_max - y_min);
            let px = to_px(x_value);
            let py = to_py(y_value);
            svg.push_str(&format!(
                "<line x1=\"{px:.1}\" y1=\"{:.1}\" x2=\"{px:.1}\" y2=\"{:.1}\" stroke=\"#ddd\" stroke-width=\"0.5\"/>\n",
                MARGIN_TOP,
                MARGIN_TOP + plot_h
            ));
            svg.push_str(&format!(
                "<line x1=\"{:.1}\" y1=\"{py:.1}\" x2=\"{:.1}\" y2=\"{py:.1}\" stroke=\"#ddd\" stroke-width=\"0.5\"/>\n",
                MARGIN_LEFT,
                MARGIN_LEFT + plot_w
            ));
            svg.push_str(&format!(
                "<text x=\"{px:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
                MARGIN_TOP + plot_h + 18.0,
                tick_label(x_value)
            ));
            svg.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
                MARGIN_LEFT - 6.0,
                py + 4.0,
                tick_label(y_value)
            ));
        }

        // Axis labels.
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">{}</text>\n",
            MARGIN_LEFT + plot_w / 2.0,
            HEIGHT - 14.0,
            escape(&self.x_label)
        ));
        svg.push_str(&format!(
            "<text x=\"20\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 20 {:.1})\">{}</text>\n",
            MARGIN_TOP + plot_h / 2.0,
            MARGIN_TOP + plot_h / 2.0,
            escape(&self.y_label)
        ));

        for series in &self.series {
            if series.line && series.points.len() > 1 {
                let path: Vec<String> = series
                    .points
                    .iter()
                    .map(|(x, y)| format!("{:.2},{:.2}", to_px(*x), to_py(*y)))
                    .collect();
                svg.push_str(&format!(
                    "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n",
                    path.join(" "),
                    series.color
                ));
            }
            for (x, y) in &series.points {
                svg.push_str(&format!(
                    "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"{}\" fill=\"{}\"/>\n",
                    to_px(*x),
                    to_py(*y),
                    series.marker_radius,
                    series.color
                ));
            }
        }

        for cross in &self.crosses {
            let (cx, cy) = (to_px(cross.x), to_py(cross.y));
            let arm = 7.0;
            svg.push_str(&format!(
                "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{}\" stroke-width=\"2\"/>\n",
                cx - arm,
                cy - arm,
                cx + arm,
                cy + arm,
                cross.color
            ));
            svg.push_str(&format!(
                "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{}\" stroke-width=\"2\"/>\n",
                cx - arm,
                cy + arm,
                cx + arm,
                cy - arm,
                cross.color
            ));
        }

        svg.push_str("</svg>\n");
        svg
    }

    fn data_range(&self, pick: impl Fn(&(f64, f64)) -> f64) -> (f64, f64) {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for series in &self.series {
            for p in &series.points {
                let value = pick(p);
                min = min.min(value);
                max = max.max(value);
            }
        }
        for cross in &self.crosses {
            let value = pick(&(cross.x, cross.y));
            min = min.min(value);
            max = max.max(value);
        }
        if min > max {
            (0.0, 1.0)
        } else {
            (min, max)
        }
    }
}

fn padded_range((min, max): (f64, f64)) -> (f64, f64) {
    if min == max {
        (min - 1.0, max + 1.0)
    } else {
        let pad = (max - min) * 0.05;
        (min - pad, max + pad)
    }
}

fn tick_label(value: f64) -> String {
    if value == 0.0 {
        return "0".into();
    }
    let magnitude = value.abs();
    if (0.01..1000.0).contains(&magnitude) {
        format!("{value:.3}")
    } else {
        format!("{value:.2e}")
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Maps `t` in [0, 1] to a red (0) -> blue (1) ramp, the convention used to
/// color points by rotation magnitude.
pub fn angle_color(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64| a + (b - a) * t;
    format!(
        "#{:02x}{:02x}{:02x}",
        lerp(214.0, 35.0).round() as u8,
        lerp(55.0, 70.0).round() as u8,
        lerp(46.0, 219.0).round() as u8
    )
}
