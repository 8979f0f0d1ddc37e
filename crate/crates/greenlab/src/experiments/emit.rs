//! Deterministic renderers for experiment outputs: CSV tables with keyed
//! footer lines and plain-text (P2) portable graymap rasters.
//!
//! Floats are rendered with Rust's shortest round-trip formatting, so a
//! value parsed back from a table compares bit-identical to the value that
//! produced it, and identical runs produce byte-identical files.

/// Shortest decimal string that parses back to exactly `x`; non-finite
/// values render as `inf`, `-inf`, `NaN`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

/// An in-memory CSV table: one header line, data rows, then optional
/// `# key,value` footer lines for scalar summaries that belong with the
/// table but are not rows of it.
#[derive(Clone, Debug)]
pub struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
    footer: Vec<(String, String)>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            footer: Vec::new(),
        }
    }

    /// Column names for tables whose shape depends on the dimension.
    pub fn with_columns(columns: Vec<String>) -> Self {
        Table {
            columns,
            rows: Vec::new(),
            footer: Vec::new(),
        }
    }

    pub fn push_row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len(), "ragged CSV row");
        self.rows.push(cells);
    }

    pub fn push_footer(&mut self, key: &str, value: impl Into<String>) {
        self.footer.push((key.to_string(), value.into()));
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        for (key, value) in &self.footer {
            out.push_str(&format!("# {key},{value}\n"));
        }
        out
    }
}

/// An 8-bit grayscale raster, row-major with row 0 at the top.
#[derive(Clone, Debug)]
pub struct GrayRaster {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl GrayRaster {
    /// Quantize scalar values (row-major, row 0 at the top) linearly onto
    /// 0..=255 over the finite range of the data.  Non-finite entries and
    /// degenerate (constant or empty) fields map to 0.
    pub fn from_values(values: &[f64], width: usize, height: usize) -> Self {
        assert_eq!(values.len(), width * height, "raster shape mismatch");
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in values {
            if v.is_finite() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        let span = hi - lo;
        let pixels = values
            .iter()
            .map(|&v| {
                if v.is_finite() && span > 0.0 && span.is_finite() {
                    ((v - lo) / span * 255.0).round() as u8
                } else {
                    0
                }
            })
            .collect();
        GrayRaster {
            width,
            height,
            pixels,
        }
    }

    /// Plain-text portable graymap (magic `P2`), one pixel row per line.
    pub fn render_pgm(&self) -> String {
        let mut out = format!("P2\n{} {}\n255\n", self.width, self.height);
        for row in self.pixels.chunks(self.width.max(1)) {
            let line: Vec<String> = row.iter().map(|p| p.to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_bit_for_bit() {
        for &x in &[
            0.1,
            -2.0 / 3.0,
            1.0,
            f64::MIN_POSITIVE,
            f64::MAX,
            -0.0,
            6.02e23,
            (2.0f64).ln(),
        ] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
        assert_eq!(fmt_f64(f64::NEG_INFINITY), "-inf");
        assert_eq!(fmt_f64(f64::NAN), "NaN");
    }

    #[test]
    fn tables_render_header_rows_and_footer() {
        let mut t = Table::new(&["n", "value"]);
        t.push_row(vec!["0".into(), fmt_f64(0.5)]);
        t.push_row(vec!["1".into(), fmt_f64(-1.25)]);
        t.push_footer("slope", fmt_f64(2.0));
        assert_eq!(t.render(), "n,value\n0,0.5\n1,-1.25\n# slope,2\n");
    }

    #[test]
    fn rasters_quantize_linearly_and_zero_non_finite() {
        let r = GrayRaster::from_values(&[0.0, 1.0, 2.0, f64::NAN], 2, 2);
        assert_eq!(r.pixels, vec![0, 128, 255, 0]);
        let pgm = r.render_pgm();
        assert_eq!(pgm, "P2\n2 2\n255\n0 128\n255 0\n");

        let flat = GrayRaster::from_values(&[3.0, 3.0], 2, 1);
        assert_eq!(flat.pixels, vec![0, 0]);
    }
}
