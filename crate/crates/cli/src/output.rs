use std::fmt;

/// Formats `x` with at most six significant digits, trailing zeros dropped.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    if !(-4..=9).contains(&magnitude) {
        return format!("{x:.5e}");
    }
    let decimals = (5 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Left-aligned plain-text table.
pub struct Table {
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<const N: usize>(header: [&str; N]) -> Self {
        Table {
            rows: vec![header.iter().map(|h| h.to_string()).collect()],
        }
    }

    pub fn row<const N: usize>(&mut self, cells: [String; N]) {
        self.rows.push(cells.into());
    }
}

impl fmt::Display for Table {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cols = self.rows.iter().map(Vec::len).max().unwrap_or(0);
        let widths: Vec<usize> = (0..cols)
            .map(|c| {
                self.rows
                    .iter()
                    .filter_map(|r| r.get(c))
                    .map(|s| s.chars().count())
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        for row in &self.rows {
            let line: Vec<String> = row
                .iter()
                .zip(&widths)
                .map(|(cell, &w)| format!("{cell:<w$}"))
                .collect();
            writeln!(f, "{}", line.join("  ").trim_end())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(0.0884293471), "0.0884293");
        assert_eq!(sig6(0.842936), "0.842936");
        assert_eq!(sig6(101.1512345), "101.151");
        assert_eq!(sig6(1.0), "1");
        assert_eq!(sig6(84.0), "84");
        assert_eq!(sig6(-15.85413), "-15.8541");
        assert_eq!(sig6(1234567.0), "1234567");
        assert_eq!(sig6(2.9333e-6), "2.93330e-6");
        assert_eq!(sig6(0.0), "0");
    }

    #[test]
    fn table_alignment() {
        let mut t = Table::new(["a", "long header"]);
        t.row(["wide cell".into(), "1".into()]);
        assert_eq!(t.to_string(), "a          long header\nwide cell  1\n");
    }
}
