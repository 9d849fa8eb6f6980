//! CSV emission. Every file starts with `#` metadata lines (format version,
//! configuration hash and a parameter echo), then the column row, then data.

use std::fmt::Write as _;
use std::path::Path;

use qtbattery::protocol::Engine;
use qtbattery::Trajectory;

use crate::config::{engine_name, Experiment, ExperimentConfig};
use crate::error::CliResult;

/// Version tag written in the first header line of every CSV.
pub const CSV_FORMAT: &str = "qtbattery-csv/1";

/// Twelve significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Header block for a file of the given kind produced from `cfg`.
pub fn header(kind: &str, cfg: &ExperimentConfig, extra: &[(&str, String)]) -> String {
    let mut s = String::new();
    writeln!(s, "# format: {CSV_FORMAT} {kind}").unwrap();
    writeln!(s, "# generator: qtbattery {}", env!("CARGO_PKG_VERSION")).unwrap();
    writeln!(s, "# config_sha256: {}", cfg.hash()).unwrap();
    for (k, v) in extra {
        writeln!(s, "# {k}: {v}").unwrap();
    }
    for line in cfg.to_toml_string().lines().filter(|l| !l.trim().is_empty()) {
        writeln!(s, "# config: {line}").unwrap();
    }
    s
}

pub fn trajectory_columns(dim: usize) -> String {
    let mut cols = vec!["t".to_string(), "gamma_eg_t".into(), "delta_E_over_EB".into(), "ergotropy_over_EB".into()];
    cols.extend((0..dim).map(|i| format!("p_{i}")));
    cols.push("most_populated_level".into());
    cols.push("qutrit_ground_population".into());
    cols.join(",")
}

/// The trajectory file for one engine.
pub fn trajectory_csv(exp: &Experiment, engine: Engine, tr: &Trajectory) -> String {
    let e_b = exp.battery.energy_quantum();
    let eg = exp.charger.rates().eg;
    let extra = [("engine", engine_name(engine).to_string()), ("coupling", num(exp.charger.coupling()))];
    let mut s = header("trajectory", &exp.config, &extra);
    s.push_str(&trajectory_columns(exp.battery.dim()));
    s.push('\n');
    let ground = tr.qutrit_ground();
    for i in 0..tr.len() {
        let t = tr.times()[i];
        let mut row = vec![num(t), num(t * eg), num(tr.stored_energy()[i] / e_b), num(tr.ergotropy()[i] / e_b)];
        row.extend(tr.populations()[i].iter().map(|&p| num(p)));
        row.push(tr.most_populated()[i].to_string());
        row.push(opt_num(ground.map(|g| g[i])));
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, contents)?;
    Ok(())
}

/// A parsed CSV: column names and rows, blanks as `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
        let columns: Vec<String> = lines.next().ok_or("missing column row")?.split(',').map(|c| c.trim().to_string()).collect();
        let mut rows = Vec::new();
        for (k, line) in lines.enumerate() {
            let row: Vec<Option<f64>> = line
                .split(',')
                .map(|f| {
                    let f = f.trim();
                    if f.is_empty() {
                        Ok(None)
                    } else {
                        f.parse().map(Some).map_err(|_| format!("data row {}: bad number {f:?}", k + 1))
                    }
                })
                .collect::<Result<_, _>>()?;
            if row.len() != columns.len() {
                return Err(format!("data row {}: {} fields, expected {}", k + 1, row.len(), columns.len()));
            }
            rows.push(row);
        }
        Ok(Self { columns, rows })
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(num(0.1), "1.00000000000e-1");
        assert_eq!(num(-12345.678), "-1.23456780000e4");
        assert_eq!(opt_num(None), "");
    }

    #[test]
    fn columns_follow_the_schema() {
        assert_eq!(
            trajectory_columns(3),
            "t,gamma_eg_t,delta_E_over_EB,ergotropy_over_EB,p_0,p_1,p_2,most_populated_level,qutrit_ground_population"
        );
    }

    #[test]
    fn table_parsing() {
        let t = Table::parse("# x\na,b\n1,\n2.5,3\n").unwrap();
        assert_eq!(t.column("a").unwrap(), vec![Some(1.0), Some(2.5)]);
        assert_eq!(t.column("b").unwrap(), vec![None, Some(3.0)]);
        assert!(Table::parse("a,b\n1\n").is_err());
        assert!(t.column("c").is_none());
    }
}
