use std::path::Path;

use anyhow::{bail, Context, Result};
use motorprim::dmp::DemoTrajectory;

/// Reads `t, y, ydot, yddot` per DOF, one row per sample.
pub fn read_demo(path: &Path) -> Result<DemoTrajectory> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("cannot open demo {}", path.display()))?;
    let width = reader.headers()?.len();
    if width < 4 || (width - 1) % 3 != 0 {
        bail!("demo needs a time column and three columns per DOF, found {width} columns");
    }
    let n_dof = (width - 1) / 3;
    let mut times = Vec::new();
    let mut series = vec![vec![Vec::new(); n_dof]; 3];
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != width {
            bail!(
                "row {} has {} columns, expected {width}",
                line + 1,
                record.len()
            );
        }
        let values = record
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .with_context(|| format!("row {} is not numeric", line + 1))?;
        times.push(values[0]);
        for d in 0..n_dof {
            for (k, s) in series.iter_mut().enumerate() {
                s[d].push(values[1 + 3 * d + k]);
            }
        }
    }
    let [y, ydot, yddot]: [Vec<Vec<f64>>; 3] = series.try_into().expect("three series");
    Ok(DemoTrajectory::new(times, y, ydot, yddot)?)
}
