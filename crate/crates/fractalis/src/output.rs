//! CSV output with lossless (17 significant digit) numbers.

use std::io::Write;

use fractalis_core::UniformGrid;

use crate::error::CliError;

pub fn number(v: f64) -> String {
    format!("{v:.16e}")
}

/// Header `x1,…,xk,value,error_bound`, then one row per grid point with the
/// first axis varying fastest.
pub fn write_surface(
    out: &mut dyn Write,
    grid: &UniformGrid,
    values: &[f64],
    error_bounds: &[f64],
) -> Result<(), CliError> {
    let mut writer = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (1..=grid.dim()).map(|q| format!("x{q}")).collect();
    header.push("value".into());
    header.push("error_bound".into());
    writer.write_record(&header)?;
    let mut point = vec![0.0; grid.dim()];
    let mut row = Vec::with_capacity(grid.dim() + 2);
    for i in 0..grid.len() {
        grid.point_into(i, &mut point);
        row.clear();
        row.extend(point.iter().map(|&x| number(x)));
        row.push(number(values[i]));
        row.push(number(error_bounds[i]));
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use fractalis_core::Domain;

    #[test]
    fn rows_run_first_axis_fastest() {
        let grid = UniformGrid::new(Domain::unit(2).unwrap(), vec![2, 2]).unwrap();
        let mut buf = Vec::new();
        write_surface(&mut buf, &grid, &[1.0, 2.0, 3.0, 4.0], &[0.0; 4]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x1,x2,value,error_bound");
        assert!(lines[2].starts_with("1.0000000000000000e0,0.0000000000000000e0,2.0000000000000000e0"));
        assert_eq!(lines.len(), 5);
    }

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 123456.789] {
            assert_eq!(number(v).parse::<f64>().unwrap(), v);
        }
    }
}
