use std::io::Write;

use entlr::{chi2_ccdf, empirical_ccdf, semi_chi2_ccdf};

use crate::failure::{CliResult, Failure};
use crate::input::read_bytes;
use crate::CcdfArgs;

pub const CSV_HEADER: &str = "lambda_c,ccdf_empirical,ccdf_semi_chi2_1,ccdf_chi2_dimM";
const LOG_POINTS: usize = 50;
const LOG_START: f64 = 1e-3;

/// The `lambda` column of a CSV with headers.
pub fn read_lambdas(bytes: &[u8]) -> CliResult<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(bytes);
    let headers = reader.headers().map_err(Failure::data)?.clone();
    let column = headers
        .iter()
        .position(|h| h == "lambda")
        .ok_or_else(|| Failure::data("samples CSV has no `lambda` column"))?;
    let mut out = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(Failure::data)?;
        let field = record.get(column).unwrap_or("");
        let value: f64 = field
            .parse()
            .map_err(|_| Failure::data(format!("row {}: `{field}` is not a number", line + 1)))?;
        if !(value >= 0.0) {
            return Err(Failure::data(format!("row {}: λ must be >= 0, got {field}", line + 1)));
        }
        out.push(value);
    }
    Ok(out)
}

/// Distinct sample values plus log-spaced points in [1e-3, max].
pub fn grid(sorted: &[f64]) -> Vec<f64> {
    let mut g = sorted.to_vec();
    let max = sorted.last().copied().unwrap_or(0.0);
    if max > LOG_START {
        let ratio = (max / LOG_START).ln();
        // The last point is max itself, so it merges with the largest sample.
        g.extend((0..LOG_POINTS - 1).map(|i| LOG_START * (ratio * i as f64 / (LOG_POINTS - 1) as f64).exp()));
    }
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

pub fn run(args: &CcdfArgs) -> CliResult {
    let lambdas = read_lambdas(&read_bytes(&args.samples)?)?;
    if lambdas.is_empty() {
        return Err(Failure::usage("no samples in input"));
    }
    let ccdf = empirical_ccdf(&lambdas);
    let dof = args.dim_m as f64;
    let stdout = std::io::stdout();
    let mut out = std::io::BufWriter::new(stdout.lock());
    writeln!(out, "{CSV_HEADER}")?;
    for x in grid(ccdf.sorted()) {
        let conservative = if args.dim_m == 0 { 1.0 } else { chi2_ccdf(dof, x) };
        writeln!(out, "{x},{},{},{conservative}", ccdf.eval(x), semi_chi2_ccdf(1.0, x))?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_simulate_output() {
        let csv = "trial,N,lambda,converged\n0,10,1.5,true\n1,10,0,true\n";
        assert_eq!(read_lambdas(csv.as_bytes()).unwrap(), vec![1.5, 0.0]);
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(read_lambdas(b"lambda\nx\n").is_err());
        assert!(read_lambdas(b"lambda\n-1\n").is_err());
        assert!(read_lambdas(b"trial,N\n0,1\n").is_err());
    }

    #[test]
    fn grid_includes_samples_and_log_points() {
        let g = grid(&[0.0, 0.0, 2.0, 10.0]);
        assert!(g.contains(&0.0) && g.contains(&2.0) && g.contains(&10.0));
        assert!((g[1] - 1e-3).abs() < 1e-15);
        assert_eq!(g.len(), 3 + LOG_POINTS - 1);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn all_zero_grid_is_just_zero() {
        assert_eq!(grid(&[0.0, 0.0]), vec![0.0]);
    }
}
