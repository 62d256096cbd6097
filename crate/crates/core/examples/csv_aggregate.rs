//! Read a `time,<channel>,...` CSV, aggregate it in blocks and write it back.
//!
//! Usage: `cargo run --example csv_aggregate -- in.csv 7 out.csv`

use latefusion::dataset::{aggregate, StepLength, TimeSeries};

fn main() -> latefusion::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let (series, factor, out) = if args.len() == 4 {
        (
            TimeSeries::read_csv(&args[1])?,
            args[2].parse().expect("factor must be an integer"),
            Some(args[3].clone()),
        )
    } else {
        // a week of hourly values when no file is given
        let hours: Vec<Vec<f64>> = (0..24 * 7 * 3)
            .map(|h| vec![10.0 + (h % 24) as f64 / 4.0])
            .collect();
        let s = TimeSeries::new(
            StepLength {
                unit: "hour".into(),
                count: 1,
            },
            0,
            vec!["temp".into()],
            latefusion::numerics::DenseMatrix::from_rows(&hours)?,
        )?;
        (s, 168, None)
    };
    let coarse = aggregate(&series, factor)?;
    println!(
        "{} -> {} rows, step {} {}",
        series.len(),
        coarse.len(),
        coarse.step().count,
        coarse.step().unit
    );
    match out {
        Some(path) => coarse.write_csv(&path)?,
        None => print!("{}", String::from_utf8_lossy(&coarse.to_table().to_csv_bytes())),
    }
    Ok(())
}
