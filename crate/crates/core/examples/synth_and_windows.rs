//! Generate the default synthetic series, window it for one lead time and
//! split by target time.

use latefusion::dataset::{climate_normal, make_windows, split, synth_generate, SynthConfig};
use latefusion::cli::ExperimentConfig;

fn main() -> latefusion::Result<()> {
    let cfg = ExperimentConfig::default();
    let series = synth_generate(&SynthConfig::default(), 7)?;
    println!(
        "{} steps of {} x{}, channels {:?}",
        series.len(),
        series.step().unit,
        series.step().count,
        series.channels()
    );

    let channels = series.channels().to_vec();
    let windows = make_windows(&series, 6, 5, &channels, &channels)?;
    println!(
        "{} samples, {} inputs, {} targets",
        windows.len(),
        windows.input_dim(),
        windows.output_dim()
    );

    let (train, val, test) = split(&windows, &cfg.split)?;
    println!("train {} / val {} / test {}", train.len(), val.len(), test.len());

    let normals = climate_normal(&series, &cfg.climate, &test.sample_times[..3])?;
    for (i, t) in test.sample_times[..3].iter().enumerate() {
        println!("t={t}: truth {:?} normal {:?}", test.targets.row(i), normals.row(i));
    }
    Ok(())
}
