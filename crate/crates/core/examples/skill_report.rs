//! Score hand-made forecasts against climatology and print the report.

use latefusion::evaluation::{Framework, LeadTimeForecasts, SkillReport};

fn main() -> latefusion::Result<()> {
    let truth = vec![vec![20.0, 21.5, 23.0, 22.0]];
    let climatology = vec![vec![19.0, 20.0, 21.0, 21.0]];
    let forecasts: Vec<LeadTimeForecasts> = [5, 10]
        .into_iter()
        .map(|lead| {
            let drift = lead as f64 / 10.0;
            LeadTimeForecasts {
                lead_time: lead,
                channels: vec!["station".into()],
                truth: truth.clone(),
                climatology: climatology.clone(),
                frameworks: vec![
                    (Framework::LateFusion, vec![vec![20.2 - drift, 21.3, 22.6, 22.3 + drift]]),
                    (Framework::BestModel, vec![vec![19.6 - drift, 21.9, 22.4, 22.6 + drift]]),
                ],
            }
        })
        .collect();
    let report = SkillReport::compare_frameworks(&forecasts)?;
    print!("{}", String::from_utf8_lossy(&report.to_csv()));
    for fw in [Framework::LateFusion, Framework::BestModel] {
        println!("{fw}: average RMSESS {:.4}", report.average_rmsess(fw).unwrap());
    }
    print!("{}", String::from_utf8_lossy(&report.curve_csv("station")));
    Ok(())
}
