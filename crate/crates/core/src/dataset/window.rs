use serde::{Deserialize, Serialize};

use super::TimeSeries;
use crate::error::{Error, Result};
use crate::numerics::DenseMatrix;

/// Supervised pairs cut from a series.
///
/// Row `i` of `inputs` stacks the input channels over `horizon` consecutive
/// steps, oldest first: column `h * C_in + c` is channel `c` at step offset
/// `h`. Row `i` of `targets` holds the output channels `lead_time` steps
/// after the last input step, at timestamp `sample_times[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedSamples {
    pub inputs: DenseMatrix,
    pub targets: DenseMatrix,
    pub horizon: usize,
    pub lead_time: usize,
    pub sample_times: Vec<i64>,
    pub input_channels: Vec<String>,
    pub output_channels: Vec<String>,
}

impl WindowedSamples {
    pub fn len(&self) -> usize {
        self.sample_times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sample_times.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.inputs.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.targets.cols()
    }

    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            inputs: self.inputs.select_rows(indices),
            targets: self.targets.select_rows(indices),
            horizon: self.horizon,
            lead_time: self.lead_time,
            sample_times: indices.iter().map(|&i| self.sample_times[i]).collect(),
            input_channels: self.input_channels.clone(),
            output_channels: self.output_channels.clone(),
        }
    }
}

pub fn make_windows(
    series: &TimeSeries,
    horizon: usize,
    lead_time: usize,
    input_channels: &[String],
    output_channels: &[String],
) -> Result<WindowedSamples> {
    if horizon == 0 || lead_time == 0 {
        return Err(Error::InvalidConfig(format!(
            "horizon ({horizon}) and lead time ({lead_time}) must be ≥ 1"
        )));
    }
    if input_channels.is_empty() || output_channels.is_empty() {
        return Err(Error::InvalidConfig(
            "at least one input and one output channel are required".into(),
        ));
    }
    let len = series.len();
    if len < horizon + lead_time {
        return Err(Error::InsufficientData {
            length: len,
            horizon,
            lead_time,
        });
    }
    let in_idx = input_channels
        .iter()
        .map(|c| series.channel_index(c))
        .collect::<Result<Vec<_>>>()?;
    let out_idx = output_channels
        .iter()
        .map(|c| series.channel_index(c))
        .collect::<Result<Vec<_>>>()?;

    let n = len - horizon - lead_time + 1;
    let values = series.values();
    let mut inputs = Vec::with_capacity(n * horizon * in_idx.len());
    let mut targets = Vec::with_capacity(n * out_idx.len());
    let mut sample_times = Vec::with_capacity(n);
    for i in 0..n {
        for step in i..i + horizon {
            inputs.extend(in_idx.iter().map(|&c| values.get(step, c)));
        }
        let target_row = i + horizon - 1 + lead_time;
        targets.extend(out_idx.iter().map(|&c| values.get(target_row, c)));
        sample_times.push(series.start() + target_row as i64);
    }
    Ok(WindowedSamples {
        inputs: DenseMatrix::new(n, horizon * in_idx.len(), inputs)?,
        targets: DenseMatrix::new(n, out_idx.len(), targets)?,
        horizon,
        lead_time,
        sample_times,
        input_channels: input_channels.to_vec(),
        output_channels: output_channels.to_vec(),
    })
}

/// Closed-open interval of timestamps `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeRange {
    pub start: i64,
    pub end: i64,
}

impl TimeRange {
    pub fn new(start: i64, end: i64) -> Self {
        Self { start, end }
    }

    pub fn contains(&self, t: i64) -> bool {
        t >= self.start && t < self.end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train: TimeRange,
    pub val: TimeRange,
    pub test: TimeRange,
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, r) in [("train", self.train), ("val", self.val), ("test", self.test)] {
            if r.start >= r.end {
                return Err(Error::InvalidConfig(format!(
                    "{name} range [{}, {}) is empty",
                    r.start, r.end
                )));
            }
        }
        if self.train.end > self.val.start || self.val.end > self.test.start {
            return Err(Error::InvalidConfig(
                "split ranges must be ordered train < val < test without overlap".into(),
            ));
        }
        Ok(())
    }
}

/// Partitions samples by target timestamp. Samples outside every range are
/// dropped; order is preserved.
pub fn split(
    samples: &WindowedSamples,
    spec: &SplitSpec,
) -> Result<(WindowedSamples, WindowedSamples, WindowedSamples)> {
    spec.validate()?;
    let mut parts: [Vec<usize>; 3] = Default::default();
    for (i, &t) in samples.sample_times.iter().enumerate() {
        if spec.train.contains(t) {
            parts[0].push(i);
        } else if spec.val.contains(t) {
            parts[1].push(i);
        } else if spec.test.contains(t) {
            parts[2].push(i);
        }
    }
    for (name, p) in ["train", "val", "test"].iter().zip(&parts) {
        if p.is_empty() {
            return Err(Error::EmptySplit(name));
        }
    }
    Ok((
        samples.select(&parts[0]),
        samples.select(&parts[1]),
        samples.select(&parts[2]),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::tests::single_channel;
    use crate::dataset::StepLength;
    use proptest::prelude::*;

    fn x() -> Vec<String> {
        vec!["x".to_string()]
    }

    #[test]
    fn hand_enumerated_windows() {
        let s = single_channel(&(1..=10).map(f64::from).collect::<Vec<_>>());
        let w = make_windows(&s, 2, 1, &x(), &x()).unwrap();
        assert_eq!(w.len(), 8);
        assert_eq!(w.inputs.row(0), &[1.0, 2.0]);
        assert_eq!(w.targets.row(0), &[3.0]);
        assert_eq!(w.sample_times[0], 2);
        assert_eq!(w.inputs.row(7), &[8.0, 9.0]);
        assert_eq!(w.targets.row(7), &[10.0]);
    }

    #[test]
    fn one_step_ahead_pairs() {
        let s = single_channel(&[5.0, 6.0, 7.0]);
        let w = make_windows(&s, 1, 1, &x(), &x()).unwrap();
        assert_eq!(w.inputs.column(0), vec![5.0, 6.0]);
        assert_eq!(w.targets.column(0), vec![6.0, 7.0]);
    }

    #[test]
    fn too_short_series() {
        let s = single_channel(&[0.0; 10]);
        assert!(matches!(
            make_windows(&s, 6, 5, &x(), &x()),
            Err(Error::InsufficientData { length: 10, .. })
        ));
        // exactly H + L steps yields a single sample
        assert_eq!(make_windows(&s, 6, 4, &x(), &x()).unwrap().len(), 1);
    }

    #[test]
    fn multi_channel_layout() {
        let m = DenseMatrix::from_rows(&[
            vec![1.0, 10.0],
            vec![2.0, 20.0],
            vec![3.0, 30.0],
            vec![4.0, 40.0],
        ])
        .unwrap();
        let s = TimeSeries::new(StepLength::default(), 100, vec!["a".into(), "b".into()], m)
            .unwrap();
        let chans = vec!["a".to_string(), "b".to_string()];
        let w = make_windows(&s, 2, 2, &chans, &["b".to_string()]).unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(w.inputs.row(0), &[1.0, 10.0, 2.0, 20.0]);
        assert_eq!(w.targets.row(0), &[40.0]);
        assert_eq!(w.sample_times, vec![103]);
        assert!(make_windows(&s, 1, 1, &["zz".to_string()], &chans).is_err());
    }

    fn uniform_samples(n: usize) -> WindowedSamples {
        let s = single_channel(&(0..n + 1).map(|v| v as f64).collect::<Vec<_>>());
        make_windows(&s, 1, 1, &x(), &x()).unwrap()
    }

    #[test]
    fn all_in_train_is_empty_split() {
        let w = uniform_samples(9);
        let spec = SplitSpec {
            train: TimeRange::new(0, 100),
            val: TimeRange::new(100, 200),
            test: TimeRange::new(200, 300),
        };
        assert!(matches!(split(&w, &spec), Err(Error::EmptySplit("val"))));
    }

    #[test]
    fn contiguous_thirds() {
        // sample times 1..=9
        let w = uniform_samples(9);
        let spec = SplitSpec {
            train: TimeRange::new(1, 4),
            val: TimeRange::new(4, 7),
            test: TimeRange::new(7, 10),
        };
        let (a, b, c) = split(&w, &spec).unwrap();
        assert_eq!((a.len(), b.len(), c.len()), (3, 3, 3));
        assert_eq!(b.sample_times, vec![4, 5, 6]);
    }

    #[test]
    fn boundary_goes_to_later_partition() {
        let w = uniform_samples(9);
        let spec = SplitSpec {
            train: TimeRange::new(0, 5),
            val: TimeRange::new(5, 6),
            test: TimeRange::new(6, 8),
        };
        let (a, b, c) = split(&w, &spec).unwrap();
        assert_eq!(a.sample_times, vec![1, 2, 3, 4]);
        assert_eq!(b.sample_times, vec![5]);
        assert_eq!(c.sample_times, vec![6, 7]);
    }

    #[test]
    fn overlapping_spec_rejected() {
        let w = uniform_samples(9);
        let spec = SplitSpec {
            train: TimeRange::new(0, 5),
            val: TimeRange::new(4, 6),
            test: TimeRange::new(6, 8),
        };
        assert!(matches!(split(&w, &spec), Err(Error::InvalidConfig(_))));
    }

    proptest! {
        #[test]
        fn targets_align_with_raw_series(
            vals in prop::collection::vec(-50.0f64..50.0, 12..60),
            h in 1usize..6, l in 1usize..6,
        ) {
            let s = single_channel(&vals);
            let w = make_windows(&s, h, l, &x(), &x()).unwrap();
            prop_assert_eq!(w.len(), vals.len() - h - l + 1);
            for i in 0..w.len() {
                let t = w.sample_times[i];
                prop_assert_eq!(w.targets.get(i, 0), s.value(t, 0).unwrap());
                for k in 0..h {
                    let ts = t - l as i64 - (h - 1 - k) as i64;
                    prop_assert_eq!(w.inputs.get(i, k), s.value(ts, 0).unwrap());
                }
            }
        }

        #[test]
        fn split_is_a_partition(
            n in 6usize..80, a in 1i64..30, b in 1i64..30, c in 1i64..30, offset in -5i64..5,
        ) {
            let w = uniform_samples(n);
            let spec = SplitSpec {
                train: TimeRange::new(offset, offset + a),
                val: TimeRange::new(offset + a, offset + a + b),
                test: TimeRange::new(offset + a + b, offset + a + b + c),
            };
            match split(&w, &spec) {
                Ok((tr, va, te)) => {
                    let mut all: Vec<i64> = tr.sample_times.iter()
                        .chain(&va.sample_times).chain(&te.sample_times).copied().collect();
                    let covered: Vec<i64> = w.sample_times.iter().copied()
                        .filter(|t| *t >= offset && *t < offset + a + b + c).collect();
                    prop_assert_eq!(all.len(), covered.len());
                    all.sort();
                    prop_assert_eq!(all, covered);
                }
                Err(Error::EmptySplit(_)) => {}
                Err(e) => prop_assert!(false, "unexpected {e}"),
            }
        }
    }
}
