//! Minimum distance (nearest class mean) classifier.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{ExtractorKind, FeatureVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdcModel {
    pub alphabet: Vec<String>,
    pub extractor: ExtractorKind,
    pub means: Vec<Vec<f64>>,
}

impl MdcModel {
    pub fn dimension(&self) -> usize {
        self.means.first().map_or(0, Vec::len)
    }
}

/// Per-class arithmetic mean of the training vectors.
pub fn fit_mdc(train: &[(FeatureVector, usize)], alphabet: &[String]) -> Result<MdcModel> {
    let (first, _) = train.first().ok_or(Error::EmptyDataset)?;
    let dim = first.len();
    let extractor = first.extractor;
    let mut sums = vec![vec![0.0; dim]; alphabet.len()];
    let mut counts = vec![0usize; alphabet.len()];
    for (fv, label) in train {
        if fv.extractor != extractor {
            return Err(Error::MixedExtractors);
        }
        if fv.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: fv.len() });
        }
        let sum = sums.get_mut(*label).ok_or(Error::LabelOutOfRange { label: *label, classes: alphabet.len() })?;
        for (s, v) in sum.iter_mut().zip(&fv.values) {
            *s += v;
        }
        counts[*label] += 1;
    }
    let means = sums
        .into_iter()
        .zip(&counts)
        .zip(alphabet)
        .map(|((sum, &n), name)| {
            if n == 0 {
                return Err(Error::EmptyClass(name.clone()));
            }
            Ok(sum.into_iter().map(|s| s / n as f64).collect())
        })
        .collect::<Result<_>>()?;
    Ok(MdcModel { alphabet: alphabet.to_vec(), extractor, means })
}

/// Squared Euclidean distance.
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Class whose mean is nearest to `x`; the lowest index wins ties.
pub fn predict_mdc(model: &MdcModel, x: &FeatureVector) -> Result<usize> {
    let dim = model.dimension();
    if x.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: x.len() });
    }
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (class, mean) in model.means.iter().enumerate() {
        let d = squared_distance(mean, &x.values);
        if d < best_d {
            best = class;
            best_d = d;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn fv(values: &[f64]) -> FeatureVector {
        FeatureVector { extractor: ExtractorKind::Gradient, values: values.to_vec() }
    }

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| i.to_string()).collect()
    }

    #[test]
    fn means_of_single_samples_are_the_samples() {
        let train = vec![(fv(&[1.0, 2.0]), 0), (fv(&[3.0, 4.0]), 1)];
        let m = fit_mdc(&train, &names(2)).unwrap();
        assert_eq!(m.means, vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
    }

    #[test]
    fn mean_of_two_samples() {
        let train = vec![(fv(&[0.0, 0.0]), 0), (fv(&[2.0, 2.0]), 0), (fv(&[9.0, 9.0]), 1)];
        let m = fit_mdc(&train, &names(2)).unwrap();
        assert_eq!(m.means[0], vec![1.0, 1.0]);
    }

    #[test]
    fn fit_errors() {
        let train = vec![(fv(&[0.0]), 0)];
        assert_eq!(fit_mdc(&train, &names(2)), Err(Error::EmptyClass("1".to_string())));
        let mixed = vec![(fv(&[0.0]), 0), (fv(&[0.0, 1.0]), 1)];
        assert!(matches!(fit_mdc(&mixed, &names(2)), Err(Error::DimensionMismatch { .. })));
        let other = FeatureVector { extractor: ExtractorKind::Proposed, values: vec![0.0] };
        let tags = vec![(fv(&[0.0]), 0), (other, 1)];
        assert_eq!(fit_mdc(&tags, &names(2)), Err(Error::MixedExtractors));
        assert_eq!(fit_mdc(&[], &names(2)), Err(Error::EmptyDataset));
    }

    #[test]
    fn predictions() {
        let model = MdcModel {
            alphabet: names(2),
            extractor: ExtractorKind::Gradient,
            means: vec![vec![0.0, 0.0], vec![10.0, 0.0]],
        };
        assert_eq!(predict_mdc(&model, &fv(&[1.0, 0.0])).unwrap(), 0);
        assert_eq!(predict_mdc(&model, &fv(&[10.0, 0.0])).unwrap(), 1);
        assert!(predict_mdc(&model, &fv(&[1.0])).is_err());
    }

    #[test]
    fn ties_go_to_the_lowest_index() {
        let model = MdcModel {
            alphabet: names(6),
            extractor: ExtractorKind::Gradient,
            means: vec![
                vec![9.0, 9.0],
                vec![8.0, 8.0],
                vec![-1.0, 0.0],
                vec![7.0, 7.0],
                vec![6.0, 6.0],
                vec![1.0, 0.0],
            ],
        };
        assert_eq!(predict_mdc(&model, &fv(&[0.0, 0.0])).unwrap(), 2);
    }
}
