//! Inter-annotator agreement: Fleiss' kappa and Krippendorff's alpha
//! (nominal metric) over intent annotation matrices.

use forge_domain::IntentLabel;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Items x annotators matrix of categorical labels. `None` marks a missing
/// annotation (allowed for alpha, rejected by kappa).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationMatrix {
    rows: Vec<Vec<Option<IntentLabel>>>,
    annotators: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AgreementError {
    #[error("matrix needs at least one item and two annotators, all rows equally long")]
    BadShape,
    #[error("fleiss kappa requires a complete matrix; item {item} has a missing label")]
    IncompleteMatrix { item: usize },
    #[error("expected agreement is 1 (all mass on one category); kappa undefined")]
    DegenerateExpected,
    #[error("no variability across values; alpha undefined")]
    NoVariance,
    #[error("need at least two pairable values, found {found}")]
    TooFewPairableValues { found: usize },
}

impl AnnotationMatrix {
    pub fn new(rows: Vec<Vec<Option<IntentLabel>>>) -> Result<Self, AgreementError> {
        let annotators = rows.first().map(|r| r.len()).unwrap_or(0);
        if rows.is_empty() || annotators < 2 || rows.iter().any(|r| r.len() != annotators) {
            return Err(AgreementError::BadShape);
        }
        Ok(AnnotationMatrix { rows, annotators })
    }

    pub fn from_complete(rows: Vec<Vec<IntentLabel>>) -> Result<Self, AgreementError> {
        Self::new(
            rows.into_iter()
                .map(|r| r.into_iter().map(Some).collect())
                .collect(),
        )
    }

    pub fn items(&self) -> usize {
        self.rows.len()
    }

    pub fn annotators(&self) -> usize {
        self.annotators
    }

    pub fn rows(&self) -> &[Vec<Option<IntentLabel>>] {
        &self.rows
    }
}

fn category_index(label: IntentLabel) -> usize {
    IntentLabel::ALL
        .iter()
        .position(|&l| l == label)
        .expect("label in closed set")
}

const CATEGORIES: usize = IntentLabel::ALL.len();

/// Fleiss' kappa over a complete matrix:
/// `kappa = (P_bar - Pe_bar) / (1 - Pe_bar)`.
///
/// Perfect observed agreement returns exactly 1.0 whenever the expected
/// agreement is below 1.
pub fn fleiss_kappa(matrix: &AnnotationMatrix) -> Result<f64, AgreementError> {
    let n_items = matrix.items() as f64;
    let n_raters = matrix.annotators() as f64;

    let mut category_totals = [0f64; CATEGORIES];
    let mut p_sum = 0f64;
    for (item, row) in matrix.rows().iter().enumerate() {
        let mut counts = [0f64; CATEGORIES];
        for cell in row {
            let label = cell.ok_or(AgreementError::IncompleteMatrix { item })?;
            counts[category_index(label)] += 1.0;
        }
        let sum_sq: f64 = counts.iter().map(|c| c * c).sum();
        p_sum += (sum_sq - n_raters) / (n_raters * (n_raters - 1.0));
        for (total, count) in category_totals.iter_mut().zip(counts) {
            *total += count;
        }
    }
    let p_bar = p_sum / n_items;
    let pe_bar: f64 = category_totals
        .iter()
        .map(|t| {
            let p = t / (n_items * n_raters);
            p * p
        })
        .sum();
    if pe_bar >= 1.0 {
        return Err(AgreementError::DegenerateExpected);
    }
    Ok((p_bar - pe_bar) / (1.0 - pe_bar))
}

/// Krippendorff's alpha with the nominal distance metric:
/// `alpha = 1 - Do / De`, computed from the coincidence matrix. Missing
/// annotations are allowed; items with fewer than two values are skipped.
pub fn krippendorff_alpha(matrix: &AnnotationMatrix) -> Result<f64, AgreementError> {
    let mut coincidence = [[0f64; CATEGORIES]; CATEGORIES];
    let mut pairable = 0usize;

    for row in matrix.rows() {
        let values: Vec<usize> = row
            .iter()
            .flatten()
            .map(|&label| category_index(label))
            .collect();
        let m = values.len();
        if m < 2 {
            continue;
        }
        pairable += m;
        let weight = 1.0 / (m as f64 - 1.0);
        for (i, &a) in values.iter().enumerate() {
            for (j, &b) in values.iter().enumerate() {
                if i != j {
                    coincidence[a][b] += weight;
                }
            }
        }
    }
    if pairable < 2 {
        return Err(AgreementError::TooFewPairableValues { found: pairable });
    }

    let n = pairable as f64;
    let marginals: Vec<f64> = (0..CATEGORIES)
        .map(|c| coincidence[c].iter().sum())
        .collect();
    let mut observed_disagreement = 0f64;
    let mut expected_num = 0f64;
    for c in 0..CATEGORIES {
        for k in 0..CATEGORIES {
            if c != k {
                observed_disagreement += coincidence[c][k];
                expected_num += marginals[c] * marginals[k];
            }
        }
    }
    if expected_num == 0.0 {
        return Err(AgreementError::NoVariance);
    }
    // alpha = 1 - (Do/n) / (De/(n(n-1))) = 1 - Do (n-1) / De_num
    Ok(1.0 - observed_disagreement * (n - 1.0) / expected_num)
}
