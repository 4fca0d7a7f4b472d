//! Word-similarity evaluation: dataset loading, cosine similarity and
//! Spearman rank correlation.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use log::warn;

use crate::ca::{EmbeddingSet, PointSet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct WordSimDataset {
    pub triples: Vec<(String, String, f64)>,
}

impl WordSimDataset {
    /// Lowercases words and merges repeated unordered pairs by averaging
    /// their scores. First-occurrence order is kept.
    pub fn new(raw: Vec<(String, String, f64)>) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::InvalidParameter("word-similarity dataset is empty".into()));
        }
        let mut order: Vec<(String, String)> = Vec::new();
        let mut sums: HashMap<(String, String), (f64, usize)> = HashMap::new();
        for (a, b, score) in raw {
            let (a, b) = (a.to_lowercase(), b.to_lowercase());
            let key = if a <= b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
            let entry = sums.entry(key).or_insert_with(|| {
                order.push((a, b));
                (0.0, 0)
            });
            entry.0 += score;
            entry.1 += 1;
        }
        let triples = order
            .into_iter()
            .map(|(a, b)| {
                let key = if a <= b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
                let (sum, count) = sums[&key];
                (a, b, sum / count as f64)
            })
            .collect();
        Ok(WordSimDataset { triples })
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn max_score(&self) -> f64 {
        self.triples.iter().map(|t| t.2).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Parses `word_a word_b score` lines. Fields are split on tabs if the
    /// line has one, on commas if it has one, else on whitespace. Blank lines
    /// and `#` comments are skipped.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut raw = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = if trimmed.contains('\t') {
                trimmed.split('\t').map(str::trim).collect()
            } else if trimmed.contains(',') {
                trimmed.split(',').map(str::trim).collect()
            } else {
                trimmed.split_whitespace().collect()
            };
            if fields.len() != 3 {
                return Err(Error::parse(
                    path,
                    lineno + 1,
                    format!("expected `word word score`, found {} fields", fields.len()),
                ));
            }
            let score: f64 = fields[2].parse().map_err(|_| {
                Error::parse(path, lineno + 1, format!("invalid score `{}`", fields[2]))
            })?;
            if !score.is_finite() {
                return Err(Error::parse(path, lineno + 1, "score is not finite"));
            }
            raw.push((fields[0].to_string(), fields[1].to_string(), score));
        }
        if raw.is_empty() {
            return Err(Error::EmptyFile(path.to_path_buf()));
        }
        Self::new(raw)
    }
}

pub fn load_wordsim(path: impl AsRef<Path>) -> Result<WordSimDataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    WordSimDataset::parse(&text, path)
}

/// Cosine similarity; defined as 0 when either vector is zero.
pub fn cosine(u: &[f64], v: &[f64]) -> f64 {
    assert_eq!(u.len(), v.len(), "cosine of vectors with different lengths");
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        warn!("cosine with a zero vector, returning 0");
        return 0.0;
    }
    (dot / (nu * nv)).clamp(-1.0, 1.0)
}

/// 1-based ranks with ties sharing their average rank.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && xs[order[end]] == xs[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let avg = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = avg;
        }
        start = end;
    }
    ranks
}

fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ConstantInput);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman's ρ: Pearson correlation of average ranks.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return Err(Error::TooFewValues(xs.len()));
    }
    pearson(&average_ranks(xs), &average_ranks(ys))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub spearman_rho: f64,
    pub pairs_used: usize,
    pub pairs_skipped: usize,
}

/// Correlates embedding cosines with human scores over in-vocabulary pairs.
pub fn evaluate(e: &EmbeddingSet, which: PointSet, d: &WordSimDataset) -> Result<EvalReport> {
    let (m, labels) = e.points(which);
    let index: HashMap<&str, usize> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    let mut predicted = Vec::new();
    let mut human = Vec::new();
    let mut skipped = 0;
    for (a, b, score) in &d.triples {
        match (index.get(a.as_str()), index.get(b.as_str())) {
            (Some(&i), Some(&j)) => {
                let u: Vec<f64> = m.row(i).iter().copied().collect();
                let v: Vec<f64> = m.row(j).iter().copied().collect();
                predicted.push(cosine(&u, &v));
                human.push(*score);
            }
            _ => skipped += 1,
        }
    }
    if predicted.is_empty() {
        return Err(Error::ZeroUsablePairs);
    }
    let rho = spearman(&predicted, &human)?;
    Ok(EvalReport {
        spearman_rho: rho,
        pairs_used: predicted.len(),
        pairs_skipped: skipped,
    })
}
