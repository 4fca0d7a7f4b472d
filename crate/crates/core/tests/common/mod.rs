#![allow(dead_code)]

use kca::linalg::Matrix;
use kca::ContingencyTable;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

/// Random integer table with positive marginals, built from `obs` uniform
/// observations over at most `rows x cols` categories.
pub fn random_table(rng: &mut ChaCha8Rng, rows: usize, cols: usize, obs: usize) -> ContingencyTable {
    loop {
        let mut counts = Matrix::zeros(rows, cols);
        for _ in 0..obs {
            counts[(rng.gen_range(0..rows), rng.gen_range(0..cols))] += 1.0;
        }
        let full = counts.row_iter().all(|r| r.sum() > 0.0) && counts.column_iter().all(|c| c.sum() > 0.0);
        if full {
            return ContingencyTable::from_counts(counts).unwrap();
        }
    }
}

/// Random table with some structural zeros.
pub fn random_sparse_table(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ContingencyTable {
    loop {
        let counts = Matrix::from_fn(rows, cols, |_, _| {
            if rng.gen_bool(0.3) {
                0.0
            } else {
                rng.gen_range(1..40) as f64
            }
        });
        if let Ok(t) = ContingencyTable::from_counts(counts) {
            if t.nrows() == rows && t.ncols() == cols {
                return t;
            }
        }
    }
}

/// Haar-ish random matrix with orthonormal columns (`rows >= cols`), via
/// Gram-Schmidt on Gaussian-like entries.
pub fn random_orthonormal(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    assert!(rows >= cols);
    let mut q = Matrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0));
    for j in 0..cols {
        for p in 0..j {
            let proj = q.column(p).dot(&q.column(j));
            let qp = q.column(p).into_owned();
            q.column_mut(j).axpy(-proj, &qp, 1.0);
        }
        let norm = q.column(j).norm();
        q.column_mut(j).scale_mut(1.0 / norm);
    }
    q
}

/// Row-wise cosine similarity matrix.
pub fn cosine_matrix(m: &Matrix) -> Matrix {
    let n = m.nrows();
    Matrix::from_fn(n, n, |i, j| {
        let (a, b) = (m.row(i), m.row(j));
        let (na, nb) = (a.norm(), b.norm());
        if na == 0.0 || nb == 0.0 {
            0.0
        } else {
            a.dot(&b) / (na * nb)
        }
    })
}

/// A synthetic corpus whose words belong to two topic clusters, each split
/// into subtopics.
pub struct PlantedCorpus {
    pub tokens: Vec<String>,
    pub words: Vec<String>,
    pub cluster: Vec<usize>,
    pub subtopic: Vec<usize>,
}

pub struct PlantedSpec {
    pub subtopics_per_cluster: usize,
    pub words_per_subtopic: usize,
    pub tokens: usize,
    pub segment_len: usize,
    /// Probability that a token comes from the segment's subtopic rather than
    /// a sibling subtopic of the same cluster.
    pub subtopic_purity: f64,
    /// Noise words inserted before a token with probability `noise_rate`.
    pub noise_words: Vec<String>,
    pub noise_rate: f64,
    /// Syntactic classes cutting across topics: the word at position `i` of
    /// its subtopic has class `i % noise_classes`, noise word `j` has class
    /// `j % noise_classes`, and
    /// with probability `syntax_bias` the inserted noise word matches the
    /// class of the word it precedes.
    pub noise_classes: usize,
    pub syntax_bias: f64,
}

impl Default for PlantedSpec {
    fn default() -> Self {
        PlantedSpec {
            subtopics_per_cluster: 2,
            words_per_subtopic: 10,
            tokens: 50_000,
            segment_len: 25,
            subtopic_purity: 0.7,
            noise_words: vec![],
            noise_rate: 0.0,
            noise_classes: 1,
            syntax_bias: 0.0,
        }
    }
}

impl PlantedCorpus {
    /// Segments pick a cluster and a subtopic uniformly; each token is drawn
    /// from that subtopic with probability `subtopic_purity`, otherwise from
    /// another subtopic of the same cluster. Word frequencies inside a
    /// subtopic are uniform.
    pub fn generate(spec: &PlantedSpec, rng: &mut ChaCha8Rng) -> Self {
        let s = spec.subtopics_per_cluster;
        let w = spec.words_per_subtopic;
        let mut words = Vec::new();
        let mut cluster = Vec::new();
        let mut subtopic = Vec::new();
        for c in 0..2 {
            for t in 0..s {
                for i in 0..w {
                    words.push(format!("{}{}w{}", ["alpha", "beta"][c], t, i));
                    cluster.push(c);
                    subtopic.push(c * s + t);
                }
            }
        }
        let mut tokens = Vec::with_capacity(spec.tokens);
        while tokens.len() < spec.tokens {
            let c = rng.gen_range(0..2);
            let t = rng.gen_range(0..s);
            for _ in 0..spec.segment_len {
                if tokens.len() >= spec.tokens {
                    break;
                }
                let topic = if s == 1 || rng.gen_bool(spec.subtopic_purity) {
                    t
                } else {
                    let mut other = rng.gen_range(0..s - 1);
                    if other >= t {
                        other += 1;
                    }
                    other
                };
                let word = rng.gen_range(0..w);
                let idx = (c * s + topic) * w + word;
                if spec.noise_rate > 0.0 && rng.gen_bool(spec.noise_rate) {
                    let classes = spec.noise_classes.max(1);
                    let noise = if spec.syntax_bias > 0.0 && rng.gen_bool(spec.syntax_bias) {
                        let same: Vec<&String> = spec
                            .noise_words
                            .iter()
                            .enumerate()
                            .filter(|(j, _)| j % classes == word % classes)
                            .map(|(_, n)| n)
                            .collect();
                        (*same.choose(rng).unwrap()).clone()
                    } else {
                        spec.noise_words.choose(rng).unwrap().clone()
                    };
                    tokens.push(noise);
                }
                tokens.push(words[idx].clone());
            }
        }
        PlantedCorpus { tokens, words, cluster, subtopic }
    }

    /// Planted similarity: 2 for a shared subtopic, 1 for a shared cluster,
    /// 0 across clusters. Every unordered pair of distinct words.
    pub fn similarity_pairs(&self) -> Vec<(String, String, f64)> {
        let mut out = Vec::new();
        for i in 0..self.words.len() {
            for j in (i + 1)..self.words.len() {
                out.push((self.words[i].clone(), self.words[j].clone(), self.planted_score(i, j)));
            }
        }
        out
    }

    pub fn planted_score(&self, i: usize, j: usize) -> f64 {
        if self.subtopic[i] == self.subtopic[j] {
            2.0
        } else if self.cluster[i] == self.cluster[j] {
            1.0
        } else {
            0.0
        }
    }

    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }
}
