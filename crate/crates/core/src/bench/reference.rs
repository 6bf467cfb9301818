//! Published results for a subset of the standard LIBSVM datasets, printed
//! next to fresh measurements. Splits differ, so these are context rather
//! than targets.

use serde::Serialize;

/// One published run at a given sparse ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PublishedRun {
    pub sr: f64,
    pub k: usize,
    pub cg: usize,
    pub accuracy_pct: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PublishedDataset {
    pub name: &'static str,
    pub n: usize,
    pub m: usize,
    pub nnz: usize,
    pub density_pct: f64,
    pub runs: &'static [PublishedRun],
    /// Test accuracy at SR = 10% for the method itself, L2-loss DCD,
    /// trust-region Newton and L1-loss DCD, in that order.
    pub comparison_accuracy_pct: Option<[f64; 4]>,
}

impl PublishedDataset {
    pub fn run_at(&self, sr: f64) -> Option<&PublishedRun> {
        self.runs.iter().find(|r| (r.sr - sr).abs() < 1e-9)
    }

    /// Published accuracy of the L1-loss DCD baseline.
    pub fn dcd_accuracy_pct(&self) -> Option<f64> {
        self.comparison_accuracy_pct.map(|a| a[3])
    }
}

const fn run(sr: f64, k: usize, cg: usize, accuracy_pct: f64) -> PublishedRun {
    PublishedRun {
        sr,
        k,
        cg,
        accuracy_pct,
    }
}

pub const PUBLISHED: &[PublishedDataset] = &[
    PublishedDataset {
        name: "a1a",
        n: 30956,
        m: 123,
        nnz: 429343,
        density_pct: 11.28,
        runs: &[
            run(0.01, 17, 1061, 84.1775),
            run(0.05, 24, 1486, 83.7253),
            run(0.10, 27, 1699, 83.4992),
            run(0.15, 23, 1409, 83.5024),
            run(0.25, 21, 1303, 80.4917),
            run(0.50, 11, 729, 83.2730),
        ],
        comparison_accuracy_pct: Some([83.50, 83.84, 83.85, 83.81]),
    },
    PublishedDataset {
        name: "a9a",
        n: 32561,
        m: 123,
        nnz: 451592,
        density_pct: 11.28,
        runs: &[
            run(0.01, 19, 3269, 85.0378),
            run(0.05, 25, 4247, 84.8658),
            run(0.10, 27, 4591, 84.7307),
            run(0.15, 25, 4252, 83.5821),
            run(0.25, 17, 2911, 78.9755),
            run(0.50, 12, 2005, 83.2320),
        ],
        comparison_accuracy_pct: Some([84.73, 84.99, 84.99, 85.00]),
    },
    PublishedDataset {
        name: "breast-cancer",
        n: 638,
        m: 10,
        nnz: 6380,
        density_pct: 100.0,
        runs: &[
            run(0.01, 27, 0, 99.5122),
            run(0.05, 25, 0, 99.5122),
            run(0.10, 18, 0, 100.0),
            run(0.15, 15, 0, 99.5122),
            run(0.25, 13, 0, 98.5366),
            run(0.50, 10, 0, 99.0244),
        ],
        comparison_accuracy_pct: Some([100.0, 99.51, 99.51, 99.51]),
    },
    PublishedDataset {
        name: "diabetes",
        n: 768,
        m: 8,
        nnz: 6135,
        density_pct: 99.85,
        runs: &[
            run(0.01, 4, 0, 78.3550),
            run(0.05, 7, 0, 78.7879),
            run(0.10, 11, 0, 77.4892),
            run(0.15, 16, 0, 77.0563),
            run(0.25, 15, 0, 77.0563),
            run(0.50, 14, 0, 67.5325),
        ],
        comparison_accuracy_pct: Some([77.49, 79.22, 79.22, 77.49]),
    },
    PublishedDataset {
        name: "heart",
        n: 270,
        m: 13,
        nnz: 3510,
        density_pct: 100.0,
        runs: &[
            run(0.01, 6, 0, 87.6543),
            run(0.05, 14, 0, 86.4198),
            run(0.10, 17, 0, 86.4198),
            run(0.15, 18, 0, 82.7160),
            run(0.25, 14, 0, 87.6543),
            run(0.50, 12, 0, 86.4198),
        ],
        comparison_accuracy_pct: Some([86.42, 83.95, 83.95, 83.95]),
    },
    PublishedDataset {
        name: "mushrooms",
        n: 8124,
        m: 112,
        nnz: 170604,
        density_pct: 18.75,
        runs: &[
            run(0.01, 25, 767, 100.0),
            run(0.05, 18, 569, 100.0),
            run(0.10, 14, 494, 100.0),
            run(0.15, 15, 535, 100.0),
            run(0.25, 14, 562, 100.0),
            run(0.50, 12, 429, 99.3590),
        ],
        comparison_accuracy_pct: Some([100.0, 100.0, 100.0, 100.0]),
    },
    PublishedDataset {
        name: "svmguide1",
        n: 3089,
        m: 4,
        nnz: 12356,
        density_pct: 100.0,
        runs: &[
            run(0.01, 29, 0, 95.2750),
            run(0.05, 28, 0, 93.9250),
            run(0.10, 26, 0, 92.1750),
            run(0.15, 24, 0, 90.3000),
            run(0.25, 21, 0, 88.7000),
            run(0.50, 11, 0, 74.9000),
        ],
        comparison_accuracy_pct: Some([92.17, 78.55, 78.92, 62.65]),
    },
];

pub fn lookup(name: &str) -> Option<&'static PublishedDataset> {
    PUBLISHED.iter().find(|d| d.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::DatasetStats;

    #[test]
    fn densities_are_consistent_with_counts() {
        for d in PUBLISHED {
            let stats = DatasetStats::new(d.n, d.m, d.nnz);
            assert!((stats.density_pct - d.density_pct).abs() < 0.01, "{}", d.name);
        }
    }

    #[test]
    fn every_dataset_covers_the_grid() {
        for d in PUBLISHED {
            for sr in crate::bench::DEFAULT_SR_GRID {
                assert!(d.run_at(sr).is_some(), "{} {sr}", d.name);
            }
        }
        assert_eq!(lookup("heart").unwrap().dcd_accuracy_pct(), Some(83.95));
    }
}
