//! Generators for the extremal families and a few standard graphs.
//!
//! Vertex numbering is fixed so that witnesses are reproducible:
//!
//! * `H_n`: the order-3 path `a, x, y` is `0, 1, 2` (so `a = 0`); the order-7
//!   path `Q_i` (`i >= 1`) occupies `3 + 7(i-1) ..` in path order, and its
//!   center `b_i` is its fourth vertex. The only extra edges are `a b_i`.
//! * `H'_n` for `k = 3m`: the clique `R_0 = K_n` is `0..n`; each block `R_i`
//!   follows with its `2m-1` clique vertices first, then the `2m+1` disjoint
//!   edges as consecutive pairs. Every `R_0` vertex is joined to every block
//!   vertex.
//! * `random:n,p,seed`: pairs `u < v` are visited in lexicographic order and
//!   each consumes one output `r` of SplitMix64 seeded with `seed`; the edge is
//!   present iff `r / 2^64 < p`, compared exactly in integers.

use std::fmt;
use std::str::FromStr;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use thiserror::Error;

use crate::graph::{Graph, GraphError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FamilyError {
    #[error("unknown family {0:?}")]
    UnknownFamily(String),
    #[error("cannot parse family spec {0:?}")]
    Syntax(String),
    #[error("H_n needs n >= 1")]
    ZeroHn,
    #[error("H'_n needs k >= 3 with k divisible by 3, got k = {0}")]
    BadK(usize),
    #[error("H'_n needs n >= 1")]
    ZeroHprime,
    #[error("{family} needs at least {min} vertices, got {n}")]
    TooSmall { family: &'static str, n: usize, min: usize },
    #[error("edge probability {num}/{den} is not in [0, 1]")]
    BadProbability { num: u64, den: u64 },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilySpec {
    Hn { n: usize },
    Hprime { k: usize, n: usize },
    Path { n: usize },
    Cycle { n: usize },
    Complete { n: usize },
    /// Each pair independently with probability `num/den`.
    Random { n: usize, num: u64, den: u64, seed: u64 },
}

impl FamilySpec {
    pub fn validate(&self) -> Result<(), FamilyError> {
        match *self {
            FamilySpec::Hn { n: 0 } => Err(FamilyError::ZeroHn),
            FamilySpec::Hprime { k, .. } if k < 3 || k % 3 != 0 => Err(FamilyError::BadK(k)),
            FamilySpec::Hprime { n: 0, .. } => Err(FamilyError::ZeroHprime),
            FamilySpec::Path { n: 0 } => Err(FamilyError::TooSmall { family: "path", n: 0, min: 1 }),
            FamilySpec::Cycle { n } if n < 3 => Err(FamilyError::TooSmall { family: "cycle", n, min: 3 }),
            FamilySpec::Complete { n: 0 } => Err(FamilyError::TooSmall { family: "complete", n: 0, min: 1 }),
            FamilySpec::Random { num, den, .. } if den == 0 || num > den => {
                Err(FamilyError::BadProbability { num, den })
            }
            _ => Ok(()),
        }
    }

    pub fn generate(&self) -> Result<Graph, FamilyError> {
        match *self {
            FamilySpec::Hn { n } => gen_hn(n),
            FamilySpec::Hprime { k, n } => gen_hprime(k, n),
            _ => gen_standard(self),
        }
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            FamilySpec::Hn { n } => write!(f, "Hn:{n}"),
            FamilySpec::Hprime { k, n } => write!(f, "Hprime:{k},{n}"),
            FamilySpec::Path { n } => write!(f, "path:{n}"),
            FamilySpec::Cycle { n } => write!(f, "cycle:{n}"),
            FamilySpec::Complete { n } => write!(f, "complete:{n}"),
            FamilySpec::Random { n, num, den, seed } => write!(f, "random:{n},{num}/{den},{seed}"),
        }
    }
}

/// Parses `name:args`, e.g. `Hn:2`, `Hprime:3,1`, `cycle:5`,
/// `random:8,1/2,7`. Names are case-insensitive.
impl FromStr for FamilySpec {
    type Err = FamilyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let syntax = || FamilyError::Syntax(s.to_string());
        let (name, args) = s.split_once(':').ok_or_else(syntax)?;
        let args: Vec<&str> = args.split(',').map(str::trim).collect();
        let int = |t: &str| t.parse::<usize>().map_err(|_| syntax());
        let one = || match args.as_slice() {
            [n] => int(n),
            _ => Err(syntax()),
        };
        let spec = match name.trim().to_ascii_lowercase().as_str() {
            "hn" => FamilySpec::Hn { n: one()? },
            "hprime" => match args.as_slice() {
                [k, n] => FamilySpec::Hprime { k: int(k)?, n: int(n)? },
                _ => return Err(syntax()),
            },
            "path" => FamilySpec::Path { n: one()? },
            "cycle" => FamilySpec::Cycle { n: one()? },
            "complete" => FamilySpec::Complete { n: one()? },
            "random" => match args.as_slice() {
                [n, p, seed] => {
                    let (num, den) = p.split_once('/').ok_or_else(syntax)?;
                    FamilySpec::Random {
                        n: int(n)?,
                        num: num.trim().parse().map_err(|_| syntax())?,
                        den: den.trim().parse().map_err(|_| syntax())?,
                        seed: seed.parse().map_err(|_| syntax())?,
                    }
                }
                _ => return Err(syntax()),
            },
            other => return Err(FamilyError::UnknownFamily(other.to_string())),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Index of `b_i`, the center of `Q_i` (`i >= 1`), in [`gen_hn`].
pub fn hn_center(i: usize) -> usize {
    3 + 7 * (i - 1) + 3
}

pub fn gen_hn(n: usize) -> Result<Graph, FamilyError> {
    if n == 0 {
        return Err(FamilyError::ZeroHn);
    }
    let mut edges = vec![(0, 1), (1, 2)];
    for i in 1..=n {
        let base = 3 + 7 * (i - 1);
        edges.extend((base..base + 6).map(|v| (v, v + 1)));
        edges.push((0, hn_center(i)));
    }
    Ok(Graph::from_edges(3 + 7 * n, &edges)?)
}

pub fn gen_hprime(k: usize, n: usize) -> Result<Graph, FamilyError> {
    FamilySpec::Hprime { k, n }.validate()?;
    let m = k / 3;
    let block = 2 * k + 1;
    let mut edges = complete_edges(0, n);
    for i in 0..2 * n + 1 {
        let base = n + i * block;
        let clique = 2 * m - 1;
        edges.extend(complete_edges(base, clique));
        for p in 0..2 * m + 1 {
            let u = base + clique + 2 * p;
            edges.push((u, u + 1));
            for c in base..base + clique {
                edges.push((c, u));
                edges.push((c, u + 1));
            }
        }
        for r in 0..n {
            edges.extend((base..base + block).map(|v| (r, v)));
        }
    }
    Ok(Graph::from_edges(n + (2 * n + 1) * block, &edges)?)
}

pub fn gen_standard(spec: &FamilySpec) -> Result<Graph, FamilyError> {
    spec.validate()?;
    let (n, edges) = match *spec {
        FamilySpec::Path { n } => (n, (1..n).map(|v| (v - 1, v)).collect()),
        FamilySpec::Cycle { n } => (n, (0..n).map(|v| (v, (v + 1) % n)).collect()),
        FamilySpec::Complete { n } => (n, complete_edges(0, n)),
        FamilySpec::Random { n, num, den, seed } => {
            let mut rng = SplitMix64::seed_from_u64(seed);
            let threshold = (num as u128) << 64;
            let mut edges = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    if (rng.next_u64() as u128) * (den as u128) < threshold {
                        edges.push((u, v));
                    }
                }
            }
            (n, edges)
        }
        FamilySpec::Hn { n } => return gen_hn(n),
        FamilySpec::Hprime { k, n } => return gen_hprime(k, n),
    };
    Ok(Graph::from_edges(n, &edges)?)
}

fn complete_edges(base: usize, n: usize) -> Vec<(usize, usize)> {
    (base..base + n).flat_map(|u| (u + 1..base + n).map(move |v| (u, v))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hn_counts() {
        let g = gen_hn(1).unwrap();
        assert_eq!((g.order(), g.edge_count()), (10, 9));
        let g = gen_hn(2).unwrap();
        assert_eq!(g.order(), 17);
        assert_eq!(g.neighbors(0), &[1, hn_center(1), hn_center(2)]);
        assert_eq!(gen_hn(0).unwrap_err(), FamilyError::ZeroHn);
    }

    #[test]
    fn hn_degree_profile() {
        for n in 1..=4 {
            let g = gen_hn(n).unwrap();
            let mut degrees: Vec<usize> = (0..g.order()).map(|v| g.degree(v)).collect();
            degrees.sort_unstable();
            // a: n + 1; centers: 3; y and path ends: 1; everything else: 2.
            let mut expected = vec![1; 1 + 2 * n];
            expected.extend(vec![2; 1 + 4 * n]);
            expected.extend(vec![3; n]);
            expected.push(n + 1);
            expected.sort_unstable();
            assert_eq!(degrees, expected);
        }
    }

    #[test]
    fn hprime_counts() {
        let g = gen_hprime(3, 1).unwrap();
        assert_eq!(g.order(), 22);
        // Apex of the first block sees the six pair vertices and R_0.
        assert_eq!(g.neighbors(1), &[0, 2, 3, 4, 5, 6, 7]);
        assert_eq!(g.neighbors(2), &[0, 1, 3]);
        let g = gen_hprime(6, 2).unwrap();
        assert_eq!(g.order(), 2 + 5 * 13);
        assert_eq!(gen_hprime(4, 1).unwrap_err(), FamilyError::BadK(4));
        assert_eq!(gen_hprime(3, 0).unwrap_err(), FamilyError::ZeroHprime);
    }

    #[test]
    fn standard_graphs() {
        let c5 = gen_standard(&"cycle:5".parse().unwrap()).unwrap();
        assert_eq!(c5.edge_count(), 5);
        assert!((0..5).all(|v| c5.degree(v) == 2));
        assert_eq!(gen_standard(&"complete:4".parse().unwrap()).unwrap().edge_count(), 6);
        let spec: FamilySpec = "random:8,1/2,7".parse().unwrap();
        assert_eq!(spec.generate().unwrap(), spec.generate().unwrap());
        assert_eq!(FamilySpec::Random { n: 6, num: 1, den: 1, seed: 3 }.generate().unwrap().edge_count(), 15);
        assert_eq!(FamilySpec::Random { n: 6, num: 0, den: 1, seed: 3 }.generate().unwrap().edge_count(), 0);
    }

    #[test]
    fn splitmix_reference_output() {
        let mut rng = SplitMix64::seed_from_u64(0);
        assert_eq!(rng.next_u64(), 0xe220a8397b1dcdaf);
    }

    #[test]
    fn spec_round_trip() {
        for s in ["Hn:2", "Hprime:3,1", "path:4", "cycle:5", "complete:4", "random:8,1/2,7"] {
            let spec: FamilySpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert!(matches!("hn:0".parse::<FamilySpec>(), Err(FamilyError::ZeroHn)));
        assert!(matches!("wheel:5".parse::<FamilySpec>(), Err(FamilyError::UnknownFamily(_))));
        assert!(matches!("cycle".parse::<FamilySpec>(), Err(FamilyError::Syntax(_))));
        assert!(matches!("random:4,3/2,1".parse::<FamilySpec>(), Err(FamilyError::BadProbability { .. })));
    }
}
