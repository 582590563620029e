#![allow(dead_code)]

use std::collections::BTreeMap;

use statrs::distribution::{ChiSquared, ContinuousCDF};

use dcm_lab::degrees::{sample_iid_bidegree, BiDegreeSequence, IidParams, JointDegreeLaw};
use dcm_lab::graph::{pair_stubs, Digraph};
use dcm_lab::Seed;

pub fn sequence(law: &str, n: usize, seed: Seed) -> BiDegreeSequence {
    let law: JointDegreeLaw = law.parse().unwrap();
    sample_iid_bidegree(&law, IidParams::new(n, 0.25), seed).unwrap()
}

pub fn graph(law: &str, n: usize, seed: Seed) -> Digraph {
    pair_stubs(&sequence(law, n, seed.derive(0)), seed.derive(1))
}

/// p-value of Pearson's goodness-of-fit statistic; cells with expected
/// count below 5 are pooled into one.
pub fn chi_square_gof<K: Ord>(observed: &BTreeMap<K, f64>, expected: &BTreeMap<K, f64>) -> f64 {
    let (mut stat, mut cells) = (0.0, 0usize);
    let (mut pooled_o, mut pooled_e) = (0.0, 0.0);
    for (k, &e) in expected {
        let o = observed.get(k).copied().unwrap_or(0.0);
        if e < 5.0 {
            pooled_o += o;
            pooled_e += e;
        } else {
            stat += (o - e).powi(2) / e;
            cells += 1;
        }
    }
    assert!(observed.keys().all(|k| expected.contains_key(k)), "observation outside the support");
    if pooled_e > 0.0 {
        stat += (pooled_o - pooled_e).powi(2) / pooled_e;
        cells += 1;
    }
    if cells < 2 {
        return 1.0;
    }
    ChiSquared::new((cells - 1) as f64).unwrap().sf(stat)
}

/// p-value of the two-sample homogeneity test on a 2 × k table.
pub fn chi_square_two_sample<K: Ord + Clone>(a: &BTreeMap<K, f64>, b: &BTreeMap<K, f64>) -> f64 {
    let na: f64 = a.values().sum();
    let nb: f64 = b.values().sum();
    let mut keys: Vec<K> = a.keys().chain(b.keys()).cloned().collect();
    keys.sort();
    keys.dedup();
    let total = na + nb;
    let (mut stat, mut cells) = (0.0, 0usize);
    let (mut ra, mut rb) = (0.0, 0.0);
    let flush = |oa: f64, ob: f64, stat: &mut f64, cells: &mut usize| {
        let col = oa + ob;
        let (ea, eb) = (col * na / total, col * nb / total);
        *stat += (oa - ea).powi(2) / ea + (ob - eb).powi(2) / eb;
        *cells += 1;
    };
    for k in &keys {
        let oa = a.get(k).copied().unwrap_or(0.0);
        let ob = b.get(k).copied().unwrap_or(0.0);
        if (oa + ob) * na.min(nb) / total < 5.0 {
            ra += oa;
            rb += ob;
        } else {
            flush(oa, ob, &mut stat, &mut cells);
        }
    }
    if ra + rb > 0.0 {
        flush(ra, rb, &mut stat, &mut cells);
    }
    if cells < 2 {
        return 1.0;
    }
    ChiSquared::new((cells - 1) as f64).unwrap().sf(stat)
}

/// All-pairs distances by Floyd-Warshall; `u32::MAX` for unreachable pairs.
pub fn floyd_warshall(g: &Digraph) -> Vec<Vec<u32>> {
    let n = g.n();
    let inf = u32::MAX;
    let mut d = vec![vec![inf; n]; n];
    for (u, row) in d.iter_mut().enumerate() {
        row[u] = 0;
        for &v in g.out_neighbors(u) {
            if v as usize != u {
                row[v as usize] = 1;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            let dik = d[i][k];
            if dik == inf {
                continue;
            }
            for j in 0..n {
                let dkj = d[k][j];
                if dkj != inf && dik + dkj < d[i][j] {
                    d[i][j] = dik + dkj;
                }
            }
        }
    }
    d
}
