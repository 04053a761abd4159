//! Engine-level properties checked against exhaustive oracles.

use causalweave::discovery::{fci, BackgroundKnowledge, FciOptions};
use causalweave::encode::{encode, EncodingStrategy};
use causalweave::stats::FisherZ;
use causalweave::synth::{d_separated, DSepOracle, GroundTruthDag};

/// Instances (found by exhaustive search over 5-observed/2-latent models)
/// where the neighborhood-only adjacency phase keeps an edge that *is*
/// separable: the Possible-D-SEP stage must remove it.
#[test]
fn pds_stage_removes_edges_plain_search_cannot() {
    // (observed-DAG edges, children of latent 1, children of latent 2, pair)
    let instances: [(&[(usize, usize)], [usize; 2], [usize; 2], (usize, usize)); 3] = [
        (&[(0, 1), (0, 2), (1, 4), (2, 3)], [1, 3], [2, 4], (3, 4)),
        (&[(0, 1), (0, 2), (1, 3), (2, 4)], [1, 4], [2, 3], (3, 4)),
        (&[(0, 1), (0, 3), (1, 2), (3, 4)], [1, 4], [2, 3], (2, 4)),
    ];
    for (base, c1, c2, (a, b)) in instances {
        let names: Vec<String> = (0..7).map(|i| format!("x{i}")).collect();
        let mut edges = base.to_vec();
        edges.extend(c1.iter().map(|&c| (5usize, c)));
        edges.extend(c2.iter().map(|&c| (6usize, c)));
        let dag = GroundTruthDag::linear_gaussian(names.clone(), &edges, 1.0, 1.0);
        let observed: Vec<usize> = (0..5).collect();
        let obs_names: Vec<String> = observed.iter().map(|&i| names[i].clone()).collect();
        let oracle = DSepOracle::marginal(&dag, observed.clone());

        // the pair is separable by some observed subset...
        let rest: Vec<usize> = (0..5).filter(|&v| v != a && v != b).collect();
        let separable = (0..(1usize << rest.len())).any(|mask| {
            let s: Vec<usize> = rest
                .iter()
                .enumerate()
                .filter(|(bit, _)| mask & (1 << bit) != 0)
                .map(|(_, &v)| v)
                .collect();
            d_separated(&dag, a, b, &s)
        });
        assert!(separable);

        // ...but the adjacency phase alone keeps it...
        let (skel, _) = causalweave::discovery::skeleton(
            &oracle,
            &obs_names,
            &FciOptions::default(),
            &BackgroundKnowledge::none(),
        )
        .unwrap();
        assert!(skel.adjacent(a, b), "pair should survive plain search");

        // ...and the full engine with the Possible-D-SEP stage removes it
        let pag = fci(
            &oracle,
            &obs_names,
            &FciOptions::default(),
            &BackgroundKnowledge::none(),
        )
        .unwrap();
        assert!(!pag.adjacent(a, b), "PDS stage must remove ({a},{b})");
    }
}

/// FCI adjacency on a marginalized model: two observed variables stay
/// adjacent iff *no* subset of the remaining observed variables separates
/// them. This is the property the Possible-D-SEP stage exists to deliver —
/// plain neighborhood search can leave extra edges when latents are present.
#[test]
fn marginal_fci_skeleton_matches_exhaustive_separability() {
    for seed in 0..60u64 {
        let n = 5 + (seed as usize % 2); // 5..=6 nodes
        let dag = GroundTruthDag::random(n, 0.5, 3000 + seed);
        let hidden = (seed as usize) % n;
        let observed: Vec<usize> = (0..n).filter(|&v| v != hidden).collect();
        let names: Vec<String> = observed.iter().map(|&i| dag.names()[i].clone()).collect();

        let oracle = DSepOracle::marginal(&dag, observed.clone());
        let pag = fci(
            &oracle,
            &names,
            &FciOptions::default(),
            &BackgroundKnowledge::none(),
        )
        .unwrap();

        let m = observed.len();
        for a in 0..m {
            for b in (a + 1)..m {
                let rest: Vec<usize> = (0..m).filter(|&v| v != a && v != b).collect();
                let separable = (0..(1usize << rest.len())).any(|mask| {
                    let s: Vec<usize> = rest
                        .iter()
                        .enumerate()
                        .filter(|(bit, _)| mask & (1 << bit) != 0)
                        .map(|(_, &v)| observed[v])
                        .collect();
                    d_separated(&dag, observed[a], observed[b], &s)
                });
                assert_eq!(
                    pag.adjacent(a, b),
                    !separable,
                    "seed {seed}: pair ({}, {}) adjacency disagrees with exhaustive search",
                    names[a],
                    names[b]
                );
            }
        }
    }
}

/// Sampling faithfulness: on seeded linear-Gaussian models (weights in
/// ±[0.5, 2.0]), Fisher's z at n = 5000, α = 0.01 agrees with exact
/// d-separation on at least 90% of all (x, y, S) queries with |S| ≤ 2.
#[test]
fn sampled_fisher_z_agrees_with_d_separation() {
    let n_rows = 5000;
    let mut agree = 0u32;
    let mut total = 0u32;
    for seed in 0..20u64 {
        let dag = GroundTruthDag::random(6, 0.4, 400 + seed);
        let table = dag.sample(n_rows, 9000 + seed).unwrap();
        let m = encode(&table, EncodingStrategy::DropFirst).unwrap();
        let tester = FisherZ::new(&m, 0.01).unwrap();

        let n = dag.n_nodes();
        for x in 0..n {
            for y in (x + 1)..n {
                let rest: Vec<usize> = (0..n).filter(|&v| v != x && v != y).collect();
                for mask in 0..(1usize << rest.len()) {
                    let s: Vec<usize> = rest
                        .iter()
                        .enumerate()
                        .filter(|(bit, _)| mask & (1 << bit) != 0)
                        .map(|(_, &v)| v)
                        .collect();
                    if s.len() > 2 {
                        continue;
                    }
                    total += 1;
                    let truth = d_separated(&dag, x, y, &s);
                    let verdict = tester.test(x, y, &s).unwrap().independent;
                    if truth == verdict {
                        agree += 1;
                    }
                }
            }
        }
    }
    let rate = f64::from(agree) / f64::from(total);
    assert!(
        rate >= 0.90,
        "agreement {agree}/{total} = {rate:.3} below 0.90"
    );
}
