use std::collections::HashSet;

use proptest::prelude::*;

use ign_core::assignment::{cross_normalize, dual_adjacency, WeightMatrix};
use ign_core::baselines::hungarian;
use ign_core::dynamics::{normalize, step, Activation};
use ign_core::graph::{canonical_code, enumerate_connected_graphs, AdjacencyMatrix};

const TOL: f64 = 1e-12;

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(p, q)| (p - q).abs() <= tol * p.abs().max(q.abs()).max(1.0))
}

/// A graph on `n` nodes from a bit per unordered pair.
fn graph_from_bits(n: usize, bits: &[bool]) -> AdjacencyMatrix {
    let mut edges = Vec::new();
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            if bits[k] {
                edges.push((i, j));
            }
            k += 1;
        }
    }
    AdjacencyMatrix::from_edges(n, &edges).unwrap()
}

fn graph_and_weights(max_n: usize) -> impl Strategy<Value = (AdjacencyMatrix, Vec<f64>)> {
    (1..=max_n).prop_flat_map(|n| {
        (
            proptest::collection::vec(any::<bool>(), n * (n - 1) / 2),
            proptest::collection::vec(1e-3..1.0f64, n),
        )
            .prop_map(move |(bits, x)| (graph_from_bits(n, &bits), x))
    })
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

fn relabelled(max_n: usize) -> impl Strategy<Value = (AdjacencyMatrix, Vec<f64>, Vec<usize>)> {
    graph_and_weights(max_n).prop_flat_map(|(a, x)| {
        let n = a.n();
        (Just(a), Just(x), permutation(n))
    })
}

fn square_matrix(max_n: usize) -> impl Strategy<Value = WeightMatrix> {
    (1..=max_n).prop_flat_map(|n| {
        proptest::collection::vec(1e-3..1.0f64, n * n).prop_map(move |d| WeightMatrix::from_row_major(n, d).unwrap())
    })
}

fn activation() -> impl Strategy<Value = Activation> {
    prop_oneof![
        Just(Activation::Identity),
        (1.0..4.0f64, 0.0..0.1f64).prop_map(|(a, t)| Activation::power(a, t).unwrap()),
        (0.5..10.0f64).prop_map(|a| Activation::sigmoid(a).unwrap()),
    ]
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..n {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

proptest! {
    #[test]
    fn normalization_is_scale_invariant((a, x) in graph_and_weights(12), c in 1e-3..1e3f64) {
        let scaled: Vec<f64> = x.iter().map(|v| c * v).collect();
        prop_assert!(close(&normalize(&a, &x).unwrap(), &normalize(&a, &scaled).unwrap(), TOL));
    }

    #[test]
    fn normalization_preserves_support((a, mut x) in graph_and_weights(12), zeros in proptest::collection::vec(any::<bool>(), 12)) {
        for (v, z) in x.iter_mut().zip(&zeros) {
            if *z {
                *v = 0.0;
            }
        }
        prop_assume!((0..a.n()).all(|i| a.closed_sum(&x, i) > 0.0));
        let y = normalize(&a, &x).unwrap();
        for (p, q) in x.iter().zip(y.iter()) {
            prop_assert_eq!(*p > 0.0, *q > 0.0);
        }
    }

    #[test]
    fn normalization_lands_in_unit_cube((a, x) in graph_and_weights(12)) {
        let y = normalize(&a, &x).unwrap();
        for i in 0..a.n() {
            prop_assert!(y[i] > 0.0 && y[i] <= 1.0);
            // a node and any neighbour cannot both exceed 1/2
            for &j in a.neighbors(i) {
                prop_assert!(y[i] + y[j] <= 1.0 + TOL);
            }
        }
    }

    #[test]
    fn step_commutes_with_relabelling((a, x, perm) in relabelled(10), h in activation()) {
        let n = a.n();
        let b = a.permuted(&perm);
        let mut px = vec![0.0; n];
        for i in 0..n {
            px[perm[i]] = x[i];
        }
        let y = step(&a, &x, &h).unwrap();
        let py = step(&b, &px, &h).unwrap();
        for i in 0..n {
            prop_assert!((py[perm[i]] - y[i]).abs() <= TOL);
        }
    }

    #[test]
    fn step_acts_componentwise_on_disjoint_unions((a, x) in graph_and_weights(7), (b, z) in graph_and_weights(7), h in activation()) {
        let (n, m) = (a.n(), b.n());
        let edges: Vec<_> = a.edges().chain(b.edges().map(|(i, j)| (i + n, j + n))).collect();
        let union = AdjacencyMatrix::from_edges(n + m, &edges).unwrap();
        let joined: Vec<f64> = x.iter().chain(&z).copied().collect();
        let whole = step(&union, &joined, &h).unwrap();
        prop_assert!(close(&whole[..n], &step(&a, &x, &h).unwrap(), TOL));
        prop_assert!(close(&whole[n..], &step(&b, &z, &h).unwrap(), TOL));
    }

    #[test]
    fn cross_normalization_commutes_with_row_and_column_permutations(
        (x, rp, cp) in square_matrix(8).prop_flat_map(|x| {
            let n = x.n();
            (Just(x), permutation(n), permutation(n))
        })
    ) {
        let n = x.n();
        let permute = |m: &WeightMatrix| {
            let mut d = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    d[rp[i] * n + cp[j]] = m.get(i, j);
                }
            }
            WeightMatrix::from_row_major(n, d).unwrap()
        };
        let lhs = cross_normalize(&permute(&x)).unwrap();
        let rhs = permute(&cross_normalize(&x).unwrap());
        prop_assert!(close(lhs.as_row_major(), rhs.as_row_major(), TOL));
    }

    #[test]
    fn cross_normalization_is_normalization_on_the_dual_graph(x in square_matrix(7)) {
        let direct = cross_normalize(&x).unwrap().vec_columns();
        let dual = normalize(&dual_adjacency(x.n()), &x.vec_columns()).unwrap();
        prop_assert!(close(&direct, &dual, 1e-14));
    }

    #[test]
    fn hungarian_matches_exhaustive_search(x in square_matrix(6)) {
        let best = permutations(x.n()).iter().map(|p| x.total_for(p)).fold(f64::NEG_INFINITY, f64::max);
        let (perm, total) = hungarian(&x).unwrap();
        prop_assert!((total - best).abs() <= 1e-9);
        prop_assert!((x.total_for(&perm) - total).abs() <= 1e-9);
    }

    #[test]
    fn canonical_code_ignores_labels((a, _, perm) in relabelled(7)) {
        prop_assert_eq!(canonical_code(&a), canonical_code(&a.permuted(&perm)));
    }
}

/// Isomorphism classes of connected graphs counted by minimizing the bit
/// string over all `n!` relabellings.
fn brute_force_connected_classes(n: usize) -> usize {
    let pairs = n * (n - 1) / 2;
    let perms = permutations(n);
    let mut classes = HashSet::new();
    for code in 0u32..1 << pairs {
        let bits: Vec<bool> = (0..pairs).map(|k| code >> k & 1 == 1).collect();
        let a = graph_from_bits(n, &bits);
        if !a.is_connected() {
            continue;
        }
        let canonical = perms.iter().map(|p| a.permuted(p).bit_string()).min().unwrap();
        classes.insert(canonical);
    }
    classes.len()
}

#[test]
fn enumeration_matches_full_relabelling_search() {
    for n in 1..=6 {
        let listed = enumerate_connected_graphs(n).unwrap();
        assert_eq!(listed.len(), brute_force_connected_classes(n), "n = {n}");
        let perms = permutations(n);
        let classes: HashSet<_> = listed
            .iter()
            .map(|a| perms.iter().map(|p| a.permuted(p).bit_string()).min().unwrap())
            .collect();
        assert_eq!(
            classes.len(),
            listed.len(),
            "n = {n}: representatives are pairwise non-isomorphic"
        );
        assert!(listed.iter().all(AdjacencyMatrix::is_connected));
    }
    assert_eq!(enumerate_connected_graphs(7).unwrap().len(), 853);
}
