use pathfactor::deficiency::{check_family_bound, max_deficit, FamilyBound, SweepConfig};
use pathfactor::extremal::{gen_hn, gen_hprime, FamilySpec};
use pathfactor::factor::{find_factor_exact, Orders};
use pathfactor::graph::Graph;

/// Component orders of `g - x` by plain DFS over adjacency lists.
fn orders_after_removal(g: &Graph, x: u64) -> Vec<usize> {
    let n = g.order();
    let mut seen: Vec<bool> = (0..n).map(|v| x >> v & 1 == 1).collect();
    let mut out = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut stack = vec![s];
        let mut size = 0;
        while let Some(v) = stack.pop() {
            size += 1;
            for &w in g.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        out.push(size);
    }
    out
}

/// max over X of 3 c1 + 2 c3 - 4|X|, by direct enumeration.
fn oracle_max_deficit(g: &Graph) -> i64 {
    (0u64..1 << g.order())
        .map(|x| {
            let orders = orders_after_removal(g, x);
            let c1 = orders.iter().filter(|&&o| o == 1).count() as i64;
            let c3 = orders.iter().filter(|&&o| o == 3).count() as i64;
            3 * c1 + 2 * c3 - 4 * x.count_ones() as i64
        })
        .max()
        .unwrap()
}

#[test]
fn hn_deficit_peaks_at_two() {
    for n in 1..=2 {
        let g = gen_hn(n).unwrap();
        let (d, x) = max_deficit(&g, &SweepConfig::default()).unwrap();
        assert_eq!(d.0, oracle_max_deficit(&g));
        assert_eq!(d.0, 2);
        let profile = g.components_after_removal(&x).unwrap();
        let got = 3 * profile.count(1) as i64 + 2 * profile.count(3) as i64 - 4 * x.len() as i64;
        assert_eq!(got, 2);
        let report = check_family_bound(&g, &FamilyBound::hn()).unwrap();
        assert_eq!(report.max_slack, 0);
    }
}

#[test]
fn hn_has_no_p2_p5_factor() {
    let orders = Orders::two_and_odd(2);
    for n in 1..=3 {
        assert!(find_factor_exact(&gen_hn(n).unwrap(), &orders).unwrap().is_none(), "n = {n}");
    }
}

#[test]
fn hprime_has_no_p2_p7_factor() {
    let g = gen_hprime(3, 1).unwrap();
    assert!(find_factor_exact(&g, &Orders::two_and_odd(3)).unwrap().is_none());
}

#[test]
fn hprime_violates_the_conjectured_hypothesis() {
    let g = gen_hprime(3, 1).unwrap();
    let report = check_family_bound(&g, &FamilyBound::conjecture(3)).unwrap();
    assert!(report.max_slack > 0);
    // The reported X really violates the scaled inequality.
    let x = report.witness.set.mask().unwrap();
    let odd = orders_after_removal(&g, x).iter().filter(|&&o| o % 2 == 1 && o < 6).count() as i64;
    assert!(27 * odd > 18 * x.count_ones() as i64);
}

#[test]
fn random_graphs_are_reproducible() {
    for seed in 0..20 {
        let spec = FamilySpec::Random { n: 10, num: 1, den: 3, seed };
        assert!(spec.generate().unwrap() == spec.generate().unwrap());
    }
    let a = FamilySpec::Random { n: 12, num: 1, den: 2, seed: 1 }.generate().unwrap();
    let b = FamilySpec::Random { n: 12, num: 1, den: 2, seed: 2 }.generate().unwrap();
    assert!(a != b);
}
