mod common;

use lattice_riemann::{
    band_eq, band_leq, band_lt, totally_ordered_decomposition, totord, totord_lattice_polynomial,
    trichotomy, Band, Element,
};
use proptest::prelude::*;

fn element(dim: usize) -> impl Strategy<Value = Element> {
    prop::collection::vec(
        prop_oneof![(-3i32..=3).prop_map(f64::from), -5.0..5.0f64],
        dim,
    )
    .prop_map(|v| Element::new(v).unwrap())
}

fn pair() -> impl Strategy<Value = (Element, Element)> {
    (1usize..=6).prop_flat_map(|d| (element(d), element(d)))
}

fn point_set() -> impl Strategy<Value = Vec<Element>> {
    (1usize..=6, 1usize..=8).prop_flat_map(|(d, n)| prop::collection::vec(element(d), n))
}

fn band(dim: usize) -> impl Strategy<Value = Band> {
    prop::collection::vec(any::<bool>(), dim)
        .prop_map(move |mask| Band::new(dim, (0..dim).filter(|&i| mask[i])).unwrap())
}

fn column(points: &[Element], atom: usize) -> Vec<f64> {
    let mut c: Vec<f64> = points.iter().map(|p| p.get(atom)).collect();
    c.sort_by(f64::total_cmp);
    c
}

fn is_chain(points: &[Element]) -> bool {
    points.windows(2).all(|w| w[0].leq(&w[1]).unwrap())
}

/// All set partitions of `0..n`, as part-index vectors in restricted growth form.
fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn go(i: usize, n: usize, cur: &mut Vec<usize>, max: usize, out: &mut Vec<Vec<usize>>) {
        if i == n {
            out.push(cur.clone());
            return;
        }
        for b in 0..=max + 1 {
            cur.push(b);
            go(i + 1, n, cur, max.max(b), out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        let mut cur = vec![0];
        go(1, n, &mut cur, 0, &mut out);
    }
    out
}

/// Every part's projection of `points` is totally ordered.
fn valid_decomposition(points: &[Element], parts: &[Vec<usize>]) -> bool {
    parts.iter().all(|atoms| {
        points.iter().all(|p| {
            points.iter().all(|q| {
                atoms.iter().all(|&i| p.get(i) <= q.get(i))
                    || atoms.iter().all(|&i| q.get(i) <= p.get(i))
            })
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn trichotomy_parts_are_disjoint_and_cover((x, y) in pair()) {
        let d = trichotomy(&x, &y).unwrap();
        let mut seen = vec![0; x.dim()];
        for part in d.parts() {
            for a in part.atoms() {
                seen[a] += 1;
            }
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
        prop_assert_eq!(&d.parts()[2], &band_eq(&x, &y).unwrap());
    }

    #[test]
    fn strict_and_weak_bands_split_the_atoms((x, y) in pair()) {
        let lt = band_lt(&x, &y).unwrap();
        let geq = band_leq(&y, &x).unwrap();
        prop_assert!(lt.intersection(&geq).unwrap().is_empty());
        prop_assert_eq!(lt.union(&geq).unwrap(), Band::full(x.dim()).unwrap());
    }

    #[test]
    fn projections_are_idempotent_linear_and_complementary(
        (x, y, b, r) in (1usize..=6).prop_flat_map(|d| (element(d), element(d), band(d), -3.0..3.0f64))
    ) {
        let px = b.project(&x).unwrap();
        prop_assert_eq!(b.project(&px).unwrap(), px.clone());
        prop_assert_eq!(px.add(&b.complement().project(&x).unwrap()).unwrap(), x.clone());
        let lhs = b.project(&x.scale(r).unwrap().add(&y).unwrap()).unwrap();
        let rhs = px.scale(r).unwrap().add(&b.project(&y).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn totord_routes_agree(points in point_set()) {
        prop_assert_eq!(totord(&points).unwrap(), totord_lattice_polynomial(&points).unwrap());
    }

    #[test]
    fn totord_is_a_chain_with_the_same_columns(points in point_set()) {
        let chain = totord(&points).unwrap();
        prop_assert!(is_chain(&chain));
        for atom in 0..points[0].dim() {
            prop_assert_eq!(column(&chain, atom), column(&points, atom));
        }
        prop_assert_eq!(totord(&chain).unwrap(), chain);
    }

    #[test]
    fn decomposition_parts_are_totally_ordered(points in point_set()) {
        let d = totally_ordered_decomposition(&points).unwrap();
        let parts: Vec<Vec<usize>> = d.parts().iter().map(|b| b.atoms().collect()).collect();
        prop_assert!(valid_decomposition(&points, &parts));
    }

    #[test]
    fn decomposition_is_coarsest_without_ties(
        points in (1usize..=5, 2usize..=5).prop_flat_map(|(d, n)| prop::collection::vec(
            prop::collection::vec(-5.0..5.0f64, d).prop_map(|v| Element::new(v).unwrap()), n))
    ) {
        let dim = points[0].dim();
        for atom in 0..dim {
            let c = column(&points, atom);
            prop_assume!(c.windows(2).all(|w| w[0] < w[1]));
        }
        let ours = totally_ordered_decomposition(&points).unwrap();
        let mut best: Option<Vec<Vec<usize>>> = None;
        for labels in set_partitions(dim) {
            let k = labels.iter().max().unwrap() + 1;
            let parts: Vec<Vec<usize>> = (0..k).map(|b| (0..dim).filter(|&i| labels[i] == b).collect()).collect();
            if valid_decomposition(&points, &parts) && best.as_ref().is_none_or(|b| parts.len() < b.len()) {
                best = Some(parts);
            }
        }
        let ours: Vec<Vec<usize>> = ours.parts().iter().map(|b| b.atoms().collect()).collect();
        prop_assert_eq!(ours, best.unwrap());
    }
}

#[test]
fn set_partition_counts_are_bell_numbers() {
    let counts: Vec<usize> = (1..=5).map(|n| set_partitions(n).len()).collect();
    assert_eq!(counts, vec![1, 2, 5, 15, 52]);
}
