//! Independent enumeration oracle.
//!
//! The library counts polygons by walking 1-pattern chains.  This test
//! enumerates polygons a completely different way — a vertex-level
//! depth-first search over self-avoiding closed walks in the tube, one
//! representative per `x`-translation class — and compares the two counts
//! for every `(n, span)` cell, with and without the 2-section filter.

use std::collections::BTreeMap;

use tubeknots::enumerate::{enumerate_polygons, EnumerateOptions, Filter};
use tubeknots::lattice::{LatticePolygon, TubeDims};

/// Self-contained vertex-level enumeration: counts keyed by `(n, span)`,
/// total and no-2-section (all planes crossed by at least 4 `x`-edges).
mod oracle {
    use std::collections::BTreeMap;

    type V = (i32, i32, i32);

    pub struct Tables {
        pub all: BTreeMap<(u32, u32), u64>,
        pub no2: BTreeMap<(u32, u32), u64>,
    }

    pub fn enumerate(n_max: u32) -> Tables {
        let mut tables = Tables {
            all: BTreeMap::new(),
            no2: BTreeMap::new(),
        };
        // The lexicographically smallest vertex of a polygon touching the
        // plane x = 0 lies in that plane; walk from each choice of it.
        for y0 in 0..=2 {
            for z0 in 0..=1 {
                let v0 = (0, y0, z0);
                let mut path = vec![v0];
                dfs(v0, &mut path, n_max, &mut tables);
            }
        }
        tables
    }

    fn neighbours(v: V) -> [V; 6] {
        let (x, y, z) = v;
        [
            (x + 1, y, z),
            (x - 1, y, z),
            (x, y + 1, z),
            (x, y - 1, z),
            (x, y, z + 1),
            (x, y, z - 1),
        ]
    }

    fn manhattan(a: V, b: V) -> u32 {
        ((a.0 - b.0).abs() + (a.1 - b.1).abs() + (a.2 - b.2).abs()) as u32
    }

    fn dfs(v0: V, path: &mut Vec<V>, n_max: u32, tables: &mut Tables) {
        let cur = *path.last().unwrap();
        for nb in neighbours(cur) {
            if nb == v0 {
                if path.len() >= 4 && path[1] < path[path.len() - 1] {
                    record(path, tables);
                }
                continue;
            }
            let (x, y, z) = nb;
            if !(0..=2).contains(&y) || !(0..=1).contains(&z) {
                continue;
            }
            if nb <= v0 || x as u32 > (n_max - 2) / 2 {
                continue;
            }
            if path.contains(&nb) {
                continue;
            }
            // After pushing nb the cycle has path.len()+1 vertices and the
            // cheapest return adds manhattan-1 more plus the closing edge,
            // so its final length is at least path.len() + manhattan.
            if path.len() as u32 + manhattan(nb, v0) > n_max {
                continue;
            }
            path.push(nb);
            dfs(v0, path, n_max, tables);
            path.pop();
        }
    }

    fn record(path: &[V], tables: &mut Tables) {
        let n = path.len() as u32;
        let span = path.iter().map(|v| v.0).max().unwrap() as u32;
        let mut crossings = vec![0u32; span as usize + 1];
        for i in 0..path.len() {
            let a = path[i];
            let b = path[(i + 1) % path.len()];
            if a.0 != b.0 {
                crossings[a.0.max(b.0) as usize] += 1;
            }
        }
        *tables.all.entry((n, span)).or_default() += 1;
        if (1..=span as usize).all(|k| crossings[k] >= 4) {
            *tables.no2.entry((n, span)).or_default() += 1;
        }
    }
}

fn production_table(n_max: u32, filter: Filter) -> BTreeMap<(u32, u32), u64> {
    let mut opts = EnumerateOptions::new(n_max);
    opts.filter = filter;
    let table = enumerate_polygons(TubeDims::default(), &opts, None).unwrap();
    table
        .entries()
        .map(|(n, s, c)| {
            let digits = c.to_u64_digits();
            assert!(digits.len() <= 1);
            ((n, s), digits.first().copied().unwrap_or(0))
        })
        .collect()
}

#[test]
fn oracle_totals_match_published_counts() {
    let tables = oracle::enumerate(14);
    let mut totals: BTreeMap<u32, u64> = BTreeMap::new();
    for (&(n, _), &c) in &tables.all {
        *totals.entry(n).or_default() += c;
    }
    let expected = [(4, 9), (6, 42), (8, 209), (10, 1113), (12, 5835), (14, 30561)];
    for (n, count) in expected {
        assert_eq!(totals[&n], count, "oracle total at n = {n}");
    }
}

#[test]
fn production_matches_oracle_by_n_and_span() {
    let tables = oracle::enumerate(14);
    assert_eq!(
        production_table(14, Filter::All),
        tables.all,
        "chain walk vs vertex walk, unfiltered"
    );
}

#[test]
fn filtered_production_matches_oracle() {
    let tables = oracle::enumerate(14);
    assert_eq!(
        production_table(14, Filter::NoTwoSections),
        tables.no2,
        "chain walk vs vertex walk, no-2-section filter"
    );
    // Frozen totals from the vertex-level oracle.
    let mut totals: BTreeMap<u32, u64> = BTreeMap::new();
    for (&(n, _), &c) in &tables.no2 {
        *totals.entry(n).or_default() += c;
    }
    let frozen: &[(u32, u64)] = &[(4, 2), (6, 1), (8, 4), (10, 38), (12, 18), (14, 154)];
    let got: Vec<(u32, u64)> = totals.into_iter().collect();
    assert_eq!(got, frozen, "frozen no-2-section totals");
}

#[test]
fn transfer_series_matches_chain_walk() {
    use tubeknots::patterns::{restricted_system, standard_system};
    for (filter, sys) in [
        (Filter::All, standard_system()),
        (Filter::NoTwoSections, restricted_system()),
    ] {
        let series = sys.transfer_series(14);
        let mut opts = EnumerateOptions::new(14);
        opts.filter = filter;
        let walk = enumerate_polygons(TubeDims::default(), &opts, None).unwrap();
        assert_eq!(series, walk, "series vs walk with {:?}", filter);
    }
}

#[test]
fn shards_partition_the_walk() {
    let full = production_table(12, Filter::All);
    let k = 7;
    let mut merged: BTreeMap<(u32, u32), u64> = BTreeMap::new();
    for i in 0..k {
        let mut opts = EnumerateOptions::new(12);
        opts.shard = Some((k, i));
        let table = enumerate_polygons(TubeDims::default(), &opts, None).unwrap();
        for (n, s, c) in table.entries() {
            let digits = c.to_u64_digits();
            *merged.entry((n, s)).or_default() += digits.first().copied().unwrap_or(0);
        }
    }
    assert_eq!(merged, full, "the {k} shards must sum to the total");
}

#[test]
fn parallel_walk_equals_sequential() {
    let seq = production_table(12, Filter::All);
    let mut opts = EnumerateOptions::new(12);
    opts.parallel = true;
    let par = enumerate_polygons(TubeDims::default(), &opts, None).unwrap();
    let par: BTreeMap<(u32, u32), u64> = par
        .entries()
        .map(|(n, s, c)| ((n, s), c.to_u64_digits().first().copied().unwrap_or(0)))
        .collect();
    assert_eq!(par, seq);
}

#[test]
fn sink_delivers_every_polygon_exactly_once() {
    let mut seen = std::collections::HashSet::new();
    let mut count = 0u64;
    let mut sink = |p: &LatticePolygon| {
        assert!(p.len() <= 10);
        let text = p.to_text();
        assert_eq!(
            LatticePolygon::from_text(&text).unwrap().to_text(),
            text,
            "sink output round-trips"
        );
        assert!(seen.insert(text), "duplicate polygon {p}");
        count += 1;
    };
    let opts = EnumerateOptions::new(10);
    let table = enumerate_polygons(TubeDims::default(), &opts, Some(&mut sink)).unwrap();
    let total: u64 = table
        .totals()
        .into_iter()
        .map(|(_, c)| c.to_u64_digits().first().copied().unwrap_or(0))
        .sum();
    assert_eq!(count, total, "one sink call per counted polygon");
    assert_eq!(total, 9 + 42 + 209 + 1113);
}

#[test]
fn log_count_over_n_is_increasing() {
    let table = production_table(14, Filter::All);
    let mut totals: BTreeMap<u32, u64> = BTreeMap::new();
    for (&(n, _), &c) in &table {
        *totals.entry(n).or_default() += c;
    }
    let mut prev = f64::MIN;
    for (&n, &c) in &totals {
        let ratio = (c as f64).ln() / n as f64;
        assert!(
            ratio > prev,
            "log p_n / n must increase: failed at n = {n}"
        );
        prev = ratio;
    }
}

#[test]
fn resource_limits_are_enforced() {
    let opts = EnumerateOptions::new(64);
    assert!(enumerate_polygons(TubeDims::default(), &opts, None).is_err());
    let mut opts = EnumerateOptions::new(8);
    opts.shard = Some((4, 4));
    assert!(enumerate_polygons(TubeDims::default(), &opts, None).is_err());
}
