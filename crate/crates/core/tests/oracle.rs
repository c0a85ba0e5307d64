mod common;

use common::random_factors;
use macstate::oracle::{direct_info_terms, exhaustive_region, GridSpec};
use macstate::*;

fn small_search(u: usize, v: usize) -> SearchConfig {
    SearchConfig { u_cap: Some(u), v_cap: Some(v), ..SearchConfig::default() }
}

#[test]
fn trivial_joints_have_no_information() {
    let ch = Channel::xor(0.5).unwrap();
    let uniform = Factors::uniform(2, 2, 2, 2, 2).joint(&ch).unwrap();
    let point = Factors::from_laws(2, 2, 2, 2, 2, |x| [1.0, 0.0][x], |_, _, v| [0.0, 1.0][v], |_, _, _, u, x1| {
        (u == 1 && x1 == 0) as u8 as f64
    })
    .unwrap()
    .joint(&Channel::useless().unwrap())
    .unwrap();
    for joint in [uniform, point] {
        for (name, v) in direct_info_terms(&joint) {
            assert!(v.abs() < 1e-12, "{name} = {v}");
        }
    }
}

#[test]
fn direct_terms_agree_with_the_entropy_route() {
    for (c, ch) in common::all_fixtures().into_iter().enumerate() {
        for seed in 0..4 {
            let joint = random_factors(&ch, 3, 2, 100 * c as u64 + seed).joint(&ch).unwrap();
            let direct = direct_info_terms(&joint);
            let names: Vec<&str> = direct.keys().map(String::as_str).collect();
            let fast = eval_atoms(&joint, &names).unwrap();
            for (name, v) in &direct {
                let atom: Atom = name.parse().unwrap();
                assert!((fast[&atom] - v).abs() < 1e-10, "{} {name}: {} vs {v}", ch.id(), fast[&atom]);
            }
            let (r1, sum) = pair_bounds(&joint).unwrap();
            assert!((r1 - (direct["I(U;Y|V,X2)"] - direct["I(U;S|V,X2)"])).abs() < 1e-10);
            assert!((sum - (direct["I(U,V,X2;Y)"] - direct["I(U,V,X2;S)"])).abs() < 1e-10);
            assert!(direct["I(X2;S)"].abs() < 1e-12);
        }
    }
}

#[test]
fn exhaustive_clean_mac_reaches_the_corner() {
    let r = exhaustive_region(&Channel::clean_mac().unwrap(), &GridSpec::default()).unwrap();
    assert!(r.contains(RatePair::new(1.0, 1.0), 1e-12));
    assert!(r.max_sum_rate() <= 2.0 + 1e-12);
    assert!((r.max_rc() - 2.0).abs() < 1e-12);
}

#[test]
fn exhaustive_useless_channel_is_the_origin() {
    let g = GridSpec { u_size: 2, v_size: 1, levels: 2, max_points: 1_000_000 };
    let r = exhaustive_region(&Channel::useless().unwrap(), &g).unwrap();
    assert!(r.max_rc() < 1e-12 && r.max_r1() < 1e-12, "{:?}", r.rates());
}

#[test]
fn search_matches_the_exhaustive_grid_on_xor() {
    let ch = Channel::xor(0.5).unwrap();
    let grid = exhaustive_region(&ch, &GridSpec { u_size: 2, v_size: 1, levels: 2, max_points: 1_000_000 }).unwrap();
    let found = compute_region(&ch, &small_search(2, 1)).unwrap();
    assert!(found.dominates(&grid, 1e-9));
    let d = region_distance(&grid, &found).unwrap();
    assert!(d <= 0.05, "{d}");
}
