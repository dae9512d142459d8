use std::collections::{BTreeSet, HashMap};

use geosid_core::geo::{haversine_km, GeoPoint};
use geosid_core::ingest::PoiRecord;
use geosid_core::sid::{
    build_registry, build_registry_with_model, EmbeddingTable, RegistryEntry, RvqModel, SidConfig,
    SidRegistry, SpatialSemanticId,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// 28 blobs of two points each, blob width 1e-3, centers spread over [-100, 100]^8.
fn blob_fixture() -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(28);
    let centers: Vec<Vec<f64>> = (0..28)
        .map(|_| (0..8).map(|_| rng.gen_range(-100.0..100.0)).collect())
        .collect();
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (label, c) in centers.iter().enumerate() {
        for _ in 0..2 {
            points.push(c.iter().map(|x| x + rng.gen_range(-1e-3..1e-3)).collect());
            labels.push(label);
        }
    }
    (points, labels)
}

#[test]
fn blob_partition_recovered_up_to_relabeling() {
    let (points, labels) = blob_fixture();
    // Oracle: blobs are far apart relative to their width, so the optimal
    // 28-partition is the blob partition; its SSE is the within-blob spread.
    let min_center_gap = (0..56)
        .flat_map(|i| (0..56).map(move |j| (i, j)))
        .filter(|(i, j)| labels[*i] != labels[*j])
        .map(|(i, j)| sq(&points[i], &points[j]))
        .fold(f64::INFINITY, f64::min);
    assert!(min_center_gap > 1.0);
    let oracle_sse: f64 = (0..28)
        .map(|b| {
            let (p, q) = (&points[2 * b], &points[2 * b + 1]);
            sq(p, q) / 2.0
        })
        .sum();

    let model = RvqModel::train(&points, 2, 28, 42).unwrap();
    let codes: Vec<u16> = points.iter().map(|p| model.encode(p).unwrap()[0]).collect();
    let mut label_to_code = HashMap::new();
    let mut code_to_label = HashMap::new();
    for (l, c) in labels.iter().zip(&codes) {
        assert_eq!(
            *label_to_code.entry(*l).or_insert(*c),
            *c,
            "blob split across codes"
        );
        assert_eq!(
            *code_to_label.entry(*c).or_insert(*l),
            *l,
            "code spans blobs"
        );
    }
    assert_eq!(label_to_code.len(), 28);
    // Brute-force nearest-centroid check of every level-1 code.
    for (p, c) in points.iter().zip(&codes) {
        let best = model.codebooks[0]
            .iter()
            .enumerate()
            .min_by(|a, b| sq(p, a.1).partial_cmp(&sq(p, b.1)).unwrap())
            .unwrap()
            .0;
        assert_eq!(best as u16, *c);
    }
    let level1 = model.reconstruction_errors(&points).unwrap()[0];
    assert!(
        (level1 - oracle_sse).abs() <= 1e-9 * oracle_sse.max(1.0),
        "{level1} vs {oracle_sse}"
    );
}

#[test]
fn lloyd_error_never_increases_over_100_seeds() {
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let n = rng.gen_range(30..120);
        let data: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..5).map(|_| rng.gen_range(-3.0..3.0)).collect())
            .collect();
        let model = RvqModel::train(&data, 3, 12, seed).unwrap();
        for (level, trace) in model.error_trace.iter().enumerate() {
            assert!(!trace.is_empty());
            for w in trace.windows(2) {
                assert!(w[1] <= w[0], "seed {seed} level {level}: {trace:?}");
            }
        }
        let totals = model.reconstruction_errors(&data).unwrap();
        let base: f64 = data.iter().flatten().map(|x| x * x).sum();
        assert!(totals[0] <= base);
        assert!(
            totals.windows(2).all(|w| w[1] <= w[0]),
            "seed {seed}: {totals:?}"
        );
        assert!(model
            .codebooks
            .iter()
            .all(|cb| cb.len() <= 12 && cb.iter().flatten().all(|x| x.is_finite())));
    }
}

fn random_catalog(seed: u64, n: usize) -> (Vec<PoiRecord>, EmbeddingTable) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let categories = [
        "Office", "Parking", "Cafe", "Bar", "Gym", "Park", "Subway", "Museum", "Bakery", "Hotel",
    ];
    let mut emb = EmbeddingTable::default();
    for c in categories {
        emb.insert(
            c.to_string(),
            (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        )
        .unwrap();
    }
    let catalog = (0..n)
        .map(|i| PoiRecord {
            poi_id: format!("poi{i:04}"),
            category_id: String::new(),
            category_name: categories[rng.gen_range(0..categories.len())].to_string(),
            lat: rng.gen_range(40.55..40.95),
            lng: rng.gen_range(-74.25..-73.70),
            address: None,
        })
        .collect();
    (catalog, emb)
}

#[test]
fn registry_is_bijective_and_trie_complete() {
    let (catalog, emb) = random_catalog(3, 500);
    let reg = build_registry(&catalog, &emb, &SidConfig::default()).unwrap();
    assert_eq!(reg.len(), 500);
    let sids: BTreeSet<&SpatialSemanticId> = reg.entries().iter().map(|e| &e.sid).collect();
    assert_eq!(sids.len(), 500);
    for p in &catalog {
        let sid = reg.sid_of(&p.poi_id).unwrap();
        assert_eq!(reg.entry_for_sid(sid).unwrap().poi_id, p.poi_id);
    }
    let paths: BTreeSet<Vec<u32>> = reg.trie().paths().into_iter().collect();
    let expected: BTreeSet<Vec<u32>> = sids.iter().map(|s| s.values()).collect();
    assert_eq!(paths, expected);
}

#[test]
fn same_seed_same_registry_bytes() {
    let (catalog, emb) = random_catalog(9, 300);
    let cfg = SidConfig {
        rng_seed: 77,
        ..SidConfig::default()
    };
    let a = build_registry(&catalog, &emb, &cfg).unwrap().to_bytes();
    let mut shuffled = catalog.clone();
    shuffled.reverse();
    let b = build_registry(&shuffled, &emb, &cfg).unwrap().to_bytes();
    assert_eq!(a, b);
}

#[test]
fn per_poi_embeddings_supported() {
    let (catalog, _) = random_catalog(4, 40);
    let mut emb = EmbeddingTable::default();
    for (i, p) in catalog.iter().enumerate() {
        emb.insert(p.poi_id.clone(), vec![i as f64, (i % 7) as f64])
            .unwrap();
    }
    let cfg = SidConfig {
        embedding_key: geosid_core::sid::EmbeddingKey::Poi,
        ..SidConfig::default()
    };
    let (reg, model) = build_registry_with_model(&catalog, &emb, &cfg).unwrap();
    assert_eq!(reg.len(), 40);
    assert_eq!(model.codebooks[0].len(), 28);
}

#[test]
fn nearby_pois_share_geo_tokens_more_often() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut catalog = Vec::new();
    for i in 0..300 {
        let (lat, lng) = (rng.gen_range(40.2..41.2), rng.gen_range(-74.6..-73.3));
        catalog.push((lat, lng));
        if i % 2 == 0 {
            catalog.push((
                lat + rng.gen_range(-0.0005..0.0005),
                lng + rng.gen_range(-0.0005..0.0005),
            ));
        }
    }
    let pois: Vec<PoiRecord> = catalog
        .iter()
        .enumerate()
        .map(|(i, (lat, lng))| PoiRecord {
            poi_id: format!("p{i}"),
            category_id: String::new(),
            category_name: "Cafe".into(),
            lat: *lat,
            lng: *lng,
            address: None,
        })
        .collect();
    let emb = EmbeddingTable::parse("Cafe\t1,2,3\n").unwrap();
    let reg = build_registry(&pois, &emb, &SidConfig::default()).unwrap();
    let (mut near, mut far) = ((0, 0), (0, 0));
    for i in 0..pois.len() {
        for j in i + 1..pois.len() {
            let (a, b) = (&pois[i], &pois[j]);
            let d = haversine_km(
                &GeoPoint::new(a.lat, a.lng).unwrap(),
                &GeoPoint::new(b.lat, b.lng).unwrap(),
            );
            let same = reg.sid_of(&a.poi_id).unwrap().geo == reg.sid_of(&b.poi_id).unwrap().geo;
            if d <= 0.1 {
                near = (near.0 + same as usize, near.1 + 1);
            } else if d > 50.0 {
                far = (far.0 + same as usize, far.1 + 1);
            }
        }
    }
    let rate = |(hits, n): (usize, usize)| hits as f64 / n as f64;
    assert!(near.1 > 50 && far.1 > 50);
    assert!(rate(near) > rate(far), "near {near:?} far {far:?}");
}

#[test]
fn next_tokens_after_shared_geo_are_distinct_semantic_heads() {
    let loc = GeoPoint::new(40.7, -74.0).unwrap();
    let entries: Vec<RegistryEntry> = [([5u16, 1u16], "a"), ([9, 0], "b"), ([5, 3], "c")]
        .iter()
        .map(|(s, id)| RegistryEntry {
            poi_id: (*id).into(),
            sid: SpatialSemanticId::new(vec![161, 17], s.to_vec(), 0),
            hex_cell_id: String::new(),
            location: loc,
        })
        .collect();
    let reg =
        SidRegistry::from_entries(SidConfig::default(), "89c25".into(), entries.clone()).unwrap();
    // Enumerate the fixture directly.
    let expected: BTreeSet<u32> = entries.iter().map(|e| e.sid.semantic[0] as u32).collect();
    let got: BTreeSet<u32> = reg
        .valid_next_tokens(&[161, 17])
        .iter()
        .map(|t| t.value)
        .collect();
    assert_eq!(got, expected);
    let surfaces: Vec<String> = reg
        .valid_next_tokens(&[161, 17])
        .iter()
        .map(|t| t.to_string())
        .collect();
    assert_eq!(surfaces, vec!["<a_5>", "<a_9>"]);
    assert_eq!(reg.valid_next_tokens(&[]).len(), 1);
    assert_eq!(reg.valid_next_tokens(&[161, 17, 5]).len(), 2);
}
