use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use geosid_core::geo::GeoPoint;
use geosid_geocode::{
    Clock, GeocodeCache, GeocodeMode, Geocoder, GeocoderConfig, MockClock, Source, UreqTransport,
    WarmSummary, ADDRESS_PLACEHOLDER,
};

/// Serves `n` requests, answering each with the request target embedded in
/// the display field, and records the request lines and auth headers.
fn spawn_server(
    n: usize,
) -> (
    String,
    Arc<Mutex<Vec<(String, Option<String>)>>>,
    thread::JoinHandle<()>,
) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let base = format!("http://{}", listener.local_addr().unwrap());
    let seen = Arc::new(Mutex::new(Vec::new()));
    let log = Arc::clone(&seen);
    let handle = thread::spawn(move || {
        for stream in listener.incoming().take(n) {
            let mut stream = stream.unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut request_line = String::new();
            reader.read_line(&mut request_line).unwrap();
            let mut auth = None;
            loop {
                let mut header = String::new();
                reader.read_line(&mut header).unwrap();
                if header.trim().is_empty() {
                    break;
                }
                if let Some((name, value)) = header.split_once(':') {
                    if name.eq_ignore_ascii_case("authorization") {
                        auth = Some(value.trim().to_string());
                    }
                }
            }
            let target = request_line
                .split_whitespace()
                .nth(1)
                .unwrap_or("")
                .to_string();
            let lat = target
                .split("lat=")
                .nth(1)
                .and_then(|s| s.split('&').next())
                .unwrap_or("?")
                .to_string();
            let body = format!(
                r#"{{"place_id":7,"display_name":"Mock Street near {lat}","lat":"{lat}"}}"#
            );
            write!(
                stream,
                "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            )
            .unwrap();
            log.lock().unwrap().push((target, auth));
        }
    });
    (base, seen, handle)
}

fn catalog() -> Vec<(&'static str, GeoPoint)> {
    vec![
        ("parking", GeoPoint::new(40.7069, -74.014).unwrap()),
        ("office", GeoPoint::new(40.7094, -74.0108).unwrap()),
        ("cafe", GeoPoint::new(40.712800, -74.006000).unwrap()),
    ]
}

#[test]
fn three_poi_run_against_mock_endpoint() {
    let (base, seen, server) = spawn_server(3);
    let dir = tempfile::tempdir().unwrap();
    let cache_path = dir.path().join("geocode_cache.tsv");
    let clock = MockClock::new();
    let config = GeocoderConfig {
        base_url: Some(base),
        bearer_token: Some("tok".into()),
        ..Default::default()
    };
    let transport = UreqTransport::new(Duration::from_secs(5), "geosid-test");
    let mut geocoder = Geocoder::new(
        config.clone(),
        GeocodeCache::open(&cache_path).unwrap(),
        transport,
        &clock,
    );

    let start = clock.elapsed();
    let out = geocoder.warm_cache(catalog(), GeocodeMode::Online).unwrap();
    assert_eq!(
        out.summary,
        WarmSummary {
            hits: 0,
            fetched: 3,
            placeholders: 0
        }
    );
    assert!(
        clock.elapsed() - start >= Duration::from_secs(2),
        "{:?}",
        clock.elapsed()
    );
    assert_eq!(out.addresses["cafe"], "Mock Street near 40.712800");
    server.join().unwrap();

    let requests = seen.lock().unwrap().clone();
    assert_eq!(
        requests[2].0,
        "/reverse?lat=40.712800&lon=-74.006000&format=json"
    );
    assert!(requests
        .iter()
        .all(|(_, auth)| auth.as_deref() == Some("Bearer tok")));

    // A second run, even offline, is served entirely from the persisted cache.
    let transport = UreqTransport::default();
    let mut offline = Geocoder::new(
        config,
        GeocodeCache::open(&cache_path).unwrap(),
        transport,
        &clock,
    );
    let entry = offline
        .reverse_geocode(
            &GeoPoint::new(40.7128004, -74.0060004).unwrap(),
            GeocodeMode::CacheOnly,
        )
        .unwrap();
    assert_eq!(entry.source, Source::Cache);
    assert_eq!(entry.address, "Mock Street near 40.712800");
    let again = offline
        .warm_cache(catalog(), GeocodeMode::CacheOnly)
        .unwrap();
    assert_eq!(
        again.summary,
        WarmSummary {
            hits: 3,
            fetched: 0,
            placeholders: 0
        }
    );
    assert_eq!(again.addresses, out.addresses);
}

#[test]
fn offline_runs_are_reproducible() {
    let run = || {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.tsv");
        let clock = MockClock::new();
        let mut g = Geocoder::new(
            GeocoderConfig::default(),
            GeocodeCache::open(&path).unwrap(),
            UreqTransport::default(),
            &clock,
        );
        let out = g.warm_cache(catalog(), GeocodeMode::CacheOnly).unwrap();
        assert_eq!(out.summary.placeholders, 3);
        assert!(out.addresses.values().all(|a| a == ADDRESS_PLACEHOLDER));
        assert!(!path.exists(), "offline misses must not be written");
        format!("{:?}", out)
    };
    assert_eq!(run(), run());
}

#[test]
fn unreachable_endpoint_is_a_transport_error() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let base = format!("http://{}", listener.local_addr().unwrap());
    drop(listener);
    let clock = MockClock::new();
    let config = GeocoderConfig {
        base_url: Some(base),
        ..Default::default()
    };
    let transport = UreqTransport::new(Duration::from_secs(2), "geosid-test");
    let mut g = Geocoder::new(config, GeocodeCache::in_memory(), transport, &clock);
    let err = g
        .reverse_geocode(&GeoPoint::new(1.0, 1.0).unwrap(), GeocodeMode::Online)
        .unwrap_err();
    assert!(err.to_string().contains("after 4 attempts"), "{err}");
    assert_eq!(
        clock
            .sleeps()
            .iter()
            .filter(|d| **d >= Duration::from_secs(1))
            .count(),
        3
    );
}
