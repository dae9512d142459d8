mod common;

use common::worked_example;
use geosid_core::ingest::{DatasetSplit, Trajectory};
use geosid_core::prompt::{
    build_eval_prompt, build_prompt, emit_alignment_pairs, emit_pretrain_examples,
    AlignmentDirection, PromptInputs, SerializationConfig,
};
use geosid_core::sid::parse_sid;

const GOLDEN: &str = include_str!("golden/eval_prompt.txt");

fn eval_prompt(config: &SerializationConfig) -> String {
    let trajs = worked_example::trajectories();
    assert_eq!(
        trajs.iter().map(Trajectory::len).collect::<Vec<_>>(),
        vec![5, 4, 4]
    );
    let (registry, addresses) = (worked_example::registry(), worked_example::addresses());
    let inputs = PromptInputs {
        registry: &registry,
        addresses: &addresses,
        config,
    };
    let current = &trajs[2];
    let (target, context) = current.checkins.split_last().unwrap();
    let history: Vec<&Trajectory> = trajs[..2].iter().collect();
    let record =
        build_eval_prompt(&current.trajectory_id, &history, context, target, &inputs).unwrap();
    assert_eq!(record.ground_truth_sid, worked_example::office_sid());
    assert_eq!(record.target_time_iso(), "2012-04-24T04:58:00-04:00");
    record.prompt_text
}

#[test]
fn reproduces_reference_prompt_byte_for_byte() {
    let text = eval_prompt(&SerializationConfig::default());
    if text != GOLDEN {
        for (i, (a, b)) in text.lines().zip(GOLDEN.lines()).enumerate() {
            assert_eq!(a, b, "first differing line {}", i + 1);
        }
    }
    assert_eq!(text.as_bytes(), GOLDEN.as_bytes());
    assert!(text.ends_with("user will visit "));
}

#[test]
fn limit_one_keeps_latest_context_checkin() {
    let config = SerializationConfig {
        max_history_checkins_eval: 1,
        ..Default::default()
    };
    let text = eval_prompt(&config);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[1], "Given user historical data:");
    assert_eq!(lines[2], "Given user behavior sequence:");
    assert!(lines[3].starts_with("April 24th, 2012, Tuesday, 04:45, visit Parking"));
    assert_eq!(lines.len(), 5);
}

#[test]
fn raising_the_limit_never_drops_lines() {
    let mut previous: Vec<String> = Vec::new();
    for limit in 1..=20 {
        let config = SerializationConfig {
            max_history_checkins_eval: limit,
            ..Default::default()
        };
        let text = eval_prompt(&config);
        let lines: Vec<String> = text
            .lines()
            .filter(|l| l.contains(", visit "))
            .map(String::from)
            .collect();
        assert_eq!(lines.len(), limit.min(12));
        for line in &previous {
            assert!(lines.contains(line), "limit {limit} dropped {line}");
        }
        previous = lines;
    }
}

#[test]
fn address_ablation_elides_location() {
    let config = SerializationConfig {
        include_addresses: false,
        ..Default::default()
    };
    let text = eval_prompt(&config);
    assert!(text.contains("visit Parking <m_161><n_17><a_21><b_8><c_0>."));
    assert!(!text.contains("Washington"));
}

#[test]
fn distance_ablation_drops_clauses() {
    let config = SerializationConfig {
        include_distances: false,
        ..Default::default()
    };
    assert!(!eval_prompt(&config).contains("distance is"));
}

#[test]
fn every_surface_in_prompt_parses_to_registered_id() {
    let registry = worked_example::registry();
    let text = eval_prompt(&SerializationConfig::default());
    let mut rest = text.as_str();
    let mut seen = 0;
    while let Some(pos) = rest.find("<m_") {
        let sid = parse_sid(&rest[pos..]).unwrap();
        assert!(registry.contains_sid(&sid));
        rest = &rest[pos + 3..];
        seen += 1;
    }
    assert_eq!(seen, 12);
}

#[test]
fn alignment_pairs_round_trip() {
    let registry = worked_example::registry();
    let pairs = emit_alignment_pairs(&registry, &worked_example::catalog());
    assert_eq!(pairs.len(), 4);
    for pair in &pairs {
        let surface = match pair.direction {
            AlignmentDirection::TextToSid => &pair.target,
            AlignmentDirection::SidToText => &pair.input,
        };
        assert_eq!(
            &parse_sid(surface).unwrap(),
            registry.sid_of(&pair.poi_id).unwrap()
        );
    }
    assert_eq!(pairs[0].input, "Category: Office. Address: 101 Broadway.");
    assert_eq!(pairs[1].target, "Category: Office. Address: 101 Broadway.");
}

#[test]
fn pretrain_count_is_sum_of_lengths_minus_one() {
    let split = DatasetSplit {
        train: worked_example::trajectories(),
        ..Default::default()
    };
    let (registry, addresses) = (worked_example::registry(), worked_example::addresses());
    let config = SerializationConfig::default();
    let inputs = PromptInputs {
        registry: &registry,
        addresses: &addresses,
        config: &config,
    };
    let records = emit_pretrain_examples(&split, &inputs).unwrap();
    let expected: usize = split.train.iter().map(|t| t.len() - 1).sum();
    assert_eq!(records.len(), expected);
    assert_eq!(records.len(), 10);
    // The second trajectory's prompts see the first as history.
    let r = records
        .iter()
        .find(|r| r.prompt_id == "commuter_1:1")
        .unwrap();
    assert!(r.prompt_text.contains("User Traj#1:\nApril 11th"));
    assert_eq!(r.ground_truth_sid, worked_example::office_sid());
}

#[test]
fn empty_context_rejected() {
    let trajs = worked_example::trajectories();
    let (registry, addresses) = (worked_example::registry(), worked_example::addresses());
    let config = SerializationConfig::default();
    let inputs = PromptInputs {
        registry: &registry,
        addresses: &addresses,
        config: &config,
    };
    assert!(build_prompt("x", &[], &[], &trajs[0].checkins[0], 10, &inputs).is_err());
}
