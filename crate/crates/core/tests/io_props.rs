use std::collections::BTreeMap;

use proptest::prelude::*;

use credal_core::generate::{random_network, GenParams};
use credal_core::geometry::EPS_FEAS;
use credal_core::io::{
    parse_hcredal, parse_network, parse_vcredal, read_benchmark_records, serialize_hcredal, serialize_vcredal,
    write_benchmark_records, BenchmarkRecord, HCredalNetwork, NetworkFile, TaskKind,
};

fn net(seed: u64) -> credal_core::CredalNetwork {
    random_network(&GenParams {
        n_nodes: 5,
        seed,
        ..GenParams::default()
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn v_file_round_trip(seed in 0u64..1_000_000) {
        let n = net(seed);
        let text = serialize_vcredal(&n);
        let back = parse_vcredal(&text).unwrap();
        prop_assert_eq!(&back, &n);
        prop_assert_eq!(serialize_vcredal(&back), text);
    }

    #[test]
    fn h_file_round_trip(seed in 0u64..1_000_000) {
        let n = net(seed);
        let h = HCredalNetwork::from_vnet(&n, EPS_FEAS).unwrap();
        let text = serialize_hcredal(&h);
        let parsed = parse_hcredal(&text).unwrap();
        prop_assert_eq!(serialize_hcredal(&parsed), text.clone());
        prop_assert!(matches!(parse_network(&text).unwrap(), NetworkFile::H(_)));
        let v = parsed.to_vnet(EPS_FEAS).unwrap();
        for (a, b) in v.tables().iter().zip(n.tables()) {
            for (sa, sb) in a.sets.iter().zip(&b.sets) {
                let pa = credal_core::PointSet::new(sa.dimension(), sa.vertices().to_vec()).unwrap();
                let pb = credal_core::PointSet::new(sb.dimension(), sb.vertices().to_vec()).unwrap();
                prop_assert!(pa.same_set(&pb, 1e-8));
            }
        }
    }

    #[test]
    fn truncations_fail_with_a_line(seed in 0u64..1_000_000, frac in 0.0f64..1.0) {
        let text = serialize_vcredal(&net(seed));
        let cut = ((text.len() as f64) * frac) as usize;
        let trimmed = &text[..cut];
        // cutting digits off the last float can leave a valid file
        if trimmed.split_whitespace().count() < text.split_whitespace().count() {
            let err = parse_vcredal(trimmed).unwrap_err();
            prop_assert!(err.line().is_some(), "{err}");
        }
    }

    #[test]
    fn arbitrary_bytes_never_panic(bytes in prop::collection::vec(any::<u8>(), 0..400)) {
        let text = String::from_utf8_lossy(&bytes);
        let _ = parse_network(&text);
        let _ = parse_vcredal(&format!("V-CREDAL {text}"));
        let _ = parse_hcredal(&format!("H-CREDAL {text}"));
    }

    #[test]
    fn csv_round_trip(
        lower in 0.0f64..0.5,
        width in 0.0f64..0.5,
        time in 0.0f64..1e6,
        target in 0usize..10,
        ev in prop::collection::btree_map(0usize..10, 0usize..3, 0..4),
    ) {
        let rec = BenchmarkRecord {
            model_id: "m,1".into(),
            task: if ev.is_empty() { TaskKind::Marginal } else { TaskKind::Conditional },
            target,
            evidence: ev,
            method: "k5".into(),
            state: 1,
            lower,
            upper: lower + width,
            time_ms: time,
        };
        let mut buf = Vec::new();
        write_benchmark_records(&mut buf, std::slice::from_ref(&rec)).unwrap();
        prop_assert_eq!(read_benchmark_records(buf.as_slice()).unwrap(), vec![rec]);
    }
}

#[test]
fn comments_and_layout_are_free() {
    let text = "# two binary variables\nV-CREDAL 2 2 2 2 1 0 2 0 1 # scopes\n1 0.5 0.5\n1 1 0 1 0 1\n";
    let n = parse_vcredal(text).unwrap();
    assert_eq!(n.len(), 2);
    assert_eq!(n.parents(1), &[0]);
}

#[test]
fn empty_evidence_is_marginal() {
    let rec = BenchmarkRecord {
        model_id: "a".into(),
        task: TaskKind::Marginal,
        target: 0,
        evidence: BTreeMap::new(),
        method: "exact".into(),
        state: 0,
        lower: 0.25,
        upper: 0.5,
        time_ms: 0.0,
    };
    let mut buf = Vec::new();
    write_benchmark_records(&mut buf, &[rec]).unwrap();
    assert!(String::from_utf8(buf).unwrap().contains("a,marginal,0,,exact,0,0.25,0.5,0"));
}
