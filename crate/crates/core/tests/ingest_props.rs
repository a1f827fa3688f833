use emolabel_core::ingest::{classify_line, open_archive, IngestCounters, ParseOutcome};
use emolabel_core::synth::{corpus_lines, write_archive, ArchiveLayout, SynthConfig};
use proptest::prelude::*;

proptest! {
    #[test]
    fn classify_never_panics(bytes in prop::collection::vec(any::<u8>(), 0..200)) {
        let _ = classify_line(&bytes);
    }

    #[test]
    fn truncated_json_is_malformed(cut in 1usize..60) {
        let line = r#"{"id":10,"text":"hello :)","lang":"en","created_at":"Wed Jan 02 03:04:05 +0000 2013","user":{"id":5},"source":"web"}"#;
        let cut = cut.min(line.len() - 1);
        prop_assert_eq!(classify_line(&line.as_bytes()[..cut]), ParseOutcome::Malformed);
    }
}

#[test]
fn archive_lines_round_trip_and_counters_balance() {
    let lines = corpus_lines(SynthConfig { seed: 3, ..SynthConfig::default() }, 800);
    let dir = tempfile::tempdir().unwrap();
    write_archive(dir.path(), &lines, &ArchiveLayout::default()).unwrap();
    let mut archive = open_archive(dir.path()).unwrap();
    let read: Vec<String> = archive.by_ref().map(|l| String::from_utf8(l).unwrap()).collect();
    assert_eq!(archive.members_corrupt(), 0);
    assert_eq!(read, lines);

    let mut counters = IngestCounters::default();
    for line in &read {
        counters.record(&classify_line(line.as_bytes()));
    }
    assert_eq!(counters.lines_read, lines.len() as u64);
    assert_eq!(counters.records_parsed + counters.notices_skipped + counters.malformed_skipped, counters.lines_read);
    assert!(counters.records_parsed >= 800);
}
