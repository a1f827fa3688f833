mod support;

use std::fs;

use emolabel_core::lexicon::CANONICAL_LEXICON;
use emolabel_core::pipeline::{run_build, BuildConfig, LABELS_FILE};
use emolabel_core::synth::{corpus_lines, write_archive, ArchiveLayout, SynthConfig};
use proptest::prelude::*;
use support::oracle::reference_labels;

fn pipeline_labels(lines: &[String], layout: &ArchiveLayout, workers: usize, run_size: usize) -> String {
    let dir = tempfile::tempdir().unwrap();
    write_archive(&dir.path().join("in"), lines, layout).unwrap();
    let config = BuildConfig {
        inputs: vec![dir.path().join("in")],
        output: dir.path().join("out"),
        workers,
        run_size,
        ..BuildConfig::default()
    };
    run_build(&config).unwrap();
    fs::read_to_string(dir.path().join("out").join(LABELS_FILE)).unwrap()
}

#[test]
fn matches_reference_on_synthetic_corpus() {
    let lines = corpus_lines(SynthConfig::default(), 3_000);
    let expected = reference_labels(lines.iter().map(String::as_str), CANONICAL_LEXICON);
    let n = expected.lines().count();
    assert!(n > 800, "{n}");
    let got = pipeline_labels(&lines, &ArchiveLayout::default(), 3, 500);
    assert_eq!(got, expected);
}

#[test]
fn reference_agrees_on_hand_examples() {
    let line = |id: u64, text: &str| {
        serde_json::json!({"id": id, "text": text, "lang": "en", "source": "web",
            "created_at": "Wed Jan 02 03:04:05 +0000 2013", "user": {"id": 1}})
        .to_string()
    };
    let lines = [line(3, "ok :)"), line(2, "no &lt;/3"), line(1, "both 😍 :("), line(4, "love😍you")];
    let expected = "2\tnegative\n3\tpositive\n4\tpositive\n";
    assert_eq!(reference_labels(lines.iter().map(String::as_str), CANONICAL_LEXICON), expected);
    let layout = ArchiveLayout { members: 1, tar_members: 0, bz2: false };
    assert_eq!(pipeline_labels(&lines, &layout, 1, 10), expected);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn matches_reference_for_any_seed(seed in any::<u64>(), tweets in 1u64..400, workers in 1usize..4, members in 1usize..6) {
        let lines = corpus_lines(SynthConfig { seed, ..SynthConfig::default() }, tweets);
        let layout = ArchiveLayout { members, tar_members: members / 2, bz2: seed % 2 == 0 };
        let expected = reference_labels(lines.iter().map(String::as_str), CANONICAL_LEXICON);
        prop_assert_eq!(pipeline_labels(&lines, &layout, workers, 37), expected);
    }
}
