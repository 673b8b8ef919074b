mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use synthkit_core::annotate::{annotate_frame_detailed, AnnotationConfig};
use synthkit_core::curate::{
    bin_frame, bin_object, build_staged_splits, build_strv_split, summarize, CurateError, DifficultyBin, FrameRef,
    ObjectStats, SampleRecord, SizeMetric,
};
use synthkit_core::frame::{LidarScan, Source};
use synthkit_core::synth::{default_rig, random_scene};

use DifficultyBin::*;

fn record(dump: &str, id: u64, source: Source, objects: &[(f64, f64)]) -> SampleRecord {
    let stats = objects
        .iter()
        .map(|&(occlusion_fraction, bbox_pixel_area)| ObjectStats { occlusion_fraction, bbox_pixel_area, bbox_pixel_height: 0.0 })
        .collect();
    SampleRecord::new(FrameRef { dump: dump.into(), frame_id: id }, source, "clear_noon".into(), stats, SizeMetric::Area)
}

#[test]
fn object_and_frame_examples() {
    assert_eq!(bin_object(0.10, 500.0), Easy);
    assert_eq!(bin_object(0.30, 500.0), Medium);
    assert_eq!(bin_object(0.10, 60.0), Hard);
    assert_eq!(bin_frame(&[Easy, Easy], 2), Easy);
    assert_eq!(bin_frame(&[Easy; 7], 7), Hard);
    assert_eq!(bin_frame(&[Hard, Easy], 2), Hard);
    assert_eq!(bin_frame(&[Ungraded, Ungraded], 2), Ungraded);
}

#[test]
fn annotated_frames_bin_like_the_library_oracle() {
    let rig = default_rig(640, 480);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let cfg = AnnotationConfig::default();
    for i in 0..20 {
        let frame = random_scene(&mut rng, &rig, 25).to_frame(i, "light_rain", LidarScan::default());
        let ann = annotate_frame_detailed(&frame, &cfg);
        let rec = SampleRecord::from_annotation("fx", &frame, &ann, SizeMetric::Area);
        let bins: Vec<DifficultyBin> =
            ann.objects.iter().map(|o| bin_object(o.report.occlusion_fraction, o.label.bbox.area())).collect();
        assert_eq!(rec.frame_bin, bin_frame(&bins, ann.objects.len()));
        assert_eq!(rec.object_count, ann.objects.len());
        assert_eq!(rec.weather_tag, "light_rain");
    }
}

#[test]
fn strv_examples() {
    let sim: Vec<_> = (0..100).map(|i| record("sim", i, Source::Sim, &[(0.1, 500.0)])).collect();
    let real: Vec<_> = (0..50).map(|i| record("real", i, Source::Real, &[(0.1, 500.0)])).collect();
    let (train, val) = build_strv_split(&sim, &real, None, 1).unwrap();
    assert_eq!((train.entries.len(), val.entries.len()), (100, 50));
    let (train, _) = build_strv_split(&sim, &real, Some(0.5), 1).unwrap();
    assert_eq!(train.entries.len(), 50);
    assert!(train.entries.windows(2).all(|w| w[0].frame_ref < w[1].frame_ref));
    assert_eq!(build_strv_split(&sim, &real, Some(0.5), 1).unwrap().0, train);
    assert_ne!(build_strv_split(&sim, &real, Some(0.5), 2).unwrap().0, train);
    assert_eq!(build_strv_split(&sim, &real, Some(1.5), 1), Err(CurateError::InvalidRatio(1.5)));
    assert!(matches!(build_strv_split(&sim, &sim[..3], None, 1), Err(CurateError::SourceMismatch { .. })));
}

#[test]
fn staged_examples() {
    let pool = vec![
        record("d", 0, Source::Sim, &[(0.1, 500.0)]),
        record("d", 1, Source::Sim, &[(0.3, 500.0)]),
        record("d", 2, Source::Sim, &[(0.6, 500.0)]),
        record("d", 3, Source::Sim, &[(0.1, 10.0)]),
    ];
    let s = build_staged_splits(&pool, 9).unwrap();
    let ids = |m: &synthkit_core::curate::SplitManifest| m.entries.iter().map(|e| e.frame_ref.frame_id).collect::<Vec<_>>();
    assert_eq!((ids(&s.easy), ids(&s.medium), ids(&s.hard)), (vec![0], vec![1], vec![2]));
    let ungraded = build_staged_splits(&pool[3..], 9).unwrap();
    assert!(ungraded.iter().all(|m| m.entries.is_empty()));
    assert_eq!(build_staged_splits(&pool, 9).unwrap(), s);

    let summary = summarize(&pool);
    assert_eq!(summary.total, 4);
    assert_eq!(summary.by_bin["ungraded"], 1);
}
