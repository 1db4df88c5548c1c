import pytest

from conftest import write_dataset
from dashhazard_extractor.dataset import AnnotationError, collect_audio, convert_annotations


def count_lines(path):
    lines = path.read_text().splitlines()
    metadata = [l for l in lines if "frame_count" in l]
    return len(metadata), len(lines) - len(metadata)


class TestConvertAnnotations:
    def test_sample_counts_are_lossless(self, sample_dir, expected, tmp_path):
        out = tmp_path / "tracks.jsonl"
        report = convert_annotations(sample_dir, out)
        assert report.videos == len(expected["videos"])
        assert report.metadata_lines == len(expected["videos"])
        assert report.observation_lines == expected["total_observations"]
        metadata, observations = count_lines(out)
        assert (metadata, observations) == (report.metadata_lines, report.observation_lines)

    def test_two_tracks_ten_frames_video(self, sample_dir, expected):
        # video_a: 2 tracks x 10 frames -> 20 observation lines + 1 metadata line
        video = expected["videos"]["video_a"]
        assert video["observations"] == 20
        assert video["tracks"] == {"1": 10, "2": 10}

    def test_empty_video_emits_metadata_only(self, tmp_path):
        root = write_dataset(
            tmp_path / "ds",
            {"empty": {"frame_count": 3, "width": 64, "height": 48, "fps": 5.0, "frames": {}}},
        )
        out = tmp_path / "tracks.jsonl"
        report = convert_annotations(root, out)
        assert report.metadata_lines == 1 and report.observation_lines == 0
        assert count_lines(out) == (1, 0)

    def test_malformed_pickle_names_file(self, tmp_path):
        root = tmp_path / "ds"
        root.mkdir()
        (root / "annotations.pkl").write_bytes(b"not a pickle at all")
        with pytest.raises(AnnotationError, match="annotations.pkl"):
            convert_annotations(root, tmp_path / "tracks.jsonl")

    def test_missing_pickle_names_file(self, tmp_path):
        with pytest.raises(AnnotationError, match="not found"):
            convert_annotations(tmp_path, tmp_path / "tracks.jsonl")

    def test_bad_kind_rejected(self, tmp_path):
        root = write_dataset(
            tmp_path / "ds",
            {
                "v": {
                    "frame_count": 1,
                    "width": 64,
                    "height": 48,
                    "fps": 5.0,
                    "frames": {0: [{"track_id": 1, "kind": "mystery", "bbox": [0, 0, 5, 5]}]},
                }
            },
        )
        with pytest.raises(AnnotationError, match="bad kind"):
            convert_annotations(root, tmp_path / "tracks.jsonl")


class TestCollectAudio:
    def test_copies_wavs(self, sample_dir, tmp_path):
        copied = collect_audio(sample_dir, tmp_path / "audio")
        assert copied == 1
        assert (tmp_path / "audio" / "video_a.wav").exists()

    def test_no_audio_dir(self, tmp_path):
        assert collect_audio(tmp_path, tmp_path / "audio") == 0
