"""Tests for spherical mask dataset synthesis."""

import json
import math
import pytest
import numpy as np

from panowarp.dataset import DIRECTION_PRESETS, PanoSource, export_dataset, gen_masks, parse_directions, read_pano_list
from panowarp.errors import InputValidationError
from panowarp.handlers import run_dataset
from panowarp.models import CameraPose, DatasetInput
from panowarp.raster_io import read_mask
from panowarp.warp import warp_mask

from oracles import render_room


@pytest.fixture
def small_panos():
    """Room panoramas seen from a few different centers."""
    poses = [(0.0, 0.0, 0.0), (0.1, 0.0, 0.0), (0.0, 0.05, -0.1)]
    return [render_room(p, 32, 16) for p in poses]


class TestDirections:
    """Test movement direction parsing."""

    def test_presets(self):
        """Test preset names resolve to their unit vectors."""
        assert len(parse_directions("default8")) == 8
        assert len(parse_directions("AXES6")) == 6
        assert parse_directions("default8") == DIRECTION_PRESETS["default8"]

    def test_custom_vectors_are_normalized(self):
        """Test explicit vectors are scaled to unit length."""
        dirs = parse_directions("2,0,0; 0,3,4")

        assert dirs[0] == pytest.approx((1.0, 0.0, 0.0))
        assert dirs[1] == pytest.approx((0.0, 0.6, 0.8))

    def test_vector_list(self):
        """Test a list of vectors is accepted."""
        assert parse_directions([[0, 0, -2]]) == [pytest.approx((0.0, 0.0, -1.0))]

    @pytest.mark.parametrize("value", ["", "0,0,0", "1,0", "a,b,c", "1,nan,0"])
    def test_invalid(self, value):
        """Test empty, zero, short, unparsable and non-finite directions."""
        with pytest.raises(InputValidationError):
            parse_directions(value)

    def test_preset_vectors_are_unit(self):
        """Test every preset direction has unit length."""
        for dirs in DIRECTION_PRESETS.values():
            for d in dirs:
                assert math.sqrt(sum(c * c for c in d)) == pytest.approx(1.0)


class TestGenMasks:
    """Test gen_masks."""

    def test_count_and_order(self, room):
        """Test one mask per (direction, unit), direction-major."""
        _, depth = room
        masks = gen_masks(depth)

        assert len(masks) == 16
        assert masks[0][0] == CameraPose(tx=0.02)
        assert masks[1][0] == CameraPose(tx=0.04)
        assert masks[2][0] == CameraPose(tx=-0.02)

    def test_masks_equal_warp_mask(self, room):
        """Test each mask is the warp mask of its pose."""
        _, depth = room
        for pose, mask in gen_masks(depth, [0.1], "axes6"):
            np.testing.assert_array_equal(mask.data, warp_mask(depth, pose).data)

    def test_units_required(self, room):
        """Test an empty unit list is refused."""
        _, depth = room
        with pytest.raises(InputValidationError):
            gen_masks(depth, [])


class TestExportDataset:
    """Test export_dataset."""

    def test_file_counts(self, tmp_path, room):
        """Test 25 panoramas give 150 RGB faces and 2400 mask faces."""
        image, depth = render_room((0.0, 0.0, 0.0), 32, 16)
        manifest = export_dataset([(image, depth)] * 25, tmp_path, face_size=8, workers=4)

        assert manifest.panoramas == 25
        assert manifest.rgb_faces == 150
        assert manifest.mask_faces == 2400
        assert len(list((tmp_path / "rgb").iterdir())) == 150
        assert len(list((tmp_path / "mask").iterdir())) == 2400
        assert (tmp_path / "rgb" / "pano_000000_front.png").is_file()
        assert (tmp_path / "rgb" / "pano_000024_down.png").is_file()

    def test_manifest_records(self, tmp_path, small_panos):
        """Test the JSON-lines manifest lists every file with its pose metadata."""
        manifest = export_dataset(small_panos, tmp_path, units=[0.05], directions="axes6", face_size=8)
        records = [json.loads(line) for line in manifest.path.read_text().splitlines()]

        assert len(records) == 3 * (6 + 6 * 6)
        assert all((tmp_path / r["file"]).is_file() for r in records)
        masks = [r for r in records if r["kind"] == "mask"]
        assert masks[0]["file"] == "mask/pano_000000_d0_u0_front.png"
        assert masks[0]["direction"] == [1.0, 0.0, 0.0]
        assert masks[0]["unit"] == 0.05
        assert all(0.0 <= r["hole_ratio"] <= 1.0 for r in masks)

    def test_mask_faces_are_binary(self, tmp_path, small_panos):
        """Test mask face PNGs read back as 0/1 and holes are present."""
        export_dataset(small_panos[:1], tmp_path, units=[0.3], directions="axes6", face_size=8)
        values = set()
        for path in (tmp_path / "mask").glob("*.png"):
            values |= set(np.unique(read_mask(path)).tolist())

        assert values <= {0, 1}
        assert 1 in values

    def test_worker_count_does_not_change_output(self, tmp_path, small_panos):
        """Test the dataset is byte-identical for 1 and 4 workers."""
        one = export_dataset(small_panos, tmp_path / "one", face_size=8, workers=1)
        four = export_dataset(small_panos, tmp_path / "four", face_size=8, workers=4)

        assert one.path.read_text() == four.path.read_text()
        for record in map(json.loads, one.path.read_text().splitlines()):
            a = (tmp_path / "one" / record["file"]).read_bytes()
            b = (tmp_path / "four" / record["file"]).read_bytes()
            assert a == b, record["file"]

    def test_nothing_to_export(self, tmp_path):
        """Test an empty panorama list is refused."""
        with pytest.raises(InputValidationError):
            export_dataset([], tmp_path)

    def test_mismatched_sizes(self, tmp_path, room):
        """Test image and depth of one panorama must match."""
        image, _ = room
        _, small_depth = render_room((0.0, 0.0, 0.0), 32, 16)
        with pytest.raises(InputValidationError):
            export_dataset([(image, small_depth)], tmp_path, face_size=8)

    def test_sources_load_from_disk(self, tmp_path, pano_files):
        """Test PanoSource items are read by the workers."""
        image_path, depth_path = pano_files
        manifest = export_dataset([PanoSource(image_path, depth_path)], tmp_path / "out",
                                  units=[0.02], directions="axes6", face_size=8)

        assert manifest.rgb_faces == 6
        assert manifest.mask_faces == 36


class TestPanoList:
    """Test the panorama list file."""

    def test_relative_paths_and_comments(self, tmp_path, pano_files):
        """Test relative paths resolve against the list file and comments are skipped."""
        listing = tmp_path / "list.txt"
        listing.write_text("# panoramas\ninputs/image.png inputs/depth.pfm  # room\n\n")
        sources = read_pano_list(listing)

        assert len(sources) == 1
        assert sources[0].image_path == pano_files[0]
        assert sources[0].depth_path == pano_files[1]

    @pytest.mark.parametrize("text", ["", "# nothing\n", "only_one_path.png\n"])
    def test_invalid_lists(self, tmp_path, text):
        """Test empty lists and malformed lines are refused."""
        listing = tmp_path / "list.txt"
        listing.write_text(text)
        with pytest.raises(InputValidationError):
            read_pano_list(listing)

    def test_missing_list(self, tmp_path):
        """Test a missing list file is a validation error."""
        with pytest.raises(InputValidationError):
            read_pano_list(tmp_path / "absent.txt")


class TestRunDataset:
    """Test the dataset runner."""

    def test_run(self, tmp_path, pano_files):
        """Test the runner reports counts and writes the manifest."""
        listing = tmp_path / "list.txt"
        listing.write_text("inputs/image.png inputs/depth.pfm\n")
        report = run_dataset(DatasetInput(list_path=str(listing), out_dir=str(tmp_path / "ds"), face_size=8))

        assert report["panoramas"] == 1
        assert report["rgb_faces"] == 6
        assert report["mask_faces"] == 96
        assert (tmp_path / "ds" / "manifest.jsonl").is_file()

    def test_missing_files(self, tmp_path):
        """Test listed files must exist before anything is written."""
        listing = tmp_path / "list.txt"
        listing.write_text("a.png a.pfm\n")
        with pytest.raises(InputValidationError, match="do not exist"):
            run_dataset(DatasetInput(list_path=str(listing), out_dir=str(tmp_path / "ds"), face_size=8))

        assert not (tmp_path / "ds").exists()

    def test_refuses_non_empty_output(self, tmp_path, pano_files):
        """Test an existing non-empty output directory needs overwrite."""
        listing = tmp_path / "list.txt"
        listing.write_text("inputs/image.png inputs/depth.pfm\n")
        (tmp_path / "ds").mkdir()
        (tmp_path / "ds" / "old.txt").write_text("x")
        params = DatasetInput(list_path=str(listing), out_dir=str(tmp_path / "ds"), face_size=8)
        with pytest.raises(InputValidationError, match="not empty"):
            run_dataset(params)

        params = DatasetInput(list_path=str(listing), out_dir=str(tmp_path / "ds"), face_size=8, overwrite=True)
        assert run_dataset(params)["panoramas"] == 1
