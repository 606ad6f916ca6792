import json
import math
import subprocess
import sys

import numpy as np
import pytest

from conftest import random_camera
from rics.camera import save_camera
from rics.cli import main
from rics.geometry import save_obj, shapes
from rics.imageio import read_imgf, read_png, write_imgf, write_png
from rics.occlusion import read_rics


@pytest.fixture
def cube_scene(tmp_path):
    mesh, cam = tmp_path / "cube.obj", tmp_path / "cam.json"
    save_obj(shapes.unit_cube(), mesh)
    save_camera(random_camera(np.random.default_rng(3), size=32), cam)
    return mesh, cam


def test_compute_oracle_verify_roundtrip(tmp_path, cube_scene, capsys):
    mesh, cam = cube_scene
    a, b = tmp_path / "a.rics", tmp_path / "b.rics"
    assert main(["compute", "--mesh", str(mesh), "--camera", str(cam), "-o", str(a)]) == 0
    assert main(["oracle", "--mesh", str(mesh), "--camera", str(cam), "-o", str(b), "--threads", "2"]) == 0
    capsys.readouterr()
    assert main(["verify", str(a), str(b)]) == 0
    assert capsys.readouterr().out.strip() == "identical"
    assert read_rics(a).covered.sum() > 0


def test_verify_reports_difference(tmp_path, cube_scene, capsys):
    mesh, cam = cube_scene
    a, b = tmp_path / "a.rics", tmp_path / "b.rics"
    main(["compute", "--mesh", str(mesh), "--camera", str(cam), "-o", str(a)])
    main(["compute", "--mesh", str(mesh), "--camera", str(cam), "-o", str(b), "--epsilon", "0.9"])
    capsys.readouterr()
    assert main(["verify", str(a), str(b)]) == 1
    assert capsys.readouterr().out.startswith("differ:")


def test_compute_threads_byte_identical(tmp_path, cube_scene):
    mesh, cam = cube_scene
    outs = []
    for n in ("1", "4"):
        p = tmp_path / f"t{n}.rics"
        assert main(["compute", "--mesh", str(mesh), "--camera", str(cam), "-o", str(p), "--threads", n]) == 0
        outs.append(p.read_bytes())
    assert outs[0] == outs[1]


def test_missing_file_is_io_error(tmp_path, cube_scene):
    mesh, cam = cube_scene
    assert main(["compute", "--mesh", str(tmp_path / "nope.obj"), "--camera", str(cam),
                 "-o", str(tmp_path / "x.rics")]) == 2
    assert main(["verify", str(tmp_path / "a"), str(tmp_path / "b")]) == 2


def test_malformed_inputs_are_validation_errors(tmp_path, cube_scene):
    mesh, cam = cube_scene
    bad = tmp_path / "bad.rics"
    bad.write_bytes(b"NOPE" + bytes(16))
    assert main(["verify", str(bad), str(bad)]) == 1
    quad = tmp_path / "quad.obj"
    quad.write_text("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n")
    assert main(["compute", "--mesh", str(quad), "--camera", str(cam), "-o", str(tmp_path / "q.rics")]) == 1


def test_usage_errors_exit_2(capsys):
    assert main([]) == 2
    assert main(["frobnicate"]) == 2
    assert main(["slice", "--len", "5", "--window", "0"]) == 2
    assert main(["compute", "--mesh", "x"]) == 2
    assert "usage" in capsys.readouterr().err


def test_visualize(tmp_path, cube_scene):
    mesh, cam = cube_scene
    r = tmp_path / "a.rics"
    main(["compute", "--mesh", str(mesh), "--camera", str(cam), "-o", str(r)])
    out = tmp_path / "viz"
    assert main(["visualize", str(r), "--out-dir", str(out)]) == 0
    assert len(list(out.glob("dir_*.png"))) == 62 and (out / "popcount.png").exists()
    out2 = tmp_path / "viz2"
    assert main(["visualize", str(r), "--out-dir", str(out2), "--mode", "slices", "--indices", "0", "61"]) == 0
    assert sorted(p.name for p in out2.iterdir()) == ["dir_00.png", "dir_61.png"]
    assert main(["visualize", str(r), "--out-dir", str(out2), "--indices", "62"]) == 1


def test_edge_weights(tmp_path):
    img = np.full((24, 24), 50, dtype=np.uint8)
    img[:, 12:] = 200
    write_png(img, tmp_path / "s.png")
    out = tmp_path / "w.imgf"
    assert main(["edge-weights", str(tmp_path / "s.png"), "-o", str(out), "--alpha", "2"]) == 0
    w = read_imgf(out)
    assert w.shape == (24, 24, 1)
    assert w.min() == 1.0 and w.max() == 3.0


def test_loss_report(tmp_path, capsys):
    rng = np.random.default_rng(0)
    pred = rng.random((8, 8, 3))
    target = rng.random((8, 8, 3))
    albedo = rng.random((8, 8, 3))
    rgb = target * albedo
    files = {}
    for name, arr in dict(pred=pred, target=target, albedo=albedo, rgb=rgb, w=np.full((8, 8, 3), 2.0),
                          real=np.full((2, 2, 1), 0.5), fake=np.full((2, 2, 1), 0.5),
                          f1=np.zeros((4, 4, 2)), f2=np.ones((4, 4, 2))).items():
        files[name] = tmp_path / f"{name}.imgf"
        write_imgf(arr, files[name])
    argv = ["loss", "--pred-shading", str(files["pred"]), "--target-shading", str(files["target"]),
            "--albedo", str(files["albedo"]), "--target-rgb", str(files["rgb"]), "--weights", str(files["w"]),
            "--real-scores", str(files["real"]), "--fake-scores", str(files["fake"]),
            "--real-features", str(files["f1"]), str(files["f1"]),
            "--fake-features", str(files["f1"]), str(files["f2"]), "--fm-layers", "2"]
    assert main(argv) == 0
    lines = dict(line.split()[:2] for line in capsys.readouterr().out.splitlines())
    p32 = [read_imgf(files[k]).astype(np.float64) for k in ("pred", "target", "albedo", "rgb")]
    recon_s = 2.0 * np.abs(p32[0] - p32[1]).mean()
    recon_g = np.abs(p32[0] * p32[2] - p32[3]).mean()
    total = math.log(2) + 1000 * 1.0 + recon_s + 10 * recon_g
    assert float(lines["recon_s"]) == pytest.approx(recon_s, rel=1e-11)
    assert float(lines["recon_g"]) == pytest.approx(recon_g, rel=1e-11)
    assert float(lines["gan_d"]) == pytest.approx(2 * math.log(2), rel=1e-11)
    assert float(lines["fm"]) == 1.0
    assert float(lines["total"]) == pytest.approx(total, rel=1e-11)


def test_loss_feature_count_mismatch(tmp_path):
    p = tmp_path / "a.imgf"
    write_imgf(np.ones((2, 2, 1)), p)
    argv = ["loss", "--pred-shading", str(p), "--target-shading", str(p), "--albedo", str(p),
            "--target-rgb", str(p), "--real-features", str(p), str(p), "--fake-features", str(p)]
    assert main(argv) == 1


def test_shapes(capsys):
    assert main(["shapes"]) == 0
    out = capsys.readouterr().out
    assert out.rstrip().endswith("result: PASS")
    assert main(["shapes", "--json"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["input_channels"]["sum"] == 84


def test_slice(tmp_path, capsys):
    assert main(["slice", "--len", "9", "--window", "10"]) == 0
    assert json.loads(capsys.readouterr().out) == []
    assert main(["slice", "--len", "23"]) == 0
    assert json.loads(capsys.readouterr().out) == [0, 5, 10]
    assert main(["slice", "--len", "70", "--mode", "test"]) == 0
    assert json.loads(capsys.readouterr().out) == [0, 15, 30]
    m = tmp_path / "m.csv"
    m.write_text("a,12,2\n")
    assert main(["slice", "--manifest", str(m)]) == 0
    assert capsys.readouterr().out.splitlines() == ["id,camera,start,length", "a,0,0,10", "a,1,0,10"]


def test_remap(tmp_path, capsys):
    mask = np.array([[0, 16, 22], [24, 1, 3]], dtype=np.uint8)
    write_png(mask, tmp_path / "m.png")
    assert main(["remap", str(tmp_path / "m.png"), str(tmp_path / "o.png"), "--map", "surreal14"]) == 0
    assert read_png(tmp_path / "o.png", normalize=False).tolist() == [[0, 1, 5], [5, 2, 9]]
    write_png(np.array([[99]], dtype=np.uint8), tmp_path / "bad.png")
    assert main(["remap", str(tmp_path / "bad.png"), str(tmp_path / "o.png"), "--map", "up6"]) == 1


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "rics", "slice", "--len", "10"], capture_output=True, text=True)
    assert r.returncode == 0 and json.loads(r.stdout) == [0]
