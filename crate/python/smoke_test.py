"""Builds the pypauseseg extension with cargo and exercises it end to end.

Usage: python3 python/smoke_test.py
"""

import json
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def build_extension(dest: Path) -> None:
    subprocess.run(
        ["cargo", "build", "--release", "-p", "pypauseseg", "--features", "extension-module"],
        cwd=ROOT,
        check=True,
    )
    lib = ROOT / "target" / "release" / "libpypauseseg.so"
    shutil.copy(lib, dest / "pypauseseg.so")


def main() -> None:
    work = Path(tempfile.mkdtemp())
    build_extension(work)
    sys.path.insert(0, str(work))
    import pypauseseg as ps

    assert ps.normalize_transcript("第3章，1200元。") == "第三章一千两百元"

    # 240 ms characters at 5 ms frames, 100 ms pauses at gaps 2 and 6
    spans, t = [], 0
    for i in range(8):
        t += 20 if i in (2, 6) else 0
        spans.append((t, t + 48))
        t += 48
    sent = ps.AlignedSentence("fig", "有人在细细地倾听", spans, 5.0)
    assert sent.duration_profile()["mean_char_ms"] == 240.0
    assert sent.pause_ms(2) == 100.0

    mined = ps.mine_boundaries(sent)
    assert mined.boundaries == [2, 6], mined
    assert mined.render() == "有人/在细细地/倾听"
    assert mined.lattice() == ["BS", "ES", "BS", "BMES", "BMES", "ES", "BS", "ES"]

    zeros = [[0.0] * 4 for _ in range(8)]
    trans = [[0.0] * 4 for _ in range(4)]
    path, score = ps.constrained_viterbi(zeros, trans, mined.lattice())
    assert path == "BEBEBEBE" and score == 0.0
    n_paths = ps.count_legal_paths(mined.lattice())
    z = ps.constrained_log_forward(zeros, trans, mined.lattice())
    assert abs(z - __import__("math").log(n_paths)) < 1e-9

    base = ["有人 在 细细 地 倾听", "有人 在 倾听", "细细 地 听"]
    model, report = ps.train(base, dev=base, max_epochs=30, learning_rate=0.1, batch_size=1)
    assert json.loads(report)["epochs_run"] >= 1
    words = model.tag("有人在细细地倾听")
    assert "".join(words) == "有人在细细地倾听"

    partial = ps.PartialAnnotation("p1", "有人在倾听", [2])
    completed = model.complete([partial])[0]
    assert "".join(completed) == "有人在倾听" and completed[0] == "有人"

    path = work / "model.json"
    model.save(str(path))
    again = ps.CrfModel.load(str(path))
    assert again.tag("有人在倾听") == model.tag("有人在倾听")

    r = ps.evaluate(["有 人 在 细细 地 倾听"], ["有人 在 细细 地 倾听"])
    assert abs(r["precision"] - 0.8) < 1e-12 and abs(r["recall"] - 4 / 6) < 1e-12

    try:
        ps.normalize_transcript("123456789")
    except ValueError:
        pass
    else:
        raise AssertionError("oversized numeral accepted")

    print("python smoke test passed")


if __name__ == "__main__":
    main()
