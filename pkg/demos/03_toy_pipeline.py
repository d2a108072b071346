#!/usr/bin/env python3
"""End-to-end run on the bundled toy dataset, via the same entry points the
`ssdbench` CLI uses: build ground truth, aggregate samples, evaluate."""
import json
import tempfile
from pathlib import Path

from ssdbench.cli import main

TOY = Path(__file__).resolve().parents[1] / "data" / "toy"

with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    cfg = tmp / "cfg.json"
    cfg.write_text(json.dumps(
        {"image_height": 36, "image_width_center": 36, "image_margin": 14}
    ))

    # 1. Ground truth from the posed frames in the scene manifest.
    main(["build-gt", "--manifest", str(TOY / "manifest.json"),
          "--task", "2d", "--out", str(tmp / "gt2d")])
    main(["build-gt", "--manifest", str(TOY / "manifest.json"),
          "--task", "3d", "--out", str(tmp / "gt3d")])
    print("ground truth:", sorted(p.name for p in (tmp / "gt2d").glob("*__*.json")))

    # 2. Aggregate generative samples into predicted distributions.
    main(["aggregate", "--samples", str(TOY / "samples_dfm"), "--pipeline", "dfm3d",
          "--task", "3d", "--out", str(tmp / "pred3d"), "--scene-id", "toy"])
    main(["--config", str(cfg), "aggregate", "--samples", str(TOY / "samples_sdxl"),
          "--pipeline", "sdxl2d", "--task", "2d", "--out", str(tmp / "pred2d"),
          "--scene-id", "toy"])
    main(["--config", str(cfg), "aggregate", "--samples", str(TOY / "vlm"),
          "--pipeline", "vlm", "--task", "2d", "--out", str(tmp / "predvlm"),
          "--scene-id", "toy"])

    # 3. Score each prediction set, plus the two reference predictors.
    for name, flags in [
        ("sdxl2d", ["--pred", str(tmp / "pred2d")]),
        ("vlm", ["--pred", str(tmp / "predvlm")]),
        ("uniform", ["--predictor", "uniform"]),
        ("oracle", ["--predictor", "oracle"]),
    ]:
        out = tmp / f"eval_{name}"
        main(["--config", str(cfg), "evaluate", "--gt", str(tmp / "gt2d"),
              "--task", "2d", "--out", str(out)] + flags)
        print(f"\n=== 2d / {name} ===")
        print((out / "report.csv").read_text().rstrip())

    main(["evaluate", "--gt", str(tmp / "gt3d"), "--pred", str(tmp / "pred3d"),
          "--task", "3d", "--out", str(tmp / "eval3d")])
    print("\n=== 3d / dfm3d ===")
    print((tmp / "eval3d" / "report.csv").read_text().rstrip())
