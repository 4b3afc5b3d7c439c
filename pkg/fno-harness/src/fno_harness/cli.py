"""Command-line entry points: ``fno-train`` and ``fno-eval``.

``fno-train`` trains on a generated dataset and leaves a self-contained
run directory: ``model.pt`` (weights plus the metadata needed to rebuild
and reuse the model), ``eval.json`` (metrics), ``test_pred.bin`` (raw
predictions on the held-out set, same binary layout the generator uses),
and ``testset/`` when the held-out set was generated here.  ``fno-eval``
reloads a run and scores it on a closed-form out-of-distribution forcing.
"""

import argparse
import json
import re
import sys
from pathlib import Path

import numpy as np
import torch
from synthpde import DatasetError, Grid

from .data import load_tensors
from .model import FNO2d
from .ood import OOD_CHOICES, evaluate_ood
from .training import TrainConfig, predict, train


def _error_category(exc: BaseException) -> str:
    name = type(exc).__name__
    name = re.sub(r"Error$", "", name)
    kebab = re.sub(r"(?<!^)(?=[A-Z])", "-", name).lower()
    return {"value": "invalid-value", "o-s": "io"}.get(kebab, kebab or "error")


def _fail(exc: BaseException) -> int:
    print(f"error: {_error_category(exc)}: {exc}", file=sys.stderr)
    return 2


def _train_parser():
    p = argparse.ArgumentParser(prog="fno-train")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="run directory to create")
    p.add_argument("--epochs", type=int, default=TrainConfig.epochs)
    p.add_argument("--modes", type=int, default=TrainConfig.modes)
    p.add_argument("--width", type=int, default=TrainConfig.width)
    p.add_argument("--batch", type=int, default=TrainConfig.batch)
    p.add_argument("--lr", type=float, default=TrainConfig.lr)
    p.add_argument("--scheduler-step", type=int, default=TrainConfig.scheduler_step)
    p.add_argument("--scheduler-gamma", type=float, default=TrainConfig.scheduler_gamma)
    p.add_argument("--seed", type=int, default=TrainConfig.seed)
    p.add_argument("--test-manifest", default=None,
                   help="held-out set to evaluate on (default: generate one)")
    p.add_argument("--device", default="cpu")
    return p


def train_main(argv=None) -> int:
    args = _train_parser().parse_args(argv)
    config = TrainConfig(
        modes=args.modes, width=args.width, batch=args.batch, lr=args.lr,
        epochs=args.epochs, scheduler_step=args.scheduler_step,
        scheduler_gamma=args.scheduler_gamma, seed=args.seed,
    )
    run_dir = Path(args.out)
    try:
        run_dir.mkdir(parents=True, exist_ok=True)
        model, result = train(
            args.manifest, config, run_dir=run_dir,
            test_manifest_path=args.test_manifest, device=args.device,
        )

        manifest_doc = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
        torch.save(
            {
                "state_dict": model.state_dict(),
                "modes": model.modes,
                "width": model.width,
                "in_channels": model.in_channels,
                "operator": manifest_doc["operator"],
                "bc": manifest_doc["bc"],
                "points_per_side": manifest_doc["points_per_side"],
                "includes_boundary": manifest_doc["includes_boundary"],
                "config": config.to_dict(),
            },
            run_dir / "model.pt",
        )

        test_manifest = args.test_manifest or run_dir / "testset" / "manifest.json"
        _, x_test, _ = load_tensors(test_manifest)
        pred = predict(model, x_test, config.batch, args.device)
        pred_arr = pred.numpy()[..., 0].astype(np.float32)
        pred_arr.tofile(run_dir / "test_pred.bin")

        doc = result.to_dict()
        doc["arrays"] = {
            "test_pred": {
                "file": "test_pred.bin",
                "shape": list(pred_arr.shape),
                "dtype": "float32",
            }
        }
        (run_dir / "eval.json").write_text(
            json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    except (DatasetError, ValueError, OSError) as exc:
        return _fail(exc)
    print(f"train relative L2: {result.train_rel_l2:.6f}")
    print(f"test relative L2:  {result.test_rel_l2:.6f}")
    print(run_dir / "eval.json")
    return 0


def _eval_parser():
    p = argparse.ArgumentParser(prog="fno-eval")
    p.add_argument("--run", required=True, help="run directory from fno-train")
    p.add_argument("--ood", required=True, choices=OOD_CHOICES)
    p.add_argument("--device", default="cpu")
    return p


def eval_main(argv=None) -> int:
    args = _eval_parser().parse_args(argv)
    run_dir = Path(args.run)
    try:
        ckpt = torch.load(run_dir / "model.pt", map_location="cpu")
        if ckpt["operator"] != "poisson" or ckpt["bc"] != "dirichlet":
            raise ValueError(
                "out-of-distribution evaluation is defined for Dirichlet "
                f"Poisson runs; this run trained on ({ckpt['operator']}, {ckpt['bc']})"
            )
        model = FNO2d(ckpt["modes"], ckpt["width"], ckpt["in_channels"])
        model.load_state_dict(ckpt["state_dict"])
        grid = Grid(ckpt["points_per_side"], ckpt["includes_boundary"])

        out = evaluate_ood(model, args.ood, grid, device=args.device)
        arrays = {}
        for key, tag in (("u_pred", "pred"), ("u_ref", "ref"), ("f", "f")):
            fname = f"ood_{args.ood}_{tag}.bin"
            out[key].astype(np.float64).tofile(run_dir / fname)
            arrays[key] = {"file": fname, "shape": list(out[key].shape),
                           "dtype": "float64"}
        doc = {
            "name": out["name"],
            "rel_l2_vs_reference": out["rel_l2_vs_reference"],
            "boundary_max_abs": out["boundary_max_abs"],
            "arrays": arrays,
        }
        (run_dir / f"ood_{args.ood}.json").write_text(
            json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        print(json.dumps(doc, indent=2, sort_keys=True))
    except (DatasetError, ValueError, OSError) as exc:
        return _fail(exc)
    return 0
