"""Training loop and evaluation metrics."""

import dataclasses
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import torch
from synthpde import FieldSpec, generate_dataset
from torch.utils.data import DataLoader, TensorDataset

from .data import input_channels, load_tensors, manifest_sha256
from .model import FNO2d

TEST_SET_SIZE = 100


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters; the defaults are the reference configuration."""

    modes: int = 12
    width: int = 64
    batch: int = 100
    lr: float = 0.001
    epochs: int = 100
    # The learning-rate schedule is not part of the reference
    # configuration; halving every 25 epochs is this harness's default and
    # both knobs are overridable.
    scheduler_step: int = 25
    scheduler_gamma: float = 0.5
    seed: int = 0

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class EvalResult:
    train_rel_l2: float
    test_rel_l2: float
    per_sample_test_errors: list[float]
    train_zero_norm_excluded: int
    test_zero_norm_excluded: int
    config: dict
    train_manifest_sha256: str
    test_manifest_sha256: str
    loss_history: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def relative_l2(pred: torch.Tensor, true: torch.Tensor):
    """Per-sample ||pred - true||_2 / ||true||_2 over the grid.

    Samples whose target has zero norm carry no scale to compare against;
    they are excluded from the mean and counted.  Returns
    (per-sample errors for the kept samples, number excluded).
    """
    if pred.shape != true.shape:
        raise ValueError(f"shape mismatch: {tuple(pred.shape)} vs {tuple(true.shape)}")
    dims = tuple(range(1, true.ndim))
    true_norm = torch.linalg.vector_norm(true, dim=dims)
    err_norm = torch.linalg.vector_norm(pred - true, dim=dims)
    keep = true_norm > 0
    return err_norm[keep] / true_norm[keep], int((~keep).sum())


def _batch_loss(pred, true):
    # training surrogate for relative_l2: the norm clamp only guards
    # against division by zero and never binds for the sampled fields
    dims = tuple(range(1, true.ndim))
    true_norm = torch.linalg.vector_norm(true, dim=dims).clamp_min(1e-12)
    err_norm = torch.linalg.vector_norm(pred - true, dim=dims)
    return (err_norm / true_norm).mean()


def predict(model: FNO2d, x: torch.Tensor, batch: int = 100, device: str = "cpu"):
    model.eval()
    outs = []
    with torch.no_grad():
        for k in range(0, x.shape[0], batch):
            outs.append(model(x[k:k + batch].to(device)).cpu())
    return torch.cat(outs)


def _held_out_manifest(manifest, out_dir) -> Path:
    """Generate the disjoint-seed test set through the generator library."""
    spec = manifest.field_spec
    test_spec = FieldSpec(
        bc=spec.bc,
        min_modes=spec.min_modes,
        max_modes=spec.max_modes,
        master_seed=spec.master_seed + 1,
    )
    generate_dataset(
        test_spec, manifest.operator, manifest.grid, TEST_SET_SIZE,
        out_dir, dtype="float32",
    )
    return Path(out_dir) / "manifest.json"


def train(manifest_path, config: TrainConfig = TrainConfig(), run_dir=None,
          test_manifest_path=None, device: str = "cpu"):
    """Train on a dataset, evaluate on a disjoint-seed held-out set.

    Returns (model, EvalResult).  When ``test_manifest_path`` is None a
    100-sample test set is generated next to ``run_dir`` (or in a
    temporary directory) with the training set's master seed + 1.
    """
    manifest_path = Path(manifest_path)
    manifest, x_train, y_train = load_tensors(manifest_path)

    tmp = None
    if test_manifest_path is None:
        if run_dir is not None:
            test_dir = Path(run_dir) / "testset"
            test_dir.mkdir(parents=True, exist_ok=True)
        else:
            tmp = tempfile.TemporaryDirectory()
            test_dir = Path(tmp.name)
        test_manifest_path = _held_out_manifest(manifest, test_dir)
    try:
        test_manifest, x_test, y_test = load_tensors(test_manifest_path)
        if test_manifest.operator != manifest.operator or test_manifest.bc != manifest.bc:
            raise ValueError(
                "test set operator/bc "
                f"({test_manifest.operator}, {test_manifest.bc}) does not match "
                f"training set ({manifest.operator}, {manifest.bc})"
            )
        if test_manifest.grid != manifest.grid:
            raise ValueError("test set grid does not match training set grid")

        torch.manual_seed(config.seed)
        model = FNO2d(config.modes, config.width,
                      in_channels=input_channels(manifest.operator)).to(device)
        loader = DataLoader(
            TensorDataset(x_train, y_train),
            batch_size=config.batch,
            shuffle=True,
            generator=torch.Generator().manual_seed(config.seed),
        )
        optimizer = torch.optim.Adam(model.parameters(), lr=config.lr)
        scheduler = torch.optim.lr_scheduler.StepLR(
            optimizer, step_size=config.scheduler_step, gamma=config.scheduler_gamma
        )

        loss_history = []
        for _ in range(config.epochs):
            model.train()
            total, count = 0.0, 0
            for xb, yb in loader:
                xb, yb = xb.to(device), yb.to(device)
                optimizer.zero_grad()
                loss = _batch_loss(model(xb), yb)
                loss.backward()
                optimizer.step()
                total += loss.item() * xb.shape[0]
                count += xb.shape[0]
            scheduler.step()
            loss_history.append(total / count)

        train_err, train_excl = relative_l2(
            predict(model, x_train, config.batch, device), y_train
        )
        test_err, test_excl = relative_l2(
            predict(model, x_test, config.batch, device), y_test
        )
        result = EvalResult(
            train_rel_l2=float(train_err.mean()),
            test_rel_l2=float(test_err.mean()),
            per_sample_test_errors=[float(e) for e in test_err],
            train_zero_norm_excluded=train_excl,
            test_zero_norm_excluded=test_excl,
            config=config.to_dict(),
            train_manifest_sha256=manifest_sha256(manifest_path),
            test_manifest_sha256=manifest_sha256(test_manifest_path),
            loss_history=loss_history,
        )
        return model, result
    finally:
        if tmp is not None:
            tmp.cleanup()
