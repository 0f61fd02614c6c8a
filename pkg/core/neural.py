"""
Неглубокие сети прямого распространения прямо на numpy.

Слой считает a @ W + b, W хранится как (fan_in, fan_out); скрытые слои с
tanh, выходной линейный. Обучение полным батчем, принимаются только шаги,
не увеличивающие ошибку на обучающей части.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from core.exceptions import DomainError, TrainingError

logger = logging.getLogger(__name__)

HIDDEN = "tanh"
OUTPUT = "identity"


@dataclass
class MlpModel:
    """Размеры слоев, веса (fan_in x fan_out) и смещения; после обучения не меняются"""
    sizes: Tuple[int, ...]
    weights: List[np.ndarray]
    biases: List[np.ndarray]

    def __post_init__(self):
        self.sizes = tuple(int(s) for s in self.sizes)
        if len(self.weights) != len(self.sizes) - 1 or len(self.biases) != len(self.weights):
            raise DomainError(f"{len(self.weights)} weight blocks do not fit layer sizes {self.sizes}")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape != (self.sizes[i], self.sizes[i + 1]) or b.shape != (self.sizes[i + 1],):
                raise DomainError(f"layer {i} has shapes {w.shape}/{b.shape}, sizes say {self.sizes[i:i + 2]}")

    @property
    def activations(self) -> List[str]:
        return [HIDDEN] * (len(self.weights) - 1) + [OUTPUT]

    @property
    def n_inputs(self) -> int:
        return self.sizes[0]

    @property
    def n_outputs(self) -> int:
        return self.sizes[-1]

    @property
    def parameter_count(self) -> int:
        return int(sum(w.size + b.size for w, b in zip(self.weights, self.biases)))

    def parameters(self) -> List[np.ndarray]:
        """Блоки в порядке W0, b0, W1, b1, ..."""
        blocks = []
        for w, b in zip(self.weights, self.biases):
            blocks += [w, b]
        return blocks

    def flat(self) -> np.ndarray:
        return np.concatenate([p.ravel() for p in self.parameters()])

    def with_flat(self, theta: np.ndarray) -> "MlpModel":
        weights, biases = [], []
        offset = 0
        for w, b in zip(self.weights, self.biases):
            weights.append(theta[offset:offset + w.size].reshape(w.shape).copy())
            offset += w.size
            biases.append(theta[offset:offset + b.size].copy())
            offset += b.size
        return MlpModel(self.sizes, weights, biases)

    def copy(self) -> "MlpModel":
        return MlpModel(self.sizes, [w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(p)) for p in self.parameters())

    def to_dict(self) -> dict:
        return {
            "kind": "mlp",
            "sizes": list(self.sizes),
            "activations": self.activations,
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MlpModel":
        if data.get("kind") != "mlp":
            raise DomainError(f"not a serialized network: kind={data.get('kind')!r}")
        sizes = tuple(data["sizes"])
        weights = [np.asarray(w, dtype=float).reshape(sizes[i], sizes[i + 1])
                   for i, w in enumerate(data["weights"])]
        biases = [np.asarray(b, dtype=float).reshape(sizes[i + 1]) for i, b in enumerate(data["biases"])]
        return cls(sizes, weights, biases)


@dataclass(frozen=True)
class TrainConfig:
    """
    Протокол обучения.

    Метод "lm" демпфирует шаг Гаусса-Ньютона (демпфер умножается на mu_up
    при отклоненном шаге и на mu_down при принятом). Метод "gd" это обычный
    градиентный спуск: шаг умножается на lr_shrink при отказе и на lr_growth
    при успехе.
    """
    max_epochs: int = 3000
    patience: int = 1000
    method: str = "lm"
    learning_rate: float = 0.01
    lr_growth: float = 1.05
    lr_shrink: float = 0.5
    mu_init: float = 1e-3
    mu_up: float = 10.0
    mu_down: float = 0.1
    mu_max: float = 1e10
    min_step: float = 1e-14
    split: Tuple[float, float, float] = (0.70, 0.15, 0.15)
    seed: int = 0

    def check(self) -> None:
        if self.max_epochs < 1:
            raise DomainError(f"max_epochs must be >= 1, got {self.max_epochs}")
        if not 0 <= self.patience <= self.max_epochs:
            raise DomainError(f"patience must lie in [0, max_epochs], got {self.patience}")
        if self.method not in ("lm", "gd"):
            raise DomainError(f"unknown training method {self.method!r}")
        if len(self.split) != 3 or min(self.split) < 0 or abs(sum(self.split) - 1.0) > 1e-9:
            raise DomainError(f"split fractions must be non-negative and sum to 1, got {self.split}")
        if self.learning_rate <= 0 or not 0 < self.lr_shrink < 1 or self.lr_growth < 1:
            raise DomainError("learning-rate policy needs rate > 0, 0 < shrink < 1 <= growth")


@dataclass
class TrainReport:
    train_mse: List[float] = field(default_factory=list)
    val_mse: List[float] = field(default_factory=list)
    best_epoch: int = 0
    stop_epoch: int = 0
    stop_reason: str = "max_epochs"
    test_mse: float = float("nan")
    best_val_mse: float = float("inf")

    @property
    def test_rmse(self) -> float:
        return float(np.sqrt(self.test_mse))

    def to_dict(self) -> dict:
        return {
            "epochs": self.stop_epoch,
            "best_epoch": self.best_epoch,
            "stop_reason": self.stop_reason,
            "best_val_mse": self.best_val_mse,
            "test_mse": self.test_mse,
        }


def mlp_init(layer_sizes: Sequence[int], seed: int = 0) -> MlpModel:
    """Веса равномерно в +-sqrt(3 / fan_in), смещения нулевые"""
    sizes = tuple(int(s) for s in layer_sizes)
    if len(sizes) < 3:
        raise DomainError(f"a network needs at least one hidden layer, got sizes {sizes}")
    if min(sizes) < 1:
        raise DomainError(f"zero-width layer in {sizes}")
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        limit = np.sqrt(3.0 / fan_in)
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MlpModel(sizes, weights, biases)


def _as_batch(model: MlpModel, x) -> Tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1
    batch = arr.reshape(1, -1) if single else arr
    if batch.ndim != 2 or batch.shape[1] != model.n_inputs:
        raise DomainError(f"input of shape {arr.shape} does not match {model.n_inputs} network inputs")
    return batch, single


def _forward_layers(model: MlpModel, x: np.ndarray) -> List[np.ndarray]:
    """Активации всех слоев, включая вход"""
    outputs = [x]
    last = len(model.weights) - 1
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = outputs[-1] @ w + b
        outputs.append(z if i == last else np.tanh(z))
    return outputs


def mlp_forward(model: MlpModel, x) -> np.ndarray:
    """Выход для одного вектора или батча (строки это примеры)"""
    batch, single = _as_batch(model, x)
    y = _forward_layers(model, batch)[-1]
    return y[0] if single else y


def _targets(model: MlpModel, y, n: int) -> np.ndarray:
    t = np.asarray(y, dtype=float).reshape(n, -1)
    if t.shape[1] != model.n_outputs:
        raise DomainError(f"targets have {t.shape[1]} columns, network has {model.n_outputs} outputs")
    return t


def mse(model: MlpModel, x, y) -> float:
    batch, _ = _as_batch(model, x)
    residual = mlp_forward(model, batch) - _targets(model, y, batch.shape[0])
    return float(np.mean(residual ** 2))


def loss_and_gradient(model: MlpModel, x, y) -> Tuple[float, List[np.ndarray]]:
    """Среднеквадратичная ошибка по всем выходам и ее градиент по блокам параметров"""
    batch, _ = _as_batch(model, x)
    target = _targets(model, y, batch.shape[0])
    outputs = _forward_layers(model, batch)
    residual = outputs[-1] - target
    loss = float(np.mean(residual ** 2))

    delta = 2.0 * residual / residual.size
    grads: List[np.ndarray] = []
    for i in range(len(model.weights) - 1, -1, -1):
        grads = [outputs[i].T @ delta, delta.sum(axis=0)] + grads
        if i > 0:
            delta = (delta @ model.weights[i].T) * (1.0 - outputs[i] ** 2)
    return loss, grads


def _jacobian(model: MlpModel, x: np.ndarray) -> np.ndarray:
    """d выход / d параметры, строки в порядке (пример, выход)"""
    outputs = _forward_layers(model, x)
    n, n_out = x.shape[0], model.n_outputs
    rows = []
    for o in range(n_out):
        delta = np.zeros((n, n_out))
        delta[:, o] = 1.0
        blocks = []
        for i in range(len(model.weights) - 1, -1, -1):
            gw = (outputs[i][:, :, None] * delta[:, None, :]).reshape(n, -1)
            blocks = [gw, delta] + blocks
            if i > 0:
                delta = (delta @ model.weights[i].T) * (1.0 - outputs[i] ** 2)
        rows.append(np.hstack(blocks))
    return np.stack(rows, axis=1).reshape(n * n_out, -1)


def _split(n: int, cfg: TrainConfig) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    order = np.random.default_rng(cfg.seed).permutation(n)
    n_train = max(1, int(round(cfg.split[0] * n)))
    n_val = max(1, int(round(cfg.split[1] * n)))
    n_val = min(n_val, n - n_train - 1)
    return order[:n_train], order[n_train:n_train + n_val], order[n_train + n_val:]


def mlp_train(model: MlpModel, inputs, targets, cfg: Optional[TrainConfig] = None,
              target: Optional[str] = None) -> Tuple[MlpModel, TrainReport]:
    """
    Обучает копию модели на разбиении 70/15/15 с фиксированным зерном.

    Возвращает параметры с наименьшей ошибкой на валидации (стартовая точка
    тоже учитывается). Останавливается на max_epochs, после `patience` эпох
    подряд без улучшения валидации или когда ни один шаг уже не снижает
    ошибку обучения.
    """
    cfg = cfg or TrainConfig()
    cfg.check()
    x, _ = _as_batch(model, inputs)
    y = _targets(model, targets, x.shape[0])
    if x.shape[0] < 10:
        raise DomainError(f"training needs at least 10 samples, got {x.shape[0]}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise TrainingError("training data contains non-finite values", target=target)

    train_idx, val_idx, test_idx = _split(x.shape[0], cfg)
    x_tr, y_tr = x[train_idx], y[train_idx]
    x_val, y_val = x[val_idx], y[val_idx]

    current = model.copy()
    theta = current.flat()
    loss = mse(current, x_tr, y_tr)
    if not np.isfinite(loss):
        raise TrainingError("initial loss is not finite", target=target)

    report = TrainReport()
    best = current.copy()
    report.best_val_mse = mse(current, x_val, y_val)
    failures = 0
    step = cfg.learning_rate
    mu = cfg.mu_init

    for epoch in range(1, cfg.max_epochs + 1):
        accepted = False
        if cfg.method == "lm":
            residual = (mlp_forward(current, x_tr) - y_tr).ravel()
            jac = _jacobian(current, x_tr)
            jtj = jac.T @ jac
            jtr = jac.T @ residual
            while mu <= cfg.mu_max:
                delta = np.linalg.solve(jtj + mu * np.eye(jtj.shape[0]), jtr)
                candidate = current.with_flat(theta - delta)
                new_loss = mse(candidate, x_tr, y_tr)
                if np.isnan(new_loss):
                    raise TrainingError(f"NaN loss at epoch {epoch}", target=target)
                if new_loss <= loss:
                    mu = max(mu * cfg.mu_down, 1e-20)
                    accepted = True
                    break
                mu *= cfg.mu_up
        else:
            _, grads = loss_and_gradient(current, x_tr, y_tr)
            gflat = np.concatenate([g.ravel() for g in grads])
            candidate = current.with_flat(theta - step * gflat)
            new_loss = mse(candidate, x_tr, y_tr)
            if np.isnan(new_loss):
                raise TrainingError(f"NaN loss at epoch {epoch} (step {step:.3g})", target=target)
            if new_loss <= loss:
                step *= cfg.lr_growth
                accepted = True
            else:
                step *= cfg.lr_shrink

        if accepted:
            current = candidate
            theta = current.flat()
            loss = new_loss
        val = mse(current, x_val, y_val)
        report.train_mse.append(loss)
        report.val_mse.append(val)
        report.stop_epoch = epoch

        if val < report.best_val_mse:
            report.best_val_mse = val
            report.best_epoch = epoch
            best = current.copy()
            failures = 0
        else:
            failures += 1
            if failures > cfg.patience:
                report.stop_reason = "patience"
                break
        if (cfg.method == "lm" and mu > cfg.mu_max) or (cfg.method == "gd" and step < cfg.min_step):
            report.stop_reason = "step_underflow"
            break

    report.test_mse = mse(best, x[test_idx], y[test_idx])
    logger.debug(f"[NN][TRAIN] {target or 'net'}: {report.stop_reason} at epoch {report.stop_epoch}, "
                 f"best {report.best_epoch}, val {report.best_val_mse:.3e}, test {report.test_mse:.3e}")
    return best, report


def gradient_check(model: MlpModel, x, y, epsilon: float = 1e-6) -> float:
    """
    Наибольшая относительная ошибка между градиентом обратного прохода и
    центральной разностью, по блокам: |ga - gn| / max(|ga|, |gn|).
    """
    if not epsilon > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    batch, _ = _as_batch(model, x)
    target = _targets(model, y, batch.shape[0])
    _, analytic = loss_and_gradient(model, batch, target)

    probe = model.copy()
    worst = 0.0
    for block, ga in zip(probe.parameters(), analytic):
        gn = np.zeros_like(block)
        for idx in np.ndindex(block.shape):
            saved = block[idx]
            block[idx] = saved + epsilon
            plus = mse(probe, batch, target)
            block[idx] = saved - epsilon
            minus = mse(probe, batch, target)
            block[idx] = saved
            gn[idx] = (plus - minus) / (2.0 * epsilon)
        scale = max(np.linalg.norm(ga), np.linalg.norm(gn))
        if scale > 0:
            worst = max(worst, float(np.linalg.norm(ga - gn) / scale))
    return worst
