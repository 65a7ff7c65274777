"""Adam and the step-decay learning-rate schedule."""

from dataclasses import dataclass

import numpy as np

from .errors import NonFiniteGradient


@dataclass(frozen=True)
class LrSchedule:
    """Piecewise-constant decay: ``initial_lr * decay_factor ** (t // decay_interval)``."""

    initial_lr: float = 0.01
    decay_factor: float = 0.75
    decay_interval: int = 5000

    def __post_init__(self):
        if not self.initial_lr > 0:
            raise ValueError("initial_lr must be positive")
        if not 0 < self.decay_factor <= 1:
            raise ValueError("decay_factor must lie in (0, 1]")
        if self.decay_interval < 1:
            raise ValueError("decay_interval must be a positive integer")


def lr_at(schedule, t):
    if t < 0:
        raise ValueError("iteration index must be non-negative")
    return schedule.initial_lr * schedule.decay_factor ** (t // schedule.decay_interval)


class Adam:
    """Adam with bias correction over a fixed-shape parameter array.

    Moments have the parameter's shape. ``step`` may be restricted to a subset
    of rows; moments of the other rows are left alone (lazy update) while the
    shared step counter still advances by one.
    """

    def __init__(self, shape, beta1=0.9, beta2=0.999, epsilon=1e-8):
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.first_moment = np.zeros(shape)
        self.second_moment = np.zeros(shape)
        self.step_count = 0

    def step(self, params, grads, lr, rows=None):
        """Update ``params`` in place and return it.

        With ``rows`` given, ``grads`` holds one gradient row per entry of
        ``rows`` and only those parameter rows move.
        """
        grads = np.asarray(grads, dtype=np.float64)
        if not np.all(np.isfinite(grads)):
            bad = np.argwhere(~np.isfinite(grads))[0]
            raise NonFiniteGradient(
                f"non-finite gradient at index {tuple(int(b) for b in bad)} "
                f"(step {self.step_count + 1})"
            )
        if not lr > 0:
            raise ValueError("learning rate must be positive")

        self.step_count += 1
        bc1 = 1.0 - self.beta1 ** self.step_count
        bc2 = 1.0 - self.beta2 ** self.step_count

        if rows is None:
            m = self.first_moment
            v = self.second_moment
        else:
            m = self.first_moment[rows]
            v = self.second_moment[rows]
        if m.shape != grads.shape:
            raise ValueError(f"gradient shape {grads.shape} does not match {m.shape}")

        m *= self.beta1
        m += (1.0 - self.beta1) * grads
        v *= self.beta2
        v += (1.0 - self.beta2) * (grads * grads)
        update = lr * (m / bc1) / (np.sqrt(v / bc2) + self.epsilon)

        if rows is None:
            params -= update
        else:
            self.first_moment[rows] = m
            self.second_moment[rows] = v
            params[rows] -= update
        return params
