"""Small fully connected networks with hand-written backpropagation."""
from __future__ import annotations

import io
from typing import Callable, List, Sequence, Tuple

import numpy as np

FORMAT_VERSION = "pogo-mlp-v1"


class Mlp:
    """ReLU multilayer perceptron with a ``tanh`` or identity output.

    Parameters
    ----------
    sizes : sequence of int
        Layer widths including input and output, e.g. ``(4, 64, 64, 2)``.
    output : {"identity", "tanh"}
    rng : numpy.random.Generator, optional
        Draws the initial weights uniformly in ``+-1/sqrt(fan_in)``.  Without
        a generator all parameters start at zero.
    final_scale : float
        Multiplies the initial weights and biases of the last layer.
    """

    def __init__(self, sizes: Sequence[int], output: str = "identity",
                 rng: np.random.Generator | None = None, final_scale: float = 1.0):
        if output not in ("identity", "tanh"):
            raise ValueError(f"unknown output activation {output!r}")
        if len(sizes) < 2:
            raise ValueError("need at least input and output sizes")
        self.sizes = tuple(int(s) for s in sizes)
        self.output = output
        self.weights: List[np.ndarray] = []
        self.biases: List[np.ndarray] = []
        n_layers = len(self.sizes) - 1
        for k, (fan_in, fan_out) in enumerate(zip(self.sizes[:-1], self.sizes[1:])):
            if rng is None:
                w = np.zeros((fan_in, fan_out))
                b = np.zeros(fan_out)
            else:
                lim = 1.0 / np.sqrt(fan_in)
                w = rng.uniform(-lim, lim, size=(fan_in, fan_out))
                b = rng.uniform(-lim, lim, size=fan_out)
                if k == n_layers - 1:
                    w *= final_scale
                    b *= final_scale
            self.weights.append(w)
            self.biases.append(b)

    @property
    def params(self) -> List[np.ndarray]:
        return [p for pair in zip(self.weights, self.biases) for p in pair]

    @property
    def n_params(self) -> int:
        return sum(p.size for p in self.params)

    def copy(self) -> "Mlp":
        new = Mlp.__new__(Mlp)
        new.sizes = self.sizes
        new.output = self.output
        new.weights = [w.copy() for w in self.weights]
        new.biases = [b.copy() for b in self.biases]
        return new

    def forward(self, x: np.ndarray, return_cache: bool = False):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        acts = [x]
        pre = []
        h = x
        last = len(self.weights) - 1
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w + b
            pre.append(z)
            if k < last:
                h = np.maximum(z, 0.0)
            elif self.output == "tanh":
                h = np.tanh(z)
            else:
                h = z
            acts.append(h)
        if return_cache:
            return h, (acts, pre)
        return h

    __call__ = forward

    def backward(self, cache, grad_out: np.ndarray):
        """Gradients of a scalar loss given ``dloss/doutput``.

        Returns ``(param_grads, grad_input)`` with ``param_grads`` ordered like
        :attr:`params`.
        """
        acts, pre = cache
        g = np.asarray(grad_out, dtype=float)
        last = len(self.weights) - 1
        if self.output == "tanh":
            g = g * (1.0 - acts[-1] ** 2)
        grads: List[np.ndarray] = [None] * (2 * len(self.weights))
        for k in range(last, -1, -1):
            if k < last:
                g = g * (pre[k] > 0.0)
            grads[2 * k] = acts[k].T @ g
            grads[2 * k + 1] = g.sum(axis=0)
            g = g @ self.weights[k].T
        return grads, g

    def get_flat(self) -> np.ndarray:
        return np.concatenate([p.ravel() for p in self.params])

    def set_flat(self, flat: np.ndarray) -> None:
        flat = np.asarray(flat, dtype=float)
        if flat.size != self.n_params:
            raise ValueError(f"expected {self.n_params} values, got {flat.size}")
        i = 0
        for p in self.params:
            p[...] = flat[i:i + p.size].reshape(p.shape)
            i += p.size

    def soft_update_from(self, online: "Mlp", tau: float) -> None:
        """``self <- tau * online + (1 - tau) * self`` in place."""
        for target, source in zip(self.params, online.params):
            target *= 1.0 - tau
            target += tau * source

    # Plain-text snapshot: version tag, activation, sizes, then row-major values.
    def dumps(self) -> str:
        out = io.StringIO()
        out.write(f"{FORMAT_VERSION}\n{self.output}\n")
        out.write(" ".join(str(s) for s in self.sizes) + "\n")
        for p in self.params:
            out.write(" ".join(repr(float(v)) for v in p.ravel()) + "\n")
        return out.getvalue()

    @classmethod
    def loads(cls, text: str) -> "Mlp":
        lines = text.splitlines()
        if not lines or lines[0] != FORMAT_VERSION:
            raise ValueError(f"not a {FORMAT_VERSION} snapshot")
        net = cls([int(s) for s in lines[2].split()], output=lines[1])
        values = [np.array([float(v) for v in line.split()]) for line in lines[3:]]
        if len(values) != len(net.params):
            raise ValueError("snapshot has the wrong number of parameter arrays")
        for p, v in zip(net.params, values):
            p[...] = v.reshape(p.shape)
        return net


class Adam:
    """Adam optimizer over a fixed list of parameter arrays (updated in place)."""

    def __init__(self, params: List[np.ndarray], lr: float = 1e-3, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.params = params
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, grads: List[np.ndarray]) -> None:
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


LossFn = Callable[[np.ndarray], Tuple[float, np.ndarray]]


def gradient_check(net: Mlp, loss: LossFn, x: np.ndarray, step: float = 1e-6,
                   floor: float | None = None) -> float:
    """Largest relative gap between backprop and central finite differences.

    ``loss(output)`` returns ``(value, dvalue/doutput)``.  The relative error of
    each parameter is ``|analytic - numeric| / max(|analytic|, |numeric|, floor)``.
    By default ``floor`` is ``1e-4`` times the largest analytic gradient, so
    components too small for a finite difference to resolve do not dominate.
    Inputs that put a ReLU exactly on its kink are not differentiable and must
    be avoided by the caller.
    """
    out, cache = net.forward(x, return_cache=True)
    _, dout = loss(out)
    analytic = np.concatenate([g.ravel() for g in net.backward(cache, dout)[0]])
    if floor is None:
        floor = 1e-4 * float(np.max(np.abs(analytic)))

    flat = net.get_flat()
    numeric = np.empty_like(flat)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + step
        net.set_flat(flat)
        up = loss(net.forward(x))[0]
        flat[i] = orig - step
        net.set_flat(flat)
        down = loss(net.forward(x))[0]
        flat[i] = orig
        numeric[i] = (up - down) / (2.0 * step)
    net.set_flat(flat)
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return float(np.max(np.abs(analytic - numeric) / scale))
