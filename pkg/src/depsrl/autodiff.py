"""Dense float64 tensors on a reverse-mode differentiation tape.

Every numeric step of the labeler (embedding lookups, LSTM gates,
projections, biaffine scoring, the loss) is expressed through the ops in
this module, so a single backward() call yields exact gradients for every
parameter.  Ops compute eagerly with numpy; when a Tape is active, each op
output is recorded in creation order, which is already a topological order
of the graph.
"""

from __future__ import annotations

import numpy as np


class ShapeError(ValueError):
    """Operands with incompatible shapes."""


class TapeError(RuntimeError):
    """Backward pass requested on an invalid or absent tape."""


class Tensor:
    """A dense float64 array, optionally recorded on the active tape."""

    __slots__ = ("data", "grad", "op", "tape", "_parents", "_grad_fn")

    def __init__(self, data, op="leaf", parents=(), grad_fn=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.op = op
        self.tape = None
        self._parents = parents
        self._grad_fn = grad_fn

    @property
    def shape(self):
        return self.data.shape

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError(f"item() on tensor of shape {self.data.shape}")
        return float(self.data.reshape(()))

    def __repr__(self):
        return f"Tensor({self.op}, shape={self.data.shape})"


class Parameter(Tensor):
    """Trainable tensor with a name and a persistent gradient accumulator."""

    __slots__ = ("name",)

    def __init__(self, name: str, data):
        super().__init__(data, op="param")
        self.name = name
        self.grad = np.zeros_like(self.data)

    def zero_grad(self):
        self.grad = np.zeros_like(self.data)

    def __repr__(self):
        return f"Parameter({self.name!r}, shape={self.data.shape})"


class Tape:
    """Ordered record of op outputs; creation order is topological order."""

    def __init__(self):
        self.nodes: list[Tensor] = []

    def __enter__(self):
        _ACTIVE.append(self)
        return self

    def __exit__(self, *exc):
        _ACTIVE.pop()

    def __len__(self):
        return len(self.nodes)


_ACTIVE: list[Tape] = []


def _emit(out: Tensor) -> Tensor:
    if _ACTIVE:
        out.tape = _ACTIVE[-1]
        out.tape.nodes.append(out)
    return out


def backward(loss: Tensor) -> None:
    """Accumulate d(loss)/d(leaf) into the .grad of every reachable leaf.

    Gradients add up (+=): calling backward twice without resetting doubles
    every accumulator.  Nodes not reachable from the loss are untouched, so
    Parameter accumulators off the loss path stay exactly zero.
    """
    if loss.tape is None:
        raise TapeError("loss is not recorded on a tape")
    if loss.data.size != 1:
        raise TapeError(f"loss must be scalar, got shape {loss.data.shape}")
    tape = loss.tape
    pending: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    for node in reversed(tape.nodes):
        g = pending.pop(id(node), None)
        if g is None:
            continue
        node.grad = g if node.grad is None else node.grad + g
        if node._grad_fn is None:
            continue
        for parent, pg in node._grad_fn(g):
            if parent.tape is tape:
                key = id(parent)
                pending[key] = pg if key not in pending else pending[key] + pg
            elif parent.tape is None:
                parent.grad = pg if parent.grad is None else parent.grad + pg
            else:
                raise TapeError("graph crosses tape boundaries")


# ---------------------------------------------------------------------------
# ops

def constant(data) -> Tensor:
    return Tensor(data, op="const")


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product; the right operand may be a matrix or a vector."""
    if a.data.ndim != 2 or b.data.ndim not in (1, 2):
        raise ShapeError(f"matmul expects (m,k)@(k[,n]), got {a.shape} @ {b.shape}")
    if a.data.shape[1] != b.data.shape[0]:
        raise ShapeError(f"inner extents disagree: {a.shape} @ {b.shape}")
    out = a.data @ b.data

    def grad_fn(g):
        if b.data.ndim == 1:
            return ((a, np.outer(g, b.data)), (b, a.data.T @ g))
        return ((a, g @ b.data.T), (b, a.data.T @ g))

    return _emit(Tensor(out, "matmul", (a, b), grad_fn))


def add(a: Tensor, b: Tensor) -> Tensor:
    if a.data.shape != b.data.shape:
        raise ShapeError(f"add of shapes {a.shape} and {b.shape}")

    def grad_fn(g):
        return ((a, g), (b, g))

    return _emit(Tensor(a.data + b.data, "add", (a, b), grad_fn))


def add_n(parts: list[Tensor]) -> Tensor:
    """Sum of same-shaped tensors as a single graph node."""
    if not parts:
        raise ShapeError("add_n needs at least one term")
    shape = parts[0].data.shape
    if any(p.data.shape != shape for p in parts):
        raise ShapeError("add_n terms must share one shape")
    out = parts[0].data.copy()
    for p in parts[1:]:
        out += p.data

    def grad_fn(g):
        return tuple((p, g) for p in parts)

    return _emit(Tensor(out, "add_n", tuple(parts), grad_fn))


def mul(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise product of same-shaped tensors."""
    if a.data.shape != b.data.shape:
        raise ShapeError(f"mul of shapes {a.shape} and {b.shape}")

    def grad_fn(g):
        return ((a, g * b.data), (b, g * a.data))

    return _emit(Tensor(a.data * b.data, "mul", (a, b), grad_fn))


def scale(x: Tensor, c: float) -> Tensor:
    c = float(c)

    def grad_fn(g):
        return ((x, g * c),)

    return _emit(Tensor(x.data * c, "scale", (x,), grad_fn))


def concat(parts: list[Tensor]) -> Tensor:
    """Concatenate one-dimensional tensors; gradients slice back."""
    parts = list(parts)
    if not parts:
        raise ShapeError("concat needs at least one part")
    if any(p.data.ndim != 1 for p in parts):
        raise ShapeError("concat parts must be one-dimensional")
    bounds = np.cumsum([0] + [p.data.size for p in parts])
    out = np.concatenate([p.data for p in parts])

    def grad_fn(g):
        return tuple((p, g[bounds[i]:bounds[i + 1]]) for i, p in enumerate(parts))

    return _emit(Tensor(out, "concat", tuple(parts), grad_fn))


def slice1d(x: Tensor, start: int, stop: int) -> Tensor:
    if x.data.ndim != 1:
        raise ShapeError("slice1d expects a vector")

    def grad_fn(g):
        gx = np.zeros_like(x.data)
        gx[start:stop] = g
        return ((x, gx),)

    return _emit(Tensor(x.data[start:stop].copy(), "slice", (x,), grad_fn))


def take_row(table: Tensor, index: int) -> Tensor:
    """Row lookup into a 2-D table (embedding fetch)."""
    if table.data.ndim != 2:
        raise ShapeError("take_row expects a matrix")

    def grad_fn(g):
        gt = np.zeros_like(table.data)
        gt[index] = g
        return ((table, gt),)

    return _emit(Tensor(table.data[index].copy(), "take_row", (table,), grad_fn))


def relu(x: Tensor) -> Tensor:
    """Elementwise max(0, x); the subgradient at 0 is taken as 0."""
    keep = x.data > 0.0

    def grad_fn(g):
        return ((x, g * keep),)

    return _emit(Tensor(np.where(keep, x.data, 0.0), "relu", (x,), grad_fn))


def _sigmoid(d: np.ndarray) -> np.ndarray:
    # saturates gracefully at both ends, unlike 1/(1+exp(-x))
    return 0.5 * (1.0 + np.tanh(0.5 * d))


def sigmoid(x: Tensor) -> Tensor:
    out = _sigmoid(x.data)

    def grad_fn(g):
        return ((x, g * out * (1.0 - out)),)

    return _emit(Tensor(out, "sigmoid", (x,), grad_fn))


def tanh(x: Tensor) -> Tensor:
    out = np.tanh(x.data)

    def grad_fn(g):
        return ((x, g * (1.0 - out * out)),)

    return _emit(Tensor(out, "tanh", (x,), grad_fn))


def dot(a: Tensor, b: Tensor) -> Tensor:
    if a.data.ndim != 1 or b.data.ndim != 1 or a.data.size != b.data.size:
        raise ShapeError(f"dot of shapes {a.shape} and {b.shape}")

    def grad_fn(g):
        return ((a, g * b.data), (b, g * a.data))

    return _emit(Tensor(a.data @ b.data, "dot", (a, b), grad_fn))


def sum_all(x: Tensor) -> Tensor:
    def grad_fn(g):
        return ((x, np.full_like(x.data, float(g))),)

    return _emit(Tensor(x.data.sum(), "sum", (x,), grad_fn))


def bilinear(w: Tensor, a: Tensor, p: Tensor) -> Tensor:
    """out[l] = sum_ij a[i] * w[i,l,j] * p[j] for a (d1, L, d2) weight."""
    if w.data.ndim != 3 or a.data.ndim != 1 or p.data.ndim != 1:
        raise ShapeError("bilinear expects (d1,L,d2), (d1,), (d2,)")
    d1, _, d2 = w.data.shape
    if a.data.size != d1 or p.data.size != d2:
        raise ShapeError(
            f"bilinear extents disagree: w={w.shape}, a={a.shape}, p={p.shape}")
    out = np.einsum("i,ilj,j->l", a.data, w.data, p.data)

    def grad_fn(g):
        gw = np.einsum("i,l,j->ilj", a.data, g, p.data)
        ga = np.einsum("ilj,l,j->i", w.data, g, p.data)
        gp = np.einsum("i,ilj,l->j", a.data, w.data, g)
        return ((w, gw), (a, ga), (p, gp))

    return _emit(Tensor(out, "bilinear", (w, a, p), grad_fn))


def lstm_cell(wx: Tensor, x: Tensor, wh: Tensor, h: Tensor, b: Tensor,
              c: Tensor) -> Tensor:
    """One LSTM step fused into a single node; returns h_new ++ c_new.

    Gate layout in the 4n preactivation: input, forget, output, candidate.
    Fusing the step keeps tapes short, which matters because the engine is
    dispatch-bound at these tensor sizes.
    """
    n = h.data.size
    if wx.data.ndim != 2 or wh.data.shape != (4 * n, n) or b.data.size != 4 * n \
            or c.data.size != n or wx.data.shape[0] != 4 * n:
        raise ShapeError("inconsistent LSTM cell shapes")
    z = wx.data @ x.data + wh.data @ h.data + b.data
    gi = _sigmoid(z[:n])
    gf = _sigmoid(z[n:2 * n])
    go = _sigmoid(z[2 * n:3 * n])
    gu = np.tanh(z[3 * n:])
    c_new = gf * c.data + gi * gu
    t = np.tanh(c_new)
    h_new = go * t

    def grad_fn(g):
        gh, gc = g[:n], g[n:]
        gc_total = gc + gh * go * (1.0 - t * t)
        gz = np.empty(4 * n)
        gz[:n] = gc_total * gu * gi * (1.0 - gi)
        gz[n:2 * n] = gc_total * c.data * gf * (1.0 - gf)
        gz[2 * n:3 * n] = gh * t * go * (1.0 - go)
        gz[3 * n:] = gc_total * gi * (1.0 - gu * gu)
        return ((wx, np.outer(gz, x.data)), (x, wx.data.T @ gz),
                (wh, np.outer(gz, h.data)), (h, wh.data.T @ gz),
                (b, gz), (c, gc_total * gf))

    return _emit(Tensor(np.concatenate([h_new, c_new]), "lstm_cell",
                        (wx, x, wh, h, b, c), grad_fn))


def dropout_mask(shape, keep_prob: float, rng: np.random.Generator) -> np.ndarray:
    """Sample an inverted-dropout mask (kept entries carry 1/keep_prob)."""
    return (rng.random(shape) < keep_prob) / keep_prob


def dropout(x: Tensor, keep_prob: float, train: bool,
            mask: np.ndarray | None = None,
            rng: np.random.Generator | None = None) -> Tensor:
    """Inverted dropout; pass the same `mask` to share it across time-steps."""
    if not 0.0 < keep_prob <= 1.0:
        raise ValueError(f"keep_prob must be in (0, 1], got {keep_prob}")
    if not train or (keep_prob == 1.0 and mask is None):
        return x
    if mask is None:
        if rng is None:
            raise ValueError("training-mode dropout needs a mask or an rng")
        mask = dropout_mask(x.data.shape, keep_prob, rng)

    def grad_fn(g):
        return ((x, g * mask),)

    return _emit(Tensor(x.data * mask, "dropout", (x,), grad_fn))


def cross_entropy(scores: Tensor, gold: int) -> Tensor:
    """-log softmax(scores)[gold], computed with max subtraction."""
    if scores.data.ndim != 1:
        raise ShapeError("cross_entropy expects a score vector")
    n = scores.data.size
    if not 0 <= gold < n:
        raise ValueError(f"gold label {gold} outside [0, {n})")
    z = scores.data - scores.data.max()
    ez = np.exp(z)
    probs = ez / ez.sum()
    loss = np.log(ez.sum()) - z[gold]

    def grad_fn(g):
        gs = probs.copy()
        gs[gold] -= 1.0
        return ((scores, float(g) * gs),)

    return _emit(Tensor(loss, "cross_entropy", (scores,), grad_fn))


# ---------------------------------------------------------------------------
# optimization

def learning_rate(t: float, base: float = 0.002, decay: float = 0.75,
                  period: float = 5000.0) -> float:
    """Continuously annealed rate base * decay**(t/period) with real-valued t."""
    return base * decay ** (t / period)


class Adam:
    """Adam with bias correction, driving the annealed learning-rate schedule.

    The step counter, per-parameter moments and the schedule constants live
    here; step() consumes and clears the parameters' gradient accumulators.
    """

    def __init__(self, params: list[Parameter], base_lr: float = 0.002,
                 beta1: float = 0.9, beta2: float = 0.9, eps: float = 1e-8,
                 decay: float = 0.75, period: int = 5000,
                 freeze: tuple[str, ...] = ()):
        names = [p.name for p in params]
        if len(set(names)) != len(names):
            raise ValueError("duplicate parameter names")
        self.params = list(params)
        self.base_lr = base_lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.decay = decay
        self.period = period
        self.freeze = set(freeze)
        self.t = 0
        self.m = {p.name: np.zeros_like(p.data) for p in self.params}
        self.v = {p.name: np.zeros_like(p.data) for p in self.params}

    def current_lr(self) -> float:
        return learning_rate(self.t, self.base_lr, self.decay, self.period)

    def step(self) -> float:
        """Apply one update at learning_rate(t); returns the rate used."""
        lr = self.current_lr()
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for p in self.params:
            if p.name in self.freeze:
                p.zero_grad()
                continue
            g = p.grad
            m = self.m[p.name]
            v = self.v[p.name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p.data -= lr * (m / c1) / (np.sqrt(v / c2) + self.eps)
            p.zero_grad()
        return lr


def clip_global_norm(params: list[Parameter], max_norm: float) -> float:
    """Rescale all gradient accumulators if their joint L2 norm exceeds max_norm."""
    total = np.sqrt(sum(float((p.grad * p.grad).sum()) for p in params))
    if total > max_norm > 0.0:
        ratio = max_norm / total
        for p in params:
            p.grad *= ratio
    return total


def numeric_gradient(f, x: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """Central-difference gradient of scalar f() with respect to array x.

    x is perturbed in place while probing and restored afterwards.
    """
    grad = np.zeros_like(x)
    flat = x.reshape(-1)
    gf = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        fp = f()
        flat[i] = orig - h
        fm = f()
        flat[i] = orig
        gf[i] = (fp - fm) / (2.0 * h)
    return grad
