"""Minimal reverse-mode tape over numpy arrays.

Only the primitives the policy-training losses need: elementwise
arithmetic, matmul, relu, softmax rows, L1 pieces, and two fused
mean-field propagation steps. Constants may be plain ndarrays.
"""

import numpy as np


def _unbroadcast(grad, shape):
    """Sum a broadcasted gradient back to the original shape."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Tensor:
    __slots__ = ("data", "grad", "_parents", "_backward", "requires_grad")

    def __init__(self, data, requires_grad=False, parents=(), backward=None):
        self.data = np.asarray(data)
        if not np.issubdtype(self.data.dtype, np.floating):
            self.data = self.data.astype(np.float64)
        self.grad = None
        self.requires_grad = requires_grad or any(p.requires_grad for p in parents)
        self._parents = parents if self.requires_grad else ()
        self._backward = backward if self.requires_grad else None

    @property
    def shape(self):
        return self.data.shape

    def _accum(self, g):
        # non-mutating accumulation: gradient buffers are never written
        # in place, so passing one array to several parents is safe
        self.grad = g if self.grad is None else self.grad + g

    def backward(self):
        if self.data.ndim != 0:
            raise ValueError("backward() expects a scalar loss")
        order = []
        seen = set()

        def visit(node):
            if id(node) in seen or not node.requires_grad:
                return
            seen.add(id(node))
            for p in node._parents:
                visit(p)
            order.append(node)

        visit(self)
        self.grad = np.ones_like(self.data)
        for node in reversed(order):
            if node._backward is not None:
                node._backward(node.grad)

    # -- elementwise arithmetic ------------------------------------------

    def __add__(self, other):
        other = as_tensor(other)
        out = Tensor(self.data + other.data, parents=(self, other))

        def backward(g):
            if self.requires_grad:
                self._accum(_unbroadcast(g, self.shape))
            if other.requires_grad:
                other._accum(_unbroadcast(g, other.shape))

        out._backward = backward
        return out

    __radd__ = __add__

    def __neg__(self):
        out = Tensor(-self.data, parents=(self,))
        out._backward = lambda g: self._accum(-g)
        return out

    def __sub__(self, other):
        return self + (-as_tensor(other))

    def __rsub__(self, other):
        return as_tensor(other) + (-self)

    def __mul__(self, other):
        other = as_tensor(other)
        out = Tensor(self.data * other.data, parents=(self, other))

        def backward(g):
            if self.requires_grad:
                self._accum(_unbroadcast(g * other.data, self.shape))
            if other.requires_grad:
                other._accum(_unbroadcast(g * self.data, other.shape))

        out._backward = backward
        return out

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = as_tensor(other)
        out = Tensor(self.data / other.data, parents=(self, other))

        def backward(g):
            if self.requires_grad:
                self._accum(_unbroadcast(g / other.data, self.shape))
            if other.requires_grad:
                other._accum(
                    _unbroadcast(-g * self.data / other.data**2, other.shape)
                )

        out._backward = backward
        return out

    # -- linear algebra ---------------------------------------------------

    def matmul(self, other):
        other = as_tensor(other)
        out = Tensor(self.data @ other.data, parents=(self, other))

        def backward(g):
            if self.requires_grad:
                self._accum(g @ other.data.T)
            if other.requires_grad:
                other._accum(self.data.T @ g)

        out._backward = backward
        return out

    __matmul__ = matmul

    # -- nonlinearities ----------------------------------------------------

    def relu(self):
        mask = self.data > 0
        out = Tensor(self.data * mask, parents=(self,))
        out._backward = lambda g: self._accum(g * mask)
        return out

    def softmax_rows(self):
        """Softmax over the last axis, numerically shifted."""
        z = self.data - self.data.max(axis=-1, keepdims=True)
        e = np.exp(z)
        p = e / e.sum(axis=-1, keepdims=True)
        out = Tensor(p, parents=(self,))

        def backward(g):
            dot = (g * p).sum(axis=-1, keepdims=True)
            self._accum(p * (g - dot))

        out._backward = backward
        return out

    def abs(self):
        """|x| with subgradient sign(x), sign(0) = 0."""
        s = np.sign(self.data)
        out = Tensor(np.abs(self.data), parents=(self,))
        out._backward = lambda g: self._accum(g * s)
        return out

    def xlogx(self):
        """x*log(x) elementwise with the convention 0*log(0) = 0.

        Meant for probabilities (entropy terms); the subgradient at 0 is
        taken to be 0 so underflowed softmax entries stay finite.
        """
        pos = self.data > 0
        safe = np.where(pos, self.data, 1.0)
        logx = np.log(safe)
        out = Tensor(np.where(pos, self.data * logx, 0.0), parents=(self,))
        out._backward = lambda g: self._accum(g * np.where(pos, logx + 1.0, 0.0))
        return out

    # -- reductions and reshaping -----------------------------------------

    def sum(self, axis=None):
        out = Tensor(self.data.sum(axis=axis), parents=(self,))

        def backward(g):
            if axis is None:
                self._accum(np.broadcast_to(g, self.shape).copy())
            else:
                self._accum(np.broadcast_to(np.expand_dims(g, axis), self.shape).copy())

        out._backward = backward
        return out

    def reshape(self, *shape):
        old = self.shape
        out = Tensor(self.data.reshape(*shape), parents=(self,))
        out._backward = lambda g: self._accum(g.reshape(old))
        return out

    def slice_rows(self, start, stop):
        """Row slice along the first axis, gradient scattered back."""
        out = Tensor(self.data[start:stop], parents=(self,))

        def backward(g):
            full = np.zeros_like(self.data)
            full[start:stop] = g
            self._accum(full)

        out._backward = backward
        return out

    def repeat_rows(self, k):
        """Repeat each row k times: (S, d) -> (S*k, d)."""
        s, d = self.shape
        out = Tensor(np.repeat(self.data, k, axis=0), parents=(self,))
        out._backward = lambda g: self._accum(g.reshape(s, k, d).sum(axis=1))
        return out


def as_tensor(x):
    return x if isinstance(x, Tensor) else Tensor(x)


def concat_cols(tensors):
    """Concatenate along the last axis."""
    tensors = [as_tensor(t) for t in tensors]
    out = Tensor(np.concatenate([t.data for t in tensors], axis=-1), parents=tuple(tensors))
    splits = np.cumsum([t.shape[-1] for t in tensors])[:-1]

    def backward(g):
        for t, piece in zip(tensors, np.split(g, splits, axis=-1)):
            if t.requires_grad:
                t._accum(piece)

    out._backward = backward
    return out


def affine(h, w, b, relu=False):
    """h @ w + b (optionally rectified) as a single tape node."""
    h, w, b = as_tensor(h), as_tensor(w), as_tensor(b)
    z = h.data @ w.data
    z += b.data
    if relu:
        np.maximum(z, 0.0, out=z)
    mask = z > 0 if relu else None
    out = Tensor(z, parents=(h, w, b))

    def backward(g):
        if relu:
            g = g * mask
        if h.requires_grad:
            h._accum(g @ w.data.T)
        if w.requires_grad:
            w._accum(h.data.T @ g)
        if b.requires_grad:
            b._accum(g.sum(axis=0))

    out._backward = backward
    return out


def rollout_value(pi_all, rho0, rewards, transitions):
    """Total mean-field reward of a policy rollout, fused with its adjoint.

    pi_all: tape Tensor (H*S*X, A), the per-time action laws stacked
    time-major; rho0: (S, X) start distributions; rewards: constant
    (H, S, X, A); transitions: indexable by t giving constant kernels
    (S, X, A, X) for t < H-1. Returns (scalar Tensor of the summed
    reward over paths and time, per-path totals (S,)).

    The backward pass runs the costate recursion
    lam_t = q_t + E[lam_{t+1} | kernel] by hand, writing the policy
    gradient into one buffer instead of taping every time step.
    """
    h = rewards.shape[0]
    s, x = rho0.shape
    a = rewards.shape[-1]
    dt = rho0.dtype
    pis = pi_all.data.reshape(h, s, x, a)
    rhos = np.empty((h, s, x), dtype=dt)
    rhos[0] = rho0
    qs = np.empty((h, s, x), dtype=dt)
    for t in range(h):
        qs[t] = (pis[t] * rewards[t]).sum(axis=2)
        if t < h - 1:
            P = np.asarray(transitions[t], dtype=dt)
            rhos[t + 1] = np.einsum("sx,sxa,sxay->sy", rhos[t], pis[t], P)
    track = (rhos * qs).sum(axis=(0, 2))
    out = Tensor(track.sum(), parents=(pi_all,))

    def backward(g):
        # keep the whole adjoint in the rollout dtype even when the
        # scalar chain above ran in float64
        g = np.asarray(g, dtype=dt)
        gpi = np.empty_like(pis)
        lam = qs[h - 1]
        gpi[h - 1] = rhos[h - 1][:, :, None] * rewards[h - 1]
        for t in range(h - 2, -1, -1):
            P = np.asarray(transitions[t], dtype=dt)
            cont = np.einsum("sxay,sy->sxa", P, lam)
            lam = qs[t] + (pis[t] * cont).sum(axis=2)
            cont += rewards[t]
            gpi[t] = rhos[t][:, :, None] * cont
        pi_all._accum(g * gpi.reshape(h * s * x, a))

    out._backward = backward
    return out, track


def flow_step(rho, pi, P):
    """One mean-field propagation step with a constant transition kernel.

    rho: (S, X) agent distribution, pi: (S, X, A) action laws,
    P: constant ndarray (S, X, A, X). Returns (S, X).
    """
    rho, pi = as_tensor(rho), as_tensor(pi)
    P = np.asarray(P, dtype=rho.data.dtype)
    out = Tensor(np.einsum("sx,sxa,sxay->sy", rho.data, pi.data, P),
                 parents=(rho, pi))

    def backward(g):
        if rho.requires_grad:
            rho._accum(np.einsum("sxa,sxay,sy->sx", pi.data, P, g))
        if pi.requires_grad:
            pi._accum(np.einsum("sx,sxay,sy->sxa", rho.data, P, g))

    out._backward = backward
    return out


def two_state_flow_step(rho, pi, e0, eta):
    """Mean-field step for the two-state kernel, differentiable in rho.

    The kernel mixes a point mass at the chosen action with the
    noise-perturbed population law, which depends on rho itself; both
    dependencies are on the tape.

    rho: (S, 2), pi: (S, 2, 2), e0: constant (S,), eta: scalar.
    """
    rho, pi = as_tensor(rho), as_tensor(pi)
    e0 = np.asarray(e0, dtype=rho.data.dtype)
    r0, r1 = rho.data[:, 0], rho.data[:, 1]
    denom = e0 * r1 + (1.0 - e0) * r0
    safe = denom > 0
    pert = np.where(safe, e0 * r1 / np.where(safe, denom, 1.0), 0.0)
    # degenerate noise convention: e0 = 0 pins mass to state 0, e0 = 1 to state 1
    pert = np.where(e0 <= 0.0, 0.0, np.where(e0 >= 1.0, 1.0, pert))

    m1 = (rho.data * pi.data[:, :, 1]).sum(axis=1)
    mass = (rho.data * pi.data.sum(axis=2)).sum(axis=1)
    next1 = (1.0 - eta) * m1 + eta * pert * mass
    next0 = mass - next1
    out = Tensor(np.stack([next0, next1], axis=1), parents=(rho, pi))

    def backward(g):
        g1c = g[:, 1] - g[:, 0]  # coefficient on next1 (next0 = mass - next1)
        dm1 = (1.0 - eta) * g1c
        dpert = eta * mass * g1c
        dmass = eta * pert * g1c + g[:, 0]
        interior = safe & (e0 > 0.0) & (e0 < 1.0)
        scale = np.where(interior, e0 * (1.0 - e0) / np.where(safe, denom, 1.0) ** 2, 0.0)
        dr1 = dpert * scale * r0
        dr0 = -dpert * scale * r1
        if rho.requires_grad:
            grho = np.empty_like(rho.data)
            grho[:, 0] = dr0 + dmass * pi.data[:, 0].sum(axis=1)
            grho[:, 1] = dr1 + dm1 * pi.data[:, 1, 1] + dmass * pi.data[:, 1].sum(axis=1)
            grho[:, 0] += dm1 * pi.data[:, 0, 1]
            rho._accum(grho)
        if pi.requires_grad:
            gpi = np.empty_like(pi.data)
            gpi[:, :, 0] = dmass[:, None] * rho.data
            gpi[:, :, 1] = (dmass + dm1)[:, None] * rho.data
            pi._accum(gpi)

    out._backward = backward
    return out
