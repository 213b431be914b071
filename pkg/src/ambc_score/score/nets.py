"""Residual fully-connected networks with hand-written backpropagation.

Row-vector convention throughout: a batch ``x`` has shape ``(B, in_dim)``
and a dense layer computes ``x @ W + b``.
"""

from __future__ import annotations

import numpy as np

from ..numerics import from_real, to_real


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def silu(z):
    return z * _sigmoid(z)


def silu_grad(z):
    sig = _sigmoid(z)
    return sig * (1.0 + z * (1.0 - sig))


class ResMLP:
    """``in -> width`` stem, ``depth - 1`` residual blocks, linear head.

    Each block is ``h <- h + silu(h W_l + b_l)``. Parameters live in an
    ordered dict so they can be flattened for checkpoints and gradient checks.
    """

    def __init__(self, in_dim, out_dim, width, depth, rng=None, zero_head=False):
        if depth < 1:
            raise ValueError(f"depth must be >= 1, got {depth}")
        self.in_dim, self.out_dim = int(in_dim), int(out_dim)
        self.width, self.depth = int(width), int(depth)
        self.params = {}
        for name, shape in self.layout():
            self.params[name] = np.zeros(shape)
        if rng is not None:
            self.init(rng, zero_head=zero_head)

    def layout(self):
        w = self.width
        out = [("stem.W", (self.in_dim, w)), ("stem.b", (w,))]
        for l in range(self.depth - 1):
            out += [(f"block{l}.W", (w, w)), (f"block{l}.b", (w,))]
        out += [("head.W", (w, self.out_dim)), ("head.b", (self.out_dim,))]
        return out

    def init(self, rng, zero_head=False):
        for name, shape in self.layout():
            if name.endswith(".b"):
                self.params[name] = np.zeros(shape)
            else:
                # residual blocks start near identity
                gain = 0.5 if name.startswith("block") else 1.0
                self.params[name] = rng.standard_normal(shape) * (gain / np.sqrt(shape[0]))
        if zero_head:
            self.params["head.W"][:] = 0.0

    def forward(self, x):
        p = self.params
        cache = [x]
        z = x @ p["stem.W"] + p["stem.b"]
        h = silu(z)
        cache.append(z)
        for l in range(self.depth - 1):
            z = h @ p[f"block{l}.W"] + p[f"block{l}.b"]
            cache.append((h, z))
            h = h + silu(z)
        cache.append(h)
        return h @ p["head.W"] + p["head.b"], cache

    def backward(self, cache, dout):
        """Return ``(grads, dx)`` for upstream gradient ``dout``."""
        p = self.params
        x, z0 = cache[0], cache[1]
        h = cache[-1]
        grads = {"head.W": h.T @ dout, "head.b": dout.sum(axis=0)}
        dh = dout @ p["head.W"].T
        for l in reversed(range(self.depth - 1)):
            h_in, z = cache[2 + l]
            dz = dh * silu_grad(z)
            grads[f"block{l}.W"] = h_in.T @ dz
            grads[f"block{l}.b"] = dz.sum(axis=0)
            dh = dh + dz @ p[f"block{l}.W"].T
        dz = dh * silu_grad(z0)
        grads["stem.W"] = x.T @ dz
        grads["stem.b"] = dz.sum(axis=0)
        dx = dz @ p["stem.W"].T
        return grads, dx

    def n_params(self):
        return sum(v.size for v in self.params.values())

    def flat(self):
        return np.concatenate([self.params[n].ravel() for n, _ in self.layout()])

    def set_flat(self, vec):
        vec = np.asarray(vec, dtype=np.float64)
        if vec.size != self.n_params():
            raise ValueError(f"expected {self.n_params()} parameters, got {vec.size}")
        i = 0
        for name, shape in self.layout():
            n = int(np.prod(shape))
            self.params[name] = vec[i : i + n].reshape(shape).copy()
            i += n

    def copy(self):
        new = ResMLP(self.in_dim, self.out_dim, self.width, self.depth)
        new.params = {k: v.copy() for k, v in self.params.items()}
        return new

    def all_finite(self):
        return all(np.all(np.isfinite(v)) for v in self.params.values())


class ScoreModel:
    """Noise-conditional score network for ``M x L`` complex channels.

    With ``c = sqrt(data_scale + sigma^2)`` the network sees ``h_tilde / c``
    (real/imag stacked) and ``log sigma``; a residual MLP plus a linear skip
    from the normalized input produce ``F``, and the score is ``F / c``. A
    CN(0, data_scale I) prior then corresponds to the sigma-independent
    ``F = -h_tilde / c``. Scores use the conjugate-Wirtinger convention, so a
    CN(0, v) density has score ``-h / v``.
    """

    def __init__(self, M, L, width=256, depth=4, data_scale=1.0, rng=None):
        self.M, self.L = int(M), int(L)
        self.data_scale = float(data_scale)
        self.dim = 2 * self.M * self.L
        self.net = ResMLP(self.dim + 1, self.dim, width, depth, rng=rng, zero_head=True)
        self.skip = np.zeros((self.dim, self.dim))

    @property
    def width(self):
        return self.net.width

    @property
    def depth(self):
        return self.net.depth

    @property
    def params(self):
        """Live view: MLP parameters plus ``skip.W``."""
        return _ScoreParams(self)

    def layout(self):
        return self.net.layout() + [("skip.W", (self.dim, self.dim))]

    def n_params(self):
        return self.net.n_params() + self.skip.size

    def flat(self):
        return np.concatenate([self.net.flat(), self.skip.ravel()])

    def set_flat(self, vec):
        vec = np.asarray(vec, dtype=np.float64)
        if vec.size != self.n_params():
            raise ValueError(f"expected {self.n_params()} parameters, got {vec.size}")
        n = self.net.n_params()
        self.net.set_flat(vec[:n])
        self.skip = vec[n:].reshape(self.dim, self.dim).copy()

    def all_finite(self):
        return self.net.all_finite() and bool(np.all(np.isfinite(self.skip)))

    def hyper(self):
        return {"M": self.M, "L": self.L, "width": self.width, "depth": self.depth,
                "data_scale": self.data_scale}

    def copy(self):
        new = ScoreModel.__new__(ScoreModel)
        new.M, new.L, new.data_scale, new.dim = self.M, self.L, self.data_scale, self.dim
        new.net = self.net.copy()
        new.skip = self.skip.copy()
        return new

    def forward_real(self, x, sigma):
        """Real-stacked score for ``x`` of shape ``(B, dim)``; returns ``(score, cache)``."""
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.dim:
            raise ValueError(f"expected input of shape (B, {self.dim}), got {x.shape}")
        sigma = np.broadcast_to(np.asarray(sigma, dtype=np.float64), (x.shape[0],))
        inv_c = 1.0 / np.sqrt(self.data_scale + sigma**2)[:, None]
        xn = x * inv_c
        feats = np.concatenate([xn, np.log(sigma)[:, None]], axis=1)
        out, cache = self.net.forward(feats)
        out = out + xn @ self.skip
        return out * inv_c, (cache, xn, inv_c)

    def backward_real(self, cache, dscore):
        """Parameter gradients and input gradient given ``dL/dscore``."""
        net_cache, xn, inv_c = cache
        dout = dscore * inv_c
        grads, dfeats = self.net.backward(net_cache, dout)
        grads["skip.W"] = xn.T @ dout
        dxn = dfeats[:, :-1] + dout @ self.skip.T
        return grads, dxn * inv_c

    def score(self, h_tilde, sigma):
        """Complex score with the same shape as ``h_tilde`` (leading batch axes allowed)."""
        h_tilde = np.asarray(h_tilde)
        if h_tilde.shape[-2:] != (self.M, self.L):
            raise ValueError(
                f"model expects {self.M}x{self.L} channels, got {h_tilde.shape[-2:]}"
            )
        lead = h_tilde.shape[:-2]
        x = to_real(h_tilde).reshape(-1, self.dim)
        sig = np.asarray(sigma, dtype=np.float64)
        if sig.ndim > 0:
            sig = np.broadcast_to(sig, lead).reshape(-1)
        s, _ = self.forward_real(x, sig)
        return from_real(s, self.M, self.L).reshape(*lead, self.M, self.L)

    __call__ = score


class _ScoreParams(dict):
    """Mapping view so optimizers can update ``skip.W`` alongside the MLP."""

    def __init__(self, model):
        super().__init__(model.net.params)
        self["skip.W"] = model.skip


class DiscModel:
    """Discriminator mapping a real/imag stacked channel to one logit."""

    def __init__(self, M, L, width=128, depth=2, rng=None):
        self.M, self.L = int(M), int(L)
        self.dim = 2 * self.M * self.L
        self.net = ResMLP(self.dim, 1, width, depth, rng=rng)

    @property
    def params(self):
        return self.net.params

    def hyper(self):
        return {"M": self.M, "L": self.L, "width": self.net.width, "depth": self.net.depth}

    def layout(self):
        return self.net.layout()

    def n_params(self):
        return self.net.n_params()

    def flat(self):
        return self.net.flat()

    def set_flat(self, vec):
        self.net.set_flat(vec)

    def all_finite(self):
        return self.net.all_finite()

    def copy(self):
        new = DiscModel.__new__(DiscModel)
        new.M, new.L, new.dim = self.M, self.L, self.dim
        new.net = self.net.copy()
        return new

    def forward_real(self, x):
        out, cache = self.net.forward(np.asarray(x, dtype=np.float64))
        return out[:, 0], cache

    def backward_real(self, cache, dlogit):
        return self.net.backward(cache, dlogit[:, None])

    def __call__(self, h):
        h = np.asarray(h)
        x = to_real(h).reshape(-1, self.dim)
        return self.forward_real(x)[0].reshape(h.shape[:-2])


def analytic_gaussian_score(h_tilde, r_prior, sigma_t):
    """Exact score of CN(0, r_k I) columns convolved with CN(0, sigma_t^2 I)."""
    r = np.asarray(r_prior, dtype=np.float64)
    if np.any(r < 0):
        raise ValueError("prior scales must be >= 0")
    sigma_t = np.asarray(sigma_t, dtype=np.float64)
    if sigma_t.ndim:
        sigma_t = sigma_t.reshape(sigma_t.shape + (1, 1))
    return -np.asarray(h_tilde) / (r + sigma_t**2)


def denoise_empirical_bayes(score_fn, h_tilde, sigma_t):
    """One-step posterior-mean estimate ``h_tilde + sigma_t^2 * score``."""
    sigma_t = np.asarray(sigma_t, dtype=np.float64)
    s = score_fn(h_tilde, sigma_t)
    if sigma_t.ndim:
        sigma_t = sigma_t.reshape(sigma_t.shape + (1, 1))
    return np.asarray(h_tilde) + sigma_t**2 * s
