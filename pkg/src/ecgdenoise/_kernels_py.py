"""Pure numpy implementations of the convolution kernels.

Same contract as the compiled ``_kernels`` module; used when the extension is
not built or ``ECGDENOISE_PURE_PYTHON=1`` is set.  Each tap is one batched
matrix product, so BLAS does the heavy lifting.
"""
import numpy as np


def _pad(x, left, right):
    b, c, n = x.shape
    out = np.zeros((b, c, n + left + right))
    out[:, :, left:left + n] = x
    return out


def conv1d_forward(x, w, b, left):
    n = x.shape[2]
    k = w.shape[2]
    xp = _pad(x, left, k - 1 - left)
    out = np.empty((x.shape[0], w.shape[0], n))
    out[...] = b[None, :, None]
    for tap in range(k):
        out += np.matmul(w[:, :, tap], xp[:, :, tap:tap + n])
    return out


def conv1d_backward_input(dy, w, left):
    n = dy.shape[2]
    k = w.shape[2]
    # dx[m] = sum_k w[k] dy[m + left - k]
    dyp = _pad(dy, k - 1 - left, left)
    dx = np.zeros((dy.shape[0], w.shape[1], n))
    for tap in range(k):
        j = k - 1 - tap
        dx += np.matmul(w[:, :, tap].T, dyp[:, :, j:j + n])
    return dx


def conv1d_backward_weight(dy, x, k, left):
    n = x.shape[2]
    xp = _pad(x, left, k - 1 - left)
    dw = np.empty((dy.shape[1], x.shape[1], k))
    for tap in range(k):
        # sum over batch and samples of dy[b, o, n] * xp[b, c, n + tap]
        dw[:, :, tap] = np.einsum("bon,bcn->oc", dy, xp[:, :, tap:tap + n])
    db = dy.sum(axis=(0, 2))
    return dw, db
