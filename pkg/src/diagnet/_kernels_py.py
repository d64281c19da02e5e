"""Pure numpy implementations of the numerical kernels.

Same signatures as the compiled ``_kernels`` extension; used when the
extension is not built or when ``DIAGNET_PURE_PYTHON`` is set.
"""
import numpy as np

ZERO_NORM = 1e-12


def cosine_distance_matrix(A, B):
    """Angular cosine distance ``1 - cos`` between every row of A and every row of B.

    Rows with norm below 1e-12 get distance 1 to everything. Output is
    clamped to [0, 2].
    """
    A = np.ascontiguousarray(A, dtype=np.float64)
    B = np.ascontiguousarray(B, dtype=np.float64)
    sa = np.einsum("ij,ij->i", A, A)
    sb = np.einsum("ij,ij->i", B, B)
    dots = np.einsum("id,jd->ij", A, B)
    za = sa < ZERO_NORM * ZERO_NORM
    zb = sb < ZERO_NORM * ZERO_NORM
    # sqrt of the product keeps cos exactly +-1 for parallel rows
    denom = np.sqrt(np.outer(np.where(za, 1.0, sa), np.where(zb, 1.0, sb)))
    out = 1.0 - dots / denom
    np.clip(out, 0.0, 2.0, out=out)
    out[za, :] = 1.0
    out[:, zb] = 1.0
    return out


def euclidean_distance_matrix(A, B):
    A = np.ascontiguousarray(A, dtype=np.float64)
    B = np.ascontiguousarray(B, dtype=np.float64)
    diff = A[:, None, :] - B[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def knn_select(dist, allowed, k):
    """Per row, the ``k`` allowed columns with smallest distance.

    Ties go to the lower column index. Rows with fewer than ``k`` allowed
    columns are padded with -1.
    """
    dist = np.asarray(dist, dtype=np.float64)
    allowed = np.asarray(allowed, dtype=bool)
    n, m = dist.shape
    out = np.full((n, k), -1, dtype=np.int64)
    if k == 0 or m == 0:
        return out
    masked = np.where(allowed, dist, np.inf)
    order = np.argsort(masked, axis=1, kind="stable")[:, :k]
    take = np.take_along_axis(allowed, order, axis=1)
    out[:, : order.shape[1]] = np.where(take, order, -1)
    return out


def signed_graph_loss(H, src, dst, phi, margin):
    """Raw edge sum of the signed graph regularizer and its gradient w.r.t. H.

    ``phi > 0`` edges contribute the angular distance between endpoint
    embeddings; ``phi < 0`` edges contribute ``max(0, margin - dist)``.
    """
    H = np.asarray(H, dtype=np.float64)
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    phi = np.asarray(phi)
    grad = np.zeros_like(H)
    if src.size == 0:
        return 0.0, grad
    sq = np.einsum("ij,ij->i", H, H)
    norms = np.sqrt(sq)
    a, b = H[src], H[dst]
    na, nb = norms[src], norms[dst]
    degenerate = (na < ZERO_NORM) | (nb < ZERO_NORM)
    na_s = np.where(degenerate, 1.0, na)
    nb_s = np.where(degenerate, 1.0, nb)
    cos = np.einsum("ij,ij->i", a, b) / np.sqrt(np.where(degenerate, 1.0, sq[src] * sq[dst]))
    d = np.clip(1.0 - cos, 0.0, 2.0)
    d[degenerate] = 1.0

    positive = phi > 0
    active = ~positive & (margin - d > 0.0)
    values = np.where(positive, d, np.where(active, margin - d, 0.0))

    # d(dist)/da = -(b_hat - cos * a_hat) / |a|
    ahat = a / na_s[:, None]
    bhat = b / nb_s[:, None]
    gda = -(bhat - cos[:, None] * ahat) / na_s[:, None]
    gdb = -(ahat - cos[:, None] * bhat) / nb_s[:, None]
    coef = np.where(positive, 1.0, np.where(active, -1.0, 0.0))
    coef[degenerate] = 0.0
    np.add.at(grad, src, coef[:, None] * gda)
    np.add.at(grad, dst, coef[:, None] * gdb)
    return float(values.sum()), grad


def pegasos_train(X, y, lam, order):
    """Pegasos primal subgradient descent, one sample per step.

    ``order`` lists the sample index used at each step ``t = 1..len(order)``
    with step size ``1 / (lam * t)``. Returns the final weight vector.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    w = np.zeros(X.shape[1])
    for t, i in enumerate(order, start=1):
        eta = 1.0 / (lam * t)
        margin = y[i] * float(np.dot(w, X[i]))
        w *= 1.0 - eta * lam
        if margin < 1.0:
            w += (eta * y[i]) * X[i]
    return w
