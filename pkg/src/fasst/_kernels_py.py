"""Pure-Python/NumPy fallback for the hot kernels.

Mirrors fasst._kernels (the Cython extension) operation for operation so the
two backends produce identical results. Keep the arithmetic order in sync
with _kernels.pyx when editing.
"""

import math


def svd2x2_angles(a00, a01, a10, a11, ordered=True):
    """Closed-form 2x2 SVD restricted to proper rotations.

    Returns (alpha, beta, d0, d1) such that R(-alpha) @ A @ R(beta) equals
    diag(d0, d1), where R(t) = [[cos t, sin t], [-sin t, cos t]].

    ordered=True (the public svd_2x2 contract): d0 >= |d1| and d0 >= 0;
    (d0, |d1|) are the singular values and d1 carries the sign of det(A),
    which rotations (determinant +1) cannot flip.

    ordered=False: minimal inner rotation (|beta| <= pi/4, no reordering or
    sign fix). This is what the Kogbetliantz sweep needs to settle; large
    fix-up angles would keep permuting the diagonal between sweeps.
    """
    # rotate A into a symmetric matrix: S = R(phi) @ A
    phi = math.atan2(a10 - a01, a00 + a11)
    c = math.cos(phi)
    s = math.sin(phi)
    s00 = c * a00 + s * a10
    s01 = c * a01 + s * a11
    s10 = -s * a00 + c * a10
    s11 = -s * a01 + c * a11
    r = 0.5 * (s01 + s10)
    # Jacobi angle zeroing the off-diagonal of the symmetric part
    psi = 0.5 * math.atan2(-2.0 * r, s00 - s11)
    if not ordered:
        # same tangent, folded into [-pi/4, pi/4]
        if psi > 0.25 * math.pi:
            psi -= 0.5 * math.pi
        elif psi < -0.25 * math.pi:
            psi += 0.5 * math.pi
    cp = math.cos(psi)
    sp = math.sin(psi)
    # D = R(-psi) @ S @ R(psi)
    d0 = cp * (s00 * cp - s01 * sp) - sp * (s10 * cp - s11 * sp)
    d1 = sp * (s00 * sp + s01 * cp) + cp * (s10 * sp + s11 * cp)
    alpha = psi - phi
    beta = psi
    if ordered:
        if abs(d1) > abs(d0):
            d0, d1 = d1, d0
            alpha += 0.5 * math.pi
            beta += 0.5 * math.pi
        if d0 < 0.0:
            d0 = -d0
            d1 = -d1
            alpha += math.pi
    return alpha, beta, d0, d1


def rotate_pairs(mat, pp, qq, angles, reverse=False):
    """Apply a sequence of coordinate-pair rotations to the rows of mat, in place.

    Step j combines rows p=pp[j], q=qq[j] as
        row_p <- cos(t)*row_p + sin(t)*row_q
        row_q <- -sin(t)*row_p + cos(t)*row_q
    i.e. left-multiplication by the two-coordinate rotation with angle
    t = angles[j]. reverse=True walks the sequence last to first.
    """
    order = range(len(angles) - 1, -1, -1) if reverse else range(len(angles))
    for j in order:
        p = pp[j]
        q = qq[j]
        c = math.cos(angles[j])
        s = math.sin(angles[j])
        rp = c * mat[p] + s * mat[q]
        rq = -s * mat[p] + c * mat[q]
        mat[p] = rp
        mat[q] = rq


def kogbetliantz_sweep(A, U, V):
    """One cyclic-by-rows two-sided Jacobi (Kogbetliantz) sweep, in place.

    For each pair p < q the 2x2 subproblem is solved exactly, zeroing
    A[p, q] and A[q, p]; U and V accumulate the rotations so that
    U @ A @ V.T stays invariant.
    """
    n = A.shape[0]
    for p in range(n - 1):
        for q in range(p + 1, n):
            alpha, beta, _, _ = svd2x2_angles(A[p, p], A[p, q], A[q, p], A[q, q],
                                              ordered=False)
            ca = math.cos(alpha)
            sa = math.sin(alpha)
            cb = math.cos(beta)
            sb = math.sin(beta)
            # A <- R(-alpha) A (rows), then A <- A R(beta) (columns)
            rp = ca * A[p] - sa * A[q]
            rq = sa * A[p] + ca * A[q]
            A[p] = rp
            A[q] = rq
            cp = cb * A[:, p] - sb * A[:, q]
            cq = sb * A[:, p] + cb * A[:, q]
            A[:, p] = cp
            A[:, q] = cq
            # U <- U R(alpha), V <- V R(beta)
            up = ca * U[:, p] - sa * U[:, q]
            uq = sa * U[:, p] + ca * U[:, q]
            U[:, p] = up
            U[:, q] = uq
            vp = cb * V[:, p] - sb * V[:, q]
            vq = sb * V[:, p] + cb * V[:, q]
            V[:, p] = vp
            V[:, q] = vq
