"""Numba-compiled tableau kernels.

Layout shared with the numpy kernels: ``xs`` and ``zs`` are ``(2n, W)``
uint64 arrays (rows ``0..n-1`` destabilizers, ``n..2n-1`` stabilizers) and
``r`` is a ``(2n,)`` uint8 sign vector.  Qubit ``q``
lives in word ``q >> 6`` at bit ``q & 63``.
"""
import numpy as np
from numba import njit

_ONE = np.uint64(1)
_K1 = np.uint64(0x5555555555555555)
_K2 = np.uint64(0x3333333333333333)
_K4 = np.uint64(0x0F0F0F0F0F0F0F0F)
_KH = np.uint64(0x0101010101010101)
_S1 = np.uint64(1)
_S2 = np.uint64(2)
_S4 = np.uint64(4)
_S56 = np.uint64(56)


@njit(cache=True, inline="always")
def _popcount(v):
    v = v - ((v >> _S1) & _K1)
    v = (v & _K2) + ((v >> _S2) & _K2)
    v = (v + (v >> _S4)) & _K4
    return np.int64((v * _KH) >> _S56)


@njit(cache=True, inline="always")
def _mask(q):
    return _ONE << np.uint64(q & 63)


@njit(cache=True)
def rowsum(xs, zs, r, h, i):
    """Row ``h`` <- row ``i`` * row ``h`` with exact phase tracking."""
    plus = 0
    minus = 0
    for w in range(xs.shape[1]):
        x1 = xs[i, w]
        z1 = zs[i, w]
        x2 = xs[h, w]
        z2 = zs[h, w]
        p = (x1 & z1 & ~x2 & z2) | (x1 & ~z1 & x2 & z2) | (~x1 & z1 & x2 & ~z2)
        m = (x1 & z1 & x2 & ~z2) | (x1 & ~z1 & ~x2 & z2) | (~x1 & z1 & x2 & z2)
        plus += _popcount(p)
        minus += _popcount(m)
        xs[h, w] = x2 ^ x1
        zs[h, w] = z2 ^ z1
    tot = (2 * np.int64(r[h]) + 2 * np.int64(r[i]) + plus - minus) % 4
    r[h] = np.uint8((tot >> 1) & 1)


@njit(cache=True)
def _accumulate(sx, sz, sr, xs, zs, r, i):
    """External row (sx, sz, sr) <- row ``i`` * (sx, sz, sr); returns new sign."""
    plus = 0
    minus = 0
    for w in range(xs.shape[1]):
        x1 = xs[i, w]
        z1 = zs[i, w]
        x2 = sx[w]
        z2 = sz[w]
        p = (x1 & z1 & ~x2 & z2) | (x1 & ~z1 & x2 & z2) | (~x1 & z1 & x2 & ~z2)
        m = (x1 & z1 & x2 & ~z2) | (x1 & ~z1 & ~x2 & z2) | (~x1 & z1 & x2 & z2)
        plus += _popcount(p)
        minus += _popcount(m)
        sx[w] = x2 ^ x1
        sz[w] = z2 ^ z1
    tot = (2 * sr + 2 * np.int64(r[i]) + plus - minus) % 4
    return (tot >> 1) & 1


@njit(cache=True)
def gate_h(xs, zs, r, q):
    w = q >> 6
    m = _mask(q)
    for i in range(xs.shape[0]):
        xb = (xs[i, w] & m) != 0
        zb = (zs[i, w] & m) != 0
        if xb and zb:
            r[i] ^= 1
        if xb != zb:
            xs[i, w] ^= m
            zs[i, w] ^= m


@njit(cache=True)
def gate_s(xs, zs, r, q):
    w = q >> 6
    m = _mask(q)
    for i in range(xs.shape[0]):
        xb = (xs[i, w] & m) != 0
        if xb:
            if zs[i, w] & m:
                r[i] ^= 1
            zs[i, w] ^= m


@njit(cache=True)
def gate_pauli(xs, zs, r, q, px, pz):
    """Conjugate by X^px Z^pz (Y when both set); only signs change."""
    w = q >> 6
    m = _mask(q)
    for i in range(xs.shape[0]):
        flip = 0
        if pz and (xs[i, w] & m):
            flip ^= 1
        if px and (zs[i, w] & m):
            flip ^= 1
        if flip:
            r[i] ^= 1


@njit(cache=True)
def gate_cnot(xs, zs, r, c, t):
    wc = c >> 6
    mc = _mask(c)
    wt = t >> 6
    mt = _mask(t)
    for i in range(xs.shape[0]):
        xc = (xs[i, wc] & mc) != 0
        zc = (zs[i, wc] & mc) != 0
        xt = (xs[i, wt] & mt) != 0
        zt = (zs[i, wt] & mt) != 0
        if xc and zt and (xt == zc):
            r[i] ^= 1
        if xc:
            xs[i, wt] ^= mt
        if zt:
            zs[i, wc] ^= mc


@njit(cache=True)
def _clear_row(xs, zs, r, h):
    for w in range(xs.shape[1]):
        xs[h, w] = 0
        zs[h, w] = 0
    r[h] = 0


@njit(cache=True)
def _copy_row(xs, zs, r, dst, src):
    for w in range(xs.shape[1]):
        xs[dst, w] = xs[src, w]
        zs[dst, w] = zs[src, w]
    r[dst] = r[src]


@njit(cache=True)
def measure_z(xs, zs, r, n, a, coin):
    """Z-measure qubit ``a``; ``coin`` is used only if the outcome is random.

    Returns ``(outcome, was_random)``.
    """
    w = a >> 6
    m = _mask(a)
    p = -1
    for i in range(n, 2 * n):
        if xs[i, w] & m:
            p = i
            break
    if p >= 0:
        for i in range(2 * n):
            if i != p and (xs[i, w] & m):
                rowsum(xs, zs, r, i, p)
        _copy_row(xs, zs, r, p - n, p)
        _clear_row(xs, zs, r, p)
        zs[p, w] = m
        r[p] = np.uint8(coin)
        return coin, 1
    sx = np.zeros(xs.shape[1], dtype=np.uint64)
    sz = np.zeros(xs.shape[1], dtype=np.uint64)
    sr = 0
    for i in range(n):
        if xs[i, w] & m:
            sr = _accumulate(sx, sz, sr, xs, zs, r, i + n)
    return sr, 0


@njit(cache=True)
def _anticommutes_obs(xs, zs, i, px, pz):
    acc = np.uint64(0)
    for w in range(xs.shape[1]):
        acc ^= (xs[i, w] & pz[w]) ^ (zs[i, w] & px[w])
    return (_popcount(acc) & 1) == 1


@njit(cache=True)
def remove_qubit(xs, zs, r, n, a):
    """Detach qubit ``a`` whose Z eigenstate is fixed by the stabilizer group.

    Returns the reduced ``(xs, zs, r)`` on ``n - 1`` qubits (qubit ``n-1`` is
    moved into slot ``a``) and the removed qubit's eigenvalue sign bit.
    """
    w = a >> 6
    m = _mask(a)
    # find a stabilizer row equal to +-Z_a
    p = -1
    for i in range(n, 2 * n):
        if (zs[i, w] & m) and not (xs[i, w] & m):
            single = True
            for ww in range(xs.shape[1]):
                if xs[i, ww] != 0:
                    single = False
                    break
                if ww == w:
                    if zs[i, ww] != m:
                        single = False
                        break
                elif zs[i, ww] != 0:
                    single = False
                    break
            if single:
                p = i
                break
    if p < 0:
        i0 = -1
        for i in range(n):
            if xs[i, w] & m:
                if i0 < 0:
                    i0 = i
                else:
                    rowsum(xs, zs, r, i0 + n, i + n)
                    for ww in range(xs.shape[1]):
                        xs[i, ww] ^= xs[i0, ww]
                        zs[i, ww] ^= zs[i0, ww]
        p = i0 + n
    d = p - n
    for i in range(2 * n):
        if i != p and i != d and (zs[i, w] & m):
            rowsum(xs, zs, r, i, p)
    _clear_row(xs, zs, r, d)
    xs[d, w] = m
    sign = np.int64(r[p])
    last = n - 1
    if a != last:
        wl = last >> 6
        ml = _mask(last)
        for i in range(2 * n):
            xa = (xs[i, w] & m) != 0
            xl = (xs[i, wl] & ml) != 0
            if xa != xl:
                xs[i, w] ^= m
                xs[i, wl] ^= ml
            za = (zs[i, w] & m) != 0
            zl = (zs[i, wl] & ml) != 0
            if za != zl:
                zs[i, w] ^= m
                zs[i, wl] ^= ml
    nn = n - 1
    nw = max(1, (nn + 63) >> 6)
    oxs = np.zeros((2 * nn, nw), dtype=np.uint64)
    ozs = np.zeros((2 * nn, nw), dtype=np.uint64)
    orr = np.zeros(2 * nn, dtype=np.uint8)
    k = 0
    for block in range(2):
        skip = d if block == 0 else p
        for i in range(block * n, block * n + n):
            if i == skip:
                continue
            for ww in range(nw):
                oxs[k, ww] = xs[i, ww]
                ozs[k, ww] = zs[i, ww]
            orr[k] = r[i]
            k += 1
    return oxs, ozs, orr, sign


@njit(cache=True)
def peek(xs, zs, r, n, px, pz, ps):
    """Expectation of the signed Pauli (px, pz, (-1)^ps): +1, -1 or 0."""
    for i in range(n, 2 * n):
        if _anticommutes_obs(xs, zs, i, px, pz):
            return 0
    sx = np.zeros(xs.shape[1], dtype=np.uint64)
    sz = np.zeros(xs.shape[1], dtype=np.uint64)
    sr = 0
    for i in range(n):
        if _anticommutes_obs(xs, zs, i, px, pz):
            sr = _accumulate(sx, sz, sr, xs, zs, r, i + n)
    if sr == ps:
        return 1
    return -1


@njit(cache=True)
def measure_pauli(xs, zs, r, n, px, pz, ps, coin):
    """Projectively measure the signed Pauli; returns ``(outcome, was_random)``."""
    p = -1
    for i in range(n, 2 * n):
        if _anticommutes_obs(xs, zs, i, px, pz):
            p = i
            break
    if p < 0:
        v = peek(xs, zs, r, n, px, pz, ps)
        return (0 if v == 1 else 1), 0
    for i in range(2 * n):
        if i != p and _anticommutes_obs(xs, zs, i, px, pz):
            rowsum(xs, zs, r, i, p)
    _copy_row(xs, zs, r, p - n, p)
    for w in range(xs.shape[1]):
        xs[p, w] = px[w]
        zs[p, w] = pz[w]
    r[p] = np.uint8((ps + coin) & 1)
    return coin, 1


@njit(cache=True)
def merge(xs1, zs1, r1, n1, xs2, zs2, r2, n2):
    """Tensor product tableau; qubits of the second state follow the first."""
    n = n1 + n2
    nw = max(1, (n + 63) >> 6)
    xs = np.zeros((2 * n, nw), dtype=np.uint64)
    zs = np.zeros((2 * n, nw), dtype=np.uint64)
    r = np.zeros(2 * n, dtype=np.uint8)
    for half in range(2):
        for i in range(n1):
            src = half * n1 + i
            dst = half * n + i
            for w in range(xs1.shape[1]):
                xs[dst, w] = xs1[src, w]
                zs[dst, w] = zs1[src, w]
            r[dst] = r1[src]
        for i in range(n2):
            src = half * n2 + i
            dst = half * n + n1 + i
            for q in range(n2):
                wq = q >> 6
                mq = _mask(q)
                qq = q + n1
                if xs2[src, wq] & mq:
                    xs[dst, qq >> 6] |= _mask(qq)
                if zs2[src, wq] & mq:
                    zs[dst, qq >> 6] |= _mask(qq)
            r[dst] = r2[src]
    return xs, zs, r
