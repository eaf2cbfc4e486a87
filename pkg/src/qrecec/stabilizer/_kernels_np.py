"""Pure-numpy tableau kernels (fallback when numba is disabled).

Same array layout and signatures as :mod:`qrecec.stabilizer._kernels_nb`;
loops run over rows with numpy word operations instead of compiled code.
"""
import numpy as np

_ONE = np.uint64(1)


def _mask(q):
    return _ONE << np.uint64(q & 63)


def _phase_sum(x1, z1, x2, z2):
    """Sum of i-exponents for (x1,z1) * (x2,z2), reduced over the last axis."""
    p = (x1 & z1 & ~x2 & z2) | (x1 & ~z1 & x2 & z2) | (~x1 & z1 & x2 & ~z2)
    m = (x1 & z1 & x2 & ~z2) | (x1 & ~z1 & ~x2 & z2) | (~x1 & z1 & x2 & z2)
    return (np.bitwise_count(p).astype(np.int64).sum(axis=-1)
            - np.bitwise_count(m).astype(np.int64).sum(axis=-1))


def _rowsum_many(xs, zs, r, hs, i):
    """Rows ``hs`` <- row ``i`` * row ``h`` for every ``h`` in ``hs``."""
    if len(hs) == 0:
        return
    x1 = xs[i]
    z1 = zs[i]
    g = _phase_sum(x1, z1, xs[hs], zs[hs])
    tot = (2 * r[hs].astype(np.int64) + 2 * int(r[i]) + g) % 4
    r[hs] = ((tot >> 1) & 1).astype(np.uint8)
    xs[hs] ^= x1
    zs[hs] ^= z1


def rowsum(xs, zs, r, h, i):
    _rowsum_many(xs, zs, r, np.array([h]), i)


def _accumulate(sx, sz, sr, xs, zs, r, i):
    g = int(_phase_sum(xs[i], zs[i], sx, sz))
    sx ^= xs[i]
    sz ^= zs[i]
    return ((2 * sr + 2 * int(r[i]) + g) % 4 >> 1) & 1


def gate_h(xs, zs, r, q):
    w = q >> 6
    m = _mask(q)
    xb = (xs[:, w] & m) != 0
    zb = (zs[:, w] & m) != 0
    r ^= (xb & zb).astype(np.uint8)
    flip = xb ^ zb
    xs[flip, w] ^= m
    zs[flip, w] ^= m


def gate_s(xs, zs, r, q):
    w = q >> 6
    m = _mask(q)
    xb = (xs[:, w] & m) != 0
    zb = (zs[:, w] & m) != 0
    r ^= (xb & zb).astype(np.uint8)
    zs[xb, w] ^= m


def gate_pauli(xs, zs, r, q, px, pz):
    w = q >> 6
    m = _mask(q)
    flip = np.zeros(xs.shape[0], dtype=bool)
    if pz:
        flip ^= (xs[:, w] & m) != 0
    if px:
        flip ^= (zs[:, w] & m) != 0
    r ^= flip.astype(np.uint8)


def gate_cnot(xs, zs, r, c, t):
    wc, mc = c >> 6, _mask(c)
    wt, mt = t >> 6, _mask(t)
    xc = (xs[:, wc] & mc) != 0
    zc = (zs[:, wc] & mc) != 0
    xt = (xs[:, wt] & mt) != 0
    zt = (zs[:, wt] & mt) != 0
    r ^= (xc & zt & (xt == zc)).astype(np.uint8)
    xs[xc, wt] ^= mt
    zs[zt, wc] ^= mc


def measure_z(xs, zs, r, n, a, coin):
    w = a >> 6
    m = _mask(a)
    hits = np.flatnonzero(xs[n:, w] & m)
    if hits.size:
        p = n + int(hits[0])
        rows = np.flatnonzero(xs[:, w] & m)
        _rowsum_many(xs, zs, r, rows[rows != p], p)
        xs[p - n] = xs[p]
        zs[p - n] = zs[p]
        r[p - n] = r[p]
        xs[p] = 0
        zs[p] = 0
        zs[p, w] = m
        r[p] = coin
        return coin, 1
    sx = np.zeros(xs.shape[1], dtype=np.uint64)
    sz = np.zeros(xs.shape[1], dtype=np.uint64)
    sr = 0
    for i in np.flatnonzero(xs[:n, w] & m):
        sr = _accumulate(sx, sz, sr, xs, zs, r, int(i) + n)
    return sr, 0


def _anticommuting(xs, zs, lo, hi, px, pz):
    acc = (xs[lo:hi] & pz) ^ (zs[lo:hi] & px)
    return (np.bitwise_count(acc).astype(np.int64).sum(axis=1) & 1).astype(bool)


def remove_qubit(xs, zs, r, n, a):
    w = a >> 6
    m = _mask(a)
    target_z = np.zeros(xs.shape[1], dtype=np.uint64)
    target_z[w] = m
    stab_x = xs[n:]
    stab_z = zs[n:]
    single = np.flatnonzero(~stab_x.any(axis=1) & (stab_z == target_z).all(axis=1))
    if single.size:
        p = n + int(single[0])
    else:
        members = np.flatnonzero(xs[:n, w] & m)
        i0 = int(members[0])
        for i in members[1:]:
            rowsum(xs, zs, r, i0 + n, int(i) + n)
            xs[i] ^= xs[i0]
            zs[i] ^= zs[i0]
        p = i0 + n
    d = p - n
    rows = np.flatnonzero(zs[:, w] & m)
    rows = rows[(rows != p) & (rows != d)]
    _rowsum_many(xs, zs, r, rows, p)
    xs[d] = 0
    zs[d] = 0
    r[d] = 0
    xs[d, w] = m
    sign = int(r[p])
    last = n - 1
    if a != last:
        wl, ml = last >> 6, _mask(last)
        for arr in (xs, zs):
            ba = (arr[:, w] & m) != 0
            bl = (arr[:, wl] & ml) != 0
            diff = ba != bl
            arr[diff, w] ^= m
            arr[diff, wl] ^= ml
    nn = n - 1
    nw = max(1, (nn + 63) >> 6)
    keep = np.ones(2 * n, dtype=bool)
    keep[d] = False
    keep[p] = False
    return (np.ascontiguousarray(xs[keep, :nw]), np.ascontiguousarray(zs[keep, :nw]),
            r[keep].copy(), sign)


def peek(xs, zs, r, n, px, pz, ps):
    if _anticommuting(xs, zs, n, 2 * n, px, pz).any():
        return 0
    sx = np.zeros(xs.shape[1], dtype=np.uint64)
    sz = np.zeros(xs.shape[1], dtype=np.uint64)
    sr = 0
    for i in np.flatnonzero(_anticommuting(xs, zs, 0, n, px, pz)):
        sr = _accumulate(sx, sz, sr, xs, zs, r, int(i) + n)
    return 1 if sr == ps else -1


def measure_pauli(xs, zs, r, n, px, pz, ps, coin):
    hits = np.flatnonzero(_anticommuting(xs, zs, n, 2 * n, px, pz))
    if hits.size == 0:
        v = peek(xs, zs, r, n, px, pz, ps)
        return (0 if v == 1 else 1), 0
    p = n + int(hits[0])
    rows = np.flatnonzero(_anticommuting(xs, zs, 0, 2 * n, px, pz))
    _rowsum_many(xs, zs, r, rows[rows != p], p)
    xs[p - n] = xs[p]
    zs[p - n] = zs[p]
    r[p - n] = r[p]
    xs[p] = px
    zs[p] = pz
    r[p] = (ps + coin) & 1
    return coin, 1


def _unpack(arr, n):
    bits = np.unpackbits(arr.view(np.uint8), axis=1, bitorder="little")
    return bits[:, :n]


def _pack(bits, nw):
    padded = np.zeros((bits.shape[0], nw * 64), dtype=np.uint8)
    padded[:, :bits.shape[1]] = bits
    return np.packbits(padded, axis=1, bitorder="little").view(np.uint64).copy()


def merge(xs1, zs1, r1, n1, xs2, zs2, r2, n2):
    n = n1 + n2
    nw = max(1, (n + 63) >> 6)
    out = []
    for a1, a2 in ((xs1, xs2), (zs1, zs2)):
        b1 = _unpack(a1, n1)
        b2 = _unpack(a2, n2)
        full = np.zeros((2 * n, n), dtype=np.uint8)
        full[:n1, :n1] = b1[:n1]
        full[n1:n, n1:] = b2[:n2]
        full[n:n + n1, :n1] = b1[n1:]
        full[n + n1:, n1:] = b2[n2:]
        out.append(_pack(full, nw))
    r = np.concatenate([r1[:n1], r2[:n2], r1[n1:], r2[n2:]]).astype(np.uint8)
    return out[0], out[1], r
