"""Compiled construction and query kernels for WC-INDEX.

All kernels work in *rank space*: vertex ``i`` is the ``i``-th vertex of the
vertex order, so hub ids compare directly as priorities. Labels under
construction live in one growable entry pool; each vertex (per label family)
owns a contiguous block of it. Because sources are processed in rank order and
a source only appends entries for itself, every block is naturally grouped by
ascending hub and, inside a group, by ascending distance.
"""
from __future__ import annotations

import heapq

import numba as nb
import numpy as np

OK = 0
MEM_EXCEEDED = 1

FAM_IN = 0
FAM_OUT = 1


@nb.njit(cache=True)
def _grow(a, need):
    if need <= a.shape[0]:
        return a
    cap = max(need, 2 * a.shape[0])
    b = np.empty(cap, a.dtype)
    b[: a.shape[0]] = a
    return b


@nb.njit(cache=True)
def load_source_table(k, top, lo, hi, hub, dist, qual, tbits, tset, nset, toff, tlen, tmind,
                      src_d, src_q):
    """Expand the source's label block ``[lo, hi)`` into the direct-addressed
    table T.

    Presence of hub ``h`` is bit ``h`` of ``tbits``, a bitmap small enough to
    stay in cache; ``tset[:nset]`` lists the previous source's hubs so only
    their words are cleared. The source itself is injected as hub ``k`` with
    ``(0, top)``. ``tmind[h]`` is the smallest distance to hub ``h`` (its
    group's first entry). Returns ``(largest hub of the block or -1, nset)``.
    """
    for x in range(nset):
        tbits[tset[x] >> 6] = 0
    one = np.uint64(1)
    ns = 0
    pos = 0
    prev = -1
    for e in range(lo, hi):
        h = hub[e]
        if h != prev:
            tbits[h >> 6] |= one << np.uint64(h & 63)
            tset[ns] = h
            ns += 1
            toff[h] = pos
            tlen[h] = 0
            tmind[h] = dist[e]
            prev = h
        src_d[pos] = dist[e]
        src_q[pos] = qual[e]
        tlen[h] += 1
        pos += 1
    tbits[k >> 6] |= one << np.uint64(k & 63)
    tset[ns] = k
    ns += 1
    toff[k] = pos
    tlen[k] = 1
    tmind[k] = 0
    src_d[pos] = 0
    src_q[pos] = top
    return (hub[hi - 1] if hi > lo else -1), ns


@nb.njit(cache=True)
def prune_naive(k, w, d, lo, hi, slo, shi, hub, dist, qual):
    """Entry-by-entry cover test without the source table.

    Walks L(u) = block ``[lo, hi)`` and, for every qualifying entry, pairs it
    with each entry of the source's own block ``[slo, shi)`` carrying the
    same hub. Both blocks are sorted by hub, so the source cursor only moves
    forward. Hub ``k`` stands for the source itself at ``(0, top)``.
    """
    j = slo
    for e in range(lo, hi):
        h = hub[e]
        if h > k or qual[e] < w:
            continue
        de = dist[e]
        if h == k:
            if de <= d:
                return True
            continue
        while j < shi and hub[j] < h:
            j += 1
        i = j
        while i < shi and hub[i] == h:
            if qual[i] >= w and dist[i] + de <= d:
                return True
            i += 1
    return False


@nb.njit(cache=True)
def _first_ge(src_q, lo, hi, w):
    # qualities strictly increase inside a group
    while lo < hi:
        mid = (lo + hi) >> 1
        if src_q[mid] >= w:
            hi = mid
        else:
            lo = mid + 1
    return lo


@nb.njit(cache=True)
def prune_fast(u, w, d, lo, hi, last, smax, hub, dist, qual, tbits, toff, tlen, tmind, src_d,
               src_q, cache_round, cache_q, round_id):
    """Group-wise cover test: per shared hub only the first entry with
    quality >= w on each side matters, found by binary search.

    Hubs absent from the source are rejected by one bit test, and a shared
    group is rejected early when even its closest entries are too far. Past
    the source's largest hub
    ``smax`` only the source itself can match, and it can only be the last
    group (starting at ``last``), so the scan jumps there. Positive answers
    are cached for the rest of the round keyed by ``u``.
    """
    if cache_round[u] == round_id and cache_q[u] >= w:
        return True
    one = np.uint64(1)
    e = lo
    while e < hi:
        h = hub[e]
        if h > smax and e < last:
            e = last
            continue
        if not (tbits[h >> 6] >> np.uint64(h & 63)) & one:
            e += 1
            continue
        nxt = e + 1
        while nxt < hi and hub[nxt] == h:
            nxt += 1
        # first entries carry the smallest distances: a cheap lower bound
        if dist[e] + tmind[h] <= d:
            i = _first_ge(qual, e, nxt, w)
            if i < nxt:
                a = toff[h]
                b = a + tlen[h]
                j = _first_ge(src_q, a, b, w)
                if j < b and src_d[j] + dist[i] <= d:
                    cache_round[u] = round_id
                    cache_q[u] = w
                    return True
        e = nxt
    return False


@nb.njit(cache=True)
def _reserve(hub, dist, qual, par, seq, need):
    if need <= hub.shape[0]:
        return hub, dist, qual, par, seq
    return (_grow(hub, need), _grow(dist, need), _grow(qual, need), _grow(par, need),
            _grow(seq, need))


@nb.njit(cache=True)
def _new_state(n, nfam):
    cap = 8 * n + 16
    hub = np.empty(cap, np.int32)
    dist = np.empty(cap, np.int64)
    qual = np.empty(cap, np.int32)
    par = np.empty(cap, np.int32)
    seq = np.empty(cap, np.int64)
    vstart = np.zeros((nfam, n), np.int64)
    vsize = np.zeros((nfam, n), np.int64)
    vcap = np.zeros((nfam, n), np.int64)
    # offset (within the block) of the last group's first entry
    vlast = np.zeros((nfam, n), np.int64)
    return hub, dist, qual, par, seq, vstart, vsize, vcap, vlast


@nb.njit(cache=True)
def _append(f, u, k, d, w, pu, count, top_used, hub, dist, qual, par, seq, vstart, vsize,
            vcap, vlast):
    """Append ``(k, d, w)`` with parent ``pu`` to block ``(f, u)``, moving the
    block to the pool end with doubled capacity when it is full."""
    if vsize[f, u] == vcap[f, u]:
        nc = max(4, 2 * vcap[f, u])
        hub, dist, qual, par, seq = _reserve(hub, dist, qual, par, seq, top_used + nc)
        old = vstart[f, u]
        for j in range(vsize[f, u]):
            hub[top_used + j] = hub[old + j]
            dist[top_used + j] = dist[old + j]
            qual[top_used + j] = qual[old + j]
            par[top_used + j] = par[old + j]
            seq[top_used + j] = seq[old + j]
        vstart[f, u] = top_used
        vcap[f, u] = nc
        top_used += nc
    base = vstart[f, u]
    at = base + vsize[f, u]
    if vsize[f, u] == 0 or hub[base + vlast[f, u]] != k:
        vlast[f, u] = vsize[f, u]
    hub[at] = k
    dist[at] = d
    qual[at] = w
    par[at] = pu
    seq[at] = count
    vsize[f, u] += 1
    return top_used, hub, dist, qual, par, seq


@nb.njit(cache=True)
def build_pool(n, top, indptr, indices, qrank, rindptr, rindices, rqrank, directed,
               fast, n_sources, max_entries):
    """Constrained BFS from every source in rank order (unit lengths).

    Labels are contiguous blocks ``[vstart, vstart + vsize)`` of the pool,
    per family (``0`` = in / undirected, ``1`` = out). A full block moves to
    the pool end with doubled capacity. ``seq`` holds each entry's global
    append position. ``n_sources < n`` stops early and leaves a partial
    index (used to replay construction states).

    Returns ``(status, count, hub, dist, qual, par, seq, vstart, vsize)``.
    """
    nfam = 2 if directed else 1
    hub, dist, qual, par, seq, vstart, vsize, vcap, vlast = _new_state(n, nfam)
    top_used = 0
    count = 0

    tbits = np.zeros((n >> 6) + 1, np.uint64)
    tset = np.empty(n + 1, np.int32)
    nset = 0
    toff = np.zeros(n, np.int32)
    tlen = np.zeros(n, np.int32)
    tmind = np.zeros(n, np.int64)
    src_d = np.empty(n + 1, np.int64)
    src_q = np.empty(n + 1, np.int32)
    rstamp = np.full(n, -1, np.int64)
    rval = np.zeros(n, np.int32)
    rpar = np.zeros(n, np.int32)
    vstamp = np.full(n, -1, np.int64)
    cache_round = np.full(n, -1, np.int64)
    cache_q = np.zeros(n, np.int32)
    smax = -1
    fv = np.empty(n, np.int32)
    fw = np.empty(n, np.int32)
    fp = np.empty(n, np.int32)
    vec = np.empty(n, np.int32)
    sid = 0
    round_id = 0

    for k in range(n_sources):
        for p in range(nfam):
            # forward pass labels L_in (or L); backward pass labels L_out
            if p == 0:
                ip, ix, iq = indptr, indices, qrank
                tf = FAM_IN
                sf = FAM_OUT if directed else FAM_IN
            else:
                ip, ix, iq = rindptr, rindices, rqrank
                tf = FAM_OUT
                sf = FAM_IN
            slo = vstart[sf, k]
            shi = slo + vsize[sf, k]
            src_d = _grow(src_d, shi - slo + 1)
            src_q = _grow(src_q, shi - slo + 1)
            if fast:
                smax, nset = load_source_table(k, top, slo, shi, hub, dist, qual, tbits, tset,
                                               nset, toff, tlen, tmind, src_d, src_q)
            sid += 1
            rstamp[k] = sid
            rval[k] = top
            nf = 1
            fv[0] = k
            fw[0] = top
            fp[0] = k
            d = 0
            while nf > 0:
                round_id += 1
                nvec = 0
                for i in range(nf):
                    u = fv[i]
                    w = fw[i]
                    if u != k:
                        lo = vstart[tf, u]
                        hi = lo + vsize[tf, u]
                        if fast:
                            covered = prune_fast(u, w, d, lo, hi, lo + vlast[tf, u],
                                                 smax, hub, dist, qual, tbits, toff,
                                                 tlen, tmind, src_d, src_q, cache_round,
                                                 cache_q, round_id)
                        else:
                            slo = vstart[sf, k]
                            covered = prune_naive(k, w, d, lo, hi, slo, slo + vsize[sf, k],
                                                  hub, dist, qual)
                        if covered:
                            continue
                    if count >= max_entries:
                        return (MEM_EXCEEDED, count, hub, dist, qual, par, seq, vstart, vsize)
                    top_used, hub, dist, qual, par, seq = _append(
                        tf, u, k, d, w, fp[i], count, top_used, hub, dist, qual, par, seq,
                        vstart, vsize, vcap, vlast)
                    count += 1
                    for e in range(ip[u], ip[u + 1]):
                        v = ix[e]
                        if v <= k:
                            continue
                        w2 = iq[e] if iq[e] < w else w
                        if rstamp[v] != sid:
                            rstamp[v] = sid
                            rval[v] = -1
                        if w2 <= rval[v]:
                            continue
                        if vstamp[v] != round_id:
                            vstamp[v] = round_id
                            vec[nvec] = v
                            nvec += 1
                        rval[v] = w2
                        rpar[v] = u
                for i in range(nvec):
                    v = vec[i]
                    fv[i] = v
                    fw[i] = rval[v]
                    fp[i] = rpar[v]
                nf = nvec
                d += 1
    return (OK, count, hub, dist, qual, par, seq, vstart, vsize)


@nb.njit(cache=True)
def build_pool_weighted(n, top, indptr, indices, qrank, lens, rindptr, rindices, rqrank,
                        rlens, directed, fast, n_sources, max_entries):
    """Variant for positive integer lengths: candidates leave a heap in
    (distance ascending, quality descending) order instead of BFS rounds.

    A candidate (v, d, w) is dropped when an earlier-popped candidate of v
    already reached quality >= w. The further-pruning cache is keyed by the
    distance value, which plays the role of the round.
    """
    nfam = 2 if directed else 1
    hub, dist, qual, par, seq, vstart, vsize, vcap, vlast = _new_state(n, nfam)
    top_used = 0
    count = 0

    tbits = np.zeros((n >> 6) + 1, np.uint64)
    tset = np.empty(n + 1, np.int32)
    nset = 0
    toff = np.zeros(n, np.int32)
    tlen = np.zeros(n, np.int32)
    tmind = np.zeros(n, np.int64)
    src_d = np.empty(n + 1, np.int64)
    src_q = np.empty(n + 1, np.int32)
    rstamp = np.full(n, -1, np.int64)
    rval = np.zeros(n, np.int32)
    cache_round = np.full(n, -1, np.int64)
    cache_q = np.zeros(n, np.int32)
    smax = -1
    sid = 0
    round_id = 0

    for k in range(n_sources):
        for p in range(nfam):
            if p == 0:
                ip, ix, iq, il = indptr, indices, qrank, lens
                tf = FAM_IN
                sf = FAM_OUT if directed else FAM_IN
            else:
                ip, ix, iq, il = rindptr, rindices, rqrank, rlens
                tf = FAM_OUT
                sf = FAM_IN
            slo = vstart[sf, k]
            shi = slo + vsize[sf, k]
            src_d = _grow(src_d, shi - slo + 1)
            src_q = _grow(src_q, shi - slo + 1)
            if fast:
                smax, nset = load_source_table(k, top, slo, shi, hub, dist, qual, tbits, tset,
                                               nset, toff, tlen, tmind, src_d, src_q)
            sid += 1
            heap = [(np.int64(0), np.int64(-top), np.int64(k), np.int64(k))]
            last_d = np.int64(-1)
            while len(heap) > 0:
                d, negw, u, pu = heapq.heappop(heap)
                w = np.int32(-negw)
                if rstamp[u] == sid and rval[u] >= w:
                    continue
                rstamp[u] = sid
                rval[u] = w
                if d != last_d:
                    round_id += 1
                    last_d = d
                if u != k:
                    lo = vstart[tf, u]
                    hi = lo + vsize[tf, u]
                    if fast:
                        covered = prune_fast(u, w, d, lo, hi, lo + vlast[tf, u], smax,
                                             hub, dist, qual, tbits, toff, tlen, tmind,
                                             src_d, src_q, cache_round, cache_q, round_id)
                    else:
                        slo = vstart[sf, k]
                        covered = prune_naive(k, w, d, lo, hi, slo, slo + vsize[sf, k],
                                              hub, dist, qual)
                    if covered:
                        continue
                if count >= max_entries:
                    return (MEM_EXCEEDED, count, hub, dist, qual, par, seq, vstart, vsize)
                top_used, hub, dist, qual, par, seq = _append(
                    tf, u, k, d, w, np.int32(pu), count, top_used, hub, dist, qual, par, seq,
                    vstart, vsize, vcap, vlast)
                count += 1
                for e in range(ip[u], ip[u + 1]):
                    v = ix[e]
                    if v <= k:
                        continue
                    w2 = iq[e] if iq[e] < w else w
                    if rstamp[v] == sid and w2 <= rval[v]:
                        continue
                    heapq.heappush(heap, (d + il[e], np.int64(-w2), np.int64(v), u))
    return (OK, count, hub, dist, qual, par, seq, vstart, vsize)


@nb.njit(cache=True)
def query_kernel(s, t, w, s_gptr, s_ghub, s_gbeg, s_dist, s_qual,
                 t_gptr, t_ghub, t_gbeg, t_dist, t_qual, inf, trace, cand):
    """Hub merge over two grouped label sets.

    Returns ``(best, touched, ncand, best_hub_group_s, best_hub_group_t)``.
    ``touched`` counts label entries whose quality or distance was read; a
    group whose hub is absent on the other side is skipped without being
    read. With ``trace`` set, each shared hub with qualifying entries on both
    sides is written to ``cand`` as ``(hub, d_s, d_t)``.
    """
    best = inf
    touched = 0
    ncand = 0
    bi = -1
    bj = -1
    i = s_gptr[s]
    ie = s_gptr[s + 1]
    j = t_gptr[t]
    je = t_gptr[t + 1]
    while i < ie and j < je:
        hs = s_ghub[i]
        ht = t_ghub[j]
        if hs < ht:
            i += 1
        elif hs > ht:
            j += 1
        else:
            a = s_gbeg[i]
            ae = s_gbeg[i + 1]
            while a < ae:
                touched += 1
                if s_qual[a] >= w:
                    break
                a += 1
            if a < ae:
                b = t_gbeg[j]
                be = t_gbeg[j + 1]
                while b < be:
                    touched += 1
                    if t_qual[b] >= w:
                        break
                    b += 1
                if b < be:
                    tot = s_dist[a] + t_dist[b]
                    if trace and ncand < cand.shape[0]:
                        cand[ncand, 0] = hs
                        cand[ncand, 1] = s_dist[a]
                        cand[ncand, 2] = t_dist[b]
                        ncand += 1
                    if tot < best:
                        best = tot
                        bi = a
                        bj = b
            i += 1
            j += 1
    return best, touched, ncand, bi, bj


@nb.njit(cache=True)
def query_batch(S, T, W, s_gptr, s_ghub, s_gbeg, s_dist, s_qual,
                t_gptr, t_ghub, t_gbeg, t_dist, t_qual, inf, out, touched, sizes):
    """Answer many queries; also records entries touched and |L(s)|+|L(t)|."""
    cand = np.empty((0, 3), np.int64)
    for q in range(S.shape[0]):
        s = S[q]
        t = T[q]
        best, tc, _, _, _ = query_kernel(s, t, W[q], s_gptr, s_ghub, s_gbeg, s_dist, s_qual,
                                         t_gptr, t_ghub, t_gbeg, t_dist, t_qual, inf,
                                         False, cand)
        out[q] = best
        touched[q] = tc
        sizes[q] = (s_gbeg[s_gptr[s + 1]] - s_gbeg[s_gptr[s]]) + \
                   (t_gbeg[t_gptr[t + 1]] - t_gbeg[t_gptr[t]])
