"""Independent reference implementations used as test oracles.

Nothing here calls into the package's algorithms; only its data types are
read. They are written for clarity, not speed.
"""

from __future__ import annotations

import math

import numpy as np

C = 299_792_458.0


def dist(a, b):
    return math.sqrt(sum((x - y) ** 2 for x, y in zip(a, b)))


def epochs_of(meters, epoch_s):
    return int(meters // (C * epoch_s))


def _pos(s, ident):
    for obj in list(s.platforms) + list(s.emitters):
        if obj.id == ident:
            return obj.position
    raise KeyError(ident)


def _tasks(s):
    return {t.id: t for t in s.tasks}


def cell_sets(sched):
    """(platform, epoch) -> list of activity class names."""
    out = {}
    for p, e, a in sched.entries:
        out.setdefault((p, e), []).append(a)
    return out


def brute_is_valid(s, sched) -> bool:
    """Re-derives the pairing and aperture rules directly from geometry."""
    E = s.num_epochs
    cells = cell_sets(sched)
    if any(len(v) > 1 for v in cells.values()):
        return False
    tasks = _tasks(s)
    by = {(p, e): acts[0] for (p, e), acts in cells.items()}
    for (p, e), a in by.items():
        if not 0 <= e < E:
            return False
        kind = type(a).__name__
        t = tasks.get(a.task)
        if t is None:
            return False
        tk = type(t).__name__
        if kind in ("TxComm", "RxComm"):
            if tk != "CommLink":
                return False
            d = epochs_of(dist(_pos(s, t.src), _pos(s, t.dst)), s.epoch_duration)
            if kind == "TxComm":
                if p != t.src or a.peer != t.dst:
                    return False
                mate = by.get((t.dst, e + d))
                if type(mate).__name__ != "RxComm" or mate.task != t.id:
                    return False
            else:
                if p != t.dst or a.peer != t.src:
                    return False
                mate = by.get((t.src, e - d))
                if type(mate).__name__ != "TxComm" or mate.task != t.id:
                    return False
        elif kind == "TxRadar":
            if tk != "RadarTrack" or p != t.illuminator:
                return False
        elif kind == "RxRadarEcho":
            if tk != "RadarTrack" or p not in t.receivers or a.illuminator != t.illuminator:
                return False
            path = dist(_pos(s, t.illuminator), _pos(s, t.target)) + dist(_pos(s, t.target), _pos(s, p))
            if a.tx_epoch != e - epochs_of(path, s.epoch_duration):
                return False
            mate = by.get((t.illuminator, a.tx_epoch))
            if type(mate).__name__ != "TxRadar" or mate.task != t.id:
                return False
        elif kind == "TxJam":
            if tk != "JamTask" or p not in t.candidate_jammers or a.victim != t.victim:
                return False
        elif kind == "RxIntercept":
            if tk != "PassiveIntercept" or p != t.listener or a.source != t.source:
                return False
    return True


def brute_utility(s, sched) -> float:
    by = {(p, e): a for p, e, a in sched.entries}
    total = 0.0
    for t in s.tasks:
        tk = type(t).__name__
        mine = [(p, e, a) for (p, e), a in by.items() if a.task == t.id]
        if tk == "CommLink":
            d = epochs_of(dist(_pos(s, t.src), _pos(s, t.dst)), s.epoch_duration)
            pairs = sum(
                1 for p, e, a in mine
                if type(a).__name__ == "TxComm" and type(by.get((t.dst, e + d))).__name__ == "RxComm"
            )
            sat = min(pairs, t.payload_epochs) / t.payload_epochs
        elif tk == "RadarTrack":
            done = 0
            for p, e, a in mine:
                if type(a).__name__ != "TxRadar":
                    continue
                ok = all(
                    any(type(b).__name__ == "RxRadarEcho" and q == r and b.tx_epoch == e for q, _, b in mine)
                    for r in t.receivers
                )
                done += ok
            sat = min(done, t.dwells) / t.dwells
        elif tk == "JamTask":
            covered = 0
            for e in t.cover_epochs:
                n = sum(1 for p, f, a in mine if f == e and type(a).__name__ == "TxJam")
                covered += n >= t.jammers_per_epoch
            sat = covered / len(t.cover_epochs)
        else:
            active = set(next(x for x in s.emitters if x.id == t.source).active_epochs)
            hits = len({e for _, e, a in mine if e in active})
            sat = min(hits, t.dwells) / t.dwells
        total += t.priority * sat
    return total


def fixed_point_informed(s, sched, orchestrator):
    """Earliest informed epoch per platform by relaxation to a fixed point."""
    by = {}
    for p, e, a in sched.entries:
        by[(p, e)] = a
    pairs = []
    for (p, e), a in by.items():
        if type(a).__name__ != "TxComm":
            continue
        t = _tasks(s)[a.task]
        d = epochs_of(dist(_pos(s, t.src), _pos(s, t.dst)), s.epoch_duration)
        b = by.get((t.dst, e + d))
        if type(b).__name__ == "RxComm" and b.task == t.id:
            pairs.append((p, t.dst, e, e + d))
    inf = math.inf
    best = {p.id: inf for p in s.platforms}
    best[orchestrator] = -1
    changed = True
    while changed:
        changed = False
        for src, dst, tx, rx in pairs:
            if best[src] < tx and rx < best[dst]:
                best[dst] = rx
                changed = True
    return {p: (None if v == inf else int(v)) for p, v in best.items()}


# ---------------------------------------------------------------- signal oracles


def dft_matrix(n):
    k = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(k, k) / n)


def naive_ofdm(bits, n_sub, cp, bins, modulation="qpsk"):
    """Per-symbol explicit inverse-DFT sum, unnormalized."""
    bits = list(bits)
    per = (2 if modulation == "qpsk" else 1) * len(bins)
    out = []
    for s0 in range(0, len(bits), per):
        chunk = bits[s0:s0 + per]
        X = np.zeros(n_sub, dtype=complex)
        for j, b in enumerate(bins):
            if modulation == "qpsk":
                b0, b1 = chunk[2 * j], chunk[2 * j + 1]
                X[b] = ((1 - 2 * b0) + 1j * (1 - 2 * b1)) / math.sqrt(2)
            else:
                X[b] = 1 - 2 * chunk[j]
        t = np.array([sum(X[k] * np.exp(2j * np.pi * k * m / n_sub) for k in range(n_sub)) / n_sub
                      for m in range(n_sub)])
        out.extend(list(t[n_sub - cp:]) + list(t) if cp else list(t))
    return np.array(out)


def naive_xcorr(signal, ref):
    sig = np.asarray(signal)
    r = np.asarray(ref)
    L = r.size
    rn = math.sqrt(float(np.sum(np.abs(r) ** 2)))
    vals = []
    for lag in range(sig.size - L + 1):
        seg = sig[lag:lag + L]
        en = math.sqrt(float(np.sum(np.abs(seg) ** 2)))
        vals.append(abs(np.sum(seg * np.conj(r))) / (rn * en) if en > 0 else 0.0)
    return np.array(vals)


def brute_autocorr(x):
    x = np.asarray(x)
    n = x.size
    vals = []
    for k in range(-(n - 1), n):
        a, b = (x[:n - k], x[k:]) if k >= 0 else (x[-k:], x[:n + k])
        vals.append(abs(np.vdot(a, b)))
    return np.array(vals)


def q(x):
    return 0.5 * math.erfc(x / math.sqrt(2))


def qpsk_ber(es_n0):
    return q(math.sqrt(es_n0))
