"""Separate-and-conquer rule learner in the style of RIPPER.

Classes are handled rarest first. For each class, rules are grown on a
random 2/3 of the remaining data by FOIL gain and pruned on the other 1/3 by
reduced error (the ``(p - n) / (p + n)`` metric). The most frequent class is
the default. All coverage counts are sums of instance weights. The global
optimisation passes of full RIPPER are not performed.
"""

from __future__ import annotations

import math

import numpy as np

from ..data import round_half_up
from .base import Model, normalize_rows, positive_part
from .preprocess import Preprocessor

LE, GT, EQ = "<=", ">", "=="


def covers(conditions, Z) -> np.ndarray:
    mask = np.ones(Z.shape[0], dtype=bool)
    for attr, op, value in conditions:
        col = Z[:, attr]
        if op == EQ:
            mask &= col == value
        elif op == LE:
            mask &= col <= value
        else:
            mask &= col > value
    return mask


def _foil_gain(p1, n1, base):
    with np.errstate(divide="ignore", invalid="ignore"):
        g = p1 * (np.log2(p1 / (p1 + n1)) - base)
    return np.where(p1 > 0, g, -np.inf)


def _best_condition(Z, nominal, n_values, covered, pos, w):
    wp = np.where(pos, w, 0.0)[covered]
    wn = np.where(pos, 0.0, w)[covered]
    p0, n0 = wp.sum(), wn.sum()
    base = math.log2(p0 / (p0 + n0))
    best, best_gain = None, 0.0
    Zc = Z[covered]
    for attr in range(Z.shape[1]):
        col = Zc[:, attr]
        if nominal[attr]:
            V = int(n_values[attr])
            vals = col.astype(np.int64)
            p1 = np.bincount(vals, weights=wp, minlength=V)
            n1 = np.bincount(vals, weights=wn, minlength=V)
            gains = _foil_gain(p1, n1, base)
            v = int(np.argmax(gains))
            if gains[v] > best_gain + 1e-12:
                best_gain, best = float(gains[v]), (attr, EQ, float(v))
            continue
        order = np.argsort(col, kind="stable")
        s = col[order]
        if s.size < 2:
            continue
        cp = np.cumsum(wp[order])[:-1]
        cn = np.cumsum(wn[order])[:-1]
        ok = s[:-1] < s[1:]
        if not ok.any():
            continue
        thresholds = (s[:-1] + s[1:]) / 2.0
        thresholds = np.where(thresholds < s[1:], thresholds, s[:-1])
        for op, p1, n1 in ((LE, cp, cn), (GT, p0 - cp, n0 - cn)):
            gains = np.where(ok, _foil_gain(p1, n1, base), -np.inf)
            i = int(np.argmax(gains))
            if gains[i] > best_gain + 1e-12:
                best_gain, best = float(gains[i]), (attr, op, float(thresholds[i]))
    return best


def grow_rule(Z, nominal, n_values, pos, w, max_conditions):
    """Add FOIL-gain-maximising conditions until no negatives remain covered."""
    conditions = []
    covered = np.ones(Z.shape[0], dtype=bool)
    while len(conditions) < max_conditions:
        if not np.any(covered & ~pos & (w > 0)):
            break
        cond = _best_condition(Z, nominal, n_values, covered, pos, w)
        if cond is None:
            break
        conditions.append(cond)
        covered &= covers([cond], Z)
    return conditions


def _value(conditions, Z, pos, w):
    cov = covers(conditions, Z)
    p = float(w[cov & pos].sum())
    n = float(w[cov & ~pos].sum())
    return p, n


def prune_rule(conditions, Z, pos, w):
    """Keep the prefix of ``conditions`` maximising ``(p - n) / (p + n)`` on the prune set."""
    if Z.shape[0] == 0 or w.sum() <= 0:
        return conditions
    best_len, best_v = len(conditions), -math.inf
    for L in range(1, len(conditions) + 1):
        p, n = _value(conditions[:L], Z, pos, w)
        if p + n <= 0:
            continue
        v = (p - n) / (p + n)
        if v > best_v + 1e-12:
            best_v, best_len = v, L
    return conditions[:best_len]


def _split(rng, idx, fraction):
    idx = idx[rng.permutation(idx.size)]
    n_grow = round_half_up(fraction * idx.size) if idx.size else 0
    if idx.size and n_grow == 0:
        n_grow = 1
    return idx[:n_grow], idx[n_grow:]


class RipperModel(Model):
    kind = "ripper"

    def __init__(self, spec, schema, fingerprint, prep, rules, default_dist):
        super().__init__(spec, schema, fingerprint)
        self.prep = prep
        self.rules = rules  # list of (conditions, consequent, coverage_dist)
        self.default_dist = default_dist

    @classmethod
    def fit(cls, spec, d, w):
        hp = spec.hyper
        X, y, wk = positive_part(d, w)
        prep = Preprocessor.fit(d.schema, X)
        Z = prep.impute(X)
        Y = d.n_classes
        rng = np.random.default_rng(spec.seed)
        freq = np.bincount(y, weights=wk, minlength=Y)
        present = [c for c in range(Y) if freq[c] > 0]
        order = sorted(present, key=lambda c: (freq[c], -c))
        remaining = np.ones(len(y), dtype=bool)
        raw_rules = []
        for c in order[:-1]:
            while len(raw_rules) < hp["max_rules"]:
                is_pos = y == c
                pos_idx = np.flatnonzero(remaining & is_pos)
                if wk[pos_idx].sum() <= 0:
                    break
                neg_idx = np.flatnonzero(remaining & ~is_pos)
                gp, pp = _split(rng, pos_idx, hp["grow_fraction"])
                gn, pn = _split(rng, neg_idx, hp["grow_fraction"])
                grow = np.concatenate([gp, gn])
                prune_set = np.concatenate([pp, pn])
                conds = grow_rule(Z[grow], prep.nominal, prep.n_values, is_pos[grow], wk[grow],
                                  hp["max_conditions"])
                if not conds:
                    break
                conds = prune_rule(conds, Z[prune_set], is_pos[prune_set], wk[prune_set])
                p, n = _value(conds, Z[prune_set], is_pos[prune_set], wk[prune_set])
                if p + n <= 0:
                    p, n = _value(conds, Z[grow], is_pos[grow], wk[grow])
                if p + n <= 0 or n / (p + n) >= 0.5:
                    break
                cov = covers(conds, Z) & remaining
                if not np.any(cov & is_pos):
                    break
                raw_rules.append((conds, c))
                remaining &= ~cov
        rules = []
        for conds, c in raw_rules:
            cov = covers(conds, Z)
            dist = np.bincount(y[cov], weights=wk[cov], minlength=Y)
            if dist.sum() > 0 and int(np.argmax(dist)) == c:
                rules.append((conds, c, dist))
        return cls(spec, d.schema, d.fingerprint(), prep, rules, freq)

    def coverage(self, X) -> np.ndarray:
        """Weighted class distribution of the rule each row fires (default last)."""
        Z = self.prep.impute(self._check_X(X))
        return self._coverage(Z)

    def _coverage(self, Z):
        out = np.tile(self.default_dist, (Z.shape[0], 1))
        done = np.zeros(Z.shape[0], dtype=bool)
        for conds, _, dist in self.rules:
            hit = covers(conds, Z) & ~done
            out[hit] = dist
            done |= hit
        return out

    def _scores(self, X):
        return normalize_rows(self._coverage(self.prep.impute(X)))

    def describe(self) -> str:
        names = [a.name for a in self.schema.attributes]
        lines = []
        for conds, c, dist in self.rules:
            body = " and ".join(
                f"{names[a]} = {self.schema.attributes[a].values[int(v)]}" if op == EQ
                else f"{names[a]} {op} {v:g}"
                for a, op, v in conds
            )
            lines.append(f"if {body} then {self.schema.class_names[c]}  {dist.round(3).tolist()}")
        lines.append(f"else {self.schema.class_names[int(np.argmax(self.default_dist))]}")
        return "\n".join(lines)

    def state_dict(self):
        return {
            "prep": self.prep.state(),
            "rules": [
                {"conditions": [[a, op, v] for a, op, v in conds], "class": c, "dist": dist.tolist()}
                for conds, c, dist in self.rules
            ],
            "default": self.default_dist.tolist(),
        }

    @classmethod
    def from_state(cls, spec, schema, fingerprint, s):
        rules = [
            ([(int(a), op, float(v)) for a, op, v in r["conditions"]], int(r["class"]),
             np.asarray(r["dist"], dtype=np.float64))
            for r in s["rules"]
        ]
        return cls(spec, schema, fingerprint, Preprocessor.from_state(s["prep"]), rules,
                   np.asarray(s["default"], dtype=np.float64))
