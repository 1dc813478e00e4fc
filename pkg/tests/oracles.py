"""Brute-force reference implementations.

Dense 0/1 arrays and explicit loops only; nothing here imports the
package under test.
"""

import math

import numpy as np


def dense(links, m, n):
    a = np.zeros((m, n))
    for u, o in links:
        a[u, o] = 1.0
    return a


def dense_trust(edges, m):
    b = np.zeros((m, m))
    for i, j in edges:
        if i != j:
            b[i, j] = 1.0
    return b


def md_matrix(a):
    m, n = a.shape
    ku, ko = a.sum(1), a.sum(0)
    w = np.zeros((n, n))
    for al in range(n):
        for be in range(n):
            if ko[be] == 0:
                continue
            s = 0.0
            for i in range(m):
                if ku[i]:
                    s += a[i, al] * a[i, be] / ku[i]
            w[al, be] = s / ko[be]
    return w


def hc_matrix(a):
    m, n = a.shape
    ku, ko = a.sum(1), a.sum(0)
    w = np.zeros((n, n))
    for al in range(n):
        if ko[al] == 0:
            continue
        for be in range(n):
            s = 0.0
            for i in range(m):
                if ku[i]:
                    s += a[i, al] * a[i, be] / ku[i]
            w[al, be] = s / ko[al]
    return w


def cosra_matrix(a):
    m, n = a.shape
    ku, ko = a.sum(1), a.sum(0)
    s = np.zeros((n, n))
    for al in range(n):
        for be in range(n):
            if ko[al] == 0 or ko[be] == 0:
                continue
            t = 0.0
            for i in range(m):
                if ku[i]:
                    t += a[i, al] * a[i, be] / ku[i]
            s[al, be] = t / math.sqrt(ko[al] * ko[be])
    return s


def cosine_users(a, i, j):
    ki, kj = a[i].sum(), a[j].sum()
    if ki == 0 or kj == 0:
        return 0.0
    return float(sum(a[i, o] * a[j, o] for o in range(a.shape[1]))) / math.sqrt(ki * kj)


def cosine_objects(a, x, y):
    return cosine_users(a.T, x, y)


def ucf(a, i):
    m, n = a.shape
    v = np.zeros(n)
    for j in range(m):
        if j == i:
            continue
        s = cosine_users(a, i, j)
        for o in range(n):
            v[o] += s * a[j, o]
    return v


def cosra_t(a, b, i, theta):
    """The three-step trust-scaled diffusion written as explicit sums."""
    m, n = a.shape
    ku, ko = a.sum(1), a.sum(0)
    f = a[i].copy()
    fu = np.zeros(m)
    for j in range(m):
        for al in range(n):
            if a[j, al]:
                fu[j] += a[j, al] / math.sqrt(ku[j] * ko[al]) * f[al]
    out = np.zeros(n)
    for be in range(n):
        for j in range(m):
            if not a[j, be]:
                continue
            if b[i, j]:
                g = fu[j] ** theta if fu[j] > 0 else 0.0
            else:
                g = fu[j]
            out[be] += a[j, be] / math.sqrt(ku[j] * ko[be]) * g
    return out


# metrics ---------------------------------------------------------------------

def auc_user(scores, collected, probes):
    probes = set(probes)
    neg = [o for o in range(len(scores)) if o not in collected and o not in probes]
    if not probes or not neg:
        return None
    n1 = n2 = 0
    for p in probes:
        for q in neg:
            if scores[p] > scores[q]:
                n1 += 1
            elif scores[p] == scores[q]:
                n2 += 1
    return (n1 + 0.5 * n2) / (len(probes) * len(neg))


def position(scores, collected, obj):
    """Mean of the positions a tied group occupies, ranks counted from 1."""
    cand = [o for o in range(len(scores)) if o not in collected]
    above = sum(1 for o in cand if scores[o] > scores[obj])
    tied = sum(1 for o in cand if scores[o] == scores[obj])
    return sum(range(above + 1, above + tied + 1)) / tied, len(cand)


def ranked_list(scores, collected, L):
    cand = [o for o in range(len(scores)) if o not in collected]
    cand.sort(key=lambda o: (-scores[o], o))
    return cand[:L]


def hamming(lists, L):
    users = [x for x in lists if len(x)]
    tot = cnt = 0
    for i in range(len(users)):
        for j in range(len(users)):
            if i == j:
                continue
            tot += 1 - len(set(users[i]) & set(users[j])) / L
            cnt += 1
    return tot / cnt


def intra(a, lst, L):
    s = 0.0
    for x in lst:
        for y in lst:
            if x != y:
                s += cosine_objects(a, x, y)
    return s / (L * (L - 1))
