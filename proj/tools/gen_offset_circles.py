#!/usr/bin/env python3
"""Generate the offset-circles mesh (unit disk minus a disk of radius 0.1 at (0.5, 0)).

Force-based smoothing in the style of distmesh, with fixed boundary nodes on
both circles. Writes the .msh2d text format without a boundary section, so
the loader detects the two boundary components.
"""
import argparse

import numpy as np
from scipy.spatial import Delaunay

R_OUT, R_IN, CX, CY = 1.0, 0.1, 0.5, 0.0


def sdf(p):
    d_out = np.hypot(p[:, 0], p[:, 1]) - R_OUT
    d_in = R_IN - np.hypot(p[:, 0] - CX, p[:, 1] - CY)
    return np.maximum(d_out, d_in)


def size(p, h_in, h_out, grade):
    d = np.hypot(p[:, 0] - CX, p[:, 1] - CY) - R_IN
    return np.minimum(h_in + grade * d, h_out)


def circle(n, r, cx, cy, phase=0.0):
    t = phase + 2.0 * np.pi * np.arange(n) / n
    return np.column_stack([cx + r * np.cos(t), cy + r * np.sin(t)])


def generate(h_in, h_out, grade, iterations, seed):
    rng = np.random.default_rng(seed)
    n_out = int(round(2 * np.pi * R_OUT / h_out))
    n_in = int(round(2 * np.pi * R_IN / h_in))
    fixed = np.vstack([circle(n_out, R_OUT, 0.0, 0.0), circle(n_in, R_IN, CX, CY)])
    nf = len(fixed)

    h0 = h_in
    xs = np.arange(-1.0, 1.0 + h0, h0)
    ys = np.arange(-1.0, 1.0 + h0, h0 * np.sqrt(3) / 2)
    X, Y = np.meshgrid(xs, ys)
    X[1::2, :] += h0 / 2
    p = np.column_stack([X.ravel(), Y.ravel()])
    p = p[sdf(p) < -0.3 * h0]
    keep = rng.random(len(p)) < (h0 / size(p, h_in, h_out, grade)) ** 2
    p = np.vstack([fixed, p[keep]])

    for it in range(iterations):
        tri = Delaunay(p).simplices
        cent = p[tri].mean(axis=1)
        tri = tri[sdf(cent) < -1e-3 * h_in]
        bars = np.vstack([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]])
        bars = np.unique(np.sort(bars, axis=1), axis=0)
        vec = p[bars[:, 0]] - p[bars[:, 1]]
        length = np.hypot(vec[:, 0], vec[:, 1])
        hbar = size((p[bars[:, 0]] + p[bars[:, 1]]) / 2, h_in, h_out, grade)
        l0 = hbar * 1.2 * np.sqrt((length**2).sum() / (hbar**2).sum())
        f = np.maximum(l0 - length, 0.0)
        fvec = (f / length)[:, None] * vec
        force = np.zeros_like(p)
        np.add.at(force, bars[:, 0], fvec)
        np.add.at(force, bars[:, 1], -fvec)
        force[:nf] = 0.0
        p = p + 0.2 * force
        d = sdf(p)
        out = d > -0.2 * size(p, h_in, h_out, grade)
        out[:nf] = False
        if out.any():
            eps = 1e-8
            q = p[out]
            gx = (sdf(q + [eps, 0]) - sdf(q)) / eps
            gy = (sdf(q + [0, eps]) - sdf(q)) / eps
            shift = d[out] + 0.2 * size(q, h_in, h_out, grade)
            p[out] = q - np.column_stack([shift * gx, shift * gy])

    tri = Delaunay(p).simplices
    cent = p[tri].mean(axis=1)
    tri = tri[sdf(cent) < 0.0]
    used = np.unique(tri)
    remap = -np.ones(len(p), dtype=int)
    remap[used] = np.arange(len(used))
    p = p[used]
    tri = remap[tri]
    a = p[tri[:, 1]] - p[tri[:, 0]]
    b = p[tri[:, 2]] - p[tri[:, 0]]
    neg = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0] < 0
    tri[neg] = tri[neg][:, [0, 2, 1]]
    return p, tri


def quality(p, tri):
    e = [np.linalg.norm(p[tri[:, i]] - p[tri[:, (i + 1) % 3]], axis=1) for i in range(3)]
    a = p[tri[:, 1]] - p[tri[:, 0]]
    b = p[tri[:, 2]] - p[tri[:, 0]]
    area = 0.5 * (a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0])
    return 4 * np.sqrt(3) * area / (e[0] ** 2 + e[1] ** 2 + e[2] ** 2)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("output")
    ap.add_argument("--h-in", type=float, default=0.03)
    ap.add_argument("--h-out", type=float, default=0.069)
    ap.add_argument("--grade", type=float, default=0.3)
    ap.add_argument("--iterations", type=int, default=400)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    p, tri = generate(args.h_in, args.h_out, args.grade, args.iterations, args.seed)
    n_edges = len(np.unique(np.sort(np.vstack([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]]), axis=1), axis=0))
    dofs = 2 * (len(p) + n_edges) + len(p)
    q = quality(p, tri)
    print(f"{len(p)} vertices, {len(tri)} triangles, {dofs} Taylor-Hood dofs, min quality {q.min():.3f}")
    with open(args.output, "w") as f:
        f.write("msh2d 1\n")
        f.write(f"vertices {len(p)}\n")
        for x, y in p:
            f.write(f"{float(x)!r} {float(y)!r}\n")
        f.write(f"triangles {len(tri)}\n")
        for i, j, k in tri:
            f.write(f"{i} {j} {k}\n")


if __name__ == "__main__":
    main()
