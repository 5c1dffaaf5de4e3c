#!/usr/bin/env python3
"""Writes a synthetic terrain mesh: a Gaussian hill under a flat lid.

This is a stand-in for real valley terrain, which is not distributed with
the project. Altitude is the first coordinate. The lateral extent matches
(y, z) in (-0.2, 3.32) x (-3.35, 0.16); the domain top is x = 1.

Boundary labels: 1 ground, 2 top, 3 lateral.
"""
import argparse
import math
import pathlib


def hill(y, z, peak, centre, width):
    r2 = (y - centre[0]) ** 2 + (z - centre[1]) ** 2
    return peak * math.exp(-r2 / (2.0 * width * width))


def signed_volume(a, b, c, d):
    u = [b[k] - a[k] for k in range(3)]
    v = [c[k] - a[k] for k in range(3)]
    w = [d[k] - a[k] for k in range(3)]
    return (u[0] * (v[1] * w[2] - v[2] * w[1]) - u[1] * (v[0] * w[2] - v[2] * w[0]) + u[2] * (v[0] * w[1] - v[1] * w[0])) / 6.0


def main():
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--lateral", type=int, default=14, help="cells per lateral axis")
    parser.add_argument("--vertical", type=int, default=6, help="cells along the altitude")
    parser.add_argument("--peak", type=float, default=0.35, help="hill height")
    parser.add_argument("--width", type=float, default=0.6, help="hill standard deviation")
    parser.add_argument("--out", type=pathlib.Path,
                        default=pathlib.Path(__file__).resolve().parent.parent / "data" / "gaussian_hill.mesh")
    args = parser.parse_args()

    ys = [-0.2 + 3.52 * k / args.lateral for k in range(args.lateral + 1)]
    zs = [-3.35 + 3.51 * k / args.lateral for k in range(args.lateral + 1)]
    centre = (1.56, -1.6)
    nx, ny, nz = args.vertical + 1, len(ys), len(zs)

    def index(i, j, k):
        return (k * ny + j) * nx + i

    vertices = []
    for k in range(nz):
        for j in range(ny):
            for i in range(nx):
                ground = hill(ys[j], zs[k], args.peak, centre, args.width)
                vertices.append((ground + (1.0 - ground) * i / args.vertical, ys[j], zs[k]))

    # Six tetrahedra per hexahedron around the main diagonal.
    paths = [(1, 3, 7), (1, 5, 7), (2, 3, 7), (2, 6, 7), (4, 5, 7), (4, 6, 7)]
    tets = []
    for k in range(nz - 1):
        for j in range(ny - 1):
            for i in range(nx - 1):
                corner = [index(i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1)) for c in range(8)]
                for a, b, c in paths:
                    t = [corner[0], corner[a], corner[b], corner[c]]
                    if signed_volume(*(vertices[v] for v in t)) < 0.0:
                        t[2], t[3] = t[3], t[2]
                    tets.append(t)

    # Boundary faces appear in exactly one tetrahedron; orient them outwards.
    faces = {}
    for t in tets:
        for skip in range(4):
            face = tuple(t[m] for m in range(4) if m != skip)
            key = tuple(sorted(face))
            faces.setdefault(key, []).append((face, t[skip]))
    triangles = []
    for key, owners in faces.items():
        if len(owners) != 1:
            continue
        face, opposite = owners[0]
        if signed_volume(*(vertices[v] for v in face), vertices[opposite]) > 0.0:
            face = (face[0], face[2], face[1])
        layers = {(v % nx) for v in face}
        if layers == {0}:
            label = 1
        elif layers == {nx - 1}:
            label = 2
        else:
            label = 3
        triangles.append((face, label))

    lines = ["MeshVersionFormatted 2", "Dimension 3", "", "Vertices", str(len(vertices))]
    lines += [f"{x:.12g} {y:.12g} {z:.12g} 0" for x, y, z in vertices]
    lines += ["", "Triangles", str(len(triangles))]
    lines += [f"{a + 1} {b + 1} {c + 1} {label}" for (a, b, c), label in triangles]
    lines += ["", "Tetrahedra", str(len(tets))]
    lines += [f"{a + 1} {b + 1} {c + 1} {d + 1} 0" for a, b, c, d in tets]
    lines += ["", "End", ""]
    args.out.write_text("\n".join(lines))


if __name__ == "__main__":
    main()
