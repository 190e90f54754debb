"""Regenerates the fixture data files and problem files in this directory.

    python3 generate.py

Output is deterministic for a given numpy version.
"""

from pathlib import Path

import numpy as np

HERE = Path(__file__).resolve().parent


def fmt(v):
    return repr(float(v))


def write_mtx(path, a):
    rows, cols = np.nonzero(a)
    lines = ["%%MatrixMarket matrix coordinate real general", f"{a.shape[0]} {a.shape[1]} {len(rows)}"]
    lines += [f"{r + 1} {c + 1} {fmt(a[r, c])}" for r, c in zip(rows, cols)]
    path.write_text("\n".join(lines) + "\n")


def write_csv(path, a):
    a = np.atleast_2d(a)
    path.write_text("".join(",".join(fmt(v) for v in row) + "\n" for row in a))


def write_vec(path, v):
    path.write_text("".join(fmt(x) + "\n" for x in v))


def write_libsvm(path, x, y):
    lines = []
    for row, label in zip(x, y):
        feats = " ".join(f"{j + 1}:{fmt(v)}" for j, v in enumerate(row) if v != 0.0)
        lines.append(f"{int(label):+d} {feats}".rstrip())
    path.write_text("\n".join(lines) + "\n")


def fixture(name, files, spec):
    d = HERE / name
    d.mkdir(exist_ok=True)
    for fname, writer, data in files:
        writer(d / fname, *data)
    (d / "problem.toml").write_text(spec)


def classification(rng, m, n, density):
    x = rng.standard_normal((m, n)) * (rng.random((m, n)) < density)
    w = rng.standard_normal(n)
    y = np.where(x @ w + 0.5 * rng.standard_normal(m) >= 0, 1.0, -1.0)
    return x, y


def lasso(rng):
    a = rng.standard_normal((20, 10))
    b = rng.standard_normal(20)
    lam = 0.1 * np.max(np.abs(a.T @ b))
    fixture(
        "lasso",
        [("A.mtx", write_mtx, (a,)), ("b.csv", write_vec, (b,))],
        f"""# min 0.5 |Ax - b|^2 + lambda |x|_1
[problem]
n = 10

[f]
atoms = "square"
matrix = "A.mtx"
offset = "b.csv"
weights = 0.5

[g]
atoms = "abs"
weights = {fmt(lam)}

[options]
tol = 1e-10
max_iter = 100000
""",
    )


def logistic(rng):
    x, y = classification(rng, 30, 8, 0.6)
    write_libsvm(HERE / "data" / "binary.svm", x, y)
    # the gap bounds the squared distance to the solution over the curvature
    for name, g, weight, tol, comment in [
        ("logistic", "square", 0.05, "1e-13", "(lambda/2) |x|^2 with lambda = 0.1"),
        ("sparse_logistic", "abs", 0.5, "1e-10", "lambda |x|_1 with lambda = 0.5"),
    ]:
        fixture(
            name,
            [],
            f"""# min sum_i log(1 + exp(b_i (Ax)_i)) + {comment}
[problem]
n = 8

[f]
atoms = "log1pexp"
matrix = {{ file = "../data/binary.svm", labels = "scale_rows" }}

[g]
atoms = "{g}"
weights = {weight}

[options]
tol = {tol}
max_iter = 100000
""",
        )


def svm(rng):
    x, y = classification(rng, 20, 5, 1.0)
    alpha = 2.0
    write_libsvm(HERE / "data" / "svm.svm", x, y)
    write_csv(HERE / "data" / "svm_labels.csv", y)
    write_csv(HERE / "data" / "ones20.csv", np.ones(20))
    f = f"""[f]
atoms = ["square", "square", "square", "square", "square", "linear"]
weights = [{", ".join([fmt(0.5 / alpha)] * 5)}, 1.0]
matrix = [
    {{ file = "../data/svm.svm", labels = "scale_rows", transpose = true }},
    {{ file = "../data/ones20.csv", scale = -1.0 }},
]

[g]
atoms = "box01"
"""
    fixture(
        "svm",
        [],
        f"""# min 1/(2 alpha) |A^T D(b) x|^2 - e^T x  s.t. x in [0, 1]^n, alpha = {alpha}
[problem]
n = 20

{f}
[options]
tol = 1e-10
max_iter = 100000
""",
    )
    fixture(
        "svm_intercept",
        [],
        f"""# dual SVM as in ../svm plus the constraint b^T x = 0, alpha = {alpha}
[problem]
n = 20

{f}
[h]
atoms = "eq"
matrix = "../data/svm_labels.csv"

[options]
tol = 1e-9
max_iter = 200000
""",
    )


def qp(rng):
    n, m, p = 8, 12, 3
    af = rng.standard_normal((n, m))
    bf = rng.standard_normal(m)
    ah = rng.standard_normal((p, n))
    bh = rng.standard_normal(p)
    fixture(
        "qp",
        [("Af.mtx", write_mtx, (af,)), ("bf.csv", write_vec, (bf,)), ("Ah.csv", write_csv, (ah,)),
         ("bh.csv", write_vec, (bh,))],
        f"""# min 0.5 |Af^T x - bf|^2  s.t. Ah x = bh
[problem]
n = {n}

[f]
atoms = "square"
weights = 0.5
matrix = {{ file = "Af.mtx", transpose = true }}
offset = "bf.csv"
rows = {m}

[h]
atoms = "eq"
matrix = "Ah.csv"
offset = "bh.csv"

[options]
tol = 1e-10
max_iter = 200000
""",
    )


def lp(rng):
    n, m = 4, 3
    a = rng.uniform(0.5, 2.0, (m, n))
    b = rng.uniform(1.0, 3.0, m)
    c = -rng.uniform(0.5, 2.0, n)
    fixture(
        "lp",
        [("A.csv", write_csv, (a,)), ("b.csv", write_vec, (b,)), ("c.csv", write_csv, (c,))],
        """# min c^T x  s.t. x >= 0, Ax <= b
[problem]
n = 4

[f]
atoms = "linear"
matrix = "c.csv"

[g]
atoms = "nonneg"

[h]
atoms = "nonpos"
matrix = "A.csv"
offset = "b.csv"

[options]
tol = 1e-9
max_iter = 400000
""",
    )


def tv_l1(rng):
    side = 4
    n = side * side
    truth = np.zeros((side, side))
    truth[1:3, 1:4] = 1.0
    a = rng.standard_normal((12, n)) / np.sqrt(12)
    b = a @ truth.ravel() + 0.05 * rng.standard_normal(12)
    rows, blocks = [], [0]
    for i in range(side):
        for j in range(side):
            k = i * side + j
            for di, dj in ((1, 0), (0, 1)):
                if i + di < side and j + dj < side:
                    r = np.zeros(n)
                    r[k], r[(i + di) * side + j + dj] = -1.0, 1.0
                    rows.append(r)
            if len(rows) > blocks[-1]:
                blocks.append(len(rows))
    d = np.array(rows)
    fixture(
        "tv_l1",
        [("A.mtx", write_mtx, (a,)), ("b.csv", write_vec, (b,)), ("D.mtx", write_mtx, (d,))],
        f"""# min 0.5 |Ax - b|^2 + alpha1 |Dx|_(2,1) + alpha2 |x|_1 on a {side}x{side} image
[problem]
n = {n}

[f]
atoms = "square"
weights = 0.5
matrix = "A.mtx"
offset = "b.csv"

[g]
atoms = "abs"
weights = 0.05

[h]
atoms = "norm2"
weights = 0.1
matrix = "D.mtx"
blocks = {blocks}

[options]
tol = 1e-9
max_iter = 400000
""",
    )


def multinomial(rng):
    m, nf, q = 12, 4, 3
    a = rng.standard_normal((m, nf))
    labels = rng.integers(0, q, m)
    y = np.eye(q)[labels]
    # row (i, j) of the expanded matrix is sample i seen by class j
    big = np.zeros((m * q, nf * q))
    for i in range(m):
        for j in range(q):
            big[i * q + j, j::q] = a[i]
    c = -(a.T @ y).ravel()
    blocks = list(range(0, nf * q + 1, q))
    fixture(
        "multinomial",
        [("A.mtx", write_mtx, (big,)), ("c.csv", write_csv, (c,)), ("features.csv", write_csv, (a,)),
         ("labels.csv", write_vec, (labels,))],
        f"""# min sum_i logsumexp_j((A X)_ij) - <A^T Y, X> + lambda sum_l |X_l|_2, X in R^({nf}x{q})
[problem]
n = {nf * q}
blocks = {blocks}

[f]
atoms = [{", ".join(['"logsumexp"'] * m + ['"linear"'])}]
matrix = ["A.mtx", "c.csv"]
blocks = {list(range(0, m * q + 1, q)) + [m * q + 1]}

[g]
atoms = "norm2"
weights = 0.5

[options]
tol = 1e-10
max_iter = 100000
""",
    )


def main():
    (HERE / "data").mkdir(exist_ok=True)
    rng = np.random.default_rng(20241016)
    lasso(rng)
    logistic(rng)
    svm(rng)
    qp(rng)
    lp(rng)
    tv_l1(rng)
    multinomial(rng)


if __name__ == "__main__":
    main()
