"""Exact orientation predicate on float input.

Every finite double is a dyadic rational, so scaling all coordinates by a
common power of two gives integers and the determinant can be evaluated
exactly with Bareiss elimination on Python ints.
"""


def _to_scaled_ints(rows):
    # 2**1074 clears the denominator of every finite double
    out = []
    for row in rows:
        ints = []
        for x in row:
            num, den = float(x).as_integer_ratio()
            ints.append((num << 1074) // den)
        out.append(ints)
    return out


def bareiss_det(mat):
    """Exact determinant of a square integer matrix (list of lists)."""
    a = [list(r) for r in mat]
    n = len(a)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        akk = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i = a[i]
            row_k = a[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * akk - aik * row_k[j]) // prev
        prev = akk
    return sign * a[n - 1][n - 1]


def orientation(points):
    """Exact sign of det[[p_0, 1], ..., [p_n, 1]] for n+1 points in R^n."""
    rows = [list(map(float, p)) + [1.0] for p in points]
    ints = _to_scaled_ints(rows)
    d = bareiss_det(ints)
    return (d > 0) - (d < 0)


def exact_side(facet_pts, query, interior):
    """+1 if ``query`` is strictly beyond the facet hyperplane (opposite to
    ``interior``), -1 if strictly beneath, 0 if exactly on it."""
    pts = [list(map(float, p)) for p in facet_pts]
    s_q = orientation(pts + [list(map(float, query))])
    if s_q == 0:
        return 0
    s_c = orientation(pts + [list(map(float, interior))])
    return 1 if s_q != s_c else -1
