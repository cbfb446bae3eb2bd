# Independent Newton-Raphson solve (mpmath, 50 digits) for the 20-row
# poisson/log fixture frozen into glm_test.cpp.
import mpmath as mp

mp.mp.dps = 50
x = [-2.7, -2.3, -1.9, -1.6, -1.2, -0.9, -0.5, -0.2, 0.0, 0.3,
     0.6, 0.8, 1.1, 1.4, 1.7, 1.9, 2.2, 2.5, 2.8, 3.0]
y = [0, 1, 0, 1, 2, 1, 2, 3, 2, 4, 3, 5, 6, 5, 8, 9, 11, 13, 17, 19]

b = [mp.mpf(0), mp.mpf(0)]
for _ in range(60):
    g = [mp.mpf(0), mp.mpf(0)]
    h = [[mp.mpf(0)] * 2 for _ in range(2)]
    for xi, yi in zip(x, y):
        xi = mp.mpf(str(xi))
        mu = mp.e ** (b[0] + b[1] * xi)
        row = [1, xi]
        for a in range(2):
            g[a] += row[a] * (yi - mu)
            for c in range(2):
                h[a][c] += row[a] * row[c] * mu
    det = h[0][0] * h[1][1] - h[0][1] * h[1][0]
    step = [(h[1][1] * g[0] - h[0][1] * g[1]) / det,
            (-h[1][0] * g[0] + h[0][0] * g[1]) / det]
    b = [b[0] + step[0], b[1] + step[1]]
print(mp.nstr(b[0], 20), mp.nstr(b[1], 20))
