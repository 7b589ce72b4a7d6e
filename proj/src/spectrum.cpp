#include "bandgen/error.hpp"
#include "bandgen/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace bandgen {

namespace {
constexpr double kOffDiagonalTolerance = 1e-10;
constexpr int kMaxSweeps = 60;
} // namespace

void householder_tridiagonalize(std::vector<double>& a, int n, std::vector<double>& diag, std::vector<double>& off)
{
    const auto at = [&](int i, int j) -> double& {
        return a[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)];
    };
    std::vector<double> v, p;
    for (int k = 0; k + 2 < n; ++k) {
        const int m = n - k - 1;
        v.assign(static_cast<std::size_t>(m), 0.0);
        double norm2 = 0.0;
        for (int i = 0; i < m; ++i) {
            v[static_cast<std::size_t>(i)] = at(k + 1 + i, k);
            norm2 += v[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(i)];
        }
        const double norm = std::sqrt(norm2);
        if (norm == 0.0)
            continue;
        const double alpha = v[0] > 0.0 ? -norm : norm;
        v[0] -= alpha;
        double vnorm2 = 0.0;
        for (double x : v)
            vnorm2 += x * x;
        if (vnorm2 == 0.0)
            continue;
        const double inv = 1.0 / std::sqrt(vnorm2);
        for (double& x : v)
            x *= inv;

        // Trailing block B <- H B H with H = I - 2 v v^T.
        p.assign(static_cast<std::size_t>(m), 0.0);
        for (int i = 0; i < m; ++i) {
            double s = 0.0;
            for (int j = 0; j < m; ++j)
                s += at(k + 1 + i, k + 1 + j) * v[static_cast<std::size_t>(j)];
            p[static_cast<std::size_t>(i)] = s;
        }
        double kk = 0.0;
        for (int i = 0; i < m; ++i)
            kk += v[static_cast<std::size_t>(i)] * p[static_cast<std::size_t>(i)];
        for (int i = 0; i < m; ++i)
            p[static_cast<std::size_t>(i)] -= kk * v[static_cast<std::size_t>(i)];
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                at(k + 1 + i, k + 1 + j) -= 2.0 * (v[static_cast<std::size_t>(i)] * p[static_cast<std::size_t>(j)] +
                                                   p[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(j)]);
        at(k + 1, k) = alpha;
        at(k, k + 1) = alpha;
        for (int i = k + 2; i < n; ++i) {
            at(i, k) = 0.0;
            at(k, i) = 0.0;
        }
    }
    diag.resize(static_cast<std::size_t>(n));
    off.assign(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i)
        diag[static_cast<std::size_t>(i)] = at(i, i);
    for (int i = 1; i < n; ++i)
        off[static_cast<std::size_t>(i)] = at(i, i - 1);
}

void tridiagonal_ql(std::vector<double>& d, std::vector<double>& off)
{
    const int n = static_cast<int>(d.size());
    if (n == 0)
        return;
    std::vector<double> e(static_cast<std::size_t>(n), 0.0);
    for (int i = 1; i < n; ++i)
        e[static_cast<std::size_t>(i - 1)] = off[static_cast<std::size_t>(i)];
    const auto D = [&](int i) -> double& { return d[static_cast<std::size_t>(i)]; };
    const auto E = [&](int i) -> double& { return e[static_cast<std::size_t>(i)]; };

    for (int l = 0; l < n; ++l) {
        int sweeps = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::abs(D(m)) + std::abs(D(m + 1));
                if (std::abs(E(m)) <= kOffDiagonalTolerance * dd || std::abs(E(m)) < 1e-300)
                    break;
            }
            if (m == l)
                break;
            if (sweeps++ == kMaxSweeps)
                throw NumericError("tridiagonal QL did not converge");
            double g = (D(l + 1) - D(l)) / (2.0 * E(l));
            double r = std::hypot(g, 1.0);
            g = D(m) - D(l) + E(l) / (g + std::copysign(r, g));
            double s = 1.0, c = 1.0, p = 0.0;
            int i = m - 1;
            bool underflow = false;
            for (; i >= l; --i) {
                const double f = s * E(i);
                const double b = c * E(i);
                r = std::hypot(f, g);
                E(i + 1) = r;
                if (r == 0.0) {
                    D(i + 1) -= p;
                    E(m) = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = D(i + 1) - p;
                r = (D(i) - g) * s + 2.0 * c * b;
                p = s * r;
                D(i + 1) = g + p;
                g = c * r - b;
            }
            if (underflow)
                continue;
            D(l) -= p;
            E(l) = g;
            E(m) = 0.0;
        } while (m != l);
    }
    std::sort(d.begin(), d.end());
}

std::vector<double> symmetric_eigenvalues(std::vector<double> a, int n)
{
    std::vector<double> diag, off;
    householder_tridiagonalize(a, n, diag, off);
    tridiagonal_ql(diag, off);
    return diag;
}

std::vector<double> laplacian_spectrum(const Graph& g)
{
    const int n = g.num_nodes();
    std::vector<double> a(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);
    std::vector<double> inv_sqrt(static_cast<std::size_t>(n), 0.0);
    for (int v = 0; v < n; ++v)
        if (g.degree(v) > 0)
            inv_sqrt[static_cast<std::size_t>(v)] = 1.0 / std::sqrt(static_cast<double>(g.degree(v)));
    for (int v = 0; v < n; ++v) {
        const auto row = static_cast<std::size_t>(v) * static_cast<std::size_t>(n);
        if (g.degree(v) > 0)
            a[row + static_cast<std::size_t>(v)] = 1.0;
        for (int u : g.neighbors(v))
            a[row + static_cast<std::size_t>(u)] =
                -inv_sqrt[static_cast<std::size_t>(v)] * inv_sqrt[static_cast<std::size_t>(u)];
    }
    return symmetric_eigenvalues(std::move(a), n);
}

} // namespace bandgen
