#include "bandgen/metrics.hpp"

#include "bandgen/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bandgen {

std::vector<double> histogram(std::span<const double> values, int bins, double lo, double hi)
{
    std::vector<double> h(static_cast<std::size_t>(bins), 0.0);
    if (values.empty())
        return h;
    const double scale = static_cast<double>(bins) / (hi - lo);
    for (double x : values) {
        const double clamped = std::clamp(x, lo, hi);
        const auto bin = std::min(static_cast<int>((clamped - lo) * scale), bins - 1);
        h[static_cast<std::size_t>(bin)] += 1.0;
    }
    const double inv = 1.0 / static_cast<double>(values.size());
    for (double& x : h)
        x *= inv;
    return h;
}

std::vector<double> degree_histogram(const Graph& g)
{
    std::vector<double> h(static_cast<std::size_t>(g.max_degree()) + 1, 0.0);
    if (g.num_nodes() == 0)
        return h;
    for (int v = 0; v < g.num_nodes(); ++v)
        h[static_cast<std::size_t>(g.degree(v))] += 1.0;
    for (double& x : h)
        x /= static_cast<double>(g.num_nodes());
    return h;
}

namespace {

constexpr double kSpectrumLo = 0.0;
constexpr double kSpectrumHi = 2.0;

} // namespace

GraphStats graph_stats(const Graph& g, const StatConfig& cfg)
{
    GraphStats s;
    s.degree_hist = degree_histogram(g);
    const auto cc = clustering_coefficients(g);
    s.clustering_hist = histogram(cc, cfg.clustering_bins, 0.0, 1.0);
    const auto orbits = orbit_counts4(g);
    for (const auto& row : orbits)
        for (int k = 0; k < kNumOrbits; ++k)
            s.orbit_mean[static_cast<std::size_t>(k)] += static_cast<double>(row[static_cast<std::size_t>(k)]);
    if (!orbits.empty())
        for (double& x : s.orbit_mean)
            x /= static_cast<double>(orbits.size());
    const auto eig = laplacian_spectrum(g);
    s.spectrum_hist = histogram(eig, cfg.spectrum_bins, kSpectrumLo, kSpectrumHi);
    return s;
}

std::vector<GraphStats> compute_stats(const std::vector<Graph>& graphs, const StatConfig& cfg, Exec exec)
{
    std::vector<GraphStats> out(graphs.size());
    for_each_index(graphs.size(), exec, [&](std::size_t i) { out[i] = graph_stats(graphs[i], cfg); });
    return out;
}

double wasserstein1(std::span<const double> a, std::span<const double> b, double bin_width)
{
    const std::size_t n = std::max(a.size(), b.size());
    double cdf = 0.0, total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cdf += (i < a.size() ? a[i] : 0.0) - (i < b.size() ? b[i] : 0.0);
        total += std::abs(cdf);
    }
    return total * bin_width;
}

double euclidean(std::span<const double> a, std::span<const double> b)
{
    const std::size_t n = std::max(a.size(), b.size());
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = (i < a.size() ? a[i] : 0.0) - (i < b.size() ? b[i] : 0.0);
        s += d * d;
    }
    return std::sqrt(s);
}

double Kernel::operator()(std::span<const double> a, std::span<const double> b) const
{
    const double d = base == Base::Wasserstein ? wasserstein1(a, b, bin_width) : euclidean(a, b);
    return std::exp(-d * d / (2.0 * sigma * sigma));
}

double kernel_mean(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b,
                   const Kernel& k, Exec exec)
{
    if (a.empty() || b.empty())
        throw InputError("kernel mean over an empty set");
    std::vector<double> row(a.size(), 0.0);
    for_each_index(a.size(), exec, [&](std::size_t i) {
        double s = 0.0;
        for (const auto& y : b)
            s += k(a[i], y);
        row[i] = s;
    });
    double total = 0.0;
    for (double r : row)
        total += r;
    return total / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

double mmd2(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b, const Kernel& k,
            Exec exec)
{
    const double v = kernel_mean(a, a, k, exec) + kernel_mean(b, b, k, exec) - 2.0 * kernel_mean(a, b, k, exec);
    return std::max(v, 0.0);
}

MMDReport mmd_from_stats(const std::vector<GraphStats>& generated, const std::vector<GraphStats>& reference,
                         const MetricConfig& cfg, Exec exec)
{
    if (generated.empty() || reference.empty())
        throw InputError("MMD needs non-empty generated and reference sets");
    const auto collect = [](const std::vector<GraphStats>& stats, auto field) {
        std::vector<std::vector<double>> out;
        out.reserve(stats.size());
        for (const auto& s : stats)
            out.push_back(field(s));
        return out;
    };
    const auto degree = [](const GraphStats& s) { return s.degree_hist; };
    const auto cluster = [](const GraphStats& s) { return s.clustering_hist; };
    const auto spectra = [](const GraphStats& s) { return s.spectrum_hist; };
    const auto orbit = [](const GraphStats& s) { return std::vector<double>(s.orbit_mean.begin(), s.orbit_mean.end()); };

    const Kernel k_degree{Kernel::Base::Wasserstein, cfg.degree_sigma, 1.0};
    const Kernel k_cluster{Kernel::Base::Wasserstein, cfg.cluster_sigma, 1.0 / cfg.stats.clustering_bins};
    const Kernel k_spectra{Kernel::Base::Wasserstein, cfg.spectra_sigma,
                           (kSpectrumHi - kSpectrumLo) / cfg.stats.spectrum_bins};
    const Kernel k_orbit{Kernel::Base::Euclidean, cfg.orbit_sigma, 1.0};

    MMDReport r;
    r.degree = mmd2(collect(generated, degree), collect(reference, degree), k_degree, exec);
    r.cluster = mmd2(collect(generated, cluster), collect(reference, cluster), k_cluster, exec);
    r.orbit = mmd2(collect(generated, orbit), collect(reference, orbit), k_orbit, exec);
    r.spectra = mmd2(collect(generated, spectra), collect(reference, spectra), k_spectra, exec);
    r.mean = (r.degree + r.cluster + r.orbit + r.spectra) / 4.0;
    return r;
}

MMDReport mmd_suite(const std::vector<Graph>& generated, const std::vector<Graph>& reference,
                    const MetricConfig& cfg, Exec exec)
{
    return mmd_from_stats(compute_stats(generated, cfg.stats, exec), compute_stats(reference, cfg.stats, exec), cfg,
                          exec);
}

std::vector<double> pr_embedding(const Graph& g, int bins)
{
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(3 * bins));
    std::vector<double> deg(static_cast<std::size_t>(bins), 0.0);
    for (int v = 0; v < g.num_nodes(); ++v)
        deg[static_cast<std::size_t>(std::min(g.degree(v), bins - 1))] += 1.0;
    for (double& x : deg)
        x /= std::max(1, g.num_nodes());
    out.insert(out.end(), deg.begin(), deg.end());
    const auto cc = histogram(clustering_coefficients(g), bins, 0.0, 1.0);
    out.insert(out.end(), cc.begin(), cc.end());
    const auto sp = histogram(laplacian_spectrum(g), bins, kSpectrumLo, kSpectrumHi);
    out.insert(out.end(), sp.begin(), sp.end());
    return out;
}

std::vector<double> knn_radii(const std::vector<std::vector<double>>& pts, int k)
{
    if (static_cast<int>(pts.size()) <= k)
        throw InputError("k-NN radius needs more than k = " + std::to_string(k) + " points");
    std::vector<double> radii(pts.size());
    std::vector<double> d;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        d.clear();
        for (std::size_t j = 0; j < pts.size(); ++j)
            if (j != i)
                d.push_back(euclidean(pts[i], pts[j]));
        std::nth_element(d.begin(), d.begin() + (k - 1), d.end());
        radii[i] = d[static_cast<std::size_t>(k - 1)];
    }
    return radii;
}

double manifold_coverage(const std::vector<std::vector<double>>& queries,
                         const std::vector<std::vector<double>>& support, int k)
{
    const auto radii = knn_radii(support, k);
    std::size_t hits = 0;
    for (const auto& q : queries)
        for (std::size_t j = 0; j < support.size(); ++j)
            if (euclidean(q, support[j]) <= radii[j]) {
                ++hits;
                break;
            }
    return static_cast<double>(hits) / static_cast<double>(queries.size());
}

PRReport precision_recall(const std::vector<std::vector<double>>& generated,
                          const std::vector<std::vector<double>>& reference, int k)
{
    if (static_cast<int>(generated.size()) <= k || static_cast<int>(reference.size()) <= k)
        throw InputError("F1-PR needs more than k = " + std::to_string(k) + " graphs per set");
    PRReport r;
    r.precision = manifold_coverage(generated, reference, k);
    r.recall = manifold_coverage(reference, generated, k);
    r.f1 = r.precision + r.recall > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
    return r;
}

PRReport f1_pr(const std::vector<Graph>& generated, const std::vector<Graph>& reference, const MetricConfig& cfg)
{
    const auto embed = [&](const std::vector<Graph>& gs) {
        std::vector<std::vector<double>> out(gs.size());
        for_each_index(gs.size(), Exec::Parallel, [&](std::size_t i) { out[i] = pr_embedding(gs[i], cfg.pr_bins); });
        return out;
    };
    return precision_recall(embed(generated), embed(reference), cfg.pr_k);
}

double average_precision(std::span<const double> scores, std::span<const std::uint8_t> labels)
{
    if (scores.size() != labels.size())
        throw InputError("scores and labels differ in length");
    const auto positives = std::count_if(labels.begin(), labels.end(), [](std::uint8_t y) { return y != 0; });
    if (positives == 0)
        throw NumericError("average precision undefined without positive labels");
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    double ap = 0.0, prev_recall = 0.0;
    std::size_t tp = 0, seen = 0;
    for (std::size_t i = 0; i < idx.size();) {
        const double s = scores[idx[i]];
        for (; i < idx.size() && scores[idx[i]] == s; ++i, ++seen)
            tp += labels[idx[i]] != 0;
        const double recall = static_cast<double>(tp) / static_cast<double>(positives);
        const double precision = static_cast<double>(tp) / static_cast<double>(seen);
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    return ap;
}

std::vector<double> average_ranks(std::span<const double> xs)
{
    std::vector<std::size_t> idx(xs.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<double> ranks(xs.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j < idx.size() && xs[idx[j]] == xs[idx[i]])
            ++j;
        const double r = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t t = i; t < j; ++t)
            ranks[idx[t]] = r;
        i = j;
    }
    return ranks;
}

double pearson_r(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size())
        throw InputError("correlation inputs differ in length");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0)
        throw NumericError("correlation undefined for zero-variance input");
    return sxy / std::sqrt(sxx * syy);
}

double spearman_r(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 3)
        throw InputError("Spearman correlation needs two equal-length inputs with at least 3 values");
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    return pearson_r(rx, ry);
}

} // namespace bandgen
