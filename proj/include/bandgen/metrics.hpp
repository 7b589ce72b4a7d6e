#pragma once

#include "bandgen/graph.hpp"
#include "bandgen/parallel.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace bandgen {

// ---------------------------------------------------------------------------
// Per-graph statistics
// ---------------------------------------------------------------------------

/// c_v = 2 T(v) / (deg(v) (deg(v) - 1)); 0 when deg(v) < 2.
std::vector<double> clustering_coefficients(const Graph& g);

inline constexpr int kNumOrbits = 15;
using OrbitCounts = std::array<std::int64_t, kNumOrbits>;

/// Per-node counts of the 15 orbits of connected graphlets on 2-4 nodes:
///   0 edge; 1-2 path P3 (end, middle); 3 triangle; 4-5 path P4 (end, inner);
///   6-7 star (leaf, centre); 8 cycle C4; 9-11 tailed triangle (tail, degree-2,
///   degree-3); 12-13 diamond (degree-2, degree-3); 14 K4.
/// Graphlets are induced; every connected node subset is enumerated once.
std::vector<OrbitCounts> orbit_counts4(const Graph& g);

/// Eigenvalues of I - D^{-1/2} A D^{-1/2}, ascending. Isolated nodes have a
/// zero row and column.
std::vector<double> laplacian_spectrum(const Graph& g);

/// Householder reduction of a dense symmetric matrix (row-major, n x n) to
/// tridiagonal form; returns (diagonal, sub-diagonal with e[0] = 0).
void householder_tridiagonalize(std::vector<double>& a, int n, std::vector<double>& diag,
                                std::vector<double>& off);

/// Implicit-shift QL on a symmetric tridiagonal matrix; eigenvalues replace diag.
/// Throws NumericError when an eigenvalue fails to converge.
void tridiagonal_ql(std::vector<double>& diag, std::vector<double>& off);

/// Eigenvalues of a dense symmetric matrix, ascending.
std::vector<double> symmetric_eigenvalues(std::vector<double> a, int n);

struct StatConfig {
    int clustering_bins = 100;
    int spectrum_bins = 200;
};

struct GraphStats {
    std::vector<double> degree_hist;
    std::vector<double> clustering_hist;
    std::array<double, kNumOrbits> orbit_mean{};
    std::vector<double> spectrum_hist;
};

/// Normalised histogram of values in [lo, hi]; the last bin is closed.
std::vector<double> histogram(std::span<const double> values, int bins, double lo, double hi);
std::vector<double> degree_histogram(const Graph& g);

GraphStats graph_stats(const Graph& g, const StatConfig& cfg = {});
std::vector<GraphStats> compute_stats(const std::vector<Graph>& graphs, const StatConfig& cfg = {},
                                      Exec exec = Exec::Parallel);

// ---------------------------------------------------------------------------
// Kernels and MMD
// ---------------------------------------------------------------------------

/// Earth mover's distance between two 1-D histograms with equal bin spacing
/// (shorter input is zero-padded): bin_width * sum_i |CDF_a(i) - CDF_b(i)|.
double wasserstein1(std::span<const double> a, std::span<const double> b, double bin_width = 1.0);
double euclidean(std::span<const double> a, std::span<const double> b);

struct Kernel {
    enum class Base { Wasserstein, Euclidean };
    Base base = Base::Wasserstein;
    double sigma = 1.0;
    double bin_width = 1.0;

    double operator()(std::span<const double> a, std::span<const double> b) const;
};

/// Mean of k(a_i, b_j) over all pairs. The parallel path splits work by row
/// and reduces row sums in index order, so both paths agree bit for bit.
double kernel_mean(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b,
                   const Kernel& k, Exec exec = Exec::Parallel);

/// Biased (V-statistic) squared MMD; tiny negative round-off is clamped to 0.
double mmd2(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b,
            const Kernel& k, Exec exec = Exec::Parallel);

struct MetricConfig {
    StatConfig stats;
    double degree_sigma = 1.0;
    double cluster_sigma = 1.0;
    double spectra_sigma = 1.0;
    double orbit_sigma = 30.0;
    int pr_k = 5;
    int pr_bins = 32;
};

struct MMDReport {
    double degree = 0.0;
    double cluster = 0.0;
    double orbit = 0.0;
    double spectra = 0.0;
    double mean = 0.0;
};

MMDReport mmd_from_stats(const std::vector<GraphStats>& generated, const std::vector<GraphStats>& reference,
                         const MetricConfig& cfg = {}, Exec exec = Exec::Parallel);
MMDReport mmd_suite(const std::vector<Graph>& generated, const std::vector<Graph>& reference,
                    const MetricConfig& cfg = {}, Exec exec = Exec::Parallel);

// ---------------------------------------------------------------------------
// Precision / recall
// ---------------------------------------------------------------------------

struct PRReport {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Descriptor used for F1-PR: [degree | clustering | spectrum], `bins` each.
std::vector<double> pr_embedding(const Graph& g, int bins = 32);

/// Distance from each point to its k-th nearest other point in the same set.
std::vector<double> knn_radii(const std::vector<std::vector<double>>& pts, int k);

/// Fraction of `queries` inside at least one k-NN ball of `support`.
double manifold_coverage(const std::vector<std::vector<double>>& queries,
                         const std::vector<std::vector<double>>& support, int k);

PRReport precision_recall(const std::vector<std::vector<double>>& generated,
                          const std::vector<std::vector<double>>& reference, int k);
PRReport f1_pr(const std::vector<Graph>& generated, const std::vector<Graph>& reference,
               const MetricConfig& cfg = {});

// ---------------------------------------------------------------------------
// Scalar summaries
// ---------------------------------------------------------------------------

/// Step-wise average precision: sum over score thresholds of
/// (recall_k - recall_{k-1}) * precision_k, tied scores sharing one threshold.
double average_precision(std::span<const double> scores, std::span<const std::uint8_t> labels);

/// Ranks starting at 1, ties receive the mean of their positions.
std::vector<double> average_ranks(std::span<const double> xs);
double pearson_r(std::span<const double> x, std::span<const double> y);
double spearman_r(std::span<const double> x, std::span<const double> y);

} // namespace bandgen
