#pragma once

#include "bandgen/graph.hpp"
#include "bandgen/ordering.hpp"
#include "bandgen/parallel.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace bandgen {

enum class DatasetKind { Community2, Planar, Grid2d, File };

DatasetKind parse_dataset_kind(const std::string& s);
const char* to_string(DatasetKind k) noexcept;

struct DatasetSpec {
    DatasetKind kind = DatasetKind::Grid2d;
    int count = 1;
    std::uint64_t seed = 0;
    std::filesystem::path path;
    /// Grid2d only: number of relabelled copies of each grid.
    int replicate = 1;
};

inline constexpr int kCommunityMinNodes = 60;
inline constexpr int kCommunityMaxNodes = 160;
inline constexpr double kCommunityIntraP = 0.3;
inline constexpr double kCommunityInterP = 0.05;
inline constexpr int kPlanarNodes = 64;
inline constexpr int kPlanarMaxRetries = 32;
inline constexpr int kGridMinSide = 10;
inline constexpr int kGridMaxSide = 20;

/// One two-community graph: sampled size, ER halves, sparse cross edges,
/// largest component. `sampled_nodes` receives N before the component cut.
Graph community2_graph(std::uint64_t seed, int* sampled_nodes = nullptr);
std::vector<Graph> gen_community2(int count, std::uint64_t seed, Exec exec = Exec::Parallel);

/// Delaunay graph of 64 uniform points in the unit square; degenerate point
/// sets are resampled up to kPlanarMaxRetries times.
Graph planar_graph(std::uint64_t seed);
std::vector<Graph> gen_planar(int count, std::uint64_t seed, Exec exec = Exec::Parallel);

/// rows x cols 4-neighbour lattice, node (r, c) -> r * cols + c.
Graph grid_graph(int rows, int cols);
/// Every side pair lo <= a <= b <= hi (66 graphs for the default range).
std::vector<Graph> gen_grid2d(int lo = kGridMinSide, int hi = kGridMaxSide);

/// Appends `times` randomly relabelled copies of every graph.
std::vector<Graph> replicate(const std::vector<Graph>& graphs, int times, std::uint64_t seed);

std::vector<Graph> generate(const DatasetSpec& spec);

/// One JSON object per line: {"n": N, "edges": [[u, v], ...]} with u < v.
std::vector<Graph> load_jsonl(const std::filesystem::path& path);
std::vector<Graph> parse_jsonl(std::istream& in);
void save_jsonl(const std::filesystem::path& path, const std::vector<Graph>& graphs);
std::string graph_to_json_line(const Graph& g);

std::vector<Graph> filter_connected(const std::vector<Graph>& graphs);
std::vector<Graph> filter_size(const std::vector<Graph>& graphs, int min_nodes, int max_nodes);

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
};

/// Population mean and standard deviation.
MeanStd mean_std(const std::vector<double>& xs);

struct BandwidthReport {
    std::string dataset;
    std::size_t count = 0;
    MeanStd nodes;
    MeanStd bandwidth;
    MeanStd savings;
    int max_bandwidth = 0;
    std::vector<int> per_graph_bandwidth;
    std::vector<double> per_graph_savings;
};

/// Savings factor of one graph under a band of the given width; graphs
/// with fewer than two nodes or no edges report 1 and a width of at least 1.
double graph_savings(int n, int width);

/// Per-graph C-M bandwidth with seeds derived from cfg.seed and the graph index.
std::vector<int> cm_bandwidths(const std::vector<Graph>& graphs, const OrderingConfig& cfg,
                               Exec exec = Exec::Parallel);

BandwidthReport bandwidth_report(const std::vector<Graph>& graphs, const OrderingConfig& cfg,
                                 const std::string& dataset = "data", Exec exec = Exec::Parallel);

std::string report_tsv_header();
std::string report_tsv_row(const BandwidthReport& r);

struct Split {
    std::vector<Graph> train, val, test;
};

/// Seeded shuffle then contiguous split; sizes are floored and the remainder
/// goes to the largest fractional parts (lowest index on ties).
Split split(const std::vector<Graph>& graphs, std::array<double, 3> fractions, std::uint64_t seed);
std::array<std::size_t, 3> split_sizes(std::size_t n, std::array<double, 3> fractions);

} // namespace bandgen
