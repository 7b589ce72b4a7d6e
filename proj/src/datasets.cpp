#include "bandgen/datasets.hpp"

#include "bandgen/delaunay.hpp"
#include "bandgen/error.hpp"
#include "bandgen/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace bandgen {

DatasetKind parse_dataset_kind(const std::string& s)
{
    if (s == "community2")
        return DatasetKind::Community2;
    if (s == "planar")
        return DatasetKind::Planar;
    if (s == "grid2d")
        return DatasetKind::Grid2d;
    if (s == "file")
        return DatasetKind::File;
    throw InputError("unknown dataset kind '" + s + "'");
}

const char* to_string(DatasetKind k) noexcept
{
    switch (k) {
    case DatasetKind::Community2: return "community2";
    case DatasetKind::Planar: return "planar";
    case DatasetKind::Grid2d: return "grid2d";
    case DatasetKind::File: return "file";
    }
    return "unknown";
}

Graph community2_graph(std::uint64_t seed, int* sampled_nodes)
{
    Rng rng(seed);
    const int n = rng.between(kCommunityMinNodes, kCommunityMaxNodes);
    const int first = (n + 1) / 2;
    std::vector<Edge> edges;
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v) {
            const bool same = (u < first) == (v < first);
            if (rng.bernoulli(same ? kCommunityIntraP : kCommunityInterP))
                edges.emplace_back(u, v);
        }
    if (sampled_nodes)
        *sampled_nodes = n;
    return largest_component(make_graph(n, edges));
}

std::vector<Graph> gen_community2(int count, std::uint64_t seed, Exec exec)
{
    std::vector<Graph> out(static_cast<std::size_t>(std::max(count, 0)));
    for_each_index(out.size(), exec, [&](std::size_t i) { out[i] = community2_graph(derive_seed(seed, i)); });
    return out;
}

Graph planar_graph(std::uint64_t seed)
{
    Rng rng(seed);
    for (int attempt = 0; attempt < kPlanarMaxRetries; ++attempt) {
        std::vector<Point2> pts(kPlanarNodes);
        for (auto& p : pts) {
            p.x = rng.uniform();
            p.y = rng.uniform();
        }
        try {
            return delaunay_graph(pts);
        } catch (const DegenerateInput&) {
            continue;
        }
    }
    throw NumericError("planar generator: degenerate point sets on every retry");
}

std::vector<Graph> gen_planar(int count, std::uint64_t seed, Exec exec)
{
    std::vector<Graph> out(static_cast<std::size_t>(std::max(count, 0)));
    for_each_index(out.size(), exec, [&](std::size_t i) { out[i] = planar_graph(derive_seed(seed, i)); });
    return out;
}

Graph grid_graph(int rows, int cols)
{
    std::vector<Edge> edges;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            const int v = r * cols + c;
            if (c + 1 < cols)
                edges.emplace_back(v, v + 1);
            if (r + 1 < rows)
                edges.emplace_back(v, v + cols);
        }
    return make_graph(rows * cols, edges);
}

std::vector<Graph> gen_grid2d(int lo, int hi)
{
    std::vector<Graph> out;
    for (int a = lo; a <= hi; ++a)
        for (int b = a; b <= hi; ++b)
            out.push_back(grid_graph(a, b));
    return out;
}

std::vector<Graph> replicate(const std::vector<Graph>& graphs, int times, std::uint64_t seed)
{
    std::vector<Graph> out;
    out.reserve(graphs.size() * static_cast<std::size_t>(std::max(times, 0)));
    for (std::size_t i = 0; i < graphs.size(); ++i)
        for (int t = 0; t < times; ++t) {
            Rng rng(derive_seed(seed, i * static_cast<std::size_t>(times) + static_cast<std::size_t>(t)));
            std::vector<int> seq(static_cast<std::size_t>(graphs[i].num_nodes()));
            std::iota(seq.begin(), seq.end(), 0);
            rng.shuffle(seq);
            out.push_back(apply_ordering(graphs[i], Ordering::from_sequence(seq, OrderingFamily::Identity)));
        }
    return out;
}

std::vector<Graph> generate(const DatasetSpec& spec)
{
    if (spec.kind != DatasetKind::Grid2d && spec.kind != DatasetKind::File && spec.count < 1)
        throw InputError("dataset count must be >= 1");
    switch (spec.kind) {
    case DatasetKind::Community2: return gen_community2(spec.count, spec.seed);
    case DatasetKind::Planar: return gen_planar(spec.count, spec.seed);
    case DatasetKind::Grid2d: {
        auto grids = gen_grid2d();
        return spec.replicate > 1 ? replicate(grids, spec.replicate, spec.seed) : grids;
    }
    case DatasetKind::File: return load_jsonl(spec.path);
    }
    throw InputError("unknown dataset kind");
}

namespace {

Graph parse_graph_line(const std::string& line, std::size_t lineno)
{
    const auto where = "line " + std::to_string(lineno) + ": ";
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(where + "invalid JSON (" + e.what() + ")");
    }
    if (!j.is_object() || !j.contains("n") || !j.contains("edges") || !j["n"].is_number_integer() ||
        !j["edges"].is_array())
        throw FormatError(where + R"(expected {"n": <int>, "edges": [[u, v], ...]})");
    const auto n = j["n"].get<long long>();
    if (n < 1 || n > (1LL << 30))
        throw InputError(where + "node count " + std::to_string(n) + " out of range");
    std::vector<Edge> edges;
    edges.reserve(j["edges"].size());
    for (const auto& e : j["edges"]) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer())
            throw FormatError(where + "edge must be a pair of integers");
        const auto u = e[0].get<long long>();
        const auto v = e[1].get<long long>();
        if (u < 0 || v < 0 || u >= n || v >= n)
            throw InputError(where + "edge [" + std::to_string(u) + ", " + std::to_string(v) +
                             "] out of range for n = " + std::to_string(n));
        if (u >= v)
            throw FormatError(where + "edge [" + std::to_string(u) + ", " + std::to_string(v) +
                              "] must satisfy u < v");
        edges.emplace_back(static_cast<int>(u), static_cast<int>(v));
    }
    return make_graph(static_cast<int>(n), edges);
}

} // namespace

std::vector<Graph> parse_jsonl(std::istream& in)
{
    std::vector<Graph> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); }))
            continue;
        out.push_back(parse_graph_line(line, lineno));
    }
    return out;
}

std::vector<Graph> load_jsonl(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open " + path.string());
    return parse_jsonl(in);
}

std::string graph_to_json_line(const Graph& g)
{
    std::ostringstream os;
    os << "{\"n\":" << g.num_nodes() << ",\"edges\":[";
    bool first = true;
    for (const auto& [u, v] : g.edges()) {
        os << (first ? "" : ",") << '[' << u << ',' << v << ']';
        first = false;
    }
    os << "]}";
    return os.str();
}

void save_jsonl(const std::filesystem::path& path, const std::vector<Graph>& graphs)
{
    std::ofstream out(path);
    if (!out)
        throw InputError("cannot write " + path.string());
    for (const auto& g : graphs)
        out << graph_to_json_line(g) << '\n';
}

std::vector<Graph> filter_connected(const std::vector<Graph>& graphs)
{
    std::vector<Graph> out;
    for (const auto& g : graphs)
        if (is_connected(g))
            out.push_back(g);
    return out;
}

std::vector<Graph> filter_size(const std::vector<Graph>& graphs, int min_nodes, int max_nodes)
{
    std::vector<Graph> out;
    for (const auto& g : graphs)
        if (g.num_nodes() >= min_nodes && g.num_nodes() <= max_nodes)
            out.push_back(g);
    return out;
}

MeanStd mean_std(const std::vector<double>& xs)
{
    MeanStd r;
    if (xs.empty())
        return r;
    r.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs)
        ss += (x - r.mean) * (x - r.mean);
    r.std = std::sqrt(ss / static_cast<double>(xs.size()));
    return r;
}

double graph_savings(int n, int width)
{
    if (n < 2)
        return 1.0;
    return savings_factor(n, std::max(width, 1));
}

std::vector<int> cm_bandwidths(const std::vector<Graph>& graphs, const OrderingConfig& cfg, Exec exec)
{
    std::vector<int> out(graphs.size());
    for_each_index(graphs.size(), exec, [&](std::size_t i) {
        OrderingConfig local = cfg;
        local.family = OrderingFamily::CM;
        local.seed = derive_seed(cfg.seed, i);
        out[i] = bandwidth_of_ordering(graphs[i], cuthill_mckee(graphs[i], local));
    });
    return out;
}

BandwidthReport bandwidth_report(const std::vector<Graph>& graphs, const OrderingConfig& cfg,
                                 const std::string& dataset, Exec exec)
{
    if (graphs.empty())
        throw InputError("bandwidth report needs at least one graph");
    BandwidthReport r;
    r.dataset = dataset;
    r.count = graphs.size();
    r.per_graph_bandwidth = cm_bandwidths(graphs, cfg, exec);
    std::vector<double> nodes, bws;
    for (std::size_t i = 0; i < graphs.size(); ++i) {
        const int bw = r.per_graph_bandwidth[i];
        nodes.push_back(graphs[i].num_nodes());
        bws.push_back(bw);
        r.per_graph_savings.push_back(graph_savings(graphs[i].num_nodes(), bw));
        r.max_bandwidth = std::max(r.max_bandwidth, bw);
    }
    r.nodes = mean_std(nodes);
    r.bandwidth = mean_std(bws);
    r.savings = mean_std(r.per_graph_savings);
    return r;
}

std::string report_tsv_header()
{
    return "dataset\tn_mean\tn_std\tbw_mean\tbw_std\tsavings_mean\tsavings_std\tbw_max";
}

std::string report_tsv_row(const BandwidthReport& r)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, "%s\t%.6f\t%.6f\t%.6f\t%.6f\t%.6f\t%.6f\t%d", r.dataset.c_str(), r.nodes.mean,
                  r.nodes.std, r.bandwidth.mean, r.bandwidth.std, r.savings.mean, r.savings.std, r.max_bandwidth);
    return buf;
}

std::array<std::size_t, 3> split_sizes(std::size_t n, std::array<double, 3> fractions)
{
    double total = 0.0;
    for (double f : fractions) {
        if (f < 0.0)
            throw InputError("split fractions must be non-negative");
        total += f;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw InputError("split fractions must sum to 1");
    std::array<std::size_t, 3> sizes{};
    std::array<double, 3> rem{};
    std::size_t used = 0;
    for (std::size_t i = 0; i < 3; ++i) {
        const double exact = fractions[i] * static_cast<double>(n);
        sizes[i] = static_cast<std::size_t>(std::floor(exact + 1e-9));
        rem[i] = exact - static_cast<double>(sizes[i]);
        used += sizes[i];
    }
    std::array<std::size_t, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
    for (std::size_t k = 0; used < n; ++k, ++used)
        ++sizes[order[k % 3]];
    return sizes;
}

Split split(const std::vector<Graph>& graphs, std::array<double, 3> fractions, std::uint64_t seed)
{
    const auto sizes = split_sizes(graphs.size(), fractions);
    std::vector<std::size_t> idx(graphs.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(idx);
    Split s;
    std::size_t k = 0;
    for (std::size_t i = 0; i < sizes[0]; ++i)
        s.train.push_back(graphs[idx[k++]]);
    for (std::size_t i = 0; i < sizes[1]; ++i)
        s.val.push_back(graphs[idx[k++]]);
    for (std::size_t i = 0; i < sizes[2]; ++i)
        s.test.push_back(graphs[idx[k++]]);
    return s;
}

} // namespace bandgen
