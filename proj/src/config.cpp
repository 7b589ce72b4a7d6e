#include "bandgen/config.hpp"

#include "bandgen/error.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace bandgen {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& v)
{
    T out{};
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc{} || ptr != end)
        throw InputError("config key '" + key + "': cannot parse '" + v + "'");
    return out;
}

std::string fmt_double(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

struct Field {
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

template <typename T>
Field number_field(const std::string& key, T RunConfig::*outer)
{
    return {[key, outer](RunConfig& c, const std::string& v) { c.*outer = parse_number<T>(key, v); },
            [outer](const RunConfig& c) {
                if constexpr (std::is_floating_point_v<T>)
                    return fmt_double(c.*outer);
                else
                    return std::to_string(c.*outer);
            }};
}

template <typename S, typename T>
Field nested_field(const std::string& key, S RunConfig::*outer, T S::*inner)
{
    return {[key, outer, inner](RunConfig& c, const std::string& v) { (c.*outer).*inner = parse_number<T>(key, v); },
            [outer, inner](const RunConfig& c) {
                if constexpr (std::is_floating_point_v<T>)
                    return fmt_double((c.*outer).*inner);
                else
                    return std::to_string((c.*outer).*inner);
            }};
}

const std::map<std::string, Field>& fields()
{
    static const std::map<std::string, Field> table = [] {
        std::map<std::string, Field> t;
        t["hidden"] = nested_field("hidden", &RunConfig::model, &ModelConfig::hidden);
        t["gru_layers"] = nested_field("gru_layers", &RunConfig::model, &ModelConfig::gru_layers);
        t["mlp_hidden"] = nested_field("mlp_hidden", &RunConfig::model, &ModelConfig::mlp_hidden);
        t["lr"] = nested_field("lr", &RunConfig::model, &ModelConfig::lr);
        t["weight_decay"] = nested_field("weight_decay", &RunConfig::model, &ModelConfig::weight_decay);
        t["epochs"] = nested_field("epochs", &RunConfig::model, &ModelConfig::epochs);
        t["batches_per_epoch"] = nested_field("batches_per_epoch", &RunConfig::model, &ModelConfig::batches_per_epoch);
        t["val_batches"] = nested_field("val_batches", &RunConfig::model, &ModelConfig::val_batches);
        t["batch_size"] = nested_field("batch_size", &RunConfig::model, &ModelConfig::batch_size);
        t["max_nodes"] = nested_field("max_nodes", &RunConfig::model, &ModelConfig::max_nodes);
        t["seed"] = nested_field("seed", &RunConfig::model, &ModelConfig::seed);
        t["bn_momentum"] = nested_field("bn_momentum", &RunConfig::model, &ModelConfig::bn_momentum);
        t["bn_eps"] = nested_field("bn_eps", &RunConfig::model, &ModelConfig::bn_eps);
        t["degree_sigma"] = nested_field("degree_sigma", &RunConfig::metrics, &MetricConfig::degree_sigma);
        t["cluster_sigma"] = nested_field("cluster_sigma", &RunConfig::metrics, &MetricConfig::cluster_sigma);
        t["spectra_sigma"] = nested_field("spectra_sigma", &RunConfig::metrics, &MetricConfig::spectra_sigma);
        t["orbit_sigma"] = nested_field("orbit_sigma", &RunConfig::metrics, &MetricConfig::orbit_sigma);
        t["pr_k"] = nested_field("pr_k", &RunConfig::metrics, &MetricConfig::pr_k);
        t["pr_bins"] = nested_field("pr_bins", &RunConfig::metrics, &MetricConfig::pr_bins);
        t["clustering_bins"] = {
            [](RunConfig& c, const std::string& v) { c.metrics.stats.clustering_bins = parse_number<int>("clustering_bins", v); },
            [](const RunConfig& c) { return std::to_string(c.metrics.stats.clustering_bins); }};
        t["spectrum_bins"] = {
            [](RunConfig& c, const std::string& v) { c.metrics.stats.spectrum_bins = parse_number<int>("spectrum_bins", v); },
            [](const RunConfig& c) { return std::to_string(c.metrics.stats.spectrum_bins); }};
        t["mode"] = {[](RunConfig& c, const std::string& v) {
                         parse_width_mode(v);
                         c.mode = v;
                     },
                     [](const RunConfig& c) { return c.mode; }};
        t["ordering_seed"] = number_field("ordering_seed", &RunConfig::ordering_seed);
        t["bfs_samples"] = number_field("bfs_samples", &RunConfig::bfs_samples);
        t["val_fraction"] = number_field("val_fraction", &RunConfig::val_fraction);
        t["temperature"] = nested_field("temperature", &RunConfig::model, &ModelConfig::temperature);
        t["workers"] = number_field("workers", &RunConfig::workers);
        return t;
    }();
    return table;
}

} // namespace

void RunConfig::set(const std::string& key, const std::string& value)
{
    const auto it = fields().find(key);
    if (it == fields().end())
        throw InputError("unknown config key '" + key + "'");
    it->second.set(*this, value);
}

std::map<std::string, std::string> RunConfig::echo() const
{
    std::map<std::string, std::string> out;
    for (const auto& [key, field] : fields())
        out[key] = field.get(*this);
    return out;
}

std::string fnv1a_hex(const std::string& s)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string RunConfig::hash() const
{
    std::string canon;
    for (const auto& [k, v] : echo())
        canon += k + "=" + v + "\n";
    return fnv1a_hex(canon);
}

std::map<std::string, std::string> parse_kv(const std::string& text)
{
    std::map<std::string, std::string> out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw FormatError("config line " + std::to_string(lineno) + ": expected key = value");
        const auto key = trim(line.substr(0, eq));
        auto value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        if (key.empty())
            throw FormatError("config line " + std::to_string(lineno) + ": empty key");
        out[key] = value;
    }
    return out;
}

std::map<std::string, std::string> load_kv_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_kv(ss.str());
}

void apply_kv(RunConfig& cfg, const std::map<std::string, std::string>& kv)
{
    for (const auto& [k, v] : kv)
        cfg.set(k, v);
}

} // namespace bandgen
