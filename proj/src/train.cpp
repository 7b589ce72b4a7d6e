#include "bandgen/error.hpp"
#include "bandgen/model.hpp"
#include "bandgen/metrics.hpp"
#include "bandgen/parallel.hpp"
#include "bandgen/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace bandgen {

OrderingConfig mode_ordering(WidthMode mode, std::uint64_t seed)
{
    OrderingConfig cfg;
    cfg.family = mode == WidthMode::BwR ? OrderingFamily::CM : OrderingFamily::BFS;
    cfg.tie_break = TieBreak::Random;
    cfg.seed = seed;
    return cfg;
}

Ordering fitting_ordering(const Graph& g, WidthMode mode, std::uint64_t seed, int width)
{
    int best = std::numeric_limits<int>::max();
    for (int attempt = 0; attempt < kOrderingRedraws; ++attempt) {
        auto o = make_ordering(g, mode_ordering(mode, attempt == 0 ? seed : derive_seed(seed, attempt)));
        const int bw = bandwidth_of_ordering(g, o);
        if (bw <= width)
            return o;
        best = std::min(best, bw);
    }
    // Re-run the band check on the last draw to report a concrete edge.
    auto o = make_ordering(g, mode_ordering(mode, seed));
    band_reparameterize(g, o, width);
    throw BandOverflowError(-1, -1, best, width);
}

TrainSequence graph_sequence(const Graph& g, const Ordering& o, int width)
{
    return to_sequence(band_reparameterize(g, o, width));
}

WidthEstimate estimate_row_width(const std::vector<Graph>& graphs, WidthMode mode, std::uint64_t seed,
                                 int bfs_samples)
{
    if (graphs.empty())
        throw InputError("row width estimate needs a non-empty training set");
    WidthEstimate est;
    if (mode == WidthMode::BwR) {
        est.samples.resize(graphs.size());
        for_each_index(graphs.size(), Exec::Parallel, [&](std::size_t i) {
            est.samples[i] = bandwidth_of_ordering(graphs[i], cuthill_mckee(graphs[i], mode_ordering(mode, derive_seed(seed, i))));
        });
        est.band = *std::max_element(est.samples.begin(), est.samples.end());
    } else {
        if (bfs_samples < 1)
            throw InputError("baseline width estimate needs at least one BFS sample");
        est.samples.resize(static_cast<std::size_t>(bfs_samples));
        for_each_index(est.samples.size(), Exec::Parallel, [&](std::size_t s) {
            const auto& g = graphs[s % graphs.size()];
            est.samples[s] = bandwidth_of_ordering(g, bfs_order(g, mode_ordering(mode, derive_seed(seed, s))));
        });
        std::vector<int> sorted = est.samples;
        std::sort(sorted.begin(), sorted.end());
        const auto rank = static_cast<std::size_t>(std::ceil(0.999 * static_cast<double>(sorted.size())));
        est.band = sorted[std::max<std::size_t>(rank, 1) - 1];
    }
    est.row_width = std::max(2, est.band + 1);
    return est;
}

namespace {

std::vector<TrainSequence> make_sequences(const std::vector<Graph>& graphs, WidthMode mode, std::uint64_t seed,
                                          int width)
{
    std::vector<TrainSequence> out(graphs.size());
    for (std::size_t i = 0; i < graphs.size(); ++i)
        out[i] = graph_sequence(graphs[i], fitting_ordering(graphs[i], mode, derive_seed(seed, i), width), width);
    return out;
}

std::vector<const TrainSequence*> cyclic_batch(const std::vector<TrainSequence>& seqs,
                                               const std::vector<std::size_t>& order, std::size_t start,
                                               std::size_t size)
{
    std::vector<const TrainSequence*> batch;
    for (std::size_t k = 0; k < size; ++k)
        batch.push_back(&seqs[order[(start + k) % order.size()]]);
    return batch;
}

} // namespace

TrainResult train(const ModelParams& init, const ModelConfig& cfg, const std::vector<Graph>& train_graphs,
                  const std::vector<Graph>& val_graphs, WidthMode mode, std::uint64_t ordering_seed)
{
    cfg.validate();
    if (train_graphs.empty())
        throw InputError("training set is empty");
    const int width = cfg.row_width - 1;

    TrainResult result;
    ModelParams params = init;
    AdamW opt(params);
    const long total_steps = static_cast<long>(cfg.epochs) * cfg.batches_per_epoch;
    long step = 0;

    const auto val_seqs = make_sequences(val_graphs, mode, derive_seed(ordering_seed, 0x7661ULL), width);
    std::vector<std::size_t> val_order(val_seqs.size());
    std::iota(val_order.begin(), val_order.end(), std::size_t{0});

    double best_val = std::numeric_limits<double>::infinity();
    result.params = params;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto seqs = make_sequences(train_graphs, mode, derive_seed(ordering_seed, 1000 + static_cast<std::uint64_t>(epoch)), width);
        std::vector<std::size_t> order(seqs.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(epoch)));
        rng.shuffle(order);

        EpochRecord rec;
        rec.epoch = epoch;
        rec.lr = cosine_lr(cfg.lr, step, total_steps);
        double loss_sum = 0.0;
        for (int b = 0; b < cfg.batches_per_epoch; ++b) {
            const auto batch = pack_sequences(
                cyclic_batch(seqs, order, static_cast<std::size_t>(b) * static_cast<std::size_t>(cfg.batch_size),
                             static_cast<std::size_t>(cfg.batch_size)));
            ForwardCache cache;
            const Matrix logits =
                forward(params, batch, NormMode::Train, &cache, true, cfg.bn_momentum, cfg.bn_eps);
            loss_sum += loss_bce(logits, batch.targets);
            const ModelParams grad = backward(params, batch, cache, cfg.bn_eps);
            opt.update(params, grad, cosine_lr(cfg.lr, step, total_steps), cfg.weight_decay);
            ++step;
        }
        if (!params.all_finite())
            throw NumericError("non-finite parameters after epoch " + std::to_string(epoch));
        rec.train_bce = loss_sum / cfg.batches_per_epoch;

        if (!val_seqs.empty() && cfg.val_batches > 0) {
            double val_sum = 0.0;
            for (int b = 0; b < cfg.val_batches; ++b) {
                const auto batch = pack_sequences(cyclic_batch(
                    val_seqs, val_order, static_cast<std::size_t>(b) * static_cast<std::size_t>(cfg.batch_size),
                    static_cast<std::size_t>(cfg.batch_size)));
                val_sum += loss_bce(forward(params, batch, NormMode::Eval, nullptr, false, cfg.bn_momentum, cfg.bn_eps),
                                    batch.targets);
            }
            rec.val_bce = val_sum / cfg.val_batches;
        } else {
            rec.val_bce = rec.train_bce;
        }
        result.history.push_back(rec);
        if (rec.val_bce < best_val) {
            best_val = rec.val_bce;
            result.params = params;
            result.best_epoch = epoch;
        }
    }
    if (cfg.epochs == 0)
        result.params = params;
    return result;
}

Graph sample_graph(const ModelParams& params, const ModelConfig& cfg, std::uint64_t seed)
{
    const int d = cfg.row_width;
    if (params.input_width() != d)
        throw InputError("model width does not match configuration");
    Rng rng(seed);
    Stepper stepper(params, cfg.bn_eps);
    RowVector input = RowVector::Zero(d);
    input(0) = 1.0;
    BandMatrix band;
    band.width = d - 1;
    while (band.n < cfg.max_nodes) {
        const RowVector logits = stepper.step(input);
        const int node = band.n;
        RowVector next = RowVector::Zero(d);
        for (int c = 0; c < d; ++c) {
            const double p = 1.0 / (1.0 + std::exp(-logits(c) / cfg.temperature));
            next(c) = rng.uniform() < p ? 1.0 : 0.0;
        }
        // A graph has at least one node, and row `node` can only reach earlier nodes.
        if (node > 0 && next(0) == 1.0)
            break;
        next(0) = 0.0;
        std::vector<std::uint8_t> row(static_cast<std::size_t>(std::min(node, d - 1)));
        for (int k = 0; k < d - 1; ++k) {
            if (k < node)
                row[static_cast<std::size_t>(k)] = next(k + 1) != 0.0;
            else
                next(k + 1) = 0.0;
        }
        band.rows.push_back(std::move(row));
        ++band.n;
        input = next;
    }
    return band_expand(band, Ordering::identity(band.n));
}

std::vector<Graph> sample(const ModelParams& params, const ModelConfig& cfg, int count, std::uint64_t seed)
{
    std::vector<Graph> out(static_cast<std::size_t>(std::max(count, 0)));
    for_each_index(out.size(), Exec::Parallel,
                   [&](std::size_t i) { out[i] = sample_graph(params, cfg, derive_seed(seed, i)); });
    return out;
}

namespace {

Matrix eval_logits(const ModelParams& params, const ModelConfig& cfg, const PackedBatch& batch)
{
    ModelParams& mutable_params = const_cast<ModelParams&>(params); // Eval mode never writes running stats.
    return forward(mutable_params, batch, NormMode::Eval, nullptr, false, cfg.bn_momentum, cfg.bn_eps);
}

} // namespace

double log_likelihood(const ModelParams& params, const ModelConfig& cfg, const Graph& g, WidthMode mode,
                      std::uint64_t seed)
{
    const int width = cfg.row_width - 1;
    const auto seq = graph_sequence(g, fitting_ordering(g, mode, seed, width), width);
    const auto batch = pack_sequences(std::vector<const TrainSequence*>{&seq});
    return -sum_bce(eval_logits(params, cfg, batch), batch.targets);
}

Reconstruction reconstruct(const ModelParams& params, const ModelConfig& cfg, const Graph& g, WidthMode mode,
                           std::uint64_t seed)
{
    const int width = cfg.row_width - 1;
    const auto seq = graph_sequence(g, fitting_ordering(g, mode, seed, width), width);
    const auto batch = pack_sequences(std::vector<const TrainSequence*>{&seq});
    const Matrix logits = eval_logits(params, cfg, batch);
    Reconstruction r;
    for (Eigen::Index i = 0; i < logits.rows(); ++i)
        for (Eigen::Index j = 0; j < logits.cols(); ++j) {
            r.probs.push_back(1.0 / (1.0 + std::exp(-logits(i, j))));
            r.targets.push_back(batch.targets(i, j) != 0.0);
        }
    return r;
}

double reconstruction_auprc(const ModelParams& params, const ModelConfig& cfg, const std::vector<Graph>& graphs,
                            WidthMode mode, std::uint64_t seed)
{
    std::vector<Reconstruction> parts(graphs.size());
    for_each_index(graphs.size(), Exec::Parallel,
                   [&](std::size_t i) { parts[i] = reconstruct(params, cfg, graphs[i], mode, derive_seed(seed, i)); });
    std::vector<double> probs;
    std::vector<std::uint8_t> targets;
    for (const auto& p : parts) {
        probs.insert(probs.end(), p.probs.begin(), p.probs.end());
        targets.insert(targets.end(), p.targets.begin(), p.targets.end());
    }
    return average_precision(probs, targets);
}

SearchResult random_search(const SearchSpace& space, int trials, std::uint64_t seed,
                           const std::function<double(double, double)>& objective)
{
    if (trials < 1)
        throw InputError("random search needs at least one trial");
    if (!(space.lr_lo > 0.0 && space.lr_hi >= space.lr_lo && space.wd_lo > 0.0 && space.wd_hi >= space.wd_lo))
        throw InputError("search ranges must be positive and ordered");
    Rng rng(seed);
    const auto log_uniform = [&](double lo, double hi) { return std::exp(rng.uniform(std::log(lo), std::log(hi))); };
    SearchResult res;
    for (int t = 0; t < trials; ++t) {
        Trial trial;
        trial.lr = log_uniform(space.lr_lo, space.lr_hi);
        trial.weight_decay = log_uniform(space.wd_lo, space.wd_hi);
        res.trials.push_back(trial);
    }
    for (auto& trial : res.trials)
        trial.objective = objective(trial.lr, trial.weight_decay);
    res.best = *std::min_element(res.trials.begin(), res.trials.end(),
                                 [](const Trial& a, const Trial& b) { return a.objective < b.objective; });
    return res;
}

nlohmann::json checkpoint_to_json(const Checkpoint& ck)
{
    nlohmann::json j;
    j["format"] = "bandgen-checkpoint/1";
    j["config"] = ck.config;
    j["mode"] = to_string(ck.mode);
    j["ordering_family"] = to_string(mode_ordering(ck.mode, 0).family);
    j["ordering_seed"] = ck.ordering_seed;
    j["d"] = ck.config.row_width;
    j["config_hash"] = ck.config_hash;
    const auto dump = [](const Matrix& m) {
        std::vector<double> flat;
        flat.reserve(static_cast<std::size_t>(m.size()));
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index k = 0; k < m.cols(); ++k)
                flat.push_back(m(i, k));
        return nlohmann::json{{"shape", {m.rows(), m.cols()}}, {"data", flat}};
    };
    auto& tensors = j["tensors"];
    tensors = nlohmann::json::object();
    for (const auto& [name, t] : ck.params.tensors())
        tensors[name] = dump(*t);
    auto& buffers = j["buffers"];
    buffers = nlohmann::json::object();
    for (const auto& [name, t] : ck.params.buffers())
        buffers[name] = dump(*t);
    auto& hist = j["history"];
    hist = nlohmann::json::array();
    for (const auto& r : ck.history)
        hist.push_back({{"epoch", r.epoch}, {"train_bce", r.train_bce}, {"val_bce", r.val_bce}, {"lr", r.lr}});
    j["best_epoch"] = ck.best_epoch;
    return j;
}

Checkpoint checkpoint_from_json(const nlohmann::json& j)
{
    try {
        if (j.at("format") != "bandgen-checkpoint/1")
            throw FormatError("unsupported checkpoint format");
        Checkpoint ck;
        ck.config = j.at("config").get<ModelConfig>();
        ck.mode = parse_width_mode(j.at("mode").get<std::string>());
        ck.ordering_seed = j.at("ordering_seed").get<std::uint64_t>();
        ck.config_hash = j.value("config_hash", "");
        ck.best_epoch = j.value("best_epoch", 0);
        ck.params = ModelParams::init(ck.config, 0);
        const auto load = [](const nlohmann::json& t, Matrix& m, const std::string& name) {
            const auto shape = t.at("shape").get<std::vector<Eigen::Index>>();
            const auto data = t.at("data").get<std::vector<double>>();
            if (shape.size() != 2 || shape[0] != m.rows() || shape[1] != m.cols() ||
                data.size() != static_cast<std::size_t>(m.size()))
                throw FormatError("tensor '" + name + "' has an unexpected shape");
            std::size_t k = 0;
            for (Eigen::Index r = 0; r < m.rows(); ++r)
                for (Eigen::Index c = 0; c < m.cols(); ++c)
                    m(r, c) = data[k++];
        };
        for (auto& [name, t] : ck.params.tensors())
            load(j.at("tensors").at(name), *t, name);
        for (auto& [name, t] : ck.params.buffers())
            load(j.at("buffers").at(name), *t, name);
        for (const auto& r : j.at("history"))
            ck.history.push_back({r.at("epoch").get<int>(), r.at("train_bce").get<double>(),
                                  r.at("val_bce").get<double>(), r.at("lr").get<double>()});
        return ck;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed checkpoint: ") + e.what());
    }
}

} // namespace bandgen
