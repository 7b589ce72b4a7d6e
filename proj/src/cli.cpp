#include "bandgen/cli.hpp"

#include "bandgen/config.hpp"
#include "bandgen/datasets.hpp"
#include "bandgen/error.hpp"
#include "bandgen/metrics.hpp"
#include "bandgen/model.hpp"
#include "bandgen/parallel.hpp"
#include "bandgen/rng.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

namespace bandgen {

namespace {

using nlohmann::json;

std::uint64_t default_seed()
{
    if (const char* env = std::getenv("BANDGEN_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw InputError(std::string("BANDGEN_SEED is not an integer: ") + env);
        }
    }
    return 0;
}

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw InputError("cannot write " + path);
    out << text;
}

json read_json(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw FormatError(path + ": " + e.what());
    }
}

/// Sidecar for formats without room for metadata (JSON lines).
void write_meta(const std::string& path, const json& meta)
{
    write_text(path + ".meta.json", meta.dump(2) + "\n");
}

RunConfig resolve_config(const std::string& config_path, const std::map<std::string, std::string>& flag_values)
{
    RunConfig cfg;
    apply_kv(cfg, flag_values);
    if (!config_path.empty())
        apply_kv(cfg, load_kv_file(config_path));
    cfg.model.validate();
    set_num_workers(cfg.workers);
    return cfg;
}

json echo_json(const RunConfig& cfg)
{
    json j = json::object();
    for (const auto& [k, v] : cfg.echo())
        j[k] = v;
    return j;
}

std::string pgm(const Graph& g, const std::string& hash)
{
    const int n = g.num_nodes();
    std::ostringstream os;
    os << "P2\n# config_hash=" << hash << '\n' << n << ' ' << n << "\n255\n";
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j)
            os << (j ? " " : "") << (g.has_edge(i, j) ? 0 : 255);
        os << '\n';
    }
    return os.str();
}

struct TrainOutcome {
    Checkpoint checkpoint;
    std::vector<Graph> val;
};

TrainOutcome train_from_data(const std::vector<Graph>& data, const std::vector<Graph>* val_in, RunConfig cfg)
{
    const auto mode = parse_width_mode(cfg.mode);
    std::vector<Graph> train_set, val_set;
    if (val_in) {
        train_set = data;
        val_set = *val_in;
    } else {
        auto s = split(data, {1.0 - cfg.val_fraction, cfg.val_fraction, 0.0}, cfg.model.seed);
        train_set = std::move(s.train);
        val_set = std::move(s.val);
    }
    if (train_set.empty())
        throw InputError("training split is empty");
    std::vector<Graph> width_set = train_set;
    width_set.insert(width_set.end(), val_set.begin(), val_set.end());
    const auto est = estimate_row_width(width_set, mode, cfg.ordering_seed, cfg.bfs_samples);
    cfg.model.row_width = est.row_width;

    const auto init = ModelParams::init(cfg.model, cfg.model.seed);
    auto result = train(init, cfg.model, train_set, val_set, mode, cfg.ordering_seed);

    TrainOutcome out;
    out.checkpoint.config = cfg.model;
    out.checkpoint.mode = mode;
    out.checkpoint.ordering_seed = cfg.ordering_seed;
    out.checkpoint.params = std::move(result.params);
    out.checkpoint.history = std::move(result.history);
    out.checkpoint.best_epoch = result.best_epoch;
    out.checkpoint.config_hash = cfg.hash();
    out.val = std::move(val_set);
    return out;
}

json eval_report(const Checkpoint& ck, const std::vector<Graph>& test, const std::vector<Graph>& generated,
                 const RunConfig& cfg, std::uint64_t seed)
{
    const auto mmd = mmd_suite(generated, test, cfg.metrics);
    const auto pr = f1_pr(generated, test, cfg.metrics);
    const double auprc = reconstruction_auprc(ck.params, ck.config, test, ck.mode, seed);
    std::vector<double> ll(test.size());
    for_each_index(test.size(), Exec::Parallel,
                   [&](std::size_t i) { ll[i] = log_likelihood(ck.params, ck.config, test[i], ck.mode, derive_seed(seed, i)); });
    double mean_ll = 0.0;
    for (double x : ll)
        mean_ll += x;
    mean_ll /= static_cast<double>(test.size());

    json j;
    j["mmd"] = {{"degree", mmd.degree}, {"cluster", mmd.cluster}, {"orbit", mmd.orbit}, {"spectra", mmd.spectra},
                {"mean", mmd.mean}};
    j["f1_pr"] = {{"precision", pr.precision}, {"recall", pr.recall}, {"f1", pr.f1}};
    j["auprc"] = auprc;
    j["mean_ll"] = mean_ll;
    j["mode"] = to_string(ck.mode);
    j["d"] = ck.config.row_width;
    j["test_count"] = test.size();
    j["generated_count"] = generated.size();
    j["eval_seed"] = seed;
    j["checkpoint_config_hash"] = ck.config_hash;
    j["config_echo"] = echo_json(cfg);
    j["config_hash"] = cfg.hash();
    return j;
}

RunConfig config_from_checkpoint(const Checkpoint& ck)
{
    RunConfig cfg;
    cfg.model = ck.config;
    cfg.mode = to_string(ck.mode);
    cfg.ordering_seed = ck.ordering_seed;
    return cfg;
}

double first_savings_from_report(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open " + path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("dataset\t", 0) == 0)
            continue;
        std::istringstream row(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(row, cell, '\t'))
            cells.push_back(cell);
        if (cells.size() < 8)
            throw FormatError(path + ": report row has " + std::to_string(cells.size()) + " columns");
        return std::stod(cells[5]);
    }
    throw FormatError(path + ": no report row");
}

} // namespace

int exit_code_for(const std::string& category)
{
    if (category == "input")
        return 2;
    if (category == "format")
        return 3;
    if (category == "capability")
        return 4;
    if (category == "numeric")
        return 5;
    return 1;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Bandwidth-restricted graph generation toolkit", "bandgen"};
    app.require_subcommand(1);
    int workers = 1;
    app.add_option("--workers", workers, "Threads for per-graph stages")->check(CLI::PositiveNumber);

    std::optional<std::uint64_t> seed_flag;
    std::string config_path;

    // dataset
    auto* ds = app.add_subcommand("dataset", "Generate a synthetic dataset as JSON lines");
    std::string ds_kind, ds_out;
    int ds_count = 1, ds_replicate = 1;
    ds->add_option("--kind", ds_kind)->required()->check(CLI::IsMember({"community2", "planar", "grid2d"}));
    ds->add_option("--count", ds_count)->check(CLI::PositiveNumber);
    ds->add_option("--replicate", ds_replicate, "Grid2d: relabelled copies per grid")->check(CLI::PositiveNumber);
    ds->add_option("--seed", seed_flag);
    ds->add_option("--out", ds_out)->required();

    // report
    auto* rp = app.add_subcommand("report", "C-M bandwidth and savings-factor report");
    std::string rp_in, rp_out, rp_order = "cm", rp_name, rp_per_graph;
    rp->add_option("--in", rp_in)->required();
    rp->add_option("--order", rp_order)->check(CLI::IsMember({"cm"}));
    rp->add_option("--seed", seed_flag);
    rp->add_option("--name", rp_name, "Dataset label (defaults to the file stem)");
    rp->add_option("--out", rp_out)->required();
    rp->add_option("--per-graph", rp_per_graph, "Optional per-graph TSV");

    // train
    auto* tr = app.add_subcommand("train", "Train a band-row generator");
    std::string tr_data, tr_val, tr_mode = "bwr", tr_out;
    tr->add_option("--data", tr_data)->required();
    tr->add_option("--val", tr_val, "Validation file (default: split from --data)");
    tr->add_option("--mode", tr_mode)->check(CLI::IsMember({"bwr", "baseline"}));
    tr->add_option("--config", config_path);
    tr->add_option("--seed", seed_flag);
    tr->add_option("--out", tr_out)->required();

    // sample
    auto* sm = app.add_subcommand("sample", "Sample graphs from a checkpoint");
    std::string sm_ckpt, sm_out;
    int sm_count = 1;
    std::optional<double> temp_flag;
    sm->add_option("--ckpt", sm_ckpt)->required();
    sm->add_option("--count", sm_count)->check(CLI::PositiveNumber);
    sm->add_option("--temp", temp_flag)->check(CLI::PositiveNumber);
    sm->add_option("--seed", seed_flag);
    sm->add_option("--out", sm_out)->required();

    // eval
    auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint against a test set");
    std::string ev_ckpt, ev_test, ev_generated, ev_out;
    std::optional<int> ev_count;
    ev->add_option("--ckpt", ev_ckpt)->required();
    ev->add_option("--test", ev_test)->required();
    ev->add_option("--generated", ev_generated, "Use these graphs instead of sampling");
    ev->add_option("--count", ev_count, "Samples to draw (default: test size)");
    ev->add_option("--temp", temp_flag)->check(CLI::PositiveNumber);
    ev->add_option("--seed", seed_flag);
    ev->add_option("--config", config_path, "Metric overrides");
    ev->add_option("--out", ev_out)->required();

    // hyperopt
    auto* ho = app.add_subcommand("hyperopt", "Log-uniform random search over lr and weight decay");
    std::string ho_data, ho_mode = "bwr", ho_objective = "mmd", ho_out;
    int ho_trials = 5;
    ho->add_option("--data", ho_data)->required();
    ho->add_option("--mode", ho_mode)->check(CLI::IsMember({"bwr", "baseline"}));
    ho->add_option("--config", config_path);
    ho->add_option("--trials", ho_trials)->check(CLI::PositiveNumber);
    ho->add_option("--objective", ho_objective)->check(CLI::IsMember({"mmd", "mmd-auprc"}));
    ho->add_option("--seed", seed_flag);
    ho->add_option("--out", ho_out)->required();

    // reorder
    auto* ro = app.add_subcommand("reorder", "Print the bandwidth before and after C-M and draw A^pi");
    std::string ro_in, ro_from = "identity", ro_pgm, ro_pgm_before;
    int ro_index = 0;
    ro->add_option("--in", ro_in)->required();
    ro->add_option("--index", ro_index)->check(CLI::NonNegativeNumber);
    ro->add_option("--from", ro_from, "Ordering measured before C-M")->check(CLI::IsMember({"identity", "bfs", "dfs"}));
    ro->add_option("--seed", seed_flag);
    ro->add_option("--pgm", ro_pgm, "Graymap of the C-M ordered adjacency matrix");
    ro->add_option("--pgm-before", ro_pgm_before, "Graymap of the adjacency matrix before C-M");

    // analyze
    auto* an = app.add_subcommand("analyze", "Spearman correlation of savings factor vs log-likelihood gain");
    std::vector<std::string> an_runs;
    std::string an_out;
    an->add_option("--run", an_runs, "NAME=report.tsv,baseline_eval.json,bwr_eval.json")->required();
    an->add_option("--out", an_out);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: input: " << e.what() << '\n';
        return exit_code_for("input");
    }

    try {
        set_num_workers(workers);
        const std::uint64_t seed = seed_flag ? *seed_flag : default_seed();

        if (*ds) {
            DatasetSpec spec;
            spec.kind = parse_dataset_kind(ds_kind);
            spec.count = ds_count;
            spec.seed = seed;
            spec.replicate = ds_replicate;
            const auto graphs = generate(spec);
            save_jsonl(ds_out, graphs);
            const json meta{{"kind", ds_kind},
                            {"count", graphs.size()},
                            {"seed", seed},
                            {"replicate", ds_replicate},
                            {"config_hash", fnv1a_hex(ds_kind + ":" + std::to_string(ds_count) + ":" +
                                                      std::to_string(seed) + ":" + std::to_string(ds_replicate))}};
            write_meta(ds_out, meta);
            out << "wrote " << graphs.size() << " graphs to " << ds_out << '\n';
        } else if (*rp) {
            const auto graphs = load_jsonl(rp_in);
            OrderingConfig ocfg;
            ocfg.seed = seed;
            const auto name = rp_name.empty() ? std::filesystem::path(rp_in).stem().string() : rp_name;
            const auto report = bandwidth_report(graphs, ocfg, name);
            const auto hash = fnv1a_hex("report:cm:" + std::to_string(seed));
            write_text(rp_out, "# config_hash=" + hash + "\n" + report_tsv_header() + "\n" + report_tsv_row(report) + "\n");
            if (!rp_per_graph.empty()) {
                std::ostringstream os;
                os << "# config_hash=" << hash << "\nindex\tn\tbandwidth\tsavings\n";
                for (std::size_t i = 0; i < graphs.size(); ++i)
                    os << i << '\t' << graphs[i].num_nodes() << '\t' << report.per_graph_bandwidth[i] << '\t'
                       << std::setprecision(17) << report.per_graph_savings[i] << '\n';
                write_text(rp_per_graph, os.str());
            }
            out << report_tsv_row(report) << '\n';
        } else if (*tr) {
            std::map<std::string, std::string> flags{{"mode", tr_mode}};
            if (seed_flag) {
                flags["seed"] = std::to_string(*seed_flag);
                flags["ordering_seed"] = std::to_string(*seed_flag);
            } else if (std::getenv("BANDGEN_SEED")) {
                flags["seed"] = std::to_string(seed);
                flags["ordering_seed"] = std::to_string(seed);
            }
            flags["workers"] = std::to_string(workers);
            const auto cfg = resolve_config(config_path, flags);
            const auto data = load_jsonl(tr_data);
            std::vector<Graph> val;
            if (!tr_val.empty())
                val = load_jsonl(tr_val);
            const auto outcome = train_from_data(data, tr_val.empty() ? nullptr : &val, cfg);
            write_text(tr_out, checkpoint_to_json(outcome.checkpoint).dump(1) + "\n");
            const auto& h = outcome.checkpoint.history;
            out << "mode " << cfg.mode << " d=" << outcome.checkpoint.config.row_width << " epochs=" << h.size();
            if (!h.empty())
                out << " train_bce " << h.front().train_bce << " -> " << h.back().train_bce << " best_val "
                    << h[static_cast<std::size_t>(outcome.checkpoint.best_epoch)].val_bce;
            out << '\n';
        } else if (*sm) {
            auto ck = checkpoint_from_json(read_json(sm_ckpt));
            if (temp_flag)
                ck.config.temperature = *temp_flag;
            const auto graphs = sample(ck.params, ck.config, sm_count, seed);
            save_jsonl(sm_out, graphs);
            auto cfg = config_from_checkpoint(ck);
            write_meta(sm_out, {{"checkpoint", sm_ckpt}, {"count", sm_count}, {"seed", seed},
                                {"temperature", ck.config.temperature}, {"config_hash", cfg.hash()}});
            out << "wrote " << graphs.size() << " graphs to " << sm_out << '\n';
        } else if (*ev) {
            auto ck = checkpoint_from_json(read_json(ev_ckpt));
            if (temp_flag)
                ck.config.temperature = *temp_flag;
            auto cfg = config_from_checkpoint(ck);
            if (!config_path.empty())
                apply_kv(cfg, load_kv_file(config_path));
            // Model shape comes from the checkpoint; only metric keys may change.
            const int d = ck.config.row_width;
            cfg.model = ck.config;
            cfg.model.row_width = d;
            const auto test = load_jsonl(ev_test);
            if (test.empty())
                throw InputError("test set is empty");
            std::vector<Graph> generated;
            if (!ev_generated.empty())
                generated = load_jsonl(ev_generated);
            else
                generated = sample(ck.params, ck.config, ev_count.value_or(static_cast<int>(test.size())), seed);
            const auto report = eval_report(ck, test, generated, cfg, seed);
            write_text(ev_out, report.dump(2) + "\n");
            out << "mmd.mean " << report["mmd"]["mean"].get<double>() << " f1 " << report["f1_pr"]["f1"].get<double>()
                << " auprc " << report["auprc"].get<double>() << " mean_ll " << report["mean_ll"].get<double>() << '\n';
        } else if (*ho) {
            std::map<std::string, std::string> flags{{"mode", ho_mode}, {"workers", std::to_string(workers)}};
            if (seed_flag) {
                flags["seed"] = std::to_string(*seed_flag);
                flags["ordering_seed"] = std::to_string(*seed_flag);
            }
            const auto base = resolve_config(config_path, flags);
            const auto data = load_jsonl(ho_data);
            const bool with_auprc = ho_objective == "mmd-auprc";
            const auto result = random_search(SearchSpace{}, ho_trials, seed, [&](double lr, double wd) {
                RunConfig cfg = base;
                cfg.model.lr = lr;
                cfg.model.weight_decay = wd;
                const auto outcome = train_from_data(data, nullptr, cfg);
                const auto& ck = outcome.checkpoint;
                if (outcome.val.empty())
                    throw InputError("hyperopt needs a non-empty validation split");
                const auto generated =
                    sample(ck.params, ck.config, static_cast<int>(outcome.val.size()), derive_seed(seed, 17));
                double objective = mmd_suite(generated, outcome.val, cfg.metrics).mean;
                if (with_auprc)
                    objective -= reconstruction_auprc(ck.params, ck.config, outcome.val, ck.mode, seed);
                return objective;
            });
            json log;
            log["objective"] = ho_objective;
            log["trials"] = json::array();
            for (const auto& t : result.trials)
                log["trials"].push_back({{"lr", t.lr}, {"weight_decay", t.weight_decay}, {"objective", t.objective}});
            log["best"] = {{"lr", result.best.lr}, {"weight_decay", result.best.weight_decay},
                           {"objective", result.best.objective}};
            log["config_echo"] = echo_json(base);
            log["config_hash"] = base.hash();
            write_text(ho_out, log.dump(2) + "\n");
            out << "best lr " << result.best.lr << " weight_decay " << result.best.weight_decay << " objective "
                << result.best.objective << '\n';
        } else if (*ro) {
            const auto graphs = load_jsonl(ro_in);
            if (ro_index >= static_cast<int>(graphs.size()))
                throw InputError("--index " + std::to_string(ro_index) + " out of range (" +
                                 std::to_string(graphs.size()) + " graphs)");
            const auto& g = graphs[static_cast<std::size_t>(ro_index)];
            OrderingConfig before_cfg;
            before_cfg.seed = seed;
            before_cfg.family = ro_from == "bfs" ? OrderingFamily::BFS
                                : ro_from == "dfs" ? OrderingFamily::DFS
                                                   : OrderingFamily::Identity;
            const auto before = make_ordering(g, before_cfg);
            OrderingConfig cm_cfg;
            cm_cfg.seed = seed;
            const auto cm = cuthill_mckee(g, cm_cfg);
            const auto hash = fnv1a_hex("reorder:" + ro_from + ":" + std::to_string(seed));
            out << "bandwidth: " << bandwidth_of_ordering(g, before) << " -> " << bandwidth_of_ordering(g, cm) << '\n';
            if (!ro_pgm.empty())
                write_text(ro_pgm, pgm(apply_ordering(g, cm), hash));
            if (!ro_pgm_before.empty())
                write_text(ro_pgm_before, pgm(apply_ordering(g, before), hash));
        } else if (*an) {
            if (an_runs.size() < 3)
                throw InputError("analyze needs at least 3 --run entries");
            std::vector<double> savings, gains;
            json runs = json::array();
            for (const auto& spec : an_runs) {
                const auto eq = spec.find('=');
                const auto name = eq == std::string::npos ? std::string{} : spec.substr(0, eq);
                std::vector<std::string> parts;
                std::istringstream ps(eq == std::string::npos ? spec : spec.substr(eq + 1));
                std::string part;
                while (std::getline(ps, part, ','))
                    parts.push_back(part);
                if (parts.size() != 3)
                    throw InputError("--run expects NAME=report.tsv,baseline_eval.json,bwr_eval.json");
                const double s = first_savings_from_report(parts[0]);
                const double ll_base = read_json(parts[1]).at("mean_ll").get<double>();
                const double ll_bwr = read_json(parts[2]).at("mean_ll").get<double>();
                if (ll_bwr == 0.0)
                    throw NumericError("BwR log-likelihood of zero for run " + name);
                // Ratio of negative log-likelihoods: > 1 when the band model is better.
                const double gain = ll_base / ll_bwr;
                savings.push_back(s);
                gains.push_back(gain);
                runs.push_back({{"dataset", name}, {"savings", s}, {"ll_baseline", ll_base}, {"ll_bwr", ll_bwr},
                                {"ll_improvement", gain}});
            }
            json j{{"runs", runs}, {"spearman_r", spearman_r(savings, gains)}};
            if (!an_out.empty())
                write_text(an_out, j.dump(2) + "\n");
            out << "spearman_r " << j["spearman_r"].get<double>() << '\n';
        }
    } catch (const Error& e) {
        err << "error: " << to_string(e.category()) << ": " << e.what() << '\n';
        return exit_code_for(std::string(to_string(e.category())));
    } catch (const std::exception& e) {
        err << "error: input: " << e.what() << '\n';
        return exit_code_for("input");
    }
    return 0;
}

} // namespace bandgen
