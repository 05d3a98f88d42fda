// ggsel: learn sparse Gaussian graphical structure from data.
//
//   ggsel fit      --in data.csv --out summary.json [options]
//   ggsel simulate --family ar1 --p 30 --n 100 --reps 20 [options]
//
// Exit codes: 0 success, 1 configuration error, 2 data error, 3 numeric failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "ggsel/data.hpp"
#include "ggsel/errors.hpp"
#include "ggsel/graph.hpp"
#include "ggsel/prior.hpp"
#include "ggsel/report.hpp"
#include "ggsel/search.hpp"
#include "ggsel/simulate.hpp"

namespace {

struct CommonOpts {
    double rho = 0.5;
    double q = 0.4;
    int rbar = -1;  // -1: derive from (n, p)
    std::string truncation = "hard";
    double a1 = 1.0, a2 = 1.0;
    std::string search = "auto";
    long steps = 0;
    int restarts = 0;
    double temperature = 1.0;
    int max_edges = -1;
    std::uint64_t seed = 0;
    int threads = 1;
    bool progress = false;
    std::string config_path;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--rho", o.rho, "glasso penalty (= lambda/n)");
    cmd->add_option("--q", o.q, "prior edge inclusion probability, in (0, 1/2)");
    cmd->add_option("--rbar", o.rbar, "edge-count cap for the hard truncation");
    cmd->add_option("--truncation", o.truncation, "prior truncation: hard | hierarchical");
    cmd->add_option("--a1", o.a1, "hierarchical truncation parameter a1");
    cmd->add_option("--a2", o.a2, "hierarchical truncation parameter a2");
    cmd->add_option("--search", o.search, "search mode: exact | stochastic | auto");
    cmd->add_option("--steps", o.steps, "stochastic search steps per restart");
    cmd->add_option("--restarts", o.restarts, "stochastic search restarts");
    cmd->add_option("--temperature", o.temperature, "acceptance temperature");
    cmd->add_option("--max-edges", o.max_edges, "largest graph considered");
    cmd->add_option("--seed", o.seed, "RNG seed");
    cmd->add_option("--threads", o.threads, "worker threads (results do not depend on this)");
    cmd->add_flag("--progress", o.progress, "progress lines on stderr");
    cmd->add_option("--config", o.config_path, "JSON config file; flags override its values");
}

// Config file < flags. Only keys the file actually has are applied.
void merge_config_file(const CLI::App* cmd, CommonOpts& o) {
    if (o.config_path.empty()) return;
    std::ifstream in(o.config_path);
    if (!in) throw ggsel::ConfigError("cannot open config file: " + o.config_path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ggsel::ConfigError("bad config file: " + std::string(e.what()));
    }
    if (cmd->count("--q") == 0 && j.contains("q")) o.q = j["q"].get<double>();
    if (cmd->count("--rho") == 0 && j.contains("rho")) o.rho = j["rho"].get<double>();
    if (j.contains("truncation")) {
        const auto& t = j["truncation"];
        if (cmd->count("--truncation") == 0 && t.contains("kind"))
            o.truncation = t["kind"].get<std::string>();
        if (cmd->count("--rbar") == 0 && t.contains("r_bar")) o.rbar = t["r_bar"].get<int>();
        if (cmd->count("--a1") == 0 && t.contains("a1")) o.a1 = t["a1"].get<double>();
        if (cmd->count("--a2") == 0 && t.contains("a2")) o.a2 = t["a2"].get<double>();
    }
    if (cmd->count("--seed") == 0 && j.contains("seed")) o.seed = j["seed"].get<std::uint64_t>();
    if (cmd->count("--steps") == 0 && j.contains("steps")) o.steps = j["steps"].get<long>();
    if (cmd->count("--restarts") == 0 && j.contains("restarts"))
        o.restarts = j["restarts"].get<int>();
}

ggsel::GraphPrior build_prior(const CommonOpts& o, long n, int p) {
    if (!(o.rho > 0.0)) throw ggsel::ConfigError("rho must be > 0");
    ggsel::GraphPrior prior;
    prior.q = o.q;
    prior.lambda = o.rho * static_cast<double>(n);
    if (o.truncation == "hard") {
        const int rbar = o.rbar >= 0 ? o.rbar : ggsel::default_rbar(static_cast<int>(n), p, p);
        prior.truncation = ggsel::HardCap{rbar};
    } else if (o.truncation == "hierarchical") {
        prior.truncation = ggsel::Hierarchical{o.a1, o.a2};
    } else {
        throw ggsel::ConfigError("unknown truncation kind: " + o.truncation);
    }
    prior.validate();
    return prior;
}

ggsel::SearchConfig build_search(const CommonOpts& o, const ggsel::GraphPrior& prior, int p) {
    ggsel::SearchConfig cfg = ggsel::default_search_config(p, prior, o.seed);
    if (o.search == "exact")
        cfg.mode = ggsel::SearchMode::Enumerate;
    else if (o.search == "stochastic")
        cfg.mode = ggsel::SearchMode::Stochastic;
    else if (o.search != "auto")
        throw ggsel::ConfigError("unknown search mode: " + o.search);
    if (cfg.mode == ggsel::SearchMode::Stochastic) {
        if (cfg.steps < 1) cfg.steps = 200L * ggsel::max_pair_count(p);
        if (cfg.restarts < 1) cfg.restarts = 3;
    }
    if (o.steps > 0) cfg.steps = o.steps;
    if (o.restarts > 0) cfg.restarts = o.restarts;
    if (o.max_edges >= 0) cfg.max_edges = o.max_edges;
    cfg.temperature = o.temperature;
    cfg.threads = o.threads;
    cfg.progress = o.progress;
    return cfg;
}

// Thread count and progress flags do not enter the echo: outputs must be
// byte-identical across them.
nlohmann::json config_echo(const CommonOpts& o, const ggsel::GraphPrior& prior,
                           const ggsel::SearchConfig& cfg, long n, int p) {
    nlohmann::json t;
    if (const auto* hard = std::get_if<ggsel::HardCap>(&prior.truncation))
        t = {{"kind", "hard"}, {"r_bar", hard->r_bar}};
    else {
        const auto& h = std::get<ggsel::Hierarchical>(prior.truncation);
        t = {{"kind", "hierarchical"}, {"a1", h.a1}, {"a2", h.a2}};
    }
    return nlohmann::json{
        {"rho", o.rho},
        {"q", prior.q},
        {"lambda", prior.lambda},
        {"truncation", t},
        {"n", n},
        {"p", p},
        {"search",
         {{"mode", cfg.mode == ggsel::SearchMode::Enumerate ? "exact" : "stochastic"},
          {"steps", cfg.steps},
          {"restarts", cfg.restarts},
          {"temperature", cfg.temperature},
          {"max_edges", cfg.max_edges},
          {"seed", cfg.seed}}}};
}

std::string edges_path(const std::string& out) {
    const auto dot = out.find_last_of('.');
    const auto slash = out.find_last_of('/');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
        return out + ".edges";
    return out.substr(0, dot) + ".edges";
}

int run_fit(const CLI::App* cmd, const CommonOpts& o, const std::string& in_path,
            const std::string& out_path, bool use_log_returns, bool use_standardize, bool header) {
    CommonOpts opts = o;
    merge_config_file(cmd, opts);

    const ggsel::IngestResult ingested = ggsel::ingest(in_path, use_log_returns, use_standardize, header);
    const long n = ingested.data.rows;
    const int p = ingested.data.cols;
    if (n < 2) throw ggsel::TooFewRows();

    const ggsel::GraphPrior prior = build_prior(opts, n, p);
    const ggsel::SearchConfig cfg = build_search(opts, prior, p);
    const ggsel::PosteriorSummary summary =
        ggsel::run_search(ingested.sigma_hat, static_cast<int>(n), prior, cfg);

    nlohmann::json echo = config_echo(opts, prior, cfg, n, p);
    echo["input"] = in_path;
    echo["log_returns"] = use_log_returns;
    echo["standardize"] = use_standardize;

    std::ofstream out(out_path);
    if (!out) throw ggsel::ConfigError("cannot open output file: " + out_path);
    out << ggsel::summary_to_json(summary, echo).dump(2) << "\n";

    const std::string ep = edges_path(out_path);
    std::ofstream eout(ep);
    if (!eout) throw ggsel::ConfigError("cannot open output file: " + ep);
    eout << ggsel::to_edge_list_text(summary.median_model);

    std::cerr << "ggsel: " << summary.models.size() << " models, median model has "
              << summary.median_model.edge_count() << " edges -> " << out_path << "\n";
    return 0;
}

int run_simulate(const CLI::App* cmd, const CommonOpts& o, const std::string& family, int p, long n,
                 int reps, const std::string& out_path) {
    CommonOpts opts = o;
    merge_config_file(cmd, opts);
    if (reps < 1) throw ggsel::ConfigError("reps must be >= 1");

    ggsel::TruthFamily fam;
    if (family == "ar1")
        fam = ggsel::TruthFamily::AR1;
    else if (family == "ar2")
        fam = ggsel::TruthFamily::AR2;
    else if (family == "star")
        fam = ggsel::TruthFamily::Star;
    else if (family == "circle")
        fam = ggsel::TruthFamily::Circle;
    else
        throw ggsel::ConfigError("unknown family: " + family);

    const ggsel::GraphPrior prior = build_prior(opts, n, p);
    const ggsel::SearchConfig cfg = build_search(opts, prior, p);
    const ggsel::StudyResult res =
        ggsel::run_study(ggsel::TruthSpec{fam, p}, n, reps, prior, cfg, opts.seed);

    const std::string csv = ggsel::study_csv_header() + ggsel::study_csv_row(res);
    if (out_path.empty()) {
        std::cout << csv;
    } else {
        std::ofstream out(out_path);
        if (!out) throw ggsel::ConfigError("cannot open output file: " + out_path);
        out << csv;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian structure learning for Gaussian graphical models"};
    app.require_subcommand(1);

    CommonOpts fit_opts, sim_opts;
    std::string in_path, fit_out = "summary.json";
    bool use_log_returns = false, use_standardize = false, header = false;
    CLI::App* fit = app.add_subcommand("fit", "fit a posterior over graphs to CSV data");
    fit->add_option("--in", in_path, "input CSV")->required();
    fit->add_option("--out", fit_out, "output JSON path");
    fit->add_flag("--log-returns", use_log_returns, "transform prices to log-returns first");
    fit->add_flag("--standardize", use_standardize, "center and unit-scale each column");
    fit->add_flag("--header", header, "first CSV row is a header");
    add_common(fit, fit_opts);

    std::string family = "ar1", sim_out;
    int sim_p = 10, reps = 1;
    long sim_n = 100;
    CLI::App* sim = app.add_subcommand("simulate", "benchmark recovery on synthetic models");
    sim->add_option("--family", family, "ar1 | ar2 | star | circle")->required();
    sim->add_option("--p", sim_p, "dimension")->required();
    sim->add_option("--n", sim_n, "sample size")->required();
    sim->add_option("--reps", reps, "replications");
    sim->add_option("--out", sim_out, "output CSV path (default: stdout)");
    add_common(sim, sim_opts);

    try {
        app.parse(argc, argv);
        if (fit->parsed())
            return run_fit(fit, fit_opts, in_path, fit_out, use_log_returns, use_standardize, header);
        return run_simulate(sim, sim_opts, family, sim_p, sim_n, reps, sim_out);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);  // CLI11 prints the message; help exits 0
    } catch (const ggsel::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const ggsel::TooLarge& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const ggsel::ParseError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const ggsel::NonNumeric& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const ggsel::TooFewRows& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const ggsel::ZeroVarianceColumn& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const ggsel::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    }
}
