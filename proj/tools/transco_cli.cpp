#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "transco/baselines.hpp"
#include "transco/bench.hpp"
#include "transco/dataio.hpp"
#include "transco/errors.hpp"
#include "transco/ipod.hpp"
#include "transco/log.hpp"
#include "transco/metrics.hpp"
#include "transco/simgen.hpp"
#include "transco/transfer.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace transco;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNumerical = 1;
constexpr int kExitValidation = 2;

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

json to_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

json path_json(const TuningPath& path) {
    json rows = json::array();
    for (std::size_t k = 0; k < path.size(); ++k) {
        json r;
        r["lambda"] = path.lambdas[k];
        r["df"] = path.df[k];
        r["rss"] = path.rss[k];
        r["bic"] = std::isfinite(path.bic[k]) ? json(path.bic[k]) : json(nullptr);
        r["eligible"] = static_cast<bool>(path.eligible[k]);
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_text(const std::string& out, const std::string& text) {
    if (out.empty() || out == "-") {
        std::cout << text;
        return;
    }
    const fs::path p(out);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write " + out);
    f << text;
    if (!f) throw IoError("write failed for " + out);
}

struct FitArgs {
    std::string data;
    std::string response;
    std::string method;
    std::vector<std::string> sources;
    bool standardize = false;
    long long seed = 0;
    std::string out;
    double tol = 0.0;
    int max_iter = 0;
    int grid_size = 40;
    std::string truth;
    std::string test;
};

struct Loaded {
    Method method;
    Dataset target;
    std::vector<Dataset> sources;
};

Loaded load_inputs(const FitArgs& a, bool tune_only) {
    Loaded l{Method::IPOD, {}, {}};
    try {
        l.method = parse_method(a.method);
    } catch (const InvalidParameter& e) {
        throw ValidationError(std::string("--method: ") + e.what());
    }
    if (tune_only && l.method != Method::IPOD && l.method != Method::TransCO) {
        throw ValidationError("--method: tune supports ipod and transco only");
    }
    if ((l.method == Method::TransCO || l.method == Method::PTL) && a.sources.empty()) {
        throw ValidationError("--sources: method " + a.method + " needs at least one source file");
    }
    if (a.tol < 0.0) throw ValidationError("--tol must be positive");
    if (a.max_iter < 0) throw ValidationError("--max-iter must be positive");
    if (a.grid_size < 2) throw ValidationError("--grid-size must be at least 2");
    l.target = load_dataset_csv(a.data, a.response, a.standardize);
    for (const auto& s : a.sources) {
        l.sources.push_back(load_dataset_csv(s, a.response, a.standardize));
        if (l.sources.back().cols() != l.target.cols()) {
            throw ValidationError("--sources: " + s + " has a different number of feature columns than --data");
        }
    }
    return l;
}

TransferOptions transfer_options(const FitArgs& a) {
    TransferOptions o;
    o.grid_size = a.grid_size;
    o.source.grid_size = a.grid_size;
    if (a.tol > 0.0) {
        o.tol = a.tol;
        o.source.tol = a.tol;
    }
    if (a.max_iter > 0) {
        o.max_iter = a.max_iter;
        o.source.max_iter = a.max_iter;
    }
    return o;
}

int cmd_fit(const FitArgs& a) {
    const Loaded in = load_inputs(a, false);
    const TransferOptions opt = transfer_options(a);
    const Dataset& target = in.target;
    json report;
    report["method"] = to_string(in.method);
    report["n"] = target.rows();
    report["p"] = target.cols();
    report["K"] = in.sources.size();
    report["seed"] = a.seed;

    Eigen::VectorXd beta;
    std::optional<std::vector<Eigen::Index>> detected;
    Eigen::VectorXd gamma;
    switch (in.method) {
        case Method::IPOD: {
            if (target.rows() > target.cols()) {
                auto [path, fit] = ipod_bic_path(target, opt.source);
                beta = fit.beta_hat;
                gamma = fit.gamma_hat;
                detected = fit.detected();
                report["lambda"] = fit.lambda_adj;
                report["bic"] = fit.bic;
                report["iterations"] = fit.iterations;
                report["converged"] = fit.converged;
                report["best_index"] = path.best_index;
                report["path"] = path_json(path);
            } else {
                auto [path, fit] = ipod_highdim_bic_path(target, opt);
                beta = fit.beta_hat;
                gamma = fit.gamma_hat;
                detected = fit.detected();
                report["lambda"] = fit.lambda;
                report["bic"] = fit.bic;
                report["iterations"] = fit.iterations;
                report["converged"] = fit.converged;
                report["best_index"] = path.best_index;
                report["path"] = path_json(path);
            }
            break;
        }
        case Method::TransCO: {
            const SourceEnsemble ens = fit_sources(in.sources, opt.source);
            auto [path, fit] = transco_bic_path(target, ens, opt);
            beta = fit.beta_hat;
            gamma = fit.gamma_hat;
            detected = fit.detected();
            report["lambda"] = fit.lambda;
            report["bic"] = fit.bic;
            report["iterations"] = fit.iterations;
            report["converged"] = fit.converged;
            report["w_hat"] = to_json(fit.w_hat);
            report["delta_hat"] = to_json(fit.delta_hat);
            report["identification_gap"] = fit.identification_gap;
            report["best_index"] = path.best_index;
            report["path"] = path_json(path);
            break;
        }
        case Method::PTL: {
            const SourceEnsemble ens = fit_sources(in.sources, opt.source);
            beta = ptl_fit(target, ens, opt.init_lasso);
            break;
        }
        case Method::OLS:
            beta = ols_fit(target.X, target.Y);
            break;
    }
    report["beta_hat"] = to_json(beta);
    if (detected) {
        json d = json::array();
        for (Eigen::Index i : *detected) d.push_back({{"index", i}, {"gamma", gamma[i]}});
        report["detected"] = d;
    }
    if (!a.truth.empty()) {
        std::ifstream f(a.truth);
        if (!f) throw ValidationError("--truth: cannot open " + a.truth);
        json t;
        try {
            t = json::parse(f);
        } catch (const json::exception& e) {
            throw ValidationError(std::string("--truth: ") + e.what());
        }
        json ev;
        if (t.contains("beta")) {
            const auto b = t["beta"].get<std::vector<double>>();
            if (static_cast<Eigen::Index>(b.size()) != beta.size()) throw ValidationError("--truth: beta has the wrong length");
            ev["mse"] = mse_beta(beta, Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size())));
        }
        if (t.contains("target_outliers") && detected) {
            const auto o = t["target_outliers"].get<std::vector<Eigen::Index>>();
            const DetectionScore s = f1_detection(*detected, o);
            ev["f1"] = s.f1;
            ev["precision"] = s.precision;
            ev["recall"] = s.recall;
        }
        report["truth_evaluation"] = ev;
    }
    if (!a.test.empty()) {
        const Dataset test = load_dataset_csv(a.test, a.response, a.standardize);
        if (test.cols() != beta.size()) throw ValidationError("--test: feature count differs from --data");
        const Eigen::VectorXd pred = test.X * beta;
        json ev;
        ev["huber"] = huber_loss(test.Y, pred, 0.05);
        try {
            const double r2 = r_squared(test.Y, pred);
            ev["r2"] = r2;
            ev["r2_negative"] = r2 < 0.0;
        } catch (const InvalidParameter&) {
            ev["r2"] = nullptr;
        }
        report["test_evaluation"] = ev;
    }
    write_text(a.out, report.dump(2) + "\n");
    return kExitOk;
}

int cmd_tune(const FitArgs& a) {
    const Loaded in = load_inputs(a, true);
    const TransferOptions opt = transfer_options(a);
    TuningPath path;
    if (in.method == Method::IPOD) {
        path = in.target.rows() > in.target.cols() ? ipod_bic_path(in.target, opt.source).first
                                                   : ipod_highdim_bic_path(in.target, opt).first;
    } else {
        path = transco_bic_path(in.target, fit_sources(in.sources, opt.source), opt).first;
    }
    std::ostringstream o;
    o << "lambda,df,rss,bic,noise_floor,eligible,best\n";
    for (std::size_t k = 0; k < path.size(); ++k) {
        o << format_number(path.lambdas[k]) << "," << path.df[k] << "," << format_number(path.rss[k]) << ","
          << (std::isfinite(path.bic[k]) ? format_number(path.bic[k]) : std::string("-inf")) << ","
          << format_number(path.noise_floor[k]) << "," << (path.eligible[k] ? 1 : 0) << ","
          << (k == path.best_index ? 1 : 0) << "\n";
    }
    write_text(a.out, o.str());
    return kExitOk;
}

struct SimArgs {
    std::string config;
    int trials = 0;
    std::optional<long long> seed;
    std::string out = "results";
    int parallel = 1;
    std::string methods = "ipod,transco,ptl";
    std::string format = "csv";
    bool timing = false;
};

std::vector<Method> parse_methods(const std::string& list) {
    std::vector<Method> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            out.push_back(parse_method(item));
        } catch (const InvalidParameter& e) {
            throw ValidationError(std::string("--methods: ") + e.what());
        }
    }
    if (out.empty()) throw ValidationError("--methods: no methods given");
    return out;
}

SimulationConfig load_config_arg(const std::string& path) {
    try {
        return load_experiment_config(path);
    } catch (const Error& e) {
        throw ValidationError(std::string("--config: ") + e.what());
    }
}

int cmd_simulate(const SimArgs& a) {
    SimulationConfig cfg = load_config_arg(a.config);
    const std::vector<Method> methods = parse_methods(a.methods);
    if (a.trials < 0) throw ValidationError("--trials must be positive");
    if (a.trials > 0) cfg.trials = a.trials;
    if (a.seed) {
        if (*a.seed < 0) throw ValidationError("--seed must be nonnegative");
        cfg.seed = static_cast<std::uint64_t>(*a.seed);
    }
    if (a.parallel < 1) throw ValidationError("--parallel must be at least 1");
    ResultFormat fmt;
    if (a.format == "csv") fmt = ResultFormat::CSV;
    else if (a.format == "json") fmt = ResultFormat::JSON;
    else throw ValidationError("--format must be csv or json");

    log_info("simulate " + to_string(cfg.example_id) + " trials " + std::to_string(cfg.trials) + " digest " +
             config_digest(cfg));
    const auto results = run_trials(cfg, cfg.trials, cfg.seed, methods, a.parallel, a.timing);
    const auto records = flatten_records(results);
    const fs::path dir(a.out);
    fs::create_directories(dir);
    write_results(dir / (fmt == ResultFormat::CSV ? "records.csv" : "records.json"), records, fmt);
    write_plot_data(dir / "plot_data.csv", records, static_cast<long>(cfg.n));
    for (const auto& s : summarize(records)) {
        const MetricSummary* lm = s.find("log_mse");
        const MetricSummary* f1 = s.find("f1");
        std::cout << to_string(s.method) << ": log(MSE) " << format_number(lm->mean);
        if (f1 && f1->count > 0) std::cout << ", F1 " << format_number(f1->mean);
        std::cout << "\n";
    }
    return kExitOk;
}

struct GenArgs {
    std::string config;
    std::optional<long long> seed;
    int trial = 0;
    std::string out = "generated";
};

void write_dataset(const fs::path& path, const Dataset& d) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write " + path.string());
    for (Eigen::Index j = 0; j < d.cols(); ++j) f << "x" << (j + 1) << ",";
    f << "y\n";
    for (Eigen::Index i = 0; i < d.rows(); ++i) {
        for (Eigen::Index j = 0; j < d.cols(); ++j) f << format_number(d.X(i, j)) << ",";
        f << format_number(d.Y[i]) << "\n";
    }
    if (!f) throw IoError("write failed for " + path.string());
}

int cmd_generate(const GenArgs& a) {
    SimulationConfig cfg = load_config_arg(a.config);
    if (a.seed) {
        if (*a.seed < 0) throw ValidationError("--seed must be nonnegative");
        cfg.seed = static_cast<std::uint64_t>(*a.seed);
    }
    if (a.trial < 0) throw ValidationError("--trial must be nonnegative");
    Rng rng(trial_seed(cfg.seed, a.trial));
    const SimulatedProblem prob = gen_problem(cfg, rng);
    const fs::path dir(a.out);
    fs::create_directories(dir);
    write_dataset(dir / "target.csv", prob.target);
    for (std::size_t k = 0; k < prob.sources.size(); ++k) {
        write_dataset(dir / ("source_" + std::to_string(k + 1) + ".csv"), prob.sources[k]);
    }
    json t;
    t["beta"] = to_json(prob.truth.beta);
    t["w"] = to_json(prob.truth.w);
    t["delta"] = to_json(prob.truth.delta);
    t["target_outliers"] = prob.truth.target_outliers;
    t["config_digest"] = config_digest(cfg);
    write_text((dir / "truth.json").string(), t.dump(2) + "\n");
    return kExitOk;
}

void add_fit_flags(CLI::App* sub, FitArgs& a, bool tune) {
    sub->add_option("--data", a.data, "Target CSV file")->required();
    sub->add_option("--response", a.response, "Name of the response column")->required();
    sub->add_option("--method", a.method, tune ? "ipod | transco" : "ipod | transco | ptl | ols")->required();
    sub->add_option("--sources", a.sources, "Source CSV files (same columns as --data)");
    sub->add_flag("--standardize", a.standardize, "Centre and scale every column");
    sub->add_option("--seed", a.seed, "Seed recorded in the report");
    sub->add_option("--out", a.out, tune ? "Output CSV (default stdout)" : "Output JSON report (default stdout)");
    sub->add_option("--tol", a.tol, "Convergence tolerance");
    sub->add_option("--max-iter", a.max_iter, "Iteration cap per penalty level");
    sub->add_option("--grid-size", a.grid_size, "Number of positive penalty levels");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robust transfer regression with influential-point detection"};
    app.require_subcommand(1);

    FitArgs fit_args;
    auto* fit = app.add_subcommand("fit", "Fit one method to a CSV dataset and write a JSON report");
    add_fit_flags(fit, fit_args, false);
    fit->add_option("--truth", fit_args.truth, "JSON with true beta / target_outliers for scoring");
    fit->add_option("--test", fit_args.test, "Held-out CSV scored by Huber loss and R-squared");

    FitArgs tune_args;
    auto* tune = app.add_subcommand("tune", "Write the penalty path (lambda, DF, RSS, BIC) as CSV");
    add_fit_flags(tune, tune_args, true);

    SimArgs sim_args;
    long long sim_seed = -1;
    auto* sim = app.add_subcommand("simulate", "Monte Carlo benchmark on a simulation config");
    sim->add_option("--config", sim_args.config, "Experiment config (key = value)")->required();
    sim->add_option("--trials", sim_args.trials, "Number of trials (overrides the config)");
    auto* sim_seed_opt = sim->add_option("--seed", sim_seed, "Root seed (overrides the config)");
    sim->add_option("--out", sim_args.out, "Output directory");
    sim->add_option("--parallel", sim_args.parallel, "Worker threads");
    sim->add_option("--methods", sim_args.methods, "Comma list of ipod, transco, ptl, ols");
    sim->add_option("--format", sim_args.format, "csv | json");
    sim->add_flag("--timing", sim_args.timing, "Record wall-clock runtimes (records are then not reproducible)");

    GenArgs gen_args;
    long long gen_seed = -1;
    auto* gen = app.add_subcommand("generate", "Write one simulated problem as CSV files plus truth.json");
    gen->add_option("--config", gen_args.config, "Experiment config (key = value)")->required();
    auto* gen_seed_opt = gen->add_option("--seed", gen_seed, "Root seed (overrides the config)");
    gen->add_option("--trial", gen_args.trial, "Trial index whose stream is used");
    gen->add_option("--out", gen_args.out, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (fit->parsed()) return cmd_fit(fit_args);
        if (tune->parsed()) return cmd_tune(tune_args);
        if (sim->parsed()) {
            if (*sim_seed_opt) sim_args.seed = sim_seed;
            return cmd_simulate(sim_args);
        }
        if (gen->parsed()) {
            if (*gen_seed_opt) gen_args.seed = gen_seed;
            return cmd_generate(gen_args);
        }
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const SingularDesign& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const Degeneracy& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const NumericalFailure& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitValidation;
}
