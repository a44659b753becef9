#include "transco/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <optional>
#include <thread>

#include "transco/baselines.hpp"
#include "transco/errors.hpp"
#include "transco/ipod.hpp"
#include "transco/log.hpp"
#include "transco/metrics.hpp"
#include "transco/transfer.hpp"

namespace transco {

std::uint64_t trial_seed(std::uint64_t root_seed, int trial) {
    return Rng(root_seed).split("trial", static_cast<std::uint64_t>(trial)).seed();
}

TrialResult run_trial(const SimulationConfig& config, int trial, std::uint64_t root_seed,
                      const std::vector<Method>& methods, bool record_time) {
    const std::uint64_t seed = trial_seed(root_seed, trial);
    Rng rng(seed);
    const SimulatedProblem prob = gen_problem(config, rng);
    const std::string digest = config_digest(config);
    const Dataset& target = prob.target;
    const bool low_dim = target.rows() > target.cols();

    TransferOptions topt;
    topt.tol = config.tol;
    topt.max_iter = config.max_iter;
    topt.grid_size = config.grid_size;
    topt.source.grid_size = config.grid_size;

    TrialResult out;
    out.truth = prob.truth.target_outliers;
    std::optional<SourceEnsemble> ensemble;
    auto sources = [&]() -> const SourceEnsemble& {
        if (!ensemble) ensemble = fit_sources(prob.sources, topt.source);
        return *ensemble;
    };

    for (Method m : methods) {
        const auto t0 = std::chrono::steady_clock::now();
        Eigen::VectorXd beta;
        std::optional<std::vector<Eigen::Index>> detected;
        switch (m) {
            case Method::IPOD:
                if (low_dim) {
                    IpodOptions io = topt.source;
                    auto fit = ipod_bic_path(target, io).second;
                    beta = fit.beta_hat;
                    detected = fit.detected();
                } else {
                    auto fit = ipod_highdim_bic_path(target, topt).second;
                    beta = fit.beta_hat;
                    detected = fit.detected();
                }
                break;
            case Method::TransCO: {
                auto fit = transco_bic_path(target, sources(), topt).second;
                beta = fit.beta_hat;
                detected = fit.detected();
                break;
            }
            case Method::PTL:
                beta = ptl_fit(target, sources(), topt.init_lasso);
                break;
            case Method::OLS:
                if (!low_dim) {
                    log_info("trial " + std::to_string(trial) + ": OLS skipped for n <= p");
                    continue;
                }
                beta = ols_fit(target.X, target.Y);
                break;
        }
        const auto t1 = std::chrono::steady_clock::now();
        ResultRecord r;
        r.method = m;
        r.trial = trial;
        r.config_digest = digest;
        r.mse = mse_beta(beta, prob.truth.beta);
        r.log_mse = r.mse > 0.0 ? std::log(r.mse) : -std::numeric_limits<double>::infinity();
        if (detected) {
            r.f1 = f1_detection(*detected, prob.truth.target_outliers).f1;
            out.detected[m] = *detected;
        }
        r.runtime_ms =
            record_time ? static_cast<long>(std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count()) : 0;
        r.seed = seed;
        log_debug("trial " + std::to_string(trial) + " " + to_string(m) + ": mse " + format_number(r.mse) +
                  (r.f1 ? ", f1 " + format_number(*r.f1) : std::string()));
        out.records.push_back(std::move(r));
    }
    return out;
}

std::vector<TrialResult> run_trials(const SimulationConfig& config, int trials, std::uint64_t root_seed,
                                    const std::vector<Method>& methods, int parallel, bool record_time) {
    if (trials < 0) throw InvalidParameter("trial count must be nonnegative");
    if (parallel < 1) throw InvalidParameter("parallelism must be at least 1");
    std::vector<TrialResult> results(static_cast<std::size_t>(trials));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(trials));
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (int t = next.fetch_add(1); t < trials; t = next.fetch_add(1)) {
            try {
                results[static_cast<std::size_t>(t)] = run_trial(config, t, root_seed, methods, record_time);
                log_info("trial " + std::to_string(t) + " done");
            } catch (...) {
                errors[static_cast<std::size_t>(t)] = std::current_exception();
            }
        }
    };
    const int workers = std::min(parallel, std::max(trials, 1));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return results;
}

std::vector<ResultRecord> flatten_records(const std::vector<TrialResult>& results) {
    std::vector<ResultRecord> out;
    for (const auto& r : results) out.insert(out.end(), r.records.begin(), r.records.end());
    return out;
}

}  // namespace transco
