// funfuse: subgroup discovery for scalar-on-function regression.
//
// Subcommands: simulate, fit, replicate, evaluate. Exit codes: 0 success,
// 2 bad input, 3 solver divergence, 4 tuning failure.

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <random>

#include <CLI11.hpp>
#include <json.hpp>

#include "funfuse/baselines.hpp"
#include "funfuse/errors.hpp"
#include "funfuse/io.hpp"
#include "funfuse/metrics.hpp"
#include "funfuse/parallel.hpp"
#include "funfuse/replicate.hpp"
#include "funfuse/tuning.hpp"

namespace ff = funfuse;
namespace fs = std::filesystem;

namespace {

struct ScenarioFlags {
    std::string scenario = "s1";
    std::string structure = "balanced";
    int n = 40;
    std::string dist = "norm";
    double noise_sd = 1.0;
    int grid_points = 256;
    std::uint64_t seed = 1;

    ff::ScenarioSpec to_spec() const {
        ff::ScenarioSpec s;
        s.scenario = ff::scenario_from_string(scenario);
        if (structure == "balanced")
            s.structure = ff::Structure::Balanced;
        else if (structure == "unbalanced")
            s.structure = ff::Structure::Unbalanced;
        else
            throw ff::invalid_argument("unknown structure: " + structure);
        s.n = n;
        if (dist == "norm")
            s.coeff_dist = ff::CoeffDist::Norm;
        else if (dist == "unif")
            s.coeff_dist = ff::CoeffDist::Unif;
        else
            throw ff::invalid_argument("unknown distribution: " + dist);
        s.noise_sd = noise_sd;
        s.grid_points = grid_points;
        s.seed = seed;
        return s;
    }

    void attach(CLI::App* cmd) {
        cmd->add_option("--scenario", scenario, "s1 | s2 | ex2");
        cmd->add_option("--structure", structure, "balanced | unbalanced");
        cmd->add_option("--n", n, "number of subjects");
        cmd->add_option("--dist", dist, "norm | unif coefficient distribution");
        cmd->add_option("--noise-sd", noise_sd, "error standard deviation");
        cmd->add_option("--grid-points", grid_points, "covariate sampling grid size");
        cmd->add_option("--seed", seed, "RNG seed");
    }
};

struct PenaltyFlags {
    double tau = 1.0, delta = 2.0, eps_abs = 1e-4, eps_rel = 1e-2;
    int max_iter = 2000;

    void attach(CLI::App* cmd) {
        cmd->add_option("--tau", tau, "MCP concavity");
        cmd->add_option("--delta", delta, "ADMM penalty parameter");
        cmd->add_option("--eps-abs", eps_abs, "absolute stopping tolerance");
        cmd->add_option("--eps-rel", eps_rel, "relative stopping tolerance");
        cmd->add_option("--max-iter", max_iter, "ADMM iteration cap");
    }

    ff::PenaltyConfig to_config() const {
        ff::PenaltyConfig c;
        c.tau = tau;
        c.delta = delta;
        c.eps_abs = eps_abs;
        c.eps_rel = eps_rel;
        c.max_iter = max_iter;
        return c;
    }
};

int cmd_simulate(const ScenarioFlags& flags, const std::string& out_dir) {
    auto [dataset, truth] = ff::generate(flags.to_spec());
    fs::create_directories(out_dir);
    ff::write_data_csv(out_dir + "/data.csv", dataset);
    ff::write_responses_csv(out_dir + "/responses.csv", dataset);
    ff::write_truth_json(out_dir + "/truth.json", dataset, truth);
    std::cout << "group sizes:";
    for (const auto& g : truth.partition) std::cout << ' ' << g.size();
    std::cout << "\n";
    return 0;
}

std::vector<double> parse_grid(const std::string& csv) {
    std::vector<double> grid;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) grid.push_back(std::stod(tok));
    return grid;
}

int cmd_fit(const std::string& data_csv, const std::string& responses_csv,
            const std::string& truth_path, int q, int m, double lambda1,
            double lambda2, const std::string& l1_grid_csv,
            const std::string& l2_grid_csv, int rounds,
            const std::string& weights, const PenaltyFlags& penalty,
            const std::string& out_dir) {
    std::optional<ff::TruthFile> truth;
    if (!truth_path.empty()) truth = ff::load_truth_json(truth_path);
    ff::LoadReport report;
    ff::Dataset dataset = ff::load_dataset(data_csv, responses_csv, q, m, truth, &report);
    for (const auto& id : report.dropped)
        std::cerr << "dropped subject " << id << " (more than 50% missing)\n";
    if (weights == "spherical")
        dataset.weights = ff::spherical_weights(dataset);
    else if (weights != "unit")
        throw ff::invalid_argument("unknown weights scheme: " + weights);

    const ff::Problem pb = ff::assemble(dataset);
    ff::FitResult fit;
    if (lambda1 >= 0.0 && lambda2 >= 0.0) {
        ff::PenaltyConfig cfg = penalty.to_config();
        cfg.lambda1 = lambda1;
        cfg.lambda2 = lambda2;
        fit = ff::admm_fit(pb, cfg);
    } else {
        const auto l2grid = l2_grid_csv.empty() ? ff::default_lambda2_grid()
                                                : parse_grid(l2_grid_csv);
        const auto l1grid = l1_grid_csv.empty() ? ff::default_lambda1_grid()
                                                : parse_grid(l1_grid_csv);
        auto tuned = ff::two_step_tune(pb, l2grid, l1grid, rounds,
                                       penalty.to_config(), ff::max_threads());
        fit = std::move(tuned.fit);
    }
    const double bic = ff::modified_bic(fit, pb.y, pb.p());
    fs::create_directories(out_dir);
    ff::write_result_json(out_dir + "/result.json", fit, bic, dataset);
    ff::write_curves_csv(out_dir + "/curves.csv", fit, dataset.basis);
    std::cout << "k_hat: " << fit.k_hat << "  lambda1: " << fit.lambda1
              << "  lambda2: " << fit.lambda2 << "  iters: " << fit.iters
              << "  converged: " << (fit.converged ? "yes" : "no") << "\n";
    return 0;
}

int cmd_replicate(const ScenarioFlags& flags, int reps,
                  const std::string& methods_csv, int rounds,
                  const PenaltyFlags& penalty, const std::string& out_dir) {
    ff::ReplicateSpec spec;
    spec.scenario = flags.to_spec();
    spec.reps = reps;
    spec.methods.clear();
    std::stringstream ss(methods_csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) spec.methods.push_back(tok);
    spec.rounds = rounds;
    spec.base = penalty.to_config();
    spec.threads = ff::max_threads();

    const auto summary = ff::run_replicates(spec);
    fs::create_directories(out_dir);
    ff::write_summary_csv(out_dir + "/summary.csv", summary, spec.methods);
    ff::write_khat_hist_csv(out_dir + "/khat_hist.csv", summary, spec.methods.front());
    int failures = 0;
    for (const auto& row : summary.rows)
        if (row.failed) {
            ++failures;
            std::cerr << "rep " << row.rep << " " << row.method
                      << " failed: " << row.error << "\n";
        }
    std::cout << "replicates: " << reps << "  failures: " << failures << "\n";
    return 0;
}

int cmd_evaluate(const std::string& fit_path, const std::string& truth_path,
                 const std::string& other_path, const std::string& data_csv,
                 const std::string& responses_csv, double split,
                 std::uint64_t seed, int q, int m, const PenaltyFlags& penalty,
                 const std::string& out_path) {
    nlohmann::ordered_json out;

    if (split > 0.0) {
        if (data_csv.empty() || responses_csv.empty())
            throw ff::invalid_argument("--split needs --data and --responses");
        std::optional<ff::TruthFile> truth;
        if (!truth_path.empty()) truth = ff::load_truth_json(truth_path);
        ff::Dataset all = ff::load_dataset(data_csv, responses_csv, q, m, truth);
        std::vector<int> order(all.n());
        std::iota(order.begin(), order.end(), 0);
        std::mt19937_64 rng(seed);
        std::shuffle(order.begin(), order.end(), rng);
        const int n_train = std::max(1, static_cast<int>(std::lround(split * all.n())));
        if (n_train >= all.n())
            throw ff::invalid_argument("--split leaves no test subjects");

        auto subset = [&](int lo, int hi) {
            ff::Dataset d(all.basis);
            d.covariate_basis = all.covariate_basis;
            if (all.has_coeffs()) d.coeffs.resize(hi - lo, all.coeffs.cols());
            for (int r = lo; r < hi; ++r) {
                d.samples.push_back(all.samples[order[r]]);
                if (all.has_coeffs())
                    d.coeffs.row(r - lo) = all.coeffs.row(order[r]);
            }
            d.weights = Eigen::MatrixXd::Ones(d.n(), d.n());
            return d;
        };
        ff::Dataset train = subset(0, n_train);
        ff::Dataset test = subset(n_train, all.n());

        auto tuned = ff::two_step_tune(ff::assemble(train), ff::default_lambda2_grid(),
                                       ff::default_lambda1_grid(), 1,
                                       penalty.to_config(), ff::max_threads());
        out["prediction_mse"] = ff::prediction_mse(tuned.fit, test, train);
        out["n_train"] = train.n();
        out["n_test"] = test.n();
        out["k_hat"] = tuned.fit.k_hat;
        out["lambda1"] = tuned.lambda1;
        out["lambda2"] = tuned.lambda2;
    } else {
        if (fit_path.empty())
            throw ff::invalid_argument("evaluate needs --fit (or --split)");
        const ff::ResultFile fit = ff::load_result_json(fit_path);

        auto as_indices = [](const std::vector<std::vector<std::string>>& part,
                             std::map<std::string, int>& index) {
            std::vector<std::vector<int>> out_part;
            for (const auto& group : part) {
                std::vector<int> g;
                for (const auto& id : group) {
                    auto [it, inserted] =
                        index.emplace(id, static_cast<int>(index.size()));
                    g.push_back(it->second);
                }
                out_part.push_back(std::move(g));
            }
            return out_part;
        };

        if (!truth_path.empty()) {
            const ff::TruthFile truth = ff::load_truth_json(truth_path);
            std::map<std::string, int> index;
            const auto fit_part = as_indices(fit.partition, index);
            const auto truth_part = as_indices(truth.partition, index);
            out["ari"] = ff::adjusted_rand_index(fit_part, truth_part);
            out["nmi"] = ff::nmi(fit_part, truth_part);
            if (!truth.scenario.empty() && !data_csv.empty() &&
                !responses_csv.empty()) {
                // Coefficient MSE against the scenario's closed forms.
                std::optional<ff::TruthFile> tf = truth;
                ff::Dataset ds = ff::load_dataset(data_csv, responses_csv, q, m, tf);
                ff::TruthRecord record;
                record.scenario = ff::scenario_from_string(truth.scenario);
                record.xi = ff::scenario_coefficients(record.scenario);
                record.partition = ff::partition_to_indices(truth.partition, ds);
                record.labels.assign(ds.n(), -1);
                for (size_t g = 0; g < record.partition.size(); ++g)
                    for (int i : record.partition[g])
                        record.labels[i] = static_cast<int>(g);
                ff::FitResult full;
                full.alpha = fit.alpha;
                full.k_hat = fit.k_hat;
                full.partition = ff::partition_to_indices(fit.partition, ds);
                full.theta.resize(ds.n(), fit.alpha.cols());
                for (size_t g = 0; g < full.partition.size(); ++g)
                    for (int i : full.partition[g])
                        full.theta.row(i) = fit.alpha.row(g);
                out["coef_mse"] = ff::coef_mse(full, record, ds.basis);
            }
        }
        if (!other_path.empty()) {
            const ff::ResultFile other = ff::load_result_json(other_path);
            std::map<std::string, int> index;
            const auto fit_part = as_indices(fit.partition, index);
            const auto other_part = as_indices(other.partition, index);
            out["ari_vs_other"] = ff::adjusted_rand_index(fit_part, other_part);
            out["nmi_vs_other"] = ff::nmi(fit_part, other_part);
        }
    }

    std::ofstream os(out_path, std::ios::binary);
    if (!os) throw ff::io_error("cannot write " + out_path);
    os << out.dump(2) << "\n";
    std::cout << out.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Penalized-fusion subgroup analysis for scalar-on-function regression"};
    app.require_subcommand(1);

    ScenarioFlags sim_flags;
    std::string sim_out = ".";
    auto* sim = app.add_subcommand("simulate", "generate a synthetic dataset");
    sim_flags.attach(sim);
    sim->add_option("--out", sim_out, "output directory");

    std::string fit_data, fit_resp, fit_truth, fit_l1grid, fit_l2grid;
    std::string fit_weights = "unit", fit_out = ".";
    int fit_q = 4, fit_m = 8, fit_rounds = 1;
    double fit_l1 = -1.0, fit_l2 = -1.0;
    PenaltyFlags fit_penalty;
    auto* fit = app.add_subcommand("fit", "fit the fusion model to CSV data");
    fit->add_option("--data", fit_data, "data.csv path")->required();
    fit->add_option("--responses", fit_resp, "responses.csv path")->required();
    fit->add_option("--truth", fit_truth, "truth.json (enables exact design rows)");
    fit->add_option("--q", fit_q, "coefficient basis order");
    fit->add_option("--m", fit_m, "coefficient basis interior knots");
    fit->add_option("--lambda1", fit_l1, "fixed roughness penalty");
    fit->add_option("--lambda2", fit_l2, "fixed fusion penalty");
    fit->add_option("--lambda1-grid", fit_l1grid, "comma-separated lambda1 grid");
    fit->add_option("--lambda2-grid", fit_l2grid, "comma-separated lambda2 grid");
    fit->add_option("--rounds", fit_rounds, "two-step tuning rounds");
    fit->add_option("--weights", fit_weights, "unit | spherical");
    fit->add_option("--out", fit_out, "output directory");
    fit_penalty.attach(fit);

    ScenarioFlags rep_flags;
    std::string rep_methods = "proposed,oracle,resp,resi", rep_out = ".";
    int rep_reps = 20, rep_rounds = 1;
    PenaltyFlags rep_penalty;
    auto* rep = app.add_subcommand("replicate", "seeded simulation study");
    rep_flags.attach(rep);
    rep->add_option("--reps", rep_reps, "number of replicates");
    rep->add_option("--methods", rep_methods, "comma list: proposed,oracle,resp,resi");
    rep->add_option("--rounds", rep_rounds, "two-step tuning rounds");
    rep->add_option("--out", rep_out, "output directory");
    rep_penalty.attach(rep);

    std::string ev_fit, ev_truth, ev_other, ev_data, ev_resp, ev_out = "metrics.json";
    double ev_split = 0.0;
    std::uint64_t ev_seed = 1;
    int ev_q = 4, ev_m = 8;
    PenaltyFlags ev_penalty;
    auto* ev = app.add_subcommand("evaluate", "score a fit or run a split study");
    ev->add_option("--fit", ev_fit, "result.json to score");
    ev->add_option("--truth", ev_truth, "truth.json reference");
    ev->add_option("--other", ev_other, "second result.json to compare against");
    ev->add_option("--data", ev_data, "data.csv (for --split or coef MSE)");
    ev->add_option("--responses", ev_resp, "responses.csv");
    ev->add_option("--split", ev_split, "training fraction for held-out prediction");
    ev->add_option("--seed", ev_seed, "split RNG seed");
    ev->add_option("--q", ev_q, "coefficient basis order");
    ev->add_option("--m", ev_m, "coefficient basis interior knots");
    ev->add_option("--out", ev_out, "metrics JSON output path");
    ev_penalty.attach(ev);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return cmd_simulate(sim_flags, sim_out);
        if (fit->parsed())
            return cmd_fit(fit_data, fit_resp, fit_truth, fit_q, fit_m, fit_l1,
                           fit_l2, fit_l1grid, fit_l2grid, fit_rounds, fit_weights,
                           fit_penalty, fit_out);
        if (rep->parsed())
            return cmd_replicate(rep_flags, rep_reps, rep_methods, rep_rounds,
                                 rep_penalty, rep_out);
        if (ev->parsed())
            return cmd_evaluate(ev_fit, ev_truth, ev_other, ev_data, ev_resp,
                                ev_split, ev_seed, ev_q, ev_m, ev_penalty, ev_out);
    } catch (const ff::divergence_error& e) {
        std::cerr << "error: " << e.what() << " (iteration " << e.iter << ")\n";
        return 3;
    } catch (const ff::tuning_failure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
