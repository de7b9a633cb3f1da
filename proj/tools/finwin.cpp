#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "finwin/diagnostics.hpp"
#include "finwin/experiments.hpp"
#include "finwin/finite_mdp.hpp"
#include "finwin/io.hpp"
#include "finwin/model.hpp"
#include "finwin/quantizer.hpp"
#include "finwin/stability.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalidInput = 2;
constexpr int kExitNotConverged = 3;
constexpr int kExitCapacity = 4;

finwin::PomdpModel load_validated(const std::string& path) {
    finwin::PomdpModel model = finwin::io::load_model(path);
    const auto report = finwin::validate_model(model);
    if (!report.empty()) {
        std::cerr << "model validation failed for " << path << ":\n";
        for (const auto& v : report) std::cerr << "  - " << v.message << "\n";
        throw finwin::Error("invalid model");
    }
    return model;
}

int cmd_solve(const std::string& model_path, int window, double tolerance, double prune,
              int max_iter, const std::string& out_path) {
    const finwin::PomdpModel model = load_validated(model_path);
    finwin::QuantizerOptions qopt;
    qopt.prune_threshold = prune;
    const auto set = finwin::build_quantized_set(model, window, qopt);
    const auto mdp = finwin::build_finite_mdp(set, model);
    const auto solved = finwin::value_iteration(mdp, tolerance, max_iter);
    finwin::io::atomic_write(out_path, finwin::io::solved_policy_to_json(solved, set).dump(2) + "\n");
    std::cout << "window size     " << window << "\n"
              << "states          " << set.size() << "\n"
              << "iterations      " << solved.iteration_count << "\n"
              << "residual        " << finwin::io::number(solved.residual) << "\n"
              << "policy written  " << out_path << "\n";
    return kExitOk;
}

int cmd_diagnose(const std::string& model_path, std::optional<double> beta_override, int n_max,
                 std::optional<double> asserted_alpha, const std::string& out_path) {
    const finwin::PomdpModel model = load_validated(model_path);
    finwin::DiagnosticsOptions opt;
    opt.beta_override = beta_override;
    opt.n_max = n_max;
    opt.asserted_alpha = asserted_alpha;
    const auto report = finwin::make_diagnostics(model, opt);

    std::ostringstream table;
    table << "delta_T per action :";
    for (double d : report.delta_T_per_action) table << ' ' << finwin::io::number(d);
    table << "\ndelta_T min        : " << finwin::io::number(report.delta_T_min)
          << "\ndelta_Q            : " << finwin::io::number(report.delta_Q)
          << "\nalpha              : " << finwin::io::number(report.alpha)
          << "\nalpha_X            : " << finwin::io::number(report.alpha_X)
          << "\nalpha_c            : " << finwin::io::number(report.alpha_c)
          << "\nalpha_Z selected   : " << finwin::io::number(report.alpha_Z_selected)
          << "\nbeta               : " << finwin::io::number(report.beta)
          << "\nbeta threshold     : " << finwin::io::number(report.beta_threshold) << "\n";
    if (report.constants) {
        table << "K                  : " << finwin::io::number(report.constants->K) << "\n";
    } else {
        table << "K                  : unavailable (" << report.constants_unavailable_reason
              << ")\n";
    }
    if (report.asserted_alpha) {
        table << "asserted alpha     : " << finwin::io::number(*report.asserted_alpha)
              << (report.alpha_assertion_mismatch ? "  ** disagrees with computed alpha **"
                                                  : "  (matches)")
              << "\n";
    }
    std::cout << table.str();
    if (!out_path.empty())
        finwin::io::atomic_write(out_path, finwin::io::diagnostics_to_json(report).dump(2) + "\n");
    return kExitOk;
}

int cmd_stability(const std::string& model_path, int n_max, const std::string& mode,
                  std::uint64_t samples, std::uint64_t seed, int action,
                  const std::string& out_path) {
    const finwin::PomdpModel model = load_validated(model_path);
    const auto m = mode == "mc" ? finwin::StabilityEstimate::Mode::MonteCarlo
                                : finwin::StabilityEstimate::Mode::Exact;
    const auto curve = finwin::stability_decay_curve(
        model, finwin::Belief(model.prior), finwin::Belief(model.reference_prior),
        finwin::fixed_action_policy(action), n_max, m, samples, seed);
    const std::string csv = finwin::io::stability_curve_csv(curve);
    if (out_path.empty()) {
        std::cout << csv;
    } else {
        finwin::io::atomic_write(out_path, csv);
        std::cout << "decay curve written to " << out_path << "\n";
    }
    std::cout << "note: the policy supremum is replaced by the fixed action " << action << "\n";
    return kExitOk;
}

int cmd_experiment(int case_id, const std::string& n_range, const std::string& mode,
                   std::uint64_t samples, std::uint64_t seed, int horizon,
                   const std::string& out_dir) {
    finwin::EvalConfig config;
    config.mode = mode == "mc" ? finwin::EvalMode::MonteCarlo : finwin::EvalMode::ExactTruncated;
    config.samples = samples;
    config.horizon = horizon;

    std::vector<int> range;
    const auto colon = n_range.find(':');
    if (colon == std::string::npos) throw finwin::Error("N range must look like 0:4");
    const int lo = std::stoi(n_range.substr(0, colon));
    const int hi = std::stoi(n_range.substr(colon + 1));
    for (int n = lo; n <= hi; ++n) range.push_back(n);

    const auto result = finwin::run_machine_repair(case_id, range, config, seed);
    std::filesystem::create_directories(out_dir);
    const auto base = std::filesystem::path(out_dir) / ("case" + std::to_string(case_id));
    finwin::io::atomic_write(base.string() + ".csv", finwin::io::experiment_csv(result));
    std::cout << "case " << case_id << " written to " << base.string() << ".csv\n";
    try {
        finwin::io::atomic_write(base.string() + "_normalized.csv",
                                 finwin::io::normalized_csv(finwin::error_curves(result)));
        std::cout << "normalized curves written to " << base.string() << "_normalized.csv\n";
    } catch (const finwin::DegenerateNormalization& e) {
        std::cout << "normalized curves skipped: " << e.what() << "\n";
    }
    return kExitOk;
}

int cmd_gaussian_table(int obs_levels, const std::string& ratios_path,
                       const std::string& out_path) {
    std::string csv;
    if (ratios_path.empty()) {
        csv = finwin::io::gaussian_table_csv(finwin::gaussian_table(obs_levels));
    } else {
        std::istringstream in(finwin::io::read_file(ratios_path));
        std::ostringstream out;
        out << "ratio_t,ratio_q,delta_T,delta_Q_hat,alpha_condition_holds\n";
        std::string line;
        while (std::getline(in, line)) {
            for (char& ch : line)
                if (ch == ',') ch = ' ';
            std::istringstream fields(line);
            double rt = 0.0, rq = 0.0;
            if (!(fields >> rt >> rq)) continue;
            const auto g = finwin::gaussian_dobrushin(rt, rq, obs_levels);
            out << finwin::io::number(rt) << ',' << finwin::io::number(rq) << ','
                << finwin::io::number(g.delta_T) << ',' << finwin::io::number(g.delta_Q_hat) << ','
                << (g.alpha_condition_holds ? 1 : 0) << '\n';
        }
        csv = out.str();
    }
    if (out_path.empty()) {
        std::cout << csv;
    } else {
        finwin::io::atomic_write(out_path, csv);
        std::cout << "table written to " << out_path << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"finwin: finite-window policy synthesis and filter-stability diagnostics for "
                 "finite POMDPs"};
    app.require_subcommand(1);

    std::string model_path, out_path, mode = "exact", n_range = "0:4", ratios_path;
    int window = 1, n_max = 5, action = 0, case_id = 1, obs_levels = 2, horizon = 60;
    int max_iter = 200000;
    double tolerance = 1e-9, prune = 0.0;
    std::optional<double> beta_override, asserted_alpha;
    std::uint64_t samples = 10000, seed = 0;

    auto* solve = app.add_subcommand("solve", "synthesize a finite-window policy");
    solve->add_option("model", model_path, "model JSON file")->required();
    solve->add_option("--window", window, "window size N")->required();
    solve->add_option("--tolerance", tolerance, "value-iteration tolerance");
    solve->add_option("--prune", prune, "history prune threshold");
    solve->add_option("--max-iter", max_iter, "value-iteration sweep cap");
    solve->add_option("--out", out_path, "output policy JSON path")->required();

    auto* diagnose = app.add_subcommand("diagnose", "contraction coefficients and bound constants");
    diagnose->add_option("model", model_path, "model JSON file")->required();
    diagnose->add_option("--beta-override", beta_override, "evaluate bounds at this discount");
    diagnose->add_option("--N-max", n_max, "largest window size in the bound table");
    diagnose->add_option("--assert-alpha", asserted_alpha, "flag if computed alpha differs");
    diagnose->add_option("--out", out_path, "report JSON path");

    auto* stability = app.add_subcommand("stability", "filter-stability decay curve");
    stability->add_option("model", model_path, "model JSON file")->required();
    stability->add_option("--N-max", n_max, "largest window size");
    stability->add_option("--mode", mode, "exact or mc")
        ->check(CLI::IsMember({"exact", "mc"}));
    stability->add_option("--samples", samples, "Monte Carlo samples per N");
    stability->add_option("--seed", seed, "Monte Carlo seed");
    stability->add_option("--action", action, "fixed action fed to both filters");
    stability->add_option("--out", out_path, "CSV path (stdout when omitted)");

    auto* experiment = app.add_subcommand("experiment", "machine-repair benchmark study");
    experiment->add_option("--case", case_id, "benchmark case 1, 2 or 3")
        ->check(CLI::Range(1, 3));
    experiment->add_option("--N-range", n_range, "window sizes, e.g. 0:4");
    experiment->add_option("--mode", mode, "exact or mc")
        ->check(CLI::IsMember({"exact", "mc"}));
    experiment->add_option("--samples", samples, "Monte Carlo rollouts per history");
    experiment->add_option("--seed", seed, "Monte Carlo seed");
    experiment->add_option("--horizon", horizon, "cost truncation horizon");
    experiment->add_option("--out", out_path, "output directory")->required();

    auto* gaussian = app.add_subcommand("gaussian-table", "discretized Gaussian channel table");
    gaussian->add_option("--obs-levels", obs_levels, "2 or 3 channel levels")
        ->check(CLI::IsMember({2, 3}));
    gaussian->add_option("--ratios", ratios_path, "file of ratio_t ratio_q pairs");
    gaussian->add_option("--out", out_path, "CSV path (stdout when omitted)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) return cmd_solve(model_path, window, tolerance, prune, out_path);
        if (diagnose->parsed())
            return cmd_diagnose(model_path, beta_override, n_max, asserted_alpha, out_path);
        if (stability->parsed())
            return cmd_stability(model_path, n_max, mode, samples, seed, action, out_path);
        if (experiment->parsed())
            return cmd_experiment(case_id, n_range, mode, samples, seed, horizon, out_path);
        if (gaussian->parsed()) return cmd_gaussian_table(obs_levels, ratios_path, out_path);
    } catch (const finwin::NotConverged& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNotConverged;
    } catch (const finwin::CapacityExceeded& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCapacity;
    } catch (const finwin::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalidInput;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: cannot parse input: " << e.what() << "\n";
        return kExitInvalidInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalidInput;
    }
    return kExitOk;
}
